//! Recursion-free regular monitors: syntax, operational semantics,
//! decision procedures for verdict and ω-verdict equivalence, axiom
//! systems, normal forms with derivations, and a derivation checker.

pub mod axioms;
pub mod equivalence;
pub mod gen;
pub mod normalize;
pub mod prooflog;
pub mod semantics;
pub mod syntax;
pub mod term;

pub use axioms::{Bindings, Schema, SystemName};
pub use equivalence::{Counterexample, EquivMode, Outcome};
pub use normalize::{normalize, CanonicalForm, FormKind, NormalizeError};
pub use prooflog::{check_derivation, parse_derivation, Derivation};
pub use syntax::{parse_equation, parse_monitor, print_monitor};
pub use term::{Action, Alphabet, Equation, Monitor, Substitution, VarName};
