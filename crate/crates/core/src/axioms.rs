//! Axiom schemas, the trace-shaped helper terms used by the `O2` family,
//! and the named axiom systems built from them.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::equivalence::{closed_equiv, Counterexample, EquivMode};
use crate::gen::{random_monitor, GenConfig};
use crate::semantics::{is_prefix, traces_upto, Trace};
use crate::term::{Action, Alphabet, Equation, Monitor, Substitution, VarName};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Schema {
    A1,
    A2,
    A3,
    A4,
    Ea,
    Ya,
    Na,
    Da,
    Y,
    N,
    YOmega,
    NOmega,
    O1,
    O2,
    V1,
    V1Omega,
}

/// Parameters a schema expects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    None,
    Action,
    TraceK,
}

pub const ALL_SCHEMAS: [Schema; 16] = [
    Schema::A1,
    Schema::A2,
    Schema::A3,
    Schema::A4,
    Schema::Ea,
    Schema::Ya,
    Schema::Na,
    Schema::Da,
    Schema::Y,
    Schema::N,
    Schema::YOmega,
    Schema::NOmega,
    Schema::O1,
    Schema::O2,
    Schema::V1,
    Schema::V1Omega,
];

impl Schema {
    pub fn name(self) -> &'static str {
        match self {
            Schema::A1 => "A1",
            Schema::A2 => "A2",
            Schema::A3 => "A3",
            Schema::A4 => "A4",
            Schema::Ea => "E_a",
            Schema::Ya => "Y_a",
            Schema::Na => "N_a",
            Schema::Da => "D_a",
            Schema::Y => "Y",
            Schema::N => "N",
            Schema::YOmega => "Y_omega",
            Schema::NOmega => "N_omega",
            Schema::O1 => "O1",
            Schema::O2 => "O2",
            Schema::V1 => "V1",
            Schema::V1Omega => "V1_omega",
        }
    }

    pub fn arity(self) -> Arity {
        match self {
            Schema::Ea | Schema::Ya | Schema::Na | Schema::Da => Arity::Action,
            Schema::O2 => Arity::TraceK,
            _ => Arity::None,
        }
    }

    /// Whether instantiation needs the alphabet to be finite.
    pub fn needs_finite(self) -> bool {
        matches!(
            self,
            Schema::Y | Schema::N | Schema::YOmega | Schema::NOmega | Schema::O2 | Schema::V1 | Schema::V1Omega
        )
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Schema {
    type Err = AxiomError;

    fn from_str(s: &str) -> Result<Schema, AxiomError> {
        let s = s.replace('ω', "omega");
        ALL_SCHEMAS.iter().copied().find(|k| k.name() == s).ok_or_else(|| AxiomError::UnknownSchema(s.to_string()))
    }
}

/// Parameter values for a schema.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bindings {
    None,
    Action(Action),
    TraceK { s: Trace, k: usize },
}

impl Bindings {
    fn arity(&self) -> Arity {
        match self {
            Bindings::None => Arity::None,
            Bindings::Action(_) => Arity::Action,
            Bindings::TraceK { .. } => Arity::TraceK,
        }
    }
}

impl fmt::Display for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bindings::None => f.write_str("-"),
            Bindings::Action(a) => write!(f, "{a}"),
            Bindings::TraceK { s, k } => {
                let s: Vec<&str> = s.iter().map(Action::as_str).collect();
                write!(f, "s={}, k={k}", s.join(" "))
            }
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AxiomError {
    #[error("schema {schema} expects {expected:?} parameters")]
    ArityMismatch { schema: Schema, expected: Arity },
    #[error("schema {0} needs a finite alphabet")]
    InfiniteAlphabetForFiniteSchema(Schema),
    #[error("action {0} is not in the alphabet")]
    UnknownAction(Action),
    #[error("O2 needs a nonempty trace and k >= 1")]
    BadTraceParameter,
    #[error("system {0} contains the O family and needs --max-s/--max-k bounds")]
    MissingBounds(SystemName),
    #[error("unknown schema `{0}`")]
    UnknownSchema(String),
    #[error("unknown axiom system `{0}`")]
    UnknownSystem(String),
    #[error("bad bindings `{0}`")]
    BadBindings(String),
}

/// A schema instantiated at concrete parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AxiomInstance {
    pub schema: Schema,
    pub bindings: Bindings,
    pub equation: Equation,
}

impl fmt::Display for AxiomInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.equation)
    }
}

/// `s.m`: the prefix chain along `s` ending in `m`.
pub fn prefix_seq(s: &[Action], m: Monitor) -> Monitor {
    s.iter().rev().fold(m, |acc, a| Monitor::prefix(a.clone(), acc))
}

/// All prefixes of `s`, shortest first, including `ε` and `s`.
pub fn pre_set(s: &[Action]) -> Vec<Trace> {
    (0..=s.len()).map(|i| s[..i].to_vec()).collect()
}

/// `s^k`
pub fn power(s: &[Action], k: usize) -> Trace {
    s.iter().cloned().cycle().take(s.len() * k).collect()
}

/// `Σ_{a∈Act} a.m`, left-nested in alphabet order.
pub fn fan(m: &Monitor, actions: &[Action]) -> Monitor {
    Monitor::sum_of(actions.iter().map(|a| Monitor::prefix(a.clone(), m.clone())))
}

/// Sum of `s'.m` over every `s'` with `|s'| ≤ |s|` that is not a prefix of
/// `s`, ordered by length then lexicographically.
pub fn bar_leq(s: &[Action], m: &Monitor, actions: &[Action]) -> Monitor {
    let pre = pre_set(s);
    Monitor::sum_of(
        traces_upto(actions, s.len()).into_iter().filter(|t| !pre.contains(t)).map(|t| prefix_seq(&t, m.clone())),
    )
}

/// `bar_leq(s, m) + s.Σ_a a.m`
pub fn bar(s: &[Action], m: &Monitor, actions: &[Action]) -> Monitor {
    let tail = prefix_seq(s, fan(m, actions));
    let low = bar_leq(s, m, actions);
    if low == Monitor::End {
        tail
    } else {
        Monitor::sum(low, tail)
    }
}

/// `bar(s, m)` for `k = 1`; otherwise
/// `Σ_{1≤i≤k-2} s^i.bar_leq(s, m) + s^{k-1}.bar(s, m)`.
pub fn bar_k(s: &[Action], k: usize, m: &Monitor, actions: &[Action]) -> Result<Monitor, AxiomError> {
    if s.is_empty() || k == 0 {
        return Err(AxiomError::BadTraceParameter);
    }
    if k == 1 {
        return Ok(bar(s, m, actions));
    }
    let low = bar_leq(s, m, actions);
    let mut parts: Vec<Monitor> = (1..k - 1).map(|i| prefix_seq(&power(s, i), low.clone())).collect();
    parts.push(prefix_seq(&power(s, k - 1), bar(s, m, actions)));
    Ok(Monitor::sum_of(parts))
}

/// Minimal traces both accepted and rejected by `bar_k(s, k, yes + no)`.
pub fn bar_k_both_generators(s: &[Action], k: usize, actions: &[Action]) -> Vec<Trace> {
    let w = power(s, k);
    let start = if k == 1 { 0 } else { s.len() };
    let mut out = Vec::new();
    for i in start..w.len() {
        for b in actions {
            if *b != w[i] {
                let mut g = w[..i].to_vec();
                g.push(b.clone());
                out.push(g);
            }
        }
    }
    for c in actions {
        let mut g = w.clone();
        g.push(c.clone());
        out.push(g);
    }
    out
}

/// Whether `t` is both accepted and rejected by `bar_k(s, k, yes + no)`.
pub fn bar_k_covers(s: &[Action], k: usize, t: &[Action]) -> bool {
    let w = power(s, k);
    let long_enough = k == 1 || is_prefix(s, t);
    long_enough && !is_prefix(t, &w)
}

fn x() -> Monitor {
    Monitor::var("x")
}

fn y() -> Monitor {
    Monitor::var("y")
}

fn z() -> Monitor {
    Monitor::var("z")
}

/// Builds the instance of `schema` at `bindings`.
///
/// Schemas without an action parameter that still mention one (`V1`,
/// `V1_omega`) use the first action of the alphabet.
pub fn instantiate(schema: Schema, bindings: &Bindings, alphabet: &Alphabet) -> Result<AxiomInstance, AxiomError> {
    if bindings.arity() != schema.arity() {
        return Err(AxiomError::ArityMismatch { schema, expected: schema.arity() });
    }
    if schema.needs_finite() && !alphabet.is_finite() {
        return Err(AxiomError::InfiniteAlphabetForFiniteSchema(schema));
    }
    let acts = alphabet.actions().unwrap_or(&[]);
    let action = match bindings {
        Bindings::Action(a) => {
            if !alphabet.contains(a) {
                return Err(AxiomError::UnknownAction(a.clone()));
            }
            Some(a.clone())
        }
        _ => None,
    };
    let pre = |a: &Action, m: Monitor| Monitor::prefix(a.clone(), m);
    let sum = Monitor::sum;
    let eq = match schema {
        Schema::A1 => Equation::new(sum(x(), y()), sum(y(), x())),
        Schema::A2 => Equation::new(sum(x(), sum(y(), z())), sum(sum(x(), y()), z())),
        Schema::A3 => Equation::new(sum(x(), x()), x()),
        Schema::A4 => Equation::new(sum(x(), Monitor::End), x()),
        Schema::Ea => {
            let a = action.expect("arity checked");
            Equation::new(pre(&a, Monitor::End), Monitor::End)
        }
        Schema::Ya => {
            let a = action.expect("arity checked");
            Equation::new(Monitor::Yes, sum(Monitor::Yes, pre(&a, Monitor::Yes)))
        }
        Schema::Na => {
            let a = action.expect("arity checked");
            Equation::new(Monitor::No, sum(Monitor::No, pre(&a, Monitor::No)))
        }
        Schema::Da => {
            let a = action.expect("arity checked");
            Equation::new(pre(&a, sum(x(), y())), sum(pre(&a, x()), pre(&a, y())))
        }
        Schema::Y => Equation::new(Monitor::Yes, sum(Monitor::Yes, fan(&Monitor::Yes, acts))),
        Schema::N => Equation::new(Monitor::No, sum(Monitor::No, fan(&Monitor::No, acts))),
        Schema::YOmega => Equation::new(Monitor::Yes, fan(&Monitor::Yes, acts)),
        Schema::NOmega => Equation::new(Monitor::No, fan(&Monitor::No, acts)),
        Schema::O1 => Equation::new(Monitor::both(), sum(Monitor::both(), x())),
        Schema::O2 => {
            let Bindings::TraceK { s, k } = bindings else { unreachable!("arity checked") };
            if s.iter().any(|a| !alphabet.contains(a)) {
                let bad = s.iter().find(|a| !alphabet.contains(a)).cloned().expect("found");
                return Err(AxiomError::UnknownAction(bad));
            }
            let bk = bar_k(s, *k, &Monitor::both(), acts)?;
            Equation::new(sum(sum(x(), prefix_seq(s, x())), bk.clone()), sum(x(), bk))
        }
        Schema::V1 => Equation::new(x(), sum(x(), pre(&acts[0], x()))),
        Schema::V1Omega => Equation::new(x(), pre(&acts[0], x())),
    };
    Ok(AxiomInstance { schema, bindings: bindings.clone(), equation: eq })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SystemName {
    Ev,
    Eomega,
    EvOpen,
    EvfOpen,
    Ev1Open,
    Eomega1Open,
    EomegafOpen,
}

pub const ALL_SYSTEMS: [SystemName; 7] = [
    SystemName::Ev,
    SystemName::Eomega,
    SystemName::EvOpen,
    SystemName::EvfOpen,
    SystemName::Ev1Open,
    SystemName::Eomega1Open,
    SystemName::EomegafOpen,
];

impl SystemName {
    pub fn name(self) -> &'static str {
        match self {
            SystemName::Ev => "Ev",
            SystemName::Eomega => "Eomega",
            SystemName::EvOpen => "Ev'",
            SystemName::EvfOpen => "Evf'",
            SystemName::Ev1Open => "Ev1'",
            SystemName::Eomega1Open => "Eomega1'",
            SystemName::EomegafOpen => "Eomegaf'",
        }
    }

    pub fn schemas(self) -> &'static [Schema] {
        use Schema::*;
        match self {
            SystemName::Ev => &[A1, A2, A3, A4, Ea, Ya, Na, Da],
            SystemName::Eomega => &[A1, A2, A3, A4, Ea, Ya, Na, Da, YOmega, NOmega],
            SystemName::EvOpen => &[A1, A2, A3, A4, Ea, Ya, Na, Da, O1],
            SystemName::EvfOpen => &[A1, A2, A3, A4, Ea, Ya, Na, Da, O1, O2],
            SystemName::Ev1Open => &[A1, A2, A3, A4, Ea, Ya, Na, Da, O1, V1],
            SystemName::Eomega1Open => &[A1, A2, A3, A4, V1Omega, O1],
            SystemName::EomegafOpen => &[A1, A2, A3, A4, Ea, Ya, Na, Da, YOmega, NOmega, O1, O2],
        }
    }

    pub fn contains(self, s: Schema) -> bool {
        self.schemas().contains(&s)
    }

    /// The equivalence the system is sound for.
    pub fn mode(self) -> EquivMode {
        match self {
            SystemName::Eomega | SystemName::Eomega1Open | SystemName::EomegafOpen => EquivMode::OmegaVerdict,
            _ => EquivMode::Verdict,
        }
    }
}

impl fmt::Display for SystemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemName {
    type Err = AxiomError;

    fn from_str(s: &str) -> Result<SystemName, AxiomError> {
        let norm = s.replace('ω', "omega").replace(['_', ','], "");
        ALL_SYSTEMS.iter().copied().find(|k| k.name() == norm).ok_or_else(|| AxiomError::UnknownSystem(s.to_string()))
    }
}

/// Limits for enumerating the `O2` family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchemaBounds {
    pub max_trace_len: usize,
    pub max_k: usize,
}

/// Every instance of the system, with `O2` restricted by `bounds`.
pub fn list_system(
    system: SystemName,
    alphabet: &Alphabet,
    bounds: Option<SchemaBounds>,
) -> Result<Vec<AxiomInstance>, AxiomError> {
    let mut out = Vec::new();
    for &schema in system.schemas() {
        match schema.arity() {
            Arity::None => out.push(instantiate(schema, &Bindings::None, alphabet)?),
            Arity::Action => {
                let acts = alphabet.actions().ok_or(AxiomError::InfiniteAlphabetForFiniteSchema(schema))?;
                for a in acts {
                    out.push(instantiate(schema, &Bindings::Action(a.clone()), alphabet)?);
                }
            }
            Arity::TraceK => {
                let b = bounds.ok_or(AxiomError::MissingBounds(system))?;
                let acts = alphabet.actions().ok_or(AxiomError::InfiniteAlphabetForFiniteSchema(schema))?;
                for s in traces_upto(acts, b.max_trace_len).into_iter().filter(|s| !s.is_empty()) {
                    for k in 1..=b.max_k {
                        out.push(instantiate(schema, &Bindings::TraceK { s: s.clone(), k }, alphabet)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One failed trial of [`soundness_fuzz`].
#[derive(Clone, Debug)]
pub struct FuzzFailure {
    pub substitution: Substitution,
    pub counterexample: Counterexample,
}

#[derive(Clone, Debug)]
pub struct FuzzReport {
    pub instance: AxiomInstance,
    pub trials: usize,
    pub failures: Vec<FuzzFailure>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks an instance under closed substitutions. The first trials use the
/// single-variable probes `end`, `yes`, `no`, `a.yes`, `a.no` and
/// `a.(yes + no)` for each action; the rest are random closed terms.
pub fn soundness_fuzz(
    inst: &AxiomInstance,
    alphabet: &Alphabet,
    mode: EquivMode,
    trials: usize,
    seed: u64,
) -> FuzzReport {
    let acts = alphabet.actions().map(<[Action]>::to_vec).unwrap_or_else(|| vec![Action::new("a")]);
    let vars: Vec<VarName> = inst.equation.vars().into_iter().collect();
    let mut probes = vec![Monitor::End, Monitor::Yes, Monitor::No];
    for a in &acts {
        for v in [Monitor::Yes, Monitor::No, Monitor::both()] {
            probes.push(Monitor::prefix(a.clone(), v));
        }
    }
    let cfg = GenConfig { max_depth: 3, vars: Vec::new(), actions: acts.clone(), decay: 0.7, min_size: 3 };
    let mut failures = Vec::new();
    for trial in 0..trials {
        let sigma = if vars.is_empty() {
            Substitution::identity()
        } else if trial < probes.len() * vars.len() {
            let (vi, pi) = (trial / probes.len(), trial % probes.len());
            let mut s = Substitution::from_pairs(vars.iter().map(|v| (v.clone(), Monitor::End)));
            s.insert(vars[vi].clone(), probes[pi].clone());
            s
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            Substitution::from_pairs(vars.iter().map(|v| (v.clone(), random_monitor(&mut rng, &cfg))))
        };
        let eq = inst.equation.apply(&sigma);
        if let Some(cex) = closed_equiv(&eq.lhs, &eq.rhs, alphabet, mode) {
            failures.push(FuzzFailure { substitution: sigma.clone(), counterexample: cex.with_substitution(sigma) });
        }
        if vars.is_empty() {
            break;
        }
    }
    FuzzReport { instance: inst.clone(), trials: if vars.is_empty() { 1 } else { trials }, failures }
}

/// `x + a^n.x + bar_k(a^n, 3, yes + no) = x + bar_k(a^n, 3, yes + no)`
pub fn witness_family(n: usize, a: &Action, alphabet: &Alphabet) -> Result<Equation, AxiomError> {
    if n == 0 {
        return Err(AxiomError::BadTraceParameter);
    }
    let s = vec![a.clone(); n];
    Ok(instantiate(Schema::O2, &Bindings::TraceK { s, k: 3 }, alphabet)?.equation)
}

/// Parses bindings in the proof-file syntax: `-`, an action, or
/// `s=a b, k=3`.
pub fn parse_bindings(text: &str) -> Result<Bindings, AxiomError> {
    let t = text.trim();
    if t == "-" || t.is_empty() {
        return Ok(Bindings::None);
    }
    if let Some(rest) = t.strip_prefix("s=") {
        let (s, k) = rest.split_once(',').ok_or_else(|| AxiomError::BadBindings(t.to_string()))?;
        let k = k
            .trim()
            .strip_prefix("k=")
            .and_then(|k| k.trim().parse().ok())
            .ok_or_else(|| AxiomError::BadBindings(t.to_string()))?;
        let s = crate::syntax::parse_trace(s).map_err(|_| AxiomError::BadBindings(t.to_string()))?;
        return Ok(Bindings::TraceK { s, k });
    }
    if crate::syntax::is_identifier(t) {
        return Ok(Bindings::Action(Action::new(t)));
    }
    Err(AxiomError::BadBindings(t.to_string()))
}
