//! Equational derivations and their checker.
//!
//! A derivation is a list of numbered steps. Each step states an equation
//! and the rule that justifies it from earlier steps. The checker is purely
//! syntactic: every equation must be exactly what its rule produces, with
//! no reasoning modulo associativity or commutativity.
//!
//! File format, one record per line, `#` comments allowed:
//!
//! ```text
//! system: Ev'
//! alphabet: a,b
//! vars: x, y                  # only needed with an infinite alphabet
//! bounds: max-s=3, max-k=3    # optional, restricts O2
//! step 1: yes = yes + a.yes by axiom(Y_a; a; -)
//! step 2: yes + a.yes = yes by sym(1)
//! ```
//!
//! Rules: `refl`, `sym(i)`, `trans(i, j)`, `cong-sum(i, j)`,
//! `cong-prefix(a, i)`, `subst(i; x -> t, ...)` and
//! `axiom(NAME; BINDINGS; SUBST)` where `BINDINGS` is `-`, an action, or
//! `s=a b, k=3`, and `SUBST` is `-` or `x -> t, ...`. Axiom steps may use
//! the schema in either orientation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::axioms::{instantiate, parse_bindings, AxiomError, Bindings, Schema, SchemaBounds, SystemName};
use crate::syntax::{parse_equation_with_vars, parse_substitution, split_headers, ParseError};
use crate::term::{Action, Alphabet, Equation, Monitor, Substitution, VarName};

pub type StepId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Axiom { schema: Schema, bindings: Bindings, sigma: Substitution },
    Reflexivity,
    Symmetry(StepId),
    Transitivity(StepId, StepId),
    CongruenceSum(StepId, StepId),
    CongruencePrefix(Action, StepId),
    Substitutivity(StepId, Substitution),
}

impl Justification {
    pub fn references(&self) -> Vec<StepId> {
        match self {
            Justification::Axiom { .. } | Justification::Reflexivity => vec![],
            Justification::Symmetry(i)
            | Justification::CongruencePrefix(_, i)
            | Justification::Substitutivity(i, _) => {
                vec![*i]
            }
            Justification::Transitivity(i, j) | Justification::CongruenceSum(i, j) => vec![*i, *j],
        }
    }

    /// The same justification with every step reference passed through `f`.
    pub fn renumbered(&self, f: impl Fn(StepId) -> StepId) -> Justification {
        match self {
            Justification::Symmetry(i) => Justification::Symmetry(f(*i)),
            Justification::Transitivity(i, j) => Justification::Transitivity(f(*i), f(*j)),
            Justification::CongruenceSum(i, j) => Justification::CongruenceSum(f(*i), f(*j)),
            Justification::CongruencePrefix(a, i) => Justification::CongruencePrefix(a.clone(), f(*i)),
            Justification::Substitutivity(i, s) => Justification::Substitutivity(f(*i), s.clone()),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Axiom { schema, bindings, sigma } => write!(f, "axiom({schema}; {bindings}; {sigma})"),
            Justification::Reflexivity => f.write_str("refl"),
            Justification::Symmetry(i) => write!(f, "sym({i})"),
            Justification::Transitivity(i, j) => write!(f, "trans({i}, {j})"),
            Justification::CongruenceSum(i, j) => write!(f, "cong-sum({i}, {j})"),
            Justification::CongruencePrefix(a, i) => write!(f, "cong-prefix({a}, {i})"),
            Justification::Substitutivity(i, s) => write!(f, "subst({i}; {s})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub id: StepId,
    pub equation: Equation,
    pub justification: Justification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub system: SystemName,
    pub alphabet: Alphabet,
    pub bounds: Option<SchemaBounds>,
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn conclusion(&self) -> Option<&Equation> {
        self.steps.last().map(|s| &s.equation)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Whether every step is a reflexivity step.
    pub fn is_trivial(&self) -> bool {
        self.steps.iter().all(|s| s.justification == Justification::Reflexivity)
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        for s in &self.steps {
            out.extend(s.equation.vars());
            if let Justification::Axiom { sigma, .. } | Justification::Substitutivity(_, sigma) = &s.justification {
                for (x, t) in &sigma.0 {
                    out.insert(x.clone());
                    out.extend(t.vars());
                }
            }
        }
        out
    }

    /// Given `left` proving `m = t` and `right` proving `n = t` in the same
    /// system, a derivation of `m = n`.
    pub fn join(left: &Derivation, right: &Derivation) -> Option<Derivation> {
        let (l, r) = (left.conclusion()?, right.conclusion()?);
        if l.rhs != r.rhs || left.system != right.system || left.alphabet != right.alphabet {
            return None;
        }
        let offset = left.steps.len();
        let mut steps = left.steps.clone();
        steps.extend(right.steps.iter().map(|s| Step {
            id: s.id + offset,
            equation: s.equation.clone(),
            justification: s.justification.renumbered(|i| i + offset),
        }));
        let (last_left, last_right) = (offset, steps.len());
        let sym_id = last_right + 1;
        steps.push(Step { id: sym_id, equation: r.flipped(), justification: Justification::Symmetry(last_right) });
        steps.push(Step {
            id: sym_id + 1,
            equation: Equation::new(l.lhs.clone(), r.lhs.clone()),
            justification: Justification::Transitivity(last_left, sym_id),
        });
        Some(Derivation { system: left.system, alphabet: left.alphabet.clone(), bounds: left.bounds, steps })
    }

    /// Renders the derivation in the file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "system: {}", self.system);
        let _ = writeln!(out, "alphabet: {}", self.alphabet);
        let vars = self.vars();
        if !vars.is_empty() {
            let v: Vec<&str> = vars.iter().map(VarName::as_str).collect();
            let _ = writeln!(out, "vars: {}", v.join(", "));
        }
        if let Some(b) = self.bounds {
            let _ = writeln!(out, "bounds: max-s={}, max-k={}", b.max_trace_len, b.max_k);
        }
        for s in &self.steps {
            let _ = writeln!(out, "step {}: {} by {}", s.id, s.equation, s.justification);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckErrorKind {
    NotAnInstance,
    ShapeMismatch,
    DanglingReference,
    AxiomNotInSystem,
    ConclusionMismatch,
}

impl fmt::Display for CheckErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckErrorKind::NotAnInstance => "not an instance",
            CheckErrorKind::ShapeMismatch => "shape mismatch",
            CheckErrorKind::DanglingReference => "dangling reference",
            CheckErrorKind::AxiomNotInSystem => "axiom not in system",
            CheckErrorKind::ConclusionMismatch => "conclusion mismatch",
        })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("step {step}: {kind}: {detail}")]
pub struct CheckError {
    pub step: StepId,
    pub kind: CheckErrorKind,
    pub detail: String,
}

fn fail(step: StepId, kind: CheckErrorKind, detail: impl Into<String>) -> CheckError {
    CheckError { step, kind, detail: detail.into() }
}

/// Checks one step against the equations of earlier steps.
pub fn check_step(
    system: SystemName,
    alphabet: &Alphabet,
    bounds: Option<SchemaBounds>,
    prior: &BTreeMap<StepId, Equation>,
    step: &Step,
) -> Result<(), CheckError> {
    let id = step.id;
    let get = |i: StepId| -> Result<&Equation, CheckError> {
        if i >= id {
            return Err(fail(id, CheckErrorKind::DanglingReference, format!("step {i} does not precede step {id}")));
        }
        prior.get(&i).ok_or_else(|| fail(id, CheckErrorKind::DanglingReference, format!("no step {i}")))
    };
    let eq = &step.equation;
    let shape = |what: &str| fail(id, CheckErrorKind::ShapeMismatch, what.to_string());
    match &step.justification {
        Justification::Reflexivity => {
            if eq.lhs != eq.rhs {
                return Err(shape("reflexivity needs identical sides"));
            }
        }
        Justification::Symmetry(i) => {
            if *eq != get(*i)?.flipped() {
                return Err(shape("not the symmetric equation"));
            }
        }
        Justification::Transitivity(i, j) => {
            let (p, q) = (get(*i)?, get(*j)?);
            if p.rhs != q.lhs || eq.lhs != p.lhs || eq.rhs != q.rhs {
                return Err(shape("equations do not chain"));
            }
        }
        Justification::CongruenceSum(i, j) => {
            let (p, q) = (get(*i)?, get(*j)?);
            let want =
                Equation::new(Monitor::sum(p.lhs.clone(), q.lhs.clone()), Monitor::sum(p.rhs.clone(), q.rhs.clone()));
            if *eq != want {
                return Err(shape("not the sum of the premises"));
            }
        }
        Justification::CongruencePrefix(a, i) => {
            let p = get(*i)?;
            let want =
                Equation::new(Monitor::prefix(a.clone(), p.lhs.clone()), Monitor::prefix(a.clone(), p.rhs.clone()));
            if *eq != want {
                return Err(shape("not the prefixed premise"));
            }
        }
        Justification::Substitutivity(i, sigma) => {
            if *eq != get(*i)?.apply(sigma) {
                return Err(shape("not the substituted premise"));
            }
        }
        Justification::Axiom { schema, bindings, sigma } => {
            if !system.contains(*schema) {
                return Err(fail(id, CheckErrorKind::AxiomNotInSystem, format!("{schema} is not in {system}")));
            }
            if let (Some(b), Bindings::TraceK { s, k }) = (bounds, bindings) {
                if s.len() > b.max_trace_len || *k > b.max_k {
                    return Err(fail(id, CheckErrorKind::AxiomNotInSystem, "O2 parameters exceed the declared bounds"));
                }
            }
            let inst = instantiate(*schema, bindings, alphabet)
                .map_err(|e| fail(id, CheckErrorKind::NotAnInstance, e.to_string()))?;
            let want = inst.equation.apply(sigma);
            if *eq != want && *eq != want.flipped() {
                return Err(fail(id, CheckErrorKind::NotAnInstance, format!("expected {want}")));
            }
        }
    }
    Ok(())
}

/// Checks every step, then that the last equation is `claimed`.
pub fn check_derivation(system: SystemName, d: &Derivation, claimed: &Equation) -> Result<(), CheckError> {
    let mut prior = BTreeMap::new();
    let mut last_id = 0;
    for step in &d.steps {
        if step.id <= last_id {
            return Err(fail(step.id, CheckErrorKind::ShapeMismatch, "step ids must increase"));
        }
        check_step(system, &d.alphabet, d.bounds, &prior, step)?;
        prior.insert(step.id, step.equation.clone());
        last_id = step.id;
    }
    match d.conclusion() {
        Some(c) if c == claimed => Ok(()),
        Some(c) => Err(fail(last_id, CheckErrorKind::ConclusionMismatch, format!("derived {c}, claimed {claimed}"))),
        None => Err(fail(0, CheckErrorKind::ConclusionMismatch, "empty derivation")),
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ProofFileError {
    #[error("line {line}: {source}")]
    Syntax { line: usize, source: ParseError },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Axiom(#[from] AxiomError),
}

fn malformed(line: usize, message: impl Into<String>) -> ProofFileError {
    ProofFileError::Malformed { line, message: message.into() }
}

fn parse_bounds(text: &str, line: usize) -> Result<SchemaBounds, ProofFileError> {
    let mut s = None;
    let mut k = None;
    for part in text.split(',') {
        let (key, val) = part.split_once('=').ok_or_else(|| malformed(line, "bad bounds"))?;
        let val: usize = val.trim().parse().map_err(|_| malformed(line, "bad bounds"))?;
        match key.trim() {
            "max-s" => s = Some(val),
            "max-k" => k = Some(val),
            other => return Err(malformed(line, format!("unknown bound `{other}`"))),
        }
    }
    match (s, k) {
        (Some(max_trace_len), Some(max_k)) => Ok(SchemaBounds { max_trace_len, max_k }),
        _ => Err(malformed(line, "bounds need max-s and max-k")),
    }
}

fn parse_id(text: &str, line: usize) -> Result<StepId, ProofFileError> {
    text.trim().parse().map_err(|_| malformed(line, format!("bad step id `{}`", text.trim())))
}

fn parse_rule(
    text: &str,
    line: usize,
    alphabet: &Alphabet,
    vars: &BTreeSet<VarName>,
) -> Result<Justification, ProofFileError> {
    let text = text.trim();
    if text == "refl" {
        return Ok(Justification::Reflexivity);
    }
    let (name, args) = text
        .strip_suffix(')')
        .and_then(|t| t.split_once('('))
        .ok_or_else(|| malformed(line, format!("bad rule `{text}`")))?;
    let subst = |s: &str| {
        if s.trim() == "-" {
            return Ok(Substitution::identity());
        }
        parse_substitution(s, alphabet, vars).map_err(|source| ProofFileError::Syntax { line, source })
    };
    let two = |args: &str| -> Result<(StepId, StepId), ProofFileError> {
        let (i, j) = args.split_once(',').ok_or_else(|| malformed(line, "expected two step ids"))?;
        Ok((parse_id(i, line)?, parse_id(j, line)?))
    };
    match name.trim() {
        "sym" => Ok(Justification::Symmetry(parse_id(args, line)?)),
        "trans" => two(args).map(|(i, j)| Justification::Transitivity(i, j)),
        "cong-sum" => two(args).map(|(i, j)| Justification::CongruenceSum(i, j)),
        "cong-prefix" => {
            let (a, i) = args.split_once(',').ok_or_else(|| malformed(line, "expected action and step id"))?;
            Ok(Justification::CongruencePrefix(Action::new(a.trim()), parse_id(i, line)?))
        }
        "subst" => {
            let (i, s) = args.split_once(';').ok_or_else(|| malformed(line, "expected `i; substitution`"))?;
            Ok(Justification::Substitutivity(parse_id(i, line)?, subst(s)?))
        }
        "axiom" => {
            let parts: Vec<&str> = args.splitn(3, ';').collect();
            if parts.len() != 3 {
                return Err(malformed(line, "expected `axiom(NAME; BINDINGS; SUBST)`"));
            }
            let schema: Schema = parts[0].trim().parse()?;
            let bindings = parse_bindings(parts[1])?;
            Ok(Justification::Axiom { schema, bindings, sigma: subst(parts[2])? })
        }
        other => Err(malformed(line, format!("unknown rule `{other}`"))),
    }
}

/// Parses the file format described in the module docs.
pub fn parse_derivation(text: &str) -> Result<Derivation, ProofFileError> {
    let (body, headers) =
        split_headers(text).map_err(|source| ProofFileError::Syntax { line: source.span.line, source })?;
    let alphabet = headers.alphabet.clone().ok_or_else(|| malformed(1, "missing `alphabet:` header"))?;
    let mut system = None;
    let mut bounds = None;
    for (key, value) in &headers.extra {
        match key.as_str() {
            "system" => system = Some(value.parse::<SystemName>()?),
            "bounds" => bounds = Some(parse_bounds(value, 1)?),
            _ => {}
        }
    }
    let system = system.ok_or_else(|| malformed(1, "missing `system:` header"))?;
    let mut steps = Vec::new();
    for (idx, raw) in body.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let rest = content.strip_prefix("step").ok_or_else(|| malformed(line, "expected `step N: ...`"))?;
        let (id, rest) = rest.split_once(':').ok_or_else(|| malformed(line, "expected `step N:`"))?;
        let id = parse_id(id, line)?;
        let mut parsed = None;
        let mut last_err = None;
        for (pos, _) in rest.rmatch_indices(" by ") {
            let (eq_text, rule_text) = (&rest[..pos], &rest[pos + 4..]);
            let eq = match parse_equation_with_vars(eq_text, &alphabet, &headers.vars) {
                Ok(eq) => eq,
                Err(source) => {
                    last_err = Some(ProofFileError::Syntax { line, source });
                    continue;
                }
            };
            match parse_rule(rule_text, line, &alphabet, &headers.vars) {
                Ok(j) => {
                    parsed = Some((eq, j));
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        let (equation, justification) =
            parsed.ok_or_else(|| last_err.unwrap_or_else(|| malformed(line, "expected `lhs = rhs by rule`")))?;
        steps.push(Step { id, equation, justification });
    }
    Ok(Derivation { system, alphabet, bounds, steps })
}
