//! Deciding verdict and ω-verdict equivalence.
//!
//! Closed terms are compared through their antichains. Open terms are
//! compared through canonical forms, except over an open-ended alphabet
//! where each variable is replaced by a fresh `_fx_<var>.(yes + no)`.
//! [`oracle_equiv_open`] is a brute-force cross-check over a finite
//! family of closed substitutions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::axioms::prefix_seq;
use crate::normalize::{self, FormKind, NormalizeError};
use crate::semantics::{
    has_prefix_in, is_prefix, lang_of, minimize, omega_canon, shortlex, traces_upto, var_occurrences, Trace, TraceLang,
};
use crate::syntax::print_trace;
use crate::term::{ac_equal, Action, Alphabet, Monitor, Substitution, VarName};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EquivMode {
    Verdict,
    OmegaVerdict,
}

impl fmt::Display for EquivMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquivMode::Verdict => "verdict",
            EquivMode::OmegaVerdict => "omega",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    AcceptedOnlyByLeft,
    AcceptedOnlyByRight,
    RejectedOnlyByLeft,
    RejectedOnlyByRight,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::AcceptedOnlyByLeft => "accepted only by left",
            Side::AcceptedOnlyByRight => "accepted only by right",
            Side::RejectedOnlyByLeft => "rejected only by left",
            Side::RejectedOnlyByRight => "rejected only by right",
        })
    }
}

/// A closed instance and a trace on which the two sides disagree.
///
/// In ω mode the trace is a finite prefix: one side has it in its
/// cone while no extension of it is in the other side's cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub substitution: Substitution,
    pub trace: Trace,
    pub side: Side,
}

impl Counterexample {
    pub fn with_substitution(mut self, sigma: Substitution) -> Counterexample {
        self.substitution = sigma;
        self
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "substitution: {}", self.substitution)?;
        writeln!(f, "trace: {}", print_trace(&self.trace))?;
        write!(f, "side: {}", self.side)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Equivalent,
    /// The counterexample is absent only when the canonical forms differ
    /// and the oracle family found no witness.
    Inequivalent(Option<Counterexample>),
}

impl Outcome {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Outcome::Equivalent)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Outcome::Inequivalent(c) => c.as_ref(),
            Outcome::Equivalent => None,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EquivError {
    #[error("input term is not closed: {0}")]
    NonClosedInput(Monitor),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

fn check_closed(m: &Monitor) -> Result<(), EquivError> {
    if m.is_closed() {
        Ok(())
    } else {
        Err(EquivError::NonClosedInput(m.clone()))
    }
}

/// Shortest generator in the symmetric difference of two trace languages.
pub fn lang_difference(l: &TraceLang, r: &TraceLang) -> Option<(Trace, Side)> {
    let mut cands: Vec<(Trace, Side)> = Vec::new();
    let mut diff = |mine: &[Trace], theirs: &[Trace], side: Side| {
        for g in mine {
            if !has_prefix_in(theirs, g) {
                cands.push((g.clone(), side));
            }
        }
    };
    diff(&l.accept_min, &r.accept_min, Side::AcceptedOnlyByLeft);
    diff(&r.accept_min, &l.accept_min, Side::AcceptedOnlyByRight);
    diff(&l.reject_min, &r.reject_min, Side::RejectedOnlyByLeft);
    diff(&r.reject_min, &l.reject_min, Side::RejectedOnlyByRight);
    cands.into_iter().min_by(|a, b| shortlex(&a.0, &b.0).then(a.1.cmp(&b.1)))
}

/// A finite trace covered by `mine` and incomparable with every member
/// of `theirs`, if one exists. Both antichains must be ω-canonical.
fn omega_witness(mine: &[Trace], theirs: &[Trace], actions: &[Action]) -> Option<Trace> {
    let limit = if actions.is_empty() { 0 } else { mine.iter().chain(theirs).map(Vec::len).max().unwrap_or(0) + 1 };
    let mut best: Option<Trace> = None;
    for g in mine {
        if has_prefix_in(theirs, g) {
            continue;
        }
        let found = (0..=limit).find_map(|len| {
            let mut digits = vec![0usize; len];
            loop {
                let mut u = g.clone();
                u.extend(digits.iter().map(|&i| actions[i].clone()));
                if theirs.iter().all(|t| !is_prefix(t, &u) && !is_prefix(&u, t)) {
                    return Some(u);
                }
                if !odometer(&mut digits, actions.len()) {
                    return None;
                }
            }
        });
        if let Some(u) = found {
            if best.as_ref().is_none_or(|b| shortlex(&u, b).is_lt()) {
                best = Some(u);
            }
        }
    }
    best
}

// Advances `digits` to the next word of the same length; false on wrap.
fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn omega_difference(l: &TraceLang, r: &TraceLang, actions: &[Action]) -> Option<(Trace, Side)> {
    let la = omega_canon(&l.accept_min, actions);
    let ra = omega_canon(&r.accept_min, actions);
    let lr = omega_canon(&l.reject_min, actions);
    let rr = omega_canon(&r.reject_min, actions);
    let cands = [
        (omega_witness(&la, &ra, actions), Side::AcceptedOnlyByLeft),
        (omega_witness(&ra, &la, actions), Side::AcceptedOnlyByRight),
        (omega_witness(&lr, &rr, actions), Side::RejectedOnlyByLeft),
        (omega_witness(&rr, &lr, actions), Side::RejectedOnlyByRight),
    ];
    cands.into_iter().filter_map(|(t, s)| t.map(|t| (t, s))).min_by(|a, b| shortlex(&a.0, &b.0).then(a.1.cmp(&b.1)))
}

/// Compares two closed terms without checking closedness; variables
/// behave like `end`. Returns a counterexample when they differ.
pub fn closed_equiv(m: &Monitor, n: &Monitor, alphabet: &Alphabet, mode: EquivMode) -> Option<Counterexample> {
    lang_diff(&lang_of(m), &lang_of(n), alphabet, mode).map(|(trace, side)| Counterexample {
        substitution: Substitution::identity(),
        trace,
        side,
    })
}

fn outcome(cex: Option<Counterexample>) -> Outcome {
    match cex {
        None => Outcome::Equivalent,
        Some(c) => Outcome::Inequivalent(Some(c)),
    }
}

pub fn verdict_equiv_closed(m: &Monitor, n: &Monitor) -> Result<Outcome, EquivError> {
    check_closed(m)?;
    check_closed(n)?;
    Ok(outcome(closed_equiv(m, n, &Alphabet::OpenEnded, EquivMode::Verdict)))
}

/// With an open-ended alphabet this is verdict equivalence.
pub fn omega_equiv_closed(m: &Monitor, n: &Monitor, alphabet: &Alphabet) -> Result<Outcome, EquivError> {
    check_closed(m)?;
    check_closed(n)?;
    Ok(outcome(closed_equiv(m, n, alphabet, EquivMode::OmegaVerdict)))
}

/// Probe values: `end`, `yes`, `no`, `yes + no`, then `t.yes`, `t.no`,
/// `t.(yes + no)` for every nonempty `t` with `|t| ≤ d`, by length then
/// lexicographically.
pub fn probe_values(actions: &[Action], d: usize) -> Vec<Monitor> {
    let mut out = vec![Monitor::End];
    for t in traces_upto(actions, d) {
        for v in [Monitor::Yes, Monitor::No, Monitor::both()] {
            out.push(prefix_seq(&t, v));
        }
    }
    out
}

/// Default cap on the number of substitutions the oracle evaluates.
pub const DEFAULT_FAMILY_CAP: usize = 4096;

/// Closed substitutions used by the oracle. The full product of
/// [`probe_values`] over `vars` when it has at most `cap` members;
/// otherwise every map with one variable active and the rest `end`, then
/// a seeded sample of the product up to `cap`.
pub fn substitution_family(vars: &BTreeSet<VarName>, actions: &[Action], d: usize, cap: usize) -> Vec<Substitution> {
    let values = probe_values(actions, d);
    let vars: Vec<VarName> = vars.iter().cloned().collect();
    if vars.is_empty() {
        return vec![Substitution::identity()];
    }
    let total = (values.len() as u128).checked_pow(vars.len() as u32).unwrap_or(u128::MAX);
    if total <= cap as u128 {
        let mut out = vec![Substitution::identity()];
        for v in &vars {
            out = out
                .into_iter()
                .flat_map(|s| {
                    values.iter().map(move |val| {
                        let mut s2 = s.clone();
                        s2.insert(v.clone(), val.clone());
                        s2
                    })
                })
                .collect();
        }
        return out;
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, v) in vars.iter().enumerate() {
        for (j, val) in values.iter().enumerate() {
            if i > 0 && j == 0 {
                continue;
            }
            let mut s = Substitution::from_pairs(vars.iter().map(|w| (w.clone(), Monitor::End)));
            s.insert(v.clone(), val.clone());
            seen.insert(s.clone());
            out.push(s);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e_ed0f_0c1e);
    let mut attempts = 0;
    while out.len() < cap && attempts < cap * 4 {
        attempts += 1;
        let s = Substitution::from_pairs(
            vars.iter().map(|w| (w.clone(), values.choose(&mut rng).expect("nonempty").clone())),
        );
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

/// Default oracle bound: `depth(m) + depth(n) + 2`.
pub fn default_bound(m: &Monitor, n: &Monitor) -> usize {
    m.depth() + n.depth() + 2
}

/// Brute-force comparison under [`substitution_family`]. The reported
/// counterexample is the one with the shortest trace, ties broken by the
/// family's order.
pub fn oracle_equiv_open(m: &Monitor, n: &Monitor, actions: &[Action], mode: EquivMode, d: usize) -> Outcome {
    oracle_with_cap(m, n, actions, mode, d, DEFAULT_FAMILY_CAP)
}

pub fn oracle_with_cap(m: &Monitor, n: &Monitor, actions: &[Action], mode: EquivMode, d: usize, cap: usize) -> Outcome {
    let mut vars = m.vars();
    vars.extend(n.vars());
    let family = substitution_family(&vars, actions, d, cap);
    let alphabet = Alphabet::finite(actions.iter().cloned());
    let (pm, pn) = (Skeleton::of(m), Skeleton::of(n));
    let images = ImageLangs::of(&family);
    let best = family
        .par_iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let (lm, ln) = (pm.under(s, &images), pn.under(s, &images));
            lang_diff(&lm, &ln, &alphabet, mode)
                .map(|(trace, side)| (trace.len(), i, Counterexample { substitution: s.clone(), trace, side }))
        })
        .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    outcome(best.map(|(_, _, c)| c))
}

/// Fast form of [`oracle_equiv_open`] that stops at any failure.
pub fn oracle_agrees(m: &Monitor, n: &Monitor, actions: &[Action], mode: EquivMode, d: usize) -> bool {
    let mut vars = m.vars();
    vars.extend(n.vars());
    let family = substitution_family(&vars, actions, d, DEFAULT_FAMILY_CAP);
    let (pm, pn) = (Skeleton::of(m), Skeleton::of(n));
    let images = ImageLangs::of(&family);
    family.par_iter().find_any(|s| !same_lang(&pm.under(s, &images), &pn.under(s, &images), actions, mode)).is_none()
}

fn lang_diff(l: &TraceLang, r: &TraceLang, alphabet: &Alphabet, mode: EquivMode) -> Option<(Trace, Side)> {
    match (mode, alphabet.actions()) {
        (EquivMode::OmegaVerdict, Some(acts)) => omega_difference(l, r, acts),
        _ => lang_difference(l, r),
    }
}

fn same_lang(l: &TraceLang, r: &TraceLang, actions: &[Action], mode: EquivMode) -> bool {
    match mode {
        EquivMode::Verdict => l == r,
        EquivMode::OmegaVerdict => {
            omega_canon(&l.accept_min, actions) == omega_canon(&r.accept_min, actions)
                && omega_canon(&l.reject_min, actions) == omega_canon(&r.reject_min, actions)
        }
    }
}

/// Languages of every distinct image in a substitution family.
struct ImageLangs(HashMap<Monitor, TraceLang>);

impl ImageLangs {
    fn of(family: &[Substitution]) -> Self {
        let mut map = HashMap::new();
        for s in family {
            for v in s.0.values() {
                if !map.contains_key(v) {
                    map.insert(v.clone(), lang_of(v));
                }
            }
        }
        ImageLangs(map)
    }

    fn get(&self, v: &Monitor) -> std::borrow::Cow<'_, TraceLang> {
        match self.0.get(v) {
            Some(l) => std::borrow::Cow::Borrowed(l),
            None => std::borrow::Cow::Owned(lang_of(v)),
        }
    }
}

/// A term's language with its variables held open: the language with
/// variables as `end`, plus where each variable sits.
struct Skeleton {
    base: TraceLang,
    occ: Vec<(VarName, Vec<Trace>)>,
}

impl Skeleton {
    fn of(m: &Monitor) -> Self {
        let occ = var_occurrences(m).into_iter().map(|(x, ts)| (x, ts.into_iter().collect())).collect();
        Skeleton { base: lang_of(m), occ }
    }

    /// Equal to `lang_of(&sigma.apply(m))`.
    fn under(&self, sigma: &Substitution, images: &ImageLangs) -> TraceLang {
        let mut acc = self.base.accept_min.clone();
        let mut rej = self.base.reject_min.clone();
        for (x, ts) in &self.occ {
            let Some(v) = sigma.get(x) else { continue };
            let lang = images.get(v);
            for t in ts {
                for (src, dst) in [(&lang.accept_min, &mut acc), (&lang.reject_min, &mut rej)] {
                    dst.extend(src.iter().map(|u| {
                        let mut w = t.clone();
                        w.extend(u.iter().cloned());
                        w
                    }));
                }
            }
        }
        TraceLang { accept_min: minimize(acc), reject_min: minimize(rej) }
    }
}

/// `x ↦ _fx_x.(yes + no)` for every variable, with names chosen to avoid
/// the actions of both terms.
pub fn fresh_substitution(m: &Monitor, n: &Monitor) -> Substitution {
    let mut used: BTreeSet<Action> = m.actions();
    used.extend(n.actions());
    let mut vars = m.vars();
    vars.extend(n.vars());
    let mut sigma = Substitution::identity();
    for x in vars {
        let mut name = format!("_fx_{x}");
        while used.contains(&Action::new(&name)) {
            name.push('_');
        }
        let a = Action::new(&name);
        used.insert(a.clone());
        sigma.insert(x, Monitor::prefix(a, Monitor::both()));
    }
    sigma
}

fn finite_or_oracle(
    m: &Monitor,
    n: &Monitor,
    alphabet: &Alphabet,
    mode: EquivMode,
    form: FormKind,
) -> Result<Outcome, EquivError> {
    let cm = normalize::normalize(form, m, alphabet, false)?;
    let cn = normalize::normalize(form, n, alphabet, false)?;
    if ac_equal(&cm.term, &cn.term) {
        return Ok(Outcome::Equivalent);
    }
    let acts = alphabet.actions().expect("finite");
    let cex = oracle_equiv_open(m, n, acts, mode, default_bound(m, n));
    Ok(Outcome::Inequivalent(cex.counterexample().cloned()))
}

/// Verdict equivalence of possibly open terms.
pub fn verdict_equiv_open(m: &Monitor, n: &Monitor, alphabet: &Alphabet) -> Result<Outcome, EquivError> {
    match alphabet.size() {
        None => {
            let sigma = fresh_substitution(m, n);
            let cex = closed_equiv(&sigma.apply(m), &sigma.apply(n), alphabet, EquivMode::Verdict);
            Ok(outcome(cex.map(|c| c.with_substitution(sigma))))
        }
        Some(1) => finite_or_oracle(m, n, alphabet, EquivMode::Verdict, FormKind::UnaryRNF),
        Some(_) => finite_or_oracle(m, n, alphabet, EquivMode::Verdict, FormKind::FinRNF),
    }
}

/// ω-verdict equivalence of possibly open terms.
pub fn omega_equiv_open(m: &Monitor, n: &Monitor, alphabet: &Alphabet) -> Result<Outcome, EquivError> {
    match alphabet.size() {
        None => verdict_equiv_open(m, n, alphabet),
        Some(1) => finite_or_oracle(m, n, alphabet, EquivMode::OmegaVerdict, FormKind::UnaryOmegaNF),
        Some(_) => finite_or_oracle(m, n, alphabet, EquivMode::OmegaVerdict, FormKind::OpenOmegaNF),
    }
}

/// Dispatches on the mode.
pub fn equiv_open(m: &Monitor, n: &Monitor, alphabet: &Alphabet, mode: EquivMode) -> Result<Outcome, EquivError> {
    match mode {
        EquivMode::Verdict => verdict_equiv_open(m, n, alphabet),
        EquivMode::OmegaVerdict => omega_equiv_open(m, n, alphabet),
    }
}
