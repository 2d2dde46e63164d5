//! Labelled transitions, weak traces, and the antichain view of the
//! acceptance and rejection languages.
//!
//! Every verdict loops on every label, `τ` included, so a sum can silently
//! commit to any of its top-level verdicts. Variables have no moves.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::syntax::print_trace;
use crate::term::{Action, Alphabet, Monitor, VarName};

/// A finite sequence of visible actions.
pub type Trace = Vec<Action>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Visible(Action),
    Tau,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Visible(a) => write!(f, "{a}"),
            Label::Tau => f.write_str("tau"),
        }
    }
}

/// Whether `p` is a (not necessarily proper) prefix of `t`.
pub fn is_prefix(p: &[Action], t: &[Action]) -> bool {
    p.len() <= t.len() && t[..p.len()] == *p
}

/// Whether some member of `set` is a prefix of `t`.
pub fn has_prefix_in(set: &[Trace], t: &[Action]) -> bool {
    set.iter().any(|p| is_prefix(p, t))
}

/// Successors of `m` under one strong transition labelled `l`.
pub fn strong_steps(m: &Monitor, l: &Label) -> BTreeSet<Monitor> {
    let mut out = BTreeSet::new();
    strong_into(m, l, &mut out);
    out
}

fn strong_into(m: &Monitor, l: &Label, out: &mut BTreeSet<Monitor>) {
    match m {
        Monitor::End | Monitor::Yes | Monitor::No => {
            out.insert(m.clone());
        }
        Monitor::Prefix(a, body) => {
            if *l == Label::Visible(a.clone()) {
                out.insert((**body).clone());
            }
        }
        Monitor::Sum(p, q) => {
            strong_into(p, l, out);
            strong_into(q, l, out);
        }
        Monitor::Var(_) => {}
    }
}

fn tau_closure(states: BTreeSet<Monitor>) -> BTreeSet<Monitor> {
    let mut seen = states.clone();
    let mut work: Vec<Monitor> = states.into_iter().collect();
    while let Some(m) = work.pop() {
        for n in strong_steps(&m, &Label::Tau) {
            if seen.insert(n.clone()) {
                work.push(n);
            }
        }
    }
    seen
}

/// All `m'` with `m ⇒s m'`.
pub fn weak_reach(m: &Monitor, s: &[Action]) -> BTreeSet<Monitor> {
    let mut current = tau_closure(BTreeSet::from([m.clone()]));
    for a in s {
        let label = Label::Visible(a.clone());
        let mut next = BTreeSet::new();
        for st in &current {
            strong_into(st, &label, &mut next);
        }
        current = tau_closure(next);
    }
    current
}

pub fn accepts(m: &Monitor, s: &[Action]) -> bool {
    weak_reach(m, s).contains(&Monitor::Yes)
}

pub fn rejects(m: &Monitor, s: &[Action]) -> bool {
    weak_reach(m, s).contains(&Monitor::No)
}

/// Minimal accepted and minimal rejected traces. Both languages are the
/// upward closures of these antichains.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TraceLang {
    pub accept_min: Vec<Trace>,
    pub reject_min: Vec<Trace>,
}

impl TraceLang {
    pub fn accepts(&self, t: &[Action]) -> bool {
        has_prefix_in(&self.accept_min, t)
    }

    pub fn rejects(&self, t: &[Action]) -> bool {
        has_prefix_in(&self.reject_min, t)
    }

    /// Traces both accepted and rejected, as an antichain.
    pub fn both_min(&self) -> Vec<Trace> {
        intersect_cones(&self.accept_min, &self.reject_min)
    }
}

impl fmt::Display for TraceLang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "accept:")?;
        for t in &self.accept_min {
            writeln!(f, "  {}", print_trace(t))?;
        }
        writeln!(f, "reject:")?;
        for t in &self.reject_min {
            writeln!(f, "  {}", print_trace(t))?;
        }
        Ok(())
    }
}

/// Antichain generating the intersection of two upward-closed sets.
pub fn intersect_cones(a: &[Trace], b: &[Trace]) -> Vec<Trace> {
    let mut out = BTreeSet::new();
    for s in a {
        for t in b {
            if is_prefix(s, t) {
                out.insert(t.clone());
            } else if is_prefix(t, s) {
                out.insert(s.clone());
            }
        }
    }
    minimize(out.into_iter().collect())
}

/// Drops members that have a proper prefix in the set; sorts the rest.
pub fn minimize(mut set: Vec<Trace>) -> Vec<Trace> {
    set.sort();
    set.dedup();
    let keep: Vec<bool> = set.iter().map(|t| !set.iter().any(|p| p.len() < t.len() && is_prefix(p, t))).collect();
    set.into_iter().zip(keep).filter_map(|(t, k)| k.then_some(t)).collect()
}

/// Extracts the minimal accepted and rejected traces of `m`. Variables are
/// treated as having no moves, which agrees with substituting `end`.
///
/// The search tracks sets of subterms reached along each trace. Only
/// actions with a prefix transition are explored; any other action leaves
/// just the verdicts already present.
pub fn lang_of(m: &Monitor) -> TraceLang {
    let mut accept = Vec::new();
    let mut reject = Vec::new();
    let mut queue: VecDeque<(Trace, Vec<&Monitor>, bool, bool)> = VecDeque::new();
    queue.push_back((Vec::new(), vec![m], false, false));
    while let Some((trace, states, acc_before, rej_before)) = queue.pop_front() {
        let mut acc = acc_before;
        let mut rej = rej_before;
        let mut moves: BTreeMap<&Action, Vec<&Monitor>> = BTreeMap::new();
        for st in &states {
            scan(st, &mut acc, &mut rej, &mut moves);
        }
        if acc && !acc_before {
            accept.push(trace.clone());
        }
        if rej && !rej_before {
            reject.push(trace.clone());
        }
        if acc && rej {
            continue;
        }
        for (a, mut targets) in moves {
            targets.sort_by_key(|t| *t as *const Monitor);
            targets.dedup_by_key(|t| *t as *const Monitor);
            let mut t = trace.clone();
            t.push(a.clone());
            queue.push_back((t, targets, acc, rej));
        }
    }
    TraceLang { accept_min: minimize(accept), reject_min: minimize(reject) }
}

fn scan<'a>(m: &'a Monitor, acc: &mut bool, rej: &mut bool, moves: &mut BTreeMap<&'a Action, Vec<&'a Monitor>>) {
    match m {
        Monitor::Yes => *acc = true,
        Monitor::No => *rej = true,
        Monitor::Prefix(a, body) => moves.entry(a).or_default().push(body),
        Monitor::Sum(p, q) => {
            scan(p, acc, rej, moves);
            scan(q, acc, rej, moves);
        }
        Monitor::End | Monitor::Var(_) => {}
    }
}

/// The least antichain with the same infinite-word cone as `ac` over the
/// given finite action set. A trace is covered when it has a prefix in
/// `ac` or when all of its one-step extensions are covered.
pub fn omega_canon(ac: &[Trace], actions: &[Action]) -> Vec<Trace> {
    let ac = minimize(ac.to_vec());
    let mut out = Vec::new();
    omega_walk(&ac, &mut Vec::new(), actions, &mut out);
    out.sort();
    out
}

// Returns whether `node` is covered; pushes minimal covered nodes.
fn omega_walk(ac: &[Trace], node: &mut Trace, actions: &[Action], out: &mut Vec<Trace>) -> bool {
    if ac.iter().any(|t| t == node) {
        out.push(node.clone());
        return true;
    }
    if !ac.iter().any(|t| is_prefix(node, t)) {
        return false;
    }
    let mark = out.len();
    let mut all = true;
    for a in actions {
        node.push(a.clone());
        all &= omega_walk(ac, node, actions, out);
        node.pop();
    }
    if all {
        out.truncate(mark);
        out.push(node.clone());
    }
    all
}

/// For each variable, the traces along which it is reachable as a
/// top-level summand by prefix transitions alone.
pub fn var_occurrences(m: &Monitor) -> BTreeMap<VarName, BTreeSet<Trace>> {
    let mut out = BTreeMap::new();
    occ_walk(m, &mut Vec::new(), &mut out);
    out
}

fn occ_walk(m: &Monitor, path: &mut Trace, out: &mut BTreeMap<VarName, BTreeSet<Trace>>) {
    match m {
        Monitor::Var(x) => {
            out.entry(x.clone()).or_default().insert(path.clone());
        }
        Monitor::Prefix(a, body) => {
            path.push(a.clone());
            occ_walk(body, path, out);
            path.pop();
        }
        Monitor::Sum(p, q) => {
            occ_walk(p, path, out);
            occ_walk(q, path, out);
        }
        _ => {}
    }
}

/// Every trace over `actions` of length at most `n`, ordered by length and
/// then lexicographically.
pub fn traces_upto(actions: &[Action], n: usize) -> Vec<Trace> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(layer.len() * actions.len());
        for t in &layer {
            for a in actions {
                let mut u: Trace = t.clone();
                u.push(a.clone());
                next.push(u);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Ordering by length, then lexicographically.
pub fn shortlex(a: &Trace, b: &Trace) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// The alphabet used to explore a closed term: the finite alphabet itself,
/// or the term's own actions plus one fresh action when open-ended.
pub fn exploration_actions(alphabet: &Alphabet, terms: &[&Monitor]) -> Vec<Action> {
    match alphabet.actions() {
        Some(acts) => acts.to_vec(),
        None => {
            let mut used: BTreeSet<Action> = terms.iter().flat_map(|m| m.actions()).collect();
            let mut i = 0;
            loop {
                let fresh = Action::new(&format!("_fresh{i}"));
                if !used.contains(&fresh) {
                    used.insert(fresh);
                    break;
                }
                i += 1;
            }
            used.into_iter().collect()
        }
    }
}
