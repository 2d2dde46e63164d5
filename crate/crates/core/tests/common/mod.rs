//! Shared helpers for integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use monalg::term::{Action, Monitor, VarName};

/// Sums of one to three summands at every node, with prefixes favoured
/// while depth remains. Produces terms of size roughly 5 to 30.
pub fn rich<R: Rng>(rng: &mut R, acts: &[Action], vars: &[VarName], depth: usize) -> Monitor {
    let n = rng.gen_range(1..=3);
    Monitor::sum_of((0..n).map(|_| summand(rng, acts, vars, depth)))
}

fn summand<R: Rng>(rng: &mut R, acts: &[Action], vars: &[VarName], depth: usize) -> Monitor {
    if depth > 0 && rng.gen_bool(0.55) {
        let a = acts.choose(rng).unwrap().clone();
        return Monitor::prefix(a, rich(rng, acts, vars, depth - 1));
    }
    match rng.gen_range(0..8) {
        0 => Monitor::End,
        1 | 2 => Monitor::Yes,
        3 | 4 => Monitor::No,
        _ if !vars.is_empty() => Monitor::Var(vars.choose(rng).unwrap().clone()),
        _ => Monitor::Yes,
    }
}

pub fn xy(n: usize) -> Vec<VarName> {
    ["x", "y"].iter().take(n).map(|v| VarName::new(v)).collect()
}

/// Direct interpreter of the transition rules, kept apart from the library
/// so that it can serve as an independent reference.
pub mod reference {
    use std::collections::BTreeSet;

    use monalg::term::{Action, Monitor};

    fn step(m: &Monitor, a: Option<&Action>, out: &mut BTreeSet<Monitor>) {
        match m {
            Monitor::End | Monitor::Yes | Monitor::No => {
                out.insert(m.clone());
            }
            Monitor::Prefix(b, body) => {
                if a == Some(b) {
                    out.insert((**body).clone());
                }
            }
            Monitor::Sum(l, r) => {
                step(l, a, out);
                step(r, a, out);
            }
            Monitor::Var(_) => {}
        }
    }

    fn silent_closure(states: BTreeSet<Monitor>) -> BTreeSet<Monitor> {
        let mut out = states.clone();
        for s in &states {
            step(s, None, &mut out);
        }
        out
    }

    /// States reachable along `t`, silent moves allowed anywhere.
    pub fn reach(m: &Monitor, t: &[Action]) -> BTreeSet<Monitor> {
        let mut cur = silent_closure(BTreeSet::from([m.clone()]));
        for a in t {
            let mut next = BTreeSet::new();
            for s in &cur {
                step(s, Some(a), &mut next);
            }
            cur = silent_closure(next);
        }
        cur
    }

    pub fn accepts(m: &Monitor, t: &[Action]) -> bool {
        reach(m, t).contains(&Monitor::Yes)
    }

    pub fn rejects(m: &Monitor, t: &[Action]) -> bool {
        reach(m, t).contains(&Monitor::No)
    }

    /// Every word over `acts` of length at most `n`.
    pub fn words(acts: &[Action], n: usize) -> Vec<Vec<Action>> {
        let mut all = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..n {
            layer = layer
                .iter()
                .flat_map(|w: &Vec<Action>| {
                    acts.iter().map(move |a| {
                        let mut w2 = w.clone();
                        w2.push(a.clone());
                        w2
                    })
                })
                .collect();
            all.extend(layer.iter().cloned());
        }
        all
    }

    fn horizon(m: &Monitor, n: &Monitor) -> usize {
        m.depth().max(n.depth())
    }

    /// Closed verdict equivalence over `acts` plus one action neither term
    /// mentions. Past the deeper term's depth every state is a verdict or
    /// `end`, so longer words add nothing.
    pub fn verdict_equiv(m: &Monitor, n: &Monitor, acts: &[Action]) -> bool {
        let mut all = acts.to_vec();
        all.push(Action::new("zz_fresh"));
        words(&all, horizon(m, n) + 1).iter().all(|w| accepts(m, w) == accepts(n, w) && rejects(m, w) == rejects(n, w))
    }

    /// Closed ω-verdict equivalence over exactly `acts`: an infinite word
    /// is decided by its prefix at the horizon.
    pub fn omega_equiv(m: &Monitor, n: &Monitor, acts: &[Action]) -> bool {
        words(acts, horizon(m, n))
            .iter()
            .filter(|w| w.len() == horizon(m, n))
            .all(|w| accepts(m, w) == accepts(n, w) && rejects(m, w) == rejects(n, w))
    }
}

pub mod strategy {
    use monalg::term::{Action, Monitor, VarName};
    use proptest::prelude::*;

    /// Terms over the given actions and variables, prefix depth at most
    /// `depth`.
    pub fn monitor(acts: &'static [&'static str], vars: &'static [&'static str], depth: u32) -> BoxedStrategy<Monitor> {
        let mut leaves = vec![Just(Monitor::End).boxed(), Just(Monitor::Yes).boxed(), Just(Monitor::No).boxed()];
        for v in vars {
            leaves.push(Just(Monitor::Var(VarName::new(v))).boxed());
        }
        let leaf = proptest::strategy::Union::new(leaves);
        leaf.prop_recursive(depth * 2, 24, 2, move |inner| {
            prop_oneof![
                (proptest::sample::select(acts), inner.clone()).prop_map(|(a, m)| Monitor::prefix(Action::new(a), m)),
                (inner.clone(), inner).prop_map(|(l, r)| Monitor::sum(l, r)),
            ]
        })
        .prop_filter("depth bound", move |m| m.depth() <= depth as usize)
        .boxed()
    }
}

/// Single-step corruptions of a derivation: each step's left side or right
/// side perturbed, and each step that something depends on deleted.
pub fn mutants(d: &monalg::prooflog::Derivation) -> Vec<(String, monalg::prooflog::Derivation)> {
    let bump = |m: &Monitor| Monitor::sum(m.clone(), Monitor::No);
    let used: std::collections::BTreeSet<_> = d.steps.iter().flat_map(|s| s.justification.references()).collect();
    let last = d.steps.last().map(|s| s.id);
    let mut out = Vec::new();
    for i in 0..d.steps.len() {
        let id = d.steps[i].id;
        let mut l = d.clone();
        l.steps[i].equation.lhs = bump(&l.steps[i].equation.lhs);
        out.push((format!("lhs of step {id}"), l));
        let mut r = d.clone();
        r.steps[i].equation.rhs = bump(&r.steps[i].equation.rhs);
        out.push((format!("rhs of step {id}"), r));
        if used.contains(&id) || Some(id) == last {
            let mut gone = d.clone();
            gone.steps.remove(i);
            out.push((format!("step {id} deleted"), gone));
        }
    }
    out
}
