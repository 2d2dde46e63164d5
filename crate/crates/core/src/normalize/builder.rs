//! Incremental construction of derivations, and proofs of AC
//! rearrangements from `A1`–`A4`.

use std::collections::{BTreeMap, HashMap};

use crate::axioms::{instantiate, Bindings, Schema, SystemName};
use crate::prooflog::{Derivation, Justification, Step, StepId};
use crate::term::{ac_canon, Action, Alphabet, Equation, Monitor, Substitution, VarName};

/// A proved equation. `id == None` means the identity proof `lhs = lhs`,
/// or, when the builder is disabled, that no proof was recorded.
#[derive(Clone, Debug)]
pub(crate) struct Eqn {
    pub lhs: Monitor,
    pub rhs: Monitor,
    id: Option<StepId>,
}

impl Eqn {
    /// An equation taken on semantic grounds, with no proof.
    pub fn unproved(lhs: Monitor, rhs: Monitor) -> Eqn {
        Eqn { lhs, rhs, id: None }
    }
}

pub(crate) struct Builder {
    enabled: bool,
    alphabet: Alphabet,
    steps: Vec<Step>,
    refl: HashMap<Monitor, StepId>,
}

pub(crate) fn sub(pairs: &[(&str, &Monitor)]) -> Substitution {
    Substitution::from_pairs(pairs.iter().map(|(x, m)| (VarName::new(x), (*m).clone())))
}

impl Builder {
    pub fn new(alphabet: &Alphabet, enabled: bool) -> Builder {
        Builder { enabled, alphabet: alphabet.clone(), steps: Vec::new(), refl: HashMap::new() }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn set_enabled(&mut self, on: bool) {
        self.enabled = on;
    }

    fn push(&mut self, equation: Equation, justification: Justification) -> StepId {
        let id = self.steps.len() + 1;
        self.steps.push(Step { id, equation, justification });
        id
    }

    fn materialize(&mut self, e: &Eqn) -> StepId {
        if let Some(id) = e.id {
            return id;
        }
        if let Some(&id) = self.refl.get(&e.lhs) {
            return id;
        }
        let id = self.push(Equation::new(e.lhs.clone(), e.lhs.clone()), Justification::Reflexivity);
        self.refl.insert(e.lhs.clone(), id);
        id
    }

    pub fn refl(&self, t: &Monitor) -> Eqn {
        Eqn { lhs: t.clone(), rhs: t.clone(), id: None }
    }

    pub fn axiom(&mut self, schema: Schema, bindings: Bindings, sigma: Substitution, reversed: bool) -> Eqn {
        let inst = instantiate(schema, &bindings, &self.alphabet).expect("emitter instantiates valid axioms");
        let mut eq = inst.equation.apply(&sigma);
        if reversed {
            eq = eq.flipped();
        }
        let id = self.enabled.then(|| self.push(eq.clone(), Justification::Axiom { schema, bindings, sigma }));
        Eqn { lhs: eq.lhs, rhs: eq.rhs, id }
    }

    pub fn ax(&mut self, schema: Schema, sigma: Substitution) -> Eqn {
        self.axiom(schema, Bindings::None, sigma, false)
    }

    pub fn ax_rev(&mut self, schema: Schema, sigma: Substitution) -> Eqn {
        self.axiom(schema, Bindings::None, sigma, true)
    }

    pub fn ax_act(&mut self, schema: Schema, a: &Action, sigma: Substitution, reversed: bool) -> Eqn {
        self.axiom(schema, Bindings::Action(a.clone()), sigma, reversed)
    }

    pub fn sym(&mut self, e: Eqn) -> Eqn {
        let id = match e.id {
            Some(i) if self.enabled => {
                Some(self.push(Equation::new(e.rhs.clone(), e.lhs.clone()), Justification::Symmetry(i)))
            }
            _ => None,
        };
        Eqn { lhs: e.rhs, rhs: e.lhs, id }
    }

    pub fn trans(&mut self, a: Eqn, b: Eqn) -> Eqn {
        if self.enabled {
            debug_assert_eq!(a.rhs, b.lhs, "transitivity chain broken");
        }
        let id = match (a.id, b.id) {
            _ if a.lhs == b.rhs => None,
            (None, None) => None,
            (Some(i), None) => Some(i),
            (None, Some(j)) => Some(j),
            (Some(i), Some(j)) => {
                Some(self.push(Equation::new(a.lhs.clone(), b.rhs.clone()), Justification::Transitivity(i, j)))
            }
        };
        Eqn { lhs: a.lhs, rhs: b.rhs, id: if self.enabled { id } else { None } }
    }

    pub fn cong_sum(&mut self, a: Eqn, b: Eqn) -> Eqn {
        let lhs = Monitor::sum(a.lhs.clone(), b.lhs.clone());
        let rhs = Monitor::sum(a.rhs.clone(), b.rhs.clone());
        if !self.enabled || (a.id.is_none() && b.id.is_none()) {
            return Eqn { lhs, rhs, id: None };
        }
        let (i, j) = (self.materialize(&a), self.materialize(&b));
        let id = self.push(Equation::new(lhs.clone(), rhs.clone()), Justification::CongruenceSum(i, j));
        Eqn { lhs, rhs, id: Some(id) }
    }

    pub fn cong_prefix(&mut self, act: &Action, e: Eqn) -> Eqn {
        let lhs = Monitor::prefix(act.clone(), e.lhs.clone());
        let rhs = Monitor::prefix(act.clone(), e.rhs.clone());
        let id = match e.id {
            Some(i) if self.enabled => Some(
                self.push(Equation::new(lhs.clone(), rhs.clone()), Justification::CongruencePrefix(act.clone(), i)),
            ),
            _ => None,
        };
        Eqn { lhs, rhs, id }
    }

    /// Turns the final proof into a derivation containing only the steps it
    /// depends on, renumbered from 1.
    pub fn finish(mut self, system: SystemName, proof: &Eqn) -> Option<Derivation> {
        if !self.enabled {
            return None;
        }
        let root = match proof.id {
            Some(id) => id,
            None => self.materialize(proof),
        };
        let mut keep = vec![false; self.steps.len() + 1];
        let mut work = vec![root];
        while let Some(i) = work.pop() {
            if keep[i] {
                continue;
            }
            keep[i] = true;
            work.extend(self.steps[i - 1].justification.references());
        }
        let mut renumber = BTreeMap::new();
        let mut steps = Vec::new();
        for step in self.steps.into_iter() {
            if !keep[step.id] {
                continue;
            }
            let new_id = steps.len() + 1;
            renumber.insert(step.id, new_id);
            let justification = step.justification.renumbered(|i| renumber[&i]);
            steps.push(Step { id: new_id, equation: step.equation, justification });
        }
        Some(Derivation { system, alphabet: self.alphabet, bounds: None, steps })
    }

    // ---- AC rearrangement -------------------------------------------------

    /// `C + s = canon(C + s)` for canonical `C` and a canonical summand `s`.
    fn insert(&mut self, c: &Monitor, s: &Monitor) -> Eqn {
        match c {
            Monitor::End => {
                let e1 = self.ax(Schema::A1, sub(&[("x", c), ("y", s)]));
                let e2 = self.ax(Schema::A4, sub(&[("x", s)]));
                self.trans(e1, e2)
            }
            Monitor::Sum(c1, last) => {
                let (c1, last) = (&**c1, &**last);
                if last < s {
                    return self.refl(&Monitor::sum(c.clone(), s.clone()));
                }
                let e1 = self.ax_rev(Schema::A2, sub(&[("x", c1), ("y", last), ("z", s)]));
                if last == s {
                    let a3 = self.ax(Schema::A3, sub(&[("x", s)]));
                    let r = self.refl(c1);
                    let e2 = self.cong_sum(r, a3);
                    return self.trans(e1, e2);
                }
                let a1 = self.ax(Schema::A1, sub(&[("x", last), ("y", s)]));
                let r = self.refl(c1);
                let e2 = self.cong_sum(r, a1);
                let e3 = self.ax(Schema::A2, sub(&[("x", c1), ("y", s), ("z", last)]));
                let inner = self.insert(c1, s);
                let rl = self.refl(last);
                let e4 = self.cong_sum(inner, rl);
                let t = self.trans(e1, e2);
                let t = self.trans(t, e3);
                self.trans(t, e4)
            }
            single => {
                if single < s {
                    self.refl(&Monitor::sum(c.clone(), s.clone()))
                } else if single == s {
                    self.ax(Schema::A3, sub(&[("x", s)]))
                } else {
                    self.ax(Schema::A1, sub(&[("x", single), ("y", s)]))
                }
            }
        }
    }

    /// `L + R = canon(L + R)` for canonical `L` and `R`.
    pub fn merge(&mut self, l: &Monitor, r: &Monitor) -> Eqn {
        match r {
            Monitor::End => self.ax(Schema::A4, sub(&[("x", l)])),
            _ if *l == Monitor::End => {
                let e1 = self.ax(Schema::A1, sub(&[("x", l), ("y", r)]));
                let e2 = self.ax(Schema::A4, sub(&[("x", r)]));
                self.trans(e1, e2)
            }
            Monitor::Sum(r1, last) => {
                let (r1, last) = (&**r1, &**last);
                let e1 = self.ax(Schema::A2, sub(&[("x", l), ("y", r1), ("z", last)]));
                let m = self.merge(l, r1);
                let rl = self.refl(last);
                let e2 = self.cong_sum(m, rl);
                let mid = e2.rhs.clone();
                let Monitor::Sum(mm, _) = &mid else { unreachable!("cong_sum builds a sum") };
                let e3 = self.insert(mm, last);
                let t = self.trans(e1, e2);
                self.trans(t, e3)
            }
            _ => self.insert(l, r),
        }
    }

    /// `t = ac_canon(t)` using only `A1`–`A4` and congruence.
    pub fn canon(&mut self, t: &Monitor) -> Eqn {
        let e = match t {
            Monitor::Prefix(a, body) => {
                let inner = self.canon(body);
                self.cong_prefix(a, inner)
            }
            Monitor::Sum(l, r) => {
                let el = self.canon(l);
                let er = self.canon(r);
                let (lc, rc) = (el.rhs.clone(), er.rhs.clone());
                let e1 = self.cong_sum(el, er);
                let e2 = self.merge(&lc, &rc);
                self.trans(e1, e2)
            }
            _ => self.refl(t),
        };
        debug_assert_eq!(e.rhs, ac_canon(t));
        e
    }

    /// `t = u` for AC-equal terms.
    pub fn ac(&mut self, t: &Monitor, u: &Monitor) -> Eqn {
        if t == u {
            return self.refl(t);
        }
        let e1 = self.canon(t);
        let e2 = self.canon(u);
        assert_eq!(e1.rhs, e2.rhs, "ac() called on terms that are not AC-equal");
        let e2 = self.sym(e2);
        self.trans(e1, e2)
    }

    /// Rewrites a canonical sum by grouping `group` (left-nested, in the
    /// given order) at the right, applying `proof` to the group, and
    /// re-canonicalizing. `proof` must have `lhs == sum_of(group)`.
    pub fn rewrite_group(&mut self, c: &Monitor, group: &[Monitor], proof: Eqn) -> Eqn {
        let mut rest: Vec<Monitor> = c.flat_summands().into_iter().cloned().collect();
        for g in group {
            let pos = rest.iter().position(|r| r == g).expect("group member is a summand");
            rest.remove(pos);
        }
        let gsum = Monitor::sum_of(group.iter().cloned());
        debug_assert_eq!(proof.lhs, gsum);
        let (target, e2) = if rest.is_empty() {
            (gsum, proof)
        } else {
            let rsum = Monitor::sum_of(rest);
            let rr = self.refl(&rsum);
            (Monitor::sum(rsum, gsum), self.cong_sum(rr, proof))
        };
        let e1 = self.ac(c, &target);
        let mid = e2.rhs.clone();
        let e3 = self.canon(&mid);
        let t = self.trans(e1, e2);
        self.trans(t, e3)
    }

    /// Applies `e` at the node reached along `path` inside `term`, where
    /// each step of the path selects the unique prefix summand with that
    /// action.
    pub fn cong_at(&mut self, term: &Monitor, path: &[Action], e: Eqn) -> Eqn {
        if path.is_empty() {
            debug_assert_eq!(*term, e.lhs);
            return e;
        }
        match term {
            Monitor::Prefix(a, body) if *a == path[0] => {
                let inner = self.cong_at(body, &path[1..], e);
                self.cong_prefix(a, inner)
            }
            Monitor::Sum(l, r) => {
                if matches!(&**r, Monitor::Prefix(a, _) if *a == path[0]) {
                    let rl = self.refl(l);
                    let inner = self.cong_at(r, path, e);
                    self.cong_sum(rl, inner)
                } else {
                    let inner = self.cong_at(l, path, e);
                    let rr = self.refl(r);
                    self.cong_sum(inner, rr)
                }
            }
            _ => panic!("path leaves the term"),
        }
    }
}
