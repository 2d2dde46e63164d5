//! Monitor terms and the structural operations on them.
//!
//! Sums are binary in the AST. [`SumForm`] and [`ac_canon`] give the view of a
//! term modulo associativity, commutativity, idempotence and the unit `end`.
//! Canonical sums are left-nested with summands in ascending [`Ord`] order, so
//! that they print without parentheses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Words that can never name an action or a variable.
pub const RESERVED: [&str; 3] = ["yes", "no", "end"];

/// Returns true for `yes`, `no` and `end`.
pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

/// A visible action.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(Arc<str>);

impl Action {
    pub fn new(name: &str) -> Action {
        Action(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A term variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarName(Arc<str>);

impl VarName {
    pub fn new(name: &str) -> VarName {
        VarName(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The ambient action set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Alphabet {
    /// Sorted, duplicate-free, nonempty.
    Finite(Vec<Action>),
    /// Any identifier may be used as an action.
    OpenEnded,
}

impl Alphabet {
    /// Builds a finite alphabet, sorting and removing duplicates.
    ///
    /// Panics if `actions` is empty or contains a reserved word; the parser
    /// reports those cases as errors before reaching this point.
    pub fn finite<I: IntoIterator<Item = Action>>(actions: I) -> Alphabet {
        let set: BTreeSet<Action> = actions.into_iter().collect();
        assert!(!set.is_empty(), "finite alphabet must be nonempty");
        assert!(set.iter().all(|a| !is_reserved(a.as_str())), "reserved word used as action");
        Alphabet::Finite(set.into_iter().collect())
    }

    /// Shorthand for tests and examples: `Alphabet::of(&["a", "b"])`.
    pub fn of(names: &[&str]) -> Alphabet {
        Alphabet::finite(names.iter().map(|n| Action::new(n)))
    }

    pub fn contains(&self, a: &Action) -> bool {
        match self {
            Alphabet::Finite(acts) => acts.binary_search(a).is_ok(),
            Alphabet::OpenEnded => !is_reserved(a.as_str()),
        }
    }

    /// The actions of a finite alphabet, in ascending order.
    pub fn actions(&self) -> Option<&[Action]> {
        match self {
            Alphabet::Finite(acts) => Some(acts),
            Alphabet::OpenEnded => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Alphabet::Finite(_))
    }

    /// Number of actions, `None` when open-ended.
    pub fn size(&self) -> Option<usize> {
        self.actions().map(|a| a.len())
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alphabet::OpenEnded => f.write_str("infinite"),
            Alphabet::Finite(acts) => {
                for (i, a) in acts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                Ok(())
            }
        }
    }
}

/// A monitor term.
///
/// The derived ordering puts verdicts before prefixes and prefixes before
/// variables, which is the canonical summand order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Monitor {
    End,
    Yes,
    No,
    Prefix(Action, Box<Monitor>),
    Var(VarName),
    Sum(Box<Monitor>, Box<Monitor>),
}

impl Monitor {
    pub fn prefix(a: Action, body: Monitor) -> Monitor {
        Monitor::Prefix(a, Box::new(body))
    }

    pub fn sum(l: Monitor, r: Monitor) -> Monitor {
        Monitor::Sum(Box::new(l), Box::new(r))
    }

    pub fn var(name: &str) -> Monitor {
        Monitor::Var(VarName::new(name))
    }

    pub fn act(name: &str, body: Monitor) -> Monitor {
        Monitor::prefix(Action::new(name), body)
    }

    /// `yes + no`
    pub fn both() -> Monitor {
        Monitor::sum(Monitor::Yes, Monitor::No)
    }

    /// Left-nested sum of the given terms; the empty sum is `end`.
    pub fn sum_of<I: IntoIterator<Item = Monitor>>(items: I) -> Monitor {
        let mut it = items.into_iter();
        match it.next() {
            None => Monitor::End,
            Some(first) => it.fold(first, Monitor::sum),
        }
    }

    pub fn is_verdict(&self) -> bool {
        matches!(self, Monitor::End | Monitor::Yes | Monitor::No)
    }

    /// Nesting depth of prefixes; verdicts and variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Monitor::End | Monitor::Yes | Monitor::No | Monitor::Var(_) => 0,
            Monitor::Prefix(_, m) => 1 + m.depth(),
            Monitor::Sum(l, r) => l.depth().max(r.depth()),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Monitor::End | Monitor::Yes | Monitor::No | Monitor::Var(_) => 1,
            Monitor::Prefix(_, m) => 1 + m.size(),
            Monitor::Sum(l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Monitor::Var(x) => {
                out.insert(x.clone());
            }
            Monitor::Prefix(_, m) => m.collect_vars(out),
            Monitor::Sum(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            _ => {}
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Monitor::Var(_) => false,
            Monitor::Prefix(_, m) => m.is_closed(),
            Monitor::Sum(l, r) => l.is_closed() && r.is_closed(),
            _ => true,
        }
    }

    /// Actions occurring syntactically in the term.
    pub fn actions(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        self.collect_actions(&mut out);
        out
    }

    fn collect_actions(&self, out: &mut BTreeSet<Action>) {
        match self {
            Monitor::Prefix(a, m) => {
                out.insert(a.clone());
                m.collect_actions(out);
            }
            Monitor::Sum(l, r) => {
                l.collect_actions(out);
                r.collect_actions(out);
            }
            _ => {}
        }
    }

    /// Whether a verdict occurs anywhere in the term.
    pub fn contains(&self, v: &Monitor) -> bool {
        if self == v {
            return true;
        }
        match self {
            Monitor::Prefix(_, m) => m.contains(v),
            Monitor::Sum(l, r) => l.contains(v) || r.contains(v),
            _ => false,
        }
    }

    /// Top-level summands after flattening sums, in syntactic order.
    /// `end` summands are kept.
    pub fn flat_summands(&self) -> Vec<&Monitor> {
        let mut out = Vec::new();
        fn go<'a>(m: &'a Monitor, out: &mut Vec<&'a Monitor>) {
            match m {
                Monitor::Sum(l, r) => {
                    go(l, out);
                    go(r, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// The term with every variable replaced by `end`.
    pub fn close_with_end(&self) -> Monitor {
        match self {
            Monitor::Var(_) => Monitor::End,
            Monitor::Prefix(a, m) => Monitor::prefix(a.clone(), m.close_with_end()),
            Monitor::Sum(l, r) => Monitor::sum(l.close_with_end(), r.close_with_end()),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_monitor(self))
    }
}

impl fmt::Debug for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_monitor(self))
    }
}

/// A finite map from variables to terms; unmapped variables stay put.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(pub BTreeMap<VarName, Monitor>);

impl Substitution {
    pub fn identity() -> Substitution {
        Substitution(BTreeMap::new())
    }

    pub fn single(x: VarName, m: Monitor) -> Substitution {
        let mut map = BTreeMap::new();
        map.insert(x, m);
        Substitution(map)
    }

    pub fn from_pairs<I: IntoIterator<Item = (VarName, Monitor)>>(pairs: I) -> Substitution {
        Substitution(pairs.into_iter().collect())
    }

    pub fn insert(&mut self, x: VarName, m: Monitor) {
        self.0.insert(x, m);
    }

    pub fn get(&self, x: &VarName) -> Option<&Monitor> {
        self.0.get(x)
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.0.values().all(Monitor::is_closed)
    }

    pub fn apply(&self, m: &Monitor) -> Monitor {
        apply_subst(self, m)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (i, (x, m)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} -> {m}")?;
        }
        Ok(())
    }
}

/// Replaces every variable leaf by its image under `sigma`.
pub fn apply_subst(sigma: &Substitution, m: &Monitor) -> Monitor {
    if sigma.is_identity() {
        return m.clone();
    }
    match m {
        Monitor::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| m.clone()),
        Monitor::Prefix(a, body) => Monitor::prefix(a.clone(), apply_subst(sigma, body)),
        Monitor::Sum(l, r) => Monitor::sum(apply_subst(sigma, l), apply_subst(sigma, r)),
        other => other.clone(),
    }
}

/// `lhs = rhs`
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Equation {
    pub lhs: Monitor,
    pub rhs: Monitor,
}

impl Equation {
    pub fn new(lhs: Monitor, rhs: Monitor) -> Equation {
        Equation { lhs, rhs }
    }

    pub fn flipped(&self) -> Equation {
        Equation::new(self.rhs.clone(), self.lhs.clone())
    }

    pub fn apply(&self, sigma: &Substitution) -> Equation {
        Equation::new(apply_subst(sigma, &self.lhs), apply_subst(sigma, &self.rhs))
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        let mut v = self.lhs.vars();
        v.extend(self.rhs.vars());
        v
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A sum viewed as a set of summands. Summands are themselves
/// AC-canonical; the empty set stands for `end`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SumForm {
    pub summands: BTreeSet<Monitor>,
}

impl SumForm {
    pub fn is_end(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn to_monitor(&self) -> Monitor {
        from_sum_form(self)
    }
}

pub fn to_sum_form(m: &Monitor) -> SumForm {
    let mut summands = BTreeSet::new();
    for s in m.flat_summands() {
        if *s != Monitor::End {
            summands.insert(ac_canon(s));
        }
    }
    SumForm { summands }
}

pub fn from_sum_form(f: &SumForm) -> Monitor {
    Monitor::sum_of(f.summands.iter().cloned())
}

/// The AC-canonical representative: hereditarily flattened, `end` summands
/// dropped, duplicates removed, summands sorted and left-nested.
pub fn ac_canon(m: &Monitor) -> Monitor {
    match m {
        Monitor::Prefix(a, body) => Monitor::prefix(a.clone(), ac_canon(body)),
        Monitor::Sum(..) => from_sum_form(&to_sum_form(m)),
        other => other.clone(),
    }
}

/// Whether the term is its own AC-canonical representative.
pub fn is_ac_canonical(m: &Monitor) -> bool {
    ac_canon(m) == *m
}

pub fn ac_equal(m: &Monitor, n: &Monitor) -> bool {
    m == n || ac_canon(m) == ac_canon(n)
}
