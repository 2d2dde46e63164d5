use std::collections::BTreeSet;

use monalg::syntax::{
    parse_alphabet, parse_equation, parse_monitor, parse_monitor_file, parse_monitor_with_vars, parse_substitution,
    parse_trace, print_monitor, print_trace, ParseErrorKind,
};
use monalg::term::{ac_canon, ac_equal, is_ac_canonical, Action, Alphabet, Monitor, Substitution, VarName};
use proptest::prelude::*;

mod common;

fn ab() -> Alphabet {
    Alphabet::of(&["a", "b"])
}

fn xs() -> BTreeSet<VarName> {
    ["x", "y"].iter().map(|v| VarName::new(v)).collect()
}

#[test]
fn precedence_and_associativity() {
    let m = parse_monitor("a.b.yes + no + end", &ab()).unwrap();
    let want =
        Monitor::sum(Monitor::sum(Monitor::act("a", Monitor::act("b", Monitor::Yes)), Monitor::No), Monitor::End);
    assert_eq!(m, want);
    let grouped = parse_monitor("a.(yes + no)", &ab()).unwrap();
    assert_eq!(grouped, Monitor::act("a", Monitor::both()));
    assert_eq!(print_monitor(&grouped), "a.(yes + no)");
}

#[test]
fn right_nested_sums_keep_parentheses() {
    let m = Monitor::sum(Monitor::Yes, Monitor::sum(Monitor::No, Monitor::End));
    assert_eq!(print_monitor(&m), "yes + (no + end)");
    assert_eq!(parse_monitor(&print_monitor(&m), &ab()).unwrap(), m);
}

#[test]
fn finite_alphabet_separates_actions_from_variables() {
    let m = parse_monitor("a.x + y", &ab()).unwrap();
    assert_eq!(m.vars(), xs());
    let err = parse_monitor("c.yes", &ab()).unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::UnexpectedToken);
}

#[test]
fn open_alphabet_needs_declared_variables() {
    let m = parse_monitor("vars: x\na.x + b.yes", &Alphabet::OpenEnded).unwrap();
    assert_eq!(m.vars().len(), 1);
    assert!(m.actions().contains(&Action::new("b")));
    assert!(parse_monitor("x", &Alphabet::OpenEnded).is_err());
}

#[test]
fn error_kinds_and_positions() {
    let err = parse_monitor("a.(yes + no", &ab()).unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::UnbalancedParen);
    let err = parse_monitor("   ", &ab()).unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::EmptyInput);
    let err = parse_monitor_with_vars("yes.no", &Alphabet::OpenEnded, &xs()).unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::ReservedWordAsAction);
    let err = parse_monitor("yes +\n  + no", &ab()).unwrap_err();
    assert_eq!((err.span.line, err.span.column), (2, 3));
}

#[test]
fn alphabets_traces_and_substitutions() {
    assert_eq!(parse_alphabet("infinite").unwrap(), Alphabet::OpenEnded);
    assert_eq!(parse_alphabet(" b, a").unwrap(), ab());
    assert!(parse_alphabet("a, b, a").is_err());
    assert!(parse_alphabet("a, yes").is_err());
    let t = parse_trace("a b a").unwrap();
    assert_eq!(print_trace(&t), "a b a");
    assert_eq!(print_trace(&[]), "<eps>");
    assert!(parse_trace("<eps>").unwrap().is_empty());
    let s = parse_substitution("x -> a.yes, y -> end", &ab(), &xs()).unwrap();
    assert_eq!(s.get(&VarName::new("x")), Some(&Monitor::act("a", Monitor::Yes)));
    assert_eq!(s.to_string(), "x -> a.yes, y -> end");
}

#[test]
fn equations_and_monitor_files() {
    let eq = parse_equation("x + a.x = x", &Alphabet::of(&["a"])).unwrap();
    assert_eq!(eq.rhs, Monitor::var("x"));
    assert_eq!(eq.to_string(), "x + a.x = x");
    let file =
        parse_monitor_file("alphabet: a,b\n# two terms\nm := a.yes\nn := b.(no + x)\n", &Alphabet::OpenEnded).unwrap();
    assert_eq!(file.entries.len(), 2);
    assert_eq!(file.headers.alphabet, Some(ab()));
    assert_eq!(file.entries[1].0.as_deref(), Some("n"));
}

#[test]
fn ac_canonical_form() {
    let m = parse_monitor("(b.no + end) + (a.yes + b.no)", &ab()).unwrap();
    let c = ac_canon(&m);
    assert!(is_ac_canonical(&c));
    assert_eq!(print_monitor(&c), "a.yes + b.no");
    assert!(ac_equal(&m, &parse_monitor("a.yes + b.no", &ab()).unwrap()));
    assert!(!ac_equal(&m, &parse_monitor("a.yes", &ab()).unwrap()));
    assert_eq!(ac_canon(&Monitor::sum(Monitor::End, Monitor::End)), Monitor::End);
}

#[test]
fn substitution_replaces_only_mapped_variables() {
    let m = parse_monitor("x + a.(y + x)", &ab()).unwrap();
    let s = Substitution::single(VarName::new("x"), Monitor::No);
    assert_eq!(print_monitor(&s.apply(&m)), "no + a.(y + no)");
    assert!(Substitution::identity().apply(&m) == m);
    assert_eq!(m.close_with_end().vars().len(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_identity(m in common::strategy::monitor(&["a", "b"], &["x", "y"], 4)) {
        let text = print_monitor(&m);
        prop_assert_eq!(parse_monitor(&text, &ab()).unwrap(), m);
    }

    #[test]
    fn ac_canon_is_idempotent_and_stable(m in common::strategy::monitor(&["a", "b"], &["x"], 3)) {
        let c = ac_canon(&m);
        prop_assert_eq!(ac_canon(&c), c.clone());
        prop_assert_eq!(c.vars(), m.vars());
        prop_assert!(c.depth() <= m.depth());
        prop_assert!(c.size() <= m.size());
    }

    #[test]
    fn ac_equal_ignores_order_and_duplicates(
        m in common::strategy::monitor(&["a", "b"], &["x"], 2),
        n in common::strategy::monitor(&["a", "b"], &["x"], 2),
    ) {
        let mn = Monitor::sum(m.clone(), n.clone());
        let nm = Monitor::sum(n.clone(), Monitor::sum(m.clone(), n.clone()));
        prop_assert!(ac_equal(&mn, &nm));
        prop_assert!(ac_equal(&Monitor::sum(m.clone(), Monitor::End), &m));
    }

    #[test]
    fn substitution_composes(m in common::strategy::monitor(&["a", "b"], &["x", "y"], 3)) {
        let s1 = Substitution::single(VarName::new("x"), Monitor::act("a", Monitor::var("y")));
        let s2 = Substitution::single(VarName::new("y"), Monitor::Yes);
        let stepwise = s2.apply(&s1.apply(&m));
        let mut both = Substitution::single(VarName::new("x"), Monitor::act("a", Monitor::Yes));
        both.insert(VarName::new("y"), Monitor::Yes);
        prop_assert_eq!(stepwise, both.apply(&m));
    }
}
