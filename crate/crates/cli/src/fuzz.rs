//! Random cross-validation of canonical forms against the semantic
//! decision procedures.

use std::fmt::Write as _;

use monalg::equivalence::{closed_equiv, oracle_with_cap, verdict_equiv_open, EquivMode};
use monalg::gen::{random_monitor, sound_variant, GenConfig};
use monalg::normalize::{normalize, FormKind};
use monalg::term::{Action, Alphabet, Monitor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Substitution family cap used by the oracle during fuzzing.
const ORACLE_CAP: usize = 2048;

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub alphabet: Alphabet,
    pub mode: EquivMode,
    pub pairs: usize,
    pub depth: usize,
    pub vars: usize,
    pub min_size: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct Disagreement {
    pub lhs: Monitor,
    pub rhs: Monitor,
    pub semantic: bool,
}

#[derive(Clone, Debug)]
pub struct FuzzReport {
    pub form: FormKind,
    pub pairs: usize,
    pub equivalent: usize,
    pub disagreements: Vec<Disagreement>,
}

impl FuzzReport {
    pub fn render(&self, cfg: &FuzzConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "fuzz: form {}, mode {}, alphabet {}, {} pairs, depth {}, {} vars, seed {}",
            self.form, cfg.mode, cfg.alphabet, self.pairs, cfg.depth, cfg.vars, cfg.seed
        );
        let _ = writeln!(out, "equivalent pairs: {}", self.equivalent);
        let _ = writeln!(out, "disagreements: {}", self.disagreements.len());
        for d in &self.disagreements {
            let verdict = if d.semantic { "equivalent, forms differ" } else { "inequivalent, forms agree" };
            let _ = writeln!(out, "  {} | {}  ({verdict})", d.lhs, d.rhs);
        }
        out
    }
}

/// The canonical form deciding `mode` over `alphabet` for terms that may
/// contain variables.
pub fn form_for(alphabet: &Alphabet, mode: EquivMode, closed: bool) -> FormKind {
    match (alphabet.size(), mode, closed) {
        (None, _, true) => FormKind::RNF,
        (None, _, false) => FormKind::OpenRNF,
        (Some(_), EquivMode::Verdict, true) => FormKind::RNF,
        (Some(_), EquivMode::OmegaVerdict, true) => FormKind::OmegaNF,
        (Some(1), EquivMode::Verdict, false) => FormKind::UnaryRNF,
        (Some(1), EquivMode::OmegaVerdict, false) => FormKind::UnaryOmegaNF,
        (Some(_), EquivMode::Verdict, false) => FormKind::FinRNF,
        (Some(_), EquivMode::OmegaVerdict, false) => FormKind::OpenOmegaNF,
    }
}

struct Judge<'a> {
    cfg: &'a FuzzConfig,
    form: FormKind,
}

impl Judge<'_> {
    fn semantic(&self, m: &Monitor, n: &Monitor) -> bool {
        let alphabet = &self.cfg.alphabet;
        if m.is_closed() && n.is_closed() {
            return closed_equiv(m, n, alphabet, self.cfg.mode).is_none();
        }
        match alphabet.actions() {
            None => verdict_equiv_open(m, n, alphabet).map(|o| o.is_equivalent()).unwrap_or(false),
            Some(acts) => {
                let d = m.depth() + n.depth() + 2;
                oracle_with_cap(m, n, acts, self.cfg.mode, d, ORACLE_CAP).is_equivalent()
            }
        }
    }

    fn syntactic(&self, m: &Monitor, n: &Monitor) -> bool {
        let a = normalize(self.form, m, &self.cfg.alphabet, false);
        let b = normalize(self.form, n, &self.cfg.alphabet, false);
        match (a, b) {
            (Ok(a), Ok(b)) => a.term == b.term,
            _ => false,
        }
    }

    /// `Some(semantic verdict)` when the two judgements disagree.
    fn disagreement(&self, m: &Monitor, n: &Monitor) -> Option<bool> {
        let sem = self.semantic(m, n);
        (sem != self.syntactic(m, n)).then_some(sem)
    }
}

pub fn run(cfg: &FuzzConfig) -> FuzzReport {
    let acts: Vec<Action> = match cfg.alphabet.actions() {
        Some(a) => a.to_vec(),
        None => vec![Action::new("a"), Action::new("b")],
    };
    let gen = GenConfig::open(&acts, cfg.depth, cfg.vars).with_min_size(cfg.min_size);
    let form = form_for(&cfg.alphabet, cfg.mode, cfg.vars == 0);
    let judge = Judge { cfg, form };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = FuzzReport { form, pairs: cfg.pairs, equivalent: 0, disagreements: Vec::new() };
    for _ in 0..cfg.pairs {
        let m = random_monitor(&mut rng, &gen);
        let n = if rng.gen_bool(0.5) { sound_variant(&mut rng, &m, &acts) } else { random_monitor(&mut rng, &gen) };
        let sem = judge.semantic(&m, &n);
        report.equivalent += sem as usize;
        if sem != judge.syntactic(&m, &n) {
            let (lhs, rhs, semantic) = shrink(&judge, m, n);
            report.disagreements.push(Disagreement { lhs, rhs, semantic });
        }
    }
    report
}

/// Greedily replaces subterms by smaller ones while the disagreement
/// persists.
fn shrink(judge: &Judge<'_>, mut m: Monitor, mut n: Monitor) -> (Monitor, Monitor, bool) {
    let mut semantic = judge.disagreement(&m, &n).unwrap_or(false);
    loop {
        let mut progressed = false;
        for cand in smaller(&m) {
            if let Some(s) = judge.disagreement(&cand, &n) {
                (m, semantic, progressed) = (cand, s, true);
                break;
            }
        }
        for cand in smaller(&n) {
            if let Some(s) = judge.disagreement(&m, &cand) {
                (n, semantic, progressed) = (cand, s, true);
                break;
            }
        }
        if !progressed {
            return (m, n, semantic);
        }
    }
}

fn smaller(m: &Monitor) -> Vec<Monitor> {
    let mut out = Vec::new();
    match m {
        Monitor::Prefix(a, body) => {
            out.push((**body).clone());
            out.extend(smaller(body).into_iter().map(|b| Monitor::prefix(a.clone(), b)));
        }
        Monitor::Sum(l, r) => {
            out.push((**l).clone());
            out.push((**r).clone());
            out.extend(smaller(l).into_iter().map(|x| Monitor::sum(x, (**r).clone())));
            out.extend(smaller(r).into_iter().map(|x| Monitor::sum((**l).clone(), x)));
        }
        _ => {}
    }
    if !matches!(m, Monitor::End) {
        out.push(Monitor::End);
    }
    out.retain(|c| c.size() < m.size());
    out
}
