//! Seeded random terms for fuzzing and property tests.
//!
//! Each node picks a constructor uniformly among those still allowed. At
//! nesting level `l`, a compound constructor is kept with probability
//! `decay^l`; otherwise a leaf is drawn instead. Prefix nesting never
//! exceeds `max_depth`. Draws smaller than `min_size` nodes are discarded
//! and redrawn.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::term::{Action, Monitor, VarName};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_depth: usize,
    pub vars: Vec<VarName>,
    pub actions: Vec<Action>,
    pub decay: f64,
    pub min_size: usize,
}

impl GenConfig {
    pub fn closed(actions: &[Action], max_depth: usize) -> GenConfig {
        GenConfig { max_depth, vars: Vec::new(), actions: actions.to_vec(), decay: 0.75, min_size: 1 }
    }

    /// Variable pool `{x, y}` truncated to `nvars`.
    pub fn open(actions: &[Action], max_depth: usize, nvars: usize) -> GenConfig {
        let vars = ["x", "y"].iter().take(nvars).map(|v| VarName::new(v)).collect();
        GenConfig { max_depth, vars, actions: actions.to_vec(), decay: 0.75, min_size: 1 }
    }

    pub fn with_min_size(mut self, n: usize) -> GenConfig {
        self.min_size = n;
        self
    }
}

#[derive(Clone, Copy)]
enum Ctor {
    End,
    Yes,
    No,
    Var,
    Prefix,
    Sum,
}

pub fn random_monitor<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Monitor {
    loop {
        let m = gen(rng, cfg, 0, cfg.max_depth);
        if m.size() >= cfg.min_size {
            return m;
        }
    }
}

fn gen<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig, level: i32, depth_left: usize) -> Monitor {
    let mut leaves = vec![Ctor::End, Ctor::Yes, Ctor::No];
    if !cfg.vars.is_empty() {
        leaves.push(Ctor::Var);
    }
    let mut all = leaves.clone();
    if depth_left > 0 && !cfg.actions.is_empty() {
        all.push(Ctor::Prefix);
    }
    all.push(Ctor::Sum);
    let mut pick = *all.choose(rng).expect("nonempty");
    if matches!(pick, Ctor::Prefix | Ctor::Sum) && !rng.gen_bool(cfg.decay.powi(level).clamp(0.0, 1.0)) {
        pick = *leaves.choose(rng).expect("nonempty");
    }
    match pick {
        Ctor::End => Monitor::End,
        Ctor::Yes => Monitor::Yes,
        Ctor::No => Monitor::No,
        Ctor::Var => Monitor::Var(cfg.vars.choose(rng).expect("nonempty").clone()),
        Ctor::Prefix => {
            let a = cfg.actions.choose(rng).expect("nonempty").clone();
            Monitor::prefix(a, gen(rng, cfg, level + 1, depth_left - 1))
        }
        Ctor::Sum => Monitor::sum(gen(rng, cfg, level + 1, depth_left), gen(rng, cfg, level + 1, depth_left)),
    }
}

/// A term related to `m` by a few semantics-preserving rewrites: summand
/// shuffles, `+ end`, `a.end` insertion, splitting `a.(p + q)` and
/// duplicating summands. Verdict equivalence is preserved in every mode.
pub fn sound_variant<R: Rng + ?Sized>(rng: &mut R, m: &Monitor, actions: &[Action]) -> Monitor {
    let mut out = m.clone();
    for _ in 0..rng.gen_range(1..4) {
        out = rewrite_once(rng, &out, actions);
    }
    out
}

fn rewrite_once<R: Rng + ?Sized>(rng: &mut R, m: &Monitor, actions: &[Action]) -> Monitor {
    let recurse = rng.gen_bool(0.5);
    match m {
        Monitor::Prefix(a, body) if recurse => Monitor::prefix(a.clone(), rewrite_once(rng, body, actions)),
        Monitor::Sum(l, r) if recurse => {
            if rng.gen_bool(0.5) {
                Monitor::sum(rewrite_once(rng, l, actions), (**r).clone())
            } else {
                Monitor::sum((**l).clone(), rewrite_once(rng, r, actions))
            }
        }
        _ => match rng.gen_range(0..5) {
            0 => Monitor::sum(m.clone(), Monitor::End),
            1 => match actions.choose(rng) {
                Some(a) => Monitor::sum(Monitor::prefix(a.clone(), Monitor::End), m.clone()),
                None => m.clone(),
            },
            2 => match m {
                Monitor::Prefix(a, body) => match &**body {
                    Monitor::Sum(p, q) => Monitor::sum(
                        Monitor::prefix(a.clone(), (**p).clone()),
                        Monitor::prefix(a.clone(), (**q).clone()),
                    ),
                    _ => m.clone(),
                },
                Monitor::Sum(l, r) => Monitor::sum((**r).clone(), (**l).clone()),
                _ => m.clone(),
            },
            3 => Monitor::sum(m.clone(), m.clone()),
            _ => match m {
                Monitor::Sum(l, r) => match &**r {
                    Monitor::Sum(p, q) => Monitor::sum(Monitor::sum((**l).clone(), (**p).clone()), (**q).clone()),
                    _ => Monitor::sum((**r).clone(), (**l).clone()),
                },
                _ => m.clone(),
            },
        },
    }
}
