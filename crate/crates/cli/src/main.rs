//! `monalg`: command-line front end.
//!
//! Exit codes: 0 for success, equivalence or a valid proof; 1 for a
//! negative answer; 2 for usage, input or parse errors.

mod fuzz;
mod input;

use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use monalg::axioms::{list_system, soundness_fuzz, witness_family, SchemaBounds, SystemName};
use monalg::equivalence::{closed_equiv, equiv_open, oracle_equiv_open, Counterexample, EquivMode, Outcome};
use monalg::normalize::{normalize, prove_equation, FormKind, ProofAttempt};
use monalg::prooflog::{check_derivation, parse_derivation};
use monalg::semantics::{accepts, lang_of, rejects};
use monalg::syntax::print_trace;
use monalg::term::{Action, Equation, Monitor};

use input::{Source, Vocabulary};

#[derive(Parser)]
#[command(name = "monalg", version, about = "Algebra of recursion-free regular monitors")]
struct Cli {
    /// Print a JSON result envelope instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct VocabArgs {
    /// `a,b,...` or `infinite`. Defaults to the input's `alphabet:` header,
    /// then to `infinite`.
    #[arg(long)]
    alphabet: Option<String>,
    /// Variables, needed to tell them from actions with an infinite alphabet.
    #[arg(long)]
    vars: Option<String>,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Verdict,
    Omega,
}

impl From<ModeArg> for EquivMode {
    fn from(m: ModeArg) -> EquivMode {
        match m {
            ModeArg::Verdict => EquivMode::Verdict,
            ModeArg::Omega => EquivMode::OmegaVerdict,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print it back.
    Parse {
        term: String,
        #[command(flatten)]
        vocab: VocabArgs,
    },
    /// Minimal accepted and rejected traces of a closed term.
    Lang {
        term: String,
        #[command(flatten)]
        vocab: VocabArgs,
    },
    /// Decide verdict or ω-verdict equivalence.
    Equiv {
        lhs: String,
        rhs: String,
        #[command(flatten)]
        vocab: VocabArgs,
        #[arg(long, value_enum, default_value = "verdict")]
        mode: ModeArg,
        /// Decide with the substitution oracle instead of canonical forms.
        #[arg(long)]
        oracle: bool,
        /// Probe depth for the oracle.
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Rewrite a term into a canonical form.
    Normalize {
        term: String,
        #[command(flatten)]
        vocab: VocabArgs,
        #[arg(long)]
        form: String,
        /// Write the derivation of `term = form` to this file.
        #[arg(long)]
        emit_proof: Option<String>,
    },
    /// List the instances of an axiom system, optionally fuzzing each.
    Axioms {
        #[arg(long)]
        system: String,
        #[command(flatten)]
        vocab: VocabArgs,
        #[arg(long, default_value_t = 2)]
        max_s: usize,
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        /// Check each instance under this many closed substitutions.
        #[arg(long)]
        fuzz: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Derive `term = form`, or `lhs = rhs` through a shared form.
    Prove {
        term: String,
        other: Option<String>,
        #[command(flatten)]
        vocab: VocabArgs,
        #[arg(long)]
        form: String,
        /// Write the derivation here instead of standard output.
        #[arg(long)]
        out: Option<String>,
    },
    /// Check a derivation file.
    CheckProof {
        file: String,
        /// Equation the derivation must conclude; defaults to its last step.
        #[arg(long)]
        claim: Option<String>,
    },
    /// Compare canonical forms with the semantic procedures on random pairs.
    Fuzz {
        #[command(flatten)]
        vocab: VocabArgs,
        #[arg(long, value_enum, default_value = "verdict")]
        mode: ModeArg,
        #[arg(long, default_value_t = 500)]
        pairs: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Number of variables drawn from `x, y`.
        #[arg(long = "var-count", default_value_t = 0)]
        var_count: usize,
        #[arg(long, default_value_t = 5)]
        min_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The witness equation for index `n`.
    Witness {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        vocab: VocabArgs,
        /// Check soundness under this many closed substitutions.
        #[arg(long)]
        fuzz: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// What a command produced: text for the terminal, a JSON payload and an
/// exit status.
struct Report {
    text: String,
    inputs: Value,
    result: Value,
    counterexample: Option<Value>,
    ok: bool,
}

impl Report {
    fn ok(text: String, inputs: Value, result: Value) -> Report {
        Report { text, inputs, result, counterexample: None, ok: true }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let start = Instant::now();
    match run(cli.command) {
        Ok(report) => {
            if cli.json {
                let envelope = json!({
                    "command": name,
                    "inputs": report.inputs,
                    "result": report.result,
                    "counterexample": report.counterexample,
                    "timing": { "elapsed_ms": start.elapsed().as_secs_f64() * 1000.0 },
                });
                println!("{}", serde_json::to_string_pretty(&envelope).expect("JSON values serialize"));
            } else {
                print!("{}", report.text);
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Parse { .. } => "parse",
        Command::Lang { .. } => "lang",
        Command::Equiv { .. } => "equiv",
        Command::Normalize { .. } => "normalize",
        Command::Axioms { .. } => "axioms",
        Command::Prove { .. } => "prove",
        Command::CheckProof { .. } => "check-proof",
        Command::Fuzz { .. } => "fuzz",
        Command::Witness { .. } => "witness",
    }
}

fn vocabulary(args: &VocabArgs, sources: &[&Source]) -> Result<Vocabulary> {
    let headers: Vec<_> = sources.iter().map(|s| &s.headers).collect();
    Vocabulary::resolve(args.alphabet.as_deref(), args.vars.as_deref(), &headers)
}

fn parse_form(s: &str) -> Result<FormKind> {
    s.parse::<FormKind>().map_err(anyhow::Error::from)
}

fn cex_json(c: &Counterexample) -> Value {
    json!({
        "substitution": c.substitution.to_string(),
        "trace": print_trace(&c.trace),
        "side": c.side.to_string(),
    })
}

fn run(command: Command) -> Result<Report> {
    match command {
        Command::Parse { term, vocab } => {
            let src = input::source(&term)?;
            let v = vocabulary(&vocab, &[&src])?;
            let m = input::monitor(&src, &v)?;
            let vars: Vec<String> = m.vars().iter().map(|x| x.to_string()).collect();
            let result = json!({
                "term": m.to_string(),
                "depth": m.depth(),
                "size": m.size(),
                "closed": m.is_closed(),
                "vars": vars,
            });
            Ok(Report::ok(format!("{m}\n"), json!({ "term": term, "alphabet": v.alphabet.to_string() }), result))
        }
        Command::Lang { term, vocab } => {
            let src = input::source(&term)?;
            let v = vocabulary(&vocab, &[&src])?;
            let m = input::monitor(&src, &v)?;
            if !m.is_closed() {
                bail!("lang needs a closed term, {m} has variables");
            }
            let lang = lang_of(&m);
            let render = |ts: &[Vec<Action>]| ts.iter().map(|t| print_trace(t)).collect::<Vec<_>>();
            let result = json!({ "accept": render(&lang.accept_min), "reject": render(&lang.reject_min) });
            Ok(Report::ok(lang.to_string(), json!({ "term": m.to_string() }), result))
        }
        Command::Equiv { lhs, rhs, vocab, mode, oracle, bound } => {
            let (ls, rs) = (input::source(&lhs)?, input::source(&rhs)?);
            let v = vocabulary(&vocab, &[&ls, &rs])?;
            let (m, n) = (input::monitor(&ls, &v)?, input::monitor(&rs, &v)?);
            let mode = EquivMode::from(mode);
            let outcome = if oracle {
                let acts = v.alphabet.actions().context("--oracle needs a finite alphabet")?;
                let d = bound.unwrap_or_else(|| monalg::equivalence::default_bound(&m, &n));
                oracle_equiv_open(&m, &n, acts, mode, d)
            } else if m.is_closed() && n.is_closed() {
                match closed_equiv(&m, &n, &v.alphabet, mode) {
                    None => Outcome::Equivalent,
                    Some(c) => Outcome::Inequivalent(Some(c)),
                }
            } else {
                equiv_open(&m, &n, &v.alphabet, mode)?
            };
            let mut text = String::new();
            let equivalent = outcome.is_equivalent();
            let _ = writeln!(text, "{}", if equivalent { "equivalent" } else { "inequivalent" });
            if let Some(c) = outcome.counterexample() {
                let _ = writeln!(text, "{c}");
            }
            let inputs = json!({
                "lhs": m.to_string(), "rhs": n.to_string(),
                "mode": mode.to_string(), "alphabet": v.alphabet.to_string(), "oracle": oracle,
            });
            Ok(Report {
                text,
                inputs,
                result: json!({ "equivalent": equivalent }),
                counterexample: outcome.counterexample().map(cex_json),
                ok: equivalent,
            })
        }
        Command::Normalize { term, vocab, form, emit_proof } => {
            let form = parse_form(&form)?;
            let src = input::source(&term)?;
            let v = vocabulary(&vocab, &[&src])?;
            let m = input::monitor(&src, &v)?;
            let out = normalize(form, &m, &v.alphabet, emit_proof.is_some())?;
            let mut steps = Value::Null;
            if let Some(path) = &emit_proof {
                match &out.derivation {
                    Some(d) => {
                        fs::write(path, d.to_text()).with_context(|| format!("cannot write {path}"))?;
                        steps = json!(d.len());
                    }
                    None => eprintln!("note: no derivation available for this input; {path} not written"),
                }
            }
            let inputs = json!({ "term": m.to_string(), "form": form.name(), "alphabet": v.alphabet.to_string() });
            let result = json!({ "term": out.term.to_string(), "proof_steps": steps });
            Ok(Report::ok(format!("{}\n", out.term), inputs, result))
        }
        Command::Axioms { system, vocab, max_s, max_k, fuzz, seed } => {
            let sys: SystemName = system.parse()?;
            let v = vocabulary(&vocab, &[])?;
            let bounds = SchemaBounds { max_trace_len: max_s, max_k };
            let instances = list_system(sys, &v.alphabet, Some(bounds))?;
            let mut text = String::new();
            let _ = writeln!(text, "alphabet: {}", v.alphabet);
            let mut listed = Vec::new();
            let mut all_pass = true;
            for inst in &instances {
                let mut line = format!("{}  # {} {}", inst.equation, inst.schema.name(), inst.bindings);
                let mut entry = json!({
                    "schema": inst.schema.name(),
                    "bindings": inst.bindings.to_string(),
                    "equation": inst.equation.to_string(),
                });
                if let Some(trials) = fuzz {
                    let rep = soundness_fuzz(inst, &v.alphabet, sys.mode(), trials, seed);
                    all_pass &= rep.passed();
                    let verdict = if rep.passed() {
                        "PASS".to_string()
                    } else {
                        format!("FAIL ({} of {})", rep.failures.len(), rep.trials)
                    };
                    let _ = write!(line, " {verdict}");
                    entry["sound"] = json!(rep.passed());
                    if let Some(f) = rep.failures.first() {
                        let _ = write!(line, "\n#   {}", f.counterexample.to_string().replace('\n', "; "));
                        entry["counterexample"] = cex_json(&f.counterexample);
                    }
                }
                let _ = writeln!(text, "{line}");
                listed.push(entry);
            }
            let inputs = json!({ "system": sys.name(), "alphabet": v.alphabet.to_string(), "max_s": max_s, "max_k": max_k, "fuzz": fuzz, "seed": seed });
            Ok(Report { text, inputs, result: json!({ "instances": listed }), counterexample: None, ok: all_pass })
        }
        Command::Prove { term, other, vocab, form, out } => {
            let form = parse_form(&form)?;
            let src = input::source(&term)?;
            let other_src = other.as_deref().map(input::source).transpose()?;
            let mut srcs = vec![&src];
            srcs.extend(other_src.as_ref());
            let v = vocabulary(&vocab, &srcs)?;
            let m = input::monitor(&src, &v)?;
            let (derivation, inputs) = match &other_src {
                None => {
                    let nf = normalize(form, &m, &v.alphabet, true)?;
                    (nf.derivation.context("no derivation available for this input")?, json!({ "term": m.to_string() }))
                }
                Some(os) => {
                    let n = input::monitor(os, &v)?;
                    let inputs = json!({ "lhs": m.to_string(), "rhs": n.to_string() });
                    match prove_equation(form, &Equation::new(m, n), &v.alphabet)? {
                        ProofAttempt::Proved(d) => (d, inputs),
                        ProofAttempt::Distinct { lhs, rhs } => {
                            let text = format!("not provable: canonical forms differ\n  {lhs}\n  {rhs}\n");
                            let result =
                                json!({ "proved": false, "lhs_form": lhs.to_string(), "rhs_form": rhs.to_string() });
                            return Ok(Report { text, inputs, result, counterexample: None, ok: false });
                        }
                        ProofAttempt::Unjustified => bail!("canonical forms agree but no derivation is available"),
                    }
                }
            };
            let text = derivation.to_text();
            let steps = derivation.len();
            let shown = match &out {
                Some(path) => {
                    fs::write(path, &text).with_context(|| format!("cannot write {path}"))?;
                    format!("wrote {steps} steps to {path}\n")
                }
                None => text,
            };
            let result = json!({ "proved": true, "system": form.system().name(), "steps": steps });
            Ok(Report::ok(shown, inputs, result))
        }
        Command::CheckProof { file, claim } => {
            let path = file.strip_prefix('@').unwrap_or(&file);
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?;
            let d = parse_derivation(&text).context("cannot parse derivation")?;
            let claimed = match &claim {
                Some(c) => {
                    let src = input::source(c)?;
                    let mut v = Vocabulary::resolve(Some(&d.alphabet.to_string()), None, &[&src.headers])?;
                    v.vars.extend(d.vars());
                    input::equation(&src, &v)?
                }
                None => d.conclusion().cloned().context("derivation has no steps")?,
            };
            let inputs = json!({ "file": file, "system": d.system.name(), "claim": claimed.to_string() });
            match check_derivation(d.system, &d, &claimed) {
                Ok(()) => {
                    let text = format!("valid: {} ({} steps, {})\n", claimed, d.len(), d.system);
                    Ok(Report::ok(text, inputs, json!({ "valid": true, "steps": d.len() })))
                }
                Err(e) => Ok(Report {
                    text: format!("invalid: {e}\n"),
                    inputs,
                    result: json!({ "valid": false, "step": e.step, "reason": e.to_string() }),
                    counterexample: None,
                    ok: false,
                }),
            }
        }
        Command::Fuzz { vocab, mode, pairs, depth, var_count, min_size, seed } => {
            let v = vocabulary(&vocab, &[])?;
            let cfg = fuzz::FuzzConfig {
                alphabet: v.alphabet,
                mode: mode.into(),
                pairs,
                depth,
                vars: var_count,
                min_size,
                seed,
            };
            let report = fuzz::run(&cfg);
            let found: Vec<Value> = report
                .disagreements
                .iter()
                .map(|d| json!({ "lhs": d.lhs.to_string(), "rhs": d.rhs.to_string(), "oracle_equivalent": d.semantic }))
                .collect();
            let inputs = json!({
                "alphabet": cfg.alphabet.to_string(), "mode": cfg.mode.to_string(), "pairs": pairs,
                "depth": depth, "vars": var_count, "min_size": min_size, "seed": seed,
            });
            let result =
                json!({ "form": report.form.name(), "equivalent_pairs": report.equivalent, "disagreements": found });
            let ok = report.disagreements.is_empty();
            Ok(Report { text: report.render(&cfg), inputs, result, counterexample: None, ok })
        }
        Command::Witness { n, vocab, fuzz, seed } => {
            let v = vocabulary(&vocab, &[])?;
            let acts = v.alphabet.actions().context("witness needs a finite alphabet")?;
            let a = acts[0].clone();
            let eq = witness_family(n, &a, &v.alphabet)?;
            let mut text = format!("{eq}\n");
            let mut ok = true;
            let probe: Vec<Action> = vec![a.clone(); 2 * n + 1];
            let ended =
                eq.apply(&monalg::term::Substitution::from_pairs(eq.vars().into_iter().map(|x| (x, Monitor::End))));
            let silent = [&ended.lhs, &ended.rhs].iter().all(|m| !accepts(m, &probe) && !rejects(m, &probe));
            let _ = writeln!(
                text,
                "x -> end: {} is {} by both sides",
                print_trace(&probe),
                if silent { "neither accepted nor rejected" } else { "decided" }
            );
            let mut result = json!({ "equation": eq.to_string(), "end_substitution_silent": silent });
            if let Some(trials) = fuzz {
                let inst = monalg::axioms::instantiate(
                    monalg::axioms::Schema::O2,
                    &monalg::axioms::Bindings::TraceK { s: vec![a; n], k: 3 },
                    &v.alphabet,
                )?;
                let rep = soundness_fuzz(&inst, &v.alphabet, EquivMode::Verdict, trials, seed);
                ok = rep.passed();
                let _ = writeln!(text, "soundness: {} ({} trials)", if ok { "PASS" } else { "FAIL" }, rep.trials);
                if let Some(f) = rep.failures.first() {
                    let _ = writeln!(text, "{}", f.counterexample);
                }
                result["sound"] = json!(ok);
            }
            let inputs = json!({ "n": n, "alphabet": v.alphabet.to_string(), "fuzz": fuzz, "seed": seed });
            Ok(Report { text, inputs, result, counterexample: None, ok })
        }
    }
}
