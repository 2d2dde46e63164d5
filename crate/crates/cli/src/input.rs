//! Reading terms and equations from arguments or `@file` references.

use std::collections::BTreeSet;
use std::fs;

use anyhow::{Context, Result};
use monalg::syntax::{
    parse_alphabet, parse_equation_with_vars, parse_monitor_with_vars, parse_var_list, split_headers, Headers,
};
use monalg::term::{Alphabet, Equation, Monitor, VarName};

/// Variables assumed with an infinite alphabet when none are declared.
const DEFAULT_VARS: [&str; 3] = ["x", "y", "z"];

/// Inline text, or the contents of the file named after `@`.
pub fn load(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("cannot read {path}")),
        None => Ok(arg.to_string()),
    }
}

/// Alphabet and variable declarations shared by the inputs of a command.
pub struct Vocabulary {
    pub alphabet: Alphabet,
    pub vars: BTreeSet<VarName>,
}

impl Vocabulary {
    /// Flags win over file headers; an infinite alphabet with no declared
    /// variables gets `x, y, z`.
    pub fn resolve(alphabet: Option<&str>, vars: Option<&str>, headers: &[&Headers]) -> Result<Vocabulary> {
        let alphabet = match alphabet {
            Some(a) => parse_alphabet(a).context("bad --alphabet")?,
            None => headers.iter().find_map(|h| h.alphabet.clone()).unwrap_or(Alphabet::OpenEnded),
        };
        let mut declared: BTreeSet<VarName> = match vars {
            Some(v) => parse_var_list(v).context("bad --vars")?,
            None => headers.iter().flat_map(|h| h.vars.iter().cloned()).collect(),
        };
        if declared.is_empty() && !alphabet.is_finite() {
            declared = DEFAULT_VARS.iter().map(|v| VarName::new(v)).collect();
        }
        Ok(Vocabulary { alphabet, vars: declared })
    }
}

/// Loaded argument text with its header lines split off.
pub struct Source {
    pub body: String,
    pub headers: Headers,
}

pub fn source(arg: &str) -> Result<Source> {
    let text = load(arg)?;
    let (body, headers) = split_headers(&text).with_context(|| format!("in {arg}"))?;
    Ok(Source { body, headers })
}

pub fn monitor(src: &Source, vocab: &Vocabulary) -> Result<Monitor> {
    parse_monitor_with_vars(&src.body, &vocab.alphabet, &vocab.vars).context("cannot parse term")
}

pub fn equation(src: &Source, vocab: &Vocabulary) -> Result<Equation> {
    parse_equation_with_vars(&src.body, &vocab.alphabet, &vocab.vars).context("cannot parse equation")
}
