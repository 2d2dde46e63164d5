//! Concrete syntax for monitors, equations, alphabets and substitutions.
//!
//! ```text
//! sum    ::= prefix ('+' prefix)*          left-associated
//! prefix ::= ACTION '.' prefix | atom      right-associated
//! atom   ::= 'yes' | 'no' | 'end' | VAR | '(' sum ')'
//! ```
//!
//! Whether an identifier is an action or a variable depends on the alphabet.
//! With a finite alphabet its members are actions and every other identifier
//! is a variable. With an open-ended alphabet the declared variables are
//! variables and every other identifier is an action. `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::{is_reserved, Action, Alphabet, Equation, Monitor, Substitution, VarName};

/// Location of a token in the input. `start`/`end` are byte offsets;
/// `line` and `column` are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedToken,
    ReservedWordAsAction,
    UnbalancedParen,
    EmptyInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::UnexpectedToken => "unexpected token",
            ParseErrorKind::ReservedWordAsAction => "reserved word used as action",
            ParseErrorKind::UnbalancedParen => "unbalanced parenthesis",
            ParseErrorKind::EmptyInput => "empty input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{kind} at {}:{}: {message}", span.line, span.column)]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    fn new(span: SourceSpan, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        ParseError { span, kind, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Dot,
    Plus,
    LParen,
    RParen,
    Equals,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Whether `s` is a well-formed identifier (reserved words included).
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

fn lex(text: &str, base: SourceSpan) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = base.line;
    let mut col = base.column;
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    let span_at = |start: usize, end: usize, line: usize, col: usize| SourceSpan {
        line,
        column: col,
        start: base.start + start,
        end: base.start + end,
    };
    while i < bytes.len() {
        let (off, c) = bytes[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '.' => Some(Tok::Dot),
            '+' => Some(Tok::Plus),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, span: span_at(off, off + 1, line, col) });
            col += 1;
            i += 1;
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < bytes.len() && is_ident_char(bytes[i].1) {
                i += 1;
            }
            let end_off = if i < bytes.len() { bytes[i].0 } else { text.len() };
            let name = &text[off..end_off];
            out.push(Token { tok: Tok::Ident(name.to_string()), span: span_at(off, end_off, line, col) });
            col += i - start;
            continue;
        }
        return Err(ParseError::new(
            span_at(off, off + c.len_utf8(), line, col),
            ParseErrorKind::UnexpectedToken,
            format!("unexpected character `{c}`"),
        ));
    }
    out.push(Token { tok: Tok::Eof, span: span_at(text.len(), text.len(), line, col) });
    Ok(out)
}

/// Decides whether an identifier denotes an action or a variable.
#[derive(Clone, Copy, Debug)]
pub struct Vocab<'a> {
    pub alphabet: &'a Alphabet,
    pub vars: &'a BTreeSet<VarName>,
}

impl Vocab<'_> {
    fn is_action(&self, name: &str) -> bool {
        match self.alphabet {
            Alphabet::Finite(_) => self.alphabet.contains(&Action::new(name)),
            Alphabet::OpenEnded => !self.vars.contains(&VarName::new(name)),
        }
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    vocab: Vocab<'a>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek2(&self) -> &Token {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn sum(&mut self) -> Result<Monitor, ParseError> {
        let mut acc = self.prefix()?;
        while self.peek().tok == Tok::Plus {
            self.bump();
            let next = self.prefix()?;
            acc = Monitor::sum(acc, next);
        }
        Ok(acc)
    }

    fn prefix(&mut self) -> Result<Monitor, ParseError> {
        if let Tok::Ident(name) = &self.peek().tok {
            if self.peek2().tok == Tok::Dot {
                let name = name.clone();
                let span = self.peek().span;
                if is_reserved(&name) {
                    return Err(ParseError::new(
                        span,
                        ParseErrorKind::ReservedWordAsAction,
                        format!("`{name}` is reserved and cannot prefix a term"),
                    ));
                }
                if !self.vocab.is_action(&name) {
                    return Err(ParseError::new(
                        span,
                        ParseErrorKind::UnexpectedToken,
                        format!("`{name}` is a variable and cannot prefix a term"),
                    ));
                }
                self.bump();
                self.bump();
                let body = self.prefix()?;
                return Ok(Monitor::prefix(Action::new(&name), body));
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Monitor, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Ident(name) => match name.as_str() {
                "yes" => Ok(Monitor::Yes),
                "no" => Ok(Monitor::No),
                "end" => Ok(Monitor::End),
                _ if self.vocab.is_action(&name) => Err(ParseError::new(
                    t.span,
                    ParseErrorKind::UnexpectedToken,
                    format!("action `{name}` must be followed by `.`"),
                )),
                _ => Ok(Monitor::Var(VarName::new(&name))),
            },
            Tok::LParen => {
                let inner = self.sum()?;
                if self.peek().tok != Tok::RParen {
                    let here = self.peek().clone();
                    if here.tok == Tok::Eof {
                        return Err(ParseError::new(t.span, ParseErrorKind::UnbalancedParen, "`(` is never closed"));
                    }
                    return Err(unexpected(&here));
                }
                self.bump();
                Ok(inner)
            }
            Tok::RParen => Err(ParseError::new(t.span, ParseErrorKind::UnbalancedParen, "unmatched `)`")),
            _ => Err(unexpected(&t)),
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Eof => Ok(()),
            Tok::RParen => Err(ParseError::new(t.span, ParseErrorKind::UnbalancedParen, "unmatched `)`")),
            _ => Err(unexpected(&t)),
        }
    }
}

fn unexpected(t: &Token) -> ParseError {
    let what = match &t.tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Dot => "`.`".into(),
        Tok::Plus => "`+`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Equals => "`=`".into(),
        Tok::Eof => "end of input".into(),
    };
    ParseError::new(t.span, ParseErrorKind::UnexpectedToken, format!("unexpected {what}"))
}

const START: SourceSpan = SourceSpan { line: 1, column: 1, start: 0, end: 0 };

fn parser_for<'a>(text: &str, base: SourceSpan, vocab: Vocab<'a>) -> Result<Parser<'a>, ParseError> {
    let toks = lex(text, base)?;
    if toks.len() == 1 {
        let sp = toks[0].span;
        return Err(ParseError::new(sp, ParseErrorKind::EmptyInput, "no term found"));
    }
    Ok(Parser { toks, pos: 0, vocab })
}

fn parse_term_at(text: &str, base: SourceSpan, vocab: Vocab<'_>) -> Result<Monitor, ParseError> {
    let mut p = parser_for(text, base, vocab)?;
    let m = p.sum()?;
    p.expect_eof()?;
    Ok(m)
}

/// Parses a monitor. With an open-ended alphabet, variables are declared by
/// `vars: x, y` lines inside `text`.
pub fn parse_monitor(text: &str, alphabet: &Alphabet) -> Result<Monitor, ParseError> {
    let (body, headers) = split_headers(text)?;
    parse_monitor_with_vars(&body, alphabet, &headers.vars)
}

/// Parses a monitor with an explicit set of declared variables.
pub fn parse_monitor_with_vars(
    text: &str,
    alphabet: &Alphabet,
    vars: &BTreeSet<VarName>,
) -> Result<Monitor, ParseError> {
    parse_term_at(text, START, Vocab { alphabet, vars })
}

/// Parses `lhs = rhs`.
pub fn parse_equation(text: &str, alphabet: &Alphabet) -> Result<Equation, ParseError> {
    let (body, headers) = split_headers(text)?;
    parse_equation_with_vars(&body, alphabet, &headers.vars)
}

pub fn parse_equation_with_vars(
    text: &str,
    alphabet: &Alphabet,
    vars: &BTreeSet<VarName>,
) -> Result<Equation, ParseError> {
    parse_equation_at(text, START, Vocab { alphabet, vars })
}

fn parse_equation_at(text: &str, base: SourceSpan, vocab: Vocab<'_>) -> Result<Equation, ParseError> {
    let mut p = parser_for(text, base, vocab)?;
    let lhs = p.sum()?;
    let t = p.bump();
    if t.tok != Tok::Equals {
        return Err(unexpected(&t));
    }
    let rhs = p.sum()?;
    p.expect_eof()?;
    Ok(Equation::new(lhs, rhs))
}

/// Parses `infinite` or a comma-separated list of actions.
pub fn parse_alphabet(text: &str) -> Result<Alphabet, ParseError> {
    let trimmed = text.trim();
    let lead = text.len() - text.trim_start().len();
    if trimmed.is_empty() {
        return Err(ParseError::new(START, ParseErrorKind::EmptyInput, "empty alphabet"));
    }
    if trimmed == "infinite" {
        return Ok(Alphabet::OpenEnded);
    }
    let mut seen = BTreeSet::new();
    let mut offset = lead;
    for part in trimmed.split(',') {
        let name = part.trim();
        let start = offset + (part.len() - part.trim_start().len());
        let span = SourceSpan { line: 1, column: start + 1, start, end: start + name.len() };
        offset += part.len() + 1;
        if name.is_empty() {
            return Err(ParseError::new(span, ParseErrorKind::UnexpectedToken, "empty action name"));
        }
        if !is_identifier(name) {
            return Err(ParseError::new(
                span,
                ParseErrorKind::UnexpectedToken,
                format!("`{name}` is not an identifier"),
            ));
        }
        if is_reserved(name) {
            return Err(ParseError::new(span, ParseErrorKind::ReservedWordAsAction, format!("`{name}` is reserved")));
        }
        if !seen.insert(Action::new(name)) {
            return Err(ParseError::new(span, ParseErrorKind::UnexpectedToken, format!("duplicate action `{name}`")));
        }
    }
    Ok(Alphabet::finite(seen))
}

/// Parses a comma-separated variable list such as `x, y`.
pub fn parse_var_list(text: &str) -> Result<BTreeSet<VarName>, ParseError> {
    let mut out = BTreeSet::new();
    for part in text.split(',') {
        let name = part.trim();
        if name.is_empty() {
            continue;
        }
        if !is_identifier(name) || is_reserved(name) {
            return Err(ParseError::new(
                START,
                ParseErrorKind::UnexpectedToken,
                format!("`{name}` is not a variable name"),
            ));
        }
        out.insert(VarName::new(name));
    }
    Ok(out)
}

/// Header lines recognised in every file format.
#[derive(Clone, Debug, Default)]
pub struct Headers {
    pub alphabet: Option<Alphabet>,
    pub vars: BTreeSet<VarName>,
    /// Other `key: value` lines, in order.
    pub extra: Vec<(String, String)>,
}

/// Separates `key: value` header lines from the rest of the text. Header
/// lines are blanked out so that spans in the body stay valid.
pub fn split_headers(text: &str) -> Result<(String, Headers), ParseError> {
    let mut headers = Headers::default();
    let mut body = String::with_capacity(text.len());
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        let header = trimmed
            .split_once(':')
            .filter(|(k, v)| is_identifier(k.trim()) && !v.starts_with('=') && !k.trim().starts_with("step"));
        match header {
            Some((key, value)) if !trimmed.contains(":=") => {
                let key = key.trim();
                let value = value.trim();
                match key {
                    "alphabet" => {
                        let a = parse_alphabet(value).map_err(|mut e| {
                            e.span.line = lineno + 1;
                            e
                        })?;
                        headers.alphabet = Some(a);
                    }
                    "vars" => headers.vars.extend(parse_var_list(value)?),
                    _ => headers.extra.push((key.to_string(), value.to_string())),
                }
                body.extend(line.chars().map(|c| if c == '\n' { '\n' } else { ' ' }));
            }
            _ => body.push_str(line),
        }
    }
    Ok((body, headers))
}

/// A monitor file: either one term, or `name := term` lines.
#[derive(Clone, Debug)]
pub struct MonitorFile {
    pub headers: Headers,
    pub entries: Vec<(Option<String>, Monitor)>,
}

/// Parses a monitor file. A header `alphabet:` overrides `alphabet`.
pub fn parse_monitor_file(text: &str, alphabet: &Alphabet) -> Result<MonitorFile, ParseError> {
    let (body, headers) = split_headers(text)?;
    let alpha = headers.alphabet.clone().unwrap_or_else(|| alphabet.clone());
    let vocab = Vocab { alphabet: &alpha, vars: &headers.vars };
    let named = body.lines().any(|l| l.split('#').next().unwrap_or("").contains(":="));
    let mut entries = Vec::new();
    if named {
        let mut start = 0;
        for (lineno, line) in body.split_inclusive('\n').enumerate() {
            let content = line.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                start += line.len();
                continue;
            }
            let base = SourceSpan { line: lineno + 1, column: 1, start, end: start };
            let Some((name, term)) = content.split_once(":=") else {
                return Err(ParseError::new(base, ParseErrorKind::UnexpectedToken, "expected `name := term`"));
            };
            let name = name.trim();
            if !is_identifier(name) {
                return Err(ParseError::new(base, ParseErrorKind::UnexpectedToken, format!("bad entry name `{name}`")));
            }
            let off = content.find(":=").unwrap_or(0) + 2;
            let tbase = SourceSpan { line: lineno + 1, column: off + 1, start: start + off, end: start + off };
            entries.push((Some(name.to_string()), parse_term_at(term, tbase, vocab)?));
            start += line.len();
        }
    } else {
        entries.push((None, parse_term_at(&body, START, vocab)?));
    }
    Ok(MonitorFile { headers, entries })
}

/// Parses one equation per nonblank line.
pub fn parse_equation_file(text: &str, alphabet: &Alphabet) -> Result<(Headers, Vec<Equation>), ParseError> {
    let (body, headers) = split_headers(text)?;
    let alpha = headers.alphabet.clone().unwrap_or_else(|| alphabet.clone());
    let vocab = Vocab { alphabet: &alpha, vars: &headers.vars };
    let mut out = Vec::new();
    let mut start = 0;
    for (lineno, line) in body.split_inclusive('\n').enumerate() {
        let content = line.split('#').next().unwrap_or("");
        if !content.trim().is_empty() {
            let base = SourceSpan { line: lineno + 1, column: 1, start, end: start };
            out.push(parse_equation_at(content, base, vocab)?);
        }
        start += line.len();
    }
    Ok((headers, out))
}

/// Parses `x -> term` lines (or comma-separated entries on one line).
pub fn parse_substitution(
    text: &str,
    alphabet: &Alphabet,
    vars: &BTreeSet<VarName>,
) -> Result<Substitution, ParseError> {
    let vocab = Vocab { alphabet, vars };
    let mut sigma = Substitution::identity();
    let mut start = 0;
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let mut col = 0;
        for entry in content.split(',') {
            let here = SourceSpan { line: lineno + 1, column: col + 1, start: start + col, end: start + col };
            col += entry.len() + 1;
            if entry.trim().is_empty() || entry.trim() == "-" {
                continue;
            }
            let Some((x, term)) = entry.split_once("->") else {
                return Err(ParseError::new(here, ParseErrorKind::UnexpectedToken, "expected `x -> term`"));
            };
            let x = x.trim();
            if !is_identifier(x) || is_reserved(x) {
                return Err(ParseError::new(here, ParseErrorKind::UnexpectedToken, format!("bad variable `{x}`")));
            }
            let off = entry.find("->").unwrap_or(0) + 2;
            let tbase = SourceSpan {
                line: here.line,
                column: here.column + off,
                start: here.start + off,
                end: here.start + off,
            };
            sigma.insert(VarName::new(x), parse_term_at(term, tbase, vocab)?);
        }
        start += line.len();
    }
    Ok(sigma)
}

/// Renders a term with the fewest parentheses that still parse back to the
/// same tree.
pub fn print_monitor(m: &Monitor) -> String {
    let mut out = String::new();
    print_into(m, &mut out);
    out
}

fn print_into(m: &Monitor, out: &mut String) {
    match m {
        Monitor::End => out.push_str("end"),
        Monitor::Yes => out.push_str("yes"),
        Monitor::No => out.push_str("no"),
        Monitor::Var(x) => out.push_str(x.as_str()),
        Monitor::Prefix(a, body) => {
            out.push_str(a.as_str());
            out.push('.');
            print_grouped(body, out);
        }
        Monitor::Sum(l, r) => {
            print_into(l, out);
            out.push_str(" + ");
            print_grouped(r, out);
        }
    }
}

fn print_grouped(m: &Monitor, out: &mut String) {
    if matches!(m, Monitor::Sum(..)) {
        out.push('(');
        print_into(m, out);
        out.push(')');
    } else {
        print_into(m, out);
    }
}

/// Renders a trace as space-separated actions, `<eps>` when empty.
pub fn print_trace(t: &[Action]) -> String {
    if t.is_empty() {
        return "<eps>".to_string();
    }
    t.iter().map(Action::as_str).collect::<Vec<_>>().join(" ")
}

/// Parses the output of [`print_trace`].
pub fn parse_trace(text: &str) -> Result<Vec<Action>, ParseError> {
    let text = text.trim();
    if text == "<eps>" || text.is_empty() {
        return Ok(Vec::new());
    }
    text.split_whitespace()
        .map(|w| {
            if is_identifier(w) && !is_reserved(w) {
                Ok(Action::new(w))
            } else {
                Err(ParseError::new(START, ParseErrorKind::UnexpectedToken, format!("bad action `{w}`")))
            }
        })
        .collect()
}
