//! Process and morphism file formats plus the command-line surface.
//!
//! A `.omp` file declares one open process:
//!
//! ```text
//! process pump {
//!   states: a, b, c, d;
//!   edges:
//!     a -> c @ 1/2;
//!     b -> c @ 2;
//!   inputs: s1 -> a, s2 -> b;
//!   outputs: t1 -> d;
//! }
//! ```
//!
//! Rates are exact: integers, fractions p/q, or finite decimals (0.5 means
//! 1/2). Zero-rate edges are legal and mean the same as their absence;
//! self-loops are rejected since diagonal entries are never free. A `.map`
//! file declares a morphism as three label tables between named processes:
//!
//! ```text
//! morphism merge {
//!   source: fine;
//!   target: lumped;
//!   f: s1 -> s1;
//!   p: a -> a, b1 -> b, b2 -> b, c -> c;
//!   g: t1 -> t1;
//! }
//! ```
//!
//! Exit codes: 0 ok, 1 a check or validation failed, 2 usage or syntax
//! error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser as ClapParser, Subcommand};
use num::{BigInt, Signed, Zero};

use crate::blackbox::black_box;
use crate::coarse::{
    coarse_grain, is_lumpable, lumped_generator, random_section, uniform_section,
    validate_morphism, OpenMarkovMorphism, StochasticSection,
};
use crate::dynamics::{integrate_master, FlowSpec};
use crate::error::{Error, Result};
use crate::exactlin::{rat_str, RatMatrix, Rational};
use crate::finset::{FinMap, FinSet};
use crate::laws::all_suites;
use crate::markov::{compose_open, tensor_open, validate_infinitesimal_stochastic, MarkovProcess, OpenMarkov};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessDoc {
    pub name: String,
    pub states: Vec<String>,
    pub edges: Vec<(String, String, Rational)>,
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismDoc {
    pub name: String,
    pub source: String,
    pub target: String,
    pub f: Vec<(String, String)>,
    pub p: Vec<(String, String)>,
    pub g: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Arrow,
    At,
    Slash,
    Minus,
    LBrace,
    RBrace,
    Colon,
    Semi,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

// '#' and '.' appear in machine-generated state labels, so they stay legal
// inside identifiers
fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '#' | '.')
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let tok = match c {
            '{' => {
                bump(&mut chars);
                Tok::LBrace
            }
            '}' => {
                bump(&mut chars);
                Tok::RBrace
            }
            ':' => {
                bump(&mut chars);
                Tok::Colon
            }
            ';' => {
                bump(&mut chars);
                Tok::Semi
            }
            ',' => {
                bump(&mut chars);
                Tok::Comma
            }
            '@' => {
                bump(&mut chars);
                Tok::At
            }
            '/' => {
                bump(&mut chars);
                Tok::Slash
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                let mut seen_dot = false;
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() || (d == '.' && !seen_dot) {
                        seen_dot |= d == '.';
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                Tok::Number(s)
            }
            c if is_ident_start(c) => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if is_ident_continue(d) {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => {
                return Err(Error::Syntax {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push(Token { tok, line: tline, col: tcol });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser { tokens: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: &str) -> Result<T> {
        let t = self.peek();
        Err(Error::Syntax { line: t.line, col: t.col, msg: msg.to_string() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            self.fail(&format!("expected {what}"))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => self.fail(&format!("expected `{kw}`")),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw) && *self.peek2() == Tok::Colon
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => self.fail(&format!("expected {what}")),
        }
    }

    // id list with comma separators and a closing semicolon; empty is fine
    fn ident_list(&mut self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        while self.peek().tok != Tok::Semi {
            out.push(self.ident("a name")?);
            if self.peek().tok == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::Semi, "`;`")?;
        Ok(out)
    }

    // `a -> b` pairs with comma separators and a closing semicolon
    fn pair_list(&mut self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        while self.peek().tok != Tok::Semi {
            let from = self.ident("a name")?;
            self.expect(Tok::Arrow, "`->`")?;
            let to = self.ident("a name")?;
            out.push((from, to));
            if self.peek().tok == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::Semi, "`;`")?;
        Ok(out)
    }

    fn rational(&mut self) -> Result<Rational> {
        let negative = if self.peek().tok == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let first = match &self.peek().tok {
            Tok::Number(s) => s.clone(),
            _ => return self.fail("expected a rate"),
        };
        self.next();
        let value = if self.peek().tok == Tok::Slash {
            if first.contains('.') {
                return self.fail("decimal numerator in a fraction");
            }
            self.next();
            let den = match &self.peek().tok {
                Tok::Number(s) if !s.contains('.') => s.clone(),
                _ => return self.fail("expected an integer denominator"),
            };
            if den.chars().all(|c| c == '0') {
                return self.fail("zero denominator");
            }
            self.next();
            Rational::new(first.parse::<BigInt>().unwrap(), den.parse::<BigInt>().unwrap())
        } else {
            decimal_to_rational(&first)
        };
        Ok(if negative { -value } else { value })
    }

    fn eof(&mut self) -> Result<()> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            self.fail("expected end of file")
        }
    }
}

fn decimal_to_rational(s: &str) -> Rational {
    match s.split_once('.') {
        None => Rational::from_integer(s.parse::<BigInt>().unwrap()),
        Some((whole, frac)) => {
            let digits: BigInt = format!("{whole}{frac}").parse().unwrap();
            Rational::new(digits, BigInt::from(10).pow(frac.len() as u32))
        }
    }
}

/// Parses one rational literal: integer, p/q, or finite decimal, with an
/// optional leading minus. Used for section files.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let mut p = Parser::new(s)?;
    let r = p.rational()?;
    p.eof()?;
    Ok(r)
}

pub fn parse_process(text: &str) -> Result<ProcessDoc> {
    let mut p = Parser::new(text)?;
    p.expect_keyword("process")?;
    let name = p.ident("a process name")?;
    p.expect(Tok::LBrace, "`{`")?;
    p.expect_keyword("states")?;
    p.expect(Tok::Colon, "`:`")?;
    let states = p.ident_list()?;
    let mut edges = Vec::new();
    if p.at_keyword("edges") {
        p.next();
        p.next();
        // an edge starts `id ->`, the next section starts `id :`
        while matches!(&p.peek().tok, Tok::Ident(_)) && *p.peek2() == Tok::Arrow {
            let from = p.ident("a state")?;
            p.expect(Tok::Arrow, "`->`")?;
            let to = p.ident("a state")?;
            p.expect(Tok::At, "`@`")?;
            let rate = p.rational()?;
            p.expect(Tok::Semi, "`;`")?;
            edges.push((from, to, rate));
        }
    }
    let mut inputs = Vec::new();
    if p.at_keyword("inputs") {
        p.next();
        p.next();
        inputs = p.pair_list()?;
    }
    let mut outputs = Vec::new();
    if p.at_keyword("outputs") {
        p.next();
        p.next();
        outputs = p.pair_list()?;
    }
    p.expect(Tok::RBrace, "`}`")?;
    p.eof()?;
    Ok(ProcessDoc { name, states, edges, inputs, outputs })
}

pub fn parse_morphism(text: &str) -> Result<MorphismDoc> {
    let mut p = Parser::new(text)?;
    p.expect_keyword("morphism")?;
    let name = p.ident("a morphism name")?;
    p.expect(Tok::LBrace, "`{`")?;
    p.expect_keyword("source")?;
    p.expect(Tok::Colon, "`:`")?;
    let source = p.ident("a process name")?;
    p.expect(Tok::Semi, "`;`")?;
    p.expect_keyword("target")?;
    p.expect(Tok::Colon, "`:`")?;
    let target = p.ident("a process name")?;
    p.expect(Tok::Semi, "`;`")?;
    p.expect_keyword("f")?;
    p.expect(Tok::Colon, "`:`")?;
    let f = p.pair_list()?;
    p.expect_keyword("p")?;
    p.expect(Tok::Colon, "`:`")?;
    let pp = p.pair_list()?;
    p.expect_keyword("g")?;
    p.expect(Tok::Colon, "`:`")?;
    let g = p.pair_list()?;
    p.expect(Tok::RBrace, "`}`")?;
    p.eof()?;
    Ok(MorphismDoc { name, source, target, f, p: pp, g })
}

fn pair_line(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(a, b)| format!("{a} -> {b}")).collect::<Vec<_>>().join(", ")
}

/// Canonical form; parsing it back yields the same document.
pub fn print_process(doc: &ProcessDoc) -> String {
    let mut out = format!("process {} {{\n", doc.name);
    if doc.states.is_empty() {
        out.push_str("  states: ;\n");
    } else {
        out.push_str(&format!("  states: {};\n", doc.states.join(", ")));
    }
    if !doc.edges.is_empty() {
        out.push_str("  edges:\n");
        for (from, to, rate) in &doc.edges {
            out.push_str(&format!("    {from} -> {to} @ {};\n", rat_str(rate)));
        }
    }
    if !doc.inputs.is_empty() {
        out.push_str(&format!("  inputs: {};\n", pair_line(&doc.inputs)));
    }
    if !doc.outputs.is_empty() {
        out.push_str(&format!("  outputs: {};\n", pair_line(&doc.outputs)));
    }
    out.push_str("}\n");
    out
}

pub fn print_morphism(doc: &MorphismDoc) -> String {
    let table = |pairs: &[(String, String)]| {
        if pairs.is_empty() { String::from(";") } else { format!("{};", pair_line(pairs)) }
    };
    format!(
        "morphism {} {{\n  source: {};\n  target: {};\n  f: {}\n  p: {}\n  g: {}\n}}\n",
        doc.name,
        doc.source,
        doc.target,
        table(&doc.f),
        table(&doc.p),
        table(&doc.g)
    )
}

fn duplicate_of(labels: &[String]) -> Option<&String> {
    let mut seen = std::collections::HashSet::new();
    labels.iter().find(|l| !seen.insert(l.as_str()))
}

/// Checks every document invariant: declared states, no duplicates, rates
/// nonnegative, no self-loops, injective boundary assignments.
pub fn validate_process_doc(doc: &ProcessDoc) -> Result<()> {
    if let Some(d) = duplicate_of(&doc.states) {
        return Err(Error::Semantic(format!("duplicate state {d}")));
    }
    let declared: std::collections::HashSet<&str> =
        doc.states.iter().map(String::as_str).collect();
    for (from, to, rate) in &doc.edges {
        for s in [from, to] {
            if !declared.contains(s.as_str()) {
                return Err(Error::Semantic(format!("undeclared state {s}")));
            }
        }
        if from == to {
            return Err(Error::Semantic(format!(
                "self-loop on {from}: diagonal entries are forced, not free"
            )));
        }
        if rate.is_negative() {
            return Err(Error::Semantic(format!(
                "negative rate {} on {from} -> {to}",
                rat_str(rate)
            )));
        }
    }
    for (section, pairs) in [("input", &doc.inputs), ("output", &doc.outputs)] {
        let labels: Vec<String> = pairs.iter().map(|(l, _)| l.clone()).collect();
        if let Some(d) = duplicate_of(&labels) {
            return Err(Error::Semantic(format!("duplicate {section} label {d}")));
        }
        let mut hit = std::collections::HashSet::new();
        for (label, state) in pairs.iter() {
            if !declared.contains(state.as_str()) {
                return Err(Error::Semantic(format!("undeclared state {state}")));
            }
            if !hit.insert(state.as_str()) {
                return Err(Error::Semantic(format!(
                    "{section} map not injective: {label} reuses state {state}"
                )));
            }
        }
    }
    Ok(())
}

pub fn to_open_markov(doc: &ProcessDoc) -> Result<OpenMarkov> {
    validate_process_doc(doc)?;
    let states = FinSet::new(doc.states.clone());
    let n = states.len();
    let mut h = RatMatrix::zeros(n, n);
    for (from, to, rate) in &doc.edges {
        let j = states.index_of(from).unwrap();
        let i = states.index_of(to).unwrap();
        h.set(i, j, h.get(i, j) + rate);
    }
    for j in 0..n {
        let off: Rational = (0..n).filter(|&i| i != j).map(|i| h.get(i, j).clone()).sum();
        h.set(j, j, -off);
    }
    let boundary = |pairs: &[(String, String)]| {
        let dom = FinSet::new(pairs.iter().map(|(l, _)| l.clone()).collect());
        let table = pairs.iter().map(|(_, s)| states.index_of(s).unwrap()).collect();
        FinMap::from_indices(dom, states.clone(), table)
    };
    OpenMarkov::new(
        boundary(&doc.inputs),
        boundary(&doc.outputs),
        MarkovProcess::new(states.clone(), h)?,
    )
}

/// The canonical document for an open process: every nonzero off-diagonal
/// entry becomes an edge, column state first.
pub fn from_open_markov(name: &str, m: &OpenMarkov) -> ProcessDoc {
    let states: Vec<String> = m.states().labels().to_vec();
    let mut edges = Vec::new();
    for j in 0..states.len() {
        for i in 0..states.len() {
            if i != j && !m.h().get(i, j).is_zero() {
                edges.push((states[j].clone(), states[i].clone(), m.h().get(i, j).clone()));
            }
        }
    }
    let pairs = |map: &FinMap| {
        map.dom()
            .labels()
            .iter()
            .zip(map.table())
            .map(|(l, &s)| (l.clone(), states[s].clone()))
            .collect()
    };
    let inputs = pairs(m.i());
    let outputs = pairs(m.o());
    ProcessDoc { name: name.to_string(), states, edges, inputs, outputs }
}

/// Builds p with its codomain read off the table: target states appear in
/// first-use order. Used when no target process file is at hand.
pub fn p_map_inferred(doc: &MorphismDoc, source_states: &FinSet) -> Result<FinMap> {
    let mut cod_labels: Vec<String> = Vec::new();
    for (_, to) in &doc.p {
        if !cod_labels.contains(to) {
            cod_labels.push(to.clone());
        }
    }
    let cod = FinSet::new(cod_labels);
    let pairs: Vec<(&str, &str)> =
        doc.p.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    FinMap::from_pairs(source_states.clone(), cod, &pairs)
}

/// Materializes the three tables against concrete processes and assembles
/// the morphism; shape errors surface from the constructor.
pub fn to_morphism(
    doc: &MorphismDoc,
    source: &OpenMarkov,
    target: &OpenMarkov,
) -> Result<OpenMarkovMorphism> {
    let build = |pairs: &[(String, String)], dom: &FinSet, cod: &FinSet| {
        let pairs: Vec<(&str, &str)> =
            pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        FinMap::from_pairs(dom.clone(), cod.clone(), &pairs)
    };
    let f = build(&doc.f, source.inputs(), target.inputs())?;
    let p = build(&doc.p, source.states(), target.states())?;
    let g = build(&doc.g, source.outputs(), target.outputs())?;
    OpenMarkovMorphism::new(source.clone(), target.clone(), f, p, g)
}

/// The boundary relation as one line of JSON with sorted keys, so repeated
/// runs produce identical bytes. Basis rows come out in echelon order.
pub fn black_box_json(m: &OpenMarkov) -> String {
    let rel = black_box(m);
    let basis: Vec<Vec<String>> = (0..rel.graph().dim())
        .map(|i| rel.graph().basis().row(i).iter().map(rat_str).collect())
        .collect();
    serde_json::json!({
        "src_dim": rel.src_dim(),
        "tgt_dim": rel.tgt_dim(),
        "basis": basis,
    })
    .to_string()
}

fn matrix_str(m: &RatMatrix) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let cells: Vec<String> = (0..m.cols()).map(|j| rat_str(m.get(i, j))).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

#[derive(ClapParser)]
#[command(name = "omp", about = "Open continuous-time Markov processes", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a process file and report whether its generator is valid
    Validate { file: PathBuf },
    /// Glue two processes along outputs = inputs and print the composite
    Compose { a: PathBuf, b: PathBuf },
    /// Put two processes side by side and print the result
    Tensor { a: PathBuf, b: PathBuf },
    /// Coarse-grain a process along a morphism file's p table
    Coarsen {
        file: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// uniform | random:SEED | file:PATH
        #[arg(long, default_value = "uniform")]
        section: String,
    },
    /// Decide lumpability along p and print the lumped generator
    Lumpable {
        file: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Print the steady-state boundary relation as JSON
    Blackbox { file: PathBuf },
    /// Integrate the open master equation and print a CSV trajectory
    Simulate {
        file: PathBuf,
        /// comma-separated initial distribution; default uniform
        #[arg(long)]
        v0: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// comma-separated constant inflows, one per input; default zeros
        #[arg(long)]
        inflow: Option<String>,
        /// comma-separated constant outflows, one per output; default zeros
        #[arg(long)]
        outflow: Option<String>,
    },
    /// Check a morphism file against its source and target processes
    MorphismCheck {
        map: PathBuf,
        source: PathBuf,
        target: PathBuf,
    },
    /// Run randomized checks
    Check {
        #[command(subcommand)]
        what: CheckCmd,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Replay every law suite at a seed
    Laws {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        iters: usize,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Syntax { .. } => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn read_file(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure { code: 2, message: format!("cannot read {}: {e}", path.display()) })
}

fn load_process(path: &Path) -> std::result::Result<(ProcessDoc, OpenMarkov), Failure> {
    let doc = parse_process(&read_file(path)?)?;
    let m = to_open_markov(&doc)?;
    Ok((doc, m))
}

fn parse_floats(s: &str, what: &str) -> std::result::Result<Vec<f64>, Failure> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Failure { code: 2, message: format!("bad {what} entry {x:?}") })
        })
        .collect()
}

fn section_from_flag(
    flag: &str,
    p: &FinMap,
) -> std::result::Result<StochasticSection, Failure> {
    if flag == "uniform" {
        return Ok(uniform_section(p)?);
    }
    if let Some(seed) = flag.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| Failure { code: 2, message: format!("bad seed in --section {flag}") })?;
        return Ok(random_section(p, seed)?);
    }
    if let Some(path) = flag.strip_prefix("file:") {
        let text = read_file(Path::new(path))?;
        let mut rows = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Result<Vec<Rational>> =
                line.split_whitespace().map(parse_rational).collect();
            rows.push(row?);
        }
        if rows.is_empty() {
            return Err(Failure { code: 2, message: "empty section file".into() });
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Semantic("ragged section file".into()).into());
        }
        let s = RatMatrix::from_rows(rows);
        return Ok(StochasticSection::new(p.clone(), s)?);
    }
    Err(Failure { code: 2, message: format!("bad --section value {flag}") })
}

fn run_command(cmd: Cmd, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    match cmd {
        Cmd::Validate { file } => {
            let (_, m) = load_process(&file)?;
            let ok = validate_infinitesimal_stochastic(m.h())?;
            writeln!(out, "infinitesimal stochastic: {ok}").unwrap();
            Ok(if ok { 0 } else { 1 })
        }
        Cmd::Compose { a, b } => {
            let (da, ma) = load_process(&a)?;
            let (db, mb) = load_process(&b)?;
            let composite = compose_open(&ma, &mb)?;
            let doc = from_open_markov(&format!("{}_{}", da.name, db.name), &composite);
            write!(out, "{}", print_process(&doc)).unwrap();
            Ok(0)
        }
        Cmd::Tensor { a, b } => {
            let (da, ma) = load_process(&a)?;
            let (db, mb) = load_process(&b)?;
            let sum = tensor_open(&ma, &mb)?;
            let doc = from_open_markov(&format!("{}_x_{}", da.name, db.name), &sum);
            write!(out, "{}", print_process(&doc)).unwrap();
            Ok(0)
        }
        Cmd::Coarsen { file, map, section } => {
            let (doc, m) = load_process(&file)?;
            let mdoc = parse_morphism(&read_file(&map)?)?;
            if mdoc.source != doc.name {
                return Err(Error::Semantic(format!(
                    "map source {} does not name process {}",
                    mdoc.source, doc.name
                ))
                .into());
            }
            let p = p_map_inferred(&mdoc, m.states())?;
            let sec = section_from_flag(&section, &p)?;
            let coarse = coarse_grain(m.h(), &sec)?;
            writeln!(out, "{}", matrix_str(&coarse)).unwrap();
            Ok(0)
        }
        Cmd::Lumpable { file, map } => {
            let (doc, m) = load_process(&file)?;
            let mdoc = parse_morphism(&read_file(&map)?)?;
            if mdoc.source != doc.name {
                return Err(Error::Semantic(format!(
                    "map source {} does not name process {}",
                    mdoc.source, doc.name
                ))
                .into());
            }
            let p = p_map_inferred(&mdoc, m.states())?;
            if is_lumpable(m.h(), &p)? {
                writeln!(out, "{}", matrix_str(&lumped_generator(m.h(), &p)?)).unwrap();
                Ok(0)
            } else {
                writeln!(out, "not lumpable").unwrap();
                Ok(1)
            }
        }
        Cmd::Blackbox { file } => {
            let (_, m) = load_process(&file)?;
            writeln!(out, "{}", black_box_json(&m)).unwrap();
            Ok(0)
        }
        Cmd::Simulate { file, v0, t_end, dt, inflow, outflow } => {
            let (_, m) = load_process(&file)?;
            let n = m.states().len();
            let v0 = match v0 {
                Some(s) => parse_floats(&s, "--v0")?,
                None => vec![1.0 / n as f64; n],
            };
            let inflow = match inflow {
                Some(s) => parse_floats(&s, "--inflow")?,
                None => vec![0.0; m.inputs().len()],
            };
            let outflow = match outflow {
                Some(s) => parse_floats(&s, "--outflow")?,
                None => vec![0.0; m.outputs().len()],
            };
            let flows = FlowSpec::constant(inflow, outflow);
            let traj = integrate_master(&m, &flows, &v0, t_end, dt)?;
            writeln!(out, "t,{}", m.states().labels().join(",")).unwrap();
            for (t, state) in traj.times.iter().zip(&traj.states) {
                let cells: Vec<String> = state.iter().map(|x| format!("{x}")).collect();
                writeln!(out, "{t},{}", cells.join(",")).unwrap();
            }
            Ok(0)
        }
        Cmd::MorphismCheck { map, source, target } => {
            let mdoc = parse_morphism(&read_file(&map)?)?;
            let (sdoc, sm) = load_process(&source)?;
            let (tdoc, tm) = load_process(&target)?;
            if mdoc.source != sdoc.name || mdoc.target != tdoc.name {
                return Err(Error::Semantic(format!(
                    "map connects {} -> {}, files declare {} -> {}",
                    mdoc.source, mdoc.target, sdoc.name, tdoc.name
                ))
                .into());
            }
            let morphism = to_morphism(&mdoc, &sm, &tm)?;
            let ok = validate_morphism(&morphism)?;
            writeln!(out, "valid: {ok}").unwrap();
            Ok(if ok { 0 } else { 1 })
        }
        Cmd::Check { what: CheckCmd::Laws { seed, iters } } => {
            let reports = all_suites(seed, iters);
            let mut failed = false;
            for r in &reports {
                failed |= !r.ok();
                writeln!(out, "{r}").unwrap();
            }
            Ok(if failed { 1 } else { 0 })
        }
    }
}

/// Entry point shared by the binary and the tests. Results and reports go
/// to `out`; error messages go to stderr.
pub fn run(args: &[String], out: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_command(cli.cmd, out) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
