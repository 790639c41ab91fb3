//! Linear temporal logic over finite traces extended by last-valuation
//! stuttering.
//!
//! A [`Formula`] is an AST over named atomic propositions; a
//! [`SemanticTrace`] is a finite, non-empty sequence of total valuations. The
//! finite trace denotes the infinite trace obtained by repeating its last
//! valuation, and [`Formula::evaluate`] computes exact truth values on that
//! infinite extension via dynamic programming: at the last position the
//! constant suffix collapses (`X ψ ≡ ψ`, `G ψ ≡ ψ`, `F ψ ≡ ψ`,
//! `ψ1 U ψ2 ≡ ψ2`), interior positions use the one-step expansion laws.

mod parse;

pub use parse::parse;

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LtlError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown token at position {position}: {token:?}")]
    UnknownToken { position: usize, token: String },
    #[error("unknown atom {0:?}")]
    UnknownAtom(String),
    #[error("instant {instant} out of range for a trace of length {len}")]
    InstantOutOfRange { instant: usize, len: usize },
    #[error("trace must contain at least one state")]
    EmptyTrace,
    #[error("state {index} assigns {got} values but the trace declares {expected} atoms")]
    IncompleteValuation { index: usize, got: usize, expected: usize },
    #[error("duplicate atom {0:?} in trace declaration")]
    DuplicateAtom(String),
}

/// LTL formula tree. `True`/`False` literals are admitted as constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    True,
    False,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Globally(Box<Formula>),
    Finally(Box<Formula>),
}

/// One truth value per atom, aligned with the trace's atom order.
pub type Valuation = Vec<bool>;

/// Finite semantic trace: an ordered atom set and a non-empty sequence of
/// total valuations. Index 0 is the first instant; external reports print
/// instants 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticTrace {
    atoms: Vec<String>,
    states: Vec<Valuation>,
}

impl SemanticTrace {
    pub fn new(atoms: Vec<String>, states: Vec<Valuation>) -> Result<Self, LtlError> {
        if states.is_empty() {
            return Err(LtlError::EmptyTrace);
        }
        let mut seen = std::collections::HashSet::new();
        for a in &atoms {
            if !seen.insert(a.as_str()) {
                return Err(LtlError::DuplicateAtom(a.clone()));
            }
        }
        for (index, st) in states.iter().enumerate() {
            if st.len() != atoms.len() {
                return Err(LtlError::IncompleteValuation {
                    index,
                    got: st.len(),
                    expected: atoms.len(),
                });
            }
        }
        Ok(Self { atoms, states })
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction
    }

    pub fn states(&self) -> &[Valuation] {
        &self.states
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == name)
    }

    /// Truth value of `atom` at `instant`.
    pub fn value(&self, instant: usize, atom: &str) -> Option<bool> {
        Some(self.states.get(instant)?[self.atom_index(atom)?])
    }

    /// Appends a copy of the last valuation (explicit one-step unrolling of
    /// the stutter extension; denotes the same infinite trace).
    pub fn stutter_once(&self) -> Self {
        let mut states = self.states.clone();
        states.push(states.last().expect("non-empty").clone());
        Self { atoms: self.atoms.clone(), states }
    }
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)] // constructor named for the connective
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn globally(f: Formula) -> Self {
        Formula::Globally(Box::new(f))
    }

    pub fn finally(f: Formula) -> Self {
        Formula::Finally(Box::new(f))
    }

    /// All atom names referenced by the formula, in first-occurrence order.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Formula::Atom(a) => {
                if !out.contains(&a.as_str()) {
                    out.push(a);
                }
            }
            Formula::True | Formula::False => {}
            Formula::Not(f) | Formula::Next(f) | Formula::Globally(f) | Formula::Finally(f) => {
                f.collect_atoms(out)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Truth value at `instant` on the stutter-extension of `trace`.
    pub fn evaluate(&self, trace: &SemanticTrace, instant: usize) -> Result<bool, LtlError> {
        if instant >= trace.len() {
            return Err(LtlError::InstantOutOfRange { instant, len: trace.len() });
        }
        Ok(self.evaluate_all(trace)?[instant])
    }

    /// Truth values at every instant of `trace` (the DP table's top row).
    pub fn evaluate_all(&self, trace: &SemanticTrace) -> Result<Vec<bool>, LtlError> {
        let len = trace.len();
        let last = len - 1;
        match self {
            Formula::Atom(name) => {
                let idx = trace
                    .atom_index(name)
                    .ok_or_else(|| LtlError::UnknownAtom(name.clone()))?;
                Ok(trace.states.iter().map(|st| st[idx]).collect())
            }
            Formula::True => Ok(vec![true; len]),
            Formula::False => Ok(vec![false; len]),
            Formula::Not(f) => Ok(f.evaluate_all(trace)?.iter().map(|v| !v).collect()),
            Formula::And(a, b) => Ok(zip_with(a.evaluate_all(trace)?, b.evaluate_all(trace)?, |x, y| x && y)),
            Formula::Or(a, b) => Ok(zip_with(a.evaluate_all(trace)?, b.evaluate_all(trace)?, |x, y| x || y)),
            Formula::Implies(a, b) => Ok(zip_with(a.evaluate_all(trace)?, b.evaluate_all(trace)?, |x, y| !x || y)),
            Formula::Next(f) => {
                let sub = f.evaluate_all(trace)?;
                let mut out = vec![false; len];
                out[..last].copy_from_slice(&sub[1..]);
                out[last] = sub[last]; // stutter: the next state repeats the last
                Ok(out)
            }
            Formula::Globally(f) => {
                let sub = f.evaluate_all(trace)?;
                let mut out = vec![false; len];
                out[last] = sub[last];
                for i in (0..last).rev() {
                    out[i] = sub[i] && out[i + 1];
                }
                Ok(out)
            }
            Formula::Finally(f) => {
                let sub = f.evaluate_all(trace)?;
                let mut out = vec![false; len];
                out[last] = sub[last];
                for i in (0..last).rev() {
                    out[i] = sub[i] || out[i + 1];
                }
                Ok(out)
            }
            Formula::Until(a, b) => {
                let lhs = a.evaluate_all(trace)?;
                let rhs = b.evaluate_all(trace)?;
                let mut out = vec![false; len];
                out[last] = rhs[last]; // constant suffix: ψ1 U ψ2 collapses to ψ2
                for i in (0..last).rev() {
                    out[i] = rhs[i] || (lhs[i] && out[i + 1]);
                }
                Ok(out)
            }
        }
    }

    /// Fully parenthesized canonical form; `parse(print(φ)) == φ`.
    pub fn print(&self) -> String {
        self.render(ConstantStyle::Lowercase)
    }

    /// Same structure with SMV-style `TRUE`/`FALSE` constants.
    pub fn print_smv(&self) -> String {
        self.render(ConstantStyle::Uppercase)
    }

    fn render(&self, style: ConstantStyle) -> String {
        let wrap = |f: &Formula| -> String {
            match f {
                Formula::Atom(_) | Formula::True | Formula::False => f.render(style),
                _ => format!("({})", f.render(style)),
            }
        };
        match self {
            Formula::Atom(a) => a.clone(),
            Formula::True => style.literal(true).to_string(),
            Formula::False => style.literal(false).to_string(),
            Formula::Not(f) => format!("!{}", wrap(f)),
            Formula::Next(f) => format!("X {}", wrap(f)),
            Formula::Globally(f) => format!("G {}", wrap(f)),
            Formula::Finally(f) => format!("F {}", wrap(f)),
            Formula::And(a, b) => format!("{} & {}", wrap(a), wrap(b)),
            Formula::Or(a, b) => format!("{} | {}", wrap(a), wrap(b)),
            Formula::Implies(a, b) => format!("{} -> {}", wrap(a), wrap(b)),
            Formula::Until(a, b) => format!("{} U {}", wrap(a), wrap(b)),
        }
    }
}

#[derive(Clone, Copy)]
enum ConstantStyle {
    Lowercase,
    Uppercase,
}

impl ConstantStyle {
    fn literal(self, value: bool) -> &'static str {
        match (self, value) {
            (ConstantStyle::Lowercase, true) => "true",
            (ConstantStyle::Lowercase, false) => "false",
            (ConstantStyle::Uppercase, true) => "TRUE",
            (ConstantStyle::Uppercase, false) => "FALSE",
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}
