use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::symcore::{Expr, ParseError, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("need at least one independent and one dependent variable (k={k}, n={n})")]
    EmptyBundle { k: usize, n: usize },
    #[error("jet order must be 1 or 2, got {0}")]
    BadOrder(usize),
    #[error("name `{0}` is reserved or already declared")]
    NameClash(String),
    #[error("`{0}` is not a valid identifier")]
    BadName(String),
}

/// Signature of the jet bundle: `k` independent variables, `n` dependent
/// variables, the highest jet order accepted by the parser, and the declared
/// opaque functions and parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetContext {
    k: usize,
    n: usize,
    order: usize,
    functions: BTreeSet<Arc<str>>,
    params: BTreeSet<Arc<str>>,
    independent_names: Vec<String>,
    dependent_names: Vec<String>,
}

const RESERVED: [&str; 5] = ["sin", "cos", "exp", "sqrt", "pi"];

impl JetContext {
    pub fn new(k: usize, n: usize) -> Result<Self, ContextError> {
        if k == 0 || n == 0 {
            return Err(ContextError::EmptyBundle { k, n });
        }
        Ok(JetContext {
            k,
            n,
            order: 1,
            functions: BTreeSet::new(),
            params: BTreeSet::new(),
            independent_names: (1..=k).map(|a| format!("x{a}")).collect(),
            dependent_names: (1..=n).map(|i| format!("q{i}")).collect(),
        })
    }

    pub fn with_order(mut self, order: usize) -> Result<Self, ContextError> {
        if !(1..=2).contains(&order) {
            return Err(ContextError::BadOrder(order));
        }
        self.order = order;
        Ok(self)
    }

    pub fn with_function(mut self, name: &str) -> Result<Self, ContextError> {
        self.check_new_name(name)?;
        self.functions.insert(Arc::from(name));
        Ok(self)
    }

    pub fn with_param(mut self, name: &str) -> Result<Self, ContextError> {
        self.check_new_name(name)?;
        self.params.insert(Arc::from(name));
        Ok(self)
    }

    /// Human-readable names for the coordinates; used only in reports.
    pub fn with_display_names(mut self, independent: Vec<String>, dependent: Vec<String>) -> Self {
        if independent.len() == self.k {
            self.independent_names = independent;
        }
        if dependent.len() == self.n {
            self.dependent_names = dependent;
        }
        self
    }

    fn check_new_name(&self, name: &str) -> Result<(), ContextError> {
        let mut chars = name.chars();
        let valid = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(ContextError::BadName(name.to_string()));
        }
        if RESERVED.contains(&name)
            || classify_coordinate(name).is_some()
            || self.functions.contains(name)
            || self.params.contains(name)
        {
            return Err(ContextError::NameClash(name.to_string()));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn functions(&self) -> impl Iterator<Item = &Arc<str>> {
        self.functions.iter()
    }

    pub fn params(&self) -> impl Iterator<Item = &Arc<str>> {
        self.params.iter()
    }

    pub fn has_function(&self, name: &str) -> bool {
        self.functions.contains(name)
    }

    pub fn has_param(&self, name: &str) -> bool {
        self.params.contains(name)
    }

    pub fn independent_names(&self) -> &[String] {
        &self.independent_names
    }

    pub fn dependent_names(&self) -> &[String] {
        &self.dependent_names
    }

    pub fn x(&self, alpha: usize) -> Expr {
        assert!((1..=self.k).contains(&alpha), "x{alpha} out of range");
        Expr::symbol(Symbol::x(alpha))
    }

    pub fn q(&self, i: usize) -> Expr {
        assert!((1..=self.n).contains(&i), "q{i} out of range");
        Expr::symbol(Symbol::q(i))
    }

    pub fn v(&self, i: usize, alpha: usize) -> Expr {
        assert!((1..=self.n).contains(&i) && (1..=self.k).contains(&alpha), "v{i}_{alpha} out of range");
        Expr::symbol(Symbol::v(i, alpha))
    }

    pub fn a(&self, i: usize, alpha: usize, beta: usize) -> Expr {
        assert!(
            (1..=self.n).contains(&i) && (1..=self.k).contains(&alpha) && (1..=self.k).contains(&beta),
            "a{i}_{alpha}{beta} out of range"
        );
        Expr::symbol(Symbol::second_jet(i, alpha, beta))
    }

    /// Whether `s` is a coordinate (or parameter) of this bundle, ignoring the parser's order limit.
    pub fn contains(&self, s: &Symbol) -> bool {
        let (k, n) = (1..=self.k, 1..=self.n);
        match s {
            Symbol::Independent(a) => k.contains(a),
            Symbol::Dependent(i) => n.contains(i),
            Symbol::FirstJet { i, alpha } => n.contains(i) && k.contains(alpha),
            Symbol::SecondJet { i, alpha, beta } => n.contains(i) && k.contains(alpha) && k.contains(beta),
            Symbol::Param(name) => self.params.contains(name),
        }
    }

    pub fn independents(&self) -> Vec<Symbol> {
        (1..=self.k).map(Symbol::x).collect()
    }

    pub fn dependents(&self) -> Vec<Symbol> {
        (1..=self.n).map(Symbol::q).collect()
    }

    /// `v^i_alpha` ordered by `i`, then `alpha`.
    pub fn first_jets(&self) -> Vec<Symbol> {
        (1..=self.n).flat_map(|i| (1..=self.k).map(move |a| Symbol::v(i, a))).collect()
    }

    /// `a^i_{alpha beta}` with `alpha <= beta`, ordered by `i`, `alpha`, `beta`.
    pub fn second_jets(&self) -> Vec<Symbol> {
        let k = self.k;
        (1..=self.n)
            .flat_map(|i| (1..=k).flat_map(move |a| (a..=k).map(move |b| Symbol::second_jet(i, a, b))))
            .collect()
    }

    /// Coordinates of `J^order`.
    pub fn coordinates(&self, order: usize) -> Vec<Symbol> {
        let mut out = self.independents();
        out.extend(self.dependents());
        if order >= 1 {
            out.extend(self.first_jets());
        }
        if order >= 2 {
            out.extend(self.second_jets());
        }
        out
    }

    /// Resolves a coordinate or parameter name, checking index ranges and the
    /// context's order.
    pub fn resolve(&self, name: &str, pos: usize) -> Result<Symbol, ParseError> {
        if let Some(s) = classify_coordinate(name) {
            if s.is_second_jet() && self.order < 2 {
                return Err(ParseError::IndexOutOfRange {
                    name: name.to_string(),
                    pos,
                    detail: "second-jet symbols need a context of order 2".into(),
                });
            }
            if !self.contains(&s) {
                return Err(ParseError::IndexOutOfRange {
                    name: name.to_string(),
                    pos,
                    detail: format!("context has k={}, n={}", self.k, self.n),
                });
            }
            return Ok(s);
        }
        if self.params.contains(name) {
            return Ok(Symbol::param(name));
        }
        Err(ParseError::UnknownSymbol { name: name.to_string(), pos })
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ParseError> {
        crate::symcore::parse(text, self)
    }
}

fn digits(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Maps `x3`, `q1`, `v1_2`, `a1_12` to symbols (indices unchecked).
pub(crate) fn classify_coordinate(name: &str) -> Option<Symbol> {
    let (head, rest) = name.split_at(1.min(name.len()));
    match head {
        "x" => digits(rest).map(Symbol::x),
        "q" => digits(rest).map(Symbol::q),
        "v" => {
            let (i, a) = rest.split_once('_')?;
            Some(Symbol::v(digits(i)?, digits(a)?))
        }
        "a" => {
            let (i, ab) = rest.split_once('_')?;
            if ab.len() != 2 {
                return None;
            }
            let (a, b) = ab.split_at(1);
            Some(Symbol::second_jet(digits(i)?, digits(a)?, digits(b)?))
        }
        _ => None,
    }
}
