use std::fmt;
use std::sync::Arc;

/// A coordinate on the jet bundle, or a declared symbolic parameter.
///
/// Indices are 1-based. Second-jet symbols always store `alpha <= beta`;
/// use [`Symbol::second_jet`] to build them from an arbitrary index pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Independent variable `x^alpha`.
    Independent(usize),
    /// Dependent variable `q^i`.
    Dependent(usize),
    /// First-jet coordinate `v^i_alpha`.
    FirstJet { i: usize, alpha: usize },
    /// Second-jet coordinate `v^i_{alpha beta}` with `alpha <= beta`.
    SecondJet { i: usize, alpha: usize, beta: usize },
    /// A named constant such as a mass; never differentiated against jet coordinates.
    Param(Arc<str>),
}

impl Symbol {
    pub fn x(alpha: usize) -> Self {
        Symbol::Independent(alpha)
    }

    pub fn q(i: usize) -> Self {
        Symbol::Dependent(i)
    }

    pub fn v(i: usize, alpha: usize) -> Self {
        Symbol::FirstJet { i, alpha }
    }

    /// Second-jet symbol; the index pair is sorted so `a(i,2,1) == a(i,1,2)`.
    pub fn second_jet(i: usize, alpha: usize, beta: usize) -> Self {
        let (alpha, beta) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
        Symbol::SecondJet { i, alpha, beta }
    }

    pub fn param(name: &str) -> Self {
        Symbol::Param(Arc::from(name))
    }

    pub fn is_independent(&self) -> bool {
        matches!(self, Symbol::Independent(_))
    }

    pub fn is_dependent(&self) -> bool {
        matches!(self, Symbol::Dependent(_))
    }

    pub fn is_first_jet(&self) -> bool {
        matches!(self, Symbol::FirstJet { .. })
    }

    pub fn is_second_jet(&self) -> bool {
        matches!(self, Symbol::SecondJet { .. })
    }

    pub fn is_param(&self) -> bool {
        matches!(self, Symbol::Param(_))
    }

    /// True for jet coordinates (everything except parameters).
    pub fn is_coordinate(&self) -> bool {
        !self.is_param()
    }

    /// Jet order of the coordinate: 0 for `x`, `q`; 1 for `v`; 2 for `a`.
    pub fn jet_order(&self) -> usize {
        match self {
            Symbol::Independent(_) | Symbol::Dependent(_) | Symbol::Param(_) => 0,
            Symbol::FirstJet { .. } => 1,
            Symbol::SecondJet { .. } => 2,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Independent(a) => write!(f, "x{a}"),
            Symbol::Dependent(i) => write!(f, "q{i}"),
            Symbol::FirstJet { i, alpha } => write!(f, "v{i}_{alpha}"),
            Symbol::SecondJet { i, alpha, beta } => write!(f, "a{i}_{alpha}{beta}"),
            Symbol::Param(name) => write!(f, "{name}"),
        }
    }
}
