use std::collections::BTreeMap;
use std::fmt;

use crate::symcore::{Expr, Symbol};

use super::error::GeometryError;
use super::fields::{Role, VectorField};
use super::JetContext;

/// A `p`-form on `J^1`: sorted wedges of `dx`, `dq`, `dv` with expression coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DiffForm {
    degree: usize,
    terms: BTreeMap<Vec<Symbol>, Expr>,
}

/// Sorts `basis` in place and returns the permutation sign, or `None` on a repeated element.
fn sort_with_sign(basis: &mut [Symbol]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..basis.len() {
        let mut j = i;
        while j > 0 && basis[j - 1] > basis[j] {
            basis.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if basis.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

fn check_basis(s: &Symbol) -> Result<(), GeometryError> {
    if s.is_param() || s.is_second_jet() {
        return Err(GeometryError::NotOnJ1(format!("d{s} is not a basis 1-form on J1")));
    }
    Ok(())
}

impl DiffForm {
    pub fn zero(degree: usize) -> Self {
        DiffForm { degree, terms: BTreeMap::new() }
    }

    pub fn scalar(f: Expr) -> Self {
        let mut form = DiffForm::zero(0);
        form.add_term(Vec::new(), f);
        form
    }

    /// The basis 1-form `ds`.
    pub fn d_of(s: Symbol) -> Result<Self, GeometryError> {
        check_basis(&s)?;
        let mut form = DiffForm::zero(1);
        form.add_term(vec![s], Expr::one());
        Ok(form)
    }

    /// `coeff * ds1 ^ ... ^ dsp` in any order; the basis is sorted with sign.
    pub fn monomial(coeff: Expr, basis: Vec<Symbol>) -> Result<Self, GeometryError> {
        for s in &basis {
            check_basis(s)?;
        }
        let mut basis = basis;
        let degree = basis.len();
        let mut form = DiffForm::zero(degree);
        if let Some(sign) = sort_with_sign(&mut basis) {
            form.add_term(basis, coeff.scale(&crate::symcore::int(sign)));
        }
        Ok(form)
    }

    fn add_term(&mut self, basis: Vec<Symbol>, coeff: Expr) {
        debug_assert_eq!(basis.len(), self.degree);
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(basis).or_insert_with(Expr::zero);
        *slot = &*slot + &coeff;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Symbol>, &Expr)> {
        self.terms.iter()
    }

    /// Coefficient of the wedge of `basis` (given in any order, sign applied).
    pub fn coefficient(&self, basis: &[Symbol]) -> Expr {
        let mut b = basis.to_vec();
        match sort_with_sign(&mut b) {
            Some(sign) => self.terms.get(&b).map(|c| c.scale(&crate::symcore::int(sign))).unwrap_or_else(Expr::zero),
            None => Expr::zero(),
        }
    }

    /// The 0-form value; zero for higher degrees.
    pub fn as_scalar(&self) -> Expr {
        if self.degree == 0 {
            self.coefficient(&[])
        } else {
            Expr::zero()
        }
    }

    pub fn add(&self, other: &DiffForm) -> Result<DiffForm, GeometryError> {
        if self.degree != other.degree {
            return Err(GeometryError::DegreeMismatch { left: self.degree, right: other.degree });
        }
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(b.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffForm) -> Result<DiffForm, GeometryError> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// Multiplies every coefficient by the function `f`.
    pub fn scale(&self, f: &Expr) -> DiffForm {
        let mut out = DiffForm::zero(self.degree);
        for (b, c) in &self.terms {
            out.add_term(b.clone(), c * f);
        }
        out
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a DiffForm>>(degree: usize, forms: I) -> Result<DiffForm, GeometryError> {
        let mut out = DiffForm::zero(degree);
        for f in forms {
            out = out.add(f)?;
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &DiffForm) -> DiffForm {
        let mut out = DiffForm::zero(self.degree + other.degree);
        for (ba, ca) in &self.terms {
            for (bb, cb) in &other.terms {
                let mut basis: Vec<Symbol> = ba.iter().chain(bb.iter()).cloned().collect();
                if let Some(sign) = sort_with_sign(&mut basis) {
                    out.add_term(basis, (ca * cb).scale(&crate::symcore::int(sign)));
                }
            }
        }
        out
    }

    /// Exterior derivative; coefficients must live on `J^1` (no second-jet symbols).
    pub fn exterior_derivative(&self) -> Result<DiffForm, GeometryError> {
        let mut out = DiffForm::zero(self.degree + 1);
        for (basis, c) in &self.terms {
            for s in c.free_symbols() {
                if s.is_param() {
                    continue;
                }
                check_basis(&s)?;
                if basis.contains(&s) {
                    continue;
                }
                let partial = c.diff(&s)?;
                let mut wedge = Vec::with_capacity(basis.len() + 1);
                wedge.push(s);
                wedge.extend(basis.iter().cloned());
                if let Some(sign) = sort_with_sign(&mut wedge) {
                    out.add_term(wedge, partial.scale(&crate::symcore::int(sign)));
                }
            }
        }
        Ok(out)
    }

    /// Interior product `i_X`. Fields on `E` are rejected: their components are
    /// not functions on `J^1`.
    pub fn contract(&self, x: &VectorField) -> Result<DiffForm, GeometryError> {
        if x.role() == Role::OnE {
            return Err(GeometryError::RoleMismatch {
                expected: "a field on J1 or along a jet projection".into(),
                found: x.role(),
            });
        }
        if self.degree == 0 {
            return Ok(DiffForm::zero(0));
        }
        let mut out = DiffForm::zero(self.degree - 1);
        for (basis, c) in &self.terms {
            for (j, s) in basis.iter().enumerate() {
                let comp = x.component(s);
                if comp.is_zero() {
                    continue;
                }
                let mut rest = basis.clone();
                rest.remove(j);
                let coeff = if j % 2 == 0 { c * &comp } else { -(c * &comp) };
                out.add_term(rest, coeff);
            }
        }
        Ok(out)
    }

    /// Lie derivative by Cartan's formula `i_X d + d i_X`; `X` must be a field on `J^1`.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<DiffForm, GeometryError> {
        if x.role() != Role::OnJ1 {
            return Err(GeometryError::RoleMismatch { expected: "a field on J1".into(), found: x.role() });
        }
        let a = self.exterior_derivative()?.contract(x)?;
        if self.degree == 0 {
            return Ok(a);
        }
        let b = self.contract(x)?.exterior_derivative()?;
        a.add(&b)
    }

    /// Applies `f` to every coefficient.
    pub fn map_coefficients(
        &self,
        mut f: impl FnMut(&Expr) -> Result<Expr, GeometryError>,
    ) -> Result<DiffForm, GeometryError> {
        let mut out = DiffForm::zero(self.degree);
        for (b, c) in &self.terms {
            out.add_term(b.clone(), f(c)?);
        }
        Ok(out)
    }

    pub fn has_second_jet(&self) -> bool {
        self.terms.values().any(Expr::has_second_jet)
    }
}

/// `dx^1 ^ ... ^ dx^k`.
pub fn volume_form(ctx: &JetContext) -> DiffForm {
    DiffForm::monomial(Expr::one(), ctx.independents()).expect("dx basis")
}

/// `d^{k-1}x_alpha = i_{d/dx^alpha} d^k x`.
pub fn volume_minor(ctx: &JetContext, alpha: usize) -> DiffForm {
    let field = VectorField::coordinate(Role::OnJ1, Symbol::x(alpha));
    volume_form(ctx).contract(&field).expect("coordinate field on J1")
}

/// Contact form `dq^i - v^i_beta dx^beta`.
pub fn contact_form(ctx: &JetContext, i: usize) -> DiffForm {
    let mut form = DiffForm::d_of(Symbol::q(i)).expect("dq basis");
    for beta in 1..=ctx.k() {
        form.add_term(vec![Symbol::x(beta)], -ctx.v(i, beta));
    }
    form
}

fn write_basis(f: &mut fmt::Formatter<'_>, basis: &[Symbol]) -> fmt::Result {
    for (i, s) in basis.iter().enumerate() {
        if i > 0 {
            f.write_str("∧")?;
        }
        write!(f, "d{s}")?;
    }
    Ok(())
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (basis, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if basis.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write_basis(f, basis)?;
            } else {
                write!(f, "({c})*")?;
                write_basis(f, basis)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffForm[{}]({self})", self.degree)
    }
}
