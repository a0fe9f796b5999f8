//! Seeded random polynomial inputs for identity testing.

use std::collections::BTreeMap;

use rand::Rng;

use crate::geometry::{DiffForm, JetContext, Role, SopdeTable, VectorField};
use crate::symcore::{Expr, Symbol};

/// Shape of generated polynomials.
#[derive(Debug, Clone, Copy)]
pub struct PolySpec {
    pub max_terms: usize,
    pub max_degree: u32,
    /// Coefficients are `n / 2` with `n` drawn from `[-coeff_bound, coeff_bound]`, never zero.
    pub coeff_bound: i64,
}

impl Default for PolySpec {
    fn default() -> Self {
        PolySpec { max_terms: 4, max_degree: 3, coeff_bound: 4 }
    }
}

/// A sum of at most `spec.max_terms` monomials in `symbols`.
pub fn random_polynomial<R: Rng>(rng: &mut R, symbols: &[Symbol], spec: PolySpec) -> Expr {
    let terms = rng.random_range(1..=spec.max_terms.max(1));
    let mut parts = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut n = 0;
        while n == 0 {
            n = rng.random_range(-spec.coeff_bound..=spec.coeff_bound);
        }
        let mut term = Expr::ratio(n, 2);
        if !symbols.is_empty() {
            let degree = rng.random_range(0..=spec.max_degree);
            for _ in 0..degree {
                let s = &symbols[rng.random_range(0..symbols.len())];
                term = term * Expr::symbol(s.clone());
            }
        }
        parts.push(term);
    }
    Expr::sum(parts)
}

/// A polynomial Lagrangian on `J^1` that depends on at least one first-jet coordinate.
pub fn random_lagrangian<R: Rng>(rng: &mut R, ctx: &JetContext, spec: PolySpec) -> Expr {
    let all = ctx.coordinates(1);
    let velocities = ctx.first_jets();
    loop {
        let quadratic = {
            let a = &velocities[rng.random_range(0..velocities.len())];
            let b = &velocities[rng.random_range(0..velocities.len())];
            Expr::symbol(a.clone()) * Expr::symbol(b.clone())
        };
        let l = quadratic + random_polynomial(rng, &all, spec);
        if l.has_first_jet() {
            return l;
        }
    }
}

/// A vertical field whose components are polynomials in `symbols`.
pub fn random_vertical_field<R: Rng>(
    rng: &mut R,
    ctx: &JetContext,
    role: Role,
    symbols: &[Symbol],
    spec: PolySpec,
) -> VectorField {
    let comps: BTreeMap<Symbol, Expr> =
        (1..=ctx.n()).map(|i| (Symbol::q(i), random_polynomial(rng, symbols, spec))).collect();
    VectorField::new(role, comps).expect("vertical components are valid for every role")
}

/// A field on `E` with polynomial components in `x, q`, including horizontal ones.
pub fn random_field_on_e<R: Rng>(rng: &mut R, ctx: &JetContext, spec: PolySpec) -> VectorField {
    let base: Vec<Symbol> = ctx.coordinates(0);
    let comps: BTreeMap<Symbol, Expr> = base.iter().map(|s| (s.clone(), random_polynomial(rng, &base, spec))).collect();
    VectorField::new(Role::OnE, comps).expect("base components")
}

/// A table `Gamma^i_{alpha beta}` of polynomials on `J^1`, not symmetrized.
pub fn random_sopde_table<R: Rng>(rng: &mut R, ctx: &JetContext, spec: PolySpec) -> SopdeTable {
    let all = ctx.coordinates(1);
    SopdeTable::from_fn(ctx, |_, _, _| random_polynomial(rng, &all, spec))
}

/// A form of `degree` on `J^1` with a few random polynomial terms.
pub fn random_form<R: Rng>(rng: &mut R, ctx: &JetContext, degree: usize, spec: PolySpec) -> DiffForm {
    let all = ctx.coordinates(1);
    let mut form = DiffForm::zero(degree);
    if degree > all.len() {
        return form;
    }
    for _ in 0..rng.random_range(1..=3) {
        let mut basis: Vec<Symbol> = Vec::with_capacity(degree);
        while basis.len() < degree {
            let s = all[rng.random_range(0..all.len())].clone();
            if !basis.contains(&s) {
                basis.push(s);
            }
        }
        let term = DiffForm::monomial(random_polynomial(rng, &all, spec), basis).expect("first-jet basis");
        form = form.add(&term).expect("same degree");
    }
    form
}

/// A polynomial wrapped in a random smooth outer function: `sin`, `cos`, `exp`,
/// `sqrt(1 + p^2)`, `1/(2 + p^2)`, or a product of two polynomials.
pub fn random_smooth_expression<R: Rng>(rng: &mut R, symbols: &[Symbol], spec: PolySpec) -> Expr {
    let p = random_polynomial(rng, symbols, spec);
    let q = random_polynomial(rng, symbols, spec);
    let square = &p * &p;
    match rng.random_range(0..6) {
        0 => Expr::sin(p) + q,
        1 => Expr::cos(p) * q,
        2 => Expr::exp(p.scale(&crate::symcore::ratio(1, 4))) - q,
        3 => (Expr::one() + square).sqrt().expect("constant exponent") + q,
        4 => (Expr::int(2) + square).recip().expect("nonzero denominator") * q,
        _ => p * q,
    }
}
