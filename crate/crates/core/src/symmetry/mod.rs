//! Symmetry predicates and Noether currents.

mod noether;
mod onshell;

use thiserror::Error;

use crate::geometry::{
    prolong_along, prolong_on_e, total_derivative_0, total_derivative_1, GeometryError, Role, VectorField,
};
use crate::lagrangian::{Lagrangian, LagrangianError};
use crate::numcheck::{random_first_jet_points, sample_onshell, NumError, NumericEnv};
use crate::symcore::{equal, Compiled, Expr, Functions, Sampling, SymError, Symbol, Verdict};

pub use noether::{integrate_closed_one_form, is_noether_symmetry, FluxRecovery, IntegrationFailure, NoetherCheck};
pub use onshell::{onshell_residual, OnShellDecomposition};

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("{what} must not depend on second-jet coordinates: `{expr}`")]
    SecondJet { what: &'static str, expr: String },
    #[error("{what} must not depend on first-jet coordinates: `{expr}`")]
    FirstJet { what: &'static str, expr: String },
    #[error("expected {expected} components, got {found}")]
    Length { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// How a current was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Variational,
    Generalized,
    Prop600,
    UserSupplied,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Variational => "variational",
            Provenance::Generalized => "generalized",
            Provenance::Prop600 => "prop600",
            Provenance::UserSupplied => "user-supplied",
        }
    }
}

fn check_first_order(what: &'static str, exprs: &[Expr], k: usize) -> Result<(), SymmetryError> {
    if exprs.len() != k {
        return Err(SymmetryError::Length { expected: k, found: exprs.len() });
    }
    if let Some(e) = exprs.iter().find(|e| e.has_second_jet()) {
        return Err(SymmetryError::SecondJet { what, expr: e.to_string() });
    }
    Ok(())
}

/// Candidate conservation law `(G^1, ..., G^k)` on `J^1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurrentVector {
    components: Vec<Expr>,
    provenance: Provenance,
}

impl CurrentVector {
    pub fn new(k: usize, components: Vec<Expr>, provenance: Provenance) -> Result<Self, SymmetryError> {
        check_first_order("a current", &components, k)?;
        Ok(CurrentVector { components, provenance })
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// `G^alpha`, 1-based.
    pub fn get(&self, alpha: usize) -> &Expr {
        &self.components[alpha - 1]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `sum_alpha T1_alpha(G^alpha)`, an expression on `J^2`.
    pub fn total_divergence(&self, l: &Lagrangian) -> Result<Expr, SymmetryError> {
        let ctx = l.ctx();
        let parts = self
            .components
            .iter()
            .enumerate()
            .map(|(a, g)| total_derivative_1(ctx, g, a + 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Expr::sum(parts))
    }

    /// The total divergence decomposed modulo the Euler-Lagrange equations.
    pub fn onshell_divergence(&self, l: &Lagrangian) -> Result<OnShellDecomposition, SymmetryError> {
        let el = l.euler_lagrange()?;
        Ok(onshell_residual(&self.total_divergence(l)?, &el)?)
    }
}

/// The functions `F^alpha` on `J^1` paired with a generalized symmetry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluxPotential {
    components: Vec<Expr>,
}

impl FluxPotential {
    pub fn new(k: usize, components: Vec<Expr>) -> Result<Self, SymmetryError> {
        check_first_order("a flux potential", &components, k)?;
        Ok(FluxPotential { components })
    }

    pub fn zero(k: usize) -> Self {
        FluxPotential { components: vec![Expr::zero(); k] }
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }
}

/// `Theta^alpha_L(X) = p^alpha_i (X^i - v^i_beta X_beta) + L X_alpha` for every `alpha`.
fn cartan_contractions(l: &Lagrangian, x: &VectorField) -> Result<Vec<Expr>, SymmetryError> {
    let thetas = l.cartan_one_forms()?;
    thetas.iter().map(|t| Ok(t.contract(x)?.as_scalar())).collect()
}

fn require_vertical(x: &VectorField) -> Result<(), SymmetryError> {
    if let Some(s) = x.components().keys().find(|s| s.is_independent()) {
        return Err(GeometryError::NonVertical(s.to_string()).into());
    }
    Ok(())
}

fn require_role(x: &VectorField, role: Role, expected: &str) -> Result<(), SymmetryError> {
    if x.role() != role {
        return Err(GeometryError::RoleMismatch { expected: expected.into(), found: x.role() }.into());
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct VariationalCheck {
    /// `X^1(L) + L T0_alpha(X_alpha)`.
    pub residual: Expr,
    pub prolongation: VectorField,
    /// Components of `X` depend on first-jet coordinates, which the `T0`
    /// prolongation does not differentiate.
    pub velocity_dependent: bool,
    /// Numeric comparison of the residual with zero, when it does not normalize to zero.
    pub numeric: Option<Verdict>,
}

impl VariationalCheck {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }
}

/// Checks whether a field on `E` is a variational symmetry of `L`.
pub fn is_variational_symmetry(x: &VectorField, l: &Lagrangian) -> Result<VariationalCheck, SymmetryError> {
    require_role(x, Role::OnE, "a field on E")?;
    let ctx = l.ctx();
    let prolongation = prolong_on_e(ctx, x)?;
    let mut parts = vec![prolongation.apply(l.expr())?];
    for alpha in 1..=ctx.k() {
        let xa = x.x_component(alpha);
        if !xa.is_zero() {
            parts.push(l.expr() * &total_derivative_0(ctx, &xa, alpha)?);
        }
    }
    let residual = Expr::sum(parts);
    let numeric =
        (!residual.is_zero()).then(|| equal(&residual, &Expr::zero(), Sampling::default(), &Functions::new()).verdict);
    Ok(VariationalCheck { residual, prolongation, velocity_dependent: x.is_velocity_dependent(), numeric })
}

/// `G^alpha = Theta^alpha_L(X^1)`.
pub fn noether_current_variational(x: &VectorField, l: &Lagrangian) -> Result<CurrentVector, SymmetryError> {
    require_role(x, Role::OnE, "a field on E")?;
    let x1 = prolong_on_e(l.ctx(), x)?;
    CurrentVector::new(l.ctx().k(), cartan_contractions(l, &x1)?, Provenance::Variational)
}

/// Numeric on-shell evaluation of a residual that is expected to vanish there.
#[derive(Debug, Clone, PartialEq)]
pub struct OnShellCertificate {
    pub seed: u64,
    /// Points where the residual was evaluated.
    pub points: usize,
    /// Base points skipped because the Hessian was singular there.
    pub skipped: usize,
    /// Largest `|e| / (1 + |X^(1) L| + |T F|)` seen.
    pub max_scaled: f64,
}

impl OnShellCertificate {
    pub fn passed(&self) -> bool {
        self.points > 0 && self.max_scaled < crate::symcore::NUMERIC_TOLERANCE
    }
}

#[derive(Debug, Clone)]
pub struct GeneralizedCheck {
    /// `X^(1)(L) - T1_alpha(F^alpha)`.
    pub residual: Expr,
    pub decomposition: OnShellDecomposition,
    pub certificate: Option<OnShellCertificate>,
}

impl GeneralizedCheck {
    pub fn holds(&self) -> bool {
        self.decomposition.vanishes_on_shell()
    }
}

/// Number of on-shell points used by the numeric certificate.
pub const CERTIFICATE_POINTS: usize = 50;

/// Checks `X^(1)(L) = T1_alpha(F^alpha)` on shell for a vertical field along `pi_{1,0}`.
///
/// The verdict is the exact decomposition modulo the Euler-Lagrange
/// expressions. When `certify` is given, the residual is also evaluated at
/// [`CERTIFICATE_POINTS`] numeric on-shell points drawn with that seed.
pub fn is_generalized_symmetry(
    x: &VectorField,
    f: &FluxPotential,
    l: &Lagrangian,
    certify: Option<(u64, &NumericEnv)>,
) -> Result<GeneralizedCheck, SymmetryError> {
    require_role(x, Role::AlongPi10, "a field along pi10")?;
    require_vertical(x)?;
    let ctx = l.ctx();
    if f.components.len() != ctx.k() {
        return Err(SymmetryError::Length { expected: ctx.k(), found: f.components.len() });
    }
    let lhs = prolong_along(ctx, x)?.apply(l.expr())?;
    let rhs = Expr::sum(
        f.components
            .iter()
            .enumerate()
            .map(|(a, fa)| total_derivative_1(ctx, fa, a + 1))
            .collect::<Result<Vec<_>, _>>()?,
    );
    let residual = &lhs - &rhs;
    let el = l.euler_lagrange()?;
    let decomposition = onshell_residual(&residual, &el)?;
    let certificate = match certify {
        Some((seed, env)) => Some(certify_onshell(l, &lhs, &rhs, seed, env)?),
        None => None,
    };
    Ok(GeneralizedCheck { residual, decomposition, certificate })
}

fn certify_onshell(
    l: &Lagrangian,
    lhs: &Expr,
    rhs: &Expr,
    seed: u64,
    env: &NumericEnv,
) -> Result<OnShellCertificate, SymmetryError> {
    let ctx = l.ctx();
    let mut slots = ctx.coordinates(2);
    slots.extend(env.params.keys().cloned());
    let a = Compiled::new(lhs, &slots, &env.functions).map_err(NumError::from)?;
    let b = Compiled::new(rhs, &slots, &env.functions).map_err(NumError::from)?;
    let bases = random_first_jet_points(ctx, env, CERTIFICATE_POINTS * 4, seed);
    let (mut points, mut skipped, mut max_scaled) = (0, 0, 0.0f64);
    for (j, base) in bases.iter().enumerate() {
        if points == CERTIFICATE_POINTS {
            break;
        }
        let onshell = match sample_onshell(l, base, 2, seed.wrapping_add(j as u64), env) {
            Ok(p) => p,
            Err(NumError::Lagrangian(_) | NumError::OffShell(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for pt in onshell.iter().take(CERTIFICATE_POINTS - points) {
            let vals: Vec<f64> = slots.iter().map(|s| pt[s]).collect();
            let (Ok(va), Ok(vb)) = (a.eval(&vals), b.eval(&vals)) else {
                continue;
            };
            max_scaled = max_scaled.max((va - vb).abs() / (1.0 + va.abs() + vb.abs()));
            points += 1;
        }
    }
    Ok(OnShellCertificate { seed, points, skipped, max_scaled })
}

/// `G^alpha = F^alpha - Theta^alpha_L(X)` for a field along `pi_{1,0}`.
pub fn noether_current_generalized(
    x: &VectorField,
    f: &FluxPotential,
    l: &Lagrangian,
) -> Result<CurrentVector, SymmetryError> {
    require_role(x, Role::AlongPi10, "a field along pi10")?;
    let k = l.ctx().k();
    if f.components.len() != k {
        return Err(SymmetryError::Length { expected: k, found: f.components.len() });
    }
    let theta = cartan_contractions(l, x)?;
    let g = f.components.iter().zip(&theta).map(|(fa, t)| fa - t).collect();
    CurrentVector::new(k, g, Provenance::Generalized)
}

#[derive(Debug, Clone)]
pub struct Prop600Current {
    pub current: CurrentVector,
    /// `X^1(L) - T0_alpha(g^alpha)`; the current is conserved when this vanishes.
    pub hypothesis_residual: Expr,
}

impl Prop600Current {
    pub fn hypothesis_holds(&self) -> bool {
        self.hypothesis_residual.is_zero()
    }
}

/// `G^alpha = g^alpha - Theta^alpha_L(X^1)` for a vertical field on `E` and
/// functions `g^alpha` on `E` with `X^1(L) = T0_alpha(g^alpha)`.
pub fn noether_current_prop600(x: &VectorField, g: &[Expr], l: &Lagrangian) -> Result<Prop600Current, SymmetryError> {
    require_role(x, Role::OnE, "a field on E")?;
    require_vertical(x)?;
    let ctx = l.ctx();
    check_first_order("g", g, ctx.k())?;
    if let Some(e) = g.iter().find(|e| e.has_first_jet()) {
        return Err(SymmetryError::FirstJet { what: "g", expr: e.to_string() });
    }
    let x1 = prolong_on_e(ctx, x)?;
    let mut parts = vec![x1.apply(l.expr())?];
    for (a, ga) in g.iter().enumerate() {
        parts.push(-total_derivative_0(ctx, ga, a + 1)?);
    }
    let hypothesis_residual = Expr::sum(parts);
    let theta = cartan_contractions(l, &x1)?;
    let comps = g.iter().zip(&theta).map(|(ga, t)| ga - t).collect();
    Ok(Prop600Current { current: CurrentVector::new(ctx.k(), comps, Provenance::Prop600)?, hypothesis_residual })
}

/// `X^(1)(L) + EL_i X^i - T1_alpha(Theta^alpha_L(X))` for a vertical field
/// along `pi_{1,0}`; identically zero.
pub fn check_iden00(x: &VectorField, l: &Lagrangian) -> Result<Expr, SymmetryError> {
    require_role(x, Role::AlongPi10, "a field along pi10")?;
    require_vertical(x)?;
    let ctx = l.ctx();
    let el = l.euler_lagrange()?;
    let mut parts = vec![prolong_along(ctx, x)?.apply(l.expr())?];
    for i in 1..=ctx.n() {
        parts.push(el.get(i) * &x.q_component(i));
    }
    for (a, t) in cartan_contractions(l, x)?.iter().enumerate() {
        parts.push(-total_derivative_1(ctx, t, a + 1)?);
    }
    Ok(Expr::sum(parts))
}

/// A coordinate field `d/dq^i` on `E`.
pub fn translation(i: usize) -> VectorField {
    VectorField::coordinate(Role::OnE, Symbol::q(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{compose_pi10, JetContext};
    use std::collections::BTreeMap;

    fn wave3() -> Lagrangian {
        let ctx = JetContext::new(3, 1).unwrap().with_order(2).unwrap();
        Lagrangian::parse(ctx, "1/2*(v1_1^2 - v1_2^2 - v1_3^2)").unwrap()
    }

    fn field(l: &Lagrangian, role: Role, comps: &[(Symbol, &str)]) -> VectorField {
        let map: BTreeMap<Symbol, Expr> = comps.iter().map(|(s, t)| (s.clone(), l.ctx().parse(t).unwrap())).collect();
        VectorField::new(role, map).unwrap()
    }

    #[test]
    fn rotation_is_variational() {
        let l = wave3();
        let x = field(&l, Role::OnE, &[(Symbol::x(2), "-x3"), (Symbol::x(3), "x2")]);
        let c = is_variational_symmetry(&x, &l).unwrap();
        assert!(c.holds(), "residual {}", c.residual);
        let g = noether_current_variational(&x, &l).unwrap();
        assert!(g.onshell_divergence(&l).unwrap().vanishes_on_shell());
        let ctx = l.ctx();
        assert_eq!(*g.get(1), ctx.parse("x3*v1_1*v1_2 - x2*v1_1*v1_3").unwrap());
    }

    #[test]
    fn scaling_is_not_variational() {
        let ctx = JetContext::new(1, 1).unwrap().with_order(2).unwrap();
        let l = Lagrangian::parse(ctx.clone(), "1/2*v1_1^2").unwrap();
        let x = field(&l, Role::OnE, &[(Symbol::q(1), "q1")]);
        let c = is_variational_symmetry(&x, &l).unwrap();
        assert_eq!(c.residual, ctx.parse("v1_1^2").unwrap());
        assert_eq!(c.numeric, Some(Verdict::ProvablyUnequal));
    }

    #[test]
    fn wave_generalized_symmetry() {
        let l = wave3();
        let x = field(&l, Role::AlongPi10, &[(Symbol::q(1), "v1_1")]);
        let ctx = l.ctx();
        let f = FluxPotential::new(
            3,
            vec![
                ctx.parse("-v1_2^2 - v1_3^2").unwrap(),
                ctx.parse("v1_1*v1_2").unwrap(),
                ctx.parse("v1_1*v1_3").unwrap(),
            ],
        )
        .unwrap();
        let env = NumericEnv::default();
        let c = is_generalized_symmetry(&x, &f, &l, Some((7, &env))).unwrap();
        assert!(c.holds(), "remainder {}", c.decomposition.remainder);
        let cert = c.certificate.unwrap();
        assert_eq!(cert.points, CERTIFICATE_POINTS);
        assert!(cert.passed(), "{cert:?}");
        let g = noether_current_generalized(&x, &f, &l).unwrap();
        let expected = ["-v1_2^2 - v1_3^2 - v1_1^2", "2*v1_1*v1_2", "2*v1_1*v1_3"];
        for (a, e) in expected.iter().enumerate() {
            assert_eq!(*g.get(a + 1), ctx.parse(e).unwrap());
        }
        assert!(g.onshell_divergence(&l).unwrap().vanishes_on_shell());

        let zero = is_generalized_symmetry(&x, &FluxPotential::zero(3), &l, None).unwrap();
        assert!(!zero.holds());
    }

    #[test]
    fn translation_currents() {
        let ctx = JetContext::new(2, 1).unwrap().with_order(2).unwrap();
        let l = Lagrangian::parse(ctx.clone(), "1/2*(v1_1^2 + v1_2^2)").unwrap();
        let x = translation(1);
        let g = noether_current_variational(&x, &l).unwrap();
        assert_eq!(g.components(), &[ctx.v(1, 1), ctx.v(1, 2)]);
        let p = noether_current_prop600(&x, &[Expr::zero(), Expr::zero()], &l).unwrap();
        assert!(p.hypothesis_holds());
        assert_eq!(p.current.components(), &[-ctx.v(1, 1), -ctx.v(1, 2)]);
        let gen = noether_current_generalized(&compose_pi10(&x).unwrap(), &FluxPotential::zero(2), &l).unwrap();
        assert_eq!(gen.components(), p.current.components());
        let d = gen.onshell_divergence(&l).unwrap();
        assert!(d.vanishes_on_shell());
        assert_eq!(d.multipliers, vec![Expr::int(-1)]);
    }

    #[test]
    fn variational_and_composed_currents_coincide_for_vertical_fields() {
        let l = wave3();
        let x = field(&l, Role::OnE, &[(Symbol::q(1), "x1*q1 + x2^2")]);
        let a = noether_current_variational(&x, &l).unwrap();
        let b = cartan_contractions(&l, &compose_pi10(&x).unwrap()).unwrap();
        assert_eq!(a.components(), b.as_slice());
    }

    #[test]
    fn identity_residual_vanishes() {
        let l = wave3();
        let x = field(&l, Role::AlongPi10, &[(Symbol::q(1), "v1_1")]);
        assert!(check_iden00(&x, &l).unwrap().is_zero());
        assert!(check_iden00(&VectorField::zero(Role::AlongPi10), &l).unwrap().is_zero());
    }

    #[test]
    fn rejects_wrong_roles() {
        let l = wave3();
        let x = field(&l, Role::AlongPi10, &[(Symbol::x(1), "1")]);
        assert!(matches!(check_iden00(&x, &l), Err(SymmetryError::Geometry(GeometryError::NonVertical(_)))));
        assert!(is_variational_symmetry(&x, &l).is_err());
        let bad = CurrentVector::new(3, vec![l.ctx().a(1, 1, 1), Expr::zero(), Expr::zero()], Provenance::UserSupplied);
        assert!(matches!(bad, Err(SymmetryError::SecondJet { .. })));
    }
}
