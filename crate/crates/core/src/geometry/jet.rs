use std::collections::BTreeMap;

use crate::symcore::{Expr, Symbol};

use super::error::GeometryError;
use super::fields::{Role, VectorField};
use super::JetContext;

/// `d_{T0_alpha} f = df/dx^alpha + v^i_alpha df/dq^i`.
///
/// Meant for functions on `E`. First-jet dependence of `f` is not
/// differentiated (the operator only has `x`, `q` directions), which is the
/// convention used when prolonging velocity-dependent fields.
pub fn total_derivative_0(ctx: &JetContext, f: &Expr, alpha: usize) -> Result<Expr, GeometryError> {
    if f.has_second_jet() {
        return Err(GeometryError::OrderOverflow(f.to_string()));
    }
    let mut parts = vec![f.diff(&Symbol::x(alpha))?];
    for i in 1..=ctx.n() {
        let q = Symbol::q(i);
        if f.depends_on(&q) {
            parts.push(ctx.v(i, alpha) * f.diff(&q)?);
        }
    }
    Ok(Expr::sum(parts))
}

/// `d_{T1_alpha} f = df/dx^alpha + v^i_alpha df/dq^i + v^i_{alpha beta} df/dv^i_beta`
/// for `f` on `J^1`.
pub fn total_derivative_1(ctx: &JetContext, f: &Expr, alpha: usize) -> Result<Expr, GeometryError> {
    if f.has_second_jet() {
        return Err(GeometryError::OrderOverflow(f.to_string()));
    }
    let mut parts = vec![f.diff(&Symbol::x(alpha))?];
    for i in 1..=ctx.n() {
        let q = Symbol::q(i);
        if f.depends_on(&q) {
            parts.push(ctx.v(i, alpha) * f.diff(&q)?);
        }
        for beta in 1..=ctx.k() {
            let v = Symbol::v(i, beta);
            if f.depends_on(&v) {
                parts.push(ctx.a(i, alpha, beta) * f.diff(&v)?);
            }
        }
    }
    Ok(Expr::sum(parts))
}

/// `S^alpha(X) = (dq^i - v^i_beta dx^beta)(X) d/dv^i_alpha`.
pub fn vertical_endomorphism(ctx: &JetContext, alpha: usize, x: &VectorField) -> Result<VectorField, GeometryError> {
    if x.role() != Role::OnJ1 {
        return Err(GeometryError::RoleMismatch { expected: "a field on J1".into(), found: x.role() });
    }
    let mut comps = BTreeMap::new();
    for i in 1..=ctx.n() {
        comps.insert(Symbol::v(i, alpha), contact_value(ctx, i, x));
    }
    VectorField::new(Role::OnJ1, comps)
}

/// `delta q^i (X) = X^i - v^i_beta X_beta`.
pub fn contact_value(ctx: &JetContext, i: usize, x: &VectorField) -> Expr {
    let mut parts = vec![x.q_component(i)];
    for beta in 1..=ctx.k() {
        let xb = x.x_component(beta);
        if !xb.is_zero() {
            parts.push(-(ctx.v(i, beta) * xb));
        }
    }
    Expr::sum(parts)
}

/// First prolongation `X^1` of a field on `E`:
/// `d/dv^i_alpha` components `T0_alpha(X^i) - v^i_beta T0_alpha(X_beta)`.
pub fn prolong_on_e(ctx: &JetContext, x: &VectorField) -> Result<VectorField, GeometryError> {
    if x.role() != Role::OnE {
        return Err(GeometryError::RoleMismatch { expected: "a field on E".into(), found: x.role() });
    }
    let mut comps = x.components().clone();
    for alpha in 1..=ctx.k() {
        let dx: Vec<Expr> =
            (1..=ctx.k()).map(|beta| total_derivative_0(ctx, &x.x_component(beta), alpha)).collect::<Result<_, _>>()?;
        for i in 1..=ctx.n() {
            let mut parts = vec![total_derivative_0(ctx, &x.q_component(i), alpha)?];
            for (beta, d) in dx.iter().enumerate() {
                if !d.is_zero() {
                    parts.push(-(ctx.v(i, beta + 1) * d));
                }
            }
            comps.insert(Symbol::v(i, alpha), Expr::sum(parts));
        }
    }
    VectorField::new(Role::OnJ1, comps)
}

/// Prolongation `X^(1)` of a vertical field along `pi_{1,0}`:
/// `d/dv^i_alpha` components `T1_alpha(X^i)`.
pub fn prolong_along(ctx: &JetContext, x: &VectorField) -> Result<VectorField, GeometryError> {
    if x.role() != Role::AlongPi10 {
        return Err(GeometryError::RoleMismatch { expected: "a field along pi10".into(), found: x.role() });
    }
    if let Some(s) = x.components().keys().find(|s| s.is_independent()) {
        return Err(GeometryError::NonVertical(s.to_string()));
    }
    let mut comps = x.components().clone();
    for alpha in 1..=ctx.k() {
        for i in 1..=ctx.n() {
            comps.insert(Symbol::v(i, alpha), total_derivative_1(ctx, &x.q_component(i), alpha)?);
        }
    }
    VectorField::new(Role::AlongPi21, comps)
}

/// `X o pi_{1,0}`: a field on `E` viewed along the projection.
pub fn compose_pi10(x: &VectorField) -> Result<VectorField, GeometryError> {
    if x.role() != Role::OnE {
        return Err(GeometryError::RoleMismatch { expected: "a field on E".into(), found: x.role() });
    }
    x.with_role(Role::AlongPi10)
}

/// `X o pi_{2,1}`: a field on `J^1` viewed along the projection.
pub fn compose_pi21(x: &VectorField) -> Result<VectorField, GeometryError> {
    if x.role() != Role::OnJ1 {
        return Err(GeometryError::RoleMismatch { expected: "a field on J1".into(), found: x.role() });
    }
    x.with_role(Role::AlongPi21)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(role: Role, comps: &[(Symbol, Expr)]) -> VectorField {
        VectorField::new(role, comps.iter().cloned().collect()).unwrap()
    }

    #[test]
    fn total_derivatives_read_off() {
        let ctx = JetContext::new(2, 1).unwrap();
        let d = total_derivative_1(&ctx, &ctx.v(1, 1), 1).unwrap();
        assert_eq!(d, ctx.a(1, 1, 1));
        let q2 = &ctx.q(1) * &ctx.q(1);
        assert_eq!(total_derivative_0(&ctx, &q2, 1).unwrap(), Expr::int(2) * ctx.q(1) * ctx.v(1, 1));
        assert!(matches!(total_derivative_1(&ctx, &ctx.a(1, 1, 2), 1), Err(GeometryError::OrderOverflow(_))));
    }

    #[test]
    fn wave_momentum_total_derivative() {
        let ctx = JetContext::new(3, 1).unwrap();
        let l = ctx.parse("1/2*(v1_1^2 - v1_2^2 - v1_3^2)").unwrap();
        let p2 = l.diff(&Symbol::v(1, 2)).unwrap();
        assert_eq!(total_derivative_1(&ctx, &p2, 2).unwrap(), -ctx.a(1, 2, 2));
    }

    #[test]
    fn vertical_endomorphism_on_basis() {
        let ctx = JetContext::new(2, 2).unwrap();
        let s = vertical_endomorphism(&ctx, 2, &VectorField::coordinate(Role::OnJ1, Symbol::q(1))).unwrap();
        assert_eq!(s, VectorField::coordinate(Role::OnJ1, Symbol::v(1, 2)));
        let s = vertical_endomorphism(&ctx, 1, &VectorField::coordinate(Role::OnJ1, Symbol::x(2))).unwrap();
        let expected = field(Role::OnJ1, &[(Symbol::v(1, 1), -ctx.v(1, 2)), (Symbol::v(2, 1), -ctx.v(2, 2))]);
        assert_eq!(s, expected);
    }

    #[test]
    fn prolongations_of_simple_fields() {
        let ctx = JetContext::new(3, 1).unwrap();
        let dq = VectorField::coordinate(Role::OnE, Symbol::q(1));
        assert_eq!(prolong_on_e(&ctx, &dq).unwrap(), VectorField::coordinate(Role::OnJ1, Symbol::q(1)));

        let scaling = field(Role::OnE, &[(Symbol::q(1), ctx.q(1))]);
        let mut comps = vec![(Symbol::q(1), ctx.q(1))];
        comps.extend((1..=3).map(|a| (Symbol::v(1, a), ctx.v(1, a))));
        assert_eq!(prolong_on_e(&ctx, &scaling).unwrap(), field(Role::OnJ1, &comps));

        let rotation = field(Role::OnE, &[(Symbol::x(2), -ctx.x(3)), (Symbol::x(3), ctx.x(2))]);
        let x1 = prolong_on_e(&ctx, &rotation).unwrap();
        assert_eq!(x1.v_component(1, 2), -ctx.v(1, 3));
        assert_eq!(x1.v_component(1, 3), ctx.v(1, 2));
        assert!(x1.v_component(1, 1).is_zero());
    }

    #[test]
    fn prolong_along_velocity_field() {
        let ctx = JetContext::new(3, 1).unwrap().with_order(2).unwrap();
        let x = field(Role::AlongPi10, &[(Symbol::q(1), ctx.v(1, 1))]);
        let x1 = prolong_along(&ctx, &x).unwrap();
        for alpha in 1..=3 {
            assert_eq!(x1.v_component(1, alpha), ctx.a(1, 1, alpha));
        }
        let bad = field(Role::AlongPi10, &[(Symbol::x(1), Expr::one())]);
        assert!(matches!(prolong_along(&ctx, &bad), Err(GeometryError::NonVertical(_))));
    }
}
