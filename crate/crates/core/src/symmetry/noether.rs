use crate::geometry::{prolong_on_e, DiffForm, Role, VectorField};
use crate::lagrangian::Lagrangian;
use crate::symcore::{Base, Expr, Symbol};

use super::{require_role, FluxPotential, SymmetryError};

/// Result of integrating `L_{X^1} theta^alpha = dF^alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FluxRecovery {
    Recovered(FluxPotential),
    /// The homotopy integral of a closed polynomial form did not reproduce it.
    NonIntegrable {
        alpha: usize,
        residual: DiffForm,
    },
    /// Coefficients are not polynomial; `closedness` is `d(L_{X^1} theta^alpha)`.
    Unsupported {
        alpha: usize,
        closedness: DiffForm,
    },
    /// `L_{X^1} omega^alpha` does not vanish, so no potential exists.
    NotAttempted,
}

#[derive(Debug, Clone)]
pub struct NoetherCheck {
    pub prolongation: VectorField,
    /// `L_{X^1} omega^alpha_L`.
    pub lie_omega: Vec<DiffForm>,
    /// `i_{X^1} dx^alpha`.
    pub dx_contractions: Vec<Expr>,
    /// `X^1(E_L)`.
    pub energy_residual: Expr,
    pub flux: FluxRecovery,
}

impl NoetherCheck {
    pub fn holds(&self) -> bool {
        self.lie_omega.iter().all(DiffForm::is_zero)
            && self.dx_contractions.iter().all(Expr::is_zero)
            && self.energy_residual.is_zero()
    }
}

/// Checks invariance of `omega^alpha_L`, `dx^alpha` and `E_L` under the first
/// prolongation of a field on `E`, and recovers the potentials `F^alpha` with
/// `dF^alpha = L_{X^1} theta^alpha_L` when the coefficients are polynomial.
pub fn is_noether_symmetry(x: &VectorField, l: &Lagrangian) -> Result<NoetherCheck, SymmetryError> {
    require_role(x, Role::OnE, "a field on E")?;
    let ctx = l.ctx();
    let x1 = prolong_on_e(ctx, x)?;
    let kc = l.k_cosymplectic()?;
    let lie_omega = kc.omega.iter().map(|w| w.lie_derivative(&x1)).collect::<Result<Vec<_>, _>>()?;
    let dx_contractions = (1..=ctx.k()).map(|a| x1.x_component(a)).collect();
    let energy_residual = x1.apply(&kc.energy)?;

    let flux = if lie_omega.iter().all(DiffForm::is_zero) && x.is_vertical() {
        let mut comps = Vec::with_capacity(ctx.k());
        let mut outcome = None;
        for (a, theta) in kc.theta.iter().enumerate() {
            let eta = theta.lie_derivative(&x1)?;
            match integrate_closed_one_form(&eta)? {
                Ok(f) => comps.push(f),
                Err(fail) => {
                    outcome = Some(match fail {
                        IntegrationFailure::NotPolynomial => {
                            FluxRecovery::Unsupported { alpha: a + 1, closedness: eta.exterior_derivative()? }
                        }
                        IntegrationFailure::Mismatch(residual) => {
                            FluxRecovery::NonIntegrable { alpha: a + 1, residual }
                        }
                    });
                    break;
                }
            }
        }
        match outcome {
            Some(o) => o,
            None => FluxRecovery::Recovered(FluxPotential::new(ctx.k(), comps)?),
        }
    } else {
        FluxRecovery::NotAttempted
    };
    Ok(NoetherCheck { prolongation: x1, lie_omega, dx_contractions, energy_residual, flux })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntegrationFailure {
    NotPolynomial,
    /// `dF - eta` for the candidate `F`.
    Mismatch(DiffForm),
}

/// Potential `F` with `dF = eta` for a one-form with polynomial coefficients,
/// by the radial homotopy `F = sum_j integral_0^1 eta_j(t z) z^j dt`.
///
/// Each monomial `c z^m` in `eta_j` contributes `c z^m z^j / (deg + 1)`, with
/// the degree counted over coordinates only (parameters are constants).
pub fn integrate_closed_one_form(eta: &DiffForm) -> Result<Result<Expr, IntegrationFailure>, SymmetryError> {
    assert_eq!(eta.degree(), 1, "homotopy integration is for one-forms");
    let mut parts = Vec::new();
    for (basis, coeff) in eta.terms() {
        if !coeff.is_polynomial() {
            return Ok(Err(IntegrationFailure::NotPolynomial));
        }
        let z = Expr::symbol(basis[0].clone());
        for (m, c) in coeff.terms() {
            let degree: i64 = m
                .factors()
                .filter(|(b, _)| matches!(b, Base::Symbol(s) if !matches!(s, Symbol::Param(_))))
                .map(|(_, e)| num_traits::ToPrimitive::to_i64(&e.to_integer()).expect("small exponent"))
                .sum();
            let term = Expr::from_monomial(m).scale(&(c / crate::symcore::int(degree + 1)));
            parts.push(term * &z);
        }
    }
    let f = Expr::sum(parts);
    let residual = DiffForm::scalar(f.clone()).exterior_derivative()?.sub(eta)?;
    Ok(if residual.is_zero() { Ok(f) } else { Err(IntegrationFailure::Mismatch(residual)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{compose_pi10, JetContext};
    use crate::symmetry::{is_generalized_symmetry, translation};

    fn free(k: usize) -> Lagrangian {
        let ctx = JetContext::new(k, 1).unwrap().with_order(2).unwrap();
        let body: Vec<String> = (1..=k).map(|a| format!("v1_{a}^2")).collect();
        Lagrangian::parse(ctx, &format!("1/2*({})", body.join(" + "))).unwrap()
    }

    #[test]
    fn translation_is_noether_with_zero_flux() {
        let l = free(3);
        let c = is_noether_symmetry(&translation(1), &l).unwrap();
        assert!(c.holds());
        assert_eq!(c.flux, FluxRecovery::Recovered(FluxPotential::zero(3)));
    }

    #[test]
    fn scaling_breaks_energy() {
        let l = free(1);
        let x = VectorField::coordinate(Role::OnE, Symbol::q(1)).scale(&l.ctx().q(1));
        let c = is_noether_symmetry(&x, &l).unwrap();
        assert!(!c.holds());
        assert_eq!(c.energy_residual, l.ctx().parse("v1_1^2").unwrap());
    }

    #[test]
    fn horizontal_component_fails_dx_condition() {
        let l = free(2);
        let x = VectorField::coordinate(Role::OnE, Symbol::x(1)).scale(&l.ctx().x(2));
        let c = is_noether_symmetry(&x, &l).unwrap();
        assert!(!c.dx_contractions[0].is_zero());
        assert!(!c.holds());
    }

    #[test]
    fn homotopy_inverts_d_on_polynomials() {
        let ctx = JetContext::new(2, 1).unwrap();
        let f = ctx.parse("x1^2*q1 - 3*v1_2*x2 + 5").unwrap();
        let eta = DiffForm::scalar(f.clone()).exterior_derivative().unwrap();
        let g = integrate_closed_one_form(&eta).unwrap().unwrap();
        assert_eq!(g, &f - &Expr::int(5));
        let not_closed = DiffForm::monomial(ctx.x(2), vec![Symbol::x(1)]).unwrap();
        assert!(matches!(integrate_closed_one_form(&not_closed).unwrap(), Err(IntegrationFailure::Mismatch(_))));
    }

    #[test]
    fn recovered_flux_makes_a_generalized_symmetry() {
        // theta = (v + q) dq, so L_X theta = dq for X = d/dq and F = q.
        let ctx = JetContext::new(1, 1).unwrap().with_order(2).unwrap();
        let l = Lagrangian::parse(ctx.clone(), "1/2*v1_1^2 + q1*v1_1").unwrap();
        let x = translation(1);
        let c = is_noether_symmetry(&x, &l).unwrap();
        assert!(c.holds());
        let FluxRecovery::Recovered(f) = &c.flux else { panic!("{:?}", c.flux) };
        assert_eq!(f.components(), &[ctx.q(1)]);
        let g = is_generalized_symmetry(&compose_pi10(&x).unwrap(), f, &l, None).unwrap();
        assert!(g.residual.is_zero());
    }
}
