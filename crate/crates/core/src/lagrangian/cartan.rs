use crate::geometry::{contact_form, volume_form, volume_minor, DiffForm};
use crate::symcore::{Expr, Symbol};

use super::{Lagrangian, LagrangianError};

/// Poincare-Cartan forms of a Lagrangian.
#[derive(Debug, Clone)]
pub struct CartanData {
    /// `Theta^alpha_L`, one per independent variable.
    pub one_forms: Vec<DiffForm>,
    /// `Omega^alpha_L = -d Theta^alpha_L`.
    pub two_forms: Vec<DiffForm>,
}

/// The Cartan k-form built two ways.
#[derive(Debug, Clone)]
pub struct CartanKForm {
    /// `Theta^alpha_L ^ d^{k-1}x_alpha + (1-k) L d^k x`.
    pub from_one_forms: DiffForm,
    /// `p^alpha_i delta q^i ^ d^{k-1}x_alpha + L d^k x`.
    pub local: DiffForm,
}

impl CartanKForm {
    pub fn agrees(&self) -> bool {
        self.from_one_forms == self.local
    }
}

/// Energy and the k-cosymplectic data of a Lagrangian.
#[derive(Debug, Clone)]
pub struct KCosymplectic {
    /// `E_L = v^i_alpha p^alpha_i - L`.
    pub energy: Expr,
    /// `theta^alpha_L = p^alpha_i dq^i`.
    pub theta: Vec<DiffForm>,
    /// `Delta^alpha_beta(L) = v^i_beta p^alpha_i`, indexed `[alpha-1][beta-1]`.
    pub delta: Vec<Vec<Expr>>,
    /// `omega^alpha_L = -d theta^alpha_L`.
    pub omega: Vec<DiffForm>,
}

/// Residuals of `Theta^alpha_L = theta^alpha_L + (delta^alpha_beta L - Delta^alpha_beta(L)) dx^beta`.
#[derive(Debug, Clone)]
pub struct Am21Check {
    pub residuals: Vec<DiffForm>,
}

impl Am21Check {
    pub fn holds(&self) -> bool {
        self.residuals.iter().all(DiffForm::is_zero)
    }
}

impl Lagrangian {
    /// `Theta^alpha_L = p^alpha_i delta q^i + L dx^alpha`.
    pub fn cartan_one_forms(&self) -> Result<Vec<DiffForm>, LagrangianError> {
        let ctx = self.ctx();
        let contacts: Vec<DiffForm> = (1..=ctx.n()).map(|i| contact_form(ctx, i)).collect();
        (1..=ctx.k())
            .map(|alpha| {
                let mut form = DiffForm::monomial(self.expr().clone(), vec![Symbol::x(alpha)])?;
                for (i, c) in contacts.iter().enumerate() {
                    form = form.add(&c.scale(self.momentum(i + 1, alpha)))?;
                }
                Ok(form)
            })
            .collect()
    }

    pub fn cartan_two_forms(&self) -> Result<Vec<DiffForm>, LagrangianError> {
        self.cartan_one_forms()?.iter().map(|t| Ok(t.exterior_derivative()?.scale(&Expr::int(-1)))).collect()
    }

    pub fn cartan_data(&self) -> Result<CartanData, LagrangianError> {
        let one_forms = self.cartan_one_forms()?;
        let two_forms = one_forms
            .iter()
            .map(|t| Ok(t.exterior_derivative()?.scale(&Expr::int(-1))))
            .collect::<Result<_, LagrangianError>>()?;
        Ok(CartanData { one_forms, two_forms })
    }

    /// Builds the Cartan k-form from the one-forms and from its local expression.
    pub fn cartan_k_form(&self) -> Result<CartanKForm, LagrangianError> {
        let ctx = self.ctx();
        let k = ctx.k();
        if k > 4 {
            return Err(LagrangianError::KTooLarge(k));
        }
        let volume = volume_form(ctx);
        let minors: Vec<DiffForm> = (1..=k).map(|a| volume_minor(ctx, a)).collect();
        let thetas = self.cartan_one_forms()?;

        let mut from_one_forms = volume.scale(&(self.expr() * Expr::int(1 - k as i64)));
        for (theta, minor) in thetas.iter().zip(&minors) {
            from_one_forms = from_one_forms.add(&theta.wedge(minor))?;
        }

        let mut local = volume.scale(self.expr());
        for i in 1..=ctx.n() {
            let contact = contact_form(ctx, i);
            for (a, minor) in minors.iter().enumerate() {
                local = local.add(&contact.wedge(minor).scale(self.momentum(i, a + 1)))?;
            }
        }
        Ok(CartanKForm { from_one_forms, local })
    }

    pub fn energy(&self) -> Expr {
        let ctx = self.ctx();
        let mut parts = vec![-self.expr().clone()];
        for i in 1..=ctx.n() {
            for a in 1..=ctx.k() {
                parts.push(ctx.v(i, a) * self.momentum(i, a));
            }
        }
        Expr::sum(parts)
    }

    pub fn k_cosymplectic(&self) -> Result<KCosymplectic, LagrangianError> {
        let ctx = self.ctx();
        let (n, k) = (ctx.n(), ctx.k());
        let mut theta = Vec::with_capacity(k);
        let mut delta = Vec::with_capacity(k);
        for alpha in 1..=k {
            let mut form = DiffForm::zero(1);
            for i in 1..=n {
                form = form.add(&DiffForm::monomial(self.momentum(i, alpha).clone(), vec![Symbol::q(i)])?)?;
            }
            theta.push(form);
            delta.push(
                (1..=k).map(|beta| Expr::sum((1..=n).map(|i| ctx.v(i, beta) * self.momentum(i, alpha)))).collect(),
            );
        }
        let omega = theta
            .iter()
            .map(|t| Ok(t.exterior_derivative()?.scale(&Expr::int(-1))))
            .collect::<Result<_, LagrangianError>>()?;
        Ok(KCosymplectic { energy: self.energy(), theta, delta, omega })
    }

    pub fn check_am21(&self) -> Result<Am21Check, LagrangianError> {
        let ctx = self.ctx();
        let thetas = self.cartan_one_forms()?;
        let kc = self.k_cosymplectic()?;
        let mut residuals = Vec::with_capacity(ctx.k());
        for alpha in 1..=ctx.k() {
            let mut rhs = kc.theta[alpha - 1].clone();
            for beta in 1..=ctx.k() {
                let kron = if alpha == beta { self.expr().clone() } else { Expr::zero() };
                let coeff = kron - &kc.delta[alpha - 1][beta - 1];
                rhs = rhs.add(&DiffForm::monomial(coeff, vec![Symbol::x(beta)])?)?;
            }
            residuals.push(thetas[alpha - 1].sub(&rhs)?);
        }
        Ok(Am21Check { residuals })
    }
}
