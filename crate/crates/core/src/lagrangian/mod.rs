//! Objects derived from a first-order Lagrangian.

mod cartan;
mod regularity;

use thiserror::Error;

use crate::geometry::{contact_form, total_derivative_1, DiffForm, GeometryError, JetContext};
use crate::linalg::LinalgError;
use crate::symcore::{EvalError, Expr, ParseError, SymError, Symbol};

pub use cartan::{Am21Check, CartanData, CartanKForm, KCosymplectic};
pub use regularity::{canonical_sopde, Regularity, RegularityReport, SopdeSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LagrangianError {
    #[error("Lagrangian must not depend on second-jet coordinates: `{0}`")]
    SecondJet(String),
    #[error("symbol `{0}` is not declared in the context")]
    Undeclared(String),
    #[error("Cartan k-form is only built for k <= 4 (k = {0})")]
    KTooLarge(usize),
    #[error("Hessian is not constant, so no exact canonical second-order field exists: `{0}`")]
    NonConstantHessian(String),
    #[error("singular system for the second-order field: {0}")]
    Singular(#[source] LinalgError),
    #[error("linear system residual {0:e} exceeds 1e-10")]
    Residual(f64),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A Lagrangian `L` on `J^1` together with its momenta `dL/dv^i_alpha`.
#[derive(Debug, Clone)]
pub struct Lagrangian {
    ctx: JetContext,
    expr: Expr,
    momenta: Vec<Expr>,
}

impl Lagrangian {
    pub fn new(ctx: JetContext, expr: Expr) -> Result<Self, LagrangianError> {
        if expr.has_second_jet() {
            return Err(LagrangianError::SecondJet(expr.to_string()));
        }
        if let Some(s) = expr.free_symbols().into_iter().find(|s| !ctx.contains(s)) {
            return Err(LagrangianError::Undeclared(s.to_string()));
        }
        let mut momenta = Vec::with_capacity(ctx.n() * ctx.k());
        for i in 1..=ctx.n() {
            for alpha in 1..=ctx.k() {
                momenta.push(expr.diff(&Symbol::v(i, alpha))?);
            }
        }
        Ok(Lagrangian { ctx, expr, momenta })
    }

    pub fn parse(ctx: JetContext, text: &str) -> Result<Self, LagrangianError> {
        let expr = ctx.parse(text)?;
        Lagrangian::new(ctx, expr)
    }

    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// `p^alpha_i = dL/dv^i_alpha`.
    pub fn momentum(&self, i: usize, alpha: usize) -> &Expr {
        &self.momenta[(i - 1) * self.ctx.k() + (alpha - 1)]
    }

    /// `d^2 L / dv^j_alpha dv^i_beta`.
    pub fn hessian_entry(&self, j: usize, alpha: usize, i: usize, beta: usize) -> Result<Expr, SymError> {
        self.momentum(j, alpha).diff(&Symbol::v(i, beta))
    }

    /// The full `(nk) x (nk)` velocity Hessian, rows and columns ordered by `(i, alpha)`.
    pub fn hessian(&self) -> Result<Vec<Vec<Expr>>, SymError> {
        let (n, k) = (self.ctx.n(), self.ctx.k());
        let idx: Vec<(usize, usize)> = (1..=n).flat_map(|i| (1..=k).map(move |a| (i, a))).collect();
        idx.iter().map(|&(j, a)| idx.iter().map(|&(i, b)| self.hessian_entry(j, a, i, b)).collect()).collect()
    }

    /// `EL_i = T1_alpha(dL/dv^i_alpha) - dL/dq^i`, affine in second-jet coordinates.
    pub fn euler_lagrange(&self) -> Result<EulerLagrangeSystem, LagrangianError> {
        let ctx = &self.ctx;
        let mut expressions = Vec::with_capacity(ctx.n());
        for i in 1..=ctx.n() {
            let mut parts = Vec::with_capacity(ctx.k() + 1);
            for alpha in 1..=ctx.k() {
                parts.push(total_derivative_1(ctx, self.momentum(i, alpha), alpha)?);
            }
            parts.push(-self.expr.diff(&Symbol::q(i))?);
            expressions.push(Expr::sum(parts));
        }
        let mut form = DiffForm::zero(1);
        for (i, el) in expressions.iter().enumerate() {
            form = form.add(&contact_form(ctx, i + 1).scale(el))?;
        }
        Ok(EulerLagrangeSystem { expressions, form })
    }
}

/// The Euler-Lagrange expressions and the form `delta L = EL_i (dq^i - v^i_beta dx^beta)`.
#[derive(Debug, Clone)]
pub struct EulerLagrangeSystem {
    pub expressions: Vec<Expr>,
    pub form: DiffForm,
}

impl EulerLagrangeSystem {
    /// `EL_i`, 1-based.
    pub fn get(&self, i: usize) -> &Expr {
        &self.expressions[i - 1]
    }

    /// `EL_i` with second-jet coordinates replaced by the symmetric table `gamma`.
    pub fn on_table(&self, gamma: &crate::geometry::SopdeTable) -> Result<Vec<Expr>, SymError> {
        let mut map = std::collections::BTreeMap::new();
        for i in 1..=gamma.n() {
            for a in 1..=gamma.k() {
                for b in a..=gamma.k() {
                    map.insert(Symbol::second_jet(i, a, b), gamma.get(i, a, b).clone());
                }
            }
        }
        self.expressions.iter().map(|e| e.substitute(&map)).collect()
    }
}
