use std::collections::BTreeMap;

use crate::symcore::{Expr, Symbol};

use super::error::GeometryError;
use super::fields::{Role, VectorField};
use super::jet::contact_value;
use super::JetContext;

/// A k-vector field `(Gamma_1, ..., Gamma_k)` on `J^1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KVectorField {
    fields: Vec<VectorField>,
}

impl KVectorField {
    pub fn new(fields: Vec<VectorField>) -> Result<Self, GeometryError> {
        if let Some(f) = fields.iter().find(|f| f.role() != Role::OnJ1) {
            return Err(GeometryError::RoleMismatch { expected: "fields on J1".into(), found: f.role() });
        }
        Ok(KVectorField { fields })
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    /// `Gamma_alpha`, 1-based.
    pub fn field(&self, alpha: usize) -> &VectorField {
        &self.fields[alpha - 1]
    }
}

/// Second-order coefficients `Gamma^i_{alpha beta}`, indexed `[i][alpha][beta]` (1-based accessors).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SopdeTable {
    k: usize,
    n: usize,
    coeffs: Vec<Expr>,
}

impl SopdeTable {
    pub fn zero(ctx: &JetContext) -> Self {
        SopdeTable { k: ctx.k(), n: ctx.n(), coeffs: vec![Expr::zero(); ctx.n() * ctx.k() * ctx.k()] }
    }

    /// Builds the table from `f(i, alpha, beta)`.
    pub fn from_fn(ctx: &JetContext, mut f: impl FnMut(usize, usize, usize) -> Expr) -> Self {
        let mut t = SopdeTable::zero(ctx);
        for i in 1..=t.n {
            for a in 1..=t.k {
                for b in 1..=t.k {
                    t.set(i, a, b, f(i, a, b));
                }
            }
        }
        t
    }

    fn index(&self, i: usize, alpha: usize, beta: usize) -> usize {
        assert!((1..=self.n).contains(&i) && (1..=self.k).contains(&alpha) && (1..=self.k).contains(&beta));
        ((i - 1) * self.k + (alpha - 1)) * self.k + (beta - 1)
    }

    pub fn get(&self, i: usize, alpha: usize, beta: usize) -> &Expr {
        &self.coeffs[self.index(i, alpha, beta)]
    }

    pub fn set(&mut self, i: usize, alpha: usize, beta: usize, value: Expr) {
        let idx = self.index(i, alpha, beta);
        self.coeffs[idx] = value;
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// `Gamma_alpha = d/dx^alpha + v^i_alpha d/dq^i + Gamma^i_{alpha beta} d/dv^i_beta`.
pub fn sopde_from_coefficients(ctx: &JetContext, table: &SopdeTable) -> Result<KVectorField, GeometryError> {
    let mut fields = Vec::with_capacity(ctx.k());
    for alpha in 1..=ctx.k() {
        let mut comps = BTreeMap::new();
        comps.insert(Symbol::x(alpha), Expr::one());
        for i in 1..=ctx.n() {
            comps.insert(Symbol::q(i), ctx.v(i, alpha));
            for beta in 1..=ctx.k() {
                comps.insert(Symbol::v(i, beta), table.get(i, alpha, beta).clone());
            }
        }
        fields.push(VectorField::new(Role::OnJ1, comps)?);
    }
    KVectorField::new(fields)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SopdeCheck {
    pub holds: bool,
    /// `dx^alpha(Gamma_beta) - delta^alpha_beta`, indexed `[alpha-1][beta-1]`.
    pub dx_residual: Vec<Vec<Expr>>,
    /// `delta q^i(Gamma_beta)`, indexed `[i-1][beta-1]`.
    pub contact_residual: Vec<Vec<Expr>>,
}

pub fn is_sopde(ctx: &JetContext, gamma: &KVectorField) -> Result<SopdeCheck, GeometryError> {
    if gamma.fields().len() != ctx.k() {
        return Err(GeometryError::Shape { expected: ctx.k(), found: gamma.fields().len() });
    }
    let dx_residual: Vec<Vec<Expr>> = (1..=ctx.k())
        .map(|a| {
            (1..=ctx.k())
                .map(|b| {
                    let c = gamma.field(b).x_component(a);
                    if a == b {
                        c - Expr::one()
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();
    let contact_residual: Vec<Vec<Expr>> =
        (1..=ctx.n()).map(|i| (1..=ctx.k()).map(|b| contact_value(ctx, i, gamma.field(b))).collect()).collect();
    let holds = dx_residual.iter().chain(contact_residual.iter()).flatten().all(Expr::is_zero);
    Ok(SopdeCheck { holds, dx_residual, contact_residual })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutatorResidual {
    /// `Gamma^i_{alpha beta} - Gamma^i_{beta alpha}`, as a table.
    pub symmetry: SopdeTable,
    /// `Gamma_alpha(Gamma^i_{beta gamma}) - Gamma_beta(Gamma^i_{alpha gamma})`, keyed `(i, alpha, beta, gamma)`.
    pub integrability: BTreeMap<(usize, usize, usize, usize), Expr>,
}

impl CommutatorResidual {
    pub fn vanishes(&self) -> bool {
        self.symmetry.coeffs.iter().all(Expr::is_zero) && self.integrability.values().all(Expr::is_zero)
    }
}

/// Residuals whose vanishing is equivalent to `[Gamma_alpha, Gamma_beta] = 0`.
pub fn sopde_commutator_residual(ctx: &JetContext, table: &SopdeTable) -> Result<CommutatorResidual, GeometryError> {
    let gamma = sopde_from_coefficients(ctx, table)?;
    let symmetry = SopdeTable::from_fn(ctx, |i, a, b| table.get(i, a, b) - table.get(i, b, a));
    let mut integrability = BTreeMap::new();
    for i in 1..=ctx.n() {
        for a in 1..=ctx.k() {
            for b in 1..=ctx.k() {
                for c in 1..=ctx.k() {
                    let r = gamma.field(a).apply(table.get(i, b, c))? - gamma.field(b).apply(table.get(i, a, c))?;
                    integrability.insert((i, a, b, c), r);
                }
            }
        }
    }
    Ok(CommutatorResidual { symmetry, integrability })
}
