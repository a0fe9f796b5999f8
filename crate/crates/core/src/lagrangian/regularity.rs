use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{JetContext, SopdeTable};
use crate::linalg::{invert_rational, weighted_min_norm};
use crate::symcore::{
    with_surrogates, Compiled, Expr, Functions, Point, Rational, Sampling, Symbol, NUMERIC_TOLERANCE, SAMPLE_RADIUS,
};

use super::{Lagrangian, LagrangianError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    SymbolicRegular,
    NumericallyRegular,
    Singular,
}

impl Regularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Regularity::SymbolicRegular => "symbolic-regular",
            Regularity::NumericallyRegular => "numerically-regular",
            Regularity::Singular => "singular",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub verdict: Regularity,
    /// Symbolic Hessian determinant, when the Hessian was small enough to expand.
    pub determinant: Option<Expr>,
    /// Smallest `|det|` over the numeric samples (NaN when none were taken).
    pub min_abs_det: f64,
    pub samples: usize,
}

/// Largest Hessian size for which the determinant is expanded symbolically.
const SYMBOLIC_DET_LIMIT: usize = 6;

/// Determinant by dynamic programming over column subsets.
fn determinant(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    let mut table = vec![Expr::zero(); 1 << n];
    table[0] = Expr::one();
    for mask in 0usize..(1 << n) {
        if table[mask].is_zero() {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row == n {
            continue;
        }
        for (col, entry) in m[row].iter().enumerate() {
            if mask & (1 << col) != 0 || entry.is_zero() {
                continue;
            }
            let inversions = (mask >> (col + 1)).count_ones();
            let term = entry * &table[mask];
            let term = if inversions % 2 == 1 { -term } else { term };
            let next = mask | (1 << col);
            table[next] = &table[next] + &term;
        }
    }
    table[(1 << n) - 1].clone()
}

/// Unknown second-jet slots and their weights in the symmetric Frobenius norm.
fn unknowns(ctx: &JetContext) -> (Vec<Symbol>, Vec<f64>) {
    let slots = ctx.second_jets();
    let weights = slots
        .iter()
        .map(|s| match s {
            Symbol::SecondJet { alpha, beta, .. } if alpha != beta => 2.0,
            _ => 1.0,
        })
        .collect();
    (slots, weights)
}

/// Numeric second-order field at a point.
#[derive(Debug, Clone)]
pub struct SopdeSolution {
    k: usize,
    n: usize,
    /// Minimum-norm values of the second-jet slots (`alpha <= beta`), in context order.
    pub slots: Vec<(Symbol, f64)>,
    /// Dimension of the affine solution space.
    pub kernel_dim: usize,
    /// Kernel basis vectors over the slots.
    pub kernel: Vec<Vec<f64>>,
    pub residual: f64,
    pub condition: f64,
}

impl SopdeSolution {
    /// `Gamma^i_{alpha beta}`, symmetric in `alpha, beta`.
    pub fn get(&self, i: usize, alpha: usize, beta: usize) -> f64 {
        let s = Symbol::second_jet(i, alpha, beta);
        self.slots.iter().find(|(t, _)| *t == s).map(|(_, v)| *v).expect("slot in range")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl Lagrangian {
    /// Classifies the velocity Hessian as regular or singular.
    pub fn regularity(&self, sampling: Sampling, fns: &Functions) -> Result<RegularityReport, LagrangianError> {
        let hessian = self.hessian()?;
        let size = hessian.len();
        let det = (size <= SYMBOLIC_DET_LIMIT).then(|| determinant(&hessian));
        if let Some(d) = &det {
            if d.is_zero() {
                return Ok(RegularityReport {
                    verdict: Regularity::Singular,
                    determinant: det,
                    min_abs_det: 0.0,
                    samples: 0,
                });
            }
            if let Some(c) = d.as_constant() {
                let value = num_traits::ToPrimitive::to_f64(&c).unwrap_or(f64::NAN);
                return Ok(RegularityReport {
                    verdict: Regularity::SymbolicRegular,
                    determinant: det,
                    min_abs_det: value.abs(),
                    samples: 0,
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
        let flat: Vec<&Expr> = hessian.iter().flatten().collect();
        let fns = with_surrogates(&flat, fns, &mut rng);
        let symbols: BTreeSet<Symbol> = flat.iter().flat_map(|e| e.free_symbols()).collect();
        let slots: Vec<Symbol> = symbols.into_iter().collect();
        let compiled: Vec<Compiled> = flat.iter().map(|e| Compiled::new(e, &slots, &fns)).collect::<Result<_, _>>()?;
        let mut values = vec![0.0; slots.len()];
        let mut min_abs = f64::INFINITY;
        let mut samples = 0;
        for _ in 0..sampling.trials.saturating_mul(10) {
            if samples == sampling.trials {
                break;
            }
            for v in values.iter_mut() {
                *v = rng.random_range(-SAMPLE_RADIUS..SAMPLE_RADIUS);
            }
            let Ok(entries) = compiled.iter().map(|c| c.eval(&values)).collect::<Result<Vec<f64>, _>>() else {
                continue;
            };
            samples += 1;
            let d = DMatrix::from_row_slice(size, size, &entries).determinant();
            min_abs = min_abs.min(d.abs());
        }
        let verdict = if samples > 0 && min_abs > NUMERIC_TOLERANCE {
            Regularity::NumericallyRegular
        } else {
            Regularity::Singular
        };
        Ok(RegularityReport {
            verdict,
            determinant: det,
            min_abs_det: if samples == 0 { f64::NAN } else { min_abs },
            samples,
        })
    }

    /// Minimum-norm symmetric solution `Gamma^i_{alpha beta}` of the Euler-Lagrange
    /// equations solved for the second-jet coordinates at a first-jet point.
    pub fn sopde_coefficients_at(&self, pt: &Point, fns: &Functions) -> Result<SopdeSolution, LagrangianError> {
        let ctx = self.ctx();
        let el = self.euler_lagrange()?;
        let (slots, weights) = unknowns(ctx);
        let names: Vec<Symbol> = pt.keys().cloned().collect();
        let values: Vec<f64> = pt.values().copied().collect();
        let n = ctx.n();
        let mut m = DMatrix::zeros(n, slots.len());
        let mut b = DVector::zeros(n);
        for (row, e) in el.expressions.iter().enumerate() {
            let (coeffs, rest) = e.linear_split(&Symbol::is_second_jet)?;
            for (col, s) in slots.iter().enumerate() {
                if let Some(c) = coeffs.get(s) {
                    m[(row, col)] = Compiled::new(c, &names, fns)?.eval(&values)?;
                }
            }
            b[row] = -Compiled::new(&rest, &names, fns)?.eval(&values)?;
        }
        let sol = weighted_min_norm(&m, &b, &weights).map_err(LagrangianError::Singular)?;
        if sol.residual >= 1e-10 {
            return Err(LagrangianError::Residual(sol.residual));
        }
        let kernel = (0..sol.kernel.ncols()).map(|c| sol.kernel.column(c).iter().copied().collect()).collect();
        Ok(SopdeSolution {
            k: ctx.k(),
            n,
            slots: slots.into_iter().zip(sol.x.iter().copied()).collect(),
            kernel_dim: sol.kernel.ncols(),
            kernel,
            residual: sol.residual,
            condition: sol.condition,
        })
    }
}

/// Exact minimum-norm symmetric second-order field of a Lagrangian whose
/// Euler-Lagrange equations have constant second-jet coefficients.
pub fn canonical_sopde(l: &Lagrangian) -> Result<SopdeTable, LagrangianError> {
    let ctx = l.ctx();
    let el = l.euler_lagrange()?;
    let (slots, weights) = unknowns(ctx);
    let n = ctx.n();
    let mut m: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut rhs: Vec<Expr> = Vec::with_capacity(n);
    for e in &el.expressions {
        let (coeffs, rest) = e.linear_split(&Symbol::is_second_jet)?;
        let mut row = Vec::with_capacity(slots.len());
        for s in &slots {
            let c = coeffs.get(s).cloned().unwrap_or_else(Expr::zero);
            row.push(c.as_constant().ok_or_else(|| LagrangianError::NonConstantHessian(c.to_string()))?);
        }
        m.push(row);
        rhs.push(-rest);
    }
    let w_inv: Vec<Rational> = weights.iter().map(|w| Rational::new(1.into(), (*w as i64).into())).collect();
    let gram: Vec<Vec<Rational>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    (0..slots.len())
                        .fold(Rational::from_integer(0.into()), |acc, j| acc + &m[r][j] * &w_inv[j] * &m[c][j])
                })
                .collect()
        })
        .collect();
    let inv = invert_rational(&gram).ok_or(LagrangianError::Singular(crate::linalg::LinalgError::Singular {
        rank: 0,
        needed: n,
        condition: f64::INFINITY,
    }))?;
    // y = gram^{-1} rhs, a = W^{-1} M^T y
    let y: Vec<Expr> = (0..n).map(|r| Expr::sum((0..n).map(|c| rhs[c].scale(&inv[r][c])))).collect();
    let mut table = SopdeTable::zero(ctx);
    for (j, s) in slots.iter().enumerate() {
        let value = Expr::sum((0..n).map(|r| y[r].scale(&(&m[r][j] * &w_inv[j]))));
        if let Symbol::SecondJet { i, alpha, beta } = s {
            table.set(*i, *alpha, *beta, value.clone());
            table.set(*i, *beta, *alpha, value);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag(k: usize, n: usize, text: &str) -> Lagrangian {
        let ctx = JetContext::new(k, n).unwrap().with_order(2).unwrap();
        Lagrangian::parse(ctx, text).unwrap()
    }

    #[test]
    fn determinant_expansion() {
        let m = vec![
            vec![Expr::int(2), Expr::int(1), Expr::int(0)],
            vec![Expr::int(1), Expr::int(3), Expr::int(1)],
            vec![Expr::int(0), Expr::int(1), Expr::int(4)],
        ];
        assert_eq!(determinant(&m), Expr::int(18));
    }

    #[test]
    fn regularity_verdicts() {
        let s = Sampling::default();
        let fns = Functions::new();
        let wave = lag(3, 1, "1/2*(v1_1^2 - v1_2^2 - v1_3^2)");
        let r = wave.regularity(s, &fns).unwrap();
        assert_eq!(r.verdict, Regularity::SymbolicRegular);
        assert_eq!(r.determinant, Some(Expr::one()));
        assert_eq!(lag(1, 1, "v1_1").regularity(s, &fns).unwrap().verdict, Regularity::Singular);
        let ms = lag(2, 1, "sqrt(1 + v1_1^2 + v1_2^2)").regularity(s, &fns).unwrap();
        assert_eq!(ms.verdict, Regularity::NumericallyRegular);
    }

    #[test]
    fn oscillator_field() {
        let l = lag(1, 1, "1/2*v1_1^2 - 1/2*q1^2");
        let pt: Point = [(Symbol::x(1), 0.3), (Symbol::q(1), 0.7), (Symbol::v(1, 1), -1.1)].into_iter().collect();
        let s = l.sopde_coefficients_at(&pt, &Functions::new()).unwrap();
        assert!((s.get(1, 1, 1) + 0.7).abs() < 1e-12);
        assert_eq!(s.kernel_dim, 0);
        let t = canonical_sopde(&l).unwrap();
        assert_eq!(*t.get(1, 1, 1), -l.ctx().q(1));
    }

    #[test]
    fn wave_field_is_underdetermined() {
        let l = lag(3, 1, "1/2*(v1_1^2 - v1_2^2 - v1_3^2)");
        let pt: Point = l.ctx().coordinates(1).into_iter().map(|s| (s, 0.5)).collect();
        let s = l.sopde_coefficients_at(&pt, &Functions::new()).unwrap();
        assert_eq!(s.kernel_dim, 5);
        assert!((s.get(1, 1, 1) - s.get(1, 2, 2) - s.get(1, 3, 3)).abs() < 1e-10);
        let singular = lag(1, 1, "v1_1");
        let pt: Point = singular.ctx().coordinates(1).into_iter().map(|s| (s, 0.5)).collect();
        assert!(matches!(singular.sopde_coefficients_at(&pt, &Functions::new()), Err(LagrangianError::Singular(_))));
    }
}
