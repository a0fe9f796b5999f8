use crate::lagrangian::EulerLagrangeSystem;
use crate::symcore::{Expr, SymError, Symbol};

/// `e = sum_i multipliers[i] * EL_i + remainder`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnShellDecomposition {
    pub multipliers: Vec<Expr>,
    pub remainder: Expr,
}

impl OnShellDecomposition {
    /// `e` vanishes on every solution of the Euler-Lagrange equations.
    pub fn vanishes_on_shell(&self) -> bool {
        self.remainder.is_zero()
    }
}

fn pivot_cost(e: &Expr) -> (bool, usize) {
    (!e.is_constant(), e.term_count())
}

/// Decomposes `e` modulo the Euler-Lagrange expressions by matching the
/// coefficients of second-jet coordinates.
///
/// Multipliers that the coefficient match leaves undetermined are set to zero.
/// When the second-jet part of `e` is not in the span of the `EL_i`, the
/// unmatched part stays in the remainder.
pub fn onshell_residual(e: &Expr, el: &EulerLagrangeSystem) -> Result<OnShellDecomposition, SymError> {
    let n = el.expressions.len();
    let (target, _) = e.linear_split(&Symbol::is_second_jet)?;
    let mut rows_by_el = Vec::with_capacity(n);
    for expr in &el.expressions {
        rows_by_el.push(expr.linear_split(&Symbol::is_second_jet)?.0);
    }
    let mut slots: Vec<Symbol> = target.keys().cloned().collect();
    for r in &rows_by_el {
        slots.extend(r.keys().cloned());
    }
    slots.sort();
    slots.dedup();

    // One equation per slot: sum_i mu_i * M_i[s] = c[s].
    let mut rows: Vec<(Vec<Expr>, Expr)> = slots
        .iter()
        .map(|s| {
            let coeffs = rows_by_el.iter().map(|r| r.get(s).cloned().unwrap_or_else(Expr::zero)).collect();
            (coeffs, target.get(s).cloned().unwrap_or_else(Expr::zero))
        })
        .collect();

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next_row = 0;
    for col in 0..n {
        let best =
            (next_row..rows.len()).filter(|&r| !rows[r].0[col].is_zero()).min_by_key(|&r| pivot_cost(&rows[r].0[col]));
        let Some(p) = best else { continue };
        rows.swap(next_row, p);
        let pivot = rows[next_row].0[col].clone();
        let inv = pivot.recip()?;
        let (prow, prhs) = rows[next_row].clone();
        let prow: Vec<Expr> = prow.iter().map(|x| x * &inv).collect();
        let prhs = &prhs * &inv;
        rows[next_row] = (prow.clone(), prhs.clone());
        for (r, (row, rhs)) in rows.iter_mut().enumerate() {
            if r == next_row || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                *x = &*x - &(&f * y);
            }
            *rhs = &*rhs - &(&f * &prhs);
        }
        pivots.push((next_row, col));
        next_row += 1;
    }

    let mut multipliers = vec![Expr::zero(); n];
    for &(row, col) in &pivots {
        multipliers[col] = rows[row].1.clone();
    }
    let matched = Expr::sum(multipliers.iter().zip(&el.expressions).map(|(m, x)| m * x));
    let remainder = e - &matched;
    Ok(OnShellDecomposition { multipliers, remainder })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::JetContext;
    use crate::lagrangian::Lagrangian;

    fn wave() -> Lagrangian {
        let ctx = JetContext::new(3, 1).unwrap().with_order(2).unwrap();
        Lagrangian::parse(ctx, "1/2*(v1_1^2 - v1_2^2 - v1_3^2)").unwrap()
    }

    #[test]
    fn el_itself_decomposes() {
        let l = wave();
        let el = l.euler_lagrange().unwrap();
        let d = onshell_residual(el.get(1), &el).unwrap();
        assert_eq!(d.multipliers, vec![Expr::one()]);
        assert!(d.vanishes_on_shell());
        let scaled = el.get(1) * l.ctx().v(1, 1);
        let d = onshell_residual(&scaled, &el).unwrap();
        assert_eq!(d.multipliers, vec![l.ctx().v(1, 1)]);
        assert!(d.vanishes_on_shell());
    }

    #[test]
    fn off_shell_remainder_is_kept() {
        let l = wave();
        let el = l.euler_lagrange().unwrap();
        let e = l.ctx().parse("a1_12 + q1").unwrap();
        let d = onshell_residual(&e, &el).unwrap();
        assert!(!d.vanishes_on_shell());
        assert!(d.remainder.has_second_jet());
    }

    #[test]
    fn coupled_system() {
        let ctx = JetContext::new(2, 2).unwrap().with_order(2).unwrap();
        let l = Lagrangian::parse(ctx.clone(), "1/2*(v1_1^2 + v2_2^2) + v1_2*v2_1 + q1*q2").unwrap();
        let el = l.euler_lagrange().unwrap();
        let combo = el.get(1) * ctx.x(1) + el.get(2) * (ctx.q(1) + Expr::int(3));
        let d = onshell_residual(&combo, &el).unwrap();
        assert!(d.vanishes_on_shell(), "remainder {}", d.remainder);
        assert_eq!(d.multipliers[0], ctx.x(1));
    }
}
