use crate::geometry::JetContext;
use crate::symcore::{Compiled, Expr, Functions, Point, Symbol};

use super::{GridSpec, NumError};

/// Values of a section's jet at one base point. `a` is stored for `alpha <= beta` only.
#[derive(Debug, Clone, PartialEq)]
pub struct JetValues {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    /// `v[i][alpha]`, 0-based.
    pub v: Vec<Vec<f64>>,
    /// `a[i][alpha][beta]`, 0-based, symmetric; empty when only the first jet was taken.
    pub a: Vec<Vec<Vec<f64>>>,
}

impl JetValues {
    /// Values in the slot order of `JetContext::coordinates(order)`.
    pub fn flat(&self, order: usize) -> Vec<f64> {
        let mut out: Vec<f64> = self.x.iter().chain(&self.q).copied().collect();
        if order >= 1 {
            out.extend(self.v.iter().flatten());
        }
        if order >= 2 {
            for ai in &self.a {
                for (alpha, row) in ai.iter().enumerate() {
                    out.extend(&row[alpha..]);
                }
            }
        }
        out
    }

    pub fn to_point(&self, ctx: &JetContext, order: usize) -> Point {
        ctx.coordinates(order).into_iter().zip(self.flat(order)).collect()
    }
}

/// A section `x -> q(x)` given in closed form.
#[derive(Debug, Clone)]
pub struct AnalyticSection {
    k: usize,
    components: Vec<Expr>,
    value: Vec<Compiled>,
    first: Vec<Vec<Compiled>>,
    second: Vec<Vec<Vec<Compiled>>>,
}

impl AnalyticSection {
    /// `components[i]` is `q^{i+1}` as an expression in `x1..xk` only.
    pub fn new(ctx: &JetContext, components: Vec<Expr>) -> Result<Self, NumError> {
        if components.len() != ctx.n() {
            return Err(NumError::Section(format!("expected {} components, got {}", ctx.n(), components.len())));
        }
        let k = ctx.k();
        let xs = ctx.independents();
        let none = Functions::new();
        let mut value = Vec::new();
        let mut first = Vec::new();
        let mut second = Vec::new();
        for c in &components {
            if let Some(s) = c.free_symbols().into_iter().find(|s| !s.is_independent()) {
                return Err(NumError::Section(format!("section depends on `{s}`, not only on base coordinates")));
            }
            if !c.opaque_functions().is_empty() {
                return Err(NumError::Section(format!("section `{c}` uses an opaque function")));
            }
            value.push(Compiled::new(c, &xs, &none)?);
            let mut d1 = Vec::with_capacity(k);
            let mut d2 = Vec::with_capacity(k);
            for alpha in 1..=k {
                let da = c.diff(&Symbol::x(alpha))?;
                let mut row = Vec::with_capacity(k);
                for beta in 1..=k {
                    row.push(Compiled::new(&da.diff(&Symbol::x(beta))?, &xs, &none)?);
                }
                d1.push(Compiled::new(&da, &xs, &none)?);
                d2.push(row);
            }
            first.push(d1);
            second.push(d2);
        }
        Ok(AnalyticSection { k, components, value, first, second })
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn jet_at(&self, x: &[f64], order: usize) -> Result<JetValues, NumError> {
        if x.len() != self.k {
            return Err(NumError::Section(format!("base point has {} coordinates, expected {}", x.len(), self.k)));
        }
        let q = self.value.iter().map(|c| c.eval(x)).collect::<Result<_, _>>()?;
        let v = if order >= 1 {
            self.first
                .iter()
                .map(|row| row.iter().map(|c| c.eval(x)).collect::<Result<_, _>>())
                .collect::<Result<_, _>>()?
        } else {
            Vec::new()
        };
        let a = if order >= 2 {
            self.second
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|row| row.iter().map(|c| c.eval(x)).collect::<Result<_, _>>())
                        .collect::<Result<_, _>>()
                })
                .collect::<Result<_, _>>()?
        } else {
            Vec::new()
        };
        Ok(JetValues { x: x.to_vec(), q, v, a })
    }
}

/// A section sampled on a uniform grid; derivatives by second-order central differences.
#[derive(Debug, Clone)]
pub struct GridSection {
    grid: GridSpec,
    /// `values[i][flat]`.
    values: Vec<Vec<f64>>,
}

impl GridSection {
    pub fn new(grid: GridSpec, values: Vec<Vec<f64>>) -> Result<Self, NumError> {
        for (i, v) in values.iter().enumerate() {
            if v.len() != grid.len() {
                return Err(NumError::Section(format!(
                    "component {} has {} samples, grid has {}",
                    i + 1,
                    v.len(),
                    grid.len()
                )));
            }
        }
        Ok(GridSection { grid, values })
    }

    /// Samples `section` at every grid point.
    pub fn sample(section: &AnalyticSection, grid: GridSpec) -> Result<Self, NumError> {
        let mut values = vec![Vec::with_capacity(grid.len()); section.components.len()];
        for f in 0..grid.len() {
            let x = grid.coordinates(&grid.unflatten(f));
            for (i, c) in section.value.iter().enumerate() {
                values[i].push(c.eval(&x)?);
            }
        }
        Ok(GridSection { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn jet_at(&self, idx: &[usize], order: usize) -> Result<JetValues, NumError> {
        let g = &self.grid;
        if !g.is_interior(idx, order) {
            return Err(NumError::Margin { index: idx.to_vec(), margin: order });
        }
        let k = g.dim();
        let f = g.flatten(idx);
        let h: Vec<f64> = (0..k).map(|a| g.spacing(a)).collect();
        let s: Vec<usize> = (0..k).map(|a| g.stride(a)).collect();
        let q: Vec<f64> = self.values.iter().map(|c| c[f]).collect();
        let mut v = Vec::new();
        let mut a = Vec::new();
        if order >= 1 {
            v = self
                .values
                .iter()
                .map(|c| (0..k).map(|al| (c[f + s[al]] - c[f - s[al]]) / (2.0 * h[al])).collect())
                .collect();
        }
        if order >= 2 {
            a = self
                .values
                .iter()
                .map(|c| {
                    (0..k)
                        .map(|al| {
                            (0..k)
                                .map(|be| {
                                    if al == be {
                                        (c[f + s[al]] - 2.0 * c[f] + c[f - s[al]]) / (h[al] * h[al])
                                    } else {
                                        (c[f + s[al] + s[be]] - c[f + s[al] - s[be]] - c[f - s[al] + s[be]]
                                            + c[f - s[al] - s[be]])
                                            / (4.0 * h[al] * h[be])
                                    }
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
        }
        Ok(JetValues { x: g.coordinates(idx), q, v, a })
    }
}

#[derive(Debug, Clone)]
pub enum SolutionSection {
    Analytic(AnalyticSection),
    Grid(GridSection),
}

impl SolutionSection {
    /// Points of `grid` that a jet of `order` can be taken at.
    pub fn margin(&self, order: usize) -> usize {
        match self {
            SolutionSection::Analytic(_) => 0,
            SolutionSection::Grid(_) => order,
        }
    }

    pub fn jet_at_index(&self, grid: &GridSpec, idx: &[usize], order: usize) -> Result<JetValues, NumError> {
        match self {
            SolutionSection::Analytic(s) => s.jet_at(&grid.coordinates(idx), order),
            SolutionSection::Grid(s) => {
                if s.grid() != grid {
                    return Err(NumError::Grid("grid differs from the one the section was sampled on".into()));
                }
                s.jet_at(idx, order)
            }
        }
    }

    /// The grid a sampled section lives on; analytic sections use `fallback`.
    pub fn grid_or<'a>(&'a self, fallback: &'a GridSpec) -> &'a GridSpec {
        match self {
            SolutionSection::Analytic(_) => fallback,
            SolutionSection::Grid(s) => s.grid(),
        }
    }
}

/// Where to evaluate a prolongation.
#[derive(Debug, Clone)]
pub enum Location<'a> {
    Coordinates(&'a [f64]),
    Index(&'a GridSpec, &'a [usize]),
}

/// `j^order phi` at a base point, as a point in jet coordinates.
pub fn jet_prolong_numeric(
    ctx: &JetContext,
    section: &SolutionSection,
    at: Location<'_>,
    order: usize,
) -> Result<Point, NumError> {
    if order > 2 {
        return Err(NumError::Section(format!("jets of order {order} are not supported")));
    }
    let jet = match (section, at) {
        (SolutionSection::Analytic(s), Location::Coordinates(x)) => s.jet_at(x, order)?,
        (s, Location::Index(g, idx)) => s.jet_at_index(g, idx, order)?,
        (SolutionSection::Grid(_), Location::Coordinates(_)) => {
            return Err(NumError::Section("grid sections are evaluated by grid index".into()))
        }
    };
    Ok(jet.to_point(ctx, order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> JetContext {
        JetContext::new(2, 1).unwrap().with_order(2).unwrap()
    }

    #[test]
    fn analytic_jet_matches_hand_derivatives() {
        let c = ctx();
        let s = AnalyticSection::new(&c, vec![c.parse("x1^2*x2 + sin(x2)").unwrap()]).unwrap();
        let j = s.jet_at(&[1.5, 0.5], 2).unwrap();
        assert!((j.q[0] - (2.25 * 0.5 + 0.5f64.sin())).abs() < 1e-14);
        assert!((j.v[0][0] - 1.5).abs() < 1e-14);
        assert!((j.v[0][1] - (2.25 + 0.5f64.cos())).abs() < 1e-14);
        assert!((j.a[0][0][1] - 3.0).abs() < 1e-14);
        assert!((j.a[0][1][1] + 0.5f64.sin()).abs() < 1e-14);
        let pt = jet_prolong_numeric(&c, &SolutionSection::Analytic(s), Location::Coordinates(&[1.5, 0.5]), 2).unwrap();
        assert_eq!(pt.len(), 2 + 1 + 2 + 3);
        assert!((pt[&Symbol::second_jet(1, 1, 2)] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_sections_with_jet_symbols() {
        let c = ctx();
        assert!(AnalyticSection::new(&c, vec![c.parse("q1 + x1").unwrap()]).is_err());
    }

    #[test]
    fn grid_differences_are_exact_on_quadratics() {
        let c = ctx();
        let s = AnalyticSection::new(&c, vec![c.parse("x1^2 + 3*x1*x2 - x2^2").unwrap()]).unwrap();
        let g = GridSpec::cube(2, -1.0, 1.0, 9).unwrap();
        let gs = GridSection::sample(&s, g.clone()).unwrap();
        let j = gs.jet_at(&[4, 3], 2).unwrap();
        let x = g.coordinates(&[4, 3]);
        assert!((j.v[0][0] - (2.0 * x[0] + 3.0 * x[1])).abs() < 1e-12);
        assert!((j.a[0][0][1] - 3.0).abs() < 1e-12);
        assert!((j.a[0][1][1] + 2.0).abs() < 1e-12);
        assert!(matches!(gs.jet_at(&[1, 4], 2), Err(NumError::Margin { .. })));
        assert!(gs.jet_at(&[1, 4], 1).is_ok());
    }
}
