use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::JetContext;
use crate::lagrangian::Lagrangian;
use crate::symcore::{Compiled, Expr, Functions, Point, Symbol, SAMPLE_RADIUS};

use super::{GridSpec, JetValues, NumError, SolutionSection};

/// Numeric bindings shared by all checks: opaque functions and parameter values.
#[derive(Debug, Clone, Default)]
pub struct NumericEnv {
    pub functions: Functions,
    pub params: Point,
}

impl NumericEnv {
    pub fn new(functions: Functions, params: Point) -> Self {
        NumericEnv { functions, params }
    }

    fn slots(&self, ctx: &JetContext, order: usize) -> Vec<Symbol> {
        let mut s = ctx.coordinates(order);
        s.extend(self.params.keys().cloned());
        s
    }

    fn values(&self, jet: &JetValues, order: usize) -> Vec<f64> {
        let mut v = jet.flat(order);
        v.extend(self.params.values());
        v
    }

    fn compile(&self, ctx: &JetContext, exprs: &[Expr], order: usize) -> Result<Vec<Compiled>, NumError> {
        let slots = self.slots(ctx, order);
        Ok(exprs.iter().map(|e| Compiled::new(e, &slots, &self.functions)).collect::<Result<_, _>>()?)
    }
}

/// Max and root-mean-square of a residual over the points it was taken at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub max_abs: f64,
    pub rms: f64,
    pub points: usize,
}

impl ResidualStats {
    fn from_values<'a>(values: impl Iterator<Item = &'a f64>) -> Self {
        let (mut max_abs, mut sq, mut points) = (0.0f64, 0.0, 0usize);
        for v in values {
            max_abs = max_abs.max(v.abs());
            sq += v * v;
            points += 1;
        }
        let rms = if points == 0 { 0.0 } else { (sq / points as f64).sqrt() };
        ResidualStats { max_abs, rms, points }
    }
}

/// `max_i |EL_i(j^2 phi)|` at each interior grid point.
#[derive(Debug, Clone)]
pub struct ElResidual {
    pub stats: ResidualStats,
    /// `(flat index, max_i |EL_i|)` in grid order.
    pub samples: Vec<(usize, f64)>,
}

pub fn el_residual(
    l: &Lagrangian,
    section: &SolutionSection,
    grid: &GridSpec,
    env: &NumericEnv,
) -> Result<ElResidual, NumError> {
    let ctx = l.ctx();
    let el = l.euler_lagrange()?;
    let compiled = env.compile(ctx, &el.expressions, 2)?;
    let grid = section.grid_or(grid);
    let points = grid.interior(section.margin(2));
    let samples = points
        .into_par_iter()
        .map(|f| {
            let jet = section.jet_at_index(grid, &grid.unflatten(f), 2)?;
            let vals = env.values(&jet, 2);
            let mut worst = 0.0f64;
            for c in &compiled {
                worst = worst.max(c.eval(&vals)?.abs());
            }
            Ok((f, worst))
        })
        .collect::<Result<Vec<_>, NumError>>()?;
    let stats = ResidualStats::from_values(samples.iter().map(|(_, v)| v));
    Ok(ElResidual { stats, samples })
}

/// `sum_alpha d/dx^alpha (G^alpha(j^1 phi))` by central differences.
#[derive(Debug, Clone)]
pub struct Divergence {
    pub stats: ResidualStats,
    pub samples: Vec<(usize, f64)>,
}

/// Evaluates `f(j^1 phi)` for each expression at every grid point where the
/// first jet exists. Points outside the section's margin are `NaN`.
fn current_on_grid(
    ctx: &JetContext,
    exprs: &[Expr],
    section: &SolutionSection,
    grid: &GridSpec,
    env: &NumericEnv,
) -> Result<Vec<Vec<f64>>, NumError> {
    let compiled = env.compile(ctx, exprs, 1)?;
    let margin = section.margin(1);
    let rows = (0..grid.len())
        .into_par_iter()
        .map(|f| {
            let idx = grid.unflatten(f);
            if !grid.is_interior(&idx, margin) {
                return Ok(vec![f64::NAN; compiled.len()]);
            }
            let jet = section.jet_at_index(grid, &idx, 1)?;
            let vals = env.values(&jet, 1);
            compiled.iter().map(|c| Ok(c.eval(&vals)?)).collect::<Result<Vec<f64>, NumError>>()
        })
        .collect::<Result<Vec<_>, NumError>>()?;
    let mut out = vec![Vec::with_capacity(grid.len()); exprs.len()];
    for row in rows {
        for (a, v) in row.into_iter().enumerate() {
            out[a].push(v);
        }
    }
    Ok(out)
}

pub fn divergence_of_current(
    ctx: &JetContext,
    current: &[Expr],
    section: &SolutionSection,
    grid: &GridSpec,
    env: &NumericEnv,
) -> Result<Divergence, NumError> {
    let k = ctx.k();
    if current.len() != k {
        return Err(NumError::Section(format!("current has {} components, expected {k}", current.len())));
    }
    let grid = section.grid_or(grid);
    let g = current_on_grid(ctx, current, section, grid, env)?;
    let h: Vec<f64> = (0..k).map(|a| grid.spacing(a)).collect();
    let s: Vec<usize> = (0..k).map(|a| grid.stride(a)).collect();
    let samples: Vec<(usize, f64)> = grid
        .interior(section.margin(1) + 1)
        .into_par_iter()
        .map(|f| {
            let div = (0..k).map(|a| (g[a][f + s[a]] - g[a][f - s[a]]) / (2.0 * h[a])).sum();
            (f, div)
        })
        .collect();
    let stats = ResidualStats::from_values(samples.iter().map(|(_, v)| v));
    Ok(Divergence { stats, samples })
}

/// `Q(t) = integral of G^t over the slice x^t = t`, trapezoid rule.
#[derive(Debug, Clone)]
pub struct ChargeReport {
    pub times: Vec<f64>,
    pub charges: Vec<f64>,
    /// `max_t |Q(t) - Q(t_0)|`.
    pub drift: f64,
    /// `drift / (1 + |Q(t_0)|)`.
    pub relative_drift: f64,
}

/// Integrates the time component of `current` over each slice orthogonal to
/// axis `time` (1-based). Analytic sections use the full slice; sampled ones
/// the part of it where the first jet exists.
pub fn charge_over_slice(
    ctx: &JetContext,
    current: &[Expr],
    section: &SolutionSection,
    grid: &GridSpec,
    time: usize,
    env: &NumericEnv,
) -> Result<ChargeReport, NumError> {
    if time == 0 || time > ctx.k() || current.len() != ctx.k() {
        return Err(NumError::Section(format!("time axis {time} or current length {} out of range", current.len())));
    }
    let grid = section.grid_or(grid);
    let t = time - 1;
    let g = current_on_grid(ctx, &current[t..=t], section, grid, env)?.remove(0);
    let margin = section.margin(1);
    let lo = margin;
    let hi_t = grid.points(t) - margin;
    let mut sums = vec![0.0; grid.points(t)];
    for (f, value) in g.iter().enumerate() {
        let idx = grid.unflatten(f);
        if !grid.is_interior(&idx, margin) {
            continue;
        }
        let mut w = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            if a == t {
                continue;
            }
            let end = i == lo || i + 1 + margin == grid.points(a);
            w *= grid.spacing(a) * if end { 0.5 } else { 1.0 };
        }
        sums[idx[t]] += w * value;
    }
    let times: Vec<f64> = (lo..hi_t).map(|i| grid.coordinate(t, i)).collect();
    let charges: Vec<f64> = sums[lo..hi_t].to_vec();
    let q0 = charges[0];
    let drift = charges.iter().map(|q| (q - q0).abs()).fold(0.0, f64::max);
    Ok(ChargeReport { times, charges, drift, relative_drift: drift / (1.0 + q0.abs()) })
}

/// Draws `count` points of `J^1` uniformly from the sampling box, completed with parameter values.
pub fn random_first_jet_points(ctx: &JetContext, env: &NumericEnv, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut pt: Point =
                ctx.coordinates(1).into_iter().map(|s| (s, rng.random_range(-SAMPLE_RADIUS..SAMPLE_RADIUS))).collect();
            pt.extend(env.params.iter().map(|(s, v)| (s.clone(), *v)));
            pt
        })
        .collect()
}

/// Bound for `|EL_i|` at every returned on-shell point.
pub const ONSHELL_TOLERANCE: f64 = 1e-9;

/// Completes a first-jet point to `draws` points on the Euler-Lagrange
/// submanifold of `J^2`: the minimum-norm second-jet solution first, then
/// seeded combinations of kernel vectors with coefficients in `[-1, 1]`.
pub fn sample_onshell(
    l: &Lagrangian,
    base: &Point,
    draws: usize,
    seed: u64,
    env: &NumericEnv,
) -> Result<Vec<Point>, NumError> {
    let ctx = l.ctx();
    let mut base = base.clone();
    base.extend(env.params.iter().map(|(s, v)| (s.clone(), *v)));
    let sol = l.sopde_coefficients_at(&base, &env.functions)?;
    let el = l.euler_lagrange()?;
    let mut slots: Vec<Symbol> = ctx.coordinates(2);
    slots.extend(env.params.keys().cloned());
    let compiled: Vec<Compiled> =
        el.expressions.iter().map(|e| Compiled::new(e, &slots, &env.functions)).collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(draws);
    for d in 0..draws {
        let mut a: Vec<f64> = sol.slots.iter().map(|(_, v)| *v).collect();
        if d > 0 {
            for kv in &sol.kernel {
                let c: f64 = rng.random_range(-1.0..=1.0);
                for (x, y) in a.iter_mut().zip(kv) {
                    *x += c * y;
                }
            }
        }
        let mut pt = base.clone();
        for ((s, _), v) in sol.slots.iter().zip(&a) {
            pt.insert(s.clone(), *v);
        }
        let vals: Vec<f64> = slots
            .iter()
            .map(|s| pt.get(s).copied().ok_or_else(|| NumError::Section(format!("no value for `{s}`"))))
            .collect::<Result<_, _>>()?;
        for c in &compiled {
            let r = c.eval(&vals)?;
            if r.is_nan() || r.abs() >= ONSHELL_TOLERANCE {
                return Err(NumError::OffShell(r));
            }
        }
        out.push(pt);
    }
    Ok(out)
}

/// Writes per-point samples as CSV: base coordinates followed by `value_names`.
pub fn write_samples_csv<W: Write>(
    writer: W,
    grid: &GridSpec,
    coordinate_names: &[String],
    value_names: &[&str],
    rows: impl IntoIterator<Item = (usize, Vec<f64>)>,
) -> Result<(), NumError> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<&str> = coordinate_names.iter().map(String::as_str).chain(value_names.iter().copied()).collect();
    w.write_record(&header)?;
    for (f, values) in rows {
        let record: Vec<String> =
            grid.coordinates(&grid.unflatten(f)).iter().chain(&values).map(|v| format!("{v:.17e}")).collect();
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| NumError::Csv(e.to_string()))?;
    Ok(())
}
