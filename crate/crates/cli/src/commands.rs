use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde_json::{json, Value};

use jetcartan::geometry::compose_pi10;
use jetcartan::numcheck::{charge_over_slice, divergence_of_current, el_residual, write_samples_csv, SolutionSection};
use jetcartan::symcore::{Expr, Sampling};
use jetcartan::symmetry::{
    is_generalized_symmetry, is_noether_symmetry, is_variational_symmetry, noether_current_generalized,
    noether_current_prop600, noether_current_variational, CurrentVector, FluxRecovery, Provenance,
};

use crate::problem::{NamedField, Problem, SymmetryKind};
use crate::report::{self, Report};
use crate::CliError;

fn engine(e: impl std::fmt::Display) -> CliError {
    CliError::Engine(e.to_string())
}

pub fn derive(p: &Problem, seed: u64) -> Result<Report, CliError> {
    let l = &p.lagrangian;
    let ctx = l.ctx();
    let mut r = Report::new("derive", &p.digest, seed);
    r.symbolic("lagrangian", report::expr(l.expr()));
    r.symbolic("euler_lagrange", report::exprs(&l.euler_lagrange().map_err(engine)?.expressions));
    let momenta: Vec<Value> = (1..=ctx.k()).map(|a| report::exprs((1..=ctx.n()).map(|i| l.momentum(i, a)))).collect();
    r.symbolic("momenta", Value::Array(momenta));
    let cartan = l.cartan_data().map_err(engine)?;
    r.symbolic("cartan_one_forms", report::forms(&cartan.one_forms));
    r.symbolic("cartan_two_forms", report::forms(&cartan.two_forms));
    let kc = l.k_cosymplectic().map_err(engine)?;
    r.symbolic("energy", report::expr(&kc.energy));
    r.symbolic("theta", report::forms(&kc.theta));
    r.symbolic("omega", report::forms(&kc.omega));

    let reg = l.regularity(Sampling { trials: 100, seed }, &p.env.functions).map_err(engine)?;
    r.symbolic(
        "regularity",
        json!({
            "verdict": reg.verdict.as_str(),
            "determinant": reg.determinant.as_ref().map(|d| d.to_string()),
            "min_abs_det": reg.min_abs_det,
            "samples": reg.samples,
        }),
    );

    let am21 = l.check_am21().map_err(engine)?;
    let detail = (!am21.holds()).then(|| {
        let nonzero: Vec<String> = am21.residuals.iter().filter(|w| !w.is_zero()).map(|w| w.to_string()).collect();
        format!("residuals {}", nonzero.join("; "))
    });
    r.verdict("cartan-one-form-decomposition", am21.holds(), detail);
    match l.cartan_k_form() {
        Ok(kf) => {
            let detail = (!kf.agrees()).then(|| {
                format!("difference {}", kf.from_one_forms.sub(&kf.local).map(|d| d.to_string()).unwrap_or_default())
            });
            r.verdict("cartan-k-form", kf.agrees(), detail);
        }
        Err(e) => r.warn(format!("Cartan k-form not checked: {e}")),
    }
    Ok(r)
}

fn field_selector(r: &mut Report, name: &str, f: &NamedField) {
    r.select("field", name);
    r.select("symmetry", f.kind.as_str());
}

pub fn check_symmetry(p: &Problem, name: &str, seed: u64) -> Result<Report, CliError> {
    let f = p.field(name)?;
    let l = &p.lagrangian;
    let mut r = Report::new("check-symmetry", &p.digest, seed);
    field_selector(&mut r, name, f);
    r.symbolic("field", report::field(&f.field));
    match f.kind {
        SymmetryKind::Variational => {
            let c = is_variational_symmetry(&f.field, l).map_err(engine)?;
            r.symbolic("prolongation", report::field(&c.prolongation));
            r.symbolic("residual", report::expr(&c.residual));
            if let Some(v) = c.numeric {
                r.numeric("residual_vs_zero", json!({ "verdict": v.as_str() }));
            }
            if c.velocity_dependent {
                r.warn("field components depend on first-jet coordinates; the prolongation treats them as constants");
            }
            let detail = (!c.holds()).then(|| format!("residual {}", c.residual));
            r.verdict("variational-symmetry", c.holds(), detail);
        }
        SymmetryKind::Generalized => {
            let x = &f.field;
            let numeric_ok = !p.needs_symbolic_only(&[l.expr()]);
            if !numeric_ok {
                r.warn("opaque functions without numeric definitions; on-shell certificate skipped");
            }
            let certify = numeric_ok.then_some((seed, &p.env));
            let c = is_generalized_symmetry(x, &f.flux, l, certify).map_err(engine)?;
            r.symbolic("flux", report::exprs(f.flux.components()));
            r.symbolic("residual", report::expr(&c.residual));
            r.symbolic("multipliers", report::exprs(&c.decomposition.multipliers));
            r.symbolic("remainder", report::expr(&c.decomposition.remainder));
            if let Some(cert) = &c.certificate {
                r.numeric(
                    "on_shell_certificate",
                    json!({
                        "seed": cert.seed,
                        "points": cert.points,
                        "skipped": cert.skipped,
                        "max_scaled_residual": cert.max_scaled,
                        "passed": cert.passed(),
                    }),
                );
            }
            let detail = (!c.holds()).then(|| format!("remainder {}", c.decomposition.remainder));
            r.verdict("generalized-symmetry", c.holds(), detail);
        }
        SymmetryKind::Noether => {
            let c = is_noether_symmetry(&f.field, l).map_err(engine)?;
            r.symbolic("prolongation", report::field(&c.prolongation));
            r.symbolic("lie_derivative_omega", report::forms(&c.lie_omega));
            r.symbolic("dx_contractions", report::exprs(&c.dx_contractions));
            r.symbolic("energy_residual", report::expr(&c.energy_residual));
            r.symbolic("flux", flux_recovery(&c.flux));
            r.verdict("noether-symmetry", c.holds(), None);
        }
        SymmetryKind::Divergence => {
            let g = f.divergence.as_deref().expect("validated on load");
            let c = noether_current_prop600(&f.field, g, l).map_err(engine)?;
            r.symbolic("divergence", report::exprs(g));
            r.symbolic("residual", report::expr(&c.hypothesis_residual));
            let detail = (!c.hypothesis_holds()).then(|| format!("residual {}", c.hypothesis_residual));
            r.verdict("divergence-symmetry", c.hypothesis_holds(), detail);
        }
    }
    Ok(r)
}

fn flux_recovery(f: &FluxRecovery) -> Value {
    match f {
        FluxRecovery::Recovered(p) => json!({ "status": "recovered", "components": report::exprs(p.components()) }),
        FluxRecovery::NonIntegrable { alpha, residual } => {
            json!({ "status": "non-integrable", "alpha": alpha, "residual": report::form(residual) })
        }
        FluxRecovery::Unsupported { alpha, closedness } => {
            json!({ "status": "unsupported", "alpha": alpha, "closedness": report::form(closedness) })
        }
        FluxRecovery::NotAttempted => json!({ "status": "not-attempted" }),
    }
}

/// Builds the current of a named field, recording the hypothesis it rests on.
fn synthesize(p: &Problem, name: &str, r: &mut Report) -> Result<CurrentVector, CliError> {
    let f = p.field(name)?;
    let l = &p.lagrangian;
    field_selector(r, name, f);
    match f.kind {
        SymmetryKind::Variational => {
            let c = is_variational_symmetry(&f.field, l).map_err(engine)?;
            r.verdict("variational-symmetry", c.holds(), (!c.holds()).then(|| format!("residual {}", c.residual)));
            noether_current_variational(&f.field, l).map_err(engine)
        }
        SymmetryKind::Generalized => {
            r.symbolic("flux", report::exprs(f.flux.components()));
            noether_current_generalized(&f.field, &f.flux, l).map_err(engine)
        }
        SymmetryKind::Divergence => {
            let c = noether_current_prop600(&f.field, f.divergence.as_deref().expect("validated on load"), l)
                .map_err(engine)?;
            let detail = (!c.hypothesis_holds()).then(|| format!("residual {}", c.hypothesis_residual));
            r.verdict("divergence-symmetry", c.hypothesis_holds(), detail);
            Ok(c.current)
        }
        SymmetryKind::Noether => {
            let c = is_noether_symmetry(&f.field, l).map_err(engine)?;
            r.verdict("noether-symmetry", c.holds(), None);
            r.symbolic("flux", flux_recovery(&c.flux));
            match &c.flux {
                FluxRecovery::Recovered(flux) => {
                    let x = compose_pi10(&f.field).map_err(engine)?;
                    noether_current_generalized(&x, flux, l).map_err(engine)
                }
                other => Err(CliError::Engine(format!("no flux potential for `{name}`: {}", flux_recovery(other)))),
            }
        }
    }
}

pub fn noether(p: &Problem, name: &str, seed: u64) -> Result<Report, CliError> {
    let mut r = Report::new("noether", &p.digest, seed);
    let g = synthesize(p, name, &mut r)?;
    r.symbolic("provenance", Value::String(g.provenance().as_str().into()));
    r.symbolic("current", report::exprs(g.components()));
    let d = g.onshell_divergence(&p.lagrangian).map_err(engine)?;
    r.symbolic("divergence_multipliers", report::exprs(&d.multipliers));
    r.symbolic("divergence_remainder", report::expr(&d.remainder));
    let detail = (!d.vanishes_on_shell()).then(|| format!("remainder {}", d.remainder));
    r.verdict("on-shell-conservation", d.vanishes_on_shell(), detail);
    Ok(r)
}

pub struct VerifyArgs<'a> {
    pub current: &'a str,
    pub solution: &'a str,
    pub grid: &'a str,
    pub time_axis: usize,
    pub csv: Option<&'a Path>,
}

pub fn verify(p: &Problem, args: &VerifyArgs<'_>, seed: u64) -> Result<Report, CliError> {
    let ctx = p.ctx();
    let mut r = Report::new("verify", &p.digest, seed);
    let (current, provenance): (Vec<Expr>, Provenance) = match p.currents.get(args.current) {
        Some(c) => {
            r.select("current", args.current);
            (c.clone(), Provenance::UserSupplied)
        }
        None => {
            let g = synthesize(p, args.current, &mut r)?;
            r.select("current", args.current);
            (g.components().to_vec(), g.provenance())
        }
    };
    r.select("solution", args.solution);
    r.select("grid", args.grid);
    r.symbolic("provenance", Value::String(provenance.as_str().into()));
    r.symbolic("current", report::exprs(&current));
    let section = SolutionSection::Analytic(p.solution(args.solution)?.clone());
    r.symbolic("solution", report::exprs(p.solution(args.solution)?.components()));
    let named = p.grid(args.grid)?;
    let grid = &named.spec;
    r.numeric("grid", report::grid(grid));
    let tol = p.tolerances;

    let mut uses: Vec<&Expr> = current.iter().collect();
    uses.push(p.lagrangian.expr());
    if p.needs_symbolic_only(&uses) {
        return Err(CliError::Engine("an opaque function used here has no numeric definition".into()));
    }

    let el = el_residual(&p.lagrangian, &section, grid, &p.env).map_err(engine)?;
    r.numeric("euler_lagrange", report::stats(&el.stats, tol.euler_lagrange));
    let solves = el.stats.max_abs < tol.euler_lagrange;
    r.verdict("euler-lagrange-residual", solves, Some(format!("max {:e}", el.stats.max_abs)));
    if !solves {
        r.warn("the section does not solve the field equations; the divergence below is not a conservation test");
    }

    let div = divergence_of_current(ctx, &current, &section, grid, &p.env).map_err(engine)?;
    r.numeric("divergence", report::stats(&div.stats, tol.divergence));
    r.verdict("divergence", div.stats.max_abs < tol.divergence, Some(format!("max {:e}", div.stats.max_abs)));

    if ctx.k() >= 2 {
        let q = charge_over_slice(ctx, &current, &section, grid, args.time_axis, &p.env).map_err(engine)?;
        r.numeric(
            "charge",
            json!({
                "time_axis": args.time_axis,
                "initial": q.charges[0],
                "drift": q.drift,
                "relative_drift": q.relative_drift,
                "tolerance": named.charge_tolerance,
            }),
        );
        if let Some(t) = named.charge_tolerance {
            r.verdict("charge-drift", q.relative_drift < t, Some(format!("relative {:e}", q.relative_drift)));
        }
    }

    if let Some(path) = args.csv {
        let el_at: BTreeMap<usize, f64> = el.samples.iter().copied().collect();
        let rows = div.samples.iter().map(|&(f, d)| (f, vec![el_at.get(&f).copied().unwrap_or(f64::NAN), d]));
        let file = File::create(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        let names = ctx.independent_names().to_vec();
        write_samples_csv(BufWriter::new(file), grid, &names, &["euler_lagrange", "divergence"], rows)
            .map_err(engine)?;
    }
    Ok(r)
}
