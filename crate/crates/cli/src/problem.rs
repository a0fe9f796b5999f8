//! Problem files: a JSON document naming a context, a Lagrangian and the
//! fields, fluxes, currents, solutions and grids the commands refer to.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use jetcartan::geometry::{JetContext, Role, VectorField};
use jetcartan::lagrangian::Lagrangian;
use jetcartan::numcheck::{AnalyticSection, Axis, GridSpec, NumericEnv};
use jetcartan::symcore::{Expr, ExprFn, Functions, Point, Symbol};
use jetcartan::symmetry::FluxPotential;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub context: ContextSpec,
    /// Opaque functions. A definition in the formal variable `u` makes the
    /// function available to numeric checks; `null` keeps it symbolic only.
    #[serde(default)]
    pub functions: BTreeMap<String, Option<String>>,
    /// Named constants with the values used numerically.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub lagrangian: String,
    #[serde(default)]
    pub fields: BTreeMap<String, FieldSpec>,
    #[serde(default)]
    pub fluxes: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub currents: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub solutions: BTreeMap<String, SolutionSpec>,
    #[serde(default)]
    pub grids: BTreeMap<String, GridFile>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextSpec {
    pub k: usize,
    pub n: usize,
    #[serde(default)]
    pub independent: Vec<String>,
    #[serde(default)]
    pub dependent: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryKind {
    Variational,
    Generalized,
    Noether,
    /// Divergence symmetry `X^1(L) = T_alpha(g^alpha)` with the `g` given in `divergence`.
    Divergence,
}

impl SymmetryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymmetryKind::Variational => "variational",
            SymmetryKind::Generalized => "generalized",
            SymmetryKind::Noether => "noether",
            SymmetryKind::Divergence => "divergence",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub role: String,
    pub components: BTreeMap<String, String>,
    /// Defaults to `variational` on `E` and `generalized` along `pi10`.
    #[serde(default)]
    pub symmetry: Option<SymmetryKind>,
    /// Name of the flux potential for generalized symmetries; zero when absent.
    #[serde(default)]
    pub flux: Option<String>,
    #[serde(default)]
    pub divergence: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SolutionSpec {
    Scalar(String),
    Components(Vec<String>),
}

/// Either explicit `axes`, or `min`, `max` and `points` shared by every axis.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    #[serde(default)]
    pub axes: Option<Vec<AxisFile>>,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    /// Bound on the relative charge drift. Only meaningful on boxes where no
    /// flux leaves through the spatial faces, so it is set per grid; without
    /// it the drift is reported but not judged.
    #[serde(default)]
    pub charge_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisFile {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub euler_lagrange: f64,
    pub divergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { euler_lagrange: 1e-10, divergence: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct NamedGrid {
    pub spec: GridSpec,
    pub charge_tolerance: Option<f64>,
}

/// A field together with the symmetry notion it is checked against.
#[derive(Debug, Clone)]
pub struct NamedField {
    pub field: VectorField,
    pub kind: SymmetryKind,
    pub flux: FluxPotential,
    pub divergence: Option<Vec<Expr>>,
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub digest: String,
    pub lagrangian: Lagrangian,
    pub env: NumericEnv,
    /// Opaque functions without a numeric definition.
    pub symbolic_only: Vec<String>,
    pub fields: BTreeMap<String, NamedField>,
    pub currents: BTreeMap<String, Vec<Expr>>,
    pub solutions: BTreeMap<String, AnalyticSection>,
    pub grids: BTreeMap<String, NamedGrid>,
    pub tolerances: Tolerances,
    pub seed: u64,
}

fn invalid(location: impl Into<String>, err: impl std::fmt::Display) -> CliError {
    CliError::Problem { location: location.into(), message: err.to_string() }
}

fn parse_list(ctx: &JetContext, location: &str, texts: &[String]) -> Result<Vec<Expr>, CliError> {
    texts.iter().enumerate().map(|(i, t)| ctx.parse(t).map_err(|e| invalid(format!("{location}[{i}]"), e))).collect()
}

fn opaque_definition(body: &str) -> Result<ExprFn, String> {
    let ctx = JetContext::new(1, 1).and_then(|c| c.with_param("u")).map_err(|e| e.to_string())?;
    let e = ctx.parse(body).map_err(|e| e.to_string())?;
    ExprFn::new(e).map_err(|e| e.to_string())
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CliError> {
        let file: ProblemFile = serde_json::from_slice(bytes).map_err(|e| invalid("problem file", e))?;
        let digest = format!("{:x}", Sha256::digest(bytes));
        Self::build(file, digest)
    }

    fn build(file: ProblemFile, digest: String) -> Result<Self, CliError> {
        let c = &file.context;
        let mut ctx = JetContext::new(c.k, c.n).and_then(|ctx| ctx.with_order(2)).map_err(|e| invalid("context", e))?;
        if !c.independent.is_empty() && c.independent.len() != c.k {
            return Err(invalid("context.independent", format!("expected {} names", c.k)));
        }
        if !c.dependent.is_empty() && c.dependent.len() != c.n {
            return Err(invalid("context.dependent", format!("expected {} names", c.n)));
        }
        ctx = ctx.with_display_names(c.independent.clone(), c.dependent.clone());

        let mut functions = Functions::new();
        let mut symbolic_only = Vec::new();
        for (name, body) in &file.functions {
            ctx = ctx.with_function(name).map_err(|e| invalid(format!("functions.{name}"), e))?;
            match body {
                Some(b) => {
                    let f = opaque_definition(b).map_err(|e| invalid(format!("functions.{name}"), e))?;
                    functions.insert(name, Arc::new(f));
                }
                None => symbolic_only.push(name.clone()),
            }
        }
        let mut params = Point::new();
        for (name, value) in &file.params {
            ctx = ctx.with_param(name).map_err(|e| invalid(format!("params.{name}"), e))?;
            params.insert(Symbol::param(name), *value);
        }

        let lagrangian = Lagrangian::parse(ctx.clone(), &file.lagrangian).map_err(|e| invalid("lagrangian", e))?;

        let mut fluxes = BTreeMap::new();
        for (name, texts) in &file.fluxes {
            let loc = format!("fluxes.{name}");
            let comps = parse_list(&ctx, &loc, texts)?;
            fluxes.insert(name.clone(), FluxPotential::new(c.k, comps).map_err(|e| invalid(loc, e))?);
        }

        let mut fields = BTreeMap::new();
        for (name, spec) in &file.fields {
            let loc = format!("fields.{name}");
            let role = Role::parse(&spec.role)
                .ok_or_else(|| invalid(format!("{loc}.role"), format!("unknown role `{}`", spec.role)))?;
            let mut comps = BTreeMap::new();
            for (sym, text) in &spec.components {
                let s = ctx.resolve(sym, 0).map_err(|e| invalid(format!("{loc}.components"), e))?;
                let e = ctx.parse(text).map_err(|e| invalid(format!("{loc}.components.{sym}"), e))?;
                comps.insert(s, e);
            }
            let field = VectorField::new(role, comps).map_err(|e| invalid(&loc, e))?;
            let kind = spec.symmetry.unwrap_or(match role {
                Role::AlongPi10 => SymmetryKind::Generalized,
                _ => SymmetryKind::Variational,
            });
            let flux = match &spec.flux {
                Some(f) => fluxes
                    .get(f)
                    .cloned()
                    .ok_or_else(|| invalid(format!("{loc}.flux"), format!("no flux potential named `{f}`")))?,
                None => FluxPotential::zero(c.k),
            };
            let divergence = match &spec.divergence {
                Some(texts) => Some(parse_list(&ctx, &format!("{loc}.divergence"), texts)?),
                None => None,
            };
            if kind == SymmetryKind::Divergence && divergence.is_none() {
                return Err(invalid(loc, "a divergence symmetry needs `divergence` components"));
            }
            fields.insert(name.clone(), NamedField { field, kind, flux, divergence });
        }

        let mut currents = BTreeMap::new();
        for (name, texts) in &file.currents {
            let loc = format!("currents.{name}");
            let comps = parse_list(&ctx, &loc, texts)?;
            if comps.len() != c.k {
                return Err(invalid(loc, format!("expected {} components, found {}", c.k, comps.len())));
            }
            currents.insert(name.clone(), comps);
        }

        let mut solutions = BTreeMap::new();
        for (name, spec) in &file.solutions {
            let loc = format!("solutions.{name}");
            let texts = match spec {
                SolutionSpec::Scalar(t) => vec![t.clone()],
                SolutionSpec::Components(ts) => ts.clone(),
            };
            let comps = parse_list(&ctx, &loc, &texts)?;
            solutions.insert(name.clone(), AnalyticSection::new(&ctx, comps).map_err(|e| invalid(loc, e))?);
        }

        let mut grids = BTreeMap::new();
        for (name, spec) in &file.grids {
            let loc = format!("grids.{name}");
            let axes = match (&spec.axes, spec.min, spec.max, spec.points) {
                (Some(axes), None, None, None) => {
                    axes.iter().map(|a| Axis { min: a.min, max: a.max, points: a.points }).collect::<Vec<_>>()
                }
                (None, Some(min), Some(max), Some(points)) => vec![Axis { min, max, points }; c.k],
                _ => return Err(invalid(loc, "give either `axes` or all of `min`, `max`, `points`")),
            };
            if axes.len() != c.k {
                return Err(invalid(loc, format!("expected {} axes, found {}", c.k, axes.len())));
            }
            let grid = GridSpec::new(axes).map_err(|e| invalid(loc, e))?;
            grids.insert(name.clone(), NamedGrid { spec: grid, charge_tolerance: spec.charge_tolerance });
        }

        Ok(Problem {
            digest,
            lagrangian,
            env: NumericEnv::new(functions, params),
            symbolic_only,
            fields,
            currents,
            solutions,
            grids,
            tolerances: file.tolerances,
            seed: file.seed,
        })
    }

    pub fn ctx(&self) -> &JetContext {
        self.lagrangian.ctx()
    }

    pub fn field(&self, name: &str) -> Result<&NamedField, CliError> {
        self.fields.get(name).ok_or_else(|| CliError::UnknownName { kind: "field", name: name.into() })
    }

    pub fn solution(&self, name: &str) -> Result<&AnalyticSection, CliError> {
        self.solutions.get(name).ok_or_else(|| CliError::UnknownName { kind: "solution", name: name.into() })
    }

    pub fn grid(&self, name: &str) -> Result<&NamedGrid, CliError> {
        self.grids.get(name).ok_or_else(|| CliError::UnknownName { kind: "grid", name: name.into() })
    }

    /// True when some expression uses an opaque function without a numeric definition.
    pub fn needs_symbolic_only(&self, exprs: &[&Expr]) -> bool {
        exprs.iter().any(|e| e.opaque_functions().iter().any(|f| self.symbolic_only.iter().any(|s| s.as_str() == &**f)))
    }
}
