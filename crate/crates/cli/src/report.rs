//! Machine-readable command reports.
//!
//! Maps are `BTreeMap`-backed and floats print in shortest round-trip form, so
//! a fixed problem file, seed and flag set always produce the same bytes.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use jetcartan::geometry::{DiffForm, VectorField};
use jetcartan::numcheck::{GridSpec, ResidualStats};
use jetcartan::symcore::Expr;

pub const ENGINE_VERSION: &str = concat!("jetcartan ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictEntry {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub engine_version: &'static str,
    pub command: &'static str,
    pub input_sha256: String,
    pub seed: u64,
    pub selectors: BTreeMap<String, String>,
    pub passed: bool,
    pub verdicts: Vec<VerdictEntry>,
    pub symbolic: BTreeMap<String, Value>,
    pub numeric: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, digest: &str, seed: u64) -> Self {
        Report {
            engine_version: ENGINE_VERSION,
            command,
            input_sha256: digest.to_string(),
            seed,
            selectors: BTreeMap::new(),
            passed: true,
            verdicts: Vec::new(),
            symbolic: BTreeMap::new(),
            numeric: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn select(&mut self, key: &str, value: &str) {
        self.selectors.insert(key.to_string(), value.to_string());
    }

    pub fn verdict(&mut self, name: &str, pass: bool, detail: Option<String>) {
        self.passed &= pass;
        self.verdicts.push(VerdictEntry { name: name.to_string(), pass, detail });
    }

    pub fn symbolic(&mut self, key: &str, value: Value) {
        self.symbolic.insert(key.to_string(), value);
    }

    pub fn numeric(&mut self, key: &str, value: Value) {
        self.numeric.insert(key.to_string(), value);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// One line per verdict, then the warnings.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let status = if v.pass { "PASS" } else { "FAIL" };
            match &v.detail {
                Some(d) => out.push_str(&format!("{status} {}: {d}\n", v.name)),
                None => out.push_str(&format!("{status} {}\n", v.name)),
            }
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

/// Printed normal form; parses back to the same expression.
pub fn expr(e: &Expr) -> Value {
    Value::String(e.to_string())
}

pub fn exprs<'a>(es: impl IntoIterator<Item = &'a Expr>) -> Value {
    Value::Array(es.into_iter().map(expr).collect())
}

/// A form as `[{basis: [...], coefficient}]` so each coefficient stays parseable.
pub fn form(w: &DiffForm) -> Value {
    Value::Array(
        w.terms()
            .map(|(basis, c)| {
                json!({
                    "basis": basis.iter().map(|s| format!("d{s}")).collect::<Vec<_>>(),
                    "coefficient": c.to_string(),
                })
            })
            .collect(),
    )
}

pub fn forms<'a>(ws: impl IntoIterator<Item = &'a DiffForm>) -> Value {
    Value::Array(ws.into_iter().map(form).collect())
}

pub fn field(x: &VectorField) -> Value {
    let comps: BTreeMap<String, String> = x.components().iter().map(|(s, c)| (s.to_string(), c.to_string())).collect();
    json!({ "role": x.role().as_str(), "components": comps })
}

pub fn stats(s: &ResidualStats, tolerance: f64) -> Value {
    json!({ "max_abs": s.max_abs, "rms": s.rms, "points": s.points, "tolerance": tolerance })
}

pub fn grid(g: &GridSpec) -> Value {
    Value::Array(g.axes().iter().map(|a| json!({ "min": a.min, "max": a.max, "points": a.points })).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use jetcartan::geometry::JetContext;

    #[test]
    fn printed_coefficients_parse_back() {
        let ctx = JetContext::new(2, 1).unwrap().with_param("m").unwrap();
        let e = ctx.parse("1/2*m^2*q1^2 - sin(x1)*v1_2/(1 + v1_1^2)^(1/2)").unwrap();
        let Value::String(s) = expr(&e) else { unreachable!() };
        assert_eq!(ctx.parse(&s).unwrap(), e);
    }

    #[test]
    fn verdicts_accumulate() {
        let mut r = Report::new("derive", "00", 3);
        r.verdict("a", true, None);
        assert!(r.passed);
        r.verdict("b", false, Some("residual 1".into()));
        assert!(!r.passed);
        assert_eq!(r.summary(), "PASS a\nFAIL b: residual 1\n");
        assert_eq!(r.to_json(), r.clone().to_json());
    }
}
