//! Structural and randomized-numeric equality.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::{Compiled, Functions, OpaqueFn};
use super::expr::Expr;
use super::symbol::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ProvablyEqual,
    ProvablyUnequal,
    NumericallyEqual,
    /// Too many sample points were singular to reach the requested trial count.
    Inconclusive,
}

impl Verdict {
    pub fn holds(self) -> bool {
        matches!(self, Verdict::ProvablyEqual | Verdict::NumericallyEqual)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ProvablyEqual => "provably-equal",
            Verdict::ProvablyUnequal => "provably-unequal",
            Verdict::NumericallyEqual => "numerically-equal",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub trials: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { trials: 100, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub verdict: Verdict,
    /// Nonsingular points actually compared.
    pub samples: usize,
    /// Largest `|a - b| / (1 + |a| + |b|)` seen.
    pub max_scaled_diff: f64,
}

pub const SAMPLE_RADIUS: f64 = 2.0;
pub const NUMERIC_TOLERANCE: f64 = 1e-9;

/// Smooth stand-in for an opaque function without a numeric binding:
/// `a*sin(u + b) + c*u^2` with seeded coefficients.
struct Surrogate {
    a: f64,
    b: f64,
    c: f64,
}

impl OpaqueFn for Surrogate {
    fn value(&self, u: f64) -> f64 {
        self.a * (u + self.b).sin() + self.c * u * u
    }
    fn derivative(&self, u: f64) -> f64 {
        self.a * (u + self.b).cos() + 2.0 * self.c * u
    }
}

/// Binds every opaque function used by `exprs` that `fns` leaves unbound to a
/// seeded surrogate.
pub fn with_surrogates(exprs: &[&Expr], fns: &Functions, rng: &mut ChaCha8Rng) -> Functions {
    let mut out = fns.clone();
    let names: BTreeSet<Arc<str>> = exprs.iter().flat_map(|e| e.opaque_functions()).collect();
    for name in names {
        if !out.contains(&name) {
            let s = Surrogate {
                a: rng.random_range(0.5..1.5),
                b: rng.random_range(-1.0..1.0),
                c: rng.random_range(-0.5..0.5),
            };
            out.insert(&name, Arc::new(s));
        }
    }
    out
}

/// Decides `a == b`: structurally when the difference normalizes to zero or is a
/// nonzero polynomial, otherwise by sampling every free symbol uniformly in
/// `[-2, 2]`.
pub fn equal(a: &Expr, b: &Expr, sampling: Sampling, fns: &Functions) -> Comparison {
    let diff = a - b;
    if diff.is_zero() {
        return Comparison { verdict: Verdict::ProvablyEqual, samples: 0, max_scaled_diff: 0.0 };
    }
    if diff.is_polynomial() {
        return Comparison { verdict: Verdict::ProvablyUnequal, samples: 0, max_scaled_diff: f64::NAN };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let fns = with_surrogates(&[a, b], fns, &mut rng);
    let mut symbols: BTreeSet<Symbol> = a.free_symbols();
    symbols.extend(b.free_symbols());
    let slots: Vec<Symbol> = symbols.into_iter().collect();
    let (ca, cb) = match (Compiled::new(a, &slots, &fns), Compiled::new(b, &slots, &fns)) {
        (Ok(ca), Ok(cb)) => (ca, cb),
        _ => return Comparison { verdict: Verdict::Inconclusive, samples: 0, max_scaled_diff: f64::NAN },
    };
    let mut samples = 0;
    let mut worst = 0.0f64;
    let mut values = vec![0.0; slots.len()];
    for _ in 0..sampling.trials.saturating_mul(10) {
        if samples == sampling.trials {
            break;
        }
        for v in values.iter_mut() {
            *v = rng.random_range(-SAMPLE_RADIUS..SAMPLE_RADIUS);
        }
        let (Ok(va), Ok(vb)) = (ca.eval(&values), cb.eval(&values)) else {
            continue;
        };
        samples += 1;
        let scaled = (va - vb).abs() / (1.0 + va.abs() + vb.abs());
        worst = worst.max(scaled);
        if scaled >= NUMERIC_TOLERANCE {
            return Comparison { verdict: Verdict::ProvablyUnequal, samples, max_scaled_diff: worst };
        }
    }
    let verdict = if samples == sampling.trials { Verdict::NumericallyEqual } else { Verdict::Inconclusive };
    Comparison { verdict, samples, max_scaled_diff: worst }
}
