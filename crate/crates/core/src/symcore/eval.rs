//! Numeric evaluation.
//!
//! [`Compiled`] resolves symbols to slot indices and opaque functions to
//! callables once, so repeated evaluation (grids, random sampling) avoids map
//! lookups.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, ToPrimitive};

use super::error::EvalError;
use super::expr::{Base, Expr, Function, Rational};
use super::symbol::Symbol;

pub type Point = BTreeMap<Symbol, f64>;

/// A scalar function of one variable together with its derivative.
pub trait OpaqueFn: Send + Sync {
    fn value(&self, u: f64) -> f64;
    fn derivative(&self, u: f64) -> f64;
}

/// An opaque function given by closures.
pub struct ClosureFn<F, D> {
    pub value: F,
    pub derivative: D,
}

impl<F, D> OpaqueFn for ClosureFn<F, D>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, u: f64) -> f64 {
        (self.value)(u)
    }
    fn derivative(&self, u: f64) -> f64 {
        (self.derivative)(u)
    }
}

/// An opaque function defined by an expression in the formal variable `u`;
/// the derivative is obtained symbolically.
#[derive(Debug, Clone)]
pub struct ExprFn {
    value: Compiled,
    derivative: Compiled,
    source: Expr,
}

impl ExprFn {
    pub fn formal_variable() -> Symbol {
        Symbol::param("u")
    }

    /// `body` may only mention the formal variable `u`.
    pub fn new(body: Expr) -> Result<Self, EvalError> {
        let u = Self::formal_variable();
        if let Some(s) = body.free_symbols().into_iter().find(|s| *s != u) {
            return Err(EvalError::UnboundSymbol(s.to_string()));
        }
        let d = body.diff(&u).map_err(|e| EvalError::Domain { message: e.to_string(), subexpr: body.to_string() })?;
        let slots = [u];
        let none = Functions::default();
        Ok(ExprFn {
            value: Compiled::new(&body, &slots, &none)?,
            derivative: Compiled::new(&d, &slots, &none)?,
            source: body,
        })
    }

    pub fn source(&self) -> &Expr {
        &self.source
    }
}

impl OpaqueFn for ExprFn {
    fn value(&self, u: f64) -> f64 {
        self.value.eval(&[u]).unwrap_or(f64::NAN)
    }
    fn derivative(&self, u: f64) -> f64 {
        self.derivative.eval(&[u]).unwrap_or(f64::NAN)
    }
}

/// Numeric bindings for opaque functions, by name.
#[derive(Clone, Default)]
pub struct Functions(BTreeMap<Arc<str>, Arc<dyn OpaqueFn>>);

impl Functions {
    pub fn new() -> Self {
        Functions::default()
    }

    pub fn insert(&mut self, name: &str, f: Arc<dyn OpaqueFn>) {
        self.0.insert(Arc::from(name), f);
    }

    pub fn with(mut self, name: &str, f: Arc<dyn OpaqueFn>) -> Self {
        self.insert(name, f);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn OpaqueFn>> {
        self.0.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }
}

impl fmt::Debug for Functions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.keys()).finish()
    }
}

#[derive(Clone)]
enum Power {
    Int(i32),
    /// Rational exponent `p/q`; `odd_root` when `q` is odd, which permits negative bases.
    Real {
        value: f64,
        odd_root: bool,
        odd_numer: bool,
    },
}

#[derive(Clone)]
enum Factor {
    Slot(usize),
    Pi,
    Sin(Box<Compiled>),
    Cos(Box<Compiled>),
    Exp(Box<Compiled>),
    Opaque { f: Arc<dyn OpaqueFn>, derivative: bool, arg: Box<Compiled> },
    Compound(Box<Compiled>),
}

#[derive(Clone)]
struct CompiledFactor {
    factor: Factor,
    power: Power,
    source: Base,
}

/// An expression prepared for fast evaluation against a fixed slot layout.
#[derive(Clone)]
pub struct Compiled {
    terms: Vec<(f64, Vec<CompiledFactor>)>,
}

impl fmt::Debug for Compiled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Compiled({} terms)", self.terms.len())
    }
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn compile_power(e: &Rational) -> Power {
    if e.is_integer() {
        if let Some(n) = e.to_integer().to_i32() {
            return Power::Int(n);
        }
    }
    let two = num_bigint::BigInt::from(2);
    Power::Real {
        value: to_f64(e),
        odd_root: (e.denom() % &two) == num_bigint::BigInt::from(1),
        odd_numer: (e.numer().abs() % &two) == num_bigint::BigInt::from(1),
    }
}

impl Compiled {
    /// Compiles `e` against `slots`; fails on symbols outside `slots` or unbound functions.
    pub fn new(e: &Expr, slots: &[Symbol], fns: &Functions) -> Result<Self, EvalError> {
        let mut terms = Vec::with_capacity(e.term_count());
        for (m, c) in e.terms() {
            let mut factors = Vec::new();
            for (b, exp) in m.factors() {
                let sub = |inner: &Expr| Compiled::new(inner, slots, fns).map(Box::new);
                let factor = match b {
                    Base::Symbol(s) => Factor::Slot(
                        slots.iter().position(|t| t == s).ok_or_else(|| EvalError::UnboundSymbol(s.to_string()))?,
                    ),
                    Base::Pi => Factor::Pi,
                    Base::Apply(Function::Sin, a) => Factor::Sin(sub(a)?),
                    Base::Apply(Function::Cos, a) => Factor::Cos(sub(a)?),
                    Base::Apply(Function::Exp, a) => Factor::Exp(sub(a)?),
                    Base::Apply(Function::Opaque(n), a) | Base::Apply(Function::OpaqueDerivative(n), a) => {
                        let f = fns.get(n).ok_or_else(|| EvalError::UnboundFunction(n.to_string()))?;
                        Factor::Opaque {
                            f: f.clone(),
                            derivative: matches!(b, Base::Apply(Function::OpaqueDerivative(_), _)),
                            arg: sub(a)?,
                        }
                    }
                    Base::Compound(inner) => Factor::Compound(sub(inner)?),
                };
                factors.push(CompiledFactor { factor, power: compile_power(exp), source: b.clone() });
            }
            terms.push((to_f64(c), factors));
        }
        Ok(Compiled { terms })
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        let mut total = 0.0;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for cf in factors {
                let base = match &cf.factor {
                    Factor::Slot(i) => values[*i],
                    Factor::Pi => PI,
                    Factor::Sin(a) => a.eval(values)?.sin(),
                    Factor::Cos(a) => a.eval(values)?.cos(),
                    Factor::Exp(a) => a.eval(values)?.exp(),
                    Factor::Opaque { f, derivative, arg } => {
                        let u = arg.eval(values)?;
                        if *derivative {
                            f.derivative(u)
                        } else {
                            f.value(u)
                        }
                    }
                    Factor::Compound(inner) => inner.eval(values)?,
                };
                t *= raise(base, &cf.power, &cf.source)?;
            }
            total += t;
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(EvalError::Domain { message: "non-finite result".into(), subexpr: self.describe() })
        }
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, fs)| {
                let mut s = format!("{c}");
                for f in fs {
                    s.push_str(&format!("*{}", f.source));
                }
                s
            })
            .collect();
        parts.join(" + ")
    }
}

fn raise(base: f64, power: &Power, source: &Base) -> Result<f64, EvalError> {
    let domain = |message: &str| EvalError::Domain { message: message.into(), subexpr: source.to_string() };
    let negative_power = match power {
        Power::Int(n) => *n < 0,
        Power::Real { value, .. } => *value < 0.0,
    };
    if base == 0.0 && negative_power {
        return Err(domain("division by zero"));
    }
    let out = match power {
        Power::Int(1) => base,
        Power::Int(n) => base.powi(*n),
        Power::Real { value, odd_root, odd_numer } => {
            if base < 0.0 {
                if !odd_root {
                    return Err(domain("even root of a negative number"));
                }
                let magnitude = (-base).powf(*value);
                if *odd_numer {
                    -magnitude
                } else {
                    magnitude
                }
            } else {
                base.powf(*value)
            }
        }
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(domain("non-finite value"))
    }
}

impl Expr {
    /// Evaluates at `pt`; every symbol and opaque function must be bound.
    pub fn eval(&self, pt: &Point, fns: &Functions) -> Result<f64, EvalError> {
        let slots: Vec<Symbol> = pt.keys().cloned().collect();
        let values: Vec<f64> = pt.values().copied().collect();
        Compiled::new(self, &slots, fns)?.eval(&values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::JetContext;

    fn ctx() -> JetContext {
        JetContext::new(3, 1).unwrap().with_function("F").unwrap()
    }

    fn pt(items: &[(Symbol, f64)]) -> Point {
        items.iter().cloned().collect()
    }

    #[test]
    fn evaluates_polynomials() {
        let c = ctx();
        let e = c.parse("v1_1^2").unwrap();
        assert_eq!(e.eval(&pt(&[(Symbol::v(1, 1), 2.0)]), &Functions::new()).unwrap(), 4.0);
        let l = c.parse("1/2*(v1_1^2 - v1_2^2 - v1_3^2)").unwrap();
        let p = pt(&[(Symbol::v(1, 1), 1.0), (Symbol::v(1, 2), 1.0), (Symbol::v(1, 3), 0.0)]);
        assert_eq!(l.eval(&p, &Functions::new()).unwrap(), 0.0);
    }

    #[test]
    fn evaluates_opaque_functions() {
        let c = ctx();
        let e = c.parse("F(q1)").unwrap();
        let square = Arc::new(ClosureFn { value: |u: f64| u * u, derivative: |u: f64| 2.0 * u });
        let fns = Functions::new().with("F", square);
        assert_eq!(e.eval(&pt(&[(Symbol::q(1), 0.5)]), &fns).unwrap(), 0.25);
        let d = c.parse("F'(q1)").unwrap();
        assert_eq!(d.eval(&pt(&[(Symbol::q(1), 0.5)]), &fns).unwrap(), 1.0);
    }

    #[test]
    fn expression_defined_functions() {
        let uctx = JetContext::new(1, 1).unwrap().with_param("u").unwrap();
        let body = uctx.parse("u^3 - 2*u").unwrap();
        let f = ExprFn::new(body).unwrap();
        assert_eq!(f.value(2.0), 4.0);
        assert_eq!(f.derivative(2.0), 10.0);
    }

    #[test]
    fn unbound_names_are_errors() {
        let c = ctx();
        let e = c.parse("F(q1) + x1").unwrap();
        let p = pt(&[(Symbol::q(1), 0.5)]);
        assert!(matches!(
            e.eval(&p, &Functions::new()),
            Err(EvalError::UnboundSymbol(_) | EvalError::UnboundFunction(_))
        ));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let c = ctx();
        let e = c.parse("1/(x1 - 1) + sqrt(x2)").unwrap();
        let p = pt(&[(Symbol::x(1), 1.0), (Symbol::x(2), 4.0)]);
        match e.eval(&p, &Functions::new()) {
            Err(EvalError::Domain { message, subexpr }) => {
                assert_eq!(message, "division by zero");
                assert_eq!(subexpr, "(x1 - 1)");
            }
            other => panic!("unexpected {other:?}"),
        }
        let p = pt(&[(Symbol::x(1), 3.0), (Symbol::x(2), -4.0)]);
        match e.eval(&p, &Functions::new()) {
            Err(EvalError::Domain { subexpr, .. }) => assert_eq!(subexpr, "x2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn odd_roots_of_negative_numbers() {
        let c = ctx();
        let e = c.parse("(-x1)^(1/3)").unwrap();
        let v = e.eval(&pt(&[(Symbol::x(1), 8.0)]), &Functions::new()).unwrap();
        assert!((v + 2.0).abs() < 1e-12);
    }
}
