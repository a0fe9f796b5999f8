use super::error::SymError;
use super::expr::{Base, Expr, Function, Rational};
use super::symbol::Symbol;
use num_traits::One;

impl Expr {
    /// Exact partial derivative with respect to `s`, all coordinates independent.
    pub fn diff(&self, s: &Symbol) -> Result<Expr, SymError> {
        if !self.depends_on(s) {
            return Ok(Expr::zero());
        }
        let mut parts = Vec::new();
        for (m, c) in self.terms() {
            for (b, e) in m.factors() {
                let inner = match b {
                    Base::Symbol(t) if t == s => Expr::one(),
                    Base::Symbol(_) | Base::Pi => continue,
                    Base::Apply(f, arg) => {
                        if !arg.depends_on(s) {
                            continue;
                        }
                        let da = arg.diff(s)?;
                        let outer = match f {
                            Function::Sin => Expr::cos(arg.clone()),
                            Function::Cos => -Expr::sin(arg.clone()),
                            Function::Exp => Expr::exp(arg.clone()),
                            Function::Opaque(name) => Expr::opaque_derivative(name, arg.clone()),
                            Function::OpaqueDerivative(name) => {
                                return Err(SymError::UnsupportedOrder(name.to_string()))
                            }
                        };
                        outer * da
                    }
                    Base::Compound(inner) => {
                        if !inner.depends_on(s) {
                            continue;
                        }
                        inner.diff(s)?
                    }
                };
                let cofactor = m.without_base(b);
                let lowered = Expr::from_factor(b.clone(), e - Rational::one());
                let term = (Expr::from_monomial(&cofactor) * lowered * inner).scale(&(c * e));
                parts.push(term);
            }
        }
        Ok(Expr::sum(parts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ratio;

    fn sym(s: Symbol) -> Expr {
        Expr::symbol(s)
    }

    #[test]
    fn polynomial_rule() {
        let v11 = sym(Symbol::v(1, 1));
        let v12 = sym(Symbol::v(1, 2));
        let l = Expr::ratio(1, 2) * (&v11 * &v11 - &v12 * &v12);
        assert_eq!(l.diff(&Symbol::v(1, 1)).unwrap(), v11);
    }

    #[test]
    fn opaque_chain_rule() {
        let q = sym(Symbol::q(1));
        let m = sym(Symbol::param("m"));
        let l = Expr::opaque("F", q.clone()) - Expr::ratio(1, 2) * &m * &m * &q * &q;
        let expected = Expr::opaque_derivative("F", q.clone()) - &m * &m * &q;
        assert_eq!(l.diff(&Symbol::q(1)).unwrap(), expected);
        let twice = l.diff(&Symbol::q(1)).unwrap().diff(&Symbol::q(1));
        assert!(matches!(twice, Err(SymError::UnsupportedOrder(_))));
    }

    #[test]
    fn trig_chain_rule() {
        let x1 = sym(Symbol::x(1));
        let x2 = sym(Symbol::x(2));
        let e = Expr::sin(&x1 * &x2);
        assert_eq!(e.diff(&Symbol::x(2)).unwrap(), &x1 * Expr::cos(&x1 * &x2));
    }

    #[test]
    fn radical_rule() {
        let v = sym(Symbol::v(1, 1));
        let w = Expr::one() + &v * &v;
        let d = w.sqrt().unwrap().diff(&Symbol::v(1, 1)).unwrap();
        assert_eq!(d, &v * w.pow(&ratio(-1, 2)).unwrap());
    }
}
