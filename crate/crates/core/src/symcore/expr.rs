//! Canonical symbolic expressions.
//!
//! An [`Expr`] is a sum of monomials with exact rational coefficients. A
//! monomial is a product of [`Base`]s raised to nonzero rational exponents.
//! Every constructor returns the normal form:
//!
//! * like terms are collected, zero coefficients dropped;
//! * positive integer powers of sums are expanded;
//! * a sum that must stay unexpanded (negative or fractional power) becomes a
//!   `Compound` base, scaled so its leading coefficient is `1` (or `±1` for
//!   fractional powers, where the sign cannot be pulled out);
//! * for every polynomial `Compound` base `B`, each cofactor of `B^e` is
//!   reduced modulo `B` (multivariate division by a single polynomial, whose
//!   remainder is unique), pushing quotients to `B^(e+1)`.
//!
//! Monomials are ordered by total degree, then lexicographically on exponent
//! vectors over the ordered bases. That order is a monomial order, which the
//! division step relies on.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::error::SymError;
use super::symbol::Symbol;

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Elementary functions that may appear as bases.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Function {
    Sin,
    Cos,
    Exp,
    /// A declared opaque function `F`.
    Opaque(Arc<str>),
    /// The first derivative `F'` of a declared opaque function.
    OpaqueDerivative(Arc<str>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    Symbol(Symbol),
    Pi,
    Apply(Function, Expr),
    /// An unexpanded sum (or a constant radical) carrying a non-positive-integer power.
    Compound(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    factors: BTreeMap<Base, Rational>,
    degree: Rational,
}

type Terms = BTreeMap<Monomial, Rational>;

/// Immutable, canonical symbolic expression.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Terms>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    fn from_factors(factors: BTreeMap<Base, Rational>) -> Self {
        let degree = factors.values().fold(Rational::zero(), |acc, e| acc + e);
        Monomial { factors, degree }
    }

    fn single(base: Base, exp: Rational) -> Self {
        let mut factors = BTreeMap::new();
        factors.insert(base, exp);
        Monomial::from_factors(factors)
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> &Rational {
        &self.degree
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Base, &Rational)> {
        self.factors.iter()
    }

    pub fn exponent(&self, base: &Base) -> Option<&Rational> {
        self.factors.get(base)
    }

    pub(crate) fn without_base(&self, base: &Base) -> Monomial {
        self.without(base)
    }

    fn without(&self, base: &Base) -> Monomial {
        let mut factors = self.factors.clone();
        factors.remove(base);
        Monomial::from_factors(factors)
    }

    fn with(&self, base: Base, exp: Rational) -> Monomial {
        let mut factors = self.factors.clone();
        merge_factor(&mut factors, base, exp);
        Monomial::from_factors(factors)
    }

    fn divisible_by(&self, other: &Monomial) -> bool {
        other.factors.iter().all(|(b, e)| self.factors.get(b).is_some_and(|mine| mine >= e))
    }

    fn divide(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        for (b, e) in &other.factors {
            merge_factor(&mut factors, b.clone(), -e.clone());
        }
        Monomial::from_factors(factors)
    }

    /// Product that only adds exponents; valid when no `Compound` exponent can
    /// reach a positive integer.
    fn mul_plain(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        for (b, e) in &other.factors {
            merge_factor(&mut factors, b.clone(), e.clone());
        }
        Monomial::from_factors(factors)
    }

    fn is_plain_polynomial(&self) -> bool {
        self.factors.iter().all(|(b, e)| !matches!(b, Base::Compound(_)) && e.is_integer() && e.is_positive())
    }
}

fn merge_factor(factors: &mut BTreeMap<Base, Rational>, base: Base, exp: Rational) {
    match factors.entry(base) {
        Entry::Vacant(v) => {
            if !exp.is_zero() {
                v.insert(exp);
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += exp;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| lex_exponents(&self.factors, &other.factors))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Lexicographic comparison of exponent vectors; absent bases count as exponent 0.
fn lex_exponents(a: &BTreeMap<Base, Rational>, b: &BTreeMap<Base, Rational>) -> Ordering {
    let sign = |e: &Rational| if e.is_positive() { Ordering::Greater } else { Ordering::Less };
    let mut ia = a.iter().peekable();
    let mut ib = b.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => return Ordering::Equal,
            (Some((_, ea)), None) => return sign(ea),
            (None, Some((_, eb))) => return sign(eb).reverse(),
            (Some((ba, ea)), Some((bb, eb))) => match ba.cmp(bb) {
                Ordering::Less => return sign(ea),
                Ordering::Greater => return sign(eb).reverse(),
                Ordering::Equal => match ea.cmp(eb) {
                    Ordering::Equal => {
                        ia.next();
                        ib.next();
                    }
                    o => return o,
                },
            },
        }
    }
}

fn add_term(terms: &mut Terms, m: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    match terms.entry(m) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn add_all(into: &mut Terms, from: Terms) {
    for (m, c) in from {
        add_term(into, m, c);
    }
}

fn rational_powi(c: &Rational, n: &BigInt) -> Rational {
    let n = n.to_i32().expect("exponent too large");
    num_traits::pow::Pow::pow(c, n)
}

/// `c^r` for `c > 0`: an exact rational part and, when `c^r` is irrational,
/// a constant radical `(base, exponent)` with exponent in `(0, 1)`.
fn rational_pow(c: &Rational, r: &Rational) -> (Rational, Option<(Rational, Rational)>) {
    debug_assert!(c.is_positive());
    if let Some(q) = r.denom().to_u32() {
        let num = c.numer();
        let den = c.denom();
        let rn = num.nth_root(q);
        let rd = den.nth_root(q);
        if num_traits::pow::Pow::pow(&rn, q) == *num && num_traits::pow::Pow::pow(&rd, q) == *den {
            let root = Rational::new(rn, rd);
            return (rational_powi(&root, r.numer()), None);
        }
    }
    let n = r.floor();
    let f = r - &n;
    (rational_powi(c, n.numer()), Some((c.clone(), f)))
}

/// Builds the canonical terms of `coeff * prod(base^exp)`.
fn product_terms(coeff: Rational, factors: BTreeMap<Base, Rational>) -> Terms {
    let mut coeff = coeff;
    let mut mono = BTreeMap::new();
    let mut expand = Vec::new();
    for (base, e) in factors {
        if e.is_zero() {
            continue;
        }
        match &base {
            Base::Compound(inner) => {
                if let Some(c) = inner.as_constant() {
                    let n = e.floor();
                    coeff *= rational_powi(&c, n.numer());
                    let f = &e - &n;
                    if !f.is_zero() {
                        mono.insert(base, f);
                    }
                } else if e.is_integer() && e.is_positive() {
                    let n = e.to_integer().to_u32().expect("exponent too large");
                    expand.push((inner.clone(), n));
                } else {
                    mono.insert(base, e);
                }
            }
            _ => {
                mono.insert(base, e);
            }
        }
    }
    let mut out = Terms::new();
    add_term(&mut out, Monomial::from_factors(mono), coeff);
    for (inner, n) in expand {
        out = mul_terms(&out, &pow_terms(&inner.0, n));
    }
    out
}

fn mul_terms(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let needs_care = mb.factors.keys().any(|k| matches!(k, Base::Compound(_)))
                && ma.factors.keys().any(|k| matches!(k, Base::Compound(_)));
            if !needs_care {
                add_term(&mut out, ma.mul_plain(mb), ca * cb);
                continue;
            }
            let mut factors = ma.factors.clone();
            for (base, e) in &mb.factors {
                merge_factor(&mut factors, base.clone(), e.clone());
            }
            add_all(&mut out, product_terms(ca * cb, factors));
        }
    }
    out
}

fn pow_terms(terms: &Terms, n: u32) -> Terms {
    let mut result = Terms::new();
    result.insert(Monomial::one(), Rational::one());
    let mut base = terms.clone();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            result = mul_terms(&result, &base);
        }
        n >>= 1;
        if n > 0 {
            base = mul_terms(&base, &base);
        }
    }
    result
}

const DIVISION_STEP_LIMIT: usize = 20_000;

/// Divides `p` by the polynomial `b`. Returns `(quotient, remainder)`, or
/// `None` when the step limit is hit.
fn divide(p: &Terms, b: &Terms) -> Option<(Terms, Terms)> {
    let (lt, lc) = b.iter().next_back()?;
    let mut p = p.clone();
    let mut q = Terms::new();
    let mut r = Terms::new();
    for _ in 0..DIVISION_STEP_LIMIT {
        let Some((m, c)) = p.pop_last() else {
            return Some((q, r));
        };
        if m.divisible_by(lt) {
            let qm = m.divide(lt);
            let qc = &c / lc;
            for (bm, bc) in b.iter().rev().skip(1) {
                add_term(&mut p, qm.mul_plain(bm), -(&qc * bc));
            }
            add_term(&mut q, qm, qc);
        } else {
            add_term(&mut r, m, c);
        }
    }
    None
}

fn is_divisor_candidate(inner: &Expr) -> bool {
    inner.0.len() >= 2 && inner.0.keys().all(Monomial::is_plain_polynomial)
}

fn reducible_bases(terms: &Terms) -> BTreeSet<Expr> {
    let mut out = BTreeSet::new();
    for m in terms.keys() {
        for b in m.factors.keys() {
            if let Base::Compound(inner) = b {
                if is_divisor_candidate(inner) {
                    out.insert(inner.clone());
                }
            }
        }
    }
    out
}

fn reduce_by(terms: &Terms, divisor: &Expr) -> Option<Terms> {
    let base = Base::Compound(divisor.clone());
    let mut rest = Terms::new();
    let mut groups: BTreeMap<Rational, Terms> = BTreeMap::new();
    for (m, c) in terms {
        match m.exponent(&base) {
            Some(e) => add_term(groups.entry(e.clone()).or_default(), m.without(&base), c.clone()),
            None => add_term(&mut rest, m.clone(), c.clone()),
        }
    }
    let mut changed = false;
    while let Some((e, p)) = groups.pop_first() {
        let (q, r) = divide(&p, &divisor.0).unwrap_or_else(|| (Terms::new(), p));
        if !q.is_empty() {
            changed = true;
            let next = &e + Rational::one();
            if next.is_zero() {
                add_all(&mut rest, q);
            } else if next.is_integer() && next.is_positive() {
                let n = next.to_integer().to_u32().expect("exponent too large");
                add_all(&mut rest, mul_terms(&q, &pow_terms(&divisor.0, n)));
            } else {
                add_all(groups.entry(next).or_default(), q);
            }
        }
        for (m, c) in r {
            add_term(&mut rest, m.with(base.clone(), e.clone()), c);
        }
    }
    changed.then_some(rest)
}

fn reduce_compounds(mut terms: Terms) -> Terms {
    for _ in 0..8 {
        let bases = reducible_bases(&terms);
        if bases.is_empty() {
            break;
        }
        let mut changed = false;
        for b in bases {
            if let Some(next) = reduce_by(&terms, &b) {
                terms = next;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    terms
}

fn finish(terms: Terms) -> Expr {
    let has_compound = terms.keys().any(|m| m.factors.keys().any(|b| matches!(b, Base::Compound(_))));
    if has_compound {
        Expr(Arc::new(reduce_compounds(terms)))
    } else {
        Expr(Arc::new(terms))
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr(Arc::new(Terms::new()))
    }

    pub fn one() -> Self {
        Expr::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut t = Terms::new();
        add_term(&mut t, Monomial::one(), c);
        Expr(Arc::new(t))
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expr::constant(ratio(n, d))
    }

    pub fn symbol(s: Symbol) -> Self {
        Expr::from_base(Base::Symbol(s))
    }

    pub fn pi() -> Self {
        Expr::from_base(Base::Pi)
    }

    fn from_base(base: Base) -> Self {
        let mut t = Terms::new();
        t.insert(Monomial::single(base, Rational::one()), Rational::one());
        Expr(Arc::new(t))
    }

    /// `base^exp` in canonical form.
    pub fn from_factor(base: Base, exp: Rational) -> Self {
        let mut factors = BTreeMap::new();
        factors.insert(base, exp);
        finish(product_terms(Rational::one(), factors))
    }

    pub(crate) fn from_monomial(m: &Monomial) -> Self {
        finish(product_terms(Rational::one(), m.factors.clone()))
    }

    pub fn apply(f: Function, arg: Expr) -> Self {
        if arg.is_zero() {
            match f {
                Function::Sin => return Expr::zero(),
                Function::Cos | Function::Exp => return Expr::one(),
                _ => {}
            }
        }
        Expr::from_base(Base::Apply(f, arg))
    }

    pub fn sin(arg: Expr) -> Self {
        Expr::apply(Function::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Self {
        Expr::apply(Function::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Self {
        Expr::apply(Function::Exp, arg)
    }

    pub fn opaque(name: &str, arg: Expr) -> Self {
        Expr::apply(Function::Opaque(Arc::from(name)), arg)
    }

    pub fn opaque_derivative(name: &str, arg: Expr) -> Self {
        Expr::apply(Function::OpaqueDerivative(Arc::from(name)), arg)
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Self {
        let mut acc = Terms::new();
        for e in items {
            match Arc::try_unwrap(e.0) {
                Ok(t) => add_all(&mut acc, t),
                Err(shared) => {
                    for (m, c) in shared.iter() {
                        add_term(&mut acc, m.clone(), c.clone());
                    }
                }
            }
        }
        finish(acc)
    }

    pub fn product<I: IntoIterator<Item = Expr>>(items: I) -> Self {
        items.into_iter().fold(Expr::one(), |acc, e| &acc * &e)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value when the expression is a rational constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.0.iter().next().expect("one term");
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.0.iter()
    }

    pub fn term_count(&self) -> usize {
        self.0.len()
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        let t = self.0.iter().map(|(m, k)| (m.clone(), k * c)).collect();
        Expr(Arc::new(t))
    }

    pub fn pow(&self, r: &Rational) -> Result<Expr, SymError> {
        if r.is_zero() {
            return Ok(Expr::one());
        }
        if self.is_zero() {
            return if r.is_positive() { Ok(Expr::zero()) } else { Err(SymError::DivisionByZero) };
        }
        if r.is_integer() && r.is_positive() {
            let n = r.to_integer().to_u32().expect("exponent too large");
            return Ok(finish(pow_terms(&self.0, n)));
        }
        if self.0.len() == 1 {
            let (m, c) = self.0.iter().next().expect("one term");
            if r.is_integer() {
                let coeff = rational_powi(c, r.numer());
                let factors = m.factors.iter().map(|(b, e)| (b.clone(), e * r)).collect();
                return Ok(finish(product_terms(coeff, factors)));
            }
            let odd_numerators = m.factors.values().all(|e| e.numer() % BigInt::from(2) != BigInt::zero());
            if c.is_positive() && odd_numerators {
                let (exact, radical) = rational_pow(c, r);
                let mut factors: BTreeMap<Base, Rational> = m.factors.iter().map(|(b, e)| (b.clone(), e * r)).collect();
                if let Some((rb, re)) = radical {
                    merge_factor(&mut factors, Base::Compound(Expr::constant(rb)), re);
                }
                return Ok(finish(product_terms(exact, factors)));
            }
        }
        Ok(self.compound_power(r))
    }

    fn compound_power(&self, r: &Rational) -> Expr {
        let (_, lc) = self.0.iter().next_back().expect("nonzero");
        let mut factors = BTreeMap::new();
        if r.is_integer() {
            let base = self.scale(&lc.recip());
            factors.insert(Base::Compound(base), r.clone());
            finish(product_terms(rational_powi(lc, r.numer()), factors))
        } else {
            let a = lc.abs();
            let base = self.scale(&a.recip());
            let (exact, radical) = rational_pow(&a, r);
            factors.insert(Base::Compound(base), r.clone());
            if let Some((rb, re)) = radical {
                merge_factor(&mut factors, Base::Compound(Expr::constant(rb)), re);
            }
            finish(product_terms(exact, factors))
        }
    }

    pub fn powi(&self, n: i64) -> Result<Expr, SymError> {
        self.pow(&int(n))
    }

    pub fn sqrt(&self) -> Result<Expr, SymError> {
        self.pow(&ratio(1, 2))
    }

    pub fn recip(&self) -> Result<Expr, SymError> {
        self.pow(&int(-1))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, SymError> {
        Ok(self * &other.recip()?)
    }

    /// Visits every base, descending into function arguments and compound bases.
    pub fn visit_bases(&self, f: &mut dyn FnMut(&Base)) {
        for m in self.0.keys() {
            for b in m.factors.keys() {
                f(b);
                match b {
                    Base::Apply(_, arg) => arg.visit_bases(f),
                    Base::Compound(inner) => inner.visit_bases(f),
                    _ => {}
                }
            }
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit_bases(&mut |b| {
            if let Base::Symbol(s) = b {
                out.insert(s.clone());
            }
        });
        out
    }

    /// Names of opaque functions (and their derivatives) used anywhere.
    pub fn opaque_functions(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.visit_bases(&mut |b| {
            if let Base::Apply(Function::Opaque(n) | Function::OpaqueDerivative(n), _) = b {
                out.insert(n.clone());
            }
        });
        out
    }

    pub fn any_symbol(&self, pred: &dyn Fn(&Symbol) -> bool) -> bool {
        self.0.keys().any(|m| {
            m.factors.keys().any(|b| match b {
                Base::Symbol(s) => pred(s),
                Base::Pi => false,
                Base::Apply(_, arg) => arg.any_symbol(pred),
                Base::Compound(inner) => inner.any_symbol(pred),
            })
        })
    }

    pub fn depends_on(&self, s: &Symbol) -> bool {
        self.any_symbol(&|t| t == s)
    }

    pub fn has_second_jet(&self) -> bool {
        self.any_symbol(&Symbol::is_second_jet)
    }

    pub fn has_first_jet(&self) -> bool {
        self.any_symbol(&Symbol::is_first_jet)
    }

    /// Polynomial in symbols (and `pi`) with nonnegative integer exponents.
    pub fn is_polynomial(&self) -> bool {
        self.0.keys().all(|m| {
            m.factors.iter().all(|(b, e)| matches!(b, Base::Symbol(_) | Base::Pi) && e.is_integer() && e.is_positive())
        })
    }

    /// Replaces symbols by expressions.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Expr>) -> Result<Expr, SymError> {
        if !self.any_symbol(&|s| map.contains_key(s)) {
            return Ok(self.clone());
        }
        let mut parts = Vec::with_capacity(self.0.len());
        for (m, c) in self.0.iter() {
            let mut term = Expr::constant(c.clone());
            for (b, e) in &m.factors {
                let value = match b {
                    Base::Symbol(s) => map.get(s).cloned().unwrap_or_else(|| Expr::symbol(s.clone())),
                    Base::Pi => Expr::pi(),
                    Base::Apply(f, arg) => Expr::apply(f.clone(), arg.substitute(map)?),
                    Base::Compound(inner) => inner.substitute(map)?,
                };
                term = &term * &value.pow(e)?;
            }
            parts.push(term);
        }
        Ok(Expr::sum(parts))
    }

    /// Splits `self = sum_s coeff_s * s + rest` over the symbols selected by `is_var`.
    ///
    /// Fails when a selected symbol appears nonlinearly or inside a function
    /// or compound base.
    pub fn linear_split(&self, is_var: &dyn Fn(&Symbol) -> bool) -> Result<(BTreeMap<Symbol, Expr>, Expr), SymError> {
        let not_affine = || SymError::NotAffine { what: "the selected symbols".into(), expr: self.to_string() };
        let mut coeffs: BTreeMap<Symbol, Terms> = BTreeMap::new();
        let mut rest = Terms::new();
        for (m, c) in self.0.iter() {
            let mut var = None;
            for (b, e) in &m.factors {
                match b {
                    Base::Symbol(s) if is_var(s) => {
                        if var.is_some() || !e.is_one() {
                            return Err(not_affine());
                        }
                        var = Some(s.clone());
                    }
                    Base::Apply(_, inner) | Base::Compound(inner) if inner.any_symbol(is_var) => {
                        return Err(not_affine());
                    }
                    _ => {}
                }
            }
            match var {
                Some(s) => {
                    let reduced = m.without(&Base::Symbol(s.clone()));
                    add_term(coeffs.entry(s).or_default(), reduced, c.clone());
                }
                None => add_term(&mut rest, m.clone(), c.clone()),
            }
        }
        let coeffs = coeffs.into_iter().filter(|(_, t)| !t.is_empty()).map(|(s, t)| (s, finish(t))).collect();
        Ok((coeffs, finish(rest)))
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::symbol(s)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::constant(c)
    }
}

fn add_exprs(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let mut t = (*a.0).clone();
    for (m, c) in b.0.iter() {
        add_term(&mut t, m.clone(), c.clone());
    }
    finish(t)
}

fn mul_exprs(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        return Expr::zero();
    }
    if let Some(c) = a.as_constant() {
        return b.scale(&c);
    }
    if let Some(c) = b.as_constant() {
        return a.scale(&c);
    }
    finish(mul_terms(&a.0, &b.0))
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(&-Rational::one())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $body(self, rhs)
            }
        }
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $body(&self, rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add_exprs);
binop!(Mul, mul, mul_exprs);
binop!(Sub, sub, |a: &Expr, b: &Expr| add_exprs(a, &-b));

// ---------------------------------------------------------------------------
// Printing. The output is valid input for the parser and reparses to the
// same normal form.

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Function::Sin => f.write_str("sin"),
            Function::Cos => f.write_str("cos"),
            Function::Exp => f.write_str("exp"),
            Function::Opaque(n) => write!(f, "{n}"),
            Function::OpaqueDerivative(n) => write!(f, "{n}'"),
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::Symbol(s) => write!(f, "{s}"),
            Base::Pi => f.write_str("pi"),
            Base::Apply(func, arg) => write!(f, "{func}({arg})"),
            Base::Compound(inner) => write!(f, "({inner})"),
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (i, (b, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if e.is_one() {
                write!(f, "{b}")?;
            } else if e.is_integer() && e.is_positive() {
                write!(f, "{b}^{e}")?;
            } else {
                write!(f, "{b}^({e})")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.0.iter().rev().enumerate() {
            let magnitude = c.abs();
            match (i, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{magnitude}")?;
            } else if magnitude.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{magnitude}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}
