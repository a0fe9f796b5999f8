//! Exact identities checked on seeded random polynomial inputs.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jetcartan::geometry::{
    compose_pi10, contact_form, is_sopde, prolong_along, prolong_on_e, sopde_from_coefficients, vertical_endomorphism,
    DiffForm, JetContext, Role, VectorField,
};
use jetcartan::lagrangian::Lagrangian;
use jetcartan::random::{
    random_form, random_lagrangian, random_polynomial, random_smooth_expression, random_sopde_table,
    random_vertical_field, PolySpec,
};
use jetcartan::symcore::{Expr, Functions, Point, Symbol};
use jetcartan::symmetry::check_iden00;

const SMALL: PolySpec = PolySpec { max_terms: 3, max_degree: 2, coeff_bound: 3 };

fn context(rng: &mut ChaCha8Rng, max_k: usize, max_n: usize) -> JetContext {
    let k = rng.random_range(1..=max_k);
    let n = rng.random_range(1..=max_n);
    JetContext::new(k, n).unwrap().with_order(2).unwrap()
}

fn lagrangian(rng: &mut ChaCha8Rng, ctx: &JetContext) -> Lagrangian {
    Lagrangian::new(ctx.clone(), random_lagrangian(rng, ctx, SMALL)).unwrap()
}

fn field_on_j1(rng: &mut ChaCha8Rng, ctx: &JetContext) -> VectorField {
    let all = ctx.coordinates(1);
    let mut comps = BTreeMap::new();
    for s in &all {
        if rng.random_bool(0.5) {
            comps.insert(s.clone(), random_polynomial(rng, &all, SMALL));
        }
    }
    VectorField::new(Role::OnJ1, comps).unwrap()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn diff_is_linear_and_leibniz(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 2, 2);
        let syms = ctx.coordinates(1);
        let a = random_smooth_expression(&mut rng, &syms, SMALL);
        let b = random_smooth_expression(&mut rng, &syms, SMALL);
        let s = &syms[rng.random_range(0..syms.len())];
        let (p, q) = (Expr::ratio(3, 2), Expr::int(-2));
        let lhs = (&p * &a + &q * &b).diff(s).unwrap();
        let rhs = &p * &a.diff(s).unwrap() + &q * &b.diff(s).unwrap();
        prop_assert!((&lhs - &rhs).is_zero());
        let leibniz = (&a * &b).diff(s).unwrap() - a.diff(s).unwrap() * &b - &a * b.diff(s).unwrap();
        prop_assert!(leibniz.is_zero(), "{}", leibniz);
    }

    #[test]
    fn mixed_partials_commute(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 2, 2);
        let syms = ctx.coordinates(1);
        let e = random_smooth_expression(&mut rng, &syms, SMALL);
        let s = &syms[rng.random_range(0..syms.len())];
        let t = &syms[rng.random_range(0..syms.len())];
        prop_assert_eq!(e.diff(s).unwrap().diff(t).unwrap(), e.diff(t).unwrap().diff(s).unwrap());
    }

    #[test]
    fn symbolic_derivative_matches_central_difference(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 2, 2);
        let syms = ctx.coordinates(1);
        let e = random_smooth_expression(&mut rng, &syms, SMALL);
        let s = syms[rng.random_range(0..syms.len())].clone();
        let pt: Point = syms.iter().map(|t| (t.clone(), rng.random_range(-1.0..1.0))).collect();
        let h = 1e-5;
        let shifted = |d: f64| {
            let mut p = pt.clone();
            *p.get_mut(&s).unwrap() += d;
            e.eval(&p, &Functions::new()).unwrap()
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        let exact = e.diff(&s).unwrap().eval(&pt, &Functions::new()).unwrap();
        prop_assert!((fd - exact).abs() < 1e-6, "{} d/d{}: {} vs {}", e, s, exact, fd);
    }

    #[test]
    fn exterior_derivative_squares_to_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 2, 2);
        let degree = rng.random_range(0..=2);
        let w = random_form(&mut rng, &ctx, degree, SMALL);
        prop_assert!(w.exterior_derivative().unwrap().exterior_derivative().unwrap().is_zero());
    }

    #[test]
    fn lie_derivative_is_a_derivation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 2, 2);
        let degree = rng.random_range(0..=2);
        let w = random_form(&mut rng, &ctx, degree, SMALL);
        let f = random_polynomial(&mut rng, &ctx.coordinates(1), SMALL);
        let x = field_on_j1(&mut rng, &ctx);
        let lhs = w.scale(&f).lie_derivative(&x).unwrap();
        let rhs = w.scale(&x.apply(&f).unwrap()).add(&w.lie_derivative(&x).unwrap().scale(&f)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn vertical_endomorphisms_compose_to_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 3, 2);
        let x = field_on_j1(&mut rng, &ctx);
        let a = rng.random_range(1..=ctx.k());
        let b = rng.random_range(1..=ctx.k());
        let once = vertical_endomorphism(&ctx, b, &x).unwrap();
        let twice = vertical_endomorphism(&ctx, a, &once).unwrap();
        prop_assert!(twice.components().values().all(Expr::is_zero));
    }

    #[test]
    fn coefficient_tables_define_second_order_fields(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 3, 2);
        let table = random_sopde_table(&mut rng, &ctx, SMALL);
        let gamma = sopde_from_coefficients(&ctx, &table).unwrap();
        prop_assert!(is_sopde(&ctx, &gamma).unwrap().holds);
    }

    #[test]
    fn prolongation_commutes_with_projection(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 3, 3);
        let x = random_vertical_field(&mut rng, &ctx, Role::OnE, &ctx.coordinates(0), SMALL);
        let along = prolong_along(&ctx, &compose_pi10(&x).unwrap()).unwrap();
        let on_e = prolong_on_e(&ctx, &x).unwrap();
        prop_assert_eq!(along.components(), on_e.components());
    }
}

proptest! {
    #![proptest_config(config(20))]

    #[test]
    fn cartan_forms_are_semi_basic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 3, 2);
        let l = lagrangian(&mut rng, &ctx);
        for theta in l.cartan_one_forms().unwrap() {
            prop_assert!(theta.terms().all(|(b, _)| !b[0].is_first_jet()));
        }
    }

    #[test]
    fn k_cosymplectic_and_k_form_relations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 3, 2);
        let l = lagrangian(&mut rng, &ctx);
        prop_assert!(l.check_am21().unwrap().holds());
        prop_assert!(l.cartan_k_form().unwrap().agrees());
    }

    #[test]
    fn identity_for_vertical_fields_along_the_projection(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 3, 3);
        let l = lagrangian(&mut rng, &ctx);
        let x = random_vertical_field(&mut rng, &ctx, Role::AlongPi10, &ctx.coordinates(1), SMALL);
        let r = check_iden00(&x, &l).unwrap();
        prop_assert!(r.is_zero(), "{}", r);
    }

    #[test]
    fn cartan_forms_on_second_order_fields(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 3, 2);
        let (k, n) = (ctx.k(), ctx.n());
        let l = lagrangian(&mut rng, &ctx);
        let table = random_sopde_table(&mut rng, &ctx, SMALL);
        let gamma = sopde_from_coefficients(&ctx, &table).unwrap();
        let thetas = l.cartan_one_forms().unwrap();
        let omegas = l.cartan_two_forms().unwrap();

        // i_{Gamma_alpha} Theta^alpha = k L
        let trace = Expr::sum(thetas.iter().zip(gamma.fields()).map(|(t, g)| t.contract(g).unwrap().as_scalar()));
        prop_assert_eq!(trace, l.expr() * &Expr::int(k as i64));

        // L_{Gamma_alpha} Theta^alpha - dL - (Gamma_alpha(p^alpha_i) - dL/dq^i) delta q^i
        //   = p^alpha_i (Gamma^i_{beta alpha} - Gamma^i_{alpha beta}) dx^beta
        let dl = DiffForm::scalar(l.expr().clone()).exterior_derivative().unwrap();
        let lie: Vec<DiffForm> = thetas.iter().zip(gamma.fields()).map(|(t, g)| t.lie_derivative(g).unwrap()).collect();
        let lie_sum = DiffForm::sum(1, &lie).unwrap();
        let mut lhs = lie_sum.sub(&dl).unwrap();
        for i in 1..=n {
            let coeff = Expr::sum((1..=k).map(|a| gamma.field(a).apply(l.momentum(i, a)).unwrap()))
                - l.expr().diff(&Symbol::q(i)).unwrap();
            lhs = lhs.sub(&contact_form(&ctx, i).scale(&coeff)).unwrap();
        }
        let mut rhs = DiffForm::zero(1);
        for beta in 1..=k {
            let c = Expr::sum((1..=n).flat_map(|i| {
                let table = &table;
                let l = &l;
                (1..=k).map(move |a| l.momentum(i, a) * &(table.get(i, beta, a) - table.get(i, a, beta)))
            }));
            rhs = rhs.add(&DiffForm::monomial(c, vec![Symbol::x(beta)]).unwrap()).unwrap();
        }
        prop_assert_eq!(lhs, rhs);

        // i_{Gamma_alpha} Omega^alpha - (k-1) dL = -(L_{Gamma_alpha} Theta^alpha - dL)
        let contracted: Vec<DiffForm> = omegas.iter().zip(gamma.fields()).map(|(w, g)| w.contract(g).unwrap()).collect();
        let left = DiffForm::sum(1, &contracted).unwrap().sub(&dl.scale(&Expr::int(k as i64 - 1))).unwrap();
        let right = lie_sum.sub(&dl).unwrap().scale(&Expr::int(-1));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn euler_lagrange_coefficients_are_the_hessian(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = context(&mut rng, 3, 2);
        let l = lagrangian(&mut rng, &ctx);
        let el = l.euler_lagrange().unwrap();
        for i in 1..=ctx.n() {
            let (coeffs, _) = el.get(i).linear_split(&Symbol::is_second_jet).unwrap();
            for j in 1..=ctx.n() {
                for a in 1..=ctx.k() {
                    for b in a..=ctx.k() {
                        let h = l.hessian_entry(i, a, j, b).unwrap();
                        let expected = if a == b { h } else { &h + &l.hessian_entry(i, b, j, a).unwrap() };
                        let got = coeffs.get(&Symbol::second_jet(j, a, b)).cloned().unwrap_or_else(Expr::zero);
                        prop_assert_eq!(got, expected);
                    }
                }
            }
        }
    }
}
