use colombeau::asymptotics::{ultra_norm, AsymptoticsConfig, DecayClass, EpsGrid, EpsNet};
use colombeau::functionals::{delta, embed_genfunction, regular_corpus, Context};
use colombeau::genfun::{cube, integrate_at, point_value_net, GenFunConfig, GenFunction, Region, SmoothRep, SpaceTag};
use colombeau::mollifier::Cutoff;
use colombeau::scalars::{point_support, GenNumber, GenPoint};
use proptest::prelude::*;

fn acfg() -> AsymptoticsConfig {
    AsymptoticsConfig::default()
}

fn order(n: &EpsNet) -> f64 {
    match n.estimate(&acfg()).unwrap().class {
        DecayClass::Order(a) => a,
        c => panic!("expected an order, got {c:?}"),
    }
}

fn power(c: f64, a: f64) -> EpsNet {
    EpsNet::sample_real(&EpsGrid::default(), |e| c * e.powf(a))
}

fn coef() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0, prop::bool::ANY).prop_map(|(d, neg)| if neg { -(10f64.powf(d)) } else { 10f64.powf(d) })
}

#[derive(Clone, Debug)]
enum Tree {
    X,
    Eps,
    C(f64),
    Sin(Box<Tree>),
    Cos(Box<Tree>),
    ExpSin(Box<Tree>),
    Add(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
}

impl Tree {
    fn rep(&self) -> SmoothRep {
        match self {
            Tree::X => SmoothRep::var(0),
            Tree::Eps => SmoothRep::eps(),
            Tree::C(c) => SmoothRep::constant(*c),
            Tree::Sin(t) => t.rep().sin(),
            Tree::Cos(t) => t.rep().cos(),
            Tree::ExpSin(t) => t.rep().sin().exp(),
            Tree::Add(a, b) => a.rep() + b.rep(),
            Tree::Mul(a, b) => a.rep() * b.rep(),
        }
    }
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![Just(Tree::X), Just(Tree::Eps), (-2.0f64..2.0).prop_map(Tree::C)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Tree::Sin(Box::new(t))),
            inner.clone().prop_map(|t| Tree::Cos(Box::new(t))),
            inner.clone().prop_map(|t| Tree::ExpSin(Box::new(t))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Tree::Mul(Box::new(a), Box::new(b))),
        ]
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_law_slopes(a in -3i32..=3, c in coef()) {
        let s = order(&power(c, a as f64));
        prop_assert!((s - a as f64).abs() <= 0.05, "slope {s} for a = {a}");
    }

    #[test]
    fn sum_takes_the_smaller_order(a in -3i32..=3, b in -3i32..=3, c in coef(), d in coef()) {
        prop_assume!(a != b);
        let x = power(c, a as f64);
        let y = power(d, b as f64);
        let s = order(&x.zip_with(&y, |p, q| p + q).unwrap());
        prop_assert!((s - a.min(b) as f64).abs() <= 0.1);
    }

    #[test]
    fn product_adds_orders(a in -1.5f64..1.5, b in -1.5f64..1.5, c in coef(), d in coef()) {
        let x = power(c, a);
        let y = power(d, b);
        let s = order(&x.zip_with(&y, |p, q| p * q).unwrap());
        prop_assert!((s - (order(&x) + order(&y))).abs() <= 0.1);
    }

    #[test]
    fn ultrametric_inequality(a in -3i32..=3, b in -3i32..=3, c in coef(), d in coef()) {
        let x = power(c, a as f64);
        let y = power(d, b as f64);
        let sum = x.zip_with(&y, |p, q| p + q).unwrap();
        let n = |v: &EpsNet| ultra_norm(&v.estimate(&acfg()).unwrap()).unwrap();
        prop_assert!(n(&sum) <= n(&x).max(n(&y)) * 1.15);
    }

    #[test]
    fn refinement_keeps_beyond_order(k in 30u32..=40, c in 0.2f64..3.0) {
        let base = EpsGrid::default().with_kmax(k - 6);
        let f = |e: f64| (-c / e).exp();
        let coarse = EpsNet::sample_real(&base, f).estimate(&acfg()).unwrap();
        if let DecayClass::BeyondOrder(_) = coarse.class {
            let fine = EpsNet::sample_real(&base.with_kmax(k), f).estimate(&acfg()).unwrap();
            prop_assert!(!matches!(fine.class, DecayClass::Order(_)), "{fine:?}");
        }
    }

    #[test]
    fn equality_is_an_equivalence(a in -2i32..=2, b in -2i32..=2, c in coef(), d in coef(), flat in 0.5f64..2.0) {
        let g = EpsGrid::default();
        let x = GenNumber::sample(&g, |e| c * e.powi(a), &acfg()).unwrap();
        let x2 = GenNumber::sample(&g, |e| c * e.powi(a) + (-flat / e).exp(), &acfg()).unwrap();
        let y = GenNumber::sample(&g, |e| d * e.powi(b), &acfg()).unwrap();
        prop_assert!(x.equals(&x, &acfg()).unwrap());
        prop_assert_eq!(x.equals(&y, &acfg()).unwrap(), y.equals(&x, &acfg()).unwrap());
        prop_assert!(x.equals(&x2, &acfg()).unwrap() && x2.equals(&x, &acfg()).unwrap());
        if x2.equals(&y, &acfg()).unwrap() {
            prop_assert!(x.equals(&y, &acfg()).unwrap());
        }
    }

    #[test]
    fn scaling_round_trip(a in -2.0f64..2.0, c in coef(), r in -4i32..=4) {
        // integer powers of a dyadic eps are exact; other exponents leave
        // rounding noise near 1e-16 that no finite grid can call negligible
        let g = EpsGrid::default();
        let x = GenNumber::sample(&g, |e| c * e.powf(a), &acfg()).unwrap();
        let y = x.scale_eps_pow(r as f64).scale_eps_pow(-r as f64);
        prop_assert!(x.equals(&y, &acfg()).unwrap());
    }

    #[test]
    fn point_support_ignores_negligible_shifts(x0 in -4.0f64..4.0, c in -1.0f64..1.0, r in 0.5f64..3.0) {
        let g = EpsGrid::default();
        let w = [(-5.0, 5.0), (0.0, 0.0)];
        let p = GenPoint::shifted(&[x0], c, r);
        let q = GenPoint::from_fn(1, "perturbed", move |e| [x0 + c * e.powf(r) + e.powi(10), 0.0]).unwrap();
        let a = point_support(&p, &g, &w, 1e-3);
        let b = point_support(&q, &g, &w, 1e-3);
        prop_assert_eq!(a.len(), 1);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leibniz_rule(u in tree(), v in tree(), x in -2.0f64..2.0, e in 0.05f64..1.0) {
        let (ur, vr) = (u.rep(), v.rep());
        let du = ur.line_series(e, &[x], 1).unwrap();
        let dv = vr.line_series(e, &[x], 1).unwrap();
        let dp = (ur * vr).line_series(e, &[x], 1).unwrap();
        let want = du[1] * dv[0] + du[0] * dv[1];
        prop_assert!(close(dp[1], want, 1e-10), "{} vs {want}", dp[1]);
    }

    #[test]
    fn point_values_are_multiplicative(u in tree(), v in tree(), x0 in -1.0f64..1.0, r in 0.5f64..2.0) {
        let g = EpsGrid::default();
        let uf = GenFunction::new(u.rep(), 1).unwrap();
        let vf = GenFunction::new(v.rep(), 1).unwrap();
        let p = GenPoint::shifted(&[x0], 1.0, r);
        let a = point_value_net(&uf, &p, &g).unwrap();
        let b = point_value_net(&vf, &p, &g).unwrap();
        let uv = point_value_net(&uf.mul(&vf), &p, &g).unwrap();
        let d = a.zip_with(&b, |s, t| s * t).unwrap().zip_with(&uv, |s, t| s - t).unwrap();
        prop_assert_eq!(d.estimate(&acfg()).unwrap().class, DecayClass::IdenticallyZero);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integrals_add_over_adjacent_boxes(u in tree(), lo in -3.0f64..0.0, w1 in 0.2f64..2.0, w2 in 0.2f64..2.0, e in 0.05f64..1.0) {
        let cfg = GenFunConfig::default();
        let rep = u.rep();
        let whole = integrate_at(&rep, 1, &cube(1, lo, lo + w1 + w2), e, &cfg).unwrap();
        let left = integrate_at(&rep, 1, &cube(1, lo, lo + w1), e, &cfg).unwrap();
        let right = integrate_at(&rep, 1, &cube(1, lo + w1, lo + w1 + w2), e, &cfg).unwrap();
        prop_assert!(close(whole, left + right, 1e-8), "{whole} vs {}", left + right);
    }

    #[test]
    fn delta_is_linear(u in tree(), v in tree(), x0 in -1.0f64..1.0, al in -3.0f64..3.0, be in -3.0f64..3.0) {
        let ctx = Context::default();
        let t = delta(&GenPoint::shifted(&[x0], 0.5, 1.0), &ctx).unwrap();
        let uf = GenFunction::new(u.rep(), 1).unwrap();
        let vf = GenFunction::new(v.rep(), 1).unwrap();
        let comb = GenFunction::new(u.rep() * al + v.rep() * be, 1).unwrap();
        let lhs = t.apply_net(&comb, &ctx).unwrap();
        let a = t.apply_net(&uf, &ctx).unwrap();
        let b = t.apply_net(&vf, &ctx).unwrap();
        for ((l, p), q) in lhs.values.iter().zip(&a.values).zip(&b.values) {
            prop_assert!(close(l.re, al * p.re + be * q.re, 1e-12));
        }
    }

    #[test]
    fn kernel_functional_is_linear(u in tree(), v in tree(), c in -1.0f64..1.0, al in -3.0f64..3.0, be in -3.0f64..3.0) {
        let ctx = Context::default().with_grid(EpsGrid::default().with_kmax(16));
        let psi = Cutoff::centered(c, 0.5, 1.0);
        let k = GenFunction::new(SmoothRep::cutoff(&psi, SmoothRep::var(0)) * SmoothRep::var(0).cos(), 1)
            .unwrap()
            .with_support(Region::interval(0, c - 1.0, c + 1.0))
            .with_tag(SpaceTag::Gc);
        let t = embed_genfunction(&k);
        let uf = GenFunction::new(u.rep(), 1).unwrap();
        let vf = GenFunction::new(v.rep(), 1).unwrap();
        let comb = GenFunction::new(u.rep() * al + v.rep() * be, 1).unwrap();
        let lhs = t.apply_net(&comb, &ctx).unwrap();
        let a = t.apply_net(&uf, &ctx).unwrap();
        let b = t.apply_net(&vf, &ctx).unwrap();
        for ((l, p), q) in lhs.values.iter().zip(&a.values).zip(&b.values) {
            let scale = al.abs() * p.re.abs() + be.abs() * q.re.abs();
            prop_assert!((l.re - (al * p.re + be * q.re)).abs() <= 1e-8 * (1.0 + scale));
        }
    }
}

#[test]
fn delta_ignores_negligible_perturbations() {
    let ctx = Context::default();
    for x0 in [-0.6, 0.0, 0.35] {
        let a = delta(&GenPoint::shifted(&[x0], 1.0, 1.0), &ctx).unwrap();
        let b = delta(&GenPoint::from_fn(1, "perturbed", move |e| [x0 + e + e.powi(12), 0.0]).unwrap(), &ctx).unwrap();
        for p in regular_corpus() {
            let d = a.apply_net(&p.u, &ctx).unwrap().zip_with(&b.apply_net(&p.u, &ctx).unwrap(), |s, t| s - t).unwrap();
            let est = d.estimate(&ctx.asym).unwrap();
            assert!(est.class.is_negligible_class(), "{} at {x0}: {est:?}", p.name);
        }
    }
}
