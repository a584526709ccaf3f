use metafib::asymptotics::{alpha_root, characteristic_poly};
use metafib::bounds::{
    bounds_record, check_one_sided_bounds, check_ratio_at_most_order, check_universal_bound, delta_r, lambda,
    GrowthCase,
};
use metafib::extended::{extend, ExtendedSequence};
use metafib::{generate, RSpec, Ratio, TailRule, Term, VrSequence};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Sublinear order tables: r(0) = 1 and each later r(n) drawn from [1, min(n, cap)].
fn orders(max_len: usize, cap: usize) -> impl Strategy<Value = Vec<usize>> {
    (2..=max_len).prop_flat_map(move |len| {
        let steps: Vec<BoxedStrategy<usize>> = (0..len)
            .map(|n| if n == 0 { Just(1).boxed() } else { (1..=n.min(cap)).boxed() })
            .collect();
        steps
    })
}

fn seq_of(r: &[usize]) -> VrSequence {
    let spec = RSpec::table(r.to_vec(), TailRule::Error).validate().unwrap();
    generate(&spec, r.len() - 1).unwrap()
}

fn frac(p: &Term, q: &Term) -> Ratio {
    Ratio::new(BigInt::from(p.clone()), BigInt::from(q.clone()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn engine_matches_direct_summation(r in orders(120, 20)) {
        let s = seq_of(&r);
        prop_assert!(s.term(0).is_one());
        for n in 1..r.len() {
            let direct = (1..=r[n]).fold(Term::zero(), |acc, k| acc + s.term(n - k));
            prop_assert_eq!(&direct, s.term(n));
        }
    }

    #[test]
    fn terms_are_monotone(r in orders(120, 20)) {
        let s = seq_of(&r);
        for n in 1..r.len() {
            if r[n] >= 2 {
                prop_assert!(s.term(n) > s.term(n - 1));
            } else {
                prop_assert_eq!(s.term(n), s.term(n - 1));
            }
        }
    }

    #[test]
    fn sandwich_and_trichotomy(r in orders(120, 20)) {
        let s = seq_of(&r);
        for n in 1..r.len() {
            let rec = bounds_record(&s, n).unwrap();
            prop_assert!(!rec.violates(), "{:?}", rec);
            prop_assert!(rec.case_matches(), "{:?}", rec);
            prop_assert!(check_one_sided_bounds(&s, n).unwrap());
            prop_assert!(check_ratio_at_most_order(&s, n).unwrap());
            if rec.delta_r == 1 {
                prop_assert_eq!(rec.case, GrowthCase::ExactDoubling);
                prop_assert_eq!(rec.actual, Ratio::from_integer(2.into()));
            }
        }
    }

    #[test]
    fn lambda_sides(r in orders(120, 20)) {
        let s = seq_of(&r);
        for n in 1..r.len() {
            let d = delta_r(&s, n).unwrap();
            let q = s.term_ratio(n).unwrap();
            let l = lambda(&s, n).unwrap();
            if d > 1 {
                prop_assert!(q <= l);
            } else if d < 1 {
                prop_assert!(q >= l);
            }
        }
    }

    #[test]
    fn universal_bound_holds(r in orders(120, 20)) {
        prop_assert!(check_universal_bound(&seq_of(&r)).holds());
    }

    /// Averages over longer trailing windows of a non-decreasing sequence are
    /// smaller: sum of the last `a` terms over the last `c` is at most `a/c`.
    #[test]
    fn sum_ratio_windows(r in orders(80, 12), picks in prop::collection::vec((0usize..1000, 0usize..1000, 0usize..1000), 20)) {
        let s = seq_of(&r);
        let top = r.len() - 1;
        for (x, y, z) in picks {
            let n = 2 + x % (top - 1).max(1);
            if n > top {
                continue;
            }
            let a = 2 + y % (n - 1).max(1);
            if a > n {
                continue;
            }
            let c = 1 + z % (a - 1);
            let long = s.window_sum(n - a, n - 1);
            let short = s.window_sum(n - c, n - 1);
            let q = frac(&long, &short);
            prop_assert!(q <= Ratio::new(BigInt::from(a), BigInt::from(c)));
            prop_assert!(q >= Ratio::one());
        }
    }

    #[test]
    fn agreeing_specs_agree(r in orders(60, 10)) {
        let s = seq_of(&r);
        let top = r.len() - 1;
        let repeat = RSpec::table(r.clone(), TailRule::RepeatLast).validate().unwrap();
        let periodic = RSpec::periodic(r.clone(), vec![1]).validate().unwrap();
        let (a, b) = (generate(&repeat, top).unwrap(), generate(&periodic, top).unwrap());
        prop_assert_eq!(s.terms(), a.terms());
        prop_assert_eq!(s.terms(), b.terms());
    }

    #[test]
    fn extension_is_linear_and_odd(
        m in 1usize..4,
        u in prop::collection::vec((-20i64..20, 1i64..9), 3),
        v in prop::collection::vec((-20i64..20, 1i64..9), 3),
        c in (-5i64..5, 1i64..4),
    ) {
        let spec = RSpec::unclamped_constant(m);
        let to = |xs: &[(i64, i64)]| -> Vec<Ratio> {
            xs[..m].iter().map(|&(p, q)| Ratio::new(p.into(), q.into())).collect()
        };
        let (u, v) = (to(&u), to(&v));
        let c = Ratio::new(c.0.into(), c.1.into());
        let mixed: Vec<Ratio> = u.iter().zip(&v).map(|(a, b)| c.clone() * a + b).collect();
        let ext = |init: &[Ratio]| -> ExtendedSequence<Ratio> { extend(&spec, init, 40, 10).unwrap() };
        let (eu, ev, em) = (ext(&u), ext(&v), ext(&mixed));
        for ((a, b), w) in eu.values().iter().zip(ev.values()).zip(em.values()) {
            prop_assert_eq!(w, &(c.clone() * a + b));
        }
        let neg: Vec<Ratio> = u.iter().map(|x| -x.clone()).collect();
        for (a, b) in ext(&neg).values().iter().zip(eu.values()) {
            prop_assert_eq!(a, &-b.clone());
        }
        prop_assert_eq!(eu.rebuild_from_bottom(), eu.values());
    }

    #[test]
    fn positive_init_on_sublinear_spec_stays_positive(r in orders(60, 8), p in 1i64..50, q in 1i64..50) {
        let spec = RSpec::table(r.clone(), TailRule::Error);
        let init = vec![Ratio::new(p.into(), q.into())];
        let ext = extend(&spec, &init, r.len() - 1, 5).unwrap();
        let s = seq_of(&r);
        for (n, beta) in ext.forward().iter().enumerate() {
            prop_assert!(*beta > Ratio::zero());
            prop_assert_eq!(beta, &(init[0].clone() * frac(s.term(n), &Term::one())));
        }
    }
}

#[test]
fn alpha_is_increasing_below_two() {
    let mut prev = 1.0;
    for order in 2..=30 {
        let a = alpha_root::<f64>(order, &1e-12).unwrap();
        assert!(a > prev && a < 2.0, "R = {order}: {a}");
        // |p(a)| ≤ tol · max |p'| on [1, 2], and |p'| ≤ R 2^R there
        let bound = 1e-12 * order as f64 * 2f64.powi(order as i32);
        assert!(characteristic_poly(order, &a).abs() <= bound);
        prev = a;
    }
}

#[test]
fn sequences_can_be_built_and_shared_across_threads() {
    let specs = [RSpec::fibonacci(), RSpec::even_odd(), RSpec::identity(), RSpec::alternating_two_three()];
    let built: Vec<VrSequence> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| scope.spawn(move || generate(&spec.validate().unwrap(), 500).unwrap()))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let shared = &built;
    std::thread::scope(|scope| {
        for i in 0..4 {
            scope.spawn(move || {
                let s = &shared[i];
                for n in 1..=500 {
                    assert!(!bounds_record(s, n).unwrap().violates());
                }
            });
        }
    });
    let again = generate(&specs[0].validate().unwrap(), 500).unwrap();
    assert_eq!(again.terms(), built[0].terms());
}
