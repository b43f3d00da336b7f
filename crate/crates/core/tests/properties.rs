mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unimod_core::experiments::{self, DimensionPath};
use unimod_core::exponents::{self, ExtendedExponent};
use unimod_core::lp_geometry::{ball_sample, duality_maximizer, lp_norm};
use unimod_core::normest::{self, AscentSettings, EstimatorSettings};
use unimod_core::tensors::{rademacher, steinhaus};
use unimod_core::{Field, FormInstance};

use common::p;

fn exponent_strategy() -> impl Strategy<Value = ExtendedExponent> {
    prop_oneof![
        1 => Just(ExtendedExponent::Infinity),
        8 => (1i64..=12, 1i64..=40).prop_map(|(b, extra)| ExtendedExponent::ratio(b + extra, b).unwrap()),
        2 => (1i64..=12).prop_map(|b| ExtendedExponent::ratio(b, b).unwrap()),
    ]
}

fn complex_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect()
}

fn random_p(rng: &mut ChaCha8Rng) -> ExtendedExponent {
    match rng.gen_range(0..6) {
        0 => ExtendedExponent::Infinity,
        1 => ExtendedExponent::one(),
        _ => ExtendedExponent::from_f64(rng.gen_range(1.0..9.0)).unwrap(),
    }
}

proptest! {
    #[test]
    fn conjugation_is_an_involution(p in exponent_strategy()) {
        prop_assert_eq!(p.conjugate().conjugate(), p);
    }

    #[test]
    fn float_conjugation_is_an_involution(x in 1.0f64..1e6) {
        let p = ExtendedExponent::from_f64(x).unwrap();
        let back = p.conjugate().conjugate().to_f64();
        prop_assert!((back - x).abs() <= 1e-12 * x.max(1.0) * 1e3_f64.min(x));
    }

    #[test]
    fn theorem1_never_exceeds_ar(ps in prop::collection::vec(exponent_strategy(), 1..=6)) {
        let t1 = exponents::theorem1_exponent(&ps).unwrap();
        let ar = exponents::ar_exponent(&ps).unwrap();
        prop_assert!(t1 <= ar);
        let two = ExtendedExponent::two();
        let large = ps.iter().filter(|p| **p > two).count();
        let small = ps.iter().filter(|p| **p < two).count();
        if large >= 2 && small >= 1 && exponents::ar_gamma(&ps).unwrap() < two {
            prop_assert!(t1 < ar);
        }
    }

    #[test]
    fn theorem1_is_monotone_in_each_exponent(ps in prop::collection::vec(exponent_strategy(), 1..=5), k in 0usize..5, bump in exponent_strategy()) {
        let k = k % ps.len();
        let mut raised = ps.clone();
        raised[k] = ps[k].clone().max(bump);
        prop_assert!(exponents::theorem1_exponent(&ps).unwrap() <= exponents::theorem1_exponent(&raised).unwrap());
    }

    #[test]
    fn regime_coincidences(ps in prop::collection::vec(exponent_strategy(), 1..=6)) {
        let two = ExtendedExponent::two();
        let t1 = exponents::theorem1_exponent(&ps).unwrap();
        if ps.iter().all(|p| *p >= two) {
            prop_assert_eq!(&t1, &exponents::classical_ksz_exponent(&ps).unwrap());
        }
        if ps.iter().all(|p| *p <= two) {
            prop_assert_eq!(&t1, &exponents::bayart_exponent(&ps).unwrap());
        }
    }
}

#[test]
fn generators_are_unimodular() {
    for seed in 0..100 {
        let r = rademacher(&[3, 4, 2], seed).unwrap();
        assert!(r.signs().unwrap().iter().all(|s| *s == 1 || *s == -1));
        assert!(steinhaus(&[3, 4, 2], seed).unwrap().unimodularity_defect() <= 1e-12);
    }
}

#[test]
fn rademacher_mean_is_small() {
    let mut total = 0i64;
    for seed in 0..10_000 {
        total += rademacher(&[4, 4], seed).unwrap().signs().unwrap().iter().map(|&s| i64::from(s)).sum::<i64>();
    }
    let mean = total as f64 / 160_000.0;
    assert!(mean.abs() <= 0.02, "mean {mean}");
}

#[test]
fn steinhaus_sums_concentrate() {
    let mean_modulus: f64 = (0..1000)
        .map(|seed| steinhaus(&[8, 8], seed).unwrap().to_complex().iter().sum::<Complex64>().norm() / 64.0)
        .sum::<f64>()
        / 1000.0;
    assert!(mean_modulus < 0.5, "{mean_modulus}");
}

#[test]
fn evaluate_is_multilinear_and_partials_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..100 {
        let dims: Vec<usize> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(1..=4)).collect();
        let t = if trial % 2 == 0 { rademacher(&dims, trial).unwrap() } else { steinhaus(&dims, trial).unwrap() };
        let ps = vec![p("2"); dims.len()];
        let f = FormInstance::with_exponents(t, &ps).unwrap();
        let vs: Vec<Vec<Complex64>> = dims.iter().map(|&n| complex_vec(&mut rng, n)).collect();
        let k = rng.gen_range(0..dims.len());
        let lambda = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let y = complex_vec(&mut rng, dims[k]);

        let base = f.evaluate(&vs).unwrap();
        let mut with_y = vs.clone();
        with_y[k] = y.clone();
        let at_y = f.evaluate(&with_y).unwrap();
        let mut combo = vs.clone();
        combo[k] = vs[k].iter().zip(&y).map(|(x, y)| lambda * x + y).collect();
        let at_combo = f.evaluate(&combo).unwrap();
        let scale = 1.0 + base.norm() + at_y.norm();
        assert!((at_combo - lambda * base - at_y).norm() <= 1e-9 * scale * (1.0 + lambda.norm()));

        let c = f.partial_coefficients(&vs, k).unwrap();
        let via_c: Complex64 = c.iter().zip(&vs[k]).map(|(a, b)| a * b).sum();
        assert!((via_c - base).norm() <= 1e-9 * (1.0 + base.norm()));
    }
}

#[test]
fn hoelder_attainment_and_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..500 {
        let n = rng.gen_range(1..=7);
        let c = complex_vec(&mut rng, n);
        let pe = random_p(&mut rng);
        let d = duality_maximizer(&c, &pe);
        let pairing: Complex64 = c.iter().zip(&d.x).map(|(a, b)| a * b).sum();
        let dual = lp_norm(&c, &pe.conjugate());
        assert!(pairing.im.abs() <= 1e-10, "trial {trial}");
        assert!((pairing.re - dual).abs() <= 1e-10 * dual.max(1.0));
        assert!((d.value - dual).abs() <= 1e-10 * dual.max(1.0));
        assert!(lp_norm(&d.x, &pe) <= 1.0 + 1e-12);
        for s in 0..50 {
            let x = ball_sample(n, &pe, Field::Complex, (trial * 50 + s) as u64);
            let other: Complex64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!(other.re <= d.value + 1e-10);
        }
    }
}

#[test]
fn balls_are_nested() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let n = rng.gen_range(1..=8);
        let x = complex_vec(&mut rng, n);
        let (a, b) = (random_p(&mut rng), random_p(&mut rng));
        let (small, large) = if a <= b { (a, b) } else { (b, a) };
        assert!(lp_norm(&x, &large) <= lp_norm(&x, &small) * (1.0 + 1e-12));
    }
}

#[test]
fn ascent_objective_never_decreases() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..60 {
        let dims: Vec<usize> = (0..rng.gen_range(2..=3)).map(|_| rng.gen_range(1..=5)).collect();
        let t = if trial % 2 == 0 { rademacher(&dims, trial).unwrap() } else { steinhaus(&dims, trial).unwrap() };
        let ps: Vec<_> = dims.iter().map(|_| random_p(&mut rng)).collect();
        let f = FormInstance::with_exponents(t, &ps).unwrap();
        let start: Vec<_> = dims.iter().zip(&ps).enumerate().map(|(k, (&n, pe))| ball_sample(n, pe, f.field(), trial * 10 + k as u64)).collect();
        let mut trace = Vec::new();
        let est = normest::alternating_ascent_traced(&f, &start, AscentSettings::default(), &mut trace).unwrap();
        assert!(trace.windows(2).all(|w| w[1] >= w[0]));
        assert!((est.lower - *trace.last().unwrap()).abs() <= 1e-9 * est.lower.max(1e-300));
        for (k, w) in est.witness.iter().enumerate() {
            assert!(lp_norm(w, &ps[k]) <= 1.0 + 1e-10);
        }
    }
}

#[test]
fn estimates_grow_with_the_domain() {
    // p ≤ q componentwise gives B_p ⊆ B_q, so ‖A‖ on the p-domain is at most ‖A‖ on the q-domain.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let settings = EstimatorSettings { starts: 24, seed: 5, ..Default::default() };
    for trial in 0..40 {
        let t = rademacher(&[3, 4], trial).unwrap();
        let ps: Vec<_> = (0..2).map(|_| random_p(&mut rng)).collect();
        let qs: Vec<_> = ps.iter().map(|pk| pk.clone().max(random_p(&mut rng))).collect();
        let fp = FormInstance::with_exponents(t.clone(), &ps).unwrap();
        let fq = FormInstance::with_exponents(t, &qs).unwrap();
        let ep = normest::multi_start_estimate(&fp, &settings);
        let eq = normest::multi_start_estimate(&fq, &settings);
        assert!(ep.lower <= eq.lower + 1e-8, "{ps:?} -> {qs:?}: {} > {}", ep.lower, eq.lower);
    }
}

#[test]
fn hardy_littlewood_floor_holds() {
    let settings = EstimatorSettings { starts: 16, seed: 9, ..Default::default() };
    let large = ["2", "3", "4", "inf"];
    for n in 1..=4usize {
        for seed in 0..25u64 {
            let t = rademacher(&[n, n], seed).unwrap();
            for a in large {
                for b in large {
                    let ps = [p(a), p(b)];
                    let f = FormInstance::with_exponents(t.clone(), &ps).unwrap();
                    let est = normest::estimate_norm(&f, normest::MethodChoice::Auto, &settings).unwrap();
                    let floor = exponents::hl_lower_bound(&ps, n).unwrap();
                    assert!(est.value() >= floor - 1e-9, "n={n} seed={seed} ps=({a},{b}): {} < {floor}", est.value());
                }
            }
        }
    }
}

#[test]
fn certificate_ordering_on_three_slot_forms() {
    let settings = EstimatorSettings { starts: 16, seed: 3, ..Default::default() };
    for seed in 0..10 {
        let t = rademacher(&[2, 3, 3], seed).unwrap();
        let ps = [p("inf"), p("3/2"), p("inf")];
        let f = FormInstance::with_exponents(t, &ps).unwrap();
        let exact = normest::exact_vertex_norm(&f, normest::DEFAULT_VERTEX_LIMIT).unwrap();
        let est = normest::multi_start_estimate(&f, &settings);
        let basis = normest::basis_lower_bound(&f);
        assert!(basis <= est.lower + 1e-9);
        for k in 0..3 {
            let r = normest::restriction_lower_bound(&f, k, &settings).unwrap();
            assert!(r <= exact.upper.unwrap() + 1e-9);
        }
        assert!(est.lower <= exact.upper.unwrap() + 1e-9);
        assert!((est.lower - exact.lower).abs() <= 1e-6 * exact.lower, "seed {seed}: {} vs {}", est.lower, exact.lower);
    }
}

#[test]
fn experiment_records_are_reproducible() {
    let s = EstimatorSettings { starts: 4, seed: 1, ..Default::default() };
    let a = experiments::min_norm_search(&[p("3"), p("inf")], 5, 12, 77, normest::MethodChoice::Auto, &s, false).unwrap();
    let b = experiments::min_norm_search(&[p("3"), p("inf")], 5, 12, 77, normest::MethodChoice::Auto, &s, false).unwrap();
    assert_eq!(a.tensor, b.tensor);
    assert_eq!(a.estimate, b.estimate);

    let series = experiments::conjecture_series(DimensionPath::TailPair, &(1..=200).collect::<Vec<_>>()).unwrap();
    let ratios: Vec<f64> = series.rows.iter().map(|r| r.values["ratio"]).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn min_norm_respects_floor() {
    let s = EstimatorSettings { starts: 8, seed: 2, ..Default::default() };
    for ps in [["2", "2"], ["inf", "inf"], ["3", "inf"]] {
        let ps = [p(ps[0]), p(ps[1])];
        for n in [2, 3, 5] {
            let out = experiments::min_norm_search(&ps, n, 40, 5, normest::MethodChoice::Auto, &s, false).unwrap();
            assert!(out.estimate.value() >= exponents::hl_lower_bound(&ps, n).unwrap() - 1e-9);
        }
    }
}
