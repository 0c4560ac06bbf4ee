use divisim_core::diagnostics::{
    kde, kendall_tau, ks_critical_two_sample, ks_statistic, pseudo_observations, qq_against_analytic, silverman_bandwidth,
    uniform_levels,
};
use divisim_core::{Distribution, SampleMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn draws(d: &Distribution, n: usize, seed: u64) -> Vec<f64> {
    d.sample(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

#[test]
fn qq_of_own_sample_is_close() {
    let d = Distribution::gamma(2.0, 1.0).unwrap();
    let deciles: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    for seed in 0..5 {
        let table = qq_against_analytic(&draws(&d, 10_000, seed), &d, &deciles).unwrap();
        for row in &table.rows {
            assert!((row.empirical / row.model - 1.0).abs() < 0.1, "seed {seed}: {row:?}");
        }
        for w in table.rows.windows(2) {
            assert!(w[0].empirical <= w[1].empirical && w[0].model <= w[1].model);
        }
    }
}

#[test]
fn kde_of_gaussian_at_zero() {
    let x = draws(&Distribution::gaussian(0.0, 1.0).unwrap(), 100_000, 1);
    let curve = kde(&x, &[0.0], None).unwrap();
    let expected = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    assert!((curve.points[0].1 - expected).abs() < 0.02);
}

#[test]
fn kde_integrates_to_one() {
    for (d, seed) in [
        (Distribution::gaussian(0.0, 1.0).unwrap(), 2),
        (Distribution::gamma(0.5, 2.0).unwrap(), 3),
        (Distribution::lognormal(0.0, 1.0).unwrap(), 4),
    ] {
        let x = draws(&d, 20_000, seed);
        let h = silverman_bandwidth(&x).unwrap();
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min) - 5.0 * h;
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 5.0 * h;
        let m = 20_000;
        let grid: Vec<f64> = (0..=m).map(|k| lo + (hi - lo) * k as f64 / m as f64).collect();
        let curve = kde(&x, &grid, None).unwrap();
        let mass: f64 = curve.points.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
        assert!((mass - 1.0).abs() < 0.01, "{}: {mass}", d.family());
        assert!(curve.points.iter().all(|p| p.1 >= 0.0));
    }
}

#[test]
fn independent_gamma_samples_pass_ks() {
    let d = Distribution::gamma(1.0, 1.0).unwrap();
    let n = 100_000;
    let crit = ks_critical_two_sample(n, n);
    assert!((crit - 0.0073).abs() < 1e-4);
    let failures = (0..5)
        .filter(|&seed| ks_statistic(&draws(&d, n, 2 * seed), &draws(&d, n, 2 * seed + 1)).unwrap() >= crit)
        .count();
    assert!(failures <= 1);
}

#[test]
fn tau_of_independent_uniforms() {
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let nf = n as f64;
    let bound = 3.0 * (2.0 * (2.0 * nf + 5.0) / (9.0 * nf * (nf - 1.0))).sqrt();
    assert!(kendall_tau(&a, &b).unwrap().abs() < bound);
}

#[test]
fn comonotone_columns_share_pseudo_observations() {
    let x = draws(&Distribution::gamma(2.0, 1.0).unwrap(), 1_000, 6);
    let y: Vec<f64> = x.iter().map(|v| v.exp() + 3.0 * v).collect();
    let s = SampleMatrix::from_columns(SampleMatrix::default_names(2), &[x, y]).unwrap();
    let p = pseudo_observations(&s);
    assert_eq!(p.column(0), p.column(1));
    assert_eq!(kendall_tau(&s.column(0), &s.column(1)).unwrap(), 1.0);
    let levels = uniform_levels(1_000);
    let mut sorted = p.column(0);
    sorted.sort_by(f64::total_cmp);
    assert_eq!(sorted, levels);
}

fn finite_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 1..max_len)
}

proptest! {
    #[test]
    fn ks_is_symmetric(a in finite_vec(60), b in finite_vec(60)) {
        prop_assert_eq!(ks_statistic(&a, &b).unwrap(), ks_statistic(&b, &a).unwrap());
    }

    #[test]
    fn ks_is_invariant_under_increasing_maps(a in finite_vec(60), b in finite_vec(60)) {
        let f = |v: &Vec<f64>| v.iter().map(|x| (x / 100.0).exp() + 2.0 * x).collect::<Vec<_>>();
        prop_assert_eq!(ks_statistic(&a, &b).unwrap(), ks_statistic(&f(&a), &f(&b)).unwrap());
    }

    #[test]
    fn pseudo_observations_ignore_increasing_maps(x in prop::collection::vec(0.0f64..50.0, 1..100)) {
        let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let a = SampleMatrix::from_columns(SampleMatrix::default_names(1), &[x]).unwrap();
        let b = SampleMatrix::from_columns(SampleMatrix::default_names(1), &[ex]).unwrap();
        let pa = pseudo_observations(&a);
        prop_assert_eq!(&pa, &pseudo_observations(&b));
        prop_assert!(pa.column(0).iter().all(|&u| u > 0.0 && u < 1.0));
    }

    #[test]
    fn tau_is_bounded_and_antisymmetric(pairs in prop::collection::vec((0u8..20, 0u8..20), 2..80)) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let neg: Vec<f64> = b.iter().map(|v| -v).collect();
        match (kendall_tau(&a, &b), kendall_tau(&a, &neg)) {
            (Ok(t), Ok(u)) => {
                prop_assert!((-1.0..=1.0).contains(&t));
                prop_assert!((t + u).abs() < 1e-12);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "inconsistent degenerate handling"),
        }
    }
}
