use divisim_core::diagnostics::{kendall_tau, ks_critical_two_sample, ks_statistic, pseudo_observations};
use divisim_core::riskfactor::{aggregate, reinject_marginals};
use divisim_core::{BetaMatrix, Distribution, Error, MarginalReinjection, RiskFactorModel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mixed_model() -> RiskFactorModel {
    let marginals = vec![
        Distribution::gamma(2.0, 1.0).unwrap(),
        Distribution::gamma_convolution([(0.5, 0.2), (1.0, 3.0), (0.3, 20.0)]).unwrap(),
        Distribution::poisson(4.0).unwrap(),
    ];
    let beta = BetaMatrix::new(&[vec![0.2, 0.8, 0.0], vec![0.0, 0.3, 0.7], vec![0.5, 0.0, 0.5]]).unwrap();
    RiskFactorModel::new(marginals, beta).unwrap()
}

#[test]
fn columns_follow_their_marginals() {
    let model = mixed_model();
    let n = 100_000;
    let s = model.sample(n, &mut rng(1));
    let crit = ks_critical_two_sample(n, n);
    for (i, d) in model.marginals().iter().enumerate() {
        let direct = d.sample(&mut rng(100 + i as u64), n);
        let ks = ks_statistic(&s.column(i), &direct).unwrap();
        assert!(ks < crit, "marginal {i}: KS {ks}");
    }
}

/// No pair (k, l) with a_k < a_l and b_k > b_l.
fn no_discordant_pair(a: &[f64], b: &[f64]) -> bool {
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&k, &l| a[k].total_cmp(&a[l]).then(b[k].total_cmp(&b[l])));
    order.windows(2).all(|w| b[w[0]] <= b[w[1]])
}

#[test]
fn pieces_sharing_a_factor_are_comonotone() {
    let model = mixed_model();
    let out = model.sample_detailed(5_000, &mut rng(2));
    for j in 0..3 {
        let on_factor: Vec<(usize, &[f64])> = (0..3).filter_map(|i| out.piece(i, j).map(|p| (i, p))).collect();
        for &(i, a) in &on_factor {
            for &(k, b) in &on_factor {
                assert!(no_discordant_pair(a, b), "factor {j}");
                // τ-b reaches 1 only without ties; marginal 2 is Poisson.
                if i != 2 && k != 2 {
                    assert_eq!(kendall_tau(a, b).unwrap(), 1.0, "factor {j}");
                }
            }
        }
    }
}

#[test]
fn factors_are_independent() {
    // Two Gamma(1,1) pieces on different factors: uniforms are F(x) = 1 − e^{−x}.
    let marginals = vec![Distribution::gamma(1.0, 1.0).unwrap(), Distribution::gamma(1.0, 1.0).unwrap()];
    let beta = BetaMatrix::new(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let model = RiskFactorModel::new(marginals, beta).unwrap();
    let n = 200_000;
    let s = model.sample(n, &mut rng(3));
    let u: Vec<f64> = s.column(0).iter().map(|x| 1.0 - (-x).exp()).collect();
    let v: Vec<f64> = s.column(1).iter().map(|x| 1.0 - (-x).exp()).collect();
    let corr = u.iter().zip(&v).map(|(a, b)| (a - 0.5) * (b - 0.5)).sum::<f64>() / n as f64 * 12.0;
    assert!(corr.abs() < 3.0 / (n as f64).sqrt(), "{corr}");
}

#[test]
fn zero_weights_contribute_nothing() {
    let marginals = vec![Distribution::gamma(2.0, 1.0).unwrap(), Distribution::poisson(3.0).unwrap()];
    // Row 0 ignores factor 1 in both models; only row 1's use of it differs.
    let a = BetaMatrix::new(&[vec![0.4, 0.0, 0.6], vec![0.0, 1.0, 0.0]]).unwrap();
    let b = BetaMatrix::new(&[vec![0.4, 0.0, 0.6], vec![0.5, 0.0, 0.5]]).unwrap();
    let sa = RiskFactorModel::new(marginals.clone(), a).unwrap().sample_detailed(1_000, &mut rng(4));
    let sb = RiskFactorModel::new(marginals, b).unwrap().sample_detailed(1_000, &mut rng(4));
    assert_eq!(sa.totals.column(0), sb.totals.column(0));
    assert!(sa.piece(0, 1).is_none());
    let model = mixed_model();
    assert_eq!(model.piece(0, 2), &Distribution::DegenerateZero);
}

#[test]
fn same_seed_same_output() {
    let model = mixed_model();
    assert_eq!(model.sample(2_000, &mut rng(5)), model.sample(2_000, &mut rng(5)));
    assert_ne!(model.sample(2_000, &mut rng(5)), model.sample(2_000, &mut rng(6)));
}

#[test]
fn heavy_tailed_marginals_need_an_approximant() {
    let beta = BetaMatrix::new(&[vec![1.0]]).unwrap();
    let err = RiskFactorModel::new(vec![Distribution::pareto(0.75).unwrap()], beta).unwrap_err();
    assert!(matches!(err, Error::MarginalNotDivisible { index: 0, .. }));
    assert!(err.to_string().contains("fit an approximant first"));
}

#[test]
fn beta_validation() {
    assert!(matches!(BetaMatrix::new(&[vec![0.5, 0.4]]), Err(Error::RowSumViolation { row: 0, .. })));
    assert!(BetaMatrix::new(&[vec![0.5, 0.5], vec![1.0]]).is_err());
    assert!(BetaMatrix::new(&[vec![1.5, -0.5]]).is_err());
    let beta = BetaMatrix::new(&[vec![1.0]]).unwrap();
    let two = vec![Distribution::gamma(1.0, 1.0).unwrap(); 2];
    assert!(RiskFactorModel::new(two, beta).is_err());
}

#[test]
fn aggregate_adds_columns() {
    let s = mixed_model().sample(100, &mut rng(7));
    let total = aggregate(&s);
    for (k, t) in total.iter().enumerate() {
        assert_eq!(*t, s.row(k).iter().sum::<f64>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reinjection_preserves_ranks(seed in 0u64..1000, n in 2usize..300) {
        let s = mixed_model().sample(n, &mut rng(seed));
        let targets = vec![
            Some(Distribution::pareto(0.75).unwrap()),
            Some(Distribution::lognormal(0.0, 2.0).unwrap()),
            None,
        ];
        let out = reinject_marginals(&s, &MarginalReinjection::new(targets).unwrap()).unwrap();
        prop_assert_eq!(pseudo_observations(&s), pseudo_observations(&out));
        prop_assert_eq!(out.column(2), s.column(2));
    }
}
