use divisim::figures::{fit_approximants, fixture_approximants, Target, FIT_SIZE, FIXTURE_SEED};

#[test]
fn bundled_approximants_match_a_refit() {
    for target in [Target::Pareto, Target::LogNormal] {
        let fits = fit_approximants(target, FIXTURE_SEED, FIT_SIZE, &mut std::io::sink()).unwrap();
        let (gamma, ggc) = fixture_approximants(target);
        assert_eq!(fits.gamma.fitted, gamma, "{}", target.label());
        assert_eq!(fits.ggc.fitted, ggc, "{}", target.label());
    }
}
