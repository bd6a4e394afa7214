use gaf_zeros::covariance::{binomial_covariance, spectral_factorize, two_dependent};
use gaf_zeros::expected_zeros::{expected_zeros, Method};
use gaf_zeros::montecarlo::{
    count_zeros_in_disk, empirical_expected_zeros, sample_coefficients_stream, winding_number, McConfig,
};
use gaf_zeros::Execution;

fn config(r: f64, trials: usize, seed: u64) -> McConfig {
    McConfig {
        truncation: 400,
        trials,
        seed,
        r,
        diagnostics: false,
        execution: Execution::Parallel,
    }
}

#[test]
fn interior_covariance_matches_analytic_mean_at_half_radius() {
    let cov = two_dependent(0.2, 0.05).unwrap();
    let rep = empirical_expected_zeros(&cov, &config(0.5, 2000, 7)).unwrap();
    let analytic = expected_zeros(&cov, 0.5, Method::Residue).unwrap().total;
    assert!(
        (rep.mean - analytic).abs() <= 3.0 * rep.stderr,
        "mean {} analytic {analytic} stderr {}",
        rep.mean,
        rep.stderr
    );
    assert!(rep.tail_bound < 1e-100);
}

#[test]
fn root_counts_agree_with_winding_numbers() {
    let cov = binomial_covariance(3);
    let filter = spectral_factorize(&cov).unwrap();
    let mut disagreements = 0;
    let trials = 300;
    for i in 0..trials {
        let coeffs = sample_coefficients_stream(&filter, 401, 99, i);
        for r in [0.5, 0.8] {
            let count = count_zeros_in_disk(&coeffs, r).unwrap() as i64;
            if winding_number(&coeffs, r).unwrap() != count {
                disagreements += 1;
            }
        }
    }
    assert!(
        disagreements as f64 <= 0.001 * (2 * trials) as f64,
        "{disagreements} disagreements"
    );
}

#[test]
fn reports_are_reproducible() {
    let cov = two_dependent(0.4, 0.1).unwrap();
    let mut cfg = config(0.7, 40, 123);
    cfg.diagnostics = true;
    let a = empirical_expected_zeros(&cov, &cfg).unwrap();
    let b = empirical_expected_zeros(&cov, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.winding_disagreements, 0);
    cfg.execution = Execution::Sequential;
    assert_eq!(empirical_expected_zeros(&cov, &cfg).unwrap(), a);
}
