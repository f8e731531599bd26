//! Inspect parameters of stuck fits.
use bbarma::estimate::{fit, FitOptions};
use bbarma::mc::scenario_iii;
use bbarma::sim::{cosine_covariate, replication_rng, simulate};
use bbarma::{filter, log_likelihood};

#[test]
#[ignore]
fn probe_stuck_fit() {
    let config = scenario_iii(100, 0, 77);
    let spec = config.spec;
    let signal = config.signal.unwrap();
    let cov = cosine_covariate(&spec, config.n, signal.frequency);
    for rep in [38u64, 61, 106] {
        let mut rng = replication_rng(config.seed, rep * 2);
        let data = simulate(&spec, &config.true_params, config.n, Some(&cov), &mut rng).unwrap();
        let f = fit(&spec, &data, &FitOptions::default()).unwrap();
        println!(
            "rep={rep} conv={} iters={} ll={:.4} params={:?}",
            f.converged, f.n_iters, f.loglik, f.estimates()
        );
        let fs = filter(&spec, &f.params, &data).unwrap();
        let mu_min = fs.mu[1..].iter().cloned().fold(1.0f64, f64::min);
        let mu_max = fs.mu[1..].iter().cloned().fold(0.0f64, f64::max);
        println!("  mu range [{mu_min:.3e}, {:.6}]", mu_max);
        // likelihood at truth for comparison
        let ll_truth = log_likelihood(&spec, &config.true_params, &data).unwrap();
        println!("  ll at truth: {ll_truth:.4}");
        // try refit from truth
        let opts = FitOptions { init: Some(config.true_params.clone()), ..FitOptions::default() };
        let f2 = fit(&spec, &data, &opts).unwrap();
        println!("  refit from truth: conv={} iters={} ll={:.4} params={:?}", f2.converged, f2.n_iters, f2.loglik, f2.estimates());
    }
}
