use predens::estimators::{PointEstimator, PredictiveDensity};
use predens::metrics::LossSpec;
use predens::risk::{gamma_dual_inverse_mean, l2_dual_mixture_bound, NormalModel};
use predens::sim::{
    dominance_scan, importance_sample_dual, mc_risk, mc_risk_paired, standard_mu_grid, unbiasedness_check, DualVariant,
    Model, Verdict,
};
use predens::special::norm_cdf;
use predens::MixingLaw;

fn plugin(model: &Model, c2: f64) -> PredictiveDensity {
    PredictiveDensity::plugin(&model.qy, PointEstimator::Identity, c2.sqrt()).unwrap()
}

#[test]
fn risk_estimates_are_bit_identical_across_runs_and_pools() {
    let model = Model::normal(3, 1.0, 1.0).unwrap();
    let est = PredictiveDensity::plugin(&model.qy, PointEstimator::james_stein(1.0).unwrap(), 1.2).unwrap();
    let mu = [1.0, 0.5, 0.0];
    let n = 3 * (1 << 16) + 17;
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_risk(&model, &est, &LossSpec::L2Integrated, &mu, n, 11).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(1));
    assert_eq!(one, run(3));
    assert_eq!(one.mean.to_bits(), run(4).mean.to_bits());
}

#[test]
fn pairing_reduces_the_variance_of_differences() {
    let model = Model::normal(4, 1.0, 1.0).unwrap();
    let js = PredictiveDensity::plugin(&model.qy, PointEstimator::james_stein(1.0).unwrap(), 1.0).unwrap();
    for (i, mu) in standard_mu_grid(4).iter().enumerate() {
        for (a, b, loss) in [
            (plugin(&model, 2.0), plugin(&model, 1.0), LossSpec::L2Integrated),
            (js.clone(), plugin(&model, 1.0), LossSpec::L1Integrated),
        ] {
            let pr = mc_risk_paired(&model, &a, &b, &loss, mu, 20_000, i as u64).unwrap();
            let unpaired = pr.first.se.powi(2) + pr.second.se.powi(2);
            assert!(pr.diff_se.powi(2) <= unpaired, "mu={mu:?}: {} vs {unpaired}", pr.diff_se.powi(2));
        }
    }
}

#[test]
fn identical_estimators_tie_exactly() {
    let model = Model::normal(2, 1.0, 1.0).unwrap();
    let e = plugin(&model, 1.0);
    let rep = dominance_scan(&e, &e, &LossSpec::L2Integrated, &model, &standard_mu_grid(2), 1000, 5).unwrap();
    assert_eq!(rep.verdict, Verdict::Inconclusive);
    assert!(rep.points.iter().all(|p| p.diff == 0.0 && p.diff_se == 0.0));
}

#[test]
fn mc_risk_in_c_is_minimised_near_the_optimal_expansion() {
    let r = 1.0;
    let model = Model::normal(2, r, 1.0).unwrap();
    let cs: Vec<f64> = (0..13).map(|k| 0.8 + 0.1 * k as f64).collect();
    let risks: Vec<f64> = cs
        .iter()
        .map(|c| mc_risk(&model, &plugin(&model, c * c), &LossSpec::L2Integrated, &[0.7, 0.0], 200_000, 3).unwrap().mean)
        .collect();
    let best = risks.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!((cs[best] - (1.0f64 + r).sqrt()).abs() <= 0.1 + 1e-12, "argmin c = {}", cs[best]);
    let (left, right) = risks.split_at(best);
    assert!(left.windows(2).all(|w| w[1] < w[0]));
    assert!(right.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn l1_plugin_risk_matches_the_defining_expectation() {
    let model = Model::normal(1, 1.0, 1.0).unwrap();
    let mc = mc_risk(&model, &plugin(&model, 1.0), &LossSpec::L1Integrated, &[0.0], 200_000, 8).unwrap();
    // E[4Φ(|X|/2) − 2] for X ~ N(0,1), by Simpson's rule on [0, 12]
    let m = 4000;
    let h = 12.0 / m as f64;
    let f = |x: f64| 2.0 * (4.0 * norm_cdf(x / 2.0) - 2.0) * (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let truth: f64 = (0..=m)
        .map(|k| {
            let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            w * f(k as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    assert!((mc.mean - truth).abs() <= 3.0 * mc.se, "{} ± {} vs {truth}", mc.mean, mc.se);
}

#[test]
fn gamma_dual_estimates_match_the_closed_form_grid() {
    let mut checked = 0;
    for a1 in [2.0f64, 3.0, 4.0] {
        for a2 in [2.0f64, 3.0, 4.0] {
            for p in [3usize, 4, 5] {
                let half = p as f64 / 2.0;
                if a1 <= half || a2 <= half {
                    continue;
                }
                let truth = gamma_dual_inverse_mean(a1, a2, 1.0, p).unwrap();
                let (g, h) = (MixingLaw::gamma(a1, 1.0).unwrap(), MixingLaw::gamma(a2, 1.0).unwrap());
                let b = l2_dual_mixture_bound(&g, &h, p, 200_000, 17 + checked).unwrap();
                let (mean, se) = (b.moments["inverse_mean"], b.moments["inverse_mean_se"]);
                assert!((mean - truth).abs() <= 3.0 * se, "({a1},{a2},{p}): {mean} ± {se} vs {truth}");
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 17);
}

#[test]
fn degenerate_dual_laws_are_enumerated_with_equal_weights() {
    let (g, h) = (MixingLaw::point(1.0).unwrap(), MixingLaw::point(1.0).unwrap());
    let l1 = importance_sample_dual(&g, &h, 5, DualVariant::L1, &[-0.5], 1000, 1).unwrap();
    assert!(l1.exact);
    assert!((l1.moment(-0.5).unwrap().mean - 0.8f64.powf(-0.5)).abs() < 1e-12);
    let l2 = importance_sample_dual(&g, &h, 3, DualVariant::L2, &[1.0], 1000, 1).unwrap();
    // z2 is drawn from the law of V1 + W1 + W2, here the atom 3
    assert!((l2.moment(1.0).unwrap().mean - 0.75).abs() < 1e-12);
}

#[test]
fn plain_plugin_is_unbiased_for_the_widened_density_only() {
    let m = NormalModel::new(2, 1.0, 1.0).unwrap();
    let ys = vec![vec![0.0, 0.0], vec![1.0, -1.0], vec![2.0, 0.5]];
    let rep = unbiasedness_check(&m, 1.0, &[0.0, 0.0], &ys, 200_000, 4).unwrap();
    assert!(rep.pass);
    assert!(!rep.unbiased_for_target);
    assert!(rep.points.iter().all(|p| (p.expected - p.target).abs() > 1e-3));
}

#[test]
fn small_samples_still_pass_the_unbiasedness_check() {
    let m = NormalModel::new(1, 0.5, 1.0).unwrap();
    let rep = unbiasedness_check(&m, 0.5, &[0.3], &[vec![0.0], vec![1.0]], 100, 21).unwrap();
    assert!(rep.unbiased_for_target);
    assert!(rep.points.iter().all(|p| p.se > 1e-4));
}
