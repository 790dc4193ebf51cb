use depbound_core::harness::compare::verdict;
use depbound_core::harness::{autocov_eigen_check, compare, estimate_tail, CompareParams, Statistic, TailEstimate, Verdict};
use depbound_core::process::{CoefficientRule, InnovationLaw, LinearProcessSpec, MatrixSeriesSpec, ProcessSpec, VarSpec};
use proptest::prelude::*;

fn ar1(kappa: f64, innovation: InnovationLaw) -> ProcessSpec {
    ProcessSpec::Linear(LinearProcessSpec::new(CoefficientRule::Geometric { kappa }, innovation))
}

fn grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

#[test]
fn linear_short_dominates_on_gaussian_ar1() {
    let spec = ar1(0.5, InnovationLaw::StandardGaussian);
    let params = CompareParams { p: Some(4.0), ..Default::default() };
    let rep = compare("nagaev_linear_short", &spec, &params, 100, &grid(5.0, 200.0, 8), 2000, 3).unwrap();
    assert!(rep.applicable);
    assert_eq!(rep.rows.len(), 8);
    assert_eq!(rep.violations(), 0);
    for row in &rep.rows {
        assert!(row.estimate.ci_low <= row.estimate.p_hat && row.estimate.p_hat <= row.estimate.ci_high);
    }
}

#[test]
fn doukhan_needs_bounded_innovations() {
    let rep = compare("doukhan_louhichi", &ar1(0.5, InnovationLaw::StandardGaussian), &CompareParams::default(), 50, &[10.0], 1000, 1)
        .unwrap();
    assert!(!rep.applicable);
    assert!(rep.rows.is_empty());
    assert!(rep.inapplicable_reason.unwrap().contains("bounded"));

    let bounded = ProcessSpec::Linear(LinearProcessSpec::new(
        CoefficientRule::Explicit { values: vec![1.0, 0.5, 0.25] },
        InnovationLaw::UniformSymmetric { half_width: 1.0 },
    ));
    let rep = compare("doukhan_louhichi", &bounded, &CompareParams::default(), 50, &grid(2.0, 60.0, 5), 1000, 1).unwrap();
    assert!(rep.applicable);
    assert_eq!(rep.violations(), 0);
}

#[test]
fn matrix_tau_bound_on_diagonal_series() {
    let spec = ProcessSpec::MatrixSeries(MatrixSeriesSpec::diagonal_ar(VarSpec::diagonal(4, 0.3), Some(3.0)));
    let rep = compare("matrix_bernstein_tau", &spec, &CompareParams::default(), 50, &grid(5.0, 150.0, 5), 1000, 2).unwrap();
    assert!(rep.applicable, "{:?}", rep.inapplicable_reason);
    assert_eq!(rep.violations(), 0);
    // Dependent terms cannot use the independent bound.
    let rep = compare("matrix_bernstein_independent", &spec, &CompareParams::default(), 50, &[10.0], 1000, 2).unwrap();
    assert!(!rep.applicable);
}

#[test]
fn compare_is_reproducible() {
    let spec = ar1(0.3, InnovationLaw::Rademacher);
    let params = CompareParams { p: Some(3.0), ..Default::default() };
    let a = compare("nagaev_linear_short", &spec, &params, 40, &[5.0, 20.0], 1000, 9).unwrap();
    let b = compare("nagaev_linear_short", &spec, &params, 40, &[5.0, 20.0], 1000, 9).unwrap();
    assert_eq!(a, b);
    let mut csv = Vec::new();
    a.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
}

#[test]
fn compare_rejects_bad_requests() {
    let spec = ar1(0.5, InnovationLaw::StandardGaussian);
    let p = CompareParams::default();
    assert!(compare("nagaev_linear_short", &spec, &p, 10, &[1.0], 10, 1).unwrap_err().is_validation());
    assert!(compare("g_q", &spec, &p, 10, &[1.0], 1000, 1).unwrap_err().is_validation());
    assert!(compare("nagaev_linear_short", &spec, &p, 10, &[-1.0], 1000, 1).unwrap_err().is_validation());
}

#[test]
fn autocov_inequality_holds_for_small_samples() {
    let spec = LinearProcessSpec::new(CoefficientRule::Geometric { kappa: 0.8 }, InnovationLaw::StandardGaussian);
    let rep = autocov_eigen_check(&spec, 64, 50, 4, None).unwrap();
    assert!(rep.all_hold);
    assert_eq!(rep.holds, 50);
    assert!(rep.max_ratio <= 1.0 + 1e-8);
    for (l, f) in rep.lambda_max.iter().zip(&rep.fourier_max) {
        assert!(*l <= f * (1.0 + 1e-8));
    }
}

#[test]
fn tail_estimate_counts_exceedances() {
    let spec = ProcessSpec::Linear(LinearProcessSpec::new(CoefficientRule::Explicit { values: vec![1.0] }, InnovationLaw::Rademacher));
    let est = estimate_tail(&spec, &Statistic::AbsSum, 1, &[0.5, 1.5], 1000, 5).unwrap();
    // |ε| = 1 always.
    assert_eq!(est[0].hits, 1000);
    assert_eq!(est[1].hits, 0);
    assert_eq!(est[1].ci_low, 0.0);
    assert!(est[1].ci_high > 0.0 && est[1].ci_high < 0.01);
}

#[test]
fn verdicts_follow_the_interval() {
    let tiny = depbound_core::bounds::nagaev_linear_short(10, 1e6, 4.0, 1.0, 1.0, 1.0).unwrap();
    assert!(!tiny.vacuous);
    let none = TailEstimate::from_hits(10, 1e6, 0, 1000, 0);
    let half = TailEstimate::from_hits(10, 1e6, 500, 1000, 0);
    assert_eq!(verdict(&tiny, &none), Verdict::Dominated);
    assert_eq!(verdict(&tiny, &half), Verdict::ViolationFlag);
    let huge = depbound_core::bounds::nagaev_linear_short(10, 1e-3, 4.0, 1.0, 1.0, 1.0).unwrap();
    assert!(huge.vacuous);
    assert_eq!(verdict(&huge, &half), Verdict::VacuousBound);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clopper_pearson_brackets_the_proportion(reps in 1usize..5000, frac in 0.0f64..=1.0) {
        let hits = (frac * reps as f64).floor() as u64;
        let e = TailEstimate::from_hits(10, 1.0, hits, reps, 0);
        prop_assert!(e.ci_low <= e.p_hat + 1e-15 && e.p_hat <= e.ci_high + 1e-15);
        prop_assert!((0.0..=1.0).contains(&e.ci_low) && (0.0..=1.0).contains(&e.ci_high));
        if hits == 0 { prop_assert_eq!(e.ci_low, 0.0); }
        if hits == reps as u64 { prop_assert_eq!(e.ci_high, 1.0); }
    }
}
