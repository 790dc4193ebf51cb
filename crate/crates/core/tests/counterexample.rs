use depbound_core::counterexample::{
    alpha_upper_bound, beta_lower_bound, dimension_sweep, markov_collapse_check, orthant_theta, separation_witness,
    write_sweep_csv,
};
use depbound_core::process::{CoefficientRule, InnovationLaw, LinearProcessSpec, ProcessSpec, VarSpec};
use depbound_core::Error;
use proptest::prelude::*;

#[test]
fn orthant_probability_matches_closed_form() {
    // ρ = 0 gives independence and ρ = 1 gives P(Z ≤ 0) = 1/2.
    assert!((orthant_theta(0.5, 0) - 0.5).abs() < 1e-15);
    assert!((orthant_theta(1e-300, 1) - 0.25).abs() < 1e-15);
    let rho: f64 = 0.25;
    assert!((orthant_theta(0.5, 2) - (0.25 + rho.asin() / (2.0 * std::f64::consts::PI))).abs() < 1e-15);
}

#[test]
fn witness_is_reproducible_and_separates() {
    let a = separation_witness(200, 0.5, 2, 2000, 5).unwrap();
    let b = separation_witness(200, 0.5, 2, 2000, 5).unwrap();
    assert_eq!(a, b);
    assert!(a.p_joint > a.p_product);
    assert!(a.beta_lower_empirical > 0.0);
    assert!(a.threshold > 0.25 && a.threshold < a.theta);
}

#[test]
fn witness_rejects_bad_inputs() {
    assert!(matches!(separation_witness(10, 1.0, 2, 2000, 1), Err(Error::Invalid { .. })));
    assert!(matches!(separation_witness(10, 0.5, 2, 10, 1), Err(Error::Invalid { .. })));
    assert!(matches!(separation_witness(0, 0.5, 2, 2000, 1), Err(Error::Invalid { .. })));
}

#[test]
fn markov_check_distinguishes_models() {
    let ar = ProcessSpec::Linear(LinearProcessSpec::new(CoefficientRule::Geometric { kappa: 0.4 }, InnovationLaw::StandardGaussian));
    assert!(markov_collapse_check(&ar, 3).unwrap().markov);
    let ma = ProcessSpec::Linear(LinearProcessSpec::new(
        CoefficientRule::Explicit { values: vec![1.0, 0.5] },
        InnovationLaw::StandardGaussian,
    ));
    assert!(matches!(markov_collapse_check(&ma, 1), Err(Error::NotApplicable { .. })));
    assert!(markov_collapse_check(&ProcessSpec::Var(VarSpec::diagonal(4, 0.2)), 1).is_ok());
}

#[test]
fn alpha_bound_rejects_nonstationary_transition() {
    assert!(alpha_upper_bound(&VarSpec::diagonal(3, 1.5), 1).is_err());
}

#[test]
fn sweep_csv_has_header_and_rows() {
    let rows = dimension_sweep(&[5, 50], 0.5, 2, 1000, 9).unwrap();
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("d,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_bound_increases_with_dimension(d in 1u64..1_000_000, kappa in 0.05f64..0.95, m in 1u32..6) {
        let a = beta_lower_bound(d, kappa, m);
        let b = beta_lower_bound(d * 2, kappa, m);
        prop_assert!(b >= a);
        prop_assert!(a <= 1.0);
    }

    #[test]
    fn alpha_bound_ignores_dimension(d in 1usize..60, kappa in 0.05f64..0.95, m in 0u32..8) {
        let small = alpha_upper_bound(&VarSpec::standardized_diagonal(1, kappa), m).unwrap();
        let big = alpha_upper_bound(&VarSpec::standardized_diagonal(d, kappa), m).unwrap();
        prop_assert_eq!(small.value, big.value);
        prop_assert!((big.unclamped - kappa.powi(m as i32)).abs() <= 4.0 * f64::EPSILON * kappa.powi(m as i32));
    }
}
