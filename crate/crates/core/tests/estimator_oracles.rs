mod common;

use common::threads;
use fracmc_core::bounds::{bias_bound, hitting_time_moment, variance_bound, z_second_moment_bound};
use fracmc_core::catalog::{forcing_terminal_moment, reference_value};
use fracmc_core::diagnostics::{bias_decay_check, running_means, slln_check, Coupling};
use fracmc_core::estimator::sample_values;
use fracmc_core::{
    estimate, BoundInputs, BoundsReport, Endpoint, Function, Moments, ProblemSpec, Sequential, StableSpec,
    SubordinatorSpec, TailBoundParams, TimeWindow,
};

fn problem(abar: f64) -> ProblemSpec {
    ProblemSpec::new(
        SubordinatorSpec::new(0.5).unwrap(),
        StableSpec::new(1.5, 1.0, 1).unwrap(),
        TimeWindow::with_length(abar).unwrap(),
    )
}

#[test]
fn unbiased_for_power_initial_data() {
    for (i, (eta, abar)) in [(0.5, 1.0), (0.3, 4.0), (0.7, 2.0)].into_iter().enumerate() {
        let p = problem(abar).with_phi(Function::power(1.0, eta));
        let r = estimate(&p, 1_000_000, 0.0, 30 + i as u64, &threads()).unwrap();
        let exact = reference_value(&p).unwrap();
        let z = (r.mean - exact) / r.stderr();
        assert!(z.abs() < 4.0, "eta {eta}: {} vs {exact} ({z:.2} SE)", r.mean);
    }
}

#[test]
fn constant_forcing_within_one_step_of_the_mean_time() {
    let k = 2.5;
    for endpoint in [Endpoint::Left, Endpoint::Right] {
        let p = problem(3.0).with_g(Function::constant(k)).with_endpoint(endpoint);
        let h = 0.05;
        let r = estimate(&p, 200_000, h, 31, &threads()).unwrap();
        let exact = k * hitting_time_moment(1.0, 0.5, 3.0).unwrap();
        // h⌊T/h⌋ lies in (T - h, T]
        assert!(r.mean <= exact + 4.0 * r.stderr(), "{endpoint:?}: {} vs {exact}", r.mean);
        assert!(r.mean >= exact - k * h - 4.0 * r.stderr(), "{endpoint:?}: {} vs {exact}", r.mean);
    }
}

#[test]
fn strong_law_along_nested_runs() {
    let p = problem(1.0).with_phi(Function::power(1.0, 0.5));
    let values = sample_values(&p, 1_000_000, 0.0, 32, &threads()).unwrap();
    let traj = running_means(&values, &[1_000, 10_000, 100_000, 1_000_000]);
    let last = traj.last().unwrap();
    let exact = reference_value(&p).unwrap();
    assert!((last.mean - exact).abs() < 4.0 * last.stderr);
    // each deviation from the final mean is within noise of its own standard error, and the noise shrinks
    for w in traj.windows(2) {
        assert!((w[0].mean - last.mean).abs() < 4.0 * w[0].stderr + 1e-15);
        assert!(w[1].stderr < w[0].stderr);
    }
    let report = slln_check(&p, 200_000, 0.0, 33, &[10_000, 50_000, 100_000, 150_000, 200_000], &threads()).unwrap();
    assert!(report.settles(), "{report:?}");
}

#[test]
fn strong_law_with_forcing() {
    let p = problem(2.0).with_g(Function::power(1.0, 0.5));
    let report = slln_check(&p, 100_000, 0.05, 34, &[10_000, 25_000, 50_000, 75_000, 100_000], &threads()).unwrap();
    assert!(report.settles(), "{report:?}");
}

fn third_abs_central(values: &[f64]) -> f64 {
    let mean = Moments::from_slice(values).mean;
    values.iter().map(|v| (v - mean).abs().powi(3)).sum::<f64>() / values.len() as f64
}

#[test]
fn third_moment_stabilises_under_slow_growth() {
    let p = problem(1.0).with_phi(Function::power(1.0, 0.25));
    let values = sample_values(&p, 1_000_000, 0.0, 35, &threads()).unwrap();
    let small = third_abs_central(&values[..100_000]);
    let large = third_abs_central(&values);
    assert!(((small - large) / large).abs() < 0.05, "{small} vs {large}");
}

#[test]
fn variance_and_second_moment_bounds_dominate() {
    let catalog = [
        (problem(1.0).with_phi(Function::power(1.0, 0.5)), 0.0f64),
        (problem(2.0).with_phi(Function::power(1.0, 0.3)), 0.0),
        (problem(1.0).with_g(Function::power(1.0, 0.5)), 0.05),
        (problem(1.0).with_phi(Function::constant(1.0)).with_g(Function::power(1.0, 0.5)), 0.05),
        (problem(1.0).with_g(Function::constant(1.0)), 0.05),
    ];
    for (i, (p, h)) in catalog.iter().enumerate() {
        let params = TailBoundParams::default_for(p).unwrap();
        let report = BoundsReport::compute(p, params, 100_000, h.max(0.01), BoundInputs::default()).unwrap();
        let values = sample_values(p, 100_000, *h, 40 + i as u64, &threads()).unwrap();
        let m = Moments::from_slice(&values);
        let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
        let sq_m = Moments::from_slice(&sq);
        // standard error of the sample variance from the fourth-moment proxy
        let centred: Vec<f64> = values.iter().map(|v| (v - m.mean).powi(2)).collect();
        let var_se = Moments::from_slice(&centred).stderr();
        assert!(m.variance() <= report.var_bound + 4.0 * var_se, "#{i}: var {} > {}", m.variance(), report.var_bound);
        assert!(
            sq_m.mean <= report.z_sq_bound + 4.0 * sq_m.stderr(),
            "#{i}: E[Y²] {} > {}",
            sq_m.mean,
            report.z_sq_bound
        );
        assert_eq!(variance_bound(p, report.phi_sq_bound).unwrap(), report.var_bound);
        assert_eq!(z_second_moment_bound(p, report.phi_sq_bound).unwrap(), report.z_sq_bound);
    }
}

#[test]
fn bias_bound_dominates_coupled_differences() {
    let p = problem(1.0).with_g(Function::power(1.0, 0.5));
    let m3 = forcing_terminal_moment(&p, 1.0).unwrap();
    let decay = bias_decay_check(&p, &[0.2, 0.1, 0.05], 0.002, 20_000, 36, Coupling::CommonPath, &threads()).unwrap();
    for pt in &decay.points {
        let bound = bias_bound(&p, pt.h, m3).unwrap();
        assert!(pt.mean_abs <= bound + 4.0 * pt.stderr_abs, "h {}: {} > {bound}", pt.h, pt.mean_abs);
    }
}

#[test]
fn estimates_do_not_depend_on_the_executor() {
    let p = problem(2.0).with_phi(Function::power(1.0, 0.5)).with_g(Function::power(1.0, 0.5));
    let a = estimate(&p, 5_000, 0.05, 37, &Sequential).unwrap();
    let b = estimate(&p, 5_000, 0.05, 37, &threads()).unwrap();
    assert_eq!(a, b);
}
