use fraclap::lemmas::{delta_bound_ratio, poisson_mass, run_lemmas, LemmaConfig, LemmaTolerances};
use fraclap::*;

fn op(alpha: f64) -> GreenOperator {
    GreenOperator::assemble(make_grid(65).unwrap(), KernelParams::for_solver(alpha).unwrap()).unwrap()
}

#[test]
fn battery_passes_at_default_tolerances() {
    for alpha in [1.2, 1.5, 1.8] {
        let r = run_lemmas(&op(alpha), &LemmaConfig::default(), Execution::default()).unwrap();
        for c in &r.checks {
            assert!(c.passed, "alpha {alpha}: {c:?}");
        }
        assert!(r.passed);
        assert_eq!(r.checks.len(), 7);
    }
}

#[test]
fn tightened_tolerance_reports_failures_with_magnitudes() {
    let cfg = LemmaConfig { tol: LemmaTolerances::uniform(1e-15), ..LemmaConfig::default() };
    let r = run_lemmas(&op(1.5), &cfg, Execution::default()).unwrap();
    assert!(!r.passed);
    let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
    assert!(!failed.is_empty());
    for c in failed {
        assert!(c.magnitude > 1e-15 && c.magnitude.is_finite(), "{c:?}");
    }
}

#[test]
fn poisson_kernel_has_unit_mass() {
    for alpha in [0.5, 1.0, 1.2, 1.5, 1.8, 1.95] {
        let kp = KernelParams::new(1, alpha).unwrap();
        for (x, r) in [(0.0, 1.0), (0.3, 1.0), (-0.7, 1.0), (1.5, 2.0)] {
            let m = poisson_mass(x, r, &kp).unwrap();
            assert!((m - 1.0).abs() < 1e-10, "alpha {alpha} x {x}: {m}");
        }
    }
    let kp = KernelParams::for_solver(1.5).unwrap();
    assert!(poisson_mass(1.0, 1.0, &kp).is_err());
}

#[test]
fn delta_bound_ratio_is_two_sided() {
    for alpha in [1.2, 1.5, 1.8] {
        let kp = KernelParams::for_solver(alpha).unwrap();
        let (lo, hi) = delta_bound_ratio(&kp, 100, Execution::default()).unwrap();
        assert!(lo > 0.1 && hi < 10.0, "alpha {alpha}: [{lo}, {hi}]");
    }
}
