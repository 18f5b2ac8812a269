use std::f64::consts::PI;

use lowmach::harness::{fit_rate, run_weak_weak, DataSpec, SweepMode, SweepPlan};
use lowmach::model::{GridSpec, SimParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Twice the standard error should cover the true slope in about 95% of noisy fits.
#[test]
fn fit_half_width_covers_true_slope() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let xs: Vec<f64> = (0..20).map(|i| 0.2 * 0.85f64.powi(i)).collect();
    let trials = 100;
    let mut covered = 0;
    for _ in 0..trials {
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0 * x.powf(0.75) * (1.0 + noise.sample(&mut rng))).collect();
        let fit = fit_rate(&xs, &ys).unwrap();
        if (fit.slope - 0.75).abs() <= fit.half_width {
            covered += 1;
        }
    }
    assert!(covered >= 90, "covered {covered} of {trials}");
}

/// Without acoustic content in the data the gradient part of the velocity
/// stays far below the ill-prepared level.
#[test]
fn well_prepared_control_has_small_gradient_part() {
    let base = SimParams::DEFAULT.with_grid(GridSpec::new(16, 8.0 * PI).unwrap());
    let eps = vec![0.2, 0.1, 0.05];
    let mut plan = SweepPlan::new(SweepMode::WeakWeak, eps);
    plan.t_final = 0.2;
    let ill = run_weak_weak(&plan, &base).unwrap();
    plan.data = DataSpec::default().well_prepared();
    let well = run_weak_weak(&plan, &base).unwrap();
    for (a, b) in ill.rows.iter().zip(&well.rows) {
        let (ea, eb) = (a.e_grad.unwrap(), b.e_grad.unwrap());
        assert!(eb < 0.1 * ea, "eps {}: well {eb} vs ill {ea}", a.eps);
    }
}

#[test]
fn sweep_rows_follow_the_plan() {
    let base = SimParams::DEFAULT.with_grid(GridSpec::new(16, 8.0 * PI).unwrap());
    let mut plan = SweepPlan::new(SweepMode::WeakStrong, vec![0.2, 0.1, 0.05]);
    plan.t_final = 0.1;
    let report = lowmach::harness::run_sweep(&plan, &base).unwrap();
    assert_eq!(report.rows.len(), 3);
    for (row, eps) in report.rows.iter().zip([0.2, 0.1, 0.05]) {
        assert_eq!(row.eps, eps);
        assert_eq!(row.nu, eps);
        assert!(row.sup_rel_energy.unwrap() >= row.rel_energy_0.unwrap());
        assert!(row.gronwall.is_some() && row.corollary.is_some());
        assert!(row.e_grad.is_none());
    }
    assert!(report.fit("sup_rel_energy").is_some());
    assert!(report.checks.iter().any(|c| c.name == "gronwall"));
}
