mod common;

use std::sync::Arc;

use common::{max_state_diff, observed_orders, small_params, Manufactured};
use lowmach::compressible::{
    energy_report, lighthill_sources, rhs_compressible, CompressibleStepper, EnergyLedger, FieldState, SolverOptions,
};
use lowmach::compressible::lighthill::tensor_div;
use lowmach::model::{pressure, SimParams};
use lowmach::spectral::random::{random_band_limited_scalar, random_band_limited_vector};
use lowmach::spectral::{curl, div, grad, laplacian, Grid, ScalarField, VectorField};

fn random_state(g: &Arc<Grid>, seed: u64) -> FieldState {
    FieldState {
        t: 0.0,
        rho: random_band_limited_scalar(g, 2, seed).scale(0.2).map(|v| v + 1.0),
        u: random_band_limited_vector(g, 2, seed + 1).scale(0.7),
        omega: random_band_limited_vector(g, 2, seed + 2).scale(0.5),
    }
}

#[test]
fn conservative_form_matches_primitive_form() {
    let p = SimParams {
        eps: 0.3,
        nu: 0.2,
        lambda: 0.4,
        lambda_p: 0.1,
        re_m: 1.3,
        ..small_params(0.3, 0.2)
    };
    let g = Grid::new(p.grid);
    let s = random_state(&g, 40);
    let d = rhs_compressible(&s, &p).unwrap();

    // momentum: d_t(rho u) = -div(rho u (x) u) - grad p / eps^2 + nu div S + 2 nu xi curl omega
    let u = s.u.comps();
    let f1: [[ScalarField; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| s.rho.mul(&u[i]).mul(&u[j])));
    let press = s.rho.map(|r| pressure(r, &p).unwrap());
    let div_s = s
        .u
        .map_comps(laplacian)
        .scale(p.mu + p.xi)
        .add(&grad(&div(&s.u)).scale(p.mu + p.lambda - p.xi));
    let rhs_m = tensor_div(&f1)
        .scale(-1.0)
        .sub(&grad(&press).scale(1.0 / (p.eps * p.eps)))
        .add(&div_s.scale(p.nu))
        .add(&curl(&s.omega).scale(2.0 * p.nu * p.xi));
    let lhs_m = d.du.mul_scalar(&s.rho).add(&s.u.mul_scalar(&d.drho));
    let scale = rhs_m.max_abs();
    assert!(lhs_m.sub(&rhs_m).max_abs() < 1e-8 * scale, "{}", lhs_m.sub(&rhs_m).max_abs() / scale);

    // angular momentum: d_t(rho w) = -div(rho w (x) u) + nu Re_M div M + 2 nu (xi curl u - 2 xi w)
    let w = s.omega.comps();
    let fw: [[ScalarField; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| s.rho.mul(&w[i]).mul(&u[j])));
    let div_m = s
        .omega
        .map_comps(laplacian)
        .scale(p.mu_p)
        .add(&grad(&div(&s.omega)).scale(p.mu_p + p.lambda_p));
    let rhs_w = tensor_div(&fw)
        .scale(-1.0)
        .add(&div_m.scale(p.nu * p.re_m))
        .add(&curl(&s.u).scale(2.0 * p.nu * p.xi))
        .sub(&s.omega.scale(4.0 * p.nu * p.xi));
    let lhs_w = d.domega.mul_scalar(&s.rho).add(&s.omega.mul_scalar(&d.drho));
    let scale = rhs_w.max_abs();
    assert!(lhs_w.sub(&rhs_w).max_abs() < 1e-8 * scale);

    // continuity
    let expect = div(&s.u.mul_scalar(&s.rho)).scale(-1.0);
    assert!(d.drho.sub(&expect).max_abs() < 1e-10 * expect.max_abs());
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let p = small_params(0.1, 0.05);
    let g = Grid::new(p.grid);
    let s0 = FieldState::equilibrium(&g);
    let mut st = CompressibleStepper::new(&s0, &p, &SolverOptions::default()).unwrap();
    for _ in 0..3 {
        st.step(0.37).unwrap();
    }
    let s = st.state();
    assert!(s.rho.sub(&s0.rho).max_abs() < 1e-14);
    assert!(s.u.max_abs() < 1e-14 && s.omega.max_abs() < 1e-14);
}

#[test]
fn mass_is_conserved_and_zero_coupling_keeps_omega_zero() {
    let mut p = small_params(0.2, 0.05);
    p.xi = 1e-300;
    let g = Grid::new(p.grid);
    let mut s0 = random_state(&g, 7);
    s0.omega = VectorField::zeros(&g);
    let m0 = s0.rho.integral();
    let mut st = CompressibleStepper::new(&s0, &p, &SolverOptions::default()).unwrap();
    for _ in 0..5 {
        let dt = st.stable_dt();
        st.step(dt).unwrap();
        let s = st.state();
        assert!(((s.rho.integral() - m0) / m0).abs() < 1e-12);
        assert!(s.omega.max_abs() < 1e-13, "{}", s.omega.max_abs());
    }
}

#[test]
fn manufactured_solution_is_second_order_in_time() {
    let m = Manufactured::new(small_params(0.5, 0.05), 3);
    let t_final = 0.5;
    let mut errors = Vec::new();
    for steps in [10usize, 20, 40] {
        let mut st = CompressibleStepper::new(&m.state(0.0), &m.params, &SolverOptions::default())
            .unwrap()
            .with_source({
                let mm = Manufactured::new(m.params, 3);
                Box::new(move |t| mm.source(t))
            });
        let dt = t_final / steps as f64;
        for _ in 0..steps {
            st.step(dt).unwrap();
        }
        errors.push(max_state_diff(&st.state(), &m.state(t_final)));
    }
    let orders = observed_orders(&errors);
    assert!(orders.iter().all(|&o| o >= 1.9), "errors {errors:?} orders {orders:?}");
}

#[test]
fn energy_residual_is_small_for_smooth_run() {
    let p = small_params(0.2, 0.05);
    let g = Grid::new(p.grid);
    let s0 = random_state(&g, 11);
    let mut st = CompressibleStepper::new(&s0, &p, &SolverOptions::default()).unwrap();
    let mut ledger = EnergyLedger::new();
    let r0 = energy_report(&st.state(), &mut ledger, &p);
    for k in 1..=5 {
        st.advance_to(0.05 * k as f64, Some(&mut ledger)).unwrap();
        energy_report(&st.state(), &mut ledger, &p);
    }
    assert!(ledger.max_abs_residual() < 1e-3 * r0.energy(), "{:?}", ledger.rows);
    assert!(ledger.rows.iter().all(|r| r.dissipated() >= 0.0));
}

#[test]
fn f3_is_quadratic_in_density_perturbation() {
    let p = small_params(0.1, 0.05);
    let g = Grid::new(p.grid);
    let sigma = random_band_limited_scalar(&g, 2, 5);
    let f3_norm = |amp: f64| {
        let s = FieldState {
            rho: sigma.map(|v| 1.0 + p.eps * amp * v),
            ..FieldState::equilibrium(&g)
        };
        lighthill_sources(&s, &p).f3[0][0].max_abs()
    };
    let ratio = f3_norm(0.4) / f3_norm(0.2);
    assert!((ratio - 4.0).abs() < 1e-9, "{ratio}");
}
