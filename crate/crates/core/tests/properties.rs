use std::f64::consts::PI;
use std::sync::Arc;

use lowmach::compressible::FieldState;
use lowmach::harness::fit_rate;
use lowmach::model::{helmholtz_h, helmholtz_h_prime, rel_pressure_p, relative_potential, GridSpec, SimParams};
use lowmach::relative_energy::{relative_energy, TestTriple};
use lowmach::spectral::random::{random_band_limited_scalar, random_band_limited_vector};
use lowmach::spectral::{curl, helmholtz_split, Grid, ScalarField, VectorField};
use proptest::prelude::*;

fn grid() -> Arc<Grid> {
    Grid::new(GridSpec::new(16, 8.0 * PI).unwrap())
}

fn params(gamma: f64) -> SimParams {
    SimParams::DEFAULT.with_gamma(gamma).unwrap()
}

/// Periodic shift by whole grid cells.
fn shift(f: &ScalarField, by: [usize; 3]) -> ScalarField {
    let g = f.grid();
    let n = g.n();
    let mut out = vec![0.0; g.len()];
    for (i, v) in f.values().iter().enumerate() {
        let (x, y, z) = g.unravel(i);
        out[g.index((x + by[0]) % n, (y + by[1]) % n, (z + by[2]) % n)] = *v;
    }
    ScalarField::from_values(g, out).unwrap()
}

fn shift_vec(v: &VectorField, by: [usize; 3]) -> VectorField {
    v.map_comps(|c| shift(c, by))
}

proptest! {
    #[test]
    fn relative_pressure_is_convex_with_minimum_at_one(
        gamma in 1.55f64..5.0, r1 in 0.01f64..10.0, r2 in 0.01f64..10.0, t in 0.0f64..=1.0,
    ) {
        let p = params(gamma);
        let mid = rel_pressure_p(t * r1 + (1.0 - t) * r2, &p).unwrap();
        let chord = t * rel_pressure_p(r1, &p).unwrap() + (1.0 - t) * rel_pressure_p(r2, &p).unwrap();
        prop_assert!(mid <= chord + 1e-12 * chord.abs());
        prop_assert!(rel_pressure_p(r1, &p).unwrap() >= 0.0);
        prop_assert_eq!(rel_pressure_p(1.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn relative_potential_is_a_bregman_distance(gamma in 1.55f64..5.0, rho in 0.05f64..5.0, r in 0.05f64..5.0) {
        let p = params(gamma);
        let d = relative_potential(rho, r, &p);
        prop_assert!(d >= 0.0);
        prop_assert_eq!(relative_potential(r, r, &p), 0.0);
        if (rho - r).abs() > 0.1 {
            let direct = helmholtz_h(rho, &p).unwrap() - helmholtz_h_prime(r, &p) * (rho - r) - helmholtz_h(r, &p).unwrap();
            prop_assert!((d - direct).abs() <= 1e-9 * direct.abs().max(1e-12), "{} vs {}", d, direct);
        }
    }

    #[test]
    fn exact_power_laws_fit_exactly(c in 0.1f64..10.0, slope in -2.0f64..3.0, n in 3usize..8) {
        let xs: Vec<f64> = (0..n).map(|i| 0.3 * 0.5f64.powi(i as i32)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(slope)).collect();
        let fit = fit_rate(&xs, &ys).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-9);
        prop_assert!(fit.half_width < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relative_energy_is_nonnegative_and_shift_invariant(
        seed in 0u64..10_000, amp in 0.05f64..0.6, eps in 0.02f64..0.5, sx in 0usize..16, sy in 0usize..16,
    ) {
        let g = grid();
        let p = SimParams::DEFAULT.with_eps(eps).unwrap();
        let s = FieldState {
            t: 0.0,
            rho: random_band_limited_scalar(&g, 3, seed).map(|v| 1.0 + amp * v),
            u: random_band_limited_vector(&g, 3, seed + 1),
            omega: random_band_limited_vector(&g, 3, seed + 2),
        };
        let tt = TestTriple::new(
            random_band_limited_scalar(&g, 3, seed + 3).map(|v| 1.0 + 0.5 * amp * v),
            random_band_limited_vector(&g, 3, seed + 4),
            random_band_limited_vector(&g, 3, seed + 5),
        ).unwrap();
        let e = relative_energy(&s, &tt, &p).unwrap();
        prop_assert!(e >= 0.0);

        let by = [sx, sy, 3];
        let s2 = FieldState {
            t: 0.0,
            rho: shift(&s.rho, by),
            u: shift_vec(&s.u, by),
            omega: shift_vec(&s.omega, by),
        };
        let tt2 = TestTriple::new(shift(&tt.r, by), shift_vec(&tt.u, by), shift_vec(&tt.w, by)).unwrap();
        let e2 = relative_energy(&s2, &tt2, &p).unwrap();
        prop_assert!((e - e2).abs() <= 1e-12 * e);

        let same = TestTriple::new(s.rho.clone(), s.u.clone(), s.omega.clone()).unwrap();
        prop_assert_eq!(relative_energy(&s, &same, &p).unwrap(), 0.0);
    }

    #[test]
    fn spectral_operators_commute_with_shifts(seed in 0u64..10_000, sx in 0usize..16, sz in 0usize..16) {
        let g = grid();
        let u = random_band_limited_vector(&g, 5, seed);
        let by = [sx, 1, sz];
        let a = curl(&shift_vec(&u, by));
        let b = shift_vec(&curl(&u), by);
        prop_assert!(a.sub(&b).max_abs() <= 1e-12 * b.max_abs());
    }

    #[test]
    fn helmholtz_parts_are_orthogonal_and_idempotent(seed in 0u64..10_000) {
        let g = grid();
        let u = random_band_limited_vector(&g, 5, seed);
        let (sol, gp) = helmholtz_split(&u);
        let cross = sol.dot(&gp).integral();
        let scale = u.dot(&u).integral();
        prop_assert!(cross.abs() <= 1e-12 * scale);
        let (sol2, gp2) = helmholtz_split(&sol);
        prop_assert!(sol2.sub(&sol).max_abs() <= 1e-12 * sol.max_abs());
        prop_assert!(gp2.max_abs() <= 1e-12 * sol.max_abs());
    }
}
