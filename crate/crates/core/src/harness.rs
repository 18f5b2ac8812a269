//! Low-Mach sweeps: initial data, per-eps runs, rate fits and reports.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acoustics::{
    acoustic_propagate, local_decay_metrics, regularized_acoustic_data, sample_trajectory, wraparound_time,
    AcousticState, LocalDecay,
};
use crate::compressible::{AprioriAccumulator, AprioriTable, CompressibleStepper, FieldState, SolverOptions};
use crate::error::{Error, Result};
use crate::incompressible::{IncompressibleState, IncompressibleStepper, Target};
use crate::model::SimParams;
use crate::relative_energy::{
    compose_test_triple, corollary_norms, dissipation_blocks, gronwall_alpha, gronwall_check, gronwall_coefficient,
    relative_energy, GronwallReport, RelEnergyTrace,
};
use crate::spectral::{central_box_mask, curl, grad, helmholtz_split, Grid, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    WeakWeak,
    WeakStrong,
}

/// Viscosity along the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuRule {
    Fixed(f64),
    /// `nu = eps`.
    EqualsEps,
}

impl NuRule {
    pub fn nu(&self, eps: f64) -> f64 {
        match *self {
            NuRule::Fixed(nu) => nu,
            NuRule::EqualsEps => eps,
        }
    }
}

/// Mollification parameter of the acoustic data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaRule {
    Fixed(f64),
    /// `eta = sqrt(eps)`.
    SqrtEps,
}

impl EtaRule {
    pub fn eta(&self, eps: f64) -> f64 {
        match *self {
            EtaRule::Fixed(eta) => eta,
            EtaRule::SqrtEps => eps.sqrt(),
        }
    }
}

/// Recipe for the eps-independent profiles of the initial data.
///
/// Every profile is a sum of `bumps` smooth compactly supported bumps of
/// radius `radius`, centred within `spread` of the box centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSpec {
    pub rho1_amp: f64,
    pub vortex_amp: f64,
    pub acoustic_amp: f64,
    pub omega_amp: f64,
    pub radius: f64,
    pub spread: f64,
    pub bumps: usize,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec {
            rho1_amp: 1.0,
            vortex_amp: 1.0,
            acoustic_amp: 1.0,
            omega_amp: 0.5,
            radius: 3.0,
            spread: 0.75,
            bumps: 3,
        }
    }
}

impl DataSpec {
    pub fn well_prepared(self) -> Self {
        DataSpec {
            rho1_amp: 0.0,
            acoustic_amp: 0.0,
            ..self
        }
    }

    pub fn validate(&self, box_len: f64) -> Result<()> {
        for (name, v) in [
            ("data.rho1_amp", self.rho1_amp),
            ("data.vortex_amp", self.vortex_amp),
            ("data.acoustic_amp", self.acoustic_amp),
            ("data.omega_amp", self.omega_amp),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if !(self.radius > 0.0 && self.spread >= 0.0) {
            return Err(Error::param("data.radius", "radius must be positive and spread nonnegative"));
        }
        let reach = self.radius + self.spread * 3f64.sqrt();
        if reach > 3.0 * box_len / 16.0 {
            return Err(Error::param(
                "data.radius",
                format!(
                    "support reach {reach} exceeds the cut-off plateau half-width {}",
                    3.0 * box_len / 16.0
                ),
            ));
        }
        if self.bumps == 0 {
            return Err(Error::param("data.bumps", "need at least one bump"));
        }
        Ok(())
    }
}

/// `rho0 = 1 + eps rho1`, `u0 = v0 + grad Psi0`, `omega0`.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub rho0: ScalarField,
    pub u0: VectorField,
    pub omega0: VectorField,
    pub rho1: ScalarField,
    pub v0: VectorField,
    pub grad_psi0: VectorField,
}

impl InitialData {
    pub fn state(&self) -> FieldState {
        FieldState {
            t: 0.0,
            rho: self.rho0.clone(),
            u: self.u0.clone(),
            omega: self.omega0.clone(),
        }
    }
}

fn bump(r2: f64, radius: f64) -> f64 {
    let s2 = r2 / (radius * radius);
    if s2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    }
}

struct Bump {
    centre: [f64; 3],
    dir: [f64; 3],
    weight: f64,
}

fn draw_bumps(rng: &mut ChaCha8Rng, spec: &DataSpec, box_len: f64) -> Vec<Bump> {
    (0..spec.bumps)
        .map(|_| {
            let centre = std::array::from_fn(|_| 0.5 * box_len + spec.spread * rng.gen_range(-1.0..=1.0));
            let mut dir: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-12);
            dir.iter_mut().for_each(|d| *d /= norm);
            let weight = rng.gen_range(0.5..=1.0);
            Bump { centre, dir, weight }
        })
        .collect()
}

fn scalar_profile(grid: &Arc<Grid>, bumps: &[Bump], radius: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|b| {
                let r2: f64 = (0..3).map(|c| (x[c] - b.centre[c]).powi(2)).sum();
                b.weight * bump(r2, radius)
            })
            .sum()
    })
}

fn vector_profile(grid: &Arc<Grid>, bumps: &[Bump], radius: f64) -> VectorField {
    VectorField::from_fn(grid, |x| {
        let mut out = [0.0; 3];
        for b in bumps {
            let r2: f64 = (0..3).map(|c| (x[c] - b.centre[c]).powi(2)).sum();
            let v = b.weight * bump(r2, radius);
            for c in 0..3 {
                out[c] += v * b.dir[c];
            }
        }
        out
    })
}

/// Ill-prepared data; the profiles depend on `seed` only, not on `eps`.
pub fn make_ill_prepared_data(grid: &Arc<Grid>, spec: &DataSpec, eps: f64, seed: u64) -> Result<InitialData> {
    spec.validate(grid.box_len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho_bumps = draw_bumps(&mut rng, spec, grid.box_len());
    let vort_bumps = draw_bumps(&mut rng, spec, grid.box_len());
    let ac_bumps = draw_bumps(&mut rng, spec, grid.box_len());
    let om_bumps = draw_bumps(&mut rng, spec, grid.box_len());
    let rho1 = scalar_profile(grid, &rho_bumps, spec.radius).scale(spec.rho1_amp);
    let v0 = curl(&vector_profile(grid, &vort_bumps, spec.radius)).scale(spec.vortex_amp);
    let grad_psi0 = grad(&scalar_profile(grid, &ac_bumps, spec.radius)).scale(spec.acoustic_amp);
    let omega0 = vector_profile(grid, &om_bumps, spec.radius).scale(spec.omega_amp);
    let rho0 = rho1.map(|v| 1.0 + eps * v);
    if rho0.min() <= 0.5 {
        return Err(Error::param(
            "data.rho1_amp",
            format!("initial density drops to {} at eps = {eps}; it must stay above 1/2", rho0.min()),
        ));
    }
    Ok(InitialData {
        rho0,
        u0: v0.add(&grad_psi0),
        omega0,
        rho1,
        v0,
        grad_psi0,
    })
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Twice the standard error of the slope.
    pub half_width: f64,
    /// Indices of points dropped for a nonpositive or non-finite metric.
    pub excluded: Vec<usize>,
}

pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::Fit("xs and ys differ in length".into()));
    }
    let mut excluded = Vec::new();
    let mut pts = Vec::new();
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
            pts.push((x.ln(), y.ln()));
        } else {
            excluded.push(i);
        }
    }
    let n = pts.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 positive points, have {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(RateFit {
        slope,
        intercept,
        half_width: 2.0 * se,
        excluded,
    })
}

fn default_k_fraction() -> f64 {
    0.25
}
fn default_samples() -> usize {
    10
}
fn default_theta() -> f64 {
    0.9
}
fn default_decay_samples() -> usize {
    64
}
fn default_slope_margin() -> f64 {
    0.05
}

/// Everything that defines a sweep besides the physical constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub mode: SweepMode,
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    pub nu_rule: NuRule,
    pub eta_rule: EtaRule,
    pub t_final: f64,
    #[serde(default)]
    pub data: DataSpec,
    /// Side of the central measurement box as a fraction of the box length.
    #[serde(default = "default_k_fraction")]
    pub k_fraction: f64,
    /// Output samples per run (corollary norms, a priori entries).
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Acoustic local-decay window as a fraction of the wrap-around time.
    #[serde(default = "default_theta")]
    pub decay_theta: f64,
    #[serde(default = "default_decay_samples")]
    pub decay_samples: usize,
    /// Allowed shortfall of the relative-energy slope below alpha.
    #[serde(default = "default_slope_margin")]
    pub slope_margin: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl SweepPlan {
    pub fn new(mode: SweepMode, eps_list: Vec<f64>) -> Self {
        SweepPlan {
            mode,
            eps_list,
            nu_rule: match mode {
                SweepMode::WeakWeak => NuRule::Fixed(0.05),
                SweepMode::WeakStrong => NuRule::EqualsEps,
            },
            eta_rule: EtaRule::Fixed(0.1),
            t_final: 0.5,
            data: DataSpec::default(),
            k_fraction: default_k_fraction(),
            samples: default_samples(),
            decay_theta: default_theta(),
            decay_samples: default_decay_samples(),
            slope_margin: default_slope_margin(),
            seed: 0,
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self, base: &SimParams) -> Result<()> {
        if self.eps_list.len() < 2 {
            return Err(Error::param("plan.eps_list", "need at least two values"));
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::param("plan.eps_list", "must be strictly decreasing"));
        }
        for &eps in &self.eps_list {
            base.with_eps(eps)?.with_nu(self.nu_rule.nu(eps))?;
            let eta = self.eta_rule.eta(eps);
            if !(eta > 0.0 && eta <= base.grid.box_len / 4.0) {
                return Err(Error::param("plan.eta_rule", format!("eta = {eta} must lie in (0, L/4]")));
            }
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::param("plan.t_final", "must be positive"));
        }
        if !(self.k_fraction > 0.0 && self.k_fraction <= 1.0) {
            return Err(Error::param("plan.k_fraction", "must lie in (0, 1]"));
        }
        if self.samples == 0 || self.decay_samples == 0 {
            return Err(Error::param("plan.samples", "must be positive"));
        }
        if !(self.decay_theta > 0.0 && self.decay_theta < 1.0) {
            return Err(Error::param("plan.decay_theta", "must lie in (0, 1)"));
        }
        self.data.validate(base.grid.box_len)?;
        self.solver.validate()
    }
}

/// Distance from the data support to the periodic seam.
pub fn data_gap(box_len: f64) -> f64 {
    box_len / 4.0
}

/// One eps of a sweep. Mode-specific entries are `None` when not measured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub nu: f64,
    pub eta: f64,
    pub steps: usize,
    pub e_sol: Option<f64>,
    pub e_grad: Option<f64>,
    pub e_omega: Option<f64>,
    pub rel_energy_0: Option<f64>,
    pub sup_rel_energy: Option<f64>,
    /// Sup over output samples of each corollary norm.
    pub corollary: Option<[f64; 4]>,
    pub gronwall: Option<GronwallReport>,
    pub decay: LocalDecay,
    pub apriori: AprioriTable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedFit {
    pub metric: String,
    #[serde(flatten)]
    pub fit: RateFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub mode: SweepMode,
    pub nu_rule: NuRule,
    /// `min(1/4, 1/(2 gamma))`.
    pub alpha: f64,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<NamedFit>,
    pub checks: Vec<CheckResult>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn fit(&self, metric: &str) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.metric == metric).map(|f| &f.fit)
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn masked_l2_sq(v: &VectorField, mask: &[bool]) -> f64 {
    let mut sum = 0.0;
    for c in v.comps() {
        for (x, &m) in c.values().iter().zip(mask) {
            if m {
                sum += x * x;
            }
        }
    }
    sum * v.grid().cell_volume()
}

/// Running `int_0^T ||f||^2_{L2(K)} dt` by the trapezoidal rule.
#[derive(Debug, Default, Clone, Copy)]
struct TimeL2 {
    integral: f64,
    last: Option<(f64, f64)>,
}

impl TimeL2 {
    fn push(&mut self, t: f64, value_sq: f64) {
        if let Some((t0, v0)) = self.last {
            self.integral += 0.5 * (t - t0) * (v0 + value_sq);
        }
        self.last = Some((t, value_sq));
    }

    fn norm(&self) -> f64 {
        self.integral.sqrt()
    }
}

fn decay_metrics(ac0: &AcousticState, p: &SimParams, plan: &SweepPlan, mask: &[bool]) -> Result<LocalDecay> {
    let gap = data_gap(p.grid.box_len);
    let window = plan.decay_theta * wraparound_time(p.eps, p.sound_speed(), gap);
    let traj = sample_trajectory(ac0, p, window, plan.decay_samples);
    local_decay_metrics(&traj, mask, 4.0, 4.0, gap, p)
}

/// Steps both systems in lockstep over `[t0, t1]` with a common uniform step.
fn lockstep(
    comp: &mut CompressibleStepper,
    target: &mut IncompressibleStepper,
    t1: f64,
    mut each: impl FnMut(&FieldState, &IncompressibleState) -> Result<()>,
) -> Result<usize> {
    let span = t1 - comp.time();
    let dt_max = comp.stable_dt().min(target.stable_dt());
    let n = ((span / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = span / n as f64;
    for _ in 0..n {
        comp.step(dt)?;
        target.step(dt)?;
        each(&comp.state(), &target.state())?;
    }
    Ok(n)
}

fn run_single(plan: &SweepPlan, base: &SimParams, eps: f64) -> Result<SweepRow> {
    let nu = plan.nu_rule.nu(eps);
    let eta = plan.eta_rule.eta(eps);
    let p = base.with_eps(eps)?.with_nu(nu)?;
    let grid = Grid::new(p.grid);
    let mask = central_box_mask(&grid, plan.k_fraction);
    let data = make_ill_prepared_data(&grid, &plan.data, eps, plan.seed)?;
    let s0 = data.state();
    let ac0 = regularized_acoustic_data(&data.rho1, &data.u0, eta)?;
    let decay = decay_metrics(&ac0, &p, plan, &mask)?;

    let (v0, _) = helmholtz_split(&data.u0);
    let target_kind = match plan.mode {
        SweepMode::WeakWeak => Target::Ns,
        SweepMode::WeakStrong => Target::Euler,
    };
    let target0 = IncompressibleState::new(0.0, v0, data.omega0.clone());
    let mut comp = CompressibleStepper::new(&s0, &p, &plan.solver)?;
    let mut targ = IncompressibleStepper::new(&target0, &p, target_kind)?;

    let mut apriori = AprioriAccumulator::new(&p);
    apriori.push(&s0);
    let mut steps = 0;
    let mut row = SweepRow {
        eps,
        nu,
        eta,
        steps: 0,
        e_sol: None,
        e_grad: None,
        e_omega: None,
        rel_energy_0: None,
        sup_rel_energy: None,
        corollary: None,
        gronwall: None,
        decay,
        apriori: apriori.finish(),
    };
    let outputs: Vec<f64> = (1..=plan.samples)
        .map(|j| plan.t_final * j as f64 / plan.samples as f64)
        .collect();
    match plan.mode {
        SweepMode::WeakWeak => {
            let mut acc = [TimeL2::default(); 3];
            let mut record = |s: &FieldState, v: &IncompressibleState| -> Result<()> {
                let (sol, gradp) = helmholtz_split(&s.u);
                acc[0].push(s.t, masked_l2_sq(&sol.sub(&v.v), &mask));
                acc[1].push(s.t, masked_l2_sq(&gradp, &mask));
                acc[2].push(s.t, masked_l2_sq(&s.omega.sub(&v.omega), &mask));
                Ok(())
            };
            record(&s0, &target0)?;
            for &t in &outputs {
                steps += lockstep(&mut comp, &mut targ, t, &mut record)?;
                apriori.push(&comp.state());
            }
            row.e_sol = Some(acc[0].norm());
            row.e_grad = Some(acc[1].norm());
            row.e_omega = Some(acc[2].norm());
        }
        SweepMode::WeakStrong => {
            let mut trace = RelEnergyTrace::default();
            let rel_at = |s: &FieldState, v: &IncompressibleState, trace: &mut RelEnergyTrace| -> Result<f64> {
                let ac = acoustic_propagate(&ac0, &p, s.t);
                let tt = compose_test_triple(v, &ac, eps)?;
                let e = relative_energy(s, &tt, &p)?;
                trace.push(s.t, e, dissipation_blocks(s, &tt, &p), gronwall_coefficient(v));
                Ok(e)
            };
            let e0 = rel_at(&s0, &target0, &mut trace)?;
            let cor_at = |s: &FieldState, v: &IncompressibleState| -> Result<[f64; 4]> {
                let ac = acoustic_propagate(&ac0, &p, s.t);
                let tt = compose_test_triple(v, &ac, eps)?;
                Ok(corollary_norms(s, &tt, eps, p.gamma))
            };
            let mut cor = cor_at(&s0, &target0)?;
            for &t in &outputs {
                steps += lockstep(&mut comp, &mut targ, t, |s, v| rel_at(s, v, &mut trace).map(|_| ()))?;
                let s = comp.state();
                let c = cor_at(&s, &targ.state())?;
                for k in 0..4 {
                    cor[k] = cor[k].max(c[k]);
                }
                apriori.push(&s);
            }
            row.rel_energy_0 = Some(e0);
            row.sup_rel_energy = Some(trace.sup());
            row.corollary = Some(cor);
            row.gronwall = Some(gronwall_check(&trace, eps, p.gamma, e0, None, None)?);
        }
    }
    row.steps = steps;
    row.apriori = apriori.finish();
    Ok(row)
}

fn run_all(plan: &SweepPlan, base: &SimParams) -> Result<Vec<SweepRow>> {
    plan.validate(base)?;
    plan
        .eps_list
        .par_iter()
        .map(|&eps| {
            log::info!("{:?} run at eps = {eps}", plan.mode);
            run_single(plan, base, eps).map_err(|e| Error::SweepRun {
                eps,
                source: Box::new(e),
            })
        })
        .collect()
}

fn fit_named(metric: &str, xs: &[f64], ys: &[f64], fits: &mut Vec<NamedFit>) {
    match fit_rate(xs, ys) {
        Ok(fit) => fits.push(NamedFit {
            metric: metric.into(),
            fit,
        }),
        Err(e) => log::warn!("no fit for {metric}: {e}"),
    }
}

fn decay_fits_and_checks(rows: &[SweepRow], xs: &[f64], fits: &mut Vec<NamedFit>, checks: &mut Vec<CheckResult>) {
    let le: Vec<f64> = rows.iter().map(|r| r.decay.local_energy).collect();
    let lq: Vec<f64> = rows.iter().map(|r| r.decay.lq_lp).collect();
    fit_named("acoustic_local_energy", xs, &le, fits);
    fit_named("acoustic_l4l4", xs, &lq, fits);
    checks.push(CheckResult {
        name: "acoustic_l4l4_decreasing".into(),
        passed: strictly_decreasing(&lq),
        detail: format!("{lq:?}"),
    });
}

/// eps-sweep against incompressible micro-polar Navier-Stokes at fixed `nu`.
pub fn run_weak_weak(plan: &SweepPlan, base: &SimParams) -> Result<SweepReport> {
    if plan.mode != SweepMode::WeakWeak {
        return Err(Error::param("plan.mode", "expected weak_weak"));
    }
    let rows = run_all(plan, base)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let mut fits = Vec::new();
    let mut checks = Vec::new();
    let col = |f: fn(&SweepRow) -> Option<f64>| -> Vec<f64> { rows.iter().map(|r| f(r).unwrap_or(f64::NAN)).collect() };
    let e_sol = col(|r| r.e_sol);
    let e_grad = col(|r| r.e_grad);
    let e_om = col(|r| r.e_omega);
    fit_named("e_sol", &xs, &e_sol, &mut fits);
    fit_named("e_grad", &xs, &e_grad, &mut fits);
    fit_named("e_omega", &xs, &e_om, &mut fits);
    for (name, v) in [("e_sol", &e_sol), ("e_grad", &e_grad), ("e_omega", &e_om)] {
        checks.push(CheckResult {
            name: format!("{name}_decreasing"),
            passed: strictly_decreasing(v),
            detail: format!("{v:?}"),
        });
    }
    decay_fits_and_checks(&rows, &xs, &mut fits, &mut checks);
    Ok(SweepReport {
        mode: plan.mode,
        nu_rule: plan.nu_rule,
        alpha: gronwall_alpha(base.gamma),
        rows,
        fits,
        checks,
    })
}

/// Joint eps, nu sweep against Euler plus transported micro-rotation,
/// measured through the relative energy.
pub fn run_weak_strong(plan: &SweepPlan, base: &SimParams) -> Result<SweepReport> {
    if plan.mode != SweepMode::WeakStrong {
        return Err(Error::param("plan.mode", "expected weak_strong"));
    }
    let mut rows = run_all(plan, base)?;
    let alpha = gronwall_alpha(base.gamma);
    let xs: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let mut fits = Vec::new();
    let mut checks = Vec::new();

    // Recalibrate every Gronwall verdict against the constant implied at the coarsest eps.
    let c_ref = rows[0].gronwall.map(|g| g.c_hat.max(0.0)).unwrap_or(0.0);
    for r in rows.iter_mut() {
        if let Some(g) = r.gronwall.as_mut() {
            g.c_ref = c_ref;
            g.passes = g.sup_e <= (c_ref * r.eps.powf(alpha) + g.c_t * g.e0) * (1.0 + 1e-12);
        }
    }
    let sup: Vec<f64> = rows.iter().map(|r| r.sup_rel_energy.unwrap_or(f64::NAN)).collect();
    fit_named("sup_rel_energy", &xs, &sup, &mut fits);
    checks.push(CheckResult {
        name: "sup_rel_energy_decreasing".into(),
        passed: strictly_decreasing(&sup),
        detail: format!("{sup:?}"),
    });
    let slope = fits.iter().find(|f| f.metric == "sup_rel_energy").map(|f| f.fit.slope);
    checks.push(CheckResult {
        name: "sup_rel_energy_rate".into(),
        passed: slope.is_some_and(|s| s >= alpha - plan.slope_margin),
        detail: format!("slope {slope:?} vs alpha {alpha}"),
    });
    checks.push(CheckResult {
        name: "gronwall".into(),
        passed: rows.iter().all(|r| r.gronwall.is_some_and(|g| g.passes)),
        detail: format!("c_ref {c_ref}"),
    });
    for k in 0..4 {
        let v: Vec<f64> = rows.iter().map(|r| r.corollary.map_or(f64::NAN, |c| c[k])).collect();
        fit_named(&format!("corollary_{}", k + 1), &xs, &v, &mut fits);
        checks.push(CheckResult {
            name: format!("corollary_{}_decreasing", k + 1),
            passed: strictly_decreasing(&v),
            detail: format!("{v:?}"),
        });
    }
    decay_fits_and_checks(&rows, &xs, &mut fits, &mut checks);
    Ok(SweepReport {
        mode: plan.mode,
        nu_rule: plan.nu_rule,
        alpha,
        rows,
        fits,
        checks,
    })
}

/// Dispatches on the plan's mode.
pub fn run_sweep(plan: &SweepPlan, base: &SimParams) -> Result<SweepReport> {
    match plan.mode {
        SweepMode::WeakWeak => run_weak_weak(plan, base),
        SweepMode::WeakStrong => run_weak_strong(plan, base),
    }
}
