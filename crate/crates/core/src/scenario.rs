//! Runnable experiments: decay of small odd data, the even breather
//! counterexample, refinement studies, spectral certificates and
//! single-state identity checks.

use std::fs;
use std::path::Path;

use crate::config::{DataFamily, ExperimentConfig, Scenario, Submode};
use crate::error::{Error, Result};
use crate::exact::{breather_exact, breather_state, BreatherParams};
use crate::grid::{energy_norm, l2_norm, Domain, Grid, State};
use crate::integrator::{cfl_dt, run_with, RunSettings};
use crate::io::{write_summary, write_timeseries, ExtraColumn, Summary};
use crate::model::{make_model, Model};
use crate::spectral::{
    coercivity_certificate_for, index_check, Parity, SpectralReport, MARGINAL_TOL,
};
use crate::virial::{
    bilinear_b, bsharp, h_loc, to_w, virial_residual, weighted_norms, DiagnosticsRecord,
    VirialConfig, Weights,
};

/// Smallness persistence bound, in units of ε.
pub const SMALLNESS_FACTOR: f64 = 3.0;
/// Records before this time are skipped when extracting the coercivity
/// constant of `-dI/dt ≥ C₁ ‖u₁‖²_{H¹_ω}`.
pub const COERCIVITY_AFTER: f64 = 1.0;

pub const VIRIAL_CHECK_FIELDS: usize = 100;
pub const VIRIAL_CHECK_MODES: usize = 5;
pub const BSHARP_TOL: f64 = 1e-4;
pub const ANTISYMMETRY_TOL: f64 = 1e-4;
pub const H_SPLIT_TOL: f64 = 1e-12;
pub const COERCIVITY_FLOOR: f64 = 0.75;
pub const COERCIVITY_SLACK: f64 = 1e-3;
pub const RESIDUAL_EIG_TOL: f64 = 1e-6;
/// Potential strengths of the index battery.
pub const INDEX_BATTERY: [f64; 4] = [0.0, 0.5, 2.0, 6.0];

/// Linear congruential generator (Numerical Recipes constants), chosen so
/// the pseudo-random fields are easy to reproduce anywhere.
#[derive(Debug, Clone)]
pub struct Lcg(u32);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed as u32)
    }

    pub fn next_u32(&mut self) -> u32 {
        self.0 = self.0.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
        self.0
    }

    /// Uniform in `[-1, 1)`.
    pub fn next_signed(&mut self) -> f64 {
        f64::from(self.next_u32()) / 4_294_967_296.0 * 2.0 - 1.0
    }
}

/// `Σₖ cₖ sin(kπx/L) e^{-x²/25}`, `k = 1..=len(c)`.
pub fn random_odd_field(grid: &Grid, coeffs: &[f64]) -> Vec<f64> {
    let length = grid.length();
    grid.sample(|x| {
        let envelope = (-x * x / 25.0).exp();
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * x / length).sin())
            .sum::<f64>()
            * envelope
    })
}

/// Small odd data normalized to `‖(u₁, u₂)‖_{H¹×L²} = ε` on the grid.
pub fn make_initial_data(cfg: &ExperimentConfig, grid: &Grid) -> Result<State> {
    if grid.domain() != Domain::HalfLine {
        return Err(Error::InvalidArgument(
            "odd data lives on the half line".into(),
        ));
    }
    let sigma2 = cfg.sigma * cfg.sigma;
    let profile = grid.sample(|x| x * (-x * x / sigma2).exp());
    let zero = vec![0.0; grid.len()];
    let shape = match cfg.data_family {
        DataFamily::GaussOddDisplacement => State::new(grid, profile, zero, 0.0)?,
        DataFamily::GaussOddVelocity => State::new(grid, zero, profile, 0.0)?,
    };
    let scale = cfg.epsilon / energy_norm(grid, &shape);
    let scaled = |v: &[f64]| v.iter().map(|x| x * scale).collect::<Vec<_>>();
    State::new(grid, scaled(&shape.u1), scaled(&shape.u2), 0.0)
}

fn virial_config(cfg: &ExperimentConfig) -> Result<VirialConfig> {
    VirialConfig::new(cfg.lambda).map_err(|e| Error::Config(e.to_string()))
}

pub fn scenario_model(cfg: &ExperimentConfig) -> Result<Model> {
    if cfg.full_line() {
        make_model("sine-gordon", &Default::default())
    } else {
        make_model(&cfg.model, &cfg.model_params)
    }
}

pub fn scenario_grid(cfg: &ExperimentConfig) -> Result<Grid> {
    if cfg.full_line() {
        Grid::full_line(cfg.length, 2 * cfg.n + 1)
    } else {
        Grid::half_line(cfg.length, cfg.n)
    }
}

/// Records of a (possibly aborted) run.
#[derive(Debug)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub aborted: Option<Error>,
    pub dt: f64,
    pub grid: Grid,
    /// Per-record extra column (breather: `‖u₁ - B_β‖_{L²}`).
    pub exact_error: Vec<f64>,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.aborted.is_none()
    }
}

/// Decay trajectory from the configured odd data. With `enforce_smallness`
/// the run stops once the energy norm exceeds `3ε`.
pub fn decay_trajectory(
    cfg: &ExperimentConfig,
    grid: &Grid,
    dt: f64,
    enforce_smallness: bool,
) -> Result<Trajectory> {
    let model = scenario_model(cfg)?;
    let initial = make_initial_data(cfg, grid)?;
    let mut settings = RunSettings::new(dt, cfg.t_final(), cfg.record_every)?;
    if enforce_smallness {
        settings = settings.with_norm_bound(SMALLNESS_FACTOR * cfg.epsilon);
    }
    let (records, aborted) = match run_with(
        &initial,
        &model,
        grid,
        &settings,
        virial_config(cfg)?,
        |_| {},
    ) {
        Ok(records) => (records, None),
        Err(abort) => (abort.records, Some(abort.cause)),
    };
    Ok(Trajectory {
        records,
        aborted,
        dt,
        grid: grid.clone(),
        exact_error: Vec::new(),
    })
}

/// Full-line sine-Gordon run from breather data, tracking the exact error.
pub fn breather_trajectory(
    cfg: &ExperimentConfig,
    grid: &Grid,
    dt: f64,
    t_final: f64,
) -> Result<Trajectory> {
    let params = cfg.breather()?;
    let model = scenario_model(cfg)?;
    let initial = breather_state(&params, 0.0, grid)?;
    let settings = RunSettings::new(dt, t_final, cfg.record_every)?;
    let mut exact_error = Vec::new();
    let observe = |s: &State| exact_error.push(breather_error(&params, grid, s));
    let (records, aborted) = match run_with(
        &initial,
        &model,
        grid,
        &settings,
        virial_config(cfg)?,
        observe,
    ) {
        Ok(records) => (records, None),
        Err(abort) => (abort.records, Some(abort.cause)),
    };
    exact_error.truncate(records.len());
    Ok(Trajectory {
        records,
        aborted,
        dt,
        grid: grid.clone(),
        exact_error,
    })
}

/// `‖u₁(t) - B_β(t)‖_{L²}`.
pub fn breather_error(params: &BreatherParams, grid: &Grid, state: &State) -> f64 {
    let diff: Vec<f64> = state
        .u1
        .iter()
        .zip(grid.nodes())
        .map(|(u, x)| u - breather_exact(params, state.t, x))
        .collect();
    l2_norm(grid, &diff)
}

/// Cumulative trapezoid integral of `ys` over `ts`.
pub fn cumulative_trapezoid(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = 0.0;
    for i in 0..ts.len() {
        if i > 0 {
            acc += 0.5 * (ys[i] + ys[i - 1]) * (ts[i] - ts[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// Piecewise-linear interpolation, clamped at the ends.
pub fn interpolate(ts: &[f64], ys: &[f64], t: f64) -> f64 {
    match ts.iter().position(|&s| s >= t) {
        None => *ys.last().unwrap_or(&f64::NAN),
        Some(0) => ys[0],
        Some(i) => {
            let w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
            ys[i - 1] + w * (ys[i] - ys[i - 1])
        }
    }
}

/// Earliest time the data can reach the wall at `x = L` (unit speed, data
/// width about `4σ`). Afterwards the reflected flux `½ψ(L)u_x(L)²` enters
/// `dI/dt` and the whole-line virial identity no longer closes.
pub fn reflection_time(cfg: &ExperimentConfig) -> f64 {
    cfg.length - 4.0 * cfg.sigma
}

/// Trend statistics of a decay trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayStats {
    pub h0: f64,
    pub h_final: f64,
    /// `J(T) = ∫₀ᵀ (‖u₁‖²_{H¹_ω} + ‖u₂‖²_{L²_ω}) dt`.
    pub j_final: f64,
    pub j_half: f64,
    /// `(J(T) - J(T/2)) / J(T/2)`.
    pub plateau: f64,
    /// `min (virial_rhs / ‖u₁‖²_{H¹_ω})` over records with `t ≥ 1`.
    pub min_coercivity: f64,
    /// `max |dH/dt| / (‖u₁‖²_{H¹_ω} + ‖u₂‖²_{L²_ω})`.
    pub max_dh_ratio: f64,
    pub sup_energy_norm: f64,
    pub max_energy_drift: f64,
    pub virial_residual: f64,
    pub max_nonlinear_ratio: f64,
    pub max_sf_ratio: f64,
    pub t_final: f64,
}

impl DecayStats {
    /// `virial_window` bounds the records entering the virial residual; see
    /// [`reflection_time`].
    pub fn from_records(records: &[DiagnosticsRecord], virial_window: f64) -> Self {
        let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
        let local: Vec<f64> = records.iter().map(|r| r.h1w_sq + r.l2w_sq).collect();
        let j = cumulative_trapezoid(&ts, &local);
        let t_final = ts.last().copied().unwrap_or(0.0);
        let j_final = j.last().copied().unwrap_or(0.0);
        let j_half = interpolate(&ts, &j, 0.5 * t_final);
        let e0 = records.first().map_or(0.0, |r| r.energy);
        let max_of = |f: &dyn Fn(&DiagnosticsRecord) -> f64| {
            records
                .iter()
                .map(f)
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max)
        };
        DecayStats {
            h0: records.first().map_or(f64::NAN, |r| r.h),
            h_final: records.last().map_or(f64::NAN, |r| r.h),
            j_final,
            j_half,
            plateau: (j_final - j_half) / j_half,
            min_coercivity: records
                .iter()
                .filter(|r| r.t >= COERCIVITY_AFTER && r.h1w_sq > 0.0)
                .map(|r| r.virial_rhs() / r.h1w_sq)
                .fold(f64::INFINITY, f64::min),
            max_dh_ratio: max_of(&|r| r.dh_dt_analytic.abs() / (r.h1w_sq + r.l2w_sq)),
            sup_energy_norm: max_of(&|r| r.energy_norm),
            max_energy_drift: max_of(&|r| (r.energy - e0).abs() / e0.abs()),
            virial_residual: virial_residual(
                &records[..records.partition_point(|r| r.t <= virial_window)],
            ),
            max_nonlinear_ratio: max_of(&|r| r.nonlinear_ratio),
            max_sf_ratio: max_of(&|r| r.sf_ratio),
            t_final,
        }
    }

    pub fn h_ratio(&self) -> f64 {
        self.h_final / self.h0
    }
}

/// Largest relative energy deviation from the first record.
pub fn max_energy_drift(records: &[DiagnosticsRecord]) -> f64 {
    let e0 = records.first().map_or(0.0, |r| r.energy);
    records
        .iter()
        .map(|r| (r.energy - e0).abs() / e0.abs())
        .fold(0.0, f64::max)
}

#[derive(Debug)]
pub struct ScenarioOutcome {
    pub summary: Summary,
    pub records: Vec<DiagnosticsRecord>,
    pub extra: Option<(String, Vec<f64>)>,
    pub passed: bool,
}

fn header(summary: &mut Summary, cfg: &ExperimentConfig) {
    summary.push("status", "ok");
    summary.push("scenario", cfg.scenario);
}

fn fail(summary: &mut Summary, reason: impl ToString) {
    summary.set("status", "failed");
    summary.push("reason", reason.to_string());
}

pub fn run_scenario(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    match cfg.scenario {
        Scenario::Decay => decay(cfg),
        Scenario::Breather => breather(cfg),
        Scenario::Convergence => convergence(cfg),
        Scenario::Spectral => spectral(cfg),
        Scenario::VirialCheck => virial_check(cfg),
    }
}

fn decay(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let model = scenario_model(cfg)?;
    let grid = scenario_grid(cfg)?;
    let dt = cfl_dt(&grid, &model, cfg.dt_safety)?;
    let traj = decay_trajectory(cfg, &grid, dt, true)?;
    let window = reflection_time(cfg);
    let stats = DecayStats::from_records(&traj.records, window);

    let mut s = Summary::new();
    header(&mut s, cfg);
    s.push("model", &model.name);
    s.push("epsilon", cfg.epsilon);
    s.push("sigma", cfg.sigma);
    s.push("data_family", cfg.data_family.as_str());
    s.push("L", cfg.length);
    s.push("N", cfg.n);
    s.push_float("dx", grid.dx());
    s.push_float("dt", dt);
    s.push("T", cfg.t_final());
    s.push("lambda", cfg.lambda);
    s.push("records", traj.records.len());
    s.push_float("t_reached", stats.t_final);
    s.push_float("H0", stats.h0);
    s.push_float("HT", stats.h_final);
    s.push_float("H_ratio", stats.h_ratio());
    s.push_float("J_T", stats.j_final);
    s.push_float("J_T_over_eps2", stats.j_final / (cfg.epsilon * cfg.epsilon));
    s.push_float("J_half", stats.j_half);
    s.push_float("J_plateau_ratio", stats.plateau);
    s.push_float("min_virial_coercivity", stats.min_coercivity);
    s.push_float("max_dH_ratio", stats.max_dh_ratio);
    s.push_float("sup_energy_norm", stats.sup_energy_norm);
    s.push_float(
        "sup_energy_norm_over_eps",
        stats.sup_energy_norm / cfg.epsilon,
    );
    let violated = matches!(traj.aborted, Some(Error::SmallnessViolated { .. }));
    s.push(
        "smallness_held",
        !violated && stats.sup_energy_norm <= SMALLNESS_FACTOR * cfg.epsilon,
    );
    s.push_float("max_energy_drift", stats.max_energy_drift);
    s.push_float("virial_residual", stats.virial_residual);
    s.push_float("virial_residual_window", window);
    s.push_float("max_nonlinear_ratio", stats.max_nonlinear_ratio);
    s.push_float("max_sf_ratio", stats.max_sf_ratio);
    let passed = traj.completed();
    if let Some(err) = &traj.aborted {
        fail(&mut s, err);
    }
    Ok(ScenarioOutcome {
        summary: s,
        records: traj.records,
        extra: None,
        passed,
    })
}

/// Step size no larger than the CFL bound that puts every breather period
/// on a record.
fn period_aligned_dt(period: f64, dt_max: f64, record_every: usize) -> f64 {
    let chunk = dt_max * record_every as f64;
    let chunks = (period / chunk).ceil().max(1.0);
    period / (chunks * record_every as f64)
}

fn breather(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let params = cfg.breather()?;
    let model = scenario_model(cfg)?;
    let grid = scenario_grid(cfg)?;
    let period = params.period();
    let dt = period_aligned_dt(
        period,
        cfl_dt(&grid, &model, cfg.dt_safety)?,
        cfg.record_every,
    );
    let traj = breather_trajectory(cfg, &grid, dt, cfg.t_final())?;

    let mut s = Summary::new();
    header(&mut s, cfg);
    s.push("model", &model.name);
    s.push("beta", params.beta());
    s.push_float("alpha", params.alpha());
    s.push_float("period", period);
    s.push("L", cfg.length);
    s.push("N_full_line", grid.len());
    s.push_float("dx", grid.dx());
    s.push_float("dt", dt);
    s.push("T", cfg.t_final());
    s.push("records", traj.records.len());
    let h0 = traj.records.first().map_or(f64::NAN, |r| r.h);
    s.push_float("H0", h0);
    let mut min_recurrence = f64::INFINITY;
    let periods = (cfg.t_final() / period + 1e-9).floor() as usize;
    for k in 1..=periods {
        let target = k as f64 * period;
        if let Some(r) = traj
            .records
            .iter()
            .find(|r| (r.t - target).abs() < 1e-6 * period)
        {
            let ratio = r.h / h0;
            min_recurrence = min_recurrence.min(ratio);
            s.push_float(format!("H_period_{k}"), r.h);
            s.push_float(format!("H_period_{k}_ratio"), ratio);
        }
    }
    s.push("periods_recorded", periods);
    s.push_float("min_H_recurrence_ratio", min_recurrence);
    s.push_float("max_energy_drift", max_energy_drift(&traj.records));
    s.push_float(
        "max_exact_l2_error",
        traj.exact_error.iter().copied().fold(0.0, f64::max),
    );
    s.push_float(
        "final_exact_l2_error",
        traj.exact_error.last().copied().unwrap_or(f64::NAN),
    );
    let passed = traj.completed();
    if let Some(err) = &traj.aborted {
        fail(&mut s, err);
    }
    Ok(ScenarioOutcome {
        summary: s,
        records: traj.records,
        extra: Some(("exact_l2_error".to_string(), traj.exact_error)),
        passed,
    })
}

/// `log₂(coarse / fine)`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn convergence(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let model = scenario_model(cfg)?;
    let coarse_grid = scenario_grid(cfg)?;
    let fine_grid = coarse_grid.refined();
    let dt = cfl_dt(&coarse_grid, &model, cfg.dt_safety)?;
    let t_final = cfg.t_final();
    let run = |grid: &Grid, dt: f64| match cfg.submode {
        Submode::Decay => decay_trajectory(cfg, grid, dt, false),
        Submode::Breather => breather_trajectory(cfg, grid, dt, t_final),
    };
    let (coarse, fine) = std::thread::scope(|scope| {
        let fine = scope.spawn(|| run(&fine_grid, 0.5 * dt));
        let coarse = run(&coarse_grid, dt);
        (coarse, fine.join().expect("refined run panicked"))
    });
    let (coarse, fine) = (coarse?, fine?);

    let mut s = Summary::new();
    header(&mut s, cfg);
    s.push("submode", cfg.submode.as_str());
    s.push("model", &model.name);
    s.push("T", t_final);
    s.push_float("dx_coarse", coarse_grid.dx());
    s.push_float("dt_coarse", dt);
    s.push_float("dx_fine", fine_grid.dx());
    s.push_float("dt_fine", 0.5 * dt);
    let mut pair = |name: &str, c: f64, f: f64| {
        s.push_float(format!("{name}_coarse"), c);
        s.push_float(format!("{name}_fine"), f);
        s.push_float(format!("{name}_order"), observed_order(c, f));
    };
    pair(
        "energy_drift",
        max_energy_drift(&coarse.records),
        max_energy_drift(&fine.records),
    );
    pair(
        "virial_residual",
        virial_residual(&coarse.records),
        virial_residual(&fine.records),
    );
    if cfg.submode == Submode::Breather {
        let last = |t: &Trajectory| t.exact_error.last().copied().unwrap_or(f64::NAN);
        pair("exact_error", last(&coarse), last(&fine));
    }
    let passed = coarse.completed() && fine.completed();
    for err in [&coarse.aborted, &fine.aborted].into_iter().flatten() {
        fail(&mut s, err);
    }
    Ok(ScenarioOutcome {
        summary: s,
        extra: (cfg.submode == Submode::Breather)
            .then(|| ("exact_l2_error".to_string(), coarse.exact_error.clone())),
        records: coarse.records,
        passed,
    })
}

/// Grid of the fixed index battery: `λ = 1`, `L = 40`, `dx = 0.01`.
pub fn battery_grid() -> Grid {
    Grid::half_line(40.0, 3999).expect("valid battery grid")
}

pub fn certificate_passes(odd: &SpectralReport, even: &SpectralReport) -> bool {
    odd.coercivity_min_ratio >= COERCIVITY_FLOOR - COERCIVITY_SLACK
        && odd.residual_min_eig >= -RESIDUAL_EIG_TOL
        && even.coercivity_min_ratio < COERCIVITY_FLOOR
}

fn spectral(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let grid = Grid::half_line(cfg.length, cfg.n)?;
    let odd = coercivity_certificate_for(cfg.lambda, &grid, Parity::Odd)?;
    let even = coercivity_certificate_for(cfg.lambda, &grid, Parity::Even)?;
    let mut s = Summary::new();
    header(&mut s, cfg);
    s.extend(odd.key_values("odd."));
    s.extend(even.key_values("even."));
    let mut passed = certificate_passes(&odd, &even);
    s.push("certificate_passed", passed);
    let battery = battery_grid();
    s.push_float("index.dx", battery.dx());
    s.push("index.L", battery.length());
    for v0 in INDEX_BATTERY {
        let check = index_check(&battery, v0, 1.0)?;
        let key = |k: &str| format!("index.V0={v0}.{k}");
        s.push(key("pt_index"), check.pt_index);
        s.push(key("even_count"), check.even_count);
        s.push(key("odd_count"), check.odd_count);
        s.push(key("marginal"), check.even_marginal + check.odd_marginal);
        s.push(key("agrees"), check.agrees());
        passed &= check.agrees();
    }
    s.push_float("index.marginal_tol", MARGINAL_TOL);
    if !passed {
        fail(&mut s, "spectral certificate or index battery failed");
    }
    Ok(ScenarioOutcome {
        summary: s,
        records: Vec::new(),
        extra: None,
        passed,
    })
}

/// `∫ (ψ ∂ₓa + ½ψ' a) b` for two fields.
pub fn virial_pairing(grid: &Grid, weights: &Weights, a: &[f64], b: &[f64]) -> f64 {
    let da = grid.derivative(a);
    let sum: f64 = (0..a.len())
        .map(|j| (weights.psi[j] * da[j] + 0.5 * weights.dpsi[j] * a[j]) * b[j])
        .sum();
    grid.integrate_sum(sum)
}

/// Cauchy–Schwarz scale `‖ψ ∂ₓa + ½ψ' a‖ ‖b‖` of [`virial_pairing`].
fn pairing_scale(grid: &Grid, weights: &Weights, a: &[f64], b: &[f64]) -> f64 {
    let da = grid.derivative(a);
    let ta: Vec<f64> = (0..a.len())
        .map(|j| weights.psi[j] * da[j] + 0.5 * weights.dpsi[j] * a[j])
        .collect();
    l2_norm(grid, &ta) * l2_norm(grid, b)
}

/// Per-field identity residuals of the virial-check battery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// `|B(u₁) - B♯(ζu₁)| / max(|B|, 1e-12)`.
    pub bsharp: f64,
    /// `|I(a,b) + I(b,a)|` over its Cauchy–Schwarz scale.
    pub antisymmetry: f64,
    /// `|H - (H1w + L2w)| / H`.
    pub h_split: f64,
    /// `B♯(w) / ∫w_x²`.
    pub coercivity: f64,
}

pub fn identity_residuals(
    grid: &Grid,
    cfg: VirialConfig,
    u1: &[f64],
    u2: &[f64],
) -> IdentityResiduals {
    let weights = Weights::new(grid, cfg);
    let b = bilinear_b(grid, u1, cfg);
    let w = to_w(grid, u1, cfg);
    let bs = bsharp(grid, &w, cfg);
    let iab = virial_pairing(grid, &weights, u1, u2);
    let iba = virial_pairing(grid, &weights, u2, u1);
    let scale = pairing_scale(grid, &weights, u1, u2).max(pairing_scale(grid, &weights, u2, u1));
    let state = State {
        u1: u1.to_vec(),
        u2: u2.to_vec(),
        t: 0.0,
    };
    let h = h_loc(grid, &state);
    let (h1, l2) = weighted_norms(grid, &state);
    let dw = grid.derivative(&w);
    let d0 = grid.derivative_at_origin(&w);
    let grad_w =
        grid.integrate_sum(dw.iter().map(|v| v * v).sum()) + grid.origin_weight() * d0 * d0;
    IdentityResiduals {
        bsharp: (b - bs).abs() / b.abs().max(1e-12),
        antisymmetry: (iab + iba).abs() / scale.max(1e-300),
        h_split: (h - (h1 + l2)).abs() / h.abs().max(1e-300),
        coercivity: bs / grad_w,
    }
}

/// The virial-check battery: pairs of pseudo-random odd fields from the seed.
pub fn virial_check_fields(grid: &Grid, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = Lcg::new(seed);
    (0..VIRIAL_CHECK_FIELDS)
        .map(|_| {
            let a: Vec<f64> = (0..VIRIAL_CHECK_MODES).map(|_| rng.next_signed()).collect();
            let b: Vec<f64> = (0..VIRIAL_CHECK_MODES).map(|_| rng.next_signed()).collect();
            (random_odd_field(grid, &a), random_odd_field(grid, &b))
        })
        .collect()
}

fn virial_check(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let grid = Grid::half_line(cfg.length, cfg.n)?;
    let vcfg = virial_config(cfg)?;
    let mut worst = IdentityResiduals {
        bsharp: 0.0,
        antisymmetry: 0.0,
        h_split: 0.0,
        coercivity: f64::INFINITY,
    };
    for (u1, u2) in virial_check_fields(&grid, cfg.seed) {
        let r = identity_residuals(&grid, vcfg, &u1, &u2);
        worst.bsharp = worst.bsharp.max(r.bsharp);
        worst.antisymmetry = worst.antisymmetry.max(r.antisymmetry);
        worst.h_split = worst.h_split.max(r.h_split);
        worst.coercivity = worst.coercivity.min(r.coercivity);
    }
    let mut s = Summary::new();
    header(&mut s, cfg);
    s.push("fields", VIRIAL_CHECK_FIELDS);
    s.push("seed", cfg.seed);
    s.push("lambda", cfg.lambda);
    s.push_float("dx", grid.dx());
    s.push_float("max_bsharp_residual", worst.bsharp);
    s.push_float("max_antisymmetry_residual", worst.antisymmetry);
    s.push_float("max_h_split_residual", worst.h_split);
    s.push_float("min_coercivity_ratio", worst.coercivity);
    let checks = [
        ("bsharp_ok", worst.bsharp < BSHARP_TOL),
        ("antisymmetry_ok", worst.antisymmetry < ANTISYMMETRY_TOL),
        ("h_split_ok", worst.h_split < H_SPLIT_TOL),
        (
            "coercivity_ok",
            worst.coercivity >= COERCIVITY_FLOOR - COERCIVITY_SLACK,
        ),
    ];
    let mut passed = true;
    for (name, ok) in checks {
        s.push(name, ok);
        passed &= ok;
    }
    if !passed {
        fail(&mut s, "identity residual above tolerance");
    }
    Ok(ScenarioOutcome {
        summary: s,
        records: Vec::new(),
        extra: None,
        passed,
    })
}

/// Runs the scenario and writes `timeseries.csv` (when the scenario has a
/// trajectory) and `summary.txt` into `output_dir`.
pub fn execute(cfg: &ExperimentConfig) -> Result<ScenarioOutcome> {
    let outcome = run_scenario(cfg)?;
    write_outputs(&outcome, &cfg.output_dir)?;
    Ok(outcome)
}

pub fn write_outputs(outcome: &ScenarioOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if !outcome.records.is_empty() {
        let extra = outcome
            .extra
            .as_ref()
            .map(|(name, values)| ExtraColumn { name, values });
        write_timeseries(&outcome.records, extra, &dir.join("timeseries.csv"))?;
    }
    write_summary(&outcome.summary, &dir.join("summary.txt"))
}
