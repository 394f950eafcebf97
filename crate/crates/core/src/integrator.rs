//! Störmer–Verlet time stepping for `∂ₜu₁ = u₂, ∂ₜu₂ = D²u₁ + m u₁ + f(u₁)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{energy_norm, Grid, State};
use crate::model::Model;
use crate::virial::{fill_virial_derivative, Diagnostics, DiagnosticsRecord, VirialConfig};

/// `safety · 2 / √(4/dx² + max(|m|, 1))`.
pub fn cfl_dt(grid: &Grid, model: &Model, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "safety factor must lie in (0, 1), got {safety}"
        )));
    }
    let dx = grid.dx();
    Ok(safety * 2.0 / (4.0 / (dx * dx) + model.m.abs().max(1.0)).sqrt())
}

fn acceleration(grid: &Grid, model: &Model, u1: &[f64], out: &mut [f64]) {
    grid.laplacian_into(u1, out);
    for (a, &u) in out.iter_mut().zip(u1) {
        *a += model.force(u);
    }
}

/// Kick–drift–kick stepper that reuses the closing force evaluation of one
/// step as the opening kick of the next.
#[derive(Debug, Clone)]
pub struct Leapfrog<'a> {
    grid: &'a Grid,
    model: &'a Model,
    accel: Vec<f64>,
    fresh: bool,
}

impl<'a> Leapfrog<'a> {
    pub fn new(grid: &'a Grid, model: &'a Model) -> Self {
        Leapfrog {
            grid,
            model,
            accel: vec![0.0; grid.len()],
            fresh: false,
        }
    }

    pub fn step(&mut self, state: &mut State, dt: f64) {
        if !self.fresh {
            acceleration(self.grid, self.model, &state.u1, &mut self.accel);
        }
        let half = 0.5 * dt;
        for ((u, v), a) in state
            .u1
            .iter_mut()
            .zip(state.u2.iter_mut())
            .zip(&self.accel)
        {
            *v += half * a;
            *u += dt * *v;
        }
        acceleration(self.grid, self.model, &state.u1, &mut self.accel);
        for (v, a) in state.u2.iter_mut().zip(&self.accel) {
            *v += half * a;
        }
        self.fresh = true;
        state.t += dt;
    }

    /// Drop the cached force, e.g. after the state was modified externally.
    pub fn invalidate(&mut self) {
        self.fresh = false;
    }
}

/// One Störmer–Verlet step from scratch.
pub fn leapfrog_step(state: &mut State, model: &Model, grid: &Grid, dt: f64) {
    Leapfrog::new(grid, model).step(state, dt);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
    /// Abort once `‖(u₁, u₂)‖_{H¹×L²}` exceeds this at a record.
    pub norm_bound: Option<f64>,
}

impl RunSettings {
    pub fn new(dt: f64, t_final: f64, record_every: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "final time must be nonnegative, got {t_final}"
            )));
        }
        if record_every == 0 {
            return Err(Error::InvalidArgument(
                "record_every must be at least 1".into(),
            ));
        }
        Ok(RunSettings {
            dt,
            t_final,
            record_every,
            norm_bound: None,
        })
    }

    pub fn with_norm_bound(mut self, bound: f64) -> Self {
        self.norm_bound = Some(bound);
        self
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// A run that stopped early, with the records gathered before the stop.
#[derive(Debug)]
pub struct RunAborted {
    pub cause: Error,
    pub records: Vec<DiagnosticsRecord>,
}

impl fmt::Display for RunAborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run aborted after {} records: {}",
            self.records.len(),
            self.cause
        )
    }
}

impl std::error::Error for RunAborted {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.cause)
    }
}

/// Integrates to `t_final`, recording every `record_every` steps plus the
/// initial and final states.
pub fn run(
    initial: &State,
    model: &Model,
    grid: &Grid,
    settings: &RunSettings,
    cfg: VirialConfig,
) -> std::result::Result<Vec<DiagnosticsRecord>, RunAborted> {
    run_with(initial, model, grid, settings, cfg, |_| {})
}

/// As [`run`], calling `observe` on the state at every record.
pub fn run_with(
    initial: &State,
    model: &Model,
    grid: &Grid,
    settings: &RunSettings,
    cfg: VirialConfig,
    mut observe: impl FnMut(&State),
) -> std::result::Result<Vec<DiagnosticsRecord>, RunAborted> {
    let abort = |cause, mut records: Vec<DiagnosticsRecord>| {
        fill_virial_derivative(&mut records);
        Err(RunAborted { cause, records })
    };
    let mut records = Vec::new();
    if let Err(cause) = grid
        .check(&initial.u1)
        .and_then(|_| grid.check(&initial.u2))
    {
        return abort(cause, records);
    }
    let mut diagnostics = Diagnostics::new(grid, model, cfg);
    let mut state = initial.clone();
    let mut stepper = Leapfrog::new(grid, model);
    let steps = settings.steps();
    let t0 = initial.t;

    for n in 0..=steps {
        if n > 0 {
            stepper.step(&mut state, settings.dt);
            state.t = t0 + n as f64 * settings.dt;
        }
        if n % settings.record_every != 0 && n != steps {
            continue;
        }
        if !state.is_finite() {
            return abort(
                Error::NonFinite {
                    step: n,
                    t: state.t,
                },
                records,
            );
        }
        if let Some(bound) = settings.norm_bound {
            let norm = energy_norm(grid, &state);
            if norm > bound {
                return abort(
                    Error::SmallnessViolated {
                        step: n,
                        t: state.t,
                        norm,
                        bound,
                    },
                    records,
                );
            }
        }
        match diagnostics.record(&state) {
            Ok(rec) => records.push(rec),
            Err(cause) => return abort(cause, records),
        }
        observe(&state);
    }
    fill_virial_derivative(&mut records);
    Ok(records)
}

/// Evolves a state without diagnostics.
pub fn evolve(initial: &State, model: &Model, grid: &Grid, dt: f64, steps: usize) -> Result<State> {
    grid.check(&initial.u1)?;
    grid.check(&initial.u2)?;
    let mut state = initial.clone();
    let mut stepper = Leapfrog::new(grid, model);
    for n in 1..=steps {
        stepper.step(&mut state, dt);
        if n % 256 == 0 && !state.is_finite() {
            return Err(Error::NonFinite {
                step: n,
                t: state.t,
            });
        }
    }
    if !state.is_finite() {
        return Err(Error::NonFinite {
            step: steps,
            t: state.t,
        });
    }
    state.t = initial.t + steps as f64 * dt;
    Ok(state)
}
