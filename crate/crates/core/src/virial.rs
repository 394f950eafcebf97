//! Scalar functionals of the virial argument.
//!
//! With `ψ(x) = λ tanh(x/λ)` the virial functional is
//! `I = ∫ (ψ ∂ₓu₁ + ½ψ' u₁) u₂` and along solutions
//! `-dI/dt = B(u₁) + ∫ ψ' [F(u₁) - ½u₁ f(u₁)]` with
//! `B(u₁) = ∫ ψ'(∂ₓu₁)² - ¼ ∫ ψ''' u₁²`. The substitution `w = sech(x/λ) u₁`
//! turns `B` into `B♯(w) = ∫ w_x² - V w²`, `V = sech²(x/λ) / 2λ²`.
//!
//! Localized norms use the fixed weight `sech(x)`, independent of `λ`.
//! All weights come from closed forms; only the fields are differenced.

use crate::error::{Error, Result};
use crate::grid::{energy_norm, Grid, State};
use crate::model::{energy, Model};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialConfig {
    lambda: f64,
}

impl VirialConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "virial scale must be positive, got {lambda}"
            )));
        }
        Ok(VirialConfig { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Default for VirialConfig {
    fn default() -> Self {
        VirialConfig { lambda: 10.0 }
    }
}

/// Closed-form weight profiles sampled on a grid.
#[derive(Debug, Clone)]
pub struct Weights {
    /// `ψ = λ tanh(x/λ)`
    pub psi: Vec<f64>,
    /// `ψ' = sech²(x/λ)`
    pub dpsi: Vec<f64>,
    /// `ψ''' = (2/λ²) sech²(x/λ) (3 tanh²(x/λ) - 1)`
    pub d3psi: Vec<f64>,
    /// `ζ = sech(x/λ)`
    pub zeta: Vec<f64>,
    /// `V = sech²(x/λ) / 2λ²`
    pub potential: Vec<f64>,
    /// `sech(x)`
    pub sech: Vec<f64>,
    /// `sech'(x) = -sech(x) tanh(x)`
    pub dsech: Vec<f64>,
    lambda: f64,
}

fn sech(x: f64) -> f64 {
    // cosh overflows past |x| ≈ 710
    if x.abs() > 700.0 {
        0.0
    } else {
        1.0 / x.cosh()
    }
}

impl Weights {
    pub fn new(grid: &Grid, cfg: VirialConfig) -> Self {
        let lambda = cfg.lambda;
        let n = grid.len();
        let mut w = Weights {
            psi: Vec::with_capacity(n),
            dpsi: Vec::with_capacity(n),
            d3psi: Vec::with_capacity(n),
            zeta: Vec::with_capacity(n),
            potential: Vec::with_capacity(n),
            sech: Vec::with_capacity(n),
            dsech: Vec::with_capacity(n),
            lambda,
        };
        for x in grid.nodes() {
            let s = sech(x / lambda);
            let th = (x / lambda).tanh();
            let s2 = s * s;
            w.psi.push(lambda * th);
            w.dpsi.push(s2);
            w.d3psi
                .push(2.0 / (lambda * lambda) * s2 * (3.0 * th * th - 1.0));
            w.zeta.push(s);
            w.potential.push(s2 / (2.0 * lambda * lambda));
            let s1 = sech(x);
            w.sech.push(s1);
            w.dsech.push(-s1 * x.tanh());
        }
        w
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    // ψ'(0) and sech(0), weights of the derivative terms at the origin
    const DPSI0: f64 = 1.0;
    const SECH0: f64 = 1.0;
}

/// `I(u) = ∫ (ψ ∂ₓu₁ + ½ψ' u₁) u₂`.
pub fn virial_i(grid: &Grid, state: &State, cfg: VirialConfig) -> f64 {
    let w = Weights::new(grid, cfg);
    virial_i_with(grid, &w, &state.u1, &state.u2, &grid.derivative(&state.u1))
}

fn virial_i_with(grid: &Grid, w: &Weights, u1: &[f64], u2: &[f64], du1: &[f64]) -> f64 {
    let sum: f64 = (0..u1.len())
        .map(|j| (w.psi[j] * du1[j] + 0.5 * w.dpsi[j] * u1[j]) * u2[j])
        .sum();
    grid.integrate_sum(sum)
}

/// `B(u₁) = ∫ ψ'(∂ₓu₁)² - ¼ ∫ ψ''' u₁²`.
pub fn bilinear_b(grid: &Grid, u1: &[f64], cfg: VirialConfig) -> f64 {
    let w = Weights::new(grid, cfg);
    bilinear_b_with(grid, &w, u1, &grid.derivative(u1))
}

fn bilinear_b_with(grid: &Grid, w: &Weights, u1: &[f64], du1: &[f64]) -> f64 {
    let sum: f64 = (0..u1.len())
        .map(|j| w.dpsi[j] * du1[j] * du1[j] - 0.25 * w.d3psi[j] * u1[j] * u1[j])
        .sum();
    let d0 = grid.derivative_at_origin(u1);
    // u₁(0) = 0 removes the ψ''' term at the origin
    grid.integrate_sum(sum) + grid.origin_weight() * Weights::DPSI0 * d0 * d0
}

/// `w = sech(x/λ) u₁`.
pub fn to_w(grid: &Grid, u1: &[f64], cfg: VirialConfig) -> Vec<f64> {
    let w = Weights::new(grid, cfg);
    u1.iter().zip(&w.zeta).map(|(u, z)| u * z).collect()
}

/// `B♯(w) = ∫ w_x² - ∫ V w²`.
pub fn bsharp(grid: &Grid, w: &[f64], cfg: VirialConfig) -> f64 {
    let weights = Weights::new(grid, cfg);
    bsharp_with(grid, &weights, w)
}

fn bsharp_with(grid: &Grid, weights: &Weights, w: &[f64]) -> f64 {
    let (grad, _) = derivative_sq(grid, w);
    let pot: f64 = w
        .iter()
        .zip(&weights.potential)
        .map(|(v, p)| p * v * v)
        .sum();
    grad - grid.integrate_sum(pot)
}

/// `∫ (∂ₓf)²` with the central difference, origin node included.
fn derivative_sq(grid: &Grid, f: &[f64]) -> (f64, Vec<f64>) {
    let d = grid.derivative(f);
    let d0 = grid.derivative_at_origin(f);
    let sum: f64 = d.iter().map(|v| v * v).sum();
    (grid.integrate_sum(sum) + grid.origin_weight() * d0 * d0, d)
}

/// `∫ ψ' [F(u₁) - ½ u₁ f(u₁)]`.
fn nonlinear_term(grid: &Grid, w: &Weights, u1: &[f64], model: &Model) -> f64 {
    if model.is_linear() {
        return 0.0;
    }
    let sum: f64 = u1
        .iter()
        .zip(&w.dpsi)
        .map(|(&u, &dp)| dp * (model.antiderivative(u) - 0.5 * u * model.f(u)))
        .sum();
    grid.integrate_sum(sum)
}

/// `B(u₁) + ∫ ψ'[F(u₁) - ½u₁f(u₁)]`, which the virial identity equates
/// with `-dI/dt`.
pub fn virial_rhs(grid: &Grid, state: &State, model: &Model, cfg: VirialConfig) -> f64 {
    let w = Weights::new(grid, cfg);
    bilinear_b_with(grid, &w, &state.u1, &grid.derivative(&state.u1))
        + nonlinear_term(grid, &w, &state.u1, model)
}

fn sech_weights(grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let s = grid.sample(sech);
    let ds = grid
        .nodes()
        .iter()
        .zip(&s)
        .map(|(x, s)| -s * x.tanh())
        .collect();
    (s, ds)
}

/// `(∫ (|∂ₓu₁|² + u₁²) sech x, ∫ u₂² sech x)`.
pub fn weighted_norms(grid: &Grid, state: &State) -> (f64, f64) {
    let (s, _) = sech_weights(grid);
    weighted_norms_with(grid, &s, state, &grid.derivative(&state.u1))
}

fn weighted_norms_with(grid: &Grid, s: &[f64], state: &State, du1: &[f64]) -> (f64, f64) {
    let (mut h1, mut l2) = (0.0, 0.0);
    for j in 0..s.len() {
        h1 += s[j] * (du1[j] * du1[j] + state.u1[j] * state.u1[j]);
        l2 += s[j] * state.u2[j] * state.u2[j];
    }
    let d0 = grid.derivative_at_origin(&state.u1);
    (
        grid.integrate_sum(h1) + grid.origin_weight() * Weights::SECH0 * d0 * d0,
        grid.integrate_sum(l2),
    )
}

/// `H = ∫ sech(x) [u₁ₓ² + u₁² + u₂²]`.
pub fn h_loc(grid: &Grid, state: &State) -> f64 {
    let (s, _) = sech_weights(grid);
    h_loc_with(grid, &s, state, &grid.derivative(&state.u1))
}

fn h_loc_with(grid: &Grid, s: &[f64], state: &State, du1: &[f64]) -> f64 {
    let sum: f64 = (0..s.len())
        .map(|j| s[j] * (du1[j] * du1[j] + state.u1[j] * state.u1[j] + state.u2[j] * state.u2[j]))
        .sum();
    let d0 = grid.derivative_at_origin(&state.u1);
    grid.integrate_sum(sum) + grid.origin_weight() * Weights::SECH0 * d0 * d0
}

/// `dH/dt = 2∫ sech(x)[(1+m)u₁ + f(u₁)]u₂ - 2∫ sech'(x) u₂ ∂ₓu₁`.
pub fn dh_analytic(grid: &Grid, state: &State, model: &Model) -> f64 {
    let (s, ds) = sech_weights(grid);
    dh_analytic_with(grid, &s, &ds, state, model, &grid.derivative(&state.u1))
}

fn dh_analytic_with(
    grid: &Grid,
    s: &[f64],
    ds: &[f64],
    state: &State,
    model: &Model,
    du1: &[f64],
) -> f64 {
    let sum: f64 = (0..s.len())
        .map(|j| {
            let (u, v) = (state.u1[j], state.u2[j]);
            s[j] * ((1.0 + model.m) * u + model.f(u)) * v - ds[j] * v * du1[j]
        })
        .sum();
    2.0 * grid.integrate_sum(sum)
}

/// `∫ sech(x) u₁ u₂`.
pub fn cross_term(grid: &Grid, state: &State) -> f64 {
    let (s, _) = sech_weights(grid);
    cross_with(grid, &s, state)
}

fn cross_with(grid: &Grid, s: &[f64], state: &State) -> f64 {
    let sum: f64 = (0..s.len()).map(|j| s[j] * state.u1[j] * state.u2[j]).sum();
    grid.integrate_sum(sum)
}

fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// `∫ ψ'|u₁|^{2+q} / (‖u₁‖_∞^q ‖∂ₓw‖²)`; zero for the zero field.
pub fn sf_ratio(grid: &Grid, u1: &[f64], cfg: VirialConfig, q: f64) -> Result<f64> {
    if q.is_nan() || q <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "q must be positive, got {q}"
        )));
    }
    let w = Weights::new(grid, cfg);
    Ok(sf_ratio_with(grid, &w, u1, q))
}

fn sf_ratio_with(grid: &Grid, w: &Weights, u1: &[f64], q: f64) -> f64 {
    let zw: Vec<f64> = u1.iter().zip(&w.zeta).map(|(u, z)| u * z).collect();
    let (grad_w, _) = derivative_sq(grid, &zw);
    let sup = sup_norm(u1);
    if grad_w == 0.0 || sup == 0.0 {
        return 0.0;
    }
    let num: f64 = u1
        .iter()
        .zip(&w.dpsi)
        .map(|(u, dp)| dp * u.abs().powf(2.0 + q))
        .sum();
    grid.integrate_sum(num) / (sup.powf(q) * grad_w)
}

/// `|∫ ψ'(F - ½u₁f)| / (‖∂ₓw‖² ‖u₁‖_∞^{p-1})`; bounded along small solutions.
pub fn nonlinear_ratio(grid: &Grid, state: &State, model: &Model, cfg: VirialConfig) -> f64 {
    let w = Weights::new(grid, cfg);
    let zw: Vec<f64> = state.u1.iter().zip(&w.zeta).map(|(u, z)| u * z).collect();
    let (grad_w, _) = derivative_sq(grid, &zw);
    nonlinear_ratio_from(
        nonlinear_term(grid, &w, &state.u1, model),
        grad_w,
        sup_norm(&state.u1),
        model.p,
    )
}

fn nonlinear_ratio_from(nonlinear: f64, grad_w: f64, sup: f64, p: f64) -> f64 {
    if grad_w == 0.0 || sup == 0.0 {
        0.0
    } else {
        nonlinear.abs() / (grad_w * sup.powf(p - 1.0))
    }
}

/// One time slice of every tracked functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub virial_i: f64,
    /// Filled from neighbouring records by [`fill_virial_derivative`].
    pub di_dt_numeric: f64,
    /// `-(B + ∫ψ'(F - ½u₁f))`.
    pub di_dt_rhs: f64,
    pub b_val: f64,
    pub h: f64,
    pub h1w_sq: f64,
    pub l2w_sq: f64,
    pub cross: f64,
    pub dh_dt_analytic: f64,
    pub sf_ratio: f64,
    /// `‖(u₁, u₂)‖_{H¹×L²}`; not part of the csv.
    pub energy_norm: f64,
    /// See [`nonlinear_ratio`]; not part of the csv.
    pub nonlinear_ratio: f64,
}

impl DiagnosticsRecord {
    pub fn virial_rhs(&self) -> f64 {
        -self.di_dt_rhs
    }

    /// Columns written to `timeseries.csv`, in file order.
    pub fn csv_values(&self) -> [f64; 12] {
        [
            self.t,
            self.energy,
            self.virial_i,
            self.di_dt_numeric,
            self.di_dt_rhs,
            self.b_val,
            self.h,
            self.h1w_sq,
            self.l2w_sq,
            self.cross,
            self.dh_dt_analytic,
            self.sf_ratio,
        ]
    }

    pub fn from_csv_values(v: [f64; 12]) -> Self {
        DiagnosticsRecord {
            t: v[0],
            energy: v[1],
            virial_i: v[2],
            di_dt_numeric: v[3],
            di_dt_rhs: v[4],
            b_val: v[5],
            h: v[6],
            h1w_sq: v[7],
            l2w_sq: v[8],
            cross: v[9],
            dh_dt_analytic: v[10],
            sf_ratio: v[11],
            energy_norm: f64::NAN,
            nonlinear_ratio: f64::NAN,
        }
    }
}

pub const CSV_COLUMNS: [&str; 12] = [
    "t",
    "E",
    "I",
    "dI_dt_numeric",
    "dI_dt_rhs",
    "B_val",
    "H",
    "H1w_sq",
    "L2w_sq",
    "cross",
    "dH_dt_analytic",
    "sf_ratio",
];

/// Evaluates every functional on snapshots of one grid and model, with the
/// weight profiles computed once.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    grid: Grid,
    model: Model,
    weights: Weights,
    dsech: Vec<f64>,
    sech: Vec<f64>,
    q: f64,
    scratch: Vec<f64>,
}

impl Diagnostics {
    /// `q` defaults to `p - 1`, the exponent that matches `F - ½uf ~ |u|^{p+1}`.
    pub fn new(grid: &Grid, model: &Model, cfg: VirialConfig) -> Self {
        let weights = Weights::new(grid, cfg);
        Diagnostics {
            grid: grid.clone(),
            model: model.clone(),
            sech: weights.sech.clone(),
            dsech: weights.dsech.clone(),
            weights,
            q: (model.p - 1.0).max(f64::MIN_POSITIVE),
            scratch: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn record(&mut self, state: &State) -> Result<DiagnosticsRecord> {
        let grid = &self.grid;
        let w = &self.weights;
        let energy = energy(state, &self.model, grid)?;
        let du1 = grid.derivative(&state.u1);
        let b_val = bilinear_b_with(grid, w, &state.u1, &du1);
        let nonlinear = nonlinear_term(grid, w, &state.u1, &self.model);
        let (h1w_sq, l2w_sq) = weighted_norms_with(grid, &self.sech, state, &du1);
        for (z, (u, zeta)) in self.scratch.iter_mut().zip(state.u1.iter().zip(&w.zeta)) {
            *z = u * zeta;
        }
        let (grad_w, _) = derivative_sq(grid, &self.scratch);
        let sup = sup_norm(&state.u1);
        Ok(DiagnosticsRecord {
            t: state.t,
            energy,
            virial_i: virial_i_with(grid, w, &state.u1, &state.u2, &du1),
            di_dt_numeric: f64::NAN,
            di_dt_rhs: -(b_val + nonlinear),
            b_val,
            h: h_loc_with(grid, &self.sech, state, &du1),
            h1w_sq,
            l2w_sq,
            cross: cross_with(grid, &self.sech, state),
            dh_dt_analytic: dh_analytic_with(
                grid,
                &self.sech,
                &self.dsech,
                state,
                &self.model,
                &du1,
            ),
            sf_ratio: sf_ratio_with(grid, w, &state.u1, self.q),
            energy_norm: energy_norm(grid, state),
            nonlinear_ratio: nonlinear_ratio_from(nonlinear, grad_w, sup, self.model.p),
        })
    }
}

/// Points in the time-derivative stencil.
pub const STENCIL: usize = 5;

/// Derivative at `t` of the polynomial interpolating `(ts, ys)`.
pub(crate) fn lagrange_derivative(ts: &[f64], ys: &[f64], t: f64) -> f64 {
    let mut d = 0.0;
    for (j, (&tj, &yj)) in ts.iter().zip(ys).enumerate() {
        let mut dl = 0.0;
        for (m, &tm) in ts.iter().enumerate() {
            if m == j {
                continue;
            }
            let mut term = 1.0 / (tj - tm);
            for (l, &tl) in ts.iter().enumerate() {
                if l != j && l != m {
                    term *= (t - tl) / (tj - tl);
                }
            }
            dl += term;
        }
        d += yj * dl;
    }
    d
}

/// Finite differences of a series over possibly non-uniform record times,
/// from the [`STENCIL`]-point Lagrange interpolant: centered inside,
/// one-sided near the ends. Fourth order for five or more records.
pub fn time_derivative(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ts.len();
    if n < 2 {
        return vec![f64::NAN; n];
    }
    let width = n.min(STENCIL);
    (0..n)
        .map(|k| {
            let start = k.saturating_sub(width / 2).min(n - width);
            let range = start..start + width;
            lagrange_derivative(&ts[range.clone()], &ys[range], ts[k])
        })
        .collect()
}

/// Fills `di_dt_numeric` from the `I` series.
pub fn fill_virial_derivative(records: &mut [DiagnosticsRecord]) {
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let is: Vec<f64> = records.iter().map(|r| r.virial_i).collect();
    for (r, d) in records.iter_mut().zip(time_derivative(&ts, &is)) {
        r.di_dt_numeric = d;
    }
}

/// `max_k |dI/dt_numeric + virial_rhs| / max_k |virial_rhs|`.
pub fn virial_residual(records: &[DiagnosticsRecord]) -> f64 {
    let scale = records
        .iter()
        .map(|r| r.di_dt_rhs.abs())
        .fold(0.0, f64::max)
        .max(1e-12);
    records
        .iter()
        .filter(|r| r.di_dt_numeric.is_finite())
        .map(|r| (r.di_dt_numeric - r.di_dt_rhs).abs())
        .fold(0.0, f64::max)
        / scale
}
