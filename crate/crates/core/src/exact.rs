//! Closed-form reference solutions.

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, State};

/// Sine-Gordon breather `4 arctan((β/α) cos(αt) / cosh(βx))`, `α² + β² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreatherParams {
    beta: f64,
    alpha: f64,
}

impl BreatherParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "breather beta must lie in (0, 1), got {beta}"
            )));
        }
        Ok(BreatherParams {
            beta,
            alpha: (1.0 - beta * beta).sqrt(),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.alpha
    }

    /// `g = (β/α) cos(αt) / cosh(βx)`, so that `B = 4 arctan g`.
    fn ratio(&self, t: f64, x: f64) -> f64 {
        (self.beta / self.alpha) * (self.alpha * t).cos() / (self.beta * x).cosh()
    }
}

pub fn breather_exact(p: &BreatherParams, t: f64, x: f64) -> f64 {
    4.0 * p.ratio(t, x).atan()
}

/// `∂ₜB = 4 gₜ / (1 + g²)` with `gₜ = -β sin(αt) / cosh(βx)`.
pub fn breather_dt(p: &BreatherParams, t: f64, x: f64) -> f64 {
    let g = p.ratio(t, x);
    let gt = -p.beta * (p.alpha * t).sin() / (p.beta * x).cosh();
    4.0 * gt / (1.0 + g * g)
}

/// `∂ₓB = 4 gₓ / (1 + g²)` with `gₓ = -β tanh(βx) g`.
pub fn breather_dx(p: &BreatherParams, t: f64, x: f64) -> f64 {
    let g = p.ratio(t, x);
    4.0 * (-p.beta * (p.beta * x).tanh() * g) / (1.0 + g * g)
}

/// `(B, ∂ₜB)` sampled on a full-line grid. The breather is even and has no
/// half-line odd representation.
pub fn breather_state(p: &BreatherParams, t: f64, grid: &Grid) -> Result<State> {
    if grid.domain() != Domain::FullLine {
        return Err(Error::InvalidArgument(
            "the breather is even; it needs a full-line grid".into(),
        ));
    }
    Ok(State {
        u1: grid.sample(|x| breather_exact(p, t, x)),
        u2: grid.sample(|x| breather_dt(p, t, x)),
        t,
    })
}

/// `ω = √(k² + 1)` for `k = nπ/L`.
pub fn standing_wave_frequency(n: usize, length: f64) -> f64 {
    let k = n as f64 * std::f64::consts::PI / length;
    (k * k + 1.0).sqrt()
}

/// `u₁ = sin(kx) cos(ωt)`, `u₂ = -ω sin(kx) sin(ωt)`, solving the linear
/// Klein-Gordon equation `u_tt = u_xx - u` with Dirichlet data at `x = L`.
pub fn linear_standing_wave(n: usize, grid: &Grid, t: f64) -> Result<State> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "mode number must be at least 1".into(),
        ));
    }
    if grid.domain() != Domain::HalfLine {
        return Err(Error::InvalidArgument(
            "standing waves live on the half line".into(),
        ));
    }
    let k = n as f64 * std::f64::consts::PI / grid.length();
    let omega = standing_wave_frequency(n, grid.length());
    let (c, s) = ((omega * t).cos(), (omega * t).sin());
    Ok(State {
        u1: grid.sample(|x| (k * x).sin() * c),
        u2: grid.sample(|x| -omega * (k * x).sin() * s),
        t,
    })
}

/// Full-line energy `(L/2) ω²` of a unit standing wave, constant in time.
pub fn standing_wave_energy(n: usize, length: f64) -> f64 {
    let omega = standing_wave_frequency(n, length);
    0.5 * length * omega * omega
}
