//! Uniform meshes, quadrature and finite differences.
//!
//! The default [`Domain::HalfLine`] stores samples of an odd function at
//! `x_j = j·dx`, `j = 1..=N`, with homogeneous Dirichlet ghosts at `x = 0`
//! (exact for odd functions) and `x = L`. Full-line integrals of even
//! integrands are twice the half-line trapezoid sum.
//!
//! [`Domain::FullLine`] covers `[-L, L]` without symmetry and exists for
//! even data such as the sine-Gordon breather.

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `(0, L)`, odd extension implied.
    HalfLine,
    /// `(-L, L)`, no symmetry.
    FullLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    length: f64,
    n: usize,
    dx: f64,
    domain: Domain,
}

impl Grid {
    /// Half-line grid on `[0, L]` with `n` interior nodes.
    pub fn half_line(length: f64, n: usize) -> Result<Self> {
        Self::with_domain(length, n, Domain::HalfLine)
    }

    /// Full-line grid on `[-L, L]` with `n` interior nodes.
    pub fn full_line(length: f64, n: usize) -> Result<Self> {
        Self::with_domain(length, n, Domain::FullLine)
    }

    pub fn with_domain(length: f64, n: usize, domain: Domain) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Grid(format!(
                "half-width must be positive, got {length}"
            )));
        }
        if n < MIN_POINTS {
            return Err(Error::Grid(format!(
                "need at least {MIN_POINTS} interior points, got {n}"
            )));
        }
        let span = match domain {
            Domain::HalfLine => length,
            Domain::FullLine => 2.0 * length,
        };
        Ok(Grid {
            length,
            n,
            dx: span / (n + 1) as f64,
            domain,
        })
    }

    /// Half-width `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        match self.domain {
            Domain::HalfLine => (i + 1) as f64 * self.dx,
            Domain::FullLine => -self.length + (i + 1) as f64 * self.dx,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.x(i))).collect()
    }

    /// Same domain, half the spacing.
    pub fn refined(&self) -> Grid {
        Grid::with_domain(self.length, 2 * self.n + 1, self.domain)
            .expect("refinement of a valid grid")
    }

    pub fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: values.len(),
            });
        }
        Ok(())
    }

    fn quadrature_factor(&self) -> f64 {
        match self.domain {
            Domain::HalfLine => 2.0 * self.dx,
            Domain::FullLine => self.dx,
        }
    }

    /// Full-line integral from a precomputed sum of node samples.
    #[inline]
    pub fn integrate_sum(&self, sum: f64) -> f64 {
        self.quadrature_factor() * sum
    }

    /// Full-line integral of an integrand sampled at the nodes.
    ///
    /// Trapezoid rule with zero boundary values; on the half line the
    /// integrand must be even and the result is doubled.
    pub fn integrate_fullline(&self, integrand: &[f64]) -> f64 {
        self.integrate_even(integrand, 0.0)
    }

    /// As [`Grid::integrate_fullline`], with the integrand's value at the
    /// unstored node `x = 0` supplied by the caller (half line only; the
    /// full-line grid ignores it).
    pub fn integrate_even(&self, integrand: &[f64], origin: f64) -> f64 {
        debug_assert_eq!(integrand.len(), self.n);
        self.integrate_sum(integrand.iter().sum()) + self.origin_weight() * origin
    }

    /// Trapezoid weight of the `x = 0` node in full-line integrals.
    #[inline]
    pub fn origin_weight(&self) -> f64 {
        match self.domain {
            Domain::HalfLine => self.dx,
            Domain::FullLine => 0.0,
        }
    }

    /// Central difference at `x = 0` of an odd half-line field,
    /// `(f(dx) - f(-dx)) / 2dx = f₁/dx`. Zero on the full line, where the
    /// origin is not special.
    #[inline]
    pub fn derivative_at_origin(&self, f: &[f64]) -> f64 {
        match self.domain {
            Domain::HalfLine => f.first().map_or(0.0, |v| v / self.dx),
            Domain::FullLine => 0.0,
        }
    }

    /// Central differences with zero ghosts at both ends.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.derivative_into(f, &mut out);
        out
    }

    pub fn derivative_into(&self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        debug_assert_eq!(out.len(), n);
        if n == 0 {
            return;
        }
        let scale = 0.5 / self.dx;
        if n == 1 {
            out[0] = 0.0;
            return;
        }
        out[0] = f[1] * scale;
        for j in 1..n - 1 {
            out[j] = (f[j + 1] - f[j - 1]) * scale;
        }
        out[n - 1] = -f[n - 2] * scale;
    }

    /// Three-point Laplacian with zero ghosts, accumulated as `out = D²f`.
    pub fn laplacian_into(&self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        debug_assert_eq!(out.len(), n);
        let inv = 1.0 / (self.dx * self.dx);
        for j in 0..n {
            let left = if j > 0 { f[j - 1] } else { 0.0 };
            let right = if j + 1 < n { f[j + 1] } else { 0.0 };
            out[j] = (left - 2.0 * f[j] + right) * inv;
        }
    }

    /// `∫ (∂ₓf)²` over the full line from one-sided differences on every
    /// edge, ghosts included. This is the quadratic form of `-D²`.
    pub fn gradient_energy(&self, f: &[f64]) -> f64 {
        let n = f.len();
        if n == 0 {
            return 0.0;
        }
        let mut acc = f[0] * f[0] + f[n - 1] * f[n - 1];
        for w in f.windows(2) {
            let d = w[1] - w[0];
            acc += d * d;
        }
        let edges = acc / self.dx;
        match self.domain {
            Domain::HalfLine => 2.0 * edges,
            Domain::FullLine => edges,
        }
    }
}

/// Half-line grid, `dx = L / (N + 1)`.
pub fn make_grid(length: f64, n: usize) -> Result<Grid> {
    Grid::half_line(length, n)
}

/// Phase-space point `(u₁, u₂) = (u, ∂ₜu)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub t: f64,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        State {
            u1: vec![0.0; grid.len()],
            u2: vec![0.0; grid.len()],
            t: 0.0,
        }
    }

    pub fn new(grid: &Grid, u1: Vec<f64>, u2: Vec<f64>, t: f64) -> Result<Self> {
        grid.check(&u1)?;
        grid.check(&u2)?;
        Ok(State { u1, u2, t })
    }

    pub fn is_finite(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|v| v.is_finite())
    }
}

/// `‖(u₁, u₂)‖_{H¹×L²}` with the central-difference gradient.
pub fn energy_norm(grid: &Grid, state: &State) -> f64 {
    let du = grid.derivative(&state.u1);
    let sum: f64 = du
        .iter()
        .zip(&state.u1)
        .zip(&state.u2)
        .map(|((&d, &u), &v)| d * d + u * u + v * v)
        .sum();
    let d0 = grid.derivative_at_origin(&state.u1);
    (grid.integrate_sum(sum) + grid.origin_weight() * d0 * d0).sqrt()
}

/// `‖f‖_{L²}` over the full line.
pub fn l2_norm(grid: &Grid, f: &[f64]) -> f64 {
    grid.integrate_sum(f.iter().map(|v| v * v).sum()).sqrt()
}
