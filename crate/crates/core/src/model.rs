//! Equation catalog for `u_tt = u_xx + m u + f(u)` with odd `f`.
//!
//! Each [`Model`] carries its linear coefficient `m`, the nonlinearity `f`
//! with a closed-form antiderivative `F(u) = ∫₀ᵘ f`, the small-amplitude
//! degree `p` (`|f'(u)| ≤ C|u|^{p-1}` for `|u| < 1`) and the constant `C`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Grid, State};

/// Catalog identifiers accepted by [`make_model`].
pub const CATALOG: [&str; 6] = [
    "sine-gordon",
    "phi4",
    "phi6",
    "cubic-nlkg",
    "linear-kg",
    "custom-poly",
];

/// Odd polynomial `Σ c_k u^k` over odd degrees `k ≥ 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct OddPolynomial {
    /// `(degree, coefficient)` pairs, degrees odd and strictly increasing.
    terms: Vec<(u32, f64)>,
}

impl OddPolynomial {
    pub fn new(mut terms: Vec<(u32, f64)>) -> Result<Self> {
        terms.retain(|&(_, c)| c != 0.0);
        terms.sort_by_key(|&(k, _)| k);
        for w in terms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::ModelParam(format!("duplicate degree {}", w[0].0)));
            }
        }
        for &(k, c) in &terms {
            if !c.is_finite() {
                return Err(Error::ModelParam(format!("coefficient c{k} is not finite")));
            }
            if k % 2 == 0 {
                return Err(Error::ModelParam(format!(
                    "even-degree coefficient c{k} = {c} breaks oddness"
                )));
            }
            if k == 1 {
                return Err(Error::ModelParam(
                    "linear coefficient c1 belongs in `m`, f must vanish to order p > 1".into(),
                ));
            }
        }
        Ok(OddPolynomial { terms })
    }

    pub fn zero() -> Self {
        OddPolynomial { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    fn eval(&self, u: f64) -> f64 {
        self.terms.iter().map(|&(k, c)| c * u.powi(k as i32)).sum()
    }

    fn antiderivative(&self, u: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, c)| c * u.powi(k as i32 + 1) / f64::from(k + 1))
            .sum()
    }

    fn lowest_degree(&self) -> Option<u32> {
        self.terms.first().map(|&(k, _)| k)
    }

    /// `Σ k|c_k|`, a valid `C` in `|f'(u)| ≤ C|u|^{p-1}` on `|u| < 1`.
    fn derivative_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|&(k, c)| f64::from(k) * c.abs())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    /// `f(u) = u - sin u`, so that `-u + f(u) = -sin u`.
    SineGordon,
    Polynomial(OddPolynomial),
}

// Below this amplitude `u - sin u` and `u²/2 + cos u - 1` are summed as
// series to avoid cancellation.
const SERIES_CUTOFF: f64 = 0.1;

fn sg_f(u: f64) -> f64 {
    if u.abs() < SERIES_CUTOFF {
        let s = u * u;
        // u³/3! - u⁵/5! + u⁷/7! - u⁹/9! + u¹¹/11!
        u * s
            * (1.0 / 6.0
                + s * (-1.0 / 120.0
                    + s * (1.0 / 5040.0 + s * (-1.0 / 362_880.0 + s / 39_916_800.0))))
    } else {
        u - u.sin()
    }
}

fn sg_antiderivative(u: f64) -> f64 {
    if u.abs() < SERIES_CUTOFF {
        let s = u * u;
        // u⁴/4! - u⁶/6! + u⁸/8! - u¹⁰/10! + u¹²/12!
        s * s
            * (1.0 / 24.0
                + s * (-1.0 / 720.0
                    + s * (1.0 / 40_320.0 + s * (-1.0 / 3_628_800.0 + s / 479_001_600.0))))
    } else {
        0.5 * u * u + u.cos() - 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    pub m: f64,
    pub nonlinearity: Nonlinearity,
    pub p: f64,
    /// Constant in `|f'(u)| ≤ C|u|^{p-1}`, `|u| < 1`.
    pub growth_constant: f64,
}

impl Model {
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match &self.nonlinearity {
            Nonlinearity::SineGordon => sg_f(u),
            Nonlinearity::Polynomial(poly) => poly.eval(u),
        }
    }

    #[inline]
    pub fn antiderivative(&self, u: f64) -> f64 {
        match &self.nonlinearity {
            Nonlinearity::SineGordon => sg_antiderivative(u),
            Nonlinearity::Polynomial(poly) => poly.antiderivative(u),
        }
    }

    /// Right-hand side `m u + f(u)` of the second-order equation.
    #[inline]
    pub fn force(&self, u: f64) -> f64 {
        self.m * u + self.f(u)
    }

    pub fn is_linear(&self) -> bool {
        matches!(&self.nonlinearity, Nonlinearity::Polynomial(p) if p.terms.is_empty())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{} (m = {}, p = {})", self.name, self.m, self.p)
    }
}

pub fn eval_f(model: &Model, u: f64) -> f64 {
    model.f(u)
}

#[allow(non_snake_case)]
pub fn eval_F(model: &Model, u: f64) -> f64 {
    model.antiderivative(u)
}

/// Builds a catalog model.
///
/// Catalog entries take no parameters. `custom-poly` reads `m` (default -1)
/// and coefficients `c<k>`; any nonzero even-degree coefficient is rejected.
pub fn make_model(name: &str, params: &BTreeMap<String, f64>) -> Result<Model> {
    let poly = |terms: Vec<(u32, f64)>| OddPolynomial::new(terms).map(Nonlinearity::Polynomial);
    let (m, nonlinearity) = match name {
        "sine-gordon" => (-1.0, Nonlinearity::SineGordon),
        "phi4" => (1.0, poly(vec![(3, -1.0)])?),
        "phi6" => (-1.0, poly(vec![(3, 4.0), (5, -3.0)])?),
        "cubic-nlkg" => (-1.0, poly(vec![(3, 1.0)])?),
        "linear-kg" => (-1.0, Nonlinearity::Polynomial(OddPolynomial::zero())),
        "custom-poly" => return custom_poly(params),
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    if let Some(key) = params.keys().next() {
        return Err(Error::ModelParam(format!(
            "model `{name}` takes no parameters (got `{key}`)"
        )));
    }
    let (p, growth_constant) = match &nonlinearity {
        // 0 ≤ 1 - cos u ≤ u²/2
        Nonlinearity::SineGordon => (3.0, 0.5),
        Nonlinearity::Polynomial(poly) => (
            poly.lowest_degree().map_or(3.0, f64::from),
            poly.derivative_bound(),
        ),
    };
    Ok(Model {
        name: name.to_string(),
        m,
        nonlinearity,
        p,
        growth_constant,
    })
}

fn custom_poly(params: &BTreeMap<String, f64>) -> Result<Model> {
    let mut m = -1.0;
    let mut terms = Vec::new();
    for (key, &value) in params {
        if key == "m" {
            m = value;
            continue;
        }
        let degree = key
            .strip_prefix('c')
            .and_then(|d| d.parse::<u32>().ok())
            .ok_or_else(|| Error::ModelParam(format!("unknown custom-poly parameter `{key}`")))?;
        terms.push((degree, value));
    }
    if !m.is_finite() {
        return Err(Error::ModelParam("m is not finite".into()));
    }
    let poly = OddPolynomial::new(terms)?;
    Ok(Model {
        name: "custom-poly".to_string(),
        m,
        p: poly.lowest_degree().map_or(3.0, f64::from),
        growth_constant: poly.derivative_bound(),
        nonlinearity: Nonlinearity::Polynomial(poly),
    })
}

/// Full-line energy `∫ ½u₂² + ½(∂ₓu₁)² - (m/2)u₁² - F(u₁)`.
///
/// The gradient term uses one-sided differences across every grid edge
/// (boundary ghosts included), which makes this the exact Hamiltonian of the
/// semi-discrete system advanced by the integrator.
pub fn energy(state: &State, model: &Model, grid: &Grid) -> Result<f64> {
    grid.check(&state.u1)?;
    grid.check(&state.u2)?;
    let pointwise: f64 = state
        .u1
        .iter()
        .zip(&state.u2)
        .map(|(&u, &v)| 0.5 * v * v - 0.5 * model.m * u * u - model.antiderivative(u))
        .sum();
    Ok(grid.integrate_sum(pointwise) + 0.5 * grid.gradient_energy(&state.u1))
}
