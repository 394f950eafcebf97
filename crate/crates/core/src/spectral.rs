//! Inertia counts for `-d²/dx² - (V₀/λ²) sech²(x/λ)` restricted to one
//! parity sector, and the coercivity certificate for `B♯` on odd functions.
//!
//! Parity is realized by the boundary condition at `x = 0` of a half-line
//! grid: odd functions have a Dirichlet ghost there; even functions carry
//! an extra unknown at the origin with mirror ghost `u(-dx) = u(dx)`. The
//! mirror row is symmetrized with the trapezoid weight ½ at the origin,
//! which puts `-√2/dx²` on the first off-diagonal. Every count is an LDLᵀ
//! (Sturm) inertia count on a symmetric tridiagonal matrix.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid};

/// Shift used when the count at exactly zero hits a zero pivot.
pub const BREAKDOWN_SHIFT: f64 = -1e-12;
/// Absolute bracket width for eigenvalue bisection.
pub const EIG_TOL: f64 = 1e-10;
/// Bracket width for the pencil bisection.
pub const PENCIL_TOL: f64 = 1e-10;
/// Eigenvalues with `|λ| <` this are treated as marginal (threshold resonances).
pub const MARGINAL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        })
    }
}

/// Largest integer strictly below `½√(4V₀+1) + ½`: the number of bound
/// states of `-d²/dx² - V₀ sech²(x)`.
pub fn pt_index(v0: f64) -> Result<usize> {
    if !(v0.is_finite() && v0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "V0 must be nonnegative, got {v0}"
        )));
    }
    let bound = 0.5 * (4.0 * v0 + 1.0).sqrt() + 0.5;
    Ok(bound.ceil() as usize - 1)
}

/// Symmetric tridiagonal matrix for one parity sector.
#[derive(Debug, Clone)]
pub struct SchrodingerDiscretization {
    pub grid: Grid,
    pub v0: f64,
    pub lambda: f64,
    pub parity: Parity,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl SchrodingerDiscretization {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

fn sech2(x: f64) -> f64 {
    if x.abs() > 350.0 {
        0.0
    } else {
        let s = 1.0 / x.cosh();
        s * s
    }
}

/// Free-Laplacian stencil and potential samples for one sector, the
/// building blocks of every matrix in this module.
struct Stencil {
    lap_diag: Vec<f64>,
    lap_off: Vec<f64>,
    /// `sech²(x/λ)` at the unknowns.
    profile: Vec<f64>,
}

fn stencil(grid: &Grid, lambda: f64, parity: Parity) -> Result<Stencil> {
    if grid.domain() != Domain::HalfLine {
        return Err(Error::InvalidArgument(
            "parity sectors need a half-line grid".into(),
        ));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let inv = 1.0 / (grid.dx() * grid.dx());
    let mut xs = grid.nodes();
    let mut lap_off = vec![-inv; grid.len() - 1];
    if parity == Parity::Even {
        xs.insert(0, 0.0);
        lap_off.insert(0, -std::f64::consts::SQRT_2 * inv);
    }
    Ok(Stencil {
        lap_diag: vec![2.0 * inv; xs.len()],
        lap_off,
        profile: xs.iter().map(|x| sech2(x / lambda)).collect(),
    })
}

/// `-D² - (V₀/λ²) sech²(x/λ)` on the given parity sector.
pub fn assemble(
    grid: &Grid,
    v0: f64,
    lambda: f64,
    parity: Parity,
) -> Result<SchrodingerDiscretization> {
    if !(v0.is_finite() && v0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "V0 must be nonnegative, got {v0}"
        )));
    }
    let s = stencil(grid, lambda, parity)?;
    let depth = v0 / (lambda * lambda);
    let diag = s
        .lap_diag
        .iter()
        .zip(&s.profile)
        .map(|(d, p)| d - depth * p)
        .collect();
    Ok(SchrodingerDiscretization {
        grid: grid.clone(),
        v0,
        lambda,
        parity,
        diag,
        offdiag: s.lap_off,
    })
}

/// Number of eigenvalues strictly below `shift`, from the signs of the
/// LDLᵀ pivots of `T - shift·I`. A zero pivot is reported as breakdown.
pub fn sturm_count(diag: &[f64], offdiag: &[f64], shift: f64) -> Result<usize> {
    let mut count = 0;
    let mut pivot = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        pivot = if i == 0 {
            d - shift
        } else {
            let e = offdiag[i - 1];
            d - shift - e * e / pivot
        };
        if pivot == 0.0 {
            return Err(Error::Breakdown(shift));
        }
        if pivot < 0.0 {
            count += 1;
        }
    }
    Ok(count)
}

/// Sturm count that nudges exact zero pivots off zero, for bisection where
/// an occasional tie at a midpoint is harmless.
fn guarded_count(diag: &[f64], offdiag: &[f64], shift: f64) -> usize {
    let mut count = 0;
    let mut pivot = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        pivot = if i == 0 {
            d - shift
        } else {
            let e = offdiag[i - 1];
            d - shift - e * e / pivot
        };
        if pivot == 0.0 {
            pivot = -f64::EPSILON * (d.abs() + shift.abs()).max(f64::MIN_POSITIVE);
        }
        if pivot < 0.0 {
            count += 1;
        }
    }
    count
}

/// Number of negative eigenvalues, retried at [`BREAKDOWN_SHIFT`] on a zero
/// pivot.
pub fn negative_count(d: &SchrodingerDiscretization) -> Result<usize> {
    match sturm_count(&d.diag, &d.offdiag, 0.0) {
        Err(Error::Breakdown(_)) => sturm_count(&d.diag, &d.offdiag, BREAKDOWN_SHIFT),
        other => other,
    }
}

fn gershgorin(diag: &[f64], offdiag: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { offdiag[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { offdiag[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// The `k` smallest eigenvalues of a symmetric tridiagonal matrix, ascending.
pub fn smallest_eigenvalues(diag: &[f64], offdiag: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > diag.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenvalues of a {}×{} matrix",
            diag.len(),
            diag.len()
        )));
    }
    let (glo, ghi) = gershgorin(diag, offdiag);
    let pad = 1e-8 * glo.abs().max(ghi.abs()).max(1.0);
    let mut out = Vec::with_capacity(k);
    let mut lo = glo - pad;
    for index in 0..k {
        // eigenvalue `index` is the smallest x with count(x) > index
        let (mut a, mut b) = (lo, ghi + pad);
        while b - a > EIG_TOL {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            if guarded_count(diag, offdiag, mid) > index {
                b = mid;
            } else {
                a = mid;
            }
        }
        let eig = 0.5 * (a + b);
        out.push(eig);
        lo = a;
    }
    Ok(out)
}

pub fn lowest_eigs(d: &SchrodingerDiscretization, k: usize) -> Result<Vec<f64>> {
    smallest_eigenvalues(&d.diag, &d.offdiag, k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Negative eigenvalues of the `B♯` operator `-d² - sech²(x/λ)/2λ²` in
    /// this sector.
    pub negative_count: usize,
    /// Lowest eigenvalues of the `B♯` operator.
    pub lowest_eigs: Vec<f64>,
    /// Certified lower bound of `min B♯(w) / ∫w_x²` over the sector.
    pub coercivity_min_ratio: f64,
    /// Smallest eigenvalue of `-d² - (2/λ²) sech²(x/λ)` in this sector.
    pub residual_min_eig: f64,
    pub v0: f64,
    pub lambda: f64,
    pub length: f64,
    pub n: usize,
    pub parity: Parity,
}

impl SpectralReport {
    /// Flat `key: value` lines, prefixed for embedding in a summary.
    pub fn key_values(&self, prefix: &str) -> Vec<(String, String)> {
        let eigs = self
            .lowest_eigs
            .iter()
            .map(|e| format!("{e:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        vec![
            (format!("{prefix}parity"), self.parity.to_string()),
            (format!("{prefix}V0"), format!("{}", self.v0)),
            (format!("{prefix}lambda"), format!("{}", self.lambda)),
            (format!("{prefix}L"), format!("{}", self.length)),
            (format!("{prefix}N"), self.n.to_string()),
            (
                format!("{prefix}negative_count"),
                self.negative_count.to_string(),
            ),
            (format!("{prefix}lowest_eigs"), eigs),
            (
                format!("{prefix}coercivity_min_ratio"),
                format!("{:.16e}", self.coercivity_min_ratio),
            ),
            (
                format!("{prefix}residual_min_eig"),
                format!("{:.16e}", self.residual_min_eig),
            ),
        ]
    }
}

/// Potential strength of `B♯`: `V = sech²(x/λ)/2λ²` is `V₀ = ½`.
pub const BSHARP_V0: f64 = 0.5;
/// Comparison potential of the residual form, `(2/λ²) sech²(x/λ)`.
pub const RESIDUAL_V0: f64 = 2.0;

/// Lower bound on `min_w B♯(w)/∫w_x²` over one sector: the smallest
/// eigenvalue of the pencil `(K - V, K)` with `K` the stiffness matrix.
///
/// `(K - V) - μK` is tridiagonal; its negative inertia equals the number
/// of pencil eigenvalues below `μ` because `K` is positive definite.
pub fn pencil_min_ratio(grid: &Grid, lambda: f64, parity: Parity) -> Result<f64> {
    let s = stencil(grid, lambda, parity)?;
    let depth = BSHARP_V0 / (lambda * lambda);
    let count = |mu: f64| {
        let scale = 1.0 - mu;
        let diag: Vec<f64> = s
            .lap_diag
            .iter()
            .zip(&s.profile)
            .map(|(k, p)| scale * k - depth * p)
            .collect();
        let off: Vec<f64> = s.lap_off.iter().map(|k| scale * k).collect();
        guarded_count(&diag, &off, 0.0)
    };
    // the ratio is < 1 because V > 0; wide even functions push it far below 0
    let mut lo = -2.0;
    while count(lo) > 0 {
        lo *= 2.0;
        if lo < -1e12 {
            return Err(Error::InvalidArgument(
                "pencil spectrum unbounded below".into(),
            ));
        }
    }
    let mut hi = 2.0;
    while hi - lo > PENCIL_TOL {
        let mid = 0.5 * (lo + hi);
        if count(mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}

/// Coercivity certificate on the odd sector.
pub fn coercivity_certificate(lambda: f64, grid: &Grid) -> Result<SpectralReport> {
    coercivity_certificate_for(lambda, grid, Parity::Odd)
}

pub fn coercivity_certificate_for(
    lambda: f64,
    grid: &Grid,
    parity: Parity,
) -> Result<SpectralReport> {
    let bsharp_op = assemble(grid, BSHARP_V0, lambda, parity)?;
    let residual = assemble(grid, RESIDUAL_V0, lambda, parity)?;
    Ok(SpectralReport {
        negative_count: negative_count(&bsharp_op)?,
        lowest_eigs: lowest_eigs(&bsharp_op, 3.min(bsharp_op.len()))?,
        coercivity_min_ratio: pencil_min_ratio(grid, lambda, parity)?,
        residual_min_eig: lowest_eigs(&residual, 1)?[0],
        v0: BSHARP_V0,
        lambda,
        length: grid.length(),
        n: grid.len(),
        parity,
    })
}

/// Count of bound states summed over both sectors, with eigenvalues in
/// `(-MARGINAL_TOL, 0)` reported separately as marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexCheck {
    pub v0: f64,
    pub pt_index: usize,
    pub odd_count: usize,
    pub even_count: usize,
    pub odd_marginal: usize,
    pub even_marginal: usize,
}

impl IndexCheck {
    pub fn bound_states(&self) -> usize {
        self.odd_count + self.even_count - self.odd_marginal - self.even_marginal
    }

    pub fn agrees(&self) -> bool {
        self.bound_states() == self.pt_index
    }
}

pub fn index_check(grid: &Grid, v0: f64, lambda: f64) -> Result<IndexCheck> {
    let sector = |parity| -> Result<(usize, usize)> {
        let d = assemble(grid, v0, lambda, parity)?;
        let below = negative_count(&d)?;
        let deep =
            sturm_count(&d.diag, &d.offdiag, -MARGINAL_TOL / (lambda * lambda)).or_else(|_| {
                sturm_count(
                    &d.diag,
                    &d.offdiag,
                    -MARGINAL_TOL / (lambda * lambda) + BREAKDOWN_SHIFT,
                )
            })?;
        Ok((below, below - deep))
    };
    let (odd_count, odd_marginal) = sector(Parity::Odd)?;
    let (even_count, even_marginal) = sector(Parity::Even)?;
    Ok(IndexCheck {
        v0,
        pt_index: pt_index(v0)?,
        odd_count,
        even_count,
        odd_marginal,
        even_marginal,
    })
}
