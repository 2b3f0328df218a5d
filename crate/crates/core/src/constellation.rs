//! Four-state (QPSK) constellation: eigenvalue weights of the mixed state,
//! the EPR-side correlation and the covariance matrix of the purification.

use crate::error::{Error, Result};

/// Coherent amplitude of the four states `|alpha e^{i(2k+1)pi/4}>`.
///
/// Stored as `alpha`; the modulation variance `V_M = 2 alpha^2` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationParams {
    alpha: f64,
}

impl ConstellationParams {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::domain("alpha", format!("{alpha} is not a finite non-negative amplitude")));
        }
        Ok(Self { alpha })
    }

    pub fn from_modulation_variance(v_mod: f64) -> Result<Self> {
        if !v_mod.is_finite() || v_mod < 0.0 {
            return Err(Error::domain("v_mod", format!("{v_mod} is not a finite non-negative variance")));
        }
        Ok(Self {
            alpha: (v_mod / 2.0).sqrt(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn v_mod(&self) -> f64 {
        2.0 * self.alpha * self.alpha
    }

    /// Mean photon number `|alpha|^2` of each constellation state.
    pub fn mean_photon(&self) -> f64 {
        self.alpha * self.alpha
    }
}

/// Two-mode covariance matrix `[[a I, c Z], [c Z, b I]]` in shot-noise units,
/// with `I = diag(1, 1)` and `Z = diag(1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCovariance {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TwoModeCovariance {
    pub const VACUUM: TwoModeCovariance = TwoModeCovariance {
        a: 1.0,
        b: 1.0,
        c: 0.0,
    };

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// Seralian-type invariant `det(A) + det(B) + 2 det(C) = a^2 + b^2 - 2c^2`.
    pub fn delta(&self) -> f64 {
        self.a * self.a + self.b * self.b - 2.0 * self.c * self.c
    }

    /// Square root of the full determinant, `|ab - c^2|`.
    pub fn sqrt_det(&self) -> f64 {
        (self.a * self.b - self.c * self.c).abs()
    }

    /// Symplectic eigenvalues `(nu_plus, nu_minus)`, `nu_plus >= nu_minus`.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let delta = self.delta();
        let det = self.sqrt_det().powi(2);
        let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
        let plus = (0.5 * (delta + disc)).max(0.0).sqrt();
        let minus = (0.5 * (delta - disc)).max(0.0).sqrt();
        (plus, minus)
    }

    /// Uncertainty-principle check: both diagonal entries and the smaller
    /// symplectic eigenvalue are at least `1 - tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        let finite = self.a.is_finite() && self.b.is_finite() && self.c.is_finite();
        finite
            && self.a >= 1.0 - tol
            && self.b >= 1.0 - tol
            && self.symplectic_eigenvalues().1 >= 1.0 - tol
    }
}

/// Below this value of `alpha^2` the differences `cosh - cos` and `sinh - sin`
/// are evaluated from their power series to avoid cancellation.
const SERIES_THRESHOLD: f64 = 1.0;

/// Returns `e^{-x} [cosh x + cos x, sinh x + sin x, cosh x - cos x, sinh x - sin x] / 2`.
fn damped_combinations(x: f64) -> [f64; 4] {
    let damp = (-x).exp();
    if x >= SERIES_THRESHOLD {
        // e^{-x} cosh x and e^{-x} sinh x written without overflow for large x
        let ch = 0.5 * (1.0 + (-2.0 * x).exp());
        let sh = 0.5 * (1.0 - (-2.0 * x).exp());
        let (c, s) = (damp * x.cos(), damp * x.sin());
        return [0.5 * (ch + c), 0.5 * (sh + s), 0.5 * (ch - c), 0.5 * (sh - s)];
    }
    // Each combination keeps every fourth term of the exponential series:
    // sum over n of x^(4n + k) / (4n + k)! for k = 0, 1, 2, 3.
    let mut sums = [0.0f64; 4];
    let mut term = 1.0f64;
    for n in 0..80usize {
        sums[n % 4] += term;
        term *= x / (n + 1) as f64;
        if term < 1e-300 {
            break;
        }
    }
    sums.map(|v| damp * v)
}

/// Weights `[lambda_0 .. lambda_3]` of the QPSK mixture in its eigenbasis.
pub fn lambda_coefficients(params: &ConstellationParams) -> [f64; 4] {
    damped_combinations(params.mean_photon())
}

/// Correlation `Z_4 = 2 alpha^2 sum_k lambda_{k-1}^{3/2} lambda_k^{-1/2}` (indices mod 4).
pub fn correlation_z4(params: &ConstellationParams) -> f64 {
    let lambdas = lambda_coefficients(params);
    if params.alpha() == 0.0 || lambdas.iter().any(|&l| l <= 0.0) {
        return 0.0;
    }
    let sum: f64 = (0..4)
        .map(|k| {
            let prev = lambdas[(k + 3) % 4];
            prev.powf(1.5) / lambdas[k].sqrt()
        })
        .sum();
    2.0 * params.mean_photon() * sum
}

/// Covariance matrix of the four-state EPR purification: `a = b = 1 + 2 alpha^2`, `c = Z_4`.
pub fn epr_covariance(params: &ConstellationParams) -> TwoModeCovariance {
    let v = 1.0 + params.v_mod();
    TwoModeCovariance::new(v, v, correlation_z4(params))
}

/// Correlation `sqrt(V^2 - 1)` of a Gaussian two-mode squeezed vacuum with the same variance.
pub fn gaussian_epr_correlation(params: &ConstellationParams) -> f64 {
    let v = 1.0 + params.v_mod();
    (v * v - 1.0).max(0.0).sqrt()
}
