//! Photon subtraction on Bob's half of the EPR pair: heralding probability
//! and the covariance matrix of the conditioned two-mode state.

use crate::constellation::{
    correlation_z4, gaussian_epr_correlation, ConstellationParams, TwoModeCovariance,
};
use crate::error::{Error, Result};
use crate::keyrate::string_enum;

/// Beam-splitter transmittance `mu` and number of subtracted photons `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubtractionParams {
    mu: f64,
    j: u32,
}

impl SubtractionParams {
    pub fn new(mu: f64, j: u32) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::domain("mu", format!("transmittance {mu} outside (0, 1]")));
        }
        Ok(Self { mu, j })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn photons(&self) -> u32 {
        self.j
    }
}

/// Squeezing-like parameter `xi = alpha / sqrt(1 + alpha^2)`.
pub fn xi(alpha: f64) -> f64 {
    alpha / (1.0 + alpha * alpha).sqrt()
}

/// How the off-diagonal entry of the subtracted covariance matrix is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubtractionCorrelation {
    /// `sqrt(mu) xi (j+1) / (1 - mu xi^2)`, the literal closed form. At
    /// `j = 0, mu = 1` it is half of the two-mode squeezed vacuum correlation.
    Printed,
    /// `Z_ref sqrt(mu) (j+1) (1 - xi^2) / (1 - mu xi^2)` with the Gaussian
    /// reference `Z_ref = sqrt(V^2 - 1)`. Equal to twice `Printed`; this is the
    /// exact photon-subtracted two-mode squeezed vacuum value.
    #[default]
    Gaussian,
    /// Same form with the four-state reference `Z_ref = Z_4`; reduces to the
    /// four-state EPR matrix at `j = 0, mu = 1`.
    FourState,
}

string_enum!(SubtractionCorrelation {
    Printed => "printed",
    Gaussian => "gaussian",
    FourState => "four-state",
});

fn heralding_denominator(alpha: f64, sub: &SubtractionParams) -> Result<(f64, f64)> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::domain("alpha", format!("{alpha} is not a finite non-negative amplitude")));
    }
    let xi2 = xi(alpha).powi(2);
    let denom = 1.0 - sub.mu * xi2;
    if denom <= 0.0 {
        return Err(Error::domain(
            "subtraction",
            format!("mu * xi^2 = {} >= 1; heralding series diverges", sub.mu * xi2),
        ));
    }
    Ok((xi2, denom))
}

/// Probability of heralding exactly `j` photons at the subtraction beam splitter:
/// `(1 - xi^2) (1 - mu)^j xi^{2j} / (1 - mu xi^2)^{j+1}`.
pub fn subtraction_success_probability(alpha: f64, sub: &SubtractionParams) -> Result<f64> {
    let (xi2, denom) = heralding_denominator(alpha, sub)?;
    let j = sub.j as i32;
    Ok((1.0 - xi2) * (1.0 - sub.mu).powi(j) * xi2.powi(j) / denom.powi(j + 1))
}

/// Covariance matrix `(X', Y', Z')` of the photon-subtracted state.
pub fn subtracted_covariance(
    alpha: f64,
    sub: &SubtractionParams,
    correlation: SubtractionCorrelation,
) -> Result<TwoModeCovariance> {
    let (xi2, denom) = heralding_denominator(alpha, sub)?;
    let j = sub.j as f64;
    let mu = sub.mu;
    let a = (mu * xi2 + 2.0 * j + 1.0) / denom;
    let b = (mu * xi2 * (2.0 * j + 1.0) + 1.0) / denom;
    let scale = mu.sqrt() * (j + 1.0) / denom;
    let c = match correlation {
        SubtractionCorrelation::Printed => scale * xi2.sqrt(),
        SubtractionCorrelation::Gaussian | SubtractionCorrelation::FourState => {
            let params = ConstellationParams::from_alpha(alpha)?;
            let reference = if correlation == SubtractionCorrelation::Gaussian {
                gaussian_epr_correlation(&params)
            } else {
                correlation_z4(&params)
            };
            reference * scale * (1.0 - xi2)
        }
    };
    Ok(TwoModeCovariance::new(a, b, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::epr_covariance;

    fn sub(mu: f64, j: u32) -> SubtractionParams {
        SubtractionParams::new(mu, j).unwrap()
    }

    /// Binomial-sum form `(1 - xi^2) sum_{n >= j} C(n, j) xi^{2n} (1-mu)^j mu^{n-j}`.
    fn success_probability_series(alpha: f64, mu: f64, j: u32, terms: u32) -> f64 {
        let xi2 = xi(alpha).powi(2);
        let mut total = 0.0;
        // C(n, j) built incrementally: C(j, j) = 1, C(n+1, j) = C(n, j) (n+1)/(n+1-j)
        let mut binom = 1.0f64;
        for n in j..=terms {
            if n > j {
                binom *= n as f64 / (n - j) as f64;
            }
            total += binom * xi2.powi(n as i32) * (1.0 - mu).powi(j as i32) * mu.powi((n - j) as i32);
        }
        (1.0 - xi2) * total
    }

    #[test]
    fn success_probability_examples() {
        assert_eq!(subtraction_success_probability(1.0, &sub(1.0, 1)).unwrap(), 0.0);
        assert_eq!(subtraction_success_probability(0.0, &sub(0.5, 2)).unwrap(), 0.0);
        let p = subtraction_success_probability(1.0, &sub(0.9, 1)).unwrap();
        assert!((p - 0.025 / 0.3025).abs() < 1e-15);
        assert!((p - success_probability_series(1.0, 0.9, 1, 400)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_series() {
        for &alpha in &[0.3, 0.5, 1.0, 1.5] {
            for i in 1..20 {
                let mu = i as f64 / 20.0;
                for j in 0..=5 {
                    let closed = subtraction_success_probability(alpha, &sub(mu, j)).unwrap();
                    let series = success_probability_series(alpha, mu, j, 200);
                    assert!((closed - series).abs() < 1e-12, "alpha={alpha} mu={mu} j={j}");
                }
            }
        }
    }

    #[test]
    fn probability_in_unit_interval_and_ordered_in_j() {
        for &alpha in &[0.5, 1.0, 2.0] {
            for i in 0..100 {
                let mu = 0.005 + 0.99 * i as f64 / 99.0;
                let probs: Vec<f64> = (1..=5)
                    .map(|j| subtraction_success_probability(alpha, &sub(mu, j)).unwrap())
                    .collect();
                assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));
                assert!(probs.windows(2).all(|w| w[0] > w[1]), "alpha={alpha} mu={mu}: {probs:?}");
            }
        }
    }

    #[test]
    fn covariance_examples() {
        let cov = subtracted_covariance(0.0, &sub(0.4, 0), SubtractionCorrelation::Printed).unwrap();
        assert_eq!(cov, TwoModeCovariance::VACUUM);

        let cov = subtracted_covariance(1.0, &sub(1.0, 0), SubtractionCorrelation::Printed).unwrap();
        assert!((cov.a - 3.0).abs() < 1e-14 && (cov.b - 3.0).abs() < 1e-14);
        assert!((cov.c - std::f64::consts::SQRT_2).abs() < 1e-14);

        // frozen from 40-digit arithmetic
        let cov = subtracted_covariance(1.0, &sub(0.9, 1), SubtractionCorrelation::Printed).unwrap();
        assert!((cov.a - 6.272_727_272_727_272_7).abs() < 1e-13);
        assert!((cov.b - 4.272_727_272_727_272_7).abs() < 1e-13);
        assert!((cov.c - 2.439_346_884_545_225_1).abs() < 1e-13);
        let exact = subtracted_covariance(1.0, &sub(0.9, 1), SubtractionCorrelation::Gaussian).unwrap();
        assert!((exact.c - 4.878_693_769_090_450_2).abs() < 1e-13);
    }

    #[test]
    fn gaussian_correlation_is_twice_printed() {
        for &alpha in &[0.1, 0.7, 1.3, 2.0] {
            for &(mu, j) in &[(0.2, 0), (0.5, 1), (0.9, 3)] {
                let p = subtracted_covariance(alpha, &sub(mu, j), SubtractionCorrelation::Printed).unwrap();
                let g = subtracted_covariance(alpha, &sub(mu, j), SubtractionCorrelation::Gaussian).unwrap();
                assert!((g.c - 2.0 * p.c).abs() < 1e-12 * g.c);
                assert_eq!((p.a, p.b), (g.a, g.b));
            }
        }
    }

    #[test]
    fn four_state_form_reduces_to_epr_matrix_without_subtraction() {
        for &alpha in &[0.2, 0.5, 1.0, 1.7] {
            let params = ConstellationParams::from_alpha(alpha).unwrap();
            let cov = subtracted_covariance(alpha, &sub(1.0, 0), SubtractionCorrelation::FourState).unwrap();
            let epr = epr_covariance(&params);
            assert!((cov.a - epr.a).abs() < 1e-12);
            assert!((cov.b - epr.b).abs() < 1e-12);
            assert!((cov.c - epr.c).abs() < 1e-12);
        }
    }

    #[test]
    fn subtracted_matrices_are_physical() {
        for corr in [
            SubtractionCorrelation::Printed,
            SubtractionCorrelation::Gaussian,
            SubtractionCorrelation::FourState,
        ] {
            for ia in 1..=20 {
                let alpha = 2.0 * ia as f64 / 20.0;
                for im in 1..50 {
                    let mu = im as f64 / 50.0;
                    for j in 0..=3 {
                        let cov = subtracted_covariance(alpha, &sub(mu, j), corr).unwrap();
                        assert!(cov.a >= cov.b && cov.b >= 1.0);
                        assert!(cov.is_physical(1e-9), "{corr:?} {alpha} {mu} {j} {cov:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(SubtractionParams::new(0.0, 1).is_err());
        assert!(SubtractionParams::new(1.2, 1).is_err());
        assert!(subtraction_success_probability(f64::NAN, &sub(0.5, 1)).is_err());
    }
}
