//! Lossy, noisy bosonic channel and Bob's imperfect homodyne detector.

use crate::constellation::TwoModeCovariance;
use crate::error::{Error, Result};

pub const DEFAULT_ATTENUATION_DB_PER_KM: f64 = 0.2;

/// Fiber loss in dB/km -> transmittance.
pub fn transmittance_from_distance(distance_km: f64, attenuation: f64) -> Result<f64> {
    if !(distance_km >= 0.0) || !distance_km.is_finite() {
        return Err(Error::domain("distance_km", format!("{distance_km} is not a non-negative length")));
    }
    if !(attenuation > 0.0) || !attenuation.is_finite() {
        return Err(Error::domain("attenuation", format!("{attenuation} dB/km must be positive")));
    }
    Ok(10f64.powf(-attenuation * distance_km / 10.0))
}

/// Channel transmittance and excess noise (referred to the channel input).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    eta: f64,
    epsilon: f64,
    distance_km: Option<f64>,
    attenuation: f64,
}

impl ChannelModel {
    pub fn from_transmittance(eta: f64, epsilon: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::domain("eta", format!("transmittance {eta} outside (0, 1]")));
        }
        check_epsilon(epsilon)?;
        Ok(Self {
            eta,
            epsilon,
            distance_km: None,
            attenuation: DEFAULT_ATTENUATION_DB_PER_KM,
        })
    }

    pub fn from_distance(distance_km: f64, attenuation: f64, epsilon: f64) -> Result<Self> {
        let eta = transmittance_from_distance(distance_km, attenuation)?;
        if eta <= 0.0 {
            return Err(Error::domain("distance_km", format!("{distance_km} km underflows the transmittance")));
        }
        check_epsilon(epsilon)?;
        Ok(Self {
            eta,
            epsilon,
            distance_km: Some(distance_km),
            attenuation,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Fiber length, when the channel was built from one.
    pub fn distance_km(&self) -> Option<f64> {
        self.distance_km
    }

    pub fn attenuation(&self) -> f64 {
        self.attenuation
    }

    /// Same channel with a different excess noise.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self { epsilon, ..*self })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::domain("epsilon", format!("excess noise {epsilon} must be finite and >= 0")));
    }
    Ok(())
}

/// Bob's detector efficiency `tau`, electronic noise `v_el` and the
/// reconciliation efficiency `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub tau: f64,
    pub v_el: f64,
    pub beta: f64,
}

impl DetectorModel {
    pub fn new(tau: f64, v_el: f64, beta: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::domain("tau", format!("detection efficiency {tau} outside (0, 1]")));
        }
        if !(v_el >= 0.0) || !v_el.is_finite() {
            return Err(Error::domain("v_el", format!("electronic noise {v_el} must be >= 0")));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::domain("beta", format!("reconciliation efficiency {beta} outside [0, 1]")));
        }
        Ok(Self { tau, v_el, beta })
    }

    /// Ideal detector with the given reconciliation efficiency.
    pub fn ideal(beta: f64) -> Result<Self> {
        Self::new(1.0, 0.0, beta)
    }
}

/// Noise contributions referred to the channel input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBudget {
    pub chi_line: f64,
    pub chi_hom: f64,
    pub chi_tot: f64,
}

pub fn noise_budget(ch: &ChannelModel, det: &DetectorModel) -> NoiseBudget {
    let eta = ch.eta;
    let chi_line = (1.0 - eta) / eta + ch.epsilon;
    let chi_hom = ((1.0 - det.tau) + det.v_el) / det.tau;
    NoiseBudget {
        chi_line,
        chi_hom,
        chi_tot: chi_line + chi_hom / eta,
    }
}

/// `(a, b, c) -> (a, eta (b + chi_line), sqrt(eta) c)`.
pub fn propagate(cov: &TwoModeCovariance, ch: &ChannelModel) -> TwoModeCovariance {
    let chi_line = (1.0 - ch.eta) / ch.eta + ch.epsilon;
    TwoModeCovariance::new(cov.a, ch.eta * (cov.b + chi_line), ch.eta.sqrt() * cov.c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transmittance_examples() {
        assert_eq!(transmittance_from_distance(0.0, 0.2).unwrap(), 1.0);
        assert!((transmittance_from_distance(100.0, 0.2).unwrap() - 0.01).abs() < 1e-16);
        let eta = transmittance_from_distance(330.0, 0.2).unwrap();
        assert!((eta / 2.511_886_431_509_582_2e-7 - 1.0).abs() < 1e-13);
        assert!(transmittance_from_distance(-1.0, 0.2).is_err());
        assert!(transmittance_from_distance(1.0, 0.0).is_err());
    }

    #[test]
    fn noise_budget_examples() {
        let ideal = noise_budget(
            &ChannelModel::from_transmittance(1.0, 0.0).unwrap(),
            &DetectorModel::ideal(1.0).unwrap(),
        );
        assert_eq!((ideal.chi_line, ideal.chi_hom, ideal.chi_tot), (0.0, 0.0, 0.0));

        let nb = noise_budget(
            &ChannelModel::from_transmittance(0.5, 0.01).unwrap(),
            &DetectorModel::new(0.6, 0.05, 0.95).unwrap(),
        );
        assert!((nb.chi_tot - 2.51).abs() < 1e-12);
    }

    #[test]
    fn chi_tot_closed_form_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let eta: f64 = rng.random_range(1e-3..=1.0);
            let eps: f64 = rng.random_range(0.0..0.2);
            let tau: f64 = rng.random_range(0.05..=1.0);
            let v_el: f64 = rng.random_range(0.0..0.5);
            let nb = noise_budget(
                &ChannelModel::from_transmittance(eta, eps).unwrap(),
                &DetectorModel::new(tau, v_el, 0.95).unwrap(),
            );
            let closed = (1.0 + v_el) / (tau * eta) - 1.0 + eps;
            assert!((nb.chi_tot - closed).abs() < 1e-12 * closed.abs().max(1.0));
        }
    }

    #[test]
    fn propagation_examples() {
        let cov = TwoModeCovariance::new(3.0, 2.5, 1.2);
        let same = propagate(&cov, &ChannelModel::from_transmittance(1.0, 0.0).unwrap());
        assert_eq!(same, cov);

        let ch = ChannelModel::from_transmittance(0.3, 0.02).unwrap();
        let vac = propagate(&TwoModeCovariance::VACUUM, &ch);
        assert_eq!(vac.a, 1.0);
        assert!((vac.b - (1.0 + 0.3 * 0.02)).abs() < 1e-15);
        assert_eq!(vac.c, 0.0);
    }

    #[test]
    fn propagation_monotonicity() {
        let cov = TwoModeCovariance::new(6.0, 4.0, 3.0);
        let mut prev_b = f64::NEG_INFINITY;
        for i in 0..50 {
            let eps = i as f64 * 0.004;
            let out = propagate(&cov, &ChannelModel::from_transmittance(0.2, eps).unwrap());
            assert_eq!(out.a, cov.a);
            assert!(out.b > prev_b);
            prev_b = out.b;
        }
        let mut prev_c = f64::NEG_INFINITY;
        for i in 1..=50 {
            let eta = i as f64 / 50.0;
            let out = propagate(&cov, &ChannelModel::from_transmittance(eta, 0.01).unwrap());
            assert!(out.c > prev_c);
            prev_c = out.c;
        }
    }
}
