//! Discrimination of the four QPSK coherent states: the standard quantum
//! limit, the square-root-measurement (Helstrom) bound, and a Monte Carlo
//! model of the adaptive Bayesian receiver with photon-number resolution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::constellation::{lambda_coefficients, ConstellationParams};
use crate::error::{Error, Result};
use crate::numerics::{erfc, poisson_sample, RngStream};

const GRAM_TOLERANCE: f64 = 1e-9;

/// Stream ids at and above this value are reserved for gain-selection pilots.
const PILOT_STREAM_BASE: u64 = 1 << 48;
const PILOT_TRIALS_MAX: u64 = 20_000;

/// Displacement gains tried when the gain is optimised.
pub const GAIN_GRID: [f64; 11] = [1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0];

fn check_mean_photon(mean_photon: f64) -> Result<()> {
    if !mean_photon.is_finite() || mean_photon < 0.0 {
        return Err(Error::domain("mean_photon", format!("{mean_photon} is not a finite non-negative photon number")));
    }
    Ok(())
}

/// Error probability of heterodyne-style quadrature discrimination.
pub fn sql_error(mean_photon: f64) -> Result<f64> {
    check_mean_photon(mean_photon)?;
    let q = 1.0 - 0.5 * erfc((mean_photon / 2.0).sqrt());
    Ok(1.0 - q * q)
}

/// Eigenvalues of the Gram matrix of the four states, `omega_1..omega_4`.
///
/// The defining complex sum is evaluated and checked for a vanishing
/// imaginary part, non-negativity and unit trace. The returned values come
/// from the equivalent real form `4 lambda_{k-1}`, which keeps full relative
/// accuracy for the small eigenvalues at low photon number.
pub fn gram_eigenvalues(mean_photon: f64) -> Result<[f64; 4]> {
    check_mean_photon(mean_photon)?;
    let lambda = lambda_coefficients(&ConstellationParams::from_alpha(mean_photon.sqrt())?);
    let mut out = [0.0; 4];
    for (idx, slot) in out.iter_mut().enumerate() {
        let k = idx as f64 + 1.0;
        let mut sum = Complex64::new(0.0, 0.0);
        for m in 1..=4 {
            let phase = 2.0 * PI * m as f64 / 4.0;
            let root = Complex64::from_polar(1.0, phase);
            // e^{-n} folded into the exponent so large n cannot overflow
            let exponent = Complex64::new(0.0, (1.0 - k) * phase) + mean_photon * (root - 1.0);
            sum += exponent.exp();
        }
        if sum.im.abs() > GRAM_TOLERANCE {
            return Err(Error::numerical(format!("Gram eigenvalue {idx} has imaginary part {}", sum.im)));
        }
        if sum.re < -GRAM_TOLERANCE {
            return Err(Error::numerical(format!("Gram eigenvalue {idx} is negative: {}", sum.re)));
        }
        let exact = 4.0 * lambda[idx];
        if (sum.re - exact).abs() > GRAM_TOLERANCE {
            return Err(Error::numerical(format!("Gram eigenvalue {idx}: {} vs {exact}", sum.re)));
        }
        *slot = exact;
    }
    let trace: f64 = out.iter().sum();
    if (trace - 4.0).abs() > GRAM_TOLERANCE {
        return Err(Error::numerical(format!("Gram trace {trace} differs from 4")));
    }
    Ok(out)
}

/// Square-root-measurement error probability, which is optimal for this
/// symmetric ensemble.
pub fn helstrom_srm_error(mean_photon: f64) -> Result<f64> {
    let omega = gram_eigenvalues(mean_photon)?;
    let s: f64 = omega.iter().map(|w| w.sqrt()).sum();
    Ok((1.0 - s * s / 16.0).max(0.0))
}

/// Ratio of success probabilities `(1 - P_Hel) / (1 - P_SQL)`.
pub fn zeta_opt(mean_photon: f64) -> Result<f64> {
    Ok((1.0 - helstrom_srm_error(mean_photon)?) / (1.0 - sql_error(mean_photon)?))
}

/// `cos` of the angle between constellation points `k` and `c`, exact for
/// the four QPSK phases.
fn relative_cosine(k: usize, c: usize) -> f64 {
    match (k + 4 - c) % 4 {
        0 => 1.0,
        2 => -1.0,
        _ => 0.0,
    }
}

/// Photon-counting rates for one stage of the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageModel {
    /// Mean photon number of the whole signal.
    pub mean_photon: f64,
    /// Fraction of the signal energy routed to this stage.
    pub stage_fraction: f64,
    /// Displacement `beta = gain * alpha_candidate`.
    pub displacement_gain: f64,
    pub efficiency: f64,
}

impl StageModel {
    /// Mean count when the true state is `k` and the displacement nulls candidate `c`.
    pub fn rate(&self, k: usize, c: usize) -> f64 {
        let g = self.displacement_gain;
        let distance = (1.0 + g * g - 2.0 * g * relative_cosine(k, c)).max(0.0);
        self.mean_photon * self.stage_fraction * self.efficiency * distance
    }
}

/// Posterior over the four states after observing `count` photons with the
/// displacement set to `candidate`.
pub fn bayesian_update(prior: &[f64; 4], candidate: usize, count: u64, stage: &StageModel) -> Result<[f64; 4]> {
    if candidate >= 4 {
        return Err(Error::domain("candidate", format!("index {candidate} outside 0..4")));
    }
    let mut log_like = [f64::NEG_INFINITY; 4];
    for (k, slot) in log_like.iter_mut().enumerate() {
        let rate = stage.rate(k, candidate);
        // ln(count!) is common to every state and dropped
        *slot = if rate == 0.0 {
            if count == 0 { 0.0 } else { f64::NEG_INFINITY }
        } else {
            -rate + count as f64 * rate.ln()
        };
    }
    let peak = (0..4)
        .filter(|&k| prior[k] > 0.0)
        .map(|k| log_like[k])
        .fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Err(Error::numerical(format!("count {count} has zero likelihood under every state with nonzero prior")));
    }
    let mut post = [0.0; 4];
    for k in 0..4 {
        if prior[k] > 0.0 {
            post[k] = prior[k] * (log_like[k] - peak).exp();
        }
    }
    let norm: f64 = post.iter().sum();
    for p in post.iter_mut() {
        *p /= norm;
    }
    Ok(post)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn map_index(posterior: &[f64; 4]) -> usize {
    let mut best = 0;
    for k in 1..4 {
        if posterior[k] > posterior[best] {
            best = k;
        }
    }
    best
}

/// How the displacement gain of the receiver is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainPolicy {
    Fixed(f64),
    /// Best of [`GAIN_GRID`] on independent pilot trials.
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationConfig {
    pub mean_photon: f64,
    pub stages: u32,
    pub trials: u64,
    pub seed: u64,
    pub detector_efficiency: f64,
    pub gain: GainPolicy,
}

impl Default for DiscriminationConfig {
    fn default() -> Self {
        Self {
            mean_photon: 1.0,
            stages: 10,
            trials: 100_000,
            seed: 42,
            detector_efficiency: 1.0,
            gain: GainPolicy::Optimized,
        }
    }
}

impl DiscriminationConfig {
    pub fn validate(&self) -> Result<()> {
        check_mean_photon(self.mean_photon)?;
        if self.stages == 0 {
            return Err(Error::domain("stages", "at least one stage is required"));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials", "at least one trial is required"));
        }
        if !(self.detector_efficiency > 0.0 && self.detector_efficiency <= 1.0) {
            return Err(Error::domain("detector_efficiency", format!("{} outside (0, 1]", self.detector_efficiency)));
        }
        if let GainPolicy::Fixed(g) = self.gain {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::domain("displacement_gain", format!("{g} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationResult {
    pub mean_photon: f64,
    pub stages: u32,
    pub trials: u64,
    pub p_sql: f64,
    pub p_hel: f64,
    pub p_rec: f64,
    pub p_rec_stderr: f64,
    pub zeta: f64,
    pub zeta_opt: f64,
    pub displacement_gain: f64,
}

fn run_trial(stream: RngStream, stages: u32, stage: &StageModel) -> Result<bool> {
    let mut rng = stream.rng();
    let truth: usize = rng.random_range(0..4);
    let mut posterior = [0.25; 4];
    for _ in 0..stages {
        let candidate = map_index(&posterior);
        let count = poisson_sample(stage.rate(truth, candidate), &mut rng);
        posterior = bayesian_update(&posterior, candidate, count, stage)?;
    }
    Ok(map_index(&posterior) != truth)
}

/// Number of wrong decisions over `trials` trials on streams `first_stream..`.
fn count_errors(cfg: &DiscriminationConfig, gain: f64, first_stream: u64, trials: u64) -> Result<u64> {
    let stage = StageModel {
        mean_photon: cfg.mean_photon,
        stage_fraction: 1.0 / cfg.stages as f64,
        displacement_gain: gain,
        efficiency: cfg.detector_efficiency,
    };
    (0..trials)
        .into_par_iter()
        .map(|t| run_trial(RngStream::new(cfg.seed, first_stream + t), cfg.stages, &stage).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn select_gain(cfg: &DiscriminationConfig) -> Result<f64> {
    match cfg.gain {
        GainPolicy::Fixed(g) => Ok(g),
        GainPolicy::Optimized => {
            let pilot = cfg.trials.min(PILOT_TRIALS_MAX);
            let mut best = (u64::MAX, GAIN_GRID[0]);
            for (i, &g) in GAIN_GRID.iter().enumerate() {
                let errors = count_errors(cfg, g, PILOT_STREAM_BASE + i as u64 * PILOT_TRIALS_MAX, pilot)?;
                if errors < best.0 {
                    best = (errors, g);
                }
            }
            Ok(best.1)
        }
    }
}

/// Monte Carlo estimate of the adaptive receiver's error probability.
///
/// Trial `t` draws from stream `(seed, t)`, so the result does not depend on
/// how trials are scheduled across threads.
pub fn simulate_adaptive_receiver(cfg: &DiscriminationConfig) -> Result<DiscriminationResult> {
    cfg.validate()?;
    let gain = select_gain(cfg)?;
    let errors = count_errors(cfg, gain, 0, cfg.trials)?;
    let n = cfg.trials as f64;
    let p_rec = errors as f64 / n;
    let p_sql = sql_error(cfg.mean_photon)?;
    let p_hel = helstrom_srm_error(cfg.mean_photon)?;
    Ok(DiscriminationResult {
        mean_photon: cfg.mean_photon,
        stages: cfg.stages,
        trials: cfg.trials,
        p_sql,
        p_hel,
        p_rec,
        p_rec_stderr: (p_rec * (1.0 - p_rec) / n).sqrt(),
        zeta: (1.0 - p_rec) / (1.0 - p_sql),
        zeta_opt: (1.0 - p_hel) / (1.0 - p_sql),
        displacement_gain: gain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sql_examples() {
        assert_eq!(sql_error(0.0).unwrap(), 0.75);
        assert!((sql_error(1.0).unwrap() - 0.292_139_018_262_858_98).abs() < 1e-12);
        let mut prev = 0.76;
        for i in 0..100 {
            let p = sql_error(i as f64 * 0.3).unwrap();
            assert!(p < prev || i == 0);
            prev = p;
        }
        assert!(sql_error(-0.1).is_err());
    }

    #[test]
    fn gram_eigenvalues_examples() {
        let w0 = gram_eigenvalues(0.0).unwrap();
        assert!((w0[0] - 4.0).abs() < 1e-15 && w0[1..].iter().all(|w| w.abs() < 1e-15));
        let w1 = gram_eigenvalues(1.0).unwrap();
        let frozen = [
            1.532_867_503_929_438_6,
            1.483_784_468_069_611_7,
            0.737_803_062_543_786_81,
            0.245_544_965_457_162_91,
        ];
        for (a, b) in w1.iter().zip(frozen) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn gram_eigenvalues_match_direct_sum() {
        // direct complex evaluation of the Gram sum, independent of the real form
        for i in 0..60 {
            let n = i as f64 * 0.1;
            let w = gram_eigenvalues(n).unwrap();
            for (k, wk) in w.iter().enumerate() {
                let direct: Complex64 = (1..=4)
                    .map(|m| {
                        let theta = PI * m as f64 / 2.0;
                        Complex64::new(0.0, -(k as f64) * theta).exp()
                            * (n * Complex64::from_polar(1.0, theta)).exp()
                    })
                    .sum::<Complex64>()
                    * (-n).exp();
                assert!((wk - direct.re).abs() < 1e-12 && direct.im.abs() < 1e-12, "n={n} k={k}");
            }
            assert!((w.iter().sum::<f64>() - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn helstrom_examples() {
        assert!((helstrom_srm_error(0.0).unwrap() - 0.75).abs() < 1e-15);
        let p = helstrom_srm_error(1.0).unwrap();
        assert!((p - 0.092_421_415_604_458_983).abs() < 1e-12);
        assert!(p < sql_error(1.0).unwrap());
    }

    #[test]
    fn helstrom_below_sql_on_grid() {
        for i in 1..=200 {
            let n = 5.0 * i as f64 / 200.0;
            let hel = helstrom_srm_error(n).unwrap();
            let sql = sql_error(n).unwrap();
            assert!(hel < sql, "n={n}");
            assert!(zeta_opt(n).unwrap() > 1.0);
        }
    }

    #[test]
    fn bayesian_update_examples() {
        let stage = StageModel {
            mean_photon: 1.0,
            stage_fraction: 1.0,
            displacement_gain: 1.0,
            efficiency: 1.0,
        };
        let post = bayesian_update(&[1.0, 0.0, 0.0, 0.0], 2, 3, &stage).unwrap();
        assert_eq!(post, [1.0, 0.0, 0.0, 0.0]);

        // rates 0, 2, 4, 2 for states 0..3 with the displacement on state 0
        let post = bayesian_update(&[0.25; 4], 0, 2, &stage).unwrap();
        let a = (-2.0f64).exp() * 4.0 / 2.0;
        let b = (-4.0f64).exp() * 16.0 / 2.0;
        let expect = [0.0, a / (2.0 * a + b), b / (2.0 * a + b), a / (2.0 * a + b)];
        for k in 0..4 {
            assert!((post[k] - expect[k]).abs() < 1e-15);
        }

        let strong = StageModel { mean_photon: 25.0, ..stage };
        let post = bayesian_update(&[0.25; 4], 1, 0, &strong).unwrap();
        assert!(post[1] > 0.999_999);
    }

    #[test]
    fn bayesian_update_zero_likelihood_is_an_error() {
        let stage = StageModel {
            mean_photon: 1.0,
            stage_fraction: 1.0,
            displacement_gain: 1.0,
            efficiency: 1.0,
        };
        assert!(bayesian_update(&[1.0, 0.0, 0.0, 0.0], 0, 1, &stage).is_err());
    }

    #[test]
    fn map_ties_go_low() {
        assert_eq!(map_index(&[0.25; 4]), 0);
        assert_eq!(map_index(&[0.1, 0.4, 0.1, 0.4]), 1);
    }

    #[test]
    fn vacuum_input_is_a_uniform_guess() {
        let cfg = DiscriminationConfig {
            mean_photon: 0.0,
            trials: 40_000,
            ..Default::default()
        };
        let r = simulate_adaptive_receiver(&cfg).unwrap();
        assert!((r.p_rec - 0.75).abs() < 3.0 * r.p_rec_stderr);
    }

    #[test]
    fn simulation_is_deterministic() {
        let cfg = DiscriminationConfig {
            trials: 5_000,
            seed: 9,
            ..Default::default()
        };
        let a = simulate_adaptive_receiver(&cfg).unwrap();
        let b = simulate_adaptive_receiver(&cfg).unwrap();
        assert_eq!(a.p_rec.to_bits(), b.p_rec.to_bits());
        assert_eq!(a.displacement_gain, b.displacement_gain);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = DiscriminationConfig {
            trials: 0,
            ..Default::default()
        };
        assert!(simulate_adaptive_receiver(&cfg).is_err());
    }
}
