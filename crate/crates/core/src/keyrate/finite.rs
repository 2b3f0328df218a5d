//! Finite-size rate: privacy-amplification penalty and worst-case channel
//! parameters estimated from `m = N - n` sacrificed signals.

use crate::error::{Error, Result};
use crate::numerics::inverse_normal_tail;

use super::asymptotic::{holevo_bound, record_information_variants};
use super::{string_enum, KeyRateResult, Regime, Scenario};
use crate::constellation::TwoModeCovariance;

/// `dim H_B` of the privacy-amplification penalty.
pub const HILBERT_DIMENSION: f64 = 2.0;

/// Model for Bob's variance `t^2 V_x + sigma^2` used when `t` and `sigma^2`
/// are pushed to their confidence limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// `V_x = Y' - 1`, `sigma^2 = 1 + eta eps`: a channel of transmittance
    /// `t^2` and added noise `sigma^2 >= 1` acting on Bob's prepared mode,
    /// which stays physical at every confidence limit.
    Consistent,
    /// `V_x = X'`, `sigma^2 = 1 + eta (eps - 3)`.
    PaperLiteral,
    /// `V_x = X'`, `sigma^2 = 1 + eta eps`.
    Standard,
}

string_enum!(NoiseModel { Consistent => "consistent", PaperLiteral => "paper-literal", Standard => "standard" });

impl NoiseModel {
    pub fn sigma2(&self, eta: f64, epsilon: f64) -> f64 {
        match self {
            NoiseModel::Consistent | NoiseModel::Standard => 1.0 + eta * epsilon,
            NoiseModel::PaperLiteral => 1.0 + eta * (epsilon - 3.0),
        }
    }

    /// Variance `V_x` multiplying `t^2` on Bob's diagonal.
    pub fn regressor_variance(&self, prepared: &TwoModeCovariance) -> f64 {
        match self {
            NoiseModel::Consistent => prepared.b - 1.0,
            NoiseModel::PaperLiteral | NoiseModel::Standard => prepared.a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteSizeParams {
    /// Total number of exchanged signals `N`.
    pub n_total: f64,
    /// `n / N`, the fraction used for the key.
    pub key_fraction: f64,
    pub eps_pe: f64,
    pub eps_pa: f64,
    pub eps_bar: f64,
}

impl Default for FiniteSizeParams {
    fn default() -> Self {
        Self {
            n_total: 1e12,
            key_fraction: 0.5,
            eps_pe: 1e-10,
            eps_pa: 1e-10,
            eps_bar: 1e-10,
        }
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(name, format!("{p} outside (0, 1)")));
    }
    Ok(())
}

impl FiniteSizeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_total.is_finite() && self.n_total >= 2.0) {
            return Err(Error::domain("n_total", format!("{} must be a finite count >= 2", self.n_total)));
        }
        check_probability("key_fraction", self.key_fraction)?;
        check_probability("eps_pe", self.eps_pe)?;
        check_probability("eps_pa", self.eps_pa)?;
        check_probability("eps_bar", self.eps_bar)?;
        if self.key_signals() < 1.0 || self.estimation_signals() < 1.0 {
            return Err(Error::domain("key_fraction", "both n and N - n must be at least 1"));
        }
        Ok(())
    }

    pub fn key_signals(&self) -> f64 {
        self.key_fraction * self.n_total
    }

    pub fn estimation_signals(&self) -> f64 {
        self.n_total - self.key_signals()
    }
}

/// `Delta(n) = (2 dim H_B + 3) sqrt(log2(2/eps_bar)/n) + (2/n) log2(1/eps_pa)`.
pub fn finite_size_correction(n: f64, eps_bar: f64, eps_pa: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(Error::domain("n", format!("{n} key signals")));
    }
    check_probability("eps_bar", eps_bar)?;
    check_probability("eps_pa", eps_pa)?;
    Ok((2.0 * HILBERT_DIMENSION + 3.0) * ((2.0 / eps_bar).log2() / n).sqrt() + 2.0 / n * (1.0 / eps_pa).log2())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCaseChannel {
    pub z: f64,
    pub sigma2: f64,
    pub t_min: f64,
    pub sigma2_max: f64,
    /// `sigma^2 < 0`; its magnitude was used for the confidence widths.
    pub sigma2_negative: bool,
    /// The lower bound on `t` went negative and was clamped to 0.
    pub t_min_clamped: bool,
}

/// Confidence bounds on `t = sqrt(eta)` and `sigma^2` from `m` samples.
pub fn worst_case_channel(m: f64, eta: f64, sigma2: f64, x_prime: f64, eps_pe: f64) -> Result<WorstCaseChannel> {
    if !(m >= 1.0) {
        return Err(Error::domain("m", format!("{m} estimation signals")));
    }
    if !(x_prime > 0.0) {
        return Err(Error::domain("x_prime", format!("{x_prime} must be positive")));
    }
    check_probability("eps_pe", eps_pe)?;
    let z = inverse_normal_tail(eps_pe / 2.0)?;
    let width = sigma2.abs();
    let t = eta.sqrt() - z * (width / (m * x_prime)).sqrt();
    Ok(WorstCaseChannel {
        z,
        sigma2,
        t_min: t.max(0.0),
        sigma2_max: sigma2 + z * std::f64::consts::SQRT_2 * width / m.sqrt(),
        sigma2_negative: sigma2 < 0.0,
        t_min_clamped: t < 0.0,
    })
}

/// `K = (n/N) P [beta zeta I(A:B) - S_pe(E:B) - Delta(n)]`.
pub fn finite_size_key_rate(sc: &Scenario, fp: &FiniteSizeParams) -> Result<KeyRateResult> {
    fp.validate()?;
    let ev = sc.evaluate()?;
    let eta = sc.channel.eta();
    let i_ab = sc.mutual_information_with(&ev, sc.modes.mutual_info)?;
    let x = ev.prepared.a;
    let sigma2 = sc.modes.noise.sigma2(eta, sc.channel.epsilon());
    let wc = worst_case_channel(fp.estimation_signals(), eta, sigma2, x, fp.eps_pe)?;
    let v_x = sc.modes.noise.regressor_variance(&ev.prepared);
    let worst = TwoModeCovariance::new(x, wc.t_min * wc.t_min * v_x + wc.sigma2_max, wc.t_min * ev.prepared.c);
    let hol = holevo_bound(&worst, ev.noise.chi_hom)?;
    let n = fp.key_signals();
    let delta = finite_size_correction(n, fp.eps_bar, fp.eps_pa)?;
    let rate = fp.key_fraction * ev.probability * (sc.detector.beta * sc.zeta_opt * i_ab - hol.s_eb - delta);

    let mut out = KeyRateResult::new(Regime::Finite, rate, i_ab, hol.s_eb, &sc.modes);
    out.record_common(sc, &ev);
    out.record_spectrum("", &hol.spectrum);
    out.record("i_ab", i_ab);
    out.record("s_eb", hol.s_eb);
    out.record("n_total", fp.n_total);
    out.record("key_fraction", fp.key_fraction);
    out.record("delta_n", delta);
    out.record("z_pe", wc.z);
    out.record("sigma2", wc.sigma2);
    out.record("sigma2_max", wc.sigma2_max);
    out.record("t_min", wc.t_min);
    out.record("b_worst", worst.b);
    out.record("c_worst", worst.c);
    record_information_variants(&mut out, sc, &ev);
    if wc.sigma2_negative {
        out.flag("sigma2_negative");
    }
    if wc.t_min_clamped {
        out.flag("t_min_clamped");
    }
    if i_ab < 0.0 {
        out.flag("negative_mutual_information");
    }
    Ok(out)
}
