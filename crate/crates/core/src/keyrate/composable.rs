//! Composable rate against collective attacks: security budget, AEP and
//! entropy corrections, and confidence bounds on the covariance entries.

use crate::constellation::TwoModeCovariance;
use crate::error::{Error, Result};

use super::asymptotic::{holevo_bound, record_information_variants};
use super::{KeyRateResult, Regime, Scenario};

/// Logarithm base inside the confidence-interval radicals.
pub const CONFIDENCE_LOG_BASE: f64 = std::f64::consts::E;
/// Logarithm base of the unsubscripted logs in `Delta_ent`.
pub const ENTANGLEMENT_LOG_BASE: f64 = 2.0;

fn log_base(x: f64, base: f64) -> f64 {
    x.ln() / base.ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposableParams {
    pub n_total: f64,
    pub eps: f64,
    pub eps_sm: f64,
    pub eps_bar: f64,
    pub eps_pe: f64,
    pub eps_cor: f64,
    pub eps_ent: f64,
    pub eps_rob: f64,
    /// Discretisation bits per measurement.
    pub d_bits: u32,
    /// Bits disclosed for parameter estimation; reported only.
    pub n_pe_bits: f64,
}

impl Default for ComposableParams {
    fn default() -> Self {
        Self {
            n_total: 1e14,
            eps: 1e-20,
            eps_sm: 1e-21,
            eps_bar: 1e-21,
            eps_pe: 1e-41,
            eps_cor: 1e-41,
            eps_ent: 1e-41,
            eps_rob: 1e-2,
            d_bits: 5,
            n_pe_bits: 128.0,
        }
    }
}

impl ComposableParams {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("eps", self.eps),
            ("eps_sm", self.eps_sm),
            ("eps_bar", self.eps_bar),
            ("eps_pe", self.eps_pe),
            ("eps_cor", self.eps_cor),
            ("eps_ent", self.eps_ent),
        ];
        for (name, p) in probs {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::domain(name, format!("{p} outside [0, 1)")));
            }
        }
        if !(self.eps > 0.0) {
            return Err(Error::domain("eps", "total security parameter must be positive"));
        }
        if !(0.0..=1.0).contains(&self.eps_rob) {
            return Err(Error::domain("eps_rob", format!("{} outside [0, 1]", self.eps_rob)));
        }
        if !(self.n_total.is_finite() && self.n_total >= 1.0) {
            return Err(Error::domain("n_total", format!("{} must be a finite count >= 1", self.n_total)));
        }
        if !(self.n_pe_bits.is_finite() && self.n_pe_bits >= 0.0) {
            return Err(Error::domain("n_pe_bits", format!("{} must be >= 0", self.n_pe_bits)));
        }
        Ok(())
    }
}

/// Left-hand side `2 eps_sm + eps_bar + (eps_pe + eps_cor + eps_ent)/eps` and
/// whether it fits within `eps`.
pub fn epsilon_budget(p: &ComposableParams) -> (bool, f64) {
    let lhs = 2.0 * p.eps_sm + p.eps_bar + p.eps_pe / p.eps + p.eps_cor / p.eps + p.eps_ent / p.eps;
    (lhs <= p.eps, lhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AepCorrections {
    pub delta_aep: f64,
    pub delta_ent: f64,
}

pub fn aep_ent_corrections(n_total: f64, d_bits: u32, eps: f64, eps_sm: f64) -> AepCorrections {
    let n = n_total;
    let d1 = d_bits as f64 + 1.0;
    let delta_aep = n.sqrt() * d1 * d1 + (16.0 * n).sqrt() * d1 * (2.0 / (eps_sm * eps_sm)).log2()
        + (4.0 * n).sqrt() * (2.0 / (eps * eps * eps_sm)).log2()
        - 4.0 * eps_sm * d_bits as f64 / eps;
    let l2n = log_base(2.0 * n, ENTANGLEMENT_LOG_BASE);
    let delta_ent = (1.0 / eps).log2() - (4.0 * n * l2n * l2n * log_base(2.0 / eps_sm, ENTANGLEMENT_LOG_BASE)).sqrt();
    AepCorrections { delta_aep, delta_ent }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceBounds {
    pub omega_a_max: f64,
    pub omega_b_max: f64,
    pub omega_c_min: f64,
}

impl ConfidenceBounds {
    /// Worst-case matrix with the `-1` offsets added back on the diagonal.
    pub fn covariance(&self) -> TwoModeCovariance {
        TwoModeCovariance::new(self.omega_a_max + 1.0, self.omega_b_max + 1.0, self.omega_c_min)
    }
}

/// Bounds on the covariance entries of the propagated matrix `cov` from `N`
/// samples, with the empirical moments at the edges of their restraints.
pub fn covariance_confidence_bounds(n_total: f64, eps_pe: f64, cov: &TwoModeCovariance) -> Result<ConfidenceBounds> {
    if !(n_total > 9.0) {
        return Err(Error::domain("n_total", format!("{n_total} <= 9 leaves no room for the restraints")));
    }
    let n = n_total;
    let spread = 3.0 * n.sqrt();
    let x2 = (n + spread) * cov.a;
    let y2 = (n + spread) * cov.b;
    let xy = (n - spread) * cov.c;
    let half = n / 2.0;
    let widen = 1.0 + 2.0 * (log_base(36.0 / eps_pe, CONFIDENCE_LOG_BASE) / half).sqrt();
    Ok(ConfidenceBounds {
        omega_a_max: x2 / n * widen - 1.0,
        omega_b_max: y2 / n * widen - 1.0,
        omega_c_min: xy / n - 5.0 * (x2 + y2) * (log_base(8.0 / eps_pe, CONFIDENCE_LOG_BASE) / half.powi(3)).sqrt(),
    })
}

/// `K = P (1 - eps_rob) {beta zeta I - F(Omega) - (Delta_AEP + Delta_ent + 2 log2(1/(2 eps_bar)))/N}`.
pub fn composable_key_rate(sc: &Scenario, cp: &ComposableParams) -> Result<KeyRateResult> {
    cp.validate()?;
    let (valid, lhs) = epsilon_budget(cp);
    if !valid {
        return Err(Error::Precondition(format!(
            "security budget {lhs:e} exceeds eps = {:e}",
            cp.eps
        )));
    }
    let ev = sc.evaluate()?;
    let i_ab = sc.mutual_information_with(&ev, sc.modes.composable_mutual_info)?;
    let bounds = covariance_confidence_bounds(cp.n_total, cp.eps_pe, &ev.propagated)?;
    let worst = bounds.covariance();
    let hol = holevo_bound(&worst, ev.noise.chi_hom)?;
    let corr = aep_ent_corrections(cp.n_total, cp.d_bits, cp.eps, cp.eps_sm);
    let pa_term = 2.0 * (1.0 / (2.0 * cp.eps_bar)).log2();
    let penalty = (corr.delta_aep + corr.delta_ent + pa_term) / cp.n_total;
    let beta_i = sc.detector.beta * sc.zeta_opt * i_ab;
    let rate = ev.probability * (1.0 - cp.eps_rob) * (beta_i - hol.s_eb - penalty);

    let mut out = KeyRateResult::new(Regime::Composable, rate, i_ab, hol.s_eb, &sc.modes);
    out.record_common(sc, &ev);
    out.record_spectrum("", &hol.spectrum);
    out.record("i_ab", i_ab);
    out.record("s_eb", hol.s_eb);
    out.record("n_total", cp.n_total);
    out.record("eps_budget", lhs);
    out.record("eps_rob", cp.eps_rob);
    out.record("d_bits", cp.d_bits as f64);
    out.record("n_pe_bits", cp.n_pe_bits);
    out.record("delta_aep", corr.delta_aep);
    out.record("delta_ent", corr.delta_ent);
    out.record("omega_a_max", bounds.omega_a_max);
    out.record("omega_b_max", bounds.omega_b_max);
    out.record("omega_c_min", bounds.omega_c_min);
    out.record("finite_penalty", penalty);
    // reconciliation leakage implied by beta I = 2 H - leak/(2n) with H = I/2
    out.record("leak_ec_per_symbol", 2.0 * (1.0 - sc.detector.beta) * i_ab);
    record_information_variants(&mut out, sc, &ev);
    if corr.delta_ent < 0.0 {
        out.flag("delta_ent_negative");
    }
    Ok(out)
}
