//! Asymptotic rate under collective attacks with reverse reconciliation:
//! Shannon information, Holevo bound and their assembly.

use crate::channel::NoiseBudget;
use crate::constellation::TwoModeCovariance;
use crate::error::{Error, Result};

use super::{HolevoMode, KeyRateResult, MutualInfoMode, Regime, Scenario};

/// Absolute tolerance below which negative discriminants are clamped to zero.
pub const DISCRIMINANT_TOLERANCE: f64 = 1e-9;
/// Symplectic eigenvalues below `1 - KAPPA_TOLERANCE` are rejected.
pub const KAPPA_TOLERANCE: f64 = 1e-6;
const G_TOLERANCE: f64 = 1e-9;

/// Entropy of a thermal state with mean photon number `x`, in bits.
pub fn von_neumann_g(x: f64) -> Result<f64> {
    if x.is_nan() || x < -G_TOLERANCE {
        return Err(Error::domain("x", format!("entropy argument {x} is negative")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).log2() - x * x.log2())
}

/// Shannon information from the propagated matrix, in bits.
pub fn mutual_information(cov: &TwoModeCovariance, mode: MutualInfoMode) -> Result<f64> {
    let v_a = (cov.a + 1.0) / 2.0;
    let correction = cov.c * cov.c / (2.0 * cov.b);
    let v_ab = match mode {
        MutualInfoMode::Corrected => v_a - correction,
        MutualInfoMode::PaperLiteral => cov.a - correction,
        MutualInfoMode::Snr => {
            return Err(Error::domain(
                "mutual_info",
                "the signal-to-noise model needs the channel; use snr_mutual_information",
            ))
        }
    };
    if !(v_ab > 0.0) {
        return Err(Error::numerical(format!("conditional variance {v_ab} is not positive")));
    }
    Ok(0.5 * (v_a / v_ab).log2())
}

/// `1/2 log2(1 + eta V_M / (2 + eta eps))`.
pub fn snr_mutual_information(eta: f64, v_mod: f64, epsilon: f64) -> f64 {
    0.5 * (1.0 + eta * v_mod / (2.0 + eta * epsilon)).log2()
}

/// Symplectic spectrum of the pre-detection state (`kappa1`, `kappa2`) and of
/// Alice plus the detector ancillas conditioned on Bob's outcome
/// (`kappa3`, `kappa4`), with the invariants that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    pub kappa: [f64; 4],
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoBound {
    pub s_eb: f64,
    pub spectrum: SymplecticSpectrum,
}

/// Roots `(sqrt(x+), sqrt(x-))` of `x^2 - sum x + prod`, with the smaller
/// one taken from the product to avoid cancellation.
fn symplectic_pair(sum: f64, prod: f64, label: &str) -> Result<(f64, f64)> {
    let disc = sum * sum - 4.0 * prod;
    if disc < -DISCRIMINANT_TOLERANCE || disc.is_nan() {
        return Err(Error::numerical(format!("{label} discriminant {disc} is negative")));
    }
    let hi = (0.5 * (sum + disc.max(0.0).sqrt())).sqrt();
    if !(hi > 0.0) {
        return Err(Error::numerical(format!("{label} eigenvalues vanish")));
    }
    let lo = prod.max(0.0).sqrt() / hi;
    Ok((hi, lo))
}

fn spectrum_from_invariants(a: f64, b: f64, c: f64, d: f64) -> Result<HolevoBound> {
    let (k1, k2) = symplectic_pair(a, b, "A^2 - 4B")?;
    let (k3, k4) = symplectic_pair(c, d, "C^2 - 4D")?;
    let kappa = [k1, k2, k3, k4];
    if let Some(k) = kappa.iter().find(|k| **k < 1.0 - KAPPA_TOLERANCE) {
        return Err(Error::numerical(format!("symplectic eigenvalue {k} below 1 (unphysical state)")));
    }
    let g = |k: f64| von_neumann_g(((k - 1.0) / 2.0).max(0.0));
    let s_eb = g(k1)? + g(k2)? - g(k3)? - g(k4)?;
    Ok(HolevoBound {
        s_eb,
        spectrum: SymplecticSpectrum { kappa, a, b, c, d },
    })
}

/// Holevo information `S(E:B)` from the matrix after the channel (before
/// Bob's detector) and the detector noise `chi_hom`.
pub fn holevo_bound(cov_line: &TwoModeCovariance, chi_hom: f64) -> Result<HolevoBound> {
    let TwoModeCovariance { a, b, .. } = *cov_line;
    let big_a = cov_line.delta();
    let big_b = cov_line.sqrt_det().powi(2);
    let root_b = big_b.sqrt();
    let big_c = (big_a * chi_hom + a * root_b + b) / (b + chi_hom);
    let big_d = root_b * (a + root_b * chi_hom) / (b + chi_hom);
    spectrum_from_invariants(big_a, big_b, big_c, big_d)
}

/// Printed invariants `A = V^2 + eta^2 (V + chi_line)^2 - 2 eta Z^2` and
/// `B = eta^2 (V^2 + V chi_line - Z^2)^2` for a symmetric input `(V, V, Z)`.
pub fn printed_ab(v: f64, eta: f64, chi_line: f64, z: f64) -> (f64, f64) {
    let a = v * v + eta * eta * (v + chi_line).powi(2) - 2.0 * eta * z * z;
    let b = eta * eta * (v * v + v * chi_line - z * z).powi(2);
    (a, b)
}

/// Holevo bound with the single-variance substitution `V = X'` in every
/// printed invariant.
pub fn holevo_bound_paper_literal(prepared: &TwoModeCovariance, eta: f64, noise: &NoiseBudget) -> Result<HolevoBound> {
    let v = prepared.a;
    let (big_a, big_b) = printed_ab(v, eta, noise.chi_line, prepared.c);
    let root_b = big_b.sqrt();
    let denom = eta * (v + noise.chi_tot);
    let big_c = (big_a * noise.chi_hom + v * root_b + eta * (v + noise.chi_line)) / denom;
    let big_d = root_b * (v + root_b * noise.chi_hom) / denom;
    spectrum_from_invariants(big_a, big_b, big_c, big_d)
}

/// `K = P [beta zeta I(A:B) - S(E:B)]`.
pub fn asymptotic_key_rate(sc: &Scenario) -> Result<KeyRateResult> {
    let ev = sc.evaluate()?;
    let i_ab = sc.mutual_information_with(&ev, sc.modes.mutual_info)?;
    let hol = match sc.modes.holevo {
        HolevoMode::Generalized => holevo_bound(&ev.propagated, ev.noise.chi_hom)?,
        HolevoMode::PaperLiteral => holevo_bound_paper_literal(&ev.prepared, sc.channel.eta(), &ev.noise)?,
    };
    let rate = ev.probability * (sc.detector.beta * sc.zeta_opt * i_ab - hol.s_eb);

    let mut out = KeyRateResult::new(Regime::Asymptotic, rate, i_ab, hol.s_eb, &sc.modes);
    out.record_common(sc, &ev);
    out.record_spectrum("", &hol.spectrum);
    out.record("i_ab", i_ab);
    out.record("s_eb", hol.s_eb);
    record_information_variants(&mut out, sc, &ev);
    if i_ab < 0.0 {
        out.flag("negative_mutual_information");
    }
    Ok(out)
}

/// Covariance-path and SNR-path informations side by side, so their
/// convention difference is visible in every result.
pub(crate) fn record_information_variants(out: &mut KeyRateResult, sc: &Scenario, ev: &super::Evaluation) {
    if let Ok(i) = mutual_information(&ev.propagated, MutualInfoMode::Corrected) {
        out.record("i_ab_covariance", i);
    }
    out.record(
        "i_ab_snr",
        snr_mutual_information(sc.channel.eta(), sc.protocol.constellation.v_mod(), sc.channel.epsilon()),
    );
}
