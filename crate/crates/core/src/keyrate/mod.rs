//! Secret key rates in the asymptotic, finite-size and composable regimes.

use std::collections::BTreeMap;

use crate::channel::{noise_budget, propagate, ChannelModel, DetectorModel, NoiseBudget};
use crate::constellation::{epr_covariance, ConstellationParams, TwoModeCovariance};
use crate::error::{Error, Result};
use crate::subtraction::{
    subtracted_covariance, subtraction_success_probability, SubtractionCorrelation, SubtractionParams,
};

pub mod asymptotic;
pub mod composable;
pub mod finite;

pub use asymptotic::{
    asymptotic_key_rate, holevo_bound, holevo_bound_paper_literal, mutual_information, printed_ab,
    snr_mutual_information, von_neumann_g, HolevoBound, SymplecticSpectrum,
};
pub use composable::{
    aep_ent_corrections, composable_key_rate, covariance_confidence_bounds, epsilon_budget, ComposableParams,
};
pub use finite::{finite_size_correction, finite_size_key_rate, worst_case_channel, FiniteSizeParams, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Asymptotic,
    Finite,
    Composable,
}

/// Mutual information between Alice and Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutualInfoMode {
    /// `V_{A|B} = (a+1)/2 - c^2/(2b)`, the heterodyne-conditional variance.
    Corrected,
    /// `V_{A|B} = a - c^2/(2b)` against `V_A = (a+1)/2`.
    PaperLiteral,
    /// `1/2 log2(1 + eta V_M / (2 + eta eps))`.
    Snr,
}

/// Substitution used for the Holevo bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolevoMode {
    /// Exact two-mode formulas on `(a, b, c)`.
    Generalized,
    /// Single variance `V = a` everywhere, including Bob's diagonal.
    PaperLiteral,
}

macro_rules! string_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($ty::$variant => $name),+
                }
            }
        }

        impl ::std::fmt::Display for $ty {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl ::std::str::FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(format!(
                        "unknown value `{other}`, expected one of: {}",
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}
pub(crate) use string_enum;

string_enum!(Regime { Asymptotic => "asymptotic", Finite => "finite", Composable => "composable" });
string_enum!(MutualInfoMode { Corrected => "corrected", PaperLiteral => "paper-literal", Snr => "snr" });
string_enum!(HolevoMode { Generalized => "generalized", PaperLiteral => "paper-literal" });

/// How Alice prepares the two-mode state before it enters the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preparation {
    /// Plain four-state ensemble, no subtraction.
    FourState,
    Subtracted {
        sub: SubtractionParams,
        correlation: SubtractionCorrelation,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub constellation: ConstellationParams,
    pub preparation: Preparation,
}

impl ProtocolParams {
    pub fn four_state(constellation: ConstellationParams) -> Self {
        Self {
            constellation,
            preparation: Preparation::FourState,
        }
    }

    pub fn subtracted(
        constellation: ConstellationParams,
        sub: SubtractionParams,
        correlation: SubtractionCorrelation,
    ) -> Self {
        Self {
            constellation,
            preparation: Preparation::Subtracted { sub, correlation },
        }
    }

    /// Heralding probability; 1 without subtraction.
    pub fn success_probability(&self) -> Result<f64> {
        match &self.preparation {
            Preparation::FourState => Ok(1.0),
            Preparation::Subtracted { sub, .. } => subtraction_success_probability(self.constellation.alpha(), sub),
        }
    }

    /// Covariance matrix `(X', Y', Z')` before the channel.
    pub fn prepared_covariance(&self) -> Result<TwoModeCovariance> {
        match &self.preparation {
            Preparation::FourState => Ok(epr_covariance(&self.constellation)),
            Preparation::Subtracted { sub, correlation } => {
                subtracted_covariance(self.constellation.alpha(), sub, *correlation)
            }
        }
    }

    pub fn with_constellation(&self, constellation: ConstellationParams) -> Self {
        Self { constellation, ..*self }
    }
}

/// Formula variants where the published expressions are ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormulaModes {
    /// Used by the asymptotic and finite-size rates.
    pub mutual_info: MutualInfoMode,
    /// Used by the composable rate.
    pub composable_mutual_info: MutualInfoMode,
    pub holevo: HolevoMode,
    pub noise: NoiseModel,
}

impl Default for FormulaModes {
    fn default() -> Self {
        Self {
            mutual_info: MutualInfoMode::Corrected,
            composable_mutual_info: MutualInfoMode::Snr,
            holevo: HolevoMode::Generalized,
            noise: NoiseModel::Consistent,
        }
    }
}

impl FormulaModes {
    /// Every switch set to the literal reading of the printed formulas.
    pub fn paper_literal() -> Self {
        Self {
            mutual_info: MutualInfoMode::PaperLiteral,
            composable_mutual_info: MutualInfoMode::Snr,
            holevo: HolevoMode::PaperLiteral,
            noise: NoiseModel::PaperLiteral,
        }
    }

    pub fn tags(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("mutual_info".to_string(), self.mutual_info.to_string()),
            ("composable_mutual_info".to_string(), self.composable_mutual_info.to_string()),
            ("holevo".to_string(), self.holevo.to_string()),
            ("noise_model".to_string(), self.noise.to_string()),
        ])
    }
}

/// Everything needed to evaluate a key rate at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub protocol: ProtocolParams,
    pub channel: ChannelModel,
    pub detector: DetectorModel,
    /// Receiver improvement ratio multiplying `beta I(A:B)`.
    pub zeta_opt: f64,
    pub modes: FormulaModes,
}

/// Intermediate quantities shared by all three regimes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Evaluation {
    pub probability: f64,
    pub prepared: TwoModeCovariance,
    pub propagated: TwoModeCovariance,
    pub noise: NoiseBudget,
}

impl Scenario {
    pub(crate) fn evaluate(&self) -> Result<Evaluation> {
        if !(self.zeta_opt.is_finite() && self.zeta_opt >= 0.0) {
            return Err(Error::domain("zeta_opt", format!("{} must be finite and >= 0", self.zeta_opt)));
        }
        let prepared = self.protocol.prepared_covariance()?;
        Ok(Evaluation {
            probability: self.protocol.success_probability()?,
            prepared,
            propagated: propagate(&prepared, &self.channel),
            noise: noise_budget(&self.channel, &self.detector),
        })
    }

    /// Mutual information under `mode` for this scenario.
    pub fn mutual_information(&self, mode: MutualInfoMode) -> Result<f64> {
        let ev = self.evaluate()?;
        self.mutual_information_with(&ev, mode)
    }

    pub(crate) fn mutual_information_with(&self, ev: &Evaluation, mode: MutualInfoMode) -> Result<f64> {
        match mode {
            MutualInfoMode::Snr => Ok(snr_mutual_information(
                self.channel.eta(),
                self.protocol.constellation.v_mod(),
                self.channel.epsilon(),
            )),
            _ => mutual_information(&ev.propagated, mode),
        }
    }

    pub fn with_channel(&self, channel: ChannelModel) -> Self {
        Self { channel, ..*self }
    }
}

/// Key rate together with every intermediate that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateResult {
    pub regime: Regime,
    /// Bits per pulse; negative values are reported as computed.
    pub rate: f64,
    pub i_ab: f64,
    pub s_eb: f64,
    pub feasible: bool,
    pub diagnostics: BTreeMap<String, f64>,
    /// Formula-mode tags.
    pub tags: BTreeMap<String, String>,
    /// Conditions worth surfacing (clamped values, sign anomalies, ...).
    pub flags: Vec<String>,
}

impl KeyRateResult {
    pub(crate) fn new(regime: Regime, rate: f64, i_ab: f64, s_eb: f64, modes: &FormulaModes) -> Self {
        let mut tags = modes.tags();
        tags.insert("regime".to_string(), regime.to_string());
        Self {
            regime,
            rate,
            i_ab,
            s_eb,
            feasible: rate > 0.0,
            diagnostics: BTreeMap::new(),
            tags,
            flags: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.to_string(), value);
    }

    pub(crate) fn record_common(&mut self, sc: &Scenario, ev: &Evaluation) {
        self.record("eta", sc.channel.eta());
        self.record("epsilon", sc.channel.epsilon());
        self.record("v_mod", sc.protocol.constellation.v_mod());
        self.record("beta", sc.detector.beta);
        self.record("zeta_opt", sc.zeta_opt);
        self.record("success_probability", ev.probability);
        self.record("chi_line", ev.noise.chi_line);
        self.record("chi_hom", ev.noise.chi_hom);
        self.record("chi_tot", ev.noise.chi_tot);
        self.record("x_prime", ev.prepared.a);
        self.record("y_prime", ev.prepared.b);
        self.record("z_prime", ev.prepared.c);
        self.record("a", ev.propagated.a);
        self.record("b", ev.propagated.b);
        self.record("c", ev.propagated.c);
        if let Preparation::Subtracted { sub, correlation } = &sc.protocol.preparation {
            self.record("mu", sub.mu());
            self.record("j", sub.photons() as f64);
            self.tags.insert("subtraction_correlation".to_string(), correlation.as_str().to_string());
        }
    }

    pub(crate) fn record_spectrum(&mut self, prefix: &str, s: &SymplecticSpectrum) {
        for (i, k) in s.kappa.iter().enumerate() {
            self.record(&format!("{prefix}kappa{}", i + 1), *k);
        }
        self.record(&format!("{prefix}A"), s.a);
        self.record(&format!("{prefix}B"), s.b);
        self.record(&format!("{prefix}C"), s.c);
        self.record(&format!("{prefix}D"), s.d);
    }

    pub(crate) fn flag(&mut self, flag: impl Into<String>) {
        let flag = flag.into();
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }
}

/// Evaluate the requested regime.
pub fn key_rate(
    sc: &Scenario,
    regime: Regime,
    finite: &FiniteSizeParams,
    composable: &ComposableParams,
) -> Result<KeyRateResult> {
    match regime {
        Regime::Asymptotic => asymptotic_key_rate(sc),
        Regime::Finite => finite_size_key_rate(sc, finite),
        Regime::Composable => composable_key_rate(sc, composable),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enum_strings_round_trip() {
        for r in Regime::ALL {
            assert_eq!(r.as_str().parse::<Regime>().unwrap(), *r);
        }
        for m in MutualInfoMode::ALL {
            assert_eq!(m.as_str().parse::<MutualInfoMode>().unwrap(), *m);
        }
        for m in HolevoMode::ALL {
            assert_eq!(m.as_str().parse::<HolevoMode>().unwrap(), *m);
        }
        assert!("bogus".parse::<Regime>().is_err());
    }

    #[test]
    fn four_state_preparation() {
        let c = ConstellationParams::from_alpha(1.0).unwrap();
        let p = ProtocolParams::four_state(c);
        assert_eq!(p.success_probability().unwrap(), 1.0);
        assert_eq!(p.prepared_covariance().unwrap(), epr_covariance(&c));
    }
}
