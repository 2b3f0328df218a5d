//! Flat `key = value` configuration format.
//!
//! Every key has a default, so an empty file is a complete configuration.
//! `alpha` is accepted as an alternative to `v_mod` (`v_mod = 2 alpha^2`) but
//! only `v_mod` is rendered.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::str::FromStr;

use crate::discrimination::GainPolicy;
use crate::error::{Error, Result};
use crate::keyrate::FormulaModes;
use crate::sweep::{MuPolicy, Scale, Settings, SweepSpec, SweepVariable, VmodPolicy, ZetaSource};

/// Keys in render order.
pub const KEYS: &[&str] = &[
    "scheme",
    "regime",
    "v_mod",
    "v_mod_policy",
    "v_mod_min",
    "v_mod_max",
    "v_mod_grid",
    "mu",
    "mu_policy",
    "mu_grid",
    "j",
    "correlation",
    "distance_km",
    "eta",
    "attenuation",
    "epsilon",
    "tau",
    "v_el",
    "beta",
    "zeta_opt",
    "mean_photon",
    "stages",
    "trials",
    "detector_efficiency",
    "displacement_gain",
    "mutual_info",
    "composable_mutual_info",
    "holevo",
    "noise_model",
    "rate_threshold",
    "n_total",
    "key_fraction",
    "eps_pe",
    "eps_pa",
    "eps_bar",
    "comp_eps",
    "comp_eps_sm",
    "comp_eps_bar",
    "comp_eps_pe",
    "comp_eps_cor",
    "comp_eps_ent",
    "eps_rob",
    "d_bits",
    "n_pe_bits",
    "sweep_variable",
    "sweep_min",
    "sweep_max",
    "sweep_points",
    "sweep_scale",
];

const MODE_KEYS: [&str; 4] = ["mutual_info", "composable_mutual_info", "holevo", "noise_model"];

/// Parsed configuration plus the set of keys given explicitly.
#[derive(Debug, Clone)]
pub struct Config {
    pub settings: Settings,
    pub sweep: SweepSpec,
    explicit: BTreeSet<String>,
}

impl PartialEq for Config {
    fn eq(&self, other: &Self) -> bool {
        self.settings == other.settings && self.sweep == other.sweep
    }
}

impl Default for Config {
    fn default() -> Self {
        Self {
            settings: Settings::default(),
            sweep: SweepSpec {
                variable: SweepVariable::DistanceKm,
                min: 0.0,
                max: 400.0,
                points: 41,
                scale: Scale::Linear,
            },
            explicit: BTreeSet::new(),
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse `{value}`: {e}")))
}

fn real(key: &str, value: &str) -> Result<f64> {
    let v: f64 = num(key, value)?;
    if !v.is_finite() {
        return Err(Error::config(key, format!("`{value}` is not a finite number")));
    }
    Ok(v)
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let v = real(key, value)?;
    if v <= 0.0 {
        return Err(Error::config(key, format!("{v} must be positive")));
    }
    Ok(v)
}

fn word<T: FromStr<Err = String>>(key: &str, value: &str) -> Result<T> {
    value.parse::<T>().map_err(|e| Error::config(key, e))
}

impl Config {
    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    /// Parse the text format; unknown keys and bad values name the key.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), lineno + 1) {
                return Err(Error::config(key, format!("given twice (lines {prev} and {})", lineno + 1)));
            }
            cfg.set(key, value)?;
        }
        if cfg.is_explicit("alpha") && cfg.is_explicit("v_mod") {
            return Err(Error::config("alpha", "give either `alpha` or `v_mod`, not both"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.settings;
        match key {
            "scheme" => s.scheme = word(key, value)?,
            "regime" => s.regime = word(key, value)?,
            "v_mod" => s.v_mod = positive(key, value)?,
            "alpha" => {
                let a = positive(key, value)?;
                s.v_mod = 2.0 * a * a;
            }
            "v_mod_policy" => s.v_mod_policy = word(key, value)?,
            "v_mod_min" => s.v_mod_min = positive(key, value)?,
            "v_mod_max" => s.v_mod_max = positive(key, value)?,
            "v_mod_grid" => s.v_mod_grid = num(key, value)?,
            "mu" => s.mu = real(key, value)?,
            "mu_policy" => s.mu_policy = word(key, value)?,
            "mu_grid" => s.mu_grid = num(key, value)?,
            "j" => s.photons = num(key, value)?,
            "correlation" => s.correlation = word(key, value)?,
            "distance_km" => s.distance_km = real(key, value)?,
            "eta" => {
                s.eta = match value {
                    "none" => None,
                    v => Some(real(key, v)?),
                }
            }
            "attenuation" => s.attenuation = real(key, value)?,
            "epsilon" => s.epsilon = real(key, value)?,
            "tau" => s.tau = real(key, value)?,
            "v_el" => s.v_el = real(key, value)?,
            "beta" => s.beta = real(key, value)?,
            "zeta_opt" => {
                s.zeta = match value {
                    "auto" => ZetaSource::Auto,
                    v => ZetaSource::Fixed(real(key, v)?),
                }
            }
            "mean_photon" => s.mean_photon = real(key, value)?,
            "stages" => s.stages = num(key, value)?,
            "trials" => s.trials = num(key, value)?,
            "detector_efficiency" => s.detector_efficiency = real(key, value)?,
            "displacement_gain" => {
                s.gain = match value {
                    "optimized" => GainPolicy::Optimized,
                    v => GainPolicy::Fixed(real(key, v)?),
                }
            }
            "mutual_info" => s.modes.mutual_info = word(key, value)?,
            "composable_mutual_info" => s.modes.composable_mutual_info = word(key, value)?,
            "holevo" => s.modes.holevo = word(key, value)?,
            "noise_model" => s.modes.noise = word(key, value)?,
            "rate_threshold" => s.rate_threshold = real(key, value)?,
            "n_total" => {
                let n = real(key, value)?;
                s.finite.n_total = n;
                s.composable.n_total = n;
            }
            "key_fraction" => s.finite.key_fraction = real(key, value)?,
            "eps_pe" => s.finite.eps_pe = real(key, value)?,
            "eps_pa" => s.finite.eps_pa = real(key, value)?,
            "eps_bar" => s.finite.eps_bar = real(key, value)?,
            "comp_eps" => s.composable.eps = real(key, value)?,
            "comp_eps_sm" => s.composable.eps_sm = real(key, value)?,
            "comp_eps_bar" => s.composable.eps_bar = real(key, value)?,
            "comp_eps_pe" => s.composable.eps_pe = real(key, value)?,
            "comp_eps_cor" => s.composable.eps_cor = real(key, value)?,
            "comp_eps_ent" => s.composable.eps_ent = real(key, value)?,
            "eps_rob" => s.composable.eps_rob = real(key, value)?,
            "d_bits" => s.composable.d_bits = num(key, value)?,
            "n_pe_bits" => s.composable.n_pe_bits = real(key, value)?,
            "sweep_variable" => self.sweep.variable = word(key, value)?,
            "sweep_min" => self.sweep.min = real(key, value)?,
            "sweep_max" => self.sweep.max = real(key, value)?,
            "sweep_points" => self.sweep.points = num(key, value)?,
            "sweep_scale" => self.sweep.scale = word(key, value)?,
            other => return Err(Error::config(other, "unknown key")),
        }
        self.explicit.insert(key.to_string());
        Ok(())
    }

    /// Text that parses back to an equal record.
    pub fn render(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Every parameter as `(key, value)` strings, in `KEYS` order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let s = &self.settings;
        let f = |v: f64| format!("{v:?}");
        KEYS.iter()
            .map(|&k| {
                let v = match k {
                    "scheme" => s.scheme.to_string(),
                    "regime" => s.regime.to_string(),
                    "v_mod" => f(s.v_mod),
                    "v_mod_policy" => s.v_mod_policy.to_string(),
                    "v_mod_min" => f(s.v_mod_min),
                    "v_mod_max" => f(s.v_mod_max),
                    "v_mod_grid" => s.v_mod_grid.to_string(),
                    "mu" => f(s.mu),
                    "mu_policy" => s.mu_policy.to_string(),
                    "mu_grid" => s.mu_grid.to_string(),
                    "j" => s.photons.to_string(),
                    "correlation" => s.correlation.to_string(),
                    "distance_km" => f(s.distance_km),
                    "eta" => s.eta.map_or("none".to_string(), f),
                    "attenuation" => f(s.attenuation),
                    "epsilon" => f(s.epsilon),
                    "tau" => f(s.tau),
                    "v_el" => f(s.v_el),
                    "beta" => f(s.beta),
                    "zeta_opt" => match s.zeta {
                        ZetaSource::Auto => "auto".to_string(),
                        ZetaSource::Fixed(z) => f(z),
                    },
                    "mean_photon" => f(s.mean_photon),
                    "stages" => s.stages.to_string(),
                    "trials" => s.trials.to_string(),
                    "detector_efficiency" => f(s.detector_efficiency),
                    "displacement_gain" => match s.gain {
                        GainPolicy::Optimized => "optimized".to_string(),
                        GainPolicy::Fixed(g) => f(g),
                    },
                    "mutual_info" => s.modes.mutual_info.to_string(),
                    "composable_mutual_info" => s.modes.composable_mutual_info.to_string(),
                    "holevo" => s.modes.holevo.to_string(),
                    "noise_model" => s.modes.noise.to_string(),
                    "rate_threshold" => f(s.rate_threshold),
                    "n_total" => f(s.finite.n_total),
                    "key_fraction" => f(s.finite.key_fraction),
                    "eps_pe" => f(s.finite.eps_pe),
                    "eps_pa" => f(s.finite.eps_pa),
                    "eps_bar" => f(s.finite.eps_bar),
                    "comp_eps" => f(s.composable.eps),
                    "comp_eps_sm" => f(s.composable.eps_sm),
                    "comp_eps_bar" => f(s.composable.eps_bar),
                    "comp_eps_pe" => f(s.composable.eps_pe),
                    "comp_eps_cor" => f(s.composable.eps_cor),
                    "comp_eps_ent" => f(s.composable.eps_ent),
                    "eps_rob" => f(s.composable.eps_rob),
                    "d_bits" => s.composable.d_bits.to_string(),
                    "n_pe_bits" => f(s.composable.n_pe_bits),
                    "sweep_variable" => self.sweep.variable.to_string(),
                    "sweep_min" => f(self.sweep.min),
                    "sweep_max" => f(self.sweep.max),
                    "sweep_points" => self.sweep.points.to_string(),
                    "sweep_scale" => self.sweep.scale.to_string(),
                    _ => unreachable!("every key is rendered"),
                };
                (k, v)
            })
            .collect()
    }

    /// Apply a formula-mode preset to the mode keys the file left unset.
    pub fn apply_mode_preset(&mut self, preset: FormulaModes) {
        let m = &mut self.settings.modes;
        for key in MODE_KEYS {
            if self.explicit.contains(key) {
                continue;
            }
            match key {
                "mutual_info" => m.mutual_info = preset.mutual_info,
                "composable_mutual_info" => m.composable_mutual_info = preset.composable_mutual_info,
                "holevo" => m.holevo = preset.holevo,
                _ => m.noise = preset.noise,
            }
        }
    }

    /// An explicitly given operating point is used as is unless a policy
    /// asks for optimisation.
    pub fn effective_settings(&self) -> Settings {
        let mut s = self.settings;
        if (self.is_explicit("v_mod") || self.is_explicit("alpha")) && !self.is_explicit("v_mod_policy") {
            s.v_mod_policy = VmodPolicy::Fixed;
        }
        if self.is_explicit("mu") && !self.is_explicit("mu_policy") {
            s.mu_policy = MuPolicy::Fixed;
        }
        s
    }

    /// The swept variable may not also be pinned in the file.
    pub fn check_sweep(&self) -> Result<()> {
        let pinned = match self.sweep.variable {
            SweepVariable::VMod => self.is_explicit("v_mod") || self.is_explicit("alpha"),
            v => self.is_explicit(v.as_str()),
        };
        if pinned {
            let key = self.sweep.variable.as_str();
            return Err(Error::config(key, "is swept and cannot also be fixed"));
        }
        self.sweep.validate().map_err(to_config)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.settings;
        s.finite.validate().map_err(to_config)?;
        s.composable.validate().map_err(|e| match e {
            Error::Domain { name, detail } if !matches!(name, "eps_rob" | "n_total" | "n_pe_bits" | "d_bits") => {
                Error::config(format!("comp_{name}"), detail)
            }
            other => to_config(other),
        })?;
        if self.is_explicit("alpha") {
            // alpha errors are reported against the key the user wrote
            crate::constellation::ConstellationParams::from_modulation_variance(s.v_mod)
                .map_err(|e| Error::config("alpha", e.to_string()))?;
        }
        s.validate().map_err(|e| match e {
            Error::Domain { name: "alpha", detail } => Error::config("v_mod", detail),
            Error::Domain { name: "grid", detail } => Error::config("v_mod_grid", detail),
            other => to_config(other),
        })
    }
}

/// Domain errors become configuration errors naming the offending key.
fn to_config(e: Error) -> Error {
    match e {
        Error::Domain { name, detail } => Error::config(name, detail),
        other => other,
    }
}
