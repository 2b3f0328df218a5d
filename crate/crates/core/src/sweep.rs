//! Parameter sweeps, optimisation of `mu` and `V_M`, maximum-distance search
//! and the figure datasets.

use rayon::prelude::*;

use crate::channel::{ChannelModel, DetectorModel};
use crate::constellation::ConstellationParams;
use crate::discrimination::{self, DiscriminationConfig, GainPolicy};
use crate::error::{Error, Result};
use crate::keyrate::{
    self, string_enum, ComposableParams, FiniteSizeParams, FormulaModes, KeyRateResult, MutualInfoMode,
    ProtocolParams, Regime, Scenario,
};
use crate::subtraction::{subtraction_success_probability, SubtractionCorrelation, SubtractionParams};

pub const MU_RANGE: (f64, f64) = (0.01, 0.99);
pub const DISTANCE_RANGE_KM: (f64, f64) = (0.0, 600.0);
/// Resolution of the maximum-distance search.
pub const DISTANCE_STEP_KM: f64 = 0.1;
const GOLDEN_ITERATIONS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VmodPolicy {
    Fixed,
    /// Maximise the rate of the scheme itself over `[v_mod_min, v_mod_max]`.
    Optimized,
    /// Use the optimum of the plain four-state protocol at the same point.
    Baseline,
}

string_enum!(VmodPolicy { Fixed => "fixed", Optimized => "optimized", Baseline => "baseline" });

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuPolicy {
    Fixed,
    Optimized,
}

string_enum!(MuPolicy { Fixed => "fixed", Optimized => "optimized" });

/// Protocol variants compared in the distance plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// No subtraction, coherent detection only.
    FourState,
    /// Photon subtraction with the configured correlation, coherent detection only.
    FourStateSubtraction,
    /// Photon subtraction with the Gaussian EPR correlation, coherent detection only.
    GaussianSubtraction,
    /// Photon subtraction plus the state-discrimination receiver.
    Proposed,
}

string_enum!(SchemeKind {
    FourState => "four-state",
    FourStateSubtraction => "four-state-subtraction",
    GaussianSubtraction => "gaussian-subtraction",
    Proposed => "proposed",
});

impl SchemeKind {
    /// Column prefix used in tables.
    pub fn column(&self) -> String {
        self.as_str().replace('-', "_")
    }

    pub fn uses_subtraction(&self) -> bool {
        !matches!(self, SchemeKind::FourState)
    }
}

/// Where the receiver improvement ratio comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZetaSource {
    /// Helstrom-bound ratio at the configured mean photon number.
    Auto,
    Fixed(f64),
}

/// Full parameter record shared by the sweeps and the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub scheme: SchemeKind,
    pub regime: Regime,
    pub v_mod: f64,
    pub v_mod_policy: VmodPolicy,
    pub v_mod_min: f64,
    pub v_mod_max: f64,
    pub v_mod_grid: usize,
    pub mu: f64,
    pub mu_policy: MuPolicy,
    pub mu_grid: usize,
    pub photons: u32,
    pub correlation: SubtractionCorrelation,
    pub distance_km: f64,
    /// Overrides `distance_km` when set.
    pub eta: Option<f64>,
    pub attenuation: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub v_el: f64,
    pub beta: f64,
    pub zeta: ZetaSource,
    pub mean_photon: f64,
    pub modes: FormulaModes,
    pub finite: FiniteSizeParams,
    pub composable: ComposableParams,
    pub rate_threshold: f64,
    pub stages: u32,
    pub trials: u64,
    pub detector_efficiency: f64,
    pub gain: GainPolicy,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::Proposed,
            regime: Regime::Asymptotic,
            v_mod: 2.0,
            v_mod_policy: VmodPolicy::Optimized,
            v_mod_min: 0.01,
            v_mod_max: 10.0,
            v_mod_grid: 40,
            mu: 0.5,
            mu_policy: MuPolicy::Optimized,
            mu_grid: 25,
            photons: 1,
            correlation: SubtractionCorrelation::Gaussian,
            distance_km: 100.0,
            eta: None,
            attenuation: 0.2,
            epsilon: 0.01,
            tau: 0.6,
            v_el: 0.05,
            beta: 0.95,
            zeta: ZetaSource::Auto,
            mean_photon: 1.0,
            modes: FormulaModes::default(),
            finite: FiniteSizeParams::default(),
            composable: ComposableParams {
                n_total: FiniteSizeParams::default().n_total,
                ..ComposableParams::default()
            },
            rate_threshold: 1e-6,
            stages: 10,
            trials: 100_000,
            detector_efficiency: 1.0,
            gain: GainPolicy::Optimized,
        }
    }
}

impl Settings {
    pub fn zeta_opt(&self) -> Result<f64> {
        match self.zeta {
            ZetaSource::Auto => discrimination::zeta_opt(self.mean_photon),
            ZetaSource::Fixed(z) => Ok(z),
        }
    }

    pub fn detector(&self) -> Result<DetectorModel> {
        DetectorModel::new(self.tau, self.v_el, self.beta)
    }

    pub fn channel_at(&self, distance_km: f64) -> Result<ChannelModel> {
        match self.eta {
            Some(eta) => ChannelModel::from_transmittance(eta, self.epsilon),
            None => ChannelModel::from_distance(distance_km, self.attenuation, self.epsilon),
        }
    }

    /// Scenario for `scheme` at one operating point.
    pub fn scenario(&self, scheme: SchemeKind, distance_km: f64, v_mod: f64, mu: f64) -> Result<Scenario> {
        let constellation = ConstellationParams::from_modulation_variance(v_mod)?;
        let sub = || SubtractionParams::new(mu, self.photons);
        let (protocol, zeta_opt) = match scheme {
            SchemeKind::FourState => (ProtocolParams::four_state(constellation), 1.0),
            SchemeKind::FourStateSubtraction => (ProtocolParams::subtracted(constellation, sub()?, self.correlation), 1.0),
            SchemeKind::GaussianSubtraction => (
                ProtocolParams::subtracted(constellation, sub()?, SubtractionCorrelation::Gaussian),
                1.0,
            ),
            SchemeKind::Proposed => (
                ProtocolParams::subtracted(constellation, sub()?, self.correlation),
                self.zeta_opt()?,
            ),
        };
        Ok(Scenario {
            protocol,
            channel: self.channel_at(distance_km)?,
            detector: self.detector()?,
            zeta_opt,
            modes: self.modes,
        })
    }

    pub fn discrimination_config(&self, mean_photon: f64, seed: u64) -> DiscriminationConfig {
        DiscriminationConfig {
            mean_photon,
            stages: self.stages,
            trials: self.trials,
            seed,
            detector_efficiency: self.detector_efficiency,
            gain: self.gain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_mod_min > 0.0 && self.v_mod_min < self.v_mod_max) {
            return Err(Error::domain("v_mod_min", "need 0 < v_mod_min < v_mod_max"));
        }
        if self.v_mod_grid < 3 {
            return Err(Error::domain("v_mod_grid", "at least 3 grid points"));
        }
        if self.mu_grid < 3 {
            return Err(Error::domain("mu_grid", "at least 3 grid points"));
        }
        if !(self.rate_threshold > 0.0) {
            return Err(Error::domain("rate_threshold", "must be positive"));
        }
        self.detector()?;
        self.channel_at(self.distance_km)?;
        ConstellationParams::from_modulation_variance(self.v_mod)?;
        SubtractionParams::new(self.mu, self.photons)?;
        self.finite.validate()?;
        self.composable.validate()?;
        self.discrimination_config(self.mean_photon, 0).validate()?;
        if let ZetaSource::Fixed(z) = self.zeta {
            if !(z.is_finite() && z >= 0.0) {
                return Err(Error::domain("zeta_opt", format!("{z} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn key_rate(&self, sc: &Scenario, regime: Regime) -> Result<KeyRateResult> {
        keyrate::key_rate(sc, regime, &self.finite, &self.composable)
    }
}

/// `points` values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
            .collect(),
    }
}

pub fn logspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    linspace(lo.log10(), hi.log10(), points).into_iter().map(|e| 10f64.powf(e)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Best `(x, value)` pair; ties go to the smaller `x`, so the result does not
/// depend on the order of `points`.
pub fn argmax_points(points: &[(f64, f64)]) -> Option<Maximum> {
    points
        .iter()
        .copied()
        .reduce(|best, p| {
            if p.1 > best.1 || (p.1 == best.1 && p.0 < best.0) {
                p
            } else {
                best
            }
        })
        .map(|(x, value)| Maximum { x, value })
}

/// Infeasible points (numerical-consistency failures) score `-inf`.
fn score(r: Result<f64>) -> Result<f64> {
    match r {
        Ok(v) if v.is_nan() => Ok(f64::NEG_INFINITY),
        Ok(v) => Ok(v),
        Err(Error::Numerical(_)) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// Grid search over `[lo, hi]` followed by golden-section refinement inside
/// the cells adjacent to the best grid point.
pub fn maximize_scalar<F>(f: F, lo: f64, hi: f64, grid_points: usize) -> Result<Maximum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if grid_points < 3 || !(lo < hi) {
        return Err(Error::domain("grid", format!("need lo < hi and >= 3 points, got [{lo}, {hi}] x {grid_points}")));
    }
    let xs = linspace(lo, hi, grid_points);
    let values = xs.par_iter().map(|&x| score(f(x))).collect::<Result<Vec<f64>>>()?;
    let points: Vec<(f64, f64)> = xs.iter().copied().zip(values).collect();
    let best = argmax_points(&points).expect("non-empty grid");
    if best.value == f64::NEG_INFINITY {
        return Ok(best);
    }
    let idx = xs.iter().position(|&x| x == best.x).expect("grid point");
    let (mut a, mut b) = (xs[idx.saturating_sub(1)], xs[(idx + 1).min(xs.len() - 1)]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = score(f(c))?;
    let mut fd = score(f(d))?;
    for _ in 0..GOLDEN_ITERATIONS {
        if (b - a).abs() <= 1e-8 * (hi - lo) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = score(f(c))?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = score(f(d))?;
        }
    }
    let refined = argmax_points(&[(c, fc), (d, fd)]).expect("two points");
    Ok(if refined.value > best.value { refined } else { best })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuOptimum {
    pub mu_star: f64,
    pub rate_star: f64,
    pub feasible: bool,
}

/// Best subtraction transmittance in `[0.01, 0.99]`.
pub fn optimize_mu<F>(rate_at_mu: F, grid_points: usize) -> Result<MuOptimum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let m = maximize_scalar(rate_at_mu, MU_RANGE.0, MU_RANGE.1, grid_points)?;
    Ok(MuOptimum {
        mu_star: m.x,
        rate_star: m.value,
        feasible: m.value > 0.0,
    })
}

/// Optimised operating point and the full result there.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub scheme: SchemeKind,
    pub distance_km: f64,
    pub v_mod: f64,
    /// `None` for schemes without subtraction.
    pub mu: Option<f64>,
    pub result: KeyRateResult,
}

fn rate_at(settings: &Settings, scheme: SchemeKind, distance_km: f64, v_mod: f64, mu: f64, regime: Regime) -> Result<f64> {
    let sc = settings.scenario(scheme, distance_km, v_mod, mu)?;
    Ok(settings.key_rate(&sc, regime)?.rate)
}

fn best_mu(settings: &Settings, scheme: SchemeKind, distance_km: f64, v_mod: f64, regime: Regime) -> Result<(f64, f64)> {
    if !scheme.uses_subtraction() || settings.mu_policy == MuPolicy::Fixed {
        let r = score(rate_at(settings, scheme, distance_km, v_mod, settings.mu, regime))?;
        return Ok((settings.mu, r));
    }
    let m = optimize_mu(|mu| rate_at(settings, scheme, distance_km, v_mod, mu, regime), settings.mu_grid)?;
    Ok((m.mu_star, m.rate_star))
}

fn best_v_mod(settings: &Settings, scheme: SchemeKind, distance_km: f64, regime: Regime) -> Result<f64> {
    match settings.v_mod_policy {
        VmodPolicy::Fixed => Ok(settings.v_mod),
        VmodPolicy::Baseline if scheme != SchemeKind::FourState => {
            let own = Settings {
                v_mod_policy: VmodPolicy::Optimized,
                ..*settings
            };
            best_v_mod(&own, SchemeKind::FourState, distance_km, regime)
        }
        _ => Ok(maximize_scalar(
            |v| Ok(best_mu(settings, scheme, distance_km, v, regime)?.1),
            settings.v_mod_min,
            settings.v_mod_max,
            settings.v_mod_grid,
        )?
        .x),
    }
}

/// Rate of `scheme` at `distance_km` with `V_M` and `mu` chosen per the policies.
pub fn optimal_key_rate(settings: &Settings, scheme: SchemeKind, distance_km: f64, regime: Regime) -> Result<OperatingPoint> {
    let v_mod = best_v_mod(settings, scheme, distance_km, regime)?;
    let (mu, _) = best_mu(settings, scheme, distance_km, v_mod, regime)?;
    let sc = settings.scenario(scheme, distance_km, v_mod, mu)?;
    let result = settings.key_rate(&sc, regime)?;
    Ok(OperatingPoint {
        scheme,
        distance_km,
        v_mod,
        mu: scheme.uses_subtraction().then_some(mu),
        result,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxDistance {
    pub km: f64,
    /// The threshold was not met even at 0 km.
    pub below_threshold_at_origin: bool,
    /// The threshold was still met at the end of the search range.
    pub reached_range_end: bool,
}

/// Largest distance on the 0.1 km grid over `[0, 600]` km whose rate meets
/// `threshold`, by bisection; assumes the rate does not increase with distance.
pub fn max_distance<F>(rate: F, threshold: f64) -> Result<MaxDistance>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(threshold > 0.0) {
        return Err(Error::domain("rate_threshold", format!("{threshold} must be positive")));
    }
    let steps = ((DISTANCE_RANGE_KM.1 - DISTANCE_RANGE_KM.0) / DISTANCE_STEP_KM).round() as u64;
    let km = |k: u64| DISTANCE_RANGE_KM.0 + k as f64 * DISTANCE_STEP_KM;
    let ok = |k: u64| -> Result<bool> { Ok(score(rate(km(k)))? >= threshold) };
    if !ok(0)? {
        return Ok(MaxDistance {
            km: 0.0,
            below_threshold_at_origin: true,
            reached_range_end: false,
        });
    }
    if ok(steps)? {
        return Ok(MaxDistance {
            km: km(steps),
            below_threshold_at_origin: false,
            reached_range_end: true,
        });
    }
    let (mut lo, mut hi) = (0u64, steps);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MaxDistance {
        km: km(lo),
        below_threshold_at_origin: false,
        reached_range_end: false,
    })
}

/// Maximum distance of `scheme` with `V_M` and `mu` optimised at every distance.
pub fn scheme_max_distance(settings: &Settings, scheme: SchemeKind, regime: Regime) -> Result<MaxDistance> {
    max_distance(
        |d| Ok(optimal_key_rate(settings, scheme, d, regime)?.result.rate),
        settings.rate_threshold,
    )
}

/// Columnar table: first column is the x variable, the rest are curves
/// named `<curve>:<metric>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn from_columns(x_name: &str, xs: &[f64], curves: Vec<(String, Vec<f64>)>) -> Self {
        let mut columns = vec![x_name.to_string()];
        columns.extend(curves.iter().map(|(n, _)| n.clone()));
        let rows = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| std::iter::once(x).chain(curves.iter().map(|(_, v)| v[i])).collect())
            .collect();
        Table { columns, rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    DistanceKm,
    VMod,
    Mu,
    NTotal,
    MeanPhoton,
}

string_enum!(SweepVariable {
    DistanceKm => "distance_km",
    VMod => "v_mod",
    Mu => "mu",
    NTotal => "n_total",
    MeanPhoton => "mean_photon",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

string_enum!(Scale { Linear => "linear", Log => "log" });

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.min < self.max) {
            return Err(Error::domain("sweep_min", format!("{} must be below sweep_max {}", self.min, self.max)));
        }
        if self.points < 2 {
            return Err(Error::domain("sweep_points", "at least 2 points"));
        }
        if self.scale == Scale::Log && !(self.min > 0.0) {
            return Err(Error::domain("sweep_min", "log scale needs a positive minimum"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        match self.scale {
            Scale::Linear => linspace(self.min, self.max, self.points),
            Scale::Log => logspace(self.min, self.max, self.points),
        }
    }
}

/// Settings with one swept parameter pinned to `x`.
fn pinned(settings: &Settings, variable: SweepVariable, x: f64) -> (Settings, f64) {
    let mut s = *settings;
    let mut distance = settings.distance_km;
    match variable {
        SweepVariable::DistanceKm => distance = x,
        SweepVariable::VMod => {
            s.v_mod = x;
            s.v_mod_policy = VmodPolicy::Fixed;
        }
        SweepVariable::Mu => {
            s.mu = x;
            s.mu_policy = MuPolicy::Fixed;
        }
        SweepVariable::NTotal => {
            s.finite.n_total = x;
            s.composable.n_total = x;
        }
        SweepVariable::MeanPhoton => s.mean_photon = x,
    }
    (s, distance)
}

fn rate_curves(
    settings: &Settings,
    variable: SweepVariable,
    xs: &[f64],
    curves: &[(String, SchemeKind, Regime, Settings)],
) -> Result<Vec<(String, Vec<f64>)>> {
    let mut out = Vec::new();
    for (name, scheme, regime, curve_settings) in curves {
        let _ = settings;
        let points = xs
            .par_iter()
            .map(|&x| {
                let (s, d) = pinned(curve_settings, variable, x);
                optimal_key_rate(&s, *scheme, d, *regime)
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((format!("{name}:key_rate"), points.iter().map(|p| p.result.rate).collect()));
        if *scheme != SchemeKind::FourState && variable != SweepVariable::Mu {
            out.push((format!("{name}:mu_opt"), points.iter().map(|p| p.mu.unwrap_or(f64::NAN)).collect()));
        }
        if variable != SweepVariable::VMod {
            out.push((format!("{name}:v_mod_opt"), points.iter().map(|p| p.v_mod).collect()));
        }
    }
    Ok(out)
}

/// Error probabilities of the SQL, the adaptive receiver and the Helstrom
/// bound over mean photon numbers.
pub fn discrimination_table(settings: &Settings, xs: &[f64], seed: u64) -> Result<Table> {
    let m = settings.stages;
    let mut sql = Vec::new();
    let mut rec = Vec::new();
    let mut err = Vec::new();
    let mut hel = Vec::new();
    let mut zeta = Vec::new();
    let mut zeta_opt = Vec::new();
    let mut gain = Vec::new();
    for &n in xs {
        let r = discrimination::simulate_adaptive_receiver(&settings.discrimination_config(n, seed))?;
        sql.push(r.p_sql);
        rec.push(r.p_rec);
        err.push(r.p_rec_stderr);
        hel.push(r.p_hel);
        zeta.push(r.zeta);
        zeta_opt.push(r.zeta_opt);
        gain.push(r.displacement_gain);
    }
    let receiver = format!("receiver_m{m}");
    Ok(Table::from_columns(
        "mean_photon",
        xs,
        vec![
            ("sql:error_probability".into(), sql),
            (format!("{receiver}:error_probability"), rec),
            (format!("{receiver}:stderr"), err),
            ("helstrom:error_probability".into(), hel),
            (format!("{receiver}:zeta"), zeta),
            ("helstrom:zeta_opt".into(), zeta_opt),
            (format!("{receiver}:displacement_gain"), gain),
        ],
    ))
}

/// Generic sweep of one variable for the configured scheme and regime.
pub fn run_sweep(spec: &SweepSpec, settings: &Settings, seed: u64) -> Result<Table> {
    spec.validate()?;
    let xs = spec.values();
    if spec.variable == SweepVariable::MeanPhoton {
        return discrimination_table(settings, &xs, seed);
    }
    let name = settings.scheme.column();
    let curves = rate_curves(
        settings,
        spec.variable,
        &xs,
        &[(name, settings.scheme, settings.regime, *settings)],
    )?;
    Ok(Table::from_columns(spec.variable.as_str(), &xs, curves))
}

pub const FIGURE_IDS: [&str; 7] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

fn number_label(v: f64) -> String {
    let s = format!("{v}");
    s.replace('.', "p")
}

/// Dataset behind one of the figures, at the settings' parameters.
pub fn figure_dataset(figure_id: &str, settings: &Settings, seed: u64) -> Result<Table> {
    match figure_id {
        "fig3" => discrimination_table(settings, &linspace(0.1, 5.0, 50), seed),
        "fig4" => {
            let xs = linspace(0.01, 0.99, 99);
            let alpha = (settings.v_mod / 2.0).sqrt();
            let curves = (1..=5)
                .map(|j| {
                    let ys = xs
                        .iter()
                        .map(|&mu| subtraction_success_probability(alpha, &SubtractionParams::new(mu, j)?))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((format!("j{j}:success_probability"), ys))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Table::from_columns("mu", &xs, curves))
        }
        "fig5" | "fig6" => {
            let xs = linspace(0.1, 10.0, 100);
            let mut curves = Vec::new();
            if figure_id == "fig5" {
                for loss_db in [12.0, 16.0, 20.0, 24.0] {
                    let s = Settings {
                        distance_km: loss_db / settings.attenuation,
                        eta: None,
                        ..*settings
                    };
                    let tag = format!("{}db", number_label(loss_db));
                    curves.push((format!("proposed_{tag}"), SchemeKind::Proposed, Regime::Asymptotic, s));
                    curves.push((format!("four_state_{tag}"), SchemeKind::FourState, Regime::Asymptotic, s));
                }
            } else {
                for eps in [0.002, 0.005, 0.008, 0.01] {
                    let s = Settings {
                        distance_km: 100.0,
                        eta: None,
                        epsilon: eps,
                        ..*settings
                    };
                    let tag = format!("eps{}", number_label(eps));
                    curves.push((format!("proposed_{tag}"), SchemeKind::Proposed, Regime::Asymptotic, s));
                    curves.push((format!("four_state_{tag}"), SchemeKind::FourState, Regime::Asymptotic, s));
                }
            }
            let curves = rate_curves(settings, SweepVariable::VMod, &xs, &curves)?;
            Ok(Table::from_columns("v_mod", &xs, curves))
        }
        "fig7" => {
            let xs = linspace(0.0, 400.0, 81);
            let s = Settings { eta: None, ..*settings };
            let curves: Vec<_> = [
                SchemeKind::FourState,
                SchemeKind::GaussianSubtraction,
                SchemeKind::FourStateSubtraction,
                SchemeKind::Proposed,
            ]
            .into_iter()
            .map(|k| (k.column(), k, Regime::Asymptotic, s))
            .collect();
            let curves = rate_curves(settings, SweepVariable::DistanceKm, &xs, &curves)?;
            Ok(Table::from_columns("distance_km", &xs, curves))
        }
        "fig8" => {
            let xs = linspace(0.0, 350.0, 71);
            let mut curves = Vec::new();
            for exp in [8, 10, 12, 14, 15, 16] {
                let mut s = Settings { eta: None, ..*settings };
                s.finite.n_total = 10f64.powi(exp);
                curves.push((format!("n1e{exp}"), SchemeKind::Proposed, Regime::Finite, s));
            }
            curves.push(("asymptotic".to_string(), SchemeKind::Proposed, Regime::Asymptotic, Settings { eta: None, ..*settings }));
            let curves = rate_curves(settings, SweepVariable::DistanceKm, &xs, &curves)?;
            Ok(Table::from_columns("distance_km", &xs, curves))
        }
        "fig9" => {
            let xs = logspace(1e8, 1e16, 33);
            let mut curves = Vec::new();
            for d in [40.0, 80.0, 120.0, 160.0, 260.0, 280.0, 300.0, 320.0] {
                let s = Settings {
                    distance_km: d,
                    eta: None,
                    ..*settings
                };
                let tag = format!("d{}km", number_label(d));
                curves.push((tag.clone(), SchemeKind::Proposed, Regime::Composable, s));
                // dashed reference: asymptotic rate with the same information model
                let mut asym = s;
                asym.modes.mutual_info = settings.modes.composable_mutual_info;
                curves.push((format!("{tag}_asymptotic"), SchemeKind::Proposed, Regime::Asymptotic, asym));
            }
            let curves = rate_curves(settings, SweepVariable::NTotal, &xs, &curves)?;
            Ok(Table::from_columns("n_total", &xs, curves))
        }
        other => Err(Error::Usage(format!(
            "unknown figure `{other}`, expected one of: {}",
            FIGURE_IDS.join(", ")
        ))),
    }
}

/// Same information model for every regime, for like-for-like comparisons.
pub fn matched_modes(modes: FormulaModes, info: MutualInfoMode) -> FormulaModes {
    FormulaModes {
        mutual_info: info,
        composable_mutual_info: info,
        ..modes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> Settings {
        Settings {
            v_mod_grid: 12,
            mu_grid: 9,
            ..Default::default()
        }
    }

    #[test]
    fn linspace_endpoints() {
        let xs = linspace(0.01, 0.99, 99);
        assert_eq!(xs.len(), 99);
        assert_eq!(xs[0], 0.01);
        assert_eq!(xs[98], 0.99);
        let ls = logspace(1e8, 1e16, 33);
        assert!((ls[0] / 1e8 - 1.0).abs() < 1e-12 && (ls[32] / 1e16 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_is_order_independent() {
        let pts = vec![(0.3, 1.0), (0.1, 2.0), (0.7, 2.0), (0.5, -1.0)];
        let mut rev = pts.clone();
        rev.reverse();
        assert_eq!(argmax_points(&pts), argmax_points(&rev));
        assert_eq!(argmax_points(&pts).unwrap().x, 0.1);
    }

    #[test]
    fn maximize_finds_interior_peak() {
        let m = maximize_scalar(|x| Ok(-(x - 0.337).powi(2)), 0.0, 1.0, 11).unwrap();
        assert!((m.x - 0.337).abs() < 1e-6);
    }

    #[test]
    fn maximize_single_feasible_point() {
        let m = maximize_scalar(
            |x| if (x - 0.5).abs() < 1e-12 { Ok(1.0) } else { Err(Error::numerical("infeasible")) },
            0.0,
            1.0,
            5,
        )
        .unwrap();
        assert_eq!((m.x, m.value), (0.5, 1.0));
    }

    #[test]
    fn optimize_mu_beats_dense_grid() {
        let s = fast();
        let rate = |mu: f64| rate_at(&s, SchemeKind::Proposed, 100.0, 2.0, mu, Regime::Asymptotic);
        let opt = optimize_mu(rate, 25).unwrap();
        assert!(opt.mu_star > 0.0 && opt.mu_star < 1.0);
        let grid_max = linspace(0.01, 0.99, 1000)
            .into_iter()
            .map(|mu| rate(mu).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(opt.rate_star >= grid_max - 1e-12);
        let finer = optimize_mu(rate, 49).unwrap();
        assert!(finer.rate_star >= opt.rate_star - 1e-12);
    }

    #[test]
    fn max_distance_matches_linear_scan() {
        for &(edge, thr) in &[(123.45, 1e-3), (0.05, 1e-3), (599.95, 1e-3)] {
            let rate = |d: f64| Ok(if d <= edge { 1.0 } else { 0.0 });
            let got = max_distance(rate, thr).unwrap();
            let scan = (0..=6000u64)
                .map(|k| k as f64 * 0.1)
                .filter(|&d| rate(d).unwrap() >= thr)
                .fold(0.0, f64::max);
            assert!((got.km - scan).abs() < 1e-9, "{edge}: {} vs {scan}", got.km);
        }
        let none = max_distance(|_| Ok(1e-9), 1e-6).unwrap();
        assert!(none.below_threshold_at_origin && none.km == 0.0);
    }

    #[test]
    fn max_distance_agrees_with_scan_on_real_rates() {
        let s = Settings {
            v_mod: 0.5,
            v_mod_policy: VmodPolicy::Fixed,
            mu_policy: MuPolicy::Fixed,
            ..fast()
        };
        for scheme in [SchemeKind::FourState, SchemeKind::Proposed, SchemeKind::FourStateSubtraction] {
            let rate = |d: f64| Ok(optimal_key_rate(&s, scheme, d, Regime::Asymptotic)?.result.rate);
            let got = max_distance(rate, 1e-6).unwrap();
            let k = (got.km / 0.1).round() as u64;
            assert!(!got.below_threshold_at_origin, "{scheme:?}: {:?} {:?}", got, rate(0.0));
            assert!(rate(k as f64 * 0.1).unwrap() >= 1e-6);
            assert!(rate((k + 1) as f64 * 0.1).unwrap() < 1e-6);
        }
    }

    #[test]
    fn fig4_shape() {
        let t = figure_dataset("fig4", &Settings::default(), 1).unwrap();
        assert_eq!(t.columns.len(), 6);
        assert_eq!(t.rows.len(), 99);
        assert!(t.rows.windows(2).all(|w| w[0][0] < w[1][0]));
    }

    #[test]
    fn unknown_figure_is_usage_error() {
        assert!(matches!(figure_dataset("fig2", &Settings::default(), 1), Err(Error::Usage(_))));
    }

    #[test]
    fn sweep_rows_ascending_and_named() {
        let spec = SweepSpec {
            variable: SweepVariable::DistanceKm,
            min: 10.0,
            max: 200.0,
            points: 5,
            scale: Scale::Linear,
        };
        let t = run_sweep(&spec, &fast(), 42).unwrap();
        assert_eq!(t.columns[0], "distance_km");
        assert_eq!(t.columns[1], "proposed:key_rate");
        assert!(t.rows.windows(2).all(|w| w[0][0] < w[1][0]));
    }
}
