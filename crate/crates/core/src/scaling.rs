//! Platform-independent factorization law.
//!
//! A cross-Kerr rate is the product of a dimensionless projection factor and
//! a quartic energy scale, `χ/2π = η̃·E⁽⁴⁾/h`. The self-Kerr rate under the
//! `ħK/2·n(n−1)` convention carries an extra ½. Everything here is a pure
//! function of small `Copy` values.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{KerrError, Result};

/// Relative threshold on `χ/ω` above which the rotating-wave reduction is
/// no longer trusted.
pub const EPS_FREQ: f64 = 0.01;
/// Relative threshold on `χ/Δω` used by the weak-regime test.
pub const EPS_SPACING: f64 = 0.01;

/// An energy written as its frequency equivalent `E/h` (Hz) with a relative
/// uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyScale {
    freq_equiv: f64,
    rel_unc: f64,
}

impl EnergyScale {
    pub fn new(freq_equiv: f64, rel_unc: f64) -> Result<Self> {
        if !freq_equiv.is_finite() || freq_equiv < 0.0 {
            return Err(KerrError::domain(format!(
                "energy scale must be finite and >= 0, got {freq_equiv} Hz"
            )));
        }
        if !rel_unc.is_finite() || rel_unc < 0.0 {
            return Err(KerrError::domain(format!(
                "relative uncertainty must be finite and >= 0, got {rel_unc}"
            )));
        }
        Ok(Self {
            freq_equiv,
            rel_unc,
        })
    }

    /// Exact energy scale with zero uncertainty.
    pub fn hz(freq_equiv: f64) -> Result<Self> {
        Self::new(freq_equiv, 0.0)
    }

    pub fn freq_equiv(&self) -> f64 {
        self.freq_equiv
    }

    pub fn rel_unc(&self) -> f64 {
        self.rel_unc
    }

    pub fn with_rel_unc(self, rel_unc: f64) -> Result<Self> {
        Self::new(self.freq_equiv, rel_unc)
    }

    /// Multiplies the scale by `factor >= 0`, keeping the relative uncertainty.
    pub fn scaled(self, factor: f64) -> Result<Self> {
        Self::new(self.freq_equiv * factor, self.rel_unc)
    }
}

/// Where a projection factor came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelTag {
    Junction,
    Quarton,
    Squid,
    Fluxonium,
    Snail,
    Photonic,
    /// Obtained from a measured rate by `η̃ = χ/(E⁽⁴⁾/h)`.
    Inverted,
    /// Stored constant quoted from an external kernel run.
    PaperKernel,
    Manual,
}

impl fmt::Display for KernelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KernelTag::Junction => "junction",
            KernelTag::Quarton => "quarton",
            KernelTag::Squid => "squid",
            KernelTag::Fluxonium => "fluxonium",
            KernelTag::Snail => "snail",
            KernelTag::Photonic => "photonic",
            KernelTag::Inverted => "inverted",
            KernelTag::PaperKernel => "paper-kernel",
            KernelTag::Manual => "manual",
        };
        f.write_str(s)
    }
}

/// Dimensionless projection factor `η̃`.
///
/// All shipped kernels return nonnegative values; the physical sign of a
/// coupling lives in the [`MonomialCoefficient`]. An inverted factor keeps the
/// sign of the measured rate it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionFactor {
    pub value: f64,
    pub rel_unc: f64,
    pub kernel: KernelTag,
}

impl ProjectionFactor {
    pub fn new(value: f64, kernel: KernelTag) -> Self {
        Self {
            value,
            rel_unc: 0.0,
            kernel,
        }
    }

    pub fn with_rel_unc(mut self, rel_unc: f64) -> Self {
        self.rel_unc = rel_unc;
        self
    }
}

/// Signed coefficient of a quartic monomial in the monomial-coefficient
/// convention, e.g. `c_AABB` in `V = (E⁽⁴⁾/4)·c_AABB·φ_A²φ_B²`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MonomialCoefficient(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Weak,
    Intermediate,
    Strong,
    Unknown,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Weak => "weak",
            Regime::Intermediate => "intermediate",
            Regime::Strong => "strong",
            Regime::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrPrediction {
    /// `χ/2π` in Hz, signed.
    pub chi_over_2pi: f64,
    /// Absolute uncertainty in Hz.
    pub abs_unc: f64,
    pub regime: Regime,
    pub deviation_pct: Option<f64>,
}

impl KerrPrediction {
    pub fn rel_unc(&self) -> f64 {
        if self.chi_over_2pi == 0.0 {
            0.0
        } else {
            self.abs_unc / self.chi_over_2pi.abs()
        }
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    /// Attaches the percent deviation from a measured rate.
    pub fn compared_to(mut self, measured: f64) -> Result<Self> {
        self.deviation_pct = Some(percent_deviation(self.chi_over_2pi, measured)?);
        Ok(self)
    }
}

/// How independent relative uncertainties are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyRule {
    /// First-order linear sum (the default).
    #[default]
    Linear,
    /// Root-sum-square, for sensitivity studies.
    Quadrature,
}

/// Inputs to [`classify_regime`]. All rates in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeInputs {
    pub chi: f64,
    pub omega: f64,
    pub kappa: Option<f64>,
    pub mode_spacing: Option<f64>,
}

impl RegimeInputs {
    pub fn new(chi: f64, omega: f64, kappa: Option<f64>, mode_spacing: Option<f64>) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(KerrError::domain(format!("mode frequency must be > 0, got {omega}")));
        }
        for (name, v) in [("kappa", kappa), ("mode spacing", mode_spacing)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(KerrError::domain(format!("{name} must be > 0, got {v}")));
                }
            }
        }
        if !chi.is_finite() {
            return Err(KerrError::domain("chi must be finite"));
        }
        Ok(Self {
            chi,
            omega,
            kappa,
            mode_spacing,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub freq: f64,
    pub spacing: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            freq: EPS_FREQ,
            spacing: EPS_SPACING,
        }
    }
}

pub fn propagate_uncertainty(rel_e4: f64, rel_eta: f64) -> f64 {
    propagate_uncertainty_with(rel_e4, rel_eta, UncertaintyRule::Linear)
}

pub fn propagate_uncertainty_with(rel_e4: f64, rel_eta: f64, rule: UncertaintyRule) -> f64 {
    match rule {
        UncertaintyRule::Linear => rel_e4 + rel_eta,
        UncertaintyRule::Quadrature => rel_e4.hypot(rel_eta),
    }
}

/// `χ/2π = η̃·E⁽⁴⁾/h` with linearly combined uncertainty.
pub fn predict_cross_kerr(eta: ProjectionFactor, e4: EnergyScale) -> KerrPrediction {
    predict_cross_kerr_with(eta, e4, UncertaintyRule::Linear)
}

pub fn predict_cross_kerr_with(
    eta: ProjectionFactor,
    e4: EnergyScale,
    rule: UncertaintyRule,
) -> KerrPrediction {
    let chi = eta.value * e4.freq_equiv();
    let rel = propagate_uncertainty_with(e4.rel_unc(), eta.rel_unc, rule);
    KerrPrediction {
        chi_over_2pi: chi,
        abs_unc: chi.abs() * rel,
        regime: Regime::Unknown,
        deviation_pct: None,
    }
}

/// Self-Kerr `K/2π = (E⁽⁴⁾/h)·½·c_AAAA·φ_zpf⁴` for
/// `V = (E⁽⁴⁾/4!)·c_AAAA·φ̂⁴` and `H = ħK/2·n(n−1)`.
pub fn predict_self_kerr(c: MonomialCoefficient, phi_zpf: f64, e4: EnergyScale) -> KerrPrediction {
    let k = e4.freq_equiv() * 0.5 * c.0 * phi_zpf.powi(4);
    KerrPrediction {
        chi_over_2pi: k,
        abs_unc: k.abs() * e4.rel_unc(),
        regime: Regime::Unknown,
        deviation_pct: None,
    }
}

/// Converts a fully symmetric ordered-index tensor element `c̄_AABB` to the
/// monomial coefficient; the monomial appears `4!/(2!2!) = 6` times.
pub fn monomial_from_ordered(c_bar: MonomialCoefficient) -> MonomialCoefficient {
    MonomialCoefficient(c_bar.0 / 6.0)
}

/// Recovers `η̃` from a measured rate.
pub fn invert_eta(chi_meas: f64, e4: EnergyScale) -> Result<ProjectionFactor> {
    if e4.freq_equiv() <= 0.0 {
        return Err(KerrError::domain(
            "eta inversion is ill-posed for a zero quartic energy scale",
        ));
    }
    Ok(ProjectionFactor::new(chi_meas / e4.freq_equiv(), KernelTag::Inverted))
}

/// `100·|pred − meas|/|meas|`.
pub fn percent_deviation(pred: f64, meas: f64) -> Result<f64> {
    if meas == 0.0 || !meas.is_finite() {
        return Err(KerrError::domain(format!(
            "percent deviation needs a nonzero finite measurement, got {meas}"
        )));
    }
    Ok(100.0 * (pred - meas).abs() / meas.abs())
}

pub fn classify_regime(inputs: RegimeInputs) -> Regime {
    classify_regime_with(inputs, RegimeThresholds::default())
}

/// Strong if `|χ|/ω >= freq`; weak if some of `κ`, `spacing·Δω` are known and
/// `|χ|` sits below all of the known ones; intermediate otherwise.
pub fn classify_regime_with(inputs: RegimeInputs, th: RegimeThresholds) -> Regime {
    let chi = inputs.chi.abs();
    if chi / inputs.omega >= th.freq {
        return Regime::Strong;
    }
    let bounds: Vec<f64> = inputs
        .kappa
        .into_iter()
        .chain(inputs.mode_spacing.map(|d| th.spacing * d))
        .collect();
    if !bounds.is_empty() && bounds.iter().all(|&b| chi < b) {
        Regime::Weak
    } else {
        Regime::Intermediate
    }
}
