//! Epsilon-near-zero kernel: Drude permittivity, the ENZ crossing and the
//! `1/|ε|²`-enhanced quartic energy.
//!
//! Time dependence is `e^{−iωt}`, so `ε(ω) = ε_∞ − ω_p²/(ω² + iγω)` has
//! `Im ε >= 0` for a lossy film.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KerrError, Result};
use crate::exec::{self, Execution};
use crate::scaling::EnergyScale;
use crate::units::{joules_to_hz, EPSILON_0, HBAR};

/// `e4_enz` refuses `|ε|` below this.
pub const SINGULARITY_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrudeParams {
    pub eps_inf: f64,
    /// Plasma frequency, rad/s.
    pub omega_p: f64,
    /// Damping rate, rad/s.
    pub gamma: f64,
}

impl DrudeParams {
    pub fn new(eps_inf: f64, omega_p: f64, gamma: f64) -> Result<Self> {
        if !eps_inf.is_finite() {
            return Err(KerrError::domain("eps_inf must be finite"));
        }
        if !(omega_p > 0.0) || !omega_p.is_finite() {
            return Err(KerrError::domain(format!("omega_p must be > 0, got {omega_p}")));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(KerrError::domain(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(Self {
            eps_inf,
            omega_p,
            gamma,
        })
    }

    /// Lossless crossing `ω_p/√ε_∞ `, when it exists.
    pub fn lossless_enz(&self) -> Option<f64> {
        (self.eps_inf > 0.0).then(|| self.omega_p / self.eps_inf.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnzSpec {
    pub drude: DrudeParams,
    /// Effective χ⁽³⁾, (m/V)².
    pub chi3_eff: f64,
    /// m³.
    pub v_eff: f64,
}

impl EnzSpec {
    pub fn new(drude: DrudeParams, chi3_eff: f64, v_eff: f64) -> Result<Self> {
        if !(chi3_eff >= 0.0) || !chi3_eff.is_finite() {
            return Err(KerrError::domain(format!("chi3_eff must be >= 0, got {chi3_eff}")));
        }
        if !(v_eff > 0.0) || !v_eff.is_finite() {
            return Err(KerrError::domain(format!("V_eff must be > 0, got {v_eff}")));
        }
        Ok(Self {
            drude,
            chi3_eff,
            v_eff,
        })
    }
}

pub fn drude_permittivity(p: &DrudeParams, omega: f64) -> Result<Complex64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(KerrError::domain(format!("omega must be > 0, got {omega}")));
    }
    let denom = Complex64::new(omega * omega, p.gamma * omega);
    Ok(p.eps_inf - p.omega_p * p.omega_p / denom)
}

/// Root of `Re ε(ω)` on `(0, 10ω_p]` by bisection.
///
/// `Re ε = ε_∞ − ω_p²/(ω² + γ²)` is increasing in `ω`, so one sign change
/// means one root.
pub fn find_enz_frequency(p: &DrudeParams) -> Result<f64> {
    let re = |w: f64| p.eps_inf - p.omega_p * p.omega_p / (w * w + p.gamma * p.gamma);
    let mut lo = 1e-9 * p.omega_p;
    let mut hi = 10.0 * p.omega_p;
    let (f_lo, f_hi) = (re(lo), re(hi));
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(KerrError::NoEnzPoint { eps_inf: p.eps_inf });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = re(mid);
        if f == 0.0 {
            return Ok(mid);
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `E⁽⁴⁾ = 3ħω²|χ_eff⁽³⁾|/(4ε₀²|ε(ω)|²V_eff)` as `E⁽⁴⁾/h`.
pub fn e4_enz(spec: &EnzSpec, omega: f64) -> Result<EnergyScale> {
    let eps = drude_permittivity(&spec.drude, omega)?.norm();
    if eps < SINGULARITY_GUARD {
        return Err(KerrError::Singular { abs_eps: eps });
    }
    let energy = 3.0 * HBAR * omega * omega * spec.chi3_eff.abs()
        / (4.0 * EPSILON_0 * EPSILON_0 * eps * eps * spec.v_eff);
    EnergyScale::hz(joules_to_hz(energy))
}

/// `E⁽⁴⁾/h` on a frequency grid, in input order.
pub fn e4_enz_sweep(spec: &EnzSpec, omegas: &[f64], exec: Execution) -> Result<Vec<f64>> {
    exec::map_ordered(omegas, exec, |&w| e4_enz(spec, w).map(|e| e.freq_equiv()))
        .into_iter()
        .collect()
}
