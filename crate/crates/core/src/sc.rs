//! Superconducting-circuit kernels.
//!
//! Josephson elements expand as `−E_J cos φ ≈ −E_J + E_J φ²/2 − E_J φ⁴/24`,
//! so `E⁽⁴⁾ = E_J` and the phase zero-point amplitude in charge
//! normalization is `(2E_C/E_J)^¼`.
//!
//! The SNAIL section evaluates the potential
//! `V(φ)/h = −N·E_J·cos((φ − 2π·Φ)/N) − α·E_J·cos φ`
//! with the external flux `Φ` (units of Φ₀) threaded through the
//! N-junction arm, locates its minimum, and returns closed-form Taylor
//! coefficients there.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{KerrError, Result};
use crate::exec::{self, Execution};
use crate::scaling::{EnergyScale, KernelTag, ProjectionFactor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionParams {
    ej: EnergyScale,
    ec: EnergyScale,
}

impl JunctionParams {
    pub fn new(ej: EnergyScale, ec: EnergyScale) -> Result<Self> {
        if ej.freq_equiv() <= 0.0 || ec.freq_equiv() <= 0.0 {
            return Err(KerrError::domain(format!(
                "junction energies must be > 0 (EJ={} Hz, EC={} Hz)",
                ej.freq_equiv(),
                ec.freq_equiv()
            )));
        }
        Ok(Self { ej, ec })
    }

    /// Exact junction from plain Hz values.
    pub fn from_hz(ej: f64, ec: f64) -> Result<Self> {
        Self::new(EnergyScale::hz(ej)?, EnergyScale::hz(ec)?)
    }

    pub fn ej(&self) -> EnergyScale {
        self.ej
    }

    pub fn ec(&self) -> EnergyScale {
        self.ec
    }
}

/// Phase zero-point amplitude `(2E_C/E_J)^¼`.
pub fn phi_zpf(j: &JunctionParams) -> f64 {
    (2.0 * j.ec.freq_equiv() / j.ej.freq_equiv()).powf(0.25)
}

fn check_participation(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(KerrError::domain(format!("participation {name} = {p} is outside [0, 1]")))
    }
}

/// Single-junction cross-Kerr projection `p_A²·p_B²·φ⁴`.
pub fn eta_junction(p_a: f64, p_b: f64, phi: f64) -> Result<ProjectionFactor> {
    check_participation("p_A", p_a)?;
    check_participation("p_B", p_b)?;
    if !(phi >= 0.0) {
        return Err(KerrError::domain(format!("phi_zpf must be >= 0, got {phi}")));
    }
    let value = (p_a * phi).powi(2) * (p_b * phi).powi(2);
    Ok(ProjectionFactor::new(value, KernelTag::Junction))
}

/// Quarton projection from the projected amplitudes: `φ_A²·φ_B²`.
pub fn eta_quarton(phi_a: f64, phi_b: f64) -> ProjectionFactor {
    ProjectionFactor::new(phi_a.powi(2) * phi_b.powi(2), KernelTag::Quarton)
}

/// Transmon-coupler projection `E_C/(8E_J)`.
pub fn eta_squid(coupler: &JunctionParams) -> ProjectionFactor {
    let value = coupler.ec.freq_equiv() / (8.0 * coupler.ej.freq_equiv());
    ProjectionFactor::new(value, KernelTag::Squid)
}

/// Fluxonium projection `p²·φ⁴`; `φ` may exceed 1 for a heavily shunted loop.
pub fn eta_fluxonium(p: f64, phi: f64) -> ProjectionFactor {
    ProjectionFactor::new(p.powi(2) * phi.powi(4), KernelTag::Fluxonium)
}

/// Relative uncertainty of `φ_zpf⁴ ∝ E_C/E_J` kernels, first order.
pub fn sc_eta_uncertainty(rel_ec: f64, rel_ej: f64) -> f64 {
    0.5 * rel_ec + 0.5 * rel_ej
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnailSpec {
    /// Number of series junctions, `N >= 2`.
    pub junctions: u32,
    /// Shunt-junction energy ratio.
    pub alpha: f64,
    /// Small-junction `E_J/h` in Hz.
    pub ej: f64,
    /// External flux in units of Φ₀.
    pub flux: f64,
}

impl SnailSpec {
    pub fn new(junctions: u32, alpha: f64, ej: f64, flux: f64) -> Result<Self> {
        if junctions < 2 {
            return Err(KerrError::domain(format!("SNAIL needs N >= 2 junctions, got {junctions}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(KerrError::domain(format!("SNAIL alpha must be > 0, got {alpha}")));
        }
        if !(ej > 0.0) || !ej.is_finite() {
            return Err(KerrError::domain(format!("SNAIL EJ must be > 0, got {ej}")));
        }
        if !flux.is_finite() {
            return Err(KerrError::domain("SNAIL flux must be finite"));
        }
        Ok(Self {
            junctions,
            alpha,
            ej,
            flux,
        })
    }

    pub fn with_flux(self, flux: f64) -> Self {
        Self { flux, ..self }
    }

    fn n(&self) -> f64 {
        f64::from(self.junctions)
    }

    /// Period of the potential in φ.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.n()
    }
}

/// Potential minimum and Taylor coefficients of `V/h` there (Hz), i.e. the
/// coefficients of `φ²/2!`, `φ³/3!`, `φ⁴/4!`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnailExpansion {
    pub phi_min: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

pub fn snail_potential(phi: f64, spec: &SnailSpec) -> f64 {
    snail_derivatives(phi, spec)[0]
}

/// `[V, V′, V″, V‴, V⁗]/h` at `phi`, closed form.
pub fn snail_derivatives(phi: f64, spec: &SnailSpec) -> [f64; 5] {
    let n = spec.n();
    let ej = spec.ej;
    let a = spec.alpha;
    let u = (phi - 2.0 * PI * spec.flux) / n;
    let (su, cu) = u.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        -n * ej * cu - a * ej * cp,
        ej * su + a * ej * sp,
        ej * cu / n + a * ej * cp,
        -ej * su / (n * n) - a * ej * sp,
        -ej * cu / (n * n * n) - a * ej * cp,
    ]
}

const MIN_SEEDS: usize = 8;
const BRACKET_STEPS: usize = 256;
const GRADIENT_TOL: f64 = 1e-10;

/// Wraps `phi` into `(−πN, πN]`.
fn wrap(phi: f64, spec: &SnailSpec) -> f64 {
    let p = spec.period();
    let half = 0.5 * p;
    if phi > -half && phi <= half {
        return phi;
    }
    let mut x = (phi + half).rem_euclid(p) - half;
    if x <= -half {
        x += p;
    }
    x
}

/// Descends from `seed` to a bracket `[lo, hi]` with `V′(lo) < 0 < V′(hi)`
/// and polishes the stationary point with safeguarded Newton steps.
fn local_minimum(seed: f64, spec: &SnailSpec) -> Result<f64> {
    let grad = |x: f64| snail_derivatives(x, spec)[1];
    let step = spec.period() / 64.0;
    let g0 = grad(seed);
    if g0 == 0.0 && snail_derivatives(seed, spec)[2] > 0.0 {
        return Ok(seed);
    }
    let (mut lo, mut hi) = (seed, seed);
    let mut found = false;
    for _ in 0..BRACKET_STEPS {
        if g0 > 0.0 {
            lo -= step;
            if grad(lo) < 0.0 {
                found = true;
                break;
            }
            hi = lo;
        } else {
            hi += step;
            if grad(hi) > 0.0 {
                found = true;
                break;
            }
            lo = hi;
        }
    }
    if !found {
        return Err(KerrError::Bracket(format!(
            "no sign change of V' within {BRACKET_STEPS} steps of seed {seed} (flux {})",
            spec.flux
        )));
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let d = snail_derivatives(x, spec);
        let g = d[1];
        if g == 0.0 {
            break;
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - g / d[2];
        let next = if d[2] > 0.0 && newton >= lo && newton <= hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Finds the global minimum over one period by multistart descent.
pub fn snail_minimum(spec: &SnailSpec) -> Result<f64> {
    if spec.flux == 0.0 {
        // every cosine peaks at φ = 0
        return Ok(0.0);
    }
    let half = 0.5 * spec.period();
    let mut best: Option<(f64, f64)> = None;
    for k in 0..MIN_SEEDS {
        let seed = -half + spec.period() * (k as f64 + 0.5) / MIN_SEEDS as f64;
        let x = wrap(local_minimum(seed, spec)?, spec);
        let v = snail_potential(x, spec);
        let better = match best {
            None => true,
            Some((bx, bv)) => {
                let tie = (v - bv).abs() <= 1e-12 * spec.ej;
                (!tie && v < bv) || (tie && x.abs() < bx.abs())
            }
        };
        if better {
            best = Some((x, v));
        }
    }
    let (x, _) = best.expect("at least one seed");
    let g = snail_derivatives(x, spec)[1];
    if g.abs() >= GRADIENT_TOL * spec.ej {
        return Err(KerrError::Bracket(format!(
            "minimum at phi={x} has |V'| = {:e} Hz, above tolerance",
            g.abs()
        )));
    }
    Ok(x)
}

pub fn snail_expansion(spec: &SnailSpec) -> Result<SnailExpansion> {
    let phi_min = snail_minimum(spec)?;
    let d = snail_derivatives(phi_min, spec);
    Ok(SnailExpansion {
        phi_min,
        c2: d[2],
        c3: d[3],
        c4: d[4],
    })
}

/// Expansion at each flux value, in input order.
pub fn snail_flux_sweep(
    spec: &SnailSpec,
    fluxes: &[f64],
    exec: Execution,
) -> Result<Vec<SnailExpansion>> {
    exec::map_ordered(fluxes, exec, |&f| snail_expansion(&spec.with_flux(f)))
        .into_iter()
        .collect()
}

const KERR_FREE_SCAN: usize = 64;
const KERR_FREE_TOL: f64 = 1e-9;

/// External flux in `(0, 0.5)` at which `c4` vanishes.
///
/// Scans `c4` for the first sign change and bisects it until
/// `|c4| < 1e-9·E_J`. Fails with [`KerrError::NoKerrFreePoint`] when `c4`
/// keeps one sign, e.g. for a shunt ratio outside the cancellation window.
pub fn find_kerr_free_flux(junctions: u32, alpha: f64, ej: f64) -> Result<f64> {
    let spec = SnailSpec::new(junctions, alpha, ej, 0.0)?;
    let c4 = |f: f64| snail_expansion(&spec.with_flux(f)).map(|e| e.c4);

    let mut lo = 0.0;
    let mut c_lo = c4(lo)?;
    if c_lo == 0.0 {
        return Ok(lo);
    }
    let mut bracket = None;
    for k in 1..=KERR_FREE_SCAN {
        let f = 0.5 * k as f64 / KERR_FREE_SCAN as f64;
        let c = c4(f)?;
        if c == 0.0 || c.signum() != c_lo.signum() {
            bracket = Some((lo, f, c_lo));
            break;
        }
        lo = f;
        c_lo = c;
    }
    let Some((mut a, mut b, c_a)) = bracket else {
        return Err(KerrError::NoKerrFreePoint {
            junctions,
            alpha,
            sign: c_lo.signum(),
        });
    };

    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let c = c4(mid)?;
        if c == 0.0 || (c.abs() < 1e-3 * KERR_FREE_TOL * ej) || b - a < 1e-16 {
            break;
        }
        if c.signum() == c_a.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    let residual = c4(mid)?;
    if residual.abs() >= KERR_FREE_TOL * ej {
        return Err(KerrError::Bracket(format!(
            "bisection stalled at flux {mid} with |c4| = {:e} Hz",
            residual.abs()
        )));
    }
    Ok(mid)
}
