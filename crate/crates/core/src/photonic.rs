//! Photonic-cavity kernel.
//!
//! Mode profiles arrive as regular rasters of the field magnitude `|f(r)|`.
//! Integrals use the midpoint rule `Σ g·dV`, reduced through
//! [`exec::sum_indexed`] so the result does not depend on how the grid is
//! partitioned across threads.
//!
//! Mode volume is peak-normalized: `V_eff = 1/max|f|²` for a profile with
//! `Σ|f|²dV = 1`, which is the geometric volume for a uniform field.
//!
//! # Grid text format
//!
//! ```text
//! nx ny nz
//! dx dy dz          # meters
//! a0 a1 a2 ...      # nx·ny·nz amplitudes, x fastest, then y, then z
//! ```
//!
//! Amplitudes may be split across any number of lines. `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{KerrError, Result};
use crate::exec::{self, Execution};
use crate::scaling::{EnergyScale, KernelTag, ProjectionFactor};
use crate::units::{angular_frequency, joules_to_hz, EPSILON_0, HBAR, SPEED_OF_LIGHT};

/// Normalization tolerance for grids that claim to be normalized.
pub const NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub shape: [usize; 3],
    pub spacing: [f64; 3],
    pub amplitude: Vec<f64>,
}

#[derive(Debug, Error, PartialEq)]
#[error("field grid line {line}: {message}")]
pub struct GridParseError {
    pub line: usize,
    pub message: String,
}

impl FieldGrid {
    pub fn new(shape: [usize; 3], spacing: [f64; 3], amplitude: Vec<f64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(KerrError::Shape(format!("grid dimensions must be >= 1, got {shape:?}")));
        }
        if spacing.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(KerrError::domain(format!("grid spacings must be > 0, got {spacing:?}")));
        }
        let len = shape.iter().product::<usize>();
        if amplitude.len() != len {
            return Err(KerrError::Shape(format!(
                "expected {len} amplitudes for shape {shape:?}, got {}",
                amplitude.len()
            )));
        }
        if amplitude.iter().any(|a| !a.is_finite()) {
            return Err(KerrError::domain("grid amplitudes must be finite"));
        }
        Ok(Self {
            shape,
            spacing,
            amplitude,
        })
    }

    /// Samples `f` at cell midpoints of a box `[0, extent)` split into `shape` cells.
    pub fn sample(shape: [usize; 3], extent: [f64; 3], f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        let spacing = [
            extent[0] / shape[0] as f64,
            extent[1] / shape[1] as f64,
            extent[2] / shape[2] as f64,
        ];
        let mut amplitude = Vec::with_capacity(shape.iter().product());
        for k in 0..shape[2] {
            for j in 0..shape[1] {
                for i in 0..shape[0] {
                    amplitude.push(f(
                        (i as f64 + 0.5) * spacing[0],
                        (j as f64 + 0.5) * spacing[1],
                        (k as f64 + 0.5) * spacing[2],
                    ));
                }
            }
        }
        Self::new(shape, spacing, amplitude)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }

    /// `Σ|f|²·dV`.
    pub fn norm_sq(&self, exec: Execution) -> f64 {
        let a = &self.amplitude;
        exec::sum_indexed(a.len(), exec, |i| a[i] * a[i]) * self.cell_volume()
    }

    pub fn is_normalized(&self, exec: Execution) -> bool {
        (self.norm_sq(exec) - 1.0).abs() <= NORM_TOL
    }

    fn same_geometry(&self, other: &FieldGrid) -> bool {
        self.shape == other.shape && self.spacing == other.spacing
    }

    pub fn parse(text: &str) -> std::result::Result<Self, GridParseError> {
        let mut tokens = text.lines().enumerate().flat_map(|(i, line)| {
            let body = line.split('#').next().unwrap_or("");
            body.split_whitespace().map(move |t| (i + 1, t))
        });
        let last_line = text.lines().count().max(1);
        let mut next = |what: &str| {
            tokens.next().ok_or_else(|| GridParseError {
                line: last_line,
                message: format!("unexpected end of file while reading {what}"),
            })
        };

        let mut shape = [0usize; 3];
        for (axis, slot) in ["nx", "ny", "nz"].iter().zip(shape.iter_mut()) {
            let (line, tok) = next(axis)?;
            *slot = tok.parse().map_err(|_| GridParseError {
                line,
                message: format!("{axis} must be a positive integer, got `{tok}`"),
            })?;
            if *slot == 0 {
                return Err(GridParseError {
                    line,
                    message: format!("{axis} must be >= 1"),
                });
            }
        }
        let mut spacing = [0f64; 3];
        for (axis, slot) in ["dx", "dy", "dz"].iter().zip(spacing.iter_mut()) {
            let (line, tok) = next(axis)?;
            *slot = tok.parse().map_err(|_| GridParseError {
                line,
                message: format!("{axis} must be a number, got `{tok}`"),
            })?;
            if !(*slot > 0.0) || !slot.is_finite() {
                return Err(GridParseError {
                    line,
                    message: format!("{axis} must be > 0"),
                });
            }
        }
        let len: usize = shape.iter().product();
        let mut amplitude = Vec::with_capacity(len);
        for idx in 0..len {
            let (line, tok) = next(&format!("amplitude #{idx}"))?;
            let v: f64 = tok.parse().map_err(|_| GridParseError {
                line,
                message: format!("amplitude #{idx} is not a number: `{tok}`"),
            })?;
            if !v.is_finite() {
                return Err(GridParseError {
                    line,
                    message: format!("amplitude #{idx} is not finite"),
                });
            }
            amplitude.push(v);
        }
        if let Some((line, tok)) = tokens.next() {
            return Err(GridParseError {
                line,
                message: format!("trailing data after {len} amplitudes: `{tok}`"),
            });
        }
        Ok(Self {
            shape,
            spacing,
            amplitude,
        })
    }

    pub fn read(path: &Path) -> std::io::Result<std::result::Result<Self, GridParseError>> {
        std::fs::read_to_string(path).map(|s| Self::parse(&s))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let [nx, ny, nz] = self.shape;
        let [dx, dy, dz] = self.spacing;
        let _ = writeln!(out, "{nx} {ny} {nz}");
        let _ = writeln!(out, "{dx:e} {dy:e} {dz:e}");
        for row in self.amplitude.chunks(nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// Rescales the profile so that `Σ|f|²·dV = 1`.
pub fn normalize_grid(g: &FieldGrid, exec: Execution) -> Result<FieldGrid> {
    let norm = g.norm_sq(exec);
    if !(norm > 0.0) {
        return Err(KerrError::domain("cannot normalize an all-zero field"));
    }
    let scale = norm.sqrt().recip();
    let mut out = g.clone();
    out.amplitude.iter_mut().for_each(|a| *a *= scale);
    Ok(out)
}

/// `∫|f_A|²|f_B|² d³r` (m⁻³ for normalized profiles).
pub fn overlap_integral(a: &FieldGrid, b: &FieldGrid, exec: Execution) -> Result<f64> {
    if !a.same_geometry(b) {
        return Err(KerrError::Shape(format!(
            "overlap needs identical grids: {:?}/{:?} vs {:?}/{:?}",
            a.shape, a.spacing, b.shape, b.spacing
        )));
    }
    let (fa, fb) = (&a.amplitude, &b.amplitude);
    let s = exec::sum_indexed(fa.len(), exec, |i| {
        let (x, y) = (fa[i] * fa[i], fb[i] * fb[i]);
        x * y
    });
    Ok(s * a.cell_volume())
}

/// Peak-normalized mode volume `1/max|f|²` of a normalized profile (m³).
pub fn mode_volume(g: &FieldGrid) -> Result<f64> {
    let peak = g.amplitude.iter().fold(0.0f64, |m, a| m.max(a * a));
    if !(peak > 0.0) {
        return Err(KerrError::domain("mode volume of an all-zero field is undefined"));
    }
    Ok(peak.recip())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonicSpec {
    /// Vacuum wavelength λ, m.
    pub wavelength: f64,
    pub n0: f64,
    /// χ⁽³⁾, (m/V)².
    pub chi3: f64,
    /// V_eff, m³.
    pub v_eff: f64,
    /// Reference overlap Γ₀, m⁻³. `None` means `1/V_eff`.
    pub gamma0: Option<f64>,
}

impl PhotonicSpec {
    pub fn new(wavelength: f64, n0: f64, chi3: f64, v_eff: f64, gamma0: Option<f64>) -> Result<Self> {
        let named = [("wavelength", wavelength), ("n0", n0), ("chi3", chi3), ("V_eff", v_eff)];
        for (name, v) in named.into_iter().chain(gamma0.map(|g| ("gamma0", g))) {
            if !(v > 0.0) || !v.is_finite() {
                return Err(KerrError::domain(format!("photonic {name} must be > 0, got {v}")));
            }
        }
        Ok(Self {
            wavelength,
            n0,
            chi3,
            v_eff,
            gamma0,
        })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0.unwrap_or(1.0 / self.v_eff)
    }

    /// Angular frequency `2πc/λ`, rad/s.
    pub fn omega(&self) -> f64 {
        angular_frequency(self.wavelength)
    }
}

/// `η̃ = (λ³/V_eff)·(overlap/Γ₀)`.
pub fn eta_photonic(spec: &PhotonicSpec, overlap: f64) -> ProjectionFactor {
    let value = spec.wavelength.powi(3) / spec.v_eff * (overlap / spec.gamma0());
    ProjectionFactor::new(value, KernelTag::Photonic)
}

/// `E⁽⁴⁾ = 3ħω²χ⁽³⁾/(4ε₀²n₀⁴V_eff)` returned as `E⁽⁴⁾/h`; `omega` in rad/s.
pub fn e4_photonic(spec: &PhotonicSpec, omega: f64) -> Result<EnergyScale> {
    let energy = 3.0 * HBAR * omega * omega * spec.chi3
        / (4.0 * EPSILON_0 * EPSILON_0 * spec.n0.powi(4) * spec.v_eff);
    EnergyScale::hz(joules_to_hz(energy))
}

/// `χ⁽³⁾ = 4n₀²ε₀c·n₂/3` from a Z-scan `n₂` (m²/W).
pub fn chi3_from_n2(n2: f64, n0: f64) -> f64 {
    4.0 * n0 * n0 * EPSILON_0 * SPEED_OF_LIGHT * n2 / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::PLANCK;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const SEQ: Execution = Execution::Sequential;

    fn uniform(shape: [usize; 3], extent: [f64; 3], v: f64) -> FieldGrid {
        FieldGrid::sample(shape, extent, |_, _, _| v).unwrap()
    }

    fn half_cube(n: usize) -> FieldGrid {
        FieldGrid::sample([n, n, n], [1.0; 3], |x, _, _| if x < 0.5 { 2f64.sqrt() } else { 0.0 }).unwrap()
    }

    fn gaussian(n: usize, w: f64, center: [f64; 3]) -> FieldGrid {
        FieldGrid::sample([n, n, n], [1.0; 3], |x, y, z| {
            let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2) + (z - center[2]).powi(2);
            (-r2 / (w * w)).exp()
        })
        .unwrap()
    }

    #[test]
    fn normalize_examples() {
        let g = normalize_grid(&uniform([4, 4, 4], [1.0; 3], 0.3), SEQ).unwrap();
        assert!(g.amplitude.iter().all(|&a| (a - 1.0).abs() < 1e-12));
        let g2 = normalize_grid(&g, SEQ).unwrap();
        for (a, b) in g.amplitude.iter().zip(&g2.amplitude) {
            assert!((a - b).abs() <= 1e-12);
        }
        let g = normalize_grid(&uniform([3, 2, 5], [1.0; 3], 2.0), SEQ).unwrap();
        assert!(g.amplitude.iter().all(|&a| (a - 1.0).abs() < 1e-12));
        assert!(normalize_grid(&uniform([2, 2, 2], [1.0; 3], 0.0), SEQ).is_err());
    }

    #[test]
    fn overlap_examples() {
        let u = uniform([4, 4, 4], [1.0; 3], 1.0);
        assert_relative_eq!(overlap_integral(&u, &u, SEQ).unwrap(), 1.0, max_relative = 1e-12);
        let left = half_cube(4);
        let right = FieldGrid::sample([4, 4, 4], [1.0; 3], |x, _, _| if x > 0.5 { 2f64.sqrt() } else { 0.0 }).unwrap();
        assert_eq!(overlap_integral(&left, &right, SEQ).unwrap(), 0.0);
        assert!(left.is_normalized(SEQ));
        assert_relative_eq!(overlap_integral(&u, &left, SEQ).unwrap(), 1.0, max_relative = 1e-12);
        let other = uniform([4, 4, 2], [1.0; 3], 1.0);
        assert!(matches!(overlap_integral(&u, &other, SEQ), Err(KerrError::Shape(_))));
    }

    #[test]
    fn mode_volume_examples() {
        let g = normalize_grid(&uniform([3, 3, 3], [2.0, 1.0, 0.5], 1.0), SEQ).unwrap();
        assert_relative_eq!(mode_volume(&g).unwrap(), 1.0, max_relative = 1e-12);
        let g = normalize_grid(&uniform([3, 3, 3], [2.0, 3.0, 0.5], 1.0), SEQ).unwrap();
        assert_relative_eq!(mode_volume(&g).unwrap(), 3.0, max_relative = 1e-12);
        assert_relative_eq!(mode_volume(&half_cube(6)).unwrap(), 0.5, max_relative = 1e-12);

        let big = normalize_grid(&gaussian(12, 0.2, [0.5; 3]), SEQ).unwrap();
        let mut small = gaussian(12, 0.2, [0.5; 3]);
        small.spacing = small.spacing.map(|d| d * 0.5);
        let small = normalize_grid(&small, SEQ).unwrap();
        assert_relative_eq!(
            mode_volume(&small).unwrap(),
            mode_volume(&big).unwrap() / 8.0,
            max_relative = 1e-12
        );
        assert!(mode_volume(&uniform([1, 1, 1], [1.0; 3], 0.0)).is_err());
    }

    #[test]
    fn eta_examples() {
        let s = PhotonicSpec::new(1.0e-6, 3.0, 1e-19, 1.0e-18, Some(5.0)).unwrap();
        assert_relative_eq!(eta_photonic(&s, 5.0).value, 1.0, max_relative = 1e-12);
        let half = PhotonicSpec { v_eff: 0.5e-18, ..s };
        assert_relative_eq!(eta_photonic(&half, 5.0).value, 2.0, max_relative = 1e-12);

        // λ = 1.55 µm, V_eff = 0.1 µm³, overlap = 3·10¹⁸ m⁻³, Γ₀ default 10¹⁹ m⁻³
        let s = PhotonicSpec::new(1.55e-6, 3.48, 1e-19, 0.1e-18, None).unwrap();
        let hand = (1.55f64.powi(3) * 1e-18) / 0.1e-18 * (3e18 / 1e19);
        assert_relative_eq!(hand, 11.171625, max_relative = 1e-6);
        assert_relative_eq!(eta_photonic(&s, 3e18).value, hand, max_relative = 1e-12);
        assert_eq!(eta_photonic(&s, 3e18).kernel, KernelTag::Photonic);
        assert!(PhotonicSpec::new(1.0, 0.0, 1.0, 1.0, None).is_err());
    }

    #[test]
    fn e4_examples() {
        let s = PhotonicSpec::new(1.75e-6, 3.3, 1.2e-19, 1e-18, None).unwrap();
        let w = s.omega();
        let zero = PhotonicSpec { chi3: 0.0, ..s };
        assert_eq!(e4_photonic(&zero, w).unwrap().freq_equiv(), 0.0);
        let a = e4_photonic(&s, w).unwrap().freq_equiv();
        let b = e4_photonic(&s, 2.0 * w).unwrap().freq_equiv();
        assert_relative_eq!(b, 4.0 * a, max_relative = 1e-12);

        // hand evaluation, step by step in SI
        let hbar = 1.054_571_817e-34;
        let omega = 2.0 * std::f64::consts::PI * 299_792_458.0 / 1.75e-6;
        let num = 3.0 * hbar * omega * omega * 1.2e-19;
        let den = 4.0 * (8.854_187_812_8e-12f64).powi(2) * 3.3f64.powi(4) * 1e-18;
        let hand = num / den / PLANCK;
        assert_relative_eq!(a, hand, max_relative = 1e-9);
    }

    #[test]
    fn chi3_examples() {
        let gaas = chi3_from_n2(3.1e-18, 3.3);
        assert!(gaas > 1.15e-19 && gaas < 1.25e-19, "{gaas}");
        assert_eq!(chi3_from_n2(0.0, 3.3), 0.0);
        assert_relative_eq!(chi3_from_n2(6.2e-18, 3.3), 2.0 * gaas, max_relative = 1e-12);
        assert_relative_eq!(chi3_from_n2(6.2e-18, 3.3), 2.39e-19, max_relative = 2e-3);
    }

    #[test]
    fn grid_text_round_trip_and_errors() {
        let g = gaussian(3, 0.3, [0.5; 3]);
        let back = FieldGrid::parse(&g.to_text()).unwrap();
        assert_eq!(back, g);

        let err = FieldGrid::parse("2 1 1\n0.1 0.1 0.1\n1.0 abc\n").unwrap_err();
        assert_eq!(err.line, 3);
        let err = FieldGrid::parse("2 1 1\n0.1 -0.1 0.1\n1 1\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = FieldGrid::parse("2 1 1\n0.1 0.1 0.1\n1\n").unwrap_err();
        assert!(err.message.contains("end of file"));
        let err = FieldGrid::parse("1 1 1\n1 1 1\n1\n2\n").unwrap_err();
        assert_eq!(err.line, 4);
        let ok = FieldGrid::parse("# header\n1 1 2\n1 1 1 # spacing\n1\n2\n").unwrap();
        assert_eq!(ok.amplitude, vec![1.0, 2.0]);
    }

    /// Log-log slope of the successive refinement differences of a midpoint
    /// quadrature over resolutions n, 2n, 4n.
    fn refinement_order(q: impl Fn(usize) -> f64, n: usize) -> f64 {
        let (a, b, c) = (q(n), q(2 * n), q(4 * n));
        ((a - b) / (b - c)).abs().log2()
    }

    #[test]
    fn refinement_converges_at_second_order() {
        // wide profiles so the box edge keeps the midpoint error at O(h²)
        let exec = Execution::default();
        let w = 0.4;
        let overlap = |n: usize| {
            let a = normalize_grid(&gaussian(n, w, [0.5; 3]), exec).unwrap();
            let b = normalize_grid(&gaussian(n, 1.3 * w, [0.55, 0.5, 0.45]), exec).unwrap();
            overlap_integral(&a, &b, exec).unwrap()
        };
        let order = refinement_order(overlap, 8);
        assert!(order >= 1.8, "overlap order {order}");

        let veff = |n: usize| {
            let g = normalize_grid(&gaussian(n, w, [0.5; 3]), exec).unwrap();
            mode_volume(&g).unwrap()
        };
        let order = refinement_order(veff, 8);
        assert!(order >= 1.8, "V_eff order {order}");
    }

    #[test]
    fn reductions_match_across_execution_modes() {
        let a = normalize_grid(&gaussian(20, 0.2, [0.5; 3]), Execution::Sequential).unwrap();
        let b = normalize_grid(&gaussian(20, 0.3, [0.4; 3]), Execution::Parallel).unwrap();
        let s = overlap_integral(&a, &b, Execution::Sequential).unwrap();
        let p = overlap_integral(&a, &b, Execution::Parallel).unwrap();
        assert_eq!(s.to_bits(), p.to_bits());
    }

    #[test]
    fn product_scales_as_inverse_veff_squared() {
        let s = PhotonicSpec::new(1.55e-6, 3.0, 1e-19, 1e-18, None).unwrap();
        let w = s.omega();
        let base = eta_photonic(&s, 1.0 / s.v_eff).value * e4_photonic(&s, w).unwrap().freq_equiv();
        let k = 0.37;
        let t = PhotonicSpec { v_eff: k * s.v_eff, ..s };
        let scaled = eta_photonic(&t, 1.0 / t.v_eff).value * e4_photonic(&t, w).unwrap().freq_equiv();
        assert_relative_eq!(scaled, base / (k * k), max_relative = 1e-12);
    }

    fn grid_strategy() -> impl Strategy<Value = (FieldGrid, FieldGrid)> {
        (1usize..5, 1usize..5, 1usize..5).prop_flat_map(|(nx, ny, nz)| {
            let n = nx * ny * nz;
            (
                proptest::collection::vec(0.0f64..3.0, n),
                proptest::collection::vec(0.0f64..3.0, n),
            )
                .prop_map(move |(a, b)| {
                    let shape = [nx, ny, nz];
                    let sp = [0.1, 0.2, 0.3];
                    (FieldGrid::new(shape, sp, a).unwrap(), FieldGrid::new(shape, sp, b).unwrap())
                })
        })
    }

    proptest! {
        #[test]
        fn overlap_symmetric_and_cauchy_schwarz((a, b) in grid_strategy()) {
            prop_assume!(a.norm_sq(SEQ) > 1e-9 && b.norm_sq(SEQ) > 1e-9);
            let a = normalize_grid(&a, SEQ).unwrap();
            let b = normalize_grid(&b, SEQ).unwrap();
            let ab = overlap_integral(&a, &b, SEQ).unwrap();
            prop_assert_eq!(ab, overlap_integral(&b, &a, SEQ).unwrap());
            let aa = overlap_integral(&a, &a, SEQ).unwrap();
            let bb = overlap_integral(&b, &b, SEQ).unwrap();
            prop_assert!(ab * ab <= aa * bb * (1.0 + 1e-10));
        }

        #[test]
        fn normalize_is_idempotent((a, _) in grid_strategy()) {
            prop_assume!(a.norm_sq(SEQ) > 1e-9);
            let once = normalize_grid(&a, SEQ).unwrap();
            prop_assert!((once.norm_sq(SEQ) - 1.0).abs() < 1e-12);
            let twice = normalize_grid(&once, SEQ).unwrap();
            for (x, y) in once.amplitude.iter().zip(&twice.amplitude) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
            }
        }
    }
}
