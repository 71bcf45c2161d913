//! Brute-force check of the factorization law.
//!
//! Builds `H/h = Σ ω_μ n̂_μ + Σ_terms (E⁽⁴⁾/h)·c/Πk_μ!·Π [φ_μ(â_μ+â_μ†)]^{k_μ}`
//! in a truncated number basis, diagonalizes it densely and reads Kerr rates
//! off energy double differences. The `1/Πk!` prefactor gives ¼ for an
//! `AABB` term and 1/24 for `AAAA`.
//!
//! Powers of `â+â†` are formed in a basis `k` levels larger than the
//! truncation and then cut, so every retained matrix element is exact.

mod eigen;

use std::collections::BTreeMap;

use serde::Serialize;

pub use eigen::{symmetric_eigen, DenseMatrix, SymmetricEigen};

use crate::error::{KerrError, Result};
use crate::exec::{map_ordered, Execution};
use crate::scaling::{
    predict_cross_kerr, predict_self_kerr, EnergyScale, KernelTag, MonomialCoefficient, ProjectionFactor,
};

/// Largest accepted total Hilbert-space dimension.
pub const MAX_TOTAL_DIM: usize = 10_000;
pub const DEFAULT_DIM: usize = 12;
/// Highest occupation per mode that gets a label, lowered to `dim − 3` for
/// smaller truncations.
pub const DEFAULT_MAX_EXCITATION: usize = 2;
/// Labels below this fidelity mean the bare basis no longer identifies states.
pub const FIDELITY_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockMode {
    /// `ω/2π` in Hz.
    pub omega: f64,
    pub phi_zpf: f64,
}

/// `(E⁽⁴⁾/h)·c/Πk!·Π φ_μ^{k_μ}(â_μ+â_μ†)^{k_μ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarticTerm {
    /// One exponent per mode.
    pub exponents: Vec<u32>,
    pub coefficient: f64,
    pub e4: EnergyScale,
}

impl QuarticTerm {
    pub fn new(exponents: Vec<u32>, coefficient: f64, e4: EnergyScale) -> Self {
        Self {
            exponents,
            coefficient,
            e4,
        }
    }

    fn prefactor(&self) -> f64 {
        self.exponents.iter().map(|&k| factorial(k)).product::<f64>().recip()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FockSystem {
    modes: Vec<FockMode>,
    terms: Vec<QuarticTerm>,
    dim: usize,
    max_excitation: usize,
}

impl FockSystem {
    pub fn new(modes: Vec<FockMode>, terms: Vec<QuarticTerm>, dim: usize) -> Result<Self> {
        let sys = Self {
            modes,
            terms,
            dim,
            max_excitation: DEFAULT_MAX_EXCITATION.min(dim.saturating_sub(3)),
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        self.dim = dim;
        self.validate()?;
        Ok(self)
    }

    /// Sets the highest occupation labeled per mode. Requires `dim ≥ p + 3`.
    pub fn with_max_excitation(mut self, p: usize) -> Result<Self> {
        self.max_excitation = p;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(KerrError::domain("a Fock system needs at least one mode"));
        }
        for m in &self.modes {
            if !(m.omega.is_finite() && m.omega > 0.0) {
                return Err(KerrError::domain(format!("mode frequency must be > 0, got {}", m.omega)));
            }
            if !m.phi_zpf.is_finite() || m.phi_zpf < 0.0 {
                return Err(KerrError::domain(format!("phi_zpf must be >= 0, got {}", m.phi_zpf)));
            }
        }
        for (i, a) in self.modes.iter().enumerate() {
            for b in &self.modes[..i] {
                if a.omega == b.omega {
                    return Err(KerrError::domain(format!("degenerate mode frequencies {} Hz", a.omega)));
                }
            }
        }
        for t in &self.terms {
            if t.exponents.len() != self.modes.len() {
                return Err(KerrError::domain(format!(
                    "term has {} exponents for {} modes",
                    t.exponents.len(),
                    self.modes.len()
                )));
            }
            if !t.coefficient.is_finite() {
                return Err(KerrError::domain("term coefficient must be finite"));
            }
        }
        if self.dim < 4 {
            return Err(KerrError::domain(format!("per-mode dim must be >= 4, got {}", self.dim)));
        }
        if self.dim < self.max_excitation + 3 {
            return Err(KerrError::domain(format!(
                "per-mode dim {} is below max excitation {} + 3",
                self.dim, self.max_excitation
            )));
        }
        let total = total_dim(self.dim, self.modes.len());
        if total > MAX_TOTAL_DIM {
            return Err(KerrError::DimensionOverflow {
                requested: total,
                limit: MAX_TOTAL_DIM,
            });
        }
        Ok(())
    }

    pub fn modes(&self) -> &[FockMode] {
        &self.modes
    }

    pub fn terms(&self) -> &[QuarticTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_excitation(&self) -> usize {
        self.max_excitation
    }

    pub fn total_dim(&self) -> usize {
        total_dim(self.dim, self.modes.len())
    }

    /// `λ* = max_terms (E⁽⁴⁾/h)·Π φ_μ^{k_μ} / min ω`.
    pub fn lambda_star(&self) -> f64 {
        let min_omega = self.modes.iter().map(|m| m.omega).fold(f64::INFINITY, f64::min);
        self.terms
            .iter()
            .map(|t| {
                let phis: f64 = t
                    .exponents
                    .iter()
                    .zip(&self.modes)
                    .map(|(&k, m)| m.phi_zpf.powi(k as i32))
                    .product();
                t.e4.freq_equiv() * phis / min_omega
            })
            .fold(0.0, f64::max)
    }

    fn index_of(&self, label: &[usize]) -> usize {
        label.iter().fold(0, |acc, &n| acc * self.dim + n)
    }
}

fn total_dim(dim: usize, modes: usize) -> usize {
    (0..modes).fold(1usize, |acc, _| acc.saturating_mul(dim))
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `(â+â†)^k` on the first `dim` levels, exact in every kept element.
fn quadrature_power(dim: usize, k: u32) -> Vec<Vec<f64>> {
    let big = dim + k as usize;
    let mut x = vec![vec![0.0; big]; big];
    for n in 0..big - 1 {
        let s = ((n + 1) as f64).sqrt();
        x[n][n + 1] = s;
        x[n + 1][n] = s;
    }
    let mut acc: Vec<Vec<f64>> = (0..big).map(|i| (0..big).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..k {
        let mut next = vec![vec![0.0; big]; big];
        for i in 0..big {
            for (l, &a) in acc[i].iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                // x is tridiagonal
                if l > 0 {
                    next[i][l - 1] += a * x[l][l - 1];
                }
                if l + 1 < big {
                    next[i][l + 1] += a * x[l][l + 1];
                }
            }
        }
        acc = next;
    }
    acc.truncate(dim);
    for row in &mut acc {
        row.truncate(dim);
    }
    acc
}

/// Dense `H/h` in Hz. Basis index is `Σ n_μ·dim^{M−1−μ}` (mode 0 outermost).
pub fn build_hamiltonian(sys: &FockSystem) -> DenseMatrix {
    let d = sys.dim;
    let total = sys.total_dim();
    let mut h = DenseMatrix::zeros(total);

    for idx in 0..total {
        let mut rest = idx;
        let mut diag = 0.0;
        for m in sys.modes.iter().rev() {
            diag += m.omega * (rest % d) as f64;
            rest /= d;
        }
        h.set(idx, idx, diag);
    }

    for term in &sys.terms {
        let scale = term.e4.freq_equiv() * term.coefficient * term.prefactor();
        if scale == 0.0 {
            continue;
        }
        // sparse per-mode factors, then their Kronecker product
        let factors: Vec<Vec<(usize, usize, f64)>> = term
            .exponents
            .iter()
            .zip(&sys.modes)
            .map(|(&k, m)| {
                let op = quadrature_power(d, k);
                let phik = m.phi_zpf.powi(k as i32);
                let mut nz = Vec::new();
                for (i, row) in op.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        if v != 0.0 {
                            nz.push((i, j, v * phik));
                        }
                    }
                }
                nz
            })
            .collect();
        let mut entries = vec![(0usize, 0usize, scale)];
        for nz in &factors {
            let mut next = Vec::with_capacity(entries.len() * nz.len());
            for &(r, c, v) in &entries {
                for &(i, j, w) in nz {
                    next.push((r * d + i, c * d + j, v * w));
                }
            }
            entries = next;
        }
        for (r, c, v) in entries {
            h.add(r, c, v);
        }
    }
    h.symmetrize();
    h
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledSpectrum {
    /// Occupation label → eigenvalue in Hz.
    pub energies: BTreeMap<Vec<usize>, f64>,
    /// Occupation label → squared overlap with its assigned eigenvector.
    pub fidelities: BTreeMap<Vec<usize>, f64>,
    pub dim: usize,
}

impl LabeledSpectrum {
    pub fn energy(&self, label: &[usize]) -> Result<f64> {
        self.energies
            .get(label)
            .copied()
            .ok_or_else(|| KerrError::MissingLabel(label.to_vec()))
    }

    pub fn min_fidelity(&self) -> f64 {
        self.fidelities.values().copied().fold(1.0, f64::min)
    }
}

fn probe_labels(modes: usize, max_n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..modes {
        out = out
            .into_iter()
            .flat_map(|l| {
                (0..=max_n).map(move |n| {
                    let mut l = l.clone();
                    l.push(n);
                    l
                })
            })
            .collect();
    }
    out
}

/// Diagonalizes and assigns each bare label with every `n_μ ≤ max_excitation`
/// to its maximum-overlap eigenvector. Ties go to the lower eigenvalue.
pub fn diagonalize_and_label(sys: &FockSystem) -> Result<LabeledSpectrum> {
    let h = build_hamiltonian(sys);
    let eig = symmetric_eigen(&h)?;
    let mut energies = BTreeMap::new();
    let mut fidelities = BTreeMap::new();
    for label in probe_labels(sys.modes.len(), sys.max_excitation) {
        let col = sys.index_of(&label);
        let mut best = (0usize, -1.0f64);
        for k in 0..eig.values.len() {
            let ov = eig.vector(k)[col].powi(2);
            if ov > best.1 {
                best = (k, ov);
            }
        }
        if best.1 <= FIDELITY_FLOOR {
            return Err(KerrError::StrongMixing {
                label,
                fidelity: best.1,
            });
        }
        energies.insert(label.clone(), eig.values[best.0]);
        fidelities.insert(label, best.1.min(1.0));
    }
    Ok(LabeledSpectrum {
        energies,
        fidelities,
        dim: sys.dim,
    })
}

fn unit_label(modes: usize, excite: &[(usize, usize)]) -> Vec<usize> {
    let mut l = vec![0; modes];
    for &(m, n) in excite {
        l[m] += n;
    }
    l
}

fn label_modes(spec: &LabeledSpectrum) -> usize {
    spec.energies.keys().next().map_or(0, Vec::len)
}

/// `E(1,1) − E(1,0) − E(0,1) + E(0,0)` for modes 0 and 1.
pub fn extract_cross_kerr(spec: &LabeledSpectrum) -> Result<f64> {
    extract_cross_kerr_between(spec, 0, 1)
}

pub fn extract_cross_kerr_between(spec: &LabeledSpectrum, a: usize, b: usize) -> Result<f64> {
    let m = label_modes(spec);
    if a == b || a >= m || b >= m {
        return Err(KerrError::domain(format!("cross-Kerr needs two distinct modes below {m}, got {a} and {b}")));
    }
    let e11 = spec.energy(&unit_label(m, &[(a, 1), (b, 1)]))?;
    let e10 = spec.energy(&unit_label(m, &[(a, 1)]))?;
    let e01 = spec.energy(&unit_label(m, &[(b, 1)]))?;
    let e00 = spec.energy(&unit_label(m, &[]))?;
    Ok((e11 - e10) - (e01 - e00))
}

/// `E(2) − 2E(1) + E(0)` for mode 0, equal to `K/2π`.
pub fn extract_self_kerr(spec: &LabeledSpectrum) -> Result<f64> {
    extract_self_kerr_of(spec, 0)
}

pub fn extract_self_kerr_of(spec: &LabeledSpectrum, mode: usize) -> Result<f64> {
    let m = label_modes(spec);
    if mode >= m {
        return Err(KerrError::domain(format!("mode {mode} out of range for {m} modes")));
    }
    let e2 = spec.energy(&unit_label(m, &[(mode, 2)]))?;
    let e1 = spec.energy(&unit_label(m, &[(mode, 1)]))?;
    let e0 = spec.energy(&unit_label(m, &[]))?;
    Ok((e2 - e1) - (e1 - e0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceConfig {
    /// Relative agreement between successive dims.
    pub tol: f64,
    pub step: usize,
    pub max_raises: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            step: 2,
            max_raises: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Converged {
    pub value: f64,
    /// Per-mode dim of the reported value.
    pub dim: usize,
    pub converged: bool,
}

/// Raises the per-mode dim until two successive extractions agree, the raise
/// budget runs out, or the total-dimension guard would trip.
pub fn converge<F>(sys: &FockSystem, cfg: ConvergenceConfig, extract: F) -> Result<Converged>
where
    F: Fn(&LabeledSpectrum) -> Result<f64>,
{
    let mut current = sys.clone();
    let mut value = extract(&diagonalize_and_label(&current)?)?;
    for _ in 0..cfg.max_raises {
        let next_dim = current.dim + cfg.step.max(1);
        if total_dim(next_dim, current.modes.len()) > MAX_TOTAL_DIM {
            break;
        }
        current = current.with_dim(next_dim)?;
        let next = extract(&diagonalize_and_label(&current)?)?;
        let agree = (next - value).abs() <= cfg.tol * next.abs().max(value.abs());
        value = next;
        if agree {
            return Ok(Converged {
                value,
                dim: current.dim,
                converged: true,
            });
        }
    }
    Ok(Converged {
        value,
        dim: current.dim,
        converged: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RwaReport {
    pub chi_full: f64,
    pub chi_analytic: f64,
    pub rel_dev: f64,
    pub lambda_star: f64,
    pub dim: usize,
    pub converged: bool,
}

fn rel_dev(full: f64, analytic: f64) -> f64 {
    if analytic == 0.0 {
        if full == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (full - analytic).abs() / analytic.abs()
    }
}

fn single_term<'a>(sys: &'a FockSystem, want: &[u32]) -> Result<&'a QuarticTerm> {
    match sys.terms.as_slice() {
        [t] if t.exponents == want => Ok(t),
        _ => Err(KerrError::domain(format!(
            "expected exactly one term with exponents {want:?}"
        ))),
    }
}

fn aabb_analytic(sys: &FockSystem) -> Result<f64> {
    let t = single_term(sys, &[2, 2])?;
    let eta = t.coefficient * sys.modes[0].phi_zpf.powi(2) * sys.modes[1].phi_zpf.powi(2);
    Ok(predict_cross_kerr(ProjectionFactor::new(eta, KernelTag::Manual), t.e4).chi_over_2pi)
}

/// Compares the diagonalized cross-Kerr with `c·φ_A²φ_B²·E⁽⁴⁾/h` at the
/// system's own dim.
pub fn verify_rwa_reduction(sys: &FockSystem) -> Result<RwaReport> {
    let chi_analytic = aabb_analytic(sys)?;
    let chi_full = extract_cross_kerr(&diagonalize_and_label(sys)?)?;
    Ok(RwaReport {
        chi_full,
        chi_analytic,
        rel_dev: rel_dev(chi_full, chi_analytic),
        lambda_star: sys.lambda_star(),
        dim: sys.dim,
        converged: false,
    })
}

/// As [`verify_rwa_reduction`], raising dim until the extraction settles.
pub fn verify_rwa_reduction_converged(sys: &FockSystem, cfg: ConvergenceConfig) -> Result<RwaReport> {
    let chi_analytic = aabb_analytic(sys)?;
    let c = converge(sys, cfg, extract_cross_kerr)?;
    Ok(RwaReport {
        chi_full: c.value,
        chi_analytic,
        rel_dev: rel_dev(c.value, chi_analytic),
        lambda_star: sys.lambda_star(),
        dim: c.dim,
        converged: c.converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfKerrReport {
    pub k_full: f64,
    pub k_analytic: f64,
    pub rel_dev: f64,
    pub lambda_star: f64,
    pub dim: usize,
}

/// Single mode with one `AAAA` term: diagonalized `K/2π` against
/// `½·c·φ⁴·E⁽⁴⁾/h`.
pub fn verify_self_kerr(sys: &FockSystem) -> Result<SelfKerrReport> {
    if sys.modes.len() != 1 {
        return Err(KerrError::domain("self-Kerr check needs a single-mode system"));
    }
    let t = single_term(sys, &[4])?;
    let k_analytic =
        predict_self_kerr(MonomialCoefficient(t.coefficient), sys.modes[0].phi_zpf, t.e4).chi_over_2pi;
    let k_full = extract_self_kerr(&diagonalize_and_label(sys)?)?;
    Ok(SelfKerrReport {
        k_full,
        k_analytic,
        rel_dev: rel_dev(k_full, k_analytic),
        lambda_star: sys.lambda_star(),
        dim: sys.dim,
    })
}

/// Two modes with a single `AABB` term whose `E⁽⁴⁾` is set so that the
/// system's `λ*` equals `lambda_star`.
pub fn aabb_system(
    modes: [FockMode; 2],
    coefficient: f64,
    lambda_star: f64,
    dim: usize,
) -> Result<FockSystem> {
    let phis = modes[0].phi_zpf.powi(2) * modes[1].phi_zpf.powi(2);
    if phis <= 0.0 {
        return Err(KerrError::domain("phi_zpf must be > 0 to fix lambda*"));
    }
    let min_omega = modes[0].omega.min(modes[1].omega);
    let e4 = EnergyScale::hz(lambda_star * min_omega / phis)?;
    FockSystem::new(modes.to_vec(), vec![QuarticTerm::new(vec![2, 2], coefficient, e4)], dim)
}

/// Independent systems run concurrently; output order matches input.
pub fn rwa_sweep(systems: &[FockSystem], exec: Execution) -> Vec<Result<RwaReport>> {
    map_ordered(systems, exec, verify_rwa_reduction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GHZ: f64 = 1e9;

    fn pair(phi: f64) -> [FockMode; 2] {
        [
            FockMode { omega: 5.12 * GHZ, phi_zpf: phi },
            FockMode { omega: 5.38 * GHZ, phi_zpf: phi },
        ]
    }

    #[test]
    fn quadrature_power_matches_normal_ordered_diagonal() {
        // <n|(a+a†)^4|n> = 6n(n-1) + 12n + 3 = 6n² + 6n + 3
        let x4 = quadrature_power(6, 4);
        for (n, row) in x4.iter().enumerate() {
            let n = n as f64;
            assert!((row[n as usize] - (6.0 * n * n + 6.0 * n + 3.0)).abs() < 1e-12);
        }
        // <n|(a+a†)^2|n> = 2n + 1, including the last kept level
        let x2 = quadrature_power(5, 2);
        assert_eq!(x2[4][4], 9.0);
    }

    #[test]
    fn uncoupled_hamiltonian_is_diagonal() {
        let sys = FockSystem::new(pair(0.3).to_vec(), vec![], 4).unwrap();
        let h = build_hamiltonian(&sys);
        for i in 0..16 {
            for j in 0..16 {
                let want = if i == j { 5.12 * GHZ * (i / 4) as f64 + 5.38 * GHZ * (i % 4) as f64 } else { 0.0 };
                assert_eq!(h.get(i, j), want);
            }
        }
        let one = FockSystem::new(vec![FockMode { omega: 3.0, phi_zpf: 0.1 }], vec![], 4).unwrap();
        let h = build_hamiltonian(&one);
        assert_eq!((h.get(0, 0), h.get(1, 1), h.get(0, 1)), (0.0, 3.0, 0.0));
    }

    #[test]
    fn zero_coupling_labels_exactly() {
        let sys = FockSystem::new(pair(0.3).to_vec(), vec![], 8).unwrap();
        let spec = diagonalize_and_label(&sys).unwrap();
        for (label, &e) in &spec.energies {
            assert_eq!(spec.fidelities[label], 1.0);
            assert_eq!(e, 5.12 * GHZ * label[0] as f64 + 5.38 * GHZ * label[1] as f64);
        }
        assert_eq!(extract_cross_kerr(&spec).unwrap(), 0.0);
        assert_eq!(extract_self_kerr(&spec).unwrap(), 0.0);
    }

    #[test]
    fn validation() {
        let m = pair(0.3).to_vec();
        assert!(FockSystem::new(m.clone(), vec![], 3).is_err());
        assert!(FockSystem::new(vec![m[0], m[0]], vec![], 8).is_err());
        assert!(FockSystem::new(vec![FockMode { omega: 0.0, phi_zpf: 0.1 }], vec![], 8).is_err());
        let bad = QuarticTerm::new(vec![4], 1.0, EnergyScale::hz(1.0).unwrap());
        assert!(FockSystem::new(m.clone(), vec![bad], 8).is_err());
        let sys = FockSystem::new(m.clone(), vec![], 5).unwrap();
        assert!(sys.clone().with_max_excitation(3).is_err());
        assert!(matches!(
            FockSystem::new(m, vec![], 101),
            Err(KerrError::DimensionOverflow { requested: 10201, limit: 10_000 })
        ));
    }

    #[test]
    fn missing_labels_are_reported() {
        let sys = FockSystem::new(pair(0.3).to_vec(), vec![], 6).unwrap().with_max_excitation(0).unwrap();
        let spec = diagonalize_and_label(&sys).unwrap();
        assert_eq!(extract_cross_kerr(&spec), Err(KerrError::MissingLabel(vec![1, 1])));
    }

    #[test]
    fn tiny_coupling_keeps_labels_sharp() {
        let sys = aabb_system(pair(0.3), 1.0, 1e-4, 12).unwrap();
        let spec = diagonalize_and_label(&sys).unwrap();
        assert!(spec.min_fidelity() > 0.999, "{}", spec.min_fidelity());
    }

    #[test]
    fn order_one_coupling_is_strong_mixing() {
        let sys = aabb_system(pair(0.3), 1.0, 1.0, 12).unwrap();
        assert!(matches!(diagonalize_and_label(&sys), Err(KerrError::StrongMixing { .. })));
    }

    #[test]
    fn one_khz_target() {
        let modes = pair(0.3);
        let phis = 0.3f64.powi(4);
        let e4 = EnergyScale::hz(1e3 / phis).unwrap();
        let sys = FockSystem::new(modes.to_vec(), vec![QuarticTerm::new(vec![2, 2], 1.0, e4)], 12).unwrap();
        let r = verify_rwa_reduction(&sys).unwrap();
        assert!((r.chi_analytic - 1e3).abs() < 1e-9);
        assert!(r.rel_dev < 0.01, "{r:?}");
        let neg = FockSystem::new(modes.to_vec(), vec![QuarticTerm::new(vec![2, 2], -1.0, e4)], 12).unwrap();
        let chi_neg = verify_rwa_reduction(&neg).unwrap().chi_full;
        assert!((chi_neg + r.chi_full).abs() < 0.01 * r.chi_full.abs());
    }

    #[test]
    fn zero_coefficient_report() {
        let sys = aabb_system(pair(0.3), 0.0, 1e-3, 8).unwrap();
        let r = verify_rwa_reduction(&sys).unwrap();
        assert_eq!((r.chi_full, r.chi_analytic, r.rel_dev), (0.0, 0.0, 0.0));
    }

    #[test]
    fn deviation_is_first_order_in_lambda() {
        let devs: Vec<f64> = [1e-5, 1e-4, 1e-3]
            .iter()
            .map(|&l| verify_rwa_reduction(&aabb_system(pair(0.3), 1.0, l, 12).unwrap()).unwrap().rel_dev)
            .collect();
        for (l, d) in [1e-5f64, 1e-4, 1e-3].iter().zip(&devs) {
            assert!(*d < (10.0 * l).max(1e-8), "lambda {l}: {d}");
        }
        assert!(devs[0] < devs[1] && devs[1] < devs[2]);
        let ratio = devs[2] / devs[1];
        assert!((7.0..13.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn truncation_convergence() {
        let base = aabb_system(pair(0.3), 1.0, 1e-3, 10).unwrap();
        let chis: Vec<f64> = [10, 12, 14]
            .iter()
            .map(|&d| extract_cross_kerr(&diagonalize_and_label(&base.clone().with_dim(d).unwrap()).unwrap()).unwrap())
            .collect();
        for c in &chis[1..] {
            assert!((c - chis[0]).abs() < 1e-9 * chis[0].abs(), "{chis:?}");
        }
        let r = verify_rwa_reduction_converged(&base, ConvergenceConfig::default()).unwrap();
        assert!(r.converged);
    }

    #[test]
    fn self_kerr_truncation_convergence() {
        let phi = 0.3f64;
        let e4 = EnergyScale::hz(1e-3 * 5e9 / phi.powi(4)).unwrap();
        let sys = |d| {
            FockSystem::new(vec![FockMode { omega: 5e9, phi_zpf: phi }], vec![QuarticTerm::new(vec![4], 1.0, e4)], d)
                .unwrap()
        };
        let k12 = extract_self_kerr(&diagonalize_and_label(&sys(12)).unwrap()).unwrap();
        let k16 = extract_self_kerr(&diagonalize_and_label(&sys(16)).unwrap()).unwrap();
        assert!((k12 - k16).abs() < 1e-9 * k16.abs());
    }

    #[test]
    fn linear_shift_cancels() {
        let sys = aabb_system(pair(0.3), 1.0, 1e-3, 12).unwrap();
        let base = extract_cross_kerr(&diagonalize_and_label(&sys).unwrap()).unwrap();
        let eps = 10.0;
        let shifted_modes: Vec<FockMode> =
            sys.modes().iter().map(|m| FockMode { omega: m.omega + eps, ..*m }).collect();
        let shifted = FockSystem::new(shifted_modes, sys.terms().to_vec(), 12).unwrap();
        let moved = extract_cross_kerr(&diagonalize_and_label(&shifted).unwrap()).unwrap();
        assert!((moved - base).abs() < 1e-10 * base.abs(), "{base} {moved}");
    }

    #[test]
    fn self_kerr_is_half_the_cross_formula() {
        let phi = 0.3f64;
        let omega = 5e9;
        let e4 = EnergyScale::hz(1e-3 * omega / phi.powi(4)).unwrap();
        let sys = FockSystem::new(vec![FockMode { omega, phi_zpf: phi }], vec![QuarticTerm::new(vec![4], 1.0, e4)], 12)
            .unwrap();
        let r = verify_self_kerr(&sys).unwrap();
        let cross = predict_cross_kerr(ProjectionFactor::new(phi.powi(4), KernelTag::Manual), e4).chi_over_2pi;
        assert!((r.k_full - 0.5 * cross).abs() < 0.01 * 0.5 * cross, "{r:?}");
        assert!(r.rel_dev < 0.01);
    }

    #[test]
    fn sweep_matches_sequential() {
        let systems: Vec<FockSystem> =
            [1e-5, 1e-4, 1e-3].iter().map(|&l| aabb_system(pair(0.3), 1.0, l, 10).unwrap()).collect();
        let a = rwa_sweep(&systems, Execution::Sequential);
        let b = rwa_sweep(&systems, Execution::Parallel);
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn hamiltonian_is_exactly_symmetric(
            wa in 1.0f64..10.0, wb in 10.5f64..20.0, pa in 0.01f64..0.6, pb in 0.01f64..0.6,
            c in -2.0f64..2.0, e4 in 0.0f64..1e9, ka in 0u32..5, kb in 0u32..5, dim in 5usize..9,
        ) {
            let sys = FockSystem::new(
                vec![FockMode { omega: wa * GHZ, phi_zpf: pa }, FockMode { omega: wb * GHZ, phi_zpf: pb }],
                vec![QuarticTerm::new(vec![ka, kb], c, EnergyScale::hz(e4).unwrap())],
                dim,
            ).unwrap();
            prop_assert_eq!(build_hamiltonian(&sys).asymmetry(), 0.0);
        }
    }
}
