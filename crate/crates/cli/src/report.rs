//! Device file → prediction report.
//!
//! Each platform emits a fixed list of quantities: the schema keys echoed
//! with their provenance, then the platform's intermediate values, then a
//! common tail (energy scale, projection factors, rate, deviation, regime).
//! Absent optional values stay in the list as [`Cell::Missing`] so that
//! sweeps of one platform always share a column set.

use std::f64::consts::TAU;

use kerrlaw::enz::{drude_permittivity, e4_enz, find_enz_frequency, DrudeParams, EnzSpec};
use kerrlaw::exec::Execution;
use kerrlaw::photonic::{
    chi3_from_n2, e4_photonic, eta_photonic, mode_volume, normalize_grid, overlap_integral, FieldGrid,
    PhotonicSpec,
};
use kerrlaw::sc::{
    eta_fluxonium, eta_junction, eta_squid, find_kerr_free_flux, phi_zpf, sc_eta_uncertainty, snail_expansion,
    JunctionParams, SnailSpec,
};
use kerrlaw::scaling::{classify_regime, percent_deviation, predict_cross_kerr, RegimeInputs};
use kerrlaw::units::SPEED_OF_LIGHT;
use kerrlaw::{EnergyScale, KerrPrediction, KernelTag, ProjectionFactor, Regime};
use serde::Serialize;

use crate::device::{schema, DeviceFile, Platform, Provenance, Value};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: Cell,
    pub unit: &'static str,
    pub provenance: Provenance,
}

fn q(name: &str, value: Option<f64>, unit: &'static str, provenance: Provenance) -> Quantity {
    Quantity {
        name: name.to_owned(),
        value: value.map_or(Cell::Missing, Cell::Num),
        unit,
        provenance,
    }
}

fn computed(name: &str, value: Option<f64>, unit: &'static str) -> Quantity {
    q(name, value, unit, Provenance::Computed)
}

fn text(name: &str, value: &str, provenance: Provenance) -> Quantity {
    Quantity {
        name: name.to_owned(),
        value: Cell::Text(value.to_owned()),
        unit: "",
        provenance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KerrKind {
    Cross,
    /// `K/2π` under the `ħK/2·n(n−1)` convention, i.e. half the cross form.
    SelfKerr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub label: String,
    pub platform: Platform,
    pub kind: KerrKind,
    pub inputs: Vec<Quantity>,
    pub derived: Vec<Quantity>,
    pub prediction: KerrPrediction,
}

impl PredictionReport {
    pub fn rows(&self) -> impl Iterator<Item = &Quantity> {
        self.inputs.iter().chain(&self.derived)
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.rows().find(|r| r.name == name).map(|r| &r.value)
    }

    pub fn num(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(Cell::num)
    }
}

/// What a platform chain hands to the common tail.
struct Stage {
    head: Vec<Quantity>,
    eta_analytic: Option<ProjectionFactor>,
    e4: f64,
    e4_provenance: Provenance,
    default_rel_e4: f64,
    default_rel_eta: f64,
    /// Mode frequency for the regime test, Hz.
    omega: Option<f64>,
    mode_spacing: Option<f64>,
    kind: KerrKind,
}

fn need(dev: &DeviceFile, key: &str) -> Result<f64> {
    dev.num(key).ok_or_else(|| missing(dev, key))
}

fn missing(dev: &DeviceFile, key: &str) -> CliError {
    CliError::Parse(crate::device::ParseError {
        path: dev.path.clone(),
        line: None,
        key: Some(key.to_owned()),
        message: format!("missing required key for platform {}", dev.platform),
    })
}

fn kernel<T>(dev: &DeviceFile, r: kerrlaw::Result<T>) -> Result<T> {
    r.map_err(|e| CliError::kernel(format!("{} ({})", dev.label(), dev.platform), e))
}

fn sc_uncertainties(dev: &DeviceFile) -> (f64, f64) {
    let rel_ej = dev.num("rel_unc_EJ").unwrap_or(0.0);
    let rel_ec = dev.num("rel_unc_EC").unwrap_or(0.0);
    (rel_ej, sc_eta_uncertainty(rel_ec, rel_ej))
}

fn junction(dev: &DeviceFile) -> Result<JunctionParams> {
    kernel(dev, JunctionParams::from_hz(need(dev, "EJ")?, need(dev, "EC")?))
}

fn quarton(dev: &DeviceFile) -> Result<Stage> {
    let j = junction(dev)?;
    let phi = phi_zpf(&j);
    let eta = kernel(dev, eta_junction(need(dev, "p_A")?, need(dev, "p_B")?, phi))?;
    let (wa, wb) = (need(dev, "omega_A")?, need(dev, "omega_B")?);
    let (rel_e4, rel_eta) = sc_uncertainties(dev);
    Ok(Stage {
        head: vec![computed("phi_zpf", Some(phi), "")],
        eta_analytic: Some(eta),
        e4: j.ej().freq_equiv(),
        e4_provenance: dev.provenance("EJ"),
        default_rel_e4: rel_e4,
        default_rel_eta: rel_eta,
        omega: Some(wa.min(wb)),
        mode_spacing: Some((wa - wb).abs()),
        kind: KerrKind::Cross,
    })
}

fn squid(dev: &DeviceFile) -> Result<Stage> {
    let j = junction(dev)?;
    let (ej, ec) = (j.ej().freq_equiv(), j.ec().freq_equiv());
    let plasma = (8.0 * ej * ec).sqrt();
    let (rel_e4, rel_eta) = sc_uncertainties(dev);
    Ok(Stage {
        head: vec![
            computed("phi_zpf", Some(phi_zpf(&j)), ""),
            computed("plasma_freq_hz", Some(plasma), "Hz"),
        ],
        eta_analytic: Some(eta_squid(&j)),
        e4: ej,
        e4_provenance: dev.provenance("EJ"),
        default_rel_e4: rel_e4,
        default_rel_eta: rel_eta,
        omega: Some(plasma),
        mode_spacing: None,
        kind: KerrKind::Cross,
    })
}

fn fluxonium_phi(dev: &DeviceFile) -> Result<(f64, Provenance)> {
    if let Some(phi) = dev.num("phi_zpf") {
        return Ok((phi, dev.provenance("phi_zpf")));
    }
    match dev.num("EC") {
        Some(_) => Ok((phi_zpf(&junction(dev)?), Provenance::Computed)),
        None => Err(missing(dev, "phi_zpf")),
    }
}

fn fluxonium(dev: &DeviceFile) -> Result<Stage> {
    let ej = need(dev, "EJ")?;
    let (phi, prov) = fluxonium_phi(dev)?;
    let eta = eta_fluxonium(need(dev, "p")?, phi);
    let (rel_e4, rel_eta) = sc_uncertainties(dev);
    Ok(Stage {
        head: vec![q("phi_zpf_used", Some(phi), "", prov)],
        eta_analytic: Some(eta),
        e4: ej,
        e4_provenance: dev.provenance("EJ"),
        default_rel_e4: rel_e4,
        default_rel_eta: rel_eta,
        omega: None,
        mode_spacing: None,
        kind: KerrKind::Cross,
    })
}

/// Flux bias in use: a number, or the solved Kerr-free point.
pub fn snail_flux(dev: &DeviceFile) -> Result<(f64, Provenance)> {
    match dev.get("flux").map(|e| &e.value) {
        Some(Value::Num(f)) => Ok((*f, dev.provenance("flux"))),
        Some(Value::Text(_)) => {
            let n = need(dev, "N")? as u32;
            let f = kernel(dev, find_kerr_free_flux(n, need(dev, "alpha")?, need(dev, "EJ")?))?;
            Ok((f, Provenance::Computed))
        }
        None => Err(missing(dev, "flux")),
    }
}

fn snail(dev: &DeviceFile) -> Result<Stage> {
    let ej = need(dev, "EJ")?;
    let ec = need(dev, "EC")?;
    let (flux, flux_prov) = snail_flux(dev)?;
    let spec = kernel(dev, SnailSpec::new(need(dev, "N")? as u32, need(dev, "alpha")?, ej, flux))?;
    let ex = kernel(dev, snail_expansion(&spec))?;
    if !(ex.c2 > 0.0) || !(ec > 0.0) {
        return Err(CliError::kernel(
            dev.label(),
            kerrlaw::KerrError::Domain(format!("need c2 > 0 and EC > 0, got c2 = {} Hz", ex.c2)),
        ));
    }
    // the quadratic term plays the role of E_J in the zero-point amplitude
    let phi = (2.0 * ec / ex.c2).powf(0.25);
    let c = ex.c4 / ej;
    let eta = ProjectionFactor::new(c * phi.powi(4), KernelTag::Snail);
    let (rel_e4, rel_eta) = sc_uncertainties(dev);
    Ok(Stage {
        head: vec![
            q("flux_used", Some(flux), "Phi0", flux_prov),
            computed("phi_min", Some(ex.phi_min), "rad"),
            computed("c2_hz", Some(ex.c2), "Hz"),
            computed("c3_hz", Some(ex.c3), "Hz"),
            computed("c4_hz", Some(ex.c4), "Hz"),
            computed("c_aaaa", Some(c), ""),
            computed("phi_zpf", Some(phi), ""),
        ],
        eta_analytic: Some(eta),
        e4: ej,
        e4_provenance: dev.provenance("EJ"),
        default_rel_e4: rel_e4,
        default_rel_eta: rel_eta,
        omega: None,
        mode_spacing: None,
        kind: KerrKind::SelfKerr,
    })
}

fn read_grid(dev: &DeviceFile, key: &str) -> Result<Option<FieldGrid>> {
    let Some(path) = dev.resolve_path(key) else {
        return Ok(None);
    };
    let parsed = FieldGrid::read(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let grid = parsed.map_err(|source| CliError::Grid { path, source })?;
    Ok(Some(kernel(dev, normalize_grid(&grid, Execution::default()))?))
}

fn photonic(dev: &DeviceFile) -> Result<Stage> {
    let lambda = need(dev, "wavelength")?;
    let n0 = need(dev, "n0")?;
    let (chi3, chi3_prov) = match (dev.num("chi3"), dev.num("n2")) {
        (Some(c), _) => (c, dev.provenance("chi3")),
        (None, Some(n2)) => (chi3_from_n2(n2, n0), Provenance::Computed),
        (None, None) => return Err(missing(dev, "chi3 (or n2)")),
    };
    let a = read_grid(dev, "field_a")?;
    let b = read_grid(dev, "field_b")?;
    let (v_eff, v_prov) = match (dev.num("V_eff"), &a) {
        (Some(v), _) => (v, dev.provenance("V_eff")),
        (None, Some(g)) => (kernel(dev, mode_volume(g))?, Provenance::Computed),
        (None, None) => return Err(missing(dev, "V_eff (or field_a)")),
    };
    let spec = kernel(dev, PhotonicSpec::new(lambda, n0, chi3, v_eff, dev.num("gamma0")))?;
    let (overlap, ov_prov) = match (dev.num("overlap"), &a) {
        (Some(o), _) => (o, dev.provenance("overlap")),
        (None, Some(ga)) => {
            let gb = b.as_ref().unwrap_or(ga);
            (kernel(dev, overlap_integral(ga, gb, Execution::default()))?, Provenance::Computed)
        }
        // no profile: the reference overlap itself
        (None, None) => (spec.gamma0(), Provenance::Computed),
    };
    let omega = spec.omega();
    let e4_model = kernel(dev, e4_photonic(&spec, omega))?.freq_equiv();
    let (e4, e4_prov) = match dev.num("e4_kernel") {
        Some(e) => (e, dev.provenance("e4_kernel")),
        None => (e4_model, Provenance::Computed),
    };
    Ok(Stage {
        head: vec![
            q("chi3_used", Some(chi3), "m2/V2", chi3_prov),
            q("v_eff_used", Some(v_eff), "m3", v_prov),
            q("overlap_used", Some(overlap), "m^-3", ov_prov),
            computed("gamma0_used", Some(spec.gamma0()), "m^-3"),
            computed("omega_rad_s", Some(omega), "rad/s"),
            computed("e4_model_hz", Some(e4_model), "Hz"),
        ],
        eta_analytic: Some(eta_photonic(&spec, overlap)),
        e4,
        e4_provenance: e4_prov,
        default_rel_e4: 0.0,
        default_rel_eta: 0.0,
        omega: Some(SPEED_OF_LIGHT / lambda),
        mode_spacing: None,
        kind: KerrKind::Cross,
    })
}

struct EnzModel {
    omega_enz: Option<f64>,
    omega_probe: f64,
    probe_prov: Provenance,
    abs_eps: f64,
    e4: f64,
}

fn enz_model(dev: &DeviceFile) -> Result<Option<EnzModel>> {
    let (Some(wp), Some(chi3), Some(v)) = (dev.num("omega_p"), dev.num("chi3_eff"), dev.num("V_eff")) else {
        return Ok(None);
    };
    let drude = kernel(
        dev,
        DrudeParams::new(dev.num("eps_inf").unwrap_or(1.0), wp, dev.num("gamma").unwrap_or(0.0)),
    )?;
    let spec = kernel(dev, EnzSpec::new(drude, chi3, v))?;
    let omega_enz = find_enz_frequency(&drude);
    let (omega_probe, probe_prov) = match dev.num("omega_probe") {
        Some(w) => (w, dev.provenance("omega_probe")),
        None => (kernel(dev, omega_enz.clone())?, Provenance::Computed),
    };
    let omega_enz = omega_enz.ok();
    let abs_eps = kernel(dev, drude_permittivity(&drude, omega_probe))?.norm();
    let e4 = kernel(dev, e4_enz(&spec, omega_probe))?.freq_equiv();
    Ok(Some(EnzModel {
        omega_enz,
        omega_probe,
        probe_prov,
        abs_eps,
        e4,
    }))
}

fn enz(dev: &DeviceFile) -> Result<Stage> {
    let model = enz_model(dev)?;
    let (e4, e4_prov) = match (dev.num("e4_kernel"), &model) {
        (Some(e), _) => (e, dev.provenance("e4_kernel")),
        (None, Some(m)) => (m.e4, Provenance::Computed),
        (None, None) => return Err(missing(dev, "e4_kernel (or omega_p, chi3_eff, V_eff)")),
    };
    let m = model.as_ref();
    Ok(Stage {
        head: vec![
            computed("omega_enz_rad_s", m.and_then(|m| m.omega_enz), "rad/s"),
            q(
                "omega_probe_used",
                m.map(|m| m.omega_probe),
                "rad/s",
                m.map_or(Provenance::Computed, |m| m.probe_prov),
            ),
            computed("abs_eps", m.map(|m| m.abs_eps), ""),
            computed("e4_drude_hz", m.map(|m| m.e4), "Hz"),
        ],
        eta_analytic: None,
        e4,
        e4_provenance: e4_prov,
        default_rel_e4: 0.0,
        default_rel_eta: 0.0,
        omega: m.map(|m| m.omega_probe / TAU),
        mode_spacing: None,
        kind: KerrKind::Cross,
    })
}

fn echo(dev: &DeviceFile) -> Vec<Quantity> {
    schema(dev.platform)
        .into_iter()
        .map(|k| {
            let (value, provenance) = match dev.get(k.key) {
                Some(e) => (
                    match &e.value {
                        Value::Num(v) => Cell::Num(*v),
                        Value::Text(s) => Cell::Text(s.clone()),
                    },
                    e.provenance,
                ),
                None => (Cell::Missing, Provenance::Assumed),
            };
            Quantity {
                name: k.key.to_owned(),
                value,
                unit: k.kind.base_unit(),
                provenance,
            }
        })
        .collect()
}

/// Runs the platform chain for one device file.
pub fn run_prediction(dev: &DeviceFile) -> Result<PredictionReport> {
    let stage = match dev.platform {
        Platform::Quarton => quarton(dev)?,
        Platform::Squid => squid(dev)?,
        Platform::Fluxonium => fluxonium(dev)?,
        Platform::Snail => snail(dev)?,
        Platform::Photonic => photonic(dev)?,
        Platform::Enz => enz(dev)?,
    };

    let rel_e4 = dev.num("rel_unc_e4").unwrap_or(stage.default_rel_e4);
    let rel_eta = dev.num("rel_unc_eta").unwrap_or(stage.default_rel_eta);
    let e4 = kernel(dev, EnergyScale::new(stage.e4, rel_e4))?;
    let (eta_used, eta_prov) = match (dev.num("eta_kernel"), stage.eta_analytic) {
        (Some(v), _) => (ProjectionFactor::new(v, KernelTag::PaperKernel), dev.provenance("eta_kernel")),
        (None, Some(a)) => (a, Provenance::Computed),
        (None, None) => return Err(missing(dev, "eta_kernel")),
    };
    let mut pred = predict_cross_kerr(eta_used.with_rel_unc(rel_eta), e4);
    if stage.kind == KerrKind::SelfKerr {
        pred.chi_over_2pi *= 0.5;
        pred.abs_unc *= 0.5;
    }
    if let Some(meas) = dev.num("measured_chi") {
        pred = kernel(dev, pred.compared_to(meas))?;
    }
    let omega = dev.num("omega").or(stage.omega);
    let regime = match omega {
        Some(w) => {
            let spacing = dev.num("mode_spacing").or(stage.mode_spacing);
            let inputs = kernel(dev, RegimeInputs::new(pred.chi_over_2pi, w, dev.num("kappa"), spacing))?;
            classify_regime(inputs)
        }
        None => Regime::Unknown,
    };
    pred = pred.with_regime(regime);

    let mut derived = stage.head;
    derived.extend([
        q("e4_hz", Some(e4.freq_equiv()), "Hz", stage.e4_provenance),
        computed("rel_unc_e4_used", Some(rel_e4), ""),
        computed("eta_analytic", stage.eta_analytic.map(|e| e.value), ""),
        q("eta_used", Some(eta_used.value), "", eta_prov),
        text("eta_source", &eta_used.kernel.to_string(), Provenance::Computed),
        computed("rel_unc_eta_used", Some(rel_eta), ""),
        text(
            "kerr_kind",
            match stage.kind {
                KerrKind::Cross => "cross",
                KerrKind::SelfKerr => "self",
            },
            Provenance::Computed,
        ),
        computed("chi_hz", Some(pred.chi_over_2pi), "Hz"),
        computed("chi_unc_hz", Some(pred.abs_unc), "Hz"),
        computed("rel_unc", Some(pred.rel_unc()), ""),
        computed("deviation_pct", pred.deviation_pct, "%"),
        text("regime", &regime.to_string(), Provenance::Computed),
    ]);

    Ok(PredictionReport {
        label: dev.label(),
        platform: dev.platform,
        kind: stage.kind,
        inputs: echo(dev),
        derived,
        prediction: pred,
    })
}

/// Percent deviation recomputed from the report, for table rows.
pub fn deviation(report: &PredictionReport, measured: f64) -> Option<f64> {
    percent_deviation(report.prediction.chi_over_2pi, measured).ok()
}
