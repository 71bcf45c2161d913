//! Device files.
//!
//! Flat `key = value [unit] [@provenance]` lines; `#` starts a comment.
//! Every file names its `platform` first or last, the rest is checked
//! against that platform's schema. Frequencies must carry `Hz`, `kHz`,
//! `MHz` or `GHz`; Drude rates are `rad/s`; lengths `m`, `um` or `nm`;
//! volumes `m3` or `um3`; overlaps `m^-3`; χ⁽³⁾ in `m2/V2`; n₂ in `m2/W`.
//! Provenance is one of `measured`, `paper-kernel`, `assumed` and defaults
//! to `assumed`.
//!
//! ```text
//! platform = quarton
//! EJ       = 14.8 GHz   @measured
//! EC       = 0.21 GHz   @measured
//! p_A      = 0.88
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Quarton,
    Snail,
    Squid,
    Fluxonium,
    Photonic,
    Enz,
}

impl Platform {
    pub const ALL: [Platform; 6] = [
        Platform::Quarton,
        Platform::Snail,
        Platform::Squid,
        Platform::Fluxonium,
        Platform::Photonic,
        Platform::Enz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Platform::Quarton => "quarton",
            Platform::Snail => "snail",
            Platform::Squid => "squid",
            Platform::Fluxonium => "fluxonium",
            Platform::Photonic => "photonic",
            Platform::Enz => "enz",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Platform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Platform::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Platform::ALL.iter().map(|p| p.name()).collect();
                format!("unknown platform `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Measured,
    PaperKernel,
    Assumed,
    /// Derived by this tool from other entries.
    Computed,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Measured => "measured",
            Provenance::PaperKernel => "paper-kernel",
            Provenance::Assumed => "assumed",
            Provenance::Computed => "computed",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a key holds and which units it accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Frequency equivalent, stored in Hz.
    Freq,
    /// Angular frequency, rad/s.
    AngFreq,
    Dimensionless,
    /// Dimensionless in `[0, 1]`.
    Fraction,
    /// Positive integer.
    Count,
    /// Stored in m.
    Length,
    /// Stored in m³.
    Volume,
    /// Stored in m⁻³.
    InvVolume,
    /// (m/V)².
    Chi3,
    /// m²/W.
    N2,
    /// Number in units of Φ₀, or the word `kerr-free`.
    Flux,
    /// File path relative to the device file.
    Path,
    Text,
}

impl Kind {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Kind::Freq => &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)],
            Kind::AngFreq => &[("rad/s", 1.0)],
            Kind::Length => &[("m", 1.0), ("um", 1e-6), ("µm", 1e-6), ("nm", 1e-9)],
            Kind::Volume => &[("m3", 1.0), ("m^3", 1.0), ("um3", 1e-18), ("um^3", 1e-18), ("µm3", 1e-18)],
            Kind::InvVolume => &[("m^-3", 1.0), ("m-3", 1.0)],
            Kind::Chi3 => &[("m2/V2", 1.0), ("m^2/V^2", 1.0)],
            Kind::N2 => &[("m2/W", 1.0), ("m^2/W", 1.0)],
            _ => &[],
        }
    }

    /// Unit of the stored value, for reports.
    pub fn base_unit(self) -> &'static str {
        match self {
            Kind::Freq => "Hz",
            Kind::AngFreq => "rad/s",
            Kind::Length => "m",
            Kind::Volume => "m3",
            Kind::InvVolume => "m^-3",
            Kind::Chi3 => "m2/V2",
            Kind::N2 => "m2/W",
            Kind::Flux => "Phi0",
            _ => "",
        }
    }

    pub fn is_numeric(self) -> bool {
        !matches!(self, Kind::Path | Kind::Text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySpec {
    pub key: &'static str,
    pub kind: Kind,
    pub required: bool,
}

const fn req(key: &'static str, kind: Kind) -> KeySpec {
    KeySpec { key, kind, required: true }
}

const fn opt(key: &'static str, kind: Kind) -> KeySpec {
    KeySpec { key, kind, required: false }
}

/// Keys accepted on every platform.
const COMMON: &[KeySpec] = &[
    opt("label", Kind::Text),
    opt("measured_chi", Kind::Freq),
    opt("measured_chi_unc", Kind::Freq),
    opt("reported_delta_pct", Kind::Dimensionless),
    opt("omega", Kind::Freq),
    opt("kappa", Kind::Freq),
    opt("mode_spacing", Kind::Freq),
    opt("eta_kernel", Kind::Dimensionless),
    opt("rel_unc_e4", Kind::Dimensionless),
    opt("rel_unc_eta", Kind::Dimensionless),
];

const QUARTON: &[KeySpec] = &[
    req("EJ", Kind::Freq),
    req("EC", Kind::Freq),
    req("p_A", Kind::Fraction),
    req("p_B", Kind::Fraction),
    req("omega_A", Kind::Freq),
    req("omega_B", Kind::Freq),
    opt("rel_unc_EJ", Kind::Dimensionless),
    opt("rel_unc_EC", Kind::Dimensionless),
];

const SQUID: &[KeySpec] = &[
    req("EJ", Kind::Freq),
    req("EC", Kind::Freq),
    opt("rel_unc_EJ", Kind::Dimensionless),
    opt("rel_unc_EC", Kind::Dimensionless),
];

const FLUXONIUM: &[KeySpec] = &[
    req("EJ", Kind::Freq),
    req("p", Kind::Fraction),
    opt("phi_zpf", Kind::Dimensionless),
    opt("EC", Kind::Freq),
    opt("rel_unc_EJ", Kind::Dimensionless),
    opt("rel_unc_EC", Kind::Dimensionless),
];

const SNAIL: &[KeySpec] = &[
    req("EJ", Kind::Freq),
    req("N", Kind::Count),
    req("alpha", Kind::Dimensionless),
    req("flux", Kind::Flux),
    req("EC", Kind::Freq),
    opt("rel_unc_EJ", Kind::Dimensionless),
    opt("rel_unc_EC", Kind::Dimensionless),
];

const PHOTONIC: &[KeySpec] = &[
    req("wavelength", Kind::Length),
    req("n0", Kind::Dimensionless),
    opt("chi3", Kind::Chi3),
    opt("n2", Kind::N2),
    opt("V_eff", Kind::Volume),
    opt("field_a", Kind::Path),
    opt("field_b", Kind::Path),
    opt("overlap", Kind::InvVolume),
    opt("gamma0", Kind::InvVolume),
    opt("e4_kernel", Kind::Freq),
];

const ENZ: &[KeySpec] = &[
    opt("e4_kernel", Kind::Freq),
    opt("eps_inf", Kind::Dimensionless),
    opt("omega_p", Kind::AngFreq),
    opt("gamma", Kind::AngFreq),
    opt("omega_probe", Kind::AngFreq),
    opt("chi3_eff", Kind::Chi3),
    opt("V_eff", Kind::Volume),
];

/// Platform-specific keys followed by the common ones.
pub fn schema(platform: Platform) -> Vec<KeySpec> {
    let own = match platform {
        Platform::Quarton => QUARTON,
        Platform::Snail => SNAIL,
        Platform::Squid => SQUID,
        Platform::Fluxonium => FLUXONIUM,
        Platform::Photonic => PHOTONIC,
        Platform::Enz => ENZ,
    };
    let mut keys: Vec<KeySpec> = own.to_vec();
    let mut common = COMMON.to_vec();
    if platform == Platform::Enz {
        // the ENZ row is always anchored on a stored kernel factor
        common.iter_mut().filter(|k| k.key == "eta_kernel").for_each(|k| k.required = true);
    }
    keys.extend(common);
    keys
}

pub fn key_spec(platform: Platform, key: &str) -> Option<KeySpec> {
    schema(platform).into_iter().find(|k| k.key == key)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub value: Value,
    pub provenance: Provenance,
    /// 1-based source line; 0 for values set programmatically.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceFile {
    pub path: Option<PathBuf>,
    pub platform: Platform,
    pub entries: BTreeMap<String, Entry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.path {
            write!(f, "{}", p.display())?;
            if let Some(l) = self.line {
                write!(f, ":{l}")?;
            }
            f.write_str(": ")?;
        } else if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(k) = &self.key {
            write!(f, "key `{k}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> ParseError {
    ParseError {
        path: None,
        line,
        key: key.map(str::to_owned),
        message: message.into(),
    }
}

/// Splits `"14.8GHz"` into `("14.8", "GHz")`.
fn split_number(token: &str) -> (&str, &str) {
    let end = token
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-' || ((c == 'e' || c == 'E') && i > 0))
        })
        .map_or(token.len(), |(i, _)| i);
    // "1e" followed by a unit letter is not an exponent
    let (mut num, mut unit) = token.split_at(end);
    if num.ends_with(['e', 'E']) {
        num = &num[..num.len() - 1];
        unit = &token[num.len()..];
    }
    (num, unit)
}

/// Parses `number [unit]` for a numeric kind, returning the value in base
/// units. Used for device values and for command-line sweep bounds.
pub fn parse_quantity(kind: Kind, text: &str) -> Result<f64, String> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let (num, unit) = match tokens.as_slice() {
        [one] => split_number(one),
        [n, u] => (*n, *u),
        [] => return Err("missing value".into()),
        _ => return Err(format!("expected `number [unit]`, got `{text}`")),
    };
    let value: f64 = num
        .parse()
        .map_err(|_| format!("`{num}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("value `{num}` is not finite"));
    }
    let units = kind.units();
    let scale = if units.is_empty() {
        if !unit.is_empty() {
            return Err(format!("unexpected unit `{unit}` on a dimensionless value"));
        }
        1.0
    } else if unit.is_empty() {
        let names: Vec<&str> = units.iter().map(|u| u.0).collect();
        return Err(format!("missing unit (expected one of {})", names.join(", ")));
    } else {
        units.iter().find(|u| u.0 == unit).map(|u| u.1).ok_or_else(|| {
            let names: Vec<&str> = units.iter().map(|u| u.0).collect();
            format!("unknown unit `{unit}` (expected one of {})", names.join(", "))
        })?
    };
    let v = value * scale;
    match kind {
        Kind::Fraction if !(0.0..=1.0).contains(&v) => Err(format!("{v} is outside [0, 1]")),
        Kind::Count if v < 1.0 || v.fract() != 0.0 || v > f64::from(u32::MAX) => {
            Err(format!("{v} is not a positive integer"))
        }
        _ => Ok(v),
    }
}

fn parse_value(kind: Kind, text: &str) -> Result<Value, String> {
    match kind {
        Kind::Text if !text.is_empty() => Ok(Value::Text(text.to_owned())),
        Kind::Path | Kind::Text => {
            if text.split_whitespace().count() != 1 {
                return Err(format!("expected a single word, got `{text}`"));
            }
            Ok(Value::Text(text.to_owned()))
        }
        Kind::Flux if text == "kerr-free" => Ok(Value::Text(text.to_owned())),
        _ => parse_quantity(kind, text).map(Value::Num),
    }
}

fn parse_provenance(s: &str) -> Result<Provenance, String> {
    match s {
        "measured" => Ok(Provenance::Measured),
        "paper-kernel" => Ok(Provenance::PaperKernel),
        "assumed" => Ok(Provenance::Assumed),
        other => Err(format!("unknown provenance `@{other}` (expected measured, paper-kernel or assumed)")),
    }
}

impl DeviceFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut platform: Option<(Platform, usize)> = None;
        let mut raw: Vec<(usize, String, String, Provenance)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, rest) = body
                .split_once('=')
                .ok_or_else(|| err(Some(lineno), None, format!("expected `key = value`, got `{body}`")))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(err(Some(lineno), None, format!("bad key `{key}`")));
            }
            let mut rest = rest.trim();
            let mut provenance = Provenance::Assumed;
            if let Some(at) = rest.rfind('@') {
                provenance = parse_provenance(rest[at + 1..].trim()).map_err(|m| err(Some(lineno), Some(key), m))?;
                rest = rest[..at].trim();
            }
            if key == "platform" {
                if platform.is_some() {
                    return Err(err(Some(lineno), Some(key), "duplicate key"));
                }
                let p = rest.parse().map_err(|m: String| err(Some(lineno), Some(key), m))?;
                platform = Some((p, lineno));
                continue;
            }
            if raw.iter().any(|r| r.1 == key) {
                return Err(err(Some(lineno), Some(key), "duplicate key"));
            }
            raw.push((lineno, key.to_owned(), rest.to_owned(), provenance));
        }
        let (platform, _) = platform.ok_or_else(|| err(None, Some("platform"), "missing required key"))?;
        let schema = schema(platform);
        let mut entries = BTreeMap::new();
        for (lineno, key, text, provenance) in raw {
            let spec = schema.iter().find(|k| k.key == key).ok_or_else(|| {
                err(Some(lineno), Some(&key), format!("unknown key for platform {platform}"))
            })?;
            let value = parse_value(spec.kind, &text).map_err(|m| err(Some(lineno), Some(&key), m))?;
            entries.insert(key, Entry { value, provenance, line: lineno });
        }
        for k in schema.iter().filter(|k| k.required) {
            if !entries.contains_key(k.key) {
                return Err(err(None, Some(k.key), format!("missing required key for platform {platform}")));
            }
        }
        Ok(Self { path: None, platform, entries })
    }

    pub fn read(path: &Path) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path).map_err(|e| ParseError {
            path: Some(path.to_owned()),
            line: None,
            key: None,
            message: e.to_string(),
        })?;
        let mut dev = Self::parse(&text).map_err(|mut e| {
            e.path = Some(path.to_owned());
            e
        })?;
        dev.path = Some(path.to_owned());
        Ok(dev)
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        match self.entries.get(key)?.value {
            Value::Num(v) => Some(v),
            Value::Text(_) => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match &self.entries.get(key)?.value {
            Value::Text(s) => Some(s),
            Value::Num(_) => None,
        }
    }

    pub fn provenance(&self, key: &str) -> Provenance {
        self.entries.get(key).map_or(Provenance::Assumed, |e| e.provenance)
    }

    pub fn label(&self) -> String {
        self.text("label").map_or_else(
            || {
                self.path
                    .as_ref()
                    .and_then(|p| p.file_stem())
                    .map_or_else(|| self.platform.to_string(), |s| s.to_string_lossy().into_owned())
            },
            str::to_owned,
        )
    }

    /// Resolves a path-valued key against the device file's directory.
    pub fn resolve_path(&self, key: &str) -> Option<PathBuf> {
        let rel = Path::new(self.text(key)?);
        Some(match self.path.as_ref().and_then(|p| p.parent()) {
            Some(dir) if rel.is_relative() => dir.join(rel),
            _ => rel.to_owned(),
        })
    }

    /// Copy with one numeric key replaced, as a sweep does.
    pub fn with_num(&self, key: &str, value: f64) -> Self {
        let mut out = self.clone();
        let provenance = self.provenance(key);
        out.entries.insert(
            key.to_owned(),
            Entry {
                value: Value::Num(value),
                provenance,
                line: 0,
            },
        );
        out
    }

    /// Numeric keys that a sweep may vary.
    pub fn sweepable_keys(&self) -> Vec<&'static str> {
        schema(self.platform)
            .into_iter()
            .filter(|k| k.kind.is_numeric() && k.kind != Kind::Count && !k.key.starts_with("reported_"))
            .map(|k| k.key)
            .collect()
    }
}
