//! Resolved run configurations: config-file values overlaid by flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use walshfilter::noise::{smallness, NoiseSpectrum, Quadrature};
use walshfilter::pulse::{make_named, parse_kind, Envelope, GateKind, GateSpec, PulseSequence};
use walshfilter::sim::{Observable, SimConfig};
use walshfilter::walsh::WalshSpectrum;

use crate::parse::{self, de_angle, de_opt_angle};

/// Load a JSON config file as an object.
pub fn load(path: Option<&Path>) -> Result<Value> {
    let Some(path) = path else {
        return Ok(Value::Object(Default::default()));
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    if !v.is_object() {
        bail!("config {} must hold a JSON object", path.display());
    }
    Ok(v)
}

fn strip_nulls(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            Value::Object(m.into_iter().filter(|(_, v)| !v.is_null()).map(|(k, v)| (k, strip_nulls(v))).collect())
        }
        other => other,
    }
}

/// Overlay the set flags on the file values and deserialize with defaults.
pub fn resolve<T: DeserializeOwned, F: Serialize>(file: &Value, flags: &F) -> Result<T> {
    let mut merged = file.clone();
    let flags = strip_nulls(serde_json::to_value(flags)?);
    if let (Value::Object(m), Value::Object(f)) = (&mut merged, flags) {
        m.extend(f);
    }
    serde_json::from_value(merged).map_err(|e| anyhow!("invalid configuration: {e}"))
}

fn pi() -> f64 {
    std::f64::consts::PI
}

fn one() -> f64 {
    1.0
}

fn sixth() -> f64 {
    1.0 / 6.0
}

fn square() -> String {
    "square".into()
}

fn primitive() -> String {
    "primitive".into()
}

fn z() -> String {
    "z".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateCfg {
    /// Gate kind, or a comma list where several gates are accepted.
    #[serde(default = "primitive")]
    pub kind: String,
    #[serde(default = "pi", deserialize_with = "de_angle")]
    pub theta: f64,
    #[serde(default, deserialize_with = "de_angle")]
    pub phi0: f64,
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default = "pi", deserialize_with = "de_angle")]
    pub rabi_max: f64,
    #[serde(default, deserialize_with = "de_opt_angle")]
    pub x0: Option<f64>,
    #[serde(default)]
    pub x3: Option<f64>,
    #[serde(default)]
    pub coefficients: Option<String>,
    #[serde(default = "square")]
    pub envelope: String,
    #[serde(default = "sixth")]
    pub g: f64,
    #[serde(default)]
    pub substeps: Option<usize>,
    /// Synthesis output whose spectrum defines a `wamf` gate.
    #[serde(default)]
    pub solution: Option<PathBuf>,
}

pub fn envelope(name: &str, g: f64) -> Result<Envelope> {
    match name.to_ascii_lowercase().as_str() {
        "square" => Ok(Envelope::Square),
        "gaussian" => Ok(Envelope::Gaussian { g }),
        other => bail!("unknown envelope '{other}'"),
    }
}

pub fn quadrature(name: &str) -> Result<Quadrature> {
    name.parse().map_err(|e: walshfilter::Error| anyhow!("{e}"))
}

fn solution_spectrum(path: &Path) -> Result<WalshSpectrum> {
    let text = fs::read_to_string(path).with_context(|| format!("reading solution {}", path.display()))?;
    let v: Value = serde_json::from_str(&text)?;
    let spec = v
        .get("spectrum")
        .or_else(|| v.get("solution").and_then(|s| s.get("spectrum")))
        .ok_or_else(|| anyhow!("{} has no spectrum", path.display()))?;
    Ok(serde_json::from_value(spec.clone())?)
}

impl GateCfg {
    pub fn kinds(&self) -> Vec<String> {
        self.kind.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
    }

    pub fn spec_for(&self, kind: &str) -> Result<GateSpec> {
        let k = parse_kind(kind).map_err(|e| anyhow!("{e}"))?;
        let mut spec = GateSpec::new(k, self.theta, self.rabi_max);
        spec.phi0 = self.phi0;
        spec.tau = self.tau;
        spec.x3 = self.x3;
        spec.envelope = Some(envelope(&self.envelope, self.g)?);
        if k == GateKind::Wamf {
            let mut s = match &self.solution {
                Some(p) => solution_spectrum(p)?,
                None => WalshSpectrum::new(),
            };
            if let Some(x0) = self.x0 {
                s.set(0, x0);
            }
            if let Some(x3) = self.x3 {
                s.set(3, x3);
            }
            if let Some(c) = &self.coefficients {
                for (k, v) in parse::coefficients(c)? {
                    s.set(k, v);
                }
            }
            spec.spectrum = Some(s);
        } else if let (Some(x0), GateKind::W1 | GateKind::Uwmf) = (self.x0, k) {
            // X0 fixes the rotation angle
            spec.theta_target = x0 * self.tau;
        }
        Ok(spec)
    }

    pub fn build_kind(&self, kind: &str) -> Result<PulseSequence> {
        make_named(&self.spec_for(kind)?).map_err(|e| anyhow!("{e}"))
    }

    /// The single gate named by `kind`.
    pub fn build(&self) -> Result<PulseSequence> {
        let kinds = self.kinds();
        match kinds.as_slice() {
            [k] => self.build_kind(k),
            [] => bail!("no gate kind given"),
            _ => bail!("this command takes a single gate kind, got '{}'", self.kind),
        }
    }

    pub fn substeps_for(&self, seq: &PulseSequence) -> usize {
        let default = seq.segments.iter().map(|s| s.default_substeps()).max().unwrap_or(1);
        self.substeps.unwrap_or(default.max(walshfilter::filter::MIN_SUBSTEPS))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseCfg {
    #[serde(default = "z")]
    pub quadrature: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub p: f64,
    /// `omega_c / 2 pi` of the comb.
    #[serde(default = "one")]
    pub cutoff: f64,
    #[serde(default = "default_teeth")]
    pub teeth: usize,
    /// `omega_t / 2 pi` of a single tone; selects the tone model.
    #[serde(default)]
    pub tone: Option<f64>,
    #[serde(default = "default_alpha")]
    pub tone_amplitude: f64,
    /// Rescale the strength so the gate has this `xi^2`.
    #[serde(default)]
    pub xi2: Option<f64>,
    /// A serialized noise spectrum replacing the fields above.
    #[serde(default)]
    pub noise: Option<PathBuf>,
}

fn default_alpha() -> f64 {
    0.01
}

fn default_teeth() -> usize {
    50
}

impl NoiseCfg {
    /// The spectrum, with `cutoff` overriding the configured value when given.
    pub fn build(&self, cutoff: Option<f64>, tau: f64) -> Result<NoiseSpectrum> {
        let spec = if let Some(p) = &self.noise {
            let text = fs::read_to_string(p).with_context(|| format!("reading noise {}", p.display()))?;
            serde_json::from_str::<NoiseSpectrum>(&text).with_context(|| format!("parsing noise {}", p.display()))?
        } else {
            let q = quadrature(&self.quadrature)?;
            match self.tone {
                Some(f) => NoiseSpectrum::single_tone(q, std::f64::consts::TAU * f, self.tone_amplitude),
                None => {
                    let wc = std::f64::consts::TAU * cutoff.unwrap_or(self.cutoff);
                    if self.teeth == 0 {
                        bail!("teeth must be positive");
                    }
                    NoiseSpectrum::comb(q, self.alpha, self.p, wc / self.teeth as f64, self.teeth)
                }
            }
        };
        spec.validate().map_err(|e| anyhow!("{e}"))?;
        match self.xi2 {
            Some(target) => {
                let now = smallness(&spec, tau).map_err(|e| anyhow!("{e}"))?.xi_squared;
                if now == 0.0 {
                    bail!("cannot rescale a silent spectrum to xi2 = {target}");
                }
                Ok(spec.scaled(target / now))
            }
            None => Ok(spec),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimCfg {
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "one_u64")]
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt_fraction: f64,
    #[serde(default = "default_observable")]
    pub observable: Observable,
}

fn default_realizations() -> usize {
    50
}

fn one_u64() -> u64 {
    1
}

fn default_dt() -> f64 {
    walshfilter::sim::DEFAULT_DT_FRACTION
}

fn default_observable() -> Observable {
    Observable::PopulationUp
}

impl SimCfg {
    pub fn build(&self) -> SimConfig {
        SimConfig {
            realizations: self.realizations,
            seed: self.seed,
            dt_fraction: self.dt_fraction,
            observable: self.observable,
        }
    }
}

pub fn observable(name: &str) -> Result<String> {
    match name.to_ascii_lowercase().replace('-', "_").as_str() {
        "population_up" | "p_up" => Ok("population_up".into()),
        "trace_fidelity" | "trace" => Ok("trace_fidelity".into()),
        other => bail!("unknown observable '{other}'"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[derive(Serialize)]
    struct Flags {
        theta: Option<String>,
        kind: Option<String>,
    }

    #[test]
    fn flags_override_file() {
        let file = json!({"kind": "bb1", "theta": 1.0, "tau": 2.0});
        let flags = Flags { theta: Some("pi/2".into()), kind: None };
        let g: GateCfg = resolve(&file, &flags).unwrap();
        assert_eq!(g.kind, "bb1");
        assert_eq!(g.theta, std::f64::consts::FRAC_PI_2);
        assert_eq!(g.tau, 2.0);
        let d: GateCfg = resolve(&json!({}), &Flags { theta: None, kind: None }).unwrap();
        assert_eq!(d.kind, "primitive");
        assert!(resolve::<GateCfg, _>(&json!({"theta": "pie"}), &Flags { theta: None, kind: None }).is_err());
    }
}
