//! Parametric noise spectra and random-phase time-domain realizations.
//!
//! Power spectra are one-sided with the convention
//! `<beta^2> = (1/pi) * integral_0^inf S(w) dw`. A comb with spacing `w0`
//! puts a cosine at every tooth `w_j = j w0` with amplitude
//! `A_j = sqrt(2 S(w_j) w0 / pi)` and an independent uniform phase.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    /// `beta_z sigma_z` detuning noise.
    #[serde(rename = "z", alias = "dephasing")]
    Dephasing,
    /// Multiplicative drive-strength noise `beta_Omega`.
    #[serde(rename = "omega", alias = "amplitude")]
    Amplitude,
}

impl std::str::FromStr for Quadrature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z" | "dephasing" => Ok(Quadrature::Dephasing),
            "omega" | "amplitude" | "o" => Ok(Quadrature::Amplitude),
            other => Err(Error::InvalidArgument(format!("unknown quadrature '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// `S(j w0) = alpha j^-p` for `j = 1..=teeth`.
    CombPowerLaw { alpha: f64, p: f64, omega0: f64, teeth: usize },
    /// A single cosine `A cos(w_t t + psi)`.
    SingleTone { omega_t: f64, amplitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumJson", into = "SpectrumJson")]
pub struct NoiseSpectrum {
    pub quadrature: Quadrature,
    pub model: NoiseModel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpectrumJson {
    quadrature: Quadrature,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega0_over_2pi: Option<f64>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    teeth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tone_omega_over_2pi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tone_amplitude: Option<f64>,
}

impl TryFrom<SpectrumJson> for NoiseSpectrum {
    type Error = Error;

    fn try_from(j: SpectrumJson) -> Result<Self> {
        let missing = |f: &str| Error::InvalidArgument(format!("noise spectrum is missing '{f}'"));
        let tone = j.tone_omega_over_2pi.is_some() || j.model.as_deref() == Some("tone");
        let spec = if tone {
            NoiseSpectrum::single_tone(
                j.quadrature,
                TAU * j.tone_omega_over_2pi.ok_or_else(|| missing("tone_omega_over_2pi"))?,
                j.tone_amplitude.ok_or_else(|| missing("tone_amplitude"))?,
            )
        } else {
            NoiseSpectrum::comb(
                j.quadrature,
                j.alpha.ok_or_else(|| missing("alpha"))?,
                j.p.unwrap_or(0.0),
                TAU * j.omega0_over_2pi.ok_or_else(|| missing("omega0_over_2pi"))?,
                j.teeth.ok_or_else(|| missing("J"))?,
            )
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<NoiseSpectrum> for SpectrumJson {
    fn from(s: NoiseSpectrum) -> Self {
        let mut j = SpectrumJson {
            quadrature: s.quadrature,
            model: None,
            alpha: None,
            p: None,
            omega0_over_2pi: None,
            teeth: None,
            tone_omega_over_2pi: None,
            tone_amplitude: None,
        };
        match s.model {
            NoiseModel::CombPowerLaw { alpha, p, omega0, teeth } => {
                j.model = Some("comb".into());
                j.alpha = Some(alpha);
                j.p = Some(p);
                j.omega0_over_2pi = Some(omega0 / TAU);
                j.teeth = Some(teeth);
            }
            NoiseModel::SingleTone { omega_t, amplitude } => {
                j.tone_omega_over_2pi = Some(omega_t / TAU);
                j.tone_amplitude = Some(amplitude);
            }
        }
        j
    }
}

impl NoiseSpectrum {
    pub fn comb(quadrature: Quadrature, alpha: f64, p: f64, omega0: f64, teeth: usize) -> Self {
        NoiseSpectrum { quadrature, model: NoiseModel::CombPowerLaw { alpha, p, omega0, teeth } }
    }

    /// Flat comb with `teeth` teeth up to `omega_c`.
    pub fn white(quadrature: Quadrature, alpha: f64, omega_c: f64, teeth: usize) -> Self {
        Self::comb(quadrature, alpha, 0.0, omega_c / teeth as f64, teeth)
    }

    pub fn single_tone(quadrature: Quadrature, omega_t: f64, amplitude: f64) -> Self {
        NoiseSpectrum { quadrature, model: NoiseModel::SingleTone { omega_t, amplitude } }
    }

    pub fn validate(&self) -> Result<()> {
        match self.model {
            NoiseModel::CombPowerLaw { alpha, p, omega0, teeth } => {
                if !(omega0 > 0.0 && omega0.is_finite()) {
                    return Err(Error::InvalidArgument(format!("comb spacing {omega0} must be positive")));
                }
                if teeth == 0 {
                    return Err(Error::InvalidArgument("comb needs at least one tooth".into()));
                }
                if !(alpha >= 0.0 && alpha.is_finite()) || !p.is_finite() {
                    return Err(Error::InvalidArgument(format!("bad comb strength {alpha} or exponent {p}")));
                }
            }
            NoiseModel::SingleTone { omega_t, amplitude } => {
                if !(omega_t > 0.0 && omega_t.is_finite()) || !amplitude.is_finite() {
                    return Err(Error::InvalidArgument(format!("bad tone ({omega_t}, {amplitude})")));
                }
            }
        }
        Ok(())
    }

    /// Highest frequency carrying power.
    pub fn omega_c(&self) -> f64 {
        match self.model {
            NoiseModel::CombPowerLaw { omega0, teeth, .. } => omega0 * teeth as f64,
            NoiseModel::SingleTone { omega_t, .. } => omega_t,
        }
    }

    /// Lowest frequency carrying power.
    pub fn omega_min(&self) -> f64 {
        match self.model {
            NoiseModel::CombPowerLaw { omega0, .. } => omega0,
            NoiseModel::SingleTone { omega_t, .. } => omega_t,
        }
    }

    /// Same spectrum with the power multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let model = match self.model {
            NoiseModel::CombPowerLaw { alpha, p, omega0, teeth } => {
                NoiseModel::CombPowerLaw { alpha: alpha * c, p, omega0, teeth }
            }
            NoiseModel::SingleTone { omega_t, amplitude } => {
                NoiseModel::SingleTone { omega_t, amplitude: amplitude * c.sqrt() }
            }
        };
        NoiseSpectrum { quadrature: self.quadrature, model }
    }

    /// Discrete spectral lines `(w_j, W_j)` with `<beta^2> = (1/pi) sum W_j`.
    /// For a comb `W_j = S(w_j) w0`.
    pub fn lines(&self) -> Vec<(f64, f64)> {
        match self.model {
            NoiseModel::CombPowerLaw { alpha, p, omega0, teeth } => (1..=teeth)
                .map(|j| (j as f64 * omega0, alpha * (j as f64).powf(-p) * omega0))
                .collect(),
            NoiseModel::SingleTone { omega_t, amplitude } => {
                vec![(omega_t, PI * amplitude * amplitude / 2.0)]
            }
        }
    }

    /// Variance `<beta^2>` of the realizations.
    pub fn variance(&self) -> f64 {
        self.lines().iter().map(|(_, w)| w).sum::<f64>() / PI
    }
}

/// Power density at `omega`. Combs return the continuous envelope
/// `alpha (max(w, w0)/w0)^-p` up to the cutoff, which coincides with the comb at
/// the teeth. A single tone is a delta line: this returns its line weight at
/// exactly `omega_t` and zero elsewhere.
pub fn psd_value(spectrum: &NoiseSpectrum, omega: f64) -> f64 {
    match spectrum.model {
        NoiseModel::CombPowerLaw { alpha, p, omega0, .. } => {
            if omega < 0.0 || omega > spectrum.omega_c() * (1.0 + 1e-12) {
                0.0
            } else {
                alpha * (omega.max(omega0) / omega0).powf(-p)
            }
        }
        NoiseModel::SingleTone { omega_t, amplitude } => {
            if omega == omega_t {
                PI * amplitude * amplitude / 2.0
            } else {
                0.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tooth {
    pub omega: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization {
    pub quadrature: Quadrature,
    pub teeth: Vec<Tooth>,
    pub seed: u64,
    pub index: u64,
}

impl NoiseRealization {
    /// A realization that is identically zero.
    pub fn silent(quadrature: Quadrature) -> Self {
        NoiseRealization { quadrature, teeth: Vec::new(), seed: 0, index: 0 }
    }

    /// `beta(t) = sum_j A_j cos(w_j t + psi_j)`.
    pub fn evaluate(&self, t: f64) -> f64 {
        self.teeth.iter().map(|k| k.amplitude * (k.omega * t + k.phase).cos()).sum()
    }

    /// Mean of `beta` over `[t0, t0 + h]`, exact for the cosine sum.
    pub fn average(&self, t0: f64, h: f64) -> f64 {
        self.teeth
            .iter()
            .map(|k| {
                let x = 0.5 * k.omega * h;
                let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
                k.amplitude * (k.omega * (t0 + 0.5 * h) + k.phase).cos() * sinc
            })
            .sum()
    }

    /// Analytic variance `sum A_j^2 / 2`.
    pub fn variance(&self) -> f64 {
        self.teeth.iter().map(|k| 0.5 * k.amplitude * k.amplitude).sum()
    }
}

/// Deterministic realization keyed by `(seed, index)`: the index selects an
/// independent ChaCha stream so ensemble members can be drawn in any order.
pub fn draw_realization(spectrum: &NoiseSpectrum, seed: u64, index: u64) -> NoiseRealization {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let teeth = spectrum
        .lines()
        .into_iter()
        .map(|(omega, w)| Tooth {
            omega,
            amplitude: (2.0 * w / PI).sqrt(),
            phase: rng.gen_range(0.0..TAU),
        })
        .collect();
    NoiseRealization { quadrature: spectrum.quadrature, teeth, seed, index }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Smallness {
    pub xi: f64,
    pub xi_squared: f64,
}

/// `xi = delta_beta tau / 2` with `delta_beta` the RMS of the realizations.
pub fn smallness(spectrum: &NoiseSpectrum, tau: f64) -> Result<Smallness> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be positive")));
    }
    let xi = spectrum.variance().sqrt() * tau / 2.0;
    Ok(Smallness { xi, xi_squared: xi * xi })
}
