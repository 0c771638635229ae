//! Composite pulse sequences and the gate library.
//!
//! A segment drives a rotation about the equatorial axis `(cos phi, sin phi, 0)`.
//! Rabi rates are never negative: a negative synthesized amplitude becomes a
//! positive rate with the phase advanced by `pi`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::walsh::WalshSpectrum;

/// Default number of substeps per Gaussian segment.
pub const DEFAULT_GAUSSIAN_SUBSTEPS: usize = 100;

/// Angles for the symmetric second-order off-resonance compensating pi pulse
/// `a_0 b_pi c_0 b_pi a_0`, found by solving for vanishing first and second
/// static-detuning error terms.
const C2_PI_ANGLES: [f64; 3] = [5.984743575727768, 4.887213363637941, 0.9465322294101401];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "envelope", rename_all = "lowercase")]
pub enum Envelope {
    Square,
    /// Gaussian with standard deviation `g` times the segment duration, centred
    /// on the segment midpoint and truncated to the segment.
    Gaussian { g: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    #[serde(flatten)]
    pub envelope: Envelope,
    pub rabi_peak: f64,
    pub theta: f64,
    pub tau: f64,
    pub phi: f64,
}

fn wrap_phase(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

impl PulseSegment {
    /// Square segment from a signed rotation angle.
    pub fn square(theta: f64, tau: f64, phi: f64) -> Self {
        let (theta, phi) = if theta < 0.0 { (-theta, phi + PI) } else { (theta, phi) };
        PulseSegment {
            envelope: Envelope::Square,
            rabi_peak: theta / tau,
            theta,
            tau,
            phi: wrap_phase(phi),
        }
    }

    /// Gaussian segment from a signed rotation angle.
    pub fn gaussian(theta: f64, tau: f64, phi: f64, g: f64) -> Self {
        let (theta, phi) = if theta < 0.0 { (-theta, phi + PI) } else { (theta, phi) };
        let sigma = g * tau;
        let c = gaussian_norm(tau, sigma);
        PulseSegment {
            envelope: Envelope::Gaussian { g },
            rabi_peak: theta / (c * sigma * TAU.sqrt()),
            theta,
            tau,
            phi: wrap_phase(phi),
        }
    }

    pub fn axis(&self) -> [f64; 3] {
        [self.phi.cos(), self.phi.sin(), 0.0]
    }

    /// Rabi rate at time `s` after the segment start.
    pub fn rabi_at(&self, s: f64) -> f64 {
        match self.envelope {
            Envelope::Square => self.rabi_peak,
            Envelope::Gaussian { g } => {
                let sigma = g * self.tau;
                let d = s - 0.5 * self.tau;
                self.rabi_peak * (-d * d / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    /// Rotation angle accumulated between the segment start and time `s`.
    pub fn angle_at(&self, s: f64) -> f64 {
        match self.envelope {
            Envelope::Square => self.rabi_peak * s,
            Envelope::Gaussian { g } => {
                let sigma = g * self.tau;
                let c = gaussian_norm(self.tau, sigma);
                let z = (s - 0.5 * self.tau) / (std::f64::consts::SQRT_2 * sigma);
                0.5 * self.theta * (libm::erf(z) / c + 1.0)
            }
        }
    }

    /// Ideal propagator of this segment.
    pub fn unitary(&self) -> Mat2 {
        Mat2::rotation(self.theta, self.phi)
    }

    /// Number of substeps this segment is resolved into by default.
    pub fn default_substeps(&self) -> usize {
        match self.envelope {
            Envelope::Square => 1,
            Envelope::Gaussian { .. } => DEFAULT_GAUSSIAN_SUBSTEPS,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("segment duration {} must be positive", self.tau)));
        }
        if !(self.rabi_peak >= 0.0 && self.rabi_peak.is_finite()) {
            return Err(Error::InvalidArgument(format!("Rabi rate {} must be non-negative", self.rabi_peak)));
        }
        if let Envelope::Gaussian { g } = self.envelope {
            if !(g > 0.0) {
                return Err(Error::InvalidArgument(format!("Gaussian width ratio {g} must be positive")));
            }
        }
        Ok(())
    }
}

/// `C = erf(tau / (2 sqrt(2) sigma))`, the fraction of the Gaussian kept in the segment.
fn gaussian_norm(tau: f64, sigma: f64) -> f64 {
    libm::erf(tau / (2.0 * std::f64::consts::SQRT_2 * sigma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub label: String,
    pub tau_total: f64,
    pub segments: Vec<PulseSegment>,
}

impl PulseSequence {
    pub fn new(label: impl Into<String>, segments: Vec<PulseSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument("pulse sequence has no segments".into()));
        }
        for s in &segments {
            s.validate()?;
        }
        let tau_total = segments.iter().map(|s| s.tau).sum();
        Ok(PulseSequence { label: label.into(), tau_total, segments })
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Sum of the segment rotation angles.
    pub fn total_rotation(&self) -> f64 {
        self.segments.iter().map(|s| s.theta).sum()
    }

    /// Rotation angles signed by the phase shift, for x-axis amplitude-modulated sequences.
    pub fn signed_rotation(&self, phi0: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| if (wrap_phase(s.phi - phi0) - PI).abs() < 1e-9 { -s.theta } else { s.theta })
            .sum()
    }

    pub fn max_rabi(&self) -> f64 {
        self.segments.iter().map(|s| s.rabi_peak).fold(0.0, f64::max)
    }

    pub fn min_segment_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.tau).fold(f64::INFINITY, f64::min)
    }

    /// Ideal (noise-free) propagator of the whole sequence.
    pub fn ideal_unitary(&self) -> Mat2 {
        self.segments.iter().fold(Mat2::IDENTITY, |u, s| s.unitary().mul(&u))
    }

    /// Same sequence rotated about z by `phi0`.
    pub fn with_phase_offset(mut self, phi0: f64) -> Self {
        for s in &mut self.segments {
            s.phi = wrap_phase(s.phi + phi0);
        }
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Append another sequence after this one.
    pub fn then(mut self, other: &PulseSequence) -> Self {
        self.segments.extend_from_slice(&other.segments);
        self.tau_total += other.tau_total;
        self
    }

    pub fn check_rabi(&self, limit: f64) -> Result<()> {
        for (i, s) in self.segments.iter().enumerate() {
            if s.rabi_peak > limit * (1.0 + 1e-12) {
                return Err(Error::RabiLimit { segment: i, rate: s.rabi_peak, limit });
            }
        }
        Ok(())
    }

    /// Stretch time uniformly so no segment exceeds `limit`. Returns the
    /// stretch factor (1 when no rescaling was needed).
    pub fn rescale_to_rabi_max(&mut self, limit: f64) -> Result<f64> {
        if !(limit > 0.0) {
            return Err(Error::InvalidArgument(format!("rabi_max {limit} must be positive")));
        }
        let factor = self.max_rabi() / limit;
        if factor <= 1.0 {
            return Ok(1.0);
        }
        for s in &mut self.segments {
            s.tau *= factor;
            s.rabi_peak /= factor;
        }
        self.tau_total *= factor;
        Ok(factor)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let seq: PulseSequence = serde_json::from_str(text)?;
        let rebuilt = PulseSequence::new(seq.label.clone(), seq.segments.clone())?;
        let tol = 1e-12 * rebuilt.tau_total.abs().max(1.0);
        if (rebuilt.tau_total - seq.tau_total).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "tau_total {} disagrees with segment sum {}",
                seq.tau_total, rebuilt.tau_total
            )));
        }
        Ok(seq)
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {v} must be positive")))
    }
}

fn require_angle(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= TAU * (1.0 + 1e-12) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rotation angle {theta} outside (0, 2pi]")))
    }
}

/// Square segments at a common Rabi rate from `(angle, phase)` pairs.
fn fixed_rate(label: String, rabi: f64, parts: &[(f64, f64)]) -> Result<PulseSequence> {
    require_positive("rabi", rabi)?;
    let segs = parts.iter().map(|&(a, p)| PulseSegment::square(a, a.abs() / rabi, p)).collect();
    PulseSequence::new(label, segs)
}

/// Single square pulse.
pub fn make_primitive(theta: f64, phi: f64, rabi: f64) -> Result<PulseSequence> {
    require_positive("theta", theta)?;
    require_positive("rabi", rabi)?;
    PulseSequence::new("primitive", vec![PulseSegment::square(theta, theta / rabi, phi)])
}

fn sk1_phase(theta: f64) -> f64 {
    (-theta / (4.0 * PI)).acos()
}

/// SK1 in total time `tau`: `theta_0, 2pi_phi, 2pi_-phi` at `Omega_0 = (theta + 4pi)/tau`.
pub fn make_sk1(theta: f64, tau: f64) -> Result<PulseSequence> {
    require_angle(theta)?;
    require_positive("tau", tau)?;
    let rabi = (theta + 4.0 * PI) / tau;
    sk1_at_rate(theta, 0.0, rabi)
}

/// SK1 enacting `theta` about `phi0` at a fixed Rabi rate.
pub fn sk1_at_rate(theta: f64, phi0: f64, rabi: f64) -> Result<PulseSequence> {
    if theta.abs() > 4.0 * PI {
        return Err(Error::InvalidArgument(format!("SK1 angle {theta} exceeds 4pi")));
    }
    let (theta, phi0) = if theta < 0.0 { (-theta, phi0 + PI) } else { (theta, phi0) };
    let phi = sk1_phase(theta);
    fixed_rate(
        "sk1".into(),
        rabi,
        &[(theta, phi0), (TAU, phi0 + phi), (TAU, phi0 - phi)],
    )
}

/// BB1: `theta_0` followed by `pi_phi 2pi_3phi pi_phi`, `phi = arccos(-theta/4pi)`.
pub fn make_bb1(theta: f64, rabi: f64) -> Result<PulseSequence> {
    require_angle(theta)?;
    let phi = sk1_phase(theta);
    fixed_rate("bb1".into(), rabi, &[(theta, 0.0), (PI, phi), (TAU, 3.0 * phi), (PI, phi)])
}

/// B2: the BB1 correction placed ahead of the target rotation.
pub fn make_b2(theta: f64, rabi: f64) -> Result<PulseSequence> {
    require_angle(theta)?;
    let phi = sk1_phase(theta);
    fixed_rate("b2".into(), rabi, &[(PI, phi), (TAU, 3.0 * phi), (PI, phi), (theta, 0.0)])
}

/// P2: `theta_0 2pi_phi 4pi_-phi 2pi_phi`, `phi = arccos(-theta/8pi)`. The three
/// correction segments carry the phase pattern of `PAL_3`.
pub fn make_p2(theta: f64, rabi: f64) -> Result<PulseSequence> {
    require_angle(theta)?;
    let phi = (-theta / (8.0 * PI)).acos();
    fixed_rate("p2".into(), rabi, &[(theta, 0.0), (TAU, phi), (2.0 * TAU, -phi), (TAU, phi)])
}

/// CORPSE: `(2pi + theta/2 - k)_0 (2pi - 2k)_pi (theta/2 - k)_0`, `k = arcsin(sin(theta/2)/2)`.
pub fn make_c1(theta: f64, rabi: f64) -> Result<PulseSequence> {
    require_angle(theta)?;
    let k = ((theta / 2.0).sin() / 2.0).asin();
    fixed_rate(
        "c1".into(),
        rabi,
        &[(TAU + theta / 2.0 - k, 0.0), (TAU - 2.0 * k, PI), (theta / 2.0 - k, 0.0)],
    )
}

/// Second-order detuning-compensating pi pulse; only defined for `theta = pi`.
pub fn make_c2(theta: f64, rabi: f64) -> Result<PulseSequence> {
    if (theta - PI).abs() > 1e-12 {
        return Err(Error::UnsupportedKind(format!("c2 is defined only for theta = pi, got {theta}")));
    }
    let [a, b, c] = C2_PI_ANGLES;
    fixed_rate("c2".into(), rabi, &[(a, 0.0), (b, PI), (c, 0.0), (b, PI), (a, 0.0)])
}

/// Walsh amplitude-modulated filter: `M` equal segments with angles `(tau/M) H X~`.
pub fn make_wamf(spectrum: &WalshSpectrum, tau: f64, envelope: Envelope) -> Result<PulseSequence> {
    if spectrum.is_empty() {
        return Err(Error::InvalidArgument("empty Walsh spectrum".into()));
    }
    require_positive("tau", tau)?;
    let levels = spectrum.synthesize();
    let dt = tau / levels.len() as f64;
    let segs = levels
        .iter()
        .map(|&x| match envelope {
            Envelope::Square => PulseSegment::square(x * dt, dt, 0.0),
            Envelope::Gaussian { g } => PulseSegment::gaussian(x * dt, dt, 0.0, g),
        })
        .collect();
    let label = match envelope {
        Envelope::Square => format!("wamf{}", levels.len()),
        Envelope::Gaussian { .. } => format!("wamf{}-gaussian", levels.len()),
    };
    PulseSequence::new(label, segs)
}

/// As [`make_wamf`], failing if any segment exceeds `rabi_max`.
pub fn make_wamf_limited(
    spectrum: &WalshSpectrum,
    tau: f64,
    envelope: Envelope,
    rabi_max: f64,
) -> Result<PulseSequence> {
    let seq = make_wamf(spectrum, tau, envelope)?;
    seq.check_rabi(rabi_max)?;
    Ok(seq)
}

/// `X_3` of W1 at `X_0 = pi`: the first-order dephasing root, which is also
/// the cost-optimal point over [1e-9, 1e-1]/tau found by this library.
pub const W1_PI_X3: f64 = -5.945_614_118_031_807;

/// `X_3` of W1 at `X_0 = pi` for Gaussian segments with `g = 1/6`.
pub const W1_PI_GAUSSIAN_X3: f64 = -5.636_372_335_226_97;

/// Variational coefficients of W2 at `X_0 = pi`: the eight-segment even-parity
/// optimum with the first two dephasing moments removed.
pub const W2_PI: [(u64, f64); 3] = [(3, -16.997_173_338_699_014), (5, -25.433_692_241_755_83), (6, -16.328_399_222_487_953)];

/// Walsh spectrum of W2 over duration `tau`.
pub fn w2_pi_spectrum(tau: f64) -> WalshSpectrum {
    let scale = 1.0 / tau;
    let mut s = WalshSpectrum::from_pairs([(0, PI * scale)]);
    for (k, v) in W2_PI {
        s.set(k, v * scale);
    }
    s
}

/// Four-segment first-order WAMF with angles `(tau/4)(X+, X-, X-, X+)`.
pub fn make_wamf1(x0: f64, x3: f64, tau: f64) -> Result<PulseSequence> {
    let spec = WalshSpectrum::from_pairs([(0, x0), (3, x3)]);
    Ok(make_wamf(&spec, tau, Envelope::Square)?.with_label("w1"))
}

/// W1 with each amplitude block replaced by SK1 at the block's Rabi rate:
/// `SK1(X+ tau/4), SK1(X- tau/2), SK1(X+ tau/4)`.
pub fn make_uwmf(x0: f64, x3: f64, tau: f64) -> Result<PulseSequence> {
    require_positive("tau", tau)?;
    let xp = x0 + x3;
    let xm = x0 - x3;
    let mut segs = Vec::with_capacity(9);
    for (rate, dur) in [(xp, tau / 4.0), (xm, tau / 2.0), (xp, tau / 4.0)] {
        if rate == 0.0 {
            return Err(Error::InvalidArgument("UWMF block with zero amplitude has no SK1 rate".into()));
        }
        let block = sk1_at_rate(rate * dur, 0.0, rate.abs())?;
        segs.extend(block.segments);
    }
    PulseSequence::new("uwmf", segs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Primitive,
    Sk1,
    Bb1,
    P2,
    B2,
    C1,
    C2,
    /// Walsh amplitude modulation over `spectrum`.
    Wamf,
    /// Walsh phase modulation, realized as SK1.
    Wpmf,
    /// W1 outer filter with SK1 blocks.
    Uwmf,
    /// Four-segment WAMF over `X_0, X_3`.
    W1,
    /// The eight-segment W2 pi gate.
    W2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    pub theta_target: f64,
    #[serde(default)]
    pub phi0: f64,
    #[serde(default = "unit")]
    pub tau: f64,
    pub rabi_max: f64,
    /// Walsh coefficients for `wamf`; a missing `X_0` is filled in as `theta_target / tau`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<WalshSpectrum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Envelope>,
    /// Modulation depth `X_3` for `uwmf`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x3: Option<f64>,
}

fn unit() -> f64 {
    1.0
}

impl GateSpec {
    pub fn new(kind: GateKind, theta_target: f64, rabi_max: f64) -> Self {
        GateSpec {
            kind,
            theta_target,
            phi0: 0.0,
            tau: 1.0,
            rabi_max,
            spectrum: None,
            envelope: None,
            x3: None,
        }
    }

    pub fn wamf(spectrum: WalshSpectrum, envelope: Envelope, theta_target: f64, rabi_max: f64) -> Self {
        GateSpec { spectrum: Some(spectrum), envelope: Some(envelope), ..Self::new(GateKind::Wamf, theta_target, rabi_max) }
    }

    pub fn uwmf(x3: f64, theta_target: f64, rabi_max: f64) -> Self {
        GateSpec { x3: Some(x3), ..Self::new(GateKind::Uwmf, theta_target, rabi_max) }
    }

    /// The Walsh spectrum for amplitude-modulated kinds.
    pub fn walsh_spectrum(&self) -> Option<WalshSpectrum> {
        match self.kind {
            GateKind::Wamf => {
                let mut s = self.spectrum.clone().unwrap_or_default();
                if !s.iter().any(|(k, _)| k == 0) {
                    s.set(0, self.theta_target / self.tau);
                }
                Some(s)
            }
            GateKind::Uwmf | GateKind::W1 => Some(WalshSpectrum::from_pairs([
                (0, self.theta_target / self.tau),
                (3, self.x3.unwrap_or(W1_PI_X3 / self.tau)),
            ])),
            GateKind::W2 => Some(w2_pi_spectrum(self.tau)),
            _ => None,
        }
    }
}

/// Build a library gate. Phase-modulated gates run at `rabi_max`; Walsh
/// amplitude-modulated gates are built over `tau` and stretched in time when
/// they would exceed `rabi_max`.
pub fn make_named(spec: &GateSpec) -> Result<PulseSequence> {
    require_angle(spec.theta_target)?;
    require_positive("rabi_max", spec.rabi_max)?;
    let theta = spec.theta_target;
    let rabi = spec.rabi_max;
    let seq = match spec.kind {
        GateKind::Primitive => make_primitive(theta, 0.0, rabi)?,
        GateKind::Sk1 | GateKind::Wpmf => sk1_at_rate(theta, 0.0, rabi)?,
        GateKind::Bb1 => make_bb1(theta, rabi)?,
        GateKind::P2 => make_p2(theta, rabi)?,
        GateKind::B2 => make_b2(theta, rabi)?,
        GateKind::C1 => make_c1(theta, rabi)?,
        GateKind::C2 => make_c2(theta, rabi)?,
        GateKind::Wamf => {
            let spectrum = spec.walsh_spectrum().expect("wamf has a spectrum");
            let envelope = spec.envelope.unwrap_or(Envelope::Square);
            let mut seq = make_wamf(&spectrum, spec.tau, envelope)?;
            seq.rescale_to_rabi_max(rabi)?;
            seq
        }
        GateKind::Uwmf | GateKind::W1 => {
            let x3 = match (spec.x3, (theta - PI).abs() < 1e-12) {
                (Some(x3), _) => x3,
                (None, true) => W1_PI_X3 / spec.tau,
                (None, false) => {
                    return Err(Error::InvalidArgument("x3 is required unless theta = pi".into()));
                }
            };
            let mut seq = if spec.kind == GateKind::W1 {
                make_wamf1(theta / spec.tau, x3, spec.tau)?
            } else {
                make_uwmf(theta / spec.tau, x3, spec.tau)?
            };
            seq.rescale_to_rabi_max(rabi)?;
            seq
        }
        GateKind::W2 => {
            if (theta - PI).abs() > 1e-12 {
                return Err(Error::UnsupportedKind(format!("w2 is defined only for theta = pi, got {theta}")));
            }
            let mut seq = make_wamf(&w2_pi_spectrum(spec.tau), spec.tau, Envelope::Square)?.with_label("w2");
            seq.rescale_to_rabi_max(rabi)?;
            seq
        }
    };
    Ok(seq.with_phase_offset(spec.phi0))
}

/// Parse a gate kind name as used on the command line.
pub fn parse_kind(name: &str) -> Result<GateKind> {
    Ok(match name.to_ascii_lowercase().as_str() {
        "primitive" | "prim" => GateKind::Primitive,
        "sk1" => GateKind::Sk1,
        "bb1" => GateKind::Bb1,
        "p2" => GateKind::P2,
        "b2" => GateKind::B2,
        "c1" | "corpse" => GateKind::C1,
        "c2" => GateKind::C2,
        "wpmf" => GateKind::Wpmf,
        "wamf" => GateKind::Wamf,
        "uwmf" => GateKind::Uwmf,
        "w1" | "wamf1" => GateKind::W1,
        "w2" | "wamf2" => GateKind::W2,
        other => return Err(Error::UnsupportedKind(other.to_string())),
    })
}
