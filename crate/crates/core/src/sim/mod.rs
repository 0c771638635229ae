//! Brute-force Schrodinger propagation under control plus noise.
//!
//! The Hamiltonian on a substep is
//! `H = beta_z(t) sigma_z + ((Omega(t) + beta_O(t) Omega_max) / 2) sigma_phi`
//! with the noise sampled at the substep midpoint and the 2x2 exponential
//! taken exactly.

pub mod rb;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::noise::{draw_realization, NoiseRealization, NoiseSpectrum, Quadrature};
use crate::pulse::{Envelope, PulseSequence};

/// Default step as a fraction of the shortest segment.
pub const DEFAULT_DT_FRACTION: f64 = 1.0 / 200.0;
/// Largest step accepted, as a fraction of the shortest segment.
pub const MAX_DT_FRACTION: f64 = 1.0 / 50.0;

/// Offset added to the seed for the amplitude bath so the two quadratures are independent.
const AMPLITUDE_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `|<1|U|0>|^2`.
    PopulationUp,
    /// `|Tr(U_target^dag U)|^2 / 4`.
    TraceFidelity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub realizations: usize,
    pub seed: u64,
    /// Maximum step as a fraction of the shortest segment.
    pub dt_fraction: f64,
    pub observable: Observable,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            realizations: 50,
            seed: 1,
            dt_fraction: DEFAULT_DT_FRACTION,
            observable: Observable::PopulationUp,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidArgument("need at least one realization".into()));
        }
        if !(self.dt_fraction > 0.0 && self.dt_fraction <= MAX_DT_FRACTION) {
            return Err(Error::StepSize(format!(
                "dt fraction {} outside (0, {MAX_DT_FRACTION}]",
                self.dt_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean_fidelity: f64,
    pub std_error: f64,
    pub per_realization: Vec<f64>,
    pub seed: u64,
    pub realizations: usize,
    pub observable: Observable,
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Propagate `seq` starting at absolute time `t_start`; noise is evaluated at
/// absolute times so consecutive gates see one continuous bath.
pub fn propagate_from(
    seq: &PulseSequence,
    t_start: f64,
    noise_z: Option<&NoiseRealization>,
    noise_omega: Option<&NoiseRealization>,
    dt_max: f64,
) -> Result<Mat2> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let limit = seq.min_segment_duration() * MAX_DT_FRACTION;
    if !(dt_max > 0.0) || dt_max > limit * (1.0 + 1e-12) {
        return Err(Error::StepSize(format!("dt_max {dt_max:e} exceeds {limit:e}")));
    }
    let mut u = Mat2::IDENTITY;
    let mut t = t_start;
    for seg in &seq.segments {
        let steps = (seg.tau / dt_max).ceil().max(1.0) as usize;
        let h = seg.tau / steps as f64;
        let (c, s) = (seg.phi.cos(), seg.phi.sin());
        for k in 0..steps {
            let s0 = k as f64 * h;
            let mid = t + s0 + 0.5 * h;
            let rabi = match seg.envelope {
                Envelope::Square => seg.rabi_peak,
                Envelope::Gaussian { .. } => (seg.angle_at(s0 + h) - seg.angle_at(s0)) / h,
            };
            let bz = noise_z.map_or(0.0, |n| n.evaluate(mid));
            let bo = noise_omega.map_or(0.0, |n| n.evaluate(mid));
            let drive = 0.5 * (rabi + bo * seg.rabi_peak);
            u = Mat2::exp_pauli([drive * c, drive * s, bz], h).mul(&u);
        }
        t += seg.tau;
    }
    Ok(u)
}

/// Propagate `seq` from `t = 0`.
pub fn propagate(
    seq: &PulseSequence,
    noise_z: Option<&NoiseRealization>,
    noise_omega: Option<&NoiseRealization>,
    dt_max: f64,
) -> Result<Mat2> {
    propagate_from(seq, 0.0, noise_z, noise_omega, dt_max)
}

/// Propagator under constant offsets, exact per square segment.
pub fn propagate_static(seq: &PulseSequence, beta_z: f64, beta_omega: f64) -> Mat2 {
    let mut u = Mat2::IDENTITY;
    for seg in &seq.segments {
        let steps = match seg.envelope {
            Envelope::Square => 1,
            Envelope::Gaussian { .. } => seg.default_substeps() * 4,
        };
        let h = seg.tau / steps as f64;
        let (c, s) = (seg.phi.cos(), seg.phi.sin());
        for k in 0..steps {
            let s0 = k as f64 * h;
            let rabi = match seg.envelope {
                Envelope::Square => seg.rabi_peak,
                Envelope::Gaussian { .. } => (seg.angle_at(s0 + h) - seg.angle_at(s0)) / h,
            };
            let drive = 0.5 * (rabi + beta_omega * seg.rabi_peak);
            u = Mat2::exp_pauli([drive * c, drive * s, beta_z], h).mul(&u);
        }
    }
    u
}

fn observe(u: &Mat2, target: &Mat2, obs: Observable) -> f64 {
    match obs {
        Observable::PopulationUp => u.population_up(),
        Observable::TraceFidelity => target.fidelity_to(u),
    }
}

/// Monte-Carlo ensemble over noise realizations; realization `i` uses stream
/// `i` of `cfg.seed`.
pub fn ensemble_fidelity(
    seq: &PulseSequence,
    spec_z: Option<&NoiseSpectrum>,
    spec_omega: Option<&NoiseSpectrum>,
    cfg: &SimConfig,
) -> Result<SimResult> {
    cfg.validate()?;
    for (s, q) in [(spec_z, Quadrature::Dephasing), (spec_omega, Quadrature::Amplitude)] {
        if let Some(s) = s {
            s.validate()?;
            if s.quadrature != q {
                return Err(Error::InvalidArgument(format!("expected a {q:?} spectrum")));
            }
        }
    }
    let target = seq.ideal_unitary();
    let dt = seq.min_segment_duration() * cfg.dt_fraction;
    let values = (0..cfg.realizations as u64)
        .into_par_iter()
        .map(|i| {
            let nz = spec_z.map(|s| draw_realization(s, cfg.seed, i));
            let no = spec_omega.map(|s| draw_realization(s, cfg.seed.wrapping_add(AMPLITUDE_SEED_OFFSET), i));
            let u = propagate(seq, nz.as_ref(), no.as_ref(), dt)?;
            Ok(observe(&u, &target, cfg.observable))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, se) = mean_and_stderr(&values);
    Ok(SimResult {
        mean_fidelity: mean,
        std_error: se,
        per_realization: values,
        seed: cfg.seed,
        realizations: cfg.realizations,
        observable: cfg.observable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnusFit {
    pub quadrature: Quadrature,
    pub betas: Vec<f64>,
    pub infidelities: Vec<f64>,
    /// Fitted `d log(1 - F) / d log beta`, equal to `2 mu`.
    pub exponent: f64,
    pub residual: f64,
}

impl MagnusFit {
    /// Number of cancelled offset orders, `mu - 1`.
    pub fn magnus_order(&self) -> f64 {
        self.exponent / 2.0 - 1.0
    }
}

/// Infidelity floor below which the probe is considered to have hit rounding.
const MAGNUS_FLOOR: f64 = 1e-28;

/// Default offset grid: 8 points from 1e-3 to 10^-1.5.
pub fn default_beta_grid() -> Vec<f64> {
    (0..8).map(|i| 10f64.powf(-3.0 + 1.5 * i as f64 / 7.0)).collect()
}

/// Fit the power law of gate infidelity against a constant offset.
pub fn static_magnus_exponent(seq: &PulseSequence, quadrature: Quadrature, betas: &[f64]) -> Result<MagnusFit> {
    if betas.len() < 3 || betas.iter().any(|b| !(*b > 0.0)) {
        return Err(Error::InvalidArgument("need at least three positive offsets".into()));
    }
    let (lo, hi) = betas.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    if (hi / lo).log10() < 1.5 - 1e-9 {
        return Err(Error::InvalidArgument("offset grid must span at least 1.5 decades".into()));
    }
    let ideal = seq.ideal_unitary();
    let infidelities: Vec<f64> = betas
        .iter()
        .map(|&b| {
            let u = match quadrature {
                Quadrature::Dephasing => propagate_static(seq, b, 0.0),
                Quadrature::Amplitude => propagate_static(seq, 0.0, b),
            };
            ideal.infidelity_to(&u)
        })
        .collect();
    if infidelities.iter().any(|v| *v < MAGNUS_FLOOR) {
        return Err(Error::DegenerateFit("infidelity at rounding level; shrink the offset grid".into()));
    }
    let xy: Vec<(f64, f64)> = betas.iter().zip(&infidelities).map(|(b, v)| (b.ln(), v.ln())).collect();
    let (exponent, _, residual) = crate::filter::line_fit(&xy);
    Ok(MagnusFit { quadrature, betas: betas.to_vec(), infidelities, exponent, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{make_named, make_primitive, GateKind, GateSpec};
    use std::f64::consts::PI;

    fn static_tone(beta: f64, q: Quadrature) -> NoiseRealization {
        // a zero-frequency cosine is a constant offset
        NoiseRealization {
            quadrature: q,
            teeth: vec![crate::noise::Tooth { omega: 0.0, amplitude: beta, phase: 0.0 }],
            seed: 0,
            index: 0,
        }
    }

    #[test]
    fn noiseless_pi_flips() {
        let s = make_primitive(PI, 0.0, PI).unwrap();
        let u = propagate(&s, None, None, 0.005).unwrap();
        assert!((u.population_up() - 1.0).abs() < 1e-12);
        assert!(propagate(&s, None, None, 0.5).is_err());
    }

    #[test]
    fn rabi_formula_with_static_detuning() {
        let omega = PI;
        let s = make_primitive(PI, 0.0, omega).unwrap();
        for bz in [0.1, -0.1, 0.7] {
            let n = static_tone(bz, Quadrature::Dephasing);
            let u = propagate(&s, Some(&n), None, 0.005).unwrap();
            let eff = (omega * omega + 4.0 * bz * bz).sqrt();
            let want = omega * omega / (eff * eff) * (eff * 1.0 / 2.0).sin().powi(2);
            assert!((u.population_up() - want).abs() < 1e-12);
            assert!(u.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn amplitude_offset_scales_angle() {
        let s = make_primitive(PI, 0.0, PI).unwrap();
        let n = static_tone(0.05, Quadrature::Amplitude);
        let u = propagate(&s, None, Some(&n), 0.005).unwrap();
        assert!(u.phase_distance(&Mat2::rotation(PI * 1.05, 0.0)) < 1e-12);
    }

    #[test]
    fn zero_noise_ensemble() {
        let s = make_primitive(PI, 0.0, PI).unwrap();
        let spec = NoiseSpectrum::white(Quadrature::Dephasing, 0.0, 1.0, 10);
        let r = ensemble_fidelity(&s, Some(&spec), None, &SimConfig::default()).unwrap();
        assert!((r.mean_fidelity - 1.0).abs() < 1e-12);
        assert!(r.std_error < 1e-14);
        let bad = SimConfig { dt_fraction: 0.1, ..SimConfig::default() };
        assert!(ensemble_fidelity(&s, Some(&spec), None, &bad).is_err());
    }

    #[test]
    fn step_halving() {
        let s = make_named(&GateSpec::new(GateKind::Sk1, PI, PI)).unwrap();
        let spec = NoiseSpectrum::white(Quadrature::Dephasing, 0.05, 2.0, 20);
        let r = draw_realization(&spec, 4, 2);
        let dt = s.min_segment_duration() / 200.0;
        let a = propagate(&s, Some(&r), None, dt).unwrap().population_up();
        let b = propagate(&s, Some(&r), None, dt / 2.0).unwrap().population_up();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn magnus_primitive_and_sk1() {
        let grid = default_beta_grid();
        let prim = make_primitive(PI, 0.0, PI).unwrap();
        let f = static_magnus_exponent(&prim, Quadrature::Amplitude, &grid).unwrap();
        assert!((f.exponent - 2.0).abs() < 0.05);
        let sk1 = make_named(&GateSpec::new(GateKind::Sk1, PI, PI)).unwrap();
        let f = static_magnus_exponent(&sk1, Quadrature::Amplitude, &grid).unwrap();
        assert!((f.exponent - 4.0).abs() < 0.1, "{f:?}");
        assert!(static_magnus_exponent(&sk1, Quadrature::Amplitude, &[1e-3, 2e-3, 3e-3]).is_err());
    }
}
