//! Randomized benchmarking with interleaved pi/2 and pi gates.
//!
//! Every computational gate is a pi/2 rotation followed by a pi rotation, each
//! about an axis drawn uniformly from {+x, -x, +y, -y}. A correcting word of
//! such rotations, found by breadth-first search over the ideal gates, brings
//! the ideal net operation to a pi rotation, so the ideal final `P_up` is 1.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::noise::{draw_realization, NoiseRealization, NoiseSpectrum, Quadrature};
use crate::pulse::{make_primitive, make_wamf1, PulseSequence, W1_PI_X3};

use super::{mean_and_stderr, propagate_from, DEFAULT_DT_FRACTION};

/// Axis phases for +x, +y, -x, -y.
pub const AXES: [f64; 4] = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PiImplementation {
    Primitive,
    W1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbConfig {
    pub lengths: Vec<usize>,
    pub randomizations: usize,
    pub realizations: usize,
    pub pi_implementation: PiImplementation,
    pub seed: u64,
    /// Rabi limit for every pulse; the primitive pi takes `pi / rabi_max`.
    #[serde(default = "default_rabi")]
    pub rabi_max: f64,
    #[serde(default = "default_w1_x3")]
    pub w1_x3: f64,
    /// Replace the bath by an ideal-gate run with a random rotation error of
    /// this average infidelity after each computational gate.
    #[serde(default)]
    pub injected_error: Option<f64>,
}

fn default_rabi() -> f64 {
    PI
}

fn default_w1_x3() -> f64 {
    W1_PI_X3
}

impl Default for RbConfig {
    fn default() -> Self {
        RbConfig {
            lengths: vec![1, 2, 4, 8, 16, 32],
            randomizations: 50,
            realizations: 20,
            pi_implementation: PiImplementation::Primitive,
            seed: 1,
            rabi_max: PI,
            w1_x3: W1_PI_X3,
            injected_error: None,
        }
    }
}

impl RbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() || self.lengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("lengths must be non-empty and strictly ascending".into()));
        }
        if self.randomizations == 0 || self.realizations == 0 {
            return Err(Error::InvalidArgument("randomization and realization counts must be >= 1".into()));
        }
        if !(self.rabi_max > 0.0 && self.rabi_max.is_finite()) {
            return Err(Error::InvalidArgument("rabi_max must be positive".into()));
        }
        if let Some(e) = self.injected_error {
            if !(0.0..=2.0 / 3.0).contains(&e) {
                return Err(Error::InvalidArgument(format!("injected error {e} outside [0, 2/3]")));
            }
        }
        Ok(())
    }
}

/// One ideal rotation of the benchmarking gate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RbPulse {
    /// `true` for pi, `false` for pi/2.
    pub pi: bool,
    pub axis: u8,
}

impl RbPulse {
    pub fn angle(&self) -> f64 {
        if self.pi {
            PI
        } else {
            FRAC_PI_2
        }
    }

    pub fn phi(&self) -> f64 {
        AXES[self.axis as usize]
    }

    pub fn ideal(&self) -> Mat2 {
        Mat2::rotation(self.angle(), self.phi())
    }

    fn all() -> impl Iterator<Item = RbPulse> {
        [false, true].into_iter().flat_map(|pi| (0..4u8).map(move |axis| RbPulse { pi, axis }))
    }
}

/// Key identifying an SU(2) element up to global phase.
fn phase_key(u: &Mat2) -> [i64; 8] {
    let flat = [u.0[0][0], u.0[0][1], u.0[1][0], u.0[1][1]];
    let pivot = flat.iter().copied().find(|z| z.norm() > 0.3).unwrap_or(flat[0]);
    let phase = pivot.conj() / pivot.norm();
    let mut key = [0i64; 8];
    for (i, z) in flat.iter().enumerate() {
        let w = z * phase;
        key[2 * i] = (w.re * 1e6).round() as i64;
        key[2 * i + 1] = (w.im * 1e6).round() as i64;
    }
    key
}

/// Shortest correcting words for every element reachable by the gate set.
#[derive(Debug, Clone)]
pub struct CorrectionTable {
    words: HashMap<[i64; 8], Vec<RbPulse>>,
}

impl CorrectionTable {
    pub fn new() -> Self {
        // breadth-first search backwards from the targets: if `w g` is a target
        // then `g = w^dag t`
        let mut words: HashMap<[i64; 8], Vec<RbPulse>> = HashMap::new();
        let mut queue = VecDeque::new();
        for t in [Mat2::rotation(PI, 0.0), Mat2::rotation(PI, FRAC_PI_2)] {
            if words.insert(phase_key(&t), Vec::new()).is_none() {
                queue.push_back((t, Vec::new()));
            }
        }
        while let Some((g, word)) = queue.pop_front() {
            for p in RbPulse::all() {
                let prev = p.ideal().adjoint().mul(&g);
                let key = phase_key(&prev);
                if words.contains_key(&key) {
                    continue;
                }
                let mut w = vec![p];
                w.extend(word.iter().copied());
                words.insert(key, w.clone());
                queue.push_back((prev, w));
            }
        }
        CorrectionTable { words }
    }

    /// Number of group elements covered.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Pulses, in time order, that take `aggregate` to a pi rotation.
    pub fn correction(&self, aggregate: &Mat2) -> Result<&[RbPulse]> {
        self.words
            .get(&phase_key(aggregate))
            .map(|w| w.as_slice())
            .ok_or_else(|| Error::InvalidArgument("aggregate outside the benchmarking group".into()))
    }
}

impl Default for CorrectionTable {
    fn default() -> Self {
        Self::new()
    }
}

/// True when `u` equals a pi rotation about an equatorial axis up to phase.
pub fn is_equatorial_pi(u: &Mat2) -> bool {
    // such rotations are -i (cos phi sigma_x + sin phi sigma_y)
    u.0[0][0].norm() < 1e-9 && u.0[1][1].norm() < 1e-9
}

/// A random benchmarking sequence: computational pulses then the correction.
pub fn draw_sequence(length: usize, rng: &mut impl Rng, table: &CorrectionTable) -> Result<Vec<RbPulse>> {
    let mut pulses = Vec::with_capacity(2 * length + 3);
    let mut agg = Mat2::IDENTITY;
    for _ in 0..length {
        for pi in [false, true] {
            let p = RbPulse { pi, axis: rng.gen_range(0..4) };
            agg = p.ideal().mul(&agg);
            pulses.push(p);
        }
    }
    pulses.extend_from_slice(table.correction(&agg)?);
    Ok(pulses)
}

/// Ideal product of a pulse list, in time order.
pub fn ideal_product(pulses: &[RbPulse]) -> Mat2 {
    pulses.iter().fold(Mat2::IDENTITY, |acc, p| p.ideal().mul(&acc))
}

struct GateSet {
    half: [PulseSequence; 4],
    full: [PulseSequence; 4],
}

impl GateSet {
    fn new(cfg: &RbConfig) -> Result<Self> {
        let half = AXES.map(|phi| make_primitive(FRAC_PI_2, phi, cfg.rabi_max));
        let full = AXES.map(|phi| match cfg.pi_implementation {
            PiImplementation::Primitive => make_primitive(PI, phi, cfg.rabi_max),
            PiImplementation::W1 => make_wamf1(PI, cfg.w1_x3, 1.0).and_then(|mut s| {
                s.rescale_to_rabi_max(cfg.rabi_max)?;
                Ok(s.with_phase_offset(phi))
            }),
        });
        let unwrap4 = |a: [Result<PulseSequence>; 4]| -> Result<[PulseSequence; 4]> {
            let [a, b, c, d] = a;
            Ok([a?, b?, c?, d?])
        };
        Ok(GateSet { half: unwrap4(half)?, full: unwrap4(full)? })
    }

    fn get(&self, p: RbPulse) -> &PulseSequence {
        if p.pi {
            &self.full[p.axis as usize]
        } else {
            &self.half[p.axis as usize]
        }
    }
}

/// Random SU(2) rotation by `delta` about an isotropic axis.
fn random_error(delta: f64, rng: &mut impl Rng) -> Mat2 {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let a: f64 = rng.gen_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    Mat2::exp_pauli([r * a.cos(), r * a.sin(), z], delta / 2.0)
}

fn run_once(
    pulses: &[RbPulse],
    length: usize,
    gates: &GateSet,
    noise: Option<&NoiseRealization>,
    injected: Option<(f64, &mut ChaCha20Rng)>,
) -> Result<f64> {
    let mut u = Mat2::IDENTITY;
    let mut t = 0.0;
    let mut injected = injected;
    for (i, p) in pulses.iter().enumerate() {
        let seq = gates.get(*p);
        let g = match noise {
            Some(n) => propagate_from(seq, t, Some(n), None, seq.min_segment_duration() * DEFAULT_DT_FRACTION)?,
            None => seq.ideal_unitary(),
        };
        u = g.mul(&u);
        t += seq.tau_total;
        if let Some((delta, rng)) = injected.as_mut() {
            // error after each computational pi/2-pi pair
            if i % 2 == 1 && i < 2 * length {
                u = random_error(*delta, *rng).mul(&u);
            }
        }
    }
    Ok(u.population_up())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbPoint {
    pub length: usize,
    pub mean_fidelity: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbFit {
    /// Depolarizing parameter per computational gate.
    pub p: f64,
    pub amplitude: f64,
    /// Error per gate `(1 - p) / 2`.
    pub epg: f64,
    pub epg_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbResult {
    pub config: RbConfig,
    pub table: Vec<RbPoint>,
    pub fit: Option<RbFit>,
    pub fit_error: Option<String>,
}

impl RbResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("length,mean_fidelity,std_error\n");
        for p in &self.table {
            out.push_str(&format!("{},{:e},{:e}\n", p.length, p.mean_fidelity, p.std_error));
        }
        out
    }
}

/// Weighted fit of `F = 1/2 + A p^l` through `ln(F - 1/2)`.
pub fn fit_decay(table: &[RbPoint]) -> Result<RbFit> {
    let pts: Vec<(f64, f64, f64)> = table
        .iter()
        .filter(|p| p.mean_fidelity - 0.5 > 1e-12)
        .map(|p| {
            let d = p.mean_fidelity - 0.5;
            let sigma = (p.std_error / d).max(1e-9);
            (p.length as f64, d.ln(), 1.0 / (sigma * sigma))
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit("fewer than two lengths above the fidelity floor".into()));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let xm = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ym = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("lengths do not vary".into()));
    }
    let slope = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.1 - ym)).sum::<f64>() / sxx;
    let intercept = ym - slope * xm;
    let dof = (pts.len() as f64 - 2.0).max(1.0);
    let chi2: f64 = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum();
    let inflate = if pts.len() > 2 { (chi2 / dof).max(1.0) } else { 1.0 };
    let slope_se = (inflate / sxx).sqrt();
    let p = slope.exp();
    Ok(RbFit { p, amplitude: intercept.exp(), epg: 0.5 * (1.0 - p), epg_std_error: 0.5 * p * slope_se })
}

/// Simulate the benchmarking experiment under a dephasing bath.
pub fn run_rb(cfg: &RbConfig, spec_z: Option<&NoiseSpectrum>) -> Result<RbResult> {
    cfg.validate()?;
    if let Some(s) = spec_z {
        s.validate()?;
        if s.quadrature != Quadrature::Dephasing {
            return Err(Error::InvalidArgument("benchmarking bath must be dephasing".into()));
        }
    }
    let gates = GateSet::new(cfg)?;
    let table_c = CorrectionTable::new();
    let delta = cfg.injected_error.map(|e| 2.0 * (1.5 * e).sqrt().asin());
    let mut table = Vec::with_capacity(cfg.lengths.len());
    for (li, &length) in cfg.lengths.iter().enumerate() {
        let per_rand = (0..cfg.randomizations)
            .into_par_iter()
            .map(|r| {
                let stream = (li as u64) << 32 | r as u64;
                let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
                rng.set_stream(stream);
                let pulses = draw_sequence(length, &mut rng, &table_c)?;
                if let Some(delta) = delta {
                    return run_once(&pulses, length, &gates, None, Some((delta, &mut rng)));
                }
                let Some(spec) = spec_z else {
                    return run_once(&pulses, length, &gates, None, None);
                };
                let mut acc = 0.0;
                for k in 0..cfg.realizations {
                    let n = draw_realization(spec, cfg.seed, stream * cfg.realizations as u64 + k as u64);
                    acc += run_once(&pulses, length, &gates, Some(&n), None)?;
                }
                Ok(acc / cfg.realizations as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (mean, se) = mean_and_stderr(&per_rand);
        table.push(RbPoint { length, mean_fidelity: mean, std_error: se });
    }
    let (fit, fit_error) = match fit_decay(&table) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(RbResult { config: cfg.clone(), table, fit, fit_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_covers_group() {
        let t = CorrectionTable::new();
        // the single-qubit Clifford group has 24 elements up to phase
        assert_eq!(t.len(), 24);
    }

    #[test]
    fn closure_for_random_draws() {
        let t = CorrectionTable::new();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for i in 0..1000 {
            let s = draw_sequence(1 + i % 17, &mut rng, &t).unwrap();
            assert!(is_equatorial_pi(&ideal_product(&s)));
        }
    }

    #[test]
    fn noiseless_is_perfect() {
        let cfg = RbConfig { lengths: vec![1, 3, 5], randomizations: 5, realizations: 2, ..RbConfig::default() };
        let r = run_rb(&cfg, None).unwrap();
        for p in &r.table {
            assert!((p.mean_fidelity - 1.0).abs() < 1e-12);
        }
        let w1 = RbConfig { pi_implementation: PiImplementation::W1, ..cfg };
        let spec = NoiseSpectrum::white(Quadrature::Dephasing, 0.0, 0.1, 5);
        let r = run_rb(&w1, Some(&spec)).unwrap();
        assert!(r.table.iter().all(|p| (p.mean_fidelity - 1.0).abs() < 1e-10));
    }

    #[test]
    fn injected_error_recovered() {
        let eps = 0.01;
        let cfg = RbConfig {
            lengths: vec![1, 5, 10, 20, 40],
            randomizations: 400,
            injected_error: Some(eps),
            ..RbConfig::default()
        };
        let r = run_rb(&cfg, None).unwrap();
        let f = r.fit.unwrap();
        assert!((f.epg / eps - 1.0).abs() < 0.1, "{f:?}");
    }

    #[test]
    fn config_checked() {
        let bad = RbConfig { lengths: vec![3, 2], ..RbConfig::default() };
        assert!(run_rb(&bad, None).is_err());
        let bad = RbConfig { randomizations: 0, ..RbConfig::default() };
        assert!(run_rb(&bad, None).is_err());
    }
}
