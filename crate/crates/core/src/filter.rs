//! Toggling-frame control trajectories and filter-transfer functions.
//!
//! With `U_c^dag sigma_i U_c = sum_j R_ij sigma_j`, dephasing noise couples
//! through the z-row of `R` and amplitude noise through the image of the drive
//! axis. The filter functions are
//!
//! ```text
//! F_z(w) = w^2 |int_0^tau R_z(t) e^{iwt} dt|^2
//! F_O(w) = w^2 |int_0^tau (Omega_max/2) R_phi(t) e^{iwt} dt|^2
//! ```
//!
//! normalized so that `<a_1^2> = (1/pi) int_0^inf S(w) F(w) / w^2 dw`. Each
//! substep rotates at a constant rate about a fixed axis, so the integrals are
//! evaluated in closed form.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cross, dot, Mat3};
use crate::noise::Quadrature;
use crate::pulse::{Envelope, PulseSequence};

/// Grid density of [`default_grid`].
pub const POINTS_PER_DECADE: usize = 50;

/// Minimum substeps per segment accepted by [`control_trajectory`].
pub const MIN_SUBSTEPS: usize = 8;

const UNDERFLOW: f64 = 1e-300;

/// How amplitude noise is weighted inside shaped segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmplitudeWeight {
    /// `Omega_max / 2` for the whole segment.
    #[default]
    Peak,
    /// The instantaneous envelope `Omega(t) / 2`.
    Envelope,
}

/// One piece of the trajectory with a constant rotation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Substep {
    pub t0: f64,
    pub h: f64,
    pub axis: [f64; 3],
    /// Mean Rabi rate over the substep.
    pub rate: f64,
    /// Envelope peak of the enclosing segment.
    pub rabi_peak: f64,
    pub segment: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrajectory {
    pub label: String,
    /// Substep boundaries, `times[0] = 0`, `times[K] = tau`.
    pub times: Vec<f64>,
    /// `R(t)` at each boundary.
    pub rotors: Vec<Mat3>,
    pub substeps: Vec<Substep>,
    pub amplitude_weight: AmplitudeWeight,
}

/// Resolve `seq` into `ns` substeps per segment.
pub fn control_trajectory(seq: &PulseSequence, ns: usize) -> Result<ControlTrajectory> {
    if ns < MIN_SUBSTEPS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SUBSTEPS} substeps, got {ns}")));
    }
    let mut times = vec![0.0];
    let mut rotors = vec![Mat3::IDENTITY];
    let mut substeps = Vec::with_capacity(seq.len() * ns);
    let mut r = Mat3::IDENTITY;
    let mut t = 0.0;
    for (index, seg) in seq.segments.iter().enumerate() {
        let h = seg.tau / ns as f64;
        let axis = seg.axis();
        let seg_start = t;
        for k in 0..ns {
            let s0 = k as f64 * h;
            let angle = match seg.envelope {
                Envelope::Square => seg.rabi_peak * h,
                Envelope::Gaussian { .. } => seg.angle_at(s0 + h) - seg.angle_at(s0),
            };
            substeps.push(Substep { t0: t, h, axis, rate: angle / h, rabi_peak: seg.rabi_peak, segment: index });
            r = Mat3::rotation(axis, angle).mul(&r);
            // land exactly on the segment end
            t = if k + 1 == ns { seg_start + seg.tau } else { t + h };
            times.push(t);
            rotors.push(r);
        }
    }
    Ok(ControlTrajectory {
        label: seq.label.clone(),
        times,
        rotors,
        substeps,
        amplitude_weight: AmplitudeWeight::Peak,
    })
}

/// `int_0^h e^{iks} ds`, written to stay accurate as `k h -> 0`.
fn phase_integral(k: f64, h: f64) -> Complex64 {
    let x = k * h;
    let sinc = |y: f64| if y.abs() < 1e-4 { 1.0 - y * y / 6.0 + y.powi(4) / 120.0 } else { y.sin() / y };
    let half = sinc(0.5 * x);
    Complex64::new(h * sinc(x), h * 0.5 * x * half * half)
}

/// `int_0^h s^k e^{i kappa s} ds`.
fn power_phase_integral(k: u32, kappa: f64, h: f64) -> Complex64 {
    let x = kappa * h;
    if x.abs() < 1.0 {
        // sum_m (i x)^m / (m! (m + k + 1)) scaled by h^{k+1}
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..40u32 {
            acc += term / (m + k + 1) as f64;
            term *= Complex64::new(0.0, x) / (m + 1) as f64;
        }
        return acc * h.powi(k as i32 + 1);
    }
    let i_kappa = Complex64::new(0.0, kappa);
    let end = Complex64::from_polar(1.0, x);
    let mut p = (end - 1.0) / i_kappa;
    for j in 1..=k {
        p = (end * h.powi(j as i32) - p * j as f64) / i_kappa;
    }
    p
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl ControlTrajectory {
    pub fn with_amplitude_weight(mut self, w: AmplitudeWeight) -> Self {
        self.amplitude_weight = w;
        self
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().expect("trajectory has boundaries")
    }

    /// `int_0^tau q(t) e^{iwt} dt` for the chosen quadrature, as a complex 3-vector.
    pub fn integral(&self, which: Quadrature, omega: f64) -> [Complex64; 3] {
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for (i, sub) in self.substeps.iter().enumerate() {
            let r = &self.rotors[i];
            let phase = Complex64::from_polar(1.0, omega * sub.t0);
            let n = sub.axis;
            let row: [Complex64; 3] = match which {
                Quadrature::Dephasing => {
                    let e = [0.0, 0.0, 1.0];
                    let ne = dot(n, e);
                    let par = n.map(|v| v * ne);
                    let perp = [e[0] - par[0], e[1] - par[1], e[2] - par[2]];
                    let nxe = cross(n, e);
                    let w = sub.rate;
                    let e0 = phase_integral(omega, sub.h);
                    let ep = phase_integral(omega + w, sub.h);
                    let em = phase_integral(omega - w, sub.h);
                    let ec = (ep + em) * 0.5;
                    let es = (ep - em) / Complex64::new(0.0, 2.0);
                    let mut q = [Complex64::new(0.0, 0.0); 3];
                    for j in 0..3 {
                        q[j] = e0 * par[j] + ec * perp[j] - es * nxe[j];
                    }
                    q
                }
                Quadrature::Amplitude => {
                    let weight = match self.amplitude_weight {
                        AmplitudeWeight::Peak => 0.5 * sub.rabi_peak,
                        AmplitudeWeight::Envelope => 0.5 * sub.rate,
                    };
                    let e0 = phase_integral(omega, sub.h) * weight;
                    n.map(|v| e0 * v)
                }
            };
            // row vector q^T R(t0)
            for (j, a) in acc.iter_mut().enumerate() {
                *a += phase * (row[0] * r.0[0][j] + row[1] * r.0[1][j] + row[2] * r.0[2][j]);
            }
        }
        acc
    }

    /// Filter function at a single frequency.
    pub fn filter_value(&self, which: Quadrature, omega: f64) -> f64 {
        let v = self.integral(which, omega);
        let f = omega * omega * v.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if f < UNDERFLOW {
            0.0
        } else {
            f
        }
    }

    /// Time moment `int_0^tau t^k q(t) dt`. The low-frequency expansion of the
    /// filter function starts at `w^{2(j+1)}` when moments `0..j` vanish.
    pub fn moment(&self, which: Quadrature, k: u32) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for (i, sub) in self.substeps.iter().enumerate() {
            let r = &self.rotors[i];
            let n = sub.axis;
            let mut row = [0.0; 3];
            // (t0 + s)^k expanded in powers of s
            for j in 0..=k {
                let c = binomial(k, j) * sub.t0.powi((k - j) as i32);
                if c == 0.0 {
                    continue;
                }
                let q = match which {
                    Quadrature::Dephasing => {
                        let e = [0.0, 0.0, 1.0];
                        let ne = dot(n, e);
                        let par = n.map(|v| v * ne);
                        let perp = [e[0] - par[0], e[1] - par[1], e[2] - par[2]];
                        let nxe = cross(n, e);
                        let p0 = power_phase_integral(j, 0.0, sub.h).re;
                        let pw = power_phase_integral(j, sub.rate, sub.h);
                        [0, 1, 2].map(|m| p0 * par[m] + pw.re * perp[m] - pw.im * nxe[m])
                    }
                    Quadrature::Amplitude => {
                        let weight = match self.amplitude_weight {
                            AmplitudeWeight::Peak => 0.5 * sub.rabi_peak,
                            AmplitudeWeight::Envelope => 0.5 * sub.rate,
                        };
                        let p0 = power_phase_integral(j, 0.0, sub.h).re * weight;
                        n.map(|v| p0 * v)
                    }
                };
                for m in 0..3 {
                    row[m] += c * q[m];
                }
            }
            for (j, a) in acc.iter_mut().enumerate() {
                *a += row[0] * r.0[0][j] + row[1] * r.0[1][j] + row[2] * r.0[2][j];
            }
        }
        acc
    }

    /// Static first-order error vector `int_0^tau q(t) dt`.
    pub fn static_error_vector(&self, which: Quadrature) -> [f64; 3] {
        self.integral(which, 0.0).map(|c| c.re)
    }
}

/// Anything that yields filter-function values at arbitrary frequencies.
pub trait FrequencyResponse {
    fn response(&self, which: Quadrature, omega: f64) -> Result<f64>;
}

impl FrequencyResponse for ControlTrajectory {
    fn response(&self, which: Quadrature, omega: f64) -> Result<f64> {
        Ok(self.filter_value(which, omega))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterFunction {
    pub label: String,
    pub omegas: Vec<f64>,
    pub fz: Vec<f64>,
    pub fomega: Vec<f64>,
}

/// Log-spaced grid from `lo` to `hi` with `per_decade` points per decade.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && per_decade > 0) {
        return Err(Error::Grid(format!("invalid grid [{lo}, {hi}] with {per_decade} points per decade")));
    }
    let (a, b) = (lo.log10(), hi.log10());
    let n = ((b - a) * per_decade as f64).round().max(1.0) as usize;
    Ok((0..=n).map(|i| 10f64.powf(a + (b - a) * i as f64 / n as f64)).collect())
}

/// `w tau` from 1e-9 to 1e3 at 50 points per decade.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-9, 1e3, POINTS_PER_DECADE).expect("static grid is valid")
}

/// Evaluate both filter functions on `omegas`.
pub fn filter_functions(traj: &ControlTrajectory, omegas: &[f64]) -> Result<FilterFunction> {
    if omegas.is_empty() {
        return Err(Error::Grid("empty frequency grid".into()));
    }
    if omegas.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::Grid("frequencies must be positive and finite".into()));
    }
    if omegas.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Grid("frequencies must be strictly ascending".into()));
    }
    let values: Vec<(f64, f64)> = omegas
        .par_iter()
        .map(|&w| (traj.filter_value(Quadrature::Dephasing, w), traj.filter_value(Quadrature::Amplitude, w)))
        .collect();
    Ok(FilterFunction {
        label: traj.label.clone(),
        omegas: omegas.to_vec(),
        fz: values.iter().map(|v| v.0).collect(),
        fomega: values.iter().map(|v| v.1).collect(),
    })
}

/// Convenience: trajectory plus filter functions on the default grid.
pub fn sequence_filter(seq: &PulseSequence, ns: usize) -> Result<FilterFunction> {
    filter_functions(&control_trajectory(seq, ns)?, &default_grid())
}

impl FilterFunction {
    pub fn values(&self, which: Quadrature) -> &[f64] {
        match which {
            Quadrature::Dephasing => &self.fz,
            Quadrature::Amplitude => &self.fomega,
        }
    }

    pub fn omega_max(&self) -> f64 {
        *self.omegas.last().expect("non-empty grid")
    }

    pub fn omega_min(&self) -> f64 {
        self.omegas[0]
    }

    /// Log-log interpolation.
    pub fn interpolate(&self, which: Quadrature, omega: f64) -> Result<f64> {
        let (lo, hi) = (self.omega_min(), self.omega_max());
        let tol = 1e-12;
        if omega < lo * (1.0 - tol) || omega > hi * (1.0 + tol) {
            return Err(Error::SupportCoverage { cutoff: omega, grid_max: hi });
        }
        let f = self.values(which);
        let i = match self.omegas.binary_search_by(|w| w.partial_cmp(&omega).expect("finite grid")) {
            Ok(i) => return Ok(f[i]),
            Err(i) => i.clamp(1, self.omegas.len() - 1),
        };
        let (w0, w1) = (self.omegas[i - 1], self.omegas[i]);
        let (f0, f1) = (f[i - 1], f[i]);
        if f0 <= 0.0 || f1 <= 0.0 {
            let s = (omega - w0) / (w1 - w0);
            return Ok(f0 + s * (f1 - f0));
        }
        let s = (omega / w0).ln() / (w1 / w0).ln();
        Ok((f0.ln() + s * (f1 / f0).ln()).exp())
    }

    /// CSV with header `omega_tau,omega_over_2pi,F_z,F_omega`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega_tau,omega_over_2pi,F_z,F_omega\n");
        for i in 0..self.omegas.len() {
            let w = self.omegas[i];
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e}\n",
                w,
                w / std::f64::consts::TAU,
                self.fz[i],
                self.fomega[i]
            ));
        }
        out
    }
}

impl FrequencyResponse for FilterFunction {
    fn response(&self, which: Quadrature, omega: f64) -> Result<f64> {
        self.interpolate(which, omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterOrderEstimate {
    pub band: [f64; 2],
    pub slope: f64,
    /// `p*`, half the slope; the local filter order is `p* - 1`.
    pub p_star: f64,
    pub residual: f64,
    pub points: usize,
}

impl FilterOrderEstimate {
    pub fn local_order(&self) -> f64 {
        self.p_star - 1.0
    }
}

/// Least-squares slope of `log F` against `log w` over `band`.
pub fn filter_order(ff: &FilterFunction, band: [f64; 2], which: Quadrature) -> Result<FilterOrderEstimate> {
    let [lo, hi] = band;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Band(format!("invalid band [{lo}, {hi}]")));
    }
    if lo < ff.omega_min() * (1.0 - 1e-12) || hi > ff.omega_max() * (1.0 + 1e-12) {
        return Err(Error::Band(format!("band [{lo:e}, {hi:e}] outside the grid")));
    }
    let f = ff.values(which);
    let pts: Vec<(f64, f64)> = ff
        .omegas
        .iter()
        .zip(f)
        .filter(|(w, _)| **w >= lo * (1.0 - 1e-12) && **w <= hi * (1.0 + 1e-12))
        .map(|(w, v)| (*w, *v))
        .collect();
    if pts.len() < 10 {
        return Err(Error::Band(format!("only {} grid points in band, need 10", pts.len())));
    }
    if pts.iter().any(|(_, v)| *v <= UNDERFLOW) {
        return Err(Error::Underflow { lo, hi });
    }
    let xy: Vec<(f64, f64)> = pts.iter().map(|(w, v)| (w.log10(), v.log10())).collect();
    let (slope, _, residual) = line_fit(&xy);
    Ok(FilterOrderEstimate { band, slope, p_star: slope / 2.0, residual, points: pts.len() })
}

/// Ordinary least squares; returns `(slope, intercept, rms residual)`.
pub fn line_fit(xy: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    (slope, intercept, rms)
}

/// Frequencies where `F_a - F_b` changes sign, located by linear interpolation
/// of `ln F_a - ln F_b` in `ln w`.
pub fn find_crossovers(a: &FilterFunction, b: &FilterFunction, which: Quadrature) -> Result<Vec<f64>> {
    if a.omegas.len() != b.omegas.len()
        || a.omegas.iter().zip(&b.omegas).any(|(x, y)| (x - y).abs() > 1e-12 * x.abs())
    {
        return Err(Error::Grid("crossover search needs a shared grid".into()));
    }
    let (fa, fb) = (a.values(which), b.values(which));
    let diff: Vec<Option<f64>> = fa
        .iter()
        .zip(fb)
        .map(|(x, y)| {
            if *x <= UNDERFLOW || *y <= UNDERFLOW {
                None
            } else {
                let d = x.ln() - y.ln();
                if d.abs() < 1e-9 {
                    Some(0.0)
                } else {
                    Some(d)
                }
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for (i, d) in diff.iter().enumerate() {
        let Some(d) = *d else { continue };
        if d == 0.0 {
            continue;
        }
        if let Some((j, dj)) = last {
            if dj.signum() != d.signum() {
                let (x0, x1) = (a.omegas[j].ln(), a.omegas[i].ln());
                let s = dj / (dj - d);
                out.push((x0 + s * (x1 - x0)).exp());
            }
        }
        last = Some((i, d));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{make_primitive, make_sk1, make_wamf, PulseSegment};
    use crate::walsh::WalshSpectrum;
    use std::f64::consts::PI;

    fn idle(tau: f64) -> PulseSequence {
        PulseSequence::new("idle", vec![PulseSegment::square(0.0, tau, 0.0)]).unwrap()
    }

    #[test]
    fn moments_match_low_frequency_expansion() {
        let seq = make_sk1(PI / 2.0, 1.0).unwrap();
        let t = control_trajectory(&seq, 8).unwrap();
        for which in [Quadrature::Dephasing, Quadrature::Amplitude] {
            let m0 = t.moment(which, 0);
            let m1 = t.moment(which, 1);
            let w = 1e-4;
            let i = t.integral(which, w);
            for j in 0..3 {
                assert!((i[j].re - m0[j]).abs() < 1e-7);
                assert!((i[j].im / w - m1[j]).abs() < 1e-6);
            }
            let s = t.static_error_vector(which);
            for j in 0..3 {
                assert!((s[j] - m0[j]).abs() < 1e-13);
            }
        }
        let p = control_trajectory(&make_primitive(PI, 0.0, PI).unwrap(), 8).unwrap();
        let m0 = p.moment(Quadrature::Dephasing, 0);
        assert!((m0.iter().map(|v| v * v).sum::<f64>().sqrt() - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn idle_trajectory_is_identity() {
        let t = control_trajectory(&idle(1.0), 8).unwrap();
        assert!(t.rotors.iter().all(|r| *r == Mat3::IDENTITY));
        assert!(control_trajectory(&idle(1.0), 4).is_err());
    }

    #[test]
    fn pi_pulse_flips_z() {
        let t = control_trajectory(&make_primitive(PI, 0.0, PI).unwrap(), 8).unwrap();
        let r = t.rotors.last().unwrap();
        assert!((r.0[2][2] + 1.0).abs() < 1e-12);
        assert!((t.duration() - 1.0).abs() < 1e-15);
        for r in &t.rotors {
            assert!(r.orthogonality_defect() < 1e-9);
            assert!((r.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn free_evolution_dephasing() {
        let t = control_trajectory(&idle(1.0), 8).unwrap();
        for w in [1e-6, 0.3, 2.0, 17.0] {
            let f = t.filter_value(Quadrature::Dephasing, w);
            let want = 4.0 * (w / 2.0).sin().powi(2);
            assert!((f - want).abs() <= 1e-10 * want.max(1e-300), "{w}: {f} vs {want}");
        }
    }

    #[test]
    fn primitive_amplitude_is_single_integral() {
        let rabi = PI;
        let t = control_trajectory(&make_primitive(PI, 0.0, rabi).unwrap(), 8).unwrap();
        for w in [1e-3, 0.7, 5.0] {
            let f = t.filter_value(Quadrature::Amplitude, w);
            let want = (rabi / 2.0).powi(2) * 4.0 * (w / 2.0).sin().powi(2);
            assert!((f - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn primitive_slopes() {
        let ff = sequence_filter(&make_primitive(PI, 0.0, PI).unwrap(), 8).unwrap();
        for q in [Quadrature::Dephasing, Quadrature::Amplitude] {
            let est = filter_order(&ff, [1e-4, 1e-2], q).unwrap();
            assert!((est.slope - 2.0).abs() < 0.1, "{est:?}");
        }
    }

    #[test]
    fn sk1_amplitude_slope() {
        let ff = sequence_filter(&make_sk1(PI, 1.0).unwrap(), 8).unwrap();
        let est = filter_order(&ff, [1e-4, 1e-2], Quadrature::Amplitude).unwrap();
        assert!((est.slope - 4.0).abs() < 0.3, "{est:?}");
    }

    #[test]
    fn refinement_is_stable() {
        let spec = WalshSpectrum::from_pairs([(0, PI), (3, -5.9)]);
        let seq = make_wamf(&spec, 1.0, Envelope::Square).unwrap();
        let grid = log_grid(1e-3, 1e2, 10).unwrap();
        let a = filter_functions(&control_trajectory(&seq, 8).unwrap(), &grid).unwrap();
        let b = filter_functions(&control_trajectory(&seq, 16).unwrap(), &grid).unwrap();
        for (x, y) in a.fz.iter().zip(&b.fz).chain(a.fomega.iter().zip(&b.fomega)) {
            assert!((x - y).abs() <= 1e-3 * x.abs().max(1e-280));
        }
    }

    #[test]
    fn grid_errors() {
        let t = control_trajectory(&idle(1.0), 8).unwrap();
        assert!(filter_functions(&t, &[0.0, 1.0]).is_err());
        assert!(filter_functions(&t, &[1.0, 0.5]).is_err());
        assert_eq!(default_grid().len(), 601);
    }

    #[test]
    fn crossovers() {
        let prim = sequence_filter(&make_primitive(PI, 0.0, PI).unwrap(), 8).unwrap();
        assert!(find_crossovers(&prim, &prim, Quadrature::Amplitude).unwrap().is_empty());
        let sk1 = sequence_filter(&crate::pulse::sk1_at_rate(PI, 0.0, PI).unwrap(), 8).unwrap();
        let x = find_crossovers(&sk1, &prim, Quadrature::Amplitude).unwrap();
        assert!(x.iter().any(|w| *w < PI), "{x:?}");
    }

    #[test]
    fn interpolation_and_csv() {
        let ff = sequence_filter(&make_primitive(PI, 0.0, PI).unwrap(), 8).unwrap();
        let t = control_trajectory(&make_primitive(PI, 0.0, PI).unwrap(), 8).unwrap();
        let w = 0.0123;
        let exact = t.filter_value(Quadrature::Dephasing, w);
        let approx = ff.interpolate(Quadrature::Dephasing, w).unwrap();
        assert!((approx / exact - 1.0).abs() < 1e-3);
        assert!(ff.interpolate(Quadrature::Dephasing, 1e4).is_err());
        let csv = ff.to_csv();
        assert!(csv.starts_with("omega_tau,omega_over_2pi,F_z,F_omega\n"));
        assert_eq!(csv.lines().count(), 602);
        let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row[0], ff.omegas[0]);
        assert_eq!(row[2], ff.fz[0]);
    }

    #[test]
    fn underflow_reported() {
        let t = control_trajectory(&idle(1.0), 8).unwrap();
        let grid = log_grid(1.0, 100.0, 10).unwrap();
        let mut ff = filter_functions(&t, &grid).unwrap();
        ff.fz.iter_mut().for_each(|v| *v = 0.0);
        assert!(matches!(filter_order(&ff, [1.0, 100.0], Quadrature::Dephasing), Err(Error::Underflow { .. })));
    }
}
