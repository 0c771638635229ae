//! First-order fidelity predictions and the stopband cost functional.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{FilterFunction, FrequencyResponse};
use crate::noise::{psd_value, smallness, NoiseSpectrum, Quadrature};

/// Default synthesis stopband in units of `1/tau`.
pub const DEFAULT_STOPBAND: [f64; 2] = [1e-9, 1e-1];
/// Default stopband for Gaussian-envelope studies.
pub const GAUSSIAN_STOPBAND: [f64; 2] = [1e-9, 1e-6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub a1sq_z: f64,
    pub a1sq_omega: f64,
    pub chi: f64,
    pub f_chi: f64,
    pub f_first: f64,
    pub xi_squared: f64,
}

impl FidelityReport {
    pub fn from_a1sq(a1sq_z: f64, a1sq_omega: f64, xi_squared: f64) -> Self {
        let total = a1sq_z + a1sq_omega;
        let chi = 2.0 * total;
        FidelityReport { a1sq_z, a1sq_omega, chi, f_chi: f_chi(chi), f_first: 1.0 - total, xi_squared }
    }

    pub fn a1sq(&self) -> f64 {
        self.a1sq_z + self.a1sq_omega
    }

    /// Predicted infidelity `1 - F_chi`.
    pub fn infidelity(&self) -> f64 {
        0.5 * (1.0 - (-self.chi).exp())
    }
}

/// `F_chi = (1 + e^-chi) / 2`.
pub fn f_chi(chi: f64) -> f64 {
    0.5 * (1.0 + (-chi).exp())
}

/// `<a_1^2>` for one quadrature by exact summation over the spectral lines.
pub fn a1sq_lines<R: FrequencyResponse + ?Sized>(resp: &R, spectrum: &NoiseSpectrum) -> Result<f64> {
    let mut acc = 0.0;
    for (w, weight) in spectrum.lines() {
        if weight == 0.0 {
            continue;
        }
        acc += weight * resp.response(spectrum.quadrature, w)? / (w * w);
    }
    Ok(acc / PI)
}

/// `<a_1^2>` from the continuous envelope of a comb, by trapezoid quadrature in
/// `ln w` on the grid of `ff` from its first point up to the cutoff.
pub fn a1sq_continuous(ff: &FilterFunction, spectrum: &NoiseSpectrum) -> Result<f64> {
    let wc = spectrum.omega_c();
    if wc > ff.omega_max() * (1.0 + 1e-12) {
        return Err(Error::SupportCoverage { cutoff: wc, grid_max: ff.omega_max() });
    }
    let f = ff.values(spectrum.quadrature);
    let integrand = |w: f64, fv: f64| psd_value(spectrum, w) * fv / (w * w) * w;
    let mut pts: Vec<(f64, f64)> = ff
        .omegas
        .iter()
        .zip(f)
        .take_while(|(w, _)| **w < wc)
        .map(|(w, v)| (w.ln(), integrand(*w, *v)))
        .collect();
    pts.push((wc.ln(), integrand(wc, ff.interpolate(spectrum.quadrature, wc)?)));
    let acc: f64 = pts.windows(2).map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 + p[1].1)).sum();
    Ok(acc / PI)
}

fn check_quadrature(spec: &NoiseSpectrum, want: Quadrature) -> Result<()> {
    if spec.quadrature != want {
        return Err(Error::InvalidArgument(format!(
            "expected a {:?} spectrum, got {:?}",
            want, spec.quadrature
        )));
    }
    spec.validate()
}

/// First-order prediction for dephasing and/or amplitude noise acting on a
/// gate of duration `tau`. `xi_squared` adds the contributions of both baths.
pub fn first_order_infidelity<R: FrequencyResponse + ?Sized>(
    resp: &R,
    spec_z: Option<&NoiseSpectrum>,
    spec_omega: Option<&NoiseSpectrum>,
    tau: f64,
) -> Result<FidelityReport> {
    if spec_z.is_none() && spec_omega.is_none() {
        return Err(Error::InvalidArgument("at least one noise spectrum is required".into()));
    }
    let mut a_z = 0.0;
    let mut a_o = 0.0;
    let mut xi2 = 0.0;
    if let Some(s) = spec_z {
        check_quadrature(s, Quadrature::Dephasing)?;
        a_z = a1sq_lines(resp, s)?;
        xi2 += smallness(s, tau)?.xi_squared;
    }
    if let Some(s) = spec_omega {
        check_quadrature(s, Quadrature::Amplitude)?;
        a_o = a1sq_lines(resp, s)?;
        xi2 += smallness(s, tau)?.xi_squared;
    }
    Ok(FidelityReport::from_a1sq(a_z, a_o, xi2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostValue {
    pub band: [f64; 2],
    pub value: f64,
    pub log10_value: f64,
}

/// Positive floor for `log10` of a vanishing cost.
const COST_FLOOR: f64 = 1e-300;

/// `A = int F dw` over `band` by the trapezoid rule on the grid, with the band
/// edges added by log-log interpolation.
pub fn cost(ff: &FilterFunction, band: [f64; 2], which: Quadrature) -> Result<CostValue> {
    let [lo, hi] = band;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Band(format!("invalid band [{lo}, {hi}]")));
    }
    if lo < ff.omega_min() * (1.0 - 1e-12) || hi > ff.omega_max() * (1.0 + 1e-12) {
        return Err(Error::Band(format!("band [{lo:e}, {hi:e}] outside the grid")));
    }
    let f = ff.values(which);
    let mut pts = vec![(lo, ff.interpolate(which, lo)?)];
    pts.extend(ff.omegas.iter().zip(f).filter(|(w, _)| **w > lo && **w < hi).map(|(w, v)| (*w, *v)));
    if hi > lo {
        pts.push((hi, ff.interpolate(which, hi)?));
    }
    let value: f64 = pts.windows(2).map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 + p[1].1)).sum();
    Ok(CostValue { band, value, log10_value: value.max(COST_FLOOR).log10() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityLadder {
    /// `1 - a`.
    pub f_first: f64,
    /// `1 - a + a^2`, the next truncation of the resummed series.
    pub f_prime_first: f64,
    /// `(1 + e^{-2a}) / 2`.
    pub f_chi: f64,
}

/// Truncations of the fidelity expansion in `a = <a_1^2>`.
pub fn fidelity_ladder(a1sq: f64) -> Result<FidelityLadder> {
    if !(a1sq >= 0.0) {
        return Err(Error::InvalidArgument(format!("<a1^2> = {a1sq} must be non-negative")));
    }
    Ok(FidelityLadder {
        f_first: 1.0 - a1sq,
        f_prime_first: 1.0 - a1sq + a1sq * a1sq,
        f_chi: f_chi(2.0 * a1sq),
    })
}
