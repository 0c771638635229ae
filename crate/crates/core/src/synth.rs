//! Walsh-coefficient synthesis: cost landscapes, Nelder-Mead search and
//! verification of candidate filters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::{cost, CostValue};
use crate::filter::{
    control_trajectory, filter_functions, filter_order, line_fit, log_grid, ControlTrajectory, FilterFunction,
    FilterOrderEstimate, MIN_SUBSTEPS, POINTS_PER_DECADE,
};
use crate::noise::{smallness, NoiseSpectrum, Quadrature};
use crate::pulse::{make_wamf, Envelope, PulseSequence};
use crate::sim::{ensemble_fidelity, Observable, SimConfig};
use crate::walsh::{is_even_parity, PaleyIndex, WalshSpectrum};

/// Weight of the squared vanishing-moment residuals added to the cost.
const ORDER_PENALTY: f64 = 1e6;
/// Highest number of vanishing moments that can be requested.
pub const MAX_MOMENT_ORDER: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisProblem {
    /// Constrained coefficients; must contain `X_0`.
    pub fixed: WalshSpectrum,
    pub variational: Vec<u64>,
    pub band: [f64; 2],
    pub which: Quadrature,
    pub envelope: Envelope,
    pub tau: f64,
    pub segments: usize,
    pub cal_only: bool,
    /// Number of low-frequency moments `int t^k q(t) dt` forced to zero.
    #[serde(default)]
    pub moment_order: u32,
    #[serde(default)]
    pub rabi_max: Option<f64>,
    #[serde(default = "default_ppd")]
    pub points_per_decade: usize,
}

fn default_ppd() -> usize {
    POINTS_PER_DECADE
}

impl SynthesisProblem {
    /// Four-segment problem over `X_3` at fixed `X_0`.
    pub fn wamf1(x0: f64, band: [f64; 2], which: Quadrature) -> Self {
        SynthesisProblem {
            fixed: WalshSpectrum::from_pairs([(0, x0)]),
            variational: vec![3],
            band,
            which,
            envelope: Envelope::Square,
            tau: 1.0,
            segments: 4,
            cal_only: true,
            moment_order: 0,
            rabi_max: None,
            points_per_decade: POINTS_PER_DECADE,
        }
    }

    /// Eight-segment problem over the even-parity indices below 8.
    pub fn wamf2(x0: f64, band: [f64; 2], which: Quadrature) -> Self {
        SynthesisProblem { variational: vec![3, 5, 6], segments: 8, ..Self::wamf1(x0, band, which) }
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = envelope;
        self
    }

    pub fn with_moment_order(mut self, order: u32) -> Self {
        self.moment_order = order;
        self
    }

    pub fn x0(&self) -> f64 {
        self.fixed.get(0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.fixed.iter().any(|(k, _)| k == 0) {
            return Err(Error::InvalidArgument("X_0 must be among the fixed coefficients".into()));
        }
        if !(self.segments.is_power_of_two()) {
            return Err(Error::InvalidArgument(format!("segment count {} is not a power of two", self.segments)));
        }
        for (i, &k) in self.variational.iter().enumerate() {
            if self.fixed.iter().any(|(f, _)| f == k) || self.variational[..i].contains(&k) {
                return Err(Error::InvalidArgument(format!("index {k} is repeated or also fixed")));
            }
            if self.cal_only && !is_even_parity(PaleyIndex(k)) {
                return Err(Error::InvalidArgument(format!("index {k} has odd parity but the problem is CAL-only")));
            }
        }
        let top = self.fixed.iter().map(|(k, _)| k).chain(self.variational.iter().copied()).max().unwrap_or(0);
        if top as usize >= self.segments {
            return Err(Error::InvalidArgument(format!("index {top} needs more than {} segments", self.segments)));
        }
        let [lo, hi] = self.band;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Band(format!("invalid band [{lo}, {hi}]")));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidArgument("tau must be positive".into()));
        }
        if self.moment_order > MAX_MOMENT_ORDER {
            return Err(Error::InvalidArgument(format!("moment order above {MAX_MOMENT_ORDER}")));
        }
        if self.points_per_decade == 0 {
            return Err(Error::Grid("points per decade must be positive".into()));
        }
        Ok(())
    }

    /// Full spectrum for variational values `x`.
    pub fn spectrum(&self, x: &[f64]) -> WalshSpectrum {
        let mut s = self.fixed.clone();
        for (k, v) in self.variational.iter().zip(x) {
            s.set(*k, *v);
        }
        // pin the resolution even when the top coefficients are absent
        let n = self.segments.trailing_zeros();
        if s.log2_segments() < n {
            s.set((1u64 << n) - 1, s.get((1u64 << n) - 1));
        }
        s
    }

    pub fn sequence(&self, x: &[f64]) -> Result<PulseSequence> {
        make_wamf(&self.spectrum(x), self.tau, self.envelope)
    }

    fn substeps(&self) -> usize {
        match self.envelope {
            Envelope::Square => MIN_SUBSTEPS,
            Envelope::Gaussian { .. } => crate::pulse::DEFAULT_GAUSSIAN_SUBSTEPS,
        }
    }

    pub fn trajectory(&self, x: &[f64]) -> Result<ControlTrajectory> {
        control_trajectory(&self.sequence(x)?, self.substeps())
    }

    /// Frequency grid covering the band, or the single band point.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let [lo, hi] = self.band;
        if hi == lo {
            return Ok(vec![lo]);
        }
        log_grid(lo, hi, self.points_per_decade)
    }

    /// Stopband cost of `x`.
    pub fn cost(&self, x: &[f64]) -> Result<CostValue> {
        let traj = self.trajectory(x)?;
        band_cost(&traj, &self.grid()?, self.band, self.which)
    }

    /// Normalized moment residuals `int (t/tau)^k q dt / tau` for `k < moment_order`.
    pub fn moment_residuals(&self, traj: &ControlTrajectory) -> Vec<f64> {
        (0..self.moment_order)
            .flat_map(|k| {
                let scale = self.tau.powi(k as i32 + 1);
                traj.moment(self.which, k).map(|v| v / scale)
            })
            .collect()
    }

    /// Minimized quantity: `log10(A + P |m|^2)`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let Ok(traj) = self.trajectory(x) else {
            return f64::INFINITY;
        };
        let Ok(grid) = self.grid() else {
            return f64::INFINITY;
        };
        let Ok(c) = band_cost(&traj, &grid, self.band, self.which) else {
            return f64::INFINITY;
        };
        let penalty: f64 = self.moment_residuals(&traj).iter().map(|v| v * v).sum::<f64>() * ORDER_PENALTY;
        (c.value + penalty).max(1e-300).log10()
    }
}

/// Trapezoid cost on a grid that spans exactly `band`.
fn band_cost(traj: &ControlTrajectory, grid: &[f64], band: [f64; 2], which: Quadrature) -> Result<CostValue> {
    if grid.len() == 1 {
        return Ok(CostValue { band, value: 0.0, log10_value: -300.0 });
    }
    let f: Vec<f64> = grid.iter().map(|&w| traj.filter_value(which, w)).collect();
    let ff = FilterFunction {
        label: traj.label.clone(),
        omegas: grid.to_vec(),
        fz: if which == Quadrature::Dephasing { f.clone() } else { vec![0.0; f.len()] },
        fomega: if which == Quadrature::Amplitude { f } else { vec![0.0; grid.len()] },
    };
    cost(&ff, band, which)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiViolation {
    pub row: usize,
    pub col: usize,
    pub max_rabi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeScan {
    pub x0s: Vec<f64>,
    pub x3s: Vec<f64>,
    /// `log10_cost[i][j]` at `(x0s[i], x3s[j])`.
    pub log10_cost: Vec<Vec<f64>>,
    pub band: [f64; 2],
    pub which: Quadrature,
    pub envelope: Envelope,
    pub tau: f64,
    pub rabi_violations: Vec<RabiViolation>,
}

impl LandscapeScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x0,x3,log10_cost\n");
        for (i, x0) in self.x0s.iter().enumerate() {
            for (j, x3) in self.x3s.iter().enumerate() {
                out.push_str(&format!("{x0:e},{x3:e},{:e}\n", self.log10_cost[i][j]));
            }
        }
        out
    }

    /// Column index and value of the smallest cost in row `i`.
    pub fn row_minimum(&self, i: usize) -> (usize, f64) {
        self.log10_cost[i]
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (j, v)| if v < best.1 { (j, v) } else { best })
    }

    /// Interior local minima of row `i`, as column indices.
    pub fn interior_minima(&self, i: usize) -> Vec<usize> {
        let r = &self.log10_cost[i];
        (1..r.len().saturating_sub(1)).filter(|&j| r[j] < r[j - 1] && r[j] <= r[j + 1]).collect()
    }
}

/// Evaluate the four-segment `(X_0, X_3)` landscape of `problem`'s band,
/// quadrature, envelope and duration.
pub fn scan_landscape(problem: &SynthesisProblem, x0s: &[f64], x3s: &[f64]) -> Result<LandscapeScan> {
    if x0s.is_empty() || x3s.is_empty() {
        return Err(Error::Grid("scan grids must be non-empty".into()));
    }
    let template = SynthesisProblem {
        fixed: WalshSpectrum::from_pairs([(0, 0.0)]),
        variational: vec![3],
        segments: 4,
        cal_only: true,
        moment_order: 0,
        ..problem.clone()
    };
    template.validate()?;
    let grid = template.grid()?;
    let cells: Vec<(usize, usize)> = (0..x0s.len()).flat_map(|i| (0..x3s.len()).map(move |j| (i, j))).collect();
    let values = cells
        .par_iter()
        .map(|&(i, j)| {
            let mut p = template.clone();
            p.fixed.set(0, x0s[i]);
            let seq = p.sequence(&[x3s[j]])?;
            let traj = control_trajectory(&seq, p.substeps())?;
            let c = band_cost(&traj, &grid, p.band, p.which)?;
            let violation = problem
                .rabi_max
                .filter(|lim| seq.max_rabi() > *lim * (1.0 + 1e-12))
                .map(|_| RabiViolation { row: i, col: j, max_rabi: seq.max_rabi() });
            Ok((c.log10_value, violation))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut log10_cost = vec![vec![0.0; x3s.len()]; x0s.len()];
    let mut rabi_violations = Vec::new();
    for (&(i, j), (v, viol)) in cells.iter().zip(values) {
        log10_cost[i][j] = v;
        rabi_violations.extend(viol);
    }
    Ok(LandscapeScan {
        x0s: x0s.to_vec(),
        x3s: x3s.to_vec(),
        log10_cost,
        band: problem.band,
        which: problem.which,
        envelope: problem.envelope,
        tau: problem.tau,
        rabi_violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Relative spread of the simplex values at convergence.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    /// Initial simplex edge and restart jitter scale.
    pub step: f64,
    pub seed: u64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            tolerance: 1e-10,
            max_iterations: 2000,
            restarts: 8,
            step: 1.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex minimization of `f` from `start`.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], step: f64, opts: &NelderMeadOptions) -> Minimum {
    let n = start.len();
    if n == 0 {
        return Minimum { x: vec![], value: f(&[]), iterations: 0, converged: true };
    }
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        let (best, worst) = (values[0], values[n]);
        let size = simplex[1..].iter().map(|v| dist(v, &simplex[0])).fold(0.0, f64::max);
        if (worst - best).abs() <= opts.tolerance * best.abs().max(1e-300) || size < 1e-15 {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let along = |c: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + c * (simplex[n][j] - centroid[j])).collect() };
        let xr = along(-opts.reflection);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-opts.reflection * opts.expansion);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let x = along(-opts.reflection * opts.contraction);
            let v = f(&x);
            (x, v)
        } else {
            let x = along(opts.contraction);
            let v = f(&x);
            (x, v)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            for j in 0..n {
                simplex[i][j] = simplex[0][j] + opts.shrink * (simplex[i][j] - simplex[0][j]);
            }
            values[i] = f(&simplex[i]);
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum { x: simplex[best].clone(), value: values[best], iterations, converged }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub spectrum: WalshSpectrum,
    pub x: Vec<f64>,
    pub tau: f64,
    pub envelope: Envelope,
    pub band: [f64; 2],
    pub cost: CostValue,
    pub objective: f64,
    /// Largest normalized moment residual after polishing.
    pub moment_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Multi-start Nelder-Mead over the variational coefficients. Restart 0
/// starts at `start`; the others at seeded perturbations of it.
pub fn optimize(problem: &SynthesisProblem, start: &[f64], opts: &NelderMeadOptions) -> Result<Solution> {
    problem.validate()?;
    if start.len() != problem.variational.len() {
        return Err(Error::InvalidArgument(format!(
            "start has {} values for {} variational coefficients",
            start.len(),
            problem.variational.len()
        )));
    }
    let runs: Vec<Minimum> = (0..=opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut x = start.to_vec();
            if r > 0 {
                let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
                rng.set_stream(r as u64);
                x.iter_mut().for_each(|v| *v += opts.step * rng.gen_range(-1.0..1.0));
            }
            nelder_mead(|x| problem.objective(x), &x, opts.step, opts)
        })
        .collect();
    let iterations = runs.iter().map(|m| m.iterations).sum();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one run");
    if !best.value.is_finite() {
        return Err(Error::InvalidArgument("no start produced a finite cost".into()));
    }
    let x = if problem.moment_order > 0 { polish_moments(problem, &best.x)? } else { best.x.clone() };
    let traj = problem.trajectory(&x)?;
    let moment_residual = problem.moment_residuals(&traj).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Solution {
        spectrum: problem.spectrum(&x),
        cost: problem.cost(&x)?,
        objective: problem.objective(&x),
        moment_residual,
        x,
        tau: problem.tau,
        envelope: problem.envelope,
        band: problem.band,
        iterations,
        converged: best.converged,
    })
}

/// Levenberg-Marquardt projection of `x` onto the vanishing-moment set.
pub fn polish_moments(problem: &SynthesisProblem, x: &[f64]) -> Result<Vec<f64>> {
    let residual = |x: &[f64]| -> Result<Vec<f64>> { Ok(problem.moment_residuals(&problem.trajectory(x)?)) };
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let n = x.len();
    let mut x = x.to_vec();
    let mut r = residual(&x)?;
    let mut lambda = 1e-6;
    for _ in 0..100 {
        if norm(&r).sqrt() < 1e-15 {
            break;
        }
        // central-difference Jacobian
        let mut jac = vec![vec![0.0; n]; r.len()];
        for j in 0..n {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (rp, rm) = (residual(&xp)?, residual(&xm)?);
            for i in 0..r.len() {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let mut a = vec![vec![0.0; n]; n];
        let mut g = vec![0.0; n];
        for i in 0..r.len() {
            for p in 0..n {
                g[p] += jac[i][p] * r[i];
                for q in 0..n {
                    a[p][q] += jac[i][p] * jac[i][q];
                }
            }
        }
        let scale = (0..n).map(|p| a[p][p]).fold(0.0, f64::max).max(1e-300);
        let mut improved = false;
        for _ in 0..20 {
            let mut m = a.clone();
            for (p, row) in m.iter_mut().enumerate() {
                row[p] += lambda * scale;
            }
            let Some(step) = solve(m, g.iter().map(|v| -v).collect()) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            let rt = residual(&trial)?;
            if norm(&rt) < norm(&r) {
                x = trial;
                r = rt;
                lambda = (lambda * 0.1).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok(x)
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for k in c..n {
                a[i][k] -= f * a[c][k];
            }
            b[i] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Widest sub-band of `band` on which every one-decade window of `ff` has a
/// fitted slope of at least `min_slope`.
pub fn certified_subband(
    ff: &FilterFunction,
    band: [f64; 2],
    which: Quadrature,
    min_slope: f64,
) -> Option<FilterOrderEstimate> {
    let pts: Vec<(f64, f64)> = ff
        .omegas
        .iter()
        .zip(ff.values(which))
        .filter(|(w, _)| **w >= band[0] * (1.0 - 1e-12) && **w <= band[1] * (1.0 + 1e-12))
        .map(|(w, v)| (*w, *v))
        .collect();
    let window = pts.iter().take_while(|(w, _)| *w <= pts[0].0 * 10.0 * (1.0 + 1e-9)).count();
    if window < 10 || pts.len() < window {
        return None;
    }
    let ok: Vec<bool> = (0..=pts.len() - window)
        .map(|i| {
            let w = &pts[i..i + window];
            if w.iter().any(|(_, v)| *v <= 0.0) {
                return false;
            }
            let xy: Vec<(f64, f64)> = w.iter().map(|(a, b)| (a.log10(), b.log10())).collect();
            line_fit(&xy).0 >= min_slope
        })
        .collect();
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < ok.len() {
        if !ok[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < ok.len() && ok[i] {
            i += 1;
        }
        if best.is_none_or(|(s, e)| i - start > e - s) {
            best = Some((start, i));
        }
    }
    let (s, e) = best?;
    let sub = [pts[s].0, pts[e - 1 + window - 1].0];
    filter_order(ff, sub, which).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Target `xi^2` of the stopband-confined white comb.
    pub xi_squared: f64,
    pub teeth: usize,
    pub realizations: usize,
    pub seed: u64,
    /// Slope required to claim a filtering gain.
    pub min_slope: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { xi_squared: 0.01, teeth: 50, realizations: 200, seed: 11, min_slope: 2.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub infidelity_a: f64,
    pub infidelity_b: f64,
    /// Mean of `infidelity_b - infidelity_a` over shared realizations.
    pub difference: f64,
    pub difference_std_error: f64,
}

impl PairedComparison {
    /// Separation of the difference in units of its standard error.
    pub fn sigma(&self) -> f64 {
        if self.difference_std_error == 0.0 {
            if self.difference == 0.0 {
                0.0
            } else {
                f64::INFINITY * self.difference.signum()
            }
        } else {
            self.difference / self.difference_std_error
        }
    }
}

/// Gate infidelities of `a` and `b` under identical noise realizations.
pub fn paired_infidelity(
    a: &PulseSequence,
    b: &PulseSequence,
    spec: &NoiseSpectrum,
    cfg: &SimConfig,
) -> Result<PairedComparison> {
    let cfg = SimConfig { observable: Observable::TraceFidelity, ..*cfg };
    let run = |s: &PulseSequence| match spec.quadrature {
        Quadrature::Dephasing => ensemble_fidelity(s, Some(spec), None, &cfg),
        Quadrature::Amplitude => ensemble_fidelity(s, None, Some(spec), &cfg),
    };
    let (ra, rb) = (run(a)?, run(b)?);
    let diffs: Vec<f64> = ra.per_realization.iter().zip(&rb.per_realization).map(|(fa, fb)| fa - fb).collect();
    let (d, se) = crate::sim::mean_and_stderr(&diffs);
    Ok(PairedComparison {
        infidelity_a: 1.0 - ra.mean_fidelity,
        infidelity_b: 1.0 - rb.mean_fidelity,
        difference: d,
        difference_std_error: se,
    })
}

/// White comb in `which` with cutoff at the top of `band`, scaled to `xi_squared` for a gate of duration `tau`.
pub fn stopband_noise(which: Quadrature, band: [f64; 2], tau: f64, xi_squared: f64, teeth: usize) -> Result<NoiseSpectrum> {
    let unit = NoiseSpectrum::white(which, 1.0, band[1], teeth);
    let xi2 = smallness(&unit, tau)?.xi_squared;
    Ok(unit.scaled(xi_squared / xi2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub order: FilterOrderEstimate,
    pub cost: CostValue,
    pub primitive_cost: CostValue,
    /// Orders of magnitude of cost below the unmodulated gate.
    pub cost_gain: f64,
    /// Factor by which the sequence was stretched to respect `rabi_max`.
    pub rescale_factor: Option<f64>,
    pub oracle: PairedComparison,
    pub filtering_gain: bool,
    pub oracle_gain: bool,
    pub notes: Vec<String>,
}

/// Check a candidate spectrum: stopband slope, cost against the unmodulated
/// gate of equal rotation, and a paired weak-noise simulation.
pub fn verify_filter(spectrum: &WalshSpectrum, problem: &SynthesisProblem, opts: &VerifyOptions) -> Result<VerifyReport> {
    problem.validate()?;
    let mut notes = Vec::new();
    let mut seq = make_wamf(spectrum, problem.tau, problem.envelope)?;
    let primitive_spec = WalshSpectrum::from_pairs([(0, spectrum.get(0))]);
    let mut prim = make_wamf(&primitive_spec, problem.tau, problem.envelope)?;
    let mut rescale_factor = None;
    if let Some(limit) = problem.rabi_max {
        let factor = seq.rescale_to_rabi_max(limit)?;
        if factor > 1.0 {
            notes.push(format!("stretched by {factor:.6} to respect rabi_max {limit}"));
            rescale_factor = Some(factor);
        }
        prim.rescale_to_rabi_max(limit)?;
    }
    let ns = problem.substeps();
    let grid = log_grid(problem.band[0], problem.band[1], problem.points_per_decade)?;
    // frequencies are in units of the unstretched duration
    let ff = filter_functions(&control_trajectory(&seq, ns)?, &grid)?;
    let ffp = filter_functions(&control_trajectory(&prim, ns)?, &grid)?;
    let order = filter_order(&ff, problem.band, problem.which)?;
    let c = cost(&ff, problem.band, problem.which)?;
    let cp = cost(&ffp, problem.band, problem.which)?;
    let cost_gain = cp.log10_value - c.log10_value;
    let filtering_gain = order.slope >= opts.min_slope && cost_gain > 0.0;
    if !filtering_gain {
        notes.push("no filtering gain".into());
    }
    let noise = stopband_noise(problem.which, problem.band, seq.tau_total, opts.xi_squared, opts.teeth)?;
    let cfg = SimConfig { realizations: opts.realizations, seed: opts.seed, ..SimConfig::default() };
    let oracle = paired_infidelity(&seq, &prim, &noise, &cfg)?;
    let oracle_gain = oracle.sigma() > 3.0;
    if !oracle_gain {
        notes.push("simulated fidelity not above the unmodulated gate".into());
    }
    Ok(VerifyReport {
        order,
        cost: c,
        primitive_cost: cp,
        cost_gain,
        rescale_factor,
        oracle,
        filtering_gain,
        oracle_gain,
        notes,
    })
}
