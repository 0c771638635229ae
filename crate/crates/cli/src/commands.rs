//! Subcommand implementations.

use std::f64::consts::{PI, TAU};

use anyhow::{anyhow, bail, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use walshfilter::fidelity::{cost as band_cost, first_order_infidelity, DEFAULT_STOPBAND};
use walshfilter::filter::{
    control_trajectory, filter_functions, filter_order, find_crossovers, log_grid, FilterFunction, POINTS_PER_DECADE,
};
use walshfilter::noise::{smallness, NoiseSpectrum, Quadrature};
use walshfilter::pulse::{Envelope, PulseSequence};
use walshfilter::sim::rb::{run_rb, PiImplementation, RbConfig};
use walshfilter::sim::{default_beta_grid, ensemble_fidelity, static_magnus_exponent};
use walshfilter::synth::{
    certified_subband, optimize, scan_landscape, verify_filter, NelderMeadOptions, SynthesisProblem, VerifyOptions,
};

use crate::config::{envelope, quadrature, resolve, GateCfg, NoiseCfg, SimCfg};
use crate::output::{curves_script, Output};
use crate::parse;
use crate::{GateFlags, GridFlags, NoiseFlags, SimFlags};

fn lib<T>(r: walshfilter::Result<T>) -> Result<T> {
    r.map_err(|e| anyhow!("{e}"))
}

fn valid_band(text: &str) -> Result<String> {
    parse::band(text)?;
    Ok(text.to_string())
}

fn default_band() -> String {
    format!("{:e}:{:e}", DEFAULT_STOPBAND[0], DEFAULT_STOPBAND[1])
}

fn ppd() -> usize {
    POINTS_PER_DECADE
}

fn z() -> String {
    "z".into()
}

fn file_label(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

/// Allocate distinct file stems for gates that share a label.
fn stems(seqs: &[PulseSequence]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in seqs {
        let base = file_label(&s.label);
        let mut stem = base.clone();
        let mut n = 2;
        while out.contains(&stem) {
            stem = format!("{base}_{n}");
            n += 1;
        }
        out.push(stem);
    }
    out
}

pub fn gate(file: &Value, flags: &GateFlags, out: &Output) -> Result<()> {
    let cfg: GateCfg = resolve(file, flags)?;
    let seq = cfg.build()?;
    out.config("gate", &cfg)?;
    out.write("gate.json", &(lib(seq.to_json())? + "\n"))?;
    let mut csv = String::from("index,t_start,duration,theta,phi,rabi_peak\n");
    let mut t = 0.0;
    for (i, s) in seq.segments.iter().enumerate() {
        csv.push_str(&format!("{i},{t:e},{:e},{:e},{:e},{:e}\n", s.tau, s.theta, s.phi, s.rabi_peak));
        t += s.tau;
    }
    out.write("segments.csv", &csv)?;
    out.plot(
        "d = load(\"segments.csv\")\n\
         fig, ax = plt.subplots()\n\
         for t0, w, r, p in zip(d[\"t_start\"], d[\"duration\"], d[\"rabi_peak\"], d[\"phi\"]):\n    \
             ax.bar(t0, r, width=w, align=\"edge\", alpha=0.6, edgecolor=\"k\")\n    \
             ax.text(t0 + w / 2, r, f\"{p:.2f}\", ha=\"center\", va=\"bottom\", fontsize=7)\n\
         ax.set_xlabel(\"t\")\nax.set_ylabel(\"peak Rabi rate\")\n\
         fig.savefig(os.path.join(here, \"gate.png\"), dpi=150)\n",
    )?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GridCfg {
    #[serde(default = "grid_lo")]
    lo: f64,
    #[serde(default = "grid_hi")]
    hi: f64,
    #[serde(default = "ppd")]
    ppd: usize,
}

fn grid_lo() -> f64 {
    1e-3
}

fn grid_hi() -> f64 {
    1e3
}

fn filters(cfg: &GateCfg, omegas: &[f64]) -> Result<Vec<(PulseSequence, FilterFunction)>> {
    let kinds = cfg.kinds();
    if kinds.is_empty() {
        bail!("no gate kind given");
    }
    kinds
        .iter()
        .map(|k| {
            let seq = cfg.build_kind(k)?;
            let ff = lib(filter_functions(&lib(control_trajectory(&seq, cfg.substeps_for(&seq)))?, omegas))?;
            Ok((seq, ff))
        })
        .collect()
}

pub fn ff(file: &Value, gate: &GateFlags, grid: &GridFlags, out: &Output) -> Result<()> {
    let cfg: GateCfg = resolve(file, gate)?;
    let g: GridCfg = resolve(file, grid)?;
    let omegas = lib(log_grid(g.lo, g.hi, g.ppd))?;
    let ffs = filters(&cfg, &omegas)?;
    out.config("ff", &json!({ "gate": cfg, "grid": g }))?;
    let seqs: Vec<PulseSequence> = ffs.iter().map(|(s, _)| s.clone()).collect();
    let names = stems(&seqs);
    let mut files = vec![];
    for ((_, f), stem) in ffs.iter().zip(&names) {
        let name = format!("ff_{stem}.csv");
        out.write(&name, &f.to_csv())?;
        files.push(name);
    }
    let mut crossings = vec![];
    for (i, (_, a)) in ffs.iter().enumerate().skip(1) {
        for (q, key) in [(Quadrature::Dephasing, "F_z"), (Quadrature::Amplitude, "F_omega")] {
            let w = find_crossovers(a, &ffs[0].1, q).unwrap_or_default();
            crossings.push(json!({
                "gate": names[i],
                "reference": names[0],
                "quadrature": key,
                "omega_tau": w,
                "omega_over_2pi": w.iter().map(|v| v / TAU).collect::<Vec<_>>(),
            }));
        }
    }
    out.json("crossovers.json", &crossings)?;
    out.plot(&curves_script(&files, "omega_tau", &["F_z", "F_omega"], (true, true), "ff.png"))
}

#[derive(Args, Debug, Serialize, Default)]
pub struct CostFlags {
    /// Stopband `lo:hi` in units of 1/tau.
    #[arg(long, value_parser = valid_band)]
    pub band: Option<String>,
    /// Quadrature whose filter function is integrated: z or omega.
    #[arg(long)]
    pub which: Option<String>,
    /// Grid points per decade.
    #[arg(long)]
    pub ppd: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct CostCfg {
    #[serde(default = "default_band")]
    band: String,
    #[serde(default = "z")]
    which: String,
    #[serde(default = "ppd")]
    ppd: usize,
}

pub fn cost(file: &Value, gate: &GateFlags, flags: &CostFlags, out: &Output) -> Result<()> {
    let cfg: GateCfg = resolve(file, gate)?;
    let c: CostCfg = resolve(file, flags)?;
    let band = parse::band(&c.band)?;
    let which = quadrature(&c.which)?;
    let omegas = lib(log_grid(band[0], band[1], c.ppd))?;
    let ffs = filters(&cfg, &omegas)?;
    out.config("cost", &json!({ "gate": cfg, "cost": c }))?;
    let seqs: Vec<PulseSequence> = ffs.iter().map(|(s, _)| s.clone()).collect();
    let names = stems(&seqs);
    let mut files = vec![];
    let mut rows = vec![];
    let mut reference = None;
    for ((seq, f), stem) in ffs.iter().zip(&names) {
        let a = lib(band_cost(f, band, which))?;
        let order = filter_order(f, band, which).ok();
        let r = *reference.get_or_insert(a.log10_value);
        rows.push(json!({
            "gate": stem,
            "duration": seq.tau_total,
            "cost": a,
            "log10_difference_from_first": a.log10_value - r,
            "order": order,
        }));
        let name = format!("ff_{stem}.csv");
        out.write(&name, &f.to_csv())?;
        files.push(name);
    }
    out.json("cost.json", &json!({ "band": band, "which": which, "gates": rows }))?;
    let col = if which == Quadrature::Dephasing { "F_z" } else { "F_omega" };
    let mut script = curves_script(&files, "omega_tau", &[col], (true, true), "cost.png");
    script.insert_str(0, "# filter functions over the stopband; the cost is the area under each curve\n");
    out.plot(&script)
}

#[derive(Args, Debug, Serialize, Default)]
pub struct ScanFlags {
    /// X0 values, e.g. `pi,pi/2,pi/4`.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// X3 values as a list or lo:hi:n.
    #[arg(long, allow_hyphen_values = true)]
    pub x3: Option<String>,
    #[arg(long, value_parser = valid_band)]
    pub band: Option<String>,
    #[arg(long)]
    pub which: Option<String>,
    #[arg(long)]
    pub envelope: Option<String>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub ppd: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct ScanCfg {
    #[serde(default = "default_x0s")]
    x0: String,
    #[serde(default = "default_x3s")]
    x3: String,
    #[serde(default = "default_band")]
    band: String,
    #[serde(default = "z")]
    which: String,
    #[serde(default = "square")]
    envelope: String,
    #[serde(default = "sixth")]
    g: f64,
    #[serde(default = "ppd")]
    ppd: usize,
}

fn default_x0s() -> String {
    "pi,pi/2,pi/4".into()
}

fn default_x3s() -> String {
    "-20:20:801".into()
}

fn square() -> String {
    "square".into()
}

fn sixth() -> f64 {
    1.0 / 6.0
}

pub fn scan(file: &Value, flags: &ScanFlags, out: &Output) -> Result<()> {
    let c: ScanCfg = resolve(file, flags)?;
    let x0s = parse::angles(&c.x0)?;
    let x3s = parse::spaced(&c.x3, false)?;
    if x0s.is_empty() {
        bail!("no X0 values");
    }
    let mut problem = SynthesisProblem::wamf1(x0s[0], parse::band(&c.band)?, quadrature(&c.which)?)
        .with_envelope(envelope(&c.envelope, c.g)?);
    problem.points_per_decade = c.ppd;
    let scan = lib(scan_landscape(&problem, &x0s, &x3s))?;
    out.config("scan", &c)?;
    out.write("landscape.csv", &scan.to_csv())?;
    let zero = x3s.iter().position(|v| *v == 0.0);
    let rows: Vec<Value> = (0..x0s.len())
        .map(|i| {
            let (j, v) = scan.row_minimum(i);
            let interior: Vec<Value> = scan
                .interior_minima(i)
                .into_iter()
                .map(|k| json!({ "x3": x3s[k], "log10_cost": scan.log10_cost[i][k] }))
                .collect();
            json!({
                "x0": x0s[i],
                "minimum": { "x3": x3s[j], "log10_cost": v },
                "interior_minima": interior,
                "x3_zero_log10_cost": zero.map(|k| scan.log10_cost[i][k]),
            })
        })
        .collect();
    out.json("minima.json", &json!({ "band": scan.band, "rows": rows, "rabi_violations": scan.rabi_violations }))?;
    out.plot(
        "import collections\n\
         d = load(\"landscape.csv\")\n\
         rows = collections.defaultdict(lambda: ([], []))\n\
         for x0, x3, c in zip(d[\"x0\"], d[\"x3\"], d[\"log10_cost\"]):\n    \
             rows[x0][0].append(x3)\n    \
             rows[x0][1].append(c)\n\
         fig, ax = plt.subplots()\n\
         for x0, (x3, c) in sorted(rows.items()):\n    \
             ax.plot(x3, c, label=f\"X0 = {x0:.4f}\")\n\
         ax.set_xlabel(\"X3\")\nax.set_ylabel(\"log10 A\")\nax.legend()\n\
         fig.savefig(os.path.join(here, \"landscape.png\"), dpi=150)\n",
    )
}

#[derive(Args, Debug, Serialize, Default)]
pub struct SynthFlags {
    /// Problem size: w1 (four segments over X3) or w2 (eight segments over X3, X5, X6).
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, value_parser = valid_band)]
    pub band: Option<String>,
    #[arg(long)]
    pub which: Option<String>,
    #[arg(long)]
    pub envelope: Option<String>,
    #[arg(long)]
    pub g: Option<f64>,
    /// Number of vanishing low-frequency moments to enforce.
    #[arg(long)]
    pub moment_order: Option<u32>,
    /// Starting values of the variational coefficients.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rabi_max: Option<String>,
    /// Also run the slope, cost and simulation checks.
    #[arg(long)]
    pub verify: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct SynthCfg {
    #[serde(default = "w1")]
    problem: String,
    #[serde(default = "pi_text")]
    x0: String,
    #[serde(default = "default_band")]
    band: String,
    #[serde(default = "z")]
    which: String,
    #[serde(default = "square")]
    envelope: String,
    #[serde(default = "sixth")]
    g: f64,
    #[serde(default)]
    moment_order: Option<u32>,
    #[serde(default)]
    start: Option<String>,
    #[serde(default)]
    restarts: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    rabi_max: Option<String>,
    #[serde(default)]
    verify: bool,
}

fn w1() -> String {
    "w1".into()
}

fn pi_text() -> String {
    "pi".into()
}

pub fn synth(file: &Value, flags: &SynthFlags, out: &Output) -> Result<()> {
    let c: SynthCfg = resolve(file, flags)?;
    let x0 = parse::angle(&c.x0)?;
    let band = parse::band(&c.band)?;
    let which = quadrature(&c.which)?;
    let env = envelope(&c.envelope, c.g)?;
    let (mut problem, order) = match c.problem.to_ascii_lowercase().as_str() {
        "w1" | "wamf1" => (SynthesisProblem::wamf1(x0, band, which), 1),
        "w2" | "wamf2" => (SynthesisProblem::wamf2(x0, band, which), 2),
        other => bail!("unknown synthesis problem '{other}'"),
    };
    problem = problem.with_envelope(env).with_moment_order(c.moment_order.unwrap_or(order));
    if let Some(r) = &c.rabi_max {
        problem.rabi_max = Some(parse::angle(r)?);
    }
    if let Envelope::Gaussian { .. } = env {
        problem.points_per_decade = POINTS_PER_DECADE;
    }
    let start = match &c.start {
        Some(s) => parse::numbers(s)?,
        None => vec![0.0; problem.variational.len()],
    };
    let mut opts = NelderMeadOptions::default();
    if let Some(r) = c.restarts {
        opts.restarts = r;
    }
    if let Some(s) = c.seed {
        opts.seed = s;
    }
    let sol = lib(optimize(&problem, &start, &opts))?;
    let ns = if matches!(env, Envelope::Gaussian { .. }) { walshfilter::pulse::DEFAULT_GAUSSIAN_SUBSTEPS } else { 8 };
    let seq = lib(problem.sequence(&sol.x))?;
    let grid = lib(log_grid(band[0], band[1], problem.points_per_decade))?;
    let ff = lib(filter_functions(&lib(control_trajectory(&seq, ns))?, &grid))?;
    let sub = certified_subband(&ff, band, which, 2.0 * (problem.moment_order as f64 + 1.0) - 0.5);
    let report = if c.verify { Some(lib(verify_filter(&sol.spectrum, &problem, &VerifyOptions::default()))?) } else { None };
    out.config("synth", &c)?;
    out.json(
        "solution.json",
        &json!({ "problem": problem, "solution": sol, "certified_subband": sub, "verify": report }),
    )?;
    out.write("ff_solution.csv", &ff.to_csv())?;
    let col = if which == Quadrature::Dephasing { "F_z" } else { "F_omega" };
    out.plot(&curves_script(&["ff_solution.csv".into()], "omega_tau", &[col], (true, true), "solution.png"))
}

fn sim_pair(
    seq: &PulseSequence,
    spec: &NoiseSpectrum,
    sim: &SimCfg,
) -> Result<(walshfilter::fidelity::FidelityReport, walshfilter::sim::SimResult)> {
    let (sz, so) = match spec.quadrature {
        Quadrature::Dephasing => (Some(spec), None),
        Quadrature::Amplitude => (None, Some(spec)),
    };
    let traj = lib(control_trajectory(seq, walshfilter::filter::MIN_SUBSTEPS.max(
        seq.segments.iter().map(|s| s.default_substeps()).max().unwrap_or(1),
    )))?;
    let pred = lib(first_order_infidelity(&traj, sz, so, seq.tau_total))?;
    let res = lib(ensemble_fidelity(seq, sz, so, &sim.build()))?;
    Ok((pred, res))
}

fn log_list(text: &str) -> Result<Vec<f64>> {
    let v = parse::spaced(text, true)?;
    if v.iter().any(|x| !(*x > 0.0)) {
        bail!("frequencies must be positive");
    }
    Ok(v)
}

pub fn sweep_cutoff(
    file: &Value,
    gate: &GateFlags,
    noise: &NoiseFlags,
    sim: &SimFlags,
    cutoffs: Option<String>,
    out: &Output,
) -> Result<()> {
    let cfg: GateCfg = resolve(file, gate)?;
    let n: NoiseCfg = resolve(file, noise)?;
    let s: SimCfg = resolve(file, sim)?;
    let list = cutoffs.or_else(|| file.get("cutoffs").and_then(|v| v.as_str()).map(String::from));
    let list = list.unwrap_or_else(|| "0.05:2:10".into());
    let cutoffs = log_list(&list)?;
    if n.tone.is_some() {
        bail!("sweep-cutoff needs a comb spectrum, not a tone");
    }
    let seqs: Vec<PulseSequence> = cfg.kinds().iter().map(|k| cfg.build_kind(k)).collect::<Result<_>>()?;
    if seqs.is_empty() {
        bail!("no gate kind given");
    }
    out.config("sweep-cutoff", &json!({ "gate": cfg, "noise": n, "sim": s, "cutoffs": list }))?;
    let mut files = vec![];
    for (seq, stem) in seqs.iter().zip(stems(&seqs)) {
        let mut csv = String::from("omega_c_over_2pi,f_chi,mean_fidelity,std_error,xi_squared,breakdown,f_first\n");
        for &c in &cutoffs {
            let spec = n.build(Some(c), seq.tau_total)?;
            let (pred, res) = sim_pair(seq, &spec, &s)?;
            let xi2 = lib(smallness(&spec, seq.tau_total))?.xi_squared;
            csv.push_str(&format!(
                "{c:e},{:e},{:e},{:e},{xi2:e},{},{:e}\n",
                pred.f_chi,
                res.mean_fidelity,
                res.std_error,
                u8::from(xi2 >= 1.0),
                pred.f_first
            ));
        }
        let name = format!("sweep_{stem}.csv");
        out.write(&name, &csv)?;
        files.push(name);
    }
    out.plot(&curves_script(&files, "omega_c_over_2pi", &["f_chi", "mean_fidelity"], (true, false), "sweep.png"))
}

pub fn sweep_tone(
    file: &Value,
    gate: &GateFlags,
    noise: &NoiseFlags,
    sim: &SimFlags,
    tones: Option<String>,
    out: &Output,
) -> Result<()> {
    let cfg: GateCfg = resolve(file, gate)?;
    let mut n: NoiseCfg = resolve(file, noise)?;
    let s: SimCfg = resolve(file, sim)?;
    let list = tones.or_else(|| file.get("tones").and_then(|v| v.as_str()).map(String::from));
    let list = list.unwrap_or_else(|| "0.01:10:31".into());
    let tones = log_list(&list)?;
    if n.noise.is_some() {
        bail!("sweep-tone builds its own tones; drop the noise file");
    }
    let seqs: Vec<PulseSequence> = cfg.kinds().iter().map(|k| cfg.build_kind(k)).collect::<Result<_>>()?;
    if seqs.is_empty() {
        bail!("no gate kind given");
    }
    out.config("sweep-tone", &json!({ "gate": cfg, "noise": n, "sim": s, "tones": list }))?;
    let mut files = vec![];
    for (seq, stem) in seqs.iter().zip(stems(&seqs)) {
        let mut csv = String::from(
            "omega_t_over_2pi,predicted_infidelity,simulated_infidelity,std_error,xi_squared,filter_value\n",
        );
        for &f in &tones {
            n.tone = Some(f);
            let spec = n.build(None, seq.tau_total)?;
            let (pred, res) = sim_pair(seq, &spec, &s)?;
            let xi2 = lib(smallness(&spec, seq.tau_total))?.xi_squared;
            let traj = lib(control_trajectory(seq, cfg.substeps_for(seq)))?;
            let fv = traj.filter_value(spec.quadrature, TAU * f);
            csv.push_str(&format!(
                "{f:e},{:e},{:e},{:e},{xi2:e},{fv:e}\n",
                pred.infidelity(),
                1.0 - res.mean_fidelity,
                res.std_error
            ));
        }
        let name = format!("tone_{stem}.csv");
        out.write(&name, &csv)?;
        files.push(name);
    }
    out.plot(&curves_script(&files, "omega_t_over_2pi", &["predicted_infidelity", "simulated_infidelity"], (true, true), "tone.png"))
}

pub fn simulate(file: &Value, gate: &GateFlags, noise: &NoiseFlags, sim: &SimFlags, out: &Output) -> Result<()> {
    let cfg: GateCfg = resolve(file, gate)?;
    let n: NoiseCfg = resolve(file, noise)?;
    let s: SimCfg = resolve(file, sim)?;
    let seq = cfg.build()?;
    let spec = n.build(None, seq.tau_total)?;
    let (pred, res) = sim_pair(&seq, &spec, &s)?;
    out.config("simulate", &json!({ "gate": cfg, "noise": n, "sim": s }))?;
    let mut csv = String::from("realization,fidelity\n");
    for (i, f) in res.per_realization.iter().enumerate() {
        csv.push_str(&format!("{i},{f:e}\n"));
    }
    out.write("realizations.csv", &csv)?;
    out.json(
        "simulate.json",
        &json!({
            "gate": seq.label,
            "duration": seq.tau_total,
            "quadrature": spec.quadrature,
            "spectrum": spec,
            "prediction": pred,
            "mean_fidelity": res.mean_fidelity,
            "std_error": res.std_error,
            "realizations": res.realizations,
            "seed": res.seed,
            "observable": res.observable,
        }),
    )?;
    out.plot(
        "d = load(\"realizations.csv\")\n\
         fig, ax = plt.subplots()\n\
         ax.hist(d[\"fidelity\"], bins=30)\n\
         ax.set_xlabel(\"fidelity\")\n\
         fig.savefig(os.path.join(here, \"realizations.png\"), dpi=150)\n",
    )
}

#[derive(Args, Debug, Serialize, Default)]
pub struct RbFlags {
    /// Implementation of the pi rotations: primitive or w1.
    #[arg(long = "pi")]
    pub pi: Option<String>,
    /// Sequence lengths, `1,2,4` or `a..b` (doubling).
    #[arg(long)]
    pub lengths: Option<String>,
    #[arg(long)]
    pub randomizations: Option<usize>,
    /// Noise realizations per randomization.
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rabi_max: Option<String>,
    /// X3 of the W1 pi gate at unit duration.
    #[arg(long, allow_hyphen_values = true)]
    pub w1_x3: Option<f64>,
    /// Replace the bath by random rotation errors of this average infidelity.
    #[arg(long)]
    pub injected_error: Option<f64>,
    /// Run without a bath.
    #[arg(long)]
    pub noiseless: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct RbCfg {
    #[serde(default = "primitive")]
    pi: String,
    #[serde(default = "default_lengths")]
    lengths: String,
    #[serde(default = "fifty")]
    randomizations: usize,
    #[serde(default = "twenty")]
    realizations: usize,
    #[serde(default = "one_u64")]
    seed: u64,
    #[serde(default = "pi_text")]
    rabi_max: String,
    #[serde(default)]
    w1_x3: Option<f64>,
    #[serde(default)]
    injected_error: Option<f64>,
    #[serde(default)]
    noiseless: bool,
}

fn primitive() -> String {
    "primitive".into()
}

fn default_lengths() -> String {
    "1,2,4,8,16,32".into()
}

fn fifty() -> usize {
    50
}

fn twenty() -> usize {
    20
}

fn one_u64() -> u64 {
    1
}

pub fn rb(file: &Value, flags: &RbFlags, noise: &NoiseFlags, out: &Output) -> Result<()> {
    let c: RbCfg = resolve(file, flags)?;
    let n: NoiseCfg = resolve(file, noise)?;
    let pi_impl = match c.pi.to_ascii_lowercase().as_str() {
        "primitive" | "prim" => PiImplementation::Primitive,
        "w1" | "wamf1" => PiImplementation::W1,
        other => bail!("unknown pi implementation '{other}'"),
    };
    let mut cfg = RbConfig {
        lengths: parse::lengths(&c.lengths)?,
        randomizations: c.randomizations,
        realizations: c.realizations,
        pi_implementation: pi_impl,
        seed: c.seed,
        rabi_max: parse::angle(&c.rabi_max)?,
        injected_error: c.injected_error,
        ..RbConfig::default()
    };
    if let Some(x3) = c.w1_x3 {
        cfg.w1_x3 = x3;
    }
    // xi^2 refers to the primitive pi gate
    let spec = if c.noiseless || c.injected_error.is_some() { None } else { Some(n.build(None, PI / cfg.rabi_max)?) };
    let res = lib(run_rb(&cfg, spec.as_ref()))?;
    out.config("rb", &json!({ "rb": c, "noise": n }))?;
    out.write("rb.csv", &res.to_csv())?;
    out.json("rb.json", &json!({ "result": res, "spectrum": spec }))?;
    out.plot(
        "import math\n\
         d = load(\"rb.csv\")\n\
         fig, ax = plt.subplots()\n\
         ax.errorbar(d[\"length\"], d[\"mean_fidelity\"], yerr=d[\"std_error\"], fmt=\"o\")\n\
         ax.set_xscale(\"log\")\nax.set_xlabel(\"sequence length\")\nax.set_ylabel(\"fidelity\")\n\
         fig.savefig(os.path.join(here, \"rb.png\"), dpi=150)\n",
    )
}

#[derive(Serialize, Deserialize)]
struct MagnusCfg {
    #[serde(default = "omega")]
    quadrature: String,
    #[serde(default)]
    betas: Option<String>,
}

fn omega() -> String {
    "omega".into()
}

#[derive(Serialize)]
struct MagnusFlags {
    quadrature: Option<String>,
    betas: Option<String>,
}

pub fn magnus(file: &Value, gate: &GateFlags, q: Option<String>, betas: Option<String>, out: &Output) -> Result<()> {
    let cfg: GateCfg = resolve(file, gate)?;
    let m: MagnusCfg = resolve(file, &MagnusFlags { quadrature: q, betas })?;
    let which = quadrature(&m.quadrature)?;
    let betas = match &m.betas {
        Some(b) => log_list(b)?,
        None => default_beta_grid(),
    };
    let seqs: Vec<PulseSequence> = cfg.kinds().iter().map(|k| cfg.build_kind(k)).collect::<Result<_>>()?;
    if seqs.is_empty() {
        bail!("no gate kind given");
    }
    out.config("magnus", &json!({ "gate": cfg, "magnus": m }))?;
    let mut fits = vec![];
    let mut files = vec![];
    for (seq, stem) in seqs.iter().zip(stems(&seqs)) {
        let fit = lib(static_magnus_exponent(seq, which, &betas))?;
        let mut csv = String::from("beta,infidelity\n");
        for (b, v) in fit.betas.iter().zip(&fit.infidelities) {
            csv.push_str(&format!("{b:e},{v:e}\n"));
        }
        let name = format!("magnus_{stem}.csv");
        out.write(&name, &csv)?;
        files.push(name);
        fits.push(json!({
            "gate": stem,
            "exponent": fit.exponent,
            "magnus_order": fit.magnus_order(),
            "residual": fit.residual,
            "quadrature": fit.quadrature,
        }));
    }
    out.json("magnus.json", &fits)?;
    out.plot(&curves_script(&files, "beta", &["infidelity"], (true, true), "magnus.png"))
}
