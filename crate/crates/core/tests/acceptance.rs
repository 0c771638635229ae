//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance`; pass criterion numbers after `--`
//! to run a subset, e.g. `cargo test --test acceptance -- 2 7`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use walshfilter::fidelity::{first_order_infidelity, DEFAULT_STOPBAND, GAUSSIAN_STOPBAND};
use walshfilter::filter::{
    control_trajectory, default_grid, filter_functions, filter_order, find_crossovers, log_grid, FilterFunction,
};
use walshfilter::noise::{smallness, NoiseSpectrum, Quadrature};
use walshfilter::pulse::{make_named, Envelope, GateKind, GateSpec, PulseSequence, W1_PI_GAUSSIAN_X3};
use walshfilter::sim::rb::{draw_sequence, ideal_product, is_equatorial_pi, run_rb, CorrectionTable, PiImplementation, RbConfig};
use walshfilter::sim::{default_beta_grid, ensemble_fidelity, static_magnus_exponent, Observable, SimConfig};
use walshfilter::synth::{
    certified_subband, optimize, paired_infidelity, scan_landscape, stopband_noise, NelderMeadOptions, SynthesisProblem,
};
use walshfilter::walsh::{hadamard, pal, paley_to_hadamard_index, PaleyIndex, WalshSpectrum};

const Z: Quadrature = Quadrature::Dephasing;
const OMEGA: Quadrature = Quadrature::Amplitude;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn gate(kind: GateKind) -> PulseSequence {
    make_named(&GateSpec::new(kind, PI, PI)).unwrap()
}

fn ff(seq: &PulseSequence, omegas: &[f64]) -> FilterFunction {
    let ns = seq.segments.iter().map(|s| s.default_substeps()).max().unwrap().max(8);
    filter_functions(&control_trajectory(seq, ns).unwrap(), omegas).unwrap()
}

fn predicted(seq: &PulseSequence, spec: &NoiseSpectrum) -> f64 {
    let traj = control_trajectory(seq, 8).unwrap();
    let r = match spec.quadrature {
        Quadrature::Dephasing => first_order_infidelity(&traj, Some(spec), None, seq.tau_total),
        Quadrature::Amplitude => first_order_infidelity(&traj, None, Some(spec), seq.tau_total),
    };
    r.unwrap().f_chi
}

fn simulate(seq: &PulseSequence, spec: &NoiseSpectrum, realizations: usize, seed: u64) -> (f64, f64) {
    let cfg = SimConfig { realizations, seed, observable: Observable::TraceFidelity, ..SimConfig::default() };
    let r = match spec.quadrature {
        Quadrature::Dephasing => ensemble_fidelity(seq, Some(spec), None, &cfg),
        Quadrature::Amplitude => ensemble_fidelity(seq, None, Some(spec), &cfg),
    }
    .unwrap();
    (r.mean_fidelity, r.std_error)
}

/// White dephasing comb of cutoff `omega_c` with strength giving `xi2` for a gate of duration `tau`.
fn white_at(omega_c: f64, tau: f64, xi2: f64) -> NoiseSpectrum {
    let unit = NoiseSpectrum::white(Z, 1.0, omega_c, 50);
    unit.scaled(xi2 / smallness(&unit, tau).unwrap().xi_squared)
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn walsh_exactness() -> Outcome {
    for n in 0..=8 {
        let h = hadamard(n).unwrap();
        let d = h.dim() as i64;
        let g = h.gram();
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v != if i == j { d } else { 0 } {
                    return outcome(false, format!("H H^T != 2^n I at n = {n}"));
                }
            }
        }
    }
    let h = hadamard(8).unwrap();
    for k in 0..256u64 {
        let col = paley_to_hadamard_index(PaleyIndex(k), 8).unwrap() as usize - 1;
        let direct: Vec<i8> = (0..256).map(|b| pal(PaleyIndex(k), (b as f64 + 0.5) / 256.0).unwrap()).collect();
        if h.column(col) != direct {
            return outcome(false, format!("Paley index {k} does not match its Hadamard column"));
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for trial in 0..200 {
        let n = 1 + trial % 8;
        let values: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(-64..=64) as f64).collect();
        let s = WalshSpectrum::analyze(&values).unwrap();
        if s.synthesize_on(n as u32).unwrap() != values {
            return outcome(false, format!("round trip not exact for 2^{n} bins"));
        }
        let mut spec = WalshSpectrum::new();
        for k in 0..(1u64 << n) {
            if rng.gen_bool(0.5) {
                spec.set(k, rng.gen_range(-8..=8) as f64 * 0.25);
            }
        }
        spec.set((1 << n) - 1, 1.0);
        let back = WalshSpectrum::analyze(&spec.synthesize()).unwrap();
        if (0..(1u64 << n)).any(|k| back.get(k) != spec.get(k)) {
            return outcome(false, format!("analysis of a synthesized spectrum not exact for 2^{n} bins"));
        }
    }
    outcome(true, "orthogonality n <= 8, 256 Paley columns, 400 exact round trips")
}

fn oracle_consistency() -> Outcome {
    let seq = gate(GateKind::Primitive);
    // strength fixed so that xi^2 = 0.1 at the top cutoff; a white comb has xi^2 proportional to the cutoff
    let unit = NoiseSpectrum::white(Z, 1.0, 2.0 * PI * 2.0, 50);
    let scale = 0.1 / smallness(&unit, seq.tau_total).unwrap().xi_squared;
    let mut worst = 0.0f64;
    let mut rows = 0;
    for (i, fc) in log_grid(0.05, 2.0, 4).unwrap().into_iter().enumerate() {
        let spec = NoiseSpectrum::white(Z, scale, 2.0 * PI * fc, 50);
        let xi2 = smallness(&spec, seq.tau_total).unwrap().xi_squared;
        if xi2 > 0.1 * (1.0 + 1e-9) {
            return outcome(false, format!("xi^2 = {xi2} above 0.1 at cutoff {fc}"));
        }
        let f = predicted(&seq, &spec);
        let (m, se) = simulate(&seq, &spec, 50, 100 + i as u64);
        let tol = (3.0 * se).max(0.01);
        worst = worst.max((f - m).abs() / tol);
        rows += 1;
        if !within(m, f, tol) {
            return outcome(false, format!("cutoff {fc}: F_chi {f:.4} vs simulated {m:.4} +- {se:.4}"));
        }
    }
    outcome(true, format!("{rows} cutoffs in [0.05, 2], worst |F_chi - mean| / tolerance = {worst:.2}"))
}

/// Sign changes of `a - b` on `xs`, placed by log interpolation.
fn sign_changes(xs: &[f64], a: &[f64], b: &[f64]) -> Vec<(usize, f64)> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (0..xs.len() - 1)
        .filter(|&i| d[i] != 0.0 && d[i + 1] != 0.0 && d[i].signum() != d[i + 1].signum())
        .map(|i| {
            let f = d[i] / (d[i] - d[i + 1]);
            (i, (xs[i].ln() + f * (xs[i + 1].ln() - xs[i].ln())).exp())
        })
        .collect()
}

fn ff_tracing() -> Outcome {
    let coarse = log_grid(1e-2, 1e1, 10).unwrap();
    let fine = log_grid(1e-2, 1e1, 200).unwrap();
    let step = 10f64.powf(0.1);
    let gates = [gate(GateKind::Primitive), gate(GateKind::Sk1), gate(GateKind::Bb1)];
    let mut sims = vec![];
    for (g, seq) in gates.iter().enumerate() {
        let mut infid = vec![];
        for (i, &w) in coarse.iter().enumerate() {
            let spec = NoiseSpectrum::single_tone(OMEGA, w, 1e-3);
            let pred = 1.0 - predicted(seq, &spec);
            let (m, se) = simulate(seq, &spec, 50, 1000 * g as u64 + i as u64);
            let sim = 1.0 - m;
            if !within(sim, pred, 3.0 * se + 1e-12) {
                return outcome(false, format!("{} at w = {w:.3}: predicted {pred:.3e}, simulated {sim:.3e} +- {se:.1e}", seq.label));
            }
            infid.push(sim);
        }
        sims.push(infid);
    }
    let ref_ff = ff(&gates[0], &fine);
    let mut found = vec![];
    for g in 1..3 {
        let expected = find_crossovers(&ff(&gates[g], &fine), &ref_ff, OMEGA).unwrap();
        let simulated = sign_changes(&coarse, &sims[g], &sims[0]);
        for w in &expected {
            if !simulated.iter().any(|(_, s)| (s / w).max(w / s) <= step * (1.0 + 1e-9)) {
                return outcome(
                    false,
                    format!("{} crossover at w = {w:.3} has no simulated crossing within one grid step", gates[g].label),
                );
            }
        }
        found.push(format!("{}: {:?}", gates[g].label, expected.iter().map(|w| format!("{w:.3}")).collect::<Vec<_>>()));
    }
    outcome(true, format!("93 tone points within 3 sigma; crossovers matched ({})", found.join("; ")))
}

fn filter_orders() -> Outcome {
    let grid = default_grid();
    let band = DEFAULT_STOPBAND;
    let slope = |seq: &PulseSequence, q| filter_order(&ff(seq, &grid), band, q).unwrap().slope;
    let prim = gate(GateKind::Primitive);
    let checks = [
        ("primitive F_z", slope(&prim, Z), 2.0, 0.2),
        ("primitive F_omega", slope(&prim, OMEGA), 2.0, 0.2),
        ("SK1 F_omega", slope(&gate(GateKind::Sk1), OMEGA), 4.0, 0.3),
        ("W1 F_z", slope(&gate(GateKind::W1), Z), 4.0, 0.3),
        ("C1 F_z", slope(&gate(GateKind::C1), Z), 4.0, 0.3),
    ];
    let mut detail = vec![];
    let mut pass = true;
    for (name, s, target, tol) in checks {
        pass &= within(s, target, tol);
        detail.push(format!("{name} {s:.3}"));
    }
    match certified_subband(&ff(&gate(GateKind::W2), &grid), band, Z, 5.5) {
        Some(sub) => {
            pass &= sub.slope >= 5.5;
            detail.push(format!("W2 F_z {:.3} on [{:.2e}, {:.2e}]", sub.slope, sub.band[0], sub.band[1]));
        }
        None => {
            pass = false;
            detail.push("W2 has no certified sub-band".into());
        }
    }
    outcome(pass, detail.join(", "))
}

fn magnus_exponents() -> Outcome {
    let betas = default_beta_grid();
    let checks = [
        ("primitive omega", GateKind::Primitive, OMEGA, 2.0),
        ("SK1 omega", GateKind::Sk1, OMEGA, 4.0),
        ("P2 omega", GateKind::P2, OMEGA, 6.0),
        ("B2 omega", GateKind::B2, OMEGA, 6.0),
        ("W1 z", GateKind::W1, Z, 4.0),
        ("C2 z", GateKind::C2, Z, 6.0),
    ];
    let mut pass = true;
    let mut detail = vec![];
    for (name, kind, q, target) in checks {
        let e = static_magnus_exponent(&gate(kind), q, &betas).unwrap().exponent;
        pass &= within(e, target, 0.2);
        detail.push(format!("{name} {e:.3}"));
    }
    outcome(pass, detail.join(", "))
}

fn breakdown() -> Outcome {
    let w1 = gate(GateKind::W1);
    let prim = gate(GateKind::Primitive);
    let wc = 2.0 * PI * 0.05;
    let xi2s = [0.01, 0.03, 0.1, 0.3, 1.0, 2.0, 5.0];
    let mut gaps = vec![];
    let mut prim_ok = true;
    let mut prim_checked = 0;
    for (i, &x) in xi2s.iter().enumerate() {
        let spec = white_at(wc, w1.tau_total, x);
        let (m, se) = simulate(&w1, &spec, 100, 300 + i as u64);
        gaps.push((x, predicted(&w1, &spec) - m, se));
        if smallness(&spec, prim.tau_total).unwrap().xi_squared <= 0.1 {
            let (pm, pse) = simulate(&prim, &spec, 100, 400 + i as u64);
            prim_checked += 1;
            prim_ok &= within(pm, predicted(&prim, &spec), 3.0 * pse);
        }
    }
    let g01 = gaps[2];
    let g5 = gaps[6];
    let pooled = (g01.2 * g01.2 + g5.2 * g5.2).sqrt();
    let sep = (g5.1 - g01.1) / pooled;
    outcome(
        sep >= 5.0 && prim_ok && prim_checked > 0,
        format!(
            "W1 gap {:.4} at xi^2 = 0.1, {:.4} at xi^2 = 5 ({sep:.1} pooled sigma); primitive within 3 sigma at {prim_checked} strengths: {prim_ok}",
            g01.1, g5.1
        ),
    )
}

fn landscape_and_synthesis() -> Outcome {
    let x0s = [PI, PI / 2.0, PI / 4.0];
    let x3s: Vec<f64> = (0..=800).map(|i| -20.0 + 0.05 * i as f64).collect();
    let problem = SynthesisProblem::wamf1(PI, DEFAULT_STOPBAND, Z);
    let scan = scan_landscape(&problem, &x0s, &x3s).unwrap();
    let zero = x3s.iter().position(|v| v.abs() < 1e-12).unwrap();
    let mut detail = vec![];
    let mut pass = true;
    let mut branches: Vec<(f64, f64)> = vec![];
    for (i, &x0) in x0s.iter().enumerate() {
        let interior = scan.interior_minima(i);
        let (j, best) = scan.row_minimum(i);
        let gain = scan.log10_cost[i][zero] - best;
        pass &= interior.contains(&j) && gain >= 2.0;
        let branch_min = |range: std::ops::Range<usize>| range.min_by(|a, b| scan.log10_cost[i][*a].total_cmp(&scan.log10_cost[i][*b])).unwrap();
        let (neg, pos) = (branch_min(0..zero), branch_min(zero + 1..x3s.len()));
        branches.push((x3s[neg], x3s[pos]));
        // optimizer started from every interior grid minimum; the landscape keeps
        // falling beyond the scanned range, so free starts may leave it
        let p = SynthesisProblem::wamf1(x0, DEFAULT_STOPBAND, Z);
        let opts = NelderMeadOptions { restarts: 0, step: 0.05, ..NelderMeadOptions::default() };
        let sol = interior
            .iter()
            .map(|k| optimize(&p, &[x3s[*k]], &opts).unwrap())
            .min_by(|a, b| a.objective.total_cmp(&b.objective))
            .unwrap();
        let located = (sol.x[0] - x3s[j]).abs() <= 0.05 && sol.cost.log10_value <= best + 1e-9;
        pass &= located;
        // paired simulation at the minimum against X3 = 0
        let noise = stopband_noise(Z, DEFAULT_STOPBAND, p.tau, 0.01, 50).unwrap();
        let cfg = SimConfig { realizations: 200, seed: 21 + i as u64, ..SimConfig::default() };
        let cmp = paired_infidelity(&p.sequence(&sol.x).unwrap(), &p.sequence(&[0.0]).unwrap(), &noise, &cfg).unwrap();
        pass &= cmp.sigma() >= 5.0;
        detail.push(format!(
            "X0 = {:.4}: minimum X3 {:.2} (log10 A {best:.2}, {gain:.1} below X3 = 0), optimizer {:.3}, {:.1} sigma",
            x0,
            x3s[j],
            sol.x[0],
            cmp.sigma()
        ));
    }
    let monotone = |v: Vec<f64>| v.windows(2).all(|w| w[1] > w[0]) || v.windows(2).all(|w| w[1] < w[0]);
    let shift = monotone(branches.iter().map(|b| b.0).collect()) && monotone(branches.iter().map(|b| b.1).collect());
    pass &= shift;
    let shown: Vec<String> = branches.iter().map(|(n, p)| format!("({n:.2}, {p:.2})")).collect();
    detail.push(format!("branch minima {} monotone: {shift}", shown.join(" ")));
    outcome(pass, detail.join("; "))
}

fn benchmarking() -> Outcome {
    let table = CorrectionTable::new();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    for i in 0..1000 {
        let s = draw_sequence(1 + i % 32, &mut rng, &table).unwrap();
        if !is_equatorial_pi(&ideal_product(&s)) {
            return outcome(false, format!("sequence {i} does not close"));
        }
    }
    let w1 = gate(GateKind::W1);
    let prim = gate(GateKind::Primitive);
    let spec = white_at(2.0 * PI * 0.01, w1.tau_total, 0.03);
    let xi2_prim = smallness(&spec, prim.tau_total).unwrap().xi_squared;
    let run = |pi| {
        let cfg = RbConfig { pi_implementation: pi, ..RbConfig::default() };
        run_rb(&cfg, Some(&spec)).unwrap().fit.unwrap()
    };
    let (fp, fw) = (run(PiImplementation::Primitive), run(PiImplementation::W1));
    let sep = (fp.epg - fw.epg) / (fp.epg_std_error.powi(2) + fw.epg_std_error.powi(2)).sqrt();
    outcome(
        sep >= 3.0,
        format!(
            "1000 sequences close; xi^2 per pi gate {:.3} (W1), {xi2_prim:.4} (primitive); EPG primitive {:.5} +- {:.5}, W1 {:.5} +- {:.5} ({sep:.1} sigma)",
            0.03, fp.epg, fp.epg_std_error, fw.epg, fw.epg_std_error
        ),
    )
}

fn gaussian_parity() -> Outcome {
    let env = Envelope::Gaussian { g: 1.0 / 6.0 };
    let problem = SynthesisProblem::wamf1(PI, GAUSSIAN_STOPBAND, Z).with_envelope(env);
    let x0s = [PI, PI / 2.0, PI / 4.0];
    let x3s: Vec<f64> = (0..=160).map(|i| -20.0 + 0.25 * i as f64).collect();
    let scan = scan_landscape(&problem, &x0s, &x3s).unwrap();
    let minima: Vec<usize> = (0..x0s.len()).map(|i| scan.interior_minima(i).len()).collect();
    let sol = optimize(&problem.clone().with_moment_order(1), &[0.0], &NelderMeadOptions::default()).unwrap();
    let grid = log_grid(GAUSSIAN_STOPBAND[0], GAUSSIAN_STOPBAND[1], 50).unwrap();
    let seq = problem.sequence(&sol.x).unwrap();
    let traj = control_trajectory(&seq, walshfilter::pulse::DEFAULT_GAUSSIAN_SUBSTEPS).unwrap();
    let slope = filter_order(&filter_functions(&traj, &grid).unwrap(), GAUSSIAN_STOPBAND, Z).unwrap().slope;
    outcome(
        minima.iter().all(|m| *m > 0) && within(slope, 4.0, 0.3),
        format!(
            "interior minima per X0 row {minima:?}; re-optimized X3 {:.4} (stored {W1_PI_GAUSSIAN_X3:.4}), slope {slope:.3}",
            sol.x[0]
        ),
    )
}

fn uwmf_universality() -> Outcome {
    let grid = default_grid();
    let band = DEFAULT_STOPBAND;
    let slope = |k, q| filter_order(&ff(&gate(k), &grid), band, q).unwrap().slope;
    let (uz, uo) = (slope(GateKind::Uwmf, Z), slope(GateKind::Uwmf, OMEGA));
    let w1o = slope(GateKind::W1, OMEGA);
    let skz = slope(GateKind::Sk1, Z);
    outcome(
        uz >= 3.7 && uo >= 3.7 && w1o < 3.7 && skz < 3.7,
        format!("UWMF F_z {uz:.3}, F_omega {uo:.3}; W1 F_omega {w1o:.3}; SK1 F_z {skz:.3}"),
    )
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "walsh exactness", 1, walsh_exactness),
        (2, "oracle consistency", 120, oracle_consistency),
        (3, "filter-function tracing", 300, ff_tracing),
        (4, "filter orders", 60, filter_orders),
        (5, "static Magnus exponents", 60, magnus_exponents),
        (6, "breakdown", 300, breakdown),
        (7, "landscape and synthesis", 600, landscape_and_synthesis),
        (8, "randomized benchmarking", 900, benchmarking),
        (9, "Gaussian-envelope parity", 300, gaussian_parity),
        (10, "UWMF universality", 60, uwmf_universality),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, limit, f) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let dt = t.elapsed();
        let in_time = dt <= Duration::from_secs(limit);
        let pass = o.pass && in_time;
        failed += usize::from(!pass);
        let timing = if in_time { String::new() } else { format!(" (limit {limit} s exceeded)") };
        println!(
            "criterion {n} {}: {name} [{:.1} s]{timing}: {}",
            if pass { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
