//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_complex::Complex64;
use rsma_conic::{
    audit, encode_interference_bound, encode_log_lower, solve, ConicProgram, ConicStatus,
    SolveOptions, StackedComplex,
};
use rsma_core::channel::{geometric_pair, rayleigh, ChannelSet};
use rsma_core::optimizer::{
    sca_solve, sca_solve_warm, solve_both, LogTangent, Mode, OptimizerConfig, Origin,
    QuadOverLinTangent, ScheduleResult, SlotProblem, Termination,
};
use rsma_core::rng::{GaussianStream, Purpose};
use rsma_core::sim::{
    initial_state, monte_carlo_aoii_observed, slot_weights, sweep_scheduled_users_observed,
    ExperimentConfig,
};

use common::audit_schedule;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Collects raw-formula audits of every schedule produced by criteria 1-5.
#[derive(Default)]
struct Auditor {
    checked: AtomicUsize,
    failures: Mutex<Vec<String>>,
}

impl Auditor {
    fn observe(&self, problem: &SlotProblem, result: &ScheduleResult) {
        self.checked.fetch_add(1, Ordering::Relaxed);
        if let Err(e) = audit_schedule(problem, result) {
            self.failures
                .lock()
                .unwrap()
                .push(format!("{}: {e}", result.mode));
        }
    }
}

fn rayleigh_config(seed: u64, n: usize, k: usize) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{"scenario": "rayleigh", "N": {n}, "K": {k}, "snr_db": [20], "I_values": [1], "seed": {seed}}}"#
    ))
    .unwrap()
}

/// Seeded AoII weights with `V = 0` at slot 0.
fn drawn_weights(seed: u64, k: usize) -> Vec<f64> {
    let cfg = rayleigh_config(seed, 1, k);
    let (state, t, _) = initial_state(&cfg, 0);
    slot_weights(&cfg.aoii, &state, t).unwrap()
}

fn power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| from + step * i as f64).collect()
}

fn criterion_1(auditor: &Auditor) -> Verdict {
    let start = Instant::now();
    let tol = 10.0 * OptimizerConfig::default().solver_tol;
    let mut runs = 0;
    let mut bad = Vec::new();
    let mut worst_rise = f64::NEG_INFINITY;
    let mut max_iters = 0;
    for seed in 0..20 {
        let h = rayleigh(4, 3, seed).unwrap();
        let problem =
            SlotProblem::new(h, vec![2.0; 3], drawn_weights(seed, 3), power(20.0)).unwrap();
        for mode in [Mode::Rsma, Mode::Sdma] {
            runs += 1;
            let result = match sca_solve(&problem, &OptimizerConfig::with_mode(mode)) {
                Ok(r) => r,
                Err(e) => {
                    bad.push(format!("seed {seed} {mode}: {e}"));
                    continue;
                }
            };
            auditor.observe(&problem, &result);
            let obj = result.objectives();
            let rise = obj
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::NEG_INFINITY, f64::max);
            worst_rise = worst_rise.max(rise);
            max_iters = max_iters.max(result.sca_iterations);
            let last_step = obj.windows(2).last().map(|w| (w[1] - w[0]).abs());
            let converged = result.termination == Termination::Converged
                && result.sca_iterations <= 100
                && last_step.is_none_or(|d| d < 1e-4);
            if rise > tol || !converged {
                bad.push(format!(
                    "seed {seed} {mode}: rise {rise:e}, {:?} after {}",
                    result.termination, result.sca_iterations
                ));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict::new(
        bad.is_empty() && secs < 120.0,
        format!(
            "{runs} runs, worst objective rise {worst_rise:.2e}, max {max_iters} iterations, {secs:.1}s{}",
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

fn criterion_2(auditor: &Auditor) -> Verdict {
    let mut points = 0;
    let mut matches = 0;
    let mut far = Vec::new();
    for seed in 0..10 {
        let h = rayleigh(4, 1, seed).unwrap();
        let gain = h.gains()[0];
        for snr in [10.0, 20.0] {
            let capacity = (1.0 + power(snr) * gain).log2();
            for i in grid(0.5, 12.0, 0.5) {
                let problem = SlotProblem::new(h.clone(), vec![i], vec![1.0], power(snr)).unwrap();
                for mode in [Mode::Rsma, Mode::Sdma] {
                    points += 1;
                    let scheduled = match sca_solve(&problem, &OptimizerConfig::with_mode(mode)) {
                        Ok(r) => {
                            auditor.observe(&problem, &r);
                            r.z_binary[0] == 0
                        }
                        Err(_) => false,
                    };
                    if scheduled == (capacity >= i) {
                        matches += 1;
                    } else if (capacity - i).abs() > 0.05 {
                        far.push(format!(
                            "seed {seed} snr {snr} I {i} {mode}: capacity {capacity:.4}"
                        ));
                    }
                }
            }
        }
    }
    let rate = matches as f64 / points as f64;
    Verdict::new(
        rate >= 0.95 && far.is_empty(),
        format!(
            "{matches}/{points} agree ({:.1}%), {} mismatches beyond 0.05 bits{}",
            100.0 * rate,
            far.len(),
            if far.is_empty() {
                String::new()
            } else {
                format!(": {}", far.join("; "))
            }
        ),
    )
}

fn criterion_3(auditor: &Auditor) -> Verdict {
    let h = geometric_pair(4, PI / 2.0).unwrap();
    let mut bad = Vec::new();
    let mut points = 0;
    for snr in [10.0, 20.0] {
        let threshold = (1.0 + 2.0 * power(snr)).log2();
        for i in grid(0.25, 10.0, 0.25) {
            let problem =
                SlotProblem::new(h.clone(), vec![i; 2], vec![1.0; 2], power(snr)).unwrap();
            let results = match solve_both(&problem, &OptimizerConfig::default()) {
                Ok((s, r)) => vec![s, r],
                Err(e) => {
                    bad.push(format!("snr {snr} I {i}: {e}"));
                    continue;
                }
            };
            for r in results {
                points += 1;
                auditor.observe(&problem, &r);
                let both = r.num_scheduled() == 2;
                if both != (i <= threshold) && (i - threshold).abs() > 0.1 {
                    bad.push(format!(
                        "snr {snr} I {i} {}: {} scheduled, threshold {threshold:.3}",
                        r.mode,
                        r.num_scheduled()
                    ));
                }
            }
        }
    }
    Verdict::new(
        bad.is_empty(),
        format!(
            "{points} schedules checked{}",
            if bad.is_empty() {
                String::new()
            } else {
                format!("; {}", bad.join("; "))
            }
        ),
    )
}

fn criterion_4(auditor: &Auditor) -> Verdict {
    let i_values = grid(0.25, 10.0, 0.25);
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{"scenario": "geometric", "N": 4, "K": 2, "theta": [{}, {}], "snr_db": [20],
            "I_values": {:?}, "seed": 0}}"#,
        PI / 18.0,
        PI / 9.0,
        i_values
    ))
    .unwrap();
    let observe = |p: &SlotProblem, r: &ScheduleResult| auditor.observe(p, r);
    let record = match sweep_scheduled_users_observed(&cfg, Some(&observe)) {
        Ok(r) => r,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let mut pass = record.num_failed() == 0;
    let mut parts = Vec::new();
    for theta in cfg.thetas() {
        let count = |mode: Mode, i: f64| {
            record
                .rows
                .iter()
                .find(|r| r.mode == mode && r.theta == Some(theta) && r.i_value == i)
                .and_then(|r| r.num_scheduled)
        };
        let last_two = |mode: Mode| {
            i_values
                .iter()
                .copied()
                .filter(|&i| count(mode, i) == Some(2))
                .fold(f64::NAN, f64::max)
        };
        let gap: Vec<f64> = i_values
            .iter()
            .copied()
            .filter(|&i| count(Mode::Rsma, i) == Some(2) && count(Mode::Sdma, i) == Some(1))
            .collect();
        let (rsma, sdma) = (last_two(Mode::Rsma), last_two(Mode::Sdma));
        let ok = !gap.is_empty() && rsma > sdma;
        pass &= ok;
        let non_monotone = [Mode::Rsma, Mode::Sdma]
            .iter()
            .filter(|&&m| i_values.windows(2).any(|w| count(m, w[1]) > count(m, w[0])))
            .count();
        parts.push(format!(
            "theta={:.4}: last I with 2 users rsma {rsma} sdma {sdma}, rsma-only interval {} points{}",
            theta,
            gap.len(),
            if non_monotone > 0 { format!(", {non_monotone} non-monotone mode(s)") } else { String::new() }
        ));
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion_5(auditor: &Auditor) -> Verdict {
    let observe = |p: &SlotProblem, r: &ScheduleResult| auditor.observe(p, r);
    let mut pass = true;
    let mut parts = Vec::new();
    let runs = [(4, 3, "[15, 20]", 100, true), (8, 5, "[25, 30]", 20, false)];
    for (n, k, snr, realizations, needs_more) in runs {
        let start = Instant::now();
        let cfg = ExperimentConfig::from_json(&format!(
            r#"{{"scenario": "rayleigh", "N": {n}, "K": {k}, "snr_db": {snr},
                "I_values": [1, 2, 3, 4, 5, 6, 7, 8], "num_realizations": {realizations}, "seed": 2024}}"#
        ))
        .unwrap();
        let record = match monte_carlo_aoii_observed(&cfg, Some(&observe)) {
            Ok(r) => r,
            Err(e) => return Verdict::new(false, e.to_string()),
        };
        let failed = record.num_failed();
        let mut violations = Vec::new();
        let mut max_pct: f64 = 0.0;
        for c in &record.comparisons {
            let mean = |m| {
                record
                    .cell(m, c.snr_db, c.i_value, None)
                    .and_then(|x| x.mean_aoii)
            };
            match (mean(Mode::Rsma), mean(Mode::Sdma)) {
                (Some(r), Some(s)) if r <= s => {}
                (r, s) => {
                    violations.push(format!("snr {} I {}: {r:?} vs {s:?}", c.snr_db, c.i_value))
                }
            }
            max_pct = max_pct.max(c.pct_rsma_more);
        }
        let ok = failed == 0 && violations.is_empty() && (!needs_more || max_pct > 0.0);
        pass &= ok;
        parts.push(format!(
            "N={n} K={k} x{realizations}: {failed} failures, {} AoII violations, max pct_rsma_more {max_pct:.0}%, {:.1}s{}",
            violations.len(),
            start.elapsed().as_secs_f64(),
            if violations.is_empty() { String::new() } else { format!(" ({})", violations.join("; ")) }
        ));
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion_6() -> Verdict {
    const FD_STEP: f64 = 1e-5;
    let mut rng = GaussianStream::new(6, Purpose::Process, 0);
    let mut worst_value: f64 = 0.0;
    let mut worst_grad: f64 = 0.0;
    let mut minorant_violations = 0;
    for _ in 0..1000 {
        let beta0 = 100.0 * rng.uniform();
        let t = LogTangent::new(beta0);
        worst_value = worst_value.max((t.value(beta0) - LogTangent::exact(beta0)).abs());
        let fd = (LogTangent::exact(beta0 + FD_STEP) - LogTangent::exact(beta0 - FD_STEP))
            / (2.0 * FD_STEP);
        worst_grad = worst_grad.max((t.slope() - fd).abs());
    }
    let n = 4;
    for _ in 0..1000 {
        let h: Vec<Complex64> = (0..n).map(|_| rng.complex_normal()).collect();
        let p0: Vec<Complex64> = (0..n).map(|_| rng.complex_normal() * 2.0).collect();
        let sigma0 = 1.0 + 9.0 * rng.uniform();
        let t = QuadOverLinTangent::new(&h, &p0, sigma0);
        worst_value = worst_value
            .max((t.value(&p0, sigma0) - QuadOverLinTangent::exact(&h, &p0, sigma0)).abs());
        let (d_re, d_im, d_sigma) = t.gradient();
        let exact = |p: &[Complex64], s: f64| QuadOverLinTangent::exact(&h, p, s);
        for i in 0..n {
            for (unit, analytic) in [
                (Complex64::new(1.0, 0.0), d_re[i]),
                (Complex64::new(0.0, 1.0), d_im[i]),
            ] {
                let mut plus = p0.clone();
                let mut minus = p0.clone();
                plus[i] += unit * FD_STEP;
                minus[i] -= unit * FD_STEP;
                let fd = (exact(&plus, sigma0) - exact(&minus, sigma0)) / (2.0 * FD_STEP);
                worst_grad = worst_grad.max((analytic - fd).abs());
            }
        }
        let fd = (exact(&p0, sigma0 + FD_STEP) - exact(&p0, sigma0 - FD_STEP)) / (2.0 * FD_STEP);
        worst_grad = worst_grad.max((d_sigma - fd).abs());

        let p: Vec<Complex64> = p0.iter().map(|&v| v + rng.complex_normal()).collect();
        let sigma = sigma0 * (0.5 + 1.5 * rng.uniform());
        if t.value(&p, sigma) > exact(&p, sigma) + 1e-9 {
            minorant_violations += 1;
        }
    }
    Verdict::new(
        worst_value <= 1e-9 && worst_grad <= 1e-5 && minorant_violations == 0,
        format!(
            "worst value error {worst_value:.1e}, worst gradient error {worst_grad:.1e}, {minorant_violations} minorant violations"
        ),
    )
}

fn criterion_7() -> Verdict {
    let opts = SolveOptions::default();
    let mut cases: Vec<(&str, ConicProgram, f64)> = Vec::new();

    let mut log = ConicProgram::new(2);
    log.set_objective(1, -1.0);
    log.add_lower_bound(0, 0.0);
    log.add_upper_bound(0, 3.0);
    encode_log_lower(&mut log, 0, 1).unwrap();
    cases.push(("log maximization", log, -2.0));

    let mut bound = ConicProgram::new(3);
    let sigma = 2;
    bound.set_objective(sigma, 1.0);
    bound.fix(0, 1.0);
    bound.fix(1, 1.0);
    encode_interference_bound(
        &mut bound,
        &[Complex64::new(1.0, 0.0)],
        &[StackedComplex::new(0, 1)],
        sigma,
    )
    .unwrap();
    cases.push(("interference bound", bound, 3.0));

    let mut lp = ConicProgram::new(2);
    lp.set_objective(0, 1.0);
    lp.set_objective(1, 1.0);
    lp.add_lower_bound(0, 1.0);
    lp.add_lower_bound(1, 2.0);
    cases.push(("separable LP", lp, 3.0));

    let mut parts = Vec::new();
    let mut pass = true;
    for (name, program, expected) in &cases {
        let ok = match solve(program, &opts) {
            Ok(sol) if sol.status == ConicStatus::Optimal => {
                let report = audit(program, &sol.primal);
                let err = (sol.objective_value - expected).abs();
                parts.push(format!(
                    "{name} error {err:.1e} audit {:.1e}",
                    report.worst()
                ));
                err <= 1e-6 && report.passes(opts.tol)
            }
            Ok(sol) => {
                parts.push(format!("{name}: {}", sol.status));
                false
            }
            Err(e) => {
                parts.push(format!("{name}: {e}"));
                false
            }
        };
        pass &= ok;
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion_8(auditor: &Auditor) -> Verdict {
    let checked = auditor.checked.load(Ordering::Relaxed);
    let failures = auditor.failures.lock().unwrap();
    Verdict::new(
        checked > 0 && failures.is_empty(),
        format!(
            "{checked} schedules audited, {} violations{}",
            failures.len(),
            failures
                .iter()
                .take(5)
                .map(|f| format!("; {f}"))
                .collect::<String>()
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut bad = Vec::new();
    let mut seeded_wins = 0;
    for seed in 0..50 {
        let h: ChannelSet = rayleigh(4, 3, 1000 + seed).unwrap();
        let problem =
            SlotProblem::new(h, vec![4.0; 3], drawn_weights(1000 + seed, 3), power(20.0)).unwrap();
        let cfg = OptimizerConfig::default();
        let outcome = sca_solve(&problem, &OptimizerConfig::with_mode(Mode::Sdma))
            .and_then(|sdma| sca_solve_warm(&problem, &cfg, &sdma).map(|rsma| (sdma, rsma)));
        match outcome {
            Ok((sdma, rsma)) => {
                if rsma.origin == Origin::Sca {
                    seeded_wins += 1;
                }
                if rsma.achieved_aoii > sdma.achieved_aoii {
                    bad.push(format!(
                        "seed {seed}: {} > {}",
                        rsma.achieved_aoii, sdma.achieved_aoii
                    ));
                }
            }
            Err(e) => bad.push(format!("seed {seed}: {e}")),
        }
    }
    Verdict::new(
        bad.is_empty(),
        format!(
            "50 instances, {} violations, {seeded_wins} from the seeded run itself{}",
            bad.len(),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; {}", bad.join("; "))
            }
        ),
    )
}

fn main() {
    let auditor = Auditor::default();
    let criteria: Vec<Criterion> = vec![
        (
            "1 SCA monotonicity and convergence",
            Box::new(|| criterion_1(&auditor)),
        ),
        (
            "2 single-user analytic oracle",
            Box::new(|| criterion_2(&auditor)),
        ),
        (
            "3 orthogonal-channel oracle",
            Box::new(|| criterion_3(&auditor)),
        ),
        (
            "4 scheduled users vs I, geometric pair",
            Box::new(|| criterion_4(&auditor)),
        ),
        (
            "5 Monte Carlo AoII, RSMA vs SDMA",
            Box::new(|| criterion_5(&auditor)),
        ),
        (
            "6 linearization tangency and gradients",
            Box::new(criterion_6),
        ),
        ("7 conic solver closed forms", Box::new(criterion_7)),
        (
            "8 feasibility audit of schedules",
            Box::new(|| criterion_8(&auditor)),
        ),
        ("9 SDMA-restriction dominance", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let verdict = run();
        if !verdict.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {name}: {}",
            if verdict.pass { "PASS" } else { "FAIL" },
            verdict.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
