//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::Instant;

use semcc::capacity::{awgn_capacity, blahut_arimoto};
use semcc::channels::{bsc, mpsk_hard_dmc, PskConfig};
use semcc::coding::{
    exact_evaluate, fano_campaign, random_instance, run_sweep, simulate, simulate_full_codebook, simulate_system,
    CodeConfig, Engine, ExperimentConfig, PartitionScheme, SimOptions, SimulationReport, make_partition,
};
use semcc::info::{binary_entropy, entropy, ProbVector};
use semcc::semantics::{compression_gain, semantic_entropy, CompressionGain, KnowledgeBase};

const SEED: u64 = 20_240_601;

// Tolerances.
const EXACT_TOL: f64 = 1e-12;
const BA_TOL: f64 = 1e-6;
const FANO_SLACK: f64 = 1e-9;
const CHAIN_TOL: f64 = 1e-9;
const NC_TOL: f64 = 1e-6;
const MC_SIGMAS: f64 = 4.0;
const PSK_SIGMAS: f64 = 3.0;

/// Every simulation report produced by the suite, for the error-count invariant.
static REPORTS: Mutex<Vec<SimulationReport>> = Mutex::new(Vec::new());

fn keep(r: &SimulationReport) {
    REPORTS.lock().unwrap().push(r.clone());
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn labels(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

fn worked_values() -> Outcome {
    let px = ProbVector::new(labels("x", 3), vec![0.25, 0.5, 0.25]).unwrap();
    let third = 1.0 / 3.0;
    let k1 = KnowledgeBase::new(labels("x", 3), labels("s", 3), vec![vec![third, third, 1.0 - 2.0 * third]; 3]).unwrap();
    let k2 = KnowledgeBase::new(labels("x", 3), labels("s", 2), vec![vec![0.9, 0.1], vec![0.8, 0.2], vec![0.5, 0.5]]).unwrap();
    let h = entropy(&px);
    let h1 = semantic_entropy(&px, &k1).unwrap();
    let h2 = semantic_entropy(&px, &k2).unwrap();
    let log3 = 3f64.log2();
    let pass = h == 1.5 && (h1 - log3).abs() < EXACT_TOL && (h2 - (2.0 - 0.75 * log3)).abs() < EXACT_TOL;
    outcome(pass, format!("H(X) = {h}, H_s(K1) = {h1:.12}, H_s(K2) = {h2:.12}"))
}

fn gain() -> Outcome {
    let g = compression_gain(6272.0, 10f64.log2()).unwrap();
    let value = g.value().unwrap_or(f64::NAN);
    let pass = matches!(g, CompressionGain::Finite(_)) && value.round() == 1888.0;
    outcome(pass, format!("G_s = {value:.4} (rounds to {})", value.round()))
}

fn capacity_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.01, 0.05, 0.1, 0.25, 0.4] {
        let c = blahut_arimoto(&bsc(p).unwrap(), 1e-12, 100_000).unwrap().capacity;
        worst = worst.max((c - (1.0 - binary_entropy(p))).abs());
    }
    let a63 = awgn_capacity(63.0).unwrap();
    let a9 = awgn_capacity(9.0).unwrap();
    let pass = worst < BA_TOL && (a63 - 6.0).abs() < EXACT_TOL && (a9 - 10f64.log2()).abs() < EXACT_TOL;
    outcome(pass, format!("max |BA - (1 - H_b)| = {worst:.2e}; AWGN(63) = {a63}, AWGN(9) = {a9:.12}"))
}

fn fano_and_chain() -> (Outcome, Outcome) {
    let c = fano_campaign(1000, SEED).unwrap();
    let fano_ok = c.records.iter().filter(|r| r.fano.lhs <= r.fano.rhs + FANO_SLACK).count();
    let chain_ok = c
        .records
        .iter()
        .filter(|r| {
            let k = &r.chain;
            (k.h_w - (k.h_w_given_y + k.mi_w_y)).abs() <= CHAIN_TOL
                && k.mi_w_y <= k.mi_x_y + CHAIN_TOL
                && k.mi_x_y <= k.n_c + NC_TOL
        })
        .count();
    let messages = c.records.iter().map(|r| r.messages).max().unwrap_or(0);
    let n = c.records.iter().map(|r| r.n).max().unwrap_or(0);
    (
        outcome(
            fano_ok == 1000,
            format!("{fano_ok}/1000 within slack; worst slack {:.3e} bits (n <= {n}, <= {messages} messages)", c.worst_fano_slack),
        ),
        outcome(chain_ok == 1000, format!("{chain_ok}/1000 instances satisfy chain rule, data processing and nC")),
    )
}

fn trend(fraction: f64) -> semcc::coding::SweepReport {
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{"channel":"bsc:0.05","n_grid":[64,128,256,512],"rate_fraction":{fraction},"alpha":0.5,"trials":10000,"seed":{SEED}}}"#
    ))
    .unwrap();
    let report = run_sweep(&cfg).unwrap();
    for row in &report.rows {
        keep(&row.report);
    }
    report
}

fn column(r: &semcc::coding::SweepReport) -> Vec<f64> {
    r.rows.iter().map(|row| row.report.p_sem.estimate).collect()
}

fn achievability() -> Outcome {
    let r = trend(0.9);
    let p = column(&r);
    let decreasing = p.windows(2).all(|w| w[1] < w[0]);
    let pass = decreasing && p[3] < p[0] / 3.0;
    outcome(pass, format!("R = {:.4}, p_sem over n = 64..512: {p:?}", r.rate))
}

fn converse_trend() -> Outcome {
    let r = trend(1.2);
    let p = column(&r);
    outcome(p[3] >= 0.05, format!("R = {:.4}, p_sem over n = 64..512: {p:?}", r.rate))
}

fn alpha_one_runs() {
    let ch = bsc(0.08).unwrap();
    let px = ProbVector::uniform(2).unwrap();
    let cfg = CodeConfig::new(24, 0.4, 1.0).unwrap();
    for engine in [Engine::Explicit, Engine::Ensemble] {
        keep(&simulate(&cfg, PartitionScheme::Contiguous, &ch, &px, &SimOptions::new(20_000, SEED).engine(engine)).unwrap());
    }
    let cfg = CodeConfig::new(12, 0.5, 1.0).unwrap();
    let p = make_partition(&cfg, PartitionScheme::Interleaved).unwrap();
    keep(&simulate_full_codebook(&cfg, &p, &ch, &px, &SimOptions::new(20_000, SEED)).unwrap());
    let cfg = CodeConfig::new(12, 0.5, 0.5).unwrap();
    let p = make_partition(&cfg, PartitionScheme::SeededRandom { seed: SEED }).unwrap();
    keep(&simulate_full_codebook(&cfg, &p, &ch, &px, &SimOptions::new(20_000, SEED)).unwrap());
}

fn error_invariant() -> Outcome {
    alpha_one_runs();
    let reports = REPORTS.lock().unwrap();
    let ordered = reports.iter().filter(|r| r.semantic_errors <= r.message_errors).count();
    let alpha_one: Vec<_> = reports.iter().filter(|r| r.semantic_bits == r.message_bits).collect();
    let equal = alpha_one.iter().filter(|r| r.semantic_errors == r.message_errors).count();
    let pass = ordered == reports.len() && equal == alpha_one.len() && !alpha_one.is_empty();
    outcome(
        pass,
        format!("{ordered}/{} reports with sem <= msg; {equal}/{} alpha = 1 reports equal", reports.len(), alpha_one.len()),
    )
}

fn monte_carlo_vs_exact() -> Outcome {
    let trials = 1_000_000u64;
    let mut within = 0;
    let mut worst: f64 = 0.0;
    let mut used = 0;
    let mut index = 0u32;
    while used < 20 {
        let inst = random_instance(SEED ^ 0x9e37, index).unwrap();
        index += 1;
        let e = exact_evaluate(&inst.system).unwrap();
        if !(e.p_sem > 1e-9 && e.p_sem < 1.0 - 1e-9) {
            continue;
        }
        let r = simulate_system(&inst.system, trials, SEED, used as u16).unwrap();
        keep(&r);
        let se = (e.p_sem * (1.0 - e.p_sem) / trials as f64).sqrt();
        let z = (r.p_sem.estimate - e.p_sem).abs() / se;
        worst = worst.max(z);
        within += (z <= MC_SIGMAS) as usize;
        used += 1;
    }
    outcome(within >= 19, format!("{within}/20 within {MC_SIGMAS} SE (largest deviation {worst:.2} SE)"))
}

fn psk_cross_check() -> Outcome {
    let samples = 1_000_000u64;
    let mut entries = 0;
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for (m, snr) in [(2usize, 4.0), (4, 9.0), (8, 63.0)] {
        let analytic = mpsk_hard_dmc(&PskConfig::analytic(m, snr)).unwrap();
        let mc = mpsk_hard_dmc(&PskConfig::monte_carlo(m, snr, samples, SEED)).unwrap();
        for i in 0..m {
            for j in 0..m {
                let p = analytic.dmc.prob(i, j);
                let se = (p * (1.0 - p) / samples as f64).sqrt();
                let diff = (mc.dmc.prob(i, j) - p).abs();
                entries += 1;
                if diff <= PSK_SIGMAS * se {
                    within += 1;
                }
                if se > 0.0 {
                    worst = worst.max(diff / se);
                }
            }
        }
    }
    let mut caps = Vec::new();
    for k in 0..10 {
        let snr = 0.25 * 2f64.powi(k);
        let ch = mpsk_hard_dmc(&PskConfig::analytic(8, snr)).unwrap();
        caps.push(blahut_arimoto(&ch.dmc, 1e-12, 1_000_000).unwrap().capacity);
    }
    let monotone = caps.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        within == entries && monotone,
        format!(
            "{within}/{entries} entries within {PSK_SIGMAS} SE (largest {worst:.2} SE); 8-PSK capacity monotone over 10 snr points: {monotone}"
        ),
    )
}

fn cli(args: &[&str]) -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_semcc")).args(args).output().expect("run semcc");
    (out.status.success(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn data_rows(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    if text.starts_with('#') {
        text.lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
    } else {
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        vec![v["result"].to_string()]
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let seed = SEED.to_string();
    let runs: Vec<(&str, Vec<String>)> = vec![
        (
            "simulate",
            ["simulate", "--channel", "bsc:0.05", "--n-grid", "16,64,200", "--rate-fraction", "0.9", "--alpha", "0.5", "--trials", "3000", "--seed", &seed]
                .map(String::from)
                .to_vec(),
        ),
        (
            "simulate-json",
            ["simulate", "--channel", "mpsk:4", "--snr-db", "6", "--n-grid", "12", "--alpha", "1", "--trials", "2000", "--seed", &seed, "--format", "json"]
                .map(String::from)
                .to_vec(),
        ),
        ("capacity", ["capacity", "--channel", "mpsk:8:10", "--psk-samples", "20000", "--seed", &seed].map(String::from).to_vec()),
        ("fano", ["fano", "--instances", "300", "--seed", &seed].map(String::from).to_vec()),
        ("entropy", vec!["entropy".into(), "--kb".into(), concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/kb_skewed.json").into()]),
    ];
    let mut failures = Vec::new();
    for (name, args) in &runs {
        let ext = if *name == "simulate" { "csv" } else { "json" };
        let first = p(&format!("{name}.first.{ext}"));
        let mut a: Vec<&str> = vec!["--threads", "1"];
        a.extend(args.iter().map(String::as_str));
        a.extend(["--out", &first]);
        let (ok, err) = cli(&a);
        if !ok {
            failures.push(format!("{name}: {err}"));
            continue;
        }
        for threads in ["4", "3"] {
            let again = p(&format!("{name}.{threads}.{ext}"));
            let cmd = args[0].as_str();
            let (ok, err) = cli(&["--threads", threads, cmd, "--config", &first, "--out", &again]);
            if !ok {
                failures.push(format!("{name} rerun: {err}"));
            } else if data_rows(Path::new(&first)) != data_rows(Path::new(&again)) {
                failures.push(format!("{name}: rows differ with --threads {threads}"));
            } else if ext == "csv" && std::fs::read(&first).unwrap() != std::fs::read(&again).unwrap() {
                failures.push(format!("{name}: file differs with --threads {threads}"));
            }
        }
    }
    outcome(failures.is_empty(), if failures.is_empty() { format!("{} commands rerun from their outputs with 1, 4 and 3 threads: identical rows", runs.len()) } else { failures.join("; ") })
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        println!("criterion {id:>2} {} {name} ({secs:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o, secs));
    };
    run(1, "semantic entropy regression", &worked_values);
    run(2, "compression gain", &gain);
    run(3, "capacity oracle", &capacity_oracle);
    let chain = Mutex::new(None);
    run(4, "semantic Fano campaign", &|| {
        let (f, c) = fano_and_chain();
        *chain.lock().unwrap() = Some(c);
        f
    });
    run(5, "converse chain", &|| chain.lock().unwrap().take().unwrap_or_else(|| outcome(false, "campaign did not run")));
    run(6, "achievability trend", &achievability);
    run(7, "converse trend", &converse_trend);
    run(9, "Monte Carlo vs exact", &monte_carlo_vs_exact);
    run(8, "semantic errors never exceed message errors", &error_invariant);
    run(10, "M-PSK analytic vs Monte Carlo", &psk_cross_check);
    run(11, "CLI determinism", &determinism);
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {}/{} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
