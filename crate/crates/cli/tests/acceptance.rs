//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use omega_lab::acceptance::{accept_up, accept_up_bruteforce, accept_up_matexp, Label, UpWord};
use omega_lab::experiment::{
    correlate_runs, pearson, Balance, Category, EvalGrid, ModelInfo, RunConfigSnapshot, RunRecord,
};
use omega_lab::fixtures;
use omega_lab::neural::{
    amsgrad_step, backward, forward, init_params, loss, lr_at, AmsgradState, Batch, RnnParams, TrainConfig,
};
use omega_lab::sampling::{sample_balanced_batch, ClassTarget, Sampler};
use omega_lab::{Dba, SamplerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Criterion 1
const RANDOM_WORDS_PER_FIXTURE: usize = 10_000;
const MAX_ENCODED_LEN: usize = 512;
// Criterion 3
const GRAD_CONFIGS: usize = 50;
const GRAD_STEP: f64 = 1e-5;
const GRAD_REL_TOL: f64 = 1e-5;
const GRAD_L2: f64 = 5e-4;
// Criterion 4
const AMSGRAD_REL_TOL: f64 = 1e-12;
// Criterion 5
const BALANCE_RECORDS: usize = 10_000;
const BALANCE_RANGE: (f64, f64) = (0.45, 0.55);
// Criterion 6
const MIN_ID: f64 = 0.99;
const MIN_OOD: f64 = 0.95;
const DESK_CONFIG: &str = r#"{
  "schema": "omega-lab-config/v1",
  "train": {"hidden": 64, "batch": 64, "steps": 5000, "train_min_len": 2, "train_max_len": 32},
  "eval": {"min_len": 2, "max_len": 256, "per_length_count": 64}
}"#;
// Criterion 7
const PEARSON_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn all_words(alphabet: u32, min_len: usize, max_len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<u32>> = vec![vec![]];
    for len in 0..=max_len {
        if len >= min_len {
            out.extend(layer.iter().cloned());
        }
        let mut next = Vec::new();
        for w in &layer {
            for s in 0..alphabet {
                let mut w = w.clone();
                w.push(s);
                next.push(w);
            }
        }
        layer = next;
    }
    out
}

fn random_word(d: &Dba, rng: &mut ChaCha8Rng, max_encoded: usize) -> UpWord {
    let n = rng.gen_range(2..=max_encoded);
    let k = rng.gen_range(1..n);
    let sym = d.alphabet().assignments() as u32;
    UpWord::new(
        (0..k - 1).map(|_| rng.gen_range(0..sym)).collect(),
        (0..n - k).map(|_| rng.gen_range(0..sym)).collect(),
    )
}

fn disagrees(d: &Dba, w: &UpWord) -> bool {
    let a = accept_up(d, w);
    a != accept_up_matexp(d, w) || a != accept_up_bruteforce(d, w)
}

fn criterion_1() -> Outcome {
    let (mut checked, mut bad) = (0usize, 0usize);
    let us = all_words(2, 0, 3);
    let vs = all_words(2, 1, 3);
    for (_, d) in fixtures::fixtures().into_iter().filter(|(_, d)| d.prop_count() == 1) {
        for u in &us {
            for v in &vs {
                checked += 1;
                bad += usize::from(disagrees(&d, &UpWord::new(u.clone(), v.clone())));
            }
        }
    }
    let exhaustive = checked;
    for (i, (_, d)) in fixtures::fixtures().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1 + i as u64);
        let sampler = Sampler::new(&d, 100).unwrap();
        for j in 0..RANDOM_WORDS_PER_FIXTURE {
            // alternate raw uniform words with sampler output so both labels occur
            let w = match j % 3 {
                0 => random_word(&d, &mut rng, MAX_ENCODED_LEN),
                k => {
                    let n = rng.gen_range(2..=MAX_ENCODED_LEN);
                    let t = if k == 1 { ClassTarget::Accept } else { ClassTarget::Reject };
                    sampler
                        .sample_sequence(n, t, &mut rng)
                        .map(|r| r.word())
                        .unwrap_or_else(|_| random_word(&d, &mut rng, MAX_ENCODED_LEN))
                }
            };
            checked += 1;
            bad += usize::from(disagrees(&d, &w));
        }
    }
    outcome(
        bad == 0,
        format!("{bad} disagreements over {checked} words ({exhaustive} exhaustive, {} fixtures random)", fixtures::fixtures().len()),
    )
}

fn criterion_2() -> Outcome {
    let d = fixtures::fig1();
    let ab = UpWord::new(vec![], vec![0b11]);
    let ab_accepted = accept_up(&d, &ab) == Label::Accept && accept_up_bruteforce(&d, &ab) == Label::Accept;
    let mut wrong = 0;
    let mut total = 0;
    // exhaustive over 4 symbols up to |u|, |v| <= 2
    for u in all_words(4, 0, 2) {
        for v in all_words(4, 1, 2) {
            let first = u.first().or(v.first()).copied().unwrap();
            if first & 1 == 0 {
                total += 1;
                wrong += usize::from(accept_up_bruteforce(&d, &UpWord::new(u.clone(), v)) != Label::Reject);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    for _ in 0..10_000 {
        let mut w = random_word(&d, &mut rng, MAX_ENCODED_LEN);
        let first = if w.u.is_empty() { &mut w.v[0] } else { &mut w.u[0] };
        *first &= !1;
        total += 1;
        wrong += usize::from(accept_up(&d, &w) != Label::Reject);
    }
    outcome(
        ab_accepted && wrong == 0,
        format!("(a&b)^w accepted: {ab_accepted}; {wrong} of {total} words starting with !a accepted"),
    )
}

fn objective(p: &RnnParams, b: &Batch) -> f64 {
    loss(&forward(p, b).0, &b.labels).0 + GRAD_L2 * p.weight_sq_sum()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let mut worst: f64 = 0.0;
    for _ in 0..GRAD_CONFIGS {
        let alphabet = rng.gen_range(2..=5);
        let hidden = rng.gen_range(1..=8);
        let mut p = init_params(alphabet, hidden, rng.gen());
        for b in p.blocks_mut() {
            for x in b.iter_mut() {
                *x = 1.5 * *x + rng.gen_range(-0.3..0.3);
            }
        }
        let n = rng.gen_range(1..=4);
        let seqs: Vec<Vec<u32>> = (0..n)
            .map(|_| (0..rng.gen_range(1..=12)).map(|_| rng.gen_range(0..alphabet as u32)).collect())
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
        let b = Batch::from_sequences(&seqs, &labels);
        let (logits, trace) = forward(&p, &b);
        let analytic = backward(&p, &trace, &loss(&logits, &b.labels).1, GRAD_L2).flatten();
        let mut numeric = Vec::new();
        let mut q = p.clone();
        for bi in 0..5 {
            for j in 0..p.blocks()[bi].len() {
                let orig = q.blocks()[bi][j];
                q.blocks_mut()[bi][j] = orig + GRAD_STEP;
                let hi = objective(&q, &b);
                q.blocks_mut()[bi][j] = orig - GRAD_STEP;
                let lo = objective(&q, &b);
                q.blocks_mut()[bi][j] = orig;
                numeric.push((hi - lo) / (2.0 * GRAD_STEP));
            }
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, n)| a - n).collect();
        worst = worst.max(norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-12));
    }
    outcome(
        worst < GRAD_REL_TOL,
        format!("worst relative error {worst:.3e} over {GRAD_CONFIGS} configurations (tolerance {GRAD_REL_TOL:e})"),
    )
}

fn criterion_4() -> Outcome {
    let cfg = TrainConfig::default();
    let lr0 = lr_at(0, &cfg);
    let lr_peak = lr_at(cfg.steps / 5, &cfg);
    let lr_mid = lr_at(cfg.steps / 10, &cfg);
    let mut p = RnnParams::zeros(1, 1);
    let mut g = RnnParams::zeros(1, 1);
    g.b_out[0] = 1.0;
    let mut st = AmsgradState::for_config(&p, &cfg);
    amsgrad_step(&mut p, &g, &mut st, 1e-3);
    let want = -1e-3 * 0.1 / (0.001f64.sqrt() + 1e-8);
    let rel = ((p.b_out[0] - want) / want).abs();
    let untouched = p.b_out[1] == 0.0 && p.w_in.iter().all(|&x| x == 0.0);
    let pass = lr0 == 1e-8 && lr_peak == 1e-3 && (lr_mid - 5.00005e-4).abs() < 1e-15 && rel < AMSGRAD_REL_TOL && untouched;
    outcome(
        pass,
        format!(
            "lr(0) = {lr0:e}, lr(0.2 steps) = {lr_peak:e}, lr(0.1 steps) = {lr_mid:e}; first step {:.6e} (rel. error {rel:.1e})",
            p.b_out[0]
        ),
    )
}

fn criterion_5() -> Outcome {
    let cfg = SamplerConfig::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["fig1", "gf_a", "always_a"] {
        let d = fixtures::fixture(name).unwrap();
        let b = sample_balanced_batch(&d, BALANCE_RECORDS, cfg.length_range(), &cfg, 0xC5).unwrap();
        let f = b.stats.achieved_positive_fraction;
        pass &= b.records.len() == BALANCE_RECORDS && (BALANCE_RANGE.0..=BALANCE_RANGE.1).contains(&f);
        parts.push(format!("{name} {f:.4}"));
    }
    let d = fixtures::always_a();
    let u = Sampler::new(&d, cfg.max_resample_attempts)
        .unwrap()
        .uniform_batch(BALANCE_RECORDS, cfg.length_range(), 0xC5);
    parts.push(format!("always_a uniform {:.4}", u.stats.achieved_positive_fraction));
    outcome(pass, format!("positive fractions: {}", parts.join(", ")))
}

fn synthetic(n_states: usize, ood: f64, norm: f64) -> RunRecord {
    RunRecord {
        automaton: format!("s{n_states}"),
        n_states,
        automaton_sha256: String::new(),
        completion_added_state: false,
        seed: 0,
        config: RunConfigSnapshot {
            train: TrainConfig::default(),
            eval: Default::default(),
            balance: Balance::default(),
            train_mode: Default::default(),
        },
        model: ModelInfo::default(),
        history: vec![],
        grid: EvalGrid {
            lengths: vec![],
            per_length_count: 0,
            accuracy: vec![],
            positive_fraction: vec![],
            correct_positive: vec![],
            correct_negative: vec![],
            positives: vec![],
        },
        id_accuracy: 1.0,
        ood_accuracy: ood,
        category: Category::from_accuracy(ood),
        param_norm: norm,
        final_loss: 0.0,
        train_positive_fraction: 0.5,
        validation_positive_fraction: 0.5,
        test_positive_fraction: 0.5,
        imbalanced: false,
        per_class_accuracy: None,
        version: None,
        wall_clock_secs: 0.0,
    }
}

fn criterion_7() -> Outcome {
    let x = [1.0, 2.0, 3.0];
    let pos = pearson(&x, &[1.0, 2.0, 3.0]).unwrap();
    let neg = pearson(&x, &[3.0, 2.0, 1.0]).unwrap();
    let half = pearson(&x, &[1.0, 3.0, 2.0]).unwrap();
    let runs = [synthetic(3, 1.0, 1.5), synthetic(8, 0.97, 4.0), synthetic(16, 0.99, 8.0), synthetic(32, 0.9, 16.0)];
    let rep = correlate_runs(&runs).unwrap();
    let pass = (pos.r - 1.0).abs() < PEARSON_TOL
        && (neg.r + 1.0).abs() < PEARSON_TOL
        && (half.r - 0.5).abs() < PEARSON_TOL
        && (rep.states_vs_norm.r - 1.0).abs() < PEARSON_TOL;
    outcome(
        pass,
        format!(
            "r = {}, {}, {} (p for 0.5: {:.6}); synthetic norm-vs-states r = {}",
            pos.r, neg.r, half.r, half.p, rep.states_vs_norm.r
        ),
    )
}

struct TrainResult {
    id: f64,
    ood: f64,
    run_json: Vec<u8>,
}

fn train_via_cli(work: &Path, task: &str, tag: &str) -> Result<TrainResult, String> {
    let cfg = work.join("desk.json");
    std::fs::write(&cfg, DESK_CONFIG).map_err(|e| e.to_string())?;
    let out_dir = work.join(tag);
    let status = Command::new(env!("CARGO_BIN_EXE_omega-lab"))
        .args(["train", "--config"])
        .arg(&cfg)
        .args(["--automaton", &format!("fixture:{task}"), "--seed", "0", "--out-dir"])
        .arg(&out_dir)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("train exited with {status}"));
    }
    let path = out_dir.join("runs").join(task).join("0").join("run.json");
    let run_json = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let v: serde_json::Value = serde_json::from_slice(&run_json).map_err(|e| e.to_string())?;
    Ok(TrainResult {
        id: v["id_accuracy"].as_f64().unwrap_or(f64::NAN),
        ood: v["ood_accuracy"].as_f64().unwrap_or(f64::NAN),
        run_json,
    })
}

fn criteria_6_and_8() -> (Outcome, Outcome) {
    let work = tempfile::tempdir().expect("temp dir");
    let mut lines6 = Vec::new();
    let mut lines8 = Vec::new();
    let mut any_task = false;
    let mut all_identical = true;
    for task in ["fig1", "cycle_8"] {
        let first = train_via_cli(work.path(), task, "first");
        let second = train_via_cli(work.path(), task, "second");
        match (first, second) {
            (Ok(a), Ok(b)) => {
                let same = a.run_json == b.run_json;
                all_identical &= same;
                let met = a.id >= MIN_ID && a.ood >= MIN_OOD;
                any_task |= met && same;
                lines6.push(format!("{task} ID {:.4} OOD {:.4}{}", a.id, a.ood, if met { " (met)" } else { "" }));
                lines8.push(format!("{task} {}", if same { "identical" } else { "DIFFERENT" }));
            }
            (a, b) => {
                all_identical = false;
                let err = a.err().or(b.err()).unwrap_or_default();
                lines6.push(format!("{task} failed: {err}"));
                lines8.push(format!("{task} failed"));
            }
        }
    }
    (
        outcome(any_task, lines6.join("; ")),
        outcome(all_identical, format!("run.json across two invocations: {}", lines8.join(", "))),
    )
}

fn main() {
    let names = [
        "1 oracle equivalence",
        "2 fig1 language facts",
        "3 gradient check",
        "4 optimizer and schedule",
        "5 class balance",
        "6 desk-scale generalization",
        "7 correlation statistics",
        "8 reproducible training",
    ];
    let mut results: Vec<(usize, Outcome, f64)> = Vec::new();
    let timed = |f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        (o, t.elapsed().as_secs_f64())
    };
    for (i, f) in [
        (0, &criterion_1 as &dyn Fn() -> Outcome),
        (1, &criterion_2),
        (2, &criterion_3),
        (3, &criterion_4),
        (4, &criterion_5),
        (6, &criterion_7),
    ] {
        let (o, s) = timed(f);
        report(names[i], &o, s);
        results.push((i, o, s));
    }
    let t = Instant::now();
    let (c6, c8) = criteria_6_and_8();
    let s = t.elapsed().as_secs_f64();
    report(names[5], &c6, s);
    report(names[7], &c8, s);
    results.push((5, c6, s));
    results.push((7, c8, s));
    let failed = results.iter().filter(|r| !r.1.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn report(name: &str, o: &Outcome, secs: f64) {
    println!("[{}] criterion {name}: {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}
