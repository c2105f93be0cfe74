use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use omega_lab::experiment::{
    category_table, category_table_markdown, correlate_runs, evaluate_range, range_curve_svg, summarize_id_ood,
    train_run, validation_curve_svg, AutomatonInfo, ExperimentError,
};
use omega_lab::neural::Checkpoint;
use omega_lab::sampling::{automaton_sha256, read_dataset, sample_dataset, write_dataset, DatasetHeader, RecordLine};
use omega_lab::{Method, RunRecord, SinkClass, UpWord};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, ResultExt};
use crate::source::{self, Loaded};
use crate::VERSION;

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn require_automaton(cfg: &RunConfig) -> Result<Loaded, CliError> {
    let src = cfg
        .automaton
        .as_deref()
        .ok_or_else(|| CliError::config("no automaton given (use --automaton or the `automaton` config key)"))?;
    source::load(src)
}

fn experiment_error(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::Config(_) => CliError::config(e),
        other => CliError::runtime(other),
    }
}

pub fn inspect(src: &str, as_json: bool) -> Result<(), CliError> {
    let a = source::load(src)?;
    let d = &a.dba;
    let sinks = d.classify_sinks();
    let count = |c: SinkClass| sinks.iter().filter(|&&s| s == c).count();
    let sink_list = |c: SinkClass| -> Vec<usize> { (0..sinks.len()).filter(|&q| sinks[q] == c).collect() };
    let report = json!({
        "automaton": a.name,
        "states": d.n_states(),
        "propositions": d.ap_names(),
        "alphabet_size": d.alphabet().size(),
        "accepting_states": d.accepting_states().len(),
        "accepting_sinks": sink_list(SinkClass::AcceptingSink),
        "rejecting_sinks": sink_list(SinkClass::RejectingSink),
        "complete_as_given": !a.completion_added_state,
        "completion_added_state": a.completion_added_state,
        "sha256": automaton_sha256(d),
    });
    if as_json {
        print!("{}", pretty(&report));
        return Ok(());
    }
    println!("automaton:        {}", a.name);
    println!("states:           {}", d.n_states());
    println!("propositions:     {} ({})", d.prop_count(), d.ap_names().join(", "));
    println!("alphabet size:    {} (2^{} assignments + separator)", d.alphabet().size(), d.prop_count());
    println!("accepting states: {}", d.accepting_states().len());
    println!(
        "sinks:            {} accepting {:?}, {} rejecting {:?}",
        count(SinkClass::AcceptingSink),
        sink_list(SinkClass::AcceptingSink),
        count(SinkClass::RejectingSink),
        sink_list(SinkClass::RejectingSink)
    );
    if a.completion_added_state {
        println!("complete:         no (trap state {} added)", d.n_states() - 1);
    } else {
        println!("complete:         yes");
    }
    Ok(())
}

pub fn sample(cfg: &RunConfig, count: usize, out: Option<PathBuf>) -> Result<(), CliError> {
    if count == 0 {
        return Err(CliError::config("--count must be at least 1"));
    }
    let a = require_automaton(cfg)?;
    let ds = sample_dataset(&a.dba, &cfg.sampler, count).or_runtime()?;
    let mut header = ds.header;
    header.version = Some(VERSION.to_string());
    header.config = Some(serde_json::to_value(&cfg.sampler).unwrap());
    header.stats = Some(ds.batch.stats.clone());
    let lines: Vec<RecordLine> = ds.batch.records.iter().map(RecordLine::from).collect();
    let path = out.unwrap_or_else(|| {
        cfg.out_dir
            .join("datasets")
            .join(format!("{}-{}.jsonl", a.name, cfg.sampler.seed))
    });
    let mut buf = Vec::new();
    write_dataset(&mut buf, &header, &lines).or_runtime()?;
    write_file(&path, buf)?;
    eprintln!(
        "wrote {} records to {} (positive fraction {:.4})",
        lines.len(),
        path.display(),
        ds.batch.stats.achieved_positive_fraction
    );
    Ok(())
}

pub fn label(src: &str, input: &Path, method: Method, out: Option<&Path>) -> Result<(), CliError> {
    let a = source::load(src)?;
    let file = fs::File::open(input).map_err(|e| CliError::config(format!("{}: {e}", input.display())))?;
    let (header, records) = read_dataset(BufReader::new(file)).map_err(|e| match &e {
        omega_lab::sampling::DatasetError::Json { line, source } => {
            CliError::config(format!("{}:{line}:{}: {source}", input.display(), source.column()))
        }
        omega_lab::sampling::DatasetError::Invalid { line, message } => {
            CliError::config(format!("{}:{line}:1: {message}", input.display()))
        }
        _ => CliError::config(format!("{}: {e}", input.display())),
    })?;
    if header.alphabet_size != a.dba.alphabet().size() {
        return Err(CliError::config(format!(
            "{}: dataset alphabet has {} symbols, automaton has {}",
            input.display(),
            header.alphabet_size,
            a.dba.alphabet().size()
        )));
    }
    let sha = automaton_sha256(&a.dba);
    if header.automaton_sha256 != sha {
        eprintln!("note: {} was generated from a different automaton", input.display());
    }
    let relabelled: Vec<RecordLine> = records
        .into_iter()
        .map(|r| {
            let label = method.decide(&a.dba, &UpWord::new(r.u.clone(), r.v.clone()));
            RecordLine {
                label: Some(label.as_u8()),
                ..r
            }
        })
        .collect();
    let new_header = DatasetHeader {
        automaton_sha256: sha,
        version: Some(VERSION.to_string()),
        ..header
    };
    let mut buf = Vec::new();
    write_dataset(&mut buf, &new_header, &relabelled).or_runtime()?;
    match out {
        Some(p) => write_file(p, buf),
        None => std::io::stdout().write_all(&buf).or_runtime(),
    }
}

pub fn train(cfg: &RunConfig) -> Result<(), CliError> {
    let a = require_automaton(cfg)?;
    let info = AutomatonInfo {
        name: a.name.clone(),
        completion_added_state: a.completion_added_state,
    };
    for seed in cfg.seeds() {
        let mut tc = cfg.train.clone();
        tc.seed = seed;
        let outcome =
            train_run(&a.dba, &info, &tc, cfg.sampler.mode, &cfg.balance(), &cfg.eval).map_err(experiment_error)?;
        let mut record = outcome.record;
        record.version = Some(VERSION.to_string());
        let dir = cfg.out_dir.join("runs").join(&a.name).join(seed.to_string());
        write_file(&dir.join("run.json"), pretty(&record))?;
        write_file(&dir.join("checkpoint.json"), outcome.checkpoint.to_json())?;
        write_file(&dir.join("accuracy.csv"), record.grid.to_csv())?;
        write_file(&dir.join("validation.svg"), validation_curve_svg(&[&record]))?;
        write_file(&dir.join("range.svg"), range_curve_svg(&[&record]))?;
        let finished = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        write_file(
            &dir.join("timing.json"),
            pretty(&json!({ "wall_clock_secs": record.wall_clock_secs, "finished_unix": finished })),
        )?;
        println!(
            "{} seed {}: ID {:.4} OOD {:.4} ({}) norm {:.3}{} -> {}",
            a.name,
            seed,
            record.id_accuracy,
            record.ood_accuracy,
            record.category.label(),
            record.param_norm,
            if record.imbalanced { " [imbalanced]" } else { "" },
            dir.display()
        );
    }
    Ok(())
}

pub fn eval(cfg: &RunConfig, checkpoint: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let a = require_automaton(cfg)?;
    let ck = Checkpoint::load(checkpoint).map_err(|e| CliError::config(format!("{}: {e}", checkpoint.display())))?;
    let sha = automaton_sha256(&a.dba);
    if ck.automaton_sha256.as_deref().is_some_and(|s| s != sha) {
        return Err(CliError::config(format!(
            "{}: checkpoint was trained on a different automaton",
            checkpoint.display()
        )));
    }
    if ck.params.alphabet_size != a.dba.alphabet().size() {
        return Err(CliError::config("checkpoint alphabet does not match the automaton"));
    }
    let grid = evaluate_range(&ck.params, &a.dba, &cfg.eval, &cfg.balance()).map_err(experiment_error)?;
    let summary = summarize_id_ood(&grid, ck.config.train_max_len).map_err(experiment_error)?;
    let path = out.unwrap_or_else(|| checkpoint.with_file_name("eval_accuracy.csv"));
    write_file(&path, grid.to_csv())?;
    print!(
        "{}",
        pretty(&json!({
            "automaton": a.name,
            "id_accuracy": summary.id_accuracy,
            "ood_accuracy": summary.ood_accuracy,
            "category": summary.category.label(),
            "test_positive_fraction": grid.mean_positive_fraction(),
            "csv": path,
        }))
    );
    Ok(())
}

fn collect_runs(inputs: &[PathBuf]) -> Result<Vec<RunRecord>, CliError> {
    let mut paths = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = walkdir::WalkDir::new(p)
                .into_iter()
                .filter_map(Result::ok)
                .filter(|e| e.file_type().is_file() && e.file_name() == "run.json")
                .map(|e| e.into_path())
                .collect();
            found.sort();
            paths.extend(found);
        } else {
            paths.push(p.clone());
        }
    }
    if paths.is_empty() {
        return Err(CliError::config("no run.json files found"));
    }
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{}:{}:{}: {e}", p.display(), e.line(), e.column())))
        })
        .collect()
}

pub fn correlate(inputs: &[PathBuf], out_dir: &Path) -> Result<(), CliError> {
    let runs = collect_runs(inputs)?;
    let rep = correlate_runs(&runs).map_err(|e| CliError::config(format!("cannot correlate {} runs: {e}", runs.len())))?;
    let dir = out_dir.join("reports");
    write_file(&dir.join("correlation.csv"), rep.to_csv())?;
    write_file(&dir.join("correlation.json"), pretty(&rep))?;
    write_file(&dir.join("ood_vs_states.svg"), rep.ood_scatter_svg())?;
    write_file(&dir.join("norm_vs_states.svg"), rep.norm_scatter_svg())?;
    println!(
        "states vs OOD accuracy:   r = {:.4}, p = {:.4} (n = {})",
        rep.states_vs_ood.r, rep.states_vs_ood.p, rep.states_vs_ood.n
    );
    println!(
        "states vs parameter norm: r = {:.4}, p = {:.4} (n = {})",
        rep.states_vs_norm.r, rep.states_vs_norm.p, rep.states_vs_norm.n
    );
    println!("wrote {}", dir.display());
    Ok(())
}

pub fn report(inputs: &[PathBuf], out_dir: &Path) -> Result<(), CliError> {
    let runs = collect_runs(inputs)?;
    let mut md = String::from("# Generalization summary\n\n");
    md.push_str(&category_table_markdown(&category_table(&runs)));
    md.push_str("\n## Runs\n\n| Automaton | States | Seed | ID Acc. | OOD Acc. | Category | Param. norm | Per-class (acc/rej) |\n|---|---:|---:|---:|---:|---|---:|---|\n");
    for r in &runs {
        let per_class = match r.per_class_accuracy {
            Some((p, n)) => {
                let f = |x: Option<f64>| x.map_or("--".to_string(), |v| format!("{:.1}%", 100.0 * v));
                format!("{} / {}", f(p), f(n))
            }
            None => String::new(),
        };
        md.push_str(&format!(
            "| {} | {} | {} | {:.1}% | {:.1}% | {} | {:.3} | {} |\n",
            r.automaton,
            r.n_states,
            r.seed,
            100.0 * r.id_accuracy,
            100.0 * r.ood_accuracy,
            r.category.label(),
            r.param_norm,
            per_class
        ));
    }
    let dir = out_dir.join("reports");
    let refs: Vec<&RunRecord> = runs.iter().collect();
    write_file(&dir.join("summary.md"), &md)?;
    write_file(&dir.join("validation.svg"), validation_curve_svg(&refs))?;
    write_file(&dir.join("range.svg"), range_curve_svg(&refs))?;
    print!("{md}");
    Ok(())
}
