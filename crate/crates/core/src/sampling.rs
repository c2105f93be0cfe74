//! Dataset generation: lasso words drawn by walking the automaton, encoded
//! as `u $ v`, labelled exactly, and optionally balanced between classes.
//!
//! A sequence of total length `n` puts the separator at position `k`, drawn
//! uniformly from `1..=n-1`, so `|u| = k - 1` and `|v| = n - k >= 1`. Both
//! parts are walks that pick uniformly among the allowed symbols at every
//! step. Class-targeted sampling narrows the allowed symbols:
//!
//! * accept: never enter a rejecting sink;
//! * reject: never enter an accepting sink, and inside `v` never enter any
//!   accepting state.
//!
//! The constraints are heuristics. Every record is labelled by
//! [`accept_up`] afterwards, whatever it was aimed at.

use std::io::{BufRead, Write};
use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::acceptance::{accept_up, accept_up_bruteforce, Label, UpWord};
use crate::automaton::{Dba, SinkClass, StateId};
use crate::hoa::emit_hoa;
use crate::rng::{domain, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Uniform,
    #[default]
    Balanced,
}

impl std::str::FromStr for SampleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "balanced" => Ok(Self::Balanced),
            other => Err(format!("unknown mode {other:?} (uniform, balanced)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub target_positive_fraction: f64,
    pub oversample_factor: usize,
    pub max_resample_attempts: usize,
    pub mode: SampleMode,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            min_len: 2,
            max_len: 64,
            target_positive_fraction: 0.5,
            oversample_factor: 4,
            max_resample_attempts: 100,
            mode: SampleMode::Balanced,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SampleError> {
        if self.min_len < 2 || self.min_len > self.max_len {
            return Err(SampleError::Config(format!(
                "need 2 <= min_len <= max_len, got {}..={}",
                self.min_len, self.max_len
            )));
        }
        if !(self.target_positive_fraction > 0.0 && self.target_positive_fraction < 1.0) {
            return Err(SampleError::Config(format!(
                "target_positive_fraction must be in (0, 1), got {}",
                self.target_positive_fraction
            )));
        }
        if self.oversample_factor < 1 || self.max_resample_attempts < 1 {
            return Err(SampleError::Config(
                "oversample_factor and max_resample_attempts must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn length_range(&self) -> RangeInclusive<usize> {
        self.min_len..=self.max_len
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("no allowed symbol after {attempts} sampling attempts")]
    DeadEnd { attempts: usize },
    #[error("invalid sampler configuration: {0}")]
    Config(String),
    #[error("automaton must be complete before sampling")]
    Incomplete,
}

/// A lasso word with its `u $ v` encoding and label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceRecord {
    pub u: Vec<u32>,
    pub v: Vec<u32>,
    pub encoded: Vec<u32>,
    pub label: Label,
}

impl SequenceRecord {
    pub fn new(u: Vec<u32>, v: Vec<u32>, label: Label, separator: u32) -> Self {
        let encoded = encode(&u, &v, separator);
        Self {
            u,
            v,
            encoded,
            label,
        }
    }

    pub fn length(&self) -> usize {
        self.encoded.len()
    }

    pub fn word(&self) -> UpWord {
        UpWord::new(self.u.clone(), self.v.clone())
    }
}

/// `u ++ [separator] ++ v`.
pub fn encode(u: &[u32], v: &[u32], separator: u32) -> Vec<u32> {
    assert!(!v.is_empty(), "suffix must be nonempty");
    let mut out = Vec::with_capacity(u.len() + 1 + v.len());
    out.extend_from_slice(u);
    out.push(separator);
    out.extend_from_slice(v);
    out
}

/// Splits an encoded sequence at its single separator.
pub fn decode(encoded: &[u32], separator: u32) -> Option<(Vec<u32>, Vec<u32>)> {
    let mut seps = encoded.iter().enumerate().filter(|(_, &s)| s == separator);
    let (k, _) = seps.next()?;
    if seps.next().is_some() || k + 1 == encoded.len() {
        return None;
    }
    Some((encoded[..k].to_vec(), encoded[k + 1..].to_vec()))
}

/// Separator position `k`, uniform on `1..=n-1`.
pub fn sample_split<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    assert!(n >= 2, "sequence length must be at least 2");
    rng.gen_range(1..n)
}

/// Walks `len` steps from `start`, choosing uniformly among symbols whose
/// successor is not in `forbidden` (a mask indexed by state).
pub fn sample_path<R: Rng + ?Sized>(
    dba: &Dba,
    start: StateId,
    len: usize,
    forbidden: &[bool],
    rng: &mut R,
) -> Result<(Vec<u32>, StateId), SampleError> {
    let mut q = start;
    let mut out = Vec::with_capacity(len);
    let mut allowed = Vec::with_capacity(dba.n_symbols());
    for _ in 0..len {
        allowed.clear();
        allowed.extend(
            dba.successors(q)
                .iter()
                .enumerate()
                .filter(|(_, &t)| !forbidden[t as usize])
                .map(|(s, _)| s as u32),
        );
        if allowed.is_empty() {
            return Err(SampleError::DeadEnd { attempts: 1 });
        }
        let s = allowed[rng.gen_range(0..allowed.len())];
        out.push(s);
        q = dba.step(q, s);
    }
    Ok((out, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTarget {
    Accept,
    Reject,
    Any,
}

/// Allowed-symbol lists for one forbidden-state set.
#[derive(Debug, Clone)]
struct AllowedTable {
    forbidden: Vec<bool>,
    per_state: Vec<Vec<u32>>,
}

impl AllowedTable {
    fn new(dba: &Dba, forbidden: Vec<bool>) -> Self {
        let per_state = (0..dba.n_states() as StateId)
            .map(|q| {
                dba.successors(q)
                    .iter()
                    .enumerate()
                    .filter(|(_, &t)| !forbidden[t as usize])
                    .map(|(s, _)| s as u32)
                    .collect()
            })
            .collect();
        Self {
            forbidden,
            per_state,
        }
    }

    fn walk<R: Rng + ?Sized>(
        &self,
        dba: &Dba,
        start: StateId,
        len: usize,
        rng: &mut R,
        out: &mut Vec<u32>,
    ) -> Option<StateId> {
        let mut q = start;
        for _ in 0..len {
            let allowed = &self.per_state[q as usize];
            if allowed.is_empty() {
                return None;
            }
            let s = allowed[rng.gen_range(0..allowed.len())];
            out.push(s);
            q = dba.step(q, s);
        }
        Some(q)
    }
}

/// Per-automaton sampling state: sink tags and cached allowed-symbol tables.
///
/// Draws are identical to calling [`sample_path`] with the same forbidden
/// sets and generator.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    dba: &'a Dba,
    separator: u32,
    max_resample_attempts: usize,
    unconstrained: AllowedTable,
    no_rejecting_sinks: AllowedTable,
    no_accepting_sinks: AllowedTable,
    no_accepting: AllowedTable,
}

impl<'a> Sampler<'a> {
    pub fn new(dba: &'a Dba, max_resample_attempts: usize) -> Result<Self, SampleError> {
        if !dba.is_complete() {
            return Err(SampleError::Incomplete);
        }
        let sinks = dba.classify_sinks();
        let n = dba.n_states();
        let mask = |f: &dyn Fn(usize) -> bool| (0..n).map(f).collect::<Vec<bool>>();
        Ok(Self {
            dba,
            separator: dba.alphabet().separator_index() as u32,
            max_resample_attempts: max_resample_attempts.max(1),
            unconstrained: AllowedTable::new(dba, vec![false; n]),
            no_rejecting_sinks: AllowedTable::new(
                dba,
                mask(&|q| sinks[q] == SinkClass::RejectingSink),
            ),
            no_accepting_sinks: AllowedTable::new(
                dba,
                mask(&|q| sinks[q] == SinkClass::AcceptingSink),
            ),
            no_accepting: AllowedTable::new(
                dba,
                mask(&|q| sinks[q] == SinkClass::AcceptingSink || dba.is_accepting(q as StateId)),
            ),
        })
    }

    pub fn dba(&self) -> &Dba {
        self.dba
    }

    /// Forbidden-state masks for `(u, v)` under a class target.
    pub fn forbidden_sets(&self, target: ClassTarget) -> (&[bool], &[bool]) {
        let (u, v) = self.tables(target);
        (&u.forbidden, &v.forbidden)
    }

    fn tables(&self, target: ClassTarget) -> (&AllowedTable, &AllowedTable) {
        match target {
            ClassTarget::Any => (&self.unconstrained, &self.unconstrained),
            ClassTarget::Accept => (&self.no_rejecting_sinks, &self.no_rejecting_sinks),
            ClassTarget::Reject => (&self.no_accepting_sinks, &self.no_accepting),
        }
    }

    /// One labelled sequence of total length `n`, restarting from scratch
    /// (fresh split, prefix and suffix) after every dead end.
    pub fn sample_sequence<R: Rng + ?Sized>(
        &self,
        n: usize,
        target: ClassTarget,
        rng: &mut R,
    ) -> Result<SequenceRecord, SampleError> {
        let (tu, tv) = self.tables(target);
        for _ in 0..self.max_resample_attempts {
            let k = sample_split(n, rng);
            let mut u = Vec::with_capacity(k - 1);
            let Some(q) = tu.walk(self.dba, self.dba.initial(), k - 1, rng, &mut u) else {
                continue;
            };
            let mut v = Vec::with_capacity(n - k);
            if tv.walk(self.dba, q, n - k, rng, &mut v).is_none() {
                continue;
            }
            let label = accept_up(self.dba, &UpWord { u: u.clone(), v: v.clone() });
            return Ok(SequenceRecord::new(u, v, label, self.separator));
        }
        Err(SampleError::DeadEnd {
            attempts: self.max_resample_attempts,
        })
    }

    /// `count` records with lengths uniform in `lengths` and no class
    /// targeting. Record `i` draws from its own stream of `seed`.
    pub fn uniform_batch(&self, count: usize, lengths: RangeInclusive<usize>, seed: u64) -> Batch {
        let records: Vec<SequenceRecord> = (0..count)
            .map(|i| {
                let mut rng = stream(seed, domain::BATCH_RECORD, i as u64);
                let n = rng.gen_range(lengths.clone());
                let rec = self
                    .sample_sequence(n, ClassTarget::Any, &mut rng)
                    .expect("complete automaton never dead-ends without constraints");
                spot_check(self.dba, i, &rec);
                rec
            })
            .collect();
        Batch::from_records(records, count as u64, 0, 0)
    }

    /// Oversample with alternating class targets, then keep the mix closest
    /// to `target_positive_fraction`.
    ///
    /// Candidate `i` uses stream `i` of `seed`. At most
    /// `oversample_factor * count` candidates are drawn per class target;
    /// a candidate whose label disagrees with its target goes to the pool of
    /// its actual label. Any shortfall of one class is filled from the other
    /// and shows up in [`BatchStats::achieved_positive_fraction`].
    pub fn balanced_batch(
        &self,
        count: usize,
        lengths: RangeInclusive<usize>,
        target_positive_fraction: f64,
        oversample_factor: usize,
        seed: u64,
    ) -> Batch {
        assert!(count >= 1, "batch must contain at least one record");
        let want_pos = ((target_positive_fraction * count as f64).round() as usize).min(count);
        let want_neg = count - want_pos;
        let budget = oversample_factor.max(1) * count;

        let mut pos: Vec<(usize, SequenceRecord)> = Vec::new();
        let mut neg: Vec<(usize, SequenceRecord)> = Vec::new();
        let mut used = [0usize; 2]; // accept, reject
        let (mut dead_ends, mut mismatches) = (0u64, 0u64);
        let mut i = 0usize;
        loop {
            let need_pos = pos.len() < want_pos;
            let need_neg = neg.len() < want_neg;
            if !need_pos && !need_neg {
                break;
            }
            let preferred = match (need_pos, need_neg) {
                (true, false) => ClassTarget::Accept,
                (false, true) => ClassTarget::Reject,
                _ if i % 2 == 0 => ClassTarget::Accept,
                _ => ClassTarget::Reject,
            };
            let slot = |t: ClassTarget| usize::from(t == ClassTarget::Reject);
            let target = if used[slot(preferred)] < budget {
                preferred
            } else {
                let other = if preferred == ClassTarget::Accept {
                    ClassTarget::Reject
                } else {
                    ClassTarget::Accept
                };
                if used[slot(other)] < budget {
                    other
                } else {
                    break;
                }
            };
            used[slot(target)] += 1;

            let mut rng = stream(seed, domain::BATCH_RECORD, i as u64);
            let n = rng.gen_range(lengths.clone());
            match self.sample_sequence(n, target, &mut rng) {
                Ok(rec) => {
                    spot_check(self.dba, i, &rec);
                    let hit = matches!(
                        (target, rec.label),
                        (ClassTarget::Accept, Label::Accept) | (ClassTarget::Reject, Label::Reject)
                    );
                    if !hit {
                        mismatches += 1;
                    }
                    if rec.label.is_accept() {
                        pos.push((i, rec));
                    } else {
                        neg.push((i, rec));
                    }
                }
                Err(_) => dead_ends += 1,
            }
            i += 1;
        }

        let take_pos = want_pos.min(pos.len());
        let take_neg = want_neg.min(neg.len());
        let mut short = count - take_pos - take_neg;
        let extra_pos = short.min(pos.len() - take_pos);
        short -= extra_pos;
        let extra_neg = short.min(neg.len() - take_neg);
        short -= extra_neg;
        let mut chosen: Vec<(usize, SequenceRecord)> = pos
            .into_iter()
            .take(take_pos + extra_pos)
            .chain(neg.into_iter().take(take_neg + extra_neg))
            .collect();
        // neither class target produced enough: top up without constraints
        for _ in 0..short {
            let mut rng = stream(seed, domain::BATCH_RECORD, i as u64);
            let n = rng.gen_range(lengths.clone());
            let rec = self
                .sample_sequence(n, ClassTarget::Any, &mut rng)
                .expect("complete automaton never dead-ends without constraints");
            chosen.push((i, rec));
            i += 1;
        }
        chosen.sort_by_key(|(idx, _)| *idx);
        let records = chosen.into_iter().map(|(_, r)| r).collect();
        Batch::from_records(records, i as u64, dead_ends, mismatches)
    }
}

fn spot_check(dba: &Dba, index: usize, rec: &SequenceRecord) {
    if index % 100 == 0 {
        assert_eq!(
            accept_up_bruteforce(dba, &rec.word()),
            rec.label,
            "label disagrees with the brute-force oracle"
        );
    }
}

/// Statistics reported alongside a generated batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub count: usize,
    pub positives: usize,
    pub achieved_positive_fraction: f64,
    pub candidates: u64,
    pub dead_ends: u64,
    pub mismatches: u64,
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub records: Vec<SequenceRecord>,
    pub stats: BatchStats,
}

impl Batch {
    fn from_records(records: Vec<SequenceRecord>, candidates: u64, dead_ends: u64, mismatches: u64) -> Self {
        let positives = records.iter().filter(|r| r.label.is_accept()).count();
        let stats = BatchStats {
            count: records.len(),
            positives,
            achieved_positive_fraction: positives as f64 / records.len().max(1) as f64,
            candidates,
            dead_ends,
            mismatches,
        };
        Self { records, stats }
    }
}

/// Free-standing form of [`Sampler::sample_sequence`].
pub fn sample_sequence<R: Rng + ?Sized>(
    dba: &Dba,
    n: usize,
    target: ClassTarget,
    max_resample_attempts: usize,
    rng: &mut R,
) -> Result<SequenceRecord, SampleError> {
    Sampler::new(dba, max_resample_attempts)?.sample_sequence(n, target, rng)
}

/// Free-standing form of [`Sampler::balanced_batch`] using `cfg`'s balance
/// settings.
pub fn sample_balanced_batch(
    dba: &Dba,
    count: usize,
    lengths: RangeInclusive<usize>,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<Batch, SampleError> {
    let sampler = Sampler::new(dba, cfg.max_resample_attempts)?;
    Ok(sampler.balanced_batch(
        count,
        lengths,
        cfg.target_positive_fraction,
        cfg.oversample_factor,
        seed,
    ))
}

/// A dataset as generated by `sample`: header metadata plus records.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub batch: Batch,
}

/// Generates `count` records according to `cfg.mode`.
pub fn sample_dataset(dba: &Dba, cfg: &SamplerConfig, count: usize) -> Result<Dataset, SampleError> {
    cfg.validate()?;
    let sampler = Sampler::new(dba, cfg.max_resample_attempts)?;
    let seed = crate::rng::derive_seed(cfg.seed, domain::DATASET, 0);
    let batch = match cfg.mode {
        SampleMode::Uniform => sampler.uniform_batch(count, cfg.length_range(), seed),
        SampleMode::Balanced => sampler.balanced_batch(
            count.max(1),
            cfg.length_range(),
            cfg.target_positive_fraction,
            cfg.oversample_factor,
            seed,
        ),
    };
    Ok(Dataset {
        header: DatasetHeader::for_automaton(dba, cfg.seed),
        batch,
    })
}

/// Hex SHA-256 of the automaton's normalized HOA text.
pub fn automaton_sha256(dba: &Dba) -> String {
    hex::encode(Sha256::digest(emit_hoa(dba).as_bytes()))
}

/// First line of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub ap: Vec<String>,
    pub alphabet_size: usize,
    pub automaton_sha256: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<BatchStats>,
}

impl DatasetHeader {
    pub fn for_automaton(dba: &Dba, seed: u64) -> Self {
        Self {
            ap: dba.ap_names().to_vec(),
            alphabet_size: dba.alphabet().size(),
            automaton_sha256: automaton_sha256(dba),
            seed,
            version: None,
            config: None,
            stats: None,
        }
    }
}

/// One record line; `label` is absent in unlabelled datasets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordLine {
    pub u: Vec<u32>,
    pub v: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
    pub n: usize,
}

impl From<&SequenceRecord> for RecordLine {
    fn from(r: &SequenceRecord) -> Self {
        Self {
            u: r.u.clone(),
            v: r.v.clone(),
            label: Some(r.label.as_u8()),
            n: r.length(),
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("empty dataset file (missing header line)")]
    MissingHeader,
}

pub fn write_dataset<W: Write>(
    mut out: W,
    header: &DatasetHeader,
    records: &[RecordLine],
) -> Result<(), DatasetError> {
    serde_json::to_writer(&mut out, header).map_err(|e| DatasetError::Json { line: 1, source: e })?;
    out.write_all(b"\n")?;
    for (i, r) in records.iter().enumerate() {
        serde_json::to_writer(&mut out, r).map_err(|e| DatasetError::Json { line: i + 2, source: e })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a dataset and checks every record against the header's alphabet.
pub fn read_dataset<R: BufRead>(input: R) -> Result<(DatasetHeader, Vec<RecordLine>), DatasetError> {
    let mut lines = input.lines();
    let first = lines.next().ok_or(DatasetError::MissingHeader)??;
    let header: DatasetHeader =
        serde_json::from_str(&first).map_err(|e| DatasetError::Json { line: 1, source: e })?;
    let n_assign = header.alphabet_size.saturating_sub(1) as u32;
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RecordLine =
            serde_json::from_str(&line).map_err(|e| DatasetError::Json { line: line_no, source: e })?;
        let bad = |message: String| DatasetError::Invalid { line: line_no, message };
        if rec.v.is_empty() {
            return Err(bad("empty suffix v".into()));
        }
        if let Some(s) = rec.u.iter().chain(&rec.v).find(|&&s| s >= n_assign) {
            return Err(bad(format!("symbol {s} is not an assignment index")));
        }
        if rec.n != rec.u.len() + 1 + rec.v.len() {
            return Err(bad(format!("n = {} but |u|+1+|v| = {}", rec.n, rec.u.len() + 1 + rec.v.len())));
        }
        if matches!(rec.label, Some(l) if l > 1) {
            return Err(bad("label must be 0 or 1".into()));
        }
        records.push(rec);
    }
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample_split(2, &mut rng), 1);
        }
        for _ in 0..1000 {
            let k = sample_split(10, &mut rng);
            assert!((1..=9).contains(&k));
        }
    }

    #[test]
    fn encode_layout() {
        assert_eq!(encode(&[], &[3], 4), vec![4, 3]);
        assert_eq!(encode(&[0], &[1], 4), vec![0, 4, 1]);
        assert_eq!(decode(&[0, 4, 1], 4), Some((vec![0], vec![1])));
        assert_eq!(decode(&[0, 1, 4], 4), None);
        assert_eq!(decode(&[4, 0, 4, 1], 4), None);
    }

    #[test]
    fn zero_length_path() {
        let d = fixtures::fig1();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (syms, end) = sample_path(&d, 2, 0, &[false; 4], &mut rng).unwrap();
        assert!(syms.is_empty());
        assert_eq!(end, 2);
    }

    #[test]
    fn fig1_avoiding_sink_starts_with_a() {
        let d = fixtures::fig1();
        let forbidden = [false, false, false, true];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let (syms, _) = sample_path(&d, d.initial(), 5, &forbidden, &mut rng).unwrap();
            assert_eq!(syms[0] & 1, 1);
        }
    }

    #[test]
    fn dead_end_is_reported() {
        let d = fixtures::universal();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            sample_path(&d, 0, 1, &[true], &mut rng),
            Err(SampleError::DeadEnd { attempts: 1 })
        );
        assert_eq!(
            sample_sequence(&d, 5, ClassTarget::Reject, 7, &mut rng),
            Err(SampleError::DeadEnd { attempts: 7 })
        );
    }

    #[test]
    fn cached_tables_match_free_sampler() {
        let d = fixtures::fig1();
        let s = Sampler::new(&d, 10).unwrap();
        for target in [ClassTarget::Any, ClassTarget::Accept, ClassTarget::Reject] {
            let (fu, _) = s.forbidden_sets(target);
            let (tu, _) = s.tables(target);
            for seed in 0..20 {
                let mut r1 = ChaCha8Rng::seed_from_u64(seed);
                let mut r2 = ChaCha8Rng::seed_from_u64(seed);
                let free = sample_path(&d, 0, 12, fu, &mut r1).ok();
                let mut out = Vec::new();
                let cached = tu.walk(&d, 0, 12, &mut r2, &mut out).map(|q| (out, q));
                assert_eq!(free, cached);
            }
        }
    }

    #[test]
    fn universal_batch_is_all_positive() {
        let d = fixtures::universal();
        let b = sample_balanced_batch(&d, 64, 2..=16, &SamplerConfig::default(), 9).unwrap();
        assert_eq!(b.records.len(), 64);
        assert_eq!(b.stats.achieved_positive_fraction, 1.0);
        assert!(b.records.iter().all(|r| r.label == Label::Accept));
    }

    #[test]
    fn reject_target_keeps_v_out_of_accepting_states() {
        let d = fixtures::fig1();
        let s = Sampler::new(&d, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut u_touched_accepting = false;
        for _ in 0..2000 {
            let r = s.sample_sequence(12, ClassTarget::Reject, &mut rng).unwrap();
            let mut q = d.initial();
            for &x in &r.u {
                q = d.step(q, x);
                u_touched_accepting |= d.is_accepting(q);
            }
            for &x in &r.v {
                q = d.step(q, x);
                assert!(!d.is_accepting(q));
            }
        }
        assert!(u_touched_accepting);
    }

    #[test]
    fn balanced_batch_exact_count_and_deterministic() {
        let d = fixtures::fig1();
        let cfg = SamplerConfig::default();
        let a = sample_balanced_batch(&d, 100, 2..=20, &cfg, 5).unwrap();
        let b = sample_balanced_batch(&d, 100, 2..=20, &cfg, 5).unwrap();
        assert_eq!(a.records.len(), 100);
        assert_eq!(a.records, b.records);
        assert_eq!(a.stats.positives, 50);
        for r in &a.records {
            assert!((2..=20).contains(&r.length()));
            assert_eq!(accept_up_bruteforce(&d, &r.word()), r.label);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SamplerConfig::default();
        assert!(c.validate().is_ok());
        c.min_len = 1;
        assert!(c.validate().is_err());
        c.min_len = 10;
        c.max_len = 5;
        assert!(c.validate().is_err());
        let c = SamplerConfig {
            target_positive_fraction: 1.0,
            ..SamplerConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn dataset_io_round_trip_and_checks() {
        let d = fixtures::fig1();
        let ds = sample_dataset(&d, &SamplerConfig { seed: 3, ..Default::default() }, 20).unwrap();
        let lines: Vec<RecordLine> = ds.batch.records.iter().map(RecordLine::from).collect();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ds.header, &lines).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().contains("\"alphabet_size\":5"));
        let (h, back) = read_dataset(&buf[..]).unwrap();
        assert_eq!(h, ds.header);
        assert_eq!(back, lines);

        let bad = text.replacen("\"n\":", "\"n\":1000,\"x\":", 1);
        assert!(read_dataset(bad.as_bytes()).is_err());
        let header_only = text.lines().next().unwrap().to_string() + "\n{\"u\":[7],\"v\":[0],\"n\":3}\n";
        assert!(matches!(
            read_dataset(header_only.as_bytes()),
            Err(DatasetError::Invalid { line: 2, .. })
        ));
    }
}
