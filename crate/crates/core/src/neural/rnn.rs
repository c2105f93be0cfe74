use rayon::prelude::*;

use super::RnnParams;
use crate::sampling::SequenceRecord;

/// Elements per gradient chunk. Chunks are reduced in index order, so the
/// summation order (and the result) does not depend on the thread count.
const CHUNK: usize = 8;

/// Padded batch of encoded sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// Row-major `len() × max_len`; entries past an element's length are 0.
    pub sequences: Vec<u32>,
    pub max_len: usize,
    pub lengths: Vec<usize>,
    pub labels: Vec<u8>,
}

impl Batch {
    pub fn from_sequences(seqs: &[Vec<u32>], labels: &[u8]) -> Self {
        assert_eq!(seqs.len(), labels.len());
        let max_len = seqs.iter().map(Vec::len).max().unwrap_or(0);
        let mut sequences = vec![0u32; seqs.len() * max_len];
        for (i, s) in seqs.iter().enumerate() {
            assert!(!s.is_empty(), "empty sequence in batch");
            sequences[i * max_len..i * max_len + s.len()].copy_from_slice(s);
        }
        Self {
            sequences,
            max_len,
            lengths: seqs.iter().map(Vec::len).collect(),
            labels: labels.to_vec(),
        }
    }

    pub fn from_records(records: &[SequenceRecord]) -> Self {
        let seqs: Vec<Vec<u32>> = records.iter().map(|r| r.encoded.clone()).collect();
        let labels: Vec<u8> = records.iter().map(|r| r.label.as_u8()).collect();
        Self::from_sequences(&seqs, &labels)
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// The unpadded symbols of element `i`.
    pub fn sequence(&self, i: usize) -> &[u32] {
        &self.sequences[i * self.max_len..i * self.max_len + self.lengths[i]]
    }
}

/// Hidden states kept from the forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Per element: `(len + 1) × hidden`, row 0 is `h_0 = 0`.
    pub hidden_states: Vec<Vec<f64>>,
    /// Per element: the symbols that were read.
    pub inputs: Vec<Vec<u32>>,
}

impl ForwardTrace {
    /// Index of each element's last valid position.
    pub fn last_positions(&self) -> Vec<usize> {
        self.inputs.iter().map(|s| s.len() - 1).collect()
    }
}

fn run_element(p: &RnnParams, seq: &[u32]) -> (Vec<f64>, [f64; 2]) {
    let h = p.hidden;
    let a = p.alphabet_size;
    let mut states = vec![0.0; (seq.len() + 1) * h];
    for (t, &x) in seq.iter().enumerate() {
        let x = x as usize;
        assert!(x < a, "symbol {x} outside alphabet of size {a}");
        let (prev, next) = states.split_at_mut((t + 1) * h);
        let prev = &prev[t * h..];
        let next = &mut next[..h];
        for i in 0..h {
            let row = &p.w_rec[i * h..(i + 1) * h];
            let mut z = p.b_h[i] + p.w_in[i * a + x];
            for (w, hv) in row.iter().zip(prev) {
                z += w * hv;
            }
            next[i] = z.tanh();
        }
    }
    let last = &states[seq.len() * h..];
    let mut logits = [0.0; 2];
    for (k, l) in logits.iter_mut().enumerate() {
        let row = &p.w_out[k * h..(k + 1) * h];
        *l = p.b_out[k] + row.iter().zip(last).map(|(w, x)| w * x).sum::<f64>();
    }
    (states, logits)
}

/// Logits for every element plus the trace needed by [`backward`].
pub fn forward(params: &RnnParams, batch: &Batch) -> (Vec<[f64; 2]>, ForwardTrace) {
    let results: Vec<(Vec<f64>, [f64; 2])> = (0..batch.len())
        .into_par_iter()
        .map(|i| run_element(params, batch.sequence(i)))
        .collect();
    let mut logits = Vec::with_capacity(results.len());
    let mut hidden_states = Vec::with_capacity(results.len());
    for (s, l) in results {
        hidden_states.push(s);
        logits.push(l);
    }
    let inputs = (0..batch.len()).map(|i| batch.sequence(i).to_vec()).collect();
    (
        logits,
        ForwardTrace {
            hidden_states,
            inputs,
        },
    )
}

/// Logits only, without keeping a trace.
pub(crate) fn logits_only(params: &RnnParams, batch: &Batch) -> Vec<[f64; 2]> {
    (0..batch.len())
        .into_par_iter()
        .map(|i| run_element(params, batch.sequence(i)).1)
        .collect()
}

pub fn softmax(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let z = e0 + e1;
    [e0 / z, e1 / z]
}

/// Mean softmax cross-entropy and its gradient `(softmax - onehot) / batch`.
pub fn loss(logits: &[[f64; 2]], labels: &[u8]) -> (f64, Vec<[f64; 2]>) {
    assert_eq!(logits.len(), labels.len());
    let n = logits.len() as f64;
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(logits.len());
    for (l, &y) in logits.iter().zip(labels) {
        assert!(y <= 1, "labels must be 0 or 1");
        let m = l[0].max(l[1]);
        let lse = m + ((l[0] - m).exp() + (l[1] - m).exp()).ln();
        total += lse - l[y as usize];
        let mut p = softmax(*l);
        p[y as usize] -= 1.0;
        grads.push([p[0] / n, p[1] / n]);
    }
    (total / n, grads)
}

fn backprop_element(p: &RnnParams, seq: &[u32], states: &[f64], d_logits: [f64; 2], g: &mut RnnParams) {
    let h = p.hidden;
    let a = p.alphabet_size;
    let len = seq.len();
    let last = &states[len * h..(len + 1) * h];
    let mut dh = vec![0.0; h];
    for k in 0..2 {
        let d = d_logits[k];
        g.b_out[k] += d;
        let row = &mut g.w_out[k * h..(k + 1) * h];
        for (gw, x) in row.iter_mut().zip(last) {
            *gw += d * x;
        }
        for (dhi, w) in dh.iter_mut().zip(&p.w_out[k * h..(k + 1) * h]) {
            *dhi += d * w;
        }
    }
    let mut da = vec![0.0; h];
    for t in (0..len).rev() {
        let cur = &states[(t + 1) * h..(t + 2) * h];
        let prev = &states[t * h..(t + 1) * h];
        for i in 0..h {
            da[i] = dh[i] * (1.0 - cur[i] * cur[i]);
        }
        let x = seq[t] as usize;
        for i in 0..h {
            let d = da[i];
            g.b_h[i] += d;
            g.w_in[i * a + x] += d;
            if d != 0.0 {
                for (gw, hp) in g.w_rec[i * h..(i + 1) * h].iter_mut().zip(prev) {
                    *gw += d * hp;
                }
            }
        }
        if t > 0 {
            dh.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..h {
                let d = da[i];
                if d != 0.0 {
                    for (dhj, w) in dh.iter_mut().zip(&p.w_rec[i * h..(i + 1) * h]) {
                        *dhj += d * w;
                    }
                }
            }
        }
    }
}

/// Exact gradient of `mean CE + l2_weight · Σ W²` (weights only) by
/// backpropagation through time. `d_logits` is the output of [`loss`].
pub fn backward(params: &RnnParams, trace: &ForwardTrace, d_logits: &[[f64; 2]], l2_weight: f64) -> RnnParams {
    assert_eq!(trace.inputs.len(), d_logits.len());
    let n = d_logits.len();
    let partials: Vec<RnnParams> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut g = params.zeros_like();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                backprop_element(params, &trace.inputs[i], &trace.hidden_states[i], d_logits[i], &mut g);
            }
            g
        })
        .collect();
    let mut grads = params.zeros_like();
    for g in &partials {
        grads.add_assign(g);
    }
    if l2_weight != 0.0 {
        let w = params.blocks();
        for (i, gb) in grads.blocks_mut().into_iter().enumerate() {
            if RnnParams::is_weight_block(i) {
                for (gx, x) in gb.iter_mut().zip(w[i]) {
                    *gx += 2.0 * l2_weight * x;
                }
            }
        }
    }
    grads
}

/// Argmax class per element; exactly equal logits give 0.
pub fn predict(params: &RnnParams, batch: &Batch) -> Vec<u8> {
    logits_only(params, batch)
        .into_iter()
        .map(|l| u8::from(l[1] > l[0]))
        .collect()
}
