//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! Every token carries a topic assignment; a sweep revisits each token in
//! document order and resamples its topic from the collapsed conditional
//!
//! ```text
//! p(z = k | rest) ∝ (n_dk + alpha) * (n_kw + beta) / (n_k + V*beta)
//! ```
//!
//! with the token's own counts removed. Point estimates are the smoothed
//! count ratios; by default they are averaged over every sweep after
//! burn-in, which lowers variance relative to reading off the last sample.
//! Topic labels are arbitrary, so each sample is aligned to the first
//! post-burn-in sample (by top-word overlap) before it is accumulated; on
//! well-separated topics the alignment is the identity, but on tiny corpora
//! the chain can swap labels mid-run and unaligned averages would blur every
//! topic toward the same blend.
//!
//! Sampling runs single-threaded on one ChaCha8 stream, so a fixed seed
//! gives bitwise-identical models on every platform.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::preprocess::EncodedCorpus;
use crate::rng::{component_rng, RngState, Stream};
use crate::{Error, Result};

const CHECKPOINT_VERSION: u32 = 1;
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Number of topics (the model's resolution).
    pub num_topics: usize,
    /// Symmetric Dirichlet prior on document-topic mixtures.
    pub alpha: f64,
    /// Symmetric Dirichlet prior on topic-word distributions.
    pub beta: f64,
    /// Total Gibbs sweeps.
    pub iterations: usize,
    /// Sweeps discarded before estimates are accumulated.
    pub burn_in: usize,
    pub seed: u64,
}

impl Hyperparams {
    /// Classic defaults: alpha = 50/K, beta = 0.01, 1000 sweeps with 200
    /// burn-in.
    pub fn new(num_topics: usize, seed: u64) -> Self {
        Hyperparams {
            num_topics,
            alpha: 50.0 / num_topics.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            burn_in: 200,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_topics < 1 {
            return Err(Error::Config("num_topics must be >= 1".into()));
        }
        if !(self.alpha > 0.0) || !(self.beta > 0.0) {
            return Err(Error::Config("alpha and beta must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        Ok(())
    }
}

/// Dense row-major matrix, just big enough for phi/theta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }
}

/// Sampler state: per-token assignments plus the count tables they imply.
///
/// Count layouts are chosen for the sweep's access pattern: `n_dk` is
/// document-major (D×K) and the word-topic table is word-major (V×K), so the
/// inner loop over topics walks contiguous memory.
#[derive(Debug, Clone)]
pub struct ModelState {
    /// Topic of each token, documents concatenated in corpus order.
    pub z: Vec<u32>,
    /// Start offset of each document in `z` (length D+1).
    pub doc_offsets: Vec<usize>,
    /// Document-topic counts, D×K row-major.
    pub n_dk: Vec<u32>,
    /// Word-topic counts, V×K row-major (transposed relative to n_kw).
    pub n_wk: Vec<u32>,
    /// Per-topic totals.
    pub n_k: Vec<u32>,
    pub sweep_count: u64,
    rng: ChaCha8Rng,
}

impl ModelState {
    pub fn num_topics(&self) -> usize {
        self.n_k.len()
    }

    /// Word-topic count in the conventional K×V orientation.
    pub fn n_kw(&self, k: usize, w: usize) -> u32 {
        self.n_wk[w * self.num_topics() + k]
    }

    /// Verify the four count invariants against the corpus. Cheap enough to
    /// run after every sweep in the fuzz suites.
    pub fn check_invariants(&self, corpus: &EncodedCorpus) -> Result<()> {
        let k = self.num_topics();
        if self.z.len() != corpus.total_tokens {
            return Err(Error::Internal(format!(
                "z length {} != total tokens {}",
                self.z.len(),
                corpus.total_tokens
            )));
        }
        for (d, doc) in corpus.docs.iter().enumerate() {
            let row: u64 = self.n_dk[d * k..(d + 1) * k].iter().map(|&c| c as u64).sum();
            if row != doc.tokens.len() as u64 {
                return Err(Error::Internal(format!(
                    "n_dk row {d} sums to {row}, document has {} tokens",
                    doc.tokens.len()
                )));
            }
        }
        for topic in 0..k {
            let col: u64 = (0..corpus.vocab_size())
                .map(|w| self.n_wk[w * k + topic] as u64)
                .sum();
            if col != self.n_k[topic] as u64 {
                return Err(Error::Internal(format!(
                    "n_kw row {topic} sums to {col}, n_k says {}",
                    self.n_k[topic]
                )));
            }
        }
        let total: u64 = self.n_k.iter().map(|&c| c as u64).sum();
        if total != corpus.total_tokens as u64 {
            return Err(Error::Internal(format!(
                "n_k sums to {total}, corpus has {} tokens",
                corpus.total_tokens
            )));
        }
        Ok(())
    }
}

/// Assign every token a uniformly random topic and build the count tables.
pub fn init(corpus: &EncodedCorpus, hp: &Hyperparams) -> Result<ModelState> {
    hp.validate()?;
    if corpus.docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let k = hp.num_topics;
    if k > corpus.total_tokens {
        log::warn!(
            "{k} topics for {} tokens: model is degenerate",
            corpus.total_tokens
        );
    }
    let v = corpus.vocab_size();
    let d = corpus.doc_count();
    let mut rng = component_rng(hp.seed, Stream::Lda);

    let mut z = Vec::with_capacity(corpus.total_tokens);
    let mut doc_offsets = Vec::with_capacity(d + 1);
    let mut n_dk = vec![0u32; d * k];
    let mut n_wk = vec![0u32; v * k];
    let mut n_k = vec![0u32; k];

    for (di, doc) in corpus.docs.iter().enumerate() {
        doc_offsets.push(z.len());
        for &w in &doc.tokens {
            let topic = rng.gen_range(0..k as u32);
            z.push(topic);
            n_dk[di * k + topic as usize] += 1;
            n_wk[w as usize * k + topic as usize] += 1;
            n_k[topic as usize] += 1;
        }
    }
    doc_offsets.push(z.len());

    Ok(ModelState {
        z,
        doc_offsets,
        n_dk,
        n_wk,
        n_k,
        sweep_count: 0,
        rng,
    })
}

/// One full Gibbs sweep over every token, in document and position order.
pub fn sweep(state: &mut ModelState, corpus: &EncodedCorpus, hp: &Hyperparams) -> Result<()> {
    let k = hp.num_topics;
    if state.num_topics() != k {
        return Err(Error::DimensionMismatch(format!(
            "state has {} topics, hyperparams say {k}",
            state.num_topics()
        )));
    }
    let v = corpus.vocab_size();
    let alpha = hp.alpha;
    let beta = hp.beta;
    let v_beta = v as f64 * beta;

    // 1/(n_k + V*beta), maintained incrementally across tokens.
    let mut inv_nk: Vec<f64> = state
        .n_k
        .iter()
        .map(|&c| 1.0 / (c as f64 + v_beta))
        .collect();
    let mut weights = vec![0.0f64; k];

    let mut t = 0usize;
    for (d, doc) in corpus.docs.iter().enumerate() {
        let dk = d * k;
        for &word in &doc.tokens {
            let wk = word as usize * k;
            let old = state.z[t] as usize;

            let underflow = state.n_dk[dk + old] == 0
                || state.n_wk[wk + old] == 0
                || state.n_k[old] == 0;
            if underflow {
                return Err(Error::Internal(format!(
                    "count underflow at token {t} (doc {d}, word {word}, topic {old})"
                )));
            }
            state.n_dk[dk + old] -= 1;
            state.n_wk[wk + old] -= 1;
            state.n_k[old] -= 1;
            inv_nk[old] = 1.0 / (state.n_k[old] as f64 + v_beta);

            let mut total = 0.0;
            for topic in 0..k {
                let wgt = (state.n_dk[dk + topic] as f64 + alpha)
                    * (state.n_wk[wk + topic] as f64 + beta)
                    * inv_nk[topic];
                weights[topic] = wgt;
                total += wgt;
            }

            let u = state.rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut new = k - 1;
            for (topic, &wgt) in weights.iter().enumerate() {
                acc += wgt;
                if u < acc {
                    new = topic;
                    break;
                }
            }

            state.n_dk[dk + new] += 1;
            state.n_wk[wk + new] += 1;
            state.n_k[new] += 1;
            inv_nk[new] = 1.0 / (state.n_k[new] as f64 + v_beta);
            state.z[t] = new as u32;
            t += 1;
        }
    }
    state.sweep_count += 1;
    Ok(())
}

/// Smoothed point estimates from the current counts:
/// `phi[k,w] = (n_kw + beta)/(n_k + V*beta)`,
/// `theta[d,k] = (n_dk + alpha)/(len_d + K*alpha)`.
pub fn point_estimates(
    state: &ModelState,
    corpus: &EncodedCorpus,
    hp: &Hyperparams,
) -> (Matrix, Matrix) {
    let k = hp.num_topics;
    let v = corpus.vocab_size();
    let d = corpus.doc_count();
    let v_beta = v as f64 * hp.beta;
    let k_alpha = k as f64 * hp.alpha;

    let mut phi = Matrix::zeros(k, v);
    for topic in 0..k {
        let denom = state.n_k[topic] as f64 + v_beta;
        for w in 0..v {
            phi.set(topic, w, (state.n_wk[w * k + topic] as f64 + hp.beta) / denom);
        }
    }
    let mut theta = Matrix::zeros(d, k);
    for (di, doc) in corpus.docs.iter().enumerate() {
        let denom = doc.tokens.len() as f64 + k_alpha;
        for topic in 0..k {
            theta.set(di, topic, (state.n_dk[di * k + topic] as f64 + hp.alpha) / denom);
        }
    }
    (phi, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    /// Average phi/theta over every post-burn-in sweep (default).
    Mean,
    /// Read phi/theta off the final sweep only.
    LastSample,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicModel {
    pub version: u32,
    pub phi: Matrix,
    pub theta: Matrix,
    pub hyperparams: Hyperparams,
    pub estimate_mode: EstimateMode,
    pub corpus_digest: String,
    pub sweep_count: u64,
}

impl TopicModel {
    pub fn num_topics(&self) -> usize {
        self.phi.rows()
    }

    pub fn vocab_size(&self) -> usize {
        self.phi.cols()
    }

    pub fn doc_count(&self) -> usize {
        self.theta.rows()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)
            .map_err(|e| Error::Internal(format!("model serialization failed: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: TopicModel = serde_json::from_str(&raw).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: 0,
            message: format!("invalid model file: {e}"),
        })?;
        if model.version != MODEL_VERSION {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: 0,
                message: format!("unsupported model version {}", model.version),
            });
        }
        Ok(model)
    }
}

/// Per-sweep progress passed to the training callback.
#[derive(Debug, Clone, Copy)]
pub struct SweepInfo {
    pub sweep: usize,
    pub iterations: usize,
    /// Per-token log-likelihood of the current state, present every
    /// `ll_every` sweeps.
    pub per_token_ll: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    pub mode: EstimateMode,
    /// Compute the per-token log-likelihood every this many sweeps for
    /// progress reporting; 0 disables it.
    pub ll_every: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            mode: EstimateMode::Mean,
            ll_every: 0,
        }
    }
}

pub struct TrainOutcome {
    pub model: TopicModel,
    pub state: ModelState,
}

/// Initialize and run `hp.iterations` sweeps.
pub fn train(
    corpus: &EncodedCorpus,
    hp: &Hyperparams,
    opts: TrainOptions,
    mut on_sweep: Option<&mut dyn FnMut(SweepInfo)>,
) -> Result<TrainOutcome> {
    let state = init(corpus, hp)?;
    run_sweeps(state, corpus, hp, opts, &mut on_sweep)
}

/// Continue a checkpointed state up to `hp.iterations` total sweeps.
///
/// The chain continues bitwise-exactly; estimate averaging restarts, so the
/// model averages over sweeps in `(max(burn_in, resumed_at), iterations]`.
pub fn resume(
    state: ModelState,
    corpus: &EncodedCorpus,
    hp: &Hyperparams,
    opts: TrainOptions,
    mut on_sweep: Option<&mut dyn FnMut(SweepInfo)>,
) -> Result<TrainOutcome> {
    if state.sweep_count as usize >= hp.iterations {
        return Err(Error::Config(format!(
            "checkpoint already has {} sweeps, iterations is {}",
            state.sweep_count, hp.iterations
        )));
    }
    state.check_invariants(corpus)?;
    run_sweeps(state, corpus, hp, opts, &mut on_sweep)
}

/// Word ids that identify each topic of a reference sample, used to re-align
/// topic labels of later samples. Capped below V/K so the score stays
/// discriminative on tiny vocabularies (using every word would give overlap
/// 1 everywhere).
fn alignment_reference(phi: &Matrix) -> Vec<Vec<u32>> {
    let per_topic = phi.cols().div_ceil(phi.rows()).clamp(1, 32);
    (0..phi.rows())
        .map(|topic| {
            let row = phi.row(topic);
            let mut order: Vec<u32> = (0..phi.cols() as u32).collect();
            order.sort_by(|&a, &b| row[b as usize].total_cmp(&row[a as usize]).then(a.cmp(&b)));
            order.truncate(per_topic);
            order
        })
        .collect()
}

/// Greedy assignment of current topics to reference slots by probability
/// mass on the reference topics' top words. `perm[current] = slot`.
fn align_to_reference(phi: &Matrix, reference: &[Vec<u32>]) -> Vec<usize> {
    let k = phi.rows();
    let mut overlap = vec![0.0f64; k * k];
    for cur in 0..k {
        let row = phi.row(cur);
        for (slot, words) in reference.iter().enumerate() {
            overlap[cur * k + slot] = words.iter().map(|&w| row[w as usize]).sum();
        }
    }
    let mut perm = vec![usize::MAX; k];
    let mut slot_taken = vec![false; k];
    let mut cur_taken = vec![false; k];
    for _ in 0..k {
        let mut best = (0usize, 0usize, f64::MIN);
        for cur in 0..k {
            if cur_taken[cur] {
                continue;
            }
            for slot in 0..k {
                if !slot_taken[slot] && overlap[cur * k + slot] > best.2 {
                    best = (cur, slot, overlap[cur * k + slot]);
                }
            }
        }
        perm[best.0] = best.1;
        cur_taken[best.0] = true;
        slot_taken[best.1] = true;
    }
    perm
}

fn run_sweeps(
    mut state: ModelState,
    corpus: &EncodedCorpus,
    hp: &Hyperparams,
    opts: TrainOptions,
    on_sweep: &mut Option<&mut dyn FnMut(SweepInfo)>,
) -> Result<TrainOutcome> {
    let k = hp.num_topics;
    let v = corpus.vocab_size();
    let d = corpus.doc_count();

    let mut phi_acc = vec![0.0f64; k * v];
    let mut theta_acc = vec![0.0f64; d * k];
    let mut samples = 0usize;
    let mut reference: Option<Vec<Vec<u32>>> = None;

    while (state.sweep_count as usize) < hp.iterations {
        sweep(&mut state, corpus, hp)?;
        let s = state.sweep_count as usize;

        if opts.mode == EstimateMode::Mean && s > hp.burn_in {
            let (phi, theta) = point_estimates(&state, corpus, hp);
            let perm = match &reference {
                None => {
                    reference = Some(alignment_reference(&phi));
                    (0..k).collect::<Vec<_>>()
                }
                Some(r) => align_to_reference(&phi, r),
            };
            for (cur, &slot) in perm.iter().enumerate() {
                let row = phi.row(cur);
                let acc = &mut phi_acc[slot * v..(slot + 1) * v];
                for (a, x) in acc.iter_mut().zip(row) {
                    *a += x;
                }
                for doc in 0..d {
                    theta_acc[doc * k + slot] += theta.get(doc, cur);
                }
            }
            samples += 1;
        }

        if let Some(cb) = on_sweep.as_mut() {
            let ll = if opts.ll_every > 0 && s % opts.ll_every == 0 {
                let (phi, theta) = point_estimates(&state, corpus, hp);
                Some(per_token_ll(&phi, &theta, corpus))
            } else {
                None
            };
            cb(SweepInfo {
                sweep: s,
                iterations: hp.iterations,
                per_token_ll: ll,
            });
        }
    }

    let (phi, theta) = match opts.mode {
        EstimateMode::LastSample => point_estimates(&state, corpus, hp),
        EstimateMode::Mean => {
            if samples == 0 {
                // Resumed past the averaging window; fall back to the chain's
                // final state.
                point_estimates(&state, corpus, hp)
            } else {
                let norm = 1.0 / samples as f64;
                let mut phi = Matrix::zeros(k, v);
                phi.data.copy_from_slice(&phi_acc);
                phi.data.iter_mut().for_each(|x| *x *= norm);
                let mut theta = Matrix::zeros(d, k);
                theta.data.copy_from_slice(&theta_acc);
                theta.data.iter_mut().for_each(|x| *x *= norm);
                (phi, theta)
            }
        }
    };

    let model = TopicModel {
        version: MODEL_VERSION,
        phi,
        theta,
        hyperparams: *hp,
        estimate_mode: opts.mode,
        corpus_digest: corpus.digest(),
        sweep_count: state.sweep_count,
    };
    Ok(TrainOutcome { model, state })
}

fn per_token_ll(phi: &Matrix, theta: &Matrix, corpus: &EncodedCorpus) -> f64 {
    let k = phi.rows();
    let mut total = 0.0;
    for (d, doc) in corpus.docs.iter().enumerate() {
        let th = theta.row(d);
        for &w in &doc.tokens {
            let mut p = 0.0;
            for topic in 0..k {
                p += th[topic] * phi.get(topic, w as usize);
            }
            total += p.ln();
        }
    }
    total / corpus.total_tokens as f64
}

/// Mean per-token log-likelihood of the corpus under the model, in nats.
pub fn log_likelihood(model: &TopicModel, corpus: &EncodedCorpus) -> Result<f64> {
    if model.vocab_size() != corpus.vocab_size() || model.doc_count() != corpus.doc_count() {
        return Err(Error::DimensionMismatch(format!(
            "model is {}x{} topics over V={} D={}, corpus has V={} D={}",
            model.num_topics(),
            model.num_topics(),
            model.vocab_size(),
            model.doc_count(),
            corpus.vocab_size(),
            corpus.doc_count()
        )));
    }
    Ok(per_token_ll(&model.phi, &model.theta, corpus))
}

/// The `k` highest-phi terms per topic, descending; ties break toward the
/// lower vocabulary id.
pub fn top_words(model: &TopicModel, k: usize) -> Result<Vec<Vec<(u32, f64)>>> {
    if k < 1 || k > model.vocab_size() {
        return Err(Error::Config(format!(
            "top-word count {k} out of range 1..={}",
            model.vocab_size()
        )));
    }
    let mut out = Vec::with_capacity(model.num_topics());
    for topic in 0..model.num_topics() {
        let row = model.phi.row(topic);
        let mut order: Vec<u32> = (0..model.vocab_size() as u32).collect();
        order.sort_by(|&a, &b| {
            row[b as usize]
                .total_cmp(&row[a as usize])
                .then(a.cmp(&b))
        });
        out.push(
            order
                .into_iter()
                .take(k)
                .map(|w| (w, row[w as usize]))
                .collect(),
        );
    }
    Ok(out)
}

/// How many documents have each topic as their theta argmax; ties resolve to
/// the lowest topic index. Counts sum to D.
pub fn primary_topic_counts(model: &TopicModel) -> Vec<usize> {
    let mut counts = vec![0usize; model.num_topics()];
    for d in 0..model.doc_count() {
        let row = model.theta.row(d);
        let mut best = 0usize;
        for (k, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = k;
            }
        }
        counts[best] += 1;
    }
    counts
}

/// Resumable training checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub hyperparams: Hyperparams,
    pub corpus_digest: String,
    pub sweep_count: u64,
    pub z: Vec<u32>,
    pub n_dk: Vec<u32>,
    /// Word-topic counts, V×K row-major.
    pub n_wk: Vec<u32>,
    pub n_k: Vec<u32>,
    pub rng: RngState,
}

pub fn save_checkpoint(
    state: &ModelState,
    hp: &Hyperparams,
    corpus_digest: &str,
    path: &Path,
) -> Result<()> {
    let ckpt = Checkpoint {
        version: CHECKPOINT_VERSION,
        hyperparams: *hp,
        corpus_digest: corpus_digest.to_string(),
        sweep_count: state.sweep_count,
        z: state.z.clone(),
        n_dk: state.n_dk.clone(),
        n_wk: state.n_wk.clone(),
        n_k: state.n_k.clone(),
        rng: RngState::capture(&state.rng),
    };
    let json = serde_json::to_string(&ckpt)
        .map_err(|e| Error::Internal(format!("checkpoint serialization failed: {e}")))?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ckpt: Checkpoint = serde_json::from_str(&raw).map_err(|e| Error::Malformed {
        path: path.to_path_buf(),
        line: 0,
        message: format!("invalid checkpoint: {e}"),
    })?;
    if ckpt.version != CHECKPOINT_VERSION {
        return Err(Error::Malformed {
            path: path.to_path_buf(),
            line: 0,
            message: format!("unsupported checkpoint version {}", ckpt.version),
        });
    }
    Ok(ckpt)
}

/// Rebuild a sampler state from a checkpoint, verifying it against the
/// corpus it claims to describe.
pub fn state_from_checkpoint(ckpt: &Checkpoint, corpus: &EncodedCorpus) -> Result<ModelState> {
    if ckpt.corpus_digest != corpus.digest() {
        return Err(Error::Config(
            "checkpoint was trained on a different corpus (digest mismatch)".into(),
        ));
    }
    let mut doc_offsets = Vec::with_capacity(corpus.doc_count() + 1);
    let mut off = 0usize;
    for doc in &corpus.docs {
        doc_offsets.push(off);
        off += doc.tokens.len();
    }
    doc_offsets.push(off);

    let state = ModelState {
        z: ckpt.z.clone(),
        doc_offsets,
        n_dk: ckpt.n_dk.clone(),
        n_wk: ckpt.n_wk.clone(),
        n_k: ckpt.n_k.clone(),
        sweep_count: ckpt.sweep_count,
        rng: ckpt.rng.restore()?,
    };
    state.check_invariants(corpus)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy_corpus;
    use crate::preprocess::{preprocess_corpus, PreprocessConfig};

    fn toy_encoded() -> EncodedCorpus {
        preprocess_corpus(&toy_corpus(), &PreprocessConfig::default()).unwrap()
    }

    fn quick_hp(k: usize, seed: u64) -> Hyperparams {
        Hyperparams {
            num_topics: k,
            alpha: 0.1,
            beta: 0.01,
            iterations: 300,
            burn_in: 100,
            seed,
        }
    }

    #[test]
    fn init_single_topic_forces_zero() {
        let corpus = toy_encoded();
        let state = init(&corpus, &quick_hp(1, 7)).unwrap();
        assert!(state.z.iter().all(|&z| z == 0));
        assert_eq!(state.n_k[0] as usize, corpus.total_tokens);
    }

    #[test]
    fn init_same_seed_same_assignments() {
        let corpus = toy_encoded();
        let a = init(&corpus, &quick_hp(2, 42)).unwrap();
        let b = init(&corpus, &quick_hp(2, 42)).unwrap();
        assert_eq!(a.z, b.z);
        let c = init(&corpus, &quick_hp(2, 43)).unwrap();
        assert_ne!(a.z, c.z);
    }

    #[test]
    fn init_counts_consistent() {
        let corpus = toy_encoded();
        let state = init(&corpus, &quick_hp(2, 5)).unwrap();
        state.check_invariants(&corpus).unwrap();
    }

    #[test]
    fn sweep_is_identity_for_one_topic() {
        let corpus = toy_encoded();
        let hp = quick_hp(1, 7);
        let mut state = init(&corpus, &hp).unwrap();
        let before = state.z.clone();
        sweep(&mut state, &corpus, &hp).unwrap();
        assert_eq!(state.z, before);
        assert_eq!(state.sweep_count, 1);
    }

    #[test]
    fn sweep_preserves_invariants() {
        let corpus = toy_encoded();
        let hp = quick_hp(3, 11);
        let mut state = init(&corpus, &hp).unwrap();
        for _ in 0..20 {
            sweep(&mut state, &corpus, &hp).unwrap();
            state.check_invariants(&corpus).unwrap();
        }
    }

    #[test]
    fn sweep_detects_underflow() {
        let corpus = toy_encoded();
        let hp = quick_hp(2, 7);
        let mut state = init(&corpus, &hp).unwrap();
        // Corrupt: zero out a count the first token will decrement.
        let old = state.z[0] as usize;
        state.n_k[old] = 0;
        let err = sweep(&mut state, &corpus, &hp).unwrap_err();
        assert!(matches!(err, Error::Internal(_)));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn train_is_deterministic() {
        let corpus = toy_encoded();
        let hp = quick_hp(2, 99);
        let a = train(&corpus, &hp, TrainOptions::default(), None).unwrap();
        let b = train(&corpus, &hp, TrainOptions::default(), None).unwrap();
        assert_eq!(
            serde_json::to_string(&a.model).unwrap(),
            serde_json::to_string(&b.model).unwrap()
        );
    }

    #[test]
    fn model_rows_are_distributions() {
        let corpus = toy_encoded();
        let hp = quick_hp(2, 3);
        let out = train(&corpus, &hp, TrainOptions::default(), None).unwrap();
        for t in 0..2 {
            let sum: f64 = out.model.phi.row(t).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "phi row {t} sums to {sum}");
            assert!(out.model.phi.row(t).iter().all(|&p| p > 0.0));
        }
        for d in 0..corpus.doc_count() {
            let sum: f64 = out.model.theta.row(d).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "theta row {d} sums to {sum}");
            assert!(out.model.theta.row(d).iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn toy_corpus_separates_topics() {
        let corpus = toy_encoded();
        let hp = Hyperparams {
            num_topics: 2,
            alpha: 0.1,
            beta: 0.01,
            iterations: 1000,
            burn_in: 200,
            seed: 1,
        };
        let out = train(&corpus, &hp, TrainOptions::default(), None).unwrap();
        let tops = top_words(&out.model, 3).unwrap();
        let vocab = &corpus.vocabulary;
        let named: Vec<Vec<&str>> = tops
            .iter()
            .map(|t| t.iter().map(|&(w, _)| vocab.term(w)).collect())
            .collect();

        // One topic holds the food terms, and the mixed third document leans
        // about 2:1 toward it.
        let food = named
            .iter()
            .position(|t| t.contains(&"eat") && t.contains(&"kipper"))
            .expect("one topic should rank eat+kipper on top");
        assert!(named[food].contains(&"breakfast"), "top-3 was {named:?}");

        let theta = out.model.theta.row(2);
        assert!(
            (theta[food] - 2.0 / 3.0).abs() < 0.15,
            "mixed doc theta {theta:?}"
        );
        assert!((theta[1 - food] - 1.0 / 3.0).abs() < 0.15);
    }

    #[test]
    fn planted_single_word_documents_recover() {
        // Six documents, each repeating its own word; with K = 6 every topic
        // should end up owning one word.
        let mut corpus = toy_encoded();
        corpus.docs.clear();
        let words = ["aa", "bb", "cc", "dd", "ee", "ff"];
        let mut vocab = Vocab::default();
        for (i, w) in words.iter().enumerate() {
            let id = vocab.0.len() as u32;
            vocab.0.push(w.to_string());
            corpus.docs.push(crate::preprocess::EncodedDoc {
                id: i.to_string(),
                tokens: vec![id; 30],
            });
        }
        let rebuilt: crate::preprocess::Vocabulary =
            serde_json::from_str(&serde_json::to_string(&vocab.0).unwrap()).unwrap();
        corpus.vocabulary = rebuilt;
        corpus.total_tokens = 180;

        let hp = Hyperparams {
            num_topics: 6,
            alpha: 0.1,
            beta: 0.01,
            iterations: 500,
            burn_in: 200,
            seed: 12,
        };
        let out = train(&corpus, &hp, TrainOptions::default(), None).unwrap();
        for topic in 0..6 {
            let max = out
                .model
                .phi
                .row(topic)
                .iter()
                .cloned()
                .fold(f64::MIN, f64::max);
            assert!(max > 0.9, "topic {topic} max phi {max}");
        }
    }

    #[derive(Default)]
    struct Vocab(Vec<String>);

    #[test]
    fn log_likelihood_analytic_single_token() {
        // One document, one token, V = 3, K = 1:
        // phi = (1 + beta)/(1 + 3 beta), theta = 1.
        let mut corpus = toy_encoded();
        corpus.docs = vec![crate::preprocess::EncodedDoc {
            id: "0".into(),
            tokens: vec![0],
        }];
        let terms = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        corpus.vocabulary =
            serde_json::from_str(&serde_json::to_string(&terms).unwrap()).unwrap();
        corpus.total_tokens = 1;

        let hp = Hyperparams {
            num_topics: 1,
            alpha: 0.1,
            beta: 0.01,
            iterations: 2,
            burn_in: 1,
            seed: 0,
        };
        let out = train(&corpus, &hp, TrainOptions::default(), None).unwrap();
        let ll = log_likelihood(&out.model, &corpus).unwrap();
        let expected = (1.01f64 / 1.03).ln();
        assert!((ll - expected).abs() < 1e-12, "ll {ll} vs {expected}");
        assert!((expected - -0.01961).abs() < 1e-4);
    }

    #[test]
    fn log_likelihood_uniform_model() {
        let corpus = toy_encoded();
        let v = corpus.vocab_size();
        let d = corpus.doc_count();
        let k = 2;
        let mut phi = Matrix::zeros(k, v);
        phi.data.iter_mut().for_each(|x| *x = 1.0 / v as f64);
        let mut theta = Matrix::zeros(d, k);
        theta.data.iter_mut().for_each(|x| *x = 1.0 / k as f64);
        let model = TopicModel {
            version: MODEL_VERSION,
            phi,
            theta,
            hyperparams: quick_hp(k, 0),
            estimate_mode: EstimateMode::Mean,
            corpus_digest: corpus.digest(),
            sweep_count: 0,
        };
        let ll = log_likelihood(&model, &corpus).unwrap();
        assert!((ll - -(v as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_dimension_mismatch() {
        let corpus = toy_encoded();
        let hp = quick_hp(2, 1);
        let model = train(&corpus, &hp, TrainOptions::default(), None).unwrap().model;
        let mut other = corpus.clone();
        other.docs.pop();
        assert!(matches!(
            log_likelihood(&model, &other),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn top_words_basics() {
        let corpus = toy_encoded();
        let hp = quick_hp(1, 4);
        let model = train(&corpus, &hp, TrainOptions::default(), None).unwrap().model;

        // K=1: most frequent term leads. eat/kipper/kitten each occur twice;
        // the tie breaks toward the smallest vocabulary id, which is "eat".
        let tops = top_words(&model, 3).unwrap();
        assert_eq!(corpus.vocabulary.term(tops[0][0].0), "eat");

        // k = V returns a permutation of the vocabulary.
        let v = corpus.vocab_size();
        let all = top_words(&model, v).unwrap();
        let mut ids: Vec<u32> = all[0].iter().map(|&(w, _)| w).collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..v as u32).collect::<Vec<_>>());

        assert!(top_words(&model, v + 1).is_err());
        assert!(top_words(&model, 0).is_err());
    }

    #[test]
    fn primary_topic_counts_tie_breaks_low() {
        let mut theta = Matrix::zeros(2, 2);
        theta.set(0, 0, 0.5);
        theta.set(0, 1, 0.5);
        theta.set(1, 0, 0.2);
        theta.set(1, 1, 0.8);
        let model = TopicModel {
            version: MODEL_VERSION,
            phi: Matrix::zeros(2, 3),
            theta,
            hyperparams: quick_hp(2, 0),
            estimate_mode: EstimateMode::Mean,
            corpus_digest: String::new(),
            sweep_count: 0,
        };
        let counts = primary_topic_counts(&model);
        assert_eq!(counts, vec![1, 1]);
        assert_eq!(counts.iter().sum::<usize>(), model.doc_count());
    }

    #[test]
    fn checkpoint_round_trip_resumes_bitwise() {
        let corpus = toy_encoded();
        let hp = quick_hp(2, 21);

        // Straight-through run.
        let full = train(&corpus, &hp, TrainOptions::default(), None).unwrap();

        // Stop at 150 sweeps, checkpoint, reload, resume.
        let mut state = init(&corpus, &hp).unwrap();
        for _ in 0..150 {
            sweep(&mut state, &corpus, &hp).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        save_checkpoint(&state, &hp, &corpus.digest(), &path).unwrap();
        let ckpt = load_checkpoint(&path).unwrap();
        let restored = state_from_checkpoint(&ckpt, &corpus).unwrap();
        let resumed = resume(restored, &corpus, &hp, TrainOptions::default(), None).unwrap();

        assert_eq!(full.state.z, resumed.state.z);
        assert_eq!(full.state.sweep_count, resumed.state.sweep_count);
    }

    #[test]
    fn checkpoint_rejects_wrong_corpus() {
        let corpus = toy_encoded();
        let hp = quick_hp(2, 21);
        let state = init(&corpus, &hp).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        save_checkpoint(&state, &hp, &corpus.digest(), &path).unwrap();
        let ckpt = load_checkpoint(&path).unwrap();

        let mut other = corpus.clone();
        other.docs[0].tokens.reverse();
        assert!(state_from_checkpoint(&ckpt, &other).is_err());
    }
}
