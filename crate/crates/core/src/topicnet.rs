//! Topic-topic similarity and the thresholded topic graph.
//!
//! Similarity is the cosine between topic vectors, computed either from phi
//! rows (how words are shared between topics — the natural choice for small
//! K) or from theta columns (how documents are shared — better when K is
//! large and documents mix many topics). Edges below the threshold are
//! removed; an edge exactly at the threshold is kept.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::lda::TopicModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMode {
    /// Compare rows of phi (length-V word-weight vectors).
    WordBased,
    /// Compare columns of theta (length-D document-weight vectors).
    DocumentBased,
}

impl SimilarityMode {
    /// The mode used when none is requested: word-based up to 10 topics,
    /// document-based beyond.
    pub fn default_for(num_topics: usize) -> Self {
        if num_topics <= 10 {
            SimilarityMode::WordBased
        } else {
            SimilarityMode::DocumentBased
        }
    }
}

/// Symmetric K×K matrix of pairwise topic cosines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    k: usize,
    pub mode: SimilarityMode,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn size(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.k + j]
    }

    /// Build directly from row-major K×K values; used by tests and synthetic
    /// inputs. Enforces symmetry and range.
    pub fn from_values(values: Vec<f64>, k: usize, mode: SimilarityMode) -> Result<Self> {
        if values.len() != k * k {
            return Err(Error::DimensionMismatch(format!(
                "expected {k}x{k} values, got {}",
                values.len()
            )));
        }
        let m = SimilarityMatrix { k, mode, values };
        for i in 0..k {
            for j in 0..k {
                let v = m.get(i, j);
                if (m.get(j, i) - v).abs() > 1e-9 {
                    return Err(Error::Internal("similarity matrix not symmetric".into()));
                }
                if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                    return Err(Error::Internal(format!("similarity {v} out of [0,1]")));
                }
            }
        }
        Ok(m)
    }

    /// TSV: K rows of K six-decimal values.
    pub fn write_tsv(&self, mut out: impl Write) -> std::io::Result<()> {
        for i in 0..self.k {
            let row: Vec<String> =
                (0..self.k).map(|j| format!("{:.6}", self.get(i, j))).collect();
            writeln!(out, "{}", row.join("\t"))?;
        }
        Ok(())
    }
}

/// Cosine similarity of two nonnegative vectors; errors on a zero vector.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "cosine of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

/// Pairwise topic cosine similarities in the requested mode.
pub fn topic_similarity(model: &TopicModel, mode: SimilarityMode) -> Result<SimilarityMatrix> {
    let k = model.num_topics();
    let vectors: Vec<Vec<f64>> = match mode {
        SimilarityMode::WordBased => (0..k).map(|t| model.phi.row(t).to_vec()).collect(),
        SimilarityMode::DocumentBased => (0..k).map(|t| model.theta.column(t)).collect(),
    };
    let mut values = vec![0.0f64; k * k];
    for i in 0..k {
        values[i * k + i] = cosine(&vectors[i], &vectors[i])?.clamp(0.0, 1.0);
        for j in i + 1..k {
            let s = cosine(&vectors[i], &vectors[j])?.clamp(0.0, 1.0);
            values[i * k + j] = s;
            values[j * k + i] = s;
        }
    }
    Ok(SimilarityMatrix { k, mode, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Weighted undirected graph over topics. Edges are stored once with
/// `source < target`; no self-loops.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicGraph {
    pub node_count: usize,
    pub labels: Vec<Option<String>>,
    pub edges: Vec<Edge>,
    pub threshold: f64,
}

pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.2;

/// Keep the edge (i, j) iff `sim[i][j] >= threshold` (boundary kept).
pub fn build_graph(
    sim: &SimilarityMatrix,
    threshold: f64,
    labels: Option<Vec<String>>,
) -> TopicGraph {
    let k = sim.size();
    let labels = match labels {
        Some(ls) => (0..k).map(|i| ls.get(i).cloned()).collect(),
        None => vec![None; k],
    };
    let mut edges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let w = sim.get(i, j);
            if w >= threshold {
                edges.push(Edge {
                    source: i,
                    target: j,
                    weight: w,
                });
            }
        }
    }
    TopicGraph {
        node_count: k,
        labels,
        edges,
        threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy_corpus;
    use crate::lda::{train, Hyperparams, TrainOptions};
    use crate::preprocess::{preprocess_corpus, PreprocessConfig};

    fn toy_model(k: usize) -> TopicModel {
        let corpus = preprocess_corpus(&toy_corpus(), &PreprocessConfig::default()).unwrap();
        let hp = Hyperparams {
            num_topics: k,
            alpha: 0.1,
            beta: 0.01,
            iterations: 200,
            burn_in: 100,
            seed: 5,
        };
        train(&corpus, &hp, TrainOptions::default(), None)
            .unwrap()
            .model
    }

    #[test]
    fn cosine_basics() {
        assert!((cosine(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap().abs() < 1e-12);
        let v = cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((v - 0.70711).abs() < 1e-5);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            cosine(&[1.0], &[1.0, 0.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    /// Two mirrored 3-term topics. Hand arithmetic, re-checked by the naive
    /// dot-product route: dot = 0.07 + 0.04 + 0.07 = 0.18, each squared norm
    /// 0.54, so cosine = 0.18/0.54 = 1/3.
    #[test]
    fn two_topic_hand_instance() {
        let u = [0.7, 0.2, 0.1];
        let v = [0.1, 0.2, 0.7];
        let naive = {
            let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            dot / (nu * nv)
        };
        let got = cosine(&u, &v).unwrap();
        assert!((got - naive).abs() < 1e-12);
        assert!((got - 1.0 / 3.0).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn similarity_matrix_properties() {
        let model = toy_model(2);
        for mode in [SimilarityMode::WordBased, SimilarityMode::DocumentBased] {
            let sim = topic_similarity(&model, mode).unwrap();
            for i in 0..2 {
                assert!((sim.get(i, i) - 1.0).abs() < 1e-9);
                for j in 0..2 {
                    let v = sim.get(i, j);
                    assert!((sim.get(j, i) - v).abs() < 1e-9);
                    assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }

    #[test]
    fn single_topic_similarity() {
        let model = toy_model(1);
        let sim = topic_similarity(&model, SimilarityMode::WordBased).unwrap();
        assert_eq!(sim.size(), 1);
        assert!((sim.get(0, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duplicated_rows_have_unit_similarity() {
        let mut model = toy_model(2);
        let row: Vec<f64> = model.phi.row(0).to_vec();
        for (w, v) in row.iter().enumerate() {
            model.phi.set(1, w, *v);
        }
        let sim = topic_similarity(&model, SimilarityMode::WordBased).unwrap();
        assert!((sim.get(0, 1) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn default_mode_switches_at_ten() {
        assert_eq!(SimilarityMode::default_for(7), SimilarityMode::WordBased);
        assert_eq!(SimilarityMode::default_for(10), SimilarityMode::WordBased);
        assert_eq!(
            SimilarityMode::default_for(20),
            SimilarityMode::DocumentBased
        );
    }

    fn sim3(v01: f64, v02: f64, v12: f64) -> SimilarityMatrix {
        SimilarityMatrix::from_values(
            vec![1.0, v01, v02, v01, 1.0, v12, v02, v12, 1.0],
            3,
            SimilarityMode::WordBased,
        )
        .unwrap()
    }

    #[test]
    fn build_graph_keeps_boundary() {
        let sim = sim3(0.5, 0.19, 0.20);
        let g = build_graph(&sim, 0.2, None);
        let pairs: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(pairs, [(0, 1), (1, 2)]);
        assert_eq!(g.edges[0].weight, 0.5);
        assert_eq!(g.edges[1].weight, 0.20);
    }

    #[test]
    fn build_graph_extremes() {
        let sim = sim3(0.5, 0.3, 0.4);
        assert_eq!(build_graph(&sim, 0.0, None).edges.len(), 3);
        let distinct = sim3(0.9, 0.8, 0.7);
        assert!(build_graph(&distinct, 1.0, None).edges.is_empty());
    }

    #[test]
    fn tsv_is_fixed_format() {
        let sim = sim3(0.5, 0.19, 0.2);
        let mut buf = Vec::new();
        sim.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "1.000000\t0.500000\t0.190000\n0.500000\t1.000000\t0.200000\n0.190000\t0.200000\t1.000000\n"
        );
    }
}
