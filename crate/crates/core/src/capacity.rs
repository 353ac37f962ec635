//! Discrete memoryless channels and capacity computation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{self, JointDist, ProbVector, PROB_TOL};
use crate::par;

/// Default Blahut–Arimoto stopping gap in bits.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default Blahut–Arimoto iteration limit.
pub const DEFAULT_MAX_ITER: usize = 100_000;

const INPUT_FLOOR: f64 = 1e-300;

/// A discrete memoryless channel `matrix[x][y] = p(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dmc {
    inputs: Vec<String>,
    outputs: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct DmcDoc {
    inputs: Vec<String>,
    outputs: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

impl Dmc {
    pub fn new(inputs: Vec<String>, outputs: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() || outputs.is_empty() {
            return Err(Error::validation("channel: empty alphabet"));
        }
        if matrix.len() != inputs.len() {
            return Err(Error::validation(format!("channel: {} rows for {} inputs", matrix.len(), inputs.len())));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != outputs.len() {
                return Err(Error::validation(format!(
                    "channel row {i}: {} entries for {} outputs",
                    row.len(),
                    outputs.len()
                )));
            }
            if let Some((j, p)) = row.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
                return Err(Error::validation(format!("channel row {i}: entry {j} is {p}")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::validation(format!("channel row {i}: sums to {total}, not 1")));
            }
        }
        Ok(Dmc { inputs, outputs, matrix })
    }

    /// Channel with index labels.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let nx = matrix.len();
        let ny = matrix.first().map_or(0, Vec::len);
        Self::new(
            (0..nx).map(|i| i.to_string()).collect(),
            (0..ny).map(|i| i.to_string()).collect(),
            matrix,
        )
    }

    /// Loads `{"inputs": [...], "outputs": [...], "matrix": [[...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DmcDoc = serde_json::from_str(text)?;
        Self::new(doc.inputs, doc.outputs, doc.matrix)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "inputs": self.inputs, "outputs": self.outputs, "matrix": self.matrix })
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn input_size(&self) -> usize {
        self.inputs.len()
    }

    pub fn output_size(&self) -> usize {
        self.outputs.len()
    }

    /// `p(y|x)`.
    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x][y]
    }

    /// Output symbols no input can produce.
    pub fn unreachable_outputs(&self) -> Vec<usize> {
        (0..self.output_size()).filter(|&y| self.matrix.iter().all(|row| row[y] == 0.0)).collect()
    }

    /// Human-readable warnings about the channel (currently: unreachable outputs).
    pub fn warnings(&self) -> Vec<String> {
        self.unreachable_outputs()
            .into_iter()
            .map(|y| format!("output {} is unreachable from every input", self.outputs[y]))
            .collect()
    }

    /// Joint law `p(x) p(y|x)`.
    pub fn joint(&self, px: &ProbVector) -> Result<JointDist> {
        if px.len() != self.input_size() {
            return Err(Error::validation(format!(
                "input distribution has {} symbols, channel has {} inputs",
                px.len(),
                self.input_size()
            )));
        }
        JointDist::from_input_and_kernel(px, &self.matrix, self.outputs.clone())
    }
}

/// Mutual information `I(X;Y)` induced by `px` on the channel.
pub fn mutual_information_for_input(ch: &Dmc, px: &ProbVector) -> Result<f64> {
    info::mutual_information(&ch.joint(px)?)
}

/// Output of [`blahut_arimoto`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Lower bound `I(p; W)` at the final input distribution, bits per channel use.
    pub capacity: f64,
    pub optimal_input: Vec<f64>,
    pub iterations: usize,
    /// Certified gap: `max_x D(x) - sum_x p(x) D(x)`, an upper bound on `C - capacity`.
    pub gap: f64,
}

impl CapacityResult {
    pub fn optimal_input_dist(&self) -> ProbVector {
        ProbVector::from_probs(self.optimal_input.clone()).expect("Blahut-Arimoto keeps a normalized input")
    }

    /// Upper bound on the true capacity.
    pub fn upper_bound(&self) -> f64 {
        self.capacity + self.gap
    }
}

/// Per-input divergences `D(x) = sum_y W(y|x) log2(W(y|x) / q(y))`.
fn divergences(ch: &Dmc, q: &[f64]) -> Vec<f64> {
    let row_div = |x: usize| -> f64 {
        ch.matrix[x]
            .iter()
            .zip(q)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, &qy)| w * (w / qy).log2())
            .sum()
    };
    if ch.input_size() * ch.output_size() >= 1 << 14 {
        par::map_indexed(ch.input_size(), row_div)
    } else {
        (0..ch.input_size()).map(row_div).collect()
    }
}

/// Blahut–Arimoto capacity computation.
///
/// Stops when the certified gap between the upper bound `max_x D(x)` and the lower
/// bound `sum_x p(x) D(x)` is at most `tol`. Inputs are floored at 1e-300 during the
/// iteration so their divergence stays finite. Per-input divergences may be computed in
/// parallel; each is a sequential sum, so results do not depend on the thread count.
pub fn blahut_arimoto(ch: &Dmc, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::validation(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::validation("max_iter must be at least 1"));
    }
    let nx = ch.input_size();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut best: Option<CapacityResult> = None;
    for iter in 1..=max_iter {
        let mut q = vec![0.0; ch.output_size()];
        for (&px, row) in p.iter().zip(&ch.matrix) {
            for (acc, &w) in q.iter_mut().zip(row) {
                *acc += px * w;
            }
        }
        let d = divergences(ch, &q);
        let lower: f64 = p.iter().zip(&d).map(|(a, b)| a * b).sum();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gap = (upper - lower).max(0.0);
        let current = CapacityResult { capacity: lower.max(0.0), optimal_input: p.clone(), iterations: iter, gap };
        if gap <= tol {
            return Ok(current);
        }
        if best.as_ref().is_none_or(|b| current.gap < b.gap) {
            best = Some(current);
        }
        let shift = upper;
        let mut next: Vec<f64> = p.iter().zip(&d).map(|(&pi, &di)| pi * (di - shift).exp2()).collect();
        let total: f64 = next.iter().sum();
        for v in &mut next {
            *v = (*v / total).max(INPUT_FLOOR);
        }
        let total: f64 = next.iter().sum();
        for v in &mut next {
            *v /= total;
        }
        p = next;
    }
    Err(Error::NotConverged(Box::new(best.expect("at least one iteration ran"))))
}

/// Blahut–Arimoto with the default tolerance and iteration limit.
pub fn capacity(ch: &Dmc) -> Result<CapacityResult> {
    blahut_arimoto(ch, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha == 0.0 {
        return Err(Error::UnboundedSemanticCapacity);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(())
}

/// Semantic capacity from an already computed Shannon capacity: `C / alpha`.
pub fn semantic_capacity_from(capacity: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(capacity / alpha)
}

/// Semantic channel capacity `C_s = max_p I(X;Y) / alpha` for `alpha` in `(0, 1]`.
pub fn semantic_capacity(ch: &Dmc, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    semantic_capacity_from(capacity(ch)?.capacity, alpha)
}

/// `log2(1 + snr)` for a linear signal-to-noise ratio.
pub fn awgn_capacity(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) || snr.is_infinite() {
        return Err(Error::domain(format!("snr must be finite and non-negative, got {snr}")));
    }
    Ok(snr.ln_1p() / std::f64::consts::LN_2)
}
