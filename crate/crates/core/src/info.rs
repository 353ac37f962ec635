//! Probability vectors, joint laws and the entropy kernels everything else is built on.
//!
//! Entropies are in bits with the convention `0 log 0 = 0`. Distributions are validated
//! to a total-mass tolerance of [`PROB_TOL`] and are never renormalized silently; use
//! [`ProbVector::normalized`] when renormalization is wanted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const PROB_TOL: f64 = 1e-12;

/// `-p log2 p` with `0 log 0 = 0`.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Entropy of a mass vector without validation. Summation runs in index order.
pub fn entropy_of_masses(masses: &[f64]) -> f64 {
    masses.iter().map(|&p| plogp(p)).sum()
}

/// Binary entropy function `H_b(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

fn validate_masses(probs: &[f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::validation(format!("{what}: empty alphabet")));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::validation(format!("{what}: entry {i} is {p}, expected a non-negative probability")));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::validation(format!("{what}: total mass {total} differs from 1")));
    }
    Ok(())
}

fn index_labels(len: usize) -> Vec<String> {
    (0..len).map(|i| i.to_string()).collect()
}

/// A finite probability distribution over a labeled alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbVector {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::validation(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::validation(format!("duplicate label {l:?}")));
            }
        }
        validate_masses(&probs, "distribution")?;
        Ok(ProbVector { labels, probs })
    }

    /// Distribution labeled `"0", "1", ...`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new(index_labels(probs.len()), probs)
    }

    /// Renormalizes non-negative weights to unit mass.
    pub fn normalized(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::validation("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::validation("weights have zero total mass"));
        }
        Self::new(labels, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::validation("distribution: empty alphabet"));
        }
        Self::from_probs(vec![1.0 / len as f64; len])
    }

    pub fn point_mass(len: usize, at: usize) -> Result<Self> {
        if at >= len {
            return Err(Error::validation(format!("point mass index {at} outside alphabet of size {len}")));
        }
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Self::from_probs(probs)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

pub(crate) fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// Inverse-CDF lookup: the first index whose cumulative mass exceeds `u`, never an
/// index of zero mass.
pub(crate) fn sample_index(probs: &[f64], cum: &[f64], u: f64) -> usize {
    match cum.iter().position(|&c| u < c) {
        Some(i) if probs[i] > 0.0 => i,
        _ => probs.iter().rposition(|&p| p > 0.0).unwrap_or(0),
    }
}

/// A joint law over two or three labeled axes, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDist {
    axes: Vec<Vec<String>>,
    dims: Vec<usize>,
    table: Vec<f64>,
}

impl JointDist {
    pub fn new(axes: Vec<Vec<String>>, table: Vec<f64>) -> Result<Self> {
        if !(2..=3).contains(&axes.len()) {
            return Err(Error::validation(format!("joint law needs 2 or 3 axes, got {}", axes.len())));
        }
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        if dims.contains(&0) {
            return Err(Error::validation("joint law: empty axis"));
        }
        let size: usize = dims.iter().product();
        if size != table.len() {
            return Err(Error::validation(format!("joint law: table has {} cells, axes imply {size}", table.len())));
        }
        validate_masses(&table, "joint law")?;
        Ok(JointDist { axes, dims, table })
    }

    /// Joint law with index labels on every axis.
    pub fn from_table(dims: &[usize], table: Vec<f64>) -> Result<Self> {
        Self::new(dims.iter().map(|&d| index_labels(d)).collect(), table)
    }

    /// Two-axis joint from a matrix of masses, one row per first-axis symbol.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::validation("joint law: ragged matrix"));
        }
        Self::from_table(&[rows.len(), cols], rows.concat())
    }

    /// The law `p(x) p(y|x)` for an input distribution and a row-stochastic kernel.
    pub fn from_input_and_kernel(px: &ProbVector, kernel: &[Vec<f64>], out_labels: Vec<String>) -> Result<Self> {
        if kernel.len() != px.len() {
            return Err(Error::validation(format!(
                "input distribution has {} symbols, kernel has {} rows",
                px.len(),
                kernel.len()
            )));
        }
        let table = px
            .probs()
            .iter()
            .zip(kernel)
            .flat_map(|(&p, row)| row.iter().map(move |&w| p * w))
            .collect();
        Self::new(vec![px.labels().to_vec(), out_labels], table)
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn axes(&self) -> &[Vec<String>] {
        &self.axes
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Mass at a multi-index.
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.table[self.flat_index(idx)]
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        for (k, &a) in axes.iter().enumerate() {
            if a >= self.rank() {
                return Err(Error::validation(format!("axis {a} out of range for a rank-{} joint", self.rank())));
            }
            if axes[..k].contains(&a) {
                return Err(Error::validation(format!("axis {a} listed twice")));
            }
        }
        Ok(())
    }

    /// Marginal masses over `keep`, flattened row-major in the order given.
    fn marginal_masses(&self, keep: &[usize]) -> Vec<f64> {
        let out_dims: Vec<usize> = keep.iter().map(|&a| self.dims[a]).collect();
        let mut out = vec![0.0; out_dims.iter().product::<usize>().max(1)];
        let mut idx = vec![0usize; self.rank()];
        for &mass in &self.table {
            let flat = keep.iter().zip(&out_dims).fold(0, |acc, (&a, &d)| acc * d + idx[a]);
            out[flat] += mass;
            // odometer increment, last axis fastest
            for ax in (0..self.rank()).rev() {
                idx[ax] += 1;
                if idx[ax] < self.dims[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        out
    }

    /// Single-axis marginal.
    pub fn marginal(&self, axis: usize) -> Result<ProbVector> {
        self.check_axes(&[axis])?;
        let masses = self.marginal_masses(&[axis]);
        ProbVector::new(self.axes[axis].clone(), masses)
    }

    /// Joint entropy of the listed axes (empty list gives 0).
    pub fn entropy_of(&self, axes: &[usize]) -> Result<f64> {
        self.check_axes(axes)?;
        if axes.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_of_masses(&self.marginal_masses(axes)))
    }
}

/// A sequence of alphabet indices (`x^n`, `y^n`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sequence(pub Vec<usize>);

impl Sequence {
    pub fn new(symbols: Vec<usize>) -> Self {
        Sequence(symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn check_alphabet(&self, size: usize) -> Result<()> {
        match self.0.iter().position(|&s| s >= size) {
            Some(i) => Err(Error::validation(format!(
                "symbol {} at position {i} outside alphabet of size {size}",
                self.0[i]
            ))),
            None => Ok(()),
        }
    }
}

impl From<Vec<usize>> for Sequence {
    fn from(v: Vec<usize>) -> Self {
        Sequence(v)
    }
}

/// Shannon entropy in bits.
pub fn entropy(p: &ProbVector) -> f64 {
    entropy_of_masses(p.probs())
}

/// `H(target | given) = H(target, given) - H(given)`.
pub fn conditional_entropy(j: &JointDist, target: usize, given: &[usize]) -> Result<f64> {
    let mut all = vec![target];
    all.extend_from_slice(given);
    j.check_axes(&all)?;
    Ok(j.entropy_of(&all)? - j.entropy_of(given)?)
}

/// `I(X;Y) = H(X) + H(Y) - H(X,Y)` for a two-axis joint.
pub fn mutual_information(j: &JointDist) -> Result<f64> {
    if j.rank() != 2 {
        return Err(Error::validation(format!("mutual information needs a two-axis joint, got rank {}", j.rank())));
    }
    Ok(j.entropy_of(&[0])? + j.entropy_of(&[1])? - j.entropy_of(&[0, 1])?)
}

/// Precomputed weak joint-typicality test for a two-axis law.
///
/// `(x^n, y^n)` is typical when the empirical rates `-(1/n) log2 p(x^n)`,
/// `-(1/n) log2 p(y^n)` and `-(1/n) log2 p(x^n, y^n)` are each strictly within `eps` of
/// `H(X)`, `H(Y)` and `H(X,Y)`. Rates are computed from the joint type (pair counts), so
/// the result does not depend on summation order.
#[derive(Debug, Clone)]
pub struct TypicalityTest {
    nx: usize,
    ny: usize,
    log_px: Vec<f64>,
    log_py: Vec<f64>,
    log_pxy: Vec<f64>,
    hx: f64,
    hy: f64,
    hxy: f64,
    eps: f64,
}

impl TypicalityTest {
    pub fn new(j: &JointDist, eps: f64) -> Result<Self> {
        if j.rank() != 2 {
            return Err(Error::validation("typicality needs a two-axis joint"));
        }
        if !(eps > 0.0) {
            return Err(Error::validation(format!("eps must be positive, got {eps}")));
        }
        let px = j.marginal_masses(&[0]);
        let py = j.marginal_masses(&[1]);
        let lg = |v: &[f64]| v.iter().map(|&p| if p > 0.0 { p.log2() } else { f64::NEG_INFINITY }).collect::<Vec<_>>();
        Ok(TypicalityTest {
            nx: j.dims[0],
            ny: j.dims[1],
            log_px: lg(&px),
            log_py: lg(&py),
            log_pxy: lg(&j.table),
            hx: entropy_of_masses(&px),
            hy: entropy_of_masses(&py),
            hxy: entropy_of_masses(&j.table),
            eps,
        })
    }

    pub fn input_size(&self) -> usize {
        self.nx
    }

    pub fn output_size(&self) -> usize {
        self.ny
    }

    /// Typicality of a joint type given as pair counts `counts[a * ny + b]`.
    pub fn is_typical_counts(&self, counts: &[u32], n: usize) -> bool {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sxy = 0.0;
        for a in 0..self.nx {
            for b in 0..self.ny {
                let c = counts[a * self.ny + b];
                if c == 0 {
                    continue;
                }
                let lxy = self.log_pxy[a * self.ny + b];
                if lxy == f64::NEG_INFINITY {
                    return false;
                }
                let c = c as f64;
                sx += c * self.log_px[a];
                sy += c * self.log_py[b];
                sxy += c * lxy;
            }
        }
        let n = n as f64;
        (-sx / n - self.hx).abs() < self.eps
            && (-sy / n - self.hy).abs() < self.eps
            && (-sxy / n - self.hxy).abs() < self.eps
    }

    /// Typicality of a sequence pair; lengths and alphabets must already be checked.
    pub fn is_typical(&self, x: &[usize], y: &[usize]) -> bool {
        let mut counts = vec![0u32; self.nx * self.ny];
        for (&a, &b) in x.iter().zip(y) {
            counts[a * self.ny + b] += 1;
        }
        self.is_typical_counts(&counts, x.len())
    }
}

/// Weak ε-joint typicality of `(x, y)` with respect to `j`.
pub fn is_jointly_typical(x: &Sequence, y: &Sequence, j: &JointDist, eps: f64) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::validation(format!("sequence lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::validation("typicality needs n >= 1"));
    }
    let test = TypicalityTest::new(j, eps)?;
    x.check_alphabet(test.nx)?;
    y.check_alphabet(test.ny)?;
    Ok(test.is_typical(x.symbols(), y.symbols()))
}
