//! Knowledge bases and semantic information measures.
//!
//! A knowledge base is a row-stochastic kernel `p_K(s|x)` from source symbols to semantic
//! interpretations. Pushing a source distribution through it gives the semantic
//! distribution `p(s)`, whose entropy is the semantic entropy of the source under that
//! knowledge base. It may be larger, smaller or equal to the Shannon entropy of the source.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{self, entropy, JointDist, ProbVector, PROB_TOL};
use crate::quadrature::{self, Integral};

/// Default absolute tolerance for differential semantic entropy.
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

const MAX_SEGMENTS: usize = 20_000;

/// A knowledge base: `kernel[x][s] = p_K(s | x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KnowledgeBaseDoc")]
pub struct KnowledgeBase {
    source: Vec<String>,
    semantic: Vec<String>,
    kernel: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct KnowledgeBaseDoc {
    source: Vec<String>,
    semantic: Vec<String>,
    kernel: Vec<Vec<f64>>,
}

impl TryFrom<KnowledgeBaseDoc> for KnowledgeBase {
    type Error = Error;

    fn try_from(doc: KnowledgeBaseDoc) -> Result<Self> {
        Self::new(doc.source, doc.semantic, doc.kernel)
    }
}

impl KnowledgeBase {
    pub fn new(source: Vec<String>, semantic: Vec<String>, kernel: Vec<Vec<f64>>) -> Result<Self> {
        if source.is_empty() || semantic.is_empty() {
            return Err(Error::validation("knowledge base: empty alphabet"));
        }
        if kernel.len() != source.len() {
            return Err(Error::validation(format!(
                "knowledge base: {} kernel rows for {} source symbols",
                kernel.len(),
                source.len()
            )));
        }
        for (row, (label, probs)) in source.iter().zip(&kernel).enumerate() {
            if probs.len() != semantic.len() {
                return Err(Error::validation(format!(
                    "knowledge base row {row} ({label}): {} entries for {} semantic symbols",
                    probs.len(),
                    semantic.len()
                )));
            }
            if let Some((col, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
                return Err(Error::validation(format!("knowledge base row {row} ({label}): entry {col} is {p}")));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::validation(format!("knowledge base row {row} ({label}): sums to {total}, not 1")));
            }
        }
        Ok(KnowledgeBase { source, semantic, kernel })
    }

    /// Loads `{"source": [...], "semantic": [...], "kernel": [[...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        Self::try_from(serde_json::from_str::<KnowledgeBaseDoc>(text)?)
    }

    /// The knowledge base under which every symbol is its own meaning.
    pub fn identity(labels: Vec<String>) -> Result<Self> {
        let k = labels.len();
        let kernel = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self::new(labels.clone(), labels, kernel)
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn semantic(&self) -> &[String] {
        &self.semantic
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }
}

fn check_source(px: &ProbVector, source: &[String]) -> Result<()> {
    if px.labels() != source {
        return Err(Error::validation(format!(
            "source distribution alphabet {:?} does not match knowledge base alphabet {:?}",
            px.labels(),
            source
        )));
    }
    Ok(())
}

/// `p(s) = sum_x p_K(s|x) p(x)`.
pub fn semantic_distribution(px: &ProbVector, kb: &KnowledgeBase) -> Result<ProbVector> {
    check_source(px, &kb.source)?;
    let mut ps = vec![0.0; kb.semantic.len()];
    for (&p, row) in px.probs().iter().zip(&kb.kernel) {
        for (acc, &w) in ps.iter_mut().zip(row) {
            *acc += p * w;
        }
    }
    ProbVector::new(kb.semantic.clone(), ps)
}

/// Discrete semantic entropy of `X` under the knowledge base.
pub fn semantic_entropy(px: &ProbVector, kb: &KnowledgeBase) -> Result<f64> {
    Ok(entropy(&semantic_distribution(px, kb)?))
}

/// Entropy of the knowledge variable `K`; same contract as [`info::entropy`].
pub fn knowledge_entropy(pk: &ProbVector) -> f64 {
    info::entropy(pk)
}

/// A conditional density `f(s|x)` from a supported parametric family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Density {
    Gaussian { mean: f64, std_dev: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Density {
    fn validate(&self) -> Result<()> {
        match *self {
            Density::Gaussian { mean, std_dev } => {
                if !mean.is_finite() || !(std_dev > 0.0) || !std_dev.is_finite() {
                    return Err(Error::validation(format!("gaussian needs finite mean and std_dev > 0, got ({mean}, {std_dev})")));
                }
            }
            Density::Uniform { lo, hi } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::validation(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
                }
            }
        }
        Ok(())
    }

    pub fn pdf(&self, s: f64) -> f64 {
        match *self {
            Density::Gaussian { mean, std_dev } => {
                let z = (s - mean) / std_dev;
                (-0.5 * z * z).exp() / (std_dev * (2.0 * std::f64::consts::PI).sqrt())
            }
            Density::Uniform { lo, hi } => {
                if s >= lo && s <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    /// Probability mass outside `[lo, hi]`.
    pub fn mass_outside(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            Density::Gaussian { mean, std_dev } => {
                let tail = |z: f64| 0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2);
                tail((mean - lo) / std_dev) + tail((hi - mean) / std_dev)
            }
            Density::Uniform { lo: a, hi: b } => {
                let inside = (b.min(hi) - a.max(lo)).max(0.0);
                1.0 - inside / (b - a)
            }
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        match *self {
            Density::Gaussian { mean, std_dev } => {
                out.extend((-8..=8).map(|k| mean + k as f64 * std_dev));
            }
            Density::Uniform { lo, hi } => out.extend([lo, hi]),
        }
    }

    fn default_span(&self) -> (f64, f64) {
        match *self {
            Density::Gaussian { mean, std_dev } => (mean - 12.0 * std_dev, mean + 12.0 * std_dev),
            Density::Uniform { lo, hi } => (lo, hi),
        }
    }
}

/// Per-source-symbol densities `f(s|x)` with a closed integration domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousKernel {
    components: Vec<Density>,
    domain: (f64, f64),
}

impl ContinuousKernel {
    pub fn new(components: Vec<Density>, domain: (f64, f64)) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::validation("continuous kernel: no components"));
        }
        for c in &components {
            c.validate()?;
        }
        if !(domain.0 < domain.1) || !domain.0.is_finite() || !domain.1.is_finite() {
            return Err(Error::validation(format!("invalid integration domain {domain:?}")));
        }
        Ok(ContinuousKernel { components, domain })
    }

    /// Domain spanning every uniform support and twelve standard deviations around every
    /// Gaussian mean.
    pub fn with_auto_domain(components: Vec<Density>) -> Result<Self> {
        for c in &components {
            c.validate()?;
        }
        let (lo, hi) = components
            .iter()
            .map(Density::default_span)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d)));
        Self::new(components, (lo, hi))
    }

    pub fn components(&self) -> &[Density] {
        &self.components
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

/// Differential semantic entropy `h(S)` of the mixture `f(s) = sum_x f(s|x) p(x)`.
///
/// Fails with a validation error when the mixture mass outside the integration domain is
/// not below `quad_tol / 10`, and with a numeric error when quadrature does not converge.
pub fn differential_semantic_entropy(px: &ProbVector, k: &ContinuousKernel, quad_tol: f64) -> Result<Integral> {
    if px.len() != k.components.len() {
        return Err(Error::validation(format!(
            "source distribution has {} symbols, kernel has {} densities",
            px.len(),
            k.components.len()
        )));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::validation(format!("quadrature tolerance must be positive, got {quad_tol}")));
    }
    let (lo, hi) = k.domain;
    let tail: f64 = px.probs().iter().zip(&k.components).map(|(&p, c)| p * c.mass_outside(lo, hi)).sum();
    if tail >= quad_tol / 10.0 {
        return Err(Error::validation(format!(
            "mixture mass {tail:e} lies outside the integration domain [{lo}, {hi}]; widen the domain"
        )));
    }
    let mut breaks = Vec::new();
    for (&p, c) in px.probs().iter().zip(&k.components) {
        if p > 0.0 {
            c.breakpoints(&mut breaks);
        }
    }
    let mixture = |s: f64| -> f64 {
        px.probs().iter().zip(&k.components).map(|(&p, c)| if p > 0.0 { p * c.pdf(s) } else { 0.0 }).sum()
    };
    quadrature::integrate(|s| info::plogp(mixture(s)), lo, hi, &breaks, quad_tol, MAX_SEGMENTS)
}

/// A joint law over `(X, S, K)`, axes in that order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemanticTriple {
    joint: JointDist,
}

#[derive(Deserialize)]
struct TripleDoc {
    source: Vec<String>,
    semantic: Vec<String>,
    knowledge: Vec<String>,
    /// `table[x][s][k]`
    table: Vec<Vec<Vec<f64>>>,
}

impl SemanticTriple {
    pub const X: usize = 0;
    pub const S: usize = 1;
    pub const K: usize = 2;

    pub fn new(joint: JointDist) -> Result<Self> {
        if joint.rank() != 3 {
            return Err(Error::validation(format!("semantic triple needs a rank-3 joint, got rank {}", joint.rank())));
        }
        Ok(SemanticTriple { joint })
    }

    /// Loads `{"source", "semantic", "knowledge", "table": [[[p(x,s,k)]]]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TripleDoc = serde_json::from_str(text)?;
        let (nx, ns, nk) = (doc.source.len(), doc.semantic.len(), doc.knowledge.len());
        if doc.table.len() != nx {
            return Err(Error::validation(format!("triple table has {} x-slices, expected {nx}", doc.table.len())));
        }
        let mut flat = Vec::with_capacity(nx * ns * nk);
        for (x, plane) in doc.table.iter().enumerate() {
            if plane.len() != ns || plane.iter().any(|r| r.len() != nk) {
                return Err(Error::validation(format!("triple table slice x = {x} is not {ns} x {nk}")));
            }
            flat.extend(plane.iter().flatten());
        }
        Self::new(JointDist::new(vec![doc.source, doc.semantic, doc.knowledge], flat)?)
    }

    pub fn joint(&self) -> &JointDist {
        &self.joint
    }
}

/// Terms of `H(X) = I(K;X) + H(S|K) - H(S|X,K) + H(X|K,S)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub mi_kx: f64,
    pub h_s_given_k: f64,
    pub h_s_given_xk: f64,
    pub h_x_given_ks: f64,
    pub h_x: f64,
    /// `I(S;X|K)` from `H(S,K) + H(X,K) - H(X,S,K) - H(K)`.
    pub mi_sx_given_k: f64,
    /// `H(X) - (I(K;X) + H(S|K) - H(S|X,K) + H(X|K,S))`.
    pub residual: f64,
    /// `H(X) - (I(K;X) + I(S;X|K) + H(X|K,S))`.
    pub residual_mi_form: f64,
}

pub fn decomposition_terms(t: &SemanticTriple) -> Result<Decomposition> {
    let j = &t.joint;
    let (x, s, k) = (SemanticTriple::X, SemanticTriple::S, SemanticTriple::K);
    let h = |axes: &[usize]| j.entropy_of(axes);
    let h_x = h(&[x])?;
    let h_k = h(&[k])?;
    let h_xk = h(&[x, k])?;
    let h_sk = h(&[s, k])?;
    let h_xsk = h(&[x, s, k])?;
    let mi_kx = h_x + h_k - h_xk;
    let h_s_given_k = h_sk - h_k;
    let h_s_given_xk = h_xsk - h_xk;
    let h_x_given_ks = h_xsk - h_sk;
    let mi_sx_given_k = h_sk + h_xk - h_xsk - h_k;
    Ok(Decomposition {
        mi_kx,
        h_s_given_k,
        h_s_given_xk,
        h_x_given_ks,
        h_x,
        mi_sx_given_k,
        residual: h_x - (mi_kx + h_s_given_k - h_s_given_xk + h_x_given_ks),
        residual_mi_form: h_x - (mi_kx + mi_sx_given_k + h_x_given_ks),
    })
}

/// Semantic compression gain `H(X) / H(S)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum CompressionGain {
    Finite(f64),
    /// `H(S) = 0`: every source realization carries the same meaning.
    Unbounded,
}

impl CompressionGain {
    pub fn value(&self) -> Option<f64> {
        match *self {
            CompressionGain::Finite(g) => Some(g),
            CompressionGain::Unbounded => None,
        }
    }
}

pub fn compression_gain(hx: f64, hs: f64) -> Result<CompressionGain> {
    if !(hx >= 0.0) || !(hs >= 0.0) || !hx.is_finite() || !hs.is_finite() {
        return Err(Error::domain(format!("entropies must be finite and non-negative, got H(X) = {hx}, H(S) = {hs}")));
    }
    if hs == 0.0 {
        return Ok(CompressionGain::Unbounded);
    }
    Ok(CompressionGain::Finite(hx / hs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(prefix: &str, n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn example1_px() -> ProbVector {
        ProbVector::new(labels("x", 3), vec![0.25, 0.5, 0.25]).unwrap()
    }

    fn k1() -> KnowledgeBase {
        KnowledgeBase::new(labels("x", 3), labels("s", 3), vec![vec![1.0 / 3.0; 3]; 3]).unwrap()
    }

    fn k2() -> KnowledgeBase {
        KnowledgeBase::new(
            labels("x", 3),
            labels("s", 2),
            vec![vec![9.0 / 10.0, 1.0 / 10.0], vec![4.0 / 5.0, 1.0 / 5.0], vec![1.0 / 2.0, 1.0 / 2.0]],
        )
        .unwrap()
    }

    #[test]
    fn three_driver_semantic_distribution() {
        let ps = semantic_distribution(&example1_px(), &k2()).unwrap();
        assert!((ps.probs()[0] - 0.75).abs() < 1e-15);
        assert!((ps.probs()[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn three_driver_semantic_entropies() {
        let px = example1_px();
        let h1 = semantic_entropy(&px, &k1()).unwrap();
        let h2 = semantic_entropy(&px, &k2()).unwrap();
        assert!((h1 - 3f64.log2()).abs() < 1e-12);
        assert!((h2 - (2.0 - 0.75 * 3f64.log2())).abs() < 1e-12);
        assert!((h1 - 1.584_963).abs() < 1e-6);
        assert!((h2 - 0.811_278).abs() < 1e-6);
        // three regimes relative to H(X) = 1.5
        let id = KnowledgeBase::identity(labels("x", 3)).unwrap();
        assert!(h1 > 1.5 && h2 < 1.5);
        assert_eq!(semantic_entropy(&px, &id).unwrap(), 1.5);
    }

    #[test]
    fn degenerate_kernels() {
        let px = example1_px();
        let id = KnowledgeBase::identity(labels("x", 3)).unwrap();
        assert_eq!(semantic_distribution(&px, &id).unwrap().probs(), px.probs());
        let collapse = KnowledgeBase::new(labels("x", 3), labels("s", 2), vec![vec![0.0, 1.0]; 3]).unwrap();
        assert_eq!(semantic_distribution(&px, &collapse).unwrap().probs(), &[0.0, 1.0]);
    }

    #[test]
    fn alphabet_mismatch_is_rejected() {
        let px = ProbVector::from_probs(vec![0.5, 0.5]).unwrap();
        assert!(semantic_distribution(&px, &k2()).is_err());
    }

    #[test]
    fn json_errors_name_the_row() {
        let doc = r#"{"source":["a","b"],"semantic":["u","v"],"kernel":[[0.5,0.5],[0.7,0.7]]}"#;
        let err = KnowledgeBase::from_json(doc).unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
        let ok = r#"{"source":["a","b"],"semantic":["u","v"],"kernel":[[0.5,0.5],[0.3,0.7]]}"#;
        assert_eq!(KnowledgeBase::from_json(ok).unwrap().kernel()[1], vec![0.3, 0.7]);
    }

    #[test]
    fn differential_entropy_closed_forms() {
        let one = ProbVector::from_probs(vec![1.0]).unwrap();
        let gauss = ContinuousKernel::with_auto_domain(vec![Density::Gaussian { mean: 0.0, std_dev: 1.0 }]).unwrap();
        let h = differential_semantic_entropy(&one, &gauss, DEFAULT_QUAD_TOL).unwrap();
        let oracle = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).log2();
        assert!((h.value - oracle).abs() < 1e-8, "{} vs {oracle}", h.value);
        assert!((oracle - 2.047_096).abs() < 1e-6);
        assert!(h.error <= DEFAULT_QUAD_TOL);

        let uni = ContinuousKernel::with_auto_domain(vec![Density::Uniform { lo: 0.0, hi: 4.0 }]).unwrap();
        let h = differential_semantic_entropy(&one, &uni, DEFAULT_QUAD_TOL).unwrap();
        assert!((h.value - 2.0).abs() < 1e-8);

        let two = ProbVector::from_probs(vec![0.5, 0.5]).unwrap();
        let pair = ContinuousKernel::with_auto_domain(vec![Density::Gaussian { mean: 0.0, std_dev: 1.0 }; 2]).unwrap();
        let h = differential_semantic_entropy(&two, &pair, DEFAULT_QUAD_TOL).unwrap();
        assert!((h.value - oracle).abs() < 1e-8);
    }

    #[test]
    fn densities_integrate_to_one() {
        for d in [Density::Gaussian { mean: 1.5, std_dev: 0.3 }, Density::Uniform { lo: -1.0, hi: 2.0 }] {
            let (lo, hi) = d.default_span();
            let mut b = Vec::new();
            d.breakpoints(&mut b);
            let r = quadrature::integrate(|s| d.pdf(s), lo, hi, &b, 1e-10, 1000).unwrap();
            assert!((r.value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn narrow_domain_fails_tail_check() {
        let one = ProbVector::from_probs(vec![1.0]).unwrap();
        let k = ContinuousKernel::new(vec![Density::Gaussian { mean: 0.0, std_dev: 1.0 }], (-3.0, 3.0)).unwrap();
        assert!(differential_semantic_entropy(&one, &k, DEFAULT_QUAD_TOL).is_err());
        assert!(ContinuousKernel::new(vec![Density::Gaussian { mean: 0.0, std_dev: 0.0 }], (-3.0, 3.0)).is_err());
        assert!(ContinuousKernel::new(vec![Density::Uniform { lo: 1.0, hi: 1.0 }], (-3.0, 3.0)).is_err());
    }

    #[test]
    fn knowledge_entropy_examples() {
        assert!((knowledge_entropy(&ProbVector::uniform(4).unwrap()) - 2.0).abs() < 1e-15);
        assert_eq!(knowledge_entropy(&ProbVector::point_mass(3, 1).unwrap()), 0.0);
        assert_eq!(knowledge_entropy(&ProbVector::from_probs(vec![0.25, 0.5, 0.25]).unwrap()), 1.5);
    }

    #[test]
    fn decomposition_fixtures() {
        // mutually independent X, S, K
        let px = [0.2, 0.3, 0.5];
        let ps = [0.6, 0.4];
        let pk = [0.1, 0.9];
        let mut t = Vec::new();
        for a in px {
            for b in ps {
                for c in pk {
                    t.push(a * b * c);
                }
            }
        }
        let d = decomposition_terms(&SemanticTriple::new(JointDist::from_table(&[3, 2, 2], t).unwrap()).unwrap()).unwrap();
        let hx = info::entropy_of_masses(&px);
        let hs = info::entropy_of_masses(&ps);
        assert!(d.mi_kx.abs() < 1e-12);
        assert!((d.h_s_given_k - hs).abs() < 1e-12);
        assert!((d.h_s_given_xk - hs).abs() < 1e-12);
        assert!((d.h_x_given_ks - hx).abs() < 1e-12);
        assert!(d.residual.abs() < 1e-10);

        // S = X = K
        let mut t = vec![0.0; 27];
        for (i, p) in px.iter().enumerate() {
            t[i * 9 + i * 3 + i] = *p;
        }
        let d = decomposition_terms(&SemanticTriple::new(JointDist::from_table(&[3, 3, 3], t).unwrap()).unwrap()).unwrap();
        assert!((d.mi_kx - hx).abs() < 1e-12);
        assert!(d.h_s_given_k.abs() < 1e-12 && d.h_s_given_xk.abs() < 1e-12 && d.h_x_given_ks.abs() < 1e-12);
        assert!(d.residual.abs() < 1e-10);
    }

    #[test]
    fn triple_from_json() {
        let doc = r#"{"source":["a","b"],"semantic":["u"],"knowledge":["k1","k2"],
                      "table":[[[0.25,0.25]],[[0.25,0.25]]]}"#;
        let t = SemanticTriple::from_json(doc).unwrap();
        assert_eq!(t.joint().dims(), &[2, 1, 2]);
        assert!(SemanticTriple::new(JointDist::from_table(&[2, 2], vec![0.25; 4]).unwrap()).is_err());
    }

    #[test]
    fn compression_gain_examples() {
        let g = compression_gain(6272.0, 10f64.log2()).unwrap().value().unwrap();
        assert_eq!(g.round(), 1888.0);
        assert_eq!(compression_gain(1.7, 1.7).unwrap(), CompressionGain::Finite(1.0));
        assert_eq!(compression_gain(3.0, 1.5).unwrap(), CompressionGain::Finite(2.0));
        assert_eq!(compression_gain(3.0, 0.0).unwrap(), CompressionGain::Unbounded);
        assert!(compression_gain(-1.0, 1.0).is_err());
    }

    /// Brute-force decomposition from raw cell sums, independent of `JointDist`.
    fn brute_residual(t: &[f64]) -> f64 {
        let h = |f: &dyn Fn(usize, usize, usize) -> usize, n: usize| {
            let mut m = vec![0.0; n];
            for x in 0..3 {
                for s in 0..3 {
                    for k in 0..3 {
                        m[f(x, s, k)] += t[x * 9 + s * 3 + k];
                    }
                }
            }
            m.iter().map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 }).sum::<f64>()
        };
        let hx = h(&|x, _, _| x, 3);
        let hk = h(&|_, _, k| k, 3);
        let hxk = h(&|x, _, k| x * 3 + k, 9);
        let hsk = h(&|_, s, k| s * 3 + k, 9);
        let hxsk = h(&|x, s, k| x * 9 + s * 3 + k, 27);
        hx - ((hx + hk - hxk) + (hsk - hk) - (hxsk - hxk) + (hxsk - hsk))
    }

    #[test]
    fn thousand_random_triples_have_zero_residual() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let w: Vec<f64> = (0..27).map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() }).collect();
            let total: f64 = w.iter().sum();
            let t: Vec<f64> = w.iter().map(|v| v / total).collect();
            assert!(brute_residual(&t).abs() < 1e-10);
            let d = decomposition_terms(&SemanticTriple::new(JointDist::from_table(&[3, 3, 3], t).unwrap()).unwrap()).unwrap();
            assert!(d.residual.abs() < 1e-10);
            assert!(d.residual_mi_form.abs() < 1e-10);
            assert!((d.mi_sx_given_k - (d.h_s_given_k - d.h_s_given_xk)).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn permutation_invariance(w in prop::collection::vec(0.01f64..1.0, 4), rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 4), rot in 0usize..4) {
            let px = ProbVector::normalized(labels("x", 4), w.clone()).unwrap();
            let kernel: Vec<Vec<f64>> = rows.iter().map(|r| { let t: f64 = r.iter().sum(); r.iter().map(|v| v / t).collect() }).collect();
            let kb = KnowledgeBase::new(labels("x", 4), labels("s", 3), kernel.clone()).unwrap();
            let h = semantic_entropy(&px, &kb).unwrap();
            let perm: Vec<usize> = (0..4).map(|i| (i + rot) % 4).collect();
            let px2 = ProbVector::new(labels("p", 4), perm.iter().map(|&i| px.probs()[i]).collect()).unwrap();
            let kb2 = KnowledgeBase::new(labels("p", 4), labels("s", 3), perm.iter().map(|&i| kernel[i].clone()).collect()).unwrap();
            prop_assert!((semantic_entropy(&px2, &kb2).unwrap() - h).abs() < 1e-12);
        }

        #[test]
        fn merging_identical_rows(w in prop::collection::vec(0.01f64..1.0, 3), row in prop::collection::vec(0.01f64..1.0, 3), other in prop::collection::vec(0.01f64..1.0, 3)) {
            let norm = |r: &Vec<f64>| { let t: f64 = r.iter().sum(); r.iter().map(|v| v / t).collect::<Vec<_>>() };
            let (row, other) = (norm(&row), norm(&other));
            let px = ProbVector::normalized(labels("x", 3), w).unwrap();
            // symbols x1 and x2 share a row
            let kb = KnowledgeBase::new(labels("x", 3), labels("s", 3), vec![row.clone(), row.clone(), other.clone()]).unwrap();
            let p = px.probs();
            let merged = ProbVector::from_probs(vec![p[0] + p[1], p[2]]).unwrap();
            let kbm = KnowledgeBase::new(vec!["0".into(), "1".into()], labels("s", 3), vec![row, other]).unwrap();
            let a = semantic_distribution(&px, &kb).unwrap();
            let b = semantic_distribution(&merged, &kbm).unwrap();
            for (u, v) in a.probs().iter().zip(b.probs()) {
                prop_assert!((u - v).abs() < 1e-14);
            }
        }

        #[test]
        fn identity_kb_gives_shannon_entropy(w in prop::collection::vec(0.0f64..1.0, 1..8)) {
            prop_assume!(w.iter().sum::<f64>() > 1e-6);
            let px = ProbVector::normalized(labels("x", w.len()), w).unwrap();
            let kb = KnowledgeBase::identity(labels("x", px.len())).unwrap();
            prop_assert_eq!(semantic_entropy(&px, &kb).unwrap(), entropy(&px));
        }
    }
}
