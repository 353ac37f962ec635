//! Exact sampling from the random-coding ensemble without materializing the codebook.
//!
//! With a fresh i.i.d. codebook per trial, the competitors of the transmitted codeword are
//! independent of each other and of the received word `y`. Given `y`, each competitor's
//! decoding statistic depends only on the joint type it forms with `y`, so the chance that
//! a single competitor beats (or ties) the transmitted codeword can be computed exactly
//! from the type of `y`. With `M - 1` competitors the decoding error probability of the
//! trial is `1 - (1 - q)^(M - 1)`, and the trial outcome is a Bernoulli draw with that
//! probability. This reproduces the law of the explicit simulation for any `M`,
//! including codebooks far too large to store.

use std::collections::BTreeMap;

use rand::Rng;

use super::decode::{DecoderKind, LogLikTable};
use crate::capacity::Dmc;
use crate::channels::{ChannelRng, ChannelSampler, StreamTag};
use crate::error::{Error, Result};
use crate::info::{cumulative, sample_index, ProbVector, TypicalityTest};
use crate::par;

/// Largest number of distinct scores kept for one received type.
pub const MAX_ATOMS: usize = 4_000_000;
/// Largest number of joint types enumerated for one received type (typicality).
pub const MAX_JOINT_TYPES: u64 = 50_000_000;

#[derive(Debug, Clone, Copy)]
enum Own {
    Score(i64),
    Typical(bool),
}

#[derive(Debug, Clone)]
struct Draw {
    y_type: Vec<u32>,
    own: Own,
    u_sem: f64,
    u_msg: f64,
}

/// Competitor statistics for one received type.
#[derive(Debug, Clone)]
enum Tail {
    /// Sorted scores with `tail[i] = P(score >= scores[i])`; impossible competitors omitted.
    Scores { scores: Vec<i64>, tail: Vec<f64> },
    /// Probability that a competitor is jointly typical with `y`.
    Typical(f64),
}

impl Tail {
    fn at_least(&self, s: i64) -> f64 {
        match self {
            Tail::Scores { scores, tail } => tail.get(scores.partition_point(|&v| v < s)).copied().unwrap_or(0.0),
            Tail::Typical(q) => *q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct EnsembleCounts {
    pub semantic_errors: u64,
    pub message_errors: u64,
    pub distinct_types: usize,
}

pub(crate) struct EnsembleJob<'a> {
    pub channel: &'a Dmc,
    pub input: &'a ProbVector,
    pub decoder: DecoderKind,
    pub n: usize,
    pub semantic_bits: u32,
    pub class_bits: u32,
    pub trials: u64,
    pub seed: u64,
    pub group: u16,
}

fn convolve(a: &[(i64, f64)], b: &[(i64, f64)]) -> Result<Vec<(i64, f64)>> {
    if (a.len() as u64) * (b.len() as u64) > 64 * MAX_ATOMS as u64 {
        return Err(Error::config(format!(
            "score convolution of {} x {} atoms exceeds the ensemble budget",
            a.len(),
            b.len()
        )));
    }
    let mut out: BTreeMap<i64, f64> = BTreeMap::new();
    for &(sa, pa) in a {
        for &(sb, pb) in b {
            *out.entry(sa + sb).or_insert(0.0) += pa * pb;
        }
    }
    if out.len() > MAX_ATOMS {
        return Err(Error::config(format!("{} distinct scores exceed the ensemble budget {MAX_ATOMS}", out.len())));
    }
    Ok(out.into_iter().collect())
}

/// Score distribution of `count` i.i.d. competitor symbols facing output symbol `b`.
fn group_scores(table: &LogLikTable, px: &[f64], b: usize, count: u32) -> Result<Vec<(i64, f64)>> {
    let step: Vec<(i64, f64)> = {
        let mut m: BTreeMap<i64, f64> = BTreeMap::new();
        for (x, &p) in px.iter().enumerate() {
            if let (true, Some(v)) = (p > 0.0, table.get(x, b)) {
                *m.entry(v).or_insert(0.0) += p;
            }
        }
        m.into_iter().collect()
    };
    let mut acc = vec![(0i64, 1.0)];
    for _ in 0..count {
        acc = convolve(&acc, &step)?;
    }
    Ok(acc)
}

fn ml_tail(table: &LogLikTable, px: &[f64], y_type: &[u32]) -> Result<Tail> {
    let mut acc = vec![(0i64, 1.0)];
    for (b, &c) in y_type.iter().enumerate() {
        if c > 0 {
            acc = convolve(&acc, &group_scores(table, px, b, c)?)?;
        }
    }
    let scores: Vec<i64> = acc.iter().map(|a| a.0).collect();
    let mut tail = vec![0.0; acc.len()];
    let mut run = 0.0;
    for i in (0..acc.len()).rev() {
        run += acc[i].1;
        tail[i] = run.min(1.0);
    }
    Ok(Tail::Scores { scores, tail })
}

/// All `counts` vectors of length `k` summing to `total`, with their multinomial log
/// probabilities under `px` (zero-probability compositions are skipped).
fn compositions(total: u32, px: &[f64], ln_fact: &[f64]) -> Vec<(Vec<u32>, f64)> {
    fn rec(i: usize, left: u32, px: &[f64], ln_fact: &[f64], cur: &mut Vec<u32>, lp: f64, out: &mut Vec<(Vec<u32>, f64)>) {
        if i + 1 == px.len() {
            if left > 0 && px[i] == 0.0 {
                return;
            }
            let term = if left > 0 { left as f64 * px[i].ln() } else { 0.0 };
            cur.push(left);
            out.push((cur.clone(), lp + term - ln_fact[left as usize]));
            cur.pop();
            return;
        }
        for c in 0..=left {
            if c > 0 && px[i] == 0.0 {
                break;
            }
            let term = if c > 0 { c as f64 * px[i].ln() } else { 0.0 };
            cur.push(c);
            rec(i + 1, left - c, px, ln_fact, cur, lp + term - ln_fact[c as usize], out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, total, px, ln_fact, &mut Vec::with_capacity(px.len()), ln_fact[total as usize], &mut out);
    out
}

/// Output symbol and the input compositions of its count.
type Group = (usize, Vec<(Vec<u32>, f64)>);

fn typical_tail(test: &TypicalityTest, px: &[f64], y_type: &[u32], n: usize, ln_fact: &[f64]) -> Result<Tail> {
    let (nx, ny) = (px.len(), y_type.len());
    let groups: Vec<Group> = y_type
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(b, &c)| (b, compositions(c, px, ln_fact)))
        .collect();
    let combos = groups.iter().try_fold(1u64, |acc, g| acc.checked_mul(g.1.len() as u64));
    if combos.is_none_or(|c| c > MAX_JOINT_TYPES) {
        return Err(Error::config(format!(
            "typicality ensemble needs more than {MAX_JOINT_TYPES} joint types per received type; use the ML decoder or a smaller n"
        )));
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        g: usize,
        groups: &[Group],
        counts: &mut [u32],
        lp: f64,
        nx: usize,
        ny: usize,
        n: usize,
        test: &TypicalityTest,
    ) -> f64 {
        if g == groups.len() {
            return if test.is_typical_counts(counts, n) { lp.exp() } else { 0.0 };
        }
        let (b, ref comps) = groups[g];
        let mut sum = 0.0;
        for (c, l) in comps {
            for x in 0..nx {
                counts[x * ny + b] = c[x];
            }
            sum += rec(g + 1, groups, counts, lp + l, nx, ny, n, test);
        }
        for x in 0..nx {
            counts[x * ny + b] = 0;
        }
        sum
    }
    let mut counts = vec![0u32; nx * ny];
    Ok(Tail::Typical(rec(0, &groups, &mut counts, 0.0, nx, ny, n, test).min(1.0)))
}

enum Stat {
    Ml(LogLikTable),
    Typ(TypicalityTest),
}

pub(crate) fn run(job: &EnsembleJob<'_>) -> Result<EnsembleCounts> {
    let ch = job.channel;
    let px = job.input.probs();
    let stat = match job.decoder {
        DecoderKind::Ml => Stat::Ml(LogLikTable::new(ch)),
        DecoderKind::Typicality { eps } => Stat::Typ(TypicalityTest::new(&ch.joint(job.input)?, eps)?),
    };
    let cum = cumulative(px);
    let sampler = ChannelSampler::new(ch);
    let (n, ny) = (job.n, ch.output_size());

    let draws: Vec<Draw> = par::map_indexed(job.trials as usize, |t| {
        let mut rng = ChannelRng::for_item(job.seed, StreamTag::Trial, job.group, t as u32);
        let x: Vec<usize> = (0..n).map(|_| sample_index(px, &cum, rng.random())).collect();
        let mut y = Vec::with_capacity(n);
        sampler.transmit_into(&x, &mut rng, &mut y);
        let mut y_type = vec![0u32; ny];
        for &b in &y {
            y_type[b] += 1;
        }
        let own = match &stat {
            Stat::Ml(t) => Own::Score(t.score(&x, &y).expect("the sent codeword explains its own output")),
            Stat::Typ(t) => Own::Typical(t.is_typical(&x, &y)),
        };
        Draw { y_type, own, u_sem: rng.random(), u_msg: rng.random() }
    });

    let mut index: BTreeMap<&[u32], usize> = BTreeMap::new();
    for d in &draws {
        let next = index.len();
        index.entry(&d.y_type).or_insert(next);
    }
    let mut types: Vec<&[u32]> = vec![&[]; index.len()];
    for (&k, &i) in &index {
        types[i] = k;
    }
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    let tails: Vec<Tail> = par::map_indexed(types.len(), |i| match &stat {
        Stat::Ml(t) => ml_tail(t, px, types[i]),
        Stat::Typ(t) => typical_tail(t, px, types[i], n, &ln_fact),
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let competitors = 2f64.powi(job.semantic_bits as i32) - 1.0;
    let representative = 0.5f64.powi(job.class_bits as i32);
    let mut counts = EnsembleCounts { semantic_errors: 0, message_errors: 0, distinct_types: types.len() };
    for d in &draws {
        let tail = &tails[index[d.y_type.as_slice()]];
        let p_ok = match d.own {
            Own::Typical(false) => 0.0,
            _ if competitors == 0.0 => 1.0,
            Own::Score(s) => survive(tail.at_least(s), competitors),
            Own::Typical(true) => survive(tail.at_least(i64::MIN), competitors),
        };
        let sem = d.u_sem >= p_ok;
        let msg = sem || d.u_msg >= representative;
        counts.semantic_errors += sem as u64;
        counts.message_errors += msg as u64;
    }
    Ok(counts)
}

/// `(1 - q)^m` for possibly astronomically large `m`.
fn survive(q: f64, m: f64) -> f64 {
    if q >= 1.0 {
        0.0
    } else {
        (m * (-q).ln_1p()).exp()
    }
}
