use serde::Serialize;

use super::decode::{DecodeOutcome, Decoder};
use super::simulate::CodedSystem;
use crate::error::{Error, Result};
use crate::info::{entropy_of_masses, plogp};
use crate::par;

/// Enumeration budget: `|Y|^n * message count`.
pub const EXACT_BUDGET: u64 = 10_000_000;

const OUTPUT_CHUNK: usize = 512;

/// Exact error probabilities and information quantities of a coded system under a
/// uniform message prior (all in bits).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactEvaluation {
    pub p_sem: f64,
    pub p_msg: f64,
    /// Probability that the decoder outputs the failure symbol.
    pub p_erasure: f64,
    pub h_w: f64,
    pub h_w_given_y: f64,
    /// `H(W | E, Y^n)` with `E` the semantic error indicator.
    pub h_w_given_ey: f64,
    pub h_y: f64,
    pub h_y_given_w: f64,
    /// `H(Y^n) - H(Y^n | W)`.
    pub mi_w_y: f64,
    /// `H(Y^n) - H(Y^n | X^n)` over the distinct codewords in use.
    pub mi_x_y: f64,
    pub outputs: u64,
}

#[derive(Default)]
struct Acc {
    p_sem: f64,
    p_msg: f64,
    p_erasure: f64,
    h_w_given_y: f64,
    h_w_given_ey: f64,
    h_y: f64,
}

/// Enumerates every output sequence and evaluates the system exactly.
pub fn exact_evaluate(sys: &CodedSystem) -> Result<ExactEvaluation> {
    let n = sys.codebook.blocklength();
    let ny = sys.channel.output_size();
    let messages = sys.partition.message_count();
    let outputs = (ny as u64).checked_pow(n as u32).filter(|&o| o.saturating_mul(messages as u64) <= EXACT_BUDGET);
    let Some(outputs) = outputs else {
        return Err(Error::config(format!(
            "exact evaluation of {ny}^{n} outputs x {messages} messages exceeds the budget {EXACT_BUDGET}"
        )));
    };
    let decoder = Decoder::new(sys.decoder, &sys.channel, &sys.input)?;
    let m = sys.channel.matrix();
    let prior = 1.0 / messages as f64;
    let owner: Vec<usize> = (0..messages).map(|w| sys.codeword_of(w)).collect();

    let chunks = par::map_chunks(outputs as usize, OUTPUT_CHUNK, |range| {
        let mut acc = Acc::default();
        let mut y = vec![0usize; n];
        let mut lik = vec![0.0; sys.codebook.len()];
        let mut joint = vec![0.0; messages];
        for index in range {
            let mut rest = index;
            for s in y.iter_mut().rev() {
                *s = rest % ny;
                rest /= ny;
            }
            for (c, x) in sys.codebook.iter().enumerate() {
                lik[c] = x.iter().zip(&y).map(|(&a, &b)| m[a][b]).product();
            }
            let out = decoder.decode(&y, &sys.codebook);
            let (mut py, mut mass_ok) = (0.0, 0.0);
            for w in 0..messages {
                joint[w] = lik[owner[w]] * prior;
                py += joint[w];
            }
            if py == 0.0 {
                continue;
            }
            acc.h_y += plogp(py);
            if out == DecodeOutcome::Erasure {
                acc.p_erasure += py;
            }
            for (w, &pw) in joint.iter().enumerate() {
                let (sem, msg) = sys.judge(w, out);
                if sem {
                    acc.p_sem += pw;
                } else {
                    mass_ok += pw;
                }
                if msg {
                    acc.p_msg += pw;
                }
            }
            let mass_err = py - mass_ok;
            for (w, &pw) in joint.iter().enumerate() {
                if pw > 0.0 {
                    acc.h_w_given_y -= pw * (pw / py).log2();
                    let part = if sys.judge(w, out).0 { mass_err } else { mass_ok };
                    acc.h_w_given_ey -= pw * (pw / part).log2();
                }
            }
        }
        acc
    });
    let mut t = Acc::default();
    for c in chunks {
        t.p_sem += c.p_sem;
        t.p_msg += c.p_msg;
        t.p_erasure += c.p_erasure;
        t.h_w_given_y += c.h_w_given_y;
        t.h_w_given_ey += c.h_w_given_ey;
        t.h_y += c.h_y;
    }

    // closed forms for the conditional output entropies of a memoryless channel
    let row_entropy: Vec<f64> = m.iter().map(|r| entropy_of_masses(r)).collect();
    let h_y_given_x = |x: &[usize]| -> f64 { x.iter().map(|&a| row_entropy[a]).sum() };
    let h_y_given_w: f64 = owner.iter().map(|&c| prior * h_y_given_x(sys.codebook.codeword(c))).sum();
    let mut distinct: Vec<(&[usize], f64)> = Vec::new();
    for &c in &owner {
        let x = sys.codebook.codeword(c);
        match distinct.iter_mut().find(|(d, _)| *d == x) {
            Some((_, p)) => *p += prior,
            None => distinct.push((x, prior)),
        }
    }
    let h_y_given_xn: f64 = distinct.iter().map(|(x, p)| p * h_y_given_x(x)).sum();
    let h_y = t.h_y;
    Ok(ExactEvaluation {
        p_sem: t.p_sem,
        p_msg: t.p_msg,
        p_erasure: t.p_erasure,
        h_w: (messages as f64).log2(),
        h_w_given_y: t.h_w_given_y,
        h_w_given_ey: t.h_w_given_ey,
        h_y,
        h_y_given_w,
        mi_w_y: h_y - h_y_given_w,
        mi_x_y: h_y - h_y_given_xn,
        outputs,
    })
}
