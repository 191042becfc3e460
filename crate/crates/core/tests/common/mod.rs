//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force corpus BLEU: n-grams listed as vectors and counted by linear
/// scan, exp smoothing applied by hand. Orders with no hypothesis n-grams
/// drop out of the mean.
pub fn oracle_bleu(hyps: &[Vec<u32>], refs: &[Vec<u32>], smooth: bool) -> f64 {
    const N: usize = 4;
    let mut matches = [0u64; N];
    let mut totals = [0u64; N];
    let (mut c, mut r) = (0usize, 0usize);
    for (h, rf) in hyps.iter().zip(refs) {
        c += h.len();
        r += rf.len();
        for n in 1..=N {
            let hg: Vec<&[u32]> = (0..(h.len() + 1).saturating_sub(n))
                .map(|i| &h[i..i + n])
                .collect();
            let rg: Vec<&[u32]> = (0..(rf.len() + 1).saturating_sub(n))
                .map(|i| &rf[i..i + n])
                .collect();
            totals[n - 1] += hg.len() as u64;
            let mut done: Vec<&[u32]> = Vec::new();
            for g in &hg {
                if done.contains(g) {
                    continue;
                }
                done.push(g);
                let in_h = hg.iter().filter(|x| *x == g).count() as u64;
                let in_r = rg.iter().filter(|x| *x == g).count() as u64;
                matches[n - 1] += in_h.min(in_r);
            }
        }
    }
    if c == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut k = 1.0;
    let mut used = 0;
    for n in 0..N {
        if totals[n] == 0 {
            break;
        }
        used += 1;
        let p = if matches[n] > 0 {
            matches[n] as f64 / totals[n] as f64
        } else if smooth {
            k *= 2.0;
            1.0 / (k * totals[n] as f64)
        } else {
            return 0.0;
        };
        log_sum += p.ln();
    }
    let bp = if c < r {
        (1.0 - r as f64 / c as f64).exp()
    } else {
        1.0
    };
    100.0 * bp * (log_sum / used as f64).exp()
}

/// Up to 5 segments of up to 12 tokens drawn from a small alphabet, with
/// references derived by mutating the hypothesis so matches are common.
pub fn random_corpus(rng: &mut ChaCha8Rng) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let segs = rng.gen_range(1..=5);
    let alphabet = rng.gen_range(2..8);
    let mut hyps = Vec::new();
    let mut refs = Vec::new();
    for _ in 0..segs {
        let h: Vec<u32> = (0..rng.gen_range(0..=12))
            .map(|_| rng.gen_range(0..alphabet))
            .collect();
        let mut rf: Vec<u32> = h
            .iter()
            .map(|&t| {
                if rng.gen_bool(0.3) {
                    rng.gen_range(0..alphabet)
                } else {
                    t
                }
            })
            .collect();
        rf.truncate(rng.gen_range(0..=12).max(1));
        while rf.len() < rng.gen_range(1..=12) {
            rf.push(rng.gen_range(0..alphabet));
        }
        hyps.push(h);
        refs.push(rf);
    }
    (hyps, refs)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
