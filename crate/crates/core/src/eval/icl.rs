//! Few-shot prompts in the `x=y` line format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeded::permutation;

pub const DEFAULT_SHOTS: usize = 8;

/// Stands in for `=` on the source side of a line.
pub const EQUALS_SENTINEL: char = '\u{FF1D}';
/// Stands in for a newline anywhere in a line.
pub const NEWLINE_SENTINEL: char = '\u{2028}';

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IclPrompt {
    pub exemplars: Vec<(String, String)>,
    pub query_src: String,
    pub rendered: String,
}

fn escape_src(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            '=' => EQUALS_SENTINEL,
            '\n' => NEWLINE_SENTINEL,
            c => c,
        })
        .collect()
}

fn escape_tgt(s: &str) -> String {
    s.replace('\n', &NEWLINE_SENTINEL.to_string())
}

/// Reverses the escaping. Text that already held a sentinel comes back
/// with `=` or a newline in its place.
fn unescape(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            EQUALS_SENTINEL => '=',
            NEWLINE_SENTINEL => '\n',
            c => c,
        })
        .collect()
}

/// One `x=y` line per exemplar, then `query=`, joined by newlines.
pub fn build_icl_prompt(
    exemplars: &[(String, String)],
    query_src: &str,
    k: usize,
) -> Result<IclPrompt> {
    if exemplars.len() != k {
        return Err(Error::Config(format!(
            "expected {k} exemplars, got {}",
            exemplars.len()
        )));
    }
    let mut lines: Vec<String> = exemplars
        .iter()
        .map(|(x, y)| format!("{}={}", escape_src(x), escape_tgt(y)))
        .collect();
    lines.push(format!("{}=", escape_src(query_src)));
    Ok(IclPrompt {
        exemplars: exemplars.to_vec(),
        query_src: query_src.to_string(),
        rendered: lines.join("\n"),
    })
}

/// Splits a rendered prompt back into exemplars and query.
pub fn parse_icl_prompt(rendered: &str) -> Result<(Vec<(String, String)>, String)> {
    let bad = |m: &str| Error::Data(format!("malformed prompt: {m}"));
    let mut lines: Vec<&str> = rendered.split('\n').collect();
    let query = lines
        .pop()
        .and_then(|l| l.strip_suffix('='))
        .filter(|q| !q.contains('='))
        .ok_or_else(|| bad("last line must be `query=`"))?;
    let exemplars = lines
        .into_iter()
        .map(|l| {
            l.split_once('=')
                .map(|(x, y)| (unescape(x), unescape(y)))
                .ok_or_else(|| bad("exemplar line without `=`"))
        })
        .collect::<Result<_>>()?;
    Ok((exemplars, unescape(query)))
}

/// Indices of `k` exemplars drawn from a pool of `pool_len`. The draw
/// depends only on the seed, so every direction over a multi-way aligned
/// pool sees the same exemplars.
pub fn sample_exemplar_indices(pool_len: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k > pool_len {
        return Err(Error::Config(format!(
            "cannot draw {k} exemplars from {pool_len}"
        )));
    }
    let mut idx = permutation(pool_len, seed, &["icl-exemplars"]);
    idx.truncate(k);
    Ok(idx)
}
