//! Cross-lingual similarity filtering behind a pluggable embedding provider.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::heuristics::{FilterDecision, FilterReason};
use crate::corpus::SentencePair;
use crate::error::{Error, Result};

/// Source of sentence embeddings.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;

    fn embed(&self, text: &str) -> Result<Vec<f32>>;
}

/// Cosine similarity clamped to [-1, 1]; a zero vector yields 0.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Provider(format!(
            "embedding dimensions differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Drops the pair when the embeddings of its two sides are less similar than
/// `threshold`. Provider failures are returned as errors.
pub fn similarity_filter(
    p: &SentencePair,
    embed: &dyn EmbeddingProvider,
    threshold: f64,
) -> Result<FilterDecision> {
    let a = embed.embed(&p.src_text)?;
    let b = embed.embed(&p.tgt_text)?;
    let cos = cosine(&a, &b)?;
    if cos < threshold {
        Ok(FilterDecision::drop(
            FilterReason::LowSimilarity,
            Some(format!("{cos:?}")),
        ))
    } else {
        Ok(FilterDecision::ok())
    }
}

/// Id of a text in precomputed vector files: first 8 bytes of its SHA-256,
/// hex encoded.
pub fn content_id(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Hashed bag of character trigrams.
///
/// Only for tests and smoke runs: the vectors carry no cross-lingual meaning.
#[derive(Debug, Clone)]
pub struct HashingNgramEmbedder {
    dim: usize,
}

impl HashingNgramEmbedder {
    pub fn new(dim: usize) -> Self {
        HashingNgramEmbedder { dim: dim.max(1) }
    }
}

impl EmbeddingProvider for HashingNgramEmbedder {
    fn name(&self) -> &str {
        "hashing-ngram"
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        let mut v = vec![0f32; self.dim];
        let chars: Vec<char> = text.to_lowercase().chars().collect();
        for w in chars.windows(3.min(chars.len()).max(1)) {
            let mut h = DefaultHasher::new();
            w.hash(&mut h);
            v[(h.finish() % self.dim as u64) as usize] += 1.0;
        }
        Ok(v)
    }
}

#[derive(Serialize, Deserialize)]
struct VectorLine {
    id: String,
    vector: Vec<f32>,
}

/// Precomputed vectors keyed by [`content_id`].
#[derive(Debug, Clone, Default)]
pub struct VectorFileEmbedder {
    name: String,
    vectors: HashMap<String, Vec<f32>>,
}

impl VectorFileEmbedder {
    /// Reads JSONL lines of `{"id": .., "vector": [..]}`.
    pub fn from_reader<R: BufRead>(name: impl Into<String>, reader: R) -> Result<Self> {
        let mut vectors = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<vector file>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let v: VectorLine = serde_json::from_str(&line)
                .map_err(|e| Error::Data(format!("vector file line {}: {e}", i + 1)))?;
            vectors.insert(v.id, v.vector);
        }
        Ok(VectorFileEmbedder {
            name: name.into(),
            vectors,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(path.display().to_string(), BufReader::new(f))
    }

    pub fn insert(&mut self, text: &str, vector: Vec<f32>) {
        self.vectors.insert(content_id(text), vector);
    }
}

impl EmbeddingProvider for VectorFileEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        let id = content_id(text);
        self.vectors
            .get(&id)
            .cloned()
            .ok_or_else(|| Error::Provider(format!("no vector for content id {id}")))
    }
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    text: &'a str,
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
}

/// Talks JSONL to a long-running subprocess: one `{"id", "text"}` request per
/// line on stdin, one `{"id", "vector"}` response per line on stdout.
pub struct SubprocessEmbedder {
    name: String,
    session: Mutex<Session>,
}

impl SubprocessEmbedder {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| {
                Error::Config(format!("cannot start embedding provider `{program}`: {e}"))
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(SubprocessEmbedder {
            name: program.to_string(),
            session: Mutex::new(Session {
                child,
                stdin,
                stdout,
                next_id: 0,
            }),
        })
    }
}

impl EmbeddingProvider for SubprocessEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        let mut s = self
            .session
            .lock()
            .map_err(|_| Error::Provider("session poisoned".into()))?;
        let id = s.next_id;
        s.next_id += 1;
        let mut line = serde_json::to_string(&Request { id, text })?;
        line.push('\n');
        s.stdin
            .write_all(line.as_bytes())
            .and_then(|_| s.stdin.flush())
            .map_err(|e| Error::Provider(format!("write to provider: {e}")))?;
        let mut response = String::new();
        let n = s
            .stdout
            .read_line(&mut response)
            .map_err(|e| Error::Provider(format!("read from provider: {e}")))?;
        if n == 0 {
            return Err(Error::Provider("provider closed its output".into()));
        }
        #[derive(Deserialize)]
        struct Response {
            id: u64,
            vector: Vec<f32>,
        }
        let r: Response = serde_json::from_str(&response)
            .map_err(|e| Error::Provider(format!("bad provider response: {e}")))?;
        if r.id != id {
            return Err(Error::Provider(format!(
                "response id {} does not match request {id}",
                r.id
            )));
        }
        Ok(r.vector)
    }
}

impl Drop for SubprocessEmbedder {
    fn drop(&mut self) {
        if let Ok(s) = self.session.get_mut() {
            let _ = s.child.kill();
            let _ = s.child.wait();
        }
    }
}
