//! Versioned binary checkpoints.
//!
//! Layout: 8 magic bytes, u32 format version, u64 shape header
//! (entities, relations, dim), little-endian f64 matrices, the slack scalar,
//! an optional per-triple slack vector, length-prefixed vocabulary labels,
//! the flat key-value config text, and a trailing FNV-1a checksum over
//! everything before it. A load either returns the complete state or an
//! error; no partial state escapes.

use std::fs;
use std::path::Path;

use crate::data::Vocabulary;
use crate::error::{Error, Result};
use crate::scoring::EmbeddingState;
use crate::train::TrainConfig;

const MAGIC: &[u8; 8] = b"KGEMCKPT";
const VERSION: u32 = 1;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }

    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.buf.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Truncated);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn len_checked(&mut self) -> Result<usize> {
        let n = self.u64()? as usize;
        if self.pos + n > self.buf.len() {
            return Err(Error::Truncated);
        }
        Ok(n)
    }

    fn str(&mut self) -> Result<String> {
        let n = self.len_checked()?;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Data("checkpoint: invalid UTF-8 label".to_owned()))
    }
}

/// Serialize state, vocabulary, and config to `path`.
pub fn save(state: &EmbeddingState, vocab: &Vocabulary, config: &TrainConfig, path: &Path) -> Result<()> {
    if vocab.num_entities() != state.n_entities || vocab.num_relations() != state.n_relations {
        return Err(Error::Data(format!(
            "checkpoint: vocabulary ({} entities, {} relations) does not match state ({}, {})",
            vocab.num_entities(),
            vocab.num_relations(),
            state.n_entities,
            state.n_relations
        )));
    }
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    w.u32(VERSION);
    w.u64(state.n_entities as u64);
    w.u64(state.n_relations as u64);
    w.u64(state.dim as u64);
    w.f64s(&state.entities);
    w.f64s(&state.relations);
    w.f64(state.slack);
    match &state.per_triple_slack {
        Some(slacks) => {
            w.buf.push(1);
            w.u64(slacks.len() as u64);
            w.f64s(slacks);
        }
        None => w.buf.push(0),
    }
    for label in vocab.entity_labels() {
        w.str(label);
    }
    for label in vocab.relation_labels() {
        w.str(label);
    }
    w.str(&config.to_kv());
    let checksum = fnv1a64(&w.buf);
    let mut buf = w.buf;
    buf.extend_from_slice(&checksum.to_le_bytes());
    fs::write(path, &buf).map_err(|e| Error::io(path, e))
}

/// Load a checkpoint written by [`save`]. Verifies magic bytes, version, and
/// checksum before parsing.
pub fn load(path: &Path) -> Result<(EmbeddingState, Vocabulary, TrainConfig)> {
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    if buf.len() < MAGIC.len() || &buf[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic);
    }
    if buf.len() < MAGIC.len() + 4 + 8 {
        return Err(Error::Truncated);
    }
    let (body, tail) = buf.split_at(buf.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    if fnv1a64(body) != stored {
        return Err(Error::ChecksumMismatch);
    }
    let mut r = Reader { buf: body, pos: MAGIC.len() };
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let n_entities = r.u64()? as usize;
    let n_relations = r.u64()? as usize;
    let dim = r.u64()? as usize;
    let entities = r.f64s(n_entities.checked_mul(dim).ok_or(Error::Truncated)?)?;
    let relations = r.f64s(n_relations.checked_mul(dim).ok_or(Error::Truncated)?)?;
    let slack = r.f64()?;
    let per_triple_slack = match r.take(1)?[0] {
        0 => None,
        1 => {
            let n = r.u64()? as usize;
            Some(r.f64s(n)?)
        }
        other => return Err(Error::Data(format!("checkpoint: bad slack-vector flag {other}"))),
    };
    let mut entity_labels = Vec::with_capacity(n_entities);
    for _ in 0..n_entities {
        entity_labels.push(r.str()?);
    }
    let mut relation_labels = Vec::with_capacity(n_relations);
    for _ in 0..n_relations {
        relation_labels.push(r.str()?);
    }
    let vocab = Vocabulary::from_labels(entity_labels, relation_labels)?;
    let config = TrainConfig::from_kv(&r.str()?)?;
    let state = EmbeddingState {
        entities,
        relations,
        n_entities,
        n_relations,
        dim,
        slack,
        per_triple_slack,
    };
    Ok((state, vocab, config))
}
