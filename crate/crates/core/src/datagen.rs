//! Seeded corpus generation. Sample `i` of a corpus draws from its own
//! ChaCha stream `(seed, i)`, so corpora are identical whether generated
//! sequentially or in parallel.

use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automorphism::AutoId;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::word::{cyclic_core, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusKind {
    Random,
    Primitive,
    C1,
}

impl std::str::FromStr for CorpusKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(CorpusKind::Random),
            "primitive" => Ok(CorpusKind::Primitive),
            "c1" => Ok(CorpusKind::C1),
            _ => Err(Error::InvalidInput(format!("unknown corpus kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub rank: u32,
    /// Cyclic length range of random words, of the minimal pre-image for
    /// complexity-1 words, and of the output for primitives.
    pub length_min: usize,
    pub length_max: usize,
    pub seed: u64,
    /// Range of the number of random `W(X)` elements applied to a generator.
    pub chain_min: usize,
    pub chain_max: usize,
    pub attempts: usize,
}

impl GenConfig {
    pub fn new(rank: u32, length_min: usize, length_max: usize, seed: u64) -> Self {
        GenConfig { rank, length_min, length_max, seed, chain_min: 0, chain_max: 0, attempts: 10_000 }
    }

    pub fn with_chain(mut self, min: usize, max: usize) -> Self {
        self.chain_min = min;
        self.chain_max = max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidInput("rank must be positive".into()));
        }
        if self.length_min < 1 || self.length_min > self.length_max {
            return Err(Error::InvalidInput(format!(
                "length range [{}, {}] is empty",
                self.length_min, self.length_max
            )));
        }
        if self.chain_min > self.chain_max {
            return Err(Error::InvalidInput(format!(
                "chain range [{}, {}] is empty",
                self.chain_min, self.chain_max
            )));
        }
        if self.attempts == 0 {
            return Err(Error::InvalidInput("attempts must be positive".into()));
        }
        Ok(())
    }

    /// Generator for sample `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

fn random_letter(rank: u32, rng: &mut impl Rng) -> Letter {
    let g = rng.gen_range(1..=rank) as i32;
    Letter::new(if rng.gen::<bool>() { g } else { -g }).unwrap()
}

/// Non-backtracking random walk of a length drawn from the configured range,
/// cyclically reduced; redrawn until the cyclic length is in range.
pub fn random_reduced_word(cfg: &GenConfig, rng: &mut impl Rng) -> Result<Word> {
    cfg.validate()?;
    for _ in 0..cfg.attempts {
        let len = rng.gen_range(cfg.length_min..=cfg.length_max);
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        for _ in 0..len {
            let next = loop {
                let l = random_letter(cfg.rank, rng);
                if letters.last() != Some(&l.inverse()) {
                    break l;
                }
            };
            letters.push(next);
        }
        let (i, j) = cyclic_core(&letters);
        if (cfg.length_min..=cfg.length_max).contains(&(j - i)) {
            return Ok(Word::from_reduced(letters[i..j].to_vec(), cfg.rank));
        }
    }
    Err(Error::AttemptsExhausted(cfg.attempts))
}

/// Chains whose intermediate words outgrow `GROWTH_CAP * length_max` are rejected early.
const GROWTH_CAP: usize = 64;

/// Image of a random generator under a chain of uniformly drawn `W(X)`
/// elements; redrawn until its length is in range. Returns the chain length.
pub fn random_primitive(engine: &Engine, cfg: &GenConfig, rng: &mut impl Rng) -> Result<(Word, usize)> {
    cfg.validate()?;
    check_engine(engine, cfg)?;
    let catalog = engine.catalog();
    for _ in 0..cfg.attempts {
        let g = rng.gen_range(1..=cfg.rank);
        let chain = rng.gen_range(cfg.chain_min..=cfg.chain_max);
        let mut w = Word::generator(g, cfg.rank);
        for _ in 0..chain {
            if catalog.is_empty() {
                break;
            }
            let id = AutoId(rng.gen_range(0..catalog.len()) as u32);
            w = catalog.substitution(id).apply(&w);
            if w.len() > GROWTH_CAP * cfg.length_max {
                break;
            }
        }
        if (cfg.length_min..=cfg.length_max).contains(&w.len()) {
            return Ok((w, chain));
        }
    }
    Err(Error::AttemptsExhausted(cfg.attempts))
}

/// A non-minimal word of Whitehead complexity 1: a certified-minimal random
/// word pushed up by one length-increasing `W(X)` element. Returns the word
/// and the length of its minimal pre-image.
pub fn random_nonminimal_c1(engine: &Engine, cfg: &GenConfig, rng: &mut impl Rng) -> Result<(Word, usize)> {
    cfg.validate()?;
    check_engine(engine, cfg)?;
    let catalog = engine.catalog();
    if catalog.is_empty() {
        return Err(Error::InvalidInput("rank 1 has no non-minimal words".into()));
    }
    let mut buf = Vec::new();
    for _ in 0..cfg.attempts {
        let w = random_reduced_word(cfg, rng)?;
        if !engine.is_minimal(&w)? {
            continue;
        }
        // rejection-sample a length-increasing automorphism
        for _ in 0..cfg.attempts.min(64 * catalog.len()) {
            let id = AutoId(rng.gen_range(0..catalog.len()) as u32);
            let subst = catalog.substitution(id);
            if subst.image_len(w.letters(), &mut buf) > w.len() {
                let v = subst.apply(&w);
                let back = catalog
                    .id_of(&catalog.get(id).inverse())
                    .expect("W(X) is closed under inversion");
                if catalog.substitution(back).image_len(v.letters(), &mut buf) != w.len() {
                    return Err(Error::InvalidInput(format!(
                        "inverse of {} failed to recover the pre-image",
                        catalog.get(id)
                    )));
                }
                return Ok((v, w.len()));
            }
        }
    }
    Err(Error::AttemptsExhausted(cfg.attempts))
}

fn check_engine(engine: &Engine, cfg: &GenConfig) -> Result<()> {
    if engine.rank() != cfg.rank {
        return Err(Error::RankMismatch { expected: cfg.rank, found: engine.rank() });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryMeta {
    pub kind: CorpusKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<usize>,
}

/// One line of a corpus file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: usize,
    pub rank: u32,
    pub word: Vec<i32>,
    pub meta: EntryMeta,
}

impl CorpusEntry {
    pub fn to_word(&self) -> Result<Word> {
        Word::free_reduce(&self.word, self.rank)
    }
}

/// First line of a corpus file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusHeader {
    pub kind: CorpusKind,
    pub count: usize,
    pub config: GenConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub header: Option<CorpusHeader>,
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn words(&self) -> Result<Vec<Word>> {
        self.entries.iter().map(CorpusEntry::to_word).collect()
    }

    pub fn rank(&self) -> Result<u32> {
        let rank = self
            .entries
            .first()
            .map(|e| e.rank)
            .or(self.header.as_ref().map(|h| h.config.rank))
            .ok_or(Error::Empty("corpus"))?;
        if let Some(e) = self.entries.iter().find(|e| e.rank != rank) {
            return Err(Error::RankMismatch { expected: rank, found: e.rank });
        }
        Ok(rank)
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        if let Some(h) = &self.header {
            serde_json::to_writer(&mut out, &serde_json::json!({ "header": h }))?;
            out.write_all(b"\n")?;
        }
        for e in &self.entries {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(input: impl BufRead) -> Result<Corpus> {
        let mut header = None;
        let mut entries = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidInput(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |e: serde_json::Error| Error::InvalidInput(format!("corpus line {}: {e}", n + 1));
            let value: serde_json::Value = serde_json::from_str(&line).map_err(bad)?;
            if let Some(h) = value.get("header") {
                header = Some(serde_json::from_value(h.clone()).map_err(bad)?);
            } else {
                let e: CorpusEntry = serde_json::from_value(value).map_err(bad)?;
                e.to_word()?;
                entries.push(e);
            }
        }
        Ok(Corpus { header, entries })
    }
}

/// Generates `count` samples of `kind`; identical for any [`Exec`].
pub fn generate_corpus(cfg: &GenConfig, kind: CorpusKind, count: usize, exec: Exec) -> Result<Corpus> {
    cfg.validate()?;
    let engine = match kind {
        CorpusKind::Random => None,
        _ => Some(Engine::new(cfg.rank)),
    };
    let entries = par::map_range(exec, count, |i| -> Result<CorpusEntry> {
        let mut rng = cfg.rng(i as u64);
        let (word, meta) = match kind {
            CorpusKind::Random => {
                let w = random_reduced_word(cfg, &mut rng)?;
                (w, EntryMeta { kind, source_len: None, chain: None })
            }
            CorpusKind::Primitive => {
                let (w, chain) = random_primitive(engine.as_ref().unwrap(), cfg, &mut rng)?;
                (w, EntryMeta { kind, source_len: Some(1), chain: Some(chain) })
            }
            CorpusKind::C1 => {
                let (w, src) = random_nonminimal_c1(engine.as_ref().unwrap(), cfg, &mut rng)?;
                (w, EntryMeta { kind, source_len: Some(src), chain: None })
            }
        };
        Ok(CorpusEntry { id: i, rank: cfg.rank, word: word.to_ints(), meta })
    });
    Ok(Corpus {
        header: Some(CorpusHeader { kind, count, config: cfg.clone(), manifest: None }),
        entries: entries.into_iter().collect::<Result<_>>()?,
    })
}

/// Min / mean / max word length, in the layout of the corpus statistics tables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub size: usize,
    pub min: usize,
    pub avg: f64,
    pub max: usize,
}

pub fn length_stats(words: &[Word]) -> Option<LengthStats> {
    let lens: Vec<usize> = words.iter().map(Word::len).collect();
    Some(LengthStats {
        size: lens.len(),
        min: *lens.iter().min()?,
        avg: lens.iter().sum::<usize>() as f64 / lens.len() as f64,
        max: *lens.iter().max()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_word() {
        let cfg = GenConfig::new(3, 10, 40, 5);
        let a = random_reduced_word(&cfg, &mut cfg.rng(0)).unwrap();
        let b = random_reduced_word(&cfg, &mut cfg.rng(0)).unwrap();
        assert_eq!(a, b);
        let c = random_reduced_word(&cfg, &mut cfg.rng(1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_words_are_cyclically_reduced_and_in_range() {
        let cfg = GenConfig::new(4, 5, 30, 11);
        let mut rng = cfg.rng(0);
        for _ in 0..500 {
            let w = random_reduced_word(&cfg, &mut rng).unwrap();
            assert!(w.is_cyclically_reduced());
            assert!((5..=30).contains(&w.len()));
        }
    }

    #[test]
    fn letter_frequencies_are_uniform() {
        // chi-square over the 2n letters, 10^5 letters at rank 3
        let cfg = GenConfig::new(3, 100, 100, 2024);
        let mut rng = cfg.rng(0);
        let mut counts = [0f64; 6];
        let mut total = 0.0;
        while total < 1e5 {
            for l in random_reduced_word(&cfg, &mut rng).unwrap().letters() {
                counts[l.vertex()] += 1.0;
                total += 1.0;
            }
        }
        let expected = total / 6.0;
        let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        // 5 degrees of freedom; mean 5, sd √10
        assert!(chi2 < 5.0 + 3.0 * 10f64.sqrt(), "chi2 = {chi2}");
    }

    #[test]
    fn invalid_ranges() {
        let cfg = GenConfig::new(3, 10, 5, 0);
        assert!(random_reduced_word(&cfg, &mut cfg.rng(0)).is_err());
        let cfg = GenConfig::new(3, 0, 5, 0);
        assert!(cfg.validate().is_err());
        let cfg = GenConfig::new(3, 1, 5, 0).with_chain(4, 2);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn chain_zero_gives_a_generator() {
        let e = Engine::new(3);
        let cfg = GenConfig::new(3, 1, 1, 0);
        let (w, chain) = random_primitive(&e, &cfg, &mut cfg.rng(0)).unwrap();
        assert_eq!(chain, 0);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn primitives_reduce_to_a_generator() {
        let e = Engine::new(3);
        let cfg = GenConfig::new(3, 1, 200, 3).with_chain(1, 8);
        let corpus = generate_corpus(&cfg, CorpusKind::Primitive, 1000, Exec::default()).unwrap();
        for w in corpus.words().unwrap() {
            let red = e.whitehead_reduce(&w, &crate::engine::Strategy::NielsenFirst).unwrap();
            assert_eq!(red.word.len(), 1, "{w}");
        }
    }

    #[test]
    fn c1_words_are_one_step_from_minimal() {
        let e = Engine::new(3);
        let cfg = GenConfig::new(3, 5, 40, 8);
        let mut rng = cfg.rng(0);
        for _ in 0..200 {
            let (v, src) = random_nonminimal_c1(&e, &cfg, &mut rng).unwrap();
            assert!(v.len() > src);
            assert!(!e.is_minimal(&v).unwrap());
            let mut buf = Vec::new();
            let one_step = e
                .catalog()
                .ids()
                .any(|id| e.catalog().substitution(id).image_len(v.letters(), &mut buf) == src);
            assert!(one_step);
        }
    }

    #[test]
    fn corpus_is_exec_independent_and_round_trips() {
        let cfg = GenConfig::new(3, 5, 20, 42);
        let seq = generate_corpus(&cfg, CorpusKind::C1, 50, Exec::Sequential).unwrap();
        let par = generate_corpus(&cfg, CorpusKind::C1, 50, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
        let mut bytes = Vec::new();
        seq.write_jsonl(&mut bytes).unwrap();
        let mut again = Vec::new();
        par.write_jsonl(&mut again).unwrap();
        assert_eq!(bytes, again);
        let back = Corpus::read_jsonl(&bytes[..]).unwrap();
        assert_eq!(back, seq);
        let first = String::from_utf8(bytes).unwrap().lines().nth(1).unwrap().to_string();
        let v: serde_json::Value = serde_json::from_str(&first).unwrap();
        assert_eq!(v["meta"]["kind"], "c1");
        assert!(v["word"].is_array());
    }

    #[test]
    fn corpus_rejects_bad_lines() {
        assert!(Corpus::read_jsonl(&b"{\"id\":0,\"rank\":2,\"word\":[3],\"meta\":{\"kind\":\"random\"}}\n"[..]).is_err());
        assert!(Corpus::read_jsonl(&b"not json\n"[..]).is_err());
    }

    #[test]
    fn length_statistics() {
        let ws = vec![Word::parse("ab", 2).unwrap(), Word::parse("abab", 2).unwrap()];
        let s = length_stats(&ws).unwrap();
        assert_eq!((s.size, s.min, s.avg, s.max), (2, 2, 3.0, 4));
        assert!(length_stats(&[]).is_none());
    }
}
