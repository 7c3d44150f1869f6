//! Reduced words over `X^{±1}`.
//!
//! A [`Letter`] is a nonzero signed generator index: `g` is `x_g` and `-g`
//! its inverse. A [`Word`] is always freely reduced; the reduction pipeline
//! additionally keeps words cyclically reduced.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct Letter(i32);

impl Letter {
    pub fn new(value: i32) -> Result<Self> {
        if value == 0 {
            return Err(Error::InvalidInput("letter 0 is not a generator".into()));
        }
        Ok(Letter(value))
    }

    /// Letter `x_g` for a 1-based generator index.
    pub fn gen(g: u32) -> Self {
        debug_assert!(g > 0);
        Letter(g as i32)
    }

    pub fn value(self) -> i32 {
        self.0
    }

    /// 1-based generator index.
    pub fn generator(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Vertex index in the order `x_1 < x_1^{-1} < x_2 < ...`.
    pub fn vertex(self) -> usize {
        2 * (self.generator() as usize - 1) + usize::from(self.is_inverse())
    }

    pub fn from_vertex(v: usize) -> Self {
        let g = (v / 2 + 1) as i32;
        if v.is_multiple_of(2) {
            Letter(g)
        } else {
            Letter(-g)
        }
    }
}

impl TryFrom<i32> for Letter {
    type Error = Error;
    fn try_from(value: i32) -> Result<Self> {
        Letter::new(value)
    }
}

impl From<Letter> for i32 {
    fn from(l: Letter) -> i32 {
        l.0
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.generator() <= 26 {
            let base = if self.is_inverse() { b'A' } else { b'a' };
            write!(f, "{}", (base + (self.generator() - 1) as u8) as char)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Appends `l` to a freely reduced buffer, cancelling against its tail.
#[inline]
pub(crate) fn push_reduced(buf: &mut Vec<Letter>, l: Letter) {
    if buf.last() == Some(&l.inverse()) {
        buf.pop();
    } else {
        buf.push(l);
    }
}

/// Bounds `[start, end)` of the cyclically reduced core of a freely reduced slice.
#[inline]
pub(crate) fn cyclic_core(letters: &[Letter]) -> (usize, usize) {
    let (mut i, mut j) = (0, letters.len());
    while j - i >= 2 && letters[i] == letters[j - 1].inverse() {
        i += 1;
        j -= 1;
    }
    (i, j)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
    rank: u32,
}

impl Word {
    /// Freely reduces a raw letter sequence.
    pub fn free_reduce(raw: &[i32], rank: u32) -> Result<Word> {
        if rank == 0 {
            return Err(Error::InvalidInput("rank must be positive".into()));
        }
        let mut buf = Vec::with_capacity(raw.len());
        for &v in raw {
            let l = Letter::new(v)?;
            if l.generator() > rank {
                return Err(Error::InvalidInput(format!(
                    "letter {v} is outside the alphabet of rank {rank}"
                )));
            }
            push_reduced(&mut buf, l);
        }
        Ok(Word { letters: buf, rank })
    }

    /// Builds a word from letters that are already known to be freely reduced
    /// and in range.
    pub(crate) fn from_reduced(letters: Vec<Letter>, rank: u32) -> Word {
        debug_assert!(letters.windows(2).all(|p| p[0] != p[1].inverse()));
        debug_assert!(letters.iter().all(|l| l.generator() <= rank));
        Word { letters, rank }
    }

    pub fn empty(rank: u32) -> Word {
        Word { letters: Vec::new(), rank }
    }

    pub fn generator(g: u32, rank: u32) -> Word {
        Word { letters: vec![Letter::gen(g)], rank }
    }

    pub fn cyclic_reduce(&self) -> Word {
        let (i, j) = cyclic_core(&self.letters);
        Word { letters: self.letters[i..j].to_vec(), rank: self.rank }
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.letters.len() < 2 || self.letters[0] != self.letters[self.letters.len() - 1].inverse()
    }

    pub fn invert(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
            rank: self.rank,
        }
    }

    /// Product `self · other`, freely reduced.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: other.rank });
        }
        let mut buf = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut buf, l);
        }
        Ok(Word { letters: buf, rank: self.rank })
    }

    /// Cyclic rotation by `k` positions to the left.
    pub fn rotate(&self, k: usize) -> Word {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            letters.rotate_left(k % self.letters.len());
        }
        Word { letters, rank: self.rank }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn to_ints(&self) -> Vec<i32> {
        self.letters.iter().map(|l| l.0).collect()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// Parses either the compact form (`abA`, rank ≤ 26) or whitespace- or
    /// comma-separated integers (`1 2 -1`). The result is freely reduced.
    pub fn parse(text: &str, rank: u32) -> Result<Word> {
        let text = text.trim();
        let integer_form = text
            .chars()
            .any(|c| c.is_ascii_digit() || c == '-' || c == ',' || c.is_whitespace());
        if integer_form {
            let raw = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<i32>()
                        .map_err(|_| Error::InvalidInput(format!("bad letter {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Word::free_reduce(&raw, rank);
        }
        let raw = text
            .chars()
            .map(|c| match c {
                'a'..='z' => Ok(c as i32 - 'a' as i32 + 1),
                'A'..='Z' => Ok(-(c as i32 - 'A' as i32 + 1)),
                _ => Err(Error::InvalidInput(format!("bad letter {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Word::free_reduce(&raw, rank)
    }

    /// Compact form for rank ≤ 26, integer form otherwise.
    pub fn format(&self) -> String {
        if self.rank <= 26 {
            self.letters.iter().map(|l| l.to_string()).collect()
        } else {
            self.format_ints()
        }
    }

    pub fn format_ints(&self) -> String {
        self.letters.iter().map(|l| l.0.to_string()).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(F{}: {:?})", self.rank, self.format())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("ε")
        } else {
            f.write_str(&self.format())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(raw: &[i32], rank: u32) -> Word {
        Word::free_reduce(raw, rank).unwrap()
    }

    #[test]
    fn free_reduce_examples() {
        assert_eq!(w(&[1, -1, 2], 3).to_ints(), vec![2]);
        assert!(w(&[1, 2, -2, -1], 3).is_empty());
        assert_eq!(w(&[1, 2, 3], 3).to_ints(), vec![1, 2, 3]);
    }

    #[test]
    fn free_reduce_rejects_out_of_alphabet() {
        assert!(matches!(Word::free_reduce(&[1, 4], 3), Err(Error::InvalidInput(_))));
        assert!(Word::free_reduce(&[0], 3).is_err());
        assert!(Word::free_reduce(&[1], 0).is_err());
    }

    #[test]
    fn cyclic_reduce_examples() {
        assert_eq!(w(&[1, 2, -1], 2).cyclic_reduce().to_ints(), vec![2]);
        assert_eq!(w(&[-2, 1, 2], 2).cyclic_reduce().to_ints(), vec![1]);
        assert_eq!(w(&[1, 2, 1], 2).cyclic_reduce().to_ints(), vec![1, 2, 1]);
        assert_eq!(w(&[1, 2, 1, -2, -1], 2).cyclic_reduce().to_ints(), vec![1]);
    }

    #[test]
    fn invert_examples() {
        assert_eq!(w(&[1, 2], 2).invert().to_ints(), vec![-2, -1]);
        assert!(Word::empty(2).invert().is_empty());
        assert_eq!(w(&[3, -1], 3).invert().to_ints(), vec![1, -3]);
    }

    #[test]
    fn codec_round_trip() {
        let x = Word::parse("abA", 2).unwrap();
        assert_eq!(x.to_ints(), vec![1, 2, -1]);
        assert_eq!(x.format(), "abA");
        let y = Word::parse("1 2 -1", 2).unwrap();
        assert_eq!(x, y);
        let big = w(&[27, -30, 1], 30);
        assert_eq!(big.format(), "27 -30 1");
        assert_eq!(Word::parse(&big.format(), 30).unwrap(), big);
        assert!(Word::parse("ab?", 2).is_err());
        assert!(Word::parse("c", 2).is_err());
        assert!(Word::parse("", 2).unwrap().is_empty());
    }

    #[test]
    fn letter_vertex_order() {
        for v in 0..10 {
            assert_eq!(Letter::from_vertex(v).vertex(), v);
        }
        assert_eq!(Letter::gen(1).vertex(), 0);
        assert_eq!(Letter::gen(1).inverse().vertex(), 1);
    }

    fn raw_letters() -> impl Strategy<Value = (Vec<i32>, u32)> {
        (1u32..=5).prop_flat_map(|n| {
            let r = n as i32;
            (
                prop::collection::vec((1..=r, any::<bool>()), 0..60)
                    .prop_map(|v| v.into_iter().map(|(g, s)| if s { g } else { -g }).collect()),
                Just(n),
            )
        })
    }

    proptest! {
        #[test]
        fn free_reduce_is_idempotent((raw, n) in raw_letters()) {
            let once = w(&raw, n);
            let twice = Word::free_reduce(&once.to_ints(), n).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.len() <= raw.len());
            prop_assert_eq!(once.len() % 2, raw.len() % 2);
        }

        #[test]
        fn word_times_inverse_is_trivial((raw, n) in raw_letters()) {
            let x = w(&raw, n);
            prop_assert!(x.concat(&x.invert()).unwrap().is_empty());
            prop_assert_eq!(x.invert().invert(), x.clone());
        }

        #[test]
        fn cyclic_reduce_output_is_cyclically_reduced((raw, n) in raw_letters()) {
            let c = w(&raw, n).cyclic_reduce();
            prop_assert!(c.is_cyclically_reduced());
            if c.len() >= 2 {
                prop_assert_ne!(c.letters()[0], c.letters()[c.len() - 1].inverse());
            }
        }

        #[test]
        fn compact_codec_round_trips((raw, n) in raw_letters()) {
            let x = w(&raw, n);
            prop_assert_eq!(Word::parse(&x.format(), n).unwrap(), x.clone());
            prop_assert_eq!(Word::parse(&x.format_ints(), n).unwrap(), x);
        }
    }
}
