//! Nielsen automorphisms `N(X)` and type-II Whitehead automorphisms `W(X)`.
//!
//! Every automorphism handled here maps each generator `x_g` to
//! `p · x_g · q` with `p, q` either empty or a single letter, so all of them
//! share one [`Substitution`] representation for application.
//!
//! A [`Catalog`] fixes the canonical numbering used by strategies, traces and
//! model files: ids `0..|N(X)|` are the Nielsen automorphisms in canonical
//! order, followed by the remaining elements of `W(X)` in canonical Whitehead
//! order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{cyclic_core, push_reduced, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

/// `x_target → x_target · mult` (right) or `x_target → mult · x_target` (left).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NielsenAuto {
    pub target: u32,
    pub side: Side,
    pub mult: Letter,
}

impl NielsenAuto {
    pub fn inverse(&self) -> NielsenAuto {
        NielsenAuto { mult: self.mult.inverse(), ..*self }
    }
}

impl fmt::Display for NielsenAuto {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = Letter::gen(self.target);
        match self.side {
            Side::Right => write!(f, "{x}->{x}{}", self.mult),
            Side::Left => write!(f, "{x}->{}{x}", self.mult),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Fix,
    /// `x → x a`
    Right,
    /// `x → a⁻¹ x`
    Left,
    /// `x → a⁻¹ x a`
    Conj,
}

impl Action {
    const ALL: [Action; 4] = [Action::Fix, Action::Right, Action::Left, Action::Conj];
}

/// Type-II Whitehead automorphism with multiplier `a`. The action table holds
/// every generator except `|a|`, which is fixed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WhiteheadAuto {
    pub a: Letter,
    #[serde(with = "action_table")]
    pub actions: BTreeMap<u32, Action>,
}

/// JSON object keys are strings; parse them back into generator indices.
mod action_table {
    use std::collections::BTreeMap;

    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use super::Action;

    pub fn serialize<S: Serializer>(t: &BTreeMap<u32, Action>, s: S) -> Result<S::Ok, S::Error> {
        t.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, Action>, D::Error> {
        BTreeMap::<String, Action>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.parse::<u32>()
                    .map(|g| (g, v))
                    .map_err(|_| D::Error::custom(format!("bad generator key {k:?}")))
            })
            .collect()
    }
}

impl WhiteheadAuto {
    pub fn inverse(&self) -> WhiteheadAuto {
        WhiteheadAuto { a: self.a.inverse(), actions: self.actions.clone() }
    }

    fn is_trivial(&self) -> bool {
        self.actions.values().all(|&a| a == Action::Fix)
    }

    /// The Nielsen automorphism this one coincides with, if any.
    pub fn as_nielsen(&self) -> Option<NielsenAuto> {
        let mut moved = self.actions.iter().filter(|(_, &act)| act != Action::Fix);
        let (&target, &act) = moved.next()?;
        if moved.next().is_some() {
            return None;
        }
        match act {
            Action::Right => Some(NielsenAuto { target, side: Side::Right, mult: self.a }),
            Action::Left => Some(NielsenAuto { target, side: Side::Left, mult: self.a.inverse() }),
            _ => None,
        }
    }
}

impl fmt::Display for WhiteheadAuto {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; ", self.a)?;
        let parts: Vec<String> = self
            .actions
            .iter()
            .filter(|(_, &act)| act != Action::Fix)
            .map(|(&g, act)| format!("{}:{}", Letter::gen(g), format!("{act:?}").to_lowercase()))
            .collect();
        write!(f, "{})", parts.join(","))
    }
}

/// Serialized automorphism descriptor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Automorphism {
    Nielsen(NielsenAuto),
    Whitehead(WhiteheadAuto),
}

impl Automorphism {
    pub fn inverse(&self) -> Automorphism {
        match self {
            Automorphism::Nielsen(t) => Automorphism::Nielsen(t.inverse()),
            Automorphism::Whitehead(t) => Automorphism::Whitehead(t.inverse()),
        }
    }

    /// Rewrites Whitehead descriptors that coincide with a Nielsen move.
    pub fn normalized(&self) -> Automorphism {
        match self {
            Automorphism::Whitehead(t) => match t.as_nielsen() {
                Some(n) => Automorphism::Nielsen(n),
                None => self.clone(),
            },
            _ => self.clone(),
        }
    }

    fn check(&self, rank: u32) -> Result<()> {
        let ok = match self {
            Automorphism::Nielsen(t) => {
                t.target >= 1
                    && t.target <= rank
                    && t.mult.generator() <= rank
                    && t.mult.generator() != t.target
            }
            Automorphism::Whitehead(t) => {
                t.a.generator() <= rank
                    && t.actions.keys().all(|&g| g >= 1 && g <= rank && g != t.a.generator())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("automorphism {self} is not defined in rank {rank}")))
        }
    }

    pub fn substitution(&self, rank: u32) -> Result<Substitution> {
        self.check(rank)?;
        let mut images = vec![(None, None); rank as usize];
        match self {
            Automorphism::Nielsen(t) => {
                let slot = &mut images[t.target as usize - 1];
                match t.side {
                    Side::Right => slot.1 = Some(t.mult),
                    Side::Left => slot.0 = Some(t.mult),
                }
            }
            Automorphism::Whitehead(t) => {
                for (&g, &act) in &t.actions {
                    let slot = &mut images[g as usize - 1];
                    match act {
                        Action::Fix => {}
                        Action::Right => slot.1 = Some(t.a),
                        Action::Left => slot.0 = Some(t.a.inverse()),
                        Action::Conj => *slot = (Some(t.a.inverse()), Some(t.a)),
                    }
                }
            }
        }
        Ok(Substitution { rank, images })
    }

    /// Applies the automorphism to `w`, returning the cyclically reduced image.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        Ok(self.substitution(w.rank())?.apply(w))
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Automorphism::Nielsen(t) => t.fmt(f),
            Automorphism::Whitehead(t) => t.fmt(f),
        }
    }
}

/// Letter-level image table: `x_g ↦ pre · x_g · post`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    rank: u32,
    images: Vec<(Option<Letter>, Option<Letter>)>,
}

impl Substitution {
    /// Writes the freely reduced image of `letters` into `buf` and returns the
    /// bounds of its cyclically reduced core.
    pub fn image_into(&self, letters: &[Letter], buf: &mut Vec<Letter>) -> (usize, usize) {
        buf.clear();
        buf.reserve(letters.len() * 3);
        for &l in letters {
            let (pre, post) = self.images[l.generator() as usize - 1];
            if l.is_inverse() {
                if let Some(q) = post {
                    push_reduced(buf, q.inverse());
                }
                push_reduced(buf, l);
                if let Some(p) = pre {
                    push_reduced(buf, p.inverse());
                }
            } else {
                if let Some(p) = pre {
                    push_reduced(buf, p);
                }
                push_reduced(buf, l);
                if let Some(q) = post {
                    push_reduced(buf, q);
                }
            }
        }
        cyclic_core(buf)
    }

    /// Cyclic length of the image, using `buf` as scratch space.
    pub fn image_len(&self, letters: &[Letter], buf: &mut Vec<Letter>) -> usize {
        let (i, j) = self.image_into(letters, buf);
        j - i
    }

    pub fn apply(&self, w: &Word) -> Word {
        let mut buf = Vec::new();
        let (i, j) = self.image_into(w.letters(), &mut buf);
        Word::from_reduced(buf[i..j].to_vec(), self.rank)
    }
}

/// Applies `ts` left to right.
pub fn apply_sequence(ts: &[Automorphism], w: &Word) -> Result<Word> {
    let mut cur = w.cyclic_reduce();
    for t in ts {
        cur = t.apply(&cur)?;
    }
    Ok(cur)
}

fn signed_letters(rank: u32) -> impl Iterator<Item = Letter> {
    let n = rank as i32;
    (-n..=n).filter(|&v| v != 0).map(|v| Letter::new(v).unwrap())
}

/// `N(X)` in canonical order: target, side (left first), multiplier.
pub fn enumerate_nielsen(rank: u32) -> Vec<NielsenAuto> {
    let mut out = Vec::with_capacity((4 * rank * rank.saturating_sub(1)) as usize);
    for target in 1..=rank {
        for side in [Side::Left, Side::Right] {
            for mult in signed_letters(rank).filter(|m| m.generator() != target) {
                out.push(NielsenAuto { target, side, mult });
            }
        }
    }
    out
}

/// `W(X)` in canonical order: multiplier by signed value, then the action
/// table read as a base-4 number (first generator most significant).
pub fn enumerate_whitehead(rank: u32) -> Vec<WhiteheadAuto> {
    let mut out = Vec::new();
    for a in signed_letters(rank) {
        let others: Vec<u32> = (1..=rank).filter(|&g| g != a.generator()).collect();
        let combos = 4usize.pow(others.len() as u32);
        for code in 1..combos {
            let mut actions = BTreeMap::new();
            let mut rest = code;
            for &g in others.iter().rev() {
                actions.insert(g, Action::ALL[rest % 4]);
                rest /= 4;
            }
            let t = WhiteheadAuto { a, actions };
            debug_assert!(!t.is_trivial());
            out.push(t);
        }
    }
    out
}

/// Position of `t` in [`enumerate_nielsen`]`(rank)`, which is also its
/// [`AutoId`] in the rank's [`Catalog`].
pub fn nielsen_index(t: &NielsenAuto, rank: u32) -> Option<usize> {
    let g = t.mult.generator();
    if t.target == 0 || t.target > rank || g == 0 || g > rank || g == t.target {
        return None;
    }
    let n = rank as i32;
    let v = t.mult.value();
    // position of v in -n..-1, 1..n with ±target removed
    let mut pos = if v < 0 { (v + n) as usize } else { (v + n - 1) as usize };
    let skipped_neg = -(t.target as i32);
    if skipped_neg < v {
        pos -= 1;
    }
    if (t.target as i32) < v {
        pos -= 1;
    }
    let side = match t.side {
        Side::Left => 0,
        Side::Right => 1,
    };
    let per_side = 2 * (rank as usize - 1);
    Some(((t.target as usize - 1) * 2 + side) * per_side + pos)
}

/// Canonical index of an element of `W(X)` within a [`Catalog`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AutoId(pub u32);

impl AutoId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug)]
struct Entry {
    auto: Automorphism,
    subst: Substitution,
}

/// All of `W(X)` for one rank, with canonical ids and precomputed substitutions.
#[derive(Debug)]
pub struct Catalog {
    rank: u32,
    nielsen: Vec<NielsenAuto>,
    entries: Vec<Entry>,
    by_descriptor: HashMap<Automorphism, AutoId>,
}

impl Catalog {
    pub fn new(rank: u32) -> Catalog {
        assert!(rank >= 1, "rank must be positive");
        let nielsen = enumerate_nielsen(rank);
        let mut entries: Vec<Entry> = nielsen
            .iter()
            .map(|&t| {
                let auto = Automorphism::Nielsen(t);
                let subst = auto.substitution(rank).unwrap();
                Entry { auto, subst }
            })
            .collect();
        for t in enumerate_whitehead(rank) {
            if t.as_nielsen().is_none() {
                let auto = Automorphism::Whitehead(t);
                let subst = auto.substitution(rank).unwrap();
                entries.push(Entry { auto, subst });
            }
        }
        let by_descriptor = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.auto.clone(), AutoId(i as u32)))
            .collect();
        Catalog { rank, nielsen, entries, by_descriptor }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// `|N(X)|`
    pub fn nielsen_count(&self) -> usize {
        self.nielsen.len()
    }

    /// `|W(X)|`
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nielsen(&self) -> &[NielsenAuto] {
        &self.nielsen
    }

    pub fn ids(&self) -> impl Iterator<Item = AutoId> {
        (0..self.entries.len() as u32).map(AutoId)
    }

    pub fn nielsen_ids(&self) -> impl Iterator<Item = AutoId> {
        (0..self.nielsen.len() as u32).map(AutoId)
    }

    pub fn is_nielsen(&self, id: AutoId) -> bool {
        id.index() < self.nielsen.len()
    }

    pub fn get(&self, id: AutoId) -> &Automorphism {
        &self.entries[id.index()].auto
    }

    pub fn substitution(&self, id: AutoId) -> &Substitution {
        &self.entries[id.index()].subst
    }

    pub fn nielsen_id(&self, t: &NielsenAuto) -> Option<AutoId> {
        self.by_descriptor.get(&Automorphism::Nielsen(*t)).copied()
    }

    pub fn id_of(&self, t: &Automorphism) -> Option<AutoId> {
        self.by_descriptor.get(&t.normalized()).copied()
    }

    pub fn apply(&self, id: AutoId, w: &Word) -> Result<Word> {
        if w.rank() != self.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: w.rank() });
        }
        Ok(self.substitution(id).apply(w))
    }

    pub fn apply_sequence(&self, ids: &[AutoId], w: &Word) -> Result<Word> {
        if w.rank() != self.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: w.rank() });
        }
        let mut cur = w.cyclic_reduce();
        for &id in ids {
            cur = self.substitution(id).apply(&cur);
        }
        Ok(cur)
    }
}
