//! Whitehead length reduction (WLR) and the greedy reduction loop (WRA) under
//! pluggable search orderings of `W(X)`.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automorphism::{AutoId, Automorphism, Catalog};
use crate::cluster::CentroidModel;
use crate::error::{Error, Result};
use crate::graph::{self, EdgeIndexer};
use crate::word::{Letter, Word};

/// Order in which `W(X)` is searched for a length-reducing automorphism.
#[derive(Clone, Debug)]
pub enum Strategy {
    /// Fresh uniform shuffle of `W(X)` on every search.
    Random { seed: u64 },
    /// Canonical Nielsen order, then the rest of `W(X)`.
    NielsenFirst,
    /// Nielsen automorphisms by distance from `f(w)` to their centers.
    Centroid(Arc<CentroidModel>),
    /// Nielsen pairs of the heaviest `E′` edges first.
    MaxWeight,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Random { .. } => "r",
            Strategy::NielsenFirst => "nf",
            Strategy::Centroid(_) => "c",
            Strategy::MaxWeight => "max",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Random { .. } => "WRA_R",
            Strategy::NielsenFirst => "WRA_NF",
            Strategy::Centroid(_) => "WRA_C",
            Strategy::MaxWeight => "WRA_MAX",
        }
    }

    /// Parses `r`, `nf`, `c` or `max`.
    pub fn parse(name: &str, seed: u64, model: Option<Arc<CentroidModel>>) -> Result<Strategy> {
        match name.trim().to_ascii_lowercase().as_str() {
            "r" | "random" => Ok(Strategy::Random { seed }),
            "nf" | "nielsen-first" => Ok(Strategy::NielsenFirst),
            "c" | "centroid" => model.map(Strategy::Centroid).ok_or(Error::MissingModel),
            "max" | "max-weight" => Ok(Strategy::MaxWeight),
            other => Err(Error::InvalidInput(format!("unknown strategy {other:?}"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LrpResult {
    pub reducer: Option<AutoId>,
    /// Automorphism applications, including the successful one.
    pub steps: usize,
    pub reduced_word: Option<Word>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub total_steps: usize,
    pub reducing_steps: usize,
    /// One entry per WLR invocation; a final certification sweep, if any, is last.
    pub lrp_step_counts: Vec<usize>,
    pub trace: Vec<AutoId>,
    /// Cyclic length before the run and after each trace step.
    pub lengths: Vec<usize>,
}

impl RunMetrics {
    /// Step counts of the searches that found a reducer.
    pub fn successful_lrp_steps(&self) -> &[usize] {
        &self.lrp_step_counts[..self.reducing_steps]
    }

    /// Mean steps per successful search, if there was one.
    pub fn mean_lrp(&self) -> Option<f64> {
        let s = self.successful_lrp_steps();
        (!s.is_empty()).then(|| s.iter().sum::<usize>() as f64 / s.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub word: Word,
    pub metrics: RunMetrics,
}

/// Per-rank search context: the `W(X)` catalog plus the `E′ → ψ_e` table.
#[derive(Debug)]
pub struct Engine {
    catalog: Catalog,
    indexer: EdgeIndexer,
    /// `ψ^x, ψ^y` ids per edge; `None` for square edges.
    edge_pairs: Vec<Option<(AutoId, AutoId)>>,
}

/// Mutable state of one reduction run.
pub struct Search<'a> {
    strategy: &'a Strategy,
    rng: Option<ChaCha8Rng>,
    shuffled: Vec<AutoId>,
    buf: Vec<Letter>,
}

impl<'a> Search<'a> {
    /// `stream` separates independent runs that share a strategy seed.
    pub fn new(strategy: &'a Strategy, stream: u64) -> Self {
        let rng = match strategy {
            Strategy::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(stream);
                Some(rng)
            }
            _ => None,
        };
        Search { strategy, rng, shuffled: Vec::new(), buf: Vec::new() }
    }
}

impl Engine {
    pub fn new(rank: u32) -> Engine {
        let catalog = Catalog::new(rank);
        let indexer = EdgeIndexer::new(rank);
        let edge_pairs = (0..indexer.edge_count())
            .map(|e| {
                graph::edge_autos(&indexer, e).ok().map(|(p, q)| {
                    (catalog.nielsen_id(&p).unwrap(), catalog.nielsen_id(&q).unwrap())
                })
            })
            .collect();
        Engine { catalog, indexer, edge_pairs }
    }

    pub fn rank(&self) -> u32 {
        self.catalog.rank()
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn indexer(&self) -> &EdgeIndexer {
        &self.indexer
    }

    fn check_rank(&self, w: &Word) -> Result<()> {
        if w.rank() != self.rank() {
            return Err(Error::RankMismatch { expected: self.rank(), found: w.rank() });
        }
        Ok(())
    }

    /// The `ψ_e` pair of the heaviest `E′` edge of `w` (ties by edge index).
    pub fn max_edge_pair(&self, w: &Word) -> Option<(AutoId, AutoId)> {
        let g = graph::whitehead_graph(w).ok()?;
        let e = graph::max_weight_edges(&g.weights, &self.indexer).into_iter().next()?;
        self.edge_pairs[e]
    }

    /// The Nielsen part of the ordering for a deterministic strategy.
    fn nielsen_prefix(&self, w: &Word, strategy: &Strategy) -> Vec<AutoId> {
        match strategy {
            Strategy::Random { .. } | Strategy::NielsenFirst => self.catalog.nielsen_ids().collect(),
            Strategy::MaxWeight => {
                let weights = match graph::whitehead_graph(w) {
                    Ok(g) => g.weights,
                    Err(_) => vec![0; self.indexer.edge_count()],
                };
                graph::max_weight_edges(&weights, &self.indexer)
                    .into_iter()
                    .flat_map(|e| {
                        let (p, q) = self.edge_pairs[e].expect("E′ edge");
                        [p, q]
                    })
                    .collect()
            }
            Strategy::Centroid(model) => match graph::feature_vector(w) {
                Ok(f) => model
                    .ordering_indices(&f)
                    .unwrap_or_else(|_| (0..self.catalog.nielsen_count()).collect())
                    .into_iter()
                    .map(|i| AutoId(i as u32))
                    .collect(),
                Err(_) => self.catalog.nielsen_ids().collect(),
            },
        }
    }

    /// Full search order over `W(X)` for `w`. Consumes randomness for
    /// [`Strategy::Random`].
    pub fn ordering(&self, w: &Word, search: &mut Search<'_>) -> Vec<AutoId> {
        match search.rng.as_mut() {
            Some(rng) => {
                let mut all: Vec<AutoId> = self.catalog.ids().collect();
                all.shuffle(rng);
                all
            }
            None => {
                let mut order = self.nielsen_prefix(w, search.strategy);
                order.extend(self.catalog.ids().skip(self.catalog.nielsen_count()));
                order
            }
        }
    }

    fn first_reducer(
        &self,
        w: &Word,
        order: impl Iterator<Item = AutoId>,
        buf: &mut Vec<Letter>,
    ) -> LrpResult {
        let mut steps = 0;
        for id in order {
            steps += 1;
            let subst = self.catalog.substitution(id);
            let (i, j) = subst.image_into(w.letters(), buf);
            if j - i < w.len() {
                let reduced = Word::from_reduced(buf[i..j].to_vec(), w.rank());
                return LrpResult { reducer: Some(id), steps, reduced_word: Some(reduced) };
            }
        }
        LrpResult { reducer: None, steps, reduced_word: None }
    }

    /// One WLR search: applies automorphisms in the strategy's order until the
    /// cyclic length strictly drops.
    pub fn find_length_reducer(&self, w: &Word, search: &mut Search<'_>) -> LrpResult {
        let w = w.cyclic_reduce();
        let Search { strategy, rng, shuffled, buf } = search;
        match rng.as_mut() {
            Some(rng) => {
                if shuffled.len() != self.catalog.len() {
                    *shuffled = self.catalog.ids().collect();
                }
                shuffled.shuffle(rng);
                self.first_reducer(&w, shuffled.iter().copied(), buf)
            }
            None => {
                let prefix = self.nielsen_prefix(&w, strategy);
                let rest = self.catalog.ids().skip(self.catalog.nielsen_count());
                self.first_reducer(&w, prefix.into_iter().chain(rest), buf)
            }
        }
    }

    /// Greedy descent: repeats WLR until no reducer exists. A word of cyclic
    /// length ≤ 1 is final without a certification sweep.
    pub fn whitehead_reduce_with(&self, w: &Word, search: &mut Search<'_>) -> Result<Reduction> {
        self.check_rank(w)?;
        let mut cur = w.cyclic_reduce();
        let mut m = RunMetrics { lengths: vec![cur.len()], ..Default::default() };
        while cur.len() > 1 {
            let r = self.find_length_reducer(&cur, search);
            m.total_steps += r.steps;
            m.lrp_step_counts.push(r.steps);
            match (r.reducer, r.reduced_word) {
                (Some(t), Some(next)) => {
                    m.reducing_steps += 1;
                    m.trace.push(t);
                    m.lengths.push(next.len());
                    cur = next;
                }
                _ => break,
            }
        }
        Ok(Reduction { word: cur, metrics: m })
    }

    pub fn whitehead_reduce(&self, w: &Word, strategy: &Strategy) -> Result<Reduction> {
        self.whitehead_reduce_with(w, &mut Search::new(strategy, 0))
    }

    /// First element of `W(X)` (canonical order) that shortens `w`, with the image.
    pub fn reducing_witness(&self, w: &Word) -> Result<Option<(AutoId, Word)>> {
        self.check_rank(w)?;
        let w = w.cyclic_reduce();
        let r = self.first_reducer(&w, self.catalog.ids(), &mut Vec::new());
        Ok(r.reducer.zip(r.reduced_word))
    }

    /// True iff no element of `W(X)` strictly reduces the cyclic length.
    pub fn is_minimal(&self, w: &Word) -> Result<bool> {
        Ok(self.reducing_witness(w)?.is_none())
    }

    /// All Nielsen automorphisms that strictly shorten `w`, ascending.
    pub fn nielsen_reducers(&self, w: &Word) -> Vec<AutoId> {
        let w = w.cyclic_reduce();
        let mut buf = Vec::new();
        self.catalog
            .nielsen_ids()
            .filter(|&id| self.catalog.substitution(id).image_len(w.letters(), &mut buf) < w.len())
            .collect()
    }

    pub fn reduces(&self, id: AutoId, w: &Word, buf: &mut Vec<Letter>) -> bool {
        self.catalog.substitution(id).image_len(w.letters(), buf) < w.len()
    }

    pub fn trace(&self, input: &Word, strategy: &Strategy, red: &Reduction) -> Trace {
        let steps = red
            .metrics
            .trace
            .iter()
            .zip(&red.metrics.lengths[1..])
            .zip(red.metrics.successful_lrp_steps())
            .map(|((&id, &length), &search_steps)| TraceStep {
                auto: self.catalog.get(id).clone(),
                length,
                search_steps,
            })
            .collect();
        Trace {
            rank: self.rank(),
            input: input.to_ints(),
            strategy: strategy.name().to_string(),
            input_length: input.cyclic_reduce().len(),
            steps,
            final_word: red.word.to_ints(),
            total_steps: red.metrics.total_steps,
        }
    }
}

/// Serializable record of one reduction run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub rank: u32,
    pub input: Vec<i32>,
    pub strategy: String,
    pub input_length: usize,
    pub steps: Vec<TraceStep>,
    #[serde(rename = "final")]
    pub final_word: Vec<i32>,
    pub total_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub auto: Automorphism,
    pub length: usize,
    pub search_steps: usize,
}

impl Trace {
    /// Replays the recorded automorphisms on the input.
    pub fn replay(&self) -> Result<Word> {
        let w = Word::free_reduce(&self.input, self.rank)?;
        let autos: Vec<Automorphism> = self.steps.iter().map(|s| s.auto.clone()).collect();
        crate::automorphism::apply_sequence(&autos, &w)
    }
}

/// Canonical representative of a cyclic word: its least rotation.
fn least_rotation(letters: &[Letter]) -> Vec<Letter> {
    let n = letters.len();
    (0..n.max(1))
        .map(|k| {
            let mut r = letters.to_vec();
            if n > 0 {
                r.rotate_left(k);
            }
            r
        })
        .min()
        .unwrap_or_default()
}

/// Breadth-first search over `W(X)`-images of `w` that never expands a word
/// longer than `length_cap`. Returns the least cyclic length reached.
///
/// Test oracle for small instances; it makes no use of greedy descent.
pub fn orbit_min_length_bruteforce(
    catalog: &Catalog,
    w: &Word,
    length_cap: usize,
    max_states: usize,
) -> Result<usize> {
    use std::collections::{HashSet, VecDeque};
    if w.rank() != catalog.rank() {
        return Err(Error::RankMismatch { expected: catalog.rank(), found: w.rank() });
    }
    let start = w.cyclic_reduce();
    let mut best = start.len();
    if best <= 1 {
        return Ok(best);
    }
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(least_rotation(start.letters()));
    queue.push_back(start.letters().to_vec());
    let mut buf = Vec::new();
    while let Some(cur) = queue.pop_front() {
        for id in catalog.ids() {
            let (i, j) = catalog.substitution(id).image_into(&cur, &mut buf);
            let len = j - i;
            if len > length_cap {
                continue;
            }
            let key = least_rotation(&buf[i..j]);
            if seen.insert(key.clone()) {
                best = best.min(len);
                if best <= 1 {
                    return Ok(best);
                }
                if seen.len() > max_states {
                    return Err(Error::OrbitCapExceeded { cap: length_cap, states: seen.len() });
                }
                queue.push_back(key);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::{NielsenAuto, Side};

    fn w(s: &str, rank: u32) -> Word {
        Word::parse(s, rank).unwrap()
    }

    fn all_strategies() -> Vec<Strategy> {
        vec![Strategy::Random { seed: 7 }, Strategy::NielsenFirst, Strategy::MaxWeight]
    }

    #[test]
    fn find_reducer_on_ab() {
        let e = Engine::new(2);
        let s = Strategy::NielsenFirst;
        let r = e.find_length_reducer(&w("ab", 2), &mut Search::new(&s, 0));
        assert!(r.steps <= 8);
        assert_eq!(r.reduced_word.unwrap().len(), 1);
        assert!(e.catalog().is_nielsen(r.reducer.unwrap()));
    }

    #[test]
    fn generator_and_commutator_have_no_reducer() {
        for n in 2..=3 {
            let e = Engine::new(n);
            for s in all_strategies() {
                let r = e.find_length_reducer(&w("a", n), &mut Search::new(&s, 0));
                assert_eq!(r.reducer, None);
                assert_eq!(r.steps, e.catalog().len());
            }
        }
        let e = Engine::new(2);
        let r = e.find_length_reducer(&w("abAB", 2), &mut Search::new(&Strategy::NielsenFirst, 0));
        assert_eq!(r.reducer, None);
        assert_eq!(r.steps, 12);
    }

    #[test]
    fn is_minimal_examples() {
        let e = Engine::new(2);
        assert!(e.is_minimal(&w("a", 2)).unwrap());
        assert!(!e.is_minimal(&w("ab", 2)).unwrap());
        assert!(e.is_minimal(&w("abAB", 2)).unwrap());
        assert!(e.is_minimal(&Word::empty(2)).unwrap());
        assert!(e.is_minimal(&w("a", 3)).is_err());
    }

    #[test]
    fn reduce_abab() {
        let e = Engine::new(2);
        for s in all_strategies() {
            let red = e.whitehead_reduce(&w("abab", 2), &s).unwrap();
            assert_eq!(red.word.len(), 2, "{s}");
            assert!(red.metrics.trace.len() <= 4);
        }
        let b_to_ab = NielsenAuto { target: 2, side: Side::Left, mult: Letter::new(-1).unwrap() };
        assert_eq!(
            e.catalog().apply(e.catalog().nielsen_id(&b_to_ab).unwrap(), &w("abab", 2)).unwrap(),
            w("bb", 2)
        );
    }

    #[test]
    fn generator_has_empty_trace() {
        let e = Engine::new(3);
        for s in all_strategies() {
            let red = e.whitehead_reduce(&w("b", 3), &s).unwrap();
            assert_eq!(red.word, w("b", 3));
            assert!(red.metrics.trace.is_empty());
            assert_eq!(red.metrics.total_steps, 0);
        }
    }

    #[test]
    fn stalled_run_pays_a_certification_sweep() {
        let e = Engine::new(2);
        let red = e.whitehead_reduce(&w("abAB", 2), &Strategy::NielsenFirst).unwrap();
        assert_eq!(red.metrics.lrp_step_counts, vec![12]);
        assert_eq!(red.metrics.total_steps, 12);
        assert_eq!(red.metrics.mean_lrp(), None);
    }

    #[test]
    fn oracle_examples() {
        let c2 = Catalog::new(2);
        assert_eq!(orbit_min_length_bruteforce(&c2, &w("abab", 2), 4, 100_000).unwrap(), 2);
        assert_eq!(orbit_min_length_bruteforce(&c2, &w("a", 2), 1, 10).unwrap(), 1);
        assert_eq!(orbit_min_length_bruteforce(&c2, &w("ab", 2), 2, 10).unwrap(), 1);
        assert!(matches!(
            orbit_min_length_bruteforce(&c2, &w("abab", 2), 8, 1),
            Err(Error::OrbitCapExceeded { .. })
        ));
    }

    #[test]
    fn random_strategy_is_deterministic() {
        let e = Engine::new(3);
        let s = Strategy::Random { seed: 99 };
        let x = w("abcabCCbaBac", 3);
        let a = e.whitehead_reduce(&x, &s).unwrap();
        let b = e.whitehead_reduce(&x, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ordering_is_a_permutation() {
        let e = Engine::new(3);
        let x = w("abcabCCbaBac", 3);
        for s in all_strategies() {
            let mut o = e.ordering(&x, &mut Search::new(&s, 3));
            o.sort();
            let all: Vec<_> = e.catalog().ids().collect();
            assert_eq!(o, all, "{s}");
        }
    }

    #[test]
    fn trace_replays() {
        let e = Engine::new(3);
        let x = w("abcabCCbaBacbbca", 3);
        let s = Strategy::MaxWeight;
        let red = e.whitehead_reduce(&x, &s).unwrap();
        let t = e.trace(&x, &s, &red);
        assert_eq!(t.replay().unwrap(), red.word);
        let json = serde_json::to_string(&t).unwrap();
        let back: Trace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!(Strategy::parse("nf", 0, None).unwrap().name(), "nf");
        assert_eq!(Strategy::parse("MAX", 0, None).unwrap().name(), "max");
        assert!(matches!(Strategy::parse("c", 0, None), Err(Error::MissingModel)));
        assert!(Strategy::parse("zz", 0, None).is_err());
    }
}
