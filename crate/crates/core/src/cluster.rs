//! K-means over Whitehead-graph features, centers estimated from words with a
//! unique Nielsen reducer, and the cluster goodness measures `R`, `R_max`,
//! `avg(R_max)` and `G_MAX`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automorphism::{nielsen_index, AutoId, NielsenAuto};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::graph::{self, squared_distance, FeatureVector, EDGE_ORDER};
use crate::par::{self, Exec};
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig { k, seed, max_iter: 300, tol: 1e-9 }
    }
}

/// Criterion values after one assignment step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    /// `Σ ‖x − μ‖`
    pub j: f64,
    /// `Σ ‖x − μ‖²`, the quantity nearest-center/mean updates never increase.
    pub j_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centers: Vec<Vec<f64>>,
    pub k: usize,
    pub iterations: usize,
    pub criterion: Criterion,
    pub history: Vec<Criterion>,
    /// Center index of each training point under the final centers.
    pub assignments: Vec<usize>,
    pub reseeds: usize,
}

fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = squared_distance(x, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Lloyd iterations from `k` distinct sampled points. Stops at an assignment
/// fixed point, when the criterion `J` improves by less than `tol`, or
/// after `max_iter` assignment steps.
pub fn kmeans<P>(points: &[P], cfg: &KMeansConfig, exec: Exec) -> Result<KMeansModel>
where
    P: AsRef<[f64]> + Sync,
{
    if points.is_empty() {
        return Err(Error::Empty("k-means"));
    }
    if cfg.k == 0 || cfg.k > points.len() {
        return Err(Error::InvalidInput(format!(
            "k = {} must lie in 1..={}",
            cfg.k,
            points.len()
        )));
    }
    let dim = points[0].as_ref().len();
    if let Some(p) = points.iter().find(|p| p.as_ref().len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: p.as_ref().len() });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut init = rand::seq::index::sample(&mut rng, points.len(), cfg.k).into_vec();
    init.sort_unstable();
    let mut centers: Vec<Vec<f64>> = init.iter().map(|&i| points[i].as_ref().to_vec()).collect();

    let mut history = Vec::new();
    let mut prev: Option<Vec<usize>> = None;
    let mut reseeds = 0;
    let mut iterations = 0;
    let assignments = loop {
        iterations += 1;
        let nearest_all = par::map(exec, points, |_, p| nearest(p.as_ref(), &centers));
        let assign: Vec<usize> = nearest_all.iter().map(|&(i, _)| i).collect();
        let crit = Criterion {
            j: nearest_all.iter().map(|&(_, d)| d.sqrt()).sum(),
            j_squared: nearest_all.iter().map(|&(_, d)| d).sum(),
        };
        let improvement = history.last().map(|c: &Criterion| c.j - crit.j);
        history.push(crit);

        let fixed = prev.as_ref() == Some(&assign);
        let stalled = improvement.is_some_and(|d| d < cfg.tol);
        if fixed || stalled || iterations >= cfg.max_iter {
            break assign;
        }

        // update: means of the current clusters
        let mut sums = vec![vec![0.0; dim]; cfg.k];
        let mut counts = vec![0usize; cfg.k];
        for (p, &c) in points.iter().zip(&assign) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p.as_ref()) {
                *s += x;
            }
        }
        // empty clusters take the points farthest from their centers
        let mut far: Vec<usize> = Vec::new();
        if counts.contains(&0) {
            far = (0..points.len()).collect();
            far.sort_by(|&a, &b| nearest_all[b].1.total_cmp(&nearest_all[a].1).then(a.cmp(&b)));
        }
        let mut far = far.into_iter();
        for c in 0..cfg.k {
            if counts[c] > 0 {
                let n = counts[c] as f64;
                centers[c] = sums[c].iter().map(|s| s / n).collect();
            } else if let Some(p) = far.next() {
                centers[c] = points[p].as_ref().to_vec();
                reseeds += 1;
            }
        }
        prev = Some(assign);
    };

    Ok(KMeansModel {
        k: cfg.k,
        criterion: *history.last().unwrap(),
        centers,
        iterations,
        history,
        assignments,
        reseeds,
    })
}

impl KMeansModel {
    pub fn assign(&self, x: &[f64]) -> usize {
        nearest(x, &self.centers).0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    KMeans,
    Lambda,
}

/// One center of a [`CentroidModel`]. An empty `vector` (with `support` 0)
/// flags a Nielsen automorphism with no training words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Center {
    #[serde(with = "descriptor")]
    pub auto: Option<NielsenAuto>,
    pub vector: Vec<f64>,
    pub support: usize,
}

impl Center {
    pub fn is_empty(&self) -> bool {
        self.support == 0 || self.vector.is_empty()
    }
}

/// Center labels serialize as full automorphism descriptors.
mod descriptor {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use crate::automorphism::{Automorphism, NielsenAuto};

    pub fn serialize<S: Serializer>(t: &Option<NielsenAuto>, s: S) -> Result<S::Ok, S::Error> {
        t.map(Automorphism::Nielsen).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<NielsenAuto>, D::Error> {
        match Option::<Automorphism>::deserialize(d)?.map(|a| a.normalized()) {
            None => Ok(None),
            Some(Automorphism::Nielsen(t)) => Ok(Some(t)),
            Some(other) => Err(D::Error::custom(format!("center label {other} is not a Nielsen automorphism"))),
        }
    }
}

/// Centers labelled by Nielsen automorphisms. Serializes as the model file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentroidModel {
    pub rank: u32,
    pub dim: usize,
    pub edge_order: String,
    pub kind: ModelKind,
    pub centers: Vec<Center>,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

impl CentroidModel {
    pub fn validate(&self) -> Result<()> {
        let dim = (self.rank * (2 * self.rank - 1)) as usize;
        if self.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.dim });
        }
        if self.edge_order != EDGE_ORDER {
            return Err(Error::InvalidInput(format!("unknown edge order {:?}", self.edge_order)));
        }
        for c in &self.centers {
            if !c.is_empty() && c.vector.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: c.vector.len() });
            }
            if let Some(t) = &c.auto {
                nielsen_index(t, self.rank).ok_or_else(|| {
                    Error::InvalidInput(format!("{t} is not a Nielsen automorphism of rank {}", self.rank))
                })?;
            }
        }
        Ok(())
    }

    fn check_dim(&self, v: &FeatureVector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.dim() });
        }
        Ok(())
    }

    /// Canonical Nielsen indices ordered by distance from `v` to each
    /// automorphism's nearest labelled center; unlabelled or empty ones last.
    pub fn ordering_indices(&self, v: &FeatureVector) -> Result<Vec<usize>> {
        self.check_dim(v)?;
        let k = 4 * self.rank as usize * (self.rank as usize - 1);
        let mut dist = vec![f64::INFINITY; k];
        for c in self.centers.iter().filter(|c| !c.is_empty()) {
            if let Some(i) = c.auto.as_ref().and_then(|t| nielsen_index(t, self.rank)) {
                dist[i] = dist[i].min(squared_distance(v.as_slice(), &c.vector));
            }
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        Ok(order)
    }

    /// Index of the nearest non-empty center.
    pub fn nearest_center(&self, v: &FeatureVector) -> Result<Option<usize>> {
        self.check_dim(v)?;
        Ok(self
            .centers
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, c)| (i, squared_distance(v.as_slice(), &c.vector)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i))
    }

    /// Wraps K-means centers, labelling each by the automorphism that
    /// reduces most of its training cluster.
    pub fn from_kmeans(engine: &Engine, words: &[Word], km: &KMeansModel, seed: u64, exec: Exec) -> Result<Self> {
        let profiles = reducer_profiles(engine, words, exec);
        let mut centers = Vec::with_capacity(km.k);
        for c in 0..km.k {
            let members: Vec<&[AutoId]> = profiles
                .iter()
                .zip(&km.assignments)
                .filter(|(_, &a)| a == c)
                .map(|(p, _)| p.as_slice())
                .collect();
            let auto = r_max_from_profiles(engine, &members).ok().map(|(_, t)| t);
            centers.push(Center { auto, vector: km.centers[c].clone(), support: members.len() });
        }
        let rank = engine.rank();
        Ok(CentroidModel {
            rank,
            dim: engine.indexer().edge_count(),
            edge_order: EDGE_ORDER.into(),
            kind: ModelKind::KMeans,
            centers,
            seed: Some(seed),
            manifest: None,
        })
    }
}

/// Nielsen reducers of each word.
pub fn reducer_profiles(engine: &Engine, words: &[Word], exec: Exec) -> Vec<Vec<AutoId>> {
    par::map(exec, words, |_, w| engine.nielsen_reducers(w))
}

/// `λ_t`: mean feature vector over the sample words whose only Nielsen
/// reducer is `t`. Automorphisms with no such word get an empty center.
pub fn estimate_lambda_centers(engine: &Engine, sample: &[Word], exec: Exec) -> Result<CentroidModel> {
    if let Some(w) = sample.iter().find(|w| w.rank() != engine.rank()) {
        return Err(Error::RankMismatch { expected: engine.rank(), found: w.rank() });
    }
    let k = engine.catalog().nielsen_count();
    let unique: Vec<Option<(usize, FeatureVector)>> = par::map(exec, sample, |_, w| {
        let r = engine.nielsen_reducers(w);
        match r.as_slice() {
            [t] => graph::feature_vector(w).ok().map(|f| (t.index(), f)),
            _ => None,
        }
    });
    // sum in a canonical word order so the result does not depend on sample order
    let mut members: Vec<Vec<(Vec<i32>, &FeatureVector)>> = vec![Vec::new(); k];
    for (w, u) in sample.iter().zip(&unique) {
        if let Some((t, f)) = u {
            members[*t].push((w.to_ints(), f));
        }
    }
    let dim = engine.indexer().edge_count();
    let centers = members
        .iter_mut()
        .zip(engine.catalog().nielsen())
        .map(|(m, t)| {
            m.sort_by(|a, b| a.0.cmp(&b.0));
            if m.is_empty() {
                return Center { auto: Some(*t), vector: Vec::new(), support: 0 };
            }
            let mut v = vec![0.0; dim];
            for (_, f) in m.iter() {
                for (s, x) in v.iter_mut().zip(f.as_slice()) {
                    *s += x;
                }
            }
            let n = m.len() as f64;
            v.iter_mut().for_each(|s| *s /= n);
            Center { auto: Some(*t), vector: v, support: m.len() }
        })
        .collect();
    Ok(CentroidModel {
        rank: engine.rank(),
        dim,
        edge_order: EDGE_ORDER.into(),
        kind: ModelKind::Lambda,
        centers,
        seed: None,
        manifest: None,
    })
}

/// Nielsen automorphisms ordered by distance from `v` to their centers.
pub fn assign_ordering(v: &FeatureVector, model: &CentroidModel) -> Result<Vec<NielsenAuto>> {
    let nielsen = crate::automorphism::enumerate_nielsen(model.rank);
    Ok(model.ordering_indices(v)?.into_iter().map(|i| nielsen[i]).collect())
}

/// `R(t, C)`: fraction of the cluster shortened by `t`.
pub fn goodness_r(engine: &Engine, cluster: &[Word], t: &NielsenAuto) -> Result<f64> {
    if cluster.is_empty() {
        return Err(Error::Empty("R(t, C)"));
    }
    let id = engine
        .catalog()
        .nielsen_id(t)
        .ok_or_else(|| Error::InvalidInput(format!("{t} is not in N(X)")))?;
    let mut buf = Vec::new();
    let hits = cluster.iter().filter(|w| engine.reduces(id, w, &mut buf)).count();
    Ok(hits as f64 / cluster.len() as f64)
}

fn r_max_from_profiles(engine: &Engine, members: &[&[AutoId]]) -> Result<(f64, NielsenAuto)> {
    if members.is_empty() {
        return Err(Error::Empty("R_max"));
    }
    let nielsen = engine.catalog().nielsen();
    let mut hits = vec![0usize; nielsen.len()];
    for p in members {
        for id in p.iter() {
            hits[id.index()] += 1;
        }
    }
    // first maximum in canonical order
    let (best, &count) = hits
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, &c)| c)
        .expect("N(X) is nonempty for rank ≥ 2");
    Ok((count as f64 / members.len() as f64, nielsen[best]))
}

/// `R_max(C)` and its argmax `t_C` (first in canonical order on ties).
pub fn r_max(engine: &Engine, cluster: &[Word]) -> Result<(f64, NielsenAuto)> {
    let profiles = reducer_profiles(engine, cluster, Exec::Sequential);
    let refs: Vec<&[AutoId]> = profiles.iter().map(Vec::as_slice).collect();
    r_max_from_profiles(engine, &refs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterScore {
    pub center: usize,
    pub size: usize,
    pub r_max: f64,
    pub argmax: NielsenAuto,
    /// Label of the center, when the model has one.
    pub label: Option<NielsenAuto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterEvaluation {
    pub k: usize,
    pub avg_r_max: f64,
    pub empty_clusters: usize,
    pub clusters: Vec<ClusterScore>,
}

impl ClusterEvaluation {
    /// Whether no two nonempty clusters share their argmax automorphism.
    pub fn argmax_is_injective(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.clusters.iter().all(|c| seen.insert(c.argmax))
    }

    /// Fraction of labelled nonempty clusters whose argmax equals the label.
    pub fn label_agreement(&self) -> f64 {
        let labelled: Vec<_> = self.clusters.iter().filter(|c| c.label.is_some()).collect();
        if labelled.is_empty() {
            return 0.0;
        }
        let hits = labelled.iter().filter(|c| c.label == Some(c.argmax)).count();
        hits as f64 / labelled.len() as f64
    }
}

/// `avg(R_max)` over a partition; empty clusters are skipped and counted.
pub fn avg_r_max(engine: &Engine, clusters: &[Vec<Word>]) -> Result<ClusterEvaluation> {
    let mut scores = Vec::new();
    let mut empty = 0;
    for (i, c) in clusters.iter().enumerate() {
        if c.is_empty() {
            empty += 1;
            continue;
        }
        let (r, t) = r_max(engine, c)?;
        scores.push(ClusterScore { center: i, size: c.len(), r_max: r, argmax: t, label: None });
    }
    finish_evaluation(clusters.len(), empty, scores)
}

fn finish_evaluation(k: usize, empty: usize, clusters: Vec<ClusterScore>) -> Result<ClusterEvaluation> {
    if clusters.is_empty() {
        return Err(Error::Empty("avg(R_max)"));
    }
    let avg = clusters.iter().map(|c| c.r_max).sum::<f64>() / clusters.len() as f64;
    Ok(ClusterEvaluation { k, avg_r_max: avg, empty_clusters: empty, clusters })
}

/// Clusters `dataset` by nearest model center and scores every nonempty cluster.
pub fn evaluate_model(engine: &Engine, model: &CentroidModel, dataset: &[Word], exec: Exec) -> Result<ClusterEvaluation> {
    if model.rank != engine.rank() {
        return Err(Error::RankMismatch { expected: engine.rank(), found: model.rank });
    }
    let rows: Vec<Result<(Option<usize>, Vec<AutoId>)>> = par::map(exec, dataset, |_, w| {
        let f = graph::feature_vector(w)?;
        Ok((model.nearest_center(&f)?, engine.nielsen_reducers(w)))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let k = model.centers.iter().filter(|c| !c.is_empty()).count();
    let mut members: Vec<Vec<&[AutoId]>> = vec![Vec::new(); model.centers.len()];
    for (c, p) in &rows {
        if let Some(c) = c {
            members[*c].push(p.as_slice());
        }
    }
    let mut scores = Vec::new();
    let mut empty = 0;
    for (i, m) in members.iter().enumerate() {
        if model.centers[i].is_empty() {
            continue;
        }
        if m.is_empty() {
            empty += 1;
            continue;
        }
        let (r, t) = r_max_from_profiles(engine, m)?;
        scores.push(ClusterScore { center: i, size: m.len(), r_max: r, argmax: t, label: model.centers[i].auto });
    }
    finish_evaluation(k, empty, scores)
}

/// `G_MAX`: fraction of words shortened by a member of the `ψ_e` pair of
/// their heaviest `E′` edge.
pub fn goodness_g_max(engine: &Engine, dataset: &[Word], exec: Exec) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Empty("G_MAX"));
    }
    if let Some(w) = dataset.iter().find(|w| w.rank() != engine.rank()) {
        return Err(Error::RankMismatch { expected: engine.rank(), found: w.rank() });
    }
    let hits = par::map(exec, dataset, |_, w| {
        let mut buf = Vec::new();
        match engine.max_edge_pair(w) {
            Some((p, q)) => engine.reduces(p, w, &mut buf) || engine.reduces(q, w, &mut buf),
            None => false,
        }
    });
    Ok(hits.iter().filter(|&&h| h).count() as f64 / dataset.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::{enumerate_nielsen, Side};
    use crate::word::Letter;

    fn w(s: &str, rank: u32) -> Word {
        Word::parse(s, rank).unwrap()
    }

    /// Best 2-partition of sorted 1-D points by brute force over split points.
    fn best_two_means(xs: &[f64]) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for cut in 1..xs.len() {
            let (l, r) = xs.split_at(cut);
            let ml = l.iter().sum::<f64>() / l.len() as f64;
            let mr = r.iter().sum::<f64>() / r.len() as f64;
            let cost: f64 = l.iter().map(|x| (x - ml).powi(2)).sum::<f64>()
                + r.iter().map(|x| (x - mr).powi(2)).sum::<f64>();
            if cost < best.0 {
                best = (cost, ml, mr);
            }
        }
        (best.1, best.2)
    }

    #[test]
    fn kmeans_two_clusters_on_a_line() {
        let xs = [0.0, 1.0, 10.0, 11.0];
        let (lo, hi) = best_two_means(&xs);
        assert_eq!((lo, hi), (0.5, 10.5));
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        for seed in 0..20 {
            let m = kmeans(&pts, &KMeansConfig::new(2, seed), Exec::Sequential).unwrap();
            let mut c: Vec<f64> = m.centers.iter().map(|c| c[0]).collect();
            c.sort_by(f64::total_cmp);
            assert_eq!(c, vec![lo, hi], "seed {seed}");
        }
    }

    #[test]
    fn kmeans_single_center_is_the_mean() {
        let pts = vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 1.0]];
        let m = kmeans(&pts, &KMeansConfig::new(1, 3), Exec::Sequential).unwrap();
        assert!((m.centers[0][0] - 3.0).abs() < 1e-12);
        assert!((m.centers[0][1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_identical_points() {
        let pts = vec![vec![0.25, 0.75]; 6];
        let m = kmeans(&pts, &KMeansConfig::new(1, 0), Exec::Sequential).unwrap();
        assert_eq!(m.history[0].j, 0.0);
        let m = kmeans(&pts, &KMeansConfig::new(3, 0), Exec::Sequential).unwrap();
        assert_eq!(m.history[0].j, 0.0);
    }

    #[test]
    fn kmeans_errors() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(matches!(kmeans(&pts, &KMeansConfig::new(3, 0), Exec::Sequential), Err(Error::InvalidInput(_))));
        assert!(kmeans::<Vec<f64>>(&[], &KMeansConfig::new(1, 0), Exec::Sequential).is_err());
        let ragged = vec![vec![0.0], vec![1.0, 2.0]];
        assert!(matches!(kmeans(&ragged, &KMeansConfig::new(1, 0), Exec::Sequential), Err(Error::DimensionMismatch { .. })));
    }

    fn l(v: i32) -> Letter {
        Letter::new(v).unwrap()
    }

    #[test]
    fn word_with_two_nielsen_reducers_lands_in_no_set() {
        let e = Engine::new(2);
        let ab = w("ab", 2);
        let r = e.nielsen_reducers(&ab);
        let a_to_ab_inv = NielsenAuto { target: 1, side: Side::Right, mult: l(-2) };
        let b_to_a_inv_b = NielsenAuto { target: 2, side: Side::Left, mult: l(-1) };
        assert!(r.contains(&e.catalog().nielsen_id(&a_to_ab_inv).unwrap()));
        assert!(r.contains(&e.catalog().nielsen_id(&b_to_a_inv_b).unwrap()));
        let m = estimate_lambda_centers(&e, &[ab], Exec::Sequential).unwrap();
        assert!(m.centers.iter().all(|c| c.is_empty()));
        assert_eq!(m.centers.len(), 8);
    }

    /// Complexity-1 rank-3 words with exactly one Nielsen reducer.
    fn singly_reducible(e: &Engine) -> Vec<(Word, AutoId)> {
        let cfg = crate::datagen::GenConfig::new(3, 10, 30, 17);
        let corpus = crate::datagen::generate_corpus(&cfg, crate::datagen::CorpusKind::C1, 200, Exec::Sequential).unwrap();
        corpus
            .words()
            .unwrap()
            .into_iter()
            .filter_map(|x| match e.nielsen_reducers(&x).as_slice() {
                [t] => Some((x, *t)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn lambda_centers_are_means() {
        let e = Engine::new(3);
        let sample = singly_reducible(&e);
        assert!(!sample.is_empty());
        let (x, t) = &sample[0];
        let m = estimate_lambda_centers(&e, std::slice::from_ref(x), Exec::Sequential).unwrap();
        let c = &m.centers[t.index()];
        assert_eq!(c.support, 1);
        assert_eq!(c.vector, graph::feature_vector(x).unwrap().0);

        let same: Vec<_> = sample.iter().filter(|(_, u)| u == t).map(|(x, _)| x.clone()).collect();
        let doubled = [same[0].clone(), same[0].rotate(1)];
        let m = estimate_lambda_centers(&e, &doubled, Exec::Sequential).unwrap();
        let f1 = graph::feature_vector(&doubled[0]).unwrap();
        let f2 = graph::feature_vector(&doubled[1]).unwrap();
        let mean: Vec<f64> = f1.0.iter().zip(&f2.0).map(|(a, b)| (a + b) / 2.0).collect();
        assert_eq!(m.centers[t.index()].vector, mean);
        assert_eq!(m.centers[t.index()].support, 2);
    }

    #[test]
    fn ordering_examples() {
        let e = Engine::new(3);
        let sample: Vec<Word> = singly_reducible(&e).into_iter().map(|(x, _)| x).collect();
        let m = estimate_lambda_centers(&e, &sample, Exec::Sequential).unwrap();
        let hit = m.centers.iter().find(|c| !c.is_empty()).unwrap();
        let order = assign_ordering(&FeatureVector(hit.vector.clone()), &m).unwrap();
        assert_eq!(Some(order[0]), hit.auto);
        let mut sorted = order.clone();
        sorted.sort();
        let mut all = enumerate_nielsen(3);
        all.sort();
        assert_eq!(sorted, all);

        let empty = CentroidModel { centers: m.centers.iter().map(|c| Center { vector: vec![], support: 0, ..c.clone() }).collect(), ..m.clone() };
        assert_eq!(assign_ordering(&FeatureVector(hit.vector.clone()), &empty).unwrap(), enumerate_nielsen(3));
        assert!(matches!(assign_ordering(&FeatureVector(vec![0.0; 3]), &m), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn equidistant_centers_break_ties_canonically() {
        let nielsen = enumerate_nielsen(2);
        let model = CentroidModel {
            rank: 2,
            dim: 6,
            edge_order: EDGE_ORDER.into(),
            kind: ModelKind::Lambda,
            centers: vec![
                Center { auto: Some(nielsen[5]), vector: vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0], support: 1 },
                Center { auto: Some(nielsen[2]), vector: vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0], support: 1 },
            ],
            seed: None,
            manifest: None,
        };
        let v = FeatureVector(vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
        let order = assign_ordering(&v, &model).unwrap();
        assert_eq!(&order[..2], &[nielsen[2], nielsen[5]]);
    }

    #[test]
    fn goodness_examples() {
        let e = Engine::new(2);
        let t = NielsenAuto { target: 1, side: Side::Right, mult: l(-2) };
        let cluster = vec![w("ab", 2), w("abab", 2), w("abb", 2)];
        assert_eq!(goodness_r(&e, &cluster, &t).unwrap(), 1.0);
        let minimal = vec![w("a", 2), w("abAB", 2)];
        for u in enumerate_nielsen(2) {
            assert_eq!(goodness_r(&e, &minimal, &u).unwrap(), 0.0);
        }
        assert!(goodness_r(&e, &[], &t).is_err());

        let one = avg_r_max(&e, std::slice::from_ref(&cluster)).unwrap();
        assert_eq!(one.avg_r_max, r_max(&e, &cluster).unwrap().0);
        // R_max 1.0 and 0.5
        let half = vec![w("ab", 2), w("abAB", 2)];
        let two = avg_r_max(&e, &[cluster.clone(), half, vec![]]).unwrap();
        assert_eq!(two.avg_r_max, 0.75);
        assert_eq!(two.empty_clusters, 1);
        assert!(avg_r_max(&e, &[vec![], vec![]]).is_err());
    }

    #[test]
    fn g_max_examples() {
        let e = Engine::new(2);
        assert_eq!(goodness_g_max(&e, &[w("ab", 2)], Exec::Sequential).unwrap(), 1.0);
        assert_eq!(goodness_g_max(&e, &[w("a", 2), w("abAB", 2)], Exec::Sequential).unwrap(), 0.0);
        assert!(goodness_g_max(&e, &[], Exec::Sequential).is_err());
    }

    #[test]
    fn model_file_shape() {
        let e = Engine::new(2);
        let m = estimate_lambda_centers(&e, &[w("aab", 2)], Exec::Sequential).unwrap();
        m.validate().unwrap();
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["rank"], 2);
        assert_eq!(v["dim"], 6);
        assert_eq!(v["edge_order"], "canonical-v1");
        assert_eq!(v["kind"], "lambda");
        assert_eq!(v["centers"][0]["auto"]["kind"], "nielsen");
        assert_eq!(v["centers"][0]["auto"]["target"], 1);
        let back: CentroidModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }
}
