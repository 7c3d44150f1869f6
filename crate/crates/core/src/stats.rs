//! Strategy comparison: step counts per strategy, Nielsen-reducible fractions
//! with confidence intervals, and length/step correlations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, Search, Strategy};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::word::Word;

/// Per-word result of one strategy run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordRecord {
    pub id: usize,
    pub strategy: String,
    pub length: usize,
    pub final_length: usize,
    pub total_steps: usize,
    pub reducing_steps: usize,
    /// Mean steps over this word's successful reducer searches.
    pub mean_lrp: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub strategy: String,
    pub words: usize,
    /// Mean total automorphism applications per word.
    pub n_total: f64,
    /// Mean length-reducing steps per word.
    pub n_red: f64,
    /// Mean applications per successful reducer search, pooled over all searches.
    pub n_lrp: f64,
    pub searches: usize,
    /// Pearson r between word length and per-word mean search steps.
    pub length_lrp_r: f64,
    pub length_lrp_degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rank: u32,
    pub words: usize,
    pub avg_length: f64,
    pub rows: Vec<StrategyRow>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<WordRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

impl BenchReport {
    pub fn row(&self, strategy: &str) -> Option<&StrategyRow> {
        self.rows.iter().find(|r| r.strategy == strategy)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("strategy,n_total,n_red,n_lrp,length_lrp_r\n");
        for r in &self.rows {
            writeln!(s, "{},{:.3},{:.3},{:.3},{:.4}", r.strategy, r.n_total, r.n_red, r.n_lrp, r.length_lrp_r).unwrap();
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "F{}: {} words, average length {:.1}\n\n",
            self.rank, self.words, self.avg_length
        );
        s.push_str("| Strategy | N_total | N_red | N_LRP |\n|:---|---:|---:|---:|\n");
        for r in &self.rows {
            writeln!(s, "| {} | {:.1} | {:.1} | {:.2} |", r.strategy, r.n_total, r.n_red, r.n_lrp).unwrap();
        }
        s.push_str("\n| Strategy | r(length, N_LRP) |\n|:---|---:|\n");
        for r in &self.rows {
            let flag = if r.length_lrp_degenerate { " (zero variance)" } else { "" };
            writeln!(s, "| {} | {:.3}{} |", r.strategy, r.length_lrp_r, flag).unwrap();
        }
        for n in &self.notes {
            writeln!(s, "\n_{n}_").unwrap();
        }
        s
    }
}

/// Runs every strategy on every word. Word `i` uses search stream `i`, so the
/// report does not depend on scheduling.
pub fn run_strategy_benchmark(
    engine: &Engine,
    corpus: &[Word],
    strategies: &[Strategy],
    exec: Exec,
    keep_records: bool,
) -> Result<BenchReport> {
    if let Some(w) = corpus.iter().find(|w| w.rank() != engine.rank()) {
        return Err(Error::RankMismatch { expected: engine.rank(), found: w.rank() });
    }
    for s in strategies {
        if let Strategy::Centroid(m) = s {
            if m.rank != engine.rank() {
                return Err(Error::RankMismatch { expected: engine.rank(), found: m.rank });
            }
        }
    }
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for s in strategies {
        let runs = par::map(exec, corpus, |i, w| {
            let mut search = Search::new(s, i as u64);
            engine.whitehead_reduce_with(w, &mut search).map(|r| (w.cyclic_reduce().len(), r))
        });
        let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
        let n = runs.len().max(1) as f64;
        let searches: usize = runs.iter().map(|(_, r)| r.metrics.reducing_steps).sum();
        let search_steps: usize = runs.iter().map(|(_, r)| r.metrics.successful_lrp_steps().iter().sum::<usize>()).sum();
        let pairs: Vec<(f64, f64)> = runs
            .iter()
            .filter_map(|(len, r)| r.metrics.mean_lrp().map(|m| (*len as f64, m)))
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let corr = if xs.len() >= 2 { pearson_correlation(&xs, &ys)? } else { Correlation { r: 0.0, degenerate: true } };
        rows.push(StrategyRow {
            strategy: s.label().to_string(),
            words: runs.len(),
            n_total: runs.iter().map(|(_, r)| r.metrics.total_steps).sum::<usize>() as f64 / n,
            n_red: runs.iter().map(|(_, r)| r.metrics.reducing_steps).sum::<usize>() as f64 / n,
            n_lrp: if searches == 0 { 0.0 } else { search_steps as f64 / searches as f64 },
            searches,
            length_lrp_r: corr.r,
            length_lrp_degenerate: corr.degenerate,
        });
        if keep_records {
            records.extend(runs.iter().enumerate().map(|(i, (len, r))| WordRecord {
                id: i,
                strategy: s.label().to_string(),
                length: *len,
                final_length: r.word.len(),
                total_steps: r.metrics.total_steps,
                reducing_steps: r.metrics.reducing_steps,
                mean_lrp: r.metrics.mean_lrp(),
            }));
        }
    }
    let avg_length = corpus.iter().map(Word::len).sum::<usize>() as f64 / corpus.len().max(1) as f64;
    Ok(BenchReport {
        rank: engine.rank(),
        words: corpus.len(),
        avg_length,
        rows,
        notes: vec![
            "N_LRP pools successful searches; correlations use each word's mean search steps.".into(),
            "Runs stop at length 1 without a final certification sweep.".into(),
        ],
        records,
        manifest: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    Normal,
    Wilson,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub n: usize,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

const Z95: f64 = 1.96;

/// 95% interval for a proportion `p` observed on `n` trials.
pub fn confidence_interval(p: f64, n: usize, method: CiMethod) -> (f64, f64) {
    let n = n as f64;
    match method {
        CiMethod::Normal => {
            let half = Z95 * (p * (1.0 - p) / n).sqrt();
            (p - half, p + half)
        }
        CiMethod::Wilson => {
            let z2 = Z95 * Z95;
            let denom = 1.0 + z2 / n;
            let center = (p + z2 / (2.0 * n)) / denom;
            let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
            (center - half, center + half)
        }
    }
}

/// Fraction of words shortened by at least one Nielsen automorphism.
pub fn nielsen_reducible_fraction(engine: &Engine, corpus: &[Word], method: CiMethod, exec: Exec) -> Result<Proportion> {
    if corpus.is_empty() {
        return Err(Error::Empty("Nielsen-reducible fraction"));
    }
    if let Some(w) = corpus.iter().find(|w| w.rank() != engine.rank()) {
        return Err(Error::RankMismatch { expected: engine.rank(), found: w.rank() });
    }
    let hits = par::map(exec, corpus, |_, w| {
        let w = w.cyclic_reduce();
        let mut buf = Vec::new();
        engine.catalog().nielsen_ids().any(|id| engine.reduces(id, &w, &mut buf))
    });
    let p = hits.iter().filter(|&&h| h).count() as f64 / corpus.len() as f64;
    let (lo, hi) = confidence_interval(p, corpus.len(), method);
    Ok(Proportion { n: corpus.len(), fraction: p, ci_low: lo, ci_high: hi })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    /// Set when either series has zero variance; `r` is then 0.
    pub degenerate: bool,
}

/// Sample Pearson correlation.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput("correlation needs at least two pairs".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation { r: 0.0, degenerate: true });
    }
    Ok(Correlation { r: (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0), degenerate: false })
}
