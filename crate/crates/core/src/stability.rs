//! Split-half noise floors, baseline-corrected drift and multi-seed spread.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::{apply_alignment, procrustes_align};
use crate::corpus::TokenizedDoc;
use crate::drift::{cosine_drift, csv_err, Span};
use crate::embeddings::{build_vocab, train_incremental, train_sgns, EmbeddingSpace, TrainConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeds::mix;

pub const SPLITHALF_HEADER: [&str; 5] = ["bin", "word", "n_effective", "mean", "std"];
pub const NETDRIFT_HEADER: [&str; 8] = ["word", "start", "end", "observed", "baseline", "net", "pooled_std", "z"];
pub const SEED_VARIANCE_HEADER: [&str; 6] = ["word", "start", "end", "n_seeds", "mean", "std"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitHalfOptions {
    pub n_repeats: usize,
    pub rng_seed: u64,
    /// Train both halves with the same seed (identical-data controls).
    pub shared_seed: bool,
}

impl Default for SplitHalfOptions {
    fn default() -> Self {
        SplitHalfOptions {
            n_repeats: 20,
            rng_seed: 7,
            shared_seed: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitHalfStat {
    pub bin_label: String,
    pub word: String,
    pub n_repeats: usize,
    /// Repeats in which the word survived `min_count` in both halves.
    pub n_effective: usize,
    pub mean_drift: Option<f64>,
    pub std_drift: Option<f64>,
    pub drifts: Vec<f64>,
}

/// Sample mean and sample standard deviation (`n − 1`); std is `None` below two values.
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.len() >= 2).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(mean), std)
}

/// Training seeds for both halves of repeat `repeat`.
pub fn half_seeds(rng_seed: u64, repeat: usize) -> (u64, u64) {
    let r = mix(rng_seed, repeat as u64);
    (mix(r, 0), mix(r, 1))
}

/// Random equal halves of `0..n_docs`; with an odd count the leftover
/// document goes to the first half on even repeats and the second on odd ones.
pub fn partition_halves(n_docs: usize, repeat: usize, rng_seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n_docs).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(rng_seed, repeat as u64));
    idx.shuffle(&mut rng);
    let half = n_docs / 2;
    let mut a = idx[..half].to_vec();
    let mut b = idx[half..2 * half].to_vec();
    if n_docs % 2 == 1 {
        if repeat.is_multiple_of(2) {
            a.push(idx[n_docs - 1]);
        } else {
            b.push(idx[n_docs - 1]);
        }
    }
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

/// Halves for a corpus laid out as consecutive duplicate pairs
/// `[d0, d0', d1, d1', ...]`: pairs are shuffled and each half receives one
/// copy of every pair in the same order, so both halves hold identical text.
pub fn paired_halves(n_docs: usize, repeat: usize, rng_seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut pairs: Vec<usize> = (0..n_docs / 2).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(rng_seed, repeat as u64));
    pairs.shuffle(&mut rng);
    (
        pairs.iter().map(|p| 2 * p).collect(),
        pairs.iter().map(|p| 2 * p + 1).collect(),
    )
}

/// Drift between the two halves' spaces (B aligned onto A) for each target;
/// `None` where a target is missing from either half.
pub fn half_pair_drift<T: Scalar, D: AsRef<TokenizedDoc>>(
    half_a: &[D],
    half_b: &[D],
    targets: &[String],
    config: &TrainConfig,
    seeds: (u64, u64),
) -> Result<Vec<Option<f64>>> {
    let train = |docs: &[D], seed: u64, label: &str| -> Result<Option<EmbeddingSpace<T>>> {
        let vocab = match build_vocab(docs, config.min_count) {
            Ok(v) => v,
            Err(Error::EmptyVocabulary) | Err(Error::NoDocuments) => return Ok(None),
            Err(e) => return Err(e),
        };
        let cfg = TrainConfig { seed, ..config.clone() };
        train_sgns(label, docs, &vocab, &cfg).map(Some)
    };
    let (Some(a), Some(mut b)) = (train(half_a, seeds.0, "half-a")?, train(half_b, seeds.1, "half-b")?) else {
        return Ok(vec![None; targets.len()]);
    };
    // Distinct half seeds are deliberate here; skip the mismatch warning.
    b.config.seed = a.config.seed;
    let map = procrustes_align(&a, &b)?;
    let b = apply_alignment(&map, &b)?;
    Ok(targets.iter().map(|w| cosine_drift(&a, &b, w).ok()).collect())
}

/// Split-half drift with random document-level halves.
pub fn split_half_drift<T: Scalar, D: AsRef<TokenizedDoc>>(
    bin_label: &str,
    docs: &[D],
    targets: &[String],
    config: &TrainConfig,
    opts: &SplitHalfOptions,
) -> Result<Vec<SplitHalfStat>> {
    split_half_drift_with::<T, D, _>(bin_label, docs, targets, config, opts, |repeat| {
        partition_halves(docs.len(), repeat, opts.rng_seed)
    })
}

/// Split-half drift with caller-chosen halves (`partition(repeat)` returns
/// the document indices of each half).
pub fn split_half_drift_with<T, D, P>(
    bin_label: &str,
    docs: &[D],
    targets: &[String],
    config: &TrainConfig,
    opts: &SplitHalfOptions,
    partition: P,
) -> Result<Vec<SplitHalfStat>>
where
    T: Scalar,
    D: AsRef<TokenizedDoc>,
    P: Fn(usize) -> (Vec<usize>, Vec<usize>),
{
    if docs.len() < 2 {
        return Err(Error::invalid(format!(
            "bin {bin_label} needs at least two documents to split"
        )));
    }
    if targets.is_empty() {
        return Err(Error::invalid("split-half needs at least one target"));
    }
    if opts.n_repeats == 0 {
        return Err(Error::invalid("split-half needs at least one repeat"));
    }
    let mut per_word: Vec<Vec<f64>> = vec![Vec::new(); targets.len()];
    for repeat in 0..opts.n_repeats {
        let (ia, ib) = partition(repeat);
        let half_a: Vec<&TokenizedDoc> = ia.iter().map(|&i| docs[i].as_ref()).collect();
        let half_b: Vec<&TokenizedDoc> = ib.iter().map(|&i| docs[i].as_ref()).collect();
        let mut seeds = half_seeds(opts.rng_seed, repeat);
        if opts.shared_seed {
            seeds.1 = seeds.0;
        }
        let drifts = half_pair_drift::<T, _>(&half_a, &half_b, targets, config, seeds)?;
        for (acc, d) in per_word.iter_mut().zip(drifts) {
            acc.extend(d);
        }
    }
    Ok(targets
        .iter()
        .zip(per_word)
        .map(|(w, drifts)| {
            let (mean, std) = mean_std(&drifts);
            SplitHalfStat {
                bin_label: bin_label.to_owned(),
                word: w.clone(),
                n_repeats: opts.n_repeats,
                n_effective: drifts.len(),
                mean_drift: mean,
                std_drift: std,
                drifts,
            }
        })
        .collect())
}

/// How the start- and end-bin split-half baselines are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineRule {
    /// Mean of the two bin means; root-mean-square of the two stds.
    #[default]
    Average,
    StartOnly,
    EndOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetDriftRecord {
    pub word: String,
    pub start_label: String,
    pub end_label: String,
    pub observed_drift: f64,
    pub baseline_mean: f64,
    pub net: f64,
    pub pooled_std: f64,
    /// `None` when the pooled std is zero.
    pub z: Option<f64>,
    pub rule: BaselineRule,
}

fn usable(stat: &SplitHalfStat) -> Result<(f64, f64)> {
    match (stat.n_effective >= 2, stat.mean_drift, stat.std_drift) {
        (true, Some(m), Some(s)) => Ok((m, s)),
        _ => Err(Error::invalid(format!(
            "split-half baseline for {} in {} has {} effective repeats (need >= 2)",
            stat.word, stat.bin_label, stat.n_effective
        ))),
    }
}

/// Observed drift minus the split-half baseline, and its standardized size.
pub fn net_drift(
    observed: f64,
    span: &Span,
    start: &SplitHalfStat,
    end: &SplitHalfStat,
    rule: BaselineRule,
) -> Result<NetDriftRecord> {
    let (baseline_mean, pooled_std) = match rule {
        BaselineRule::Average => {
            let (ms, ss) = usable(start)?;
            let (me, se) = usable(end)?;
            ((ms + me) / 2.0, ((ss * ss + se * se) / 2.0).sqrt())
        }
        BaselineRule::StartOnly => usable(start)?,
        BaselineRule::EndOnly => usable(end)?,
    };
    let net = observed - baseline_mean;
    let z = if pooled_std > 0.0 {
        Some(net / pooled_std)
    } else {
        log::warn!("pooled split-half std is zero for {}; z undefined", start.word);
        None
    };
    Ok(NetDriftRecord {
        word: start.word.clone(),
        start_label: span.start.clone(),
        end_label: span.end.clone(),
        observed_drift: observed,
        baseline_mean,
        net,
        pooled_std,
        z,
        rule,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedVariance {
    pub word: String,
    pub span: Span,
    pub mean_drift: f64,
    pub std_drift: Option<f64>,
    pub n_seeds: usize,
}

/// Mean and sample std of one word's drift across training seeds.
pub fn seed_variance(drift_runs: &[f64], word: &str, span: &Span) -> Result<SeedVariance> {
    let (mean, std) = mean_std(drift_runs);
    let mean = mean.ok_or_else(|| Error::invalid("seed variance needs at least one run"))?;
    Ok(SeedVariance {
        word: word.to_owned(),
        span: span.clone(),
        mean_drift: mean,
        std_drift: std,
        n_seeds: drift_runs.len(),
    })
}

/// Trains the incremental chain once per seed and summarizes each target's
/// drift between snapshots. Snapshots of one chain share a coordinate system,
/// so drift is measured without Procrustes alignment.
pub fn incremental_seed_variance<T: Scalar, D: AsRef<TokenizedDoc>>(
    bins: &[(String, Vec<D>)],
    targets: &[String],
    spans: &[Span],
    config: &TrainConfig,
    seeds: &[u64],
) -> Result<Vec<SeedVariance>> {
    let mut runs: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); spans.len()]; targets.len()];
    for &seed in seeds {
        let cfg = TrainConfig { seed, ..config.clone() };
        let snapshots = train_incremental::<T, D>(bins, &cfg)?;
        let find = |label: &str| {
            snapshots
                .iter()
                .find(|s| s.label == label)
                .ok_or_else(|| Error::invalid(format!("incremental chain has no bin {label}")))
        };
        for (si, span) in spans.iter().enumerate() {
            let (a, b) = (find(&span.start)?, find(&span.end)?);
            for (ti, w) in targets.iter().enumerate() {
                if let Ok(d) = cosine_drift(a, b, w) {
                    runs[ti][si].push(d);
                }
            }
        }
    }
    let mut out = Vec::new();
    for (ti, w) in targets.iter().enumerate() {
        for (si, span) in spans.iter().enumerate() {
            if !runs[ti][si].is_empty() {
                out.push(seed_variance(&runs[ti][si], w, span)?);
            }
        }
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn write_splithalf_csv<W: Write>(stats: &[SplitHalfStat], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SPLITHALF_HEADER).map_err(csv_err)?;
    for s in stats {
        w.write_record([
            s.bin_label.as_str(),
            s.word.as_str(),
            &s.n_effective.to_string(),
            &opt(s.mean_drift),
            &opt(s.std_drift),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_netdrift_csv<W: Write>(records: &[NetDriftRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NETDRIFT_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.word.as_str(),
            r.start_label.as_str(),
            r.end_label.as_str(),
            &format!("{:.6}", r.observed_drift),
            &format!("{:.6}", r.baseline_mean),
            &format!("{:.6}", r.net),
            &format!("{:.6}", r.pooled_std),
            &opt(r.z),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_seed_variance_csv<W: Write>(records: &[SeedVariance], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SEED_VARIANCE_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.word.as_str(),
            r.span.start.as_str(),
            r.span.end.as_str(),
            &r.n_seeds.to_string(),
            &format!("{:.6}", r.mean_drift),
            &opt(r.std_drift),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
