use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vocab::{count_tokens, sort_entries};
use super::{EmbeddingSpace, Provenance, TrainConfig, Vocabulary};
use crate::corpus::TokenizedDoc;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{dot, Scalar};
use crate::seeds::{mix, string_hash};

/// Numerically stable logistic function.
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

fn log_sigmoid<T: Scalar>(x: T) -> T {
    // log σ(x) = −log(1 + e^{−x})
    if x >= T::zero() {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Negative log-likelihood of one (center, context, negatives) group:
/// `−log σ(w·c) − Σ log σ(−w·n)`.
pub fn sgns_loss<T: Scalar>(center: &[T], context: &[T], negatives: &[&[T]]) -> T {
    let mut loss = -log_sigmoid(dot(center, context));
    for n in negatives {
        loss -= log_sigmoid(-dot(center, n));
    }
    loss
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsGradients<T> {
    pub center: Vec<T>,
    pub context: Vec<T>,
    pub negatives: Vec<Vec<T>>,
}

/// `label − σ(f)`: the log-likelihood derivative with respect to the score.
#[inline]
fn score_coefficient<T: Scalar>(f: T, label: T) -> T {
    label - sigmoid(f)
}

/// Analytic gradients of [`sgns_loss`].
pub fn sgns_gradients<T: Scalar>(center: &[T], context: &[T], negatives: &[&[T]]) -> SgnsGradients<T> {
    let dim = center.len();
    let mut g_center = vec![T::zero(); dim];
    let pos = -score_coefficient(dot(center, context), T::one());
    for (g, &c) in g_center.iter_mut().zip(context) {
        *g += pos * c;
    }
    let g_context = center.iter().map(|&w| pos * w).collect();
    let mut g_neg = Vec::with_capacity(negatives.len());
    for n in negatives {
        let coef = -score_coefficient(dot(center, n), T::zero());
        for (g, &x) in g_center.iter_mut().zip(n.iter()) {
            *g += coef * x;
        }
        g_neg.push(center.iter().map(|&w| coef * w).collect());
    }
    SgnsGradients {
        center: g_center,
        context: g_context,
        negatives: g_neg,
    }
}

/// Draws word indices with probability proportional to `count^power`.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(counts: &[u64], power: f64) -> Result<Self> {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = counts
            .iter()
            .map(|&c| {
                if c > 0 {
                    acc += (c as f64).powf(power);
                }
                acc
            })
            .collect();
        if acc <= 0.0 {
            return Err(Error::EmptyVocabulary);
        }
        Ok(NegativeSampler { cumulative })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = *self.cumulative.last().expect("non-empty");
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = (c - prev) / total;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let u = rng.random::<f64>() * total;
        // first index whose cumulative weight exceeds u
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Random initial vector for `word`: uniform in ±0.5/dim, seeded by the word
/// itself so that it does not depend on vocabulary order.
fn init_vector<T: Scalar>(seed: u64, word: &str, dim: usize) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, string_hash(word)));
    let scale = 1.0 / dim as f64;
    (0..dim).map(|_| T::of((rng.random::<f64>() - 0.5) * scale)).collect()
}

/// Input and output weights during training.
struct Weights<T> {
    dim: usize,
    input: Vec<T>,
    output: Vec<T>,
}

impl<T: Scalar> Weights<T> {
    fn fresh(vocab: &Vocabulary, dim: usize, seed: u64) -> Self {
        let mut input = Vec::with_capacity(vocab.len() * dim);
        for w in vocab.words() {
            input.extend(init_vector::<T>(seed, w, dim));
        }
        Weights {
            dim,
            input,
            output: vec![T::zero(); vocab.len() * dim],
        }
    }

    /// One SGD step on a (center, context) pair with the given negatives,
    /// applied as `θ ← θ − lr·∇loss` for all touched rows simultaneously.
    fn step(&mut self, center: usize, context: usize, negatives: &[usize], lr: T) -> Option<()> {
        let dim = self.dim;
        let mut grad_in = vec![T::zero(); dim];
        let c0 = center * dim;
        let targets = std::iter::once((context, T::one())).chain(negatives.iter().map(|&n| (n, T::zero())));
        for (target, label) in targets {
            if label == T::zero() && target == context {
                continue;
            }
            let t0 = target * dim;
            let f = dot(&self.input[c0..c0 + dim], &self.output[t0..t0 + dim]);
            if !f.is_finite() {
                return None;
            }
            let g = score_coefficient(f, label) * lr;
            for k in 0..dim {
                grad_in[k] += g * self.output[t0 + k];
                self.output[t0 + k] += g * self.input[c0 + k];
            }
        }
        for (w, g) in self.input[c0..c0 + dim].iter_mut().zip(&grad_in) {
            *w += *g;
        }
        Some(())
    }
}

fn encode<D: AsRef<TokenizedDoc>>(docs: &[D], vocab: &Vocabulary) -> Vec<Vec<usize>> {
    docs.iter()
        .map(|d| d.as_ref().tokens.iter().filter_map(|t| vocab.index_of(t)).collect())
        .collect()
}

fn run_epochs<T: Scalar>(
    weights: &mut Weights<T>,
    streams: &[Vec<usize>],
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<()> {
    config.validate()?;
    let sampler = NegativeSampler::new(vocab.counts(), config.unigram_power)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let keep_prob: Option<Vec<f64>> = (config.subsample_threshold > 0.0).then(|| {
        let total: f64 = vocab.counts().iter().sum::<u64>() as f64;
        let t = config.subsample_threshold * total;
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let c = c as f64;
                if c == 0.0 {
                    1.0
                } else {
                    (((c / t).sqrt() + 1.0) * t / c).min(1.0)
                }
            })
            .collect()
    });

    let per_epoch: u64 = streams.iter().map(|s| s.len() as u64).sum();
    let total_work = (per_epoch * config.epochs as u64).max(1) as f64;
    let mut processed: u64 = 0;
    let mut negatives = vec![0usize; config.negative];
    let mut sentence = Vec::new();

    for _ in 0..config.epochs {
        for stream in streams {
            sentence.clear();
            match &keep_prob {
                Some(keep) => sentence.extend(stream.iter().copied().filter(|&w| rng.random::<f64>() < keep[w])),
                None => sentence.extend_from_slice(stream),
            }
            let lr_at = |processed: u64| {
                let progress = processed as f64 / total_work;
                (config.initial_lr - (config.initial_lr - config.min_lr) * progress).max(config.min_lr)
            };
            for pos in 0..sentence.len() {
                let lr = lr_at(processed + (pos as u64 * stream.len() as u64) / sentence.len().max(1) as u64);
                let span = if config.fixed_window {
                    config.window
                } else {
                    config.window - rng.random_range(0..config.window)
                };
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(sentence.len() - 1);
                for ctx in lo..=hi {
                    if ctx == pos {
                        continue;
                    }
                    for n in negatives.iter_mut() {
                        *n = sampler.sample(&mut rng);
                    }
                    weights
                        .step(sentence[pos], sentence[ctx], &negatives, T::of(lr))
                        .ok_or(Error::NonFinite { lr, step: processed })?;
                }
            }
            processed += stream.len() as u64;
        }
    }
    if weights.input.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            lr: config.min_lr,
            step: processed,
        });
    }
    Ok(())
}

/// Trains one bin's space from a fresh random initialization.
///
/// Each document is its own sentence stream; windows never cross documents.
pub fn train_sgns<T: Scalar, D: AsRef<TokenizedDoc>>(
    label: &str,
    docs: &[D],
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<EmbeddingSpace<T>> {
    config.validate()?;
    let mut weights = Weights::<T>::fresh(vocab, config.dim, config.seed);
    let streams = encode(docs, vocab);
    run_epochs(&mut weights, &streams, vocab, config)?;
    let vectors = Matrix::from_vec(vocab.len(), config.dim, weights.input)?;
    EmbeddingSpace::new(label, vocab.clone(), vectors, config.clone(), Provenance::Independent)
}

/// Time-forward training: each bin starts from the previous bin's weights.
///
/// Words seen before keep their input and output vectors; new words get the
/// usual seeded random initialization. Inherited words stay in the vocabulary
/// even when they fall below `min_count` in a later bin. The learning-rate
/// schedule restarts for every bin.
pub fn train_incremental<T: Scalar, D: AsRef<TokenizedDoc>>(
    bins: &[(String, Vec<D>)],
    config: &TrainConfig,
) -> Result<Vec<EmbeddingSpace<T>>> {
    config.validate()?;
    let dim = config.dim;
    let mut carried: HashMap<String, (Vec<T>, Vec<T>)> = HashMap::new();
    let mut spaces = Vec::with_capacity(bins.len());
    let mut previous: Option<&str> = None;

    for (label, docs) in bins {
        let (counts, total) = count_tokens(docs);
        let mut entries: Vec<(String, u64)> = counts
            .iter()
            .filter(|&(w, &c)| c >= config.min_count || carried.contains_key(*w))
            .map(|(&w, &c)| (w.to_owned(), c))
            .collect();
        for w in carried.keys() {
            if !counts.contains_key(w.as_str()) {
                entries.push((w.clone(), 0));
            }
        }
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        sort_entries(&mut entries);
        let vocab = Vocabulary::with_total(entries, total)?;

        let mut weights = Weights::<T>::fresh(&vocab, dim, config.seed);
        for (i, w) in vocab.words().iter().enumerate() {
            if let Some((input, output)) = carried.get(w) {
                weights.input[i * dim..(i + 1) * dim].copy_from_slice(input);
                weights.output[i * dim..(i + 1) * dim].copy_from_slice(output);
            }
        }
        let streams = encode(docs, &vocab);
        run_epochs(&mut weights, &streams, &vocab, config)?;

        carried = vocab
            .words()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let r = i * dim..(i + 1) * dim;
                (
                    w.clone(),
                    (weights.input[r.clone()].to_vec(), weights.output[r].to_vec()),
                )
            })
            .collect();
        let provenance = match previous {
            None => Provenance::Independent,
            Some(p) => Provenance::IncrementalFrom { label: p.to_owned() },
        };
        let vectors = Matrix::from_vec(vocab.len(), dim, weights.input)?;
        spaces.push(EmbeddingSpace::new(
            label.clone(),
            vocab,
            vectors,
            config.clone(),
            provenance,
        )?);
        previous = Some(label);
    }
    Ok(spaces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::build_vocab;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert!(sigmoid(-800.0f64) >= 0.0);
        assert_eq!(sigmoid(800.0f64), 1.0);
        assert!((log_sigmoid(-800.0f64) + 800.0).abs() < 1e-9);
    }

    #[test]
    fn step_is_gradient_descent() {
        let dim = 4;
        let mut w = Weights::<f64> {
            dim,
            input: (0..3 * dim).map(|i| 0.1 * (i as f64).sin()).collect(),
            output: (0..3 * dim).map(|i| 0.2 * (i as f64 * 0.7).cos()).collect(),
        };
        let row = |v: &Vec<f64>, i: usize| v[i * dim..(i + 1) * dim].to_vec();
        let (c, ctx, neg) = (0, 1, 2);
        let grads = sgns_gradients(&row(&w.input, c), &row(&w.output, ctx), &[&row(&w.output, neg)]);
        let before = (row(&w.input, c), row(&w.output, ctx), row(&w.output, neg));
        let lr = 0.05;
        w.step(c, ctx, &[neg], lr).unwrap();
        for k in 0..dim {
            assert!((row(&w.input, c)[k] - (before.0[k] - lr * grads.center[k])).abs() < 1e-15);
            assert!((row(&w.output, ctx)[k] - (before.1[k] - lr * grads.context[k])).abs() < 1e-15);
            assert!((row(&w.output, neg)[k] - (before.2[k] - lr * grads.negatives[0][k])).abs() < 1e-15);
        }
    }

    #[test]
    fn sampler_skips_zero_counts() {
        let s = NegativeSampler::new(&[0, 4, 0, 1], 1.0).unwrap();
        assert_eq!(s.probabilities(), vec![0.0, 0.8, 0.0, 0.2]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let i = s.sample(&mut rng);
            assert!(i == 1 || i == 3);
        }
        assert!(NegativeSampler::new(&[0, 0], 0.75).is_err());
    }

    #[test]
    fn init_independent_of_order() {
        let a: Vec<f64> = init_vector(7, "crime", 8);
        let b: Vec<f64> = init_vector(7, "crime", 8);
        let c: Vec<f64> = init_vector(7, "mercy", 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|x| x.abs() <= 0.5 / 8.0));
    }

    #[test]
    fn non_finite_aborts() {
        let doc = TokenizedDoc {
            id: "d".into(),
            year: 1800,
            tokens: "a b a b a b".split(' ').map(String::from).collect(),
        };
        let vocab = build_vocab(&[&doc], 1).unwrap();
        let config = TrainConfig {
            dim: 4,
            min_count: 1,
            initial_lr: 1e300,
            min_lr: 1e300,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train_sgns::<f64, _>("x", &[&doc], &vocab, &config),
            Err(Error::NonFinite { .. })
        ));
    }
}
