//! Synthetic dated corpora with planted semantic drift.
//!
//! Documents are sequences of short windows. Every window draws its words
//! from a single topic; some windows carry one tracked word at the center,
//! and the topic of those windows follows the word's schedule. A drift word
//! moves from its source topic to its target topic across bins while a
//! control word always stays with its topic.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::seeds::mix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// Source probability falls linearly from 1 in the first bin to 0 in the last.
    Linear,
    /// Source probability 1 in the first half of the bins, 0 afterwards.
    Step,
}

impl Schedule {
    /// Probability of drawing a context from the source topic in each bin.
    pub fn source_probabilities(self, n_bins: usize) -> Vec<f64> {
        if n_bins <= 1 {
            return vec![1.0; n_bins];
        }
        (0..n_bins)
            .map(|b| match self {
                Schedule::Linear => 1.0 - b as f64 / (n_bins - 1) as f64,
                Schedule::Step => {
                    if (b as f64) < n_bins as f64 / 2.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub name: String,
    pub words: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftWord {
    pub word: String,
    pub source: String,
    pub target: String,
    pub schedule: Schedule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlWord {
    pub word: String,
    pub topic: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_bins: usize,
    pub docs_per_bin: usize,
    pub tokens_per_doc: usize,
    /// Tokens per generated window.
    pub window_len: usize,
    /// Probability that a window carries a drift or control word.
    pub tracked_rate: f64,
    pub start_year: i32,
    pub years_per_bin: i32,
    pub topics: Vec<Topic>,
    pub drift_words: Vec<DriftWord>,
    pub control_words: Vec<ControlWord>,
    pub rng_seed: u64,
}

impl Default for SynthSpec {
    /// Desk-scale setup: 3 bins × 2,000 documents × 200 tokens, six topics
    /// of 25 words, three drift words and three control words.
    fn default() -> Self {
        let topics: Vec<Topic> = (0..6)
            .map(|t| Topic {
                name: format!("t{t}"),
                words: (0..25).map(|i| format!("t{t}w{i:02}")).collect(),
            })
            .collect();
        let drift_words = (0..3)
            .map(|i| DriftWord {
                word: format!("drift{i}"),
                source: format!("t{}", 2 * i),
                target: format!("t{}", 2 * i + 1),
                schedule: Schedule::Linear,
            })
            .collect();
        let control_words = (0..3)
            .map(|i| ControlWord {
                word: format!("control{i}"),
                topic: format!("t{}", 2 * i),
            })
            .collect();
        SynthSpec {
            n_bins: 3,
            docs_per_bin: 2000,
            tokens_per_doc: 200,
            window_len: 10,
            tracked_rate: 0.5,
            start_year: 1800,
            years_per_bin: 10,
            topics,
            drift_words,
            control_words,
            rng_seed: 1,
        }
    }
}

impl SynthSpec {
    /// Collects every violation rather than stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_bins == 0 {
            problems.push("n_bins must be >= 1".to_owned());
        }
        if self.docs_per_bin == 0 {
            problems.push("docs_per_bin must be >= 1".to_owned());
        }
        if self.tokens_per_doc == 0 {
            problems.push("tokens_per_doc must be >= 1".to_owned());
        }
        if self.window_len < 2 {
            problems.push("window_len must be >= 2".to_owned());
        }
        if !(0.0..=1.0).contains(&self.tracked_rate) {
            problems.push("tracked_rate must lie in [0, 1]".to_owned());
        }
        if self.years_per_bin < 1 {
            problems.push("years_per_bin must be >= 1".to_owned());
        }
        if self.topics.is_empty() {
            problems.push("at least one topic is required".to_owned());
        }
        let mut names = HashSet::new();
        let mut members: HashSet<&str> = HashSet::new();
        for t in &self.topics {
            if !names.insert(t.name.as_str()) {
                problems.push(format!("duplicate topic name {}", t.name));
            }
            if t.words.is_empty() {
                problems.push(format!("topic {} has no words", t.name));
            }
            for w in &t.words {
                if !members.insert(w.as_str()) {
                    problems.push(format!("word {w} appears in more than one topic"));
                }
            }
        }
        let mut tracked = HashSet::new();
        let mut check_word = |w: &str, problems: &mut Vec<String>| {
            if members.contains(w) {
                problems.push(format!("tracked word {w} is also a topic member"));
            }
            if !tracked.insert(w.to_owned()) {
                problems.push(format!("tracked word {w} is listed twice"));
            }
        };
        for d in &self.drift_words {
            check_word(&d.word, &mut problems);
            for t in [&d.source, &d.target] {
                if !names.contains(t.as_str()) {
                    problems.push(format!("drift word {} references unknown topic {t}", d.word));
                }
            }
            if d.source == d.target {
                problems.push(format!("drift word {} has identical source and target", d.word));
            }
        }
        for c in &self.control_words {
            check_word(&c.word, &mut problems);
            if !names.contains(c.topic.as_str()) {
                problems.push(format!("control word {} references unknown topic {}", c.word, c.topic));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(problems))
        }
    }

    pub fn bin_start_year(&self, bin: usize) -> i32 {
        self.start_year + bin as i32 * self.years_per_bin
    }
}

/// Planted structure, written next to the corpus as `ground_truth.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub bin_start_years: Vec<i32>,
    pub drift_words: Vec<DriftTruth>,
    pub control_words: Vec<ControlWord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftTruth {
    pub word: String,
    pub source: String,
    pub target: String,
    pub schedule: Schedule,
    pub source_probability: Vec<f64>,
}

pub fn ground_truth(spec: &SynthSpec) -> GroundTruth {
    GroundTruth {
        bin_start_years: (0..spec.n_bins).map(|b| spec.bin_start_year(b)).collect(),
        drift_words: spec
            .drift_words
            .iter()
            .map(|d| DriftTruth {
                word: d.word.clone(),
                source: d.source.clone(),
                target: d.target.clone(),
                schedule: d.schedule,
                source_probability: d.schedule.source_probabilities(spec.n_bins),
            })
            .collect(),
        control_words: spec.control_words.clone(),
    }
}

enum Tracked<'a> {
    Drift(&'a DriftWord, &'a [f64]),
    Control(&'a ControlWord),
}

/// Generates `n_bins × docs_per_bin` documents ordered by `(year, id)`.
/// Each document uses its own seed derived from `rng_seed` and its global
/// index, so output does not depend on generation order.
pub fn generate(spec: &SynthSpec) -> Result<Vec<Document>> {
    spec.validate()?;
    let topics: BTreeMap<&str, &[String]> = spec
        .topics
        .iter()
        .map(|t| (t.name.as_str(), t.words.as_slice()))
        .collect();
    let schedules: Vec<Vec<f64>> = spec
        .drift_words
        .iter()
        .map(|d| d.schedule.source_probabilities(spec.n_bins))
        .collect();
    let tracked: Vec<Tracked> = spec
        .drift_words
        .iter()
        .zip(&schedules)
        .map(|(d, p)| Tracked::Drift(d, p))
        .chain(spec.control_words.iter().map(Tracked::Control))
        .collect();

    let mut docs = Vec::with_capacity(spec.n_bins * spec.docs_per_bin);
    for bin in 0..spec.n_bins {
        for d in 0..spec.docs_per_bin {
            let global = (bin * spec.docs_per_bin + d) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(mix(spec.rng_seed, global));
            let mut tokens: Vec<&str> = Vec::with_capacity(spec.tokens_per_doc);
            while tokens.len() < spec.tokens_per_doc {
                let len = spec.window_len.min(spec.tokens_per_doc - tokens.len());
                let carries = !tracked.is_empty() && len >= 2 && rng.random::<f64>() < spec.tracked_rate;
                let (topic, special) = if carries {
                    match &tracked[rng.random_range(0..tracked.len())] {
                        Tracked::Drift(dw, p) => {
                            let t = if rng.random::<f64>() < p[bin] {
                                &dw.source
                            } else {
                                &dw.target
                            };
                            (t.as_str(), Some(dw.word.as_str()))
                        }
                        Tracked::Control(c) => (c.topic.as_str(), Some(c.word.as_str())),
                    }
                } else {
                    (spec.topics[rng.random_range(0..spec.topics.len())].name.as_str(), None)
                };
                let words = topics[topic];
                let center = len / 2;
                for i in 0..len {
                    match special {
                        Some(s) if i == center => tokens.push(s),
                        _ => tokens.push(&words[rng.random_range(0..words.len())]),
                    }
                }
            }
            let years = spec.years_per_bin as usize;
            docs.push(Document {
                id: format!("synth-b{bin}-d{d:05}"),
                year: spec.bin_start_year(bin) + (d % years) as i32,
                text: tokens.join(" "),
            });
        }
    }
    docs.sort_by(|a, b| (a.year, &a.id).cmp(&(b.year, &b.id)));
    Ok(docs)
}
