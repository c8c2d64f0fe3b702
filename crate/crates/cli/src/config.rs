//! Pipeline configuration: one TOML file, paths relative to the file.

use std::path::{Path, PathBuf};

use aetas::alignment::AlignOptions;
use aetas::drift::Span;
use aetas::embeddings::TrainConfig;
use aetas::stability::BaselineRule;
use aetas::stats::FrequencyTransform;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, IoContext};

pub const OUTPUT_DIR_ENV: &str = "AETAS_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub bins: BinsConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub align: AlignSection,
    pub drift: DriftConfig,
    #[serde(default)]
    pub axes: AxesConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
    #[serde(default)]
    pub incremental: IncrementalConfig,
    #[serde(default)]
    pub stats: StatsConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    #[default]
    Jsonl,
    Tei,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub format: CorpusFormat,
    #[serde(default)]
    pub tei: TeiSection,
    #[serde(default = "default_year_min")]
    pub year_min: i32,
    #[serde(default = "default_year_max")]
    pub year_max: i32,
    /// One token per line; removed after normalization.
    #[serde(default)]
    pub stop_tokens: Option<PathBuf>,
}

fn default_year_min() -> i32 {
    *aetas::corpus::DEFAULT_YEAR_RANGE.start()
}

fn default_year_max() -> i32 {
    *aetas::corpus::DEFAULT_YEAR_RANGE.end()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeiSection {
    pub container_tags: Vec<String>,
    pub date_attribute: String,
    pub id_prefix: String,
}

impl Default for TeiSection {
    fn default() -> Self {
        TeiSection {
            container_tags: vec!["div1".into()],
            date_attribute: "date".into(),
            id_prefix: "doc".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinsConfig {
    pub min_tokens: u64,
}

impl Default for BinsConfig {
    fn default() -> Self {
        BinsConfig {
            min_tokens: aetas::corpus::DEFAULT_MIN_TOKENS,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSection {
    pub precision: Precision,
    #[serde(flatten)]
    pub params: TrainConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignSection {
    pub anchor: String,
    pub normalize: bool,
    pub center: bool,
    pub top_n: Option<usize>,
}

impl Default for AlignSection {
    fn default() -> Self {
        AlignSection {
            anchor: "1900s".into(),
            normalize: false,
            center: false,
            top_n: None,
        }
    }
}

impl AlignSection {
    pub fn options(&self) -> AlignOptions {
        AlignOptions {
            normalize: self.normalize,
            center: self.center,
            top_n: self.top_n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    /// CSV of `word[,domain]`.
    pub targets: PathBuf,
    /// Empty means every pair of consecutive bins.
    #[serde(default)]
    pub spans: Vec<Span>,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<usize>,
    #[serde(default = "default_pivots")]
    pub n_pivots: usize,
    #[serde(default = "default_top_m")]
    pub top_m: usize,
}

fn default_k_list() -> Vec<usize> {
    vec![5, 20]
}

fn default_pivots() -> usize {
    500
}

fn default_top_m() -> usize {
    50
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxesConfig {
    /// TOML files holding `name`, `positive` and `negative`; empty means the
    /// built-in mercy-retribution axis.
    pub specs: Vec<PathBuf>,
    /// Words to score; empty means the drift targets.
    pub words: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub enabled: bool,
    /// Bins to measure; empty means every bin used by a span.
    pub bins: Vec<String>,
    pub repeats: usize,
    pub rng_seed: u64,
    pub shared_seed: bool,
    pub rule: BaselineRule,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            enabled: true,
            bins: Vec::new(),
            repeats: 20,
            rng_seed: 7,
            shared_seed: false,
            rule: BaselineRule::Average,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncrementalConfig {
    pub enabled: bool,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub transform: FrequencyTransform,
    /// Words to trace; empty means the drift targets.
    pub trajectory_words: Vec<String>,
    pub neighbor_context: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Embed the generation time in every SVG.
    pub timestamp: bool,
}

/// Command-line and environment overrides applied after parsing.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    /// Reads, resolves relative paths against the file's directory, applies
    /// overrides and validates.
    pub fn load(path: &Path, overrides: &Overrides) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).at(path)?;
        let mut cfg = Self::from_toml(&text)?;
        let path = std::path::absolute(path).at(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve(&base);
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        self.corpus.inputs.iter_mut().for_each(fix);
        if let Some(p) = self.corpus.stop_tokens.as_mut() {
            fix(p);
        }
        fix(&mut self.drift.targets);
        self.axes.specs.iter_mut().for_each(fix);
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(dir) = &overrides.output_dir {
            self.output_dir = std::path::absolute(dir).unwrap_or_else(|_| dir.clone());
        }
        if let Some(seed) = overrides.seed {
            self.train.params.seed = seed;
            self.stability.rng_seed = seed;
        }
    }

    /// Checks everything that can be checked before the corpus is binned.
    pub fn validate(&self) -> CliResult<()> {
        let mut problems = Vec::new();
        if self.corpus.inputs.is_empty() {
            problems.push("corpus.inputs is empty".to_string());
        }
        let files = self
            .corpus
            .inputs
            .iter()
            .chain(&self.corpus.stop_tokens)
            .chain(std::iter::once(&self.drift.targets))
            .chain(&self.axes.specs);
        for f in files {
            if !f.is_file() {
                problems.push(format!("file not found: {}", f.display()));
            }
        }
        if self.corpus.year_min > self.corpus.year_max {
            problems.push("corpus.year_min exceeds corpus.year_max".into());
        }
        if self.corpus.format == CorpusFormat::Tei && self.corpus.tei.container_tags.is_empty() {
            problems.push("corpus.tei.container_tags is empty".into());
        }
        if let Err(e) = self.train.params.validate() {
            problems.push(format!("train: {e}"));
        }
        if self.drift.k_list.is_empty() || self.drift.k_list.contains(&0) {
            problems.push("drift.k_list must hold positive values".into());
        }
        if self.drift.n_pivots == 0 || self.drift.top_m == 0 {
            problems.push("drift.n_pivots and drift.top_m must be positive".into());
        }
        if self.stability.enabled && self.stability.repeats < 2 {
            problems.push("stability.repeats must be at least 2".into());
        }
        if self.incremental.enabled && self.incremental.seeds.is_empty() {
            problems.push("incremental.seeds is empty".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(problems.join("; ")))
        }
    }

    /// Spans as configured, or consecutive pairs of `labels`.
    pub fn spans(&self, labels: &[String]) -> CliResult<Vec<Span>> {
        let spans: Vec<Span> = if self.drift.spans.is_empty() {
            labels.windows(2).map(|w| Span::new(&w[0], &w[1])).collect()
        } else {
            self.drift.spans.clone()
        };
        for s in &spans {
            for l in [&s.start, &s.end] {
                if !labels.contains(l) {
                    return Err(CliError::config(format!(
                        "span {}->{} references undefined bin {l} (bins: {})",
                        s.start,
                        s.end,
                        labels.join(", ")
                    )));
                }
            }
        }
        Ok(spans)
    }

    pub fn check_anchor(&self, labels: &[String]) -> CliResult<()> {
        if labels.contains(&self.align.anchor) {
            Ok(())
        } else {
            Err(CliError::config(format!(
                "anchor {} is not a bin (bins: {})",
                self.align.anchor,
                labels.join(", ")
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [corpus]
        inputs = ["corpus.jsonl"]
        [drift]
        targets = "targets.csv"
        spans = [{ start = "1800s", end = "1820s" }]
        [train]
        dim = 50
        precision = "f32"
    "#;

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = PipelineConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.drift.k_list, [5, 20]);
        assert_eq!(cfg.train.params.dim, 50);
        assert_eq!(cfg.train.params.window, 5);
        assert_eq!(cfg.train.precision, Precision::F32);
        assert_eq!(cfg.align.anchor, "1900s");
        assert_eq!(cfg.stability.repeats, 20);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = PipelineConfig::from_toml(&format!("{MINIMAL}\n[align]\nanchr = \"x\"")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn resolution_and_overrides() {
        let mut cfg = PipelineConfig::from_toml(MINIMAL).unwrap();
        cfg.resolve(Path::new("/data/run"));
        assert_eq!(cfg.corpus.inputs[0], Path::new("/data/run/corpus.jsonl"));
        assert_eq!(cfg.output_dir, Path::new("/data/run/out"));
        cfg.apply(&Overrides {
            output_dir: Some("/tmp/x".into()),
            seed: Some(9),
        });
        assert_eq!(cfg.output_dir, Path::new("/tmp/x"));
        assert_eq!((cfg.train.params.seed, cfg.stability.rng_seed), (9, 9));
        assert!(matches!(cfg.validate(), Err(CliError::Config(m)) if m.contains("file not found")));
    }

    #[test]
    fn spans_checked_against_bins() {
        let cfg = PipelineConfig::from_toml(MINIMAL).unwrap();
        let labels = ["1800s".to_string(), "1810s".into(), "1820s".into()];
        assert_eq!(cfg.spans(&labels).unwrap().len(), 1);
        assert!(cfg.spans(&labels[..2]).is_err());
        let mut open = cfg.clone();
        open.drift.spans.clear();
        assert_eq!(
            open.spans(&labels).unwrap(),
            [Span::new("1800s", "1810s"), Span::new("1810s", "1820s")]
        );
    }
}
