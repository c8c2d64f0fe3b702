//! Stage graph, freshness checks and stage bodies.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use aetas::alignment::align_all_to_anchor;
use aetas::axes::{axis_tables, AxisSpec};
use aetas::corpus::{
    bin_by_decade, bin_documents, diagnostics, extract_tei_text, normalize_tokenize, read_jsonl, sort_documents,
    validate_documents, write_jsonl, Document, TeiOptions, TimeBin, TokenizedDoc,
};
use aetas::drift::{
    cosine_drift, drift_table, pivot_table, read_targets, temporal_norm_table, write_pivot_csv,
    write_temporal_norm_csv, DriftRecord, SkippedWord, Span, Target,
};
use aetas::embeddings::{build_vocab, load_space, save_space, train_sgns, EmbeddingSpace};
use aetas::linalg::orthonormality_error;
use aetas::stability::{
    incremental_seed_variance, net_drift, split_half_drift, write_netdrift_csv, write_seed_variance_csv,
    write_splithalf_csv, SplitHalfOptions,
};
use aetas::stats::{
    freq_per_million, frequency_regression, trajectory_coordinates, write_frequency_csv, write_trajectories_csv,
    write_trajectory_context_csv, BinCounts,
};
use aetas::Scalar;
use serde::Serialize;
use serde_json::json;

use crate::config::{CorpusFormat, PipelineConfig, Precision};
use crate::error::{CliError, CliResult, IoContext};
use crate::manifest::{
    hash_file, hash_json, list_files, manifest_key, write_atomic, Manifest, StageEntry, TOOL_VERSION,
};
use crate::report;

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.json";
const STAGING_DIR: &str = ".staging";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Bin,
    Train,
    Align,
    Drift,
    Axes,
    Stability,
    Stats,
    Report,
}

impl Stage {
    /// Topological order.
    pub const ALL: [Stage; 9] = [
        Stage::Ingest,
        Stage::Bin,
        Stage::Train,
        Stage::Align,
        Stage::Drift,
        Stage::Axes,
        Stage::Stability,
        Stage::Stats,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Bin => "bin",
            Stage::Train => "train",
            Stage::Align => "align",
            Stage::Drift => "drift",
            Stage::Axes => "axes",
            Stage::Stability => "stability",
            Stage::Stats => "stats",
            Stage::Report => "report",
        }
    }

    pub fn deps(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Bin => &[Stage::Ingest],
            Stage::Train => &[Stage::Bin],
            Stage::Align => &[Stage::Train],
            Stage::Drift | Stage::Axes => &[Stage::Align],
            Stage::Stability | Stage::Stats => &[Stage::Align],
            Stage::Report => &[Stage::Drift, Stage::Axes, Stage::Stability, Stage::Stats],
        }
    }

    /// Every transitive upstream stage in topological order.
    pub fn ancestors(self) -> Vec<Stage> {
        let mut set = BTreeSet::new();
        let mut stack: Vec<Stage> = self.deps().to_vec();
        while let Some(s) = stack.pop() {
            if set.insert(s) {
                stack.extend_from_slice(s.deps());
            }
        }
        set.into_iter().collect()
    }

    /// The part of the configuration this stage reads.
    pub fn config_subset(self, cfg: &PipelineConfig) -> serde_json::Value {
        match self {
            Stage::Ingest => json!({ "corpus": cfg.corpus }),
            Stage::Bin => json!({ "bins": cfg.bins }),
            Stage::Train => json!({ "train": cfg.train }),
            Stage::Align => json!({ "align": cfg.align }),
            Stage::Drift => json!({ "drift": cfg.drift, "anchor": cfg.align.anchor }),
            Stage::Axes => json!({ "axes": cfg.axes, "targets": cfg.drift.targets }),
            Stage::Stability => json!({
                "stability": cfg.stability,
                "incremental": cfg.incremental,
                "train": cfg.train,
                "targets": cfg.drift.targets,
                "spans": cfg.drift.spans,
            }),
            Stage::Stats => {
                json!({ "stats": cfg.stats, "targets": cfg.drift.targets, "spans": cfg.drift.spans })
            }
            Stage::Report => json!({ "report": cfg.report }),
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage {s}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ran,
    UpToDate,
}

pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub root: PathBuf,
}

/// Working state handed to a stage body.
struct StageCtx<'a> {
    cfg: &'a PipelineConfig,
    root: &'a Path,
    out: PathBuf,
    inputs: Vec<PathBuf>,
}

impl<'a> StageCtx<'a> {
    /// Records `path` as an input and returns it.
    fn input(&mut self, path: PathBuf) -> PathBuf {
        self.inputs.push(path.clone());
        path
    }

    fn upstream(&mut self, stage: Stage, file: &str) -> PathBuf {
        let p = self.root.join(stage.name()).join(file);
        self.input(p)
    }

    fn create(&self, name: &str) -> CliResult<BufWriter<File>> {
        let path = self.out.join(name);
        Ok(BufWriter::new(File::create(&path).at(&path)?))
    }

    fn write_json<S: Serialize>(&self, name: &str, value: &S) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Core(e.into()))?;
        let path = self.out.join(name);
        fs::write(&path, format!("{text}\n")).at(&path)
    }

    fn write_with(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> aetas::Result<()>) -> CliResult<()> {
        let mut w = self.create(name)?;
        f(&mut w)?;
        let path = self.out.join(name);
        w.flush().at(&path)
    }
}

impl Pipeline {
    /// Creates the output directory and mirrors the resolved configuration.
    pub fn new(cfg: PipelineConfig) -> CliResult<Self> {
        let root = cfg.output_dir.clone();
        fs::create_dir_all(&root).at(&root)?;
        let text = serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Core(e.into()))?;
        write_atomic(&root.join(RESOLVED_CONFIG_FILE), format!("{text}\n").as_bytes())?;
        Ok(Pipeline { cfg, root })
    }

    fn config_hash(&self, stage: Stage) -> String {
        hash_json(&stage.config_subset(&self.cfg))
    }

    /// Runs `stage` unless its manifest entry is fresh; every upstream stage
    /// must already be fresh.
    pub fn run_stage(&self, stage: Stage) -> CliResult<Outcome> {
        let manifest = Manifest::load(&self.root)?;
        for up in stage.ancestors() {
            if let Some(reason) = manifest.staleness(&self.root, up.name(), &self.config_hash(up))? {
                return Err(CliError::Stale {
                    stage: up.name(),
                    reason,
                });
            }
        }
        let config_hash = self.config_hash(stage);
        if manifest.staleness(&self.root, stage.name(), &config_hash)?.is_none() {
            log::info!("{}: up to date", stage.name());
            return Ok(Outcome::UpToDate);
        }
        log::info!("{}: running", stage.name());
        let staging = self.root.join(STAGING_DIR).join(stage.name());
        if staging.exists() {
            fs::remove_dir_all(&staging).at(&staging)?;
        }
        fs::create_dir_all(&staging).at(&staging)?;
        let mut ctx = StageCtx {
            cfg: &self.cfg,
            root: &self.root,
            out: staging.clone(),
            inputs: Vec::new(),
        };
        self.dispatch(stage, &mut ctx)?;
        let inputs = std::mem::take(&mut ctx.inputs);

        let final_dir = self.root.join(stage.name());
        if final_dir.exists() {
            fs::remove_dir_all(&final_dir).at(&final_dir)?;
        }
        fs::rename(&staging, &final_dir).at(&final_dir)?;

        let mut entry = StageEntry {
            tool_version: TOOL_VERSION.into(),
            config_hash,
            config: stage.config_subset(&self.cfg),
            inputs: Default::default(),
            outputs: Default::default(),
        };
        for p in inputs {
            entry.inputs.insert(manifest_key(&self.root, &p), hash_file(&p)?);
        }
        for p in list_files(&final_dir)? {
            entry.outputs.insert(manifest_key(&self.root, &p), hash_file(&p)?);
        }
        let mut manifest = Manifest::load(&self.root)?;
        manifest.stages.insert(stage.name().into(), entry);
        manifest.save(&self.root)?;
        Ok(Outcome::Ran)
    }

    /// Runs every stage in order, skipping fresh ones.
    pub fn run_all(&self) -> CliResult<Vec<(Stage, Outcome)>> {
        Stage::ALL.iter().map(|&s| self.run_stage(s).map(|o| (s, o))).collect()
    }

    fn dispatch(&self, stage: Stage, ctx: &mut StageCtx) -> CliResult<()> {
        let f64_mode = self.cfg.train.precision == Precision::F64;
        match stage {
            Stage::Ingest => ingest(ctx),
            Stage::Bin => bin(ctx),
            Stage::Train if f64_mode => train::<f64>(ctx),
            Stage::Train => train::<f32>(ctx),
            Stage::Align if f64_mode => align::<f64>(ctx),
            Stage::Align => align::<f32>(ctx),
            Stage::Drift if f64_mode => drift::<f64>(ctx),
            Stage::Drift => drift::<f32>(ctx),
            Stage::Axes if f64_mode => axes::<f64>(ctx),
            Stage::Axes => axes::<f32>(ctx),
            Stage::Stability if f64_mode => stability::<f64>(ctx),
            Stage::Stability => stability::<f32>(ctx),
            Stage::Stats if f64_mode => stats::<f64>(ctx),
            Stage::Stats => stats::<f32>(ctx),
            Stage::Report => report_stage(ctx),
        }
    }
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    Ok(BufReader::new(File::open(path).at(path)?))
}

fn read_lines(path: &Path) -> CliResult<Vec<String>> {
    let text = fs::read_to_string(path).at(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

fn ingest(ctx: &mut StageCtx) -> CliResult<()> {
    let c = &ctx.cfg.corpus;
    let mut docs: Vec<Document> = Vec::new();
    let mut skipped_ids = Vec::new();
    for path in c.inputs.clone() {
        let path = ctx.input(path);
        match c.format {
            CorpusFormat::Jsonl => docs.extend(read_jsonl(open(&path)?)?),
            CorpusFormat::Tei => {
                let tags: Vec<&str> = c.tei.container_tags.iter().map(String::as_str).collect();
                let mut opts = TeiOptions::new(&tags, &c.tei.date_attribute);
                opts.id_prefix = c.tei.id_prefix.clone();
                let ex = extract_tei_text(open(&path)?, &opts)?;
                docs.extend(ex.documents);
                skipped_ids.extend(ex.skipped_ids);
            }
        }
    }
    validate_documents(&docs, &(c.year_min..=c.year_max))?;
    let stop: BTreeSet<String> = match c.stop_tokens.clone() {
        Some(p) => read_lines(&ctx.input(p))?.into_iter().collect(),
        None => BTreeSet::new(),
    };
    let mut tokenized: Vec<TokenizedDoc> = docs
        .iter()
        .map(|d| {
            let mut t = normalize_tokenize(d);
            t.tokens.retain(|tok| !stop.contains(tok));
            t
        })
        .collect();
    sort_documents(&mut tokenized);
    let tokens: usize = tokenized.iter().map(|d| d.tokens.len()).sum();
    ctx.write_with("tokens.jsonl", |w| write_jsonl(w, &tokenized))?;
    ctx.write_json(
        "ingest.json",
        &json!({
            "documents": tokenized.len(),
            "tokens": tokens,
            "skipped": skipped_ids.len(),
            "skipped_ids": skipped_ids,
            "stop_tokens": stop.len(),
        }),
    )
}

fn load_tokens(ctx: &mut StageCtx) -> CliResult<Vec<TokenizedDoc>> {
    let path = ctx.upstream(Stage::Ingest, "tokens.jsonl");
    let text = fs::read_to_string(&path).at(&path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| {
                CliError::Core(aetas::Error::Format {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
        })
        .collect()
}

fn load_bins(ctx: &mut StageCtx) -> CliResult<Vec<TimeBin>> {
    let path = ctx.upstream(Stage::Bin, "bins.json");
    serde_json::from_reader(open(&path)?).map_err(|e| CliError::Core(e.into()))
}

fn labels(bins: &[TimeBin]) -> Vec<String> {
    bins.iter().map(|b| b.label().to_owned()).collect()
}

fn bin(ctx: &mut StageCtx) -> CliResult<()> {
    let docs = load_tokens(ctx)?;
    let bins = bin_by_decade(&docs, ctx.cfg.bins.min_tokens)?;
    for b in &bins {
        if b.token_count < ctx.cfg.bins.min_tokens {
            log::warn!("bin {} holds {} tokens, below the threshold", b.label(), b.token_count);
        }
    }
    ctx.write_json("bins.json", &bins)?;
    let diag = diagnostics(&bins, &docs)?;
    ctx.write_with("diagnostics.csv", |w| diag.write_csv(w))
}

fn train<T: Scalar>(ctx: &mut StageCtx) -> CliResult<()> {
    let docs = load_tokens(ctx)?;
    let bins = load_bins(ctx)?;
    let members = bin_documents(&bins, &docs)?;
    let params = &ctx.cfg.train.params;
    for (b, m) in bins.iter().zip(&members) {
        log::info!("training {} on {} documents", b.label(), m.len());
        let vocab = build_vocab(m, params.min_count)?;
        let space: EmbeddingSpace<T> = train_sgns(b.label(), m, &vocab, params)?;
        save_space(&space, &ctx.out)?;
    }
    Ok(())
}

fn load_spaces<T: Scalar>(ctx: &mut StageCtx, stage: Stage, labels: &[String]) -> CliResult<Vec<EmbeddingSpace<T>>> {
    let dir = ctx.root.join(stage.name());
    labels
        .iter()
        .map(|l| {
            ctx.input(dir.join(format!("{l}.vec")));
            ctx.input(dir.join(format!("{l}.meta.json")));
            Ok(load_space(&dir, l)?)
        })
        .collect()
}

fn align<T: Scalar>(ctx: &mut StageCtx) -> CliResult<()> {
    let bins = load_bins(ctx)?;
    let labels = labels(&bins);
    ctx.cfg.check_anchor(&labels)?;
    let spaces = load_spaces::<T>(ctx, Stage::Train, &labels)?;
    let (aligned, maps) = align_all_to_anchor(&spaces, &ctx.cfg.align.anchor, &ctx.cfg.align.options())?;
    for s in &aligned {
        save_space(s, &ctx.out)?;
    }
    let summary: Vec<_> = maps
        .iter()
        .map(|m| {
            json!({
                "base": m.base_label,
                "target": m.target_label,
                "shared_count": m.shared_count,
                "orthonormality_error": orthonormality_error(&m.rotation).as_f64(),
            })
        })
        .collect();
    ctx.write_json(
        "alignment.json",
        &json!({ "anchor": ctx.cfg.align.anchor, "maps": summary }),
    )
}

fn load_targets(ctx: &mut StageCtx) -> CliResult<Vec<Target>> {
    let path = ctx.input(ctx.cfg.drift.targets.clone());
    Ok(read_targets(open(&path)?)?)
}

fn target_words(targets: &[Target]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    targets
        .iter()
        .filter(|t| seen.insert(t.word.clone()))
        .map(|t| t.word.clone())
        .collect()
}

fn drift<T: Scalar>(ctx: &mut StageCtx) -> CliResult<()> {
    let bins = load_bins(ctx)?;
    let labels = labels(&bins);
    let spans = ctx.cfg.spans(&labels)?;
    let targets = load_targets(ctx)?;
    let aligned = load_spaces::<T>(ctx, Stage::Align, &labels)?;
    let raw = load_spaces::<T>(ctx, Stage::Train, &labels)?;
    let d = &ctx.cfg.drift;
    let table = drift_table(&aligned, &targets, &spans, &d.k_list)?;
    ctx.write_with("drift.csv", |w| table.write_csv(w))?;
    ctx.write_json("neighbors.json", &table.neighbor_lists())?;
    let (pivots, pivot_skipped) = pivot_table(&raw, &targets, &spans, d.n_pivots, d.top_m)?;
    ctx.write_with("pivot.csv", |w| write_pivot_csv(&pivots, w))?;
    let (norms, norm_skipped) = temporal_norm_table(&aligned, &ctx.cfg.align.anchor, &targets)?;
    ctx.write_with("temporal_norm.csv", |w| write_temporal_norm_csv(&norms, w))?;
    ctx.write_json(
        "skipped.json",
        &json!({ "drift": table.skipped, "pivot": pivot_skipped, "temporal_norm": norm_skipped }),
    )
}

fn axes<T: Scalar>(ctx: &mut StageCtx) -> CliResult<()> {
    let bins = load_bins(ctx)?;
    let labels = labels(&bins);
    let mut specs = Vec::new();
    for p in ctx.cfg.axes.specs.clone() {
        let p = ctx.input(p);
        let text = fs::read_to_string(&p).at(&p)?;
        let spec: AxisSpec = toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
        spec.validate()
            .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
        specs.push(spec);
    }
    if specs.is_empty() {
        specs.push(AxisSpec::mercy_retribution());
    }
    let words = if ctx.cfg.axes.words.is_empty() {
        target_words(&load_targets(ctx)?)
    } else {
        ctx.cfg.axes.words.clone()
    };
    let aligned = load_spaces::<T>(ctx, Stage::Align, &labels)?;
    let tables = axis_tables(&aligned, &specs, &words);
    ctx.write_with("axis_scores.csv", |w| tables.write_scores_csv(w))?;
    ctx.write_with("axis_sensitivity.csv", |w| tables.write_sensitivity_csv(w))?;
    ctx.write_json("axes.json", &json!({ "specs": specs, "skipped": tables.skipped }))
}

/// Cosine drift of every target over every span, without neighbor lists.
fn observed_drift<T: Scalar>(
    aligned: &[EmbeddingSpace<T>],
    words: &[String],
    spans: &[Span],
    skipped: &mut Vec<SkippedWord>,
) -> Vec<DriftRecord> {
    let mut out = Vec::new();
    for span in spans {
        let find = |l: &str| aligned.iter().find(|s| s.label == l);
        let (Some(a), Some(b)) = (find(&span.start), find(&span.end)) else {
            continue;
        };
        for w in words {
            match cosine_drift(a, b, w) {
                Ok(d) => out.push(DriftRecord {
                    word: w.clone(),
                    domain: String::new(),
                    start_label: span.start.clone(),
                    end_label: span.end.clone(),
                    drift: d,
                    overlap_k: 0,
                    overlap: 0.0,
                    neighbors_start: vec![],
                    neighbors_end: vec![],
                }),
                Err(e) => skipped.push(SkippedWord {
                    word: w.clone(),
                    context: format!("{}->{}", span.start, span.end),
                    reason: e.to_string(),
                }),
            }
        }
    }
    out
}

fn stability<T: Scalar>(ctx: &mut StageCtx) -> CliResult<()> {
    let cfg = ctx.cfg;
    if !cfg.stability.enabled && !cfg.incremental.enabled {
        return ctx.write_json("stability.json", &json!({ "enabled": false }));
    }
    let docs = load_tokens(ctx)?;
    let bins = load_bins(ctx)?;
    let labels = labels(&bins);
    let spans = cfg.spans(&labels)?;
    let words = target_words(&load_targets(ctx)?);
    let members = bin_documents(&bins, &docs)?;
    let mut skipped = Vec::new();
    let mut meta = json!({ "enabled": cfg.stability.enabled, "rule": cfg.stability.rule });

    if cfg.stability.enabled {
        let measured: Vec<String> = if cfg.stability.bins.is_empty() {
            let used: BTreeSet<&String> = spans.iter().flat_map(|s| [&s.start, &s.end]).collect();
            labels.iter().filter(|l| used.contains(l)).cloned().collect()
        } else {
            for l in &cfg.stability.bins {
                if !labels.contains(l) {
                    return Err(CliError::config(format!("stability.bins names undefined bin {l}")));
                }
            }
            cfg.stability.bins.clone()
        };
        let opts = SplitHalfOptions {
            n_repeats: cfg.stability.repeats,
            rng_seed: cfg.stability.rng_seed,
            shared_seed: cfg.stability.shared_seed,
        };
        let mut stats = Vec::new();
        for label in &measured {
            let i = labels.iter().position(|l| l == label).expect("validated label");
            log::info!("split-half for {label}: {} repeats", opts.n_repeats);
            stats.extend(split_half_drift::<T, _>(
                label,
                &members[i],
                &words,
                &cfg.train.params,
                &opts,
            )?);
        }
        ctx.write_with("splithalf.csv", |w| write_splithalf_csv(&stats, w))?;

        let aligned = load_spaces::<T>(ctx, Stage::Align, &labels)?;
        let observed = observed_drift(&aligned, &words, &spans, &mut skipped);
        let mut net = Vec::new();
        for r in &observed {
            let find = |bin: &str| stats.iter().find(|s| s.bin_label == bin && s.word == r.word);
            let span = Span::new(&r.start_label, &r.end_label);
            let result = match (find(&r.start_label), find(&r.end_label)) {
                (Some(s), Some(e)) => net_drift(r.drift, &span, s, e, cfg.stability.rule),
                _ => Err(aetas::Error::InvalidArgument("span endpoint not measured".into())),
            };
            match result {
                Ok(n) => net.push(n),
                Err(e) => skipped.push(SkippedWord {
                    word: r.word.clone(),
                    context: format!("net {}->{}", r.start_label, r.end_label),
                    reason: e.to_string(),
                }),
            }
        }
        ctx.write_with("netdrift.csv", |w| write_netdrift_csv(&net, w))?;
        meta["split_half"] = json!(opts);
        meta["bins"] = json!(measured);
    }

    if cfg.incremental.enabled {
        let chain: Vec<(String, Vec<&TokenizedDoc>)> = labels.iter().cloned().zip(members.iter().cloned()).collect();
        let variance =
            incremental_seed_variance::<T, _>(&chain, &words, &spans, &cfg.train.params, &cfg.incremental.seeds)?;
        ctx.write_with("seed_variance.csv", |w| write_seed_variance_csv(&variance, w))?;
        meta["incremental_seeds"] = json!(cfg.incremental.seeds);
    }
    meta["skipped"] = json!(skipped);
    ctx.write_json("stability.json", &meta)
}

fn stats<T: Scalar>(ctx: &mut StageCtx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let docs = load_tokens(ctx)?;
    let bins = load_bins(ctx)?;
    let labels = labels(&bins);
    let spans = cfg.spans(&labels)?;
    let words = target_words(&load_targets(ctx)?);
    let members = bin_documents(&bins, &docs)?;
    let counts: Vec<BinCounts> = labels
        .iter()
        .zip(&members)
        .map(|(l, m)| BinCounts::from_docs(l, m))
        .collect();
    let freq = freq_per_million(&counts, &words);
    ctx.write_with("frequency.csv", |w| write_frequency_csv(&freq, w))?;

    let aligned = load_spaces::<T>(ctx, Stage::Align, &labels)?;
    let mut skipped = Vec::new();
    let observed = observed_drift(&aligned, &words, &spans, &mut skipped);
    let regression = match frequency_regression(&observed, &freq, cfg.stats.transform) {
        Ok(r) => json!(r),
        Err(e) => {
            log::warn!("frequency regression skipped: {e}");
            json!({ "transform": cfg.stats.transform, "error": e.to_string() })
        }
    };
    ctx.write_json("freq_regression.json", &regression)?;

    let focal = if cfg.stats.trajectory_words.is_empty() {
        words.clone()
    } else {
        cfg.stats.trajectory_words.clone()
    };
    let traj = trajectory_coordinates(&aligned, &focal, cfg.stats.neighbor_context)?;
    ctx.write_with("trajectories.csv", |w| write_trajectories_csv(&traj, w))?;
    ctx.write_with("trajectory_context.csv", |w| write_trajectory_context_csv(&traj, w))?;
    skipped.extend(traj.skipped.iter().cloned());
    ctx.write_json(
        "stats.json",
        &json!({ "explained_ratio": traj.explained_ratio, "transform": cfg.stats.transform, "skipped": skipped }),
    )
}

fn report_stage(ctx: &mut StageCtx) -> CliResult<()> {
    let sources = [
        (Stage::Drift, "drift.csv"),
        (Stage::Stats, "trajectories.csv"),
        (Stage::Axes, "axis_scores.csv"),
        (Stage::Axes, "axis_sensitivity.csv"),
        (Stage::Stability, "splithalf.csv"),
        (Stage::Stability, "netdrift.csv"),
    ];
    let mut found = report::Tables::default();
    for (stage, file) in sources {
        let path = ctx.root.join(stage.name()).join(file);
        if path.is_file() {
            ctx.input(path.clone());
            found.load(file, &path)?;
        } else {
            log::warn!("{} missing; its chart is skipped", manifest_key(ctx.root, &path));
        }
    }
    for (name, svg) in report::render_all(&found, ctx.cfg.report.timestamp) {
        let path = ctx.out.join(&name);
        fs::write(&path, svg).at(&path)?;
    }
    Ok(())
}
