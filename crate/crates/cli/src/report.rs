//! Static SVG charts rendered from the stage CSV tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Deserialize)]
pub struct DriftRow {
    pub word: String,
    pub domain: String,
    pub start: String,
    pub end: String,
    pub k: usize,
    pub drift: f64,
    pub overlap: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct TrajectoryRow {
    pub word: String,
    pub bin: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct AxisScoreRow {
    pub axis: String,
    pub word: String,
    pub bin: String,
    pub score: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct BandRow {
    pub axis: String,
    pub word: String,
    pub bin: String,
    pub full: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct SplitHalfRow {
    pub bin: String,
    pub word: String,
    pub n_effective: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct NetDriftRow {
    pub word: String,
    pub start: String,
    pub end: String,
    pub net: f64,
    pub z: Option<f64>,
}

/// Tables available to the report; absent tables stay `None`.
#[derive(Clone, Debug, Default)]
pub struct Tables {
    pub drift: Option<Vec<DriftRow>>,
    pub trajectories: Option<Vec<TrajectoryRow>>,
    pub axis_scores: Option<Vec<AxisScoreRow>>,
    pub axis_bands: Option<Vec<BandRow>>,
    pub splithalf: Option<Vec<SplitHalfRow>>,
    pub netdrift: Option<Vec<NetDriftRow>>,
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| data_err(path, e))?;
    rdr.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| data_err(path, e))
}

fn data_err(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    CliError::Core(aetas::Error::Format {
        line,
        message: format!("{}: {e}", path.display()),
    })
}

impl Tables {
    pub fn load(&mut self, file: &str, path: &Path) -> CliResult<()> {
        match file {
            "drift.csv" => self.drift = Some(read_csv(path)?),
            "trajectories.csv" => self.trajectories = Some(read_csv(path)?),
            "axis_scores.csv" => self.axis_scores = Some(read_csv(path)?),
            "axis_sensitivity.csv" => self.axis_bands = Some(read_csv(path)?),
            "splithalf.csv" => self.splithalf = Some(read_csv(path)?),
            "netdrift.csv" => self.netdrift = Some(read_csv(path)?),
            other => log::warn!("report ignores {other}"),
        }
        Ok(())
    }
}

/// Every chart whose table is present, as `(file name, svg text)`.
pub fn render_all(t: &Tables, timestamp: bool) -> Vec<(String, String)> {
    let stamp = timestamp.then(|| {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        format!("unix time {secs}")
    });
    let mut out = Vec::new();
    let mut push = |name: &str, svg: Option<Svg>| match svg {
        Some(s) => out.push((name.to_owned(), s.finish(stamp.as_deref()))),
        None => log::warn!("{name}: no data, chart skipped"),
    };
    if let Some(d) = &t.drift {
        push("drift_lollipop.svg", Some(lollipop(d)));
        push("neighbor_overlap.svg", Some(overlap_bars(d)));
    }
    if let Some(tr) = &t.trajectories {
        push("trajectories.svg", Some(trajectories(tr)));
    }
    if let Some(scores) = &t.axis_scores {
        let bands = t.axis_bands.as_deref().unwrap_or(&[]);
        push("axis_projection.svg", Some(axis_chart(scores, bands)));
    }
    if let Some(bands) = &t.axis_bands {
        push("axis_loo_variants.svg", Some(loo_chart(bands)));
    }
    if let Some(s) = &t.splithalf {
        push("splithalf.svg", Some(splithalf_bars(s)));
    }
    if let Some(n) = &t.netdrift {
        push("netdrift_heatmap.svg", Some(heatmap(n, "Net drift", |r| Some(r.net))));
        push("z_heatmap.svg", Some(heatmap(n, "Standardized net drift (z)", |r| r.z)));
    }
    out
}

pub fn escape(s: &str) -> String {
    let mut o = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => o.push_str("&amp;"),
            '<' => o.push_str("&lt;"),
            '>' => o.push_str("&gt;"),
            '"' => o.push_str("&quot;"),
            '\'' => o.push_str("&apos;"),
            _ => o.push(c),
        }
    }
    o
}

const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];
const MARGIN_LEFT: f64 = 170.0;
const MARGIN: f64 = 40.0;

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    fn new(width: f64, height: f64, title: &str) -> Self {
        let mut s = Svg {
            width,
            height,
            body: String::new(),
        };
        s.text(width / 2.0, 22.0, title, "middle", 15.0);
        s
    }

    fn raw(&mut self, s: &str) {
        self.body.push_str(s);
        self.body.push('\n');
    }

    fn text(&mut self, x: f64, y: f64, s: &str, anchor: &str, size: f64) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="{size}">{}</text>"#,
            escape(s)
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" {extra}/>"#
        );
    }

    pub fn finish(self, stamp: Option<&str>) -> String {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        if let Some(s) = stamp {
            let _ = writeln!(out, "<!-- generated {} -->", escape(s));
        }
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
            w = self.width,
            h = self.height
        );
        out.push_str(r#"<rect x="0" y="0" width="100%" height="100%" fill="white"/>"#);
        out.push('\n');
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

/// Linear map from `[lo, hi]` onto `[a, b]`; a degenerate domain maps to the middle.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi - lo <= f64::EPSILON {
        (a + b) / 2.0
    } else {
        a + (v - lo) / (hi - lo) * (b - a)
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn span_label(start: &str, end: &str) -> String {
    format!("{start}\u{2013}{end}")
}

/// One stem per (word, span), longest first.
pub fn lollipop(rows: &[DriftRow]) -> Svg {
    let mut seen = BTreeMap::new();
    for r in rows {
        seen.entry((r.word.clone(), r.start.clone(), r.end.clone()))
            .or_insert(r);
    }
    let mut stems: Vec<&DriftRow> = seen.into_values().collect();
    stems.sort_by(|a, b| b.drift.total_cmp(&a.drift).then_with(|| a.word.cmp(&b.word)));
    let row_h = 22.0;
    let height = 2.0 * MARGIN + 30.0 + row_h * stems.len() as f64;
    let width = 640.0;
    let mut s = Svg::new(width, height, "Semantic drift by word and span");
    let x_max = stems.iter().map(|r| r.drift).fold(1.0, f64::max);
    let (x0, x1) = (MARGIN_LEFT, width - MARGIN);
    let axis_y = height - MARGIN;
    s.line(x0, axis_y, x1, axis_y, "black", "");
    for i in 0..=4 {
        let v = x_max * i as f64 / 4.0;
        let x = scale(v, 0.0, x_max, x0, x1);
        s.line(x, axis_y, x, axis_y + 4.0, "black", "");
        s.text(x, axis_y + 16.0, &format!("{v:.2}"), "middle", 10.0);
    }
    s.text((x0 + x1) / 2.0, height - 6.0, "cosine drift", "middle", 11.0);
    let domains: Vec<&str> = {
        let mut d: Vec<&str> = stems.iter().map(|r| r.domain.as_str()).collect();
        d.sort_unstable();
        d.dedup();
        d
    };
    for (i, r) in stems.iter().enumerate() {
        let y = MARGIN + 20.0 + row_h * i as f64;
        let color = PALETTE[domains.iter().position(|d| *d == r.domain).unwrap_or(0) % PALETTE.len()];
        let x = scale(r.drift, 0.0, x_max, x0, x1);
        s.line(x0, y, x, y, color, r#"class="stem" stroke-width="2""#);
        let _ = writeln!(s.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="{color}"/>"#);
        s.text(
            x0 - 6.0,
            y + 4.0,
            &format!("{} ({})", r.word, span_label(&r.start, &r.end)),
            "end",
            11.0,
        );
    }
    s
}

/// Grouped bars of neighbor overlap, one bar per k.
pub fn overlap_bars(rows: &[DriftRow]) -> Svg {
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut groups: BTreeMap<(String, String, String), BTreeMap<usize, f64>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.word.clone(), r.start.clone(), r.end.clone()))
            .or_default()
            .insert(r.k, r.overlap);
    }
    let group_w = 18.0 * ks.len() as f64 + 16.0;
    let width = (2.0 * MARGIN + 40.0 + group_w * groups.len() as f64).max(420.0);
    let height = 360.0;
    let mut s = Svg::new(width, height, "Neighbor overlap (Jaccard) by k");
    let (y0, y1) = (height - 110.0, 50.0);
    let x0 = MARGIN + 30.0;
    s.line(x0, y0, width - MARGIN, y0, "black", "");
    s.line(x0, y0, x0, y1, "black", "");
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let y = scale(v, 0.0, 1.0, y0, y1);
        s.text(x0 - 6.0, y + 4.0, &format!("{v:.2}"), "end", 10.0);
    }
    for (gi, ((word, start, end), by_k)) in groups.iter().enumerate() {
        let gx = x0 + 8.0 + group_w * gi as f64;
        for (ki, k) in ks.iter().enumerate() {
            let Some(v) = by_k.get(k) else { continue };
            let top = scale(*v, 0.0, 1.0, y0, y1);
            let _ = writeln!(
                s.body,
                r#"<rect class="bar" x="{:.2}" y="{top:.2}" width="16" height="{:.2}" fill="{}"><title>{} k={k}: {v:.3}</title></rect>"#,
                gx + 18.0 * ki as f64,
                y0 - top,
                PALETTE[ki % PALETTE.len()],
                escape(word)
            );
        }
        let lx = gx + group_w / 2.0 - 8.0;
        let _ = writeln!(
            s.body,
            r#"<text x="{lx:.2}" y="{:.2}" font-size="10" text-anchor="end" transform="rotate(-45 {lx:.2} {:.2})">{}</text>"#,
            y0 + 14.0,
            y0 + 14.0,
            escape(&format!("{word} {}", span_label(start, end)))
        );
    }
    for (ki, k) in ks.iter().enumerate() {
        let lx = width - MARGIN - 70.0;
        let ly = 40.0 + 16.0 * ki as f64;
        let _ = writeln!(
            s.body,
            r#"<rect x="{lx}" y="{}" width="10" height="10" fill="{}"/>"#,
            ly - 9.0,
            PALETTE[ki % PALETTE.len()]
        );
        s.text(lx + 14.0, ly, &format!("k = {k}"), "start", 10.0);
    }
    s
}

/// Per-word paths through the PCA plane with arrows in chronological order.
pub fn trajectories(rows: &[TrajectoryRow]) -> Svg {
    let (width, height) = (640.0, 520.0);
    let mut s = Svg::new(width, height, "Aligned trajectories (PCA)");
    s.raw(r##"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" fill="#444"/></marker></defs>"##);
    let (xlo, xhi) = extent(rows.iter().map(|r| r.x));
    let (ylo, yhi) = extent(rows.iter().map(|r| r.y));
    let px = |x: f64| scale(x, xlo, xhi, MARGIN + 20.0, width - MARGIN - 20.0);
    let py = |y: f64| scale(y, ylo, yhi, height - MARGIN - 20.0, MARGIN + 30.0);
    let mut words: Vec<&str> = Vec::new();
    for r in rows {
        if !words.contains(&r.word.as_str()) {
            words.push(&r.word);
        }
    }
    for (wi, w) in words.iter().enumerate() {
        let color = PALETTE[wi % PALETTE.len()];
        let pts: Vec<&TrajectoryRow> = rows.iter().filter(|r| r.word == *w).collect();
        for pair in pts.windows(2) {
            s.line(
                px(pair[0].x),
                py(pair[0].y),
                px(pair[1].x),
                py(pair[1].y),
                color,
                r#"class="arrow" stroke-width="1.5" marker-end="url(#arrow)""#,
            );
        }
        for (pi, p) in pts.iter().enumerate() {
            let _ = writeln!(
                s.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
                px(p.x),
                py(p.y)
            );
            let label = if pi == 0 {
                format!("{w} {}", p.bin)
            } else {
                p.bin.clone()
            };
            s.text(px(p.x) + 6.0, py(p.y) - 6.0, &label, "start", 10.0);
        }
    }
    s
}

fn ordered_bins<'a>(bins: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for b in bins {
        if !out.contains(&b) {
            out.push(b);
        }
    }
    out
}

/// Axis scores across bins with leave-one-out bands behind each line.
pub fn axis_chart(scores: &[AxisScoreRow], bands: &[BandRow]) -> Svg {
    let (width, height) = (640.0, 420.0);
    let title = scores
        .first()
        .map_or("Axis projection".to_owned(), |r| format!("Axis projection: {}", r.axis));
    let mut s = Svg::new(width, height, &title);
    let bins = ordered_bins(
        scores
            .iter()
            .map(|r| r.bin.as_str())
            .chain(bands.iter().map(|b| b.bin.as_str())),
    );
    let (mut lo, mut hi) = extent(
        scores
            .iter()
            .map(|r| r.score)
            .chain(bands.iter().flat_map(|b| [b.min, b.max]))
            .chain([0.0]),
    );
    let pad = ((hi - lo) * 0.1).max(0.02);
    lo -= pad;
    hi += pad;
    let (x0, x1) = (MARGIN + 40.0, width - 130.0);
    let (y0, y1) = (height - MARGIN - 20.0, MARGIN + 20.0);
    let px = |b: &str| {
        let i = bins.iter().position(|x| *x == b).unwrap_or(0);
        scale(i as f64, 0.0, (bins.len().max(2) - 1) as f64, x0, x1)
    };
    let py = |v: f64| scale(v, lo, hi, y0, y1);
    s.line(x0, py(0.0), x1, py(0.0), "#999", r#"stroke-dasharray="4 3""#);
    s.line(x0, y0, x0, y1, "black", "");
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        s.text(x0 - 6.0, py(v) + 4.0, &format!("{v:.2}"), "end", 10.0);
    }
    for b in &bins {
        s.text(px(b), y0 + 16.0, b, "middle", 10.0);
    }
    let mut series: Vec<(&str, &str)> = Vec::new();
    for r in scores {
        if !series.contains(&(r.axis.as_str(), r.word.as_str())) {
            series.push((&r.axis, &r.word));
        }
    }
    for (si, (axis, word)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let band: Vec<&BandRow> = bands.iter().filter(|b| b.axis == *axis && b.word == *word).collect();
        if band.len() >= 2 {
            let upper: Vec<String> = band
                .iter()
                .map(|b| format!("{:.2},{:.2}", px(&b.bin), py(b.max)))
                .collect();
            let lower: Vec<String> = band
                .iter()
                .rev()
                .map(|b| format!("{:.2},{:.2}", px(&b.bin), py(b.min)))
                .collect();
            let _ = writeln!(
                s.body,
                r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" ")
            );
        }
        let pts: Vec<&AxisScoreRow> = scores.iter().filter(|r| r.axis == *axis && r.word == *word).collect();
        let path: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(&r.bin), py(r.score)))
            .collect();
        let _ = writeln!(
            s.body,
            r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for r in &pts {
            let _ = writeln!(
                s.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#,
                px(&r.bin),
                py(r.score)
            );
        }
        s.text(x1 + 10.0, MARGIN + 24.0 + 16.0 * si as f64, word, "start", 11.0);
        let _ = writeln!(
            s.body,
            r#"<rect x="{:.2}" y="{:.2}" width="6" height="10" fill="{color}"/>"#,
            x1 + 2.0,
            MARGIN + 15.0 + 16.0 * si as f64
        );
    }
    s
}

/// Range of leave-one-out scores per (word, bin), with the full-seed score marked.
pub fn loo_chart(bands: &[BandRow]) -> Svg {
    let row_h = 18.0;
    let width = 640.0;
    let height = 2.0 * MARGIN + 30.0 + row_h * bands.len() as f64;
    let mut s = Svg::new(width, height, "Leave-one-out seed variants");
    let (mut lo, mut hi) = extent(bands.iter().flat_map(|b| [b.min, b.max, b.full]).chain([0.0]));
    let pad = ((hi - lo) * 0.1).max(0.02);
    lo -= pad;
    hi += pad;
    let (x0, x1) = (MARGIN_LEFT, width - MARGIN);
    let px = |v: f64| scale(v, lo, hi, x0, x1);
    s.line(
        px(0.0),
        MARGIN + 10.0,
        px(0.0),
        height - MARGIN,
        "#999",
        r#"stroke-dasharray="4 3""#,
    );
    for (i, b) in bands.iter().enumerate() {
        let y = MARGIN + 20.0 + row_h * i as f64;
        s.line(px(b.min), y, px(b.max), y, "#555", r#"class="range" stroke-width="3""#);
        let _ = writeln!(
            s.body,
            r##"<circle cx="{:.2}" cy="{y:.2}" r="4" fill="#d95f02"/>"##,
            px(b.full)
        );
        s.text(x0 - 6.0, y + 4.0, &format!("{} {}", b.word, b.bin), "end", 10.0);
    }
    let axis_y = height - MARGIN;
    s.line(x0, axis_y, x1, axis_y, "black", "");
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        s.text(px(v), axis_y + 14.0, &format!("{v:.2}"), "middle", 10.0);
    }
    s
}

/// Mean split-half drift per (bin, word) with one-std whiskers.
pub fn splithalf_bars(rows: &[SplitHalfRow]) -> Svg {
    let bar_w = 22.0;
    let width = (2.0 * MARGIN + 50.0 + (bar_w + 8.0) * rows.len() as f64).max(420.0);
    let height = 360.0;
    let mut s = Svg::new(width, height, "Split-half drift (within-bin noise floor)");
    let hi = rows
        .iter()
        .filter_map(|r| r.mean.map(|m| m + r.std.unwrap_or(0.0)))
        .fold(0.1, f64::max);
    let (y0, y1) = (height - 110.0, 50.0);
    let x0 = MARGIN + 30.0;
    let py = |v: f64| scale(v, 0.0, hi, y0, y1);
    s.line(x0, y0, width - MARGIN, y0, "black", "");
    s.line(x0, y0, x0, y1, "black", "");
    for i in 0..=4 {
        let v = hi * i as f64 / 4.0;
        s.text(x0 - 6.0, py(v) + 4.0, &format!("{v:.2}"), "end", 10.0);
    }
    let bins = ordered_bins(rows.iter().map(|r| r.bin.as_str()));
    for (i, r) in rows.iter().enumerate() {
        let x = x0 + 8.0 + (bar_w + 8.0) * i as f64;
        let color = PALETTE[bins.iter().position(|b| *b == r.bin).unwrap_or(0) % PALETTE.len()];
        if let Some(m) = r.mean {
            let _ = writeln!(
                s.body,
                r#"<rect class="bar" x="{x:.2}" y="{:.2}" width="{bar_w}" height="{:.2}" fill="{color}"><title>n = {}</title></rect>"#,
                py(m),
                y0 - py(m),
                r.n_effective
            );
            if let Some(sd) = r.std {
                let cx = x + bar_w / 2.0;
                s.line(cx, py(m - sd), cx, py(m + sd), "black", r#"class="whisker""#);
            }
        }
        let lx = x + bar_w / 2.0;
        let _ = writeln!(
            s.body,
            r#"<text x="{lx:.2}" y="{:.2}" font-size="10" text-anchor="end" transform="rotate(-45 {lx:.2} {:.2})">{}</text>"#,
            y0 + 14.0,
            y0 + 14.0,
            escape(&format!("{} {}", r.word, r.bin))
        );
    }
    s
}

const COLD: (f64, f64, f64) = (255.0, 245.0, 235.0);
const HOT: (f64, f64, f64) = (127.0, 39.0, 4.0);

/// Sequential ramp; every channel is monotone in `t ∈ [0, 1]`.
pub fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let c = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        c(COLD.0, HOT.0),
        c(COLD.1, HOT.1),
        c(COLD.2, HOT.2)
    )
}

/// Words × spans grid colored by `value`; missing values are grey.
pub fn heatmap(rows: &[NetDriftRow], title: &str, value: impl Fn(&NetDriftRow) -> Option<f64>) -> Svg {
    let mut words: Vec<&str> = Vec::new();
    let mut spans: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        if !words.contains(&r.word.as_str()) {
            words.push(&r.word);
        }
        if !spans.contains(&(r.start.as_str(), r.end.as_str())) {
            spans.push((&r.start, &r.end));
        }
    }
    let (cw, ch) = (90.0, 26.0);
    let width = MARGIN_LEFT + cw * spans.len() as f64 + MARGIN;
    let height = 2.0 * MARGIN + 40.0 + ch * words.len() as f64;
    let mut s = Svg::new(width.max(360.0), height, title);
    let (lo, hi) = extent(rows.iter().filter_map(&value));
    for (j, (a, b)) in spans.iter().enumerate() {
        s.text(
            MARGIN_LEFT + cw * (j as f64 + 0.5),
            MARGIN + 20.0,
            &span_label(a, b),
            "middle",
            10.0,
        );
    }
    for (i, w) in words.iter().enumerate() {
        let y = MARGIN + 30.0 + ch * i as f64;
        s.text(MARGIN_LEFT - 6.0, y + ch / 2.0 + 4.0, w, "end", 11.0);
        for (j, (a, b)) in spans.iter().enumerate() {
            let x = MARGIN_LEFT + cw * j as f64;
            let cell = rows.iter().find(|r| r.word == *w && r.start == *a && r.end == *b);
            match cell.and_then(&value) {
                Some(v) => {
                    let fill = ramp(scale(v, lo, hi, 0.0, 1.0));
                    let _ = writeln!(
                        s.body,
                        r##"<rect class="cell" data-value="{v:.6}" x="{x:.2}" y="{y:.2}" width="{cw}" height="{ch}" fill="{fill}" stroke="white"/>"##
                    );
                    s.text(x + cw / 2.0, y + ch / 2.0 + 4.0, &format!("{v:.2}"), "middle", 10.0);
                }
                None => {
                    let _ = writeln!(
                        s.body,
                        r##"<rect class="cell missing" x="{x:.2}" y="{y:.2}" width="{cw}" height="{ch}" fill="#dddddd" stroke="white"/>"##
                    );
                    s.text(x + cw / 2.0, y + ch / 2.0 + 4.0, "n/a", "middle", 10.0);
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_channels_are_monotone() {
        let channel = |c: &str, i: usize| u8::from_str_radix(&c[1 + 2 * i..3 + 2 * i], 16).unwrap();
        let colors: Vec<String> = (0..=20).map(|i| ramp(i as f64 / 20.0)).collect();
        for pair in colors.windows(2) {
            for ch in 0..3 {
                assert!(channel(&pair[0], ch) >= channel(&pair[1], ch));
            }
        }
    }

    #[test]
    fn escaping() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn timestamp_is_optional() {
        let svg = Svg::new(10.0, 10.0, "t");
        assert!(!svg.finish(None).contains("generated"));
        assert!(Svg::new(10.0, 10.0, "t")
            .finish(Some("now"))
            .contains("<!-- generated now -->"));
    }
}
