//! Fuzz corpus, inequality suites, thinning sequences and plot output.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::{c_p, functional_f, BoundSet};
use crate::error::{Error, Result};
use crate::geometry::{BodyMetrics, ConvexPolygon, Point};
use crate::parallel::{profile, steiner_check, SteinerReport, WeightProfile, DEFAULT_GRID};
use crate::quantitative::{deficit_report, DeficitReport};
use crate::shapes::{isosceles_triangle, rectangle, thin_stadium, Shape, DEFAULT_ARC_POINTS};
use crate::solver::{default_h_list, richardson_t, RichardsonResult};

/// Consecutive rejections tolerated by [`random_convex_body`].
pub const MAX_REJECTIONS: usize = 1000;
/// Smallest area accepted for a fuzzed body.
pub const MIN_FUZZ_AREA: f64 = 1e-6;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// splitmix64: `s ← s + 0x9E3779B97F4A7C15`, output `mix64(s)` with
/// `z ← (z ⊕ z≫30)·0xBF58476D1CE4E5B9`, `z ← (z ⊕ z≫27)·0x94D049BB133111EB`, `z ⊕ z≫31`.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Independent stream for case `index` of a run seeded with `seed`:
    /// initial state `mix64(seed) ⊕ mix64(index + 0x9E3779B97F4A7C15)`.
    pub fn for_case(seed: u64, index: u64) -> Self {
        SplitMix64::new(mix64(seed) ^ mix64(index.wrapping_add(GAMMA)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuzzConfig {
    pub seed: u64,
    pub count: usize,
    /// Inclusive range of the number of sampled points.
    pub vertices: (usize, usize),
    /// Range of the compression factor applied to the second axis; sampled log-uniformly.
    pub tau: (f64, f64),
}

impl FuzzConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        FuzzConfig { seed, count, vertices: (3, 64), tau: (0.01, 1.0) }
    }

    pub fn validate(&self) -> Result<()> {
        let (v0, v1) = self.vertices;
        let (t0, t1) = self.tau;
        if v0 < 3 || v1 < v0 {
            return Err(Error::BadParameter(format!("vertex range {v0}..={v1}")));
        }
        if !(t0 > 0.0 && t0 <= t1 && t1 <= 1.0) {
            return Err(Error::BadParameter(format!("tau range [{t0}, {t1}]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FuzzBody {
    pub index: usize,
    pub tau: f64,
    pub polygon: ConvexPolygon,
}

/// Convex hull of `n` uniform points in the unit disk with the second coordinate scaled by
/// `τ`; `n` and `τ` are drawn per attempt. Hulls that fail validation or have area below
/// `1e-6` are rejected.
pub fn random_convex_body(config: &FuzzConfig, index: usize) -> Result<FuzzBody> {
    config.validate()?;
    let mut rng = SplitMix64::for_case(config.seed, index as u64);
    let (t0, t1) = config.tau;
    for _ in 0..MAX_REJECTIONS {
        let n = rng.range(config.vertices.0, config.vertices.1);
        let tau = t0 * (t1 / t0).powf(rng.next_f64());
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                let r = rng.next_f64().sqrt();
                let th = 2.0 * PI * rng.next_f64();
                Point::new(r * th.cos(), tau * r * th.sin())
            })
            .collect();
        if let Ok(polygon) = ConvexPolygon::convex_hull(&pts) {
            if polygon.area() >= MIN_FUZZ_AREA {
                return Ok(FuzzBody { index, tau, polygon });
            }
        }
    }
    Err(Error::RejectionOverflow(MAX_REJECTIONS))
}

/// Bodies `0..config.count`.
pub fn fuzz_corpus(config: &FuzzConfig) -> Result<Vec<FuzzBody>> {
    (0..config.count).map(|i| random_convex_body(config, i)).collect()
}

/// Relative tolerance of the inequality suite.
pub const SUITE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    /// The inequality reads `lhs ≤ rhs`.
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs - lhs) / max(|lhs|, |rhs|)`.
    pub slack: f64,
    pub ok: bool,
}

fn leq(name: &'static str, lhs: f64, rhs: f64) -> InequalityCheck {
    let slack = (rhs - lhs) / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    InequalityCheck { name, lhs, rhs, slack, ok: slack >= -SUITE_TOL }
}

/// The planar inequalities between area, perimeter, inradius, width and diameter.
pub fn metric_inequalities(m: &BodyMetrics) -> Vec<InequalityCheck> {
    let (a, p, r, w, d) = (m.area, m.perimeter, m.inradius, m.width, m.diameter);
    vec![
        leq("area_inradius_lower", 0.5, a / (p * r)),
        leq("area_inradius_upper", a / (p * r), 1.0),
        leq("width_inradius_lower", 2.0, w / r),
        leq("width_inradius_upper", w / r, 3.0),
        leq("scott", (w - 2.0 * r) * p, 2.0 / 3f64.sqrt() * w * w),
        leq("santalo", a, r * (p - PI * r)),
        leq("diameter_perimeter_lower", 2.0 * d, p),
        leq("diameter_perimeter_upper", p, PI * d),
        leq("isoperimetric", 4.0 * PI * a, p * p),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
    pub steiner: SteinerReport,
}

/// Runs [`metric_inequalities`] and the inner Steiner checks on a profile with `grid`
/// intervals, failing on the first violation.
pub fn classical_inequality_suite(poly: &ConvexPolygon, grid: usize) -> Result<InequalityReport> {
    let m = poly.metrics();
    let checks = metric_inequalities(&m);
    if let Some(c) = checks.iter().find(|c| !c.ok) {
        return Err(Error::ViolationFound {
            inequality: c.name.into(),
            location: format!("{} <= {}", c.lhs, c.rhs),
            slack: c.slack,
        });
    }
    let prof = profile(poly, WeightProfile::UNIT, grid)?;
    let steiner = steiner_check(&prof)?;
    Ok(InequalityReport { checks, steiner })
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzFailure {
    pub index: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzSummary {
    pub seed: u64,
    pub count: usize,
    pub p: f64,
    pub weight: WeightProfile,
    pub violations: usize,
    pub failures: Vec<FuzzFailure>,
    /// Smallest slack seen for each check: relative for the metric inequalities, absolute for the Steiner ones.
    pub min_slack: BTreeMap<String, f64>,
    /// Largest relative violation of `closed ≤ refined ≤ integral`.
    pub max_chain_defect: f64,
    pub width_over_diameter_range: [f64; 2],
}

/// Runs the inequality suite and the bound-chain check for `f`, `p` on every body of the
/// corpus, in parallel. Failures are collected rather than returned.
pub fn run_fuzz(config: &FuzzConfig, f: &WeightProfile, p: f64, grid: usize) -> Result<FuzzSummary> {
    config.validate()?;
    let results = par_map(config.count, |i| -> Result<(InequalityReport, f64, f64)> {
        let body = random_convex_body(config, i)?;
        let rep = classical_inequality_suite(&body.polygon, grid)?;
        let prof = profile(&body.polygon, *f, grid)?;
        let bounds = BoundSet::compute(&prof, p)?;
        let defect = bounds.chain_defect();
        if defect > SUITE_TOL {
            return Err(Error::ViolationFound {
                inequality: "bound chain".into(),
                location: format!("{bounds:?}"),
                slack: -defect,
            });
        }
        Ok((rep, defect, prof.metrics.width_over_diameter()))
    });
    let mut summary = FuzzSummary {
        seed: config.seed,
        count: config.count,
        p,
        weight: *f,
        violations: 0,
        failures: Vec::new(),
        min_slack: BTreeMap::new(),
        max_chain_defect: 0.0,
        width_over_diameter_range: [f64::INFINITY, 0.0],
    };
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok((rep, defect, wd)) => {
                for c in rep.checks {
                    let e = summary.min_slack.entry(c.name.to_string()).or_insert(f64::INFINITY);
                    *e = e.min(c.slack);
                }
                let st = rep.steiner;
                for (name, s) in [
                    ("steiner_perimeter", st.perimeter_slack),
                    ("steiner_area", st.area_slack),
                    ("perimeter_decay", st.slope_slack),
                ] {
                    let e = summary.min_slack.entry(name.to_string()).or_insert(f64::INFINITY);
                    *e = e.min(s);
                }
                summary.max_chain_defect = summary.max_chain_defect.max(defect);
                summary.width_over_diameter_range[0] = summary.width_over_diameter_range[0].min(wd);
                summary.width_over_diameter_range[1] = summary.width_over_diameter_range[1].max(wd);
            }
            Err(e) => {
                if matches!(e, Error::ViolationFound { .. }) {
                    summary.violations += 1;
                }
                summary.failures.push(FuzzFailure { index, error: e.to_string() });
            }
        }
    }
    Ok(summary)
}

/// Evaluates `f(i)` for `i in 0..n` on all available cores; results are in index order.
pub fn par_map<T: Send, F: Fn(usize) -> T + Sync>(n: usize, f: F) -> Vec<T> {
    let threads = std::thread::available_parallelism().map_or(1, |t| t.get()).min(n.max(1));
    if threads <= 1 {
        return (0..n).map(f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut out: Vec<(usize, T)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|_| {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= n {
                            break;
                        }
                        local.push((i, f(i)));
                    }
                    local
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, t)| t).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    /// Approximate node count of the finest Richardson level.
    pub finest_nodes: usize,
    /// Intervals of the parallel-set profile.
    pub grid: usize,
    /// Explicit coarsest mesh size; overrides `finest_nodes`.
    pub h: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { finest_nodes: 20_000, grid: DEFAULT_GRID, h: None }
    }
}

/// Lower bounds, extrapolated solver value and deficit report for one body.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub metrics: BodyMetrics,
    pub bounds: BoundSet,
    pub richardson: RichardsonResult,
    #[serde(rename = "T")]
    pub t: f64,
    pub t_error: f64,
    pub deficit: DeficitReport,
}

impl Evaluation {
    /// `(T - t_error - closed) / closed`.
    pub fn polya_slack(&self) -> f64 {
        (self.t - self.t_error - self.bounds.closed) / self.bounds.closed
    }
}

pub fn evaluate(poly: &ConvexPolygon, f: &WeightProfile, p: f64, opts: &SolveOptions) -> Result<Evaluation> {
    let prof = profile(poly, *f, opts.grid)?;
    let bounds = BoundSet::compute(&prof, p)?;
    let h_list = match opts.h {
        Some(h) => vec![h, h / 2.0, h / 4.0],
        None => default_h_list(poly, opts.finest_nodes),
    };
    let richardson = richardson_t(poly, f, p, &h_list)?;
    let t = richardson.extrapolated;
    let t_error = richardson.error_estimate;
    let deficit = deficit_report(poly, t, t_error, p)?;
    Ok(Evaluation { metrics: prof.metrics, bounds, richardson, t, t_error, deficit })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Rectangle,
    Triangle,
    Stadium,
}

impl FromStr for SequenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangle" => Ok(SequenceKind::Rectangle),
            "triangle" => Ok(SequenceKind::Triangle),
            "stadium" => Ok(SequenceKind::Stadium),
            _ => Err(Error::BadParameter(format!("unknown sequence kind `{s}`"))),
        }
    }
}

impl SequenceKind {
    pub fn shape(self, l: f64) -> Result<Shape> {
        match self {
            SequenceKind::Rectangle => rectangle(l),
            SequenceKind::Triangle => isosceles_triangle(l),
            SequenceKind::Stadium => thin_stadium(l, DEFAULT_ARC_POINTS),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SequenceKind::Rectangle => "rectangle",
            SequenceKind::Triangle => "triangle",
            SequenceKind::Stadium => "stadium",
        }
    }
}

pub const DEFAULT_L_GRID: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

#[derive(Debug, Clone, Serialize)]
pub struct SequenceRow {
    pub l: f64,
    pub area: f64,
    pub perimeter: f64,
    pub width: f64,
    pub diameter: f64,
    pub inradius: f64,
    pub closed: f64,
    pub refined: f64,
    pub integral: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub t_error: f64,
    pub reference_t: Option<f64>,
    pub slab_upper: Option<f64>,
    #[serde(rename = "F_p")]
    pub f_p: f64,
    pub deficit: f64,
    pub theorem2_ok: bool,
    pub theorem3_ok: Option<bool>,
}

/// One row per `l`, evaluated in parallel and returned in grid order.
pub fn run_sequence(
    kind: SequenceKind,
    ls: &[f64],
    p: f64,
    f: &WeightProfile,
    opts: &SolveOptions,
) -> Result<Vec<SequenceRow>> {
    if ls.is_empty() {
        return Err(Error::BadParameter("empty l grid".into()));
    }
    par_map(ls.len(), |i| -> Result<SequenceRow> {
        let l = ls[i];
        let shape = kind.shape(l)?;
        let ev = evaluate(&shape.polygon, f, p, opts)?;
        let m = ev.metrics;
        Ok(SequenceRow {
            l,
            area: m.area,
            perimeter: m.perimeter,
            width: m.width,
            diameter: m.diameter,
            inradius: m.inradius,
            closed: ev.bounds.closed,
            refined: ev.bounds.refined,
            integral: ev.bounds.integral,
            t: ev.t,
            t_error: ev.t_error,
            reference_t: shape.reference_torsion(f, p),
            slab_upper: shape.slab_upper(f, p),
            f_p: functional_f(ev.t, &m, p),
            deficit: ev.deficit.deficit,
            theorem2_ok: ev.deficit.theorem2_ok,
            theorem3_ok: ev.deficit.theorem3_ok,
        })
    })
    .into_iter()
    .collect()
}

const SEQUENCE_HEADER: &str =
    "l,area,perimeter,width,diameter,inradius,closed,refined,integral,T,T_error,T_reference,slab_upper,F_p,deficit,theorem2_ok,theorem3_ok";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV with a header row; numbers carry 17 significant digits, absent values are empty.
pub fn sequence_csv(rows: &[SequenceRow]) -> String {
    let mut out = String::from(SEQUENCE_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            num(r.l),
            num(r.area),
            num(r.perimeter),
            num(r.width),
            num(r.diameter),
            num(r.inradius),
            num(r.closed),
            num(r.refined),
            num(r.integral),
            num(r.t),
            num(r.t_error),
            opt_num(r.reference_t),
            opt_num(r.slab_upper),
            num(r.f_p),
            num(r.deficit),
            r.theorem2_ok.to_string(),
            r.theorem3_ok.map(|b| b.to_string()).unwrap_or_default(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Static line chart: one polyline per series, axis labels and tick values at the extremes.
pub fn svg_line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, margin) = (640.0, 400.0, 60.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = margin,
        b = h - margin,
        r = w - margin
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, w / 2.0, h - 15.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (v, x, anchor) in [(x0, margin, "start"), (x1, w - margin, "end")] {
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="{anchor}" font-size="11">{v:.4}</text>"#, h - margin + 16.0);
    }
    for (v, y) in [(y0, h - margin), (y1, margin)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" font-size="11">{v:.4}</text>"#, margin - 4.0);
    }
    for (k, ser) in series.iter().enumerate() {
        let color = colors[k % colors.len()];
        let path: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            w - margin - 150.0,
            margin + 16.0 * (k as f64 + 1.0),
            escape(ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `F_p` against `l` with the constant `c_p` for reference.
pub fn sequence_svg(kind: SequenceKind, rows: &[SequenceRow], p: f64) -> String {
    let f = Series { name: "F_p", points: rows.iter().map(|r| (r.l, r.f_p)).collect() };
    let c = Series { name: "c_p", points: rows.iter().map(|r| (r.l, c_p(p))).collect() };
    svg_line_chart(&format!("{} sequence, p = {p}", kind.name()), "l", "F_p", &[f, c])
}
