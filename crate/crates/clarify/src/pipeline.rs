//! End-to-end runs: read input, build the dual graph, optimize colors,
//! render the requested output, and collect a machine-readable report.
//!
//! Two modes share the optimizer. Layout mode parses a laid-out DOT file,
//! detects ambiguous edge pairs, and colors edges. Map mode parses a region
//! adjacency list (`region: neighbor neighbor ...` per line) and colors
//! regions, weighting each region pair by the inverse of its hop distance.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::collision::{build_collision_graph, build_map_dual, DualGraphError};
use crate::colorspace::{
    builtin_palette, display_rgb, interpolate_palette, load_or_sample_gamut, make_gray,
    make_rgb_box, parse_palette, rgb_to_hex, ColorError, ColorSpace, GamutSampleConfig,
    PaletteOrdering,
};
use crate::dot::{emit_colored_dot, parse_layout, write_id, DotError};
use crate::geometry::{GeomConfig, GeometryError};
use crate::graph::GraphError;
use crate::optimizer::{clarify, OptimizerConfig, OptimizerError};
use crate::svg::{emit_svg, EdgeStroke};

/// Interpolated palette resolution (number of sample colors).
pub const PALETTE_SAMPLES: usize = 10_000;

/// RGB intensity ceiling keeping edge colors legible on white.
pub const RGB_MAX_INTENSITY: f64 = 0.7;

/// Random restarts used when the caller does not pick a count: thorough for
/// small dual graphs, single-start beyond this many dual nodes.
pub const AUTO_RESTART_LIMIT: usize = 100;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("reading {0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error(transparent)]
    Dot(#[from] DotError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dual(#[from] DualGraphError),
    #[error(transparent)]
    Color(#[from] ColorError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("map file line {0}: {1}")]
    Map(usize, String),
}

/// Which color space edges (or regions) are embedded into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColorScheme {
    /// RGB cube capped at [`RGB_MAX_INTENSITY`].
    Rgb,
    /// Sampled sRGB gamut in CIE LAB.
    Lab,
    /// One-dimensional gray axis.
    Gray,
    /// Colors interpolated along a palette: built-in name or file path.
    Palette(String),
}

impl ColorScheme {
    pub fn parse(s: &str) -> Result<Self, PipelineError> {
        match s {
            "rgb" => Ok(ColorScheme::Rgb),
            "lab" => Ok(ColorScheme::Lab),
            "gray" => Ok(ColorScheme::Gray),
            _ => match s.strip_prefix("palette:") {
                Some(rest) if !rest.is_empty() => Ok(ColorScheme::Palette(rest.to_string())),
                _ => Err(PipelineError::Config(format!(
                    "unknown color scheme {s:?} (expected rgb, lab, gray, or palette:<name-or-file>)"
                ))),
            },
        }
    }

    fn label(&self) -> String {
        match self {
            ColorScheme::Rgb => "rgb".into(),
            ColorScheme::Lab => "lab".into(),
            ColorScheme::Gray => "gray".into(),
            ColorScheme::Palette(p) => format!("palette:{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Dot,
    Svg,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, PipelineError> {
        match s {
            "dot" => Ok(OutputFormat::Dot),
            "svg" => Ok(OutputFormat::Svg),
            "json" => Ok(OutputFormat::Json),
            _ => Err(PipelineError::Config(format!(
                "unknown output format {s:?} (expected dot, svg, or json)"
            ))),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            OutputFormat::Dot => "dot",
            OutputFormat::Svg => "svg",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub scheme: ColorScheme,
    /// Lightness window for the lab scheme.
    pub lightness: Option<(f64, f64)>,
    pub epsilon: f64,
    /// `None` picks 10 restarts for dual graphs up to
    /// [`AUTO_RESTART_LIMIT`] nodes and 1 beyond.
    pub random_starts: Option<usize>,
    pub seed: u64,
    pub small_angle: f64,
    pub straight_angle: f64,
    pub enable_c3: bool,
    pub near_dist_frac: f64,
    pub parallel_angle: f64,
    pub output: OutputFormat,
    pub dash_styles: bool,
    pub map_mode: bool,
    /// Gamut cache directory; defaults to `$CLARIFY_CACHE_DIR` or a
    /// directory under the system temp dir.
    pub cache_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: input.into(),
            scheme: ColorScheme::Rgb,
            lightness: None,
            epsilon: 1e-2,
            random_starts: None,
            seed: 0,
            small_angle: 15.0,
            straight_angle: 165.0,
            enable_c3: true,
            near_dist_frac: 0.01,
            parallel_angle: 1.0,
            output: OutputFormat::Dot,
            dash_styles: false,
            map_mode: false,
            cache_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.lightness.is_some() && self.scheme != ColorScheme::Lab {
            return Err(PipelineError::Config(
                "--lightness only applies to the lab color scheme".into(),
            ));
        }
        if let Some((lo, hi)) = self.lightness {
            if !(lo >= 0.0 && hi <= 100.0 && lo < hi) {
                return Err(PipelineError::Config(format!(
                    "lightness window must satisfy 0 <= min < max <= 100, got {lo},{hi}"
                )));
            }
        }
        if self.dash_styles && self.scheme != ColorScheme::Gray {
            return Err(PipelineError::Config(
                "--dash-styles only applies to the gray color scheme".into(),
            ));
        }
        if self.map_mode && self.output == OutputFormat::Svg {
            return Err(PipelineError::Config(
                "map mode has no geometry to render; use dot or json output".into(),
            ));
        }
        Ok(())
    }

    fn geometry(&self) -> GeomConfig {
        GeomConfig {
            small_angle_deg: self.small_angle,
            straight_angle_deg: self.straight_angle,
            near_dist_frac: self.near_dist_frac,
            parallel_angle_deg: self.parallel_angle,
            enable_c3: self.enable_c3,
            ..Default::default()
        }
    }
}

/// JSON report accompanying (or constituting) the output.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub mode: &'static str,
    pub color_scheme: String,
    pub output: &'static str,
    pub counts: Counts,
    pub components: usize,
    pub multi_node_components: usize,
    /// Smallest weighted color distance over colliding pairs; `null` when
    /// nothing collides.
    pub mindist: Option<f64>,
    pub sumdist: f64,
    pub assignments: Vec<Assignment>,
    pub timings_ms: Timings,
}

#[derive(Debug, Serialize)]
pub struct Counts {
    /// Graph nodes (layout mode) or regions (map mode).
    pub nodes: usize,
    /// Graph edges (layout mode) or adjacency pairs (map mode).
    pub edges: usize,
    /// Dual-graph edges: colliding pairs, or weighted region pairs.
    pub colliding_pairs: usize,
}

#[derive(Debug, Serialize)]
pub struct Assignment {
    /// Dual node id: edge index (layout mode) or region index (map mode).
    pub id: usize,
    /// `tail -- head` for edges, the region name for regions.
    pub label: String,
    /// Coordinates in the color space.
    pub coords: Vec<f64>,
    /// Display color.
    pub hex: String,
}

/// Stage durations in milliseconds. `emit` is zero for JSON output, where
/// the report itself is the document.
#[derive(Debug, Serialize)]
pub struct Timings {
    pub parse: f64,
    pub build_space: f64,
    pub collide: f64,
    pub optimize: f64,
    pub emit: f64,
    pub total: f64,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    /// The rendered document (DOT, SVG, or the serialized report).
    pub text: String,
    pub report: Report,
}

fn default_cache_dir() -> PathBuf {
    env::var_os("CLARIFY_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| env::temp_dir().join("clarify-gamut-cache"))
}

/// Builds the color space for a scheme; LAB goes through the gamut cache.
pub fn build_space(
    scheme: &ColorScheme,
    lightness: Option<(f64, f64)>,
    cache_dir: Option<&Path>,
) -> Result<ColorSpace, PipelineError> {
    match scheme {
        ColorScheme::Rgb => Ok(make_rgb_box(RGB_MAX_INTENSITY)?),
        ColorScheme::Gray => Ok(make_gray(0.0, 1.0)?),
        ColorScheme::Lab => {
            let (l_min, l_max) = lightness.unwrap_or((0.0, 100.0));
            let cfg = GamutSampleConfig {
                l_min,
                l_max,
                ..Default::default()
            };
            let dir = cache_dir
                .map(Path::to_path_buf)
                .unwrap_or_else(default_cache_dir);
            Ok(ColorSpace::Samples(load_or_sample_gamut(&cfg, &dir)?))
        }
        ColorScheme::Palette(which) => {
            let colors = match builtin_palette(which) {
                Some(c) => c,
                None => {
                    let path = Path::new(which);
                    let text = fs::read_to_string(path)
                        .map_err(|e| PipelineError::Io(path.to_path_buf(), e))?;
                    parse_palette(&text)?
                }
            };
            Ok(ColorSpace::Samples(interpolate_palette(
                &colors,
                PALETTE_SAMPLES,
                PaletteOrdering::Natural,
            )?))
        }
    }
}

/// Parses a region adjacency list: one `region: neighbor neighbor ...` per
/// line, `#` comments, names in first-mention order. Returns region names
/// and symmetric neighbor index lists.
pub fn parse_map_regions(text: &str) -> Result<(Vec<String>, Vec<Vec<usize>>), PipelineError> {
    fn intern(
        names: &mut Vec<String>,
        index: &mut std::collections::HashMap<String, usize>,
        name: &str,
    ) -> usize {
        match index.get(name) {
            Some(&i) => i,
            None => {
                let i = names.len();
                names.push(name.to_string());
                index.insert(name.to_string(), i);
                i
            }
        }
    }
    let mut names: Vec<String> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, rest) = line.split_once(':').ok_or_else(|| {
            PipelineError::Map(lineno + 1, "expected \"region: neighbor ...\"".into())
        })?;
        let name = name.trim();
        if name.is_empty() {
            return Err(PipelineError::Map(lineno + 1, "empty region name".into()));
        }
        let region = intern(&mut names, &mut index, name);
        for n in rest.split_whitespace() {
            let other = intern(&mut names, &mut index, n);
            if other == region {
                return Err(PipelineError::Map(
                    lineno + 1,
                    format!("region \"{name}\" cannot neighbor itself"),
                ));
            }
            pairs.push((region, other));
        }
    }
    if names.is_empty() {
        return Err(PipelineError::Map(0, "no regions defined".into()));
    }
    let mut adjacency = vec![Vec::new(); names.len()];
    for (i, j) in pairs {
        if !adjacency[i].contains(&j) {
            adjacency[i].push(j);
        }
        if !adjacency[j].contains(&i) {
            adjacency[j].push(i);
        }
    }
    Ok((names, adjacency))
}

fn emit_map_dot(
    names: &[String],
    adjacency: &[Vec<usize>],
    hex: &[String],
) -> String {
    let mut out = String::from("graph regions {\n  node [style=filled];\n");
    for (name, color) in names.iter().zip(hex) {
        out.push_str("  ");
        write_id(&mut out, name);
        out.push_str(&format!(" [fillcolor=\"{color}\"];\n"));
    }
    for (i, ns) in adjacency.iter().enumerate() {
        for &j in ns {
            if i < j {
                out.push_str("  ");
                write_id(&mut out, &names[i]);
                out.push_str(" -- ");
                write_id(&mut out, &names[j]);
                out.push_str(";\n");
            }
        }
    }
    out.push_str("}\n");
    out
}

/// `stroke-dasharray` for a gray level when dash styles are on: the dark
/// third stays solid, the middle third dashes long, the light third short.
fn dash_for_gray(level: f64) -> Option<&'static str> {
    if level < 1.0 / 3.0 {
        None
    } else if level < 2.0 / 3.0 {
        Some("8,4")
    } else {
        Some("3,3")
    }
}

fn ms(from: Instant) -> f64 {
    from.elapsed().as_secs_f64() * 1e3
}

/// Runs the full pipeline described by `cfg`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    cfg.validate()?;
    let total_start = Instant::now();
    let src = fs::read_to_string(&cfg.input)
        .map_err(|e| PipelineError::Io(cfg.input.clone(), e))?;

    if cfg.map_mode {
        run_map(cfg, &src, total_start)
    } else {
        run_layout(cfg, &src, total_start)
    }
}

struct OptimizedDual {
    result: crate::optimizer::ClarifyResult,
    components: usize,
    multi_node_components: usize,
    colliding_pairs: usize,
    optimize_ms: f64,
}

fn optimize_dual(
    cfg: &PipelineConfig,
    space: &ColorSpace,
    dual: &crate::collision::DualCollisionGraph,
) -> Result<OptimizedDual, PipelineError> {
    let comps = dual.components();
    let multi = comps.iter().filter(|c| c.len() > 1).count();
    let starts = cfg.random_starts.unwrap_or(if dual.node_count() <= AUTO_RESTART_LIMIT {
        10
    } else {
        1
    });
    let opt_cfg = OptimizerConfig {
        epsilon: cfg.epsilon,
        random_starts: starts,
        rng_seed: cfg.seed,
        max_outer_iterations: OptimizerConfig::default().max_outer_iterations,
    };
    let t = Instant::now();
    let result = clarify(space, dual, &opt_cfg)?;
    Ok(OptimizedDual {
        result,
        components: comps.len(),
        multi_node_components: multi,
        colliding_pairs: dual.edges().len(),
        optimize_ms: ms(t),
    })
}

fn run_layout(
    cfg: &PipelineConfig,
    src: &str,
    total_start: Instant,
) -> Result<PipelineOutcome, PipelineError> {
    let geometry = cfg.geometry();

    let t = Instant::now();
    let layout = parse_layout(src, geometry.spline_flatten_tol)?;
    let parse_ms = ms(t);

    let t = Instant::now();
    let space = build_space(&cfg.scheme, cfg.lightness, cfg.cache_dir.as_deref())?;
    let build_space_ms = ms(t);

    let t = Instant::now();
    let dual = build_collision_graph(&layout, &geometry)?;
    let collide_ms = ms(t);

    let opt = optimize_dual(cfg, &space, &dual)?;
    let kind = space.kind();
    let hex: Vec<String> = opt
        .result
        .colors
        .iter()
        .map(|c| rgb_to_hex(display_rgb(c, kind)))
        .collect();

    let assignments: Vec<Assignment> = opt
        .result
        .colors
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let e = layout.edge(i);
            Assignment {
                id: i,
                label: format!(
                    "{} -- {}",
                    layout.node(e.tail).name,
                    layout.node(e.head).name
                ),
                coords: c.coords().to_vec(),
                hex: hex[i].clone(),
            }
        })
        .collect();

    let t = Instant::now();
    let (text, emit_ms) = match cfg.output {
        OutputFormat::Dot => (emit_colored_dot(&layout, &hex), ms(t)),
        OutputFormat::Svg => {
            let strokes: Vec<EdgeStroke> = opt
                .result
                .colors
                .iter()
                .zip(&hex)
                .map(|(c, h)| EdgeStroke {
                    color: h.clone(),
                    dasharray: if cfg.dash_styles {
                        dash_for_gray(c.get(0))
                    } else {
                        None
                    },
                })
                .collect();
            (emit_svg(&layout, &strokes), ms(t))
        }
        OutputFormat::Json => (String::new(), 0.0),
    };

    let report = Report {
        schema_version: 1,
        mode: "layout",
        color_scheme: cfg.scheme.label(),
        output: cfg.output.label(),
        counts: Counts {
            nodes: layout.nodes().len(),
            edges: layout.edges().len(),
            colliding_pairs: opt.colliding_pairs,
        },
        components: opt.components,
        multi_node_components: opt.multi_node_components,
        mindist: opt.result.mindist.is_finite().then_some(opt.result.mindist),
        sumdist: opt.result.sumdist,
        assignments,
        timings_ms: Timings {
            parse: parse_ms,
            build_space: build_space_ms,
            collide: collide_ms,
            optimize: opt.optimize_ms,
            emit: emit_ms,
            total: ms(total_start),
        },
    };
    finish(cfg, text, report)
}

fn run_map(
    cfg: &PipelineConfig,
    src: &str,
    total_start: Instant,
) -> Result<PipelineOutcome, PipelineError> {
    let t = Instant::now();
    let (names, adjacency) = parse_map_regions(src)?;
    let parse_ms = ms(t);

    let t = Instant::now();
    let space = build_space(&cfg.scheme, cfg.lightness, cfg.cache_dir.as_deref())?;
    let build_space_ms = ms(t);

    let t = Instant::now();
    let dual = build_map_dual(&adjacency)?;
    let collide_ms = ms(t);

    let opt = optimize_dual(cfg, &space, &dual)?;
    let kind = space.kind();
    let hex: Vec<String> = opt
        .result
        .colors
        .iter()
        .map(|c| rgb_to_hex(display_rgb(c, kind)))
        .collect();

    let assignments: Vec<Assignment> = opt
        .result
        .colors
        .iter()
        .enumerate()
        .map(|(i, c)| Assignment {
            id: i,
            label: names[i].clone(),
            coords: c.coords().to_vec(),
            hex: hex[i].clone(),
        })
        .collect();

    let adjacency_pairs = adjacency.iter().map(|n| n.len()).sum::<usize>() / 2;
    let t = Instant::now();
    let (text, emit_ms) = match cfg.output {
        OutputFormat::Dot => (emit_map_dot(&names, &adjacency, &hex), ms(t)),
        OutputFormat::Json => (String::new(), 0.0),
        OutputFormat::Svg => unreachable!("rejected by validate"),
    };

    let report = Report {
        schema_version: 1,
        mode: "map",
        color_scheme: cfg.scheme.label(),
        output: cfg.output.label(),
        counts: Counts {
            nodes: names.len(),
            edges: adjacency_pairs,
            colliding_pairs: opt.colliding_pairs,
        },
        components: opt.components,
        multi_node_components: opt.multi_node_components,
        mindist: opt.result.mindist.is_finite().then_some(opt.result.mindist),
        sumdist: opt.result.sumdist,
        assignments,
        timings_ms: Timings {
            parse: parse_ms,
            build_space: build_space_ms,
            collide: collide_ms,
            optimize: opt.optimize_ms,
            emit: emit_ms,
            total: ms(total_start),
        },
    };
    finish(cfg, text, report)
}

fn finish(
    cfg: &PipelineConfig,
    text: String,
    report: Report,
) -> Result<PipelineOutcome, PipelineError> {
    let text = if cfg.output == OutputFormat::Json {
        let mut json = serde_json::to_string_pretty(&report)
            .expect("report serialization cannot fail");
        json.push('\n');
        json
    } else {
        text
    };
    Ok(PipelineOutcome { text, report })
}
