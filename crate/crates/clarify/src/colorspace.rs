//! Color spaces the optimizer can embed into: continuous boxes (RGB cube,
//! gray axis) and discrete sample sets (the sRGB gamut in LAB, interpolated
//! palettes).
//!
//! Conversions use IEC 61966-2-1 sRGB companding with the canonical 7-digit
//! sRGB/D65 matrices and D65 white (0.95047, 1.0, 1.08883). `lab_to_rgb`
//! clamps out-of-gamut channels, which doubles as the gamut test: a LAB grid
//! point is inside the sRGB gamut iff LAB -> RGB -> LAB comes back (almost)
//! unchanged.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ColorError {
    #[error("invalid color space config: {0}")]
    InvalidConfig(String),
    #[error("palette needs at least 2 colors, got {0}")]
    TooFewColors(usize),
    #[error("sample count {samples} must be at least the palette size {k}")]
    TooFewSamples { k: usize, samples: usize },
    #[error("palette colors all coincide; nothing to interpolate")]
    DegeneratePalette,
    #[error("palette line {0}: expected #rrggbb, got {1:?}")]
    BadPaletteLine(usize, String),
    #[error("unknown palette {0:?}")]
    UnknownPalette(String),
    #[error("gamut cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Which family of coordinates a space (and its points) lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// sRGB channel values, each in [0, 1].
    Rgb,
    /// CIE L*a*b* coordinates.
    Lab,
    /// Single luminance value in [0, 1], 0 = black.
    Gray,
}

/// A point with 1..=3 coordinates; unused trailing coordinates stay 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorPoint {
    dim: u8,
    coords: [f64; 3],
}

impl ColorPoint {
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            (1..=3).contains(&coords.len()),
            "color points have 1 to 3 coordinates"
        );
        let mut c = [0.0; 3];
        c[..coords.len()].copy_from_slice(coords);
        ColorPoint {
            dim: coords.len() as u8,
            coords: c,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    pub fn get(&self, axis: usize) -> f64 {
        self.coords()[axis]
    }

    pub fn dist(&self, o: &ColorPoint) -> f64 {
        debug_assert_eq!(self.dim, o.dim);
        let mut s = 0.0;
        for k in 0..self.dim as usize {
            let d = self.coords[k] - o.coords[k];
            s += d * d;
        }
        s.sqrt()
    }
}

/// An axis-aligned continuous box of colors.
#[derive(Debug, Clone)]
pub struct ContinuousBox {
    pub kind: SpaceKind,
    dim: usize,
    lower: [f64; 3],
    upper: [f64; 3],
}

impl ContinuousBox {
    pub fn new(kind: SpaceKind, lower: &[f64], upper: &[f64]) -> Result<Self, ColorError> {
        assert_eq!(lower.len(), upper.len());
        let dim = lower.len();
        if !(1..=3).contains(&dim) {
            return Err(ColorError::InvalidConfig(format!(
                "box dimension must be 1 to 3, got {dim}"
            )));
        }
        for k in 0..dim {
            if !(lower[k].is_finite() && upper[k].is_finite() && lower[k] < upper[k]) {
                return Err(ColorError::InvalidConfig(format!(
                    "box axis {k} needs finite lower < upper, got [{}, {}]",
                    lower[k], upper[k]
                )));
            }
        }
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        lo[..dim].copy_from_slice(lower);
        hi[..dim].copy_from_slice(upper);
        Ok(ContinuousBox {
            kind,
            dim,
            lower: lo,
            upper: hi,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper[..self.dim]
    }

    pub fn contains(&self, p: &ColorPoint) -> bool {
        p.dim() == self.dim
            && (0..self.dim).all(|k| p.get(k) >= self.lower[k] && p.get(k) <= self.upper[k])
    }
}

/// A deduplicated, immutable set of sample colors.
#[derive(Debug, Clone)]
pub struct DiscreteSamples {
    pub kind: SpaceKind,
    dim: usize,
    points: Vec<ColorPoint>,
}

impl DiscreteSamples {
    /// Keeps the first occurrence of each distinct point, preserving order.
    pub fn new(kind: SpaceKind, points: Vec<ColorPoint>) -> Result<Self, ColorError> {
        if points.is_empty() {
            return Err(ColorError::InvalidConfig(
                "discrete space needs at least one sample".into(),
            ));
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(ColorError::InvalidConfig(
                "samples must share one dimension".into(),
            ));
        }
        // order-preserving exact dedup via a sort over indices
        let mut order: Vec<usize> = (0..points.len()).collect();
        let key = |p: &ColorPoint| {
            let mut k = [0u64; 3];
            for (i, c) in p.coords.iter().enumerate() {
                k[i] = c.to_bits();
            }
            k
        };
        order.sort_by(|&a, &b| key(&points[a]).cmp(&key(&points[b])).then(a.cmp(&b)));
        let mut drop = vec![false; points.len()];
        for w in order.windows(2) {
            if key(&points[w[0]]) == key(&points[w[1]]) {
                drop[w[1].max(w[0])] = true;
            }
        }
        let points: Vec<ColorPoint> = points
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !drop[*i])
            .map(|(_, p)| p)
            .collect();
        Ok(DiscreteSamples { kind, dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &ColorPoint {
        &self.points[i]
    }

    pub fn points(&self) -> &[ColorPoint] {
        &self.points
    }
}

/// A color space the optimizer can place points into.
#[derive(Debug, Clone)]
pub enum ColorSpace {
    Box(ContinuousBox),
    Samples(DiscreteSamples),
}

impl ColorSpace {
    pub fn dim(&self) -> usize {
        match self {
            ColorSpace::Box(b) => b.dim(),
            ColorSpace::Samples(s) => s.dim(),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        match self {
            ColorSpace::Box(b) => b.kind,
            ColorSpace::Samples(s) => s.kind,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ColorSpace::Samples(_))
    }

    pub fn samples(&self) -> Option<&DiscreteSamples> {
        match self {
            ColorSpace::Box(_) => None,
            ColorSpace::Samples(s) => Some(s),
        }
    }

    /// Exact membership; O(n) for discrete spaces (validation use only).
    pub fn contains(&self, p: &ColorPoint) -> bool {
        match self {
            ColorSpace::Box(b) => b.contains(p),
            ColorSpace::Samples(s) => s.points().contains(p),
        }
    }

    /// The darkest representable color: the all-lower-bound corner of a box,
    /// or the sample nearest the coordinate origin (LAB black), lowest index
    /// winning ties.
    pub fn default_point(&self) -> ColorPoint {
        match self {
            ColorSpace::Box(b) => ColorPoint::new(b.lower()),
            ColorSpace::Samples(s) => {
                let origin = ColorPoint::new(&vec![0.0; s.dim()]);
                let mut best = 0;
                let mut best_d = s.point(0).dist(&origin);
                for (i, p) in s.points().iter().enumerate().skip(1) {
                    let d = p.dist(&origin);
                    if d < best_d {
                        best = i;
                        best_d = d;
                    }
                }
                *s.point(best)
            }
        }
    }
}

/// RGB cube `[0, max_intensity]^3`; the paper-default ceiling 0.7 keeps
/// colors dark enough to read on white.
pub fn make_rgb_box(max_intensity: f64) -> Result<ColorSpace, ColorError> {
    if !(max_intensity > 0.0 && max_intensity <= 1.0) {
        return Err(ColorError::InvalidConfig(format!(
            "RGB max intensity must be in (0, 1], got {max_intensity}"
        )));
    }
    Ok(ColorSpace::Box(ContinuousBox::new(
        SpaceKind::Rgb,
        &[0.0; 3],
        &[max_intensity; 3],
    )?))
}

/// One-dimensional gray interval `[lo, hi]` within [0, 1], 0 = black.
pub fn make_gray(lo: f64, hi: f64) -> Result<ColorSpace, ColorError> {
    if !(lo >= 0.0 && hi <= 1.0 && lo < hi) {
        return Err(ColorError::InvalidConfig(format!(
            "gray range must satisfy 0 <= lo < hi <= 1, got [{lo}, {hi}]"
        )));
    }
    Ok(ColorSpace::Box(ContinuousBox::new(
        SpaceKind::Gray,
        &[lo],
        &[hi],
    )?))
}

// --- sRGB <-> CIE LAB ------------------------------------------------------

const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];
const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];
const DELTA: f64 = 6.0 / 29.0;

fn srgb_linearize(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn srgb_compand(c: f64) -> f64 {
    if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    if t > DELTA {
        t * t * t
    } else {
        3.0 * DELTA * DELTA * (t - 4.0 / 29.0)
    }
}

/// sRGB in [0, 1] per channel to CIE LAB (L in [0, 100]).
pub fn rgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = [
        srgb_linearize(rgb[0]),
        srgb_linearize(rgb[1]),
        srgb_linearize(rgb[2]),
    ];
    let mut xyz = [0.0; 3];
    for (i, row) in RGB_TO_XYZ.iter().enumerate() {
        xyz[i] = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// CIE LAB to sRGB, clamping each out-of-gamut channel into [0, 1].
pub fn lab_to_rgb(lab: [f64; 3]) -> [f64; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;
    let xyz = [
        WHITE[0] * lab_f_inv(fx),
        WHITE[1] * lab_f_inv(fy),
        WHITE[2] * lab_f_inv(fz),
    ];
    let mut rgb = [0.0; 3];
    for (i, row) in XYZ_TO_RGB.iter().enumerate() {
        let lin = row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2];
        rgb[i] = srgb_compand(lin.max(0.0)).clamp(0.0, 1.0);
    }
    rgb
}

/// Display RGB for a color point of the given space kind.
pub fn display_rgb(p: &ColorPoint, kind: SpaceKind) -> [f64; 3] {
    match kind {
        SpaceKind::Rgb => [p.get(0), p.get(1), p.get(2)],
        SpaceKind::Gray => [p.get(0); 3],
        SpaceKind::Lab => lab_to_rgb([p.get(0), p.get(1), p.get(2)]),
    }
}

/// `#rrggbb` with channels scaled by 255 and rounded half-up.
pub fn rgb_to_hex(rgb: [f64; 3]) -> String {
    let chan = |c: f64| (c.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8;
    format!("#{:02x}{:02x}{:02x}", chan(rgb[0]), chan(rgb[1]), chan(rgb[2]))
}

/// Parses `#rrggbb` into [0, 1] channels.
pub fn hex_to_rgb(s: &str) -> Option<[f64; 3]> {
    let hex = s.strip_prefix('#')?;
    if hex.len() != 6 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).unwrap() as f64 / 255.0;
    Some([byte(0), byte(2), byte(4)])
}

// --- LAB gamut sampling ----------------------------------------------------

/// Grid sampling parameters for the sRGB gamut in LAB space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamutSampleConfig {
    /// Grid pitch over [0,100] x [-128,128] x [-128,128].
    pub step: f64,
    /// Keep a grid point iff LAB -> RGB -> LAB moves it at most this far.
    pub roundtrip_tol: f64,
    /// Lightness window applied after sampling.
    pub l_min: f64,
    pub l_max: f64,
}

impl Default for GamutSampleConfig {
    fn default() -> Self {
        GamutSampleConfig {
            step: 1.0,
            roundtrip_tol: 0.02,
            l_min: 0.0,
            l_max: 100.0,
        }
    }
}

impl GamutSampleConfig {
    pub fn validate(&self) -> Result<(), ColorError> {
        if !(self.step > 0.0 && self.step <= 100.0) {
            return Err(ColorError::InvalidConfig(format!(
                "gamut step must be in (0, 100], got {}",
                self.step
            )));
        }
        if !(self.roundtrip_tol > 0.0 && self.roundtrip_tol.is_finite()) {
            return Err(ColorError::InvalidConfig(format!(
                "round-trip tolerance must be positive, got {}",
                self.roundtrip_tol
            )));
        }
        if !(self.l_min >= 0.0 && self.l_max <= 100.0 && self.l_min < self.l_max) {
            return Err(ColorError::InvalidConfig(format!(
                "lightness window must satisfy 0 <= min < max <= 100, got [{}, {}]",
                self.l_min, self.l_max
            )));
        }
        Ok(())
    }
}

fn grid_values(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(move |i| lo + i as f64 * step)
}

/// Samples the sRGB gamut on a LAB grid: a point survives iff its round trip
/// through (clamped) RGB stays within `roundtrip_tol` and its L lies in the
/// lightness window. Points are ordered by ascending (L, a, b).
pub fn sample_lab_gamut(cfg: &GamutSampleConfig) -> Result<DiscreteSamples, ColorError> {
    cfg.validate()?;
    let mut points = Vec::new();
    for l in grid_values(0.0, 100.0, cfg.step) {
        if l < cfg.l_min || l > cfg.l_max {
            continue;
        }
        for a in grid_values(-128.0, 128.0, cfg.step) {
            for b in grid_values(-128.0, 128.0, cfg.step) {
                let lab = [l, a, b];
                let back = rgb_to_lab(lab_to_rgb(lab));
                let d2 = (back[0] - l).powi(2) + (back[1] - a).powi(2) + (back[2] - b).powi(2);
                if d2.sqrt() <= cfg.roundtrip_tol {
                    points.push(ColorPoint::new(&lab));
                }
            }
        }
    }
    DiscreteSamples::new(SpaceKind::Lab, points)
}

const CACHE_MAGIC: &[u8; 4] = b"CLGM";
const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheSidecar {
    version: u32,
    step: f64,
    roundtrip_tol: f64,
    count: u64,
}

fn cache_paths(dir: &Path, cfg: &GamutSampleConfig) -> (PathBuf, PathBuf) {
    let stem = format!("lab_gamut_step{}_tol{}", cfg.step, cfg.roundtrip_tol);
    (dir.join(format!("{stem}.bin")), dir.join(format!("{stem}.json")))
}

/// Like [`sample_lab_gamut`], but backed by a cache file in `dir`.
///
/// The full (lightness-unfiltered) sample set is stored as a versioned binary
/// of little-endian f32 triples next to a JSON sidecar describing the grid;
/// a sidecar mismatch triggers resampling. Writes go through a temp file and
/// rename, so a crash cannot leave a truncated cache behind.
pub fn load_or_sample_gamut(
    cfg: &GamutSampleConfig,
    dir: &Path,
) -> Result<DiscreteSamples, ColorError> {
    cfg.validate()?;
    let full = GamutSampleConfig {
        l_min: 0.0,
        l_max: 100.0,
        ..cfg.clone()
    };
    let (bin_path, json_path) = cache_paths(dir, &full);
    let samples = match read_cache(&bin_path, &json_path, &full) {
        Some(points) => DiscreteSamples::new(SpaceKind::Lab, points)?,
        None => {
            let samples = sample_lab_gamut(&full)?;
            write_cache(&bin_path, &json_path, &full, samples.points())?;
            samples
        }
    };
    // lightness filter applies to the cached full set
    let filtered: Vec<ColorPoint> = samples
        .points()
        .iter()
        .filter(|p| p.get(0) >= cfg.l_min && p.get(0) <= cfg.l_max)
        .copied()
        .collect();
    if filtered.is_empty() {
        return Err(ColorError::InvalidConfig(format!(
            "no gamut samples in lightness window [{}, {}]",
            cfg.l_min, cfg.l_max
        )));
    }
    DiscreteSamples::new(SpaceKind::Lab, filtered)
}

fn read_cache(bin: &Path, json: &Path, cfg: &GamutSampleConfig) -> Option<Vec<ColorPoint>> {
    let sidecar: CacheSidecar = serde_json::from_str(&fs::read_to_string(json).ok()?).ok()?;
    if sidecar.version != CACHE_VERSION
        || sidecar.step != cfg.step
        || sidecar.roundtrip_tol != cfg.roundtrip_tol
    {
        return None;
    }
    let mut f = fs::File::open(bin).ok()?;
    let mut header = [0u8; 16];
    f.read_exact(&mut header).ok()?;
    if &header[0..4] != CACHE_MAGIC
        || u32::from_le_bytes(header[4..8].try_into().unwrap()) != CACHE_VERSION
        || u64::from_le_bytes(header[8..16].try_into().unwrap()) != sidecar.count
    {
        return None;
    }
    let mut body = Vec::new();
    f.read_to_end(&mut body).ok()?;
    if body.len() as u64 != sidecar.count * 12 {
        return None;
    }
    let mut points = Vec::with_capacity(sidecar.count as usize);
    for chunk in body.chunks_exact(12) {
        let c = |i: usize| f32::from_le_bytes(chunk[i..i + 4].try_into().unwrap()) as f64;
        points.push(ColorPoint::new(&[c(0), c(4), c(8)]));
    }
    Some(points)
}

fn write_cache(
    bin: &Path,
    json: &Path,
    cfg: &GamutSampleConfig,
    points: &[ColorPoint],
) -> Result<(), ColorError> {
    if let Some(parent) = bin.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp_bin = bin.with_extension(format!("bin.tmp{}", std::process::id()));
    {
        let mut f = io::BufWriter::new(fs::File::create(&tmp_bin)?);
        f.write_all(CACHE_MAGIC)?;
        f.write_all(&CACHE_VERSION.to_le_bytes())?;
        f.write_all(&(points.len() as u64).to_le_bytes())?;
        for p in points {
            for k in 0..3 {
                f.write_all(&(p.get(k) as f32).to_le_bytes())?;
            }
        }
        f.flush()?;
    }
    fs::rename(&tmp_bin, bin)?;
    let sidecar = CacheSidecar {
        version: CACHE_VERSION,
        step: cfg.step,
        roundtrip_tol: cfg.roundtrip_tol,
        count: points.len() as u64,
    };
    let tmp_json = json.with_extension(format!("json.tmp{}", std::process::id()));
    fs::write(&tmp_json, serde_json::to_string_pretty(&sidecar).unwrap())?;
    fs::rename(&tmp_json, json)?;
    Ok(())
}

// --- palettes ---------------------------------------------------------------

/// ColorBrewer "Accent" qualitative scheme, 8 classes.
pub const ACCENT_8: [[u8; 3]; 8] = [
    [0x7f, 0xc9, 0x7f],
    [0xbe, 0xae, 0xd4],
    [0xfd, 0xc0, 0x86],
    [0xff, 0xff, 0x99],
    [0x38, 0x6c, 0xb0],
    [0xf0, 0x02, 0x7f],
    [0xbf, 0x5b, 0x17],
    [0x66, 0x66, 0x66],
];

/// ColorBrewer "Dark2" qualitative scheme, 8 classes.
pub const DARK2_8: [[u8; 3]; 8] = [
    [0x1b, 0x9e, 0x77],
    [0xd9, 0x5f, 0x02],
    [0x75, 0x70, 0xb3],
    [0xe7, 0x29, 0x8a],
    [0x66, 0xa6, 0x1e],
    [0xe6, 0xab, 0x02],
    [0xa6, 0x76, 0x1d],
    [0x66, 0x66, 0x66],
];

/// ColorBrewer "Pastel1" qualitative scheme, 9 classes.
pub const PASTEL1_9: [[u8; 3]; 9] = [
    [0xfb, 0xb4, 0xae],
    [0xb3, 0xcd, 0xe3],
    [0xcc, 0xeb, 0xc5],
    [0xde, 0xcb, 0xe4],
    [0xfe, 0xd9, 0xa6],
    [0xff, 0xff, 0xcc],
    [0xe5, 0xd8, 0xbd],
    [0xfd, 0xda, 0xec],
    [0xf2, 0xf2, 0xf2],
];

/// Looks up a bundled palette by name (case-insensitive, optional
/// `colorbrewer_` prefix): `accent8`, `dark2_8`, `pastel1_9`, ...
pub fn builtin_palette(name: &str) -> Option<Vec<[f64; 3]>> {
    let n = name.to_ascii_lowercase();
    let n = n.strip_prefix("colorbrewer_").unwrap_or(&n);
    let table: &[[u8; 3]] = match n {
        "accent8" | "accent_8" => &ACCENT_8,
        "dark28" | "dark2_8" => &DARK2_8,
        "pastel19" | "pastel1_9" => &PASTEL1_9,
        _ => return None,
    };
    Some(
        table
            .iter()
            .map(|c| [c[0] as f64 / 255.0, c[1] as f64 / 255.0, c[2] as f64 / 255.0])
            .collect(),
    )
}

/// Parses a palette file: one `#rrggbb` per non-empty line.
pub fn parse_palette(text: &str) -> Result<Vec<[f64; 3]>, ColorError> {
    let mut colors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let rgb = hex_to_rgb(line)
            .ok_or_else(|| ColorError::BadPaletteLine(i + 1, line.to_string()))?;
        colors.push(rgb);
    }
    if colors.len() < 2 {
        return Err(ColorError::TooFewColors(colors.len()));
    }
    Ok(colors)
}

/// How to thread the interpolation path through the palette colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaletteOrdering {
    /// Keep the palette's own order.
    Natural,
    /// Reorder along a shortest open path in LAB ([`tsp_order`]).
    ShortestPath,
}

/// Expands `k` palette colors into `samples` colors spaced at equal arc
/// length along the LAB polyline through the (possibly reordered) palette.
///
/// The path endpoints are emitted exactly; interior palette colors lie on the
/// path and are approximated within one arc step (and snapped when a sample
/// lands on them).
pub fn interpolate_palette(
    palette_rgb: &[[f64; 3]],
    samples: usize,
    ordering: PaletteOrdering,
) -> Result<DiscreteSamples, ColorError> {
    let k = palette_rgb.len();
    if k < 2 {
        return Err(ColorError::TooFewColors(k));
    }
    if samples < k {
        return Err(ColorError::TooFewSamples { k, samples });
    }
    let knots: Vec<ColorPoint> = palette_rgb
        .iter()
        .map(|&rgb| ColorPoint::new(&rgb_to_lab(rgb)))
        .collect();
    let order = match ordering {
        PaletteOrdering::Natural => (0..k).collect::<Vec<_>>(),
        PaletteOrdering::ShortestPath => tsp_order(&knots),
    };
    let path: Vec<ColorPoint> = order.iter().map(|&i| knots[i]).collect();
    let mut cum = vec![0.0];
    for w in path.windows(2) {
        cum.push(cum.last().unwrap() + w[0].dist(&w[1]));
    }
    let total = *cum.last().unwrap();
    if total <= 0.0 {
        return Err(ColorError::DegeneratePalette);
    }

    let snap_tol = 1e-9 * total;
    let mut out = Vec::with_capacity(samples);
    let mut leg = 0;
    for i in 0..samples {
        let t = total * i as f64 / (samples - 1) as f64;
        while leg + 2 < cum.len() && cum[leg + 1] < t {
            leg += 1;
        }
        let leg_len = cum[leg + 1] - cum[leg];
        let f = if leg_len > 0.0 {
            ((t - cum[leg]) / leg_len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let p = if i == samples - 1 {
            path[path.len() - 1]
        } else if (t - cum[leg]).abs() <= snap_tol {
            path[leg]
        } else if (cum[leg + 1] - t).abs() <= snap_tol {
            path[leg + 1]
        } else {
            let a = &path[leg];
            let b = &path[leg + 1];
            ColorPoint::new(&[
                a.get(0) + f * (b.get(0) - a.get(0)),
                a.get(1) + f * (b.get(1) - a.get(1)),
                a.get(2) + f * (b.get(2) - a.get(2)),
            ])
        };
        out.push(p);
    }
    DiscreteSamples::new(SpaceKind::Lab, out)
}

/// Orders points along a short open path: exact for up to 10 points
/// (Held-Karp), nearest-neighbor plus 2-opt beyond. The returned permutation
/// is canonicalized so its first element is no larger than its last.
pub fn tsp_order(points: &[ColorPoint]) -> Vec<usize> {
    let n = points.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let d = |i: usize, j: usize| points[i].dist(&points[j]);
    let mut order = if n <= 10 {
        held_karp_path(n, &d)
    } else {
        two_opt_path(n, &d)
    };
    if order[0] > order[n - 1] {
        order.reverse();
    }
    order
}

fn held_karp_path(n: usize, d: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    let full = 1usize << n;
    let mut cost = vec![f64::INFINITY; full * n];
    let mut parent = vec![usize::MAX; full * n];
    for i in 0..n {
        cost[(1 << i) * n + i] = 0.0;
    }
    for mask in 1..full {
        for last in 0..n {
            if mask & (1 << last) == 0 {
                continue;
            }
            let c = cost[mask * n + last];
            if !c.is_finite() {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let m2 = mask | (1 << next);
                let nc = c + d(last, next);
                if nc < cost[m2 * n + next] {
                    cost[m2 * n + next] = nc;
                    parent[m2 * n + next] = last;
                }
            }
        }
    }
    let mut last = (0..n)
        .min_by(|&a, &b| {
            cost[(full - 1) * n + a]
                .partial_cmp(&cost[(full - 1) * n + b])
                .unwrap()
        })
        .unwrap();
    let mut mask = full - 1;
    let mut path = vec![last];
    while parent[mask * n + last] != usize::MAX {
        let prev = parent[mask * n + last];
        mask &= !(1 << last);
        last = prev;
        path.push(last);
    }
    path.reverse();
    path
}

fn two_opt_path(n: usize, d: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    // nearest-neighbor start from point 0
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    order.push(0);
    used[0] = true;
    for _ in 1..n {
        let cur = *order.last().unwrap();
        let next = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| d(cur, a).partial_cmp(&d(cur, b)).unwrap())
            .unwrap();
        order.push(next);
        used[next] = true;
    }
    // 2-opt for an open path: reversing order[i..=j] replaces the edges
    // entering i and leaving j
    loop {
        let mut improved = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let before = if i > 0 { d(order[i - 1], order[i]) } else { 0.0 }
                    + if j + 1 < n { d(order[j], order[j + 1]) } else { 0.0 };
                let after = if i > 0 { d(order[i - 1], order[j]) } else { 0.0 }
                    + if j + 1 < n { d(order[i], order[j + 1]) } else { 0.0 };
                if after + 1e-12 < before {
                    order[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!((got - want).abs() <= tol, "got {got}, want {want} +- {tol}");
    }

    #[test]
    fn lab_of_primaries_and_extremes() {
        // reference values computed with an independent sRGB/D65 oracle
        let red = rgb_to_lab([1.0, 0.0, 0.0]);
        assert_close(red[0], 53.2407941413, 1e-6);
        assert_close(red[1], 80.0924595964, 1e-6);
        assert_close(red[2], 67.2031965159, 1e-6);

        let dark_red = rgb_to_lab([0.7, 0.0, 0.0]);
        assert_close(dark_red[0], 36.9806929019, 1e-6);
        assert_close(dark_red[1], 61.2840170055, 1e-6);
        assert_close(dark_red[2], 51.3710391801, 1e-6);

        let black = rgb_to_lab([0.0, 0.0, 0.0]);
        assert!(black.iter().all(|c| c.abs() < 1e-9));

        let white = rgb_to_lab([1.0, 1.0, 1.0]);
        assert_close(white[0], 100.0, 1e-3);
        assert_close(white[1], 0.0, 1e-3);
        assert_close(white[2], 0.0, 1e-3);
    }

    #[test]
    fn out_of_gamut_lab_clamps() {
        let rgb = lab_to_rgb([50.0, 128.0, 0.0]);
        assert_eq!(rgb[0], 1.0);
        assert_eq!(rgb[1], 0.0);
        assert_close(rgb[2], 0.4891534556, 1e-6);
    }

    #[test]
    fn hex_rendering_rounds_half_up() {
        assert_eq!(rgb_to_hex([0.7, 0.0, 0.0]), "#b30000");
        assert_eq!(rgb_to_hex([1.0, 1.0, 1.0]), "#ffffff");
        // 0.25 * 255 + 0.5 = 64.25 and 0.75 * 255 + 0.5 = 191.75: the first
        // rounds down, the second truncates to 191 = 0xbf
        assert_eq!(rgb_to_hex([0.5, 0.25, 0.75]), "#8040bf");
        assert_eq!(hex_to_rgb("#b30000").unwrap()[0], 0xb3 as f64 / 255.0);
        assert!(hex_to_rgb("b30000").is_none());
        assert!(hex_to_rgb("#b3000").is_none());
        assert!(hex_to_rgb("#b3000g").is_none());
    }

    #[test]
    fn space_constructors_validate() {
        assert!(make_rgb_box(0.7).is_ok());
        assert!(make_rgb_box(0.0).is_err());
        assert!(make_rgb_box(1.5).is_err());
        assert!(make_gray(0.0, 1.0).is_ok());
        assert!(make_gray(0.5, 0.5).is_err());
        assert!(make_gray(-0.1, 1.0).is_err());
    }

    #[test]
    fn default_points_are_darkest() {
        assert_eq!(
            make_rgb_box(0.7).unwrap().default_point(),
            ColorPoint::new(&[0.0, 0.0, 0.0])
        );
        assert_eq!(
            make_gray(0.2, 0.9).unwrap().default_point(),
            ColorPoint::new(&[0.2])
        );
        let s = DiscreteSamples::new(
            SpaceKind::Lab,
            vec![
                ColorPoint::new(&[60.0, 0.0, 0.0]),
                ColorPoint::new(&[5.0, 1.0, 1.0]),
                ColorPoint::new(&[90.0, 0.0, 0.0]),
            ],
        )
        .unwrap();
        assert_eq!(
            ColorSpace::Samples(s).default_point(),
            ColorPoint::new(&[5.0, 1.0, 1.0])
        );
    }

    #[test]
    fn discrete_samples_dedup_keeps_first_occurrence() {
        let s = DiscreteSamples::new(
            SpaceKind::Gray,
            vec![
                ColorPoint::new(&[0.5]),
                ColorPoint::new(&[0.1]),
                ColorPoint::new(&[0.5]),
                ColorPoint::new(&[0.9]),
                ColorPoint::new(&[0.1]),
            ],
        )
        .unwrap();
        let got: Vec<f64> = s.points().iter().map(|p| p.get(0)).collect();
        assert_eq!(got, vec![0.5, 0.1, 0.9]);
    }

    #[test]
    fn small_gamut_grid_is_plausible() {
        // coarse grid keeps the unit test fast; the acceptance suite runs the
        // full default grid
        let cfg = GamutSampleConfig {
            step: 4.0,
            ..Default::default()
        };
        let s = sample_lab_gamut(&cfg).unwrap();
        assert!(!s.is_empty());
        for p in s.points() {
            let lab = [p.get(0), p.get(1), p.get(2)];
            let back = rgb_to_lab(lab_to_rgb(lab));
            let d = ((back[0] - lab[0]).powi(2)
                + (back[1] - lab[1]).powi(2)
                + (back[2] - lab[2]).powi(2))
            .sqrt();
            assert!(d <= cfg.roundtrip_tol);
        }
        // ordered by ascending (L, a, b); black is the very first sample
        assert_eq!(*s.point(0), ColorPoint::new(&[0.0, 0.0, 0.0]));
        let fraction = s.len() as f64 / (26.0 * 65.0 * 65.0);
        assert!(
            (0.08..0.20).contains(&fraction),
            "gamut fraction {fraction}"
        );
    }

    #[test]
    fn lightness_window_filters_samples() {
        let cfg = GamutSampleConfig {
            step: 4.0,
            l_min: 80.0,
            l_max: 100.0,
            ..Default::default()
        };
        let s = sample_lab_gamut(&cfg).unwrap();
        assert!(!s.is_empty());
        assert!(s.points().iter().all(|p| p.get(0) >= 80.0 && p.get(0) <= 100.0));
    }

    #[test]
    fn gamut_cache_round_trips_and_respects_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GamutSampleConfig {
            step: 8.0,
            ..Default::default()
        };
        let first = load_or_sample_gamut(&cfg, dir.path()).unwrap();
        let (bin, json) = cache_paths(dir.path(), &cfg);
        assert!(bin.exists() && json.exists());
        let second = load_or_sample_gamut(&cfg, dir.path()).unwrap();
        assert_eq!(first.len(), second.len());
        assert_eq!(first.points(), second.points());

        // lightness windows reuse the same cache file
        let windowed = load_or_sample_gamut(
            &GamutSampleConfig {
                l_min: 50.0,
                ..cfg.clone()
            },
            dir.path(),
        )
        .unwrap();
        assert!(windowed.len() < first.len());
        assert!(windowed.points().iter().all(|p| p.get(0) >= 50.0));

        // a different grid must not reuse it
        let other = GamutSampleConfig {
            step: 16.0,
            ..Default::default()
        };
        let coarse = load_or_sample_gamut(&other, dir.path()).unwrap();
        assert!(coarse.len() < first.len());

        // corrupt the binary; the loader must resample rather than trust it
        fs::write(&bin, b"garbage").unwrap();
        let third = load_or_sample_gamut(&cfg, dir.path()).unwrap();
        assert_eq!(first.points(), third.points());
    }

    #[test]
    fn interpolate_black_white_midpoint() {
        let s = interpolate_palette(
            &[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]],
            3,
            PaletteOrdering::Natural,
        )
        .unwrap();
        assert_eq!(s.len(), 3);
        let got: Vec<[f64; 3]> = s
            .points()
            .iter()
            .map(|p| [p.get(0), p.get(1), p.get(2)])
            .collect();
        for (g, w) in got.iter().zip([
            [0.0, 0.0, 0.0],
            [50.0, 0.0, 0.0],
            [100.0, 0.0, 0.0],
        ]) {
            for k in 0..3 {
                assert_close(g[k], w[k], 1e-3);
            }
        }
    }

    #[test]
    fn interpolation_spacing_is_uniform() {
        let s = interpolate_palette(
            &[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]],
            1000,
            PaletteOrdering::Natural,
        )
        .unwrap();
        assert_eq!(s.len(), 1000);
        // straight path in LAB: chord spacing equals arc spacing
        let gaps: Vec<f64> = s.points().windows(2).map(|w| w[0].dist(&w[1])).collect();
        let first = gaps[0];
        for g in &gaps {
            assert!((g - first).abs() <= 1e-6 * first.max(1.0));
        }
    }

    #[test]
    fn interpolation_keeps_knots_reachable() {
        let palette = builtin_palette("dark2_8").unwrap();
        let k = palette.len();
        let s = interpolate_palette(&palette, 10_000, PaletteOrdering::ShortestPath).unwrap();
        assert_eq!(s.len(), 10_000);
        // every palette color sits within one arc step of some sample
        let knots: Vec<ColorPoint> = palette
            .iter()
            .map(|&rgb| ColorPoint::new(&rgb_to_lab(rgb)))
            .collect();
        let total: f64 = {
            let order = tsp_order(&knots);
            order
                .windows(2)
                .map(|w| knots[w[0]].dist(&knots[w[1]]))
                .sum()
        };
        let step = total / 9999.0;
        for knot in &knots {
            let nearest = s
                .points()
                .iter()
                .map(|p| p.dist(knot))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= step, "knot {knot:?} is {nearest} away");
        }
        let _ = k;
    }

    #[test]
    fn interpolation_passes_through_collinear_interior_knot() {
        // grays are collinear in LAB; with 101 samples the interior knot at
        // L=30ish lands exactly on a sample and must be emitted verbatim
        let g30 = lab_to_rgb([30.0, 0.0, 0.0]);
        let s = interpolate_palette(
            &[[0.0, 0.0, 0.0], g30, [1.0, 1.0, 1.0]],
            101,
            PaletteOrdering::Natural,
        )
        .unwrap();
        let knot = ColorPoint::new(&rgb_to_lab(g30));
        let hit = s.points().iter().any(|p| p.dist(&knot) < 1e-6);
        assert!(hit, "interior knot missing from samples");
    }

    #[test]
    fn interpolation_validates_inputs() {
        assert!(matches!(
            interpolate_palette(&[[0.0; 3]], 10, PaletteOrdering::Natural),
            Err(ColorError::TooFewColors(1))
        ));
        assert!(matches!(
            interpolate_palette(&[[0.0; 3], [1.0; 3], [0.5; 3]], 2, PaletteOrdering::Natural),
            Err(ColorError::TooFewSamples { k: 3, samples: 2 })
        ));
        assert!(matches!(
            interpolate_palette(&[[0.3; 3], [0.3; 3]], 5, PaletteOrdering::Natural),
            Err(ColorError::DegeneratePalette)
        ));
    }

    #[test]
    fn tsp_order_trivial_and_collinear() {
        let two = vec![ColorPoint::new(&[0.0]), ColorPoint::new(&[1.0])];
        assert_eq!(tsp_order(&two), vec![0, 1]);
        // collinear points given out of order end up endpoint-to-endpoint
        let pts = vec![
            ColorPoint::new(&[5.0, 0.0, 0.0]),
            ColorPoint::new(&[0.0, 0.0, 0.0]),
            ColorPoint::new(&[9.0, 0.0, 0.0]),
            ColorPoint::new(&[2.0, 0.0, 0.0]),
        ];
        let order = tsp_order(&pts);
        let l: Vec<f64> = order.iter().map(|&i| pts[i].get(0)).collect();
        assert!(l == vec![0.0, 2.0, 5.0, 9.0] || l == vec![9.0, 5.0, 2.0, 0.0]);
    }

    #[test]
    fn tsp_matches_exhaustive_on_eight_points() {
        // pseudo-random 3-D points, small enough to brute-force
        let mut pts = Vec::new();
        let mut state = 12345u64;
        for _ in 0..8 {
            let mut next = || {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 * 100.0
            };
            pts.push(ColorPoint::new(&[next(), next(), next()]));
        }
        let path_len = |order: &[usize]| -> f64 {
            order.windows(2).map(|w| pts[w[0]].dist(&pts[w[1]])).sum()
        };
        // exhaustive minimum over all permutations
        let mut best = f64::INFINITY;
        let mut perm: Vec<usize> = (0..8).collect();
        fn heap_permute(k: usize, perm: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
            if k == 1 {
                visit(perm);
                return;
            }
            for i in 0..k {
                heap_permute(k - 1, perm, visit);
                if k % 2 == 0 {
                    perm.swap(i, k - 1);
                } else {
                    perm.swap(0, k - 1);
                }
            }
        }
        heap_permute(8, &mut perm, &mut |p| {
            let l = p.windows(2).map(|w| pts[w[0]].dist(&pts[w[1]])).sum::<f64>();
            if l < best {
                best = l;
            }
        });
        let got = path_len(&tsp_order(&pts));
        assert_close(got, best, 1e-9);
    }

    #[test]
    fn two_opt_canonical_direction_and_sanity() {
        // 12 points forces the heuristic branch
        let pts: Vec<ColorPoint> = (0..12)
            .map(|i| {
                let x = ((i * 7919) % 101) as f64;
                let y = ((i * 104729) % 97) as f64;
                ColorPoint::new(&[x, y, 0.0])
            })
            .collect();
        let order = tsp_order(&pts);
        let mut seen = order.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..12).collect::<Vec<_>>());
        assert!(order[0] <= order[11]);
    }

    #[test]
    fn builtin_palettes_resolve() {
        assert_eq!(builtin_palette("accent_8").unwrap().len(), 8);
        assert_eq!(builtin_palette("Dark2_8").unwrap().len(), 8);
        assert_eq!(builtin_palette("colorbrewer_pastel1_9").unwrap().len(), 9);
        assert!(builtin_palette("viridis").is_none());
    }

    #[test]
    fn palette_file_parsing() {
        let colors = parse_palette("#1b9e77\n\n#d95f02\n").unwrap();
        assert_eq!(colors.len(), 2);
        assert!(matches!(
            parse_palette("#1b9e77\nnot-a-color\n"),
            Err(ColorError::BadPaletteLine(2, _))
        ));
        assert!(matches!(
            parse_palette("#1b9e77\n"),
            Err(ColorError::TooFewColors(1))
        ));
    }

    proptest! {
        #[test]
        fn rgb_round_trip_within_tolerance(
            r in 0.0..=1.0f64,
            g in 0.0..=1.0f64,
            b in 0.0..=1.0f64,
        ) {
            let back = lab_to_rgb(rgb_to_lab([r, g, b]));
            prop_assert!((back[0] - r).abs() < 1e-4);
            prop_assert!((back[1] - g).abs() < 1e-4);
            prop_assert!((back[2] - b).abs() < 1e-4);
        }

        #[test]
        fn interpolation_monotone_along_path(samples in 5usize..60) {
            let palette = [[0.1, 0.2, 0.3], [0.9, 0.1, 0.2], [0.2, 0.8, 0.5]];
            let s = interpolate_palette(&palette, samples, PaletteOrdering::Natural).unwrap();
            // cumulative distance from the first sample along the emitted
            // sequence must strictly increase (monotone parameterization)
            let mut cum = 0.0;
            let mut last = *s.point(0);
            for p in s.points().iter().skip(1) {
                let step = last.dist(p);
                prop_assert!(step > 0.0);
                cum += step;
                last = *p;
            }
            prop_assert!(cum > 0.0);
        }
    }
}
