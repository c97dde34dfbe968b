//! Cube cells over a color space, used by the optimizer's branch-and-bound.
//!
//! The root is the smallest axis-aligned cube (equal half-width on every
//! axis) enclosing the space; subdividing a cell yields its 2^d half-size
//! children, which tile the parent exactly. Children that miss the space —
//! padding of an anisotropic box, or subcubes holding no sample — are
//! detected by [`cell_is_live`] and dropped by the caller. Discrete cells
//! carry the indices of the samples they contain, so subdivision partitions
//! the parent's samples: a sample lying exactly on a splitting plane goes to
//! the low child.
//!
//! Invariant: every sample of a cell lies in the closed cube
//! `center +- half_width`, and a continuous cell's candidate point is within
//! `sqrt(d) * half_width` of every space point inside the cell.

use crate::colorspace::{ColorPoint, ColorSpace};

/// A cube cell; `samples` is empty for continuous spaces.
#[derive(Debug, Clone)]
pub struct Cell {
    center: [f64; 3],
    half_width: f64,
    dim: u8,
    samples: Vec<u32>,
}

impl Cell {
    pub fn center(&self) -> ColorPoint {
        ColorPoint::new(&self.center[..self.dim as usize])
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Indices into the space's sample list contained in this cell.
    pub fn samples(&self) -> &[u32] {
        &self.samples
    }
}

/// Smallest enclosing cube of the space; degenerate (zero-extent) spaces get
/// half-width 1 so subdivision still terminates.
pub fn root_cell(space: &ColorSpace) -> Cell {
    let dim = space.dim();
    let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
    match space {
        ColorSpace::Box(b) => {
            lo[..dim].copy_from_slice(b.lower());
            hi[..dim].copy_from_slice(b.upper());
        }
        ColorSpace::Samples(s) => {
            for p in s.points() {
                for k in 0..dim {
                    lo[k] = lo[k].min(p.get(k));
                    hi[k] = hi[k].max(p.get(k));
                }
            }
        }
    }
    let mut center = [0.0; 3];
    let mut half_width: f64 = 0.0;
    for k in 0..dim {
        center[k] = 0.5 * (lo[k] + hi[k]);
        half_width = half_width.max(0.5 * (hi[k] - lo[k]));
    }
    if half_width <= 0.0 {
        half_width = 1.0;
    }
    let samples = match space {
        ColorSpace::Box(_) => Vec::new(),
        ColorSpace::Samples(s) => (0..s.len() as u32).collect(),
    };
    Cell {
        center,
        half_width,
        dim: dim as u8,
        samples,
    }
}

/// The 2^d half-size children of `cell`, tiling it exactly; for samples the
/// parent's list is partitioned among them. Dead children (see
/// [`cell_is_live`]) are included.
pub fn subdivide(cell: &Cell, space: &ColorSpace) -> Vec<Cell> {
    let dim = cell.dim();
    let hw = cell.half_width * 0.5;
    let child_center = |child: usize| {
        let mut c = cell.center;
        for (k, cc) in c.iter_mut().enumerate().take(dim) {
            *cc += if child & (1 << k) != 0 { hw } else { -hw };
        }
        c
    };
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); 1 << dim];
    if let ColorSpace::Samples(s) = space {
        for &i in &cell.samples {
            let p = s.point(i as usize);
            let mut child = 0usize;
            for k in 0..dim {
                // boundary ties go low
                if p.get(k) > cell.center[k] {
                    child |= 1 << k;
                }
            }
            buckets[child].push(i);
        }
    }
    buckets
        .into_iter()
        .enumerate()
        .map(|(i, samples)| Cell {
            center: child_center(i),
            half_width: hw,
            dim: cell.dim,
            samples,
        })
        .collect()
}

/// Whether the cell still holds any of the space: a box space's cell must
/// intersect the box (closed, so touching a face counts), a discrete cell
/// must contain at least one sample. Dead cells arise as padding of the
/// cubic root around an anisotropic space and can be discarded.
pub fn cell_is_live(cell: &Cell, space: &ColorSpace) -> bool {
    match space {
        ColorSpace::Box(b) => (0..cell.dim()).all(|k| {
            cell.center[k] - cell.half_width <= b.upper()[k]
                && cell.center[k] + cell.half_width >= b.lower()[k]
        }),
        ColorSpace::Samples(_) => !cell.samples.is_empty(),
    }
}

/// A representative space point inside the cell: the cell center clipped
/// into the box, or the contained sample nearest the center (lowest index on
/// ties). `None` only for an empty discrete cell.
pub fn candidate_point(cell: &Cell, space: &ColorSpace) -> Option<ColorPoint> {
    match space {
        ColorSpace::Box(b) => {
            let dim = cell.dim();
            let mut c = [0.0; 3];
            for k in 0..dim {
                c[k] = cell.center[k].clamp(b.lower()[k], b.upper()[k]);
            }
            Some(ColorPoint::new(&c[..dim]))
        }
        ColorSpace::Samples(s) => {
            let center = cell.center();
            let mut best: Option<(f64, u32)> = None;
            for &i in &cell.samples {
                let d = s.point(i as usize).dist(&center);
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, i));
                }
            }
            best.map(|(_, i)| *s.point(i as usize))
        }
    }
}
