//! Shared helpers for integration tests: a random straight-edge layout
//! generator, an intentionally independent re-implementation of the
//! edge-ambiguity rules (acos-based, parametric intersection), and a
//! brute-force grid maximizer for the embedding objective.

#![allow(dead_code)] // each integration test binary uses a subset

use clarify::colorspace::{ColorPoint, ColorSpace};
use clarify::geometry::{GeomConfig, Point2};
use clarify::graph::LayoutGraph;
use clarify::optimizer::point_set_distance;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A random straight-edge layout: distinct node positions in a 100x100 box,
/// random endpoint pairs (multi-edges allowed, self-loops not).
pub fn random_layout(rng: &mut ChaCha8Rng) -> (Vec<(f64, f64)>, Vec<(usize, usize)>) {
    let n = rng.gen_range(4..=30);
    let positions: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
        .collect();
    let m = rng.gen_range(3..=60);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u, v));
        }
    }
    (positions, edges)
}

/// Builds the library's layout graph from generator output.
pub fn to_layout_graph(positions: &[(f64, f64)], edges: &[(usize, usize)]) -> LayoutGraph {
    let mut g = LayoutGraph::new(None, false);
    for (i, &(x, y)) in positions.iter().enumerate() {
        g.add_node(&format!("n{i}"), Point2::new(x, y), vec![]).unwrap();
    }
    for &(u, v) in edges {
        g.add_edge(&format!("n{u}"), &format!("n{v}"), None, vec![])
            .unwrap();
    }
    g
}

/// Collision classes as the oracle names them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OracleKind {
    Crossing,
    SharedSmall,
    SharedStraight,
    Parallel,
}

fn acos_deg(ux: f64, uy: f64, vx: f64, vy: f64) -> f64 {
    let nu = (ux * ux + uy * uy).sqrt();
    let nv = (vx * vx + vy * vy).sqrt();
    let c = ((ux * vx + uy * vy) / (nu * nv)).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

fn acute_deg(ux: f64, uy: f64, vx: f64, vy: f64) -> f64 {
    let a = acos_deg(ux, uy, vx, vy);
    if a > 90.0 {
        180.0 - a
    } else {
        a
    }
}

/// Strict interior intersection of segments (a,b) and (c,d), parametrically.
fn crosses(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let (rx, ry) = (b.0 - a.0, b.1 - a.1);
    let (sx, sy) = (d.0 - c.0, d.1 - c.1);
    let det = rx * sy - ry * sx;
    if det == 0.0 {
        return false;
    }
    let (qx, qy) = (c.0 - a.0, c.1 - a.1);
    let t = (qx * sy - qy * sx) / det;
    let u = (qx * ry - qy * rx) / det;
    t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0
}

fn point_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

fn segments_distance(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> f64 {
    if crosses(a, b, c, d) {
        return 0.0;
    }
    point_to_segment(a, c, d)
        .min(point_to_segment(b, c, d))
        .min(point_to_segment(c, a, b))
        .min(point_to_segment(d, a, b))
}

/// Classifies one straight edge pair the way the library is supposed to:
/// shared-endpoint pairs get only the incidence checks (small angle first),
/// disjoint pairs get the shallow-crossing check and then the
/// close-and-parallel check.
pub fn oracle_pair(
    positions: &[(f64, f64)],
    e1: (usize, usize),
    e2: (usize, usize),
    cfg: &GeomConfig,
) -> Option<OracleKind> {
    let mut shared = Vec::new();
    for n in [e1.0, e1.1] {
        if (n == e2.0 || n == e2.1) && !shared.contains(&n) {
            shared.push(n);
        }
    }
    if !shared.is_empty() {
        let mut min_a = f64::INFINITY;
        let mut max_a = f64::NEG_INFINITY;
        for &n in &shared {
            let dirs = |e: (usize, usize)| {
                let mut out = Vec::new();
                let p = positions[n];
                if e.0 == n {
                    let q = positions[e.1];
                    out.push((q.0 - p.0, q.1 - p.1));
                }
                if e.1 == n {
                    let q = positions[e.0];
                    out.push((q.0 - p.0, q.1 - p.1));
                }
                out
            };
            for &(ux, uy) in &dirs(e1) {
                for &(vx, vy) in &dirs(e2) {
                    let a = acos_deg(ux, uy, vx, vy);
                    min_a = min_a.min(a);
                    max_a = max_a.max(a);
                }
            }
        }
        if min_a < cfg.small_angle_deg {
            return Some(OracleKind::SharedSmall);
        }
        if cfg.enable_c3 && max_a > cfg.straight_angle_deg {
            return Some(OracleKind::SharedStraight);
        }
        return None;
    }

    let (a, b) = (positions[e1.0], positions[e1.1]);
    let (c, d) = (positions[e2.0], positions[e2.1]);
    let angle = acute_deg(b.0 - a.0, b.1 - a.1, d.0 - c.0, d.1 - c.1);
    if crosses(a, b, c, d) && angle < cfg.small_angle_deg {
        return Some(OracleKind::Crossing);
    }
    if angle < cfg.parallel_angle_deg {
        let len1 = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let len2 = ((d.0 - c.0).powi(2) + (d.1 - c.1).powi(2)).sqrt();
        let threshold = cfg.near_dist_frac * len1.max(len2);
        if segments_distance(a, b, c, d) < threshold {
            return Some(OracleKind::Parallel);
        }
    }
    None
}

/// All colliding pairs of a straight-edge layout according to the oracle,
/// as `((i, j), kind)` with `i < j`, sorted.
pub fn oracle_dual(
    positions: &[(f64, f64)],
    edges: &[(usize, usize)],
    cfg: &GeomConfig,
) -> Vec<((usize, usize), OracleKind)> {
    let mut out = Vec::new();
    for i in 0..edges.len() {
        for j in (i + 1)..edges.len() {
            if let Some(kind) = oracle_pair(positions, edges[i], edges[j], cfg) {
                out.push(((i, j), kind));
            }
        }
    }
    out
}

/// Maps the library's collision classes onto the oracle's names.
pub fn library_kind(kind: &clarify::collision::CollisionKind) -> OracleKind {
    use clarify::collision::CollisionKind::*;
    match kind {
        SmallCrossing { .. } => OracleKind::Crossing,
        SharedSmallAngle { .. } => OracleKind::SharedSmall,
        SharedNearStraight { .. } => OracleKind::SharedStraight,
        NearParallel { .. } => OracleKind::Parallel,
    }
}

/// Best objective value over an axis-aligned grid with the given pitch; a
/// lower bound on the continuous optimum used to sandwich the embedder.
pub fn grid_best(space: &ColorSpace, targets: &[(ColorPoint, f64)], pitch: f64) -> f64 {
    let b = match space {
        ColorSpace::Box(b) => b,
        ColorSpace::Samples(_) => panic!("grid oracle covers continuous spaces"),
    };
    let dim = b.dim();
    let steps: Vec<usize> = (0..dim)
        .map(|k| ((b.upper()[k] - b.lower()[k]) / pitch).ceil() as usize)
        .collect();
    let mut idx = vec![0usize; dim];
    let mut best = f64::NEG_INFINITY;
    loop {
        let mut c = [0.0; 3];
        for k in 0..dim {
            let f = idx[k] as f64 / steps[k] as f64;
            c[k] = b.lower()[k] + f * (b.upper()[k] - b.lower()[k]);
        }
        let p = ColorPoint::new(&c[..dim]);
        let d = point_set_distance(&p, targets);
        if d > best {
            best = d;
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == dim {
                return best;
            }
            idx[k] += 1;
            if idx[k] <= steps[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
