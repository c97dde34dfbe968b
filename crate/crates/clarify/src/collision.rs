//! Detection of visually ambiguous edge pairs and the dual collision graph.
//!
//! Two drawn edges "collide" when a reader could plausibly confuse them:
//!
//! * crossing at a small angle,
//! * leaving a shared node at a small angle,
//! * running through a shared node almost straight (so they read as one long
//!   edge; optional),
//! * disjoint but close together and nearly parallel.
//!
//! Pairs that share a node are exempt from the crossing and near-parallel
//! conditions. For polyline geometry every predicate is evaluated over all
//! sub-segment pairs and the most ambiguous result wins.
//!
//! The dual collision graph has one node per original edge and one weighted
//! dual edge per colliding pair. Map mode bypasses detection entirely:
//! regions become dual nodes and every pair in the same adjacency component
//! is linked with weight 1 / hop-distance.

use std::collections::VecDeque;

use thiserror::Error;

use crate::geometry::{
    crossing_angle, segment_distance, segment_intersection, GeomConfig, GeometryError, Point2,
};
use crate::graph::{LayoutEdge, LayoutGraph};

#[derive(Debug, Error, PartialEq)]
pub enum DualGraphError {
    #[error("dual edge ({0}, {1}) out of range for {2} nodes")]
    NodeOutOfRange(usize, usize, usize),
    #[error("dual self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate dual edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("dual edge ({0}, {1}) has non-positive weight {2}")]
    BadWeight(usize, usize, f64),
    #[error("region adjacency references region {0}, but only {1} exist")]
    RegionOutOfRange(usize, usize),
}

/// Why a pair of edges was deemed ambiguous. Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollisionKind {
    /// Disjoint edges crossing below the small-angle threshold.
    SmallCrossing { angle_deg: f64 },
    /// Edges leaving a shared node below the small-angle threshold.
    SharedSmallAngle { angle_deg: f64 },
    /// Edges meeting at a shared node nearly straight, reading as one line.
    SharedNearStraight { angle_deg: f64 },
    /// Disjoint edges running close together and nearly parallel.
    NearParallel { distance: f64, angle_deg: f64 },
}

/// A weighted link between two dual nodes (original edges or map regions).
/// `kind` is `None` for map-derived links.
#[derive(Debug, Clone, Copy)]
pub struct DualEdge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub kind: Option<CollisionKind>,
}

/// The dual graph to be colored: simple, undirected, positively weighted.
#[derive(Debug, Clone)]
pub struct DualCollisionGraph {
    node_count: usize,
    edges: Vec<DualEdge>,
}

impl DualCollisionGraph {
    /// Builds a dual graph, normalizing every edge to `i < j` and rejecting
    /// self-loops, duplicates, and non-positive weights.
    pub fn new(node_count: usize, edges: Vec<DualEdge>) -> Result<Self, DualGraphError> {
        let mut seen = std::collections::HashSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for mut e in edges {
            if e.i == e.j {
                return Err(DualGraphError::SelfLoop(e.i));
            }
            if e.i > e.j {
                std::mem::swap(&mut e.i, &mut e.j);
            }
            if e.j >= node_count {
                return Err(DualGraphError::NodeOutOfRange(e.i, e.j, node_count));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(DualGraphError::BadWeight(e.i, e.j, e.weight));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(DualGraphError::DuplicateEdge(e.i, e.j));
            }
            normalized.push(e);
        }
        Ok(DualCollisionGraph {
            node_count,
            edges: normalized,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[DualEdge] {
        &self.edges
    }

    /// Per-node neighbor lists as `(neighbor, weight)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            adj[e.i].push((e.j, e.weight));
            adj[e.j].push((e.i, e.weight));
        }
        adj
    }

    /// Connected components as sorted node lists: multi-node components
    /// first (ordered by smallest member), singletons last.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.node_count).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            let mut root = x;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = x;
            while parent[cur] != root {
                let next = parent[cur];
                parent[cur] = root;
                cur = next;
            }
            root
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut buckets: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for v in 0..self.node_count {
            let root = find(&mut parent, v);
            buckets.entry(root).or_default().push(v);
        }
        let (mut multi, mut single): (Vec<_>, Vec<_>) =
            buckets.into_values().partition(|c| c.len() > 1);
        multi.sort_by_key(|c| c[0]);
        single.sort_by_key(|c| c[0]);
        multi.extend(single);
        multi
    }
}

/// Angle in degrees within [0, 180] between two direction vectors.
fn direction_angle(u: Point2, v: Point2) -> f64 {
    u.cross(v).abs().atan2(u.dot(v)).to_degrees()
}

/// Classifies one edge pair, or `None` if the pair reads unambiguously.
///
/// Shared-node pairs are tested only for the two incidence conditions (the
/// small-angle one wins when both hold); disjoint pairs only for crossings
/// and near-parallel proximity.
pub fn check_pair(e1: &LayoutEdge, e2: &LayoutEdge, cfg: &GeomConfig) -> Option<CollisionKind> {
    let shared = shared_nodes(e1, e2);
    if !shared.is_empty() {
        let mut min_angle = f64::INFINITY;
        let mut max_angle = f64::NEG_INFINITY;
        for &n in &shared {
            for d1 in e1.directions_at(n) {
                for d2 in e2.directions_at(n) {
                    let a = direction_angle(d1, d2);
                    min_angle = min_angle.min(a);
                    max_angle = max_angle.max(a);
                }
            }
        }
        if min_angle < cfg.small_angle_deg {
            return Some(CollisionKind::SharedSmallAngle {
                angle_deg: min_angle,
            });
        }
        if cfg.enable_c3 && max_angle > cfg.straight_angle_deg {
            return Some(CollisionKind::SharedNearStraight {
                angle_deg: max_angle,
            });
        }
        return None;
    }

    // disjoint pair: shallow crossings first
    let mut crossing: Option<f64> = None;
    for s in e1.geometry.segments() {
        for t in e2.geometry.segments() {
            if segment_intersection(&s, &t).is_some() {
                let a = crossing_angle(&s, &t);
                crossing = Some(crossing.map_or(a, |c: f64| c.min(a)));
            }
        }
    }
    if let Some(angle_deg) = crossing {
        if angle_deg < cfg.small_angle_deg {
            return Some(CollisionKind::SmallCrossing { angle_deg });
        }
    }

    // near-parallel proximity: closest sub-segment pair among those within
    // the parallel-angle threshold
    let threshold = cfg.near_dist_frac * e1.length.max(e2.length);
    let mut best: Option<(f64, f64)> = None;
    for s in e1.geometry.segments() {
        for t in e2.geometry.segments() {
            let angle = crossing_angle(&s, &t);
            if angle < cfg.parallel_angle_deg {
                let d = segment_distance(&s, &t);
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, angle));
                }
            }
        }
    }
    if let Some((distance, angle_deg)) = best {
        if distance < threshold {
            return Some(CollisionKind::NearParallel {
                distance,
                angle_deg,
            });
        }
    }
    None
}

fn shared_nodes(e1: &LayoutEdge, e2: &LayoutEdge) -> Vec<usize> {
    let mut shared = Vec::new();
    for n in [e1.tail, e1.head] {
        if e2.touches(n) && !shared.contains(&n) {
            shared.push(n);
        }
    }
    shared
}

/// Axis-aligned bounding box of an edge's geometry, for pair prefiltering.
#[derive(Clone, Copy)]
struct Bbox {
    lo: Point2,
    hi: Point2,
}

impl Bbox {
    fn of(edge: &LayoutEdge) -> Bbox {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in edge.geometry.points() {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        Bbox { lo, hi }
    }

    fn gap(&self, o: &Bbox) -> f64 {
        let gx = (self.lo.x - o.hi.x).max(o.lo.x - self.hi.x).max(0.0);
        let gy = (self.lo.y - o.hi.y).max(o.lo.y - self.hi.y).max(0.0);
        gx.hypot(gy)
    }
}

/// Runs `check_pair` over every unordered edge pair (quadratic scan with a
/// bounding-box prefilter) and assembles the dual graph. Dual node ids equal
/// edge ids; every collision edge gets weight 1.
pub fn build_collision_graph(
    layout: &LayoutGraph,
    cfg: &GeomConfig,
) -> Result<DualCollisionGraph, GeometryError> {
    cfg.validate()?;
    let edges = layout.edges();
    let boxes: Vec<Bbox> = edges.iter().map(Bbox::of).collect();
    let mut dual = Vec::new();
    for i in 0..edges.len() {
        for j in (i + 1)..edges.len() {
            let disjoint = shared_nodes(&edges[i], &edges[j]).is_empty();
            if disjoint {
                // no disjoint condition can hold beyond the C4 distance bound
                let reach = cfg.near_dist_frac * edges[i].length.max(edges[j].length);
                if boxes[i].gap(&boxes[j]) >= reach {
                    continue;
                }
            }
            if let Some(kind) = check_pair(&edges[i], &edges[j], cfg) {
                dual.push(DualEdge {
                    i,
                    j,
                    weight: 1.0,
                    kind: Some(kind),
                });
            }
        }
    }
    Ok(DualCollisionGraph::new(edges.len(), dual).expect("scan yields a valid dual graph"))
}

/// Builds the map-mode dual graph from a region adjacency list: regions in
/// the same adjacency component are pairwise linked with weight
/// 1 / hop-distance, so neighbors repel most strongly.
pub fn build_map_dual(adjacency: &[Vec<usize>]) -> Result<DualCollisionGraph, DualGraphError> {
    let n = adjacency.len();
    let mut adj = vec![Vec::new(); n];
    for (i, ns) in adjacency.iter().enumerate() {
        for &j in ns {
            if j >= n {
                return Err(DualGraphError::RegionOutOfRange(j, n));
            }
            if i != j && !adj[i].contains(&j) {
                adj[i].push(j);
                if !adj[j].contains(&i) {
                    adj[j].push(i);
                }
            }
        }
    }
    let mut dual = Vec::new();
    let mut hops = vec![usize::MAX; n];
    for start in 0..n {
        // BFS hop distances from `start`
        hops.iter_mut().for_each(|h| *h = usize::MAX);
        hops[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if hops[v] == usize::MAX {
                    hops[v] = hops[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for j in (start + 1)..n {
            if hops[j] != usize::MAX {
                dual.push(DualEdge {
                    i: start,
                    j,
                    weight: 1.0 / hops[j] as f64,
                    kind: None,
                });
            }
        }
    }
    DualCollisionGraph::new(n, dual)
}
