//! Assigns colors to dual-graph nodes so the smallest weighted pairwise
//! color distance is as large as possible.
//!
//! Each connected component is treated independently: nodes get random
//! initial colors, then sweeps in ascending node order re-embed one node at
//! a time against its neighbors' current colors. A sweep never lowers a
//! node's own objective (its previous color stays feasible), and the run
//! keeps the best post-sweep snapshot, so the returned assignment is at
//! least as good as any intermediate one.
//!
//! Re-embedding one node is an exact (discrete) or epsilon-approximate
//! (continuous) maximization of `min_i w_i * ||x - c_i||` by breadth-first
//! branch-and-bound over cube cells: a cell dies when even its most
//! optimistic point cannot beat the incumbent.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::collision::DualCollisionGraph;
use crate::colorspace::{ColorPoint, ColorSpace};
use crate::spatial::{candidate_point, cell_is_live, root_cell, subdivide, Cell};

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
}

/// Target colors with positive weights; the objective keeps the embedded
/// point far from all of them.
pub type WeightedTargets = [(ColorPoint, f64)];

/// Smallest weighted distance from `x` to the target set; infinite when the
/// set is empty.
pub fn point_set_distance(x: &ColorPoint, targets: &WeightedTargets) -> f64 {
    targets
        .iter()
        .map(|(c, w)| w * x.dist(c))
        .fold(f64::INFINITY, f64::min)
}

/// Like [`point_set_distance`], but may stop scanning once the running
/// minimum falls below `cutoff`: the result is exact if it is >= `cutoff`,
/// otherwise it is an upper bound on the true distance that already settles
/// the caller's comparison against `cutoff`.
fn point_set_distance_cutoff(x: &ColorPoint, targets: &WeightedTargets, cutoff: f64) -> f64 {
    let mut min = f64::INFINITY;
    for (c, w) in targets {
        let d = w * x.dist(c);
        if d < min {
            min = d;
            if min < cutoff {
                break;
            }
        }
    }
    min
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Termination pitch for continuous spaces. A single embedding lands
    /// within sqrt(d) * epsilon/2 of optimal (times any weight above 1), so
    /// a pair of mutually embedded nodes keeps all but sqrt(d) * epsilon of
    /// its best possible separation.
    pub epsilon: f64,
    /// Independent random restarts per component; the best result wins.
    pub random_starts: usize,
    /// Base seed; restart r of a component draws from a stream keyed by the
    /// component's smallest node id with seed `rng_seed + r`.
    pub rng_seed: u64,
    /// Hard cap on sweeps per restart; hitting it logs a warning.
    pub max_outer_iterations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            epsilon: 1e-2,
            random_starts: 1,
            rng_seed: 0,
            max_outer_iterations: 100,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(OptimizerError::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.random_starts == 0 {
            return Err(OptimizerError::InvalidConfig(
                "random_starts must be at least 1".into(),
            ));
        }
        if self.max_outer_iterations == 0 {
            return Err(OptimizerError::InvalidConfig(
                "max_outer_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Discrete cells at most this large are scanned exhaustively instead of
/// being subdivided, which keeps discrete embedding exact.
const LEAF_SAMPLES: usize = 8;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pruning {
    On,
    Off,
}

/// Lazily expanded cell tree over one space. Subdivision and candidate
/// points depend only on the space, never on the targets, so one tree serves
/// every embedding of a run: each cell's children and candidate are computed
/// at most once and reused. This keeps a sweep from re-partitioning and
/// re-scanning a large sample set on every node it visits.
struct Decomposition<'a> {
    space: &'a ColorSpace,
    cells: Vec<Cell>,
    candidates: Vec<Option<ColorPoint>>,
    children: Vec<Option<(u32, u32)>>,
}

impl<'a> Decomposition<'a> {
    fn new(space: &'a ColorSpace) -> Self {
        let root = root_cell(space);
        let candidate = candidate_point(&root, space);
        Decomposition {
            space,
            cells: vec![root],
            candidates: vec![candidate],
            children: vec![None],
        }
    }

    /// Index span of `idx`'s children, expanding them on first request.
    fn children(&mut self, idx: usize) -> (u32, u32) {
        if let Some(span) = self.children[idx] {
            return span;
        }
        let kids: Vec<Cell> = subdivide(&self.cells[idx], self.space)
            .into_iter()
            .filter(|kid| cell_is_live(kid, self.space))
            .collect();
        let start = self.cells.len() as u32;
        let count = kids.len() as u32;
        for kid in &kids {
            self.candidates.push(candidate_point(kid, self.space));
        }
        self.cells.extend(kids);
        self.children.resize(self.cells.len(), None);
        self.children[idx] = Some((start, count));
        (start, count)
    }
}

/// Places one point in `space` maximizing the smallest weighted distance to
/// `targets`. Exact over discrete spaces; within `sqrt(d) * epsilon / 2` of
/// the optimum (scaled by weights above 1) over continuous ones. An empty
/// target set yields the space's default point.
pub fn embed_one_node(space: &ColorSpace, targets: &WeightedTargets, epsilon: f64) -> ColorPoint {
    embed_impl(&mut Decomposition::new(space), targets, epsilon, Pruning::On)
}

/// [`embed_one_node`] with pruning disabled; exists so tests can confirm
/// pruning never changes the result.
pub fn embed_one_node_unpruned(
    space: &ColorSpace,
    targets: &WeightedTargets,
    epsilon: f64,
) -> ColorPoint {
    embed_impl(&mut Decomposition::new(space), targets, epsilon, Pruning::Off)
}

fn embed_impl(
    decomp: &mut Decomposition,
    targets: &WeightedTargets,
    epsilon: f64,
    pruning: Pruning,
) -> ColorPoint {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let space = decomp.space;
    if targets.is_empty() {
        return space.default_point();
    }
    let dim_scale = (space.dim() as f64).sqrt();
    let w_scale = targets
        .iter()
        .fold(1.0f64, |m, (_, w)| m.max(*w));

    let mut best = space.default_point();
    let mut best_dist = point_set_distance(&best, targets);

    let mut queue = VecDeque::new();
    queue.push_back(0u32);
    while let Some(idx) = queue.pop_front() {
        let idx = idx as usize;
        let cell = &decomp.cells[idx];
        // Breadth-first order makes this a clean level cutoff. Evaluating
        // down to cells finer than epsilon/2 (breaking a level later, at
        // epsilon/4) matters: in a sweep both endpoints of a pair settle on
        // cell centers, so the achievable pair distance loses twice the
        // final cell offset, which this keeps below sqrt(d) * epsilon.
        if !space.is_discrete() && cell.half_width() < epsilon * 0.25 {
            break;
        }
        // a cell cannot beat the incumbent once even its best conceivable
        // point (center distance plus weighted cell radius) falls short
        let radius = dim_scale * cell.half_width() * w_scale;
        let center_dist =
            point_set_distance_cutoff(&cell.center(), targets, best_dist - radius);
        if pruning == Pruning::On && center_dist + radius < best_dist {
            continue;
        }
        if space.is_discrete() && cell.samples().len() <= LEAF_SAMPLES {
            let samples = space.samples().unwrap();
            for &i in cell.samples() {
                let p = samples.point(i as usize);
                let d = point_set_distance_cutoff(p, targets, best_dist);
                if d > best_dist {
                    best_dist = d;
                    best = *p;
                }
            }
            continue;
        }
        if let Some(cand) = decomp.candidates[idx] {
            let d = if cand == cell.center() {
                center_dist
            } else {
                point_set_distance_cutoff(&cand, targets, best_dist)
            };
            if d > best_dist {
                best_dist = d;
                best = cand;
            }
        }
        let (start, count) = decomp.children(idx);
        for child in start..start + count {
            queue.push_back(child);
        }
    }
    best
}

/// Colors for every dual node plus the achieved objective values.
#[derive(Debug, Clone)]
pub struct ClarifyResult {
    /// Color per dual node, indexed by node id.
    pub colors: Vec<ColorPoint>,
    /// Smallest weighted distance over all dual edges; infinite if none.
    pub mindist: f64,
    /// Sum of weighted distances over all dual edges.
    pub sumdist: f64,
    /// Per-component outcomes, in [`DualCollisionGraph::components`] order.
    pub components: Vec<ComponentOutcome>,
}

#[derive(Debug, Clone)]
pub struct ComponentOutcome {
    pub nodes: Vec<usize>,
    /// Infinite for singletons (no pairs to separate).
    pub mindist: f64,
    pub sumdist: f64,
    /// Sweeps executed across all restarts.
    pub sweeps: usize,
}

/// Relative tolerance under which two objective values count as equal when
/// deciding whether a sweep still improves.
const IMPROVE_RTOL: f64 = 1e-12;

fn roughly_equal(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if !(a.is_finite() && b.is_finite()) {
        return false;
    }
    (a - b).abs() <= IMPROVE_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Lexicographic comparison of (mindist, sumdist) with [`IMPROVE_RTOL`]
/// slack on equality.
fn lex_improves(new: (f64, f64), old: (f64, f64)) -> bool {
    if roughly_equal(new.0, old.0) {
        !roughly_equal(new.1, old.1) && new.1 > old.1
    } else {
        new.0 > old.0
    }
}

fn random_point(space: &ColorSpace, rng: &mut ChaCha8Rng) -> ColorPoint {
    match space {
        ColorSpace::Box(b) => {
            let mut c = [0.0; 3];
            for k in 0..b.dim() {
                c[k] = rng.gen_range(b.lower()[k]..=b.upper()[k]);
            }
            ColorPoint::new(&c[..b.dim()])
        }
        ColorSpace::Samples(s) => *s.point(rng.gen_range(0..s.len())),
    }
}

/// Objective of an assignment over the given dual edges.
fn edge_metrics(
    colors: &[ColorPoint],
    edges: &[(usize, usize, f64)],
) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    for &(i, j, w) in edges {
        let d = w * colors[i].dist(&colors[j]);
        min = min.min(d);
        sum += d;
    }
    (min, sum)
}

/// Optimizes one component in place, writing colors into `colors` (indexed
/// by dual node id) and returning its outcome.
fn clarify_component_impl(
    decomp: &mut Decomposition,
    dual: &DualCollisionGraph,
    component: &[usize],
    adjacency: &[Vec<(usize, f64)>],
    cfg: &OptimizerConfig,
    colors: &mut [ColorPoint],
) -> ComponentOutcome {
    let space = decomp.space;
    if component.len() == 1 {
        colors[component[0]] = space.default_point();
        return ComponentOutcome {
            nodes: component.to_vec(),
            mindist: f64::INFINITY,
            sumdist: 0.0,
            sweeps: 0,
        };
    }
    let member = {
        let mut m = vec![false; dual.node_count()];
        for &v in component {
            m[v] = true;
        }
        m
    };
    let edges: Vec<(usize, usize, f64)> = dual
        .edges()
        .iter()
        .filter(|e| member[e.i] && member[e.j])
        .map(|e| (e.i, e.j, e.weight))
        .collect();
    let stream = component[0] as u64; // components are sorted ascending

    let mut best: Option<(Vec<ColorPoint>, (f64, f64))> = None;
    let mut total_sweeps = 0;
    for restart in 0..cfg.random_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_add(restart as u64));
        rng.set_stream(stream);
        let mut current: Vec<ColorPoint> = colors.to_vec();
        for &v in component {
            current[v] = random_point(space, &mut rng);
        }
        let mut prev = edge_metrics(&current, &edges);
        for sweep in 0..cfg.max_outer_iterations {
            for &v in component {
                let targets: Vec<(ColorPoint, f64)> = adjacency[v]
                    .iter()
                    .map(|&(u, w)| (current[u], w))
                    .collect();
                current[v] = embed_impl(decomp, &targets, cfg.epsilon, Pruning::On);
            }
            total_sweeps += 1;
            let now = edge_metrics(&current, &edges);
            if best
                .as_ref()
                .map_or(true, |(_, b)| lex_improves(now, *b))
            {
                best = Some((current.clone(), now));
            }
            if !lex_improves(now, prev) {
                break;
            }
            prev = now;
            if sweep + 1 == cfg.max_outer_iterations {
                log::warn!(
                    "component starting at node {} still improving after {} sweeps; stopping",
                    component[0],
                    cfg.max_outer_iterations
                );
            }
        }
    }
    let (snapshot, (mindist, sumdist)) = best.expect("at least one restart ran");
    for &v in component {
        colors[v] = snapshot[v];
    }
    ComponentOutcome {
        nodes: component.to_vec(),
        mindist,
        sumdist,
        sweeps: total_sweeps,
    }
}

/// Optimizes a dual graph the caller already knows to be one connected
/// component, treating every node as part of the same unit: restarts from
/// seeded-random colors, sweeps nodes in ascending id, and returns the best
/// snapshot by lexicographic `(mindist, sumdist)`. On a connected graph this
/// equals [`clarify`]; a lone node just gets the default color.
pub fn clarify_component(
    space: &ColorSpace,
    dual: &DualCollisionGraph,
    cfg: &OptimizerConfig,
) -> Result<ClarifyResult, OptimizerError> {
    cfg.validate()?;
    let adjacency = dual.adjacency();
    let mut colors = vec![space.default_point(); dual.node_count()];
    let component: Vec<usize> = (0..dual.node_count()).collect();
    let mut components = Vec::new();
    if !component.is_empty() {
        let mut decomp = Decomposition::new(space);
        components.push(clarify_component_impl(
            &mut decomp,
            dual,
            &component,
            &adjacency,
            cfg,
            &mut colors,
        ));
    }
    let all_edges: Vec<(usize, usize, f64)> = dual
        .edges()
        .iter()
        .map(|e| (e.i, e.j, e.weight))
        .collect();
    let (mindist, sumdist) = edge_metrics(&colors, &all_edges);
    Ok(ClarifyResult {
        colors,
        mindist,
        sumdist,
        components,
    })
}

/// Colors every dual node: singleton components get the default color,
/// multi-node components are optimized independently.
pub fn clarify(
    space: &ColorSpace,
    dual: &DualCollisionGraph,
    cfg: &OptimizerConfig,
) -> Result<ClarifyResult, OptimizerError> {
    cfg.validate()?;
    let adjacency = dual.adjacency();
    let mut colors = vec![space.default_point(); dual.node_count()];
    let mut components = Vec::new();
    let mut decomp = Decomposition::new(space);
    for component in dual.components() {
        components.push(clarify_component_impl(
            &mut decomp,
            dual,
            &component,
            &adjacency,
            cfg,
            &mut colors,
        ));
    }
    let all_edges: Vec<(usize, usize, f64)> = dual
        .edges()
        .iter()
        .map(|e| (e.i, e.j, e.weight))
        .collect();
    let (mindist, sumdist) = edge_metrics(&colors, &all_edges);
    Ok(ClarifyResult {
        colors,
        mindist,
        sumdist,
        components,
    })
}
