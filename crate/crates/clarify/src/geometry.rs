//! Planar primitives for edge-collision tests: points, segments, polylines,
//! angle measures, and spline flattening.
//!
//! Angles are measured with `atan2` on cross/dot products rather than `acos`,
//! which stays accurate for nearly parallel directions — exactly the regime
//! the collision conditions care about.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("degenerate segment: endpoints coincide at ({0}, {1})")]
    DegenerateSegment(f64, f64),
    #[error("polyline needs at least 2 distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("consecutive duplicate point at index {0}")]
    DuplicatePoint(usize),
    #[error("spline control sequence must hold 3n+1 (n >= 1) points, got {0}")]
    MalformedSpline(usize),
    #[error("degenerate spline: all control points coincide")]
    DegenerateSpline,
    #[error("invalid geometry config: {0}")]
    InvalidConfig(String),
}

/// A point (or direction vector) in layout coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn sub(&self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(&self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(&self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn dot(&self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(&self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, o: Point2) -> f64 {
        self.sub(o).norm()
    }
}

/// A segment with distinct, finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    a: Point2,
    b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Result<Self, GeometryError> {
        if !a.is_finite() {
            return Err(GeometryError::NonFinite(a.x, a.y));
        }
        if !b.is_finite() {
            return Err(GeometryError::NonFinite(b.x, b.y));
        }
        if a == b {
            return Err(GeometryError::DegenerateSegment(a.x, a.y));
        }
        Ok(Segment { a, b })
    }

    pub fn a(&self) -> Point2 {
        self.a
    }

    pub fn b(&self) -> Point2 {
        self.b
    }

    pub fn dir(&self) -> Point2 {
        self.b.sub(self.a)
    }

    pub fn length(&self) -> f64 {
        self.dir().norm()
    }
}

/// An open polyline: at least two points, consecutive points distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point2>,
}

impl Polyline {
    pub fn new(points: Vec<Point2>) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::TooFewPoints(points.len()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(GeometryError::NonFinite(p.x, p.y));
            }
            if i > 0 && *p == points[i - 1] {
                return Err(GeometryError::DuplicatePoint(i));
            }
        }
        Ok(Polyline { points })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn first(&self) -> Point2 {
        self.points[0]
    }

    pub fn last(&self) -> Point2 {
        *self.points.last().unwrap()
    }

    /// Total arc length; strictly positive by construction.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        // consecutive points are distinct, so Segment::new cannot fail
        self.points
            .windows(2)
            .map(|w| Segment::new(w[0], w[1]).unwrap())
    }

    pub fn reversed(&self) -> Polyline {
        let mut points = self.points.clone();
        points.reverse();
        Polyline { points }
    }
}

/// Thresholds for the collision conditions, angles in degrees.
#[derive(Debug, Clone)]
pub struct GeomConfig {
    /// C1/C2 fire below this angle (default 15).
    pub small_angle_deg: f64,
    /// C3 fires above this angle (default 165).
    pub straight_angle_deg: f64,
    /// C4 distance threshold as a fraction of the longer edge (default 0.01).
    pub near_dist_frac: f64,
    /// C4 fires only below this angle (default 1).
    pub parallel_angle_deg: f64,
    /// Whether C3 (near-straight continuation at a shared node) is tested.
    pub enable_c3: bool,
    /// Max deviation allowed when flattening spline edges (layout units).
    pub spline_flatten_tol: f64,
}

impl Default for GeomConfig {
    fn default() -> Self {
        GeomConfig {
            small_angle_deg: 15.0,
            straight_angle_deg: 165.0,
            near_dist_frac: 0.01,
            parallel_angle_deg: 1.0,
            enable_c3: true,
            spline_flatten_tol: 0.25,
        }
    }
}

impl GeomConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let err = |m: String| Err(GeometryError::InvalidConfig(m));
        if !(self.small_angle_deg > 0.0 && self.small_angle_deg < 90.0) {
            return err(format!(
                "small angle must be in (0, 90), got {}",
                self.small_angle_deg
            ));
        }
        if !(self.straight_angle_deg > 90.0 && self.straight_angle_deg < 180.0) {
            return err(format!(
                "straight angle must be in (90, 180), got {}",
                self.straight_angle_deg
            ));
        }
        if !(self.near_dist_frac > 0.0 && self.near_dist_frac < 1.0) {
            return err(format!(
                "near-distance fraction must be in (0, 1), got {}",
                self.near_dist_frac
            ));
        }
        if !(self.parallel_angle_deg > 0.0 && self.parallel_angle_deg <= self.small_angle_deg) {
            return err(format!(
                "parallel angle must be in (0, small angle], got {}",
                self.parallel_angle_deg
            ));
        }
        if !(self.spline_flatten_tol > 0.0 && self.spline_flatten_tol.is_finite()) {
            return err(format!(
                "spline flatten tolerance must be positive, got {}",
                self.spline_flatten_tol
            ));
        }
        Ok(())
    }
}

fn orient(p: Point2, q: Point2, r: Point2) -> f64 {
    q.sub(p).cross(r.sub(p))
}

/// Interior intersection point of two open segments.
///
/// Returns `None` when the segments are disjoint, touch only at an endpoint
/// (shared or T-junction), or overlap collinearly; a collinear overlap is
/// caught by the near-parallel test instead.
pub fn segment_intersection(s: &Segment, t: &Segment) -> Option<Point2> {
    let d1 = orient(t.a, t.b, s.a);
    let d2 = orient(t.a, t.b, s.b);
    let d3 = orient(s.a, s.b, t.a);
    let d4 = orient(s.a, s.b, t.b);
    let straddles = |u: f64, v: f64| (u > 0.0 && v < 0.0) || (u < 0.0 && v > 0.0);
    if straddles(d1, d2) && straddles(d3, d4) {
        let f = d1 / (d1 - d2);
        Some(s.a.add(s.b.sub(s.a).scale(f)))
    } else {
        None
    }
}

/// Acute angle between two segment directions, in degrees within [0, 90].
pub fn crossing_angle(s: &Segment, t: &Segment) -> f64 {
    let u = s.dir();
    let v = t.dir();
    u.cross(v).abs().atan2(u.dot(v).abs()).to_degrees()
}

/// Unsigned angle in degrees within [0, 180] between the rays
/// `shared -> tip_a` and `shared -> tip_b`.
///
/// Panics if either ray has zero length.
pub fn incident_angle(shared: Point2, tip_a: Point2, tip_b: Point2) -> f64 {
    let u = shared.sub(tip_a);
    let v = shared.sub(tip_b);
    assert!(
        u.norm() > 0.0 && v.norm() > 0.0,
        "incident_angle requires rays of positive length"
    );
    u.cross(v).abs().atan2(u.dot(v)).to_degrees()
}

/// Distance from a point to the closed segment.
pub fn point_segment_distance(p: Point2, s: &Segment) -> f64 {
    let d = s.dir();
    let t = (p.sub(s.a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
    p.dist(s.a.add(d.scale(t)))
}

/// Minimum distance between two closed segments; 0 iff they intersect or touch.
pub fn segment_distance(s: &Segment, t: &Segment) -> f64 {
    if segment_intersection(s, t).is_some() {
        return 0.0;
    }
    point_segment_distance(s.a, t)
        .min(point_segment_distance(s.b, t))
        .min(point_segment_distance(t.a, s))
        .min(point_segment_distance(t.b, s))
}

/// Flattens a piecewise cubic Bezier path (Graphviz spline control points:
/// 3n+1 points) into a polyline whose deviation from the curve stays within
/// `tol`.
///
/// Straight pieces collapse, so collinear control points yield a two-point
/// polyline. All control points coinciding is an error.
pub fn flatten_polyline(control: &[Point2], tol: f64) -> Result<Polyline, GeometryError> {
    if control.len() < 4 || control.len() % 3 != 1 {
        return Err(GeometryError::MalformedSpline(control.len()));
    }
    for p in control {
        if !p.is_finite() {
            return Err(GeometryError::NonFinite(p.x, p.y));
        }
    }
    let mut out = vec![control[0]];
    for piece in control.windows(4).step_by(3) {
        flatten_cubic(piece[0], piece[1], piece[2], piece[3], tol, 0, &mut out);
    }
    out.dedup();
    if out.len() < 2 {
        return Err(GeometryError::DegenerateSpline);
    }
    Polyline::new(out)
}

/// Appends the flattened tail of one cubic piece to `out` (`p0` is already there).
fn flatten_cubic(
    p0: Point2,
    p1: Point2,
    p2: Point2,
    p3: Point2,
    tol: f64,
    depth: u32,
    out: &mut Vec<Point2>,
) {
    if depth >= 24 || cubic_is_flat(p0, p1, p2, p3, tol) {
        if p3 != *out.last().unwrap() {
            out.push(p3);
        }
        return;
    }
    // de Casteljau split at t = 1/2
    let mid = |a: Point2, b: Point2| a.add(b).scale(0.5);
    let p01 = mid(p0, p1);
    let p12 = mid(p1, p2);
    let p23 = mid(p2, p3);
    let p012 = mid(p01, p12);
    let p123 = mid(p12, p23);
    let m = mid(p012, p123);
    flatten_cubic(p0, p01, p012, m, tol, depth + 1, out);
    flatten_cubic(m, p123, p23, p3, tol, depth + 1, out);
}

/// The curve stays within the convex hull of its control points, so bounding
/// the inner controls' offset from the chord (both across and along it)
/// bounds the curve's deviation from the chord segment.
fn cubic_is_flat(p0: Point2, p1: Point2, p2: Point2, p3: Point2, tol: f64) -> bool {
    let chord = p3.sub(p0);
    let len = chord.norm();
    if len == 0.0 {
        // closed piece: flat only if the controls collapse onto the point
        return p1.dist(p0) <= 0.5 * tol && p2.dist(p0) <= 0.5 * tol;
    }
    let half = 0.5 * tol;
    for p in [p1, p2] {
        let rel = p.sub(p0);
        if chord.cross(rel).abs() > half * len {
            return false;
        }
        let along = chord.dot(rel) / len;
        if along < -half || along > len + half {
            return false;
        }
    }
    true
}
