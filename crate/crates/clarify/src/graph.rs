//! In-memory form of a laid-out graph: named nodes with positions, edges with
//! polyline geometry, and enough attribute bookkeeping to re-emit the input.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{GeometryError, Point2, Polyline};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node \"{0}\" has no position (pos attribute required)")]
    MissingPosition(String),
    #[error("edge references unknown node \"{0}\"")]
    UnknownNode(String),
    #[error("degenerate edge \"{0}\" -- \"{1}\": endpoints share a position and no spline is given")]
    DegenerateEdge(String, String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Target of a `graph [...]` / `node [...]` / `edge [...]` default statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultTarget {
    Graph,
    Node,
    Edge,
}

#[derive(Debug, Clone)]
pub struct LayoutNode {
    pub name: String,
    pub pos: Point2,
    /// Attributes in input order, `pos` included.
    pub attrs: Vec<(String, String)>,
}

impl LayoutNode {
    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Display label: the `label` attribute unless absent or the Graphviz
    /// node-name placeholder `\N`.
    pub fn label(&self) -> &str {
        match self.attr("label") {
            Some(l) if l != "\\N" => l,
            _ => &self.name,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayoutEdge {
    pub tail: usize,
    pub head: usize,
    /// Drawn geometry, oriented so `geometry.first()` lies at the tail end.
    pub geometry: Polyline,
    /// Cached arc length of `geometry`.
    pub length: f64,
    pub attrs: Vec<(String, String)>,
}

impl LayoutEdge {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.tail, self.head)
    }

    pub fn touches(&self, node: usize) -> bool {
        self.tail == node || self.head == node
    }

    /// Direction vectors of the drawn geometry leaving `node` (two for a
    /// self-loop, one otherwise; empty if the edge does not touch `node`).
    pub fn directions_at(&self, node: usize) -> Vec<Point2> {
        let pts = self.geometry.points();
        let mut dirs = Vec::new();
        if self.tail == node {
            dirs.push(pts[1].sub(pts[0]));
        }
        if self.head == node {
            dirs.push(pts[pts.len() - 2].sub(pts[pts.len() - 1]));
        }
        dirs
    }
}

/// A parsed layout. Construction validates that every edge references known,
/// positioned nodes and that straight edges get their geometry from the node
/// positions themselves.
#[derive(Debug, Clone)]
pub struct LayoutGraph {
    pub name: Option<String>,
    pub directed: bool,
    pub strict: bool,
    /// `graph`/`node`/`edge` default-attribute statements, in input order.
    pub defaults: Vec<(DefaultTarget, Vec<(String, String)>)>,
    nodes: Vec<LayoutNode>,
    edges: Vec<LayoutEdge>,
    index: HashMap<String, usize>,
}

impl LayoutGraph {
    pub fn new(name: Option<String>, directed: bool) -> Self {
        LayoutGraph {
            name,
            directed,
            strict: false,
            defaults: Vec::new(),
            nodes: Vec::new(),
            edges: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn nodes(&self) -> &[LayoutNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[LayoutEdge] {
        &self.edges
    }

    pub fn node(&self, i: usize) -> &LayoutNode {
        &self.nodes[i]
    }

    pub fn edge(&self, i: usize) -> &LayoutEdge {
        &self.edges[i]
    }

    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Adds a node, or merges attributes into an existing node of the same
    /// name (later `pos` wins, matching Graphviz semantics).
    pub fn add_node(
        &mut self,
        name: &str,
        pos: Point2,
        attrs: Vec<(String, String)>,
    ) -> Result<usize, GraphError> {
        if !pos.is_finite() {
            return Err(GeometryError::NonFinite(pos.x, pos.y).into());
        }
        match self.index.get(name) {
            Some(&i) => {
                self.nodes[i].pos = pos;
                self.nodes[i].attrs.extend(attrs);
                Ok(i)
            }
            None => {
                let i = self.nodes.len();
                self.nodes.push(LayoutNode {
                    name: name.to_string(),
                    pos,
                    attrs,
                });
                self.index.insert(name.to_string(), i);
                Ok(i)
            }
        }
    }

    /// Adds an edge between named nodes. Without an explicit spline the
    /// geometry is the straight segment between the node positions; a spline
    /// polyline is re-oriented so its first point sits at the tail end.
    pub fn add_edge(
        &mut self,
        tail: &str,
        head: &str,
        geometry: Option<Polyline>,
        attrs: Vec<(String, String)>,
    ) -> Result<usize, GraphError> {
        let t = self
            .node_id(tail)
            .ok_or_else(|| GraphError::UnknownNode(tail.to_string()))?;
        let h = self
            .node_id(head)
            .ok_or_else(|| GraphError::UnknownNode(head.to_string()))?;
        let tp = self.nodes[t].pos;
        let hp = self.nodes[h].pos;
        let geometry = match geometry {
            None => {
                if tp == hp {
                    return Err(GraphError::DegenerateEdge(
                        tail.to_string(),
                        head.to_string(),
                    ));
                }
                Polyline::new(vec![tp, hp])?
            }
            Some(poly) => {
                let keep = poly.first().dist(tp) + poly.last().dist(hp);
                let flip = poly.first().dist(hp) + poly.last().dist(tp);
                if flip < keep {
                    poly.reversed()
                } else {
                    poly
                }
            }
        };
        let length = geometry.length();
        let i = self.edges.len();
        self.edges.push(LayoutEdge {
            tail: t,
            head: h,
            geometry,
            length,
            attrs,
        });
        Ok(i)
    }
}
