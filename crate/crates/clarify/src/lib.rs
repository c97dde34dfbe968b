//! Edge coloring for cluttered graph layouts.
//!
//! Given an existing layout (node positions plus straight or spline edge
//! geometry), this crate finds pairs of edges that are hard to tell apart —
//! small-angle crossings, edges leaving a shared node at a narrow angle, and
//! near-parallel edges running close together — and assigns each edge a color
//! so that the minimum weighted color difference between any ambiguous pair is
//! as large as possible.
//!
//! The pipeline:
//!
//! 1. [`dot::parse_layout`] reads a laid-out DOT file into a [`graph::LayoutGraph`].
//! 2. [`collision::build_collision_graph`] detects ambiguous edge pairs and
//!    builds the dual collision graph (one dual node per original edge).
//! 3. [`optimizer::clarify`] colors each connected component of the dual graph
//!    by iterated branch-and-bound embedding into a [`colorspace::ColorSpace`].
//! 4. [`dot::emit_colored_dot`] / [`svg::emit_svg`] render the result.
//!
//! Region coloring for maps is supported through [`collision::build_map_dual`],
//! which replaces the collision detector with inverse-hop-distance weights over
//! a region adjacency graph.

pub mod collision;
pub mod colorspace;
pub mod dot;
pub mod geometry;
pub mod graph;
pub mod optimizer;
pub mod pipeline;
pub mod spatial;
pub mod svg;
