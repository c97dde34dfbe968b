//! Minimal SVG rendering of a colored layout: edge polylines as stroked
//! paths, nodes as labeled circles. DOT's y axis grows upward, so
//! coordinates are flipped into SVG's downward-growing frame.

use crate::graph::LayoutGraph;

/// Stroke styling for one edge, in [`LayoutGraph::edges`] order.
#[derive(Debug, Clone)]
pub struct EdgeStroke {
    pub color: String,
    /// `stroke-dasharray` value, if the edge is dashed.
    pub dasharray: Option<&'static str>,
}

const MARGIN: f64 = 20.0;
const NODE_RADIUS: f64 = 6.0;

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Renders the layout as a standalone SVG document.
pub fn emit_svg(g: &LayoutGraph, strokes: &[EdgeStroke]) -> String {
    assert_eq!(strokes.len(), g.edges().len(), "one stroke per edge required");
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut cover = |x: f64, y: f64| {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    };
    for n in g.nodes() {
        cover(n.pos.x, n.pos.y);
    }
    for e in g.edges() {
        for p in e.geometry.points() {
            cover(p.x, p.y);
        }
    }
    if g.nodes().is_empty() {
        (min_x, min_y, max_x, max_y) = (0.0, 0.0, 0.0, 0.0);
    }
    let width = max_x - min_x + 2.0 * MARGIN;
    let height = max_y - min_y + 2.0 * MARGIN;
    let tx = |x: f64| x - min_x + MARGIN;
    let ty = |y: f64| max_y - y + MARGIN; // flip: DOT y grows upward

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.2}\" height=\"{height:.2}\" viewBox=\"0 0 {width:.2} {height:.2}\">\n"
    ));
    out.push_str("  <g fill=\"none\" stroke-width=\"2\">\n");
    for (e, stroke) in g.edges().iter().zip(strokes) {
        let mut d = String::new();
        for (i, p) in e.geometry.points().iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            d.push_str(&format!(
                "{}{}{:.2},{:.2}",
                if i == 0 { "" } else { " " },
                cmd,
                tx(p.x),
                ty(p.y)
            ));
        }
        out.push_str(&format!("    <path d=\"{d}\" stroke=\"{}\"", stroke.color));
        if let Some(dash) = stroke.dasharray {
            out.push_str(&format!(" stroke-dasharray=\"{dash}\""));
        }
        out.push_str("/>\n");
    }
    out.push_str("  </g>\n");
    out.push_str("  <g fill=\"#ffffff\" stroke=\"#000000\">\n");
    for n in g.nodes() {
        out.push_str(&format!(
            "    <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{NODE_RADIUS}\"/>\n",
            tx(n.pos.x),
            ty(n.pos.y)
        ));
    }
    out.push_str("  </g>\n");
    out.push_str(
        "  <g font-family=\"Helvetica,sans-serif\" font-size=\"10\" text-anchor=\"middle\" fill=\"#000000\">\n",
    );
    for n in g.nodes() {
        out.push_str(&format!(
            "    <text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            tx(n.pos.x),
            ty(n.pos.y) - NODE_RADIUS - 2.0,
            escape_xml(n.label())
        ));
    }
    out.push_str("  </g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn sample_graph() -> LayoutGraph {
        let mut g = LayoutGraph::new(Some("s".into()), false);
        g.add_node("a", Point2::new(0.0, 0.0), vec![]).unwrap();
        g.add_node(
            "b",
            Point2::new(100.0, 50.0),
            vec![("label".into(), "B<&>".into())],
        )
        .unwrap();
        g.add_edge("a", "b", None, vec![]).unwrap();
        g
    }

    #[test]
    fn renders_paths_nodes_and_labels() {
        let g = sample_graph();
        let svg = emit_svg(
            &g,
            &[EdgeStroke {
                color: "#b30000".into(),
                dasharray: None,
            }],
        );
        assert!(svg.contains("<svg xmlns"));
        assert!(svg.contains("stroke=\"#b30000\""));
        assert!(!svg.contains("stroke-dasharray"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("B&lt;&amp;&gt;"));
        // y flip: node b (higher DOT y) renders above node a
        let a_y = 50.0 + 20.0; // max_y - 0 + margin
        assert!(svg.contains(&format!("cy=\"{a_y:.2}\"")));
        assert!(svg.contains("cy=\"20.00\""));
    }

    #[test]
    fn dasharray_appears_when_requested() {
        let g = sample_graph();
        let svg = emit_svg(
            &g,
            &[EdgeStroke {
                color: "#555555".into(),
                dasharray: Some("8,4"),
            }],
        );
        assert!(svg.contains("stroke-dasharray=\"8,4\""));
    }

    #[test]
    fn output_is_deterministic() {
        let g = sample_graph();
        let strokes = vec![EdgeStroke {
            color: "#b30000".into(),
            dasharray: None,
        }];
        assert_eq!(emit_svg(&g, &strokes), emit_svg(&g, &strokes));
    }
}
