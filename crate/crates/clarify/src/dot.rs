//! Reading and writing laid-out DOT files.
//!
//! The parser covers the subset Graphviz emits for finished layouts: an
//! optionally strict, optionally named `graph`/`digraph` containing default
//! statements, node statements with a mandatory `pos="x,y"` attribute, and
//! edge chains whose optional `pos` spline (`e,x,y` / `s,x,y` markers plus
//! 3n+1 cubic control points) is flattened to a polyline. Subgraphs, ports,
//! and HTML strings are rejected with a line-numbered error.
//!
//! Attribute values keep their Graphviz escape sequences verbatim, so
//! emitting never re-escapes and a parse -> emit -> parse cycle is lossless.

use thiserror::Error;

use crate::geometry::{flatten_polyline, Point2, Polyline};
use crate::graph::{DefaultTarget, GraphError, LayoutGraph};

#[derive(Debug, Error)]
pub enum DotError {
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn syntax(line: usize, msg: impl Into<String>) -> DotError {
    DotError::Syntax(line, msg.into())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Eq,
    /// `--` (false) or `->` (true)
    EdgeOp(bool),
    Id(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Semi => "';'".into(),
            Tok::Comma => "','".into(),
            Tok::Eq => "'='".into(),
            Tok::EdgeOp(true) => "'->'".into(),
            Tok::EdgeOp(false) => "'--'".into(),
            Tok::Id(s) => format!("\"{s}\""),
        }
    }
}

fn is_id_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || b >= 0x80
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, DotError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b'\n' => {
                line += 1;
                i += 1;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' => {
                match bytes.get(i + 1) {
                    Some(b'/') => {
                        while i < bytes.len() && bytes[i] != b'\n' {
                            i += 1;
                        }
                    }
                    Some(b'*') => {
                        let start = line;
                        i += 2;
                        loop {
                            if i + 1 >= bytes.len() {
                                return Err(syntax(start, "unterminated block comment"));
                            }
                            if bytes[i] == b'\n' {
                                line += 1;
                            }
                            if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                                i += 2;
                                break;
                            }
                            i += 1;
                        }
                    }
                    _ => return Err(syntax(line, "unexpected character '/'")),
                }
            }
            b'"' => {
                let start = line;
                i += 1;
                let mut val = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(syntax(start, "unterminated string"));
                    }
                    match bytes[i] {
                        b'"' => {
                            i += 1;
                            break;
                        }
                        b'\\' if i + 1 < bytes.len() => {
                            // a backslash-newline joins lines; every other
                            // escape is kept verbatim for lossless emission
                            if bytes[i + 1] == b'\n' {
                                line += 1;
                            } else {
                                val.push('\\');
                                val.push(bytes[i + 1] as char);
                            }
                            i += 2;
                        }
                        b'\n' => {
                            line += 1;
                            val.push('\n');
                            i += 1;
                        }
                        c => {
                            val.push(c as char);
                            i += 1;
                        }
                    }
                }
                // re-decode: pushing raw bytes as chars mangles UTF-8
                let val = if val.is_ascii() {
                    val
                } else {
                    String::from_utf8(val.chars().map(|c| c as u8).collect())
                        .map_err(|_| syntax(start, "invalid UTF-8 in string"))?
                };
                toks.push((Tok::Id(val), start));
            }
            b'{' => {
                toks.push((Tok::LBrace, line));
                i += 1;
            }
            b'}' => {
                toks.push((Tok::RBrace, line));
                i += 1;
            }
            b'[' => {
                toks.push((Tok::LBracket, line));
                i += 1;
            }
            b']' => {
                toks.push((Tok::RBracket, line));
                i += 1;
            }
            b';' => {
                toks.push((Tok::Semi, line));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, line));
                i += 1;
            }
            b'=' => {
                toks.push((Tok::Eq, line));
                i += 1;
            }
            b'-' => match bytes.get(i + 1) {
                Some(b'-') => {
                    toks.push((Tok::EdgeOp(false), line));
                    i += 2;
                }
                Some(b'>') => {
                    toks.push((Tok::EdgeOp(true), line));
                    i += 2;
                }
                Some(c) if c.is_ascii_digit() || *c == b'.' => {
                    let start = i;
                    i += 1;
                    while i < bytes.len() && is_id_byte(bytes[i]) {
                        i += 1;
                    }
                    toks.push((Tok::Id(src[start..i].to_string()), line));
                }
                _ => return Err(syntax(line, "unexpected character '-'")),
            },
            b'<' => {
                return Err(syntax(line, "HTML strings are not supported"));
            }
            b':' => {
                return Err(syntax(line, "ports are not supported"));
            }
            c if is_id_byte(c) => {
                let start = i;
                while i < bytes.len() && is_id_byte(bytes[i]) {
                    i += 1;
                }
                toks.push((Tok::Id(src[start..i].to_string()), line));
            }
            c => {
                return Err(syntax(line, format!("unexpected character '{}'", c as char)));
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map_or(1, |(_, l)| *l)
    }

    fn advance(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<usize, DotError> {
        match self.advance() {
            Some((t, l)) if &t == want => Ok(l),
            Some((t, l)) => Err(syntax(l, format!("expected {what}, found {}", t.describe()))),
            None => Err(syntax(self.line(), format!("expected {what}, found end of file"))),
        }
    }

    fn expect_id(&mut self, what: &str) -> Result<(String, usize), DotError> {
        match self.advance() {
            Some((Tok::Id(s), l)) => Ok((s, l)),
            Some((t, l)) => Err(syntax(l, format!("expected {what}, found {}", t.describe()))),
            None => Err(syntax(self.line(), format!("expected {what}, found end of file"))),
        }
    }

    fn eat_keyword(&mut self, word: &str) -> bool {
        if let Some(Tok::Id(s)) = self.peek() {
            if s.eq_ignore_ascii_case(word) {
                self.pos += 1;
                return true;
            }
        }
        false
    }
}

enum Stmt {
    Defaults(DefaultTarget, Vec<(String, String)>),
    Node {
        name: String,
        attrs: Vec<(String, String)>,
        line: usize,
    },
    Chain {
        names: Vec<String>,
        attrs: Vec<(String, String)>,
        line: usize,
    },
}

fn parse_attr_lists(p: &mut Parser) -> Result<Vec<(String, String)>, DotError> {
    let mut attrs = Vec::new();
    while p.peek() == Some(&Tok::LBracket) {
        p.advance();
        loop {
            match p.peek() {
                Some(Tok::RBracket) => {
                    p.advance();
                    break;
                }
                Some(Tok::Id(_)) => {
                    let (k, _) = p.expect_id("attribute name")?;
                    p.expect(&Tok::Eq, "'=' after attribute name")?;
                    let (v, _) = p.expect_id("attribute value")?;
                    attrs.push((k, v));
                    if matches!(p.peek(), Some(Tok::Comma) | Some(Tok::Semi)) {
                        p.advance();
                    }
                }
                Some(t) => {
                    let t = t.describe();
                    return Err(syntax(p.line(), format!("expected attribute, found {t}")));
                }
                None => return Err(syntax(p.line(), "unterminated attribute list")),
            }
        }
    }
    Ok(attrs)
}

fn parse_stmt(p: &mut Parser, directed: bool) -> Result<Stmt, DotError> {
    if p.peek() == Some(&Tok::LBrace) {
        return Err(syntax(p.line(), "subgraphs are not supported"));
    }
    let (id, line) = p.expect_id("statement")?;
    if id.eq_ignore_ascii_case("subgraph") {
        return Err(syntax(line, "subgraphs are not supported"));
    }
    for (word, target) in [
        ("graph", DefaultTarget::Graph),
        ("node", DefaultTarget::Node),
        ("edge", DefaultTarget::Edge),
    ] {
        if id.eq_ignore_ascii_case(word) && p.peek() == Some(&Tok::LBracket) {
            return Ok(Stmt::Defaults(target, parse_attr_lists(p)?));
        }
    }
    match p.peek() {
        Some(Tok::Eq) => {
            p.advance();
            let (v, _) = p.expect_id("attribute value")?;
            Ok(Stmt::Defaults(DefaultTarget::Graph, vec![(id, v)]))
        }
        Some(Tok::EdgeOp(_)) => {
            let mut names = vec![id];
            while let Some(Tok::EdgeOp(dir)) = p.peek() {
                if *dir != directed {
                    let (want, got) = if directed { ("->", "--") } else { ("--", "->") };
                    return Err(syntax(
                        p.line(),
                        format!("edge operator '{got}' does not match the graph type (use '{want}')"),
                    ));
                }
                p.advance();
                let (next, _) = p.expect_id("node name after edge operator")?;
                names.push(next);
            }
            let attrs = parse_attr_lists(p)?;
            Ok(Stmt::Chain { names, attrs, line })
        }
        _ => {
            let attrs = parse_attr_lists(p)?;
            Ok(Stmt::Node {
                name: id,
                attrs,
                line,
            })
        }
    }
}

fn parse_node_pos(value: &str, name: &str, line: usize) -> Result<Point2, DotError> {
    let trimmed = value.trim().trim_end_matches('!');
    let parts: Vec<&str> = trimmed.split(',').collect();
    let invalid = || syntax(line, format!("node \"{name}\": pos must be \"x,y\", got \"{value}\""));
    if parts.len() != 2 {
        return Err(invalid());
    }
    let x: f64 = parts[0].trim().parse().map_err(|_| invalid())?;
    let y: f64 = parts[1].trim().parse().map_err(|_| invalid())?;
    Ok(Point2::new(x, y))
}

/// Parses an edge `pos` spline: optional `e,x,y` and `s,x,y` endpoints, then
/// 3n+1 control points flattened within `tol`.
fn parse_edge_spline(value: &str, tol: f64, line: usize) -> Result<Option<Polyline>, DotError> {
    let mut tokens = value.split_whitespace().peekable();
    if tokens.peek().is_none() {
        return Ok(None);
    }
    let parse_xy = |tok: &str| -> Result<Point2, DotError> {
        let parts: Vec<&str> = tok.split(',').collect();
        if parts.len() != 2 {
            return Err(syntax(line, format!("bad spline point \"{tok}\"")));
        }
        let x: f64 = parts[0]
            .parse()
            .map_err(|_| syntax(line, format!("bad spline point \"{tok}\"")))?;
        let y: f64 = parts[1]
            .parse()
            .map_err(|_| syntax(line, format!("bad spline point \"{tok}\"")))?;
        Ok(Point2::new(x, y))
    };
    let mut end_pt = None;
    let mut start_pt = None;
    while let Some(tok) = tokens.peek() {
        if let Some(rest) = tok.strip_prefix("e,") {
            if end_pt.replace(parse_xy(rest)?).is_some() {
                return Err(syntax(line, "duplicate 'e' spline endpoint"));
            }
            tokens.next();
        } else if let Some(rest) = tok.strip_prefix("s,") {
            if start_pt.replace(parse_xy(rest)?).is_some() {
                return Err(syntax(line, "duplicate 's' spline endpoint"));
            }
            tokens.next();
        } else {
            break;
        }
    }
    let control: Vec<Point2> = tokens.map(parse_xy).collect::<Result<_, _>>()?;
    let flat = flatten_polyline(&control, tol)
        .map_err(|e| syntax(line, format!("edge spline: {e}")))?;
    // the s/e markers are drawn as straight stubs before/after the spline
    let mut pts = Vec::with_capacity(flat.points().len() + 2);
    if let Some(s) = start_pt {
        pts.push(s);
    }
    pts.extend_from_slice(flat.points());
    if let Some(e) = end_pt {
        pts.push(e);
    }
    pts.dedup_by(|a, b| a == b);
    let poly =
        Polyline::new(pts).map_err(|e| syntax(line, format!("edge spline: {e}")))?;
    Ok(Some(poly))
}

/// Parses a laid-out DOT file. Every node needs a `pos` attribute; edge
/// splines are flattened to polylines within `spline_tol`.
pub fn parse_layout(src: &str, spline_tol: f64) -> Result<LayoutGraph, DotError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let strict = p.eat_keyword("strict");
    let directed = if p.eat_keyword("digraph") {
        true
    } else if p.eat_keyword("graph") {
        false
    } else {
        return Err(syntax(p.line(), "expected 'graph' or 'digraph'"));
    };
    let name = match p.peek() {
        Some(Tok::Id(_)) => Some(p.expect_id("graph name")?.0),
        _ => None,
    };
    p.expect(&Tok::LBrace, "'{'")?;
    let mut stmts = Vec::new();
    loop {
        match p.peek() {
            Some(Tok::RBrace) => {
                p.advance();
                break;
            }
            Some(Tok::Semi) => {
                p.advance();
            }
            Some(_) => stmts.push(parse_stmt(&mut p, directed)?),
            None => return Err(syntax(p.line(), "expected '}', found end of file")),
        }
    }
    if let Some(t) = p.peek() {
        let t = t.describe();
        return Err(syntax(p.line(), format!("unexpected {t} after closing '}}'")));
    }

    let mut g = LayoutGraph::new(name, directed);
    g.strict = strict;

    // first pass: register every node (explicit statements merge attributes,
    // edge mentions create implicit entries) in first-mention order
    let mut order: Vec<String> = Vec::new();
    let mut attrs_by_name: std::collections::HashMap<String, (Vec<(String, String)>, usize)> =
        Default::default();
    let mut register = |name: &str, attrs: Vec<(String, String)>, line: usize,
                        order: &mut Vec<String>| {
        match attrs_by_name.get_mut(name) {
            Some((existing, _)) => existing.extend(attrs),
            None => {
                order.push(name.to_string());
                attrs_by_name.insert(name.to_string(), (attrs, line));
            }
        }
    };
    for stmt in &stmts {
        match stmt {
            Stmt::Node { name, attrs, line } => register(name, attrs.clone(), *line, &mut order),
            Stmt::Chain { names, line, .. } => {
                for n in names {
                    register(n, Vec::new(), *line, &mut order);
                }
            }
            Stmt::Defaults(target, attrs) => g.defaults.push((*target, attrs.clone())),
        }
    }
    for name in &order {
        let (attrs, line) = attrs_by_name.remove(name).unwrap();
        let pos_attr = attrs.iter().rev().find(|(k, _)| k == "pos");
        let pos = match pos_attr {
            Some((_, v)) => parse_node_pos(v, name, line)?,
            None => return Err(GraphError::MissingPosition(name.clone()).into()),
        };
        g.add_node(name, pos, attrs)?;
    }

    // second pass: edges in statement order
    for stmt in &stmts {
        if let Stmt::Chain { names, attrs, line } = stmt {
            for pair in names.windows(2) {
                let spline = match attrs.iter().rev().find(|(k, _)| k == "pos") {
                    Some((_, v)) => parse_edge_spline(v, spline_tol, *line)?,
                    None => None,
                };
                g.add_edge(&pair[0], &pair[1], spline, attrs.clone())?;
            }
        }
    }
    Ok(g)
}

/// True if `s` can be written without quotes: an alphabetic identifier or a
/// plain numeral.
fn is_bare_id(s: &str) -> bool {
    let alpha = |c: char| c.is_ascii_alphabetic() || c == '_' || !c.is_ascii();
    let mut chars = s.chars();
    match chars.next() {
        None => false,
        Some(c) if alpha(c) => s.chars().all(|c| alpha(c) || c.is_ascii_digit()),
        _ => {
            let body = s.strip_prefix('-').unwrap_or(s);
            !body.is_empty()
                && body.chars().all(|c| c.is_ascii_digit() || c == '.')
                && body.chars().filter(|&c| c == '.').count() <= 1
                && body != "."
        }
    }
}

pub(crate) fn write_id(out: &mut String, s: &str) {
    if is_bare_id(s) {
        out.push_str(s);
    } else {
        // values hold their escape sequences verbatim, so only wrap
        out.push('"');
        out.push_str(s);
        out.push('"');
    }
}

fn write_attrs(out: &mut String, attrs: &[(String, String)]) {
    if attrs.is_empty() {
        return;
    }
    out.push_str(" [");
    for (i, (k, v)) in attrs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_id(out, k);
        out.push('=');
        write_id(out, v);
    }
    out.push(']');
}

/// Serializes the layout with one `color` attribute per edge (replacing any
/// existing one). `edge_colors` is indexed like [`LayoutGraph::edges`];
/// defaults, node attributes, and edge splines pass through untouched.
pub fn emit_colored_dot(g: &LayoutGraph, edge_colors: &[String]) -> String {
    assert_eq!(
        edge_colors.len(),
        g.edges().len(),
        "one color per edge required"
    );
    let mut out = String::new();
    if g.strict {
        out.push_str("strict ");
    }
    out.push_str(if g.directed { "digraph" } else { "graph" });
    if let Some(name) = &g.name {
        out.push(' ');
        write_id(&mut out, name);
    }
    out.push_str(" {\n");
    for (target, attrs) in &g.defaults {
        let word = match target {
            DefaultTarget::Graph => "graph",
            DefaultTarget::Node => "node",
            DefaultTarget::Edge => "edge",
        };
        out.push_str("  ");
        out.push_str(word);
        write_attrs(&mut out, attrs);
        out.push_str(";\n");
    }
    for node in g.nodes() {
        out.push_str("  ");
        write_id(&mut out, &node.name);
        write_attrs(&mut out, &node.attrs);
        out.push_str(";\n");
    }
    let op = if g.directed { " -> " } else { " -- " };
    for (edge, color) in g.edges().iter().zip(edge_colors) {
        out.push_str("  ");
        write_id(&mut out, &g.node(edge.tail).name);
        out.push_str(op);
        write_id(&mut out, &g.node(edge.head).name);
        let mut attrs: Vec<(String, String)> = edge
            .attrs
            .iter()
            .filter(|(k, _)| k != "color")
            .cloned()
            .collect();
        attrs.push(("color".to_string(), color.clone()));
        write_attrs(&mut out, &attrs);
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 0.25;

    fn colors(n: usize) -> Vec<String> {
        (0..n).map(|_| "#b30000".to_string()).collect()
    }

    #[test]
    fn parses_a_minimal_layout() {
        let g = parse_layout(
            "graph test {\n  a [pos=\"0,0\"];\n  b [pos=\"3,4\"];\n  a -- b;\n}\n",
            TOL,
        )
        .unwrap();
        assert_eq!(g.name.as_deref(), Some("test"));
        assert!(!g.directed);
        assert_eq!(g.nodes().len(), 2);
        assert_eq!(g.edges().len(), 1);
        assert!((g.edge(0).length - 5.0).abs() < 1e-12);
    }

    #[test]
    fn parses_comments_and_separators() {
        let g = parse_layout(
            "# preprocessor style\ngraph {\n  // slash comment\n  /* block\n     comment */\n  a [pos=\"0,0\"]\n  b [pos=\"1,0\"]\n  a -- b\n}",
            TOL,
        )
        .unwrap();
        assert_eq!(g.nodes().len(), 2);
        assert_eq!(g.edges().len(), 1);
    }

    #[test]
    fn directed_graphs_use_arrow_operator() {
        let g = parse_layout(
            "digraph d { a [pos=\"0,0\"]; b [pos=\"1,1\"]; a -> b; }",
            TOL,
        )
        .unwrap();
        assert!(g.directed);
        let err = parse_layout(
            "digraph d { a [pos=\"0,0\"]; b [pos=\"1,1\"]; a -- b; }",
            TOL,
        )
        .unwrap_err();
        assert!(err.to_string().contains("does not match"));
    }

    #[test]
    fn chains_expand_to_edges_sharing_attrs() {
        let g = parse_layout(
            "graph { a [pos=\"0,0\"]; b [pos=\"1,0\"]; c [pos=\"2,0\"]; a -- b -- c [weight=2]; }",
            TOL,
        )
        .unwrap();
        assert_eq!(g.edges().len(), 2);
        for e in g.edges() {
            assert_eq!(e.attrs, vec![("weight".to_string(), "2".to_string())]);
        }
    }

    #[test]
    fn merges_repeated_node_statements() {
        let g = parse_layout(
            "graph { a [shape=box]; a [pos=\"5,6\"]; b [pos=\"0,0\"]; a -- b; }",
            TOL,
        )
        .unwrap();
        let a = g.node(g.node_id("a").unwrap());
        assert_eq!(a.pos, Point2::new(5.0, 6.0));
        assert_eq!(a.attr("shape"), Some("box"));
    }

    #[test]
    fn missing_position_names_the_node() {
        let err = parse_layout("graph { a [pos=\"0,0\"]; a -- ghost; }", TOL).unwrap_err();
        assert!(err.to_string().contains("ghost"), "got: {err}");
        let err = parse_layout("graph { lonely; }", TOL).unwrap_err();
        assert!(err.to_string().contains("lonely"), "got: {err}");
    }

    #[test]
    fn pinned_positions_parse() {
        let g = parse_layout("graph { a [pos=\"1.5,-2.5!\"]; }", TOL).unwrap();
        assert_eq!(g.node(0).pos, Point2::new(1.5, -2.5));
    }

    #[test]
    fn bad_position_is_an_error() {
        let err = parse_layout("graph { a [pos=\"1,2,3\"]; }", TOL).unwrap_err();
        assert!(err.to_string().contains('a'), "got: {err}");
    }

    #[test]
    fn splines_flatten_with_endpoint_markers() {
        let g = parse_layout(
            "graph { a [pos=\"0,0\"]; b [pos=\"100,0\"]; a -- b [pos=\"e,105,0 s,-5,0 0,0 33,30 66,30 100,0\"]; }",
            TOL,
        )
        .unwrap();
        let pts = g.edge(0).geometry.points();
        assert_eq!(pts[0], Point2::new(-5.0, 0.0));
        assert_eq!(*pts.last().unwrap(), Point2::new(105.0, 0.0));
        // the curve bulges upward, so flattening yields interior points
        assert!(pts.len() > 4);
        assert!(pts.iter().any(|p| p.y > 10.0));
    }

    #[test]
    fn spline_reversed_relative_to_edge_is_reoriented() {
        let g = parse_layout(
            "graph { a [pos=\"0,0\"]; b [pos=\"90,0\"]; a -- b [pos=\"90,0 60,10 30,10 0,0\"]; }",
            TOL,
        )
        .unwrap();
        assert_eq!(g.edge(0).geometry.first(), Point2::new(0.0, 0.0));
        assert_eq!(g.edge(0).geometry.last(), Point2::new(90.0, 0.0));
    }

    #[test]
    fn malformed_spline_reports_line() {
        let err = parse_layout(
            "graph {\n a [pos=\"0,0\"];\n b [pos=\"9,0\"];\n a -- b [pos=\"0,0 1,1 9,0\"];\n}",
            TOL,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 4:"), "got: {msg}");
    }

    #[test]
    fn unsupported_constructs_are_rejected() {
        for (src, needle) in [
            ("graph { subgraph s { } }", "subgraph"),
            ("graph { a [label=<b>]; }", "HTML"),
            ("graph { a:n -- b; }", "port"),
            ("graph g", "'{'"),
        ] {
            let err = parse_layout(src, TOL).unwrap_err();
            assert!(err.to_string().contains(needle), "{src} -> {err}");
        }
    }

    #[test]
    fn string_escapes_survive_a_round_trip() {
        let src = "graph { a [pos=\"0,0\", label=\"say \\\"hi\\\"\"]; b [pos=\"1,1\"]; a -- b; }";
        let g = parse_layout(src, TOL).unwrap();
        assert_eq!(g.node(0).attr("label"), Some("say \\\"hi\\\""));
        let emitted = emit_colored_dot(&g, &colors(1));
        let again = parse_layout(&emitted, TOL).unwrap();
        assert_eq!(again.node(0).attr("label"), Some("say \\\"hi\\\""));
    }

    #[test]
    fn backslash_newline_joins_lines() {
        let g = parse_layout("graph { a [pos=\"0,0\", label=\"one\\\ntwo\"]; }", TOL).unwrap();
        assert_eq!(g.node(0).attr("label"), Some("onetwo"));
    }

    #[test]
    fn emit_replaces_existing_color_and_adds_new() {
        let g = parse_layout(
            "graph { a [pos=\"0,0\"]; b [pos=\"1,1\"]; a -- b [color=red, weight=3]; }",
            TOL,
        )
        .unwrap();
        let out = emit_colored_dot(&g, &colors(1));
        assert!(out.contains("color=\"#b30000\""), "got: {out}");
        assert!(!out.contains("red"), "got: {out}");
        assert!(out.contains("weight=3"), "got: {out}");
    }

    #[test]
    fn emit_preserves_header_defaults_and_quoting() {
        let src = "strict digraph \"my graph\" { graph [bb=\"0,0,10,10\"]; node [shape=point]; a [pos=\"0,0\"]; b [pos=\"1,1\"]; a -> b; }";
        let g = parse_layout(src, TOL).unwrap();
        let out = emit_colored_dot(&g, &colors(1));
        assert!(out.starts_with("strict digraph \"my graph\" {"), "got: {out}");
        assert!(out.contains("graph [bb=\"0,0,10,10\"];"), "got: {out}");
        assert!(out.contains("node [shape=point];"), "got: {out}");
        assert!(out.contains("a -> b"), "got: {out}");
    }

    #[test]
    fn emission_is_a_fixed_point() {
        let src = "graph k {\n  a [pos=\"0,0\"];\n  b [pos=\"10,0\"];\n  c [pos=\"5,8.5\"];\n  a -- b;\n  b -- c [pos=\"10,0 8,4 7,6 5,8.5\"];\n  a -- c;\n}\n";
        let g1 = parse_layout(src, TOL).unwrap();
        let out1 = emit_colored_dot(&g1, &colors(3));
        let g2 = parse_layout(&out1, TOL).unwrap();
        let out2 = emit_colored_dot(&g2, &colors(3));
        assert_eq!(out1, out2);
    }

    #[test]
    fn top_level_assignment_becomes_graph_default() {
        let g = parse_layout("graph { margin=0.5; a [pos=\"0,0\"]; }", TOL).unwrap();
        assert_eq!(
            g.defaults,
            vec![(
                DefaultTarget::Graph,
                vec![("margin".to_string(), "0.5".to_string())]
            )]
        );
    }

    #[test]
    fn numerals_and_quoted_names_are_ids() {
        let g = parse_layout(
            "graph { 1 [pos=\"0,0\"]; \"two words\" [pos=\"1,0\"]; -2.5 [pos=\"2,0\"]; 1 -- \"two words\"; }",
            TOL,
        )
        .unwrap();
        assert_eq!(g.nodes().len(), 3);
        let out = emit_colored_dot(&g, &colors(1));
        assert!(out.contains("\"two words\""));
        assert!(out.contains("  -2.5;") || out.contains("-2.5 ["), "got: {out}");
    }
}
