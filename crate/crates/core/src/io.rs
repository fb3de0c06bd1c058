//! Plain-text file formats. Vertex ids in files are 1-based; the in-memory
//! types are 0-based.
//!
//! * simple graph: `n m`, then `m` lines `u v` with `1 <= u < v <= n`;
//! * bipartite graph: `n1 n2 m`, then `m` lines `u v`, `u` a row, `v` a column;
//! * directed graph: `n m`, then `m` lines `u v`, where `u == v` is a loop;
//! * step graphon: `m`, a line of `m` measures, `m` rows of `m` entries;
//! * bipartite kernel: `m1 m2`, a row-measure line, a column-measure line,
//!   `m1` rows of `m2` entries;
//! * quintuple: `m`, a measure line, then blocks headed `W00`, `W01`, `W10`,
//!   `W11` with `m` rows each, then a line of `m` loop flags in `{0, 1}`;
//! * source spec: lines `<weight> const <p>` or `<weight> file <path>`;
//! * pairs: lines `<pattern> ; <pattern>`, a pattern being whitespace
//!   separated `u-v` edges or bare vertices `u`.
//!
//! Numbers may be decimals (`0.25`, `1e-3`) or fractions (`1/3`). Blank lines
//! are skipped; in source and pairs files so are lines starting with `#`.

use std::fs;
use std::path::Path;

use crate::bipartite::{BipartiteGraph, BipartiteKernel};
use crate::directed::{validate_quintuple, DirectedGraph, DirectedKernelQuintuple, KernelVerdict};
use crate::error::{input, Error, Result};
use crate::exchangeable::{EdgePattern, GraphSource};
use crate::graph::LabelledGraph;
use crate::graphon::StepGraphon;
use crate::rational::{self, format_exact, Rational};

struct Lines<'a> {
    name: &'a str,
    iter: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
}

impl<'a> Lines<'a> {
    fn new(name: &'a str, text: &'a str) -> Self {
        let iter = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        Lines { name, iter: Box::new(iter) }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.iter.next() {
            Some((no, l)) => Ok((no, l.split_whitespace().collect())),
            None => input(format!("{}: unexpected end of file, expected {what}", self.name)),
        }
    }

    fn finish(mut self) -> Result<()> {
        match self.iter.next() {
            Some((no, _)) => input(format!("{}:{no}: trailing content", self.name)),
            None => Ok(()),
        }
    }

    fn err<T>(&self, line: usize, msg: impl std::fmt::Display) -> Result<T> {
        input(format!("{}:{line}: {msg}", self.name))
    }

    fn usizes(&mut self, what: &str, count: usize) -> Result<(usize, Vec<usize>)> {
        let (no, toks) = self.next(what)?;
        if toks.len() != count {
            return self.err(no, format!("expected {count} integers for {what}, found {}", toks.len()));
        }
        let vals = toks
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| Error::Input(format!("{}:{no}: not a nonnegative integer: {t}", self.name))))
            .collect::<Result<_>>()?;
        Ok((no, vals))
    }

    fn rationals(&mut self, what: &str, count: usize) -> Result<Vec<Rational>> {
        let (no, toks) = self.next(what)?;
        if toks.len() != count {
            return self.err(no, format!("expected {count} numbers for {what}, found {}", toks.len()));
        }
        toks.iter()
            .map(|t| rational::parse(t).ok_or_else(|| Error::Input(format!("{}:{no}: not a number: {t}", self.name))))
            .collect()
    }

    fn matrix(&mut self, what: &str, rows: usize, cols: usize) -> Result<Vec<Vec<Rational>>> {
        (0..rows).map(|_| self.rationals(what, cols)).collect()
    }
}

fn one_based(lines: &Lines<'_>, no: usize, v: usize, n: usize) -> Result<usize> {
    if v == 0 || v > n {
        return lines.err(no, format!("vertex {v} outside 1..={n}"));
    }
    Ok(v - 1)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn parse_graph(name: &str, text: &str) -> Result<LabelledGraph> {
    let mut lines = Lines::new(name, text);
    let (no, h) = lines.usizes("header `n m`", 2)?;
    let (n, m) = (h[0], h[1]);
    if n == 0 {
        return lines.err(no, "a graph needs at least one vertex");
    }
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (no, e) = lines.usizes("edge `u v`", 2)?;
        let (u, v) = (one_based(&lines, no, e[0], n)?, one_based(&lines, no, e[1], n)?);
        if u == v {
            return lines.err(no, format!("self edge at {}", e[0]));
        }
        if u > v {
            return lines.err(no, "edges must be written with u < v");
        }
        edges.push((u, v));
    }
    lines.finish()?;
    LabelledGraph::from_edges(n, &edges).map_err(|e| Error::Input(format!("{name}: {e}")))
}

pub fn format_graph(g: &LabelledGraph) -> String {
    let edges = g.edges();
    let mut s = format!("{} {}\n", g.n(), edges.len());
    for (u, v) in edges {
        s += &format!("{} {}\n", u + 1, v + 1);
    }
    s
}

pub fn read_graph(path: &Path) -> Result<LabelledGraph> {
    parse_graph(&path.display().to_string(), &read(path)?)
}

pub fn write_graph(path: &Path, g: &LabelledGraph) -> Result<()> {
    write(path, &format_graph(g))
}

pub fn parse_bipartite_graph(name: &str, text: &str) -> Result<BipartiteGraph> {
    let mut lines = Lines::new(name, text);
    let (no, h) = lines.usizes("header `n1 n2 m`", 3)?;
    if h[0] == 0 || h[1] == 0 {
        return lines.err(no, "both sides need at least one vertex");
    }
    let mut edges = Vec::with_capacity(h[2]);
    for _ in 0..h[2] {
        let (no, e) = lines.usizes("edge `u v`", 2)?;
        edges.push((one_based(&lines, no, e[0], h[0])?, one_based(&lines, no, e[1], h[1])?));
    }
    lines.finish()?;
    BipartiteGraph::from_edges(h[0], h[1], &edges).map_err(|e| Error::Input(format!("{name}: {e}")))
}

pub fn format_bipartite_graph(g: &BipartiteGraph) -> String {
    let edges = g.edges();
    let mut s = format!("{} {} {}\n", g.n1(), g.n2(), edges.len());
    for (u, v) in edges {
        s += &format!("{} {}\n", u + 1, v + 1);
    }
    s
}

pub fn read_bipartite_graph(path: &Path) -> Result<BipartiteGraph> {
    parse_bipartite_graph(&path.display().to_string(), &read(path)?)
}

pub fn parse_directed_graph(name: &str, text: &str) -> Result<DirectedGraph> {
    let mut lines = Lines::new(name, text);
    let (no, h) = lines.usizes("header `n m`", 2)?;
    if h[0] == 0 {
        return lines.err(no, "a graph needs at least one vertex");
    }
    let mut arcs = Vec::with_capacity(h[1]);
    for _ in 0..h[1] {
        let (no, e) = lines.usizes("arc `u v`", 2)?;
        arcs.push((one_based(&lines, no, e[0], h[0])?, one_based(&lines, no, e[1], h[0])?));
    }
    lines.finish()?;
    DirectedGraph::from_edges(h[0], &arcs).map_err(|e| Error::Input(format!("{name}: {e}")))
}

pub fn format_directed_graph(g: &DirectedGraph) -> String {
    let arcs = g.edges();
    let mut s = format!("{} {}\n", g.n(), arcs.len());
    for (u, v) in arcs {
        s += &format!("{} {}\n", u + 1, v + 1);
    }
    s
}

pub fn read_directed_graph(path: &Path) -> Result<DirectedGraph> {
    parse_directed_graph(&path.display().to_string(), &read(path)?)
}

fn join(row: &[Rational]) -> String {
    row.iter().map(format_exact).collect::<Vec<_>>().join(" ")
}

/// Symmetry and range are checked on load.
pub fn parse_step_graphon(name: &str, text: &str) -> Result<StepGraphon> {
    let mut lines = Lines::new(name, text);
    let (no, h) = lines.usizes("block count `m`", 1)?;
    let m = h[0];
    if m == 0 {
        return lines.err(no, "at least one block is required");
    }
    let mu = lines.rationals("measures", m)?;
    let w = lines.matrix("kernel row", m, m)?;
    lines.finish()?;
    StepGraphon::new(mu, w).map_err(|e| Error::Input(format!("{name}: {e}")))
}

pub fn format_step_graphon(w: &StepGraphon) -> String {
    let mut s = format!("{}\n{}\n", w.m(), join(w.measures()));
    for row in w.entries() {
        s += &join(row);
        s.push('\n');
    }
    s
}

pub fn read_step_graphon(path: &Path) -> Result<StepGraphon> {
    parse_step_graphon(&path.display().to_string(), &read(path)?)
}

pub fn parse_bipartite_kernel(name: &str, text: &str) -> Result<BipartiteKernel> {
    let mut lines = Lines::new(name, text);
    let (no, h) = lines.usizes("block counts `m1 m2`", 2)?;
    if h[0] == 0 || h[1] == 0 {
        return lines.err(no, "at least one block per side is required");
    }
    let mu1 = lines.rationals("row measures", h[0])?;
    let mu2 = lines.rationals("column measures", h[1])?;
    let w = lines.matrix("kernel row", h[0], h[1])?;
    lines.finish()?;
    BipartiteKernel::new(mu1, mu2, w).map_err(|e| Error::Input(format!("{name}: {e}")))
}

pub fn format_bipartite_kernel(w: &BipartiteKernel) -> String {
    let mut s = format!("{} {}\n{}\n{}\n", w.m1(), w.m2(), join(w.row_measures()), join(w.col_measures()));
    for row in w.entries() {
        s += &join(row);
        s.push('\n');
    }
    s
}

pub fn read_bipartite_kernel(path: &Path) -> Result<BipartiteKernel> {
    parse_bipartite_kernel(&path.display().to_string(), &read(path)?)
}

const BLOCK_LABELS: [&str; 4] = ["W00", "W01", "W10", "W11"];

/// Rejects kernels that fail [`validate_quintuple`].
pub fn parse_quintuple(name: &str, text: &str) -> Result<DirectedKernelQuintuple> {
    let mut lines = Lines::new(name, text);
    let (no, h) = lines.usizes("block count `m`", 1)?;
    let m = h[0];
    if m == 0 {
        return lines.err(no, "at least one block is required");
    }
    let mu = lines.rationals("measures", m)?;
    let mut blocks: [Vec<Vec<Rational>>; 4] = Default::default();
    for (label, block) in BLOCK_LABELS.iter().zip(blocks.iter_mut()) {
        let (no, toks) = lines.next(label)?;
        if toks != [*label] {
            return lines.err(no, format!("expected block label {label}"));
        }
        *block = lines.matrix(label, m, m)?;
    }
    let (no, flags) = lines.usizes("loop vector", m)?;
    if flags.iter().any(|&f| f > 1) {
        return lines.err(no, "loop flags must be 0 or 1");
    }
    lines.finish()?;
    let k = DirectedKernelQuintuple::new(mu, blocks, flags.iter().map(|&f| f == 1).collect())
        .map_err(|e| Error::Input(format!("{name}: {e}")))?;
    match validate_quintuple(&k) {
        KernelVerdict::Valid => Ok(k),
        KernelVerdict::Invalid(v) => input(format!("{name}: invalid kernel: {v}")),
    }
}

pub fn format_quintuple(k: &DirectedKernelQuintuple) -> String {
    let mut s = format!("{}\n{}\n", k.m(), join(k.measures()));
    for (label, block) in BLOCK_LABELS.iter().zip(k.blocks()) {
        s += label;
        s.push('\n');
        for row in block {
            s += &join(row);
            s.push('\n');
        }
    }
    s += &k.loops().iter().map(|&l| if l { "1" } else { "0" }).collect::<Vec<_>>().join(" ");
    s.push('\n');
    s
}

pub fn read_quintuple(path: &Path) -> Result<DirectedKernelQuintuple> {
    parse_quintuple(&path.display().to_string(), &read(path)?)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Reads a source spec; `file` paths are relative to the spec's directory.
/// One component gives a plain W-random source, several give a mixture.
pub fn read_source(path: &Path) -> Result<GraphSource> {
    let text = read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let name = path.display().to_string();
    let mut parts = Vec::new();
    for (no, line) in content_lines(&text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| Error::Input(format!("{name}:{no}: {msg}"));
        if toks.len() != 3 {
            return Err(bad("expected `<weight> const <p>` or `<weight> file <path>`"));
        }
        let weight: f64 = toks[0].parse().map_err(|_| bad("weight is not a number"))?;
        let w = match toks[1] {
            "const" => {
                let p = rational::parse(toks[2]).ok_or_else(|| bad("p is not a number"))?;
                StepGraphon::constant(p).map_err(|e| bad(&e.to_string()))?
            }
            "file" => read_step_graphon(&base.join(toks[2]))?,
            other => return Err(bad(&format!("unknown component kind `{other}`"))),
        };
        parts.push((weight, w));
    }
    match parts.len() {
        0 => input(format!("{name}: no components")),
        1 if parts[0].0 == 1.0 => Ok(GraphSource::WRandom(parts.pop().expect("one part").1)),
        _ => GraphSource::mixture(parts),
    }
}

fn parse_pattern(tok_line: &str, name: &str, no: usize) -> Result<EdgePattern<usize>> {
    let bad = |msg: String| Error::Input(format!("{name}:{no}: {msg}"));
    let vertex = |t: &str| -> Result<usize> {
        match t.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(bad(format!("bad vertex `{t}`"))),
        }
    };
    let mut verts = Vec::new();
    let mut edges = Vec::new();
    for tok in tok_line.split_whitespace() {
        match tok.split_once('-') {
            Some((a, b)) => edges.push((vertex(a)?, vertex(b)?)),
            None => verts.push(vertex(tok)?),
        }
    }
    if verts.is_empty() && edges.is_empty() {
        return Err(bad("empty pattern".into()));
    }
    Ok(EdgePattern::new(verts, edges))
}

/// Pattern pairs, one per line: `1-2 ; 3-4`.
pub fn parse_pairs(name: &str, text: &str) -> Result<Vec<(EdgePattern<usize>, EdgePattern<usize>)>> {
    let mut out = Vec::new();
    for (no, line) in content_lines(text) {
        let Some((a, b)) = line.split_once(';') else {
            return input(format!("{name}:{no}: expected `<pattern> ; <pattern>`"));
        };
        out.push((parse_pattern(a, name, no)?, parse_pattern(b, name, no)?));
    }
    if out.is_empty() {
        return input(format!("{name}: no pattern pairs"));
    }
    Ok(out)
}

pub fn read_pairs(path: &Path) -> Result<Vec<(EdgePattern<usize>, EdgePattern<usize>)>> {
    parse_pairs(&path.display().to_string(), &read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directed::tournament_kernel;
    use crate::rational::frac;

    #[test]
    fn graph_round_trip() {
        let text = "4 3\n1 2\n1 4\n3 4\n";
        let g = parse_graph("g", text).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 3), (2, 3)]);
        assert_eq!(format_graph(&g), text);
        for bad in ["3 1\n1 1\n", "3 2\n1 2\n1 2\n", "3 1\n1 4\n", "3 1\n2 1\n", "3 2\n1 2\n", "3 1\n1 2\n2 3\n"] {
            assert!(matches!(parse_graph("g", bad), Err(Error::Input(_))), "{bad:?}");
        }
    }

    #[test]
    fn graphon_round_trip() {
        let text = "2\n0.5 0.5\n0.2 0.4\n0.4 1/3\n";
        let w = parse_step_graphon("w", text).unwrap();
        assert_eq!(w.entry(1, 1), &frac(1, 3));
        assert_eq!(parse_step_graphon("w", &format_step_graphon(&w)).unwrap(), w);
        assert!(parse_step_graphon("w", "2\n0.5 0.5\n0.2 0.4\n0.5 0.1\n").is_err());
        assert!(parse_step_graphon("w", "1\n1\n1.5\n").is_err());
    }

    #[test]
    fn bipartite_and_directed_round_trip() {
        let b = parse_bipartite_graph("b", "2 3 2\n1 3\n2 1\n").unwrap();
        assert!(b.has_edge(0, 2) && b.has_edge(1, 0));
        assert_eq!(parse_bipartite_graph("b", &format_bipartite_graph(&b)).unwrap(), b);
        let d = parse_directed_graph("d", "2 3\n1 1\n1 2\n2 1\n").unwrap();
        assert!(d.has_loop(0) && !d.has_loop(1));
        assert_eq!(parse_directed_graph("d", &format_directed_graph(&d)).unwrap(), d);
        let k = parse_bipartite_kernel("k", "1 2\n1\n0.5 0.5\n0.2 0.9\n").unwrap();
        assert_eq!(parse_bipartite_kernel("k", &format_bipartite_kernel(&k)).unwrap(), k);
    }

    #[test]
    fn quintuple_round_trip() {
        let t = tournament_kernel();
        let text = format_quintuple(&t);
        assert_eq!(text, "1\n1\nW00\n0\nW01\n0.5\nW10\n0.5\nW11\n0\n0\n");
        assert_eq!(parse_quintuple("q", &text).unwrap(), t);
        let skew = "1\n1\nW00\n0\nW01\n1\nW10\n0\nW11\n0\n0\n";
        assert!(parse_quintuple("q", skew).is_err());
    }

    #[test]
    fn pairs_format() {
        let pairs = parse_pairs("p", "# disjoint edges\n1-2 ; 3-4\n1 ; 2-3 4\n").unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].1.edges(), &[(2, 3)]);
        assert_eq!(pairs[1].0.vertices().len(), 1);
        assert_eq!(pairs[1].1.vertices().len(), 3);
        assert!(parse_pairs("p", "1-2 3-4\n").is_err());
    }
}
