//! Example spaces: word-metric balls in `ℤⁿ` and free groups, hypercubes,
//! grids, cycles, paths, sampled `Lᵖ` subsets, and graphs from edge lists.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::metric::FiniteMetricSpace;

/// Vertex cap for every generator.
pub const MAX_VERTICES: u128 = 100_000;

/// Undirected simple graph with labeled vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, repeated edges and bad indices.
    pub fn new(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Domain(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::Domain(format!("self-loop at vertex {}", labels[u])));
            }
            if adj[u].contains(&v) {
                return Err(Error::Domain(format!(
                    "repeated edge between {} and {}",
                    labels[u], labels[v]
                )));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        adj.iter_mut().for_each(|a| a.sort_unstable());
        Ok(Self { labels, adj })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&v| u < v).map(|&v| (u, v)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Hop distances from `src`; `None` for unreachable vertices.
    pub fn bfs(&self, src: usize) -> Vec<Option<u64>> {
        let mut dist = vec![None; self.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued vertices are reached");
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// All-pairs shortest-path metric; one BFS per source.
    pub fn metric_with(&self, exec: Exec) -> Result<FiniteMetricSpace> {
        let n = self.len();
        let rows = exec.map_range(n, |s| self.bfs(s));
        let mut exact = Vec::with_capacity(n * n);
        for row in &rows {
            for (j, d) in row.iter().enumerate() {
                match d {
                    Some(d) => exact.push(*d),
                    None => {
                        return Err(Error::Disconnected(self.labels[0].clone(), self.labels[j].clone()))
                    }
                }
            }
        }
        Ok(FiniteMetricSpace::from_exact(self.labels.clone(), n, exact))
    }

    pub fn metric(&self) -> Result<FiniteMetricSpace> {
        self.metric_with(Exec::default())
    }
}

fn check_vertex_count(what: &str, count: u128) -> Result<()> {
    if count > MAX_VERTICES {
        return Err(Error::SizeCap { what: what.to_string(), count, cap: MAX_VERTICES });
    }
    Ok(())
}

fn with_metric(graph: Graph) -> Result<(Graph, FiniteMetricSpace)> {
    let space = graph.metric()?;
    Ok((graph, space))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupFamily {
    Zn,
    FreeGroup,
}

/// A word-metric ball in `ℤⁿ` (canonical basis) or in a free group
/// (standard free basis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupBallSpec {
    pub family: GroupFamily,
    pub rank: usize,
    pub radius: usize,
}

impl GroupBallSpec {
    pub fn build(&self) -> Result<(Graph, FiniteMetricSpace)> {
        match self.family {
            GroupFamily::Zn => zn_ball(self.rank, self.radius),
            GroupFamily::FreeGroup => free_group_ball(self.rank, self.radius),
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Lattice points of `ℤ^rank` with `ℓ¹` norm at most `radius`.
pub fn zn_ball_size(rank: usize, radius: usize) -> u128 {
    (0..=rank.min(radius) as u128)
        .map(|k| {
            (1u128 << k.min(127))
                .saturating_mul(binomial(rank as u128, k))
                .saturating_mul(binomial(radius as u128, k))
        })
        .fold(0, u128::saturating_add)
}

fn lattice_label(v: &[i64]) -> String {
    let coords: Vec<String> = v.iter().map(i64::to_string).collect();
    format!("({})", coords.join(","))
}

/// The `ℓ¹` ball of radius `radius` in `ℤ^rank`, with unit-step edges.
pub fn zn_ball(rank: usize, radius: usize) -> Result<(Graph, FiniteMetricSpace)> {
    if rank < 1 || radius < 1 {
        return Err(Error::Domain(format!("zn ball needs rank >= 1 and radius >= 1, got {rank}, {radius}")));
    }
    check_vertex_count("zn ball vertices", zn_ball_size(rank, radius))?;

    let mut points: Vec<Vec<i64>> = Vec::new();
    let mut cur = vec![0i64; rank];
    fn fill(axis: usize, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if axis == cur.len() {
            out.push(cur.clone());
            return;
        }
        for x in -budget..=budget {
            cur[axis] = x;
            fill(axis + 1, budget - x.abs(), cur, out);
        }
        cur[axis] = 0;
    }
    fill(0, radius as i64, &mut cur, &mut points);

    let index: HashMap<&[i64], usize> = points.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let mut edges = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let mut q = p.clone();
        for axis in 0..rank {
            q[axis] += 1;
            if let Some(&j) = index.get(q.as_slice()) {
                edges.push((i, j));
            }
            q[axis] -= 1;
        }
    }
    let labels = points.iter().map(|p| lattice_label(p)).collect();
    with_metric(Graph::new(labels, &edges)?)
}

/// Vertices in the radius-`radius` ball of the `2·rank`-regular tree.
pub fn free_group_ball_size(rank: usize, radius: usize) -> u128 {
    let r = rank as u128;
    let mut total: u128 = 1;
    let mut sphere: u128 = 2 * r;
    for _ in 0..radius {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul(2 * r - 1);
    }
    total
}

/// Ball of the Cayley graph of the free group on `rank` generators, a tree.
///
/// Generators are `a, b, c, …` with inverses `A, B, C, …`; the identity is
/// labeled `e`.
pub fn free_group_ball(rank: usize, radius: usize) -> Result<(Graph, FiniteMetricSpace)> {
    if rank < 2 || radius < 1 {
        return Err(Error::Domain(format!(
            "free group ball needs rank >= 2 and radius >= 1, got {rank}, {radius}"
        )));
    }
    if rank > 26 {
        return Err(Error::Domain(format!("free group rank {rank} exceeds the 26 generator letters")));
    }
    check_vertex_count("free group ball vertices", free_group_ball_size(rank, radius))?;

    // Letter 2g is generator g, 2g+1 its inverse.
    let letter = |l: usize| {
        let base = b'a' + (l / 2) as u8;
        (if l.is_multiple_of(2) { base } else { base.to_ascii_uppercase() }) as char
    };
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &w in &frontier {
            let last = words[w].last().copied();
            for l in 0..2 * rank {
                if last.is_some_and(|prev| prev ^ 1 == l) {
                    continue;
                }
                let mut word = words[w].clone();
                word.push(l);
                words.push(word);
                let id = words.len() - 1;
                edges.push((w, id));
                next.push(id);
            }
        }
        frontier = next;
    }
    let labels = words
        .iter()
        .map(|w| if w.is_empty() { "e".to_string() } else { w.iter().map(|&l| letter(l)).collect() })
        .collect();
    with_metric(Graph::new(labels, &edges)?)
}

/// Skeleton of the unit `n`-cube: `{0,1}ⁿ` with Hamming adjacency.
pub fn hypercube(n: usize) -> Result<(Graph, FiniteMetricSpace)> {
    if !(1..=12).contains(&n) {
        return Err(Error::SizeCap { what: "hypercube dimension".into(), count: n as u128, cap: 12 });
    }
    let count = 1usize << n;
    let labels = (0..count).map(|i| format!("{i:0n$b}")).collect();
    let mut edges = Vec::new();
    for i in 0..count {
        for bit in 0..n {
            let j = i ^ (1 << bit);
            if i < j {
                edges.push((i, j));
            }
        }
    }
    with_metric(Graph::new(labels, &edges)?)
}

/// Box product of paths with the given side lengths (vertex counts).
pub fn grid(dims: &[usize]) -> Result<(Graph, FiniteMetricSpace)> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Domain(format!("grid dimensions must be non-empty and positive, got {dims:?}")));
    }
    let count = dims.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
    check_vertex_count("grid vertices", count)?;
    let count = count as usize;

    let coords = |mut i: usize| {
        let mut c = vec![0usize; dims.len()];
        for (axis, &d) in dims.iter().enumerate().rev() {
            c[axis] = i % d;
            i /= d;
        }
        c
    };
    let mut strides = vec![1usize; dims.len()];
    for axis in (0..dims.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * dims[axis + 1];
    }
    let mut labels = Vec::with_capacity(count);
    let mut edges = Vec::new();
    for i in 0..count {
        let c = coords(i);
        for axis in 0..dims.len() {
            if c[axis] + 1 < dims[axis] {
                edges.push((i, i + strides[axis]));
            }
        }
        let parts: Vec<String> = c.iter().map(usize::to_string).collect();
        labels.push(format!("({})", parts.join(",")));
    }
    with_metric(Graph::new(labels, &edges)?)
}

fn numbered(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

pub fn cycle(n: usize) -> Result<(Graph, FiniteMetricSpace)> {
    if n < 3 {
        return Err(Error::Domain(format!("cycle needs at least 3 vertices, got {n}")));
    }
    check_vertex_count("cycle vertices", n as u128)?;
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    with_metric(Graph::new(numbered(n), &edges)?)
}

pub fn path(n: usize) -> Result<(Graph, FiniteMetricSpace)> {
    if n < 2 {
        return Err(Error::Domain(format!("path needs at least 2 vertices, got {n}")));
    }
    check_vertex_count("path vertices", n as u128)?;
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    with_metric(Graph::new(numbered(n), &edges)?)
}

/// `count` points uniform in `[0,1)^dim` under the `p`-norm metric.
///
/// Points are drawn one after another from a single seeded stream, so the
/// sample for `count` is a prefix of the sample for any larger count.
pub fn lp_sample(dim: usize, count: usize, p: f64, seed: u64) -> Result<FiniteMetricSpace> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [1, 2], got {p}")));
    }
    if count < 2 || dim < 1 {
        return Err(Error::Domain(format!("need count >= 2 and dim >= 1, got {count}, {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..count).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
    let norm = |x: &[f64], y: &[f64]| -> f64 {
        if p == 1.0 {
            x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
        } else if p == 2.0 {
            x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        } else {
            x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(p)).sum::<f64>().powf(1.0 / p)
        }
    };
    let dist = points.iter().map(|x| points.iter().map(|y| norm(x, y)).collect()).collect();
    let labels = (0..count).map(|i| format!("x{i}")).collect();
    FiniteMetricSpace::new(labels, dist)
}

/// Parses an edge list: one `u v` pair of integer ids per line. Blank lines
/// and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Vec<(i64, i64)>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(format!("expected two vertex ids, found {}", fields.len())));
        }
        let parse = |s: &str| s.parse::<i64>().map_err(|e| err(format!("bad vertex id {s:?}: {e}")));
        edges.push((parse(fields[0])?, parse(fields[1])?));
    }
    Ok(edges)
}

/// Graph metric of an edge list. Vertex ids are sorted ascending and become
/// the labels.
pub fn load_graph(edges: &[(i64, i64)]) -> Result<(Graph, FiniteMetricSpace)> {
    if edges.is_empty() {
        return Err(Error::Domain("edge list is empty".into()));
    }
    let mut ids: Vec<i64> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    check_vertex_count("graph vertices", ids.len() as u128)?;
    let index: HashMap<i64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mapped: Vec<(usize, usize)> = edges.iter().map(|(u, v)| (index[u], index[v])).collect();
    let labels = ids.iter().map(i64::to_string).collect();
    with_metric(Graph::new(labels, &mapped)?)
}
