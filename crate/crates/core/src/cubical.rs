//! Hyperplanes of median graphs and the half-space embedding into `l¹`.
//!
//! Hyperplanes are the Djoković–Winkler classes: two edges are related when
//! they are opposite sides of a 4-cycle, and classes are the transitive
//! closure. On a median graph each class cuts the graph into exactly two
//! half-spaces, and the number of classes separating two vertices is their
//! distance. Inputs that fail the half-space check are rejected.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::generators::Graph;
use crate::metric::{restrict, FiniteMetricSpace};

/// Θ-classes of a graph's edges, each with its two half-spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperplaneSet {
    n: usize,
    edges: Vec<(usize, usize)>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    /// `side[h][v]`: whether `v` lies in the half-space of class `h` that
    /// does not contain vertex 0.
    side: Vec<Vec<bool>>,
}

impl HyperplaneSet {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Edges `(u, v)`, `u < v`, indexed by edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge ids of class `h`.
    pub fn class(&self, h: usize) -> &[usize] {
        &self.classes[h]
    }

    pub fn class_of(&self, edge: usize) -> usize {
        self.class_of[edge]
    }

    /// The two half-spaces of class `h`; the first contains vertex 0.
    pub fn halfspaces(&self, h: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.n).partition(|&v| !self.side[h][v])
    }

    pub fn separates(&self, h: usize, v: usize, w: usize) -> bool {
        self.side[h][v] != self.side[h][w]
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            cur = std::mem::replace(&mut self.0[cur], root);
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Partitions the edges into Θ-classes and computes their half-spaces.
pub fn theta_classes(graph: &Graph) -> Result<HyperplaneSet> {
    theta_classes_with(graph, Exec::default())
}

pub fn theta_classes_with(graph: &Graph, exec: Exec) -> Result<HyperplaneSet> {
    let n = graph.len();
    if n == 0 {
        return Err(Error::Domain("graph has no vertices".into()));
    }
    let parity = graph.bfs(0);
    if let Some(j) = parity.iter().position(Option::is_none) {
        return Err(Error::Disconnected(graph.labels()[0].clone(), graph.labels()[j].clone()));
    }
    let edges = graph.edges();
    if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| parity[u].unwrap() % 2 == parity[v].unwrap() % 2) {
        return Err(Error::NotBipartite(u, v));
    }
    let edge_id: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let id = |a: usize, b: usize| edge_id[&(a.min(b), a.max(b))];

    // Opposite edges of every 4-cycle u-v-y-x through edge (u, v).
    let opposite = exec.map_range(edges.len(), |e| {
        let (u, v) = edges[e];
        let mut out = Vec::new();
        for &x in graph.neighbors(u).iter().filter(|&&x| x != v) {
            for &y in graph.neighbors(v).iter().filter(|&&y| y != u) {
                if graph.has_edge(x, y) {
                    out.push(id(x, y));
                }
            }
        }
        out
    });
    let mut uf = UnionFind((0..edges.len()).collect());
    for (e, opp) in opposite.iter().enumerate() {
        for &f in opp {
            uf.union(e, f);
        }
    }

    let mut class_index: HashMap<usize, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![0; edges.len()];
    for e in 0..edges.len() {
        let root = uf.find(e);
        let h = *class_index.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[h].push(e);
        class_of[e] = h;
    }

    let incident: Vec<Vec<(usize, usize)>> =
        (0..n).map(|u| graph.neighbors(u).iter().map(|&v| (v, id(u, v))).collect()).collect();
    let sides = exec.map_range(classes.len(), |h| halfspace_split(&incident, &class_of, &edges, &classes[h], h));
    let side = sides.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(HyperplaneSet { n, edges, class_of, classes, side })
}

/// Labels each vertex by its component once class `h` is removed, checking
/// that there are exactly two and every class edge crosses between them.
fn halfspace_split(
    incident: &[Vec<(usize, usize)>],
    class_of: &[usize],
    edges: &[(usize, usize)],
    members: &[usize],
    h: usize,
) -> Result<Vec<bool>> {
    let n = incident.len();
    let mut component: Vec<Option<usize>> = vec![None; n];
    let mut count = 0;
    for start in 0..n {
        if component[start].is_some() {
            continue;
        }
        component[start] = Some(count);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &(v, e) in &incident[u] {
                if class_of[e] != h && component[v].is_none() {
                    component[v] = Some(count);
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    if count != 2 {
        return Err(Error::NotCubical {
            class: h,
            reason: format!("leaves {count} component(s) when removed, expected 2"),
        });
    }
    if let Some(&e) = members.iter().find(|&&e| component[edges[e].0] == component[edges[e].1]) {
        let (u, v) = edges[e];
        return Err(Error::NotCubical {
            class: h,
            reason: format!("contains edge ({u}, {v}) inside a single half-space"),
        });
    }
    Ok(component.into_iter().map(|c| c == Some(1)).collect())
}

/// Number of classes with `v` and `w` in different half-spaces.
pub fn separation_count(hps: &HyperplaneSet, v: usize, w: usize) -> Result<usize> {
    if v >= hps.n || w >= hps.n {
        return Err(Error::Domain(format!("vertex out of range for {} vertices", hps.n)));
    }
    Ok((0..hps.len()).filter(|&h| hps.separates(h, v, w)).count())
}

/// `v ↦ Σ_{h ∈ H_v} δ_h`, where `H_v` is the set of classes separating the
/// basepoint from `v`. Vectors are stored sparsely as sorted class ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1Embedding {
    pub basepoint: usize,
    pub dimension: usize,
    pub support: Vec<Vec<usize>>,
}

impl L1Embedding {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dense(&self, v: usize) -> Vec<u8> {
        let mut out = vec![0u8; self.dimension];
        for &h in &self.support[v] {
            out[h] = 1;
        }
        out
    }

    /// `‖f(v) − f(w)‖₁`, the size of the symmetric difference of supports.
    pub fn l1_distance(&self, v: usize, w: usize) -> u64 {
        let (a, b) = (&self.support[v], &self.support[w]);
        let (mut i, mut j, mut common) = (0, 0, 0u64);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        (a.len() + b.len()) as u64 - 2 * common
    }
}

pub fn halfspace_embedding(graph: &Graph, hps: &HyperplaneSet, basepoint: usize) -> Result<L1Embedding> {
    if graph.len() != hps.n {
        return Err(Error::Structure(format!(
            "hyperplane set covers {} vertices, graph has {}",
            hps.n,
            graph.len()
        )));
    }
    if basepoint >= hps.n {
        return Err(Error::Domain(format!("basepoint {basepoint} out of range for {} vertices", hps.n)));
    }
    let support = (0..hps.n)
        .map(|v| (0..hps.len()).filter(|&h| hps.separates(h, basepoint, v)).collect())
        .collect();
    Ok(L1Embedding { basepoint, dimension: hps.len(), support })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub passed: bool,
    pub pairs_checked: u64,
    /// `(v, w, embedded ℓ¹ distance, metric distance)` for each mismatch.
    pub failures: Vec<(usize, usize, u64, u64)>,
}

/// Checks `‖f(v) − f(w)‖₁ = d(v, w)` for all pairs, exactly.
pub fn verify_isometry(emb: &L1Embedding, space: &FiniteMetricSpace) -> Result<IsometryReport> {
    verify_isometry_with(emb, space, Exec::default())
}

pub fn verify_isometry_with(emb: &L1Embedding, space: &FiniteMetricSpace, exec: Exec) -> Result<IsometryReport> {
    let n = space.len();
    if emb.len() != n {
        return Err(Error::Structure(format!("embedding has {} vertices, space has {n}", emb.len())));
    }
    if !space.is_integral() {
        return Err(Error::Structure("isometry check needs an integral (graph) metric".into()));
    }
    let per_source = exec.map_range(n, |v| {
        (v + 1..n)
            .filter_map(|w| {
                let embedded = emb.l1_distance(v, w);
                let expected = space.exact(v, w).expect("integral");
                (embedded != expected).then_some((v, w, embedded, expected))
            })
            .collect::<Vec<_>>()
    });
    let failures: Vec<_> = per_source.into_iter().flatten().collect();
    Ok(IsometryReport {
        passed: failures.is_empty(),
        pairs_checked: (n as u64) * (n as u64).saturating_sub(1) / 2,
        failures,
    })
}

/// Pulls a vertex metric back to group elements: `D(g, h) = d(g·v₀, h·v₀)`.
///
/// `orbit` pairs each element label with the vertex it sends the basepoint to.
pub fn orbit_metric(orbit: &[(String, usize)], space: &FiniteMetricSpace) -> Result<FiniteMetricSpace> {
    let mut owner: HashMap<usize, &str> = HashMap::new();
    for (g, v) in orbit {
        if *v >= space.len() {
            return Err(Error::Domain(format!("element {g} maps to vertex {v}, out of range")));
        }
        if let Some(prev) = owner.insert(*v, g) {
            return Err(Error::Domain(format!("elements {prev} and {g} both map to vertex {v}")));
        }
    }
    let vertices: Vec<usize> = orbit.iter().map(|(_, v)| *v).collect();
    restrict(space, &vertices)?.with_labels(orbit.iter().map(|(g, _)| g.clone()).collect())
}
