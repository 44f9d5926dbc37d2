//! Shared helpers for integration tests: random instance generators and
//! oracles that do not go through the library's eigensolver path.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roundness_core::{FiniteMetricSpace, Graph, Kernel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shortest-path metric of a random connected weighted graph (Floyd–Warshall).
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    let inf = f64::INFINITY;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0.0;
    }
    let connect = |d: &mut Vec<Vec<f64>>, i: usize, j: usize, w: f64| {
        d[i][j] = d[i][j].min(w);
        d[j][i] = d[i][j];
    };
    let integral = rng.gen_bool(0.5);
    let weight = |rng: &mut ChaCha8Rng| {
        if integral {
            rng.gen_range(1..5) as f64
        } else {
            rng.gen_range(0.2..3.0)
        }
    };
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let w = weight(rng);
        connect(&mut d, i, j, w);
    }
    let extra = rng.gen_range(0.0..0.6);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(extra) {
                let w = weight(rng);
                connect(&mut d, i, j, w);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    FiniteMetricSpace::new(vec![], d).expect("shortest-path metric")
}

/// Random symmetric matrix with zero diagonal and entries in `[lo, hi)`.
pub fn random_kernel(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Kernel {
    let mut psi = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(lo..hi);
            psi[i][j] = v;
            psi[j][i] = v;
        }
    }
    Kernel::new(psi).unwrap()
}

/// `d^p` on random points in the unit cube of `ℝ^dim` (Euclidean norm).
pub fn euclidean_power_kernel(rng: &mut ChaCha8Rng, n: usize, dim: usize, p: f64) -> Kernel {
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
    let psi = pts
        .iter()
        .map(|x| {
            pts.iter()
                .map(|y| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt().powf(p))
                .collect()
        })
        .collect();
    Kernel::new(psi).unwrap()
}

fn project_unit(v: &mut [f64]) -> bool {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

/// Brute-force estimate of `max λᵀΨλ` over unit `λ` with `Σλ = 0`: random
/// projected Gaussian directions, then projected gradient ascent from the
/// best few samples.
pub fn brute_force_extremal(kernel: &Kernel, samples: usize, seed: u64) -> f64 {
    let n = kernel.len();
    if n < 2 {
        return 0.0;
    }
    let mut rng = rng(seed);
    let normal = rand_distr::StandardNormal;
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..samples {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(normal)).collect();
        if !project_unit(&mut v) {
            continue;
        }
        let q = kernel.quadratic_form(&v);
        if best.len() < 5 || q > best[best.len() - 1].0 {
            best.push((q, v));
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
            best.truncate(5);
        }
    }
    let step = 1.0 / kernel.inf_norm().max(1e-300);
    let mut top = f64::NEG_INFINITY;
    for (q0, mut v) in best {
        top = top.max(q0);
        for _ in 0..3000 {
            let grad: Vec<f64> =
                (0..n).map(|i| (0..n).map(|j| kernel.get(i, j) * v[j]).sum::<f64>()).collect();
            let mut next: Vec<f64> = v.iter().zip(&grad).map(|(x, g)| x + step * g).collect();
            if !project_unit(&mut next) {
                break;
            }
            v = next;
        }
        top = top.max(kernel.quadratic_form(&v));
    }
    top
}

/// Random tree on `n` vertices (attach each vertex to an earlier one).
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (rng.gen_range(0..i), i)).collect()
}

/// Cartesian product of graphs given as `(vertex count, edges)`; products of
/// trees are median graphs.
pub fn product(factors: &[(usize, Vec<(usize, usize)>)]) -> Graph {
    let total: usize = factors.iter().map(|f| f.0).product();
    let mut strides = vec![1usize; factors.len()];
    for k in (0..factors.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * factors[k + 1].0;
    }
    let mut edges = Vec::new();
    for v in 0..total {
        for (k, (size, fe)) in factors.iter().enumerate() {
            let coord = (v / strides[k]) % size;
            for &(a, b) in fe {
                if a == coord {
                    edges.push((v, v - a * strides[k] + b * strides[k]));
                }
            }
        }
    }
    let labels = (0..total).map(|i| i.to_string()).collect();
    Graph::new(labels, &edges).unwrap()
}

pub fn random_median_graph(rng: &mut ChaCha8Rng) -> Graph {
    let k = rng.gen_range(1..=3);
    let factors: Vec<_> = (0..k)
        .map(|_| {
            let n = rng.gen_range(2..=6);
            (n, random_tree(rng, n))
        })
        .collect();
    product(&factors)
}
