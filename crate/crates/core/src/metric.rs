//! Finite metric spaces, metric-axiom validation and power kernels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack for the triangle inequality on non-integral inputs.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// Largest integer every `f64` up to which is exactly representable.
const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0;

/// On-disk form of a metric space: `{"labels": [...], "dist": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    #[serde(default)]
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
}

/// `n` labeled points with a symmetric distance matrix.
///
/// Graph metrics (every entry integral) also keep an exact integer copy of the
/// matrix, used wherever comparisons must be exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceFile", into = "SpaceFile")]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    n: usize,
    dist: Vec<f64>,
    exact: Option<Vec<u64>>,
}

impl FiniteMetricSpace {
    /// Builds a space from a row-major matrix, refusing anything that fails
    /// [`validate_metric`].
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let report = validate_metric(&dist)?;
        if !report.valid {
            return Err(Error::InvalidMetric(report));
        }
        Self::new_unchecked(labels, dist)
    }

    /// Builds a space without checking the metric axioms. Shape and label
    /// count are still checked.
    pub fn new_unchecked(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        check_square(&dist)?;
        let labels = if labels.is_empty() {
            (0..n).map(|i| i.to_string()).collect()
        } else {
            labels
        };
        if labels.len() != n {
            return Err(Error::Structure(format!(
                "{} labels for a {n}x{n} matrix",
                labels.len()
            )));
        }
        let flat: Vec<f64> = dist.into_iter().flatten().collect();
        let exact = integral_copy(&flat);
        Ok(Self { labels, n, dist: flat, exact })
    }

    /// Builds a graph metric from an exact integer matrix. The caller
    /// guarantees the axioms (BFS output).
    pub(crate) fn from_exact(labels: Vec<String>, n: usize, exact: Vec<u64>) -> Self {
        debug_assert_eq!(exact.len(), n * n);
        let dist = exact.iter().map(|&d| d as f64).collect();
        Self { labels, n, dist, exact: Some(exact) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Exact distance, when every entry of the matrix is integral.
    pub fn exact(&self, i: usize, j: usize) -> Option<u64> {
        self.exact.as_ref().map(|e| e[i * self.n + j])
    }

    pub fn is_integral(&self) -> bool {
        self.exact.is_some()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// The space with every distance multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {c}")));
        }
        let dist: Vec<f64> = self.dist.iter().map(|d| d * c).collect();
        let exact = integral_copy(&dist);
        Ok(Self { labels: self.labels.clone(), n: self.n, dist, exact })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Structure(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        self.labels = labels;
        Ok(self)
    }
}

impl TryFrom<SpaceFile> for FiniteMetricSpace {
    type Error = Error;

    fn try_from(file: SpaceFile) -> Result<Self> {
        FiniteMetricSpace::new(file.labels, file.dist)
    }
}

impl From<FiniteMetricSpace> for SpaceFile {
    fn from(space: FiniteMetricSpace) -> Self {
        let dist = space.rows();
        SpaceFile { labels: space.labels, dist }
    }
}

fn check_square(dist: &[Vec<f64>]) -> Result<()> {
    let n = dist.len();
    match dist.iter().position(|row| row.len() != n) {
        Some(i) => Err(Error::Structure(format!(
            "row {i} has {} entries, expected {n}",
            dist[i].len()
        ))),
        None => Ok(()),
    }
}

fn integral_copy(flat: &[f64]) -> Option<Vec<u64>> {
    flat.iter()
        .map(|&d| ((0.0..=EXACT_LIMIT).contains(&d) && d.fract() == 0.0).then_some(d as u64))
        .collect()
}

/// A candidate negative-type kernel: symmetric with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    n: usize,
    psi: Vec<f64>,
}

impl Kernel {
    pub fn new(psi: Vec<Vec<f64>>) -> Result<Self> {
        check_square(&psi)?;
        let n = psi.len();
        Self::from_flat(n, psi.into_iter().flatten().collect())
    }

    pub(crate) fn from_flat(n: usize, psi: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(psi.len(), n * n);
        for i in 0..n {
            if psi[i * n + i] != 0.0 {
                return Err(Error::Domain(format!(
                    "kernel diagonal entry ({i},{i}) is {}, expected 0",
                    psi[i * n + i]
                )));
            }
            for j in i + 1..n {
                let (a, b) = (psi[i * n + j], psi[j * n + i]);
                if a != b || !a.is_finite() {
                    return Err(Error::Domain(format!(
                        "kernel not symmetric and finite at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { n, psi })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.psi[i * self.n + j]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.psi
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.psi.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.psi
            .chunks(self.n.max(1))
            .take(self.n)
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `λᵀΨλ`.
    pub fn quadratic_form(&self, lambda: &[f64]) -> f64 {
        assert_eq!(lambda.len(), self.n);
        let mut total = 0.0;
        for (i, &li) in lambda.iter().enumerate() {
            let row = &self.psi[i * self.n..(i + 1) * self.n];
            total += li * row.iter().zip(lambda).map(|(p, l)| p * l).sum::<f64>();
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// Every entry is a finite non-negative number.
    Finite,
    ZeroDiagonal,
    Symmetry,
    Positivity,
    Triangle,
}

/// One failed axiom. The witness lists the indices involved: `[i]` for the
/// diagonal, `[i, j]` for symmetry and positivity, and `[i, k, j]` for a
/// triangle violation `d(i,k) > d(i,j) + d(j,k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return write!(f, "valid");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        if let Some(v) = self.violations.first() {
            write!(f, ", first: {:?} at {:?}", v.axiom, v.witness)?;
        }
        Ok(())
    }
}

/// Checks the metric axioms on a square matrix.
///
/// The triangle inequality is checked exactly when every entry is integral
/// and with absolute slack [`TRIANGLE_TOL`] otherwise.
pub fn validate_metric(dist: &[Vec<f64>]) -> Result<MetricReport> {
    check_square(dist)?;
    let n = dist.len();
    let mut violations = Vec::new();
    let mut push = |axiom, witness: Vec<usize>| violations.push(Violation { axiom, witness });

    let integral = dist.iter().flatten().all(|d| d.is_finite() && d.fract() == 0.0);
    let slack = if integral { 0.0 } else { TRIANGLE_TOL };

    for i in 0..n {
        for j in 0..n {
            let d = dist[i][j];
            if !d.is_finite() || d < 0.0 {
                push(Axiom::Finite, vec![i, j]);
            }
        }
    }
    for (i, row) in dist.iter().enumerate() {
        if row[i] != 0.0 {
            push(Axiom::ZeroDiagonal, vec![i]);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] != dist[j][i] {
                push(Axiom::Symmetry, vec![i, j]);
            }
            if !(dist[i][j] > 0.0 && dist[j][i] > 0.0) {
                push(Axiom::Positivity, vec![i, j]);
            }
        }
    }
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                if dist[i][k] > dist[i][j] + dist[j][k] + slack {
                    push(Axiom::Triangle, vec![i, k, j]);
                }
            }
        }
    }
    Ok(MetricReport { valid: violations.is_empty(), violations })
}

/// `ψ = d^p` elementwise. Exact for integral metrics and integral `p`.
pub fn power_transform(space: &FiniteMetricSpace, p: f64) -> Result<Kernel> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent must be positive, got {p}")));
    }
    Ok(powered(space, p))
}

/// `d^p` for any `p ≥ 0`; `p = 0` yields the equilateral kernel.
pub(crate) fn powered(space: &FiniteMetricSpace, p: f64) -> Kernel {
    let n = space.len();
    let integer_p = p.fract() == 0.0 && p <= i32::MAX as f64;
    let psi = space
        .dist
        .iter()
        .map(|&d| {
            if d == 0.0 {
                0.0
            } else if integer_p {
                d.powi(p as i32)
            } else {
                d.powf(p)
            }
        })
        .collect();
    Kernel { n, psi }
}

/// The subspace induced by `subset`, in the given order.
pub fn restrict(space: &FiniteMetricSpace, subset: &[usize]) -> Result<FiniteMetricSpace> {
    let n = space.len();
    let mut seen = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::Domain(format!("index {i} out of range for {n} points")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Domain(format!("index {i} repeated in subset")));
        }
    }
    let m = subset.len();
    let mut dist = Vec::with_capacity(m * m);
    for &i in subset {
        dist.extend(subset.iter().map(|&j| space.d(i, j)));
    }
    let exact = space
        .exact
        .as_ref()
        .map(|e| subset.iter().flat_map(|&i| subset.iter().map(move |&j| e[i * n + j])).collect());
    Ok(FiniteMetricSpace {
        labels: subset.iter().map(|&i| space.labels[i].clone()).collect(),
        n: m,
        dist,
        exact,
    })
}
