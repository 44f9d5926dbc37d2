//! Negative-type kernels: the centered eigenvalue test, bisection for the
//! supremal exponent, and the Gram-matrix (Schoenberg) embedding.
//!
//! A kernel `ψ` is of negative type when `λᵀΨλ ≤ 0` for every `λ` with
//! `Σλ_i = 0`. For a finite metric space, `d^p` is of negative type exactly
//! when the generalized roundness is at least `p`, and the set of such `p` is
//! a closed interval `[0, p*]` (limits of negative-type kernels stay negative
//! type), so `p*` is attained and bisection on `p` is sound.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{powered, validate_metric, FiniteMetricSpace, Kernel};

/// Default bisection resolution on `p`.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default upper end of the bisection bracket.
pub const DEFAULT_P_MAX: f64 = 8.0;
/// Eigenvalue threshold relative to the kernel's infinity norm.
pub const THRESHOLD_FACTOR: f64 = 1e-9;

/// Eigenvalue threshold for deciding negative type: `1e-9 · ‖Ψ‖_∞`.
///
/// Purely relative, so rescaling a metric never moves its `p*`.
pub fn default_threshold(kernel: &Kernel) -> f64 {
    (THRESHOLD_FACTOR * kernel.inf_norm()).max(f64::MIN_POSITIVE)
}

/// Outcome of the negative-type test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegTypeCertificate {
    pub is_negative_type: bool,
    /// `max λᵀΨλ` over unit `λ` with `Σλ_i = 0`.
    pub extremal_value: f64,
    /// Threshold the extremal value was compared against.
    pub threshold: f64,
    /// Maximizing direction, present when the kernel is not of negative type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

/// Supremal negative-type exponent with bracketing certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PStarResult {
    pub p_star: f64,
    /// `d^{p_max}` was still of negative type; `p_star = p_max`.
    pub capped: bool,
    pub tol: f64,
    pub p_max: f64,
    /// Exponent of the lower certificate (`≥ p_star − tol`).
    pub lower_p: f64,
    pub lower_certificate: NegTypeCertificate,
    /// Exponent of the upper certificate (`≤ p_star + tol`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_certificate: Option<NegTypeCertificate>,
}

/// Points realizing a kernel as squared Euclidean distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclideanConfiguration {
    pub basepoint_index: usize,
    pub dimension: usize,
    pub points: Vec<Vec<f64>>,
}

impl EuclideanConfiguration {
    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        self.points[i].iter().zip(&self.points[j]).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// `max_{i,j} |‖f_i − f_j‖² − ψ_ij|`.
    pub fn reconstruction_error(&self, kernel: &Kernel) -> f64 {
        let n = self.points.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.squared_distance(i, j) - kernel.get(i, j)).abs());
            }
        }
        worst
    }
}

fn to_dmatrix(kernel: &Kernel) -> DMatrix<f64> {
    let n = kernel.len();
    DMatrix::from_row_slice(n, n, kernel.as_flat())
}

/// Decides whether `kernel` is of negative type.
///
/// Centers `Ψ` with `P = I − J/n`, pushes the all-ones direction far below
/// the rest of the spectrum, and compares the top eigenvalue of what remains
/// to `tol`.
pub fn is_negative_type(kernel: &Kernel, tol: f64) -> Result<NegTypeCertificate> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    // Kernel's constructor already enforces symmetry and the zero diagonal.
    let n = kernel.len();
    if n < 2 {
        return Ok(NegTypeCertificate {
            is_negative_type: true,
            extremal_value: 0.0,
            threshold: tol,
            witness: None,
        });
    }
    let psi = to_dmatrix(kernel);
    let inv_n = 1.0 / n as f64;
    let projector = DMatrix::<f64>::identity(n, n) - DMatrix::<f64>::from_element(n, n, inv_n);
    let centered = &projector * psi * &projector;
    let shift = 1.0 + 2.0 * kernel.inf_norm();
    let deflated = centered - DMatrix::<f64>::from_element(n, n, shift * inv_n);
    let deflated = symmetrize(deflated);

    let eig = SymmetricEigen::new(deflated);
    let (top, &extremal) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("n >= 2");

    if extremal <= tol {
        return Ok(NegTypeCertificate {
            is_negative_type: true,
            extremal_value: extremal,
            threshold: tol,
            witness: None,
        });
    }
    let mut witness: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    let mean = witness.iter().sum::<f64>() * inv_n;
    witness.iter_mut().for_each(|w| *w -= mean);
    let norm = witness.iter().map(|w| w * w).sum::<f64>().sqrt();
    witness.iter_mut().for_each(|w| *w /= norm);
    Ok(NegTypeCertificate {
        is_negative_type: false,
        extremal_value: kernel.quadratic_form(&witness),
        threshold: tol,
        witness: Some(witness),
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn check_power(space: &FiniteMetricSpace, p: f64) -> NegTypeCertificate {
    let kernel = powered(space, p);
    let threshold = default_threshold(&kernel);
    is_negative_type(&kernel, threshold).expect("positive threshold")
}

/// Supremal `p` in `[0, p_max]` with `d^p` of negative type, to within `tol`.
pub fn supremal_p(space: &FiniteMetricSpace, tol: f64, p_max: f64) -> Result<PStarResult> {
    let report = validate_metric(&space.rows())?;
    if !report.valid {
        return Err(Error::InvalidMetric(report));
    }
    supremal_p_unchecked(space, tol, p_max)
}

/// [`supremal_p`] without re-validating the metric axioms.
pub fn supremal_p_unchecked(space: &FiniteMetricSpace, tol: f64, p_max: f64) -> Result<PStarResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!("tol must be positive, got {tol}")));
    }
    if !(p_max > 0.0 && p_max.is_finite()) {
        return Err(Error::Domain(format!("p_max must be positive, got {p_max}")));
    }

    let top = check_power(space, p_max);
    if top.is_negative_type {
        return Ok(PStarResult {
            p_star: p_max,
            capped: true,
            tol,
            p_max,
            lower_p: p_max,
            lower_certificate: top,
            upper_p: None,
            upper_certificate: None,
        });
    }

    let (mut lo, mut hi) = (0.0, p_max);
    let mut lo_cert = check_power(space, 0.0);
    let mut hi_cert = top;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let cert = check_power(space, mid);
        if cert.is_negative_type {
            lo = mid;
            lo_cert = cert;
        } else {
            hi = mid;
            hi_cert = cert;
        }
    }
    Ok(PStarResult {
        p_star: lo,
        capped: false,
        tol,
        p_max,
        lower_p: lo,
        lower_certificate: lo_cert,
        upper_p: Some(hi),
        upper_certificate: Some(hi_cert),
    })
}

/// `G_ij = (ψ(x_i,x_0) + ψ(x_j,x_0) − ψ(x_i,x_j)) / 2` for basepoint `x_0`.
pub fn gram_from_kernel(kernel: &Kernel, basepoint: usize) -> Result<Vec<Vec<f64>>> {
    let n = kernel.len();
    if basepoint >= n {
        return Err(Error::Domain(format!("basepoint {basepoint} out of range for {n} points")));
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| 0.5 * (kernel.get(i, basepoint) + kernel.get(j, basepoint) - kernel.get(i, j)))
                .collect()
        })
        .collect())
}

/// Realizes a negative-type kernel as squared distances of points in `ℝ^k`,
/// `k ≤ n − 1`, with the basepoint at the origin.
///
/// Gram eigenvalues in `[−tol, 0]` are treated as zero; anything below `−tol`
/// is rejected.
pub fn gns_embed(kernel: &Kernel, basepoint: usize, tol: f64) -> Result<EuclideanConfiguration> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let gram = gram_from_kernel(kernel, basepoint)?;
    let n = kernel.len();
    let others: Vec<usize> = (0..n).filter(|&i| i != basepoint).collect();
    let m = others.len();
    let reduced = DMatrix::from_fn(m, m, |r, c| gram[others[r]][others[c]]);
    let eig = SymmetricEigen::new(symmetrize(reduced));

    if let Some(&worst) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
        if worst < -tol {
            return Err(Error::NotNegativeType { eigenvalue: worst, threshold: tol });
        }
    }
    let kept: Vec<(usize, f64)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.0)
        .map(|(k, &l)| (k, l.sqrt()))
        .collect();

    let mut points = vec![vec![0.0; kept.len()]; n];
    for (r, &i) in others.iter().enumerate() {
        for (c, &(k, s)) in kept.iter().enumerate() {
            points[i][c] = eig.eigenvectors[(r, k)] * s;
        }
    }
    Ok(EuclideanConfiguration { basepoint_index: basepoint, dimension: kept.len(), points })
}

/// `p*/2`, a lower bound on equivariant Hilbert space compression.
pub fn compression_lower_bound(p_star: f64) -> Result<f64> {
    if !(p_star >= 0.0) {
        return Err(Error::Domain(format!("p_star must be non-negative, got {p_star}")));
    }
    Ok(p_star / 2.0)
}
