//! Dense complex-matrix layer: density operators, projective observables,
//! spectral decompositions, Kronecker products, partial traces and entropies.
//!
//! Kronecker ordering is fixed throughout the crate: in `A ⊗ B` the `A`
//! factor indexes the most-significant (slow) part of the composite index,
//! so basis state `|a b⟩` sits at row `a * d_B + b`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Eigenvalues below this magnitude count as zero for support, entropy and
/// matrix-power conventions.
pub const EIGEN_CUTOFF: f64 = 1e-14;
/// Eigenvalues closer than this are grouped into one projector.
pub const CLUSTER_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn real_diagonal(d: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d.len(),
        d.iter().map(|&x| c(x, 0.0)),
    ))
}

/// Kronecker product `a ⊗ b` with `a` as the most-significant factor.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Which factor of a bipartition to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of a raw `d_a*d_b` square matrix.
pub fn partial_trace_matrix(m: &CMatrix, d_a: usize, d_b: usize, keep: Subsystem) -> CMatrix {
    match keep {
        Subsystem::A => CMatrix::from_fn(d_a, d_a, |i, j| {
            (0..d_b).map(|k| m[(i * d_b + k, j * d_b + k)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(d_b, d_b, |i, j| {
            (0..d_a).map(|k| m[(k * d_b + i, k * d_b + j)]).sum()
        }),
    }
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order; exact ties are broken
/// lexicographically on the phase-fixed eigenvector entries so the output is
/// deterministic.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn of_hermitian(m: &CMatrix) -> Self {
        let h = hermitian_part(m);
        let eig = h.symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut modes: Vec<(f64, Vec<C64>)> = (0..n)
            .map(|i| {
                let mut v: Vec<C64> = eig.eigenvectors.column(i).iter().copied().collect();
                fix_phase(&mut v);
                (eig.eigenvalues[i], v)
            })
            .collect();
        modes.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| lex_cmp(&a.1, &b.1)));
        let eigenvectors = CMatrix::from_fn(n, n, |r, col| modes[col].1[r]);
        Self {
            eigenvalues: modes.iter().map(|m| m.0).collect(),
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V f(Λ) V†` for a per-eigenvalue map.
    pub fn apply(&self, mut f: impl FnMut(f64) -> C64) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            let v = self.eigenvectors.column(k);
            out += (v * v.adjoint()) * w;
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|l| c(l, 0.0))
    }

    /// Projectors onto eigenvalue clusters (tolerance [`CLUSTER_TOL`]),
    /// returned with the mean eigenvalue of each cluster.
    pub fn clusters(&self) -> Vec<(f64, CMatrix)> {
        let d = self.dim();
        let mut out: Vec<(f64, CMatrix, usize)> = Vec::new();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(k);
            let proj = v * v.adjoint();
            match out.last_mut() {
                Some((sum, p, count)) if ((*sum / *count as f64) - lam).abs() <= CLUSTER_TOL => {
                    *sum += lam;
                    *p += proj;
                    *count += 1;
                }
                _ => out.push((lam, proj, 1)),
            }
        }
        debug_assert!(out.iter().map(|x| x.2).sum::<usize>() == d);
        out.into_iter()
            .map(|(sum, p, n)| (sum / n as f64, p))
            .collect()
    }
}

fn fix_phase(v: &mut [C64]) {
    if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then_with(|| x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Positive, unit-trace Hermitian operator, optionally carrying a
/// bipartition `(d_A, d_B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
    partition: Option<(usize, usize)>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and positivity
    /// (min eigenvalue ≥ -1e-10).
    pub fn new(data: CMatrix) -> Result<Self> {
        if !data.is_square() || data.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "matrix must be square and non-empty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let herm = max_abs_diff(&data, &data.adjoint());
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = trace(&data);
        if (tr - c(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = SpectralDecomposition::of_hermitian(&data)
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { data, partition: None })
    }

    /// Builds from a matrix that is a density operator up to round-off:
    /// Hermitizes and renormalizes the trace before validating.
    pub fn from_noisy(data: CMatrix) -> Result<Self> {
        let h = hermitian_part(&data);
        let tr = trace(&h).re;
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!("non-positive trace {tr}")));
        }
        Self::new(h / c(tr, 0.0))
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        Self::new(real_diagonal(p))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            data: identity(d) / c(d as f64, 0.0),
            partition: None,
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Self::from_noisy(&v * v.adjoint())
    }

    pub fn with_partition(mut self, d_a: usize, d_b: usize) -> Result<Self> {
        if d_a * d_b != self.dim() || d_a == 0 {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d_a * d_b,
            });
        }
        self.partition = Some((d_a, d_b));
        Ok(self)
    }

    /// `ρ_A ⊗ ρ_B`, carrying the partition.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        Self {
            data: tensor_product(&a.data, &b.data),
            partition: Some((a.dim(), b.dim())),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_inner(self) -> CMatrix {
        self.data
    }

    pub fn partition(&self) -> Option<(usize, usize)> {
        self.partition
    }

    pub fn spectrum(&self) -> SpectralDecomposition {
        SpectralDecomposition::of_hermitian(&self.data)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum().eigenvalues
    }

    pub fn populations(&self) -> Vec<f64> {
        self.data.diagonal().iter().map(|z| z.re).collect()
    }
}

/// Reduced state of one factor. Requires a partition on `rho`.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    let (d_a, d_b) = rho.partition().ok_or(Error::MissingPartition)?;
    DensityMatrix::from_noisy(partial_trace_matrix(rho.data(), d_a, d_b, keep))
}

fn xlogx_sum(eigs: &[f64]) -> f64 {
    eigs.iter()
        .filter(|&&p| p > EIGEN_CUTOFF)
        .map(|&p| p * p.ln())
        .sum()
}

/// `S(ρ) = -Tr ρ ln ρ` in nats, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    (-xlogx_sum(&rho.eigenvalues())).max(0.0)
}

/// `Tr[ν ln μ]`, evaluated in the eigenbasis of `μ`. Modes of `μ` below the
/// cutoff contribute zero when `ν` puts no more weight on them than the
/// cutoff (or twice the eigenvalue), and `-∞` otherwise.
pub fn trace_log(nu: &CMatrix, mu: &CMatrix) -> f64 {
    let spec = SpectralDecomposition::of_hermitian(mu);
    let mut acc = 0.0;
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        let v = spec.eigenvectors.column(k);
        let w = (v.adjoint() * nu * v)[(0, 0)].re;
        if lam > EIGEN_CUTOFF {
            acc += w * lam.ln();
        } else if w > EIGEN_CUTOFF.max(2.0 * lam) {
            return f64::NEG_INFINITY;
        }
    }
    acc
}

/// Quantum relative entropy `S(ν‖μ) = Tr ν ln ν − Tr ν ln μ`.
///
/// Returns `+∞` when the support of `ν` is not contained in that of `μ`.
pub fn relative_entropy(nu: &DensityMatrix, mu: &DensityMatrix) -> f64 {
    let cross = trace_log(nu.data(), mu.data());
    if cross == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    xlogx_sum(&nu.eigenvalues()) - cross
}

/// Result of raising a PSD matrix to a complex power.
#[derive(Debug, Clone)]
pub struct MatrixPower {
    pub matrix: CMatrix,
    /// Number of zero modes dropped because `Re(z) ≤ 0` made them singular.
    pub dropped_modes: usize,
}

impl MatrixPower {
    pub fn is_degenerate(&self) -> bool {
        self.dropped_modes > 0
    }
}

/// `ρ^z` via the spectral decomposition. Zero modes map to zero for
/// `Re z > 0` and are dropped (and counted) for `Re z ≤ 0`.
pub fn matrix_power(rho: &CMatrix, z: C64) -> MatrixPower {
    let spec = SpectralDecomposition::of_hermitian(rho);
    let mut dropped = 0;
    let matrix = spec.apply(|lam| {
        if lam > EIGEN_CUTOFF {
            c(lam, 0.0).powc(z)
        } else {
            if z.re <= 0.0 {
                dropped += 1;
            }
            c(0.0, 0.0)
        }
    });
    MatrixPower {
        matrix,
        dropped_modes: dropped,
    }
}

/// Projective measurement: outcome labels with mutually orthogonal Hermitian
/// projectors that resolve the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    eigenvalues: Vec<f64>,
    projectors: Vec<CMatrix>,
}

impl Observable {
    pub fn new(eigenvalues: Vec<f64>, projectors: Vec<CMatrix>) -> Result<Self> {
        if eigenvalues.len() != projectors.len() || projectors.is_empty() {
            return Err(Error::InvalidObservable(
                "need one eigenvalue per projector and at least one projector".into(),
            ));
        }
        let d = projectors[0].nrows();
        let mut sum = CMatrix::zeros(d, d);
        for (i, p) in projectors.iter().enumerate() {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.nrows(),
                });
            }
            if max_abs_diff(p, &p.adjoint()) > PROJECTOR_TOL {
                return Err(Error::InvalidObservable(format!("projector {i} not Hermitian")));
            }
            for (j, q) in projectors.iter().enumerate() {
                let pq = p * q;
                let target = if i == j { p.clone() } else { CMatrix::zeros(d, d) };
                if max_abs_diff(&pq, &target) > PROJECTOR_TOL {
                    return Err(Error::InvalidObservable(format!(
                        "projectors {i} and {j} violate Π_iΠ_j = δ_ij Π_i"
                    )));
                }
            }
            sum += p;
        }
        if max_abs_diff(&sum, &identity(d)) > PROJECTOR_TOL {
            return Err(Error::InvalidObservable("projectors do not sum to identity".into()));
        }
        Ok(Self {
            eigenvalues,
            projectors,
        })
    }

    /// Rank-one projectors onto the columns of a unitary, labelled by `values`
    /// (defaults to 0, 1, 2, ...).
    pub fn from_basis(basis: &CMatrix, values: Option<Vec<f64>>) -> Result<Self> {
        let d = basis.ncols();
        let values = values.unwrap_or_else(|| (0..d).map(|i| i as f64).collect());
        let projectors = (0..d)
            .map(|k| {
                let v = basis.column(k);
                v * v.adjoint()
            })
            .collect();
        Self::new(values, projectors)
    }

    pub fn computational(d: usize) -> Self {
        Self::from_basis(&identity(d), None).expect("identity basis is a valid observable")
    }

    /// Spectral observable of a Hermitian matrix, one projector per
    /// eigenvalue cluster.
    pub fn from_hermitian(m: &CMatrix) -> Result<Self> {
        let (values, projectors) = SpectralDecomposition::of_hermitian(m)
            .clusters()
            .into_iter()
            .unzip();
        Self::new(values, projectors)
    }

    /// `O_A ⊗ O_B` with outcome `(k, l)` at index `k * M_B + l`; labels are
    /// `k * M_B + l` as well.
    pub fn product(a: &Observable, b: &Observable) -> Self {
        let mut projectors = Vec::with_capacity(a.len() * b.len());
        for pa in &a.projectors {
            for pb in &b.projectors {
                projectors.push(tensor_product(pa, pb));
            }
        }
        let values = (0..projectors.len()).map(|i| i as f64).collect();
        Self {
            eigenvalues: values,
            projectors,
        }
    }

    /// Lifts a local observable on `A` to `O_A ⊗ 1_B`.
    pub fn lift_a(&self, d_b: usize) -> Self {
        Self {
            eigenvalues: self.eigenvalues.clone(),
            projectors: self
                .projectors
                .iter()
                .map(|p| tensor_product(p, &identity(d_b)))
                .collect(),
        }
    }

    /// Lifts a local observable on `B` to `1_A ⊗ O_B`.
    pub fn lift_b(&self, d_a: usize) -> Self {
        Self {
            eigenvalues: self.eigenvalues.clone(),
            projectors: self
                .projectors
                .iter()
                .map(|p| tensor_product(&identity(d_a), p))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// `Σ_i a_i Π_i`.
    pub fn matrix(&self) -> CMatrix {
        let d = self.dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(d, d), |acc, (&a, p)| acc + p * c(a, 0.0))
    }

    /// Outcome probabilities `Tr[Π_i ρ]`.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.projectors
            .iter()
            .map(|p| trace(&(p * rho)).re)
            .collect()
    }

    /// Non-selective post-measurement state `Σ_i Π_i ρ Π_i`.
    pub fn dephase(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim();
        self.projectors
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, p| acc + p * rho * p)
    }

    /// Conjugates every projector by an antiunitary `Θ = U K`.
    pub fn map_projectors(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self {
            eigenvalues: self.eigenvalues.clone(),
            projectors: self.projectors.iter().map(f).collect(),
        }
    }
}
