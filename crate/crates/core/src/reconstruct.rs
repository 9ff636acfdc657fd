//! Recovering entropy-production statistics from samples of the
//! moment-generating function: Chebyshev grids, moment extraction
//! (Vandermonde solve or Newton divided differences) and distribution
//! recovery (truncated inverse Fourier transform or pseudo-inverse).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distribution::{EntropyDistribution, Label, MERGE_TOL};
use crate::error::{Error, Result};

/// Condition numbers above this get an ill-conditioning flag.
pub const ILL_CONDITIONED: f64 = 1e14;
const TIKHONOV: f64 = 1e-12;

/// Parameter values `φ_k` at which `χ(φ)` is sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub n: usize,
    pub phi_min: f64,
    pub phi_max: f64,
    pub nodes: Vec<f64>,
}

fn check_interval(n: usize, lo: f64, hi: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            reason: "need at least one node".into(),
        });
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DegenerateInterval { min: lo, max: hi });
    }
    Ok(())
}

/// Zeros of the degree-`n` Chebyshev polynomial mapped to `[lo, hi]`:
/// `φ_k = (lo+hi)/2 + (hi−lo)/2 · cos((2k−1)π/2n)`, `k = 1..n` (descending).
pub fn chebyshev_nodes(n: usize, lo: f64, hi: f64) -> Result<ParameterGrid> {
    check_interval(n, lo, hi)?;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let nodes = (1..=n)
        .map(|k| {
            let theta = (2 * k - 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
            mid + half * theta.cos()
        })
        .collect();
    Ok(ParameterGrid {
        n,
        phi_min: lo,
        phi_max: hi,
        nodes,
    })
}

/// `n` evenly spaced nodes including both endpoints (one node sits at the
/// midpoint).
pub fn equispaced_nodes(n: usize, lo: f64, hi: f64) -> Result<ParameterGrid> {
    check_interval(n, lo, hi)?;
    let nodes = if n == 1 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    };
    Ok(ParameterGrid {
        n,
        phi_min: lo,
        phi_max: hi,
        nodes,
    })
}

/// How to choose `[φ_min, φ_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridChoice {
    /// `[0, N]`.
    Fixed,
    /// `[−κ/σ_max, κ/σ_max]` where `σ_max` bounds `|σ|` on the support;
    /// `[−1, 1]` when the support is `{0}`.
    SupportScaled { kappa: f64 },
}

impl Default for GridChoice {
    fn default() -> Self {
        GridChoice::SupportScaled { kappa: 1.0 }
    }
}

impl GridChoice {
    pub fn grid(self, n: usize, sigma_max: f64) -> Result<ParameterGrid> {
        match self {
            GridChoice::Fixed => chebyshev_nodes(n, 0.0, n as f64),
            GridChoice::SupportScaled { kappa } => {
                if !(kappa > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "kappa",
                        reason: format!("must be positive, got {kappa}"),
                    });
                }
                let r = if sigma_max > MERGE_TOL { kappa / sigma_max } else { 1.0 };
                chebyshev_nodes(n, -r, r)
            }
        }
    }
}

/// Moments `⟨σ^k⟩`, `k = 0..N−1`, and their Taylor-scaled form
/// `m̃_k = (−1)^k ⟨σ^k⟩ / k!`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub moments: Vec<f64>,
    pub scaled: Vec<f64>,
    /// 2-norm condition number of the Vandermonde matrix, when computed.
    pub condition_number: Option<f64>,
    pub ill_conditioned: bool,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl MomentVector {
    pub fn from_scaled(scaled: Vec<f64>, condition_number: Option<f64>) -> Self {
        let moments = scaled
            .iter()
            .enumerate()
            .map(|(n, m)| if n % 2 == 0 { 1.0 } else { -1.0 } * factorial(n) * m)
            .collect();
        Self {
            moments,
            scaled,
            condition_number,
            ill_conditioned: condition_number.is_some_and(|c| c > ILL_CONDITIONED),
        }
    }

    pub fn from_moments(moments: Vec<f64>) -> Self {
        let scaled = moments
            .iter()
            .enumerate()
            .map(|(n, m)| if n % 2 == 0 { 1.0 } else { -1.0 } * m / factorial(n))
            .collect();
        Self {
            moments,
            scaled,
            condition_number: None,
            ill_conditioned: false,
        }
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    /// `⟨σ^k⟩` for `k = 1..`.
    pub fn nontrivial(&self) -> &[f64] {
        self.moments.get(1..).unwrap_or(&[])
    }
}

fn check_samples(grid: &ParameterGrid, chi: &[f64]) -> Result<()> {
    if chi.len() != grid.nodes.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.nodes.len(),
            found: chi.len(),
        });
    }
    let mut sorted = grid.nodes.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::CoincidentNodes);
    }
    Ok(())
}

/// Solves `χ = V(φ) m̃` with `V_ij = φ_i^j`, then undoes the Taylor scaling.
pub fn moments_via_vandermonde(grid: &ParameterGrid, chi: &[f64]) -> Result<MomentVector> {
    check_samples(grid, chi)?;
    let n = chi.len();
    let v = DMatrix::from_fn(n, n, |i, j| grid.nodes[i].powi(j as i32));
    let sv = v.clone().singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let scaled = v
        .lu()
        .solve(&DVector::from_column_slice(chi))
        .ok_or(Error::CoincidentNodes)?;
    Ok(MomentVector::from_scaled(scaled.iter().copied().collect(), Some(cond)))
}

/// Newton divided differences `η_k = χ[φ_0, …, φ_k]`.
pub fn divided_differences(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut table = values.to_vec();
    let mut eta = Vec::with_capacity(n);
    for level in 0..n {
        eta.push(table[0]);
        for i in 0..n - level - 1 {
            table[i] = (table[i + 1] - table[i]) / (nodes[i + level + 1] - nodes[i]);
        }
    }
    eta
}

/// Interpolates through divided differences and expands the Newton basis
/// `n_k(φ) = Π_{j<k}(φ − φ_j)` into monomial coefficients.
pub fn moments_via_newton(grid: &ParameterGrid, chi: &[f64]) -> Result<MomentVector> {
    check_samples(grid, chi)?;
    let eta = divided_differences(&grid.nodes, chi);
    let n = eta.len();
    // Horner on the nested form: p = η_0 + (φ−φ_0)(η_1 + (φ−φ_1)(η_2 + …)).
    let mut coeffs = vec![eta[n - 1]];
    for k in (0..n - 1).rev() {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (j, &cj) in coeffs.iter().enumerate() {
            next[j + 1] += cj;
            next[j] -= grid.nodes[k] * cj;
        }
        next[0] += eta[k];
        coeffs = next;
    }
    Ok(MomentVector::from_scaled(coeffs, None))
}

/// Integration settings for the truncated inverse Fourier transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierOptions {
    pub dmu: f64,
    pub limits: Vec<f64>,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self {
            dmu: 0.01,
            limits: vec![2.0, 4.0, 8.0, 16.0, 32.0],
        }
    }
}

/// A recovered distribution with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovered {
    pub dist: EntropyDistribution,
    /// Smallest mass before clipping and renormalization.
    pub min_raw_mass: f64,
    /// Integration limit chosen by the Fourier path.
    pub limit: Option<f64>,
    /// Whether the pseudo-inverse needed the Tikhonov fallback.
    pub regularized: bool,
}

fn check_support(support: &[f64]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::SupportMismatch("empty support".into()));
    }
    let mut s = support.to_vec();
    s.sort_by(f64::total_cmp);
    for w in s.windows(2) {
        if w[1] - w[0] <= MERGE_TOL {
            return Err(Error::DegenerateSupport(w[0], w[1]));
        }
    }
    Ok(())
}

fn sorted_dist(label: Label, support: &[f64], probs: &[f64]) -> EntropyDistribution {
    let mut pairs: Vec<(f64, f64)> = support.iter().copied().zip(probs.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    EntropyDistribution {
        label,
        support: pairs.iter().map(|p| p.0).collect(),
        probs: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Clips negative masses to zero and renormalizes.
fn clip_normalize(raw: &[f64]) -> Result<Vec<f64>> {
    let clipped: Vec<f64> = raw.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ReconstructionFailure(
            "no positive mass left after clipping".into(),
        ));
    }
    Ok(clipped.iter().map(|p| p / total).collect())
}

/// Inverse Fourier transform of the truncated series
/// `Σ_k ⟨σ^k⟩ (iμ)^k / k!` over `μ ∈ [−L, L]`, evaluated on `support`.
/// Each candidate `L` is scored by how well the recovered masses reproduce
/// the scaled moments; the best one is kept.
pub fn fourier_reconstruct(
    label: Label,
    moments: &MomentVector,
    support: &[f64],
    opts: &FourierOptions,
) -> Result<Recovered> {
    check_support(support)?;
    if !(opts.dmu > 0.0) || opts.limits.is_empty() {
        return Err(Error::InvalidParameter {
            name: "dmu",
            reason: "need a positive step and at least one integration limit".into(),
        });
    }
    let n = moments.len();
    let mut best: Option<(f64, Recovered)> = None;
    for &limit in &opts.limits {
        let steps = (2.0 * limit / opts.dmu).round() as usize;
        let h = 2.0 * limit / steps as f64;
        let mut density = vec![0.0; support.len()];
        for j in 0..=steps {
            let mu = -limit + j as f64 * h;
            let w = if j == 0 || j == steps { 0.5 * h } else { h };
            // Σ_k m_k (iμ)^k / k! as (re, im).
            let (mut re, mut im) = (0.0, 0.0);
            let mut term = 1.0;
            for k in 0..n {
                if k > 0 {
                    term *= mu / k as f64;
                }
                let t = moments.moments[k] * term;
                match k % 4 {
                    0 => re += t,
                    1 => im += t,
                    2 => re -= t,
                    _ => im -= t,
                }
            }
            for (d, &s) in density.iter_mut().zip(support) {
                let (c, sn) = ((mu * s).cos(), (mu * s).sin());
                // Re[(re + i im) e^{−iμs}]
                *d += w * (re * c + im * sn);
            }
        }
        let total: f64 = density.iter().sum();
        if !(total.abs() > 0.0) {
            continue;
        }
        let raw: Vec<f64> = density.iter().map(|d| d / total).collect();
        let min_raw = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_raw < -1e-3 {
            continue;
        }
        let probs = clip_normalize(&raw)?;
        let recomputed = (1..n).map(|k| {
            support
                .iter()
                .zip(&probs)
                .map(|(s, p)| p * s.powi(k as i32))
                .sum::<f64>()
        });
        let mismatch: f64 = recomputed
            .enumerate()
            .map(|(i, m)| {
                let k = i + 1;
                let scaled = if k % 2 == 0 { 1.0 } else { -1.0 } * m / factorial(k);
                (moments.scaled[k] - scaled).powi(2)
            })
            .sum();
        if best.as_ref().is_none_or(|(b, _)| mismatch < *b) {
            best = Some((
                mismatch,
                Recovered {
                    dist: sorted_dist(label, support, &probs),
                    min_raw_mass: min_raw,
                    limit: Some(limit),
                    regularized: false,
                },
            ));
        }
    }
    best.map(|b| b.1).ok_or_else(|| {
        Error::ReconstructionFailure(
            "every integration limit produced masses below -1e-3".into(),
        )
    })
}

/// Least-squares masses from `Σ p = m` with `Σ_ki = σ_i^k`. Row `k = 0`
/// carries normalization; rows `1..` use `moments[1..]`.
pub fn pseudoinverse_reconstruct(
    label: Label,
    moments: &MomentVector,
    support: &[f64],
) -> Result<Recovered> {
    check_support(support)?;
    let rows = moments.len().max(1);
    let sigma = DMatrix::from_fn(rows, support.len(), |k, i| support[i].powi(k as i32));
    let mut rhs = DVector::from_fn(rows, |k, _| if k == 0 { 1.0 } else { moments.moments[k] });
    rhs[0] = 1.0;
    let svd = sigma.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = f64::EPSILON * rows.max(support.len()) as f64 * smax;
    let full_rank = svd.singular_values.len() == support.len()
        && svd.singular_values.iter().all(|&s| s > cutoff);
    let (p, regularized) = if full_rank {
        let p = svd
            .solve(&rhs, cutoff)
            .map_err(|e| Error::ReconstructionFailure(e.into()))?;
        (p, false)
    } else {
        let st = sigma.transpose();
        let gram = &st * &sigma + DMatrix::identity(support.len(), support.len()) * TIKHONOV;
        let p = gram
            .lu()
            .solve(&(st * rhs))
            .ok_or_else(|| Error::ReconstructionFailure("regularized system is singular".into()))?;
        (p, true)
    };
    let raw: Vec<f64> = p.iter().copied().collect();
    let min_raw_mass = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let probs = clip_normalize(&raw)?;
    Ok(Recovered {
        dist: sorted_dist(label, support, &probs),
        min_raw_mass,
        limit: None,
        regularized,
    })
}

/// `√(Σ_{k=1}^{N_max} |Δ_k|² / N_max)`; inputs list `⟨σ^k⟩` from `k = 1`.
pub fn rmse_moments(truth: &[f64], recon: &[f64], n_max: usize) -> Result<f64> {
    if n_max == 0 || truth.len() < n_max || recon.len() < n_max {
        return Err(Error::DimensionMismatch {
            expected: n_max,
            found: truth.len().min(recon.len()),
        });
    }
    let ss: f64 = truth[..n_max]
        .iter()
        .zip(&recon[..n_max])
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok((ss / n_max as f64).sqrt())
}

/// `√(Σ R_i² / l)` over aligned supports.
pub fn rmse_probs(truth: &EntropyDistribution, recon: &EntropyDistribution) -> Result<f64> {
    if truth.len() != recon.len() {
        return Err(Error::SupportMismatch(format!(
            "{} true points against {} reconstructed",
            truth.len(),
            recon.len()
        )));
    }
    let mut ss = 0.0;
    for ((s, p), (r, q)) in truth.pairs().zip(recon.pairs()) {
        if (s - r).abs() > MERGE_TOL {
            return Err(Error::SupportMismatch(format!("{s} does not align with {r}")));
        }
        ss += (p - q).powi(2);
    }
    Ok((ss / truth.len() as f64).sqrt())
}

/// Distribution-recovery method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fourier,
    #[default]
    #[serde(rename = "pinv")]
    Pseudoinverse,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fourier" => Ok(Self::Fourier),
            "pinv" | "pseudoinverse" => Ok(Self::Pseudoinverse),
            other => Err(Error::InvalidParameter {
                name: "method",
                reason: format!("expected `fourier` or `pinv`, got `{other}`"),
            }),
        }
    }
}

/// Moment extraction route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentSolver {
    #[default]
    Vandermonde,
    Newton,
}

/// Everything needed to go from χ samples to a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionSettings {
    pub n: usize,
    pub grid: GridChoice,
    pub method: Method,
    pub solver: MomentSolver,
    pub fourier: FourierOptions,
}

impl Default for ReconstructionSettings {
    fn default() -> Self {
        Self {
            n: 10,
            grid: GridChoice::default(),
            method: Method::default(),
            solver: MomentSolver::default(),
            fourier: FourierOptions::default(),
        }
    }
}

/// Samples `χ` on the configured grid, extracts moments and recovers the
/// distribution on `support`.
pub fn reconstruct(
    label: Label,
    support: &[f64],
    chi: impl Fn(f64) -> Result<f64>,
    settings: &ReconstructionSettings,
) -> Result<(ParameterGrid, Vec<f64>, MomentVector, Recovered)> {
    let sigma_max = support.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let grid = settings.grid.grid(settings.n, sigma_max)?;
    let values = grid.nodes.iter().map(|&p| chi(p)).collect::<Result<Vec<f64>>>()?;
    let moments = match settings.solver {
        MomentSolver::Vandermonde => moments_via_vandermonde(&grid, &values)?,
        MomentSolver::Newton => moments_via_newton(&grid, &values)?,
    };
    let recovered = match settings.method {
        Method::Pseudoinverse => pseudoinverse_reconstruct(label, &moments, support)?,
        Method::Fourier => fourier_reconstruct(label, &moments, support, &settings.fourier)?,
    };
    Ok((grid, values, moments, recovered))
}

/// A reconstruction scored against the enumerated distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub grid: ParameterGrid,
    pub chi: Vec<f64>,
    pub moments: MomentVector,
    pub method: Method,
    pub dist: EntropyDistribution,
    pub min_raw_mass: f64,
    pub rmse_moments: f64,
    pub rmse_probs: f64,
}

impl ReconstructionResult {
    /// Scores `dist` against `truth`, comparing moments `k = 1..=k_max` of
    /// the recovered distribution.
    pub fn assess(
        grid: ParameterGrid,
        chi: Vec<f64>,
        moments: MomentVector,
        method: Method,
        recovered: Recovered,
        truth: &EntropyDistribution,
        k_max: u32,
    ) -> Result<Self> {
        let rm = rmse_moments(&truth.moments(k_max), &recovered.dist.moments(k_max), k_max as usize)?;
        let rp = rmse_probs(truth, &recovered.dist)?;
        Ok(Self {
            grid,
            chi,
            moments,
            method,
            dist: recovered.dist,
            min_raw_mass: recovered.min_raw_mass,
            rmse_moments: rm,
            rmse_probs: rp,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_nodes(1, 0.0, 1.0).unwrap().nodes.len(), 1);
        assert_relative_eq!(chebyshev_nodes(1, 0.0, 1.0).unwrap().nodes[0], 0.5, epsilon = 1e-15);
        let g = chebyshev_nodes(2, 0.0, 2.0).unwrap();
        let r = 2f64.sqrt() / 2.0;
        assert_relative_eq!(g.nodes[0], 1.0 + r, epsilon = 1e-15);
        assert_relative_eq!(g.nodes[1], 1.0 - r, epsilon = 1e-15);
        let g = chebyshev_nodes(10, 0.0, 10.0).unwrap();
        for (k, x) in g.nodes.iter().enumerate() {
            let k = (k + 1) as f64;
            let direct = 5.0 + 5.0 * ((2.0 * k - 1.0) * std::f64::consts::PI / 20.0).cos();
            assert_relative_eq!(*x, direct, epsilon = 1e-14);
        }
        assert!(g.nodes.windows(2).all(|w| w[0] > w[1]));
        assert!(matches!(chebyshev_nodes(3, 1.0, 1.0), Err(Error::DegenerateInterval { .. })));
        assert!(chebyshev_nodes(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn vandermonde_examples() {
        let g = ParameterGrid { n: 2, phi_min: 0.0, phi_max: 1.0, nodes: vec![0.0, 1.0] };
        let m = moments_via_vandermonde(&g, &[1.0, 0.0]).unwrap();
        assert_relative_eq!(m.scaled[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(m.scaled[1], -1.0, epsilon = 1e-15);
        assert_relative_eq!(m.moments[1], 1.0, epsilon = 1e-15);

        let g = chebyshev_nodes(6, 0.0, 6.0).unwrap();
        let m = moments_via_vandermonde(&g, &[1.0; 6]).unwrap();
        assert_relative_eq!(m.moments[0], 1.0, epsilon = 1e-10);
        assert!(m.moments[1..].iter().all(|x| x.abs() < 1e-9));

        let bad = ParameterGrid { n: 2, phi_min: 0.0, phi_max: 1.0, nodes: vec![0.5, 0.5] };
        assert_eq!(moments_via_vandermonde(&bad, &[1.0, 1.0]), Err(Error::CoincidentNodes));
    }

    #[test]
    fn newton_examples() {
        let g = chebyshev_nodes(5, 0.0, 5.0).unwrap();
        let eta = divided_differences(&g.nodes, &[1.0; 5]);
        assert_relative_eq!(eta[0], 1.0);
        assert!(eta[1..].iter().all(|e| e.abs() < 1e-15));
        let m = moments_via_newton(&g, &[1.0; 5]).unwrap();
        assert!(m.moments[1..].iter().all(|x| x.abs() < 1e-12));

        let eta = divided_differences(&[1.0, 3.0], &[2.0, 8.0]);
        assert_relative_eq!(eta[1], 3.0);
    }

    #[test]
    fn transform_round_trip() {
        let m = MomentVector::from_moments(vec![1.0, 0.3, 0.2, -0.1]);
        let back = MomentVector::from_scaled(m.scaled.clone(), None);
        for (a, b) in m.moments.iter().zip(&back.moments) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
        assert_relative_eq!(m.scaled[3], 0.1 / 6.0, epsilon = 1e-15);
    }

    fn exact_moments(support: &[f64], probs: &[f64], n: usize) -> MomentVector {
        MomentVector::from_moments(
            (0..n)
                .map(|k| support.iter().zip(probs).map(|(s, p)| p * s.powi(k as i32)).sum())
                .collect(),
        )
    }

    #[test]
    fn fourier_examples() {
        let r = fourier_reconstruct(Label::AB, &exact_moments(&[0.0], &[1.0], 6), &[0.0], &FourierOptions::default()).unwrap();
        assert!((r.dist.probs[0] - 1.0).abs() < 1e-6);

        let s = 0.4;
        let m = exact_moments(&[-s, s], &[0.5, 0.5], 8);
        assert!(m.moments[1].abs() < 1e-15 && m.moments[3].abs() < 1e-15);
        let r = fourier_reconstruct(Label::AB, &m, &[-s, s], &FourierOptions::default()).unwrap();
        assert!((r.dist.probs[0] - r.dist.probs[1]).abs() < 1e-12);
        assert!(r.dist.moment(1).abs() < 1e-12 && r.dist.moment(3).abs() < 1e-12);
    }

    #[test]
    fn pseudoinverse_examples() {
        let s = 0.7;
        let m = MomentVector::from_moments(vec![1.0, 0.0, s * s]);
        let r = pseudoinverse_reconstruct(Label::A, &m, &[s, -s]).unwrap();
        assert_relative_eq!(r.dist.probs[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.dist.probs[1], 0.5, epsilon = 1e-12);

        let m = MomentVector::from_moments(vec![1.0, 0.0, 0.0, 0.0]);
        let r = pseudoinverse_reconstruct(Label::A, &m, &[0.0]).unwrap();
        assert_eq!(r.dist.support, vec![0.0]);
        assert_relative_eq!(r.dist.probs[0], 1.0, epsilon = 1e-12);

        assert!(matches!(
            pseudoinverse_reconstruct(Label::A, &m, &[0.1, 0.1 + 1e-12]),
            Err(Error::DegenerateSupport(..))
        ));
    }

    #[test]
    fn pseudoinverse_falls_back_when_singular() {
        // More support points than moment rows: rank deficient.
        let m = MomentVector::from_moments(vec![1.0, 0.1]);
        let r = pseudoinverse_reconstruct(Label::A, &m, &[-0.2, 0.0, 0.3]).unwrap();
        assert!(r.regularized);
        assert_relative_eq!(r.dist.total_mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse_moments(&[1.0, 2.0], &[1.0, 2.0], 2).unwrap(), 0.0);
        assert_relative_eq!(rmse_moments(&[0.0; 4], &[0.0, 0.3, 0.0, 0.0], 4).unwrap(), 0.15, epsilon = 1e-15);
        let a = EntropyDistribution::from_samples(Label::A, [(0.0, 0.5), (1.0, 0.25), (2.0, 0.25)]);
        assert_eq!(rmse_probs(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b.probs[1] += 0.03;
        assert_relative_eq!(rmse_probs(&a, &b).unwrap(), 0.03 / 3f64.sqrt(), epsilon = 1e-15);
        let c = EntropyDistribution::from_samples(Label::A, [(0.0, 0.5), (1.5, 0.5)]);
        assert!(rmse_probs(&a, &c).is_err());
    }

    #[test]
    fn chebyshev_beats_equispaced() {
        // χ of a skewed four-point distribution; interpolation error at 100
        // off-node points.
        let support = [-0.34, -0.09, 0.06, 0.32];
        let probs = [0.075, 0.325, 0.487, 0.113];
        let chi = |phi: f64| -> f64 { support.iter().zip(&probs).map(|(s, p)| p * (-phi * s).exp()).sum() };
        for n in [6, 8, 10] {
            let err = |g: &ParameterGrid| {
                let vals: Vec<f64> = g.nodes.iter().map(|&x| chi(x)).collect();
                let m = moments_via_newton(g, &vals).unwrap();
                (0..100)
                    .map(|i| {
                        let x = -20.0 + 40.0 * (i as f64 + 0.5) / 100.0;
                        let poly: f64 = m.scaled.iter().enumerate().map(|(k, c)| c * x.powi(k as i32)).sum();
                        (poly - chi(x)).abs()
                    })
                    .fold(0.0, f64::max)
            };
            let cheb = err(&chebyshev_nodes(n, -20.0, 20.0).unwrap());
            let equi = err(&equispaced_nodes(n, -20.0, 20.0).unwrap());
            assert!(cheb < equi, "n={n}: {cheb} vs {equi}");
        }
    }

    proptest! {
        #[test]
        fn distinct_nodes_always_solve(mut xs in proptest::collection::vec(-3.0f64..3.0, 2..7)) {
            xs.sort_by(f64::total_cmp);
            xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let g = ParameterGrid { n: xs.len(), phi_min: -3.0, phi_max: 3.0, nodes: xs.clone() };
            let chi: Vec<f64> = xs.iter().map(|x| (0.2 * x).exp()).collect();
            prop_assert!(moments_via_vandermonde(&g, &chi).is_ok());
        }

        #[test]
        fn vandermonde_and_newton_agree(n in 2usize..9, w in 0.5f64..3.0) {
            let g = chebyshev_nodes(n, -w, w).unwrap();
            let chi: Vec<f64> = g.nodes.iter().map(|x| 0.3 * (-0.5 * x).exp() + 0.7 * (0.2 * x).exp()).collect();
            let a = moments_via_vandermonde(&g, &chi).unwrap();
            let b = moments_via_newton(&g, &chi).unwrap();
            if a.condition_number.unwrap() < 1e10 {
                for (x, y) in a.moments.iter().zip(&b.moments) {
                    prop_assert!((x - y).abs() < 1e-8);
                }
            }
        }
    }
}
