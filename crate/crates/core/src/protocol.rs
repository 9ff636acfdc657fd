//! The two-time measurement scheme: joint outcome probabilities of the
//! forward and backward processes, entropy-production samples and the
//! fluctuation-theorem checks built on them.

use serde::{Deserialize, Serialize};

use crate::channels::{time_reversed, QuantumChannel, TimeReversal};
use crate::distribution::{convolution, EntropyDistribution, Label};
use crate::error::{Error, Result};
use crate::linalg::{
    c, max_abs_diff, partial_trace_matrix, relative_entropy, tensor_product, trace, trace_log,
    von_neumann_entropy, CMatrix, DensityMatrix, Observable, SpectralDecomposition, Subsystem,
};

/// Forward outcomes with less mass than this are not part of the support.
pub const DROP_TOL: f64 = 1e-15;
const PRODUCT_TOL: f64 = 1e-10;

/// Local measurements for a bipartite protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalObservables {
    pub a_in: Observable,
    pub b_in: Observable,
    pub a_fin: Observable,
    pub b_fin: Observable,
}

/// Initial state, two projective measurements and the channel in between.
#[derive(Debug, Clone)]
pub struct TwoTimeProtocol {
    rho0: DensityMatrix,
    obs_in: Observable,
    obs_fin: Observable,
    channel: QuantumChannel,
    local: Option<LocalObservables>,
    theta: TimeReversal,
}

impl TwoTimeProtocol {
    pub fn new(
        rho0: DensityMatrix,
        obs_in: Observable,
        obs_fin: Observable,
        channel: QuantumChannel,
    ) -> Result<Self> {
        let d = rho0.dim();
        for found in [obs_in.dim(), obs_fin.dim(), channel.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        Ok(Self {
            rho0,
            obs_in,
            obs_fin,
            channel,
            local: None,
            theta: TimeReversal::computational(),
        })
    }

    /// Bipartite protocol whose global measurements are the products of the
    /// local ones. `rho0` must carry a partition and the measured initial
    /// state must factorize.
    pub fn bipartite(rho0: DensityMatrix, local: LocalObservables, channel: QuantumChannel) -> Result<Self> {
        let (d_a, d_b) = rho0.partition().ok_or(Error::MissingPartition)?;
        for (found, expected) in [
            (local.a_in.dim(), d_a),
            (local.a_fin.dim(), d_a),
            (local.b_in.dim(), d_b),
            (local.b_fin.dim(), d_b),
        ] {
            if found != expected {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        let obs_in = Observable::product(&local.a_in, &local.b_in);
        let obs_fin = Observable::product(&local.a_fin, &local.b_fin);
        let mut proto = Self::new(rho0, obs_in, obs_fin, channel)?;
        proto.local = Some(local);
        proto.local_initial_states()?;
        Ok(proto)
    }

    pub fn with_time_reversal(mut self, theta: TimeReversal) -> Self {
        self.theta = theta;
        self
    }

    pub fn rho0(&self) -> &DensityMatrix {
        &self.rho0
    }

    pub fn obs_in(&self) -> &Observable {
        &self.obs_in
    }

    pub fn obs_fin(&self) -> &Observable {
        &self.obs_fin
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn local(&self) -> Option<&LocalObservables> {
        self.local.as_ref()
    }

    pub fn time_reversal(&self) -> &TimeReversal {
        &self.theta
    }

    /// `ρ_in = Σ_m Π_m ρ0 Π_m`.
    pub fn rho_in(&self) -> CMatrix {
        self.obs_in.dephase(self.rho0.data())
    }

    /// `ρ_fin = Φ(ρ_in)`.
    pub fn rho_fin(&self) -> CMatrix {
        self.channel.apply_matrix(&self.rho_in())
    }

    /// `ρ_τ = Σ_k p(a^fin_k) Π_k / Tr Π_k`, the reference state of the
    /// backward process.
    pub fn rho_tau(&self) -> CMatrix {
        let p = self.obs_fin.probabilities(&self.rho_fin());
        let d = self.rho0.dim();
        self.obs_fin
            .projectors()
            .iter()
            .zip(p)
            .fold(CMatrix::zeros(d, d), |acc, (proj, pk)| {
                acc + proj * c(pk / trace(proj).re, 0.0)
            })
    }

    /// `(ρ_A,in, ρ_B,in)` after checking that the measured initial state is a
    /// product.
    pub fn local_initial_states(&self) -> Result<(CMatrix, CMatrix)> {
        let (d_a, d_b) = self.rho0.partition().ok_or(Error::MissingPartition)?;
        let rho_in = self.rho_in();
        let ra = partial_trace_matrix(&rho_in, d_a, d_b, Subsystem::A);
        let rb = partial_trace_matrix(&rho_in, d_a, d_b, Subsystem::B);
        let deviation = max_abs_diff(&tensor_product(&ra, &rb), &rho_in);
        if deviation > PRODUCT_TOL {
            return Err(Error::NotProduct { deviation });
        }
        Ok((ra, rb))
    }
}

/// Joint outcome probabilities of the forward (and optionally backward)
/// process, with marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointOutcomeTable {
    /// `p_fwd[k][m] = p(a^fin_k, a^in_m)`.
    pub p_fwd: Vec<Vec<f64>>,
    /// `p_bwd[m][k] = p(a^in_m, a^ref_k)`.
    pub p_bwd: Option<Vec<Vec<f64>>>,
    pub p_in: Vec<f64>,
    /// Final marginal, equal to the reference marginal `p(a^ref)`.
    pub p_fin: Vec<f64>,
}

impl JointOutcomeTable {
    /// `max |p(a^fin_k | a^in_m) − p(a^in_m | a^ref_k)|` over outcomes with
    /// nonzero conditioning mass.
    pub fn conditional_deviation(&self) -> Option<f64> {
        let bwd = self.p_bwd.as_ref()?;
        let mut worst: f64 = 0.0;
        for (k, row) in self.p_fwd.iter().enumerate() {
            for (m, &pf) in row.iter().enumerate() {
                if self.p_in[m] <= DROP_TOL || self.p_fin[k] <= DROP_TOL {
                    continue;
                }
                let fwd = pf / self.p_in[m];
                let back = bwd[m][k] / self.p_fin[k];
                worst = worst.max((fwd - back).abs());
            }
        }
        Some(worst)
    }
}

/// `p(a^fin_k, a^in_m) = Tr[Π^fin_k Φ(Π^in_m ρ0 Π^in_m)]`.
pub fn forward_joint(proto: &TwoTimeProtocol) -> JointOutcomeTable {
    let rho0 = proto.rho0.data();
    let mut p_fwd = vec![vec![0.0; proto.obs_in.len()]; proto.obs_fin.len()];
    let mut p_in = Vec::with_capacity(proto.obs_in.len());
    for (m, pm) in proto.obs_in.projectors().iter().enumerate() {
        let branch = pm * rho0 * pm;
        p_in.push(trace(&branch).re);
        let out = proto.channel.apply_matrix(&branch);
        for (k, pk) in proto.obs_fin.projectors().iter().enumerate() {
            p_fwd[k][m] = trace(&(pk * &out)).re;
        }
    }
    let p_fin = p_fwd.iter().map(|row| row.iter().sum()).collect();
    JointOutcomeTable {
        p_fwd,
        p_bwd: None,
        p_in,
        p_fin,
    }
}

/// Adds the backward table by evaluating the time-reversed process
/// explicitly: `p(a^in_m, a^ref_k) = Tr[Π̃^in_m Φ̃(Π̃^ref_k ρ̃_τ Π̃^ref_k)]`.
pub fn backward_joint(proto: &TwoTimeProtocol) -> Result<JointOutcomeTable> {
    let mut table = forward_joint(proto);
    let reversed = time_reversed(&proto.channel, &proto.theta)?;
    let theta = &proto.theta;
    let rho_ref = theta.conjugate(&proto.rho_tau());
    let in_tilde: Vec<CMatrix> = proto.obs_in.projectors().iter().map(|p| theta.conjugate(p)).collect();
    let mut p_bwd = vec![vec![0.0; proto.obs_fin.len()]; proto.obs_in.len()];
    for (k, pk) in proto.obs_fin.projectors().iter().enumerate() {
        let pk = theta.conjugate(pk);
        let out = reversed.apply_matrix(&(&pk * &rho_ref * &pk));
        for (m, pm) in in_tilde.iter().enumerate() {
            p_bwd[m][k] = trace(&(pm * &out)).re;
        }
    }
    table.p_bwd = Some(p_bwd);
    Ok(table)
}

/// Backward table from the forward conditionals, assuming
/// `p(a^in_m | a^ref_k) = Tr[Π_k Φ(Π_m)]` for rank-one projectors of a
/// unital channel. Cross-check for [`backward_joint`].
pub fn backward_joint_symbolic(proto: &TwoTimeProtocol) -> Result<JointOutcomeTable> {
    if !proto.channel.is_unital() {
        return Err(Error::NotUnital {
            deviation: proto.channel.unital_deviation(),
        });
    }
    let mut table = forward_joint(proto);
    let mut p_bwd = vec![vec![0.0; proto.obs_fin.len()]; proto.obs_in.len()];
    for (m, pm) in proto.obs_in.projectors().iter().enumerate() {
        let out = proto.channel.apply_matrix(pm);
        for (k, pk) in proto.obs_fin.projectors().iter().enumerate() {
            p_bwd[m][k] = trace(&(pk * &out)).re * table.p_fin[k];
        }
    }
    table.p_bwd = Some(p_bwd);
    Ok(table)
}

/// Entropy-production distribution plus bookkeeping for excluded outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySamples {
    pub dist: EntropyDistribution,
    /// Outcome pairs dropped because their forward mass was below 1e-15.
    pub dropped: usize,
    /// Forward mass landing on reference outcomes of zero probability
    /// (σ = +∞), kept out of `dist`.
    pub irreversible_mass: f64,
}

fn samples_from(
    label: Label,
    p_in: &[f64],
    p_ref: &[f64],
    p_fwd: &[Vec<f64>],
) -> Result<EntropySamples> {
    let mut pts = Vec::new();
    let mut dropped = 0;
    let mut irreversible_mass = 0.0;
    for (k, row) in p_fwd.iter().enumerate() {
        for (m, &p) in row.iter().enumerate() {
            if p < DROP_TOL {
                dropped += 1;
                continue;
            }
            if p_in[m] <= 0.0 {
                return Err(Error::InconsistentOutcome { outcome: m, mass: p });
            }
            if p_ref[k] <= 0.0 {
                irreversible_mass += p;
                continue;
            }
            pts.push((p_in[m].ln() - p_ref[k].ln(), p));
        }
    }
    Ok(EntropySamples {
        dist: EntropyDistribution::from_samples(label, pts),
        dropped,
        irreversible_mass,
    })
}

/// `σ(k, m) = ln p(a^in_m) − ln p(a^ref_k)` weighted by the forward joint.
pub fn entropy_samples(table: &JointOutcomeTable) -> Result<EntropySamples> {
    samples_from(Label::AB, &table.p_in, &table.p_fin, &table.p_fwd)
}

/// Distribution of `σ̃ = ln p(a^ref_k) − ln p(a^in_m)` under the backward
/// joint probabilities.
pub fn backward_distribution(table: &JointOutcomeTable) -> Result<EntropyDistribution> {
    let bwd = table.p_bwd.as_ref().ok_or_else(|| {
        Error::InvalidParameter {
            name: "p_bwd",
            reason: "table has no backward probabilities".into(),
        }
    })?;
    let mut pts = Vec::new();
    for (m, row) in bwd.iter().enumerate() {
        for (k, &p) in row.iter().enumerate() {
            if p < DROP_TOL || table.p_in[m] <= 0.0 || table.p_fin[k] <= 0.0 {
                continue;
            }
            pts.push((table.p_fin[k].ln() - table.p_in[m].ln(), p));
        }
    }
    Ok(EntropyDistribution::from_samples(Label::AB, pts))
}

/// `⟨σ⟩` evaluated three independent ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEntropy {
    /// `Σ_i σ_i Prob(σ_i)`.
    pub sample: f64,
    /// `S(ρ_τ) − S(ρ_in)`.
    pub entropy_difference: f64,
    /// `−Tr[ρ_fin ln ρ_τ] − S(ρ_in)`.
    pub cross_entropy: f64,
}

impl MeanEntropy {
    pub fn max_disagreement(&self) -> f64 {
        let v = [self.sample, self.entropy_difference, self.cross_entropy];
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

pub fn mean_entropy(proto: &TwoTimeProtocol) -> Result<MeanEntropy> {
    let samples = entropy_samples(&forward_joint(proto))?;
    let rho_in = DensityMatrix::from_noisy(proto.rho_in())?;
    let rho_tau = DensityMatrix::from_noisy(proto.rho_tau())?;
    let s_in = von_neumann_entropy(&rho_in);
    Ok(MeanEntropy {
        sample: samples.dist.mean(),
        entropy_difference: von_neumann_entropy(&rho_tau) - s_in,
        cross_entropy: -trace_log(&proto.rho_fin(), rho_tau.data()) - s_in,
    })
}

/// Outcome of the `0 ≤ S(ρ_fin‖ρ_τ) ≤ ⟨σ⟩` check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub relative_entropy: f64,
    pub mean_sigma: f64,
    /// Whether every final projector commutes with `ρ_fin` (within 1e-10),
    /// in which case the relative entropy must vanish.
    pub commuting: bool,
    pub pass: bool,
}

pub fn theorem2_check(proto: &TwoTimeProtocol) -> Result<Theorem2Report> {
    let rho_fin = DensityMatrix::from_noisy(proto.rho_fin())?;
    let rho_tau = DensityMatrix::from_noisy(proto.rho_tau())?;
    let s_rel = relative_entropy(&rho_fin, &rho_tau);
    let mean_sigma = mean_entropy(proto)?.cross_entropy;
    let commuting = proto.obs_fin.projectors().iter().all(|p| {
        let comm = p * rho_fin.data() - rho_fin.data() * p;
        comm.iter().all(|z| z.norm() <= 1e-10)
    });
    let mut pass = s_rel >= -1e-10 && s_rel <= mean_sigma + 1e-10;
    if commuting {
        pass &= s_rel <= 1e-10;
    }
    Ok(Theorem2Report {
        relative_entropy: s_rel,
        mean_sigma,
        commuting,
        pass,
    })
}

/// Largest violation of `Prob(σ̃ = −Γ) = e^{−Γ} Prob(σ = Γ)` over both supports.
pub fn crooks_deviation(
    forward: &EntropyDistribution,
    backward: &EntropyDistribution,
) -> f64 {
    const MATCH_TOL: f64 = 1e-9;
    let mut worst: f64 = 0.0;
    for (g, p) in forward.pairs() {
        let q = backward.prob_at(-g, MATCH_TOL);
        worst = worst.max((q - (-g).exp() * p).abs());
    }
    for (s, q) in backward.pairs() {
        if forward.prob_at(-s, MATCH_TOL) == 0.0 {
            worst = worst.max(q.abs());
        }
    }
    worst
}

pub fn crooks_check(proto: &TwoTimeProtocol) -> Result<f64> {
    let table = backward_joint(proto)?;
    let fwd = entropy_samples(&table)?.dist;
    let bwd = backward_distribution(&table)?;
    Ok(crooks_deviation(&fwd, &bwd))
}

/// `|⟨e^{−σ}⟩ − 1|`.
pub fn integral_ft_residual(dist: &EntropyDistribution) -> f64 {
    (dist.mgf(1.0) - 1.0).abs()
}

/// Local, global and convolved entropy-production distributions of a
/// bipartite protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteDistributions {
    pub a: EntropyDistribution,
    pub b: EntropyDistribution,
    pub ab: EntropyDistribution,
    pub a_plus_b: EntropyDistribution,
    /// Outcome pairs dropped from the global table (mass below 1e-15).
    pub dropped: usize,
}

impl BipartiteDistributions {
    pub fn get(&self, label: Label) -> &EntropyDistribution {
        match label {
            Label::A => &self.a,
            Label::B => &self.b,
            Label::AB => &self.ab,
            Label::APlusB => &self.a_plus_b,
        }
    }

    /// `⟨σ_A⟩ + ⟨σ_B⟩ − ⟨σ_{A−B}⟩`, nonnegative by sub-additivity.
    pub fn subadditivity_gap(&self) -> f64 {
        self.a.mean() + self.b.mean() - self.ab.mean()
    }
}

/// One local joint table: `p(k, m) = Tr[(Π^fin_k ⊗ 1) Φ(Π^in_m ρ_in,A Π^in_m ⊗ ρ_in,B)]`
/// (or the mirrored form for `B`).
fn local_table(
    proto: &TwoTimeProtocol,
    obs_in: &Observable,
    obs_fin: &Observable,
    own: &CMatrix,
    other: &CMatrix,
    side: Subsystem,
) -> JointOutcomeTable {
    let (d_a, d_b) = proto.rho0.partition().expect("checked by caller");
    let lift = |x: &CMatrix, y: &CMatrix| match side {
        Subsystem::A => tensor_product(x, y),
        Subsystem::B => tensor_product(y, x),
    };
    let other_dim = if side == Subsystem::A { d_b } else { d_a };
    let id_other = crate::linalg::identity(other_dim);
    let mut p_fwd = vec![vec![0.0; obs_in.len()]; obs_fin.len()];
    let mut p_in = Vec::with_capacity(obs_in.len());
    for (m, pm) in obs_in.projectors().iter().enumerate() {
        let branch = pm * own * pm;
        p_in.push(trace(&branch).re);
        let out = proto.channel.apply_matrix(&lift(&branch, other));
        for (k, pk) in obs_fin.projectors().iter().enumerate() {
            p_fwd[k][m] = trace(&(lift(pk, &id_other) * &out)).re;
        }
    }
    let p_fin = p_fwd.iter().map(|row| row.iter().sum()).collect();
    JointOutcomeTable {
        p_fwd,
        p_bwd: None,
        p_in,
        p_fin,
    }
}

pub fn bipartite_distributions(proto: &TwoTimeProtocol) -> Result<BipartiteDistributions> {
    let local = proto.local.as_ref().ok_or(Error::MissingBipartiteObservables)?;
    let (ra, rb) = proto.local_initial_states()?;
    let ta = local_table(proto, &local.a_in, &local.a_fin, &ra, &rb, Subsystem::A);
    let tb = local_table(proto, &local.b_in, &local.b_fin, &rb, &ra, Subsystem::B);
    let a = samples_from(Label::A, &ta.p_in, &ta.p_fin, &ta.p_fwd)?.dist;
    let b = samples_from(Label::B, &tb.p_in, &tb.p_fin, &tb.p_fwd)?.dist;
    let global = entropy_samples(&forward_joint(proto))?;
    let a_plus_b = convolution(&a, &b);
    Ok(BipartiteDistributions {
        a,
        b,
        ab: global.dist,
        a_plus_b,
        dropped: global.dropped,
    })
}

/// Moment gaps between the global and the convolved distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationWitness {
    /// `|⟨σ_{A−B}^k⟩ − ⟨σ_{A+B}^k⟩|` for `k = 1..4`.
    pub moment_gaps: Vec<f64>,
    /// Any gap above 1e-8; implies the final state is not a product.
    pub distinct: bool,
}

pub fn correlation_witness(ab: &EntropyDistribution, a_plus_b: &EntropyDistribution) -> CorrelationWitness {
    let moment_gaps: Vec<f64> = (1..=4)
        .map(|k| (ab.moment(k) - a_plus_b.moment(k)).abs())
        .collect();
    let distinct = moment_gaps.iter().any(|&g| g > 1e-8);
    CorrelationWitness {
        moment_gaps,
        distinct,
    }
}

/// Mean work, heat and free-energy change for a thermal initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub beta: f64,
    /// `Tr[ρ_fin H(τ)] − Tr[ρ_in H(0)]`.
    pub mean_work: f64,
    /// `Tr[(Φ − 1)(ρ_in) H(τ)]`.
    pub mean_heat: f64,
    /// `F(τ) − F(0)` with `F = −ln Z / β`.
    pub free_energy_delta: f64,
    pub mean_sigma: f64,
    /// `S(ρ_fin‖ρ_τ)`.
    pub relative_entropy_reference: f64,
    /// `S(ρ_fin‖ρ_τ^th)` against the Gibbs state of `H(τ)`.
    pub relative_entropy_thermal: f64,
    /// `|⟨σ⟩ − S(ρ_fin‖ρ_τ) − β(⟨W⟩ − ΔF) + S(ρ_fin‖ρ_τ^th)|`.
    pub identity_residual: f64,
}

impl ThermoReport {
    /// `β(⟨W⟩ − ΔF)`.
    pub fn dissipated_work(&self) -> f64 {
        self.beta * (self.mean_work - self.free_energy_delta)
    }

    /// `β(⟨W⟩ − ΔF) ≥ S(ρ_fin‖ρ_τ^th) − 1e-9`.
    pub fn holds(&self) -> bool {
        self.dissipated_work() >= self.relative_entropy_thermal - 1e-9
    }
}

/// `(ρ_Gibbs, ln Z)` computed with a shifted spectrum to avoid overflow.
pub fn gibbs_state(h: &CMatrix, beta: f64) -> (CMatrix, f64) {
    let spec = SpectralDecomposition::of_hermitian(h);
    let e_min = spec.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let z_shift: f64 = spec.eigenvalues.iter().map(|e| (-beta * (e - e_min)).exp()).sum();
    let rho = spec.apply(|e| c((-beta * (e - e_min)).exp() / z_shift, 0.0));
    (rho, -beta * e_min + z_shift.ln())
}

/// Runs the protocol's channel and final measurement from the Gibbs state of
/// `h0`, measured in the eigenbasis of `h0`.
pub fn second_law_report(
    proto: &TwoTimeProtocol,
    h0: &CMatrix,
    h_tau: &CMatrix,
    beta: f64,
) -> Result<ThermoReport> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("must be positive, got {beta}"),
        });
    }
    let d = proto.rho0.dim();
    if h0.nrows() != d || h_tau.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h0.nrows().max(h_tau.nrows()),
        });
    }
    if !proto.channel.is_unital() {
        return Err(Error::NotUnital {
            deviation: proto.channel.unital_deviation(),
        });
    }
    let (rho_in, ln_z0) = gibbs_state(h0, beta);
    let ln_zt = gibbs_state(h_tau, beta).1;
    let basis = SpectralDecomposition::of_hermitian(h0).eigenvectors;
    let obs_in = Observable::from_basis(&basis, None)?;
    let thermal = TwoTimeProtocol::new(
        DensityMatrix::from_noisy(rho_in.clone())?,
        obs_in,
        proto.obs_fin.clone(),
        proto.channel.clone(),
    )?;
    let rho_in = thermal.rho_in();
    let rho_fin = thermal.rho_fin();
    let e = |rho: &CMatrix, h: &CMatrix| trace(&(rho * h)).re;
    let mean_work = e(&rho_fin, h_tau) - e(&rho_in, h0);
    let mean_heat = e(&rho_fin, h_tau) - e(&rho_in, h_tau);
    let free_energy_delta = -(ln_zt - ln_z0) / beta;
    let mean_sigma = mean_entropy(&thermal)?.cross_entropy;
    let fin = DensityMatrix::from_noisy(rho_fin)?;
    let s_ref = relative_entropy(&fin, &DensityMatrix::from_noisy(thermal.rho_tau())?);
    // ln ρ_τ^th = −β H(τ) − ln Z_τ exactly; the spectral route would cut off
    // Boltzmann weights below 1e-14 at large β.
    let s_th = -von_neumann_entropy(&fin) + beta * e(fin.data(), h_tau) + ln_zt;
    let identity_residual =
        (mean_sigma - s_ref - beta * (mean_work - free_energy_delta) + s_th).abs();
    Ok(ThermoReport {
        beta,
        mean_work,
        mean_heat,
        free_energy_delta,
        mean_sigma,
        relative_entropy_reference: s_ref,
        relative_entropy_thermal: s_th,
        identity_residual,
    })
}
