//! CPTP maps in Kraus form, antiunitary time reversal, the Mølmer–Sørensen
//! gate and a fixed-step RK4 integrator for dephasing Lindblad models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_part, identity, max_abs_diff, tensor_product, trace, CMatrix,
    DensityMatrix, SpectralDecomposition, C64,
};

const TP_TOL: f64 = 1e-10;
const UNITAL_TOL: f64 = 1e-10;
const DRIFT_LIMIT: f64 = 1e-6;
const CHOI_CLIP: f64 = 1e-8;

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `Π_0 = |0⟩⟨0|` on a qubit.
pub fn ground_projector() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)])
}

/// Trace-preserving map `ρ ↦ Σ_u E_u ρ E_u†`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    unital_deviation: f64,
}

impl QuantumChannel {
    /// Checks `Σ E†E = 1` within 1e-10 and records how far `Σ E E†` is from 1.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
        let d = first.nrows();
        let mut tp = CMatrix::zeros(d, d);
        let mut un = CMatrix::zeros(d, d);
        for k in &kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: k.nrows().max(k.ncols()),
                });
            }
            tp += k.adjoint() * k;
            un += k * k.adjoint();
        }
        let tp_dev = max_abs_diff(&tp, &identity(d));
        if tp_dev > TP_TOL {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving (deviation {tp_dev:.3e})"
            )));
        }
        Ok(Self {
            kraus,
            unital_deviation: max_abs_diff(&un, &identity(d)),
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::unitary(identity(d)).expect("identity is unitary")
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `ρ ↦ Σ_i w_i U_i ρ U_i†` with weights normalized to one.
    pub fn mixed_unitary(weights: &[f64], unitaries: &[CMatrix]) -> Result<Self> {
        if weights.len() != unitaries.len() || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidChannel("need one nonnegative weight per unitary".into()));
        }
        let total: f64 = weights.iter().sum();
        Self::new(
            weights
                .iter()
                .zip(unitaries)
                .filter(|(&w, _)| w > 0.0)
                .map(|(&w, u)| u * c((w / total).sqrt(), 0.0))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn is_unital(&self) -> bool {
        self.unital_deviation <= UNITAL_TOL
    }

    pub fn unital_deviation(&self) -> f64 {
        self.unital_deviation
    }

    /// Action on an arbitrary operator (the map is linear, not only on states).
    pub fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        let d = self.dim();
        self.kraus
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k * x * k.adjoint())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        let out = DensityMatrix::from_noisy(self.apply_matrix(rho.data()))?;
        match rho.partition() {
            Some((a, b)) => out.with_partition(a, b),
            None => Ok(out),
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &QuantumChannel) -> Result<Self> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        Self::new(kraus)
    }
}

/// Antiunitary `Θ = U K`: complex conjugation in the basis given by the
/// columns of `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeReversal {
    basis: CMatrix,
}

impl Default for TimeReversal {
    fn default() -> Self {
        Self { basis: identity(0) }
    }
}

impl TimeReversal {
    pub fn computational() -> Self {
        Self::default()
    }

    pub fn in_basis(u: CMatrix) -> Result<Self> {
        let dev = max_abs_diff(&(u.adjoint() * &u), &identity(u.ncols()));
        if !u.is_square() || dev > 1e-10 {
            return Err(Error::InvalidChannel(format!(
                "time-reversal basis is not unitary (deviation {dev:.3e})"
            )));
        }
        Ok(Self { basis: u })
    }

    fn basis_for(&self, d: usize) -> CMatrix {
        if self.basis.nrows() == 0 {
            identity(d)
        } else {
            self.basis.clone()
        }
    }

    /// `Θ|ψ⟩`.
    pub fn apply_vector(&self, psi: &nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
        self.basis_for(psi.len()) * psi.map(|z| z.conj())
    }

    /// `Θ X Θ†`.
    pub fn conjugate(&self, x: &CMatrix) -> CMatrix {
        let u = self.basis_for(x.nrows());
        &u * x.map(|z| z.conj()) * u.adjoint()
    }
}

/// Kraus set `Ẽ_u = Θ E_u† Θ†`; defined for unital channels only.
pub fn time_reversed(channel: &QuantumChannel, theta: &TimeReversal) -> Result<QuantumChannel> {
    if !channel.is_unital() {
        return Err(Error::NotUnital {
            deviation: channel.unital_deviation(),
        });
    }
    QuantumChannel::new(
        channel
            .kraus()
            .iter()
            .map(|e| theta.conjugate(&e.adjoint()))
            .collect(),
    )
}

/// `U(φ) = cos φ · 1 − i sin φ · X⊗X`.
pub fn ms_unitary(phi: f64) -> CMatrix {
    identity(4) * c(phi.cos(), 0.0) - tensor_product(&pauli_x(), &pauli_x()) * c(0.0, phi.sin())
}

pub fn ms_gate(phi: f64) -> QuantumChannel {
    QuantumChannel::unitary(ms_unitary(phi)).expect("MS gate is unitary")
}

/// Time-independent Lindblad generator
/// `ρ̇ = −i[H,ρ] − Σ_C Γ_C({ρ, L_C†L_C} − 2 L_C ρ L_C†)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    hamiltonian: CMatrix,
    jumps: Vec<(CMatrix, f64)>,
}

impl LindbladModel {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<(CMatrix, f64)>) -> Result<Self> {
        let d = hamiltonian.nrows();
        if !hamiltonian.is_square() || max_abs_diff(&hamiltonian, &hamiltonian.adjoint()) > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "H",
                reason: "Hamiltonian must be square and Hermitian".into(),
            });
        }
        for (l, g) in &jumps {
            if l.nrows() != d || l.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: l.nrows(),
                });
            }
            if !(*g >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "gamma",
                    reason: format!("dephasing rate must be nonnegative, got {g}"),
                });
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    /// Two ions: `H = (φ/τ) X⊗X`, `L_A = Π_0 ⊗ 1`, `L_B = 1 ⊗ Π_0`, equal rates.
    pub fn two_ion(phi: f64, tau: f64, gamma: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tau",
                reason: format!("must be positive, got {tau}"),
            });
        }
        let omega = phi / tau;
        let h = tensor_product(&pauli_x(), &pauli_x()) * c(omega, 0.0);
        let la = tensor_product(&ground_projector(), &identity(2));
        let lb = tensor_product(&identity(2), &ground_projector());
        Self::new(h, vec![(la, gamma), (lb, gamma)])
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[(CMatrix, f64)] {
        &self.jumps
    }

    /// Right-hand side of the master equation evaluated on any operator.
    pub fn generator(&self, rho: &CMatrix) -> CMatrix {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * c(0.0, -1.0);
        for (l, g) in &self.jumps {
            if *g == 0.0 {
                continue;
            }
            let ldl = l.adjoint() * l;
            let anti = &ldl * rho + rho * &ldl;
            out -= (anti - l * rho * l.adjoint() * c(2.0, 0.0)) * c(*g, 0.0);
        }
        out
    }

    /// Generator as a `d²×d²` matrix on row-major vectorized operators.
    pub fn superoperator(&self) -> CMatrix {
        let d = self.dim();
        let mut s = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(i, j)] = c(1.0, 0.0);
                let out = self.generator(&e);
                for a in 0..d {
                    for b in 0..d {
                        s[(a * d + b, i * d + j)] = out[(a, b)];
                    }
                }
            }
        }
        s
    }
}

/// Output of [`lindblad_propagate`] with the size of every correction applied.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub state: DensityMatrix,
    pub steps: usize,
    /// `|Tr ρ − 1|` before renormalization.
    pub trace_drift: f64,
    /// Largest entry of `(ρ − ρ†)/2` removed by re-Hermitization.
    pub hermiticity_correction: f64,
}

/// Splits `[0, τ]` into full steps of `dt` plus one trailing partial step.
fn step_plan(tau: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("must be positive, got {dt}"),
        });
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("must be nonnegative, got {tau}"),
        });
    }
    let ratio = tau / dt;
    let mut n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        n = ratio.floor();
    }
    let rest = tau - n * dt;
    let rest = if rest.abs() <= 1e-12 * dt { 0.0 } else { rest };
    Ok((n as usize, rest))
}

fn rk4_step(model: &LindbladModel, rho: &CMatrix, h: f64) -> CMatrix {
    let hc = c(h, 0.0);
    let half = c(0.5 * h, 0.0);
    let k1 = model.generator(rho);
    let k2 = model.generator(&(rho + &k1 * half));
    let k3 = model.generator(&(rho + &k2 * half));
    let k4 = model.generator(&(rho + &k3 * hc));
    rho + (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0)
}

/// Fixed-step RK4 from 0 to `tau`. The result is re-Hermitized and
/// trace-renormalized; trace drift above 1e-6 is an error.
pub fn lindblad_propagate(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    tau: f64,
    dt: f64,
) -> Result<Propagation> {
    if rho0.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: rho0.dim(),
        });
    }
    let (n, rest) = step_plan(tau, dt)?;
    let mut rho = rho0.data().clone();
    for _ in 0..n {
        rho = rk4_step(model, &rho, dt);
    }
    if rest > 0.0 {
        rho = rk4_step(model, &rho, rest);
    }
    let trace_drift = (trace(&rho) - c(1.0, 0.0)).norm();
    if trace_drift > DRIFT_LIMIT {
        return Err(Error::IntegratorAccuracy { drift: trace_drift });
    }
    let herm = hermitian_part(&rho);
    let hermiticity_correction = max_abs_diff(&herm, &rho);
    let mut state = DensityMatrix::from_noisy(herm)?;
    if let Some((a, b)) = rho0.partition() {
        state = state.with_partition(a, b)?;
    }
    Ok(Propagation {
        state,
        steps: n + usize::from(rest > 0.0),
        trace_drift,
        hermiticity_correction,
    })
}

/// One RK4 step of a linear generator as a superoperator:
/// `1 + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24`.
fn rk4_step_superoperator(l: &CMatrix, h: f64) -> CMatrix {
    let n = l.nrows();
    let hl = l * c(h, 0.0);
    let mut term = identity(n);
    let mut out = identity(n);
    for k in 1..=4 {
        term = &term * &hl / c(k as f64, 0.0);
        out += &term;
    }
    out
}

fn mat_pow(m: &CMatrix, mut e: usize) -> CMatrix {
    let mut base = m.clone();
    let mut acc = identity(m.nrows());
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

/// Kraus form of the map `ρ(0) ↦ ρ(τ)` produced by the same RK4 scheme as
/// [`lindblad_propagate`], extracted from its Choi matrix.
pub fn kraus_from_lindblad_endpoint(
    model: &LindbladModel,
    tau: f64,
    dt: f64,
) -> Result<QuantumChannel> {
    let (n, rest) = step_plan(tau, dt)?;
    let d = model.dim();
    let l = model.superoperator();
    let mut s = mat_pow(&rk4_step_superoperator(&l, dt), n);
    if rest > 0.0 {
        s = rk4_step_superoperator(&l, rest) * s;
    }

    // J[(i d + a), (j d + b)] = Φ(|i⟩⟨j|)[a, b]
    let mut choi = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let col = i * d + j;
            for a in 0..d {
                for b in 0..d {
                    choi[(i * d + a, j * d + b)] = s[(a * d + b, col)];
                }
            }
        }
    }
    let spec = SpectralDecomposition::of_hermitian(&choi);
    let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -CHOI_CLIP {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: min });
    }
    let scale = spec.eigenvalues[0].max(1.0);
    let mut kraus = Vec::new();
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        if lam <= 1e-14 * scale {
            continue;
        }
        let v = spec.eigenvectors.column(k);
        let root = c(lam.sqrt(), 0.0);
        kraus.push(CMatrix::from_fn(d, d, |a, i| v[i * d + a] * root));
    }

    // K ← K S^{-1/2} with S = Σ K†K restores exact trace preservation.
    let tp = kraus
        .iter()
        .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
    let inv_sqrt = SpectralDecomposition::of_hermitian(&tp).apply(|x| c(1.0 / x.sqrt(), 0.0));
    QuantumChannel::new(kraus.into_iter().map(|k| k * &inv_sqrt).collect())
}

/// Which evolution drives the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    Unitary,
    Lindblad,
}

impl std::str::FromStr for Dynamics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unitary" => Ok(Self::Unitary),
            "lindblad" => Ok(Self::Lindblad),
            other => Err(Error::InvalidParameter {
                name: "dynamics",
                reason: format!("expected `unitary` or `lindblad`, got `{other}`"),
            }),
        }
    }
}
