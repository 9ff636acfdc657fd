//! Characteristic and moment-generating functions of entropy production,
//! from operator traces and from the occupation-probability procedure.

use serde::{Deserialize, Serialize};

use crate::distribution::Label;
use crate::error::{Error, Result};
use crate::linalg::{c, identity, matrix_power, tensor_product, trace, CMatrix, Observable, C64};
use crate::protocol::TwoTimeProtocol;

const IMAG_TOL: f64 = 1e-10;

/// A characteristic-function value plus the number of zero modes dropped
/// when raising a state to a power with non-positive real part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharValue {
    pub value: C64,
    pub dropped_modes: usize,
}

/// The pieces each subsystem needs: initial and final measured states,
/// final measurement and how to lift operators to the full space.
struct Sides {
    rho_in: CMatrix,
    rho_tau: CMatrix,
    obs_fin: Observable,
    other: Option<(CMatrix, Label)>,
}

fn local_tau(proto: &TwoTimeProtocol, obs: &Observable, label: Label) -> CMatrix {
    let (d_a, d_b) = proto.rho0().partition().expect("bipartite protocol");
    let fin = proto.rho_fin();
    let d = obs.dim();
    obs.projectors().iter().fold(CMatrix::zeros(d, d), |acc, p| {
        let lifted = lift(p, &identity(if label == Label::A { d_b } else { d_a }), label);
        let pk = trace(&(lifted * &fin)).re;
        acc + p * c(pk / trace(p).re, 0.0)
    })
}

fn lift(own: &CMatrix, other: &CMatrix, label: Label) -> CMatrix {
    match label {
        Label::B => tensor_product(other, own),
        _ => tensor_product(own, other),
    }
}

fn sides(proto: &TwoTimeProtocol, label: Label) -> Result<Sides> {
    match label {
        Label::AB => Ok(Sides {
            rho_in: proto.rho_in(),
            rho_tau: proto.rho_tau(),
            obs_fin: proto.obs_fin().clone(),
            other: None,
        }),
        Label::A | Label::B => {
            let local = proto.local().ok_or(Error::MissingBipartiteObservables)?;
            let (ra, rb) = proto.local_initial_states()?;
            let (own, other, obs) = if label == Label::A {
                (ra, rb, &local.a_fin)
            } else {
                (rb, ra, &local.b_fin)
            };
            Ok(Sides {
                rho_tau: local_tau(proto, obs, label),
                rho_in: own,
                obs_fin: obs.clone(),
                other: Some((other, label)),
            })
        }
        Label::APlusB => Err(Error::InvalidParameter {
            name: "subsystem",
            reason: "A+B is a convolution; evaluate A and B separately".into(),
        }),
    }
}

/// `G_C(λ)`: for `C = A`,
/// `Tr{[(ρ_A,τ)^{−iλ} ⊗ 1] Φ[(ρ_A,in)^{1+iλ} ⊗ ρ_B,in]}`, mirrored for `B`,
/// and `Tr[ρ_τ^{−iλ} Φ(ρ_in^{1+iλ})]` for the global `A−B`. `A+B` is the
/// product `G_A G_B`.
pub fn char_function(proto: &TwoTimeProtocol, label: Label, lambda: C64) -> Result<CharValue> {
    if label == Label::APlusB {
        let a = char_function(proto, Label::A, lambda)?;
        let b = char_function(proto, Label::B, lambda)?;
        return Ok(CharValue {
            value: a.value * b.value,
            dropped_modes: a.dropped_modes + b.dropped_modes,
        });
    }
    let s = sides(proto, label)?;
    let i = c(0.0, 1.0);
    let p_in = matrix_power(&s.rho_in, c(1.0, 0.0) + i * lambda);
    let p_tau = matrix_power(&s.rho_tau, -i * lambda);
    let (input, observable) = match &s.other {
        None => (p_in.matrix, p_tau.matrix),
        Some((other, label)) => {
            let id = identity(other.nrows());
            (lift(&p_in.matrix, other, *label), lift(&p_tau.matrix, &id, *label))
        }
    };
    let out = proto.channel().apply_matrix(&input);
    Ok(CharValue {
        value: trace(&(observable * out)),
        dropped_modes: p_in.dropped_modes + p_tau.dropped_modes,
    })
}

fn real_part(v: C64) -> Result<f64> {
    if v.im.abs() > IMAG_TOL * v.re.abs().max(1.0) {
        return Err(Error::InvalidParameter {
            name: "phi",
            reason: format!("moment-generating value has imaginary residue {:.3e}", v.im),
        });
    }
    Ok(v.re)
}

/// `χ_C(φ) = ⟨e^{−φσ_C}⟩ = G_C(iφ)`.
pub fn moment_generating(proto: &TwoTimeProtocol, label: Label, phi: f64) -> Result<f64> {
    real_part(char_function(proto, label, c(0.0, phi))?.value)
}

/// Result of the three-step occupation-probability procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredChi {
    pub chi: f64,
    /// `Tr[(ρ_in)^{1−φ}]` divided out when preparing `ρ_IN(φ)` and
    /// multiplied back at the end.
    pub normalization: f64,
    pub dropped_modes: usize,
}

/// Prepares `ρ_IN(φ) ∝ (ρ_C,in)^{1−φ}` (tensored with the untouched side
/// for local `C`), evolves it, and combines final occupations with
/// `p(x^fin_k)^φ`.
pub fn simulate_measurement_path(proto: &TwoTimeProtocol, label: Label, phi: f64) -> Result<MeasuredChi> {
    if label == Label::APlusB {
        let a = simulate_measurement_path(proto, Label::A, phi)?;
        let b = simulate_measurement_path(proto, Label::B, phi)?;
        return Ok(MeasuredChi {
            chi: a.chi * b.chi,
            normalization: a.normalization * b.normalization,
            dropped_modes: a.dropped_modes + b.dropped_modes,
        });
    }
    let s = sides(proto, label)?;
    // Step 1: final occupations of the undeformed protocol.
    let p_fin: Vec<f64> = s
        .obs_fin
        .projectors()
        .iter()
        .map(|p| trace(&(p * &s.rho_tau)).re)
        .collect();
    // Step 2: deformed preparation.
    let deformed = matrix_power(&s.rho_in, c(1.0 - phi, 0.0));
    let z = trace(&deformed.matrix).re;
    let prepared = deformed.matrix / c(z, 0.0);
    let prepared = match &s.other {
        None => prepared,
        Some((other, label)) => lift(&prepared, other, *label),
    };
    // Step 3: evolve and read occupations.
    let fin = proto.channel().apply_matrix(&prepared);
    let mut dropped = deformed.dropped_modes;
    let mut chi = 0.0;
    for (p, &pk) in s.obs_fin.projectors().iter().zip(&p_fin) {
        let proj = match &s.other {
            None => p.clone(),
            Some((other, label)) => lift(p, &identity(other.nrows()), *label),
        };
        let occupation = trace(&(proj * &fin)).re;
        if pk > 1e-14 {
            chi += pk.powf(phi) * occupation;
        } else if phi <= 0.0 {
            dropped += 1;
        }
    }
    Ok(MeasuredChi {
        chi: z * chi,
        normalization: z,
        dropped_modes: dropped,
    })
}

/// Occupation probabilities to record for `n` parameter values, against
/// direct sampling of the joint outcome tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementBudget {
    pub n: usize,
    pub m_a: usize,
    pub m_b: usize,
    /// `(n + 1)(M_A + M_B)`: step 1 plus one local readout per parameter.
    pub local: usize,
    /// `(n + 1) M_A M_B` for the composite system.
    pub global: usize,
    /// `M_A² + M_B²` joint probabilities if sampled directly.
    pub local_joint_direct: usize,
    /// `(M_A M_B)²` joint probabilities if sampled directly.
    pub global_joint_direct: usize,
}

pub fn measurement_budget(m_a: usize, m_b: usize, n: usize) -> MeasurementBudget {
    MeasurementBudget {
        n,
        m_a,
        m_b,
        local: (n + 1) * (m_a + m_b),
        global: (n + 1) * m_a * m_b,
        local_joint_direct: m_a * m_a + m_b * m_b,
        global_joint_direct: (m_a * m_b) * (m_a * m_b),
    }
}
