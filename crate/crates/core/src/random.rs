//! Random states, bases and channels for property sweeps.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::QuantumChannel;
use crate::linalg::{c, trace, CMatrix, DensityMatrix, Observable};

/// Seed for randomized sweeps: `ENTROPREC_SEED` when set and parseable,
/// otherwise `default`.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var("ENTROPREC_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// diagonal phases of `R` absorbed.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Full-rank mixed state `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(d, rng);
    let m = &g * g.adjoint();
    let t = trace(&m);
    DensityMatrix::from_noisy(m / t).expect("Ginibre state is valid")
}

/// Rank-one observable in a Haar-random basis.
pub fn random_observable<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Observable {
    Observable::from_basis(&haar_unitary(d, rng), None).expect("unitary basis")
}

/// Mixture of `count` Haar unitaries with uniform-random weights.
pub fn random_mixed_unitary<R: Rng + ?Sized>(d: usize, count: usize, rng: &mut R) -> QuantumChannel {
    let weights: Vec<f64> = (0..count).map(|_| rng.random::<f64>() + 1e-3).collect();
    let unitaries: Vec<CMatrix> = (0..count).map(|_| haar_unitary(d, rng)).collect();
    QuantumChannel::mixed_unitary(&weights, &unitaries).expect("mixture of unitaries is CPTP")
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, rng);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..5 {
            let u = haar_unitary(d, &mut rng);
            assert!(max_abs_diff(&(u.adjoint() * &u), &identity(d)) < 1e-12);
            let ch = random_mixed_unitary(d, 3, &mut rng);
            assert!(ch.is_unital());
            assert_eq!(random_density_matrix(d, &mut rng).dim(), d);
            assert_eq!(random_observable(d, &mut rng).len(), d);
        }
    }
}
