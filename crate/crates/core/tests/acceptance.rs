//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use entroprec::channels::{lindblad_propagate, pauli_x, LindbladModel, QuantumChannel};
use entroprec::experiments::{run_config, sweep_gamma, sweep_n, Axis, TwoIonConfig, PRESETS};
use entroprec::linalg::{
    c, identity, tensor_product, von_neumann_entropy, CMatrix, DensityMatrix, Observable,
};
use entroprec::parallel::Execution;
use entroprec::protocol::{
    backward_joint, bipartite_distributions, crooks_check, integral_ft_residual, mean_entropy,
    second_law_report, theorem2_check, LocalObservables, TwoTimeProtocol,
};
use entroprec::random::{
    haar_unitary, random_density_matrix, random_mixed_unitary, random_observable, seed_from_env,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn presets() -> Vec<(&'static str, TwoIonConfig)> {
    PRESETS.iter().map(|p| (*p, TwoIonConfig::preset(p).unwrap())).collect()
}

fn random_protocol(rng: &mut ChaCha8Rng) -> TwoTimeProtocol {
    let count = rng.random_range(1..=4);
    let channel = random_mixed_unitary(4, count, rng);
    TwoTimeProtocol::new(
        random_density_matrix(4, rng),
        random_observable(4, rng),
        random_observable(4, rng),
        channel,
    )
    .unwrap()
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.2}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env(101));
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let table = backward_joint(&random_protocol(&mut rng)).unwrap();
        worst = worst.max(table.conditional_deviation().unwrap());
    }
    let (fast, time) = within(t, Duration::from_secs(10));
    outcome(worst <= 1e-10 && fast, format!("max conditional deviation {worst:.3e}, {time}"))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, cfg) in presets() {
        let d = bipartite_distributions(&cfg.protocol().unwrap()).unwrap();
        let r = integral_ft_residual(&d.ab);
        pass &= r <= cfg.tolerance();
        parts.push(format!("{name} {r:.1e}"));
    }
    let (fast, time) = within(t, Duration::from_secs(5));
    outcome(pass && fast, format!("|<e^-σ>-1|: {}, {time}", parts.join(", ")))
}

fn criterion_3() -> Outcome {
    let mut worst_slack = f64::INFINITY;
    let mut pass = true;
    let mut check = |proto: &TwoTimeProtocol| {
        let r = theorem2_check(proto).unwrap();
        let slack = r.relative_entropy.min(r.mean_sigma - r.relative_entropy);
        worst_slack = worst_slack.min(slack);
        pass &= r.pass && slack >= -1e-10;
    };
    for (_, cfg) in presets() {
        check(&cfg.protocol().unwrap());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env(303));
    let mut eig_rel: f64 = 0.0;
    let mut eig_mean: f64 = 0.0;
    for _ in 0..50 {
        let proto = random_protocol(&mut rng);
        check(&proto);
        // Final measurement in the eigenbasis of ρ_fin.
        let fin = Observable::from_hermitian(&proto.rho_fin()).unwrap();
        let eig = TwoTimeProtocol::new(proto.rho0().clone(), proto.obs_in().clone(), fin, proto.channel().clone()).unwrap();
        let r = theorem2_check(&eig).unwrap();
        let s_fin = von_neumann_entropy(&DensityMatrix::from_noisy(eig.rho_fin()).unwrap());
        let s_in = von_neumann_entropy(&DensityMatrix::from_noisy(eig.rho_in()).unwrap());
        let mean = mean_entropy(&eig).unwrap().sample;
        eig_rel = eig_rel.max(r.relative_entropy);
        eig_mean = eig_mean.max((mean - (s_fin - s_in)).abs());
    }
    pass &= eig_rel <= 1e-10 && eig_mean <= 1e-10;
    outcome(
        pass,
        format!("min slack {worst_slack:.3e}; eigenbasis: S(fin||tau) ≤ {eig_rel:.1e}, |<σ>-ΔS| ≤ {eig_mean:.1e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["fig3", "fig4"] {
        let cfg = TwoIonConfig::preset(name).unwrap();
        let dev = crooks_check(&cfg.protocol().unwrap()).unwrap();
        pass &= dev <= cfg.tolerance();
        parts.push(format!("{name} {dev:.1e} (tol {:.0e})", cfg.tolerance()));
    }
    outcome(pass, format!("Crooks deviation: {}", parts.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut min_gap = f64::INFINITY;
    for (_, cfg) in presets() {
        let gap = bipartite_distributions(&cfg.protocol().unwrap()).unwrap().subadditivity_gap();
        min_gap = min_gap.min(gap);
        pass &= gap >= -1e-10;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env(505));
    let mut worst_local: f64 = 0.0;
    for _ in 0..20 {
        let u = tensor_product(&haar_unitary(2, &mut rng), &haar_unitary(2, &mut rng));
        let ra = random_density_matrix(2, &mut rng);
        let rb = random_density_matrix(2, &mut rng);
        let local = LocalObservables {
            a_in: random_observable(2, &mut rng),
            b_in: random_observable(2, &mut rng),
            a_fin: random_observable(2, &mut rng),
            b_fin: random_observable(2, &mut rng),
        };
        // Measured states factorize only if ρ0 does in the measured bases.
        let rho0 = DensityMatrix::product(
            &DensityMatrix::from_noisy(local.a_in.dephase(ra.data())).unwrap(),
            &DensityMatrix::from_noisy(local.b_in.dephase(rb.data())).unwrap(),
        );
        let proto = TwoTimeProtocol::bipartite(rho0, local, QuantumChannel::unitary(u).unwrap()).unwrap();
        let gap = bipartite_distributions(&proto).unwrap().subadditivity_gap();
        worst_local = worst_local.max(gap.abs());
    }
    pass &= worst_local <= 1e-12;
    outcome(pass, format!("min gap over presets {min_gap:.3e}; local-unitary |gap| ≤ {worst_local:.1e}"))
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let cfg = TwoIonConfig::preset("fig3").unwrap();
    let rec = run_config(&cfg).unwrap();
    let r = &rec.reconstruction.a_plus_b;
    let mut pass = r.rmse_probs <= 1e-6 && r.rmse_moments <= 1e-6;
    let ns: Vec<usize> = (2..=16).collect();
    let sweep = sweep_n(&ns, &cfg, Execution::default()).unwrap();
    let mut monotone = true;
    for w in sweep.rows.windows(2).filter(|w| w[0].point >= 6.0) {
        monotone &= w[1].rmse_probs <= w[0].rmse_probs + 1e-9;
        monotone &= w[1].rmse_moments <= w[0].rmse_moments + 1e-9;
    }
    pass &= monotone;
    let (fast, time) = within(t, Duration::from_secs(30));
    let curve: Vec<String> = sweep.rows.iter().map(|r| format!("{:.0e}", r.rmse_probs)).collect();
    outcome(
        pass && fast,
        format!(
            "A+B N=10: RMSE_p {:.2e}, RMSE_m {:.2e}; nonincreasing beyond 6: {monotone}; RMSE_p(N=2..16) [{}], {time}",
            r.rmse_probs,
            r.rmse_moments,
            curve.join(" ")
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let (mut gap, mut err): (f64, f64) = (0.0, 0.0);
    for (_, cfg) in presets() {
        for m in run_config(&cfg).unwrap().moment_paths {
            gap = gap.max(m.newton_gap);
            err = err.max(m.vandermonde_error).max(m.newton_error);
            pass &= m.newton_gap <= 1e-8 && m.vandermonde_error <= 1e-6 && m.newton_error <= 1e-6;
        }
    }
    outcome(pass, format!("Vandermonde vs Newton ≤ {gap:.1e}; vs enumerated moments ≤ {err:.1e}"))
}

fn criterion_8() -> Outcome {
    let template = TwoIonConfig::preset("fig5").unwrap();
    let pts = Axis::Gamma.default_points();
    let rep = sweep_gamma(&pts, &template, Execution::default()).unwrap();
    let at = |g: f64| rep.rows.iter().find(|r| (r.point - g).abs() < 1e-12).unwrap();
    let (r0, r02, r12) = (at(0.0), at(0.2), at(1.2));
    let (m0, m02, m12) = (r0.moments.ab[0], r02.moments.ab[0], r12.moments.ab[0]);
    let gaps_down = r12.witness_gaps.iter().zip(&r0.witness_gaps).all(|(a, b)| a < b);
    outcome(
        m12 < m02 && m02 < m0 && gaps_down,
        format!(
            "<σ_AB>: Γ=0 {m0:.4e}, Γ=0.2 {m02:.4e}, Γ=1.2 {m12:.4e}; witness gaps shrink: {gaps_down}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let h = tensor_product(&pauli_x(), &pauli_x()) * c(PI / 7.0 / 50.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env(909));
    let mut pass = true;
    let mut worst: f64 = f64::INFINITY;
    let mut min_rel: f64 = f64::INFINITY;
    for _ in 0..50 {
        let count = rng.random_range(1..=4);
        let channel = random_mixed_unitary(4, count, &mut rng);
        let proto = TwoTimeProtocol::new(
            DensityMatrix::maximally_mixed(4),
            Observable::computational(4),
            Observable::from_hermitian(&h).unwrap(),
            channel,
        )
        .unwrap();
        for beta in [0.1, 1.0, 10.0] {
            let r = second_law_report(&proto, &h, &h, beta).unwrap();
            let slack = r.dissipated_work() - r.relative_entropy_thermal;
            worst = worst.min(slack);
            min_rel = min_rel.min(r.relative_entropy_thermal);
            pass &= r.holds() && r.relative_entropy_thermal >= -1e-9;
        }
    }
    outcome(pass, format!("min β(<W>-ΔF) - S(fin||th) = {worst:.3e}; min S(fin||th) = {min_rel:.3e}"))
}

/// Liouvillian on row-major vec(ρ), built straight from `H` and the jumps.
fn liouvillian(h: &CMatrix, jumps: &[(CMatrix, f64)]) -> CMatrix {
    let d = h.nrows();
    let id = identity(d);
    let i = c(0.0, 1.0);
    let mut l = (tensor_product(h, &id) - tensor_product(&id, &h.transpose())) * (-i);
    for (op, g) in jumps {
        let ld = op.adjoint() * op;
        let term = tensor_product(&ld, &id) + tensor_product(&id, &ld.transpose())
            - tensor_product(op, &op.conjugate()) * c(2.0, 0.0);
        l -= term * c(*g, 0.0);
    }
    l
}

/// exp(A) by scaling and squaring of a 30-term Taylor series.
fn expm(a: &CMatrix) -> CMatrix {
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * a.nrows() as f64;
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = a * c(0.5f64.powi(s), 0.0);
    let mut sum = identity(a.nrows());
    let mut term = identity(a.nrows());
    for k in 1..30 {
        term = &term * &x * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn criterion_10() -> Outcome {
    let cfg = TwoIonConfig::preset("fig4").unwrap();
    let model = LindbladModel::two_ion(cfg.phi, cfg.tau, cfg.gamma).unwrap();
    let rho0 = DensityMatrix::from_diagonal(&cfg.rho0).unwrap();
    let d = 4;
    let omega = cfg.phi / cfg.tau;
    let h = tensor_product(&pauli_x(), &pauli_x()) * c(omega, 0.0);
    let p0 = CMatrix::from_fn(2, 2, |r, s| if r == 0 && s == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let jumps = vec![
        (tensor_product(&p0, &identity(2)), cfg.gamma),
        (tensor_product(&identity(2), &p0), cfg.gamma),
    ];
    let prop = expm(&(liouvillian(&h, &jumps) * c(cfg.tau, 0.0)));
    let v0 = nalgebra::DVector::from_fn(d * d, |k, _| rho0.data()[(k / d, k % d)]);
    let v = prop * v0;
    let exact = CMatrix::from_fn(d, d, |a, b| v[a * d + b]);

    let steps = [cfg.tau / 1250.0, cfg.tau / 2500.0, cfg.tau / 5000.0];
    let errs: Vec<f64> = steps
        .iter()
        .map(|&dt| {
            let out = lindblad_propagate(&model, &rho0, cfg.tau, dt).unwrap();
            (out.state.data() - &exact).iter().map(|z| z.norm()).fold(0.0, f64::max)
        })
        .collect();
    // Halving dt should divide the error by 16, within a factor of 2.
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = ratios.iter().all(|r| (8.0..=32.0).contains(r));
    outcome(
        pass,
        format!(
            "errors {:.2e} {:.2e} {:.2e}; halving ratios {:.2} {:.2} (want 16 within ×2)",
            errs[0], errs[1], errs[2], ratios[0], ratios[1]
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 conditional probabilities", criterion_1),
        ("2 integral fluctuation theorem", criterion_2),
        ("3 relative entropy bounds", criterion_3),
        ("4 Crooks relation", criterion_4),
        ("5 sub-additivity", criterion_5),
        ("6 reconstruction fidelity", criterion_6),
        ("7 moment-path equivalence", criterion_7),
        ("8 dephasing limit", criterion_8),
        ("9 second law", criterion_9),
        ("10 integrator order", criterion_10),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let o = run();
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(name);
        }
    }
    if !failed.is_empty() {
        println!("{} of 10 criteria failed", failed.len());
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
