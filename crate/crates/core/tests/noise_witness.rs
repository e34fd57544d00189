mod common;

use common::seeded_state;
use mbl_vqe_core::ansatz::{pqc, preparation_circuit, random_parameters, trotter_step, AnsatzConfig, TrotterPlan};
use mbl_vqe_core::model::{build_hamiltonian, AAParams, SectorBasis};
use mbl_vqe_core::noise::{apply_depolarizing, simulate_density, DensityMatrix, NoiseModel};
use mbl_vqe_core::spectra::{diagonalize, eipr};
use mbl_vqe_core::witness::{
    estimate_r_randomized, estimate_r_tomography, evolution_unitary, jensen_bound, witness_circuit,
    witness_exact, AncillaState, Engine, Evolution, WitnessInput,
};
use mbl_vqe_core::C64;
use proptest::prelude::*;

fn prepared(n: usize, depth: usize, seed: u64) -> (mbl_vqe_core::circuit::Circuit, Vec<f64>) {
    let cfg = AnsatzConfig::new(n, depth);
    let c = preparation_circuit(&cfg).unwrap().then(&pqc(&cfg).unwrap());
    let mut x = vec![cfg.theta0];
    x.extend(random_parameters(c.n_params - 1, 1.0, seed));
    (c, x)
}

#[test]
fn two_qubit_channel_closed_form() {
    // |00> under p = 0.15: the 15 non-identity Paulis spread p/15 over
    // flip patterns, four Paulis per pattern.
    let p = 0.15;
    let mut rho = DensityMatrix::from_pure(&mbl_vqe_core::statevec::zero_state(2)).unwrap();
    apply_depolarizing(&mut rho, (0, 1), p).unwrap();
    let d0 = 1.0 - p + 3.0 * p / 15.0;
    let d1 = 4.0 * p / 15.0;
    assert!((rho.get(0, 0).re - d0).abs() < 1e-14);
    for k in 1..4 {
        assert!((rho.get(k, k).re - d1).abs() < 1e-14);
    }
    assert!((rho.purity() - (d0 * d0 + 3.0 * d1 * d1)).abs() < 1e-14);
}

#[test]
fn maximally_mixed_is_a_fixed_point() {
    let mut rho = DensityMatrix {
        n_qubits: 2,
        data: (0..16)
            .map(|k| if k % 5 == 0 { C64::new(0.25, 0.0) } else { C64::new(0.0, 0.0) })
            .collect(),
    };
    let before = rho.clone();
    apply_depolarizing(&mut rho, (1, 0), 0.7).unwrap();
    assert!(rho.data.iter().zip(&before.data).all(|(a, b)| (a - b).norm() < 1e-15));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channel_is_cptp_and_contracts_purity(seed in any::<u64>(), p in 0.0f64..=1.0, a in 0usize..3, b in 0usize..3) {
        prop_assume!(a != b);
        let mut rho = DensityMatrix::from_pure(&seeded_state(8, seed)).unwrap();
        let before = rho.purity();
        apply_depolarizing(&mut rho, (a, b), p).unwrap();
        prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(rho.hermiticity_defect() < 1e-12);
        prop_assert!(rho.eigenvalues().iter().all(|&l| l > -1e-10));
        prop_assert!(rho.purity() <= before + 1e-12);
    }

    #[test]
    fn witness_dominates_eipr(seed in any::<u64>(), t in 0.0f64..20.0) {
        let h = build_hamiltonian(&AAParams::new(6, 4.0)).unwrap();
        let basis = SectorBasis::zero_magnetization(6).unwrap();
        let eig = diagonalize(&h, &basis).unwrap();
        let psi = basis.embed(&seeded_state(basis.dim(), seed));
        let r = witness_exact(&psi, &eig, t).unwrap().r;
        let e = eipr(&psi, &eig).unwrap();
        prop_assert!(r >= e - 1e-12);
        prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&r));
    }
}

#[test]
fn noiseless_density_matches_statevector() {
    let (c, x) = prepared(4, 2, 5);
    let psi = mbl_vqe_core::statevec::simulate(&c, &x, &mbl_vqe_core::statevec::zero_state(4)).unwrap();
    let rho0 = DensityMatrix::from_pure(&mbl_vqe_core::statevec::zero_state(4)).unwrap();
    let rho = simulate_density(&c, &x, &rho0, None).unwrap();
    let want = DensityMatrix::from_pure(&psi).unwrap();
    assert!(common::max_abs_diff(&rho.data, &want.data) < 1e-12);
}

#[test]
fn witness_routes_agree_without_noise() {
    let model = AAParams::new(4, 8.0).with_phi(0.2);
    let h = build_hamiltonian(&model).unwrap();
    let basis = SectorBasis::zero_magnetization(4).unwrap();
    let eig = diagonalize(&h, &basis).unwrap();
    let (c, x) = prepared(4, 2, 17);
    let psi = mbl_vqe_core::statevec::simulate(&c, &x, &mbl_vqe_core::statevec::zero_state(4)).unwrap();
    let t = 0.4;
    let exact = witness_exact(&psi, &eig, t).unwrap().r;
    let u = evolution_unitary(&h, t);
    let inputs = [
        WitnessInput::State(&psi),
        WitnessInput::Prepared {
            circuit: &c,
            params: &x,
        },
    ];
    for input in inputs {
        for engine in [Engine::Statevector, Engine::Density] {
            let r = witness_circuit(input, Evolution::Exact(&u), t, engine, None).unwrap().r;
            assert!((r - exact).abs() < 1e-9, "{engine:?}");
        }
        let tr = witness_circuit(
            input,
            Evolution::Exact(&u),
            t,
            Engine::Trajectory { n_traj: 3, seed: 1 },
            None,
        )
        .unwrap();
        assert!((tr.r - exact).abs() < 1e-9);
    }
}

#[test]
fn jensen_bound_holds_at_short_times() {
    let h = build_hamiltonian(&AAParams::new(4, 2.0)).unwrap();
    let basis = SectorBasis::zero_magnetization(4).unwrap();
    let eig = diagonalize(&h, &basis).unwrap();
    let spread = eig.eigenvalues[eig.dim() - 1] - eig.eigenvalues[0];
    for seed in 0..200u64 {
        let psi = basis.embed(&seeded_state(basis.dim(), seed));
        let w = eig.weights(&psi).unwrap();
        for frac in [0.05, 0.3, 0.7, 1.0] {
            let t = frac * std::f64::consts::FRAC_PI_2 / spread;
            let r = witness_exact(&psi, &eig, t).unwrap().r;
            assert!(r <= jensen_bound(&w, &eig.eigenvalues, t) + 1e-12);
        }
    }
}

#[test]
fn trajectories_agree_with_density_within_errors() {
    let model = AAParams::new(4, 8.0);
    let (c, x) = prepared(4, 2, 3);
    let evo = trotter_step(&TrotterPlan {
        controlled: true,
        ..TrotterPlan::new(model, 1.0 / 8.0)
    })
    .unwrap();
    let noise = NoiseModel::new(2e-3);
    let input = WitnessInput::Prepared {
        circuit: &c,
        params: &x,
    };
    let evolution = Evolution::Circuit {
        circuit: &evo,
        params: &[],
    };
    let dens = witness_circuit(input, evolution, 0.125, Engine::Density, Some(&noise)).unwrap().r;
    let ideal = witness_circuit(input, evolution, 0.125, Engine::Density, None).unwrap().r;
    assert!(dens < ideal - 1e-3);
    let mut ses = Vec::new();
    for (k, n_traj) in [250usize, 1000, 4000].into_iter().enumerate() {
        let tr = witness_circuit(
            input,
            evolution,
            0.125,
            Engine::Trajectory { n_traj, seed: 40 + k as u64 },
            Some(&noise),
        )
        .unwrap();
        let se = tr.std_err.unwrap();
        assert!((tr.r - dens).abs() < 3.0 * se + 1e-12, "n_traj {n_traj}");
        ses.push(se);
    }
    // standard error falls like 1/sqrt(n_traj)
    let slope = (ses[2] / ses[0]).ln() / 16f64.ln();
    assert!((-0.6..=-0.4).contains(&slope), "slope {slope}");
}

#[test]
fn randomized_estimator_limits() {
    let pure = estimate_r_randomized(AncillaState::PLUS, 100, 10_000, 1).unwrap();
    assert!((pure.r - 1.0).abs() <= 3.0 * pure.std_err.unwrap());
    let mixed = estimate_r_randomized(AncillaState::MIXED, 100, 10_000, 2).unwrap();
    assert!((mixed.r - 0.5).abs() <= 3.0 * mixed.std_err.unwrap());
    let s = AncillaState::new(0.7, C64::from_polar(0.3, 0.8)).unwrap();
    let reps: Vec<f64> = (0..200)
        .map(|k| estimate_r_randomized(s, 20, 50, 1000 + k).unwrap().r)
        .collect();
    let mean = reps.iter().sum::<f64>() / reps.len() as f64;
    assert!((mean - s.purity()).abs() < 0.01 * s.purity());
}

#[test]
fn tomography_of_plus_state() {
    let shots = 8192u64;
    let est = estimate_r_tomography(AncillaState::PLUS, shots, 7).unwrap();
    // binomial oracle: only the two unbiased axes fluctuate, each adding
    // a squared O(1/√S) term to the purity
    let s = shots as f64;
    let sigma = (2.0f64).sqrt() / s;
    assert!((est.result.r - 1.0).abs() <= 3.0 * sigma + 2.0 / s);
}

#[test]
fn tomography_error_shrinks_like_inverse_root_shots() {
    let s = AncillaState::new(0.7, C64::new(0.2, -0.1)).unwrap();
    let rms: Vec<f64> = [100u64, 400, 1600, 6400]
        .iter()
        .map(|&shots| {
            let sq: f64 = (0..300)
                .map(|k| (estimate_r_tomography(s, shots, k).unwrap().result.r - s.purity()).powi(2))
                .sum();
            (sq / 300.0).sqrt()
        })
        .collect();
    let xs: Vec<f64> = [100f64, 400.0, 1600.0, 6400.0].iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = rms.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 4.0;
    let my = ys.iter().sum::<f64>() / 4.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((-0.65..=-0.35).contains(&slope), "slope {slope}");
}
