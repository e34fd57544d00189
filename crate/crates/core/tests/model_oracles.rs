mod common;

use common::{kron_string, seeded_state};
use mbl_vqe_core::model::{build_hamiltonian, AAParams, Boundary, SectorBasis};
use mbl_vqe_core::spectra::{diagonalize, eipr, sector_eigenvalues};
use mbl_vqe_core::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Dense Hamiltonian assembled from explicit Kronecker products.
fn kron_hamiltonian(p: &AAParams) -> DMatrix<C64> {
    let n = p.n_sites;
    let d = 1 << n;
    let mut h = DMatrix::zeros(d, d);
    let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if p.boundary == Boundary::Periodic && n > 2 {
        bonds.push((n - 1, 0));
    }
    for (a, b) in bonds {
        for (k, c) in [(1u8, 1.0), (2, 1.0), (3, p.v0)] {
            let mut ops = vec![0u8; n];
            ops[a] = k;
            ops[b] = k;
            h += kron_string(&ops) * C64::new(c, 0.0);
        }
    }
    for q in 0..n {
        let hq = p.w * (2.0 * PI * p.eta * (q + 1) as f64 + p.phi).cos();
        let mut ops = vec![0u8; n];
        ops[q] = 3;
        h += kron_string(&ops) * C64::new(hq, 0.0);
    }
    h
}

fn assert_matches_kron(p: &AAParams) {
    let h = build_hamiltonian(p).unwrap();
    let dense = kron_hamiltonian(p);
    let d = h.full_dim();
    let full = h.full_matrix();
    for i in 0..d {
        for j in 0..d {
            assert!(dense[(i, j)].im.abs() < 1e-14);
            assert!((dense[(i, j)].re - full[i * d + j]).abs() < 1e-12, "({i},{j})");
        }
    }
    let basis = SectorBasis::zero_magnetization(p.n_sites).unwrap();
    let sd = basis.dim();
    let sector = h.sector_matrix(&basis);
    for (a, &sa) in basis.states.iter().enumerate() {
        for (b, &sb) in basis.states.iter().enumerate() {
            let want = dense[(sa as usize, sb as usize)].re;
            assert!((sector[a * sd + b] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn operator_matches_kronecker_products() {
    for n in [2, 4, 6] {
        for boundary in [Boundary::Periodic, Boundary::Open] {
            let p = AAParams::new(n, 3.7).with_phi(0.9).with_boundary(boundary);
            assert_matches_kron(&p);
        }
    }
    let mut p = AAParams::new(4, 1.2);
    p.v0 = -0.8;
    assert_matches_kron(&p);
}

#[test]
fn apply_full_matches_dense_product() {
    let p = AAParams::new(6, 8.0).with_phi(1.3);
    let h = build_hamiltonian(&p).unwrap();
    let dense = kron_hamiltonian(&p);
    let psi = seeded_state(64, 3);
    let want = &dense * nalgebra::DVector::from_column_slice(&psi);
    let got = h.apply_full(&psi).unwrap();
    assert!(common::max_abs_diff(&got, want.as_slice()) < 1e-12);
}

#[test]
fn zero_field_is_traceless() {
    let h = build_hamiltonian(&AAParams::new(4, 0.0)).unwrap();
    let m = h.full_matrix();
    let tr: f64 = (0..16).map(|i| m[i * 16 + i]).sum();
    assert!(tr.abs() < 1e-14);
}

#[test]
fn open_chain_spectrum_matches_reference_solver() {
    let p = AAParams::new(4, 8.0).with_boundary(Boundary::Open);
    let h = build_hamiltonian(&p).unwrap();
    let d = h.full_dim();
    let full = DMatrix::from_row_slice(d, d, &h.full_matrix());
    let mut want: Vec<f64> = full.symmetric_eigen().eigenvalues.iter().copied().collect();
    want.sort_by(f64::total_cmp);
    // the full spectrum is the union of all sectors
    let mut got = Vec::new();
    for k in 0..=4 {
        let basis = SectorBasis::with_ones(4, k).unwrap();
        got.extend(diagonalize(&h, &basis).unwrap().eigenvalues);
    }
    got.sort_by(f64::total_cmp);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn sector_spectrum_matches_reference_solver() {
    for (n, w, phi) in [(6, 0.5, 0.1), (8, 8.0, 2.0), (8, 2.5, 4.4)] {
        let p = AAParams::new(n, w).with_phi(phi);
        let h = build_hamiltonian(&p).unwrap();
        let basis = SectorBasis::zero_magnetization(n).unwrap();
        let d = basis.dim();
        let m = DMatrix::from_row_slice(d, d, &h.sector_matrix(&basis));
        let mut want: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        want.sort_by(f64::total_cmp);
        let eig = diagonalize(&h, &basis).unwrap();
        assert_eq!(eig.eigenvalues, sector_eigenvalues(&p, 1000).unwrap());
        for (a, b) in eig.eigenvalues.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
        // orthonormal eigenvectors that reconstruct H
        let v = DMatrix::from_column_slice(d, d, &eig.eigenvectors);
        let vtv = v.transpose() * &v;
        assert!((vtv - DMatrix::identity(d, d)).abs().max() < 1e-10);
        let l = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&eig.eigenvalues));
        assert!((&v * l * v.transpose() - m).abs().max() < 1e-9);
    }
}

#[test]
fn eipr_endpoints_and_two_state_mixture() {
    let p = AAParams::new(6, 3.0).with_phi(0.4);
    let h = build_hamiltonian(&p).unwrap();
    let basis = SectorBasis::zero_magnetization(6).unwrap();
    let eig = diagonalize(&h, &basis).unwrap();
    let d = eig.dim();
    for n in [0, d / 2, d - 1] {
        assert!((eipr(&eig.eigenstate_full(n), &eig).unwrap() - 1.0).abs() < 1e-10);
    }
    let mut uniform = vec![C64::new(0.0, 0.0); 1 << 6];
    for n in 0..d {
        for (u, e) in uniform.iter_mut().zip(eig.eigenstate_full(n)) {
            *u += e / (d as f64).sqrt();
        }
    }
    assert!((eipr(&uniform, &eig).unwrap() - 1.0 / d as f64).abs() < 1e-12);
    for (a, m, n) in [(0.3f64, 0, 1), (0.8, 5, 12), (0.5, 2, 19)] {
        let b = (1.0 - a * a).sqrt();
        let psi: Vec<C64> = eig
            .eigenstate_full(m)
            .iter()
            .zip(eig.eigenstate_full(n))
            .map(|(x, y)| x * a + y * C64::new(0.0, b))
            .collect();
        let want = a.powi(4) + b.powi(4);
        assert!((eipr(&psi, &eig).unwrap() - want).abs() < 1e-12);
    }
    // leakage out of the sector is rejected
    let mut leaky = uniform.clone();
    leaky[0] = C64::new(1.0, 0.0);
    assert!(eipr(&leaky, &eig).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hamiltonian_is_symmetric_and_conserves_mz(w in 0.0f64..12.0, phi in 0.0f64..6.3, v0 in -2.0f64..2.0) {
        let mut p = AAParams::new(6, w).with_phi(phi);
        p.v0 = v0;
        let h = build_hamiltonian(&p).unwrap();
        prop_assert!(h.conserves_mz());
        let d = h.full_dim();
        let m = h.full_matrix();
        for i in 0..d {
            for j in 0..i {
                prop_assert!((m[i * d + j] - m[j * d + i]).abs() < 1e-12);
                let (ni, nj) = ((i as u32).count_ones(), (j as u32).count_ones());
                if ni != nj {
                    prop_assert!(m[i * d + j] == 0.0);
                }
            }
        }
    }

    #[test]
    fn action_is_linear_and_sector_closed(seed in any::<u64>(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let h = build_hamiltonian(&AAParams::new(6, 5.0)).unwrap();
        let basis = SectorBasis::zero_magnetization(6).unwrap();
        let x = seeded_state(basis.dim(), seed);
        let y = seeded_state(basis.dim(), seed ^ 0x55);
        let (a, b) = (C64::new(alpha, 0.3), C64::new(beta, -1.0));
        let xy: Vec<C64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let hx = h.apply_sector(&basis, &x).unwrap();
        let hy = h.apply_sector(&basis, &y).unwrap();
        let hxy = h.apply_sector(&basis, &xy).unwrap();
        for i in 0..hxy.len() {
            prop_assert!((hxy[i] - (a * hx[i] + b * hy[i])).norm() < 1e-12);
        }
        let full = h.apply_full(&basis.embed(&x)).unwrap();
        let (inside, outside) = basis.project(&full).unwrap();
        prop_assert!(outside < 1e-24);
        prop_assert!(common::max_abs_diff(&inside, &hx) < 1e-12);
    }
}
