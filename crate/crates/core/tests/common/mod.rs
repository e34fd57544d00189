#![allow(dead_code)]

use mbl_vqe_core::circuit::Circuit;
use mbl_vqe_core::linalg::CMatrix;
use mbl_vqe_core::rng::{rng_from_seed, Rng};
use mbl_vqe_core::statevec::{basis_state, simulate};
use mbl_vqe_core::C64;
use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;

pub fn random_state(dim: usize, rng: &mut Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    v
}

pub fn seeded_state(dim: usize, seed: u64) -> Vec<C64> {
    random_state(dim, &mut rng_from_seed(seed))
}

/// Dense unitary of a circuit, column by column.
pub fn circuit_unitary(c: &Circuit, params: &[f64]) -> CMatrix {
    let d = c.dim();
    let mut u = CMatrix::zeros(d);
    for j in 0..d {
        let col = simulate(c, params, &basis_state(c.n_qubits, j)).unwrap();
        for (i, z) in col.into_iter().enumerate() {
            u.set(i, j, z);
        }
    }
    u
}

/// Single-qubit Pauli matrix: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(k: u8) -> DMatrix<C64> {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    match k {
        0 => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// `⊗` over qubits, qubit 0 least significant: `ops[q]` acts on qubit `q`.
pub fn kron_string(ops: &[u8]) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for &k in ops.iter().rev() {
        m = m.kronecker(&pauli(k));
    }
    m
}

pub fn to_nalgebra(m: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_row_slice(m.dim, m.dim, &m.data)
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
