//! Circuit families used by the protocol.

use alloc::vec::Vec;
use rand::Rng as _;

use crate::circuit::{Angle, Circuit};
use crate::error::invalid;
use crate::linalg::{expi_symmetric, CMatrix};
use crate::model::{AAParams, Boundary};
use crate::{rng, Result};

/// Hardware two-qubit gate count of one ancilla-controlled bond
/// evolution: 3 CCNOTs at 6 CNOTs each plus 15 two-qubit gates.
pub const CONTROLLED_BOND_GATES: u32 = 33;

/// Default preparation angle.
pub const DEFAULT_THETA0: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzConfig {
    pub n_sites: usize,
    /// Number of PQC blocks.
    pub depth_vqe: usize,
    /// Shared angle of the preparation entangler layer.
    pub theta0: f64,
    /// Initial PQC parameters are uniform in `[−init_scale, init_scale]`.
    pub init_scale: f64,
    pub seed: u64,
    pub boundary: Boundary,
}

impl AnsatzConfig {
    pub fn new(n_sites: usize, depth_vqe: usize) -> Self {
        Self {
            n_sites,
            depth_vqe,
            theta0: DEFAULT_THETA0,
            init_scale: 0.1,
            seed: 0,
            boundary: Boundary::Periodic,
        }
    }

    pub fn bonds(&self) -> Vec<(usize, usize)> {
        self.boundary.bonds(self.n_sites)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || self.n_sites % 2 != 0 {
            return Err(invalid("n_sites must be even and at least 2"));
        }
        if !self.theta0.is_finite() || !(self.init_scale >= 0.0) {
            return Err(invalid("theta0 must be finite and init_scale non-negative"));
        }
        Ok(())
    }

    pub fn n_pqc_params(&self) -> usize {
        self.depth_vqe * (self.bonds().len() + self.n_sites)
    }
}

/// Néel state `|0101...>` followed by one XY-entangler layer whose bonds
/// all share parameter 0 (bind it to `theta0`).
pub fn preparation_circuit(cfg: &AnsatzConfig) -> Result<Circuit> {
    cfg.validate()?;
    let mut c = Circuit::new(cfg.n_sites);
    for q in (1..cfg.n_sites).step_by(2) {
        c.x(q);
    }
    let shared = c.new_param();
    for (a, b) in cfg.bonds() {
        c.xy(a, b, shared);
    }
    Ok(c)
}

/// Output of the preparation circuit at `cfg.theta0`.
pub fn prepared_state(cfg: &AnsatzConfig) -> Result<Vec<crate::C64>> {
    let c = preparation_circuit(cfg)?;
    crate::statevec::simulate(&c, &[cfg.theta0], &crate::statevec::zero_state(cfg.n_sites))
}

/// `depth_vqe` blocks of per-bond XY entanglers (independent weights)
/// followed by per-site `Rz`. Block `k` owns parameters
/// `k * (n_bonds + n_sites) ..`, bonds first.
pub fn pqc(cfg: &AnsatzConfig) -> Result<Circuit> {
    cfg.validate()?;
    let bonds = cfg.bonds();
    let mut c = Circuit::new(cfg.n_sites);
    for _ in 0..cfg.depth_vqe {
        for &(a, b) in &bonds {
            let p = c.new_param();
            c.xy(a, b, p);
        }
        for q in 0..cfg.n_sites {
            let p = c.new_param();
            c.rz(q, p);
        }
    }
    Ok(c)
}

/// `n` values uniform in `[−scale, scale]` from `seed`.
pub fn random_parameters(n: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut r = rng::rng_from_seed(seed);
    (0..n)
        .map(|_| if scale > 0.0 { r.random_range(-scale..=scale) } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterPlan {
    pub model: AAParams,
    /// Evolution time.
    pub t: f64,
    pub n_slices: usize,
    /// Control every bond on an ancilla qubit at index `n_sites`.
    pub controlled: bool,
}

impl TrotterPlan {
    pub fn new(model: AAParams, t: f64) -> Self {
        Self {
            model,
            t,
            n_slices: 1,
            controlled: false,
        }
    }
}

/// Real symmetric 4x4 bond Hamiltonian
/// `XX + YY + V0 ZZ + ha Z_a + hb Z_b` in the little-endian pair basis.
pub fn bond_hamiltonian(v0: f64, ha: f64, hb: f64) -> [f64; 16] {
    let mut m = [0.0; 16];
    for s in 0..4usize {
        let za = if s & 1 == 0 { 1.0 } else { -1.0 };
        let zb = if s & 2 == 0 { 1.0 } else { -1.0 };
        m[s * 4 + s] = v0 * za * zb + ha * za + hb * zb;
    }
    // XX + YY hops |01> <-> |10> with amplitude 2.
    m[1 * 4 + 2] = 2.0;
    m[2 * 4 + 1] = 2.0;
    m
}

/// Product over bonds of `exp(i H_bond t / n_slices)`, repeated
/// `n_slices` times. Each site's field is split evenly over the bonds
/// that contain it, so the bond terms sum to the full Hamiltonian.
pub fn trotter_step(plan: &TrotterPlan) -> Result<Circuit> {
    plan.model.validate()?;
    if plan.n_slices == 0 {
        return Err(invalid("n_slices must be at least 1"));
    }
    let n = plan.model.n_sites;
    let bonds = plan.model.bonds();
    let fields = plan.model.fields();
    let mut multiplicity = alloc::vec![0usize; n];
    for &(a, b) in &bonds {
        multiplicity[a] += 1;
        multiplicity[b] += 1;
    }
    let dt = plan.t / plan.n_slices as f64;
    let unitaries: Vec<CMatrix> = bonds
        .iter()
        .map(|&(a, b)| {
            let hb = bond_hamiltonian(
                plan.model.v0,
                fields[a] / multiplicity[a] as f64,
                fields[b] / multiplicity[b] as f64,
            );
            expi_symmetric(&hb, 4, dt)
        })
        .collect();
    let n_qubits = if plan.controlled { n + 1 } else { n };
    let mut c = Circuit::new(n_qubits);
    for _ in 0..plan.n_slices {
        for (&(a, b), u) in bonds.iter().zip(&unitaries) {
            if plan.controlled {
                c.unitary(alloc::vec![a, b], Some(n), u.clone(), CONTROLLED_BOND_GATES);
            } else {
                c.unitary(alloc::vec![a, b], None, u.clone(), 1);
            }
        }
    }
    Ok(c)
}

/// `depth` layers of `Rz·Ry·Rz` on every qubit followed by a CZ ladder
/// over neighbouring qubits. Layer `l`, qubit `q` owns parameters
/// `3 (l n + q) .. 3 (l n + q) + 3` in application order.
pub fn hardware_efficient_ansatz(n_qubits: usize, depth: usize) -> Result<Circuit> {
    if n_qubits == 0 || depth == 0 {
        return Err(invalid("hardware-efficient ansatz needs qubits and depth >= 1"));
    }
    let mut c = Circuit::new(n_qubits);
    for _ in 0..depth {
        for q in 0..n_qubits {
            let (p1, p2, p3) = (c.new_param(), c.new_param(), c.new_param());
            c.rz(q, p1).ry(q, p2).rz(q, p3);
        }
        for q in 0..n_qubits.saturating_sub(1) {
            c.cz(q, q + 1);
        }
    }
    Ok(c)
}

/// Constant-angle helper for callers that build circuits by hand.
pub fn fixed(theta: f64) -> Angle {
    Angle::Fixed(theta)
}
