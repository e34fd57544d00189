//! Two-qubit depolarizing noise: an exact density-matrix engine and a
//! Monte Carlo trajectory engine that agree in expectation.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng as _;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::invalid;
use crate::linalg::symmetric_eigen;
use crate::rng::{child_rng, Rng};
use crate::statevec::{apply_dense1, apply_diag1, apply_gate, apply_x, Mode};
use crate::{par, Error, Result, C64, ONE, ZERO};

/// Largest register the density engine accepts by default.
pub const DEFAULT_MAX_DENSITY_QUBITS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoisePlacement {
    /// One channel per unit of the gate's `noise_weight`.
    #[default]
    AfterEachTwoQubitGate,
    /// One channel per CNOT of a standard decomposition: two for an XY
    /// entangler, three for an arbitrary uncontrolled two-qubit unitary.
    PerCnot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Depolarizing probability per two-qubit channel.
    pub p: f64,
    pub placement: NoisePlacement,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::new(1e-3)
    }
}

impl NoiseModel {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            placement: NoisePlacement::AfterEachTwoQubitGate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid("depolarizing probability must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Replacement strength `λ = 16p/15` of the two-qubit channel.
    pub fn lambda(&self) -> f64 {
        16.0 * self.p / 15.0
    }

    /// Number of two-qubit channels attached after `gate`.
    pub fn channels_after(&self, gate: &Gate) -> u32 {
        match self.placement {
            NoisePlacement::AfterEachTwoQubitGate => gate.noise_weight,
            NoisePlacement::PerCnot => match gate.kind {
                GateKind::XYEntangler(_) => 2,
                GateKind::ControlledUnitary(_) if gate.control.is_none() && gate.targets.len() == 2 => 3,
                _ => gate.noise_weight,
            },
        }
    }

    /// Channel count per qubit pair for `gate`. Gates on more than two
    /// qubits spread their channels round-robin over all pairs.
    pub fn pair_channels(&self, gate: &Gate) -> Vec<((usize, usize), u32)> {
        let count = self.channels_after(gate);
        if count == 0 {
            return Vec::new();
        }
        let qs = gate.qubits();
        let mut pairs = Vec::new();
        for i in 0..qs.len() {
            for j in i + 1..qs.len() {
                pairs.push((qs[i], qs[j]));
            }
        }
        if pairs.is_empty() {
            return Vec::new();
        }
        let np = pairs.len() as u32;
        pairs
            .into_iter()
            .enumerate()
            .map(|(k, pr)| (pr, count / np + u32::from((k as u32) < count % np)))
            .filter(|&(_, c)| c > 0)
            .collect()
    }
}

/// Replacement strength after `count` repetitions of a channel of
/// strength `lambda`.
pub fn compose_lambda(lambda: f64, count: u32) -> f64 {
    1.0 - (1.0 - lambda).powi(count as i32)
}

/// Row-major `2^n × 2^n` density matrix. Entry `(i, j)` sits at
/// `(i << n) | j`, so it doubles as a state on `2n` qubits whose low `n`
/// bits index columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n_qubits: usize,
    pub data: Vec<C64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let d = psi.len();
        if !d.is_power_of_two() {
            return Err(invalid("state length must be a power of two"));
        }
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = psi[i] * psi[j].conj();
            }
        }
        Ok(Self {
            n_qubits: d.trailing_zeros() as usize,
            data,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim() + j]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                m = m.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        m
    }

    /// Eigenvalues, ascending, through the real symmetric embedding
    /// `[[Re ρ, −Im ρ], [Im ρ, Re ρ]]` (each value appears twice there).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let n = 2 * d;
        let mut a = vec![0.0; n * n];
        for i in 0..d {
            for j in 0..d {
                let z = self.get(i, j);
                a[i * n + j] = z.re;
                a[(i + d) * n + j + d] = z.re;
                a[(i + d) * n + j] = z.im;
                a[i * n + j + d] = -z.im;
            }
        }
        let all = symmetric_eigen(&a, n, false).values;
        all.into_iter().step_by(2).collect()
    }

    /// Reduced 2x2 state of qubit `q`, row-major.
    pub fn reduced_qubit(&self, q: usize) -> [C64; 4] {
        let d = self.dim();
        let bit = 1usize << q;
        let mut r = [ZERO; 4];
        for i in 0..d {
            if i & bit != 0 {
                continue;
            }
            r[0] += self.get(i, i);
            r[1] += self.get(i, i | bit);
            r[2] += self.get(i | bit, i);
            r[3] += self.get(i | bit, i | bit);
        }
        r
    }

    /// `Tr(ρ O)` for a full-register operator given by its action.
    pub fn expectation_diag(&self, diag: impl Fn(usize) -> f64) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).re * diag(i)).sum()
    }
}

/// `ρ → (1 − λ) ρ + λ (I/2^k ⊗ Tr_Q ρ)` on the qubits `Q` (one or two).
pub fn depolarize(rho: &mut DensityMatrix, qubits: &[usize], lambda: f64) -> Result<()> {
    let n = rho.n_qubits;
    if qubits.is_empty() || qubits.len() > 2 || qubits.iter().any(|&q| q >= n) {
        return Err(invalid("depolarizing acts on one or two in-range qubits"));
    }
    if qubits.len() == 2 && qubits[0] == qubits[1] {
        return Err(invalid("depolarizing pair must be two distinct qubits"));
    }
    if lambda == 0.0 {
        return Ok(());
    }
    let d = rho.dim();
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let k = qubits.len();
    let local = |s: usize| -> usize {
        qubits
            .iter()
            .enumerate()
            .map(|(j, &q)| ((s >> j) & 1) << q)
            .sum()
    };
    let offs: Vec<usize> = (0..1usize << k).map(local).collect();
    let keep = 1.0 - lambda;
    let mix = lambda / (1usize << k) as f64;
    for i0 in (0..d).filter(|i| i & mask == 0) {
        for j0 in (0..d).filter(|j| j & mask == 0) {
            let mut tr = ZERO;
            for &o in &offs {
                tr += rho.data[(i0 | o) * d + (j0 | o)];
            }
            for &oi in &offs {
                for &oj in &offs {
                    let z = &mut rho.data[(i0 | oi) * d + (j0 | oj)];
                    *z *= keep;
                    if oi == oj {
                        *z += tr * mix;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Two-qubit depolarizing channel
/// `ρ → (1 − p) ρ + p/15 Σ_{P ≠ I⊗I} P ρ P` on `pair`.
pub fn apply_depolarizing(rho: &mut DensityMatrix, pair: (usize, usize), p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("depolarizing probability must lie in [0, 1]"));
    }
    depolarize(rho, &[pair.0, pair.1], 16.0 * p / 15.0)
}

fn check_density_inputs(circuit: &Circuit, params: &[f64], n_rho: usize, nm: Option<&NoiseModel>) -> Result<()> {
    circuit.validate()?;
    circuit.check_params(params)?;
    if n_rho != circuit.n_qubits {
        return Err(Error::Shape {
            expected: circuit.n_qubits,
            got: n_rho,
        });
    }
    if let Some(m) = nm {
        m.validate()?;
    }
    Ok(())
}

/// Evolve `rho0` through `circuit`, attaching channels after each gate.
pub fn simulate_density(
    circuit: &Circuit,
    params: &[f64],
    rho0: &DensityMatrix,
    noise: Option<&NoiseModel>,
) -> Result<DensityMatrix> {
    simulate_density_with_limit(circuit, params, rho0, noise, DEFAULT_MAX_DENSITY_QUBITS)
}

pub fn simulate_density_with_limit(
    circuit: &Circuit,
    params: &[f64],
    rho0: &DensityMatrix,
    noise: Option<&NoiseModel>,
    max_qubits: usize,
) -> Result<DensityMatrix> {
    check_density_inputs(circuit, params, rho0.n_qubits, noise)?;
    if rho0.n_qubits > max_qubits {
        return Err(Error::ResourceLimit(alloc::format!(
            "density matrix on {} qubits exceeds the limit of {max_qubits}",
            rho0.n_qubits
        )));
    }
    let n = rho0.n_qubits;
    let mut rho = rho0.clone();
    for g in &circuit.gates {
        apply_gate(circuit, g, params, &mut rho.data, n, Mode::Forward);
        apply_gate(circuit, g, params, &mut rho.data, 0, Mode::Conjugate);
        if let Some(m) = noise {
            for ((a, b), c) in m.pair_channels(g) {
                depolarize(&mut rho, &[a, b], compose_lambda(m.lambda(), c))?;
            }
        }
    }
    Ok(rho)
}

/// Apply Pauli `k` (0 = I, 1 = X, 2 = Y, 3 = Z) to qubit `q`.
pub(crate) fn apply_pauli(psi: &mut [C64], q: usize, k: u8) {
    match k {
        1 => apply_x(psi, q),
        2 => apply_dense1(psi, q, &[ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]),
        3 => apply_diag1(psi, q, ONE, -ONE),
        _ => {}
    }
}

/// Sample one two-qubit depolarizing event: with probability `p` a
/// uniformly random non-identity Pauli pair.
pub(crate) fn sample_pair_error(psi: &mut [C64], pair: (usize, usize), p: f64, rng: &mut Rng) {
    if p > 0.0 && rng.random::<f64>() < p {
        let k: u8 = rng.random_range(1..16);
        apply_pauli(psi, pair.0, k & 3);
        apply_pauli(psi, pair.1, k >> 2);
    }
}

/// Sample one single-qubit replacement channel of strength `lambda`:
/// each of X, Y, Z with probability `λ/4`.
pub(crate) fn sample_qubit_error(psi: &mut [C64], q: usize, lambda: f64, rng: &mut Rng) {
    let u: f64 = rng.random();
    if u < 0.75 * lambda {
        apply_pauli(psi, q, 1 + (u / (0.25 * lambda)) as u8 % 3);
    }
}

/// Run `n_traj` stochastic trajectories; trajectory `i` draws from child
/// stream `i` of `seed` and hands its final state and generator to `f`.
pub fn map_trajectories<T, F>(
    circuit: &Circuit,
    params: &[f64],
    psi0: &[C64],
    noise: &NoiseModel,
    n_traj: usize,
    seed: u64,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Vec<C64>, &mut Rng) -> T + Sync + Send,
{
    check_density_inputs(circuit, params, circuit.n_qubits, Some(noise))?;
    if psi0.len() != circuit.dim() {
        return Err(Error::Shape {
            expected: circuit.dim(),
            got: psi0.len(),
        });
    }
    if n_traj == 0 {
        return Err(invalid("need at least one trajectory"));
    }
    let plan: Vec<Vec<((usize, usize), u32)>> =
        circuit.gates.iter().map(|g| noise.pair_channels(g)).collect();
    Ok(par::map_indices(n_traj, |i| {
        let mut rng = child_rng(seed, i as u64);
        let mut psi = psi0.to_vec();
        for (g, chans) in circuit.gates.iter().zip(&plan) {
            apply_gate(circuit, g, params, &mut psi, 0, Mode::Forward);
            for &(pair, c) in chans {
                for _ in 0..c {
                    sample_pair_error(&mut psi, pair, noise.p, &mut rng);
                }
            }
        }
        f(psi, &mut rng)
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub seed: u64,
    pub states: Vec<Vec<C64>>,
}

impl TrajectoryEnsemble {
    /// Ensemble-averaged density matrix.
    pub fn density(&self) -> DensityMatrix {
        let d = self.states[0].len();
        let mut data = vec![ZERO; d * d];
        for psi in &self.states {
            for i in 0..d {
                for j in 0..d {
                    data[i * d + j] += psi[i] * psi[j].conj();
                }
            }
        }
        let w = 1.0 / self.states.len() as f64;
        data.iter_mut().for_each(|z| *z *= w);
        DensityMatrix {
            n_qubits: d.trailing_zeros() as usize,
            data,
        }
    }
}

pub fn simulate_trajectories(
    circuit: &Circuit,
    params: &[f64],
    psi0: &[C64],
    noise: &NoiseModel,
    n_traj: usize,
    seed: u64,
) -> Result<TrajectoryEnsemble> {
    let states = map_trajectories(circuit, params, psi0, noise, n_traj, seed, |psi, _| psi)?;
    Ok(TrajectoryEnsemble { seed, states })
}

/// Reduced 2x2 state of qubit `q` of a pure state, row-major.
pub fn reduced_qubit_pure(psi: &[C64], q: usize) -> [C64; 4] {
    let bit = 1usize << q;
    let mut r = [ZERO; 4];
    for i in 0..psi.len() {
        if i & bit != 0 {
            continue;
        }
        let (p0, p1) = (psi[i], psi[i | bit]);
        r[0] += p0 * p0.conj();
        r[1] += p0 * p1.conj();
        r[2] += p1 * p0.conj();
        r[3] += p1 * p1.conj();
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Angle;
    use crate::statevec::simulate;

    fn random_state(n: usize, seed: u64) -> Vec<C64> {
        let mut r = crate::rng::rng_from_seed(seed);
        let mut v: Vec<C64> = (0..1 << n)
            .map(|_| C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))
            .collect();
        let s = crate::linalg::norm_sqr(&v).sqrt();
        v.iter_mut().for_each(|z| *z /= s);
        v
    }

    fn pauli_matrix(k: u8) -> [C64; 4] {
        match k {
            0 => [ONE, ZERO, ZERO, ONE],
            1 => [ZERO, ONE, ONE, ZERO],
            2 => [ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
            _ => [ONE, ZERO, ZERO, -ONE],
        }
    }

    /// `P ρ P` with `P` acting as Pauli `k` on qubit `q`.
    fn conjugate_by(rho: &DensityMatrix, q: usize, k: u8) -> DensityMatrix {
        let d = rho.dim();
        let m = pauli_matrix(k);
        let bit = 1 << q;
        let el = |i: usize, j: usize| m[((i >> q) & 1) * 2 + ((j >> q) & 1)];
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                for a in [i & !bit, i | bit] {
                    for b in [j & !bit, j | bit] {
                        acc += el(i, a) * rho.get(a, b) * el(j, b).conj();
                    }
                }
                out[i * d + j] = acc;
            }
        }
        DensityMatrix {
            n_qubits: rho.n_qubits,
            data: out,
        }
    }

    #[test]
    fn replacement_form_matches_pauli_sum() {
        let psi = random_state(3, 11);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let p = 0.2;
        let mut expect = vec![ZERO; rho.data.len()];
        for k in 0..16u8 {
            let term = conjugate_by(&conjugate_by(&rho, 0, k & 3), 2, k >> 2);
            let w = if k == 0 { 1.0 - p } else { p / 15.0 };
            for (e, t) in expect.iter_mut().zip(&term.data) {
                *e += t * w;
            }
        }
        let mut got = rho.clone();
        apply_depolarizing(&mut got, (0, 2), p).unwrap();
        for (a, b) in got.data.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_qubit_replacement_shrinks_bloch_vector() {
        let plus = [C64::new(0.5f64.sqrt(), 0.0), C64::new(0.5f64.sqrt(), 0.0)];
        let mut rho = DensityMatrix::from_pure(&plus).unwrap();
        depolarize(&mut rho, &[0], 0.3).unwrap();
        assert!((rho.get(0, 1).re - 0.35).abs() < 1e-14);
        assert!((rho.get(0, 0).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn noiseless_density_matches_statevector() {
        let mut c = Circuit::new(3);
        c.ry(0, Angle::Fixed(0.7)).xy(0, 1, Angle::Fixed(0.3)).rz(2, Angle::Fixed(1.1)).cz(1, 2);
        let psi0 = random_state(3, 2);
        let psi = simulate(&c, &[], &psi0).unwrap();
        let rho = simulate_density(&c, &[], &DensityMatrix::from_pure(&psi0).unwrap(), None).unwrap();
        let expect = DensityMatrix::from_pure(&psi).unwrap();
        for (a, b) in rho.data.iter().zip(&expect.data) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn noisy_density_stays_physical() {
        let mut c = Circuit::new(3);
        c.ry(0, Angle::Fixed(0.7)).xy(0, 1, Angle::Fixed(0.3)).cz(1, 2).xy(2, 0, Angle::Fixed(0.9));
        let rho0 = DensityMatrix::from_pure(&random_state(3, 5)).unwrap();
        let rho = simulate_density(&c, &[], &rho0, Some(&NoiseModel::new(0.05))).unwrap();
        assert!((rho.trace() - ONE).norm() < 1e-12);
        assert!(rho.hermiticity_defect() < 1e-12);
        assert!(rho.eigenvalues()[0] > -1e-12);
        assert!(rho.purity() < 1.0);
    }

    #[test]
    fn controlled_gate_spreads_channels_over_pairs() {
        let mut c = Circuit::new(3);
        c.unitary(vec![0, 1], Some(2), crate::linalg::CMatrix::identity(4), 33);
        let per = NoiseModel::new(0.01).pair_channels(&c.gates[0]);
        assert_eq!(per, vec![((2, 0), 11), ((2, 1), 11), ((0, 1), 11)]);
        let mut x = Circuit::new(2);
        x.xy(0, 1, Angle::Fixed(0.1));
        let m = NoiseModel {
            placement: NoisePlacement::PerCnot,
            ..NoiseModel::new(0.01)
        };
        assert_eq!(m.channels_after(&x.gates[0]), 2);
    }

    #[test]
    fn out_of_range_probability_rejected() {
        let mut rho = DensityMatrix::from_pure(&random_state(2, 1)).unwrap();
        assert!(apply_depolarizing(&mut rho, (0, 1), 1.5).is_err());
        assert!(apply_depolarizing(&mut rho, (0, 0), 0.1).is_err());
    }

    #[test]
    fn trajectories_are_seeded() {
        let mut c = Circuit::new(2);
        c.xy(0, 1, Angle::Fixed(0.5));
        let psi0 = crate::statevec::basis_state(2, 1);
        let m = NoiseModel::new(0.3);
        let a = simulate_trajectories(&c, &[], &psi0, &m, 20, 9).unwrap();
        let b = simulate_trajectories(&c, &[], &psi0, &m, 20, 9).unwrap();
        assert_eq!(a, b);
        assert!((a.density().trace() - ONE).norm() < 1e-12);
    }
}
