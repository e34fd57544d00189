//! Eigenstate witness: purity of an ancilla qubit after the controlled
//! evolution `|0>|ψ> + |1>U|ψ>`.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng as _;
use rand_distr::{Binomial, Distribution, UnitSphere};

use crate::ansatz::CONTROLLED_BOND_GATES;
use crate::circuit::Circuit;
use crate::error::invalid;
use crate::linalg::{expi_symmetric, CMatrix};
use crate::model::PauliHamiltonian;
use crate::noise::{
    depolarize, map_trajectories, reduced_qubit_pure, sample_qubit_error, simulate_density,
    DensityMatrix, NoiseModel,
};
use crate::spectra::{check_normalized, EigenDecomposition};
use crate::statevec::simulate;
use crate::{par, rng, Error, Result, C64, ZERO};

/// Ancilla density matrix `[[a, b], [b*, 1 − a]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncillaState {
    pub a: f64,
    pub b: C64,
}

impl AncillaState {
    pub const PLUS: AncillaState = AncillaState {
        a: 0.5,
        b: C64::new(0.5, 0.0),
    };
    pub const MIXED: AncillaState = AncillaState { a: 0.5, b: ZERO };

    pub fn new(a: f64, b: C64) -> Result<Self> {
        let s = Self { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.a) || !self.b.re.is_finite() || !self.b.im.is_finite() {
            return Err(invalid("ancilla population must lie in [0, 1]"));
        }
        if self.b.norm() > (self.a * (1.0 - self.a)).sqrt() + 1e-9 {
            return Err(invalid("ancilla coherence violates positivity"));
        }
        Ok(())
    }

    /// From a row-major 2x2 matrix.
    pub fn from_matrix(m: [C64; 4]) -> Self {
        Self { a: m[0].re, b: m[1] }
    }

    pub fn purity(&self) -> f64 {
        self.a * self.a + (1.0 - self.a) * (1.0 - self.a) + 2.0 * self.b.norm_sqr()
    }

    /// `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        [2.0 * self.b.re, -2.0 * self.b.im, 2.0 * self.a - 1.0]
    }

    pub fn from_bloch(v: [f64; 3]) -> Self {
        Self {
            a: 0.5 * (1.0 + v[2]),
            b: C64::new(0.5 * v[0], -0.5 * v[1]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessRoute {
    Exact,
    Circuit,
    NoisyAnalytic,
    Density,
    Trajectory,
    Randomized,
    Tomography,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessResult {
    pub r: f64,
    pub t: f64,
    pub route: WitnessRoute,
    /// Statistical error for sampled routes.
    pub std_err: Option<f64>,
    pub ancilla: Option<AncillaState>,
}

/// `½ + ½ |Σ_n w_n e^{iλ_n t}|²`.
pub fn witness_from_weights(weights: &[f64], eigenvalues: &[f64], t: f64) -> f64 {
    let z: C64 = weights
        .iter()
        .zip(eigenvalues)
        .map(|(w, l)| C64::from_polar(*w, l * t))
        .sum();
    0.5 + 0.5 * z.norm_sqr()
}

pub fn witness_exact(psi: &[C64], eig: &EigenDecomposition, t: f64) -> Result<WitnessResult> {
    let w = eig.weights(psi)?;
    let coherence: C64 = w
        .iter()
        .zip(&eig.eigenvalues)
        .map(|(w, l)| C64::from_polar(0.5 * w, l * t))
        .sum();
    let anc = AncillaState {
        a: 0.5,
        b: coherence,
    };
    Ok(WitnessResult {
        r: anc.purity(),
        t,
        route: WitnessRoute::Exact,
        std_err: None,
        ancilla: Some(anc),
    })
}

/// Infinite-time dephased average `½ (1 + EIPR)`.
pub fn long_time_witness(eipr: f64) -> f64 {
    0.5 * (1.0 + eipr)
}

/// Short-time upper bound `½ (1 + cos(Σ_{m,n} w_m w_n |λ_m − λ_n| t))`,
/// valid while `max |λ_m − λ_n| t ≤ π/2`.
pub fn jensen_bound(weights: &[f64], eigenvalues: &[f64], t: f64) -> f64 {
    let mut s = 0.0;
    for (wm, lm) in weights.iter().zip(eigenvalues) {
        for (wn, ln) in weights.iter().zip(eigenvalues) {
            s += wm * wn * (lm - ln).abs();
        }
    }
    0.5 * (1.0 + (s * t).cos())
}

/// Dense `e^{−iHt}` on the full `2^N` register.
pub fn evolution_unitary(h: &PauliHamiltonian, t: f64) -> CMatrix {
    expi_symmetric(&h.full_matrix(), h.full_dim(), -t)
}

/// Input to the witness circuit: a system state, or a circuit (with its
/// parameters) that prepares it from `|0...0>`.
#[derive(Debug, Clone, Copy)]
pub enum WitnessInput<'a> {
    State(&'a [C64]),
    Prepared { circuit: &'a Circuit, params: &'a [f64] },
}

/// Controlled evolution: an exact system unitary (controlled on the
/// ancilla, noiseless, optionally followed by a terminal ancilla channel of
/// strength `p_eff = 33 N p`), or a circuit on `N + 1` qubits with the
/// ancilla at index `N`.
#[derive(Debug, Clone, Copy)]
pub enum Evolution<'a> {
    Exact(&'a CMatrix),
    Circuit { circuit: &'a Circuit, params: &'a [f64] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Statevector,
    Density,
    Trajectory { n_traj: usize, seed: u64 },
}

struct Assembled {
    circuit: Circuit,
    params: Vec<f64>,
    psi0: Vec<C64>,
    n_sys: usize,
    terminal_lambda: f64,
}

fn assemble(
    input: WitnessInput<'_>,
    evolution: Evolution<'_>,
    noise: Option<&NoiseModel>,
) -> Result<Assembled> {
    let (n_sys, prep, prep_params, sys_state) = match input {
        WitnessInput::State(psi) => {
            if !psi.len().is_power_of_two() || psi.len() < 2 {
                return Err(invalid("system state length must be a power of two"));
            }
            check_normalized(psi)?;
            (psi.len().trailing_zeros() as usize, None, Vec::new(), Some(psi))
        }
        WitnessInput::Prepared { circuit, params } => {
            circuit.check_params(params)?;
            (circuit.n_qubits, Some(circuit), params.to_vec(), None)
        }
    };
    let d = 1usize << n_sys;
    let full = n_sys + 1;
    let mut circuit = match prep {
        Some(c) => c.widened(full),
        None => Circuit::new(full),
    };
    let mut params = prep_params;
    let mut terminal_lambda = 0.0;
    match evolution {
        Evolution::Exact(u) => {
            if u.dim != d {
                return Err(Error::Shape {
                    expected: d,
                    got: u.dim,
                });
            }
            circuit.unitary((0..n_sys).collect(), Some(n_sys), u.clone(), 0);
            if let Some(m) = noise {
                terminal_lambda = CONTROLLED_BOND_GATES as f64 * n_sys as f64 * m.p;
                if terminal_lambda > 1.0 {
                    return Err(invalid("p_eff = 33 N p exceeds 1"));
                }
            }
        }
        Evolution::Circuit { circuit: evo, params: p } => {
            if evo.n_qubits != full {
                return Err(Error::Shape {
                    expected: full,
                    got: evo.n_qubits,
                });
            }
            evo.check_params(p)?;
            circuit = circuit.then(evo);
            params.extend_from_slice(p);
        }
    }
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut psi0 = vec![ZERO; 2 * d];
    match sys_state {
        Some(psi) => {
            for (s, z) in psi.iter().enumerate() {
                psi0[s] = z * h;
                psi0[d + s] = z * h;
            }
        }
        None => {
            psi0[0] = C64::new(h, 0.0);
            psi0[d] = C64::new(h, 0.0);
        }
    }
    Ok(Assembled {
        circuit,
        params,
        psi0,
        n_sys,
        terminal_lambda,
    })
}

/// Ancilla purity after the witness circuit, evaluated on `engine`.
pub fn witness_circuit(
    input: WitnessInput<'_>,
    evolution: Evolution<'_>,
    t: f64,
    engine: Engine,
    noise: Option<&NoiseModel>,
) -> Result<WitnessResult> {
    if let Some(m) = noise {
        m.validate()?;
    }
    let noisy = noise.is_some_and(|m| m.p > 0.0);
    let a = assemble(input, evolution, noise)?;
    let anc_q = a.n_sys;
    let (anc, route, std_err) = match engine {
        Engine::Statevector => {
            if noisy {
                return Err(invalid("the statevector engine cannot apply noise"));
            }
            let psi = simulate(&a.circuit, &a.params, &a.psi0)?;
            (
                AncillaState::from_matrix(reduced_qubit_pure(&psi, anc_q)),
                WitnessRoute::Circuit,
                None,
            )
        }
        Engine::Density => {
            let rho0 = DensityMatrix::from_pure(&a.psi0)?;
            let mut rho = simulate_density(&a.circuit, &a.params, &rho0, noise)?;
            if a.terminal_lambda > 0.0 {
                depolarize(&mut rho, &[anc_q], a.terminal_lambda)?;
            }
            (
                AncillaState::from_matrix(rho.reduced_qubit(anc_q)),
                WitnessRoute::Density,
                None,
            )
        }
        Engine::Trajectory { n_traj, seed } => {
            let model = noise.copied().unwrap_or(NoiseModel::new(0.0));
            let lam = a.terminal_lambda;
            let mats = map_trajectories(&a.circuit, &a.params, &a.psi0, &model, n_traj, seed, |mut psi, rng| {
                if lam > 0.0 {
                    sample_qubit_error(&mut psi, anc_q, lam, rng);
                }
                reduced_qubit_pure(&psi, anc_q)
            })?;
            let (anc, se) = average_ancilla(&mats);
            (anc, WitnessRoute::Trajectory, Some(se))
        }
    };
    Ok(WitnessResult {
        r: anc.purity(),
        t,
        route,
        std_err,
        ancilla: Some(anc),
    })
}

/// Mean ancilla matrix and the delta-method standard error of its purity.
fn average_ancilla(mats: &[[C64; 4]]) -> (AncillaState, f64) {
    let n = mats.len() as f64;
    let samples: Vec<[f64; 3]> = mats.iter().map(|m| [m[0].re, m[1].re, m[1].im]).collect();
    let mut mean = [0.0; 3];
    for s in &samples {
        for k in 0..3 {
            mean[k] += s[k] / n;
        }
    }
    let anc = AncillaState {
        a: mean[0],
        b: C64::new(mean[1], mean[2]),
    };
    if mats.len() < 2 {
        return (anc, 0.0);
    }
    // r = a² + (1 − a)² + 2(x² + y²)
    let g = [4.0 * mean[0] - 2.0, 4.0 * mean[1], 4.0 * mean[2]];
    let proj: Vec<f64> = samples
        .iter()
        .map(|s| (0..3).map(|k| g[k] * (s[k] - mean[k])).sum())
        .collect();
    let var = proj.iter().map(|x| x * x).sum::<f64>() / (n - 1.0);
    (anc, (var / n).sqrt())
}

/// Purity after the affine map `ρ → (1 − p_eff) ρ + p_eff I/2` with
/// `p_eff = n_gates · p`.
pub fn witness_noisy_analytic(state: AncillaState, p: f64, n_gates: u64) -> Result<WitnessResult> {
    state.validate()?;
    let p_eff = n_gates as f64 * p;
    if !(0.0..=1.0).contains(&p_eff) {
        return Err(invalid("p_eff must lie in [0, 1]"));
    }
    let anc = AncillaState {
        a: (1.0 - p_eff) * state.a + 0.5 * p_eff,
        b: state.b * (1.0 - p_eff),
    };
    Ok(WitnessResult {
        r: anc.purity(),
        t: 0.0,
        route: WitnessRoute::NoisyAnalytic,
        std_err: None,
        ancilla: Some(anc),
    })
}

/// Randomized-measurement purity estimate: `m` Haar-random measurement
/// axes, `s` shots each, unbiased second moments per axis.
pub fn estimate_r_randomized(state: AncillaState, m: usize, s: u64, seed: u64) -> Result<WitnessResult> {
    state.validate()?;
    if m < 2 || s == 0 {
        return Err(invalid("need at least 2 bases and 1 shot"));
    }
    let v = state.bloch();
    let xs = par::map_indices(m, |k| {
        let mut r = rng::child_rng(seed, k as u64);
        let axis: [f64; 3] = UnitSphere.sample(&mut r);
        let c = axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2];
        let p0 = (0.5 * (1.0 + c)).clamp(0.0, 1.0);
        let n0 = Binomial::new(s, p0).expect("valid probability").sample(&mut r) as f64;
        let n1 = s as f64 - n0;
        let sf = s as f64;
        let (same, cross) = if s >= 2 {
            let norm = sf * (sf - 1.0);
            ((n0 * (n0 - 1.0) + n1 * (n1 - 1.0)) / norm, n0 * n1 / norm)
        } else {
            ((n0 * n0 + n1 * n1) / (sf * sf), n0 * n1 / (sf * sf))
        };
        2.0 * (same - cross)
    });
    let (mean, sem) = crate::vqe::mean_sem(&xs);
    Ok(WitnessResult {
        r: mean,
        t: 0.0,
        route: WitnessRoute::Randomized,
        std_err: Some(sem),
        ancilla: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyEstimate {
    pub result: WitnessResult,
    /// The raw reconstruction was unphysical and was projected back.
    pub clipped: bool,
}

/// Reconstruct from Pauli expectation values, projecting the Bloch
/// vector into the unit ball.
pub fn tomography_from_expectations(x: f64, y: f64, z: f64) -> (AncillaState, bool) {
    let norm = (x * x + y * y + z * z).sqrt();
    if norm > 1.0 {
        (AncillaState::from_bloch([x / norm, y / norm, z / norm]), true)
    } else {
        (AncillaState::from_bloch([x, y, z]), false)
    }
}

/// Three-axis tomography with `shots_per_axis` binomial samples per axis.
pub fn estimate_r_tomography(state: AncillaState, shots_per_axis: u64, seed: u64) -> Result<TomographyEstimate> {
    state.validate()?;
    if shots_per_axis == 0 {
        return Err(invalid("need at least one shot per axis"));
    }
    let v = state.bloch();
    let s = shots_per_axis as f64;
    let mut est = [0.0; 3];
    for k in 0..3 {
        let mut r = rng::child_rng(seed, k as u64);
        let p = (0.5 * (1.0 + v[k])).clamp(0.0, 1.0);
        let up = Binomial::new(shots_per_axis, p).expect("valid probability").sample(&mut r) as f64;
        est[k] = 2.0 * up / s - 1.0;
    }
    let (anc, clipped) = tomography_from_expectations(est[0], est[1], est[2]);
    // delta method on r = (1 + |v|²)/2 plus the O(1/S) bias scale
    let var: f64 = (0..3).map(|k| est[k] * est[k] * (1.0 - est[k] * est[k]).max(0.0) / s).sum();
    let std_err = (var + 1.0 / (s * s)).sqrt();
    Ok(TomographyEstimate {
        result: WitnessResult {
            r: anc.purity(),
            t: 0.0,
            route: WitnessRoute::Tomography,
            std_err: Some(std_err),
            ancilla: Some(anc),
        },
        clipped,
    })
}

/// Random normalized state for tests and examples.
pub fn random_state(dim: usize, rng: &mut rng::Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| {
            let g: [f64; 2] = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
            C64::new(g[0], g[1])
        })
        .collect();
    let n = crate::linalg::norm_sqr(&v).sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    v
}
