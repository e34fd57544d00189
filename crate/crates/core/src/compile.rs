//! Variational compilation of the ancilla-controlled evolution into a
//! hardware-efficient circuit.

use alloc::vec;
use alloc::vec::Vec;

use crate::ansatz::{hardware_efficient_ansatz, random_parameters};
use crate::circuit::Circuit;
use crate::error::invalid;
use crate::linalg::{expi_symmetric, CMatrix};
use crate::model::{build_hamiltonian, AAParams};
use crate::statevec::{cost_and_grad_batch, simulate, BatchCost};
use crate::vqe::{minimize, Optimizer};
use crate::{par, rng, Error, Result, C64, ZERO};

/// Largest register (system plus ancilla) for a dense target.
pub const MAX_TARGET_QUBITS: usize = 10;

/// `V = diag(I, e^{iHt})` on `N + 1` qubits, the ancilla being the most
/// significant qubit (index `N`).
pub fn build_target(params: &AAParams, t: f64) -> Result<CMatrix> {
    params.validate()?;
    let n = params.n_sites;
    if n + 1 > MAX_TARGET_QUBITS {
        return Err(Error::ResourceLimit(alloc::format!(
            "dense target on {} qubits exceeds the limit of {MAX_TARGET_QUBITS}",
            n + 1
        )));
    }
    let h = build_hamiltonian(params)?;
    let d = h.full_dim();
    let e = expi_symmetric(&h.full_matrix(), d, t);
    let mut v = CMatrix::zeros(2 * d);
    for i in 0..d {
        v.set(i, i, C64::new(1.0, 0.0));
        for j in 0..d {
            v.set(d + i, d + j, e.get(i, j));
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileProblem {
    pub target: CMatrix,
    pub ansatz_depth: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop a trial once its fidelity reaches this value.
    pub fidelity_goal: f64,
    pub n_trials: usize,
    pub learning_rate: f64,
    /// Initial parameters are uniform in `[−init_scale, init_scale]`.
    pub init_scale: f64,
}

impl CompileProblem {
    pub fn new(target: CMatrix, ansatz_depth: usize) -> Self {
        Self {
            target,
            ansatz_depth,
            seed: 0,
            max_iters: 3000,
            fidelity_goal: 0.999,
            n_trials: 20,
            learning_rate: 0.02,
            init_scale: core::f64::consts::PI,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.target.dim.trailing_zeros() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !self.target.dim.is_power_of_two() || self.target.dim < 2 {
            return Err(invalid("target dimension must be a power of two"));
        }
        if self.ansatz_depth == 0 || self.max_iters == 0 || self.n_trials == 0 {
            return Err(invalid("ansatz_depth, max_iters and n_trials must be positive"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(invalid("learning_rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileResult {
    pub params: Vec<f64>,
    /// `|Tr(U V†)| / d`.
    pub fidelity: f64,
    pub cost_trace: Vec<f64>,
    pub circuit: Circuit,
    /// Final fidelity of every trial; `NaN` for failed trials.
    pub trial_fidelities: Vec<f64>,
    pub best_trial: usize,
}

/// `C = −|Tr(U V†)| / d` evaluated from the outputs `U w_j` for the columns
/// `w_j` of `V†`.
struct TraceCost {
    d: usize,
}

impl BatchCost for TraceCost {
    fn value_and_seeds(&self, outputs: &[Vec<C64>]) -> Option<(f64, Vec<Vec<C64>>)> {
        let f: C64 = outputs.iter().enumerate().map(|(j, o)| o[j]).sum();
        let d = self.d as f64;
        let mag = f.norm();
        let value = -mag / d;
        let coef = if mag > 0.0 { -f / (2.0 * d * mag) } else { ZERO };
        let seeds = (0..outputs.len())
            .map(|j| {
                let mut s = vec![ZERO; self.d];
                s[j] = coef;
                s
            })
            .collect();
        Some((value, seeds))
    }
}

fn adjoint_columns(v: &CMatrix) -> Vec<Vec<C64>> {
    let d = v.dim;
    (0..d).map(|j| (0..d).map(|i| v.get(j, i).conj()).collect()).collect()
}

/// `|Tr(U V†)| / d` for the circuit's unitary `U`.
pub fn fidelity(circuit: &Circuit, params: &[f64], target: &CMatrix) -> Result<f64> {
    let cols = adjoint_columns(target);
    let mut f = ZERO;
    for (j, w) in cols.iter().enumerate() {
        f += simulate(circuit, params, w)?[j];
    }
    Ok(f.norm() / target.dim as f64)
}

pub fn compile(problem: &CompileProblem) -> Result<CompileResult> {
    problem.validate()?;
    let n = problem.n_qubits();
    let d = problem.target.dim;
    let circuit = hardware_efficient_ansatz(n, problem.ansatz_depth)?;
    let inputs = adjoint_columns(&problem.target);
    let cost = TraceCost { d };
    let goal = -problem.fidelity_goal;
    let trials = par::map_indices(problem.n_trials, |k| {
        let x0 = random_parameters(
            circuit.n_params,
            problem.init_scale,
            rng::derive_seed(problem.seed, k as u64),
        );
        minimize(
            x0,
            Optimizer::Adam,
            problem.learning_rate,
            problem.max_iters,
            0.0,
            |x| {
                let g = cost_and_grad_batch(&circuit, x, &inputs, &cost)?;
                Ok((g.value, g.gradient))
            },
            |v| v <= goal,
        )
        .ok()
        .map(|(params, trace, _, _)| {
            let fid = fidelity(&circuit, &params, &problem.target).unwrap_or(f64::NAN);
            (params, trace, fid)
        })
    });
    let trial_fidelities: Vec<f64> = trials
        .iter()
        .map(|t| t.as_ref().map_or(f64::NAN, |t| t.2))
        .collect();
    let best_trial = (0..trials.len())
        .filter(|&k| trial_fidelities[k].is_finite())
        .max_by(|&a, &b| trial_fidelities[a].total_cmp(&trial_fidelities[b]).then(b.cmp(&a)))
        .ok_or(Error::AllTrialsFailed(problem.n_trials))?;
    let (params, cost_trace, fidelity) = trials.into_iter().nth(best_trial).flatten().expect("best trial exists");
    Ok(CompileResult {
        params,
        fidelity,
        cost_trace,
        circuit,
        trial_fidelities,
        best_trial,
    })
}
