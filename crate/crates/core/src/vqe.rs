//! Excited-state VQE: minimize the energy variance `⟨H²⟩ − ⟨H⟩²` of the
//! PQC output, starting from the fixed prepared input state.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::ansatz::{pqc, prepared_state, random_parameters, AnsatzConfig};
use crate::circuit::Circuit;
use crate::error::invalid;
use crate::linalg::inner;
use crate::model::{build_hamiltonian, AAParams, PauliHamiltonian, SectorBasis};
use crate::spectra::{check_normalized, diagonalize, eipr, EigenDecomposition, DEFAULT_MAX_DIM};
use crate::statevec::{cost_and_grad, simulate, StateCost};
use crate::witness::witness_exact;
use crate::{par, rng, Error, Result, C64, ZERO};

/// Energy variance of the output state under `H`.
pub struct VarianceCost<'a> {
    pub hamiltonian: &'a PauliHamiltonian,
}

impl VarianceCost<'_> {
    /// `(⟨H⟩, H|ψ>)`.
    fn energy_and_image(&self, psi: &[C64]) -> (f64, Vec<C64>) {
        let mut h_psi = vec![ZERO; psi.len()];
        self.hamiltonian.apply_full_into(psi, &mut h_psi);
        (inner(psi, &h_psi).re, h_psi)
    }
}

impl StateCost for VarianceCost<'_> {
    fn value(&self, psi: &[C64]) -> f64 {
        let (e, h_psi) = self.energy_and_image(psi);
        crate::linalg::norm_sqr(&h_psi) - e * e
    }

    fn value_and_seed(&self, psi: &[C64]) -> Option<(f64, Vec<C64>)> {
        let (e, h_psi) = self.energy_and_image(psi);
        let value = crate::linalg::norm_sqr(&h_psi) - e * e;
        // ∂/∂ψ* of ⟨ψ|H²|ψ⟩ − ⟨ψ|H|ψ⟩² = H²ψ − 2⟨H⟩ Hψ
        let mut seed = vec![ZERO; psi.len()];
        self.hamiltonian.apply_full_into(&h_psi, &mut seed);
        for (s, hp) in seed.iter_mut().zip(&h_psi) {
            *s -= hp * (2.0 * e);
        }
        Some((value, seed))
    }
}

/// `⟨H²⟩ − ⟨H⟩²` for a normalized full-register state.
pub fn variance_cost(psi: &[C64], h: &PauliHamiltonian) -> Result<f64> {
    if psi.len() != h.full_dim() {
        return Err(Error::Shape {
            expected: h.full_dim(),
            got: psi.len(),
        });
    }
    check_normalized(psi)?;
    Ok(VarianceCost { hamiltonian: h }.value(psi))
}

/// `⟨ψ|H|ψ⟩` for a full-register state.
pub fn energy(psi: &[C64], h: &PauliHamiltonian) -> Result<f64> {
    let h_psi = h.apply_full(psi)?;
    Ok(inner(psi, &h_psi).re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Optimizer {
    #[default]
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqeConfig {
    pub ansatz: AnsatzConfig,
    pub model: AAParams,
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub n_trials: usize,
    pub k_best: usize,
    pub seed: u64,
    /// Evolution time of the eigenstate witness; `None` means `1 / W`.
    pub witness_time: Option<f64>,
}

impl VqeConfig {
    pub fn new(model: AAParams, depth_vqe: usize) -> Self {
        let ansatz = AnsatzConfig {
            boundary: model.boundary,
            ..AnsatzConfig::new(model.n_sites, depth_vqe)
        };
        Self {
            ansatz,
            model,
            optimizer: Optimizer::Adam,
            learning_rate: 0.01,
            max_iters: 2000,
            grad_tol: 1e-7,
            n_trials: 100,
            k_best: 10,
            seed: 0,
            witness_time: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.ansatz.validate()?;
        if self.ansatz.n_sites != self.model.n_sites {
            return Err(invalid("ansatz and model disagree on n_sites"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if self.n_trials == 0 || self.k_best == 0 || self.k_best > self.n_trials {
            return Err(invalid("need 1 <= k_best <= n_trials"));
        }
        if !(self.learning_rate > 0.0) || !(self.grad_tol >= 0.0) {
            return Err(invalid("learning_rate must be positive, grad_tol non-negative"));
        }
        Ok(())
    }

    pub fn evolution_time(&self) -> f64 {
        self.witness_time.unwrap_or(if self.model.w != 0.0 {
            1.0 / self.model.w
        } else {
            1.0
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    /// Lowest-cost parameters visited.
    pub params_final: Vec<f64>,
    pub cost_trace: Vec<f64>,
    pub energy: f64,
    pub variance: f64,
    pub eipr: Option<f64>,
    pub witness: Option<f64>,
    /// EIPR of the PQC output at the initial parameters.
    pub initial_eipr: Option<f64>,
    pub initial_energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub failed: bool,
}

/// Everything a trial needs, built once per configuration.
#[derive(Debug, Clone)]
pub struct VqeProblem {
    pub cfg: VqeConfig,
    pub hamiltonian: PauliHamiltonian,
    pub input_state: Vec<C64>,
    pub circuit: Circuit,
    pub eig: Option<EigenDecomposition>,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, x: &mut [f64], g: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..x.len() {
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * g[i];
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * g[i] * g[i];
            x[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

/// Gradient-descent loop shared by the VQE and the compiler. Returns the
/// best parameters, the cost trace, the iteration count and whether the
/// gradient tolerance or the early-stop predicate was met. `Err` only for
/// non-finite cost or gradient.
pub(crate) fn minimize<F>(
    mut x: Vec<f64>,
    optimizer: Optimizer,
    lr: f64,
    max_iters: usize,
    grad_tol: f64,
    mut eval: F,
    stop: impl Fn(f64) -> bool,
) -> core::result::Result<(Vec<f64>, Vec<f64>, usize, bool), Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut adam = Adam::new(x.len());
    let mut trace = Vec::with_capacity(max_iters);
    let mut best = (f64::INFINITY, x.clone());
    let mut converged = false;
    let mut iters = 0;
    for _ in 0..max_iters {
        let (value, grad) = match eval(&x) {
            Ok(v) => v,
            Err(_) => return Err(trace),
        };
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(trace);
        }
        iters += 1;
        trace.push(value);
        if value < best.0 {
            best = (value, x.clone());
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < grad_tol || stop(value) {
            converged = true;
            break;
        }
        match optimizer {
            Optimizer::Adam => adam.step(&mut x, &grad, lr),
            Optimizer::Sgd => x.iter_mut().zip(&grad).for_each(|(xi, gi)| *xi -= lr * gi),
        }
    }
    Ok((best.1, trace, iters, converged))
}

impl VqeProblem {
    pub fn new(cfg: VqeConfig) -> Result<Self> {
        cfg.validate()?;
        let hamiltonian = build_hamiltonian(&cfg.model)?;
        let input_state = prepared_state(&cfg.ansatz)?;
        let circuit = pqc(&cfg.ansatz)?;
        let basis = SectorBasis::zero_magnetization(cfg.model.n_sites)?;
        let eig = if basis.dim() <= DEFAULT_MAX_DIM {
            Some(diagonalize(&hamiltonian, &basis)?)
        } else {
            None
        };
        Ok(Self {
            cfg,
            hamiltonian,
            input_state,
            circuit,
            eig,
        })
    }

    pub fn output_state(&self, params: &[f64]) -> Result<Vec<C64>> {
        simulate(&self.circuit, params, &self.input_state)
    }

    pub fn initial_parameters(&self, trial_seed: u64) -> Vec<f64> {
        random_parameters(self.circuit.n_params, self.cfg.ansatz.init_scale, trial_seed)
    }

    /// Optimize from the initial parameters drawn with `trial_seed`.
    pub fn run_trial(&self, trial_seed: u64) -> TrialResult {
        let x0 = self.initial_parameters(trial_seed);
        self.run_from(x0, trial_seed)
    }

    pub fn run_from(&self, x0: Vec<f64>, trial_seed: u64) -> TrialResult {
        let cost = VarianceCost {
            hamiltonian: &self.hamiltonian,
        };
        let initial_state = self.output_state(&x0).unwrap_or_default();
        let initial_eipr = self
            .eig
            .as_ref()
            .and_then(|e| eipr(&initial_state, e).ok());
        let initial_energy = energy(&initial_state, &self.hamiltonian).unwrap_or(f64::NAN);

        let outcome = minimize(
            x0.clone(),
            self.cfg.optimizer,
            self.cfg.learning_rate,
            self.cfg.max_iters,
            self.cfg.grad_tol,
            |x| {
                let g = cost_and_grad(&self.circuit, x, &self.input_state, &cost)?;
                Ok((g.value, g.gradient))
            },
            |_| false,
        );
        let (params, trace, iterations, converged) = match outcome {
            Ok(v) => v,
            Err(trace) => {
                return TrialResult {
                    seed: trial_seed,
                    params_final: x0,
                    iterations: trace.len(),
                    cost_trace: trace,
                    energy: f64::NAN,
                    variance: f64::NAN,
                    eipr: None,
                    witness: None,
                    initial_eipr,
                    initial_energy,
                    converged: false,
                    failed: true,
                }
            }
        };
        let psi = self.output_state(&params).unwrap_or_default();
        let variance = cost.value(&psi);
        let e = energy(&psi, &self.hamiltonian).unwrap_or(f64::NAN);
        let (eipr_final, witness) = match &self.eig {
            Some(eig) => (
                eipr(&psi, eig).ok(),
                witness_exact(&psi, eig, self.cfg.evolution_time())
                    .ok()
                    .map(|w| w.r),
            ),
            None => (None, None),
        };
        TrialResult {
            seed: trial_seed,
            params_final: params,
            cost_trace: trace,
            energy: e,
            variance,
            eipr: eipr_final,
            witness,
            initial_eipr,
            initial_energy,
            iterations,
            converged,
            failed: !variance.is_finite(),
        }
    }

    /// `n_trials` independent trials; trial `i` uses child seed `i` of
    /// `cfg.seed`.
    pub fn run_ensemble(&self) -> Result<Ensemble> {
        let n = self.cfg.n_trials;
        let trials = par::map_indices(n, |i| self.run_trial(rng::derive_seed(self.cfg.seed, i as u64)));
        Ensemble::from_trials(trials, self.cfg.k_best)
    }
}

pub fn run_trial(cfg: &VqeConfig, trial_seed: u64) -> Result<TrialResult> {
    Ok(VqeProblem::new(*cfg)?.run_trial(trial_seed))
}

pub fn run_ensemble(cfg: &VqeConfig) -> Result<Ensemble> {
    VqeProblem::new(*cfg)?.run_ensemble()
}

/// Mean and standard error of the mean.
pub fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub sem: f64,
}

impl Stat {
    fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let (mean, sem) = mean_sem(xs);
        Some(Self { mean, sem })
    }
}

/// All trials plus statistics over the `k_best` lowest-variance ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub trials: Vec<TrialResult>,
    /// Indices into `trials`, best first.
    pub selected: Vec<usize>,
    pub failed: usize,
    pub variance: Stat,
    pub energy: Stat,
    pub eipr: Option<Stat>,
    pub witness: Option<Stat>,
}

impl Ensemble {
    pub fn from_trials(trials: Vec<TrialResult>, k_best: usize) -> Result<Self> {
        let mut ok: Vec<usize> = (0..trials.len()).filter(|&i| !trials[i].failed).collect();
        if ok.is_empty() {
            return Err(Error::AllTrialsFailed(trials.len()));
        }
        ok.sort_by(|&i, &j| trials[i].variance.total_cmp(&trials[j].variance).then(i.cmp(&j)));
        ok.truncate(k_best);
        let pick = |f: &dyn Fn(&TrialResult) -> Option<f64>| -> Vec<f64> {
            ok.iter().filter_map(|&i| f(&trials[i])).collect()
        };
        let variance = Stat::of(&pick(&|t| Some(t.variance))).expect("non-empty");
        let energy = Stat::of(&pick(&|t| Some(t.energy))).expect("non-empty");
        let eipr = Stat::of(&pick(&|t| t.eipr));
        let witness = Stat::of(&pick(&|t| t.witness));
        Ok(Self {
            failed: trials.iter().filter(|t| t.failed).count(),
            trials,
            selected: ok,
            variance,
            energy,
            eipr,
            witness,
        })
    }

    pub fn selected_trials(&self) -> impl Iterator<Item = &TrialResult> {
        self.selected.iter().map(|&i| &self.trials[i])
    }
}

/// `ln(1 − r)`, with `1 − r` floored at machine epsilon.
pub fn ln_one_minus(r: f64) -> f64 {
    (1.0 - r).max(f64::EPSILON).ln()
}
