//! One pipeline per experiment kind. Grid points run in grid order; the
//! trials inside a point run in parallel and are merged by index.

use std::path::Path;

use anyhow::{bail, Context as _};
use mbl_vqe_core::ansatz::{
    pqc, preparation_circuit, prepared_state, trotter_step, TrotterPlan, CONTROLLED_BOND_GATES,
};
use mbl_vqe_core::circuit::Circuit;
use mbl_vqe_core::compile::{build_target, compile, CompileProblem};
use mbl_vqe_core::model::{build_hamiltonian, SectorBasis};
use mbl_vqe_core::noise::NoiseModel;
use mbl_vqe_core::spectra::{diagonalize, eipr, level_spacing_ratio};
use mbl_vqe_core::vqe::{ln_one_minus, mean_sem, VqeProblem};
use mbl_vqe_core::witness::{
    evolution_unitary, witness_circuit, witness_exact, witness_noisy_analytic, Engine, Evolution,
    WitnessInput,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circuit_io::write_circuit;
use crate::config::{point_seed, EngineSpec, Experiment, ExperimentConfig};
use crate::fit::{depth_fit, scaling_report, SweepPoint};
use crate::records::{num, PointCache, PointRecord, RunRecord};

/// Header of the witness-sweep CSV.
pub const WITNESS_SWEEP_COLUMNS: [&str; 10] = [
    "N",
    "W",
    "depth",
    "trials",
    "k_best",
    "mean_eipr",
    "sem_eipr",
    "mean_r",
    "sem_r",
    "ln_one_minus_r",
];

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    cache: PointCache,
}

impl Ctx<'_> {
    fn log(&self, key: &str) {
        eprintln!("[{}] {key}", self.cfg.experiment.name());
    }
}

fn fin(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub params: Vec<f64>,
    pub variance: Option<f64>,
    pub energy: Option<f64>,
    pub eipr: Option<f64>,
    pub witness: Option<f64>,
    pub initial_eipr: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub failed: bool,
}

/// Noiseless VQE ensemble at one grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsemblePoint {
    pub n: usize,
    pub w: f64,
    pub depth: usize,
    pub trials: Vec<TrialSummary>,
    /// Indices of the `k_best` lowest-variance trials, best first.
    pub selected: Vec<usize>,
    pub failed: usize,
    pub mean_variance: f64,
    pub sem_variance: f64,
    pub mean_energy: f64,
    pub sem_energy: f64,
    pub mean_eipr: Option<f64>,
    pub sem_eipr: Option<f64>,
    pub mean_r: Option<f64>,
    pub sem_r: Option<f64>,
}

impl EnsemblePoint {
    fn sweep_point(&self, k_best: usize) -> SweepPoint {
        let mean_r = self.mean_r.unwrap_or(f64::NAN);
        SweepPoint {
            n: self.n,
            w: self.w,
            depth: self.depth,
            trials: self.trials.len(),
            k_best,
            mean_eipr: self.mean_eipr.unwrap_or(f64::NAN),
            sem_eipr: self.sem_eipr.unwrap_or(f64::NAN),
            mean_r,
            sem_r: self.sem_r.unwrap_or(f64::NAN),
            ln_one_minus_r: ln_one_minus(mean_r),
        }
    }

    fn selected_trials(&self) -> impl Iterator<Item = &TrialSummary> {
        self.selected.iter().map(|&i| &self.trials[i])
    }
}

fn point_key(n: usize, w: f64, depth: usize) -> String {
    format!("N={n},W={w},depth={depth}")
}

fn ensemble(ctx: &Ctx<'_>, n: usize, w: f64, depth: usize) -> anyhow::Result<EnsemblePoint> {
    let key = point_key(n, w, depth);
    ctx.cache
        .get_or_compute(&format!("ensemble:{key}"), || {
            ctx.log(&format!("{key}: training {} trials", ctx.cfg.vqe.n_trials));
            let problem = VqeProblem::new(ctx.cfg.vqe_config(n, w, depth))?;
            let e = problem.run_ensemble()?;
            let trials = e
                .trials
                .iter()
                .map(|t| TrialSummary {
                    seed: t.seed,
                    params: t.params_final.clone(),
                    variance: fin(t.variance),
                    energy: fin(t.energy),
                    eipr: t.eipr,
                    witness: t.witness,
                    initial_eipr: t.initial_eipr,
                    iterations: t.iterations,
                    converged: t.converged,
                    failed: t.failed,
                })
                .collect();
            Ok(EnsemblePoint {
                n,
                w,
                depth,
                trials,
                selected: e.selected.clone(),
                failed: e.failed,
                mean_variance: e.variance.mean,
                sem_variance: e.variance.sem,
                mean_energy: e.energy.mean,
                sem_energy: e.energy.sem,
                mean_eipr: e.eipr.map(|s| s.mean),
                sem_eipr: e.eipr.map(|s| s.sem),
                mean_r: e.witness.map(|s| s.mean),
                sem_r: e.witness.map(|s| s.sem),
            })
        })
        .with_context(|| format!("grid point {key}"))
}

/// Preparation followed by the PQC, with its full parameter vector.
fn prepared_circuit(cfg: &ExperimentConfig, n: usize, depth: usize, pqc_params: &[f64]) -> anyhow::Result<(Circuit, Vec<f64>)> {
    let a = cfg.ansatz_config(n, depth);
    let c = preparation_circuit(&a)?.then(&pqc(&a)?);
    let mut params = vec![a.theta0];
    params.extend_from_slice(pqc_params);
    Ok((c, params))
}

fn engine(cfg: &ExperimentConfig, noise: Option<&NoiseModel>, seed: u64) -> Engine {
    match (noise, cfg.noise.engine) {
        (None, _) => Engine::Statevector,
        (Some(_), EngineSpec::Density) => Engine::Density,
        (Some(_), EngineSpec::Trajectory) => Engine::Trajectory {
            n_traj: cfg.noise.n_traj,
            seed,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EvolutionKind {
    Exact,
    Trotter,
}

/// Witness of every selected trial through the circuit route.
fn circuit_witnesses(
    ctx: &Ctx<'_>,
    point: &EnsemblePoint,
    kind: EvolutionKind,
    noise: Option<&NoiseModel>,
) -> anyhow::Result<Vec<(f64, Option<f64>)>> {
    let cfg = ctx.cfg;
    let (n, w, depth) = (point.n, point.w, point.depth);
    let t = cfg.time.time(w);
    let model = cfg.model_params(n, w);
    let unitary;
    let trotter;
    let evolution = match kind {
        EvolutionKind::Exact => {
            unitary = evolution_unitary(&build_hamiltonian(&model)?, t);
            Evolution::Exact(&unitary)
        }
        EvolutionKind::Trotter => {
            trotter = trotter_step(&TrotterPlan {
                controlled: true,
                ..TrotterPlan::new(model, t)
            })?;
            Evolution::Circuit {
                circuit: &trotter,
                params: &[],
            }
        }
    };
    let key = point_key(n, w, depth);
    point
        .selected_trials()
        .enumerate()
        .map(|(i, trial)| {
            let (c, params) = prepared_circuit(cfg, n, depth, &trial.params)?;
            let seed = point_seed(cfg.seed, &format!("{key},{kind:?},trial={i}"));
            let r = witness_circuit(
                WitnessInput::Prepared {
                    circuit: &c,
                    params: &params,
                },
                evolution,
                t,
                engine(cfg, noise, seed),
                noise,
            )?;
            Ok((r.r, r.std_err))
        })
        .collect()
}

fn level_stats(ctx: &Ctx<'_>) -> anyhow::Result<RunRecord> {
    let cfg = ctx.cfg;
    let columns = ["N", "W", "n_phases", "mean_ratio", "sem_ratio", "degenerate"];
    let mut points = Vec::new();
    for &n in &cfg.sweep.sizes {
        for &w in &cfg.sweep.w {
            let key = format!("N={n},W={w}");
            let p = ctx.cache.get_or_compute(&format!("levels:{key}"), || {
                ctx.log(&key);
                let s = level_spacing_ratio(
                    &cfg.model_params(n, w),
                    cfg.sweep.n_phases,
                    point_seed(cfg.seed, &key),
                    cfg.window(),
                )
                .with_context(|| format!("grid point {key}"))?;
                let per = s.ratios.len() / s.n_phases.max(1);
                let means: Vec<f64> = if per == 0 {
                    Vec::new()
                } else {
                    s.ratios.chunks(per).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
                };
                let (_, sem) = mean_sem(&means);
                Ok(PointRecord {
                    key: key.clone(),
                    row: vec![
                        n.into(),
                        num(w),
                        s.n_phases.into(),
                        num(s.mean_ratio),
                        num(sem),
                        s.degenerate.into(),
                    ],
                    detail: Value::Null,
                })
            })?;
            points.push(p);
        }
    }
    Ok(RunRecord::new(cfg, &columns, points))
}

fn input_eipr_scan(ctx: &Ctx<'_>) -> anyhow::Result<RunRecord> {
    let cfg = ctx.cfg;
    let columns = ["N", "W", "theta0", "eipr"];
    let mut points = Vec::new();
    for &n in &cfg.sweep.sizes {
        for &w in &cfg.sweep.w {
            let key = format!("N={n},W={w}");
            let rows: Vec<PointRecord> = ctx.cache.get_or_compute(&format!("scan:{key}"), || {
                ctx.log(&key);
                let h = build_hamiltonian(&cfg.model_params(n, w))?;
                let eig = diagonalize(&h, &SectorBasis::zero_magnetization(n)?)
                    .with_context(|| format!("grid point {key}"))?;
                cfg.sweep
                    .theta0
                    .iter()
                    .map(|&th| {
                        let mut a = cfg.ansatz_config(n, 0);
                        a.theta0 = th;
                        let psi = prepared_state(&a)?;
                        Ok(PointRecord {
                            key: format!("{key},theta0={th}"),
                            row: vec![n.into(), num(w), num(th), num(eipr(&psi, &eig)?)],
                            detail: Value::Null,
                        })
                    })
                    .collect()
            })?;
            points.extend(rows);
        }
    }
    Ok(RunRecord::new(cfg, &columns, points))
}

fn grid(cfg: &ExperimentConfig) -> Vec<(usize, f64, usize)> {
    let mut g = Vec::new();
    for &n in &cfg.sweep.sizes {
        for &w in &cfg.sweep.w {
            for &d in &cfg.sweep.depths {
                g.push((n, w, d));
            }
        }
    }
    g
}

fn trial_detail(p: &EnsemblePoint) -> Value {
    json!({ "selected": p.selected, "trials": p.trials })
}

fn vqe_sweep(ctx: &Ctx<'_>) -> anyhow::Result<RunRecord> {
    let cfg = ctx.cfg;
    let columns = [
        "N",
        "W",
        "depth",
        "trials",
        "k_best",
        "failed",
        "mean_variance",
        "sem_variance",
        "mean_energy",
        "sem_energy",
        "mean_eipr",
        "sem_eipr",
    ];
    let mut points = Vec::new();
    for (n, w, d) in grid(cfg) {
        let p = ensemble(ctx, n, w, d)?;
        points.push(PointRecord {
            key: point_key(n, w, d),
            row: vec![
                n.into(),
                num(w),
                d.into(),
                p.trials.len().into(),
                cfg.vqe.k_best.into(),
                p.failed.into(),
                num(p.mean_variance),
                num(p.sem_variance),
                num(p.mean_energy),
                num(p.sem_energy),
                num(p.mean_eipr.unwrap_or(f64::NAN)),
                num(p.sem_eipr.unwrap_or(f64::NAN)),
            ],
            detail: trial_detail(&p),
        });
    }
    Ok(RunRecord::new(cfg, &columns, points))
}

fn sweep_row(s: &SweepPoint) -> Vec<Value> {
    vec![
        s.n.into(),
        num(s.w),
        s.depth.into(),
        s.trials.into(),
        s.k_best.into(),
        num(s.mean_eipr),
        num(s.sem_eipr),
        num(s.mean_r),
        num(s.sem_r),
        num(s.ln_one_minus_r),
    ]
}

fn witness_points(ctx: &Ctx<'_>) -> anyhow::Result<Vec<(SweepPoint, EnsemblePoint)>> {
    grid(ctx.cfg)
        .into_iter()
        .map(|(n, w, d)| {
            let p = ensemble(ctx, n, w, d)?;
            Ok((p.sweep_point(ctx.cfg.vqe.k_best), p))
        })
        .collect()
}

fn witness_sweep(ctx: &Ctx<'_>) -> anyhow::Result<RunRecord> {
    let points = witness_points(ctx)?
        .into_iter()
        .map(|(s, p)| PointRecord {
            key: point_key(s.n, s.w, s.depth),
            row: sweep_row(&s),
            detail: trial_detail(&p),
        })
        .collect();
    Ok(RunRecord::new(ctx.cfg, &WITNESS_SWEEP_COLUMNS, points))
}

fn noisy_model(cfg: &ExperimentConfig) -> Option<NoiseModel> {
    (cfg.noise.p > 0.0).then(|| cfg.noise_model())
}

fn engine_name(cfg: &ExperimentConfig, noise: Option<&NoiseModel>) -> &'static str {
    match (noise, cfg.noise.engine) {
        (None, _) => "statevector",
        (Some(_), EngineSpec::Density) => "density",
        (Some(_), EngineSpec::Trajectory) => "trajectory",
    }
}

fn noisy_witness(ctx: &Ctx<'_>) -> anyhow::Result<RunRecord> {
    let cfg = ctx.cfg;
    let noise = noisy_model(cfg);
    let columns = [
        "N",
        "W",
        "depth",
        "p",
        "engine",
        "mean_r_ideal",
        "mean_r_noisy",
        "sem_r_noisy",
        "mean_r_analytic",
        "ln_one_minus_r_noisy",
    ];
    let mut points = Vec::new();
    for (n, w, d) in grid(cfg) {
        let p = ensemble(ctx, n, w, d)?;
        let key = point_key(n, w, d);
        let rs: Vec<(f64, Option<f64>)> = ctx.cache.get_or_compute(&format!("noisy:{key}"), || {
            ctx.log(&format!("{key}: noisy witness"));
            circuit_witnesses(ctx, &p, EvolutionKind::Exact, noise.as_ref()).with_context(|| format!("grid point {key}"))
        })?;
        let noisy: Vec<f64> = rs.iter().map(|x| x.0).collect();
        let (mean_noisy, sem_noisy) = mean_sem(&noisy);
        let analytic = analytic_witnesses(cfg, &p)?;
        points.push(PointRecord {
            key,
            row: vec![
                n.into(),
                num(w),
                d.into(),
                num(cfg.noise.p),
                engine_name(cfg, noise.as_ref()).into(),
                num(p.mean_r.unwrap_or(f64::NAN)),
                num(mean_noisy),
                num(sem_noisy),
                num(mean_sem(&analytic).0),
                num(ln_one_minus(mean_noisy)),
            ],
            detail: json!({ "r_noisy": noisy, "r_analytic": analytic }),
        });
    }
    Ok(RunRecord::new(cfg, &columns, points))
}

/// Ideal ancilla states of the selected trials pushed through the
/// terminal affine noise map with `33 N` gates.
fn analytic_witnesses(cfg: &ExperimentConfig, p: &EnsemblePoint) -> anyhow::Result<Vec<f64>> {
    let model = cfg.model_params(p.n, p.w);
    let h = build_hamiltonian(&model)?;
    let eig = diagonalize(&h, &SectorBasis::zero_magnetization(p.n)?)?;
    let t = cfg.time.time(p.w);
    let n_gates = CONTROLLED_BOND_GATES as u64 * p.n as u64;
    p.selected_trials()
        .map(|trial| {
            let (c, params) = prepared_circuit(cfg, p.n, p.depth, &trial.params)?;
            let psi = mbl_vqe_core::statevec::simulate(&c, &params, &mbl_vqe_core::statevec::zero_state(p.n))?;
            let anc = witness_exact(&psi, &eig, t)?.ancilla.expect("exact route sets the ancilla");
            Ok(witness_noisy_analytic(anc, cfg.noise.p, n_gates)?.r)
        })
        .collect()
}

fn trotter_witness(ctx: &Ctx<'_>) -> anyhow::Result<RunRecord> {
    let cfg = ctx.cfg;
    let noise = noisy_model(cfg);
    let columns = [
        "N",
        "W",
        "depth",
        "p",
        "engine",
        "mean_r_exact",
        "mean_r_trotter",
        "sem_r_trotter",
        "ln_one_minus_r_trotter",
    ];
    let mut points = Vec::new();
    for (n, w, d) in grid(cfg) {
        let p = ensemble(ctx, n, w, d)?;
        let key = point_key(n, w, d);
        let rs: Vec<(f64, Option<f64>)> = ctx.cache.get_or_compute(&format!("trotter:{key}"), || {
            ctx.log(&format!("{key}: Trotter witness"));
            circuit_witnesses(ctx, &p, EvolutionKind::Trotter, noise.as_ref()).with_context(|| format!("grid point {key}"))
        })?;
        let r: Vec<f64> = rs.iter().map(|x| x.0).collect();
        let (mean, sem) = mean_sem(&r);
        points.push(PointRecord {
            key,
            row: vec![
                n.into(),
                num(w),
                d.into(),
                num(cfg.noise.p),
                engine_name(cfg, noise.as_ref()).into(),
                num(p.mean_r.unwrap_or(f64::NAN)),
                num(mean),
                num(sem),
                num(ln_one_minus(mean)),
            ],
            detail: json!({ "r_trotter": r }),
        });
    }
    Ok(RunRecord::new(cfg, &columns, points))
}

fn compile_experiment(ctx: &Ctx<'_>, out_dir: Option<&Path>) -> anyhow::Result<RunRecord> {
    let cfg = ctx.cfg;
    let columns = [
        "N",
        "W",
        "t",
        "depth",
        "fidelity",
        "best_trial",
        "two_qubit_gates",
        "trotter_two_qubit_gates",
        "r_exact",
        "r_compiled",
    ];
    let mut points = Vec::new();
    for &n in &cfg.sweep.sizes {
        for &w in &cfg.sweep.w {
            let key = format!("N={n},W={w}");
            let t = cfg.time.time(w);
            let (rec, circuit_text): (PointRecord, String) = ctx.cache.get_or_compute(&format!("compile:{key}"), || {
                ctx.log(&format!("{key}: compiling"));
                let model = cfg.model_params(n, w);
                let target = build_target(&model, t).with_context(|| format!("grid point {key}"))?;
                let c = &cfg.compile;
                let problem = CompileProblem {
                    seed: point_seed(cfg.seed, &key),
                    max_iters: c.max_iters,
                    fidelity_goal: c.fidelity_goal,
                    n_trials: c.n_trials,
                    learning_rate: c.learning_rate,
                    init_scale: c.init_scale,
                    ..CompileProblem::new(target, c.depth)
                };
                let res = compile(&problem).with_context(|| format!("grid point {key}"))?;
                let psi = prepared_state(&cfg.ansatz_config(n, 0))?;
                let h = build_hamiltonian(&model)?;
                let eig = diagonalize(&h, &SectorBasis::zero_magnetization(n)?)?;
                let r_exact = witness_exact(&psi, &eig, t)?.r;
                let r_compiled = witness_circuit(
                    WitnessInput::State(&psi),
                    Evolution::Circuit {
                        circuit: &res.circuit,
                        params: &res.params,
                    },
                    t,
                    Engine::Statevector,
                    None,
                )?
                .r;
                let trotter = trotter_step(&TrotterPlan {
                    controlled: true,
                    ..TrotterPlan::new(model, t)
                })?;
                let bound = res.circuit.bind(&res.params)?;
                Ok((
                    PointRecord {
                        key: key.clone(),
                        row: vec![
                            n.into(),
                            num(w),
                            num(t),
                            c.depth.into(),
                            num(res.fidelity),
                            res.best_trial.into(),
                            res.circuit.two_qubit_gate_count().into(),
                            trotter.two_qubit_gate_count().into(),
                            num(r_exact),
                            num(r_compiled),
                        ],
                        detail: json!({
                            "trial_fidelities": res.trial_fidelities.iter().map(|&f| num(f)).collect::<Vec<_>>(),
                            "params": res.params,
                        }),
                    },
                    write_circuit(&bound),
                ))
            })?;
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(format!("compiled_N{n}_W{w}.circuit")), circuit_text)?;
            }
            points.push(rec);
        }
    }
    Ok(RunRecord::new(cfg, &columns, points))
}

/// Witness-sweep points read back from a CSV written by this tool.
pub fn read_sweep_csv(path: &Path) -> anyhow::Result<Vec<SweepPoint>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != WITNESS_SWEEP_COLUMNS {
        bail!("{} is not a witness-sweep CSV (header {header:?})", path.display());
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let f = |k: usize| -> anyhow::Result<f64> { Ok(rec[k].parse::<f64>()?) };
            let u = |k: usize| -> anyhow::Result<usize> { Ok(rec[k].parse::<usize>()?) };
            Ok(SweepPoint {
                n: u(0)?,
                w: f(1)?,
                depth: u(2)?,
                trials: u(3)?,
                k_best: u(4)?,
                mean_eipr: f(5)?,
                sem_eipr: f(6)?,
                mean_r: f(7)?,
                sem_r: f(8)?,
                ln_one_minus_r: f(9)?,
            })
        })
        .collect()
}

fn depth_fit_experiment(ctx: &Ctx<'_>) -> anyhow::Result<RunRecord> {
    let cfg = ctx.cfg;
    let sweep: Vec<SweepPoint> = match &cfg.fit.input {
        Some(path) => read_sweep_csv(path)?,
        None => witness_points(ctx)?.into_iter().map(|(s, _)| s).collect(),
    };
    let fits = depth_fit(&sweep, cfg.fit.effective_zero)?;
    let columns = ["N", "W", "slope", "intercept", "fitted_depth", "points", "reliable"];
    let points = fits
        .iter()
        .map(|f| PointRecord {
            key: format!("N={},W={}", f.n, f.w),
            row: vec![
                f.n.into(),
                num(f.w),
                num(f.slope),
                num(f.intercept),
                num(f.fitted_depth),
                f.points.into(),
                f.reliable.into(),
            ],
            detail: Value::Null,
        })
        .collect();
    Ok(RunRecord::new(cfg, &columns, points))
}

fn scaling_experiment(ctx: &Ctx<'_>) -> anyhow::Result<RunRecord> {
    let cfg = ctx.cfg;
    let noise = noisy_model(cfg);
    let mut sweep = Vec::new();
    for &n in &cfg.sweep.sizes {
        let depth = if noise.is_some() { n / 2 } else { n };
        for w in [cfg.fit.mbl_w, cfg.fit.thermal_w] {
            let p = ensemble(ctx, n, w, depth)?;
            let mut s = p.sweep_point(cfg.vqe.k_best);
            if noise.is_some() {
                let key = point_key(n, w, depth);
                let rs: Vec<(f64, Option<f64>)> = ctx.cache.get_or_compute(&format!("noisy:{key}"), || {
                    ctx.log(&format!("{key}: noisy witness"));
                    circuit_witnesses(ctx, &p, EvolutionKind::Exact, noise.as_ref())
                        .with_context(|| format!("grid point {key}"))
                })?;
                let r: Vec<f64> = rs.iter().map(|x| x.0).collect();
                (s.mean_r, s.sem_r) = mean_sem(&r);
                s.ln_one_minus_r = ln_one_minus(s.mean_r);
            }
            sweep.push(s);
        }
    }
    let rows = scaling_report(&sweep, cfg.fit.mbl_w, cfg.fit.thermal_w)?;
    let columns = ["N", "depth", "delta_eipr", "sem_delta_eipr", "delta_r", "sem_delta_r"];
    let points = rows
        .iter()
        .map(|r| PointRecord {
            key: format!("N={}", r.n),
            row: vec![
                r.n.into(),
                r.depth.into(),
                num(r.delta_eipr),
                num(r.sem_delta_eipr),
                num(r.delta_r),
                num(r.sem_delta_r),
            ],
            detail: Value::Null,
        })
        .collect();
    Ok(RunRecord::new(cfg, &columns, points))
}

/// Run the configured experiment. Cached points live under
/// `output.dir/cache` when caching is on; side files (compiled circuits)
/// are written to `output.dir`.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<RunRecord> {
    let cache_dir = cfg.output.cache.then(|| cfg.output.dir.join("cache"));
    let ctx = Ctx {
        cfg,
        cache: PointCache::new(cache_dir, cfg.cache_hash()),
    };
    match cfg.experiment {
        Experiment::LevelStats => level_stats(&ctx),
        Experiment::InputEiprScan => input_eipr_scan(&ctx),
        Experiment::VqeSweep => vqe_sweep(&ctx),
        Experiment::WitnessSweep => witness_sweep(&ctx),
        Experiment::NoisyWitness => noisy_witness(&ctx),
        Experiment::TrotterWitness => trotter_witness(&ctx),
        Experiment::Compile => compile_experiment(&ctx, Some(&cfg.output.dir)),
        Experiment::DepthFit => depth_fit_experiment(&ctx),
        Experiment::Scaling => scaling_experiment(&ctx),
    }
}
