//! Full-register statevector simulation and reverse-mode (adjoint)
//! gradients of real cost functionals of the output state.
//!
//! The kernels here are also used by the density-matrix engine, which
//! treats a vectorized `ρ` as a state on `2n` qubits.

use alloc::borrow::Cow;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::circuit::{Angle, Circuit, Gate, GateKind};
use crate::linalg::CMatrix;
use crate::{Error, Result, C64, ONE, ZERO};

/// How a gate is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Forward,
    /// Complex conjugate `U*` (column side of `UρU†`).
    Conjugate,
    /// `U†`.
    Adjoint,
}

/// A gate with its angle resolved to a number.
enum Op<'a> {
    X(usize),
    Diag1 { q: usize, d0: C64, d1: C64 },
    Dense1 { q: usize, m: [C64; 4] },
    Xy { a: usize, b: usize, c: f64, s: f64 },
    Cz(usize, usize),
    Dense {
        targets: &'a [usize],
        control: Option<usize>,
        m: Cow<'a, CMatrix>,
    },
}

fn resolve<'a>(circuit: &'a Circuit, gate: &'a Gate, params: &[f64], mode: Mode) -> Op<'a> {
    let sign = if mode == Mode::Forward { 1.0 } else { -1.0 };
    let q0 = gate.targets[0];
    match gate.kind {
        GateKind::PauliX => Op::X(q0),
        GateKind::Rz(a) => {
            // Conjugate and adjoint of a diagonal phase gate coincide.
            let half = 0.5 * sign * a.value(params);
            Op::Diag1 {
                q: q0,
                d0: C64::from_polar(1.0, -half),
                d1: C64::from_polar(1.0, half),
            }
        }
        GateKind::Ry(a) => {
            // Real matrix: conjugation leaves it unchanged.
            let th = if mode == Mode::Adjoint { -a.value(params) } else { a.value(params) };
            let (s, c) = (0.5 * th).sin_cos();
            Op::Dense1 {
                q: q0,
                m: [
                    C64::new(c, 0.0),
                    C64::new(-s, 0.0),
                    C64::new(s, 0.0),
                    C64::new(c, 0.0),
                ],
            }
        }
        GateKind::XYEntangler(a) => {
            let (s, c) = (0.5 * core::f64::consts::PI * a.value(params)).sin_cos();
            Op::Xy {
                a: q0,
                b: gate.targets[1],
                c,
                s: sign * s,
            }
        }
        GateKind::CZ => Op::Cz(q0, gate.targets[1]),
        GateKind::ControlledUnitary(k) => {
            let u = &circuit.unitaries[k];
            let m = match mode {
                Mode::Forward => Cow::Borrowed(u),
                Mode::Conjugate => Cow::Owned(u.conj()),
                Mode::Adjoint => Cow::Owned(u.adjoint()),
            };
            Op::Dense {
                targets: &gate.targets,
                control: gate.control,
                m,
            }
        }
    }
}

fn apply_op(op: &Op<'_>, state: &mut [C64], offset: usize) {
    match *op {
        Op::X(q) => apply_x(state, q + offset),
        Op::Diag1 { q, d0, d1 } => apply_diag1(state, q + offset, d0, d1),
        Op::Dense1 { q, m } => apply_dense1(state, q + offset, &m),
        Op::Xy { a, b, c, s } => apply_xy(state, a + offset, b + offset, c, s),
        Op::Cz(a, b) => apply_cz(state, a + offset, b + offset),
        Op::Dense {
            targets,
            control,
            ref m,
        } => {
            let t: Vec<usize> = targets.iter().map(|q| q + offset).collect();
            apply_matrix(state, &t, control.map(|c| c + offset), m);
        }
    }
}

/// Apply `gate` with qubit indices shifted by `offset`.
pub(crate) fn apply_gate(
    circuit: &Circuit,
    gate: &Gate,
    params: &[f64],
    state: &mut [C64],
    offset: usize,
    mode: Mode,
) {
    let op = resolve(circuit, gate, params, mode);
    apply_op(&op, state, offset);
}

pub(crate) fn apply_x(state: &mut [C64], q: usize) {
    let bit = 1usize << q;
    for i in 0..state.len() {
        if i & bit == 0 {
            state.swap(i, i | bit);
        }
    }
}

pub(crate) fn apply_diag1(state: &mut [C64], q: usize, d0: C64, d1: C64) {
    let bit = 1usize << q;
    for (i, z) in state.iter_mut().enumerate() {
        *z *= if i & bit == 0 { d0 } else { d1 };
    }
}

pub(crate) fn apply_dense1(state: &mut [C64], q: usize, m: &[C64; 4]) {
    let bit = 1usize << q;
    for i in 0..state.len() {
        if i & bit == 0 {
            let (a, b) = (state[i], state[i | bit]);
            state[i] = m[0] * a + m[1] * b;
            state[i | bit] = m[2] * a + m[3] * b;
        }
    }
}

/// `(x, y) → (c x + i s y, i s x + c y)` on the `|01>, |10>` pair.
pub(crate) fn apply_xy(state: &mut [C64], a: usize, b: usize, c: f64, s: f64) {
    let (ba, bb) = (1usize << a, 1usize << b);
    let is = C64::new(0.0, s);
    for i in 0..state.len() {
        if i & (ba | bb) == 0 {
            let (i01, i10) = (i | ba, i | bb);
            let (x, y) = (state[i01], state[i10]);
            state[i01] = x * c + is * y;
            state[i10] = is * x + y * c;
        }
    }
}

pub(crate) fn apply_cz(state: &mut [C64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, z) in state.iter_mut().enumerate() {
        if i & mask == mask {
            *z = -*z;
        }
    }
}

/// General (optionally controlled) dense gate.
pub(crate) fn apply_matrix(state: &mut [C64], targets: &[usize], control: Option<usize>, m: &CMatrix) {
    let k = targets.len();
    let local = 1usize << k;
    debug_assert_eq!(m.dim, local);
    let offsets: Vec<usize> = (0..local)
        .map(|l| {
            targets
                .iter()
                .enumerate()
                .filter(|(j, _)| l >> j & 1 == 1)
                .map(|(_, &t)| 1usize << t)
                .sum()
        })
        .collect();
    let tmask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let cbit = control.map_or(0, |c| 1usize << c);
    let mut buf = vec![ZERO; local];
    for base in 0..state.len() {
        if base & tmask != 0 || base & cbit != cbit {
            continue;
        }
        for (b, &o) in buf.iter_mut().zip(&offsets) {
            *b = state[base + o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            let row = &m.data[r * local..(r + 1) * local];
            state[base + o] = row.iter().zip(&buf).map(|(x, y)| x * y).sum();
        }
    }
}

/// Matrix of a gate on its targets (control, if any, not included).
pub fn gate_matrix(circuit: &Circuit, gate: &Gate, params: &[f64]) -> Result<CMatrix> {
    if let Some(Angle::Param(k)) = gate.angle() {
        if k >= params.len() {
            return Err(Error::ParamOutOfRange {
                index: k,
                n_params: params.len(),
            });
        }
    }
    if let GateKind::ControlledUnitary(k) = gate.kind {
        return circuit
            .unitaries
            .get(k)
            .cloned()
            .ok_or_else(|| crate::error::invalid("unknown matrix reference"));
    }
    let local = 1usize << gate.targets.len();
    let relabelled = Gate {
        targets: (0..gate.targets.len()).collect(),
        control: None,
        ..gate.clone()
    };
    let mut out = CMatrix::zeros(local);
    for col in 0..local {
        let mut v = vec![ZERO; local];
        v[col] = ONE;
        apply_gate(circuit, &relabelled, params, &mut v, 0, Mode::Forward);
        for (row, z) in v.into_iter().enumerate() {
            out.set(row, col, z);
        }
    }
    Ok(out)
}

fn check_state(circuit: &Circuit, psi: &[C64]) -> Result<()> {
    if psi.len() != circuit.dim() {
        return Err(Error::Shape {
            expected: circuit.dim(),
            got: psi.len(),
        });
    }
    Ok(())
}

/// Run `circuit` on `psi0`.
pub fn simulate(circuit: &Circuit, params: &[f64], psi0: &[C64]) -> Result<Vec<C64>> {
    circuit.validate()?;
    circuit.check_params(params)?;
    check_state(circuit, psi0)?;
    let mut psi = psi0.to_vec();
    run_in_place(circuit, params, &mut psi);
    Ok(psi)
}

pub(crate) fn run_in_place(circuit: &Circuit, params: &[f64], psi: &mut [C64]) {
    for g in &circuit.gates {
        apply_gate(circuit, g, params, psi, 0, Mode::Forward);
    }
}

/// `|0...0>` on `n` qubits.
pub fn zero_state(n_qubits: usize) -> Vec<C64> {
    basis_state(n_qubits, 0)
}

pub fn basis_state(n_qubits: usize, index: usize) -> Vec<C64> {
    let mut v = vec![ZERO; 1 << n_qubits];
    v[index] = ONE;
    v
}

/// Real cost of a single output state.
pub trait StateCost {
    fn value(&self, psi: &[C64]) -> f64;

    /// Value together with the adjoint seed `λ = ∂C/∂ψ*`, so that
    /// `dC = 2 Re⟨λ|dψ⟩`. `None` when the cost has no analytic derivative.
    fn value_and_seed(&self, psi: &[C64]) -> Option<(f64, Vec<C64>)>;
}

/// Real cost of a batch of output states (one per input).
pub trait BatchCost {
    fn value_and_seeds(&self, outputs: &[Vec<C64>]) -> Option<(f64, Vec<Vec<C64>>)>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradResult {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// `⟨λ| G |ψ⟩` where `dU/dθ = G U` for the gate's generator `G`.
fn generator_overlap(gate: &Gate, lambda: &[C64], psi: &[C64]) -> C64 {
    match gate.kind {
        GateKind::Rz(_) => {
            // G = −i Z / 2
            let bit = 1usize << gate.targets[0];
            let mut acc = ZERO;
            for (i, (l, p)) in lambda.iter().zip(psi).enumerate() {
                let t = l.conj() * p;
                if i & bit == 0 {
                    acc += t;
                } else {
                    acc -= t;
                }
            }
            acc * C64::new(0.0, -0.5)
        }
        GateKind::Ry(_) => {
            // G = −i Y / 2: (Gψ)_0 = −ψ_1 / 2, (Gψ)_1 = ψ_0 / 2
            let bit = 1usize << gate.targets[0];
            let mut acc = ZERO;
            for i in 0..psi.len() {
                if i & bit == 0 {
                    acc += lambda[i].conj() * (-psi[i | bit]) + lambda[i | bit].conj() * psi[i];
                }
            }
            acc * 0.5
        }
        GateKind::XYEntangler(_) => {
            // G = iπ/4 (XX + YY): |01> ↔ 2|10>
            let (ba, bb) = (1usize << gate.targets[0], 1usize << gate.targets[1]);
            let mut acc = ZERO;
            for i in 0..psi.len() {
                if i & (ba | bb) == 0 {
                    let (i01, i10) = (i | ba, i | bb);
                    acc += lambda[i01].conj() * psi[i10] + lambda[i10].conj() * psi[i01];
                }
            }
            acc * C64::new(0.0, core::f64::consts::FRAC_PI_2)
        }
        _ => ZERO,
    }
}

/// Reverse sweep from the output: accumulates `2 Re⟨λ_k|G_k ψ_k⟩` into
/// `grad` while undoing each gate on both `psi` and `lambda`.
fn adjoint_sweep(
    circuit: &Circuit,
    params: &[f64],
    psi: &mut [C64],
    lambda: &mut [C64],
    grad: &mut [f64],
) {
    for g in circuit.gates.iter().rev() {
        if let Some(Angle::Param(k)) = g.angle() {
            grad[k] += 2.0 * generator_overlap(g, lambda, psi).re;
        }
        let op = resolve(circuit, g, params, Mode::Adjoint);
        apply_op(&op, psi, 0);
        apply_op(&op, lambda, 0);
    }
}

/// Cost of the circuit output and its exact gradient.
pub fn cost_and_grad(
    circuit: &Circuit,
    params: &[f64],
    psi0: &[C64],
    cost: &dyn StateCost,
) -> Result<GradResult> {
    let mut psi = simulate(circuit, params, psi0)?;
    let (value, seed) = cost.value_and_seed(&psi).ok_or(Error::UnsupportedCost)?;
    let mut lambda = seed;
    check_state(circuit, &lambda)?;
    let mut gradient = vec![0.0; circuit.n_params];
    adjoint_sweep(circuit, params, &mut psi, &mut lambda, &mut gradient);
    Ok(GradResult { value, gradient })
}

/// Gradient of a cost defined on the outputs for several inputs.
pub fn cost_and_grad_batch(
    circuit: &Circuit,
    params: &[f64],
    inputs: &[Vec<C64>],
    cost: &dyn BatchCost,
) -> Result<GradResult> {
    let mut outputs = inputs
        .iter()
        .map(|x| simulate(circuit, params, x))
        .collect::<Result<Vec<_>>>()?;
    let (value, seeds) = cost
        .value_and_seeds(&outputs)
        .ok_or(Error::UnsupportedCost)?;
    if seeds.len() != outputs.len() {
        return Err(Error::Shape {
            expected: outputs.len(),
            got: seeds.len(),
        });
    }
    let mut gradient = vec![0.0; circuit.n_params];
    for (psi, mut lambda) in outputs.iter_mut().zip(seeds) {
        if lambda.iter().all(|z| *z == ZERO) {
            continue;
        }
        adjoint_sweep(circuit, params, psi, &mut lambda, &mut gradient);
    }
    Ok(GradResult { value, gradient })
}

/// `‖ψ‖ − 1`.
pub fn norm_defect(psi: &[C64]) -> f64 {
    crate::linalg::norm_sqr(psi).sqrt() - 1.0
}
