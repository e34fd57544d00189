//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered gate list over `n_qubits` with a flat
//! parameter vector supplied at simulation time. Gate matrices use a
//! little-endian local basis: bit `j` of a local index is the state of
//! `targets[j]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::CMatrix;
use crate::{Error, Result};

/// Rotation angle: a reference into the parameter vector or a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Param(usize),
    Fixed(f64),
}

impl Angle {
    #[inline]
    pub fn value(self, params: &[f64]) -> f64 {
        match self {
            Angle::Param(k) => params[k],
            Angle::Fixed(x) => x,
        }
    }

    pub fn param(self) -> Option<usize> {
        match self {
            Angle::Param(k) => Some(k),
            Angle::Fixed(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    PauliX,
    /// `exp(−iθZ/2)`.
    Rz(Angle),
    /// `exp(−iθY/2)`.
    Ry(Angle),
    /// `exp(iπθ/4 (XX + YY))`.
    XYEntangler(Angle),
    CZ,
    /// Fixed matrix `Circuit::unitaries[k]` on `targets`, optionally
    /// controlled on `Gate::control`.
    ControlledUnitary(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub control: Option<usize>,
    /// Number of two-qubit depolarizing channels a noisy engine attaches
    /// after this gate (hardware two-qubit gate count).
    pub noise_weight: u32,
}

impl Gate {
    /// Every qubit the gate touches, control first.
    pub fn qubits(&self) -> Vec<usize> {
        let mut q: Vec<usize> = self.control.into_iter().collect();
        q.extend_from_slice(&self.targets);
        q
    }

    pub fn angle(&self) -> Option<Angle> {
        match self.kind {
            GateKind::Rz(a) | GateKind::Ry(a) | GateKind::XYEntangler(a) => Some(a),
            _ => None,
        }
    }

    /// Commutes with total `Z` polarization.
    pub fn conserves_mz(&self) -> bool {
        matches!(
            self.kind,
            GateKind::Rz(_) | GateKind::XYEntangler(_) | GateKind::CZ
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub n_params: usize,
    pub unitaries: Vec<CMatrix>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            n_params: 0,
            unitaries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    /// Reserve a fresh parameter slot.
    pub fn new_param(&mut self) -> Angle {
        self.n_params += 1;
        Angle::Param(self.n_params - 1)
    }

    fn push(&mut self, kind: GateKind, targets: Vec<usize>, control: Option<usize>, w: u32) {
        self.gates.push(Gate {
            kind,
            targets,
            control,
            noise_weight: w,
        });
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.push(GateKind::PauliX, vec![q], None, 0);
        self
    }

    pub fn rz(&mut self, q: usize, a: Angle) -> &mut Self {
        self.push(GateKind::Rz(a), vec![q], None, 0);
        self
    }

    pub fn ry(&mut self, q: usize, a: Angle) -> &mut Self {
        self.push(GateKind::Ry(a), vec![q], None, 0);
        self
    }

    pub fn xy(&mut self, a: usize, b: usize, angle: Angle) -> &mut Self {
        self.push(GateKind::XYEntangler(angle), vec![a, b], None, 1);
        self
    }

    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(GateKind::CZ, vec![a, b], None, 1);
        self
    }

    /// Append a fixed unitary on `targets` (little-endian local basis).
    pub fn unitary(
        &mut self,
        targets: Vec<usize>,
        control: Option<usize>,
        matrix: CMatrix,
        noise_weight: u32,
    ) -> &mut Self {
        assert_eq!(matrix.dim, 1 << targets.len(), "matrix size must match targets");
        self.unitaries.push(matrix);
        let k = self.unitaries.len() - 1;
        self.push(GateKind::ControlledUnitary(k), targets, control, noise_weight);
        self
    }

    /// Structural checks: qubits in range and distinct, parameter and
    /// matrix references valid.
    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            let qs = g.qubits();
            for (i, &q) in qs.iter().enumerate() {
                if q >= self.n_qubits {
                    return Err(crate::error::invalid(alloc::format!(
                        "qubit {q} out of range for {} qubits",
                        self.n_qubits
                    )));
                }
                if qs[..i].contains(&q) {
                    return Err(crate::error::invalid("gate qubits must be distinct"));
                }
            }
            let arity_ok = match g.kind {
                GateKind::PauliX | GateKind::Rz(_) | GateKind::Ry(_) => g.targets.len() == 1,
                GateKind::XYEntangler(_) | GateKind::CZ => g.targets.len() == 2,
                GateKind::ControlledUnitary(k) => {
                    k < self.unitaries.len() && self.unitaries[k].dim == 1 << g.targets.len()
                }
            };
            if !arity_ok {
                return Err(crate::error::invalid("gate arity does not match its kind"));
            }
            if let Some(Angle::Param(k)) = g.angle() {
                if k >= self.n_params {
                    return Err(Error::ParamOutOfRange {
                        index: k,
                        n_params: self.n_params,
                    });
                }
            }
        }
        Ok(())
    }

    /// True when every gate commutes with total `Z` polarization.
    pub fn is_number_conserving(&self) -> bool {
        self.gates.iter().all(Gate::conserves_mz)
    }

    /// `self` followed by `other`; `other`'s parameters are appended after
    /// `self`'s.
    pub fn then(&self, other: &Circuit) -> Circuit {
        let mut out = self.clone();
        out.n_qubits = self.n_qubits.max(other.n_qubits);
        let p_off = self.n_params;
        let u_off = self.unitaries.len();
        out.unitaries.extend(other.unitaries.iter().cloned());
        for g in &other.gates {
            let shift = |a: Angle| match a {
                Angle::Param(k) => Angle::Param(k + p_off),
                f => f,
            };
            let kind = match g.kind {
                GateKind::Rz(a) => GateKind::Rz(shift(a)),
                GateKind::Ry(a) => GateKind::Ry(shift(a)),
                GateKind::XYEntangler(a) => GateKind::XYEntangler(shift(a)),
                GateKind::ControlledUnitary(k) => GateKind::ControlledUnitary(k + u_off),
                k => k,
            };
            out.gates.push(Gate { kind, ..g.clone() });
        }
        out.n_params += other.n_params;
        out
    }

    /// Same gates on a register of `n_qubits >= self.n_qubits`.
    pub fn widened(&self, n_qubits: usize) -> Circuit {
        assert!(n_qubits >= self.n_qubits);
        Circuit {
            n_qubits,
            ..self.clone()
        }
    }

    /// Replace every parameter reference by its value.
    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        self.check_params(params)?;
        let mut out = self.clone();
        for g in &mut out.gates {
            let fix = |a: Angle| Angle::Fixed(a.value(params));
            g.kind = match g.kind {
                GateKind::Rz(a) => GateKind::Rz(fix(a)),
                GateKind::Ry(a) => GateKind::Ry(fix(a)),
                GateKind::XYEntangler(a) => GateKind::XYEntangler(fix(a)),
                k => k,
            };
        }
        out.n_params = 0;
        Ok(out)
    }

    /// Sum of `noise_weight` over all gates.
    pub fn two_qubit_gate_count(&self) -> u64 {
        self.gates.iter().map(|g| g.noise_weight as u64).sum()
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::Shape {
                expected: self.n_params,
                got: params.len(),
            });
        }
        Ok(())
    }
}
