//! Interacting Aubry-André chain written as a sum of Pauli strings.
//!
//! ```text
//! H = Σ_bonds (X_i X_j + Y_i Y_j + V0 Z_i Z_j) + W Σ_{i=1..N} cos(2π η i + φ) Z_i
//! ```
//!
//! Qubit `q` holds site `q + 1`; bit `q` of a basis index is the state of
//! qubit `q`, with `|0>` the `Z = +1` eigenstate.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::invalid;
use crate::{Error, Result, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

impl Boundary {
    /// Nearest-neighbour bonds `(i, j)` in application order. A two-site
    /// periodic ring has a single bond, not a doubled one.
    pub fn bonds(self, n_sites: usize) -> Vec<(usize, usize)> {
        let mut bonds: Vec<_> = (0..n_sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self == Boundary::Periodic && n_sites > 2 {
            bonds.push((n_sites - 1, 0));
        }
        bonds
    }
}

/// Parameters of the interacting Aubry-André model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AAParams {
    pub n_sites: usize,
    /// Quasi-periodic potential strength.
    pub w: f64,
    /// ZZ interaction.
    pub v0: f64,
    /// Incommensurate ratio.
    pub eta: f64,
    /// Phase of the cosine potential.
    pub phi: f64,
    pub boundary: Boundary,
}

impl AAParams {
    pub fn new(n_sites: usize, w: f64) -> Self {
        Self {
            n_sites,
            w,
            v0: 0.5,
            eta: golden_ratio_conjugate(),
            phi: 0.0,
            boundary: Boundary::Periodic,
        }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || self.n_sites % 2 != 0 {
            return Err(invalid("n_sites must be even and at least 2"));
        }
        if self.n_sites > 30 {
            return Err(Error::ResourceLimit("n_sites above 30".into()));
        }
        if ![self.w, self.v0, self.eta, self.phi].iter().all(|x| x.is_finite()) {
            return Err(invalid("model parameters must be finite"));
        }
        Ok(())
    }

    /// On-site field `h_i = W cos(2π η i + φ)` for 1-based site `i`.
    pub fn field(&self, site: usize) -> f64 {
        self.w * (2.0 * PI * self.eta * site as f64 + self.phi).cos()
    }

    /// Fields for qubits `0..N` (sites `1..=N`).
    pub fn fields(&self) -> Vec<f64> {
        (1..=self.n_sites).map(|i| self.field(i)).collect()
    }

    pub fn bonds(&self) -> Vec<(usize, usize)> {
        self.boundary.bonds(self.n_sites)
    }
}

/// `(√5 − 1) / 2`.
pub fn golden_ratio_conjugate() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// One weighted Pauli string, stored as bit masks over qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub x_mask: u64,
    pub y_mask: u64,
    pub z_mask: u64,
}

impl PauliTerm {
    pub fn new(coefficient: f64, ops: &[(usize, Pauli)]) -> Self {
        let mut t = Self {
            coefficient,
            x_mask: 0,
            y_mask: 0,
            z_mask: 0,
        };
        for &(q, p) in ops {
            let bit = 1u64 << q;
            match p {
                Pauli::I => {}
                Pauli::X => t.x_mask |= bit,
                Pauli::Y => t.y_mask |= bit,
                Pauli::Z => t.z_mask |= bit,
            }
        }
        t
    }

    pub fn label(&self, q: usize) -> Pauli {
        let bit = 1u64 << q;
        if self.x_mask & bit != 0 {
            Pauli::X
        } else if self.y_mask & bit != 0 {
            Pauli::Y
        } else if self.z_mask & bit != 0 {
            Pauli::Z
        } else {
            Pauli::I
        }
    }

    #[inline]
    fn flip_mask(&self) -> u64 {
        self.x_mask | self.y_mask
    }

    /// `P|s> = amplitude * |s ^ flip>`, without the coefficient.
    #[inline]
    pub fn act(&self, s: u64) -> (u64, C64) {
        let n_y = self.y_mask.count_ones();
        // Y|0> = i|1>, Y|1> = -i|0>; Z|1> = -|1>.
        let minus = (s & (self.y_mask | self.z_mask)).count_ones() & 1;
        let mut phase = match n_y % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        if minus == 1 {
            phase = -phase;
        }
        (s ^ self.flip_mask(), phase)
    }
}

/// Weighted sum of Pauli strings with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    pub n_sites: usize,
    pub terms: Vec<PauliTerm>,
}

/// Construct the model Hamiltonian.
pub fn build_hamiltonian(params: &AAParams) -> Result<PauliHamiltonian> {
    params.validate()?;
    let mut terms = Vec::new();
    for (i, j) in params.bonds() {
        terms.push(PauliTerm::new(1.0, &[(i, Pauli::X), (j, Pauli::X)]));
        terms.push(PauliTerm::new(1.0, &[(i, Pauli::Y), (j, Pauli::Y)]));
        terms.push(PauliTerm::new(params.v0, &[(i, Pauli::Z), (j, Pauli::Z)]));
    }
    for (q, h) in params.fields().into_iter().enumerate() {
        terms.push(PauliTerm::new(h, &[(q, Pauli::Z)]));
    }
    Ok(PauliHamiltonian {
        n_sites: params.n_sites,
        terms,
    })
}

impl PauliHamiltonian {
    pub fn full_dim(&self) -> usize {
        1usize << self.n_sites
    }

    /// `H|ψ>` on the full `2^N` register.
    pub fn apply_full(&self, psi: &[C64]) -> Result<Vec<C64>> {
        let dim = self.full_dim();
        if psi.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                got: psi.len(),
            });
        }
        let mut out = vec![ZERO; dim];
        self.apply_full_into(psi, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_full_into(&self, psi: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = ZERO);
        for term in &self.terms {
            let flip = term.flip_mask();
            if flip == 0 {
                for (s, (o, &a)) in out.iter_mut().zip(psi).enumerate() {
                    let minus = (s as u64 & term.z_mask).count_ones() & 1;
                    let c = if minus == 1 { -term.coefficient } else { term.coefficient };
                    *o += a * c;
                }
            } else {
                for (s, &a) in psi.iter().enumerate() {
                    if a == ZERO {
                        continue;
                    }
                    let (t, ph) = term.act(s as u64);
                    out[t as usize] += ph * a * term.coefficient;
                }
            }
        }
    }

    /// `H|ψ>` restricted to a magnetization sector. Contributions leaving
    /// the sector are dropped; for a Hamiltonian that conserves `M_z` as a
    /// whole they cancel exactly.
    pub fn apply_sector(&self, basis: &SectorBasis, psi: &[C64]) -> Result<Vec<C64>> {
        if basis.n_sites != self.n_sites {
            return Err(invalid("basis and Hamiltonian disagree on n_sites"));
        }
        if psi.len() != basis.dim() {
            return Err(Error::Shape {
                expected: basis.dim(),
                got: psi.len(),
            });
        }
        let mut out = vec![ZERO; basis.dim()];
        for term in &self.terms {
            for (k, &s) in basis.states.iter().enumerate() {
                let a = psi[k];
                if a == ZERO {
                    continue;
                }
                let (t, ph) = term.act(s);
                if let Some(j) = basis.index(t) {
                    out[j] += ph * a * term.coefficient;
                }
            }
        }
        Ok(out)
    }

    /// Dense sector matrix (row-major, real symmetric).
    pub fn sector_matrix(&self, basis: &SectorBasis) -> Vec<f64> {
        let dim = basis.dim();
        let mut m = vec![C64::new(0.0, 0.0); dim * dim];
        for term in &self.terms {
            for (col, &s) in basis.states.iter().enumerate() {
                let (t, ph) = term.act(s);
                if let Some(row) = basis.index(t) {
                    m[row * dim + col] += ph * term.coefficient;
                }
            }
        }
        debug_assert!(m.iter().all(|z| z.im.abs() < 1e-12));
        m.into_iter().map(|z| z.re).collect()
    }

    /// Dense `2^N` matrix (row-major, real symmetric).
    pub fn full_matrix(&self) -> Vec<f64> {
        let dim = self.full_dim();
        let mut m = vec![C64::new(0.0, 0.0); dim * dim];
        for term in &self.terms {
            for s in 0..dim {
                let (t, ph) = term.act(s as u64);
                m[t as usize * dim + s] += ph * term.coefficient;
            }
        }
        debug_assert!(m.iter().all(|z| z.im.abs() < 1e-12));
        m.into_iter().map(|z| z.re).collect()
    }

    /// True when `H` maps every computational basis state into states of the
    /// same magnetization.
    pub fn conserves_mz(&self) -> bool {
        let dim = self.full_dim();
        let mut psi = vec![ZERO; dim];
        let mut out = vec![ZERO; dim];
        for s in 0..dim {
            psi[s] = C64::new(1.0, 0.0);
            self.apply_full_into(&psi, &mut out);
            psi[s] = ZERO;
            let ones = (s as u64).count_ones();
            let leaked = out
                .iter()
                .enumerate()
                .any(|(t, z)| z.norm() > 1e-12 && (t as u64).count_ones() != ones);
            if leaked {
                return false;
            }
        }
        true
    }

    /// Sum of `|coefficient|`, an upper bound on the spectral radius.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }
}

/// Computational basis states with a fixed number of up spins, in
/// ascending order of their bit pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    pub n_sites: usize,
    /// Number of `|1>` qubits; `n_sites / 2` for `M_z = 0`.
    pub n_ones: usize,
    pub states: Vec<u64>,
    index_of: BTreeMap<u64, usize>,
}

impl SectorBasis {
    /// The `M_z = 0` sector.
    pub fn zero_magnetization(n_sites: usize) -> Result<Self> {
        if n_sites < 2 || n_sites % 2 != 0 {
            return Err(invalid("M_z = 0 sector needs an even number of sites"));
        }
        Self::with_ones(n_sites, n_sites / 2)
    }

    pub fn with_ones(n_sites: usize, n_ones: usize) -> Result<Self> {
        if n_ones > n_sites || n_sites > 30 {
            return Err(invalid("sector out of range"));
        }
        let states: Vec<u64> = (0u64..1 << n_sites)
            .filter(|s| s.count_ones() as usize == n_ones)
            .collect();
        let index_of = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Self {
            n_sites,
            n_ones,
            states,
            index_of,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, state: u64) -> Option<usize> {
        self.index_of.get(&state).copied()
    }

    /// Embed a sector vector into the full register.
    pub fn embed(&self, psi: &[C64]) -> Vec<C64> {
        let mut full = vec![ZERO; 1 << self.n_sites];
        for (&s, &a) in self.states.iter().zip(psi) {
            full[s as usize] = a;
        }
        full
    }

    /// Restrict a full-register vector to the sector, returning it and the
    /// squared norm found outside.
    pub fn project(&self, full: &[C64]) -> Result<(Vec<C64>, f64)> {
        let dim = 1usize << self.n_sites;
        if full.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                got: full.len(),
            });
        }
        let inside: Vec<C64> = self.states.iter().map(|&s| full[s as usize]).collect();
        let total: f64 = full.iter().map(|z| z.norm_sqr()).sum();
        let kept: f64 = inside.iter().map(|z| z.norm_sqr()).sum();
        Ok((inside, (total - kept).max(0.0)))
    }
}
