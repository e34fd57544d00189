//! Exact diagonalization in a magnetization sector, level-spacing
//! statistics and eigenbasis participation measures.

use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::Rng as _;

use crate::linalg::symmetric_eigen;
use crate::model::{build_hamiltonian, AAParams, PauliHamiltonian, SectorBasis};
use crate::{par, rng, Error, Result, C64};

/// Largest sector dimension diagonalized by default (12 sites, `C(12, 6)`).
pub const DEFAULT_MAX_DIM: usize = 924;

/// Tolerance on `‖ψ‖² − 1` accepted by the spectral diagnostics.
pub const NORM_TOL: f64 = 1e-8;

/// Full spectrum and real orthonormal eigenbasis of `H` in one sector.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub basis: SectorBasis,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column-major: eigenvector `n` is `eigenvectors[n * dim..(n + 1) * dim]`.
    pub eigenvectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, n: usize) -> &[f64] {
        let d = self.dim();
        &self.eigenvectors[n * d..(n + 1) * d]
    }

    /// Eigenvector `n` as a complex sector vector.
    pub fn eigenstate(&self, n: usize) -> Vec<C64> {
        self.eigenvector(n).iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    /// Eigenvector `n` embedded into the full `2^N` register.
    pub fn eigenstate_full(&self, n: usize) -> Vec<C64> {
        self.basis.embed(&self.eigenstate(n))
    }

    /// Amplitudes `⟨n|ψ⟩`. `psi` may be a sector vector or a full-register
    /// vector; in the latter case any weight outside the sector is ignored.
    pub fn overlaps(&self, psi: &[C64]) -> Result<Vec<C64>> {
        let sector = self.to_sector(psi)?;
        let d = self.dim();
        Ok((0..d)
            .map(|n| {
                self.eigenvector(n)
                    .iter()
                    .zip(&sector)
                    .map(|(&v, a)| a * v)
                    .sum()
            })
            .collect())
    }

    /// `|⟨n|ψ⟩|²` for a normalized `ψ`.
    pub fn weights(&self, psi: &[C64]) -> Result<Vec<f64>> {
        let sector = self.to_sector(psi)?;
        check_normalized(psi)?;
        check_normalized(&sector)?;
        Ok(self.overlaps(&sector)?.iter().map(|z| z.norm_sqr()).collect())
    }

    fn to_sector(&self, psi: &[C64]) -> Result<Vec<C64>> {
        let d = self.dim();
        if psi.len() == d {
            Ok(psi.to_vec())
        } else if psi.len() == 1usize << self.basis.n_sites {
            Ok(self.basis.project(psi)?.0)
        } else {
            Err(Error::Shape {
                expected: d,
                got: psi.len(),
            })
        }
    }
}

pub(crate) fn check_normalized(psi: &[C64]) -> Result<()> {
    let norm_sqr: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > NORM_TOL || !norm_sqr.is_finite() {
        return Err(Error::NotNormalized { norm_sqr });
    }
    Ok(())
}

/// Diagonalize `h` in `basis` with the default size limit.
pub fn diagonalize(h: &PauliHamiltonian, basis: &SectorBasis) -> Result<EigenDecomposition> {
    diagonalize_with_limit(h, basis, DEFAULT_MAX_DIM)
}

pub fn diagonalize_with_limit(
    h: &PauliHamiltonian,
    basis: &SectorBasis,
    max_dim: usize,
) -> Result<EigenDecomposition> {
    let dim = basis.dim();
    if dim > max_dim {
        return Err(Error::ResourceLimit(alloc::format!(
            "sector dimension {dim} exceeds limit {max_dim}"
        )));
    }
    let m = h.sector_matrix(basis);
    let eig = symmetric_eigen(&m, dim, true);
    Ok(EigenDecomposition {
        basis: basis.clone(),
        eigenvalues: eig.values,
        eigenvectors: eig.vectors.unwrap_or_default(),
    })
}

/// Eigenvalues of the `M_z = 0` block only.
pub fn sector_eigenvalues(params: &AAParams, max_dim: usize) -> Result<Vec<f64>> {
    let h = build_hamiltonian(params)?;
    let basis = SectorBasis::zero_magnetization(params.n_sites)?;
    if basis.dim() > max_dim {
        return Err(Error::ResourceLimit(alloc::format!(
            "sector dimension {} exceeds limit {max_dim}",
            basis.dim()
        )));
    }
    Ok(symmetric_eigen(&h.sector_matrix(&basis), basis.dim(), false).values)
}

/// Which part of the spectrum enters the level average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumWindow {
    #[default]
    Full,
    /// Ratios whose middle level lies in the central half of the spectrum.
    MiddleHalf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelStatistics {
    /// All ratios, phase-major.
    pub ratios: Vec<f64>,
    pub mean_ratio: f64,
    pub n_phases: usize,
    pub seed: u64,
    /// Ratios where both adjacent gaps vanished and 0 was recorded.
    pub degenerate: usize,
}

/// Gaps below this are treated as exact degeneracies.
const GAP_EPS: f64 = 1e-12;

/// Consecutive-gap ratios `min(Δ_n, Δ_{n+1}) / max(Δ_n, Δ_{n+1})` of an
/// ascending spectrum, plus the number of 0/0 cases (recorded as 0).
pub fn gap_ratios(levels: &[f64], window: SpectrumWindow) -> (Vec<f64>, usize) {
    let n = levels.len();
    if n < 3 {
        return (Vec::new(), 0);
    }
    let (lo, hi) = match window {
        SpectrumWindow::Full => (0, n - 2),
        SpectrumWindow::MiddleHalf => (n / 4, (3 * n / 4).min(n - 2)),
    };
    let mut degenerate = 0;
    let mut out = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = levels[k + 1] - levels[k];
        let b = levels[k + 2] - levels[k + 1];
        let (mn, mx) = if a < b { (a, b) } else { (b, a) };
        if mx <= GAP_EPS {
            degenerate += 1;
            out.push(0.0);
        } else {
            out.push((mn.max(0.0) / mx).clamp(0.0, 1.0));
        }
    }
    (out, degenerate)
}

/// Mean level-spacing ratio over `n_phases` random phases `φ ∈ [0, 2π)`.
/// Phase `k` is drawn from child stream `k` of `seed`.
pub fn level_spacing_ratio(
    params: &AAParams,
    n_phases: usize,
    seed: u64,
    window: SpectrumWindow,
) -> Result<LevelStatistics> {
    if n_phases == 0 {
        return Err(crate::error::invalid("n_phases must be at least 1"));
    }
    params.validate()?;
    let per_phase = par::map_indices(n_phases, |k| {
        let phi = rng::child_rng(seed, k as u64).random_range(0.0..2.0 * PI);
        sector_eigenvalues(&params.with_phi(phi), usize::MAX).map(|ev| gap_ratios(&ev, window))
    });
    let mut ratios = Vec::new();
    let mut degenerate = 0;
    for r in per_phase {
        let (rs, d) = r?;
        ratios.extend(rs);
        degenerate += d;
    }
    let mean_ratio = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    Ok(LevelStatistics {
        ratios,
        mean_ratio,
        n_phases,
        seed,
        degenerate,
    })
}

/// Eigenspace inverse participation ratio `Σ_n |⟨n|ψ⟩|⁴`.
pub fn eipr(psi: &[C64], eig: &EigenDecomposition) -> Result<f64> {
    Ok(eig.weights(psi)?.iter().map(|w| w * w).sum())
}

/// `(λ_n, |⟨n|ψ⟩|²)` in ascending energy.
pub fn overlap_spectrum(psi: &[C64], eig: &EigenDecomposition) -> Result<Vec<(f64, f64)>> {
    let w = eig.weights(psi)?;
    Ok(eig.eigenvalues.iter().copied().zip(w).collect())
}
