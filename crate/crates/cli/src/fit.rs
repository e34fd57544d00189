//! Post-processing of sweep points: linear depth extrapolation of
//! `ln(1 − r)` and MBL-minus-thermal gaps versus system size.

use serde::{Deserialize, Serialize};

/// Default effective zero of `ln(1 − r)`.
pub const DEFAULT_EFFECTIVE_ZERO: f64 = -8.9;

/// Aggregated ensemble result at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub w: f64,
    pub depth: usize,
    pub trials: usize,
    pub k_best: usize,
    pub mean_eipr: f64,
    pub sem_eipr: f64,
    pub mean_r: f64,
    pub sem_r: f64,
    pub ln_one_minus_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthFit {
    pub n: usize,
    pub w: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Depth at which the fitted line reaches the effective zero.
    pub fitted_depth: f64,
    pub points: usize,
    /// False when `ln(1 − r)` does not decrease with depth.
    pub reliable: bool,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FitError {
    #[error("N={n}, W={w}: need at least 2 depth points above the effective zero, found {found}")]
    TooFewPoints { n: usize, w: f64, found: usize },
    #[error("missing grid point N={n}, W={w}")]
    MissingPoint { n: usize, w: f64 },
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// One fit per `(N, W)`: a line through the `(depth, ln(1 − r))` points
/// still above `effective_zero`, extrapolated to it.
pub fn depth_fit(points: &[SweepPoint], effective_zero: f64) -> Result<Vec<DepthFit>, FitError> {
    let mut keys: Vec<(usize, f64)> = Vec::new();
    for p in points {
        if !keys.iter().any(|&(n, w)| n == p.n && w == p.w) {
            keys.push((p.n, p.w));
        }
    }
    keys.iter()
        .map(|&(n, w)| {
            let mut sel: Vec<&SweepPoint> = points
                .iter()
                .filter(|p| p.n == n && p.w == w && p.ln_one_minus_r > effective_zero)
                .collect();
            sel.sort_by_key(|p| p.depth);
            if sel.len() < 2 {
                return Err(FitError::TooFewPoints {
                    n,
                    w,
                    found: sel.len(),
                });
            }
            let xs: Vec<f64> = sel.iter().map(|p| p.depth as f64).collect();
            let ys: Vec<f64> = sel.iter().map(|p| p.ln_one_minus_r).collect();
            let (slope, intercept) = least_squares(&xs, &ys);
            Ok(DepthFit {
                n,
                w,
                slope,
                intercept,
                fitted_depth: (effective_zero - intercept) / slope,
                points: sel.len(),
                reliable: slope < 0.0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub depth: usize,
    pub delta_eipr: f64,
    pub sem_delta_eipr: f64,
    pub delta_r: f64,
    pub sem_delta_r: f64,
}

/// `MBL − thermal` differences per system size. Each size needs one point
/// at `mbl_w` and one at `thermal_w` (the first matching depth is used).
pub fn scaling_report(points: &[SweepPoint], mbl_w: f64, thermal_w: f64) -> Result<Vec<ScalingRow>, FitError> {
    let mut sizes: Vec<usize> = points.iter().map(|p| p.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let find = |w: f64| {
                points
                    .iter()
                    .find(|p| p.n == n && p.w == w)
                    .ok_or(FitError::MissingPoint { n, w })
            };
            let (m, t) = (find(mbl_w)?, find(thermal_w)?);
            Ok(ScalingRow {
                n,
                depth: m.depth,
                delta_eipr: m.mean_eipr - t.mean_eipr,
                sem_delta_eipr: m.sem_eipr.hypot(t.sem_eipr),
                delta_r: m.mean_r - t.mean_r,
                sem_delta_r: m.sem_r.hypot(t.sem_r),
            })
        })
        .collect()
}
