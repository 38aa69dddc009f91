//! Metric trajectories over uniform scaled-time grids.

use rayon::prelude::*;

use crate::analytic::{
    bell_max_closed, concurrence_closed, concurrence_dephased, rho_s_analytic, rho_s_dephased, TwoQubitState,
};
use crate::error::{Error, Result};
use crate::evolution::{default_rk4_step, reduce_to_atoms, rk4_grid, SpectralPropagator};
use crate::frontier::{mems_concurrence_at, FrontierCurve, TSIRELSON};
use crate::metrics::{bell_max_general, linear_entropy, purity, wootters_concurrence};
use crate::model::SystemParams;

/// Grid points used for `gt ∈ [0, 50]`.
pub const DEFAULT_POINTS_SHORT: usize = 5_001;
/// Grid points used for `gt ∈ [0, 500]`.
pub const DEFAULT_POINTS_LONG: usize = 50_001;

/// Grid size that keeps the spacing of the default grids (0.01 in `gt`).
pub fn default_points(gt_max: f64) -> usize {
    if gt_max <= 50.0 {
        DEFAULT_POINTS_SHORT
    } else if gt_max <= 500.0 {
        DEFAULT_POINTS_LONG
    } else {
        (gt_max * 100.0).ceil() as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Analytic,
    Spectral,
    Rk4,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Spectral => "spectral",
            Source::Rk4 => "rk4",
        }
    }
}

impl std::str::FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(Source::Analytic),
            "spectral" => Ok(Source::Spectral),
            "rk4" => Ok(Source::Rk4),
            other => Err(Error::InvalidParameter(format!("unknown source '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub gt: f64,
    pub concurrence: f64,
    pub linear_entropy: f64,
    pub bell_max: f64,
    pub purity: f64,
}

impl TrajectoryPoint {
    fn from_state(gt: f64, s: &TwoQubitState) -> Result<Self> {
        Ok(Self {
            gt,
            concurrence: wootters_concurrence(s)?,
            linear_entropy: linear_entropy(s),
            bell_max: bell_max_general(s)?,
            purity: purity(s),
        })
    }

    fn check(&self) -> Result<()> {
        let slack = 1e-9;
        let ok = (-slack..=1.0 + slack).contains(&self.concurrence)
            && (-slack..=1.0 + slack).contains(&self.linear_entropy)
            && (-slack..=TSIRELSON + slack).contains(&self.bell_max)
            && (0.25 - slack..=1.0 + slack).contains(&self.purity);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidState(format!("metrics out of range: {self:?}")))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: SystemParams,
    pub source: Source,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn plane_points(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.linear_entropy, p.concurrence)).collect()
    }

    pub fn max_concurrence(&self) -> f64 {
        self.points.iter().map(|p| p.concurrence).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_bell(&self) -> f64 {
        self.points.iter().map(|p| p.bell_max).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_linear_entropy(&self) -> f64 {
        self.points.iter().map(|p| p.linear_entropy).fold(f64::INFINITY, f64::min)
    }
}

/// `n_points` uniformly spaced scaled times from 0 to `gt_max` inclusive.
pub fn uniform_grid(gt_max: f64, n_points: usize) -> Result<Vec<f64>> {
    if !(gt_max.is_finite() && gt_max > 0.0) {
        return Err(Error::InvalidGrid(format!("gt_max must be positive, got {gt_max}")));
    }
    if n_points < 2 {
        return Err(Error::InvalidGrid(format!("need at least two grid points, got {n_points}")));
    }
    let step = gt_max / (n_points - 1) as f64;
    Ok((0..n_points).map(|i| if i + 1 == n_points { gt_max } else { i as f64 * step }).collect())
}

fn analytic_point(p: &SystemParams, gt: f64) -> Result<TrajectoryPoint> {
    let dephased = p.gamma() > 0.0;
    let state = if dephased { rho_s_dephased(p, gt)? } else { rho_s_analytic(p, gt)? };
    let concurrence = if dephased { concurrence_dephased(p, gt)? } else { concurrence_closed(p, gt)? };
    let bell_max = if !dephased && (p.lambda() - 1.0).abs() <= 1e-12 {
        bell_max_closed(p, gt)?
    } else {
        bell_max_general(&state)?
    };
    Ok(TrajectoryPoint { gt, concurrence, linear_entropy: linear_entropy(&state), bell_max, purity: purity(&state) })
}

/// Metrics on a uniform grid of `n_points` times over `[0, gt_max]`.
///
/// Analytic and spectral points are evaluated in parallel; RK4 integrates
/// through the grid sequentially with the default step. Output order always
/// follows the grid.
pub fn sweep(p: &SystemParams, gt_max: f64, n_points: usize, source: Source) -> Result<Trajectory> {
    let times = uniform_grid(gt_max, n_points)?;
    let points: Vec<TrajectoryPoint> = match source {
        Source::Analytic => times.par_iter().map(|&gt| analytic_point(p, gt)).collect::<Result<_>>()?,
        Source::Spectral => {
            let prop = SpectralPropagator::new(p)?;
            times
                .par_iter()
                .map(|&gt| TrajectoryPoint::from_state(gt, &reduce_to_atoms(p, &prop.state_at(gt)?)?))
                .collect::<Result<_>>()?
        }
        Source::Rk4 => {
            let states = rk4_grid(p, &times, default_rk4_step(p))?;
            times
                .par_iter()
                .zip(states.par_iter())
                .map(|(&gt, rho)| TrajectoryPoint::from_state(gt, &reduce_to_atoms(p, rho)?))
                .collect::<Result<_>>()?
        }
    };
    points.iter().try_for_each(TrajectoryPoint::check)?;
    Ok(Trajectory { params: *p, source, points })
}

/// Mismatch between a trajectory and its reflection about `C = C_MEMS(M₀)/2`,
/// where `M₀` is the linear entropy of the first point.
///
/// The score is the larger of the two directed Hausdorff distances between
/// the `(M, C)` point set and its mirror image; zero for a symmetric set.
pub fn mirror_symmetry_check(traj: &Trajectory, curve: &FrontierCurve) -> Result<f64> {
    if (traj.params.lambda() - 1.0).abs() <= 1e-12 {
        return Err(Error::InvalidParameter("mirror axis is undefined for λ = 1".into()));
    }
    let first = traj
        .points
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    let m0 = first.linear_entropy;
    let c_frontier = curve.value_at(m0).unwrap_or_else(|| mems_concurrence_at(m0));
    let axis = c_frontier / 2.0;
    Ok(mirror_score(&traj.plane_points(), axis))
}

/// Symmetric Hausdorff distance between `points` and their reflection about `C = axis`.
pub fn mirror_score(points: &[(f64, f64)], axis: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mirrored: Vec<(f64, f64)> = points.iter().map(|&(m, c)| (m, 2.0 * axis - c)).collect();
    let index = crate::frontier::PointIndex::new(points.to_vec(), 0.01);
    // Reflection is an isometry, so both directed distances coincide.
    mirrored.par_iter().map(|&q| index.nearest(q)).reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontier::mems_curve;

    #[test]
    fn grid_validation() {
        assert!(uniform_grid(0.0, 10).is_err());
        assert!(uniform_grid(1.0, 1).is_err());
        let g = uniform_grid(50.0, DEFAULT_POINTS_SHORT).unwrap();
        assert_eq!(g[1], 0.01);
        assert_eq!(*g.last().unwrap(), 50.0);
        assert_eq!(default_points(500.0), DEFAULT_POINTS_LONG);
    }

    #[test]
    fn resonant_sweep_bounds() {
        let p = SystemParams::scaled(0.0, 1.0, 0.0).unwrap();
        let t = sweep(&p, 50.0, DEFAULT_POINTS_SHORT, Source::Analytic).unwrap();
        assert!((t.max_concurrence() - 0.5).abs() < 1e-4);
        assert!(t.max_bell() <= 2.0 + 1e-9);
    }

    #[test]
    fn analytic_and_spectral_agree() {
        for (delta, lambda, gamma) in [(0.5, 1.0, 0.0), (1.0, 0.7, 0.0), (0.5, 1.0, 0.01)] {
            let p = SystemParams::scaled(delta, lambda, gamma).unwrap();
            let a = sweep(&p, 20.0, 201, Source::Analytic).unwrap();
            let s = sweep(&p, 20.0, 201, Source::Spectral).unwrap();
            for (x, y) in a.points.iter().zip(&s.points) {
                assert!((x.concurrence - y.concurrence).abs() < 1e-6);
                if gamma == 0.0 {
                    assert!((x.linear_entropy - y.linear_entropy).abs() < 1e-6);
                    assert!((x.bell_max - y.bell_max).abs() < 1e-6);
                    assert!((x.purity - y.purity).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn rk4_sweep_tracks_spectral() {
        let p = SystemParams::scaled(0.5, 1.0, 0.01).unwrap();
        let r = sweep(&p, 5.0, 51, Source::Rk4).unwrap();
        let s = sweep(&p, 5.0, 51, Source::Spectral).unwrap();
        for (x, y) in r.points.iter().zip(&s.points) {
            assert!((x.concurrence - y.concurrence).abs() < 1e-6);
        }
    }

    #[test]
    fn sweeps_are_bit_identical() {
        let p = SystemParams::scaled(0.5, 0.7, 0.0).unwrap();
        let a = sweep(&p, 10.0, 1001, Source::Spectral).unwrap();
        let b = sweep(&p, 10.0, 1001, Source::Spectral).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn mirror_score_cases() {
        let pts = vec![(0.1, 0.2), (0.1, 0.8), (0.3, 0.5)];
        assert!(mirror_score(&pts, 0.5).abs() < 1e-15);
        assert!(mirror_score(&[(0.1, 0.2)], 0.5) > 0.5);

        let curve = mems_curve(200).unwrap();
        let resonant = sweep(&SystemParams::scaled(0.0, 1.0, 0.0).unwrap(), 5.0, 11, Source::Analytic).unwrap();
        assert!(mirror_symmetry_check(&resonant, &curve).is_err());
        let mixed = sweep(&SystemParams::scaled(0.5, 0.7, 0.0).unwrap(), 5.0, 11, Source::Analytic).unwrap();
        assert!(mirror_symmetry_check(&mixed, &curve).unwrap() >= 0.0);
    }
}
