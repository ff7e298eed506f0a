use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{flow, TimeVaryingField, Trajectory};
use crate::manifold::sampling::{random_point_in_shell, seeded_rng};
use crate::manifold::ManifoldPoint;

/// Initial conditions for envelope fitting: `n_per_t0` radii evenly spaced in
/// `(r_min, radius]`, random directions, repeated for every start time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryGrid {
    pub n_per_t0: usize,
    pub r_min: f64,
    pub radius: f64,
    pub t0_list: Vec<f64>,
    pub horizon: f64,
    pub step: f64,
    pub seed: u64,
}

impl Default for TrajectoryGrid {
    fn default() -> Self {
        TrajectoryGrid {
            n_per_t0: 4,
            r_min: 0.1,
            radius: 1.0,
            t0_list: vec![0.0, 1.0, std::f64::consts::E, 10.0],
            horizon: 10.0,
            step: 1e-2,
            seed: 0,
        }
    }
}

pub fn sample_trajectories(field: &TimeVaryingField, x_star: &ManifoldPoint, grid: &TrajectoryGrid) -> Result<Vec<Trajectory>> {
    if grid.n_per_t0 == 0 || grid.t0_list.is_empty() {
        return Err(Error::InvalidArgument("trajectory grid is empty".into()));
    }
    if !(grid.radius > grid.r_min && grid.r_min >= 0.0) || !(grid.horizon > 0.0) {
        return Err(Error::InvalidArgument("trajectory grid needs 0 <= r_min < radius and horizon > 0".into()));
    }
    let mut rng = seeded_rng(grid.seed);
    let mut starts = Vec::new();
    for &t0 in &grid.t0_list {
        for j in 0..grid.n_per_t0 {
            let r = grid.r_min + (grid.radius - grid.r_min) * (j + 1) as f64 / grid.n_per_t0 as f64;
            starts.push((t0, random_point_in_shell(x_star, r, r, &mut rng)));
        }
    }
    starts
        .par_iter()
        .map(|(t0, x0)| flow(field, *t0, x0, t0 + grid.horizon, grid.step))
        .collect()
}
