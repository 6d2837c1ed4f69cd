use rayon::prelude::*;

use super::fd::default_step;
use super::scalar::ScalarFn;
use super::test_map::TestMap;
use super::MapError;
use crate::multilinear::NormMode;
use crate::spaces::StepProfile;

/// Uniform cell grid on an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    bounds: Vec<(f64, f64)>,
    resolution: usize,
}

impl SampleGrid {
    pub fn new(bounds: Vec<(f64, f64)>, resolution: usize) -> Result<Self, MapError> {
        if resolution == 0 || bounds.is_empty() || bounds.iter().any(|&(a, b)| !(a < b)) {
            return Err(MapError::Dimension("grid needs a non-empty box and a positive resolution".into()));
        }
        Ok(Self { bounds, resolution })
    }

    /// The domain of `map` shrunk by `margin` on every side.
    pub fn interior(map: &TestMap, margin: f64, resolution: usize) -> Result<Self, MapError> {
        Self::new(map.domain().iter().map(|&(a, b)| (a + margin, b - margin)).collect(), resolution)
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cell_count(&self) -> usize {
        self.resolution.pow(self.bounds.len() as u32)
    }

    pub fn cell_measure(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| (b - a) / self.resolution as f64).product()
    }

    pub fn measure(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }

    /// Center of cell `c`; the first axis varies slowest.
    pub fn center(&self, c: usize) -> Vec<f64> {
        let mut r = c;
        let mut x = vec![0.0; self.bounds.len()];
        for (axis, &(a, b)) in self.bounds.iter().enumerate().rev() {
            let i = r % self.resolution;
            r /= self.resolution;
            x[axis] = a + (b - a) * (i as f64 + 0.5) / self.resolution as f64;
        }
        x
    }

    pub fn centers(&self) -> Vec<Vec<f64>> {
        (0..self.cell_count()).map(|c| self.center(c)).collect()
    }
}

/// `|D^k f|` per cell (sampled operator norm) with the cell measure; with
/// `use_inverse`, `|D^k f⁻¹|` at `y = f(center)` by differencing Newton
/// inversion, with the image cell measure `|J_f| · cell`.
pub fn sample_derivative_profile(map: &TestMap, k: u32, grid: &SampleGrid, use_inverse: bool) -> Result<StepProfile, MapError> {
    let cell = grid.cell_measure();
    let pieces = (0..grid.cell_count())
        .into_par_iter()
        .map(|c| {
            let x = grid.center(c);
            if use_inverse {
                let y = map.eval(&x);
                let jet = map.fd_inverse_jet(k, &y, default_step(k), 1e-12)?;
                Ok((jet.operator_norm(NormMode::Sampled), map.jacobian(&x).abs() * cell))
            } else {
                Ok((map.jet(k, &x)?.operator_norm(NormMode::Sampled), cell))
            }
        })
        .collect::<Result<Vec<_>, MapError>>()?;
    Ok(StepProfile::new(pieces)?)
}

/// `|D^k u|` per cell (sampled operator norm) with the cell measure.
pub fn sample_scalar_profile(u: &ScalarFn, k: u32, grid: &SampleGrid) -> Result<StepProfile, MapError> {
    let cell = grid.cell_measure();
    let pieces = (0..grid.cell_count())
        .into_par_iter()
        .map(|c| Ok((u.jet(k, &grid.center(c))?.operator_norm(NormMode::Sampled), cell)))
        .collect::<Result<Vec<_>, MapError>>()?;
    Ok(StepProfile::new(pieces)?)
}
