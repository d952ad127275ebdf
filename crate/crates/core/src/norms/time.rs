use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};
use crate::field::{Grid2D, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Geometric,
    Uniform,
}

/// Ordered positive time nodes `0 < t_1 < ... < t_K = T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
    spacing: Spacing,
}

impl TimeGrid {
    fn check_range(t_min: f64, t_max: f64, k: usize) -> Result<()> {
        if !(t_min > 0.0) || !(t_max > t_min) || !t_max.is_finite() {
            return Err(KsError::InvalidTime(format!(
                "need 0 < t_min < T, got t_min = {t_min}, T = {t_max}"
            )));
        }
        if k < 2 {
            return Err(KsError::InvalidArgument(format!(
                "need at least 2 time nodes, got {k}"
            )));
        }
        Ok(())
    }

    /// `t_j = t_min r^{j-1}` with `r = (T / t_min)^{1/(K-1)}`.
    pub fn geometric(t_min: f64, t_max: f64, k: usize) -> Result<Self> {
        Self::check_range(t_min, t_max, k)?;
        let r = (t_max / t_min).powf(1.0 / (k - 1) as f64);
        let mut times: Vec<f64> = (0..k).map(|j| t_min * r.powi(j as i32)).collect();
        times[k - 1] = t_max;
        Ok(Self {
            times,
            spacing: Spacing::Geometric,
        })
    }

    pub fn uniform(t_min: f64, t_max: f64, k: usize) -> Result<Self> {
        Self::check_range(t_min, t_max, k)?;
        let dt = (t_max - t_min) / (k - 1) as f64;
        let mut times: Vec<f64> = (0..k).map(|j| t_min + dt * j as f64).collect();
        times[k - 1] = t_max;
        Ok(Self {
            times,
            spacing: Spacing::Uniform,
        })
    }

    pub fn new(spacing: Spacing, t_min: f64, t_max: f64, k: usize) -> Result<Self> {
        match spacing {
            Spacing::Geometric => Self::geometric(t_min, t_max, k),
            Spacing::Uniform => Self::uniform(t_min, t_max, k),
        }
    }

    /// Rebuilds a grid from stored node times, recognising the spacing.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        let k = times.len();
        if k < 2 {
            return Err(KsError::InvalidArgument(
                "need at least 2 time nodes".into(),
            ));
        }
        Self::check_range(times[0], times[k - 1], k)?;
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(KsError::InvalidTime(
                "node times must be strictly increasing".into(),
            ));
        }
        let rebuilt = Self::geometric(times[0], times[k - 1], k)?;
        if rebuilt
            .times
            .iter()
            .zip(&times)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * b)
        {
            return Ok(Self {
                times,
                spacing: Spacing::Geometric,
            });
        }
        let rebuilt = Self::uniform(times[0], times[k - 1], k)?;
        if rebuilt
            .times
            .iter()
            .zip(&times)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * b)
        {
            return Ok(Self {
                times,
                spacing: Spacing::Uniform,
            });
        }
        Err(KsError::InvalidTime(
            "node times are neither geometric nor uniform".into(),
        ))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.times[0]
    }

    pub fn t_max(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn min_gap(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(self.times[0], f64::min)
    }
}

/// One field per node of a [`TimeGrid`], optionally with the datum at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Grid2D,
    tgrid: TimeGrid,
    fields: Vec<ScalarField>,
    initial: Option<ScalarField>,
    /// Set by integral operators that had to drop `[0, t_1]` for lack of an
    /// initial datum: a bound on the size of the missing contribution.
    pub initial_segment_deficit: Option<f64>,
}

impl Trajectory {
    pub fn new(
        grid: Grid2D,
        tgrid: TimeGrid,
        fields: Vec<ScalarField>,
        initial: Option<ScalarField>,
    ) -> Result<Self> {
        if fields.len() != tgrid.len() {
            return Err(KsError::ShapeMismatch(format!(
                "{} fields for {} time nodes",
                fields.len(),
                tgrid.len()
            )));
        }
        for f in fields.iter().chain(initial.iter()) {
            grid.check_same(f.grid())?;
        }
        Ok(Self {
            grid,
            tgrid,
            fields,
            initial,
            initial_segment_deficit: None,
        })
    }

    /// Evaluates `f(t)` at every node; `f(0)` becomes the initial datum when
    /// `with_initial` is set.
    pub fn from_fn(
        grid: Grid2D,
        tgrid: &TimeGrid,
        with_initial: bool,
        f: impl Fn(f64) -> ScalarField + Sync,
    ) -> Result<Self> {
        use rayon::prelude::*;
        let fields: Vec<ScalarField> = tgrid.times().par_iter().map(|&t| f(t)).collect();
        let initial = with_initial.then(|| f(0.0));
        Self::new(grid, tgrid.clone(), fields, initial)
    }

    pub fn zeros(grid: Grid2D, tgrid: &TimeGrid, with_initial: bool) -> Self {
        let fields = vec![ScalarField::zeros(grid); tgrid.len()];
        let initial = with_initial.then(|| ScalarField::zeros(grid));
        Self {
            grid,
            tgrid: tgrid.clone(),
            fields,
            initial,
            initial_segment_deficit: None,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn tgrid(&self) -> &TimeGrid {
        &self.tgrid
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn field(&self, j: usize) -> &ScalarField {
        &self.fields[j]
    }

    pub fn initial(&self) -> Option<&ScalarField> {
        self.initial.as_ref()
    }

    pub fn with_initial(mut self, initial: Option<ScalarField>) -> Result<Self> {
        if let Some(f) = &initial {
            self.grid.check_same(f.grid())?;
        }
        self.initial = initial;
        Ok(self)
    }

    /// `(t, field)` pairs starting with `(0, initial)` when present.
    pub fn frames(&self) -> Vec<(f64, &ScalarField)> {
        let mut out = Vec::with_capacity(self.fields.len() + 1);
        if let Some(f0) = &self.initial {
            out.push((0.0, f0));
        }
        out.extend(self.tgrid.times().iter().copied().zip(self.fields.iter()));
        out
    }

    pub(crate) fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.tgrid.times() != other.tgrid.times() {
            return Err(KsError::ShapeMismatch(
                "trajectories use different time grids".into(),
            ));
        }
        Ok(())
    }

    /// `a * self + b * other`, node by node (initial data combined when both
    /// carry one).
    pub fn lin_comb(&self, a: f64, other: &Trajectory, b: f64) -> Result<Self> {
        self.check_compatible(other)?;
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(x, y)| x.lin_comb(a, y, b))
            .collect::<Result<Vec<_>>>()?;
        let initial = match (&self.initial, &other.initial) {
            (Some(x), Some(y)) => Some(x.lin_comb(a, y, b)?),
            _ => None,
        };
        Self::new(self.grid, self.tgrid.clone(), fields, initial)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            tgrid: self.tgrid.clone(),
            fields: self.fields.iter().map(|f| f.scale(a)).collect(),
            initial: self.initial.as_ref().map(|f| f.scale(a)),
            initial_segment_deficit: self.initial_segment_deficit.map(|d| d * a.abs()),
        }
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField + Sync) -> Self {
        use rayon::prelude::*;
        Self {
            grid: self.grid,
            tgrid: self.tgrid.clone(),
            fields: self.fields.par_iter().map(&f).collect(),
            initial: self.initial.as_ref().map(&f),
            initial_segment_deficit: None,
        }
    }

    /// First node (index, time) holding a non-finite sample.
    pub fn first_non_finite(&self) -> Option<(usize, f64)> {
        self.fields
            .iter()
            .position(|f| !f.is_finite())
            .map(|j| (j, self.tgrid.times()[j]))
    }
}
