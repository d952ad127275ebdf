//! Resolution of the `[data]` section into `(u0, v0)`.

use std::fs::File;
use std::io::BufReader;

use anyhow::{bail, Context};
use ks_core::data::{gaussian, mode, stripe};
use ks_core::field::{read_snapshot_sequence, Grid2D, ScalarField};
use serde::Serialize;

use crate::config::{DataKind, DataSection};

#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: ScalarField,
    pub v0: ScalarField,
    pub meta: DataMeta,
}

/// Recorded next to every report.
#[derive(Debug, Clone, Serialize)]
pub struct DataMeta {
    pub kind: DataKind,
    pub u0_mass: f64,
    pub v0_mass: f64,
    /// mollification width of indicator data
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing_width: Option<f64>,
}

pub fn resolve(grid: Grid2D, d: &DataSection) -> anyhow::Result<InitialData> {
    let zero = || ScalarField::zeros(grid);
    let mut smoothing_width = None;
    let (u0, v0) = match d.kind {
        DataKind::Gaussian => {
            let u0 = if d.mass > 0.0 {
                gaussian(grid, d.mass, d.width)?
            } else {
                zero()
            };
            let v0 = if d.v_mass > 0.0 {
                gaussian(grid, d.v_mass, d.v_width)?
            } else {
                zero()
            };
            (u0, v0)
        }
        DataKind::Mode => (mode(grid, d.amplitude, d.wavevector)?, zero()),
        DataKind::Stripe => {
            smoothing_width = Some(grid.h());
            (zero(), stripe(grid, 0.0, 1.0)?)
        }
        DataKind::File => {
            let path = d.path.as_ref().expect("validated");
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let frames = read_snapshot_sequence(&mut BufReader::new(file))?;
            let mut it = frames.into_iter().map(|(f, _)| f);
            let u0 = it
                .next()
                .with_context(|| format!("{} holds no snapshot", path.display()))?;
            let v0 = it.next().unwrap_or_else(zero);
            if u0.grid() != &grid || v0.grid() != &grid {
                bail!(
                    "{} does not match grid.n = {}, grid.l = {}",
                    path.display(),
                    grid.n(),
                    grid.l()
                );
            }
            (u0, v0)
        }
    };
    let meta = DataMeta {
        kind: d.kind,
        u0_mass: u0.integral(),
        v0_mass: v0.integral(),
        smoothing_width,
    };
    Ok(InitialData { u0, v0, meta })
}
