//! Report writers. JSON keys are emitted sorted; CSV uses shortest
//! round-trip float formatting, so identical runs give identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use ks_core::field::write_snapshot_sequence;
use ks_core::norms::{thm1_profile, thm2_profile, Trajectory};
use serde::Serialize;

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self(dir.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> anyhow::Result<()> {
        // `serde_json::Value` objects are ordered maps, which sorts every key.
        let v = serde_json::to_value(value)?;
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn text(&self, name: &str, text: &str) -> anyhow::Result<()> {
        let p = self.path(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> anyhow::Result<()> {
        let mut s = header.join(",");
        s.push_str("\r\n");
        for r in rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&cells.join(","));
            s.push_str("\r\n");
        }
        self.text(name, &s)
    }

    pub fn trajectory(&self, name: &str, traj: &Trajectory) -> anyhow::Result<()> {
        let p = self.path(name);
        let mut w =
            BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?);
        write_snapshot_sequence(&mut w, &traj.frames())?;
        w.flush()?;
        Ok(())
    }
}

pub const NORM_COLUMNS: [&str; 7] = [
    "t",
    "u_l1",
    "t_u_linf",
    "t12_grad_v_linf",
    "sigma_grad_v_linf",
    "u_h1",
    "v_h1",
];

/// One row per frame, `t = 0` included when both trajectories carry it.
pub fn norm_rows(u: &Trajectory, v: &Trajectory) -> anyhow::Result<Vec<Vec<f64>>> {
    let p1 = thm1_profile(u, v)?;
    let p2 = thm2_profile(u, v)?;
    Ok(p1
        .iter()
        .zip(&p2)
        .map(|(a, b)| {
            vec![
                a.t,
                a.u_l1,
                a.t_u_linf,
                a.t12_grad_w_linf,
                b.sigma_grad_w_linf,
                b.u_h1,
                b.w_h1,
            ]
        })
        .collect())
}
