//! `KSF1` field snapshots: the 4-byte magic `KSF1`, then little-endian
//! `u32 n`, `f64 l`, `f64 t` and `n * n` `f64` samples in storage order.
//! A trajectory file is a plain concatenation of snapshots.

use std::io::{ErrorKind, Read, Write};

use super::{Grid2D, ScalarField};
use crate::error::{KsError, Result};

const MAGIC: &[u8; 4] = b"KSF1";

pub fn write_snapshot<W: Write>(w: &mut W, field: &ScalarField, t: f64) -> Result<()> {
    let grid = field.grid();
    let n = u32::try_from(grid.n()).map_err(|_| KsError::Format("n exceeds u32".into()))?;
    w.write_all(MAGIC)?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&grid.l().to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * grid.len());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads one snapshot; `Ok(None)` on a clean end of stream.
fn read_one<R: Read>(r: &mut R) -> Result<Option<(ScalarField, f64)>> {
    let mut magic = [0u8; 4];
    match r.read_exact(&mut magic) {
        Ok(()) => {}
        Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    if &magic != MAGIC {
        return Err(KsError::Format(format!("bad magic {magic:?}")));
    }
    let mut nb = [0u8; 4];
    r.read_exact(&mut nb)?;
    let n = u32::from_le_bytes(nb) as usize;
    let l = read_f64(r)?;
    let t = read_f64(r)?;
    let grid = Grid2D::new(n, l)?;
    let mut raw = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(Some((ScalarField::new(grid, values)?, t)))
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<(ScalarField, f64)> {
    read_one(r)?.ok_or_else(|| KsError::Format("empty snapshot stream".into()))
}

pub fn write_snapshot_sequence<W: Write>(w: &mut W, frames: &[(f64, &ScalarField)]) -> Result<()> {
    for (t, f) in frames {
        write_snapshot(w, f, *t)?;
    }
    Ok(())
}

pub fn read_snapshot_sequence<R: Read>(r: &mut R) -> Result<Vec<(ScalarField, f64)>> {
    let mut out = Vec::new();
    while let Some(frame) = read_one(r)? {
        out.push(frame);
    }
    Ok(out)
}
