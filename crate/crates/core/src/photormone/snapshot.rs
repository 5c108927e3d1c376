//! Field snapshot files.
//!
//! CSV layout: a header row `nx,ny,h,t`, one row with those values, then
//! `ny` rows of `nx` comma-separated values (row `j` = `y` index).
//!
//! Binary layout (little endian): magic `PHGR`, `u32` version (1), `u32 nx`,
//! `u32 ny`, `f64 h`, `f64 t`, then `nx·ny` `f64` values row-major.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"PHGR";
const VERSION: u32 = 1;

/// A scalar field on a uniform grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSnapshot {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub t: f64,
    pub values: Vec<f64>,
}

fn io_err(e: std::io::Error) -> Error {
    Error::Snapshot(e.to_string())
}

impl GridSnapshot {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "nx,ny,h,t").map_err(io_err)?;
        writeln!(out, "{},{},{:e},{:e}", self.nx, self.ny, self.h, self.t).map_err(io_err)?;
        for row in self.values.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", line.join(",")).map_err(io_err)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Snapshot("unexpected end of file".into()))?
                .map_err(io_err)
        };
        let header = next()?;
        if header.trim() != "nx,ny,h,t" {
            return Err(Error::Snapshot(format!("bad header `{header}`")));
        }
        let meta = next()?;
        let parts: Vec<&str> = meta.trim().split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Snapshot("metadata row needs 4 fields".into()));
        }
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|e| Error::Snapshot(e.to_string()));
        let parse_f64 = |s: &str| s.parse::<f64>().map_err(|e| Error::Snapshot(e.to_string()));
        let nx = parse_usize(parts[0])?;
        let ny = parse_usize(parts[1])?;
        let h = parse_f64(parts[2])?;
        let t = parse_f64(parts[3])?;
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let row = next()?;
            let before = values.len();
            for v in row.trim().split(',') {
                values.push(parse_f64(v)?);
            }
            if values.len() - before != nx {
                return Err(Error::Snapshot(format!("row {j} has the wrong length")));
            }
        }
        Ok(GridSnapshot { nx, ny, h, t, values })
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC).map_err(io_err)?;
        out.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
        out.write_all(&(self.nx as u32).to_le_bytes()).map_err(io_err)?;
        out.write_all(&(self.ny as u32).to_le_bytes()).map_err(io_err)?;
        out.write_all(&self.h.to_le_bytes()).map_err(io_err)?;
        out.write_all(&self.t.to_le_bytes()).map_err(io_err)?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic).map_err(io_err)?;
        if &magic != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b4).map_err(io_err)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        input.read_exact(&mut b4).map_err(io_err)?;
        let nx = u32::from_le_bytes(b4) as usize;
        input.read_exact(&mut b4).map_err(io_err)?;
        let ny = u32::from_le_bytes(b4) as usize;
        input.read_exact(&mut b8).map_err(io_err)?;
        let h = f64::from_le_bytes(b8);
        input.read_exact(&mut b8).map_err(io_err)?;
        let t = f64::from_le_bytes(b8);
        let mut values = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            input.read_exact(&mut b8).map_err(io_err)?;
            values.push(f64::from_le_bytes(b8));
        }
        Ok(GridSnapshot { nx, ny, h, t, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn snap() -> impl Strategy<Value = GridSnapshot> {
        (1usize..6, 1usize..6, 1e-4f64..1.0, 0.0f64..1e3).prop_flat_map(|(nx, ny, h, t)| {
            prop::collection::vec(-1e6f64..1e6, nx * ny)
                .prop_map(move |values| GridSnapshot { nx, ny, h, t, values })
        })
    }

    proptest! {
        #[test]
        fn csv_and_binary_round_trip(s in snap()) {
            let mut csv = Vec::new();
            s.write_csv(&mut csv).unwrap();
            prop_assert_eq!(GridSnapshot::read_csv(csv.as_slice()).unwrap(), s.clone());
            let mut bin = Vec::new();
            s.write_binary(&mut bin).unwrap();
            prop_assert_eq!(bin.len(), 4 + 4 + 8 + 16 + 8 * s.values.len());
            prop_assert_eq!(GridSnapshot::read_binary(bin.as_slice()).unwrap(), s);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(GridSnapshot::read_csv("a,b\n".as_bytes()).is_err());
        assert!(GridSnapshot::read_binary(&b"NOPE"[..]).is_err());
        let short = "nx,ny,h,t\n2,1,0.1,0\n1.0\n";
        assert!(GridSnapshot::read_csv(short.as_bytes()).is_err());
    }
}
