//! Binary dump of grid wave functions.
//!
//! Layout, all little-endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 4     | magic `SPDF`                              |
//! | 4     | version (u32)                             |
//! | 8     | points per component (u64)                |
//! | 8     | grid extent (f64)                         |
//! | ...   | component e: `points` pairs (re, im) f64  |
//! | ...   | component g: `points` pairs (re, im) f64  |

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SPDF";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub extent: f64,
    pub components: Vec<Vec<Complex64>>,
}

impl Snapshot {
    pub fn points(&self) -> usize {
        self.components.first().map_or(0, Vec::len)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.points();
        if self.components.iter().any(|c| c.len() != n) {
            return Err(Error::Snapshot("components differ in length".into()));
        }
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&self.extent.to_le_bytes())?;
        for c in &self.components {
            for z in c {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a snapshot; the number of components follows from the payload length.
    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() < 24 || &buf[..4] != MAGIC {
            return Err(Error::Snapshot("missing SPDF header".into()));
        }
        let version = u32::from_le_bytes(buf[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let n = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
        let extent = f64::from_le_bytes(buf[16..24].try_into().unwrap());
        let payload = &buf[24..];
        let per = n.checked_mul(16).ok_or_else(|| Error::Snapshot("point count overflow".into()))?;
        if per == 0 || payload.len() % per != 0 {
            return Err(Error::Snapshot(format!("payload of {} bytes does not hold whole components of {n} points", payload.len())));
        }
        let f = |b: &[u8]| f64::from_le_bytes(b.try_into().unwrap());
        let components = payload
            .chunks_exact(per)
            .map(|c| c.chunks_exact(16).map(|z| Complex64::new(f(&z[..8]), f(&z[8..]))).collect())
            .collect();
        Ok(Self { extent, components })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let snap = Snapshot {
            extent: 12.5,
            components: vec![
                (0..8).map(|i| Complex64::new(i as f64, -0.5 * i as f64)).collect(),
                (0..8).map(|i| Complex64::new(1e-300 * i as f64, f64::MAX / (i + 1) as f64)).collect(),
            ],
        };
        let mut bytes = Vec::new();
        snap.write(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 24 + 2 * 8 * 16);
        assert_eq!(&bytes[..4], b"SPDF");
        assert_eq!(Snapshot::read(bytes.as_slice()).unwrap(), snap);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Snapshot::read(&b"NOPE00000000000000000000"[..]).is_err());
        let mut bytes = Vec::new();
        Snapshot { extent: 1.0, components: vec![vec![Complex64::new(1.0, 0.0); 4]] }.write(&mut bytes).unwrap();
        bytes.pop();
        assert!(Snapshot::read(bytes.as_slice()).is_err());
    }
}
