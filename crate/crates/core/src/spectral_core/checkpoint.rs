//! Binary field checkpoints.
//!
//! Layout: magic `DHC1`, then little-endian `u32 n`, `f64 box_length`,
//! `u32 components`, `u8 representation`, followed by each component as
//! row-major interleaved `(re, im)` f64 pairs.

use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

use super::field::{Field, Representation};
use super::grid::Grid2D;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DHC1";
const HEADER_LEN: usize = 4 + 4 + 8 + 4 + 1;

/// A decoded checkpoint with any component count.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub grid: Grid2D,
    pub repr: Representation,
    pub components: Vec<Vec<Complex64>>,
}

impl Checkpoint {
    pub fn from_field<const C: usize>(f: &Field<C>) -> Self {
        Self { grid: *f.grid(), repr: f.repr(), components: f.components().to_vec() }
    }

    pub fn into_field<const C: usize>(self) -> Result<Field<C>> {
        let got = self.components.len();
        let comps: [Vec<Complex64>; C] = self
            .components
            .try_into()
            .map_err(|_| Error::Checkpoint(format!("expected {C} components, found {got}")))?;
        Field::from_components(self.grid, self.repr, comps)
    }

    pub fn encode(&self) -> Vec<u8> {
        let n = self.grid.n();
        let mut out = Vec::with_capacity(HEADER_LEN + self.components.len() * n * n * 16);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.extend_from_slice(&self.grid.box_length().to_le_bytes());
        out.extend_from_slice(&(self.components.len() as u32).to_le_bytes());
        out.push(self.repr.tag());
        for comp in &self.components {
            for z in comp {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Checkpoint(format!("file too short ({} bytes)", bytes.len())));
        }
        if &bytes[0..4] != MAGIC {
            return Err(Error::Checkpoint("bad magic bytes".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let n = u32_at(4) as usize;
        let box_length = f64_at(8);
        let count = u32_at(16) as usize;
        let repr = Representation::from_tag(bytes[20])
            .ok_or_else(|| Error::Checkpoint(format!("unknown representation tag {}", bytes[20])))?;
        let grid = Grid2D::new(n, box_length).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let want = HEADER_LEN + count * n * n * 16;
        if bytes.len() != want {
            return Err(Error::Checkpoint(format!("expected {want} bytes, found {}", bytes.len())));
        }
        let mut components = Vec::with_capacity(count);
        let mut o = HEADER_LEN;
        for _ in 0..count {
            let mut comp = Vec::with_capacity(n * n);
            for _ in 0..n * n {
                comp.push(Complex64::new(f64_at(o), f64_at(o + 8)));
                o += 16;
            }
            components.push(comp);
        }
        Ok(Self { grid, repr, components })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.encode())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::decode(&buf)
    }

    /// L² norm of each component.
    pub fn component_norms(&self) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                let ss: f64 = c.iter().map(|z| z.norm_sqr()).sum();
                match self.repr {
                    Representation::Physical => (ss * self.grid.cell_area()).sqrt(),
                    Representation::Frequency => ss.sqrt() / self.grid.box_length(),
                }
            })
            .collect()
    }
}

pub fn save<const C: usize>(f: &Field<C>, path: &Path) -> Result<()> {
    Checkpoint::from_field(f).write(path)
}

pub fn load<const C: usize>(path: &Path) -> Result<Field<C>> {
    Checkpoint::read(path)?.into_field()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::field::SpinorField;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid2D::new(8, 1.2345).unwrap();
        let f = SpinorField::random_band_limited(g, 9, 4, |_| 1.0).in_physical();
        let bytes = Checkpoint::from_field(&f).encode();
        assert_eq!(&bytes[..4], b"DHC1");
        assert_eq!(bytes.len(), HEADER_LEN + 2 * 64 * 16);
        let back: SpinorField = Checkpoint::decode(&bytes).unwrap().into_field().unwrap();
        assert_eq!(back.repr(), f.repr());
        for c in 0..2 {
            for (a, b) in back.component(c).iter().zip(f.component(c)) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
        assert_eq!(Checkpoint::from_field(&back).encode(), bytes);
    }

    #[test]
    fn truncated_or_foreign_files_are_rejected() {
        let g = Grid2D::new(4, 1.0).unwrap();
        let bytes = Checkpoint::from_field(&SpinorField::zeros(g, Representation::Frequency)).encode();
        assert!(Checkpoint::decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Checkpoint::decode(&bad).is_err());
        let mut bad = bytes;
        bad[20] = 7;
        assert!(Checkpoint::decode(&bad).is_err());
    }
}
