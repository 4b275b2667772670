use super::field::Field;
use crate::error::{Error, Result};

/// H^s (⟨ξ⟩^s weight) or Ḣ^s (|ξ|^s weight) norm with torus Parseval
/// normalization. The homogeneous norm with s < 0 is undefined for data
/// with a nonzero mean.
pub fn sobolev_norm<const C: usize>(f: &Field<C>, s: f64, homogeneous: bool) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::invalid("s", "must be finite"));
    }
    let g = f.in_frequency();
    let grid = *g.grid();
    if homogeneous && s < 0.0 {
        let total: f64 = g.components().iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mean: f64 = g.components().iter().map(|v| v[0].norm_sqr()).sum::<f64>().sqrt();
        if mean > 1e-12 * total {
            return Err(Error::Undefined(format!("homogeneous H^{s} norm of a field with nonzero mean")));
        }
    }
    let mut acc = 0.0;
    for idx in 0..grid.len() {
        let r2 = {
            let [a, b] = grid.xi(idx);
            a * a + b * b
        };
        let w = if homogeneous {
            if r2 == 0.0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                r2.powf(s)
            }
        } else {
            (1.0 + r2).powf(s)
        };
        let m: f64 = g.components().iter().map(|v| v[idx].norm_sqr()).sum();
        acc += w * m;
    }
    Ok(acc.sqrt() / grid.box_length())
}
