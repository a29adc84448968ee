use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Magic prefix of the binary field dump.
pub const FIELD_MAGIC: &[u8; 16] = b"THINFRAC-FIELD\0\0";

/// Node values of the extension `u(x, y)` on the stored `y >= 0` half.
///
/// Evenness in `y` is structural: any access at `y < 0` goes through
/// [`ScalarField::mirror_read`], which reads the reflected node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    /// Fractional order recorded in dumps; NaN is written when absent.
    pub dump_s: Option<f64>,
}

impl ScalarField {
    pub fn zeros(spec: GridSpec) -> Self {
        let n = spec.num_nodes();
        ScalarField { spec, values: vec![0.0; n], dump_s: None }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64], f64) -> f64) -> Self {
        let n = spec.num_nodes();
        let mut values = vec![0.0; n];
        for (id, v) in values.iter_mut().enumerate() {
            let (ix, j) = spec.node_coords(id);
            let (x, y) = spec.position(&ix, j);
            *v = f(&x, y);
        }
        ScalarField { spec, values, dump_s: None }
    }

    #[inline]
    pub fn at(&self, ix: &[usize], j: usize) -> f64 {
        self.values[self.spec.node_id(ix, j)]
    }

    /// Even-in-`y` read: a signed `i_y` below the thin space reads the
    /// mirrored node `|i_y|`.
    pub fn mirror_read(&self, ix: &[usize], i_y: i64) -> Result<f64> {
        let j = i_y.unsigned_abs() as usize;
        if j >= self.spec.ny() {
            return Err(Error::Index(format!("|i_y|={j} beyond y extent ({} nodes)", self.spec.ny())));
        }
        for (k, &i) in ix.iter().enumerate() {
            if i >= self.spec.nodes_per_axis[k] {
                return Err(Error::Index(format!("i_x[{k}]={i} beyond axis ({} nodes)", self.spec.nodes_per_axis[k])));
            }
        }
        Ok(self.at(ix, j))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Multilinear interpolation at a physical point with `y >= 0`.
    ///
    /// Points must lie within the grid extent (a relative slack of 1e-9 h is
    /// tolerated at the faces).
    pub fn interpolate(&self, x: &[f64], y: f64) -> Result<f64> {
        let g = &self.spec;
        let h = g.h;
        let slack = 1e-9 * h;
        let mut base = Vec::with_capacity(g.dim_x + 1);
        let mut frac = Vec::with_capacity(g.dim_x + 1);
        for (k, &xk) in x.iter().enumerate() {
            let t = (xk + g.extent[k]) / h;
            let n = g.nodes_per_axis[k];
            if t < -slack / h || t > (n - 1) as f64 + slack / h {
                return Err(Error::Extent(format!("x[{k}]={xk} outside grid")));
            }
            let i = (t.floor() as usize).min(n - 2);
            base.push(i);
            frac.push((t - i as f64).clamp(0.0, 1.0));
        }
        if y < -slack || y > g.extent[g.dim_x] + slack {
            return Err(Error::Extent(format!("y={y} outside grid")));
        }
        let t = (y / h).max(0.0);
        let jn = g.ny();
        let j = (t.floor() as usize).min(jn - 2);
        base.push(j);
        frac.push((t - j as f64).clamp(0.0, 1.0));

        let dims = g.dim_x + 1;
        let mut acc = 0.0;
        for corner in 0..(1usize << dims) {
            let mut w = 1.0;
            let mut ix = vec![0usize; g.dim_x];
            let mut jj = 0usize;
            for d in 0..dims {
                let hi = (corner >> d) & 1 == 1;
                let f = frac[d];
                w *= if hi { f } else { 1.0 - f };
                let idx = base[d] + hi as usize;
                if d < g.dim_x {
                    ix[d] = idx;
                } else {
                    jj = idx;
                }
            }
            if w != 0.0 {
                acc += w * self.at(&ix, jj);
            }
        }
        Ok(acc)
    }

    /// Trace on the thin line: value at `(ix, 0)`.
    #[inline]
    pub fn trace(&self, ix: &[usize]) -> f64 {
        self.at(ix, 0)
    }

    /// Writes the binary dump (little-endian, bit-exact).
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(FIELD_MAGIC)?;
        w.write_all(&(self.spec.dim_x as u32).to_le_bytes())?;
        for &n in &self.spec.nodes_per_axis {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        w.write_all(&self.spec.h.to_le_bytes())?;
        // the dump carries s for provenance; fields built outside a problem
        // context store NaN there
        w.write_all(&self.dump_s.unwrap_or(f64::NAN).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn read_from(r: &mut impl Read) -> Result<(Self, f64)> {
        let mut magic = [0u8; 16];
        r.read_exact(&mut magic)?;
        if &magic != FIELD_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let dim_x = u32::from_le_bytes(b4) as usize;
        if dim_x != 1 && dim_x != 2 {
            return Err(Error::Format(format!("dim_x={dim_x}")));
        }
        let mut nodes = Vec::with_capacity(dim_x + 1);
        for _ in 0..=dim_x {
            r.read_exact(&mut b4)?;
            nodes.push(u32::from_le_bytes(b4) as usize);
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let h = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let s = f64::from_le_bytes(b8);
        let mut extent = Vec::with_capacity(dim_x + 1);
        for (k, &n) in nodes.iter().enumerate() {
            if n < 2 {
                return Err(Error::Format(format!("axis {k} has {n} nodes")));
            }
            let steps = if k < dim_x { (n - 1) / 2 } else { n - 1 };
            if k < dim_x && n % 2 == 0 {
                return Err(Error::Format(format!("x axis {k} has even node count {n}")));
            }
            extent.push(steps as f64 * h);
        }
        let spec = GridSpec::new(dim_x, h, &extent).map_err(|e| Error::Format(e.to_string()))?;
        if spec.nodes_per_axis != nodes {
            return Err(Error::Format("inconsistent node counts".into()));
        }
        let nn = spec.num_nodes();
        let mut values = vec![0.0f64; nn];
        for v in values.iter_mut() {
            r.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        Ok((ScalarField { spec, values, dump_s: Some(s) }, s))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, f64)> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScalarField {
        let g = GridSpec::new(1, 0.5, &[1.0, 1.0]).unwrap();
        ScalarField::from_fn(g, |x, y| x[0] + 10.0 * y)
    }

    #[test]
    fn mirror_reads_even_reflection() {
        let g = GridSpec::new(1, 1.0, &[1.0, 2.0]).unwrap();
        let mut f = ScalarField::zeros(g);
        let id = f.spec.node_id(&[1], 1); // (x=0, y=h)
        f.values[id] = 3.0;
        assert_eq!(f.mirror_read(&[1], -1).unwrap(), 3.0);
        assert_eq!(f.mirror_read(&[1], 1).unwrap(), 3.0);
    }

    #[test]
    fn mirror_read_at_zero_is_trace() {
        let f = small();
        assert_eq!(f.mirror_read(&[2], 0).unwrap(), f.trace(&[2]));
    }

    #[test]
    fn mirror_read_beyond_extent_errors() {
        let f = small();
        assert!(matches!(f.mirror_read(&[2], 5), Err(Error::Index(_))));
        assert!(matches!(f.mirror_read(&[9], 0), Err(Error::Index(_))));
    }

    #[test]
    fn interpolation_reproduces_multilinear() {
        let f = small();
        let v = f.interpolate(&[0.3], 0.7).unwrap();
        assert!((v - (0.3 + 7.0)).abs() < 1e-12);
        assert!(f.interpolate(&[1.7], 0.0).is_err());
    }

    #[test]
    fn dump_round_trips_bit_exact() {
        let mut f = small();
        f.dump_s = Some(0.5);
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let (g, s) = ScalarField::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(s, 0.5);
        assert_eq!(g.values, f.values);
        assert_eq!(g.spec, f.spec);
    }
}
