use crate::error::{Error, Result};

/// Uniform half-slab discretization of the extension domain.
///
/// The thin space `{y = 0}` is exactly the node layer `j = 0`; only the
/// `y >= 0` half is stored, evenness in `y` being supplied by mirror reads.
/// All axes share the same mesh width `h`. The `x` axes are symmetric
/// intervals `[-extent, extent]` (so `x = 0` is a node column), the `y` axis
/// covers `[0, extent_y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Thin-space dimension `n` (1 or 2).
    pub dim_x: usize,
    /// Mesh width, shared by every axis.
    pub h: f64,
    /// Per-axis half-widths: `dim_x` values for the x axes, then the y height.
    pub extent: Vec<f64>,
    /// Node counts per axis (x axes first, then y).
    pub nodes_per_axis: Vec<usize>,
}

fn to_steps(extent: f64, h: f64, field: &'static str) -> Result<usize> {
    let steps = extent / h;
    let rounded = steps.round();
    if rounded < 1.0 || (steps - rounded).abs() > 1e-9 * steps.max(1.0) {
        return Err(Error::domain(field, format!("extent {extent} is not a positive multiple of h={h}")));
    }
    Ok(rounded as usize)
}

impl GridSpec {
    pub fn new(dim_x: usize, h: f64, extent: &[f64]) -> Result<Self> {
        if dim_x != 1 && dim_x != 2 {
            return Err(Error::domain("dim_x", format!("{dim_x} not in {{1, 2}}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain("h", format!("{h} not > 0")));
        }
        if extent.len() != dim_x + 1 {
            return Err(Error::domain(
                "extent",
                format!("{} half-widths given, expected {}", extent.len(), dim_x + 1),
            ));
        }
        let mut nodes = Vec::with_capacity(dim_x + 1);
        for (k, &e) in extent.iter().enumerate() {
            let steps = to_steps(e, h, "extent")?;
            // x axes span [-e, e]; y axis spans [0, e]
            nodes.push(if k < dim_x { 2 * steps + 1 } else { steps + 1 });
        }
        Ok(GridSpec { dim_x, h, extent: extent.to_vec(), nodes_per_axis: nodes })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes_per_axis.iter().product()
    }

    pub fn ny(&self) -> usize {
        self.nodes_per_axis[self.dim_x]
    }

    /// Physical x-coordinate of index `i` on x-axis `k`.
    #[inline]
    pub fn x_coord(&self, k: usize, i: usize) -> f64 {
        -self.extent[k] + i as f64 * self.h
    }

    #[inline]
    pub fn y_coord(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    /// Row-major linear index, y fastest.
    #[inline]
    pub fn node_id(&self, ix: &[usize], j: usize) -> usize {
        debug_assert_eq!(ix.len(), self.dim_x);
        let mut id = 0usize;
        for (k, &i) in ix.iter().enumerate() {
            debug_assert!(i < self.nodes_per_axis[k]);
            id = id * self.nodes_per_axis[k] + i;
        }
        id * self.ny() + j
    }

    /// Inverse of [`node_id`]: `(ix, j)` of a linear index.
    #[inline]
    pub fn node_coords(&self, id: usize) -> (Vec<usize>, usize) {
        let ny = self.ny();
        let j = id % ny;
        let mut rest = id / ny;
        let mut ix = vec![0usize; self.dim_x];
        for k in (0..self.dim_x).rev() {
            ix[k] = rest % self.nodes_per_axis[k];
            rest /= self.nodes_per_axis[k];
        }
        (ix, j)
    }

    /// Physical position of a node as (x-vector, y).
    pub fn position(&self, ix: &[usize], j: usize) -> (Vec<f64>, f64) {
        let x = ix.iter().enumerate().map(|(k, &i)| self.x_coord(k, i)).collect();
        (x, self.y_coord(j))
    }

    /// Index of the x-node closest to physical coordinate `x` on axis `k`,
    /// or an error when `x` falls outside the axis.
    pub fn x_index(&self, k: usize, x: f64) -> Result<usize> {
        let f = (x + self.extent[k]) / self.h;
        let i = f.round();
        if i < -0.5 || i as usize >= self.nodes_per_axis[k] {
            return Err(Error::Index(format!("x={x} outside axis {k} (half-width {})", self.extent[k])));
        }
        Ok(i as usize)
    }
}

/// Solid ball or axis-aligned box mask inside a grid.
///
/// Balls are centered on the thin space, matching the balls `B_r(x_0, 0)` the
/// energy inequalities quantify over.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    /// `lo`/`hi` hold `dim_x + 1` physical bounds; `lo` of the y axis may be 0,
    /// in which case the thin nodes belong to the mask.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Region {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        Region::Ball { center: center.to_vec(), radius }
    }

    pub fn solid_box(lo: &[f64], hi: &[f64]) -> Self {
        Region::Box { lo: lo.to_vec(), hi: hi.to_vec() }
    }

    /// Geometric membership of a node; a small relative slack keeps dyadic
    /// radii from excluding nodes that lie exactly on the sphere.
    pub fn contains(&self, grid: &GridSpec, ix: &[usize], j: usize) -> bool {
        let (x, y) = grid.position(ix, j);
        match self {
            Region::Ball { center, radius } => {
                let mut d2 = y * y;
                for (k, &xk) in x.iter().enumerate() {
                    let d = xk - center[k];
                    d2 += d * d;
                }
                d2.sqrt() <= radius * (1.0 + 1e-12)
            }
            Region::Box { lo, hi } => {
                let slack = 1e-12 * grid.h.max(1.0);
                for (k, &xk) in x.iter().enumerate() {
                    if xk < lo[k] - slack || xk > hi[k] + slack {
                        return false;
                    }
                }
                y >= lo[grid.dim_x] - slack && y <= hi[grid.dim_x] + slack
            }
        }
    }
}

/// Classification of the grid against a region mask.
///
/// A node is *interior* iff it and all of its `2(n+1) - 1` stored neighbors
/// (the reflected down-neighbor at `y = 0` coincides with the up-neighbor and
/// counts once) are inside; inside nodes that are not interior form the
/// discrete boundary where Dirichlet data is read.
#[derive(Debug, Clone)]
pub struct MaskedNodes {
    pub inside: Vec<bool>,
    pub interior: Vec<bool>,
    pub interior_ids: Vec<usize>,
    pub boundary_ids: Vec<usize>,
}

pub fn classify(grid: &GridSpec, region: &Region) -> MaskedNodes {
    let nn = grid.num_nodes();
    let mut inside = vec![false; nn];
    for id in 0..nn {
        let (ix, j) = grid.node_coords(id);
        inside[id] = region.contains(grid, &ix, j);
    }
    let mut interior = vec![false; nn];
    let mut interior_ids = Vec::new();
    let mut boundary_ids = Vec::new();
    let ny = grid.ny();
    for id in 0..nn {
        if !inside[id] {
            continue;
        }
        let (ix, j) = grid.node_coords(id);
        let mut all_in = true;
        for k in 0..grid.dim_x {
            let n = grid.nodes_per_axis[k];
            if ix[k] == 0 || ix[k] + 1 >= n {
                all_in = false;
                break;
            }
            let mut lo = ix.clone();
            lo[k] -= 1;
            let mut hi = ix.clone();
            hi[k] += 1;
            if !inside[grid.node_id(&lo, j)] || !inside[grid.node_id(&hi, j)] {
                all_in = false;
                break;
            }
        }
        if all_in {
            // up neighbor; at j = 0 the mirrored node is the same one
            if j + 1 >= ny || !inside[grid.node_id(&ix, j + 1)] {
                all_in = false;
            } else if j > 0 && !inside[grid.node_id(&ix, j - 1)] {
                all_in = false;
            }
        }
        interior[id] = all_in;
        if all_in {
            interior_ids.push(id);
        } else {
            boundary_ids.push(id);
        }
    }
    MaskedNodes { inside, interior, interior_ids, boundary_ids }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thin_space_is_a_node_layer() {
        let g = GridSpec::new(1, 0.25, &[1.0, 0.5]).unwrap();
        assert_eq!(g.nodes_per_axis, vec![9, 3]);
        assert_eq!(g.y_coord(0), 0.0);
        assert_eq!(g.x_coord(0, 4), 0.0);
    }

    #[test]
    fn rejects_non_multiple_extent() {
        assert!(GridSpec::new(1, 0.3, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn node_id_round_trips() {
        let g = GridSpec::new(2, 0.5, &[1.0, 1.5, 1.0]).unwrap();
        for id in 0..g.num_nodes() {
            let (ix, j) = g.node_coords(id);
            assert_eq!(g.node_id(&ix, j), id);
        }
    }

    #[test]
    fn ball_interior_requires_all_neighbors() {
        let g = GridSpec::new(1, 0.25, &[1.0, 1.0]).unwrap();
        let m = classify(&g, &Region::ball(&[0.0], 0.75));
        // thin node at the origin is interior (up neighbor + x neighbors inside)
        let origin = g.node_id(&[4], 0);
        assert!(m.interior[origin]);
        // node exactly on the sphere cannot be interior
        let rim = g.node_id(&[7], 0);
        assert!(m.inside[rim] && !m.interior[rim]);
        assert_eq!(m.interior_ids.len() + m.boundary_ids.len(), m.inside.iter().filter(|&&b| b).count());
    }

    #[test]
    fn box_with_positive_floor_excludes_thin_line() {
        let g = GridSpec::new(1, 0.25, &[1.0, 1.0]).unwrap();
        let m = classify(&g, &Region::solid_box(&[-0.5, 0.25], &[0.5, 0.75]));
        for &id in &m.interior_ids {
            let (_, j) = g.node_coords(id);
            assert!(j >= 2);
        }
    }
}
