//! Degenerate-weight operator: pointwise residual of
//! `L_a = Delta + (a/y) d_y`, the flux-balance Dirichlet solver (harmonic
//! replacement) built from finite-volume conductances of the weighted form
//! `int |y|^a |grad u|^2`, and the transformed linearized solver.

use crate::barriers::u_tau_profile;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{classify, GridSpec, MaskedNodes, Region};
use crate::params::ProblemParams;

/// Per-level edge conductances of the finite-volume form.
///
/// Vertical edges are weighted at their midpoints `y = (j + 1/2) h`, so the
/// degenerate node weight `|0|^a` is never evaluated; the horizontal edges on
/// the thin line carry the exact cell average
/// `(h/2)^a / (1 + a)` of `|y|^a` across the reflected strip. Reflection
/// doubles every stored edge except the thin horizontal ones, whose average
/// already covers both sides.
#[derive(Debug, Clone)]
pub struct StencilWeights {
    pub h: f64,
    pub a: f64,
    pub dim_x: usize,
    horiz: Vec<f64>,
    vert: Vec<f64>,
    /// Thin-line cell measure `h^n` multiplying the phase terms.
    pub thin_cell: f64,
}

impl StencilWeights {
    pub fn new(grid: &GridSpec, a: f64) -> Self {
        let h = grid.h;
        let ny = grid.ny();
        let cross = h.powi(grid.dim_x as i32 - 1);
        let mut horiz = Vec::with_capacity(ny);
        // j = 0: exact average of |y|^a over the reflected cell, counted once
        horiz.push((0.5 * h).powf(a) / (1.0 + a) * cross);
        for j in 1..ny {
            horiz.push(2.0 * (j as f64 * h).powf(a) * cross);
        }
        let mut vert = Vec::with_capacity(ny.saturating_sub(1));
        for j in 0..ny.saturating_sub(1) {
            vert.push(2.0 * ((j as f64 + 0.5) * h).powf(a) * cross);
        }
        debug_assert!(horiz.iter().chain(vert.iter()).all(|&c| c > 0.0));
        StencilWeights { h, a, dim_x: grid.dim_x, horiz, vert, thin_cell: h.powi(grid.dim_x as i32) }
    }

    /// Conductance of an x-edge at level `j`.
    #[inline]
    pub fn horiz(&self, j: usize) -> f64 {
        self.horiz[j]
    }

    /// Conductance of the y-edge between levels `j` and `j + 1`.
    #[inline]
    pub fn vert(&self, j: usize) -> f64 {
        self.vert[j]
    }

    /// Two-sided cell average of `|y|^a` times the cell height, for mass
    /// quadratures `int u^2 |y|^a`.
    #[inline]
    pub fn mass_weight(&self, j: usize) -> f64 {
        if j == 0 {
            2.0 * (0.5 * self.h).powf(self.a + 1.0) / (1.0 + self.a)
        } else {
            2.0 * self.h * (j as f64 * self.h).powf(self.a)
        }
    }
}

/// Pointwise residual of `L_a f` with evaluation flags.
#[derive(Debug, Clone)]
pub struct LaOutput {
    pub field: ScalarField,
    /// True where the central-difference stencil was applied (interior nodes
    /// with `y > 0`); thin-line and boundary nodes are left at 0.
    pub evaluated: Vec<bool>,
}

/// Second-order central-difference discretization of
/// `Delta f + (a/y) d_y f` at interior nodes with `y > 0`.
pub fn apply_la(f: &ScalarField, p: &ProblemParams) -> LaOutput {
    let g = &f.spec;
    let h = g.h;
    let h2 = h * h;
    let ny = g.ny();
    let mut out = ScalarField::zeros(g.clone());
    let mut evaluated = vec![false; g.num_nodes()];
    for id in 0..g.num_nodes() {
        let (ix, j) = g.node_coords(id);
        if j == 0 || j + 1 >= ny {
            continue;
        }
        let mut interior = true;
        for k in 0..g.dim_x {
            if ix[k] == 0 || ix[k] + 1 >= g.nodes_per_axis[k] {
                interior = false;
                break;
            }
        }
        if !interior {
            continue;
        }
        let f0 = f.values[id];
        let mut lap = 0.0;
        for k in 0..g.dim_x {
            let mut lo = ix.clone();
            lo[k] -= 1;
            let mut hi = ix.clone();
            hi[k] += 1;
            lap += (f.at(&hi, j) - 2.0 * f0 + f.at(&lo, j)) / h2;
        }
        let up = f.at(&ix, j + 1);
        let dn = f.at(&ix, j - 1);
        lap += (up - 2.0 * f0 + dn) / h2;
        let y = g.y_coord(j);
        let la = lap + p.a / y * (up - dn) / (2.0 * h);
        out.values[id] = la;
        evaluated[id] = true;
    }
    LaOutput { field: out, evaluated }
}

/// Iteration count and achieved flux-balance residual of a solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

const MAX_ITERS: usize = 100_000;
const SSOR_OMEGA: f64 = 1.5;

/// Compacted SPD flux-balance system on the interior of a mask.
pub(crate) struct MaskedSystem {
    pub dofs: Vec<usize>,
    /// Per-dof neighbor dof index (or -1) and edge conductance, slots:
    /// `[x_k-, x_k+ ...]` then `y-`, `y+`.
    nbr: Vec<[i32; 6]>,
    cond: Vec<[f64; 6]>,
    nbr_node: Vec<[i32; 6]>,
    pub diag: Vec<f64>,
    slots: usize,
}

impl MaskedSystem {
    /// `edge_cond(ix, j, axis, toward_plus)` returns the conductance of the
    /// stored edge leaving `(ix, j)`; `axis == dim_x` is the y direction.
    pub fn build(
        grid: &GridSpec,
        mask: &MaskedNodes,
        pinned: &[usize],
        edge_cond: &dyn Fn(&[usize], usize, usize, bool) -> f64,
    ) -> Self {
        let mut is_pinned = vec![false; grid.num_nodes()];
        for &id in pinned {
            is_pinned[id] = true;
        }
        let dofs: Vec<usize> =
            mask.interior_ids.iter().copied().filter(|&id| !is_pinned[id]).collect();
        let mut dof_of = vec![-1i64; grid.num_nodes()];
        for (d, &id) in dofs.iter().enumerate() {
            dof_of[id] = d as i64;
        }
        let slots = 2 * grid.dim_x + 2;
        let n = dofs.len();
        let mut nbr = vec![[-1i32; 6]; n];
        let mut cond = vec![[0.0f64; 6]; n];
        let mut nbr_node = vec![[-1i32; 6]; n];
        let mut diag = vec![0.0f64; n];
        let ny = grid.ny();
        for (d, &id) in dofs.iter().enumerate() {
            let (ix, j) = grid.node_coords(id);
            let mut slot = 0;
            let mut push = |slot: &mut usize, nid: usize, c: f64| {
                diag[d] += c;
                cond[d][*slot] = c;
                nbr_node[d][*slot] = nid as i32;
                nbr[d][*slot] = if dof_of[nid] >= 0 { dof_of[nid] as i32 } else { -1 };
                *slot += 1;
            };
            for k in 0..grid.dim_x {
                let c = edge_cond(&ix, j, k, false);
                let mut lo = ix.clone();
                lo[k] -= 1;
                push(&mut slot, grid.node_id(&lo, j), c);
                let c = edge_cond(&ix, j, k, true);
                let mut hi = ix.clone();
                hi[k] += 1;
                push(&mut slot, grid.node_id(&hi, j), c);
            }
            if j > 0 {
                let c = edge_cond(&ix, j, grid.dim_x, false);
                push(&mut slot, grid.node_id(&ix, j - 1), c);
            } else {
                slot += 1;
            }
            debug_assert!(j + 1 < ny);
            let c = edge_cond(&ix, j, grid.dim_x, true);
            push(&mut slot, grid.node_id(&ix, j + 1), c);
        }
        MaskedSystem { dofs, nbr, cond, nbr_node, diag, slots }
    }

    pub fn ndof(&self) -> usize {
        self.dofs.len()
    }

    /// Right-hand side induced by fixed values at non-dof nodes.
    pub fn rhs(&self, fixed: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; self.ndof()];
        for d in 0..self.ndof() {
            let mut acc = 0.0;
            for slot in 0..self.slots {
                if self.nbr[d][slot] < 0 && self.cond[d][slot] > 0.0 {
                    acc += self.cond[d][slot] * fixed[self.nbr_node[d][slot] as usize];
                }
            }
            b[d] = acc;
        }
        b
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for d in 0..self.ndof() {
            let mut acc = self.diag[d] * v[d];
            for slot in 0..self.slots {
                let q = self.nbr[d][slot];
                if q >= 0 {
                    acc -= self.cond[d][slot] * v[q as usize];
                }
            }
            out[d] = acc;
        }
    }

    /// SSOR preconditioner application
    /// `z = w(2-w) (D + wU)^{-1} D (D + wL)^{-1} r`.
    fn ssor(&self, r: &[f64], z: &mut [f64]) {
        let w = SSOR_OMEGA;
        let n = self.ndof();
        for d in 0..n {
            let mut acc = r[d];
            for slot in 0..self.slots {
                let q = self.nbr[d][slot];
                if q >= 0 && (q as usize) < d {
                    acc += w * self.cond[d][slot] * z[q as usize];
                }
            }
            z[d] = acc / self.diag[d];
        }
        for d in (0..n).rev() {
            let mut acc = 0.0;
            for slot in 0..self.slots {
                let q = self.nbr[d][slot];
                if q >= 0 && (q as usize) > d {
                    acc += self.cond[d][slot] * z[q as usize];
                }
            }
            z[d] += w * acc / self.diag[d];
        }
        let scale = w * (2.0 - w);
        for v in z.iter_mut() {
            *v *= scale;
        }
    }

    /// Preconditioned CG on `A x = b` to `||b - Ax||_inf <= tol_abs`.
    pub fn pcg(&self, b: &[f64], x: &mut [f64], tol_abs: f64, max_iters: usize) -> (usize, f64) {
        let n = self.ndof();
        let mut r = vec![0.0; n];
        self.apply(x, &mut r);
        for d in 0..n {
            r[d] = b[d] - r[d];
        }
        let mut res = inf_norm(&r);
        if res <= tol_abs {
            return (0, res);
        }
        let mut z = vec![0.0; n];
        self.ssor(&r, &mut z);
        let mut d_vec = z.clone();
        let mut rz: f64 = dot(&r, &z);
        let mut q = vec![0.0; n];
        for it in 1..=max_iters {
            self.apply(&d_vec, &mut q);
            let dq = dot(&d_vec, &q);
            if dq <= 0.0 {
                return (it, res);
            }
            let alpha = rz / dq;
            for k in 0..n {
                x[k] += alpha * d_vec[k];
                r[k] -= alpha * q[k];
            }
            res = inf_norm(&r);
            if res <= tol_abs {
                return (it, res);
            }
            self.ssor(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                d_vec[k] = z[k] + beta * d_vec[k];
            }
        }
        (max_iters, res)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn standard_edge_cond<'a>(
    w: &'a StencilWeights,
) -> impl Fn(&[usize], usize, usize, bool) -> f64 + 'a {
    move |_ix: &[usize], j: usize, axis: usize, plus: bool| {
        if axis < w.dim_x {
            w.horiz(j)
        } else if plus {
            w.vert(j)
        } else {
            w.vert(j - 1)
        }
    }
}

fn solve_masked(
    boundary: &ScalarField,
    region_mask: &MaskedNodes,
    pinned: &[usize],
    pin_value: f64,
    edge_cond: &dyn Fn(&[usize], usize, usize, bool) -> f64,
    tol: f64,
) -> Result<(ScalarField, SolveStats)> {
    let grid = &boundary.spec;
    let sys = MaskedSystem::build(grid, region_mask, pinned, edge_cond);
    let mut out = boundary.clone();
    for &id in pinned {
        out.values[id] = pin_value;
    }
    if sys.ndof() == 0 {
        return Ok((out, SolveStats { iterations: 0, residual: 0.0 }));
    }
    let b = sys.rhs(&out.values);
    let mut x: Vec<f64> = sys.dofs.iter().map(|&id| boundary.values[id]).collect();
    // range of the fixed data bounds the exact discrete solution
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for d in 0..sys.ndof() {
        for slot in 0..6 {
            if sys.nbr[d][slot] < 0 && sys.cond[d][slot] > 0.0 {
                let v = out.values[sys.nbr_node[d][slot] as usize];
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol_abs = tol * scale.max(f64::MIN_POSITIVE);
    let mut iters_total = 0usize;
    let mut residual = f64::INFINITY;
    for _round in 0..5 {
        let (it, _res) = sys.pcg(&b, &mut x, tol_abs, MAX_ITERS - iters_total.min(MAX_ITERS - 1));
        iters_total += it;
        for v in x.iter_mut() {
            *v = v.clamp(lo, hi);
        }
        let mut r = vec![0.0; sys.ndof()];
        sys.apply(&x, &mut r);
        for d in 0..sys.ndof() {
            r[d] = b[d] - r[d];
        }
        residual = inf_norm(&r);
        if residual <= tol_abs {
            for (d, &id) in sys.dofs.iter().enumerate() {
                out.values[id] = x[d];
            }
            return Ok((out, SolveStats { iterations: iters_total, residual }));
        }
        if iters_total >= MAX_ITERS {
            break;
        }
    }
    Err(Error::NonConvergence { iters: iters_total, residual })
}

/// `a`-harmonic replacement: the discrete minimizer of the weighted
/// Dirichlet form over the region interior, matching `boundary` on the
/// region's discrete boundary. The returned field equals `boundary` outside
/// the interior; the final iterate is clamped into the boundary range, which
/// the exact discrete solution satisfies.
pub fn solve_dirichlet(
    boundary: &ScalarField,
    p: &ProblemParams,
    region: &Region,
    tol: f64,
) -> Result<(ScalarField, SolveStats)> {
    solve_dirichlet_pinned(boundary, p, region, &[], tol)
}

/// Dirichlet solve with extra interior nodes pinned to zero (the
/// sign-pattern solves of the sharp functional).
pub fn solve_dirichlet_pinned(
    boundary: &ScalarField,
    p: &ProblemParams,
    region: &Region,
    pinned: &[usize],
    tol: f64,
) -> Result<(ScalarField, SolveStats)> {
    if !(tol > 0.0) {
        return Err(Error::domain("tol", format!("{tol} not > 0")));
    }
    let grid = &boundary.spec;
    let mask = classify(grid, region);
    if mask.interior_ids.is_empty() {
        return Err(Error::Degenerate("region has no interior nodes".into()));
    }
    let w = StencilWeights::new(grid, p.a);
    let cond = standard_edge_cond(&w);
    solve_masked(boundary, &mask, pinned, 0.0, &cond, tol)
}

/// Default exclusion radius, in mesh widths, of the tube around the edge
/// `L = {x_n = 0, y = 0}` for the linearized solve.
pub const LINEARIZED_TUBE_CELLS: f64 = 4.0;
/// Floor applied to the squared profile-derivative weight.
pub const LINEARIZED_WEIGHT_FLOOR: f64 = 1e-12;

/// Solves the transformed linearized equation
/// `div(U_n^2 |y|^a grad h) = 0` on the region minus a tube of radius `4h`
/// around `L`, with the profile weight evaluated at edge midpoints and
/// floored at 1e-12.
pub fn solve_linearized(
    boundary: &ScalarField,
    p: &ProblemParams,
    region: &Region,
    tol: f64,
) -> Result<(ScalarField, SolveStats)> {
    if !(tol > 0.0) {
        return Err(Error::domain("tol", format!("{tol} not > 0")));
    }
    let grid = &boundary.spec;
    let h = grid.h;
    let r_cut = LINEARIZED_TUBE_CELLS * h;
    let n = grid.dim_x;
    let base = classify(grid, region);
    let mut mask = base;
    // carve the tube out of the inside set, then reclassify interiors
    for id in 0..grid.num_nodes() {
        if !mask.inside[id] {
            continue;
        }
        let (ix, j) = grid.node_coords(id);
        let (x, y) = grid.position(&ix, j);
        if x[n - 1].hypot(y) < r_cut {
            mask.inside[id] = false;
        }
    }
    let inside = mask.inside.clone();
    let mut reclass = classify_inside(grid, &inside);
    std::mem::swap(&mut mask, &mut reclass);
    if mask.interior_ids.is_empty() {
        return Err(Error::Degenerate("region minus tube has no interior nodes".into()));
    }
    let w = StencilWeights::new(grid, p.a);
    let s = p.s;
    let ext_n = grid.extent[n - 1];
    let cond = move |ix: &[usize], j: usize, axis: usize, plus: bool| -> f64 {
        let base = if axis < w.dim_x {
            w.horiz(j)
        } else if plus {
            w.vert(j)
        } else {
            w.vert(j - 1)
        };
        let mut xn = -ext_n + ix[n - 1] as f64 * h;
        let mut y = j as f64 * h;
        if axis == n - 1 {
            xn += if plus { 0.5 * h } else { -0.5 * h };
        } else if axis == w.dim_x {
            y += if plus { 0.5 * h } else { -0.5 * h };
        }
        let un = u_tau_profile(xn, y, s);
        let wsq = if un.is_finite() { (un * un).max(LINEARIZED_WEIGHT_FLOOR) } else { LINEARIZED_WEIGHT_FLOOR };
        base * wsq
    };
    solve_masked(boundary, &mask, &[], 0.0, &cond, tol)
}

/// Re-derives interior/boundary classification from a raw inside set.
pub(crate) fn classify_inside(grid: &GridSpec, inside: &[bool]) -> MaskedNodes {
    let nn = grid.num_nodes();
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
            let nk = grid.nodes_per_axis[k];
            if ix[k] == 0 || ix[k] + 1 >= nk {
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
    MaskedNodes { inside: inside.to_vec(), interior, interior_ids, boundary_ids }
}

/// Realized boundary-Harnack constant: the sup over `B_r(x0) ∩ {y > 0}` of
/// `f(x, y) r^{2s} / (y^{2s} f(x0, r))`.
pub fn harnack_ratio(f: &ScalarField, p: &ProblemParams, x0: &[f64], r: f64) -> Result<f64> {
    let v0 = f.interpolate(x0, r)?;
    if v0 <= 0.0 {
        return Err(Error::Degenerate(format!("f(x0, r) = {v0} not positive")));
    }
    let g = &f.spec;
    let two_s = 2.0 * p.s;
    let r2s = r.powf(two_s);
    let mut sup = f64::NEG_INFINITY;
    for id in 0..g.num_nodes() {
        let (ix, j) = g.node_coords(id);
        if j == 0 {
            continue;
        }
        let (x, y) = g.position(&ix, j);
        let mut d2 = y * y;
        for (k, &xk) in x.iter().enumerate() {
            let d = xk - x0[k];
            d2 += d * d;
        }
        if d2.sqrt() > r {
            continue;
        }
        sup = sup.max(f.values[id] * r2s / (y.powf(two_s) * v0));
    }
    if !sup.is_finite() {
        return Err(Error::Degenerate("no nodes with y > 0 in the ball".into()));
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles;

    fn params(s: f64) -> ProblemParams {
        ProblemParams::one_phase(s).unwrap()
    }

    #[test]
    fn la_of_constant_is_exactly_zero() {
        let g = GridSpec::new(1, 0.125, &[1.0, 1.0]).unwrap();
        let f = ScalarField::from_fn(g, |_, _| 4.2);
        let out = apply_la(&f, &params(0.3));
        assert!(out.field.values.iter().all(|&v| v == 0.0));
        assert!(out.evaluated.iter().any(|&b| b));
    }

    #[test]
    fn la_of_linear_is_exactly_zero() {
        let g = GridSpec::new(1, 0.125, &[1.0, 1.0]).unwrap();
        let f = ScalarField::from_fn(g, |x, _| x[0]);
        let out = apply_la(&f, &params(0.7));
        for (id, &v) in out.field.values.iter().enumerate() {
            if out.evaluated[id] {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn la_residual_on_y2s_away_from_plate_refines_at_order_two() {
        let s = 0.3;
        let p = params(s);
        let mut errs = Vec::new();
        for lvl in 0..3 {
            let h = 0.0625 / f64::powi(2.0, lvl);
            let g = GridSpec::new(1, h, &[0.5, 1.0]).unwrap();
            let f = profiles::sample_y2s(g.clone(), s);
            let out = apply_la(&f, &p);
            let mut m = 0.0_f64;
            for id in 0..g.num_nodes() {
                let (_, j) = g.node_coords(id);
                if out.evaluated[id] && g.y_coord(j) >= 0.25 {
                    m = m.max(out.field.values[id].abs());
                }
            }
            errs.push(m);
        }
        for w in errs.windows(2) {
            assert!(w[0] / w[1] > 3.5, "orders: {errs:?}");
        }
    }

    #[test]
    fn constant_boundary_data_solves_exactly() {
        let g = GridSpec::new(1, 0.125, &[1.0, 1.0]).unwrap();
        let f = ScalarField::from_fn(g, |_, _| 2.5);
        let p = params(0.6);
        let region = Region::ball(&[0.0], 0.75);
        let (v, stats) = solve_dirichlet(&f, &p, &region, 1e-12).unwrap();
        for val in &v.values {
            assert_eq!(*val, 2.5);
        }
        assert!(stats.residual.is_finite());
    }

    #[test]
    fn maximum_principle_holds_exactly() {
        let g = GridSpec::new(1, 0.0625, &[1.0, 1.0]).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x, y| (7.0 * x[0]).sin() + (3.0 * y).cos());
        let p = params(0.25);
        let region = Region::ball(&[0.125], 0.625);
        let mask = classify(&g, &region);
        let (v, _) = solve_dirichlet(&f, &p, &region, 1e-11).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &id in &mask.boundary_ids {
            lo = lo.min(f.values[id]);
            hi = hi.max(f.values[id]);
        }
        for &id in &mask.interior_ids {
            assert!(v.values[id] >= lo && v.values[id] <= hi);
        }
    }

    #[test]
    fn flux_form_is_symmetric_and_positive() {
        let g = GridSpec::new(1, 0.125, &[1.0, 1.0]).unwrap();
        let region = Region::ball(&[0.0], 0.875);
        let mask = classify(&g, &region);
        let w = StencilWeights::new(&g, -0.5);
        let cond = standard_edge_cond(&w);
        let sys = MaskedSystem::build(&g, &mask, &[], &cond);
        let n = sys.ndof();
        let mut rng = crate::minimize::seeded_rng(11);
        for _ in 0..5 {
            let u: Vec<f64> = (0..n).map(|_| crate::barriers::uniform(&mut rng) - 0.5).collect();
            let v: Vec<f64> = (0..n).map(|_| crate::barriers::uniform(&mut rng) - 0.5).collect();
            let mut au = vec![0.0; n];
            let mut av = vec![0.0; n];
            sys.apply(&u, &mut au);
            sys.apply(&v, &mut av);
            let uav: f64 = u.iter().zip(&av).map(|(a, b)| a * b).sum();
            let vau: f64 = v.iter().zip(&au).map(|(a, b)| a * b).sum();
            assert!((uav - vau).abs() <= 1e-12 * uav.abs().max(vau.abs()).max(1.0));
            let uau: f64 = u.iter().zip(&au).map(|(a, b)| a * b).sum();
            assert!(uau > 0.0);
        }
    }

    #[test]
    fn harnack_ratio_of_y2s_is_one() {
        let s = 0.4;
        let g = GridSpec::new(1, 0.0625, &[1.0, 1.0]).unwrap();
        let f = profiles::sample_y2s(g, s);
        let r = harnack_ratio(&f, &params(s), &[0.0], 0.5).unwrap();
        assert!((r - 1.0).abs() < 1e-10);
    }

    #[test]
    fn harnack_ratio_degenerate_error() {
        let g = GridSpec::new(1, 0.25, &[1.0, 1.0]).unwrap();
        let f = ScalarField::zeros(g);
        assert!(matches!(
            harnack_ratio(&f, &params(0.5), &[0.0], 0.5),
            Err(Error::Degenerate(_))
        ));
    }
}
