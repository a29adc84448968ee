//! Closed forms for the model profile and the comparison barrier family,
//! plus sampling certifications of the sub/supersolution inequalities and
//! hodograph transforms.
//!
//! The model profile in the `(tau, eta)` plane is
//! `U(rho, theta) = (rho^(1/2) cos(theta/2))^(2s)`; the barrier family bends
//! `U` over a quadric graph `S = {x_n = xi' . x' + x'^T M x' / 2}` with the
//! radial modulation `(1 + zeta rho / 4)`.

use rand_core::RngCore;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::params::ProblemParams;
use crate::report::AnalysisReport;

/// Admission radius for the barrier class: all barrier lemmas are certified
/// with `mu <= MU0`. Kept small enough that the quadratic error terms stay
/// observable at desk scale.
pub const MU0: f64 = 0.1;

/// Point in the `(tau, eta)` half-plane, `tau = rho cos(theta)`,
/// `eta = rho sin(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub rho: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(rho: f64, theta: f64) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::domain("rho", format!("{rho} not >= 0")));
        }
        if !((-std::f64::consts::PI..=std::f64::consts::PI).contains(&theta)) {
            return Err(Error::domain("theta", format!("{theta} not in [-pi, pi]")));
        }
        Ok(PolarPoint { rho, theta })
    }

    pub fn from_cartesian(tau: f64, eta: f64) -> Self {
        PolarPoint { rho: tau.hypot(eta), theta: eta.atan2(tau) }
    }
}

/// `U(rho, theta) = (rho^(1/2) cos(theta/2))^(2s)`, extended by 0 across
/// `theta = +-pi`.
pub fn eval_u(p: PolarPoint, s: f64) -> f64 {
    let c = (0.5 * p.theta).cos();
    if c <= 0.0 || p.rho == 0.0 {
        return 0.0;
    }
    (p.rho.sqrt() * c).powf(2.0 * s)
}

/// `dU/dtau` through the chain rule in `(rho, theta)`.
///
/// Defined where `U > 0` and `rho > 0`; the identity `U_tau / U = s / rho`
/// is checked against this expression rather than assumed by it.
pub fn eval_u_tau(p: PolarPoint, s: f64) -> Result<f64> {
    if p.rho == 0.0 {
        return Err(Error::Degenerate("u_tau at rho = 0".into()));
    }
    let c = (0.5 * p.theta).cos();
    if c <= 0.0 {
        return Err(Error::Degenerate("u_tau on the zero plate".into()));
    }
    let u = (p.rho.sqrt() * c).powf(2.0 * s);
    let u_rho = s * u / p.rho;
    let u_theta = -s * u * (0.5 * p.theta).tan();
    Ok(u_rho * p.theta.cos() - u_theta * p.theta.sin() / p.rho)
}

/// `dU/deta` through the chain rule in `(rho, theta)`.
pub fn eval_u_eta(p: PolarPoint, s: f64) -> Result<f64> {
    if p.rho == 0.0 {
        return Err(Error::Degenerate("u_eta at rho = 0".into()));
    }
    let c = (0.5 * p.theta).cos();
    if c <= 0.0 {
        return Err(Error::Degenerate("u_eta on the zero plate".into()));
    }
    let u = (p.rho.sqrt() * c).powf(2.0 * s);
    let u_rho = s * u / p.rho;
    let u_theta = -s * u * (0.5 * p.theta).tan();
    Ok(u_rho * p.theta.sin() + u_theta * p.theta.cos() / p.rho)
}

/// Cartesian `U(tau, eta)` in the numerically stable form
/// `((rho + tau)/2)^s`, with the cancellation-free branch on `tau < 0`.
#[inline]
pub fn u_profile(tau: f64, eta: f64, s: f64) -> f64 {
    let rho = tau.hypot(eta);
    let half = if tau >= 0.0 {
        0.5 * (rho + tau)
    } else {
        let d = rho - tau;
        if d > 0.0 { 0.5 * eta * eta / d } else { 0.0 }
    };
    if half <= 0.0 { 0.0 } else { half.powf(s) }
}

/// Analytic `U_tau(tau, eta) = s U / rho` (zero plate excluded).
#[inline]
pub fn u_tau_profile(tau: f64, eta: f64, s: f64) -> f64 {
    let rho = tau.hypot(eta);
    if rho == 0.0 {
        return f64::INFINITY;
    }
    s * u_profile(tau, eta, s) / rho
}

/// Barrier datum: the quadric `S`, the radial modulation `zeta`, an
/// `e_n`-translation `t`, and the class radius `mu`.
///
/// `xi_prime` has the tangential dimension `n - 1` (0 or 1 here) and `m` is
/// the row-major `(n-1) x (n-1)` symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSpec {
    pub m: Vec<f64>,
    pub xi_prime: Vec<f64>,
    pub zeta: f64,
    pub t: f64,
    pub mu: f64,
}

impl BarrierSpec {
    pub fn new(m: &[f64], xi_prime: &[f64], zeta: f64, t: f64, mu: f64) -> Result<Self> {
        let d = xi_prime.len();
        if d > 1 {
            return Err(Error::domain("xi_prime", format!("tangential dimension {d} > 1 unsupported")));
        }
        if m.len() != d * d {
            return Err(Error::domain("m", format!("{} entries for tangential dimension {d}", m.len())));
        }
        if !(mu > 0.0 && mu <= MU0) {
            return Err(Error::domain("mu", format!("{mu} not in (0, {MU0}]")));
        }
        let m_norm = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if m_norm > mu {
            return Err(Error::domain("m", format!("|M| = {m_norm} exceeds mu = {mu}")));
        }
        let xi_norm = xi_prime.iter().map(|v| v * v).sum::<f64>().sqrt();
        if xi_norm > mu {
            return Err(Error::domain("xi_prime", format!("|xi'| = {xi_norm} exceeds mu = {mu}")));
        }
        if zeta.abs() > mu {
            return Err(Error::domain("zeta", format!("|zeta| = {} exceeds mu = {mu}", zeta.abs())));
        }
        if !t.is_finite() {
            return Err(Error::domain("t", "not finite"));
        }
        Ok(BarrierSpec { m: m.to_vec(), xi_prime: xi_prime.to_vec(), zeta, t, mu })
    }

    /// The trivial barrier `V = U(x_n, y)`.
    pub fn trivial(dim_xprime: usize, mu: f64) -> Result<Self> {
        Self::new(&vec![0.0; dim_xprime * dim_xprime], &vec![0.0; dim_xprime], 0.0, 0.0, mu)
    }

    pub fn dim_xprime(&self) -> usize {
        self.xi_prime.len()
    }

    pub fn trace_m(&self) -> f64 {
        let d = self.dim_xprime();
        (0..d).map(|i| self.m[i * d + i]).sum()
    }

    /// Graph height `g(x') = xi' . x' + x'^T M x' / 2`.
    pub fn surface_height(&self, xp: &[f64]) -> f64 {
        let d = self.dim_xprime();
        debug_assert_eq!(xp.len(), d);
        let mut v = 0.0;
        for i in 0..d {
            v += self.xi_prime[i] * xp[i];
            for k in 0..d {
                v += 0.5 * xp[i] * self.m[i * d + k] * xp[k];
            }
        }
        v
    }

    /// Hypothesis value `zeta/(1-a) - tr M` steering sub vs supersolution.
    pub fn condition_value(&self, s: f64) -> f64 {
        self.zeta / (2.0 * s) - self.trace_m()
    }
}

/// Signed distance in the `x` variable from `x` to the quadric `S`, positive
/// on the `x_n > g(x')` side. Newton projection with a bisection fallback;
/// accuracy 1e-12.
pub fn signed_distance(x: &[f64], bs: &BarrierSpec) -> Result<f64> {
    let d = bs.dim_xprime();
    debug_assert_eq!(x.len(), d + 1);
    let xn = x[d];
    if d == 0 {
        return Ok(xn);
    }
    let x1 = x[0];
    let xi = bs.xi_prime[0];
    let m = bs.m[0];
    let g = |p: f64| xi * p + 0.5 * m * p * p;
    let gp = |p: f64| xi + m * p;
    // stationarity of |(p, g(p)) - (x1, xn)|^2
    let phi = |p: f64| (p - x1) + (g(p) - xn) * gp(p);
    let dphi = |p: f64| 1.0 + gp(p) * gp(p) + (g(p) - xn) * m;

    let mut p = x1;
    let mut converged = false;
    for _ in 0..60 {
        let f = phi(p);
        let df = dphi(p);
        if df.abs() < 1e-30 {
            break;
        }
        let step = f / df;
        p -= step;
        if step.abs() <= 1e-13 * (1.0 + p.abs()) {
            converged = true;
            break;
        }
    }
    if !converged || !p.is_finite() {
        // bisection fallback over an expanding bracket
        let mut lo = x1 - 4.0;
        let mut hi = x1 + 4.0;
        let mut flo = phi(lo);
        let mut expand = 0;
        while flo.signum() == phi(hi).signum() && expand < 20 {
            lo -= 4.0;
            hi += 4.0;
            flo = phi(lo);
            expand += 1;
        }
        if phi(lo).signum() == phi(hi).signum() {
            return Err(Error::NonConvergence { iters: 60, residual: phi(p).abs() });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid).signum() == flo.signum() {
                lo = mid;
                flo = phi(mid);
            } else {
                hi = mid;
            }
        }
        p = 0.5 * (lo + hi);
    }
    let dx = p - x1;
    let dy = g(p) - xn;
    let dist = (dx * dx + dy * dy).sqrt();
    // the graph structure makes the vertical test an exact side indicator
    Ok(if xn >= g(x1) { dist } else { -dist })
}

/// Barrier evaluation `V(X) = (1 + zeta rho / 4) U(tau, y)` with
/// `tau = signed distance of (x + t e_n) to S` and `rho = |(tau, y)|`.
pub fn eval_v(x: &[f64], y: f64, bs: &BarrierSpec, s: f64) -> Result<f64> {
    let d = bs.dim_xprime();
    let mut xs = x.to_vec();
    xs[d] += bs.t;
    let tau = signed_distance(&xs, bs)?;
    let rho = tau.hypot(y);
    Ok((1.0 + 0.25 * bs.zeta * rho) * u_profile(tau, y, s))
}

/// The quadratic shift `gamma_V` of the hodograph estimate.
pub fn gamma_v(x: &[f64], y: f64, bs: &BarrierSpec, s: f64) -> f64 {
    let d = bs.dim_xprime();
    let xp = &x[..d];
    let xn = x[d];
    let mut quad = 0.0;
    for i in 0..d {
        quad += bs.xi_prime[i] * xp[i];
        for k in 0..d {
            quad += 0.5 * xp[i] * bs.m[i * d + k] * xp[k];
        }
    }
    -quad + bs.zeta / (4.0 * s) * (xn * xn + y * y)
}

/// Hodograph transform of the barrier: the shift `b` with
/// `V(x - b e_n, y) = U(x_n, y)`, found by monotone bisection in `[-1, 1]`.
pub fn hodograph_of_v(x: &[f64], y: f64, bs: &BarrierSpec, s: f64) -> Result<f64> {
    let d = bs.dim_xprime();
    let target = u_profile(x[d], y, s);
    let w = |b: f64| -> Result<f64> {
        let mut xs = x.to_vec();
        xs[d] -= b;
        eval_v(&xs, y, bs, s)
    };
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    let w_lo = w(lo)?;
    let w_hi = w(hi)?;
    if !(w_lo >= target && w_hi <= target) {
        return Err(Error::Bracket(format!(
            "hodograph shift not bracketed: V(x+e_n)={w_lo:.6e}, V(x-e_n)={w_hi:.6e}, U={target:.6e}"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if w(mid)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fourth-order finite-difference evaluation of `L_a V = Delta V + (a/y) V_y`
/// at a point with `y > 0`.
pub fn eval_la_v_fd(x: &[f64], y: f64, bs: &BarrierSpec, s: f64, h_fd: f64) -> Result<f64> {
    let a = 1.0 - 2.0 * s;
    let f0 = eval_v(x, y, bs, s)?;
    let mut lap = 0.0;
    let dim = x.len();
    for k in 0..dim {
        let mut xs = x.to_vec();
        let mut sample = |d: f64| -> Result<f64> {
            xs[k] = x[k] + d;
            eval_v(&xs, y, bs, s)
        };
        let f2 = sample(2.0 * h_fd)?;
        let f1 = sample(h_fd)?;
        let fm1 = sample(-h_fd)?;
        let fm2 = sample(-2.0 * h_fd)?;
        lap += (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h_fd * h_fd);
    }
    let g2 = eval_v(x, y + 2.0 * h_fd, bs, s)?;
    let g1 = eval_v(x, y + h_fd, bs, s)?;
    let gm1 = eval_v(x, y - h_fd, bs, s)?;
    let gm2 = eval_v(x, y - 2.0 * h_fd, bs, s)?;
    lap += (-g2 + 16.0 * g1 - 30.0 * f0 + 16.0 * gm1 - gm2) / (12.0 * h_fd * h_fd);
    let dy = (-g2 + 8.0 * g1 - 8.0 * gm1 + gm2) / (12.0 * h_fd);
    Ok(lap + a / y * dy)
}

/// Which side of the comparison inequality is being certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierBranch {
    Sub,
    Super,
}

/// Lattice of sample points over `B_2^+`.
#[derive(Debug, Clone, Copy)]
pub struct SampleLattice {
    /// Points per x axis over `(-2, 2)`.
    pub nx: usize,
    /// Points on the y axis over `(0, 2]`.
    pub ny: usize,
}

impl SampleLattice {
    pub fn new(nx: usize, ny: usize) -> Self {
        SampleLattice { nx, ny }
    }
}

/// Margin tolerated on the certified sign to absorb finite-difference noise
/// (the trivial barrier has `L_a V = 0` exactly).
pub const FD_MARGIN_TOL: f64 = 1e-5;

/// One certified sample point.
#[derive(Debug, Clone)]
pub struct CertSample {
    pub x: Vec<f64>,
    pub y: f64,
    pub la_v: f64,
    pub weight: f64,
    pub margin: f64,
}

/// Samples `L_a V / |y|^(1-a)` over `B_2^+(V)` at distance `>= delta_fb`
/// from the barrier free boundary, by fourth-order central differences with
/// step `1e-4 x` the local scale.
///
/// The verdict certifies the sign matching `branch`; the raw min/max margins
/// are reported so callers can apply the hypothesis-side gating.
pub fn certify_comparison(
    bs: &BarrierSpec,
    s: f64,
    sample: SampleLattice,
    delta_fb: f64,
    branch: BarrierBranch,
) -> Result<(AnalysisReport, Vec<CertSample>)> {
    let a = 1.0 - 2.0 * s;
    let d = bs.dim_xprime();
    let dim = d + 1;
    let mut points = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| -2.0 + 4.0 * (i as f64 + 0.5) / sample.nx as f64).collect();
        for l in 1..=sample.ny {
            let y = 2.0 * l as f64 / sample.ny as f64;
            let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() + y * y;
            if r2 > 4.0 {
                continue;
            }
            points.push((x.clone(), y));
        }
        // odometer over the x lattice
        let mut k = 0;
        loop {
            if k == dim {
                break;
            }
            idx[k] += 1;
            if idx[k] < sample.nx {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == dim {
            break;
        }
    }

    let samples: Vec<Option<CertSample>> = points
        .par_iter()
        .map(|(x, y)| {
            let mut xs = x.clone();
            xs[d] += bs.t;
            let tau = signed_distance(&xs, bs).ok()?;
            let rho = tau.hypot(*y);
            if rho < delta_fb {
                return None;
            }
            let h_fd = 1e-4 * y.min(rho);
            if 2.0 * h_fd >= *y || h_fd < 32.0 * f64::EPSILON {
                return None;
            }
            let la_v = eval_la_v_fd(x, *y, bs, s, h_fd).ok()?;
            let weight = y.powf(1.0 - a);
            Some(CertSample { x: x.clone(), y: *y, la_v, weight, margin: la_v / weight })
        })
        .collect();
    let samples: Vec<CertSample> = samples.into_iter().flatten().collect();
    if samples.is_empty() {
        return Err(Error::Degenerate("no admissible certification points".into()));
    }

    let min_margin = samples.iter().fold(f64::INFINITY, |m, c| m.min(c.margin));
    let max_margin = samples.iter().fold(f64::NEG_INFINITY, |m, c| m.max(c.margin));
    let cond = bs.condition_value(s);
    let mut report = AnalysisReport::new();
    report
        .set("condition_value", cond)
        .set("mu_sq", bs.mu * bs.mu)
        .set("min_margin", min_margin)
        .set("max_margin", max_margin)
        .set("n_points", samples.len() as f64);
    match branch {
        BarrierBranch::Sub => {
            report.verdict("subsolution", min_margin >= -FD_MARGIN_TOL, min_margin);
        }
        BarrierBranch::Super => {
            report.verdict("supersolution", max_margin <= FD_MARGIN_TOL, -max_margin);
        }
    }
    Ok((report, samples))
}

/// Fits the two-sided bound of the directional derivative:
/// `c U_tau((x_n - g)/2, y) <= V_{x_n}(x - g e_n, y) <= C U_tau(x_n - g, y)`.
pub fn check_directional_bounds(
    bs: &BarrierSpec,
    s: f64,
    points: &[(Vec<f64>, f64)],
) -> Result<AnalysisReport> {
    let d = bs.dim_xprime();
    let mut c_fit = f64::INFINITY;
    let mut big_c_fit = 0.0_f64;
    let mut used = 0usize;
    for (x, y) in points {
        let g = bs.surface_height(&x[..d]);
        if x[d] <= g {
            continue;
        }
        let mut xs = x.clone();
        xs[d] -= g;
        let arg = xs[d];
        let rho = arg.hypot(*y);
        let h_fd = 1e-5 * rho.min(y.max(1e-3));
        let v_at = |t: f64| -> Result<f64> {
            let mut xt = xs.clone();
            xt[d] += t;
            eval_v(&xt, *y, bs, s)
        };
        let f2 = v_at(2.0 * h_fd)?;
        let f1 = v_at(h_fd)?;
        let fm1 = v_at(-h_fd)?;
        let fm2 = v_at(-2.0 * h_fd)?;
        let vxn = (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h_fd);
        let low = u_tau_profile(0.5 * arg, *y, s);
        let up = u_tau_profile(arg, *y, s);
        if !(low > 0.0) || !(up > 0.0) {
            continue;
        }
        c_fit = c_fit.min(vxn / low);
        big_c_fit = big_c_fit.max(vxn / up);
        used += 1;
    }
    if used == 0 {
        return Err(Error::Degenerate("no points on the x_n > g(x') side".into()));
    }
    let mut report = AnalysisReport::new();
    report.set("c_fit", c_fit).set("big_c_fit", big_c_fit).set("n_points", used as f64);
    report.verdict("lower", c_fit >= 0.1, c_fit - 0.1);
    report.verdict("upper", big_c_fit <= 10.0, 10.0 - big_c_fit);
    Ok(report)
}

/// Maximum of `U_tau(tau1, eta) / U_tau(tau2, eta)` over sampled pairs with
/// `|tau1 - tau2| <= |(tau2, eta)| / 2`.
pub fn dyadic_ratio_bound(s: f64, n_samples: usize, seed: u64) -> f64 {
    let mut rng = crate::minimize::seeded_rng(seed);
    let mut max_ratio = 0.0_f64;
    let mut drawn = 0usize;
    while drawn < n_samples {
        let tau2 = -2.0 + 4.0 * uniform(&mut rng);
        let eta = 2.0 * uniform(&mut rng);
        if eta < 1e-6 {
            continue;
        }
        let rho2 = tau2.hypot(eta);
        let tau1 = tau2 + (2.0 * uniform(&mut rng) - 1.0) * 0.5 * rho2;
        let u1 = u_tau_profile(tau1, eta, s);
        let u2 = u_tau_profile(tau2, eta, s);
        if u2 > 0.0 && u1.is_finite() {
            max_ratio = max_ratio.max(u1 / u2);
            drawn += 1;
        }
    }
    max_ratio
}

pub(crate) fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Rejection-samples an admissible barrier with
/// `branch`-signed `zeta/(1-a) - tr M` of magnitude at least `margin`.
pub fn sample_admissible(
    dim_xprime: usize,
    s: f64,
    mu: f64,
    margin: f64,
    branch: BarrierBranch,
    rng: &mut impl RngCore,
) -> Result<BarrierSpec> {
    for _ in 0..100_000 {
        let m: Vec<f64> = (0..dim_xprime * dim_xprime).map(|_| mu * (2.0 * uniform(rng) - 1.0)).collect();
        let xi: Vec<f64> = (0..dim_xprime).map(|_| mu * (2.0 * uniform(rng) - 1.0)).collect();
        let zeta = mu * (2.0 * uniform(rng) - 1.0);
        let bs = BarrierSpec::new(&m, &xi, zeta, 0.0, mu)?;
        let cond = bs.condition_value(s);
        let ok = match branch {
            BarrierBranch::Sub => cond >= margin,
            BarrierBranch::Super => cond <= -margin,
        };
        if ok {
            return Ok(bs);
        }
    }
    Err(Error::Degenerate(format!(
        "no admissible barrier with margin {margin} at mu={mu}, s={s}"
    )))
}

/// Hodograph transform of a grid field: solves
/// `U(x, y) = f(x - eps * utilde * e_n, y)` nodewise by bisection in the
/// shift, clamped to `[-1, 1]`. Nodes within `4h` of the zero plate or too
/// close to the grid edge for the shift are skipped (left at 0).
pub fn hodograph_of_field(
    f: &ScalarField,
    p: &ProblemParams,
    eps: f64,
) -> Result<(ScalarField, AnalysisReport)> {
    if !(eps > 0.0) {
        return Err(Error::domain("eps", format!("{eps} not > 0")));
    }
    let g = &f.spec;
    let n = g.dim_x;
    let h = g.h;
    let mut out = ScalarField::zeros(g.clone());
    let mut valid = 0usize;
    let mut skipped = 0usize;
    for id in 0..g.num_nodes() {
        let (ix, j) = g.node_coords(id);
        let (x, y) = g.position(&ix, j);
        let xn = x[n - 1];
        let d_plate = if xn <= 0.0 { y } else { xn.hypot(y) };
        if d_plate < 4.0 * h || xn.abs() + eps > g.extent[n - 1] {
            skipped += 1;
            continue;
        }
        let target = u_profile(xn, y, p.s);
        let sample = |b: f64| -> Result<f64> {
            let mut xs = x.clone();
            xs[n - 1] -= eps * b;
            f.interpolate(&xs, y)
        };
        let slack = 1e-12 * (1.0 + target.abs());
        let g_lo = sample(-1.0)?;
        let g_hi = sample(1.0)?;
        if g_lo < target - slack || g_hi > target + slack {
            return Err(Error::FlatnessViolation(format!(
                "node at x_n={xn}, y={y}: f(x+eps)={g_lo:.6e}, f(x-eps)={g_hi:.6e}, U={target:.6e}"
            )));
        }
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        for _ in 0..55 {
            let mid = 0.5 * (lo + hi);
            if sample(mid)? >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.values[id] = (0.5 * (lo + hi)).clamp(-1.0, 1.0);
        valid += 1;
    }
    let mut report = AnalysisReport::new();
    report.set("n_valid", valid as f64).set("n_skipped", skipped as f64);
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn u_examples() {
        assert!((eval_u(PolarPoint::new(1.0, 0.0).unwrap(), 0.3) - 1.0).abs() < 1e-15);
        // cos(pi/2) is ~6e-17 in floating point
        assert!(eval_u(PolarPoint::new(1.0, PI).unwrap(), 0.5).abs() < 1e-15);
        let v = eval_u(PolarPoint::new(4.0, 0.0).unwrap(), 0.5);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn u_tau_paper_values() {
        // U_tau / U = s / rho
        let s = 0.5;
        let ut = eval_u_tau(PolarPoint::new(1.0, 0.0).unwrap(), s).unwrap();
        assert!((ut - s).abs() < 1e-14);
        let ut2 = eval_u_tau(PolarPoint::new(2.0, 0.0).unwrap(), s).unwrap();
        assert!((ut2 - 0.25 * 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn homogeneity_exact() {
        let s = 0.37;
        for k in 1..40 {
            let theta = -PI + 2.0 * PI * k as f64 / 40.0;
            let u1 = eval_u(PolarPoint::new(0.7, theta).unwrap(), s);
            let u2 = eval_u(PolarPoint::new(1.4, theta).unwrap(), s);
            if u1 > 0.0 {
                assert!((u2 / u1 - 2.0_f64.powf(s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chain_rule_matches_identity() {
        let mut rng = crate::minimize::seeded_rng(7);
        for &s in &[0.25, 0.5, 0.75] {
            for _ in 0..2000 {
                let rho = 0.05 + 2.0 * uniform(&mut rng);
                let theta = (2.0 * uniform(&mut rng) - 1.0) * (PI - 0.05);
                let p = PolarPoint::new(rho, theta).unwrap();
                let u = eval_u(p, s);
                let ut = eval_u_tau(p, s).unwrap();
                assert!((ut / u - s / rho).abs() <= 1e-8, "s={s} rho={rho} theta={theta}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = 0.6;
        let pts = [(0.8, 0.4), (1.2, -0.9), (0.3, 1.1), (-0.5, 0.8)];
        for &(tau, eta) in &pts {
            let p = PolarPoint::from_cartesian(tau, eta);
            let ut = eval_u_tau(p, s).unwrap();
            let ue = eval_u_eta(p, s).unwrap();
            let d = 1e-6;
            let fd_t = (u_profile(tau + d, eta, s) - u_profile(tau - d, eta, s)) / (2.0 * d);
            let fd_e = (u_profile(tau, eta + d, s) - u_profile(tau, eta - d, s)) / (2.0 * d);
            assert!((ut - fd_t).abs() / ut.abs().max(1.0) < 1e-6);
            assert!((ue - fd_e).abs() / ue.abs().max(1.0) < 1e-6);
        }
    }

    #[test]
    fn stable_profile_matches_polar_form() {
        let s = 0.4;
        for &(tau, eta) in &[(0.5, 0.5), (-0.5, 0.25), (1.5, 0.0), (-1.0, 1e-4)] {
            let p = PolarPoint::from_cartesian(tau, eta);
            assert!((u_profile(tau, eta, s) - eval_u(p, s)).abs() < 1e-13);
        }
    }

    #[test]
    fn signed_distance_hyperplane_cases() {
        let bs = BarrierSpec::trivial(1, 0.05).unwrap();
        assert_eq!(signed_distance(&[0.3, 0.7], &bs).unwrap(), 0.7);
        let mu = 0.05;
        let tilted = BarrierSpec::new(&[0.0], &[mu], 0.0, 0.0, mu).unwrap();
        let x = [0.4, -0.3];
        let want = (x[1] - mu * x[0]) / (1.0 + mu * mu).sqrt();
        assert!((signed_distance(&x, &tilted).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn signed_distance_is_eikonal() {
        let bs = BarrierSpec::new(&[0.08], &[-0.05], 0.02, 0.0, 0.1).unwrap();
        for &(x1, xn) in &[(0.5, 0.7), (-0.8, -0.4), (1.2, 0.1)] {
            let d = 1e-6;
            let gx = (signed_distance(&[x1 + d, xn], &bs).unwrap()
                - signed_distance(&[x1 - d, xn], &bs).unwrap())
                / (2.0 * d);
            let gn = (signed_distance(&[x1, xn + d], &bs).unwrap()
                - signed_distance(&[x1, xn - d], &bs).unwrap())
                / (2.0 * d);
            assert!((gx * gx + gn * gn - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn eval_v_trivial_is_u() {
        let bs = BarrierSpec::trivial(1, 0.05).unwrap();
        let s = 0.65;
        for &(x1, xn, y) in &[(0.2, 0.5, 0.3), (-0.4, -0.2, 0.6), (0.0, 1.0, 0.0)] {
            let v = eval_v(&[x1, xn], y, &bs, s).unwrap();
            assert!((v - u_profile(xn, y, s)).abs() < 1e-13);
        }
    }

    #[test]
    fn eval_v_vanishes_on_plate_and_scales_with_zeta() {
        let mu = 0.1;
        let bs = BarrierSpec::new(&[0.0], &[0.0], mu, 0.0, mu).unwrap();
        let s = 0.5;
        assert_eq!(eval_v(&[0.3, -0.5], 0.0, &bs, s).unwrap(), 0.0);
        let v = eval_v(&[0.0, 0.8], 0.4, &bs, s).unwrap();
        let u = u_profile(0.8, 0.4, s);
        let rho = 0.8_f64.hypot(0.4);
        assert!((v / u - (1.0 + mu * rho / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn class_admission_enforced() {
        assert!(BarrierSpec::new(&[0.2], &[0.0], 0.0, 0.0, 0.1).is_err());
        assert!(BarrierSpec::new(&[0.0], &[0.2], 0.0, 0.0, 0.1).is_err());
        assert!(BarrierSpec::new(&[0.0], &[0.0], 0.2, 0.0, 0.1).is_err());
        assert!(BarrierSpec::new(&[0.0], &[0.0], 0.0, 0.0, 0.3).is_err());
        assert!(BarrierSpec::new(&[0.05], &[0.02], -0.04, 0.1, 0.1).is_ok());
    }

    #[test]
    fn hodograph_of_v_translation() {
        let s = 0.5;
        let trivial = BarrierSpec::trivial(1, 0.05).unwrap();
        let vt = hodograph_of_v(&[0.2, 0.4], 0.3, &trivial, s).unwrap();
        assert!(vt.abs() < 1e-10);
        let shifted = BarrierSpec::new(&[0.0], &[0.0], 0.0, 0.23, 0.05).unwrap();
        let b = hodograph_of_v(&[0.1, 0.3], 0.5, &shifted, s).unwrap();
        assert!((b - 0.23).abs() < 1e-10);
    }
}
