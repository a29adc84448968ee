use thinfrac::energy::{energy, rescale};
use thinfrac::grid::{GridSpec, Region};
use thinfrac::operator::{solve_dirichlet, solve_linearized};
use thinfrac::params::ProblemParams;
use thinfrac::profiles;
use thinfrac::field::ScalarField;
use thinfrac::barriers::u_profile;

fn main() {
    // (1) solve_dirichlet on U over a box avoiding P (thin segment tau > 0)
    for &s in &[0.25, 0.5, 0.75] {
        let p = ProblemParams::one_phase(s).unwrap();
        let mut errs = Vec::new();
        for lvl in 0..3 {
            let h = 1.0 / (32.0 * f64::powi(2.0, lvl));
            let g = GridSpec::new(1, h, &[1.0, 1.0]).unwrap();
            let f = profiles::sample_u(g.clone(), s);
            let region = Region::solid_box(&[0.1, 0.0], &[0.9, 0.8]);
            let (sol, stats) = solve_dirichlet(&f, &p, &region, 1e-12).unwrap();
            let mut err = 0.0_f64;
            for id in 0..g.num_nodes() {
                err = err.max((sol.values[id] - f.values[id]).abs());
            }
            errs.push(err);
            if lvl == 2 { println!("s={s} U-box: errs={errs:?} iters={}", stats.iterations); }
        }
        println!("  orders: {:?}", errs.windows(2).map(|w| (w[0]/w[1]).log2()).collect::<Vec<_>>());
    }
    // (2) y^{2s} with thin row as Dirichlet data (box floor at y=h)
    for &s in &[0.25, 0.5, 0.75] {
        let p = ProblemParams::one_phase(s).unwrap();
        let mut errs = Vec::new();
        for lvl in 0..3 {
            let h = 1.0 / (32.0 * f64::powi(2.0, lvl));
            let g = GridSpec::new(1, h, &[1.0, 1.0]).unwrap();
            let f = profiles::sample_y2s(g.clone(), s);
            let region = Region::solid_box(&[-0.5, h], &[0.5, 0.9]);
            let (sol, _) = solve_dirichlet(&f, &p, &region, 1e-12).unwrap();
            let mut err = 0.0_f64;
            for id in 0..g.num_nodes() {
                err = err.max((sol.values[id] - f.values[id]).abs());
            }
            errs.push(err);
        }
        let orders: Vec<f64> = errs.windows(2).map(|w| (w[0]/w[1]).log2()).collect();
        println!("s={s} y2s: errs={errs:?} orders={orders:?} (expect ~{})", (2.0_f64).min(2.0*s+1.0));
    }
    // (3) energy dirichlet on B_1 vs closed form 2^{2-2s} s^2 pi / sin(pi s)
    for &s in &[0.25, 0.5, 0.75] {
        let p = ProblemParams::one_phase(s).unwrap();
        let exact = f64::powf(2.0, 2.0 - 2.0*s) * s * s * std::f64::consts::PI / (std::f64::consts::PI * s).sin();
        let mut vals = Vec::new();
        for lvl in 0..3 {
            let h = 1.0 / (64.0 * f64::powi(2.0, lvl));
            let g = GridSpec::new(1, h, &[1.0, 1.0]).unwrap();
            let f = profiles::sample_u(g.clone(), s);
            let e = energy(&f, &p, &Region::ball(&[0.0], 1.0), None);
            vals.push(e.dirichlet);
        }
        println!("s={s} J_dir: {vals:?} exact={exact:.8} rel_errs={:?}",
                 vals.iter().map(|v| (v/exact - 1.0)).collect::<Vec<_>>());
    }
    // (4) linearized: tangential linear in n=2
    let s = 0.5;
    let p = ProblemParams::one_phase(s).unwrap();
    for lvl in 0..2 {
        let h = 1.0 / (16.0 * f64::powi(2.0, lvl));
        let g = GridSpec::new(2, h, &[0.5, 0.5, 0.5]).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x, _| x[0]);
        let region = Region::ball(&[0.0, 0.0], 0.5);
        let (sol, stats) = solve_linearized(&f, &p, &region, 1e-11).unwrap();
        let mut err = 0.0_f64;
        for id in 0..g.num_nodes() {
            err = err.max((sol.values[id] - f.values[id]).abs());
        }
        println!("linearized x1 h={h}: err={err:.3e} iters={}", stats.iterations);
    }
    // (5) rescale energy identity J(u, B_r) = r^n J(u_r, B_1) on smooth f
    let s = 0.6;
    let p = ProblemParams::one_phase(s).unwrap();
    let h = 1.0 / 64.0;
    let g = GridSpec::new(1, h, &[1.0, 1.0]).unwrap();
    let f = ScalarField::from_fn(g.clone(), |x, y| (x[0]).sin() * (1.0 + y).powi(2) + 0.3);
    let r = 0.5;
    let ju = energy(&f, &p, &Region::ball(&[0.0], r), None);
    let target = GridSpec::new(1, h, &[1.0, 1.0]).unwrap();
    let ur = rescale(&f, &p, &[0.0], r, target).unwrap();
    let jur = energy(&ur, &p, &Region::ball(&[0.0], 1.0), None);
    println!("J(u,B_r)={:.8} r^n J(u_r,B_1)={:.8} relerr={:.3e}",
             ju.total, r * jur.total, (ju.total/(r*jur.total) - 1.0).abs());
    // (6) U on ball with thin: dirichlet principle sanity
    let (sol, _) = solve_dirichlet(&profiles::sample_u(g.clone(), s), &p, &Region::ball(&[0.0], 0.75), 1e-12).unwrap();
    let d_sol = energy(&sol, &p, &Region::ball(&[0.0], 0.75), None).dirichlet;
    let d_u = energy(&profiles::sample_u(g.clone(), s), &p, &Region::ball(&[0.0], 0.75), None).dirichlet;
    println!("dirichlet principle: solve={d_sol:.8} <= U={d_u:.8}: {}", d_sol <= d_u + 1e-12);
    let _ = u_profile(1.0, 0.0, 0.5);
}
