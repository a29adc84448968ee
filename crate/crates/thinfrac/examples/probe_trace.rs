use thinfrac::energy::{calibrate_lambda_plus, energy};
use thinfrac::grid::{GridSpec, Region};
use thinfrac::minimize::{minimize_energy, ContinuationSchedule, MinimizeOptions};
use thinfrac::operator::solve_dirichlet_pinned;
use thinfrac::params::ProblemParams;
use thinfrac::profiles;

fn main() {
    let s = 0.5;
    let h = 1.0 / 128.0;
    let g = GridSpec::new(1, h, &[1.0, 1.0]).unwrap();
    let region = Region::ball(&[0.0], 1.0);
    let lam = calibrate_lambda_plus(s, &g, &region).unwrap();
    let p = ProblemParams::one_phase(s).unwrap().with_lambda_plus(lam);
    let f = profiles::sample_u(g.clone(), s);

    // sharp J of pattern solves: clamp {x <= c} for c near 0
    let mask = thinfrac::grid::classify(&g, &region);
    for shift in [-8i64, -4, -2, -1, 0, 1, 2, 4, 8] {
        let pins: Vec<usize> = mask.interior_ids.iter().copied().filter(|&id| {
            let (ix, j) = g.node_coords(id);
            let (x, _) = g.position(&ix, j);
            j == 0 && x[0] <= shift as f64 * h + 1e-12
        }).collect();
        let (sol, _) = solve_dirichlet_pinned(&f, &p, &region, &pins, 1e-12).unwrap();
        let e = energy(&sol, &p, &region, None);
        println!("clamp x <= {:+}h: J = {:.10}  (D = {:.8}, P+ = {:.8})", shift, e.total, e.dirichlet, e.phase_plus);
    }

    let sched = ContinuationSchedule::default_for(h, s);
    let run = minimize_energy(&f, &p, &region, &sched, MinimizeOptions::default()).unwrap();
    let e = energy(&run.field, &p, &region, None);
    println!("minimize:     J = {:.10}  polish_theta = {:?}", e.total, run.report.get("polish_threshold"));
    print!("trace around origin: ");
    for i in -12i64..=12 {
        let ix = (g.nodes_per_axis[0] as i64 / 2 + i) as usize;
        print!("{:.4} ", run.field.trace(&[ix]));
    }
    println!();
    print!("exact U trace:       ");
    for i in -12i64..=12 {
        let ix = (g.nodes_per_axis[0] as i64 / 2 + i) as usize;
        print!("{:.4} ", f.trace(&[ix]));
    }
    println!();
}
