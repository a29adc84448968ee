use thinfrac::energy::{calibrate_lambda_plus, energy};
use thinfrac::grid::{GridSpec, Region};
use thinfrac::minimize::{minimize_energy, ContinuationSchedule, MinimizeOptions};
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
    let sched = ContinuationSchedule::default_for(h, s);
    let run = minimize_energy(&f, &p, &region, &sched, MinimizeOptions::default()).unwrap();
    let e = energy(&run.field, &p, &region, None);
    println!("J = {:.10}  theta = {:?} shift = {:?}", e.total,
             run.report.get("polish_threshold"), run.report.get("polish_shift"));
    print!("trace: ");
    for i in -10i64..=10 {
        let ix = (g.nodes_per_axis[0] as i64 / 2 + i) as usize;
        print!("{:.4} ", run.field.trace(&[ix]));
    }
    println!();
    // where does the trace cross zero?
    let tol = 1e-12 * run.field.max_abs();
    let fb = thinfrac::fb::extract_fb(&run.field, tol);
    println!("F+ = {:?}", fb.plus_points);
}
