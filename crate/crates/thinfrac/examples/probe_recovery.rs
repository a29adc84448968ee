use std::time::Instant;
use thinfrac::energy::calibrate_lambda_plus;
use thinfrac::fb::growth_exponent;
use thinfrac::grid::{GridSpec, Region};
use thinfrac::minimize::{minimize_energy, ContinuationSchedule, MinimizeOptions};
use thinfrac::params::ProblemParams;
use thinfrac::profiles;

fn main() {
    for &s in &[0.5_f64, 0.75] {
        let t0 = Instant::now();
        let h = 1.0 / 128.0;
        let g = GridSpec::new(1, h, &[1.0, 1.0]).unwrap();
        let region = Region::ball(&[0.0], 1.0);
        let lam = calibrate_lambda_plus(s, &g, &region).unwrap();
        println!("s={s}: lambda_plus = {lam}  ({:?})", t0.elapsed());
        let p = ProblemParams::one_phase(s).unwrap().with_lambda_plus(lam);
        let f = profiles::sample_u(g.clone(), s);
        let sched = ContinuationSchedule::default_for(h, s);
        let t1 = Instant::now();
        let run = minimize_energy(&f, &p, &region, &sched, MinimizeOptions::default()).unwrap();
        println!("  minimize: converged={} iters={} ({:?})", run.converged,
                 run.report.get("iterations").unwrap(), t1.elapsed());
        // sup-norm error against U on B_{1/2}
        let mut err = 0.0_f64;
        for id in 0..g.num_nodes() {
            let (ix, j) = g.node_coords(id);
            let (x, y) = g.position(&ix, j);
            if x[0].hypot(y) <= 0.5 {
                err = err.max((run.field.values[id] - f.values[id]).abs());
            }
        }
        println!("  |u - U|_inf on B_1/2 = {err}");
        let radii: Vec<f64> = (1..=5).map(|k| 0.5_f64.powi(k)).collect();
        match growth_exponent(&run.field, &[0.0], &radii) {
            Ok((slope, c, resid)) => println!("  growth slope = {slope} (c={c}, resid={resid})"),
            Err(e) => println!("  growth error: {e}"),
        }
        println!("  total {:?}", t0.elapsed());
    }
}
