use thinfrac::grid::{GridSpec, Region};
use thinfrac::field::ScalarField;
use thinfrac::params::ProblemParams;
use thinfrac::minimize::{minimize_energy, ContinuationSchedule, MinimizeOptions};

fn main() {
    let s = 0.5;
    let p = ProblemParams::one_phase(s).unwrap().with_lambda_plus(1.3);
    let g = GridSpec::new(1, 0.0625, &[1.0, 1.0]).unwrap();
    let f = ScalarField::from_fn(g, |_, _| 1.0);
    let region = Region::ball(&[0.0], 0.875);
    let sched = ContinuationSchedule::default_for(0.0625, s);
    let run = minimize_energy(&f, &p, &region, &sched, MinimizeOptions::default()).unwrap();
    println!("converged = {}", run.converged);
    for (k, v) in &run.report.metrics {
        println!("{k} = {v}");
    }
}
