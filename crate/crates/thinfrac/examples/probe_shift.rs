use thinfrac::energy::{calibrate_lambda_plus, energy};
use thinfrac::grid::{classify, GridSpec, Region};
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
    let mask = classify(&g, &region);
    // pins {x <= -5h}, then shifted versions k = 0..3
    for k in 0..4i64 {
        let pins: Vec<usize> = mask.interior_ids.iter().copied().filter(|&id| {
            let (ix, j) = g.node_coords(id);
            let (x, _) = g.position(&ix, j);
            j == 0 && x[0] <= (-5 + k) as f64 * h + 1e-12
        }).collect();
        let (sol, _) = solve_dirichlet_pinned(&f, &p, &region, &pins, 1e-12).unwrap();
        let e = energy(&sol, &p, &region, None);
        println!("clamp <= {}h ({} pins): J = {:.10}", -5 + k, pins.len(), e.total);
    }
}
