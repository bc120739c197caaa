//! Times hull construction on boundary samples of the unit sphere.
//!
//! Usage: hull_timing [d] [n] [reps]

use std::time::Instant;

use randpoly::body::ConvexBodyModel;
use randpoly::hull::{f_vector, f_vector_of_points, incremental_hull};
use randpoly::rng::Stream;

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let d = args.first().copied().unwrap_or(4);
    let n = args.get(1).copied().unwrap_or(2000);
    let reps = args.get(2).copied().unwrap_or(20);
    let body = ConvexBodyModel::unit_ball(d);

    let start = Instant::now();
    let mut facets = 0;
    for r in 0..reps {
        let flat = body.sample_flat(&mut Stream::new(r as u64), n);
        facets += f_vector_of_points(&flat, d).expect("general position")[d - 1];
    }
    let lean = start.elapsed().as_secs_f64() * 1e3 / reps as f64;

    let start = Instant::now();
    for r in 0..reps {
        let pts = body.sample_points(&mut Stream::new(r as u64), n);
        let h = incremental_hull(&pts, d).expect("general position");
        std::hint::black_box(f_vector(&h));
    }
    let full = start.elapsed().as_secs_f64() * 1e3 / reps as f64;

    println!(
        "d={d} n={n} reps={reps}: {lean:.2} ms (f-vector only), {full:.2} ms (full complex), mean f_{} = {:.1}",
        d - 1,
        facets as f64 / reps as f64
    );
}
