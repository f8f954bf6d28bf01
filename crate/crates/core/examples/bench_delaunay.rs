use fppdt::geometry::{build_delaunay, build_voronoi_dual, sample_poisson, Window};
use std::time::Instant;

fn main() {
    for side in [100.0, 320.0, 1100.0] {
        let w = Window::square_default(side).unwrap();
        let t0 = Instant::now();
        let ps = sample_poisson(&w, 1.0, 1).unwrap();
        let t1 = Instant::now();
        let g = build_delaunay(&ps).unwrap();
        let t2 = Instant::now();
        let d = build_voronoi_dual(&g, &w);
        let t3 = Instant::now();
        println!(
            "n={} sample {:?} delaunay {:?} dual {:?} tris {}",
            ps.len(),
            t1 - t0,
            t2 - t1,
            t3 - t2,
            d.vertices().len()
        );
    }
}
