use shipgen_core::designspace::{sample_uniform, is_feasible};
use shipgen_core::geometry::HullSurface;
use shipgen_core::hydro::{michell_resistance_with, MichellSettings};

fn main() {
    let hulls: Vec<_> = sample_uniform(777, 800).into_iter().filter(is_feasible).take(20).collect();
    let v = &hulls[0];
    println!("hull 0: {:?}", &v.0[..]);
    let s = HullSurface::feasible(v).unwrap();
    let (d, f) = (0.67, 0.10);
    for (nx, nz, nt) in [(256usize,64usize,512usize),(512,64,512),(256,128,512),(256,64,1024),(512,128,1024),(1024,256,2048),(2048,512,2048),(4096,512,2048)] {
        let set = MichellSettings { x_panels: nx, z_panels: nz, theta_nodes: nt, envelope_cut: 1e-8 };
        let r = michell_resistance_with(&s, d, f, &set).unwrap();
        println!("  {nx}x{nz}x{nt}: {r:.8e}");
    }
}
