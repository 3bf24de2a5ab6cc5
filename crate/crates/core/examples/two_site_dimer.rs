// Bound pair on two sites: compares the composite energy with the closed form
// (U - sqrt(U^2 + 16 t^2)) / 2 for a range of attractions.

use composite_bosons::mode_space::BoundPolicy;
use composite_bosons::models::build_ring_model;

pub fn main() {
    let t = 1.0;
    println!("{:>8} {:>14} {:>14} {:>10}", "U", "eps0", "closed form", "bound");
    for u in [-0.5, -1.0, -4.0, -10.0, -40.0] {
        let modes = build_ring_model(2, t, u).expect("two-site model");
        let spectrum = modes.solve_bound_states(BoundPolicy::default()).expect("pair spectrum");
        let closed = (u - (u * u + 16.0 * t * t).sqrt()) / 2.0;
        println!(
            "{u:>8.1} {:>14.9} {closed:>14.9} {:>10}",
            spectrum.energy(0),
            spectrum.len()
        );
        assert!((spectrum.energy(0) - closed).abs() < 1e-9);
    }
    let spectrum = build_ring_model(2, t, -4.0)
        .unwrap()
        .solve_bound_states(BoundPolicy::default())
        .unwrap();
    println!("edge {}, ground pair amplitudes c[p][q]:", spectrum.continuum_edge());
    for p in 0..2 {
        println!(
            "  {:+.6} {:+.6}",
            spectrum.coefficient(0, p, 0),
            spectrum.coefficient(0, p, 1)
        );
    }
}
