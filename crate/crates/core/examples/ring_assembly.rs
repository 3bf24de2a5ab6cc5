// Assembles the idealized Hamiltonian of a six-site ring sector by sector and
// prints term norms and the lowest eigenvalues.

use composite_bosons::cli::lowest_eigenpairs;
use composite_bosons::fock::enumerate_sector;
use composite_bosons::hamiltonian::TermBuilder;
use composite_bosons::mode_space::BoundPolicy;
use composite_bosons::models::build_ring_model;

pub fn main() {
    let modes = build_ring_model(6, 1.0, -8.0).unwrap();
    let spectrum = modes.solve_bound_states(BoundPolicy::default()).unwrap();
    println!("modes {:?}", modes.basis().labels());
    println!(
        "composites {:?} below edge {}",
        spectrum.energies(),
        spectrum.continuum_edge()
    );
    let mut builder = TermBuilder::new(&modes, &spectrum).unwrap();
    for n in 0..=3 {
        let basis = enumerate_sector(n, modes.mode_count(), spectrum.len()).unwrap();
        let h = builder.assemble(&basis).unwrap();
        let norms: Vec<String> = h
            .blocks()
            .iter()
            .map(|(t, m)| format!("{t}={:.3}", m.frobenius_norm()))
            .collect();
        let low = lowest_eigenpairs(&h, 3).unwrap().values;
        println!(
            "N={n} dim={} nnz={} [{}] lowest {:?}",
            basis.len(),
            h.total().nnz(),
            norms.join(" "),
            low
        );
    }
}
