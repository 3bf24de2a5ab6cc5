// Labeled products of unbound and bound wavefunctions: idealized overlaps and
// exact cluster matrix elements.

use composite_bosons::formal::{formal_inner_product, labeled_matrix_element, FormalFactor, FormalProduct, Operator};
use composite_bosons::mode_space::BoundPolicy;
use composite_bosons::models::build_ring_model;

pub fn main() {
    let modes = build_ring_model(2, 1.0, -4.0).unwrap();
    let spectrum = modes.solve_bound_states(BoundPolicy::default()).unwrap();

    let atoms = FormalProduct::new(1.0, vec![FormalFactor::atom(0, 1), FormalFactor::atom(1, 2)]).unwrap();
    let pair = FormalProduct::new(1.0, vec![FormalFactor::pair(0, 1, 2)]).unwrap();
    println!("{atoms} . {pair} = {}", formal_inner_product(&atoms, &pair).unwrap());
    println!("{pair} . {pair} = {}", formal_inner_product(&pair, &pair).unwrap());

    let h = Operator::cluster_hamiltonian(&[1, 2]);
    let e = labeled_matrix_element(&pair, &h, &pair, &modes, &spectrum).unwrap();
    println!("<{pair}|H(1,2)|{pair}> = {e:.9} (eps0 = {:.9})", spectrum.energy(0));
    let same = FormalProduct::new(1.0, vec![FormalFactor::atom(0, 1), FormalFactor::atom(0, 2)]).unwrap();
    let x = labeled_matrix_element(&pair, &h, &same, &modes, &spectrum).unwrap();
    println!(
        "<{pair}|H(1,2)|{same}> = {x:.9} = eps0 * c[0][0] = {:.9}",
        spectrum.energy(0) * spectrum.coefficient(0, 0, 0)
    );
}
