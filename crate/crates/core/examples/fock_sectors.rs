// Occupation-number bases: sector sizes, normalization constants and ladder
// actions on mixed atom/molecule states.

use composite_bosons::fock::{enumerate_sector, sector_size, Ladder, Mode, OccupationState};

pub fn main() {
    for n in 0..=4 {
        let basis = enumerate_sector(n, 2, 1).expect("sector");
        println!("N={n}: {} states (closed form {})", basis.len(), sector_size(n, 2, 1));
        for s in basis.states() {
            println!("  {s}  L = {:.6}", s.normalization_constant());
        }
    }
    let s = OccupationState::new(vec![2, 1], vec![1]).unwrap();
    let (c, t) = s.apply_ladder(Mode::Atom(0), Ladder::Annihilate);
    println!("a_0 {s} = {c:.6} {}", t.unwrap());
    let hop = [
        (Mode::Molecule(0), Ladder::Create),
        (Mode::Atom(0), Ladder::Annihilate),
        (Mode::Atom(1), Ladder::Annihilate),
    ];
    let (c, t) = s.apply_string(&hop).unwrap();
    println!("C+ a_0 a_1 {s} = {c:.6} {t}");
}
