use composite_bosons::cli::to_json_string;
use composite_bosons::fock::{enumerate_sector, sector_size, Ladder, Mode, OccupationState};
use composite_bosons::hamiltonian::{TermBuilder, TermId};
use composite_bosons::mode_space::{BoundPolicy, ModeBasis, ModeSpace};
use composite_bosons::models::{build_ring_model, random_model};
use composite_bosons::numerics::{dense_symmetric_eigen, sparse_lowest_eigen, DenseMatrix, SparseMatrix};
use composite_bosons::oracle::{expand_basis_state, verify_sectors};
use proptest::prelude::*;

fn orthogonal(dim: usize, seed: u64) -> DenseMatrix {
    let sym = random_model(dim, seed).unwrap().one_body().matrix().clone();
    dense_symmetric_eigen(&sym).unwrap().vectors
}

fn sector_energies(modes: &ModeSpace, policy: BoundPolicy, n: usize) -> Vec<f64> {
    let spectrum = modes.solve_bound_states(policy).unwrap();
    let basis = enumerate_sector(n, modes.mode_count(), spectrum.len()).unwrap();
    let h = TermBuilder::new(modes, &spectrum).unwrap().assemble(&basis).unwrap();
    dense_symmetric_eigen(&h.total().to_dense()).unwrap().values
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_agrees_on_random_models(seed in any::<u64>(), modes in 1usize..=3, k in 0usize..=2) {
        let ms = random_model(modes, seed).unwrap();
        let k = k.min(modes * (modes + 1) / 2);
        let spec = ms.solve_bound_states(BoundPolicy::LowestK(k)).unwrap();
        let report = verify_sectors(&ms, &spec, 3).unwrap();
        prop_assert!(report.summary.max_abs_diff <= 1e-10, "{}", report.summary.max_abs_diff);
    }

    #[test]
    fn assembled_sectors_are_symmetric(seed in any::<u64>(), n in 0usize..=4) {
        let ms = random_model(3, seed).unwrap();
        let spec = ms.solve_bound_states(BoundPolicy::LowestK(2)).unwrap();
        let basis = enumerate_sector(n, 3, 2).unwrap();
        let h = TermBuilder::new(&ms, &spec).unwrap().assemble(&basis).unwrap();
        prop_assert!(h.hermiticity().max_asymmetry <= 1e-12);
        let diff = h.block(TermId::CSS).sub(&h.block(TermId::SSC).transpose()).max_abs();
        prop_assert!(diff <= 1e-12);
    }

    #[test]
    fn spectra_do_not_depend_on_the_mode_basis(seed in any::<u64>(), rot in any::<u64>(), n in 1usize..=3) {
        let ms = random_model(3, seed).unwrap();
        let u = orthogonal(3, rot);
        let rotated = ModeSpace::new(
            ModeBasis::indexed(3).unwrap(),
            ms.one_body().transform(&u).unwrap(),
            ms.two_body().transform(&u).unwrap(),
        ).unwrap();
        let policy = BoundPolicy::LowestK(2);
        let a = ms.solve_bound_states(policy).unwrap();
        let b = rotated.solve_bound_states(policy).unwrap();
        for (x, y) in a.energies().iter().zip(b.energies()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        let ea = sector_energies(&ms, policy, n);
        let eb = sector_energies(&rotated, policy, n);
        for (x, y) in ea.iter().zip(&eb) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn expanded_states_are_orthonormal(a in prop::collection::vec(0u8..3, 2), m in prop::collection::vec(0u8..2, 2),
                                        b in prop::collection::vec(0u8..3, 2), n in prop::collection::vec(0u8..2, 2)) {
        let s = OccupationState::new(a, m).unwrap();
        let t = OccupationState::new(b, n).unwrap();
        prop_assume!(s.constituent_number() <= 6 && t.constituent_number() <= 6);
        let overlap = expand_basis_state(&s).unwrap().inner(&expand_basis_state(&t).unwrap());
        let expected = if s == t { 1.0 } else { 0.0 };
        prop_assert!((overlap - expected).abs() < 1e-12);
    }

    #[test]
    fn number_operator_counts(atoms in prop::collection::vec(0u8..6, 1..4), mols in prop::collection::vec(0u8..6, 0..3)) {
        let s = OccupationState::new(atoms, mols).unwrap();
        for k in 0..s.mode_count() {
            let n = s.atoms()[k] as f64;
            let mode = Mode::Atom(k);
            match s.apply_string(&[(mode, Ladder::Create), (mode, Ladder::Annihilate)]) {
                Some((c, t)) => { prop_assert_eq!(&t, &s); prop_assert!((c - n).abs() < 1e-12); }
                None => prop_assert_eq!(n, 0.0),
            }
        }
    }

    #[test]
    fn sector_enumeration_matches_count(n in 0usize..=6, modes in 1usize..=4, comps in 0usize..=3) {
        let basis = enumerate_sector(n, modes, comps).unwrap();
        prop_assert_eq!(basis.len() as u128, sector_size(n, modes, comps));
        prop_assert!(basis.states().iter().all(|s| s.constituent_number() == n));
    }

    #[test]
    fn ring_basis_is_diagonal(sites in 2usize..=10, t in 0.1f64..3.0, u in -10.0f64..0.0) {
        let ms = build_ring_model(sites, t, u).unwrap();
        let o = ms.one_body();
        let mut trace = 0.0;
        for i in 0..sites {
            trace += o.get(i, i);
            for j in 0..sites {
                if i != j {
                    prop_assert!(o.get(i, j).abs() < 1e-12);
                }
            }
        }
        prop_assert!(trace.abs() < 1e-12);
        let t4 = ms.two_body();
        for m in 0..sites { for n in 0..sites { for p in 0..sites { for q in 0..sites {
            let v = t4.get(m, n, p, q);
            prop_assert!((v - t4.get(n, m, q, p)).abs() < 1e-12);
            prop_assert!((v - t4.get(p, q, m, n)).abs() < 1e-12);
        }}}}
    }

    #[test]
    fn lanczos_matches_dense(seed in any::<u64>(), dim in 2usize..40) {
        let d = random_model(dim, seed).unwrap().one_body().matrix().clone();
        let dense = dense_symmetric_eigen(&d).unwrap().values;
        let k = dim.min(3);
        let sparse = sparse_lowest_eigen(&SparseMatrix::from_dense(&d).unwrap(), k).unwrap();
        for (x, y) in dense.iter().zip(&sparse) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn json_floats_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let text = to_json_string(&x);
        let back: f64 = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }
}
