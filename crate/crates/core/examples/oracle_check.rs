// Compares every second-quantized matrix element with the permutation oracle
// on a random three-mode model.

use composite_bosons::mode_space::BoundPolicy;
use composite_bosons::models::random_model;
use composite_bosons::oracle::verify_sectors;

pub fn main() {
    let modes = random_model(3, 42).unwrap();
    let spectrum = modes.solve_bound_states(BoundPolicy::LowestK(2)).unwrap();
    let report = verify_sectors(&modes, &spectrum, 3).unwrap();
    println!(
        "{} pairs checked, {} nonzero, max |sq - oracle| = {:e}, passed {}",
        report.summary.pairs_checked,
        report.entries.len(),
        report.summary.max_abs_diff,
        report.summary.passed
    );
    for e in report.entries.iter().filter(|e| e.term == "SCSC").take(4) {
        println!(
            "  {} N={} <{}|..|{}> sq={:+.12} oracle={:+.12}",
            e.term, e.sector, e.bra, e.ket, e.sq_value, e.oracle_value
        );
    }
    for r in &report.summation_regions {
        println!("  {r}");
    }
}
