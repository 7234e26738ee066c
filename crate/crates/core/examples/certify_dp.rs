//! Compares the DP solver against brute-force enumeration on random tiny
//! instances whose dynamics land exactly on grid nodes.
//!
//! `cargo run --release --example certify_dp`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thermostat_core::oracle::{aligned_grid, certify, random_grid_aligned};

fn main() -> thermostat_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut agree = 0;
    let n = 20;
    for i in 0..n {
        let inst = random_grid_aligned(&mut rng, 4);
        let cert = certify(&inst, aligned_grid(), 1e-9)?;
        agree += cert.passed() as usize;
        match cert.oracle_value {
            Some(v) => println!(
                "#{i:<2} gamma {:>8.1} W: dp {:.6} oracle {v:.6} controls {:?}",
                inst.gamma,
                cert.dp_value,
                cert.dp_controls.unwrap_or_default()
            ),
            None => println!(
                "#{i:<2} gamma {:>8.1} W: infeasible both ways: {}",
                inst.gamma,
                cert.passed()
            ),
        }
    }
    println!("{agree}/{n} agree");
    Ok(())
}
