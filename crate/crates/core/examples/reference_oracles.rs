//! The brute-force references the protocols are tested against.

use gridmind::oracles::{ball_volume, factorize_valuations, lex_tuples, odd_primes};

fn main() {
    let ps = odd_primes(2);
    for x in [45, 225, 1] {
        println!("valuations of {x} over {ps:?}: {:?}", factorize_valuations(x, &ps).0);
    }
    for d in 0..5 {
        println!("V({d}) = {}", ball_volume(2, d));
    }
    println!("{:?}", lex_tuples(2, 3));
}
