//! Shared fixtures for the benchmarks.

use besq::{NoiseSource, RngStream, SymMatrix};

/// Symmetric matrix with independent standard normal upper-triangle entries.
pub fn random_sym(p: usize, stream: &mut RngStream) -> SymMatrix {
    let mut entries = vec![0.0; p * (p + 1) / 2];
    stream.fill_standard_normal(&mut entries);
    SymMatrix::from_upper_triangle(p, &entries).expect("entry count matches p")
}
