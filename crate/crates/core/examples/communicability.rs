//! Communicability exp(A) of the binarized, symmetrized control network,
//! computed by eigendecomposition and by the truncated power series.
//!
//!     cargo run --example communicability

use indirect_fdi::measures::{binarize, communicability, expm_series, expm_symmetric_spectral, CommunicabilityMethod};
use indirect_fdi::netcore::WeightedDigraph;

fn main() {
    // a directed 4-cycle with one chord
    let rows = vec![
        vec![0.0, 3.0, 0.0, 1.0],
        vec![0.0, 0.0, 2.0, 0.0],
        vec![0.0, 0.0, 0.0, 5.0],
        vec![4.0, 0.0, 0.0, 0.0],
    ];
    let g = WeightedDigraph::from_rows(&rows).expect("square, non-negative");
    let a = binarize(&g);
    let spectral = expm_symmetric_spectral(&a);
    let series = expm_series(&a);
    let worst = (&spectral - &series).abs().max();
    println!("adjacency:{a}");
    println!("exp(A):{spectral}");
    println!("max |spectral - series| = {worst:e}");

    let c = communicability(&g, CommunicabilityMethod::Spectral);
    println!("G(0,2) = {:.6} (no direct edge, two 2-walks)", c.get(0, 2));
}
