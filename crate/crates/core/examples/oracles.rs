//! Cross-checks against brute force: shortest control paths by exhaustive
//! simple-path enumeration, and a probit fit by grid search.
//!
//!     cargo run --example oracles

use indirect_fdi::econ::probit::probit;
use indirect_fdi::measures::shortest_paths;
use indirect_fdi::netcore::WeightedDigraph;
use indirect_fdi::synth::{oracle_grid_mle, oracle_shortest_paths, GridModel, SeedRng};
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = SeedRng::new(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = 2 + rng.below(6);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i != j && rng.bernoulli(0.4) { 1.0 + rng.below(50) as f64 } else { 0.0 })
                    .collect()
            })
            .collect();
        let g = WeightedDigraph::from_rows(&rows).unwrap();
        let fast = shortest_paths(&g, 1.0)?;
        let slow = oracle_shortest_paths(&g, 1.0)?;
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (fast.get(i, j), slow.get(i, j)) {
                    worst = worst.max((a - b).abs() / b);
                }
            }
        }
    }
    println!("200 random graphs: max relative spl difference {worst:e}");

    let x: Vec<f64> = (0..20).map(|i| -1.0 + i as f64 / 10.0).collect();
    let d: Vec<f64> = x.iter().map(|&xi| f64::from(u8::from(xi + 0.4 * rng.normal() > 0.2))).collect();
    let z: Vec<Vec<f64>> = x.iter().map(|&xi| vec![1.0, xi]).collect();
    let grid = oracle_grid_mle(&GridModel::Probit { d: d.clone(), z: z.clone() })?;
    let zm = DMatrix::from_fn(20, 2, |r, c| z[r][c]);
    let fit = probit(&DVector::from_vec(d), &zm)?;
    println!("probit newton  {:.4} {:.4}  loglik {:.6}", fit.gamma[0], fit.gamma[1], fit.loglik);
    println!("probit grid    {:.4} {:.4}  loglik {:.6}", grid.theta[0], grid.theta[1], grid.loglik);
    Ok(())
}
