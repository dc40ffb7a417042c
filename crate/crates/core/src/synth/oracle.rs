//! Brute-force reference solutions for tiny instances.

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use super::SynthError;
use crate::netcore::WeightedDigraph;

pub const MAX_ORACLE_NODES: usize = 8;
pub const MAX_GRID_OBS: usize = 20;
pub const MAX_GRID_PARAMS: usize = 2;
/// Search box for every parameter.
pub const GRID_BOUND: f64 = 6.0;

/// Exhaustive shortest simple paths.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePaths {
    pub n: usize,
    /// Row-major; `None` on the diagonal and for unreachable pairs.
    pub values: Vec<Option<f64>>,
    /// Whether some path with two or more edges is strictly shorter than
    /// the direct edge.
    pub indirect: Vec<bool>,
}

impl OraclePaths {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.n + j]
    }
}

fn dfs(
    graph: &WeightedDigraph,
    alpha: f64,
    source: usize,
    node: usize,
    acc: f64,
    hops: usize,
    visited: &mut [bool],
    best: &mut [f64],
    best_multi: &mut [f64],
) {
    let n = graph.n();
    for next in 0..n {
        if visited[next] || !graph.has_edge(node, next) {
            continue;
        }
        let len = acc + 1.0 / graph.weight(node, next).powf(alpha);
        if len < best[next] {
            best[next] = len;
        }
        if hops >= 1 && len < best_multi[next] {
            best_multi[next] = len;
        }
        visited[next] = true;
        dfs(graph, alpha, source, next, len, hops + 1, visited, best, best_multi);
        visited[next] = false;
    }
}

/// Enumerates every simple path from every source. Path lengths are
/// accumulated edge by edge from the source.
pub fn oracle_shortest_paths(graph: &WeightedDigraph, alpha: f64) -> Result<OraclePaths, SynthError> {
    let n = graph.n();
    if n > MAX_ORACLE_NODES {
        return Err(SynthError::TooLarge(format!(
            "path oracle is limited to {MAX_ORACLE_NODES} nodes, got {n}"
        )));
    }
    let mut values = vec![None; n * n];
    let mut indirect = vec![false; n * n];
    for s in 0..n {
        let mut visited = vec![false; n];
        visited[s] = true;
        let mut best = vec![f64::INFINITY; n];
        let mut best_multi = vec![f64::INFINITY; n];
        dfs(graph, alpha, s, s, 0.0, 0, &mut visited, &mut best, &mut best_multi);
        for t in 0..n {
            if t != s && best[t].is_finite() {
                values[s * n + t] = Some(best[t]);
                let direct = if graph.has_edge(s, t) {
                    1.0 / graph.weight(s, t).powf(alpha)
                } else {
                    f64::INFINITY
                };
                indirect[s * n + t] = best_multi[t] < direct;
            }
        }
    }
    Ok(OraclePaths { n, values, indirect })
}

/// Tiny likelihood problems for the grid oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum GridModel {
    /// Probit of `d` on the rows of `z` (one or two columns).
    Probit { d: Vec<f64>, z: Vec<Vec<f64>> },
    /// Intercept-only zero-inflated Poisson; parameters are the count
    /// intercept and the logit inflation intercept.
    Zip { y: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub theta: Vec<f64>,
    pub loglik: f64,
    /// The coarse optimum lies on the edge of the search box, i.e. the
    /// likelihood keeps rising towards infinity (separation).
    pub at_boundary: bool,
}

fn probit_ll(d: &[f64], z: &[Vec<f64>], theta: &[f64]) -> f64 {
    d.iter()
        .zip(z)
        .map(|(&di, zi)| {
            let idx: f64 = zi.iter().zip(theta).map(|(a, b)| a * b).sum();
            let q = if di > 0.5 { 1.0 } else { -1.0 };
            (0.5 * erfc(-q * idx / std::f64::consts::SQRT_2)).ln()
        })
        .sum()
}

fn zip_ll(y: &[f64], theta: &[f64]) -> f64 {
    let (b, g) = (theta[0], theta[1]);
    let mu = b.exp();
    let pi = 1.0 / (1.0 + (-g).exp());
    y.iter()
        .map(|&yi| {
            if yi == 0.0 {
                (pi + (1.0 - pi) * (-mu).exp()).ln()
            } else {
                (1.0 - pi).ln() + yi * b - mu - ln_gamma(yi + 1.0)
            }
        })
        .sum()
}

impl GridModel {
    fn dim(&self) -> usize {
        match self {
            GridModel::Probit { z, .. } => z.first().map_or(0, Vec::len),
            GridModel::Zip { .. } => 2,
        }
    }

    fn n_obs(&self) -> usize {
        match self {
            GridModel::Probit { d, .. } => d.len(),
            GridModel::Zip { y } => y.len(),
        }
    }

    pub fn loglik(&self, theta: &[f64]) -> f64 {
        match self {
            GridModel::Probit { d, z } => probit_ll(d, z, theta),
            GridModel::Zip { y } => zip_ll(y, theta),
        }
    }
}

/// Best point of a regular grid with `step` over `[lo, hi]` per axis.
fn grid_max(model: &GridModel, lo: &[f64], hi: &[f64], step: f64) -> (Vec<f64>, f64, Vec<bool>) {
    let k = lo.len();
    let counts: Vec<usize> = (0..k).map(|a| ((hi[a] - lo[a]) / step).round() as usize + 1).collect();
    let total: usize = counts.iter().product();
    let mut best = (vec![0.0; k], f64::NEG_INFINITY, vec![false; k]);
    let mut theta = vec![0.0; k];
    for flat in 0..total {
        let mut rem = flat;
        let mut edge = vec![false; k];
        for a in 0..k {
            let idx = rem % counts[a];
            rem /= counts[a];
            theta[a] = (lo[a] + idx as f64 * step).min(hi[a]);
            edge[a] = idx == 0 || idx + 1 == counts[a];
        }
        let ll = model.loglik(&theta);
        if ll > best.1 {
            best = (theta.clone(), ll, edge);
        }
    }
    best
}

/// Multi-resolution grid search: step 0.02 over the whole box, 1e-3 in a
/// window around the coarse optimum, then 1e-4 around that.
pub fn oracle_grid_mle(model: &GridModel) -> Result<GridResult, SynthError> {
    let k = model.dim();
    if k == 0 || k > MAX_GRID_PARAMS {
        return Err(SynthError::TooLarge(format!(
            "grid oracle handles 1 or {MAX_GRID_PARAMS} parameters, got {k}"
        )));
    }
    if model.n_obs() > MAX_GRID_OBS {
        return Err(SynthError::TooLarge(format!(
            "grid oracle handles at most {MAX_GRID_OBS} observations, got {}",
            model.n_obs()
        )));
    }
    let lo = vec![-GRID_BOUND; k];
    let hi = vec![GRID_BOUND; k];
    let (mut theta, _, edge) = grid_max(model, &lo, &hi, 0.02);
    let at_boundary = edge.iter().any(|&e| e);
    let mut ll = f64::NEG_INFINITY;
    for (half, step) in [(0.05, 1e-3), (0.002, 1e-4)] {
        let wlo: Vec<f64> = theta.iter().map(|t| (t - half).max(-GRID_BOUND)).collect();
        let whi: Vec<f64> = theta.iter().map(|t| (t + half).min(GRID_BOUND)).collect();
        let (t, l, _) = grid_max(model, &wlo, &whi, step);
        theta = t;
        ll = l;
    }
    Ok(GridResult {
        theta,
        loglik: ll,
        at_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::WeightedDigraph;

    #[test]
    fn hand_enumerated_triangle() {
        // 0->1 (2), 1->2 (2), 0->2 (0.5): direct 0->2 has length 2, the
        // detour 0.5 + 0.5 = 1
        let g = WeightedDigraph::from_rows(&[vec![0.0, 2.0, 0.5], vec![0.0, 0.0, 2.0], vec![0.0, 0.0, 0.0]]).unwrap();
        let o = oracle_shortest_paths(&g, 1.0).unwrap();
        assert_eq!(o.get(0, 2), Some(1.0));
        assert!(o.indirect[2]);
        assert_eq!(o.get(2, 0), None);
        assert_eq!(o.get(0, 0), None);
    }

    #[test]
    fn single_edge() {
        let g = WeightedDigraph::from_rows(&[vec![0.0, 4.0], vec![0.0, 0.0]]).unwrap();
        let o = oracle_shortest_paths(&g, 0.5).unwrap();
        assert_eq!(o.get(0, 1), Some(0.5));
        assert_eq!(o.get(1, 0), None);
    }

    #[test]
    fn too_large() {
        let g = WeightedDigraph::from_rows(&vec![vec![0.0; 9]; 9]).unwrap();
        assert!(matches!(oracle_shortest_paths(&g, 1.0), Err(SynthError::TooLarge(_))));
    }

    #[test]
    fn probit_intercept_only() {
        let d: Vec<f64> = (0..20).map(|i| if i < 15 { 1.0 } else { 0.0 }).collect();
        let z = vec![vec![1.0]; 20];
        let r = oracle_grid_mle(&GridModel::Probit { d, z }).unwrap();
        assert!((r.theta[0] - 0.6745).abs() < 1e-4, "{:?}", r.theta);
        assert!(!r.at_boundary);
    }

    #[test]
    fn all_ones_hits_boundary() {
        let r = oracle_grid_mle(&GridModel::Probit {
            d: vec![1.0; 10],
            z: vec![vec![1.0]; 10],
        })
        .unwrap();
        assert!(r.at_boundary);
    }
}
