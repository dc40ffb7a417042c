//! Indirect-influence measures on the corporate-control network:
//! power-weighted path lengths, communicability and the `diff` net gain.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::netcore::{CountryRegistry, WeightedDigraph};

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("alpha must be finite and >= 0, got {0}")]
    InvalidAlpha(f64),
    #[error("diff requires shortest paths computed with alpha = 1 (got alpha = {0})")]
    AlphaNotOne(f64),
    #[error("no pair has a defined shortest path")]
    NoDefinedPairs,
    #[error("expected a shortest-path matrix, got direct lengths")]
    NotShortest,
    #[error("inputs are defined over different registries")]
    RegistryMismatch,
}

pub type Result<T> = std::result::Result<T, MeasureError>;

pub const DEFAULT_ALPHA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Direct,
    Shortest,
}

/// Which adjacency a path matrix was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Original,
    Transposed,
}

/// Path lengths between ordered pairs; `None` marks a missing value
/// (no path, or the diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct PathLengthMatrix {
    registry: CountryRegistry,
    alpha: f64,
    kind: PathKind,
    orientation: Orientation,
    values: Vec<Option<f64>>,
    /// For shortest paths: true where the minimum is attained only by an
    /// indirect path. Exact ties count as direct.
    indirect: Vec<bool>,
}

impl PathLengthMatrix {
    pub fn registry(&self) -> &CountryRegistry {
        &self.registry
    }

    pub fn n(&self) -> usize {
        self.registry.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.n() + j]
    }

    pub fn is_indirect(&self, i: usize, j: usize) -> bool {
        self.indirect[i * self.n() + j]
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(MeasureError::InvalidAlpha(alpha))
    }
}

/// Length of the direct edge `1 / C^alpha`.
#[inline]
pub fn edge_length(weight: f64, alpha: f64) -> f64 {
    1.0 / weight.powf(alpha)
}

pub fn direct_lengths(control: &WeightedDigraph, alpha: f64) -> Result<PathLengthMatrix> {
    check_alpha(alpha)?;
    let n = control.n();
    let mut values = vec![None; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j && control.has_edge(i, j) {
                values[i * n + j] = Some(edge_length(control.weight(i, j), alpha));
            }
        }
    }
    Ok(PathLengthMatrix {
        registry: control.registry().clone(),
        alpha,
        kind: PathKind::Direct,
        orientation: Orientation::Original,
        values,
        indirect: vec![false; n * n],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties by node index for a stable pop order
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source label-setting shortest paths over an adjacency list.
/// Also returns, per target, the best length over paths with at least
/// two edges (used to decide direct vs indirect).
fn single_source(adj: &[Vec<(usize, f64)>], source: usize) -> (Vec<f64>, Vec<f64>) {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier {
        dist: 0.0,
        node: source,
    });
    while let Some(Frontier { dist: d, node: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Frontier { dist: nd, node: v });
            }
        }
    }
    // best multi-hop length: relax the last edge from every intermediate k != source
    let mut via = vec![f64::INFINITY; n];
    for (k, edges) in adj.iter().enumerate() {
        if k == source || !dist[k].is_finite() {
            continue;
        }
        for &(v, w) in edges {
            let nd = dist[k] + w;
            if nd < via[v] {
                via[v] = nd;
            }
        }
    }
    (dist, via)
}

pub fn shortest_paths(control: &WeightedDigraph, alpha: f64) -> Result<PathLengthMatrix> {
    shortest_paths_oriented(control, alpha, Orientation::Original)
}

fn shortest_paths_oriented(
    graph: &WeightedDigraph,
    alpha: f64,
    orientation: Orientation,
) -> Result<PathLengthMatrix> {
    check_alpha(alpha)?;
    let n = graph.n();
    let adj: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && graph.has_edge(i, j))
                .map(|j| (j, edge_length(graph.weight(i, j), alpha)))
                .collect()
        })
        .collect();
    let mut values = vec![None; n * n];
    let mut indirect = vec![false; n * n];
    for s in 0..n {
        let (dist, via) = single_source(&adj, s);
        for t in 0..n {
            if t == s || !dist[t].is_finite() {
                continue;
            }
            values[s * n + t] = Some(dist[t]);
            let direct = if graph.has_edge(s, t) {
                edge_length(graph.weight(s, t), alpha)
            } else {
                f64::INFINITY
            };
            indirect[s * n + t] = via[t] < direct;
        }
    }
    Ok(PathLengthMatrix {
        registry: graph.registry().clone(),
        alpha,
        kind: PathKind::Shortest,
        orientation,
        values,
        indirect,
    })
}

/// Shortest paths on the transpose of `control`: entry (i, j) measures
/// control running from j to i.
pub fn shortest_paths_inverse(control: &WeightedDigraph, alpha: f64) -> Result<PathLengthMatrix> {
    shortest_paths_oriented(&control.transpose(), alpha, Orientation::Transposed)
}

/// Share of defined shortest paths that are strictly shorter via an
/// intermediate country.
pub fn indirect_share(shortest: &PathLengthMatrix) -> Result<f64> {
    if shortest.kind != PathKind::Shortest {
        return Err(MeasureError::NotShortest);
    }
    let (mut defined, mut indirect) = (0usize, 0usize);
    for (v, flag) in shortest.values.iter().zip(&shortest.indirect) {
        if v.is_some() {
            defined += 1;
            indirect += usize::from(*flag);
        }
    }
    if defined == 0 {
        return Err(MeasureError::NoDefinedPairs);
    }
    Ok(indirect as f64 / defined as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommunicabilityMethod {
    #[default]
    Spectral,
    Series,
}

impl std::str::FromStr for CommunicabilityMethod {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "series" => Ok(Self::Series),
            other => Err(format!("unknown communicability method `{other}` (spectral|series)")),
        }
    }
}

/// Series truncation: stop once the largest entry of `A^s / s!` drops
/// below this, or after `SERIES_MAX_TERMS` powers.
pub const SERIES_TERM_TOL: f64 = 1e-12;
pub const SERIES_MAX_TERMS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct CommunicabilityMatrix {
    registry: CountryRegistry,
    method: CommunicabilityMethod,
    values: DMatrix<f64>,
}

impl CommunicabilityMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn method(&self) -> CommunicabilityMethod {
        self.method
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn registry(&self) -> &CountryRegistry {
        &self.registry
    }
}

/// Undirected, unweighted version of the graph: `A[i][j] = 1` iff an edge
/// exists in either direction.
pub fn binarize(graph: &WeightedDigraph) -> DMatrix<f64> {
    let n = graph.n();
    DMatrix::from_fn(n, n, |i, j| {
        if i != j && (graph.has_edge(i, j) || graph.has_edge(j, i)) {
            1.0
        } else {
            0.0
        }
    })
}

pub fn communicability(
    graph: &WeightedDigraph,
    method: CommunicabilityMethod,
) -> CommunicabilityMatrix {
    let a = binarize(graph);
    let values = match method {
        CommunicabilityMethod::Spectral => expm_symmetric_spectral(&a),
        CommunicabilityMethod::Series => expm_series(&a),
    };
    CommunicabilityMatrix {
        registry: graph.registry().clone(),
        method,
        values,
    }
}

/// `exp(A) = sum_k phi_k phi_k^T e^{lambda_k}` for symmetric `A`.
pub fn expm_symmetric_spectral(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = a.clone().symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let e = lambda.exp();
        scaled.column_mut(k).scale_mut(e);
    }
    let mut out = &scaled * eig.eigenvectors.transpose();
    // exact symmetry regardless of rounding in the product
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = m;
            out[(j, i)] = m;
        }
    }
    out
}

/// Truncated power series `sum_s A^s / s!`.
pub fn expm_series(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for s in 1..=SERIES_MAX_TERMS {
        term = &term * a / s as f64;
        sum += &term;
        if term.amax() < SERIES_TERM_TOL {
            break;
        }
    }
    sum
}

/// Per-dyad `1/spl - C` at alpha = 1, `None` where spl is missing.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix {
    n: usize,
    values: Vec<Option<f64>>,
    /// Smallest value before clamping (0 if nothing was negative).
    pub min_raw: f64,
}

impl DiffMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.n + j]
    }
}

/// Rounding slack for `1/spl - C` on direct shortest paths.
pub const DIFF_CLAMP_TOL: f64 = 1e-12;

pub fn diff_measure(shortest: &PathLengthMatrix, control: &WeightedDigraph) -> Result<DiffMatrix> {
    if shortest.kind != PathKind::Shortest {
        return Err(MeasureError::NotShortest);
    }
    if shortest.alpha != 1.0 {
        return Err(MeasureError::AlphaNotOne(shortest.alpha));
    }
    if shortest.registry() != control.registry() {
        return Err(MeasureError::RegistryMismatch);
    }
    let n = shortest.n();
    let mut min_raw = 0.0f64;
    let mut values = vec![None; n * n];
    for i in 0..n {
        for j in 0..n {
            let c = match shortest.orientation {
                Orientation::Original => control.weight(i, j),
                Orientation::Transposed => control.weight(j, i),
            };
            if let Some(spl) = shortest.get(i, j) {
                let raw = 1.0 / spl - c;
                min_raw = min_raw.min(raw);
                // direct optimum: 1/(1/C) - C is rounding noise proportional to C
                let v = if raw < 0.0 && raw >= -DIFF_CLAMP_TOL * c.max(1.0) {
                    0.0
                } else {
                    raw.max(0.0)
                };
                values[i * n + j] = Some(v);
            }
        }
    }
    Ok(DiffMatrix { n, values, min_raw })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    pub alpha: f64,
    pub cmb_method: CommunicabilityMethod,
    /// Multiplicative rescaling applied to communicability values.
    pub cmb_scale: f64,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            cmb_method: CommunicabilityMethod::Spectral,
            cmb_scale: 1.0,
        }
    }
}

/// All per-dyad measures over one registry.
#[derive(Debug, Clone)]
pub struct MeasureTable {
    registry: CountryRegistry,
    options: MeasureOptions,
    control: WeightedDigraph,
    spl: PathLengthMatrix,
    spl_inv: PathLengthMatrix,
    cmb: CommunicabilityMatrix,
    diff: Option<DiffMatrix>,
    diff_inv: Option<DiffMatrix>,
}

/// One row of the measure table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadMeasures {
    pub spl: Option<f64>,
    pub spl_inv: Option<f64>,
    pub cmb: f64,
    pub diff: Option<f64>,
    pub diff_inv: Option<f64>,
}

pub fn measure_table(control: &WeightedDigraph, options: MeasureOptions) -> Result<MeasureTable> {
    let spl = shortest_paths(control, options.alpha)?;
    let spl_inv = shortest_paths_inverse(control, options.alpha)?;
    let cmb = communicability(control, options.cmb_method);
    let (diff, diff_inv) = if options.alpha == 1.0 {
        (
            Some(diff_measure(&spl, control)?),
            Some(diff_measure(&spl_inv, control)?),
        )
    } else {
        (None, None)
    };
    Ok(MeasureTable {
        registry: control.registry().clone(),
        options,
        control: control.clone(),
        spl,
        spl_inv,
        cmb,
        diff,
        diff_inv,
    })
}

impl MeasureTable {
    pub fn registry(&self) -> &CountryRegistry {
        &self.registry
    }

    pub fn alpha(&self) -> f64 {
        self.options.alpha
    }

    pub fn options(&self) -> MeasureOptions {
        self.options
    }

    pub fn control(&self) -> &WeightedDigraph {
        &self.control
    }

    pub fn spl(&self) -> &PathLengthMatrix {
        &self.spl
    }

    pub fn spl_inv(&self) -> &PathLengthMatrix {
        &self.spl_inv
    }

    pub fn communicability(&self) -> &CommunicabilityMatrix {
        &self.cmb
    }

    /// Whether `diff` columns are available (only at alpha = 1).
    pub fn has_diff(&self) -> bool {
        self.diff.is_some()
    }

    pub fn get(&self, i: usize, j: usize) -> DyadMeasures {
        DyadMeasures {
            spl: self.spl.get(i, j),
            spl_inv: self.spl_inv.get(i, j),
            cmb: self.cmb.get(i, j) * self.options.cmb_scale,
            diff: self.diff.as_ref().and_then(|d| d.get(i, j)),
            diff_inv: self.diff_inv.as_ref().and_then(|d| d.get(i, j)),
        }
    }

    /// Writes `origin,dest,spl,spl_inv,cmb,diff,diff_inv` for every ordered
    /// pair; missing values are empty fields.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["origin", "dest", "spl", "spl_inv", "cmb", "diff", "diff_inv"])?;
        let n = self.registry.len();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let m = self.get(i, j);
                w.write_record([
                    self.registry.code(i).to_string(),
                    self.registry.code(j).to_string(),
                    opt(m.spl),
                    opt(m.spl_inv),
                    m.cmb.to_string(),
                    opt(m.diff),
                    opt(m.diff_inv),
                ])?;
            }
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn three_node() -> WeightedDigraph {
        // a->b = 4, b->c = 4, a->c = 1
        WeightedDigraph::from_rows(&[
            vec![0.0, 4.0, 1.0],
            vec![0.0, 0.0, 4.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn direct_lengths_examples() {
        let g = three_node();
        let d1 = direct_lengths(&g, 1.0).unwrap();
        assert_eq!(d1.get(0, 1), Some(0.25));
        assert_eq!(d1.get(0, 2), Some(1.0));
        assert_eq!(d1.get(1, 0), None);
        let d05 = direct_lengths(&g, 0.5).unwrap();
        assert_eq!(d05.get(0, 1), Some(0.5));
        assert_eq!(d05.get(0, 2), Some(1.0));
        assert!(matches!(direct_lengths(&g, -1.0), Err(MeasureError::InvalidAlpha(_))));
    }

    #[test]
    fn single_edge() {
        let g = WeightedDigraph::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let s = shortest_paths(&g, 1.0).unwrap();
        assert_eq!(s.get(0, 1), Some(1.0));
        assert_eq!(s.get(1, 0), None);
        assert_eq!(s.get(0, 0), None);
        assert!(!s.is_indirect(0, 1));
    }

    #[test]
    fn three_node_alpha_one_goes_indirect() {
        let s = shortest_paths(&three_node(), 1.0).unwrap();
        assert_eq!(s.get(0, 2), Some(0.5));
        assert!(s.is_indirect(0, 2));
        assert!(!s.is_indirect(0, 1));
        assert!(!s.is_indirect(1, 2));
        assert_abs_diff_eq!(indirect_share(&s).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn three_node_alpha_half_ties_direct() {
        let s = shortest_paths(&three_node(), 0.5).unwrap();
        assert_eq!(s.get(0, 2), Some(1.0));
        assert!(!s.is_indirect(0, 2));
        assert_eq!(indirect_share(&s).unwrap(), 0.0);
    }

    #[test]
    fn uniform_complete_graph_is_all_direct() {
        let n = 6;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 3.0 }).collect())
            .collect();
        let s = shortest_paths(&WeightedDigraph::from_rows(&rows).unwrap(), 1.0).unwrap();
        assert_eq!(indirect_share(&s).unwrap(), 0.0);
    }

    #[test]
    fn indirect_share_errors() {
        let g = WeightedDigraph::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let s = shortest_paths(&g, 1.0).unwrap();
        assert_eq!(indirect_share(&s), Err(MeasureError::NoDefinedPairs));
        let d = direct_lengths(&three_node(), 1.0).unwrap();
        assert_eq!(indirect_share(&d), Err(MeasureError::NotShortest));
    }

    #[test]
    fn communicability_of_empty_graph_is_identity() {
        let g = WeightedDigraph::from_rows(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]).unwrap();
        for method in [CommunicabilityMethod::Spectral, CommunicabilityMethod::Series] {
            let c = communicability(&g, method);
            assert_eq!(c.matrix(), &DMatrix::identity(3, 3));
        }
    }

    #[test]
    fn communicability_single_pair_closed_form() {
        // directed edge only one way; binarization makes it undirected
        let g = WeightedDigraph::from_rows(&[vec![0.0, 7.0], vec![0.0, 0.0]]).unwrap();
        for method in [CommunicabilityMethod::Spectral, CommunicabilityMethod::Series] {
            let c = communicability(&g, method);
            assert_abs_diff_eq!(c.get(0, 1), 1f64.sinh(), epsilon = 1e-12);
            assert_abs_diff_eq!(c.get(1, 0), 1f64.sinh(), epsilon = 1e-12);
            assert_abs_diff_eq!(c.get(0, 0), 1f64.cosh(), epsilon = 1e-12);
        }
    }

    #[test]
    fn diff_examples() {
        let g = three_node();
        let s = shortest_paths(&g, 1.0).unwrap();
        let d = diff_measure(&s, &g).unwrap();
        assert_eq!(d.get(0, 1), Some(0.0));
        assert_eq!(d.get(0, 2), Some(1.0));
        assert_eq!(d.get(1, 0), None);

        // remove the direct a->c edge: diff = 1/0.5 - 0
        let g2 = WeightedDigraph::from_rows(&[
            vec![0.0, 4.0, 0.0],
            vec![0.0, 0.0, 4.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let s2 = shortest_paths(&g2, 1.0).unwrap();
        assert_eq!(diff_measure(&s2, &g2).unwrap().get(0, 2), Some(2.0));

        let s05 = shortest_paths(&g, 0.5).unwrap();
        assert_eq!(diff_measure(&s05, &g), Err(MeasureError::AlphaNotOne(0.5)));
    }

    #[test]
    fn measure_table_directions() {
        let g = three_node();
        let t = measure_table(&g, MeasureOptions::default()).unwrap();
        // spl_inv(c, a) is control running a -> c
        assert_eq!(t.get(2, 0).spl_inv, Some(0.5));
        assert_eq!(t.get(0, 2).spl, Some(0.5));
        assert_eq!(t.get(2, 0).diff_inv, Some(1.0));
        let cmb = communicability(&g, CommunicabilityMethod::Spectral);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(t.get(i, j).cmb, cmb.get(i, j));
                }
            }
        }

        let sym = WeightedDigraph::from_rows(&[
            vec![0.0, 2.0, 5.0],
            vec![2.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ])
        .unwrap();
        let t = measure_table(&sym, MeasureOptions::default()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t.get(i, j).spl, t.get(i, j).spl_inv);
            }
        }

        let half = measure_table(
            &g,
            MeasureOptions {
                alpha: 0.5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!half.has_diff());
        assert_eq!(half.get(0, 2).diff, None);
    }

    #[test]
    fn cmb_scale_applies() {
        let g = three_node();
        let opts = MeasureOptions {
            cmb_scale: 0.001,
            ..Default::default()
        };
        let t = measure_table(&g, opts).unwrap();
        let raw = communicability(&g, CommunicabilityMethod::Spectral);
        assert_eq!(t.get(0, 1).cmb, raw.get(0, 1) * 0.001);
    }

    #[test]
    fn spl_decreases_with_alpha_on_heavy_edge() {
        let g = WeightedDigraph::from_rows(&[vec![0.0, 5.0], vec![0.0, 0.0]]).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..10 {
            let v = shortest_paths(&g, k as f64 * 0.25).unwrap().get(0, 1).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn csv_output_has_empty_missing_fields() {
        let g = WeightedDigraph::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let t = measure_table(&g, MeasureOptions::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "origin,dest,spl,spl_inv,cmb,diff,diff_inv");
        assert!(lines[1].starts_with("N0000,N0001,1,,"));
        assert!(lines[2].starts_with("N0001,N0000,,1,"));
    }
}
