use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use indirect_fdi::econ::ols::ols_matrix;
use indirect_fdi::econ::stats::{critical_distance, summarize_values};
use indirect_fdi::measures::{communicability, diff_measure, edge_length, shortest_paths, CommunicabilityMethod};
use indirect_fdi::netcore::{read_panel, write_panel, ColumnMap, WeightedDigraph};
use indirect_fdi::synth::{generate, DGPConfig, SeedRng};

/// Dense weight matrix with roughly half the off-diagonal cells positive.
fn graph() -> impl Strategy<Value = WeightedDigraph> {
    (2usize..9).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![Just(0.0), 0.1f64..50.0], n * n).prop_map(move |w| {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { w[i * n + j] }).collect())
                .collect();
            WeightedDigraph::from_rows(&rows).unwrap()
        })
    })
}

fn alpha() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(0.5), 0.1f64..2.0]
}

proptest! {
    #[test]
    fn spl_obeys_triangle_inequality(g in graph(), a in alpha()) {
        let spl = shortest_paths(&g, a).unwrap();
        let n = g.n();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if g.has_edge(i, j) {
                    let d = spl.get(i, j).unwrap();
                    prop_assert!(d <= edge_length(g.weight(i, j), a) * (1.0 + 1e-12));
                }
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    if let (Some(ik), Some(kj)) = (spl.get(i, k), spl.get(k, j)) {
                        let ij = spl.get(i, j);
                        prop_assert!(ij.is_some());
                        prop_assert!(ij.unwrap() <= (ik + kj) * (1.0 + 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn diff_is_non_negative(g in graph()) {
        let spl = shortest_paths(&g, 1.0).unwrap();
        let diff = diff_measure(&spl, &g).unwrap();
        for i in 0..g.n() {
            for j in 0..g.n() {
                if let Some(v) = diff.get(i, j) {
                    prop_assert!(v >= 0.0);
                }
            }
        }
        prop_assert!(diff.min_raw >= -1e-12);
    }

    #[test]
    fn communicability_is_symmetric_and_positive_on_diagonal(g in graph()) {
        let c = communicability(&g, CommunicabilityMethod::Spectral);
        let s = communicability(&g, CommunicabilityMethod::Series);
        for i in 0..g.n() {
            prop_assert!(c.get(i, i) >= 1.0 - 1e-12);
            for j in 0..g.n() {
                prop_assert!((c.get(i, j) - c.get(j, i)).abs() <= 1e-12 * c.get(i, j).abs().max(1.0));
                prop_assert!((c.get(i, j) - s.get(i, j)).abs() <= 1e-9 * c.get(i, j).abs().max(1.0));
            }
        }
    }

    #[test]
    fn ols_residuals_are_orthogonal(seed in any::<u64>(), n in 8usize..60, k in 1usize..5) {
        let mut rng = SeedRng::new(seed);
        let x = DMatrix::from_fn(n, k + 1, |_, j| if j == 0 { 1.0 } else { rng.normal() });
        let y = DVector::from_fn(n, |_, _| rng.normal() * 3.0 + 1.0);
        let fit = ols_matrix(&y, &x).unwrap();
        let xte = x.transpose() * &fit.resid;
        let scale = y.amax().max(1.0) * n as f64;
        prop_assert!(xte.amax() <= 1e-10 * scale, "X'e = {}", xte.amax());
    }

    #[test]
    fn critical_distance_round_trips(ln_d in 0.01f64..15.0, b_inter in prop_oneof![-3.0f64..-0.01, 0.01f64..3.0]) {
        let b_main = -b_inter * ln_d;
        let d = critical_distance(b_main, b_inter).unwrap();
        prop_assert!((d.ln() - ln_d).abs() <= 1e-12 * ln_d.max(1.0));
        // marginal effect is zero there
        prop_assert!((b_main + b_inter * d.ln()).abs() <= 1e-12 * b_main.abs().max(1.0));
    }

    #[test]
    fn summary_is_ordered(values in prop::collection::vec(prop::option::of(-1e6f64..1e6), 0..50)) {
        let s = summarize_values("x", &values);
        let present = values.iter().flatten().count();
        prop_assert_eq!(s.n, present);
        if present > 0 {
            prop_assert!(s.min <= s.mean + 1e-9 * s.mean.abs().max(1.0));
            prop_assert!(s.mean <= s.max + 1e-9 * s.mean.abs().max(1.0));
            prop_assert!(s.sd >= 0.0);
        } else {
            prop_assert!(s.mean.is_nan());
        }
    }

    #[test]
    fn uniform_stays_in_unit_interval(seed in any::<u64>()) {
        let mut rng = SeedRng::new(seed);
        for _ in 0..1000 {
            let u = rng.uniform();
            prop_assert!((0.0..1.0).contains(&u));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn panel_csv_round_trips(seed in any::<u64>(), n in 3usize..12) {
        let cfg = DGPConfig { n_countries: n, seed, ..DGPConfig::default() };
        let (panel, _) = generate(&cfg).unwrap();
        let mut buf = Vec::new();
        write_panel(&panel, &mut buf).unwrap();
        let back = read_panel(buf.as_slice(), &ColumnMap::default()).unwrap();
        prop_assert_eq!(back, panel);
    }
}
