//! Small Monte Carlo: bias of OLS on positive flows against Heckman two-step
//! when selection and outcome errors are correlated.
//!
//!     cargo run --release --example monte_carlo [replications]

use indirect_fdi::econ::{fit_spec, EstimatorKind, ModelSpec};
use indirect_fdi::measures::{measure_table, MeasureOptions};
use indirect_fdi::netcore::build_networks;
use indirect_fdi::synth::{generate, DGPConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let regs = ["ln_cc", "ln_spl", "ln_gdp_o", "ln_gdp_d", "ln_pop_o", "ln_pop_d", "ln_dist"];
    let heck = ModelSpec::new(EstimatorKind::Heckman2s, "ln_trade", &regs)?.with_selection(&["ln_dist", "rta"])?;
    let ols = ModelSpec::new(EstimatorKind::Ols, "ln_trade", &regs)?;

    let mut err = (0.0, 0.0);
    let mut heckman_closer = 0;
    for seed in 0..reps {
        let mut cfg = DGPConfig {
            seed,
            ..DGPConfig::default()
        };
        cfg.gamma = [("_cons", 13.5), ("ln_dist", -1.5), ("rta", 1.5)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let (panel, truth) = generate(&cfg)?;
        let (_, control) = build_networks(&panel)?;
        let m = measure_table(&control, MeasureOptions::default())?;
        let target = truth.beta["ln_dist"];
        let eh = (fit_spec(&panel, &m, &heck)?.coef_of("ln_dist").unwrap() - target).abs();
        let eo = (fit_spec(&panel, &m, &ols)?.coef_of("ln_dist").unwrap() - target).abs();
        err.0 += eh;
        err.1 += eo;
        heckman_closer += usize::from(eh < eo);
    }
    println!("mean |error| on ln_dist over {reps} panels");
    println!("  heckman2s {:.4}", err.0 / reps as f64);
    println!("  ols       {:.4}", err.1 / reps as f64);
    println!("heckman closer in {heckman_closer}/{reps}");
    Ok(())
}
