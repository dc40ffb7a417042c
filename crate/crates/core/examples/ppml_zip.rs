//! Count-outcome estimators: PPML and the zero-inflated PPML on a panel
//! with Poisson trade flows.
//!
//!     cargo run --release --example ppml_zip

use indirect_fdi::econ::{fit_spec, EstimatorKind, Extras, ModelSpec};
use indirect_fdi::measures::{measure_table, MeasureOptions};
use indirect_fdi::netcore::build_networks;
use indirect_fdi::synth::{generate, DGPConfig, OutcomeModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = DGPConfig {
        outcome: OutcomeModel::Poisson,
        seed: 5,
        ..DGPConfig::default()
    };
    cfg.beta = [("_cons", 5.0), ("ln_gdp_o", 0.8), ("ln_gdp_d", 0.7), ("ln_dist", -0.6), ("ln_spl", -0.3)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let (panel, truth) = generate(&cfg)?;
    let (_, control) = build_networks(&panel)?;
    let measures = measure_table(&control, MeasureOptions::default())?;

    let regs = ["ln_spl", "ln_gdp_o", "ln_gdp_d", "ln_dist"];
    let ppml = fit_spec(&panel, &measures, &ModelSpec::new(EstimatorKind::Ppml, "trade", &regs)?)?;
    let zip = fit_spec(
        &panel,
        &measures,
        &ModelSpec::new(EstimatorKind::Zippml, "trade", &regs)?.with_selection(&["ln_dist"])?,
    )?;

    println!("{:<10}{:>10}{:>12}{:>12}", "term", "true", "ppml", "zip");
    for (name, b) in &truth.beta {
        println!(
            "{name:<10}{b:>10.3}{:>12.4}{:>12.4}",
            ppml.coef_of(name).unwrap_or(f64::NAN),
            zip.coef_of(name).unwrap_or(f64::NAN)
        );
    }
    if let Extras::Zip { inflation } = &zip.extras {
        for row in inflation.rows() {
            println!("inflate {:<8}{:>10.4} ({:.4})", row.term, row.coef, row.se);
        }
    }
    for w in &zip.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
