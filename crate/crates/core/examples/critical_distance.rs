//! Distance interactions and the distance beyond which the marginal effect
//! of a control measure changes sign.
//!
//!     cargo run --release --example critical_distance

use indirect_fdi::econ::stats::critical_distance;
use indirect_fdi::econ::{fit_spec, EstimatorKind, ModelSpec};
use indirect_fdi::measures::{measure_table, MeasureOptions};
use indirect_fdi::netcore::build_networks;
use indirect_fdi::synth::{generate, DGPConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = DGPConfig {
        n_countries: 80,
        rho: 0.0,
        conduit_fraction: 0.5,
        ..DGPConfig::default()
    };
    // spl helps trade at short range and hurts beyond exp(2.0 / 0.25) km
    cfg.beta.insert("ln_spl".into(), 2.0);
    cfg.beta.insert("ln_dist:ln_spl".into(), -0.25);
    let (panel, _) = generate(&cfg)?;
    let (_, control) = build_networks(&panel)?;
    let measures = measure_table(&control, MeasureOptions::default())?;

    let spec = ModelSpec::new(
        EstimatorKind::Ols,
        "ln_trade",
        &["ln_cc", "ln_spl", "ln_dist", "ln_dist:ln_spl", "ln_gdp_o", "ln_gdp_d", "ln_pop_o", "ln_pop_d"],
    )?;
    let fit = fit_spec(&panel, &measures, &spec)?;
    let b = fit.coef_of("ln_spl").unwrap();
    let bi = fit.coef_of("ln_dist:ln_spl").unwrap();
    println!("true  critical distance: {:.0} km", (2.0f64 / 0.25).exp());
    println!("fitted critical distance: {:.0} km", critical_distance(b, bi)?);

    match critical_distance(0.1, 0.0) {
        Ok(_) => unreachable!(),
        Err(e) => println!("without an interaction: {e}"),
    }
    Ok(())
}
