//! Summary statistics, pairwise correlations and the classification of the
//! heaviest trade and control edges.
//!
//!     cargo run --example report_tables

use indirect_fdi::econ::stats::{
    correlations, default_correlation_terms, default_summary_terms, summarize, write_summary_csv,
};
use indirect_fdi::measures::{measure_table, MeasureOptions};
use indirect_fdi::netcore::{build_networks, classify_top_edges, EdgeKind};
use indirect_fdi::synth::{generate, DGPConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (panel, _) = generate(&DGPConfig {
        n_countries: 40,
        conduit_fraction: 0.3,
        ..DGPConfig::default()
    })?;
    let (trade, control) = build_networks(&panel)?;
    let measures = measure_table(&control, MeasureOptions::default())?;

    let summary = summarize(&panel, &measures, &default_summary_terms(&measures));
    write_summary_csv(&summary, std::io::stdout())?;

    let corr = correlations(&panel, &measures, &default_correlation_terms(&measures))?;
    println!("\ncorr(ln_cc, ln_spl) = {:.3}", corr.get("ln_cc", "ln_spl").unwrap_or(f64::NAN));
    println!("corr(ln_trade, ln_spl) = {:.3}", corr.get("ln_trade", "ln_spl").unwrap_or(f64::NAN));

    let edges = classify_top_edges(&trade, &control, 0.025)?;
    for kind in [EdgeKind::Both, EdgeKind::TradeOnly, EdgeKind::ControlOnly] {
        let n = edges.iter().filter(|e| e.class == kind).count();
        println!("{:<13}{n}", kind.as_str());
    }
    Ok(())
}
