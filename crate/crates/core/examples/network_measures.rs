//! Builds the trade and control networks from a dyad panel and computes the
//! per-dyad indirect-control measures.
//!
//!     cargo run --example network_measures

use indirect_fdi::measures::{indirect_share, measure_table, MeasureOptions};
use indirect_fdi::netcore::{build_networks, read_panel, ColumnMap};

const PANEL: &str = "\
origin,dest,trade,cc,gdp_o,gdp_d,pop_o,pop_d,dist,contig,colony,smctry,comlang,rta,asean_china_o
AAA,BBB,120,2,10,20,5e6,8e6,900,1,0,0,0,1,0
BBB,CCC,80,4,20,5,8e6,3e6,1200,0,0,0,1,0,0
AAA,CCC,15,1,10,5,5e6,3e6,2000,0,0,0,0,0,0
CCC,AAA,40,0,5,10,3e6,5e6,2000,0,0,0,0,0,0
BBB,AAA,60,3,20,10,8e6,5e6,900,1,0,0,0,1,0
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let panel = read_panel(PANEL.as_bytes(), &ColumnMap::default())?;
    let (_, control) = build_networks(&panel)?;

    for alpha in [1.0, 0.5] {
        let opts = MeasureOptions {
            alpha,
            ..MeasureOptions::default()
        };
        let table = measure_table(&control, opts)?;
        println!("alpha = {alpha}: indirect share {:.3}", indirect_share(table.spl())?);
        let reg = table.registry();
        for i in 0..reg.len() {
            for j in 0..reg.len() {
                if i == j {
                    continue;
                }
                let m = table.get(i, j);
                println!(
                    "  {}->{}  spl {:<10} diff {:<10} cmb {:.4}",
                    reg.code(i),
                    reg.code(j),
                    m.spl.map_or("-".into(), |v| format!("{v:.4}")),
                    m.diff.map_or("-".into(), |v| format!("{v:.4}")),
                    m.cmb
                );
            }
        }
    }

    // AAA reaches CCC more cheaply through BBB (1/2 + 1/4) than directly (1/1)
    let table = measure_table(&control, MeasureOptions::default())?;
    let (a, c) = (0, 2);
    assert!(table.spl().is_indirect(a, c));
    table.write_csv(std::io::stdout())?;
    Ok(())
}
