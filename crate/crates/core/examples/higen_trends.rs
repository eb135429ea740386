//! How each popular itemset drifted between months.

use rsos_core::gim::MinerConfig;
use rsos_core::higen::{extract_higens, render_higen_report, RenderOptions};
use rsos_core::taxonomy::Taxonomy;
use rsos_core::transactions::{load_periods, Granularity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let periods = load_periods(
        include_str!("../../../data/example/transactions.csv"),
        &[],
        Granularity::Month,
    )?;
    let mut tax = Taxonomy::parse(
        include_str!("../../../data/example/taxonomy.csv"),
        Some(&periods.schema),
    )?;
    periods.register_domain(&mut tax)?;

    let cfg = MinerConfig::default();
    let higens = extract_higens(&periods, &tax, &cfg)?;
    print!(
        "{}",
        render_higen_report(&higens, &RenderOptions::report(cfg.display_order()))
    );
    for h in &higens {
        println!("{} ends with {:?}", h.reference, h.last_relation());
    }
    Ok(())
}
