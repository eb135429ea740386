//! Frequent generalized itemsets per month, eager and lazy.

use rsos_core::gim::{mine_frequent, render_pattern_report, MinerConfig};
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

    let min_sup = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2);
    for cfg in [
        MinerConfig::new(min_sup, ["Outfit", "Budget"]),
        MinerConfig::new(min_sup, ["Outfit", "Budget"]).lazy(),
    ] {
        println!("# {:?}, min_sup={}", cfg.mode, cfg.min_sup);
        for period in &periods.periods {
            let found = mine_frequent(period, &tax, &cfg)?;
            print!("{}", render_pattern_report(&found, &cfg.display_order()));
        }
    }
    Ok(())
}
