//! Loads the budget hierarchy and walks it.

use rsos_core::taxonomy::{Itemset, Taxonomy};
use rsos_core::transactions::{load_periods, Granularity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let log = include_str!("../../../data/example/transactions.csv");
    let periods = load_periods(log, &[], Granularity::Month)?;
    let mut tax = Taxonomy::parse(
        include_str!("../../../data/example/taxonomy.csv"),
        Some(&periods.schema),
    )?;
    periods.register_domain(&mut tax)?;

    for attr in ["Budget", "Outfit"] {
        println!("{attr} (flat: {})", tax.is_flat(attr));
        for value in tax.values(attr)? {
            let up: Vec<String> = tax.ancestors(&value)?.iter().map(|a| a.value.clone()).collect();
            println!("  {} level {} -> {:?}", value.value, tax.level(&value)?, up);
        }
    }

    let x = Itemset::new([tax.item("Outfit", "Jacket")?, tax.item("Budget", "5800")?])?;
    println!("generalizations of {x}:");
    for g in tax.generalizations_of(&x) {
        println!("  {g}");
    }
    Ok(())
}
