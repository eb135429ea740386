//! Filters and ranks the example catalog for one shopper.

use std::collections::BTreeMap;

use rsos_core::gim::MinerConfig;
use rsos_core::recommender::{
    load_catalog, load_sizing, recommend, Category, GarmentClass, PatternModel, RecommendConfig, RecommendationRequest,
};
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
    let model = PatternModel::build(periods, tax, MinerConfig::default())?;

    let catalog = load_catalog(include_str!("../../../data/example/catalog.csv"))?;
    let sizing = BTreeMap::from([
        (
            GarmentClass::TopKurtaOnepiece,
            load_sizing(
                include_str!("../../../data/example/sizing/top-kurta-onepiece.csv"),
                GarmentClass::TopKurtaOnepiece,
            )?,
        ),
        (
            GarmentClass::JeansLegging,
            load_sizing(
                include_str!("../../../data/example/sizing/jeans-legging.csv"),
                GarmentClass::JeansLegging,
            )?,
        ),
    ]);

    let budget = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(2500.0);
    let req = RecommendationRequest {
        measurements: serde_json::from_str(include_str!("../../../data/example/measurements.json"))?,
        gender: "female".into(),
        profession: "Engineer".into(),
        budget,
        category: std::env::args().nth(2).map(|c| c.parse::<Category>()).transpose()?,
        top_k: 5,
    };
    let recs = recommend(&req, &catalog, &sizing, &model, &RecommendConfig::default())?;
    if recs.is_empty() {
        println!("nothing fits a budget of {budget}");
    }
    for r in recs {
        println!(
            "{} {:<22} size {}  score {}  {}  {:?}",
            r.entry.outfit_id, r.entry.name, r.size, r.pattern_score, r.matched_pattern, r.trend
        );
    }
    Ok(())
}
