//! Ranks chart sizes by weighted distance to a shopper's measurements.

use std::collections::BTreeMap;

use rsos_core::recommender::{load_sizing, match_size, FieldWeights, GarmentClass};
use rsos_core::vision::{BodyMeasurements, MeasurementField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let chart = load_sizing(
        include_str!("../../../data/example/sizing/top-kurta-onepiece.csv"),
        GarmentClass::TopKurtaOnepiece,
    )?;
    let m: BodyMeasurements = serde_json::from_str(include_str!("../../../data/example/measurements.json"))?;

    println!("equal weights:");
    for (rec, d) in match_size(&m, &chart, &FieldWeights::default())? {
        println!("  {} {d:.2}", rec.size_label);
    }

    let bust_heavy = FieldWeights(BTreeMap::from([
        (MeasurementField::Bust, 4.0),
        (MeasurementField::Sleeve, 0.0),
    ]));
    println!("bust weighted, sleeve ignored:");
    for (rec, d) in match_size(&m, &chart, &bust_heavy)? {
        println!("  {} {d:.2}", rec.size_label);
    }
    Ok(())
}
