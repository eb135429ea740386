//! Body measurements from a front silhouette, then a manual correction.

use rsos_core::vision::{estimate_measurements, BodyMeasurements, GrayImage, MeasureConfig, MeasurementField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let img = GrayImage::from_pgm(include_bytes!("../../../data/example/images/silhouette.pgm"))?;
    let detected = estimate_measurements(&img, 2.0, &MeasureConfig::default())?;
    for (field, value) in detected.present() {
        println!("{:>24} {value:7.2}", field.as_str());
    }

    let manual = BodyMeasurements::manual([(MeasurementField::Wrist, 6.0), (MeasurementField::Waist, 27.0)]);
    let merged = detected.with_overrides(&manual);
    println!(
        "after edits: source={:?} waist={:?} wrist={:?}",
        merged.source, merged.waist, merged.wrist
    );
    Ok(())
}
