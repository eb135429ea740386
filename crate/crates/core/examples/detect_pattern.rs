//! Runs the bundled cascade over a PGM (default: the example scene).

use rsos_core::vision::{detect, CascadeClassifier, GrayImage, ScanParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/example");
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{data}/images/face.pgm"));
    let img = GrayImage::from_pgm(&std::fs::read(&path)?)?;
    let cascade = CascadeClassifier::parse(&std::fs::read_to_string(format!("{data}/cascades/eyes.cascade"))?)?;

    let found = detect(&img, &cascade, &ScanParams::default())?;
    println!(
        "{} detection(s) in {}x{} {path}",
        found.len(),
        img.width(),
        img.height()
    );
    for d in found {
        println!("{d}");
    }
    Ok(())
}
