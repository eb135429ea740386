//! Integral images and a few Haar feature responses on a gradient.

use rsos_core::vision::{
    feature_value, integral_image, rotated_integral_image, GrayImage, HaarFeature, Placement, Rect, TiltedRect,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let img = GrayImage::from_fn(16, 16, |x, y| (x * 12 + y) as u8);
    let ii = integral_image(&img);
    let rii = rotated_integral_image(&img);

    println!("sum of all pixels: {}", ii.rect_sum(Rect::new(0, 0, 16, 16))?);
    println!("tilted 3x2 at (8, 0): {}", rii.tilted_sum(TiltedRect::new(8, 0, 3, 2))?);

    let features = [
        (
            "edge left/right",
            HaarFeature::two_rect_horizontal(0, 0, 8, 16, (16, 16))?,
        ),
        (
            "edge top/bottom",
            HaarFeature::two_rect_vertical(0, 0, 16, 8, (16, 16))?,
        ),
        ("line", HaarFeature::three_rect(0, 0, 4, 16, (16, 16))?),
        ("checker", HaarFeature::four_rect(0, 0, 8, 8, (16, 16))?),
        ("tilted edge", HaarFeature::tilted_edge(4, 0, 3, 4, (16, 16))?),
    ];
    for (name, f) in &features {
        println!("{name:>16}: {}", feature_value(&ii, &rii, f, Placement::at(0, 0))?);
    }
    Ok(())
}
