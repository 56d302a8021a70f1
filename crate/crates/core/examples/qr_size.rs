//! Minimum printed QR size for a few camera setups.
//!
//! ```text
//! cargo run --example qr_size
//! ```

use fogmind::qr::{qr_min_size, Condition, QrSizingParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = QrSizingParams::default();
    let setups = [
        ("12 MP at 300 mm", base),
        (
            "12 MP at 250 mm",
            QrSizingParams {
                scan_distance_mm: 250.0,
                ..base
            },
        ),
        (
            "5 MP at 300 mm",
            QrSizingParams {
                camera_pixels: 5e6,
                ..base
            },
        ),
        (
            "dim room, pale print",
            base.with_conditions(&[Condition::LowLight, Condition::LightColoredCode]),
        ),
    ];
    for (name, p) in setups {
        let s = qr_min_size(&p)?;
        println!(
            "{name}: L_min1 {:.2} mm, L_min2 {:.2} mm, print at least {:.2} mm",
            s.l_min1, s.l_min2, s.l_min
        );
        if let Some(note) = s.discrepancy_note(&p) {
            println!("  {note}");
        }
    }
    Ok(())
}
