//! Writes a support-function snapshot, reads it back and recomputes the
//! diagnostics from the restored body.

use gaussflow::anisotropy::AnisotropyPhi;
use gaussflow::config::BodySpec;
use gaussflow::diagnostics::record;
use gaussflow::io::{parse_snapshot, snapshot_to_string};
use gaussflow::sphere::build_grid;
use gaussflow::convex::ConvexBody;

fn main() -> gaussflow::error::Result<()> {
    let grid = build_grid(3, &[16, 32])?;
    let body = BodySpec::Ellipsoid { axes: vec![1.0, 1.2, 1.5] }.build(grid)?;
    let text = snapshot_to_string(body.support(), 0.75);
    println!("first lines of the snapshot:");
    for line in text.lines().take(4) {
        println!("  {line}");
    }

    let (support, t) = parse_snapshot(&text)?;
    let restored = ConvexBody::new(support)?;
    let phi = AnisotropyPhi::isotropic();
    let a = record(&body, t, 0.0, &phi, 0.5).values();
    let b = record(&restored, t, 0.0, &phi, 0.5).values();
    let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    println!("t = {t}, largest diagnostics difference after the round trip: {worst:.2e}");
    Ok(())
}
