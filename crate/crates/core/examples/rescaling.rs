//! Checks that `a^{1/n} s(a^{(p-1)/n} t)` is again a solution, starting from
//! a translated ellipse.

use gaussflow::convex::{ellipsoid_support, ConvexBody};
use gaussflow::flow::{verify_rescaling_property, FlowConfig, FlowDirection};
use gaussflow::sphere::{build_grid, dot};

fn main() -> gaussflow::error::Result<()> {
    let grid = build_grid(2, &[256])?;
    let offset = [0.1, -0.2, 0.0];
    let body = ConvexBody::from_fn(grid, |z| ellipsoid_support(&[1.0, 1.4], z) + dot(&offset, z))?;
    let cfg = FlowConfig::new(0.5, FlowDirection::ExpandingPrimal);
    for a in [1.0, 2.0, 0.5] {
        let defect = verify_rescaling_property(&cfg, &body, a, &[0.1, 0.5, 1.0])?;
        println!("a = {a}: sup relative defect {defect:.3e}");
    }
    Ok(())
}
