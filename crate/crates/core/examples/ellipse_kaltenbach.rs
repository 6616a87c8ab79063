//! Builds the polar dual of an ellipse and an ellipsoid and checks the
//! curvature identity `(K/s^{n+1})(x) * (K°/s°^{n+1})(x°) = 1` on both.

use gaussflow::convex::{ellipsoid_support, ConvexBody};
use gaussflow::duality::kaltenbach_check;
use gaussflow::sphere::build_grid;

fn main() -> gaussflow::error::Result<()> {
    for (n, res, axes) in [
        (2, vec![128], vec![1.0, 2.0]),
        (2, vec![512], vec![1.0, 2.0]),
        (3, vec![64, 128], vec![1.0, 1.2, 1.5]),
    ] {
        let grid = build_grid(n, &res)?;
        let body = ConvexBody::from_fn(grid, |z| ellipsoid_support(&axes, z))?;
        let k = kaltenbach_check(&body)?;
        println!(
            "n={n} axes={axes:?} resolution={res:?}: identity defect {:.3e}, pairing error {:.3e}",
            k.max_defect, k.max_pairing_error
        );
    }
    Ok(())
}
