//! Expands a disc under the isotropic flow and compares its support function
//! with the closed-form radius `R(t) = (1 + (1-p)t)^{1/(1-p)}`.

use gaussflow::convex::ConvexBody;
use gaussflow::flow::{ball_radius_expanding, integrate, FlowConfig, FlowDirection, FlowState};
use gaussflow::sphere::build_grid;

fn main() -> gaussflow::error::Result<()> {
    let p = 0.5;
    let grid = build_grid(2, &[128])?;
    let disc = ConvexBody::from_fn(grid, |_| 1.0)?;
    let cfg = FlowConfig::new(p, FlowDirection::ExpandingPrimal).with_t_end(2.0);
    let checkpoints = [0.5, 1.0, 1.5, 2.0];

    println!("{:>6} {:>20} {:>20} {:>10}", "t", "numerical R", "exact R", "error");
    integrate(FlowState::new(disc, cfg.direction)?, &cfg, &checkpoints, |s, on_cp| {
        if on_cp {
            let exact = ball_radius_expanding(1.0, p, s.t);
            let r = s.variable.values()[0];
            println!("{:>6.2} {:>20.15} {:>20.15} {:>10.2e}", s.t, r, exact, (r - exact).abs());
        }
        Ok(())
    })?;
    Ok(())
}
