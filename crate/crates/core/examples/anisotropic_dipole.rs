//! A ball under a dipole weight drifts towards the favoured direction. The
//! centroid is printed as the body grows.

use gaussflow::anisotropy::AnisotropyPhi;
use gaussflow::convex::ConvexBody;
use gaussflow::flow::{integrate, FlowConfig, FlowDirection, FlowState};
use gaussflow::sphere::build_grid;

fn main() -> gaussflow::error::Result<()> {
    let grid = build_grid(3, &[16, 32])?;
    let ball = ConvexBody::from_fn(grid, |_| 1.0)?;
    let phi = AnisotropyPhi::Dipole { eps: 0.3, v: [0.0, 0.0, 1.0] };
    let cfg = FlowConfig::new(0.5, FlowDirection::ExpandingPrimal).with_phi(phi).with_t_end(2.0);

    println!("{:>5} {:>10} {:>12} {:>12}", "t", "volume", "centroid z", "s_max/s_min");
    integrate(FlowState::new(ball, cfg.direction)?, &cfg, &[0.5, 1.0, 1.5, 2.0], |s, on_cp| {
        if on_cp || s.step_count == 0 {
            let b = &s.body;
            println!("{:>5.2} {:>10.4} {:>12.6} {:>12.6}", s.t, b.volume(), b.centroid()[2], b.s_max() / b.s_min());
        }
        Ok(())
    })?;
    Ok(())
}
