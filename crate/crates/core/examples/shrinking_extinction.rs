//! Shrinks a disc and an ellipse to near extinction. The disc is compared
//! with its exact extinction time and the ellipse with the width and
//! inclusion bounds.

use gaussflow::config::BodySpec;
use gaussflow::diagnostics::{check_width_ratio, minkowski_inclusion};
use gaussflow::flow::{integrate, FlowConfig, FlowDirection, FlowState};
use gaussflow::sphere::build_grid;
use gaussflow::verify::{recorded_run, shrinking_ball_halt};

fn main() -> gaussflow::error::Result<()> {
    let p = 0.9;
    let (halt, exact) = shrinking_ball_halt(2, p)?;
    println!("disc: halted at t = {halt:.8}, exact extinction T = {exact:.8}, gap {:.2e}", exact - halt);

    let grid = build_grid(2, &[256])?;
    let body = BodySpec::Ellipsoid { axes: vec![1.0, 1.5] }.build(grid)?;
    let v0 = body.volume();
    let cfg = FlowConfig::new(p, FlowDirection::ShrinkingPrimal).with_v_stop(1e-3 * v0);

    let mut worst_inner = f64::INFINITY;
    let mut worst_outer = f64::INFINITY;
    integrate(FlowState::new(body.clone(), cfg.direction)?, &cfg, &[], |s, _| {
        let m = minkowski_inclusion(&s.body);
        worst_inner = worst_inner.min(m.inner);
        worst_outer = worst_outer.min(m.outer);
        Ok(())
    })?;
    println!("ellipse: smallest inclusion margins inner {worst_inner:.4}, outer {worst_outer:.4}");

    let (records, outcome) = recorded_run(body, &cfg, &[], 50)?;
    println!("ellipse: stopped {:?} at t = {:.6}", outcome.reason, outcome.state.t);
    print!("{}", check_width_ratio(&records, 1.1 * records[0].width_ratio)?);
    Ok(())
}
