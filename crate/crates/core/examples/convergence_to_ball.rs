//! Expands an ellipse until its area has grown 10^4-fold, then shows the
//! volume-normalised body approaching the unit disc.

use gaussflow::config::BodySpec;
use gaussflow::diagnostics::trajectory_report;
use gaussflow::flow::{FlowConfig, FlowDirection};
use gaussflow::sphere::build_grid;
use gaussflow::verify::recorded_run;

fn main() -> gaussflow::error::Result<()> {
    let p = 0.5;
    let body = BodySpec::Ellipsoid { axes: vec![1.0, 2.0] }.build(build_grid(2, &[256])?)?;
    let cfg = FlowConfig::new(p, FlowDirection::ExpandingPrimal).with_volume_growth(1e4);
    let (records, outcome) = recorded_run(body, &cfg, &[], 200)?;

    println!("{:>12} {:>12} {:>12} {:>12}", "t", "volume", "s_max/s_min", "|s~ - 1|");
    for r in &records {
        println!("{:>12.4} {:>12.4e} {:>12.8} {:>12.3e}", r.t, r.volume, r.ratio, r.dev_unit);
    }
    println!("stopped: {:?} after {} steps\n", outcome.reason, outcome.state.step_count);
    print!("{}", trajectory_report(&records, Some(p), true)?);
    Ok(())
}
