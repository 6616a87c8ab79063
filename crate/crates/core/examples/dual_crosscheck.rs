//! Evolves the same ellipse with the primal flow and with the flow of its
//! polar dual, then reports how far apart the two primal bodies end up.

use gaussflow::flow::{cross_check_dual, FlowConfig, FlowDirection};
use gaussflow::verify::ellipse;

fn main() -> gaussflow::error::Result<()> {
    let cfg = FlowConfig::new(0.5, FlowDirection::ExpandingPrimal).with_t_end(0.5);
    let mut previous: Option<f64> = None;
    for res in [128, 256, 512] {
        let body = ellipse(1.0, 1.5, res)?;
        let defect = cross_check_dual(&cfg, &body, &[0.25, 0.5])?;
        match previous {
            Some(prev) => println!("N={res:4}: relative defect {defect:.3e} (x{:.1} smaller)", prev / defect),
            None => println!("N={res:4}: relative defect {defect:.3e}"),
        }
        previous = Some(defect);
    }
    Ok(())
}
