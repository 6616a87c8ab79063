//! Runs the quick verification suites on the circle, as the `verify`
//! subcommand would.

use gaussflow::verify::{run_suite, VerifyOptions};

fn main() -> gaussflow::error::Result<()> {
    let mut all = true;
    for suite in ["ball-exact", "rescaling", "kaltenbach", "g-properties"] {
        let report = run_suite(suite, &VerifyOptions::new(2))?;
        all &= report.passed();
        print!("{report}");
    }
    println!("{}", if all { "all suites passed" } else { "some suites failed" });
    Ok(())
}
