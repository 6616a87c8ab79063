//! Samples random eigenvalue tuples and checks the listed properties of the
//! speed function `G(λ) = (λ_1 ⋯ λ_{n-1})^β`.

use gaussflow::verify::{g_properties, VerifyOptions};

fn main() -> gaussflow::error::Result<()> {
    for n in [2, 3] {
        let opts = VerifyOptions { trials: 2000, seed: 11, ..VerifyOptions::new(n) }.with_p(0.5);
        print!("{}", g_properties(&opts)?);
    }
    Ok(())
}
