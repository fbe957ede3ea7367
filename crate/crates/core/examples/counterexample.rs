//! A single non-submodular activation is enough to make influence
//! non-submodular.
//!
//! ```bash
//! cargo run --example counterexample
//! ```

use threshold_influence::coupling::{build_counterexample, SetFunctionDocument};

fn main() -> threshold_influence::Result<()> {
    // AND of two inputs
    let f = SetFunctionDocument { nodes: vec!["x".into(), "y".into()], values: vec![0.0, 0.0, 0.0, 1.0] };
    let ce = build_counterexample(&f, &["x".into()], &["y".into()])?;
    println!("sigma(A) + sigma(B)     = {} + {} = {}", ce.sigma_a, ce.sigma_b, ce.sigma_a + ce.sigma_b);
    println!(
        "sigma(A∩B) + sigma(A∪B) = {} + {} = {}",
        ce.sigma_intersection,
        ce.sigma_union,
        ce.sigma_intersection + ce.sigma_union
    );
    println!("gap {}", ce.gap());
    println!("{}", serde_json::to_string_pretty(&ce.network.to_document()).unwrap());
    Ok(())
}
