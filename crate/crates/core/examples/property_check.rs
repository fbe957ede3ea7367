//! Checking activations for monotonicity, submodularity and the stronger
//! normalized condition, and influence itself for submodularity.
//!
//! ```bash
//! cargo run --example property_check
//! ```

use threshold_influence::influence::ExactOracle;
use threshold_influence::network::{check_properties, check_set_function, load_network_file, LoadOptions};

fn main() -> threshold_influence::Result<()> {
    for name in ["diamond.json", "and.json"] {
        let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        let net = load_network_file(path, LoadOptions::default())?;
        println!("{name}");
        for v in 0..net.n() {
            let r = check_properties(net.activation(v))?;
            println!(
                "  {:<3} {:<8} monotone {:<5} submodular {:<5} normalized {}",
                net.label(v),
                net.activation(v).kind(),
                r.is_monotone(),
                r.is_submodular(),
                r.is_normalized_submodular()
            );
        }
        let sigma = ExactOracle::new(&net)?.sigma_table(net.weight())?;
        let r = check_set_function(net.n(), |m| sigma[m as usize])?;
        match r.submodular {
            None => println!("  influence is submodular"),
            Some(v) => println!(
                "  influence is not submodular: base {} extended {} element {}",
                net.format_set(&threshold_influence::NodeSet::from_mask(net.n(), v.base)),
                net.format_set(&threshold_influence::NodeSet::from_mask(net.n(), v.extended)),
                net.label(v.element)
            ),
        }
    }
    Ok(())
}
