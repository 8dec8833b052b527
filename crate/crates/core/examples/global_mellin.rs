//! Global Mellin transform on the Weyl algebra: `z -> P`, `D -> -(1/P) n`.

use local_mellin::weyl::{global_mellin, parse_domain};

fn main() -> local_mellin::Result<()> {
    for text in ["z", "z^(-1)", "D", "D*z - z*D", "z*z*D", "(z*D)^2 + z", "z^2*D^2 - 1/2"] {
        let e = parse_domain(text)?;
        println!("{:>14}  ->  {}", e.to_string(), global_mellin(&e));
    }
    Ok(())
}
