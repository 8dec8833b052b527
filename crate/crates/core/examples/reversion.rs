//! Compositional inverse: solve `s(z) = theta` for `z` as a series in `theta`.

use local_mellin::cli::parse_series;
use local_mellin::{FieldConfig, PuiseuxSeries, Var};

fn main() -> local_mellin::Result<()> {
    let cfg = FieldConfig::exact();
    for text in ["z + z^2 + O(z^6)", "z^2 + z^3 + O(z^5)", "4*z^2 - z^3 + O(z^6)"] {
        let s = parse_series(text, &cfg, Var::Z)?;
        let h = s.revert(Var::Theta, 0)?;
        let check = s.substitute(&h)? - PuiseuxSeries::monomial(Var::Theta, 1.into(), 1, 1);
        println!("s = {}\n  z = {}\n  s(z(theta)) - theta = {}", s, h, check);
    }
    Ok(())
}
