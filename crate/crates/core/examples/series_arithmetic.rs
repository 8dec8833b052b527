//! Truncated Puiseux series: products, inverses, fractional powers and the
//! difference automorphism `theta -> theta / (1 + theta)`.

use local_mellin::cli::parse_series;
use local_mellin::puiseux::{Exp, PhiDirection};
use local_mellin::{FieldConfig, Var};

fn main() -> local_mellin::Result<()> {
    let cfg = FieldConfig::exact();
    let a = parse_series("1 + theta^(1/2) + O(theta^3)", &cfg, Var::Theta)?;
    let b = parse_series("theta^(-1) - 2", &cfg, Var::Theta)?;
    println!("a       = {}", a);
    println!("b       = {}", b);
    println!("a * b   = {}", &a * &b);
    println!("1 / a   = {}", a.invert()?);
    println!("a^(1/2) = {}", a.pow_rational(Exp::new(1, 2), 0)?);
    println!("phi(a)  = {}", a.phi(PhiDirection::Forward)?);
    println!("d/dθ a  = {}", a.derivative());
    Ok(())
}
