//! Fixed-precision complex coefficients for inputs whose roots are irrational.

use local_mellin::cli::parse_series;
use local_mellin::mellin::{inverse_mellin_0_inf, mellin_0_inf};
use local_mellin::{ConnectionObject, FieldConfig, Object, Point, TransformOptions, Var};

fn main() -> local_mellin::Result<()> {
    let opts = TransformOptions::default();
    let text = "2*z^(-2)";
    let exact = FieldConfig::exact();
    let e = ConnectionObject::single(Point::Zero, parse_series(text, &exact, Var::Z)?);
    if let Err(err) = mellin_0_inf(&e, &opts) {
        println!("exact mode: {}", err);
    }
    let cfg = FieldConfig::approx();
    let e = ConnectionObject::single(Point::Zero, parse_series(text, &cfg, Var::Z)?);
    let d = mellin_0_inf(&e, &opts)?;
    println!("approx mode ({} bits, tol {:e}): {}", cfg.precision_bits, cfg.tolerance, Object::DiffOp(d.clone()));
    println!("back: {}", Object::Connection(inverse_mellin_0_inf(&d, &opts)?));
    Ok(())
}
