//! Transform from zero to infinity, with the intermediate series.

use local_mellin::cli::parse_series;
use local_mellin::mellin::{mellin_0_inf, trace_0_inf};
use local_mellin::{ConnectionObject, FieldConfig, Object, Point, TransformOptions, Var};

fn main() -> local_mellin::Result<()> {
    let cfg = FieldConfig::exact();
    let opts = TransformOptions::default();
    for text in ["-z^(-1)", "2*z^(-1)", "-z^(-2)", "-8*z^(-3/2) + z^(-1)"] {
        let f = parse_series(text, &cfg, Var::Z)?;
        let tr = trace_0_inf(&f, &opts)?;
        let d = mellin_0_inf(&ConnectionObject::single(Point::Zero, f.clone()), &opts)?;
        println!("f = {}", f);
        println!("  theta(z) = {}", tr.theta);
        println!("  z(theta) = {}", tr.h);
        println!("  g        = {}", tr.g);
        println!("  class    = {}", Object::DiffOp(d));
    }
    Ok(())
}
