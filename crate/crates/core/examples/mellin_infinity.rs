//! Transform from infinity to infinity; outputs have negative order.

use local_mellin::cli::parse_series;
use local_mellin::mellin::{check_membership, mellin_inf_inf, Target};
use local_mellin::{ConnectionObject, FieldConfig, Object, Point, TransformOptions, Var};

fn main() -> local_mellin::Result<()> {
    let cfg = FieldConfig::exact();
    for text in ["-zeta^(-1)", "-zeta^(-2)", "-zeta^(-1) + 1/3", "-27*zeta^(-3/2)"] {
        let f = parse_series(text, &cfg, Var::Zeta)?;
        let d = mellin_inf_inf(&ConnectionObject::single(Point::Infinity, f.clone()), &TransformOptions::default())?;
        println!("f = {}  ->  {}  (in N<0: {})", f, Object::DiffOp(d.clone()), check_membership(&d, &Target::Negative));
    }
    Ok(())
}
