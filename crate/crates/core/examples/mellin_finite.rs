//! Transform from a finite point `x` to infinity: regular and irregular cases.

use local_mellin::cli::parse_series;
use local_mellin::mellin::mellin_x_inf;
use local_mellin::{Coefficient, ConnectionObject, Error, FieldConfig, Object, Point, TransformOptions, Var};

fn main() -> local_mellin::Result<()> {
    let cfg = FieldConfig::exact();
    let opts = TransformOptions::default();
    let cases = [("1/3", 2), ("-1/2", 1), ("-zx^(-1)", 1), ("-2*zx^(-2) + zx^(-1)", 4)];
    for (text, x) in cases {
        let f = parse_series(text, &cfg, Var::Zx)?;
        let e = ConnectionObject::single(Point::Finite(Coefficient::from_int(x)), f.clone());
        let d = mellin_x_inf(&e, &opts)?;
        println!("x = {}, f = {}  ->  {}", x, f, Object::DiffOp(d));
    }
    let e = ConnectionObject::single(Point::Finite(1.into()), parse_series("2", &cfg, Var::Zx)?);
    match mellin_x_inf(&e, &opts) {
        Err(Error::HorizontalSection) => println!("f = 2 has a horizontal section; no transform"),
        other => println!("unexpected: {:?}", other),
    }
    Ok(())
}
