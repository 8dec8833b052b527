//! Inverse transforms and forward/inverse roundtrips on a direct sum.

use local_mellin::cli::parse_series;
use local_mellin::mellin::{inverse_mellin_0_inf, mellin_0_inf};
use local_mellin::objects::iso_equivalent;
use local_mellin::{Component, ConnectionObject, DiffOpObject, FieldConfig, Object, Point, TransformOptions, Var};

fn main() -> local_mellin::Result<()> {
    let cfg = FieldConfig::exact();
    let opts = TransformOptions::default();
    let d = DiffOpObject::single(parse_series("theta - theta^2", &cfg, Var::Theta)?);
    println!("inverse(theta - theta^2) = {}", Object::Connection(inverse_mellin_0_inf(&d, &opts)?));

    let e = ConnectionObject::new(
        Point::Zero,
        vec![
            Component::new(parse_series("-z^(-1) + 1/2", &cfg, Var::Z)?, 2),
            Component::new(parse_series("-4*z^(-2) + z^(-1)", &cfg, Var::Z)?, 1),
            Component::new(parse_series("z^(-1/3)", &cfg, Var::Z)?, 3),
        ],
    );
    let fwd = mellin_0_inf(&e, &opts)?;
    let back = inverse_mellin_0_inf(&fwd, &opts)?;
    println!("E:\n{}\nM(E):\n{}\nM^-1(M(E)):\n{}", Object::Connection(e.clone()), Object::DiffOp(fwd), Object::Connection(back.clone()));
    println!("isomorphic: {}", iso_equivalent(&Object::Connection(e), &Object::Connection(back))?);
    Ok(())
}
