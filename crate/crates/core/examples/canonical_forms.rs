//! Canonical representatives, Galois orbits and isomorphism of objects.

use local_mellin::cli::parse_series;
use local_mellin::objects::{galois_act, galois_equivalent, is_primitive, iso_witness, Flavor};
use local_mellin::{Component, ConnectionObject, DiffOpObject, FieldConfig, Object, Point, Var};

fn main() -> local_mellin::Result<()> {
    let cfg = FieldConfig::exact();
    let f = parse_series("2*z^(-3/2) + z^(-1/2) + 7/2", &cfg, Var::Z)?;
    let e = ConnectionObject::single(Point::Zero, f.clone()).canonicalize();
    println!("E_f with f = {}\n  canonical: {}", f, Object::Connection(e.clone()));
    println!("  primitive in R_2: {}", is_primitive(&e.components[0].series, 2, Flavor::Connection)?);

    let moved = galois_act(&e.components[0].series, 1)?;
    println!("  Galois conjugate: {}", moved);
    println!("  same orbit: {:?}", galois_equivalent(&e.components[0].series, &moved)?);

    let g = parse_series("theta^(-1) + 1 + theta", &cfg, Var::Theta)?;
    let d = DiffOpObject::new(vec![Component::new(g.clone(), 2)]).canonicalize()?;
    println!("D_g (x) T_2 with g = {}\n  canonical: {}", g, Object::DiffOp(d));

    let other = ConnectionObject::single(Point::Zero, moved).canonicalize();
    let w = iso_witness(&Object::Connection(e), &Object::Connection(other))?;
    println!("isomorphism witness (component, component, j): {:?}", w);
    Ok(())
}
