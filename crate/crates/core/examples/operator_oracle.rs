//! Finite-window operator checks of the identities behind the transforms.

use local_mellin::cli::parse_series;
use local_mellin::oracle::{
    check_commutation, check_expansion_10_3, check_operator_root_fractional, check_operator_root_integer,
    check_transform_class, OpSpec, Window, WindowOperator, WindowVector,
};
use local_mellin::{FieldConfig, Point, TransformOptions, Var};

fn main() -> local_mellin::Result<()> {
    let cfg = FieldConfig::exact();
    let f = parse_series("-z^(-1)", &cfg, Var::Z)?;

    let w = Window::default_for(1);
    let theta = WindowOperator::build(&OpSpec::ZNabla(f.clone()), w)?.inverse()?.neg();
    for n in 0..3 {
        let v = theta.apply(&WindowVector::basis(n, &w));
        let head: Vec<String> = v.entries().iter().take(3).map(|(k, c)| format!("{} z^{}", c, k)).collect();
        println!("theta(z^{}) = {} + ...", n, head.join(" + "));
    }

    println!("{}", check_commutation(&f, None)?);
    println!("{}", check_operator_root_integer(&parse_series("z^(-2)", &cfg, Var::Z)?, 1, 1, 3, None)?);
    println!("{}", check_operator_root_fractional(&parse_series("2*z^(-1) + z^(-1/2)", &cfg, Var::Z)?, 1, 2, 2, None)?);
    println!("{}", check_expansion_10_3(&parse_series("-z^(-2)", &cfg, Var::Z)?, None)?);
    println!("{}", check_transform_class(&Point::Zero, &parse_series("1/2*z^(-1)", &cfg, Var::Z)?, &TransformOptions::default())?);
    Ok(())
}
