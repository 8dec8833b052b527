//! Operator orders from the closed forms, cross-checked on a window.

use local_mellin::cli::parse_series;
use local_mellin::objects::{order_report, rational, OrderExpr};
use local_mellin::oracle::{OpSpec, Window, WindowOperator};
use local_mellin::{ConnectionObject, DiffOpObject, FieldConfig, Object, Point, Var};

fn main() -> local_mellin::Result<()> {
    let cfg = FieldConfig::exact();
    let eps = rational(1, 2);
    let f = parse_series("z^(-2)", &cfg, Var::Z)?;
    let e = Object::Connection(ConnectionObject::single(Point::Zero, f.clone()));
    for expr in [OrderExpr::Nabla, OrderExpr::ZNabla, OrderExpr::ZNablaInverse] {
        let rep = order_report(&e, expr, Some(&eps))?;
        println!("{:?} on E_f: order {}, norm {}", expr, rep.orders[0], rep.norms.unwrap()[0]);
    }
    let measured = WindowOperator::build(&OpSpec::Nabla(f), Window::default_for(1))?.measured_order();
    println!("window-measured order of nabla: {:?}", measured.map(|o| o.to_string()));

    let g = parse_series("theta^(1/2)", &cfg, Var::Theta)?;
    let d = Object::DiffOp(DiffOpObject::single(g));
    for expr in [OrderExpr::Phi, OrderExpr::ThetaPhiInverse] {
        let rep = order_report(&d, expr, Some(&eps))?;
        println!("{:?} on D_g: order {}, norm {}", expr, rep.orders[0], rep.norms.unwrap()[0]);
    }
    Ok(())
}
