//! Pseudo-differential operator arithmetic: composition, adjoints, residues
//! and the inversion of monic operators, all on one skew grid.

use nvsigma::pdo::PseudoDiffOp;
use nvsigma::torus::{GridFunction, TorusShape};
use nvsigma::Complex64;
use std::f64::consts::PI;

fn smooth(shape: TorusShape, ax: f64, ay: f64) -> GridFunction {
    GridFunction::from_fn(shape, move |x, y| {
        Complex64::new(
            ax * (2.0 * PI * x).cos() + ay * (2.0 * PI * y).sin(),
            0.3 * ax * (2.0 * PI * (x + y)).sin(),
        )
    })
}

fn main() -> nvsigma::Result<()> {
    let shape = TorusShape::new(Complex64::new(0.2, 1.0), 32, 32)?;
    let len = 7;

    // A = d^2 + a, B = d^{-1} + b d^{-2}: a differential and a purely
    // integral operator.
    let a = PseudoDiffOp::dz_pow(shape, 2, len)
        .add(&PseudoDiffOp::multiplication(&smooth(shape, 0.4, 0.1), len));
    let b = PseudoDiffOp::dz_pow(shape, -1, len)
        .add(&PseudoDiffOp::dz_pow(shape, -2, len).compose(&PseudoDiffOp::multiplication(
            &smooth(shape, 0.2, 0.5),
            len,
        )));

    let ab = a.compose(&b);
    let ba = b.compose(&a);
    println!("orders: A top {}, B top {}, AB top {}", a.top(), b.top(), ab.top());

    // Adjoint is an anti-homomorphism: (AB)* = B* A*.
    let anti = ab.adjoint().sub(&b.adjoint().compose(&a.adjoint())).sup_norm();
    let scale = ab.sup_norm();
    println!("(AB)* - B*A*                     {:.3e}  (scale {scale:.2e})", anti);
    assert!(anti < 1e-10 * scale, "adjoint reverses products");

    // res_d A = coefficient of d^{-1}; the adjoint flips its sign.
    let res = ab.res_partial();
    let res_adj = ab.adjoint().res_partial();
    let flip = res.add(&res_adj).sup_norm();
    println!("res(A) + res(A*)                 {flip:.3e}");
    assert!(flip < 1e-10 * res.sup_norm().max(1.0), "residue is odd under adjoint");

    // The commutator of two operators has zero-mean residue: the residue of
    // a commutator is a total derivative.
    let comm_res = ab.sub(&ba).res_partial().mean();
    println!("mean res([A, B])                 {:.3e}", comm_res.norm());
    assert!(comm_res.norm() < 1e-11 * scale, "commutator residues integrate to zero");

    // Monic first-order operator inverts within the truncation.
    let one_plus = PseudoDiffOp::identity(shape, len)
        .add(&PseudoDiffOp::dz_pow(shape, -1, len).compose(&PseudoDiffOp::multiplication(
            &smooth(shape, 0.3, 0.2),
            len,
        )));
    let inv = one_plus.invert_unit()?;
    let unit_defect = one_plus
        .compose(&inv)
        .sub(&PseudoDiffOp::identity(shape, len))
        .sup_norm();
    println!("|E E^-1 - 1| within truncation   {unit_defect:.3e}");
    assert!(unit_defect < 1e-11, "unit-leading operators invert order by order");
    Ok(())
}
