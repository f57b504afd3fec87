//! Three-component reconstruction: split an elliptic field into the
//! admissible pair (f1, f2), reassemble the unit map from the two charts,
//! and confirm the result matches the direct stereographic projection.

use nvsigma::elliptic::{fractional_linear, instanton_field, EllipticLattice, InstantonData};
use nvsigma::harmonic::{o3_reconstruct, potential, stereographic};
use nvsigma::torus::TorusShape;
use nvsigma::Complex64;

fn cc(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() -> nvsigma::Result<()> {
    let lat = EllipticLattice::new(cc(0.0, 1.0))?;
    let data = InstantonData::new(
        cc(1.1, -0.3),
        vec![cc(0.23, 0.17), cc(0.68, 0.59)],
        vec![cc(0.21, 0.44), cc(0.70, 0.32)],
    )?;
    let shape = TorusShape::new(lat.tau(), 96, 96)?;
    let (v, vinv) = instanton_field(&lat, &data, shape)?;
    let m = stereographic(&v, &v.conj())?;

    // r1^2 + r2^2 + r3^2 = 1 fixes the chart weights; f1, f2 are the
    // symmetric and antisymmetric combinations of the field and its
    // reciprocal, scaled into the constraint r1^2 f1^2 + r2^2 f2^2 = 1.
    let (r1, r2, r3) = (cc(0.6, 0.0), cc(0.48, 0.0), cc(0.64, 0.0));
    let f1 = v.add(&vinv).scaled(cc(0.5, 0.0) / r1);
    let f2 = v.sub(&vinv).scaled(cc(0.0, -0.5) / r2);

    let (report, rec) = o3_reconstruct(&f1, &f2, r1, r2, r3)?;
    println!("constraint defect      {:.3e}", report.fg1_defect);
    println!("gluing c discrepancy   {:.3e}", report.c_discrepancy);
    println!("unit-norm defect       {:.3e}", report.unit_defect);
    println!("north-chart defect     {:.3e}", report.v_defect);
    println!("south-chart defect     {:.3e}", report.vinv_defect);
    assert!(report.pass(), "the two-chart chain closes");

    let worst = (0..3)
        .map(|i| rec.component(i).sub(m.component(i)).sup_norm())
        .fold(0.0, f64::max);
    println!("chart vs stereographic {worst:.3e}");
    assert!(worst < 1e-8, "both constructions give the same map");

    // The Schroedinger potential only sees the map modulo target rotations;
    // the rotation pair must sit on the unit sphere of C^2.
    let u = potential(&m);
    let (ra, rb) = (cc(0.8, 0.1), cc(0.55, -0.2));
    let n = (ra.norm_sqr() + rb.norm_sqr()).sqrt();
    let rot = fractional_linear(&v, ra / n, rb / n)?;
    let urot = potential(&stereographic(&rot, &rot.conj())?);
    let dev = u.sub(&urot).sup_norm() / u.sup_norm();
    println!("rotation invariance    {dev:.3e}");
    assert!(dev < 1e-8, "the potential is a rotation invariant");
    Ok(())
}
