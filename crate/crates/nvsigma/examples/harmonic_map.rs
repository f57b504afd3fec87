//! From elliptic data to a harmonic map: build the degree-2 quotient field,
//! project it to the sphere, and verify charge, potential and the ladder of
//! moment identities.

use nvsigma::ba::bloch_wave;
use nvsigma::elliptic::{instanton_field, EllipticLattice, InstantonData};
use nvsigma::harmonic::{
    constraint_pairing, instanton_charge, moments, potential, schrodinger_residual, stereographic,
};
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
    let shape = TorusShape::new(lat.tau(), 128, 128)?;
    let (v, _) = instanton_field(&lat, &data, shape)?;
    let m = stereographic(&v, &v.conj())?;

    println!("unit-norm defect      {:.3e}", m.unit_defect());
    assert!(m.unit_defect() < 1e-10, "the map lands on the sphere");

    let q = instanton_charge(&m)?;
    println!("topological charge    {q:.10}");
    assert!((q - 2.0).abs() < 1e-5, "two zeros give charge 2");

    let u = potential(&m);
    let res = schrodinger_residual(&m, &u);
    println!("Schroedinger residual {res:.3e}");
    assert!(res < 1e-8, "every component solves the same scalar equation");

    // Moments (q, d^i q) vanish for i >= 1; the norm (q, q) stays at 1.
    let table = moments(&m, 6);
    println!("moment (q, q) - 1     {:.3e}", table.entry(0).map(|v| v - 1.0).sup_norm());
    for i in 1..=6 {
        let scale = (0..3)
            .map(|c| m.component(c).dz_pow(i as u32).sup_norm())
            .fold(1.0, f64::max);
        let t = table.entry(i).sup_norm() / scale;
        println!("  T_{i} (normalized)   {t:.3e}");
        assert!(t < 1e-7, "moment {i} vanishes on a solution");
    }

    // Pairing against powers of the dressed operator of the wave built from
    // the map's own potential.
    let w = bloch_wave(&u, 6)?;
    for n in 1..=2 {
        let p = constraint_pairing(&m, &w, n, 5)?;
        println!("  pairing n={n}         {p:.3e}");
        assert!(p < 1e-6, "odd-power pairing vanishes");
    }
    Ok(())
}
