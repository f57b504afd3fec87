//! Spectral curves of elliptic particle systems: fit the integrals of
//! motion from the Lax determinant, check the curve involution at a turning
//! configuration, and recover the constrained four-particle cubic whose
//! branch slopes are the half-period values of wp.

use nvsigma::ecm::{
    branch_cubic, branch_exponents, c2_wp_slope, fit_integrals, involution_residual,
    turning_constraints, ECMConfig, ECMIntegrals,
};
use nvsigma::elliptic::EllipticLattice;
use nvsigma::Complex64;

fn cc(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() -> nvsigma::Result<()> {
    let lat = EllipticLattice::new(cc(0.0, 1.0))?;

    // Two particles at rest at +/- 0.3: a turning configuration.
    let cfg = ECMConfig::turning(&lat, vec![cc(0.3, 0.0), cc(-0.3, 0.0)])?;
    let (ints, fit) = fit_integrals(&lat, &cfg, -1)?;
    println!("N = 2 turning pair");
    println!("  I = {:?}", ints.as_slice());
    println!("  fit residual        {fit:.3e}");
    assert!(fit < 1e-9, "sigma representation matches the determinant");
    println!("  odd integrals       {:.3e}", ints.odd_norm());
    assert!(ints.odd_norm() < 1e-10, "momentum-free data has even integrals only");
    let inv = involution_residual(&lat, &ints)?;
    println!("  involution residual {inv:.3e}");
    assert!(inv < 1e-9, "the curve carries (k, alpha) -> (-k, -alpha)");

    let table = turning_constraints(&lat, &ints, 1)?;
    println!("  d_p F(0,0) = {:.12}", table.entry(0, 1).re);
    assert!((table.entry(0, 1) - 2.0).norm() < 1e-10, "center slope is exactly 2");

    // Mean-field coefficient: the wp(alpha) slope of c2 counts the pairs.
    for n in [2usize, 3, 4] {
        let z: Vec<Complex64> = (0..n).map(|i| cc(0.17 + 0.23 * i as f64, 0.05)).collect();
        let rho: Vec<Complex64> = (0..n).map(|i| cc(0.1 * i as f64, -0.02)).collect();
        let cfg = ECMConfig::new(&lat, z, rho)?;
        let (slope, cond) = c2_wp_slope(&lat, &cfg)?;
        let expect = -((n * (n - 1)) as f64) / 2.0;
        println!("  N={n}: c2 wp-slope {:+.10}  (expected {expect}, cond {cond:.1e})", slope.re);
        assert!((slope - expect).norm() < 1e-8, "slope counts -N(N-1)/2");
        // Branch exponents at alpha -> 0: one branch at 1 - N, the rest at 1.
        let a = branch_exponents(&lat, &cfg)?;
        let shown: Vec<String> = a.iter().map(|v| format!("{:+.3}", v.re)).collect();
        println!("       branch exponents [{}]", shown.join(", "));
        assert!((a[0].re - (1.0 - n as f64)).abs() < 0.05, "one branch adds a point");
    }

    // Four particles on the constraint locus: I = (0, 0, 0, g2/2) makes the
    // slope cubic 4t^3 - g2 t - g3 with the wp half-period values as roots.
    let ints4 = ECMIntegrals::new(vec![
        Complex64::default(),
        Complex64::default(),
        Complex64::default(),
        lat.g2() / 2.0,
    ])?;
    let cubic = branch_cubic(&lat, &ints4)?;
    println!("N = 4 constrained cubic");
    println!("  b = {:?}", cubic.b);
    for root in cubic.roots {
        let best = (1..=3)
            .map(|j| (lat.wp(lat.half_period(j)).unwrap() - root).norm())
            .fold(f64::INFINITY, f64::min)
            / root.norm().max(1.0);
        println!("  root {:+.8} {:+.8}i  -> nearest e_j defect {best:.3e}", root.re, root.im);
        assert!(best < 1e-8, "each branch slope is a half-period wp value");
    }
    Ok(())
}
