//! Weierstrass functions on a skew lattice: Legendre relation, the
//! differential equation of wp, half-period values as roots of the cubic,
//! and the sigma-quotient form of wp differences.

use nvsigma::elliptic::EllipticLattice;
use nvsigma::Complex64;
use std::f64::consts::PI;

fn cc(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() -> nvsigma::Result<()> {
    let tau = cc(0.21, 1.05);
    let lat = EllipticLattice::new(tau)?;
    println!("tau = {tau}");
    println!("g2 = {:.10}", lat.g2());
    println!("g3 = {:.10}", lat.g3());

    // eta1 tau - eta2 = pi i (with periods 1 and tau).
    let legendre = lat.eta1() * tau - lat.eta2() - cc(0.0, PI);
    println!("Legendre defect      {:.3e}", legendre.norm());
    assert!(legendre.norm() < 1e-12, "eta1 tau - eta2 = pi i");

    // (wp')^2 = 4 wp^3 - g2 wp - g3 at a generic point.
    let z = cc(0.31, 0.27);
    let p = lat.wp(z)?;
    let dp = lat.wp_prime(z)?;
    let ode = dp * dp - (4.0 * p * p * p - lat.g2() * p - lat.g3());
    println!("wp ODE defect        {:.3e}", ode.norm() / p.norm().powi(3).max(1.0));
    assert!(ode.norm() < 1e-9 * p.norm().powi(3).max(1.0), "wp solves its cubic ODE");

    // wp at the three half periods gives the roots of 4t^3 - g2 t - g3.
    for j in 1..=3 {
        let e = lat.wp(lat.half_period(j))?;
        let val = 4.0 * e * e * e - lat.g2() * e - lat.g3();
        println!("  e_{j} = {:+.8} {:+.8}i   cubic value {:.3e}", e.re, e.im, val.norm());
        assert!(val.norm() < 1e-9 * e.norm().powi(3).max(1.0), "e_{j} is a root");
        let de = lat.wp_prime(lat.half_period(j))?;
        assert!(de.norm() < 1e-8, "wp' vanishes at the half period, got {:.3e}", de.norm());
    }

    // wp(a) - wp(b) = -sigma(a+b) sigma(a-b) / (sigma(a)^2 sigma(b)^2).
    let (a, b) = (cc(0.24, 0.11), cc(-0.13, 0.42));
    let lhs = lat.wp(a)? - lat.wp(b)?;
    let rhs = -lat.sigma(a + b) * lat.sigma(a - b)
        / (lat.sigma(a) * lat.sigma(a) * lat.sigma(b) * lat.sigma(b));
    println!("sigma-quotient form  {:.3e}", (lhs - rhs).norm() / lhs.norm());
    assert!((lhs - rhs).norm() < 1e-10 * lhs.norm(), "wp difference factors through sigma");

    // sigma is odd and has a simple zero: sigma(z)/z -> 1.
    let tiny = cc(1e-5, 0.7e-5);
    let slope = lat.sigma(tiny) / tiny;
    println!("sigma slope at 0     {:.12}", slope.re);
    assert!((slope - 1.0).norm() < 1e-9, "sigma is normalized to unit slope");
    Ok(())
}
