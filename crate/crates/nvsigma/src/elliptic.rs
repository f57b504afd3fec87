//! Weierstrass functions on the lattice Z + tau Z, elliptic quotient fields,
//! and fractional-linear target rotations.
//!
//! sigma is evaluated through the first Jacobi theta function with the
//! standard exponential prefactor,
//!
//! ```text
//!   sigma(z) = exp(eta1 z^2) theta1(pi z, q) / (pi theta1'(0, q)),
//!   q = exp(i pi tau),
//! ```
//!
//! after reducing the argument to the centered fundamental cell with the
//! quasi-periodicity factors, which keeps every evaluation numerically small.
//! zeta = sigma'/sigma and wp = -zeta' come from the same theta logarithmic
//! derivatives.  The truncated lattice product appears only in tests, as an
//! independent oracle.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::torus::GridFunction;
use crate::{Error, Result};

const PI: f64 = std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Lattice constants for Z + tau Z, computed once at construction.
#[derive(Clone, Debug)]
pub struct EllipticLattice {
    tau: Complex64,
    eta1: Complex64,
    eta2: Complex64,
    g2: Complex64,
    g3: Complex64,
    theta1_prime0: Complex64,
}

impl EllipticLattice {
    pub fn new(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.is_finite() {
            return Err(Error::BadShape(format!("Im tau must be positive, got {tau}")));
        }
        // theta1'(0) and theta1'''(0) give eta1 = -pi^2 theta1'''(0) / (6 theta1'(0)).
        let (d1, d3) = theta1_zero_derivs(tau);
        let eta1 = -(PI * PI / 6.0) * d3 / d1;
        // eta2 = zeta(tau/2), evaluated directly from the theta logarithmic
        // derivative so the Legendre relation below is a genuine cross-check.
        let w = PI * tau / 2.0;
        let th = theta1_derivs(tau, w);
        let eta2 = eta1 * tau + PI * th[1] / th[0];
        let legendre = eta1 * tau - eta2 - c(0.0, PI);
        if legendre.norm() > 1e-10 {
            return Err(Error::BadShape(format!(
                "Legendre relation violated by {:.3e}; theta series inconsistent at tau={tau}",
                legendre.norm()
            )));
        }
        // Eisenstein q-series in the square nome.
        let qt = (c(0.0, 2.0 * PI) * tau).exp();
        let mut e4 = Complex64::new(1.0, 0.0);
        let mut e6 = Complex64::new(1.0, 0.0);
        let mut qn = Complex64::new(1.0, 0.0);
        for n in 1..400 {
            qn *= qt;
            let nf = n as f64;
            if 504.0 * nf.powi(5) * qn.norm() < 1e-16 {
                break;
            }
            let frac = qn / (Complex64::new(1.0, 0.0) - qn);
            e4 += 240.0 * nf.powi(3) * frac;
            e6 -= 504.0 * nf.powi(5) * frac;
        }
        let g2 = 4.0 * PI.powi(4) / 3.0 * e4;
        let g3 = 8.0 * PI.powi(6) / 27.0 * e6;
        Ok(Self { tau, eta1, eta2, g2, g3, theta1_prime0: d1 })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    pub fn eta2(&self) -> Complex64 {
        self.eta2
    }

    pub fn g2(&self) -> Complex64 {
        self.g2
    }

    pub fn g3(&self) -> Complex64 {
        self.g3
    }

    /// Half-periods omega_1 = 1/2, omega_2 = tau/2, omega_3 = (1+tau)/2.
    pub fn half_period(&self, j: usize) -> Complex64 {
        match j {
            1 => c(0.5, 0.0),
            2 => self.tau / 2.0,
            3 => (self.tau + 1.0) / 2.0,
            _ => panic!("half-period index must be 1, 2 or 3"),
        }
    }

    /// zeta at the half-periods: eta1, eta2, eta1 + eta2.
    pub fn eta(&self, j: usize) -> Complex64 {
        match j {
            1 => self.eta1,
            2 => self.eta2,
            3 => self.eta1 + self.eta2,
            _ => panic!("half-period index must be 1, 2 or 3"),
        }
    }

    /// Split z = z0 + m + n tau with z0 in the centered cell (lattice
    /// coordinates in [-1/2, 1/2)).
    pub fn reduce(&self, z: Complex64) -> (Complex64, i64, i64) {
        let beta = z.im / self.tau.im;
        let alpha = z.re - beta * self.tau.re;
        let m = (alpha + 0.5).floor() as i64;
        let n = (beta + 0.5).floor() as i64;
        let z0 = z - m as f64 - self.tau * n as f64;
        (z0, m, n)
    }

    /// Distance to the nearest lattice point, in the |.| metric of C.
    pub fn lattice_distance(&self, z: Complex64) -> f64 {
        let (z0, _, _) = self.reduce(z);
        // The centered representative may still not be the closest in |.|;
        // check the neighbouring cells.
        let mut best = f64::INFINITY;
        for dm in -1..=1 {
            for dn in -1..=1 {
                best = best.min((z0 - dm as f64 - self.tau * dn as f64).norm());
            }
        }
        best
    }

    fn quasi_factor(&self, z0: Complex64, m: i64, n: i64) -> Complex64 {
        // sigma(z0 + m + n tau) = sign * exp(w (z0 + (m + n tau)/2)) sigma(z0)
        // with w = 2 m eta1 + 2 n eta2 and sign = (-1)^{m + n + mn}.
        let w = 2.0 * m as f64 * self.eta1 + 2.0 * n as f64 * self.eta2;
        let period = m as f64 + self.tau * n as f64;
        let sign = if (m + n + m * n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sign * (w * (z0 + period / 2.0)).exp()
    }

    fn sigma_cell(&self, z0: Complex64) -> Complex64 {
        let th = theta1_derivs(self.tau, PI * z0);
        (self.eta1 * z0 * z0).exp() * th[0] / (PI * self.theta1_prime0)
    }

    /// Weierstrass sigma, entire and odd, sigma(z) ~ z near 0.
    pub fn sigma(&self, z: Complex64) -> Complex64 {
        let (z0, m, n) = self.reduce(z);
        self.quasi_factor(z0, m, n) * self.sigma_cell(z0)
    }

    /// Weierstrass zeta = sigma'/sigma.
    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        let (z0, m, n) = self.reduce(z);
        if z0.norm() < 1e-10 {
            return Err(Error::PoleAtLattice);
        }
        let th = theta1_derivs(self.tau, PI * z0);
        let cell = 2.0 * self.eta1 * z0 + PI * th[1] / th[0];
        Ok(cell + 2.0 * m as f64 * self.eta1 + 2.0 * n as f64 * self.eta2)
    }

    /// Weierstrass p-function.
    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        let (z0, _, _) = self.reduce(z);
        if z0.norm() < 1e-10 {
            return Err(Error::PoleAtLattice);
        }
        let th = theta1_derivs(self.tau, PI * z0);
        let lt = th[1] / th[0];
        Ok(-2.0 * self.eta1 - PI * PI * (th[2] / th[0] - lt * lt))
    }

    /// Derivative of the p-function.
    pub fn wp_prime(&self, z: Complex64) -> Result<Complex64> {
        let (z0, _, _) = self.reduce(z);
        if z0.norm() < 1e-10 {
            return Err(Error::PoleAtLattice);
        }
        let th = theta1_derivs(self.tau, PI * z0);
        let lt = th[1] / th[0];
        let inner = th[3] / th[0] - 3.0 * th[2] * th[1] / (th[0] * th[0]) + 2.0 * lt * lt * lt;
        Ok(-PI.powi(3) * inner)
    }

    /// Laurent coefficients c_k of wp(z) = z^{-2} + sum_{k>=2} c_k z^{2k-2},
    /// returned as index->c with c[0] = c[1] = 0 placeholders.
    pub fn wp_laurent(&self, kmax: usize) -> Vec<Complex64> {
        let mut cs = vec![Complex64::default(); kmax + 1];
        if kmax >= 2 {
            cs[2] = self.g2 / 20.0;
        }
        if kmax >= 3 {
            cs[3] = self.g3 / 28.0;
        }
        for k in 4..=kmax {
            let mut acc = Complex64::default();
            for m in 2..=(k - 2) {
                acc += cs[m] * cs[k - m];
            }
            cs[k] = 3.0 / ((2 * k + 1) as f64 * (k - 3) as f64) * acc;
        }
        cs
    }

    /// Derivatives sigma^{(n)}(0) for n = 0..=nmax, from the classical series
    /// sigma(z) = z exp(-sum_k c_k z^{2k} / (2k (2k-1))).
    pub fn sigma_taylor_zero(&self, nmax: usize) -> Vec<Complex64> {
        let kmax = nmax / 2 + 2;
        let cs = self.wp_laurent(kmax);
        // Power series of the exponent, then exp, then multiply by z.
        let len = nmax + 1;
        let mut expo = vec![Complex64::default(); len];
        for k in 2..=kmax {
            let p = 2 * k;
            if p < len {
                expo[p] = -cs[k] / (p as f64 * (p - 1) as f64);
            }
        }
        // exp of a series with zero constant term: e' = e * expo'.
        let mut e = vec![Complex64::default(); len];
        e[0] = Complex64::new(1.0, 0.0);
        for n in 1..len {
            let mut acc = Complex64::default();
            for j in 1..=n {
                acc += j as f64 * expo[j] * e[n - j];
            }
            e[n] = acc / n as f64;
        }
        // sigma-series coefficients: shift by one power of z.
        let mut sig = vec![Complex64::default(); len];
        for n in 1..len {
            sig[n] = e[n - 1];
        }
        // Convert coefficients to derivatives.
        let mut fact = 1.0;
        let mut out = Vec::with_capacity(len);
        for (n, s) in sig.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            out.push(s * fact);
        }
        out
    }

    /// Derivatives sigma^{(n)}(alpha) for n = 0..=nmax at a non-lattice point,
    /// via the closed chain sigma' = zeta sigma, zeta' = -wp,
    /// wp'' = 6 wp^2 - g2/2.
    pub fn sigma_derivs(&self, alpha: Complex64, nmax: usize) -> Result<Vec<Complex64>> {
        let wp0 = self.wp(alpha)?;
        let wp1 = self.wp_prime(alpha)?;
        // p[j] = wp^{(j)}(alpha)
        let mut p = vec![Complex64::default(); nmax.max(2) + 1];
        p[0] = wp0;
        if p.len() > 1 {
            p[1] = wp1;
        }
        if p.len() > 2 {
            p[2] = 6.0 * wp0 * wp0 - self.g2 / 2.0;
        }
        for n in 1..p.len().saturating_sub(2) {
            let mut acc = Complex64::default();
            for j in 0..=n {
                acc += crate::linalg::binomial(n as i64, j as u32) * p[j] * p[n - j];
            }
            p[n + 2] = 6.0 * acc;
        }
        // z[j] = zeta^{(j)}(alpha): z0 = zeta, z_{j+1} = -p_j.
        let mut zd = vec![Complex64::default(); nmax + 1];
        zd[0] = self.zeta(alpha)?;
        for j in 1..=nmax {
            zd[j] = -p[j - 1];
        }
        // s_{n+1} = sum_j C(n,j) z_j s_{n-j}
        let mut s = vec![Complex64::default(); nmax + 1];
        s[0] = self.sigma(alpha);
        for n in 0..nmax {
            let mut acc = Complex64::default();
            for j in 0..=n {
                acc += crate::linalg::binomial(n as i64, j as u32) * zd[j] * s[n - j];
            }
            s[n + 1] = acc;
        }
        Ok(s)
    }
}

/// theta1 and its first three w-derivatives at a point.
fn theta1_derivs(tau: Complex64, w: Complex64) -> [Complex64; 4] {
    let mut out = [Complex64::default(); 4];
    let iptau = c(0.0, PI) * tau;
    for n in 0..64_u32 {
        let m = (2 * n + 1) as f64;
        let half = n as f64 + 0.5;
        let qq = (iptau * half * half).exp();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let (s, cs) = ((m * w).sin(), (m * w).cos());
        let t0 = 2.0 * sign * qq * s;
        let t1 = 2.0 * sign * qq * m * cs;
        let t2 = -2.0 * sign * qq * m * m * s;
        let t3 = -2.0 * sign * qq * m * m * m * cs;
        out[0] += t0;
        out[1] += t1;
        out[2] += t2;
        out[3] += t3;
        if n > 4 && t3.norm() < 1e-17 * (1.0 + out[3].norm()) {
            break;
        }
    }
    out
}

/// theta1'(0) and theta1'''(0).
fn theta1_zero_derivs(tau: Complex64) -> (Complex64, Complex64) {
    let th = theta1_derivs(tau, Complex64::default());
    (th[1], th[3])
}

/// Sector of an instanton divisor: whether the zero/pole mismatch
/// s = sum(a_i - b_i) vanishes on the lattice or is half of the period tau.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    Periodic,
    Twisted,
}

/// Zero/pole data of an elliptic quotient v(z): amplitude A, zeros a_i,
/// poles b_i.  Point representatives are stored exactly as given, since
/// reduction changes the quasi-periodicity bookkeeping.
#[derive(Clone, Debug)]
pub struct InstantonData {
    amplitude: Complex64,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl InstantonData {
    pub fn new(amplitude: Complex64, a: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::BadInstanton(format!(
                "need equal nonempty zero/pole lists, got {} zeros and {} poles",
                a.len(),
                b.len()
            )));
        }
        Ok(Self { amplitude, a, b })
    }

    pub fn ell(&self) -> usize {
        self.a.len()
    }

    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.a
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.b
    }

    /// The divisor mismatch s = sum(a_i - b_i), not reduced.
    pub fn mismatch(&self) -> Complex64 {
        let sa: Complex64 = self.a.iter().sum();
        let sb: Complex64 = self.b.iter().sum();
        sa - sb
    }

    /// Classify the sector: s on the lattice is periodic, 2s = tau mod the
    /// doubled lattice is the half-period twist.
    pub fn sector(&self, lat: &EllipticLattice) -> Result<Sector> {
        let s = self.mismatch();
        let (r, _, _) = lat.reduce(s);
        if r.norm() < 1e-9 {
            return Ok(Sector::Periodic);
        }
        let (r2, _, _) = lat.reduce(2.0 * s - lat.tau() / 2.0);
        if r2.norm() < 1e-9 {
            return Ok(Sector::Twisted);
        }
        Err(Error::BadInstanton(format!(
            "divisor mismatch {s} is neither 0 nor half of tau modulo the lattice"
        )))
    }

    /// Exponent of the normalizing factor e^{lambda z} that makes both
    /// monodromy multipliers unimodular: Re(lambda) = Re(2 eta1 s) and
    /// Re(lambda tau) = Re(2 eta2 s).  Zero in the periodic sector.
    pub fn lambda(&self, lat: &EllipticLattice) -> Complex64 {
        let s = self.mismatch();
        let rx = (2.0 * lat.eta1() * s).re;
        let ry = (2.0 * lat.eta2() * s).re;
        // lambda = lr + i li with lr = rx, lr tau1 - li tau2 = ry.
        let lr = rx;
        let li = (lr * lat.tau().re - ry) / lat.tau().im;
        c(lr, li)
    }
}

/// Evaluate v(z) = A e^{lambda z} prod sigma(z - a_i) / sigma(z - b_i).
///
/// The exponential factor is the unimodularity normalization from
/// [`InstantonData::lambda`]; it is identically 1 in the periodic sector.
pub fn instanton_v(lat: &EllipticLattice, d: &InstantonData, z: Complex64) -> Result<Complex64> {
    for &b in d.poles() {
        if lat.lattice_distance(z - b) < 1e-9 {
            return Err(Error::PoleHit);
        }
    }
    let lambda = d.lambda(lat);
    let mut num = d.amplitude * (lambda * z).exp();
    let mut den = Complex64::new(1.0, 0.0);
    for (&a, &b) in d.zeros().iter().zip(d.poles()) {
        num *= lat.sigma(z - a);
        den *= lat.sigma(z - b);
    }
    Ok(num / den)
}

/// Both v and 1/v sampled on a torus grid whose modulus matches the lattice.
/// The reciprocal is evaluated by its own sigma quotient, so each value is
/// accurate wherever its formula is finite; together they cover the whole
/// grid including pole neighbourhoods.
pub fn instanton_field(
    lat: &EllipticLattice,
    d: &InstantonData,
    shape: crate::torus::TorusShape,
) -> Result<(GridFunction, GridFunction)> {
    assert!(
        (shape.tau() - lat.tau()).norm() < 1e-12,
        "grid modulus must match the lattice"
    );
    let lambda = d.lambda(lat);
    // Every point is an independent sigma-product evaluation, the priciest
    // loop in the library; parallel order-preserving collect keeps the
    // result bit-identical to the serial loop.
    let pairs: Vec<(Complex64, Complex64)> = (0..shape.len())
        .into_par_iter()
        .map(|idx| {
            let z = shape.z_at(idx / shape.ny(), idx % shape.ny());
            let mut num = Complex64::new(1.0, 0.0);
            let mut den = Complex64::new(1.0, 0.0);
            for (&a, &b) in d.zeros().iter().zip(d.poles()) {
                num *= lat.sigma(z - a);
                den *= lat.sigma(z - b);
            }
            let head = d.amplitude * (lambda * z).exp();
            (head * num / den, den / (head * num))
        })
        .collect();
    let (v_vals, w_vals) = pairs.into_iter().unzip();
    Ok((
        GridFunction::from_values(shape, v_vals)?,
        GridFunction::from_values(shape, w_vals)?,
    ))
}

/// Measured Floquet multipliers (v(z+1)/v(z), v(z+tau)/v(z)).
///
/// Sampled at several generic points; errors if the ratios fail to be
/// constant, and reports non-unimodular magnitude as a violation since the
/// normalizing exponential in [`instanton_v`] is chosen to preclude it.
pub fn monodromy(lat: &EllipticLattice, d: &InstantonData) -> Result<(Complex64, Complex64)> {
    let samples = [c(0.137, 0.041), c(0.301, 0.233), c(0.493, 0.361)];
    let mut mx = Vec::new();
    let mut my = Vec::new();
    for &base in &samples {
        let z = base.re + lat.tau() * base.im;
        let v0 = instanton_v(lat, d, z)?;
        mx.push(instanton_v(lat, d, z + 1.0)? / v0);
        my.push(instanton_v(lat, d, z + lat.tau())? / v0);
    }
    for pair in [&mx, &my] {
        for w in pair.windows(2) {
            if (w[0] - w[1]).norm() > 1e-8 * (1.0 + w[0].norm()) {
                return Err(Error::NotConstantRatio { dev: (w[0] - w[1]).norm() });
            }
        }
    }
    for m in [mx[0], my[0]] {
        if (m.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::NormViolation((m.norm() - 1.0).abs()));
        }
    }
    Ok((mx[0], my[0]))
}

/// Target rotation v -> (c v + d) / (-conj(d) v + conj(c)) with
/// |c|^2 + |d|^2 = 1, applied pointwise.
pub fn fractional_linear(v: &GridFunction, cc: Complex64, dd: Complex64) -> Result<GridFunction> {
    let norm = cc.norm_sqr() + dd.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NormViolation((norm - 1.0).abs()));
    }
    Ok(v.map(|val| (cc * val + dd) / (-dd.conj() * val + cc.conj())))
}
