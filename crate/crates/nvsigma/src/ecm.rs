//! Spectral curves of the elliptic Calogero-Moser system.
//!
//! A configuration of N particles on the torus carries a Lax matrix L(alpha)
//! with an elliptic spectral parameter.  The characteristic polynomial
//! det(k I - L(alpha)) is computed two ways: directly from the matrix, and
//! through a sigma-function representation whose N free coefficients are the
//! integrals of motion.  Matching the two pins the integrals; the rest of the
//! module probes the curve itself: the involution (k, alpha) -> (-k, -alpha)
//! on the even-integral locus, exact Taylor tables of the entire numerator at
//! the marked point, the branch cubic of constrained curves, values over the
//! half periods that detect nodal fibers, and the Floquet multipliers with
//! their diagonal gluing rule.
//!
//! Conventions: the coupling is fixed to 1, the lattice is generated by 1 and
//! tau, and the shifted variable in the sigma representation is p = k -
//! zeta(alpha).  The opposite shift is exposed for diagnostics; it does not
//! reproduce the determinant.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elliptic::EllipticLattice;
use crate::linalg::{char_poly_coeffs, lstsq, lu_det, poly_roots};
use crate::{Error, Result};

/// Minimal lattice distance for a usable spectral parameter.
const ALPHA_TOL: f64 = 1e-9;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fact(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, v| a * v as f64)
}

/// Falling factorial t (t-1) ... (t-n+1).
fn falling(t: usize, n: usize) -> f64 {
    (0..n).fold(1.0, |a, v| a * (t - v) as f64)
}

/// Particle data: positions on the curve and momenta, with unit coupling.
#[derive(Clone, Debug)]
pub struct ECMConfig {
    z: Vec<Complex64>,
    rho: Vec<Complex64>,
}

impl ECMConfig {
    /// Validates that positions are pairwise distinct modulo the lattice.
    pub fn new(lat: &EllipticLattice, z: Vec<Complex64>, rho: Vec<Complex64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::BadConfig("need at least one particle".into()));
        }
        if z.len() != rho.len() {
            return Err(Error::BadConfig(format!(
                "{} positions but {} momenta",
                z.len(),
                rho.len()
            )));
        }
        for i in 0..z.len() {
            for j in 0..i {
                if lat.lattice_distance(z[i] - z[j]) < ALPHA_TOL {
                    return Err(Error::BadConfig(format!(
                        "positions {j} and {i} collide modulo the lattice"
                    )));
                }
            }
        }
        Ok(Self { z, rho })
    }

    /// Configuration with all momenta zero; its curve carries the involution.
    pub fn turning(lat: &EllipticLattice, z: Vec<Complex64>) -> Result<Self> {
        let rho = vec![Complex64::default(); z.len()];
        Self::new(lat, z, rho)
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn rho(&self) -> &[Complex64] {
        &self.rho
    }

    pub fn is_turning(&self) -> bool {
        self.rho.iter().all(|r| r.norm() == 0.0)
    }
}

/// Integrals of motion: the non-leading coefficients of the monic polynomial
/// H(p) = p^N + I_1 p^{N-1} + ... + I_N.
#[derive(Clone, Debug)]
pub struct ECMIntegrals {
    vals: Vec<Complex64>,
}

impl ECMIntegrals {
    pub fn new(vals: Vec<Complex64>) -> Result<Self> {
        if vals.is_empty() {
            return Err(Error::BadConfig("need at least one integral".into()));
        }
        Ok(Self { vals })
    }

    pub fn n(&self) -> usize {
        self.vals.len()
    }

    /// I_l for l = 1..=N.
    pub fn get(&self, l: usize) -> Complex64 {
        assert!(l >= 1 && l <= self.vals.len(), "integral index out of range");
        self.vals[l - 1]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.vals
    }

    /// Largest odd-index integral; zero on the involution locus.
    pub fn odd_norm(&self) -> f64 {
        self.vals
            .iter()
            .step_by(2)
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

fn check_alpha(lat: &EllipticLattice, c: &ECMConfig, alpha: Complex64) -> Result<()> {
    if lat.lattice_distance(alpha) < ALPHA_TOL {
        return Err(Error::SingularAlpha);
    }
    for i in 0..c.n() {
        for j in 0..c.n() {
            if i != j {
                let zij = c.z[i] - c.z[j];
                if lat.lattice_distance(alpha + zij) < ALPHA_TOL
                    || lat.lattice_distance(alpha - zij) < ALPHA_TOL
                {
                    return Err(Error::SingularAlpha);
                }
            }
        }
    }
    Ok(())
}

/// Lax matrix L_ij = rho_i delta_ij + sigma(alpha + z_i - z_j) /
/// (sigma(z_i - z_j) sigma(alpha)) off the diagonal, row major.
pub fn lax(lat: &EllipticLattice, c: &ECMConfig, alpha: Complex64) -> Result<Vec<Complex64>> {
    check_alpha(lat, c, alpha)?;
    let n = c.n();
    let sa = lat.sigma(alpha);
    let mut m = vec![Complex64::default(); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = if i == j {
                c.rho[i]
            } else {
                let zij = c.z[i] - c.z[j];
                lat.sigma(alpha + zij) / (lat.sigma(zij) * sa)
            };
        }
    }
    Ok(m)
}

/// det(k I - L(alpha)) by LU elimination.
pub fn charpoly_direct(
    lat: &EllipticLattice,
    c: &ECMConfig,
    k: Complex64,
    alpha: Complex64,
) -> Result<Complex64> {
    let n = c.n();
    let l = lax(lat, c, alpha)?;
    let mut m = vec![Complex64::default(); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = if i == j { k - l[i * n + j] } else { -l[i * n + j] };
        }
    }
    Ok(lu_det(&mut m, n))
}

/// Coefficients (c_1, ..., c_N) of det(k I - L(alpha)) = k^N + c_1 k^{N-1}
/// + ... + c_N.
pub fn charpoly_direct_coeffs(
    lat: &EllipticLattice,
    c: &ECMConfig,
    alpha: Complex64,
) -> Result<Vec<Complex64>> {
    let l = lax(lat, c, alpha)?;
    Ok(char_poly_coeffs(&l, c.n()))
}

/// Descending coefficients (1, I_1, ..., I_N) of the monic polynomial H.
fn h_coeffs(ints: &ECMIntegrals) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(ints.n() + 1);
    out.push(cx(1.0, 0.0));
    out.extend_from_slice(ints.as_slice());
    out
}

/// Contribution of the monomial p^t to the entire numerator: sum over n of
/// sigma^{(n)}(alpha)/n! times the n-th derivative of p^t.
fn monomial_f(sder: &[Complex64], t: usize, p: Complex64) -> Complex64 {
    let mut acc = Complex64::default();
    for n in 0..=t.min(sder.len() - 1) {
        acc += sder[n] / fact(n) * falling(t, n) * p.powu((t - n) as u32);
    }
    acc
}

/// Entire numerator F(p, alpha) = sum_n sigma^{(n)}(alpha)/n! H^{(n)}(p) at a
/// non-lattice alpha.
pub fn entire_f(
    lat: &EllipticLattice,
    ints: &ECMIntegrals,
    p: Complex64,
    alpha: Complex64,
) -> Result<Complex64> {
    let n = ints.n();
    if lat.lattice_distance(alpha) < ALPHA_TOL {
        return Err(Error::SingularAlpha);
    }
    let sder = lat.sigma_derivs(alpha, n)?;
    let hc = h_coeffs(ints);
    let mut acc = Complex64::default();
    for (t, &coeff) in hc.iter().enumerate() {
        acc += coeff * monomial_f(&sder, n - t, p);
    }
    Ok(acc)
}

/// Sigma-function representation of the characteristic polynomial.  With the
/// default sign = -1 this evaluates
/// sum_n (-1)^n sigma^{(n)}(alpha) H^{(n)}(p) / (n! sigma(alpha)) at
/// p = k + zeta(alpha), which reproduces det(k I - L(alpha)) for every
/// particle number; the first place the alternation matters is the odd
/// wp'(alpha) terms appearing from three particles on.  sign = +1 flips the
/// zeta shift instead and matches nothing; it is kept as a convention
/// diagnostic.
///
/// The alternating sum equals the plain one with the orientation of alpha
/// reversed, which is how it is computed here.
pub fn charpoly_sigma(
    lat: &EllipticLattice,
    ints: &ECMIntegrals,
    k: Complex64,
    alpha: Complex64,
    sign: i32,
) -> Result<Complex64> {
    assert!(sign == 1 || sign == -1, "shift sign must be +1 or -1");
    if lat.lattice_distance(alpha) < ALPHA_TOL {
        return Err(Error::SingularAlpha);
    }
    let beta = -alpha;
    let p = k + sign as f64 * lat.zeta(beta)?;
    Ok(entire_f(lat, ints, p, beta)? / lat.sigma(beta))
}

/// Deterministic sample points for the linear fit and the parity probe:
/// k in a disc, alpha kept away from the lattice and the position
/// differences.
fn sample_points(
    lat: &EllipticLattice,
    avoid: &[Complex64],
    count: usize,
    seed: u64,
) -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = cx(2.4 * rng.gen::<f64>() - 1.2, 2.4 * rng.gen::<f64>() - 1.2);
        let alpha = cx(0.9 * rng.gen::<f64>() - 0.45, 0.9 * rng.gen::<f64>() - 0.45);
        if lat.lattice_distance(alpha) < 0.1 {
            continue;
        }
        if avoid
            .iter()
            .any(|&d| lat.lattice_distance(alpha + d) < 0.05 || lat.lattice_distance(alpha - d) < 0.05)
        {
            continue;
        }
        out.push((k, alpha));
    }
    out
}

fn position_differences(c: &ECMConfig) -> Vec<Complex64> {
    let mut out = Vec::new();
    for i in 0..c.n() {
        for j in 0..i {
            out.push(c.z[i] - c.z[j]);
        }
    }
    out
}

/// Least-squares fit of the integrals from samples of an arbitrary curve
/// evaluation; the system is linear in the integrals.
fn fit_from<F>(lat: &EllipticLattice, n: usize, samples: &[(Complex64, Complex64)], eval: F, sign: i32)
    -> Result<(ECMIntegrals, f64)>
where
    F: Fn(Complex64, Complex64) -> Result<Complex64>,
{
    let rows = samples.len();
    let mut a = vec![Complex64::default(); rows * n];
    let mut b = vec![Complex64::default(); rows];
    for (s, &(k, alpha)) in samples.iter().enumerate() {
        // Same orientation reversal as charpoly_sigma; the system stays
        // linear in the integrals.
        let beta = -alpha;
        let sder = lat.sigma_derivs(beta, n)?;
        let sb = lat.sigma(beta);
        let p = k + sign as f64 * lat.zeta(beta)?;
        for l in 1..=n {
            a[s * n + (l - 1)] = monomial_f(&sder, n - l, p) / sb;
        }
        b[s] = eval(k, alpha)? - monomial_f(&sder, n, p) / sb;
    }
    let (x, cond) = lstsq(&a, &b, rows, n)?;
    if cond > 1e10 {
        return Err(Error::IllConditioned(cond));
    }
    let mut resid = 0.0_f64;
    for s in 0..rows {
        let mut acc = -b[s];
        for l in 0..n {
            acc += a[s * n + l] * x[l];
        }
        resid = resid.max(acc.norm());
    }
    Ok((ECMIntegrals::new(x)?, resid))
}

/// Integrals of motion of a configuration, from matching the sigma
/// representation against the determinant over a seeded sample set.
/// Returns the fit together with its largest sample residual.
pub fn fit_integrals(
    lat: &EllipticLattice,
    c: &ECMConfig,
    sign: i32,
) -> Result<(ECMIntegrals, f64)> {
    assert!(sign == 1 || sign == -1, "shift sign must be +1 or -1");
    let n = c.n();
    let samples = sample_points(lat, &position_differences(c), 3 * n + 4, 0x5eed);
    fit_from(lat, n, &samples, |k, alpha| charpoly_direct(lat, c, k, alpha), sign)
}

/// Largest violation of F(-p, -alpha) = (-1)^{N+1} F(p, alpha) over a seeded
/// sample set.  The entire numerator has parity opposite to sigma(alpha), so
/// the residual vanishes exactly when the odd integrals do.
pub fn involution_residual(lat: &EllipticLattice, ints: &ECMIntegrals) -> Result<f64> {
    let n = ints.n();
    let parity = if n % 2 == 0 { -1.0 } else { 1.0 };
    let samples = sample_points(lat, &[], 12, 0x0dd);
    let mut worst = 0.0_f64;
    for &(p, alpha) in &samples {
        let lhs = entire_f(lat, ints, -p, -alpha)?;
        let rhs = entire_f(lat, ints, p, alpha)?;
        worst = worst.max((lhs - parity * rhs).norm());
    }
    Ok(worst)
}

/// Derivative table d_alpha^i d_p^j F(0, 0) for i + j <= maxtot, from the
/// exact Taylor series of sigma at the origin; no numerical differentiation.
fn f_taylor_table(lat: &EllipticLattice, ints: &ECMIntegrals, maxtot: usize) -> Vec<Vec<Complex64>> {
    let n = ints.n();
    let sder = lat.sigma_taylor_zero(n + maxtot);
    let hc = h_coeffs(ints);
    // H^{(t)}(0) = t! * coefficient of p^t.
    let hd0 = |t: usize| -> Complex64 {
        if t > n {
            Complex64::default()
        } else {
            fact(t) * hc[n - t]
        }
    };
    (0..=maxtot)
        .map(|i| {
            (0..=maxtot - i)
                .map(|j| {
                    let mut acc = Complex64::default();
                    for m in 0..=n.saturating_sub(j) {
                        acc += sder[m + i] / fact(m) * hd0(m + j);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Exact derivative values of the entire numerator at the marked point,
/// restricted to the involution locus.
#[derive(Clone, Debug)]
pub struct TurningTable {
    order: usize,
    rows: Vec<Vec<Complex64>>,
}

impl TurningTable {
    /// Highest total derivative degree 2n stored in the table.
    pub fn max_total(&self) -> usize {
        self.order
    }

    /// d_alpha^i d_p^j F(0, 0) for i + j <= the stored degree.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        assert!(i + j <= self.order, "derivative degree exceeds the table");
        self.rows[i][j]
    }

    /// Largest entry magnitude; zero iff every stored constraint holds.
    pub fn residual(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Table of the derivative constraints of degree up to 2n at the marked
/// point.  Requires an even particle number and vanishing odd integrals,
/// the locus on which the curve carries the involution.
pub fn turning_constraints(
    lat: &EllipticLattice,
    ints: &ECMIntegrals,
    n: usize,
) -> Result<TurningTable> {
    if ints.n() % 2 != 0 {
        return Err(Error::BadConfig(
            "constraint table needs an even particle number".into(),
        ));
    }
    let scale = ints.as_slice().iter().map(|v| v.norm()).fold(1.0, f64::max);
    if ints.odd_norm() > 1e-10 * scale {
        return Err(Error::BadConfig(format!(
            "odd integrals must vanish on the involution locus, largest is {:.3e}",
            ints.odd_norm()
        )));
    }
    Ok(TurningTable {
        order: 2 * n,
        rows: f_taylor_table(lat, ints, 2 * n),
    })
}

/// Leading cubic block of a curve satisfying the first-order constraints:
/// F = b1 p^3 + b2 p^2 alpha + b3 p alpha^2 + b4 alpha^3 + higher order,
/// with the three branch slopes as roots of b1 g^3 + b2 g^2 + b3 g + b4.
#[derive(Clone, Debug)]
pub struct BranchCubic {
    pub b: [Complex64; 4],
    pub roots: [Complex64; 3],
    /// Smallest pairwise distance of the roots; a tiny gap signals a
    /// degenerate triple of branches rather than an error.
    pub min_gap: f64,
}

pub fn branch_cubic(lat: &EllipticLattice, ints: &ECMIntegrals) -> Result<BranchCubic> {
    let table = turning_constraints(lat, ints, 1)?;
    let res = table.residual();
    if res > 1e-8 {
        return Err(Error::ConstraintsNotMet(res));
    }
    let t3 = f_taylor_table(lat, ints, 3);
    let b = [
        t3[0][3] / 6.0,
        t3[1][2] / 2.0,
        t3[2][1] / 2.0,
        t3[3][0] / 6.0,
    ];
    // Ascending coefficients of the slope cubic.
    let roots = poly_roots(&[b[3], b[2], b[1], b[0]])?;
    assert_eq!(roots.len(), 3, "slope cubic must have three roots");
    let mut min_gap = f64::INFINITY;
    for i in 0..3 {
        for j in 0..i {
            min_gap = min_gap.min((roots[i] - roots[j]).norm());
        }
    }
    Ok(BranchCubic {
        b,
        roots: [roots[0], roots[1], roots[2]],
        min_gap,
    })
}

/// Value of the curve polynomial at k = 0 over the j-th half period
/// (j = 1, 2, 3).  Vanishing detects the one-node fiber through that point.
pub fn cmsing_value(lat: &EllipticLattice, ints: &ECMIntegrals, j: usize) -> Result<Complex64> {
    charpoly_sigma(lat, ints, Complex64::default(), lat.half_period(j), -1)
}

/// Translation direction for a Floquet multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloquetDir {
    X,
    Y,
}

/// Bloch multiplier of the wave with spectral data (k, alpha):
/// w_x = exp(k - zeta(alpha) + 2 zeta(1/2) alpha) and
/// w_y = exp(tau (k - zeta(alpha)) + 2 zeta(tau/2) alpha).
pub fn floquet(
    lat: &EllipticLattice,
    k: Complex64,
    alpha: Complex64,
    dir: FloquetDir,
) -> Result<Complex64> {
    if lat.lattice_distance(alpha) < ALPHA_TOL {
        return Err(Error::SingularAlpha);
    }
    let shifted = k - lat.zeta(alpha)?;
    let expo = match dir {
        FloquetDir::X => shifted + 2.0 * lat.eta(1) * alpha,
        FloquetDir::Y => lat.tau() * shifted + 2.0 * lat.eta(2) * alpha,
    };
    Ok(expo.exp())
}

/// Largest violation of G = W+ G W- entrywise, for diagonal W given by
/// their diagonals.
pub fn gluing_defect(wplus: &[Complex64], wminus: &[Complex64], g: &[Complex64]) -> f64 {
    let n = wplus.len();
    assert_eq!(wminus.len(), n, "diagonal length mismatch");
    assert_eq!(g.len(), n * n, "gluing matrix is not n by n");
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let gij = g[i * n + j];
            worst = worst.max((gij - wplus[i] * gij * wminus[j]).norm());
        }
    }
    worst
}

pub fn gluing_ok(wplus: &[Complex64], wminus: &[Complex64], g: &[Complex64], tol: f64) -> bool {
    gluing_defect(wplus, wminus, g) <= tol
}

/// Factorization coefficients a_i of the curve near alpha = 0, where the
/// polynomial splits into factors k + a_i / alpha + h_i + O(alpha): one
/// transverse branch has a_1 = 1 - N, the remaining N - 1 have a_i = 1.
///
/// Extracted by tracking the roots of det(kappa I - alpha L(alpha)) down a
/// geometric ladder of alpha values and extrapolating kappa = k alpha
/// linearly to alpha = 0; returned sorted by real part, so the transverse
/// branch comes first.
pub fn branch_exponents(lat: &EllipticLattice, c: &ECMConfig) -> Result<Vec<Complex64>> {
    let n = c.n();
    let steps = 5;
    let base = cx(0.96, 0.28) / cx(0.96, 0.28).norm();
    // The N - 1 tangent branches collapse onto one point as alpha -> 0, so
    // the ladder stops while their k alpha values are still well separated;
    // the quadratic extrapolation below keeps the O(alpha^3) error far
    // inside the branch gap.
    let alphas: Vec<Complex64> = (0..steps)
        .map(|t| base * 3e-2 * 3f64.powf(-(t as f64) / (steps as f64 - 1.0)))
        .collect();
    let mut tracks: Vec<Vec<Complex64>> = vec![Vec::with_capacity(steps); n];
    let mut prev: Vec<Complex64> = Vec::new();
    for (t, &alpha) in alphas.iter().enumerate() {
        let l = lax(lat, c, alpha)?;
        let scaled: Vec<Complex64> = l.iter().map(|v| v * alpha).collect();
        let coeffs = char_poly_coeffs(&scaled, n);
        // Ascending coefficients of det(kappa I - alpha L).
        let mut poly: Vec<Complex64> = coeffs.iter().rev().copied().collect();
        poly.push(cx(1.0, 0.0));
        let roots = poly_roots(&poly)?;
        let ordered = if t == 0 {
            roots
        } else {
            // Match each track to its nearest unclaimed root.
            let mut taken = vec![false; n];
            let mut ordered = vec![Complex64::default(); n];
            for (i, &p) in prev.iter().enumerate() {
                let mut best = usize::MAX;
                let mut dist = f64::INFINITY;
                for (r, &root) in roots.iter().enumerate() {
                    if !taken[r] && (root - p).norm() < dist {
                        dist = (root - p).norm();
                        best = r;
                    }
                }
                taken[best] = true;
                ordered[i] = roots[best];
            }
            ordered
        };
        for (i, &root) in ordered.iter().enumerate() {
            tracks[i].push(root);
        }
        prev = ordered;
    }
    // kappa(alpha) = -a - h alpha + O(alpha^2): quadratic extrapolation of
    // the last three rungs of the ladder to alpha = 0.
    let pts = [alphas[steps - 3], alphas[steps - 2], alphas[steps - 1]];
    let weight = |i: usize| -> Complex64 {
        let mut w = cx(1.0, 0.0);
        for j in 0..3 {
            if j != i {
                w *= -pts[j] / (pts[i] - pts[j]);
            }
        }
        w
    };
    let weights = [weight(0), weight(1), weight(2)];
    let mut out: Vec<Complex64> = tracks
        .iter()
        .map(|tr| {
            let at_zero: Complex64 = (0..3)
                .map(|i| weights[i] * tr[steps - 3 + i])
                .sum();
            -at_zero
        })
        .collect();
    out.sort_by(|u, v| u.re.partial_cmp(&v.re).unwrap());
    Ok(out)
}

/// Slope of the k^{N-2} coefficient of the characteristic polynomial in
/// wp(alpha), fitted over a seeded sample of alphas together with the fit
/// residual.  The slope is -N(N-1)/2 at unit coupling.
pub fn c2_wp_slope(lat: &EllipticLattice, c: &ECMConfig) -> Result<(Complex64, f64)> {
    let n = c.n();
    if n < 2 {
        return Err(Error::BadConfig(
            "the k^{N-2} coefficient needs at least two particles".into(),
        ));
    }
    let samples = sample_points(lat, &position_differences(c), 9, 0xc2);
    let rows = samples.len();
    let mut a = vec![Complex64::default(); rows * 2];
    let mut b = vec![Complex64::default(); rows];
    for (s, &(_, alpha)) in samples.iter().enumerate() {
        a[s * 2] = cx(1.0, 0.0);
        a[s * 2 + 1] = lat.wp(alpha)?;
        b[s] = charpoly_direct_coeffs(lat, c, alpha)?[1];
    }
    let (x, _) = lstsq(&a, &b, rows, 2)?;
    let mut resid = 0.0_f64;
    for s in 0..rows {
        resid = resid.max((a[s * 2] * x[0] + a[s * 2 + 1] * x[1] - b[s]).norm());
    }
    Ok((x[1], resid))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> EllipticLattice {
        EllipticLattice::new(cx(0.0, 1.0)).unwrap()
    }

    fn lat_skew() -> EllipticLattice {
        EllipticLattice::new(cx(0.21, 1.13)).unwrap()
    }

    fn random_config(lat: &EllipticLattice, n: usize, turning: bool, seed: u64) -> ECMConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let z: Vec<Complex64> = (0..n)
                .map(|_| cx(0.8 * rng.gen::<f64>() - 0.4, 0.8 * rng.gen::<f64>() - 0.4))
                .collect();
            let ok = (0..n).all(|i| (0..i).all(|j| lat.lattice_distance(z[i] - z[j]) > 0.15));
            if !ok {
                continue;
            }
            let rho: Vec<Complex64> = (0..n)
                .map(|_| {
                    if turning {
                        Complex64::default()
                    } else {
                        cx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                    }
                })
                .collect();
            return ECMConfig::new(lat, z, rho).unwrap();
        }
    }

    #[test]
    fn single_particle_lax_is_its_momentum() {
        let lat = lat();
        let c = ECMConfig::new(&lat, vec![cx(0.1, 0.2)], vec![cx(0.7, -0.3)]).unwrap();
        let l = lax(&lat, &c, cx(0.31, 0.17)).unwrap();
        assert_eq!(l.len(), 1, "one particle gives a one by one matrix");
        assert!((l[0] - cx(0.7, -0.3)).norm() < 1e-15, "diagonal is the momentum");
        let r = charpoly_direct(&lat, &c, cx(0.4, 0.1), cx(0.31, 0.17)).unwrap();
        assert!(
            (r - (cx(0.4, 0.1) - cx(0.7, -0.3))).norm() < 1e-15,
            "characteristic polynomial is k minus the momentum"
        );
    }

    #[test]
    fn turning_point_lax_is_antisymmetric_under_alpha_flip() {
        let lat = lat_skew();
        let c = random_config(&lat, 3, true, 7);
        let alpha = cx(0.29, 0.18);
        let l = lax(&lat, &c, alpha).unwrap();
        let lm = lax(&lat, &c, -alpha).unwrap();
        let scale = l.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for i in 0..3 {
            for j in 0..3 {
                let sum = lm[i * 3 + j] + l[j * 3 + i];
                assert!(
                    sum.norm() < 1e-10 * scale,
                    "L(-a) + L^t(a) vanishes at a turning point, entry ({i},{j}) = {:.3e}",
                    sum.norm()
                );
            }
        }
    }

    #[test]
    fn two_particle_offdiagonal_product_is_a_wp_difference() {
        let lat = lat();
        let z12 = cx(0.37, 0.11);
        let c = ECMConfig::turning(&lat, vec![z12 / 2.0, -z12 / 2.0]).unwrap();
        let alpha = cx(0.22, -0.31);
        let l = lax(&lat, &c, alpha).unwrap();
        let prod = l[1] * l[2];
        let oracle = lat.wp(alpha).unwrap() - lat.wp(z12).unwrap();
        assert!(
            (prod - oracle).norm() < 1e-9 * oracle.norm().max(1.0),
            "off-diagonal product {prod} vs wp difference {oracle}"
        );
    }

    #[test]
    fn determinant_matches_the_trace_recursion_coefficients() {
        let lat = lat_skew();
        let c = random_config(&lat, 4, false, 11);
        let alpha = cx(0.27, 0.33);
        let coeffs = charpoly_direct_coeffs(&lat, &c, alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..4 {
            let k = cx(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0);
            let mut horner = cx(1.0, 0.0);
            for &cc in &coeffs {
                horner = horner * k + cc;
            }
            let det = charpoly_direct(&lat, &c, k, alpha).unwrap();
            assert!(
                (det - horner).norm() < 1e-10 * horner.norm().max(1.0),
                "determinant and coefficient forms agree at k = {k}"
            );
        }
    }

    #[test]
    fn permuting_particles_preserves_the_characteristic_polynomial() {
        let lat = lat();
        let c = random_config(&lat, 3, false, 5);
        let zp = vec![c.z()[2], c.z()[0], c.z()[1]];
        let rp = vec![c.rho()[2], c.rho()[0], c.rho()[1]];
        let cp = ECMConfig::new(&lat, zp, rp).unwrap();
        let (k, alpha) = (cx(0.6, -0.2), cx(0.24, 0.31));
        let r1 = charpoly_direct(&lat, &c, k, alpha).unwrap();
        let r2 = charpoly_direct(&lat, &cp, k, alpha).unwrap();
        assert!(
            (r1 - r2).norm() < 1e-12 * r1.norm().max(1.0),
            "relabeling particles cannot move the spectrum"
        );
    }

    #[test]
    fn sigma_representation_matches_the_determinant_for_small_systems() {
        let lat = lat();
        // One particle: I_1 = -rho_1.
        let rho = cx(0.45, -0.15);
        let c1 = ECMConfig::new(&lat, vec![cx(0.1, 0.3)], vec![rho]).unwrap();
        let i1 = ECMIntegrals::new(vec![-rho]).unwrap();
        // Two particles at a turning point: I_1 = 0, I_2 = wp(z12).
        let z12 = cx(0.41, 0.13);
        let c2 = ECMConfig::turning(&lat, vec![z12 / 2.0, -z12 / 2.0]).unwrap();
        let i2 = ECMIntegrals::new(vec![Complex64::default(), lat.wp(z12).unwrap()]).unwrap();
        for (k, alpha) in sample_points(&lat, &[z12], 6, 3) {
            let d1 = charpoly_direct(&lat, &c1, k, alpha).unwrap();
            let s1 = charpoly_sigma(&lat, &i1, k, alpha, -1).unwrap();
            assert!(
                (d1 - s1).norm() < 1e-10 * d1.norm().max(1.0),
                "one-particle match at k={k} alpha={alpha}: {:.3e}",
                (d1 - s1).norm()
            );
            let d2 = charpoly_direct(&lat, &c2, k, alpha).unwrap();
            let s2 = charpoly_sigma(&lat, &i2, k, alpha, -1).unwrap();
            assert!(
                (d2 - s2).norm() < 1e-8 * d2.norm().max(1.0),
                "two-particle match at k={k} alpha={alpha}: {:.3e}",
                (d2 - s2).norm()
            );
        }
    }

    #[test]
    fn opposite_shift_sign_fails_to_match() {
        let lat = lat();
        let z12 = cx(0.41, 0.13);
        let c2 = ECMConfig::turning(&lat, vec![z12 / 2.0, -z12 / 2.0]).unwrap();
        let i2 = ECMIntegrals::new(vec![Complex64::default(), lat.wp(z12).unwrap()]).unwrap();
        let mut worst = 0.0_f64;
        for (k, alpha) in sample_points(&lat, &[z12], 6, 3) {
            let d = charpoly_direct(&lat, &c2, k, alpha).unwrap();
            let s = charpoly_sigma(&lat, &i2, k, alpha, 1).unwrap();
            worst = worst.max((d - s).norm());
        }
        assert!(
            worst > 1e-2,
            "the plus shift is a genuinely different convention, mismatch {worst:.3e}"
        );
    }

    #[test]
    fn fitted_integrals_reproduce_known_values() {
        let lat = lat();
        let rho = cx(0.45, -0.15);
        let c1 = ECMConfig::new(&lat, vec![cx(0.1, 0.3)], vec![rho]).unwrap();
        let (i1, r1) = fit_integrals(&lat, &c1, -1).unwrap();
        assert!(r1 < 1e-10, "one-particle fit residual {r1:.3e}");
        assert!((i1.get(1) + rho).norm() < 1e-10, "I_1 is minus the momentum");
        let z12 = cx(0.41, 0.13);
        let c2 = ECMConfig::turning(&lat, vec![z12 / 2.0, -z12 / 2.0]).unwrap();
        let (i2, r2) = fit_integrals(&lat, &c2, -1).unwrap();
        assert!(r2 < 1e-8, "two-particle fit residual {r2:.3e}");
        assert!(i2.get(1).norm() < 1e-8, "odd integral vanishes at the turning point");
        let oracle = lat.wp(z12).unwrap();
        assert!(
            (i2.get(2) - oracle).norm() < 1e-8 * oracle.norm(),
            "I_2 is the pair interaction, got {} vs {oracle}",
            i2.get(2)
        );
    }

    #[test]
    fn fitted_odd_integrals_vanish_at_turning_points() {
        let lat = lat_skew();
        let c = random_config(&lat, 4, true, 13);
        let (ints, resid) = fit_integrals(&lat, &c, -1).unwrap();
        let scale = ints.as_slice().iter().map(|v| v.norm()).fold(1.0, f64::max);
        assert!(
            resid < 1e-8 * scale,
            "four-particle sigma representation residual {resid:.3e}"
        );
        assert!(
            ints.odd_norm() < 1e-8 * scale,
            "odd integrals at a turning point, largest {:.3e}",
            ints.odd_norm()
        );
    }

    #[test]
    fn refit_from_sigma_samples_is_stable() {
        let lat = lat();
        let c = random_config(&lat, 3, false, 17);
        let (ints, _) = fit_integrals(&lat, &c, -1).unwrap();
        let samples = sample_points(&lat, &[], 13, 0xabc);
        let (refit, resid) = fit_from(
            &lat,
            3,
            &samples,
            |k, alpha| charpoly_sigma(&lat, &ints, k, alpha, -1),
            -1,
        )
        .unwrap();
        assert!(resid < 1e-9, "sigma-generated samples refit residual {resid:.3e}");
        for l in 1..=3 {
            assert!(
                (refit.get(l) - ints.get(l)).norm() < 1e-9,
                "integral {l} stable under the round trip"
            );
        }
    }

    #[test]
    fn involution_residual_vanishes_only_for_even_integrals() {
        let lat = lat();
        let even2 = ECMIntegrals::new(vec![Complex64::default(), cx(0.7, 0.2)]).unwrap();
        let r = involution_residual(&lat, &even2).unwrap();
        assert!(r < 1e-9, "two-particle even curve is involution invariant, got {r:.3e}");
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let even4 = ECMIntegrals::new(vec![
            Complex64::default(),
            cx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            Complex64::default(),
            cx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
        ])
        .unwrap();
        let r4 = involution_residual(&lat, &even4).unwrap();
        assert!(r4 < 1e-8, "four-particle even curve residual {r4:.3e}");
        let odd = ECMIntegrals::new(vec![cx(1.0, 0.0), cx(0.7, 0.2)]).unwrap();
        let rbad = involution_residual(&lat, &odd).unwrap();
        assert!(rbad > 0.1, "an odd integral breaks the parity, residual {rbad:.3e}");
    }

    #[test]
    fn constraint_table_parity_kills_even_total_degrees() {
        let lat = lat_skew();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let ints = ECMIntegrals::new(vec![
            Complex64::default(),
            cx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            Complex64::default(),
            cx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
        ])
        .unwrap();
        let table = turning_constraints(&lat, &ints, 2).unwrap();
        let scale = table.residual().max(1.0);
        for i in 0..=4 {
            for j in 0..=4 - i {
                if (i + j) % 2 == 0 {
                    assert!(
                        table.entry(i, j).norm() < 1e-12 * scale,
                        "even-degree entry ({i},{j}) must vanish by parity"
                    );
                }
            }
        }
    }

    #[test]
    fn two_particle_table_obstructs_the_first_constraint() {
        let lat = lat();
        let ints = ECMIntegrals::new(vec![Complex64::default(), cx(0.37, -0.21)]).unwrap();
        let table = turning_constraints(&lat, &ints, 1).unwrap();
        let dp = table.entry(0, 1);
        assert!(
            (dp - cx(2.0, 0.0)).norm() < 1e-10,
            "d_p F(0,0) is twice the sigma slope regardless of I_2, got {dp}"
        );
    }

    #[test]
    fn constraint_table_rejects_odd_data() {
        let lat = lat();
        let odd_count = ECMIntegrals::new(vec![Complex64::default(), cx(0.3, 0.0), cx(0.0, 0.0)]).unwrap();
        assert!(matches!(
            turning_constraints(&lat, &odd_count, 1),
            Err(Error::BadConfig(_))
        ));
        let odd_vals = ECMIntegrals::new(vec![cx(0.2, 0.0), cx(0.3, 0.0)]).unwrap();
        assert!(matches!(
            turning_constraints(&lat, &odd_vals, 1),
            Err(Error::BadConfig(_))
        ));
    }

    #[test]
    fn constrained_four_particle_cubic_matches_the_wp_roots() {
        // For four particles the two first-order constraints pin I = (0, 0,
        // 0, g2/2), and the slope cubic collapses to 4 t^3 - g2 t - g3,
        // whose roots are the wp values at the half periods.
        let lat = lat_skew();
        let ints = ECMIntegrals::new(vec![
            Complex64::default(),
            Complex64::default(),
            Complex64::default(),
            lat.g2() / 2.0,
        ])
        .unwrap();
        let table = turning_constraints(&lat, &ints, 1).unwrap();
        assert!(
            table.residual() < 1e-9,
            "first-order constraints hold, residual {:.3e}",
            table.residual()
        );
        let cubic = branch_cubic(&lat, &ints).unwrap();
        assert!((cubic.b[0] - cx(4.0, 0.0)).norm() < 1e-10, "cubic leads with 4 p^3");
        assert!(cubic.b[1].norm() < 1e-10, "no p^2 alpha term");
        assert!(
            (cubic.b[2] + lat.g2()).norm() < 1e-10 * lat.g2().norm(),
            "p alpha^2 coefficient is -g2"
        );
        assert!(
            (cubic.b[3] + lat.g3()).norm() < 1e-10 * lat.g3().norm().max(1.0),
            "alpha^3 coefficient is -g3"
        );
        assert!(cubic.min_gap > 1e-6, "three distinct slopes, gap {:.3e}", cubic.min_gap);
        let mut oracle: Vec<Complex64> = (1..=3)
            .map(|j| lat.wp(lat.half_period(j)).unwrap())
            .collect();
        let mut got = cubic.roots.to_vec();
        oracle.sort_by(|u, v| (u.re, u.im).partial_cmp(&(v.re, v.im)).unwrap());
        got.sort_by(|u, v| (u.re, u.im).partial_cmp(&(v.re, v.im)).unwrap());
        for (g, o) in got.iter().zip(&oracle) {
            assert!(
                (g - o).norm() < 1e-8 * o.norm().max(1.0),
                "branch slope {g} against half-period wp value {o}"
            );
        }
        for &g in &cubic.roots {
            let val = cubic.b[0] * g * g * g + cubic.b[1] * g * g + cubic.b[2] * g + cubic.b[3];
            assert!(val.norm() < 1e-10, "cubic vanishes at its root, got {:.3e}", val.norm());
        }
    }

    #[test]
    fn branch_cubic_rejects_unconstrained_integrals() {
        let lat = lat();
        let ints = ECMIntegrals::new(vec![
            Complex64::default(),
            cx(0.4, 0.1),
            Complex64::default(),
            cx(0.2, -0.3),
        ])
        .unwrap();
        match branch_cubic(&lat, &ints) {
            Err(Error::ConstraintsNotMet(r)) => {
                assert!(r > 1e-8, "reported residual should be the violation, got {r:.3e}")
            }
            other => panic!("expected a constraint rejection, got {other:?}"),
        }
    }

    #[test]
    fn cubic_block_is_affine_in_the_integrals() {
        let lat = lat();
        let base = vec![
            Complex64::default(),
            cx(0.31, 0.12),
            Complex64::default(),
            cx(-0.22, 0.41),
        ];
        let step = vec![
            Complex64::default(),
            cx(0.17, -0.08),
            Complex64::default(),
            cx(0.09, 0.14),
        ];
        let block = |scale: f64| -> Vec<Complex64> {
            let vals: Vec<Complex64> = base
                .iter()
                .zip(&step)
                .map(|(b, s)| b + scale * s)
                .collect();
            let t = f_taylor_table(&lat, &ECMIntegrals::new(vals).unwrap(), 3);
            vec![t[0][3] / 6.0, t[1][2] / 2.0, t[2][1] / 2.0, t[3][0] / 6.0]
        };
        let b0 = block(0.0);
        let b1 = block(1.0);
        let b2 = block(2.0);
        for i in 0..4 {
            let lhs = b2[i] - b0[i];
            let rhs = 2.0 * (b1[i] - b0[i]);
            assert!(
                (lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0),
                "doubling the integral step doubles the cubic step, coefficient {i}"
            );
        }
    }

    #[test]
    fn singular_fiber_value_detects_the_nodal_curve() {
        let lat = lat();
        // Two particles: the value at half period j is I_2 - wp(omega_j),
        // so moving I_2 onto the wp value creates the node.
        let generic = ECMIntegrals::new(vec![Complex64::default(), cx(0.9, 0.4)]).unwrap();
        let v = cmsing_value(&lat, &generic, 1).unwrap();
        assert!(v.norm() > 1e-2, "generic curve misses the half-period point");
        // Secant iteration on I_2 alone.
        let value_at = |i2: Complex64| -> Complex64 {
            let ints = ECMIntegrals::new(vec![Complex64::default(), i2]).unwrap();
            cmsing_value(&lat, &ints, 1).unwrap()
        };
        let (mut x0, mut x1) = (cx(0.9, 0.4), cx(1.1, 0.3));
        let (mut f0, mut f1) = (value_at(x0), value_at(x1));
        for _ in 0..60 {
            let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = value_at(x2);
            if f1.norm() < 1e-12 {
                break;
            }
        }
        assert!(f1.norm() < 1e-10, "secant drives the fiber value to zero, got {:.3e}", f1.norm());
        let oracle = lat.wp(lat.half_period(1)).unwrap();
        assert!(
            (x1 - oracle).norm() < 1e-10 * oracle.norm(),
            "the root is the wp value at the half period, {x1} vs {oracle}"
        );
    }

    #[test]
    fn singular_fiber_value_is_even_under_half_period_negation() {
        let lat = lat_skew();
        let ints = ECMIntegrals::new(vec![
            Complex64::default(),
            cx(0.8, -0.3),
            Complex64::default(),
            cx(0.25, 0.55),
        ])
        .unwrap();
        for j in 1..=3 {
            let w = lat.half_period(j);
            let plus = charpoly_sigma(&lat, &ints, Complex64::default(), w, -1).unwrap();
            let minus = charpoly_sigma(&lat, &ints, Complex64::default(), -w, -1).unwrap();
            assert!(
                (plus - minus).norm() < 1e-9 * plus.norm().max(1.0),
                "half period {j}: value must not depend on the sign of omega"
            );
        }
    }

    #[test]
    fn floquet_multiplier_inverts_under_the_involution() {
        let lat = lat_skew();
        let (k, alpha) = (cx(0.7, -0.4), cx(0.26, 0.37));
        for dir in [FloquetDir::X, FloquetDir::Y] {
            let w = floquet(&lat, k, alpha, dir).unwrap();
            let winv = floquet(&lat, -k, -alpha, dir).unwrap();
            assert!(
                (w * winv - cx(1.0, 0.0)).norm() < 1e-10,
                "multiplier times its involution image is one, dir {dir:?}"
            );
        }
    }

    #[test]
    fn floquet_at_half_period_fixed_points_is_a_sign() {
        // At (k, alpha) = (0, omega_j) the exponents telescope through the
        // Legendre relation into integer multiples of i pi.
        let lat = lat();
        let expected_x = [cx(1.0, 0.0), cx(-1.0, 0.0), cx(-1.0, 0.0)];
        let expected_y = [cx(-1.0, 0.0), cx(1.0, 0.0), cx(-1.0, 0.0)];
        for j in 1..=3 {
            let w = lat.half_period(j);
            let wx = floquet(&lat, Complex64::default(), w, FloquetDir::X).unwrap();
            let wy = floquet(&lat, Complex64::default(), w, FloquetDir::Y).unwrap();
            assert!(
                (wx - expected_x[j - 1]).norm() < 1e-8,
                "w_x at half period {j} is {wx}, expected {}",
                expected_x[j - 1]
            );
            assert!(
                (wy - expected_y[j - 1]).norm() < 1e-8,
                "w_y at half period {j} is {wy}, expected {}",
                expected_y[j - 1]
            );
        }
    }

    #[test]
    fn gluing_rule_accepts_identity_and_balanced_diagonals() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 3;
        let g: Vec<Complex64> = (0..n * n)
            .map(|_| cx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let id = vec![cx(1.0, 0.0); n];
        assert!(gluing_ok(&id, &id, &g, 1e-14), "identity diagonals fix every matrix");
        // A diagonal G survives reciprocal diagonal factors.
        let w: Vec<Complex64> = (0..n)
            .map(|_| {
                let phase = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
                Complex64::from_polar(1.0, phase)
            })
            .collect();
        let winv: Vec<Complex64> = w.iter().map(|v| 1.0 / v).collect();
        let mut gd = vec![Complex64::default(); n * n];
        for i in 0..n {
            gd[i * n + i] = cx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        assert!(
            gluing_ok(&w, &winv, &gd, 1e-12),
            "reciprocal diagonals act trivially on a diagonal matrix"
        );
        assert!(
            gluing_defect(&w, &w, &g) > 1e-3,
            "unbalanced diagonals must be detected"
        );
    }

    #[test]
    fn branch_coefficients_single_out_the_transverse_sheet() {
        for n in [2_usize, 3, 4] {
            let lat = lat();
            let c = random_config(&lat, n, true, 40 + n as u64);
            let a = branch_exponents(&lat, &c).unwrap();
            assert!(
                (a[0] - cx(1.0 - n as f64, 0.0)).norm() < 0.05,
                "transverse branch coefficient for {n} particles is {}, expected {}",
                a[0],
                1.0 - n as f64
            );
            for (i, &ai) in a.iter().enumerate().skip(1) {
                assert!(
                    (ai - cx(1.0, 0.0)).norm() < 0.05,
                    "tangent branch {i} coefficient is {ai}, expected 1"
                );
            }
        }
    }

    #[test]
    fn second_coefficient_slope_counts_the_pairs() {
        let lat = lat();
        for n in [2_usize, 3, 4] {
            let c = random_config(&lat, n, n % 2 == 0, 50 + n as u64);
            let (slope, resid) = c2_wp_slope(&lat, &c).unwrap();
            let oracle = -((n * (n - 1)) as f64) / 2.0;
            assert!(
                (slope - cx(oracle, 0.0)).norm() < 1e-8 * oracle.abs(),
                "{n} particles: wp slope {slope} vs {oracle}"
            );
            assert!(
                resid < 1e-8 * oracle.abs(),
                "{n} particles: affine fit residual {resid:.3e}"
            );
        }
    }
}
