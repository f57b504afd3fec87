//! Small dense numerical kernels over Complex64.
//!
//! Everything here works on row-major `Vec<Complex64>` buffers at desk scale
//! (matrices of dimension a few tens at most), so readability wins over
//! blocking or pivot finesse beyond partial pivoting.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, ToPrimitive, Zero};
use num_complex::Complex64;

use crate::{Error, Result};

/// Generalized binomial coefficient C(n, k) = n (n-1) ... (n-k+1) / k!.
///
/// Valid for any integer n, including negative, with k >= 0.  Computed in
/// exact rational arithmetic and converted at the end, so the result is exact
/// whenever it fits in the 53-bit mantissa, which covers every order this
/// crate reaches.
pub fn binomial(n: i64, k: u32) -> f64 {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..k as i64 {
        num *= BigInt::from(n - j);
        den *= BigInt::from(j + 1);
    }
    if num.is_zero() {
        return 0.0;
    }
    BigRational::new(num, den).to_f64().unwrap()
}

/// Determinant of an n-by-n matrix via partial-pivot LU.  Consumes the buffer.
pub fn lu_det(a: &mut [Complex64], n: usize) -> Complex64 {
    assert_eq!(a.len(), n * n, "lu_det: buffer is not n*n");
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].norm();
        for row in col + 1..n {
            let mag = a[row * n + col].norm();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Complex64::default();
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let diag = a[col * n + col];
        det *= diag;
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            for j in col..n {
                let sub = factor * a[col * n + j];
                a[row * n + j] -= sub;
            }
        }
    }
    det
}

/// Coefficients (c_1, ..., c_n) of the characteristic polynomial
/// det(k I - A) = k^n + c_1 k^{n-1} + ... + c_n, by the trace recursion
/// M_1 = A, c_m = -tr(M_m)/m, M_{m+1} = A (M_m + c_m I).
pub fn char_poly_coeffs(a: &[Complex64], n: usize) -> Vec<Complex64> {
    assert_eq!(a.len(), n * n, "char_poly_coeffs: buffer is not n*n");
    let mut coeffs = Vec::with_capacity(n);
    let mut m = a.to_vec();
    for step in 1..=n {
        let trace: Complex64 = (0..n).map(|i| m[i * n + i]).sum();
        let c = -trace / step as f64;
        coeffs.push(c);
        if step == n {
            break;
        }
        for i in 0..n {
            m[i * n + i] += c;
        }
        let mut next = vec![Complex64::default(); n * n];
        for i in 0..n {
            for kk in 0..n {
                let aik = a[i * n + kk];
                if aik == Complex64::default() {
                    continue;
                }
                for j in 0..n {
                    next[i * n + j] += aik * m[kk * n + j];
                }
            }
        }
        m = next;
    }
    coeffs
}

/// All roots of c_0 + c_1 x + ... + c_d x^d (c_d != 0) by Durand-Kerner
/// iteration from staggered points off the unit circle.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c = coeffs.to_vec();
    while let Some(last) = c.last() {
        if last.norm() < 1e-300 && c.len() > 1 {
            c.pop();
        } else {
            break;
        }
    }
    let d = c.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = c[d];
    for v in c.iter_mut() {
        *v /= lead;
    }
    let eval = |x: Complex64| -> Complex64 {
        let mut acc = Complex64::default();
        for &ci in c.iter().rev() {
            acc = acc * x + ci;
        }
        acc
    };
    // Radius slightly above the root bound keeps the initial points spread.
    let bound = 1.0 + c[..d].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..d)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / d as f64 + 0.4;
            Complex64::from_polar(0.9 * bound, angle)
        })
        .collect();
    for _ in 0..400 {
        let mut shift = 0.0_f64;
        for i in 0..d {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-280 {
                denom = Complex64::new(1e-280, 0.0);
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-13 * bound.max(1.0) {
            return Ok(roots);
        }
    }
    Err(Error::Parse("polynomial root iteration did not converge".into()))
}

/// Least squares solution of the overdetermined system A x = b via modified
/// Gram-Schmidt QR.  Returns (x, condition proxy), where the proxy is the
/// ratio of the largest to smallest diagonal magnitude of R.
pub fn lstsq(
    a: &[Complex64],
    b: &[Complex64],
    rows: usize,
    cols: usize,
) -> Result<(Vec<Complex64>, f64)> {
    assert_eq!(a.len(), rows * cols, "lstsq: matrix buffer mismatch");
    assert_eq!(b.len(), rows, "lstsq: rhs length mismatch");
    assert!(rows >= cols, "lstsq: need at least as many rows as columns");
    // Column-major copies of the columns of A.
    let mut q: Vec<Vec<Complex64>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[i * cols + j]).collect())
        .collect();
    let mut r = vec![Complex64::default(); cols * cols];
    for j in 0..cols {
        for i in 0..j {
            let proj: Complex64 = (0..rows).map(|t| q[i][t].conj() * q[j][t]).sum();
            r[i * cols + j] = proj;
            for t in 0..rows {
                let sub = proj * q[i][t];
                q[j][t] -= sub;
            }
        }
        let norm: f64 = q[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        r[j * cols + j] = Complex64::new(norm, 0.0);
        for t in 0..rows {
            q[j][t] /= norm;
        }
    }
    let diag_max = (0..cols).map(|j| r[j * cols + j].norm()).fold(0.0, f64::max);
    let diag_min = (0..cols)
        .map(|j| r[j * cols + j].norm())
        .fold(f64::INFINITY, f64::min);
    let cond = diag_max / diag_min;
    // x = R^{-1} Q^* b by back substitution.
    let mut qtb = vec![Complex64::default(); cols];
    for (j, qj) in q.iter().enumerate() {
        qtb[j] = (0..rows).map(|t| qj[t].conj() * b[t]).sum();
    }
    let mut x = vec![Complex64::default(); cols];
    for j in (0..cols).rev() {
        let mut acc = qtb[j];
        for i in j + 1..cols {
            acc -= r[j * cols + i] * x[i];
        }
        x[j] = acc / r[j * cols + j];
    }
    Ok((x, cond))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn binomial_matches_hand_values() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(0, 0), 1.0);
        assert_eq!(binomial(3, 5), 0.0, "k beyond n hits a zero factor");
        assert_eq!(binomial(-1, 3), -1.0);
        assert_eq!(binomial(-2, 3), -4.0);
        // C(-n, k) = (-1)^k C(n+k-1, k)
        assert_eq!(binomial(-20, 20), binomial(39, 20));
    }

    #[test]
    fn lu_det_on_known_matrices() {
        let mut a = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        assert!((lu_det(&mut a, 2) - c(-2.0, 0.0)).norm() < 1e-14);
        let mut s = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        assert_eq!(lu_det(&mut s, 2), c(0.0, 0.0));
        // det of [[i, 1], [1, i]] = i*i - 1 = -2
        let mut m = vec![c(0.0, 1.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        assert!((lu_det(&mut m, 2) - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn char_poly_matches_determinant_at_samples() {
        let a = vec![
            c(1.0, 0.5), c(2.0, 0.0), c(0.0, -1.0),
            c(0.0, 0.0), c(3.0, 0.0), c(1.0, 1.0),
            c(1.0, 0.0), c(0.5, 0.0), c(-1.0, 0.0),
        ];
        let coeffs = char_poly_coeffs(&a, 3);
        for lambda in [c(0.7, 0.3), c(-1.2, 0.0), c(0.0, 2.0)] {
            let mut shifted: Vec<Complex64> = a.iter().map(|v| -v).collect();
            for i in 0..3 {
                shifted[i * 3 + i] += lambda;
            }
            let direct = lu_det(&mut shifted, 3);
            let mut poly = lambda.powi(3);
            for (i, &ci) in coeffs.iter().enumerate() {
                poly += ci * lambda.powi(2 - i as i32);
            }
            assert!(
                (direct - poly).norm() < 1e-12 * direct.norm().max(1.0),
                "trace recursion disagrees with det(kI - A) at {lambda}"
            );
        }
    }

    #[test]
    fn poly_roots_finds_real_and_complex_roots() {
        // (x-1)(x-2)(x-3) = -6 + 11x - 6x^2 + x^3
        let coeffs = vec![c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)];
        let mut roots = poly_roots(&coeffs).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (root, want) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((root - c(want, 0.0)).norm() < 1e-9, "expected root {want}");
        }
        let quad = vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let roots = poly_roots(&quad).unwrap();
        let prod = roots[0] * roots[1];
        assert!((prod - c(1.0, 0.0)).norm() < 1e-9, "x^2+1 roots multiply to 1");
        assert!((roots[0] + roots[1]).norm() < 1e-9, "x^2+1 roots are opposite");
    }

    #[test]
    fn lstsq_recovers_exact_solution() {
        // 4 rows, 2 cols, consistent system.
        let a = vec![
            c(1.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(1.0, 0.0),
            c(1.0, 0.0), c(1.0, 0.0),
            c(2.0, 0.0), c(-1.0, 0.0),
        ];
        let x_true = [c(0.5, 1.0), c(-2.0, 0.25)];
        let b: Vec<Complex64> = (0..4)
            .map(|i| a[i * 2] * x_true[0] + a[i * 2 + 1] * x_true[1])
            .collect();
        let (x, cond) = lstsq(&a, &b, 4, 2).unwrap();
        assert!((x[0] - x_true[0]).norm() < 1e-12);
        assert!((x[1] - x_true[1]).norm() < 1e-12);
        assert!(cond < 100.0);
    }
}
