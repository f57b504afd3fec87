//! Truncated Laurent series in the spectral parameter k.
//!
//! Two flavours share the same bookkeeping: [`CSeries`] has constant
//! coefficients, [`FieldSeries`] has [`GridFunction`] coefficients.  A series
//! stores its top power `head` and the coefficients of k^head, k^{head-1}, ...
//! downward; everything above `head` is exactly zero, everything below the
//! stored range is unknown tail.  Products therefore truncate to the range
//! both factors can certify, which is the usual rule for series with unknown
//! tails: `len(a * b) = min(len(a), len(b))`.

use num_complex::Complex64;

use crate::linalg::binomial;
use crate::torus::{GridFunction, TorusShape};

/// Sign of (-1)^p for any integer p.
pub(crate) fn parity_sign(p: i32) -> f64 {
    if p.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Truncated Laurent series with constant coefficients: `c[i]` multiplies
/// k^{head - i}.
#[derive(Clone, Debug, PartialEq)]
pub struct CSeries {
    head: i32,
    c: Vec<Complex64>,
}

impl CSeries {
    pub fn new(head: i32, c: Vec<Complex64>) -> Self {
        assert!(!c.is_empty(), "CSeries needs at least one coefficient");
        Self { head, c }
    }

    /// The constant series 1, truncated after `len` coefficients.
    pub fn one(len: usize) -> Self {
        let mut c = vec![Complex64::default(); len];
        c[0] = Complex64::new(1.0, 0.0);
        Self { head: 0, c }
    }

    pub fn head(&self) -> i32 {
        self.head
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Lowest power with a stored (certified) coefficient.
    pub fn low(&self) -> i32 {
        self.head - (self.c.len() as i32 - 1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    /// Coefficient of k^p.  Zero above the head; panics below the certified
    /// range, since that coefficient was truncated away.
    pub fn coeff(&self, p: i32) -> Complex64 {
        if p > self.head {
            return Complex64::default();
        }
        assert!(
            p >= self.low(),
            "coefficient of k^{p} lies below the truncation (low = {})",
            self.low()
        );
        self.c[(self.head - p) as usize]
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { head: self.head, c: self.c.iter().map(|&v| s * v).collect() }
    }

    /// Multiply by k^d.
    pub fn shifted(&self, d: i32) -> Self {
        Self { head: self.head + d, c: self.c.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let head = self.head.max(other.head);
        let low = self.low().max(other.low());
        let len = (head - low + 1) as usize;
        let c = (0..len)
            .map(|i| {
                let p = head - i as i32;
                let a = if p >= self.low() { self.coeff(p) } else { Complex64::default() };
                let b = if p >= other.low() { other.coeff(p) } else { Complex64::default() };
                a + b
            })
            .collect();
        Self { head, c }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.c.len().min(other.c.len());
        let mut c = vec![Complex64::default(); len];
        for (t, ct) in c.iter_mut().enumerate() {
            for i in 0..=t {
                *ct += self.c[i] * other.c[t - i];
            }
        }
        Self { head: self.head + other.head, c }
    }

    /// Multiplicative inverse; requires a unit leading coefficient magnitude.
    pub fn inverse(&self) -> Self {
        let a0 = self.c[0];
        assert!(a0.norm() > 0.0, "cannot invert a series with zero leading coefficient");
        let mut b = vec![Complex64::default(); self.c.len()];
        b[0] = a0.inv();
        for t in 1..self.c.len() {
            let mut acc = Complex64::default();
            for i in 1..=t {
                acc += self.c[i] * b[t - i];
            }
            b[t] = -acc / a0;
        }
        Self { head: -self.head, c: b }
    }

    /// k -> -k.
    pub fn reflected(&self) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, &v)| v * parity_sign(self.head - i as i32))
            .collect();
        Self { head: self.head, c }
    }

    /// Principal square root of a series with even head.  The branch follows
    /// the principal root of the leading coefficient.
    pub fn sqrt(&self) -> Self {
        assert!(self.head % 2 == 0, "square root needs an even head power");
        let r0 = self.c[0].sqrt();
        assert!(r0.norm() > 0.0, "cannot take sqrt of a series with zero lead");
        let mut r = vec![Complex64::default(); self.c.len()];
        r[0] = r0;
        for m in 1..self.c.len() {
            let mut acc = Complex64::default();
            for a in 1..m {
                acc += r[a] * r[m - a];
            }
            r[m] = (self.c[m] - acc) / (2.0 * r0);
        }
        Self { head: self.head / 2, c: r }
    }

    /// Largest coefficient magnitude.
    pub fn linf(&self) -> f64 {
        self.c.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Magnitude of the odd-in-k content, i.e. linf of (f(k) + f(-k)) / 2's
    /// complement; zero means f is odd.
    pub fn even_content(&self) -> f64 {
        self.add(&self.reflected()).linf() / 2.0
    }

    /// Zero means f is even.
    pub fn odd_content(&self) -> f64 {
        self.sub(&self.reflected()).linf() / 2.0
    }

    pub fn truncated(&self, len: usize) -> Self {
        assert!(len >= 1 && len <= self.c.len());
        Self { head: self.head, c: self.c[..len].to_vec() }
    }
}

/// Truncated Laurent series whose coefficients are fields on a torus grid:
/// `terms[t]` multiplies k^{head - t}.
#[derive(Clone, Debug)]
pub struct FieldSeries {
    shape: TorusShape,
    head: i32,
    terms: Vec<GridFunction>,
}

impl FieldSeries {
    pub fn new(shape: TorusShape, head: i32, terms: Vec<GridFunction>) -> Self {
        assert!(!terms.is_empty(), "FieldSeries needs at least one term");
        for t in &terms {
            assert!(t.shape() == shape, "FieldSeries terms must share the grid");
        }
        Self { shape, head, terms }
    }

    /// The constant series 1 with `len` certified terms.
    pub fn one(shape: TorusShape, len: usize) -> Self {
        let mut terms = vec![GridFunction::zeros(shape); len];
        terms[0] = GridFunction::constant(shape, Complex64::new(1.0, 0.0));
        Self { shape, head: 0, terms }
    }

    pub fn shape(&self) -> TorusShape {
        self.shape
    }

    pub fn head(&self) -> i32 {
        self.head
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn low(&self) -> i32 {
        self.head - (self.terms.len() as i32 - 1)
    }

    pub fn terms(&self) -> &[GridFunction] {
        &self.terms
    }

    pub fn term(&self, t: usize) -> &GridFunction {
        &self.terms[t]
    }

    /// Coefficient field of k^p: zeros above the head, panic below the
    /// certified range.
    pub fn coeff_of_power(&self, p: i32) -> GridFunction {
        if p > self.head {
            return GridFunction::zeros(self.shape);
        }
        assert!(
            p >= self.low(),
            "coefficient of k^{p} lies below the truncation (low = {})",
            self.low()
        );
        self.terms[(self.head - p) as usize].clone()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            shape: self.shape,
            head: self.head,
            terms: self.terms.iter().map(|t| t.scaled(s)).collect(),
        }
    }

    pub fn shifted(&self, d: i32) -> Self {
        Self { shape: self.shape, head: self.head + d, terms: self.terms.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.shape == other.shape, "FieldSeries add: different grids");
        let head = self.head.max(other.head);
        let low = self.low().max(other.low());
        let len = (head - low + 1) as usize;
        let terms = (0..len)
            .map(|i| {
                let p = head - i as i32;
                let a = if p >= self.low() {
                    self.coeff_of_power(p)
                } else {
                    GridFunction::zeros(self.shape)
                };
                let b = if p >= other.low() {
                    other.coeff_of_power(p)
                } else {
                    GridFunction::zeros(self.shape)
                };
                a.add(&b)
            })
            .collect();
        Self { shape: self.shape, head, terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Pointwise-in-z product, convolution in k, truncated to the certified
    /// range of both factors.
    pub fn mul(&self, other: &Self) -> Self {
        assert!(self.shape == other.shape, "FieldSeries mul: different grids");
        let len = self.terms.len().min(other.terms.len());
        let mut terms = vec![GridFunction::zeros(self.shape); len];
        for (t, out) in terms.iter_mut().enumerate() {
            for i in 0..=t {
                *out = out.add(&self.terms[i].mul(&other.terms[t - i]));
            }
        }
        Self { shape: self.shape, head: self.head + other.head, terms }
    }

    /// Multiply by a constant-coefficient series.
    pub fn mul_cseries(&self, s: &CSeries) -> Self {
        let len = self.terms.len().min(s.len());
        let mut terms = vec![GridFunction::zeros(self.shape); len];
        for (t, out) in terms.iter_mut().enumerate() {
            for i in 0..=t {
                *out = out.add(&self.terms[t - i].scaled(s.coeffs()[i]));
            }
        }
        Self { shape: self.shape, head: self.head + s.head(), terms }
    }

    /// k -> -k.
    pub fn reflected(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| t.scaled(Complex64::new(parity_sign(self.head - i as i32), 0.0)))
            .collect();
        Self { shape: self.shape, head: self.head, terms }
    }

    /// Term-by-term derivative of the coefficient fields.
    pub fn dz(&self) -> Self {
        Self {
            shape: self.shape,
            head: self.head,
            terms: self.terms.iter().map(|t| t.dz()).collect(),
        }
    }

    pub fn dzbar(&self) -> Self {
        Self {
            shape: self.shape,
            head: self.head,
            terms: self.terms.iter().map(|t| t.dzbar()).collect(),
        }
    }

    /// Apply (k + d/dz)^i for any integer i, including negative.  The result
    /// keeps the same number of certified terms with head raised by i:
    ///
    /// ```text
    ///   coeff of k^{head + i - t}  =  sum_j C(i, j) (d/dz)^j f_{t-j}
    /// ```
    pub fn apply_k_plus_dz(&self, i: i32) -> Self {
        let len = self.terms.len();
        // Precompute z-derivatives of every term up to the maximal order used.
        let mut derivs: Vec<Vec<GridFunction>> = Vec::with_capacity(len);
        for t in &self.terms {
            let mut row = Vec::with_capacity(len);
            row.push(t.clone());
            for j in 1..len {
                let prev: &GridFunction = &row[j - 1];
                row.push(prev.dz());
            }
            derivs.push(row);
        }
        let mut terms = Vec::with_capacity(len);
        for t in 0..len {
            let mut acc = GridFunction::zeros(self.shape);
            for j in 0..=t {
                let w = binomial(i as i64, j as u32);
                if w != 0.0 {
                    acc = acc.axpy(Complex64::new(w, 0.0), &derivs[t - j][j]);
                }
            }
            terms.push(acc);
        }
        Self { shape: self.shape, head: self.head + i, terms }
    }

    /// Largest sup-norm over the certified terms.
    pub fn sup_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.sup_norm()).fold(0.0, f64::max)
    }

    pub fn truncated(&self, len: usize) -> Self {
        assert!(len >= 1 && len <= self.terms.len());
        Self { shape: self.shape, head: self.head, terms: self.terms[..len].to_vec() }
    }
}
