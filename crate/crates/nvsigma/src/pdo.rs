//! Pseudo-differential operators in d/dz with field coefficients.
//!
//! An operator is a truncated sum `sum_i w_i(z, zbar) D^i` with `D = d/dz`
//! acting on everything to its right and the zbar variable inert.  Orders run
//! from `top` down to a certified `low`; below `low` the expansion is unknown
//! tail, exactly as in [`crate::series`].  Composition uses the symbol rule
//!
//! ```text
//!   D^i (w D^j) = sum_{m >= 0} C(i, m) (d^m w) D^{i+j-m}
//! ```
//!
//! with the generalized binomial, so negative orders expand into infinitely
//! many terms and the truncation keeps `min(len(A), len(B))` certified orders.

use num_complex::Complex64;

use crate::linalg::binomial;
use crate::series::FieldSeries;
use crate::torus::{GridFunction, TorusShape};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct PseudoDiffOp {
    shape: TorusShape,
    top: i32,
    /// `coeffs[i]` multiplies D^{top - i}.
    coeffs: Vec<GridFunction>,
}

impl PseudoDiffOp {
    pub fn new(shape: TorusShape, top: i32, coeffs: Vec<GridFunction>) -> Self {
        assert!(!coeffs.is_empty(), "operator needs at least one order");
        for c in &coeffs {
            assert!(c.shape() == shape, "operator coefficients must share the grid");
        }
        Self { shape, top, coeffs }
    }

    /// The identity, certified down to order -(len - 1).
    pub fn identity(shape: TorusShape, len: usize) -> Self {
        let mut coeffs = vec![GridFunction::zeros(shape); len];
        coeffs[0] = GridFunction::constant(shape, Complex64::new(1.0, 0.0));
        Self { shape, top: 0, coeffs }
    }

    /// D^power, an exact operator, certified over `len` orders from the top.
    pub fn dz_pow(shape: TorusShape, power: i32, len: usize) -> Self {
        let mut coeffs = vec![GridFunction::zeros(shape); len];
        coeffs[0] = GridFunction::constant(shape, Complex64::new(1.0, 0.0));
        Self { shape, top: power, coeffs }
    }

    /// Multiplication by a field, certified over `len` orders from the top.
    pub fn multiplication(f: &GridFunction, len: usize) -> Self {
        let mut coeffs = vec![GridFunction::zeros(f.shape()); len];
        coeffs[0] = f.clone();
        Self { shape: f.shape(), top: 0, coeffs }
    }

    pub fn shape(&self) -> TorusShape {
        self.shape
    }

    pub fn top(&self) -> i32 {
        self.top
    }

    pub fn low(&self) -> i32 {
        self.top - (self.coeffs.len() as i32 - 1)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of D^order: zeros above the top, panic below the certified
    /// range.
    pub fn coeff_of_order(&self, order: i32) -> GridFunction {
        if order > self.top {
            return GridFunction::zeros(self.shape);
        }
        assert!(
            order >= self.low(),
            "order {order} lies below the certified range (low = {})",
            self.low()
        );
        self.coeffs[(self.top - order) as usize].clone()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            shape: self.shape,
            top: self.top,
            coeffs: self.coeffs.iter().map(|c| c.scaled(s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.shape == other.shape, "operator add: different grids");
        let top = self.top.max(other.top);
        let low = self.low().max(other.low());
        assert!(low <= top, "operator add: certified ranges do not overlap");
        let len = (top - low + 1) as usize;
        let coeffs = (0..len)
            .map(|i| {
                let order = top - i as i32;
                let a = if order >= self.low() {
                    self.coeff_of_order(order)
                } else {
                    GridFunction::zeros(self.shape)
                };
                let b = if order >= other.low() {
                    other.coeff_of_order(order)
                } else {
                    GridFunction::zeros(self.shape)
                };
                a.add(&b)
            })
            .collect();
        Self { shape: self.shape, top, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Operator product self . other, truncated to the certified range
    /// `min(len(self), len(other))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert!(self.shape == other.shape, "operator compose: different grids");
        let len = self.coeffs.len().min(other.coeffs.len());
        let top = self.top + other.top;
        let low = top - (len as i32 - 1);
        // d^m of every coefficient of `other`, up to the deepest m that can
        // still land inside the certified range.
        let max_m = (self.top + other.top - low).max(0) as usize;
        let derivs: Vec<Vec<GridFunction>> = other
            .coeffs
            .iter()
            .map(|c| {
                let mut row = Vec::with_capacity(max_m + 1);
                row.push(c.clone());
                for m in 1..=max_m {
                    let prev: &GridFunction = &row[m - 1];
                    row.push(prev.dz());
                }
                row
            })
            .collect();
        let mut coeffs = vec![GridFunction::zeros(self.shape); len];
        for (ia, wa) in self.coeffs.iter().enumerate() {
            let i = self.top - ia as i32;
            for (jb, db) in derivs.iter().enumerate() {
                let j = other.top - jb as i32;
                for (m, dmb) in db.iter().enumerate() {
                    let order = i + j - m as i32;
                    if order < low {
                        break;
                    }
                    let w = binomial(i as i64, m as u32);
                    if w == 0.0 {
                        continue;
                    }
                    let slot = (top - order) as usize;
                    coeffs[slot] = coeffs[slot].add(&wa.mul(dmb).scaled(Complex64::new(w, 0.0)));
                }
            }
        }
        Self { shape: self.shape, top, coeffs }
    }

    /// Formal adjoint: (w D^i)* = (-1)^i D^i . w.
    pub fn adjoint(&self) -> Self {
        let top = self.top;
        let low = self.low();
        let len = self.coeffs.len();
        let mut coeffs = vec![GridFunction::zeros(self.shape); len];
        for (ia, wa) in self.coeffs.iter().enumerate() {
            let i = self.top - ia as i32;
            let sign = if i.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let mut dm = wa.clone();
            for m in 0..len {
                let order = i - m as i32;
                if order < low {
                    break;
                }
                let w = sign * binomial(i as i64, m as u32);
                if w != 0.0 && order <= top {
                    let slot = (top - order) as usize;
                    coeffs[slot] = coeffs[slot].add(&dm.scaled(Complex64::new(w, 0.0)));
                }
                dm = dm.dz();
            }
        }
        Self { shape: self.shape, top, coeffs }
    }

    /// Strictly differential part: orders >= 1 kept, the rest zeroed.  The
    /// result is an exact finite operator, so the certified range is inherited
    /// unchanged.
    pub fn plus_part(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if self.top - i as i32 >= 1 {
                    c.clone()
                } else {
                    GridFunction::zeros(self.shape)
                }
            })
            .collect();
        Self { shape: self.shape, top: self.top, coeffs }
    }

    /// Coefficient of D^{-1}.
    pub fn res_partial(&self) -> GridFunction {
        self.coeff_of_order(-1)
    }

    /// Inverse of an operator of the form 1 + (strictly negative orders), by
    /// the terminating Neumann sum.  The order-0 coefficient must be the
    /// constant 1 and no positive orders may appear.
    pub fn invert_unit(&self) -> Result<Self> {
        if self.top != 0 {
            return Err(Error::NotMonic(format!(
                "expected top order 0, got {}",
                self.top
            )));
        }
        let lead = self.coeff_of_order(0);
        let one = GridFunction::constant(self.shape, Complex64::new(1.0, 0.0));
        let dev = lead.sub(&one).sup_norm();
        if dev > 1e-10 {
            return Err(Error::NotMonic(format!(
                "leading coefficient deviates from 1 by {dev:.3e}"
            )));
        }
        let n = self.sub(&Self::identity(self.shape, self.len()));
        let mut acc = Self::identity(self.shape, self.len());
        let mut power = Self::identity(self.shape, self.len());
        for j in 1..self.len() {
            power = power.compose(&n);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc = acc.add(&power.scaled(Complex64::new(sign, 0.0)));
        }
        Ok(acc)
    }

    /// self^n for n >= 1 by repeated composition.
    pub fn power(&self, n: u32) -> Self {
        assert!(n >= 1, "power expects a positive exponent");
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.compose(self);
        }
        acc
    }

    /// Act on the regular factor of a wave e^{k z} Z(k): each D becomes
    /// (k + d/dz) on Z, so order i contributes w_i . (k + d)^i Z.
    pub fn apply_to_wave(&self, z: &FieldSeries) -> FieldSeries {
        assert!(self.shape == z.shape(), "apply_to_wave: different grids");
        let mut acc: Option<FieldSeries> = None;
        for (ia, wa) in self.coeffs.iter().enumerate() {
            let i = self.top - ia as i32;
            let term = z.apply_k_plus_dz(i);
            let scaled = FieldSeries::new(
                self.shape,
                term.head(),
                term.terms().iter().map(|t| wa.mul(t)).collect(),
            );
            acc = Some(match acc {
                None => scaled,
                Some(a) => a.add(&scaled),
            });
        }
        acc.expect("operator has at least one order")
    }

    /// Largest coefficient sup-norm.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.sup_norm()).fold(0.0, f64::max)
    }

    pub fn truncated(&self, len: usize) -> Self {
        assert!(len >= 1 && len <= self.coeffs.len());
        Self { shape: self.shape, top: self.top, coeffs: self.coeffs[..len].to_vec() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn shape() -> TorusShape {
        TorusShape::new(c(0.0, 1.0), 16, 16).unwrap()
    }

    fn smooth_field(shape: TorusShape, a: f64, b: f64) -> GridFunction {
        let two_pi = 2.0 * std::f64::consts::PI;
        GridFunction::from_fn(shape, |x, y| {
            c(
                (two_pi * (a * x + y)).cos(),
                b * (two_pi * (x - y)).sin(),
            )
        })
    }

    #[test]
    fn leibniz_rule_in_composition() {
        // D . f = f D + f', read off as operator coefficients.
        let sh = shape();
        let f = smooth_field(sh, 1.0, 0.4);
        let d = PseudoDiffOp::dz_pow(sh, 1, 3);
        let mf = PseudoDiffOp::multiplication(&f, 3);
        let df = d.compose(&mf);
        assert_eq!(df.top(), 1);
        assert!(df.coeff_of_order(1).sub(&f).sup_norm() < 1e-12);
        assert!(df.coeff_of_order(0).sub(&f.dz()).sup_norm() < 1e-10);
    }

    #[test]
    fn composition_is_associative_on_certified_range() {
        let sh = shape();
        let a = PseudoDiffOp::new(
            sh,
            1,
            vec![
                GridFunction::constant(sh, c(1.0, 0.0)),
                smooth_field(sh, 1.0, 0.2),
                smooth_field(sh, 2.0, 0.0),
                smooth_field(sh, 1.0, -0.3),
            ],
        );
        let b = PseudoDiffOp::new(
            sh,
            0,
            vec![
                smooth_field(sh, 2.0, 0.1),
                smooth_field(sh, 1.0, 0.5),
                smooth_field(sh, 3.0, 0.0),
                smooth_field(sh, 2.0, -0.2),
            ],
        );
        let d = PseudoDiffOp::dz_pow(sh, -1, 4);
        let left = a.compose(&b).compose(&d);
        let right = a.compose(&b.compose(&d));
        assert_eq!(left.top(), right.top());
        assert_eq!(left.len(), right.len());
        let scale = left.sup_norm().max(1.0);
        for i in 0..left.len() {
            let order = left.top() - i as i32;
            assert!(
                left.coeff_of_order(order).sub(&right.coeff_of_order(order)).sup_norm()
                    < 1e-9 * scale,
                "associativity fails at order {order}"
            );
        }
    }

    #[test]
    fn adjoint_of_first_order_operator() {
        // (f D)* = -D . f = -f D - f'
        let sh = shape();
        let f = smooth_field(sh, 1.0, 0.3);
        let a = PseudoDiffOp::new(sh, 1, vec![f.clone(), GridFunction::zeros(sh), GridFunction::zeros(sh)]);
        let star = a.adjoint();
        assert!(star.coeff_of_order(1).add(&f).sup_norm() < 1e-12);
        assert!(star.coeff_of_order(0).add(&f.dz()).sup_norm() < 1e-10);
    }

    #[test]
    fn adjoint_is_an_involution_and_antihomomorphism() {
        let sh = shape();
        let a = PseudoDiffOp::new(
            sh,
            1,
            vec![
                GridFunction::constant(sh, c(1.0, 0.0)),
                smooth_field(sh, 1.0, 0.1),
                smooth_field(sh, 2.0, -0.2),
                smooth_field(sh, 1.0, 0.4),
                smooth_field(sh, 3.0, 0.0),
            ],
        );
        let b = PseudoDiffOp::new(
            sh,
            0,
            vec![
                smooth_field(sh, 1.0, -0.1),
                smooth_field(sh, 2.0, 0.3),
                smooth_field(sh, 1.0, 0.0),
                smooth_field(sh, 2.0, 0.2),
                smooth_field(sh, 1.0, 0.5),
            ],
        );
        let twice = a.adjoint().adjoint();
        let scale = a.sup_norm().max(1.0);
        for i in 0..a.len() {
            let order = a.top() - i as i32;
            assert!(
                twice.coeff_of_order(order).sub(&a.coeff_of_order(order)).sup_norm()
                    < 1e-9 * scale,
                "double adjoint differs at order {order}"
            );
        }
        let lhs = a.compose(&b).adjoint();
        let rhs = b.adjoint().compose(&a.adjoint());
        let scale = lhs.sup_norm().max(1.0);
        for i in 0..lhs.len() {
            let order = lhs.top() - i as i32;
            assert!(
                lhs.coeff_of_order(order).sub(&rhs.coeff_of_order(order)).sup_norm()
                    < 1e-8 * scale,
                "(AB)* != B*A* at order {order}"
            );
        }
    }

    #[test]
    fn neumann_inverse_round_trips() {
        let sh = shape();
        let mut coeffs = vec![GridFunction::constant(sh, c(1.0, 0.0))];
        coeffs.push(smooth_field(sh, 1.0, 0.2));
        coeffs.push(smooth_field(sh, 2.0, -0.1));
        coeffs.push(smooth_field(sh, 1.0, 0.3));
        coeffs.push(smooth_field(sh, 2.0, 0.1));
        let phi = PseudoDiffOp::new(sh, 0, coeffs);
        let inv = phi.invert_unit().unwrap();
        let prod = phi.compose(&inv);
        let id = PseudoDiffOp::identity(sh, prod.len());
        let defect = prod.sub(&id);
        assert!(
            defect.sup_norm() < 1e-9 * phi.sup_norm().max(1.0),
            "Phi . Phi^-1 should be the identity on the certified range"
        );
    }

    #[test]
    fn invert_unit_rejects_non_unit_lead() {
        let sh = shape();
        let bad = PseudoDiffOp::multiplication(&smooth_field(sh, 1.0, 0.0), 3);
        assert!(matches!(bad.invert_unit(), Err(Error::NotMonic(_))));
    }

    #[test]
    fn residue_shifts_by_total_derivative_under_dz_conjugation() {
        // res(D . A . D^-1) = res(A) + d/dz (order-0 coefficient of A).
        let sh = shape();
        let a = PseudoDiffOp::new(
            sh,
            1,
            vec![
                GridFunction::constant(sh, c(1.0, 0.0)),
                smooth_field(sh, 1.0, 0.25),
                smooth_field(sh, 2.0, -0.15),
                smooth_field(sh, 1.0, 0.05),
                smooth_field(sh, 3.0, 0.2),
            ],
        );
        let d = PseudoDiffOp::dz_pow(sh, 1, a.len());
        let dinv = PseudoDiffOp::dz_pow(sh, -1, a.len());
        let conj = d.compose(&a).compose(&dinv);
        let lhs = conj.res_partial();
        let rhs = a.res_partial().add(&a.coeff_of_order(0).dz());
        assert!(
            lhs.sub(&rhs).sup_norm() < 1e-9 * a.sup_norm().max(1.0),
            "conjugation by D shifts the residue by an exact derivative"
        );
    }

    #[test]
    fn plus_part_zeroes_nonpositive_orders() {
        let sh = shape();
        let a = PseudoDiffOp::new(
            sh,
            2,
            vec![
                GridFunction::constant(sh, c(1.0, 0.0)),
                smooth_field(sh, 1.0, 0.1),
                smooth_field(sh, 2.0, 0.2),
                smooth_field(sh, 1.0, 0.3),
            ],
        );
        let p = a.plus_part();
        assert!(p.coeff_of_order(2).sub(&a.coeff_of_order(2)).sup_norm() == 0.0);
        assert!(p.coeff_of_order(1).sub(&a.coeff_of_order(1)).sup_norm() == 0.0);
        assert!(p.coeff_of_order(0).sup_norm() == 0.0);
        assert!(p.coeff_of_order(-1).sup_norm() == 0.0);
    }

    #[test]
    fn wave_action_matches_series_shift() {
        // D acting on the wave frame is (k + d), and multiplication by a field
        // commutes with the frame, so both paths must agree.
        let sh = shape();
        let one = GridFunction::constant(sh, c(1.0, 0.0));
        let z = FieldSeries::new(sh, 0, vec![one, smooth_field(sh, 1.0, 0.2), smooth_field(sh, 2.0, 0.1)]);
        let d = PseudoDiffOp::dz_pow(sh, 1, 3);
        let via_op = d.apply_to_wave(&z);
        let via_series = z.apply_k_plus_dz(1);
        assert_eq!(via_op.head(), via_series.head());
        for t in 0..via_op.len().min(via_series.len()) {
            assert!(via_op.term(t).sub(via_series.term(t)).sup_norm() < 1e-12);
        }
    }
}
