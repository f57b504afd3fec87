//! Formal Bloch wave series for a doubly periodic Schrodinger potential.
//!
//! The wave is the formal solution
//!
//! ```text
//!   Psi(k; z, zbar) = exp(k z + l(k) zbar) Z(k),
//!   Z(k) = 1 + zeta_1 k^{-1} + zeta_2 k^{-2} + ...,
//!   l(k) = l_1 k^{-1} + l_2 k^{-2} + ...,
//! ```
//!
//! of (d/dz)(d/dzbar) Psi = u Psi.  Substituting the ansatz and collecting
//! powers of k gives a triangular recursion: each level fixes the constant
//! l_{s+1} by the zero-mean solvability of the dzbar-equation and then solves
//! for a zero-mean zeta_{s+1}.  The dual series, the sigma-image comparison
//! (k -> -k) and the rescaling that makes the wave self-dual all live here.

use num_complex::Complex64;

use crate::linalg::binomial;
use crate::series::{parity_sign, CSeries, FieldSeries};
use crate::torus::{solve_dzbar, GridFunction, TorusShape};
use crate::{Error, Result};

/// Formal Bloch wave data: the potential u, the series coefficients zeta_s
/// (s = 1..=S) and the quasi-momentum constants l_s.
///
/// Waves built by [`bloch_wave`] carry zero-mean zeta_s; waves returned by
/// [`self_dualize`] are rescaled by a constant series in k, which shifts the
/// means away from zero while leaving the recursion identity intact.
#[derive(Clone, Debug)]
pub struct BlochWave {
    u: GridFunction,
    zetas: Vec<GridFunction>,
    ells: Vec<Complex64>,
}

impl BlochWave {
    /// Assemble a wave from parts already known to satisfy the recursion.
    pub fn from_parts(u: GridFunction, zetas: Vec<GridFunction>, ells: Vec<Complex64>) -> Self {
        assert_eq!(zetas.len(), ells.len(), "one l per zeta level");
        Self { u, zetas, ells }
    }

    pub fn order(&self) -> usize {
        self.zetas.len()
    }

    pub fn shape(&self) -> TorusShape {
        self.u.shape()
    }

    pub fn u(&self) -> &GridFunction {
        &self.u
    }

    /// zeta_s for s = 0..=S, with zeta_0 = 1.
    pub fn zeta(&self, s: usize) -> GridFunction {
        if s == 0 {
            GridFunction::constant(self.shape(), Complex64::new(1.0, 0.0))
        } else {
            self.zetas[s - 1].clone()
        }
    }

    pub fn ell(&self, s: usize) -> Complex64 {
        self.ells[s - 1]
    }

    pub fn ells(&self) -> &[Complex64] {
        &self.ells
    }

    /// Z(k) as a field series with head k^0 and S+1 retained coefficients.
    pub fn z_series(&self) -> FieldSeries {
        let mut terms = Vec::with_capacity(self.order() + 1);
        terms.push(GridFunction::constant(self.shape(), Complex64::new(1.0, 0.0)));
        terms.extend(self.zetas.iter().cloned());
        FieldSeries::new(self.shape(), 0, terms)
    }

    /// l(k) as a scalar series with head k^{-1}.
    pub fn ell_series(&self) -> CSeries {
        CSeries::new(-1, self.ells.clone())
    }

    /// Largest |l_{2s}| among the retained constants.  The quasi-momentum of
    /// a sigma-model potential is an odd series, so this is a diagnostic that
    /// should sit at roundoff for valid inputs.
    pub fn even_ell_defect(&self) -> f64 {
        self.ells
            .iter()
            .enumerate()
            .filter(|(i, _)| (i + 1) % 2 == 0)
            .map(|(_, l)| l.norm())
            .fold(0.0, f64::max)
    }

    /// Write the wave as a directory: wave.json with the order and the l
    /// constants as [re, im] pairs, plus the potential and each zeta level
    /// as torus CSV files.
    pub fn save(&self, dir: impl AsRef<std::path::Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.u.save_csv(dir.join("u.csv"))?;
        for (i, z) in self.zetas.iter().enumerate() {
            z.save_csv(dir.join(format!("zeta{}.csv", i + 1)))?;
        }
        let manifest = WaveManifest {
            s: self.order(),
            ells: self.ells.iter().map(|l| [l.re, l.im]).collect(),
        };
        let text =
            serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(dir.join("wave.json"), text)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<std::path::Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let text = std::fs::read_to_string(dir.join("wave.json"))?;
        let manifest: WaveManifest =
            serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        if manifest.ells.len() != manifest.s {
            return Err(Error::Parse("manifest order disagrees with l count".into()));
        }
        let u = GridFunction::load_csv(dir.join("u.csv"))?;
        let mut zetas = Vec::with_capacity(manifest.s);
        for i in 1..=manifest.s {
            let z = GridFunction::load_csv(dir.join(format!("zeta{i}.csv")))?;
            if z.shape() != u.shape() {
                return Err(Error::ShapeMismatch(format!(
                    "zeta{i} grid disagrees with the potential grid"
                )));
            }
            zetas.push(z);
        }
        let ells = manifest.ells.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        Ok(Self { u, zetas, ells })
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct WaveManifest {
    s: usize,
    ells: Vec<[f64; 2]>,
}

/// Build the Bloch wave of u through order k^{-S}.
///
/// Level s+1 solves
///
/// ```text
///   dzbar zeta_{s+1} = u zeta_s - dz dzbar zeta_s
///                      - sum_{j=1}^{s+1} l_j (zeta_{s+1-j} + dz zeta_{s-j})
/// ```
///
/// with zeta_0 = 1 and zeta_{-1} = 0.  The only mean on the right-hand side
/// comes from u zeta_s and the j = s+1 term, so l_{s+1} = mean(u zeta_s)
/// makes the equation solvable; zeta_{s+1} is the zero-mean solution.
pub fn bloch_wave(u: &GridFunction, order: usize) -> Result<BlochWave> {
    assert!(order >= 1, "series order must be at least 1");
    let shape = u.shape();
    let one = GridFunction::constant(shape, Complex64::new(1.0, 0.0));
    let mut zetas: Vec<GridFunction> = Vec::with_capacity(order);
    let mut ells: Vec<Complex64> = Vec::with_capacity(order);
    for level in 0..order {
        // zeta_{level} is the last computed coefficient (zeta_0 = 1).
        let prev = if level == 0 { &one } else { &zetas[level - 1] };
        let drive = u.mul(prev);
        let ell_next = drive.mean();
        let mut rhs = drive.sub(&prev.dz().dzbar());
        for j in 1..=level + 1 {
            let ell_j = if j == level + 1 { ell_next } else { ells[j - 1] };
            // zeta_{level+1-j} term
            let idx = level + 1 - j;
            let zt = if idx == 0 { one.clone() } else { zetas[idx - 1].clone() };
            rhs = rhs.axpy(-ell_j, &zt);
            // dz zeta_{level-j} term, absent when level < j
            if level >= j {
                let idx2 = level - j;
                let zd =
                    if idx2 == 0 { one.dz() } else { zetas[idx2 - 1].dz() };
                rhs = rhs.axpy(-ell_j, &zd);
            }
        }
        zetas.push(solve_dzbar(&rhs)?);
        ells.push(ell_next);
    }
    Ok(BlochWave { u: u.clone(), zetas, ells })
}

/// Re-evaluate both sides of the level equations on the stored coefficients
/// and return the largest sup-norm mismatch, normalized per level by the
/// scale of the right-hand side.
pub fn recursion_defect(w: &BlochWave) -> f64 {
    let one = GridFunction::constant(w.shape(), Complex64::new(1.0, 0.0));
    let mut worst = 0.0_f64;
    for level in 0..w.order() {
        let prev = w.zeta(level);
        let mut rhs = w.u.mul(&prev).sub(&prev.dz().dzbar());
        for j in 1..=level + 1 {
            let ell_j = w.ell(j);
            let idx = level + 1 - j;
            let zt = if idx == 0 { one.clone() } else { w.zeta(idx) };
            rhs = rhs.axpy(-ell_j, &zt);
            if level >= j {
                rhs = rhs.axpy(-ell_j, &w.zeta(level - j).dz());
            }
        }
        let lhs = w.zeta(level + 1).dzbar();
        let scale = rhs.sup_norm().max(1.0);
        worst = worst.max(lhs.sub(&rhs).sup_norm() / scale);
    }
    worst
}

/// Dual series coefficients xi*_1..xi*_S of the wave, defined by the residue
/// conditions
///
/// ```text
///   [ X(k) (k + dz)^s Z(k) ]_{k^0} = delta_{s0},   X = 1 + sum xi*_a k^{-a},
/// ```
///
/// which a triangular solve turns into
/// xi*_s = -sum_{a<s} xi*_a W^{(s)}_{s-a} with
/// W^{(s)}_t = sum_j C(s,j) d^j zeta_{t-j} / dz^j.
pub fn dual_series(w: &BlochWave) -> Vec<GridFunction> {
    let order = w.order();
    let shape = w.shape();
    // dz-derivative table: dtab[j][t] = d^j zeta_t, j, t = 0..=order.
    let mut dtab: Vec<Vec<GridFunction>> = Vec::with_capacity(order + 1);
    let base: Vec<GridFunction> = (0..=order).map(|t| w.zeta(t)).collect();
    dtab.push(base);
    for j in 1..=order {
        let next: Vec<GridFunction> = dtab[j - 1].iter().map(|f| f.dz()).collect();
        dtab.push(next);
    }
    let mut xs: Vec<GridFunction> = Vec::with_capacity(order + 1);
    xs.push(GridFunction::constant(shape, Complex64::new(1.0, 0.0)));
    for s in 1..=order {
        let w_of = |t: usize| -> GridFunction {
            let mut acc = GridFunction::zeros(shape);
            for j in 0..=t {
                let c = binomial(s as i64, j as u32);
                if c != 0.0 {
                    acc = acc.axpy(Complex64::new(c, 0.0), &dtab[j][t - j]);
                }
            }
            acc
        };
        let mut acc = GridFunction::zeros(shape);
        for (a, xa) in xs.iter().enumerate() {
            acc = acc.add(&xa.mul(&w_of(s - a)));
        }
        xs.push(acc.scaled(Complex64::new(-1.0, 0.0)));
    }
    xs.remove(0);
    xs
}

/// Independent check of the dual conditions: assemble X and Z as field
/// series, form X * (k + dz)^s Z through the product code path, and return
/// the largest sup norm of the k^0 coefficient (minus 1 at s = 0) over
/// s = 0..=S, normalized by the series scale.
///
/// The power is applied one step at a time so the arithmetic takes a
/// different floating-point path from the binomial-weighted tables of the
/// triangular solve; agreement is then evidence, not bookkeeping.
pub fn residue_defect(w: &BlochWave, dual: &[GridFunction]) -> f64 {
    let shape = w.shape();
    let z = w.z_series();
    let mut xterms = Vec::with_capacity(dual.len() + 1);
    xterms.push(GridFunction::constant(shape, Complex64::new(1.0, 0.0)));
    xterms.extend(dual.iter().cloned());
    let x = FieldSeries::new(shape, 0, xterms);
    let scale = x.sup_norm().max(z.sup_norm()).max(1.0);
    let mut worst = 0.0_f64;
    let mut pow = z;
    for s in 0..=w.order() {
        let prod = x.mul(&pow);
        let mut c0 = prod.coeff_of_power(0);
        if s == 0 {
            c0 = c0.sub(&GridFunction::constant(shape, Complex64::new(1.0, 0.0)));
        }
        worst = worst.max(c0.sup_norm() / scale);
        pow = pow.apply_k_plus_dz(1);
    }
    worst
}

/// Largest mismatch between the dual coefficients and the sigma image,
/// max over 1 <= s <= smax of sup |xi*_s - (-1)^s zeta_s| / scale.
/// Zero exactly when the wave is self-dual through that order.
pub fn self_duality_defect(w: &BlochWave, smax: usize) -> f64 {
    let dual = dual_series(w);
    let mut worst = 0.0_f64;
    for s in 1..=smax.min(w.order()) {
        let scale = w.zeta(s).sup_norm().max(1.0);
        let sign = Complex64::new(parity_sign(s as i32), 0.0);
        let diff = dual[s - 1].sub(&w.zeta(s).scaled(sign));
        worst = worst.max(diff.sup_norm() / scale);
    }
    worst
}

/// The constant ratio series h(k) with Z(-k) = h(k) X(k) and the rescaled
/// wave Psi h^{-1/2}, which is self-dual: its dual equals its sigma image.
///
/// h is measured order by order on the grid.  Each coefficient must be
/// constant across the torus (NotConstantRatio otherwise) and the odd
/// coefficients must vanish (OddObstruction otherwise); both failures signal
/// that u is not a potential with the required reflection structure.
pub fn self_dualize(w: &BlochWave) -> Result<(BlochWave, CSeries)> {
    let dual = dual_series(w);
    let order = w.order();
    let mut h = vec![Complex64::new(1.0, 0.0)];
    for m in 1..=order {
        // h_m = (-1)^m zeta_m - sum_{j<m} h_j xi*_{m-j}, evaluated as a grid
        // function with the previously extracted constants h_j.
        let mut field = w.zeta(m).scaled(Complex64::new(parity_sign(m as i32), 0.0));
        for (j, hj) in h.iter().enumerate() {
            field = field.axpy(-hj, &dual[m - j - 1]);
        }
        let mean = field.mean();
        let scale = w.zeta(m).sup_norm().max(1.0);
        let dev = field.sub(&GridFunction::constant(w.shape(), mean)).sup_norm() / scale;
        if dev > 1e-8 {
            return Err(Error::NotConstantRatio { dev });
        }
        h.push(mean);
    }
    let h_series = CSeries::new(0, h);
    for m in (1..=order).step_by(2) {
        let size = h_series.coeff(-(m as i32)).norm();
        if size > 1e-8 {
            return Err(Error::OddObstruction { index: m, size });
        }
    }
    // Strip the (roundoff-sized) odd part so the square root is exactly even.
    let even: Vec<Complex64> = (0..=order)
        .map(|m| if m % 2 == 0 { h_series.coeff(-(m as i32)) } else { Complex64::default() })
        .collect();
    let h_even = CSeries::new(0, even);
    let rho_inv = h_even.sqrt().inverse();
    let z_new = w.z_series().mul_cseries(&rho_inv);
    let zetas = (1..=order).map(|s| z_new.coeff_of_power(-(s as i32))).collect();
    Ok((BlochWave::from_parts(w.u.clone(), zetas, w.ells.clone()), h_even))
}

/// Residue of the odd bilinear form: the k^0 coefficient of
/// Z(-k) (k + dz)^{2n+1} Z(k), which vanishes identically for a self-dual
/// wave.  Returns the sup norm over the grid, normalized by the series scale.
pub fn odd_residue_defect(w: &BlochWave, n: usize) -> f64 {
    let i = (2 * n + 1) as i32;
    assert!(
        i <= w.order() as i32,
        "odd residue at order {i} needs the series through k^-{i}"
    );
    let z = w.z_series();
    let prod = z.reflected().mul(&z.apply_k_plus_dz(i));
    prod.coeff_of_power(0).sup_norm() / z.sup_norm().max(1.0)
}

/// Torus period for multiplier bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Period {
    X,
    Y,
}

/// Logarithm of the Floquet multiplier of the wave across one period, as a
/// series in k: log w_x = k + l(k), log w_y = tau k + conj(tau) l(k).
pub fn multiplier_exponents(w: &BlochWave, dir: Period) -> CSeries {
    let tau = w.shape().tau();
    let (lead, lscale) = match dir {
        Period::X => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
        Period::Y => (tau, tau.conj()),
    };
    let mut coeffs = vec![lead, Complex64::default()];
    coeffs.extend(w.ells.iter().map(|l| l * lscale));
    CSeries::new(1, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn shape() -> TorusShape {
        TorusShape::new(c(0.0, 1.0), 24, 24).unwrap()
    }

    fn cosine_potential(shape: TorusShape, eps: f64) -> GridFunction {
        GridFunction::from_fn(shape, |x, _| c(2.0 * eps * (2.0 * std::f64::consts::PI * x).cos(), 0.0))
    }

    /// A smooth real potential with both x and y structure and zero mean.
    fn smooth_potential(shape: TorusShape) -> GridFunction {
        use std::f64::consts::PI;
        GridFunction::from_fn(shape, |x, y| {
            c(
                0.4 * (2.0 * PI * x).cos() + 0.3 * (2.0 * PI * y).sin()
                    + 0.2 * (2.0 * PI * (x + y)).cos(),
                0.0,
            )
        })
    }

    #[test]
    fn constant_potential_gives_pure_first_order_quasi_momentum() {
        let u = GridFunction::constant(shape(), c(0.7, 0.0));
        let w = bloch_wave(&u, 8).unwrap();
        assert!((w.ell(1) - c(0.7, 0.0)).norm() < 1e-14, "l_1 equals the constant");
        // The spectral gate keeps each level exact here, not merely small.
        for s in 2..=8 {
            assert!(w.ell(s).norm() < 1e-15, "l_{s} vanishes for constant u");
        }
        for s in 1..=8 {
            assert!(w.zeta(s).sup_norm() < 1e-15, "zeta_{s} vanishes for constant u");
        }
    }

    #[test]
    fn first_step_matches_hand_solution_for_cosine_potential() {
        let sh = shape();
        let u = cosine_potential(sh, 0.1);
        let w = bloch_wave(&u, 3).unwrap();
        assert!(w.ell(1).norm() < 1e-14, "zero-mean potential has l_1 = 0");
        // dzbar^{-1} of cos(2 pi x) on the square torus is sin(2 pi x) / pi.
        let hand = GridFunction::from_fn(sh, |x, _| {
            c(0.2 / std::f64::consts::PI * (2.0 * std::f64::consts::PI * x).sin(), 0.0)
        });
        assert!(w.zeta(1).sub(&hand).sup_norm() < 1e-12, "zeta_1 = solve_dzbar(u)");
    }

    #[test]
    fn recursion_defect_is_roundoff_small() {
        let u = smooth_potential(shape());
        let w = bloch_wave(&u, 8).unwrap();
        assert!(recursion_defect(&w) < 1e-10, "stored coefficients satisfy the level equations");
        for s in 1..=8 {
            assert!(w.zeta(s).mean().norm() < 1e-12, "fresh waves carry zero-mean zeta_{s}");
        }
    }

    #[test]
    fn dual_low_orders_match_hand_formulas() {
        let u = smooth_potential(shape());
        let w = bloch_wave(&u, 4).unwrap();
        let dual = dual_series(&w);
        let want1 = w.zeta(1).scaled(c(-1.0, 0.0));
        assert!(dual[0].sub(&want1).sup_norm() < 1e-12, "xi*_1 = -zeta_1");
        let z1 = w.zeta(1);
        let want2 = z1
            .mul(&z1)
            .sub(&w.zeta(2))
            .sub(&z1.dz().scaled(c(2.0, 0.0)));
        assert!(
            dual[1].sub(&want2).sup_norm() < 1e-11,
            "xi*_2 = zeta_1^2 - zeta_2 - 2 dz zeta_1"
        );
    }

    #[test]
    fn residue_conditions_hold_on_independent_evaluation() {
        let u = smooth_potential(shape());
        let w = bloch_wave(&u, 8).unwrap();
        let dual = dual_series(&w);
        assert!(
            residue_defect(&w, &dual) < 1e-9,
            "dual series satisfies every retained residue condition"
        );
    }

    #[test]
    fn self_dualize_fixes_the_duality_defect() {
        let u = smooth_potential(shape());
        let w = bloch_wave(&u, 8).unwrap();
        let raw = self_duality_defect(&w, 6);
        let (sd, h) = self_dualize(&w).unwrap();
        let fixed = self_duality_defect(&sd, 6);
        assert!(raw > 1e-4, "generic wave is not self-dual, defect {raw:.2e}");
        assert!(fixed < 1e-9, "rescaled wave is self-dual, defect {fixed:.2e}");
        assert!((h.coeff(0) - c(1.0, 0.0)).norm() < 1e-12, "h starts at 1");
        assert!(h.odd_content() < 1e-12, "h is even in k");
        // The rescaling shifts means: mean(zeta~_2) is the k^{-2} coefficient
        // of h^{-1/2}.
        let rho_inv = h.sqrt().inverse();
        assert!(
            (sd.zeta(2).mean() - rho_inv.coeff(-2)).norm() < 1e-10,
            "rescaled zeta means record the rescaling series"
        );
        // l is untouched.
        for s in 1..=8 {
            assert!((sd.ell(s) - w.ell(s)).norm() == 0.0, "l is invariant under rescaling");
        }
    }

    #[test]
    fn self_dualize_is_idempotent() {
        let u = smooth_potential(shape());
        let (sd, _) = self_dualize(&bloch_wave(&u, 8).unwrap()).unwrap();
        let (sd2, h2) = self_dualize(&sd).unwrap();
        let one = CSeries::one(h2.len());
        assert!(h2.sub(&one).linf() < 1e-9, "already self-dual wave has h = 1");
        for s in 1..=8 {
            assert!(sd2.zeta(s).sub(&sd.zeta(s)).sup_norm() < 1e-9);
        }
    }

    #[test]
    fn odd_residues_vanish_only_after_self_dualization() {
        let u = smooth_potential(shape());
        let w = bloch_wave(&u, 8).unwrap();
        let (sd, _) = self_dualize(&w).unwrap();
        for n in 0..=2 {
            assert!(
                odd_residue_defect(&sd, n) < 1e-9,
                "odd residue 2n+1 = {} vanishes for the self-dual wave",
                2 * n + 1
            );
        }
        // The first two odd residues vanish for any wave (the ratio series
        // h(k) is constant and starts even), so the first order that can see
        // the missing rescaling is 2n+1 = 5.
        assert!(odd_residue_defect(&w, 2) > 1e-6, "negative control: raw wave keeps a residue");
    }

    #[test]
    fn corrupted_series_coefficient_is_rejected_by_self_dualize() {
        use std::f64::consts::PI;
        let sh = shape();
        let u = smooth_potential(sh);
        let w = bloch_wave(&u, 6).unwrap();
        // Perturb zeta_3 by a zero-mean field.  The perturbation cancels in
        // the ratio coefficient h_3 (it enters zeta_3 and the dual xi*_3 with
        // opposite signs), so the detector that must fire is the constancy
        // check at h_4.
        let mut zetas: Vec<GridFunction> = (1..=6).map(|s| w.zeta(s)).collect();
        let bump = GridFunction::from_fn(sh, |x, y| {
            c(1e-2 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos(), 0.0)
        });
        zetas[2] = zetas[2].add(&bump);
        let bad = BlochWave::from_parts(u, zetas, w.ells().to_vec());
        match self_dualize(&bad) {
            Err(Error::NotConstantRatio { dev }) => {
                assert!(dev > 1e-4, "corruption shows up well above tolerance, dev {dev:.2e}")
            }
            other => panic!("corrupted wave must fail the constancy check, got {other:?}"),
        }
    }

    #[test]
    fn multiplier_exponents_package_k_and_ell() {
        let u = smooth_potential(shape());
        let w = bloch_wave(&u, 5).unwrap();
        let wx = multiplier_exponents(&w, Period::X);
        assert_eq!(wx.head(), 1);
        assert!((wx.coeff(1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(wx.coeff(0).norm() < 1e-15, "no constant term in log w_x");
        for s in 1..=5 {
            assert!((wx.coeff(-(s as i32)) - w.ell(s)).norm() < 1e-15);
        }
        let wy = multiplier_exponents(&w, Period::Y);
        let tau = w.shape().tau();
        assert!((wy.coeff(1) - tau).norm() < 1e-15);
        for s in 1..=5 {
            assert!((wy.coeff(-(s as i32)) - tau.conj() * w.ell(s)).norm() < 1e-15);
        }
    }

    #[test]
    fn wave_survives_a_save_load_round_trip() {
        let u = smooth_potential(shape());
        let w = bloch_wave(&u, 4).unwrap();
        let dir = std::env::temp_dir().join("nvsigma_wave_roundtrip");
        w.save(&dir).unwrap();
        let back = BlochWave::load(&dir).unwrap();
        assert_eq!(back.order(), 4, "order restored");
        let mut worst = back.u().sub(w.u()).sup_norm();
        for s in 1..=4 {
            worst = worst.max(back.zeta(s).sub(&w.zeta(s)).sup_norm());
            worst = worst.max((back.ell(s) - w.ell(s)).norm());
        }
        assert!(worst < 1e-12, "wave data round-trips through files, defect {worst:.3e}");
        assert!(
            recursion_defect(&back) < 1e-10,
            "the reloaded wave still satisfies the recursion"
        );
        std::fs::remove_dir_all(&dir).ok();
    }
}
