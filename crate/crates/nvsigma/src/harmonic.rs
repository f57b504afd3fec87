//! Maps from the torus to the unit sphere: the stereographic instanton
//! construction, the scalar potential it induces, moment tables and their
//! triangular recursion, tangency pairings against the dressed flows, the
//! linearized operator, topological charge, and reconstruction of
//! three-component maps from a meromorphic function pair.

use crate::ba::BlochWave;
use crate::nv::dress;
use crate::torus::{GridFunction, TorusShape};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Allowed drift of the pointwise square sum away from one.
pub const UNIT_TOL: f64 = 1e-10;
/// Imaginary content below this marks a map as real.
pub const REAL_TOL: f64 = 1e-10;
/// Relative threshold on the isotropy bilinears used by [`wm_order`].
pub const WM_TOL: f64 = 1e-7;
/// Admissibility threshold on the squared-pair identity in
/// [`o3_reconstruct`].
pub const FG_TOL: f64 = 1e-8;

fn cc(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Componentwise bilinear pairing sum_i a_i b_i; no conjugation.
fn bilinear(a: &[GridFunction], b: &[GridFunction]) -> GridFunction {
    let mut acc = a[0].mul(&b[0]);
    for (x, y) in a.iter().zip(b).skip(1) {
        acc = acc.add(&x.mul(y));
    }
    acc
}

fn unit_defect_of(q: &[GridFunction]) -> f64 {
    bilinear(q, q)
        .map(|v| v - 1.0)
        .sup_norm()
}

fn binom(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for j in 0..k {
        v = v * (n - j) as f64 / (j + 1) as f64;
    }
    v
}

/// A map from the torus into the complex quadric sum_i (q^i)^2 = 1.
///
/// The constraint uses the bilinear form without conjugation, so complex
/// maps are admitted; maps whose samples are real up to [`REAL_TOL`] are
/// flagged and unlock the real-only operations such as
/// [`instanton_charge`].
#[derive(Debug, Clone)]
pub struct SphereMap {
    q: Vec<GridFunction>,
    is_real: bool,
}

#[derive(Serialize, Deserialize)]
struct MapManifest {
    components: usize,
    real: bool,
    files: Vec<String>,
}

impl SphereMap {
    pub fn new(q: Vec<GridFunction>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::BadShape(
                "a sphere map needs at least one component".into(),
            ));
        }
        let shape = q[0].shape();
        for f in &q {
            if f.shape() != shape {
                return Err(Error::ShapeMismatch(
                    "map components must share one grid".into(),
                ));
            }
            if !f.is_finite() {
                return Err(Error::BadInstanton("map has non-finite samples".into()));
            }
        }
        let defect = unit_defect_of(&q);
        if defect > UNIT_TOL {
            return Err(Error::NormViolation(defect));
        }
        let is_real = q.iter().map(GridFunction::max_imag).fold(0.0, f64::max) <= REAL_TOL;
        Ok(SphereMap { q, is_real })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn shape(&self) -> TorusShape {
        self.q[0].shape()
    }

    pub fn component(&self, i: usize) -> &GridFunction {
        &self.q[i]
    }

    pub fn components(&self) -> &[GridFunction] {
        &self.q
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// Worst pointwise deviation of (q, q) from one.
    pub fn unit_defect(&self) -> f64 {
        unit_defect_of(&self.q)
    }

    /// Writes a manifest plus one CSV per component into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for (i, f) in self.q.iter().enumerate() {
            let name = format!("q{i}.csv");
            f.save_csv(dir.join(&name))?;
            files.push(name);
        }
        let manifest = MapManifest {
            components: self.q.len(),
            real: self.is_real,
            files,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(dir.join("map.json"), text)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let text = std::fs::read_to_string(dir.join("map.json"))?;
        let manifest: MapManifest =
            serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        if manifest.files.len() != manifest.components {
            return Err(Error::Parse("manifest component count disagrees".into()));
        }
        let mut q = Vec::with_capacity(manifest.components);
        for name in &manifest.files {
            q.push(GridFunction::load_csv(dir.join(name))?);
        }
        Self::new(q)
    }
}

/// Three-component map built from samples of a function and its formal
/// conjugate: q^1 + i q^2 = 2v/(1+v vbar), q^3 = (1-v vbar)/(1+v vbar).
///
/// Where |v vbar| exceeds one the algebraically equivalent expression in
/// (1/v, 1/vbar) is used instead, so poles of v land smoothly on the
/// antipode (0, 0, -1); infinities in the samples are absorbed by the
/// reciprocal branch.
pub fn stereographic(v: &GridFunction, vbar: &GridFunction) -> Result<SphereMap> {
    if v.shape() != vbar.shape() {
        return Err(Error::ShapeMismatch(
            "v and vbar must share one grid".into(),
        ));
    }
    let shape = v.shape();
    let one = cc(1.0, 0.0);
    let i = cc(0.0, 1.0);
    let mut q1 = Vec::with_capacity(shape.len());
    let mut q2 = Vec::with_capacity(shape.len());
    let mut q3 = Vec::with_capacity(shape.len());
    for (&a, &ab) in v.values().iter().zip(vbar.values()) {
        let p = a * ab;
        if p.norm() <= 1.0 {
            let den = one + p;
            q1.push((a + ab) / den);
            q2.push(-i * (a - ab) / den);
            q3.push((one - p) / den);
        } else {
            let w = one / a;
            let wb = one / ab;
            let pw = w * wb;
            let den = one + pw;
            q1.push((w + wb) / den);
            q2.push(i * (w - wb) / den);
            q3.push((pw - one) / den);
        }
    }
    SphereMap::new(vec![
        GridFunction::from_values(shape, q1)?,
        GridFunction::from_values(shape, q2)?,
        GridFunction::from_values(shape, q3)?,
    ])
}

/// The scalar field -(d_z q, d_zbar q) that closes the second-order
/// equation on the map's components.
pub fn potential(m: &SphereMap) -> GridFunction {
    let dz: Vec<GridFunction> = m.q.iter().map(GridFunction::dz).collect();
    let dzb: Vec<GridFunction> = m.q.iter().map(GridFunction::dzbar).collect();
    bilinear(&dz, &dzb).scaled(cc(-1.0, 0.0))
}

/// Worst relative size of (-d_z d_zbar + u) q^i over the components.
pub fn schrodinger_residual(m: &SphereMap, u: &GridFunction) -> f64 {
    let mut worst: f64 = 0.0;
    for f in &m.q {
        let res = u.mul(f).sub(&f.dz().dzbar());
        worst = worst.max(res.sup_norm() / f.sup_norm().max(1.0));
    }
    worst
}

/// The fields T_i = (q, d_z^i q) for i = 0..=max.
#[derive(Debug, Clone)]
pub struct MomentTable {
    t: Vec<GridFunction>,
}

impl MomentTable {
    pub fn from_fields(t: Vec<GridFunction>) -> Self {
        assert!(!t.is_empty(), "a moment table needs at least T_0");
        MomentTable { t }
    }

    pub fn max_order(&self) -> usize {
        self.t.len() - 1
    }

    pub fn entry(&self, i: usize) -> &GridFunction {
        &self.t[i]
    }
}

/// Moments of a sphere map under the bilinear pairing.
///
/// Orders are capped at eight: each derivative multiplies the retained
/// spectrum by its symbol, and past that point the pairing's cancellation
/// is no longer resolvable in double precision.
pub fn moments(m: &SphereMap, max: usize) -> MomentTable {
    assert!(max <= 8, "moment order capped at eight");
    let mut t = Vec::with_capacity(max + 1);
    for i in 0..=max {
        if i == 0 {
            t.push(bilinear(&m.q, &m.q));
        } else {
            let di: Vec<GridFunction> = m.q.iter().map(|f| f.dz_pow(i as u32)).collect();
            t.push(bilinear(&m.q, &di));
        }
    }
    MomentTable::from_fields(t)
}

/// Bilinear residue moments of a Bloch wave: minus the k^{2m} coefficient
/// of the reflected series times the i-th derivative image of the series.
///
/// These satisfy the same triangular recursion as the sphere-map moments,
/// which [`moment_recursion_residual`] measures on either table.
pub fn fermi_moments(w: &BlochWave, m: usize, max: usize) -> MomentTable {
    let z = w.z_series();
    let zr = z.reflected();
    let mut t = Vec::with_capacity(max + 1);
    for i in 0..=max {
        let b = zr.mul(&z.apply_k_plus_dz(i as i32));
        t.push(b.coeff_of_power(2 * m as i32).scaled(cc(-1.0, 0.0)));
    }
    MomentTable::from_fields(t)
}

/// Normalized defect of the triangular identity tying d_zbar T_i to the
/// lower moments and derivatives of the potential, valid for i >= 3.
///
/// Both sides nearly vanish on isotropic data, so the defect is measured
/// against the largest individual term: it reports the quality of the
/// cancellation rather than an absolute number.
pub fn moment_recursion_residual(t: &MomentTable, u: &GridFunction, i: usize) -> f64 {
    assert!(i >= 3, "the recursion starts at the third moment");
    assert!(i <= t.max_order(), "table too short for requested order");
    let lhs = t.entry(i).dzbar();
    let mut scale = lhs.sup_norm();
    let mut rhs = t.entry(i - 1).dzbar().dz();
    scale = scale.max(rhs.sup_norm());
    for l in 0..=i - 2 {
        let term = t
            .entry(l)
            .mul(&u.dz_pow((i - l - 2) as u32))
            .scaled(cc(-binom(i - 2, l), 0.0))
            .dz();
        scale = scale.max(term.sup_norm());
        rhs = rhs.add(&term);
    }
    for l in 0..=i - 2 {
        let term = t
            .entry(l)
            .mul(&u.dz_pow((i - 1 - l) as u32))
            .scaled(cc(binom(i - 1, l), 0.0));
        scale = scale.max(term.sup_norm());
        rhs = rhs.add(&term);
    }
    lhs.sub(&rhs).sup_norm() / scale.max(1.0)
}

/// Isotropy depth of a map as seen by [`wm_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WmOrder {
    /// (d^j q, d^j q) first fails to vanish at this derivative order.
    Finite(usize),
    /// Every tested order vanished; the map is isotropic to this depth.
    AllTested(usize),
}

/// Largest isotropy order visible up to `maxj` derivatives.
///
/// Each bilinear (d^j q, d^j q) is compared against the corresponding
/// conjugated pairing, which shares its magnitude but none of its
/// cancellation; the spectral growth of high derivatives makes a fixed
/// absolute threshold meaningless across resolutions.
pub fn wm_order(m: &SphereMap, maxj: usize) -> WmOrder {
    for j in 1..=maxj {
        let dj: Vec<GridFunction> = m.q.iter().map(|f| f.dz_pow(j as u32)).collect();
        let djc: Vec<GridFunction> = dj.iter().map(GridFunction::conj).collect();
        let iso = bilinear(&dj, &dj).sup_norm();
        let scale = bilinear(&dj, &djc).sup_norm().max(1.0);
        if iso > WM_TOL * scale {
            return WmOrder::Finite(j);
        }
    }
    WmOrder::AllTested(maxj)
}

/// Normalized pairing (q, M q) where M is the strictly differential part
/// of the (2n+1)-st dressed power, applied componentwise.
///
/// On a map solving the model with the wave's potential this tangency
/// pairing vanishes: the flows move the map along the quadric.  The sup of
/// the pairing is divided by the largest contributing term, since the raw
/// terms grow with the potential scale and the interesting number is how
/// completely they cancel.
pub fn constraint_pairing(m: &SphereMap, w: &BlochWave, n: usize, depth: usize) -> Result<f64> {
    let power = 2 * n + 1;
    assert!(power <= depth, "flow power must fit inside the dressing depth");
    let l = dress(w, depth)?;
    let lp = l.power(power as u32).plus_part();
    let shape = m.shape();
    let mut pair = GridFunction::zeros(shape);
    let mut scale: f64 = 1.0;
    for f in &m.q {
        let mut acc = GridFunction::zeros(shape);
        for ord in 1..=lp.top() {
            let term = lp.coeff_of_order(ord).mul(&f.dz_pow(ord as u32));
            scale = scale.max(f.mul(&term).sup_norm());
            acc = acc.add(&term);
        }
        pair = pair.add(&f.mul(&acc));
    }
    Ok(pair.sup_norm() / scale)
}

/// Normalized residual of the linearized operator on a candidate
/// variation field: d d v + q (dbar q, d v) + q (d q, dbar v) + (d q, dbar q) v.
///
/// The defect is scaled by the largest single term of the operator, so it
/// measures how well the terms cancel rather than their common size.
pub fn linearized_residual(m: &SphereMap, vfield: &[GridFunction]) -> f64 {
    assert_eq!(vfield.len(), m.n(), "variation needs one field per component");
    let dq: Vec<GridFunction> = m.q.iter().map(GridFunction::dz).collect();
    let dbq: Vec<GridFunction> = m.q.iter().map(GridFunction::dzbar).collect();
    let dv: Vec<GridFunction> = vfield.iter().map(GridFunction::dz).collect();
    let dbv: Vec<GridFunction> = vfield.iter().map(GridFunction::dzbar).collect();
    let s1 = bilinear(&dbq, &dv);
    let s2 = bilinear(&dq, &dbv);
    let w = bilinear(&dq, &dbq);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for (i, v) in vfield.iter().enumerate() {
        let lap = v.dz().dzbar();
        let t1 = m.q[i].mul(&s1);
        let t2 = m.q[i].mul(&s2);
        let t3 = w.mul(v);
        let res = lap.add(&t1).add(&t2).add(&t3);
        worst = worst.max(res.sup_norm());
        scale = scale
            .max(lap.sup_norm())
            .max(t1.sup_norm())
            .max(t2.sup_norm())
            .max(t3.sup_norm());
    }
    worst / scale
}

/// Degree of a real three-component map by quadrature of the pulled-back
/// area form: mean of q . (d_x q x d_y q) over the unit cell, over 4 pi.
pub fn instanton_charge(m: &SphereMap) -> Result<f64> {
    if m.n() != 3 {
        return Err(Error::BadShape("charge needs a three-component map".into()));
    }
    if !m.is_real {
        return Err(Error::NotRealMap);
    }
    let qx: Vec<GridFunction> = m.q.iter().map(GridFunction::dx).collect();
    let qy: Vec<GridFunction> = m.q.iter().map(GridFunction::dy).collect();
    let cross = [
        qx[1].mul(&qy[2]).sub(&qx[2].mul(&qy[1])),
        qx[2].mul(&qy[0]).sub(&qx[0].mul(&qy[2])),
        qx[0].mul(&qy[1]).sub(&qx[1].mul(&qy[0])),
    ];
    let triple = bilinear(&m.q, &cross);
    Ok(triple.mean().re / (4.0 * PI))
}

/// Diagnostics from [`o3_reconstruct`]; all defects are sup norms.
#[derive(Debug, Clone, Copy)]
pub struct O3Report {
    /// Deviation of r1^2 f1^2 + r2^2 f2^2 from one.
    pub fg1_defect: f64,
    /// Disagreement of the two closed forms for the gluing function c,
    /// measured where both are well conditioned.
    pub c_discrepancy: f64,
    /// Pointwise unit-norm defect of the assembled map.
    pub unit_defect: f64,
    /// north-chart consistency: (y1 + i y2) versus (r1 f1 + i r2 f2)(1 + y3).
    pub v_defect: f64,
    /// south-chart consistency: (y1 - i y2) versus (r1 f1 - i r2 f2)(1 - y3).
    pub vinv_defect: f64,
}

impl O3Report {
    pub fn pass(&self) -> bool {
        self.fg1_defect <= FG_TOL
            && self.c_discrepancy <= 1e-7
            && self.unit_defect <= 1e-9
            && self.v_defect <= 1e-9
            && self.vinv_defect <= 1e-9
    }
}

/// Assembles a three-component solution from an admissible function pair.
///
/// The pair must satisfy r1^2 f1^2 + r2^2 f2^2 = 1 with r1^2+r2^2+r3^2 = 1.
/// The gluing function c is computed from the reality conditions by both
/// of its closed forms, choosing pointwise the better-conditioned
/// denominator; their disagreement is reported as a diagnostic.  With
/// r3 = 0 the coupling constant h vanishes and c is identically zero,
/// mapping into the equator.
pub fn o3_reconstruct(
    f1: &GridFunction,
    f2: &GridFunction,
    r1: Complex64,
    r2: Complex64,
    r3: Complex64,
) -> Result<(O3Report, SphereMap)> {
    if f1.shape() != f2.shape() {
        return Err(Error::ShapeMismatch("f1 and f2 must share one grid".into()));
    }
    let rsum = r1 * r1 + r2 * r2 + r3 * r3;
    if (rsum - 1.0).norm() > 1e-10 {
        return Err(Error::BadConfig(format!(
            "r1^2+r2^2+r3^2 = {rsum} is off the unit sphere"
        )));
    }
    if r1.norm() < 1e-12 || r2.norm() < 1e-12 {
        return Err(Error::BadConfig("r1 and r2 must be nonzero".into()));
    }
    let shape = f1.shape();
    let one = cc(1.0, 0.0);
    let i = cc(0.0, 1.0);

    let sq = |f: &GridFunction, r: Complex64| f.mul(f).scaled(r * r);
    let fg1_defect = sq(f1, r1).add(&sq(f2, r2)).map(|v| v - 1.0).sup_norm();
    if fg1_defect > FG_TOL {
        return Err(Error::FGViolation(fg1_defect));
    }

    let h = i * r1 * r2 * r3;
    let (cfun, c_discrepancy) = if r3.norm() < 1e-12 {
        (GridFunction::zeros(shape), 0.0)
    } else {
        // c = -(r1^2/h)(f1 - conj f1)/(f2 + conj f2)
        //   =  (r2^2/h)(f2 - conj f2)/(f1 + conj f1);
        // the two degenerate loci cannot meet on admissible data, so the
        // better-conditioned form is always available.
        let num1 = f1.sub(&f1.conj()).scaled(-r1 * r1 / h);
        let den1 = f2.add(&f2.conj());
        let num2 = f2.sub(&f2.conj()).scaled(r2 * r2 / h);
        let den2 = f1.add(&f1.conj());
        let dscale = den1
            .sup_norm()
            .max(den2.sup_norm())
            .max(1e-300);
        let dtol = 1e-9 * dscale;
        let mut vals = Vec::with_capacity(shape.len());
        let mut disc: f64 = 0.0;
        let mut masked = 0usize;
        for idx in 0..shape.len() {
            let (n1, d1) = (num1.values()[idx], den1.values()[idx]);
            let (n2, d2) = (num2.values()[idx], den2.values()[idx]);
            let ok1 = d1.norm() > dtol;
            let ok2 = d2.norm() > dtol;
            match (ok1, ok2) {
                (true, true) => {
                    let c1 = n1 / d1;
                    let c2 = n2 / d2;
                    disc = disc.max((c1 - c2).norm());
                    vals.push(if d1.norm() >= d2.norm() { c1 } else { c2 });
                }
                (true, false) => vals.push(n1 / d1),
                (false, true) => vals.push(n2 / d2),
                (false, false) => {
                    masked += 1;
                    vals.push(Complex64::default());
                }
            }
        }
        if masked > 0 {
            return Err(Error::DegenerateDenominator {
                masked,
                total: shape.len(),
            });
        }
        (GridFunction::from_values(shape, vals)?, disc)
    };

    let psi1 = f1.add(&f2.mul(&cfun).scaled(h / (r1 * r1)));
    let psi2 = f2.sub(&f1.mul(&cfun).scaled(h / (r2 * r2)));
    let y1 = psi1.scaled(r1);
    let y2 = psi2.scaled(r2);
    let y3 = cfun.scaled(r3);

    let unit_defect = unit_defect_of(&[y1.clone(), y2.clone(), y3.clone()]);
    let v_pair = f1.scaled(r1).add(&f2.scaled(i * r2));
    let vinv_pair = f1.scaled(r1).sub(&f2.scaled(i * r2));
    let north = y1.add(&y2.scaled(i));
    let south = y1.sub(&y2.scaled(i));
    let v_defect = north
        .sub(&v_pair.mul(&y3.map(|v| v + 1.0)))
        .sup_norm()
        / north.sup_norm().max(1.0);
    let vinv_defect = south
        .sub(&vinv_pair.mul(&y3.map(|v| one - v)))
        .sup_norm()
        / south.sup_norm().max(1.0);

    let report = O3Report {
        fg1_defect,
        c_discrepancy,
        unit_defect,
        v_defect,
        vinv_defect,
    };
    let map = SphereMap::new(vec![y1, y2, y3])?;
    Ok((report, map))
}
