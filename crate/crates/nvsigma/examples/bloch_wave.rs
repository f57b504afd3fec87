//! Formal Bloch wave of a smooth periodic potential: build the series,
//! check the level-by-level recursion, pair it with its dual, and persist
//! the whole object to disk.

use nvsigma::ba::{bloch_wave, dual_series, recursion_defect, residue_defect, self_dualize};
use nvsigma::torus::{GridFunction, TorusShape};
use nvsigma::Complex64;
use std::f64::consts::PI;

fn main() -> nvsigma::Result<()> {
    let shape = TorusShape::new(Complex64::new(0.0, 1.0), 48, 48)?;
    let u = GridFunction::from_fn(shape, |x, y| {
        Complex64::new(
            0.10 * (2.0 * PI * x).cos() + 0.07 * (2.0 * PI * y).sin(),
            0.0,
        )
    });
    let order = 8;
    let w = bloch_wave(&u, order)?;

    println!("series order S = {order}");
    for s in 1..=order {
        println!("  ell_{s} = {:+.6e} {:+.6e}i", w.ell(s).re, w.ell(s).im);
    }
    // The quasi-momentum expansion of a real potential is even in k: odd
    // coefficients vanish.
    println!("even quasi-momentum defect  {:.3e}", w.even_ell_defect());

    let rec = recursion_defect(&w);
    println!("recursion defect            {rec:.3e}");
    assert!(rec < 1e-10, "every level satisfies its defining equation");

    let dual = dual_series(&w);
    let res = residue_defect(&w, &dual);
    println!("dual pairing residue        {res:.3e}");
    assert!(res < 1e-8, "direct and dual series pair to constants");

    let (sd, _) = self_dualize(&w)?;
    println!("self-dualized; recursion    {:.3e}", recursion_defect(&sd));
    assert!(recursion_defect(&sd) < 1e-10, "gauge rescaling keeps the recursion");

    let dir = std::env::temp_dir().join("nvsigma_wave_example");
    sd.save(&dir)?;
    let back = nvsigma::ba::BlochWave::load(&dir)?;
    let mut worst: f64 = 0.0;
    for s in 1..=order {
        worst = worst.max(back.zeta(s).sub(&sd.zeta(s)).sup_norm());
    }
    println!("save/load worst coefficient {worst:.3e}");
    assert!(worst < 1e-12, "wave survives a disk round-trip");
    println!("wrote {}", dir.display());
    Ok(())
}
