//! Seeded random instances for experiments, the CLI and tests.

use num_complex::Complex64;
use rand::Rng as _;

use crate::contact::{ContactPoint, CurveJet, Domain};
use crate::series::LaurentPoly;

/// The generator used everywhere a seed is exposed.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Uniform sample from the closed disk of radius `r`.
pub fn unit_disk_sample(rng: &mut Rng, r: f64) -> Complex64 {
    loop {
        let z = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if z.norm_sqr() <= 1.0 {
            return z * r;
        }
    }
}

/// Laurent polynomial with every degree in `lo..=hi` drawn from the unit disk.
pub fn random_poly(rng: &mut Rng, lo: i32, hi: i32) -> LaurentPoly {
    LaurentPoly::from_terms((lo..=hi).map(|d| (d, unit_disk_sample(rng, 1.0))).collect::<Vec<_>>())
        .expect("finite samples")
}

/// Random curve with unit-disk coefficients; negative degrees are dropped on disks.
pub fn random_curve(rng: &mut Rng, n: usize, lo: i32, hi: i32, domain: Domain) -> CurveJet {
    let lo = if domain.is_disk() { lo.max(0) } else { lo };
    let components = (0..2 * n + 1).map(|_| random_poly(rng, lo, hi)).collect();
    CurveJet::new(n, components, domain).expect("valid random curve")
}

pub fn random_point(rng: &mut Rng, n: usize, scale: f64) -> ContactPoint {
    ContactPoint::new((0..2 * n + 1).map(|_| unit_disk_sample(rng, scale)).collect()).expect("finite samples")
}
