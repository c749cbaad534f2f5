//! Proper Legendrian embeddings `C -> C^(2n+1)` inside affine hyperplanes
//! `z + sum (a_j x_j + b_j y_j) = const`.

use num_complex::Complex64;

use crate::contact::{x_slot, y_slot, z_slot, ContactPoint, CurveJet, Domain, HolomorphicCurve};
use crate::error::{Error, Result};
use crate::random::{unit_disk_sample, Rng};
use crate::series::LaurentPoly;

/// `|a_j|` at or below this is a degenerate plane.
pub const PLANE_TOL: f64 = 1e-12;

/// Relative size of the perturbation applied to a degenerate normal.
pub const JITTER: f64 = 1e-6;

/// Samples of `|v| = 1` used by the radial rescale.
pub const RESCALE_SAMPLES: usize = 64;

// Relative bisection tolerance of the radial rescale.
const RESCALE_TOL: f64 = 1e-10;

/// `e^w - 1` without cancellation near `w = 0`.
pub fn expm1(w: Complex64) -> Complex64 {
    let half = (0.5 * w.im).sin();
    Complex64::new(w.re.exp_m1() * w.im.cos() - 2.0 * half * half, w.re.exp() * w.im.sin())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatPlaneSpec {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    p0: ContactPoint,
}

impl FlatPlaneSpec {
    pub fn new(a: Vec<Complex64>, b: Vec<Complex64>, p0: ContactPoint) -> Result<Self> {
        let n = p0.n();
        if a.len() != n || b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.len().min(b.len()) });
        }
        if let Some(j) = a.iter().position(|aj| aj.norm() <= PLANE_TOL) {
            return Err(Error::DegeneratePlane { index: j + 1 });
        }
        if a.iter().chain(&b).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument("plane coefficients must be finite".into()));
        }
        Ok(Self { a, b, p0 })
    }

    pub fn n(&self) -> usize {
        self.p0.n()
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn basepoint(&self) -> &ContactPoint {
        &self.p0
    }

    /// `L(q) = (q_z - z0) + sum_j (a_j (q_xj - x0j) + b_j (q_yj - y0j))`.
    pub fn plane_functional(&self, q: &[Complex64]) -> Complex64 {
        let p = self.p0.coords();
        let n = self.n();
        (1..=n).fold(q[z_slot(n)] - p[z_slot(n)], |acc, j| {
            acc + self.a[j - 1] * (q[x_slot(j)] - p[x_slot(j)]) + self.b[j - 1] * (q[y_slot(j)] - p[y_slot(j)])
        })
    }
}

/// Closed-form evaluator of the flat embedding with `Psi(0) = p0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatEmbedding {
    spec: FlatPlaneSpec,
}

pub fn flat_embedding(spec: &FlatPlaneSpec) -> FlatEmbedding {
    FlatEmbedding { spec: spec.clone() }
}

impl FlatEmbedding {
    pub fn spec(&self) -> &FlatPlaneSpec {
        &self.spec
    }
}

impl HolomorphicCurve for FlatEmbedding {
    fn n(&self) -> usize {
        self.spec.n()
    }

    fn eval(&self, zeta: Complex64) -> Vec<Complex64> {
        let n = self.spec.n();
        let p = self.spec.p0.coords();
        let mut out = vec![Complex64::default(); 2 * n + 1];
        let mut z = p[z_slot(n)];
        for j in 1..=n {
            let (a, b) = (self.spec.a[j - 1], self.spec.b[j - 1]);
            let x0 = p[x_slot(j)];
            let dx = (x0 - b) * expm1(zeta / a);
            out[x_slot(j)] = x0 + dx;
            out[y_slot(j)] = p[y_slot(j)] + zeta;
            z -= a * dx + b * zeta;
        }
        out[z_slot(n)] = z;
        out
    }

    fn derivative(&self, zeta: Complex64) -> Vec<Complex64> {
        let n = self.spec.n();
        let p = self.spec.p0.coords();
        let mut out = vec![Complex64::default(); 2 * n + 1];
        let mut dz = Complex64::default();
        for j in 1..=n {
            let (a, b) = (self.spec.a[j - 1], self.spec.b[j - 1]);
            let dx = (p[x_slot(j)] - b) * (zeta / a).exp() / a;
            out[x_slot(j)] = dx;
            out[y_slot(j)] = Complex64::new(1.0, 0.0);
            dz -= a * dx + b;
        }
        out[z_slot(n)] = dz;
        out
    }
}

/// Degree-`d` Taylor jet of the embedding on the disk of radius `r`, with
/// the bound `sum_j |x0j - b_j| (r/|a_j|)^(d+1) e^(r/|a_j|) / (d+1)!` on the
/// distance between jet and embedding over that disk.
///
/// The jet stays inside the plane exactly: its `Z` is built from the truncated `X`.
pub fn taylor_truncate(emb: &FlatEmbedding, d: usize, r: f64) -> (CurveJet, f64) {
    let spec = &emb.spec;
    let n = spec.n();
    let p = spec.p0.coords();
    let mut comps = vec![LaurentPoly::zero(); 2 * n + 1];
    let mut z = LaurentPoly::constant(p[z_slot(n)]);
    let mut bound = 0.0;
    let mut fact = 1.0;
    for k in 1..=d + 1 {
        fact *= k as f64;
    }
    for j in 1..=n {
        let (a, b) = (spec.a[j - 1], spec.b[j - 1]);
        let x0 = p[x_slot(j)];
        let mut terms = Vec::with_capacity(d);
        let mut coef = x0 - b;
        for k in 1..=d {
            coef /= a * k as f64;
            terms.push((k as i32, coef));
        }
        let dx = LaurentPoly::from_terms(terms).expect("finite coefficients");
        let y = if d >= 1 {
            LaurentPoly::from_terms([(0, p[y_slot(j)]), (1, Complex64::new(1.0, 0.0))]).expect("finite")
        } else {
            LaurentPoly::constant(p[y_slot(j)])
        };
        let dy = &y - &LaurentPoly::constant(p[y_slot(j)]);
        z -= &(&dx.scale(a) + &dy.scale(b));
        comps[x_slot(j)] = &LaurentPoly::constant(x0) + &dx;
        comps[y_slot(j)] = y;
        let t = r / a.norm();
        bound += (x0 - b).norm() * t.powi(d as i32 + 1) * t.exp() / fact;
    }
    comps[z_slot(n)] = z;
    let jet = CurveJet::new(n, comps, Domain::Disk { radius: r }).expect("taylor jet on a disk");
    (jet, bound)
}

/// A flat embedding reparametrized as `v -> Psi(s v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatDisk {
    pub embedding: FlatEmbedding,
    pub scale: f64,
}

impl FlatDisk {
    pub fn eval(&self, v: Complex64) -> Vec<Complex64> {
        self.embedding.eval(v * self.scale)
    }

    /// Coefficients of `v^j`, `j = 1..=order`, of `x_i(s v)`; `y_i(s v)` is `y0i + s v`.
    pub fn x_coefficients(&self, i: usize, order: usize) -> Vec<Complex64> {
        let spec = &self.embedding.spec;
        let (a, b) = (spec.a[i - 1], spec.b[i - 1]);
        let mut coef = spec.p0.x(i) - b;
        (1..=order)
            .map(|j| {
                coef *= self.scale / (a * j as f64);
                coef
            })
            .collect()
    }

    fn sampled_radius(&self, s: f64) -> f64 {
        let p = self.embedding.spec.p0.coords();
        crate::contact::circle_points(s, RESCALE_SAMPLES)
            .map(|v| {
                let q = self.embedding.eval(v);
                q.iter().zip(p).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Plane coefficients Hermitian-orthogonal to the normal `g = (g1, g2, g3)`.
pub fn orthogonal_plane(g: &[Complex64; 3]) -> (Complex64, Complex64) {
    ((g[0] / g[2]).conj(), (g[1] / g[2]).conj())
}

/// Perturbs `g` by a random vector of modulus at most `JITTER * |g|`.
pub fn jitter(g: &[Complex64; 3], rng: &mut Rng) -> [Complex64; 3] {
    let size = JITTER * g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut out = *g;
    for c in out.iter_mut() {
        *c += unit_disk_sample(rng, size / 3f64.sqrt());
    }
    out
}

/// One flat disk per sample (`n = 1`): basepoint `centers[k]`, plane
/// orthogonal to `normals[k]`, rescaled so the sampled sup of
/// `|Psi(v) - centers[k]|` over `|v| = 1` equals `mu`.
pub fn boundary_disk_family(centers: &[ContactPoint], normals: &[[Complex64; 3]], mu: f64) -> Result<Vec<FlatDisk>> {
    if centers.len() != normals.len() {
        return Err(Error::DimensionMismatch { expected: centers.len(), found: normals.len() });
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("disk radius must be nonnegative, got {mu}")));
    }
    centers
        .iter()
        .zip(normals)
        .enumerate()
        .map(|(k, (p, g))| {
            if p.n() != 1 {
                return Err(Error::InvalidArgument("boundary disk families need n = 1".into()));
            }
            let size = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if g[0].norm() <= PLANE_TOL * size || g[2].norm() <= PLANE_TOL * size || size == 0.0 {
                return Err(Error::NormalDegenerate { sample: k });
            }
            let (a, b) = orthogonal_plane(g);
            let spec =
                FlatPlaneSpec::new(vec![a], vec![b], p.clone()).map_err(|_| Error::NormalDegenerate { sample: k })?;
            let mut disk = FlatDisk { embedding: flat_embedding(&spec), scale: 1.0 };
            disk.scale = if mu == 0.0 { 0.0 } else { rescale(&disk, mu) };
            Ok(disk)
        })
        .collect()
}

/// Bisection for `s` with sampled radius `mu`; `|y(s v) - y0| = s` brackets it in `[0, mu]`.
fn rescale(disk: &FlatDisk, mu: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, mu);
    while hi - lo > RESCALE_TOL * mu {
        let mid = 0.5 * (lo + hi);
        if disk.sampled_radius(mid) < mu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{eta_at, legendrian_residual, pullback_eta};
    use crate::random::{random_point, Rng};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_spec() -> FlatPlaneSpec {
        let p0 = ContactPoint::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        FlatPlaneSpec::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)], p0).unwrap()
    }

    fn random_spec(rng: &mut Rng, n: usize) -> FlatPlaneSpec {
        let p0 = random_point(rng, n, 2.0);
        let a = (0..n)
            .map(|_| {
                let w = unit_disk_sample(rng, 1.5);
                w + w / w.norm() * 0.5
            })
            .collect();
        let b = (0..n).map(|_| unit_disk_sample(rng, 2.0)).collect();
        FlatPlaneSpec::new(a, b, p0).unwrap()
    }

    #[test]
    fn expm1_is_accurate() {
        let w = c(1e-10, -2e-10);
        let series = w + w * w / 2.0;
        assert!((expm1(w) - series).norm() <= 1e-16 * w.norm());
        let w = c(0.7, 2.1);
        assert!((expm1(w) - (w.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_plane() {
        let p0 = ContactPoint::origin(2);
        let err = FlatPlaneSpec::new(vec![c(1.0, 0.0), c(1e-13, 0.0)], vec![c(0.0, 0.0); 2], p0).unwrap_err();
        assert_eq!(err, Error::DegeneratePlane { index: 2 });
    }

    #[test]
    fn closed_form_example() {
        let emb = flat_embedding(&unit_spec());
        assert_eq!(emb.eval(c(0.0, 0.0)), vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        for &z in &[c(0.3, -1.2), c(-2.0, 0.5), c(1.0, 1.0)] {
            let q = emb.eval(z);
            let e = z.exp();
            assert!((q[0] - e).norm() < 1e-14 * e.norm().max(1.0));
            assert_eq!(q[1], z);
            assert!((q[2] - (1.0 - e)).norm() < 1e-14 * e.norm().max(1.0));
            // dZ + X dY = -e^z + e^z
            let d = emb.derivative(z);
            assert!((d[2] + q[0] * d[1]).norm() < 1e-14 * e.norm().max(1.0));
        }
    }

    #[test]
    fn basepoint_is_exact() {
        let mut rng = Rng::seed_from_u64(1);
        for n in 1..=3 {
            let spec = random_spec(&mut rng, n);
            assert_eq!(flat_embedding(&spec).eval(c(0.0, 0.0)), spec.basepoint().coords());
        }
    }

    #[test]
    fn taylor_examples() {
        let emb = flat_embedding(&unit_spec());
        let mut d = 1;
        while taylor_truncate(&emb, d, 1.0).1 >= 1e-10 {
            d += 1;
        }
        let (jet, _) = taylor_truncate(&emb, d, 1.0);
        assert!(legendrian_residual(&jet, 64) <= 1e-8);
        for d in [1, 3, 20] {
            let (jet, _) = taylor_truncate(&emb, d, 1.0);
            assert_eq!(jet.y(1), &LaurentPoly::identity());
        }
        let (jet, bound) = taylor_truncate(&emb, 0, 1.0);
        assert_eq!(jet, CurveJet::constant(unit_spec().basepoint()));
        // sum |x0 - b| (R/|a|) e^(R/|a|) bounds |e^z - 1| on the unit disk
        assert_eq!(bound, std::f64::consts::E);
        let (jet20, _) = taylor_truncate(&emb, 20, 1.0);
        assert!(legendrian_residual(&jet20, 64) <= 1e-10);
        assert!(pullback_eta(&jet20).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn tail_bound_dominates_truncation_error() {
        let mut rng = Rng::seed_from_u64(2);
        let spec = random_spec(&mut rng, 2);
        let emb = flat_embedding(&spec);
        for d in [2, 5, 9] {
            let (jet, bound) = taylor_truncate(&emb, d, 1.0);
            for u in crate::contact::circle_points(1.0, 64) {
                let diff: f64 = jet.eval(u).iter().zip(emb.eval(u)).map(|(a, b)| (a - b).norm()).sum();
                // z carries the x error times |a|
                let amp = 1.0 + spec.a().iter().map(|a| a.norm()).fold(0.0, f64::max);
                assert!(diff <= amp * bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn disk_family_examples() {
        let p = ContactPoint::new(vec![c(0.5, 0.0), c(0.5, 0.0), c(-0.125, 0.0)]).unwrap();
        let g = [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let fam = boundary_disk_family(&[p.clone(), p.clone()], &[g, g], 0.5).unwrap();
        for disk in &fam {
            assert_eq!(disk.embedding.spec().a(), &[c(1.0, 0.0)]);
            assert_eq!(disk.embedding.spec().b(), &[c(0.0, 0.0)]);
            let r = disk.sampled_radius(disk.scale);
            assert!((r - 0.5).abs() <= 0.5 * 1e-6);
        }

        let mut rng = Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = random_point(&mut rng, 1, 1.0);
            let g = [unit_disk_sample(&mut rng, 1.0), unit_disk_sample(&mut rng, 1.0), unit_disk_sample(&mut rng, 1.0)];
            let disk = &boundary_disk_family(&[p.clone()], &[g], 0.3).unwrap()[0];
            let gn = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for v in crate::contact::circle_points(1.0, 64) {
                let q = disk.eval(v);
                let ip: Complex64 = q.iter().zip(p.coords()).zip(&g).map(|((a, b), gk)| (a - b) * gk.conj()).sum();
                assert!(ip.norm() <= 1e-10 * gn * 0.3);
            }
            let max = (0..64)
                .map(|k| {
                    let v = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 64.0);
                    disk.eval(v).iter().zip(p.coords()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
                })
                .fold(0.0, f64::max);
            assert!((max - 0.3).abs() <= 0.3 * 1e-6);
        }

        let bad = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(boundary_disk_family(&[p.clone()], &[bad], 0.5).unwrap_err(), Error::NormalDegenerate { sample: 0 });
        let fam = boundary_disk_family(&[p.clone()], &[g], 0.0).unwrap();
        assert_eq!(fam[0].eval(c(1.0, 0.0)), p.coords());
    }

    #[test]
    fn jitter_unlocks_degenerate_normals() {
        let mut rng = Rng::seed_from_u64(4);
        let bad = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let g = jitter(&bad, &mut rng);
        let d: f64 = g.iter().zip(&bad).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(d <= JITTER * 2f64.sqrt() * 1.0001 && d > 0.0);
        let p = ContactPoint::origin(1);
        assert!(boundary_disk_family(&[p], &[g], 0.1).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn legendrian_planar_and_injective(seed in any::<u64>(), n in 1usize..=3) {
            let mut rng = Rng::seed_from_u64(seed);
            let spec = random_spec(&mut rng, n);
            let emb = flat_embedding(&spec);
            for _ in 0..20 {
                let z = unit_disk_sample(&mut rng, 3.0);
                let q = emb.eval(z);
                let d = emb.derivative(z);
                let scale = 1.0 + q.iter().chain(&d).map(|c| c.norm()).fold(0.0, f64::max).powi(2);
                prop_assert!(eta_at(&q, &d).norm() <= 1e-13 * scale);
                let lscale = 1.0 + q.iter().map(|c| c.norm()).sum::<f64>()
                    * (1.0 + spec.a().iter().chain(spec.b()).map(|c| c.norm()).sum::<f64>());
                prop_assert!(spec.plane_functional(&q).norm() <= 1e-12 * lscale);
                let w = unit_disk_sample(&mut rng, 3.0);
                let gap: f64 = q.iter().zip(emb.eval(w)).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                prop_assert!(gap >= (z - w).norm() * (1.0 - 1e-12));
            }
            for r in [10.0, 100.0] {
                let q = emb.eval(c(0.0, r));
                let size = q.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                prop_assert!(size >= r - spec.basepoint().y(1).norm());
            }
        }
    }
}
