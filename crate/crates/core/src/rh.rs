//! Approximate Riemann-Hilbert problem for Legendrian disks.
//!
//! A [`BoundaryFamily`] is a map `F(u, v) = (sum_j a_j(u) v^j, sum_k b_k(u) v^k,
//! sum_m c_m(u) v^m)` whose `c_m` are fixed by requiring `F(u, .)` to be
//! Legendrian for every `u`. Substituting `v = u^N` gives a disk whose
//! contact defect decays with `N`; Legendrizing that disk produces a curve
//! close to the center in the interior and close to the boundary disks on
//! the circle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::contact::{legendrize, pullback_eta, x_slot, y_slot, z_slot, CurveJet, Domain};
use crate::error::{Error, Result};
use crate::series::LaurentPoly;

/// Relative tolerance for the Legendrian identity of a center curve.
pub const CENTER_TOL: f64 = 1e-10;

/// Relative tolerance for matching a family's `v^0` slot to its center.
pub const MATCH_TOL: f64 = 1e-12;

// Gauss-Newton polishing steps for distance queries.
const POLISH_STEPS: usize = 12;

/// Closed sector `{ r e^(i t) : 0 <= r <= 1, t0 <= t <= t1 }` on which the
/// family equals its center; used for the C^1 closeness check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sector {
    pub theta0: f64,
    pub theta1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFamily {
    center: CurveJet,
    a: Vec<Vec<LaurentPoly>>,
    b: Vec<Vec<LaurentPoly>>,
    c: Vec<LaurentPoly>,
    pole_depth: usize,
    defect_depth: usize,
    sector: Option<Sector>,
}

fn center_scale(a0: &[&LaurentPoly], b0: &[&LaurentPoly], c0: &LaurentPoly) -> f64 {
    1.0 + c0.l1_norm() + a0.iter().zip(b0).map(|(a, b)| a.l1_norm() * b.l1_norm()).sum::<f64>()
}

/// Coefficients `c_m`, `m >= 1`, making `Z_v + sum_i X_i (Y_i)_v` vanish:
/// `c_m = -(1/m) sum_i sum_{j+k=m} k a_j b_k`. Slot 0 of the result is `c0`.
pub fn legendrian_closure(
    a: &[Vec<LaurentPoly>],
    b: &[Vec<LaurentPoly>],
    c0: &LaurentPoly,
) -> Result<Vec<LaurentPoly>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    if a.iter().chain(b).any(|v| v.is_empty()) {
        return Err(Error::InvalidArgument("every coefficient list needs its v^0 term".into()));
    }
    let a0: Vec<&LaurentPoly> = a.iter().map(|v| &v[0]).collect();
    let b0: Vec<&LaurentPoly> = b.iter().map(|v| &v[0]).collect();
    let mut center = c0.differentiate();
    for (ai, bi) in a0.iter().zip(&b0) {
        center += &(*ai * &bi.differentiate());
    }
    let residual = center.max_abs_coeff();
    if residual > CENTER_TOL * center_scale(&a0, &b0, c0) {
        return Err(Error::CenterNotLegendrian { residual });
    }

    let top = a.iter().zip(b).map(|(ai, bi)| ai.len() + bi.len() - 2).max().unwrap_or(0);
    let mut c = vec![c0.clone()];
    for m in 1..=top {
        let mut acc = LaurentPoly::zero();
        for (ai, bi) in a.iter().zip(b) {
            for k in 1..=m.min(bi.len() - 1) {
                let j = m - k;
                if j < ai.len() {
                    acc += &(&ai[j] * &bi[k]).scale(Complex64::new(k as f64, 0.0));
                }
            }
        }
        c.push(acc.scale(Complex64::new(-1.0 / m as f64, 0.0)));
    }
    Ok(c)
}

impl BoundaryFamily {
    /// Family whose `v^0` terms are the center and whose higher `v`-coefficients
    /// are `a_higher[i][j-1]`, `b_higher[i][k-1]`.
    pub fn from_center(
        center: &CurveJet,
        a_higher: Vec<Vec<LaurentPoly>>,
        b_higher: Vec<Vec<LaurentPoly>>,
    ) -> Result<Self> {
        let n = center.n();
        if a_higher.len() != n || b_higher.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a_higher.len().min(b_higher.len()) });
        }
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (i, (ah, bh)) in a_higher.into_iter().zip(b_higher).enumerate() {
            let mut ai = vec![center.x(i + 1).clone()];
            ai.extend(ah);
            let mut bi = vec![center.y(i + 1).clone()];
            bi.extend(bh);
            a.push(ai);
            b.push(bi);
        }
        Self::assemble(center, a, b)
    }

    /// Family from full coefficient lists; the `v^0` slots must equal the center.
    pub fn new(center: &CurveJet, a: Vec<Vec<LaurentPoly>>, b: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        let n = center.n();
        if a.len() != n || b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.len().min(b.len()) });
        }
        let tol = MATCH_TOL * (1.0 + center.l1_norm());
        for i in 0..n {
            let (Some(ai), Some(bi)) = (a[i].first(), b[i].first()) else {
                return Err(Error::FamilyMismatch(format!("pair {} has no v^0 term", i + 1)));
            };
            if ai.max_coeff_distance(center.x(i + 1)) > tol {
                return Err(Error::FamilyMismatch(format!("a_0 of pair {} differs from x{}", i + 1, i + 1)));
            }
            if bi.max_coeff_distance(center.y(i + 1)) > tol {
                return Err(Error::FamilyMismatch(format!("b_0 of pair {} differs from y{}", i + 1, i + 1)));
            }
        }
        Self::assemble(center, a, b)
    }

    fn assemble(center: &CurveJet, a: Vec<Vec<LaurentPoly>>, b: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        if !center.domain().is_disk() {
            return Err(Error::InvalidDomain("the center of a boundary family must be a disk".into()));
        }
        let c = legendrian_closure(&a, &b, center.z())?;
        let pole_depth = a.iter().chain(&b).flatten().chain(&c).map(LaurentPoly::pole_order).max().unwrap_or(0);
        let mut fam = Self { center: center.clone(), a, b, c, pole_depth, defect_depth: 0, sector: None };
        fam.defect_depth = fam.defect_coefficients().iter().skip(1).map(LaurentPoly::pole_order).max().unwrap_or(0);
        Ok(fam)
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = Some(sector);
        self
    }

    pub fn sector(&self) -> Option<Sector> {
        self.sector
    }

    pub fn n(&self) -> usize {
        self.center.n()
    }

    pub fn center(&self) -> &CurveJet {
        &self.center
    }

    pub fn a(&self, i: usize) -> &[LaurentPoly] {
        &self.a[i - 1]
    }

    pub fn b(&self, i: usize) -> &[LaurentPoly] {
        &self.b[i - 1]
    }

    pub fn c(&self) -> &[LaurentPoly] {
        &self.c
    }

    /// Largest pole order at `u = 0` among all `a`, `b`, `c` coefficients.
    pub fn pole_depth(&self) -> usize {
        self.pole_depth
    }

    /// Largest pole order among the defect coefficients `d_m`, `m >= 1`.
    pub fn defect_depth(&self) -> usize {
        self.defect_depth
    }

    /// `v`-coefficient lists in coordinate order.
    fn slots(&self) -> Vec<&[LaurentPoly]> {
        let n = self.n();
        let mut out: Vec<&[LaurentPoly]> = vec![&[]; 2 * n + 1];
        for i in 1..=n {
            out[x_slot(i)] = &self.a[i - 1];
            out[y_slot(i)] = &self.b[i - 1];
        }
        out[z_slot(n)] = &self.c;
        out
    }

    /// `d_m = c_m' + sum_i sum_{j+k=m} a_j b_k'`, the `v^m` coefficient of `Z_u + sum X_i (Y_i)_u`.
    pub fn defect_coefficients(&self) -> Vec<LaurentPoly> {
        let mut d: Vec<LaurentPoly> = self.c.iter().map(LaurentPoly::differentiate).collect();
        for (ai, bi) in self.a.iter().zip(&self.b) {
            let db: Vec<LaurentPoly> = bi.iter().map(LaurentPoly::differentiate).collect();
            for (j, aj) in ai.iter().enumerate() {
                for (k, dbk) in db.iter().enumerate() {
                    if dbk.is_zero() {
                        continue;
                    }
                    d[j + k] += &(aj * dbk);
                }
            }
        }
        d
    }

    /// Coefficient values at a fixed `u`, per coordinate and power of `v`.
    fn freeze(&self, u: Complex64) -> Frozen {
        Frozen { coeffs: self.slots().iter().map(|s| s.iter().map(|p| p.eval_unchecked(u)).collect()).collect() }
    }

    /// `F(u, v)`.
    pub fn eval(&self, u: Complex64, v: Complex64) -> Vec<Complex64> {
        self.freeze(u).eval(v).0
    }

    /// `Z_v + sum_i X_i (Y_i)_v` at `(u, v)`.
    pub fn closure_residual(&self, u: Complex64, v: Complex64) -> Complex64 {
        let n = self.n();
        let (val, dv) = self.freeze(u).eval(v);
        (1..=n).fold(dv[z_slot(n)], |acc, i| acc + val[x_slot(i)] * dv[y_slot(i)])
    }
}

struct Frozen {
    coeffs: Vec<Vec<Complex64>>,
}

impl Frozen {
    /// Value and `v`-derivative of every coordinate.
    fn eval(&self, v: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut val = Vec::with_capacity(self.coeffs.len());
        let mut dv = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let mut p = Complex64::default();
            let mut d = Complex64::default();
            for &ck in c.iter().rev() {
                d = d * v + p;
                p = p * v + ck;
            }
            val.push(p);
            dv.push(d);
        }
        (val, dv)
    }
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `min_{|v| = 1} |w - F(u, v)|` by sampling then Gauss-Newton in the angle.
fn distance_to_circle(fz: &Frozen, w: &[Complex64], samples: usize) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..samples {
        let t = 2.0 * PI * k as f64 / samples as f64;
        let d = dist(w, &fz.eval(Complex64::from_polar(1.0, t)).0);
        if d < best.0 {
            best = (d, t);
        }
    }
    let (mut d, mut t) = best;
    for _ in 0..POLISH_STEPS {
        let v = Complex64::from_polar(1.0, t);
        let (val, dv) = fz.eval(v);
        let iv = Complex64::new(0.0, 1.0) * v;
        let (mut num, mut den) = (0.0, 0.0);
        for ((wk, fk), dk) in w.iter().zip(&val).zip(&dv) {
            let g = iv * dk;
            num += (g.conj() * (wk - fk)).re;
            den += g.norm_sqr();
        }
        if den == 0.0 {
            break;
        }
        let t_new = t + num / den;
        let d_new = dist(w, &fz.eval(Complex64::from_polar(1.0, t_new)).0);
        if d_new >= d {
            break;
        }
        d = d_new;
        t = t_new;
    }
    d
}

/// `min_{|v| <= 1} |w - F(u, v)|` by a polar grid then projected Gauss-Newton.
fn distance_to_disk(fz: &Frozen, w: &[Complex64], samples: usize) -> f64 {
    let rings = 8;
    let per_ring = (samples / rings).max(8);
    let mut best = (dist(w, &fz.eval(Complex64::default()).0), Complex64::default());
    for i in 1..=rings {
        let r = i as f64 / rings as f64;
        for k in 0..per_ring {
            let v = Complex64::from_polar(r, 2.0 * PI * k as f64 / per_ring as f64);
            let d = dist(w, &fz.eval(v).0);
            if d < best.0 {
                best = (d, v);
            }
        }
    }
    let (mut d, mut v) = best;
    for _ in 0..POLISH_STEPS {
        let (val, dv) = fz.eval(v);
        let (mut num, mut den) = (Complex64::default(), 0.0);
        for ((wk, fk), dk) in w.iter().zip(&val).zip(&dv) {
            num += dk.conj() * (wk - fk);
            den += dk.norm_sqr();
        }
        if den == 0.0 {
            break;
        }
        let mut v_new = v + num / den;
        if v_new.norm() > 1.0 {
            v_new /= v_new.norm();
        }
        let d_new = dist(w, &fz.eval(v_new).0);
        if d_new >= d {
            break;
        }
        d = d_new;
        v = v_new;
    }
    d
}

/// `F_N(u) = F(u, u^N)` on the unit disk.
pub fn diagonal_substitute(fam: &BoundaryFamily, n: usize) -> Result<CurveJet> {
    if n <= fam.pole_depth {
        return Err(Error::PoleNotCleared { n, depth: fam.pole_depth });
    }
    let components: Vec<LaurentPoly> =
        fam.slots().iter().map(|s| s.iter().enumerate().map(|(j, p)| p.shift((j * n) as i32)).sum()).collect();
    CurveJet::new(fam.n(), components, Domain::unit_disk())
}

/// The defect `(Z_u + sum X_i (Y_i)_u)(u, u^N)` and the bound
/// `sum_k |coeff_k| / (k+1)` on the sup of its primitive over the unit disk.
pub fn defect(fam: &BoundaryFamily, n: usize) -> Result<(LaurentPoly, f64)> {
    let depth = fam.pole_depth.max(fam.defect_depth);
    if n <= depth {
        return Err(Error::PoleNotCleared { n, depth });
    }
    let poly: LaurentPoly =
        fam.defect_coefficients().iter().enumerate().skip(1).map(|(m, d)| d.shift((m * n) as i32)).sum();
    let bound = poly.terms().map(|(k, c)| c.norm() / (k + 1) as f64).sum();
    Ok((poly, bound))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhOptions {
    pub eps: f64,
    pub rho0: f64,
    pub n_max: usize,
    /// Samples of `u` on each circle for conditions (i)-(iii).
    pub boundary_samples: usize,
    /// Samples of `v` on the target circle or disk before polishing.
    pub target_samples: usize,
    /// Number of candidates `1 - (1 - rho0) 2^-k` tried for `rho'`.
    pub rho_candidates: usize,
}

impl Default for RhOptions {
    fn default() -> Self {
        Self { eps: 0.05, rho0: 0.8, n_max: 4096, boundary_samples: 256, target_samples: 256, rho_candidates: 12 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NTrial {
    pub n: usize,
    pub defect_bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhReport {
    pub n: usize,
    pub rho_prime: f64,
    pub defect_bound: f64,
    /// `sup_{|u| <= rho'} |G - f|`.
    pub sup_i: f64,
    /// `sup_{|u| = 1} dist(G(u), F(u, T))`.
    pub sup_ii: f64,
    /// `sup dist(G(rho u), F(u, D))` over the three test radii.
    pub sup_iii: f64,
    /// C^1 distance on the declared sector, when one is declared.
    pub sup_c1: Option<f64>,
    pub residual: f64,
    pub tried: Vec<NTrial>,
}

#[derive(Clone, Debug)]
pub struct RhSolution {
    pub g: CurveJet,
    pub rho_prime: f64,
    pub n: usize,
    pub report: RhReport,
}

fn circle(r: f64, m: usize) -> impl Iterator<Item = Complex64> {
    (0..m).map(move |k| Complex64::from_polar(r, 2.0 * PI * k as f64 / m as f64))
}

fn sup_i(g: &CurveJet, f: &CurveJet, rho: f64, m: usize) -> f64 {
    use crate::contact::HolomorphicCurve;
    circle(rho, m).map(|u| dist(&g.eval(u), &f.eval(u))).fold(0.0, f64::max)
}

fn sup_ii(g: &CurveJet, fam: &BoundaryFamily, opts: &RhOptions) -> f64 {
    use crate::contact::HolomorphicCurve;
    circle(1.0, opts.boundary_samples)
        .map(|u| distance_to_circle(&fam.freeze(u), &g.eval(u), opts.target_samples))
        .fold(0.0, f64::max)
}

fn sup_iii(g: &CurveJet, fam: &BoundaryFamily, rho_prime: f64, opts: &RhOptions) -> f64 {
    use crate::contact::HolomorphicCurve;
    let radii = [rho_prime, 0.5 * (1.0 + rho_prime), 1.0 - 1e-3];
    circle(1.0, opts.boundary_samples)
        .map(|u| {
            let fz = fam.freeze(u);
            radii.iter().map(|&rho| distance_to_disk(&fz, &g.eval(u * rho), opts.target_samples)).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// `sup (|G - f| + |G' - f'|)` on the boundary of the sector.
fn sup_c1(g: &CurveJet, f: &CurveJet, s: Sector, m: usize) -> f64 {
    use crate::contact::HolomorphicCurve;
    let pts = (0..=m).flat_map(|k| {
        let r = k as f64 / m as f64;
        let t = s.theta0 + (s.theta1 - s.theta0) * r;
        [Complex64::from_polar(r, s.theta0), Complex64::from_polar(r, s.theta1), Complex64::from_polar(1.0, t)]
    });
    pts.map(|u| dist(&g.eval(u), &f.eval(u)) + dist(&g.derivative(u), &f.derivative(u))).fold(0.0, f64::max)
}

/// Doubles `N` from the first admissible value until the defect bound is
/// below `eps/4` and conditions (i)-(iii) hold for some `rho' >= rho0`.
pub fn rh_approximate(f: &CurveJet, fam: &BoundaryFamily, opts: &RhOptions) -> Result<RhSolution> {
    if !(opts.rho0 > 0.0 && opts.rho0 < 1.0) || !(opts.eps > 0.0) {
        return Err(Error::InvalidArgument(format!("need 0 < rho0 < 1 and eps > 0, got {opts:?}")));
    }
    let scale = 1.0 + f.l1_norm();
    let center_defect = pullback_eta(f).max_abs_coeff();
    if center_defect > CENTER_TOL * scale {
        return Err(Error::CenterNotLegendrian { residual: center_defect });
    }
    if f.n() != fam.n() {
        return Err(Error::FamilyMismatch(format!("center has n = {}, family has n = {}", f.n(), fam.n())));
    }
    for (k, (p, q)) in f.components().iter().zip(fam.center.components()).enumerate() {
        if p.max_coeff_distance(q) > MATCH_TOL * scale {
            return Err(Error::FamilyMismatch(format!(
                "component {} of the center differs from the family's v^0 slot",
                crate::contact::component_name(f.n(), k)
            )));
        }
    }

    let mut tried = Vec::new();
    let mut n = fam.pole_depth.max(fam.defect_depth) + 1;
    while n <= opts.n_max {
        let (_, bound) = defect(fam, n)?;
        let mut trial = NTrial { n, defect_bound: bound, passed: false };
        if bound < opts.eps / 4.0 {
            let g = legendrize(&diagonal_substitute(fam, n)?)?;
            let s2 = sup_ii(&g, fam, opts);
            let c1 = fam.sector.map(|s| sup_c1(&g, f, s, opts.boundary_samples));
            if s2 < opts.eps && c1.map_or(true, |c| c < opts.eps) {
                for k in 0..opts.rho_candidates {
                    let rho = 1.0 - (1.0 - opts.rho0) * 0.5f64.powi(k as i32);
                    let s1 = sup_i(&g, f, rho, opts.boundary_samples);
                    if s1 >= opts.eps {
                        continue;
                    }
                    let s3 = sup_iii(&g, fam, rho, opts);
                    if s3 < opts.eps {
                        trial.passed = true;
                        tried.push(trial);
                        let report = RhReport {
                            n,
                            rho_prime: rho,
                            defect_bound: bound,
                            sup_i: s1,
                            sup_ii: s2,
                            sup_iii: s3,
                            sup_c1: c1,
                            residual: crate::contact::legendrian_residual(&g, 128),
                            tried,
                        };
                        return Ok(RhSolution { g, rho_prime: rho, n, report });
                    }
                }
            }
        }
        tried.push(trial);
        n *= 2;
    }
    Err(Error::NotConverged { n_max: opts.n_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{legendrian_residual, HolomorphicCurve};
    use crate::random::{random_curve, random_poly, unit_disk_sample, Rng};
    use proptest::prelude::*;
    use rand::{Rng as _, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one() -> LaurentPoly {
        LaurentPoly::constant(c(1.0, 0.0))
    }

    /// `legendrize(u, u, 0)` with `X(u, v) = u + v`, `Y(u, v) = u`.
    fn reference() -> (CurveJet, BoundaryFamily) {
        let u = LaurentPoly::identity();
        let f = legendrize(&CurveJet::new(1, vec![u.clone(), u, LaurentPoly::zero()], Domain::unit_disk()).unwrap())
            .unwrap();
        let fam = BoundaryFamily::from_center(&f, vec![vec![one()]], vec![vec![]]).unwrap();
        (f, fam)
    }

    pub(crate) fn random_family(rng: &mut Rng, n: usize, lo: i32, hi: i32) -> (CurveJet, BoundaryFamily) {
        let f = legendrize(&random_curve(rng, n, 0, 4, Domain::unit_disk())).unwrap();
        let j = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=4);
        let a = (0..n).map(|_| (0..j).map(|_| random_poly(rng, lo, hi)).collect()).collect();
        let b = (0..n).map(|_| (0..k).map(|_| random_poly(rng, lo, hi)).collect()).collect();
        let fam = BoundaryFamily::from_center(&f, a, b).unwrap();
        (f, fam)
    }

    #[test]
    fn closure_examples() {
        let (f, _) = reference();
        let fam = BoundaryFamily::from_center(&f, vec![vec![one(), one()]], vec![vec![]]).unwrap();
        assert!(fam.c().iter().skip(1).all(LaurentPoly::is_zero));

        // direct oracle: Z = c0 - int_0^v (a0 + a1 s) b1 ds = c0 - a0 b1 v - a1 b1 v^2 / 2
        let mut rng = Rng::seed_from_u64(3);
        let a0 = random_poly(&mut rng, 0, 3);
        let b0 = random_poly(&mut rng, 0, 3);
        let a1 = random_poly(&mut rng, -2, 2);
        let b1 = random_poly(&mut rng, -1, 3);
        let c0 = -(&a0 * &b0.differentiate()).antiderivative().unwrap();
        let cs = legendrian_closure(&[vec![a0.clone(), a1.clone()]], &[vec![b0, b1.clone()]], &c0).unwrap();
        assert!(cs[1].max_coeff_distance(&-(&a0 * &b1)) < 1e-15);
        assert!(cs[2].max_coeff_distance(&(&a1 * &b1).scale(c(-0.5, 0.0))) < 1e-15);

        let bad = legendrian_closure(&[vec![one()]], &[vec![LaurentPoly::identity()]], &LaurentPoly::zero());
        assert!(matches!(bad, Err(Error::CenterNotLegendrian { .. })));
    }

    #[test]
    fn family_mismatch() {
        let (f, _) = reference();
        let err = BoundaryFamily::new(&f, vec![vec![one()]], vec![vec![f.y(1).clone()]]).unwrap_err();
        assert!(matches!(err, Error::FamilyMismatch(_)));
    }

    #[test]
    fn substitution_examples() {
        let (f, _) = reference();
        let fam = BoundaryFamily::from_center(&f, vec![vec![]], vec![vec![]]).unwrap();
        for n in [1, 5, 17] {
            assert_eq!(diagonal_substitute(&fam, n).unwrap(), f);
        }

        let zero = CurveJet::new(1, vec![LaurentPoly::zero(); 3], Domain::unit_disk()).unwrap();
        let fam = BoundaryFamily::from_center(&zero, vec![vec![LaurentPoly::monomial(-1, c(1.0, 0.0))]], vec![vec![]])
            .unwrap();
        assert_eq!(fam.pole_depth(), 1);
        assert_eq!(diagonal_substitute(&fam, 3).unwrap().x(1), &LaurentPoly::monomial(2, c(1.0, 0.0)));
        assert_eq!(diagonal_substitute(&fam, 1).unwrap_err(), Error::PoleNotCleared { n: 1, depth: 1 });

        let mut rng = Rng::seed_from_u64(4);
        let (_, fam) = random_family(&mut rng, 2, -3, 5);
        let n = 8;
        if n > fam.pole_depth() {
            let fnn = diagonal_substitute(&fam, n).unwrap();
            for u in circle(1.0, 32) {
                let direct = fam.eval(u, u.powi(n as i32));
                assert!(dist(&fnn.eval(u), &direct) < 1e-11 * (1.0 + fnn.l1_norm()));
            }
        }
    }

    #[test]
    fn defect_examples() {
        let (f, _) = reference();
        let fam = BoundaryFamily::from_center(&f, vec![vec![]], vec![vec![]]).unwrap();
        let (p, bound) = defect(&fam, 3).unwrap();
        assert!(p.is_zero());
        assert_eq!(bound, 0.0);

        // pole depth one on both sides
        let inv = LaurentPoly::monomial(-1, c(0.5, 0.0));
        let fam = BoundaryFamily::from_center(
            &f,
            vec![vec![inv.clone(), &one() + &inv]],
            vec![vec![&LaurentPoly::identity() + &inv, one().scale(c(0.3, 0.0))]],
        )
        .unwrap();
        let bounds: Vec<f64> = [4, 8, 16, 32, 64].iter().map(|&n| defect(&fam, n).unwrap().1).collect();
        for w in bounds.windows(2) {
            assert!(w[1] < w[0], "{bounds:?}");
        }
    }

    #[test]
    fn defect_lowest_degree() {
        let mut rng = Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (_, fam) = random_family(&mut rng, 1, -2, 3);
            let depth = fam.pole_depth().max(fam.defect_depth());
            for n in [8usize, 16] {
                if n <= depth {
                    continue;
                }
                let (p, _) = defect(&fam, n).unwrap();
                if let Some(lo) = p.min_deg() {
                    assert!(lo >= n as i32 - fam.defect_depth() as i32);
                }
            }
        }
    }

    #[test]
    fn defect_matches_pullback_of_substitution() {
        let mut rng = Rng::seed_from_u64(6);
        let (_, fam) = random_family(&mut rng, 2, -1, 3);
        let n = fam.pole_depth().max(fam.defect_depth()) + 5;
        let (p, _) = defect(&fam, n).unwrap();
        let direct = pullback_eta(&diagonal_substitute(&fam, n).unwrap());
        assert!(p.max_coeff_distance(&direct) < 1e-10 * (1.0 + direct.max_abs_coeff()));
    }

    #[test]
    fn constant_family_converges_immediately() {
        let (f, _) = reference();
        let fam = BoundaryFamily::from_center(&f, vec![vec![]], vec![vec![]]).unwrap();
        let sol = rh_approximate(&f, &fam, &RhOptions::default()).unwrap();
        assert_eq!(sol.n, 1);
        assert_eq!(sol.g, f);
        assert!(sol.report.sup_i < 1e-15 && sol.report.sup_ii < 1e-12);
        // the target disks are the points f(u), so (iii) measures |f(rho u) - f(u)|
        let rho = sol.rho_prime;
        let expect = circle(1.0, 256).map(|u| dist(&f.eval(u * rho), &f.eval(u))).fold(0.0, f64::max);
        assert!(sol.report.sup_iii >= expect * (1.0 - 1e-12) && sol.report.sup_iii < 0.05);
    }

    #[test]
    fn reference_family_converges() {
        let (f, fam) = reference();
        let sol = rh_approximate(&f, &fam, &RhOptions::default()).unwrap();
        assert!(sol.n <= 4096);
        let r = &sol.report;
        assert!(r.sup_i < 0.05 && r.sup_ii < 0.05 && r.sup_iii < 0.05, "{r:?}");
        assert!(r.rho_prime >= 0.8 && r.rho_prime < 1.0);
        assert!(legendrian_residual(&sol.g, 128) <= 1e-12 * (1.0 + sol.g.l1_norm()));
        assert!(dist(&sol.g.eval(c(0.0, 0.0)), &f.eval(c(0.0, 0.0))) <= 1e-13);
    }

    #[test]
    fn unreachable_tolerance() {
        let (f, _) = reference();
        let p = LaurentPoly::monomial(-3, c(0.2, 0.0));
        let fam = BoundaryFamily::from_center(&f, vec![vec![p.clone()]], vec![vec![p]]).unwrap();
        assert!(fam.pole_depth() >= 3);
        let opts = RhOptions { eps: 1e-9, n_max: 64, ..RhOptions::default() };
        assert_eq!(rh_approximate(&f, &fam, &opts).unwrap_err(), Error::NotConverged { n_max: 64 });
    }

    #[test]
    fn sector_closeness_is_reported() {
        let (f, fam) = reference();
        let fam = fam.with_sector(Sector { theta0: 0.0, theta1: 0.5 });
        match rh_approximate(&f, &fam, &RhOptions { n_max: 256, ..RhOptions::default() }) {
            Ok(sol) => assert!(sol.report.sup_c1.unwrap() < 0.05),
            Err(e) => assert_eq!(e, Error::NotConverged { n_max: 256 }),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn bivariate_identity(seed in any::<u64>(), n in 1usize..=2) {
            let mut rng = Rng::seed_from_u64(seed);
            let (_, fam) = random_family(&mut rng, n, -3, 5);
            for u in circle(1.0, 16) {
                for _ in 0..16 {
                    let v = unit_disk_sample(&mut rng, 1.0);
                    prop_assert!(fam.closure_residual(u, v).norm() <= 1e-10);
                }
            }
        }
    }
}
