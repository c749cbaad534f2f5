//! Periods of `sum x_j dy_j` over cycles, period-dominating sprays, and
//! single-valued integration of the `z` component.
//!
//! Only disk and annulus domains occur, so there is at most one independent
//! cycle, but every routine accepts an arbitrary list of cycles.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::contact::{lagrange_density, x_slot, y_slot, z_slot, CurveJet};
use crate::error::{Error, Result};
use crate::fourier::spectral_derivative;
use crate::series::LaurentPoly;

/// Condition-number ceiling for a period matrix.
pub const MAX_CONDITION: f64 = 1e8;

/// Default monomial dictionary radius `D` in `u^m, |m| <= D`.
pub const DEFAULT_DICTIONARY_DEGREE: i32 = 8;

/// Minimum number of distinct points on a closed polyline.
pub const MIN_POLYLINE_POINTS: usize = 16;

// Dictionary columns smaller than this fraction of the largest are ignored.
const COLUMN_FLOOR: f64 = 1e-10;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

#[derive(Clone, Debug, PartialEq)]
pub enum Cycle {
    /// `|u| = radius`, counter-clockwise for orientation `+1`.
    Circle { radius: f64, orientation: i8 },
    /// Closed list of samples; the last point repeats the first.
    Polyline { points: Vec<Complex64> },
}

impl Cycle {
    pub fn circle(radius: f64) -> Self {
        Cycle::Circle { radius, orientation: 1 }
    }

    /// Closed `m`-gon inscribed in `|u| = radius`, listed counter-clockwise.
    pub fn circle_polyline(radius: f64, m: usize) -> Self {
        let mut points: Vec<Complex64> =
            (0..m).map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / m as f64)).collect();
        points.push(points[0]);
        Cycle::Polyline { points }
    }

    pub fn reversed(&self) -> Self {
        match self {
            Cycle::Circle { radius, orientation } => Cycle::Circle { radius: *radius, orientation: -orientation },
            Cycle::Polyline { points } => Cycle::Polyline { points: points.iter().rev().copied().collect() },
        }
    }

    fn validate(&self, f: &CurveJet) -> Result<()> {
        let domain = f.domain();
        match self {
            Cycle::Circle { radius, orientation } => {
                if orientation.abs() != 1 {
                    return Err(Error::InvalidArgument("circle orientation must be +1 or -1".into()));
                }
                if !domain.contains_circle(*radius) {
                    return Err(Error::CycleOutsideDomain(format!("circle of radius {radius} in {domain:?}")));
                }
            }
            Cycle::Polyline { points } => {
                if points.len() < MIN_POLYLINE_POINTS + 1 || points.first() != points.last() {
                    return Err(Error::InvalidArgument(format!(
                        "polyline must be closed with at least {MIN_POLYLINE_POINTS} points"
                    )));
                }
                if let Some(p) = points.iter().find(|p| !domain.contains_point(**p) || p.norm() == 0.0) {
                    return Err(Error::CycleOutsideDomain(format!("point {p} outside {domain:?}")));
                }
            }
        }
        Ok(())
    }
}

/// `oint_C p(u) du`: exact via the residue on circles, spectral quadrature on polylines.
fn cycle_integral(p: &LaurentPoly, c: &Cycle) -> Complex64 {
    match c {
        Cycle::Circle { orientation, .. } => TWO_PI_I * p.residue() * *orientation as f64,
        Cycle::Polyline { points } => {
            let u = &points[..points.len() - 1];
            let du = spectral_derivative(u);
            let h = 2.0 * PI / u.len() as f64;
            u.iter().zip(&du).map(|(&u, &d)| p.eval_unchecked(u) * d).sum::<Complex64>() * h
        }
    }
}

/// `oint_C sum_i X_i dY_i`.
pub fn period(f: &CurveJet, c: &Cycle) -> Result<Complex64> {
    c.validate(f)?;
    Ok(cycle_integral(&lagrange_density(f), c))
}

pub fn periods(f: &CurveJet, cycles: &[Cycle]) -> Result<Vec<Complex64>> {
    cycles.iter().map(|c| period(f, c)).collect()
}

fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// A core curve deformed affinely in one component: `core[target] + sum zeta_k g_k`.
#[derive(Clone, Debug)]
pub struct Spray {
    pub core: CurveJet,
    pub directions: Vec<LaurentPoly>,
    pub target_component: usize,
    pub period_matrix: DMatrix<Complex64>,
    pub cycles: Vec<Cycle>,
}

impl Spray {
    /// Column of period derivatives of direction `g`.
    fn column(core: &CurveJet, target: usize, g: &LaurentPoly, cycles: &[Cycle]) -> Vec<Complex64> {
        let integrand = if target % 2 == 0 {
            g * &core.component(target + 1).differentiate()
        } else {
            core.component(target - 1) * &g.differentiate()
        };
        cycles.iter().map(|c| cycle_integral(&integrand, c)).collect()
    }

    pub fn deform(&self, zeta: &[Complex64]) -> Result<CurveJet> {
        if zeta.len() != self.directions.len() {
            return Err(Error::DimensionMismatch { expected: self.directions.len(), found: zeta.len() });
        }
        let mut comp = self.core.component(self.target_component).clone();
        for (g, &z) in self.directions.iter().zip(zeta) {
            comp += &g.scale(z);
        }
        self.core.with_component(self.target_component, comp)
    }

    pub fn periods_at(&self, zeta: &[Complex64]) -> Result<Vec<Complex64>> {
        periods(&self.deform(zeta)?, &self.cycles)
    }
}

/// Monomial exponents in dictionary order `0, -1, 1, -2, 2, ...`.
fn dictionary(max_degree: i32, taylor_only: bool) -> Vec<i32> {
    let mut out = vec![0];
    for m in 1..=max_degree {
        if !taylor_only {
            out.push(-m);
        }
        out.push(m);
    }
    out
}

/// Chooses monomials `g_k` whose period derivatives form an invertible,
/// well-conditioned matrix and normalizes them to the identity.
///
/// `target_component` is the slot of an `x_j` or `y_j`; the paired
/// component is `y_j` or `x_j` respectively.
pub fn build_dominating_spray(
    f: &CurveJet,
    cycles: &[Cycle],
    target_component: usize,
    max_degree: i32,
) -> Result<Spray> {
    let n = f.n();
    if target_component >= z_slot(n) {
        return Err(Error::InvalidArgument(format!("spray target must be an x or y slot, got {target_component}")));
    }
    for c in cycles {
        c.validate(f)?;
    }
    let j = target_component / 2 + 1;
    let paired = if target_component == x_slot(j) { y_slot(j) } else { x_slot(j) };
    if f.component(paired).differentiate().is_zero() {
        return Err(Error::ConstantPairedComponent { component: paired });
    }
    let l = cycles.len();
    if l == 0 {
        return Ok(Spray {
            core: f.clone(),
            directions: Vec::new(),
            target_component,
            period_matrix: DMatrix::zeros(0, 0),
            cycles: Vec::new(),
        });
    }

    let candidates: Vec<(LaurentPoly, Vec<Complex64>)> = dictionary(max_degree, f.domain().is_disk())
        .into_iter()
        .map(|m| {
            let g = LaurentPoly::monomial(m, Complex64::new(1.0, 0.0));
            let col = Spray::column(f, target_component, &g, cycles);
            (g, col)
        })
        .collect();
    let col_norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let largest = candidates.iter().map(|(_, c)| col_norm(c)).fold(0.0, f64::max);

    let mut chosen: Vec<&(LaurentPoly, Vec<Complex64>)> = Vec::new();
    for cand in &candidates {
        if chosen.len() == l {
            break;
        }
        if largest == 0.0 || col_norm(&cand.1) < COLUMN_FLOOR * largest {
            continue;
        }
        let k = chosen.len() + 1;
        let trial = DMatrix::from_fn(l, k, |r, c| if c + 1 < k { chosen[c].1[r] } else { cand.1[r] });
        if condition_number(&trial) < MAX_CONDITION {
            chosen.push(cand);
        }
    }
    if chosen.len() < l {
        return Err(Error::DominationFailed { max_degree });
    }

    let raw = DMatrix::from_fn(l, l, |r, c| chosen[c].1[r]);
    let inv = raw.clone().try_inverse().ok_or(Error::SingularMatrix)?;
    let directions: Vec<LaurentPoly> =
        (0..l).map(|k| (0..l).map(|jj| chosen[jj].0.scale(inv[(jj, k)])).sum()).collect();
    let cols: Vec<Vec<Complex64>> = directions.iter().map(|g| Spray::column(f, target_component, g, cycles)).collect();
    let period_matrix = DMatrix::from_fn(l, l, |r, c| cols[c][r]);
    if condition_number(&period_matrix) >= MAX_CONDITION {
        return Err(Error::DominationFailed { max_degree });
    }
    Ok(Spray { core: f.clone(), directions, target_component, period_matrix, cycles: cycles.to_vec() })
}

/// Solves `P(0) + M zeta = 0` and returns `zeta` with the deformed curve.
pub fn solve_period_vanishing(s: &Spray) -> Result<(Vec<Complex64>, CurveJet)> {
    let l = s.directions.len();
    if l == 0 {
        return Ok((Vec::new(), s.core.clone()));
    }
    let p0 = DVector::from_vec(periods(&s.core, &s.cycles)?);
    let zeta = s.period_matrix.clone().lu().solve(&(-p0)).ok_or(Error::SingularMatrix)?;
    let zeta: Vec<Complex64> = zeta.iter().copied().collect();
    let g = s.deform(&zeta)?;
    Ok((zeta, g))
}

/// Replaces `Z` by the single-valued primitive of `-sum X_i dY_i` with
/// `Z(anchor) = z0`.
pub fn integrate_z(f: &CurveJet, z0: Complex64) -> Result<CurveJet> {
    let density = lagrange_density(f);
    let primitive = density.antiderivative().map_err(|e| match e {
        Error::NonzeroResidue { residue } => Error::NonvanishingPeriod { period: TWO_PI_I * residue },
        other => other,
    })?;
    let a = primitive.eval_unchecked(f.domain().anchor());
    let z = &LaurentPoly::constant(z0 + a) - &primitive;
    f.with_component(z_slot(f.n()), z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{legendrian_residual, Domain};
    use crate::random::{random_curve, unit_disk_sample, Rng};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn annulus() -> Domain {
        Domain::Annulus { inner: 0.5, outer: 2.0 }
    }

    fn curve(x: LaurentPoly, y: LaurentPoly, domain: Domain) -> CurveJet {
        CurveJet::new(1, vec![x, y, LaurentPoly::zero()], domain).unwrap()
    }

    #[test]
    fn period_examples() {
        let f = curve(LaurentPoly::monomial(-1, c(1.0, 0.0)), LaurentPoly::identity(), annulus());
        assert!((period(&f, &Cycle::circle(1.0)).unwrap() - TWO_PI_I).norm() < 1e-15);
        let mut rng = Rng::seed_from_u64(1);
        let g = random_curve(&mut rng, 2, 0, 6, annulus());
        assert_eq!(period(&g, &Cycle::circle(1.2)).unwrap(), c(0.0, 0.0));
        assert!(matches!(period(&g, &Cycle::circle(3.0)), Err(Error::CycleOutsideDomain(_))));
        assert!(matches!(period(&g, &Cycle::circle(0.5)), Err(Error::CycleOutsideDomain(_))));
    }

    #[test]
    fn circle_and_polyline_agree() {
        let mut rng = Rng::seed_from_u64(2);
        for _ in 0..5 {
            let f = random_curve(&mut rng, 2, -3, 4, annulus());
            let exact = period(&f, &Cycle::circle(1.0)).unwrap();
            let quad = period(&f, &Cycle::circle_polyline(1.0, 4096)).unwrap();
            assert!((exact - quad).norm() < 1e-9, "{exact} vs {quad}");
        }
    }

    #[test]
    fn spray_examples() {
        let f = curve(LaurentPoly::monomial(-1, c(1.0, 0.0)), LaurentPoly::identity(), annulus());
        let s = build_dominating_spray(&f, &[Cycle::circle(1.0)], 0, DEFAULT_DICTIONARY_DEGREE).unwrap();
        assert_eq!(s.directions.len(), 1);
        let expect = LaurentPoly::monomial(-1, c(1.0, 0.0) / TWO_PI_I);
        assert!(s.directions[0].max_coeff_distance(&expect) < 1e-16);
        assert!((s.period_matrix[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);

        let disk = curve(LaurentPoly::identity(), LaurentPoly::identity(), Domain::unit_disk());
        let s = build_dominating_spray(&disk, &[], 0, 8).unwrap();
        assert_eq!(s.period_matrix.shape(), (0, 0));

        let constant = curve(LaurentPoly::identity(), LaurentPoly::constant(c(2.0, 0.0)), annulus());
        assert_eq!(
            build_dominating_spray(&constant, &[Cycle::circle(1.0)], 0, 8).unwrap_err(),
            Error::ConstantPairedComponent { component: 1 }
        );
    }

    #[test]
    fn dictionary_search_matches_residue_enumeration() {
        let y = LaurentPoly::from_terms([(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))]).unwrap();
        let f = curve(LaurentPoly::constant(c(1.0, 0.0)), y.clone(), annulus());
        // oracle: residue of u^m (1 - u^-2) is 1 at m = -1 and -1 at m = 1
        let dy = y.differentiate();
        let oracle: Vec<i32> =
            (-4..=4).filter(|&m| (&LaurentPoly::monomial(m, c(1.0, 0.0)) * &dy).residue().norm() > 0.5).collect();
        assert_eq!(oracle, vec![-1, 1]);
        let s = build_dominating_spray(&f, &[Cycle::circle(1.0)], 0, 4).unwrap();
        let deg = s.directions[0].min_deg().unwrap();
        assert!(oracle.contains(&deg));
    }

    #[test]
    fn solve_examples() {
        let dom = annulus();
        let x = LaurentPoly::from_terms([(-1, c(1.0, 0.0)), (0, c(1.0, 0.0))]).unwrap();
        let f = curve(x, LaurentPoly::identity(), dom);
        let s = build_dominating_spray(&f, &[Cycle::circle(1.0)], 0, 8).unwrap();
        let (zeta, g) = solve_period_vanishing(&s).unwrap();
        assert!((zeta[0] + TWO_PI_I).norm() < 1e-14);
        assert!(g.x(1).max_coeff_distance(&LaurentPoly::constant(c(1.0, 0.0))) < 1e-15);

        let legendrian = curve(LaurentPoly::identity(), LaurentPoly::identity(), dom);
        let s = build_dominating_spray(&legendrian, &[Cycle::circle(1.0)], 0, 8).unwrap();
        let (zeta, g) = solve_period_vanishing(&s).unwrap();
        assert_eq!(zeta, vec![c(0.0, 0.0)]);
        assert_eq!(g, legendrian);
    }

    #[test]
    fn integrate_z_examples() {
        let d = Domain::unit_disk();
        let f = curve(LaurentPoly::constant(c(1.0, 0.0)), LaurentPoly::identity(), d);
        assert_eq!(integrate_z(&f, c(0.0, 0.0)).unwrap().z(), &LaurentPoly::monomial(1, c(-1.0, 0.0)));
        let f = curve(LaurentPoly::identity(), LaurentPoly::identity(), d);
        let expect = LaurentPoly::from_terms([(0, c(5.0, 0.0)), (2, c(-0.5, 0.0))]).unwrap();
        assert_eq!(integrate_z(&f, c(5.0, 0.0)).unwrap().z(), &expect);
        let f = curve(LaurentPoly::monomial(-1, c(1.0, 0.0)), LaurentPoly::identity(), annulus());
        assert!(matches!(integrate_z(&f, c(0.0, 0.0)), Err(Error::NonvanishingPeriod { .. })));
    }

    proptest! {
        #[test]
        fn annulus_pipeline(seed in any::<u64>(), target in 0usize..2) {
            let mut rng = Rng::seed_from_u64(seed);
            let f = random_curve(&mut rng, 1, -3, 4, annulus());
            let cycles = [Cycle::circle(1.0)];
            let s = build_dominating_spray(&f, &cycles, target, DEFAULT_DICTIONARY_DEGREE).unwrap();
            let p0 = period(&f, &cycles[0]).unwrap();

            // affinity of the period map in the spray parameter
            for _ in 0..5 {
                let z = unit_disk_sample(&mut rng, 1.0);
                let lhs = s.periods_at(&[z]).unwrap()[0] - p0;
                let rhs = s.period_matrix[(0, 0)] * z;
                prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + p0.norm()));
            }

            let (_, g) = solve_period_vanishing(&s).unwrap();
            prop_assert!(period(&g, &cycles[0]).unwrap().norm() <= 1e-10 * (1.0 + p0.norm()));
            let h = integrate_z(&g, c(0.3, 0.0)).unwrap();
            prop_assert!(legendrian_residual(&h, 64) <= 1e-12 * (1.0 + h.l1_norm()));
            prop_assert!((h.z().evaluate(c(0.5, 0.0)).unwrap() - c(0.3, 0.0)).norm() < 1e-12 * (1.0 + h.l1_norm()));
        }

        #[test]
        fn orientation_and_radius_invariance(seed in any::<u64>()) {
            let mut rng = Rng::seed_from_u64(seed);
            let f = random_curve(&mut rng, 2, -3, 4, annulus());
            let a = period(&f, &Cycle::circle(0.8)).unwrap();
            let b = period(&f, &Cycle::circle(1.7)).unwrap();
            prop_assert!((a - b).norm() <= 1e-10);
            let r = period(&f, &Cycle::circle(0.8).reversed()).unwrap();
            prop_assert_eq!(r, -a);
        }
    }
}
