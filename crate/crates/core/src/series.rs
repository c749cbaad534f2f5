//! Finite Laurent polynomials in one complex variable.
//!
//! Every curve component, boundary coefficient and defect form in this crate
//! is a [`LaurentPoly`]: a sparse map from integer degree to a complex
//! coefficient. Negative degrees are first class; they carry the poles at
//! `u = 0` of boundary data and of annulus curves.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with modulus below this are pure underflow and get dropped.
pub const TRIM: f64 = 1e-300;

/// Relative tolerance for the residue-free precondition of [`LaurentPoly::antiderivative`].
pub const RESIDUE_TOL: f64 = 1e-12;

// Products whose degree span is wider than this fall back to sparse accumulation.
const DENSE_MUL_SPAN: i64 = 1 << 20;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i32, Complex64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(degree: i32, c: Complex64) -> Self {
        let mut coeffs = BTreeMap::new();
        if c.norm() >= TRIM {
            coeffs.insert(degree, c);
        }
        Self { coeffs }
    }

    /// The identity map `u`.
    pub fn identity() -> Self {
        Self::monomial(1, Complex64::new(1.0, 0.0))
    }

    /// Builds a polynomial from `(degree, coefficient)` pairs; repeated degrees are summed.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i32, Complex64)>,
    {
        let mut coeffs: BTreeMap<i32, Complex64> = BTreeMap::new();
        for (degree, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite { degree });
            }
            *coeffs.entry(degree).or_default() += c;
        }
        Ok(Self::normalized(coeffs))
    }

    /// Dense constructor: `coeffs[k]` multiplies `u^(min_degree + k)`.
    pub fn from_dense(min_degree: i32, coeffs: &[Complex64]) -> Result<Self> {
        Self::from_terms(coeffs.iter().enumerate().map(|(k, &c)| (min_degree + k as i32, c)))
    }

    pub(crate) fn normalized(mut coeffs: BTreeMap<i32, Complex64>) -> Self {
        coeffs.retain(|_, c| c.norm() >= TRIM);
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_deg(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_deg(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Order of the pole at the origin, zero for Taylor polynomials.
    pub fn pole_order(&self) -> usize {
        match self.min_deg() {
            Some(d) if d < 0 => (-d) as usize,
            _ => 0,
        }
    }

    pub fn is_taylor(&self) -> bool {
        self.min_deg().map_or(true, |d| d >= 0)
    }

    pub fn coeff(&self, degree: i32) -> Complex64 {
        self.coeffs.get(&degree).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&d, &c)| (d, c))
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise distance to `other`.
    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (&d, &c) in &self.coeffs {
            worst = worst.max((c - other.coeff(d)).norm());
        }
        for (&d, &c) in &other.coeffs {
            if !self.coeffs.contains_key(&d) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::normalized(self.coeffs.iter().map(|(&d, &c)| (d, c * s)).collect())
    }

    /// Multiplication by `u^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(&d, &c)| (d + k, c)).collect() }
    }

    /// Drops every coefficient with modulus `<= tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Self { coeffs: self.coeffs.iter().filter(|(_, c)| c.norm() > tol).map(|(&d, &c)| (d, c)).collect() }
    }

    /// Keeps only the terms with degree in `range`.
    pub fn restrict(&self, range: std::ops::RangeInclusive<i32>) -> Self {
        Self { coeffs: self.coeffs.range(range).map(|(&d, &c)| (d, c)).collect() }
    }

    pub fn differentiate(&self) -> Self {
        Self::normalized(self.coeffs.iter().filter(|(&d, _)| d != 0).map(|(&d, &c)| (d - 1, c * d as f64)).collect())
    }

    /// Term-wise primitive with zero constant of integration.
    ///
    /// The `u^-1` coefficient must vanish up to `RESIDUE_TOL * (1 + |p|_1)`;
    /// a coefficient inside that band is treated as rounding and dropped.
    pub fn antiderivative(&self) -> Result<Self> {
        let residue = self.residue();
        if residue.norm() > RESIDUE_TOL * (1.0 + self.l1_norm()) {
            return Err(Error::NonzeroResidue { residue });
        }
        Ok(Self::normalized(
            self.coeffs.iter().filter(|(&d, _)| d != -1).map(|(&d, &c)| (d + 1, c / (d + 1) as f64)).collect(),
        ))
    }

    /// Coefficient of `u^-1`, i.e. the circle integral divided by `2 pi i`.
    pub fn residue(&self) -> Complex64 {
        self.coeff(-1)
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if z == Complex64::default() && !self.is_taylor() {
            return Err(Error::ZeroInPolarPart);
        }
        Ok(self.eval_unchecked(z))
    }

    /// Sparse Horner evaluation without the polar-part check.
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let mut iter = self.coeffs.iter().rev();
        let Some((&top, &lead)) = iter.next() else {
            return Complex64::default();
        };
        let mut acc = lead;
        let mut prev = top;
        for (&d, &c) in iter {
            acc = acc * z.powi(prev - d) + c;
            prev = d;
        }
        if prev == 0 {
            acc
        } else {
            acc * z.powi(prev)
        }
    }

    /// Value and first derivative at `z`.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::default();
        let mut deriv = Complex64::default();
        for (&d, &c) in &self.coeffs {
            if d == 0 {
                value += c;
                continue;
            }
            let p = z.powi(d - 1);
            value += c * p * z;
            deriv += c * p * d as f64;
        }
        (value, deriv)
    }
}

fn mul_polys(p: &LaurentPoly, q: &LaurentPoly) -> LaurentPoly {
    let (Some(pmin), Some(pmax), Some(qmin), Some(qmax)) = (p.min_deg(), p.max_deg(), q.min_deg(), q.max_deg()) else {
        return LaurentPoly::zero();
    };
    let lo = pmin as i64 + qmin as i64;
    let span = (pmax as i64 + qmax as i64) - lo + 1;
    if span <= DENSE_MUL_SPAN && span <= 4 * (p.len() * q.len()) as i64 + 64 {
        let mut acc = vec![Complex64::default(); span as usize];
        for (&i, &a) in &p.coeffs {
            for (&j, &b) in &q.coeffs {
                acc[(i as i64 + j as i64 - lo) as usize] += a * b;
            }
        }
        let coeffs = acc
            .into_iter()
            .enumerate()
            .filter(|(_, c)| c.norm() >= TRIM)
            .map(|(k, c)| ((lo + k as i64) as i32, c))
            .collect();
        LaurentPoly { coeffs }
    } else {
        let mut coeffs: BTreeMap<i32, Complex64> = BTreeMap::new();
        for (&i, &a) in &p.coeffs {
            for (&j, &b) in &q.coeffs {
                *coeffs.entry(i + j).or_default() += a * b;
            }
        }
        LaurentPoly::normalized(coeffs)
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (&d, &c) in &rhs.coeffs {
            *self.coeffs.entry(d).or_default() += c;
        }
        self.coeffs.retain(|_, c| c.norm() >= TRIM);
    }
}

impl SubAssign<&LaurentPoly> for LaurentPoly {
    fn sub_assign(&mut self, rhs: &LaurentPoly) {
        for (&d, &c) in &rhs.coeffs {
            *self.coeffs.entry(d).or_default() -= c;
        }
        self.coeffs.retain(|_, c| c.norm() >= TRIM);
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        mul_polys(self, rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { coeffs: self.coeffs.iter().map(|(&d, &c)| (d, -c)).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: &LaurentPoly) -> LaurentPoly {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl std::iter::Sum for LaurentPoly {
    fn sum<I: Iterator<Item = LaurentPoly>>(iter: I) -> Self {
        iter.fold(LaurentPoly::zero(), |mut acc, p| {
            acc += &p;
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(terms: &[(i32, f64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().map(|&(d, r)| (d, c(r, 0.0)))).unwrap()
    }

    // Deterministic pseudo-random coefficients for the oracle checks.
    fn lcg_poly(seed: u64, lo: i32, hi: i32) -> LaurentPoly {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        LaurentPoly::from_terms((lo..=hi).map(|d| (d, c(next(), next())))).unwrap()
    }

    #[test]
    fn cancellation_and_identity() {
        let p = &poly(&[(1, 1.0), (0, 1.0)]) + &poly(&[(1, -1.0)]);
        assert_eq!(p, LaurentPoly::constant(c(1.0, 0.0)));
        assert_eq!(p.len(), 1);
        let q = lcg_poly(3, -2, 5);
        assert_eq!(&q + &LaurentPoly::zero(), q);
    }

    #[test]
    fn add_matches_dictionary_merge() {
        let p = lcg_poly(11, 0, 8);
        let q = lcg_poly(12, -3, 8);
        let mut merged: std::collections::HashMap<i32, Complex64> = Default::default();
        for (d, v) in p.terms().chain(q.terms()) {
            *merged.entry(d).or_default() += v;
        }
        let sum = &p + &q;
        for (d, v) in merged {
            assert_eq!(sum.coeff(d), v);
        }
    }

    #[test]
    fn small_products() {
        let p = &poly(&[(0, 1.0), (1, 1.0)]) * &poly(&[(0, 1.0), (1, -1.0)]);
        assert_eq!(p, poly(&[(0, 1.0), (2, -1.0)]));
        let q = &poly(&[(-1, 1.0)]) * &LaurentPoly::identity();
        assert_eq!(q, LaurentPoly::constant(c(1.0, 0.0)));
    }

    #[test]
    fn multiply_matches_double_loop() {
        let p = lcg_poly(21, 0, 16);
        let q = lcg_poly(22, 0, 16);
        let a: Vec<Complex64> = (0..=16).map(|d| p.coeff(d)).collect();
        let b: Vec<Complex64> = (0..=16).map(|d| q.coeff(d)).collect();
        let mut naive = vec![Complex64::default(); 33];
        for i in 0..=16 {
            for j in 0..=16 {
                naive[i + j] += a[i] * b[j];
            }
        }
        let prod = &p * &q;
        assert_eq!(prod.min_deg(), Some(0));
        assert_eq!(prod.max_deg(), Some(32));
        for (k, v) in naive.iter().enumerate() {
            let got = prod.coeff(k as i32);
            assert!((got - v).norm() <= 1e-13 * v.norm().max(1.0), "degree {k}");
        }
    }

    #[test]
    fn sparse_product_path() {
        let p = LaurentPoly::from_terms([(0, c(1.0, 0.0)), (4000, c(2.0, 0.0))]).unwrap();
        let q = LaurentPoly::from_terms([(-7, c(1.0, 1.0)), (3000, c(0.5, 0.0))]).unwrap();
        let prod = &p * &q;
        assert_eq!(prod.len(), 4);
        assert_eq!(prod.coeff(7000), c(1.0, 0.0));
        assert_eq!(prod.coeff(3993), c(2.0, 2.0));
    }

    #[test]
    fn power_rule() {
        assert_eq!(poly(&[(3, 1.0)]).differentiate(), poly(&[(2, 3.0)]));
        assert!(LaurentPoly::constant(c(4.0, 1.0)).differentiate().is_zero());
        assert_eq!(poly(&[(-2, 1.0)]).differentiate(), poly(&[(-3, -2.0)]));
    }

    #[test]
    fn antiderivatives() {
        assert_eq!(poly(&[(1, 1.0)]).antiderivative().unwrap(), poly(&[(2, 0.5)]));
        assert!(LaurentPoly::zero().antiderivative().unwrap().is_zero());
        assert!(matches!(poly(&[(-1, 1.0)]).antiderivative(), Err(Error::NonzeroResidue { .. })));
        // within the relative band the residue counts as rounding
        let p = LaurentPoly::from_terms([(-1, c(1e-15, 0.0)), (2, c(3.0, 0.0))]).unwrap();
        assert_eq!(p.antiderivative().unwrap(), poly(&[(3, 1.0)]));
    }

    #[test]
    fn evaluation() {
        let p = poly(&[(2, 1.0), (0, 1.0)]);
        assert!(p.evaluate(c(0.0, 1.0)).unwrap().norm() < 1e-15);
        assert_eq!(poly(&[(-1, 1.0)]).evaluate(c(2.0, 0.0)).unwrap(), c(0.5, 0.0));
        assert_eq!(poly(&[(-1, 1.0)]).evaluate(Complex64::default()), Err(Error::ZeroInPolarPart));
        assert_eq!(poly(&[(0, 2.0), (3, 1.0)]).evaluate(Complex64::default()).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn evaluation_matches_direct_summation() {
        let p = lcg_poly(31, 0, 10);
        for k in 0..64 {
            let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 64.0);
            let direct: Complex64 = (0..=10).map(|d| p.coeff(d) * z.powi(d)).sum();
            assert!((p.evaluate(z).unwrap() - direct).norm() <= 1e-12);
        }
    }

    #[test]
    fn residues() {
        assert_eq!(poly(&[(-1, 1.0)]).residue(), c(1.0, 0.0));
        assert_eq!(lcg_poly(5, 0, 6).residue(), Complex64::default());
        assert_eq!(poly(&[(-1, 3.0), (-2, 1.0), (0, 5.0)]).residue(), c(3.0, 0.0));
    }

    #[test]
    fn rejects_nan() {
        assert_eq!(LaurentPoly::from_terms([(2, c(f64::NAN, 0.0))]), Err(Error::NonFinite { degree: 2 }));
    }

    #[test]
    fn value_and_derivative_agree_with_differentiate() {
        let p = lcg_poly(41, -3, 6);
        let z = c(0.7, -0.4);
        let (v, d) = p.eval_with_derivative(z);
        assert!((v - p.eval_unchecked(z)).norm() < 1e-13);
        assert!((d - p.differentiate().eval_unchecked(z)).norm() < 1e-12);
    }

    fn arb_poly(lo: i32, hi: i32) -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (hi - lo + 1) as usize).prop_map(move |v| {
            LaurentPoly::from_terms(v.into_iter().enumerate().map(|(k, (r, i))| (lo + k as i32, c(r, i)))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn differentiate_inverts_antiderivative(p in arb_poly(0, 12), q in arb_poly(-5, -2)) {
            let p = &p + &q;
            let back = p.antiderivative().unwrap().differentiate();
            prop_assert!(back.max_coeff_distance(&p) <= 1e-15 * (1.0 + p.max_abs_coeff()));
        }

        #[test]
        fn multiply_commutes_and_associates(p in arb_poly(-3, 13), q in arb_poly(0, 16), r in arb_poly(-2, 8)) {
            prop_assert!((&p * &q).max_coeff_distance(&(&q * &p)) <= 1e-12);
            let left = &(&p * &q) * &r;
            let right = &p * &(&q * &r);
            prop_assert!(left.max_coeff_distance(&right) <= 1e-12 * (1.0 + left.max_abs_coeff()));
        }

        #[test]
        fn exact_derivatives_have_no_residue(p in arb_poly(-4, 6), q in arb_poly(-6, 4)) {
            prop_assert_eq!(p.differentiate().residue(), Complex64::default());
            let ibp = &(&p * &q.differentiate()) + &(&p.differentiate() * &q);
            prop_assert!(ibp.residue().norm() <= 1e-13 * (1.0 + p.l1_norm() * q.l1_norm()));
        }

        #[test]
        fn evaluation_is_multiplicative(p in arb_poly(-3, 8), q in arb_poly(-2, 8), r in 0.5f64..2.0, t in 0.0f64..6.3) {
            let z = Complex64::from_polar(r, t);
            let lhs = (&p * &q).evaluate(z).unwrap();
            let rhs = p.evaluate(z).unwrap() * q.evaluate(z).unwrap();
            let scale = p.l1_norm() * q.l1_norm() * r.max(1.0 / r).powi(16);
            prop_assert!((lhs - rhs).norm() <= 1e-11 * scale.max(rhs.norm()).max(1.0));
        }
    }
}
