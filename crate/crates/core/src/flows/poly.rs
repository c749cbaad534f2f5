//! Sparse multivariate polynomials in `(x1, y1, ..., xn, yn, z)` and
//! polynomial vector fields.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::contact::{component_name, x_slot, y_slot, z_slot};
use crate::error::{Error, Result};

const TRIM: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub struct PolyFunction {
    n: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl PolyFunction {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self::monomial(n, vec![0; 2 * n + 1], c)
    }

    /// The coordinate function in slot `k`.
    pub fn var(n: usize, k: usize) -> Self {
        let mut e = vec![0; 2 * n + 1];
        e[k] = 1;
        Self::monomial(n, e, Complex64::new(1.0, 0.0))
    }

    pub fn x(n: usize, j: usize) -> Self {
        Self::var(n, x_slot(j))
    }

    pub fn y(n: usize, j: usize) -> Self {
        Self::var(n, y_slot(j))
    }

    pub fn z(n: usize) -> Self {
        Self::var(n, z_slot(n))
    }

    pub fn monomial(n: usize, exponents: Vec<u32>, c: Complex64) -> Self {
        assert_eq!(exponents.len(), 2 * n + 1, "exponent vector length");
        let mut terms = BTreeMap::new();
        if c.norm() >= TRIM {
            terms.insert(exponents, c);
        }
        Self { n, terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, Complex64)>>(n: usize, terms: I) -> Result<Self> {
        let mut out = Self::zero(n);
        for (e, c) in terms {
            if e.len() != 2 * n + 1 {
                return Err(Error::DimensionMismatch { expected: 2 * n + 1, found: e.len() });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidArgument("non-finite polynomial coefficient".into()));
            }
            *out.terms.entry(e).or_default() += c;
        }
        out.trim();
        Ok(out)
    }

    fn trim(&mut self) {
        self.terms.retain(|_, c| c.norm() >= TRIM);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Complex64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        (self - other).max_abs_coeff()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self { n: self.n, terms: self.terms.iter().map(|(e, &c)| (e.clone(), c * s)).collect() };
        out.trim();
        out
    }

    pub fn partial(&self, k: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, &c) in &self.terms {
            if e[k] > 0 {
                let mut d = e.clone();
                d[k] -= 1;
                *out.terms.entry(d).or_default() += c * e[k] as f64;
            }
        }
        out.trim();
        out
    }

    pub fn eval(&self, p: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, &c)| e.iter().zip(p).fold(c, |acc, (&k, &x)| if k == 0 { acc } else { acc * x.powu(k) }))
            .sum()
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.n, other.n, "polynomials over different n");
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            *out.terms.entry(e.clone()).or_default() += c * sign;
        }
        out.trim();
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.n, Complex64::new(1.0, 0.0)), |acc, _| &acc * self)
    }
}

impl std::ops::Add for &PolyFunction {
    type Output = PolyFunction;
    fn add(self, rhs: &PolyFunction) -> PolyFunction {
        self.combine(rhs, 1.0)
    }
}

impl std::ops::Sub for &PolyFunction {
    type Output = PolyFunction;
    fn sub(self, rhs: &PolyFunction) -> PolyFunction {
        self.combine(rhs, -1.0)
    }
}

impl std::ops::Neg for &PolyFunction {
    type Output = PolyFunction;
    fn neg(self) -> PolyFunction {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl std::ops::Mul for &PolyFunction {
    type Output = PolyFunction;
    fn mul(self, rhs: &PolyFunction) -> PolyFunction {
        assert_eq!(self.n, rhs.n, "polynomials over different n");
        let mut out = PolyFunction::zero(self.n);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *out.terms.entry(e).or_default() += ca * cb;
            }
        }
        out.trim();
        out
    }
}

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 && c.re >= 0.0 {
        format!("{:?}", c.re)
    } else {
        format!("({:?}{:+?}i)", c.re, c.im)
    }
}

impl fmt::Display for PolyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, &c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", fmt_coeff(c))?;
            for (k, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*{}", component_name(self.n, k))?,
                    _ => write!(f, "*{}^{p}", component_name(self.n, k))?,
                }
            }
        }
        Ok(())
    }
}

/// A vector field with one polynomial per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField {
    n: usize,
    comps: Vec<PolyFunction>,
}

impl PolyVectorField {
    pub fn new(comps: Vec<PolyFunction>) -> Result<Self> {
        let Some(first) = comps.first() else {
            return Err(Error::InvalidArgument("empty vector field".into()));
        };
        let n = first.n;
        if comps.len() != 2 * n + 1 || comps.iter().any(|c| c.n != n) {
            return Err(Error::DimensionMismatch { expected: 2 * n + 1, found: comps.len() });
        }
        Ok(Self { n, comps })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, comps: vec![PolyFunction::zero(n); 2 * n + 1] }
    }

    /// The constant field `d/d(slot k)`.
    pub fn coordinate(n: usize, k: usize) -> Self {
        let mut v = Self::zero(n);
        v.comps[k] = PolyFunction::constant(n, Complex64::new(1.0, 0.0));
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[PolyFunction] {
        &self.comps
    }

    pub fn component(&self, k: usize) -> &PolyFunction {
        &self.comps[k]
    }

    pub fn with_component(mut self, k: usize, p: PolyFunction) -> Self {
        self.comps[k] = p;
        self
    }

    pub fn eval(&self, p: &[Complex64]) -> Vec<Complex64> {
        self.comps.iter().map(|c| c.eval(p)).collect()
    }

    /// `V(h) = sum_k V_k dh/d(slot k)`.
    pub fn apply(&self, h: &PolyFunction) -> PolyFunction {
        self.comps.iter().enumerate().fold(PolyFunction::zero(self.n), |acc, (k, v)| &acc + &(v * &h.partial(k)))
    }

    /// `[V, W]_k = V(W_k) - W(V_k)`.
    pub fn lie_bracket(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            comps: (0..self.comps.len()).map(|k| &self.apply(&other.comps[k]) - &other.apply(&self.comps[k])).collect(),
        }
    }

    /// `eta(V) = V_z + sum_j x_j V_yj`.
    pub fn contract_eta(&self) -> PolyFunction {
        let n = self.n;
        (1..=n).fold(self.comps[z_slot(n)].clone(), |acc, j| &acc + &(&PolyFunction::x(n, j) * &self.comps[y_slot(j)]))
    }

    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        self.comps.iter().zip(&other.comps).map(|(a, b)| a.max_coeff_distance(b)).fold(0.0, f64::max)
    }
}

impl std::ops::Add for &PolyVectorField {
    type Output = PolyVectorField;
    fn add(self, rhs: &PolyVectorField) -> PolyVectorField {
        PolyVectorField { n: self.n, comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect() }
    }
}

/// Parses expressions such as `x1*y1^2 - (2+3i)*z + 0.5` over `n` pairs.
///
/// Grammar: sums and differences of products of factors; a factor is a real
/// number, `i`, a coordinate name, or a parenthesized expression, optionally
/// raised to a nonnegative integer power.
pub fn parse_poly(src: &str, n: usize) -> Result<PolyFunction> {
    let mut p = Parser { s: src.as_bytes(), pos: 0, n };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::InvalidArgument(format!("polynomial parse error at byte {}: {msg}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<PolyFunction> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -&self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PolyFunction> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.power()?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<PolyFunction> {
        let base = self.factor()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let k: u32 = std::str::from_utf8(&self.s[start..self.pos])
                .ok()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| self.error("expected a nonnegative integer exponent"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn factor(&mut self) -> Result<PolyFunction> {
        let n = self.n;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() {
                    let c = self.s[self.pos];
                    let exp_sign = (c == b'+' || c == b'-') && matches!(self.s[self.pos - 1], b'e' | b'E');
                    if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let v: f64 = std::str::from_utf8(&self.s[start..self.pos])
                    .ok()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| self.error("malformed number"))?;
                // a trailing i makes the literal imaginary
                if self.s.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    return Ok(PolyFunction::constant(n, Complex64::new(0.0, v)));
                }
                Ok(PolyFunction::constant(n, Complex64::new(v, 0.0)))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(PolyFunction::constant(n, Complex64::new(0.0, 1.0)))
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(PolyFunction::z(n))
            }
            Some(c @ (b'x' | b'y')) => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let j: usize = std::str::from_utf8(&self.s[start..self.pos])
                    .ok()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| self.error("expected a coordinate index"))?;
                if j == 0 || j > n {
                    return Err(Error::IndexOutOfRange { index: j, n });
                }
                Ok(if c == b'x' { PolyFunction::x(n, j) } else { PolyFunction::y(n, j) })
            }
            _ => Err(self.error("expected a number, coordinate or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parse_and_evaluate() {
        let h = parse_poly("x1*y1^2 - (2+3i)*z + 0.5", 1).unwrap();
        let p = [c(2.0, 0.0), c(3.0, 0.0), c(1.0, 1.0)];
        let expect = c(18.0, 0.0) - c(2.0, 3.0) * c(1.0, 1.0) + c(0.5, 0.0);
        assert!((h.eval(&p) - expect).norm() < 1e-14);
        assert_eq!(parse_poly("(x1 + y1)^2", 1).unwrap(), parse_poly("x1^2 + 2*x1*y1 + y1^2", 1).unwrap());
        assert_eq!(parse_poly("1e-3*z", 1).unwrap(), PolyFunction::z(1).scale(c(1e-3, 0.0)));
        assert_eq!(parse_poly("2.5i", 1).unwrap(), PolyFunction::constant(1, c(0.0, 2.5)));
        assert_eq!(parse_poly("x2", 1).unwrap_err(), Error::IndexOutOfRange { index: 2, n: 1 });
        assert!(parse_poly("x1 +", 1).is_err());
        assert!(parse_poly("x1 y1", 1).is_err());
    }

    #[test]
    fn display_round_trips() {
        let h = parse_poly("x1*y1^2 - (2+3i)*z + 0.5 - 1.25i*x2^3", 2).unwrap();
        assert_eq!(parse_poly(&h.to_string(), 2).unwrap(), h);
    }

    #[test]
    fn partials_and_brackets() {
        let h = parse_poly("x1^3*z + y1", 1).unwrap();
        assert_eq!(h.partial(0), parse_poly("3*x1^2*z", 1).unwrap());
        assert_eq!(h.partial(1), PolyFunction::constant(1, c(1.0, 0.0)));
        let a = PolyVectorField::coordinate(1, 0);
        let b = PolyVectorField::coordinate(1, 1).with_component(2, -&PolyFunction::x(1, 1));
        let br = a.lie_bracket(&b);
        assert_eq!(br, PolyVectorField::zero(1).with_component(2, PolyFunction::constant(1, c(-1.0, 0.0))));
    }
}
