//! The standard contact structure `eta = dz + sum x_j dy_j` on `C^(2n+1)`.
//!
//! Coordinates are always laid out as `(x1, y1, ..., xn, yn, z)`. Named
//! coordinate indices (`j` in [`CurveJet::x`], [`involution`], ...) are
//! 1-based so they line up with the component names `x1`, `y1`, ...

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::LaurentPoly;

/// Slot of `x_j` in the coordinate vector.
pub fn x_slot(j: usize) -> usize {
    2 * (j - 1)
}

/// Slot of `y_j` in the coordinate vector.
pub fn y_slot(j: usize) -> usize {
    2 * (j - 1) + 1
}

/// Slot of `z` in the coordinate vector.
pub fn z_slot(n: usize) -> usize {
    2 * n
}

fn check_index(j: usize, n: usize) -> Result<()> {
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    Ok(())
}

fn is_finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactPoint {
    n: usize,
    coords: Vec<Complex64>,
}

impl ContactPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.len() < 3 || coords.len() % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "a contact point needs 2n+1 >= 3 coordinates, got {}",
                coords.len()
            )));
        }
        if let Some(k) = coords.iter().position(|c| !is_finite(*c)) {
            return Err(Error::InvalidArgument(format!("coordinate {k} is not finite")));
        }
        Ok(Self { n: (coords.len() - 1) / 2, coords })
    }

    pub fn origin(n: usize) -> Self {
        Self { n, coords: vec![Complex64::default(); 2 * n + 1] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.coords
    }

    pub fn x(&self, j: usize) -> Complex64 {
        self.coords[x_slot(j)]
    }

    pub fn y(&self, j: usize) -> Complex64 {
        self.coords[y_slot(j)]
    }

    pub fn z(&self) -> Complex64 {
        self.coords[z_slot(self.n)]
    }
}

/// Domain of a curve jet: a closed disk or a closed annulus centred at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Domain {
    pub fn unit_disk() -> Self {
        Domain::Disk { radius: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Domain::Disk { radius } if radius > 0.0 && radius.is_finite() => Ok(()),
            Domain::Annulus { inner, outer } if inner > 0.0 && inner < outer && outer.is_finite() => Ok(()),
            d => Err(Error::InvalidDomain(format!("{d:?}"))),
        }
    }

    pub fn is_disk(&self) -> bool {
        matches!(self, Domain::Disk { .. })
    }

    pub fn outer_radius(&self) -> f64 {
        match *self {
            Domain::Disk { radius } => radius,
            Domain::Annulus { outer, .. } => outer,
        }
    }

    /// Radii of the boundary circles.
    pub fn boundary_radii(&self) -> Vec<f64> {
        match *self {
            Domain::Disk { radius } => vec![radius],
            Domain::Annulus { inner, outer } => vec![inner, outer],
        }
    }

    /// Base point of z-primitives: 0 on a disk, the inner radius on an annulus.
    pub fn anchor(&self) -> Complex64 {
        match *self {
            Domain::Disk { .. } => Complex64::default(),
            Domain::Annulus { inner, .. } => Complex64::new(inner, 0.0),
        }
    }

    /// Whether the circle `|u| = r` lies strictly inside the domain.
    pub fn contains_circle(&self, r: f64) -> bool {
        match *self {
            Domain::Disk { radius } => r > 0.0 && r < radius,
            Domain::Annulus { inner, outer } => r > inner && r < outer,
        }
    }

    pub fn contains_point(&self, u: Complex64) -> bool {
        let r = u.norm();
        match *self {
            Domain::Disk { radius } => r <= radius,
            Domain::Annulus { inner, outer } => r >= inner && r <= outer,
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.outer_radius()
    }
}

/// A holomorphic map into `C^(2n+1)` that can be sampled with its derivative.
pub trait HolomorphicCurve {
    /// Contact dimension parameter `n`.
    fn n(&self) -> usize;
    fn eval(&self, u: Complex64) -> Vec<Complex64>;
    fn derivative(&self, u: Complex64) -> Vec<Complex64>;
}

/// A curve with one Laurent polynomial per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveJet {
    n: usize,
    components: Vec<LaurentPoly>,
    domain: Domain,
}

impl CurveJet {
    pub fn new(n: usize, components: Vec<LaurentPoly>, domain: Domain) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if components.len() != 2 * n + 1 {
            return Err(Error::DimensionMismatch { expected: 2 * n + 1, found: components.len() });
        }
        domain.validate()?;
        if domain.is_disk() {
            if let Some(k) = components.iter().position(|p| !p.is_taylor()) {
                return Err(Error::InvalidDomain(format!(
                    "component {} has negative degrees on a disk",
                    component_name(n, k)
                )));
            }
        }
        Ok(Self { n, components, domain })
    }

    /// Constant curve at `p` on the unit disk.
    pub fn constant(p: &ContactPoint) -> Self {
        Self {
            n: p.n,
            components: p.coords.iter().map(|&c| LaurentPoly::constant(c)).collect(),
            domain: Domain::unit_disk(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn components(&self) -> &[LaurentPoly] {
        &self.components
    }

    pub fn into_components(self) -> Vec<LaurentPoly> {
        self.components
    }

    pub fn component(&self, k: usize) -> &LaurentPoly {
        &self.components[k]
    }

    pub fn x(&self, j: usize) -> &LaurentPoly {
        &self.components[x_slot(j)]
    }

    pub fn y(&self, j: usize) -> &LaurentPoly {
        &self.components[y_slot(j)]
    }

    pub fn z(&self) -> &LaurentPoly {
        &self.components[z_slot(self.n)]
    }

    /// Copy with component `k` replaced; the domain is re-validated.
    pub fn with_component(&self, k: usize, p: LaurentPoly) -> Result<Self> {
        let mut components = self.components.clone();
        components[k] = p;
        Self::new(self.n, components, self.domain)
    }

    pub fn with_domain(&self, domain: Domain) -> Result<Self> {
        Self::new(self.n, self.components.clone(), domain)
    }

    /// Sum of the coefficient l1-norms of all components.
    pub fn l1_norm(&self) -> f64 {
        self.components.iter().map(LaurentPoly::l1_norm).sum()
    }

    /// Multiplies every component by `s`.
    pub fn scale(&self, s: f64) -> Self {
        let s = Complex64::new(s, 0.0);
        Self { n: self.n, components: self.components.iter().map(|p| p.scale(s)).collect(), domain: self.domain }
    }

    pub fn evaluate(&self, u: Complex64) -> Result<Vec<Complex64>> {
        self.components.iter().map(|p| p.evaluate(u)).collect()
    }

    pub fn max_degree(&self) -> i32 {
        self.components.iter().filter_map(LaurentPoly::max_deg).max().unwrap_or(0)
    }
}

impl HolomorphicCurve for CurveJet {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, u: Complex64) -> Vec<Complex64> {
        self.components.iter().map(|p| p.eval_unchecked(u)).collect()
    }

    fn derivative(&self, u: Complex64) -> Vec<Complex64> {
        self.components.iter().map(|p| p.eval_with_derivative(u).1).collect()
    }
}

/// File-format name of component slot `k`.
pub fn component_name(n: usize, k: usize) -> String {
    if k == 2 * n {
        "z".to_string()
    } else if k % 2 == 0 {
        format!("x{}", k / 2 + 1)
    } else {
        format!("y{}", k / 2 + 1)
    }
}

/// `sum_i X_i Y_i'`, the part of the pullback that does not involve `Z`.
pub fn lagrange_density(f: &CurveJet) -> LaurentPoly {
    (1..=f.n).map(|j| f.x(j) * &f.y(j).differentiate()).sum()
}

/// Density of `f*eta` against `du`: `Z' + sum_i X_i Y_i'`.
pub fn pullback_eta(f: &CurveJet) -> LaurentPoly {
    let mut out = f.z().differentiate();
    out += &lagrange_density(f);
    out
}

/// Density of `f*eta_j` with `eta_j = dz + y_j dx_j + sum_{i != j} x_i dy_i`.
pub fn pullback_eta_j(f: &CurveJet, j: usize) -> Result<LaurentPoly> {
    check_index(j, f.n)?;
    let mut out = f.z().differentiate();
    for i in 1..=f.n {
        let term = if i == j { f.y(i) * &f.x(i).differentiate() } else { f.x(i) * &f.y(i).differentiate() };
        out += &term;
    }
    Ok(out)
}

/// Replaces `Z` by `Z - int f*eta` so that the pullback vanishes identically.
///
/// `Z` keeps its value at the domain anchor. On an annulus the Lagrange
/// density must be residue-free.
pub fn legendrize(f: &CurveJet) -> Result<CurveJet> {
    let primitive = lagrange_density(f).antiderivative()?;
    let anchor = f.domain.anchor();
    let z_anchor = f.z().eval_unchecked(anchor) + primitive.eval_unchecked(anchor);
    let z = &LaurentPoly::constant(z_anchor) - &primitive;
    f.with_component(z_slot(f.n), z)
}

/// `m` equispaced points on the circle `|u| = r`.
pub fn circle_points(r: f64, m: usize) -> impl Iterator<Item = Complex64> {
    (0..m).map(move |k| Complex64::from_polar(r, 2.0 * PI * k as f64 / m as f64))
}

/// Max of `|f*eta / du|` over `m` points on each boundary circle.
pub fn legendrian_residual(f: &CurveJet, m: usize) -> f64 {
    assert!(m >= 8, "residual needs at least 8 samples per circle");
    let p = pullback_eta(f);
    f.domain
        .boundary_radii()
        .into_iter()
        .flat_map(|r| circle_points(r, m))
        .map(|u| p.eval_unchecked(u).norm())
        .fold(0.0, f64::max)
}

/// The involution `(x_j, y_j, z) -> (x_j, -y_j, z + x_j y_j)` on a point.
pub fn involution_point(p: &ContactPoint, j: usize) -> Result<ContactPoint> {
    check_index(j, p.n)?;
    let mut coords = p.coords.clone();
    let (x, y) = (p.x(j), p.y(j));
    coords[y_slot(j)] = -y;
    coords[z_slot(p.n)] = p.z() + x * y;
    Ok(ContactPoint { n: p.n, coords })
}

/// The involution applied to a curve; it pulls `eta_j` back to `eta`.
pub fn involution(f: &CurveJet, j: usize) -> Result<CurveJet> {
    check_index(j, f.n)?;
    let mut components = f.components.clone();
    components[y_slot(j)] = -f.y(j);
    components[z_slot(f.n)] = f.z() + &(f.x(j) * f.y(j));
    CurveJet::new(f.n, components, f.domain)
}

/// The Reeb field of `eta`: the unit vector in the `z` slot.
pub fn reeb_standard(n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::default(); 2 * n + 1];
    v[z_slot(n)] = Complex64::new(1.0, 0.0);
    v
}

/// `eta_p(v)`.
pub fn eta_at(p: &[Complex64], v: &[Complex64]) -> Complex64 {
    let n = (p.len() - 1) / 2;
    (1..=n).fold(v[z_slot(n)], |acc, j| acc + p[x_slot(j)] * v[y_slot(j)])
}

/// `d eta(u, v) = sum_j (u_xj v_yj - u_yj v_xj)`.
pub fn d_eta(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let n = (u.len() - 1) / 2;
    (1..=n).map(|j| u[x_slot(j)] * v[y_slot(j)] - u[y_slot(j)] * v[x_slot(j)]).sum()
}

/// Basis of `ker eta_p`: `d/dx_j` and `d/dy_j - x_j d/dz`.
pub fn kernel_basis(p: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = (p.len() - 1) / 2;
    let mut basis = Vec::with_capacity(2 * n);
    for j in 1..=n {
        let mut ex = vec![Complex64::default(); 2 * n + 1];
        ex[x_slot(j)] = Complex64::new(1.0, 0.0);
        let mut ey = vec![Complex64::default(); 2 * n + 1];
        ey[y_slot(j)] = Complex64::new(1.0, 0.0);
        ey[z_slot(n)] = -p[x_slot(j)];
        basis.push(ex);
        basis.push(ey);
    }
    basis
}
