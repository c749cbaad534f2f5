//! Contact Hamiltonian fields, their flows and contact-preservation checks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::poly::{PolyFunction, PolyVectorField};
use crate::contact::{eta_at, x_slot, y_slot, z_slot, ContactPoint};
use crate::error::{Error, Result};

pub const MIN_STEPS: usize = 16;
pub const DIVERGENCE_NORM: f64 = 1e12;
pub const FD_STEP: f64 = 1e-5;
const KERNEL_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

/// `V_h = (h - sum x_j h_xj) d_z + sum (x_j h_z - h_yj) d_xj + h_xj d_yj`.
pub fn contact_hamiltonian_field(h: &PolyFunction) -> PolyVectorField {
    let n = h.n();
    let hz = h.partial(z_slot(n));
    let mut comps = vec![PolyFunction::zero(n); 2 * n + 1];
    let mut vz = h.clone();
    for j in 1..=n {
        let xj = PolyFunction::x(n, j);
        let hx = h.partial(x_slot(j));
        vz = &vz - &(&xj * &hx);
        comps[x_slot(j)] = &(&xj * &hz) - &h.partial(y_slot(j));
        comps[y_slot(j)] = hx;
    }
    comps[z_slot(n)] = vz;
    PolyVectorField::new(comps).expect("2n+1 components by construction")
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfinitesimalReport {
    /// max |V.eta - h| over the points
    pub contraction: f64,
    /// max over points and slots of the 1-form `V.d(eta) + dh - R(h) eta`
    pub differential: f64,
    /// max |h| + max |V| over the points, for relative thresholds
    pub scale: f64,
}

impl InfinitesimalReport {
    pub fn max_residual(&self) -> f64 {
        self.contraction.max(self.differential)
    }
}

pub fn verify_infinitesimal(
    v: &PolyVectorField,
    h: &PolyFunction,
    points: &[ContactPoint],
) -> Result<InfinitesimalReport> {
    let n = v.n();
    if h.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: h.n() });
    }
    let eta_v = v.contract_eta();
    let grad: Vec<PolyFunction> = (0..=2 * n).map(|k| h.partial(k)).collect();
    let mut rep = InfinitesimalReport { contraction: 0.0, differential: 0.0, scale: 0.0 };
    for p in points {
        if p.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.n() });
        }
        let q = p.coords();
        let vq = v.eval(q);
        let hq = h.eval(q);
        let dh: Vec<Complex64> = grad.iter().map(|g| g.eval(q)).collect();
        let rh = dh[z_slot(n)];
        rep.contraction = rep.contraction.max((eta_v.eval(q) - hq).norm());
        // V.d(eta) = sum V_xj dy_j - V_yj dx_j; eta = dz + sum x_j dy_j
        let mut form = vec![Complex64::default(); 2 * n + 1];
        for j in 1..=n {
            form[x_slot(j)] = -vq[y_slot(j)] + dh[x_slot(j)];
            form[y_slot(j)] = vq[x_slot(j)] + dh[y_slot(j)] - rh * q[x_slot(j)];
        }
        form[z_slot(n)] = dh[z_slot(n)] - rh;
        rep.differential = rep.differential.max(form.iter().map(|c| c.norm()).fold(0.0, f64::max));
        let vmax = vq.iter().map(|c| c.norm()).fold(0.0, f64::max);
        rep.scale = rep.scale.max(hq.norm() + vmax);
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult {
    pub point: ContactPoint,
    /// `|y_h - y_(h/2)| / 15`
    pub error_estimate: f64,
}

fn rk4(v: &PolyVectorField, p0: &[Complex64], tau: Complex64, steps: usize) -> Result<Vec<Complex64>> {
    let h = tau / steps as f64;
    let f = |p: &[Complex64]| -> Vec<Complex64> { v.eval(p).into_iter().map(|c| c * h).collect() };
    let axpy = |p: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> {
        p.iter().zip(k).map(|(a, b)| a + b * s).collect()
    };
    let mut p = p0.to_vec();
    for _ in 0..steps {
        let k1 = f(&p);
        let k2 = f(&axpy(&p, &k1, 0.5));
        let k3 = f(&axpy(&p, &k2, 0.5));
        let k4 = f(&axpy(&p, &k3, 1.0));
        for (i, c) in p.iter_mut().enumerate() {
            *c += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) / 6.0;
        }
        let norm = p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            return Err(Error::Diverged { norm });
        }
    }
    Ok(p)
}

/// Integrates `dp/ds = tau V(p)` on `s in [0, 1]` with `steps` classical
/// Runge-Kutta steps; the estimate compares against `2 steps`.
pub fn flow(v: &PolyVectorField, p0: &ContactPoint, tau: Complex64, steps: usize) -> Result<FlowResult> {
    if steps < MIN_STEPS {
        return Err(Error::InvalidArgument(format!("flow needs at least {MIN_STEPS} steps, got {steps}")));
    }
    if p0.n() != v.n() {
        return Err(Error::DimensionMismatch { expected: v.n(), found: p0.n() });
    }
    let coarse = rk4(v, p0.coords(), tau, steps)?;
    let fine = rk4(v, p0.coords(), tau, 2 * steps)?;
    let diff = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    Ok(FlowResult { point: ContactPoint::new(coarse)?, error_estimate: diff / 15.0 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactomorphismReport {
    pub image: ContactPoint,
    /// `|eta(J v)| / |J v|` per basis vector
    pub per_vector: Vec<f64>,
    pub residual: f64,
}

fn check_kernel_basis(p: &[Complex64], basis: &[Vec<Complex64>]) -> Result<()> {
    let dim = p.len();
    let n = (dim - 1) / 2;
    if basis.len() != 2 * n {
        return Err(Error::BasisDegenerate(format!("expected {} vectors, got {}", 2 * n, basis.len())));
    }
    let pnorm = 1.0 + p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for (i, v) in basis.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
        let vn = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 || eta_at(p, v).norm() > KERNEL_TOL * vn * pnorm {
            return Err(Error::BasisDegenerate(format!("vector {i} is not in the contact kernel")));
        }
    }
    let m = DMatrix::from_fn(dim, basis.len(), |r, c| basis[c][r]);
    let sv = m.singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if lo <= RANK_TOL * hi {
        return Err(Error::BasisDegenerate(format!("rank deficient, singular values {lo:e} / {hi:e}")));
    }
    Ok(())
}

/// Pushes each kernel vector through the finite-difference Jacobian of the
/// time-`tau` flow and measures how far it leaves the kernel at the image.
pub fn verify_contactomorphism(
    v: &PolyVectorField,
    p0: &ContactPoint,
    tau: Complex64,
    basis: &[Vec<Complex64>],
    steps: usize,
) -> Result<ContactomorphismReport> {
    check_kernel_basis(p0.coords(), basis)?;
    let image = flow(v, p0, tau, steps)?.point;
    let mut per_vector = Vec::with_capacity(basis.len());
    for b in basis {
        let shifted = |s: f64| -> Result<Vec<Complex64>> {
            let q: Vec<Complex64> = p0.coords().iter().zip(b).map(|(p, d)| p + d * s).collect();
            Ok(flow(v, &ContactPoint::new(q)?, tau, steps)?.point.into_coords())
        };
        let plus = shifted(FD_STEP)?;
        let minus = shifted(-FD_STEP)?;
        let jv: Vec<Complex64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * FD_STEP)).collect();
        let norm = jv.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        per_vector.push(eta_at(image.coords(), &jv).norm() / norm);
    }
    let residual = per_vector.iter().copied().fold(0.0, f64::max);
    Ok(ContactomorphismReport { image, per_vector, residual })
}
