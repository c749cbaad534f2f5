//! Metric and embedding diagnostics, and one boundary-push step that raises
//! the intrinsic boundary distance of a Legendrian disk.

use std::f64::consts::PI;

use num_complex::Complex64;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::SeedableRng;

use crate::contact::{legendrian_residual, ContactPoint, CurveJet, Domain, HolomorphicCurve};
use crate::error::{Error, Result};
use crate::flat::{boundary_disk_family, jitter, orthogonal_plane, FlatDisk, PLANE_TOL};
use crate::fourier::laurent_fit;
use crate::random::Rng;
use crate::rh::{rh_approximate, BoundaryFamily, RhOptions, RhReport};
use crate::series::LaurentPoly;

/// Injectivity and immersion margins below this are flagged.
pub const TAU_EMBED: f64 = 1e-9;

/// Fraction of the domain diameter used as the default diagonal exclusion.
pub const DIAG_FRACTION: f64 = 0.05;

pub const MIN_RINGS: usize = 16;
pub const MIN_ANGLES: usize = 64;

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `|f'(u)|` in the Euclidean metric of `C^(2n+1)`.
pub fn induced_speed(f: &dyn HolomorphicCurve, u: Complex64) -> f64 {
    norm(&f.derivative(u))
}

/// Polar grid resolution for [`intrinsic_distance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricGrid {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for MetricGrid {
    fn default() -> Self {
        Self { n_r: 64, n_theta: 256 }
    }
}

/// Shortest chordal path from the center to the boundary ring of a polar grid
/// on a disk of radius `radius`; edges join radial and angular neighbours.
pub fn intrinsic_distance(f: &dyn HolomorphicCurve, radius: f64, grid: MetricGrid) -> Result<f64> {
    let MetricGrid { n_r, n_theta } = grid;
    if n_r < MIN_RINGS || n_theta < MIN_ANGLES {
        return Err(Error::InvalidArgument(format!(
            "metric grid needs n_r >= {MIN_RINGS} and n_theta >= {MIN_ANGLES}, got {n_r} x {n_theta}"
        )));
    }
    let center_value = f.eval(Complex64::default());
    let values: Vec<Vec<Complex64>> = (1..=n_r)
        .flat_map(|i| {
            let r = radius * i as f64 / n_r as f64;
            (0..n_theta).map(move |k| Complex64::from_polar(r, 2.0 * PI * k as f64 / n_theta as f64))
        })
        .map(|u| f.eval(u))
        .collect();
    let idx = |i: usize, k: usize| NodeIndex::new(1 + (i - 1) * n_theta + k);

    let mut g: UnGraph<(), f64> = UnGraph::with_capacity(1 + values.len(), 3 * values.len());
    for _ in 0..=values.len() {
        g.add_node(());
    }
    let value = |i: usize, k: usize| &values[(i - 1) * n_theta + k];
    for k in 0..n_theta {
        g.add_edge(NodeIndex::new(0), idx(1, k), gap(&center_value, value(1, k)));
    }
    for i in 1..=n_r {
        for k in 0..n_theta {
            let next = (k + 1) % n_theta;
            g.add_edge(idx(i, k), idx(i, next), gap(value(i, k), value(i, next)));
            if i < n_r {
                g.add_edge(idx(i, k), idx(i + 1, k), gap(value(i, k), value(i + 1, k)));
            }
        }
    }
    let dist = dijkstra(&g, NodeIndex::new(0), None, |e| *e.weight());
    Ok((0..n_theta).map(|k| dist[&idx(n_r, k)]).fold(f64::INFINITY, f64::min))
}

/// Sum of chords along the ray `arg u = theta` sampled with `steps` pieces.
pub fn radial_path_length(f: &dyn HolomorphicCurve, radius: f64, theta: f64, steps: usize) -> f64 {
    let pts: Vec<Vec<Complex64>> =
        (0..=steps).map(|i| f.eval(Complex64::from_polar(radius * i as f64 / steps as f64, theta))).collect();
    pts.windows(2).map(|w| gap(&w[0], &w[1])).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingReport {
    /// `min |f(u) - f(w)|` over sample pairs with `|u - w| >= delta_diag`.
    pub min_gap: f64,
    /// `min |u - w|` over the same pairs.
    pub min_domain_gap: f64,
    pub min_speed: f64,
    pub worst_pair: (Complex64, Complex64),
    pub flagged: bool,
}

/// Polar sample set with an even number of angles, so it is closed under `u -> -u`
/// on disks.
fn embedding_samples(domain: Domain, m: usize) -> Vec<Complex64> {
    let rings = ((m as f64 / 8.0).sqrt().ceil() as usize).max(2);
    let angles = {
        let a = m.div_ceil(rings);
        a + a % 2
    };
    let (lo, hi) = match domain {
        Domain::Disk { radius } => (0.0, radius),
        Domain::Annulus { inner, outer } => (inner, outer),
    };
    let mut pts = Vec::with_capacity(rings * angles + 1);
    if domain.is_disk() {
        pts.push(Complex64::default());
    }
    for i in 1..=rings {
        let r = if domain.is_disk() {
            hi * i as f64 / rings as f64
        } else {
            lo + (hi - lo) * (i - 1) as f64 / (rings - 1) as f64
        };
        for k in 0..angles / 2 {
            let u = Complex64::from_polar(r, 2.0 * PI * k as f64 / angles as f64);
            pts.push(u);
            pts.push(-u);
        }
    }
    pts
}

/// Sampled injectivity and immersion margins of a curve over `domain`.
pub fn embedding_check(
    f: &dyn HolomorphicCurve,
    domain: Domain,
    m: usize,
    delta_diag: Option<f64>,
) -> Result<EmbeddingReport> {
    if m < 100 {
        return Err(Error::InvalidArgument(format!("embedding check needs at least 100 samples, got {m}")));
    }
    let delta = delta_diag.unwrap_or(DIAG_FRACTION * domain.diameter());
    let pts = embedding_samples(domain, m);
    let vals: Vec<Vec<Complex64>> = pts.iter().map(|&u| f.eval(u)).collect();
    let min_speed = pts.iter().map(|&u| induced_speed(f, u)).fold(f64::INFINITY, f64::min);
    let mut min_gap = f64::INFINITY;
    let mut min_domain_gap = f64::INFINITY;
    let mut worst_pair = (Complex64::default(), Complex64::default());
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (pts[i] - pts[j]).norm();
            if d < delta {
                continue;
            }
            min_domain_gap = min_domain_gap.min(d);
            let g = gap(&vals[i], &vals[j]);
            if g < min_gap {
                min_gap = g;
                worst_pair = (pts[i], pts[j]);
            }
        }
    }
    Ok(EmbeddingReport {
        min_gap,
        min_domain_gap,
        min_speed,
        worst_pair,
        flagged: min_gap < TAU_EMBED || min_speed < TAU_EMBED,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PushParams {
    /// Radius of the attached flat disks.
    pub mu: f64,
    /// Required bound on `|f - target|` over the boundary samples.
    pub delta: f64,
    /// Lower bound on the current intrinsic distance, only reported against.
    pub d: f64,
    /// Initial number of boundary arcs; doubled until the arc oscillation is small.
    pub m: usize,
    /// Arc oscillation tolerance of `f` and the target.
    pub arc_tol: f64,
    /// Fraction of an arc over which a disk is tapered to a point next to a plane change.
    pub taper: f64,
    /// Relative cutoff for the Laurent fit of boundary coefficients.
    pub fit_tol: f64,
    pub rh: RhOptions,
    pub grid: MetricGrid,
    pub seed: u64,
}

impl Default for PushParams {
    fn default() -> Self {
        Self {
            mu: 0.5,
            delta: 0.12,
            d: 0.5,
            m: 8,
            arc_tol: 0.05,
            taper: 0.25,
            fit_tol: 1e-13,
            rh: RhOptions { eps: 0.004, ..RhOptions::default() },
            grid: MetricGrid::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PushReport {
    pub arcs: usize,
    pub series_order: usize,
    pub bound: f64,
    pub measured: f64,
    pub margin: f64,
    pub dist_before: f64,
    pub dist_after: f64,
    pub delta_gain: f64,
    /// `delta_gain <= 0`.
    pub ineffective: bool,
    /// Whether the initial distance exceeded `d`.
    pub above_d: bool,
    pub residual: f64,
    pub jittered_arcs: usize,
    pub rh: RhReport,
}

// C-infinity step from 0 at t = 0 to 1 at t = 1.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

fn arc_ranges(k: usize, m: usize) -> Vec<(usize, usize)> {
    (0..m).map(|j| ((j * k).div_ceil(m), ((j + 1) * k).div_ceil(m))).collect()
}

fn oscillation(vals: &[Vec<Complex64>], ranges: &[(usize, usize)]) -> f64 {
    ranges
        .iter()
        .map(|&(s, e)| {
            let mid = (s + e) / 2;
            (s..e).map(|k| gap(&vals[k], &vals[mid])).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Attaches flat disks of radius `mu` along the boundary, in planes
/// Hermitian-orthogonal to `f - target`, and solves the Riemann-Hilbert
/// problem for them.
///
/// `target[k]` is the target at `u_k = e^(2 pi i k / K)`. The bound
/// `|f~ - target| < sqrt(delta^2 + mu^2)` is verified on those samples.
pub fn boundary_push(f: &CurveJet, target: &[[Complex64; 3]], params: &PushParams) -> Result<(CurveJet, PushReport)> {
    if f.n() != 1 {
        return Err(Error::InvalidArgument("boundary push is implemented for n = 1".into()));
    }
    if f.domain() != Domain::unit_disk() {
        return Err(Error::InvalidDomain("boundary push needs the unit disk".into()));
    }
    let k_samples = target.len();
    if k_samples < 64 {
        return Err(Error::InvalidArgument(format!("need at least 64 target samples, got {k_samples}")));
    }
    if !(params.mu >= 0.0 && params.delta > 0.0 && params.d > 0.0) || params.m < 4 || params.m % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "need mu >= 0, delta > 0, d > 0 and even m >= 4, got mu = {}, delta = {}, d = {}, m = {}",
            params.mu, params.delta, params.d, params.m
        )));
    }

    let us: Vec<Complex64> =
        (0..k_samples).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / k_samples as f64)).collect();
    let fv: Vec<Vec<Complex64>> = us.iter().map(|&u| f.eval(u)).collect();
    let tv: Vec<Vec<Complex64>> = target.iter().map(|t| t.to_vec()).collect();
    let before = fv.iter().zip(&tv).map(|(a, b)| gap(a, b)).fold(0.0, f64::max);
    if before >= params.delta {
        return Err(Error::PreconditionViolated(format!(
            "boundary distance to the target is {before:e}, not below delta = {:e}",
            params.delta
        )));
    }
    let normals: Vec<[Complex64; 3]> =
        fv.iter().zip(target).map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]]).collect();

    let mut m = params.m;
    while m < k_samples / 4 {
        let ranges = arc_ranges(k_samples, m);
        if oscillation(&fv, &ranges).max(oscillation(&tv, &ranges)) < params.arc_tol {
            break;
        }
        m *= 2;
    }
    let m = m.min(k_samples / 4);
    let ranges = arc_ranges(k_samples, m);

    let mut rng = Rng::seed_from_u64(params.seed);
    let mut jittered = 0;
    let mut arc_normals = Vec::with_capacity(m);
    for &(s, e) in &ranges {
        let mut g = normals[(s + e) / 2];
        let size = norm(&g);
        let mut tries = 0;
        while g[0].norm() <= PLANE_TOL * size || g[2].norm() <= PLANE_TOL * size {
            if tries == 8 {
                return Err(Error::NormalDegenerate { sample: (s + e) / 2 });
            }
            g = jitter(&g, &mut rng);
            tries += 1;
        }
        jittered += usize::from(tries > 0);
        arc_normals.push(g);
    }

    // taper only next to junctions where the plane changes
    let planes: Vec<(Complex64, Complex64)> = arc_normals.iter().map(orthogonal_plane).collect();
    let mut junctions = Vec::new();
    for j in 0..m {
        let (p, q) = (planes[(j + m - 1) % m], planes[j]);
        let scale = 1.0 + p.0.norm() + p.1.norm();
        if (p.0 - q.0).norm() + (p.1 - q.1).norm() > 1e-9 * scale {
            junctions.push(ranges[j].0 as f64 - 0.5);
        }
    }
    let width = (params.taper * k_samples as f64 / m as f64).max(1.0);
    let taper: Vec<f64> = (0..k_samples)
        .map(|k| {
            let d = junctions
                .iter()
                .map(|&j| {
                    let d = (k as f64 - j).abs();
                    d.min(k_samples as f64 - d)
                })
                .fold(f64::INFINITY, f64::min);
            smooth_step(d / width)
        })
        .collect();

    let centers: Vec<ContactPoint> = fv.iter().map(|v| ContactPoint::new(v.clone())).collect::<Result<_>>()?;
    let mut sample_normals = vec![[Complex64::default(); 3]; k_samples];
    for (j, &(s, e)) in ranges.iter().enumerate() {
        for n in &mut sample_normals[s..e] {
            *n = arc_normals[j];
        }
    }
    let mut disks: Vec<FlatDisk> = boundary_disk_family(&centers, &sample_normals, params.mu)?;
    for (d, &w) in disks.iter_mut().zip(&taper) {
        d.scale *= w;
    }

    // truncation order of the exponential in v
    let order = {
        let ratio = disks.iter().map(|d| d.scale / d.embedding.spec().a()[0].norm()).fold(0.0, f64::max);
        let amp = disks
            .iter()
            .map(|d| (d.embedding.spec().basepoint().x(1) - d.embedding.spec().b()[0]).norm())
            .fold(1.0, f64::max);
        let mut j = 1;
        let mut term = ratio;
        while j < 40 && amp * term * ratio.exp() / (j + 1) as f64 * ratio > 1e-14 {
            j += 1;
            term *= ratio / j as f64;
        }
        j
    };

    let fit = |vals: Vec<Complex64>| -> LaurentPoly {
        let hi = (k_samples / 2) as i32;
        let p = laurent_fit(&vals, 1.0, 1 - hi, hi);
        let cut = params.fit_tol * p.max_abs_coeff().max(1.0);
        p.prune(cut)
    };
    let xs: Vec<Vec<Complex64>> = disks.iter().map(|d| d.x_coefficients(1, order)).collect();
    let a_higher: Vec<LaurentPoly> = (0..order).map(|j| fit(xs.iter().map(|c| c[j]).collect())).collect();
    let b_higher = vec![fit(disks.iter().map(|d| Complex64::new(d.scale, 0.0)).collect())];
    let fam = BoundaryFamily::from_center(f, vec![a_higher], vec![b_higher])?;
    let sol = rh_approximate(f, &fam, &params.rh)?;
    let g = sol.g;

    let bound = (params.delta * params.delta + params.mu * params.mu).sqrt();
    let measured = us.iter().zip(&tv).map(|(&u, t)| gap(&g.eval(u), t)).fold(0.0, f64::max);
    if measured >= bound {
        return Err(Error::PushBoundViolated { measured, bound });
    }
    let dist_before = intrinsic_distance(f, 1.0, params.grid)?;
    let dist_after = intrinsic_distance(&g, 1.0, params.grid)?;
    let delta_gain = dist_after - dist_before;
    let report = PushReport {
        arcs: m,
        series_order: order,
        bound,
        measured,
        margin: bound - measured,
        dist_before,
        dist_after,
        delta_gain,
        ineffective: delta_gain <= 0.0,
        above_d: dist_before > params.d,
        residual: legendrian_residual(&g, 128),
        jittered_arcs: jittered,
        rh: sol.report,
    };
    Ok((g, report))
}

/// Targets `f(u_k) + offset` at `K` equispaced boundary samples.
pub fn offset_target(f: &CurveJet, offset: [Complex64; 3], k: usize) -> Vec<[Complex64; 3]> {
    (0..k)
        .map(|j| {
            let v = f.eval(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64));
            [v[0] + offset[0], v[1] + offset[1], v[2] + offset[2]]
        })
        .collect()
}
