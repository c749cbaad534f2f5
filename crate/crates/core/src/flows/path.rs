//! Approximation of arbitrary sampled paths by Legendrian ones.
//!
//! The output is a polygon `lambda` whose z column is the running trapezoid
//! sum `z_(k+1) = z_k - sum_j xbar_j (y_j(k+1) - y_j(k))`, with `xbar` the
//! segment mean. Each piece of a subdivision starts on `gamma` and is steered
//! back onto `gamma`'s z at its end by a bump `w sin^2(pi s) e^(-i(2 pi k s + phi))`
//! added to x1, with a matching loop of turn number k grafted into y1 when
//! the bump alone would need too large an amplitude.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};

use crate::contact::{eta_at, x_slot, y_slot, z_slot};
use crate::error::{Error, Result};
use crate::geometry::TAU_EMBED;
use crate::random::Rng;

pub const MIN_INTERVALS: usize = 8;
pub const MAX_DEPTH: u32 = 10;
pub const MAX_ATTEMPTS: usize = 8;
const BASE_SAMPLES: usize = 16;
const SAMPLES_PER_TURN: usize = 8;
const MAX_TURNS: usize = 1 << 14;
const SKIP_TOL: f64 = 1e-13;
const KERNEL_TOL: f64 = 1e-6;
const CHECK_POINTS: usize = 2048;
// a loop correction moves z along the normalized sin^4 profile, which leaves
// the chord by 0.19 of the mismatch mid-piece
const PROFILE_EXCURSION: f64 = 0.19;

#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    t: Vec<f64>,
    points: Vec<Vec<Complex64>>,
    end_derivatives: Option<[Vec<Complex64>; 2]>,
}

impl SampledPath {
    pub fn new(t: Vec<f64>, points: Vec<Vec<Complex64>>, end_derivatives: Option<[Vec<Complex64>; 2]>) -> Result<Self> {
        if t.len() != points.len() {
            return Err(Error::DimensionMismatch { expected: t.len(), found: points.len() });
        }
        if t.len() < MIN_INTERVALS + 1 {
            return Err(Error::InvalidArgument(format!(
                "a sampled path needs at least {} samples, got {}",
                MIN_INTERVALS + 1,
                t.len()
            )));
        }
        if t[0] != 0.0 || *t.last().unwrap() != 1.0 || t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("parameters must increase strictly from 0 to 1".into()));
        }
        let dim = points[0].len();
        if dim < 3 || dim % 2 == 0 {
            return Err(Error::InvalidArgument(format!("point dimension {dim} is not 2n+1")));
        }
        let finite = |v: &Vec<Complex64>| v.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        for p in points.iter().chain(end_derivatives.iter().flatten()) {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if !finite(p) {
                return Err(Error::InvalidArgument("non-finite path sample".into()));
            }
        }
        Ok(Self { t, points, end_derivatives })
    }

    /// Samples `f` at `m + 1` equispaced parameters.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> Vec<Complex64>) -> Result<Self> {
        let t: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
        let points = t.iter().map(|&s| f(s)).collect();
        Self::new(t, points, None)
    }

    pub fn with_end_derivatives(mut self, d0: Vec<Complex64>, d1: Vec<Complex64>) -> Result<Self> {
        self.end_derivatives = Some([d0, d1]);
        Self::new(self.t, self.points, self.end_derivatives)
    }

    pub fn n(&self) -> usize {
        (self.points[0].len() - 1) / 2
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn end_derivatives(&self) -> Option<&[Vec<Complex64>; 2]> {
        self.end_derivatives.as_ref()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn segment(&self, t: f64) -> usize {
        self.t.partition_point(|&s| s <= t).clamp(1, self.t.len() - 1) - 1
    }

    /// Piecewise-linear interpolation.
    pub fn interpolate(&self, t: f64) -> Vec<Complex64> {
        let i = self.segment(t);
        let s = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.points[i].iter().zip(&self.points[i + 1]).map(|(a, b)| a + (b - a) * s).collect()
    }

    /// Finite-difference derivative at every sample: five-point central in
    /// the interior, three-point central next to the ends, three-point
    /// one-sided at the ends.
    pub fn derivatives(&self) -> Vec<Vec<Complex64>> {
        let m = self.t.len() - 1;
        (0..=m)
            .map(|i| {
                let idx: Vec<usize> = match i {
                    0 => vec![0, 1, 2],
                    _ if i == m => vec![m - 2, m - 1, m],
                    1 => vec![0, 1, 2],
                    _ if i == m - 1 => vec![m - 2, m - 1, m],
                    _ => (i - 2..=i + 2).collect(),
                };
                self.combine(i, &idx)
            })
            .collect()
    }

    fn combine(&self, i: usize, idx: &[usize]) -> Vec<Complex64> {
        let xs: Vec<f64> = idx.iter().map(|&k| self.t[k]).collect();
        let w = first_derivative_weights(self.t[i], &xs);
        (0..self.points[0].len()).map(|c| idx.iter().zip(&w).map(|(&k, &wk)| self.points[k][c] * wk).sum()).collect()
    }

    /// Legendrian defect `|z' + sum x_j y_j'|` of the finite-difference
    /// derivative, maximized over interior samples.
    pub fn legendrian_defect(&self) -> f64 {
        let d = self.derivatives();
        (1..self.t.len() - 1).map(|i| eta_at(&self.points[i], &d[i]).norm()).fold(0.0, f64::max)
    }
}

/// Fornberg weights for the first derivative at `x0` from nodes `xs`.
pub fn first_derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathReport {
    pub pieces: usize,
    pub attempts: usize,
    /// largest turn number of a grafted loop, 0 when none was needed
    pub max_turns: usize,
    /// sup of the (x, y) deviation from the polygon through gamma
    pub xy_deviation: f64,
    /// sup of the full deviation from the polygon through gamma
    pub deviation: f64,
    /// max over segments of `|dz + sum xbar_j dy_j| / dt`
    pub residual: f64,
    pub min_gap: f64,
    pub injective: bool,
    pub input_defect: f64,
}

struct Base<'a> {
    gamma: &'a SampledPath,
    // coefficients c of p + d (t - t_end) + c (t - t_end)^2 on the end segments
    quad: Option<[(Vec<Complex64>, Vec<Complex64>); 2]>,
}

impl Base<'_> {
    fn eval(&self, t: f64) -> Vec<Complex64> {
        let g = self.gamma;
        let m = g.t.len() - 1;
        if let Some(q) = &self.quad {
            let seg = g.segment(t);
            let end = match seg {
                0 => Some((0, 0)),
                _ if seg == m - 1 => Some((1, m)),
                _ => None,
            };
            if let Some((side, k)) = end {
                let (d, c) = &q[side];
                let s = t - g.t[k];
                return g.points[k].iter().zip(d).zip(c).map(|((p, d), c)| p + d * s + c * s * s).collect();
            }
        }
        g.interpolate(t)
    }
}

struct Budget {
    amp_loop: f64,
    amp_bump: f64,
}

struct Piece {
    t: Vec<f64>,
    points: Vec<Vec<Complex64>>,
    turns: usize,
}

fn breakpoints(gamma: &SampledPath, ta: f64, tb: f64, uniform: usize) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=uniform).map(|k| ta + (tb - ta) * k as f64 / uniform as f64).collect();
    t.extend(gamma.t.iter().copied().filter(|&s| s > ta && s < tb));
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    t[0] = ta;
    *t.last_mut().unwrap() = tb;
    t
}

fn fill_z(points: &mut [Vec<Complex64>], n: usize, z0: Complex64) {
    points[0][z_slot(n)] = z0;
    for i in 1..points.len() {
        let mut z = points[i - 1][z_slot(n)];
        for j in 1..=n {
            let xbar = (points[i - 1][x_slot(j)] + points[i][x_slot(j)]) * 0.5;
            z -= xbar * (points[i][y_slot(j)] - points[i - 1][y_slot(j)]);
        }
        points[i][z_slot(n)] = z;
    }
}

/// Builds one piece with `turns` loop turns (0 means plain bump), returning
/// `None` when the bump amplitude exceeds the budget.
fn try_piece(base: &Base, ta: f64, tb: f64, turns: usize, phase: f64, budget: &Budget, scale: f64) -> Option<Piece> {
    let n = base.gamma.n();
    let uniform = BASE_SAMPLES + SAMPLES_PER_TURN * turns;
    let t = breakpoints(base.gamma, ta, tb, uniform);
    let z_a = base.gamma.interpolate(ta)[z_slot(n)];
    let z_b = base.gamma.interpolate(tb)[z_slot(n)];
    let s: Vec<f64> = t.iter().map(|&ti| ((ti - ta) / (tb - ta)).clamp(0.0, 1.0)).collect();
    let mut points: Vec<Vec<Complex64>> = t.iter().map(|&ti| base.eval(ti)).collect();
    let angle = |si: f64| 2.0 * PI * turns as f64 * si + phase;
    if turns > 0 {
        for (p, &si) in points.iter_mut().zip(&s) {
            p[y_slot(1)] += Complex64::from_polar(budget.amp_loop * (PI * si).sin().powi(2), angle(si));
        }
    }
    fill_z(&mut points, n, z_a);
    let mismatch = z_b - points.last().unwrap()[z_slot(n)];
    if mismatch.norm() <= SKIP_TOL * scale {
        let last = points.len() - 1;
        points[last][z_slot(n)] = z_b;
        return Some(Piece { t, points, turns });
    }
    let bump: Vec<Complex64> = s.iter().map(|&si| Complex64::from_polar((PI * si).sin().powi(2), -angle(si))).collect();
    let gain: Complex64 = (1..points.len())
        .map(|i| (bump[i - 1] + bump[i]) * 0.5 * (points[i][y_slot(1)] - points[i - 1][y_slot(1)]))
        .sum();
    // z_end(w) = z_end(0) - w gain
    let w = -mismatch / gain;
    if !(w.norm() <= budget.amp_bump) {
        return None;
    }
    for (p, b) in points.iter_mut().zip(&bump) {
        p[x_slot(1)] += w * b;
    }
    fill_z(&mut points, n, z_a);
    let last = points.len() - 1;
    points[last][z_slot(n)] = z_b;
    Some(Piece { t, points, turns })
}

/// `|z_target(tb) - z(tb)|` for the uncorrected lift of the base curve.
fn base_mismatch(base: &Base, ta: f64, tb: f64) -> f64 {
    let n = base.gamma.n();
    let t = breakpoints(base.gamma, ta, tb, BASE_SAMPLES);
    let mut points: Vec<Vec<Complex64>> = t.iter().map(|&ti| base.eval(ti)).collect();
    fill_z(&mut points, n, base.gamma.interpolate(ta)[z_slot(n)]);
    (base.gamma.interpolate(tb)[z_slot(n)] - points.last().unwrap()[z_slot(n)]).norm()
}

fn build_piece(base: &Base, ta: f64, tb: f64, phase: f64, budget: &Budget, scale: f64) -> Option<Piece> {
    if let Some(p) = try_piece(base, ta, tb, 0, phase, budget, scale) {
        return Some(p);
    }
    let mismatch = base_mismatch(base, ta, tb);
    // a loop of k turns gains about amp_loop 2 pi k 3/8
    let guess = mismatch / (budget.amp_bump * budget.amp_loop * 0.75 * PI);
    let mut turns = (guess.ceil() as usize).max(1);
    while turns <= MAX_TURNS {
        if let Some(p) = try_piece(base, ta, tb, turns, phase, budget, scale) {
            return Some(p);
        }
        turns = turns * 3 / 2 + 1;
    }
    None
}

fn deviations(gamma: &SampledPath, piece: &Piece) -> (f64, f64) {
    let n = gamma.n();
    let mut xy = 0.0f64;
    let mut full = 0.0f64;
    for (ti, p) in piece.t.iter().zip(&piece.points) {
        let g = gamma.interpolate(*ti);
        let d2: Vec<f64> = p.iter().zip(&g).map(|(a, b)| (a - b).norm_sqr()).collect();
        let total: f64 = d2.iter().sum();
        xy = xy.max((total - d2[z_slot(n)]).sqrt());
        full = full.max(total.sqrt());
    }
    (xy, full)
}

struct Build {
    pieces: Vec<Piece>,
}

fn subdivide(
    base: &Base,
    ta: f64,
    tb: f64,
    depth: u32,
    eps: f64,
    budget: &Budget,
    scale: f64,
    rng: &mut Rng,
    out: &mut Build,
) -> Result<()> {
    let phase = rng.gen_range(0.0..2.0 * PI);
    let hopeless = depth < MAX_DEPTH && PROFILE_EXCURSION * base_mismatch(base, ta, tb) > eps;
    if hopeless {
        let mid = 0.5 * (ta + tb);
        subdivide(base, ta, mid, depth + 1, eps, budget, scale, rng, out)?;
        return subdivide(base, mid, tb, depth + 1, eps, budget, scale, rng, out);
    }
    if let Some(p) = build_piece(base, ta, tb, phase, budget, scale) {
        let (xy, full) = deviations(base.gamma, &p);
        if full <= eps && xy <= eps / 2.0 {
            out.pieces.push(p);
            return Ok(());
        }
    }
    if depth >= MAX_DEPTH {
        return Err(Error::ToleranceUnreachable { pieces: 1 << MAX_DEPTH });
    }
    let mid = 0.5 * (ta + tb);
    subdivide(base, ta, mid, depth + 1, eps, budget, scale, rng, out)?;
    subdivide(base, mid, tb, depth + 1, eps, budget, scale, rng, out)
}

fn end_derivative_estimates(gamma: &SampledPath) -> ([Vec<Complex64>; 2], [f64; 2]) {
    if let Some(d) = &gamma.end_derivatives {
        return (d.clone(), [0.0; 2]);
    }
    let m = gamma.t.len() - 1;
    let second = [gamma.combine(0, &[0, 1, 2]), gamma.combine(m, &[m - 2, m - 1, m])];
    let third = [gamma.combine(0, &[0, 1, 2, 3]), gamma.combine(m, &[m - 3, m - 2, m - 1, m])];
    let err = [0, 1].map(|k| second[k].iter().zip(&third[k]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    (second, err)
}

fn euclid(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn min_gap(path: &[Vec<Complex64>]) -> f64 {
    let stride = path.len().div_ceil(CHECK_POINTS).max(1);
    let pts: Vec<&Vec<Complex64>> = path.iter().step_by(stride).collect();
    let mut gap = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 2..pts.len() {
            let d = pts[i].iter().zip(pts[j]).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            gap = gap.min(d);
        }
    }
    gap
}

/// Approximates `gamma` by a Legendrian polygon within `eps`.
///
/// With `match_end_derivatives` the end segments of the base curve are
/// quadratics tangent to gamma's end derivatives, which then must lie in the
/// contact kernel. Phases of the corrections are drawn from `seed`; when the
/// result fails the embedding check the construction is redrawn, up to
/// `MAX_ATTEMPTS` times.
pub fn legendrian_path_approx(
    gamma: &SampledPath,
    eps: f64,
    match_end_derivatives: bool,
    seed: u64,
) -> Result<(SampledPath, PathReport)> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let n = gamma.n();
    let m = gamma.t.len() - 1;
    let scale = 1.0 + gamma.points.iter().map(|p| euclid(p)).fold(0.0, f64::max);
    let (ends, fd_err) = end_derivative_estimates(gamma);

    let mut quad = None;
    let mut quad_dev = 0.0f64;
    if match_end_derivatives {
        for (k, (i, t)) in [(0usize, 0.0), (m, 1.0)].into_iter().enumerate() {
            let p = &gamma.points[i];
            let tol = KERNEL_TOL * (1.0 + euclid(&ends[k])) * scale + 10.0 * fd_err[k] * scale;
            if eta_at(p, &ends[k]).norm() > tol {
                return Err(Error::DerivativeNotLegendrianAtEndpoint { t });
            }
        }
        let h0 = gamma.t[1];
        let h1 = 1.0 - gamma.t[m - 1];
        let c0: Vec<Complex64> =
            (0..=2 * n).map(|c| (gamma.points[1][c] - gamma.points[0][c] - ends[0][c] * h0) / (h0 * h0)).collect();
        let c1: Vec<Complex64> =
            (0..=2 * n).map(|c| (gamma.points[m - 1][c] - gamma.points[m][c] + ends[1][c] * h1) / (h1 * h1)).collect();
        // the quadratic leaves the chord by at most |c| h^2 / 4
        let xy = |c: &[Complex64]| (0..2 * n).map(|k| c[k].norm_sqr()).sum::<f64>().sqrt();
        quad_dev = (xy(&c0) * h0 * h0).max(xy(&c1) * h1 * h1) / 4.0;
        quad = Some([(ends[0].clone(), c0), (ends[1].clone(), c1)]);
    }
    let room = 0.999 * (eps / 2.0 - quad_dev);
    if room <= 0.0 {
        return Err(Error::ToleranceUnreachable { pieces: 1 });
    }
    let budget = Budget { amp_loop: room / 2.0, amp_bump: room * 3f64.sqrt() / 2.0 };
    let base = Base { gamma, quad };

    let mut best = None;
    for attempt in 1..=MAX_ATTEMPTS {
        let mut rng = Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let mut build = Build { pieces: Vec::new() };
        subdivide(&base, 0.0, 1.0, 0, eps, &budget, scale, &mut rng, &mut build)?;
        let (path, report) = assemble(gamma, &base, &build, scale, attempt, match_end_derivatives)?;
        let done = report.injective;
        best = Some((path, report));
        if done {
            break;
        }
    }
    Ok(best.expect("at least one attempt"))
}

fn assemble(
    gamma: &SampledPath,
    base: &Base,
    build: &Build,
    scale: f64,
    attempts: usize,
    match_ends: bool,
) -> Result<(SampledPath, PathReport)> {
    let n = gamma.n();
    let mut t = Vec::new();
    let mut points = Vec::new();
    let mut xy_dev = 0.0f64;
    let mut dev = 0.0f64;
    for piece in &build.pieces {
        let skip = usize::from(!t.is_empty());
        t.extend_from_slice(&piece.t[skip..]);
        points.extend(piece.points[skip..].iter().cloned());
        let (a, b) = deviations(gamma, piece);
        xy_dev = xy_dev.max(a);
        dev = dev.max(b);
    }
    let last = points.len() - 1;
    points[0] = gamma.points[0].clone();
    points[last] = gamma.points.last().unwrap().clone();
    t[0] = 0.0;
    t[last] = 1.0;

    let residual = (1..points.len())
        .map(|i| {
            let mut r = points[i][z_slot(n)] - points[i - 1][z_slot(n)];
            for j in 1..=n {
                r += (points[i - 1][x_slot(j)] + points[i][x_slot(j)])
                    * 0.5
                    * (points[i][y_slot(j)] - points[i - 1][y_slot(j)]);
            }
            r.norm() / (t[i] - t[i - 1])
        })
        .fold(0.0, f64::max);

    // analytic end derivatives: bumps and loops are flat to first order at
    // piece ends, so only the base curve contributes
    let tangent = |k: usize| -> Vec<Complex64> {
        let mut d = match (&base.quad, k) {
            (Some(q), _) => q[k].0.clone(),
            (None, 0) => {
                let h = gamma.t[1];
                gamma.points[1].iter().zip(&gamma.points[0]).map(|(a, b)| (a - b) / h).collect()
            }
            (None, _) => {
                let m = gamma.t.len() - 1;
                let h = 1.0 - gamma.t[m - 1];
                gamma.points[m].iter().zip(&gamma.points[m - 1]).map(|(a, b)| (a - b) / h).collect()
            }
        };
        let p = if k == 0 { &points[0] } else { &points[last] };
        d[z_slot(n)] = -(1..=n).map(|j| p[x_slot(j)] * d[y_slot(j)]).sum::<Complex64>();
        d
    };
    let end_derivatives = Some([tangent(0), tangent(1)]);
    let _ = match_ends;

    let gap = min_gap(&points);
    let report = PathReport {
        pieces: build.pieces.len(),
        attempts,
        max_turns: build.pieces.iter().map(|p| p.turns).max().unwrap_or(0),
        xy_deviation: xy_dev,
        deviation: dev,
        residual,
        min_gap: gap,
        injective: gap > TAU_EMBED * scale,
        input_defect: gamma.legendrian_defect(),
    };
    Ok((SampledPath::new(t, points, end_derivatives)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_point, Rng};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn running_trapezoid(path: &SampledPath) -> f64 {
        let n = path.n();
        let p = path.points();
        let mut z = p[0][z_slot(n)];
        let mut worst = 0.0f64;
        for i in 1..p.len() {
            for j in 1..=n {
                z -= (p[i - 1][x_slot(j)] + p[i][x_slot(j)]) * 0.5 * (p[i][y_slot(j)] - p[i - 1][y_slot(j)]);
            }
            worst = worst.max((z - p[i][z_slot(n)]).norm());
        }
        worst
    }

    #[test]
    fn fornberg_matches_textbook_stencils() {
        let w = first_derivative_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        assert!(w.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-14));
        let w = first_derivative_weights(0.0, &[0.0, 0.5, 1.0]);
        let expect = [-3.0, 4.0, -1.0];
        assert!(w.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn sampled_derivatives_are_high_order() {
        let path = SampledPath::from_fn(64, |t| vec![c(t.sin(), 0.0), c(t * t, t), c(t.exp(), 0.0)]).unwrap();
        let d = path.derivatives();
        for (i, &t) in path.t().iter().enumerate() {
            let exact = [c(t.cos(), 0.0), c(2.0 * t, 1.0), c(t.exp(), 0.0)];
            let tol = if i < 2 || i + 2 >= path.len() { 1e-3 } else { 1e-7 };
            assert!(d[i].iter().zip(exact).all(|(a, b)| (a - b).norm() < tol), "{i}");
        }
    }

    #[test]
    fn x_axis_segment_is_kept() {
        let gamma = SampledPath::from_fn(8, |t| vec![c(t, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let (lambda, rep) = legendrian_path_approx(&gamma, 0.1, false, 0).unwrap();
        assert_eq!(rep.pieces, 1);
        for (t, p) in lambda.t().iter().zip(lambda.points()) {
            assert_eq!(p, &gamma.interpolate(*t));
        }
    }

    #[test]
    fn legendrian_polygon_is_reproduced() {
        // z = -int x dy is exact for linear pieces
        let xy = |t: f64| (c(1.0 + t, 0.5 * t), c(2.0 * t, -t));
        let gamma = SampledPath::from_fn(16, |t| {
            let (x, y) = xy(t);
            let z = c(0.3, 0.0) - (c(1.0, 0.0) * t + c(1.0, 0.5) * t * t / 2.0) * c(2.0, -1.0);
            vec![x, y, z]
        })
        .unwrap();
        let (lambda, rep) = legendrian_path_approx(&gamma, 0.05, false, 0).unwrap();
        assert_eq!(rep.max_turns, 0);
        assert!(rep.deviation < 1e-10, "{rep:?}");
        for (t, p) in lambda.t().iter().zip(lambda.points()) {
            let g = gamma.interpolate(*t);
            assert!(p.iter().zip(&g).all(|(a, b)| (a - b).norm() < 1e-10));
        }
    }

    #[test]
    fn reeb_segment() {
        let gamma = SampledPath::from_fn(8, |t| vec![c(0.0, 0.0), c(0.0, 0.0), c(t, 0.0)]).unwrap();
        let (lambda, rep) = legendrian_path_approx(&gamma, 0.1, false, 0).unwrap();
        assert!(rep.max_turns > 0);
        assert!(rep.deviation <= 0.1 && rep.xy_deviation <= 0.05, "{rep:?}");
        assert!(rep.residual <= 1e-8, "{rep:?}");
        assert!(rep.injective);
        let last = lambda.points().last().unwrap();
        assert_eq!(last[2], c(1.0, 0.0));
        assert_eq!(&lambda.points()[0], &gamma.points()[0]);
        assert!(running_trapezoid(&lambda) < 1e-12);
    }

    #[test]
    fn end_derivatives_match() {
        // x = t, y = t^2 + t, z = -t^2/2 - 2t^3/3 is Legendrian; add a
        // non-Legendrian bulge in z that vanishes to second order at the ends
        let gamma = SampledPath::from_fn(32, |t| {
            let z = -t * t / 2.0 - 2.0 * t.powi(3) / 3.0 + 0.3 * (t * (1.0 - t)).powi(2);
            vec![c(t, 0.0), c(t * t + t, 0.0), c(z, 0.0)]
        })
        .unwrap();
        let d0 = vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let d1 = vec![c(1.0, 0.0), c(3.0, 0.0), c(-3.0, 0.0)];
        let gamma = gamma.with_end_derivatives(d0.clone(), d1.clone()).unwrap();
        let (lambda, rep) = legendrian_path_approx(&gamma, 0.05, true, 0).unwrap();
        assert!(rep.deviation <= 0.05 && rep.residual <= 1e-8 * 4.0, "{rep:?}");
        let [e0, e1] = lambda.end_derivatives().unwrap();
        assert!(e0.iter().zip(&d0).all(|(a, b)| (a - b).norm() < 1e-6), "{e0:?}");
        assert!(e1.iter().zip(&d1).all(|(a, b)| (a - b).norm() < 1e-6), "{e1:?}");

        let bad = gamma.with_end_derivatives(vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)], d1).unwrap();
        assert_eq!(
            legendrian_path_approx(&bad, 0.05, true, 0).unwrap_err(),
            Error::DerivativeNotLegendrianAtEndpoint { t: 0.0 }
        );
    }

    fn random_polygon(seed: u64, n: usize, m: usize) -> SampledPath {
        let mut rng = Rng::seed_from_u64(seed);
        let pts: Vec<Vec<Complex64>> = (0..=m).map(|_| random_point(&mut rng, n, 1.0).into_coords()).collect();
        let t = (0..=m).map(|k| k as f64 / m as f64).collect();
        SampledPath::new(t, pts, None).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn random_polygons(seed in any::<u64>(), n in 1usize..=2, eps in 0.05f64..0.3) {
            let gamma = random_polygon(seed, n, 8);
            let (lambda, rep) = legendrian_path_approx(&gamma, eps, false, seed).unwrap();
            let scale = 1.0 + gamma.points().iter().map(|p| euclid(p)).fold(0.0, f64::max);
            prop_assert!(rep.deviation <= eps && rep.xy_deviation <= eps / 2.0, "{:?}", rep);
            prop_assert!(rep.residual <= 1e-8 * scale, "{:?}", rep);
            prop_assert!(running_trapezoid(&lambda) <= 1e-12 * scale * rep.pieces as f64);
            prop_assert_eq!(&lambda.points()[0], &gamma.points()[0]);
            prop_assert_eq!(lambda.points().last(), gamma.points().last());
        }
    }

    #[test]
    fn validation() {
        assert!(SampledPath::from_fn(7, |t| vec![c(t, 0.0); 3]).is_err());
        assert!(SampledPath::from_fn(8, |t| vec![c(t, 0.0); 4]).is_err());
        assert!(SampledPath::from_fn(8, |_| vec![c(f64::NAN, 0.0); 3]).is_err());
        let gamma = SampledPath::from_fn(8, |t| vec![c(t, 0.0); 3]).unwrap();
        assert!(legendrian_path_approx(&gamma, 0.0, false, 0).is_err());
    }
}
