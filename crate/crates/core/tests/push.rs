use legendrian_core::contact::{legendrize, CurveJet, Domain};
use legendrian_core::geometry::{boundary_push, offset_target, PushParams};
use legendrian_core::{Complex64, LaurentPoly};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn half_diagonal() -> CurveJet {
    let h = LaurentPoly::monomial(1, c(0.5, 0.0));
    legendrize(&CurveJet::new(1, vec![h.clone(), h, LaurentPoly::zero()], Domain::unit_disk()).unwrap()).unwrap()
}

#[test]
fn reference_push_satisfies_the_boundary_bound() {
    let f = half_diagonal();
    let target = offset_target(&f, [c(0.05, 0.0), c(0.0, 0.0), c(0.05, 0.0)], 512);
    let t = std::time::Instant::now();
    let (g, rep) = boundary_push(&f, &target, &PushParams::default()).unwrap();
    println!("{rep:#?} in {:?}", t.elapsed());
    assert!(rep.measured < (0.12f64.powi(2) + 0.25).sqrt());
    assert!(rep.residual <= 1e-10 * (1.0 + g.l1_norm()));
}

#[test]
fn push_with_rotating_normal() {
    use legendrian_core::geometry::MetricGrid;
    use std::f64::consts::PI;
    let f = half_diagonal();
    let k = 256;
    let target: Vec<[Complex64; 3]> = (0..k)
        .map(|j| {
            let u = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64);
            let v = legendrian_core::HolomorphicCurve::eval(&f, u);
            [v[0] + 0.05, v[1] + 0.02 * u.conj(), v[2] + 0.05 + 0.02 * u]
        })
        .collect();
    let params = PushParams { mu: 0.3, grid: MetricGrid { n_r: 32, n_theta: 128 }, ..PushParams::default() };
    let t = std::time::Instant::now();
    let (g, rep) = boundary_push(&f, &target, &params).unwrap();
    println!(
        "arcs {} N {} measured {} bound {} gain {} in {:?}",
        rep.arcs,
        rep.rh.n,
        rep.measured,
        rep.bound,
        rep.delta_gain,
        t.elapsed()
    );
    assert!(rep.measured < rep.bound);
    assert!(rep.residual <= 1e-10 * (1.0 + g.l1_norm()));
}
