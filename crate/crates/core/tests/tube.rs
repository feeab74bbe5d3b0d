use std::f64::consts::{PI, TAU};

use curvecauchy::curve::{lift_to_sphere, trace_boundary, Curve, DomainSpec, TraceOptions};
use curvecauchy::kernel::FunctionSpec;
use curvecauchy::pipeline::{integrate_at, RunOptions};
use curvecauchy::scenario::{reference_scenario, validate, Validated};
use curvecauchy::tube::{
    build_tube_grid, residue_line_check, residue_nodes, solve_tube_point, GridSize, TubeOptions, NORM_TOL, P_TOL,
    RHO_TOL,
};
use curvecauchy::{Triple, C64};

const R: f64 = 0.5;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Tube radius in `y` for `P = ζ2`: `|y|² = ε²(1 + r² + |y|²)`.
fn line_rho(eps: f64) -> f64 {
    (eps * eps * (1.0 + R * R) / (1.0 - eps * eps)).sqrt()
}

fn cross(a: &Triple<f64>, b: &Triple<f64>) -> Triple<f64> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn det3(a: &Triple<f64>, b: &Triple<f64>, d: &Triple<f64>) -> C64 {
    a[0] * (b[1] * d[2] - b[2] * d[1]) - b[0] * (a[1] * d[2] - a[2] * d[1]) + d[0] * (a[1] * b[2] - a[2] * b[1])
}

/// Brute-force `G_0` for `f = 1/ζ0` on the line scenario, using the closed
/// form tube, its exact Jacobian and a hand-written kernel with `Q = (0,0,1)`.
fn line_g0_oracle(eps: f64, size: GridSize, w_x: C64, base: Triple<f64>) -> C64 {
    let w = lift_to_sphere(w_x, c(0.0, 0.0)).lift;
    let barrier = cross(&w, &base);
    let rho = line_rho(eps);
    let n = (1.0 + R * R + rho * rho).sqrt();
    let mut sum = c(0.0, 0.0);
    for j in 0..size.n_t {
        let t = TAU * j as f64 / size.n_t as f64;
        for i in 0..size.n_theta {
            let th = TAU * i as f64 / size.n_theta as f64;
            for m in 0..size.n_phi {
                let ph = TAU * m as f64 / size.n_phi as f64;
                let s = C64::from_polar(1.0 / n, ph);
                let zeta = [s, s * C64::from_polar(R, t), s * C64::from_polar(rho, th)];
                let jac = c(0.0, -R * rho / n.powi(3)) * C64::from_polar(1.0, t + th + 3.0 * ph);
                let p = zeta[2];
                let f = barrier[0] * zeta[0] + barrier[1] * zeta[1] + barrier[2] * zeta[2];
                let b: C64 = (0..3).map(|k| zeta[k].conj() * (zeta[k] - w[k])).sum();
                let col_q = [c(0.0, 0.0), c(0.0, 0.0), 1.0 / p];
                let col_r = barrier.map(|v| v / f);
                let col_b = zeta.map(|v| v.conj() / b);
                sum += det3(&col_q, &col_r, &col_b) / zeta[0] * jac;
            }
        }
    }
    let weight = 2.0 * TAU.powi(3) / (size.n_t * size.n_theta * size.n_phi) as f64;
    sum * weight / c(0.0, 2.0 * PI).powu(3)
}

fn validated(name: &str) -> Validated {
    let s = reference_scenario(name).unwrap();
    let (report, v) = validate(&s, None);
    v.unwrap_or_else(|| panic!("{name} rejected: {:?}", report.failures()))
}

#[test]
fn line_tube_matches_closed_form() {
    let curve = Curve::line();
    let domain = DomainSpec::new(R);
    let opts = TubeOptions::default();
    for eps in [0.05, 0.0125] {
        let rho = line_rho(eps);
        let n = (1.0 + R * R + rho * rho).sqrt();
        for (t, th, ph) in [(0.0, 0.0, 0.0), (1.3, 2.1, 0.0), (4.0, 5.5, 0.7), (2.2, 0.4, 3.9)] {
            let pt = solve_tube_point(&curve, &domain, c(0.0, 0.0), t, th, ph, eps, &opts).unwrap();
            let y = C64::from_polar(rho, th);
            assert!(
                (pt.y - y).norm() < 1e-13 * (1.0 + rho),
                "y at ({t}, {th}): {} vs {y}",
                pt.y
            );
            let s = C64::from_polar(1.0 / n, ph);
            let zeta = [s, s * C64::from_polar(R, t), s * y];
            for (got, want) in pt.zeta.iter().zip(&zeta) {
                assert!((got - want).norm() < 1e-13);
            }
            let jac = c(0.0, -R * rho / n.powi(3)) * C64::from_polar(1.0, t + th + 3.0 * ph);
            assert!(
                (pt.jacobian - jac).norm() <= 1e-8 * jac.norm(),
                "J at ({t}, {th}, {ph}): {} vs {jac}",
                pt.jacobian
            );
            assert!(pt.jacobian_disagreement <= opts.fd_agreement);
        }
    }
}

#[test]
fn phi_shift_rotates_the_point_and_jacobian() {
    let curve = Curve::conic();
    let domain = DomainSpec::new(R);
    let opts = TubeOptions::default();
    let (t, th, eps) = (0.9, 2.6, 0.025);
    let seed = C64::from_polar(R, t).powu(2);
    let a = solve_tube_point(&curve, &domain, seed, t, th, 0.0, eps, &opts).unwrap();
    let ph = 1.7;
    let b = solve_tube_point(&curve, &domain, seed, t, th, ph, eps, &opts).unwrap();
    let e = C64::from_polar(1.0, ph);
    for k in 0..3 {
        assert!((b.zeta[k] - e * a.zeta[k]).norm() < 1e-14);
    }
    assert!((b.jacobian - e.powu(3) * a.jacobian).norm() <= 1e-12 * a.jacobian.norm());
    let norm: f64 = b.zeta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-14);
    assert!((curve.eval(&b.zeta).norm() - eps).abs() < 1e-12);
}

#[test]
fn tube_grids_hold_their_invariants() {
    for curve in [Curve::conic(), Curve::fermat_cubic()] {
        let domain = DomainSpec::new(R);
        let size = GridSize::new(32, 8, 8);
        let branches = trace_boundary(&curve, &domain, size.n_t, &TraceOptions::default()).unwrap();
        for eps in [0.05, 0.0125] {
            let grid = build_tube_grid(&curve, &domain, &branches, eps, size, &TubeOptions::default()).unwrap();
            assert_eq!(grid.nodes.len(), branches.len() * size.n_t * size.n_theta);
            assert!(grid.max_p_residual <= P_TOL);
            assert!(grid.max_rho_residual <= RHO_TOL);
            assert!(grid.max_norm_residual <= NORM_TOL);
            assert!(grid.max_jacobian_disagreement <= 1e-6);
            for node in &grid.nodes {
                assert!(node.u[0].im.abs() < 1e-15 && node.u[0].re > 0.0);
                let x = node.u[1] / node.u[0];
                assert!((x - C64::from_polar(R, grid.t(node.t_index))).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn line_quadrature_matches_brute_force_oracle() {
    let v = validated("line-inv-z0");
    let size = GridSize::new(16, 8, 8);
    let opts = RunOptions {
        grid: Some(size),
        ..RunOptions::default()
    };
    for eps in [0.05, 0.025] {
        let got = integrate_at(&v, eps, size, &opts).unwrap().g(0);
        let want = line_g0_oracle(eps, size, c(0.1, 0.05), [c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)]);
        assert!(want.norm() > 1e-3, "oracle value {want} too small to compare");
        assert!(
            (got - want).norm() <= 1e-8 * want.norm(),
            "G_0 at ε={eps}: {got} vs {want}"
        );
    }
}

#[test]
fn line_g0_vanishes_as_phi_resolution_grows() {
    let mut last = f64::INFINITY;
    for n_phi in [8, 16, 32, 64] {
        let g = line_g0_oracle(
            0.05,
            GridSize::new(32, 8, n_phi),
            c(0.1, 0.05),
            [c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)],
        );
        assert!(g.norm() < last, "|G_0| did not decrease at N_φ = {n_phi}");
        last = g.norm();
    }
    assert!(last < 1e-2, "|G_0| = {last} at N_φ = 64");
}

#[test]
fn integration_is_bit_reproducible() {
    let v = validated("fermat-z1-over-z0sq");
    let size = GridSize::new(32, 8, 16);
    let opts = RunOptions {
        grid: Some(size),
        ..RunOptions::default()
    };
    let a = integrate_at(&v, 0.05, size, &opts).unwrap();
    let b = integrate_at(&v, 0.05, size, &opts).unwrap();
    for (ra, rb) in a.values.iter().zip(&b.values) {
        for (x, y) in ra.iter().zip(rb) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}

#[test]
fn orientation_flips_the_sign() {
    let v = validated("conic-inv-z0");
    let size = GridSize::new(16, 8, 8);
    let plus = RunOptions {
        grid: Some(size),
        ..RunOptions::default()
    };
    let minus = RunOptions {
        orientation: Some(-1.0),
        ..plus.clone()
    };
    let a = integrate_at(&v, 0.05, size, &plus).unwrap();
    let b = integrate_at(&v, 0.05, size, &minus).unwrap();
    for k in 0..a.g_all().len() {
        assert_eq!(a.g(k), -b.g(k));
    }
}

#[test]
fn residue_contour_examples() {
    let pt = lift_to_sphere(c(0.2, -0.1), c(0.0, 0.0)).lift;
    // f = 1/ζ0 has homogeneity -1, so the contour integral is zero.
    assert!(residue_line_check(&FunctionSpec::inv_z0(), &pt, 0.1).norm() < 1e-12);
    assert_eq!(residue_nodes(0.1), 400);
    assert_eq!(residue_nodes(0.49), 82);
}

#[test]
#[should_panic]
fn residue_radius_must_be_below_one_half() {
    let pt = lift_to_sphere(c(0.0, 0.0), c(0.0, 0.0)).lift;
    residue_line_check(&FunctionSpec::inv_z0(), &pt, 0.5);
}
