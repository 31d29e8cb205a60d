//! Regression suite for the catalog charts: every entry's expected values
//! are recomputed on a fixed grid and compared against the engine.

use nalgebra::DVector;

use slantgeom::audit::{analyze_chart, audit_chart};
use slantgeom::catalog;
use slantgeom::expr::Expr;
use slantgeom::immersion::ImmersionChart;
use slantgeom::slant::analyze_point;
use slantgeom::warped::{recover_warping, triviality_check};
use slantgeom::{GeomError, Tolerances};

#[test]
fn r14_metric_matches_the_closed_form() {
    let entry = catalog::r14_example();
    let names = entry.chart.param_names();
    let expected = entry.expected.metric_diag.as_ref().unwrap();
    for p in entry.grid(3).points() {
        let geom = entry.chart.point_geometry(&p).unwrap();
        for i in 0..5 {
            let want = expected[i].eval(&names, &p).unwrap();
            assert!(
                (geom.metric.get(i, i) - want).abs() <= 1e-9,
                "diag {i} at {p:?}: {} vs {want}",
                geom.metric.get(i, i)
            );
            for j in 0..5 {
                if i != j {
                    assert!(
                        geom.metric.get(i, j).abs() <= 1e-9,
                        "cross ({i},{j}) at {p:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn r14_frame_is_holomorphic_under_the_pairing() {
    // J applied to the first coordinate field gives the second one
    let entry = catalog::r14_example();
    for p in entry.grid(3).points() {
        let geom = entry.chart.point_geometry(&p).unwrap();
        let ju = entry.chart.ambient.apply_j(&geom.coord_frame[0]).unwrap();
        assert!((ju - &geom.coord_frame[1]).amax() <= 1e-14);
    }
}

#[test]
fn r14_slant_function_and_dims() {
    let entry = catalog::r14_example();
    let names = entry.chart.param_names();
    let cos_theta = entry.expected.cos_theta.as_ref().unwrap();
    let tols = Tolerances::default();
    for p in entry.grid(3).points() {
        let geom = entry.chart.point_geometry(&p).unwrap();
        let split = analyze_point(&geom, &entry.chart.ambient, &tols).unwrap();
        assert_eq!(split.dims, (2, 1, 2));
        assert_eq!(split.invariant_normal_dim, 6);
        assert!(split.proper);
        let want = cos_theta.eval(&names, &p).unwrap();
        let got = split.theta.unwrap().cos();
        assert!(
            (got - want).abs() <= 1e-8,
            "cos(theta) at {p:?}: {got} vs {want}"
        );
    }
}

#[test]
fn r14_slant_ratio_on_the_slant_block() {
    // ||TZ|| / ||Z|| equals the slant cosine for the z coordinate field
    let entry = catalog::r14_example();
    for p in entry.grid(3).points() {
        let geom = entry.chart.point_geometry(&p).unwrap();
        let z = &geom.coord_frame[3];
        let jz = entry.chart.ambient.apply_j(z).unwrap();
        let tz = geom.project_tangent(&jz);
        let want = 1.0 / (1.0 + p[0] * p[0] + p[1] * p[1]);
        assert!((tz.norm() / z.norm() - want).abs() <= 1e-10);
    }
}

#[test]
fn r14_spectrum_at_unit_base_point() {
    // at u = v = 1 the spectrum of -T^2 is {1, 1, 1/9, 1/9, 0}
    let entry = catalog::r14_example();
    let p = [1.0, 1.0, 0.7, 0.9, 1.1];
    let geom = entry.chart.point_geometry(&p).unwrap();
    let op = slantgeom::slant::tangential_operator(&geom, &entry.chart.ambient).unwrap();
    let spectrum = slantgeom::slant::slant_spectrum(&op, &Tolerances::default()).unwrap();
    let described: Vec<(f64, usize)> = spectrum
        .iter()
        .map(|c| (c.value, c.multiplicity))
        .collect();
    assert_eq!(described.len(), 3);
    assert_eq!(described[0], (0.0, 1));
    assert!((described[1].0 - 1.0 / 9.0).abs() <= 1e-12 && described[1].1 == 2);
    assert_eq!(described[2], (1.0, 2));
}

#[test]
fn r14_warp_recovery_matches_the_declared_forms() {
    let entry = catalog::r14_example();
    let blocks = entry.chart.blocks.as_ref().unwrap();
    let grid = entry.grid(3);
    let rec = recover_warping(&entry.chart, blocks, &grid).unwrap();
    for (flat, p) in grid.points().enumerate() {
        let f_want = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let s_want = (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt();
        assert!((rec.fibers[0].values[flat] - f_want).abs() <= 1e-9);
        assert!((rec.fibers[1].values[flat] - s_want).abs() <= 1e-9);
    }
    let verdict = triviality_check(&rec, 1e-8);
    assert!(!verdict.trivial);

    // recovery without declared warps lands on the same functions up to the
    // corner gauge
    let undeclared = slantgeom::BlockStructure::new(blocks.base.clone(), blocks.fibers.clone());
    let rec2 = recover_warping(&entry.chart, &undeclared, &grid).unwrap();
    let corner = grid.point(0);
    let f0 = (corner[0] * corner[0] + corner[1] * corner[1]).sqrt();
    for (flat, p) in grid.points().enumerate() {
        let f_want = (p[0] * p[0] + p[1] * p[1]).sqrt() / f0;
        assert!(
            (rec2.fibers[0].values[flat] - f_want).abs() <= 1e-9,
            "gauge-normalized recovery at {p:?}"
        );
    }
}

#[test]
fn r14_christoffels_agree_with_the_assembled_metric_route() {
    // the induced-metric connection of the chart equals the connection of
    // the abstract warped metric assembled from its closed-form blocks
    use slantgeom::expr::parse_expression;
    use slantgeom::warped::{christoffel_of_metric, FiberSpec, WarpedProductSpec};

    let e = |t: &str| parse_expression(t).unwrap();
    let entry = catalog::r14_example();
    let spec = WarpedProductSpec {
        params: entry.chart.params.clone(),
        base_indices: vec![0, 1],
        base_metric: vec![vec![e("3"), e("0")], vec![e("0"), e("3")]],
        fibers: vec![
            FiberSpec {
                indices: vec![2],
                metric: vec![vec![e("1")]],
                warp: e("sqrt(u^2 + v^2)"),
            },
            FiberSpec {
                indices: vec![3, 4],
                metric: vec![vec![e("1"), e("0")], vec![e("0"), e("1")]],
                warp: e("sqrt(1 + u^2 + v^2)"),
            },
        ],
    };
    for p in entry.grid(3).points() {
        let geom = entry.chart.point_geometry(&p).unwrap();
        let from_spec = christoffel_of_metric(&spec, &p).unwrap();
        for k in 0..5 {
            let diff = (&geom.christoffel[k] - &from_spec[k]).amax();
            assert!(diff <= 1e-8, "upper index {k} at {p:?}: {diff:.3e}");
        }
    }
}

#[test]
fn reassembled_metric_reproduces_the_induced_one() {
    // block-diagonal rebuild from recovered warps and the reference fiber
    // slice matches the induced metric
    let entry = catalog::r14_example();
    let blocks = entry.chart.blocks.as_ref().unwrap();
    let grid = entry.grid(3);
    let undeclared = slantgeom::BlockStructure::new(blocks.base.clone(), blocks.fibers.clone());
    let rec = recover_warping(&entry.chart, &undeclared, &grid).unwrap();

    for (flat, p) in grid.points().enumerate() {
        let induced = entry.chart.point_geometry(&p).unwrap().metric;
        let ref_of = |fiber: usize| grid.base_slice_index(flat, &blocks.fibers[fiber]);
        let mut rebuilt = nalgebra::DMatrix::zeros(5, 5);
        for &a in &blocks.base {
            for &b in &blocks.base {
                rebuilt[(a, b)] = induced.get(a, b);
            }
        }
        for (f, fiber_idx) in blocks.fibers.iter().enumerate() {
            let ref_metric = entry
                .chart
                .point_geometry(&grid.point(ref_of(f)))
                .unwrap()
                .metric;
            // the corner slice carries warp(corner)^2 * g_fiber; the gauge
            // normalizes warp(corner) = 1, so the rebuild is ratio * slice
            let scale = rec.fibers[f].values[flat].powi(2);
            for &a in fiber_idx {
                for &b in fiber_idx {
                    rebuilt[(a, b)] = scale * ref_metric.get(a, b);
                }
            }
        }
        for i in 0..5 {
            for j in 0..5 {
                assert!(
                    (rebuilt[(i, j)] - induced.get(i, j)).abs() <= 1e-8,
                    "entry ({i},{j}) at {p:?}"
                );
            }
        }
    }
}

#[test]
fn fixture_classifications_match_expected() {
    let tols = Tolerances::default();
    for name in catalog::names() {
        let entry = catalog::entry(name).unwrap();
        let grid = entry.grid(3);
        if entry.expected.expects_higher_order {
            assert!(matches!(
                analyze_chart(name, &entry.chart, &grid, &tols),
                Err(GeomError::HigherOrder { .. })
            ));
            continue;
        }
        if entry.expected.expects_inconsistent_scaling {
            let blocks = entry.chart.blocks.as_ref().unwrap();
            assert!(matches!(
                recover_warping(&entry.chart, blocks, &grid),
                Err(GeomError::InconsistentScaling { .. })
            ));
            continue;
        }
        let report = analyze_chart(name, &entry.chart, &grid, &tols).unwrap();
        let mut theta_spread: f64 = 0.0;
        for point in &report.points {
            if let Some((k, n, m, l)) = entry.expected.dims {
                assert_eq!(
                    (
                        point.holomorphic_dim,
                        point.totally_real_dim,
                        point.slant_dim,
                        point.invariant_normal_dim
                    ),
                    (k, n, m, l),
                    "{name} dims at {:?}",
                    point.point
                );
            }
            if let Some(proper) = entry.expected.proper {
                assert_eq!(point.proper, proper, "{name} proper flag");
            }
            if let Some(theta0) = entry.expected.constant_theta {
                let got = point.theta.unwrap();
                assert!(
                    (got - theta0).abs() <= 1e-9,
                    "{name} constant theta: {got} vs {theta0}"
                );
                theta_spread = theta_spread.max((got - theta0).abs());
            }
        }
        if entry.expected.constant_theta.is_some() {
            assert!(theta_spread <= 1e-9, "{name} theta drifts: {theta_spread}");
        }
        if let Some(trivial) = entry.expected.trivial_warps {
            if let Some(blocks) = entry.chart.blocks.as_ref() {
                let rec = recover_warping(&entry.chart, blocks, &grid).unwrap();
                assert_eq!(triviality_check(&rec, 1e-8).trivial, trivial, "{name}");
            }
        }
    }
}

#[test]
fn r14_theta_is_not_constant() {
    // pointwise slant but not slant: theta genuinely varies over the grid
    let entry = catalog::r14_example();
    let tols = Tolerances::default();
    let report = analyze_chart("r14", &entry.chart, &entry.grid(3), &tols).unwrap();
    let thetas: Vec<f64> = report.points.iter().map(|p| p.theta.unwrap()).collect();
    let spread = thetas.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - thetas.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread > 0.1, "theta spread {spread}");
}

fn scaled_chart(chart: &ImmersionChart, c: f64) -> ImmersionChart {
    let components = chart
        .components
        .iter()
        .map(|comp| Expr::lit(c).mul(comp.clone()))
        .collect();
    let blocks = chart.blocks.as_ref().map(|b| {
        let mut scaled = slantgeom::BlockStructure::new(b.base.clone(), b.fibers.clone());
        if let Some(warps) = &b.declared_warps {
            scaled = scaled.with_warps(
                warps
                    .iter()
                    .map(|w| Expr::lit(c).mul(w.clone()))
                    .collect(),
            );
        }
        scaled
    });
    ImmersionChart::new(chart.ambient, chart.params.clone(), components, blocks).unwrap()
}

#[test]
fn homothety_scales_the_slack_by_the_inverse_square() {
    let entry = catalog::r14_example();
    let grid = entry.grid(2);
    let tols = Tolerances::default();
    let base = audit_chart("r14", &entry.chart, &grid, &tols).unwrap();
    for c in [2.0, 10.0] {
        let scaled = scaled_chart(&entry.chart, c);
        let report = audit_chart("r14-scaled", &scaled, &grid, &tols).unwrap();
        for (a, b) in base.inequality.rows.iter().zip(&report.inequality.rows) {
            let want = a.slack / (c * c);
            assert!(
                (b.slack - want).abs() <= 1e-8 * want.abs().max(1.0),
                "slack scaling at {:?}: {} vs {}",
                a.point,
                b.slack,
                want
            );
            let lhs_want = a.lhs / (c * c);
            assert!((b.lhs - lhs_want).abs() <= 1e-8 * lhs_want.max(1.0));
        }
    }
}

#[test]
fn sff_norm_and_slack_are_frame_invariant() {
    use rand::{Rng, SeedableRng};
    let entry = catalog::r14_example();
    let p = [1.3, 0.8, 0.6, 0.9, 1.2];
    let geom = entry.chart.point_geometry(&p).unwrap();
    let reference = geom.second_fundamental_norm_sq();

    let mut rng = rand::rngs::StdRng::seed_from_u64(42);
    for _ in 0..5 {
        // random orthonormal remix of the tangent frame
        let d = geom.dim();
        let raw = nalgebra::DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let q = raw.qr().q();
        let remixed: Vec<DVector<f64>> = (0..d)
            .map(|a| {
                let mut v = DVector::zeros(geom.ambient_dim());
                for b in 0..d {
                    v += geom.tangent_frame.vector(b) * q[(b, a)];
                }
                v
            })
            .collect();
        let mut total = 0.0;
        for a in &remixed {
            for b in &remixed {
                total += geom.sff_apply(a, b).norm_squared();
            }
        }
        assert!(
            (total - reference).abs() <= 1e-9 * reference.max(1.0),
            "remixed {total} vs {reference}"
        );
    }
}
