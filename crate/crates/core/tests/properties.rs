//! Property suites: jets against finite differences, parser round-trips,
//! orthonormalization and eigen contracts, and the tangential/normal
//! isometry split.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use slantgeom::catalog;
use slantgeom::expr::{parse_expression, Expr, Func};
use slantgeom::jet::evaluate_jet2;
use slantgeom::linalg::{orthonormalize, Inner, SymMatrix};
use slantgeom::slant::{f_of, t_of};
use slantgeom::tol;

/// Central finite differences of an expression, the independent oracle the
/// jet implementation is checked against.
fn fd_gradient(expr: &Expr, names: &[String], p: &[f64], h: f64) -> Vec<f64> {
    (0..p.len())
        .map(|i| {
            let mut hi = p.to_vec();
            let mut lo = p.to_vec();
            hi[i] += h;
            lo[i] -= h;
            (expr.eval(names, &hi).unwrap() - expr.eval(names, &lo).unwrap()) / (2.0 * h)
        })
        .collect()
}

fn fd_hessian(expr: &Expr, names: &[String], p: &[f64], h: f64) -> DMatrix<f64> {
    let d = p.len();
    DMatrix::from_fn(d, d, |i, j| {
        let mut pp = p.to_vec();
        let mut pm = p.to_vec();
        let mut mp = p.to_vec();
        let mut mm = p.to_vec();
        pp[i] += h;
        pp[j] += h;
        pm[i] += h;
        pm[j] -= h;
        mp[i] -= h;
        mp[j] += h;
        mm[i] -= h;
        mm[j] -= h;
        (expr.eval(names, &pp).unwrap() - expr.eval(names, &pm).unwrap()
            - expr.eval(names, &mp).unwrap()
            + expr.eval(names, &mm).unwrap())
            / (4.0 * h * h)
    })
}

const CORPUS: &[&str] = &[
    "u*cos(z)",
    "v*sin(z)",
    "sqrt(1 + u^2 + v^2)",
    "exp(u*v) / (1 + u^2)",
    "tan(z/2) * log(1 + v)",
    "u^3 - 2*u*v + v^-1",
    "sin(cos(u)) * exp(-v)",
    "(u + v)^2 / (1 + z^2)",
    "log(u + v + z)",
    "sqrt(u) * z^2",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jets_match_central_differences(
        u in 0.3f64..2.0,
        v in 0.3f64..2.0,
        z in 0.1f64..1.4,
    ) {
        let names: Vec<String> = ["u", "v", "z"].iter().map(|s| s.to_string()).collect();
        let p = [u, v, z];
        let h = 1e-5;
        for text in CORPUS {
            let expr = parse_expression(text).unwrap();
            let jet = evaluate_jet2(&expr, &names, &p).unwrap();
            let grad_fd = fd_gradient(&expr, &names, &p, h);
            for i in 0..3 {
                let scale = jet.grad[i].abs().max(1.0);
                prop_assert!(
                    (jet.grad[i] - grad_fd[i]).abs() <= tol::FD_TOL * scale,
                    "{text} grad[{i}]: {} vs {}", jet.grad[i], grad_fd[i]
                );
            }
            let hess_fd = fd_hessian(&expr, &names, &p, h);
            for i in 0..3 {
                for j in 0..3 {
                    let scale = jet.hess[(i, j)].abs().max(1.0);
                    prop_assert!(
                        (jet.hess[(i, j)] - hess_fd[(i, j)]).abs() <= tol::FD_TOL * scale,
                        "{text} hess[{i}{j}]: {} vs {}", jet.hess[(i, j)], hess_fd[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn gram_schmidt_idempotent_on_random_sets(
        seedling in proptest::array::uniform12(-3.0f64..3.0),
    ) {
        let vectors: Vec<DVector<f64>> = (0..3)
            .map(|i| DVector::from_fn(4, |r, _| seedling[4 * i + r] + if r == i { 5.0 } else { 0.0 }))
            .collect();
        let once = orthonormalize(&vectors, Inner::Euclidean).unwrap();
        prop_assert!(once.orthonormality_residual(Inner::Euclidean) <= tol::ORTHO_TOL);
        let twice = orthonormalize(once.vectors(), Inner::Euclidean).unwrap();
        for (a, b) in once.iter().zip(twice.iter()) {
            prop_assert!((a - b).amax() <= tol::ORTHO_TOL);
        }
    }

    #[test]
    fn eigenvalues_are_rotation_invariant(
        entries in proptest::array::uniform10(-2.0f64..2.0),
        mix in proptest::array::uniform16(-1.0f64..1.0),
    ) {
        let s = SymMatrix::from_fn(4, |i, j| entries[(4 * i + j) % 10]);
        let raw = DMatrix::from_fn(4, 4, |r, c| mix[4 * r + c] + if r == c { 3.0 } else { 0.0 });
        let q = raw.qr().q();
        let rotated = SymMatrix::new(&q * s.matrix() * q.transpose()).unwrap();
        let (a, _) = s.eigen().unwrap();
        let (b, _) = rotated.eigen().unwrap();
        let scale = s.matrix().amax().max(1.0);
        for i in 0..4 {
            prop_assert!((a[i] - b[i]).abs() <= tol::EIG_TOL * scale,
                "eigenvalue {i}: {} vs {}", a[i], b[i]);
        }
    }

    #[test]
    fn eigen_reconstruction_on_random_matrices(
        entries in proptest::array::uniform21(-5.0f64..5.0),
    ) {
        let s = SymMatrix::from_fn(6, |i, j| {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            entries[(hi * (hi + 1)) / 2 + lo]
        });
        let (vals, vecs) = s.eigen().unwrap();
        let scale = s.matrix().amax().max(1.0);
        // ascending order, orthonormal columns, exact reconstruction
        for w in vals.as_slice().windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        let gram = vecs.transpose() * &vecs;
        prop_assert!((gram - DMatrix::identity(6, 6)).amax() <= tol::EIG_TOL);
        let rebuilt = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        prop_assert!((s.matrix() - rebuilt).amax() <= tol::EIG_TOL * scale);
    }

    #[test]
    fn tangential_normal_split_is_an_isometry(
        u in 0.5f64..3.0,
        v in 0.5f64..3.0,
        x in 0.1f64..1.4,
        z in 0.1f64..1.4,
        w in 0.1f64..1.4,
        coeffs in proptest::array::uniform5(-2.0f64..2.0),
    ) {
        let entry = catalog::r14_example();
        let geom = entry.chart.point_geometry(&[u, v, x, z, w]).unwrap();
        let mut vec = DVector::zeros(14);
        for (c, e) in coeffs.iter().zip(geom.tangent_frame.iter()) {
            vec += e * *c;
        }
        prop_assume!(vec.norm() > 1e-6);
        let tv = t_of(&geom, &entry.chart.ambient, &vec).unwrap();
        let fv = f_of(&geom, &entry.chart.ambient, &vec).unwrap();
        let total = tv.norm_squared() + fv.norm_squared();
        prop_assert!((total - vec.norm_squared()).abs() <= 1e-10 * vec.norm_squared());
    }
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..4000u32).prop_map(|n| Expr::lit(n as f64 / 8.0)),
        (0.0f64..1e9f64).prop_map(Expr::lit),
        prop_oneof![Just("u"), Just("v"), Just("w")].prop_map(Expr::param),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(b)),
            (inner.clone(), -3i32..=4).prop_map(|(a, n)| a.pow(n as f64)),
            (
                prop_oneof![
                    Just(Func::Sin),
                    Just(Func::Cos),
                    Just(Func::Tan),
                    Just(Func::Exp),
                    Just(Func::Log),
                    Just(Func::Sqrt)
                ],
                inner
            )
                .prop_map(|(f, a)| Expr::call(f, a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printer_parse_round_trip(expr in arb_expr()) {
        let printed = expr.print();
        let reparsed = parse_expression(&printed)
            .unwrap_or_else(|e| panic!("reparse `{printed}`: {e}"));
        prop_assert_eq!(reparsed, expr, "printed form `{}`", printed);
    }
}
