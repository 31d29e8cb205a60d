//! Built-in charts with known ground truth: the five-parameter biwarped
//! immersion into R^14 and a set of constructed fixtures (holomorphic,
//! totally real, constant-slant, product, singly warped, and two negative
//! controls).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

use crate::ambient::AmbientSpace;
use crate::error::{GeomError, Result};
use crate::expr::{parse_expression, Expr};
use crate::grid::Grid;
use crate::immersion::{ImmersionChart, ParamSpec};
use crate::warped::BlockStructure;

/// Ground truth a catalog entry is regression-tested against.
#[derive(Debug, Clone, Default)]
pub struct Expected {
    /// (k, n, m, l): holomorphic / totally real / slant / invariant normal.
    pub dims: Option<(usize, usize, usize, usize)>,
    /// cos(theta) as an expression over the chart parameters.
    pub cos_theta: Option<Expr>,
    /// Diagonal metric coefficients in coordinate order (cross terms zero).
    pub metric_diag: Option<Vec<Expr>>,
    pub proper: Option<bool>,
    pub trivial_warps: Option<bool>,
    /// The slant angle is this constant everywhere.
    pub constant_theta: Option<f64>,
    /// Classification is expected to fail with a higher-order spectrum.
    pub expects_higher_order: bool,
    /// Warp recovery is expected to fail with inconsistent fiber scaling.
    pub expects_inconsistent_scaling: bool,
}

/// A named chart with its sampling box and expected values.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub chart: ImmersionChart,
    /// Closed box the default grids sample; strictly inside the chart domain.
    pub sample_box: Vec<(f64, f64)>,
    /// Parameter values the source construction excludes. Kept as metadata;
    /// geometry is computed there by default since no degeneracy occurs.
    pub excluded_values: Vec<(usize, f64)>,
    pub expected: Expected,
}

impl CatalogEntry {
    pub fn grid(&self, points_per_axis: usize) -> Grid {
        Grid::linspace(&self.sample_box, points_per_axis)
    }
}

fn e(text: &str) -> Expr {
    parse_expression(text).expect("catalog expression")
}

/// All catalog names, the main example first.
pub fn names() -> &'static [&'static str] {
    &[
        "r14",
        "holomorphic_plane",
        "totally_real_plane",
        "slant_plane",
        "product_chart",
        "singly_warped",
        "two_angle_higher_order",
        "perturbed_nonwarped",
    ]
}

/// Look up any entry by name.
pub fn entry(name: &str) -> Result<CatalogEntry> {
    if name == "r14" {
        Ok(r14_example())
    } else {
        fixture(name)
    }
}

/// The five-parameter biwarped product immersion into R^14 with holomorphic
/// base span{U, V}, totally real fiber span{X}, and pointwise slant fiber
/// span{Z, W}; cos(theta) = 1/(1 + u^2 + v^2), warps sqrt(u^2 + v^2) and
/// sqrt(1 + u^2 + v^2).
pub fn r14_example() -> CatalogEntry {
    let params = vec![
        ParamSpec::new("u", 0.05, 8.0),
        ParamSpec::new("v", 0.05, 8.0),
        ParamSpec::new("x", 0.0, FRAC_PI_2),
        ParamSpec::new("z", 0.0, FRAC_PI_2),
        ParamSpec::new("w", 0.0, FRAC_PI_2),
    ];
    let components = [
        "u*cos(z)", "v*cos(z)", "u*cos(w)", "v*cos(w)",
        "u*sin(z)", "v*sin(z)", "u*sin(w)", "v*sin(w)",
        "z", "w", "u*cos(x)", "v*cos(x)", "u*sin(x)", "v*sin(x)",
    ]
    .iter()
    .map(|s| e(s))
    .collect();
    let blocks = BlockStructure::new(vec![0, 1], vec![vec![2], vec![3, 4]])
        .with_warps(vec![e("sqrt(u^2 + v^2)"), e("sqrt(1 + u^2 + v^2)")]);
    let chart = ImmersionChart::new(AmbientSpace::new(7), params, components, Some(blocks))
        .expect("catalog chart");
    let eps = 0.05;
    CatalogEntry {
        name: "r14",
        chart,
        sample_box: vec![
            (0.5, 3.0),
            (0.5, 3.0),
            (eps, FRAC_PI_2 - eps),
            (eps, FRAC_PI_2 - eps),
            (eps, FRAC_PI_2 - eps),
        ],
        excluded_values: vec![(0, 1.0), (1, 1.0)],
        expected: Expected {
            dims: Some((2, 1, 2, 6)),
            cos_theta: Some(e("1 / (1 + u^2 + v^2)")),
            metric_diag: Some(vec![
                e("3"),
                e("3"),
                e("u^2 + v^2"),
                e("1 + u^2 + v^2"),
                e("1 + u^2 + v^2"),
            ]),
            proper: Some(true),
            trivial_warps: Some(false),
            ..Expected::default()
        },
    }
}

/// Constructed fixtures with analytic expected values.
pub fn fixture(name: &str) -> Result<CatalogEntry> {
    match name {
        "holomorphic_plane" => {
            let chart = ImmersionChart::new(
                AmbientSpace::new(2),
                vec![ParamSpec::new("u", -5.0, 5.0), ParamSpec::new("v", -5.0, 5.0)],
                vec![e("u"), e("v"), e("0"), e("0")],
                Some(BlockStructure::new(vec![0, 1], vec![])),
            )?;
            Ok(CatalogEntry {
                name: "holomorphic_plane",
                chart,
                sample_box: vec![(-2.0, 2.0), (-2.0, 2.0)],
                excluded_values: vec![],
                expected: Expected {
                    dims: Some((2, 0, 0, 2)),
                    proper: Some(false),
                    constant_theta: Some(0.0),
                    trivial_warps: Some(true),
                    ..Expected::default()
                },
            })
        }
        "totally_real_plane" => {
            let chart = ImmersionChart::new(
                AmbientSpace::new(2),
                vec![ParamSpec::new("u", -5.0, 5.0), ParamSpec::new("v", -5.0, 5.0)],
                vec![e("u"), e("0"), e("v"), e("0")],
                None,
            )?;
            Ok(CatalogEntry {
                name: "totally_real_plane",
                chart,
                sample_box: vec![(-2.0, 2.0), (-2.0, 2.0)],
                excluded_values: vec![],
                expected: Expected {
                    dims: Some((0, 2, 0, 0)),
                    proper: Some(false),
                    constant_theta: Some(FRAC_PI_2),
                    ..Expected::default()
                },
            })
        }
        "slant_plane" => Ok(slant_plane(FRAC_PI_4)),
        "product_chart" => {
            // trivial product: holomorphic pair, a real line, and a slant
            // plane at pi/4, all unwarped; the invariant normal complement
            // vanishes (l = 0)
            let c = FRAC_PI_4.cos();
            let s = FRAC_PI_4.sin();
            let chart = ImmersionChart::new(
                AmbientSpace::new(4),
                vec![
                    ParamSpec::new("u1", -5.0, 5.0),
                    ParamSpec::new("u2", -5.0, 5.0),
                    ParamSpec::new("x", -5.0, 5.0),
                    ParamSpec::new("z", -5.0, 5.0),
                    ParamSpec::new("w", -5.0, 5.0),
                ],
                vec![
                    e("u1"),
                    e("u2"),
                    e("x"),
                    e("0"),
                    e("z"),
                    Expr::param("w").mul(Expr::lit(c)),
                    e("0"),
                    Expr::param("w").mul(Expr::lit(s)),
                ],
                Some(
                    BlockStructure::new(vec![0, 1], vec![vec![2], vec![3, 4]])
                        .with_warps(vec![e("1"), e("1")]),
                ),
            )?;
            Ok(CatalogEntry {
                name: "product_chart",
                chart,
                sample_box: vec![
                    (-1.5, 1.5),
                    (-1.5, 1.5),
                    (-1.5, 1.5),
                    (-1.5, 1.5),
                    (-1.5, 1.5),
                ],
                excluded_values: vec![],
                expected: Expected {
                    dims: Some((2, 1, 2, 0)),
                    proper: Some(true),
                    constant_theta: Some(FRAC_PI_4),
                    trivial_warps: Some(true),
                    ..Expected::default()
                },
            })
        }
        "singly_warped" => {
            let chart = ImmersionChart::new(
                AmbientSpace::new(3),
                vec![
                    ParamSpec::new("u", 0.05, 8.0),
                    ParamSpec::new("v", 0.05, 8.0),
                    ParamSpec::new("x", 0.0, FRAC_PI_2),
                ],
                vec![
                    e("u"),
                    e("v"),
                    e("u*cos(x)"),
                    e("v*cos(x)"),
                    e("u*sin(x)"),
                    e("v*sin(x)"),
                ],
                Some(
                    BlockStructure::new(vec![0, 1], vec![vec![2]])
                        .with_warps(vec![e("sqrt(u^2 + v^2)")]),
                ),
            )?;
            Ok(CatalogEntry {
                name: "singly_warped",
                chart,
                sample_box: vec![(0.5, 3.0), (0.5, 3.0), (0.05, FRAC_PI_2 - 0.05)],
                excluded_values: vec![],
                expected: Expected {
                    dims: Some((2, 1, 0, 2)),
                    metric_diag: Some(vec![e("2"), e("2"), e("u^2 + v^2")]),
                    proper: Some(false),
                    trivial_warps: Some(false),
                    ..Expected::default()
                },
            })
        }
        "two_angle_higher_order" => {
            // two constant-slant planes at pi/6 and pi/3: the spectrum of
            // -T^2 has two intermediate clusters, so classification rejects
            let chart = ImmersionChart::new(
                AmbientSpace::new(4),
                vec![
                    ParamSpec::new("a", -5.0, 5.0),
                    ParamSpec::new("b", -5.0, 5.0),
                    ParamSpec::new("c", -5.0, 5.0),
                    ParamSpec::new("e", -5.0, 5.0),
                ],
                vec![
                    Expr::param("a"),
                    Expr::param("b").mul(Expr::lit(FRAC_PI_6.cos())),
                    Expr::lit(0.0),
                    Expr::param("b").mul(Expr::lit(FRAC_PI_6.sin())),
                    Expr::param("c"),
                    Expr::param("e").mul(Expr::lit(FRAC_PI_3.cos())),
                    Expr::lit(0.0),
                    Expr::param("e").mul(Expr::lit(FRAC_PI_3.sin())),
                ],
                None,
            )?;
            Ok(CatalogEntry {
                name: "two_angle_higher_order",
                chart,
                sample_box: vec![(-1.5, 1.5); 4],
                excluded_values: vec![],
                expected: Expected {
                    expects_higher_order: true,
                    ..Expected::default()
                },
            })
        }
        "perturbed_nonwarped" => {
            // block-diagonal induced metric with fiber entry u^2 + v^2 + x^2:
            // the fiber scaling depends on the fiber coordinate, so this is
            // not a warped product over the declared blocks
            let chart = ImmersionChart::new(
                AmbientSpace::new(4),
                vec![
                    ParamSpec::new("u", 0.05, 8.0),
                    ParamSpec::new("v", 0.05, 8.0),
                    ParamSpec::new("x", 0.0, FRAC_PI_2),
                ],
                vec![
                    e("u"),
                    e("v"),
                    e("u*cos(x)"),
                    e("v*cos(x)"),
                    e("u*sin(x)"),
                    e("v*sin(x)"),
                    e("x^2/2"),
                    e("0"),
                ],
                Some(BlockStructure::new(vec![0, 1], vec![vec![2]])),
            )?;
            Ok(CatalogEntry {
                name: "perturbed_nonwarped",
                chart,
                sample_box: vec![(0.5, 1.5), (0.5, 1.5), (0.3, 1.2)],
                excluded_values: vec![],
                expected: Expected {
                    expects_inconsistent_scaling: true,
                    ..Expected::default()
                },
            })
        }
        other => Err(GeomError::UnknownFixture {
            name: other.to_string(),
        }),
    }
}

/// A flat plane immersed at a constant Wirtinger angle `theta0`:
/// -T^2 = cos^2(theta0) Id on the whole tangent space.
pub fn slant_plane(theta0: f64) -> CatalogEntry {
    let chart = ImmersionChart::new(
        AmbientSpace::new(2),
        vec![ParamSpec::new("u", -5.0, 5.0), ParamSpec::new("v", -5.0, 5.0)],
        vec![
            Expr::param("u"),
            Expr::param("v").mul(Expr::lit(theta0.cos())),
            Expr::lit(0.0),
            Expr::param("v").mul(Expr::lit(theta0.sin())),
        ],
        None,
    )
    .expect("catalog chart");
    CatalogEntry {
        name: "slant_plane",
        chart,
        sample_box: vec![(-2.0, 2.0), (-2.0, 2.0)],
        excluded_values: vec![],
        expected: Expected {
            dims: Some((0, 0, 2, 0)),
            proper: Some(false),
            constant_theta: Some(theta0),
            ..Expected::default()
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fixture() {
        assert!(matches!(
            fixture("no_such_chart"),
            Err(GeomError::UnknownFixture { .. })
        ));
    }

    #[test]
    fn every_name_resolves() {
        for name in names() {
            let got = entry(name).unwrap();
            assert_eq!(got.name, *name);
            assert_eq!(got.sample_box.len(), got.chart.dim());
        }
    }
}
