//! Pointwise slant analysis: the tangential and normal parts (T, F) of the
//! complex structure on the tangent space, the spectrum of -T^2, the
//! resulting splitting of the tangent bundle into holomorphic / totally real
//! / slant distributions, and the induced splitting of the normal bundle.

use nalgebra::{DMatrix, DVector};

use crate::ambient::AmbientSpace;
use crate::error::{GeomError, Result};
use crate::immersion::PointGeometry;
use crate::linalg::{Basis, Inner, SymMatrix};
use crate::tol::Tolerances;

/// The complex structure restricted to the tangent space, split into its
/// tangential part `t` (in the orthonormal tangent frame) and normal part
/// `f` (tangent frame to normal frame coordinates).
#[derive(Debug, Clone)]
pub struct TangentialOperator {
    pub t: DMatrix<f64>,
    pub f: DMatrix<f64>,
}

impl TangentialOperator {
    /// ||T + T^T||, zero for an orthonormal frame.
    pub fn skewness_residual(&self) -> f64 {
        (&self.t + self.t.transpose()).amax()
    }
}

/// T, F over the orthonormal frames of `geom`.
pub fn tangential_operator(geom: &PointGeometry, space: &AmbientSpace) -> Result<TangentialOperator> {
    let d = geom.dim();
    let codim = geom.codim();
    let mut t = DMatrix::zeros(d, d);
    let mut f = DMatrix::zeros(codim, d);
    for b in 0..d {
        let jb = space.apply_j(geom.tangent_frame.vector(b))?;
        for a in 0..d {
            t[(a, b)] = geom.tangent_frame.vector(a).dot(&jb);
        }
        for s in 0..codim {
            f[(s, b)] = geom.normal_frame.vector(s).dot(&jb);
        }
    }
    Ok(TangentialOperator { t, f })
}

/// One eigenvalue cluster of -T^2 with its multiplicity and an orthonormal
/// eigenbasis in tangent-frame coordinates.
#[derive(Debug, Clone)]
pub struct SlantCluster {
    pub value: f64,
    pub multiplicity: usize,
    pub frame_basis: Vec<DVector<f64>>,
}

/// Spectrum of -T^2 = T^T T, clustered by `cluster_tol` and clipped to
/// [0, 1]. Values within `cluster_tol` of 0 or 1 snap exactly there.
pub fn slant_spectrum(op: &TangentialOperator, tols: &Tolerances) -> Result<Vec<SlantCluster>> {
    let m = SymMatrix::new(op.t.transpose() * &op.t)?;
    let (values, vectors) = m.eigen()?;
    let d = values.len();

    let mut clusters: Vec<SlantCluster> = Vec::new();
    for i in 0..d {
        let v = values[i].clamp(0.0, 1.0);
        match clusters.last_mut() {
            Some(last) if (v - last.value).abs() <= tols.cluster => {
                // running mean keeps the representative centered
                last.value =
                    (last.value * last.multiplicity as f64 + v) / (last.multiplicity + 1) as f64;
                last.multiplicity += 1;
                last.frame_basis.push(vectors.column(i).into_owned());
            }
            _ => clusters.push(SlantCluster {
                value: v,
                multiplicity: 1,
                frame_basis: vec![vectors.column(i).into_owned()],
            }),
        }
    }

    for cluster in &mut clusters {
        let spread = cluster
            .frame_basis
            .len()
            .checked_sub(1)
            .map(|_| {
                // distance between extreme members of the chained cluster
                let lo = values
                    .iter()
                    .filter(|&&v| (v.clamp(0.0, 1.0) - cluster.value).abs() <= tols.cluster * cluster.multiplicity as f64)
                    .fold(f64::INFINITY, |a, &b| a.min(b));
                let hi = values
                    .iter()
                    .filter(|&&v| (v.clamp(0.0, 1.0) - cluster.value).abs() <= tols.cluster * cluster.multiplicity as f64)
                    .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                hi - lo
            })
            .unwrap_or(0.0);
        if spread > 10.0 * tols.cluster {
            return Err(GeomError::Unclassifiable {
                detail: format!(
                    "eigenvalue cluster at {:.6} has spread {spread:.3e}",
                    cluster.value
                ),
            });
        }
        if cluster.value <= tols.cluster {
            cluster.value = 0.0;
        } else if (1.0 - cluster.value) <= tols.cluster {
            cluster.value = 1.0;
        }
    }

    // snapping must not merge what clustering kept apart
    for pair in clusters.windows(2) {
        if (pair[0].value - pair[1].value).abs() <= tols.cluster {
            return Err(GeomError::Unclassifiable {
                detail: format!(
                    "clusters at {:.6} and {:.6} collide after snapping",
                    pair[0].value, pair[1].value
                ),
            });
        }
    }
    Ok(clusters)
}

/// The splitting of tangent and normal bundles induced by the spectrum of
/// -T^2: eigenvalue 1 is the holomorphic block, 0 the totally real block,
/// and the single intermediate eigenvalue cos^2(theta) the slant block.
#[derive(Debug, Clone)]
pub struct SlantSplit {
    /// Holomorphic distribution (ambient vectors, orthonormal).
    pub d_t: Basis,
    /// Totally real distribution.
    pub d_perp: Basis,
    /// Pointwise slant distribution.
    pub d_theta: Basis,
    /// Slant angle in radians; None when there is no slant block and both
    /// degenerate blocks are present.
    pub theta: Option<f64>,
    /// (k, n, m) = dims of the holomorphic / totally real / slant blocks.
    pub dims: (usize, usize, usize),
    /// dim of the invariant normal complement.
    pub invariant_normal_dim: usize,
    /// J(D_perp): image of the totally real block in the normal bundle.
    pub j_d_perp: Basis,
    /// F(D_theta): normal image of the slant block, rescaled orthonormal.
    pub f_d_theta: Basis,
    /// Invariant complement of the two images in the normal bundle.
    pub d_bar_t: Basis,
    /// Proper: both D_T and D_perp nonzero and theta strictly inside
    /// (0, pi/2).
    pub proper: bool,
}

impl SlantSplit {
    /// Slant angle with degenerate cases snapped: 0 for a purely holomorphic
    /// tangent space, pi/2 for a purely totally real one.
    pub fn theta_or_degenerate(&self) -> Option<f64> {
        let (k, n, m) = self.dims;
        if m > 0 {
            self.theta
        } else if k > 0 && n == 0 {
            Some(0.0)
        } else if n > 0 && k == 0 {
            Some(std::f64::consts::FRAC_PI_2)
        } else {
            None
        }
    }
}

/// Classify the point from its spectrum. Exactly one intermediate cluster
/// yields an order-1 split with theta = arccos(sqrt(lambda)); two or more
/// intermediate clusters are rejected as higher order.
pub fn classify_point(
    geom: &PointGeometry,
    space: &AmbientSpace,
    spectrum: &[SlantCluster],
    tols: &Tolerances,
) -> Result<SlantSplit> {
    let to_ambient = |frame_vec: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(geom.ambient_dim());
        for (a, e) in geom.tangent_frame.iter().enumerate() {
            out += e * frame_vec[a];
        }
        out
    };

    let mut hol: Vec<DVector<f64>> = Vec::new();
    let mut real: Vec<DVector<f64>> = Vec::new();
    let mut slant: Vec<(f64, Vec<DVector<f64>>)> = Vec::new();
    for cluster in spectrum {
        let ambient: Vec<DVector<f64>> = cluster.frame_basis.iter().map(&to_ambient).collect();
        if cluster.value == 1.0 {
            hol = ambient;
        } else if cluster.value == 0.0 {
            real = ambient;
        } else {
            slant.push((cluster.value, ambient));
        }
    }
    if slant.len() > 1 {
        return Err(GeomError::HigherOrder {
            angles: slant
                .iter()
                .map(|(v, _)| v.sqrt().acos())
                .collect(),
        });
    }

    let (theta, d_theta_vecs) = match slant.pop() {
        Some((value, vecs)) => (Some(value.sqrt().acos()), vecs),
        None => (None, Vec::new()),
    };
    let (k, n, m) = (hol.len(), real.len(), d_theta_vecs.len());

    if k % 2 != 0 {
        return Err(GeomError::Unclassifiable {
            detail: format!("holomorphic block has odd dimension {k}"),
        });
    }

    // structural checks: J-invariance of the holomorphic block, T vanishing
    // on the real block, F vanishing on the holomorphic block
    let check_tol = 100.0 * tols.eigen;
    let hol_basis = Basis::from_orthonormal(hol.clone());
    for v in &hol {
        let jv = space.apply_j(v)?;
        let out = (&jv - hol_basis.project(&jv)).norm();
        if out > check_tol {
            return Err(GeomError::Unclassifiable {
                detail: format!("holomorphic block is not J-invariant (residual {out:.3e})"),
            });
        }
    }
    for v in &real {
        let jv = space.apply_j(v)?;
        let t_part = geom.project_tangent(&jv).norm();
        if t_part > check_tol {
            return Err(GeomError::Unclassifiable {
                detail: format!("totally real block has tangential J-image (residual {t_part:.3e})"),
            });
        }
    }

    // normal splitting: J(D_perp), csc(theta) F(D_theta), and the invariant
    // complement, built by completing inside the normal frame
    let mut j_d_perp_vecs = Vec::new();
    for v in &real {
        j_d_perp_vecs.push(space.apply_j(v)?);
    }
    let j_d_perp = Basis::from_orthonormal(j_d_perp_vecs);

    let mut f_d_theta_vecs = Vec::new();
    if let Some(theta) = theta {
        let csc = 1.0 / theta.sin();
        for v in &d_theta_vecs {
            let jv = space.apply_j(v)?;
            let f_part = &jv - geom.project_tangent(&jv);
            f_d_theta_vecs.push(f_part * csc);
        }
    }
    let f_d_theta = Basis::from_orthonormal(f_d_theta_vecs);

    let image_residual = Basis::from_orthonormal(
        j_d_perp
            .iter()
            .chain(f_d_theta.iter())
            .cloned()
            .collect::<Vec<_>>(),
    )
    .orthonormality_residual(Inner::Euclidean);
    if image_residual > 1e-8 {
        return Err(GeomError::Unclassifiable {
            detail: format!("normal images are not orthonormal (residual {image_residual:.3e})"),
        });
    }

    // complement within the normal space
    let mut d_bar_vecs: Vec<DVector<f64>> = Vec::new();
    let l_target = geom.codim() - j_d_perp.len() - f_d_theta.len();
    for candidate in geom.normal_frame.iter() {
        if d_bar_vecs.len() == l_target {
            break;
        }
        let mut w = candidate.clone();
        for _ in 0..2 {
            for q in j_d_perp.iter().chain(f_d_theta.iter()).chain(d_bar_vecs.iter()) {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let norm = w.norm();
        if norm > 1e-6 {
            d_bar_vecs.push(w / norm);
        }
    }
    if d_bar_vecs.len() != l_target {
        return Err(GeomError::Unclassifiable {
            detail: "could not complete the invariant normal complement".into(),
        });
    }
    let d_bar_t = Basis::from_orthonormal(d_bar_vecs);

    // verified, not assumed: J maps the complement to itself
    for v in d_bar_t.iter() {
        let jv = space.apply_j(v)?;
        let out = (&jv - d_bar_t.project(&jv)).norm();
        if out > 1e-8 {
            return Err(GeomError::Unclassifiable {
                detail: format!(
                    "invariant normal complement is not J-invariant (residual {out:.3e})"
                ),
            });
        }
    }

    let proper = k > 0
        && n > 0
        && match theta {
            Some(t) => t.cos() != 0.0 && t.sin() != 0.0 && m > 0,
            None => false,
        };

    Ok(SlantSplit {
        d_t: hol_basis,
        d_perp: Basis::from_orthonormal(real),
        d_theta: Basis::from_orthonormal(d_theta_vecs),
        theta,
        dims: (k, n, m),
        invariant_normal_dim: l_target,
        j_d_perp,
        f_d_theta,
        d_bar_t,
        proper,
    })
}

/// Full pipeline at one point: operator, spectrum, split.
pub fn analyze_point(
    geom: &PointGeometry,
    space: &AmbientSpace,
    tols: &Tolerances,
) -> Result<SlantSplit> {
    let op = tangential_operator(geom, space)?;
    let spectrum = slant_spectrum(&op, tols)?;
    classify_point(geom, space, &spectrum, tols)
}

/// Tangential part of J applied to an ambient tangent vector.
pub fn t_of(geom: &PointGeometry, space: &AmbientSpace, v: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(geom.project_tangent(&space.apply_j(v)?))
}

/// Normal part of J applied to an ambient tangent vector.
pub fn f_of(geom: &PointGeometry, space: &AmbientSpace, v: &DVector<f64>) -> Result<DVector<f64>> {
    let jv = space.apply_j(v)?;
    let t = geom.project_tangent(&jv);
    Ok(jv - t)
}

/// Residual pair of the slant metric identities, evaluated per block with
/// the block's own angle (0 on the holomorphic block, pi/2 on the totally
/// real block, theta on the slant block):
/// max |<TU, TV> - cos^2 <U, V>| and max |<FU, FV> - sin^2 <U, V>|.
pub fn verify_slant_identities(
    geom: &PointGeometry,
    space: &AmbientSpace,
    split: &SlantSplit,
) -> Result<(f64, f64)> {
    let mut worst_t: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    let blocks: Vec<(&Basis, f64)> = [
        (&split.d_t, 0.0),
        (&split.d_perp, std::f64::consts::FRAC_PI_2),
    ]
    .into_iter()
    .chain(split.theta.map(|theta| (&split.d_theta, theta)))
    .collect();

    for (basis, angle) in blocks {
        let cos2 = angle.cos().powi(2);
        let sin2 = angle.sin().powi(2);
        for u in basis.iter() {
            let tu = t_of(geom, space, u)?;
            let fu = f_of(geom, space, u)?;
            for v in basis.iter() {
                let tv = t_of(geom, space, v)?;
                let fv = f_of(geom, space, v)?;
                let guv = u.dot(v);
                worst_t = worst_t.max((tu.dot(&tv) - cos2 * guv).abs());
                worst_f = worst_f.max((fu.dot(&fv) - sin2 * guv).abs());
            }
        }
    }
    Ok((worst_t, worst_f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::immersion::{ImmersionChart, ParamSpec};
    use approx::assert_abs_diff_eq;

    fn chart(m: usize, params: &[(&str, f64, f64)], comps: &[&str]) -> ImmersionChart {
        ImmersionChart::new(
            AmbientSpace::new(m),
            params
                .iter()
                .map(|(n, lo, hi)| ParamSpec::new(n, *lo, *hi))
                .collect(),
            comps
                .iter()
                .map(|c| parse_expression(c).unwrap())
                .collect(),
            None,
        )
        .unwrap()
    }

    fn holomorphic_plane() -> ImmersionChart {
        chart(
            2,
            &[("u", -5.0, 5.0), ("v", -5.0, 5.0)],
            &["u", "v", "0", "0"],
        )
    }

    fn totally_real_plane() -> ImmersionChart {
        chart(
            2,
            &[("u", -5.0, 5.0), ("v", -5.0, 5.0)],
            &["u", "0", "v", "0"],
        )
    }

    #[test]
    fn holomorphic_plane_operator() {
        let space = AmbientSpace::new(2);
        let geom = holomorphic_plane().point_geometry(&[0.2, 0.4]).unwrap();
        let op = tangential_operator(&geom, &space).unwrap();
        // T is the rotation by pi/2 in the (e1, e2) frame, F = 0
        assert_abs_diff_eq!(op.t[(0, 1)].abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(op.t[(0, 0)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(op.t[(1, 0)], -op.t[(0, 1)], epsilon = 1e-14);
        assert_eq!(op.f.amax(), 0.0);
        assert!(op.skewness_residual() <= 1e-12);

        let tols = Tolerances::default();
        let spectrum = slant_spectrum(&op, &tols).unwrap();
        assert_eq!(spectrum.len(), 1);
        assert_eq!(spectrum[0].value, 1.0);
        assert_eq!(spectrum[0].multiplicity, 2);

        let split = classify_point(&geom, &space, &spectrum, &tols).unwrap();
        assert_eq!(split.dims, (2, 0, 0));
        assert!(!split.proper);
        assert_eq!(split.theta_or_degenerate(), Some(0.0));
    }

    #[test]
    fn totally_real_plane_operator() {
        let space = AmbientSpace::new(2);
        let geom = totally_real_plane().point_geometry(&[0.2, 0.4]).unwrap();
        let op = tangential_operator(&geom, &space).unwrap();
        assert_eq!(op.t.amax(), 0.0);
        for col in 0..2 {
            assert_abs_diff_eq!(op.f.column(col).norm(), 1.0, epsilon = 1e-14);
        }
        let tols = Tolerances::default();
        let spectrum = slant_spectrum(&op, &tols).unwrap();
        assert_eq!(spectrum.len(), 1);
        assert_eq!(spectrum[0].value, 0.0);
        let split = classify_point(&geom, &space, &spectrum, &tols).unwrap();
        assert_eq!(split.dims, (0, 2, 0));
        assert_eq!(
            split.theta_or_degenerate(),
            Some(std::f64::consts::FRAC_PI_2)
        );
        // (e10) with theta = pi/2 reads <FU, FV> = <U, V>
        let (rt, rf) = verify_slant_identities(&geom, &space, &split).unwrap();
        assert!(rt <= 1e-12 && rf <= 1e-12);
    }

    #[test]
    fn holomorphic_plane_identity_residuals() {
        let space = AmbientSpace::new(2);
        let geom = holomorphic_plane().point_geometry(&[1.0, -0.3]).unwrap();
        let tols = Tolerances::default();
        let split = analyze_point(&geom, &space, &tols).unwrap();
        // (e9) with theta = 0 reads <TU, TV> = <U, V>
        let (rt, rf) = verify_slant_identities(&geom, &space, &split).unwrap();
        assert!(rt <= 1e-12 && rf <= 1e-12);
    }

    #[test]
    fn isometry_split_property() {
        use rand::{Rng, SeedableRng};
        let space = AmbientSpace::new(2);
        let geom = totally_real_plane().point_geometry(&[0.7, -1.1]).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut v = DVector::zeros(4);
            for (c, e) in coeffs.iter().zip(geom.tangent_frame.iter()) {
                v += e * *c;
            }
            let t = t_of(&geom, &space, &v).unwrap();
            let f = f_of(&geom, &space, &v).unwrap();
            let lhs = t.norm_squared() + f.norm_squared();
            assert!((lhs - v.norm_squared()).abs() <= 1e-10 * v.norm_squared().max(1.0));
        }
    }

    #[test]
    fn two_angle_block_is_higher_order() {
        // two slant planes at pi/6 and pi/3 stacked in R^8
        let c = std::f64::consts::FRAC_PI_6.cos();
        let s = std::f64::consts::FRAC_PI_6.sin();
        let c2 = std::f64::consts::FRAC_PI_3.cos();
        let s2 = std::f64::consts::FRAC_PI_3.sin();
        let comps = [
            "a".to_string(),
            format!("b*{c}"),
            "0".to_string(),
            format!("b*{s}"),
            "c".to_string(),
            format!("e*{c2}"),
            "0".to_string(),
            format!("e*{s2}"),
        ];
        let comp_refs: Vec<&str> = comps.iter().map(|x| x.as_str()).collect();
        let ch = chart(
            4,
            &[
                ("a", -5.0, 5.0),
                ("b", -5.0, 5.0),
                ("c", -5.0, 5.0),
                ("e", -5.0, 5.0),
            ],
            &comp_refs,
        );
        let space = AmbientSpace::new(4);
        let geom = ch.point_geometry(&[0.3, 0.6, -0.2, 1.0]).unwrap();
        let tols = Tolerances::default();
        let got = analyze_point(&geom, &space, &tols);
        match got {
            Err(GeomError::HigherOrder { angles }) => {
                assert_eq!(angles.len(), 2);
                assert_abs_diff_eq!(angles[0], std::f64::consts::FRAC_PI_3, epsilon = 1e-9);
                assert_abs_diff_eq!(angles[1], std::f64::consts::FRAC_PI_6, epsilon = 1e-9);
            }
            other => panic!("expected HigherOrder, got {other:?}"),
        }
    }
}
