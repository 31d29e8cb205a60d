//! Per-point extrinsic geometry of a parametrized submanifold: induced
//! metric, orthonormal frames, Christoffel symbols, second fundamental form,
//! shape operators, and mean curvature.

use nalgebra::{DMatrix, DVector};

use crate::ambient::AmbientSpace;
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::jet::evaluate_jet2;
use crate::linalg::{complete_basis, orthonormalize, Basis, Inner, SymMatrix};
use crate::tol;
use crate::warped::BlockStructure;

/// A named parameter with an open interval domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl ParamSpec {
    pub fn new(name: &str, lower: f64, upper: f64) -> ParamSpec {
        ParamSpec {
            name: name.to_string(),
            lower,
            upper,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower < v && v < self.upper
    }
}

/// A map from a d-dimensional open parameter box into R^2m, one expression
/// per ambient coordinate, with an optional base/fiber block structure.
#[derive(Debug, Clone)]
pub struct ImmersionChart {
    pub ambient: AmbientSpace,
    pub params: Vec<ParamSpec>,
    pub components: Vec<Expr>,
    pub blocks: Option<BlockStructure>,
}

/// Jets of all ambient components at one parameter point, repackaged as the
/// Jacobian columns and the vector-valued second derivatives.
pub(crate) struct ChartJets {
    /// d columns, each an ambient vector d_i phi.
    pub coord_frame: Vec<DVector<f64>>,
    /// second[i][j] = d_i d_j phi as an ambient vector (symmetric in i, j).
    pub second: Vec<Vec<DVector<f64>>>,
}

impl ImmersionChart {
    pub fn new(
        ambient: AmbientSpace,
        params: Vec<ParamSpec>,
        components: Vec<Expr>,
        blocks: Option<BlockStructure>,
    ) -> Result<ImmersionChart> {
        if components.len() != ambient.real_dim() {
            return Err(GeomError::InvalidChart {
                detail: format!(
                    "expected {} components for complex dimension {}, got {}",
                    ambient.real_dim(),
                    ambient.complex_dim(),
                    components.len()
                ),
            });
        }
        let names: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
        for expr in &components {
            for ident in expr.identifiers() {
                if !names.contains(&ident) {
                    return Err(GeomError::UnknownIdentifier {
                        name: ident.to_string(),
                    });
                }
            }
        }
        if let Some(b) = &blocks {
            b.validate(params.len())?;
            if let Some(warps) = &b.declared_warps {
                let base_names: Vec<&str> = b.base.iter().map(|&i| names[i]).collect();
                for warp in warps {
                    for ident in warp.identifiers() {
                        if !base_names.contains(&ident) {
                            return Err(GeomError::InvalidChart {
                                detail: format!(
                                    "warping function references `{ident}`, which is not a base parameter"
                                ),
                            });
                        }
                    }
                }
            }
        }
        Ok(ImmersionChart {
            ambient,
            params,
            components,
            blocks,
        })
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn check_interior(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.params.len() {
            return Err(GeomError::DimensionMismatch {
                expected: self.params.len(),
                got: point.len(),
            });
        }
        for (spec, &v) in self.params.iter().zip(point) {
            if !spec.contains(v) {
                return Err(GeomError::DomainError {
                    detail: format!(
                        "{} = {v} is outside the open box ({}, {})",
                        spec.name, spec.lower, spec.upper
                    ),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn jets(&self, point: &[f64]) -> Result<ChartJets> {
        let names = self.param_names();
        let d = self.dim();
        let n = self.ambient.real_dim();
        let mut coord_frame = vec![DVector::zeros(n); d];
        let mut second = vec![vec![DVector::zeros(n); d]; d];
        for (a, comp) in self.components.iter().enumerate() {
            let jet = evaluate_jet2(comp, &names, point)?;
            for i in 0..d {
                coord_frame[i][a] = jet.grad[i];
                for j in 0..d {
                    second[i][j][a] = jet.hess[(i, j)];
                }
            }
        }
        Ok(ChartJets {
            coord_frame,
            second,
        })
    }

    /// Ambient position of the point.
    pub fn position(&self, point: &[f64]) -> Result<DVector<f64>> {
        let names = self.param_names();
        let mut out = DVector::zeros(self.ambient.real_dim());
        for (a, comp) in self.components.iter().enumerate() {
            out[a] = comp.eval(&names, point)?;
        }
        Ok(out)
    }

    /// Full extrinsic geometry at an interior point.
    pub fn point_geometry(&self, point: &[f64]) -> Result<PointGeometry> {
        self.check_interior(point)?;
        let jets = self.jets(point)?;
        let d = self.dim();

        let metric = SymMatrix::from_fn(d, |i, j| jets.coord_frame[i].dot(&jets.coord_frame[j]));
        let chol = metric
            .matrix()
            .clone()
            .cholesky()
            .ok_or_else(|| GeomError::RankDeficient {
                detail: "Jacobian loses rank at this point (metric not positive definite)".into(),
            })?;
        let metric_inv = chol.inverse();

        let tangent_frame = orthonormalize(&jets.coord_frame, Inner::Euclidean)?;
        let normal_frame = complete_basis(&tangent_frame, self.ambient.real_dim())?;

        // h(d_i, d_j) in normal-frame coordinates, and Christoffel symbols from
        // the tangential projection: g Gamma_.ij = <d_i d_j phi, d_k phi>.
        let codim = normal_frame.len();
        let mut sff = vec![vec![DVector::zeros(codim); d]; d];
        let mut christoffel = vec![DMatrix::zeros(d, d); d];
        for i in 0..d {
            for j in i..d {
                let sec = &jets.second[i][j];
                for (t, xi) in normal_frame.iter().enumerate() {
                    sff[i][j][t] = xi.dot(sec);
                }
                sff[j][i] = sff[i][j].clone();
                let rhs = DVector::from_fn(d, |k, _| jets.coord_frame[k].dot(sec));
                let coeffs = chol.solve(&rhs);
                for k in 0..d {
                    christoffel[k][(i, j)] = coeffs[k];
                    christoffel[k][(j, i)] = coeffs[k];
                }
            }
        }

        Ok(PointGeometry {
            point: point.to_vec(),
            coord_frame: jets.coord_frame,
            second_derivs: jets.second,
            metric,
            metric_inv,
            tangent_frame,
            normal_frame,
            christoffel,
            sff,
        })
    }

    /// Induced metric and its coordinate derivatives, both assembled from
    /// component jets: d_k g_ij = <d_k d_i phi, d_j phi> + <d_i phi, d_k d_j phi>.
    pub fn metric_with_derivatives(&self, point: &[f64]) -> Result<(SymMatrix, Vec<DMatrix<f64>>)> {
        let jets = self.jets(point)?;
        let d = self.dim();
        let metric = SymMatrix::from_fn(d, |i, j| jets.coord_frame[i].dot(&jets.coord_frame[j]));
        let mut partials = vec![DMatrix::zeros(d, d); d];
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    partials[k][(i, j)] = jets.second[k][i].dot(&jets.coord_frame[j])
                        + jets.coord_frame[i].dot(&jets.second[k][j]);
                }
            }
        }
        Ok((metric, partials))
    }

    /// Christoffel symbols from the metric-derivative formula
    /// Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij);
    /// an independent route against the tangential-projection symbols.
    pub fn christoffel_from_metric_jets(&self, point: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let (metric, dg) = self.metric_with_derivatives(point)?;
        let d = self.dim();
        let inv = metric.inverse_spd()?;
        let mut out = vec![DMatrix::zeros(d, d); d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut acc = 0.0;
                    for l in 0..d {
                        acc += 0.5
                            * inv[(k, l)]
                            * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    out[k][(i, j)] = acc;
                }
            }
        }
        Ok(out)
    }
}

/// Everything the audits need at one point: frames, metric, connection, and
/// the second fundamental form.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub point: Vec<f64>,
    /// Coordinate frame d_i phi as ambient vectors.
    pub coord_frame: Vec<DVector<f64>>,
    /// Vector-valued second derivatives d_i d_j phi.
    pub second_derivs: Vec<Vec<DVector<f64>>>,
    pub metric: SymMatrix,
    pub metric_inv: DMatrix<f64>,
    pub tangent_frame: Basis,
    pub normal_frame: Basis,
    /// christoffel[k][(i, j)] = Gamma^k_ij, symmetric in (i, j).
    pub christoffel: Vec<DMatrix<f64>>,
    /// sff[i][j] = h(d_i, d_j) in normal-frame coordinates.
    pub sff: Vec<Vec<DVector<f64>>>,
}

impl PointGeometry {
    pub fn dim(&self) -> usize {
        self.coord_frame.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.coord_frame[0].len()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.dim()
    }

    /// Coordinates of an ambient tangent vector in the coordinate frame,
    /// solving g c = J^T v.
    pub fn tangent_coords(&self, v: &DVector<f64>) -> DVector<f64> {
        let rhs = DVector::from_fn(self.dim(), |k, _| self.coord_frame[k].dot(v));
        &self.metric_inv * rhs
    }

    /// Euclidean-orthogonal projection onto the tangent space.
    pub fn project_tangent(&self, v: &DVector<f64>) -> DVector<f64> {
        self.tangent_frame.project(v)
    }

    /// Residual of `v` lying in the tangent space, relative to its norm.
    pub fn tangency_residual(&self, v: &DVector<f64>) -> f64 {
        (v - self.project_tangent(v)).norm() / v.norm().max(1.0)
    }

    /// h(d_i, d_j) as an ambient (normal) vector.
    pub fn sff_coord(&self, i: usize, j: usize) -> DVector<f64> {
        let mut out = DVector::zeros(self.ambient_dim());
        for (t, xi) in self.normal_frame.iter().enumerate() {
            out += xi * self.sff[i][j][t];
        }
        out
    }

    /// h(X, Y) for arbitrary ambient tangent vectors, by bilinearity.
    pub fn sff_apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let cx = self.tangent_coords(x);
        let cy = self.tangent_coords(y);
        let mut out = DVector::zeros(self.ambient_dim());
        for i in 0..self.dim() {
            if cx[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim() {
                if cy[j] == 0.0 {
                    continue;
                }
                out += self.sff_coord(i, j) * (cx[i] * cy[j]);
            }
        }
        out
    }

    /// g(nabla_{d_i} d_j, d_k) = sum_l Gamma^l_ij g_lk.
    pub fn covariant_component(&self, i: usize, j: usize, k: usize) -> f64 {
        let mut acc = 0.0;
        for l in 0..self.dim() {
            acc += self.christoffel[l][(i, j)] * self.metric.get(l, k);
        }
        acc
    }

    /// nabla_{d_i} d_j in coordinate-frame components.
    pub fn covariant_coords(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.dim(), |k, _| self.christoffel[k][(i, j)])
    }

    /// Shape operator A_xi in the orthonormal tangent frame:
    /// A_ab = <h(e_a, e_b), xi>. `xi` must be normal at this point.
    pub fn shape_operator(&self, xi: &DVector<f64>) -> Result<SymMatrix> {
        let tangential = self.project_tangent(xi);
        let residual = tangential.norm() / xi.norm().max(1.0);
        if residual > tol::ORTHO_TOL {
            return Err(GeomError::NotNormal { residual });
        }
        let d = self.dim();
        let h = self.frame_sff();
        Ok(SymMatrix::from_fn(d, |a, b| h[a][b].dot(xi)))
    }

    /// Shape operator applied to an ambient tangent vector:
    /// A_xi v = sum_a <h(v, e_a), xi> e_a.
    pub fn shape_apply(&self, xi: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.ambient_dim());
        for e in self.tangent_frame.iter() {
            out += e * self.sff_apply(v, e).dot(xi);
        }
        out
    }

    /// Mean curvature vector H = (1/d) g^ij h(d_i, d_j).
    pub fn mean_curvature(&self) -> DVector<f64> {
        let d = self.dim();
        let mut out = DVector::zeros(self.ambient_dim());
        for i in 0..d {
            for j in 0..d {
                out += self.sff_coord(i, j) * self.metric_inv[(i, j)];
            }
        }
        out / d as f64
    }

    /// Squared norm of the second fundamental form, expanded over the
    /// orthonormal tangent frame; independent of the frame choice.
    pub fn second_fundamental_norm_sq(&self) -> f64 {
        let h = self.frame_sff();
        let d = self.dim();
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                acc += h[a][b].norm_squared();
            }
        }
        acc
    }

    /// h evaluated on all orthonormal tangent frame pairs.
    pub(crate) fn frame_sff(&self) -> Vec<Vec<DVector<f64>>> {
        let d = self.dim();
        let coords: Vec<DVector<f64>> = self
            .tangent_frame
            .iter()
            .map(|e| self.tangent_coords(e))
            .collect();
        let mut out = vec![vec![DVector::zeros(self.ambient_dim()); d]; d];
        for a in 0..d {
            for b in a..d {
                let mut acc = DVector::zeros(self.ambient_dim());
                for i in 0..d {
                    for j in 0..d {
                        let c = coords[a][i] * coords[b][j];
                        if c != 0.0 {
                            acc += self.sff_coord(i, j) * c;
                        }
                    }
                }
                out[a][b] = acc.clone();
                out[b][a] = acc;
            }
        }
        out
    }

    /// Max residual of the split d_i d_j phi = Gamma^k_ij d_k phi + h(d_i, d_j),
    /// relative to the second-derivative scale.
    pub fn gauss_split_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut rebuilt = self.sff_coord(i, j);
                for k in 0..d {
                    rebuilt += &self.coord_frame[k] * self.christoffel[k][(i, j)];
                }
                let scale = self.second_derivs[i][j].norm().max(1.0);
                worst = worst.max((&rebuilt - &self.second_derivs[i][j]).norm() / scale);
            }
        }
        worst
    }

    /// Pointwise predicate residuals, each a max over frame pairs.
    pub fn totally_geodesic_residual(&self) -> f64 {
        let h = self.frame_sff();
        let mut worst: f64 = 0.0;
        for row in &h {
            for v in row {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    /// Umbilicity residual: max over orthonormal pairs of
    /// ||h(e_a, e_b) - delta_ab H||.
    pub fn umbilic_residual(&self) -> f64 {
        let h = self.frame_sff();
        let mean = self.mean_curvature();
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let target = if a == b { mean.clone() } else { DVector::zeros(self.ambient_dim()) };
                worst = worst.max((&h[a][b] - target).norm());
            }
        }
        worst
    }
}
