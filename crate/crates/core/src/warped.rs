//! Multiply warped product metrics: assembly from component data, analytic
//! Christoffel symbols, the covariant-derivative pattern that characterizes
//! warped products, warp recovery from an immersed chart, and triviality.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::grid::Grid;
use crate::immersion::{ImmersionChart, ParamSpec};
use crate::jet::evaluate_jet2;
use crate::linalg::SymMatrix;
use crate::tol;

/// Partition of a chart's parameters into a base block and one or two fiber
/// blocks, with optional declared warping functions over the base.
#[derive(Debug, Clone)]
pub struct BlockStructure {
    pub base: Vec<usize>,
    pub fibers: Vec<Vec<usize>>,
    pub declared_warps: Option<Vec<Expr>>,
}

impl BlockStructure {
    pub fn new(base: Vec<usize>, fibers: Vec<Vec<usize>>) -> BlockStructure {
        BlockStructure {
            base,
            fibers,
            declared_warps: None,
        }
    }

    pub fn with_warps(mut self, warps: Vec<Expr>) -> BlockStructure {
        self.declared_warps = Some(warps);
        self
    }

    /// The index sets must partition 0..d; at most two fibers are audited.
    pub fn validate(&self, d: usize) -> Result<()> {
        let mut seen = vec![false; d];
        let mut mark = |idx: &Vec<usize>| -> Result<()> {
            for &i in idx {
                if i >= d || seen[i] {
                    return Err(GeomError::InvalidChart {
                        detail: format!("block index {i} is out of range or repeated"),
                    });
                }
                seen[i] = true;
            }
            Ok(())
        };
        mark(&self.base)?;
        for fiber in &self.fibers {
            mark(fiber)?;
        }
        if !seen.iter().all(|&s| s) {
            return Err(GeomError::InvalidChart {
                detail: "block index sets do not cover every parameter".into(),
            });
        }
        if self.fibers.len() > 2 {
            return Err(GeomError::InvalidChart {
                detail: format!("{} fibers declared; at most 2 are supported", self.fibers.len()),
            });
        }
        if let Some(w) = &self.declared_warps {
            if w.len() != self.fibers.len() {
                return Err(GeomError::InvalidChart {
                    detail: "one warping function required per fiber".into(),
                });
            }
        }
        Ok(())
    }
}

/// One fiber of an abstract warped product: its parameter indices, its own
/// metric (expressions over its parameters), and the warp over the base.
#[derive(Debug, Clone)]
pub struct FiberSpec {
    pub indices: Vec<usize>,
    pub metric: Vec<Vec<Expr>>,
    pub warp: Expr,
}

/// Base metric, fiber metrics, and warping functions of a multiply warped
/// product, all expression-valued over a shared parameter list. The
/// assembler accepts any number of fibers; the audit layer restricts to two.
#[derive(Debug, Clone)]
pub struct WarpedProductSpec {
    pub params: Vec<ParamSpec>,
    pub base_indices: Vec<usize>,
    pub base_metric: Vec<Vec<Expr>>,
    pub fibers: Vec<FiberSpec>,
}

impl WarpedProductSpec {
    fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    fn dim(&self) -> usize {
        self.params.len()
    }

    /// Metric entry (i, j) as a jet at `point`: block diagonal, with fiber
    /// blocks scaled by the squared warp.
    fn entry_jet(&self, i: usize, j: usize, point: &[f64]) -> Result<Option<crate::jet::Jet2>> {
        let names = self.names();
        if let (Some(bi), Some(bj)) = (
            self.base_indices.iter().position(|&k| k == i),
            self.base_indices.iter().position(|&k| k == j),
        ) {
            return Ok(Some(evaluate_jet2(&self.base_metric[bi][bj], &names, point)?));
        }
        for fiber in &self.fibers {
            if let (Some(fi), Some(fj)) = (
                fiber.indices.iter().position(|&k| k == i),
                fiber.indices.iter().position(|&k| k == j),
            ) {
                let warp = evaluate_jet2(&fiber.warp, &names, point)?;
                if warp.value <= 0.0 {
                    return Err(GeomError::DomainError {
                        detail: format!("warping function is not positive ({})", warp.value),
                    });
                }
                let scale = mul_jets(&warp, &warp);
                let entry = evaluate_jet2(&fiber.metric[fi][fj], &names, point)?;
                return Ok(Some(mul_jets(&scale, &entry)));
            }
        }
        Ok(None) // cross-block entry: identically zero
    }
}

fn mul_jets(a: &crate::jet::Jet2, b: &crate::jet::Jet2) -> crate::jet::Jet2 {
    let cross = &a.grad * b.grad.transpose();
    crate::jet::Jet2 {
        value: a.value * b.value,
        grad: &a.grad * b.value + &b.grad * a.value,
        hess: &a.hess * b.value + &b.hess * a.value + &cross + cross.transpose(),
    }
}

/// Assemble the block-diagonal metric at `point`.
pub fn assemble_metric(spec: &WarpedProductSpec, point: &[f64]) -> Result<SymMatrix> {
    let d = spec.dim();
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            if let Some(jet) = spec.entry_jet(i, j, point)? {
                m[(i, j)] = jet.value;
                m[(j, i)] = jet.value;
            }
        }
    }
    let metric = SymMatrix::new(m)?;
    if !metric.is_positive_definite(tol::PD_TOL) {
        return Err(GeomError::NotPositiveDefinite {
            detail: "assembled warped metric is not positive definite".into(),
        });
    }
    Ok(metric)
}

/// Levi-Civita Christoffel symbols of the assembled metric, with metric
/// derivatives taken from entry jets.
pub fn christoffel_of_metric(spec: &WarpedProductSpec, point: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let d = spec.dim();
    let mut g = DMatrix::zeros(d, d);
    let mut dg = vec![DMatrix::zeros(d, d); d];
    for i in 0..d {
        for j in i..d {
            if let Some(jet) = spec.entry_jet(i, j, point)? {
                g[(i, j)] = jet.value;
                g[(j, i)] = jet.value;
                for k in 0..d {
                    dg[k][(i, j)] = jet.grad[k];
                    dg[k][(j, i)] = jet.grad[k];
                }
            }
        }
    }
    let metric = SymMatrix::new(g)?;
    let inv = metric.inverse_spd().map_err(|_| GeomError::NotPositiveDefinite {
        detail: "warped metric is not positive definite".into(),
    })?;
    let mut out = vec![DMatrix::zeros(d, d); d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += 0.5 * inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                out[k][(i, j)] = acc;
            }
        }
    }
    Ok(out)
}

/// Named residuals of the warped-product covariant-derivative pattern,
/// checked componentwise on coordinate lifts:
/// base-base derivatives reproduce the base connection, mixed base-fiber
/// derivatives equal the log-warp rate times the fiber field, cross-fiber
/// derivatives vanish, and intra-fiber derivatives equal the fiber
/// connection minus the metric times the log-warp gradient.
#[derive(Debug, Clone, Copy)]
pub struct ConnectionPatternResiduals {
    pub base_block: f64,
    pub mixed_warp: f64,
    pub cross_fiber: f64,
    pub intra_fiber: f64,
}

impl ConnectionPatternResiduals {
    pub fn max(&self) -> f64 {
        self.base_block
            .max(self.mixed_warp)
            .max(self.cross_fiber)
            .max(self.intra_fiber)
    }
}

pub fn verify_connection_pattern(
    spec: &WarpedProductSpec,
    point: &[f64],
) -> Result<ConnectionPatternResiduals> {
    let names = spec.names();
    let d = spec.dim();
    let gamma = christoffel_of_metric(spec, point)?;

    // base-only connection from the base metric alone
    let nb = spec.base_indices.len();
    let mut gb = DMatrix::zeros(nb, nb);
    let mut dgb = vec![DMatrix::zeros(nb, nb); nb];
    for a in 0..nb {
        for b in 0..nb {
            let jet = evaluate_jet2(&spec.base_metric[a][b], &names, point)?;
            gb[(a, b)] = jet.value;
            for (c, &pc) in spec.base_indices.iter().enumerate() {
                dgb[c][(a, b)] = jet.grad[pc];
            }
        }
    }
    let gb_inv = SymMatrix::new(gb.clone())?.inverse_spd()?;
    let base_gamma = |a: usize, b: usize, c: usize| -> f64 {
        let mut acc = 0.0;
        for l in 0..nb {
            acc += 0.5 * gb_inv[(c, l)] * (dgb[a][(b, l)] + dgb[b][(a, l)] - dgb[l][(a, b)]);
        }
        acc
    };

    // per-fiber data: own connection, warp jets, full metric block
    struct FiberData {
        gamma_own: Vec<DMatrix<f64>>, // fiber-local indices
        ln_warp_grad: DVector<f64>,   // full-parameter gradient of ln warp
        metric_block: DMatrix<f64>,   // full induced block (warp^2 * fiber metric)
    }
    let mut fiber_data = Vec::new();
    for fiber in &spec.fibers {
        let nf = fiber.indices.len();
        let mut gf = DMatrix::zeros(nf, nf);
        let mut dgf = vec![DMatrix::zeros(nf, nf); nf];
        for a in 0..nf {
            for b in 0..nf {
                let jet = evaluate_jet2(&fiber.metric[a][b], &names, point)?;
                gf[(a, b)] = jet.value;
                for (c, &pc) in fiber.indices.iter().enumerate() {
                    dgf[c][(a, b)] = jet.grad[pc];
                }
            }
        }
        let gf_inv = SymMatrix::new(gf.clone())?.inverse_spd()?;
        let mut gamma_own = vec![DMatrix::zeros(nf, nf); nf];
        for a in 0..nf {
            for b in 0..nf {
                for c in 0..nf {
                    let mut acc = 0.0;
                    for l in 0..nf {
                        acc +=
                            0.5 * gf_inv[(c, l)] * (dgf[a][(b, l)] + dgf[b][(a, l)] - dgf[l][(a, b)]);
                    }
                    gamma_own[c][(a, b)] = acc;
                }
            }
        }
        let warp = evaluate_jet2(&fiber.warp, &names, point)?;
        let ln_warp_grad = &warp.grad / warp.value;
        let warp_sq = warp.value * warp.value;
        let metric_block = &gf * warp_sq;
        fiber_data.push(FiberData {
            gamma_own,
            ln_warp_grad,
            metric_block,
        });
    }

    let in_base = |k: usize| spec.base_indices.contains(&k);
    let fiber_of = |k: usize| -> Option<(usize, usize)> {
        spec.fibers
            .iter()
            .enumerate()
            .find_map(|(f, spec)| spec.indices.iter().position(|&i| i == k).map(|l| (f, l)))
    };

    let mut res = ConnectionPatternResiduals {
        base_block: 0.0,
        mixed_warp: 0.0,
        cross_fiber: 0.0,
        intra_fiber: 0.0,
    };

    // base-base lower indices
    for (a, &pa) in spec.base_indices.iter().enumerate() {
        for (b, &pb) in spec.base_indices.iter().enumerate() {
            for k in 0..d {
                let got = gamma[k][(pa, pb)];
                let want = match spec.base_indices.iter().position(|&i| i == k) {
                    Some(c) => base_gamma(a, b, c),
                    None => 0.0,
                };
                res.base_block = res.base_block.max((got - want).abs());
            }
        }
    }

    // mixed base-fiber lower indices
    for &pv in &spec.base_indices {
        for (f, fiber) in spec.fibers.iter().enumerate() {
            for &px in &fiber.indices {
                for k in 0..d {
                    let got = gamma[k][(pv, px)];
                    let want = if k == px {
                        fiber_data[f].ln_warp_grad[pv]
                    } else {
                        0.0
                    };
                    res.mixed_warp = res.mixed_warp.max((got - want).abs());
                }
            }
        }
    }

    // fiber-fiber lower indices
    for (fi, fiber_i) in spec.fibers.iter().enumerate() {
        for (fj, fiber_j) in spec.fibers.iter().enumerate() {
            for (xi, &px) in fiber_i.indices.iter().enumerate() {
                for (zj, &pz) in fiber_j.indices.iter().enumerate() {
                    for k in 0..d {
                        let got = gamma[k][(px, pz)];
                        if fi != fj {
                            res.cross_fiber = res.cross_fiber.max(got.abs());
                            continue;
                        }
                        let want = if let Some((fk, lk)) = fiber_of(k) {
                            if fk == fi {
                                fiber_data[fi].gamma_own[lk][(xi, zj)]
                            } else {
                                0.0
                            }
                        } else if in_base(k) {
                            // -g(X, Z) * (grad ln f)^k in the base metric
                            let gxz = fiber_data[fi].metric_block[(xi, zj)];
                            let c = spec.base_indices.iter().position(|&i| i == k).unwrap();
                            let mut grad_k = 0.0;
                            for (l, &pl) in spec.base_indices.iter().enumerate() {
                                grad_k += gb_inv[(c, l)] * fiber_data[fi].ln_warp_grad[pl];
                            }
                            -gxz * grad_k
                        } else {
                            0.0
                        };
                        res.intra_fiber = res.intra_fiber.max((got - want).abs());
                    }
                }
            }
        }
    }

    Ok(res)
}

/// Sampled warping data for one fiber of a chart.
#[derive(Debug, Clone)]
pub struct FiberWarpSamples {
    /// Warp value at each grid point (declared values, or ratios normalized
    /// to 1 at the first grid corner when recovered).
    pub values: Vec<f64>,
    /// Full-parameter gradient of ln(warp) at each grid point.
    pub log_gradients: Vec<DVector<f64>>,
    /// Worst spread of the fiber-entry ratios at a single point.
    pub direction_spread: f64,
}

/// Result of recovering (or cross-checking declared) warping functions from
/// an immersed chart's induced metric over a grid.
#[derive(Debug, Clone)]
pub struct WarpRecovery {
    pub fibers: Vec<FiberWarpSamples>,
    pub declared: bool,
    /// Worst cross-block metric entry seen (block-diagonality residual).
    pub block_residual: f64,
}

/// Verdict of the triviality test: both warps constant over the grid.
#[derive(Debug, Clone, Copy)]
pub struct TrivialityVerdict {
    pub trivial: bool,
    pub max_log_gradient_norm: f64,
}

/// Check block-diagonality of the induced metric, recover the warping
/// functions fiber by fiber, and sample their log-gradients.
///
/// With declared warps, the induced fiber block divided by the squared warp
/// must be a function of the fiber coordinates alone, and the declared
/// expressions are sampled. Without declared warps the fiber block is
/// compared against its slice through the first grid corner, which fixes the
/// gauge warp(corner) = 1.
pub fn recover_warping(
    chart: &ImmersionChart,
    blocks: &BlockStructure,
    grid: &Grid,
) -> Result<WarpRecovery> {
    use rayon::prelude::*;

    blocks.validate(chart.dim())?;
    let names = chart.param_names();
    let n_points = grid.len();

    // induced metric and its derivatives everywhere
    let computed: Vec<Result<(SymMatrix, Vec<DMatrix<f64>>)>> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            chart.check_interior(&p)?;
            chart.metric_with_derivatives(&p)
        })
        .collect();
    let mut metrics = Vec::with_capacity(n_points);
    let mut dmetrics = Vec::with_capacity(n_points);
    for item in computed {
        let (g, dg) = item?;
        metrics.push(g);
        dmetrics.push(dg);
    }

    // block-diagonality
    let mut block_residual: f64 = 0.0;
    let block_of = |k: usize| -> usize {
        if blocks.base.contains(&k) {
            0
        } else {
            1 + blocks
                .fibers
                .iter()
                .position(|f| f.contains(&k))
                .unwrap()
        }
    };
    for g in &metrics {
        let scale = g.matrix().amax().max(1.0);
        for i in 0..chart.dim() {
            for j in 0..chart.dim() {
                if block_of(i) != block_of(j) {
                    block_residual = block_residual.max(g.get(i, j).abs() / scale);
                }
            }
        }
    }
    if block_residual > tol::IDENTITY_TOL {
        return Err(GeomError::NotBlockDiagonal {
            detail: format!("worst relative cross-block entry {block_residual:.3e}"),
        });
    }

    let declared = blocks.declared_warps.is_some();
    let mut fibers = Vec::new();
    for (f, fiber_idx) in blocks.fibers.iter().enumerate() {
        let mut values = vec![0.0; n_points];
        let mut spread_worst: f64 = 0.0;

        if let Some(warps) = &blocks.declared_warps {
            // sample the declared warp and verify G_fiber / warp^2 depends on
            // the fiber coordinates alone
            let mut shape: Vec<DMatrix<f64>> = Vec::with_capacity(n_points);
            for (pi, p) in grid.points().enumerate() {
                let w = warps[f].eval(&names, &p)?;
                if w <= 0.0 {
                    return Err(GeomError::DomainError {
                        detail: format!("declared warp is not positive ({w}) at {p:?}"),
                    });
                }
                values[pi] = w;
                let nf = fiber_idx.len();
                shape.push(DMatrix::from_fn(nf, nf, |a, b| {
                    metrics[pi].get(fiber_idx[a], fiber_idx[b]) / (w * w)
                }));
            }
            // group by fiber coordinates: the normalized block must agree with
            // the first representative of its group
            let mut groups: std::collections::BTreeMap<Vec<usize>, usize> =
                std::collections::BTreeMap::new();
            for pi in 0..n_points {
                let key = grid.key_on(pi, fiber_idx);
                let rep = *groups.entry(key).or_insert(pi);
                let scale = shape[rep].amax().max(1.0);
                spread_worst = spread_worst.max((&shape[pi] - &shape[rep]).amax() / scale);
            }
            if spread_worst > tol::IDENTITY_TOL {
                return Err(GeomError::InconsistentScaling {
                    detail: format!(
                        "fiber {f}: normalized fiber metric varies with the base (spread {spread_worst:.3e})"
                    ),
                });
            }
        } else {
            // ratio against the slice through the first grid corner
            for pi in 0..n_points {
                let ref_pi = grid.base_slice_index(pi, fiber_idx);
                let mut ratios = Vec::new();
                for a in 0..fiber_idx.len() {
                    for b in a..fiber_idx.len() {
                        let denom = metrics[ref_pi].get(fiber_idx[a], fiber_idx[b]);
                        let numer = metrics[pi].get(fiber_idx[a], fiber_idx[b]);
                        if denom.abs() > 1e-9 {
                            ratios.push(numer / denom);
                        }
                    }
                }
                if ratios.is_empty() {
                    return Err(GeomError::NotPositiveDefinite {
                        detail: format!("fiber {f} block vanishes at the reference point"),
                    });
                }
                let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
                let spread = ratios
                    .iter()
                    .map(|r| (r - mean).abs())
                    .fold(0.0f64, f64::max)
                    / mean.abs().max(1.0);
                spread_worst = spread_worst.max(spread);
                if spread > tol::IDENTITY_TOL {
                    return Err(GeomError::InconsistentScaling {
                        detail: format!(
                            "fiber {f}: scaling ratio varies across fiber directions (spread {spread:.3e})"
                        ),
                    });
                }
                values[pi] = mean.max(0.0).sqrt();
            }
            // the recovered squared warp must not depend on fiber coordinates
            // (of this or the other fiber): group by base multi-index
            let mut groups: std::collections::BTreeMap<Vec<usize>, usize> =
                std::collections::BTreeMap::new();
            for pi in 0..n_points {
                let key = grid.key_on(pi, &blocks.base);
                let rep = *groups.entry(key).or_insert(pi);
                let diff = (values[pi] - values[rep]).abs() / values[rep].abs().max(1.0);
                if diff > tol::IDENTITY_TOL {
                    return Err(GeomError::InconsistentScaling {
                        detail: format!(
                            "fiber {f}: recovered warp varies along fiber directions (spread {diff:.3e})"
                        ),
                    });
                }
            }
        }

        // log-gradients: jets of the declared warp, or the metric-entry route
        // d(ln f) = d(ln G_aa) / 2 restricted to the base.
        let mut log_gradients = Vec::with_capacity(n_points);
        for (pi, p) in grid.points().enumerate() {
            let grad = if let Some(warps) = &blocks.declared_warps {
                let jet = evaluate_jet2(&warps[f], &names, &p)?;
                &jet.grad / jet.value
            } else {
                log_warp_gradient_from_metric(&metrics[pi], &dmetrics[pi], &blocks.base, fiber_idx)
            };
            log_gradients.push(grad);
        }

        fibers.push(FiberWarpSamples {
            values,
            log_gradients,
            direction_spread: spread_worst,
        });
    }

    Ok(WarpRecovery {
        fibers,
        declared,
        block_residual,
    })
}

/// Base-restricted gradient of ln(warp) from induced metric derivatives:
/// for every base direction k, d_k ln f = d_k(ln G_aa) / 2, averaged over
/// the fiber diagonal.
pub(crate) fn log_warp_gradient_from_metric(
    metric: &SymMatrix,
    dmetric: &[DMatrix<f64>],
    base: &[usize],
    fiber: &[usize],
) -> DVector<f64> {
    let d = metric.dim();
    let mut grad = DVector::zeros(d);
    for &k in base {
        let mut acc = 0.0;
        for &a in fiber {
            acc += 0.5 * dmetric[k][(a, a)] / metric.get(a, a);
        }
        grad[k] = acc / fiber.len() as f64;
    }
    grad
}

/// True when every sampled log-warp gradient is below tolerance.
pub fn triviality_check(recovery: &WarpRecovery, tol: f64) -> TrivialityVerdict {
    let mut worst: f64 = 0.0;
    for fiber in &recovery.fibers {
        for g in &fiber.log_gradients {
            worst = worst.max(g.norm());
        }
    }
    TrivialityVerdict {
        trivial: worst <= tol,
        max_log_gradient_norm: worst,
    }
}
