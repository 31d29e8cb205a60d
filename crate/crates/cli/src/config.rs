//! JSON chart configuration: the single input document the CLI accepts
//! besides catalog names.

use serde::Deserialize;

use slantgeom::catalog::CatalogEntry;
use slantgeom::expr::parse_expression;
use slantgeom::immersion::{ImmersionChart, ParamSpec};
use slantgeom::warped::BlockStructure;
use slantgeom::{AmbientSpace, Tolerances};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    /// Complex dimension m of the ambient space (2m real coordinates).
    pub complex_dim: usize,
    pub params: Vec<ParamConfig>,
    /// One expression string per ambient coordinate (2m of them).
    pub components: Vec<String>,
    pub blocks: Option<BlocksConfig>,
    /// Warping functions over the base parameters, one per fiber.
    pub warps: Option<Vec<String>>,
    /// Closed sampling box per parameter; defaults to a 5% inset of the
    /// open domain box.
    pub sample_box: Option<Vec<[f64; 2]>>,
    pub grid: Option<GridConfig>,
    pub tolerances: Option<TolConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamConfig {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocksConfig {
    pub base: Vec<usize>,
    pub fiber1: Vec<usize>,
    pub fiber2: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points_per_axis: usize,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TolConfig {
    pub identity: Option<f64>,
    pub audit: Option<f64>,
    pub slack: Option<f64>,
    pub cluster: Option<f64>,
    pub triviality: Option<f64>,
}

/// A resolved target: a chart plus the sampling and tolerance context the
/// commands run with.
pub struct Target {
    pub name: String,
    pub chart: ImmersionChart,
    pub sample_box: Vec<(f64, f64)>,
    pub grid_points: Option<usize>,
    pub tols: Tolerances,
    pub excluded_values: Vec<(usize, f64)>,
}

impl ChartConfig {
    pub fn into_target(self, name: String) -> Result<Target, String> {
        let params: Vec<ParamSpec> = self
            .params
            .iter()
            .map(|p| ParamSpec::new(&p.name, p.min, p.max))
            .collect();
        let components = self
            .components
            .iter()
            .map(|s| parse_expression(s).map_err(|e| format!("component `{s}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        let blocks = match self.blocks {
            Some(b) => {
                let mut fibers = vec![b.fiber1];
                if let Some(f2) = b.fiber2 {
                    fibers.push(f2);
                }
                let mut blocks = BlockStructure::new(b.base, fibers);
                if let Some(warps) = &self.warps {
                    let parsed = warps
                        .iter()
                        .map(|s| parse_expression(s).map_err(|e| format!("warp `{s}`: {e}")))
                        .collect::<Result<Vec<_>, _>>()?;
                    blocks = blocks.with_warps(parsed);
                }
                Some(blocks)
            }
            None => {
                if self.warps.is_some() {
                    return Err("warps given without a block structure".into());
                }
                None
            }
        };
        let chart = ImmersionChart::new(AmbientSpace::new(self.complex_dim), params, components, blocks)
            .map_err(|e| e.to_string())?;

        let sample_box = match self.sample_box {
            Some(bx) => {
                if bx.len() != chart.dim() {
                    return Err(format!(
                        "sample_box has {} entries for {} parameters",
                        bx.len(),
                        chart.dim()
                    ));
                }
                bx.iter().map(|[lo, hi]| (*lo, *hi)).collect()
            }
            None => chart
                .params
                .iter()
                .map(|p| {
                    let inset = 0.05 * (p.upper - p.lower);
                    (p.lower + inset, p.upper - inset)
                })
                .collect(),
        };
        for (spec, &(lo, hi)) in chart.params.iter().zip(&sample_box) {
            if !(spec.lower < lo && lo <= hi && hi < spec.upper) {
                return Err(format!(
                    "sample box [{lo}, {hi}] is not strictly inside the open domain of `{}`",
                    spec.name
                ));
            }
        }

        let mut tols = Tolerances::default();
        if let Some(t) = self.tolerances {
            if let Some(v) = t.identity {
                tols.identity = v;
            }
            if let Some(v) = t.audit {
                tols.audit = v;
            }
            if let Some(v) = t.slack {
                tols.slack = v;
            }
            if let Some(v) = t.cluster {
                tols.cluster = v;
            }
            if let Some(v) = t.triviality {
                tols.triviality = v;
            }
        }

        Ok(Target {
            name,
            chart,
            sample_box,
            grid_points: self.grid.map(|g| g.points_per_axis),
            tols,
            excluded_values: Vec::new(),
        })
    }
}

impl From<CatalogEntry> for Target {
    fn from(entry: CatalogEntry) -> Target {
        Target {
            name: entry.name.to_string(),
            chart: entry.chart,
            sample_box: entry.sample_box,
            grid_points: None,
            tols: Tolerances::default(),
            excluded_values: entry.excluded_values,
        }
    }
}
