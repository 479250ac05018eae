//! Metric evaluation over a grid or an explicit table.

use std::path::Path;

use rayon::prelude::*;

use wstar_geom::functional::Functional;
use wstar_geom::model::{gram_matrix, MetricMatrix};
use wstar_geom::DEFAULT_TOL;

use crate::config::{points_from_json_output, RunConfig, TablePoint};
use crate::output::Record;
use crate::CliError;

/// Evaluates every point, in parallel, and returns records in input order. The first
/// failing point in that order determines the error.
pub fn evaluate(cfg: &RunConfig, points_file: Option<&Path>) -> Result<Vec<Record>, CliError> {
    if let Some(table) = cfg.custom_table()? {
        let table = match points_file {
            Some(p) => select_rows(table, &points_from_json_output(p)?)?,
            None => table,
        };
        return table.par_iter().map(eval_table_point).collect::<Vec<_>>().into_iter().collect();
    }
    let model = cfg.model()?;
    let points = match points_file {
        Some(p) => points_from_json_output(p)?,
        None => {
            if cfg.grid.len() != model.param_dim() {
                return Err(CliError::Config(format!(
                    "grid has {} axes, model {} has {} parameters",
                    cfg.grid.len(),
                    model.name(),
                    model.param_dim()
                )));
            }
            cfg.grid_points()
        }
    };
    if let Some(p) = points.iter().find(|p| p.len() != model.param_dim()) {
        return Err(CliError::Config(format!("point {p:?} has the wrong number of parameters")));
    }
    points
        .par_iter()
        .map(|m| {
            let g = model.metric_tensor(m).map_err(|e| CliError::from_eval(e, m))?;
            record(g)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn eval_table_point(p: &TablePoint) -> Result<Record, CliError> {
    let omega = Functional::positive(p.density.clone()).map_err(|e| CliError::from_eval(e, &p.params))?;
    for (i, t) in p.tangents.iter().enumerate() {
        let kernel = t.kernel_block_norm(&omega).map_err(|e| CliError::from_eval(e, &p.params))?;
        if kernel > DEFAULT_TOL {
            return Err(CliError::from_eval(
                wstar_geom::Error::NotJRegular {
                    point: p.params.clone(),
                    coordinate: i,
                    kernel_norm: kernel,
                },
                &p.params,
            ));
        }
    }
    let g = gram_matrix(&p.params, &omega, &p.tangents).map_err(|e| CliError::from_eval(e, &p.params))?;
    record(g)
}

fn select_rows(table: Vec<TablePoint>, points: &[Vec<f64>]) -> Result<Vec<TablePoint>, CliError> {
    points
        .iter()
        .map(|p| {
            table
                .iter()
                .find(|row| &row.params == p)
                .cloned()
                .ok_or_else(|| CliError::Config(format!("point {p:?} is not in the custom table")))
        })
        .collect()
}

fn record(g: MetricMatrix) -> Result<Record, CliError> {
    let upper = g.upper_triangle();
    if upper.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Numerical(format!("non-finite metric at m = {:?}", g.point)));
    }
    let psd = g.is_psd();
    Ok(Record {
        params: g.point,
        metric_upper: upper,
        psd,
    })
}
