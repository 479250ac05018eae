//! Side-by-side comparison of library results with the independent oracles.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use wstar_geom::algebra::{AlgebraShape, CMatrix, C64};
use wstar_geom::functional::Functional;
use wstar_geom::metric::{eta_from_element, JordanLift};
use wstar_geom::model::{make_classical_model, ClassicalFamily, FiniteDifference, RankOneUnitaryModel};
use wstar_geom::oracle::{fisher_rao_oracle, lift_oracle, rank_one_closed_form, OracleReport};
use wstar_geom::random::{random_faithful, random_hermitian, random_self_adjoint, random_unit_vector};
use wstar_geom::{Error, DEFAULT_TOL};

use crate::config::{Format, RunConfig};
use crate::verify::trial_rng;
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
struct ReportRow<'a> {
    name: &'a str,
    max_abs_error: f64,
    tolerance: f64,
    samples: usize,
    pass: bool,
}

const DEFAULT_TRIALS: usize = 200;

pub fn run(cfg: &RunConfig, trials: Option<usize>, seed: u64) -> Result<Vec<OracleReport>, CliError> {
    let trials = trials.unwrap_or(DEFAULT_TRIALS);
    let family = cfg.classical_family()?.unwrap_or_else(|| ClassicalFamily::simplex(3));
    let rank_one = cfg.rank_one_model()?;
    let tol = |name: &str, default: f64| cfg.tolerance(name, default);

    let mut reports = Vec::new();
    let mut push = |name: &str, tolerance: f64, stream: u64, f: &(dyn Fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64, Error> + Sync)| {
        let errs: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| f(&mut trial_rng(seed, 100 + stream, t)).unwrap_or(f64::INFINITY))
            .collect();
        let mut r = OracleReport::new(name, tolerance);
        errs.into_iter().for_each(|e| r.record(e));
        reports.push(r);
    };

    push("lift/faithful-qubit", tol("lift", 1e-9), 0, &|rng| lift_error(&AlgebraShape::full(2), rng));
    push("lift/faithful-multiblock", tol("lift", 1e-9), 1, &|rng| {
        let shapes: [&[usize]; 3] = [&[3], &[2, 3], &[1, 2, 2]];
        let shape = AlgebraShape::new(shapes[rng.random_range(0..3)].to_vec())?;
        lift_error(&shape, rng)
    });

    let analytic = make_classical_model(&family);
    let fd = analytic.clone().with_finite_differences(FiniteDifference::default());
    push("classical/analytic", tol("fisher-rao", 1e-10), 2, &|rng| {
        let m = interior(&family, rng);
        Ok(analytic.metric_tensor(&m)?.max_abs_diff(&fisher_rao_oracle(&family, &m)?.entries))
    });
    push("classical/finite-difference", tol("fisher-rao-fd", 1e-6), 3, &|rng| {
        let m = interior(&family, rng);
        Ok(fd.metric_tensor(&m)?.max_abs_diff(&fisher_rao_oracle(&family, &m)?.entries))
    });

    push("rank-one/closed-form", tol("rank-one", 1e-8), 4, &|rng| {
        let model = match &rank_one {
            Some(m) => m.clone(),
            None => random_rank_one(rng)?,
        };
        let tangents: Vec<DVector<C64>> = model
            .generators()
            .iter()
            .map(|h| (h * model.phi()) * C64::new(0.0, 1.0))
            .collect();
        let cf = rank_one_closed_form(model.phi(), &tangents);
        let m: Vec<f64> = (0..tangents.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let at_identity = model.to_model().metric_tensor(&vec![0.0; tangents.len()])?;
        let transported = model.left_invariant_metric(&m)?;
        Ok(at_identity
            .max_abs_diff(&cf.entries)
            .max(transported.max_abs_diff(&cf.entries))
            .max(cf.max_imag))
    });
    Ok(reports)
}

fn lift_error(shape: &AlgebraShape, rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64, Error> {
    let omega = Functional::positive(random_faithful(shape, rng))?;
    let eta = eta_from_element(&omega, &random_self_adjoint(shape, rng))?;
    let fast = JordanLift::new(&omega)?.lift(eta.value(), DEFAULT_TOL)?;
    let slow = lift_oracle(&omega, eta.value())?;
    Ok(fast.element().distance(slow.element()))
}

fn interior(family: &ClassicalFamily, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    family
        .domain()
        .iter()
        .map(|&(lo, hi)| {
            let a = if lo.is_finite() { lo } else { -2.0 };
            let b = if hi.is_finite() { hi } else { a.max(0.0) + 3.0 };
            let margin = 0.05 * (b - a);
            rng.random_range(a + margin..b - margin)
        })
        .collect()
}

fn random_rank_one(rng: &mut rand_chacha::ChaCha8Rng) -> Result<RankOneUnitaryModel, Error> {
    let n = rng.random_range(2..=8);
    let k = rng.random_range(1..=4);
    let phi = random_unit_vector(n, rng);
    let gens: Vec<CMatrix> = (0..k).map(|_| random_hermitian(n, rng)).collect();
    RankOneUnitaryModel::new(phi, gens)
}

pub fn render(reports: &[OracleReport], format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<ReportRow> = reports
                .iter()
                .map(|r| ReportRow {
                    name: &r.name,
                    max_abs_error: r.max_abs_error,
                    tolerance: r.tolerance,
                    samples: r.sample_count,
                    pass: r.pass,
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("reports serialize") + "\n"
        }
        Format::Csv => reports.iter().map(|r| format!("{r}\n")).collect(),
    }
}
