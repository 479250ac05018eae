//! Randomized verification suites.
//!
//! Every trial draws from its own generator seeded by `(seed, suite, trial)`, so results do
//! not depend on the thread count or scheduling.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use wstar_geom::algebra::{AlgebraElement, AlgebraShape, CMatrix, C64};
use wstar_geom::channel::KrausMap;
use wstar_geom::functional::{Functional, SUPPORT_TOL};
use wstar_geom::metric::{distribution_dim, eta_from_element, inner_product, jordan_lift, triple_tensor};
use wstar_geom::model::{make_bloch_model, make_classical_model, ClassicalFamily, RankOneUnitaryModel};
use wstar_geom::oracle::{
    ac_dimension, ac_enumeration_oracle, fisher_rao_oracle, fubini_study_gram, lift_oracle,
    rank_one_closed_form, OracleReport,
};
use wstar_geom::random::{
    haar_unitary, random_faithful, random_hermitian, random_positive_element, random_self_adjoint,
    random_unit_vector,
};
use wstar_geom::{Error, DEFAULT_TOL};

use crate::config::{Format, RunConfig, TangentSpec};
use crate::CliError;

type TrialResult = Result<(f64, String), Error>;

struct Suite {
    name: &'static str,
    tolerance: f64,
    default_trials: usize,
    trial: fn(&Context, &mut ChaCha8Rng) -> TrialResult,
}

pub const SUITE_NAMES: [&str; 12] = [
    "jordan-lie",
    "triple-identity",
    "monotonicity",
    "unitary-invariance",
    "fisher-rao",
    "bures-helstrom",
    "fubini-study",
    "triple-symmetry",
    "amari-cencov",
    "distribution-dim",
    "round-trip",
    "ac-duality",
];

fn suites() -> Vec<Suite> {
    let s = |name, tolerance, default_trials, trial| Suite {
        name,
        tolerance,
        default_trials,
        trial,
    };
    vec![
        s("jordan-lie", 1e-10, 1000, jordan_lie),
        s("triple-identity", 1e-10, 1000, triple_identity),
        s("monotonicity", 1e-9, 1000, monotonicity),
        s("unitary-invariance", 1e-10, 500, unitary_invariance),
        s("fisher-rao", 1e-10, 500, fisher_rao),
        s("bures-helstrom", 1e-9, 500, bures_helstrom),
        s("fubini-study", 1e-8, 200, fubini_study),
        s("triple-symmetry", 1e-10, 200, triple_symmetry),
        s("amari-cencov", 1e-12, 500, amari_cencov),
        s("distribution-dim", 0.0, 500, structure_dim),
        s("round-trip", 1e-10, 500, round_trip),
        s("ac-duality", 0.0, 500, ac_duality),
    ]
}

/// Inputs shared by all trials.
struct Context {
    shape: Option<AlgebraShape>,
    channel: Option<KrausMap>,
    family: ClassicalFamily,
    fd: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    #[serde(serialize_with = "report_json")]
    pub report: OracleReport,
    /// Description of the trial with the largest error.
    pub worst: String,
}

fn report_json<S: serde::Serializer>(r: &OracleReport, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("OracleReport", 5)?;
    st.serialize_field("name", &r.name)?;
    st.serialize_field("max_abs_error", &r.max_abs_error)?;
    st.serialize_field("tolerance", &r.tolerance)?;
    st.serialize_field("samples", &r.sample_count)?;
    st.serialize_field("pass", &r.pass)?;
    st.end()
}

pub(crate) fn trial_rng(seed: u64, stream: u64, trial: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&(trial as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

pub fn run(
    cfg: &RunConfig,
    cli_suites: &[String],
    cli_trials: Option<usize>,
    seed: u64,
) -> Result<Vec<SuiteOutcome>, CliError> {
    let selected: Vec<String> = if !cli_suites.is_empty() {
        cli_suites.to_vec()
    } else if !cfg.verify.suites.is_empty() {
        cfg.verify.suites.clone()
    } else {
        SUITE_NAMES.iter().map(|s| s.to_string()).collect()
    };
    let all = suites();
    for name in selected.iter().chain(cfg.verify.trials.keys()) {
        if !SUITE_NAMES.contains(&name.as_str()) {
            return Err(CliError::Config(format!(
                "unknown suite {name:?}; available: {}",
                SUITE_NAMES.join(", ")
            )));
        }
    }
    let ctx = Context {
        shape: cfg.shape()?,
        channel: cfg.channel()?,
        family: cfg.classical_family()?.unwrap_or_else(|| ClassicalFamily::simplex(3)),
        fd: matches!(cfg.tangents, TangentSpec::FiniteDifference { .. }),
    };
    let mut out = Vec::new();
    for (idx, suite) in all.iter().enumerate() {
        if !selected.iter().any(|s| s == suite.name) {
            continue;
        }
        let trials = cli_trials
            .or_else(|| cfg.verify.trials.get(suite.name).copied())
            .unwrap_or(suite.default_trials);
        let mut tolerance = cfg.tolerance(suite.name, suite.tolerance);
        if suite.name == "fisher-rao" && ctx.fd && !cfg.tolerances.contains_key("fisher-rao") {
            tolerance = 1e-6;
        }
        let results: Vec<TrialResult> = (0..trials)
            .into_par_iter()
            .map(|t| (suite.trial)(&ctx, &mut trial_rng(seed, idx as u64, t)))
            .collect();
        let mut report = OracleReport::new(suite.name, tolerance);
        let mut worst = String::from("none");
        let mut worst_err = f64::NEG_INFINITY;
        for (t, r) in results.into_iter().enumerate() {
            let (err, desc) = match r {
                Ok(v) => v,
                Err(e) => (f64::INFINITY, format!("library error: {e}")),
            };
            report.record(err);
            if err > worst_err || err.is_nan() && !worst_err.is_nan() {
                worst_err = err;
                worst = format!("trial {t}: {desc}");
            }
        }
        out.push(SuiteOutcome { report, worst });
    }
    Ok(out)
}

pub fn render(outcomes: &[SuiteOutcome], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(outcomes).expect("outcomes serialize") + "\n",
        Format::Csv => {
            let mut s = String::new();
            for o in outcomes {
                s.push_str(&o.report.to_string());
                if !o.report.pass {
                    s.push_str(&format!("  worst: {}", o.worst));
                }
                s.push('\n');
            }
            s
        }
    }
}

const MIXED_SHAPES: [&[usize]; 4] = [&[2], &[3], &[2, 3], &[1, 2, 2]];

fn pick_shape(ctx: &Context, rng: &mut ChaCha8Rng) -> AlgebraShape {
    ctx.shape
        .clone()
        .unwrap_or_else(|| AlgebraShape::new(MIXED_SHAPES[rng.random_range(0..MIXED_SHAPES.len())].to_vec()).unwrap())
}

fn random_ranks(shape: &AlgebraShape, rng: &mut ChaCha8Rng) -> Vec<usize> {
    shape.block_dims().iter().map(|&n| rng.random_range(1..=n)).collect()
}

fn jordan_lie(ctx: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let shape = pick_shape(ctx, rng);
    let [a, b, c] = std::array::from_fn(|_| random_self_adjoint(&shape, rng));
    let lhs = a.jordan_product(&b)?.jordan_product(&c)? - a.jordan_product(&b.jordan_product(&c)?)?;
    let rhs = a.lie_product(&c)?.lie_product(&b)?;
    Ok((lhs.distance(&rhs), format!("shape {shape}")))
}

fn triple_identity(ctx: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let shape = pick_shape(ctx, rng);
    let [a, b, x, y, z] = std::array::from_fn(|_| random_self_adjoint(&shape, rng));
    let t = |p: &AlgebraElement, q: &AlgebraElement, r: &AlgebraElement| p.jordan_triple(q, r);
    let lhs = t(&a, &b, &t(&x, &y, &z)?)?;
    let rhs = t(&t(&a, &b, &x)?, &y, &z)? - t(&x, &t(&b, &a, &y)?, &z)? + t(&x, &y, &t(&a, &b, &z)?)?;
    Ok((lhs.distance(&rhs), format!("shape {shape}")))
}

fn monotonicity(ctx: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let phi = match &ctx.channel {
        Some(c) => c.clone(),
        None => {
            let n: usize = rng.random_range(2..=6);
            let m: usize = rng.random_range(2..=6);
            let env = m.div_ceil(n) + rng.random_range(0..=2);
            KrausMap::random_unital(n, m, env, rng)?
        }
    };
    let codomain = phi.codomain().clone();
    let ranks = random_ranks(&codomain, rng);
    let omega = Functional::positive(random_positive_element(&codomain, &ranks, rng))?;
    let eta = eta_from_element(&omega, &random_self_adjoint(&codomain, rng))?;
    let check = phi.check_monotonicity(&omega, eta.value(), 0.0)?;
    Ok((
        (check.lhs - check.rhs).max(0.0),
        format!(
            "{} -> {}, ranks {ranks:?}, lhs {:.6e}, rhs {:.6e}",
            phi.domain(),
            codomain,
            check.lhs,
            check.rhs
        ),
    ))
}

fn unitary_invariance(_: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let n = rng.random_range(2..=6);
    let shape = AlgebraShape::full(n);
    let rank = rng.random_range(1..=n);
    let omega = Functional::positive(random_positive_element(&shape, &[rank], rng))?;
    let eta = eta_from_element(&omega, &random_self_adjoint(&shape, rng))?;
    let u = haar_unitary(n, rng);
    let before = inner_product(&omega, eta.value(), eta.value())?;
    let pushed = eta.value().conjugate(&u)?;
    let after = inner_product(&omega.conjugate(&u)?, &pushed, &pushed)?;
    Ok(((before - after).abs(), format!("n {n}, rank {rank}")))
}

fn interior_point(domain: &[(f64, f64)], rng: &mut ChaCha8Rng) -> Vec<f64> {
    domain
        .iter()
        .map(|&(lo, hi)| {
            let a = if lo.is_finite() { lo } else { -2.0 };
            let b = if hi.is_finite() { hi } else { a.max(0.0) + 3.0 };
            let margin = 0.05 * (b - a);
            rng.random_range(a + margin..b - margin)
        })
        .collect()
}

fn fisher_rao(ctx: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let mut model = make_classical_model(&ctx.family);
    if ctx.fd {
        model = model.with_finite_differences(Default::default());
    }
    let m = interior_point(ctx.family.domain(), rng);
    let g = model.metric_tensor(&m)?;
    let oracle = fisher_rao_oracle(&ctx.family, &m)?;
    Ok((g.max_abs_diff(&oracle.entries), format!("{} at m = {m:?}", ctx.family.name())))
}

fn bures_helstrom(_: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let model = make_bloch_model();
    let r = loop {
        let r: Vec<f64> = (0..3).map(|_| rng.random_range(-0.99..0.99)).collect();
        if r.iter().map(|x| x * x).sum::<f64>() < 0.98 {
            break r;
        }
    };
    let g = model.metric_tensor(&r)?;
    let point = model.point(&r)?;
    let tangents = model.coordinate_tangents(&r)?;
    let lifts = tangents
        .iter()
        .map(|t| lift_oracle(&point, t))
        .collect::<Result<Vec<_>, _>>()?;
    let oracle = DMatrix::from_fn(3, 3, |i, j| {
        tangents[j].evaluate(lifts[i].element()).map_or(f64::NAN, |z| z.re)
    });
    Ok((g.max_abs_diff(&oracle), format!("r = {r:?}")))
}

/// Unit reference vector with generators shifted to make `iHφ ⟂ φ`.
fn fubini_study(_: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let n = rng.random_range(2..=8);
    let k = rng.random_range(1..=4);
    let phi = random_unit_vector(n, rng);
    let gens: Vec<CMatrix> = (0..k)
        .map(|_| {
            let h = random_hermitian(n, rng);
            let mean = phi.dotc(&(&h * &phi)).re;
            h - CMatrix::identity(n, n) * C64::new(mean, 0.0)
        })
        .collect();
    let tangents: Vec<DVector<C64>> = gens.iter().map(|h| (h * &phi) * C64::new(0.0, 1.0)).collect();
    let model = RankOneUnitaryModel::new(phi.clone(), gens)?;
    let g = model.to_model().metric_tensor(&vec![0.0; k])?;
    let fs = fubini_study_gram(&phi, &tangents) * 4.0;
    let cf = rank_one_closed_form(&phi, &tangents);
    let err = g.max_abs_diff(&fs).max(g.max_abs_diff(&cf.entries));
    Ok((err, format!("n {n}, {k} generators")))
}

fn triple_symmetry(ctx: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let shape = pick_shape(ctx, rng);
    let omega = Functional::positive(random_faithful(&shape, rng))?;
    let [a, b, c] = std::array::from_fn(|_| Functional::new(random_self_adjoint(&shape, rng)).unwrap());
    // symmetric in the outer variables only
    let base = triple_tensor(&omega, &a, &b, &c)?;
    let swapped = triple_tensor(&omega, &c, &b, &a)?;
    Ok(((swapped - base).abs() / base.abs().max(1.0), format!("shape {shape}, T = {base:.6e}")))
}

fn amari_cencov(_: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let n = rng.random_range(2..=6);
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let omega = Functional::positive(AlgebraElement::abelian(&w))?;
    let [a, b, c]: [Vec<f64>; 3] = std::array::from_fn(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    let eta = |x: &[f64]| eta_from_element(&omega, &AlgebraElement::abelian(x));
    let t = triple_tensor(&omega, eta(&a)?.value(), eta(&b)?.value(), eta(&c)?.value())?;
    let expected: f64 = (0..n).map(|i| w[i] * a[i] * b[i] * c[i]).sum();
    Ok(((t - expected).abs(), format!("weights {w:?}")))
}

fn structure_dim(_: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let blocks = rng.random_range(1..=3);
    let dims: Vec<usize> = (0..blocks).map(|_| rng.random_range(1..=4)).collect();
    let ranks: Vec<usize> = dims.iter().map(|&n| rng.random_range(0..=n)).collect();
    let shape = AlgebraShape::new(dims.clone())?;
    let omega = Functional::positive(random_positive_element(&shape, &ranks, rng))?;
    let got = distribution_dim(&omega);
    let expected = ac_dimension(&dims, &ranks);
    let err = if got == expected { 0.0 } else { 1.0 };
    Ok((err, format!("dims {dims:?}, ranks {ranks:?}, got {got}, expected {expected}")))
}

fn round_trip(ctx: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let shape = pick_shape(ctx, rng);
    let ranks = random_ranks(&shape, rng);
    let omega = Functional::positive(random_positive_element(&shape, &ranks, rng))?;
    let dec = omega.support_projection(SUPPORT_TOL)?;
    let a = random_self_adjoint(&shape, rng);
    let eta = eta_from_element(&omega, &a)?;
    let lifted = jordan_lift(&omega, eta.value(), DEFAULT_TOL)?;
    let expected = &a - &dec.block_decompose(&a)?.qq;
    Ok((lifted.element().distance(&expected), format!("shape {shape}, ranks {ranks:?}")))
}

fn ac_duality(ctx: &Context, rng: &mut ChaCha8Rng) -> TrialResult {
    let shape = pick_shape(ctx, rng);
    let ranks = random_ranks(&shape, rng);
    let omega = Functional::positive(random_positive_element(&shape, &ranks, rng))?;
    let xi = if rng.random::<bool>() {
        eta_from_element(&omega, &random_self_adjoint(&shape, rng))?.value().clone()
    } else {
        Functional::new(random_self_adjoint(&shape, rng))?
    };
    let direct = xi.is_absolutely_continuous(&omega, DEFAULT_TOL)?;
    let oracle = ac_enumeration_oracle(&xi, &omega, 8, DEFAULT_TOL, rng)?;
    let err = if direct == oracle { 0.0 } else { 1.0 };
    Ok((err, format!("shape {shape}, ranks {ranks:?}, direct {direct}, oracle {oracle}")))
}
