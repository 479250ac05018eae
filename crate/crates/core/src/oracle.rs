//! Brute-force reference computations for cross-validation.
//!
//! Nothing here calls into the lift, the support projection or the metric code; the
//! oracles share only element arithmetic with the code they check.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::algebra::{AlgebraElement, CMatrix, C64};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::metric::LiftedElement;
use crate::model::{ClassicalFamily, MetricMatrix};
use crate::random::random_vector;

/// Worst-case error of one comparison run.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub max_abs_error: f64,
    pub sample_count: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_abs_error: 0.0,
            sample_count: 0,
            tolerance,
            pass: true,
        }
    }

    pub fn record(&mut self, error: f64) {
        // NaN counts as a failure
        self.max_abs_error = if error.is_nan() || self.max_abs_error.is_nan() {
            f64::NAN
        } else { self.max_abs_error.max(error) };
        self.sample_count += 1;
        self.pass = self.max_abs_error <= self.tolerance;
    }

    /// Records a boolean outcome as error 0 (agree) or 1 (disagree).
    pub fn record_agreement(&mut self, agree: bool) {
        self.record(if agree { 0.0 } else { 1.0 });
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} max_abs_error={:.3e} tol={:.1e} samples={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.max_abs_error,
            self.tolerance,
            self.sample_count
        )
    }
}

/// Solves `ρ̃a + aρ̃ = 2η̃` blockwise as one dense real linear system in the real and
/// imaginary parts of all entries of `a`. Requires a faithful `ω`.
pub fn lift_oracle(omega: &Functional, eta: &Functional) -> Result<LiftedElement> {
    if omega.shape() != eta.shape() {
        return Err(Error::ShapeMismatch {
            left: omega.shape().clone(),
            right: eta.shape().clone(),
        });
    }
    let mut blocks = Vec::new();
    for (rho, target) in omega.density().blocks().iter().zip(eta.density().blocks()) {
        let n = rho.nrows();
        let nn = n * n;
        let idx = |i: usize, j: usize| i + j * n;
        // complex operator a ↦ ρa + aρ on vec(a)
        let mut op = CMatrix::zeros(nn, nn);
        for i in 0..n {
            for j in 0..n {
                let row = idx(i, j);
                for k in 0..n {
                    op[(row, idx(k, j))] += rho[(i, k)];
                    op[(row, idx(i, k))] += rho[(k, j)];
                }
            }
        }
        let mut real = DMatrix::<f64>::zeros(2 * nn, 2 * nn);
        for r in 0..nn {
            for c in 0..nn {
                let z = op[(r, c)];
                real[(r, c)] = z.re;
                real[(r, c + nn)] = -z.im;
                real[(r + nn, c)] = z.im;
                real[(r + nn, c + nn)] = z.re;
            }
        }
        let sv = real.clone().singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        if smax == 0.0 || smin <= 1e-12 * smax {
            return Err(Error::SingularSystem);
        }
        let mut rhs = DVector::<f64>::zeros(2 * nn);
        for i in 0..n {
            for j in 0..n {
                let z = target[(i, j)] * 2.0;
                rhs[idx(i, j)] = z.re;
                rhs[idx(i, j) + nn] = z.im;
            }
        }
        let x = real.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
        blocks.push(CMatrix::from_fn(n, n, |i, j| C64::new(x[idx(i, j)], x[idx(i, j) + nn])));
    }
    let element = AlgebraElement::from_blocks_with_shape(omega.shape(), blocks)?;
    Ok(LiftedElement::from_element(element))
}

/// `g_ij = Σ_x ∂_i w_x ∂_j w_x / w_x` from the analytic weight derivatives.
pub fn fisher_rao_oracle(family: &ClassicalFamily, m: &[f64]) -> Result<MetricMatrix> {
    let w = family.weights(m);
    let jac = family.jacobian(m);
    if let Some(x) = w.iter().position(|&wx| wx <= 0.0) {
        return Err(Error::InvalidArgument(format!("weight of outcome {x} is not positive")));
    }
    let k = family.param_dim();
    let g = DMatrix::from_fn(k, k, |i, j| {
        w.iter()
            .zip(&jac)
            .map(|(wx, dx)| dx[i] * dx[j] / wx)
            .sum()
    });
    Ok(MetricMatrix {
        point: m.to_vec(),
        entries: g,
    })
}

/// `dim AC_ω = Σ_k (n_k² − (n_k − r_k)²)` from block dimensions and support ranks.
pub fn ac_dimension(block_dims: &[usize], ranks: &[usize]) -> usize {
    block_dims
        .iter()
        .zip(ranks)
        .map(|(&n, &r)| n * n - (n - r) * (n - r))
        .sum()
}

/// Tests `ξ(P) = 0` on rank-one projections `P` supported in the kernel of `ω̃`.
///
/// The kernel is read off an SVD of each density block (singular values at most
/// `1e-10 ×` the largest). Checked projections: the kernel basis vectors, the pairs
/// `(e_i + e_j)/√2` and `(e_i + i e_j)/√2` (which span the Hermitian matrices on the
/// kernel), and `samples` random unit kernel vectors.
pub fn ac_enumeration_oracle<R: Rng + ?Sized>(
    xi: &Functional,
    omega: &Functional,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<bool> {
    if omega.density().min_eigenvalue() < -1e-9 * omega.density().max_abs().max(1.0) {
        return Err(Error::NotPositive(omega.density().min_eigenvalue()));
    }
    let smax_global = omega
        .density()
        .blocks()
        .iter()
        .map(|b| b.clone().singular_values().max())
        .fold(0.0, f64::max);
    for (rho, x) in omega.density().blocks().iter().zip(xi.density().blocks()) {
        let svd = rho.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let kernel: Vec<DVector<C64>> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= 1e-10 * smax_global)
            .map(|(i, _)| v_t.row(i).adjoint())
            .collect();
        let expectation = |u: &DVector<C64>| -> f64 {
            let u = u.unscale(u.norm());
            (u.adjoint() * x * &u)[(0, 0)].norm()
        };
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut probes: Vec<DVector<C64>> = kernel.clone();
        for i in 0..kernel.len() {
            for j in (i + 1)..kernel.len() {
                probes.push((&kernel[i] + &kernel[j]) * C64::new(s, 0.0));
                probes.push((&kernel[i] + &kernel[j] * C64::new(0.0, 1.0)) * C64::new(s, 0.0));
            }
        }
        if !kernel.is_empty() {
            for _ in 0..samples {
                let coeffs = random_vector(kernel.len(), rng);
                let u = kernel
                    .iter()
                    .zip(coeffs.iter())
                    .fold(DVector::zeros(rho.nrows()), |acc, (k, &c)| acc + k * c);
                if u.norm() > 1e-8 {
                    probes.push(u);
                }
            }
        }
        if probes.iter().any(|u| expectation(u) > tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Closed form `2C_φ(⟨X|Y⟩ + ⟨Y|X⟩) + 4⟨X|φ⟩⟨Y|φ⟩` for tangent vectors at the identity.
#[derive(Clone, Debug)]
pub struct RankOneClosedForm {
    pub entries: DMatrix<f64>,
    /// Largest imaginary part discarded when reading the entries as real numbers.
    pub max_imag: f64,
}

pub fn rank_one_closed_form(phi: &DVector<C64>, tangents: &[DVector<C64>]) -> RankOneClosedForm {
    let c = phi.norm_squared();
    let k = tangents.len();
    let mut max_imag: f64 = 0.0;
    let entries = DMatrix::from_fn(k, k, |i, j| {
        let (x, y) = (&tangents[i], &tangents[j]);
        let z = (x.dotc(y) + y.dotc(x)) * (2.0 * c) + x.dotc(phi) * y.dotc(phi) * 4.0;
        max_imag = max_imag.max(z.im.abs());
        z.re
    });
    RankOneClosedForm { entries, max_imag }
}

/// `Re⟨v_i|v_j⟩` on the components of the tangents orthogonal to `φ`.
pub fn fubini_study_gram(phi: &DVector<C64>, tangents: &[DVector<C64>]) -> DMatrix<f64> {
    let c = phi.norm_squared();
    let horizontal: Vec<DVector<C64>> = tangents
        .iter()
        .map(|v| v - phi * (phi.dotc(v) / c))
        .collect();
    let k = tangents.len();
    DMatrix::from_fn(k, k, |i, j| horizontal[i].dotc(&horizontal[j]).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli, AlgebraShape, DEFAULT_TOL};
    use crate::metric::{eta_from_element, jordan_lift};
    use crate::random::{random_faithful, random_positive_element, random_self_adjoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lift_oracle_examples() {
        let omega = Functional::positive(pauli::identity() * 0.5).unwrap();
        let eta = Functional::new(pauli::z() * 0.5).unwrap();
        let a = lift_oracle(&omega, &eta).unwrap();
        assert!(a.element().distance(&pauli::z()) < 1e-13);

        let omega = Functional::positive(AlgebraElement::diagonal(&[2.0 / 3.0, 1.0 / 3.0])).unwrap();
        let eta = Functional::new(pauli::x() * (1.0 / 3.0)).unwrap();
        let a = lift_oracle(&omega, &eta).unwrap();
        assert!(a.element().distance(&(pauli::x() * (2.0 / 3.0))) < 1e-13);
    }

    #[test]
    fn lift_oracle_matches_eigenbasis_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        for _ in 0..30 {
            let omega = Functional::positive(random_faithful(&shape, &mut rng)).unwrap();
            let eta = Functional::new(random_self_adjoint(&shape, &mut rng)).unwrap();
            let a = lift_oracle(&omega, &eta).unwrap();
            let b = jordan_lift(&omega, &eta, DEFAULT_TOL).unwrap();
            assert!(a.element().distance(b.element()) < 1e-9);
        }
    }

    #[test]
    fn lift_oracle_rejects_non_faithful() {
        let omega = Functional::positive(AlgebraElement::diagonal(&[1.0, 0.0])).unwrap();
        let eta = Functional::new(pauli::x()).unwrap();
        assert!(matches!(lift_oracle(&omega, &eta), Err(Error::SingularSystem)));
    }

    #[test]
    fn fisher_rao_examples() {
        let simplex = ClassicalFamily::simplex(3);
        let g = fisher_rao_oracle(&simplex, &[1.0, 1.0, 1.0]).unwrap();
        assert!((g.entries.clone() - DMatrix::identity(3, 3)).amax() < 1e-15);
        let g = fisher_rao_oracle(&simplex, &[4.0, 1.0, 1.0]).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 1.0, 1.0]));
        assert!((g.entries - expected).amax() < 1e-15);
        assert!(fisher_rao_oracle(&simplex, &[0.0, 1.0, 1.0]).is_err());

        // textbook binomial Fisher information n / (p(1-p))
        let (n, p) = (7usize, 0.35);
        let g = fisher_rao_oracle(&ClassicalFamily::binomial(n), &[p]).unwrap();
        assert!((g.get(0, 0) - n as f64 / (p * (1.0 - p))).abs() < 1e-10);
    }

    #[test]
    fn ac_enumeration_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let omega = Functional::positive(AlgebraElement::diagonal(&[1.0, 0.0])).unwrap();
        let xi = Functional::new(pauli::x()).unwrap();
        assert!(ac_enumeration_oracle(&xi, &omega, 10, DEFAULT_TOL, &mut rng).unwrap());
        let charge = Functional::new(AlgebraElement::diagonal(&[0.0, 1.0])).unwrap();
        assert!(!ac_enumeration_oracle(&charge, &omega, 10, DEFAULT_TOL, &mut rng).unwrap());

        let shape = AlgebraShape::full(3);
        let faithful = Functional::positive(random_faithful(&shape, &mut rng)).unwrap();
        let any = Functional::new(random_self_adjoint(&shape, &mut rng)).unwrap();
        assert!(ac_enumeration_oracle(&any, &faithful, 10, DEFAULT_TOL, &mut rng).unwrap());

        for _ in 0..10 {
            let omega = Functional::positive(random_positive_element(&shape, &[1], &mut rng)).unwrap();
            let eta = eta_from_element(&omega, &random_self_adjoint(&shape, &mut rng)).unwrap();
            assert!(ac_enumeration_oracle(eta.value(), &omega, 10, DEFAULT_TOL, &mut rng).unwrap());
            let noise = Functional::new(random_self_adjoint(&shape, &mut rng)).unwrap();
            assert!(!ac_enumeration_oracle(&noise, &omega, 10, DEFAULT_TOL, &mut rng).unwrap());
        }
    }

    #[test]
    fn ac_dimension_formula() {
        assert_eq!(ac_dimension(&[2], &[2]), 4);
        assert_eq!(ac_dimension(&[2], &[1]), 3);
        assert_eq!(ac_dimension(&[1, 1, 1], &[1, 1, 0]), 2);
        assert_eq!(ac_dimension(&[4, 3], &[0, 0]), 0);
    }

    #[test]
    fn closed_form_unit_orthogonal_tangent() {
        let phi = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let v = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)]);
        let cf = rank_one_closed_form(&phi, std::slice::from_ref(&v));
        assert!((cf.entries[(0, 0)] - 4.0).abs() < 1e-15);
        assert!(cf.max_imag < 1e-15);
        assert!((fubini_study_gram(&phi, &[v])[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn report_tracks_worst_case() {
        let mut r = OracleReport::new("x", 1e-3);
        r.record(1e-4);
        r.record(5e-4);
        assert!(r.pass);
        assert_eq!(r.sample_count, 2);
        r.record(2e-3);
        assert!(!r.pass);
        r.record(0.0);
        assert_eq!(r.max_abs_error, 2e-3);
        let mut n = OracleReport::new("nan", 1.0);
        n.record(f64::NAN);
        assert!(!n.pass);
        assert!(n.to_string().starts_with("FAIL"));
    }
}
