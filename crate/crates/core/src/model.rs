//! Parametric models `m ↦ j(m)` of positive functionals and their pullback metric.
//!
//! A model is a pair of opaque callables over an open box in `R^k`: the point map
//! returning a density, and optionally an analytic tangent map. Without an analytic
//! tangent map, tangents are taken by central finite differences with one Richardson step.
//! The pullback metric is `g_ij(m) = G_{j(m)}(∂_i j, ∂_j j)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::algebra::{AlgebraElement, AlgebraShape, CMatrix, C64, DEFAULT_TOL, I};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::metric::{hermitian_basis, hermitian_coords, JordanLift};

pub type PointMap = Arc<dyn Fn(&[f64]) -> AlgebraElement + Send + Sync>;
pub type TangentMap = Arc<dyn Fn(&[f64], &[f64]) -> AlgebraElement + Send + Sync>;
pub type WeightsFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// `jacobian(m)[x][i] = ∂_i w_x(m)`.
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// Central differences with step `step × max(1, ‖m‖∞)`, optionally Richardson-refined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteDifference {
    pub step: f64,
    pub richardson: bool,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self {
            step: 1e-5,
            richardson: true,
        }
    }
}

#[derive(Clone)]
pub struct ParametricModel {
    name: String,
    shape: AlgebraShape,
    domain: Vec<(f64, f64)>,
    point_map: PointMap,
    tangent_map: Option<TangentMap>,
    fd: FiniteDifference,
}

impl fmt::Debug for ParametricModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricModel")
            .field("name", &self.name)
            .field("shape", &self.shape)
            .field("domain", &self.domain)
            .field("analytic_tangents", &self.tangent_map.is_some())
            .field("fd", &self.fd)
            .finish()
    }
}

impl ParametricModel {
    /// `domain` lists the open interval `(lo, hi)` of each parameter; bounds may be infinite.
    pub fn new(
        name: impl Into<String>,
        shape: AlgebraShape,
        domain: Vec<(f64, f64)>,
        point_map: PointMap,
    ) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::InvalidArgument("a model needs at least one parameter".into()));
        }
        if let Some((lo, hi)) = domain.iter().find(|(lo, hi)| lo.is_nan() || hi.is_nan() || lo >= hi) {
            return Err(Error::InvalidArgument(format!("empty parameter interval ({lo}, {hi})")));
        }
        Ok(Self {
            name: name.into(),
            shape,
            domain,
            point_map,
            tangent_map: None,
            fd: FiniteDifference::default(),
        })
    }

    pub fn with_tangent_map(mut self, tangent_map: TangentMap) -> Self {
        self.tangent_map = Some(tangent_map);
        self
    }

    /// Drops any analytic tangent map and differentiates numerically.
    pub fn with_finite_differences(mut self, fd: FiniteDifference) -> Self {
        self.tangent_map = None;
        self.fd = fd;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn param_dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn has_analytic_tangents(&self) -> bool {
        self.tangent_map.is_some()
    }

    pub fn contains(&self, m: &[f64]) -> bool {
        m.len() == self.param_dim()
            && m
                .iter()
                .zip(&self.domain)
                .all(|(&x, &(lo, hi))| x.is_finite() && x > lo && x < hi)
    }

    fn check_domain(&self, m: &[f64]) -> Result<()> {
        if self.contains(m) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { point: m.to_vec() })
        }
    }

    /// `j(m)`, verified to be positive.
    pub fn point(&self, m: &[f64]) -> Result<Functional> {
        self.check_domain(m)?;
        let density = (self.point_map)(m);
        self.shape.check_same(density.shape())?;
        Functional::positive(density)
    }

    /// `T_m j(direction)`.
    pub fn tangent(&self, m: &[f64], direction: &[f64]) -> Result<Functional> {
        self.check_domain(m)?;
        if direction.len() != self.param_dim() {
            return Err(Error::InvalidArgument(format!(
                "direction has {} components, model has {} parameters",
                direction.len(),
                self.param_dim()
            )));
        }
        if let Some(tm) = &self.tangent_map {
            let d = tm(m, direction);
            self.shape.check_same(d.shape())?;
            return Functional::new(d);
        }
        let mut acc = AlgebraElement::zeros(&self.shape);
        for (i, &c) in direction.iter().enumerate() {
            if c != 0.0 {
                acc = acc + &(self.partial_fd(m, i)? * c);
            }
        }
        Functional::new(acc)
    }

    /// Tangents along the coordinate directions.
    pub fn coordinate_tangents(&self, m: &[f64]) -> Result<Vec<Functional>> {
        let k = self.param_dim();
        (0..k)
            .map(|i| {
                let mut e = vec![0.0; k];
                e[i] = 1.0;
                self.tangent(m, &e)
            })
            .collect()
    }

    fn partial_fd(&self, m: &[f64], i: usize) -> Result<AlgebraElement> {
        let scale = m.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        let mut h = self.fd.step * scale;
        let floor = 1e-12 * scale;
        let shifted = |t: f64| {
            let mut x = m.to_vec();
            x[i] += t;
            x
        };
        while !(self.contains(&shifted(h)) && self.contains(&shifted(-h))) {
            h *= 0.5;
            if h < floor {
                return Err(Error::StepUnderflow { point: m.to_vec() });
            }
        }
        let central = |h: f64| {
            let plus = (self.point_map)(&shifted(h));
            let minus = (self.point_map)(&shifted(-h));
            (plus - minus) * (0.5 / h)
        };
        let coarse = central(h);
        if !self.fd.richardson {
            return Ok(coarse);
        }
        let fine = central(0.5 * h);
        Ok((fine * 4.0 - coarse) * (1.0 / 3.0))
    }

    /// Coordinate tangents are linearly independent (numerical rank `k`).
    pub fn is_locally_identifiable(&self, m: &[f64], tol: f64) -> Result<bool> {
        let point = self.point(m)?;
        let tangents = self.coordinate_tangents(m)?;
        let columns: Vec<Vec<f64>> = tangents.iter().map(real_coordinates).collect();
        let rows = columns[0].len();
        let jac = DMatrix::from_fn(rows, columns.len(), |r, c| columns[c][r]);
        let sv = jac.singular_values();
        let threshold = tol * point.norm().max(sv.max());
        let rank = sv.iter().filter(|&&s| s > threshold).count();
        Ok(rank == self.param_dim())
    }

    /// Every coordinate tangent lies in `AC_{j(m)}`, up to `tol` on the kernel corner.
    pub fn check_j_regular(&self, m: &[f64], tol: f64) -> Result<bool> {
        Ok(self.first_irregular_tangent(m, tol)?.is_none())
    }

    fn first_irregular_tangent(&self, m: &[f64], tol: f64) -> Result<Option<(usize, f64)>> {
        let point = self.point(m)?;
        for (i, t) in self.coordinate_tangents(m)?.iter().enumerate() {
            let norm = t.kernel_block_norm(&point)?;
            if norm > tol {
                return Ok(Some((i, norm)));
            }
        }
        Ok(None)
    }

    /// `g_ij(m) = G_{j(m)}(∂_i j, ∂_j j)`; fails if the model is not J-regular at `m`.
    pub fn metric_tensor(&self, m: &[f64]) -> Result<MetricMatrix> {
        if let Some((coordinate, kernel_norm)) = self.first_irregular_tangent(m, DEFAULT_TOL)? {
            return Err(Error::NotJRegular {
                point: m.to_vec(),
                coordinate,
                kernel_norm,
            });
        }
        let point = self.point(m)?;
        let tangents = self.coordinate_tangents(m)?;
        gram_matrix(m, &point, &tangents)
    }
}

/// Pullback Gram matrix of `tangents` at `point`, symmetrized.
pub fn gram_matrix(m: &[f64], point: &Functional, tangents: &[Functional]) -> Result<MetricMatrix> {
    let solver = JordanLift::new(point)?;
    let lifts = tangents
        .iter()
        .map(|t| solver.lift(t, DEFAULT_TOL))
        .collect::<Result<Vec<_>>>()?;
    let k = tangents.len();
    let mut g = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = tangents[j].evaluate(lifts[i].element())?.re;
        }
    }
    let sym = (&g + g.transpose()) * 0.5;
    Ok(MetricMatrix {
        point: m.to_vec(),
        entries: sym,
    })
}

fn real_coordinates(f: &Functional) -> Vec<f64> {
    f.density()
        .blocks()
        .iter()
        .flat_map(|b| hermitian_coords(b, &hermitian_basis(b.nrows())))
        .collect()
}

/// Metric tensor at a parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricMatrix {
    pub point: Vec<f64>,
    pub entries: DMatrix<f64>,
}

impl MetricMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Row-major upper triangle `g_11, g_12, ..., g_kk`.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let k = self.dim();
        let mut out = Vec::with_capacity(k * (k + 1) / 2);
        for i in 0..k {
            for j in i..k {
                out.push(self.entries[(i, j)]);
            }
        }
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest eigenvalue `≥ -1e-9 × max(1, max |g_ij|)`.
    pub fn is_psd(&self) -> bool {
        let scale = self.entries.amax().max(1.0);
        self.min_eigenvalue() >= -1e-9 * scale
    }

    pub fn max_abs_diff(&self, other: &DMatrix<f64>) -> f64 {
        (&self.entries - other).amax()
    }
}

/// Finite sample space model given by weights `w_x(m)` and their Jacobian `∂_i w_x(m)`.
#[derive(Clone)]
pub struct ClassicalFamily {
    name: String,
    outcomes: usize,
    domain: Vec<(f64, f64)>,
    weights: WeightsFn,
    jacobian: JacobianFn,
}

impl fmt::Debug for ClassicalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassicalFamily")
            .field("name", &self.name)
            .field("outcomes", &self.outcomes)
            .field("domain", &self.domain)
            .finish()
    }
}

impl ClassicalFamily {
    /// `jacobian(m)[x][i] = ∂_i w_x(m)`.
    pub fn new(
        name: impl Into<String>,
        outcomes: usize,
        domain: Vec<(f64, f64)>,
        weights: WeightsFn,
        jacobian: JacobianFn,
    ) -> Result<Self> {
        if outcomes == 0 || domain.is_empty() {
            return Err(Error::InvalidArgument(
                "classical family needs outcomes and parameters".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            outcomes,
            domain,
            weights,
            jacobian,
        })
    }

    /// Unnormalized weights `w_x(m) = m_x` on `(0, ∞)^n`.
    pub fn simplex(n: usize) -> Self {
        Self::new(
            "simplex",
            n,
            vec![(0.0, f64::INFINITY); n],
            Arc::new(|m: &[f64]| m.to_vec()),
            Arc::new(move |_m: &[f64]| {
                (0..n)
                    .map(|x| (0..n).map(|i| if i == x { 1.0 } else { 0.0 }).collect())
                    .collect()
            }),
        )
        .expect("valid simplex")
    }

    /// Exponential family `w_x(m) = exp(Σ_j m_j f_j(x))`; `features[x][j] = f_j(x)`.
    pub fn exponential(features: Vec<Vec<f64>>) -> Result<Self> {
        let k = features.first().map_or(0, Vec::len);
        if k == 0 || features.iter().any(|f| f.len() != k) {
            return Err(Error::InvalidArgument(
                "features must be a non-empty rectangular table".into(),
            ));
        }
        let outcomes = features.len();
        let features = Arc::new(features);
        let fw = Arc::clone(&features);
        let weights = move |m: &[f64]| -> Vec<f64> {
            fw.iter()
                .map(|f| f.iter().zip(m).map(|(a, b)| a * b).sum::<f64>().exp())
                .collect()
        };
        let weights = Arc::new(weights);
        let wj = Arc::clone(&weights);
        let fj = Arc::clone(&features);
        Self::new(
            "exponential",
            outcomes,
            vec![(f64::NEG_INFINITY, f64::INFINITY); k],
            weights,
            Arc::new(move |m: &[f64]| {
                let w = wj(m);
                fj.iter()
                    .zip(w)
                    .map(|(f, wx)| f.iter().map(|fi| fi * wx).collect())
                    .collect()
            }),
        )
    }

    /// Binomial family on `{0, ..., trials}` with success probability `p ∈ (0, 1)`.
    pub fn binomial(trials: usize) -> Self {
        let binom: Vec<f64> = (0..=trials).map(|x| binomial_coefficient(trials, x)).collect();
        let bw = binom.clone();
        let n = trials as f64;
        Self::new(
            "binomial",
            trials + 1,
            vec![(0.0, 1.0)],
            Arc::new(move |m: &[f64]| {
                let p = m[0];
                bw.iter()
                    .enumerate()
                    .map(|(x, c)| c * p.powi(x as i32) * (1.0 - p).powi((trials - x) as i32))
                    .collect()
            }),
            Arc::new(move |m: &[f64]| {
                let p = m[0];
                binom
                    .iter()
                    .enumerate()
                    .map(|(x, c)| {
                        let xf = x as f64;
                        let w = c * p.powi(x as i32) * (1.0 - p).powi((trials - x) as i32);
                        // d/dp w = w (x/p - (n-x)/(1-p))
                        vec![w * (xf / p - (n - xf) / (1.0 - p))]
                    })
                    .collect()
            }),
        )
        .expect("valid binomial")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn param_dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn weights(&self, m: &[f64]) -> Vec<f64> {
        (self.weights)(m)
    }

    pub fn jacobian(&self, m: &[f64]) -> Vec<Vec<f64>> {
        (self.jacobian)(m)
    }
}

fn binomial_coefficient(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Classical model on the Abelian algebra with one point per outcome, analytic tangents.
pub fn make_classical_model(family: &ClassicalFamily) -> ParametricModel {
    let w = Arc::clone(&family.weights);
    let jac = Arc::clone(&family.jacobian);
    ParametricModel::new(
        format!("classical/{}", family.name),
        AlgebraShape::abelian(family.outcomes),
        family.domain.clone(),
        Arc::new(move |m: &[f64]| AlgebraElement::abelian(&w(m))),
    )
    .expect("family domain is valid")
    .with_tangent_map(Arc::new(move |m: &[f64], dir: &[f64]| {
        let d: Vec<f64> = jac(m)
            .iter()
            .map(|row| row.iter().zip(dir).map(|(a, b)| a * b).sum())
            .collect();
        AlgebraElement::abelian(&d)
    }))
}

/// `j(r) = (1 + r·σ)/2` on `M_2`, parameters in `(-1, 1)^3`; points must satisfy `|r| ≤ 1`.
pub fn make_bloch_model() -> ParametricModel {
    let sigma = crate::algebra::pauli::all();
    let s2 = sigma.clone();
    ParametricModel::new(
        "bloch",
        AlgebraShape::full(2),
        vec![(-1.0, 1.0); 3],
        Arc::new(move |r: &[f64]| {
            let mut d = crate::algebra::pauli::identity();
            for (s, &x) in sigma.iter().zip(r) {
                d = d + &(s * x);
            }
            d * 0.5
        }),
    )
    .expect("valid domain")
    .with_tangent_map(Arc::new(move |_r: &[f64], dir: &[f64]| {
        let mut d = AlgebraElement::zeros(&AlgebraShape::full(2));
        for (s, &x) in s2.iter().zip(dir) {
            d = d + &(s * (0.5 * x));
        }
        d
    }))
}

/// Orbit model `m ↦ |U(m)φ⟩⟨U(m)φ|` with `U(m) = exp(i Σ_j m_j H_j)`.
#[derive(Clone, Debug)]
pub struct RankOneUnitaryModel {
    phi: DVector<C64>,
    generators: Vec<CMatrix>,
}

impl RankOneUnitaryModel {
    pub fn new(phi: DVector<C64>, generators: Vec<CMatrix>) -> Result<Self> {
        let n = phi.len();
        if n == 0 || phi.norm() == 0.0 {
            return Err(Error::InvalidArgument("reference vector must be nonzero".into()));
        }
        if generators.is_empty() {
            return Err(Error::InvalidArgument("at least one generator is required".into()));
        }
        for (j, h) in generators.iter().enumerate() {
            if h.nrows() != n || h.ncols() != n {
                return Err(Error::InvalidArgument(format!(
                    "generator {j} is {}x{}, expected {n}x{n}",
                    h.nrows(),
                    h.ncols()
                )));
            }
            let dev = crate::algebra::max_abs(&(h - h.adjoint()));
            if dev > DEFAULT_TOL * crate::algebra::max_abs(h).max(1.0) {
                return Err(Error::NotSelfAdjoint(dev));
            }
        }
        Ok(Self { phi, generators })
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self) -> &DVector<C64> {
        &self.phi
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    /// `C_φ = ⟨φ|φ⟩`, the constant trace of every `j(m)`.
    pub fn norm_sq(&self) -> f64 {
        self.phi.norm_squared()
    }

    fn hamiltonian(&self, m: &[f64]) -> CMatrix {
        let n = self.dim();
        self.generators
            .iter()
            .zip(m)
            .fold(CMatrix::zeros(n, n), |acc, (h, &x)| acc + h * C64::new(x, 0.0))
    }

    pub fn unitary(&self, m: &[f64]) -> CMatrix {
        let k = self.hamiltonian(m);
        let (vals, vecs) = crate::algebra::hermitian_eigen(&k);
        let n = vals.len();
        let d = CMatrix::from_fn(n, n, |i, j| if i == j { (I * vals[i]).exp() } else { C64::new(0.0, 0.0) });
        &vecs * d * vecs.adjoint()
    }

    /// `φ_m = U(m)φ`.
    pub fn state_vector(&self, m: &[f64]) -> DVector<C64> {
        self.unitary(m) * &self.phi
    }

    /// `d/dt U(m + t·dir)φ` at `t = 0`, from the divided-difference formula for the
    /// derivative of `exp(iK)` in the eigenbasis of `K`.
    pub fn tangent_vector(&self, m: &[f64], dir: &[f64]) -> DVector<C64> {
        let k = self.hamiltonian(m);
        let e = self.hamiltonian(dir);
        let (mu, v) = crate::algebra::hermitian_eigen(&k);
        let n = mu.len();
        let e_rot = v.adjoint() * e * &v;
        let gamma = CMatrix::from_fn(n, n, |a, b| {
            let half = 0.5 * (mu[a] - mu[b]);
            let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
            I * (I * (0.5 * (mu[a] + mu[b]))).exp() * sinc
        });
        let du = &v * e_rot.component_mul(&gamma) * v.adjoint();
        du * &self.phi
    }

    /// `U(m) (iH_j) φ`, the left-invariant field generated by `H_j` evaluated at `m`.
    pub fn left_invariant_vector(&self, m: &[f64], j: usize) -> DVector<C64> {
        self.unitary(m) * (&self.generators[j] * &self.phi) * I
    }

    pub fn point_density(&self, m: &[f64]) -> AlgebraElement {
        let psi = self.state_vector(m);
        AlgebraElement::from_matrix(&psi * psi.adjoint()).expect("square")
    }

    /// `|v⟩⟨ψ| + |ψ⟩⟨v|`.
    pub fn tangent_density(psi: &DVector<C64>, v: &DVector<C64>) -> AlgebraElement {
        let t = v * psi.adjoint() + psi * v.adjoint();
        AlgebraElement::from_matrix(t).expect("square")
    }

    pub fn left_invariant_tangent(&self, m: &[f64], j: usize) -> Result<Functional> {
        let psi = self.state_vector(m);
        Functional::new(Self::tangent_density(&psi, &self.left_invariant_vector(m, j)))
    }

    /// Gram matrix of the left-invariant tangents at `m`.
    pub fn left_invariant_metric(&self, m: &[f64]) -> Result<MetricMatrix> {
        let point = Functional::positive(self.point_density(m))?;
        let tangents = (0..self.generators.len())
            .map(|j| self.left_invariant_tangent(m, j))
            .collect::<Result<Vec<_>>>()?;
        gram_matrix(m, &point, &tangents)
    }

    pub fn to_model(&self) -> ParametricModel {
        let k = self.generators.len();
        let point = self.clone();
        let tangent = self.clone();
        ParametricModel::new(
            "rank_one_unitary",
            AlgebraShape::full(self.dim()),
            vec![(f64::NEG_INFINITY, f64::INFINITY); k],
            Arc::new(move |m: &[f64]| point.point_density(m)),
        )
        .expect("valid domain")
        .with_tangent_map(Arc::new(move |m: &[f64], dir: &[f64]| {
            let psi = tangent.state_vector(m);
            Self::tangent_density(&psi, &tangent.tangent_vector(m, dir))
        }))
    }
}

pub fn make_rank_one_unitary_model(
    phi: DVector<C64>,
    generators: Vec<CMatrix>,
) -> Result<ParametricModel> {
    Ok(RankOneUnitaryModel::new(phi, generators)?.to_model())
}
