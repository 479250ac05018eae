//! The Jordan metric `G_ω(η_a, η_b) = ω({a, b})` and related tensors.
//!
//! A self-adjoint `a` determines the tangent functional `η_a(b) = ω({a, b})`, whose density
//! is `(ρ̃a + aρ̃)/2`. The Jordan lift inverts this map: in the eigenbasis of `ρ̃` with
//! eigenvalues `λ_i`, `a_ij = 2η̃_ij / (λ_i + λ_j)` away from the kernel corner, and the
//! `qq` corner of `a` is set to zero (it lies in the Gel'fand ideal and is invisible to `η_a`).

use nalgebra::DMatrix;

use crate::algebra::{hermitian_eigen, AlgebraElement, CMatrix, C64, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::functional::{Functional, SUPPORT_TOL};

/// Relative threshold below which `λ_i + λ_j` counts as zero in the lift.
pub const LIFT_SINGULAR_TOL: f64 = 1e-12;

/// An element of `AC_ω` attached to its base point.
#[derive(Clone, Debug)]
pub struct TangentFunctional {
    base: Functional,
    value: Functional,
}

impl TangentFunctional {
    /// Checks that `base` is positive and that `value` does not charge its kernel.
    pub fn new(base: Functional, value: Functional, tol: f64) -> Result<Self> {
        let kernel = value.kernel_block_norm(&base)?;
        if kernel > tol {
            return Err(Error::NotAbsolutelyContinuous(kernel));
        }
        Ok(Self { base, value })
    }

    pub fn base(&self) -> &Functional {
        &self.base
    }

    pub fn value(&self) -> &Functional {
        &self.value
    }

    pub fn lift(&self, tol: f64) -> Result<LiftedElement> {
        jordan_lift(&self.base, &self.value, tol)
    }
}

/// Self-adjoint representative in `(A_pp ⊕ A_pq ⊕ A_qp)_sa` of a tangent functional.
#[derive(Clone, Debug)]
pub struct LiftedElement {
    element: AlgebraElement,
}

impl LiftedElement {
    pub(crate) fn from_element(element: AlgebraElement) -> Self {
        Self { element }
    }

    pub fn element(&self) -> &AlgebraElement {
        &self.element
    }

    pub fn into_element(self) -> AlgebraElement {
        self.element
    }
}

/// `η_a` with density `(ρ̃a + aρ̃)/2`.
pub fn eta_from_element(omega: &Functional, a: &AlgebraElement) -> Result<TangentFunctional> {
    omega.require_positive()?;
    let dev = a.self_adjoint_deviation();
    if dev > DEFAULT_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotSelfAdjoint(dev));
    }
    let density = omega.density().jordan_product(a)?;
    Ok(TangentFunctional {
        base: omega.clone(),
        value: Functional::new(density)?,
    })
}

/// Eigendecomposition of a positive functional, reused across several lifts.
#[derive(Clone, Debug)]
pub struct JordanLift {
    omega: Functional,
    blocks: Vec<(Vec<f64>, CMatrix)>,
    support_threshold: f64,
    singular_threshold: f64,
}

impl JordanLift {
    pub fn new(omega: &Functional) -> Result<Self> {
        omega.require_positive()?;
        let blocks: Vec<_> = omega.density().blocks().iter().map(hermitian_eigen).collect();
        let lmax = blocks
            .iter()
            .flat_map(|(l, _)| l.iter().copied())
            .fold(0.0, f64::max);
        Ok(Self {
            omega: omega.clone(),
            blocks,
            support_threshold: SUPPORT_TOL * lmax,
            singular_threshold: LIFT_SINGULAR_TOL * lmax,
        })
    }

    pub fn base(&self) -> &Functional {
        &self.omega
    }

    /// True when every eigenvalue lies in the support.
    pub fn is_faithful(&self) -> bool {
        self.support_threshold > 0.0
            && self
                .blocks
                .iter()
                .all(|(l, _)| l.iter().all(|&x| x > self.support_threshold))
    }

    /// Solves `ρ̃a + aρ̃ = 2η̃` on `A_sa^ω`, rejecting `η` that charges the kernel by more than `tol`.
    pub fn lift(&self, eta: &Functional, tol: f64) -> Result<LiftedElement> {
        self.omega.shape().check_same(eta.shape())?;
        let mut out = Vec::with_capacity(self.blocks.len());
        for ((vals, vecs), eta_block) in self.blocks.iter().zip(eta.density().blocks()) {
            let n = vals.len();
            let rotated = vecs.adjoint() * eta_block * vecs;
            let in_kernel: Vec<bool> = vals.iter().map(|&l| l <= self.support_threshold).collect();

            let kernel_idx: Vec<usize> = (0..n).filter(|&i| in_kernel[i]).collect();
            if !kernel_idx.is_empty() {
                let k = kernel_idx.len();
                let sub = CMatrix::from_fn(k, k, |i, j| rotated[(kernel_idx[i], kernel_idx[j])]);
                let norm = sub.singular_values().max();
                if norm > tol {
                    return Err(Error::NotAbsolutelyContinuous(norm));
                }
            }

            let lifted = CMatrix::from_fn(n, n, |i, j| {
                let denom = vals[i] + vals[j];
                if (in_kernel[i] && in_kernel[j]) || denom <= self.singular_threshold {
                    C64::new(0.0, 0.0)
                } else {
                    rotated[(i, j)] * (2.0 / denom)
                }
            });
            let a = vecs * lifted * vecs.adjoint();
            out.push((&a + a.adjoint()) * C64::new(0.5, 0.0));
        }
        Ok(LiftedElement {
            element: AlgebraElement::from_blocks_with_shape(self.omega.shape(), out)?,
        })
    }

    /// `G_ω(η₁, η₂) = η₂(a₁)` with `a₁` the lift of `η₁`.
    pub fn inner_product(&self, eta1: &Functional, eta2: &Functional) -> Result<f64> {
        let a1 = self.lift(eta1, DEFAULT_TOL)?;
        Ok(eta2.evaluate(a1.element())?.re)
    }
}

pub fn jordan_lift(omega: &Functional, eta: &Functional, tol: f64) -> Result<LiftedElement> {
    JordanLift::new(omega)?.lift(eta, tol)
}

/// `G_ω(η₁, η₂)`; both tangents must lie in `AC_ω`.
pub fn inner_product(omega: &Functional, eta1: &Functional, eta2: &Functional) -> Result<f64> {
    let solver = JordanLift::new(omega)?;
    // η₂ must also be a legitimate tangent at ω
    solver.lift(eta2, DEFAULT_TOL)?;
    solver.inner_product(eta1, eta2)
}

/// `R_ξ(a, b) = ξ({a, b})`.
pub fn jordan_tensor(xi: &Functional, a: &AlgebraElement, b: &AlgebraElement) -> Result<f64> {
    Ok(xi.evaluate(&a.jordan_product(b)?)?.re)
}

/// Orthonormal basis of `n × n` Hermitian matrices for the pairing `Re Tr(AB)`.
pub(crate) fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut m = CMatrix::zeros(n, n);
        m[(i, i)] = C64::new(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut re = CMatrix::zeros(n, n);
            re[(i, j)] = C64::new(s, 0.0);
            re[(j, i)] = C64::new(s, 0.0);
            basis.push(re);
            let mut im = CMatrix::zeros(n, n);
            im[(i, j)] = C64::new(0.0, -s);
            im[(j, i)] = C64::new(0.0, s);
            basis.push(im);
        }
    }
    basis
}

/// Real coordinates of a Hermitian matrix in [`hermitian_basis`].
pub(crate) fn hermitian_coords(m: &CMatrix, basis: &[CMatrix]) -> Vec<f64> {
    basis
        .iter()
        .map(|b| crate::functional::trace_of_product(b, m).re)
        .collect()
}

/// Rank of `a ↦ (ξ̃a + aξ̃)/2` on `A_sa`, i.e. the dimension of the canonical distribution at `ξ`.
pub fn distribution_dim(xi: &Functional) -> usize {
    let scale = xi
        .density()
        .eigenvalues()
        .into_iter()
        .flatten()
        .map(f64::abs)
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let threshold = 1e-10 * scale;
    xi.density()
        .blocks()
        .iter()
        .map(|rho| {
            let n = rho.nrows();
            let basis = hermitian_basis(n);
            let d = basis.len();
            let mut map = DMatrix::<f64>::zeros(d, d);
            for (col, b) in basis.iter().enumerate() {
                let image = (rho * b + b * rho) * C64::new(0.5, 0.0);
                for (row, v) in hermitian_coords(&image, &basis).into_iter().enumerate() {
                    map[(row, col)] = v;
                }
            }
            map.singular_values().iter().filter(|&&s| s > threshold).count()
        })
        .sum()
}

/// `T_ω(η_a, η_b, η_c) = ω({a, b, c})`, defined for faithful `ω` only.
pub fn triple_tensor(
    omega: &Functional,
    eta_a: &Functional,
    eta_b: &Functional,
    eta_c: &Functional,
) -> Result<f64> {
    let solver = JordanLift::new(omega)?;
    if !solver.is_faithful() {
        return Err(Error::NotFaithful(omega.density().min_eigenvalue()));
    }
    let a = solver.lift(eta_a, DEFAULT_TOL)?;
    let b = solver.lift(eta_b, DEFAULT_TOL)?;
    let c = solver.lift(eta_c, DEFAULT_TOL)?;
    let t = a.element().jordan_triple(b.element(), c.element())?;
    Ok(omega.evaluate(&t)?.re)
}
