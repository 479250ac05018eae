//! Finite-dimensional W*-algebras as direct sums of full complex matrix blocks.
//!
//! Every finite-dimensional W*-algebra is isomorphic to `M_{n_1} ⊕ ... ⊕ M_{n_B}`.
//! An [`AlgebraShape`] records the block dimensions and an [`AlgebraElement`] stores one
//! dense complex matrix per block. The commutative (Abelian) case is the shape with every
//! block of size one, and `B(C^n)` is the single-block shape `(n)`.
//!
//! Products follow the conventions
//!
//! - Jordan: `{a, b} = (ab + ba) / 2`
//! - Lie: `[a, b] = (ab - ba) / (2i)`
//! - Jordan triple: `{a, b, c} = {{a, b}, c} + {a, {b, c}} - {b, {a, c}}`

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Tolerance used by structural predicates (self-adjointness, positivity) unless overridden.
pub const DEFAULT_TOL: f64 = 1e-9;

pub(crate) const I: C64 = Complex { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraShape {
    block_dims: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidShape("at least one block is required".into()));
        }
        if block_dims.contains(&0) {
            return Err(Error::InvalidShape(format!(
                "block dimensions must be positive, got {block_dims:?}"
            )));
        }
        Ok(Self { block_dims })
    }

    /// `B(C^n)`: a single full matrix block.
    pub fn full(n: usize) -> Self {
        assert!(n > 0, "block dimension must be positive");
        Self { block_dims: vec![n] }
    }

    /// Commutative algebra of functions on `n` points.
    pub fn abelian(n: usize) -> Self {
        assert!(n > 0, "number of points must be positive");
        Self { block_dims: vec![1; n] }
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Complex dimension `Σ n_k²`.
    pub fn complex_dim(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    /// Real dimension of the self-adjoint part, also `Σ n_k²`.
    pub fn real_sa_dim(&self) -> usize {
        self.complex_dim()
    }

    pub fn is_abelian(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }

    pub(crate) fn check_same(&self, other: &AlgebraShape) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                left: self.clone(),
                right: other.clone(),
            })
        }
    }
}

impl fmt::Display for AlgebraShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.block_dims.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", dims.join(","))
    }
}

/// An element of a block-diagonal matrix algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<CMatrix>,
}

impl AlgebraElement {
    /// Builds an element from square blocks, inferring the shape.
    pub fn from_blocks(blocks: Vec<CMatrix>) -> Result<Self> {
        let mut dims = Vec::with_capacity(blocks.len());
        for (k, b) in blocks.iter().enumerate() {
            if b.nrows() != b.ncols() {
                return Err(Error::InvalidShape(format!(
                    "block {k} is {}x{}, expected square",
                    b.nrows(),
                    b.ncols()
                )));
            }
            dims.push(b.nrows());
        }
        let shape = AlgebraShape::new(dims)?;
        Ok(Self { shape, blocks })
    }

    pub fn from_blocks_with_shape(shape: &AlgebraShape, blocks: Vec<CMatrix>) -> Result<Self> {
        let elem = Self::from_blocks(blocks)?;
        shape.check_same(&elem.shape)?;
        Ok(elem)
    }

    /// Single-block element.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::from_blocks(vec![m])
    }

    /// Abelian element with the given (real) values on each point.
    pub fn abelian(values: &[f64]) -> Self {
        let blocks = values
            .iter()
            .map(|&v| CMatrix::from_element(1, 1, C64::new(v, 0.0)))
            .collect();
        Self::from_blocks(blocks).expect("non-empty value list")
    }

    /// Single-block diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let m = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::from_matrix(m).expect("non-empty diagonal")
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        let blocks = shape.block_dims.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        Self {
            shape: shape.clone(),
            blocks,
        }
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .block_dims
            .iter()
            .map(|&n| CMatrix::identity(n, n))
            .collect();
        Self {
            shape: shape.clone(),
            blocks,
        }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    pub(crate) fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub(crate) fn zip_blocks(
        &self,
        other: &Self,
        f: impl Fn(&CMatrix, &CMatrix) -> CMatrix,
    ) -> Result<Self> {
        self.shape.check_same(&other.shape)?;
        Ok(Self {
            shape: self.shape.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|b| b.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_blocks(|b| b * s)
    }

    /// Blockwise matrix product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a * b)
    }

    /// `{a, b} = (ab + ba) / 2`.
    pub fn jordan_product(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| (a * b + b * a) * C64::new(0.5, 0.0))
    }

    /// `[a, b] = (ab - ba) / (2i)`.
    pub fn lie_product(&self, other: &Self) -> Result<Self> {
        let factor = C64::new(0.0, -0.5); // 1/(2i)
        self.zip_blocks(other, |a, b| (a * b - b * a) * factor)
    }

    /// `{a, b, c} = {{a, b}, c} + {a, {b, c}} - {b, {a, c}}`.
    pub fn jordan_triple(&self, b: &Self, c: &Self) -> Result<Self> {
        self.shape.check_same(&b.shape)?;
        self.shape.check_same(&c.shape)?;
        let ab_c = self.jordan_product(b)?.jordan_product(c)?;
        let a_bc = self.jordan_product(&b.jordan_product(c)?)?;
        let b_ac = b.jordan_product(&self.jordan_product(c)?)?;
        Ok(ab_c + a_bc - b_ac)
    }

    /// Largest entrywise modulus of `a - a†`.
    pub fn self_adjoint_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| max_abs(&(b - b.adjoint())))
            .fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_deviation() <= tol
    }

    /// `(a + a†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        self.map_blocks(|b| (b + b.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Eigenvalues of the Hermitian part, one list per block.
    pub fn eigenvalues(&self) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(|b| hermitian_eigen(b).0)
            .collect()
    }

    /// Smallest eigenvalue of the Hermitian part over all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min)
    }

    /// Self-adjoint within `tol` and every eigenvalue `≥ -tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_self_adjoint(tol) && self.min_eigenvalue() >= -tol
    }

    /// Operator (spectral) norm, the maximum over blocks.
    pub fn operator_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.clone().singular_values().max())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Sum of the traces of all blocks.
    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// Operator-norm distance, panicking on shape mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).operator_norm()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(max_abs).fold(0.0, f64::max)
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigen-decomposition of the Hermitian part of `m`: `(eigenvalues, eigenvectors)`.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn assert_same(a: &AlgebraElement, b: &AlgebraElement) {
    assert!(
        a.shape == b.shape,
        "shape mismatch: {} vs {}",
        a.shape,
        b.shape
    );
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_same(self, rhs);
        self.zip_blocks(rhs, |a, b| a + b).expect("shapes checked")
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_same(self, rhs);
        self.zip_blocks(rhs, |a, b| a - b).expect("shapes checked")
    }
}

impl Add for AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: AlgebraElement) -> AlgebraElement {
        &self + &rhs
    }
}

impl Sub for AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: AlgebraElement) -> AlgebraElement {
        &self - &rhs
    }
}

impl Add<&AlgebraElement> for AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        &self + rhs
    }
}

impl Sub<&AlgebraElement> for AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        &self - rhs
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.map_blocks(|b| -b)
    }
}

impl Neg for AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        -&self
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, s: f64) -> AlgebraElement {
        self.map_blocks(|b| b * C64::new(s, 0.0))
    }
}

impl Mul<f64> for AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, s: f64) -> AlgebraElement {
        &self * s
    }
}

/// Pauli matrices as elements of `M_2`.
pub mod pauli {
    use super::*;

    fn m2(entries: [C64; 4]) -> AlgebraElement {
        AlgebraElement::from_matrix(CMatrix::from_row_slice(2, 2, &entries)).expect("2x2")
    }

    pub fn identity() -> AlgebraElement {
        AlgebraElement::identity(&AlgebraShape::full(2))
    }

    pub fn x() -> AlgebraElement {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        m2([o, l, l, o])
    }

    pub fn y() -> AlgebraElement {
        let o = C64::new(0.0, 0.0);
        m2([o, -I, I, o])
    }

    pub fn z() -> AlgebraElement {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        m2([l, o, o, -l])
    }

    /// `[σx, σy, σz]`.
    pub fn all() -> [AlgebraElement; 3] {
        [x(), y(), z()]
    }
}
