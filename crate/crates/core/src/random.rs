//! Seedable random generators for elements, states, unitaries and isometries.
//!
//! Used by the randomized verification suites and by tests; every function takes the
//! generator explicitly so runs are reproducible from a seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, AlgebraShape, CMatrix, C64};

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<C64> {
    DVector::from_fn(n, |_, _| complex_normal(rng))
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<C64> {
    loop {
        let v = random_vector(n, rng);
        let norm = v.norm();
        if norm > 1e-8 {
            return v.unscale(norm);
        }
    }
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_complex_matrix(n, n, rng);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

pub fn random_element<R: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut R) -> AlgebraElement {
    let blocks = shape
        .block_dims()
        .iter()
        .map(|&n| random_complex_matrix(n, n, rng))
        .collect();
    AlgebraElement::from_blocks(blocks).expect("square blocks")
}

pub fn random_self_adjoint<R: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut R) -> AlgebraElement {
    let blocks = shape
        .block_dims()
        .iter()
        .map(|&n| random_hermitian(n, rng))
        .collect();
    AlgebraElement::from_blocks(blocks).expect("square blocks")
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phases of `R` fixed.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = random_complex_matrix(n, n, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random isometry `C^cols -> C^rows` (`rows ≥ cols`), i.e. `V†V = 1`.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "an isometry needs rows >= cols");
    haar_unitary(rows, rng).columns(0, cols).into_owned()
}

/// Positive element with the prescribed rank in each block; nonzero eigenvalues are
/// drawn uniformly from `[0.1, 1]` and rotated by a Haar unitary.
pub fn random_positive_element<R: Rng + ?Sized>(
    shape: &AlgebraShape,
    ranks: &[usize],
    rng: &mut R,
) -> AlgebraElement {
    assert_eq!(ranks.len(), shape.num_blocks(), "one rank per block");
    let blocks = shape
        .block_dims()
        .iter()
        .zip(ranks)
        .map(|(&n, &r)| {
            assert!(r <= n, "rank {r} exceeds block dimension {n}");
            let u = haar_unitary(n, rng);
            let diag = DMatrix::from_fn(n, n, |i, j| {
                if i == j && i < r {
                    C64::new(rng.random_range(0.1..1.0), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let m = &u * diag * u.adjoint();
            (&m + m.adjoint()) * C64::new(0.5, 0.0)
        })
        .collect();
    AlgebraElement::from_blocks(blocks).expect("square blocks")
}

/// Full-rank positive element.
pub fn random_faithful<R: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut R) -> AlgebraElement {
    let ranks = shape.block_dims().to_vec();
    random_positive_element(shape, &ranks, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..6 {
            let u = haar_unitary(n, &mut rng);
            let err = (u.adjoint() * &u - CMatrix::identity(n, n)).norm();
            assert!(err < 1e-12, "n={n} err={err}");
        }
    }

    #[test]
    fn isometry_has_orthonormal_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let v = haar_isometry(6, 3, &mut rng);
        assert!((v.adjoint() * &v - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn positive_element_has_requested_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let shape = AlgebraShape::new(vec![3, 2]).unwrap();
        let p = random_positive_element(&shape, &[2, 0], &mut rng);
        assert!(p.is_positive(1e-12));
        let ev = p.eigenvalues();
        assert_eq!(ev[0].iter().filter(|&&l| l > 1e-9).count(), 2);
        assert_eq!(ev[1].iter().filter(|&&l| l > 1e-9).count(), 0);
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let a = random_hermitian(3, &mut ChaCha8Rng::seed_from_u64(7));
        let b = random_hermitian(3, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
    }
}
