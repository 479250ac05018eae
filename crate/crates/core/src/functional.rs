//! Normal self-adjoint functionals represented by densities through the trace pairing
//! `ξ(a) = Σ_k Tr(ξ̃_k a_k)`.
//!
//! Positive functionals (n.p.l.f.s) are stored without normalization. The support
//! projection `p` of a positive `ω` splits the algebra into the four corners
//! `pAp ⊕ pAq ⊕ qAp ⊕ qAq` with `q = 1 - p`; the Gel'fand ideal of `ω` is `Aq`
//! and a self-adjoint `ξ` is absolutely continuous w.r.t. `ω` iff `qξ̃q = 0`.

use std::ops::{Add, Mul, Sub};

use crate::algebra::{hermitian_eigen, AlgebraElement, AlgebraShape, CMatrix, C64, DEFAULT_TOL};
use crate::error::{Error, Result};

/// Relative eigenvalue threshold defining the support of a positive functional.
pub const SUPPORT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    density: AlgebraElement,
}

impl Functional {
    /// Wraps a self-adjoint density; the stored density is its Hermitian part.
    pub fn new(density: AlgebraElement) -> Result<Self> {
        let dev = density.self_adjoint_deviation();
        let scale = density.max_abs().max(1.0);
        if dev > DEFAULT_TOL * scale {
            return Err(Error::NotSelfAdjoint(dev));
        }
        Ok(Self {
            density: density.hermitian_part(),
        })
    }

    /// Like [`Functional::new`] but additionally requires a positive density.
    pub fn positive(density: AlgebraElement) -> Result<Self> {
        let f = Self::new(density)?;
        let min = f.density.min_eigenvalue();
        if min < -f.positivity_tol() {
            return Err(Error::NotPositive(min));
        }
        Ok(f)
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        Self {
            density: AlgebraElement::zeros(shape),
        }
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.density.shape()
    }

    pub fn density(&self) -> &AlgebraElement {
        &self.density
    }

    /// `ξ(a) = Σ_k Tr(ξ̃_k a_k)`.
    pub fn evaluate(&self, a: &AlgebraElement) -> Result<C64> {
        self.shape().check_same(a.shape())?;
        Ok(self
            .density
            .blocks()
            .iter()
            .zip(a.blocks())
            .map(|(d, x)| trace_of_product(d, x))
            .sum())
    }

    /// Trace norm `Σ |λ_i|`; equals `ξ(1)` for positive functionals.
    pub fn norm(&self) -> f64 {
        self.density
            .eigenvalues()
            .into_iter()
            .flatten()
            .map(f64::abs)
            .sum()
    }

    /// Total mass `ξ(1)`.
    pub fn mass(&self) -> f64 {
        self.density.trace().re
    }

    fn positivity_tol(&self) -> f64 {
        DEFAULT_TOL * self.density.max_abs().max(1.0)
    }

    pub fn is_nplf(&self, tol: f64) -> bool {
        self.density.min_eigenvalue() >= -tol
    }

    pub fn is_faithful(&self, tol: f64) -> bool {
        self.density.min_eigenvalue() > tol
    }

    pub(crate) fn require_positive(&self) -> Result<()> {
        let min = self.density.min_eigenvalue();
        if min < -self.positivity_tol() {
            Err(Error::NotPositive(min))
        } else {
            Ok(())
        }
    }

    /// Spectral projection onto eigenvalues above `tol × (largest eigenvalue)`.
    pub fn support_projection(&self, tol: f64) -> Result<SupportDecomposition> {
        self.require_positive()?;
        let shape = self.shape().clone();
        let eigs: Vec<_> = self.density.blocks().iter().map(hermitian_eigen).collect();
        let lmax = eigs
            .iter()
            .flat_map(|(l, _)| l.iter().copied())
            .fold(0.0, f64::max);
        let threshold = tol * lmax;
        let mut blocks = Vec::with_capacity(eigs.len());
        let mut ranks = Vec::with_capacity(eigs.len());
        for (vals, vecs) in &eigs {
            let n = vals.len();
            let mut p = CMatrix::zeros(n, n);
            let mut rank = 0;
            if lmax > 0.0 {
                for (i, &l) in vals.iter().enumerate() {
                    if l > threshold {
                        let v = vecs.column(i);
                        p += v * v.adjoint();
                        rank += 1;
                    }
                }
            }
            blocks.push((&p + p.adjoint()) * C64::new(0.5, 0.0));
            ranks.push(rank);
        }
        let p = AlgebraElement::from_blocks_with_shape(&shape, blocks)?;
        let q = AlgebraElement::identity(&shape) - &p;
        Ok(SupportDecomposition { p, q, ranks })
    }

    /// `ξ ≪ ω` in the finite-dimensional sense: the `qq` corner of `ξ̃` vanishes
    /// (operator norm at most `tol`), with `q` the kernel projection of `ω`.
    pub fn is_absolutely_continuous(&self, omega: &Functional, tol: f64) -> Result<bool> {
        Ok(self.kernel_block_norm(omega)? <= tol)
    }

    /// Operator norm of `q ξ̃ q` where `q` is the kernel projection of `omega`.
    pub fn kernel_block_norm(&self, omega: &Functional) -> Result<f64> {
        self.shape().check_same(omega.shape())?;
        let dec = omega.support_projection(SUPPORT_TOL)?;
        let qq = dec.corner(&self.density, Corner::QQ)?;
        Ok(qq.operator_norm())
    }

    /// `Ad_u`-pushforward on a single-block functional: `ξ̃ ↦ u ξ̃ u†`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if self.shape().num_blocks() != 1 || u.nrows() != self.shape().block_dims()[0] {
            return Err(Error::InvalidArgument(
                "unitary conjugation expects a single block of matching size".into(),
            ));
        }
        let d = u * self.density.block(0) * u.adjoint();
        Self::new(AlgebraElement::from_matrix(d)?)
    }
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

impl Add for &Functional {
    type Output = Functional;
    fn add(self, rhs: &Functional) -> Functional {
        Functional {
            density: &self.density + &rhs.density,
        }
    }
}

impl Sub for &Functional {
    type Output = Functional;
    fn sub(self, rhs: &Functional) -> Functional {
        Functional {
            density: &self.density - &rhs.density,
        }
    }
}

impl Mul<f64> for &Functional {
    type Output = Functional;
    fn mul(self, s: f64) -> Functional {
        Functional {
            density: &self.density * s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corner {
    PP,
    PQ,
    QP,
    QQ,
}

/// Support projection `p` of a positive functional and its complement `q = 1 - p`.
#[derive(Clone, Debug)]
pub struct SupportDecomposition {
    p: AlgebraElement,
    q: AlgebraElement,
    ranks: Vec<usize>,
}

/// The four corners `x a y` for `x, y ∈ {p, q}`.
#[derive(Clone, Debug)]
pub struct BlockParts {
    pub pp: AlgebraElement,
    pub pq: AlgebraElement,
    pub qp: AlgebraElement,
    pub qq: AlgebraElement,
}

impl BlockParts {
    pub fn sum(&self) -> AlgebraElement {
        &(&self.pp + &self.pq) + &(&self.qp + &self.qq)
    }
}

impl SupportDecomposition {
    pub fn p(&self) -> &AlgebraElement {
        &self.p
    }

    pub fn q(&self) -> &AlgebraElement {
        &self.q
    }

    /// Rank of the support inside each block.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.iter().sum()
    }

    pub fn corner(&self, a: &AlgebraElement, corner: Corner) -> Result<AlgebraElement> {
        let (x, y) = match corner {
            Corner::PP => (&self.p, &self.p),
            Corner::PQ => (&self.p, &self.q),
            Corner::QP => (&self.q, &self.p),
            Corner::QQ => (&self.q, &self.q),
        };
        x.multiply(a)?.multiply(y)
    }

    pub fn block_decompose(&self, a: &AlgebraElement) -> Result<BlockParts> {
        Ok(BlockParts {
            pp: self.corner(a, Corner::PP)?,
            pq: self.corner(a, Corner::PQ)?,
            qp: self.corner(a, Corner::QP)?,
            qq: self.corner(a, Corner::QQ)?,
        })
    }
}

pub fn block_decompose(a: &AlgebraElement, dec: &SupportDecomposition) -> Result<BlockParts> {
    dec.block_decompose(a)
}

/// Outcome of the two Gel'fand-ideal criteria.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GelfandCheck {
    /// `ω(a†a)`.
    pub expectation: f64,
    /// Frobenius norm of `a p` (the `pp` and `qp` corners together).
    pub block_norm: f64,
    pub by_expectation: bool,
    pub by_blocks: bool,
}

/// Evaluates both characterizations of `N_ω = {a : ω(a†a) = 0} = A_pq ⊕ A_qq`.
///
/// The block criterion is compared against `sqrt(tol)` so both tests share the
/// quadratic scale of `ω(a†a)`.
pub fn gelfand_check(a: &AlgebraElement, omega: &Functional, tol: f64) -> Result<GelfandCheck> {
    let dec = omega.support_projection(SUPPORT_TOL)?;
    let expectation = omega.evaluate(&a.adjoint().multiply(a)?)?.re;
    let ap = a.multiply(dec.p())?;
    let block_norm = ap.frobenius_norm();
    Ok(GelfandCheck {
        expectation,
        block_norm,
        by_expectation: expectation <= tol,
        by_blocks: block_norm <= tol.sqrt(),
    })
}

/// Membership in the Gel'fand ideal of `omega`; errors if the two criteria disagree.
pub fn in_gelfand_ideal(a: &AlgebraElement, omega: &Functional, tol: f64) -> Result<bool> {
    let check = gelfand_check(a, omega, tol)?;
    if check.by_expectation != check.by_blocks {
        return Err(Error::InconsistentCriteria {
            expectation: check.expectation,
            block_norm: check.block_norm,
        });
    }
    Ok(check.by_expectation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli;
    use crate::random::{random_element, random_faithful, random_positive_element, random_self_adjoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn m2(e: [f64; 4]) -> AlgebraElement {
        AlgebraElement::from_matrix(CMatrix::from_row_slice(
            2,
            2,
            &[c(e[0], 0.0), c(e[1], 0.0), c(e[2], 0.0), c(e[3], 0.0)],
        ))
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let tracial = Functional::new(pauli::identity() * 0.5).unwrap();
        assert!(tracial.evaluate(&pauli::z()).unwrap().norm() < 1e-15);

        let xi = Functional::new(AlgebraElement::diagonal(&[0.3, 0.7])).unwrap();
        let v = xi.evaluate(&AlgebraElement::diagonal(&[1.0, 2.0])).unwrap();
        assert!((v.re - 1.7).abs() < 1e-15 && v.im.abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let omega = Functional::positive(random_faithful(&shape, &mut rng)).unwrap();
        let one = AlgebraElement::identity(&shape);
        assert!((omega.evaluate(&one).unwrap().re - omega.norm()).abs() < 1e-12);
    }

    #[test]
    fn evaluate_is_real_on_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let shape = AlgebraShape::new(vec![3, 1]).unwrap();
        let xi = Functional::new(random_self_adjoint(&shape, &mut rng)).unwrap();
        let a = random_self_adjoint(&shape, &mut rng);
        assert!(xi.evaluate(&a).unwrap().im.abs() < 1e-12);
    }

    #[test]
    fn rejects_non_self_adjoint_density() {
        let n = m2([0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(Functional::new(n), Err(Error::NotSelfAdjoint(_))));
        assert!(matches!(Functional::positive(pauli::z()), Err(Error::NotPositive(_))));
    }

    #[test]
    fn nplf_and_faithful() {
        let f = Functional::new(AlgebraElement::diagonal(&[0.5, 0.5, 0.0])).unwrap();
        assert!(f.is_nplf(DEFAULT_TOL));
        assert!(!f.is_faithful(DEFAULT_TOL));
        let g = Functional::new(pauli::identity() * 0.5).unwrap();
        assert!(g.is_nplf(DEFAULT_TOL) && g.is_faithful(DEFAULT_TOL));
        let h = Functional::new(pauli::z()).unwrap();
        assert!(!h.is_nplf(DEFAULT_TOL));
    }

    #[test]
    fn support_projection_examples() {
        let f = Functional::new(AlgebraElement::diagonal(&[0.5, 0.5, 0.0])).unwrap();
        let dec = f.support_projection(SUPPORT_TOL).unwrap();
        assert!(dec.p().distance(&AlgebraElement::diagonal(&[1.0, 1.0, 0.0])) < 1e-12);
        assert_eq!(dec.ranks(), &[2]);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let shape = AlgebraShape::full(3);
        let faithful = Functional::positive(random_faithful(&shape, &mut rng)).unwrap();
        let dec = faithful.support_projection(SUPPORT_TOL).unwrap();
        assert!(dec.p().distance(&AlgebraElement::identity(&shape)) < 1e-12);

        let phi = crate::random::random_unit_vector(3, &mut rng);
        let proj = AlgebraElement::from_matrix(&phi * phi.adjoint()).unwrap();
        let pure = Functional::positive(proj.clone()).unwrap();
        let dec = pure.support_projection(SUPPORT_TOL).unwrap();
        assert!(dec.p().distance(&proj) < 1e-12);
        assert_eq!(dec.total_rank(), 1);

        assert!(Functional::new(pauli::z()).unwrap().support_projection(SUPPORT_TOL).is_err());
    }

    #[test]
    fn support_projection_is_scale_invariant_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let shape = AlgebraShape::new(vec![3, 2]).unwrap();
        let rho = random_positive_element(&shape, &[2, 1], &mut rng);
        let a = Functional::positive(rho.clone()).unwrap();
        let b = Functional::positive(rho * 1e6).unwrap();
        let pa = a.support_projection(SUPPORT_TOL).unwrap();
        let pb = b.support_projection(SUPPORT_TOL).unwrap();
        assert!(pa.p().distance(pb.p()) < 1e-10);
        let p = pa.p();
        assert!(p.multiply(p).unwrap().distance(p) < 1e-12);
        assert!(p.is_self_adjoint(1e-12));
        assert!(a.evaluate(pa.q()).unwrap().norm() < 1e-12);
    }

    #[test]
    fn block_decompose_examples() {
        let omega = Functional::new(AlgebraElement::diagonal(&[1.0, 0.0])).unwrap();
        let dec = omega.support_projection(SUPPORT_TOL).unwrap();
        let parts = dec.block_decompose(&pauli::x()).unwrap();
        assert!(parts.pq.distance(&m2([0.0, 1.0, 0.0, 0.0])) < 1e-12);
        assert!(parts.qp.distance(&m2([0.0, 0.0, 1.0, 0.0])) < 1e-12);
        assert!(parts.pp.max_abs() < 1e-12 && parts.qq.max_abs() < 1e-12);

        let parts = dec.block_decompose(dec.p()).unwrap();
        assert!(parts.pp.distance(dec.p()) < 1e-12);
        assert!(parts.pq.max_abs() + parts.qp.max_abs() + parts.qq.max_abs() < 1e-12);

        let faithful = Functional::new(pauli::identity() * 0.5).unwrap();
        let dec = faithful.support_projection(SUPPORT_TOL).unwrap();
        let a = pauli::x() + pauli::z();
        let parts = block_decompose(&a, &dec).unwrap();
        assert!(parts.pp.distance(&a) < 1e-12);
        assert!(parts.pq.max_abs() + parts.qp.max_abs() + parts.qq.max_abs() < 1e-12);
    }

    #[test]
    fn block_parts_sum_to_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let shape = AlgebraShape::new(vec![4, 2]).unwrap();
        let omega = Functional::positive(random_positive_element(&shape, &[2, 1], &mut rng)).unwrap();
        let dec = omega.support_projection(SUPPORT_TOL).unwrap();
        let a = random_element(&shape, &mut rng);
        assert!(dec.block_decompose(&a).unwrap().sum().distance(&a) < 1e-12);
    }

    #[test]
    fn gelfand_ideal_examples() {
        let omega = Functional::new(AlgebraElement::diagonal(&[1.0, 0.0])).unwrap();
        assert!(in_gelfand_ideal(&m2([0.0, 1.0, 0.0, 0.0]), &omega, DEFAULT_TOL).unwrap());
        assert!(!in_gelfand_ideal(&pauli::x(), &omega, DEFAULT_TOL).unwrap());
        let faithful = Functional::new(pauli::identity() * 0.5).unwrap();
        assert!(!in_gelfand_ideal(&pauli::z(), &faithful, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn gelfand_criteria_agree_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let shape = AlgebraShape::full(4);
        for _ in 0..50 {
            let omega = Functional::positive(random_positive_element(&shape, &[2], &mut rng)).unwrap();
            let dec = omega.support_projection(SUPPORT_TOL).unwrap();
            let a = random_element(&shape, &mut rng);
            // a q lies in the ideal, a generically does not
            let aq = a.multiply(dec.q()).unwrap();
            assert!(in_gelfand_ideal(&aq, &omega, DEFAULT_TOL).unwrap());
            assert!(!in_gelfand_ideal(&a, &omega, DEFAULT_TOL).unwrap());
        }
    }

    #[test]
    fn absolute_continuity_examples() {
        let omega = Functional::new(AlgebraElement::diagonal(&[1.0, 0.0])).unwrap();
        let xi = Functional::new(pauli::x()).unwrap();
        assert!(xi.is_absolutely_continuous(&omega, DEFAULT_TOL).unwrap());
        let charge = Functional::new(AlgebraElement::diagonal(&[0.0, 1.0])).unwrap();
        assert!(!charge.is_absolutely_continuous(&omega, DEFAULT_TOL).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let shape = AlgebraShape::full(3);
        let faithful = Functional::positive(random_faithful(&shape, &mut rng)).unwrap();
        let any = Functional::new(random_self_adjoint(&shape, &mut rng)).unwrap();
        assert!(any.is_absolutely_continuous(&faithful, DEFAULT_TOL).unwrap());

        assert!(xi.is_absolutely_continuous(&Functional::new(pauli::z()).unwrap(), DEFAULT_TOL).is_err());
    }

    #[test]
    fn cauchy_schwarz_and_norm_additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        for _ in 0..100 {
            let omega = Functional::positive(random_positive_element(&shape, &[1, 2], &mut rng)).unwrap();
            let sigma = Functional::positive(random_faithful(&shape, &mut rng)).unwrap();
            let a = random_element(&shape, &mut rng);
            let b = random_element(&shape, &mut rng);
            let ab = omega.evaluate(&a.adjoint().multiply(&b).unwrap()).unwrap().norm_sqr();
            let aa = omega.evaluate(&a.adjoint().multiply(&a).unwrap()).unwrap().re;
            let bb = omega.evaluate(&b.adjoint().multiply(&b).unwrap()).unwrap().re;
            assert!(ab <= aa * bb + 1e-9);

            let sum = &omega + &sigma;
            let one = AlgebraElement::identity(&shape);
            let lhs = sum.evaluate(&one).unwrap().re;
            let rhs = omega.evaluate(&one).unwrap().re + sigma.evaluate(&one).unwrap().re;
            assert!((lhs - rhs).abs() < 1e-12);
            assert!((sum.norm() - omega.norm() - sigma.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn support_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let shape = AlgebraShape::new(vec![3, 3]).unwrap();
        for _ in 0..20 {
            let omega = Functional::positive(random_positive_element(&shape, &[1, 2], &mut rng)).unwrap();
            let dec = omega.support_projection(SUPPORT_TOL).unwrap();
            let a = random_element(&shape, &mut rng);
            let pap = dec.p().multiply(&a).unwrap().multiply(dec.p()).unwrap();
            let d = omega.evaluate(&a).unwrap() - omega.evaluate(&pap).unwrap();
            assert!(d.norm() < 1e-10);
        }
    }

    #[test]
    fn absolutely_continuous_functionals_form_a_vector_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let shape = AlgebraShape::full(4);
        let omega = Functional::positive(random_positive_element(&shape, &[2], &mut rng)).unwrap();
        let dec = omega.support_projection(SUPPORT_TOL).unwrap();
        let ac = |rng: &mut ChaCha8Rng| {
            let x = random_self_adjoint(&shape, rng);
            let parts = dec.block_decompose(&x).unwrap();
            Functional::new(&(&parts.pp + &parts.pq) + &parts.qp).unwrap()
        };
        for _ in 0..20 {
            let x = ac(&mut rng);
            let y = ac(&mut rng);
            assert!(x.is_absolutely_continuous(&omega, DEFAULT_TOL).unwrap());
            let combo = &(&x * 1.7) - &(&y * 0.3);
            assert!(combo.is_absolutely_continuous(&omega, DEFAULT_TOL).unwrap());
        }
    }
}
