//! Completely positive unital maps in Kraus form.
//!
//! A map `Φ: A → B` is stored as Kraus operators `K_i` of size `n × m` (domain block `n`,
//! codomain block `m`) acting by `Φ(a) = Σ K_i† a K_i`; unitality is `Σ K_i†K_i = 1_m`.
//! The dual `Φ*: B_* → A_*` acts on densities by `ω̃ ↦ Σ K_i ω̃ K_i†` and preserves traces.
//! Multi-block algebras are handled by one Kraus family per block pair (block-diagonal maps).

use rand::Rng;

use crate::algebra::{AlgebraElement, AlgebraShape, CMatrix, C64, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::metric::JordanLift;
use crate::random::haar_isometry;

/// Unitality tolerance enforced at construction.
pub const UNITALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct KrausMap {
    domain: AlgebraShape,
    codomain: AlgebraShape,
    kraus: Vec<Vec<CMatrix>>,
}

impl KrausMap {
    /// Single-block map from `M_n` to `M_m`.
    pub fn new(domain_dim: usize, codomain_dim: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        Self::block_diagonal(
            AlgebraShape::new(vec![domain_dim])?,
            AlgebraShape::new(vec![codomain_dim])?,
            vec![kraus],
        )
    }

    pub fn block_diagonal(
        domain: AlgebraShape,
        codomain: AlgebraShape,
        kraus: Vec<Vec<CMatrix>>,
    ) -> Result<Self> {
        if domain.num_blocks() != codomain.num_blocks() || kraus.len() != domain.num_blocks() {
            return Err(Error::InvalidArgument(format!(
                "block-diagonal Kraus map needs one family per block: domain {domain}, codomain {codomain}, {} families",
                kraus.len()
            )));
        }
        for (k, family) in kraus.iter().enumerate() {
            let (n, m) = (domain.block_dims()[k], codomain.block_dims()[k]);
            if family.is_empty() {
                return Err(Error::InvalidArgument(format!("empty Kraus family for block {k}")));
            }
            let mut sum = CMatrix::zeros(m, m);
            for op in family {
                if op.nrows() != n || op.ncols() != m {
                    return Err(Error::InvalidArgument(format!(
                        "Kraus operator is {}x{}, expected {n}x{m}",
                        op.nrows(),
                        op.ncols()
                    )));
                }
                sum += op.adjoint() * op;
            }
            let dev = crate::algebra::max_abs(&(sum - CMatrix::identity(m, m)));
            if dev > UNITALITY_TOL {
                return Err(Error::NotUnital(dev));
            }
        }
        Ok(Self {
            domain,
            codomain,
            kraus,
        })
    }

    /// `a ↦ U† a U`.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        let n = u.nrows();
        Self::new(n, n, vec![u])
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, n, vec![CMatrix::identity(n, n)]).expect("identity is unital")
    }

    /// Kraus family `{|i⟩⟨i|}`, killing off-diagonal entries.
    pub fn pinching(n: usize) -> Self {
        let family = (0..n)
            .map(|i| {
                let mut p = CMatrix::zeros(n, n);
                p[(i, i)] = C64::new(1.0, 0.0);
                p
            })
            .collect();
        Self::new(n, n, family).expect("pinching is unital")
    }

    /// Pauli twirl `{√(1−3λ/4) 1, √(λ/4) σx, √(λ/4) σy, √(λ/4) σz}` on `M_2`,
    /// acting as `a ↦ (1−λ)a + λ Tr(a) 1/2`. Requires `0 ≤ λ ≤ 4/3`.
    pub fn pauli_depolarizing(lambda: f64) -> Result<Self> {
        if !(0.0..=4.0 / 3.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing parameter {lambda} outside [0, 4/3]"
            )));
        }
        let c0 = (1.0 - 0.75 * lambda).max(0.0).sqrt();
        let c1 = (0.25 * lambda).sqrt();
        let mut family = vec![CMatrix::identity(2, 2) * C64::new(c0, 0.0)];
        for p in crate::algebra::pauli::all() {
            family.push(p.block(0) * C64::new(c1, 0.0));
        }
        Self::new(2, 2, family)
    }

    /// Reads Kraus operators `K_i: C^m → C^n` off the environment slices of a Haar-random
    /// isometry `V: C^m → C^n ⊗ C^env`, so `Σ K_i†K_i = V†V = 1`.
    pub fn random_unital<R: Rng + ?Sized>(
        domain_dim: usize,
        codomain_dim: usize,
        env_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if domain_dim * env_dim < codomain_dim {
            return Err(Error::InvalidArgument(format!(
                "isometry C^{codomain_dim} -> C^{domain_dim} ⊗ C^{env_dim} does not exist"
            )));
        }
        let v = haar_isometry(domain_dim * env_dim, codomain_dim, rng);
        let family = (0..env_dim)
            .map(|e| v.rows(e * domain_dim, domain_dim).into_owned())
            .collect();
        Self::new(domain_dim, codomain_dim, family)
    }

    pub fn domain(&self) -> &AlgebraShape {
        &self.domain
    }

    pub fn codomain(&self) -> &AlgebraShape {
        &self.codomain
    }

    pub fn kraus(&self) -> &[Vec<CMatrix>] {
        &self.kraus
    }

    /// `Φ(a) = Σ K_i† a K_i`.
    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.domain.check_same(a.shape())?;
        let blocks = self
            .kraus
            .iter()
            .zip(a.blocks())
            .map(|(family, block)| {
                family
                    .iter()
                    .map(|k| k.adjoint() * block * k)
                    .fold(None, |acc: Option<CMatrix>, x| Some(acc.map_or(x.clone(), |s| s + x)))
                    .expect("non-empty family")
            })
            .collect();
        AlgebraElement::from_blocks_with_shape(&self.codomain, blocks)
    }

    /// Density map `ω̃ ↦ Σ K_i ω̃ K_i†`.
    pub fn dual_apply(&self, omega: &Functional) -> Result<Functional> {
        self.codomain.check_same(omega.shape())?;
        let blocks = self
            .kraus
            .iter()
            .zip(omega.density().blocks())
            .map(|(family, block)| {
                family
                    .iter()
                    .map(|k| k * block * k.adjoint())
                    .fold(None, |acc: Option<CMatrix>, x| Some(acc.map_or(x.clone(), |s| s + x)))
                    .expect("non-empty family")
            })
            .collect();
        Functional::new(AlgebraElement::from_blocks_with_shape(&self.domain, blocks)?)
    }

    /// Compares `G_ρ(Φ*η, Φ*η)` with `G_ω(η, η)` for `ρ = Φ*ω`.
    ///
    /// Precondition failures (η outside `AC_ω`, `Φ*η` outside `AC_ρ`) are errors; the
    /// inequality itself is reported in the returned [`MonotonicityCheck`].
    pub fn check_monotonicity(
        &self,
        omega: &Functional,
        eta: &Functional,
        tol: f64,
    ) -> Result<MonotonicityCheck> {
        let scale = eta.density().max_abs().max(1.0);
        let ac_tol = DEFAULT_TOL * scale;
        let base = JordanLift::new(omega)?;
        let a = base.lift(eta, ac_tol)?;
        let rhs = eta.evaluate(a.element())?.re;

        let rho = self.dual_apply(omega)?;
        let pushed = self.dual_apply(eta)?;
        let image = JordanLift::new(&rho)?;
        let b = image.lift(&pushed, ac_tol)?;
        let lhs = pushed.evaluate(b.element())?.re;
        Ok(MonotonicityCheck {
            lhs,
            rhs,
            holds: lhs <= rhs + tol,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonicityCheck {
    /// `G_ρ(Φ*η, Φ*η)`.
    pub lhs: f64,
    /// `G_ω(η, η)`.
    pub rhs: f64,
    pub holds: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli;
    use crate::metric::eta_from_element;
    use crate::random::{
        haar_unitary, random_element, random_faithful, random_positive_element, random_self_adjoint,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_and_pinching_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let u = haar_unitary(3, &mut rng);
        let phi = KrausMap::unitary(u.clone()).unwrap();
        let a = random_element(&AlgebraShape::full(3), &mut rng);
        let expected = u.adjoint() * a.block(0) * &u;
        assert!(crate::algebra::max_abs(&(phi.apply(&a).unwrap().block(0) - expected)) < 1e-12);

        let pin = KrausMap::pinching(3);
        let out = pin.apply(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { a.block(0)[(i, j)] } else { C64::new(0.0, 0.0) };
                assert!((out.block(0)[(i, j)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn depolarizing_matches_twirl_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let shape = AlgebraShape::full(2);
        for &lambda in &[0.0, 0.3, 1.0, 4.0 / 3.0] {
            let phi = KrausMap::pauli_depolarizing(lambda).unwrap();
            let a = random_element(&shape, &mut rng);
            let expected = &(&a * (1.0 - lambda)) + &pauli::identity().scale(a.trace() * (lambda / 2.0));
            assert!(phi.apply(&a).unwrap().distance(&expected) < 1e-12);
        }
        assert!(KrausMap::pauli_depolarizing(1.5).is_err());
    }

    #[test]
    fn unital_and_rejects_non_unital() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let phi = KrausMap::random_unital(3, 4, 2, &mut rng).unwrap();
        let one = AlgebraElement::identity(phi.domain());
        assert!(phi.apply(&one).unwrap().distance(&AlgebraElement::identity(phi.codomain())) < 1e-12);

        let bad = vec![CMatrix::identity(2, 2) * C64::new(0.9, 0.0)];
        assert!(matches!(KrausMap::new(2, 2, bad), Err(Error::NotUnital(_))));
        assert!(KrausMap::new(2, 2, vec![CMatrix::identity(3, 3)]).is_err());
        assert!(KrausMap::random_unital(2, 5, 2, &mut rng).is_err());
    }

    #[test]
    fn apply_shape_mismatch() {
        let phi = KrausMap::identity(2);
        let a = AlgebraElement::identity(&AlgebraShape::full(3));
        assert!(phi.apply(&a).is_err());
    }

    #[test]
    fn dual_preserves_trace_and_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..50 {
            let phi = KrausMap::random_unital(4, 3, 3, &mut rng).unwrap();
            let omega = Functional::positive(random_positive_element(phi.codomain(), &[2], &mut rng)).unwrap();
            let rho = phi.dual_apply(&omega).unwrap();
            assert!((rho.mass() - omega.mass()).abs() < 1e-10);
            assert!(rho.is_nplf(1e-10));
            // duality: (Φ*ω)(a) = ω(Φ(a))
            let a = random_element(phi.domain(), &mut rng);
            let lhs = rho.evaluate(&a).unwrap();
            let rhs = omega.evaluate(&phi.apply(&a).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn dual_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let u = haar_unitary(2, &mut rng);
        let omega = Functional::positive(random_faithful(&AlgebraShape::full(2), &mut rng)).unwrap();
        let rho = KrausMap::unitary(u.clone()).unwrap().dual_apply(&omega).unwrap();
        let expected = &u * omega.density().block(0) * u.adjoint();
        assert!(crate::algebra::max_abs(&(rho.density().block(0) - expected)) < 1e-12);

        let pinched = KrausMap::pinching(2).dual_apply(&omega).unwrap();
        let d = omega.density().block(0);
        assert!((pinched.density().block(0)[(0, 0)] - d[(0, 0)]).norm() < 1e-15);
        assert!(pinched.density().block(0)[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn monotonicity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let shape = AlgebraShape::full(2);
        let omega = Functional::positive(random_faithful(&shape, &mut rng)).unwrap();
        let eta = eta_from_element(&omega, &random_self_adjoint(&shape, &mut rng)).unwrap();

        let u = KrausMap::unitary(haar_unitary(2, &mut rng)).unwrap();
        let c = u.check_monotonicity(&omega, eta.value(), 1e-9).unwrap();
        assert!(c.holds && (c.lhs - c.rhs).abs() < 1e-10);

        let c = KrausMap::identity(2).check_monotonicity(&omega, eta.value(), 1e-9).unwrap();
        assert!(c.holds && (c.lhs - c.rhs).abs() < 1e-12);

        let c = KrausMap::pinching(2).check_monotonicity(&omega, eta.value(), 1e-9).unwrap();
        assert!(c.holds && c.lhs < c.rhs - 1e-6, "{c:?}");
    }

    #[test]
    fn monotonicity_precondition_is_an_error() {
        let pure = Functional::positive(AlgebraElement::diagonal(&[1.0, 0.0])).unwrap();
        let eta = Functional::new(AlgebraElement::diagonal(&[0.0, 1.0])).unwrap();
        assert!(matches!(
            KrausMap::identity(2).check_monotonicity(&pure, &eta, 1e-9),
            Err(Error::NotAbsolutelyContinuous(_))
        ));
    }

    #[test]
    fn kadison_schwarz() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..30 {
            let phi = KrausMap::random_unital(3, 3, 2, &mut rng).unwrap();
            let a = random_self_adjoint(phi.domain(), &mut rng);
            let fa = phi.apply(&a).unwrap();
            let fa2 = phi.apply(&a.multiply(&a).unwrap()).unwrap();
            let gap = fa2 - fa.multiply(&fa).unwrap();
            assert!(gap.is_positive(1e-9));
        }
    }

    #[test]
    fn block_diagonal_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let a = KrausMap::random_unital(2, 2, 2, &mut rng).unwrap();
        let b = KrausMap::pinching(3);
        let domain = AlgebraShape::new(vec![2, 3]).unwrap();
        let phi = KrausMap::block_diagonal(
            domain.clone(),
            domain.clone(),
            vec![a.kraus()[0].clone(), b.kraus()[0].clone()],
        )
        .unwrap();
        let omega = Functional::positive(random_positive_element(&domain, &[1, 2], &mut rng)).unwrap();
        let eta = eta_from_element(&omega, &random_self_adjoint(&domain, &mut rng)).unwrap();
        let c = phi.check_monotonicity(&omega, eta.value(), 1e-9).unwrap();
        assert!(c.holds);
        assert!(KrausMap::block_diagonal(domain.clone(), AlgebraShape::full(2), vec![]).is_err());
    }
}
