use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wstar_geom::algebra::{AlgebraShape, C64, DEFAULT_TOL};
use wstar_geom::channel::KrausMap;
use wstar_geom::functional::{Functional, SUPPORT_TOL};
use wstar_geom::metric::{eta_from_element, inner_product, jordan_lift, jordan_tensor};
use wstar_geom::random::{random_element, random_faithful, random_positive_element, random_self_adjoint};

fn shape_strategy() -> impl Strategy<Value = AlgebraShape> {
    prop::collection::vec(1usize..=4, 1..=3).prop_map(|d| AlgebraShape::new(d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_splits_into_jordan_and_lie(shape in shape_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_element(&shape, &mut rng);
        let b = random_element(&shape, &mut rng);
        let ab = a.multiply(&b).unwrap();
        let split = a.jordan_product(&b).unwrap() + a.lie_product(&b).unwrap().scale(C64::new(0.0, 1.0));
        prop_assert!(ab.distance(&split) < 1e-12 * (1.0 + ab.operator_norm()));
        prop_assert!(a.jordan_product(&b).unwrap().distance(&b.jordan_product(&a).unwrap()) < 1e-13);
        let l = a.lie_product(&b).unwrap();
        prop_assert!((&l + &b.lie_product(&a).unwrap()).operator_norm() < 1e-13);
    }

    #[test]
    fn inner_product_is_symmetric_and_nonnegative(shape in shape_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ranks: Vec<usize> = shape.block_dims().to_vec();
        let omega = Functional::positive(random_positive_element(&shape, &ranks, &mut rng)).unwrap();
        let e1 = eta_from_element(&omega, &random_self_adjoint(&shape, &mut rng)).unwrap();
        let e2 = eta_from_element(&omega, &random_self_adjoint(&shape, &mut rng)).unwrap();
        let g12 = inner_product(&omega, e1.value(), e2.value()).unwrap();
        let g21 = inner_product(&omega, e2.value(), e1.value()).unwrap();
        assert_relative_eq!(g12, g21, epsilon = 1e-11, max_relative = 1e-11);
        prop_assert!(inner_product(&omega, e1.value(), e1.value()).unwrap() >= 0.0);
    }

    #[test]
    fn lift_inverts_eta_on_support(shape in shape_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ranks: Vec<usize> = shape.block_dims().iter().map(|&n| 1 + (seed as usize) % n).collect();
        let omega = Functional::positive(random_positive_element(&shape, &ranks, &mut rng)).unwrap();
        let dec = omega.support_projection(SUPPORT_TOL).unwrap();
        prop_assert_eq!(dec.ranks(), &ranks[..]);
        let a = random_self_adjoint(&shape, &mut rng);
        let lifted = jordan_lift(&omega, eta_from_element(&omega, &a).unwrap().value(), DEFAULT_TOL).unwrap();
        let expected = &a - &dec.block_decompose(&a).unwrap().qq;
        prop_assert!(lifted.element().distance(&expected) < 1e-10);
    }

    #[test]
    fn jordan_tensor_is_symmetric(shape in shape_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = Functional::new(random_self_adjoint(&shape, &mut rng)).unwrap();
        let a = random_self_adjoint(&shape, &mut rng);
        let b = random_self_adjoint(&shape, &mut rng);
        assert_relative_eq!(
            jordan_tensor(&xi, &a, &b).unwrap(),
            jordan_tensor(&xi, &b, &a).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn depolarizing_is_monotone(lambda in 0.0f64..=4.0 / 3.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = AlgebraShape::full(2);
        let phi = KrausMap::pauli_depolarizing(lambda).unwrap();
        let omega = Functional::positive(random_faithful(&shape, &mut rng)).unwrap();
        let eta = eta_from_element(&omega, &random_self_adjoint(&shape, &mut rng)).unwrap();
        let check = phi.check_monotonicity(&omega, eta.value(), 1e-9).unwrap();
        prop_assert!(check.holds, "lhs {} rhs {}", check.lhs, check.rhs);
    }
}
