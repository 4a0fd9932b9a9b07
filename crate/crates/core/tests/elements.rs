use std::sync::Arc;

use feast_dpg::elements::{build_system, quadrature, MAX_QUADRATURE_DEGREE};
use feast_dpg::mesh::Mesh;
use proptest::prelude::*;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn corner() -> impl Strategy<Value = [f64; 2]> {
    [-2.0f64..2.0, -2.0f64..2.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn element_stiffness_kernel_is_constants(a in corner(), b in corner(), c in corner(), p in 1usize..=3) {
        let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        prop_assume!(area2.abs() > 0.05);
        let mesh = Mesh::new(vec![a, b, c], vec![[0, 1, 2]], vec![0]).unwrap();
        let system = build_system(Arc::new(mesh), p, 1).unwrap();
        let (mass, stiff) = system.trial_element_matrices(0);
        let scale = stiff.amax();
        prop_assert!((&stiff - stiff.transpose()).amax() <= 1e-12 * scale);
        prop_assert!((&mass - mass.transpose()).amax() <= 1e-12 * mass.amax());
        let eig = stiff.clone().symmetric_eigen();
        let zero = eig.eigenvalues.iter().filter(|&&l| l.abs() <= 1e-10 * scale).count();
        prop_assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-10 * scale));
        prop_assert_eq!(zero, 1);
        let ones = nalgebra::DVector::from_element(stiff.nrows(), 1.0);
        prop_assert!((&stiff * &ones).amax() <= 1e-10 * scale);
        // the nodal basis sums to one, so 1^T M 1 is the element area
        prop_assert!(((ones.transpose() * &mass * &ones)[(0, 0)] - 0.5 * area2.abs()).abs() <= 1e-12);
    }

    #[test]
    fn quadrature_integrates_monomials(deg in 0usize..=20, i in 0usize..=20) {
        let rule = quadrature(deg).unwrap();
        prop_assert!((rule.weights.iter().sum::<f64>() - 0.5).abs() <= 1e-13);
        let a = i.min(deg);
        let b = deg - a;
        let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        let got = rule.integrate(|x, y| x.powi(a as i32) * y.powi(b as i32));
        prop_assert!((got - exact).abs() <= 1e-13, "x^{a} y^{b}: {got} vs {exact}");
    }
}

#[test]
fn quadrature_degree_limit() {
    assert!(quadrature(MAX_QUADRATURE_DEGREE).is_ok());
    assert!(quadrature(MAX_QUADRATURE_DEGREE + 1).is_err());
}
