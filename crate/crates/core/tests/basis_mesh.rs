use proptest::prelude::*;
use tempered_ldg::basis::{gauss_legendre, legendre_eval, LegendreBasis, MAX_QUAD_POINTS};
use tempered_ldg::mesh::{perturbed_mesh, uniform_mesh};

#[test]
fn legendre_matches_closed_forms() {
    for &xi in &[-1.0, -0.3, 0.0, 0.5, 0.9, 1.0] {
        let (v, d) = legendre_eval(4, xi).unwrap();
        let p3 = (5.0 * xi * xi * xi - 3.0 * xi) / 2.0;
        let p4 = (35.0 * xi.powi(4) - 30.0 * xi * xi + 3.0) / 8.0;
        assert!((v[3] - p3).abs() < 1e-14);
        assert!((v[4] - p4).abs() < 1e-14);
        assert!((d[3] - (15.0 * xi * xi - 3.0) / 2.0).abs() < 1e-13);
    }
}

#[test]
fn basis_inner_products() {
    let basis = LegendreBasis::new(3, gauss_legendre(6).unwrap());
    for m in 0..=3 {
        for n in 0..=3 {
            let want = if m == n { 2.0 / (2 * m + 1) as f64 } else { 0.0 };
            assert!((basis.inner(m, n) - want).abs() < 1e-14);
            // ∫ P_m P_n' = 2 when n > m and n + m odd, else 0
            let want_d = if n > m && (n + m) % 2 == 1 { 2.0 } else { 0.0 };
            assert!(
                (basis.inner_with_derivative(m, n) - want_d).abs() < 1e-13,
                "{m} {n}"
            );
        }
    }
}

#[test]
fn perturbed_quasi_uniformity_example() {
    let m = perturbed_mesh(0.0, 1.0, 20, 7).unwrap();
    assert!(m.quasi_uniformity() >= 0.8);
    let u = uniform_mesh(0.0, 6.0, 600).unwrap();
    assert_eq!(u.interfaces().len(), 601);
    assert!(u.cell_lengths().iter().all(|h| (h - 0.01).abs() < 1e-12));
}

#[test]
fn quadrature_exact_to_degree_2q_minus_1() {
    for q in 1..=MAX_QUAD_POINTS {
        let rule = gauss_legendre(q).unwrap();
        for p in 0..2 * q as i32 {
            let got = rule.integrate(|x| x.powi(p));
            let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p + 1) as f64 };
            assert!((got - want).abs() < 1e-13, "q={q} p={p} got={got}");
        }
    }
}

proptest! {
    #[test]
    fn perturbed_meshes_are_valid(n in 2usize..200, seed in any::<u64>(), a in -5.0f64..5.0, len in 0.1f64..10.0) {
        let b = a + len;
        let m = perturbed_mesh(a, b, n, seed).unwrap();
        let x = m.interfaces();
        prop_assert_eq!(x.len(), n + 1);
        prop_assert_eq!(x[0], a);
        prop_assert_eq!(x[n], b);
        let h = len / n as f64;
        for (i, xi) in x.iter().enumerate() {
            prop_assert!((xi - (a + i as f64 * h)).abs() <= 0.05 * h * (1.0 + 1e-12));
        }
        prop_assert!(x.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(m.quasi_uniformity() >= 0.9 / 1.1 - 1e-12);
        prop_assert_eq!(m, perturbed_mesh(a, b, n, seed).unwrap());
    }
}
