mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use tempered_ldg::basis::gauss_legendre;
use tempered_ldg::dg::{error_norms, gauss_radau_project, l2_project, DgFunction, FluxOperator, MassMatrix};
use tempered_ldg::mesh::{perturbed_mesh, uniform_mesh};
use tempered_ldg::study::observed_orders;

fn sine(x: f64) -> f64 {
    (2.0 * PI * x).sin()
}

fn orders_for(project: impl Fn(Arc<tempered_ldg::mesh::Mesh1D>) -> DgFunction, ns: &[usize]) -> Vec<f64> {
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for &n in ns {
        let mesh = Arc::new(uniform_mesh(0.0, 1.0, n).unwrap());
        let u = project(mesh.clone());
        errs.push(error_norms(&u, sine, 10, 4).unwrap().l2);
        hs.push(mesh.h_max());
    }
    observed_orders(&hs, &errs).into_iter().flatten().collect()
}

#[test]
fn l2_projection_of_sine_is_third_order() {
    let orders = orders_for(|m| l2_project(sine, m, 2, 8).unwrap(), &[10, 20, 40]);
    assert!(orders.iter().all(|o| (o - 3.0).abs() < 0.1), "{orders:?}");
}

#[test]
fn gauss_radau_projection_order() {
    for k in [1, 2] {
        let orders = orders_for(
            |m| gauss_radau_project(sine, m, k, 0.3, 8).unwrap(),
            &[10, 20, 40, 80],
        );
        let last = *orders.last().unwrap();
        assert!(
            last >= k as f64 + 1.0 - 0.2 && last <= k as f64 + 1.0 + 0.3,
            "k={k} {orders:?}"
        );
    }
}

#[test]
fn interpolant_jumps_shrink_at_order_k_plus_one() {
    for k in 0..=2 {
        let jumps: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&n| {
                let mesh = Arc::new(uniform_mesh(0.0, 1.0, n).unwrap());
                // a (k+1)-point rule makes the discrete projection the Gauss-node interpolant
                let u = l2_project(sine, mesh, k, k + 1).unwrap();
                (0..n).map(|i| u.jump(i).abs()).fold(0.0, f64::max)
            })
            .collect();
        for w in jumps.windows(2) {
            let order = (w[0] / w[1]).log2();
            // odd k gains one extra power on uniform meshes by symmetry
            assert!(order >= (k + 1) as f64 - 0.2, "k={k} jumps {jumps:?}");
        }
    }
}

#[test]
fn flux_matches_quadrature_assembly_on_perturbed_mesh() {
    let mesh = perturbed_mesh(-1.0, 2.0, 7, 3).unwrap();
    for k in 0..=3 {
        for delta in [0.0, 0.2, 0.8, 1.0, -0.4] {
            let dense = FluxOperator::assemble(&mesh, k, delta).unwrap().to_dense();
            let reference = common::flux_matrix_by_quadrature(&mesh, k, delta);
            for (r, row) in dense.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    assert!(
                        (v - reference[(r, c)]).abs() < 1e-13,
                        "k={k} delta={delta} ({r},{c})"
                    );
                }
            }
        }
    }
}

#[test]
fn mass_matrix_examples() {
    let mesh = uniform_mesh(0.0, 1.0, 5).unwrap();
    assert!(MassMatrix::new(&mesh, 0)
        .entries()
        .iter()
        .all(|e| (e - 0.2).abs() < 1e-15));
    let mesh = uniform_mesh(0.0, 0.3, 2).unwrap();
    let m = MassMatrix::new(&mesh, 2);
    let h = 0.15;
    for (got, want) in m.entries()[..3].iter().zip([h, h / 3.0, h / 5.0]) {
        assert!((got - want).abs() < 1e-15);
    }
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetry_holds_for_any_delta(
        n in 2usize..10,
        k in 0usize..4,
        seed in any::<u64>(),
        delta in prop_oneof![-1.0f64..0.49, 0.51f64..2.0],
        raw in coeffs(80),
    ) {
        let mesh = perturbed_mesh(0.0, 1.0, n, seed).unwrap();
        let dim = n * (k + 1);
        let (u, p) = (&raw[..dim], &raw[40..40 + dim]);
        let a = FluxOperator::assemble(&mesh, k, delta).unwrap();
        let b = FluxOperator::assemble(&mesh, k, 1.0 - delta).unwrap();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s = a.bilinear(u, p) + b.bilinear(p, u);
        prop_assert!(s.abs() <= 1e-13 * norm(u) * norm(p) + 1e-300);
    }

    #[test]
    fn mass_norm_matches_quadrature(n in 1usize..12, k in 0usize..5, seed in any::<u64>(), raw in coeffs(60)) {
        let n = n + 1;
        let mesh = Arc::new(perturbed_mesh(0.0, 2.0, n, seed).unwrap());
        let dim = n * (k + 1);
        let u = DgFunction::new(mesh.clone(), k, raw[..dim.min(60)].iter().cycle().take(dim).copied().collect()).unwrap();
        let rule = gauss_legendre(k + 2).unwrap();
        let quad: f64 = (0..n)
            .map(|j| {
                let (a, b) = mesh.cell_bounds(j);
                rule.integrate_on(a, b, |x| {
                    let xi = (2.0 * x - a - b) / (b - a);
                    u.eval_in_cell(j, xi).powi(2)
                })
            })
            .sum();
        let m = MassMatrix::new(&mesh, k);
        let via_mass = m.norm(u.coeffs()).powi(2);
        prop_assert!((via_mass - quad).abs() <= 1e-12 * quad.max(1e-300));
    }

    #[test]
    fn projections_reproduce_piecewise_polynomials(k in 0usize..4, delta in 0.0f64..0.45, raw in coeffs(24)) {
        // a global polynomial of degree k is periodic only if constant; use a
        // DG function and project its own piecewise values instead
        let n = 6;
        let mesh = Arc::new(uniform_mesh(0.0, 1.0, n).unwrap());
        let dim = n * (k + 1);
        let u = DgFunction::new(mesh.clone(), k, raw[..dim].to_vec()).unwrap();
        let f = |x: f64| {
            let j = mesh.locate(x).unwrap();
            let (a, b) = mesh.cell_bounds(j);
            u.eval_in_cell(j, (2.0 * x - a - b) / (b - a))
        };
        let p = l2_project(f, mesh.clone(), k, k + 2).unwrap();
        for (x, y) in p.coeffs().iter().zip(u.coeffs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        // Gauss-Radau reproduces constants for any delta
        let c = gauss_radau_project(|_| 2.5, mesh.clone(), k, delta, k + 2).unwrap();
        for (i, v) in c.coeffs().iter().enumerate() {
            let want = if i % (k + 1) == 0 { 2.5 } else { 0.0 };
            prop_assert!((v - want).abs() < 1e-12);
        }
    }
}
