//! Brute-force reference pieces shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use tempered_ldg::basis::{gauss_legendre, legendre_eval};
use tempered_ldg::mesh::Mesh1D;
use tempered_ldg::tempered::gamma;

/// Dense `A` with `vᵀ A u = G_δ(u; v)`, built from quadrature and trace
/// values of each basis pair rather than from per-cell blocks.
pub fn flux_matrix_by_quadrature(mesh: &Mesh1D, k: usize, delta: f64) -> DMatrix<f64> {
    let nb = k + 1;
    let n = mesh.num_cells();
    let dim = n * nb;
    let rule = gauss_legendre(k + 2).unwrap();
    let mut a = DMatrix::zeros(dim, dim);
    // volume: ∫ φ_u (φ_v)_x dx = ∫ P_mu P_mv' dξ
    for j in 0..n {
        for mv in 0..nb {
            for mu in 0..nb {
                let val = rule.integrate(|xi| {
                    let (p, d) = legendre_eval(k, xi).unwrap();
                    p[mu] * d[mv]
                });
                a[(j * nb + mv, j * nb + mu)] += val;
            }
        }
    }
    // interface i sits between cell i (minus side, ξ = 1) and cell i+1 (plus side, ξ = −1)
    let (right, _) = legendre_eval(k, 1.0).unwrap();
    let (left, _) = legendre_eval(k, -1.0).unwrap();
    for i in 0..n {
        let jm = i;
        let jp = (i + 1) % n;
        for mv in 0..nb {
            for mu in 0..nb {
                // û = δ u⁺ + (1−δ) u⁻ ; term −û (v⁻ − v⁺)
                let uhat_minus = (1.0 - delta) * right[mu];
                let uhat_plus = delta * left[mu];
                a[(jm * nb + mv, jm * nb + mu)] -= uhat_minus * right[mv];
                a[(jm * nb + mv, jp * nb + mu)] -= uhat_plus * right[mv];
                a[(jp * nb + mv, jm * nb + mu)] += uhat_minus * left[mv];
                a[(jp * nb + mv, jp * nb + mu)] += uhat_plus * left[mv];
            }
        }
    }
    a
}

pub fn mass_diag(mesh: &Mesh1D, k: usize) -> DVector<f64> {
    let nb = k + 1;
    DVector::from_iterator(
        mesh.num_cells() * nb,
        (0..mesh.num_cells()).flat_map(|j| {
            let h = mesh.cell_lengths()[j];
            (0..nb).map(move |m| h / (2 * m + 1) as f64)
        }),
    )
}

/// `∫ f φ` for every basis function.
pub fn load_vector(mesh: &Mesh1D, k: usize, q: usize, f: impl Fn(f64) -> f64) -> DVector<f64> {
    let nb = k + 1;
    let rule = gauss_legendre(q).unwrap();
    let mut out = DVector::zeros(mesh.num_cells() * nb);
    for j in 0..mesh.num_cells() {
        let h = mesh.cell_lengths()[j];
        for m in 0..nb {
            out[j * nb + m] = 0.5
                * h
                * rule.integrate(|xi| f(mesh.to_physical(j, xi)) * legendre_eval(k, xi).unwrap().0[m]);
        }
    }
    out
}

pub struct MonolithicSetup<'a> {
    pub mesh: &'a Mesh1D,
    pub k: usize,
    pub delta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub rho: f64,
    pub steps: usize,
    pub final_time: f64,
    pub quad_order: usize,
}

/// Steps the coupled `(u, p)` system with one LU solve per step and the
/// history sum written out term by term. Returns `(u^n, p^n)` for n = 1..=M.
pub fn monolithic_run(
    s: &MonolithicSetup<'_>,
    u0: &[f64],
    forcing: Option<&dyn Fn(f64, f64) -> f64>,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let dim = u0.len();
    let tau = s.final_time / s.steps as f64;
    let mu = tau.powf(-s.alpha) / gamma(2.0 - s.alpha);
    let b = |i: usize| ((i + 1) as f64).powf(1.0 - s.alpha) - (i as f64).powf(1.0 - s.alpha);
    let damp = |i: usize| (-(i as f64) * s.gamma * tau).exp();
    let m = DMatrix::from_diagonal(&mass_diag(s.mesh, s.k));
    let a_d = flux_matrix_by_quadrature(s.mesh, s.k, s.delta);
    let a_c = flux_matrix_by_quadrature(s.mesh, s.k, 1.0 - s.delta);
    let mut big = DMatrix::zeros(2 * dim, 2 * dim);
    big.view_mut((0, 0), (dim, dim)).copy_from(&(&m * (s.rho + mu)));
    big.view_mut((0, dim), (dim, dim)).copy_from(&a_c);
    big.view_mut((dim, 0), (dim, dim)).copy_from(&a_d);
    big.view_mut((dim, dim), (dim, dim)).copy_from(&m);
    let lu = big.lu();

    let mut us: Vec<DVector<f64>> = vec![DVector::from_column_slice(u0)];
    let mut out = Vec::with_capacity(s.steps);
    for n in 1..=s.steps {
        let mut h = &us[0] * (b(n - 1) * damp(n));
        for i in 1..n {
            h += &us[n - i] * ((b(i - 1) - b(i)) * damp(i));
        }
        let mut rhs_u = &m * h * mu;
        if let Some(f) = forcing {
            let t = n as f64 * tau;
            rhs_u += load_vector(s.mesh, s.k, s.quad_order, |x| f(x, t));
        }
        let mut rhs = DVector::zeros(2 * dim);
        rhs.rows_mut(0, dim).copy_from(&rhs_u);
        let x = lu.solve(&rhs).expect("coupled system is singular");
        let u = x.rows(0, dim).into_owned();
        let p = x.rows(dim, dim).into_owned();
        out.push((u.as_slice().to_vec(), p.as_slice().to_vec()));
        us.push(u);
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
