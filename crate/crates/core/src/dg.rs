//! Piecewise-polynomial DG space on a periodic mesh.
//!
//! A [`DgFunction`] stores Legendre coefficients cell by cell; entry
//! `j * (k + 1) + m` multiplies `P_m` mapped onto cell `j`. At interface
//! `x_{j+1/2}` the trace `v^-` comes from cell `j` and `v^+` from cell `j+1`,
//! with the last interface identified with the first.

use std::io::Write;
use std::sync::Arc;

use crate::basis::{fill_legendre_values, gauss_legendre, LegendreBasis};
use crate::error::{invalid, Error, Result};
use crate::mesh::Mesh1D;

/// Which one-sided value to take when a point sits on an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Trace from the cell on the left (`v^-`).
    Left,
    /// Trace from the cell on the right (`v^+`).
    Right,
    /// Point inside a cell. On an interface this behaves like `Right`.
    Interior,
}

/// Rejects the central flux weight and non-finite weights.
pub fn check_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() {
        return invalid(format!("flux weight delta must be finite, got {delta}"));
    }
    if (delta - 0.5).abs() < 1e-12 {
        return invalid(
            "flux weight delta = 1/2 is not allowed: the generalized alternating flux requires delta != 1/2",
        );
    }
    Ok(())
}

/// An element of `V_h^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DgFunction {
    mesh: Arc<Mesh1D>,
    degree: usize,
    coeffs: Vec<f64>,
}

impl DgFunction {
    pub fn new(mesh: Arc<Mesh1D>, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expect = mesh.num_cells() * (degree + 1);
        if coeffs.len() != expect {
            return invalid(format!(
                "coefficient vector has length {}, expected {expect}",
                coeffs.len()
            ));
        }
        Ok(DgFunction { mesh, degree, coeffs })
    }

    pub fn zeros(mesh: Arc<Mesh1D>, degree: usize) -> Self {
        let len = mesh.num_cells() * (degree + 1);
        DgFunction {
            mesh,
            degree,
            coeffs: vec![0.0; len],
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficients of cell `j`.
    pub fn cell(&self, j: usize) -> &[f64] {
        let w = self.degree + 1;
        &self.coeffs[j * w..(j + 1) * w]
    }

    /// Value of the cell-`j` polynomial at reference coordinate `xi`.
    pub fn eval_in_cell(&self, j: usize, xi: f64) -> f64 {
        eval_modal(self.cell(j), xi)
    }

    /// Point value; `side` picks the one-sided trace on interfaces.
    pub fn evaluate(&self, x: f64, side: Side) -> Result<f64> {
        let mesh = &self.mesh;
        if !(mesh.left()..=mesh.right()).contains(&x) {
            return invalid(format!(
                "point {x} outside the domain [{}, {}]",
                mesh.left(),
                mesh.right()
            ));
        }
        let nodes = mesh.interfaces();
        let n = mesh.num_cells();
        if let Ok(i) = nodes.binary_search_by(|p| p.total_cmp(&x)) {
            // x is interface i
            return Ok(match side {
                Side::Left => self.eval_in_cell((i + n - 1) % n, 1.0),
                Side::Right | Side::Interior => self.eval_in_cell(i % n, -1.0),
            });
        }
        let j = mesh.locate(x).expect("point inside domain");
        let (l, r) = mesh.cell_bounds(j);
        let xi = (2.0 * (x - l) / (r - l) - 1.0).clamp(-1.0, 1.0);
        Ok(self.eval_in_cell(j, xi))
    }

    /// `(v^-, v^+)` at interface `i` (`0..N`, interface `N` wraps to `0`).
    pub fn traces(&self, i: usize) -> (f64, f64) {
        let n = self.mesh.num_cells();
        let i = i % n;
        let minus = self.eval_in_cell((i + n - 1) % n, 1.0);
        let plus = self.eval_in_cell(i, -1.0);
        (minus, plus)
    }

    /// Jump `v^+ - v^-` at interface `i`.
    pub fn jump(&self, i: usize) -> f64 {
        let (m, p) = self.traces(i);
        p - m
    }

    /// Exact L2 norm through the diagonal mass identity.
    pub fn l2_norm(&self) -> f64 {
        let w = self.degree + 1;
        let mut s = 0.0;
        for (j, &h) in self.mesh.cell_lengths().iter().enumerate() {
            for m in 0..w {
                let c = self.coeffs[j * w + m];
                s += c * c * h / (2 * m + 1) as f64;
            }
        }
        s.sqrt()
    }

    /// Writes `x,u` samples: `samples_per_cell` points per cell including
    /// both cell ends, so discontinuities appear as repeated `x` values.
    pub fn write_csv<W: Write>(&self, mut out: W, samples_per_cell: usize) -> Result<()> {
        let s = samples_per_cell.max(2);
        writeln!(out, "x,u")?;
        for j in 0..self.mesh.num_cells() {
            for i in 0..s {
                let xi = -1.0 + 2.0 * i as f64 / (s - 1) as f64;
                let x = self.mesh.to_physical(j, xi);
                writeln!(out, "{x:e},{:e}", self.eval_in_cell(j, xi))?;
            }
        }
        Ok(())
    }
}

/// `Σ_m c_m P_m(xi)` by the Clenshaw-free direct recurrence.
pub(crate) fn eval_modal(c: &[f64], xi: f64) -> f64 {
    match c.len() {
        0 => 0.0,
        1 => c[0],
        _ => {
            let (mut p0, mut p1) = (1.0, xi);
            let mut s = c[0] + c[1] * xi;
            for (m, &cm) in c.iter().enumerate().skip(2) {
                let mf = (m - 1) as f64;
                let p2 = ((2.0 * mf + 1.0) * xi * p1 - mf * p0) / (mf + 1.0);
                s += cm * p2;
                p0 = p1;
                p1 = p2;
            }
            s
        }
    }
}

/// Diagonal mass matrix `d[j][m] = h_j / (2m + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix {
    degree: usize,
    diag: Vec<f64>,
}

impl MassMatrix {
    pub fn new(mesh: &Mesh1D, degree: usize) -> Self {
        let diag = mesh
            .cell_lengths()
            .iter()
            .flat_map(|&h| (0..=degree).map(move |m| h / (2 * m + 1) as f64))
            .collect();
        MassMatrix { degree, diag }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn entries(&self) -> &[f64] {
        &self.diag
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((y, x), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *y = d * x;
        }
    }

    pub fn apply_inverse(&self, x: &[f64], y: &mut [f64]) {
        for ((y, x), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *y = x / d;
        }
    }

    /// `uᵀ M v`
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.diag).map(|((a, b), d)| a * b * d).sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }
}

/// Matrix `A_δ` of the flux-derivative form
/// `G_δ(u; v) = Σ_j ∫_{I_j} u v_x − Σ_j [(u^{(δ)} v^-)_{j+1/2} − (u^{(δ)} v^+)_{j−1/2}]`,
/// with `vᵀ A_δ u = G_δ(u; v)` and `u^{(δ)} = δ u^+ + (1 − δ) u^-`.
///
/// Row block `j` couples only to column blocks `j − 1`, `j`, `j + 1`
/// (periodic). Each block is `(k+1)×(k+1)`, row-major with the test index
/// first.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxOperator {
    delta: f64,
    degree: usize,
    n_cells: usize,
    lower: Vec<Vec<f64>>,
    diag: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
}

/// Relative offset of a neighbour block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockOffset {
    Lower,
    Diag,
    Upper,
}

impl FluxOperator {
    pub fn assemble(mesh: &Mesh1D, degree: usize, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        let w = degree + 1;
        let basis = LegendreBasis::new(degree, gauss_legendre(w)?);
        let sign = |m: usize| if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut d = vec![0.0; w * w];
        let mut lo = vec![0.0; w * w];
        let mut up = vec![0.0; w * w];
        for n in 0..w {
            for m in 0..w {
                // volume term ∫ P_m P_n' dξ is independent of h
                let vol = basis.inner_with_derivative(m, n);
                // right end of the test cell: −u^{(δ)} v^-, with v^- = P_n(1) = 1
                // left end: +u^{(δ)} v^+, with v^+ = P_n(−1)
                d[n * w + m] = vol - (1.0 - delta) + delta * sign(n) * sign(m);
                up[n * w + m] = -delta * sign(m);
                lo[n * w + m] = (1.0 - delta) * sign(n);
            }
        }
        let n_cells = mesh.num_cells();
        Ok(FluxOperator {
            delta,
            degree,
            n_cells,
            lower: vec![lo; n_cells],
            diag: vec![d; n_cells],
            upper: vec![up; n_cells],
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.n_cells * (self.degree + 1)
    }

    /// Nonzero blocks of row block `j` as `(column block, block)`.
    pub fn row_blocks(&self, j: usize) -> [(usize, &[f64]); 3] {
        let n = self.n_cells;
        [
            ((j + n - 1) % n, self.lower[j].as_slice()),
            (j, self.diag[j].as_slice()),
            ((j + 1) % n, self.upper[j].as_slice()),
        ]
    }

    pub fn block(&self, j: usize, offset: BlockOffset) -> &[f64] {
        match offset {
            BlockOffset::Lower => &self.lower[j],
            BlockOffset::Diag => &self.diag[j],
            BlockOffset::Upper => &self.upper[j],
        }
    }

    /// `y = A u`
    pub fn apply(&self, u: &[f64], y: &mut [f64]) {
        let w = self.degree + 1;
        y.fill(0.0);
        for j in 0..self.n_cells {
            for (col, blk) in self.row_blocks(j) {
                for n in 0..w {
                    let mut s = 0.0;
                    for m in 0..w {
                        s += blk[n * w + m] * u[col * w + m];
                    }
                    y[j * w + n] += s;
                }
            }
        }
    }

    /// `y = Aᵀ u`
    pub fn apply_transpose(&self, u: &[f64], y: &mut [f64]) {
        let w = self.degree + 1;
        y.fill(0.0);
        for j in 0..self.n_cells {
            for (col, blk) in self.row_blocks(j) {
                for n in 0..w {
                    let un = u[j * w + n];
                    for m in 0..w {
                        y[col * w + m] += blk[n * w + m] * un;
                    }
                }
            }
        }
    }

    /// `G_δ(u; v) = vᵀ A u`
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut y = vec![0.0; self.dim()];
        self.apply(u, &mut y);
        y.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Dense row-major copy (blocks that alias on tiny meshes are summed).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let w = self.degree + 1;
        let dim = self.dim();
        let mut a = vec![vec![0.0; dim]; dim];
        for j in 0..self.n_cells {
            for (col, blk) in self.row_blocks(j) {
                for n in 0..w {
                    for m in 0..w {
                        a[j * w + n][col * w + m] += blk[n * w + m];
                    }
                }
            }
        }
        a
    }
}

/// Cellwise L2 projection with a `quad_order`-point rule.
pub fn l2_project(
    f: impl Fn(f64) -> f64,
    mesh: Arc<Mesh1D>,
    degree: usize,
    quad_order: usize,
) -> Result<DgFunction> {
    let basis = LegendreBasis::new(degree, gauss_legendre(quad_order)?);
    let coeffs = cell_moments(&f, &mesh, &basis);
    DgFunction::new(mesh, degree, coeffs)
}

/// `(2m+1)/h_j ∫_{I_j} f P_m dx` for every cell and mode.
fn cell_moments(f: &impl Fn(f64) -> f64, mesh: &Mesh1D, basis: &LegendreBasis) -> Vec<f64> {
    let w = basis.degree() + 1;
    let rule = basis.rule();
    let mut coeffs = vec![0.0; mesh.num_cells() * w];
    for j in 0..mesh.num_cells() {
        for (q, (&xi, &wt)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
            let fx = f(mesh.to_physical(j, xi));
            let p = basis.values_at_node(q);
            for m in 0..w {
                coeffs[j * w + m] += wt * fx * p[m];
            }
        }
        for m in 0..w {
            // (2m+1)/h · (h/2) ∫ f P_m dξ
            coeffs[j * w + m] *= (2 * m + 1) as f64 / 2.0;
        }
    }
    coeffs
}

/// Generalized Gauss-Radau projection `P_δ f`.
///
/// On every cell the projection shares the moments of `f` against
/// `P^{k-1}`, and at every interface `δ (P_δ f)^+ + (1 − δ)(P_δ f)^- = f`.
/// Because the basis is orthogonal the moment conditions fix modes
/// `0..k` cell by cell; the top mode solves the cyclic two-term system
/// `(1 − δ) c_j + δ (−1)^k c_{j+1} = r_j`, done in `O(N)` by summing the
/// geometric series in the contracting direction.
pub fn gauss_radau_project(
    f: impl Fn(f64) -> f64,
    mesh: Arc<Mesh1D>,
    degree: usize,
    delta: f64,
    quad_order: usize,
) -> Result<DgFunction> {
    check_delta(delta)?;
    let k = degree;
    let w = k + 1;
    let n = mesh.num_cells();
    let basis = LegendreBasis::new(k, gauss_legendre(quad_order)?);
    let mut coeffs = cell_moments(&f, &mesh, &basis);
    let sign = |m: usize| if m.is_multiple_of(2) { 1.0 } else { -1.0 };

    let a = 1.0 - delta;
    let b = delta * sign(k);
    let mut rhs = vec![0.0; n];
    for (j, r) in rhs.iter_mut().enumerate() {
        let next = (j + 1) % n;
        let right_trace: f64 = (0..k).map(|m| coeffs[j * w + m]).sum();
        let left_trace_next: f64 = (0..k).map(|m| sign(m) * coeffs[next * w + m]).sum();
        *r = f(mesh.interfaces()[j + 1]) - delta * left_trace_next - (1.0 - delta) * right_trace;
    }
    let top = solve_cyclic_two_term(a, b, &rhs).map_err(|msg| {
        Error::Numerical(format!(
            "Gauss-Radau projection system is singular (delta = {delta}, N = {n}): {msg}"
        ))
    })?;
    for (j, t) in top.into_iter().enumerate() {
        coeffs[j * w + k] = t;
    }
    DgFunction::new(mesh, degree, coeffs)
}

/// Solves `a x_j + b x_{j+1} = r_j`, indices mod `N`.
fn solve_cyclic_two_term(a: f64, b: f64, r: &[f64]) -> std::result::Result<Vec<f64>, String> {
    let n = r.len();
    let mut x = vec![0.0; n];
    if a.abs() >= b.abs() {
        // x_j = r_j / a + ratio · x_{j+1}
        let ratio = -b / a;
        let denom = 1.0 - ratio.powi(n as i32);
        if !(denom.abs() > 1e-13) || a == 0.0 {
            return Err(format!("contraction factor {ratio} has unit modulus"));
        }
        let mut s = 0.0;
        let mut p = 1.0;
        for &rl in r {
            s += p * rl / a;
            p *= ratio;
        }
        x[0] = s / denom;
        for j in (1..n).rev() {
            let next = if j + 1 == n { x[0] } else { x[j + 1] };
            x[j] = (r[j] - b * next) / a;
        }
    } else {
        // x_{j+1} = r_j / b + ratio · x_j
        let ratio = -a / b;
        let denom = 1.0 - ratio.powi(n as i32);
        if !(denom.abs() > 1e-13) {
            return Err(format!("contraction factor {ratio} has unit modulus"));
        }
        let mut s = 0.0;
        let mut p = 1.0;
        for &rl in r.iter().rev() {
            s += p * rl / b;
            p *= ratio;
        }
        x[0] = s / denom;
        for j in 0..n - 1 {
            x[j + 1] = (r[j] - a * x[j]) / b;
        }
    }
    Ok(x)
}

/// L2 and L∞ errors of a DG solution against a reference function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub linf: f64,
}

/// Interior equispaced sample count used for the L∞ error.
pub const DEFAULT_LINF_SAMPLES: usize = 8;

/// L2 error by `quad_order`-point quadrature on every cell; L∞ error as the
/// maximum over quadrature nodes, `samples_per_cell` equispaced interior
/// points, and both one-sided traces of every cell.
pub fn error_norms(
    u_h: &DgFunction,
    exact: impl Fn(f64) -> f64,
    quad_order: usize,
    samples_per_cell: usize,
) -> Result<ErrorNorms> {
    let rule = gauss_legendre(quad_order)?;
    let mesh = u_h.mesh();
    let mut l2 = 0.0;
    let mut linf = 0.0f64;
    let mut vals = vec![0.0; u_h.degree() + 1];
    let mut diff_at = |j: usize, xi: f64| {
        fill_legendre_values(xi, &mut vals);
        let uh: f64 = u_h.cell(j).iter().zip(&vals).map(|(c, p)| c * p).sum();
        uh - exact(mesh.to_physical(j, xi))
    };
    for (j, &h) in mesh.cell_lengths().iter().enumerate() {
        let mut cell = 0.0;
        for (&xi, &wt) in rule.nodes().iter().zip(rule.weights()) {
            let e = diff_at(j, xi);
            cell += wt * e * e;
            linf = linf.max(e.abs());
        }
        l2 += 0.5 * h * cell;
        for i in 0..samples_per_cell {
            let xi = -1.0 + 2.0 * (i + 1) as f64 / (samples_per_cell + 1) as f64;
            linf = linf.max(diff_at(j, xi).abs());
        }
        linf = linf.max(diff_at(j, -1.0).abs()).max(diff_at(j, 1.0).abs());
    }
    Ok(ErrorNorms { l2: l2.sqrt(), linf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{perturbed_mesh, uniform_mesh};
    use std::f64::consts::PI;

    fn unit(n: usize) -> Arc<Mesh1D> {
        Arc::new(uniform_mesh(0.0, 1.0, n).unwrap())
    }

    #[test]
    fn constant_traces() {
        let mesh = unit(4);
        let mut c = vec![0.0; 4 * 3];
        for j in 0..4 {
            c[j * 3] = 1.0;
        }
        let u = DgFunction::new(mesh.clone(), 2, c).unwrap();
        for &x in mesh.interfaces() {
            assert_eq!(u.evaluate(x, Side::Left).unwrap(), 1.0);
            assert_eq!(u.evaluate(x, Side::Right).unwrap(), 1.0);
        }
    }

    #[test]
    fn p1_traces_and_wrap() {
        let mesh = Arc::new(Mesh1D::from_interfaces(vec![0.0, 1.0, 2.0]).unwrap());
        let u = DgFunction::new(mesh, 1, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(u.evaluate(1.0, Side::Left).unwrap(), 1.0);
        assert_eq!(u.evaluate(0.0, Side::Right).unwrap(), -1.0);
        // periodic: the left trace at x = a comes from the last cell
        assert_eq!(u.evaluate(0.0, Side::Left).unwrap(), 0.0);
        assert_eq!(u.evaluate(2.0, Side::Right).unwrap(), -1.0);
        assert!((u.evaluate(0.5, Side::Interior).unwrap()).abs() < 1e-15);
        assert!(u.evaluate(2.5, Side::Interior).is_err());
    }

    #[test]
    fn wrong_coefficient_length() {
        assert!(DgFunction::new(unit(3), 1, vec![0.0; 5]).is_err());
    }

    #[test]
    fn mass_entries() {
        let m = MassMatrix::new(&uniform_mesh(0.0, 1.0, 5).unwrap(), 0);
        assert!(m.entries().iter().all(|&d| (d - 0.2).abs() < 1e-15));
        let m = MassMatrix::new(&Mesh1D::from_interfaces(vec![0.0, 0.3, 1.0]).unwrap(), 2);
        let e = m.entries();
        assert!((e[0] - 0.3).abs() < 1e-15);
        assert!((e[1] - 0.1).abs() < 1e-15);
        assert!((e[2] - 0.06).abs() < 1e-15);
        let x: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let mut y = vec![0.0; 6];
        let mut z = vec![0.0; 6];
        m.apply(&x, &mut y);
        m.apply_inverse(&y, &mut z);
        for (a, b) in x.iter().zip(&z) {
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn half_delta_rejected() {
        let mesh = uniform_mesh(0.0, 1.0, 4).unwrap();
        let err = FluxOperator::assemble(&mesh, 1, 0.5).unwrap_err();
        assert!(err.to_string().contains("delta != 1/2"));
        assert!(gauss_radau_project(|x| x, Arc::new(mesh), 1, 0.5, 6).is_err());
    }

    #[test]
    fn alternating_flux_matches_hand_assembly() {
        // k = 0, δ = 0: G(u; v) = Σ_j v_j (u_{j-1} − u_j) (û = u^-)
        let mesh = uniform_mesh(0.0, 1.0, 3).unwrap();
        let a = FluxOperator::assemble(&mesh, 0, 0.0).unwrap().to_dense();
        let hand = vec![vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]];
        assert_eq!(a, hand);
        // δ = 1 uses u^+
        let a = FluxOperator::assemble(&mesh, 0, 1.0).unwrap().to_dense();
        let hand = vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0]];
        assert_eq!(a, hand);
    }

    #[test]
    fn constants_in_kernel() {
        for k in 0..4 {
            let mesh = perturbed_mesh(0.0, 2.0, 7, 11).unwrap();
            let a = FluxOperator::assemble(&mesh, k, 0.3).unwrap();
            let mut u = vec![0.0; a.dim()];
            for j in 0..7 {
                u[j * (k + 1)] = 4.2;
            }
            let mut y = vec![0.0; a.dim()];
            a.apply(&u, &mut y);
            assert!(y.iter().all(|v| v.abs() < 1e-13), "k={k} {y:?}");
        }
    }

    #[test]
    fn transpose_pairing() {
        let mesh = uniform_mesh(0.0, 1.0, 5).unwrap();
        for k in 0..3 {
            for delta in [0.0, 0.2, 0.9, 1.3] {
                let a = FluxOperator::assemble(&mesh, k, delta).unwrap().to_dense();
                let b = FluxOperator::assemble(&mesh, k, 1.0 - delta).unwrap().to_dense();
                for r in 0..a.len() {
                    for c in 0..a.len() {
                        assert!((a[c][r] + b[r][c]).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn apply_transpose_matches_dense() {
        let mesh = uniform_mesh(0.0, 1.0, 4).unwrap();
        let a = FluxOperator::assemble(&mesh, 2, 0.3).unwrap();
        let d = a.to_dense();
        let u: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut y = vec![0.0; 12];
        a.apply_transpose(&u, &mut y);
        for c in 0..12 {
            let s: f64 = (0..12).map(|r| d[r][c] * u[r]).sum();
            assert!((s - y[c]).abs() < 1e-13);
        }
    }

    #[test]
    fn l2_projection_examples() {
        let u = l2_project(|_| 3.0, unit(4), 2, 6).unwrap();
        for j in 0..4 {
            assert!((u.cell(j)[0] - 3.0).abs() < 1e-14);
            assert!(u.cell(j)[1].abs() < 1e-14 && u.cell(j)[2].abs() < 1e-14);
        }
        let mesh = Arc::new(Mesh1D::from_interfaces(vec![0.0, 1.0, 2.0]).unwrap());
        let u = l2_project(|x| x, mesh, 3, 6).unwrap();
        let c = u.cell(0);
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[1] - 0.5).abs() < 1e-15);
        assert!(c[2].abs() < 1e-15 && c[3].abs() < 1e-15);
    }

    #[test]
    fn mass_norm_matches_quadrature() {
        let mesh = Arc::new(perturbed_mesh(0.0, 1.0, 9, 4).unwrap());
        let coeffs: Vec<f64> = (0..27).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let u = DgFunction::new(mesh.clone(), 2, coeffs).unwrap();
        let rule = gauss_legendre(6).unwrap();
        let mut q = 0.0;
        for j in 0..9 {
            let (l, r) = mesh.cell_bounds(j);
            q += rule.integrate_on(l, r, |x| u.evaluate(x, Side::Interior).unwrap().powi(2));
        }
        let d = u.l2_norm();
        assert!((d * d - q).abs() < 1e-12 * q);
        let m = MassMatrix::new(&mesh, 2);
        assert!((m.norm(u.coeffs()) - d).abs() < 1e-13 * d);
    }

    #[test]
    fn gauss_radau_reproduces_constants() {
        for k in 0..4 {
            for delta in [0.0, 0.3, 1.0] {
                let u = gauss_radau_project(|_| -1.5, unit(6), k, delta, 6).unwrap();
                for j in 0..6 {
                    assert!((u.cell(j)[0] + 1.5).abs() < 1e-14);
                    assert!(u.cell(j)[1..].iter().all(|c| c.abs() < 1e-14));
                }
            }
        }
    }

    #[test]
    fn gauss_radau_interface_conditions() {
        let f = |x: f64| (2.0 * PI * x).sin() + 0.3 * (4.0 * PI * x).cos();
        let mesh = Arc::new(perturbed_mesh(0.0, 1.0, 13, 5).unwrap());
        for k in 0..4 {
            for delta in [-0.4, 0.0, 0.1, 0.7, 1.0, 1.6] {
                let u = gauss_radau_project(f, mesh.clone(), k, delta, 8).unwrap();
                for i in 0..13 {
                    let (m, p) = u.traces(i);
                    let avg = delta * p + (1.0 - delta) * m;
                    assert!((avg - f(mesh.interfaces()[i])).abs() < 1e-12, "k={k} δ={delta}");
                }
            }
        }
    }

    #[test]
    fn exact_representation_has_zero_error() {
        let mesh = unit(5);
        let u = l2_project(|x| 1.0 + x - 2.0 * x * x, mesh, 2, 6).unwrap();
        let e = error_norms(&u, |x| 1.0 + x - 2.0 * x * x, 6, 8).unwrap();
        assert!(e.l2 < 1e-14 && e.linf < 1e-14);
    }

    #[test]
    fn zero_against_sine() {
        let u = DgFunction::zeros(unit(10), 1);
        let e = error_norms(&u, |x| (2.0 * PI * x).sin(), 6, 8).unwrap();
        assert!((e.l2 - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((e.linf - 1.0).abs() < 1e-2);
    }

    #[test]
    fn csv_export() {
        let u = l2_project(|x| x, unit(3), 1, 4).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf, 5).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,u");
        assert_eq!(lines.len(), 1 + 15);
        for l in &lines[1..] {
            let mut it = l.split(',').map(|s| s.parse::<f64>().unwrap());
            let (x, v) = (it.next().unwrap(), it.next().unwrap());
            assert!((x - v).abs() < 1e-14);
        }
    }
}
