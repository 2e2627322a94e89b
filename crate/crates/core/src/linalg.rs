//! Symmetric positive definite storage and Cholesky factorization in
//! envelope (skyline) form.
//!
//! Row `i` of the lower triangle is stored from its first structural nonzero
//! `first[i]` up to the diagonal. Cholesky fill stays inside that envelope,
//! so a periodic banded matrix costs `O(n b)` storage plus a border of
//! wrap-around rows.

use crate::error::{Error, Result};

/// Lower triangle of a symmetric matrix in envelope storage.
#[derive(Debug, Clone)]
pub struct SkylineMatrix {
    first: Vec<usize>,
    /// Offset of row `i` inside `data`; row occupies `start[i]..start[i+1]`.
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineMatrix {
    /// Zero matrix with the given first-column profile (`first[i] <= i`).
    pub fn zeros(first: Vec<usize>) -> Self {
        let mut start = Vec::with_capacity(first.len() + 1);
        start.push(0);
        for (i, &f) in first.iter().enumerate() {
            assert!(f <= i, "envelope must not exceed the diagonal");
            start.push(start[i] + (i - f + 1));
        }
        let len = *start.last().unwrap();
        SkylineMatrix {
            first,
            start,
            data: vec![0.0; len],
        }
    }

    /// Full lower-triangle profile.
    pub fn dense(n: usize) -> Self {
        Self::zeros(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn stored_len(&self) -> usize {
        self.data.len()
    }

    /// Entry `(r, c)` of the symmetric matrix; zero outside the envelope.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (r, c) = if c > r { (c, r) } else { (r, c) };
        if c < self.first[r] {
            0.0
        } else {
            self.data[self.start[r] + c - self.first[r]]
        }
    }

    /// Adds `v` to entry `(r, c)` with `c <= r`. Panics outside the envelope.
    pub fn add_lower(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(c <= r);
        assert!(c >= self.first[r], "entry ({r},{c}) outside envelope");
        self.data[self.start[r] + c - self.first[r]] += v;
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.start[i]..self.start[i + 1]]
    }

    /// `y = A x` using symmetry.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for i in 0..self.dim() {
            let f = self.first[i];
            let row = self.row(i);
            let (diag, off) = row.split_last().unwrap();
            let mut acc = diag * x[i];
            for (c, &a) in (f..i).zip(off) {
                acc += a * x[c];
                y[c] += a * x[i];
            }
            y[i] += acc;
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut sums = vec![0.0; self.dim()];
        for i in 0..self.dim() {
            let f = self.first[i];
            let (diag, off) = self.row(i).split_last().unwrap();
            sums[i] += diag.abs();
            for (c, &a) in (f..i).zip(off) {
                sums[i] += a.abs();
                sums[c] += a.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Cholesky factorization `A = L Lᵀ`.
    pub fn cholesky(&self) -> Result<Cholesky> {
        let n = self.dim();
        let mut l = self.clone();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for i in 0..n {
            let fi = l.first[i];
            for j in fi..=i {
                let fj = l.first[j];
                let lo = fi.max(fj);
                let ri = l.start[i];
                let rj = l.start[j];
                let mut s = l.data[ri + j - fi];
                for c in lo..j {
                    s -= l.data[ri + c - fi] * l.data[rj + c - fj];
                }
                if j < i {
                    let djj = l.data[rj + j - fj];
                    l.data[ri + j - fi] = s / djj;
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::Config(format!(
                            "matrix is not positive definite: pivot {s:e} at row {i}"
                        )));
                    }
                    min_pivot = min_pivot.min(s);
                    max_pivot = max_pivot.max(s);
                    l.data[ri + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Cholesky {
            factor: l,
            min_pivot,
            max_pivot,
        })
    }
}

/// Cholesky factor in the envelope of the original matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    factor: SkylineMatrix,
    min_pivot: f64,
    max_pivot: f64,
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    /// Smallest elimination pivot (before the square root); positive.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn max_pivot(&self) -> f64 {
        self.max_pivot
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let l = &self.factor;
        let n = l.dim();
        for i in 0..n {
            let f = l.first[i];
            let row = l.row(i);
            let (diag, off) = row.split_last().unwrap();
            let s: f64 = off.iter().zip(&x[f..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / diag;
        }
        for i in (0..n).rev() {
            let f = l.first[i];
            let row = l.row(i);
            let (diag, off) = row.split_last().unwrap();
            x[i] /= diag;
            let xi = x[i];
            for (a, y) in off.iter().zip(&mut x[f..i]) {
                *y -= a * xi;
            }
        }
    }
}

pub(crate) fn norm_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
