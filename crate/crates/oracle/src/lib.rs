//! Slow, simple reference linear algebra for cross-checking the library.
//!
//! Complex Hermitian problems are solved through the real symmetric embedding
//! `[[Re, -Im], [Im, Re]]` with cyclic Jacobi rotations, so nothing here shares
//! code paths with the decompositions used by `kframe-core`.

use num_complex::Complex64;

pub type C = Complex64;

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| C::new((i == j) as u8 as f64, 0.0))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn at(&self, i: usize, j: usize) -> C {
        self.data[i * self.cols + j]
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        CMat::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self.at(i, k) * other.at(k, j)).sum()
        })
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.at(j, i).conj())
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self.at(i, j) - other.at(i, j))
    }

    pub fn scale(&self, s: f64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self.at(i, j) * s)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, x: &[C]) -> Vec<C> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self.at(i, k) * x[k]).sum())
            .collect()
    }

    fn embed(&self) -> RMat {
        let (r, c) = (self.rows, self.cols);
        let mut m = RMat::zeros(2 * r, 2 * c);
        for i in 0..r {
            for j in 0..c {
                let z = self.at(i, j);
                m.set(i, j, z.re);
                m.set(i + r, j + c, z.re);
                m.set(i, j + c, -z.im);
                m.set(i + r, j, z.im);
            }
        }
        m
    }

    fn unembed(m: &RMat) -> CMat {
        let (r, c) = (m.rows / 2, m.cols / 2);
        CMat::from_fn(r, c, |i, j| C::new(m.at(i, j), m.at(i + r, j)))
    }
}

#[derive(Clone, Debug)]
struct RMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RMat {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }
}

/// Cyclic Jacobi on a real symmetric matrix. Returns ascending eigenvalues and
/// the matching orthonormal eigenvectors as columns.
fn jacobi(a: &RMat) -> (Vec<f64>, RMat) {
    let n = a.rows;
    let mut a = a.clone();
    // symmetrize against round-off in the input
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a.at(i, j) + a.at(j, i));
            a.set(i, j, m);
            a.set(j, i, m);
        }
    }
    let mut v = RMat::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let total: f64 = a.data.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.at(i, j) * a.at(i, j))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.at(i, i).total_cmp(&a.at(j, j)));
    let values = order.iter().map(|&i| a.at(i, i)).collect();
    let mut vecs = RMat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs.set(k, new, v.at(k, old));
        }
    }
    (values, vecs)
}

fn hermitian_embedding(h: &CMat) -> RMat {
    assert_eq!(h.rows, h.cols, "square matrix expected");
    // Hermitian part, so tiny asymmetry in the input does not leak in
    let sym = CMat::from_fn(h.rows, h.cols, |i, j| {
        (h.at(i, j) + h.at(j, i).conj()) * 0.5
    });
    sym.embed()
}

/// Ascending eigenvalues of the Hermitian part of `h`.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    // the embedding repeats every eigenvalue twice
    let (values, _) = jacobi(&hermitian_embedding(h));
    values.into_iter().step_by(2).collect()
}

/// `f(h)` for the Hermitian part of `h`, through its spectral decomposition.
pub fn hermitian_function(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, v) = jacobi(&hermitian_embedding(h));
    let n = v.rows;
    let mut out = RMat::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        let w = f(lam);
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                let cur = out.at(i, j);
                out.set(i, j, cur + w * v.at(i, k) * v.at(j, k));
            }
        }
    }
    CMat::unembed(&out)
}

/// Pseudo-inverse of a Hermitian positive semidefinite matrix; eigenvalues at
/// or below `rel_cutoff * lambda_max` count as zero.
pub fn psd_pinv(h: &CMat, rel_cutoff: f64) -> CMat {
    let top = hermitian_eigenvalues(h)
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    let cut = rel_cutoff * top;
    hermitian_function(h, |x| if x > cut { 1.0 / x } else { 0.0 })
}

pub fn spectral_norm(m: &CMat) -> f64 {
    let g = m.adjoint().mul(m);
    hermitian_eigenvalues(&g)
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

/// Largest `t` with `S - t K K* >= 0`, computed as `1 / lambda_max(K* S^+ K)`
/// when `R(K)` lies in `R(S)`, and `0` otherwise. `None` for `K = 0`.
pub fn kframe_lower_bound(s: &CMat, k: &CMat) -> Option<f64> {
    if spectral_norm(k) <= 1e-12 {
        return None;
    }
    let s_pinv = psd_pinv(s, 1e-11);
    let proj = s.mul(&s_pinv);
    let leak = k.sub(&proj.mul(k));
    if leak.frobenius() > 1e-7 * k.frobenius() {
        return Some(0.0);
    }
    let m = k.adjoint().mul(&s_pinv).mul(k);
    let top = hermitian_eigenvalues(&m).last().copied().unwrap_or(0.0);
    Some(1.0 / top)
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &CMat, b: &[C]) -> Option<Vec<C>> {
    let n = a.rows;
    assert_eq!(n, a.cols);
    let mut m = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m.at(i, col).norm().total_cmp(&m.at(j, col).norm()))?;
        if m.at(piv, col).norm() == 0.0 {
            return None;
        }
        for j in 0..n {
            m.data.swap(col * n + j, piv * n + j);
        }
        x.swap(col, piv);
        for i in col + 1..n {
            let f = m.at(i, col) / m.at(col, col);
            for j in col..n {
                let v = m.at(col, j);
                m.data[i * n + j] -= f * v;
            }
            let xc = x[col];
            x[i] -= f * xc;
        }
    }
    for i in (0..n).rev() {
        let s: C = (i + 1..n).map(|j| m.at(i, j) * x[j]).sum();
        x[i] = (x[i] - s) / m.at(i, i);
    }
    Some(x)
}
