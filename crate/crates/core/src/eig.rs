//! Dense complex eigensolver: Householder reduction to Hessenberg form,
//! single-shift QR with Wilkinson shifts, eigenvectors from the Schur form
//! and one inverse-iteration refinement step.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{BfError, Result};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Row-major square matrix scratch space.
#[derive(Clone)]
struct Dense {
    n: usize,
    a: Vec<C>,
}

impl Dense {
    fn from_matrix(m: &DMatrix<C>) -> Self {
        let n = m.nrows();
        let mut a = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = m[(i, j)];
            }
        }
        Dense { n, a }
    }

    fn identity(n: usize) -> Self {
        let mut a = vec![ZERO; n * n];
        for i in 0..n {
            a[i * n + i] = ONE;
        }
        Dense { n, a }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> C {
        self.a[i * self.n + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut C {
        &mut self.a[i * self.n + j]
    }

    fn norm(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn to_matrix(&self) -> DMatrix<C> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.at(i, j))
    }
}

/// Reduces `h` to upper Hessenberg form in place and accumulates `q`
/// so that `A = q h q*`.
fn hessenberg(h: &mut Dense, q: &mut Dense) {
    let n = h.n;
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n).map(|i| h.at(i, k).norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h.at(k + 1, k);
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        for i in 0..n {
            v[i] = ZERO;
        }
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = h.at(i, k);
        }
        let vn: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for i in k + 1..n {
            v[i] /= vn;
        }
        // h <- (I - 2 v v*) h
        for j in k..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += v[i].conj() * h.at(i, j);
            }
            s *= 2.0;
            for i in k + 1..n {
                *h.at_mut(i, j) -= v[i] * s;
            }
        }
        // h <- h (I - 2 v v*), q <- q (I - 2 v v*)
        for m in [&mut *h, &mut *q] {
            for i in 0..n {
                let row = &mut m.a[i * n..(i + 1) * n];
                let mut s = ZERO;
                for j in k + 1..n {
                    s += row[j] * v[j];
                }
                s *= 2.0;
                for j in k + 1..n {
                    row[j] -= s * v[j].conj();
                }
            }
        }
        for i in k + 2..n {
            *h.at_mut(i, k) = ZERO;
        }
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: C, b: C) -> (f64, C) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

fn wilkinson_shift(a: C, b: C, c: C, d: C) -> C {
    let tr_half = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = tr_half + root;
    let l2 = tr_half - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur form by shifted QR on a Hessenberg matrix; `z` accumulates
/// the unitary factors when present.
fn schur(h: &mut Dense, mut z: Option<&mut Dense>) -> Result<()> {
    let n = h.n;
    if n <= 1 {
        return Ok(());
    }
    let ulp = f64::EPSILON;
    let hnorm = h.norm().max(f64::MIN_POSITIVE);
    let max_iter = 50 * n;
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h.at(l, l - 1).norm();
            let mut scale = h.at(l - 1, l - 1).norm() + h.at(l, l).norm();
            if scale == 0.0 {
                scale = hnorm;
            }
            if s <= ulp * scale || s <= f64::MIN_POSITIVE {
                *h.at_mut(l, l - 1) = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        its += 1;
        if total > max_iter {
            return Err(BfError::NoConvergence {
                what: "QR iteration",
                iterations: total,
            });
        }
        let shift = if its % 11 == 10 {
            let ex = h.at(hi, hi - 1).re.abs() + if hi >= 2 { h.at(hi - 1, hi - 2).re.abs() } else { 0.0 };
            h.at(hi, hi) + C::new(0.75 * ex, 0.0)
        } else {
            wilkinson_shift(
                h.at(hi - 1, hi - 1),
                h.at(hi - 1, hi),
                h.at(hi, hi - 1),
                h.at(hi, hi),
            )
        };
        for k in l..=hi {
            *h.at_mut(k, k) -= shift;
        }
        let mut rots: Vec<(f64, C)> = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h.at(k, k), h.at(k + 1, k));
            for j in k..n {
                let x = h.at(k, j);
                let y = h.at(k + 1, j);
                *h.at_mut(k, j) = x * c + s * y;
                *h.at_mut(k + 1, j) = -s.conj() * x + y * c;
            }
            *h.at_mut(k + 1, k) = ZERO;
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = l + idx;
            let rows = (k + 2).min(hi + 1);
            for i in 0..rows {
                let x = h.at(i, k);
                let y = h.at(i, k + 1);
                *h.at_mut(i, k) = x * c + y * s.conj();
                *h.at_mut(i, k + 1) = -x * s + y * c;
            }
            if let Some(z) = z.as_deref_mut() {
                for i in 0..n {
                    let x = z.at(i, k);
                    let y = z.at(i, k + 1);
                    *z.at_mut(i, k) = x * c + y * s.conj();
                    *z.at_mut(i, k + 1) = -x * s + y * c;
                }
            }
        }
        for k in l..=hi {
            *h.at_mut(k, k) += shift;
        }
    }
    Ok(())
}

/// Eigenvectors of the upper triangular `t`, as columns.
fn triangular_eigenvectors(t: &Dense) -> Dense {
    let n = t.n;
    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let smin = f64::EPSILON * tnorm;
    let mut x = Dense {
        n,
        a: vec![ZERO; n * n],
    };
    let mut col = vec![ZERO; n];
    for k in 0..n {
        let lam = t.at(k, k);
        for v in col.iter_mut() {
            *v = ZERO;
        }
        col[k] = ONE;
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t.at(i, j) * col[j];
            }
            let mut d = t.at(i, i) - lam;
            if d.norm() < smin {
                d = C::new(smin, 0.0);
            }
            col[i] = -s / d;
            let big = col[i].norm();
            if big > 1e100 {
                for v in col.iter_mut().take(k + 1) {
                    *v /= big;
                }
            }
        }
        for i in 0..=k {
            *x.at_mut(i, k) = col[i];
        }
    }
    x
}

/// Solves `(h - lam) y = b` for upper Hessenberg `h` by Gaussian elimination
/// with adjacent-row pivoting.
fn hessenberg_solve(h: &Dense, lam: C, b: &[C]) -> Vec<C> {
    let n = h.n;
    let mut m = h.a.clone();
    for i in 0..n {
        m[i * n + i] -= lam;
    }
    let mut y = b.to_vec();
    let tiny = f64::EPSILON * h.norm().max(f64::MIN_POSITIVE);
    for k in 0..n.saturating_sub(1) {
        let (p, q) = (m[k * n + k], m[(k + 1) * n + k]);
        if q.norm() > p.norm() {
            for j in k..n {
                m.swap(k * n + j, (k + 1) * n + j);
            }
            y.swap(k, k + 1);
        }
        let mut piv = m[k * n + k];
        if piv.norm() < tiny {
            piv = C::new(tiny, 0.0);
            m[k * n + k] = piv;
        }
        let f = m[(k + 1) * n + k] / piv;
        if f.norm() != 0.0 {
            for j in k..n {
                let v = m[k * n + j];
                m[(k + 1) * n + j] -= f * v;
            }
            let yk = y[k];
            y[k + 1] -= f * yk;
        }
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in i + 1..n {
            s -= m[i * n + j] * y[j];
        }
        let mut d = m[i * n + i];
        if d.norm() < tiny {
            d = C::new(tiny, 0.0);
        }
        y[i] = s / d;
    }
    y
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C>,
    /// Unit right eigenvectors as columns.
    pub eigenvectors: Option<DMatrix<C>>,
    /// `||A v - lambda v|| / ||A||` per pair (empty without vectors).
    pub residuals: Vec<f64>,
    /// Frobenius norm of the input.
    pub norm: f64,
    /// Fourier truncation of the operator, when known.
    pub k_max: Option<usize>,
}

impl SpectrumResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn vector(&self, j: usize) -> Option<DVector<C>> {
        self.eigenvectors.as_ref().map(|v| v.column(j).into_owned())
    }
}

fn residual(a: &DMatrix<C>, lam: C, v: &DVector<C>, anorm: f64) -> f64 {
    (a * v - v * lam).norm() / anorm
}

/// Eigenvalues, and optionally refined unit eigenvectors, of a dense matrix.
pub fn eig_matrix(a: &DMatrix<C>, vectors: bool) -> Result<SpectrumResult> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(BfError::InvalidInput("matrix must be square".into()));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(BfError::InvalidInput("matrix has non-finite entries".into()));
    }
    let anorm = a.norm();
    let mut h = Dense::from_matrix(a);
    let mut q = Dense::identity(n);
    hessenberg(&mut h, &mut q);
    if !vectors {
        schur(&mut h, None)?;
        return Ok(SpectrumResult {
            eigenvalues: (0..n).map(|i| h.at(i, i)).collect(),
            eigenvectors: None,
            residuals: Vec::new(),
            norm: anorm,
            k_max: None,
        });
    }
    let hess = h.clone();
    let mut z = q.clone();
    schur(&mut h, Some(&mut z))?;
    let eigenvalues: Vec<C> = (0..n).map(|i| h.at(i, i)).collect();
    let y = triangular_eigenvectors(&h);
    let vecs = z.to_matrix() * y.to_matrix();
    let qm = q.to_matrix();
    let qa = qm.adjoint();
    let scale = anorm.max(f64::MIN_POSITIVE);
    let mut out = DMatrix::from_element(n, n, ZERO);
    let mut residuals = Vec::with_capacity(n);
    for (j, &lam) in eigenvalues.iter().enumerate() {
        let mut v = vecs.column(j).into_owned();
        let vn = v.norm();
        if vn > 0.0 {
            v /= C::new(vn, 0.0);
        }
        let r0 = residual(a, lam, &v, scale);
        let b = &qa * &v;
        let sol = hessenberg_solve(&hess, lam, b.as_slice());
        let mut w = &qm * DVector::from_vec(sol);
        let wn = w.norm();
        let mut best = (r0, v);
        if wn.is_finite() && wn > 0.0 {
            w /= C::new(wn, 0.0);
            let r1 = residual(a, lam, &w, scale);
            if r1 < best.0 {
                best = (r1, w);
            }
        }
        residuals.push(best.0);
        out.set_column(j, &best.1);
    }
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors: Some(out),
        residuals,
        norm: anorm,
        k_max: None,
    })
}

/// Schur decomposition `A = Z T Z*`.
pub fn schur_decomposition(a: &DMatrix<C>) -> Result<(DMatrix<C>, DMatrix<C>)> {
    let n = a.nrows();
    let mut h = Dense::from_matrix(a);
    let mut q = Dense::identity(n);
    hessenberg(&mut h, &mut q);
    schur(&mut h, Some(&mut q))?;
    Ok((q.to_matrix(), h.to_matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input_is_exact() {
        let d = [C::new(1.0, 2.0), C::new(-3.0, 0.5), C::new(0.0, -1.0)];
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&d));
        let s = eig_matrix(&a, true).unwrap();
        let mut got = s.eigenvalues.clone();
        got.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        let mut want = d.to_vec();
        want.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert_eq!(got, want);
        assert!(s.max_residual() < 1e-15);
    }

    #[test]
    fn companion_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0].map(|x| C::new(x, 0.0)),
        );
        let s = eig_matrix(&a, true).unwrap();
        let mut re: Vec<f64> = s.eigenvalues.iter().map(|z| z.re).collect();
        re.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (g, w) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((g - w).abs() < 1e-12);
        }
        assert!(s.max_residual() < 1e-13);
    }

    #[test]
    fn schur_reconstructs() {
        let a = DMatrix::from_fn(6, 6, |i, j| C::new((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0));
        let (z, t) = schur_decomposition(&a).unwrap();
        assert!((&z * &t * z.adjoint() - &a).norm() < 1e-12 * a.norm());
        for i in 0..6 {
            for j in 0..i {
                assert_eq!(t[(i, j)], ZERO);
            }
        }
    }
}
