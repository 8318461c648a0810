//! 4x4 Hamiltonian and reversible algebra: block structure, the first
//! decoupling step, the Sylvester system and full block-diagonalization.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{BfError, Result};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// `[[0, 1], [-1, 0]]`.
pub fn j2() -> Matrix2<C> {
    Matrix2::new(ZERO, ONE, -ONE, ZERO)
}

/// `diag(J_2, J_2)`.
pub fn j4() -> Matrix4<C> {
    let mut j = Matrix4::zeros();
    j[(0, 1)] = ONE;
    j[(1, 0)] = -ONE;
    j[(2, 3)] = ONE;
    j[(3, 2)] = -ONE;
    j
}

/// `L = J_4 [[E, F], [F*, G]] + i shift`, with `E`, `G` Hermitian and the
/// entries of the middle matrix alternating real and imaginary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianBlocks4 {
    pub e: Matrix2<C>,
    pub f: Matrix2<C>,
    pub g: Matrix2<C>,
    /// Imaginary multiple of the identity added to `J_4 B`.
    pub shift: f64,
}

impl HamiltonianBlocks4 {
    pub fn new(e: Matrix2<C>, f: Matrix2<C>, g: Matrix2<C>) -> Self {
        HamiltonianBlocks4 { e, f, g, shift: 0.0 }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn b(&self) -> Matrix4<C> {
        let mut b = Matrix4::zeros();
        b.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.e);
        b.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.f);
        b.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.f.adjoint());
        b.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.g);
        b
    }

    /// `J_4 B + i shift`.
    pub fn l(&self) -> Matrix4<C> {
        j4() * self.b() + Matrix4::identity() * C::new(0.0, self.shift)
    }

    pub fn norm(&self) -> f64 {
        self.b().norm()
    }

    /// Diagonal blocks `J_2 E + i shift` and `J_2 G + i shift`.
    pub fn diagonal_blocks(&self) -> (Matrix2<C>, Matrix2<C>) {
        let s = Matrix2::identity() * C::new(0.0, self.shift);
        (j2() * self.e + s, j2() * self.g + s)
    }
}

pub const STRUCTURE_TOL: f64 = 1e-12;

pub fn check_structure(m: &Matrix4<C>) -> Result<HamiltonianBlocks4> {
    check_structure_with(m, 0.0, STRUCTURE_TOL)
}

/// Factors `m - i shift = J_4 B` and validates the Hamiltonian and
/// reversibility pattern of `B` relative to `tol * max(1, ||B||)`. On
/// success the returned blocks are the exact structured projection of `B`.
pub fn check_structure_with(m: &Matrix4<C>, shift: f64, tol: f64) -> Result<HamiltonianBlocks4> {
    let shifted = m - Matrix4::identity() * C::new(0.0, shift);
    let b = -j4() * shifted;
    let scale = tol * b.norm().max(1.0);
    let mut bad = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let z = b[(i, j)];
            let wrong_part = if (i + j) % 2 == 0 { z.im } else { z.re };
            let asym = (z - b[(j, i)].conj()).norm();
            if wrong_part.abs() > scale || asym > scale {
                bad.push((i, j));
            }
        }
    }
    if !bad.is_empty() {
        return Err(BfError::StructureViolation { entries: bad });
    }
    let h = (b + b.adjoint()) * C::new(0.5, 0.0);
    let clean = Matrix4::from_fn(|i, j| {
        let z = h[(i, j)];
        if (i + j) % 2 == 0 {
            C::new(z.re, 0.0)
        } else {
            C::new(0.0, z.im)
        }
    });
    Ok(HamiltonianBlocks4 {
        e: clean.fixed_view::<2, 2>(0, 0).into_owned(),
        f: clean.fixed_view::<2, 2>(0, 2).into_owned(),
        g: clean.fixed_view::<2, 2>(2, 2).into_owned(),
        shift,
    })
}

/// `Y = I + m [[0, -P], [Q, 0]]` with `P = diag(0, 1)`, `Q = diag(1, 0)`.
pub fn decoupling_matrix(m: f64) -> Matrix4<C> {
    let mut y = Matrix4::identity();
    y[(1, 3)] = C::new(-m, 0.0);
    y[(2, 0)] = C::new(m, 0.0);
    y
}

/// Conjugation by `decoupling_matrix(-F_11 / G_11)`, which cancels `F_11`.
/// Returns the new blocks and the transform.
pub fn first_decoupling(blocks: &HamiltonianBlocks4) -> Result<(HamiltonianBlocks4, Matrix4<C>)> {
    let g11 = blocks.g[(0, 0)].re;
    if g11.abs() < 1e-12 * blocks.norm() || g11 == 0.0 {
        return Err(BfError::DegenerateG { value: g11 });
    }
    let m = -blocks.f[(0, 0)].re / g11;
    let y = decoupling_matrix(m);
    let b1 = y.adjoint() * blocks.b() * y;
    let mut out = HamiltonianBlocks4 {
        e: b1.fixed_view::<2, 2>(0, 0).into_owned(),
        f: b1.fixed_view::<2, 2>(0, 2).into_owned(),
        g: b1.fixed_view::<2, 2>(2, 2).into_owned(),
        shift: blocks.shift,
    };
    out.f[(0, 0)] = ZERO;
    Ok((out, y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SylvesterCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl SylvesterCoeffs {
    /// Coefficients read off Hermitian blocks written as
    /// `E = [[E11, i E12], [-i E12, E22]]`.
    pub fn from_blocks(e: &Matrix2<C>, g: &Matrix2<C>) -> Self {
        SylvesterCoeffs {
            a: g[(0, 1)].im - e[(0, 1)].im,
            b: g[(0, 0)].re,
            c: e[(1, 1)].re,
            d: g[(1, 1)].re,
            e: e[(0, 0)].re,
        }
    }
}

pub fn sylvester_matrix(s: &SylvesterCoeffs) -> Matrix4<f64> {
    let SylvesterCoeffs { a, b, c, d, e } = *s;
    Matrix4::new(
        a, b, c, 0.0, //
        d, a, 0.0, -c, //
        e, 0.0, a, -b, //
        0.0, -e, -d, a,
    )
}

pub fn sylvester_det(s: &SylvesterCoeffs) -> f64 {
    let SylvesterCoeffs { a, b, c, d, e } = *s;
    let bd = b * d;
    let ce = c * e;
    (bd - a * a).powi(2) - 2.0 * ce * (a * a + bd - 0.5 * ce)
}

pub fn sylvester_inverse(s: &SylvesterCoeffs) -> Result<Matrix4<f64>> {
    let det = sylvester_det(s);
    let norm = sylvester_matrix(s).norm();
    if !(det.abs() > 1e-14 * norm.powi(4)) {
        return Err(BfError::SingularSystem { det });
    }
    let SylvesterCoeffs { a, b, c, d, e } = *s;
    let a2 = a * a;
    let bd = b * d;
    let ce = c * e;
    let adj = Matrix4::new(
        a * (a2 - bd - ce),
        b * (-a2 + bd - ce),
        -c * (a2 + bd - ce),
        -2.0 * a * b * c,
        d * (-a2 + bd - ce),
        a * (a2 - bd - ce),
        2.0 * a * c * d,
        -c * (-a2 - bd + ce),
        -e * (a2 + bd - ce),
        2.0 * a * b * e,
        a * (a2 - bd - ce),
        b * (a2 - bd + ce),
        -2.0 * a * d * e,
        -e * (-a2 - bd + ce),
        d * (a2 - bd + ce),
        a * (a2 - bd - ce),
    );
    Ok(adj / det)
}

/// Solves `D1 X - X D0 = -J_2 F` for `X = [[x11, i x12], [i x21, x22]]`
/// with `D1 = J_2 E`, `D0 = J_2 G`.
pub fn solve_homological(d1: &Matrix2<C>, d0: &Matrix2<C>, f: &Matrix2<C>) -> Result<Matrix2<C>> {
    let e = -j2() * d1;
    let g = -j2() * d0;
    let s = SylvesterCoeffs::from_blocks(&e, &g);
    let rhs = nalgebra::Vector4::new(-f[(1, 0)].im, f[(1, 1)].re, -f[(0, 0)].re, f[(0, 1)].im);
    if rhs.iter().all(|v| *v == 0.0) {
        return Ok(Matrix2::zeros());
    }
    let x = sylvester_inverse(&s)? * rhs;
    Ok(Matrix2::new(
        C::new(x[0], 0.0),
        C::new(0.0, x[1]),
        C::new(0.0, x[2]),
        C::new(x[3], 0.0),
    ))
}

/// `sum S^n / n!`, stopped once a term falls below `1e-18` of the sum.
pub fn expm(s: &Matrix4<C>) -> Matrix4<C> {
    let mut sum = Matrix4::identity();
    let mut term = Matrix4::identity();
    for n in 1..200 {
        term = term * s / C::new(n as f64, 0.0);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// `J_4 [[0, M], [M*, 0]]` with `M = J_2 X`.
pub fn generator(x: &Matrix2<C>) -> Matrix4<C> {
    let m = j2() * x;
    let mut off = Matrix4::zeros();
    off.fixed_view_mut::<2, 2>(0, 2).copy_from(&m);
    off.fixed_view_mut::<2, 2>(2, 0).copy_from(&m.adjoint());
    j4() * off
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    /// Block carrying the pair continued from the `k = +-1` modes.
    pub u2: Matrix2<C>,
    /// Block carrying the pair continued from the zero mode.
    pub s2: Matrix2<C>,
    /// `T` with `T^{-1} L T = diag(u2, s2)`.
    pub transform: Matrix4<C>,
    pub blocks: HamiltonianBlocks4,
    pub iterations: usize,
}

pub const DEFAULT_MAX_ITER: usize = 30;

pub fn block_diagonalize(blocks: &HamiltonianBlocks4) -> Result<BlockDiagonal> {
    block_diagonalize_with(blocks, 1e-12, DEFAULT_MAX_ITER)
}

fn coupling_gap(blocks: &HamiltonianBlocks4) -> f64 {
    let (d1, d0) = blocks.diagonal_blocks();
    let (p, q) = (eigenpair_of_2x2(&d1), eigenpair_of_2x2(&d0));
    let mut gap = f64::INFINITY;
    for x in [p.0, p.1] {
        for y in [q.0, q.1] {
            gap = gap.min((x - y).norm());
        }
    }
    gap
}

/// Removes the off-diagonal blocks by one decoupling conjugation followed by
/// repeated `exp(S)` conjugations solving the homological equation, until
/// `||F|| <= tol * ||B||`. Every step is checked for the structure pattern.
pub fn block_diagonalize_with(blocks: &HamiltonianBlocks4, tol: f64, max_iter: usize) -> Result<BlockDiagonal> {
    let norm = blocks.norm();
    let target = tol * norm.max(f64::MIN_POSITIVE);
    let mut transform = Matrix4::identity();
    let mut cur = *blocks;
    if cur.f.norm() <= target {
        return Ok(finish(cur, transform, 0));
    }
    if cur.f.norm() >= coupling_gap(&cur) {
        return Err(BfError::InvalidInput(
            "off-diagonal coupling exceeds the gap between diagonal spectra".into(),
        ));
    }
    if cur.f[(0, 0)] != ZERO && cur.g[(0, 0)].re.abs() >= 1e-12 * norm {
        let (next, y) = first_decoupling(&cur)?;
        cur = next;
        transform = y;
    }
    for it in 1..=max_iter {
        if cur.f.norm() <= target {
            return Ok(finish(cur, transform, it - 1));
        }
        let (d1, d0) = {
            let j = j2();
            (j * cur.e, j * cur.g)
        };
        let x = solve_homological(&d1, &d0, &cur.f)?;
        let s = generator(&x);
        let l = j4() * cur.b();
        let next = expm(&s) * l * expm(&-s);
        transform *= expm(&-s);
        cur = check_structure_with(&next, 0.0, 1e-9)?.with_shift(cur.shift);
    }
    if cur.f.norm() <= target {
        return Ok(finish(cur, transform, max_iter));
    }
    Err(BfError::NoConvergence {
        what: "block diagonalization",
        iterations: max_iter,
    })
}

fn finish(mut blocks: HamiltonianBlocks4, transform: Matrix4<C>, iterations: usize) -> BlockDiagonal {
    blocks.f = Matrix2::zeros();
    let (u2, s2) = blocks.diagonal_blocks();
    BlockDiagonal {
        u2,
        s2,
        transform,
        blocks,
        iterations,
    }
}

fn eigenpair_of_2x2(m: &Matrix2<C>) -> (C, C) {
    let half_tr = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let half_diff = (m[(0, 0)] - m[(1, 1)]) * 0.5;
    let root = (half_diff * half_diff + m[(0, 1)] * m[(1, 0)]).sqrt();
    (half_tr + root, half_tr - root)
}

/// Eigenvalues `diag +- sqrt(U12 U21)` of a block with identical diagonal
/// entries; the first has the larger real part, or the larger imaginary part
/// when the real parts agree.
pub fn eigenpair_of_u(u2: &Matrix2<C>) -> (C, C) {
    let (x, y) = eigenpair_of_2x2(u2);
    let scale = 1e-12 * u2.norm().max(1.0);
    let x_first = if (x.re - y.re).abs() > scale {
        x.re > y.re
    } else {
        x.im >= y.im
    };
    if x_first {
        (x, y)
    } else {
        (y, x)
    }
}

/// `||T* J_4 T - J_4||`.
pub fn symplectic_defect(t: &Matrix4<C>) -> f64 {
    (t.adjoint() * j4() * t - j4()).norm()
}
