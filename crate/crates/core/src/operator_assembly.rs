//! Dense Fourier truncations of the Floquet operator and its factors.
//!
//! Unknowns are ordered component-major: index `comp * (2K+1) + (k + K)` for
//! component `comp` in `{0, 1}` (elevation, potential) and mode `|k| <= K`.

use std::io::{self, Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::closed_form::phase_speed;
use crate::error::{BfError, Result};
use crate::fourier::PeriodicProfile;
use crate::stokes_expansion::{expand, StokesExpansion};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Extra modes kept on each side inside the composition defining `Sigma`.
pub const SIGMA_PAD: usize = 20;

#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub matrix: DMatrix<C>,
    pub kappa: f64,
    pub mu: f64,
    pub eps: f64,
    pub k_max: usize,
}

impl TruncatedOperator {
    pub fn modes(&self) -> usize {
        2 * self.k_max + 1
    }

    pub fn dim(&self) -> usize {
        2 * self.modes()
    }

    pub fn index(&self, comp: usize, k: i64) -> usize {
        layout_index(self.k_max, comp, k)
    }

    /// Frobenius norm, the `||L||` of every relative tolerance.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

pub fn layout_index(k_max: usize, comp: usize, k: i64) -> usize {
    comp * (2 * k_max + 1) + (k + k_max as i64) as usize
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu.abs() < 0.5 {
        Ok(())
    } else {
        Err(BfError::InvalidInput(format!("mu must lie in (-1/2, 1/2), got {mu}")))
    }
}

fn i_xi(k: i64, mu: f64) -> C {
    C::new(0.0, k as f64 + mu)
}

/// Per-mode blocks `[[i c xi, |xi|], [-1 - kappa xi^2, i c xi]]`, `xi = k + mu`.
pub fn assemble_flat(kappa: f64, mu: f64, k_max: usize) -> Result<TruncatedOperator> {
    check_mu(mu)?;
    let c = phase_speed(kappa);
    let m = 2 * k_max + 1;
    let mut a = DMatrix::from_element(2 * m, 2 * m, ZERO);
    let km = k_max as i64;
    for k in -km..=km {
        let r = (k + km) as usize;
        let d = i_xi(k, mu);
        a[(r, r)] = d * C::new(c, 0.0);
        a[(r, m + r)] = C::new((k as f64 + mu).abs(), 0.0);
        a[(m + r, r)] = -C::new(1.0, 0.0) + (d * d) * kappa;
        a[(m + r, m + r)] = C::new(c, 0.0) * d;
    }
    Ok(TruncatedOperator {
        matrix: a,
        kappa,
        mu,
        eps: 0.0,
        k_max,
    })
}

/// `(M_f)_{kl} = f_{k-l}` for rows `|k| <= rows`, columns `|l| <= cols`.
fn multiplication(f: &PeriodicProfile, rows: usize, cols: usize) -> DMatrix<C> {
    let (r0, c0) = (rows as i64, cols as i64);
    DMatrix::from_fn(2 * rows + 1, 2 * cols + 1, |i, j| {
        f.coeff((i as i64 - r0) - (j as i64 - c0))
    })
}

/// `q (d + i mu) g (d + i mu) q` with `q = 1/(1 + frakp_x)` on `|k| <= K`.
pub fn sigma_matrix(
    expansion: &StokesExpansion,
    frakp: &PeriodicProfile,
    mu: f64,
    eps: f64,
    k_max: usize,
) -> Result<DMatrix<C>> {
    check_mu(mu)?;
    let g = expansion.g_profile(eps, 2);
    sigma_from_profiles(&g, frakp, mu, k_max)
}

pub fn sigma_from_profiles(
    g: &PeriodicProfile,
    frakp: &PeriodicProfile,
    mu: f64,
    k_max: usize,
) -> Result<DMatrix<C>> {
    let ext = k_max + SIGMA_PAD;
    let q = frakp.derivative().add_constant(1.0).reciprocal(k_max + ext);
    let left = multiplication(&q, k_max, ext);
    let right = multiplication(&q, ext, k_max);
    let mid = multiplication(g, ext, ext);
    let e0 = ext as i64;
    // Scale columns of `left` and rows of `right` by i(m + mu).
    let mut left = left;
    for (j, mut col) in left.column_iter_mut().enumerate() {
        col *= i_xi(j as i64 - e0, mu);
    }
    let mut right = right;
    for (i, mut row) in right.row_iter_mut().enumerate() {
        row *= i_xi(i as i64 - e0, mu);
    }
    Ok(left * mid * right)
}

fn check_shapes(frakp: &PeriodicProfile) -> Result<()> {
    if frakp.k_max() == 0 {
        return Err(BfError::InvalidInput("frakp must carry at least one mode".into()));
    }
    Ok(())
}

/// The truncated Floquet operator `L_{mu,eps}`.
pub fn assemble(
    expansion: &StokesExpansion,
    frakp: &PeriodicProfile,
    mu: f64,
    eps: f64,
    k_max: usize,
) -> Result<TruncatedOperator> {
    check_mu(mu)?;
    check_shapes(frakp)?;
    let kappa = expansion.kappa();
    let c = expansion.c_kappa;
    let p = expansion.p_profile(eps, 2);
    let a = expansion.a_profile(eps, 2);
    let sigma = sigma_matrix(expansion, frakp, mu, eps, k_max)?;
    let m = 2 * k_max + 1;
    let km = k_max as i64;
    let mut out = DMatrix::from_element(2 * m, 2 * m, ZERO);
    for k in -km..=km {
        let r = (k + km) as usize;
        for l in -km..=km {
            let s = (l + km) as usize;
            let delta = if k == l { 1.0 } else { 0.0 };
            let cp = C::new(c * delta, 0.0) + p.coeff(k - l);
            out[(r, s)] = i_xi(k, mu) * cp;
            out[(m + r, m + s)] = cp * i_xi(l, mu);
            out[(m + r, s)] = -(C::new(delta, 0.0) + a.coeff(k - l)) + sigma[(r, s)] * kappa;
        }
        out[(r, m + r)] = C::new((k as f64 + mu).abs(), 0.0);
    }
    Ok(TruncatedOperator {
        matrix: out,
        kappa,
        mu,
        eps,
        k_max,
    })
}

/// `|D + mu|` through `|D| + mu sgn(D) + |mu| Pi_0`.
fn abs_d_plus_mu(k: i64, mu: f64) -> f64 {
    let pi0 = if k == 0 { mu.abs() } else { 0.0 };
    k.abs() as f64 + mu * k.signum() as f64 + pi0
}

/// Hermitian `B` with `L = J B`.
#[allow(non_snake_case)]
pub fn assemble_B(
    expansion: &StokesExpansion,
    frakp: &PeriodicProfile,
    mu: f64,
    eps: f64,
    k_max: usize,
) -> Result<DMatrix<C>> {
    check_mu(mu)?;
    check_shapes(frakp)?;
    let kappa = expansion.kappa();
    let c = expansion.c_kappa;
    let p = expansion.p_profile(eps, 2);
    let a = expansion.a_profile(eps, 2);
    let sigma = sigma_matrix(expansion, frakp, mu, eps, k_max)?;
    let m = 2 * k_max + 1;
    let km = k_max as i64;
    let mut out = DMatrix::from_element(2 * m, 2 * m, ZERO);
    for k in -km..=km {
        let r = (k + km) as usize;
        for l in -km..=km {
            let s = (l + km) as usize;
            let delta = if k == l { 1.0 } else { 0.0 };
            let cp = C::new(c * delta, 0.0) + p.coeff(k - l);
            out[(r, s)] = C::new(delta, 0.0) + a.coeff(k - l) - sigma[(r, s)] * kappa;
            out[(r, m + s)] = -(cp * i_xi(l, mu));
            out[(m + r, s)] = i_xi(k, mu) * cp;
        }
        out[(m + r, m + r)] = C::new(abs_d_plus_mu(k, mu), 0.0);
    }
    Ok(out)
}

/// Hermitian `B'` with `L - i c_kappa mu = J B'`, the factor used by the
/// 4x4 reduction.
pub fn assemble_b_shifted(
    expansion: &StokesExpansion,
    frakp: &PeriodicProfile,
    mu: f64,
    eps: f64,
    k_max: usize,
) -> Result<DMatrix<C>> {
    check_mu(mu)?;
    check_shapes(frakp)?;
    let kappa = expansion.kappa();
    let c = expansion.c_kappa;
    let p = expansion.p_profile(eps, 2);
    let a = expansion.a_profile(eps, 2);
    let sigma = sigma_matrix(expansion, frakp, mu, eps, k_max)?;
    let m = 2 * k_max + 1;
    let km = k_max as i64;
    let imu = C::new(0.0, mu);
    let mut out = DMatrix::from_element(2 * m, 2 * m, ZERO);
    for k in -km..=km {
        let r = (k + km) as usize;
        for l in -km..=km {
            let s = (l + km) as usize;
            let delta = if k == l { 1.0 } else { 0.0 };
            let pk = p.coeff(k - l);
            let cp = C::new(c * delta, 0.0) + pk;
            out[(r, s)] = C::new(delta, 0.0) + a.coeff(k - l) - sigma[(r, s)] * kappa;
            out[(r, m + s)] = -(cp * C::new(0.0, l as f64)) - imu * pk;
            out[(m + r, s)] = C::new(0.0, k as f64) * cp + imu * pk;
        }
        out[(m + r, m + r)] = C::new(abs_d_plus_mu(k, mu), 0.0);
    }
    Ok(out)
}

/// Expansion, truncated conformal shift and operator in one call.
pub fn assemble_stokes(kappa: f64, eps: f64, mu: f64, k_max: usize) -> Result<TruncatedOperator> {
    if eps == 0.0 {
        return assemble_flat(kappa, mu, k_max);
    }
    let expansion = expand(kappa)?;
    let frakp = expansion.frakp_profile(eps, 2);
    assemble(&expansion, &frakp, mu, eps, k_max)
}

/// Symplectic form `J` and the reversibility involution
/// `v -> R conj(v)`, with `R` diagonal `(+1, -1)` by component.
#[derive(Debug, Clone)]
pub struct StructureMatrices {
    pub j: DMatrix<C>,
    pub r: DMatrix<C>,
}

impl StructureMatrices {
    pub fn new(k_max: usize) -> Self {
        let m = 2 * k_max + 1;
        let mut j = DMatrix::from_element(2 * m, 2 * m, ZERO);
        let mut r = DMatrix::from_element(2 * m, 2 * m, ZERO);
        for i in 0..m {
            j[(i, m + i)] = C::new(1.0, 0.0);
            j[(m + i, i)] = C::new(-1.0, 0.0);
            r[(i, i)] = C::new(1.0, 0.0);
            r[(m + i, m + i)] = C::new(-1.0, 0.0);
        }
        StructureMatrices { j, r }
    }

    /// Applies the antilinear involution.
    pub fn reverse(&self, v: &nalgebra::DVector<C>) -> nalgebra::DVector<C> {
        &self.r * v.map(|z| z.conj())
    }

    /// `|| L R conj + R conj L ||`, zero for a reversible operator.
    pub fn reversibility_defect(&self, l: &DMatrix<C>) -> f64 {
        (l.map(|z| z.conj()) + &self.r * l * &self.r).norm()
    }

    /// `|| B R conj - R conj B ||`, zero for a reversibility-preserving factor.
    pub fn preservation_defect(&self, b: &DMatrix<C>) -> f64 {
        (b.map(|z| z.conj()) - &self.r * b * &self.r).norm()
    }
}

const DUMP_MAGIC: f64 = 4.2e1;
const DUMP_VERSION: f64 = 1.0;

/// Header `(magic, version, 2K+1, mu, eps, kappa, layout, reserved)` followed
/// by column-major `(re, im)` pairs, all little-endian `f64`.
pub fn write_matrix_dump(op: &TruncatedOperator, mut w: impl Write) -> io::Result<()> {
    let header = [
        DUMP_MAGIC,
        DUMP_VERSION,
        op.modes() as f64,
        op.mu,
        op.eps,
        op.kappa,
        0.0,
        0.0,
    ];
    for v in header {
        w.write_all(&v.to_le_bytes())?;
    }
    for z in op.matrix.iter() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_dump(mut r: impl Read) -> io::Result<TruncatedOperator> {
    let mut next = || -> io::Result<f64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    if next()? != DUMP_MAGIC || next()? != DUMP_VERSION {
        return Err(bad("not a matrix dump"));
    }
    let modes = next()? as usize;
    let (mu, eps, kappa) = (next()?, next()?, next()?);
    if next()? != 0.0 {
        return Err(bad("unknown layout"));
    }
    next()?;
    let n = 2 * modes;
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re = next()?;
        data.push(C::new(re, next()?));
    }
    Ok(TruncatedOperator {
        matrix: DMatrix::from_vec(n, n, data),
        kappa,
        mu,
        eps,
        k_max: modes / 2,
    })
}
