//! Spectra of truncated Floquet operators: the four eigenvalues near the
//! origin, Riesz projectors onto their invariant subspace, 4x4 compressions,
//! and the figure-eight traced by the unstable pair.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::closed_form::{classify, mu_bar_leading, phase_speed, RegionLabel};
use crate::eig::{eig_matrix, SpectrumResult};
use crate::error::{BfError, Result};
use crate::operator_assembly::{assemble_stokes, layout_index, TruncatedOperator};

type C = Complex64;

/// Tunables of quadruple selection and tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Required modulus ratio between the first excluded candidate and the
    /// largest selected eigenvalue.
    pub gap_factor: f64,
    /// Minimum eigenvector weight on the modes `|k| <= 1` for a candidate.
    pub min_low_mode_weight: f64,
    /// Below this Floquet exponent the quadruple is reported unlabeled.
    pub label_floor: f64,
    /// Real parts below `instability_tol * max(1, ||L||)` count as zero.
    pub instability_tol: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            gap_factor: 2.0,
            min_low_mode_weight: 0.5,
            label_floor: 1e-4,
            instability_tol: 1e-9,
        }
    }
}

/// Eigen-decomposition with refined eigenvectors.
pub fn eig(op: &TruncatedOperator) -> Result<SpectrumResult> {
    let mut s = eig_matrix(&op.matrix, true)?;
    s.k_max = Some(op.k_max);
    Ok(s)
}

/// Fraction of `|v|^2` carried by the modes `|k| <= 1` of both components.
pub fn low_mode_weight(v: &DVector<C>, k_max: usize) -> f64 {
    let total = v.norm_squared();
    if total == 0.0 {
        return 0.0;
    }
    let mut w = 0.0;
    for comp in 0..2 {
        for k in -1..=1i64 {
            if k.unsigned_abs() as usize <= k_max {
                w += v[layout_index(k_max, comp, k)].norm_sqr();
            }
        }
    }
    w / total
}

/// The four eigenvalues continued from the flat kernel, ordered
/// `[lambda_1^+, lambda_1^-, lambda_0^+, lambda_0^-]` when labeled and by
/// modulus otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadruple {
    pub values: [C; 4],
    pub indices: [usize; 4],
    pub labeled: bool,
    pub gap_ratio: f64,
}

impl Quadruple {
    pub fn lambda1_plus(&self) -> C {
        self.values[0]
    }
    pub fn lambda1_minus(&self) -> C {
        self.values[1]
    }
    pub fn lambda0_plus(&self) -> C {
        self.values[2]
    }
    pub fn lambda0_minus(&self) -> C {
        self.values[3]
    }
    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
    pub fn max_abs_re(&self) -> f64 {
        self.values.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    }
}

pub fn near_zero_quadruple(spec: &SpectrumResult, kappa: f64, mu: f64) -> Result<Quadruple> {
    near_zero_quadruple_with(spec, kappa, mu, &EngineConfig::default())
}

/// Candidates are eigenvalues whose eigenvectors live mostly on `|k| <= 1`;
/// the four smallest in modulus are selected and must be separated from the
/// next candidate by `gap_factor`.
pub fn near_zero_quadruple_with(
    spec: &SpectrumResult,
    kappa: f64,
    mu: f64,
    cfg: &EngineConfig,
) -> Result<Quadruple> {
    let vecs = spec
        .eigenvectors
        .as_ref()
        .ok_or_else(|| BfError::InvalidInput("quadruple selection needs eigenvectors".into()))?;
    let k_max = spec
        .k_max
        .ok_or_else(|| BfError::InvalidInput("quadruple selection needs the mode layout".into()))?;
    let mut cand: Vec<usize> = (0..spec.eigenvalues.len())
        .filter(|&j| low_mode_weight(&vecs.column(j).into_owned(), k_max) >= cfg.min_low_mode_weight)
        .collect();
    cand.sort_by(|&a, &b| {
        spec.eigenvalues[a]
            .norm()
            .partial_cmp(&spec.eigenvalues[b].norm())
            .unwrap()
    });
    if cand.len() < 4 {
        return Err(BfError::GapFailure {
            ratio: 0.0,
            required: cfg.gap_factor,
        });
    }
    let inner = spec.eigenvalues[cand[3]].norm();
    let gap_ratio = match cand.get(4) {
        Some(&j) if inner > 0.0 => spec.eigenvalues[j].norm() / inner,
        _ => f64::INFINITY,
    };
    if gap_ratio < cfg.gap_factor {
        return Err(BfError::GapFailure {
            ratio: gap_ratio,
            required: cfg.gap_factor,
        });
    }
    let mut idx = [cand[0], cand[1], cand[2], cand[3]];
    let labeled = mu >= cfg.label_floor;
    if labeled {
        idx = label(&spec.eigenvalues, idx, kappa, mu, cfg.instability_tol * spec.norm.max(1.0));
    }
    Ok(Quadruple {
        values: idx.map(|j| spec.eigenvalues[j]),
        indices: idx,
        labeled,
        gap_ratio,
    })
}

fn label(ev: &[C], idx: [usize; 4], kappa: f64, mu: f64, re_tol: f64) -> [usize; 4] {
    let drift = mu * phase_speed(kappa);
    let target_minus = C::new(0.0, drift + mu.sqrt());
    let target_plus = C::new(0.0, drift - mu.sqrt());
    let mut best = (f64::INFINITY, 0, 1);
    for a in 0..4 {
        for b in 0..4 {
            if a == b {
                continue;
            }
            let cost = (ev[idx[a]] - target_plus).norm() + (ev[idx[b]] - target_minus).norm();
            if cost < best.0 {
                best = (cost, a, b);
            }
        }
    }
    let rest: Vec<usize> = (0..4).filter(|&j| j != best.1 && j != best.2).collect();
    let (u, v) = (ev[idx[rest[0]]], ev[idx[rest[1]]]);
    let first_is_plus = if (u.re - v.re).abs() > re_tol {
        u.re > v.re
    } else {
        u.im >= v.im
    };
    let (p, m) = if first_is_plus {
        (rest[0], rest[1])
    } else {
        (rest[1], rest[0])
    };
    [idx[p], idx[m], idx[best.1], idx[best.2]]
}

/// Geometric mean of the largest quadruple modulus and the smallest modulus
/// outside the quadruple.
pub fn contour_radius(spec: &SpectrumResult, quad: &Quadruple) -> f64 {
    let outside = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(j, _)| !quad.indices.contains(j))
        .map(|(_, z)| z.norm())
        .fold(f64::INFINITY, f64::min);
    (quad.max_modulus() * outside).sqrt()
}

pub const DEFAULT_NODES: usize = 64;

/// `-(1/2 pi i) \oint (L - lambda)^{-1} d lambda` over the circle of the
/// given radius around 0, by the trapezoidal rule.
pub fn riesz_projector(op: &TruncatedOperator, radius: f64, n_nodes: usize) -> Result<DMatrix<C>> {
    if !(radius > 0.0) || n_nodes < 4 {
        return Err(BfError::InvalidInput("radius must be positive and n_nodes >= 4".into()));
    }
    let spec = eig_matrix(&op.matrix, false)?;
    for z in &spec.eigenvalues {
        if (z.norm() - radius).abs() < 0.1 * radius {
            return Err(BfError::ContourTooTight {
                modulus: z.norm(),
                radius,
            });
        }
    }
    let n = op.dim();
    let parts: Vec<Result<DMatrix<C>>> = (0..n_nodes)
        .into_par_iter()
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_nodes as f64;
            let lam = C::from_polar(radius, theta);
            let mut shifted = op.matrix.clone();
            for i in 0..n {
                shifted[(i, i)] -= lam;
            }
            let inv = shifted.lu().try_inverse().ok_or(BfError::ContourTooTight {
                modulus: radius,
                radius,
            })?;
            Ok(inv * (-lam / n_nodes as f64))
        })
        .collect();
    let mut p = DMatrix::from_element(n, n, C::new(0.0, 0.0));
    for part in parts {
        p += part?;
    }
    Ok(p)
}

#[derive(Debug, Clone)]
pub struct Compression {
    /// Representation of the operator on the subspace.
    pub matrix: DMatrix<C>,
    /// Basis of the subspace, as columns.
    pub basis: DMatrix<C>,
}

/// Compression of `op` onto an orthonormal basis of `range(P)`.
pub fn compress(op: &TruncatedOperator, p: &DMatrix<C>) -> Result<Compression> {
    let n = p.nrows();
    let qr = p.clone().col_piv_qr();
    let r = qr.r();
    let r0 = r[(0, 0)].norm();
    let rank = (0..n.min(r.ncols()))
        .filter(|&i| r[(i, i)].norm() > 1e-6 * r0)
        .count();
    if rank != 4 {
        return Err(BfError::RankFailure { rank, expected: 4 });
    }
    let q = qr.q().columns(0, 4).into_owned();
    Ok(compress_onto(op, &q))
}

/// `Q* L Q` for a basis with orthonormal columns.
pub fn compress_onto(op: &TruncatedOperator, q: &DMatrix<C>) -> Compression {
    Compression {
        matrix: q.adjoint() * &op.matrix * q,
        basis: q.clone(),
    }
}

/// Flat symplectic basis `(f_1^+, f_1^-, f_0^+, f_0^-)` of the generalized
/// kernel at `mu = eps = 0`.
pub fn flat_symplectic_basis(kappa: f64, k_max: usize) -> DMatrix<C> {
    let m = 2 * k_max + 1;
    let rc = phase_speed(kappa).sqrt();
    let mut f = DMatrix::from_element(2 * m, 4, C::new(0.0, 0.0));
    let at = |comp: usize, k: i64| layout_index(k_max, comp, k);
    // [cos x / rc; rc sin x]
    f[(at(0, 1), 0)] = C::new(0.5 / rc, 0.0);
    f[(at(0, -1), 0)] = C::new(0.5 / rc, 0.0);
    f[(at(1, 1), 0)] = C::new(0.0, -0.5 * rc);
    f[(at(1, -1), 0)] = C::new(0.0, 0.5 * rc);
    // [-sin x / rc; rc cos x]
    f[(at(0, 1), 1)] = C::new(0.0, 0.5 / rc);
    f[(at(0, -1), 1)] = C::new(0.0, -0.5 / rc);
    f[(at(1, 1), 1)] = C::new(0.5 * rc, 0.0);
    f[(at(1, -1), 1)] = C::new(0.5 * rc, 0.0);
    f[(at(0, 0), 2)] = C::new(1.0, 0.0);
    f[(at(1, 0), 3)] = C::new(1.0, 0.0);
    f
}

fn symplectic_j(k_max: usize) -> DMatrix<C> {
    crate::operator_assembly::StructureMatrices::new(k_max).j
}

/// Spectral projector of the flat operator at `mu = 0` onto the generalized
/// kernel, written through the symplectic pairing.
pub fn flat_kernel_projector(kappa: f64, k_max: usize) -> DMatrix<C> {
    let f = flat_symplectic_basis(kappa, k_max);
    let j = symplectic_j(k_max);
    let col = |i: usize| f.column(i).into_owned();
    let pair = |a: usize, b: usize| &col(a) * (col(b).adjoint() * &j);
    -pair(0, 1) + pair(1, 0) - pair(2, 3) + pair(3, 2)
}

/// 4x4 reduction of the shifted operator `L - i c mu` on a symplectic,
/// reversibility-adapted basis of `range(P)`.
#[derive(Debug, Clone)]
pub struct SymplecticCompression {
    /// Representation of `L - i c mu` on the basis.
    pub l4: DMatrix<C>,
    /// Hermitian form `(B f_j, f_i)` with `L - i c mu = J B`.
    pub b4: DMatrix<C>,
    /// Imaginary drift `c mu` removed from the spectrum.
    pub drift: f64,
    pub basis: DMatrix<C>,
}

/// Transports the flat basis into `range(P)` by Kato's transformation
/// `(I - (P - P_0)^2)^{-1/2} P`.
pub fn compress_symplectic(op: &TruncatedOperator, p: &DMatrix<C>) -> Result<SymplecticCompression> {
    let k_max = op.k_max;
    let n = op.dim();
    let f0 = flat_symplectic_basis(op.kappa, k_max);
    let p0 = flat_kernel_projector(op.kappa, k_max);
    let diff = p - &p0;
    let z = &diff * &diff;
    let mut term = p * &f0;
    let mut basis = term.clone();
    let mut coef = 1.0;
    let mut converged = false;
    for step in 0..400 {
        term = &z * term;
        coef *= (2 * step + 1) as f64 / (2 * step + 2) as f64;
        let size = coef * term.norm();
        basis += &term * C::new(coef, 0.0);
        if size <= 1e-17 * basis.norm() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(BfError::NoConvergence {
            what: "Kato transformation series",
            iterations: 400,
        });
    }
    let drift = phase_speed(op.kappa) * op.mu;
    let mut shifted = op.matrix.clone();
    for i in 0..n {
        shifted[(i, i)] -= C::new(0.0, drift);
    }
    let j = symplectic_j(k_max);
    let b = -(&j * &shifted);
    let b4 = basis.adjoint() * &b * &basis;
    let gram = basis.adjoint() * &basis;
    let proj = basis.adjoint() * &shifted * &basis;
    let l4 = gram
        .lu()
        .solve(&proj)
        .ok_or(BfError::RankFailure { rank: 0, expected: 4 })?;
    Ok(SymplecticCompression {
        l4,
        b4,
        drift,
        basis,
    })
}

/// Operator, spectrum and labeled quadruple in one call.
pub fn quadruple_at(
    kappa: f64,
    eps: f64,
    mu: f64,
    k_max: usize,
    cfg: &EngineConfig,
) -> Result<(Quadruple, SpectrumResult)> {
    let op = assemble_stokes(kappa, eps, mu, k_max)?;
    let spec = eig(&op)?;
    let quad = near_zero_quadruple_with(&spec, kappa, mu, cfg)?;
    Ok((quad, spec))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBranch {
    pub kappa: f64,
    pub eps: f64,
    pub mu_grid: Vec<f64>,
    pub lambda1_plus: Vec<C>,
    pub lambda1_minus: Vec<C>,
    pub lambda0_plus: Vec<C>,
    pub lambda0_minus: Vec<C>,
    /// Frobenius norm of the operator per sample.
    pub norms: Vec<f64>,
    pub mu_bar_numeric: Option<f64>,
}

fn require_unstable(kappa: f64) -> Result<()> {
    if classify(kappa) == RegionLabel::Unstable {
        Ok(())
    } else {
        Err(BfError::NotUnstable { kappa })
    }
}

fn sample(kappa: f64, eps: f64, k_max: usize, cfg: &EngineConfig, mus: &[f64]) -> Result<Vec<(Quadruple, f64)>> {
    mus.par_iter()
        .map(|&mu| quadruple_at(kappa, eps, mu, k_max, cfg).map(|(q, s)| (q, s.norm)))
        .collect()
}

fn is_unstable(q: &Quadruple, norm: f64, cfg: &EngineConfig) -> bool {
    q.lambda1_plus().re > cfg.instability_tol * norm.max(1.0)
}

pub fn trace_figure_eight(kappa: f64, eps: f64, mu_max: f64, n_samples: usize, k_max: usize) -> Result<SpectralBranch> {
    trace_figure_eight_with(kappa, eps, mu_max, n_samples, k_max, &EngineConfig::default())
}

/// Samples `mu` in `(0, mu_max]`, refines intervals where a branch moves
/// faster than the running Lipschitz estimate, and locates the end of the
/// unstable band by bisection.
pub fn trace_figure_eight_with(
    kappa: f64,
    eps: f64,
    mu_max: f64,
    n_samples: usize,
    k_max: usize,
    cfg: &EngineConfig,
) -> Result<SpectralBranch> {
    require_unstable(kappa)?;
    if !(eps > 0.0 && eps <= 0.02) {
        return Err(BfError::InvalidInput(format!("eps must lie in (0, 0.02], got {eps}")));
    }
    if !(mu_max > 0.0 && mu_max < 0.5) || n_samples < 2 {
        return Err(BfError::InvalidInput("need 0 < mu_max < 1/2 and at least 2 samples".into()));
    }
    let mu_lead = mu_bar_leading(kappa, eps)?;
    let mut mus: Vec<f64> = (1..=n_samples).map(|j| mu_max * j as f64 / n_samples as f64).collect();
    let mut data = sample(kappa, eps, k_max, cfg, &mus)?;
    for _ in 0..3 {
        let slopes: Vec<f64> = (1..mus.len())
            .map(|j| {
                let (a, b) = (&data[j - 1].0, &data[j].0);
                let d = (a.lambda1_plus() - b.lambda1_plus())
                    .norm()
                    .max((a.lambda1_minus() - b.lambda1_minus()).norm());
                d / (mus[j] - mus[j - 1])
            })
            .collect();
        let mut sorted = slopes.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lip = 4.0 * sorted[sorted.len() / 2] + 1e-12;
        let extra: Vec<f64> = slopes
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > lip)
            .map(|(j, _)| 0.5 * (mus[j] + mus[j + 1]))
            .collect();
        if extra.is_empty() {
            break;
        }
        let new = sample(kappa, eps, k_max, cfg, &extra)?;
        let mut merged: Vec<(f64, (Quadruple, f64))> = mus.into_iter().zip(data).chain(extra.into_iter().zip(new)).collect();
        merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        mus = merged.iter().map(|(m, _)| *m).collect();
        data = merged.into_iter().map(|(_, d)| d).collect();
    }

    let mut mu_bar = None;
    if let Some(j) = (1..mus.len()).find(|&j| is_unstable(&data[j - 1].0, data[j - 1].1, cfg) && !is_unstable(&data[j].0, data[j].1, cfg)) {
        let (mut lo, mut hi) = (mus[j - 1], mus[j]);
        let tol = (1e-3 * mu_lead).max(1e-4 * mu_lead);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let (q, s) = quadruple_at(kappa, eps, mid, k_max, cfg)?;
            if is_unstable(&q, s.norm, cfg) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        mu_bar = Some(hi);
    }

    Ok(SpectralBranch {
        kappa,
        eps,
        lambda1_plus: data.iter().map(|d| d.0.lambda1_plus()).collect(),
        lambda1_minus: data.iter().map(|d| d.0.lambda1_minus()).collect(),
        lambda0_plus: data.iter().map(|d| d.0.lambda0_plus()).collect(),
        lambda0_minus: data.iter().map(|d| d.0.lambda0_minus()).collect(),
        norms: data.iter().map(|d| d.1).collect(),
        mu_grid: mus,
        mu_bar_numeric: mu_bar,
    })
}

/// `(mu_star, rate)` maximizing `Re lambda_1^+` over the unstable band.
pub fn max_growth_rate(kappa: f64, eps: f64, k_max: usize) -> Result<(f64, f64)> {
    max_growth_rate_with(kappa, eps, k_max, &EngineConfig::default())
}

pub fn max_growth_rate_with(kappa: f64, eps: f64, k_max: usize, cfg: &EngineConfig) -> Result<(f64, f64)> {
    require_unstable(kappa)?;
    let mu_lead = mu_bar_leading(kappa, eps)?;
    let n = 16;
    let mus: Vec<f64> = (1..=n).map(|j| 1.5 * mu_lead * j as f64 / n as f64).collect();
    let data = sample(kappa, eps, k_max, cfg, &mus)?;
    let rate = |mu: f64| -> Result<f64> { Ok(quadruple_at(kappa, eps, mu, k_max, cfg)?.0.lambda1_plus().re) };
    let best = (0..n)
        .max_by(|&a, &b| data[a].0.lambda1_plus().re.partial_cmp(&data[b].0.lambda1_plus().re).unwrap())
        .unwrap();
    let mut lo = if best == 0 { 0.5 * mus[0] } else { mus[best - 1] };
    let mut hi = if best + 1 < n { mus[best + 1] } else { mus[best] };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = rate(x1)?;
    let mut f2 = rate(x2)?;
    while hi - lo > 1e-3 * mu_lead {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = rate(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = rate(x1)?;
        }
    }
    let (mu_star, value) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    let sampled = data[best].0.lambda1_plus().re;
    if sampled > value {
        Ok((mus[best], sampled))
    } else {
        Ok((mu_star, value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::flat_quadruple;

    fn close_as_sets(a: &[C], b: &[C], tol: f64) -> bool {
        let mut used = vec![false; b.len()];
        a.iter().all(|x| {
            let hit = (0..b.len()).filter(|&j| !used[j]).min_by(|&i, &j| {
                (b[i] - x).norm().partial_cmp(&(b[j] - x).norm()).unwrap()
            });
            match hit {
                Some(j) if (b[j] - x).norm() <= tol => {
                    used[j] = true;
                    true
                }
                _ => false,
            }
        })
    }

    #[test]
    fn flat_quadruple_recovered() {
        for &(kappa, mu) in &[(0.0, 0.2), (0.2, 0.1), (0.05, 0.15)] {
            let (q, _) = quadruple_at(kappa, 0.0, mu, 12, &EngineConfig::default()).unwrap();
            let flat = flat_quadruple(kappa, mu);
            assert!(close_as_sets(&q.values, &flat, 1e-12), "{kappa} {mu} {:?} {:?}", q.values, flat);
            assert!((q.lambda0_plus() - flat[2]).norm() < 1e-12);
            assert!((q.lambda0_minus() - flat[3]).norm() < 1e-12);
        }
    }

    #[test]
    fn projector_and_compressions() {
        let op = assemble_stokes(0.0, 0.01, 0.05, 12).unwrap();
        let spec = eig(&op).unwrap();
        let q = near_zero_quadruple(&spec, 0.0, 0.05).unwrap();
        let r = contour_radius(&spec, &q);
        let p = riesz_projector(&op, r, DEFAULT_NODES).unwrap();
        assert!((p.trace() - C::new(4.0, 0.0)).norm() < 1e-10);
        assert!((&p * &p - &p).norm() < 1e-9);
        let c = compress(&op, &p).unwrap();
        let ev = eig_matrix(&c.matrix, false).unwrap().eigenvalues;
        assert!(close_as_sets(&ev, &q.values, 1e-10));

        let s = compress_symplectic(&op, &p).unwrap();
        let j4 = symplectic_j(0);
        let j4 = DMatrix::from_fn(4, 4, |a, b| {
            let blk = |x: usize, y: usize| j4[(x, y)];
            if a / 2 == b / 2 { blk(a % 2, b % 2) } else { C::new(0.0, 0.0) }
        });
        let err = (&s.l4 - &j4 * &s.b4).norm();
        assert!(err < 1e-9 * s.b4.norm(), "{err} {}", s.l4);
        let shifted: Vec<C> = eig_matrix(&s.l4, false)
            .unwrap()
            .eigenvalues
            .iter()
            .map(|z| z + C::new(0.0, s.drift))
            .collect();
        assert!(close_as_sets(&shifted, &q.values, 1e-10));
        assert!((&s.b4 - s.b4.adjoint()).norm() < 1e-10 * s.b4.norm());
    }
}
