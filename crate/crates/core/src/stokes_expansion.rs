//! Second-order expansion of the Stokes wave and of the coefficients of its
//! linearized operator, with a numerical conformal fixed point and a
//! residual check of the traveling-wave equations.

use crate::closed_form::{phase_speed, CapillaryParam, Guard};
use crate::error::{BfError, Result};
use crate::fourier::{Parity, PeriodicProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma1 {
    pub d1_1: f64,
    pub e1_1: f64,
    pub h1_1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma2 {
    pub d2_0: f64,
    pub d2_2: f64,
    pub e2_2: f64,
    pub h2_0: f64,
    pub h2_2: f64,
}

/// Expansion coefficients; `x_j_m` multiplies `eps^j` and the `m`-th harmonic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesExpansion {
    pub kappa: CapillaryParam,
    pub c_kappa: f64,
    pub eta2_2: f64,
    pub psi2_2: f64,
    pub c2: f64,
    pub p1_1: f64,
    pub p2_0: f64,
    pub p2_2: f64,
    pub a1_1: f64,
    pub a2_0: f64,
    pub a2_2: f64,
    pub g1_1: f64,
    pub g2_0: f64,
    pub g2_2: f64,
    pub sigma1: Sigma1,
    pub sigma2: Sigma2,
    pub frakp1_1: f64,
    pub frakp2_2: f64,
}

pub fn expand(kappa: f64) -> Result<StokesExpansion> {
    expand_with(kappa, &Guard::default())
}

pub fn expand_with(kappa: f64, guard: &Guard) -> Result<StokesExpansion> {
    let param = CapillaryParam::with_guard(kappa, guard)?;
    let k = kappa;
    let c = phase_speed(k);
    let om = 1.0 - 2.0 * k;
    Ok(StokesExpansion {
        kappa: param,
        c_kappa: c,
        eta2_2: c * c / (2.0 * om),
        psi2_2: c * c * c / (2.0 * om),
        c2: (2.0 * k * k + k + 8.0) / (16.0 * c * om),
        p1_1: -2.0 * c,
        p2_0: (-30.0 * k * k - 15.0 * k + 24.0) / (16.0 * c * om),
        p2_2: -2.0 * c * c * c / om,
        a1_1: -(2.0 + k),
        a2_0: (4.0 + 3.0 * k) / 2.0,
        a2_2: -(10.0 * k * k + 11.0 * k + 4.0) / (2.0 * om),
        g1_1: -1.0,
        g2_0: -0.25,
        g2_2: -(6.0 * k + 3.0) / (4.0 * om),
        sigma1: Sigma1 {
            d1_1: -3.0,
            e1_1: 3.0,
            h1_1: 1.0,
        },
        sigma2: Sigma2 {
            d2_0: 9.0 / 4.0,
            d2_2: -(9.0 + 18.0 * k) / (4.0 * om),
            e2_2: (18.0 * k + 9.0) / (2.0 * om),
            h2_0: -0.5,
            h2_2: (9.0 + 6.0 * k) / (2.0 * om),
        },
        frakp1_1: 1.0,
        frakp2_2: (2.0 - k) / (2.0 * om),
    })
}

impl StokesExpansion {
    pub fn kappa(&self) -> f64 {
        self.kappa.value()
    }

    fn even(k_max: usize, eps: f64, first: f64, zeroth: f64, second: f64) -> PeriodicProfile {
        PeriodicProfile::cosine_series(
            k_max,
            &[(0, eps * eps * zeroth), (1, eps * first), (2, eps * eps * second)],
        )
    }

    /// `p_eps = eps p_1 + eps^2 p_2`.
    pub fn p_profile(&self, eps: f64, k_max: usize) -> PeriodicProfile {
        Self::even(k_max, eps, self.p1_1, self.p2_0, self.p2_2)
    }

    /// `a_eps = eps a_1 + eps^2 a_2`.
    pub fn a_profile(&self, eps: f64, k_max: usize) -> PeriodicProfile {
        Self::even(k_max, eps, self.a1_1, self.a2_0, self.a2_2)
    }

    /// `g_eps = 1 + eps g_1 + eps^2 g_2`.
    pub fn g_profile(&self, eps: f64, k_max: usize) -> PeriodicProfile {
        Self::even(k_max, eps, self.g1_1, self.g2_0, self.g2_2).add_constant(1.0)
    }

    /// Truncated conformal shift `eps sin x + eps^2 frakp_2 sin 2x`.
    pub fn frakp_profile(&self, eps: f64, k_max: usize) -> PeriodicProfile {
        PeriodicProfile::sine_series(
            k_max,
            &[(1, eps * self.frakp1_1), (2, eps * eps * self.frakp2_2)],
        )
    }

    /// `(d_j, e_j, h_j)` of `Sigma_j = d_j dxx + e_j dx + h_j`, for `j = 1, 2`.
    pub fn sigma_terms(&self, j: usize, k_max: usize) -> (PeriodicProfile, PeriodicProfile, PeriodicProfile) {
        match j {
            1 => {
                let s = self.sigma1;
                (
                    PeriodicProfile::cosine_series(k_max, &[(1, s.d1_1)]),
                    PeriodicProfile::sine_series(k_max, &[(1, s.e1_1)]),
                    PeriodicProfile::cosine_series(k_max, &[(1, s.h1_1)]),
                )
            }
            2 => {
                let s = self.sigma2;
                (
                    PeriodicProfile::cosine_series(k_max, &[(0, s.d2_0), (2, s.d2_2)]),
                    PeriodicProfile::sine_series(k_max, &[(2, s.e2_2)]),
                    PeriodicProfile::cosine_series(k_max, &[(0, s.h2_0), (2, s.h2_2)]),
                )
            }
            _ => panic!("Sigma_j is only expanded for j = 1, 2"),
        }
    }
}

/// `(eta, psi, c)` of the Stokes wave truncated at `eps^2`.
pub fn wave_profiles(
    expansion: &StokesExpansion,
    eps: f64,
    k_max: usize,
) -> Result<(PeriodicProfile, PeriodicProfile, f64)> {
    if k_max < 2 {
        return Err(BfError::InvalidInput(format!("K must be at least 2, got {k_max}")));
    }
    let eta = PeriodicProfile::cosine_series(k_max, &[(1, eps), (2, eps * eps * expansion.eta2_2)]);
    let psi = PeriodicProfile::sine_series(
        k_max,
        &[(1, eps * expansion.c_kappa), (2, eps * eps * expansion.psi2_2)],
    );
    Ok((eta, psi, expansion.c_kappa + eps * eps * expansion.c2))
}

pub const FRAKP_MAX_ITER: usize = 200;

/// Picard iteration for `p = H[eta(x + p(x))]` on a grid of at least `8K`
/// points; the composition is evaluated exactly on the band-limited `eta`.
pub fn solve_frakp(eta: &PeriodicProfile, tol: f64, max_iter: usize) -> Result<PeriodicProfile> {
    if !(tol > 0.0) {
        return Err(BfError::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    let k_max = eta.k_max();
    let n = (8 * k_max).max(64).next_power_of_two();
    let band = n / 2 - 1;
    let mut shift = vec![0.0; n];
    for _ in 0..max_iter {
        let composed = eta.compose_shift(n, &shift);
        let frakp = PeriodicProfile::from_grid(&composed, band, Parity::Even).hilbert();
        let next = frakp.to_real_grid(n);
        let residual = next
            .iter()
            .zip(&shift)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        shift = next;
        if residual <= tol {
            return Ok(frakp.truncate(k_max));
        }
    }
    Err(BfError::NoConvergence {
        what: "conformal fixed point",
        iterations: max_iter,
    })
}

/// `(G_0 + G_1(eta) + G_2(eta)) psi` up to `order`, truncated to `|k| <= K`.
pub fn dirichlet_neumann_taylor(
    eta: &PeriodicProfile,
    psi: &PeriodicProfile,
    order: usize,
    k_max: usize,
) -> Result<PeriodicProfile> {
    if order > 2 {
        return Err(BfError::InvalidInput(format!("order must be 0, 1 or 2, got {order}")));
    }
    let dpsi = psi.abs_d();
    let mut out = dpsi.clone();
    if order >= 1 {
        let g1 = eta.mul(&psi.d()).d().add(&eta.mul(&dpsi).abs_d().scale(-1.0));
        out = out.add(&g1);
    }
    if order >= 2 {
        let eta2 = eta.mul(eta);
        let t1 = eta2.mul(&dpsi.abs_d()).abs_d();
        let t2 = eta2.mul(&dpsi).abs_d().abs_d();
        let t3 = eta.mul(&eta.mul(&dpsi).abs_d()).abs_d();
        let g2 = t1.add(&t2).add(&t3.scale(-2.0)).scale(-0.5);
        out = out.add(&g2);
    }
    let mut out = out.truncate(k_max);
    out.parity = psi.parity;
    Ok(out)
}

/// Sup-norm residuals of the two traveling-wave equations on the expansion.
pub fn stokes_residual(kappa: f64, eps: f64, k_max: usize) -> Result<(f64, f64)> {
    if !(0.0..=0.05).contains(&eps) {
        return Err(BfError::InvalidInput(format!("eps must lie in [0, 0.05], got {eps}")));
    }
    if k_max < 8 {
        return Err(BfError::InvalidInput(format!("K must be at least 8, got {k_max}")));
    }
    let expansion = expand(kappa)?;
    let (eta, psi, c) = wave_profiles(&expansion, eps, k_max)?;
    let gpsi = dirichlet_neumann_taylor(&eta, &psi, 2, k_max)?;
    let n = 8 * k_max;
    let eta_g = eta.to_real_grid(n);
    let etax = eta.derivative().to_real_grid(n);
    let etaxx = eta.derivative().derivative().to_real_grid(n);
    let psix = psi.derivative().to_real_grid(n);
    let gpsi = gpsi.to_real_grid(n);
    let mut res1: f64 = 0.0;
    let mut res2: f64 = 0.0;
    for j in 0..n {
        let w = 1.0 + etax[j] * etax[j];
        let bernoulli = -c * psix[j] + eta_g[j] + 0.5 * psix[j] * psix[j]
            - etax[j] * etax[j] * (c - psix[j]).powi(2) / (2.0 * w)
            - kappa * etaxx[j] / w.powf(1.5);
        res1 = res1.max(bernoulli.abs());
        res2 = res2.max((c * etax[j] + gpsi[j]).abs());
    }
    Ok((res1, res2))
}
