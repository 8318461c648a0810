//! Closed-form stability coefficients and region classification.
//!
//! Every "leading" function drops the analytic remainders of the asymptotic
//! expansions; the dropped order is stated on each function.

use num_complex::Complex64;

use crate::error::{BfError, Result};

/// Capillarity where `e22` and the Whitham-Benjamin function vanish.
pub fn kappa_critical() -> f64 {
    2.0 * 3f64.sqrt() / 3.0 - 1.0
}

/// Proximity tolerances used by classification and validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guard {
    pub tol: f64,
    /// Highest resonance order `n` for which `1/n` is flagged.
    /// `None` checks every order the truncation rule reaches.
    pub max_resonance_order: Option<u64>,
}

/// Resonances `1/n` with `n > 3` first enter the Stokes wave at order
/// `eps^n`, below the `eps^3` accuracy of everything carried here.
pub const DEFAULT_MAX_RESONANCE_ORDER: u64 = 3;

impl Default for Guard {
    fn default() -> Self {
        Guard {
            tol: 1e-6,
            max_resonance_order: Some(DEFAULT_MAX_RESONANCE_ORDER),
        }
    }
}

impl Guard {
    pub fn with_tol(tol: f64) -> Self {
        Guard {
            tol,
            ..Guard::default()
        }
    }

    /// The full resonant set, truncated only by the `1/(kappa (1 - tol))` rule.
    pub fn exhaustive(tol: f64) -> Self {
        Guard {
            tol,
            max_resonance_order: None,
        }
    }

    /// Order `n` of the first resonant value `1/n` within `tol` of `kappa`.
    pub fn resonance(&self, kappa: f64) -> Option<u64> {
        if kappa <= 0.0 {
            return None;
        }
        let reach = (1.0 / (kappa * (1.0 - self.tol))).ceil().min(1e6) as u64;
        let n_max = match self.max_resonance_order {
            Some(cap) => reach.min(cap),
            None => reach,
        };
        (2..=n_max).find(|&n| (kappa - 1.0 / n as f64).abs() <= self.tol)
    }

    pub fn is_singular(&self, kappa: f64) -> bool {
        (kappa - 0.5).abs() <= self.tol
    }

    pub fn is_critical(&self, kappa: f64) -> bool {
        (kappa - kappa_critical()).abs() <= self.tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    Unstable,
    Stable,
    Critical,
    Resonant,
    Singular,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::Unstable => "Unstable",
            RegionLabel::Stable => "Stable",
            RegionLabel::Critical => "Critical",
            RegionLabel::Resonant => "Resonant",
            RegionLabel::Singular => "Singular",
        }
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validated capillarity coefficient: nonnegative, away from `1/2` and
/// from the flagged resonances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapillaryParam {
    kappa: f64,
    region: RegionLabel,
}

impl CapillaryParam {
    pub fn new(kappa: f64) -> Result<Self> {
        Self::with_guard(kappa, &Guard::default())
    }

    pub fn with_guard(kappa: f64, guard: &Guard) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(BfError::InvalidInput(format!(
                "kappa must be finite and nonnegative, got {kappa}"
            )));
        }
        if guard.is_singular(kappa) {
            return Err(BfError::SingularKappa { kappa });
        }
        if let Some(order) = guard.resonance(kappa) {
            return Err(BfError::ResonantKappa { kappa, order });
        }
        Ok(CapillaryParam {
            kappa,
            region: classify_with(kappa, guard),
        })
    }

    pub fn value(&self) -> f64 {
        self.kappa
    }

    pub fn region(&self) -> RegionLabel {
        self.region
    }
}

pub fn classify(kappa: f64) -> RegionLabel {
    classify_with(kappa, &Guard::default())
}

pub fn classify_with(kappa: f64, guard: &Guard) -> RegionLabel {
    if guard.is_singular(kappa) {
        RegionLabel::Singular
    } else if guard.resonance(kappa).is_some() {
        RegionLabel::Resonant
    } else if guard.is_critical(kappa) {
        RegionLabel::Critical
    } else if kappa < kappa_critical() || kappa > 0.5 {
        RegionLabel::Unstable
    } else {
        RegionLabel::Stable
    }
}

fn check_singular(kappa: f64) -> Result<()> {
    if Guard::default().is_singular(kappa) {
        Err(BfError::SingularKappa { kappa })
    } else {
        Ok(())
    }
}

/// `c_kappa = sqrt(1 + kappa)`.
pub fn phase_speed(kappa: f64) -> f64 {
    (1.0 + kappa).sqrt()
}

/// `(e11, e22, e12)`.
pub fn coeffs_e(kappa: f64) -> Result<(f64, f64, f64)> {
    check_singular(kappa)?;
    let c = phase_speed(kappa);
    let k2 = kappa * kappa;
    let e11 = (2.0 * k2 + kappa + 8.0) / (8.0 * (1.0 - 2.0 * kappa) * c);
    let e22 = (-3.0 * k2 - 6.0 * kappa + 1.0) / (c * c * c);
    let e12 = (1.0 + 3.0 * kappa) / c;
    Ok((e11, e22, e12))
}

pub fn whitham_benjamin(kappa: f64) -> Result<f64> {
    check_singular(kappa)?;
    let k = kappa;
    let num = 6.0 * k.powi(4) + 15.0 * k.powi(3) + 28.0 * k * k + 47.0 * k - 8.0;
    let den = 8.0 * (2.0 * k - 1.0) * (k + 1.0).powi(2);
    Ok(num / den)
}

/// `2 c_kappa - e12 = (1 - kappa)/c_kappa`, the drift of the figure-eight.
pub fn breve_c(kappa: f64) -> f64 {
    (1.0 - kappa) / phase_speed(kappa)
}

/// `eps sqrt(8 e11/e22)`; the factor `1 + r(eps)` is dropped.
pub fn mu_bar_leading(kappa: f64, eps: f64) -> Result<f64> {
    if classify(kappa) != RegionLabel::Unstable {
        return Err(BfError::NotUnstable { kappa });
    }
    if eps <= 0.0 {
        return Err(BfError::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let (e11, e22, _) = coeffs_e(kappa)?;
    let ratio = 8.0 * e11 / e22;
    if ratio <= 0.0 {
        return Err(BfError::NotUnstable { kappa });
    }
    Ok(eps * ratio.sqrt())
}

/// `8 e_WB eps^2 - e22^2 mu^2`; remainders of relative order `eps, mu` dropped.
pub fn delta_bf_leading(kappa: f64, mu: f64, eps: f64) -> Result<f64> {
    let (_, e22, _) = coeffs_e(kappa)?;
    let ewb = whitham_benjamin(kappa)?;
    Ok(8.0 * ewb * eps * eps - e22 * e22 * mu * mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitRegime {
    RealSplit,
    Collision,
    ImaginarySplit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingEigenPair {
    pub value_plus: Complex64,
    pub value_minus: Complex64,
    pub regime: SplitRegime,
}

/// Leading-order `lambda_1^{+-}`; the remainder `i r(mu eps^2, mu^2 eps, mu^3)`
/// and the factor `sqrt(1 + r(eps, mu))` are dropped.
pub fn lambda1_leading(kappa: f64, mu: f64, eps: f64) -> Result<LeadingEigenPair> {
    let delta = delta_bf_leading(kappa, mu, eps)?;
    let center = Complex64::new(0.0, 0.5 * breve_c(kappa) * mu);
    let half = 0.125 * mu * delta.abs().sqrt();
    let (split, regime) = if delta > 0.0 {
        (Complex64::new(half, 0.0), SplitRegime::RealSplit)
    } else if delta < 0.0 {
        (Complex64::new(0.0, half), SplitRegime::ImaginarySplit)
    } else {
        (Complex64::new(0.0, 0.0), SplitRegime::Collision)
    };
    Ok(LeadingEigenPair {
        value_plus: center + split,
        value_minus: center - split,
        regime,
    })
}

/// Leading-order `(lambda_0^+, lambda_0^-) = i mu c_kappa -+ i sqrt(mu)`.
pub fn lambda0_leading(kappa: f64, mu: f64) -> (Complex64, Complex64) {
    let drift = mu * phase_speed(kappa);
    let root = mu.sqrt();
    (
        Complex64::new(0.0, drift - root),
        Complex64::new(0.0, drift + root),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// Eigenvalue `lambda_k^{sign}(mu)` of the flat Floquet operator.
pub fn flat_eigenvalue(kappa: f64, k: i64, sign: Sign, mu: f64) -> Complex64 {
    let c = phase_speed(kappa);
    let k = k as f64;
    let im = match sign {
        Sign::Plus => {
            let xi = k + mu;
            c * xi - ((1.0 + kappa * xi * xi) * xi.abs()).sqrt()
        }
        Sign::Minus => {
            let xi = k - mu;
            c * (-k + mu) + ((1.0 + kappa * xi * xi) * xi.abs()).sqrt()
        }
    };
    Complex64::new(0.0, im)
}

/// Flat values of `[lambda_1^+, lambda_1^-, lambda_0^+, lambda_0^-]`.
pub fn flat_quadruple(kappa: f64, mu: f64) -> [Complex64; 4] {
    [
        flat_eigenvalue(kappa, 1, Sign::Plus, mu),
        flat_eigenvalue(kappa, 1, Sign::Minus, mu),
        flat_eigenvalue(kappa, 0, Sign::Plus, mu),
        flat_eigenvalue(kappa, 0, Sign::Minus, mu),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_and_coefficients_at_zero() {
        assert_eq!(phase_speed(0.0), 1.0);
        assert_eq!(phase_speed(3.0), 2.0);
        assert_eq!(coeffs_e(0.0).unwrap(), (1.0, 1.0, 1.0));
        assert_eq!(whitham_benjamin(0.0).unwrap(), 1.0);
        assert_eq!(whitham_benjamin(1.0).unwrap(), 2.75);
    }

    #[test]
    fn pole_at_one_half() {
        assert!(matches!(
            coeffs_e(0.5 - 1e-7),
            Err(BfError::SingularKappa { .. })
        ));
        assert!(whitham_benjamin(0.5).is_err());
        assert_eq!(classify(0.5), RegionLabel::Singular);
    }

    #[test]
    fn regions() {
        assert_eq!(classify(0.05), RegionLabel::Unstable);
        assert_eq!(classify(0.3), RegionLabel::Stable);
        assert_eq!(classify(1.0 / 3.0), RegionLabel::Resonant);
        assert_eq!(classify(0.1547005), RegionLabel::Critical);
        assert_eq!(classify(0.8), RegionLabel::Unstable);
        assert_eq!(classify(0.0), RegionLabel::Unstable);
    }

    #[test]
    fn exhaustive_guard_flags_high_orders() {
        let g = Guard::exhaustive(1e-6);
        assert_eq!(g.resonance(0.05), Some(20));
        assert_eq!(classify_with(0.2, &g), RegionLabel::Resonant);
        assert_eq!(g.resonance(0.051), None);
    }

    #[test]
    fn validated_param() {
        assert!(CapillaryParam::new(-0.1).is_err());
        assert!(matches!(
            CapillaryParam::new(1.0 / 3.0),
            Err(BfError::ResonantKappa { order: 3, .. })
        ));
        let p = CapillaryParam::new(0.3).unwrap();
        assert_eq!(p.region(), RegionLabel::Stable);
    }

    #[test]
    fn leading_pairs() {
        let p = lambda1_leading(0.0, 0.01, 0.0).unwrap();
        assert_eq!(p.regime, SplitRegime::ImaginarySplit);
        assert_eq!(p.value_plus.re, 0.0);
        let z = lambda1_leading(0.3, 0.0, 0.01).unwrap();
        assert_eq!(z.value_plus, Complex64::new(0.0, 0.0));
        let (a, b) = lambda0_leading(0.0, 0.25);
        assert_eq!((a.im, b.im), (-0.25, 0.75));
        assert_eq!(a, flat_eigenvalue(0.0, 0, Sign::Plus, 0.25));
        assert_eq!((a.re, b.re), (0.0, 0.0));
    }

    #[test]
    fn flat_values() {
        assert_eq!(flat_eigenvalue(0.7, 1, Sign::Plus, 0.0).norm(), 0.0);
        assert_eq!(flat_eigenvalue(0.0, 0, Sign::Plus, 0.25).im, -0.25);
        assert!(flat_eigenvalue(0.3, 2, Sign::Plus, 0.0).norm() > 1e-3);
    }

    #[test]
    fn mu_bar_requires_instability() {
        assert!(matches!(
            mu_bar_leading(0.3, 0.01),
            Err(BfError::NotUnstable { .. })
        ));
        let m = mu_bar_leading(0.0, 0.01).unwrap();
        assert!((m - 0.01 * 8f64.sqrt()).abs() < 1e-16);
        assert!(delta_bf_leading(0.0, m, 0.01).unwrap().abs() < 1e-18);
    }
}
