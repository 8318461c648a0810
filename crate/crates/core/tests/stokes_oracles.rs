use bf_core::fourier::{Parity, PeriodicProfile};
use bf_core::stokes_expansion::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact rational with small numerator and denominator.
#[derive(Clone, Copy)]
struct Q(i128, i128);

impl Q {
    fn int(n: i128) -> Q {
        Q(n, 1)
    }
    fn add(self, o: Q) -> Q {
        Q(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    fn mul(self, o: Q) -> Q {
        Q(self.0 * o.0, self.1 * o.1)
    }
    fn div(self, o: Q) -> Q {
        Q(self.0 * o.1, self.1 * o.0)
    }
    fn f(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn gravity_coefficients() {
    let e = expand(0.0).unwrap();
    assert_eq!((e.eta2_2, e.psi2_2, e.c2), (0.5, 0.5, 0.5));
    assert_eq!((e.a1_1, e.p1_1), (-2.0, -2.0));
    for kappa in [0.0, 0.2, 0.8] {
        let e = expand(kappa).unwrap();
        assert_eq!(e.sigma2.d2_0, 9.0 / 4.0);
        assert_eq!(e.sigma2.h2_0, -0.5);
    }
}

#[test]
fn coefficients_match_rational_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut seen = 0;
    while seen < 20 {
        let k = Q(rng.gen_range(1..200), rng.gen_range(2..97));
        let kf = k.f();
        let Ok(e) = expand(kf) else { continue };
        seen += 1;
        let c = (1.0 + kf).sqrt();
        let one_plus = Q::int(1).add(k);
        let om = Q::int(1).add(Q::int(-2).mul(k));
        let k2 = k.mul(k);
        // c^2 and c^3 written through 1 + kappa.
        let eta2 = one_plus.div(Q::int(2).mul(om));
        let c2 = Q::int(2).mul(k2).add(k).add(Q::int(8)).div(Q::int(16).mul(om));
        let p20 = Q::int(-30).mul(k2).add(Q::int(-15).mul(k)).add(Q::int(24)).div(Q::int(16).mul(om));
        let a22 = Q::int(-10).mul(k2).add(Q::int(-11).mul(k)).add(Q::int(-4)).div(Q::int(2).mul(om));
        let g22 = Q::int(-6).mul(k).add(Q::int(-3)).div(Q::int(4).mul(om));
        let frakp2 = Q::int(2).add(Q::int(-1).mul(k)).div(Q::int(2).mul(om));
        let d22 = Q::int(-9).add(Q::int(-18).mul(k)).div(Q::int(4).mul(om));
        let e22 = Q::int(18).mul(k).add(Q::int(9)).div(Q::int(2).mul(om));
        let h22 = Q::int(9).add(Q::int(6).mul(k)).div(Q::int(2).mul(om));
        let checks = [
            (e.eta2_2, eta2.f()),
            (e.psi2_2, c * eta2.f()),
            (e.c2, c2.f() / c),
            (e.p2_0, p20.f() / c),
            (e.p2_2, -4.0 * c * eta2.f()),
            (e.a2_2, a22.f()),
            (e.g2_2, g22.f()),
            (e.frakp2_2, frakp2.f()),
            (e.sigma2.d2_2, d22.f()),
            (e.sigma2.e2_2, e22.f()),
            (e.sigma2.h2_2, h22.f()),
            (e.a1_1, -(2.0 + kf)),
            (e.p1_1, -2.0 * c),
        ];
        for (i, (got, want)) in checks.iter().enumerate() {
            assert!(rel(*got, *want) < 1e-13, "kappa {kf}, field {i}: {got} vs {want}");
        }
    }
}

#[test]
fn wave_profiles_shape() {
    let e = expand(0.0).unwrap();
    let (eta, psi, c) = wave_profiles(&e, 0.0, 8).unwrap();
    assert!(eta.is_zero() && psi.is_zero());
    assert_eq!(c, 1.0);
    let (eta, psi, _) = wave_profiles(&e, 0.01, 8).unwrap();
    assert!((eta.cos_coeff(2) - 5e-5).abs() < 1e-18);
    assert_eq!((eta.parity, psi.parity), (Parity::Even, Parity::Odd));
    assert!(eta.parity_holds(1e-15) && psi.parity_holds(1e-15));
    let frakp = e.frakp_profile(0.01, 8);
    assert_eq!(frakp.parity, Parity::Odd);
}

#[test]
fn frakp_fixed_point() {
    let zero = PeriodicProfile::zeros(8, Parity::Even);
    assert!(solve_frakp(&zero, 1e-14, FRAKP_MAX_ITER).unwrap().is_zero());

    let kappa: f64 = 0.2;
    let e = expand(kappa).unwrap();
    let second = (2.0 - kappa) / (2.0 * (1.0 - 2.0 * kappa));
    let mut sin2 = Vec::new();
    for eps in [0.02, 0.01] {
        let (eta, _, _) = wave_profiles(&e, eps, 16).unwrap();
        let p = solve_frakp(&eta, 1e-15, FRAKP_MAX_ITER).unwrap();
        assert!((p.sin_coeff(1) - eps).abs() <= 10.0 * eps.powi(3));
        assert!((p.sin_coeff(2) - eps * eps * second).abs() <= 10.0 * eps.powi(3));
        sin2.push(p.sin_coeff(2));

        // Re-substitution reproduces the shift.
        let n = 256;
        let shift = p.to_real_grid(n);
        let again = PeriodicProfile::from_grid(&eta.compose_shift(n, &shift), 16, Parity::Even).hilbert();
        let gap = again.add(&p.scale(-1.0)).norm_l1();
        assert!(gap < 1e-13, "{gap}");
    }
    let ratio = sin2[0] / sin2[1];
    assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
}

#[test]
fn dirichlet_neumann_flat() {
    let eta = PeriodicProfile::zeros(8, Parity::Even);
    let psi = PeriodicProfile::sine_series(8, &[(1, 1.0), (3, 0.5)]);
    let g = dirichlet_neumann_taylor(&eta, &psi, 2, 8).unwrap();
    assert!((g.sin_coeff(1) - 1.0).abs() < 1e-15);
    assert!((g.sin_coeff(3) - 1.5).abs() < 1e-15);
}

#[test]
fn residual_scaling() {
    assert_eq!(stokes_residual(0.2, 0.0, 16).unwrap(), (0.0, 0.0));
    let sup = |kappa, eps| {
        let (a, b) = stokes_residual(kappa, eps, 16).unwrap();
        a.max(b)
    };
    let ratio = sup(0.2, 0.02) / sup(0.2, 0.01);
    assert!((6.5..=9.5).contains(&ratio), "{ratio}");
    assert!(sup(0.05, 0.01) <= 100.0 * 1e-6);
}

/// Projection of the Bernoulli residual onto `cos x` is `O(eps^3)`: this is
/// what fixes the speed correction.
#[test]
fn first_harmonic_of_bernoulli_residual() {
    let kappa = 0.05;
    let e = expand(kappa).unwrap();
    let k_max = 16;
    let n = 8 * k_max;
    let mut proj = Vec::new();
    for eps in [0.02, 0.01] {
        let (eta, psi, c) = wave_profiles(&e, eps, k_max).unwrap();
        let eta_g = eta.to_real_grid(n);
        let etax = eta.derivative().to_real_grid(n);
        let etaxx = eta.derivative().derivative().to_real_grid(n);
        let psix = psi.derivative().to_real_grid(n);
        let res: Vec<f64> = (0..n)
            .map(|j| {
                let w = 1.0 + etax[j] * etax[j];
                -c * psix[j] + eta_g[j] + 0.5 * psix[j] * psix[j]
                    - etax[j] * etax[j] * (c - psix[j]).powi(2) / (2.0 * w)
                    - kappa * etaxx[j] / w.powf(1.5)
            })
            .collect();
        let r = PeriodicProfile::from_real_grid(&res, k_max, Parity::Even);
        proj.push(r.cos_coeff(1).abs());
    }
    assert!(proj[0] <= 20.0 * 0.02f64.powi(3), "{proj:?}");
    let ratio = proj[0] / proj[1];
    assert!((6.5..=9.5).contains(&ratio), "{ratio}");
}

#[test]
fn guarded_kappa_rejected() {
    assert!(expand(0.5).is_err());
    assert!(expand(1.0 / 3.0).is_err());
    assert!(expand(0.2).is_ok());
}
