//! Band-limited 2π-periodic functions stored by their Fourier coefficients.

use num_complex::Complex64;
use rustfft::FftPlanner;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    fn product(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::None, _) | (_, Parity::None) => Parity::None,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }

    fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
            Parity::None => Parity::None,
        }
    }
}

/// `f(x) = sum_{|k| <= K} c_k e^{ikx}`, coefficient `c_k` stored at `k + K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    coeffs: Vec<Complex64>,
    k_max: usize,
    pub parity: Parity,
}

impl PeriodicProfile {
    pub fn zeros(k_max: usize, parity: Parity) -> Self {
        PeriodicProfile {
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * k_max + 1],
            k_max,
            parity,
        }
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>, parity: Parity) -> Self {
        assert!(coeffs.len() % 2 == 1, "coefficient vector must have odd length");
        let k_max = coeffs.len() / 2;
        PeriodicProfile {
            coeffs,
            k_max,
            parity,
        }
    }

    /// `sum a_k cos(kx)` over the given `(k, a_k)` pairs.
    pub fn cosine_series(k_max: usize, terms: &[(usize, f64)]) -> Self {
        let mut p = Self::zeros(k_max, Parity::Even);
        for &(k, a) in terms {
            if k == 0 {
                p.add_coeff(0, Complex64::new(a, 0.0));
            } else {
                p.add_coeff(k as i64, Complex64::new(0.5 * a, 0.0));
                p.add_coeff(-(k as i64), Complex64::new(0.5 * a, 0.0));
            }
        }
        p
    }

    /// `sum b_k sin(kx)` over the given `(k, b_k)` pairs.
    pub fn sine_series(k_max: usize, terms: &[(usize, f64)]) -> Self {
        let mut p = Self::zeros(k_max, Parity::Odd);
        for &(k, b) in terms {
            if k > 0 {
                p.add_coeff(k as i64, Complex64::new(0.0, -0.5 * b));
                p.add_coeff(-(k as i64), Complex64::new(0.0, 0.5 * b));
            }
        }
        p
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.k_max {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.k_max as i64) as usize]
        }
    }

    fn add_coeff(&mut self, k: i64, v: Complex64) {
        if k.unsigned_abs() as usize <= self.k_max {
            self.coeffs[(k + self.k_max as i64) as usize] += v;
        }
    }

    /// Coefficient of `cos(kx)` for a real profile.
    pub fn cos_coeff(&self, k: usize) -> f64 {
        if k == 0 {
            self.coeff(0).re
        } else {
            2.0 * self.coeff(k as i64).re
        }
    }

    /// Coefficient of `sin(kx)` for a real profile.
    pub fn sin_coeff(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            -2.0 * self.coeff(k as i64).im
        }
    }

    pub fn norm_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// `c_{-k} = conj(c_k)` to `tol` times the coefficient norm.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = tol * self.norm_l1().max(f64::MIN_POSITIVE);
        (0..=self.k_max as i64).all(|k| (self.coeff(-k) - self.coeff(k).conj()).norm() <= scale)
    }

    /// Checks the parity tag against the coefficients.
    pub fn parity_holds(&self, tol: f64) -> bool {
        let scale = tol * self.norm_l1().max(f64::MIN_POSITIVE);
        (0..=self.k_max as i64).all(|k| {
            let (a, b) = (self.coeff(k), self.coeff(-k));
            match self.parity {
                Parity::Even => (a - b).norm() <= scale,
                Parity::Odd => (a + b).norm() <= scale,
                Parity::None => true,
            }
        })
    }

    pub fn truncate(&self, k_max: usize) -> Self {
        let mut out = Self::zeros(k_max, self.parity);
        for k in -(k_max as i64)..=k_max as i64 {
            out.coeffs[(k + k_max as i64) as usize] = self.coeff(k);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        PeriodicProfile {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            k_max: self.k_max,
            parity: self.parity,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let k_max = self.k_max.max(other.k_max);
        let parity = if self.parity == other.parity {
            self.parity
        } else if self.is_zero() {
            other.parity
        } else if other.is_zero() {
            self.parity
        } else {
            Parity::None
        };
        let mut out = Self::zeros(k_max, parity);
        for k in -(k_max as i64)..=k_max as i64 {
            out.coeffs[(k + k_max as i64) as usize] = self.coeff(k) + other.coeff(k);
        }
        out
    }

    pub fn add_constant(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[self.k_max] += a;
        out
    }

    /// Applies the Fourier multiplier `symbol(k)`.
    pub fn multiplier(&self, symbol: impl Fn(i64) -> Complex64, parity: Parity) -> Self {
        let k0 = self.k_max as i64;
        PeriodicProfile {
            coeffs: (-k0..=k0).map(|k| symbol(k) * self.coeff(k)).collect(),
            k_max: self.k_max,
            parity,
        }
    }

    /// `d/dx`.
    pub fn derivative(&self) -> Self {
        self.multiplier(|k| I * k as f64, self.parity.flip())
    }

    /// `|D|`.
    pub fn abs_d(&self) -> Self {
        self.multiplier(|k| Complex64::new(k.abs() as f64, 0.0), self.parity)
    }

    /// `D = -i d/dx`.
    pub fn d(&self) -> Self {
        self.multiplier(|k| Complex64::new(k as f64, 0.0), self.parity.flip())
    }

    /// Hilbert transform, symbol `-i sgn(k)`; the mean is annihilated.
    pub fn hilbert(&self) -> Self {
        self.multiplier(|k| -I * k.signum() as f64, self.parity.flip())
    }

    /// Exact product; the band of the result is the sum of the bands.
    pub fn mul(&self, other: &Self) -> Self {
        let k_max = self.k_max + other.k_max;
        let mut out = Self::zeros(k_max, self.parity.product(other.parity));
        let (a0, b0) = (self.k_max as i64, other.k_max as i64);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let ka = i as i64 - a0;
            for (j, b) in other.coeffs.iter().enumerate() {
                let k = ka + j as i64 - b0;
                out.coeffs[(k + k_max as i64) as usize] += a * b;
            }
        }
        out
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let k0 = self.k_max as i64;
        (-k0..=k0)
            .map(|k| self.coeff(k) * Complex64::from_polar(1.0, k as f64 * x))
            .sum()
    }

    /// Values at `x_j = 2 pi j / n`; requires `n > 2 K`.
    pub fn to_grid(&self, n: usize) -> Vec<Complex64> {
        assert!(n > 2 * self.k_max, "grid too coarse for the band");
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let k0 = self.k_max as i64;
        for k in -k0..=k0 {
            buf[k.rem_euclid(n as i64) as usize] += self.coeff(k);
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf
    }

    pub fn to_real_grid(&self, n: usize) -> Vec<f64> {
        self.to_grid(n).into_iter().map(|v| v.re).collect()
    }

    /// Interpolating coefficients of grid values, truncated to `|k| <= k_max`.
    pub fn from_grid(values: &[Complex64], k_max: usize, parity: Parity) -> Self {
        let n = values.len();
        let mut buf = values.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let mut out = Self::zeros(k_max, parity);
        let k0 = k_max as i64;
        for k in -k0..=k0 {
            if 2 * k.unsigned_abs() as usize >= n {
                continue;
            }
            out.coeffs[(k + k0) as usize] = buf[k.rem_euclid(n as i64) as usize] * scale;
        }
        out
    }

    pub fn from_real_grid(values: &[f64], k_max: usize, parity: Parity) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_grid(&v, k_max, parity)
    }

    /// `f(x_j + s_j)` by direct evaluation of the trigonometric polynomial.
    pub fn compose_shift(&self, n: usize, shift: &[f64]) -> Vec<Complex64> {
        (0..n)
            .map(|j| self.eval(2.0 * std::f64::consts::PI * j as f64 / n as f64 + shift[j]))
            .collect()
    }

    /// `1/f` as a geometric series around the mean, truncated at band `k_max`.
    /// Requires `|f - mean| < |mean|` pointwise.
    pub fn reciprocal(&self, k_max: usize) -> Self {
        let mean = self.coeff(0);
        let mut dev = self.clone();
        dev.coeffs[self.k_max] = Complex64::new(0.0, 0.0);
        let dev = dev.scale(-1.0 / mean.re).truncate(k_max);
        let mut term = Self::zeros(k_max, Parity::Even);
        term.coeffs[k_max] = Complex64::new(1.0, 0.0);
        let mut sum = term.clone();
        for _ in 0..400 {
            if dev.is_zero() {
                break;
            }
            term = term.mul(&dev).truncate(k_max);
            let size = term.norm_l1();
            sum = sum.add(&term);
            if size <= 1e-18 * sum.norm_l1() {
                break;
            }
        }
        sum.parity = if self.parity == Parity::Even { Parity::Even } else { Parity::None };
        sum.scale(1.0 / mean.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_sin_roundtrip() {
        let p = PeriodicProfile::cosine_series(4, &[(0, 0.5), (1, 2.0), (3, -1.0)]);
        assert_eq!(p.cos_coeff(1), 2.0);
        assert_eq!(p.cos_coeff(3), -1.0);
        assert_eq!(p.cos_coeff(0), 0.5);
        let s = PeriodicProfile::sine_series(4, &[(2, 0.25)]);
        assert_eq!(s.sin_coeff(2), 0.25);
        assert!(s.parity_holds(1e-15) && p.parity_holds(1e-15));
    }

    #[test]
    fn grid_roundtrip() {
        let p = PeriodicProfile::cosine_series(5, &[(1, 1.0), (5, 0.3)])
            .add(&PeriodicProfile::sine_series(5, &[(2, -0.7)]));
        let g = p.to_grid(32);
        let x = 2.0 * std::f64::consts::PI * 3.0 / 32.0;
        assert!((g[3] - p.eval(x)).norm() < 1e-14);
        let q = PeriodicProfile::from_grid(&g, 5, Parity::None);
        for k in -5..=5 {
            assert!((q.coeff(k) - p.coeff(k)).norm() < 1e-15);
        }
    }

    #[test]
    fn product_and_hilbert() {
        let c = PeriodicProfile::cosine_series(1, &[(1, 1.0)]);
        let c2 = c.mul(&c);
        assert_eq!(c2.cos_coeff(0), 0.5);
        assert_eq!(c2.cos_coeff(2), 0.5);
        assert_eq!(c2.parity, Parity::Even);
        let h = c.hilbert();
        assert_eq!(h.sin_coeff(1), 1.0);
        assert_eq!(h.parity, Parity::Odd);
    }

    #[test]
    fn reciprocal_series() {
        let f = PeriodicProfile::cosine_series(1, &[(0, 1.0), (1, 0.2)]);
        let r = f.reciprocal(40);
        for j in 0..7 {
            let x = j as f64;
            assert!((r.eval(x).re - 1.0 / (1.0 + 0.2 * x.cos())).abs() < 1e-15);
        }
        let one = PeriodicProfile::cosine_series(2, &[(0, 1.0)]).reciprocal(5);
        assert_eq!(one.coeff(0).re, 1.0);
        assert!(one.coeffs().iter().enumerate().all(|(i, c)| i == 5 || c.norm() == 0.0));
    }
}
