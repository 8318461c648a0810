use bf_core::closed_form::{flat_eigenvalue, phase_speed, Sign};
use bf_core::eig::eig_matrix;
use bf_core::operator_assembly::*;
use bf_core::stokes_expansion::expand;
use bf_core::validation::{pairing_defect, set_distance};
use bf_core::Complex64;
use nalgebra::DMatrix;

type C = Complex64;

/// Roots of the 2x2 characteristic polynomial.
fn roots_2x2(a: C, b: C, c: C, d: C) -> [C; 2] {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    [(tr + disc) * 0.5, (tr - disc) * 0.5]
}

#[test]
fn flat_blocks_match_closed_form() {
    let (kappa, mu, k_max) = (0.3, 0.1, 8);
    let op = assemble_flat(kappa, mu, k_max).unwrap();
    for k in -(k_max as i64)..=k_max as i64 {
        let i = op.index(0, k);
        let j = op.index(1, k);
        let m = &op.matrix;
        let roots = roots_2x2(m[(i, i)], m[(i, j)], m[(j, i)], m[(j, j)]);
        let flat = [flat_eigenvalue(kappa, k, Sign::Plus, mu), flat_eigenvalue(kappa, -k, Sign::Minus, mu)];
        assert!(set_distance(&roots, &flat) < 1e-13, "k = {k}: {roots:?} vs {flat:?}");
    }
}

#[test]
fn flat_off_mode_entries_vanish() {
    let op = assemble_flat(0.2, 0.07, 6).unwrap();
    for k in -6..=6i64 {
        for l in -6..=6i64 {
            if k == l {
                continue;
            }
            for a in 0..2 {
                for b in 0..2 {
                    assert_eq!(op.matrix[(op.index(a, k), op.index(b, l))].norm(), 0.0);
                }
            }
        }
    }
}

#[test]
fn quadruple_zero_at_mu_zero() {
    let op = assemble_flat(0.3, 0.0, 8).unwrap();
    let spec = eig_matrix(&op.matrix, false).unwrap();
    // The zero mode is a Jordan block, so rounding splits it by ~sqrt(ulp).
    let zeros = spec.eigenvalues.iter().filter(|z| z.norm() < 1e-6).count();
    assert_eq!(zeros, 4);
    let next = spec.eigenvalues.iter().map(|z| z.norm()).filter(|&r| r >= 1e-6).fold(f64::INFINITY, f64::min);
    assert!(next > 0.05);
}

#[test]
fn flat_spectrum_is_imaginary() {
    let op = assemble_flat(0.3, 0.1, 16).unwrap();
    let spec = eig_matrix(&op.matrix, false).unwrap();
    assert!(spec.eigenvalues.iter().all(|z| z.re.abs() < 1e-12));
}

#[test]
fn sigma_at_rest_is_second_derivative() {
    let e = expand(0.2).unwrap();
    let frakp = e.frakp_profile(0.0, 2);
    let s = sigma_matrix(&e, &frakp, 0.1, 0.0, 6).unwrap();
    for i in 0..13 {
        for j in 0..13 {
            let want = if i == j {
                let xi = i as f64 - 6.0 + 0.1;
                -xi * xi
            } else {
                0.0
            };
            assert!((s[(i, j)] - C::new(want, 0.0)).norm() < 1e-14);
        }
    }
}

#[test]
fn sigma_symmetries() {
    let e = expand(0.2).unwrap();
    let frakp = e.frakp_profile(0.01, 2);
    let s = sigma_matrix(&e, &frakp, 0.0, 0.01, 8).unwrap();
    let imag = s.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    assert!(imag < 1e-13 * s.norm());
    assert!((&s - s.transpose()).norm() < 1e-13 * s.norm());

    let s = sigma_matrix(&e, &frakp, 0.1, 0.01, 8).unwrap();
    assert!((&s - s.adjoint()).norm() <= 1e-12 * s.norm());
}

#[test]
fn factorizations() {
    let (kappa, eps, mu, k_max) = (0.05, 0.01, 0.02, 8);
    let e = expand(kappa).unwrap();
    let frakp = e.frakp_profile(eps, 2);
    let op = assemble(&e, &frakp, mu, eps, k_max).unwrap();
    let st = StructureMatrices::new(k_max);

    let b = assemble_B(&e, &frakp, mu, eps, k_max).unwrap();
    assert!((&b - b.adjoint()).norm() <= 1e-12 * b.norm());
    let jb = &st.j * &b;
    let dev = (&op.matrix - &jb).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(dev <= 1e-13 * b.norm(), "{dev}");
    assert!(st.preservation_defect(&b) <= 1e-13 * b.norm());

    let bs = assemble_b_shifted(&e, &frakp, mu, eps, k_max).unwrap();
    assert!((&bs - bs.adjoint()).norm() <= 1e-12 * bs.norm());
    let n = op.dim();
    let drift = DMatrix::from_diagonal_element(n, n, C::new(0.0, phase_speed(kappa) * mu));
    assert!((&op.matrix - drift - &st.j * &bs).norm() <= 1e-13 * bs.norm());

    assert!(st.reversibility_defect(&op.matrix) <= 1e-13 * op.norm());
}

#[test]
fn b_at_rest() {
    let kappa = 0.3;
    let e = expand(kappa).unwrap();
    let frakp = e.frakp_profile(0.0, 2);
    let c = phase_speed(kappa);
    let b = assemble_B(&e, &frakp, 0.0, 0.0, 4).unwrap();
    let idx = |comp, k| layout_index(4, comp, k);
    for k in -4..=4i64 {
        let kf = k as f64;
        assert!((b[(idx(0, k), idx(0, k))] - C::new(1.0 + kappa * kf * kf, 0.0)).norm() < 1e-14);
        assert!((b[(idx(0, k), idx(1, k))] - C::new(0.0, -c * kf)).norm() < 1e-14);
        assert!((b[(idx(1, k), idx(0, k))] - C::new(0.0, c * kf)).norm() < 1e-14);
        assert!((b[(idx(1, k), idx(1, k))] - C::new(kf.abs(), 0.0)).norm() < 1e-14);
    }
    let b = assemble_B(&e, &frakp, 0.13, 0.0, 4).unwrap();
    assert!((b[(idx(1, 0), idx(1, 0))] - C::new(0.13, 0.0)).norm() < 1e-15);
}

#[test]
fn mu_reflection_conjugates_spectrum() {
    let a = assemble_stokes(0.2, 0.01, 0.05, 16).unwrap();
    let b = assemble_stokes(0.2, 0.01, -0.05, 16).unwrap();
    let sa: Vec<C> = eig_matrix(&a.matrix, false).unwrap().eigenvalues.iter().map(|z| z.conj()).collect();
    let sb = eig_matrix(&b.matrix, false).unwrap().eigenvalues;
    assert!(set_distance(&sa, &sb) < 1e-8 * a.norm());
}

#[test]
fn pairing_on_assembled_operators() {
    for (kappa, eps, mu) in [(0.2, 0.01, 0.05), (0.8, 0.02, 0.1)] {
        let op = assemble_stokes(kappa, eps, mu, 16).unwrap();
        let spec = eig_matrix(&op.matrix, false).unwrap();
        assert!(pairing_defect(&spec.eigenvalues) <= 1e-8 * op.norm());
    }
}

#[test]
fn zero_mode_potential_is_in_kernel() {
    let op = assemble_stokes(0.2, 0.01, 0.0, 8).unwrap();
    let col = op.index(1, 0);
    assert_eq!(op.matrix.column(col).iter().map(|z| z.norm()).fold(0.0, f64::max), 0.0);
}

#[test]
fn rejects_bad_mu() {
    assert!(assemble_flat(0.2, 0.5, 4).is_err());
    assert!(assemble_flat(0.2, f64::NAN, 4).is_err());
}
