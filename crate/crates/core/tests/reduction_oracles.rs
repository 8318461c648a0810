use bf_core::closed_form::{flat_quadruple, mu_bar_leading};
use bf_core::eig::eig_matrix;
use bf_core::operator_assembly::assemble_stokes;
use bf_core::reduction::*;
use bf_core::spectral_engine::{compress_symplectic, contour_radius, eig, near_zero_quadruple, riesz_projector, DEFAULT_NODES};
use bf_core::validation::set_distance;
use bf_core::{BfError, Complex64};
use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn spectrum4(m: &Matrix4<C>) -> Vec<C> {
    eig_matrix(&DMatrix::from_fn(4, 4, |i, j| m[(i, j)]), false).unwrap().eigenvalues
}

fn spectrum2(m: &Matrix2<C>) -> Vec<C> {
    eig_matrix(&DMatrix::from_fn(2, 2, |i, j| m[(i, j)]), false).unwrap().eigenvalues
}

/// Symplectic 4x4 reduction of the operator at `(kappa, eps, mu)`.
fn reduced(kappa: f64, eps: f64, mu: f64, k_max: usize) -> (HamiltonianBlocks4, [C; 4]) {
    let op = assemble_stokes(kappa, eps, mu, k_max).unwrap();
    let spec = eig(&op).unwrap();
    let q = near_zero_quadruple(&spec, kappa, mu).unwrap();
    let p = riesz_projector(&op, contour_radius(&spec, &q), DEFAULT_NODES).unwrap();
    let s = compress_symplectic(&op, &p).unwrap();
    let l4 = Matrix4::from_fn(|i, j| s.l4[(i, j)]);
    (check_structure_with(&l4, 0.0, 1e-12).unwrap().with_shift(s.drift), q.values)
}

#[test]
fn flat_compression_is_structured_and_diagonal() {
    let (kappa, mu) = (0.05, 0.05);
    let (blocks, _) = reduced(kappa, 0.0, mu, 12);
    let out = block_diagonalize(&blocks).unwrap();
    assert!(out.iterations <= 2);
    let flat = flat_quadruple(kappa, mu);
    assert!(set_distance(&spectrum2(&out.u2), &flat[..2]) < 1e-10);
    assert!(set_distance(&spectrum2(&out.s2), &flat[2..]) < 1e-10);
}

#[test]
fn unstable_u_block_matches_quadruple() {
    let (kappa, eps) = (0.05, 0.01);
    let mu = 0.5 * mu_bar_leading(kappa, eps).unwrap();
    let (blocks, quad) = reduced(kappa, eps, mu, 16);
    let out = block_diagonalize(&blocks).unwrap();
    let (p, m) = eigenpair_of_u(&out.u2);
    assert!((p - quad[0]).norm() < 1e-8 && (m - quad[1]).norm() < 1e-8);
    assert!(p.re > 0.0 && (p.re + m.re).abs() < 1e-12);
    assert!(symplectic_defect(&out.transform) < 1e-11);
}

#[test]
fn pattern_breach_reports_entries() {
    let mut b = Matrix4::<C>::identity();
    b[(0, 1)] = c(0.3, 0.0);
    b[(1, 0)] = c(0.3, 0.0);
    match check_structure(&(j4() * b)) {
        Err(BfError::StructureViolation { entries }) => assert_eq!(entries, vec![(0, 1), (1, 0)]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn decoupling_without_coupling_is_identity() {
    let e = Matrix2::new(c(0.2, 0.0), c(0.0, 0.1), c(0.0, -0.1), c(0.3, 0.0));
    let g = Matrix2::new(c(1.0, 0.0), c(0.0, 0.4), c(0.0, -0.4), c(0.5, 0.0));
    let blocks = HamiltonianBlocks4::new(e, Matrix2::zeros(), g);
    let (out, y) = first_decoupling(&blocks).unwrap();
    assert_eq!(y, Matrix4::identity());
    assert_eq!(out, blocks);
    let d = block_diagonalize(&blocks).unwrap();
    assert_eq!(d.transform, Matrix4::identity());
    assert_eq!(d.iterations, 0);
}

#[test]
fn decoupling_preserves_spectrum() {
    let e = Matrix2::new(c(0.2, 0.0), c(0.0, 0.1), c(0.0, -0.1), c(0.3, 0.0));
    let f = Matrix2::new(c(0.05, 0.0), c(0.0, 0.02), c(0.0, -0.03), c(0.01, 0.0));
    let g = Matrix2::new(c(1.0, 0.0), c(0.0, 0.4), c(0.0, -0.4), c(0.5, 0.0));
    let blocks = HamiltonianBlocks4::new(e, f, g);
    let (out, y) = first_decoupling(&blocks).unwrap();
    assert!(symplectic_defect(&y) < 1e-13);
    assert!(set_distance(&spectrum4(&blocks.l()), &spectrum4(&out.l())) < 1e-12);
    let degenerate = HamiltonianBlocks4::new(e, f, Matrix2::new(c(0.0, 0.0), c(0.0, 0.4), c(0.0, -0.4), c(0.5, 0.0)));
    assert!(matches!(first_decoupling(&degenerate), Err(BfError::DegenerateG { .. })));
}

#[test]
fn sylvester_examples() {
    let s = SylvesterCoeffs { a: 0.0, b: 1.0, c: 0.0, d: 1.0, e: 0.0 };
    let a = sylvester_matrix(&s);
    assert!((a * sylvester_inverse(&s).unwrap() - Matrix4::identity()).norm() < 1e-15);
    let s = SylvesterCoeffs { a: 0.6, b: 0.9, c: 0.0, d: 0.4, e: 0.0 };
    assert!(matches!(sylvester_inverse(&s), Err(BfError::SingularSystem { .. })));
}

#[test]
fn homological_matches_generic_solve() {
    let e = Matrix2::new(c(0.02, 0.0), c(0.0, -0.01), c(0.0, 0.01), c(-0.003, 0.0));
    let g = Matrix2::new(c(1.01, 0.0), c(0.0, 0.03), c(0.0, -0.03), c(0.05, 0.0));
    let (d1, d0) = (j2() * e, j2() * g);
    assert_eq!(solve_homological(&d1, &d0, &Matrix2::zeros()).unwrap(), Matrix2::zeros());

    let f = Matrix2::new(c(0.001, 0.0), c(0.0, 0.002), c(0.0, -0.004), c(0.003, 0.0));
    let x = solve_homological(&d1, &d0, &f).unwrap();
    let r = d1 * x - x * d0 + j2() * f;
    assert!(r.norm() < 1e-15);
    assert_eq!((x[(0, 0)].im, x[(0, 1)].re, x[(1, 0)].re, x[(1, 1)].im), (0.0, 0.0, 0.0, 0.0));

    let s = SylvesterCoeffs::from_blocks(&e, &g);
    let rhs = Vector4::new(-f[(1, 0)].im, f[(1, 1)].re, -f[(0, 0)].re, f[(0, 1)].im);
    let generic = sylvester_matrix(&s).lu().solve(&rhs).unwrap();
    let ours = Vector4::new(x[(0, 0)].re, x[(0, 1)].im, x[(1, 0)].im, x[(1, 1)].re);
    assert!((generic - ours).norm() < 1e-12 * generic.norm());
}

#[test]
fn eigenpair_examples() {
    let (alpha, beta, gamma) = (0.7, 0.2, 0.45);
    let u = Matrix2::new(c(0.0, alpha), c(beta, 0.0), c(gamma, 0.0), c(0.0, alpha));
    let (p, m) = eigenpair_of_u(&u);
    let r = (beta * gamma as f64).sqrt();
    assert!((p - c(r, alpha)).norm() < 1e-15 && (m - c(-r, alpha)).norm() < 1e-15);
    let u = Matrix2::new(c(0.0, alpha), c(beta, 0.0), c(-gamma, 0.0), c(0.0, alpha));
    let (p, m) = eigenpair_of_u(&u);
    assert!(p.re.abs() < 1e-16 && m.re.abs() < 1e-16);
    assert!(((p.im - alpha) + (m.im - alpha)).abs() < 1e-15);
}
