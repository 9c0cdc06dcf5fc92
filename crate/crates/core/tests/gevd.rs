use danse_core::mwf::{gevd, gevd_mwf_filter, CMatrix};
use danse_core::Complex64;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// `A A^H + shift I`, Hermitian positive definite.
fn random_spd(n: usize, shift: f64, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = random_matrix(n, n, rng);
    &a * a.adjoint() + CMatrix::identity(n, n) * c(shift, 0.0)
}

/// Determinant by Gaussian elimination with partial pivoting.
fn det(m: &CMatrix) -> Complex64 {
    let n = m.nrows();
    let mut a = m.clone();
    let mut d = c(1.0, 0.0);
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm())).unwrap();
        if p != col {
            a.swap_rows(p, col);
            d = -d;
        }
        let piv = a[(col, col)];
        d *= piv;
        for r in col + 1..n {
            let f = a[(r, col)] / piv;
            for k in col..n {
                let v = a[(col, k)];
                a[(r, k)] -= f * v;
            }
        }
    }
    d
}

/// Solves `A X = B` by Gauss-Jordan elimination.
fn solve(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut m = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm())).unwrap();
        m.swap_rows(p, col);
        x.swap_rows(p, col);
        let piv = m[(col, col)];
        for k in 0..n {
            m[(col, k)] /= piv;
        }
        for k in 0..x.ncols() {
            x[(col, k)] /= piv;
        }
        for r in (0..n).filter(|&r| r != col) {
            let f = m[(r, col)];
            for k in 0..n {
                let v = m[(col, k)];
                m[(r, k)] -= f * v;
            }
            for k in 0..x.ncols() {
                let v = x[(col, k)];
                x[(r, k)] -= f * v;
            }
        }
    }
    x
}

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn eigenpairs_satisfy_the_pencil_and_its_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..300 {
        let n = 1 + case % 8;
        let ryy = random_spd(n, 0.1, &mut rng);
        let rnn = random_spd(n, 0.5, &mut rng);
        let g = gevd(&ryy, &rnn, 0.0).unwrap();
        assert!(g.sigma.windows(2).all(|w| w[0] >= w[1]));
        // With Rnn = Q Q^H the eigenvectors are the columns of Q^-H.
        let x = solve(&g.q.adjoint(), &CMatrix::identity(n, n));
        for i in 0..n {
            let q = x.column(i).into_owned();
            let r = &ryy * &q - (&rnn * &q) * c(g.sigma[i], 0.0);
            assert!(r.norm() <= 1e-8 * ryy.norm() * q.norm(), "case {case}, pair {i}");
        }
        // Symmetric functions of the eigenvalues from an independent route:
        // trace and determinant of Rnn^-1 Ryy.
        let m = solve(&rnn, &ryy);
        let tr: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
        let sum: f64 = g.sigma.iter().sum();
        assert!((tr.re - sum).abs() <= 1e-8 * sum.abs().max(1.0) && tr.im.abs() < 1e-8 * sum.abs().max(1.0));
        let prod: f64 = g.sigma.iter().product();
        let d = det(&ryy) / det(&rnn);
        assert!((d.re - prod).abs() <= 1e-8 * prod.abs(), "case {case}: {d} vs {prod}");
        // Joint diagonalization.
        let sig = CMatrix::from_diagonal(&DVector::from_iterator(n, g.sigma.iter().map(|&s| c(s, 0.0))));
        assert!(rel(&(&g.q * g.q.adjoint()), &rnn) < 1e-8);
        assert!(rel(&(&g.q * sig * g.q.adjoint()), &ryy) < 1e-8);
    }
}

#[test]
fn filter_matches_explicit_inverse_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for n in 1..=6 {
        let ryy = random_spd(n, 0.2, &mut rng);
        let rnn = random_spd(n, 0.3, &mut rng);
        let g = gevd(&ryy, &rnn, 0.0).unwrap();
        let q_inv_h = solve(&g.q.adjoint(), &CMatrix::identity(n, n));
        let mut lam = CMatrix::zeros(n, n);
        lam[(0, 0)] = c(g.lambda1, 0.0);
        let full = q_inv_h * lam * g.q.adjoint();
        for r in 0..n {
            let w = gevd_mwf_filter(&g, r).unwrap();
            let expected = full.column(r).into_owned();
            assert!((&w - &expected).norm() <= 1e-9 * expected.norm().max(1e-12), "n {n}, ref {r}");
        }
    }
}

#[test]
fn rank_one_pencil_gives_the_wiener_solution() {
    // Ryy = Rnn + p s s^H: the MWF is p Rnn^-1 s conj(s_r) / (1 + p s^H Rnn^-1 s),
    // which the rank-one GEVD filter reproduces exactly.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for n in 2..=6 {
        let rnn = random_spd(n, 0.4, &mut rng);
        let s = random_matrix(n, 1, &mut rng);
        let p = 3.0;
        let ryy = &rnn + (&s * s.adjoint()) * c(p, 0.0);
        let g = gevd(&ryy, &rnn, 0.0).unwrap();
        let rinv_s = solve(&rnn, &s);
        let denom = c(1.0, 0.0) + (s.adjoint() * &rinv_s)[(0, 0)] * p;
        for r in 0..n {
            let w = gevd_mwf_filter(&g, r).unwrap();
            let expected = rinv_s.column(0) * (s[(r, 0)].conj() * p / denom);
            assert!((&w - &expected).norm() <= 1e-8 * expected.norm());
        }
        // Applied to a noise-free observation the filter returns the desired
        // component up to the Wiener shrinkage 1 - 1/sigma_1.
        let y = s.column(0).into_owned();
        let d: Complex64 = gevd_mwf_filter(&g, 0).unwrap().dotc(&y);
        let shrink = g.lambda1;
        assert!((d - s[(0, 0)] * shrink).norm() <= 1e-8 * s[(0, 0)].norm());
    }
}

#[test]
fn loading_rescues_a_singular_noise_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let a = random_matrix(4, 2, &mut rng);
    let rnn = &a * a.adjoint();
    let ryy = random_spd(4, 0.1, &mut rng);
    assert!(gevd(&ryy, &rnn, 1e-6).is_ok());
}
