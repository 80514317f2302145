//! Eigenvalues of small dense Hermitian matrices by cyclic Jacobi rotations.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sweeps are stopped once the off-diagonal Frobenius norm falls below this
/// fraction of the full Frobenius norm.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 60;

fn off_diagonal_norm<const N: usize>(a: &[[Complex64; N]; N]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                s += v.norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn frobenius_norm<const N: usize>(a: &[[Complex64; N]; N]) -> f64 {
    a.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Only the Hermitian part is used; the strict lower triangle is assumed to
/// mirror the upper one.
pub fn hermitian_eigenvalues<const N: usize>(matrix: &[[Complex64; N]; N]) -> Result<[f64; N]> {
    let mut a = *matrix;
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = Complex64::new(row[i].re, 0.0);
    }
    let frob = frobenius_norm(&a);
    let target = OFF_DIAGONAL_TOLERANCE * frob;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps,
                off_norm: off,
                frobenius: frob,
            });
        }
        sweeps += 1;
        for p in 0..N {
            for q in (p + 1)..N {
                rotate(&mut a, p, q);
            }
        }
    }

    let mut out = [0.0; N];
    for (i, v) in out.iter_mut().enumerate() {
        *v = a[i][i].re;
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Annihilate `a[p][q]` with `A ← W† A W`, where `W` first removes the phase
/// of `a[p][q]` and then applies a real Jacobi rotation.
fn rotate<const N: usize>(a: &mut [[Complex64; N]; N], p: usize, q: usize) {
    let apq = a[p][q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = (apq / r).conj();
    let theta = (a[q][q].re - a[p][p].re) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let w_pp = Complex64::new(c, 0.0);
    let w_pq = Complex64::new(s, 0.0);
    let w_qp = -s * phase;
    let w_qq = c * phase;

    for row in a.iter_mut() {
        let (x, y) = (row[p], row[q]);
        row[p] = x * w_pp + y * w_qp;
        row[q] = x * w_pq + y * w_qq;
    }
    for k in 0..N {
        let (x, y) = (a[p][k], a[q][k]);
        a[p][k] = w_pp.conj() * x + w_qp.conj() * y;
        a[q][k] = w_pq.conj() * x + w_qq.conj() * y;
    }
    a[p][q] = Complex64::new(0.0, 0.0);
    a[q][p] = Complex64::new(0.0, 0.0);
    a[p][p].im = 0.0;
    a[q][q].im = 0.0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Complex, DMatrix, SymmetricEigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian<const N: usize>(rng: &mut ChaCha8Rng) -> [[Complex64; N]; N] {
        let mut a = [[Complex64::new(0.0, 0.0); N]; N];
        for i in 0..N {
            a[i][i] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in (i + 1)..N {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[i][j] = v;
                a[j][i] = v.conj();
            }
        }
        a
    }

    fn oracle<const N: usize>(a: &[[Complex64; N]; N]) -> Vec<f64> {
        let m = DMatrix::from_fn(N, N, |i, j| Complex::new(a[i][j].re, a[i][j].im));
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a = random_hermitian::<8>(&mut rng);
            let ours = hermitian_eigenvalues(&a).unwrap();
            for (x, y) in ours.iter().zip(oracle(&a)) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn diagonal_input_is_untouched() {
        let mut a = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, d) in [3.0, -1.0, 0.0, 2.5].into_iter().enumerate() {
            a[i][i] = Complex64::new(d, 0.0);
        }
        assert_eq!(hermitian_eigenvalues(&a).unwrap(), [-1.0, 0.0, 2.5, 3.0]);
    }

    #[test]
    fn pauli_y() {
        let mut a = [[Complex64::new(0.0, 0.0); 2]; 2];
        a[0][1] = Complex64::new(0.0, -1.0);
        a[1][0] = Complex64::new(0.0, 1.0);
        let ev = hermitian_eigenvalues(&a).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_spectrum() {
        // J − I for the all-ones J: eigenvalues {−1 ×5, 5}
        let a = [[Complex64::new(1.0, 0.0); 6]; 6];
        let mut b = a;
        for (i, row) in b.iter_mut().enumerate() {
            row[i] = Complex64::new(0.0, 0.0);
        }
        let ev = hermitian_eigenvalues(&b).unwrap();
        for v in &ev[..5] {
            assert!((v + 1.0).abs() < 1e-12);
        }
        assert!((ev[5] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_input_does_not_converge() {
        let mut a = [[Complex64::new(0.0, 0.0); 3]; 3];
        a[0][1] = Complex64::new(f64::NAN, 0.0);
        a[1][0] = a[0][1];
        // NaN never satisfies the tolerance test
        assert!(matches!(
            hermitian_eigenvalues(&a),
            Err(Error::EigenNoConvergence { .. })
        ));
    }
}
