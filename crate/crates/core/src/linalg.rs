//! Dense complex linear algebra: Hermitian eigendecomposition by cyclic
//! Jacobi rotations, Kronecker products and a few norms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const MAX_SWEEPS: usize = 100;

/// `<u, v> = sum_i u_i conj(v_i)`, linear in the first argument.
pub fn inner(u: &CVector, v: &CVector) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of `m* m - I`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs_diff(&(m.adjoint() * m), &CMatrix::identity(n, n))
}

/// Largest entry modulus of `m - m*`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Kronecker product; index `(i, k)` of the result's row space is `i * b.nrows() + k`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// Spectral operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> Result<f64> {
    let e = HermitianEigen::new(m)?;
    Ok(e.values.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

/// Eigendecomposition `A = Q diag(values) Q*` of a Hermitian matrix, values
/// ascending and eigenvectors in the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

impl HermitianEigen {
    /// Cyclic Jacobi. The input must be Hermitian to [`tol::HERMITIAN`];
    /// iteration stops once the off-diagonal Frobenius norm is at most
    /// [`tol::JACOBI_OFF_DIAGONAL`] times `max(1, |A|_F)`.
    pub fn new(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Precondition(format!(
                "eigendecomposition of a non-square {}x{} matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = hermiticity_defect(m);
        if defect > tol::HERMITIAN {
            return Err(Error::Precondition(format!(
                "matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        let n = m.nrows();
        let mut a = (m + m.adjoint()).scale(0.5);
        let mut q = CMatrix::identity(n, n);
        let target = tol::JACOBI_OFF_DIAGONAL * a.norm().max(1.0);
        let mut sweeps = 0;
        loop {
            let off = off_diagonal_norm(&a);
            if off <= target {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::NonConvergence {
                    sweeps,
                    residual: off,
                });
            }
            sweeps += 1;
            for p in 0..n {
                for qi in p + 1..n {
                    rotate(&mut a, &mut q, p, qi);
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| q[(r, order[c])]);
        Ok(HermitianEigen {
            values,
            vectors,
            sweeps,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    /// `Q f(D) Q*`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let w = f(v);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|v| v)
    }
}

/// Zero `a[p, q]` with `a <- G* a G`, `q <- q G` where, writing
/// `a[p, q] = r e^{i phi}`, `G` restricted to `(p, q)` is
/// `[[c, s], [-s e^{-i phi}, c e^{-i phi}]]`.
fn rotate(a: &mut CMatrix, vecs: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = (apq / r).conj();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = phase * -s;
    let g_qq = phase * c;
    let n = a.nrows();
    for k in 0..n {
        let (x, y) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = x * g_pp + y * g_qp;
        a[(k, q)] = x * g_pq + y * g_qq;
    }
    for k in 0..n {
        let (x, y) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = g_pp.conj() * x + g_qp.conj() * y;
        a[(q, k)] = g_pq.conj() * x + g_qq.conj() * y;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(app - t * r, 0.0);
    a[(q, q)] = C64::new(aqq + t * r, 0.0);
    for k in 0..n {
        let (x, y) = (vecs[(k, p)], vecs[(k, q)]);
        vecs[(k, p)] = x * g_pp + y * g_qp;
        vecs[(k, q)] = x * g_pq + y * g_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&m + m.adjoint()).scale(0.5)
    }

    /// Eigenvalues of a complex Hermitian `A = X + iY` from the real
    /// symmetric embedding `[[X, -Y], [Y, X]]`, whose spectrum is that of `A`
    /// with every eigenvalue doubled.
    fn oracle_values(a: &CMatrix) -> Vec<f64> {
        let n = a.nrows();
        let emb = DMatrix::<f64>::from_fn(2 * n, 2 * n, |r, c| {
            let z = a[(r % n, c % n)];
            match (r < n, c < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let mut v: Vec<f64> = emb.symmetric_eigen().eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v.into_iter().step_by(2).collect()
    }

    #[test]
    fn matches_real_embedding_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 8, 17, 40] {
            let a = random_hermitian(n, &mut rng);
            let eig = HermitianEigen::new(&a).unwrap();
            let oracle = oracle_values(&a);
            for (x, y) in eig.values.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-10, "n={n}: {x} vs {y}");
            }
            assert!(max_abs_diff(&eig.reconstruct(), &a) < 1e-10);
            assert!(unitarity_defect(&eig.vectors) < 1e-10);
        }
    }

    #[test]
    fn degenerate_and_diagonal_inputs() {
        let id = CMatrix::identity(5, 5);
        let eig = HermitianEigen::new(&id).unwrap();
        assert_eq!(eig.sweeps, 0);
        assert!(eig.values.iter().all(|&v| v == 1.0));
        // Rank-one projector onto a complex unit vector.
        let v = CVector::from_vec(vec![C64::new(0.5, 0.5), C64::new(0.0, -0.5), C64::new(0.5, 0.0)]);
        let p = &v * v.adjoint();
        let eig = HermitianEigen::new(&p).unwrap();
        assert!(eig.values[0].abs() < 1e-12 && eig.values[1].abs() < 1e-12);
        assert!((eig.values[2] - 1.0).abs() < 1e-12);
        assert!(inner(&eig.vector(2), &v).norm() > 1.0 - 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(0.0, 1.0);
        assert!(matches!(HermitianEigen::new(&m), Err(Error::Precondition(_))));
        assert!(matches!(
            HermitianEigen::new(&CMatrix::zeros(2, 3)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn kron_index_convention() {
        let a = CMatrix::from_fn(2, 2, |r, c| C64::new((2 * r + c) as f64, 0.0));
        let b = CMatrix::from_fn(3, 3, |r, c| C64::new(0.0, (3 * r + c) as f64));
        let k = kron(&a, &b);
        for (i, j, k1, l) in [(1, 0, 2, 1), (0, 1, 1, 2), (1, 1, 0, 0)] {
            assert_eq!(k[(i * 3 + k1, j * 3 + l)], a[(i, j)] * b[(k1, l)]);
        }
    }

    #[test]
    fn inner_is_linear_in_first_argument() {
        let u = CVector::from_vec(vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0)]);
        let v = CVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(1.0, 1.0)]);
        let i = C64::new(0.0, 1.0);
        assert!((inner(&(&u * i), &v) - i * inner(&u, &v)).norm() < 1e-15);
        assert!((inner(&u, &(&v * i)) + i * inner(&u, &v)).norm() < 1e-15);
        assert!((inner(&u, &u).re - norm(&u).powi(2)).abs() < 1e-14);
    }
}
