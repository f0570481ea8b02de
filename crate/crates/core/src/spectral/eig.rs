//! Eigendecomposition of unitary matrices through the commuting Hermitian
//! pair H1 = (U + U^H)/2, H2 = (U - U^H)/(2i).
//!
//! Diagonalizing H1 gives real parts w = cos(omega) with an orthonormal basis;
//! H2 restricted to each near-degenerate w-cluster is then diagonalized to
//! split s = sin(omega). The reconstructed lambda_j = w_j + i s_j are exactly
//! the eigenvalues of U and the basis stays orthonormal even at degeneracies,
//! which plain non-Hermitian solvers do not guarantee.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// w-gap below which eigenvalues are treated as one cluster for the H2 split.
const CLUSTER_GAP: f64 = 1e-7;

/// Cyclic complex Jacobi eigendecomposition of a Hermitian matrix, returning
/// eigenvalues in ascending order with orthonormal eigenvector columns.
///
/// nalgebra's symmetric_eigen leaves residuals around 1e-7 when eigenvalues
/// cluster; Jacobi stays at machine precision, and the matrices here are
/// small (coin dimension, at most 32) so the extra sweeps cost nothing.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = h.nrows();
    let mut a = (h + h.adjoint()).scale(0.5);
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let bn = apq.norm();
                if bn <= f64::MIN_POSITIVE {
                    continue;
                }
                // factor out the phase, then a standard real rotation
                let e = (apq / bn).conj();
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * bn);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let (cs, se_, sc) = (Complex64::from(c), Complex64::from(s) * e, Complex64::from(s));
                let ce = Complex64::from(c) * e;
                for i in 0..n {
                    let (aip, aiq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = cs * aip - se_ * aiq;
                    a[(i, q)] = sc * aip + ce * aiq;
                }
                for j in 0..n {
                    let (apj, aqj) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = cs * apj - se_.conj() * aqj;
                    a[(q, j)] = sc * apj + ce.conj() * aqj;
                }
                for i in 0..n {
                    let (vip, viq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = cs * vip - se_ * viq;
                    v[(i, q)] = sc * vip + ce * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let vals = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut q = DMatrix::<Complex64>::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        q.set_column(new, &v.column(old));
    }
    (vals, q)
}

/// Returns eigenphases omega_j in (-pi, pi] and matching unit eigenvectors
/// (columns), ordered by ascending cos(omega), ties by ascending sin(omega).
pub fn eig_unitary(u: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let c = u.nrows();
    let uh = u.adjoint();
    let h1 = (u + &uh).scale(0.5);
    let h2 = (u - &uh) * Complex64::new(0.0, -0.5);
    let (w, mut q) = hermitian_eigen(&h1);
    let t2 = q.adjoint() * &h2 * &q;
    let mut s = vec![0.0f64; c];
    let mut lo = 0;
    while lo < c {
        let mut hi = lo + 1;
        while hi < c && w[hi] - w[hi - 1] < CLUSTER_GAP {
            hi += 1;
        }
        if hi - lo == 1 {
            s[lo] = t2[(lo, lo)].re;
        } else {
            // re-diagonalize the cluster block of H2
            let m = hi - lo;
            let block = DMatrix::from_fn(m, m, |i, j| t2[(lo + i, lo + j)]);
            let (bvals, bvecs) = hermitian_eigen(&block);
            let qc = q.columns(lo, m).into_owned();
            for i in 0..m {
                s[lo + i] = bvals[i];
                let col = &qc * bvecs.column(i);
                q.set_column(lo + i, &col);
            }
        }
        lo = hi;
    }
    let omegas = w
        .iter()
        .zip(&s)
        .map(|(&wi, &si)| wrap_angle(si.atan2(wi)))
        .collect();
    (omegas, q)
}

/// Smallest gap |lambda_i - lambda_j| between distinct eigenvalues on the unit
/// circle; zero gap marks an exactly degenerate node.
pub fn min_eigenvalue_gap(omegas: &[f64]) -> f64 {
    let c = omegas.len();
    let mut sorted = omegas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut gap = f64::INFINITY;
    for i in 0..c {
        let a = sorted[i];
        let b = sorted[(i + 1) % c];
        let la = Complex64::from_polar(1.0, a);
        let lb = Complex64::from_polar(1.0, b);
        gap = gap.min((la - lb).norm());
    }
    gap
}

/// Unitary polar factor W of M (via SVD), the Procrustes rotation aligning a
/// degenerate subspace basis with a reference.
pub fn polar_unitary(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with v_t");
    u * vt
}

/// Wrap an angle to (-pi, pi], normalizing -pi (and signed zero) away.
pub fn wrap_angle(x: f64) -> f64 {
    let mut w = x.rem_euclid(2.0 * std::f64::consts::PI);
    if w > std::f64::consts::PI {
        w -= 2.0 * std::f64::consts::PI;
    }
    if w <= -std::f64::consts::PI + 1e-12 {
        w = std::f64::consts::PI;
    }
    if w == 0.0 {
        w = 0.0; // drop a signed zero
    }
    w
}

/// |a - b| on the circle.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    d.min(2.0 * std::f64::consts::PI - d)
}

/// Eigenvalues of a real symmetric matrix, descending by |value|.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let hc = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::from(m[(i, j)]));
    let (mut vals, _) = hermitian_eigen(&hc);
    vals.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    vals
}
