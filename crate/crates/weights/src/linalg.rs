//! Small dense helpers for symmetric positive definite matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues and orthonormal eigenvectors (columns) of the symmetric part of `m`.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(symmetrize(m));
    (e.eigenvalues, e.eigenvectors)
}

/// `U diag(f(λ)) Uᵀ`.
pub fn spectral_map(vals: &DVector<f64>, vecs: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = vals.len();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let fk = f(vals[k]);
        let u = vecs.column(k);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += fk * u[r] * u[c];
            }
        }
    }
    out
}

/// `M^s` for symmetric positive definite `M`.
pub fn spd_pow(m: &DMatrix<f64>, s: f64) -> DMatrix<f64> {
    if s == 1.0 {
        return symmetrize(m);
    }
    let (vals, vecs) = sym_eigen(m);
    spectral_map(&vals, &vecs, |l| l.powf(s))
}

pub fn spd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    spd_pow(m, 0.5)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m).0.min()
}

pub fn is_spd(m: &DMatrix<f64>) -> bool {
    let asym = (m - m.transpose()).abs().max();
    asym <= 1e-10 * m.abs().max().max(1.0) && min_eigenvalue(m) > 0.0
}

/// Largest singular value. Closed form for 2 × 2, SVD otherwise.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 2 && m.ncols() == 2 {
        return op_norm_2x2(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    }
    m.singular_values().max()
}

/// `‖[[a, b], [c, d]]‖`.
pub fn op_norm_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let t = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
    ((t + disc) * 0.5).sqrt()
}

pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    m.singular_values().min()
}

/// Rotation by `theta` in the plane of the first two coordinates.
pub fn plane_rotation(n: usize, theta: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(n, n);
    if n >= 2 {
        let (s, c) = theta.sin_cos();
        r[(0, 0)] = c;
        r[(0, 1)] = -s;
        r[(1, 0)] = s;
        r[(1, 1)] = c;
    }
    r
}

/// Haar-distributed orthogonal matrix via QR of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for i in 0..n {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    q
}

/// Unit vectors used to sample gauges: `k` equally spaced angles on the half circle for
/// `n = 2`, a seeded quasi-uniform set plus the coordinate axes otherwise.
pub fn direction_net(n: usize, k: usize) -> Vec<DVector<f64>> {
    match n {
        1 => vec![DVector::from_element(1, 1.0)],
        2 => (0..k)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / k as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        _ => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed + n as u64);
            let mut out: Vec<DVector<f64>> = (0..n)
                .map(|i| {
                    let mut e = DVector::zeros(n);
                    e[i] = 1.0;
                    e
                })
                .collect();
            let total = k * (n - 1);
            while out.len() < total {
                let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let nv = v.norm();
                if nv > 1e-8 {
                    out.push(v / nv);
                }
            }
            out
        }
    }
}
