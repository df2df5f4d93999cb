//! Centered minimum-volume enclosing ellipsoids (Khachiyan iteration with
//! Todd–Yıldırım away steps).

use nalgebra::{DMatrix, DVector};

use crate::error::WeightError;

#[derive(Clone, Debug)]
pub struct Enclosing {
    /// `E` with every point satisfying `yᵀ E⁻¹ y ≤ 1`, equality at the worst point.
    pub shape: DMatrix<f64>,
    /// Final `max_k y_kᵀ X(u)⁻¹ y_k`; at the optimum this equals `n`.
    pub max_leverage: f64,
    pub iterations: usize,
}

fn moment(points: &[DVector<f64>], u: &[f64], n: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, n);
    for (y, &w) in points.iter().zip(u) {
        if w > 0.0 {
            x.ger(w, y, y, 1.0);
        }
    }
    x
}

/// Ellipsoid `{y : yᵀE⁻¹y ≤ 1}` containing `±y_k` with `max_k yᵀX⁻¹y ≤ n(1+η)²`.
pub fn min_volume_enclosing(points: &[DVector<f64>], eta: f64, max_iter: usize) -> Result<Enclosing, WeightError> {
    let n = points[0].len();
    let k = points.len();
    let target = n as f64 * (1.0 + eta).powi(2);
    let nf = n as f64;
    let mut u = vec![1.0 / k as f64; k];
    let mut lev = vec![0.0; k];
    let mut it = 0;
    loop {
        let x = moment(points, &u, n);
        let Some(chol) = x.clone().cholesky() else {
            return Err(WeightError::Certification { achieved_eta: f64::INFINITY, iterations: it });
        };
        for (l, y) in lev.iter_mut().zip(points) {
            *l = y.dot(&chol.solve(y));
        }
        let (jp, &mp) = lev.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        if mp <= target {
            return Ok(Enclosing { shape: x * mp, max_leverage: mp, iterations: it });
        }
        if it >= max_iter {
            return Err(WeightError::Certification { achieved_eta: (mp / nf).sqrt() - 1.0, iterations: it });
        }
        let (jm, &mm) = lev
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        if mp / nf - 1.0 >= 1.0 - mm / nf {
            let beta = (mp - nf) / (nf * (mp - 1.0));
            u.iter_mut().for_each(|w| *w *= 1.0 - beta);
            u[jp] += beta;
        } else {
            let drop = u[jm] / (1.0 - u[jm]);
            let beta = if mm > 1.0 { ((nf - mm) / (nf * (mm - 1.0))).min(drop) } else { drop };
            u.iter_mut().for_each(|w| *w *= 1.0 + beta);
            u[jm] -= beta;
            if beta == drop {
                u[jm] = 0.0;
            }
        }
        it += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_on_an_ellipse_recover_it() {
        let e = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 2.0]);
        let half = crate::linalg::spd_sqrt(&e);
        let pts: Vec<_> = (0..40)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 40.0;
                &half * DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect();
        let out = min_volume_enclosing(&pts, 1e-6, 10_000).unwrap();
        assert!((&out.shape - &e).abs().max() < 1e-4, "{}", out.shape);
    }

    #[test]
    fn square_corners_give_the_circumscribed_circle() {
        let pts = vec![DVector::from_vec(vec![1.0, 1.0]), DVector::from_vec(vec![1.0, -1.0])];
        let out = min_volume_enclosing(&pts, 1e-9, 100).unwrap();
        assert!((&out.shape - DMatrix::identity(2, 2) * 2.0).abs().max() < 1e-8);
    }
}
