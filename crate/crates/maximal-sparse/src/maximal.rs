//! `M_W′`, `M_W` and the local quantity `N_Q` on leaf-constant weights.

use dyadic_core::{sequence_maximal, Cube, Grid, Shape, StepFunction};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use weights::linalg::{op_norm, spd_pow};
use weights::{reducing_table, LeafWeights, MatrixWeight, ReducingOptions, ReducingTable};

use crate::error::MaximalError;

pub(crate) fn check_vector(lw: &LeafWeights, f: &StepFunction) -> Result<(), MaximalError> {
    lw.grid().check_same(f.grid())?;
    if f.shape() != Shape::Vector(lw.n()) {
        return Err(MaximalError::InvalidInput(format!("expected a vector function in R^{}, got {:?}", lw.n(), f.shape())));
    }
    Ok(())
}

fn norm_mv(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    (0..n)
        .map(|r| {
            let s: f64 = (0..n).map(|k| m[(r, k)] * x[k]).sum();
            s * s
        })
        .sum::<f64>()
        .sqrt()
}

/// `m_I|X_I g|` for every cube, by cube id.
fn cube_averages(grid: &Grid, xs: &[DMatrix<f64>], g: &[f64], n: usize) -> Vec<f64> {
    (0..grid.num_cubes())
        .into_par_iter()
        .map(|id| {
            let r = grid.leaf_range(grid.cube(id));
            let len = r.len() as f64;
            r.map(|j| norm_mv(&xs[id], &g[j * n..(j + 1) * n])).sum::<f64>() / len
        })
        .collect()
}

/// `m_I|(m_I W^{-1})^{-1/2} W^{-1/2} f|` by cube id; with `inverse` the same
/// quantity for the weight `W^{-1}`, i.e. `m_I|(m_I W)^{-1/2} W^{1/2} f|`.
pub fn prime_averages(lw: &LeafWeights, f: &StepFunction, inverse: bool) -> Result<Vec<f64>, MaximalError> {
    check_vector(lw, f)?;
    let s = if inverse { 1.0 } else { -1.0 };
    let xs: Vec<DMatrix<f64>> = lw.all_means(s).par_iter().map(|m| spd_pow(m, -0.5)).collect();
    let g = lw.power_step(s / 2.0).apply(f)?;
    Ok(cube_averages(lw.grid(), &xs, g.data(), lw.n()))
}

/// Closed form of `M_W′` at `p = 2`.
pub fn maximal_prime_p2(lw: &LeafWeights, f: &StepFunction, inverse: bool) -> Result<StepFunction, MaximalError> {
    Ok(sequence_maximal(lw.grid(), &prime_averages(lw, f, inverse)?))
}

/// `sup_{I ∋ x} m_I|V_I W^{-1/p} f|` with `V_I` from `table`.
pub fn maximal_prime_reducing(table: &ReducingTable, lw: &LeafWeights, f: &StepFunction) -> Result<StepFunction, MaximalError> {
    check_vector(lw, f)?;
    let g = lw.grid();
    g.check_same(table.grid())?;
    let xs: Vec<DMatrix<f64>> = g.all_cubes().map(|c| table.v(c).clone()).collect();
    let h = lw.power_step(-1.0 / table.p()).apply(f)?;
    Ok(sequence_maximal(g, &cube_averages(g, &xs, h.data(), lw.n())))
}

pub fn maximal_mw_prime(w: &MatrixWeight, f: &StepFunction, p: f64) -> Result<StepFunction, MaximalError> {
    let lw = LeafWeights::new(w, f.grid())?;
    if p == 2.0 {
        maximal_prime_p2(&lw, f, false)
    } else {
        let table = reducing_table(w, f.grid(), p, &ReducingOptions::default())?;
        maximal_prime_reducing(&table, &lw, f)
    }
}

/// Value of `M_W f` at one leaf with the cube attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MwValue {
    pub value: f64,
    pub cube: Cube,
}

/// `M_W f` leafwise, with a maximizing cube (the largest among ties).
pub fn maximal_mw_detail(lw: &LeafWeights, f: &StepFunction) -> Result<Vec<MwValue>, MaximalError> {
    check_vector(lw, f)?;
    let g = lw.grid();
    let n = lw.n();
    let h = lw.power_step(-0.5).apply(f)?;
    let h = h.data();
    let leaves = g.num_leaves();
    Ok((0..leaves)
        .into_par_iter()
        .map(|x| {
            let m = lw.power(x, 0.5);
            let mut prefix = Vec::with_capacity(leaves + 1);
            prefix.push(0.0);
            let mut acc = 0.0;
            for y in 0..leaves {
                acc += norm_mv(&m, &h[y * n..(y + 1) * n]);
                prefix.push(acc);
            }
            let mut best = MwValue { value: -1.0, cube: g.root() };
            for c in g.chain(x) {
                let r = g.leaf_range(c);
                let v = (prefix[r.end] - prefix[r.start]) / r.len() as f64;
                if v > best.value {
                    best = MwValue { value: v, cube: c };
                }
            }
            best
        })
        .collect())
}

pub fn maximal_mw_with(lw: &LeafWeights, f: &StepFunction) -> Result<StepFunction, MaximalError> {
    let d = maximal_mw_detail(lw, f)?;
    Ok(StepFunction::from_data(lw.grid(), Shape::Scalar, d.iter().map(|v| v.value).collect())?)
}

pub fn maximal_mw(w: &MatrixWeight, f: &StepFunction) -> Result<StepFunction, MaximalError> {
    maximal_mw_with(&LeafWeights::new(w, f.grid())?, f)
}

/// `‖W^{1/2}(x)(m_R W^{-1})^{1/2}‖` along the chain of every leaf, root first.
fn chain_factors(lw: &LeafWeights) -> Vec<Vec<f64>> {
    let g = lw.grid();
    let roots: Vec<DMatrix<f64>> = lw.all_means(-1.0).par_iter().map(|m| spd_pow(m, 0.5)).collect();
    (0..g.num_leaves())
        .into_par_iter()
        .map(|x| {
            let w = lw.power(x, 0.5);
            g.chain(x).map(|c| op_norm(&(&w * &roots[g.id(c)]))).collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalNq {
    pub cube: Cube,
    /// `N_Q` on the leaves of `Q`, zero elsewhere.
    #[serde(skip)]
    pub values: StepFunction,
    /// `|Q|^{-1} ∫_Q N_Q²`.
    pub average: f64,
}

/// `N_Q(x) = sup_{x ∈ R ⊆ Q} ‖W^{1/2}(x)(m_R W^{-1})^{1/2}‖`.
pub fn local_nq_with(lw: &LeafWeights, q: Cube) -> LocalNq {
    let g = lw.grid();
    let factors = chain_factors(lw);
    let range = g.leaf_range(q);
    let mut data = vec![0.0; g.num_leaves()];
    for x in range.clone() {
        data[x] = factors[x][q.level as usize..].iter().cloned().fold(0.0, f64::max);
    }
    let average = range.clone().map(|x| data[x] * data[x]).sum::<f64>() / range.len() as f64;
    LocalNq { cube: q, values: StepFunction::from_data(g, Shape::Scalar, data).expect("leaf count"), average }
}

pub fn local_nq(w: &MatrixWeight, grid: &Grid, q: Cube) -> Result<LocalNq, MaximalError> {
    Ok(local_nq_with(&LeafWeights::new(w, grid)?, q))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakTypeReport {
    /// `max_λ λ²|{M′f ≥ λ}| / ‖f‖²` over the attained values `λ`.
    pub constant: f64,
    /// The dimension `n`.
    pub bound: f64,
    pub worst_level: f64,
    pub levels: usize,
}

impl WeakTypeReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.constant <= self.bound * (1.0 + tol)
    }
}

/// Weak `(2,2)` ratio of the closed-form `M_W′`, exhaustive over its level sets.
///
/// Between consecutive attained values `λ²|{M′f > λ}|` increases in `λ`, so its
/// supremum is the left limit `v²|{M′f ≥ v}|` at some attained `v`.
pub fn weak_type_22(lw: &LeafWeights, f: &StepFunction) -> Result<WeakTypeReport, MaximalError> {
    let m = maximal_prime_p2(lw, f, false)?;
    let g = lw.grid();
    let h = g.leaf_measure();
    let norm = f.norm_sq();
    let mut vals: Vec<f64> = m.data().to_vec();
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut best = (0.0, 0.0);
    let mut levels = 0;
    let mut i = 0;
    while i < vals.len() {
        let v = vals[i];
        while i < vals.len() && vals[i] == v {
            i += 1;
        }
        levels += 1;
        let r = v * v * i as f64 * h;
        if r > best.0 {
            best = (r, v);
        }
    }
    let constant = if norm > 0.0 { best.0 / norm } else { 0.0 };
    Ok(WeakTypeReport { constant, bound: lw.n() as f64, worst_level: best.1, levels })
}

/// One leaf of the pointwise argument for `M_W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MwChainPoint {
    pub leaf: usize,
    /// `M_W f(x)`.
    pub value: f64,
    /// `R_x` and `m_R|W^{1/2}(x) W^{-1/2} f|`.
    pub r: Cube,
    pub a_r: f64,
    /// `‖W^{1/2}(x)(m_R W^{-1})^{1/2}‖`.
    pub factor_r: f64,
    /// `Y_R = m_R|(m_R W^{-1})^{-1/2} W^{-1/2} f|`, with `2^j ≤ Y_R < 2^{j+1}`.
    pub y_r: f64,
    pub j: i32,
    /// Maximal `S ⊇ R` with `Y_S ≥ 2^j`.
    pub s: Cube,
    pub y_s: f64,
    pub n_s: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChainViolations {
    /// `M_W f(x) ≤ 2 m_R|W^{1/2}(x) W^{-1/2} f|`.
    pub selection: usize,
    /// `m_R|W^{1/2}(x) W^{-1/2} f| ≤ ‖W^{1/2}(x)(m_R W^{-1})^{1/2}‖ Y_R`.
    pub factorization: usize,
    /// `Y_R ≤ 2 Y_S`.
    pub stratum: usize,
    /// `‖W^{1/2}(x)(m_R W^{-1})^{1/2}‖ ≤ N_S(x)`.
    pub local: usize,
    /// `M_W f(x) ≤ 8 · 2^{j+1} N_S(x)`.
    pub bound: usize,
}

impl ChainViolations {
    pub fn total(&self) -> usize {
        self.selection + self.factorization + self.stratum + self.local + self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MwChain {
    pub points: Vec<MwChainPoint>,
    /// `max_x M_W f(x) / (2^{j+1} N_S(x))`.
    pub achieved_constant: f64,
}

impl MwChain {
    pub fn violations(&self, tol: f64) -> ChainViolations {
        let mut v = ChainViolations::default();
        let le = |a: f64, b: f64| a <= b * (1.0 + tol);
        for p in &self.points {
            let top = 2f64.powi(p.j + 1);
            v.selection += !le(p.value, 2.0 * p.a_r) as usize;
            v.factorization += !le(p.a_r, p.factor_r * p.y_r) as usize;
            v.stratum += !le(p.y_r, 2.0 * p.y_s) as usize;
            v.local += !le(p.factor_r, p.n_s) as usize;
            v.bound += !le(p.value, 8.0 * top * p.n_s) as usize;
        }
        v
    }
}

/// Runs the selection of `R_x`, the dyadic stratification by `Y_R` and the
/// final pointwise bound on every leaf where `M_W f` is positive.
pub fn mw_proof_chain(lw: &LeafWeights, f: &StepFunction) -> Result<MwChain, MaximalError> {
    let g = lw.grid();
    let detail = maximal_mw_detail(lw, f)?;
    let y = prime_averages(lw, f, false)?;
    let factors = chain_factors(lw);
    let points: Vec<MwChainPoint> = detail
        .iter()
        .enumerate()
        .filter(|(_, d)| d.value > 0.0)
        .map(|(x, d)| {
            let r = d.cube;
            let y_r = y[g.id(r)];
            let mut j = y_r.log2().floor() as i32;
            while 2f64.powi(j) > y_r {
                j -= 1;
            }
            while 2f64.powi(j + 1) <= y_r {
                j += 1;
            }
            let s = (0..=r.level).map(|k| g.ancestor(r, k)).find(|c| y[g.id(*c)] >= 2f64.powi(j)).unwrap_or(r);
            let n_s = factors[x][s.level as usize..].iter().cloned().fold(0.0, f64::max);
            MwChainPoint { leaf: x, value: d.value, r, a_r: d.value, factor_r: factors[x][r.level as usize], y_r, j, s, y_s: y[g.id(s)], n_s }
        })
        .collect();
    let achieved_constant = points.iter().map(|p| p.value / (2f64.powi(p.j + 1) * p.n_s)).fold(0.0, f64::max);
    Ok(MwChain { points, achieved_constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(g: &Grid, n: usize) -> StepFunction {
        StepFunction::from_fn(g, Shape::Vector(n), |j, out| {
            for (k, o) in out.iter_mut().enumerate() {
                *o = ((j * 7 + k * 3) % 11) as f64 - 5.0;
            }
        })
    }

    #[test]
    fn identity_gives_dyadic_maximal_of_modulus() {
        let g = Grid::new(1, 5).unwrap();
        let f = ramp(&g, 2);
        let oracle = sequence_maximal(&g, &f.pointwise_norm().cube_means());
        let lw = LeafWeights::new(&MatrixWeight::identity(2), &g).unwrap();
        let a = maximal_mw_prime(&MatrixWeight::identity(2), &f, 2.0).unwrap();
        let b = maximal_mw_with(&lw, &f).unwrap();
        assert!(a.max_abs_diff(&oracle) < 1e-12);
        assert!(b.max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn nq_of_identity_is_one() {
        let g = Grid::new(2, 3).unwrap();
        let nq = local_nq(&MatrixWeight::identity(3), &g, g.child(g.root(), 2)).unwrap();
        assert!((nq.average - 1.0).abs() < 1e-12);
        let inside = g.leaf_range(g.child(g.root(), 2));
        for j in 0..g.num_leaves() {
            let want = if inside.contains(&j) { 1.0 } else { 0.0 };
            assert!((nq.values.data()[j] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn vector_shape_is_required() {
        let g = Grid::new(1, 3).unwrap();
        let lw = LeafWeights::new(&MatrixWeight::identity(2), &g).unwrap();
        let f = StepFunction::zeros(&g, Shape::Scalar);
        assert!(matches!(maximal_mw_with(&lw, &f), Err(MaximalError::InvalidInput(_))));
    }
}
