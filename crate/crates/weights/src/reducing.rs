//! Reducing operators `V_I`, `V_I′`.
//!
//! At `p = 2` these are the square roots of `m_I W` and `m_I W⁻¹`. For other
//! `p` the gauge `ρ(e) = (m_I |W^{1/p} e|^p)^{1/p}` is sampled on a direction
//! net together with its gradients; the gradients lie on the boundary of the
//! polar body, and the minimum-volume ellipsoid around them is the polar of
//! the maximal inscribed ellipsoid. Scaling by the final leverage gives
//! `ρ(x_k) ≤ |V x_k|` on every net direction and `|V x| ≤ √n (1+η) ρ(x)`
//! everywhere.
//!
//! In the plane the net is refined where needed. Sublinearity bounds `ρ` on
//! each arc by the chord through its endpoints, so `|V x| / ρ(x)` has a
//! certified lower bound on the whole circle. Arcs whose bound falls below
//! `1 − ARC_FLOOR` are bisected, the exact gauge and gradient are added at the
//! new direction, and the ellipsoid is re-solved.

use dyadic_core::{Cube, Grid};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::ellipsoid::min_volume_enclosing;
use crate::error::WeightError;
use crate::linalg::{direction_net, spd_sqrt};
use crate::weight::{conjugate, LeafWeights, MatrixWeight};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducingOptions {
    pub eta: f64,
    pub directions: usize,
    pub max_iter: usize,
}

impl Default for ReducingOptions {
    fn default() -> Self {
        ReducingOptions { eta: 1e-3, directions: 64, max_iter: 50_000 }
    }
}

/// Arcs certified below `1 − ARC_FLOOR` are refined.
pub const ARC_FLOOR: f64 = 5e-4;
const MAX_ROUNDS: usize = 40;

/// Extremes of `|V x_k| / ρ(x_k)` over the (refined) direction net.
/// `arc_lower` bounds `|V x| / ρ(x)` from below on the whole sphere; it is
/// `None` for `n > 2` at `p ≠ 2`, where only the net is certified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub lower: f64,
    pub upper: f64,
    pub arc_lower: Option<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducingPair {
    pub cube: Cube,
    pub p: f64,
    pub v: DMatrix<f64>,
    pub v_prime: DMatrix<f64>,
    pub primal: Certificate,
    pub dual: Certificate,
}

impl ReducingPair {
    /// `‖V_I V_I′‖`.
    pub fn product_norm(&self) -> f64 {
        crate::linalg::op_norm(&(&self.v * &self.v_prime))
    }
}

/// Leaf sums of `|A x_k|^q` and of the gradients `|A x_k|^{q−2} A² x_k`.
#[derive(Clone, Debug)]
struct GaugeSums {
    values: Vec<f64>,
    grads: Vec<f64>,
}

impl GaugeSums {
    fn zeros(k: usize, n: usize) -> Self {
        GaugeSums { values: vec![0.0; k], grads: vec![0.0; k * n] }
    }

    fn leaf(a: &DMatrix<f64>, q: f64, dirs: &[DVector<f64>]) -> Self {
        let n = a.nrows();
        let mut s = GaugeSums::zeros(dirs.len(), n);
        for (k, x) in dirs.iter().enumerate() {
            let ax = a * x;
            let r = ax.norm();
            s.values[k] = r.powf(q);
            let g = a * &ax * r.powf(q - 2.0);
            s.grads[k * n..(k + 1) * n].copy_from_slice(g.as_slice());
        }
        s
    }

    fn add(&mut self, other: &GaugeSums) {
        self.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += b);
        self.grads.iter_mut().zip(&other.grads).for_each(|(a, b)| *a += b);
    }

    /// Gauge values and gradients for the average over `count` leaves.
    fn finish(&self, count: f64, q: f64, n: usize) -> (Vec<f64>, Vec<DVector<f64>>) {
        let rho: Vec<f64> = self.values.iter().map(|v| (v / count).powf(1.0 / q)).collect();
        let ys = rho
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let scale = r.powf(1.0 - q) / count;
                DVector::from_iterator(n, self.grads[k * n..(k + 1) * n].iter().map(|g| g * scale))
            })
            .collect();
        (rho, ys)
    }
}

fn certify(v: &DMatrix<f64>, rho: &[f64], dirs: &[DVector<f64>], arc_lower: Option<f64>, iterations: usize) -> Certificate {
    let mut lower = f64::INFINITY;
    let mut upper: f64 = 0.0;
    for (x, r) in dirs.iter().zip(rho) {
        let ratio = (v * x).norm() / r;
        lower = lower.min(ratio);
        upper = upper.max(ratio);
    }
    Certificate { lower, upper, arc_lower, iterations }
}

type M2 = [[f64; 2]; 2];

fn m2(a: &DMatrix<f64>) -> M2 {
    [[a[(0, 0)], a[(0, 1)]], [a[(1, 0)], a[(1, 1)]]]
}

fn mul2(a: &M2, x: [f64; 2]) -> [f64; 2] {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Lower bound of `|V x| / chord(x)` on the segment from `xa` to `xb`, where the
/// chord interpolates `ra`, `rb` linearly. The ratio of a root quadratic to a
/// linear function has one interior critical point, found in closed form.
fn arc_bound(v: &M2, xa: [f64; 2], xb: [f64; 2], ra: f64, rb: f64) -> f64 {
    let pa = mul2(v, xa);
    let qd = mul2(v, [xb[0] - xa[0], xb[1] - xa[1]]);
    let (a, b, c) = (dot2(qd, qd), dot2(pa, qd), dot2(pa, pa));
    let d = rb - ra;
    let ratio = |t: f64| (a * t * t + 2.0 * b * t + c).max(0.0).sqrt() / (ra + t * d);
    let mut m = ratio(0.0).min(ratio(1.0));
    let den = a * ra - b * d;
    if den != 0.0 {
        let t = (c * d - b * ra) / den;
        if t > 0.0 && t < 1.0 {
            m = m.min(ratio(t));
        }
    }
    m
}

/// Net point in the plane: angle in `[0, π)`, direction, gauge, gradient.
struct Node {
    angle: f64,
    x: [f64; 2],
    rho: f64,
    y: [f64; 2],
}

/// Arc bounds between consecutive nodes, the last arc closing onto `−x_0`.
fn arcs(v: &M2, nodes: &[Node]) -> Vec<f64> {
    let k = nodes.len();
    (0..k)
        .map(|i| {
            let a = &nodes[i];
            if i + 1 < k {
                arc_bound(v, a.x, nodes[i + 1].x, a.rho, nodes[i + 1].rho)
            } else {
                let x0 = nodes[0].x;
                arc_bound(v, a.x, [-x0[0], -x0[1]], a.rho, nodes[0].rho)
            }
        })
        .collect()
}

/// Gauge and gradient at one direction, averaged over the cube's leaf matrices
/// as in `GaugeSums::finish`.
fn exact_point(leaves: &[M2], q: f64, x: [f64; 2]) -> (f64, [f64; 2]) {
    let (mut val, mut g) = (0.0, [0.0; 2]);
    for a in leaves {
        let ax = mul2(a, x);
        let r = dot2(ax, ax).sqrt();
        val += r.powf(q);
        let aax = mul2(a, ax);
        let s = r.powf(q - 2.0);
        g[0] += aax[0] * s;
        g[1] += aax[1] * s;
    }
    let count = leaves.len() as f64;
    let rho = (val / count).powf(1.0 / q);
    let scale = rho.powf(1.0 - q) / count;
    (rho, [g[0] * scale, g[1] * scale])
}

/// John ellipsoid for one gauge; `leaves` holds `W_j^{±1/p}` over the cube.
fn john(sums: &GaugeSums, count: f64, q: f64, dirs: &[DVector<f64>], opts: &ReducingOptions, leaves: &[M2]) -> Result<(DMatrix<f64>, Certificate), WeightError> {
    let n = dirs[0].len();
    let (rho, ys) = sums.finish(count, q, n);
    if n != 2 {
        let e = min_volume_enclosing(&ys, opts.eta, opts.max_iter)?;
        let v = spd_sqrt(&e.shape);
        let cert = certify(&v, &rho, dirs, None, e.iterations);
        return Ok((v, cert));
    }
    let mut nodes: Vec<Node> = dirs
        .iter()
        .zip(rho)
        .zip(ys)
        .map(|((x, rho), y)| Node { angle: x[1].atan2(x[0]).rem_euclid(std::f64::consts::PI), x: [x[0], x[1]], rho, y: [y[0], y[1]] })
        .collect();
    nodes.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    let solve = |nodes: &[Node]| -> Result<(DMatrix<f64>, usize), WeightError> {
        let ys: Vec<DVector<f64>> = nodes.iter().map(|nd| DVector::from_row_slice(&nd.y)).collect();
        let e = min_volume_enclosing(&ys, opts.eta, opts.max_iter)?;
        Ok((spd_sqrt(&e.shape), e.iterations))
    };
    let (mut v, mut iterations) = solve(&nodes)?;
    for round in 0..=MAX_ROUNDS {
        let bounds = arcs(&m2(&v), &nodes);
        let failing: Vec<usize> = (0..nodes.len()).filter(|&i| bounds[i] < 1.0 - ARC_FLOOR).collect();
        if failing.is_empty() || round == MAX_ROUNDS {
            let arc_lower = bounds.iter().copied().fold(f64::INFINITY, f64::min);
            let xs: Vec<DVector<f64>> = nodes.iter().map(|nd| DVector::from_row_slice(&nd.x)).collect();
            let rs: Vec<f64> = nodes.iter().map(|nd| nd.rho).collect();
            return Ok((v.clone(), certify(&v, &rs, &xs, Some(arc_lower), iterations)));
        }
        let mut outside = false;
        let vv = m2(&v);
        for i in failing {
            let next = if i + 1 < nodes.len() { nodes[i + 1].angle } else { std::f64::consts::PI + nodes[0].angle };
            let angle = 0.5 * (nodes[i].angle + next);
            let x = [angle.cos(), angle.sin()];
            let (rho, y) = exact_point(leaves, q, x);
            let vx = mul2(&vv, x);
            outside |= dot2(vx, vx).sqrt() < rho;
            nodes.push(Node { angle, x, rho, y });
        }
        nodes.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        // the ellipsoid only moves when a new direction escapes it
        if outside {
            let (nv, it) = solve(&nodes)?;
            v = nv;
            iterations += it;
        }
    }
    unreachable!("the last round returns")
}

fn exact_pair(cube: Cube, p: f64, avg: &DMatrix<f64>, avg_inv: &DMatrix<f64>, dirs: &[DVector<f64>]) -> ReducingPair {
    let v = spd_sqrt(avg);
    let v_prime = spd_sqrt(avg_inv);
    let rho: Vec<f64> = dirs.iter().map(|x| x.dot(&(avg * x)).sqrt()).collect();
    let rho_d: Vec<f64> = dirs.iter().map(|x| x.dot(&(avg_inv * x)).sqrt()).collect();
    // the gauge is |V·| itself, so the sphere bound is exact
    let primal = certify(&v, &rho, dirs, Some(1.0), 0);
    let dual = certify(&v_prime, &rho_d, dirs, Some(1.0), 0);
    ReducingPair { cube, p, v, v_prime, primal, dual }
}

/// Leaf matrices in fixed-size form for the planar refinement; empty for `n ≠ 2`.
fn plane(mats: &[DMatrix<f64>]) -> Vec<M2> {
    if mats.first().is_some_and(|a| a.nrows() == 2) {
        mats.iter().map(m2).collect()
    } else {
        Vec::new()
    }
}

/// On a single leaf the gauges are `|W^{±1/p} e|`, so the reducing operators are exact.
fn leaf_pair(cube: Cube, p: f64, pos: &DMatrix<f64>, neg: &DMatrix<f64>, dirs: &[DVector<f64>]) -> ReducingPair {
    let rho: Vec<f64> = dirs.iter().map(|x| (pos * x).norm()).collect();
    let rho_d: Vec<f64> = dirs.iter().map(|x| (neg * x).norm()).collect();
    let primal = certify(pos, &rho, dirs, Some(1.0), 0);
    let dual = certify(neg, &rho_d, dirs, Some(1.0), 0);
    ReducingPair { cube, p, v: pos.clone(), v_prime: neg.clone(), primal, dual }
}

fn check_p(p: f64) -> Result<(), WeightError> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(WeightError::Exponent(p))
    }
}

/// `ρ_{W,I,p}(e)` by leaf quadrature.
pub fn gauge(w: &MatrixWeight, grid: &Grid, c: Cube, p: f64, e: &DVector<f64>) -> Result<f64, WeightError> {
    let r = grid.leaf_range(c);
    let count = r.len() as f64;
    let mut acc = 0.0;
    for j in r {
        acc += (w.leaf_power(grid, j, 1.0 / p)? * e).norm().powf(p);
    }
    Ok((acc / count).powf(1.0 / p))
}

/// `ρ*_{W,I,p}(e) = (m_I |W^{−1/p} e|^{p′})^{1/p′}` by leaf quadrature.
pub fn dual_gauge(w: &MatrixWeight, grid: &Grid, c: Cube, p: f64, e: &DVector<f64>) -> Result<f64, WeightError> {
    let q = conjugate(p);
    let r = grid.leaf_range(c);
    let count = r.len() as f64;
    let mut acc = 0.0;
    for j in r {
        acc += (w.leaf_power(grid, j, -1.0 / p)? * e).norm().powf(q);
    }
    Ok((acc / count).powf(1.0 / q))
}

/// Reducing pair for a single cube.
pub fn reducing_operators(w: &MatrixWeight, grid: &Grid, c: Cube, p: f64, opts: &ReducingOptions) -> Result<ReducingPair, WeightError> {
    check_p(p)?;
    w.validate()?;
    let n = w.n();
    let dirs = direction_net(n, opts.directions);
    if p == 2.0 {
        let a = w.cell_average(grid, c, 1.0)?;
        let b = w.cell_average(grid, c, -1.0)?;
        return Ok(exact_pair(c, p, &a, &b, &dirs));
    }
    let q = conjugate(p);
    if c.level as usize == grid.depth() {
        let j = grid.leaf_range(c).start;
        return Ok(leaf_pair(c, p, &w.leaf_power(grid, j, 1.0 / p)?, &w.leaf_power(grid, j, -1.0 / p)?, &dirs));
    }
    let mut s = GaugeSums::zeros(dirs.len(), n);
    let mut sd = GaugeSums::zeros(dirs.len(), n);
    let r = grid.leaf_range(c);
    let count = r.len() as f64;
    let mut pos = Vec::with_capacity(r.len());
    let mut neg = Vec::with_capacity(r.len());
    for j in r {
        pos.push(w.leaf_power(grid, j, 1.0 / p)?);
        neg.push(w.leaf_power(grid, j, -1.0 / p)?);
        s.add(&GaugeSums::leaf(pos.last().expect("pushed"), p, &dirs));
        sd.add(&GaugeSums::leaf(neg.last().expect("pushed"), q, &dirs));
    }
    let (pos, neg) = (plane(&pos), plane(&neg));
    let (v, primal) = john(&s, count, p, &dirs, opts, &pos)?;
    let (v_prime, dual) = john(&sd, count, q, &dirs, opts, &neg)?;
    Ok(ReducingPair { cube: c, p, v, v_prime, primal, dual })
}

/// Reducing pairs for every cube of a grid.
#[derive(Clone, Debug)]
pub struct ReducingTable {
    grid: Grid,
    p: f64,
    n: usize,
    pairs: Vec<ReducingPair>,
}

impl ReducingTable {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pair(&self, c: Cube) -> &ReducingPair {
        &self.pairs[self.grid.id(c)]
    }

    pub fn v(&self, c: Cube) -> &DMatrix<f64> {
        &self.pair(c).v
    }

    pub fn v_prime(&self, c: Cube) -> &DMatrix<f64> {
        &self.pair(c).v_prime
    }

    pub fn pairs(&self) -> &[ReducingPair] {
        &self.pairs
    }

    /// `sup_I ‖V_I V_I′‖^p` and a cube attaining it.
    pub fn characteristic(&self) -> (f64, Cube) {
        let mut best = (f64::NEG_INFINITY, self.grid.root());
        for pr in &self.pairs {
            let v = pr.product_norm().powf(self.p);
            if v > best.0 {
                best = (v, pr.cube);
            }
        }
        best
    }
}

/// Reducing pairs on every cube, aggregating leaf gauges bottom-up.
pub fn reducing_table(w: &MatrixWeight, grid: &Grid, p: f64, opts: &ReducingOptions) -> Result<ReducingTable, WeightError> {
    check_p(p)?;
    w.validate()?;
    let n = w.n();
    let dirs = direction_net(n, opts.directions);
    let cubes: Vec<Cube> = grid.all_cubes().collect();
    if p == 2.0 {
        let pairs: Result<Vec<_>, WeightError> = if w.has_closed_form(grid) {
            cubes
                .par_iter()
                .map(|&c| Ok(exact_pair(c, p, &w.cell_average(grid, c, 1.0)?, &w.cell_average(grid, c, -1.0)?, &dirs)))
                .collect()
        } else {
            let lw = LeafWeights::new(w, grid)?;
            let (a, b) = (lw.all_means(1.0), lw.all_means(-1.0));
            Ok(cubes.par_iter().map(|&c| exact_pair(c, p, &a[grid.id(c)], &b[grid.id(c)], &dirs)).collect())
        };
        return Ok(ReducingTable { grid: grid.clone(), p, n, pairs: pairs? });
    }
    let q = conjugate(p);
    let lw = LeafWeights::new(w, grid)?;
    let bf = grid.branching();
    let pos: Vec<DMatrix<f64>> = (0..grid.num_leaves()).into_par_iter().map(|j| lw.power(j, 1.0 / p)).collect();
    let neg: Vec<DMatrix<f64>> = (0..grid.num_leaves()).into_par_iter().map(|j| lw.power(j, -1.0 / p)).collect();
    let mut level: Vec<(GaugeSums, GaugeSums)> = (0..grid.num_leaves())
        .into_par_iter()
        .map(|j| (GaugeSums::leaf(&pos[j], p, &dirs), GaugeSums::leaf(&neg[j], q, &dirs)))
        .collect();
    let (pos2, neg2) = (plane(&pos), plane(&neg));
    let mut pairs: Vec<Option<ReducingPair>> = vec![None; grid.num_cubes()];
    for k in (0..=grid.depth()).rev() {
        let count = (bf as f64).powi((grid.depth() - k) as i32);
        let start = grid.level_range(k).start;
        let done: Result<Vec<ReducingPair>, WeightError> = level
            .par_iter()
            .enumerate()
            .map(|(local, (s, sd))| {
                let c = grid.cube(start + local);
                let r = grid.leaf_range(c);
                if k == grid.depth() {
                    return Ok(leaf_pair(c, p, &pos[r.start], &neg[r.start], &dirs));
                }
                let (v, primal) = john(s, count, p, &dirs, opts, if pos2.is_empty() { &[] } else { &pos2[r.clone()] })?;
                let (v_prime, dual) = john(sd, count, q, &dirs, opts, if neg2.is_empty() { &[] } else { &neg2[r] })?;
                Ok(ReducingPair { cube: c, p, v, v_prime, primal, dual })
            })
            .collect();
        for (local, pr) in done?.into_iter().enumerate() {
            pairs[start + local] = Some(pr);
        }
        if k > 0 {
            level = level
                .par_chunks(bf)
                .map(|ch| {
                    let mut s = ch[0].0.clone();
                    let mut sd = ch[0].1.clone();
                    for (a, b) in &ch[1..] {
                        s.add(a);
                        sd.add(b);
                    }
                    (s, sd)
                })
                .collect();
        }
    }
    Ok(ReducingTable { grid: grid.clone(), p, n, pairs: pairs.into_iter().map(|x| x.expect("every level visited")).collect() })
}
