//! Sparse families and `S f = Σ_{I ∈ G} m_I f χ_I`.

use dyadic_core::{Cube, Grid, Shape, StepFunction};
use operators::{LinearOperator, OperatorError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use weights::linalg::{op_norm, spd_sqrt};
use weights::LeafWeights;

use crate::error::MaximalError;
use crate::maximal::{check_vector, prime_averages};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SparseCertificate {
    /// `max_{I ∈ G} |I|^{-1} Σ_{J ∈ ch_G(I)} |J|`.
    pub max_child_fraction: f64,
    /// `min_{I ∈ G} |E_I| / |I|`.
    pub min_exceptional_fraction: f64,
    pub exceptional_disjoint: bool,
    pub sparse: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseCube {
    pub level: u32,
    pub offsets: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct SparseFamily {
    grid: Grid,
    member: Vec<bool>,
    certificate: SparseCertificate,
}

impl SparseFamily {
    pub fn new(grid: &Grid, cubes: &[Cube]) -> Result<Self, MaximalError> {
        let mut member = vec![false; grid.num_cubes()];
        for c in cubes {
            if c.level as usize > grid.depth() || c.code >= grid.cubes_at_level(c.level as usize) as u64 {
                return Err(MaximalError::InvalidInput(format!("{c:?} is not a cube of the grid")));
            }
            member[grid.id(*c)] = true;
        }
        let mut fam = SparseFamily { grid: grid.clone(), member, certificate: SparseCertificate { max_child_fraction: 0.0, min_exceptional_fraction: 1.0, exceptional_disjoint: true, sparse: true } };
        fam.certificate = fam.compute_certificate();
        Ok(fam)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn contains(&self, c: Cube) -> bool {
        self.member[self.grid.id(c)]
    }

    /// Members in cube-id order.
    pub fn cubes(&self) -> Vec<Cube> {
        self.member.iter().enumerate().filter(|(_, m)| **m).map(|(id, _)| self.grid.cube(id)).collect()
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Maximal members strictly inside `c`.
    pub fn children_in_family(&self, c: Cube) -> Vec<Cube> {
        let g = &self.grid;
        let mut out = Vec::new();
        let mut stack: Vec<Cube> = if g.is_leaf(c) { Vec::new() } else { g.children(c).collect() };
        while let Some(q) = stack.pop() {
            if self.contains(q) {
                out.push(q);
            } else if !g.is_leaf(q) {
                stack.extend(g.children(q));
            }
        }
        out.sort_by_key(|q| g.id(*q));
        out
    }

    /// `|E_I| = |I \ ∪ ch_G(I)|`.
    pub fn exceptional_measure(&self, c: Cube) -> f64 {
        self.grid.measure_at(c.level) - self.children_in_family(c).iter().map(|q| self.grid.measure_at(q.level)).sum::<f64>()
    }

    pub fn certificate(&self) -> SparseCertificate {
        self.certificate
    }

    fn compute_certificate(&self) -> SparseCertificate {
        let g = &self.grid;
        let mut max_child_fraction: f64 = 0.0;
        let mut min_exceptional_fraction: f64 = 1.0;
        for c in self.cubes() {
            let total = g.measure_at(c.level);
            let covered: f64 = self.children_in_family(c).iter().map(|q| g.measure_at(q.level)).sum();
            max_child_fraction = max_child_fraction.max(covered / total);
            min_exceptional_fraction = min_exceptional_fraction.min(self.exceptional_measure(c) / total);
        }
        let exceptional_disjoint = self.exceptional_overlap() <= 1;
        let sparse = max_child_fraction <= 0.5 && min_exceptional_fraction >= 0.5 && exceptional_disjoint;
        SparseCertificate { max_child_fraction, min_exceptional_fraction, exceptional_disjoint, sparse }
    }

    /// Largest number of sets `E_I` sharing a leaf.
    pub fn exceptional_overlap(&self) -> usize {
        let g = &self.grid;
        let mut hits = vec![0usize; g.num_leaves()];
        for c in self.cubes() {
            let ch = self.children_in_family(c);
            for x in g.leaf_range(c) {
                if !ch.iter().any(|q| g.leaf_range(*q).contains(&x)) {
                    hits[x] += 1;
                }
            }
        }
        hits.into_iter().max().unwrap_or(0)
    }

    pub fn to_cubes(&self) -> Vec<SparseCube> {
        self.cubes().into_iter().map(|c| SparseCube { level: c.level, offsets: self.grid.offsets(c) }).collect()
    }

    /// Deepest member containing each leaf; the leaf lies in `E_I` for that `I` only.
    fn owner(&self) -> Vec<Option<Cube>> {
        let g = &self.grid;
        (0..g.num_leaves()).map(|x| g.chain(x).filter(|c| self.contains(*c)).last()).collect()
    }
}

/// Random sparse family containing the root.
///
/// Each member keeps every child independently with probability `density`,
/// at most `2^{d-1}` of them, and each kept child may sink to a random
/// descendant.
pub fn sparse_generate(grid: &Grid, seed: u64, density: f64) -> Result<SparseFamily, MaximalError> {
    if !(density > 0.0 && density <= 0.5) {
        return Err(MaximalError::InvalidInput(format!("density {density} outside (0, 1/2]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots = grid.branching() / 2;
    let mut cubes = vec![grid.root()];
    let mut stack = vec![grid.root()];
    while let Some(c) = stack.pop() {
        if grid.is_leaf(c) {
            continue;
        }
        let mut kept: Vec<Cube> = grid.children(c).filter(|_| rng.random_bool(density)).collect();
        kept.shuffle(&mut rng);
        kept.truncate(slots);
        for mut q in kept {
            while !grid.is_leaf(q) && rng.random_bool(0.25) {
                let k = rng.random_range(0..grid.branching());
                q = grid.child(q, k);
            }
            cubes.push(q);
            stack.push(q);
        }
    }
    SparseFamily::new(grid, &cubes)
}

fn require_sparse(fam: &SparseFamily) -> Result<(), MaximalError> {
    let c = fam.certificate();
    if !c.sparse {
        return Err(MaximalError::NotSparse(format!(
            "child fraction {:.4}, exceptional fraction {:.4}, disjoint {}",
            c.max_child_fraction, c.min_exceptional_fraction, c.exceptional_disjoint
        )));
    }
    Ok(())
}

fn apply_unchecked(fam: &SparseFamily, f: &StepFunction) -> StepFunction {
    let g = &fam.grid;
    let w = f.width();
    let means = f.cube_means();
    StepFunction::from_fn(g, f.shape(), |x, out| {
        for c in g.chain(x).filter(|c| fam.contains(*c)) {
            let id = g.id(c);
            for (o, m) in out.iter_mut().zip(&means[id * w..(id + 1) * w]) {
                *o += m;
            }
        }
    })
}

pub fn sparse_apply(fam: &SparseFamily, f: &StepFunction) -> Result<StepFunction, MaximalError> {
    require_sparse(fam)?;
    fam.grid.check_same(f.grid())?;
    Ok(apply_unchecked(fam, f))
}

/// `S` acting on `R^n`-valued functions.
pub struct SparseOperator {
    family: SparseFamily,
    n: usize,
}

impl SparseOperator {
    pub fn new(family: SparseFamily, n: usize) -> Result<Self, MaximalError> {
        require_sparse(&family)?;
        Ok(SparseOperator { family, n })
    }
}

impl LinearOperator for SparseOperator {
    fn grid(&self) -> &Grid {
        &self.family.grid
    }
    fn n(&self) -> usize {
        self.n
    }
    fn apply(&self, f: &StepFunction) -> Result<StepFunction, OperatorError> {
        self.family.grid.check_same(f.grid())?;
        if f.shape() != Shape::Vector(self.n) {
            return Err(OperatorError::Shape(format!("expected a vector function in R^{}", self.n)));
        }
        Ok(apply_unchecked(&self.family, f))
    }
}

/// Terms of the chain bounding `|⟨W^{1/2} S (W^{-1/2} f), g⟩|` at `p = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SparseChain {
    /// `|⟨W^{1/2} S(W^{-1/2} f), g⟩|`.
    pub pairing: f64,
    /// `|⟨S(W^{-1/2} f), W^{1/2} g⟩|`.
    pub moved: f64,
    /// `Σ_G |I| |⟨m_I(W^{-1/2} f), m_I(W^{1/2} g)⟩|`.
    pub termwise: f64,
    /// `A₂^{1/2} Σ_G |I| Y_I Z_I` with `Y_I = m_I|(m_I W^{-1})^{-1/2} W^{-1/2} f|`
    /// and `Z_I = m_I|(m_I W)^{-1/2} W^{1/2} g|`.
    pub reduced: f64,
    /// `2 A₂^{1/2} Σ_G |E_I| Y_I Z_I`.
    pub exceptional: f64,
    /// `2 A₂^{1/2} Σ_G ∫_{E_I} M_W′f · M_{W^{-1}}′g`.
    pub maximal: f64,
    /// `2 A₂^{1/2} ‖M_W′f‖ ‖M_{W^{-1}}′g‖`.
    pub cauchy_schwarz: f64,
    /// `sup_I ‖(m_I W)^{1/2}(m_I W^{-1})^{1/2}‖²` over the grid.
    pub a2: f64,
}

impl SparseChain {
    /// `(name, left, right)` for every link; the first is an identity.
    pub fn links(&self) -> [(&'static str, f64, f64); 6] {
        [
            ("adjoint", self.pairing, self.moved),
            ("expand", self.moved, self.termwise),
            ("reduce", self.termwise, self.reduced),
            ("sparse", self.reduced, self.exceptional),
            ("maximal", self.exceptional, self.maximal),
            ("cauchy-schwarz", self.maximal, self.cauchy_schwarz),
        ]
    }

    pub fn holds(&self, tol: f64) -> bool {
        let scale = self.cauchy_schwarz.max(1e-300);
        self.links().iter().enumerate().all(|(k, (_, a, b))| if k == 0 { (a - b).abs() <= tol * scale } else { *a <= *b + tol * scale })
    }
}

pub fn sparse_chain(fam: &SparseFamily, lw: &LeafWeights, f: &StepFunction, g: &StepFunction) -> Result<SparseChain, MaximalError> {
    require_sparse(fam)?;
    check_vector(lw, f)?;
    check_vector(lw, g)?;
    fam.grid.check_same(lw.grid())?;
    let grid = &fam.grid;
    let n = lw.n();
    let h = grid.leaf_measure();
    let wf = lw.power_step(-0.5).apply(f)?;
    let wg = lw.power_step(0.5).apply(g)?;

    let sf = apply_unchecked(fam, &wf);
    let pairing = lw.power_step(0.5).apply(&sf)?.inner(g)?.abs();
    let moved = sf.inner(&wg)?.abs();

    let mf = wf.cube_means();
    let mg = wg.cube_means();
    let y = prime_averages(lw, f, false)?;
    let z = prime_averages(lw, g, true)?;
    let means = lw.all_means(1.0);
    let means_inv = lw.all_means(-1.0);
    let a2 = (0..grid.num_cubes()).map(|id| op_norm(&(spd_sqrt(&means[id]) * spd_sqrt(&means_inv[id]))).powi(2)).fold(0.0, f64::max);
    let root = a2.sqrt();

    let mut termwise = 0.0;
    let mut reduced = 0.0;
    let mut exceptional = 0.0;
    for c in fam.cubes() {
        let id = grid.id(c);
        let dot: f64 = (0..n).map(|k| mf[id * n + k] * mg[id * n + k]).sum();
        termwise += grid.measure_at(c.level) * dot.abs();
        reduced += root * grid.measure_at(c.level) * y[id] * z[id];
        exceptional += 2.0 * root * fam.exceptional_measure(c) * y[id] * z[id];
    }

    let m1 = dyadic_core::sequence_maximal(grid, &y);
    let m2 = dyadic_core::sequence_maximal(grid, &z);
    let owner = fam.owner();
    let on_e: f64 = (0..grid.num_leaves()).filter(|x| owner[*x].is_some()).map(|x| m1.data()[x] * m2.data()[x]).sum::<f64>() * h;
    let maximal = 2.0 * root * on_e;
    let cauchy_schwarz = 2.0 * root * m1.norm_sq().sqrt() * m2.norm_sq().sqrt();
    Ok(SparseChain { pairing, moved, termwise, reduced, exceptional, maximal, cauchy_schwarz, a2 })
}
