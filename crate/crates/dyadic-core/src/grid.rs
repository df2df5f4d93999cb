//! Truncated dyadic grids and their cubes.
//!
//! Cubes are addressed by `(level, code)` where `code` is the Morton
//! interleaving of the integer offsets. With this layout the leaves below a
//! cube form one contiguous index range and the children of a cube are
//! `code * 2^d + j`.

use serde::{Deserialize, Serialize};

use crate::error::DyadicError;

/// Which member of the shifted family a grid belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shift {
    Standard,
    /// Index in `1..=2^d`; pattern `t - 1` read as bits, each bit worth 1/3.
    Shifted(u32),
}

impl Shift {
    /// Bit pattern of the shift vector (coordinate `i` is shifted by `bit_i / 3`).
    pub fn pattern(self) -> u32 {
        match self {
            Shift::Standard => 0,
            Shift::Shifted(t) => t - 1,
        }
    }
}

/// JSON form of a grid: `{"d":1,"L":8,"shift":"standard"}` or `"shift": 3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    #[serde(rename = "L")]
    pub depth: usize,
    #[serde(default = "default_shift")]
    pub shift: ShiftField,
}

/// The shift is either the string `"standard"` or an integer index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShiftField {
    Name(String),
    Index(u32),
}

fn default_shift() -> ShiftField {
    ShiftField::Name("standard".into())
}

impl GridSpec {
    pub fn standard(d: usize, depth: usize) -> Self {
        GridSpec { d, depth, shift: default_shift() }
    }

    pub fn build(&self) -> Result<Grid, DyadicError> {
        let shift = match &self.shift {
            ShiftField::Name(s) if s == "standard" => Shift::Standard,
            ShiftField::Name(s) => {
                return Err(DyadicError::InvalidGrid(format!("unknown shift '{s}'")))
            }
            ShiftField::Index(t) => Shift::Shifted(*t),
        };
        Grid::with_shift(self.d, self.depth, shift)
    }
}

/// A dyadic cube of a [`Grid`], identified by level and Morton code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cube {
    pub level: u32,
    pub code: u64,
}

/// Finite dyadic tree of depth `L` over the base cube `[0,1)^d + shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    d: usize,
    depth: usize,
    shift: Shift,
    level_start: Vec<usize>,
}

impl Grid {
    pub fn new(d: usize, depth: usize) -> Result<Self, DyadicError> {
        Self::with_shift(d, depth, Shift::Standard)
    }

    pub fn with_shift(d: usize, depth: usize, shift: Shift) -> Result<Self, DyadicError> {
        if d == 0 || depth == 0 {
            return Err(DyadicError::InvalidGrid("d and L must be positive".into()));
        }
        if d * depth > 62 {
            return Err(DyadicError::InvalidGrid(format!("d*L = {} exceeds 62", d * depth)));
        }
        if let Shift::Shifted(t) = shift {
            if t == 0 || t > (1u32 << d) {
                return Err(DyadicError::InvalidGrid(format!("shift index {t} outside 1..=2^d")));
            }
        }
        let mut level_start = Vec::with_capacity(depth + 2);
        let mut acc = 0usize;
        for k in 0..=depth {
            level_start.push(acc);
            acc += 1usize << (d * k);
        }
        level_start.push(acc);
        Ok(Grid { d, depth, shift, level_start })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn shift(&self) -> Shift {
        self.shift
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            d: self.d,
            depth: self.depth,
            shift: match self.shift {
                Shift::Standard => default_shift(),
                Shift::Shifted(t) => ShiftField::Index(t),
            },
        }
    }

    /// Number of children of a non-leaf cube.
    pub fn branching(&self) -> usize {
        1 << self.d
    }

    /// Number of cancellative signatures, `2^d - 1`.
    pub fn num_signatures(&self) -> usize {
        (1 << self.d) - 1
    }

    pub fn num_leaves(&self) -> usize {
        1 << (self.d * self.depth)
    }

    pub fn cubes_at_level(&self, k: usize) -> usize {
        1 << (self.d * k)
    }

    /// Cubes on levels `0..=L`.
    pub fn num_cubes(&self) -> usize {
        self.level_start[self.depth + 1]
    }

    /// Cubes on levels `0..L`, the ones carrying Haar coefficients.
    pub fn num_interior(&self) -> usize {
        self.level_start[self.depth]
    }

    pub fn leaf_measure(&self) -> f64 {
        self.measure_at(self.depth as u32)
    }

    pub fn measure_at(&self, level: u32) -> f64 {
        (2.0f64).powi(-((self.d as i32) * level as i32))
    }

    pub fn side_at(&self, level: u32) -> f64 {
        (2.0f64).powi(-(level as i32))
    }

    pub fn root(&self) -> Cube {
        Cube { level: 0, code: 0 }
    }

    pub fn id(&self, c: Cube) -> usize {
        self.level_start[c.level as usize] + c.code as usize
    }

    pub fn cube(&self, id: usize) -> Cube {
        let level = match self.level_start.binary_search(&id) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        Cube { level: level as u32, code: (id - self.level_start[level]) as u64 }
    }

    pub fn level_range(&self, k: usize) -> std::ops::Range<usize> {
        self.level_start[k]..self.level_start[k + 1]
    }

    pub fn leaf(&self, j: usize) -> Cube {
        Cube { level: self.depth as u32, code: j as u64 }
    }

    pub fn is_leaf(&self, c: Cube) -> bool {
        c.level as usize == self.depth
    }

    pub fn children(&self, c: Cube) -> impl Iterator<Item = Cube> + '_ {
        let b = self.branching() as u64;
        (0..b).map(move |j| Cube { level: c.level + 1, code: c.code * b + j })
    }

    pub fn child(&self, c: Cube, j: usize) -> Cube {
        Cube { level: c.level + 1, code: (c.code << self.d) | j as u64 }
    }

    pub fn parent(&self, c: Cube) -> Option<Cube> {
        if c.level == 0 {
            None
        } else {
            Some(Cube { level: c.level - 1, code: c.code >> self.d })
        }
    }

    /// Ancestor of `c` at level `k <= c.level`.
    pub fn ancestor(&self, c: Cube, k: u32) -> Cube {
        Cube { level: k, code: c.code >> (self.d as u32 * (c.level - k)) }
    }

    /// Which child of its parent `c` is (bit `i` set means the right half in coordinate `i`).
    pub fn child_index(&self, c: Cube) -> usize {
        (c.code & ((1u64 << self.d) - 1)) as usize
    }

    pub fn contains(&self, outer: Cube, inner: Cube) -> bool {
        inner.level >= outer.level && self.ancestor(inner, outer.level) == outer
    }

    /// Leaf index range below `c`.
    pub fn leaf_range(&self, c: Cube) -> std::ops::Range<usize> {
        let s = self.d * (self.depth - c.level as usize);
        ((c.code as usize) << s)..((c.code as usize + 1) << s)
    }

    /// All cubes of `D(c)` (including `c`), coarse to fine.
    pub fn descendants(&self, c: Cube) -> impl Iterator<Item = Cube> + '_ {
        (c.level as usize..=self.depth).flat_map(move |k| {
            let s = self.d * (k - c.level as usize);
            let lo = c.code << s;
            let hi = (c.code + 1) << s;
            (lo..hi).map(move |code| Cube { level: k as u32, code })
        })
    }

    /// Chain of cubes containing leaf `j`, root first.
    pub fn chain(&self, j: usize) -> impl Iterator<Item = Cube> + '_ {
        let leaf = self.leaf(j);
        (0..=self.depth as u32).map(move |k| self.ancestor(leaf, k))
    }

    pub fn all_cubes(&self) -> impl Iterator<Item = Cube> + '_ {
        (0..self.num_cubes()).map(move |id| self.cube(id))
    }

    /// Cubes carrying Haar coefficients (levels `< L`).
    pub fn interior_cubes(&self) -> impl Iterator<Item = Cube> + '_ {
        (0..self.num_interior()).map(move |id| self.cube(id))
    }

    /// Integer offsets `m` with `c = 2^{-k}([0,1)^d + m)` relative to the base cube.
    pub fn offsets(&self, c: Cube) -> Vec<u64> {
        let mut m = vec![0u64; self.d];
        for l in 0..c.level as usize {
            for (i, mi) in m.iter_mut().enumerate() {
                let bit = (c.code >> (l * self.d + i)) & 1;
                *mi |= bit << l;
            }
        }
        m
    }

    pub fn from_offsets(&self, level: u32, m: &[u64]) -> Cube {
        let mut code = 0u64;
        for l in 0..level as usize {
            for (i, mi) in m.iter().enumerate() {
                code |= ((mi >> l) & 1) << (l * self.d + i);
            }
        }
        Cube { level, code }
    }

    /// Shift vector of the base cube in absolute coordinates.
    pub fn origin(&self) -> Vec<f64> {
        let pat = self.shift.pattern();
        (0..self.d).map(|i| ((pat >> i) & 1) as f64 / 3.0).collect()
    }

    /// Lower corner and side length of `c` in absolute coordinates.
    pub fn geometry(&self, c: Cube) -> (Vec<f64>, f64) {
        let side = self.side_at(c.level);
        let origin = self.origin();
        let lower = self
            .offsets(c)
            .iter()
            .zip(origin)
            .map(|(&m, o)| o + m as f64 * side)
            .collect();
        (lower, side)
    }

    /// Center of leaf `j` in absolute coordinates.
    pub fn leaf_midpoint(&self, j: usize) -> Vec<f64> {
        let (lower, side) = self.geometry(self.leaf(j));
        lower.into_iter().map(|a| a + side / 2.0).collect()
    }

    /// Leaf containing an absolute point, if it lies in the base cube.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let origin = self.origin();
        let n = 1u64 << self.depth;
        let mut m = Vec::with_capacity(self.d);
        for (xi, oi) in x.iter().zip(origin) {
            let u = (xi - oi) * n as f64;
            if !(0.0..n as f64).contains(&u) {
                return None;
            }
            m.push(u.floor() as u64);
        }
        Some(self.from_offsets(self.depth as u32, &m).code as usize)
    }

    pub fn check_same(&self, other: &Grid) -> Result<(), DyadicError> {
        if self == other {
            Ok(())
        } else {
            Err(DyadicError::GridMismatch)
        }
    }
}
