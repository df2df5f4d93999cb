//! Shifted dyadic families and the one-third covering lemma.
//!
//! The grid `D^t` consists of the cubes `2^{-k}([0,1)^d + m + (-1)^k t)` where
//! `t` is a vector with entries in `{0, 1/3}` given by the bits of `t - 1`.
//! Because `3t` is an integer vector the family is nested for every `t`.
//! Coordinates are exact rationals.

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::DyadicError;

pub type Q = Ratio<i128>;

/// Axis-parallel cube `lower + [0, side)^d` with rational data.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalCube {
    pub lower: Vec<Q>,
    pub side: Q,
}

impl RationalCube {
    pub fn new(lower: Vec<Q>, side: Q) -> Result<Self, DyadicError> {
        if side <= Q::zero() {
            return Err(DyadicError::InvalidCube("side length must be positive".into()));
        }
        Ok(RationalCube { lower, side })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, other: &RationalCube) -> bool {
        self.lower.iter().zip(&other.lower).all(|(a, b)| a <= b && *b + other.side <= *a + self.side)
    }

    pub fn lower_f64(&self) -> Vec<f64> {
        self.lower.iter().map(|q| q.to_f64().unwrap()).collect()
    }

    pub fn side_f64(&self) -> f64 {
        self.side.to_f64().unwrap()
    }
}

/// A cube of `D^t` at level `k` (negative levels are cubes larger than the unit cube).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedCube {
    pub t: u32,
    pub level: i32,
    pub offset: Vec<i128>,
}

fn pow2(k: i32) -> Q {
    if k >= 0 {
        Q::from_integer(1i128 << k)
    } else {
        Q::new(1, 1i128 << (-k))
    }
}

impl ShiftedCube {
    pub fn side(&self) -> Q {
        pow2(-self.level)
    }

    /// Lower corner `2^{-k}(m + (-1)^k t)`.
    pub fn lower(&self) -> Vec<Q> {
        let pat = self.t - 1;
        let sign: i128 = if self.level.rem_euclid(2) == 0 { 1 } else { -1 };
        self.offset
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let b = ((pat >> i) & 1) as i128;
                (Q::from_integer(m) + Q::new(sign * b, 3)) * self.side()
            })
            .collect()
    }

    pub fn as_rational(&self) -> RationalCube {
        RationalCube { lower: self.lower(), side: self.side() }
    }

    /// The unique cube of `D^t` at `level` whose closure-open box contains `x`.
    pub fn containing(t: u32, level: i32, x: &[Q]) -> ShiftedCube {
        let pat = t - 1;
        let sign: i128 = if level.rem_euclid(2) == 0 { 1 } else { -1 };
        let scale = pow2(level);
        let offset = x
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let b = ((pat >> i) & 1) as i128;
                (*xi * scale - Q::new(sign * b, 3)).floor().to_integer()
            })
            .collect();
        ShiftedCube { t, level, offset }
    }
}

/// Finds `t` and `I_t ∈ D^t` with `I ⊆ I_t` and `ℓ(I_t) ≤ 6ℓ(I)`, preferring the smallest cube.
pub fn find_covering_cube(cube: &RationalCube) -> Result<(u32, ShiftedCube), DyadicError> {
    let d = cube.dim();
    let ell = cube.side;
    let six = Q::from_integer(6);
    let approx = -ell.to_f64().unwrap().log2();
    let lo = approx.floor() as i32 - 4;
    let hi = approx.ceil() as i32 + 1;
    // finest admissible level first
    for level in (lo..=hi).rev() {
        let side = pow2(-level);
        if side < ell || side > six * ell {
            continue;
        }
        for t in 1..=(1u32 << d) {
            let cand = ShiftedCube::containing(t, level, &cube.lower);
            if cand.as_rational().contains(cube) {
                return Ok((t, cand));
            }
        }
    }
    Err(DyadicError::InvalidCube("no shifted dyadic cube within factor 6".into()))
}

/// Cubes of `D^t` at `level` that meet `[0,1)^d`.
pub fn shifted_cubes_meeting_unit(d: usize, t: u32, level: u32) -> Vec<ShiftedCube> {
    let zero = vec![Q::zero(); d];
    let first = ShiftedCube::containing(t, level as i32, &zero);
    let almost_one = vec![Q::one() - Q::new(1, 1i128 << 100); d];
    let last = ShiftedCube::containing(t, level as i32, &almost_one);
    let ranges: Vec<(i128, i128)> = first.offset.iter().zip(&last.offset).map(|(&a, &b)| (a, b)).collect();
    let mut out = Vec::new();
    let mut idx: Vec<i128> = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(ShiftedCube { t, level: level as i32, offset: idx.clone() });
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            if idx[i] < ranges[i].1 {
                idx[i] += 1;
                break;
            }
            idx[i] = ranges[i].0;
            i += 1;
        }
    }
}

/// Measure of the overlap of `[a, a + s)^d`-type boxes given in floating point.
pub fn overlap_measure(lo1: &[f64], s1: f64, lo2: &[f64], s2: f64) -> f64 {
    lo1.iter()
        .zip(lo2)
        .map(|(&a, &b)| ((a + s1).min(b + s2) - a.max(b)).max(0.0))
        .product()
}
