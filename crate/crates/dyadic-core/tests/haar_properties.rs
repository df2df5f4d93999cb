//! Exactness properties of the Haar system and the scalar Carleson tools.

use dyadic_core::covering::Q;
use dyadic_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_step(grid: &Grid, shape: Shape, seed: u64) -> StepFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StepFunction::from_fn(grid, shape, |_, out| {
        for v in out.iter_mut() {
            *v = rng.random_range(-2.0..2.0);
        }
    })
}

/// `∫ f h_I^ε` by summing over leaves, independent of the fast transform.
fn coefficient_by_leaf_sum(f: &StepFunction, c: Cube, eps: Signature) -> Vec<f64> {
    let g = f.grid();
    let mut acc = vec![0.0; f.width()];
    for j in g.leaf_range(c) {
        let h = haar_value(g, c, eps, j);
        for (a, v) in acc.iter_mut().zip(f.leaf(j)) {
            *a += g.leaf_measure() * h * v;
        }
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn parseval_closes_with_coarse_mean(d in 1usize..=2, depth in 1usize..=5, n in 1usize..=3, seed in any::<u64>()) {
        let depth = if d == 2 { depth.min(5) } else { depth * 2 };
        let g = Grid::new(d, depth).unwrap();
        let f = random_step(&g, Shape::Vector(n), seed);
        let e = haar_transform(&f);
        let lhs = e.energy();
        let rhs = f.norm_sq();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn round_trip_is_identity(d in 1usize..=2, depth in 1usize..=5, seed in any::<u64>()) {
        let g = Grid::new(d, depth).unwrap();
        let f = random_step(&g, Shape::Matrix(2), seed);
        let back = inverse_haar(&haar_transform(&f));
        prop_assert!(back.max_abs_diff(&f) <= 1e-12);
    }

    #[test]
    fn fast_transform_matches_leaf_sums(d in 1usize..=2, depth in 1usize..=4, seed in any::<u64>()) {
        let g = Grid::new(d, depth).unwrap();
        let f = random_step(&g, Shape::Vector(2), seed);
        let e = haar_transform(&f);
        for c in g.interior_cubes() {
            for eps in Signature::cancellative(d) {
                let oracle = coefficient_by_leaf_sum(&f, c, eps);
                for (a, b) in e.coeff(c, eps).iter().zip(&oracle) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn carleson_lemma_holds(depth in 1usize..=6, seed in any::<u64>()) {
        let g = Grid::new(1, depth).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda: Vec<f64> = (0..g.num_cubes()).map(|_| if rng.random_bool(0.5) { rng.random::<f64>() } else { 0.0 }).collect();
        let a: Vec<f64> = (0..g.num_cubes()).map(|_| rng.random::<f64>() * 3.0).collect();
        let sides = carleson_lemma(&g, &lambda, &a);
        prop_assert!(sides.holds(1e-12), "{sides:?}");
    }

    #[test]
    fn sequence_maximal_is_chain_max(d in 1usize..=2, seed in any::<u64>()) {
        let g = Grid::new(d, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..g.num_cubes()).map(|_| rng.random::<f64>()).collect();
        let s = sequence_maximal(&g, &a);
        for j in 0..g.num_leaves() {
            let chain: Vec<Cube> = g.chain(j).collect();
            prop_assert_eq!(chain.len(), 4);
            let m = chain.iter().map(|c| a[g.id(*c)]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(s.leaf(j)[0], m);
        }
    }

    #[test]
    fn signature_product_identity_on_leaves(d in 1usize..=3, a in 0u32..8, b in 0u32..8) {
        let (a, b) = (a % (1 << d), b % (1 << d));
        let g = Grid::new(d, 2).unwrap();
        let (ea, eb) = (Signature::new(a, d), Signature::new(b, d));
        let p = signature_product(ea, eb).unwrap();
        let root = g.root();
        let scale = g.measure_at(0).sqrt();
        for j in 0..g.num_leaves() {
            let child = g.ancestor(g.leaf(j), 1);
            let ci = g.child_index(child);
            let lhs = scale * (ea.sign_on_child(ci) / scale) * (eb.sign_on_child(ci) / scale);
            let rhs = p.sign * p.signature.sign_on_child(ci) / scale;
            prop_assert_eq!(lhs, rhs);
            if ea.is_cancellative() && eb.is_cancellative() && p.signature.is_cancellative() {
                let lhs2 = scale * haar_value(&g, root, ea, j) * haar_value(&g, root, eb, j);
                prop_assert_eq!(lhs2, p.sign * haar_value(&g, root, p.signature, j));
            }
        }
    }
}

#[test]
fn orthonormality_on_depth_three_grids() {
    for d in 1..=2 {
        let g = Grid::new(d, 3).unwrap();
        let funcs: Vec<(Cube, Signature)> = g
            .interior_cubes()
            .flat_map(|c| Signature::cancellative(d).map(move |e| (c, e)))
            .collect();
        for (i, &(c1, e1)) in funcs.iter().enumerate() {
            for &(c2, e2) in &funcs[i..] {
                let ip: f64 = (0..g.num_leaves())
                    .map(|j| haar_value(&g, c1, e1, j) * haar_value(&g, c2, e2, j))
                    .sum::<f64>()
                    * g.leaf_measure();
                let expected = if (c1, e1) == (c2, e2) { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-12, "{c1:?} {e1:?} {c2:?} {e2:?}: {ip}");
            }
        }
    }
}

#[test]
fn covering_lemma_on_random_intervals() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let denom: i128 = 1 << 40;
    for _ in 0..10_000 {
        let a = rng.random_range(0..denom - 1);
        let len = rng.random_range(1..=denom - a);
        let cube = RationalCube::new(vec![Q::new(a, denom)], Q::new(len, denom)).unwrap();
        let (t, c) = find_covering_cube(&cube).expect("covering cube exists");
        assert!((1..=2).contains(&t));
        assert!(c.as_rational().contains(&cube));
        assert!(c.side() <= Q::from_integer(6) * cube.side);
    }
}

#[test]
fn covering_lemma_in_the_plane() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let denom: i128 = 1 << 30;
    for _ in 0..2_000 {
        let len = rng.random_range(1..denom / 2);
        let lower: Vec<Q> = (0..2).map(|_| Q::new(rng.random_range(0..denom - len), denom)).collect();
        let cube = RationalCube::new(lower, Q::new(len, denom)).unwrap();
        let (t, c) = find_covering_cube(&cube).unwrap();
        assert!((1..=4).contains(&t));
        assert!(c.as_rational().contains(&cube));
        assert!(c.side() <= Q::from_integer(6) * cube.side);
    }
}
