use carleson_bmo::*;
use dyadic_core::{haar_transform, Cube, Grid, Shape, Signature, StepFunction};
use nalgebra::DMatrix;
use operators::{weighted_operator_norm, BigPi, MatrixSequence, MatrixSymbol, NormOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weights::{dual_weight, reducing_table, LeafWeights, MatrixWeight, ReducingOptions};

fn opts() -> ReducingOptions {
    ReducingOptions::default()
}

fn random_symbol(g: &Grid, n: usize, seed: u64) -> MatrixSymbol {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = StepFunction::from_fn(g, Shape::Matrix(n), |_, out| out.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0)));
    MatrixSymbol::new(f).unwrap()
}

fn scalar_symbol(g: &Grid, seed: u64) -> (StepFunction, MatrixSymbol) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = StepFunction::from_fn(g, Shape::Scalar, |_, o| o[0] = rng.random_range(-2.0..2.0));
    let s = MatrixSymbol::scalar_times(&b, &DMatrix::identity(2, 2)).unwrap();
    (b, s)
}

/// `sup_J |J|^{-1} Σ_{I ⊆ J} |b_I|²` by direct enumeration of pairs.
fn naive_scalar_carleson(g: &Grid, b: &StepFunction) -> f64 {
    let e = haar_transform(b);
    let mut best: f64 = 0.0;
    for j in g.all_cubes() {
        let mut s = 0.0;
        for i in g.interior_cubes() {
            if g.contains(j, i) {
                for eps in Signature::cancellative(g.d()) {
                    s += e.coeff(i, eps)[0].powi(2);
                }
            }
        }
        best = best.max(s / g.measure_at(j.level));
    }
    best
}

/// `sup_I |I|^{-1} ∫_I |b − m_I b|²` by direct enumeration.
fn naive_bmo(g: &Grid, b: &StepFunction) -> f64 {
    let mut best: f64 = 0.0;
    for c in g.all_cubes() {
        let r = g.leaf_range(c);
        let m: f64 = r.clone().map(|j| b.leaf(j)[0]).sum::<f64>() / r.len() as f64;
        let v: f64 = r.clone().map(|j| (b.leaf(j)[0] - m).powi(2)).sum::<f64>() / r.len() as f64;
        best = best.max(v);
    }
    best
}

#[test]
fn scalar_symbol_carleson_norm_is_dyadic_bmo() {
    for (d, depth) in [(1, 7), (2, 3)] {
        let g = Grid::new(d, depth).unwrap();
        let (b, s) = scalar_symbol(&g, 9 + d as u64);
        let rep = carleson_b_sup(s.coefficients(), &MatrixWeight::identity(2), 2.0).unwrap();
        let oracle = naive_scalar_carleson(&g, &b);
        assert!((rep.norm - oracle).abs() <= 1e-12 * oracle, "{} vs {oracle}", rep.norm);
        // the weighted sum collapses to the oscillation of b over the same cube
        let bmo = bmo_norm(&s, &MatrixWeight::identity(2), 2.0, BmoVariant::Primal).unwrap();
        assert!((bmo.norm - naive_bmo(&g, &b)).abs() <= 1e-12 * bmo.norm);
    }
}

/// Exact leaf averages of `log x` times the swap matrix.
fn log_swap(g: &Grid) -> MatrixSymbol {
    let h = g.leaf_measure();
    let prim = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() - x };
    let b = StepFunction::from_fn(g, Shape::Scalar, |j, o| {
        let (a, c) = (j as f64 * h, (j + 1) as f64 * h);
        o[0] = (prim(c) - prim(a)) / h;
    });
    MatrixSymbol::scalar_times(&b, &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
}

#[test]
fn log_swap_symbol_is_not_carleson_for_the_power_weight() {
    let w = MatrixWeight::counterexample(0.5);
    let values: Vec<f64> = [4, 6, 8, 10, 12]
        .iter()
        .map(|&depth| {
            let g = Grid::new(1, depth).unwrap();
            carleson_b_sup(log_swap(&g).coefficients(), &w, 2.0).unwrap().norm
        })
        .collect();
    assert!(values.windows(2).all(|v| v[1] > 1.5 * v[0]), "{values:?}");
    // unweighted, the same symbol has bounded Carleson norm
    let flat: Vec<f64> = [6, 12]
        .iter()
        .map(|&depth| {
            let g = Grid::new(1, depth).unwrap();
            carleson_b_sup(log_swap(&g).coefficients(), &MatrixWeight::identity(2), 2.0).unwrap().norm
        })
        .collect();
    assert!(flat[1] < 1.1 * flat[0], "{flat:?}");
}

#[test]
fn condition_c_is_dominated_by_the_big_pi_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let no = NormOptions::default();
    let mut worst: f64 = 0.0;
    for k in 0..200u64 {
        let (d, depth) = if k % 4 == 3 { (2, rng.random_range(1..=3)) } else { (1, rng.random_range(2..=6)) };
        let g = Grid::new(d, depth).unwrap();
        let w = MatrixWeight::RandomSpd { seed: k, cond: rng.random_range(1.0..200.0), n: 2 };
        let lw = LeafWeights::new(&w, &g).unwrap();
        let table = reducing_table(&lw.to_weight(), &g, 2.0, &opts()).unwrap();
        let a = MatrixSequence::random(&g, 2, rng.random_range(0.1..3.0), 1000 + k);
        let cc = carleson_c_from_table(&a, &table).unwrap().constant().norm;
        let pi = weighted_operator_norm(&BigPi::new(&a, &table, &lw).unwrap(), None, 2.0, &no).unwrap().value;
        worst = worst.max(cc / (pi * pi));
        assert!(cc <= pi * pi * (1.0 + 1e-9), "instance {k}: C_c = {cc}, ‖Π‖² = {}", pi * pi);
    }
    assert!(worst > 0.05, "the inequality should not be vacuous: {worst}");
}

#[test]
fn condition_c_matches_a_direct_generalized_eigenvalue() {
    let g = Grid::new(1, 4).unwrap();
    let w = MatrixWeight::RandomSpd { seed: 3, cond: 30.0, n: 2 };
    let table = reducing_table(&w, &g, 2.0, &opts()).unwrap();
    let a = MatrixSequence::random(&g, 2, 1.0, 5);
    let c = carleson_c_from_table(&a, &table).unwrap();
    let eps = Signature::new(0, 1);
    for (form, rep) in [(false, c.primal.unwrap()), (true, c.dual.unwrap())] {
        for j in g.all_cubes() {
            let mut s = DMatrix::zeros(2, 2);
            for i in g.interior_cubes().filter(|i| g.contains(j, *i)) {
                let ai = a.get(i, eps);
                s += if form {
                    &ai * table.v_prime(i) * table.v_prime(i) * ai.transpose()
                } else {
                    ai.transpose() * table.v(i) * table.v(i) * &ai
                };
            }
            let v = if form { table.v_prime(j) } else { table.v(j) };
            // smallest C with s/|J| ≤ C v², from the eigenvalues of v^{-2} s
            let m = v.clone().try_inverse().unwrap().pow(2) * &s / g.measure_at(j.level);
            let lam = m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::MIN, f64::max);
            assert!((rep.per_cube[g.id(j)] - lam).abs() <= 1e-10 * lam.max(1.0));
        }
    }
}

#[test]
fn identity_weight_satisfies_both_comparisons() {
    let g = Grid::new(1, 6).unwrap();
    for seed in 0..20 {
        let a = MatrixSequence::random(&g, 2, 1.0, seed);
        let table = reducing_table(&MatrixWeight::identity(2), &g, 2.0, &opts()).unwrap();
        let r = carleson_report(&a, &table).unwrap();
        assert!(r.c.constant().norm <= 2.0 * r.b.norm * (1.0 + 1e-12));
        assert!(r.b.norm <= 2.0 * r.c.constant().norm * (1.0 + 1e-12));
    }
}

/// Scalar weight with mass `M` on the first leaf and `A_I = |I|^{1/2} Id` on its ancestors.
fn concentrated(depth: usize) -> (Grid, MatrixSequence, MatrixWeight) {
    let g = Grid::new(1, depth).unwrap();
    let m = 100.0 * (1u64 << depth) as f64;
    let values: Vec<f64> = (0..g.num_leaves()).flat_map(|j| if j == 0 { [m, 0.0, 0.0, m] } else { [1.0, 0.0, 0.0, 1.0] }).collect();
    let w = MatrixWeight::Leaf { n: 2, values };
    let mut a = MatrixSequence::zeros(&g, 2);
    for k in 0..depth as u32 {
        let c = g.ancestor(g.leaf(0), k);
        a.set(c, Signature::new(0, 1), &(DMatrix::identity(2, 2) * g.measure_at(k).sqrt()));
    }
    (g, a, w)
}

#[test]
fn condition_c_is_not_controlled_by_n_times_condition_b() {
    let mut ratios = Vec::new();
    for depth in [6, 8, 10, 12] {
        let (g, a, w) = concentrated(depth);
        let table = reducing_table(&w, &g, 2.0, &opts()).unwrap();
        let r = carleson_report(&a, &table).unwrap();
        assert!(r.b.norm <= 2.0 + 1e-12);
        ratios.push(r.c.constant().norm / (2.0 * r.b.norm));
    }
    assert!(ratios[0] > 1.0, "{ratios:?}");
    assert!(ratios.windows(2).all(|r| r[1] > r[0]), "{ratios:?}");
}

#[test]
fn dual_variant_is_the_primal_of_the_dual_weight() {
    let g = Grid::new(1, 6).unwrap();
    let b = random_symbol(&g, 2, 17);
    let bt = MatrixSymbol::new(b.function().transpose()).unwrap();
    for w in [MatrixWeight::RandomSpd { seed: 8, cond: 40.0, n: 2 }, MatrixWeight::Rotated { alphas: vec![0.3, -0.4], theta: 0.7 }] {
        for p in [1.5, 2.0, 3.0] {
            let dual = bmo_norm(&b, &w, p, BmoVariant::Dual).unwrap();
            let (u, q) = dual_weight(&w, p).unwrap();
            let primal = bmo_norm(&bt, &u, q, BmoVariant::Primal).unwrap();
            let gap = dual.per_cube.iter().zip(&primal.per_cube).map(|(x, y)| (x - y).abs() / x.max(1e-300)).fold(0.0, f64::max);
            assert!(gap < 1e-9, "p = {p}: relative gap {gap}");
            let restricted = bmo_norm(&b, &w, p, BmoVariant::DyadicGridRestricted).unwrap();
            let expected = if p < 2.0 { &dual } else { &bmo_norm(&b, &w, p, BmoVariant::Primal).unwrap() };
            assert_eq!(restricted.norm, expected.norm);
        }
    }
}

#[test]
fn mean_oscillation_is_within_the_infimum_lemma() {
    let g = Grid::new(1, 7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (k, p) in [2.0, 3.0, 1.5].into_iter().enumerate() {
        let w = MatrixWeight::Rotated { alphas: vec![0.4, -0.3], theta: 0.3 + k as f64 };
        let lw = LeafWeights::new(&w, &g).unwrap();
        let table = reducing_table(&lw.to_weight(), &g, p, &opts()).unwrap();
        let ap = table.characteristic().0;
        let b = random_symbol(&g, 2, 40 + k as u64);
        for c in g.all_cubes().filter(|c| c.level <= 4) {
            let mean = b.mean(c);
            let osc = oscillation_about(&b, &lw, &table, c, &mean).unwrap();
            let mut inf = osc;
            for _ in 0..40 {
                let shift = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-0.5..0.5));
                inf = inf.min(oscillation_about(&b, &lw, &table, c, &(&mean + shift)).unwrap());
            }
            assert!(osc.powf(1.0 / p) <= (1.0 + ap.powf(1.0 / p)) * inf.powf(1.0 / p) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn shifted_standard_family_reproduces_the_dyadic_norm() {
    let g = Grid::new(1, 6).unwrap();
    let w = MatrixWeight::RandomSpd { seed: 2, cond: 20.0, n: 2 };
    let lw = LeafWeights::new(&w, &g).unwrap();
    let b = random_symbol(&g, 2, 3);
    let dy = bmo_norm(&b, &w, 2.0, BmoVariant::Primal).unwrap();
    let sh = shifted_grid_bmo(&b, &lw, 1).unwrap();
    assert_eq!(sh.cubes, g.num_cubes());
    assert!((dy.norm - sh.norm).abs() <= 1e-10 * dy.norm);
}

#[test]
fn arbitrary_cubes_are_controlled_by_the_shifted_families() {
    for d in [1usize, 2] {
        let depth = if d == 1 { 8 } else { 4 };
        let g = Grid::new(d, depth).unwrap();
        let w = MatrixWeight::RandomSpd { seed: 31 + d as u64, cond: 10.0, n: 2 };
        let lw = LeafWeights::new(&w, &g).unwrap();
        let b = random_symbol(&g, 2, 5);
        let fams: Vec<ShiftedBmo> = (1..=(1u32 << d)).map(|t| shifted_grid_bmo(&b, &lw, t).unwrap()).collect();
        let best = fams.iter().map(|f| f.norm).fold(0.0, f64::max);
        let a_fam = fams.iter().map(|f| f.a2).fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut worst: f64 = 0.0;
        let trials = if d == 1 { 1000 } else { 200 };
        for _ in 0..trials {
            let side = rng.random_range(0.01..0.5);
            let lower: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0 - side)).collect();
            let r = cube_oscillation(&b, &lw, &lower, side).unwrap();
            let c = comparability_constant(2, d, a_fam.max(r.a2));
            assert!(r.oscillation <= c * best);
            worst = worst.max(r.oscillation / best);
        }
        assert!(worst > 0.0);
    }
}

#[test]
fn stopping_generations_decay_for_a_strong_power_weight() {
    let g = Grid::new(1, 14).unwrap();
    let table = reducing_table(&MatrixWeight::counterexample(0.9), &g, 2.0, &opts()).unwrap();
    let tree = default_stopping_tree(&table, g.root()).unwrap();
    assert!(tree.generations.len() > 1, "the weight should trigger stops");
    assert!(tree.decay_holds(1e-12), "{:?}", tree.decay());
    assert!(tree.disjoint());
}

#[test]
fn stopping_tree_partitions_every_subtree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..12 {
        let g = Grid::new(1, 9).unwrap();
        let w = MatrixWeight::Rotated { alphas: vec![rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)], theta: rng.random_range(0.0..3.0) };
        let p = [1.5, 2.0, 3.0][k % 3];
        let table = reducing_table(&w, &g, p, &opts()).unwrap();
        let root = g.cube(rng.random_range(0..7));
        // low thresholds force many generations
        let tree = stopping_time_tree(&table, root, Thresholds { lambda1: 1.2, lambda2: 1.2 }).unwrap();
        assert!(tree.disjoint());
        let counts = tree.partition_counts();
        assert!(counts.iter().all(|&c| c == 1));
        for (q, count) in g.descendants(root).zip(&counts) {
            assert_eq!(*count, 1);
            assert!(tree.family[g.id(q)].is_some());
        }
        let outside = g.all_cubes().filter(|c| !g.contains(root, *c)).all(|c| tree.family[g.id(c)].is_none());
        assert!(outside);
    }
}

#[test]
fn stopping_tree_exports_one_line_per_generation() {
    let g = Grid::new(1, 8).unwrap();
    let table = reducing_table(&MatrixWeight::counterexample(0.9), &g, 2.0, &opts()).unwrap();
    let tree = stopping_time_tree(&table, g.root(), Thresholds { lambda1: 1.5, lambda2: 1.5 }).unwrap();
    let mut buf = Vec::new();
    tree.write_ndjson(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), tree.generations.len());
    assert_eq!(lines[0]["cubes"][0]["level"], 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ntv_forms_coincide_at_p2(seed in 0u64..10_000, depth in 1usize..7, sparsity in 0.0f64..0.9) {
        let g = Grid::new(1, depth).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..g.num_cubes()).map(|_| if rng.random_bool(sparsity) { 0.0 } else { rng.random_range(0.0..3.0) }).collect();
        let f = ntv_scalar_equivalence(&g, &a, 2.0).unwrap();
        prop_assert!((f.sup_form - f.lp_form).abs() <= 1e-12 * f.sup_form.max(1e-300));
    }
}

#[test]
fn ntv_ratio_stays_bounded_at_p3() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for _ in 0..1000 {
        let depth = rng.random_range(1..=8);
        let g = Grid::new(1, depth).unwrap();
        let heavy = rng.random_range(0..g.num_cubes());
        let a: Vec<f64> = (0..g.num_cubes()).map(|i| if i == heavy { 5.0 } else { rng.random_range(0.0..1.0f64).powi(3) }).collect();
        let r = ntv_scalar_equivalence(&g, &a, 3.0).unwrap().ratio();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    println!("NTV p=3 ratio range over 1000 trials: [{lo:.4}, {hi:.4}]");
    assert!(lo > 0.2 && hi < 5.0, "[{lo}, {hi}]");
}

#[test]
fn embedding_premise_and_fitted_conclusion() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let no = NormOptions::default();
    let mut fitted = Vec::new();
    for k in 0..40u64 {
        let g = Grid::new(1, rng.random_range(2..=6)).unwrap();
        let w = MatrixWeight::RandomSpd { seed: 500 + k, cond: rng.random_range(1.0..100.0), n: 2 };
        let lw = LeafWeights::new(&w, &g).unwrap();
        let a = MatrixSequence::random(&g, 2, rng.random_range(0.1..5.0), k);
        let e = carleson_embedding_p2(&a, &lw, &no).unwrap();
        // the premise holds with its computed constant and fails just below it
        let j = e.premise_cube;
        let mut s = DMatrix::zeros(2, 2);
        for i in g.interior_cubes().filter(|i| g.contains(j, *i)) {
            let ai = a.get(i, Signature::new(0, 1));
            s += ai.transpose() * ai;
        }
        let mass: DMatrix<f64> = lw.all_means(1.0)[g.id(j)].clone() * g.measure_at(j.level);
        let slack = |c: f64| (mass.clone() * c - &s).symmetric_eigenvalues().min();
        assert!(slack(e.premise * (1.0 + 1e-9)) >= -1e-12 * e.premise);
        assert!(slack(e.premise * (1.0 - 1e-6)) < 0.0);
        fitted.push(e.fitted());
    }
    let max = fitted.iter().cloned().fold(0.0, f64::max);
    assert!(max <= 4.0, "fitted constant {max}");
}

#[test]
fn square_root_reading_of_the_embedding_is_not_scale_invariant() {
    let g = Grid::new(1, 5).unwrap();
    let lw = LeafWeights::new(&MatrixWeight::RandomSpd { seed: 1, cond: 10.0, n: 2 }, &g).unwrap();
    let a = MatrixSequence::random(&g, 2, 1.0, 1);
    let no = NormOptions::default();
    let e1 = carleson_embedding_p2(&a, &lw, &no).unwrap();
    let big = MatrixSequence::from_fn(&g, 2, |c, eps| a.get(c, eps) * 10.0);
    let e10 = carleson_embedding_p2(&big, &lw, &no).unwrap();
    assert!((e10.fitted() - e1.fitted()).abs() < 1e-9 * e1.fitted());
    assert!((e10.fitted_root() / e1.fitted_root() - 10.0).abs() < 1e-6);
}

#[test]
fn malformed_sequences_are_rejected() {
    let g = Grid::new(1, 2).unwrap();
    let err = ntv_scalar_equivalence(&g, &[1.0], 2.0).unwrap_err();
    assert!(matches!(err, CarlesonError::InvalidInput(_)));
    let mut a = MatrixSequence::zeros(&g, 2);
    let root: Cube = g.root();
    a.set(root, Signature::new(0, 1), &DMatrix::identity(2, 2));
    let t3 = reducing_table(&MatrixWeight::identity(3), &g, 2.0, &opts()).unwrap();
    assert!(carleson_b_from_table(&a, &t3).is_err());
}
