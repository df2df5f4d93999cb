//! Commutators `[B, Q_σ] f = B Q f − Q(B f)`.
//!
//! The decomposed mode expands `B = m B + Σ B_{I′}^{ε′} h_{I′}^{ε′}` and sorts
//! the pairs `(I′, I)` by position: `I′ = I`, `I′ = σ(I)`, `I′ ⊊ I` otherwise.
//! Each family is assembled on its own; signs come from the exact Haar values.

use dyadic_core::{haar_transform, inverse_haar, signature_product, HaarExpansion, Shape, Signature, StepFunction};
use serde::{Deserialize, Serialize};

use crate::error::OperatorError;
use crate::paraproduct::{adjoint_paraproduct_with, paraproduct_with};
use crate::sequence::{check_vector, mat_vec_acc, MatrixSymbol};
use crate::shift::{apply_haar_shift, ShiftMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommutatorMode {
    Direct,
    Decomposed,
}

pub fn apply_commutator(b: &MatrixSymbol, sigma: &ShiftMap, f: &StepFunction, mode: CommutatorMode) -> Result<StepFunction, OperatorError> {
    b.grid().check_same(f.grid())?;
    b.grid().check_same(sigma.grid())?;
    check_vector(f, b.n())?;
    match mode {
        CommutatorMode::Direct => direct(b, sigma, f),
        CommutatorMode::Decomposed => decomposed(b, sigma, f),
    }
}

fn direct(b: &MatrixSymbol, sigma: &ShiftMap, f: &StepFunction) -> Result<StepFunction, OperatorError> {
    let bq = b.function().apply(&apply_haar_shift(sigma, f)?)?;
    let qb = apply_haar_shift(sigma, &b.function().apply(f)?)?;
    Ok(bq.sub(&qb)?)
}

fn decomposed(b: &MatrixSymbol, sigma: &ShiftMap, f: &StepFunction) -> Result<StepFunction, OperatorError> {
    let g = b.grid();
    let n = b.n();
    let d = g.d();
    let sigs: Vec<Signature> = Signature::cancellative(d).collect();
    let bc = b.coefficients();
    let fe = haar_transform(f);
    let fmeans = f.cube_means();
    // terms already in final position, and terms that still pass through Q
    let mut direct_part = HaarExpansion::zeros(g, Shape::Vector(n));
    let mut pre_q = HaarExpansion::zeros(g, Shape::Vector(n));
    let mut tmp = vec![0.0; n];

    for c in g.interior_cubes() {
        let id = g.id(c);
        let root_inv = g.measure_at(c.level).sqrt().recip();
        let t = sigma.target(c);
        let t_inner = !g.is_leaf(t);
        let t_child = g.child_index(t);
        for e in &sigs {
            let fi = fe.coeff_by_id(id, e.index());
            let se = sigma.signature(e.index());
            for e2 in &sigs {
                let bi = bc.slot(id, e2.index());
                // I′ = I: h_I^{ε′} Q h_I^ε = h_I^{ε′}(σI) h_{σI}^{σε}
                if t_inner {
                    mat_vec_acc(bi, fi, e2.sign_on_child(t_child) * root_inv, direct_part.coeff_by_id_mut(g.id(t), se));
                }
                // I′ = I: −Q(h_I^{ε′} h_I^ε), cancellative products only; ε = ε′ is (π_{B*})* below
                if e != e2 {
                    let p = signature_product(*e, *e2)?;
                    mat_vec_acc(bi, fi, -p.sign * root_inv, pre_q.coeff_by_id_mut(id, p.signature.index()));
                }
            }
            if !t_inner {
                continue;
            }
            let tid = g.id(t);
            let t_inv = g.measure_at(t.level).sqrt().recip();
            let sse = Signature::new(sigs[se].bits(), d);
            let u = sigma.target(t);
            for e2 in &sigs {
                let bt = bc.slot(tid, e2.index());
                // I′ = σI: h_{σI}^{ε′} h_{σI}^{σε}, cancellative part (ε′ ≠ σε)
                if *e2 != sse {
                    let p = signature_product(sse, *e2)?;
                    mat_vec_acc(bt, fi, p.sign * t_inv, direct_part.coeff_by_id_mut(tid, p.signature.index()));
                }
                // I′ = σI: −Q(h_{σI}^{ε′} h_I^ε) = −h_I^ε(σI) h_{σ²I}^{σε′}
                if !g.is_leaf(u) {
                    let s = e.sign_on_child(t_child) * root_inv;
                    mat_vec_acc(bt, fi, -s, direct_part.coeff_by_id_mut(g.id(u), sigma.signature(e2.index())));
                }
            }
        }
    }

    // I′ ⊊ I, I′ ≠ σ(I), together with the mean of f: −Q(Σ B_{I′} a_{I′} h_{I′})
    for c in g.interior_cubes() {
        let id = g.id(c);
        tmp.copy_from_slice(&fmeans[id * n..(id + 1) * n]);
        if let Some(parent) = g.parent(c) {
            if sigma.target(parent) == c {
                let pid = g.id(parent);
                let s = g.measure_at(parent.level).sqrt().recip();
                let ci = g.child_index(c);
                for e in &sigs {
                    let fp = fe.coeff_by_id(pid, e.index());
                    for k in 0..n {
                        tmp[k] -= e.sign_on_child(ci) * s * fp[k];
                    }
                }
            }
        }
        for e2 in &sigs {
            mat_vec_acc(bc.slot(id, e2.index()), &tmp, -1.0, pre_q.coeff_by_id_mut(id, e2.index()));
        }
    }

    let shifted = sigma.shift_expansion(&pre_q);
    let mut total = HaarExpansion::zeros(g, Shape::Vector(n));
    for id in 0..g.num_interior() {
        for e in 0..g.num_signatures() {
            let a = direct_part.coeff_by_id(id, e).to_vec();
            let b2 = shifted.coeff_by_id(id, e).to_vec();
            for (o, (x, y)) in total.coeff_by_id_mut(id, e).iter_mut().zip(a.iter().zip(&b2)) {
                *o = x + y;
            }
        }
    }
    let mut out = inverse_haar(&total);

    let qf = apply_haar_shift(sigma, f)?;
    // (π_{B*})* Q f from I′ = σ(I), ε′ = σ(ε)
    out = out.add(&adjoint_paraproduct_with(bc, &qf)?)?;
    // −Q (π_{B*})* f from I′ = I, ε′ = ε
    out = out.sub(&apply_haar_shift(sigma, &adjoint_paraproduct_with(bc, f)?)?)?;
    // π_B Q f from I′ ⊊ σ(I)
    out = out.add(&paraproduct_with(bc, &qf)?)?;
    Ok(out)
}
