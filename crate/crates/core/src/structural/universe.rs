//! Type generators for exhaustive and randomized checks of the subtyping engines.

use std::collections::BTreeSet;

use rand::Rng;

use super::types::{Record, StructuralType};
use crate::syntax::Label;

/// All records with one or two members drawn from a field `f: c` and a
/// unary method `m(c): d`, components taken from `comps`.
fn records_over(comps: &[StructuralType]) -> Vec<StructuralType> {
    let mut out = Vec::new();
    let with_f = |r: Record, c: &StructuralType| r.with_field("f", c.clone());
    let with_m = |r: Record, a: &StructuralType, b: &StructuralType| {
        r.with_method("m", vec![a.clone()], b.clone())
    };
    for c in comps {
        out.push(with_f(Record::default(), c).into());
    }
    for a in comps {
        for b in comps {
            out.push(with_m(Record::default(), a, b).into());
        }
    }
    for c in comps {
        for a in comps {
            for b in comps {
                out.push(with_m(with_f(Record::default(), c), a, b).into());
            }
        }
    }
    out
}

/// Records with exactly one member over `comps`.
fn single_member_records(comps: &[StructuralType]) -> Vec<StructuralType> {
    let mut out: Vec<StructuralType> = comps
        .iter()
        .map(|c| Record::default().with_field("f", c.clone()).into())
        .collect();
    for a in comps {
        for b in comps {
            out.push(Record::default().with_method("m", vec![a.clone()], b.clone()).into());
        }
    }
    out
}

/// The exhaustively enumerated small-type universe: records with at most two
/// members, record nesting at most two, and at most one `μ` binder per type.
/// Every type is closed and contractive; the list is sorted and duplicate-free.
pub fn small_type_universe() -> Vec<StructuralType> {
    let top = StructuralType::top();
    let mut universe: BTreeSet<StructuralType> = BTreeSet::new();

    // Closed, binder-free types up to nesting two.
    let depth1 = records_over(std::slice::from_ref(&top));
    let mut comps2 = vec![top.clone()];
    comps2.extend(depth1.iter().cloned());
    universe.insert(top.clone());
    universe.extend(records_over(&comps2));

    // μX.body, with X used somewhere in the body.
    let x = StructuralType::Var(0);
    let atoms = vec![top.clone(), x.clone()];
    let mut comps_mu = atoms.clone();
    comps_mu.extend(single_member_records(&atoms));
    let mut single_mus = Vec::new();
    for body in records_over(&comps_mu) {
        if body.mentions(0) {
            let ty = StructuralType::mu(body);
            if ty.nesting() == 1 {
                single_mus.push(ty.clone());
            }
            universe.insert(ty);
        }
    }

    // Binder-free records holding one of the simplest μ-types.
    let mut inner = single_mus;
    inner.retain(|t| matches!(t, StructuralType::Mu(b) if matches!(&**b, StructuralType::Record(r) if r.fields.len() + r.methods.len() == 1)));
    for m in &inner {
        universe.insert(Record::default().with_field("f", m.clone()).into());
        universe.insert(Record::default().with_method("m", vec![m.clone()], top.clone()).into());
        universe.insert(Record::default().with_method("m", vec![top.clone()], m.clone()).into());
    }

    universe.into_iter().collect()
}

const FIELD_LABELS: [&str; 2] = ["f", "g"];
const METHOD_LABELS: [&str; 2] = ["m", "n"];

/// A random closed, contractive type of the form `μX.{...}` whose binder is used.
pub fn random_mu_type(rng: &mut impl Rng, max_depth: usize) -> StructuralType {
    loop {
        let body = random_record(rng, max_depth, 1);
        if body.mentions(0) {
            return StructuralType::mu(body);
        }
    }
}

fn random_record(rng: &mut impl Rng, depth: usize, scope: usize) -> StructuralType {
    let mut record = Record::default();
    let members = rng.gen_range(1..=3);
    for _ in 0..members {
        if rng.gen_bool(0.5) {
            let label = FIELD_LABELS[rng.gen_range(0..FIELD_LABELS.len())];
            let ty = random_component(rng, depth, scope);
            record.fields.insert(Label::new(label), ty);
        } else {
            let label = METHOD_LABELS[rng.gen_range(0..METHOD_LABELS.len())];
            let arity = rng.gen_range(0..=2);
            let params = (0..arity).map(|_| random_component(rng, depth, scope)).collect();
            let ret = random_component(rng, depth, scope);
            record = record.with_method(label, params, ret);
        }
    }
    record.into()
}

fn random_component(rng: &mut impl Rng, depth: usize, scope: usize) -> StructuralType {
    let roll = rng.gen_range(0..100);
    if depth <= 1 || roll < 20 {
        return if scope > 0 && rng.gen_bool(0.6) {
            StructuralType::Var(rng.gen_range(0..scope))
        } else {
            StructuralType::top()
        };
    }
    if roll < 60 {
        random_record(rng, depth - 1, scope)
    } else {
        StructuralType::mu(random_record(rng, depth - 1, scope + 1))
    }
}

/// A supertype of `ty` obtained by forgetting one member of its head record,
/// or `ty` itself when the head record is empty.
pub fn forget_one_member(rng: &mut impl Rng, ty: &StructuralType) -> StructuralType {
    let mut record = ty.head_record();
    let total = record.fields.len() + record.methods.len();
    if total == 0 {
        return ty.clone();
    }
    let pick = rng.gen_range(0..total);
    if pick < record.fields.len() {
        let label = record.fields.keys().nth(pick).cloned().expect("in range");
        record.fields.remove(&label);
    } else {
        let label = record
            .methods
            .keys()
            .nth(pick - record.fields.len())
            .cloned()
            .expect("in range");
        record.methods.remove(&label);
    }
    record.into()
}
