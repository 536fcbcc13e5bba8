use proptest::prelude::*;

use masonry_core::optimizer::{rank_objective, CandidateValues, Phase};

pub fn phase_of(post: bool) -> Phase {
    if post {
        Phase::PostCrown
    } else {
        Phase::PreCrown
    }
}

/// Candidates with node ids 10, 11, ...; values drawn from a small grid so
/// that ties are common.
pub fn table(post: bool, singular: bool) -> impl Strategy<Value = Vec<CandidateValues>> {
    let k = phase_of(post).criteria_count();
    (1usize..8, 1usize..5).prop_flat_map(move |(n, h)| {
        let value = (0i32..12).prop_map(|v| v as f64 * 2.5);
        let step = prop::collection::vec(value, k);
        let entry = if singular {
            prop::option::weighted(0.85, step).boxed()
        } else {
            step.prop_map(Some).boxed()
        };
        prop::collection::vec(prop::collection::vec(entry, h), n).prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, steps)| CandidateValues { node: 10 + i, steps })
                .collect()
        })
    })
}

/// Either phase, with its table.
pub fn any_table(singular: bool) -> impl Strategy<Value = (bool, Vec<CandidateValues>)> {
    any::<bool>().prop_flat_map(move |post| table(post, singular).prop_map(move |t| (post, t)))
}

pub fn order(t: &[CandidateValues], post: bool) -> Vec<usize> {
    rank_objective(t, phase_of(post)).unwrap().iter().map(|e| e.node).collect()
}

/// Applies x ↦ a·x³ + b·x + c (strictly increasing for a ≥ 0, b > 0) to one criterion.
pub fn transform(values: &mut [CandidateValues], crit: usize, a: f64, b: f64, c: f64) {
    for cand in values.iter_mut() {
        for step in cand.steps.iter_mut().flatten() {
            let x = step[crit];
            step[crit] = a * x * x * x + b * x + c;
        }
    }
}
