//! Shared helpers for unit tests: the worked example profiles and small
//! random generators.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rules::WinnerSet;
use crate::types::{rat, CandidateId, Profile, WeakOrder};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds a weak order from a compact string like `"{a,b} > c > d"`.
pub fn order_of(profile_names: &[&str], text: &str) -> WeakOrder {
    let classes = text
        .split('>')
        .map(|class| {
            class
                .trim()
                .trim_start_matches('{')
                .trim_end_matches('}')
                .split(',')
                .map(|name| {
                    let name = name.trim();
                    let idx = profile_names
                        .iter()
                        .position(|n| *n == name)
                        .unwrap_or_else(|| panic!("unknown candidate {name:?}"));
                    CandidateId(idx as u32)
                })
                .collect()
        })
        .collect();
    WeakOrder::new(classes).unwrap()
}

/// Builds an integer-weighted profile from `(weight, order-text)` pairs.
pub fn parse_simple(names: &[&str], lines: &[(i64, &str)]) -> Profile {
    let votes = lines
        .iter()
        .map(|&(w, text)| (rat(w), order_of(names, text)))
        .collect();
    Profile::new(names.iter().map(|n| n.to_string()).collect(), votes).unwrap()
}

/// The five-voter worked example: Approval-IRV eliminates c, d, b and
/// elects a; Split-IRV elects b.
pub fn fig1() -> Profile {
    parse_simple(
        &["a", "b", "c", "d"],
        &[
            (1, "{a,b} > c > d"),
            (1, "{a,b,d} > c"),
            (1, "b > {a,c} > d"),
            (1, "c > a > {b,d}"),
            (1, "d > a > c > b"),
        ],
    )
}

/// The clone counterexample: under Split-IRV the clones c, c' win, but
/// collapsing c' makes a win.
pub fn fig8() -> Profile {
    parse_simple(
        &["a", "b", "c", "c'"],
        &[
            (9, "{a,c,c'} > b"),
            (4, "b > a > {c,c'}"),
            (2, "{c,c'} > a > b"),
        ],
    )
}

/// The majority-alternative example on 100 voters: a is the unique
/// majority alternative yet b beats a 49:4 in strict comparisons.
pub fn fig9() -> Profile {
    parse_simple(
        &["a", "b", "c", "d"],
        &[
            (47, "{a,b} > c > d"),
            (4, "a > b > c > d"),
            (25, "c > b > d > a"),
            (24, "d > b > c > a"),
        ],
    )
}

/// The cohesive-majority counterexample: 19 of 37 voters rank a on top,
/// but Split-IRV elects d.
pub fn fig10() -> Profile {
    parse_simple(
        &["a", "b", "c", "d"],
        &[
            (9, "{a,b,c} > d"),
            (5, "{a,b} > d > c"),
            (5, "{a,c} > d > b"),
            (8, "{b,c,d} > a"),
            (10, "d > {a,b,c}"),
        ],
    )
}

/// The T-supporting / closure illustration: the first five voters support
/// T = {t1,t2,t3} and their closure additionally picks up a and b; the
/// last two voters are not T-supporting because of where they rank a.
pub fn fig12() -> Profile {
    parse_simple(
        &["t1", "t2", "t3", "a", "b", "c", "d"],
        &[
            (1, "t1 > t2 > t3 > {a,b,c,d}"),
            (1, "{t1,t2} > t3 > {a,b,d} > c"),
            (1, "t2 > {t1,t3,a} > {c,d} > b"),
            (1, "t3 > t2 > {t1,a} > {b,c,d}"),
            (1, "t2 > {t1,t3,a,b} > d > c"),
            (1, "t1 > {t2,a} > t3 > {b,c,d}"),
            (1, "a > {t1,t2} > t3 > {b,c,d}"),
        ],
    )
}

/// The rock-paper-scissors margin fixture: a beats c, c beats b, b beats
/// a, each by a margin of one.
pub fn margin_cycle() -> Profile {
    parse_simple(
        &["a", "b", "c"],
        &[
            (1, "a > c > b"),
            (1, "{a,b} > c"),
            (1, "{a,b} > c"),
            (1, "c > b > a"),
            (1, "c > b > a"),
        ],
    )
}

pub fn names(profile: &Profile, winners: &WinnerSet) -> BTreeSet<String> {
    profile.names_of(winners.as_set())
}

pub fn names_vec(profile: &Profile, set: &[CandidateId]) -> Vec<String> {
    set.iter()
        .map(|&c| profile.candidate_name(c).to_owned())
        .collect()
}

pub fn random_weak_profile(
    rng: &mut impl Rng,
    max_m: usize,
    max_ballots: usize,
    max_weight: u64,
) -> Profile {
    let m = rng.gen_range(2..=max_m.max(2));
    crate::axioms::search::random_weak_profile(rng, m, max_ballots, max_weight)
}

pub fn random_linear_profile(
    rng: &mut impl Rng,
    max_m: usize,
    max_ballots: usize,
    max_weight: u64,
) -> Profile {
    let m = rng.gen_range(2..=max_m.max(2));
    crate::axioms::search::random_linear_profile(rng, m, max_ballots, max_weight)
}

pub fn random_priority(rng: &mut impl Rng, m: usize) -> Vec<CandidateId> {
    let mut ids: Vec<CandidateId> = (0..m as u32).map(CandidateId).collect();
    ids.shuffle(rng);
    ids
}
