//! Randomized counterexample search over small integer-weighted profiles.
//!
//! The harness draws seeded random profiles (planting the structures an
//! axiom's precondition needs, such as a clone pair or a cohesive
//! majority), evaluates the rule, and runs the corresponding checker.
//! Search is reproducible: trials derive their generators from the master
//! seed, run independently (in parallel when a rayon pool is available),
//! and the hit with the lowest trial index wins. Absence of a hit is not
//! a proof.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::axioms::{
    check_cohesive_majorities, check_generalized_psc_capped, check_independence_of_clones,
    check_indifference_monotonicity, check_select_majority_alternative,
    check_unanimous_majorities, expand_clone, hoverable_votes, AxiomError, AxiomVerdict,
    HoverPattern, RuleSpec,
};
use crate::types::{rat, CandidateId, Profile, Rational, WeakOrder};

/// Instance-size box the search draws from.
#[derive(Clone, Debug)]
pub struct SearchBounds {
    pub max_m: usize,
    pub max_ballots: usize,
    pub max_weight: u64,
    pub trials: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_m: 5,
            max_ballots: 8,
            max_weight: 10,
            trials: 20_000,
        }
    }
}

/// Axioms the harness can probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchAxiom {
    IndependenceOfClones,
    CohesiveMajorities,
    UnanimousMajorities,
    SelectMajorityAlternative,
    IndifferenceMonotonicity,
    GeneralizedPsc,
}

impl SearchAxiom {
    pub fn name(self) -> &'static str {
        match self {
            SearchAxiom::IndependenceOfClones => "independence-of-clones",
            SearchAxiom::CohesiveMajorities => "cohesive-majorities",
            SearchAxiom::UnanimousMajorities => "unanimous-majorities",
            SearchAxiom::SelectMajorityAlternative => "select-majority-alternative",
            SearchAxiom::IndifferenceMonotonicity => "indifference-monotonicity",
            SearchAxiom::GeneralizedPsc => "generalized-psc",
        }
    }
}

/// A found violation: the witness profile and its certificate.
#[derive(Clone, Debug)]
pub struct SearchHit {
    pub trial: u64,
    pub profile: Profile,
    pub verdict: AxiomVerdict,
}

/// Short candidate names: `a`, `b`, ..., then `x10`, `x11`, ...
pub fn candidate_names(m: usize) -> Vec<String> {
    (0..m)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("x{i}")
            }
        })
        .collect()
}

/// A random weak order over `0..m`. A per-ballot merge probability is
/// drawn first, so the output mixes linear, dichotomous and heavily tied
/// ballots rather than clustering around one order type.
pub fn random_weak_order(rng: &mut impl Rng, m: usize) -> WeakOrder {
    let mut ids: Vec<CandidateId> = (0..m as u32).map(CandidateId).collect();
    ids.shuffle(rng);
    let merge_prob: f64 = rng.gen_range(0.0..0.9);
    let mut classes: Vec<Vec<CandidateId>> = vec![vec![ids[0]]];
    for &c in &ids[1..] {
        if rng.gen_bool(merge_prob) {
            classes.last_mut().unwrap().push(c);
        } else {
            classes.push(vec![c]);
        }
    }
    WeakOrder::new(classes).expect("generated classes are valid")
}

/// A random integer-weighted profile of weak orders on `m` candidates.
pub fn random_weak_profile(
    rng: &mut impl Rng,
    m: usize,
    max_ballots: usize,
    max_weight: u64,
) -> Profile {
    let ballots = rng.gen_range(1..=max_ballots.max(1));
    let votes = (0..ballots)
        .map(|_| {
            let w = rat(rng.gen_range(1..=max_weight.max(1)) as i64);
            (w, random_weak_order(rng, m))
        })
        .collect();
    Profile::new(candidate_names(m), votes).expect("generated profile is valid")
}

/// A random integer-weighted profile of linear orders.
pub fn random_linear_profile(
    rng: &mut impl Rng,
    m: usize,
    max_ballots: usize,
    max_weight: u64,
) -> Profile {
    let ballots = rng.gen_range(1..=max_ballots.max(1));
    let votes = (0..ballots)
        .map(|_| {
            let mut ids: Vec<CandidateId> = (0..m as u32).map(CandidateId).collect();
            ids.shuffle(rng);
            let w = rat(rng.gen_range(1..=max_weight.max(1)) as i64);
            (w, WeakOrder::linear(ids).expect("nonempty ranking"))
        })
        .collect();
    Profile::new(candidate_names(m), votes).expect("generated profile is valid")
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(trial)))
}

/// Forces candidate `c` into the top class of enough ballots that the
/// adjusted voters carry more than half the weight; the result is a valid
/// profile with a planted cohesive majority (the axiom's precondition,
/// not the violation itself).
fn plant_cohesive_majority(rng: &mut impl Rng, profile: &Profile) -> Profile {
    let m = profile.num_candidates();
    let c = CandidateId(rng.gen_range(0..m as u32));
    let half = profile.total_weight() / rat(2);
    let mut indices: Vec<usize> = (0..profile.num_votes()).collect();
    indices.shuffle(rng);
    let mut votes: Vec<(Rational, WeakOrder)> = profile
        .votes()
        .iter()
        .map(|v| (v.weight.clone(), v.order.clone()))
        .collect();
    let mut planted = Rational::from_integer(0.into());
    for &i in &indices {
        if planted > half {
            break;
        }
        planted += &votes[i].0;
        let order = &votes[i].1;
        if order.top_set().contains(&c) {
            continue;
        }
        let mut classes: Vec<Vec<CandidateId>> = order
            .classes()
            .iter()
            .map(|class| class.iter().copied().filter(|&x| x != c).collect())
            .filter(|class: &Vec<CandidateId>| !class.is_empty())
            .collect();
        classes[0].push(c);
        votes[i].1 = WeakOrder::new(classes).expect("adjusted classes are valid");
    }
    Profile::new(profile.roster().to_vec(), votes).expect("adjusted profile is valid")
}

fn run_trial(
    rule: &RuleSpec,
    axiom: SearchAxiom,
    bounds: &SearchBounds,
    seed: u64,
    trial: u64,
) -> Result<Option<SearchHit>, AxiomError> {
    let mut rng = trial_rng(seed, trial);
    let hit = |profile: Profile, verdict: AxiomVerdict| {
        Some(SearchHit {
            trial,
            profile,
            verdict,
        })
    };
    match axiom {
        SearchAxiom::IndependenceOfClones => {
            // plant a clone pair: generate on m-1 candidates and expand
            let m_base = rng.gen_range(2..=bounds.max_m.saturating_sub(1).max(2));
            let base = random_weak_profile(&mut rng, m_base, bounds.max_ballots, bounds.max_weight);
            let c = CandidateId(rng.gen_range(0..m_base as u32));
            let (expanded, clones) = expand_clone(&base, c, 2, rng.gen())?;
            let keep = *clones.iter().next().expect("clone set nonempty");
            let verdict = check_independence_of_clones(rule, &expanded, &clones, keep)?;
            Ok(match verdict {
                AxiomVerdict::Pass => None,
                v @ AxiomVerdict::Violation(_) => hit(expanded, v),
            })
        }
        SearchAxiom::CohesiveMajorities
        | SearchAxiom::UnanimousMajorities
        | SearchAxiom::SelectMajorityAlternative => {
            let m = rng.gen_range(2..=bounds.max_m);
            let mut profile =
                random_weak_profile(&mut rng, m, bounds.max_ballots, bounds.max_weight);
            if trial % 2 == 0 {
                profile = plant_cohesive_majority(&mut rng, &profile);
            }
            let winners = rule.winners(&profile)?;
            let verdict = match axiom {
                SearchAxiom::CohesiveMajorities => check_cohesive_majorities(&profile, &winners)?,
                SearchAxiom::UnanimousMajorities => {
                    check_unanimous_majorities(&profile, &winners)?
                }
                _ => check_select_majority_alternative(&profile, &winners)?,
            };
            Ok(match verdict {
                AxiomVerdict::Pass => None,
                v @ AxiomVerdict::Violation(_) => hit(profile, v),
            })
        }
        SearchAxiom::IndifferenceMonotonicity => {
            let m = rng.gen_range(2..=bounds.max_m);
            let profile =
                random_weak_profile(&mut rng, m, bounds.max_ballots, bounds.max_weight);
            let winners = rule.winners(&profile)?;
            for &w in &winners {
                let hoverable = hoverable_votes(&profile, w);
                if hoverable.is_empty() {
                    continue;
                }
                let chosen: Vec<usize> = hoverable
                    .iter()
                    .copied()
                    .filter(|_| rng.gen_bool(0.5))
                    .collect();
                let chosen = if chosen.is_empty() {
                    vec![hoverable[rng.gen_range(0..hoverable.len())]]
                } else {
                    chosen
                };
                let pattern = HoverPattern::for_votes(w, chosen);
                let verdict = check_indifference_monotonicity(rule, &profile, w, &pattern)?;
                if let v @ AxiomVerdict::Violation(_) = verdict {
                    return Ok(hit(profile, v));
                }
            }
            Ok(None)
        }
        SearchAxiom::GeneralizedPsc => {
            let RuleSpec::Stv { k, config, .. } = rule else {
                return Err(AxiomError::NeedsStvRule);
            };
            let m = rng.gen_range((*k).max(2)..=bounds.max_m.max(*k).max(2));
            let profile =
                random_weak_profile(&mut rng, m, bounds.max_ballots, bounds.max_weight);
            let committee = rule.winners(&profile)?;
            let verdict = check_generalized_psc_capped(
                &profile,
                &committee,
                *k,
                config.quota,
                bounds.max_m.max(m),
                *k,
            )?;
            Ok(match verdict {
                AxiomVerdict::Pass => None,
                v @ AxiomVerdict::Violation(_) => hit(profile, v),
            })
        }
    }
}

/// Runs up to `bounds.trials` seeded trials and returns the violation
/// with the lowest trial index, if any. Trials are independent, so the
/// result does not depend on the number of worker threads.
pub fn search_counterexample(
    rule: &RuleSpec,
    axiom: SearchAxiom,
    bounds: &SearchBounds,
    seed: u64,
) -> Result<Option<SearchHit>, AxiomError> {
    (0..bounds.trials)
        .into_par_iter()
        .find_map_first(|trial| match run_trial(rule, axiom, bounds, seed, trial) {
            Ok(None) => None,
            Ok(Some(hitv)) => Some(Ok(hitv)),
            Err(e) => Some(Err(e)),
        })
        .transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::revalidate;

    fn assert_revalidates(rule: &RuleSpec, hit: &SearchHit) {
        assert!(
            revalidate(&hit.profile, Some(rule), &hit.verdict).unwrap(),
            "certificate failed revalidation: {:?}",
            hit.verdict
        );
    }

    #[test]
    fn finds_split_irv_clone_violation() {
        let rule = RuleSpec::split_irv();
        let bounds = SearchBounds {
            max_m: 4,
            max_ballots: 6,
            max_weight: 10,
            trials: 5_000,
        };
        let found = search_counterexample(&rule, SearchAxiom::IndependenceOfClones, &bounds, 7)
            .unwrap()
            .expect("split-irv clone violations exist at m <= 4");
        assert_revalidates(&rule, &found);
    }

    #[test]
    fn finds_split_irv_cohesive_majority_violation() {
        let rule = RuleSpec::split_irv();
        let bounds = SearchBounds {
            max_m: 5,
            max_ballots: 8,
            max_weight: 10,
            trials: 30_000,
        };
        let found = search_counterexample(&rule, SearchAxiom::CohesiveMajorities, &bounds, 11)
            .unwrap()
            .expect("split-irv majority violations exist at m <= 5");
        assert_revalidates(&rule, &found);
    }

    #[test]
    fn finds_split_irv_indifference_monotonicity_violation() {
        let rule = RuleSpec::split_irv();
        let bounds = SearchBounds {
            max_m: 5,
            max_ballots: 8,
            max_weight: 10,
            trials: 30_000,
        };
        let found =
            search_counterexample(&rule, SearchAxiom::IndifferenceMonotonicity, &bounds, 13)
                .unwrap()
                .expect("split-irv monotonicity violations exist at m <= 5");
        assert_revalidates(&rule, &found);
    }

    #[test]
    fn search_is_reproducible() {
        let rule = RuleSpec::split_irv();
        let bounds = SearchBounds {
            max_m: 4,
            max_ballots: 6,
            max_weight: 10,
            trials: 5_000,
        };
        let a = search_counterexample(&rule, SearchAxiom::IndependenceOfClones, &bounds, 7)
            .unwrap()
            .unwrap();
        let b = search_counterexample(&rule, SearchAxiom::IndependenceOfClones, &bounds, 7)
            .unwrap()
            .unwrap();
        assert_eq!(a.trial, b.trial);
        assert_eq!(a.profile, b.profile);
        assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn approval_irv_survives_bounded_search() {
        let rule = RuleSpec::approval_irv();
        let bounds = SearchBounds {
            max_m: 4,
            max_ballots: 5,
            max_weight: 5,
            trials: 1_500,
        };
        for axiom in [
            SearchAxiom::IndependenceOfClones,
            SearchAxiom::CohesiveMajorities,
            SearchAxiom::IndifferenceMonotonicity,
        ] {
            let found = search_counterexample(&rule, axiom, &bounds, 3).unwrap();
            assert!(found.is_none(), "unexpected {axiom:?} hit: {found:?}");
        }
    }
}
