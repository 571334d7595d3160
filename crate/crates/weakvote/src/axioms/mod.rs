//! Executable axiom checkers with machine-checkable certificates.
//!
//! Each checker decides whether a profile/outcome pair satisfies one of
//! the studied properties. A failing check returns a `Violation` carrying
//! a witness (the clone set, the cohesive group, the hover pattern, or the
//! `(T, ell, voters)` triple) that [`revalidate`] can replay against the
//! raw definition, with no trust in checker internals.

pub mod search;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::rules::{put_winners, RuleError, Tiebreak, WinnerSet};
use crate::scoring::ScoringSystem;
use crate::stv::{quota, QuotaKind, StvConfig, StvError, StvMode};
use crate::types::{rat, CandidateId, OrderError, Profile, ProfileError, Rational, WeakOrder};

#[derive(Debug, Error, PartialEq)]
pub enum AxiomError {
    #[error("candidate set is not a subset of the roster")]
    NotInRoster,
    #[error("candidate set is empty")]
    EmptySet,
    #[error("{0} is not a clone set in this profile")]
    NotCloneSet(String),
    #[error("the kept candidate must belong to the clone set")]
    KeepOutsideCloneSet,
    #[error("clone expansion needs a count of at least 2")]
    CloneCountTooSmall,
    #[error("candidate is not alone in its indifference class")]
    HoverNotSingleton,
    #[error("candidate has no indifference class above it")]
    HoverAtTop,
    #[error("hover pattern entry {0} is invalid: {1}")]
    BadHoverEntry(usize, String),
    #[error("candidate {0} is not a winner of the rule")]
    NotAWinner(String),
    #[error("voter {0} is not T-supporting")]
    NotSupporting(usize),
    #[error("committee has {got} members, expected k = {k}")]
    CommitteeSize { got: usize, k: usize },
    #[error("checker refuses m = {m}, k = {k} beyond caps m <= {max_m}, k <= {max_k}")]
    PscCapsExceeded {
        m: usize,
        k: usize,
        max_m: usize,
        max_k: usize,
    },
    #[error("exhaustive checker refuses more than {max} ballot lines, got {got}")]
    TooManyBallotLines { got: usize, max: usize },
    #[error("this axiom needs an STV rule specification")]
    NeedsStvRule,
    #[error("certificate does not match this profile")]
    BadCertificate(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Stv(#[from] StvError),
}

/// A voting rule the checkers and the search harness can evaluate:
/// either an elimination scoring rule (PUT semantics) or an STV
/// configuration for a fixed committee size.
#[derive(Clone, Debug)]
pub enum RuleSpec {
    Elimination(ScoringSystem),
    Stv {
        mode: StvMode,
        k: usize,
        config: StvConfig,
    },
}

impl RuleSpec {
    pub fn approval_irv() -> Self {
        RuleSpec::Elimination(ScoringSystem::Approval)
    }

    pub fn split_irv() -> Self {
        RuleSpec::Elimination(ScoringSystem::Split)
    }

    pub fn baldwin_weak() -> Self {
        RuleSpec::Elimination(ScoringSystem::BordaStyle)
    }

    pub fn approval_stv(k: usize, config: StvConfig) -> Self {
        RuleSpec::Stv {
            mode: StvMode::Approval,
            k,
            config,
        }
    }

    pub fn split_stv(k: usize, config: StvConfig) -> Self {
        RuleSpec::Stv {
            mode: StvMode::Split,
            k,
            config,
        }
    }

    /// Winner set (or committee, for STV specs) on `profile`.
    pub fn winners(&self, profile: &Profile) -> Result<BTreeSet<CandidateId>, AxiomError> {
        match self {
            RuleSpec::Elimination(system) => {
                Ok(put_winners(profile, system)?.into_set())
            }
            RuleSpec::Stv { mode, k, config } => {
                let run = match mode {
                    StvMode::Approval => crate::stv::approval_stv,
                    StvMode::Split => crate::stv::split_stv,
                };
                let (committee, _) = run(profile, *k, config)?;
                Ok(committee.into_iter().collect())
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RuleSpec::Elimination(system) => format!("{}-elimination", system.name()),
            RuleSpec::Stv { mode, k, config } => format!(
                "{}-stv k={k} {}",
                match mode {
                    StvMode::Approval => "approval",
                    StvMode::Split => "split",
                },
                config.describe()
            ),
        }
    }
}

/// Which of the two clauses of independence of clones broke.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CloneClause {
    /// A non-clone candidate won on one side but not the other.
    NonCloneChanged(String),
    /// The kept clone's status in the collapsed profile disagrees with
    /// whether any clone won in the full profile.
    CloneStatusChanged,
}

/// Witness data for a violation; everything is stored by candidate name
/// and ballot-line index so it stays meaningful across profile
/// restrictions and in serialized output.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Clones {
        clone_set: BTreeSet<String>,
        kept: String,
        winners_full: BTreeSet<String>,
        winners_collapsed: BTreeSet<String>,
        broken: CloneClause,
    },
    CohesiveMajority {
        /// Candidate the group agrees on.
        common_top: String,
        /// Winner outside every group member's top set.
        excluded_winner: String,
        /// Ballot-line indices of the group.
        voters: Vec<usize>,
        group_weight: Rational,
        half_total: Rational,
        winners: BTreeSet<String>,
    },
    UnanimousMajority {
        shared_top: BTreeSet<String>,
        group_weight: Rational,
        half_total: Rational,
        outside_winners: BTreeSet<String>,
        winners: BTreeSet<String>,
    },
    SelectMajority {
        majority_alternatives: BTreeSet<String>,
        non_majority_winner: String,
        winners: BTreeSet<String>,
    },
    IndifferenceMonotonicity {
        candidate: String,
        hovered_votes: Vec<usize>,
        winners_before: BTreeSet<String>,
        winners_after: BTreeSet<String>,
    },
    GeneralizedPsc {
        t_set: BTreeSet<String>,
        ell: usize,
        /// Committee members inside the group's closure (fewer than `ell`).
        committee_inside: BTreeSet<String>,
        voters: Vec<usize>,
        group_weight: Rational,
        threshold: Rational,
        committee: BTreeSet<String>,
    },
}

/// Outcome of an axiom check.
#[derive(Clone, Debug, PartialEq)]
pub enum AxiomVerdict {
    Pass,
    Violation(Certificate),
}

impl AxiomVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, AxiomVerdict::Pass)
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            AxiomVerdict::Pass => None,
            AxiomVerdict::Violation(c) => Some(c),
        }
    }
}

fn require_subset(profile: &Profile, set: &BTreeSet<CandidateId>) -> Result<(), AxiomError> {
    if set.iter().any(|c| c.index() >= profile.num_candidates()) {
        return Err(AxiomError::NotInRoster);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Clones
// ---------------------------------------------------------------------------

/// True when every voter ranks all of `x_set` strictly above, strictly
/// below, or all tied with each candidate outside the set.
pub fn is_clone_set(profile: &Profile, x_set: &BTreeSet<CandidateId>) -> Result<bool, AxiomError> {
    if x_set.is_empty() {
        return Err(AxiomError::EmptySet);
    }
    require_subset(profile, x_set)?;
    for vote in profile.votes() {
        let mut lo = usize::MAX;
        let mut hi = 0usize;
        for &x in x_set {
            let j = vote.order.class_of(x).expect("order covers roster");
            lo = lo.min(j);
            hi = hi.max(j);
        }
        for c in profile.candidates() {
            if x_set.contains(&c) {
                continue;
            }
            let p = vote.order.class_of(c).expect("order covers roster");
            let above_all = p < lo;
            let below_all = p > hi;
            let tied_with_all = lo == hi && p == lo;
            if !(above_all || below_all || tied_with_all) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Removes all clones but `keep` from the profile.
pub fn collapse_clones(
    profile: &Profile,
    x_set: &BTreeSet<CandidateId>,
    keep: CandidateId,
) -> Result<Profile, AxiomError> {
    if !x_set.contains(&keep) {
        return Err(AxiomError::KeepOutsideCloneSet);
    }
    if !is_clone_set(profile, x_set)? {
        return Err(AxiomError::NotCloneSet(profile.describe_set(x_set)));
    }
    let mut keep_set = profile.candidate_set();
    for &x in x_set {
        if x != keep {
            keep_set.remove(&x);
        }
    }
    Ok(profile.restrict_to(&keep_set)?)
}

/// Replaces candidate `c` by `count` clones, inserted right after `c` in
/// the roster and placed per-ballot so the clone-set condition holds:
/// all tied in `c`'s class when `c` shares it, and otherwise either all
/// tied or a randomly ordered adjacent block. Collapsing the returned set
/// back onto `c` recovers the input exactly.
pub fn expand_clone(
    profile: &Profile,
    c: CandidateId,
    count: usize,
    seed: u64,
) -> Result<(Profile, BTreeSet<CandidateId>), AxiomError> {
    use rand::{Rng, SeedableRng};
    if count < 2 {
        return Err(AxiomError::CloneCountTooSmall);
    }
    require_subset(profile, &BTreeSet::from([c]))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let mut roster: Vec<String> = Vec::with_capacity(profile.num_candidates() + count - 1);
    let mut clone_ids = Vec::with_capacity(count);
    for cur in profile.candidates() {
        roster.push(profile.candidate_name(cur).to_owned());
        if cur == c {
            let base = roster.len() - 1;
            for j in 1..count {
                let mut name = format!("{}{}", profile.candidate_name(c), "'".repeat(j));
                while roster.contains(&name) || profile.roster().contains(&name) {
                    name.push('\'');
                }
                roster.push(name);
            }
            for j in 0..count {
                clone_ids.push(CandidateId((base + j) as u32));
            }
        }
    }
    // old id -> new id (everything after c shifts up by count-1)
    let remap = |old: CandidateId| -> CandidateId {
        if old.0 <= c.0 {
            old
        } else {
            CandidateId(old.0 + (count as u32 - 1))
        }
    };

    let mut votes = Vec::with_capacity(profile.num_votes());
    for vote in profile.votes() {
        let mut classes: Vec<Vec<CandidateId>> = Vec::with_capacity(vote.order.num_classes() + count);
        for class in vote.order.classes() {
            if !class.contains(&c) {
                classes.push(class.iter().map(|&x| remap(x)).collect());
                continue;
            }
            if class.len() > 1 || rng.gen_bool(0.5) {
                // tied placement: all clones join c's class
                let mut merged: Vec<CandidateId> = class
                    .iter()
                    .filter(|&&x| x != c)
                    .map(|&x| remap(x))
                    .collect();
                merged.extend(clone_ids.iter().copied());
                classes.push(merged);
            } else {
                // adjacent block of singleton classes in random order
                let mut block = clone_ids.clone();
                for i in (1..block.len()).rev() {
                    block.swap(i, rng.gen_range(0..=i));
                }
                for x in block {
                    classes.push(vec![x]);
                }
            }
        }
        votes.push((vote.weight.clone(), WeakOrder::new(classes)?));
    }
    let expanded = Profile::new(roster, votes)?;
    let clone_set: BTreeSet<CandidateId> = clone_ids.into_iter().collect();
    debug_assert_eq!(is_clone_set(&expanded, &clone_set), Ok(true));
    Ok((expanded, clone_set))
}

/// Checks both clauses of independence of clones for `rule` between the
/// profile and its collapse onto `keep`.
pub fn check_independence_of_clones(
    rule: &RuleSpec,
    profile: &Profile,
    x_set: &BTreeSet<CandidateId>,
    keep: CandidateId,
) -> Result<AxiomVerdict, AxiomError> {
    let collapsed = collapse_clones(profile, x_set, keep)?;
    let winners_full = profile.names_of(&rule.winners(profile)?);
    let winners_collapsed = collapsed.names_of(&rule.winners(&collapsed)?);
    let clone_names = profile.names_of(x_set);
    let kept = profile.candidate_name(keep).to_owned();

    let mut broken = None;
    for name in profile.roster() {
        if clone_names.contains(name) {
            continue;
        }
        if winners_full.contains(name) != winners_collapsed.contains(name) {
            broken = Some(CloneClause::NonCloneChanged(name.clone()));
            break;
        }
    }
    if broken.is_none() {
        let any_clone_won = clone_names.iter().any(|x| winners_full.contains(x));
        if winners_collapsed.contains(&kept) != any_clone_won {
            broken = Some(CloneClause::CloneStatusChanged);
        }
    }
    Ok(match broken {
        None => AxiomVerdict::Pass,
        Some(broken) => AxiomVerdict::Violation(Certificate::Clones {
            clone_set: clone_names,
            kept,
            winners_full,
            winners_collapsed,
            broken,
        }),
    })
}

// ---------------------------------------------------------------------------
// Majority axioms
// ---------------------------------------------------------------------------

fn half_total(profile: &Profile) -> Rational {
    profile.total_weight() / rat(2)
}

/// Respect for cohesive majorities: every group of more than half the
/// weight whose top sets share a candidate must contain a voter who
/// top-ranks the winner.
///
/// For a fixed pair `(c, w)`, the strongest group is exactly the voters
/// with `c` on top and `w` not on top, so it suffices to weigh that group
/// instead of quantifying over all subsets.
pub fn check_cohesive_majorities(
    profile: &Profile,
    winners: &BTreeSet<CandidateId>,
) -> Result<AxiomVerdict, AxiomError> {
    if winners.is_empty() {
        return Err(AxiomError::EmptySet);
    }
    require_subset(profile, winners)?;
    let half = half_total(profile);
    for &w in winners {
        for c in profile.candidates() {
            let mut voters = Vec::new();
            let mut weight = Rational::zero();
            for (i, vote) in profile.votes().iter().enumerate() {
                let top = vote.order.top_set();
                if top.binary_search(&c).is_ok() && top.binary_search(&w).is_err() {
                    voters.push(i);
                    weight += &vote.weight;
                }
            }
            if weight > half {
                return Ok(AxiomVerdict::Violation(Certificate::CohesiveMajority {
                    common_top: profile.candidate_name(c).to_owned(),
                    excluded_winner: profile.candidate_name(w).to_owned(),
                    voters,
                    group_weight: weight,
                    half_total: half,
                    winners: profile.names_of(winners),
                }));
            }
        }
    }
    Ok(AxiomVerdict::Pass)
}

/// Slow oracle for [`check_cohesive_majorities`]: enumerates every subset
/// of ballot lines and applies the definition literally.
pub fn check_cohesive_majorities_exhaustive(
    profile: &Profile,
    winners: &BTreeSet<CandidateId>,
) -> Result<AxiomVerdict, AxiomError> {
    const MAX_LINES: usize = 20;
    if winners.is_empty() {
        return Err(AxiomError::EmptySet);
    }
    require_subset(profile, winners)?;
    let lines = profile.num_votes();
    if lines > MAX_LINES {
        return Err(AxiomError::TooManyBallotLines {
            got: lines,
            max: MAX_LINES,
        });
    }
    let half = half_total(profile);
    for mask in 1u64..(1u64 << lines) {
        let voters: Vec<usize> = (0..lines).filter(|i| mask & (1 << i) != 0).collect();
        let weight = voters
            .iter()
            .fold(Rational::zero(), |acc, &i| acc + &profile.votes()[i].weight);
        if weight <= half {
            continue;
        }
        let mut common: BTreeSet<CandidateId> = profile.votes()[voters[0]]
            .order
            .top_set()
            .iter()
            .copied()
            .collect();
        let mut union: BTreeSet<CandidateId> = BTreeSet::new();
        for &i in &voters {
            let top: BTreeSet<CandidateId> =
                profile.votes()[i].order.top_set().iter().copied().collect();
            common = common.intersection(&top).copied().collect();
            union.extend(top);
        }
        if common.is_empty() {
            continue;
        }
        if let Some(&w) = winners.iter().find(|w| !union.contains(w)) {
            let c = *common.iter().next().unwrap();
            return Ok(AxiomVerdict::Violation(Certificate::CohesiveMajority {
                common_top: profile.candidate_name(c).to_owned(),
                excluded_winner: profile.candidate_name(w).to_owned(),
                voters,
                group_weight: weight,
                half_total: half,
                winners: profile.names_of(winners),
            }));
        }
    }
    Ok(AxiomVerdict::Pass)
}

/// Respect for unanimous majorities: a group of more than half the weight
/// sharing an identical top set must contain every winner in that set.
pub fn check_unanimous_majorities(
    profile: &Profile,
    winners: &BTreeSet<CandidateId>,
) -> Result<AxiomVerdict, AxiomError> {
    if winners.is_empty() {
        return Err(AxiomError::EmptySet);
    }
    require_subset(profile, winners)?;
    let half = half_total(profile);
    let mut by_top: BTreeMap<Vec<CandidateId>, (Rational, Vec<usize>)> = BTreeMap::new();
    for (i, vote) in profile.votes().iter().enumerate() {
        let entry = by_top
            .entry(vote.order.top_set().to_vec())
            .or_insert_with(|| (Rational::zero(), Vec::new()));
        entry.0 += &vote.weight;
        entry.1.push(i);
    }
    for (top, (weight, _)) in by_top {
        if weight <= half {
            continue;
        }
        let top_set: BTreeSet<CandidateId> = top.into_iter().collect();
        let outside: BTreeSet<CandidateId> =
            winners.difference(&top_set).copied().collect();
        if !outside.is_empty() {
            return Ok(AxiomVerdict::Violation(Certificate::UnanimousMajority {
                shared_top: profile.names_of(&top_set),
                group_weight: weight,
                half_total: half,
                outside_winners: profile.names_of(&outside),
                winners: profile.names_of(winners),
            }));
        }
    }
    Ok(AxiomVerdict::Pass)
}

/// The candidates top-ranked by more than half the weight.
pub fn majority_alternatives(profile: &Profile) -> BTreeSet<CandidateId> {
    let half = half_total(profile);
    profile
        .candidates()
        .filter(|&c| {
            let weight = profile
                .votes()
                .iter()
                .filter(|v| v.order.top_set().binary_search(&c).is_ok())
                .fold(Rational::zero(), |acc, v| acc + &v.weight);
            weight > half
        })
        .collect()
}

/// Select some majority alternative: when majority alternatives exist,
/// every winner must be one.
pub fn check_select_majority_alternative(
    profile: &Profile,
    winners: &BTreeSet<CandidateId>,
) -> Result<AxiomVerdict, AxiomError> {
    if winners.is_empty() {
        return Err(AxiomError::EmptySet);
    }
    require_subset(profile, winners)?;
    let majority = majority_alternatives(profile);
    if majority.is_empty() {
        return Ok(AxiomVerdict::Pass);
    }
    match winners.iter().find(|w| !majority.contains(w)) {
        None => Ok(AxiomVerdict::Pass),
        Some(&w) => Ok(AxiomVerdict::Violation(Certificate::SelectMajority {
            majority_alternatives: profile.names_of(&majority),
            non_majority_winner: profile.candidate_name(w).to_owned(),
            winners: profile.names_of(winners),
        })),
    }
}

// ---------------------------------------------------------------------------
// Indifference monotonicity
// ---------------------------------------------------------------------------

/// Moves `c` from a singleton class into the indifference class directly
/// above it. Errors when `c` is tied with another candidate or already
/// in the top class.
pub fn c_hover(order: &WeakOrder, c: CandidateId) -> Result<WeakOrder, AxiomError> {
    let j = order.class_of(c).ok_or(AxiomError::NotInRoster)?;
    if order.classes()[j].len() != 1 {
        return Err(AxiomError::HoverNotSingleton);
    }
    if j == 0 {
        return Err(AxiomError::HoverAtTop);
    }
    let mut classes = order.classes().to_vec();
    classes.remove(j);
    classes[j - 1].push(c);
    Ok(WeakOrder::new(classes)?)
}

/// Which ballots to hover a candidate up in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoverPattern {
    /// `(ballot-line index, candidate)` pairs; for the monotonicity check
    /// every candidate must be the inspected winner.
    pub hovers: Vec<(usize, CandidateId)>,
}

impl HoverPattern {
    pub fn for_votes(c: CandidateId, votes: impl IntoIterator<Item = usize>) -> Self {
        HoverPattern {
            hovers: votes.into_iter().map(|i| (i, c)).collect(),
        }
    }

    pub fn vote_indices(&self) -> Vec<usize> {
        self.hovers.iter().map(|&(i, _)| i).collect()
    }
}

/// Applies `c`-hovers to the listed ballots.
pub fn apply_hover_pattern(
    profile: &Profile,
    c: CandidateId,
    pattern: &HoverPattern,
) -> Result<Profile, AxiomError> {
    let mut seen = BTreeSet::new();
    let mut votes: Vec<(Rational, WeakOrder)> = profile
        .votes()
        .iter()
        .map(|v| (v.weight.clone(), v.order.clone()))
        .collect();
    for (entry, &(i, target)) in pattern.hovers.iter().enumerate() {
        if target != c {
            return Err(AxiomError::BadHoverEntry(
                entry,
                format!("targets candidate {target}, expected {c}"),
            ));
        }
        if i >= votes.len() {
            return Err(AxiomError::BadHoverEntry(entry, format!("no ballot line {i}")));
        }
        if !seen.insert(i) {
            return Err(AxiomError::BadHoverEntry(
                entry,
                format!("ballot line {i} hovered twice"),
            ));
        }
        votes[i].1 = c_hover(&votes[i].1, c)
            .map_err(|e| AxiomError::BadHoverEntry(entry, e.to_string()))?;
    }
    Ok(Profile::new(profile.roster().to_vec(), votes)?)
}

/// Ballot lines where a `c`-hover is currently legal.
pub fn hoverable_votes(profile: &Profile, c: CandidateId) -> Vec<usize> {
    profile
        .votes()
        .iter()
        .enumerate()
        .filter(|(_, v)| {
            v.order
                .class_of(c)
                .is_some_and(|j| j > 0 && v.order.classes()[j].len() == 1)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Indifference monotonicity: a winner must stay winning after any set of
/// hovers that lift it into the class above.
pub fn check_indifference_monotonicity(
    rule: &RuleSpec,
    profile: &Profile,
    c: CandidateId,
    pattern: &HoverPattern,
) -> Result<AxiomVerdict, AxiomError> {
    let winners_before = rule.winners(profile)?;
    if !winners_before.contains(&c) {
        return Err(AxiomError::NotAWinner(profile.candidate_name(c).to_owned()));
    }
    let hovered = apply_hover_pattern(profile, c, pattern)?;
    let winners_after = rule.winners(&hovered)?;
    if winners_after.contains(&c) {
        Ok(AxiomVerdict::Pass)
    } else {
        Ok(AxiomVerdict::Violation(Certificate::IndifferenceMonotonicity {
            candidate: profile.candidate_name(c).to_owned(),
            hovered_votes: pattern.vote_indices(),
            winners_before: profile.names_of(&winners_before),
            winners_after: hovered.names_of(&winners_after),
        }))
    }
}

// ---------------------------------------------------------------------------
// Generalized PSC
// ---------------------------------------------------------------------------

/// Ballot lines ranking every candidate of `t_set` weakly above every
/// candidate outside it.
pub fn t_supporting_voters(
    profile: &Profile,
    t_set: &BTreeSet<CandidateId>,
) -> Result<Vec<usize>, AxiomError> {
    if t_set.is_empty() {
        return Err(AxiomError::EmptySet);
    }
    require_subset(profile, t_set)?;
    Ok(profile
        .votes()
        .iter()
        .enumerate()
        .filter(|(_, v)| supporting_depth(&v.order, t_set).is_some())
        .map(|(i, _)| i)
        .collect())
}

/// For a T-supporting order, the index of the deepest class containing a
/// T-candidate; `None` when the order is not T-supporting.
fn supporting_depth(order: &WeakOrder, t_set: &BTreeSet<CandidateId>) -> Option<usize> {
    let mut deepest_t = 0usize;
    let mut shallowest_out = usize::MAX;
    for (j, class) in order.classes().iter().enumerate() {
        for c in class {
            if t_set.contains(c) {
                deepest_t = deepest_t.max(j);
            } else {
                shallowest_out = shallowest_out.min(j);
            }
        }
    }
    (deepest_t <= shallowest_out).then_some(deepest_t)
}

/// The closure of `t_set` with respect to the supporting voters in `s`:
/// `t_set` plus every candidate some voter in `s` ties into a mixed class
/// with a T-candidate.
pub fn closure(
    profile: &Profile,
    s: &[usize],
    t_set: &BTreeSet<CandidateId>,
) -> Result<BTreeSet<CandidateId>, AxiomError> {
    if t_set.is_empty() {
        return Err(AxiomError::EmptySet);
    }
    require_subset(profile, t_set)?;
    let mut out: BTreeSet<CandidateId> = t_set.clone();
    for &i in s {
        let order = &profile
            .votes()
            .get(i)
            .ok_or(AxiomError::NotSupporting(i))?
            .order;
        let depth = supporting_depth(order, t_set).ok_or(AxiomError::NotSupporting(i))?;
        for class in &order.classes()[..=depth] {
            out.extend(class.iter().copied());
        }
    }
    Ok(out)
}

/// Default refusal caps for the exhaustive generalized-PSC check.
pub const PSC_MAX_M: usize = 10;
pub const PSC_MAX_K: usize = 5;

/// Generalized proportionality for solid coalitions, checked exhaustively:
/// for every `T` and every `ell`, no T-supporting group heavy enough to
/// deserve `ell` seats may see fewer than `ell` committee members inside
/// its closure. The group threshold is `> ell·n/(k+1)` for the Droop
/// quota and `>= ell·n/k` for Hare.
pub fn check_generalized_psc(
    profile: &Profile,
    committee: &BTreeSet<CandidateId>,
    k: usize,
    quota_kind: QuotaKind,
) -> Result<AxiomVerdict, AxiomError> {
    check_generalized_psc_capped(profile, committee, k, quota_kind, PSC_MAX_M, PSC_MAX_K)
}

/// As [`check_generalized_psc`] with explicit caps.
pub fn check_generalized_psc_capped(
    profile: &Profile,
    committee: &BTreeSet<CandidateId>,
    k: usize,
    quota_kind: QuotaKind,
    max_m: usize,
    max_k: usize,
) -> Result<AxiomVerdict, AxiomError> {
    require_subset(profile, committee)?;
    if committee.len() != k {
        return Err(AxiomError::CommitteeSize {
            got: committee.len(),
            k,
        });
    }
    let m = profile.num_candidates();
    if m > max_m || k > max_k {
        return Err(AxiomError::PscCapsExceeded { m, k, max_m, max_k });
    }
    let q = quota(&profile.total_weight(), k, quota_kind);
    let committee_vec: Vec<CandidateId> = committee.iter().copied().collect();
    let all: Vec<CandidateId> = profile.candidates().collect();

    for t_mask in 1u32..(1u32 << m) {
        let t_set: BTreeSet<CandidateId> = all
            .iter()
            .copied()
            .filter(|c| t_mask & (1 << c.0) != 0)
            .collect();
        // per supporting voter: weight and closure ∩ committee as a mask
        let mut supporters: Vec<(usize, Rational, u32)> = Vec::new();
        for (i, vote) in profile.votes().iter().enumerate() {
            let Some(depth) = supporting_depth(&vote.order, &t_set) else {
                continue;
            };
            let mut wmask = 0u32;
            for class in &vote.order.classes()[..=depth] {
                for c in class {
                    if let Some(pos) = committee_vec.iter().position(|w| w == c) {
                        wmask |= 1 << pos;
                    }
                }
            }
            supporters.push((i, vote.weight.clone(), wmask));
        }
        if supporters.is_empty() {
            continue;
        }
        let max_ell = t_set.len().min(k + 1);
        for ell in 1..=max_ell {
            let threshold = &q * rat(ell as i64);
            // groups whose closures hit the committee only inside some
            // (ell-1)-subset V; checking |V| = ell-1 covers all smaller V
            for v_mask in 0u32..(1u32 << k) {
                if v_mask.count_ones() as usize != ell - 1 {
                    continue;
                }
                let mut voters = Vec::new();
                let mut weight = Rational::zero();
                let mut inside = 0u32;
                for (i, w, wmask) in &supporters {
                    if wmask & !v_mask == 0 {
                        voters.push(*i);
                        weight += w;
                        inside |= wmask;
                    }
                }
                let heavy = match quota_kind {
                    QuotaKind::Droop => weight > threshold,
                    QuotaKind::Hare => weight >= threshold,
                };
                if heavy {
                    let committee_inside: BTreeSet<CandidateId> = committee_vec
                        .iter()
                        .enumerate()
                        .filter(|(pos, _)| inside & (1 << pos) != 0)
                        .map(|(_, &c)| c)
                        .collect();
                    return Ok(AxiomVerdict::Violation(Certificate::GeneralizedPsc {
                        t_set: profile.names_of(&t_set),
                        ell,
                        committee_inside: profile.names_of(&committee_inside),
                        voters,
                        group_weight: weight,
                        threshold,
                        committee: profile.names_of(committee),
                    }));
                }
            }
        }
    }
    Ok(AxiomVerdict::Pass)
}

// ---------------------------------------------------------------------------
// Certificate revalidation
// ---------------------------------------------------------------------------

/// Replays a violation certificate against the raw definition it cites.
/// `rule` is needed for the axioms that quantify over rule outcomes
/// (clones, indifference monotonicity) and to confirm stored winner sets.
/// Returns `Ok(true)` when the certificate proves the violation.
pub fn revalidate(
    profile: &Profile,
    rule: Option<&RuleSpec>,
    verdict: &AxiomVerdict,
) -> Result<bool, AxiomError> {
    let cert = match verdict {
        AxiomVerdict::Pass => return Ok(true),
        AxiomVerdict::Violation(cert) => cert,
    };
    let resolve = |name: &String| -> Result<CandidateId, AxiomError> {
        Ok(profile.require_candidate(name)?)
    };
    match cert {
        Certificate::Clones {
            clone_set,
            kept,
            winners_full,
            winners_collapsed,
            broken,
        } => {
            let rule = rule.ok_or(AxiomError::NeedsStvRule)?;
            let x_set: BTreeSet<CandidateId> = clone_set
                .iter()
                .map(resolve)
                .collect::<Result<_, _>>()?;
            if !is_clone_set(profile, &x_set)? {
                return Ok(false);
            }
            let keep = resolve(kept)?;
            let collapsed = collapse_clones(profile, &x_set, keep)?;
            let full = profile.names_of(&rule.winners(profile)?);
            let coll = collapsed.names_of(&rule.winners(&collapsed)?);
            if &full != winners_full || &coll != winners_collapsed {
                return Ok(false);
            }
            Ok(match broken {
                CloneClause::NonCloneChanged(name) => {
                    !clone_set.contains(name) && full.contains(name) != coll.contains(name)
                }
                CloneClause::CloneStatusChanged => {
                    let any_clone_won = clone_set.iter().any(|x| full.contains(x));
                    coll.contains(kept) != any_clone_won
                }
            })
        }
        Certificate::CohesiveMajority {
            common_top,
            excluded_winner,
            voters,
            winners,
            ..
        } => {
            let c = resolve(common_top)?;
            let w = resolve(excluded_winner)?;
            if !winners.contains(excluded_winner) {
                return Ok(false);
            }
            if let Some(rule) = rule {
                if &profile.names_of(&rule.winners(profile)?) != winners {
                    return Ok(false);
                }
            }
            let mut weight = Rational::zero();
            for &i in voters {
                let vote = profile
                    .votes()
                    .get(i)
                    .ok_or_else(|| AxiomError::BadCertificate(format!("no ballot line {i}")))?;
                let top = vote.order.top_set();
                if top.binary_search(&c).is_err() || top.binary_search(&w).is_ok() {
                    return Ok(false);
                }
                weight += &vote.weight;
            }
            Ok(weight > half_total(profile))
        }
        Certificate::UnanimousMajority {
            shared_top,
            outside_winners,
            winners,
            ..
        } => {
            if let Some(rule) = rule {
                if &profile.names_of(&rule.winners(profile)?) != winners {
                    return Ok(false);
                }
            }
            let tops: BTreeSet<CandidateId> =
                shared_top.iter().map(resolve).collect::<Result<_, _>>()?;
            let top_vec: Vec<CandidateId> = tops.iter().copied().collect();
            let weight = profile
                .votes()
                .iter()
                .filter(|v| v.order.top_set() == top_vec.as_slice())
                .fold(Rational::zero(), |acc, v| acc + &v.weight);
            Ok(weight > half_total(profile)
                && outside_winners
                    .iter()
                    .all(|w| winners.contains(w) && !shared_top.contains(w))
                && !outside_winners.is_empty())
        }
        Certificate::SelectMajority {
            majority_alternatives: stored,
            non_majority_winner,
            winners,
        } => {
            if let Some(rule) = rule {
                if &profile.names_of(&rule.winners(profile)?) != winners {
                    return Ok(false);
                }
            }
            let majority = profile.names_of(&majority_alternatives(profile));
            Ok(&majority == stored
                && !majority.is_empty()
                && winners.contains(non_majority_winner)
                && !majority.contains(non_majority_winner))
        }
        Certificate::IndifferenceMonotonicity {
            candidate,
            hovered_votes,
            ..
        } => {
            let rule = rule.ok_or(AxiomError::NeedsStvRule)?;
            let c = resolve(candidate)?;
            let before = rule.winners(profile)?;
            if !before.contains(&c) {
                return Ok(false);
            }
            let pattern = HoverPattern::for_votes(c, hovered_votes.iter().copied());
            let hovered = apply_hover_pattern(profile, c, &pattern)?;
            Ok(!rule.winners(&hovered)?.contains(&c))
        }
        Certificate::GeneralizedPsc {
            t_set,
            ell,
            voters,
            committee,
            ..
        } => {
            let t: BTreeSet<CandidateId> =
                t_set.iter().map(resolve).collect::<Result<_, _>>()?;
            let w_set: BTreeSet<CandidateId> =
                committee.iter().map(resolve).collect::<Result<_, _>>()?;
            let k = w_set.len();
            // the certificate's quota semantics is recoverable from the
            // threshold: threshold = ell * n/(k+1) for Droop, ell * n/k Hare
            let n = profile.total_weight();
            let (threshold_stored, weight_stored) = match cert {
                Certificate::GeneralizedPsc {
                    threshold,
                    group_weight,
                    ..
                } => (threshold.clone(), group_weight.clone()),
                _ => unreachable!(),
            };
            let droop_threshold = quota(&n, k, QuotaKind::Droop) * rat(*ell as i64);
            let hare_threshold = quota(&n, k, QuotaKind::Hare) * rat(*ell as i64);
            let heavy = if threshold_stored == droop_threshold {
                weight_stored > threshold_stored
            } else if threshold_stored == hare_threshold {
                weight_stored >= threshold_stored
            } else {
                return Ok(false);
            };
            if !heavy || *ell > t.len() {
                return Ok(false);
            }
            let cl = closure(profile, voters, &t)?;
            let weight = voters
                .iter()
                .fold(Rational::zero(), |acc, &i| acc + &profile.votes()[i].weight);
            Ok(weight == weight_stored && w_set.intersection(&cl).count() < *ell)
        }
    }
}
