//! Elimination scoring rules with parallel-universe tie-breaking.
//!
//! The rule associated with a scoring system repeatedly deletes a
//! lowest-scoring candidate until one remains. Ties are handled by
//! parallel-universe tie-breaking (PUT): the winner set is the union of
//! the outcomes over every way of breaking every elimination tie. The
//! fast path memoizes on the bitmask of remaining candidates, so a full
//! run costs `O(2^m · n·m²)` in the worst case; the reachable subset
//! count is far smaller on profiles without systematic ties.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::scoring::{positional_scores, Score, ScoringError, ScoringSystem};
use crate::types::{CandidateId, OrderType, Profile, ProfileError};

/// Refuse the exponential PUT table beyond this many candidates unless a
/// caller opts into a higher cap explicitly.
pub const DEFAULT_CANDIDATE_CAP: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("{m} candidates exceed the PUT cap of {cap}")]
    TooManyCandidates { m: usize, cap: usize },
}

/// Nonempty set of tied winners.
#[derive(Clone, PartialEq, Eq)]
pub struct WinnerSet(BTreeSet<CandidateId>);

impl WinnerSet {
    pub fn new(set: BTreeSet<CandidateId>) -> Option<Self> {
        if set.is_empty() {
            None
        } else {
            Some(WinnerSet(set))
        }
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.0.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = CandidateId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_set(&self) -> &BTreeSet<CandidateId> {
        &self.0
    }

    pub fn into_set(self) -> BTreeSet<CandidateId> {
        self.0
    }

    /// The single winner, if untied.
    pub fn unique(&self) -> Option<CandidateId> {
        if self.0.len() == 1 {
            self.0.iter().next().copied()
        } else {
            None
        }
    }
}

impl fmt::Debug for WinnerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a WinnerSet {
    type Item = CandidateId;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, CandidateId>>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// Ballots with classes pre-encoded as candidate bitmasks, so scores in a
/// remaining-candidate subset can be accumulated without materializing
/// restricted profiles.
struct MaskedProfile<'a> {
    system: &'a ScoringSystem,
    ballots: Vec<(Score, Vec<u64>)>,
    m: usize,
}

impl<'a> MaskedProfile<'a> {
    fn new(profile: &Profile, system: &'a ScoringSystem) -> Self {
        let ballots = profile
            .votes()
            .iter()
            .filter(|v| !v.weight.is_zero())
            .map(|v| {
                let masks = v
                    .order
                    .classes()
                    .iter()
                    .map(|class| class.iter().fold(0u64, |m, c| m | (1u64 << c.0)))
                    .collect();
                (v.weight.clone(), masks)
            })
            .collect();
        MaskedProfile {
            system,
            ballots,
            m: profile.num_candidates(),
        }
    }

    /// Scores of the candidates in `remaining` under the profile restricted
    /// to `remaining`. Entries outside the mask stay zero.
    fn scores(
        &self,
        remaining: u64,
        vectors: &mut HashMap<OrderType, Vec<Score>>,
    ) -> Result<Vec<Score>, ScoringError> {
        let mut scores = vec![Score::zero(); self.m];
        let mut restricted: Vec<u64> = Vec::with_capacity(8);
        for (weight, classes) in &self.ballots {
            restricted.clear();
            for &cm in classes {
                let cm = cm & remaining;
                if cm != 0 {
                    restricted.push(cm);
                }
            }
            let t = OrderType::new(restricted.iter().map(|cm| cm.count_ones() as usize).collect())
                .expect("restriction keeps at least one candidate");
            let vector = match vectors.get(&t) {
                Some(v) => v,
                None => {
                    let v = self.system.score_vector(&t)?;
                    vectors.entry(t.clone()).or_insert(v)
                }
            };
            for (j, &cm) in restricted.iter().enumerate() {
                if vector[j].is_zero() {
                    continue;
                }
                let gain = &vector[j] * weight;
                let mut bits = cm;
                while bits != 0 {
                    let c = bits.trailing_zeros() as usize;
                    scores[c] += &gain;
                    bits &= bits - 1;
                }
            }
        }
        Ok(scores)
    }
}

fn lowest_scoring_mask(scores: &[Score], remaining: u64) -> u64 {
    let mut min: Option<&Score> = None;
    let mut bits = remaining;
    while bits != 0 {
        let c = bits.trailing_zeros() as usize;
        if min.map_or(true, |m| &scores[c] < m) {
            min = Some(&scores[c]);
        }
        bits &= bits - 1;
    }
    let min = min.expect("remaining set is nonempty");
    let mut out = 0u64;
    let mut bits = remaining;
    while bits != 0 {
        let c = bits.trailing_zeros() as usize;
        if &scores[c] == min {
            out |= 1u64 << c;
        }
        bits &= bits - 1;
    }
    out
}

struct PutContext<'a> {
    masked: MaskedProfile<'a>,
    vectors: HashMap<OrderType, Vec<Score>>,
    memo: HashMap<u64, u64>,
}

fn put_rec(ctx: &mut PutContext, remaining: u64) -> Result<u64, ScoringError> {
    if remaining.count_ones() == 1 {
        return Ok(remaining);
    }
    if let Some(&w) = ctx.memo.get(&remaining) {
        return Ok(w);
    }
    let scores = ctx.masked.scores(remaining, &mut ctx.vectors)?;
    let lowest = lowest_scoring_mask(&scores, remaining);
    let mut winners = 0u64;
    let mut bits = lowest;
    while bits != 0 {
        let c = bits.trailing_zeros();
        winners |= put_rec(ctx, remaining & !(1u64 << c))?;
        bits &= bits - 1;
    }
    ctx.memo.insert(remaining, winners);
    Ok(winners)
}

/// Exact PUT winner set of the elimination scoring rule for `system`,
/// with the default candidate cap.
pub fn put_winners(profile: &Profile, system: &ScoringSystem) -> Result<WinnerSet, RuleError> {
    put_winners_capped(profile, system, DEFAULT_CANDIDATE_CAP)
}

/// As [`put_winners`] with an explicit cap on the number of candidates.
pub fn put_winners_capped(
    profile: &Profile,
    system: &ScoringSystem,
    cap: usize,
) -> Result<WinnerSet, RuleError> {
    profile.require_tallyable()?;
    let m = profile.num_candidates();
    if m > cap || m > 63 {
        return Err(RuleError::TooManyCandidates { m, cap: cap.min(63) });
    }
    let mut ctx = PutContext {
        masked: MaskedProfile::new(profile, system),
        vectors: HashMap::new(),
        memo: HashMap::new(),
    };
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let winners = put_rec(&mut ctx, full)?;
    let set = (0..m as u32)
        .map(CandidateId)
        .filter(|c| winners & (1u64 << c.0) != 0)
        .collect();
    Ok(WinnerSet::new(set).expect("PUT returns at least one winner"))
}

/// Literal unmemoized recursion of the rule definition, materializing a
/// restricted profile for every branch. Exponentially slower than
/// [`put_winners`]; kept as an independent oracle.
pub fn put_winners_naive(
    profile: &Profile,
    system: &ScoringSystem,
) -> Result<WinnerSet, RuleError> {
    profile.require_tallyable()?;
    let names = naive_rec(profile, system)?;
    let set = names
        .iter()
        .map(|n| profile.candidate_by_name(n).expect("winner name in roster"))
        .collect();
    Ok(WinnerSet::new(set).expect("nonempty winner set"))
}

fn naive_rec(profile: &Profile, system: &ScoringSystem) -> Result<BTreeSet<String>, RuleError> {
    if profile.num_candidates() == 1 {
        return Ok(BTreeSet::from([profile.roster()[0].clone()]));
    }
    let scores = positional_scores(profile, system)?;
    let min = scores.values().min().expect("nonempty roster").clone();
    let mut winners = BTreeSet::new();
    for (&c, score) in &scores {
        if *score == min {
            let mut keep = profile.candidate_set();
            keep.remove(&c);
            let sub = profile.restrict_to(&keep)?;
            winners.extend(naive_rec(&sub, system)?);
        }
    }
    Ok(winners)
}

/// Policy for picking one candidate out of a tied set in deterministic
/// (single-universe) runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tiebreak {
    /// Lowest roster index goes first.
    Lexicographic,
    /// Explicit priority list; candidates named earlier are picked first,
    /// unlisted candidates come after all listed ones in roster order.
    Priority(Vec<CandidateId>),
}

impl Tiebreak {
    /// Picks the policy's representative from a nonempty tied set.
    pub fn pick(&self, tied: &BTreeSet<CandidateId>) -> CandidateId {
        match self {
            Tiebreak::Lexicographic => *tied.iter().next().expect("tied set nonempty"),
            Tiebreak::Priority(list) => {
                let rank = |c: &CandidateId| {
                    list.iter()
                        .position(|p| p == c)
                        .map_or((1, c.0), |i| (0, i as u32))
                };
                *tied.iter().min_by_key(|c| rank(c)).expect("tied set nonempty")
            }
        }
    }

    pub fn describe(&self, profile: &Profile) -> String {
        match self {
            Tiebreak::Lexicographic => "lexicographic".to_owned(),
            Tiebreak::Priority(list) => format!("priority:{}", profile.describe_set(list)),
        }
    }
}

/// One round of a deterministic elimination run.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRound {
    pub remaining: BTreeSet<CandidateId>,
    pub scores: BTreeMap<CandidateId, Score>,
    pub eliminated: CandidateId,
}

/// A single concrete elimination sequence under a declared tie-break
/// policy. This is one universe of the PUT recursion, recorded for audit
/// output; the rule's winner semantics stays [`put_winners`].
#[derive(Clone, Debug, PartialEq)]
pub struct EliminationTrace {
    pub rounds: Vec<TraceRound>,
    pub winner: CandidateId,
    /// Human-readable policy tag, echoed into audit output.
    pub tiebreak: String,
}

impl EliminationTrace {
    pub fn elimination_order(&self) -> Vec<CandidateId> {
        self.rounds.iter().map(|r| r.eliminated).collect()
    }
}

/// Runs the elimination rule in a single universe, breaking every score
/// tie with `tiebreak`.
pub fn elimination_trace(
    profile: &Profile,
    system: &ScoringSystem,
    tiebreak: &Tiebreak,
) -> Result<EliminationTrace, RuleError> {
    profile.require_tallyable()?;
    let m = profile.num_candidates();
    if m > 63 {
        return Err(RuleError::TooManyCandidates { m, cap: 63 });
    }
    let masked = MaskedProfile::new(profile, system);
    let mut vectors = HashMap::new();
    let mut remaining_mask = (1u64 << m) - 1;
    let mut rounds = Vec::with_capacity(m.saturating_sub(1));
    while remaining_mask.count_ones() > 1 {
        let scores = masked.scores(remaining_mask, &mut vectors)?;
        let lowest = lowest_scoring_mask(&scores, remaining_mask);
        let tied: BTreeSet<CandidateId> = (0..m as u32)
            .map(CandidateId)
            .filter(|c| lowest & (1u64 << c.0) != 0)
            .collect();
        let eliminated = tiebreak.pick(&tied);
        let remaining: BTreeSet<CandidateId> = (0..m as u32)
            .map(CandidateId)
            .filter(|c| remaining_mask & (1u64 << c.0) != 0)
            .collect();
        let score_map = remaining
            .iter()
            .map(|&c| (c, scores[c.index()].clone()))
            .collect();
        rounds.push(TraceRound {
            remaining,
            scores: score_map,
            eliminated,
        });
        remaining_mask &= !(1u64 << eliminated.0);
    }
    let winner = CandidateId(remaining_mask.trailing_zeros());
    Ok(EliminationTrace {
        rounds,
        winner,
        tiebreak: tiebreak.describe(profile),
    })
}

/// Approval-IRV: the elimination scoring rule of the approval system.
pub fn approval_irv(profile: &Profile) -> Result<WinnerSet, RuleError> {
    put_winners(profile, &ScoringSystem::Approval)
}

/// Split-IRV: the elimination scoring rule of the split system.
pub fn split_irv(profile: &Profile) -> Result<WinnerSet, RuleError> {
    put_winners(profile, &ScoringSystem::Split)
}

/// Baldwin-style extension: elimination under the Borda-style system.
pub fn baldwin_weak(profile: &Profile) -> Result<WinnerSet, RuleError> {
    put_winners(profile, &ScoringSystem::BordaStyle)
}
