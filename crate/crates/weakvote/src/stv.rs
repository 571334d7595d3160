//! Multi-winner rules: Approval-STV and Split-STV.
//!
//! Every voter starts with a budget of 1. A candidate supported by voters
//! whose (willing) budgets exceed the quota is elected and its supporters
//! pay the quota between them; otherwise a candidate is eliminated. The
//! run continues until no candidates remain, which fills the committee
//! exactly: whenever fewer than `k` candidates are elected, the last
//! remaining candidate is always affordable.
//!
//! In approval mode a supporter offers its whole remaining budget; in
//! split mode a voter whose effective top class has `t` remaining
//! candidates offers only `b/t` to each.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::rules::Tiebreak;
use crate::types::{rat, CandidateId, Profile, ProfileError, Rational};

#[derive(Debug, Error, PartialEq)]
pub enum StvError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("committee size {k} is not between 1 and {m}")]
    BadCommitteeSize { k: usize, m: usize },
}

/// Quota rule. Droop elects on strictly exceeding `n/(k+1)`; Hare elects
/// on weakly reaching `n/k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotaKind {
    Droop,
    Hare,
}

impl QuotaKind {
    /// True when a support total makes a candidate electable.
    pub fn electable(self, support: &Rational, q: &Rational) -> bool {
        match self {
            QuotaKind::Droop => support > q,
            QuotaKind::Hare => support >= q,
        }
    }
}

impl fmt::Display for QuotaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuotaKind::Droop => write!(f, "droop"),
            QuotaKind::Hare => write!(f, "hare"),
        }
    }
}

/// Exact quota value: `n/(k+1)` for Droop, `n/k` for Hare.
pub fn quota(n: &Rational, k: usize, kind: QuotaKind) -> Rational {
    match kind {
        QuotaKind::Droop => n / rat(k as i64 + 1),
        QuotaKind::Hare => n / rat(k as i64),
    }
}

/// How to choose among several electable candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Selection {
    /// The candidate whose supporters offer the most budget (Scotland's
    /// practice). Ties fall through to the configured tie-break.
    #[default]
    HighestSupportBudget,
    /// The first electable candidate in tie-break priority order.
    FirstEligibleByPriority,
}

/// How elected candidates' supporters share the quota payment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Payment {
    /// Scale every supporter's offer by the common factor `(B-q)/B`
    /// (Gregory method).
    #[default]
    Gregory,
    /// Equal-shares style: every supporter pays `min(offer, cap)` with the
    /// cap chosen so the payments sum to exactly `q`.
    UniformCap,
}

/// How to choose the candidate to eliminate when nobody is electable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Elimination {
    /// Lowest offered supporter budget (Scotland's practice).
    #[default]
    LowestSupportBudget,
    /// Lowest score by ballot weight, ignoring remaining budgets; in
    /// approval mode this is the approval score of the restricted profile.
    LowestScore,
}

/// Policy bundle for an STV run. The defaults mirror common practice:
/// Droop quota, highest-support selection, Gregory payments,
/// lowest-support elimination, lexicographic tie-break.
#[derive(Clone, Debug, PartialEq)]
pub struct StvConfig {
    pub quota: QuotaKind,
    pub selection: Selection,
    pub payment: Payment,
    pub elimination: Elimination,
    pub tiebreak: Tiebreak,
}

impl Default for StvConfig {
    fn default() -> Self {
        StvConfig {
            quota: QuotaKind::Droop,
            selection: Selection::default(),
            payment: Payment::default(),
            elimination: Elimination::default(),
            tiebreak: Tiebreak::Lexicographic,
        }
    }
}

impl StvConfig {
    pub fn describe(&self) -> String {
        format!(
            "quota={} selection={:?} payment={:?} elimination={:?}",
            self.quota, self.selection, self.payment, self.elimination
        )
    }
}

/// Whether supporters offer full budgets or split them across their
/// effective top class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StvMode {
    Approval,
    Split,
}

/// What happened in one round.
#[derive(Clone, Debug, PartialEq)]
pub enum StvAction {
    Elect {
        candidate: CandidateId,
        support: Rational,
        /// `(vote index, amount paid)` for every paying supporter.
        payments: Vec<(usize, Rational)>,
    },
    Eliminate {
        candidate: CandidateId,
        support: Rational,
    },
}

/// Snapshot of one round: the support totals and supporter sets that drove
/// the decision, the action taken, and the budgets after it.
#[derive(Clone, Debug, PartialEq)]
pub struct StvRound {
    pub remaining: BTreeSet<CandidateId>,
    pub elected_before: Vec<CandidateId>,
    pub support: BTreeMap<CandidateId, Rational>,
    pub supporters: BTreeMap<CandidateId, Vec<usize>>,
    pub action: StvAction,
    pub budgets_after: Vec<Rational>,
}

/// Full audit record of an STV run.
#[derive(Clone, Debug, PartialEq)]
pub struct StvTrace {
    pub mode: StvMode,
    pub k: usize,
    pub quota_kind: QuotaKind,
    pub quota: Rational,
    pub total_weight: Rational,
    pub rounds: Vec<StvRound>,
    pub committee: Vec<CandidateId>,
}

impl StvTrace {
    /// Money conservation: after every round, the budgets plus `q` per
    /// elected seat add up to the total voting weight exactly.
    pub fn money_conserved(&self) -> bool {
        let mut elected = 0usize;
        for round in &self.rounds {
            if matches!(round.action, StvAction::Elect { .. }) {
                elected += 1;
            }
            let held: Rational = round
                .budgets_after
                .iter()
                .fold(Rational::zero(), |acc, b| acc + b);
            if held + &self.quota * rat(elected as i64) != self.total_weight {
                return false;
            }
            if round.budgets_after.iter().any(|b| b < &Rational::zero()) {
                return false;
            }
        }
        true
    }

    /// The per-round invariant behind the proportionality guarantee: for a
    /// declared group certificate `(S, T, ell)`, the number of committee
    /// seats already inside the closure of `T` plus the number of
    /// `T`-candidates still remaining never drops below `ell`.
    pub fn psc_round_invariant(
        &self,
        closure: &BTreeSet<CandidateId>,
        t_set: &BTreeSet<CandidateId>,
        ell: usize,
    ) -> bool {
        let mut elected_in_closure = 0usize;
        let mut remaining_in_t = t_set.len();
        if remaining_in_t < ell {
            return false;
        }
        for round in &self.rounds {
            match &round.action {
                StvAction::Elect { candidate, .. } => {
                    if closure.contains(candidate) {
                        elected_in_closure += 1;
                    }
                    if t_set.contains(candidate) {
                        remaining_in_t -= 1;
                    }
                }
                StvAction::Eliminate { candidate, .. } => {
                    if t_set.contains(candidate) {
                        remaining_in_t -= 1;
                    }
                }
            }
            if elected_in_closure + remaining_in_t < ell {
                return false;
            }
        }
        true
    }

    pub fn elections(&self) -> impl Iterator<Item = (usize, CandidateId)> + '_ {
        self.rounds
            .iter()
            .enumerate()
            .filter_map(|(i, r)| match r.action {
                StvAction::Elect { candidate, .. } => Some((i, candidate)),
                _ => None,
            })
    }

    pub fn eliminations(&self) -> impl Iterator<Item = (usize, CandidateId)> + '_ {
        self.rounds
            .iter()
            .enumerate()
            .filter_map(|(i, r)| match r.action {
                StvAction::Eliminate { candidate, .. } => Some((i, candidate)),
                _ => None,
            })
    }
}

/// Gregory surplus transfer: every supporter's budget is multiplied by
/// `(B-q)/B`, where `B` is the supporters' total budget, so the group pays
/// exactly `q`.
pub fn gregory_reduce(
    budgets: &[Rational],
    supporters: &[usize],
    q: &Rational,
) -> Result<Vec<Rational>, StvError> {
    let total: Rational = supporters
        .iter()
        .fold(Rational::zero(), |acc, &i| acc + &budgets[i]);
    // electability guarantees B >= q; anything else is an engine bug
    assert!(
        &total >= q,
        "gregory transfer with supporter budget below quota"
    );
    let factor = (&total - q) / &total;
    let mut out = budgets.to_vec();
    for &i in supporters {
        out[i] = &budgets[i] * &factor;
    }
    Ok(out)
}

/// Finds the uniform payment cap: the value such that charging every
/// contribution `min(c_i, cap)` raises exactly `q`. Contributions must sum
/// to at least `q`.
fn uniform_cap(contributions: &[Rational], q: &Rational) -> Rational {
    let mut sorted: Vec<&Rational> = contributions.iter().collect();
    sorted.sort();
    let s = sorted.len();
    let mut paid_below = Rational::zero();
    for (j, &c) in sorted.iter().enumerate() {
        // voters before j pay their whole contribution; the rest pay cap
        let payers_at_cap = rat((s - j) as i64);
        let cap = (q - &paid_below) / &payers_at_cap;
        if &cap <= c {
            return cap;
        }
        paid_below += c;
    }
    // everyone pays in full (total exactly q, the Hare boundary)
    sorted.last().map(|c| (*c).clone()).unwrap_or_else(Rational::zero)
}

struct Engine<'a> {
    profile: &'a Profile,
    mode: StvMode,
    config: &'a StvConfig,
    q: Rational,
    budgets: Vec<Rational>,
    remaining: BTreeSet<CandidateId>,
    committee: Vec<CandidateId>,
}

impl<'a> Engine<'a> {
    /// Supporter set and offered budget of every remaining candidate.
    /// A voter supports every candidate in its top class restricted to
    /// the remaining set, and offers `b` (approval) or `b/t` (split).
    fn survey(&self) -> (BTreeMap<CandidateId, Vec<usize>>, BTreeMap<CandidateId, Rational>) {
        let mut supporters: BTreeMap<CandidateId, Vec<usize>> = self
            .remaining
            .iter()
            .map(|&c| (c, Vec::new()))
            .collect();
        let mut support: BTreeMap<CandidateId, Rational> = self
            .remaining
            .iter()
            .map(|&c| (c, Rational::zero()))
            .collect();
        for (i, vote) in self.profile.votes().iter().enumerate() {
            let top = effective_top(&vote.order, &self.remaining);
            let offer = match self.mode {
                StvMode::Approval => self.budgets[i].clone(),
                StvMode::Split => &self.budgets[i] / rat(top.len() as i64),
            };
            for &c in &top {
                supporters.get_mut(&c).unwrap().push(i);
                *support.get_mut(&c).unwrap() += &offer;
            }
        }
        (supporters, support)
    }

    /// Ballot-weight score used by the `LowestScore` elimination policy.
    fn weight_scores(&self) -> BTreeMap<CandidateId, Rational> {
        let mut scores: BTreeMap<CandidateId, Rational> = self
            .remaining
            .iter()
            .map(|&c| (c, Rational::zero()))
            .collect();
        for vote in self.profile.votes() {
            let top = effective_top(&vote.order, &self.remaining);
            let gain = match self.mode {
                StvMode::Approval => vote.weight.clone(),
                StvMode::Split => &vote.weight / rat(top.len() as i64),
            };
            for &c in &top {
                *scores.get_mut(&c).unwrap() += &gain;
            }
        }
        scores
    }

    /// What voter `i` currently offers: its budget, or its budget split
    /// across its effective top class.
    fn offer_of(&self, i: usize) -> Rational {
        match self.mode {
            StvMode::Approval => self.budgets[i].clone(),
            StvMode::Split => {
                let t = effective_top(&self.profile.votes()[i].order, &self.remaining).len();
                &self.budgets[i] / rat(t as i64)
            }
        }
    }

    fn run(&mut self, k: usize) -> Vec<StvRound> {
        let mut rounds = Vec::new();
        while !self.remaining.is_empty() {
            let (supporters, support) = self.survey();
            let eligible: BTreeSet<CandidateId> = self
                .remaining
                .iter()
                .copied()
                .filter(|c| self.config.quota.electable(&support[c], &self.q))
                .collect();
            let remaining_before = self.remaining.clone();
            let elected_before = self.committee.clone();
            let action = if !eligible.is_empty() {
                let candidate = match self.config.selection {
                    Selection::HighestSupportBudget => {
                        let best = eligible
                            .iter()
                            .map(|c| &support[c])
                            .max()
                            .expect("eligible set nonempty");
                        let tied: BTreeSet<CandidateId> = eligible
                            .iter()
                            .copied()
                            .filter(|c| &support[c] == best)
                            .collect();
                        self.config.tiebreak.pick(&tied)
                    }
                    Selection::FirstEligibleByPriority => self.config.tiebreak.pick(&eligible),
                };
                let payments = self.pay(&supporters[&candidate], &support[&candidate]);
                self.committee.push(candidate);
                self.remaining.remove(&candidate);
                StvAction::Elect {
                    candidate,
                    support: support[&candidate].clone(),
                    payments,
                }
            } else {
                let values = match self.config.elimination {
                    Elimination::LowestSupportBudget => support.clone(),
                    Elimination::LowestScore => self.weight_scores(),
                };
                let worst = values.values().min().expect("remaining nonempty").clone();
                let tied: BTreeSet<CandidateId> = values
                    .iter()
                    .filter(|(_, v)| **v == worst)
                    .map(|(&c, _)| c)
                    .collect();
                let candidate = self.config.tiebreak.pick(&tied);
                self.remaining.remove(&candidate);
                StvAction::Eliminate {
                    candidate,
                    support: support[&candidate].clone(),
                }
            };
            rounds.push(StvRound {
                remaining: remaining_before,
                elected_before,
                support,
                supporters,
                action,
                budgets_after: self.budgets.clone(),
            });
        }
        assert_eq!(
            self.committee.len(),
            k,
            "an STV run always fills the committee"
        );
        rounds
    }

    /// Charges the elected candidate's supporters a total of exactly `q`
    /// and returns the per-voter payments.
    fn pay(&mut self, supporters: &[usize], support: &Rational) -> Vec<(usize, Rational)> {
        let offers: Vec<Rational> = supporters.iter().map(|&i| self.offer_of(i)).collect();
        let mut payments = Vec::with_capacity(supporters.len());
        match self.config.payment {
            Payment::Gregory => {
                // every offer is scaled by q/B, so budgets shrink by a
                // common factor in approval mode
                for (&i, offer) in supporters.iter().zip(&offers) {
                    let pay = offer * &self.q / support;
                    self.budgets[i] -= &pay;
                    payments.push((i, pay));
                }
            }
            Payment::UniformCap => {
                let cap = uniform_cap(&offers, &self.q);
                for (&i, offer) in supporters.iter().zip(&offers) {
                    let pay = offer.min(&cap).clone();
                    self.budgets[i] -= &pay;
                    payments.push((i, pay));
                }
            }
        }
        payments
    }
}

/// Top indifference class of `order` restricted to `remaining`.
fn effective_top(order: &crate::types::WeakOrder, remaining: &BTreeSet<CandidateId>) -> Vec<CandidateId> {
    for class in order.classes() {
        let top: Vec<CandidateId> = class
            .iter()
            .copied()
            .filter(|c| remaining.contains(c))
            .collect();
        if !top.is_empty() {
            return top;
        }
    }
    unreachable!("profile orders cover the roster, so some class intersects")
}

fn run_stv(
    profile: &Profile,
    k: usize,
    config: &StvConfig,
    mode: StvMode,
) -> Result<(Vec<CandidateId>, StvTrace), StvError> {
    profile.require_tallyable()?;
    let m = profile.num_candidates();
    if k == 0 || k > m {
        return Err(StvError::BadCommitteeSize { k, m });
    }
    let n = profile.total_weight();
    let q = quota(&n, k, config.quota);
    let mut engine = Engine {
        profile,
        mode,
        config,
        q: q.clone(),
        budgets: profile.votes().iter().map(|v| v.weight.clone()).collect(),
        remaining: profile.candidate_set(),
        committee: Vec::new(),
    };
    let rounds = engine.run(k);
    let committee = engine.committee.clone();
    let trace = StvTrace {
        mode,
        k,
        quota_kind: config.quota,
        quota: q,
        total_weight: n,
        rounds,
        committee: committee.clone(),
    };
    debug_assert!(trace.money_conserved());
    Ok((committee, trace))
}

/// Approval-STV: supporters offer their full remaining budget.
pub fn approval_stv(
    profile: &Profile,
    k: usize,
    config: &StvConfig,
) -> Result<(Vec<CandidateId>, StvTrace), StvError> {
    run_stv(profile, k, config, StvMode::Approval)
}

/// Split-STV: a voter with `t` remaining top-class candidates offers only
/// `b/t` to each of them.
pub fn split_stv(
    profile: &Profile,
    k: usize,
    config: &StvConfig,
) -> Result<(Vec<CandidateId>, StvTrace), StvError> {
    run_stv(profile, k, config, StvMode::Split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::*;
    use crate::types::ratio;

    #[test]
    fn quota_values() {
        assert_eq!(quota(&rat(5), 1, QuotaKind::Droop), ratio(5, 2));
        assert_eq!(quota(&rat(6), 2, QuotaKind::Droop), rat(2));
        assert_eq!(quota(&rat(6), 1, QuotaKind::Hare), rat(6));
    }

    #[test]
    fn gregory_examples() {
        let budgets = vec![rat(1), rat(1), rat(1)];
        let out = gregory_reduce(&budgets, &[0, 1, 2], &rat(2)).unwrap();
        assert_eq!(out, vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)]);

        // Hare boundary: supporters drained entirely
        let out = gregory_reduce(&budgets, &[0, 1, 2], &rat(3)).unwrap();
        assert_eq!(out, vec![rat(0), rat(0), rat(0)]);

        let out = gregory_reduce(&[rat(1)], &[0], &ratio(1, 2)).unwrap();
        assert_eq!(out, vec![ratio(1, 2)]);
    }

    #[test]
    fn fig1_droop_elects_b_before_any_elimination() {
        let p = fig1();
        let (committee, trace) = approval_stv(&p, 1, &StvConfig::default()).unwrap();
        assert_eq!(names_vec(&p, &committee), ["b"]);
        let b = p.require_candidate("b").unwrap();
        match &trace.rounds[0].action {
            StvAction::Elect { candidate, support, .. } => {
                assert_eq!(*candidate, b);
                assert_eq!(*support, rat(3));
            }
            other => panic!("expected election first, got {other:?}"),
        }
        assert!(trace.money_conserved());
    }

    #[test]
    fn three_voter_blocks_elect_a_then_b() {
        // 3: a > b > c, 2: b > c > a, 1: c > b > a with 2 seats, Droop q=2.
        let p = parse_simple(
            &["a", "b", "c"],
            &[(3, "a > b > c"), (2, "b > c > a"), (1, "c > b > a")],
        );
        let (committee, trace) = approval_stv(&p, 2, &StvConfig::default()).unwrap();
        assert_eq!(names_vec(&p, &committee), ["a", "b"]);
        // a's three supporters drop from 1 to 1/3 each
        match &trace.rounds[0].action {
            StvAction::Elect { candidate, payments, .. } => {
                assert_eq!(p.candidate_name(*candidate), "a");
                for (_, paid) in payments {
                    assert_eq!(*paid, ratio(2, 3));
                }
            }
            other => panic!("expected election, got {other:?}"),
        }
        assert_eq!(trace.rounds[0].budgets_after[..3], [ratio(1, 3), ratio(1, 3), ratio(1, 3)]);
        assert!(trace.money_conserved());
    }

    #[test]
    fn unanimous_profile_single_seat() {
        let p = parse_simple(&["x", "y"], &[(4, "x > y")]);
        let (committee, _) = approval_stv(&p, 1, &StvConfig::default()).unwrap();
        assert_eq!(names_vec(&p, &committee), ["x"]);
    }

    #[test]
    fn split_stv_fig10_hare_elects_d() {
        let p = fig10();
        let config = StvConfig {
            quota: QuotaKind::Hare,
            ..StvConfig::default()
        };
        let (committee, trace) = split_stv(&p, 1, &config).unwrap();
        assert_eq!(names_vec(&p, &committee), ["d"]);
        assert!(trace.money_conserved());
    }

    #[test]
    fn split_stv_credits_half_per_shared_ballot() {
        let p = parse_simple(&["a", "b", "c"], &[(2, "{a,b} > c"), (1, "c > a > b")]);
        let config = StvConfig {
            quota: QuotaKind::Hare,
            ..StvConfig::default()
        };
        let (committee, trace) = split_stv(&p, 1, &config).unwrap();
        let a = p.require_candidate("a").unwrap();
        let b = p.require_candidate("b").unwrap();
        // each {a,b} ballot offers 1/2 to a and 1/2 to b
        assert_eq!(trace.rounds[0].support[&a], rat(1));
        assert_eq!(trace.rounds[0].support[&b], rat(1));
        assert_eq!(names_vec(&p, &committee), ["b"]);
    }

    #[test]
    fn split_equals_approval_on_linear_profiles() {
        let mut rng = seeded(0x73706c6974);
        for _ in 0..50 {
            let p = random_linear_profile(&mut rng, 5, 8, 3);
            for quota_kind in [QuotaKind::Droop, QuotaKind::Hare] {
                let config = StvConfig {
                    quota: quota_kind,
                    ..StvConfig::default()
                };
                let k = 1 + (p.num_candidates() - 1) / 2;
                let (ca, _) = approval_stv(&p, k, &config).unwrap();
                let (cs, _) = split_stv(&p, k, &config).unwrap();
                assert_eq!(ca, cs, "{p:?}");
            }
        }
    }

    #[test]
    fn committee_always_fills_and_money_is_conserved() {
        let mut rng = seeded(0x7374767374);
        let selections = [Selection::HighestSupportBudget, Selection::FirstEligibleByPriority];
        let payments = [Payment::Gregory, Payment::UniformCap];
        let eliminations = [Elimination::LowestSupportBudget, Elimination::LowestScore];
        for trial in 0..80 {
            let p = random_weak_profile(&mut rng, 6, 7, 3);
            let k = 1 + trial as usize % p.num_candidates().min(3);
            for quota_kind in [QuotaKind::Droop, QuotaKind::Hare] {
                for &selection in &selections {
                    for &payment in &payments {
                        for &elimination in &eliminations {
                            let config = StvConfig {
                                quota: quota_kind,
                                selection,
                                payment,
                                elimination,
                                tiebreak: Tiebreak::Lexicographic,
                            };
                            for run in [approval_stv, split_stv] {
                                let (committee, trace) = run(&p, k, &config).unwrap();
                                assert_eq!(committee.len(), k);
                                assert!(trace.money_conserved(), "{p:?} {config:?}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn uniform_cap_charges_exactly_q() {
        let offers = vec![rat(1), ratio(1, 4), rat(2)];
        let q = rat(2);
        let cap = uniform_cap(&offers, &q);
        let paid = offers
            .iter()
            .fold(Rational::zero(), |acc, c| acc + c.min(&cap));
        assert_eq!(paid, q);
        // cap lands between the small offer (paid fully) and the others
        assert_eq!(cap, ratio(7, 8));
    }

    #[test]
    fn rejects_bad_committee_sizes() {
        let p = parse_simple(&["a", "b"], &[(1, "a > b")]);
        assert!(matches!(
            approval_stv(&p, 0, &StvConfig::default()),
            Err(StvError::BadCommitteeSize { k: 0, m: 2 })
        ));
        assert!(matches!(
            approval_stv(&p, 3, &StvConfig::default()),
            Err(StvError::BadCommitteeSize { k: 3, m: 2 })
        ));
    }
}
