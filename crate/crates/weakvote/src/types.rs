//! Core domain types: candidates, weak orders, order types and profiles.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

/// Exact rational number used for weights, scores, budgets and quotas.
pub type Rational = BigRational;

/// Builds a `Rational` from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Builds a `Rational` from a numerator/denominator pair.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// Index of a candidate within a profile's roster. Ids are dense `0..m`;
/// the display name lives in the roster.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateId(pub u32);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("weak order must have at least one indifference class")]
    NoClasses,
    #[error("indifference class {0} is empty")]
    EmptyClass(usize),
    #[error("candidate {0} appears in more than one indifference class")]
    DuplicateCandidate(CandidateId),
    #[error("restriction would remove every candidate from the order")]
    EmptyRestriction,
}

/// A weak order: ordered, pairwise-disjoint, nonempty indifference classes
/// `C_1 > C_2 > ... > C_k` over some candidate subset. Candidates within a
/// class are tied; classes are listed from most to least preferred.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeakOrder {
    classes: Vec<Vec<CandidateId>>,
}

impl WeakOrder {
    /// Validates and canonicalizes class lists (members sorted by id).
    pub fn new(classes: Vec<Vec<CandidateId>>) -> Result<Self, OrderError> {
        if classes.is_empty() {
            return Err(OrderError::NoClasses);
        }
        let mut seen = BTreeSet::new();
        let mut canonical = Vec::with_capacity(classes.len());
        for (j, class) in classes.into_iter().enumerate() {
            if class.is_empty() {
                return Err(OrderError::EmptyClass(j));
            }
            let mut class = class;
            class.sort_unstable();
            for &c in &class {
                if !seen.insert(c) {
                    return Err(OrderError::DuplicateCandidate(c));
                }
            }
            canonical.push(class);
        }
        Ok(WeakOrder { classes: canonical })
    }

    /// A linear order over the given candidates, most preferred first.
    pub fn linear(ranking: impl IntoIterator<Item = CandidateId>) -> Result<Self, OrderError> {
        Self::new(ranking.into_iter().map(|c| vec![c]).collect())
    }

    pub fn classes(&self) -> &[Vec<CandidateId>] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// The top indifference class `C_1`.
    pub fn top_set(&self) -> &[CandidateId] {
        &self.classes[0]
    }

    /// The ordered list of indifference-class sizes.
    pub fn order_type(&self) -> OrderType {
        OrderType(self.classes.iter().map(Vec::len).collect())
    }

    pub fn domain(&self) -> BTreeSet<CandidateId> {
        self.classes.iter().flatten().copied().collect()
    }

    pub fn domain_size(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.class_of(c).is_some()
    }

    /// Index of the indifference class containing `c`, if any.
    pub fn class_of(&self, c: CandidateId) -> Option<usize> {
        self.classes
            .iter()
            .position(|class| class.binary_search(&c).is_ok())
    }

    /// True for order type `(1,1,...,1)`.
    pub fn is_linear(&self) -> bool {
        self.classes.iter().all(|class| class.len() == 1)
    }

    /// Removes every candidate outside `keep`, dropping classes that become
    /// empty and preserving the relative order of the survivors.
    pub fn restrict(&self, keep: &BTreeSet<CandidateId>) -> Result<WeakOrder, OrderError> {
        let classes: Vec<Vec<CandidateId>> = self
            .classes
            .iter()
            .map(|class| {
                class
                    .iter()
                    .copied()
                    .filter(|c| keep.contains(c))
                    .collect::<Vec<_>>()
            })
            .filter(|class: &Vec<CandidateId>| !class.is_empty())
            .collect();
        if classes.is_empty() {
            return Err(OrderError::EmptyRestriction);
        }
        Ok(WeakOrder { classes })
    }

    /// Rewrites every candidate id through `map` (used when a profile is
    /// restricted and the roster is reindexed). `map[old] = Some(new)`.
    pub(crate) fn remap(&self, map: &[Option<CandidateId>]) -> Result<WeakOrder, OrderError> {
        let classes: Vec<Vec<CandidateId>> = self
            .classes
            .iter()
            .map(|class| {
                class
                    .iter()
                    .filter_map(|c| map[c.index()])
                    .collect::<Vec<_>>()
            })
            .filter(|class: &Vec<CandidateId>| !class.is_empty())
            .collect();
        if classes.is_empty() {
            return Err(OrderError::EmptyRestriction);
        }
        WeakOrder::new(classes)
    }
}

impl fmt::Debug for WeakOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, class) in self.classes.iter().enumerate() {
            if j > 0 {
                write!(f, " > ")?;
            }
            write!(f, "{{")?;
            for (i, c) in class.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// The order type of a weak order: the list of its indifference-class
/// sizes, e.g. `(1,2,1)` for a singleton over a pair over a singleton.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderType(Vec<usize>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderTypeError {
    #[error("order type must have at least one class size")]
    Empty,
    #[error("class sizes must be at least 1")]
    ZeroSize,
}

impl OrderType {
    pub fn new(sizes: Vec<usize>) -> Result<Self, OrderTypeError> {
        if sizes.is_empty() {
            return Err(OrderTypeError::Empty);
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(OrderTypeError::ZeroSize);
        }
        Ok(OrderType(sizes))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    /// Number of indifference classes.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of candidates the order covers.
    pub fn domain_size(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_linear(&self) -> bool {
        self.0.iter().all(|&s| s == 1)
    }
}

impl fmt::Debug for OrderType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "τ{:?}", self.0)
    }
}

/// One weighted ballot line of a profile.
#[derive(Clone, PartialEq, Debug)]
pub struct Vote {
    pub weight: Rational,
    pub order: WeakOrder,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("roster must contain at least one candidate")]
    EmptyRoster,
    #[error("candidate name {0:?} is empty or duplicated")]
    BadCandidateName(String),
    #[error("vote {index} has negative weight")]
    NegativeWeight { index: usize },
    #[error("vote {index} does not cover exactly the roster candidates")]
    DomainMismatch { index: usize },
    #[error("profile has no voting weight")]
    NoVotingWeight,
    #[error("restriction must keep at least one candidate")]
    EmptyRestriction,
    #[error("unknown candidate {0:?}")]
    UnknownCandidate(String),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// An election input: a candidate roster together with a weighted multiset
/// of weak orders, each covering the full roster.
#[derive(Clone, PartialEq, Debug)]
pub struct Profile {
    roster: Vec<String>,
    votes: Vec<Vote>,
}

impl Profile {
    pub fn new(
        roster: Vec<String>,
        votes: Vec<(Rational, WeakOrder)>,
    ) -> Result<Self, ProfileError> {
        if roster.is_empty() {
            return Err(ProfileError::EmptyRoster);
        }
        let mut names = BTreeSet::new();
        for name in &roster {
            if name.is_empty() || !names.insert(name.clone()) {
                return Err(ProfileError::BadCandidateName(name.clone()));
            }
        }
        let full: BTreeSet<CandidateId> = (0..roster.len() as u32).map(CandidateId).collect();
        let mut checked = Vec::with_capacity(votes.len());
        for (index, (weight, order)) in votes.into_iter().enumerate() {
            if weight < Rational::zero() {
                return Err(ProfileError::NegativeWeight { index });
            }
            if order.domain() != full {
                return Err(ProfileError::DomainMismatch { index });
            }
            checked.push(Vote { weight, order });
        }
        Ok(Profile {
            roster,
            votes: checked,
        })
    }

    /// Convenience constructor for unit-weight ballots.
    pub fn from_orders(
        roster: Vec<String>,
        orders: Vec<WeakOrder>,
    ) -> Result<Self, ProfileError> {
        Self::new(roster, orders.into_iter().map(|o| (rat(1), o)).collect())
    }

    pub fn roster(&self) -> &[String] {
        &self.roster
    }

    pub fn num_candidates(&self) -> usize {
        self.roster.len()
    }

    pub fn candidates(&self) -> impl Iterator<Item = CandidateId> {
        (0..self.roster.len() as u32).map(CandidateId)
    }

    pub fn candidate_set(&self) -> BTreeSet<CandidateId> {
        self.candidates().collect()
    }

    pub fn candidate_name(&self, c: CandidateId) -> &str {
        &self.roster[c.index()]
    }

    pub fn candidate_by_name(&self, name: &str) -> Option<CandidateId> {
        self.roster
            .iter()
            .position(|n| n == name)
            .map(|i| CandidateId(i as u32))
    }

    /// Resolves a candidate name, erroring on misses.
    pub fn require_candidate(&self, name: &str) -> Result<CandidateId, ProfileError> {
        self.candidate_by_name(name)
            .ok_or_else(|| ProfileError::UnknownCandidate(name.to_owned()))
    }

    pub fn votes(&self) -> &[Vote] {
        &self.votes
    }

    pub fn num_votes(&self) -> usize {
        self.votes.len()
    }

    /// Total voting weight `n`.
    pub fn total_weight(&self) -> Rational {
        self.votes
            .iter()
            .fold(Rational::zero(), |acc, v| acc + &v.weight)
    }

    /// Errors unless the profile carries positive voting weight; tallying
    /// operations call this before doing arithmetic.
    pub fn require_tallyable(&self) -> Result<(), ProfileError> {
        if self.votes.is_empty() || self.total_weight() <= Rational::zero() {
            return Err(ProfileError::NoVotingWeight);
        }
        Ok(())
    }

    /// Restricts the profile to `keep`: the roster shrinks to the kept
    /// candidates (original order preserved) and every ballot is restricted.
    /// Candidate ids are reindexed; use names to compare across profiles.
    pub fn restrict_to(&self, keep: &BTreeSet<CandidateId>) -> Result<Profile, ProfileError> {
        if keep.is_empty() {
            return Err(ProfileError::EmptyRestriction);
        }
        let mut map: Vec<Option<CandidateId>> = vec![None; self.roster.len()];
        let mut roster = Vec::with_capacity(keep.len());
        for c in self.candidates() {
            if keep.contains(&c) {
                map[c.index()] = Some(CandidateId(roster.len() as u32));
                roster.push(self.roster[c.index()].clone());
            }
        }
        if roster.is_empty() {
            return Err(ProfileError::EmptyRestriction);
        }
        let votes = self
            .votes
            .iter()
            .map(|v| Ok((v.weight.clone(), v.order.remap(&map)?)))
            .collect::<Result<Vec<_>, OrderError>>()?;
        Profile::new(roster, votes)
    }

    /// Canonical form: identical orders merged (weights summed, zero-weight
    /// lines dropped) and ballot lines sorted by their class structure.
    pub fn canonicalized(&self) -> Profile {
        let mut merged: Vec<(WeakOrder, Rational)> = Vec::new();
        for v in &self.votes {
            if v.weight.is_zero() {
                continue;
            }
            match merged.iter_mut().find(|(o, _)| *o == v.order) {
                Some((_, w)) => *w += &v.weight,
                None => merged.push((v.order.clone(), v.weight.clone())),
            }
        }
        merged.sort_by(|(a, _), (b, _)| a.classes().cmp(b.classes()));
        Profile {
            roster: self.roster.clone(),
            votes: merged
                .into_iter()
                .map(|(order, weight)| Vote { weight, order })
                .collect(),
        }
    }

    /// Renders a weak order with roster names, for diagnostics and logs.
    pub fn describe_order(&self, order: &WeakOrder) -> String {
        order
            .classes()
            .iter()
            .map(|class| {
                let names: Vec<&str> = class.iter().map(|&c| self.candidate_name(c)).collect();
                if names.len() == 1 {
                    names[0].to_owned()
                } else {
                    format!("{{{}}}", names.join(","))
                }
            })
            .collect::<Vec<_>>()
            .join(" > ")
    }

    /// Renders a candidate set as sorted names.
    pub fn describe_set<'a>(&self, set: impl IntoIterator<Item = &'a CandidateId>) -> String {
        set.into_iter()
            .map(|&c| self.candidate_name(c).to_owned())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Maps candidate ids to names.
    pub fn names_of<'a>(
        &self,
        set: impl IntoIterator<Item = &'a CandidateId>,
    ) -> BTreeSet<String> {
        set.into_iter()
            .map(|&c| self.candidate_name(c).to_owned())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(raw: &[u32]) -> Vec<CandidateId> {
        raw.iter().copied().map(CandidateId).collect()
    }

    fn order(classes: &[&[u32]]) -> WeakOrder {
        WeakOrder::new(classes.iter().map(|c| ids(c)).collect()).unwrap()
    }

    #[test]
    fn order_type_of_mixed_order() {
        // {a} > {b,c} > {d}
        let o = order(&[&[0], &[1, 2], &[3]]);
        assert_eq!(o.order_type().sizes(), &[1, 2, 1]);
    }

    #[test]
    fn order_type_of_linear_and_flat_orders() {
        let linear = order(&[&[0], &[1], &[2], &[3]]);
        assert_eq!(linear.order_type().sizes(), &[1, 1, 1, 1]);
        assert!(linear.is_linear());
        let flat = order(&[&[0, 1, 2, 3]]);
        assert_eq!(flat.order_type().sizes(), &[4]);
        assert_eq!(flat.top_set(), ids(&[0, 1, 2, 3]).as_slice());
    }

    #[test]
    fn construction_rejects_duplicates_and_empty_classes() {
        assert_eq!(
            WeakOrder::new(vec![ids(&[0]), ids(&[0, 1])]),
            Err(OrderError::DuplicateCandidate(CandidateId(0)))
        );
        assert_eq!(
            WeakOrder::new(vec![ids(&[0]), vec![]]),
            Err(OrderError::EmptyClass(1))
        );
        assert_eq!(WeakOrder::new(vec![]), Err(OrderError::NoClasses));
    }

    #[test]
    fn restrict_drops_empty_classes_and_keeps_order() {
        // {a,b} > {c} > {d} restricted to {a,b,d} = {a,b} > {d}
        let o = order(&[&[0, 1], &[2], &[3]]);
        let keep: BTreeSet<_> = ids(&[0, 1, 3]).into_iter().collect();
        let r = o.restrict(&keep).unwrap();
        assert_eq!(r, order(&[&[0, 1], &[3]]));

        // {c} > {a} > {b,d} restricted to {a,b,d} = {a} > {b,d}
        let o = order(&[&[2], &[0], &[1, 3]]);
        let r = o.restrict(&keep).unwrap();
        assert_eq!(r, order(&[&[0], &[1, 3]]));
    }

    #[test]
    fn restrict_to_full_domain_is_identity() {
        let o = order(&[&[0], &[1]]);
        let keep: BTreeSet<_> = ids(&[0, 1]).into_iter().collect();
        assert_eq!(o.restrict(&keep).unwrap(), o);
        assert_eq!(
            o.restrict(&BTreeSet::new()),
            Err(OrderError::EmptyRestriction)
        );
    }

    #[test]
    fn top_set_examples() {
        let o = order(&[&[0, 1, 3], &[2]]);
        assert_eq!(o.top_set(), ids(&[0, 1, 3]).as_slice());
        let o = order(&[&[0], &[1]]);
        assert_eq!(o.top_set(), ids(&[0]).as_slice());
    }

    #[test]
    fn profile_rejects_domain_mismatch() {
        let roster = vec!["a".into(), "b".into()];
        let bad = order(&[&[0]]);
        assert!(matches!(
            Profile::from_orders(roster, vec![bad]),
            Err(ProfileError::DomainMismatch { index: 0 })
        ));
    }

    #[test]
    fn profile_restriction_reindexes_names() {
        let roster = vec!["a".into(), "b".into(), "c".into()];
        let p = Profile::from_orders(roster, vec![order(&[&[2], &[0, 1]])]).unwrap();
        let keep: BTreeSet<_> = ids(&[1, 2]).into_iter().collect();
        let r = p.restrict_to(&keep).unwrap();
        assert_eq!(r.roster(), &["b".to_owned(), "c".to_owned()]);
        // old c (id 2) is now id 1, old b (id 1) is now id 0
        assert_eq!(r.votes()[0].order, order(&[&[1], &[0]]));
    }

    #[test]
    fn canonicalize_merges_identical_ballots() {
        let roster = vec!["a".into(), "b".into()];
        let o = order(&[&[0], &[1]]);
        let p = Profile::new(
            vec!["a".into(), "b".into()],
            vec![
                (rat(2), o.clone()),
                (rat(0), order(&[&[1], &[0]])),
                (rat(3), o.clone()),
            ],
        )
        .unwrap();
        let c = p.canonicalized();
        assert_eq!(c.roster(), &roster[..]);
        assert_eq!(c.num_votes(), 1);
        assert_eq!(c.votes()[0].weight, rat(5));
        assert_eq!(c.total_weight(), rat(5));
    }
}
