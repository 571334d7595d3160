//! Positional scoring systems for weak orders.
//!
//! A scoring system maps every order type `τ` to a score vector of length
//! `|τ|`; a candidate in the j-th indifference class of a ballot receives
//! the j-th entry. Only monotone systems are representable: entries are
//! nonincreasing, nonnegative, and the last entry is 0. A consequence is
//! that a ballot indifferent between all candidates (`|τ| = 1`) hands out
//! no points at all.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::types::{CandidateId, OrderType, Profile, Rational};

/// Exact rational score value.
pub type Score = BigRational;

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("score vector for {0:?} has wrong length")]
    WrongLength(OrderType),
    #[error("score vector for {0:?} is not nonincreasing")]
    NotMonotone(OrderType),
    #[error("score vector for {0:?} has a negative entry")]
    Negative(OrderType),
    #[error("score vector for {0:?} must end in 0")]
    NonzeroLast(OrderType),
    #[error("no score vector for order type {0:?}")]
    MissingOrderType(OrderType),
}

/// What a table system does when asked for an order type it does not list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TableFallback {
    /// Surface the gap as an error (default).
    #[default]
    Error,
    /// Fall back to the approval vector `(1,0,...,0)`.
    Approval,
}

/// A scoring system given by an explicit table of order types.
#[derive(Clone, Debug, PartialEq)]
pub struct TableSystem {
    entries: BTreeMap<OrderType, Vec<Score>>,
    fallback: TableFallback,
}

impl TableSystem {
    pub fn new(
        entries: BTreeMap<OrderType, Vec<Score>>,
        fallback: TableFallback,
    ) -> Result<Self, ScoringError> {
        for (t, v) in &entries {
            validate_vector(t, v)?;
        }
        Ok(TableSystem { entries, fallback })
    }

    /// Builds a table by evaluating `f` on every order type whose domain
    /// size is at most `max_domain`. Handy for rules defined by a predicate
    /// on `τ`, such as the clone-independent non-approval rule used in
    /// tests.
    pub fn from_fn(
        max_domain: usize,
        fallback: TableFallback,
        mut f: impl FnMut(&OrderType) -> Vec<Score>,
    ) -> Result<Self, ScoringError> {
        let mut entries = BTreeMap::new();
        for m in 1..=max_domain {
            for t in compositions(m) {
                let v = f(&t);
                entries.insert(t, v);
            }
        }
        TableSystem::new(entries, fallback)
    }
}

/// Every composition of `m` (ordered lists of positive integers summing to
/// `m`), i.e. every order type over `m` candidates.
pub fn compositions(m: usize) -> Vec<OrderType> {
    fn rec(left: usize, acc: &mut Vec<usize>, out: &mut Vec<OrderType>) {
        if left == 0 {
            out.push(OrderType::new(acc.clone()).unwrap());
            return;
        }
        for first in 1..=left {
            acc.push(first);
            rec(left - first, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, &mut Vec::new(), &mut out);
    out
}

fn validate_vector(t: &OrderType, v: &[Score]) -> Result<(), ScoringError> {
    if v.len() != t.len() {
        return Err(ScoringError::WrongLength(t.clone()));
    }
    if v.windows(2).any(|w| w[0] < w[1]) {
        return Err(ScoringError::NotMonotone(t.clone()));
    }
    if v.iter().any(|s| s < &Score::zero()) {
        return Err(ScoringError::Negative(t.clone()));
    }
    if !v[v.len() - 1].is_zero() {
        return Err(ScoringError::NonzeroLast(t.clone()));
    }
    Ok(())
}

/// A monotone positional scoring system.
#[derive(Clone, Debug, PartialEq)]
pub enum ScoringSystem {
    /// `(1,0,...,0)`: every top-class candidate gets a full point.
    Approval,
    /// `(1/τ(1),0,...,0)`: one point split evenly across the top class.
    Split,
    /// The Borda-style vector `(m-1, m-1-τ(1), m-1-τ(1)-τ(2), ...)`,
    /// shifted so its last entry is 0 (the shift leaves the induced
    /// elimination rule unchanged because every candidate on a ballot
    /// receives some entry).
    BordaStyle,
    /// Explicit per-order-type table.
    Table(TableSystem),
}

impl ScoringSystem {
    /// The score vector this system assigns to order type `t`.
    pub fn score_vector(&self, t: &OrderType) -> Result<Vec<Score>, ScoringError> {
        let k = t.len();
        if k == 1 {
            // Full indifference: no candidate gets points under any
            // monotone system.
            if let ScoringSystem::Table(table) = self {
                if let Some(v) = table.entries.get(t) {
                    return Ok(v.clone());
                }
                if table.fallback == TableFallback::Error {
                    return Err(ScoringError::MissingOrderType(t.clone()));
                }
            }
            return Ok(vec![Score::zero()]);
        }
        match self {
            ScoringSystem::Approval => {
                let mut v = vec![Score::zero(); k];
                v[0] = Score::one();
                Ok(v)
            }
            ScoringSystem::Split => {
                let mut v = vec![Score::zero(); k];
                v[0] = Rational::new(1.into(), (t.sizes()[0] as i64).into());
                Ok(v)
            }
            ScoringSystem::BordaStyle => {
                let m = t.domain_size() as i64;
                let last = t.sizes()[k - 1] as i64;
                let mut v = Vec::with_capacity(k);
                let mut above = 0i64;
                for j in 0..k {
                    // (m - 1 - above) - (last - 1), so the final entry is 0
                    v.push(Score::from_integer((m - last - above).into()));
                    above += t.sizes()[j] as i64;
                }
                Ok(v)
            }
            ScoringSystem::Table(table) => match table.entries.get(t) {
                Some(v) => Ok(v.clone()),
                None => match table.fallback {
                    TableFallback::Error => Err(ScoringError::MissingOrderType(t.clone())),
                    TableFallback::Approval => ScoringSystem::Approval.score_vector(t),
                },
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScoringSystem::Approval => "approval",
            ScoringSystem::Split => "split",
            ScoringSystem::BordaStyle => "borda-style",
            ScoringSystem::Table(_) => "table",
        }
    }
}

/// Weighted positional score of every candidate:
/// `S(c) = Σ_i weight_i · s(τ_i)_{class of c in ballot i}`.
pub fn positional_scores(
    profile: &Profile,
    system: &ScoringSystem,
) -> Result<BTreeMap<CandidateId, Score>, ScoringError> {
    let mut scores: BTreeMap<CandidateId, Score> = profile
        .candidates()
        .map(|c| (c, Score::zero()))
        .collect();
    for vote in profile.votes() {
        let v = system.score_vector(&vote.order.order_type())?;
        for (j, class) in vote.order.classes().iter().enumerate() {
            if v[j].is_zero() {
                continue;
            }
            let gain = &v[j] * &vote.weight;
            for &c in class {
                *scores.get_mut(&c).unwrap() += &gain;
            }
        }
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{rat, ratio};

    fn t(sizes: &[usize]) -> OrderType {
        OrderType::new(sizes.to_vec()).unwrap()
    }

    #[test]
    fn split_vector() {
        assert_eq!(
            ScoringSystem::Split.score_vector(&t(&[3, 1])).unwrap(),
            vec![ratio(1, 3), rat(0)]
        );
    }

    #[test]
    fn approval_vector() {
        assert_eq!(
            ScoringSystem::Approval.score_vector(&t(&[2, 1, 1])).unwrap(),
            vec![rat(1), rat(0), rat(0)]
        );
    }

    #[test]
    fn borda_style_vector() {
        // τ = (1,2,1) over 4 candidates
        assert_eq!(
            ScoringSystem::BordaStyle.score_vector(&t(&[1, 2, 1])).unwrap(),
            vec![rat(3), rat(2), rat(0)]
        );
        // τ with a non-singleton bottom class gets shifted to end in 0
        assert_eq!(
            ScoringSystem::BordaStyle.score_vector(&t(&[1, 3])).unwrap(),
            vec![rat(1), rat(0)]
        );
        assert_eq!(
            ScoringSystem::BordaStyle.score_vector(&t(&[2, 2])).unwrap(),
            vec![rat(2), rat(0)]
        );
    }

    #[test]
    fn full_indifference_scores_nothing() {
        for system in [
            ScoringSystem::Approval,
            ScoringSystem::Split,
            ScoringSystem::BordaStyle,
        ] {
            assert_eq!(system.score_vector(&t(&[5])).unwrap(), vec![rat(0)]);
        }
    }

    #[test]
    fn table_lookup_and_fallback() {
        let mut entries = BTreeMap::new();
        entries.insert(t(&[2, 1]), vec![ratio(1, 2), rat(0)]);
        let strict = TableSystem::new(entries.clone(), TableFallback::Error).unwrap();
        let sys = ScoringSystem::Table(strict);
        assert_eq!(
            sys.score_vector(&t(&[2, 1])).unwrap(),
            vec![ratio(1, 2), rat(0)]
        );
        assert_eq!(
            sys.score_vector(&t(&[1, 1])),
            Err(ScoringError::MissingOrderType(t(&[1, 1])))
        );

        let lenient = TableSystem::new(entries, TableFallback::Approval).unwrap();
        let sys = ScoringSystem::Table(lenient);
        assert_eq!(sys.score_vector(&t(&[1, 1])).unwrap(), vec![rat(1), rat(0)]);
    }

    #[test]
    fn table_rejects_non_monotone_vectors() {
        let mut entries = BTreeMap::new();
        entries.insert(t(&[1, 1]), vec![rat(0), rat(1)]);
        assert!(matches!(
            TableSystem::new(entries, TableFallback::Error),
            Err(ScoringError::NotMonotone(_))
        ));
        let mut entries = BTreeMap::new();
        entries.insert(t(&[1, 1]), vec![rat(2), rat(1)]);
        assert!(matches!(
            TableSystem::new(entries, TableFallback::Error),
            Err(ScoringError::NonzeroLast(_))
        ));
    }

    #[test]
    fn compositions_count_is_two_to_m_minus_one() {
        for m in 1..=7 {
            assert_eq!(compositions(m).len(), 1 << (m - 1));
        }
    }
}
