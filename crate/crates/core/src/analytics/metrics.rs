use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 1-based rank, or `Unfound` when no relevant document was retrieved.
/// `Unfound` orders after every finite rank. Serialized as a number or
/// `null`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Option<u32>", into = "Option<u32>")]
pub enum Rank {
    Found(u32),
    Unfound,
}

impl Rank {
    pub fn get(self) -> Option<u32> {
        match self {
            Rank::Found(r) => Some(r),
            Rank::Unfound => None,
        }
    }

    pub fn is_found(self) -> bool {
        matches!(self, Rank::Found(_))
    }
}

impl From<Option<u32>> for Rank {
    fn from(r: Option<u32>) -> Self {
        r.map_or(Rank::Unfound, Rank::Found)
    }
}

impl From<Rank> for Option<u32> {
    fn from(r: Rank) -> Self {
        r.get()
    }
}

impl Ord for Rank {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rank::Found(a), Rank::Found(b)) => a.cmp(b),
            (Rank::Found(_), Rank::Unfound) => Ordering::Less,
            (Rank::Unfound, Rank::Found(_)) => Ordering::Greater,
            (Rank::Unfound, Rank::Unfound) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for Rank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rank::Found(r) => write!(f, "{r}"),
            Rank::Unfound => f.write_str("UNFOUND"),
        }
    }
}

/// Relevance grades of one query, keyed by document id.
pub type Judgments = BTreeMap<String, u32>;

/// Position of the first document judged at or above `threshold`.
pub fn first_relevant_rank<S: AsRef<str>>(ranking: &[S], judgments: &Judgments, threshold: u32) -> Rank {
    ranking
        .iter()
        .position(|doc| judgments.get(doc.as_ref()).is_some_and(|&g| g >= threshold))
        .map_or(Rank::Unfound, |pos| Rank::Found(pos as u32 + 1))
}

/// `baseline - model`; positive means the model placed the first relevant
/// document higher. Undefined when either side is unfound.
pub fn rank_delta(baseline: Rank, model: Rank) -> Option<i64> {
    match (baseline, model) {
        (Rank::Found(b), Rank::Found(m)) => Some(i64::from(b) - i64::from(m)),
        _ => None,
    }
}

/// Median of ranks with `Unfound` sorted last. `None` means the median
/// itself is unfound; even-length medians may be half-integers.
pub fn median_metric(values: &[Rank]) -> Result<Option<f64>> {
    if values.is_empty() {
        return Err(Error::contract("median of an empty list"));
    }
    let mut sorted = values.to_vec();
    sorted.sort();
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid].get().map(f64::from)
    } else {
        match (sorted[mid - 1].get(), sorted[mid].get()) {
            (Some(a), Some(b)) => Some((f64::from(a) + f64::from(b)) / 2.0),
            _ => None,
        }
    };
    Ok(median)
}

/// Plain median of finite values; `None` for an empty list.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}

/// Per-query evaluation facts shown on the cluster overview.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuerySummary {
    pub query_id: String,
    pub text: String,
    pub first_relevant_rank: Rank,
    pub baseline_first_relevant_rank: Rank,
    pub delta: Option<i64>,
    /// Number of qrels entries for the query, any grade.
    pub judged_count: usize,
}

impl QuerySummary {
    pub fn new<S: AsRef<str>>(
        query_id: &str,
        text: &str,
        model_ranking: &[S],
        baseline_ranking: &[S],
        judgments: &Judgments,
        threshold: u32,
    ) -> Self {
        let model = first_relevant_rank(model_ranking, judgments, threshold);
        let baseline = first_relevant_rank(baseline_ranking, judgments, threshold);
        QuerySummary {
            query_id: query_id.to_string(),
            text: text.to_string(),
            first_relevant_rank: model,
            baseline_first_relevant_rank: baseline,
            delta: rank_delta(baseline, model),
            judged_count: judgments.len(),
        }
    }

    /// Queries without any judgments are kept but flagged.
    pub fn is_unjudged(&self) -> bool {
        self.judged_count == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn judgments(pairs: &[(&str, u32)]) -> Judgments {
        pairs.iter().map(|(d, g)| (d.to_string(), *g)).collect()
    }

    #[test]
    fn first_relevant_rank_examples() {
        assert_eq!(first_relevant_rank(&["d1", "d2", "d3"], &judgments(&[("d2", 1)]), 1), Rank::Found(2));
        assert_eq!(first_relevant_rank(&["d1"], &judgments(&[]), 1), Rank::Unfound);
        assert_eq!(
            first_relevant_rank(&["d1", "d2"], &judgments(&[("d1", 0), ("d2", 2)]), 1),
            Rank::Found(2)
        );
        assert_eq!(
            first_relevant_rank(&["d1", "d2"], &judgments(&[("d1", 1), ("d2", 2)]), 2),
            Rank::Found(2)
        );
    }

    #[test]
    fn median_examples() {
        let f = Rank::Found;
        assert_eq!(median_metric(&[f(1), f(3), f(10)]).unwrap(), Some(3.0));
        assert_eq!(median_metric(&[f(1), f(2), f(3), f(4)]).unwrap(), Some(2.5));
        assert_eq!(median_metric(&[f(2), Rank::Unfound, Rank::Unfound]).unwrap(), None);
        assert_eq!(median_metric(&[Rank::Unfound, f(2), f(7)]).unwrap(), Some(7.0));
        assert_eq!(median_metric(&[f(2), Rank::Unfound]).unwrap(), None);
        assert!(median_metric(&[]).is_err());
        assert_eq!(median(&[-3.0, 5.0]), Some(1.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn delta_sign() {
        assert_eq!(rank_delta(Rank::Found(5), Rank::Found(2)), Some(3));
        assert_eq!(rank_delta(Rank::Found(1), Rank::Found(4)), Some(-3));
        assert_eq!(rank_delta(Rank::Unfound, Rank::Found(4)), None);
        assert_eq!(rank_delta(Rank::Found(1), Rank::Unfound), None);
    }

    #[test]
    fn rank_serializes_as_nullable_number() {
        assert_eq!(serde_json::to_string(&Rank::Found(3)).unwrap(), "3");
        assert_eq!(serde_json::to_string(&Rank::Unfound).unwrap(), "null");
        assert_eq!(serde_json::from_str::<Rank>("null").unwrap(), Rank::Unfound);
    }

    fn rank() -> impl Strategy<Value = Rank> {
        prop_oneof![(1u32..50).prop_map(Rank::Found), Just(Rank::Unfound)]
    }

    proptest! {
        #[test]
        fn median_of_one_is_itself(r in rank()) {
            prop_assert_eq!(median_metric(&[r]).unwrap(), r.get().map(f64::from));
        }

        #[test]
        fn swapping_runs_negates_delta(a in rank(), b in rank()) {
            prop_assert_eq!(rank_delta(a, b), rank_delta(b, a).map(|d| -d));
        }
    }
}
