use std::collections::{BTreeMap, HashMap};

/// English function words skipped when titling clusters.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
];

pub fn is_stopword(term: &str) -> bool {
    STOPWORDS.binary_search(&term).is_ok()
}

/// Title for a cluster: the manual override if one exists, otherwise the
/// three most frequent non-stopword terms of its member queries (frequency
/// descending, then alphabetical) joined with hyphens. Falls back to
/// `cluster-<id>` when every term is a stopword.
pub fn auto_title<'a>(
    cluster_id: &str,
    member_terms: impl IntoIterator<Item = &'a [String]>,
    overrides: &BTreeMap<String, String>,
) -> String {
    if let Some(title) = overrides.get(cluster_id) {
        return title.clone();
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for terms in member_terms {
        for term in terms.iter().filter(|t| !is_stopword(t)) {
            *counts.entry(term.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    if ranked.is_empty() {
        return format!("cluster-{cluster_id}");
    }
    ranked.iter().take(3).map(|(t, _)| *t).collect::<Vec<_>>().join("-")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::terms;

    #[test]
    fn stopwords_sorted_for_binary_search() {
        assert!(STOPWORDS.windows(2).all(|w| w[0] < w[1]));
        assert!((100..=140).contains(&STOPWORDS.len()));
        assert!(is_stopword("what") && !is_stopword("bm25"));
    }

    #[test]
    fn frequency_then_alphabetical() {
        let members = [terms("what is bm25"), terms("bm25 formula")];
        let title = auto_title("c1", members.iter().map(Vec::as_slice), &BTreeMap::new());
        assert_eq!(title, "bm25-formula");

        let members = [terms("zeta alpha beta"), terms("zeta gamma")];
        let title = auto_title("c1", members.iter().map(Vec::as_slice), &BTreeMap::new());
        assert_eq!(title, "zeta-alpha-beta");
    }

    #[test]
    fn override_and_fallback() {
        let overrides: BTreeMap<String, String> = [("c1".to_string(), "ranking math".to_string())].into();
        let members = [terms("bm25 formula")];
        assert_eq!(auto_title("c1", members.iter().map(Vec::as_slice), &overrides), "ranking math");

        let members = [terms("what is it"), terms("how do they")];
        assert_eq!(auto_title("c7", members.iter().map(Vec::as_slice), &BTreeMap::new()), "cluster-c7");
    }
}
