use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Number of thematic categories.
pub const CATEGORY_COUNT: u8 = 7;

/// Largest group the search-volume source accepts, benchmark included.
pub const MAX_GROUP_SIZE: usize = 5;

/// A search query. The text is kept verbatim, including any `-exclusion`
/// or `+union` operators, and is the term's identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueryTerm {
    pub text: String,
    pub category: u8,
    pub is_benchmark: bool,
}

impl QueryTerm {
    pub fn new(text: impl Into<String>, category: u8, is_benchmark: bool) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidVocabulary("empty query text".into()));
        }
        if !(1..=CATEGORY_COUNT).contains(&category) {
            return Err(Error::InvalidVocabulary(format!(
                "category {category} of `{text}` outside 1..={CATEGORY_COUNT}"
            )));
        }
        Ok(Self { text, category, is_benchmark })
    }
}

/// The query dictionary: unique terms, exactly one flagged as benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryVocabulary {
    terms: Vec<QueryTerm>,
    benchmark: QueryTerm,
}

impl QueryVocabulary {
    /// `benchmark_label`, when given, must prefix the flagged term's text
    /// (case-insensitive), so `"natural gas"` accepts
    /// `"Natural gas -propane -price"`.
    pub fn new(all_terms: Vec<QueryTerm>, benchmark_label: Option<&str>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for t in &all_terms {
            if !seen.insert(t.text.as_str()) {
                return Err(Error::InvalidVocabulary(format!("duplicate term `{}`", t.text)));
            }
        }
        let flagged: Vec<&QueryTerm> = all_terms.iter().filter(|t| t.is_benchmark).collect();
        let benchmark = match flagged.as_slice() {
            [b] => (*b).clone(),
            _ => {
                return Err(Error::InvalidVocabulary(format!(
                    "expected exactly one benchmark, found {}",
                    flagged.len()
                )))
            }
        };
        if let Some(label) = benchmark_label {
            if !benchmark.text.to_lowercase().starts_with(&label.to_lowercase()) {
                return Err(Error::InvalidVocabulary(format!(
                    "benchmark `{}` does not match configured `{label}`",
                    benchmark.text
                )));
            }
        }
        let terms: Vec<QueryTerm> = all_terms.into_iter().filter(|t| !t.is_benchmark).collect();
        if terms.is_empty() {
            return Err(Error::InvalidVocabulary("no terms besides the benchmark".into()));
        }
        Ok(Self { terms, benchmark })
    }

    /// Non-benchmark terms in dictionary order.
    pub fn terms(&self) -> &[QueryTerm] {
        &self.terms
    }

    pub fn benchmark(&self) -> &QueryTerm {
        &self.benchmark
    }

    pub fn len(&self) -> usize {
        self.terms.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn find(&self, text: &str) -> Option<&QueryTerm> {
        if self.benchmark.text == text {
            return Some(&self.benchmark);
        }
        self.terms.iter().find(|t| t.text == text)
    }
}

/// Splits the vocabulary into category-homogeneous groups, each holding at
/// most `max_group_size - 1` terms followed by the benchmark. Categories are
/// visited in ascending order and filled greedily in dictionary order.
pub fn partition_vocabulary(vocab: &QueryVocabulary, max_group_size: usize) -> Result<Vec<Vec<QueryTerm>>> {
    if max_group_size < 2 {
        return Err(Error::InvalidArgument(format!("max_group_size must be at least 2, got {max_group_size}")));
    }
    let per_group = max_group_size - 1;
    let mut groups = Vec::new();
    for category in 1..=CATEGORY_COUNT {
        let members: Vec<&QueryTerm> = vocab.terms().iter().filter(|t| t.category == category).collect();
        for chunk in members.chunks(per_group) {
            let mut group: Vec<QueryTerm> = chunk.iter().map(|t| (*t).clone()).collect();
            group.push(vocab.benchmark().clone());
            groups.push(group);
        }
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn vocab(n: usize, category: u8) -> QueryVocabulary {
        let mut terms: Vec<QueryTerm> =
            (0..n).map(|i| QueryTerm::new(format!("term {i}"), category, false).unwrap()).collect();
        terms.push(QueryTerm::new("natural gas", 4, true).unwrap());
        QueryVocabulary::new(terms, Some("natural gas")).unwrap()
    }

    #[test]
    fn nine_terms_split_four_four_one() {
        let groups = partition_vocabulary(&vocab(9, 2), 5).unwrap();
        let sizes: Vec<usize> = groups.iter().map(|g| g.len() - 1).collect();
        assert_eq!(sizes, vec![4, 4, 1]);
        assert!(groups.iter().all(|g| g.last().unwrap().is_benchmark));
    }

    #[test]
    fn minimal_group() {
        let groups = partition_vocabulary(&vocab(1, 1), 5).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].len(), 2);
    }

    #[test]
    fn groups_are_category_homogeneous() {
        let mut terms: Vec<QueryTerm> =
            (0..10).map(|i| QueryTerm::new(format!("q{i}"), (i % 3 + 1) as u8, false).unwrap()).collect();
        terms.push(QueryTerm::new("natural gas", 4, true).unwrap());
        let v = QueryVocabulary::new(terms, None).unwrap();
        let groups = partition_vocabulary(&v, 3).unwrap();
        for g in &groups {
            let cats: BTreeSet<u8> = g.iter().filter(|t| !t.is_benchmark).map(|t| t.category).collect();
            assert_eq!(cats.len(), 1);
            assert!(g.len() <= 3);
        }
        assert_eq!(groups.iter().map(|g| g.len() - 1).sum::<usize>(), 10);
        assert!(partition_vocabulary(&v, 1).is_err());
    }

    #[test]
    fn vocabulary_validation() {
        let dup = vec![
            QueryTerm::new("a", 1, false).unwrap(),
            QueryTerm::new("a", 2, false).unwrap(),
            QueryTerm::new("natural gas", 4, true).unwrap(),
        ];
        assert!(QueryVocabulary::new(dup, None).is_err());
        let none = vec![QueryTerm::new("a", 1, false).unwrap()];
        assert!(QueryVocabulary::new(none, None).is_err());
        let wrong = vec![QueryTerm::new("a", 1, false).unwrap(), QueryTerm::new("global warming", 2, true).unwrap()];
        assert!(QueryVocabulary::new(wrong, Some("natural gas")).is_err());
        assert!(QueryTerm::new("x", 8, false).is_err());
        assert!(QueryTerm::new("x", 0, false).is_err());
    }
}
