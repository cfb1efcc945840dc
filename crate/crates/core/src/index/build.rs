use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::vocabulary::{QueryTerm, QueryVocabulary, MAX_GROUP_SIZE};
use crate::series::{self, seasonal_adjust, MonthStamp, TimeSeries};
use crate::{Error, Result};

/// Slack allowed when checking the 0..100 source scale.
pub const SCALE_TOLERANCE: f64 = 1e-9;

/// A term together with one of its series.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSeries {
    pub term: QueryTerm,
    pub series: TimeSeries,
}

/// One request's worth of search-volume data: the benchmark plus up to four
/// terms on a shared calendar window.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryGroup {
    id: usize,
    members: Vec<TermSeries>,
}

impl QueryGroup {
    /// Checks group structure: size, exactly one benchmark, common window,
    /// non-negative values. The 0..100 source scale is checked separately by
    /// [`QueryGroup::validate_source_scale`] since rescaled copies of a group
    /// remain valid input.
    pub fn new(id: usize, members: Vec<TermSeries>) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidGroup { group: id, reason };
        if !(2..=MAX_GROUP_SIZE).contains(&members.len()) {
            return Err(invalid(format!("{} members, expected 2..={MAX_GROUP_SIZE}", members.len())));
        }
        let benchmarks = members.iter().filter(|m| m.term.is_benchmark).count();
        if benchmarks != 1 {
            return Err(invalid(format!("{benchmarks} benchmark members, expected 1")));
        }
        let mut seen = BTreeSet::new();
        for m in &members {
            if !seen.insert(m.term.text.as_str()) {
                return Err(invalid(format!("duplicate term `{}`", m.term.text)));
            }
        }
        let (start, len) = (members[0].series.start(), members[0].series.len());
        if members.iter().any(|m| m.series.start() != start || m.series.len() != len) {
            return Err(invalid("member series do not share one window".into()));
        }
        if members.iter().any(|m| m.series.values().iter().any(|&v| v < 0.0)) {
            return Err(invalid("negative search volume".into()));
        }
        Ok(Self { id, members })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn members(&self) -> &[TermSeries] {
        &self.members
    }

    pub fn benchmark(&self) -> &TermSeries {
        self.members.iter().find(|m| m.term.is_benchmark).expect("validated")
    }

    /// Checks the source normalization: values within [0, 100] and a group
    /// maximum of 100, both up to [`SCALE_TOLERANCE`].
    pub fn validate_source_scale(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidGroup { group: self.id, reason };
        let mut max = 0.0f64;
        for m in &self.members {
            for &v in m.series.values() {
                if v > 100.0 + SCALE_TOLERANCE {
                    return Err(invalid(format!("value {v} above 100 for `{}`", m.term.text)));
                }
                max = max.max(v);
            }
        }
        if (max - 100.0).abs() > SCALE_TOLERANCE {
            return Err(invalid(format!("group maximum is {max}, expected 100")));
        }
        Ok(())
    }

    fn window(&self, from: MonthStamp, to: MonthStamp) -> Result<QueryGroup> {
        let members = self
            .members
            .iter()
            .map(|m| Ok(TermSeries { term: m.term.clone(), series: m.series.window(from, to)? }))
            .collect::<Result<Vec<_>>>()?;
        QueryGroup::new(self.id, members)
    }
}

/// The aggregated index with its decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcernIndex {
    /// Normalized index, maximum exactly 100.
    pub index: TimeSeries,
    /// Unnormalized sum of FI series.
    pub raw: TimeSeries,
    pub per_term_fi: Vec<TermSeries>,
    /// Share of the summed FI mass falling in each category present.
    pub category_shares: BTreeMap<u8, f64>,
    pub seasonally_adjusted: bool,
}

impl ConcernIndex {
    /// Sum over the sample of each term's FI series.
    pub fn term_totals(&self) -> Vec<(&QueryTerm, f64)> {
        self.per_term_fi.iter().map(|t| (&t.term, t.series.values().iter().sum())).collect()
    }
}

/// Benchmark-relative frequency index of every non-benchmark member.
pub fn rescale_group(group: &QueryGroup) -> Result<Vec<TermSeries>> {
    let bench_max = group.benchmark().series.values().iter().copied().fold(0.0f64, f64::max);
    if !(bench_max > 0.0) {
        return Err(Error::DegenerateBenchmark { group: group.id });
    }
    group
        .members
        .iter()
        .filter(|m| !m.term.is_benchmark)
        .map(|m| Ok(TermSeries { term: m.term.clone(), series: m.series.map(|v| 100.0 * v / bench_max)? }))
        .collect()
}

fn normalize_to_100(s: &TimeSeries) -> Result<TimeSeries> {
    let max = s.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::AllZero);
    }
    // Dividing first makes the maximum exactly 100.
    s.map(|v| v / max * 100.0)
}

/// Sums FI series and normalizes the sum to a maximum of 100.
///
/// Summation runs in term-text order, so the result does not depend on the
/// order of `fi_by_term`.
pub fn aggregate_index(fi_by_term: &[TermSeries]) -> Result<ConcernIndex> {
    let first = fi_by_term.first().ok_or_else(|| Error::InvalidArgument("no FI series to aggregate".into()))?;
    let (start, len) = (first.series.start(), first.series.len());
    if fi_by_term.iter().any(|t| t.series.start() != start || t.series.len() != len) {
        return Err(Error::InvalidRequest("FI series are not aligned to one window".into()));
    }
    let mut ordered: Vec<&TermSeries> = fi_by_term.iter().collect();
    ordered.sort_by(|a, b| a.term.text.cmp(&b.term.text));

    let mut raw = alloc::vec![0.0; len];
    let mut by_category: BTreeMap<u8, f64> = BTreeMap::new();
    for t in &ordered {
        for (acc, v) in raw.iter_mut().zip(t.series.values()) {
            *acc += v;
        }
        *by_category.entry(t.term.category).or_default() += t.series.values().iter().sum::<f64>();
    }
    let raw = TimeSeries::new("cci_raw", start, raw)?;
    let index = normalize_to_100(&raw)?.with_name("cci");
    let total: f64 = by_category.values().sum();
    let category_shares = by_category.into_iter().map(|(c, v)| (c, v / total)).collect();
    Ok(ConcernIndex {
        index,
        raw,
        per_term_fi: ordered.into_iter().cloned().collect(),
        category_shares,
        seasonally_adjusted: false,
    })
}

/// Full construction: align all groups to their common window, rescale each
/// group against its benchmark, aggregate, and optionally seasonally adjust
/// the result (re-normalized to a maximum of 100 afterwards).
pub fn build_cci(vocab: &QueryVocabulary, groups: &[QueryGroup], adjust: bool) -> Result<ConcernIndex> {
    let mut covered = BTreeSet::new();
    for g in groups {
        for m in g.members() {
            let known = vocab.find(&m.term.text).ok_or_else(|| Error::InvalidGroup {
                group: g.id(),
                reason: format!("term `{}` is not in the vocabulary", m.term.text),
            })?;
            if known.is_benchmark != m.term.is_benchmark {
                return Err(Error::InvalidGroup {
                    group: g.id(),
                    reason: format!("benchmark flag of `{}` disagrees with the vocabulary", m.term.text),
                });
            }
            if !m.term.is_benchmark && !covered.insert(m.term.text.as_str()) {
                return Err(Error::InvalidGroup {
                    group: g.id(),
                    reason: format!("term `{}` appears in more than one group", m.term.text),
                });
            }
        }
    }
    if let Some(missing) = vocab.terms().iter().find(|t| !covered.contains(t.text.as_str())) {
        return Err(Error::MissingTerm(missing.text.clone()));
    }

    let all: Vec<TimeSeries> = groups.iter().flat_map(|g| g.members().iter().map(|m| m.series.clone())).collect();
    let (from, to) = series::align(&all)?.window();

    let mut fi = Vec::with_capacity(vocab.terms().len());
    for g in groups {
        fi.extend(rescale_group(&g.window(from, to)?)?);
    }
    let mut cci = aggregate_index(&fi)?;
    if adjust {
        cci.index = normalize_to_100(&seasonal_adjust(&cci.index)?)?;
        cci.seasonally_adjusted = true;
    }
    Ok(cci)
}
