//! Posting lists compressed by number grouping: runs of consecutive IDs are
//! stored as one inclusive range `s+d` (IDs `s..=s+d`).

use std::fmt;
use std::str::FromStr;

use crate::ObjectId;

/// One item of a posting list: `start` alone when `extra == 0`, otherwise
/// the range `start..=start + extra`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: ObjectId,
    pub extra: u32,
}

impl Span {
    pub fn single(id: ObjectId) -> Self {
        Span { start: id, extra: 0 }
    }

    pub fn range(start: ObjectId, extra: u32) -> Self {
        Span { start, extra }
    }

    pub fn end(&self) -> ObjectId {
        self.start + self.extra
    }

    pub fn len(&self) -> usize {
        self.extra as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.extra {
            0 => write!(f, "{}", self.start),
            d => write!(f, "{}+{}", self.start, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PostingError {
    #[error("ids not strictly increasing at position {0}")]
    Unsorted(usize),
    #[error("malformed posting list `{0}`")]
    Syntax(String),
}

/// Sorted, non-overlapping, non-adjacent spans.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct PostingList {
    spans: Vec<Span>,
}

impl PostingList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every id in `0..n` as a single range.
    pub fn full(n: usize) -> Self {
        match n {
            0 => Self::new(),
            n => PostingList {
                spans: vec![Span::range(0, (n - 1) as u32)],
            },
        }
    }

    /// Groups a strictly increasing id list into maximal ranges.
    pub fn compress(ids: &[ObjectId]) -> Result<Self, PostingError> {
        if let Some(i) = ids.windows(2).position(|w| w[0] >= w[1]) {
            return Err(PostingError::Unsorted(i + 1));
        }
        let mut out = PostingList::new();
        for &id in ids {
            out.push_id(id);
        }
        Ok(out)
    }

    /// Appends an id larger than every id already present.
    pub fn push_id(&mut self, id: ObjectId) {
        self.push_span(Span::single(id));
    }

    /// Appends a span starting after the current end, merging if adjacent.
    fn push_span(&mut self, span: Span) {
        if let Some(last) = self.spans.last_mut() {
            debug_assert!(span.start > last.end());
            if last.end() + 1 == span.start {
                last.extra += span.extra + 1;
                return;
            }
        }
        self.spans.push(span);
    }

    /// Builds a list from arbitrary spans, validating the invariants.
    pub fn from_spans(spans: Vec<Span>) -> Result<Self, PostingError> {
        for (i, w) in spans.windows(2).enumerate() {
            if w[1].start <= w[0].end() + 1 {
                return Err(PostingError::Unsorted(i + 1));
            }
        }
        Ok(PostingList { spans })
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn decompress(&self) -> Vec<ObjectId> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.spans.iter().flat_map(|s| s.start..=s.end())
    }

    /// Number of ids.
    pub fn len(&self) -> usize {
        self.spans.iter().map(Span::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        let i = self.spans.partition_point(|s| s.end() < id);
        self.spans.get(i).is_some_and(|s| s.start <= id)
    }

    /// One linear pass over spans; never expands a range.
    pub fn intersect(&self, other: &PostingList) -> PostingList {
        let (a, b) = (&self.spans, &other.spans);
        let (mut i, mut j) = (0, 0);
        let mut out = PostingList::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].start.max(b[j].start);
            let hi = a[i].end().min(b[j].end());
            if lo <= hi {
                out.push_span(Span::range(lo, hi - lo));
            }
            if a[i].end() < b[j].end() {
                i += 1;
            } else {
                j += 1;
            }
        }
        out
    }

    pub fn union(&self, other: &PostingList) -> PostingList {
        let (a, b) = (&self.spans, &other.spans);
        let (mut i, mut j) = (0, 0);
        let mut out: Vec<Span> = Vec::with_capacity(a.len() + b.len());
        let mut add = |s: Span| match out.last_mut() {
            Some(last) if s.start <= last.end() + 1 => {
                if s.end() > last.end() {
                    last.extra = s.end() - last.start;
                }
            }
            _ => out.push(s),
        };
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i].start <= b[j].start);
            if take_a {
                add(a[i]);
                i += 1;
            } else {
                add(b[j]);
                j += 1;
            }
        }
        PostingList { spans: out }
    }

    /// Intersection of several lists, smallest first. `None` for no lists.
    pub fn intersect_all<'a>(lists: impl IntoIterator<Item = &'a PostingList>) -> Option<PostingList> {
        let mut lists: Vec<&PostingList> = lists.into_iter().collect();
        lists.sort_by_key(|l| l.len());
        let mut iter = lists.into_iter();
        let mut acc = iter.next()?.clone();
        for l in iter {
            if acc.is_empty() {
                break;
            }
            acc = acc.intersect(l);
        }
        Some(acc)
    }

    /// True when no two spans could be merged.
    pub fn is_maximal(&self) -> bool {
        self.spans.windows(2).all(|w| w[1].start > w[0].end() + 1)
    }
}

impl fmt::Display for PostingList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, s) in self.spans.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

/// Parses `[s, s+d, ...]`, with or without a trailing `.`.
impl FromStr for PostingList {
    type Err = PostingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PostingError::Syntax(s.to_string());
        let body = s.trim();
        let body = body.strip_suffix('.').unwrap_or(body).trim_end();
        let body = body
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(bad)?
            .trim();
        if body.is_empty() {
            return Ok(PostingList::new());
        }
        let spans = body
            .split(',')
            .map(|item| {
                let item = item.trim();
                let (start, extra) = match item.split_once('+') {
                    Some((s, d)) => (s.trim(), d.trim().parse::<u32>().map_err(|_| bad())?),
                    None => (item, 0),
                };
                let start = start.parse::<ObjectId>().map_err(|_| bad())?;
                if start.checked_add(extra).is_none() {
                    return Err(bad());
                }
                Ok(Span::range(start, extra))
            })
            .collect::<Result<Vec<_>, _>>()?;
        PostingList::from_spans(spans).map_err(|_| bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn pl(s: &str) -> PostingList {
        s.parse().unwrap()
    }

    #[test]
    fn compress_groups_adjacent_ids() {
        assert_eq!(PostingList::compress(&[1, 2, 3, 7]).unwrap(), pl("[1+2, 7]"));
        assert_eq!(PostingList::compress(&[]).unwrap(), PostingList::new());
        assert_eq!(PostingList::compress(&[1, 2, 3, 7]).unwrap().to_string(), "[1+2, 7]");
    }

    #[test]
    fn compress_long_run_to_single_range() {
        let ids: Vec<u32> = (45591..=46721).collect();
        let list = PostingList::compress(&ids).unwrap();
        assert_eq!(list.to_string(), "[45591+1130]");
        assert_eq!(list.decompress(), ids);
    }

    #[test]
    fn compress_rejects_unsorted_or_duplicate() {
        assert_eq!(PostingList::compress(&[3, 2]), Err(PostingError::Unsorted(1)));
        assert_eq!(PostingList::compress(&[1, 4, 4]), Err(PostingError::Unsorted(2)));
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(pl("[1+9]").intersect(&PostingList::new()), PostingList::new());
        assert_eq!(pl("[1+9]").intersect(&pl("[5+9]")), pl("[5+5]"));
        assert_eq!(pl("[45591+1130]").intersect(&pl("[46000+2000]")), pl("[46000+721]"));
        assert_eq!(pl("[1+9]").intersect(&pl("[0+1, 4+2, 10+5]")), pl("[1, 4+2, 10]"));
    }

    #[test]
    fn intersect_matches_brute_force_on_wide_ranges() {
        let a: BTreeSet<u32> = (45591..=46721).collect();
        let b: BTreeSet<u32> = (46000..=48000).collect();
        let want: Vec<u32> = a.intersection(&b).copied().collect();
        assert_eq!(pl("[45591+1130]").intersect(&pl("[46000+2000]")).decompress(), want);
    }

    #[test]
    fn union_merges() {
        assert_eq!(pl("[1, 5+2]").union(&pl("[2, 8, 20]")), pl("[1+1, 5+3, 20]"));
        assert_eq!(pl("[]").union(&pl("[3]")), pl("[3]"));
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["", "1, 2", "[1, x]", "[3, 2]", "[1, 2]", "[4294967295+1]"] {
            assert!(bad.parse::<PostingList>().is_err(), "{bad}");
        }
        assert_eq!(pl("[0+2, 9].").len(), 4);
    }

    #[test]
    fn contains_uses_spans() {
        let l = pl("[3+4, 10]");
        assert!(l.contains(3) && l.contains(7) && l.contains(10));
        assert!(!l.contains(2) && !l.contains(8) && !l.contains(11));
    }
}
