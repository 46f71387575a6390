use crate::error::{Error, Result};
use crate::pwl::Interval;

/// Branching data that varies with γ: a partition of a domain with one
/// value per interval.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseInfo<T> {
    domain: Interval,
    parts: Vec<(Interval, T)>,
}

impl<T> PiecewiseInfo<T> {
    pub fn single(domain: Interval, info: T) -> Self {
        PiecewiseInfo {
            domain,
            parts: vec![(domain, info)],
        }
    }

    pub fn from_parts(parts: Vec<(Interval, T)>) -> Result<Self> {
        let (first, last) = match (parts.first(), parts.last()) {
            (Some(f), Some(l)) => (f.0, l.0),
            _ => return Err(Error::Partition("no parts".into())),
        };
        for w in parts.windows(2) {
            if w[0].0.hi() != w[1].0.lo() {
                return Err(Error::Partition(format!(
                    "gap or overlap between {} and {}",
                    w[0].0, w[1].0
                )));
            }
        }
        let domain = Interval::new(first.lo(), last.hi())?;
        Ok(PiecewiseInfo { domain, parts })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Interval, T)> {
        self.parts.iter()
    }

    pub fn into_parts(self) -> Vec<(Interval, T)> {
        self.parts
    }
}

impl<T: PartialEq> PiecewiseInfo<T> {
    /// Joins neighbouring intervals that carry equal values.
    pub fn merge_adjacent(self) -> Self {
        let mut parts: Vec<(Interval, T)> = Vec::with_capacity(self.parts.len());
        for (iv, info) in self.parts {
            match parts.last_mut() {
                Some((last, prev)) if *prev == info => last.hi = iv.hi,
                _ => parts.push((iv, info)),
            }
        }
        PiecewiseInfo {
            domain: self.domain,
            parts,
        }
    }
}
