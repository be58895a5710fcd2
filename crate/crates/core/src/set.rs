//! Finite sets of opaque labels and the label conventions used for
//! synthesized objects (product points, total-space points, sections).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque element label. Labels compare lexicographically, which fixes the
/// canonical order of every emitted set.
pub type Label = String;

/// A finite set of distinct labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FinSet {
    labels: BTreeSet<Label>,
}

impl FinSet {
    pub fn new(labels: impl IntoIterator<Item = impl Into<Label>>) -> Self {
        FinSet {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn empty() -> Self {
        FinSet::default()
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Label> {
        self.labels.iter()
    }

    pub fn is_subset(&self, other: &FinSet) -> bool {
        self.labels.is_subset(&other.labels)
    }

    /// First element of `sub` missing from this set, in label order.
    pub fn first_missing<'a>(&self, sub: &'a BTreeSet<Label>) -> Option<&'a Label> {
        sub.iter().find(|l| !self.labels.contains(*l))
    }

    pub fn intersection(&self, other: &FinSet) -> FinSet {
        FinSet {
            labels: self.labels.intersection(&other.labels).cloned().collect(),
        }
    }

    /// Checks that `subset` only uses labels of this set.
    pub fn check_subset(&self, subset: &BTreeSet<Label>) -> Result<()> {
        match self.first_missing(subset) {
            None => Ok(()),
            Some(l) => Err(Error::LabelMismatch { label: l.clone() }),
        }
    }
}

impl FromIterator<Label> for FinSet {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        FinSet {
            labels: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Canonical label of a pair, used for base points and fiber elements of
/// product bundles.
pub fn pair_label(a: &str, b: &str) -> Label {
    format!("({a},{b})")
}

/// Canonical label of a total-space point `(x, a)` with `a` in the fiber
/// over `x`. The same separator keys the per-pair fiber relations in the
/// JSON documents.
pub fn total_point_label(base: &str, element: &str) -> Label {
    format!("{base}|{element}")
}

/// Splits a total-space label back into its base point and fiber element.
/// Splits at the last separator: base points of higher-level bundles are
/// themselves total-space labels, while fiber elements never contain `|`.
pub fn split_total_point(label: &str) -> Option<(&str, &str)> {
    label.rsplit_once('|')
}

/// Default ceiling for exhaustive enumerations (sections, little groups,
/// materialized filters). The CLI overrides it via `FIBRA_MAX_ENUM`.
pub const DEFAULT_MAX_ENUM: u64 = 1_000_000;

/// Guard for operations that materialize `needed` objects.
pub fn check_enum_limit(what: &str, needed: u128, limit: u64) -> Result<()> {
    if needed > limit as u128 {
        Err(Error::EnumerationLimit {
            what: what.to_string(),
            needed,
            limit,
        })
    } else {
        Ok(())
    }
}
