//! Finite topological spaces, filters, and filter convergence.
//!
//! Spaces keep their open families as bitmasks over the sorted point list,
//! so the exhaustive continuity checks stay cheap. Everything exposed to
//! callers speaks labels.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::{check_enum_limit, FinSet, Label, DEFAULT_MAX_ENUM};

/// Hard cap imposed by the bitmask representation.
pub const MAX_POINTS: usize = 64;

/// A finite point set with an explicit family of open sets.
///
/// Construction validates that the family contains the empty set and the
/// whole space and is closed under pairwise union and intersection; invalid
/// families are rejected, never repaired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TopologyDoc", into = "TopologyDoc")]
pub struct FiniteTopology {
    points: Vec<Label>,
    index: BTreeMap<Label, usize>,
    opens: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TopologyDoc {
    points: Vec<Label>,
    opens: Vec<Vec<Label>>,
}

impl From<FiniteTopology> for TopologyDoc {
    fn from(t: FiniteTopology) -> Self {
        TopologyDoc {
            opens: t.opens.iter().map(|&m| t.mask_labels_vec(m)).collect(),
            points: t.points,
        }
    }
}

impl TryFrom<TopologyDoc> for FiniteTopology {
    type Error = Error;

    fn try_from(doc: TopologyDoc) -> Result<Self> {
        let opens: Vec<BTreeSet<Label>> = doc
            .opens
            .into_iter()
            .map(|o| o.into_iter().collect())
            .collect();
        FiniteTopology::new(doc.points, opens)
    }
}

impl FiniteTopology {
    pub fn new(
        points: impl IntoIterator<Item = impl Into<Label>>,
        opens: impl IntoIterator<Item = BTreeSet<Label>>,
    ) -> Result<Self> {
        let point_set: BTreeSet<Label> = points.into_iter().map(Into::into).collect();
        if point_set.len() > MAX_POINTS {
            return Err(Error::TooManyPoints {
                got: point_set.len(),
                max: MAX_POINTS,
            });
        }
        let points: Vec<Label> = point_set.into_iter().collect();
        let index: BTreeMap<Label, usize> = points
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();

        let mut masks: BTreeSet<u64> = BTreeSet::new();
        for open in opens {
            let mut mask = 0u64;
            for l in &open {
                match index.get(l) {
                    Some(&i) => mask |= 1 << i,
                    None => {
                        return Err(Error::InvalidTopology {
                            reason: format!("open set uses foreign label `{l}`"),
                        })
                    }
                }
            }
            masks.insert(mask);
        }
        let full = full_mask(points.len());
        if !masks.contains(&0) {
            return Err(Error::InvalidTopology {
                reason: "the empty set is not open".into(),
            });
        }
        if !masks.contains(&full) {
            return Err(Error::InvalidTopology {
                reason: "the full point set is not open".into(),
            });
        }
        let list: Vec<u64> = masks.iter().copied().collect();
        for (i, &a) in list.iter().enumerate() {
            for &b in &list[i + 1..] {
                if !masks.contains(&(a | b)) {
                    let t = FiniteTopology {
                        points: points.clone(),
                        index: index.clone(),
                        opens: vec![],
                    };
                    return Err(Error::InvalidTopology {
                        reason: format!(
                            "not closed under union: {} ∪ {} is missing",
                            t.fmt_mask(a),
                            t.fmt_mask(b)
                        ),
                    });
                }
                if !masks.contains(&(a & b)) {
                    let t = FiniteTopology {
                        points: points.clone(),
                        index: index.clone(),
                        opens: vec![],
                    };
                    return Err(Error::InvalidTopology {
                        reason: format!(
                            "not closed under intersection: {} ∩ {} is missing",
                            t.fmt_mask(a),
                            t.fmt_mask(b)
                        ),
                    });
                }
            }
        }
        Ok(FiniteTopology {
            points,
            index,
            opens: list,
        })
    }

    /// Topology in which every subset is open.
    pub fn discrete(points: impl IntoIterator<Item = impl Into<Label>>) -> Result<Self> {
        let labels: BTreeSet<Label> = points.into_iter().map(Into::into).collect();
        let n = labels.len();
        if n > 20 {
            return Err(Error::TooManyPoints { got: n, max: 20 });
        }
        let points: Vec<Label> = labels.into_iter().collect();
        let index: BTreeMap<Label, usize> = points
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(FiniteTopology {
            opens: (0..1u64 << n).collect(),
            points,
            index,
        })
    }

    /// Topology whose only opens are the empty set and the whole space.
    pub fn indiscrete(points: impl IntoIterator<Item = impl Into<Label>>) -> Result<Self> {
        let labels: BTreeSet<Label> = points.into_iter().map(Into::into).collect();
        FiniteTopology::new(labels.clone(), [BTreeSet::new(), labels])
    }

    pub fn points(&self) -> &[Label] {
        &self.points
    }

    pub fn point_set(&self) -> FinSet {
        FinSet::new(self.points.iter().cloned())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn opens_masks(&self) -> &[u64] {
        &self.opens
    }

    pub fn opens(&self) -> Vec<BTreeSet<Label>> {
        self.opens.iter().map(|&m| self.mask_labels(m)).collect()
    }

    pub fn full_mask(&self) -> u64 {
        full_mask(self.points.len())
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Bitmask of a labeled subset; rejects foreign labels.
    pub fn mask_of(&self, subset: &BTreeSet<Label>) -> Result<u64> {
        let mut mask = 0u64;
        for l in subset {
            match self.index.get(l) {
                Some(&i) => mask |= 1 << i,
                None => {
                    return Err(Error::SpaceMismatch {
                        space: self.point_set().to_string(),
                        label: l.clone(),
                    })
                }
            }
        }
        Ok(mask)
    }

    pub fn mask_labels(&self, mask: u64) -> BTreeSet<Label> {
        self.mask_labels_vec(mask).into_iter().collect()
    }

    fn mask_labels_vec(&self, mask: u64) -> Vec<Label> {
        self.points
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, l)| l.clone())
            .collect()
    }

    fn fmt_mask(&self, mask: u64) -> String {
        format!("{{{}}}", self.mask_labels_vec(mask).join(","))
    }

    pub fn is_open_mask(&self, mask: u64) -> bool {
        self.opens.binary_search(&mask).is_ok()
    }

    pub fn is_open(&self, subset: &BTreeSet<Label>) -> Result<bool> {
        Ok(self.is_open_mask(self.mask_of(subset)?))
    }
}

/// All topologies on the given labels, by brute force over open families.
/// Practical for at most four points.
pub fn enumerate_topologies(labels: &BTreeSet<Label>) -> Result<Vec<FiniteTopology>> {
    let n = labels.len();
    if n > 4 {
        return Err(Error::EnumerationLimit {
            what: format!("topologies on {n} points"),
            needed: 1u128 << ((1usize << n) - 2),
            limit: 1 << 14,
        });
    }
    let points: Vec<Label> = labels.iter().cloned().collect();
    let full = full_mask(n);
    // subsets other than ∅ and the full space are free to include
    let free: Vec<u64> = (0..=full).filter(|&m| m != 0 && m != full).collect();
    let mut out = Vec::new();
    for choice in 0u64..1 << free.len() {
        let mut opens: BTreeSet<u64> = [0, full].into_iter().collect();
        for (i, &m) in free.iter().enumerate() {
            if choice & (1 << i) != 0 {
                opens.insert(m);
            }
        }
        let closed = opens.iter().all(|&a| {
            opens
                .iter()
                .all(|&b| opens.contains(&(a | b)) && opens.contains(&(a & b)))
        });
        if closed {
            let sets: Vec<BTreeSet<Label>> = opens
                .iter()
                .map(|&m| {
                    points
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| m & (1 << i) != 0)
                        .map(|(_, l)| l.clone())
                        .collect()
                })
                .collect();
            out.push(FiniteTopology::new(points.clone(), sets)?);
        }
    }
    Ok(out)
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A proper filter on a finite space, stored as the explicit upward-closed
/// family of member sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    space: FiniteTopology,
    members: Vec<u64>,
}

impl Filter {
    /// Validates the filter axioms: nonempty, proper, upward closed, and
    /// closed under pairwise intersection.
    pub fn new(space: FiniteTopology, members: Vec<BTreeSet<Label>>) -> Result<Self> {
        let mut masks = BTreeSet::new();
        for m in &members {
            masks.insert(space.mask_of(m)?);
        }
        if masks.is_empty() {
            return Err(Error::InvalidFilter {
                reason: "member family is empty".into(),
            });
        }
        if masks.contains(&0) {
            return Err(Error::InvalidFilter {
                reason: "contains the empty set (improper)".into(),
            });
        }
        let n = space.len();
        for &m in &masks {
            for i in 0..n {
                let sup = m | (1 << i);
                if !masks.contains(&sup) {
                    return Err(Error::InvalidFilter {
                        reason: format!(
                            "not upward closed: superset {} of member {} is missing",
                            space.fmt_mask(sup),
                            space.fmt_mask(m)
                        ),
                    });
                }
            }
        }
        let list: Vec<u64> = masks.iter().copied().collect();
        for (i, &a) in list.iter().enumerate() {
            for &b in &list[i + 1..] {
                if !masks.contains(&(a & b)) {
                    return Err(Error::InvalidFilter {
                        reason: format!(
                            "not intersection closed: {} ∩ {} is missing",
                            space.fmt_mask(a),
                            space.fmt_mask(b)
                        ),
                    });
                }
            }
        }
        Ok(Filter {
            space,
            members: list,
        })
    }

    /// Principal filter: all supersets of `core`.
    pub fn principal(space: FiniteTopology, core: &BTreeSet<Label>) -> Result<Self> {
        if core.is_empty() {
            return Err(Error::EmptyTarget);
        }
        let core_mask = space.mask_of(core)?;
        let members = supersets_of_mask(core_mask, space.len(), DEFAULT_MAX_ENUM)?;
        Ok(Filter { space, members })
    }

    pub fn space(&self) -> &FiniteTopology {
        &self.space
    }

    pub fn member_masks(&self) -> &[u64] {
        &self.members
    }

    pub fn members(&self) -> Vec<BTreeSet<Label>> {
        self.members
            .iter()
            .map(|&m| self.space.mask_labels(m))
            .collect()
    }

    pub fn contains_mask(&self, mask: u64) -> bool {
        self.members.binary_search(&mask).is_ok()
    }

    pub fn contains(&self, set: &BTreeSet<Label>) -> Result<bool> {
        Ok(self.contains_mask(self.space.mask_of(set)?))
    }

    /// `other` refines this filter (has at least the same members).
    pub fn is_refined_by(&self, other: &Filter) -> bool {
        self.space == other.space && self.members.iter().all(|m| other.contains_mask(*m))
    }

    /// Filter convergence: the filter refines the neighborhood filter of
    /// `target`. Equivalently, every open superset of `target` is a member.
    pub fn converges_to(&self, target: &BTreeSet<Label>) -> Result<bool> {
        if target.is_empty() {
            return Err(Error::EmptyTarget);
        }
        let t = self.space.mask_of(target)?;
        Ok(self
            .space
            .opens_masks()
            .iter()
            .filter(|&&u| u & t == t)
            .all(|&u| self.contains_mask(u)))
    }
}

/// The neighborhood filter of a nonempty target set: all sets `V` such that
/// some open `U` satisfies `target ⊆ U ⊆ V`.
pub fn neighborhood_filter(space: &FiniteTopology, target: &BTreeSet<Label>) -> Result<Filter> {
    neighborhood_filter_bounded(space, target, DEFAULT_MAX_ENUM)
}

pub fn neighborhood_filter_bounded(
    space: &FiniteTopology,
    target: &BTreeSet<Label>,
    limit: u64,
) -> Result<Filter> {
    if target.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let t = space.mask_of(target)?;
    let mut members: BTreeSet<u64> = BTreeSet::new();
    for &u in space.opens_masks() {
        if u & t == t {
            for sup in supersets_of_mask(u, space.len(), limit)? {
                members.insert(sup);
            }
            check_enum_limit("neighborhood filter members", members.len() as u128, limit)?;
        }
    }
    Ok(Filter {
        space: space.clone(),
        members: members.into_iter().collect(),
    })
}

/// All supersets of a mask within an `n`-point space, ascending.
pub(crate) fn supersets_of_mask(mask: u64, n: usize, limit: u64) -> Result<Vec<u64>> {
    let free: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
    check_enum_limit("supersets", 1u128 << free.len(), limit)?;
    let mut out = Vec::with_capacity(1 << free.len());
    for choice in 0u64..1 << free.len() {
        let mut m = mask;
        for (i, &bit) in free.iter().enumerate() {
            if choice & (1 << i) != 0 {
                m |= 1 << bit;
            }
        }
        out.push(m);
    }
    out.sort_unstable();
    Ok(out)
}

/// A filter base: nonempty sets, any two of which contain a common member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterBase {
    space: FiniteTopology,
    sets: Vec<u64>,
}

impl FilterBase {
    pub fn new(space: FiniteTopology, sets: Vec<BTreeSet<Label>>) -> Result<Self> {
        let mut masks = BTreeSet::new();
        for s in &sets {
            let m = space.mask_of(s)?;
            if m == 0 {
                return Err(Error::InvalidFilterBase {
                    reason: "contains the empty set".into(),
                });
            }
            masks.insert(m);
        }
        if masks.is_empty() {
            return Err(Error::InvalidFilterBase {
                reason: "the family is empty".into(),
            });
        }
        let list: Vec<u64> = masks.iter().copied().collect();
        for (i, &a) in list.iter().enumerate() {
            for &b in &list[i..] {
                let meet = a & b;
                if !list.iter().any(|&r| r & meet == r) {
                    return Err(Error::InvalidFilterBase {
                        reason: format!(
                            "no member inside {} ∩ {}",
                            space.fmt_mask(a),
                            space.fmt_mask(b)
                        ),
                    });
                }
            }
        }
        Ok(FilterBase { space, sets: list })
    }

    pub fn space(&self) -> &FiniteTopology {
        &self.space
    }

    pub fn sets(&self) -> Vec<BTreeSet<Label>> {
        self.sets.iter().map(|&m| self.space.mask_labels(m)).collect()
    }

    pub fn set_masks(&self) -> &[u64] {
        &self.sets
    }

    /// The generated filter: the upward closure of the base.
    pub fn generate(&self) -> Result<Filter> {
        self.generate_bounded(DEFAULT_MAX_ENUM)
    }

    pub fn generate_bounded(&self, limit: u64) -> Result<Filter> {
        let mut members: BTreeSet<u64> = BTreeSet::new();
        for &s in &self.sets {
            for sup in supersets_of_mask(s, self.space.len(), limit)? {
                members.insert(sup);
            }
            check_enum_limit("generated filter members", members.len() as u128, limit)?;
        }
        Filter::new(
            self.space.clone(),
            members.iter().map(|&m| self.space.mask_labels(m)).collect(),
        )
    }

    /// Base convergence: every open superset of `target` contains a base set.
    pub fn converges_to(&self, target: &BTreeSet<Label>) -> Result<bool> {
        if target.is_empty() {
            return Err(Error::EmptyTarget);
        }
        let t = self.space.mask_of(target)?;
        Ok(self
            .space
            .opens_masks()
            .iter()
            .filter(|&&u| u & t == t)
            .all(|&u| self.sets.iter().any(|&s| s & u == s)))
    }
}
