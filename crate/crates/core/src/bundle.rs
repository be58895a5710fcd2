//! Finite bundles: a base set with one finite fiber per point, an optional
//! trivialization onto a typical fiber, and optional topologies on the base
//! and on the total space.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::set::{
    check_enum_limit, pair_label, total_point_label, FinSet, Label, DEFAULT_MAX_ENUM,
};
use crate::topology::FiniteTopology;

/// Per-point bijections from each fiber onto one typical fiber.
///
/// Charts may be missing over some points; such points are reported as
/// degenerate and refuse chart-dependent operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trivialization {
    pub typical: FinSet,
    pub charts: BTreeMap<Label, BTreeMap<Label, Label>>,
}

/// A finite bundle. The total space is `{(x, a) : a ∈ fiber(x)}`, written
/// with `x|a` labels.
#[derive(Debug, Clone)]
pub struct Bundle {
    name: Label,
    base: FinSet,
    fibers: BTreeMap<Label, FinSet>,
    trivialization: Option<Trivialization>,
    base_topology: Option<FiniteTopology>,
    total_topology: Option<FiniteTopology>,
}

// the name is presentation only; all structure is compared
impl PartialEq for Bundle {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.fibers == other.fibers
            && self.trivialization == other.trivialization
            && self.base_topology == other.base_topology
            && self.total_topology == other.total_topology
    }
}

impl Eq for Bundle {}

impl Bundle {
    pub fn new(
        name: impl Into<Label>,
        base: FinSet,
        fibers: BTreeMap<Label, FinSet>,
        trivialization: Option<Trivialization>,
    ) -> Result<Self> {
        let keys: BTreeSet<Label> = fibers.keys().cloned().collect();
        if &keys != base.labels() {
            let missing = base
                .iter()
                .find(|l| !keys.contains(*l))
                .cloned()
                .or_else(|| keys.iter().find(|l| !base.contains(l)).cloned())
                .unwrap_or_default();
            return Err(Error::InvalidBundle {
                reason: format!("fibers must be given for exactly the base points; `{missing}` differs"),
            });
        }
        // fiber elements must stay `|`-free so total-space labels split back
        for (x, fiber) in &fibers {
            if let Some(bad) = fiber.iter().find(|a| a.contains('|')) {
                return Err(Error::InvalidBundle {
                    reason: format!("fiber element `{bad}` over `{x}` contains the reserved `|`"),
                });
            }
        }
        if let Some(t) = &trivialization {
            for (x, chart) in &t.charts {
                let fiber = fibers.get(x).ok_or_else(|| Error::InvalidBundle {
                    reason: format!("chart over unknown base point `{x}`"),
                })?;
                let dom: BTreeSet<Label> = chart.keys().cloned().collect();
                let img: BTreeSet<Label> = chart.values().cloned().collect();
                if &dom != fiber.labels() || &img != t.typical.labels() || img.len() != chart.len()
                {
                    return Err(Error::InvalidBundle {
                        reason: format!("chart over `{x}` is not a bijection onto the typical fiber"),
                    });
                }
            }
        }
        Ok(Bundle {
            name: name.into(),
            base,
            fibers,
            trivialization,
            base_topology: None,
            total_topology: None,
        })
    }

    /// Attaches a topology to the base; its points must be the base labels.
    pub fn with_base_topology(mut self, t: FiniteTopology) -> Result<Self> {
        if t.point_set() != self.base {
            return Err(Error::InvalidBundle {
                reason: "base topology points differ from the base".into(),
            });
        }
        self.base_topology = Some(t);
        Ok(self)
    }

    /// Attaches a topology to the total space; its points must be the
    /// `x|a` total-space labels.
    pub fn with_total_topology(mut self, t: FiniteTopology) -> Result<Self> {
        let total: BTreeSet<Label> = self.total_labels().into_iter().collect();
        if t.point_set().labels() != &total {
            return Err(Error::InvalidBundle {
                reason: "total topology points differ from the total space".into(),
            });
        }
        self.total_topology = Some(t);
        Ok(self)
    }

    pub fn name(&self) -> &Label {
        &self.name
    }

    pub fn base(&self) -> &FinSet {
        &self.base
    }

    pub fn fibers(&self) -> &BTreeMap<Label, FinSet> {
        &self.fibers
    }

    pub fn fiber(&self, x: &str) -> Result<&FinSet> {
        self.fibers.get(x).ok_or_else(|| Error::UnknownPoint {
            point: x.to_string(),
        })
    }

    pub fn trivialization(&self) -> Option<&Trivialization> {
        self.trivialization.as_ref()
    }

    pub fn base_topology(&self) -> Option<&FiniteTopology> {
        self.base_topology.as_ref()
    }

    pub fn total_topology(&self) -> Option<&FiniteTopology> {
        self.total_topology.as_ref()
    }

    /// Sorted labels of the total space, `x|a` per point.
    pub fn total_labels(&self) -> Vec<Label> {
        let mut out = Vec::new();
        for (x, fiber) in &self.fibers {
            for a in fiber.iter() {
                out.push(total_point_label(x, a));
            }
        }
        out.sort();
        out
    }

    pub fn total_size(&self) -> usize {
        self.fibers.values().map(|f| f.len()).sum()
    }

    /// Number of total sections, as a big product.
    pub fn section_count(&self) -> u128 {
        self.fibers
            .values()
            .fold(1u128, |acc, f| acc.saturating_mul(f.len() as u128))
    }

    /// The chart over `x`, required.
    pub fn chart(&self, x: &str) -> Result<&BTreeMap<Label, Label>> {
        let t = self
            .trivialization
            .as_ref()
            .ok_or_else(|| Error::MissingTrivialization {
                bundle: self.name.clone(),
            })?;
        t.charts.get(x).ok_or_else(|| Error::MissingChart {
            point: x.to_string(),
        })
    }
}

/// A total section: one fiber element per base point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Section {
    assignment: BTreeMap<Label, Label>,
}

impl Section {
    pub fn new(assignment: BTreeMap<Label, Label>) -> Self {
        Section { assignment }
    }

    pub fn assignment(&self) -> &BTreeMap<Label, Label> {
        &self.assignment
    }

    pub fn value(&self, x: &str) -> Option<&Label> {
        self.assignment.get(x)
    }

    /// Checks totality and membership against a bundle.
    pub fn validate(&self, bundle: &Bundle) -> Result<()> {
        for x in bundle.base().iter() {
            match self.assignment.get(x) {
                None => {
                    return Err(Error::SectionMismatch {
                        reason: format!("no value over base point `{x}`"),
                    })
                }
                Some(a) => {
                    if !bundle.fiber(x)?.contains(a) {
                        return Err(Error::SectionMismatch {
                            reason: format!("value `{a}` over `{x}` is not in the fiber"),
                        });
                    }
                }
            }
        }
        if self.assignment.len() != bundle.base().len() {
            return Err(Error::SectionMismatch {
                reason: "assignment mentions points outside the base".into(),
            });
        }
        Ok(())
    }

    /// Canonical label, `x=a` entries joined by `;` in point order.
    pub fn label(&self) -> Label {
        self.assignment
            .iter()
            .map(|(x, a)| format!("{x}={a}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Witness that one bundle embeds in another: an injective base map plus a
/// per-point injection of fibers, commuting with the projections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubbundleWitness {
    pub base_injection: BTreeMap<Label, Label>,
    pub fiber_injections: BTreeMap<Label, BTreeMap<Label, Label>>,
}

impl SubbundleWitness {
    /// Validates this witness against a (sub, super) pair.
    pub fn validate(&self, sub: &Bundle, sup: &Bundle) -> Result<()> {
        let mut base_images = BTreeSet::new();
        for x in sub.base().iter() {
            let fx = self
                .base_injection
                .get(x)
                .ok_or_else(|| Error::InvalidBundle {
                    reason: format!("witness base map misses `{x}`"),
                })?;
            if !sup.base().contains(fx) {
                return Err(Error::NotContained {
                    first_violation: x.clone(),
                });
            }
            if !base_images.insert(fx.clone()) {
                return Err(Error::InvalidBundle {
                    reason: format!("witness base map is not injective at `{x}`"),
                });
            }
            let inj = self
                .fiber_injections
                .get(x)
                .ok_or_else(|| Error::InvalidBundle {
                    reason: format!("witness fiber map misses `{x}`"),
                })?;
            let sup_fiber = sup.fiber(fx)?;
            let mut fiber_images = BTreeSet::new();
            for a in sub.fiber(x)?.iter() {
                let fa = inj.get(a).ok_or_else(|| Error::InvalidBundle {
                    reason: format!("witness fiber map over `{x}` misses `{a}`"),
                })?;
                if !sup_fiber.contains(fa) {
                    return Err(Error::NotContained {
                        first_violation: total_point_label(x, a),
                    });
                }
                if !fiber_images.insert(fa.clone()) {
                    return Err(Error::InvalidBundle {
                        reason: format!("witness fiber map over `{x}` is not injective"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Composite witness: first this embedding, then `outer`.
    pub fn compose(&self, outer: &SubbundleWitness) -> Result<SubbundleWitness> {
        let mut base_injection = BTreeMap::new();
        let mut fiber_injections = BTreeMap::new();
        for (x, mid) in &self.base_injection {
            let end = outer
                .base_injection
                .get(mid)
                .ok_or_else(|| Error::InvalidBundle {
                    reason: format!("outer witness base map misses `{mid}`"),
                })?;
            base_injection.insert(x.clone(), end.clone());
            let inner_fiber = &self.fiber_injections[x];
            let outer_fiber =
                outer
                    .fiber_injections
                    .get(mid)
                    .ok_or_else(|| Error::InvalidBundle {
                        reason: format!("outer witness fiber map misses `{mid}`"),
                    })?;
            let mut composed = BTreeMap::new();
            for (a, b) in inner_fiber {
                let c = outer_fiber.get(b).ok_or_else(|| Error::InvalidBundle {
                    reason: format!("outer witness fiber map over `{mid}` misses `{b}`"),
                })?;
                composed.insert(a.clone(), c.clone());
            }
            fiber_injections.insert(x.clone(), composed);
        }
        Ok(SubbundleWitness {
            base_injection,
            fiber_injections,
        })
    }
}

/// Containment check: `sub`'s base points and fiber elements must be drawn
/// from `sup`'s. On success the witness carries identity injections.
pub fn is_subbundle(sub: &Bundle, sup: &Bundle) -> Result<SubbundleWitness> {
    for x in sub.base().iter() {
        if !sup.base().contains(x) {
            return Err(Error::NotContained {
                first_violation: x.clone(),
            });
        }
        let sup_fiber = sup.fiber(x)?;
        for a in sub.fiber(x)?.iter() {
            if !sup_fiber.contains(a) {
                return Err(Error::NotContained {
                    first_violation: total_point_label(x, a),
                });
            }
        }
    }
    let base_injection = sub.base().iter().map(|x| (x.clone(), x.clone())).collect();
    let fiber_injections = sub
        .base()
        .iter()
        .map(|x| {
            (
                x.clone(),
                sub.fibers()[x]
                    .iter()
                    .map(|a| (a.clone(), a.clone()))
                    .collect(),
            )
        })
        .collect();
    Ok(SubbundleWitness {
        base_injection,
        fiber_injections,
    })
}

/// Cartesian product: base points and fiber elements are paired up, and a
/// componentwise trivialization is kept where both factors have charts.
pub fn product(a: &Bundle, b: &Bundle) -> Bundle {
    let mut fibers = BTreeMap::new();
    let mut base = BTreeSet::new();
    for x in a.base().iter() {
        for y in b.base().iter() {
            let point = pair_label(x, y);
            let mut fiber = BTreeSet::new();
            for p in a.fibers()[x].iter() {
                for q in b.fibers()[y].iter() {
                    fiber.insert(pair_label(p, q));
                }
            }
            fibers.insert(point.clone(), fiber.into_iter().collect());
            base.insert(point);
        }
    }
    let trivialization = match (a.trivialization(), b.trivialization()) {
        (Some(ta), Some(tb)) => {
            let typical: FinSet = ta
                .typical
                .iter()
                .flat_map(|p| tb.typical.iter().map(move |q| pair_label(p, q)))
                .collect();
            let mut charts = BTreeMap::new();
            for x in a.base().iter() {
                for y in b.base().iter() {
                    if let (Some(ca), Some(cb)) = (ta.charts.get(x), tb.charts.get(y)) {
                        let mut chart = BTreeMap::new();
                        for (p, tp) in ca {
                            for (q, tq) in cb {
                                chart.insert(pair_label(p, q), pair_label(tp, tq));
                            }
                        }
                        charts.insert(pair_label(x, y), chart);
                    }
                }
            }
            Some(Trivialization { typical, charts })
        }
        _ => None,
    };
    Bundle::new(
        pair_label(a.name(), b.name()),
        base.into_iter().collect(),
        fibers,
        trivialization,
    )
    .expect("product of valid bundles is valid")
}

/// Reduced product of two bundles over the same base: the base is shared
/// and fibers are paired pointwise.
pub fn reduced_product(a: &Bundle, b: &Bundle) -> Result<Bundle> {
    if a.base() != b.base() {
        return Err(Error::BaseMismatch {
            expected: a.base().to_string(),
            found: b.base().to_string(),
        });
    }
    let mut fibers = BTreeMap::new();
    for x in a.base().iter() {
        let mut fiber = BTreeSet::new();
        for p in a.fibers()[x].iter() {
            for q in b.fibers()[x].iter() {
                fiber.insert(pair_label(p, q));
            }
        }
        fibers.insert(x.clone(), fiber.into_iter().collect());
    }
    let trivialization = match (a.trivialization(), b.trivialization()) {
        (Some(ta), Some(tb)) => {
            let typical: FinSet = ta
                .typical
                .iter()
                .flat_map(|p| tb.typical.iter().map(move |q| pair_label(p, q)))
                .collect();
            let mut charts = BTreeMap::new();
            for x in a.base().iter() {
                if let (Some(ca), Some(cb)) = (ta.charts.get(x), tb.charts.get(x)) {
                    let mut chart = BTreeMap::new();
                    for (p, tp) in ca {
                        for (q, tq) in cb {
                            chart.insert(pair_label(p, q), pair_label(tp, tq));
                        }
                    }
                    charts.insert(x.clone(), chart);
                }
            }
            Some(Trivialization { typical, charts })
        }
        _ => None,
    };
    Bundle::new(
        pair_label(a.name(), b.name()),
        a.base().clone(),
        fibers,
        trivialization,
    )
}

/// All total sections in canonical order.
pub fn sections(bundle: &Bundle) -> Result<Vec<Section>> {
    sections_bounded(bundle, DEFAULT_MAX_ENUM)
}

pub fn sections_bounded(bundle: &Bundle, limit: u64) -> Result<Vec<Section>> {
    for (x, fiber) in bundle.fibers() {
        if fiber.is_empty() {
            return Err(Error::EmptyFiber { point: x.clone() });
        }
    }
    check_enum_limit("sections", bundle.section_count(), limit)?;
    let points: Vec<&Label> = bundle.base().iter().collect();
    let choices: Vec<Vec<&Label>> = points
        .iter()
        .map(|x| bundle.fibers()[*x].iter().collect())
        .collect();
    let mut out = vec![BTreeMap::new()];
    for (x, fiber) in points.iter().zip(&choices) {
        let mut next = Vec::with_capacity(out.len() * fiber.len());
        for partial in &out {
            for a in fiber {
                let mut p: BTreeMap<Label, Label> = partial.clone();
                p.insert((*x).clone(), (*a).clone());
                next.push(p);
            }
        }
        out = next;
    }
    Ok(out.into_iter().map(Section::new).collect())
}

/// Base points whose fiber deviates from the rest: points whose fiber size
/// differs from the strict-majority size, plus chartless points when a
/// trivialization is present. With no strict majority all points are
/// reported and the caller decides.
pub fn degenerate_fibers(bundle: &Bundle) -> BTreeSet<Label> {
    let mut by_size: BTreeMap<usize, usize> = BTreeMap::new();
    for fiber in bundle.fibers().values() {
        *by_size.entry(fiber.len()).or_default() += 1;
    }
    let majority = by_size
        .iter()
        .find(|(_, &count)| 2 * count > bundle.base().len())
        .map(|(&size, _)| size);
    let mut out: BTreeSet<Label> = match majority {
        Some(size) => bundle
            .fibers()
            .iter()
            .filter(|(_, f)| f.len() != size)
            .map(|(x, _)| x.clone())
            .collect(),
        None => bundle.base().iter().cloned().collect(),
    };
    if let Some(t) = bundle.trivialization() {
        for x in bundle.base().iter() {
            if !t.charts.contains_key(x) {
                out.insert(x.clone());
            }
        }
    }
    out
}
