//! Reduced fibered correspondences: fiber relations confined to fibers
//! over the same base point, together with the relation-property checks,
//! classification, n-ary fibered relations, and the diagonal lift into the
//! general fibered form.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bundle::{sections_bounded, Bundle, Section};
use crate::error::{Error, Result};
use crate::fibered::{compose_pairs, transpose_pairs, FiberRelation, FiberedCorrespondence};
use crate::relation::Correspondence;
use crate::set::{FinSet, Label, DEFAULT_MAX_ENUM};

/// A reduced fibered correspondence between bundles over a shared base:
/// a domain of base points and one relation `F_x ⊆ A_x × B_x` per point.
#[derive(Debug, Clone)]
pub struct ReducedFiberedCorrespondence {
    name: Label,
    source: Bundle,
    target: Bundle,
    domain: FinSet,
    fiber_relations: BTreeMap<Label, FiberRelation>,
}

impl PartialEq for ReducedFiberedCorrespondence {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.domain == other.domain
            && self.fiber_relations == other.fiber_relations
    }
}

impl Eq for ReducedFiberedCorrespondence {}

impl ReducedFiberedCorrespondence {
    pub fn new(
        name: impl Into<Label>,
        source: Bundle,
        target: Bundle,
        domain: FinSet,
        fiber_relations: BTreeMap<Label, FiberRelation>,
    ) -> Result<Self> {
        if source.base() != target.base() {
            return Err(Error::BaseMismatch {
                expected: source.base().to_string(),
                found: target.base().to_string(),
            });
        }
        if !domain.is_subset(source.base()) {
            let stray = domain
                .iter()
                .find(|x| !source.base().contains(x))
                .cloned()
                .unwrap_or_default();
            return Err(Error::InvalidFibered {
                reason: format!("domain point `{stray}` is not in the base"),
            });
        }
        let keys: BTreeSet<&Label> = fiber_relations.keys().collect();
        let dom: BTreeSet<&Label> = domain.iter().collect();
        if keys != dom {
            return Err(Error::InvalidFibered {
                reason: "fiber relations must be keyed by exactly the domain points".into(),
            });
        }
        for (x, rel) in &fiber_relations {
            let fx = source.fiber(x)?;
            let gx = target.fiber(x)?;
            for (a, b) in rel {
                if !fx.contains(a) {
                    return Err(Error::InvalidFibered {
                        reason: format!("element `{a}` is not in the source fiber over `{x}`"),
                    });
                }
                if !gx.contains(b) {
                    return Err(Error::InvalidFibered {
                        reason: format!("element `{b}` is not in the target fiber over `{x}`"),
                    });
                }
            }
        }
        Ok(ReducedFiberedCorrespondence {
            name: name.into(),
            source,
            target,
            domain,
            fiber_relations,
        })
    }

    pub fn name(&self) -> &Label {
        &self.name
    }

    pub fn source(&self) -> &Bundle {
        &self.source
    }

    pub fn target(&self) -> &Bundle {
        &self.target
    }

    pub fn domain(&self) -> &FinSet {
        &self.domain
    }

    pub fn fiber_relations(&self) -> &BTreeMap<Label, FiberRelation> {
        &self.fiber_relations
    }

    pub fn fiber_relation(&self, x: &str) -> Result<&FiberRelation> {
        self.fiber_relations
            .get(x)
            .ok_or_else(|| Error::UnknownPoint {
                point: x.to_string(),
            })
    }

    /// Pointwise containment in `other`: same endpoints, domain contained,
    /// and each fiber relation contained.
    pub fn is_contained_in(&self, other: &ReducedFiberedCorrespondence) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.domain.is_subset(&other.domain)
            && self
                .fiber_relations
                .iter()
                .all(|(x, rel)| rel.is_subset(&other.fiber_relations[x]))
    }
}

/// Reduced diagonal of a bundle: the full base with the identity relation
/// in every fiber.
pub fn reduced_diagonal(a: &Bundle) -> ReducedFiberedCorrespondence {
    ReducedFiberedCorrespondence {
        name: format!("diag({})", a.name()),
        source: a.clone(),
        target: a.clone(),
        domain: a.base().clone(),
        fiber_relations: a
            .base()
            .iter()
            .map(|x| {
                (
                    x.clone(),
                    a.fibers()[x]
                        .iter()
                        .map(|p| (p.clone(), p.clone()))
                        .collect(),
                )
            })
            .collect(),
    }
}

/// Composition `h ∘ f` of reduced fibered correspondences: defined on the
/// intersection of the domains, per-point set composition in each fiber.
pub fn reduced_compose(
    h: &ReducedFiberedCorrespondence,
    f: &ReducedFiberedCorrespondence,
) -> Result<ReducedFiberedCorrespondence> {
    if f.source.base() != h.source.base() {
        return Err(Error::BundleMismatch {
            reason: "reduced correspondences live over different bases".into(),
        });
    }
    if f.target != h.source {
        return Err(Error::BundleMismatch {
            reason: format!("target of `{}` differs from source of `{}`", f.name, h.name),
        });
    }
    let domain = f.domain.intersection(&h.domain);
    let fiber_relations = domain
        .iter()
        .map(|x| {
            (
                x.clone(),
                compose_pairs(&h.fiber_relations[x], &f.fiber_relations[x]),
            )
        })
        .collect();
    Ok(ReducedFiberedCorrespondence {
        name: format!("({}∘{})", h.name, f.name),
        source: f.source.clone(),
        target: h.target.clone(),
        domain,
        fiber_relations,
    })
}

/// Inverse of a reduced fibered correspondence; always defined.
pub fn reduced_inverse(f: &ReducedFiberedCorrespondence) -> ReducedFiberedCorrespondence {
    ReducedFiberedCorrespondence {
        name: format!("{}⁻¹", f.name),
        source: f.target.clone(),
        target: f.source.clone(),
        domain: f.domain.clone(),
        fiber_relations: f
            .fiber_relations
            .iter()
            .map(|(x, rel)| (x.clone(), transpose_pairs(rel)))
            .collect(),
    }
}

/// Pointwise intersection of two reduced correspondences with equal
/// endpoints, on the intersection of their domains.
pub fn reduced_intersection(
    a: &ReducedFiberedCorrespondence,
    b: &ReducedFiberedCorrespondence,
) -> Result<ReducedFiberedCorrespondence> {
    if a.source != b.source || a.target != b.target {
        return Err(Error::BundleMismatch {
            reason: "intersection needs equal source and target bundles".into(),
        });
    }
    let domain = a.domain.intersection(&b.domain);
    let fiber_relations = domain
        .iter()
        .map(|x| {
            (
                x.clone(),
                a.fiber_relations[x]
                    .intersection(&b.fiber_relations[x])
                    .cloned()
                    .collect(),
            )
        })
        .collect();
    Ok(ReducedFiberedCorrespondence {
        name: format!("({}∩{})", a.name, b.name),
        source: a.source.clone(),
        target: a.target.clone(),
        domain,
        fiber_relations,
    })
}

/// Lift of a reduced fibered correspondence to a general one over the
/// diagonal of its domain. The round trip back through
/// [`reduced_from_diagonal_lift`] is the identity.
pub fn lift_of_diagonal(f: &ReducedFiberedCorrespondence) -> FiberedCorrespondence {
    let base = Correspondence::new(
        f.source.base().clone(),
        f.target.base().clone(),
        f.domain.iter().map(|x| (x.clone(), x.clone())),
    )
    .expect("domain points are base points");
    let fiber_relations = f
        .fiber_relations
        .iter()
        .map(|(x, rel)| ((x.clone(), x.clone()), rel.clone()))
        .collect();
    FiberedCorrespondence::new(
        format!("lift({})", f.name),
        f.source.clone(),
        f.target.clone(),
        base,
        fiber_relations,
    )
    .expect("lift of a valid reduced correspondence is valid")
}

/// Recovers the reduced form from a fibered correspondence whose base is a
/// subset of the diagonal.
pub fn reduced_from_diagonal_lift(
    f: &FiberedCorrespondence,
) -> Result<ReducedFiberedCorrespondence> {
    if f.source().base() != f.target().base() {
        return Err(Error::BaseMismatch {
            expected: f.source().base().to_string(),
            found: f.target().base().to_string(),
        });
    }
    let mut domain = BTreeSet::new();
    let mut fiber_relations = BTreeMap::new();
    for (x, y) in f.base_pairs().pairs() {
        if x != y {
            return Err(Error::InvalidFibered {
                reason: format!("base pair ({x},{y}) is off the diagonal"),
            });
        }
        domain.insert(x.clone());
        fiber_relations.insert(x.clone(), f.fiber_relations()[&(x.clone(), y.clone())].clone());
    }
    ReducedFiberedCorrespondence::new(
        format!("lower({})", f.name()),
        f.source().clone(),
        f.target().clone(),
        domain.into_iter().collect(),
        fiber_relations,
    )
}

/// The correspondence induced on sections by a full-domain reduced fibered
/// correspondence: sections `s`, `t` are related when `(s(x), t(x))` lies
/// in the fiber relation over every point. Sections are identified by
/// their canonical labels.
pub fn sections_correspondence(f: &ReducedFiberedCorrespondence) -> Result<Correspondence> {
    sections_correspondence_bounded(f, DEFAULT_MAX_ENUM)
}

pub fn sections_correspondence_bounded(
    f: &ReducedFiberedCorrespondence,
    limit: u64,
) -> Result<Correspondence> {
    if let Some(missing) = f.source.base().iter().find(|x| !f.domain.contains(x)) {
        return Err(Error::PartialDomain {
            missing: missing.clone(),
        });
    }
    let src_sections = sections_bounded(&f.source, limit)?;
    let dst_sections = sections_bounded(&f.target, limit)?;
    let src_set: FinSet = src_sections.iter().map(Section::label).collect();
    let dst_set: FinSet = dst_sections.iter().map(Section::label).collect();
    let mut pairs = BTreeSet::new();
    for s in &src_sections {
        for t in &dst_sections {
            let related = f.domain.iter().all(|x| {
                f.fiber_relations[x]
                    .contains(&(s.value(x).unwrap().clone(), t.value(x).unwrap().clone()))
            });
            if related {
                pairs.insert((s.label(), t.label()));
            }
        }
    }
    Correspondence::new(src_set, dst_set, pairs)
}

/// The four relation properties of a 2-ary fibered relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationProperty {
    Transitive,
    Symmetric,
    Antisymmetric,
    Reflexive,
}

impl RelationProperty {
    pub const ALL: [RelationProperty; 4] = [
        RelationProperty::Transitive,
        RelationProperty::Symmetric,
        RelationProperty::Antisymmetric,
        RelationProperty::Reflexive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RelationProperty::Transitive => "transitive",
            RelationProperty::Symmetric => "symmetric",
            RelationProperty::Antisymmetric => "antisymmetric",
            RelationProperty::Reflexive => "reflexive",
        }
    }

    pub fn parse(s: &str) -> Option<RelationProperty> {
        RelationProperty::ALL.iter().copied().find(|p| p.name() == s)
    }
}

/// First counterexample to a relation property, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Base point of the offending fiber.
    pub point: Label,
    /// Offending fiber elements; length depends on the property.
    pub witness: Vec<Label>,
}

/// Verdict of a property check with the first counterexample when false.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub property: RelationProperty,
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

fn require_endorelation(r: &ReducedFiberedCorrespondence) -> Result<()> {
    if r.source != r.target {
        return Err(Error::NotEndorelation);
    }
    if let Some(missing) = r.source.base().iter().find(|x| !r.domain.contains(x)) {
        return Err(Error::PartialDomain {
            missing: missing.clone(),
        });
    }
    Ok(())
}

/// Checks one relation property of an endorelation with full domain and
/// reports the first counterexample on failure.
///
/// The checks are the set-algebra conditions evaluated through composition,
/// inverse, intersection, and the fiber diagonal: transitive means
/// `F∘F ⊆ F`, symmetric `F⁻¹ = F`, antisymmetric `F ∩ F⁻¹ ⊆ Δ`, and
/// reflexive `F ⊇ Δ`.
pub fn check_property(
    r: &ReducedFiberedCorrespondence,
    property: RelationProperty,
) -> Result<PropertyVerdict> {
    require_endorelation(r)?;
    let counterexample = match property {
        RelationProperty::Transitive => {
            let composed = reduced_compose(r, r)?;
            if composed.is_contained_in(r) {
                None
            } else {
                first_transitivity_gap(r)
            }
        }
        RelationProperty::Symmetric => {
            let inv = reduced_inverse(r);
            if inv == *r {
                None
            } else {
                r.fiber_relations.iter().find_map(|(x, rel)| {
                    rel.iter()
                        .find(|(a, b)| !rel.contains(&(b.clone(), a.clone())))
                        .map(|(a, b)| Counterexample {
                            point: x.clone(),
                            witness: vec![a.clone(), b.clone()],
                        })
                })
            }
        }
        RelationProperty::Antisymmetric => {
            let meet = reduced_intersection(r, &reduced_inverse(r))?;
            let diag = reduced_diagonal(&r.source);
            if meet.is_contained_in(&diag) {
                None
            } else {
                meet.fiber_relations.iter().find_map(|(x, rel)| {
                    rel.iter().find(|(a, b)| a != b).map(|(a, b)| Counterexample {
                        point: x.clone(),
                        witness: vec![a.clone(), b.clone()],
                    })
                })
            }
        }
        RelationProperty::Reflexive => {
            let diag = reduced_diagonal(&r.source);
            if diag.is_contained_in(r) {
                None
            } else {
                r.fiber_relations.iter().find_map(|(x, rel)| {
                    r.source.fibers()[x]
                        .iter()
                        .find(|a| !rel.contains(&((*a).clone(), (*a).clone())))
                        .map(|a| Counterexample {
                            point: x.clone(),
                            witness: vec![a.clone()],
                        })
                })
            }
        }
    };
    Ok(PropertyVerdict {
        property,
        holds: counterexample.is_none(),
        counterexample,
    })
}

fn first_transitivity_gap(r: &ReducedFiberedCorrespondence) -> Option<Counterexample> {
    for (x, rel) in &r.fiber_relations {
        for (a, b) in rel {
            for (b2, c) in rel {
                if b == b2 && !rel.contains(&(a.clone(), c.clone())) {
                    return Some(Counterexample {
                        point: x.clone(),
                        witness: vec![a.clone(), b.clone(), c.clone()],
                    });
                }
            }
        }
    }
    None
}

/// Boolean form of [`check_property`].
pub fn relation_is(r: &ReducedFiberedCorrespondence, property: RelationProperty) -> Result<bool> {
    Ok(check_property(r, property)?.holds)
}

/// Flags of a classified endorelation. `preordering` is transitive and
/// reflexive; adding antisymmetry gives `ordering`, adding symmetry gives
/// `equivalence`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub transitive: bool,
    pub symmetric: bool,
    pub antisymmetric: bool,
    pub reflexive: bool,
    pub preordering: bool,
    pub ordering: bool,
    pub equivalence: bool,
}

impl Classification {
    /// Most specific applicable names, alphabetically; `none` when the
    /// relation is not even a preordering.
    pub fn flags(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.equivalence {
            out.push("equivalence");
        }
        if self.ordering {
            out.push("ordering");
        }
        if self.preordering && !self.ordering && !self.equivalence {
            out.push("preordering");
        }
        if out.is_empty() {
            out.push("none");
        }
        out
    }
}

/// Classifies an endorelation with full domain.
pub fn classify(r: &ReducedFiberedCorrespondence) -> Result<Classification> {
    let transitive = relation_is(r, RelationProperty::Transitive)?;
    let symmetric = relation_is(r, RelationProperty::Symmetric)?;
    let antisymmetric = relation_is(r, RelationProperty::Antisymmetric)?;
    let reflexive = relation_is(r, RelationProperty::Reflexive)?;
    let preordering = transitive && reflexive;
    if preordering {
        // the opposite of a preordering is again one
        let opposite = reduced_inverse(r);
        assert!(
            relation_is(&opposite, RelationProperty::Transitive)?
                && relation_is(&opposite, RelationProperty::Reflexive)?,
            "opposite of a preordering must be a preordering"
        );
    }
    Ok(Classification {
        transitive,
        symmetric,
        antisymmetric,
        reflexive,
        preordering,
        ordering: preordering && antisymmetric,
        equivalence: preordering && symmetric,
    })
}

/// An n-ary fibered relation: one set of n-tuples per fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberedRelation {
    name: Label,
    bundle: Bundle,
    arity: usize,
    fiber_tuples: BTreeMap<Label, BTreeSet<Vec<Label>>>,
}

impl FiberedRelation {
    pub fn new(
        name: impl Into<Label>,
        bundle: Bundle,
        arity: usize,
        fiber_tuples: BTreeMap<Label, BTreeSet<Vec<Label>>>,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidFibered {
                reason: "relation arity must be at least 1".into(),
            });
        }
        let keys: BTreeSet<&Label> = fiber_tuples.keys().collect();
        let base: BTreeSet<&Label> = bundle.base().iter().collect();
        if keys != base {
            return Err(Error::InvalidFibered {
                reason: "tuples must be given for exactly the base points".into(),
            });
        }
        for (x, tuples) in &fiber_tuples {
            let fiber = bundle.fiber(x)?;
            for t in tuples {
                if t.len() != arity {
                    return Err(Error::ArityMismatch {
                        tuple: t.clone(),
                        got: t.len(),
                        expected: arity,
                    });
                }
                for a in t {
                    if !fiber.contains(a) {
                        return Err(Error::InvalidFibered {
                            reason: format!("tuple element `{a}` is not in the fiber over `{x}`"),
                        });
                    }
                }
            }
        }
        Ok(FiberedRelation {
            name: name.into(),
            bundle,
            arity,
            fiber_tuples,
        })
    }

    pub fn name(&self) -> &Label {
        &self.name
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn fiber_tuples(&self) -> &BTreeMap<Label, BTreeSet<Vec<Label>>> {
        &self.fiber_tuples
    }
}

/// Outcome of the structural validation of an n-ary fibered relation; for
/// binary relations it carries the equivalent reduced fibered
/// correspondence, whose round trip is checked to be lossless.
#[derive(Debug, Clone)]
pub struct NaryReport {
    pub arity: usize,
    pub tuples_per_fiber: BTreeMap<Label, usize>,
    pub as_reduced: Option<ReducedFiberedCorrespondence>,
}

/// Validates an n-ary fibered relation structurally. A 2-ary relation is a
/// reduced fibered correspondence in the same bundle; the equivalent form
/// is produced and the round trip verified.
pub fn nary_relation_check(r: &FiberedRelation) -> Result<NaryReport> {
    let tuples_per_fiber = r
        .fiber_tuples
        .iter()
        .map(|(x, t)| (x.clone(), t.len()))
        .collect();
    let as_reduced = if r.arity == 2 {
        let fiber_relations: BTreeMap<Label, FiberRelation> = r
            .fiber_tuples
            .iter()
            .map(|(x, tuples)| {
                (
                    x.clone(),
                    tuples
                        .iter()
                        .map(|t| (t[0].clone(), t[1].clone()))
                        .collect(),
                )
            })
            .collect();
        let reduced = ReducedFiberedCorrespondence::new(
            r.name.clone(),
            r.bundle.clone(),
            r.bundle.clone(),
            r.bundle.base().clone(),
            fiber_relations,
        )?;
        // the round trip must lose nothing
        let back: BTreeMap<Label, BTreeSet<Vec<Label>>> = reduced
            .fiber_relations
            .iter()
            .map(|(x, rel)| {
                (
                    x.clone(),
                    rel.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect(),
                )
            })
            .collect();
        assert_eq!(back, r.fiber_tuples, "binary relation round trip lost tuples");
        Some(reduced)
    } else {
        None
    };
    Ok(NaryReport {
        arity: r.arity,
        tuples_per_fiber,
        as_reduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle(name: &str, fibers: &[(&str, &[&str])]) -> Bundle {
        let base = FinSet::new(fibers.iter().map(|(x, _)| *x));
        let map: BTreeMap<Label, FinSet> = fibers
            .iter()
            .map(|(x, els)| (x.to_string(), FinSet::new(els.iter().copied())))
            .collect();
        Bundle::new(name, base, map, None).unwrap()
    }

    fn rfc(
        name: &str,
        source: &Bundle,
        target: &Bundle,
        data: &[(&str, &[(&str, &str)])],
    ) -> ReducedFiberedCorrespondence {
        let domain = FinSet::new(data.iter().map(|(x, _)| *x));
        let rels: BTreeMap<Label, FiberRelation> = data
            .iter()
            .map(|(x, rel)| {
                (
                    x.to_string(),
                    rel.iter()
                        .map(|(a, b)| (a.to_string(), b.to_string()))
                        .collect(),
                )
            })
            .collect();
        ReducedFiberedCorrespondence::new(name, source.clone(), target.clone(), domain, rels)
            .unwrap()
    }

    #[test]
    fn reduced_composition_is_per_fiber() {
        let a = bundle("a", &[("m", &["a0"])]);
        let b = bundle("b", &[("m", &["b0"])]);
        let c = bundle("c", &[("m", &["c0"])]);
        let f = rfc("f", &a, &b, &[("m", &[("a0", "b0")])]);
        let h = rfc("h", &b, &c, &[("m", &[("b0", "c0")])]);
        let hf = reduced_compose(&h, &f).unwrap();
        assert_eq!(
            hf.fiber_relations()["m"],
            [("a0".to_string(), "c0".to_string())].into()
        );
    }

    #[test]
    fn reduced_diagonal_is_identity() {
        let a = bundle("a", &[("m", &["p", "q"]), ("n", &["r"])]);
        let b = bundle("b", &[("m", &["u"]), ("n", &["v"])]);
        let f = rfc("f", &a, &b, &[("m", &[("p", "u")]), ("n", &[("r", "v")])]);
        assert_eq!(reduced_compose(&f, &reduced_diagonal(&a)).unwrap(), f);
        assert_eq!(reduced_compose(&reduced_diagonal(&b), &f).unwrap(), f);
    }

    #[test]
    fn disjoint_domains_compose_to_empty_domain() {
        let a = bundle("a", &[("m", &["p"]), ("n", &["q"])]);
        let f = rfc("f", &a, &a, &[("m", &[])]);
        let h = rfc("h", &a, &a, &[("n", &[])]);
        let hf = reduced_compose(&h, &f).unwrap();
        assert!(hf.domain().is_empty());
    }

    #[test]
    fn reduced_inverse_is_involutive() {
        let a = bundle("a", &[("m", &["p", "q"])]);
        let b = bundle("b", &[("m", &["u", "v"])]);
        let f = rfc("f", &a, &b, &[("m", &[("p", "u"), ("p", "v")])]);
        let inv = reduced_inverse(&f);
        assert_eq!(
            inv.fiber_relations()["m"],
            [("u".to_string(), "p".to_string()), ("v".to_string(), "p".to_string())].into()
        );
        assert_eq!(reduced_inverse(&inv), f);
    }

    #[test]
    fn lift_round_trips_losslessly() {
        let a = bundle("a", &[("m", &["p"]), ("n", &["q", "r"])]);
        let b = bundle("b", &[("m", &["u"]), ("n", &["v"])]);
        let f = rfc("f", &a, &b, &[("n", &[("q", "v")])]);
        let lifted = lift_of_diagonal(&f);
        assert_eq!(
            lifted.base_pairs().pairs().iter().collect::<Vec<_>>(),
            [&("n".to_string(), "n".to_string())]
        );
        let back = reduced_from_diagonal_lift(&lifted).unwrap();
        assert_eq!(back, f);

        let empty = rfc("e", &a, &b, &[]);
        let lifted = lift_of_diagonal(&empty);
        assert!(lifted.base_pairs().pairs().is_empty());
        assert_eq!(reduced_from_diagonal_lift(&lifted).unwrap(), empty);
    }

    #[test]
    fn lift_of_reduced_diagonal_is_fibered_diagonal() {
        let a = bundle("a", &[("m", &["p", "q"]), ("n", &["r"])]);
        assert_eq!(
            lift_of_diagonal(&reduced_diagonal(&a)),
            crate::fibered::fibered_diagonal(&a)
        );
    }

    #[test]
    fn sections_correspondence_full_and_diagonal() {
        let a = bundle("a", &[("m", &["p", "q"])]);
        let full = rfc(
            "full",
            &a,
            &a,
            &[("m", &[("p", "p"), ("p", "q"), ("q", "p"), ("q", "q")])],
        );
        let corr = sections_correspondence(&full).unwrap();
        assert_eq!(corr.pairs().len(), 4);

        let diag = reduced_diagonal(&a);
        let corr = sections_correspondence(&diag).unwrap();
        assert_eq!(corr.pairs().len(), 2);
        assert!(corr.pairs().iter().all(|(s, t)| s == t));
    }

    #[test]
    fn sections_correspondence_mixed_fibers() {
        let a = bundle("a", &[("m0", &["a", "b"]), ("m1", &["a", "b"])]);
        let f = rfc(
            "f",
            &a,
            &a,
            &[("m0", &[("a", "a")]), ("m1", &[("a", "a"), ("b", "b")])],
        );
        let corr = sections_correspondence(&f).unwrap();
        // exactly the diagonal pairs on sections with s(m0)=a
        assert_eq!(corr.pairs().len(), 2);
        for (s, t) in corr.pairs() {
            assert_eq!(s, t);
            assert!(s.starts_with("m0=a"));
        }
    }

    #[test]
    fn sections_correspondence_needs_full_domain_and_fibers() {
        let a = bundle("a", &[("m0", &["a"]), ("m1", &["b"])]);
        let partial = rfc("p", &a, &a, &[("m0", &[])]);
        assert!(matches!(
            sections_correspondence(&partial),
            Err(Error::PartialDomain { .. })
        ));

        let holed = bundle("h", &[("m0", &["a"]), ("m1", &[])]);
        let f = rfc("f", &holed, &holed, &[("m0", &[]), ("m1", &[])]);
        assert!(matches!(
            sections_correspondence(&f),
            Err(Error::EmptyFiber { .. })
        ));
    }

    #[test]
    fn diagonal_has_all_four_properties() {
        let a = bundle("a", &[("m", &["p", "q"])]);
        let d = reduced_diagonal(&a);
        for p in RelationProperty::ALL {
            assert!(relation_is(&d, p).unwrap(), "{p:?}");
        }
        let c = classify(&d).unwrap();
        assert!(c.equivalence && c.ordering);
        assert_eq!(c.flags(), vec!["equivalence", "ordering"]);
    }

    #[test]
    fn full_relation_properties() {
        let a = bundle("a", &[("m", &["p", "q"])]);
        let full = rfc(
            "full",
            &a,
            &a,
            &[("m", &[("p", "p"), ("p", "q"), ("q", "p"), ("q", "q")])],
        );
        assert!(relation_is(&full, RelationProperty::Transitive).unwrap());
        assert!(relation_is(&full, RelationProperty::Symmetric).unwrap());
        assert!(relation_is(&full, RelationProperty::Reflexive).unwrap());
        assert!(!relation_is(&full, RelationProperty::Antisymmetric).unwrap());

        let singleton = bundle("s", &[("m", &["p"])]);
        let full1 = rfc("f1", &singleton, &singleton, &[("m", &[("p", "p")])]);
        assert!(relation_is(&full1, RelationProperty::Antisymmetric).unwrap());
    }

    #[test]
    fn single_pair_relation_properties() {
        let a = bundle("a", &[("m", &["a", "b"])]);
        let f = rfc("f", &a, &a, &[("m", &[("a", "b")])]);
        assert!(relation_is(&f, RelationProperty::Transitive).unwrap());
        assert!(!relation_is(&f, RelationProperty::Symmetric).unwrap());
        assert!(relation_is(&f, RelationProperty::Antisymmetric).unwrap());
        assert!(!relation_is(&f, RelationProperty::Reflexive).unwrap());

        let verdict = check_property(&f, RelationProperty::Symmetric).unwrap();
        assert_eq!(
            verdict.counterexample,
            Some(Counterexample {
                point: "m".to_string(),
                witness: vec!["a".to_string(), "b".to_string()]
            })
        );
        let verdict = check_property(&f, RelationProperty::Reflexive).unwrap();
        assert_eq!(
            verdict.counterexample,
            Some(Counterexample {
                point: "m".to_string(),
                witness: vec!["a".to_string()]
            })
        );
    }

    #[test]
    fn transitivity_counterexample_is_a_triple() {
        let a = bundle("a", &[("m", &["a", "b", "c"])]);
        let f = rfc("f", &a, &a, &[("m", &[("a", "b"), ("b", "c")])]);
        let verdict = check_property(&f, RelationProperty::Transitive).unwrap();
        assert!(!verdict.holds);
        assert_eq!(
            verdict.counterexample,
            Some(Counterexample {
                point: "m".to_string(),
                witness: vec!["a".to_string(), "b".to_string(), "c".to_string()]
            })
        );
    }

    #[test]
    fn pointwise_order_classifies_as_ordering() {
        let a = bundle("a", &[("m", &["0", "1"])]);
        let le = rfc("le", &a, &a, &[("m", &[("0", "0"), ("0", "1"), ("1", "1")])]);
        let c = classify(&le).unwrap();
        assert!(c.ordering && !c.equivalence);
        assert_eq!(c.flags(), vec!["ordering"]);
    }

    #[test]
    fn parity_classifies_as_equivalence() {
        let a = bundle("a", &[("m", &["0", "1", "2"])]);
        let parity = rfc(
            "par",
            &a,
            &a,
            &[("m", &[
                ("0", "0"), ("1", "1"), ("2", "2"), ("0", "2"), ("2", "0"),
            ])],
        );
        let c = classify(&parity).unwrap();
        assert!(c.equivalence && !c.ordering);
        assert_eq!(c.flags(), vec!["equivalence"]);
    }

    #[test]
    fn properties_reject_partial_or_crooked_relations() {
        let a = bundle("a", &[("m", &["p"]), ("n", &["q"])]);
        let partial = rfc("p", &a, &a, &[("m", &[])]);
        assert_eq!(
            relation_is(&partial, RelationProperty::Reflexive),
            Err(Error::PartialDomain {
                missing: "n".to_string()
            })
        );
        let b = bundle("b", &[("m", &["u"]), ("n", &["v"])]);
        let hetero = rfc("h", &a, &b, &[("m", &[]), ("n", &[])]);
        assert_eq!(
            relation_is(&hetero, RelationProperty::Reflexive),
            Err(Error::NotEndorelation)
        );
    }

    #[test]
    fn nary_relations_validate_structurally() {
        let a = bundle("a", &[("m", &["p", "q", "r"])]);
        let unary = FiberedRelation::new(
            "u",
            a.clone(),
            1,
            [("m".to_string(), [vec!["p".to_string()]].into())].into(),
        )
        .unwrap();
        let report = nary_relation_check(&unary).unwrap();
        assert!(report.as_reduced.is_none());
        assert_eq!(report.tuples_per_fiber["m"], 1);

        let binary = FiberedRelation::new(
            "b",
            a.clone(),
            2,
            [(
                "m".to_string(),
                [vec!["p".to_string(), "q".to_string()]].into(),
            )]
            .into(),
        )
        .unwrap();
        let report = nary_relation_check(&binary).unwrap();
        let reduced = report.as_reduced.unwrap();
        assert_eq!(
            reduced.fiber_relations()["m"],
            [("p".to_string(), "q".to_string())].into()
        );

        let ternary = FiberedRelation::new(
            "t",
            a.clone(),
            3,
            [(
                "m".to_string(),
                [vec!["p".to_string(), "q".to_string(), "r".to_string()]].into(),
            )]
            .into(),
        )
        .unwrap();
        assert!(nary_relation_check(&ternary).unwrap().as_reduced.is_none());

        let bad = FiberedRelation::new(
            "bad",
            a,
            2,
            [("m".to_string(), [vec!["p".to_string()]].into())].into(),
        );
        assert!(matches!(bad, Err(Error::ArityMismatch { .. })));
    }
}
