//! Quotients of a bundle by a fibered equivalence, the natural morphism,
//! the quotient topology, and the factorization of a fibered morphism
//! through its kernel.

use std::collections::{BTreeMap, BTreeSet};

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::fibered::FiberRelation;
use crate::reduced::{classify, ReducedFiberedCorrespondence};
use crate::set::{check_enum_limit, total_point_label, FinSet, Label, DEFAULT_MAX_ENUM};
use crate::topology::FiniteTopology;

/// A fiberwise map between bundles over the same base; the base map is the
/// identity. Each per-point map is total on its fiber.
#[derive(Debug, Clone)]
pub struct FiberedMorphism {
    name: Label,
    source: Bundle,
    target: Bundle,
    maps: BTreeMap<Label, BTreeMap<Label, Label>>,
}

impl PartialEq for FiberedMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.maps == other.maps
    }
}

impl Eq for FiberedMorphism {}

impl FiberedMorphism {
    pub fn new(
        name: impl Into<Label>,
        source: Bundle,
        target: Bundle,
        maps: BTreeMap<Label, BTreeMap<Label, Label>>,
    ) -> Result<Self> {
        if source.base() != target.base() {
            return Err(Error::BaseMismatch {
                expected: source.base().to_string(),
                found: target.base().to_string(),
            });
        }
        let keys: BTreeSet<&Label> = maps.keys().collect();
        let base: BTreeSet<&Label> = source.base().iter().collect();
        if keys != base {
            return Err(Error::InvalidFibered {
                reason: "morphism maps must be keyed by exactly the base points".into(),
            });
        }
        for (x, map) in &maps {
            let fx = source.fiber(x)?;
            let gx = target.fiber(x)?;
            for a in fx.iter() {
                match map.get(a) {
                    None => {
                        return Err(Error::InvalidFibered {
                            reason: format!("morphism is not total: `{a}` over `{x}` has no image"),
                        })
                    }
                    Some(b) if !gx.contains(b) => {
                        return Err(Error::InvalidFibered {
                            reason: format!("image `{b}` over `{x}` is not in the target fiber"),
                        })
                    }
                    _ => {}
                }
            }
            if map.len() != fx.len() {
                return Err(Error::InvalidFibered {
                    reason: format!("morphism over `{x}` maps elements outside the fiber"),
                });
            }
        }
        Ok(FiberedMorphism {
            name: name.into(),
            source,
            target,
            maps,
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

    pub fn maps(&self) -> &BTreeMap<Label, BTreeMap<Label, Label>> {
        &self.maps
    }

    pub fn apply(&self, x: &str, a: &str) -> Result<&Label> {
        self.maps
            .get(x)
            .ok_or_else(|| Error::UnknownPoint {
                point: x.to_string(),
            })?
            .get(a)
            .ok_or_else(|| Error::UnknownElement {
                element: a.to_string(),
            })
    }

    /// The graph of the morphism as a reduced fibered correspondence.
    pub fn as_reduced(&self) -> ReducedFiberedCorrespondence {
        let fiber_relations: BTreeMap<Label, FiberRelation> = self
            .maps
            .iter()
            .map(|(x, map)| {
                (
                    x.clone(),
                    map.iter().map(|(a, b)| (a.clone(), b.clone())).collect(),
                )
            })
            .collect();
        ReducedFiberedCorrespondence::new(
            format!("graph({})", self.name),
            self.source.clone(),
            self.target.clone(),
            self.source.base().clone(),
            fiber_relations,
        )
        .expect("graph of a valid morphism is valid")
    }

    pub fn is_injective_per_fiber(&self) -> bool {
        self.maps.values().all(|map| {
            let images: BTreeSet<&Label> = map.values().collect();
            images.len() == map.len()
        })
    }

    pub fn is_surjective_per_fiber(&self) -> bool {
        self.maps.iter().all(|(x, map)| {
            let images: BTreeSet<&Label> = map.values().collect();
            images.len() == self.target.fibers()[x].len()
        })
    }

    pub fn is_bijective_per_fiber(&self) -> bool {
        self.is_injective_per_fiber() && self.is_surjective_per_fiber()
    }
}

/// Composition `g ∘ f` of fibered morphisms over the same base.
pub fn compose_morphisms(g: &FiberedMorphism, f: &FiberedMorphism) -> Result<FiberedMorphism> {
    if f.target != g.source {
        return Err(Error::BundleMismatch {
            reason: format!("target of `{}` differs from source of `{}`", f.name, g.name),
        });
    }
    let maps = f
        .maps
        .iter()
        .map(|(x, map)| {
            (
                x.clone(),
                map.iter()
                    .map(|(a, b)| (a.clone(), g.maps[x][b].clone()))
                    .collect(),
            )
        })
        .collect();
    FiberedMorphism::new(
        format!("({}∘{})", g.name, f.name),
        f.source.clone(),
        g.target.clone(),
        maps,
    )
}

/// Result of a quotient: the quotient bundle, the class projection, the
/// partition with canonical class labels, and the quotient topology when
/// the carrier had a total-space topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientResult {
    pub quotient: Bundle,
    pub nat: FiberedMorphism,
    pub class_map: BTreeMap<Label, BTreeMap<Label, BTreeSet<Label>>>,
    pub quotient_topology: Option<FiniteTopology>,
}

/// Partitions one fiber by an equivalence relation. Class labels are the
/// least member label of each class.
fn partition_fiber(fiber: &FinSet, rel: &FiberRelation) -> BTreeMap<Label, BTreeSet<Label>> {
    let mut classes: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
    let mut seen: BTreeSet<Label> = BTreeSet::new();
    for a in fiber.iter() {
        if seen.contains(a) {
            continue;
        }
        let members: BTreeSet<Label> = rel
            .iter()
            .filter(|(p, _)| p == a)
            .map(|(_, q)| q.clone())
            .collect();
        // reflexivity guarantees a is its own least-or-later member
        let mut members = members;
        members.insert(a.clone());
        for m in &members {
            seen.insert(m.clone());
        }
        let label = members.iter().next().expect("class is nonempty").clone();
        classes.insert(label, members);
    }
    classes
}

/// Quotient of a bundle by a fibered equivalence over it.
///
/// The quotient fibers are the equivalence classes, `nat` is the class
/// projection, and when the bundle carries a total-space topology the
/// quotient total space receives the finest topology making `nat`
/// continuous: exactly the sets whose preimage under `nat` is open.
pub fn quotient_bundle(e: &Bundle, s: &ReducedFiberedCorrespondence) -> Result<QuotientResult> {
    quotient_bundle_bounded(e, s, DEFAULT_MAX_ENUM)
}

pub fn quotient_bundle_bounded(
    e: &Bundle,
    s: &ReducedFiberedCorrespondence,
    limit: u64,
) -> Result<QuotientResult> {
    if s.source() != e || s.target() != e {
        return Err(Error::BundleMismatch {
            reason: "the relation does not live over the bundle being quotiented".into(),
        });
    }
    let c = classify(s)?;
    if !c.equivalence {
        let mut missing = Vec::new();
        if !c.transitive {
            missing.push("transitive");
        }
        if !c.symmetric {
            missing.push("symmetric");
        }
        if !c.reflexive {
            missing.push("reflexive");
        }
        return Err(Error::NotAnEquivalence {
            missing: missing.join(","),
        });
    }

    let mut class_map = BTreeMap::new();
    let mut quotient_fibers: BTreeMap<Label, FinSet> = BTreeMap::new();
    let mut nat_maps: BTreeMap<Label, BTreeMap<Label, Label>> = BTreeMap::new();
    for x in e.base().iter() {
        let classes = partition_fiber(&e.fibers()[x], s.fiber_relation(x)?);
        quotient_fibers.insert(x.clone(), classes.keys().cloned().collect());
        let mut nat_x = BTreeMap::new();
        for (label, members) in &classes {
            for m in members {
                nat_x.insert(m.clone(), label.clone());
            }
        }
        nat_maps.insert(x.clone(), nat_x);
        class_map.insert(x.clone(), classes);
    }

    let mut quotient = Bundle::new(
        format!("{}/{}", e.name(), s.name()),
        e.base().clone(),
        quotient_fibers,
        None,
    )?;
    if let Some(bt) = e.base_topology() {
        quotient = quotient.with_base_topology(bt.clone())?;
    }

    let quotient_topology = match e.total_topology() {
        None => None,
        Some(et) => {
            let q_points: Vec<Label> = quotient.total_labels();
            let k = q_points.len();
            check_enum_limit("quotient topology candidate sets", 1u128 << k, limit)?;
            // preimage of each quotient total point, as a mask over e's total space
            let mut pre = vec![0u64; k];
            for (i, qp) in q_points.iter().enumerate() {
                let (x, class_label) = crate::set::split_total_point(qp)
                    .expect("total labels are well formed");
                for member in &class_map[x][class_label] {
                    let ei = et
                        .index_of(&total_point_label(x, member))
                        .expect("total topology covers the total space");
                    pre[i] |= 1 << ei;
                }
            }
            let mut opens = Vec::new();
            for v in 0u64..1 << k {
                let mut preimage = 0u64;
                for (i, p) in pre.iter().enumerate() {
                    if v & (1 << i) != 0 {
                        preimage |= p;
                    }
                }
                if et.is_open_mask(preimage) {
                    let labels: BTreeSet<Label> = q_points
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| v & (1 << i) != 0)
                        .map(|(_, l)| l.clone())
                        .collect();
                    opens.push(labels);
                }
            }
            Some(FiniteTopology::new(q_points, opens)?)
        }
    };
    if let Some(qt) = &quotient_topology {
        quotient = quotient.with_total_topology(qt.clone())?;
    }

    let nat = FiberedMorphism::new(
        format!("nat({})", s.name()),
        e.clone(),
        quotient.clone(),
        nat_maps,
    )?;

    Ok(QuotientResult {
        quotient,
        nat,
        class_map,
        quotient_topology,
    })
}

/// Kernel of a fibered morphism: elements of a fiber are related when they
/// share an image. The result is always a fibered equivalence.
pub fn kernel_equivalence(f: &FiberedMorphism) -> ReducedFiberedCorrespondence {
    let fiber_relations: BTreeMap<Label, FiberRelation> = f
        .maps
        .iter()
        .map(|(x, map)| {
            let mut rel = FiberRelation::new();
            for (a, fa) in map {
                for (b, fb) in map {
                    if fa == fb {
                        rel.insert((a.clone(), b.clone()));
                    }
                }
            }
            (x.clone(), rel)
        })
        .collect();
    let s = ReducedFiberedCorrespondence::new(
        format!("ker({})", f.name),
        f.source.clone(),
        f.source.clone(),
        f.source.base().clone(),
        fiber_relations,
    )
    .expect("kernel of a valid morphism is valid");
    let c = classify(&s).expect("kernel is a full-domain endorelation");
    assert!(c.equivalence, "kernel must classify as an equivalence");
    s
}

/// The three factors of a fibered morphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    /// Natural projection onto the quotient by the kernel; surjective.
    pub nat: FiberedMorphism,
    /// Per-fiber bijection from the quotient onto the image bundle.
    pub iso: FiberedMorphism,
    /// Inclusion of the image bundle into the target; injective.
    pub incl: FiberedMorphism,
    pub quotient: QuotientResult,
    pub image: Bundle,
}

/// Factors `f` as inclusion ∘ isomorphism ∘ natural projection.
pub fn factorize(f: &FiberedMorphism) -> Result<Factorization> {
    factorize_bounded(f, DEFAULT_MAX_ENUM)
}

pub fn factorize_bounded(f: &FiberedMorphism, limit: u64) -> Result<Factorization> {
    let kernel = kernel_equivalence(f);
    let quotient = quotient_bundle_bounded(&f.source, &kernel, limit)?;

    let image_fibers: BTreeMap<Label, FinSet> = f
        .maps
        .iter()
        .map(|(x, map)| (x.clone(), map.values().cloned().collect()))
        .collect();
    let image = Bundle::new(
        format!("im({})", f.name),
        f.source.base().clone(),
        image_fibers,
        None,
    )?;

    // class labels are members of their class, so the original map applies
    let iso_maps: BTreeMap<Label, BTreeMap<Label, Label>> = quotient
        .quotient
        .fibers()
        .iter()
        .map(|(x, classes)| {
            (
                x.clone(),
                classes
                    .iter()
                    .map(|c| (c.clone(), f.maps[x][c].clone()))
                    .collect(),
            )
        })
        .collect();
    let iso = FiberedMorphism::new(
        format!("iso({})", f.name),
        quotient.quotient.clone(),
        image.clone(),
        iso_maps,
    )?;

    let incl_maps: BTreeMap<Label, BTreeMap<Label, Label>> = image
        .fibers()
        .iter()
        .map(|(x, fiber)| {
            (
                x.clone(),
                fiber.iter().map(|b| (b.clone(), b.clone())).collect(),
            )
        })
        .collect();
    let incl = FiberedMorphism::new(
        format!("incl({})", f.name),
        image.clone(),
        f.target.clone(),
        incl_maps,
    )?;

    Ok(Factorization {
        nat: quotient.nat.clone(),
        iso,
        incl,
        quotient,
        image,
    })
}
