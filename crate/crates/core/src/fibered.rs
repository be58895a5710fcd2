//! General fibered correspondences: a base correspondence between two
//! bundle bases plus one fiber relation per base pair.
//!
//! Composition, inverse, and images demand injective-partial-map bases;
//! with an arbitrary base the fiber data over a shared target point need
//! not agree and none of these operations is well defined.

use std::collections::{BTreeMap, BTreeSet};

use crate::bundle::{Bundle, SubbundleWitness, Trivialization};
use crate::error::{Error, Result};
use crate::relation::{compose, diagonal, Correspondence};
use crate::set::{FinSet, Label};

/// Relation between two fibers, stored as bare label pairs.
pub type FiberRelation = BTreeSet<(Label, Label)>;

/// Composition of bare fiber relations, `h` after `f`.
pub fn compose_pairs(h: &FiberRelation, f: &FiberRelation) -> FiberRelation {
    let mut out = BTreeSet::new();
    for (a, b) in f {
        for (b2, c) in h {
            if b == b2 {
                out.insert((a.clone(), c.clone()));
            }
        }
    }
    out
}

/// Transposition of a bare fiber relation.
pub fn transpose_pairs(f: &FiberRelation) -> FiberRelation {
    f.iter().map(|(a, b)| (b.clone(), a.clone())).collect()
}

/// A fibered correspondence from one bundle to another.
#[derive(Debug, Clone)]
pub struct FiberedCorrespondence {
    name: Label,
    source: Bundle,
    target: Bundle,
    base_pairs: Correspondence,
    fiber_relations: BTreeMap<(Label, Label), FiberRelation>,
}

impl PartialEq for FiberedCorrespondence {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.base_pairs == other.base_pairs
            && self.fiber_relations == other.fiber_relations
    }
}

impl Eq for FiberedCorrespondence {}

impl FiberedCorrespondence {
    /// Every base pair must carry a fiber relation (possibly empty), no
    /// fiber relation may appear without its base pair, and relation
    /// components must lie in the correct fibers.
    pub fn new(
        name: impl Into<Label>,
        source: Bundle,
        target: Bundle,
        base_pairs: Correspondence,
        fiber_relations: BTreeMap<(Label, Label), FiberRelation>,
    ) -> Result<Self> {
        let name = name.into();
        if base_pairs.source() != source.base() || base_pairs.target() != target.base() {
            return Err(Error::InvalidFibered {
                reason: "base correspondence endpoints differ from the bundle bases".into(),
            });
        }
        let keys: BTreeSet<&(Label, Label)> = fiber_relations.keys().collect();
        let pairs: BTreeSet<&(Label, Label)> = base_pairs.pairs().iter().collect();
        if keys != pairs {
            return Err(Error::InvalidFibered {
                reason: "fiber relations must be keyed by exactly the base pairs".into(),
            });
        }
        for ((x, y), rel) in &fiber_relations {
            let fx = source.fiber(x)?;
            let fy = target.fiber(y)?;
            for (a, b) in rel {
                if !fx.contains(a) {
                    return Err(Error::InvalidFibered {
                        reason: format!("element `{a}` is not in the fiber over `{x}`"),
                    });
                }
                if !fy.contains(b) {
                    return Err(Error::InvalidFibered {
                        reason: format!("element `{b}` is not in the fiber over `{y}`"),
                    });
                }
            }
        }
        Ok(FiberedCorrespondence {
            name,
            source,
            target,
            base_pairs,
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

    pub fn base_pairs(&self) -> &Correspondence {
        &self.base_pairs
    }

    pub fn fiber_relations(&self) -> &BTreeMap<(Label, Label), FiberRelation> {
        &self.fiber_relations
    }

    /// The base is a partial map that is both functional and injective.
    pub fn base_is_injective_map(&self) -> bool {
        self.base_pairs.is_injective_partial_map()
    }

    fn require_injective_base(&self) -> Result<()> {
        if self.base_is_injective_map() {
            Ok(())
        } else {
            Err(Error::NonInjectiveBase {
                name: self.name.clone(),
            })
        }
    }
}

/// Fiberwise identity on a bundle: the diagonal base paired with the
/// diagonal relation in every fiber.
pub fn fibered_diagonal(a: &Bundle) -> FiberedCorrespondence {
    let base = diagonal(a.base());
    let fiber_relations = a
        .base()
        .iter()
        .map(|x| {
            (
                (x.clone(), x.clone()),
                a.fibers()[x]
                    .iter()
                    .map(|p| (p.clone(), p.clone()))
                    .collect(),
            )
        })
        .collect();
    FiberedCorrespondence {
        name: format!("diag({})", a.name()),
        source: a.clone(),
        target: a.clone(),
        base_pairs: base,
        fiber_relations,
    }
}

/// Composition `h ∘ f` of fibered correspondences with injective bases:
/// the bases compose as correspondences and each resulting fiber relation
/// is the set-level composite through the middle fiber.
pub fn fibered_compose(
    h: &FiberedCorrespondence,
    f: &FiberedCorrespondence,
) -> Result<FiberedCorrespondence> {
    f.require_injective_base()?;
    h.require_injective_base()?;
    if f.target != h.source {
        return Err(Error::BundleMismatch {
            reason: format!(
                "target of `{}` differs from source of `{}`",
                f.name, h.name
            ),
        });
    }
    let base = compose(h.base_pairs(), f.base_pairs());
    let mut fiber_relations = BTreeMap::new();
    for (x, z) in base.pairs() {
        // the middle point is unique because f's base is functional
        let y = f
            .base_pairs
            .apply(x)
            .expect("composite pair has a middle point");
        let f_rel = &f.fiber_relations[&(x.clone(), y.clone())];
        let h_rel = &h.fiber_relations[&(y.clone(), z.clone())];
        fiber_relations.insert((x.clone(), z.clone()), compose_pairs(h_rel, f_rel));
    }
    Ok(FiberedCorrespondence {
        name: format!("({}∘{})", h.name, f.name),
        source: f.source.clone(),
        target: h.target.clone(),
        base_pairs: base,
        fiber_relations,
    })
}

/// Inverse of a fibered correspondence with an injective base: the base is
/// inverted and every fiber relation transposed.
pub fn fibered_inverse(f: &FiberedCorrespondence) -> Result<FiberedCorrespondence> {
    f.require_injective_base()?;
    let fiber_relations = f
        .fiber_relations
        .iter()
        .map(|((x, y), rel)| ((y.clone(), x.clone()), transpose_pairs(rel)))
        .collect();
    Ok(FiberedCorrespondence {
        name: format!("{}⁻¹", f.name),
        source: f.target.clone(),
        target: f.source.clone(),
        base_pairs: f.base_pairs.inverse(),
        fiber_relations,
    })
}

fn transport(
    rel: &FiberRelation,
    chart_src: &BTreeMap<Label, Label>,
    chart_dst: &BTreeMap<Label, Label>,
) -> FiberRelation {
    rel.iter()
        .map(|(a, b)| (chart_src[a].clone(), chart_dst[b].clone()))
        .collect()
}

/// Image of a subbundle under a fibered correspondence.
///
/// Requires an injective base and trivializations on both bundles. The
/// correspondence must be nonsingular in the fibers: transported through
/// the charts, every fiber relation must be one and the same relation, and
/// the image fibers must be identified by the target charts. On success
/// the image is returned together with its containment witness in the
/// target, and it inherits the target trivialization restricted to it.
pub fn image_of_subbundle(
    f: &FiberedCorrespondence,
    c: &Bundle,
    witness: &SubbundleWitness,
) -> Result<(Bundle, SubbundleWitness)> {
    f.require_injective_base()?;
    witness.validate(c, &f.source)?;

    if f.source.trivialization().is_none() {
        return Err(Error::MissingTrivialization {
            bundle: f.source.name().clone(),
        });
    }
    if f.target.trivialization().is_none() {
        return Err(Error::MissingTrivialization {
            bundle: f.target.name().clone(),
        });
    }

    // nonsingularity: all fiber relations agree once transported
    let mut reference: Option<FiberRelation> = None;
    for (x, y) in f.base_pairs.pairs() {
        let chart_x = f.source.chart(x)?;
        let chart_y = f.target.chart(y)?;
        let moved = transport(&f.fiber_relations[&(x.clone(), y.clone())], chart_x, chart_y);
        match &reference {
            None => reference = Some(moved),
            Some(r) => {
                if r != &moved {
                    return Err(Error::SingularFiber {
                        x: x.clone(),
                        y: y.clone(),
                    });
                }
            }
        }
    }

    // fibers of the image, one per reachable target point
    let mut image_fibers: BTreeMap<Label, FinSet> = BTreeMap::new();
    let mut transported_images: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
    for (u, x) in &witness.base_injection {
        let Some(y) = f.base_pairs.apply(x) else {
            continue;
        };
        let rel = &f.fiber_relations[&(x.clone(), y.clone())];
        let embedded: BTreeSet<Label> = c.fiber(u)?
            .iter()
            .map(|a| witness.fiber_injections[u][a].clone())
            .collect();
        let fiber: BTreeSet<Label> = rel
            .iter()
            .filter(|(a, _)| embedded.contains(a))
            .map(|(_, b)| b.clone())
            .collect();
        let chart_y = f.target.chart(y)?;
        transported_images.insert(y.clone(), fiber.iter().map(|b| chart_y[b].clone()).collect());
        image_fibers.insert(y.clone(), fiber.into_iter().collect());
    }

    // the image fibers must all be the same subset of the typical fiber
    let mut common: Option<(&Label, &BTreeSet<Label>)> = None;
    for (y, moved) in &transported_images {
        match common {
            None => common = Some((y, moved)),
            Some((first, r)) => {
                if r != moved {
                    return Err(Error::NonUniformImage {
                        first: first.clone(),
                        second: y.clone(),
                    });
                }
            }
        }
    }

    let typical: FinSet = common
        .map(|(_, s)| s.iter().cloned().collect())
        .unwrap_or_default();
    let charts: BTreeMap<Label, BTreeMap<Label, Label>> = image_fibers
        .iter()
        .map(|(y, fiber)| {
            let chart_y = f.target.chart(y).expect("checked above");
            (
                y.clone(),
                fiber
                    .iter()
                    .map(|b| (b.clone(), chart_y[b].clone()))
                    .collect(),
            )
        })
        .collect();

    let base: FinSet = image_fibers.keys().cloned().collect();
    let image = Bundle::new(
        format!("{}[{}]", f.name, c.name()),
        base,
        image_fibers,
        Some(Trivialization { typical, charts }),
    )?;
    let witness_out = crate::bundle::is_subbundle(&image, &f.target)?;
    Ok((image, witness_out))
}
