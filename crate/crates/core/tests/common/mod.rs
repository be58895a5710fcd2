#![allow(dead_code)] // each test target uses a different slice of these helpers

//! Deterministic generators shared by the property and acceptance suites.

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fibra_core::action::{FiberedGroup, FiniteGroup, TstarRepresentation};
use fibra_core::bundle::Bundle;
use fibra_core::fibered::{FiberRelation, FiberedCorrespondence};
use fibra_core::quotient::FiberedMorphism;
use fibra_core::reduced::ReducedFiberedCorrespondence;
use fibra_core::relation::Correspondence;
use fibra_core::set::{FinSet, Label};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn labels(prefix: &str, n: usize) -> Vec<Label> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random bundle with 0..=4 base points (at least `min_points`) and fibers
/// of size 0..=4 (at least `min_fiber`).
pub fn gen_bundle(
    r: &mut ChaCha8Rng,
    name: &str,
    base_prefix: &str,
    fiber_prefix: &str,
    min_points: usize,
    min_fiber: usize,
) -> Bundle {
    let n_points = r.gen_range(min_points..=4);
    let base_labels = labels(base_prefix, n_points);
    let fibers: BTreeMap<Label, FinSet> = base_labels
        .iter()
        .map(|x| {
            let k = r.gen_range(min_fiber..=4);
            (x.clone(), FinSet::new(labels(fiber_prefix, k)))
        })
        .collect();
    Bundle::new(name, FinSet::new(base_labels), fibers, None).unwrap()
}

/// Random bundle over a fixed base.
pub fn gen_bundle_over(
    r: &mut ChaCha8Rng,
    name: &str,
    base: &FinSet,
    fiber_prefix: &str,
    min_fiber: usize,
) -> Bundle {
    let fibers: BTreeMap<Label, FinSet> = base
        .iter()
        .map(|x| {
            let k = r.gen_range(min_fiber..=4);
            (x.clone(), FinSet::new(labels(fiber_prefix, k)))
        })
        .collect();
    Bundle::new(name, base.clone(), fibers, None).unwrap()
}

/// Random injective partial map between two finite sets, as a
/// correspondence.
pub fn gen_injective_base(r: &mut ChaCha8Rng, m: &FinSet, n: &FinSet) -> Correspondence {
    let mut sources: Vec<&Label> = m.iter().collect();
    let mut targets: Vec<&Label> = n.iter().collect();
    sources.shuffle(r);
    targets.shuffle(r);
    let k = r.gen_range(0..=sources.len().min(targets.len()));
    let pairs: Vec<(Label, Label)> = sources[..k]
        .iter()
        .zip(&targets[..k])
        .map(|(a, b)| ((*a).clone(), (*b).clone()))
        .collect();
    Correspondence::new(m.clone(), n.clone(), pairs).unwrap()
}

/// Random relation between two fibers.
pub fn gen_fiber_relation(r: &mut ChaCha8Rng, a: &FinSet, b: &FinSet) -> FiberRelation {
    let mut rel = FiberRelation::new();
    for p in a.iter() {
        for q in b.iter() {
            if r.gen_bool(0.4) {
                rel.insert((p.clone(), q.clone()));
            }
        }
    }
    rel
}

/// Random fibered correspondence with an injective base.
pub fn gen_fc(
    r: &mut ChaCha8Rng,
    name: &str,
    source: &Bundle,
    target: &Bundle,
) -> FiberedCorrespondence {
    let base = gen_injective_base(r, source.base(), target.base());
    let fiber_relations: BTreeMap<(Label, Label), FiberRelation> = base
        .pairs()
        .iter()
        .map(|(x, y)| {
            (
                (x.clone(), y.clone()),
                gen_fiber_relation(r, &source.fibers()[x], &target.fibers()[y]),
            )
        })
        .collect();
    FiberedCorrespondence::new(name, source.clone(), target.clone(), base, fiber_relations)
        .unwrap()
}

/// Random reduced fibered correspondence between bundles over one base.
pub fn gen_rfc(
    r: &mut ChaCha8Rng,
    name: &str,
    source: &Bundle,
    target: &Bundle,
    full_domain: bool,
) -> ReducedFiberedCorrespondence {
    let domain: FinSet = source
        .base()
        .iter()
        .filter(|_| full_domain || r.gen_bool(0.7))
        .cloned()
        .collect();
    let fiber_relations: BTreeMap<Label, FiberRelation> = domain
        .iter()
        .map(|x| {
            (
                x.clone(),
                gen_fiber_relation(r, &source.fibers()[x], &target.fibers()[x]),
            )
        })
        .collect();
    ReducedFiberedCorrespondence::new(name, source.clone(), target.clone(), domain, fiber_relations)
        .unwrap()
}

/// Random fibered morphism between bundles over one base; target fibers
/// must be nonempty.
pub fn gen_morphism(
    r: &mut ChaCha8Rng,
    name: &str,
    source: &Bundle,
    target: &Bundle,
) -> FiberedMorphism {
    let maps: BTreeMap<Label, BTreeMap<Label, Label>> = source
        .base()
        .iter()
        .map(|x| {
            let targets: Vec<&Label> = target.fibers()[x].iter().collect();
            (
                x.clone(),
                source.fibers()[x]
                    .iter()
                    .map(|a| (a.clone(), (*targets.choose(r).unwrap()).clone()))
                    .collect(),
            )
        })
        .collect();
    FiberedMorphism::new(name, source.clone(), target.clone(), maps).unwrap()
}

/// Random fibered equivalence: a random partition of every fiber.
pub fn gen_equivalence(
    r: &mut ChaCha8Rng,
    name: &str,
    bundle: &Bundle,
) -> ReducedFiberedCorrespondence {
    let fiber_relations: BTreeMap<Label, FiberRelation> = bundle
        .base()
        .iter()
        .map(|x| {
            let mut elements: Vec<&Label> = bundle.fibers()[x].iter().collect();
            elements.shuffle(r);
            let mut blocks: Vec<Vec<&Label>> = Vec::new();
            for e in elements {
                if blocks.is_empty() || r.gen_bool(0.5) {
                    blocks.push(vec![e]);
                } else {
                    let i = r.gen_range(0..blocks.len());
                    blocks[i].push(e);
                }
            }
            let mut rel = FiberRelation::new();
            for block in &blocks {
                for p in block {
                    for q in block {
                        rel.insert(((*p).clone(), (*q).clone()));
                    }
                }
            }
            (x.clone(), rel)
        })
        .collect();
    ReducedFiberedCorrespondence::new(
        name,
        bundle.clone(),
        bundle.clone(),
        bundle.base().clone(),
        fiber_relations,
    )
    .unwrap()
}

/// Small group catalog: orders 1..=4 plus the Klein four-group.
pub fn group_catalog() -> Vec<FiniteGroup> {
    vec![
        FiniteGroup::cyclic(1),
        FiniteGroup::cyclic(2),
        FiniteGroup::cyclic(3),
        FiniteGroup::cyclic(4),
        FiniteGroup::klein_four(),
    ]
}

/// Builds a representation whose fiber over each point is a disjoint union
/// of coset spaces `G/H` for randomly chosen subgroups `H`. Free exactly
/// when every chosen subgroup is trivial.
pub fn gen_coset_representation(
    r: &mut ChaCha8Rng,
    name: &str,
    group: &FiniteGroup,
    n_points: usize,
    force_free: bool,
) -> TstarRepresentation {
    let base = FinSet::new(labels("m", n_points.max(1)));
    let subgroups = group.subgroups();
    let trivial: BTreeSet<Label> = [group.identity().clone()].into();

    let mut fibers: BTreeMap<Label, FinSet> = BTreeMap::new();
    let mut action: BTreeMap<Label, BTreeMap<(Label, Label), Label>> = BTreeMap::new();
    for x in base.iter() {
        let n_orbits = r.gen_range(1..=2);
        let mut fiber_elements: BTreeSet<Label> = BTreeSet::new();
        let mut table: BTreeMap<(Label, Label), Label> = BTreeMap::new();
        for orbit_idx in 0..n_orbits {
            let h = if force_free {
                &trivial
            } else {
                subgroups.choose(r).unwrap()
            };
            // left cosets of H, labeled by their least member
            let mut cosets: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
            for g in group.elements().iter() {
                let coset: BTreeSet<Label> =
                    h.iter().map(|hh| group.mul(g, hh).clone()).collect();
                let label = coset.iter().next().unwrap().clone();
                cosets.insert(label, coset);
            }
            let coset_labels: Vec<Label> = cosets.keys().cloned().collect();
            let point_of = |coset_rep: &Label| -> Label {
                format!("o{orbit_idx}.{coset_rep}")
            };
            for c in &coset_labels {
                fiber_elements.insert(point_of(c));
            }
            // g · (aH) = (ga)H, found by locating the coset containing ga
            for g in group.elements().iter() {
                for c in &coset_labels {
                    let ga = group.mul(g, c);
                    let target = cosets
                        .iter()
                        .find(|(_, members)| members.contains(ga))
                        .map(|(label, _)| label.clone())
                        .unwrap();
                    table.insert((g.clone(), point_of(c)), point_of(&target));
                }
            }
        }
        fibers.insert(x.clone(), fiber_elements.into_iter().collect());
        action.insert(x.clone(), table);
    }
    let space = Bundle::new(format!("{name}-space"), base.clone(), fibers, None).unwrap();
    TstarRepresentation::new(
        name,
        FiberedGroup {
            base,
            group: group.clone(),
        },
        space,
        action,
    )
    .unwrap()
}

/// Random bundle with full per-point charts onto a shared typical fiber.
pub fn gen_trivialized_bundle(
    r: &mut ChaCha8Rng,
    name: &str,
    base_prefix: &str,
    fiber_prefix: &str,
    typical_prefix: &str,
) -> Bundle {
    use fibra_core::bundle::Trivialization;
    let n_points = r.gen_range(1..=3);
    let fiber_size = r.gen_range(1..=3);
    let base_labels = labels(base_prefix, n_points);
    let typical = FinSet::new(labels(typical_prefix, fiber_size));
    let mut fibers = BTreeMap::new();
    let mut charts = BTreeMap::new();
    for x in &base_labels {
        let fiber_labels = labels(fiber_prefix, fiber_size);
        let mut shuffled: Vec<&Label> = typical.iter().collect();
        shuffled.shuffle(r);
        charts.insert(
            x.clone(),
            fiber_labels
                .iter()
                .zip(&shuffled)
                .map(|(a, t)| (a.clone(), (*t).clone()))
                .collect::<BTreeMap<Label, Label>>(),
        );
        fibers.insert(x.clone(), FinSet::new(fiber_labels));
    }
    Bundle::new(
        name,
        FinSet::new(base_labels),
        fibers,
        Some(Trivialization {
            typical,
            charts,
        }),
    )
    .unwrap()
}

/// Chart-uniform fibered correspondence: one relation on the typical
/// fibers transported back through the charts of both bundles, over a
/// random injective base.
pub fn gen_uniform_fc(
    r: &mut ChaCha8Rng,
    name: &str,
    source: &Bundle,
    target: &Bundle,
) -> FiberedCorrespondence {
    let typical_rel: FiberRelation = gen_fiber_relation(
        r,
        &source.trivialization().unwrap().typical,
        &target.trivialization().unwrap().typical,
    );
    let base = gen_injective_base(r, source.base(), target.base());
    let fiber_relations: BTreeMap<(Label, Label), FiberRelation> = base
        .pairs()
        .iter()
        .map(|(x, y)| {
            let cx = &source.trivialization().unwrap().charts[x];
            let cy = &target.trivialization().unwrap().charts[y];
            let inv_x: BTreeMap<&Label, &Label> = cx.iter().map(|(a, t)| (t, a)).collect();
            let inv_y: BTreeMap<&Label, &Label> = cy.iter().map(|(b, t)| (t, b)).collect();
            let rel: FiberRelation = typical_rel
                .iter()
                .map(|(ta, tb)| (inv_x[ta].clone(), inv_y[tb].clone()))
                .collect();
            ((x.clone(), y.clone()), rel)
        })
        .collect();
    FiberedCorrespondence::new(name, source.clone(), target.clone(), base, fiber_relations)
        .unwrap()
}

/// Random topology on the given labels: the union/intersection closure of
/// a random family of subsets.
pub fn gen_topology(
    r: &mut ChaCha8Rng,
    points: &[Label],
    seeds: &[BTreeSet<Label>],
) -> fibra_core::topology::FiniteTopology {
    let full: BTreeSet<Label> = points.iter().cloned().collect();
    let mut family: BTreeSet<BTreeSet<Label>> = [BTreeSet::new(), full].into();
    for s in seeds {
        family.insert(s.clone());
    }
    let extras = r.gen_range(0..=2);
    for _ in 0..extras {
        let subset: BTreeSet<Label> = points.iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
        family.insert(subset);
    }
    loop {
        let snapshot: Vec<BTreeSet<Label>> = family.iter().cloned().collect();
        let before = family.len();
        for (i, a) in snapshot.iter().enumerate() {
            for b in &snapshot[i + 1..] {
                family.insert(a.union(b).cloned().collect());
                family.insert(a.intersection(b).cloned().collect());
            }
        }
        if family.len() == before {
            break;
        }
    }
    fibra_core::topology::FiniteTopology::new(points.iter().cloned(), family).unwrap()
}
