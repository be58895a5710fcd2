//! Fibered groups acting fiberwise on bundles: stabilizers, little groups,
//! free actions, orbit equivalences and quotients, and bundle towers.

use std::collections::{BTreeMap, BTreeSet};

use crate::bundle::{Bundle, Section, Trivialization};
use crate::error::{Error, Result};
use crate::fibered::FiberRelation;
use crate::quotient::{quotient_bundle_bounded, QuotientResult};
use crate::reduced::{classify, ReducedFiberedCorrespondence};
use crate::set::{check_enum_limit, split_total_point, FinSet, Label, DEFAULT_MAX_ENUM};

/// A finite group given by its multiplication table. Associativity,
/// identity laws, and invertibility are verified at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    elements: FinSet,
    table: BTreeMap<(Label, Label), Label>,
    identity: Label,
}

impl FiniteGroup {
    pub fn new(
        elements: FinSet,
        table: BTreeMap<(Label, Label), Label>,
        identity: Label,
    ) -> Result<Self> {
        if !elements.contains(&identity) {
            return Err(Error::InvalidGroup {
                reason: format!("identity `{identity}` is not an element"),
            });
        }
        if table.len() != elements.len() * elements.len() {
            return Err(Error::InvalidGroup {
                reason: format!(
                    "table has {} entries, expected {}",
                    table.len(),
                    elements.len() * elements.len()
                ),
            });
        }
        if let Some(bad) = elements.iter().find(|e| e.contains('|')) {
            return Err(Error::InvalidGroup {
                reason: format!("element `{bad}` contains the reserved `|`"),
            });
        }
        for ((a, b), c) in &table {
            if !elements.contains(a) || !elements.contains(b) || !elements.contains(c) {
                return Err(Error::InvalidGroup {
                    reason: format!("entry ({a},{b})->{c} uses foreign labels"),
                });
            }
        }
        let g = FiniteGroup {
            elements,
            table,
            identity,
        };
        for a in g.elements.iter() {
            if g.mul(&g.identity, a) != a || g.mul(a, &g.identity) != a {
                return Err(Error::InvalidGroup {
                    reason: format!("identity law fails at `{a}`"),
                });
            }
            if !g.elements.iter().any(|b| g.mul(a, b) == &g.identity) {
                return Err(Error::InvalidGroup {
                    reason: format!("`{a}` has no inverse"),
                });
            }
        }
        for a in g.elements.iter() {
            for b in g.elements.iter() {
                for c in g.elements.iter() {
                    let ab_c = g.mul(g.mul(a, b), c);
                    let a_bc = g.mul(a, g.mul(b, c));
                    if ab_c != a_bc {
                        return Err(Error::InvalidGroup {
                            reason: format!("associativity fails at ({a},{b},{c})"),
                        });
                    }
                }
            }
        }
        Ok(g)
    }

    /// Cyclic group of order `n` with elements `0..n` and addition mod n.
    pub fn cyclic(n: usize) -> FiniteGroup {
        let elements: FinSet = (0..n).map(|i| i.to_string()).collect();
        let table = (0..n)
            .flat_map(|a| {
                (0..n).map(move |b| ((a.to_string(), b.to_string()), ((a + b) % n).to_string()))
            })
            .collect();
        FiniteGroup::new(elements, table, "0".to_string()).expect("cyclic tables are groups")
    }

    /// Klein four-group: bit pairs under componentwise xor.
    pub fn klein_four() -> FiniteGroup {
        let labels = ["00", "01", "10", "11"];
        let elements: FinSet = labels.iter().map(|s| s.to_string()).collect();
        let xor = |a: &str, b: &str| -> String {
            a.chars()
                .zip(b.chars())
                .map(|(x, y)| if x == y { '0' } else { '1' })
                .collect()
        };
        let table = labels
            .iter()
            .flat_map(|a| {
                labels
                    .iter()
                    .map(move |b| ((a.to_string(), b.to_string()), xor(a, b)))
            })
            .collect();
        FiniteGroup::new(elements, table, "00".to_string()).expect("xor tables are groups")
    }

    pub fn elements(&self) -> &FinSet {
        &self.elements
    }

    pub fn identity(&self) -> &Label {
        &self.identity
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn mul<'a>(&'a self, a: &str, b: &str) -> &'a Label {
        &self.table[&(a.to_string(), b.to_string())]
    }

    pub fn inverse_of(&self, a: &str) -> &Label {
        self.elements
            .iter()
            .find(|b| self.mul(a, b) == &self.identity)
            .expect("every element has an inverse")
    }

    /// Subgroup axioms for a subset: identity, closure, inverses.
    pub fn is_subgroup(&self, subset: &BTreeSet<Label>) -> bool {
        subset.contains(&self.identity)
            && subset.iter().all(|a| {
                subset.contains(self.inverse_of(a))
                    && subset.iter().all(|b| subset.contains(self.mul(a, b)))
            })
    }

    /// All subgroups, by brute force over subsets. Meant for small groups.
    pub fn subgroups(&self) -> Vec<BTreeSet<Label>> {
        let elems: Vec<&Label> = self.elements.iter().collect();
        let n = elems.len();
        let mut out = Vec::new();
        for mask in 0u64..1 << n {
            let subset: BTreeSet<Label> = elems
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, l)| (*l).clone())
                .collect();
            if !subset.is_empty() && self.is_subgroup(&subset) {
                out.push(subset);
            }
        }
        out
    }
}

/// A trivial group bundle: one group shared by every fiber over the base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberedGroup {
    pub base: FinSet,
    pub group: FiniteGroup,
}

/// A fiberwise left action of a fibered group on a bundle over the same
/// base. Per point, the identity acts trivially, the action respects the
/// group table, and every element acts bijectively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TstarRepresentation {
    name: Label,
    group_bundle: FiberedGroup,
    space: Bundle,
    action: BTreeMap<Label, BTreeMap<(Label, Label), Label>>,
}

impl TstarRepresentation {
    pub fn new(
        name: impl Into<Label>,
        group_bundle: FiberedGroup,
        space: Bundle,
        action: BTreeMap<Label, BTreeMap<(Label, Label), Label>>,
    ) -> Result<Self> {
        if &group_bundle.base != space.base() {
            return Err(Error::BaseMismatch {
                expected: group_bundle.base.to_string(),
                found: space.base().to_string(),
            });
        }
        let keys: BTreeSet<&Label> = action.keys().collect();
        let base: BTreeSet<&Label> = space.base().iter().collect();
        if keys != base {
            return Err(Error::InvalidAction {
                reason: "action must be given for exactly the base points".into(),
            });
        }
        let group = &group_bundle.group;
        for (x, table) in &action {
            let fiber = space.fiber(x)?;
            if table.len() != group.order() * fiber.len() {
                return Err(Error::InvalidAction {
                    reason: format!(
                        "action table over `{x}` has {} entries, expected {}",
                        table.len(),
                        group.order() * fiber.len()
                    ),
                });
            }
            for ((g, e), r) in table {
                if !group.elements().contains(g) {
                    return Err(Error::InvalidAction {
                        reason: format!("unknown group element `{g}` over `{x}`"),
                    });
                }
                if !fiber.contains(e) || !fiber.contains(r) {
                    return Err(Error::InvalidAction {
                        reason: format!("action over `{x}` leaves the fiber at ({g},{e})"),
                    });
                }
            }
            for e in fiber.iter() {
                if table[&(group.identity().clone(), e.clone())] != *e {
                    return Err(Error::InvalidAction {
                        reason: format!("identity moves `{e}` over `{x}`"),
                    });
                }
            }
            for g in group.elements().iter() {
                for h in group.elements().iter() {
                    let gh = group.mul(g, h);
                    for e in fiber.iter() {
                        let h_e = &table[&(h.clone(), e.clone())];
                        let g_he = &table[&(g.clone(), h_e.clone())];
                        let gh_e = &table[&(gh.clone(), e.clone())];
                        if g_he != gh_e {
                            return Err(Error::InvalidAction {
                                reason: format!(
                                    "compatibility fails over `{x}` at ({g},{h},{e})"
                                ),
                            });
                        }
                    }
                }
                let images: BTreeSet<&Label> = fiber
                    .iter()
                    .map(|e| &table[&(g.clone(), e.clone())])
                    .collect();
                if images.len() != fiber.len() {
                    return Err(Error::InvalidAction {
                        reason: format!("`{g}` does not act bijectively over `{x}`"),
                    });
                }
            }
        }
        Ok(TstarRepresentation {
            name: name.into(),
            group_bundle,
            space,
            action,
        })
    }

    pub fn name(&self) -> &Label {
        &self.name
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group_bundle.group
    }

    pub fn group_bundle(&self) -> &FiberedGroup {
        &self.group_bundle
    }

    pub fn space(&self) -> &Bundle {
        &self.space
    }

    pub fn act(&self, x: &str, g: &str, e: &str) -> Result<&Label> {
        let table = self.action.get(x).ok_or_else(|| Error::UnknownPoint {
            point: x.to_string(),
        })?;
        table
            .get(&(g.to_string(), e.to_string()))
            .ok_or_else(|| Error::UnknownElement {
                element: format!("{g}|{e}"),
            })
    }
}

/// Stability subgroup of one fiber element: the group elements fixing it.
/// The subgroup axioms are re-checked on the way out.
pub fn stabilizer(rep: &TstarRepresentation, x: &str, e: &str) -> Result<BTreeSet<Label>> {
    let fiber = rep.space.fiber(x)?;
    if !fiber.contains(e) {
        return Err(Error::UnknownElement {
            element: e.to_string(),
        });
    }
    let stab: BTreeSet<Label> = rep
        .group()
        .elements()
        .iter()
        .filter(|g| rep.act(x, g, e).expect("validated action") == e)
        .cloned()
        .collect();
    assert!(
        rep.group().is_subgroup(&stab),
        "stabilizer must satisfy the subgroup axioms"
    );
    Ok(stab)
}

/// The little (stability) group of a section: all group-bundle sections
/// fixing it pointwise. Each fiber of the result lies inside the pointwise
/// stabilizer, and the output is exactly their product.
pub fn little_group(rep: &TstarRepresentation, h: &Section) -> Result<Vec<Section>> {
    little_group_bounded(rep, h, DEFAULT_MAX_ENUM)
}

pub fn little_group_bounded(
    rep: &TstarRepresentation,
    h: &Section,
    limit: u64,
) -> Result<Vec<Section>> {
    h.validate(&rep.space)?;
    let points: Vec<&Label> = rep.space.base().iter().collect();
    let order = rep.group().order() as u128;
    check_enum_limit(
        "little-group sections",
        order.pow(points.len() as u32),
        limit,
    )?;
    let stabs: Vec<BTreeSet<Label>> = points
        .iter()
        .map(|x| stabilizer(rep, x, h.value(x).expect("validated section")))
        .collect::<Result<_>>()?;
    let mut out = vec![BTreeMap::new()];
    for (x, stab) in points.iter().zip(&stabs) {
        let mut next = Vec::with_capacity(out.len() * stab.len());
        for partial in &out {
            for g in stab {
                let mut p: BTreeMap<Label, Label> = partial.clone();
                p.insert((*x).clone(), g.clone());
                next.push(p);
            }
        }
        out = next;
    }
    let expected: usize = stabs.iter().map(|s| s.len()).product();
    assert_eq!(out.len(), expected, "little group must be the stabilizer product");
    Ok(out.into_iter().map(Section::new).collect())
}

/// Free action: every stabilizer of every fiber element is trivial.
pub fn is_free(rep: &TstarRepresentation) -> bool {
    rep.space.base().iter().all(|x| {
        rep.space.fibers()[x]
            .iter()
            .all(|e| {
                rep.group()
                    .elements()
                    .iter()
                    .all(|g| g == rep.group().identity() || rep.act(x, g, e).unwrap() != e)
            })
    })
}

/// Orbit equivalence of a representation: fiber elements are related when
/// some group element carries one to the other. Always an equivalence.
pub fn orbit_equivalence(rep: &TstarRepresentation) -> ReducedFiberedCorrespondence {
    let fiber_relations: BTreeMap<Label, FiberRelation> = rep
        .space
        .base()
        .iter()
        .map(|x| {
            let mut rel = FiberRelation::new();
            for e in rep.space.fibers()[x].iter() {
                for g in rep.group().elements().iter() {
                    rel.insert((e.clone(), rep.act(x, g, e).unwrap().clone()));
                }
            }
            (x.clone(), rel)
        })
        .collect();
    let s = ReducedFiberedCorrespondence::new(
        format!("orbits({})", rep.name),
        rep.space.clone(),
        rep.space.clone(),
        rep.space.base().clone(),
        fiber_relations,
    )
    .expect("orbit relation of a valid action is valid");
    let c = classify(&s).expect("orbit relation is a full-domain endorelation");
    assert!(c.equivalence, "orbit relation must classify as an equivalence");
    s
}

/// One orbit class whose size deviates from the group order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegenerateClass {
    pub point: Label,
    pub class: Label,
    pub size: usize,
    pub expected: usize,
}

/// Orbit quotient of a representation: the quotient by the orbit
/// equivalence, the level-2 tower it creates, and the degeneracy report.
#[derive(Debug, Clone)]
pub struct OrbitQuotient {
    pub quotient: QuotientResult,
    /// The space seen as a bundle over the quotient total space; under a
    /// free action it carries the class↔group trivialization.
    pub level2: Bundle,
    pub tower: Tower,
    pub free: bool,
    pub degenerate: Vec<DegenerateClass>,
}

pub fn orbit_quotient(rep: &TstarRepresentation) -> Result<OrbitQuotient> {
    orbit_quotient_bounded(rep, DEFAULT_MAX_ENUM)
}

pub fn orbit_quotient_bounded(rep: &TstarRepresentation, limit: u64) -> Result<OrbitQuotient> {
    let s = orbit_equivalence(rep);
    let quotient = quotient_bundle_bounded(&rep.space, &s, limit)?;
    let free = is_free(rep);
    let order = rep.group().order();

    let mut degenerate = Vec::new();
    let mut level2_fibers: BTreeMap<Label, FinSet> = BTreeMap::new();
    let mut charts: BTreeMap<Label, BTreeMap<Label, Label>> = BTreeMap::new();
    for (x, classes) in &quotient.class_map {
        for (class_label, members) in classes {
            let total = crate::set::total_point_label(x, class_label);
            level2_fibers.insert(total.clone(), members.iter().cloned().collect());
            if members.len() != order {
                degenerate.push(DegenerateClass {
                    point: x.clone(),
                    class: class_label.clone(),
                    size: members.len(),
                    expected: order,
                });
            } else if free {
                // with a free action, g ↦ g·basepoint is one-to-one onto the class
                let mut chart = BTreeMap::new();
                for g in rep.group().elements().iter() {
                    let e = rep.act(x, g, class_label)?;
                    chart.insert(e.clone(), g.clone());
                }
                charts.insert(total, chart);
            }
        }
    }
    let trivialization = if free {
        Some(Trivialization {
            typical: rep.group().elements().clone(),
            charts,
        })
    } else {
        None
    };
    let level2 = Bundle::new(
        format!("{}@2", rep.space.name()),
        quotient.quotient.total_labels().into_iter().collect(),
        level2_fibers,
        trivialization,
    )?;
    let tower = Tower::new(vec![level2.clone(), quotient.quotient.clone()]);
    tower.validate()?;
    if free {
        assert!(degenerate.is_empty(), "free actions have no degenerate classes");
    }
    Ok(OrbitQuotient {
        quotient,
        level2,
        tower,
        free,
        degenerate,
    })
}

/// A tower of bundles, highest level first: the base of each listed bundle
/// is the total space of the next one, and the last is a bundle over the
/// ground base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    levels: Vec<Bundle>,
}

impl Tower {
    pub fn new(levels: Vec<Bundle>) -> Self {
        Tower { levels }
    }

    pub fn levels(&self) -> &[Bundle] {
        &self.levels
    }

    /// Number of levels; level numbers run from `height()` at the top of
    /// the list down to 1, with 0 naming the ground base.
    pub fn height(&self) -> usize {
        self.levels.len()
    }

    fn bundle_at(&self, level: usize) -> Result<&Bundle> {
        if level == 0 || level > self.height() {
            return Err(Error::BrokenChain {
                level,
                reason: format!("no bundle at level {level}; height is {}", self.height()),
            });
        }
        Ok(&self.levels[self.height() - level])
    }

    /// Verifies the chaining condition at every level.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.levels.len().saturating_sub(1) {
            let upper = &self.levels[i];
            let lower = &self.levels[i + 1];
            let expected: BTreeSet<Label> = lower.total_labels().into_iter().collect();
            if upper.base().labels() != &expected {
                return Err(Error::BrokenChain {
                    level: self.height() - i,
                    reason: "base differs from the total space of the level below".into(),
                });
            }
        }
        Ok(())
    }

    /// Composed projection from the total space at `from_level` to the
    /// total space at `to_level` (level 0 is the ground base).
    pub fn project(&self, from_level: usize, to_level: usize) -> Result<BTreeMap<Label, Label>> {
        if to_level >= from_level {
            return Err(Error::BrokenChain {
                level: from_level,
                reason: "projection target level must be below the source level".into(),
            });
        }
        self.validate()?;
        let start = self.bundle_at(from_level)?;
        let mut map: BTreeMap<Label, Label> = start
            .total_labels()
            .into_iter()
            .map(|l| {
                let (x, _) = split_total_point(&l).expect("total labels are well formed");
                (l.clone(), x.to_string())
            })
            .collect();
        // walk down one level at a time, composing the single projections
        for level in (to_level + 1..from_level).rev() {
            let bundle = self.bundle_at(level)?;
            let step: BTreeMap<Label, Label> = bundle
                .total_labels()
                .into_iter()
                .map(|l| {
                    let x = split_total_point(&l)
                        .expect("total labels are well formed")
                        .0
                        .to_string();
                    (l, x)
                })
                .collect();
            for v in map.values_mut() {
                *v = step[v].clone();
            }
        }
        Ok(map)
    }
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

    /// Z2 acting per point: swap the listed pairs, fix everything else.
    fn z2_swap_rep(name: &str, space: &Bundle, swaps: &[(&str, &[(&str, &str)])]) -> TstarRepresentation {
        let group = FiniteGroup::cyclic(2);
        let swap_map: BTreeMap<&str, BTreeMap<String, String>> = swaps
            .iter()
            .map(|(x, pairs)| {
                let mut m = BTreeMap::new();
                for (a, b) in *pairs {
                    m.insert(a.to_string(), b.to_string());
                    m.insert(b.to_string(), a.to_string());
                }
                (*x, m)
            })
            .collect();
        let mut action = BTreeMap::new();
        for x in space.base().iter() {
            let mut table = BTreeMap::new();
            for e in space.fibers()[x].iter() {
                table.insert(("0".to_string(), e.clone()), e.clone());
                let image = swap_map
                    .get(x.as_str())
                    .and_then(|m| m.get(e))
                    .cloned()
                    .unwrap_or_else(|| e.clone());
                table.insert(("1".to_string(), e.clone()), image);
            }
            action.insert(x.clone(), table);
        }
        TstarRepresentation::new(
            name,
            FiberedGroup {
                base: space.base().clone(),
                group,
            },
            space.clone(),
            action,
        )
        .unwrap()
    }

    fn trivial_rep(name: &str, space: &Bundle, group: FiniteGroup) -> TstarRepresentation {
        let mut action = BTreeMap::new();
        for x in space.base().iter() {
            let mut table = BTreeMap::new();
            for e in space.fibers()[x].iter() {
                for g in group.elements().iter() {
                    table.insert((g.clone(), e.clone()), e.clone());
                }
            }
            action.insert(x.clone(), table);
        }
        TstarRepresentation::new(
            name,
            FiberedGroup {
                base: space.base().clone(),
                group,
            },
            space.clone(),
            action,
        )
        .unwrap()
    }

    #[test]
    fn group_construction_checks_axioms() {
        let z3 = FiniteGroup::cyclic(3);
        assert_eq!(z3.order(), 3);
        assert_eq!(z3.mul("1", "2"), "0");
        assert_eq!(z3.inverse_of("1"), "2");

        // broken table: constant multiplication has no identity
        let bad: BTreeMap<(Label, Label), Label> = [
            (("e".to_string(), "e".to_string()), "e".to_string()),
            (("e".to_string(), "a".to_string()), "e".to_string()),
            (("a".to_string(), "e".to_string()), "e".to_string()),
            (("a".to_string(), "a".to_string()), "e".to_string()),
        ]
        .into();
        assert!(matches!(
            FiniteGroup::new(FinSet::new(["e", "a"]), bad, "e".to_string()),
            Err(Error::InvalidGroup { .. })
        ));
    }

    #[test]
    fn klein_four_has_five_subgroups() {
        let k = FiniteGroup::klein_four();
        assert_eq!(k.subgroups().len(), 5);
    }

    #[test]
    fn stabilizers_of_swap_action() {
        let space = bundle("e", &[("m", &["p", "q", "r"])]);
        let rep = z2_swap_rep("rho", &space, &[("m", &[("p", "q")])]);
        assert_eq!(stabilizer(&rep, "m", "p").unwrap(), ["0".to_string()].into());
        assert_eq!(
            stabilizer(&rep, "m", "r").unwrap(),
            ["0".to_string(), "1".to_string()].into()
        );
    }

    #[test]
    fn trivial_action_stabilizer_is_whole_group() {
        let space = bundle("e", &[("m", &["p"])]);
        let rep = trivial_rep("t", &space, FiniteGroup::cyclic(3));
        assert_eq!(stabilizer(&rep, "m", "p").unwrap().len(), 3);
    }

    #[test]
    fn stabilizer_rejects_unknown_inputs() {
        let space = bundle("e", &[("m", &["p"])]);
        let rep = trivial_rep("t", &space, FiniteGroup::cyclic(2));
        assert!(matches!(
            stabilizer(&rep, "zz", "p"),
            Err(Error::UnknownPoint { .. })
        ));
        assert!(matches!(
            stabilizer(&rep, "m", "zz"),
            Err(Error::UnknownElement { .. })
        ));
    }

    #[test]
    fn little_group_of_mixed_section() {
        // swap p,q and fix r over m0; trivial over m1; h = (r, p)
        let space = bundle("e", &[("m0", &["p", "q", "r"]), ("m1", &["p", "q"])]);
        let rep = z2_swap_rep("rho", &space, &[("m0", &[("p", "q")])]);
        let h = Section::new(
            [
                ("m0".to_string(), "r".to_string()),
                ("m1".to_string(), "p".to_string()),
            ]
            .into(),
        );
        let lg = little_group(&rep, &h).unwrap();
        assert_eq!(lg.len(), 4);
    }

    #[test]
    fn little_group_of_trivial_action_is_everything() {
        let space = bundle("e", &[("m0", &["p"]), ("m1", &["q"])]);
        let rep = trivial_rep("t", &space, FiniteGroup::cyclic(2));
        let h = Section::new(
            [
                ("m0".to_string(), "p".to_string()),
                ("m1".to_string(), "q".to_string()),
            ]
            .into(),
        );
        assert_eq!(little_group(&rep, &h).unwrap().len(), 4);
    }

    #[test]
    fn little_group_of_free_action_is_identity_only() {
        let space = bundle("e", &[("m", &["p", "q"])]);
        let rep = z2_swap_rep("rho", &space, &[("m", &[("p", "q")])]);
        assert!(is_free(&rep));
        let h = Section::new([("m".to_string(), "p".to_string())].into());
        let lg = little_group(&rep, &h).unwrap();
        assert_eq!(lg.len(), 1);
        assert_eq!(lg[0].value("m").unwrap(), "0");
    }

    #[test]
    fn freeness_detection() {
        let space = bundle("e", &[("m", &["p", "q", "r"])]);
        let fixed_point = z2_swap_rep("rho", &space, &[("m", &[("p", "q")])]);
        assert!(!is_free(&fixed_point));

        let trivial = trivial_rep("t", &bundle("e", &[("m", &["p"])]), FiniteGroup::cyclic(1));
        assert!(is_free(&trivial));
    }

    #[test]
    fn orbit_equivalence_shapes() {
        let space = bundle("e", &[("m", &["p", "q", "r"])]);
        let rep = z2_swap_rep("rho", &space, &[("m", &[("p", "q")])]);
        let s = orbit_equivalence(&rep);
        let rel = &s.fiber_relations()["m"];
        assert!(rel.contains(&("p".to_string(), "q".to_string())));
        assert!(!rel.contains(&("p".to_string(), "r".to_string())));

        let trivial = trivial_rep("t", &space, FiniteGroup::cyclic(2));
        let s = orbit_equivalence(&trivial);
        assert_eq!(s.fiber_relations()["m"].len(), 3);
    }

    #[test]
    fn free_orbit_quotient_records_group_bijections() {
        let space = bundle("e", &[("m0", &["p", "q"]), ("m1", &["p", "q"])]);
        let rep = z2_swap_rep(
            "rho",
            &space,
            &[("m0", &[("p", "q")]), ("m1", &[("p", "q")])],
        );
        let oq = orbit_quotient(&rep).unwrap();
        assert!(oq.free);
        assert!(oq.degenerate.is_empty());
        // one orbit per point, of size |G| = 2
        assert!(oq.quotient.quotient.fibers().values().all(|f| f.len() == 1));
        let triv = oq.level2.trivialization().unwrap();
        assert_eq!(triv.typical, FinSet::new(["0", "1"]));
        // the recorded bijection is consistent with the action
        for (total, chart) in &triv.charts {
            let (x, class) = split_total_point(total).unwrap();
            for (e, g) in chart {
                assert_eq!(rep.act(x, g, class).unwrap(), e);
            }
        }
        oq.tower.validate().unwrap();
    }

    #[test]
    fn fixed_point_produces_a_degenerate_class() {
        let space = bundle("e", &[("m", &["p", "q", "r"])]);
        let rep = z2_swap_rep("rho", &space, &[("m", &[("p", "q")])]);
        let oq = orbit_quotient(&rep).unwrap();
        assert!(!oq.free);
        assert_eq!(
            oq.degenerate,
            vec![DegenerateClass {
                point: "m".to_string(),
                class: "r".to_string(),
                size: 1,
                expected: 2,
            }]
        );
        let sizes: Vec<usize> = oq.quotient.class_map["m"]
            .values()
            .map(|c| c.len())
            .collect();
        assert_eq!(sizes, vec![2, 1]);
    }

    #[test]
    fn trivial_group_quotient_is_the_original_bundle() {
        let space = bundle("e", &[("m", &["p", "q"])]);
        let rep = trivial_rep("t", &space, FiniteGroup::cyclic(1));
        let oq = orbit_quotient(&rep).unwrap();
        assert_eq!(oq.quotient.quotient.fibers(), space.fibers());
    }

    #[test]
    fn tower_validation_and_projection() {
        let space = bundle("e", &[("m0", &["p", "q"]), ("m1", &["p", "q"])]);
        let rep = z2_swap_rep(
            "rho",
            &space,
            &[("m0", &[("p", "q")]), ("m1", &[("p", "q")])],
        );
        let oq = orbit_quotient(&rep).unwrap();
        let t = &oq.tower;
        assert_eq!(t.height(), 2);
        t.validate().unwrap();

        let down = t.project(2, 0).unwrap();
        // every level-2 total point lands on its ground base point
        for (from, to) in &down {
            assert!(from.starts_with(to.as_str()));
            assert!(to == "m0" || to == "m1");
        }
        let single = Tower::new(vec![space.clone()]);
        single.validate().unwrap();

        let broken = Tower::new(vec![space.clone(), space.clone()]);
        assert!(matches!(broken.validate(), Err(Error::BrokenChain { .. })));
    }

    #[test]
    fn two_step_projection_equals_composition_of_steps() {
        let space = bundle("e", &[("m0", &["p", "q"]), ("m1", &["p", "q"])]);
        let rep = z2_swap_rep(
            "rho",
            &space,
            &[("m0", &[("p", "q")]), ("m1", &[("p", "q")])],
        );
        let t = orbit_quotient(&rep).unwrap().tower;
        let two_then_one = t.project(2, 1).unwrap();
        let one_then_zero = t.project(1, 0).unwrap();
        let direct = t.project(2, 0).unwrap();
        for (k, v) in &two_then_one {
            assert_eq!(&direct[k], &one_then_zero[v]);
        }
    }

    #[test]
    fn action_validation_rejects_broken_tables() {
        let space = bundle("e", &[("m", &["p", "q"])]);
        let group = FiniteGroup::cyclic(2);
        // "1" acts non-bijectively
        let action: BTreeMap<Label, BTreeMap<(Label, Label), Label>> = [(
            "m".to_string(),
            [
                (("0".to_string(), "p".to_string()), "p".to_string()),
                (("0".to_string(), "q".to_string()), "q".to_string()),
                (("1".to_string(), "p".to_string()), "p".to_string()),
                (("1".to_string(), "q".to_string()), "p".to_string()),
            ]
            .into(),
        )]
        .into();
        assert!(matches!(
            TstarRepresentation::new(
                "bad",
                FiberedGroup {
                    base: space.base().clone(),
                    group,
                },
                space,
                action,
            ),
            Err(Error::InvalidAction { .. })
        ));
    }
}
