//! JSON universe documents: one self-contained document declares named
//! topologies, sets, algebras, correspondences, bundles, fibered and
//! reduced correspondences, n-ary relations, morphisms, groups,
//! representations, and towers.
//!
//! Loading parses the raw document, resolves every cross-reference, and
//! re-validates every invariant; failures carry a JSON-pointer-style
//! location. Emission is canonical: object keys sorted, set elements
//! sorted, references normalized, so load ∘ emit is the identity on
//! canonical documents.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::action::{FiberedGroup, FiniteGroup, Tower, TstarRepresentation};
use crate::bundle::{Bundle, Trivialization};
use crate::error::{Error, Result};
use crate::fibered::{FiberRelation, FiberedCorrespondence};
use crate::quotient::FiberedMorphism;
use crate::reduced::{FiberedRelation, ReducedFiberedCorrespondence};
use crate::relation::{AlgebraOp, Correspondence, FiniteAlgebra};
use crate::set::{FinSet, Label};
use crate::topology::FiniteTopology;

fn at(pointer: String, e: Error) -> Error {
    match e {
        Error::InvariantViolation { .. } => e,
        other => Error::InvariantViolation {
            pointer,
            message: other.to_string(),
        },
    }
}

fn violation(pointer: String, message: impl Into<String>) -> Error {
    Error::InvariantViolation {
        pointer,
        message: message.into(),
    }
}

/// Inline label list or a reference into the `sets` collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetRef {
    Name(String),
    Inline(Vec<Label>),
}

/// Inline group or a reference into the `groups` collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Name(String),
    Inline(GroupDoc),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDoc {
    pub points: Vec<Label>,
    pub opens: Vec<Vec<Label>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpDoc {
    pub arity: usize,
    pub table: BTreeMap<String, Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDoc {
    pub carrier: Vec<Label>,
    #[serde(default)]
    pub ops: BTreeMap<String, OpDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceDoc {
    pub source: SetRef,
    pub target: SetRef,
    #[serde(default)]
    pub pairs: Vec<(Label, Label)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrivializationDoc {
    pub typical: Vec<Label>,
    #[serde(default)]
    pub charts: BTreeMap<Label, BTreeMap<Label, Label>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDoc {
    pub base: Vec<Label>,
    #[serde(default)]
    pub fibers: BTreeMap<Label, Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trivialization: Option<TrivializationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_topology: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_topology: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberedDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub base_pairs: Vec<(Label, Label)>,
    #[serde(default)]
    pub fibers: BTreeMap<String, Vec<(Label, Label)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub domain: Vec<Label>,
    #[serde(default)]
    pub fibers: BTreeMap<Label, Vec<(Label, Label)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub bundle: String,
    pub arity: usize,
    #[serde(default)]
    pub fibers: BTreeMap<Label, Vec<Vec<Label>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub map: BTreeMap<Label, BTreeMap<Label, Label>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub elements: Vec<Label>,
    pub identity: Label,
    pub table: BTreeMap<String, Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationDoc {
    pub group: GroupRef,
    pub space: String,
    #[serde(default)]
    pub action: BTreeMap<Label, BTreeMap<String, Label>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerDoc {
    pub levels: Vec<String>,
}

/// Raw shape of a universe document; field order here is emission order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseDoc {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub topologies: BTreeMap<String, TopologyDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sets: BTreeMap<String, Vec<Label>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub algebras: BTreeMap<String, AlgebraDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub correspondences: BTreeMap<String, CorrespondenceDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bundles: BTreeMap<String, BundleDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fibered: BTreeMap<String, FiberedDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reduced: BTreeMap<String, ReducedDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relations: BTreeMap<String, RelationDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub morphisms: BTreeMap<String, MorphismDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub groups: BTreeMap<String, GroupDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub representations: BTreeMap<String, RepresentationDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub towers: BTreeMap<String, TowerDoc>,
}

/// Kind of a named object, for command dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Topology,
    Set,
    Algebra,
    Correspondence,
    Bundle,
    Fibered,
    Reduced,
    Relation,
    Morphism,
    Group,
    Representation,
    Tower,
}

impl ObjectKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObjectKind::Topology => "topology",
            ObjectKind::Set => "set",
            ObjectKind::Algebra => "algebra",
            ObjectKind::Correspondence => "correspondence",
            ObjectKind::Bundle => "bundle",
            ObjectKind::Fibered => "fibered",
            ObjectKind::Reduced => "reduced",
            ObjectKind::Relation => "relation",
            ObjectKind::Morphism => "morphism",
            ObjectKind::Group => "group",
            ObjectKind::Representation => "representation",
            ObjectKind::Tower => "tower",
        }
    }
}

/// A loaded universe: the normalized document plus every object resolved
/// into its validated form.
#[derive(Debug, Clone)]
pub struct Universe {
    doc: UniverseDoc,
    pub topologies: BTreeMap<String, FiniteTopology>,
    pub sets: BTreeMap<String, FinSet>,
    pub algebras: BTreeMap<String, FiniteAlgebra>,
    pub correspondences: BTreeMap<String, Correspondence>,
    pub bundles: BTreeMap<String, Bundle>,
    pub fibered: BTreeMap<String, FiberedCorrespondence>,
    pub reduced: BTreeMap<String, ReducedFiberedCorrespondence>,
    pub relations: BTreeMap<String, FiberedRelation>,
    pub morphisms: BTreeMap<String, FiberedMorphism>,
    pub groups: BTreeMap<String, FiniteGroup>,
    pub representations: BTreeMap<String, TstarRepresentation>,
    pub towers: BTreeMap<String, Tower>,
}

/// Splits a composite key into `n` parts, each of which must be a valid
/// label. The parse must be unique; ambiguous or impossible keys are
/// rejected rather than guessed at.
fn split_tuple_key(key: &str, n: usize, valid: &FinSet, sep: char) -> Option<Vec<Label>> {
    fn go(rest: &str, n: usize, valid: &FinSet, sep: char, acc: &mut Vec<Label>, out: &mut Vec<Vec<Label>>) {
        // two parses already prove ambiguity; stop searching
        if out.len() >= 2 {
            return;
        }
        if n == 1 {
            if valid.contains(rest) {
                let mut done = acc.clone();
                done.push(rest.to_string());
                out.push(done);
            }
            return;
        }
        for (i, c) in rest.char_indices() {
            if c == sep {
                let head = &rest[..i];
                if valid.contains(head) {
                    acc.push(head.to_string());
                    go(&rest[i + 1..], n - 1, valid, sep, acc, out);
                    acc.pop();
                }
            }
        }
    }
    if n == 0 {
        return if key.is_empty() { Some(vec![]) } else { None };
    }
    let mut parses = Vec::new();
    go(key, n, valid, sep, &mut Vec::new(), &mut parses);
    if parses.len() == 1 {
        parses.pop()
    } else {
        None
    }
}

/// Like `split_tuple_key` for a two-part key whose halves come from two
/// different label sets.
fn split_pair_key(key: &str, first: &FinSet, second: &FinSet, sep: char) -> Option<(Label, Label)> {
    let mut parses = Vec::new();
    for (i, c) in key.char_indices() {
        if c == sep {
            let (a, b) = (&key[..i], &key[i + 1..]);
            if first.contains(a) && second.contains(b) {
                parses.push((a.to_string(), b.to_string()));
            }
        }
    }
    if parses.len() == 1 {
        parses.pop()
    } else {
        None
    }
}

fn join_key(parts: &[&str], sep: char) -> String {
    parts.join(&sep.to_string())
}

impl Universe {
    pub fn empty() -> Universe {
        Universe::resolve(UniverseDoc::default()).expect("empty universe is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Universe> {
        let doc: UniverseDoc = serde_json::from_str(text).map_err(|e| Error::ParseError {
            message: e.to_string(),
        })?;
        Universe::resolve(doc)
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Universe> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::ParseError {
            message: format!("document is not UTF-8: {e}"),
        })?;
        Universe::from_json_str(text)
    }

    pub fn doc(&self) -> &UniverseDoc {
        &self.doc
    }

    /// Canonical serialization: sorted keys, sorted set elements,
    /// normalized references, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(&self.doc).expect("documents always serialize");
        s.push('\n');
        s
    }

    /// Collections in which `name` occurs.
    pub fn kinds_of(&self, name: &str) -> Vec<ObjectKind> {
        let mut out = Vec::new();
        if self.topologies.contains_key(name) {
            out.push(ObjectKind::Topology);
        }
        if self.sets.contains_key(name) {
            out.push(ObjectKind::Set);
        }
        if self.algebras.contains_key(name) {
            out.push(ObjectKind::Algebra);
        }
        if self.correspondences.contains_key(name) {
            out.push(ObjectKind::Correspondence);
        }
        if self.bundles.contains_key(name) {
            out.push(ObjectKind::Bundle);
        }
        if self.fibered.contains_key(name) {
            out.push(ObjectKind::Fibered);
        }
        if self.reduced.contains_key(name) {
            out.push(ObjectKind::Reduced);
        }
        if self.relations.contains_key(name) {
            out.push(ObjectKind::Relation);
        }
        if self.morphisms.contains_key(name) {
            out.push(ObjectKind::Morphism);
        }
        if self.groups.contains_key(name) {
            out.push(ObjectKind::Group);
        }
        if self.representations.contains_key(name) {
            out.push(ObjectKind::Representation);
        }
        if self.towers.contains_key(name) {
            out.push(ObjectKind::Tower);
        }
        out
    }

    /// Unique kind of `name` among the given candidates.
    pub fn kind_among(&self, name: &str, candidates: &[ObjectKind]) -> Result<ObjectKind> {
        let kinds: Vec<ObjectKind> = self
            .kinds_of(name)
            .into_iter()
            .filter(|k| candidates.contains(k))
            .collect();
        match kinds.len() {
            0 => Err(Error::UnknownObject {
                name: name.to_string(),
            }),
            1 => Ok(kinds[0]),
            _ => Err(Error::AmbiguousName {
                name: name.to_string(),
                collections: kinds.iter().map(|k| k.name().to_string()).collect(),
            }),
        }
    }

    fn resolve(doc: UniverseDoc) -> Result<Universe> {
        let mut normalized = doc.clone();

        let mut topologies = BTreeMap::new();
        for (name, t) in &doc.topologies {
            let ptr = format!("/topologies/{name}");
            let opens: Vec<BTreeSet<Label>> = t
                .opens
                .iter()
                .map(|o| o.iter().cloned().collect())
                .collect();
            let top = FiniteTopology::new(t.points.clone(), opens).map_err(|e| at(ptr, e))?;
            normalized.topologies.insert(
                name.clone(),
                TopologyDoc {
                    points: top.points().to_vec(),
                    opens: top.opens().iter().map(|o| o.iter().cloned().collect()).collect(),
                },
            );
            topologies.insert(name.clone(), top);
        }

        let mut sets = BTreeMap::new();
        for (name, labels) in &doc.sets {
            let set = FinSet::new(labels.iter().cloned());
            normalized
                .sets
                .insert(name.clone(), set.iter().cloned().collect());
            sets.insert(name.clone(), set);
        }

        let mut algebras = BTreeMap::new();
        for (name, a) in &doc.algebras {
            let ptr = format!("/algebras/{name}");
            let carrier = FinSet::new(a.carrier.iter().cloned());
            let mut operations = BTreeMap::new();
            let mut norm_ops = BTreeMap::new();
            for (op_name, op) in &a.ops {
                let mut table = BTreeMap::new();
                let mut norm_table = BTreeMap::new();
                for (key, value) in &op.table {
                    let args = split_tuple_key(key, op.arity, &carrier, ',').ok_or_else(|| {
                        violation(
                            format!("{ptr}/ops/{op_name}/table/{key}"),
                            "key does not parse uniquely into carrier labels",
                        )
                    })?;
                    let parts: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
                    norm_table.insert(join_key(&parts, ','), value.clone());
                    table.insert(args, value.clone());
                }
                operations.insert(
                    op_name.clone(),
                    AlgebraOp {
                        arity: op.arity,
                        table,
                    },
                );
                norm_ops.insert(
                    op_name.clone(),
                    OpDoc {
                        arity: op.arity,
                        table: norm_table,
                    },
                );
            }
            let algebra =
                FiniteAlgebra::new(carrier.clone(), operations).map_err(|e| at(ptr, e))?;
            normalized.algebras.insert(
                name.clone(),
                AlgebraDoc {
                    carrier: carrier.iter().cloned().collect(),
                    ops: norm_ops,
                },
            );
            algebras.insert(name.clone(), algebra);
        }

        let resolve_set = |r: &SetRef, ptr: &str| -> Result<FinSet> {
            match r {
                SetRef::Inline(labels) => Ok(FinSet::new(labels.iter().cloned())),
                SetRef::Name(n) => sets.get(n).cloned().ok_or_else(|| {
                    violation(ptr.to_string(), format!("unknown set `{n}`"))
                }),
            }
        };

        let mut correspondences = BTreeMap::new();
        for (name, c) in &doc.correspondences {
            let ptr = format!("/correspondences/{name}");
            let source = resolve_set(&c.source, &format!("{ptr}/source"))?;
            let target = resolve_set(&c.target, &format!("{ptr}/target"))?;
            let corr = Correspondence::new(source, target, c.pairs.iter().cloned())
                .map_err(|e| at(ptr.clone(), e))?;
            normalized.correspondences.insert(
                name.clone(),
                CorrespondenceDoc {
                    source: SetRef::Inline(corr.source().iter().cloned().collect()),
                    target: SetRef::Inline(corr.target().iter().cloned().collect()),
                    pairs: corr.pairs().iter().cloned().collect(),
                },
            );
            correspondences.insert(name.clone(), corr);
        }

        let mut bundles = BTreeMap::new();
        for (name, b) in &doc.bundles {
            let ptr = format!("/bundles/{name}");
            let base = FinSet::new(b.base.iter().cloned());
            let fibers: BTreeMap<Label, FinSet> = b
                .fibers
                .iter()
                .map(|(x, els)| (x.clone(), FinSet::new(els.iter().cloned())))
                .collect();
            let trivialization = b.trivialization.as_ref().map(|t| Trivialization {
                typical: FinSet::new(t.typical.iter().cloned()),
                charts: t.charts.clone(),
            });
            let mut bundle = Bundle::new(name.clone(), base, fibers, trivialization)
                .map_err(|e| at(ptr.clone(), e))?;
            if let Some(tn) = &b.base_topology {
                let top = topologies.get(tn).ok_or_else(|| {
                    violation(format!("{ptr}/base_topology"), format!("unknown topology `{tn}`"))
                })?;
                bundle = bundle
                    .with_base_topology(top.clone())
                    .map_err(|e| at(format!("{ptr}/base_topology"), e))?;
            }
            if let Some(tn) = &b.total_topology {
                let top = topologies.get(tn).ok_or_else(|| {
                    violation(format!("{ptr}/total_topology"), format!("unknown topology `{tn}`"))
                })?;
                bundle = bundle
                    .with_total_topology(top.clone())
                    .map_err(|e| at(format!("{ptr}/total_topology"), e))?;
            }
            normalized.bundles.insert(
                name.clone(),
                BundleDoc {
                    base: bundle.base().iter().cloned().collect(),
                    fibers: bundle
                        .fibers()
                        .iter()
                        .map(|(x, f)| (x.clone(), f.iter().cloned().collect()))
                        .collect(),
                    trivialization: bundle.trivialization().map(|t| TrivializationDoc {
                        typical: t.typical.iter().cloned().collect(),
                        charts: t.charts.clone(),
                    }),
                    base_topology: b.base_topology.clone(),
                    total_topology: b.total_topology.clone(),
                },
            );
            bundles.insert(name.clone(), bundle);
        }

        let get_bundle = |n: &str, ptr: &str| -> Result<Bundle> {
            bundles
                .get(n)
                .cloned()
                .ok_or_else(|| violation(ptr.to_string(), format!("unknown bundle `{n}`")))
        };

        let mut fibered = BTreeMap::new();
        for (name, f) in &doc.fibered {
            let ptr = format!("/fibered/{name}");
            if let Some(k) = &f.kind {
                if k != "fibered" {
                    return Err(violation(format!("{ptr}/kind"), "kind must be `fibered`"));
                }
            }
            let source = get_bundle(&f.source, &format!("{ptr}/source"))?;
            let target = get_bundle(&f.target, &format!("{ptr}/target"))?;
            let base = Correspondence::new(
                source.base().clone(),
                target.base().clone(),
                f.base_pairs.iter().cloned(),
            )
            .map_err(|e| at(ptr.clone(), e))?;
            let mut fiber_relations: BTreeMap<(Label, Label), FiberRelation> = BTreeMap::new();
            let mut norm_fibers: BTreeMap<String, Vec<(Label, Label)>> = BTreeMap::new();
            for (key, rel) in &f.fibers {
                let (x, y) = split_pair_key(key, source.base(), target.base(), '|')
                    .ok_or_else(|| {
                        violation(
                            format!("{ptr}/fibers/{key}"),
                            "key does not parse uniquely into a base pair",
                        )
                    })?;
                let rel_set: FiberRelation = rel.iter().cloned().collect();
                norm_fibers.insert(
                    join_key(&[&x, &y], '|'),
                    rel_set.iter().cloned().collect(),
                );
                fiber_relations.insert((x, y), rel_set);
            }
            // base pairs without explicit fibers carry the empty relation
            for (x, y) in base.pairs() {
                fiber_relations
                    .entry((x.clone(), y.clone()))
                    .or_default();
                norm_fibers.entry(join_key(&[x, y], '|')).or_default();
            }
            let fc = FiberedCorrespondence::new(
                name.clone(),
                source.clone(),
                target.clone(),
                base,
                fiber_relations,
            )
            .map_err(|e| at(ptr.clone(), e))?;
            normalized.fibered.insert(
                name.clone(),
                FiberedDoc {
                    kind: Some("fibered".to_string()),
                    source: f.source.clone(),
                    target: f.target.clone(),
                    base_pairs: fc.base_pairs().pairs().iter().cloned().collect(),
                    fibers: norm_fibers,
                },
            );
            fibered.insert(name.clone(), fc);
        }

        let mut reduced = BTreeMap::new();
        for (name, r) in &doc.reduced {
            let ptr = format!("/reduced/{name}");
            if let Some(k) = &r.kind {
                if k != "reduced" {
                    return Err(violation(format!("{ptr}/kind"), "kind must be `reduced`"));
                }
            }
            let source = get_bundle(&r.source, &format!("{ptr}/source"))?;
            let target = get_bundle(&r.target, &format!("{ptr}/target"))?;
            let mut fiber_relations: BTreeMap<Label, FiberRelation> = r
                .fibers
                .iter()
                .map(|(x, rel)| (x.clone(), rel.iter().cloned().collect()))
                .collect();
            let mut domain: BTreeSet<Label> = r.domain.iter().cloned().collect();
            // domain points without explicit fibers carry the empty relation
            for x in &domain {
                fiber_relations.entry(x.clone()).or_default();
            }
            for x in fiber_relations.keys() {
                domain.insert(x.clone());
            }
            let rc = ReducedFiberedCorrespondence::new(
                name.clone(),
                source,
                target,
                domain.iter().cloned().collect(),
                fiber_relations,
            )
            .map_err(|e| at(ptr.clone(), e))?;
            normalized.reduced.insert(
                name.clone(),
                ReducedDoc {
                    kind: Some("reduced".to_string()),
                    source: r.source.clone(),
                    target: r.target.clone(),
                    domain: rc.domain().iter().cloned().collect(),
                    fibers: rc
                        .fiber_relations()
                        .iter()
                        .map(|(x, rel)| (x.clone(), rel.iter().cloned().collect()))
                        .collect(),
                },
            );
            reduced.insert(name.clone(), rc);
        }

        let mut relations = BTreeMap::new();
        for (name, r) in &doc.relations {
            let ptr = format!("/relations/{name}");
            let bundle = get_bundle(&r.bundle, &format!("{ptr}/bundle"))?;
            let mut fiber_tuples: BTreeMap<Label, BTreeSet<Vec<Label>>> = r
                .fibers
                .iter()
                .map(|(x, t)| (x.clone(), t.iter().cloned().collect()))
                .collect();
            for x in bundle.base().iter() {
                fiber_tuples.entry(x.clone()).or_default();
            }
            let rel = FiberedRelation::new(name.clone(), bundle, r.arity, fiber_tuples)
                .map_err(|e| at(ptr.clone(), e))?;
            normalized.relations.insert(
                name.clone(),
                RelationDoc {
                    bundle: r.bundle.clone(),
                    arity: r.arity,
                    fibers: rel
                        .fiber_tuples()
                        .iter()
                        .map(|(x, t)| (x.clone(), t.iter().cloned().collect()))
                        .collect(),
                },
            );
            relations.insert(name.clone(), rel);
        }

        let mut morphisms = BTreeMap::new();
        for (name, m) in &doc.morphisms {
            let ptr = format!("/morphisms/{name}");
            if let Some(k) = &m.kind {
                if k != "morphism" {
                    return Err(violation(format!("{ptr}/kind"), "kind must be `morphism`"));
                }
            }
            let source = get_bundle(&m.source, &format!("{ptr}/source"))?;
            let target = get_bundle(&m.target, &format!("{ptr}/target"))?;
            let morph = FiberedMorphism::new(name.clone(), source, target, m.map.clone())
                .map_err(|e| at(ptr.clone(), e))?;
            normalized.morphisms.insert(
                name.clone(),
                MorphismDoc {
                    kind: Some("morphism".to_string()),
                    source: m.source.clone(),
                    target: m.target.clone(),
                    map: m.map.clone(),
                },
            );
            morphisms.insert(name.clone(), morph);
        }

        let resolve_group_doc = |g: &GroupDoc, ptr: &str| -> Result<FiniteGroup> {
            let elements = FinSet::new(g.elements.iter().cloned());
            let mut table = BTreeMap::new();
            for (key, value) in &g.table {
                let args = split_tuple_key(key, 2, &elements, ',').ok_or_else(|| {
                    violation(
                        format!("{ptr}/table/{key}"),
                        "key does not parse uniquely into two group elements",
                    )
                })?;
                table.insert((args[0].clone(), args[1].clone()), value.clone());
            }
            FiniteGroup::new(elements, table, g.identity.clone())
                .map_err(|e| at(ptr.to_string(), e))
        };

        let group_to_doc = |g: &FiniteGroup| GroupDoc {
            elements: g.elements().iter().cloned().collect(),
            identity: g.identity().clone(),
            table: g
                .elements()
                .iter()
                .flat_map(|a| {
                    g.elements()
                        .iter()
                        .map(move |b| (join_key(&[a, b], ','), g.mul(a, b).clone()))
                })
                .collect(),
        };

        let mut groups = BTreeMap::new();
        for (name, g) in &doc.groups {
            let ptr = format!("/groups/{name}");
            let group = resolve_group_doc(g, &ptr)?;
            normalized.groups.insert(name.clone(), group_to_doc(&group));
            groups.insert(name.clone(), group);
        }

        let mut representations = BTreeMap::new();
        for (name, r) in &doc.representations {
            let ptr = format!("/representations/{name}");
            let group = match &r.group {
                GroupRef::Name(n) => groups.get(n).cloned().ok_or_else(|| {
                    violation(format!("{ptr}/group"), format!("unknown group `{n}`"))
                })?,
                GroupRef::Inline(gd) => resolve_group_doc(gd, &format!("{ptr}/group"))?,
            };
            let space = get_bundle(&r.space, &format!("{ptr}/space"))?;
            let mut action: BTreeMap<Label, BTreeMap<(Label, Label), Label>> = BTreeMap::new();
            let mut norm_action: BTreeMap<Label, BTreeMap<String, Label>> = BTreeMap::new();
            for (x, table) in &r.action {
                let fiber = space
                    .fiber(x)
                    .map_err(|e| at(format!("{ptr}/action/{x}"), e))?;
                let mut parsed = BTreeMap::new();
                let mut norm = BTreeMap::new();
                for (key, value) in table {
                    let (g, e) = split_pair_key(key, group.elements(), fiber, '|')
                        .ok_or_else(|| {
                            violation(
                                format!("{ptr}/action/{x}/{key}"),
                                "key does not parse uniquely into group element and fiber element",
                            )
                        })?;
                    norm.insert(join_key(&[&g, &e], '|'), value.clone());
                    parsed.insert((g, e), value.clone());
                }
                action.insert(x.clone(), parsed);
                norm_action.insert(x.clone(), norm);
            }
            let rep = TstarRepresentation::new(
                name.clone(),
                FiberedGroup {
                    base: space.base().clone(),
                    group: group.clone(),
                },
                space,
                action,
            )
            .map_err(|e| at(ptr.clone(), e))?;
            normalized.representations.insert(
                name.clone(),
                RepresentationDoc {
                    group: GroupRef::Inline(group_to_doc(&group)),
                    space: r.space.clone(),
                    action: norm_action,
                },
            );
            representations.insert(name.clone(), rep);
        }

        let mut towers = BTreeMap::new();
        for (name, t) in &doc.towers {
            let ptr = format!("/towers/{name}");
            let mut levels = Vec::new();
            for (i, level_name) in t.levels.iter().enumerate() {
                levels.push(get_bundle(level_name, &format!("{ptr}/levels/{i}"))?);
            }
            let tower = Tower::new(levels);
            tower.validate().map_err(|e| at(ptr.clone(), e))?;
            normalized
                .towers
                .insert(name.clone(), TowerDoc { levels: t.levels.clone() });
            towers.insert(name.clone(), tower);
        }

        Ok(Universe {
            doc: normalized,
            topologies,
            sets,
            algebras,
            correspondences,
            bundles,
            fibered,
            reduced,
            relations,
            morphisms,
            groups,
            representations,
            towers,
        })
    }
}
