//! Batch command dispatch over a loaded universe, producing deterministic
//! JSON reports.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use fibra_core::action::{orbit_quotient_bounded, Tower};
use fibra_core::bundle::{is_subbundle, Bundle};
use fibra_core::error::Error;
use fibra_core::fibered::{fibered_compose, fibered_inverse, image_of_subbundle, FiberedCorrespondence};
use fibra_core::quotient::{factorize_bounded, quotient_bundle_bounded, FiberedMorphism, QuotientResult};
use fibra_core::reduced::{
    check_property, classify, reduced_compose, reduced_inverse, sections_correspondence_bounded,
    RelationProperty, ReducedFiberedCorrespondence,
};
use fibra_core::relation::{compose, is_continuous, is_continuous_on, Correspondence};
use fibra_core::set::DEFAULT_MAX_ENUM;
use fibra_core::universe::{ObjectKind, Universe};

/// One batch command against a universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Check { object: String, property: String },
    Compose { f: String, g: String },
    Inverse { f: String },
    Image { f: String, sub: String },
    Quotient { bundle: String, equiv: String },
    Factorize { morphism: String },
    Orbits { rep: String },
    Continuity {
        corr: String,
        src_top: String,
        dst_top: String,
        on: Option<String>,
    },
    Sections { reduced: String },
    Classify { reduced: String },
    Tower { name: String },
}

impl Command {
    /// The command echoed into reports, as its argument vector.
    pub fn echo(&self) -> Vec<String> {
        match self {
            Command::Check { object, property } => vec![
                "check".into(),
                object.clone(),
                "--property".into(),
                property.clone(),
            ],
            Command::Compose { f, g } => vec!["compose".into(), f.clone(), g.clone()],
            Command::Inverse { f } => vec!["inverse".into(), f.clone()],
            Command::Image { f, sub } => vec!["image".into(), f.clone(), sub.clone()],
            Command::Quotient { bundle, equiv } => {
                vec!["quotient".into(), bundle.clone(), equiv.clone()]
            }
            Command::Factorize { morphism } => vec!["factorize".into(), morphism.clone()],
            Command::Orbits { rep } => vec!["orbits".into(), rep.clone()],
            Command::Continuity {
                corr,
                src_top,
                dst_top,
                on,
            } => {
                let mut v = vec![
                    "continuity".into(),
                    corr.clone(),
                    src_top.clone(),
                    dst_top.clone(),
                ];
                if let Some(on) = on {
                    v.push("--on".into());
                    v.push(on.clone());
                }
                v
            }
            Command::Sections { reduced } => vec!["sections".into(), reduced.clone()],
            Command::Classify { reduced } => vec!["classify".into(), reduced.clone()],
            Command::Tower { name } => vec!["tower".into(), name.clone()],
        }
    }
}

/// Outcome of one command: the echo, a status, and either a value or an
/// error. Serialization is canonical, so identical inputs give
/// byte-identical reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub command: Vec<String>,
    pub outcome: Result<Value, Error>,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn to_value(&self) -> Value {
        match &self.outcome {
            Ok(v) => json!({
                "command": self.command,
                "status": "ok",
                "outcome": v,
            }),
            Err(e) => json!({
                "command": self.command,
                "status": "error",
                "error": {"code": e.code(), "message": e.to_string()},
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value())
            .expect("reports always serialize");
        s.push('\n');
        s
    }
}

fn labels_value<'a>(labels: impl Iterator<Item = &'a String>) -> Value {
    Value::Array(labels.map(|l| Value::String(l.clone())).collect())
}

fn pairs_value(pairs: &std::collections::BTreeSet<(String, String)>) -> Value {
    Value::Array(
        pairs
            .iter()
            .map(|(a, b)| json!([a, b]))
            .collect(),
    )
}

fn correspondence_value(c: &Correspondence) -> Value {
    json!({
        "source": labels_value(c.source().iter()),
        "target": labels_value(c.target().iter()),
        "pairs": pairs_value(c.pairs()),
    })
}

fn topology_value(t: &fibra_core::topology::FiniteTopology) -> Value {
    json!({
        "points": t.points(),
        "opens": t.opens().iter().map(|o| o.iter().cloned().collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn bundle_value(b: &Bundle) -> Value {
    let mut m = Map::new();
    m.insert("base".into(), labels_value(b.base().iter()));
    m.insert(
        "fibers".into(),
        Value::Object(
            b.fibers()
                .iter()
                .map(|(x, f)| (x.clone(), labels_value(f.iter())))
                .collect(),
        ),
    );
    if let Some(t) = b.trivialization() {
        m.insert(
            "trivialization".into(),
            json!({
                "typical": labels_value(t.typical.iter()),
                "charts": t.charts,
            }),
        );
    }
    if let Some(t) = b.base_topology() {
        m.insert("base_topology".into(), topology_value(t));
    }
    if let Some(t) = b.total_topology() {
        m.insert("total_topology".into(), topology_value(t));
    }
    Value::Object(m)
}

fn fibered_value(f: &FiberedCorrespondence) -> Value {
    json!({
        "kind": "fibered",
        "source": bundle_value(f.source()),
        "target": bundle_value(f.target()),
        "base_pairs": pairs_value(f.base_pairs().pairs()),
        "fibers": Value::Object(
            f.fiber_relations()
                .iter()
                .map(|((x, y), rel)| (format!("{x}|{y}"), pairs_value(rel)))
                .collect(),
        ),
    })
}

fn reduced_value(r: &ReducedFiberedCorrespondence) -> Value {
    json!({
        "kind": "reduced",
        "source": bundle_value(r.source()),
        "target": bundle_value(r.target()),
        "domain": labels_value(r.domain().iter()),
        "fibers": Value::Object(
            r.fiber_relations()
                .iter()
                .map(|(x, rel)| (x.clone(), pairs_value(rel)))
                .collect(),
        ),
    })
}

fn morphism_value(m: &FiberedMorphism) -> Value {
    json!({
        "kind": "morphism",
        "source": bundle_value(m.source()),
        "target": bundle_value(m.target()),
        "map": m.maps(),
    })
}

fn quotient_value(q: &QuotientResult) -> Value {
    let mut m = Map::new();
    m.insert("quotient".into(), bundle_value(&q.quotient));
    m.insert("nat".into(), json!(q.nat.maps()));
    m.insert(
        "classes".into(),
        json!(q
            .class_map
            .iter()
            .map(|(x, classes)| (
                x.clone(),
                classes
                    .iter()
                    .map(|(label, members)| (
                        label.clone(),
                        members.iter().cloned().collect::<Vec<_>>()
                    ))
                    .collect::<BTreeMap<_, _>>()
            ))
            .collect::<BTreeMap<_, _>>()),
    );
    if let Some(t) = &q.quotient_topology {
        m.insert("quotient_topology".into(), topology_value(t));
    }
    Value::Object(m)
}

fn tower_value(t: &Tower) -> Value {
    json!({
        "height": t.height(),
        "levels": t
            .levels()
            .iter()
            .map(|b| json!({
                "name": b.name(),
                "base_size": b.base().len(),
                "total_size": b.total_size(),
            }))
            .collect::<Vec<_>>(),
        "projection_to_base": if t.height() > 0 {
            json!(t.project(t.height(), 0).ok())
        } else {
            Value::Null
        },
    })
}

/// Runs one command against a universe. `limit` bounds every enumeration.
pub fn run(universe: &Universe, cmd: &Command, limit: u64) -> Report {
    Report {
        command: cmd.echo(),
        outcome: dispatch(universe, cmd, limit),
    }
}

/// Enumeration bound from the environment, `FIBRA_MAX_ENUM` overriding the
/// default.
pub fn enum_limit_from_env() -> u64 {
    std::env::var("FIBRA_MAX_ENUM")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_MAX_ENUM)
}

fn dispatch(u: &Universe, cmd: &Command, limit: u64) -> Result<Value, Error> {
    match cmd {
        Command::Check { object, property } => check(u, object, property),
        Command::Compose { f, g } => compose_cmd(u, f, g),
        Command::Inverse { f } => inverse_cmd(u, f),
        Command::Image { f, sub } => image_cmd(u, f, sub),
        Command::Quotient { bundle, equiv } => {
            let b = u
                .bundles
                .get(bundle)
                .ok_or_else(|| Error::UnknownObject { name: bundle.clone() })?;
            let s = u
                .reduced
                .get(equiv)
                .ok_or_else(|| Error::UnknownObject { name: equiv.clone() })?;
            let q = quotient_bundle_bounded(b, s, limit)?;
            Ok(quotient_value(&q))
        }
        Command::Factorize { morphism } => {
            let f = u
                .morphisms
                .get(morphism)
                .ok_or_else(|| Error::UnknownObject { name: morphism.clone() })?;
            let fact = factorize_bounded(f, limit)?;
            Ok(json!({
                "nat": morphism_value(&fact.nat),
                "iso": morphism_value(&fact.iso),
                "incl": morphism_value(&fact.incl),
                "image": bundle_value(&fact.image),
                "quotient": quotient_value(&fact.quotient),
            }))
        }
        Command::Orbits { rep } => {
            let r = u
                .representations
                .get(rep)
                .ok_or_else(|| Error::UnknownObject { name: rep.clone() })?;
            let oq = orbit_quotient_bounded(r, limit)?;
            Ok(json!({
                "free": oq.free,
                "quotient": quotient_value(&oq.quotient),
                "level2": bundle_value(&oq.level2),
                "tower": tower_value(&oq.tower),
                "degenerate": oq
                    .degenerate
                    .iter()
                    .map(|d| json!({
                        "point": d.point,
                        "class": d.class,
                        "size": d.size,
                        "expected": d.expected,
                    }))
                    .collect::<Vec<_>>(),
            }))
        }
        Command::Continuity {
            corr,
            src_top,
            dst_top,
            on,
        } => {
            let phi = u
                .correspondences
                .get(corr)
                .ok_or_else(|| Error::UnknownObject { name: corr.clone() })?;
            let src = u
                .topologies
                .get(src_top)
                .ok_or_else(|| Error::UnknownObject { name: src_top.clone() })?;
            let dst = u
                .topologies
                .get(dst_top)
                .ok_or_else(|| Error::UnknownObject { name: dst_top.clone() })?;
            match on {
                None => Ok(json!({"continuous": is_continuous(phi, src, dst)?})),
                Some(set_name) => {
                    let c = u
                        .sets
                        .get(set_name)
                        .ok_or_else(|| Error::UnknownObject { name: set_name.clone() })?;
                    let answer = is_continuous_on(phi, src, dst, c.labels())?;
                    Ok(json!({
                        "continuous": answer,
                        "on": labels_value(c.iter()),
                    }))
                }
            }
        }
        Command::Sections { reduced } => {
            let r = u
                .reduced
                .get(reduced)
                .ok_or_else(|| Error::UnknownObject { name: reduced.clone() })?;
            let corr = sections_correspondence_bounded(r, limit)?;
            Ok(correspondence_value(&corr))
        }
        Command::Classify { reduced } => {
            let r = u
                .reduced
                .get(reduced)
                .ok_or_else(|| Error::UnknownObject { name: reduced.clone() })?;
            let c = classify(r)?;
            Ok(json!({
                "flags": c.flags(),
                "transitive": c.transitive,
                "symmetric": c.symmetric,
                "antisymmetric": c.antisymmetric,
                "reflexive": c.reflexive,
                "preordering": c.preordering,
                "ordering": c.ordering,
                "equivalence": c.equivalence,
            }))
        }
        Command::Tower { name } => {
            let t = u
                .towers
                .get(name)
                .ok_or_else(|| Error::UnknownObject { name: name.clone() })?;
            t.validate()?;
            Ok(tower_value(t))
        }
    }
}

fn check(u: &Universe, object: &str, property: &str) -> Result<Value, Error> {
    let kind = u.kind_among(
        object,
        &[
            ObjectKind::Reduced,
            ObjectKind::Representation,
            ObjectKind::Fibered,
        ],
    )?;
    match kind {
        ObjectKind::Reduced => {
            let r = &u.reduced[object];
            let prop = RelationProperty::parse(property).ok_or_else(|| Error::BadOperand {
                name: object.to_string(),
                kind: "reduced".into(),
                reason: format!(
                    "unknown property `{property}`; expected transitive, symmetric, antisymmetric, or reflexive"
                ),
            })?;
            let verdict = check_property(r, prop)?;
            Ok(json!({
                "property": prop.name(),
                "holds": verdict.holds,
                "counterexample": verdict.counterexample.map(|c| json!({
                    "point": c.point,
                    "witness": c.witness,
                })),
            }))
        }
        ObjectKind::Representation => {
            if property != "free" {
                return Err(Error::BadOperand {
                    name: object.to_string(),
                    kind: "representation".into(),
                    reason: format!("unknown property `{property}`; expected free"),
                });
            }
            Ok(json!({
                "property": "free",
                "holds": fibra_core::action::is_free(&u.representations[object]),
            }))
        }
        ObjectKind::Fibered => {
            if property != "injective-base" {
                return Err(Error::BadOperand {
                    name: object.to_string(),
                    kind: "fibered".into(),
                    reason: format!("unknown property `{property}`; expected injective-base"),
                });
            }
            Ok(json!({
                "property": "injective-base",
                "holds": u.fibered[object].base_is_injective_map(),
            }))
        }
        _ => unreachable!("kind_among restricted the candidates"),
    }
}

fn compose_cmd(u: &Universe, f: &str, g: &str) -> Result<Value, Error> {
    let kinds = [
        ObjectKind::Correspondence,
        ObjectKind::Fibered,
        ObjectKind::Reduced,
    ];
    let kf = u.kind_among(f, &kinds)?;
    let kg = u.kind_among(g, &kinds)?;
    if kf != kg {
        return Err(Error::BadOperand {
            name: g.to_string(),
            kind: kg.name().into(),
            reason: format!("cannot compose a {} with a {}", kf.name(), kg.name()),
        });
    }
    match kf {
        ObjectKind::Correspondence => Ok(correspondence_value(&compose(
            &u.correspondences[f],
            &u.correspondences[g],
        ))),
        ObjectKind::Fibered => Ok(fibered_value(&fibered_compose(
            &u.fibered[f],
            &u.fibered[g],
        )?)),
        ObjectKind::Reduced => Ok(reduced_value(&reduced_compose(
            &u.reduced[f],
            &u.reduced[g],
        )?)),
        _ => unreachable!(),
    }
}

fn inverse_cmd(u: &Universe, f: &str) -> Result<Value, Error> {
    let kind = u.kind_among(
        f,
        &[
            ObjectKind::Correspondence,
            ObjectKind::Fibered,
            ObjectKind::Reduced,
        ],
    )?;
    match kind {
        ObjectKind::Correspondence => Ok(correspondence_value(&u.correspondences[f].inverse())),
        ObjectKind::Fibered => Ok(fibered_value(&fibered_inverse(&u.fibered[f])?)),
        ObjectKind::Reduced => Ok(reduced_value(&reduced_inverse(&u.reduced[f]))),
        _ => unreachable!(),
    }
}

fn image_cmd(u: &Universe, f: &str, sub: &str) -> Result<Value, Error> {
    let kind = u.kind_among(f, &[ObjectKind::Correspondence, ObjectKind::Fibered])?;
    match kind {
        ObjectKind::Correspondence => {
            let c = u
                .sets
                .get(sub)
                .ok_or_else(|| Error::UnknownObject { name: sub.to_string() })?;
            let image = u.correspondences[f].image(c.labels())?;
            Ok(json!({"image": image.iter().cloned().collect::<Vec<_>>()}))
        }
        ObjectKind::Fibered => {
            let c = u
                .bundles
                .get(sub)
                .ok_or_else(|| Error::UnknownObject { name: sub.to_string() })?;
            let fc = &u.fibered[f];
            let witness = is_subbundle(c, fc.source())?;
            let (image, _) = image_of_subbundle(fc, c, &witness)?;
            Ok(bundle_value(&image))
        }
        _ => unreachable!(),
    }
}
