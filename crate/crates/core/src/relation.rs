//! Plain finite correspondences and their algebra: restriction, image,
//! composition, inverse, diagonal, diagram commutativity, continuity, and
//! the homomorphism-correspondence check against finite algebras.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::{FinSet, Label};
use crate::topology::{Filter, FiniteTopology};

/// A subset of `source × target` with named endpoints.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "CorrespondenceDoc", into = "CorrespondenceDoc")]
pub struct Correspondence {
    source: FinSet,
    target: FinSet,
    pairs: BTreeSet<(Label, Label)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CorrespondenceDoc {
    source: Vec<Label>,
    target: Vec<Label>,
    pairs: Vec<(Label, Label)>,
}

impl From<Correspondence> for CorrespondenceDoc {
    fn from(c: Correspondence) -> Self {
        CorrespondenceDoc {
            source: c.source.iter().cloned().collect(),
            target: c.target.iter().cloned().collect(),
            pairs: c.pairs.into_iter().collect(),
        }
    }
}

impl TryFrom<CorrespondenceDoc> for Correspondence {
    type Error = Error;

    fn try_from(doc: CorrespondenceDoc) -> Result<Self> {
        Correspondence::new(
            FinSet::new(doc.source),
            FinSet::new(doc.target),
            doc.pairs,
        )
    }
}

impl Correspondence {
    pub fn new(
        source: FinSet,
        target: FinSet,
        pairs: impl IntoIterator<Item = (Label, Label)>,
    ) -> Result<Self> {
        let pairs: BTreeSet<(Label, Label)> = pairs.into_iter().collect();
        for (a, b) in &pairs {
            if !source.contains(a) {
                return Err(Error::InvalidCorrespondence {
                    reason: format!("pair component `{a}` is not in the source"),
                });
            }
            if !target.contains(b) {
                return Err(Error::InvalidCorrespondence {
                    reason: format!("pair component `{b}` is not in the target"),
                });
            }
        }
        Ok(Correspondence {
            source,
            target,
            pairs,
        })
    }

    pub fn empty(source: FinSet, target: FinSet) -> Self {
        Correspondence {
            source,
            target,
            pairs: BTreeSet::new(),
        }
    }

    pub fn source(&self) -> &FinSet {
        &self.source
    }

    pub fn target(&self) -> &FinSet {
        &self.target
    }

    pub fn pairs(&self) -> &BTreeSet<(Label, Label)> {
        &self.pairs
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.pairs.contains(&(a.to_string(), b.to_string()))
    }

    /// Restriction to `c ⊆ source`: keeps pairs starting in `c` and narrows
    /// the source to `c`.
    pub fn restrict(&self, c: &BTreeSet<Label>) -> Result<Correspondence> {
        self.source.check_subset(c)?;
        Ok(Correspondence {
            source: FinSet::new(c.iter().cloned()),
            target: self.target.clone(),
            pairs: self
                .pairs
                .iter()
                .filter(|(a, _)| c.contains(a))
                .cloned()
                .collect(),
        })
    }

    /// Image of `c ⊆ source`: `{b : (a,b) in pairs, a in c}`.
    pub fn image(&self, c: &BTreeSet<Label>) -> Result<BTreeSet<Label>> {
        self.source.check_subset(c)?;
        Ok(self
            .pairs
            .iter()
            .filter(|(a, _)| c.contains(a))
            .map(|(_, b)| b.clone())
            .collect())
    }

    /// Transposed correspondence.
    pub fn inverse(&self) -> Correspondence {
        Correspondence {
            source: self.target.clone(),
            target: self.source.clone(),
            pairs: self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// True when every source label has at most one partner and every
    /// target label has at most one partner.
    pub fn is_injective_partial_map(&self) -> bool {
        let mut seen_src = BTreeSet::new();
        let mut seen_dst = BTreeSet::new();
        for (a, b) in &self.pairs {
            if !seen_src.insert(a) || !seen_dst.insert(b) {
                return false;
            }
        }
        true
    }

    /// Partner of `a` under a functional correspondence.
    pub fn apply(&self, a: &str) -> Option<&Label> {
        self.pairs
            .iter()
            .find(|(x, _)| x == a)
            .map(|(_, y)| y)
    }
}

/// Identity correspondence on a set.
pub fn diagonal(s: &FinSet) -> Correspondence {
    Correspondence {
        source: s.clone(),
        target: s.clone(),
        pairs: s.iter().map(|l| (l.clone(), l.clone())).collect(),
    }
}

/// Composition `psi ∘ phi`: apply `phi` first. Taken through the
/// intersection of `phi`'s target and `psi`'s source.
pub fn compose(psi: &Correspondence, phi: &Correspondence) -> Correspondence {
    let mut pairs = BTreeSet::new();
    for (a, b) in &phi.pairs {
        for (b2, c) in &psi.pairs {
            if b == b2 {
                pairs.insert((a.clone(), c.clone()));
            }
        }
    }
    Correspondence {
        source: phi.source.clone(),
        target: psi.target.clone(),
        pairs,
    }
}

/// Commutativity of the square
///
/// ```text
///   A --psi--> B
///   |          |
///  phi       sigma
///   |          |
///   v          v
///   C --theta-> D
/// ```
///
/// The image of every subset of A in D must not depend on the way taken.
/// Since images distribute over unions, checking singletons suffices; the
/// contract is the full quantification over subsets.
pub fn square_commutes(
    psi: &Correspondence,
    sigma: &Correspondence,
    phi: &Correspondence,
    theta: &Correspondence,
) -> Result<bool> {
    if psi.source != phi.source {
        return Err(Error::ShapeMismatch {
            reason: "psi and phi must share a source".into(),
        });
    }
    if sigma.source != psi.target {
        return Err(Error::ShapeMismatch {
            reason: "sigma's source must be psi's target".into(),
        });
    }
    if theta.source != phi.target {
        return Err(Error::ShapeMismatch {
            reason: "theta's source must be phi's target".into(),
        });
    }
    if sigma.target != theta.target {
        return Err(Error::ShapeMismatch {
            reason: "sigma and theta must share a target".into(),
        });
    }
    for a in psi.source.iter() {
        let singleton: BTreeSet<Label> = [a.clone()].into();
        let upper = sigma.image(&psi.image(&singleton)?)?;
        let lower = theta.image(&phi.image(&singleton)?)?;
        if upper != lower {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Dense view of a correspondence against two spaces, one target mask per
/// source point. Shared by the continuity and limit checks.
struct DenseRows {
    rows: Vec<u64>,
}

impl DenseRows {
    fn build(
        phi: &Correspondence,
        src: &FiniteTopology,
        dst: &FiniteTopology,
    ) -> Result<DenseRows> {
        if !phi.source.labels().iter().eq(src.points().iter()) {
            return Err(Error::SpaceMismatch {
                space: src.point_set().to_string(),
                label: phi
                    .source
                    .iter()
                    .find(|l| src.index_of(l).is_none())
                    .cloned()
                    .unwrap_or_else(|| "<source/space differ>".into()),
            });
        }
        if !phi.target.labels().iter().eq(dst.points().iter()) {
            return Err(Error::SpaceMismatch {
                space: dst.point_set().to_string(),
                label: phi
                    .target
                    .iter()
                    .find(|l| dst.index_of(l).is_none())
                    .cloned()
                    .unwrap_or_else(|| "<target/space differ>".into()),
            });
        }
        let mut rows = vec![0u64; src.len()];
        for (a, b) in &phi.pairs {
            let i = src.index_of(a).expect("validated above");
            let j = dst.index_of(b).expect("validated above");
            rows[i] |= 1 << j;
        }
        Ok(DenseRows { rows })
    }

    fn image_mask(&self, src_mask: u64) -> u64 {
        let mut out = 0u64;
        let mut m = src_mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            out |= self.rows[i];
            m &= m - 1;
        }
        out
    }
}

/// Continuity of `phi` on the set `c`: for every open `V` containing the
/// image of `c` there is an open `U ⊇ c` whose image lies inside `V`.
pub fn is_continuous_on(
    phi: &Correspondence,
    src: &FiniteTopology,
    dst: &FiniteTopology,
    c: &BTreeSet<Label>,
) -> Result<bool> {
    let rows = DenseRows::build(phi, src, dst)?;
    let c_mask = src.mask_of(c)?;
    let im_c = rows.image_mask(c_mask);
    // image of every open, computed once
    let open_images: Vec<u64> = src
        .opens_masks()
        .iter()
        .map(|&u| rows.image_mask(u))
        .collect();
    for &v in dst.opens_masks() {
        if v & im_c != im_c {
            continue;
        }
        let ok = src
            .opens_masks()
            .iter()
            .zip(&open_images)
            .any(|(&u, &im)| u & c_mask == c_mask && im & !v == 0);
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Global continuity: `phi` is continuous on every subset of its source,
/// equivalently on every singleton.
pub fn is_continuous(
    phi: &Correspondence,
    src: &FiniteTopology,
    dst: &FiniteTopology,
) -> Result<bool> {
    let rows = DenseRows::build(phi, src, dst)?;
    for &v in dst.opens_masks() {
        // points whose image fits in V must be covered by opens whose image fits in V
        let mut covered = 0u64;
        for &u in src.opens_masks() {
            if rows.image_mask(u) & !v == 0 {
                covered |= u;
            }
        }
        for (i, &row) in rows.rows.iter().enumerate() {
            if row & !v == 0 && covered & (1 << i) == 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The characterization of a correspondence limit: `candidate` is a limit
/// of `phi` along `f` iff every neighborhood `V` of `candidate` admits a
/// filter member `M` with `image(phi, M) ⊆ V`.
pub fn limit_characterization(
    phi: &Correspondence,
    f: &Filter,
    dst: &FiniteTopology,
    candidate: &BTreeSet<Label>,
) -> Result<bool> {
    if candidate.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let rows = DenseRows::build(phi, f.space(), dst)?;
    let cand = dst.mask_of(candidate)?;
    // every neighborhood contains an open one, so open V suffice
    for &v in dst.opens_masks() {
        if v & cand != cand {
            continue;
        }
        if !f
            .member_masks()
            .iter()
            .any(|&m| rows.image_mask(m) & !v == 0)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Limit of a correspondence with respect to a filter.
///
/// Evaluates the neighborhood characterization and independently re-derives
/// the answer from the definition: the images of the filter members form a
/// filter base, the generated filter is materialized, and its convergence
/// to the candidate must agree with the characterization. Errors with
/// `EmptyImageBase` when some filter member has an empty image, since the
/// image family is then not a filter base.
pub fn limit_of_correspondence(
    phi: &Correspondence,
    f: &Filter,
    dst: &FiniteTopology,
    candidate: &BTreeSet<Label>,
) -> Result<bool> {
    if candidate.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let rows = DenseRows::build(phi, f.space(), dst)?;
    let cand = dst.mask_of(candidate)?;
    let mut image_masks: Vec<u64> = Vec::with_capacity(f.member_masks().len());
    for &m in f.member_masks() {
        let im = rows.image_mask(m);
        if im == 0 {
            return Err(Error::EmptyImageBase {
                member: f.space().mask_labels(m).into_iter().collect(),
            });
        }
        image_masks.push(im);
    }
    image_masks.sort_unstable();
    image_masks.dedup();
    // the images form a filter base: any two contain a common member
    for (i, &a) in image_masks.iter().enumerate() {
        for &b in &image_masks[i..] {
            let meet = a & b;
            if !image_masks.iter().any(|&s| s & meet == s) {
                return Err(Error::InvalidFilterBase {
                    reason: "image family lost the common-member property".into(),
                });
            }
        }
    }
    // definition route: the generated filter refines the candidate's
    // neighborhood filter
    let mut generated: BTreeSet<u64> = BTreeSet::new();
    for &s in &image_masks {
        for sup in crate::topology::supersets_of_mask(s, dst.len(), crate::set::DEFAULT_MAX_ENUM)? {
            generated.insert(sup);
        }
    }
    let by_definition = dst
        .opens_masks()
        .iter()
        .filter(|&&v| v & cand == cand)
        .all(|v| generated.contains(v));
    // characterization route: every open neighborhood admits a member
    // whose image it contains
    let member_images: Vec<u64> = f
        .member_masks()
        .iter()
        .map(|&m| rows.image_mask(m))
        .collect();
    let by_characterization = dst
        .opens_masks()
        .iter()
        .filter(|&&v| v & cand == cand)
        .all(|&v| member_images.iter().any(|&im| im & !v == 0));
    assert_eq!(
        by_definition, by_characterization,
        "limit characterization and filter-base convergence disagree"
    );
    Ok(by_characterization)
}

/// An operation table: a total map `carrier^arity -> carrier`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraOp {
    pub arity: usize,
    pub table: BTreeMap<Vec<Label>, Label>,
}

/// A finite algebra: a carrier set with named finitary operations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AlgebraDoc", into = "AlgebraDoc")]
pub struct FiniteAlgebra {
    carrier: FinSet,
    operations: BTreeMap<String, AlgebraOp>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AlgebraDoc {
    carrier: Vec<Label>,
    ops: BTreeMap<String, AlgebraOp>,
}

impl From<FiniteAlgebra> for AlgebraDoc {
    fn from(a: FiniteAlgebra) -> Self {
        AlgebraDoc {
            carrier: a.carrier.iter().cloned().collect(),
            ops: a.operations,
        }
    }
}

impl TryFrom<AlgebraDoc> for FiniteAlgebra {
    type Error = Error;

    fn try_from(doc: AlgebraDoc) -> Result<Self> {
        FiniteAlgebra::new(FinSet::new(doc.carrier), doc.ops)
    }
}

impl FiniteAlgebra {
    pub fn new(carrier: FinSet, operations: BTreeMap<String, AlgebraOp>) -> Result<Self> {
        for (name, op) in &operations {
            let arity = u32::try_from(op.arity)
                .ok()
                .filter(|&a| a <= 32)
                .ok_or_else(|| Error::InvalidAlgebra {
                    reason: format!("operation `{name}` has an unreasonable arity {}", op.arity),
                })?;
            let expected = carrier.len().checked_pow(arity).ok_or_else(|| {
                Error::InvalidAlgebra {
                    reason: format!("operation `{name}` has an impossibly large table"),
                }
            })?;
            if op.table.len() != expected {
                return Err(Error::InvalidAlgebra {
                    reason: format!(
                        "operation `{name}` table has {} entries, expected {expected}",
                        op.table.len()
                    ),
                });
            }
            for (args, value) in &op.table {
                if args.len() != op.arity {
                    return Err(Error::InvalidAlgebra {
                        reason: format!(
                            "operation `{name}` key {args:?} does not match arity {}",
                            op.arity
                        ),
                    });
                }
                if args.iter().any(|a| !carrier.contains(a)) || !carrier.contains(value) {
                    return Err(Error::InvalidAlgebra {
                        reason: format!("operation `{name}` is not closed over the carrier"),
                    });
                }
            }
        }
        Ok(FiniteAlgebra {
            carrier,
            operations,
        })
    }

    pub fn carrier(&self) -> &FinSet {
        &self.carrier
    }

    pub fn operations(&self) -> &BTreeMap<String, AlgebraOp> {
        &self.operations
    }

    pub fn apply(&self, op: &str, args: &[Label]) -> Option<&Label> {
        self.operations.get(op)?.table.get(args)
    }
}

/// Homomorphism-correspondence check: for every shared n-ary operation and
/// every choice of related argument pairs, the operation results are again
/// related.
pub fn is_homomorphism_correspondence(
    phi: &Correspondence,
    alg_a: &FiniteAlgebra,
    alg_b: &FiniteAlgebra,
) -> Result<bool> {
    if phi.source() != alg_a.carrier() {
        return Err(Error::SignatureMismatch {
            reason: "correspondence source differs from the first carrier".into(),
        });
    }
    if phi.target() != alg_b.carrier() {
        return Err(Error::SignatureMismatch {
            reason: "correspondence target differs from the second carrier".into(),
        });
    }
    let names_a: BTreeSet<&String> = alg_a.operations.keys().collect();
    let names_b: BTreeSet<&String> = alg_b.operations.keys().collect();
    if names_a != names_b {
        return Err(Error::SignatureMismatch {
            reason: "operation names differ".into(),
        });
    }
    let pairs: Vec<&(Label, Label)> = phi.pairs.iter().collect();
    for (name, op_a) in &alg_a.operations {
        let op_b = &alg_b.operations[name];
        if op_a.arity != op_b.arity {
            return Err(Error::SignatureMismatch {
                reason: format!(
                    "operation `{name}` has arities {} and {}",
                    op_a.arity, op_b.arity
                ),
            });
        }
        let n = op_a.arity;
        if n > 0 && pairs.is_empty() {
            continue;
        }
        for tuple in tuples(pairs.len(), n) {
            let args_a: Vec<Label> = tuple.iter().map(|&i| pairs[i].0.clone()).collect();
            let args_b: Vec<Label> = tuple.iter().map(|&i| pairs[i].1.clone()).collect();
            let ra = op_a.table[&args_a].clone();
            let rb = op_b.table[&args_b].clone();
            if !phi.pairs.contains(&(ra, rb)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All length-`n` index tuples over `0..k`, in lexicographic order.
/// For `n = 0` this is the single empty tuple.
pub(crate) fn tuples(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * k);
        for t in &out {
            for i in 0..k {
                let mut t2 = t.clone();
                t2.push(i);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}
