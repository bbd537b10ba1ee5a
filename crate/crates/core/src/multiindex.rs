//! ANOVA sets, component multi-index sets and the ordered catalogs that fix
//! the stochastic block layout of the Galerkin system.
//!
//! Dimension labels of an [`AnovaSet`] are 1-based (`{1, …, N}`), matching
//! the usual notation; a [`MultiIndex`] stores degrees densely with slot
//! `t − 1` holding the degree of variable `t`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial degrees per random variable; identifies one gPC basis function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(degrees: Vec<u32>) -> Self {
        MultiIndex(degrees)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }

    /// Labels (1-based) of the variables with nonzero degree.
    pub fn support(&self) -> AnovaSet {
        AnovaSet(self.0.iter().enumerate().filter(|(_, &d)| d != 0).map(|(t, _)| t + 1).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// A strictly increasing subset of `{1, …, N}`; the empty set is the
/// order-0 (mean) term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnovaSet(Vec<usize>);

impl AnovaSet {
    /// Builds a set from labels in any order; rejects duplicates and label 0.
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.first() == Some(&0) {
            return Err(Error::Input("ANOVA set labels are 1-based".into()));
        }
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input(format!("duplicate label in {members:?}")));
        }
        Ok(AnovaSet(members))
    }

    pub fn empty() -> Self {
        AnovaSet(Vec::new())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, label: usize) -> bool {
        self.0.binary_search(&label).is_ok()
    }

    fn max_label(&self) -> usize {
        self.0.last().copied().unwrap_or(0)
    }
}

impl fmt::Display for AnovaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "}}")
    }
}

/// Binomial coefficient in `u128`; saturates instead of overflowing.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// All subsets of `{1, …, dim}` with `order` elements, lexicographically.
pub fn enumerate_anova_sets(order: usize, dim: usize) -> Result<Vec<AnovaSet>> {
    if order > dim {
        return Err(Error::Domain(format!("order {order} exceeds dimension {dim}")));
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (1..=order).collect();
    loop {
        out.push(AnovaSet(current.clone()));
        // advance to the next combination
        let mut i = order;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if current[i] < dim - (order - 1 - i) {
                current[i] += 1;
                for j in i + 1..order {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Multi-indices supported exactly on `set` with total degree at most
/// `degree`, in graded-lexicographic order. Empty when `|set| > degree`.
pub fn component_multiindices(set: &AnovaSet, degree: u32, dim: usize) -> Vec<MultiIndex> {
    if set.is_empty() {
        return vec![MultiIndex::zero(dim)];
    }
    let k = set.order() as u32;
    if k > degree || set.max_label() > dim {
        return Vec::new();
    }
    let slack = degree - k;
    let mut out = Vec::new();
    // extra degree e_t ≥ 0 on top of the mandatory 1, grouped by total
    for total in 0..=slack {
        let mut extras = vec![0u32; set.order()];
        push_compositions(&mut extras, 0, total, &mut |e: &[u32]| {
            let mut degrees = vec![0u32; dim];
            for (&t, &x) in set.members().iter().zip(e) {
                degrees[t - 1] = 1 + x;
            }
            out.push(MultiIndex(degrees));
        });
    }
    out
}

/// Visits every composition of `remaining` into `buf[pos..]`, with later
/// slots varying fastest in reverse, giving ascending lexicographic order.
fn push_compositions(buf: &mut [u32], pos: usize, remaining: u32, visit: &mut dyn FnMut(&[u32])) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        visit(buf);
        return;
    }
    for v in 0..=remaining {
        buf[pos] = v;
        push_compositions(buf, pos + 1, remaining - v, visit);
    }
}

/// Ordered collection of multi-indices defining the stochastic block layout.
///
/// Entry 0 is the zero index; the remaining entries are grouped by ANOVA set
/// (order ascending, then lexicographic), each group in graded-lex order.
#[derive(Debug, Clone)]
pub struct IndexCatalog {
    dim: usize,
    degree: u32,
    entries: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
    groups: Vec<(AnovaSet, Range<usize>)>,
}

impl PartialEq for IndexCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.degree == other.degree
            && self.entries == other.entries
            && self.groups == other.groups
    }
}

impl IndexCatalog {
    /// Builds the catalog for active sets `active[j]` of order `j + 1`.
    pub fn build(active: &[Vec<AnovaSet>], degree: u32, dim: usize) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut ordered: Vec<&AnovaSet> = Vec::new();
        for (j, sets) in active.iter().enumerate() {
            for s in sets {
                if s.order() != j + 1 {
                    return Err(Error::Input(format!("set {s} listed among order-{} sets", j + 1)));
                }
                if s.max_label() > dim {
                    return Err(Error::Input(format!("set {s} exceeds dimension {dim}")));
                }
                if !seen.insert(s) {
                    return Err(Error::Input(format!("duplicate ANOVA set {s}")));
                }
                ordered.push(s);
            }
        }
        ordered.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.cmp(b)));

        let mut entries = vec![MultiIndex::zero(dim)];
        let mut groups = vec![(AnovaSet::empty(), 0..1)];
        for s in ordered {
            let idx = component_multiindices(s, degree, dim);
            let start = entries.len();
            entries.extend(idx);
            groups.push((s.clone(), start..entries.len()));
        }
        let position = entries.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Ok(IndexCatalog { dim, degree, entries, position, groups })
    }

    /// The full total-degree space: every set of every order.
    pub fn full(dim: usize, degree: u32) -> Result<Self> {
        let active =
            (1..=dim.min(degree as usize)).map(|k| enumerate_anova_sets(k, dim)).collect::<Result<Vec<_>>>()?;
        Self::build(&active, degree, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[MultiIndex] {
        &self.entries
    }

    pub fn get(&self, slot: usize) -> Option<&MultiIndex> {
        self.entries.get(slot)
    }

    pub fn position(&self, index: &MultiIndex) -> Option<usize> {
        self.position.get(index).copied()
    }

    /// ANOVA groups in catalog order, including the leading `∅` group.
    pub fn groups(&self) -> &[(AnovaSet, Range<usize>)] {
        &self.groups
    }

    /// Catalog slots belonging to `set`, if the set is present.
    pub fn slots_of(&self, set: &AnovaSet) -> Option<Range<usize>> {
        self.groups.iter().find(|(s, _)| s == set).map(|(_, r)| r.clone())
    }

    pub fn max_degree_per_dim(&self) -> u32 {
        self.entries.iter().flat_map(|m| m.degrees().iter().copied()).max().unwrap_or(0)
    }

    pub fn to_document(&self) -> CatalogDocument {
        CatalogDocument {
            n: self.dim,
            p: self.degree,
            orders: self
                .groups
                .iter()
                .map(|(s, r)| CatalogGroup {
                    set: s.members().to_vec(),
                    indices: self.entries[r.clone()].iter().map(|m| m.degrees().to_vec()).collect(),
                })
                .collect(),
        }
    }

    /// Rebuilds a catalog from its JSON document, checking that every group
    /// holds exactly the indices the ordering rule would generate.
    pub fn from_document(doc: &CatalogDocument) -> Result<Self> {
        let mut active: Vec<Vec<AnovaSet>> = Vec::new();
        for g in &doc.orders {
            let set = AnovaSet::new(g.set.clone())?;
            if set.is_empty() {
                continue;
            }
            while active.len() < set.order() {
                active.push(Vec::new());
            }
            active[set.order() - 1].push(set);
        }
        let cat = Self::build(&active, doc.p, doc.n)?;
        if &cat.to_document() != doc {
            return Err(Error::Input("catalog document does not follow the canonical ordering".into()));
        }
        Ok(cat)
    }
}

/// JSON form: `{ "N": …, "p": …, "orders": [ {"set": […], "indices": [[…], …]}, … ] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogDocument {
    #[serde(rename = "N")]
    pub n: usize,
    pub p: u32,
    pub orders: Vec<CatalogGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogGroup {
    pub set: Vec<usize>,
    pub indices: Vec<Vec<u32>>,
}

/// Sets of order `k + 1` all of whose order-`k` subsets are in `retained`.
pub fn admissible_next(retained: &[AnovaSet], dim: usize) -> Vec<AnovaSet> {
    let lookup: HashSet<&AnovaSet> = retained.iter().collect();
    let mut out = Vec::new();
    for s in retained {
        // each candidate is generated once, from its subset without the largest label
        for t in s.max_label() + 1..=dim {
            let mut members = s.members().to_vec();
            members.push(t);
            let all_retained = (0..members.len()).all(|drop| {
                let sub: Vec<usize> = members.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &m)| m).collect();
                lookup.contains(&AnovaSet(sub))
            });
            if all_retained {
                out.push(AnovaSet(members));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
