//! Transfer systems on the subgroup box `[n] x [m]`.
//!
//! A transfer system is a reflexive, transitive relation refining inclusion
//! and closed under restriction: whenever `x -> y` and `w <= y`, also
//! `meet(x, w) -> w`. Conjugation closure is vacuous for abelian groups.
//!
//! Edges are stored densely: bit `i * S + j` is set when the `i`-th subgroup
//! transfers to the `j`-th one, `S = (n+1)(m+1)` and indices follow
//! [`CyclicOrder::all_subgroups`]. Systems are ordered by their order and
//! then by this bitmask read as an unsigned integer.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CyclicOrder, Subgroup};

/// Subset search is used up to this many non-reflexive comparable pairs.
pub const SUBSET_SEARCH_MAX_PAIRS: usize = 12;

/// Upper bound on the number of systems the recursive enumerator will hold.
pub const ENUMERATION_LIMIT: usize = 1_000_000;

/// The first axiom a candidate relation fails, with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// An edge `src -> dst` with `src` not contained in `dst`.
    Orientation {
        src: Subgroup,
        dst: Subgroup,
    },
    Reflexivity {
        x: Subgroup,
    },
    /// `x -> y` and `y -> z` are present but `x -> z` is not.
    Transitivity {
        x: Subgroup,
        y: Subgroup,
        z: Subgroup,
    },
    /// `src -> dst` and `w <= dst` but `meet(src, w) -> w` is missing.
    Restriction {
        src: Subgroup,
        dst: Subgroup,
        w: Subgroup,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Orientation { src, dst } => {
                write!(f, "orientation violation: {src} -> {dst} but {src} is not below {dst}")
            }
            Violation::Reflexivity { x } => {
                write!(f, "closure violation (reflexivity): {x} -> {x} missing")
            }
            Violation::Transitivity { x, y, z } => write!(
                f,
                "closure violation (transitivity): {x} -> {y} -> {z} but {x} -> {z} missing"
            ),
            Violation::Restriction { src, dst, w } => write!(
                f,
                "closure violation (restriction): {src} -> {dst} restricted along {w} requires {} -> {w}",
                src.meet(*w)
            ),
        }
    }
}

impl std::error::Error for Violation {}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TransferSystem {
    order: CyclicOrder,
    bits: Vec<u64>,
}

impl fmt::Debug for TransferSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransferSystem")
            .field("order", &self.order)
            .field("edges", &self.nontrivial_edges())
            .finish()
    }
}

impl PartialOrd for TransferSystem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TransferSystem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order
            .cmp(&other.order)
            .then_with(|| self.bits.len().cmp(&other.bits.len()))
            .then_with(|| self.bits.iter().rev().cmp(other.bits.iter().rev()))
    }
}

fn word_count(size: usize) -> usize {
    (size * size).div_ceil(64).max(1)
}

/// Dense bit matrix over subgroup indices; the working representation for
/// closure and validation.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Relation {
    size: usize,
    bits: Vec<u64>,
}

impl Relation {
    fn empty(size: usize) -> Self {
        Relation {
            size,
            bits: vec![0; word_count(size)],
        }
    }

    fn identities(size: usize) -> Self {
        let mut r = Relation::empty(size);
        for i in 0..size {
            r.insert(i, i);
        }
        r
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> bool {
        let k = i * self.size + j;
        self.bits[k / 64] >> (k % 64) & 1 == 1
    }

    /// Returns true if the bit was newly set.
    #[inline]
    fn insert(&mut self, i: usize, j: usize) -> bool {
        let k = i * self.size + j;
        let before = self.bits[k / 64];
        self.bits[k / 64] |= 1 << (k % 64);
        before != self.bits[k / 64]
    }
}

impl TransferSystem {
    fn from_relation_unchecked(order: CyclicOrder, rel: Relation) -> Self {
        debug_assert_eq!(rel.size, order.subgroup_count());
        TransferSystem {
            order,
            bits: rel.bits,
        }
    }

    /// Builds the relation `{(x, y) : x <= y, admits(x, y)}` without checking
    /// the closure axioms.
    pub(crate) fn from_fn_unchecked(
        order: CyclicOrder,
        mut admits: impl FnMut(Subgroup, Subgroup) -> bool,
    ) -> Self {
        let subs = order.all_subgroups();
        let mut rel = Relation::empty(subs.len());
        for (i, x) in subs.iter().enumerate() {
            for (j, y) in subs.iter().enumerate() {
                if x.leq(*y) && admits(*x, *y) {
                    rel.insert(i, j);
                }
            }
        }
        Self::from_relation_unchecked(order, rel)
    }

    fn relation(&self) -> Relation {
        Relation {
            size: self.order.subgroup_count(),
            bits: self.bits.clone(),
        }
    }

    /// The discrete system: identities only.
    pub fn identities(order: CyclicOrder) -> Self {
        Self::from_relation_unchecked(order, Relation::identities(order.subgroup_count()))
    }

    /// The complete system: every inclusion is a transfer.
    pub fn complete(order: CyclicOrder) -> Self {
        let subs = order.all_subgroups();
        let mut rel = Relation::empty(subs.len());
        for (i, x) in subs.iter().enumerate() {
            for (j, y) in subs.iter().enumerate() {
                if x.leq(*y) {
                    rel.insert(i, j);
                }
            }
        }
        Self::from_relation_unchecked(order, rel)
    }

    pub fn order(&self) -> &CyclicOrder {
        &self.order
    }

    pub fn contains(&self, x: Subgroup, y: Subgroup) -> bool {
        if !self.order.contains(x) || !self.order.contains(y) {
            return false;
        }
        let size = self.order.subgroup_count();
        let k = self.order.index_of(x) * size + self.order.index_of(y);
        self.bits[k / 64] >> (k % 64) & 1 == 1
    }

    /// All edges including identities, in lexicographic order of (src, dst).
    pub fn edges(&self) -> Vec<(Subgroup, Subgroup)> {
        let subs = self.order.all_subgroups();
        let rel = self.relation();
        let mut out = Vec::new();
        for (i, x) in subs.iter().enumerate() {
            for (j, y) in subs.iter().enumerate() {
                if rel.get(i, j) {
                    out.push((*x, *y));
                }
            }
        }
        out
    }

    pub fn nontrivial_edges(&self) -> Vec<(Subgroup, Subgroup)> {
        self.edges().into_iter().filter(|(x, y)| x != y).collect()
    }

    /// Little-endian words of the edge bitmask.
    pub fn mask_words(&self) -> &[u64] {
        &self.bits
    }

    /// Bitmask as a hexadecimal string, most significant digit first.
    pub fn mask_hex(&self) -> String {
        let mut s = String::new();
        let mut leading = true;
        for w in self.bits.iter().rev() {
            if leading {
                if *w == 0 {
                    continue;
                }
                write!(s, "{w:x}").unwrap();
                leading = false;
            } else {
                write!(s, "{w:016x}").unwrap();
            }
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }

    /// Checks a candidate edge set against the axioms, reflexive edges
    /// included. Reports the first violated axiom, checked in the order
    /// orientation, reflexivity, transitivity, restriction, with the
    /// lexicographically first witness.
    pub fn validate(order: CyclicOrder, candidate: &[(Subgroup, Subgroup)]) -> Result<Self> {
        let size = order.subgroup_count();
        let mut sorted: Vec<_> = candidate.to_vec();
        sorted.sort();
        for &(x, y) in &sorted {
            order.check(x)?;
            order.check(y)?;
            if !x.leq(y) {
                return Err(Violation::Orientation { src: x, dst: y }.into());
            }
        }
        let mut rel = Relation::empty(size);
        for &(x, y) in &sorted {
            rel.insert(order.index_of(x), order.index_of(y));
        }
        if let Some(v) = first_violation(&order, &rel) {
            return Err(v.into());
        }
        Ok(Self::from_relation_unchecked(order, rel))
    }

    /// Validates after adding all identities; the form used by the JSON
    /// interface, which lists only non-reflexive edges.
    pub fn from_nontrivial(order: CyclicOrder, edges: &[(Subgroup, Subgroup)]) -> Result<Self> {
        let mut all: Vec<_> = order.all_subgroups().into_iter().map(|x| (x, x)).collect();
        all.extend_from_slice(edges);
        Self::validate(order, &all)
    }

    /// Smallest transfer system containing `seeds`.
    pub fn generate(order: CyclicOrder, seeds: &[(Subgroup, Subgroup)]) -> Result<Self> {
        let mut rel = Relation::identities(order.subgroup_count());
        for &(x, y) in seeds {
            order.check(x)?;
            order.check(y)?;
            if !x.leq(y) {
                return Err(Violation::Orientation { src: x, dst: y }.into());
            }
            rel.insert(order.index_of(x), order.index_of(y));
        }
        close(&order, &mut rel);
        Ok(Self::from_relation_unchecked(order, rel))
    }

    /// Smallest transfer system containing `self` and the extra edges.
    pub fn join_with(&self, extra: &[(Subgroup, Subgroup)]) -> Result<Self> {
        let mut seeds = self.nontrivial_edges();
        seeds.extend_from_slice(extra);
        Self::generate(self.order, &seeds)
    }

    /// First `(x, y, z)` with `x -> z`, `x <= y <= z` and one of `x -> y`,
    /// `y -> z` missing.
    pub fn saturation_witness(&self) -> Option<(Subgroup, Subgroup, Subgroup)> {
        let subs = self.order.all_subgroups();
        let rel = self.relation();
        for (i, x) in subs.iter().enumerate() {
            for (k, z) in subs.iter().enumerate() {
                if i == k || !rel.get(i, k) {
                    continue;
                }
                for (j, y) in subs.iter().enumerate() {
                    if x.leq(*y) && y.leq(*z) && !(rel.get(i, j) && rel.get(j, k)) {
                        return Some((*x, *y, *z));
                    }
                }
            }
        }
        None
    }

    pub fn is_saturated(&self) -> bool {
        self.saturation_witness().is_none()
    }

    pub fn require_saturated(&self) -> Result<()> {
        match self.saturation_witness() {
            None => Ok(()),
            Some((x, y, z)) => Err(Error::NotSaturated(format!(
                "{x} -> {z} is present but {y} lies between and {x} -> {y} or {y} -> {z} is missing"
            ))),
        }
    }

    /// Restriction to the sub-box `[n'] x [m']`.
    pub fn restrict(&self, n: u32, m: u32) -> Result<Self> {
        let sub = self.order.sub_box(n, m)?;
        let subs = sub.all_subgroups();
        let mut rel = Relation::empty(subs.len());
        for (i, x) in subs.iter().enumerate() {
            for (j, y) in subs.iter().enumerate() {
                if self.contains(*x, *y) {
                    rel.insert(i, j);
                }
            }
        }
        Ok(Self::from_relation_unchecked(sub, rel))
    }

    /// Edges of the Hasse diagram of the relation: non-reflexive edges with
    /// no third subgroup strictly between them inside the relation.
    pub fn covers(&self) -> Vec<(Subgroup, Subgroup)> {
        let subs = self.order.all_subgroups();
        self.nontrivial_edges()
            .into_iter()
            .filter(|&(x, y)| {
                !subs
                    .iter()
                    .any(|&z| z != x && z != y && self.contains(x, z) && self.contains(z, y))
            })
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph transfer_system {\n    rankdir=BT;\n");
        for s in self.order.all_subgroups() {
            writeln!(
                out,
                "    s{}_{} [label=\"{}\"];",
                s.a,
                s.b,
                self.order.label(s)
            )
            .unwrap();
        }
        for (x, y) in self.covers() {
            writeln!(out, "    s{}_{} -> s{}_{};", x.a, x.b, y.a, y.b).unwrap();
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> TransferSystemJson {
        TransferSystemJson {
            order: self.order,
            edges: self.nontrivial_edges(),
        }
    }

    pub fn from_json(json: &TransferSystemJson) -> Result<Self> {
        Self::from_nontrivial(json.order, &json.edges)
    }
}

/// Wire form: `{"order": ..., "edges": [[[a,b],[a',b']], ...]}` with
/// reflexive edges left implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferSystemJson {
    pub order: CyclicOrder,
    pub edges: Vec<(Subgroup, Subgroup)>,
}

impl Serialize for TransferSystem {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TransferSystem {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let json = TransferSystemJson::deserialize(deserializer)?;
        TransferSystem::from_json(&json).map_err(serde::de::Error::custom)
    }
}

fn first_violation(order: &CyclicOrder, rel: &Relation) -> Option<Violation> {
    let subs = order.all_subgroups();
    for (i, x) in subs.iter().enumerate() {
        if !rel.get(i, i) {
            return Some(Violation::Reflexivity { x: *x });
        }
    }
    for (i, x) in subs.iter().enumerate() {
        for (j, y) in subs.iter().enumerate() {
            if !rel.get(i, j) {
                continue;
            }
            for (k, z) in subs.iter().enumerate() {
                if rel.get(j, k) && !rel.get(i, k) {
                    return Some(Violation::Transitivity {
                        x: *x,
                        y: *y,
                        z: *z,
                    });
                }
            }
        }
    }
    for (i, x) in subs.iter().enumerate() {
        for (j, y) in subs.iter().enumerate() {
            if !rel.get(i, j) {
                continue;
            }
            for w in subs.iter().filter(|w| w.leq(*y)) {
                if !rel.get(order.index_of(x.meet(*w)), order.index_of(*w)) {
                    return Some(Violation::Restriction {
                        src: *x,
                        dst: *y,
                        w: *w,
                    });
                }
            }
        }
    }
    None
}

fn is_transfer_system(order: &CyclicOrder, rel: &Relation) -> bool {
    first_violation(order, rel).is_none()
}

/// Closes `rel` under transitivity and restriction in place.
fn close(order: &CyclicOrder, rel: &mut Relation) {
    let subs = order.all_subgroups();
    let size = subs.len();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..size {
            for j in 0..size {
                if !rel.get(i, j) {
                    continue;
                }
                for k in 0..size {
                    if rel.get(j, k) {
                        changed |= rel.insert(i, k);
                    }
                }
                let (x, y) = (subs[i], subs[j]);
                for (wi, w) in subs.iter().enumerate() {
                    if w.leq(y) {
                        changed |= rel.insert(order.index_of(x.meet(*w)), wi);
                    }
                }
            }
        }
    }
}

fn comparable_pairs(order: &CyclicOrder) -> Vec<(usize, usize)> {
    let subs = order.all_subgroups();
    let mut out = Vec::new();
    for (i, x) in subs.iter().enumerate() {
        for (j, y) in subs.iter().enumerate() {
            if i != j && x.leq(*y) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Every transfer system on the box, sorted by edge bitmask.
pub fn enumerate_all(order: CyclicOrder, saturated_only: bool) -> Result<Vec<TransferSystem>> {
    let size = order.subgroup_count();
    let pairs = comparable_pairs(&order);
    let mut systems = if pairs.len() <= SUBSET_SEARCH_MAX_PAIRS {
        let mut found = Vec::new();
        for mask in 0u32..(1u32 << pairs.len()) {
            let mut rel = Relation::identities(size);
            for (bit, &(i, j)) in pairs.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    rel.insert(i, j);
                }
            }
            if is_transfer_system(&order, &rel) {
                found.push(TransferSystem::from_relation_unchecked(order, rel));
            }
        }
        found
    } else {
        // Every system is reachable from the discrete one by adding one edge
        // at a time and closing.
        let start = Relation::identities(size);
        let mut seen: HashSet<Relation> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(rel) = queue.pop_front() {
            for &(i, j) in &pairs {
                if rel.get(i, j) {
                    continue;
                }
                let mut next = rel.clone();
                next.insert(i, j);
                close(&order, &mut next);
                if seen.insert(next.clone()) {
                    if seen.len() > ENUMERATION_LIMIT {
                        return Err(Error::ResourceLimit(format!(
                            "more than {ENUMERATION_LIMIT} transfer systems on [{}]x[{}]",
                            order.n(),
                            order.m()
                        )));
                    }
                    queue.push_back(next);
                }
            }
        }
        seen.into_iter()
            .map(|rel| TransferSystem::from_relation_unchecked(order, rel))
            .collect()
    };
    if saturated_only {
        systems.retain(TransferSystem::is_saturated);
    }
    systems.sort();
    Ok(systems)
}

pub fn validate(order: CyclicOrder, candidate: &[(Subgroup, Subgroup)]) -> Result<TransferSystem> {
    TransferSystem::validate(order, candidate)
}

pub fn generate(order: CyclicOrder, seeds: &[(Subgroup, Subgroup)]) -> Result<TransferSystem> {
    TransferSystem::generate(order, seeds)
}

pub fn is_saturated(t: &TransferSystem) -> bool {
    t.is_saturated()
}

pub fn restrict(t: &TransferSystem, n: u32, m: u32) -> Result<TransferSystem> {
    t.restrict(n, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const fn s(a: u32, b: u32) -> Subgroup {
        Subgroup::new(a, b)
    }

    fn square() -> CyclicOrder {
        CyclicOrder::new(5, 1, 7, 1).unwrap()
    }

    fn ids(order: &CyclicOrder) -> Vec<(Subgroup, Subgroup)> {
        order.all_subgroups().into_iter().map(|x| (x, x)).collect()
    }

    #[test]
    fn validate_examples() {
        let o = square();
        assert!(TransferSystem::validate(o, &ids(&o)).is_ok());

        let mut cand = ids(&o);
        cand.push((s(0, 0), s(1, 1)));
        assert_eq!(
            TransferSystem::validate(o, &cand).unwrap_err(),
            Error::Invalid(Violation::Restriction {
                src: s(0, 0),
                dst: s(1, 1),
                w: s(0, 1)
            })
        );

        let mut cand = ids(&o);
        cand.extend([(s(0, 0), s(0, 1)), (s(0, 1), s(1, 1)), (s(0, 0), s(1, 0))]);
        assert_eq!(
            TransferSystem::validate(o, &cand).unwrap_err(),
            Error::Invalid(Violation::Transitivity {
                x: s(0, 0),
                y: s(0, 1),
                z: s(1, 1)
            })
        );
    }

    #[test]
    fn validate_orientation_and_reflexivity() {
        let o = square();
        let mut cand = ids(&o);
        cand.push((s(1, 0), s(0, 1)));
        assert!(matches!(
            TransferSystem::validate(o, &cand),
            Err(Error::Invalid(Violation::Orientation { .. }))
        ));
        assert_eq!(
            TransferSystem::validate(o, &[]).unwrap_err(),
            Error::Invalid(Violation::Reflexivity { x: s(0, 0) })
        );
        assert!(matches!(
            TransferSystem::validate(o, &[(s(0, 0), s(2, 0))]),
            Err(Error::SubgroupOutOfRange { .. })
        ));
    }

    #[test]
    fn generate_examples() {
        let o = square();
        assert_eq!(
            TransferSystem::generate(o, &[]).unwrap(),
            TransferSystem::identities(o)
        );

        let g = TransferSystem::generate(o, &[(s(0, 0), s(1, 1))]).unwrap();
        assert_eq!(
            g.nontrivial_edges(),
            vec![(s(0, 0), s(0, 1)), (s(0, 0), s(1, 0)), (s(0, 0), s(1, 1))]
        );

        let g = TransferSystem::generate(o, &[(s(0, 1), s(1, 1))]).unwrap();
        assert_eq!(
            g.nontrivial_edges(),
            vec![(s(0, 0), s(1, 0)), (s(0, 1), s(1, 1))]
        );
    }

    #[test]
    fn saturation_examples() {
        let o = square();
        assert!(TransferSystem::identities(o).is_saturated());
        let g = TransferSystem::generate(o, &[(s(0, 0), s(1, 1))]).unwrap();
        assert!(!g.is_saturated());
        assert!(g.require_saturated().is_err());
        let full = TransferSystem::complete(o);
        assert_eq!(full.nontrivial_edges().len(), 5);
        assert!(full.is_saturated());
    }

    #[test]
    fn enumeration_counts() {
        let chain1 = CyclicOrder::new(5, 1, 7, 0).unwrap();
        assert_eq!(enumerate_all(chain1, false).unwrap().len(), 2);
        assert_eq!(enumerate_all(square(), false).unwrap().len(), 10);
        assert_eq!(enumerate_all(square(), true).unwrap().len(), 7);
    }

    #[test]
    fn enumeration_is_sorted_and_distinct() {
        let all = enumerate_all(square(), false).unwrap();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all[0], TransferSystem::identities(square()));
    }

    // Chain counts come from the independent subset filter below.
    #[test]
    fn chain_counts_match_subset_oracle() {
        for k in 1..=4u32 {
            let o = CyclicOrder::new(5, k, 7, 0).unwrap();
            let subs = o.all_subgroups();
            let pairs: Vec<_> = subs
                .iter()
                .flat_map(|x| subs.iter().map(move |y| (*x, *y)))
                .filter(|(x, y)| x != y && x.leq(*y))
                .collect();
            let mut all = 0;
            let mut sat = 0;
            for mask in 0u32..(1 << pairs.len()) {
                let mut cand = ids(&o);
                cand.extend(
                    pairs
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| mask >> b & 1 == 1)
                        .map(|(_, e)| *e),
                );
                if let Ok(t) = TransferSystem::validate(o, &cand) {
                    all += 1;
                    sat += t.is_saturated() as usize;
                }
            }
            assert_eq!(enumerate_all(o, false).unwrap().len(), all);
            assert_eq!(enumerate_all(o, true).unwrap().len(), sat);
            assert_eq!(sat, 1 << k);
            if k <= 3 {
                assert_eq!(all, [2, 5, 14][k as usize - 1]);
            }
        }
    }

    #[test]
    fn recursive_and_subset_strategies_agree() {
        // [2]x[1] has exactly 12 comparable pairs: the subset path. Run the
        // recursive path on it by hand and compare.
        let o = CyclicOrder::new(5, 2, 7, 1).unwrap();
        assert_eq!(comparable_pairs(&o).len(), 12);
        let subset = enumerate_all(o, false).unwrap();
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([TransferSystem::identities(o)]);
        seen.insert(TransferSystem::identities(o));
        while let Some(t) = queue.pop_front() {
            for (x, y) in o
                .all_subgroups()
                .into_iter()
                .flat_map(|x| o.all_subgroups().into_iter().map(move |y| (x, y)))
            {
                if x.leq(y) && !t.contains(x, y) {
                    let next = t.join_with(&[(x, y)]).unwrap();
                    if seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
        let mut recursive: Vec<_> = seen.into_iter().collect();
        recursive.sort();
        assert_eq!(subset, recursive);
    }

    #[test]
    fn big_box_uses_recursive_generation() {
        let o = CyclicOrder::new(5, 2, 7, 2).unwrap();
        assert_eq!(comparable_pairs(&o).len(), 27);
        let all = enumerate_all(o, false).unwrap();
        for t in &all {
            assert!(TransferSystem::validate(o, &t.edges()).is_ok());
        }
        let sat = enumerate_all(o, true).unwrap();
        assert!(sat.len() < all.len());
        assert!(sat.iter().all(TransferSystem::is_saturated));
    }

    #[test]
    fn restrict_examples() {
        let o = square();
        let full = TransferSystem::complete(o);
        let chain = CyclicOrder::new(5, 1, 7, 0).unwrap();
        assert_eq!(
            full.restrict(1, 0).unwrap(),
            TransferSystem::complete(chain)
        );

        let t = TransferSystem::from_nontrivial(o, &[(s(0, 0), s(1, 0))]).unwrap();
        let col = CyclicOrder::new(5, 0, 7, 1).unwrap();
        assert_eq!(t.restrict(0, 1).unwrap(), TransferSystem::identities(col));

        let g = TransferSystem::generate(o, &[(s(0, 1), s(1, 1))]).unwrap();
        assert_eq!(
            g.restrict(1, 0).unwrap().nontrivial_edges(),
            vec![(s(0, 0), s(1, 0))]
        );
        assert!(full.restrict(2, 0).is_err());
    }

    #[test]
    fn restriction_preserves_saturation_exhaustive() {
        let o = CyclicOrder::new(5, 2, 7, 2).unwrap();
        for t in enumerate_all(o, true).unwrap() {
            for n in 0..=2 {
                for m in 0..=2 {
                    let r = t.restrict(n, m).unwrap();
                    assert!(r.is_saturated());
                    assert!(TransferSystem::validate(*r.order(), &r.edges()).is_ok());
                }
            }
        }
    }

    #[test]
    fn json_round_trip_and_dot() {
        let o = square();
        let t = TransferSystem::from_nontrivial(o, &[(s(0, 0), s(1, 0))]).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(
            json,
            r#"{"order":{"p":5,"n":1,"q":7,"m":1},"edges":[[[0,0],[1,0]]]}"#
        );
        let back: TransferSystem = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        let bad = r#"{"order":{"p":5,"n":1,"q":7,"m":1},"edges":[[[0,0],[1,1]]]}"#;
        assert!(serde_json::from_str::<TransferSystem>(bad).is_err());

        let dot = TransferSystem::complete(o).to_dot();
        assert!(dot.contains("s0_0 [label=\"5^0 7^0\"];"));
        assert!(dot.contains("s0_0 -> s1_0;"));
        assert!(!dot.contains("s0_0 -> s1_1;"));
    }

    #[test]
    fn mask_order() {
        let o = square();
        assert_eq!(TransferSystem::identities(o).mask_hex(), "8421");
        assert!(TransferSystem::identities(o) < TransferSystem::complete(o));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn seeds_on(order: CyclicOrder) -> impl Strategy<Value = Vec<(Subgroup, Subgroup)>> {
            let pairs: Vec<_> = comparable_pairs(&order)
                .into_iter()
                .map(|(i, j)| (order.subgroup_at(i), order.subgroup_at(j)))
                .collect();
            proptest::sample::subsequence(pairs.clone(), 0..=pairs.len().min(5))
        }

        fn any_box() -> impl Strategy<Value = CyclicOrder> {
            (0u32..=2, 0u32..=2).prop_map(|(n, m)| CyclicOrder::new(5, n, 7, m).unwrap())
        }

        proptest! {
            #[test]
            fn generate_is_a_closure_operator(
                (order, a, b) in any_box().prop_flat_map(|o| (Just(o), seeds_on(o), seeds_on(o)))
            ) {
                let ga = TransferSystem::generate(order, &a).unwrap();
                // extensive
                for &(x, y) in &a {
                    prop_assert!(ga.contains(x, y));
                }
                // idempotent
                prop_assert_eq!(TransferSystem::generate(order, &ga.edges()).unwrap(), ga.clone());
                // monotone
                let mut ab = a.clone();
                ab.extend_from_slice(&b);
                let gab = TransferSystem::generate(order, &ab).unwrap();
                for (x, y) in ga.edges() {
                    prop_assert!(gab.contains(x, y));
                }
                // always valid
                prop_assert!(TransferSystem::validate(order, &ga.edges()).is_ok());
            }
        }
    }
}
