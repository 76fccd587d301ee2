//! Indexing sets over `Z/N` and the transfer systems they realize.
//!
//! An indexing set `I` contains 0 and is closed under negation. It stands
//! for the universe built from the rotation representations `lambda_N(j)`,
//! `j in I`. For `d | e | N`, the subgroup of order `d` transfers to the one
//! of order `e` exactly when `I mod e` is invariant under translation by `d`.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::CyclicOrder;
use crate::transfer::TransferSystem;

/// Largest modulus for which a dense membership table is allocated.
pub const MAX_DENSE_MODULUS: u64 = 1 << 26;

/// A subset of `Z/e`. No closure properties are enforced.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueSet {
    modulus: u64,
    members: Vec<bool>,
}

impl fmt::Debug for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} mod {}", self.to_vec(), self.modulus)
    }
}

impl ResidueSet {
    pub fn empty(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Domain("modulus must be positive".into()));
        }
        if modulus > MAX_DENSE_MODULUS {
            return Err(Error::ResourceLimit(format!(
                "modulus {modulus} exceeds the dense limit {MAX_DENSE_MODULUS}"
            )));
        }
        Ok(ResidueSet {
            modulus,
            members: vec![false; modulus as usize],
        })
    }

    pub fn full(modulus: u64) -> Result<Self> {
        let mut s = Self::empty(modulus)?;
        s.members.fill(true);
        Ok(s)
    }

    /// Members must already lie in `0..modulus`.
    pub fn from_members(modulus: u64, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut s = Self::empty(modulus)?;
        for x in members {
            if x >= modulus {
                return Err(Error::ResidueOutOfRange {
                    residue: x,
                    modulus,
                });
            }
            s.members[x as usize] = true;
        }
        Ok(s)
    }

    /// Members are arbitrary integers, reduced into `0..modulus`.
    pub fn from_integers(modulus: u64, members: impl IntoIterator<Item = i128>) -> Result<Self> {
        let mut s = Self::empty(modulus)?;
        for x in members {
            s.insert_integer(x);
        }
        Ok(s)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, x: u64) -> bool {
        x < self.modulus && self.members[x as usize]
    }

    pub fn insert(&mut self, x: u64) {
        self.members[(x % self.modulus) as usize] = true;
    }

    pub fn insert_integer(&mut self, x: i128) {
        let r = x.rem_euclid(self.modulus as i128);
        self.members[r as usize] = true;
    }

    pub fn remove_integer(&mut self, x: i128) {
        let r = x.rem_euclid(self.modulus as i128);
        self.members[r as usize] = false;
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|b| *b)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i as u64)
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &ResidueSet) -> bool {
        self.modulus == other.modulus && self.iter().all(|x| other.contains(x))
    }

    pub fn union_with(&mut self, other: &ResidueSet) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                expected: self.modulus,
                actual: other.modulus,
            });
        }
        for (a, b) in self.members.iter_mut().zip(&other.members) {
            *a |= *b;
        }
        Ok(())
    }

    /// `{x mod e : x in self}`; `e` must divide the modulus.
    pub fn reduce(&self, e: u64) -> Result<ResidueSet> {
        if e == 0 || !self.modulus.is_multiple_of(e) {
            return Err(Error::NotADivisor {
                e,
                modulus: self.modulus,
            });
        }
        let mut out = ResidueSet::empty(e)?;
        for x in self.iter() {
            out.members[(x % e) as usize] = true;
        }
        Ok(out)
    }

    /// Whether `S + d = S` in `Z/e`. Translation is a bijection, so the
    /// inclusion `S + d ⊆ S` is checked.
    pub fn is_invariant(&self, d: u64) -> bool {
        let e = self.modulus;
        let d = d % e;
        self.iter().all(|x| self.members[((x + d) % e) as usize])
    }

    pub fn is_negation_closed(&self) -> bool {
        let e = self.modulus;
        self.iter().all(|x| self.members[((e - x) % e) as usize])
    }

    /// Closes under `x -> -x`.
    pub fn symmetrize(&mut self) {
        let e = self.modulus;
        for x in 0..e {
            if self.members[x as usize] {
                self.members[((e - x) % e) as usize] = true;
            }
        }
    }

    /// Whether some non-zero member is a multiple of `d`.
    pub fn has_nonzero_multiple_of(&self, d: u64) -> bool {
        self.iter().any(|x| x != 0 && x % d == 0)
    }
}

/// A subset of `Z/N` containing 0 and closed under negation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "IndexingSetJson", into = "IndexingSetJson")]
pub struct IndexingSet(ResidueSet);

impl fmt::Debug for IndexingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexingSet({:?})", self.0)
    }
}

/// Wire form: `{"modulus": N, "members": [ascending residues]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexingSetJson {
    pub modulus: u64,
    pub members: Vec<u64>,
}

impl TryFrom<IndexingSetJson> for IndexingSet {
    type Error = Error;
    fn try_from(json: IndexingSetJson) -> Result<Self> {
        IndexingSet::new(json.modulus, json.members)
    }
}

impl From<IndexingSet> for IndexingSetJson {
    fn from(set: IndexingSet) -> Self {
        IndexingSetJson {
            modulus: set.modulus(),
            members: set.to_vec(),
        }
    }
}

impl IndexingSet {
    pub fn new(modulus: u64, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        Self::seal(ResidueSet::from_members(modulus, members)?)
    }

    /// Promotes a residue set after checking both invariants.
    pub fn seal(set: ResidueSet) -> Result<Self> {
        if !set.contains(0) {
            return Err(Error::NotIndexingSet(format!(
                "0 is missing from {:?}",
                set
            )));
        }
        if let Some(x) = set
            .iter()
            .find(|&x| !set.contains((set.modulus - x) % set.modulus))
        {
            return Err(Error::NotIndexingSet(format!(
                "{x} is present but its negative {} is not (mod {})",
                (set.modulus - x) % set.modulus,
                set.modulus
            )));
        }
        Ok(IndexingSet(set))
    }

    /// `{0}`.
    pub fn trivial(modulus: u64) -> Result<Self> {
        Self::new(modulus, [0])
    }

    /// All of `Z/N`.
    pub fn full(modulus: u64) -> Result<Self> {
        Ok(IndexingSet(ResidueSet::full(modulus)?))
    }

    /// Parses a comma-separated residue list such as `0,1,6`.
    pub fn parse_list(modulus: u64, text: &str) -> Result<Self> {
        let members = parse_residue_list(text)?;
        Self::new(modulus, members)
    }

    pub fn modulus(&self) -> u64 {
        self.0.modulus
    }

    pub fn contains(&self, x: u64) -> bool {
        self.0.contains(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter()
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.0.to_vec()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn residues(&self) -> &ResidueSet {
        &self.0
    }

    pub fn into_residues(self) -> ResidueSet {
        self.0
    }

    pub fn reduce(&self, e: u64) -> Result<ResidueSet> {
        self.0.reduce(e)
    }

    /// Reduction, kept as an indexing set: negation commutes with reduction.
    pub fn reduce_indexing(&self, e: u64) -> Result<IndexingSet> {
        Ok(IndexingSet(self.0.reduce(e)?))
    }

    /// The transfer system this indexing set realizes on `order`.
    pub fn realized_system(&self, order: &CyclicOrder) -> Result<TransferSystem> {
        if self.modulus() != order.modulus() {
            return Err(Error::ModulusMismatch {
                expected: order.modulus(),
                actual: self.modulus(),
            });
        }
        let subs = order.all_subgroups();
        let reductions = subs
            .iter()
            .map(|y| self.0.reduce(order.divisor(*y)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TransferSystem::from_fn_unchecked(*order, |x, y| {
            reductions[order.index_of(y)].is_invariant(order.divisor(x))
        }))
    }

    /// For every `0 <= i < n`, `I mod p^(i+1) q^m` contains a non-zero
    /// multiple of `p^i q^m`.
    pub fn star_holds(&self, order: &CyclicOrder) -> Result<bool> {
        if self.modulus() != order.modulus() {
            return Err(Error::ModulusMismatch {
                expected: order.modulus(),
                actual: self.modulus(),
            });
        }
        let qm = order.q().pow(order.m());
        for i in 0..order.n() {
            let unit = order.p().pow(i) * qm;
            if !self
                .0
                .reduce(unit * order.p())?
                .has_nonzero_multiple_of(unit)
            {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The universe as a direct sum of rotation representations, e.g.
    /// `⊕_ℕ (λ_7(0) ⊕ λ_7(1) ⊕ λ_7(6))`.
    pub fn describe_universe(&self) -> String {
        let n = self.modulus();
        let terms: Vec<String> = self.iter().map(|j| format!("λ_{n}({j})")).collect();
        if terms.len() == 1 {
            format!("⊕_ℕ {}", terms[0])
        } else {
            format!("⊕_ℕ ({})", terms.join(" ⊕ "))
        }
    }

    /// Comma-separated members, ascending.
    pub fn to_list_string(&self) -> String {
        let mut s = String::new();
        for (k, x) in self.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            write!(s, "{x}").unwrap();
        }
        s
    }
}

/// Parses `a,b,c` into integers. Whitespace around items is ignored.
pub fn parse_residue_list(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty residue list".into()));
    }
    text.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<u64>()
                .map_err(|e| Error::Parse(format!("bad residue {item:?}: {e}")))
        })
        .collect()
}

pub fn reduce(set: &IndexingSet, e: u64) -> Result<ResidueSet> {
    set.reduce(e)
}

pub fn is_invariant(set: &ResidueSet, d: u64) -> bool {
    set.is_invariant(d)
}

pub fn realized_system(set: &IndexingSet, order: &CyclicOrder) -> Result<TransferSystem> {
    set.realized_system(order)
}

pub fn star_holds(set: &IndexingSet, order: &CyclicOrder) -> Result<bool> {
    set.star_holds(order)
}

pub fn describe_universe(set: &IndexingSet) -> String {
    set.describe_universe()
}
