//! A comparator built from diagrams of irreducible characters.
//!
//! A character of `C_d` is written `λ_d(i)` for `i in Z/d`, so a set of
//! characters is a [`ResidueSet`] mod `d`. A [`Diagram`] assigns such a set
//! to each subgroup, and a [`Subinductor`] gives, for `K <= H`, a
//! union-preserving map from characters of `K` to sets of characters of `H`.
//! [`macbrough_realize`] grows a diagram along a transfer system and along the
//! subinductor until nothing changes, then reads off the set on the top
//! group.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::indexing::{IndexingSet, ResidueSet};
use crate::lattice::{CyclicOrder, Subgroup};
use crate::transfer::TransferSystem;

/// Characters of `C_e` whose restriction to `C_d` lies in `s`: the residues
/// `j mod e` with `j mod d in s`.
pub fn induce_characters(d: u64, e: u64, s: &ResidueSet) -> Result<ResidueSet> {
    if d == 0 || !e.is_multiple_of(d) {
        return Err(Error::NotADivisor { e: d, modulus: e });
    }
    if s.modulus() != d {
        return Err(Error::ModulusMismatch {
            expected: d,
            actual: s.modulus(),
        });
    }
    let mut out = ResidueSet::empty(e)?;
    for x in s.iter() {
        for t in (x..e).step_by(d as usize) {
            out.insert(t);
        }
    }
    Ok(out)
}

/// Character sets indexed by subgroup; the set at `(a, b)` lives mod
/// `p^a q^b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    order: CyclicOrder,
    sets: Vec<ResidueSet>,
}

impl Diagram {
    /// Every subgroup gets the empty set.
    pub fn empty(order: CyclicOrder) -> Result<Self> {
        let sets = order
            .all_subgroups()
            .into_iter()
            .map(|s| ResidueSet::empty(order.divisor(s)))
            .collect::<Result<_>>()?;
        Ok(Diagram { order, sets })
    }

    pub fn order(&self) -> &CyclicOrder {
        &self.order
    }

    pub fn get(&self, s: Subgroup) -> &ResidueSet {
        &self.sets[self.order.index_of(s)]
    }

    pub fn set(&mut self, s: Subgroup, chars: ResidueSet) -> Result<()> {
        self.order.check(s)?;
        let expected = self.order.divisor(s);
        if chars.modulus() != expected {
            return Err(Error::ModulusMismatch {
                expected,
                actual: chars.modulus(),
            });
        }
        let idx = self.order.index_of(s);
        self.sets[idx] = chars;
        Ok(())
    }

    pub fn insert_members(&mut self, s: Subgroup, members: &[u64]) -> Result<()> {
        let mut chars = self.get(s).clone();
        chars.union_with(&ResidueSet::from_members(
            self.order.divisor(s),
            members.iter().copied(),
        )?)?;
        self.set(s, chars)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Subgroup, &ResidueSet)> {
        self.order.all_subgroups().into_iter().zip(self.sets.iter())
    }

    /// Total number of characters across all subgroups.
    pub fn weight(&self) -> usize {
        self.sets.iter().map(ResidueSet::len).sum()
    }

    fn check_lattice(&self, other: &CyclicOrder) -> Result<()> {
        if !self.order.same_lattice(other) {
            return Err(Error::Domain(format!(
                "diagram on {} used with {}",
                self.order, other
            )));
        }
        Ok(())
    }
}

/// Union-preserving maps between character sets, stored by the image of each
/// single character. The map for `K = H` is the identity; a strict pair with
/// no stored map sends everything to the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subinductor {
    order: CyclicOrder,
    maps: BTreeMap<(Subgroup, Subgroup), Vec<ResidueSet>>,
}

impl Subinductor {
    pub fn new(order: CyclicOrder) -> Self {
        Subinductor {
            order,
            maps: BTreeMap::new(),
        }
    }

    pub fn order(&self) -> &CyclicOrder {
        &self.order
    }

    /// Stores the map `K -> H`; `images[i]` is the image of `λ_|K|(i)`.
    pub fn set_map(&mut self, k: Subgroup, h: Subgroup, images: Vec<ResidueSet>) -> Result<()> {
        self.order.check(k)?;
        self.order.check(h)?;
        if !k.leq(h) || k == h {
            return Err(Error::Domain(format!(
                "{k} -> {h} is not a strict inclusion"
            )));
        }
        let (dk, dh) = (self.order.divisor(k), self.order.divisor(h));
        if images.len() as u64 != dk {
            return Err(Error::Domain(format!(
                "{k} has {dk} characters, got {} images",
                images.len()
            )));
        }
        if let Some(bad) = images.iter().find(|s| s.modulus() != dh) {
            return Err(Error::ModulusMismatch {
                expected: dh,
                actual: bad.modulus(),
            });
        }
        self.maps.insert((k, h), images);
        Ok(())
    }

    /// Stores a map given by `i -> f(i)` as a list of members mod `|H|`.
    pub fn set_map_fn(
        &mut self,
        k: Subgroup,
        h: Subgroup,
        f: impl Fn(u64) -> Vec<u64>,
    ) -> Result<()> {
        let (dk, dh) = (self.order.divisor(k), self.order.divisor(h));
        let images = (0..dk)
            .map(|i| ResidueSet::from_members(dh, f(i).into_iter().map(|x| x % dh)))
            .collect::<Result<_>>()?;
        self.set_map(k, h, images)
    }

    pub fn apply(&self, k: Subgroup, h: Subgroup, chars: &ResidueSet) -> Result<ResidueSet> {
        if k == h {
            return Ok(chars.clone());
        }
        let dh = self.order.divisor(h);
        let mut out = ResidueSet::empty(dh)?;
        if let Some(images) = self.maps.get(&(k, h)) {
            for i in chars.iter() {
                out.union_with(&images[i as usize])?;
            }
        }
        Ok(out)
    }
}

/// A diagram together with its subinductor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightPairInstance {
    pub diagram: Diagram,
    pub subinductor: Subinductor,
}

/// The instance on `C_p x C_q`, with parameters `0 < j < p` and `0 < k < q`.
pub fn build_cpq_instance(p: u64, q: u64, j: u64, k: u64) -> Result<TightPairInstance> {
    if !(0 < j && j < p) {
        return Err(Error::Domain(format!("j = {j} must satisfy 0 < j < {p}")));
    }
    if !(0 < k && k < q) {
        return Err(Error::Domain(format!("k = {k} must satisfy 0 < k < {q}")));
    }
    let order = CyclicOrder::new(p, 1, q, 1)?;
    let pq = p * q;
    let (triv, cp, cq, top) = (
        Subgroup::new(0, 0),
        Subgroup::new(1, 0),
        Subgroup::new(0, 1),
        Subgroup::new(1, 1),
    );

    let mut diagram = Diagram::empty(order)?;
    diagram.insert_members(triv, &[0])?;
    diagram.insert_members(cp, &[0, j, p - j])?;
    diagram.insert_members(cq, &[0, k, q - k])?;
    let (jq, pk, jq_bar, pk_bar) = (j * q, p * k, (p - j) * q, p * (q - k));
    let top_chars = [
        0,
        jq,
        pk,
        jq_bar,
        pk_bar,
        pk + jq,
        pq - pk - jq,
        pk + jq_bar,
        pk_bar + jq,
    ];
    diagram.insert_members(top, &top_chars.map(|x| x % pq))?;

    let mut sub = Subinductor::new(order);
    sub.set_map_fn(cp, top, |i| vec![i * q])?;
    sub.set_map_fn(cq, top, |i| vec![i * p])?;
    let zero_to_zero = |i: u64| if i == 0 { vec![0] } else { vec![] };
    sub.set_map_fn(triv, cp, zero_to_zero)?;
    sub.set_map_fn(triv, cq, zero_to_zero)?;
    sub.set_map_fn(triv, top, zero_to_zero)?;
    Ok(TightPairInstance {
        diagram,
        subinductor: sub,
    })
}

/// The instance on the chain `1 <= C_p <= C_{p^2}`.
pub fn build_cp2_instance(p: u64) -> Result<TightPairInstance> {
    let order = CyclicOrder::from_modulus(p.checked_mul(p).ok_or(Error::Overflow)?)?;
    if order.n() != 2 {
        return Err(Error::NotPrime(p));
    }
    if p < 5 {
        return Err(Error::UnsupportedPrime(p));
    }
    let p2 = p * p;
    let (triv, cp, top) = (
        Subgroup::new(0, 0),
        Subgroup::new(1, 0),
        Subgroup::new(2, 0),
    );

    let mut diagram = Diagram::empty(order)?;
    diagram.insert_members(triv, &[0])?;
    diagram.insert_members(cp, &[0, 1, p - 1])?;
    diagram.insert_members(top, &[0, 2 * p, p2 - 2 * p])?;

    let mut sub = Subinductor::new(order);
    sub.set_map_fn(cp, top, |i| vec![i, p2 - p + i])?;
    sub.set_map_fn(triv, cp, |_| vec![0])?;
    sub.set_map_fn(triv, top, |_| vec![0, p2 - p])?;
    Ok(TightPairInstance {
        diagram,
        subinductor: sub,
    })
}

/// `D1(H) = union over edges K -> H of T of Ind_K^H D(K)`.
pub fn extend_by_transfers(d: &Diagram, t: &TransferSystem) -> Result<Diagram> {
    d.check_lattice(t.order())?;
    let order = *d.order();
    let mut out = Diagram::empty(order)?;
    for (k, h) in t.edges() {
        let induced = induce_characters(order.divisor(k), order.divisor(h), d.get(k))?;
        let mut chars = out.get(h).clone();
        chars.union_with(&induced)?;
        out.set(h, chars)?;
    }
    Ok(out)
}

/// `D2(H) = union over K <= H of J_K^H D(K)`.
pub fn extend_by_subinduction(d: &Diagram, sub: &Subinductor) -> Result<Diagram> {
    d.check_lattice(sub.order())?;
    let order = *d.order();
    let mut out = Diagram::empty(order)?;
    for h in order.all_subgroups() {
        let mut chars = ResidueSet::empty(order.divisor(h))?;
        for k in order.all_subgroups().into_iter().filter(|k| k.leq(h)) {
            chars.union_with(&sub.apply(k, h, d.get(k))?)?;
        }
        out.set(h, chars)?;
    }
    Ok(out)
}

/// The fixed-point diagram and how many rounds it took.
#[derive(Debug, Clone)]
pub struct MacbroughRun {
    pub diagram: Diagram,
    pub rounds: usize,
}

impl MacbroughRun {
    pub fn top(&self) -> &ResidueSet {
        let order = self.diagram.order();
        self.diagram.get(Subgroup::new(order.n(), order.m()))
    }
}

/// Alternates both extensions until neither changes the diagram.
pub fn macbrough_fixed_point(t: &TransferSystem, inst: &TightPairInstance) -> Result<MacbroughRun> {
    inst.diagram.check_lattice(t.order())?;
    inst.diagram.check_lattice(inst.subinductor.order())?;
    t.require_saturated()?;
    // Each productive round adds at least one character.
    let limit = t.order().subgroup_count() as u64 * t.order().modulus() + 1;
    let mut d = inst.diagram.clone();
    for rounds in 1..=limit as usize {
        let d1 = extend_by_transfers(&d, t)?;
        let d2 = extend_by_subinduction(&d1, &inst.subinductor)?;
        if d2 == d {
            return Ok(MacbroughRun { diagram: d, rounds });
        }
        d = d2;
    }
    Err(Error::Domain("diagram extension did not converge".into()))
}

/// Runs the extension loop and returns the top set, provided it is an
/// indexing set realizing `t`.
pub fn macbrough_realize(t: &TransferSystem, inst: &TightPairInstance) -> Result<IndexingSet> {
    let run = macbrough_fixed_point(t, inst)?;
    let set = IndexingSet::seal(run.top().clone())
        .map_err(|e| Error::NotRealized(format!("top set is not an indexing set: {e}")))?;
    let got = set.realized_system(t.order())?;
    if got != *t {
        return Err(Error::NotRealized(format!(
            "{} realizes {:?}, not {:?}",
            set.to_list_string(),
            got.nontrivial_edges(),
            t.nontrivial_edges()
        )));
    }
    Ok(set)
}
