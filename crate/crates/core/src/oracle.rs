//! Brute-force ground truth at small modulus.
//!
//! An indexing set of `Z/N` is fixed by which of the `floor(N/2)` pairs
//! `{i, N-i}` (`1 <= i <= N/2`) it contains, so the sets are enumerated as
//! pair masks. Bit `k` of the mask stands for the pair `{k+1, N-k-1}`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indexing::{IndexingSet, ResidueSet};
use crate::lattice::CyclicOrder;
use crate::realizer;
use crate::transfer::{enumerate_all, TransferSystem};

/// Largest exhaustive sweep by default, in pair bits.
pub const DEFAULT_CAP_BITS: u32 = 20;

/// Number of free pairs `{i, N-i}`.
pub fn pair_bits(modulus: u64) -> u32 {
    (modulus / 2) as u32
}

fn check_cap(modulus: u64, cap_bits: u32) -> Result<u32> {
    let bits = pair_bits(modulus);
    if bits > cap_bits || bits >= 63 {
        return Err(Error::ResourceLimit(format!(
            "Z/{modulus} has 2^{bits} indexing sets, above the cap of 2^{cap_bits}"
        )));
    }
    Ok(bits)
}

/// The indexing set with pair mask `mask`.
pub fn indexing_set_from_mask(modulus: u64, mask: u64) -> IndexingSet {
    let mut set = ResidueSet::empty(modulus).expect("modulus within dense limit");
    set.insert(0);
    for k in 0..pair_bits(modulus) as u64 {
        if mask >> k & 1 == 1 {
            set.insert(k + 1);
            set.insert(modulus - k - 1);
        }
    }
    IndexingSet::seal(set).expect("pair masks give indexing sets")
}

/// All `2^floor(N/2)` indexing sets of `Z/N`, in increasing mask order.
pub fn enumerate_indexing_sets(
    modulus: u64,
    cap_bits: u32,
) -> Result<impl Iterator<Item = IndexingSet>> {
    if modulus == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    let bits = check_cap(modulus, cap_bits)?;
    Ok((0..1u64 << bits).map(move |mask| indexing_set_from_mask(modulus, mask)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CensusMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

impl CensusMode {
    pub fn is_exhaustive(&self) -> bool {
        matches!(self, CensusMode::Exhaustive)
    }
}

/// How many indexing sets realize each transfer system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub order: CyclicOrder,
    pub mode: CensusMode,
    pub counts: BTreeMap<TransferSystem, u64>,
}

impl Census {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn realizable(&self) -> impl Iterator<Item = &TransferSystem> {
        self.counts.keys()
    }

    pub fn count(&self, t: &TransferSystem) -> u64 {
        self.counts.get(t).copied().unwrap_or(0)
    }
}

type Counts = BTreeMap<TransferSystem, u64>;

fn merge(mut a: Counts, b: Counts) -> Counts {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

fn tally(order: &CyclicOrder, mut acc: Counts, mask: u64) -> Counts {
    let set = indexing_set_from_mask(order.modulus(), mask);
    let t = set.realized_system(order).expect("modulus matches order");
    *acc.entry(t).or_insert(0) += 1;
    acc
}

/// Exhaustive census, parallel over pair masks.
pub fn realizability_census(order: &CyclicOrder, cap_bits: u32) -> Result<Census> {
    let bits = check_cap(order.modulus(), cap_bits)?;
    let counts = (0..1u64 << bits)
        .into_par_iter()
        .fold(Counts::new, |acc, mask| tally(order, acc, mask))
        .reduce(Counts::new, merge);
    Ok(Census {
        order: *order,
        mode: CensusMode::Exhaustive,
        counts,
    })
}

/// Exhaustive census on the calling thread.
pub fn realizability_census_serial(order: &CyclicOrder, cap_bits: u32) -> Result<Census> {
    let bits = check_cap(order.modulus(), cap_bits)?;
    let counts = (0..1u64 << bits).fold(Counts::new(), |acc, mask| tally(order, acc, mask));
    Ok(Census {
        order: *order,
        mode: CensusMode::Exhaustive,
        counts,
    })
}

/// Census over `samples` masks drawn uniformly with a seeded generator.
/// Absent keys are not evidence of unrealizability.
pub fn sampled_census(order: &CyclicOrder, samples: u64, seed: u64) -> Result<Census> {
    let bits = pair_bits(order.modulus());
    if bits >= 64 {
        return Err(Error::ResourceLimit(format!(
            "Z/{} is too large to sample",
            order.modulus()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masks: Vec<u64> = (0..samples)
        .map(|_| {
            if bits == 0 {
                0
            } else {
                rng.gen::<u64>() >> (64 - bits)
            }
        })
        .collect();
    let counts = masks
        .par_iter()
        .fold(Counts::new, |acc, &mask| tally(order, acc, mask))
        .reduce(Counts::new, merge);
    Ok(Census {
        order: *order,
        mode: CensusMode::Sampled { samples, seed },
        counts,
    })
}

/// Comparison of a census against the saturated systems of its order.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub order: CyclicOrder,
    pub mode: CensusMode,
    pub saturated: usize,
    pub realizable: usize,
    /// Saturated systems with no realizing set in the census.
    pub unrealized_saturated: Vec<TransferSystem>,
    /// Census keys that are not saturated; always empty in practice.
    pub unsaturated_keys: Vec<TransferSystem>,
    /// Saturated systems where the constructive realizer failed or produced
    /// a set whose system is not a census key. `None` when it was not run.
    pub realizer_failures: Option<Vec<String>>,
}

impl TheoremReport {
    /// Every saturated system is realizable and every key is saturated.
    /// A sampled census can only fail on the key and realizer checks.
    pub fn pass(&self) -> bool {
        let complete = !self.mode.is_exhaustive() || self.unrealized_saturated.is_empty();
        complete
            && self.unsaturated_keys.is_empty()
            && self.realizer_failures.as_ref().is_none_or(|f| f.is_empty())
    }
}

/// Compares census keys with the saturated systems, without running the
/// constructive realizer.
pub fn compare_with_saturated(census: &Census) -> Result<TheoremReport> {
    let saturated = enumerate_all(census.order, true)?;
    let unrealized_saturated = saturated
        .iter()
        .filter(|t| census.count(t) == 0)
        .cloned()
        .collect();
    let unsaturated_keys = census
        .counts
        .keys()
        .filter(|t| !t.is_saturated())
        .cloned()
        .collect();
    Ok(TheoremReport {
        order: census.order,
        mode: census.mode,
        saturated: saturated.len(),
        realizable: census.counts.len(),
        unrealized_saturated,
        unsaturated_keys,
        realizer_failures: None,
    })
}

/// Runs the realizer on every saturated system and checks its output
/// against the census.
pub fn cross_check_realizer(census: &Census, report: &mut TheoremReport) -> Result<()> {
    let mut failures = Vec::new();
    for t in enumerate_all(census.order, true)? {
        match realizer::realize(&t) {
            Ok(k) => {
                let got = k.realized_system(&census.order)?;
                if got != t {
                    failures.push(format!("{t:?}: realizer output realizes {got:?}"));
                } else if census.mode.is_exhaustive() && census.count(&got) == 0 {
                    failures.push(format!("{t:?}: realizer output is not among census keys"));
                }
            }
            Err(e) => failures.push(format!("{t:?}: {e}")),
        }
    }
    report.realizer_failures = Some(failures);
    Ok(())
}

/// Exhaustive check that exactly the saturated systems are realizable, with
/// the realizer cross-checked against the census.
pub fn verify_theorem_at(order: &CyclicOrder, cap_bits: u32) -> Result<TheoremReport> {
    for (prime, exp) in [(order.p(), order.n()), (order.q(), order.m())] {
        if exp > 0 && prime < realizer::MIN_PRIME {
            return Err(Error::UnsupportedPrime(prime));
        }
    }
    let census = realizability_census(order, cap_bits)?;
    let mut report = compare_with_saturated(&census)?;
    cross_check_realizer(&census, &mut report)?;
    Ok(report)
}
