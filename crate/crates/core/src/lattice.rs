//! The subgroup lattice of a cyclic group of order `p^n q^m`.
//!
//! Subgroups are identified with exponent vectors `(a, b)` in the box
//! `[n] x [m]`; the subgroup `(a, b)` is the cyclic subgroup of order
//! `p^a q^b`. Inclusion is the componentwise order and intersection is the
//! componentwise minimum.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};

/// A cyclic group `C_N` with `N = p^n q^m`, stored in factored form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "OrderWire", into = "OrderWire")]
pub struct CyclicOrder {
    p: u64,
    n: u32,
    q: u64,
    m: u32,
    modulus: u64,
}

#[derive(Serialize, Deserialize)]
struct OrderWire {
    p: u64,
    n: u32,
    q: u64,
    m: u32,
}

impl TryFrom<OrderWire> for CyclicOrder {
    type Error = Error;
    fn try_from(w: OrderWire) -> Result<Self> {
        CyclicOrder::new(w.p, w.n, w.q, w.m)
    }
}

impl From<CyclicOrder> for OrderWire {
    fn from(o: CyclicOrder) -> Self {
        OrderWire {
            p: o.p,
            n: o.n,
            q: o.q,
            m: o.m,
        }
    }
}

impl CyclicOrder {
    pub fn new(p: u64, n: u32, q: u64, m: u32) -> Result<Self> {
        if !arith::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if !arith::is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if p == q {
            return Err(Error::EqualPrimes(p));
        }
        let modulus = arith::checked_pow(p, n)
            .and_then(|pn| arith::checked_pow(q, m).and_then(|qm| pn.checked_mul(qm)))
            .ok_or(Error::Overflow)?;
        Ok(CyclicOrder {
            p,
            n,
            q,
            m,
            modulus,
        })
    }

    /// Factors a raw modulus with at most two distinct prime divisors. The
    /// smaller prime becomes `p`. A missing second prime is filled in with the
    /// smallest prime not already used, at exponent zero.
    pub fn from_modulus(modulus: u64) -> Result<Self> {
        let factors = arith::factor_two_primes(modulus).ok_or_else(|| {
            Error::Domain(format!(
                "{modulus} must be positive with at most two distinct prime factors"
            ))
        })?;
        match factors.as_slice() {
            [] => CyclicOrder::new(2, 0, 3, 0),
            [(p, n)] => {
                let filler = if *p == 2 { 3 } else { 2 };
                CyclicOrder::new(*p, *n, filler, 0)
            }
            [(p, n), (q, m)] => CyclicOrder::new(*p, *n, *q, *m),
            _ => unreachable!("factor_two_primes returns at most two factors"),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    /// `N = p^n q^m`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of subgroups, `(n+1)(m+1)`.
    pub fn subgroup_count(&self) -> usize {
        (self.n as usize + 1) * (self.m as usize + 1)
    }

    /// The same primes on a smaller box.
    pub fn sub_box(&self, n: u32, m: u32) -> Result<Self> {
        if n > self.n || m > self.m {
            return Err(Error::SubgroupOutOfRange {
                a: n,
                b: m,
                n: self.n,
                m: self.m,
            });
        }
        CyclicOrder::new(self.p, n, self.q, m)
    }

    /// True when both orders have the same subgroup lattice with the same
    /// divisors. Differs from `==` only in the prime recorded for an axis of
    /// exponent zero.
    pub fn same_lattice(&self, other: &CyclicOrder) -> bool {
        self.n == other.n
            && self.m == other.m
            && (self.n == 0 || self.p == other.p)
            && (self.m == 0 || self.q == other.q)
    }

    pub fn subgroup(&self, a: u32, b: u32) -> Result<Subgroup> {
        let s = Subgroup { a, b };
        self.check(s)?;
        Ok(s)
    }

    pub fn contains(&self, s: Subgroup) -> bool {
        s.a <= self.n && s.b <= self.m
    }

    pub fn check(&self, s: Subgroup) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::SubgroupOutOfRange {
                a: s.a,
                b: s.b,
                n: self.n,
                m: self.m,
            })
        }
    }

    /// All subgroups in lexicographic order: `a` ascending, then `b`.
    pub fn all_subgroups(&self) -> Vec<Subgroup> {
        (0..=self.n)
            .flat_map(|a| (0..=self.m).map(move |b| Subgroup { a, b }))
            .collect()
    }

    /// Position of `s` in [`all_subgroups`](Self::all_subgroups).
    pub fn index_of(&self, s: Subgroup) -> usize {
        debug_assert!(self.contains(s));
        s.a as usize * (self.m as usize + 1) + s.b as usize
    }

    pub fn subgroup_at(&self, idx: usize) -> Subgroup {
        let w = self.m as usize + 1;
        Subgroup {
            a: (idx / w) as u32,
            b: (idx % w) as u32,
        }
    }

    /// `p^a q^b`, the order of the subgroup. Always divides `N`.
    pub fn divisor(&self, s: Subgroup) -> u64 {
        debug_assert!(self.contains(s));
        self.p.pow(s.a) * self.q.pow(s.b)
    }

    /// Label used in text and DOT output, e.g. `5^1 7^0`.
    pub fn label(&self, s: Subgroup) -> String {
        format!("{}^{} {}^{}", self.p, s.a, self.q, s.b)
    }
}

impl fmt::Display for CyclicOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "C_{} ({}^{} * {}^{})",
            self.modulus, self.p, self.n, self.q, self.m
        )
    }
}

/// A subgroup, as an exponent vector. Serialized as `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct Subgroup {
    pub a: u32,
    pub b: u32,
}

impl From<(u32, u32)> for Subgroup {
    fn from((a, b): (u32, u32)) -> Self {
        Subgroup { a, b }
    }
}

impl From<Subgroup> for (u32, u32) {
    fn from(s: Subgroup) -> Self {
        (s.a, s.b)
    }
}

impl Subgroup {
    pub const fn new(a: u32, b: u32) -> Self {
        Subgroup { a, b }
    }

    pub fn leq(self, other: Subgroup) -> bool {
        self.a <= other.a && self.b <= other.b
    }

    pub fn meet(self, other: Subgroup) -> Subgroup {
        Subgroup {
            a: self.a.min(other.a),
            b: self.b.min(other.b),
        }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

pub fn all_subgroups(order: &CyclicOrder) -> Vec<Subgroup> {
    order.all_subgroups()
}

pub fn leq(x: Subgroup, y: Subgroup) -> bool {
    x.leq(y)
}

pub fn meet(x: Subgroup, y: Subgroup) -> Subgroup {
    x.meet(y)
}

pub fn divisor(order: &CyclicOrder, x: Subgroup) -> u64 {
    order.divisor(x)
}
