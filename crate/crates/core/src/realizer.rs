//! Constructive realization of saturated transfer systems on `C_{p^n q^m}`
//! for primes `p, q >= 5`.
//!
//! The construction fills the grid `[n] x [m]` one cell at a time. Column
//! `b = 0` is the `p`-chain, built by [`chain_realize`]. Each later row is
//! started with [`base_case_extend`] along the `q`-axis and then swept left to
//! right with [`induction_step`], which glues the set `J` below the cell and
//! the set `I` to its left into a set `K` on the cell. Every intermediate set
//! is checked: it must realize the restricted system, reduce onto every
//! earlier cell, and satisfy the (star) property.
//!
//! Notation used throughout, for a step landing on cell `(n, m+1)`:
//!
//! * `P = p^(n-1) q^m` is the unit,
//! * `I` lives mod `Q = P q`, `J` mod `R = P p`, `K` mod `M = P p q`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::indexing::{IndexingSet, ResidueSet};
use crate::lattice::{CyclicOrder, Subgroup};
use crate::transfer::TransferSystem;

/// Smallest prime the construction supports.
pub const MIN_PRIME: u64 = 5;

/// Coefficients with `u q + v p = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BezoutChoice {
    pub u: i64,
    pub v: i64,
}

impl BezoutChoice {
    pub fn check(&self, p: u64, q: u64) -> Result<()> {
        let lhs = self.u as i128 * q as i128 + self.v as i128 * p as i128;
        if lhs != 1 {
            return Err(Error::Precondition(format!(
                "u*q + v*p = {}*{} + {}*{} = {lhs}, expected 1",
                self.u, q, self.v, p
            )));
        }
        Ok(())
    }
}

/// Extended Euclid on `(q, p)`; the result satisfies `|u| < p`, `|v| < q`.
pub fn choose_bezout(p: u64, q: u64) -> Result<BezoutChoice> {
    let (g, u, v) = arith::ext_gcd(q as i64, p as i64);
    if g != 1 {
        return Err(Error::Domain(format!("gcd({p}, {q}) = {g}, expected 1")));
    }
    let choice = BezoutChoice { u, v };
    choice.check(p, q)?;
    debug_assert!(u.unsigned_abs() < p.max(2) && v.unsigned_abs() < q.max(2));
    Ok(choice)
}

/// Validates a caller-supplied pair, or falls back to [`choose_bezout`].
pub fn bezout_or_default(p: u64, q: u64, custom: Option<BezoutChoice>) -> Result<BezoutChoice> {
    match custom {
        Some(c) => {
            c.check(p, q)?;
            Ok(c)
        }
        None => choose_bezout(p, q),
    }
}

/// How representatives `j_i` and `i_j` are picked from a residue class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetPolicy {
    /// Smallest member of the class.
    #[default]
    Canonical,
    /// Smallest non-zero member of the class, falling back to 0. On `C_35`
    /// this reproduces the hand computation with `i_j = 1` for every `j`.
    SmallestNonzero,
}

impl std::str::FromStr for OffsetPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(OffsetPolicy::Canonical),
            "paper-c35" | "smallest-nonzero" => Ok(OffsetPolicy::SmallestNonzero),
            other => Err(Error::Parse(format!(
                "unknown offset policy {other:?} (expected canonical or paper-c35)"
            ))),
        }
    }
}

impl OffsetPolicy {
    fn pick(self, class: &[u64]) -> Option<u64> {
        match self {
            OffsetPolicy::Canonical => class.first().copied(),
            OffsetPolicy::SmallestNonzero => class
                .iter()
                .copied()
                .find(|&x| x != 0)
                .or_else(|| class.first().copied()),
        }
    }
}

/// Shape of one induction step landing on cell `(n, m+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepContext {
    pub p: u64,
    pub q: u64,
    pub n: u32,
    pub m: u32,
}

impl StepContext {
    pub fn new(p: u64, q: u64, n: u32, m: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("an induction step needs n >= 1".into()));
        }
        for r in [p, q] {
            if r < MIN_PRIME {
                return Err(Error::UnsupportedPrime(r));
            }
        }
        let ctx = StepContext { p, q, n, m };
        ctx.target_modulus_checked()?;
        Ok(ctx)
    }

    fn target_modulus_checked(&self) -> Result<u64> {
        self.p
            .checked_pow(self.n)
            .and_then(|pn| {
                self.q
                    .checked_pow(self.m + 1)
                    .and_then(|qm| pn.checked_mul(qm))
            })
            .ok_or(Error::Overflow)
    }

    /// `P = p^(n-1) q^m`.
    pub fn unit(&self) -> u64 {
        self.p.pow(self.n - 1) * self.q.pow(self.m)
    }
    /// `Q = p^(n-1) q^(m+1)`, the modulus of `I`.
    pub fn left_modulus(&self) -> u64 {
        self.unit() * self.q
    }
    /// `R = p^n q^m`, the modulus of `J`.
    pub fn lower_modulus(&self) -> u64 {
        self.unit() * self.p
    }
    /// `M = p^n q^(m+1)`, the modulus of `K`.
    pub fn target_modulus(&self) -> u64 {
        self.unit() * self.p * self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeftOffset {
    pub i: u64,
    pub j_i: u64,
    pub gamma: i64,
    pub r: u64,
    pub r_prime: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerOffset {
    pub j: u64,
    pub i_j: u64,
    pub delta: i64,
    pub s: u64,
    pub s_prime: i64,
}

/// Matching data between `I` and `J` for one induction step.
///
/// For `i in I`: `i = j_i + gamma_i P` with `j_i in J`, and
/// `-u gamma_i = r'_i p + r_i`, `0 <= r_i < p`. Symmetrically for `j in J`
/// with `delta_j`, `s_j`, `s'_j` and `q`. `r_0` and `s_0` are never zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetData {
    pub left: Vec<LeftOffset>,
    pub lower: Vec<LowerOffset>,
    /// Smallest `0 < alpha < p` with `alpha P in J`.
    pub alpha: Option<u64>,
    /// Smallest `0 < beta < q` with `beta P in I`.
    pub beta: Option<u64>,
}

impl OffsetData {
    pub fn r(&self, i: u64) -> Option<u64> {
        self.left
            .binary_search_by_key(&i, |o| o.i)
            .ok()
            .map(|k| self.left[k].r)
    }

    pub fn s(&self, j: u64) -> Option<u64> {
        self.lower
            .binary_search_by_key(&j, |o| o.j)
            .ok()
            .map(|k| self.lower[k].s)
    }

    /// Re-checks every defining identity.
    pub fn audit(
        &self,
        ctx: &StepContext,
        bez: BezoutChoice,
        i_set: &IndexingSet,
        j_set: &IndexingSet,
    ) -> Result<()> {
        bez.check(ctx.p, ctx.q)?;
        let unit = ctx.unit() as i128;
        let (p, q) = (ctx.p as i128, ctx.q as i128);
        let fail = |what: String| Err(Error::Postcondition(format!("offset audit: {what}")));
        if self.left.iter().map(|o| o.i).ne(i_set.iter()) {
            return fail("left offsets do not cover I".into());
        }
        if self.lower.iter().map(|o| o.j).ne(j_set.iter()) {
            return fail("lower offsets do not cover J".into());
        }
        for o in &self.left {
            if !j_set.contains(o.j_i) || o.i as i128 != o.j_i as i128 + o.gamma as i128 * unit {
                return fail(format!("i = {} is not j_i + gamma P", o.i));
            }
            let lhs = -(bez.u as i128) * o.gamma as i128;
            if lhs != o.r_prime as i128 * p + o.r as i128 || o.r as i128 >= p {
                return fail(format!("bad remainder r for i = {}", o.i));
            }
        }
        for o in &self.lower {
            if !i_set.contains(o.i_j) || o.j as i128 != o.i_j as i128 + o.delta as i128 * unit {
                return fail(format!("j = {} is not i_j + delta P", o.j));
            }
            let lhs = -(bez.v as i128) * o.delta as i128;
            if lhs != o.s_prime as i128 * q + o.s as i128 || o.s as i128 >= q {
                return fail(format!("bad remainder s for j = {}", o.j));
            }
        }
        if self.r(0) == Some(0) || self.s(0) == Some(0) {
            return fail("r_0 or s_0 is zero".into());
        }
        Ok(())
    }
}

/// Members of `set` grouped by residue mod `unit`, ascending within a class.
fn classes(set: &IndexingSet, unit: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new(); unit as usize];
    for x in set.iter() {
        out[(x % unit) as usize].push(x);
    }
    out
}

fn div_rem(a: i128, b: i128) -> (i64, u64) {
    let r = a.rem_euclid(b);
    (((a - r) / b) as i64, r as u64)
}

/// Chooses `j_i, gamma_i, i_j, delta_j` and the remainders, repairing `r_0`
/// and `s_0` with the smallest available `alpha` and `beta`.
pub fn compute_offsets(
    ctx: &StepContext,
    i_set: &IndexingSet,
    j_set: &IndexingSet,
    bez: BezoutChoice,
    policy: OffsetPolicy,
) -> Result<OffsetData> {
    bez.check(ctx.p, ctx.q)?;
    let unit = ctx.unit();
    expect_modulus("I", i_set, ctx.left_modulus())?;
    expect_modulus("J", j_set, ctx.lower_modulus())?;
    if i_set.reduce(unit)? != j_set.reduce(unit)? {
        return Err(Error::Precondition(format!(
            "I mod {unit} differs from J mod {unit}"
        )));
    }
    let alpha = (1..ctx.p).find(|a| j_set.contains(a * unit));
    let beta = (1..ctx.q).find(|b| i_set.contains(b * unit));
    let (p, q, u, v) = (ctx.p as i128, ctx.q as i128, bez.u as i128, bez.v as i128);

    let j_classes = classes(j_set, unit);
    let mut left = Vec::with_capacity(i_set.len());
    for i in i_set.iter() {
        let j_i = policy
            .pick(&j_classes[(i % unit) as usize])
            .expect("classes match");
        let gamma = (i as i128 - j_i as i128) / unit as i128;
        let (r_prime, r) = div_rem(-u * gamma, p);
        left.push(LeftOffset {
            i,
            j_i,
            gamma: gamma as i64,
            r,
            r_prime,
        });
    }
    if left[0].r == 0 {
        let a = alpha.ok_or_else(|| {
            Error::StarViolation(format!("r_0 = 0 and J has no non-zero multiple of {unit}"))
        })?;
        let gamma = -(a as i128);
        let (r_prime, r) = div_rem(-u * gamma, p);
        left[0] = LeftOffset {
            i: 0,
            j_i: a * unit,
            gamma: gamma as i64,
            r,
            r_prime,
        };
    }

    let i_classes = classes(i_set, unit);
    let mut lower = Vec::with_capacity(j_set.len());
    for j in j_set.iter() {
        let i_j = policy
            .pick(&i_classes[(j % unit) as usize])
            .expect("classes match");
        let delta = (j as i128 - i_j as i128) / unit as i128;
        let (s_prime, s) = div_rem(-v * delta, q);
        lower.push(LowerOffset {
            j,
            i_j,
            delta: delta as i64,
            s,
            s_prime,
        });
    }
    if lower[0].s == 0 {
        let b = beta.ok_or_else(|| {
            Error::StarViolation(format!("s_0 = 0 and I has no non-zero multiple of {unit}"))
        })?;
        let delta = -(b as i128);
        let (s_prime, s) = div_rem(-v * delta, q);
        lower[0] = LowerOffset {
            j: 0,
            i_j: b * unit,
            delta: delta as i64,
            s,
            s_prime,
        };
    }

    let data = OffsetData {
        left,
        lower,
        alpha,
        beta,
    };
    data.audit(ctx, bez, i_set, j_set)?;
    Ok(data)
}

/// The seven shapes of the top-right unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SquareCase {
    I,
    II,
    III,
    IVa,
    IVb,
    IVc,
    IVd,
}

impl fmt::Display for SquareCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SquareCase::I => "I",
            SquareCase::II => "II",
            SquareCase::III => "III",
            SquareCase::IVa => "IVa",
            SquareCase::IVb => "IVb",
            SquareCase::IVc => "IVc",
            SquareCase::IVd => "IVd",
        };
        f.write_str(s)
    }
}

impl SquareCase {
    /// `right = (n,m) -> (n,m+1)`, `top = (n-1,m+1) -> (n,m+1)`,
    /// `left = (n-1,m) -> (n-1,m+1)`, `bottom = (n-1,m) -> (n,m)`.
    pub fn from_edges(right: bool, top: bool, left: bool, bottom: bool) -> SquareCase {
        match (right, top, left, bottom) {
            (true, true, _, _) => SquareCase::III,
            (true, false, _, _) => SquareCase::I,
            (false, true, _, _) => SquareCase::II,
            (false, false, true, true) => SquareCase::IVa,
            (false, false, false, false) => SquareCase::IVb,
            (false, false, true, false) => SquareCase::IVc,
            (false, false, false, true) => SquareCase::IVd,
        }
    }

    /// `(right, top)` admissibility the constructed set must show.
    pub fn upper_edges(self) -> (bool, bool) {
        match self {
            SquareCase::I => (true, false),
            SquareCase::II => (false, true),
            SquareCase::III => (true, true),
            _ => (false, false),
        }
    }

    /// `(left, bottom)` admissibility forced on `I` and `J` by saturation.
    pub fn lower_edges(self) -> (bool, bool) {
        match self {
            SquareCase::I | SquareCase::IVc => (true, false),
            SquareCase::II | SquareCase::IVd => (false, true),
            SquareCase::III | SquareCase::IVa => (true, true),
            SquareCase::IVb => (false, false),
        }
    }
}

/// Classifies the square with corners `(n-1,m)`, `(n,m)`, `(n-1,m+1)`,
/// `(n,m+1)`.
pub fn classify_square(t: &TransferSystem, n: u32, m: u32) -> Result<SquareCase> {
    let order = t.order();
    if n == 0 || n > order.n() || m + 1 > order.m() {
        return Err(Error::Precondition(format!(
            "square at ({n},{}) does not fit in [{}]x[{}]",
            m + 1,
            order.n(),
            order.m()
        )));
    }
    t.require_saturated()?;
    let s = Subgroup::new;
    let right = t.contains(s(n, m), s(n, m + 1));
    let top = t.contains(s(n - 1, m + 1), s(n, m + 1));
    let left = t.contains(s(n - 1, m), s(n - 1, m + 1));
    let bottom = t.contains(s(n - 1, m), s(n, m));
    Ok(SquareCase::from_edges(right, top, left, bottom))
}

fn expect_modulus(name: &str, set: &IndexingSet, expected: u64) -> Result<()> {
    if set.modulus() != expected {
        return Err(Error::Precondition(format!(
            "{name} must live mod {expected}, got mod {}",
            set.modulus()
        )));
    }
    Ok(())
}

/// Accumulates `±x` into a residue set mod `M`.
struct SymmetricBuilder(ResidueSet);

impl SymmetricBuilder {
    fn new(modulus: u64) -> Result<Self> {
        Ok(SymmetricBuilder(ResidueSet::empty(modulus)?))
    }
    fn add(&mut self, x: i128) {
        self.0.insert_integer(x);
        self.0.insert_integer(-x);
    }
    fn remove(&mut self, x: i128) {
        self.0.remove_integer(x);
        self.0.remove_integer(-x);
    }
    fn seal(self) -> Result<IndexingSet> {
        IndexingSet::seal(self.0)
    }
}

/// Builds `K mod p^n q^(m+1)` from `J mod p^n q^m` and `I mod p^(n-1) q^(m+1)`.
pub fn induction_step(
    ctx: &StepContext,
    j_set: &IndexingSet,
    i_set: &IndexingSet,
    case: SquareCase,
    offsets: &OffsetData,
    bez: BezoutChoice,
) -> Result<IndexingSet> {
    bez.check(ctx.p, ctx.q)?;
    let unit = ctx.unit();
    let (q_mod, r_mod, m_mod) = (
        ctx.left_modulus(),
        ctx.lower_modulus(),
        ctx.target_modulus(),
    );
    expect_modulus("I", i_set, q_mod)?;
    expect_modulus("J", j_set, r_mod)?;
    let l_from_i = i_set.reduce(unit)?;
    if l_from_i != j_set.reduce(unit)? {
        return Err(Error::Precondition(format!(
            "I mod {unit} differs from J mod {unit}"
        )));
    }
    let left = i_set.residues().is_invariant(unit);
    let bottom = j_set.residues().is_invariant(unit);
    if (left, bottom) != case.lower_edges() {
        return Err(Error::Precondition(format!(
            "case {case} needs (left, bottom) = {:?} but I and J give ({left}, {bottom})",
            case.lower_edges()
        )));
    }
    offsets.audit(ctx, bez, i_set, j_set)?;

    let (pp, qq) = (ctx.p as i128, ctx.q as i128);
    let (unit_i, q_i, r_i) = (unit as i128, q_mod as i128, r_mod as i128);
    let r_of = |o: &LeftOffset| o.r as i128;
    let s_of = |o: &LowerOffset| o.s as i128;
    let mut k = SymmetricBuilder::new(m_mod)?;

    match case {
        SquareCase::I | SquareCase::III => {
            for o in &offsets.left {
                for t in 0..qq {
                    k.add(r_of(o) * q_i + o.i as i128 + t * r_i);
                }
            }
            for j in j_set.iter() {
                for t in 0..qq {
                    k.add(j as i128 + t * r_i);
                }
            }
        }
        SquareCase::II => {
            for i in i_set.iter() {
                for t in 0..pp {
                    k.add(i as i128 + t * q_i);
                }
            }
            for o in &offsets.lower {
                for t in 0..pp {
                    k.add(s_of(o) * r_i + o.j as i128 + t * q_i);
                }
            }
        }
        SquareCase::IVa => {
            // I and J are the full +P orbits of L = I mod P.
            let span = 2 * pp.max(qq);
            for l in l_from_i.iter() {
                for t in 0..span {
                    k.add(l as i128 + t * unit_i);
                }
            }
        }
        SquareCase::IVb => {
            // Neither shifted family contains 0 since r_0, s_0 != 0.
            k.add(0);
            for o in &offsets.left {
                k.add(r_of(o) * q_i + o.i as i128);
            }
            for o in &offsets.lower {
                k.add(s_of(o) * r_i + o.j as i128);
            }
        }
        SquareCase::IVc => {
            let alpha = offsets.alpha.ok_or_else(|| {
                Error::StarViolation(format!("case IVc needs a non-zero multiple of {unit} in J"))
            })? as i128;
            for o in &offsets.left {
                k.add(r_of(o) * q_i + o.i as i128);
            }
            for j in j_set.iter() {
                k.add(j as i128);
            }
            k.remove(r_i);
            k.add(r_i + alpha * bez.u as i128 * q_i);
            k.add(2 * r_i);
        }
        SquareCase::IVd => {
            let beta = offsets.beta.ok_or_else(|| {
                Error::StarViolation(format!("case IVd needs a non-zero multiple of {unit} in I"))
            })? as i128;
            for i in i_set.iter() {
                k.add(i as i128);
            }
            for o in &offsets.lower {
                k.add(s_of(o) * r_i + o.j as i128);
            }
            k.remove(q_i);
            k.add(q_i + beta * bez.v as i128 * r_i);
            k.add(2 * q_i);
        }
    }

    let k = k
        .seal()
        .map_err(|e| Error::Postcondition(format!("case {case}: {e}")))?;
    check_step_output(ctx, case, &k, j_set, i_set)?;
    Ok(k)
}

fn check_step_output(
    ctx: &StepContext,
    case: SquareCase,
    k: &IndexingSet,
    j_set: &IndexingSet,
    i_set: &IndexingSet,
) -> Result<()> {
    let (q_mod, r_mod) = (ctx.left_modulus(), ctx.lower_modulus());
    let fail = |what: String| Err(Error::Postcondition(format!("case {case}: {what}")));
    if k.reduce(r_mod)? != *j_set.residues() {
        return fail(format!("K mod {r_mod} differs from J"));
    }
    if k.reduce(q_mod)? != *i_set.residues() {
        return fail(format!("K mod {q_mod} differs from I"));
    }
    if !k.residues().has_nonzero_multiple_of(r_mod) {
        return fail(format!("K has no non-zero multiple of {r_mod}"));
    }
    if !k.residues().has_nonzero_multiple_of(q_mod) {
        return fail(format!("K has no non-zero multiple of {q_mod}"));
    }
    let witness = match case {
        SquareCase::IVa if ctx.q > ctx.p => Some(2 * q_mod),
        SquareCase::IVa => Some(2 * r_mod),
        SquareCase::IVc => Some(r_mod),
        SquareCase::IVd => Some(q_mod),
        _ => None,
    };
    if let Some(w) = witness.filter(|&w| k.contains(w % k.modulus())) {
        return fail(format!("K contains {w}"));
    }
    let right = k.residues().is_invariant(r_mod);
    let top = k.residues().is_invariant(q_mod);
    if (right, top) != case.upper_edges() {
        return fail(format!(
            "K admits (right, top) = ({right}, {top}), expected {:?}",
            case.upper_edges()
        ));
    }
    Ok(())
}

/// Extends an indexing set mod `r^m` to one mod `r^(m+1)` that reduces to
/// it, contains `r^m`, and admits the top cover `m -> m+1` exactly when
/// `admit_top` is set.
pub fn base_case_extend(
    j_set: &IndexingSet,
    admit_top: bool,
    r: u64,
    m: u32,
) -> Result<IndexingSet> {
    if r < MIN_PRIME {
        return Err(Error::UnsupportedPrime(r));
    }
    if !arith::is_prime(r) {
        return Err(Error::NotPrime(r));
    }
    let rm = r.checked_pow(m).ok_or(Error::Overflow)?;
    let modulus = rm.checked_mul(r).ok_or(Error::Overflow)?;
    expect_modulus("J", j_set, rm)?;
    let steps = if admit_top { r } else { 2 };
    let mut out = SymmetricBuilder::new(modulus)?;
    for j in j_set.iter() {
        for t in 0..steps {
            out.add(j as i128 + t as i128 * rm as i128);
        }
    }
    let out = out.seal()?;
    if out.reduce(rm)? != *j_set.residues() || !out.contains(rm % modulus) {
        return Err(Error::Postcondition(
            "chain extension does not restrict to J".into(),
        ));
    }
    if out.residues().is_invariant(rm) != admit_top {
        return Err(Error::Postcondition(
            "chain extension has the wrong top cover".into(),
        ));
    }
    Ok(out)
}

/// The successive sets of a chain realization, level 0 first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainRealization {
    pub prime: u64,
    pub levels: Vec<IndexingSet>,
}

impl ChainRealization {
    pub fn set(&self) -> &IndexingSet {
        self.levels.last().expect("level 0 always present")
    }
}

/// Realizes a saturated system on a chain box `[k] x [0]` or `[0] x [k]`.
/// The result contains `r^i` for every `0 <= i < k`.
pub fn chain_realize(t: &TransferSystem) -> Result<ChainRealization> {
    let order = t.order();
    let (prime, len, along_p) = match (order.n(), order.m()) {
        (k, 0) => (order.p(), k, true),
        (0, k) => (order.q(), k, false),
        (n, m) => {
            return Err(Error::Domain(format!("[{n}]x[{m}] is not a chain")));
        }
    };
    t.require_saturated()?;
    let cell = |i: u32| {
        if along_p {
            Subgroup::new(i, 0)
        } else {
            Subgroup::new(0, i)
        }
    };
    let mut levels = vec![IndexingSet::trivial(1)?];
    for i in 0..len {
        let admit = t.contains(cell(i), cell(i + 1));
        let next = base_case_extend(levels.last().unwrap(), admit, prime, i)?;
        levels.push(next);
    }
    Ok(ChainRealization { prime, levels })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RealizeOptions {
    pub bezout: Option<BezoutChoice>,
    pub policy: OffsetPolicy,
}

/// How one grid cell was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum CellStep {
    Origin,
    Chain {
        prime: u64,
        admit_top: bool,
    },
    Induction {
        case: SquareCase,
        alpha: Option<u64>,
        beta: Option<u64>,
        r0: u64,
        s0: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellTrace {
    pub cell: Subgroup,
    pub modulus: u64,
    pub size: usize,
    #[serde(flatten)]
    pub step: CellStep,
}

/// Output of the grid driver, with every intermediate set.
#[derive(Debug, Clone)]
pub struct Realization {
    pub system: TransferSystem,
    pub bezout: Option<BezoutChoice>,
    pub policy: OffsetPolicy,
    /// `grid[a][b]` realizes the restriction to `[a] x [b]`.
    pub grid: Vec<Vec<IndexingSet>>,
    pub trace: Vec<CellTrace>,
}

impl Realization {
    pub fn set(&self) -> &IndexingSet {
        let order = self.system.order();
        &self.grid[order.n() as usize][order.m() as usize]
    }

    pub fn cell(&self, a: u32, b: u32) -> &IndexingSet {
        &self.grid[a as usize][b as usize]
    }

    pub fn certificate(&self) -> Result<Certificate> {
        let order = *self.system.order();
        let set = self.set().clone();
        let realized = set.realized_system(&order)?;
        Ok(Certificate {
            schema: 1,
            order,
            input: self.system.clone(),
            bezout: self.bezout,
            offset_policy: self.policy,
            cells: self.trace.clone(),
            universe: set.describe_universe(),
            indexing_set: set.clone(),
            verdicts: Verdicts {
                saturated_input: self.system.is_saturated(),
                realizes_input: realized == self.system,
                star: set.star_holds(&order)?,
                grid_coherent: self.grid_coherent()?,
            },
        })
    }

    fn grid_coherent(&self) -> Result<bool> {
        let order = self.system.order();
        for a in 0..=order.n() {
            for b in 0..=order.m() {
                if !coherent_with_lower_cells(order, &self.grid, a, b)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub saturated_input: bool,
    pub realizes_input: bool,
    pub star: bool,
    pub grid_coherent: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.saturated_input && self.realizes_input && self.star && self.grid_coherent
    }
}

/// JSON certificate for one realization.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub schema: u32,
    pub order: CyclicOrder,
    pub input: TransferSystem,
    pub bezout: Option<BezoutChoice>,
    pub offset_policy: OffsetPolicy,
    pub cells: Vec<CellTrace>,
    pub indexing_set: IndexingSet,
    pub universe: String,
    pub verdicts: Verdicts,
}

fn coherent_with_lower_cells(
    order: &CyclicOrder,
    grid: &[Vec<IndexingSet>],
    a: u32,
    b: u32,
) -> Result<bool> {
    let top = &grid[a as usize][b as usize];
    for a2 in 0..=a {
        for b2 in 0..=b {
            let e = order.p().pow(a2) * order.q().pow(b2);
            if top.reduce(e)? != *grid[a2 as usize][b2 as usize].residues() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Primes that divide the group order must be at least 5.
fn check_primes(order: &CyclicOrder) -> Result<()> {
    if order.n() > 0 && order.p() < MIN_PRIME {
        return Err(Error::UnsupportedPrime(order.p()));
    }
    if order.m() > 0 && order.q() < MIN_PRIME {
        return Err(Error::UnsupportedPrime(order.q()));
    }
    Ok(())
}

/// An indexing set realizing `t`.
pub fn realize(t: &TransferSystem) -> Result<IndexingSet> {
    Ok(realize_with(t, &RealizeOptions::default())?.set().clone())
}

/// The grid driver. Every cell is verified as soon as it is built.
pub fn realize_with(t: &TransferSystem, opts: &RealizeOptions) -> Result<Realization> {
    let order = *t.order();
    check_primes(&order)?;
    t.require_saturated()?;
    let (n, m) = (order.n(), order.m());
    let (p, q) = (order.p(), order.q());
    let bezout = if n > 0 && m > 0 {
        Some(bezout_or_default(p, q, opts.bezout)?)
    } else {
        opts.bezout
    };

    let mut grid: Vec<Vec<IndexingSet>> = vec![Vec::with_capacity(m as usize + 1); n as usize + 1];
    let mut trace = Vec::new();

    let column = chain_realize(&t.restrict(n, 0)?)?;
    for (a, set) in column.levels.into_iter().enumerate() {
        let step = if a == 0 {
            CellStep::Origin
        } else {
            let admit_top = t.contains(Subgroup::new(a as u32 - 1, 0), Subgroup::new(a as u32, 0));
            CellStep::Chain {
                prime: p,
                admit_top,
            }
        };
        trace.push(CellTrace {
            cell: Subgroup::new(a as u32, 0),
            modulus: set.modulus(),
            size: set.len(),
            step,
        });
        grid[a].push(set);
        verify_cell(t, &grid, a as u32, 0)?;
    }

    for b in 0..m {
        let admit_top = t.contains(Subgroup::new(0, b), Subgroup::new(0, b + 1));
        let first = base_case_extend(&grid[0][b as usize], admit_top, q, b)?;
        trace.push(CellTrace {
            cell: Subgroup::new(0, b + 1),
            modulus: first.modulus(),
            size: first.len(),
            step: CellStep::Chain {
                prime: q,
                admit_top,
            },
        });
        grid[0].push(first);
        verify_cell(t, &grid, 0, b + 1)?;

        for a in 1..=n {
            let bez = bezout.expect("n > 0 and m > 0 here");
            let ctx = StepContext::new(p, q, a, b)?;
            let local = t.restrict(a, b + 1)?;
            let case = classify_square(&local, a, b)?;
            let j_set = &grid[a as usize][b as usize];
            let i_set = &grid[a as usize - 1][b as usize + 1];
            let offsets = compute_offsets(&ctx, i_set, j_set, bez, opts.policy)?;
            let k = induction_step(&ctx, j_set, i_set, case, &offsets, bez)?;
            trace.push(CellTrace {
                cell: Subgroup::new(a, b + 1),
                modulus: k.modulus(),
                size: k.len(),
                step: CellStep::Induction {
                    case,
                    alpha: offsets.alpha,
                    beta: offsets.beta,
                    r0: offsets.r(0).expect("0 is in I"),
                    s0: offsets.s(0).expect("0 is in J"),
                },
            });
            grid[a as usize].push(k);
            verify_cell(t, &grid, a, b + 1)?;
        }
    }

    Ok(Realization {
        system: t.clone(),
        bezout,
        policy: opts.policy,
        grid,
        trace,
    })
}

fn verify_cell(t: &TransferSystem, grid: &[Vec<IndexingSet>], a: u32, b: u32) -> Result<()> {
    let order = t.order();
    let local_order = order.sub_box(a, b)?;
    let set = &grid[a as usize][b as usize];
    let expected = t.restrict(a, b)?;
    if set.realized_system(&local_order)? != expected {
        return Err(Error::Postcondition(format!(
            "cell ({a},{b}) does not realize the restricted system"
        )));
    }
    if a >= 1 && !set.star_holds(&local_order)? {
        return Err(Error::Postcondition(format!(
            "cell ({a},{b}) fails the (star) property"
        )));
    }
    if !coherent_with_lower_cells(order, grid, a, b)? {
        return Err(Error::Postcondition(format!(
            "cell ({a},{b}) does not reduce onto earlier cells"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::enumerate_all;

    const fn s(a: u32, b: u32) -> Subgroup {
        Subgroup::new(a, b)
    }

    fn set(modulus: u64, members: &[u64]) -> IndexingSet {
        IndexingSet::new(modulus, members.iter().copied()).unwrap()
    }

    #[test]
    fn chain_extension_examples() {
        let triv = IndexingSet::trivial(1).unwrap();
        assert_eq!(
            base_case_extend(&triv, false, 7, 0).unwrap().to_vec(),
            vec![0, 1, 6]
        );
        assert_eq!(
            base_case_extend(&triv, true, 5, 0).unwrap().to_vec(),
            vec![0, 1, 2, 3, 4]
        );
        let j = set(7, &[0, 1, 6]);
        assert_eq!(
            base_case_extend(&j, false, 7, 1).unwrap().to_vec(),
            vec![0, 1, 6, 7, 8, 13, 36, 41, 42, 43, 48]
        );
        assert_eq!(
            base_case_extend(&triv, true, 3, 0),
            Err(Error::UnsupportedPrime(3))
        );
        assert!(matches!(
            base_case_extend(&j, true, 5, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn chain_extension_keeps_top_out() {
        let mut j = IndexingSet::trivial(1).unwrap();
        for m in 0..4 {
            let next = base_case_extend(&j, false, 5, m).unwrap();
            let rm = 5u64.pow(m);
            assert!(next.contains(rm));
            assert!(!next.contains(2 * rm));
            j = next;
        }
    }

    #[test]
    fn chain_realize_examples() {
        let c5 = CyclicOrder::new(5, 1, 7, 0).unwrap();
        let ids = TransferSystem::identities(c5);
        assert_eq!(chain_realize(&ids).unwrap().set().to_vec(), vec![0, 1, 4]);

        let c25 = CyclicOrder::new(5, 2, 7, 0).unwrap();
        let full = TransferSystem::complete(c25);
        assert_eq!(chain_realize(&full).unwrap().set().len(), 25);

        for t in enumerate_all(c25, true).unwrap() {
            let k = chain_realize(&t).unwrap();
            assert_eq!(k.set().realized_system(&c25).unwrap(), t);
        }

        let square = CyclicOrder::new(5, 1, 7, 1).unwrap();
        assert!(matches!(
            chain_realize(&TransferSystem::identities(square)),
            Err(Error::Domain(_))
        ));
        let bad =
            TransferSystem::generate(CyclicOrder::new(5, 2, 7, 0).unwrap(), &[(s(0, 0), s(2, 0))])
                .unwrap();
        assert!(matches!(chain_realize(&bad), Err(Error::NotSaturated(_))));
    }

    #[test]
    fn q_axis_chain() {
        let c49 = CyclicOrder::new(5, 0, 7, 2).unwrap();
        let t = TransferSystem::from_nontrivial(c49, &[(s(0, 1), s(0, 2))]).unwrap();
        let k = chain_realize(&t).unwrap();
        assert_eq!(k.prime, 7);
        assert_eq!(k.set().realized_system(&c49).unwrap(), t);
    }

    #[test]
    fn bezout() {
        let c = choose_bezout(5, 7).unwrap();
        assert_eq!(7 * c.u + 5 * c.v, 1);
        assert!(c.u.abs() < 5 && c.v.abs() < 7);
        let c = choose_bezout(7, 11).unwrap();
        assert_eq!(11 * c.u + 7 * c.v, 1);
        let custom = bezout_or_default(5, 7, Some(BezoutChoice { u: -2, v: 3 })).unwrap();
        assert_eq!(custom, BezoutChoice { u: -2, v: 3 });
        assert!(bezout_or_default(5, 7, Some(BezoutChoice { u: 1, v: 1 })).is_err());
        assert!(choose_bezout(5, 10).is_err());
    }

    fn c35_step() -> (StepContext, IndexingSet, IndexingSet) {
        let ctx = StepContext::new(5, 7, 1, 0).unwrap();
        (ctx, set(7, &[0, 1, 6]), IndexingSet::full(5).unwrap())
    }

    #[test]
    fn offsets_with_hand_choices() {
        let (ctx, i, j) = c35_step();
        let bez = BezoutChoice { u: -2, v: 3 };
        let off = compute_offsets(&ctx, &i, &j, bez, OffsetPolicy::SmallestNonzero).unwrap();
        let s: Vec<u64> = off.lower.iter().map(|o| o.s).collect();
        assert_eq!(s, vec![3, 0, 4, 1, 5]);
        assert!(off
            .lower
            .iter()
            .all(|o| o.i_j == 1 && o.delta == o.j as i64 - 1));
        assert_eq!(off.beta, Some(1));
        assert_eq!(off.alpha, Some(1));
    }

    #[test]
    fn canonical_offsets_repair_zero_remainders() {
        let (ctx, i, j) = c35_step();
        let bez = choose_bezout(5, 7).unwrap();
        let off = compute_offsets(&ctx, &i, &j, bez, OffsetPolicy::Canonical).unwrap();
        // gamma_0 = 0 gives r_0 = 0 before the repair.
        assert_eq!(off.left[0].j_i, off.alpha.unwrap() * ctx.unit());
        assert_ne!(off.r(0), Some(0));
        assert_ne!(off.s(0), Some(0));
        off.audit(&ctx, bez, &i, &j).unwrap();
    }

    #[test]
    fn offsets_reject_mismatch_and_missing_multiples() {
        let ctx = StepContext::new(5, 7, 1, 0).unwrap();
        let bez = choose_bezout(5, 7).unwrap();
        // With P = 1 the reductions always agree; use P = 7 instead.
        let ctx2 = StepContext::new(5, 7, 1, 1).unwrap();
        let i = set(49, &[0, 1, 48]);
        let j = set(35, &[0, 2, 33]);
        assert!(matches!(
            compute_offsets(&ctx2, &i, &j, bez, OffsetPolicy::Canonical),
            Err(Error::Precondition(_))
        ));
        // J = {0,1,4} mod 5 has no non-zero multiple of 1 below 5? It does (1).
        // I = {0} mod 7 has none, so the s_0 repair fails.
        let i = set(7, &[0]);
        let j = set(5, &[0]);
        assert!(matches!(
            compute_offsets(&ctx, &i, &j, bez, OffsetPolicy::Canonical),
            Err(Error::StarViolation(_))
        ));
    }

    #[test]
    fn square_classification() {
        let o = CyclicOrder::new(5, 1, 7, 1).unwrap();
        let t = TransferSystem::from_nontrivial(o, &[(s(0, 0), s(1, 0))]).unwrap();
        assert_eq!(classify_square(&t, 1, 0).unwrap(), SquareCase::IVd);
        assert_eq!(
            classify_square(&TransferSystem::complete(o), 1, 0).unwrap(),
            SquareCase::III
        );
        assert_eq!(
            classify_square(&TransferSystem::identities(o), 1, 0).unwrap(),
            SquareCase::IVb
        );
        let unsat = TransferSystem::generate(o, &[(s(0, 0), s(1, 1))]).unwrap();
        assert!(matches!(
            classify_square(&unsat, 1, 0),
            Err(Error::NotSaturated(_))
        ));
        assert!(classify_square(&t, 0, 0).is_err());
    }

    // Each saturated system on the square hits a distinct case.
    #[test]
    fn all_cases_occur_on_the_square() {
        let o = CyclicOrder::new(5, 1, 7, 1).unwrap();
        let mut cases: Vec<_> = enumerate_all(o, true)
            .unwrap()
            .iter()
            .map(|t| classify_square(t, 1, 0).unwrap().to_string())
            .collect();
        cases.sort();
        assert_eq!(cases, vec!["I", "II", "III", "IVa", "IVb", "IVc", "IVd"]);
    }

    #[test]
    fn c35_hand_computation() {
        let (ctx, i, j) = c35_step();
        let bez = BezoutChoice { u: -2, v: 3 };
        let off = compute_offsets(&ctx, &i, &j, bez, OffsetPolicy::SmallestNonzero).unwrap();
        let k = induction_step(&ctx, &j, &i, SquareCase::IVd, &off, bez).unwrap();
        assert_eq!(
            k.to_vec(),
            vec![0, 1, 6, 8, 13, 14, 15, 20, 21, 22, 27, 29, 34]
        );
    }

    #[test]
    fn case_mismatch_is_rejected() {
        let (ctx, i, j) = c35_step();
        let bez = BezoutChoice { u: -2, v: 3 };
        let off = compute_offsets(&ctx, &i, &j, bez, OffsetPolicy::Canonical).unwrap();
        // I = {0,1,6} is not 1-invariant, so IVa is impossible.
        assert!(matches!(
            induction_step(&ctx, &j, &i, SquareCase::IVa, &off, bez),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            StepContext::new(3, 7, 1, 0),
            Err(Error::UnsupportedPrime(3))
        ));
    }

    #[test]
    fn c25_chain_matches_closed_form() {
        let c25 = CyclicOrder::new(5, 2, 7, 0).unwrap();
        let t = TransferSystem::from_nontrivial(c25, &[(s(1, 0), s(2, 0))]).unwrap();
        let k = chain_realize(&t).unwrap();
        let mut expected = ResidueSet::empty(25).unwrap();
        for base in [0i128, 1, 4] {
            for i in 0..5 {
                expected.insert_integer(base + 5 * i);
                expected.insert_integer(-(base + 5 * i));
            }
        }
        assert_eq!(*k.set().residues(), expected);
        assert_eq!(
            k.set().to_vec(),
            vec![0, 1, 4, 5, 6, 9, 10, 11, 14, 15, 16, 19, 20, 21, 24]
        );
    }

    #[test]
    fn realize_round_trips_on_small_boxes() {
        for (p, q) in [(5, 7), (7, 5), (5, 11)] {
            for (n, m) in [(1, 1), (2, 1), (1, 2), (0, 2), (2, 0)] {
                let o = CyclicOrder::new(p, n, q, m).unwrap();
                for t in enumerate_all(o, true).unwrap() {
                    let r = realize_with(&t, &RealizeOptions::default()).unwrap();
                    assert_eq!(r.set().realized_system(&o).unwrap(), t);
                    assert!(r.set().star_holds(&o).unwrap());
                    assert!(r.certificate().unwrap().verdicts.all());
                }
            }
        }
    }

    #[test]
    fn realize_rejects_bad_input() {
        let o = CyclicOrder::new(2, 1, 5, 1).unwrap();
        assert_eq!(
            realize(&TransferSystem::identities(o)),
            Err(Error::UnsupportedPrime(2))
        );
        let o = CyclicOrder::new(5, 1, 7, 1).unwrap();
        let unsat = TransferSystem::generate(o, &[(s(0, 0), s(1, 1))]).unwrap();
        assert!(matches!(realize(&unsat), Err(Error::NotSaturated(_))));
        // An exponent-zero axis does not constrain its prime.
        let o = CyclicOrder::new(5, 2, 2, 0).unwrap();
        assert!(realize(&TransferSystem::complete(o)).is_ok());
    }

    // The excluded element depends on which prime is larger.
    #[test]
    fn iva_witness_follows_larger_prime() {
        for (p, q) in [(5u64, 7u64), (7, 5)] {
            let o = CyclicOrder::new(p, 1, q, 1).unwrap();
            let t = TransferSystem::from_nontrivial(o, &[(s(0, 0), s(1, 0)), (s(0, 0), s(0, 1))])
                .unwrap();
            assert_eq!(classify_square(&t, 1, 0).unwrap(), SquareCase::IVa);
            let k = realize(&t).unwrap();
            assert!(!k.contains(2 * p.max(q)));
            assert_eq!(k.realized_system(&o).unwrap(), t);
        }
    }

    #[test]
    fn policy_names() {
        assert_eq!(
            "canonical".parse::<OffsetPolicy>().unwrap(),
            OffsetPolicy::Canonical
        );
        assert_eq!(
            "paper-c35".parse::<OffsetPolicy>().unwrap(),
            OffsetPolicy::SmallestNonzero
        );
        assert!("other".parse::<OffsetPolicy>().is_err());
    }
}
