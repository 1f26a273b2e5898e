//! Exact coefficient arithmetic: rationals over pluggable semiring modes,
//! finite multisets with a total element order, and formal linear combinations.
//!
//! Everything here is exact; no floating point is used anywhere in the crate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// An exact rational scalar. The denominator is always positive and the
/// fraction is kept in lowest terms (both maintained by the backing rational).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar(BigRational);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den` with `den != 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn factorial(n: usize) -> Self {
        let mut acc = BigInt::one();
        for k in 2..=n {
            acc *= BigInt::from(k);
        }
        Scalar(BigRational::from_integer(acc))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        Scalar(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        Scalar(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        Scalar(&self.0 * &other.0)
    }

    pub fn neg(&self) -> Scalar {
        Scalar(-self.0.clone())
    }

    /// Exact division; panics on a zero divisor.
    pub fn div(&self, other: &Scalar) -> Scalar {
        assert!(!other.is_zero(), "division by zero");
        Scalar(&self.0 / &other.0)
    }

    pub fn recip_int(n: usize) -> Scalar {
        assert!(n != 0);
        Scalar(BigRational::new(BigInt::one(), BigInt::from(n)))
    }

    /// Parse `p`, `-p` or `p/q` in decimal.
    pub fn parse(text: &str) -> Option<Scalar> {
        let text = text.trim();
        let (num, den) = match text.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (text, "1"),
        };
        let n: BigInt = num.parse().ok()?;
        let d: BigInt = den.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Scalar(BigRational::new(n, d)))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// The coefficient domain in force for a computation.
///
/// `Bool` is the qualitative semiring {0,1} with 1+1=1, `Nat` the
/// non-negative integers, `Rat` the full field of rationals.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SemiringMode {
    Bool,
    Nat,
    Rat,
}

impl SemiringMode {
    /// Check that `s` is a legal scalar in this mode.
    pub fn admits(&self, s: &Scalar) -> Result<(), AlgebraError> {
        match self {
            SemiringMode::Bool => {
                if s.is_zero() || s.is_one() {
                    Ok(())
                } else {
                    Err(AlgebraError::ModeViolation(format!(
                        "{} is not a boolean scalar",
                        s
                    )))
                }
            }
            SemiringMode::Nat => {
                if !s.is_negative() && s.is_integer() {
                    Ok(())
                } else {
                    Err(AlgebraError::ModeViolation(format!(
                        "{} is not a natural number",
                        s
                    )))
                }
            }
            SemiringMode::Rat => Ok(()),
        }
    }

    /// Mode-aware addition; under `Bool` this is idempotent (1+1=1).
    pub fn add(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, AlgebraError> {
        self.admits(a)?;
        self.admits(b)?;
        let sum = a.add(b);
        Ok(match self {
            SemiringMode::Bool => {
                if sum.is_zero() {
                    Scalar::zero()
                } else {
                    Scalar::one()
                }
            }
            _ => sum,
        })
    }

    /// Collapse an exact rational into this mode: positives become 1 under
    /// `Bool`, negatives are rejected there and under `Nat`.
    pub fn coerce(&self, s: &Scalar) -> Result<Scalar, AlgebraError> {
        match self {
            SemiringMode::Bool => {
                if s.is_zero() {
                    Ok(Scalar::zero())
                } else if s.is_negative() {
                    Err(AlgebraError::NegativeCoefficient(s.clone()))
                } else {
                    Ok(Scalar::one())
                }
            }
            SemiringMode::Nat => {
                self.admits(s)?;
                Ok(s.clone())
            }
            SemiringMode::Rat => Ok(s.clone()),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AlgebraError {
    /// `p(a) > m(a)` for some element of a would-be sub-multiset.
    SubsetViolation(String),
    /// The column marginal of a matching does not equal the announced multiset.
    MarginalMismatch(String),
    ModeViolation(String),
    NegativeCoefficient(Scalar),
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraError::SubsetViolation(m) => write!(f, "subset violation: {}", m),
            AlgebraError::MarginalMismatch(m) => write!(f, "marginal mismatch: {}", m),
            AlgebraError::ModeViolation(m) => write!(f, "semiring mode violation: {}", m),
            AlgebraError::NegativeCoefficient(s) => {
                write!(f, "negative coefficient {} under boolean coercion", s)
            }
        }
    }
}

impl std::error::Error for AlgebraError {}

/// A finite multiset over a totally ordered element type.
///
/// Zero multiplicities are never stored, so structural equality coincides
/// with multiset equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Multiset<T: Ord> {
    entries: BTreeMap<T, usize>,
}

impl<T: Ord + Clone> Multiset<T> {
    pub fn new() -> Self {
        Multiset {
            entries: BTreeMap::new(),
        }
    }

    pub fn singleton(x: T) -> Self {
        let mut m = Multiset::new();
        m.insert(x);
        m
    }

    pub fn from_iter<I: IntoIterator<Item = T>>(items: I) -> Self {
        let mut m = Multiset::new();
        for x in items {
            m.insert(x);
        }
        m
    }

    pub fn insert(&mut self, x: T) {
        *self.entries.entry(x).or_insert(0) += 1;
    }

    pub fn insert_many(&mut self, x: T, k: usize) {
        if k > 0 {
            *self.entries.entry(x).or_insert(0) += k;
        }
    }

    /// Remove one occurrence; returns false if absent.
    pub fn remove(&mut self, x: &T) -> bool {
        match self.entries.get_mut(x) {
            Some(k) if *k > 1 => {
                *k -= 1;
                true
            }
            Some(_) => {
                self.entries.remove(x);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, x: &T) -> usize {
        self.entries.get(x).copied().unwrap_or(0)
    }

    /// Total size counted with multiplicity.
    pub fn len(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct elements with their multiplicities, in element order.
    pub fn counts(&self) -> impl Iterator<Item = (&T, usize)> {
        self.entries.iter().map(|(t, k)| (t, *k))
    }

    /// Elements repeated by multiplicity, in element order.
    pub fn expand(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for (t, k) in self.counts() {
            for _ in 0..k {
                out.push(t.clone());
            }
        }
        out
    }

    pub fn union(&self, other: &Multiset<T>) -> Multiset<T> {
        let mut out = self.clone();
        for (t, k) in other.counts() {
            out.insert_many(t.clone(), k);
        }
        out
    }

    /// Pointwise `self <= other`.
    pub fn sub_multiset_of(&self, other: &Multiset<T>) -> bool {
        self.counts().all(|(t, k)| other.count(t) >= k)
    }

    /// Pointwise difference; requires `other <= self`.
    pub fn difference(&self, other: &Multiset<T>) -> Option<Multiset<T>> {
        if !other.sub_multiset_of(self) {
            return None;
        }
        let mut out = Multiset::new();
        for (t, k) in self.counts() {
            let rest = k - other.count(t);
            out.insert_many(t.clone(), rest);
        }
        Some(out)
    }

    /// All sub-multisets of `self` (pointwise `<=`), in a deterministic order.
    pub fn sub_multisets(&self) -> Vec<Multiset<T>> {
        let mut out = vec![Multiset::new()];
        for (t, k) in self.counts() {
            let mut next = Vec::with_capacity(out.len() * (k + 1));
            for base in &out {
                for j in 0..=k {
                    let mut m = base.clone();
                    m.insert_many(t.clone(), j);
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }

    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> Multiset<U> {
        let mut out = Multiset::new();
        for (t, k) in self.counts() {
            out.insert_many(f(t), k);
        }
        out
    }
}

impl<T: Ord + Clone + fmt::Display> fmt::Display for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        let mut first = true;
        for x in self.expand() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{}", x)?;
            first = false;
        }
        write!(f, "]")
    }
}

/// Binom(m, p) = prod_a m(a)! / (p(a)! (m(a)-p(a))!), for p <= m pointwise.
pub fn multiset_binomial<T: Ord + Clone + fmt::Debug>(
    m: &Multiset<T>,
    p: &Multiset<T>,
) -> Result<Scalar, AlgebraError> {
    if !p.sub_multiset_of(m) {
        return Err(AlgebraError::SubsetViolation(format!(
            "{:?} is not a sub-multiset of {:?}",
            p, m
        )));
    }
    let mut acc = Scalar::one();
    for (a, ma) in m.counts() {
        let pa = p.count(a);
        acc = acc.mul(&binomial_int(ma, pa));
    }
    Ok(acc)
}

fn binomial_int(n: usize, k: usize) -> Scalar {
    debug_assert!(k <= n);
    Scalar::factorial(n)
        .div(&Scalar::factorial(k))
        .div(&Scalar::factorial(n - k))
}

/// All matchings r over A x B with row marginal `m` and column marginal `p`.
/// Empty when |m| != |p|.
pub fn enumerate_matchings<A, B>(m: &Multiset<A>, p: &Multiset<B>) -> Vec<Multiset<(A, B)>>
where
    A: Ord + Clone,
    B: Ord + Clone,
{
    if m.len() != p.len() {
        return Vec::new();
    }
    let rows: Vec<(A, usize)> = m.counts().map(|(a, k)| (a.clone(), k)).collect();
    let mut out = Vec::new();
    let mut partial = Multiset::new();
    fill_rows(&rows, 0, p, &mut partial, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Distribute each row's multiplicity over the remaining column capacity.
fn fill_rows<A, B>(
    rows: &[(A, usize)],
    idx: usize,
    remaining: &Multiset<B>,
    partial: &mut Multiset<(A, B)>,
    out: &mut Vec<Multiset<(A, B)>>,
) where
    A: Ord + Clone,
    B: Ord + Clone,
{
    if idx == rows.len() {
        if remaining.is_empty() {
            out.push(partial.clone());
        }
        return;
    }
    let (a, need) = &rows[idx];
    let cols: Vec<(B, usize)> = remaining.counts().map(|(b, k)| (b.clone(), k)).collect();
    let mut alloc = vec![0usize; cols.len()];
    distribute(a, *need, &cols, 0, &mut alloc, remaining, partial, rows, idx, out);
}

#[allow(clippy::too_many_arguments)]
fn distribute<A, B>(
    a: &A,
    need: usize,
    cols: &[(B, usize)],
    col: usize,
    alloc: &mut Vec<usize>,
    remaining: &Multiset<B>,
    partial: &mut Multiset<(A, B)>,
    rows: &[(A, usize)],
    idx: usize,
    out: &mut Vec<Multiset<(A, B)>>,
) where
    A: Ord + Clone,
    B: Ord + Clone,
{
    if col == cols.len() {
        if need != 0 {
            return;
        }
        let mut next_remaining = remaining.clone();
        for (j, (b, _)) in cols.iter().enumerate() {
            for _ in 0..alloc[j] {
                next_remaining.remove(b);
                partial.insert((a.clone(), b.clone()));
            }
        }
        fill_rows(rows, idx + 1, &next_remaining, partial, out);
        for (j, (b, _)) in cols.iter().enumerate() {
            for _ in 0..alloc[j] {
                partial.remove(&(a.clone(), b.clone()));
            }
        }
        return;
    }
    let cap = cols[col].1.min(need);
    for take in 0..=cap {
        alloc[col] = take;
        distribute(a, need - take, cols, col + 1, alloc, remaining, partial, rows, idx, out);
    }
    alloc[col] = 0;
}

/// [p r] = prod_b p(b)! / prod_a r(a,b)!, requiring the column marginal of
/// `r` to equal `p`.
pub fn multiset_multinomial<A, B>(
    p: &Multiset<B>,
    r: &Multiset<(A, B)>,
) -> Result<Scalar, AlgebraError>
where
    A: Ord + Clone + fmt::Debug,
    B: Ord + Clone + fmt::Debug,
{
    let col_marginal: Multiset<B> = r.map(|(_, b)| b.clone());
    if &col_marginal != p {
        return Err(AlgebraError::MarginalMismatch(format!(
            "column marginal {:?} of {:?} differs from {:?}",
            col_marginal, r, p
        )));
    }
    let mut acc = Scalar::one();
    for (b, pb) in p.counts() {
        acc = acc.mul(&Scalar::factorial(pb));
        for ((_, rb), k) in r.counts() {
            if rb == b {
                acc = acc.div(&Scalar::factorial(k));
            }
        }
    }
    Ok(acc)
}

/// A finitely supported formal linear combination with `Scalar` coefficients.
/// Zero coefficients are never stored; the empty combination is zero.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct LinComb<T: Ord> {
    terms: BTreeMap<T, Scalar>,
}

impl<T: Ord + Clone> LinComb<T> {
    pub fn zero() -> Self {
        LinComb {
            terms: BTreeMap::new(),
        }
    }

    pub fn singleton(t: T) -> Self {
        Self::of(Scalar::one(), t)
    }

    pub fn of(coeff: Scalar, t: T) -> Self {
        let mut c = LinComb::zero();
        c.add_term(coeff, t);
        c
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, t: &T) -> Scalar {
        self.terms.get(t).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Scalar)> {
        self.terms.iter()
    }

    pub fn into_iter_terms(self) -> impl Iterator<Item = (T, Scalar)> {
        self.terms.into_iter()
    }

    pub fn add_term(&mut self, coeff: Scalar, t: T) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(t);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let new = o.get().add(&coeff);
                if new.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = new;
                }
            }
        }
    }

    pub fn add(&self, other: &LinComb<T>) -> LinComb<T> {
        let mut out = self.clone();
        for (t, c) in other.iter() {
            out.add_term(c.clone(), t.clone());
        }
        out
    }

    pub fn scale(&self, coeff: &Scalar) -> LinComb<T> {
        if coeff.is_zero() {
            return LinComb::zero();
        }
        LinComb {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.clone(), c.mul(coeff)))
                .collect(),
        }
    }

    pub fn map<U: Ord + Clone>(&self, f: impl Fn(&T) -> U) -> LinComb<U> {
        let mut out = LinComb::zero();
        for (t, c) in self.iter() {
            out.add_term(c.clone(), f(t));
        }
        out
    }

    /// Substitute each basis term by a combination and flatten.
    pub fn bind<U: Ord + Clone>(&self, f: impl Fn(&T) -> LinComb<U>) -> LinComb<U> {
        let mut out = LinComb::zero();
        for (t, c) in self.iter() {
            for (u, d) in f(t).iter() {
                out.add_term(c.mul(d), u.clone());
            }
        }
        out
    }

    /// Mode-aware addition: under `Bool` the resulting coefficients are
    /// re-collapsed so 1+1=1.
    pub fn add_in(&self, other: &LinComb<T>, mode: SemiringMode) -> Result<LinComb<T>, AlgebraError> {
        let mut out = LinComb::zero();
        for (t, c) in self.iter().chain(other.iter()) {
            mode.admits(c)?;
            out.add_term(c.clone(), t.clone());
        }
        if mode == SemiringMode::Bool {
            out = out.coerce(mode)?;
        }
        Ok(out)
    }

    /// Mode-aware scaling.
    pub fn scale_in(&self, coeff: &Scalar, mode: SemiringMode) -> Result<LinComb<T>, AlgebraError> {
        mode.admits(coeff)?;
        let scaled = self.scale(coeff);
        if mode == SemiringMode::Bool {
            scaled.coerce(mode)
        } else {
            Ok(scaled)
        }
    }

    /// Coerce every coefficient into `mode` (positive -> 1 under `Bool`,
    /// negatives rejected there and under `Nat`).
    pub fn coerce(&self, mode: SemiringMode) -> Result<LinComb<T>, AlgebraError> {
        let mut out = LinComb::zero();
        for (t, c) in self.iter() {
            out.add_term(mode.coerce(c)?, t.clone());
        }
        Ok(out)
    }
}

impl<T: Ord + Clone> FromIterator<(Scalar, T)> for LinComb<T> {
    fn from_iter<I: IntoIterator<Item = (Scalar, T)>>(iter: I) -> Self {
        let mut out = LinComb::zero();
        for (c, t) in iter {
            out.add_term(c, t);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ms(items: &[&str]) -> Multiset<String> {
        Multiset::from_iter(items.iter().map(|s| s.to_string()))
    }

    // Independent factorial-based oracle for the binomial examples.
    fn fact(n: usize) -> u64 {
        (1..=n as u64).product::<u64>().max(1)
    }

    #[test]
    fn binomial_examples() {
        let two = multiset_binomial(&ms(&["a", "a"]), &ms(&["a"])).unwrap();
        assert_eq!(two, Scalar::from_int((fact(2) / (fact(1) * fact(1))) as i64));

        let m = ms(&["a", "a", "b"]);
        assert_eq!(multiset_binomial(&m, &m).unwrap(), Scalar::one());

        let v = multiset_binomial(&ms(&["a", "a", "b"]), &ms(&["a", "b"])).unwrap();
        let expect = (fact(2) / (fact(1) * fact(1))) * (fact(1) / (fact(1) * fact(0)));
        assert_eq!(v, Scalar::from_int(expect as i64));
    }

    #[test]
    fn binomial_rejects_non_subset() {
        let err = multiset_binomial(&ms(&["a"]), &ms(&["a", "a"]));
        assert!(matches!(err, Err(AlgebraError::SubsetViolation(_))));
    }

    #[test]
    fn binomial_trivial_bounds() {
        for m in [ms(&[]), ms(&["a"]), ms(&["a", "a", "b", "c"])] {
            assert_eq!(multiset_binomial(&m, &ms(&[])).unwrap(), Scalar::one());
            assert_eq!(multiset_binomial(&m, &m).unwrap(), Scalar::one());
        }
    }

    #[test]
    fn binomial_row_sums_over_one_letter() {
        // For m = n*[a]: sum_k Binom(m, k*[a]) = 2^n.
        for n in 0..=6usize {
            let mut m = Multiset::new();
            m.insert_many("a".to_string(), n);
            let mut total = Scalar::zero();
            for k in 0..=n {
                let mut p = Multiset::new();
                p.insert_many("a".to_string(), k);
                total = total.add(&multiset_binomial(&m, &p).unwrap());
            }
            assert_eq!(total, Scalar::from_int(1 << n));
        }
    }

    #[test]
    fn matchings_examples() {
        let l = enumerate_matchings(&ms(&["a"]), &ms(&["b"]));
        assert_eq!(l.len(), 1);
        assert_eq!(l[0], Multiset::singleton(("a".to_string(), "b".to_string())));

        let l = enumerate_matchings(&ms(&["a", "a"]), &ms(&["b", "c"]));
        assert_eq!(l.len(), 1);
        let mut expect = Multiset::new();
        expect.insert(("a".to_string(), "b".to_string()));
        expect.insert(("a".to_string(), "c".to_string()));
        assert_eq!(l[0], expect);

        assert!(enumerate_matchings(&ms(&["a"]), &ms(&["b", "c"])).is_empty());
    }

    // Oracle: expand both multisets into sequences, run over all bijections
    // between positions, and collect the distinct pair-multisets.
    fn matchings_by_bijections(
        m: &Multiset<String>,
        p: &Multiset<String>,
    ) -> Vec<Multiset<(String, String)>> {
        if m.len() != p.len() {
            return Vec::new();
        }
        let left = m.expand();
        let right = p.expand();
        let n = right.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut out: Vec<Multiset<(String, String)>> = Vec::new();
        permute(&mut perm, 0, &mut |perm| {
            let r = Multiset::from_iter(
                (0..n).map(|i| (left[i].clone(), right[perm[i]].clone())),
            );
            out.push(r);
        });
        out.sort();
        out.dedup();
        out
    }

    fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == perm.len() {
            visit(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(perm, k + 1, visit);
            perm.swap(k, i);
        }
    }

    #[test]
    fn matchings_agree_with_bijection_oracle() {
        let cases = [
            (ms(&[]), ms(&[])),
            (ms(&["a", "a"]), ms(&["b", "b"])),
            (ms(&["a", "a", "b"]), ms(&["x", "y", "y"])),
            (ms(&["a", "b", "c", "c"]), ms(&["x", "x", "y", "z"])),
            (ms(&["a", "a", "a", "a"]), ms(&["x", "x", "y", "y"])),
        ];
        for (m, p) in cases {
            assert_eq!(enumerate_matchings(&m, &p), matchings_by_bijections(&m, &p));
        }
    }

    #[test]
    fn multinomial_examples() {
        // p=[b,b], r=[(a,b),(a,b)] -> 2!/2! = 1
        let p = ms(&["b", "b"]);
        let mut r = Multiset::new();
        r.insert_many(("a".to_string(), "b".to_string()), 2);
        assert_eq!(multiset_multinomial(&p, &r).unwrap(), Scalar::one());

        // p=[b,c], r=[(a,b),(a,c)] -> 1
        let p = ms(&["b", "c"]);
        let mut r = Multiset::new();
        r.insert(("a".to_string(), "b".to_string()));
        r.insert(("a".to_string(), "c".to_string()));
        assert_eq!(multiset_multinomial(&p, &r).unwrap(), Scalar::one());

        // p=[b,b], r=[(a,b),(a',b)] -> 2!/(1! 1!) = 2
        let p = ms(&["b", "b"]);
        let mut r = Multiset::new();
        r.insert(("a".to_string(), "b".to_string()));
        r.insert(("a2".to_string(), "b".to_string()));
        assert_eq!(multiset_multinomial(&p, &r).unwrap(), Scalar::from_int(2));
    }

    #[test]
    fn multinomial_rejects_marginal_mismatch() {
        let p = ms(&["b"]);
        let mut r = Multiset::new();
        r.insert(("a".to_string(), "c".to_string()));
        assert!(matches!(
            multiset_multinomial(&p, &r),
            Err(AlgebraError::MarginalMismatch(_))
        ));
    }

    #[test]
    fn lincomb_combine_examples() {
        let mut c = LinComb::zero();
        c.add_term(Scalar::from_int(2), "t");
        c.add_term(Scalar::from_int(3), "t");
        assert_eq!(c.coeff(&"t"), Scalar::from_int(5));

        let one_t = LinComb::of(Scalar::one(), "t");
        let b = one_t.add_in(&one_t, SemiringMode::Bool).unwrap();
        assert_eq!(b.coeff(&"t"), Scalar::one());

        let z = c.scale(&Scalar::zero());
        assert!(z.is_zero());
    }

    #[test]
    fn nat_mode_rejects_negative_scale() {
        let c = LinComb::of(Scalar::one(), "t");
        assert!(c.scale_in(&Scalar::from_int(-1), SemiringMode::Nat).is_err());
        assert!(c.scale_in(&Scalar::from_int(-1), SemiringMode::Rat).is_ok());
    }

    #[test]
    fn bool_coercion_rejects_negatives() {
        let c = LinComb::of(Scalar::from_int(-2), "t");
        assert!(matches!(
            c.coerce(SemiringMode::Bool),
            Err(AlgebraError::NegativeCoefficient(_))
        ));
        let c = LinComb::of(Scalar::ratio(2, 3), "t");
        assert_eq!(c.coerce(SemiringMode::Bool).unwrap().coeff(&"t"), Scalar::one());
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        (-20i64..=20, 1i64..=9).prop_map(|(n, d)| Scalar::ratio(n, d))
    }

    fn arb_comb() -> impl Strategy<Value = LinComb<u8>> {
        proptest::collection::vec((arb_scalar(), 0u8..6), 0..6)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn module_laws(a in arb_scalar(), b in arb_scalar(), c in arb_comb(), d in arb_comb()) {
            // (a+b)*t distributes and 0 annihilates.
            let lhs = c.scale(&a.add(&b));
            let rhs = c.scale(&a).add(&c.scale(&b));
            prop_assert_eq!(lhs, rhs);
            prop_assert!(c.scale(&Scalar::zero()).is_zero());
            // addition commutes and associates by representation
            prop_assert_eq!(c.add(&d), d.add(&c));
        }

        #[test]
        fn binomial_total_matches_subsets(items in proptest::collection::vec(0u8..3, 0..5)) {
            let m = Multiset::from_iter(items);
            // sum over all sub-multisets of Binom(m,p) = prod_a 2^{m(a)}
            let mut total = Scalar::zero();
            for p in m.sub_multisets() {
                total = total.add(&multiset_binomial(&m, &p).unwrap());
            }
            let expect = m.counts().fold(Scalar::one(), |acc, (_, k)| {
                acc.mul(&Scalar::from_int(1 << k))
            });
            prop_assert_eq!(total, expect);
        }
    }
}
