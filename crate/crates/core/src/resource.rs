//! The differential lambda-calculus and the finite resource calculus:
//! capture-avoiding and linear substitution, the two reduction rules with
//! contextual closure by linearity, bunch reduction, Taylor expansion and
//! the syntactic antiderivative.
//!
//! Terms are always kept in a canonical form: binders are renamed to a
//! depth-indexed scheme and iterated differential applications are stored
//! with sorted arguments, so symmetry of derivatives is a plain equality
//! and alpha-equivalent terms merge inside combinations.

use crate::algebra::{LinComb, Multiset, Scalar};
use std::collections::BTreeSet;
use std::fmt;

/// Simple differential terms. Ordinary application keeps its argument as a
/// whole combination: every construction is linear except that argument.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum DTerm {
    Var(String),
    Abs(String, Box<DTerm>),
    App(Box<DTerm>, DComb),
    DApp(Box<DTerm>, Box<DTerm>),
}

pub type DComb = LinComb<DTerm>;

/// Simple finite resource terms; the application argument is a bunch.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RTerm {
    Var(String),
    Abs(String, Box<RTerm>),
    BApp(Box<RTerm>, Multiset<RTerm>),
}

pub type RComb = LinComb<RTerm>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResourceError {
    FuelExhausted,
    /// Some simple term does not contain exactly one free occurrence of the
    /// linearity marker.
    NotLinearIn(String),
    /// The symmetry hypothesis fails; carries a printable witness.
    SymmetryViolation(String),
    /// Taylor expansion outside the rational mode would need 1/p!.
    NeedsRationals,
}

impl fmt::Display for ResourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceError::FuelExhausted => write!(f, "fuel exhausted"),
            ResourceError::NotLinearIn(x) => {
                write!(f, "term is not linear in {}", x)
            }
            ResourceError::SymmetryViolation(w) => write!(f, "symmetry violation: {}", w),
            ResourceError::NeedsRationals => write!(f, "operation requires rational coefficients"),
        }
    }
}

impl std::error::Error for ResourceError {}

// ---------------------------------------------------------------------------
// free variables, renaming, canonical forms

impl DTerm {
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_fv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_fv(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            DTerm::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            DTerm::Abs(x, body) => {
                bound.push(x.clone());
                body.collect_fv(bound, out);
                bound.pop();
            }
            DTerm::App(m, r) => {
                m.collect_fv(bound, out);
                for (t, _) in r.iter() {
                    t.collect_fv(bound, out);
                }
            }
            DTerm::DApp(m, n) => {
                m.collect_fv(bound, out);
                n.collect_fv(bound, out);
            }
        }
    }

    /// Canonical representative of the alpha-class: binders renamed to a
    /// depth-indexed scheme (u0, u1, ...; suffixed with `a` until the name
    /// avoids the free variables of the body), differential-application
    /// chains sorted.
    pub fn alpha_canonicalize(&self) -> DTerm {
        self.canon(0, &mut Vec::new())
    }

    fn canon(&self, depth: usize, env: &mut Vec<(String, String)>) -> DTerm {
        match self {
            DTerm::Var(x) => {
                for (old, new) in env.iter().rev() {
                    if old == x {
                        return DTerm::Var(new.clone());
                    }
                }
                DTerm::Var(x.clone())
            }
            DTerm::Abs(x, body) => {
                let mut avoid = body.free_vars();
                avoid.remove(x);
                let name = canonical_binder(depth, &avoid);
                env.push((x.clone(), name.clone()));
                let body = body.canon(depth + 1, env);
                env.pop();
                DTerm::Abs(name, Box::new(body))
            }
            DTerm::App(m, r) => {
                let head = m.canon(depth, env);
                let mut arg = DComb::zero();
                for (t, c) in r.iter() {
                    arg.add_term(c.clone(), t.canon(depth, env));
                }
                DTerm::App(Box::new(head), arg)
            }
            DTerm::DApp(_, _) => {
                let (base, args) = self.split_chain();
                let base = base.canon(depth, env);
                let mut args: Vec<DTerm> = args.iter().map(|a| a.canon(depth, env)).collect();
                args.sort();
                rebuild_chain(base, args)
            }
        }
    }

    /// Split an iterated differential application into its base and the
    /// list of linear arguments.
    pub fn split_chain(&self) -> (&DTerm, Vec<&DTerm>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let DTerm::DApp(m, n) = cur {
            args.push(n.as_ref());
            cur = m.as_ref();
        }
        args.reverse();
        (cur, args)
    }

    pub fn size(&self) -> usize {
        match self {
            DTerm::Var(_) => 1,
            DTerm::Abs(_, b) => 1 + b.size(),
            DTerm::App(m, r) => {
                1 + m.size() + r.iter().map(|(t, _)| t.size()).sum::<usize>()
            }
            DTerm::DApp(m, n) => 1 + m.size() + n.size(),
        }
    }
}

fn canonical_binder(depth: usize, avoid: &BTreeSet<String>) -> String {
    let mut name = format!("u{}", depth);
    while avoid.contains(&name) {
        name.push('a');
    }
    name
}

fn rebuild_chain(base: DTerm, args: Vec<DTerm>) -> DTerm {
    let mut cur = base;
    for a in args {
        cur = DTerm::DApp(Box::new(cur), Box::new(a));
    }
    cur
}

impl RTerm {
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_fv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_fv(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            RTerm::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            RTerm::Abs(x, body) => {
                bound.push(x.clone());
                body.collect_fv(bound, out);
                bound.pop();
            }
            RTerm::BApp(h, bunch) => {
                h.collect_fv(bound, out);
                for (t, _) in bunch.counts() {
                    t.collect_fv(bound, out);
                }
            }
        }
    }

    pub fn alpha_canonicalize(&self) -> RTerm {
        self.canon(0, &mut Vec::new())
    }

    fn canon(&self, depth: usize, env: &mut Vec<(String, String)>) -> RTerm {
        match self {
            RTerm::Var(x) => {
                for (old, new) in env.iter().rev() {
                    if old == x {
                        return RTerm::Var(new.clone());
                    }
                }
                RTerm::Var(x.clone())
            }
            RTerm::Abs(x, body) => {
                let mut avoid = body.free_vars();
                avoid.remove(x);
                let name = canonical_binder(depth, &avoid);
                env.push((x.clone(), name.clone()));
                let body = body.canon(depth + 1, env);
                env.pop();
                RTerm::Abs(name, Box::new(body))
            }
            RTerm::BApp(h, bunch) => {
                let head = h.canon(depth, env);
                let bunch = bunch.map(|t| t.canon(depth, env));
                RTerm::BApp(Box::new(head), bunch)
            }
        }
    }

    /// Free occurrences of `x`, in left-to-right order of the printed term.
    pub fn degree(&self, x: &str) -> usize {
        match self {
            RTerm::Var(y) => usize::from(y == x),
            RTerm::Abs(y, body) => {
                if y == x {
                    0
                } else {
                    body.degree(x)
                }
            }
            RTerm::BApp(h, bunch) => {
                h.degree(x)
                    + bunch
                        .counts()
                        .map(|(t, k)| k * t.degree(x))
                        .sum::<usize>()
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            RTerm::Var(_) => 1,
            RTerm::Abs(_, b) => 1 + b.size(),
            RTerm::BApp(h, bunch) => {
                1 + h.size() + bunch.counts().map(|(t, k)| k * t.size()).sum::<usize>()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// smart constructors (combination level)

impl DTerm {
    pub fn var_comb(x: &str) -> DComb {
        DComb::singleton(DTerm::Var(x.to_string()))
    }

    /// Abstraction, extended linearly over the body.
    pub fn abs_comb(x: &str, body: &DComb) -> DComb {
        body.map(|t| DTerm::Abs(x.to_string(), Box::new(t.clone())).alpha_canonicalize())
    }

    /// Ordinary application: linear in the head only; the argument stays a
    /// whole combination.
    pub fn app_comb(head: &DComb, arg: &DComb) -> DComb {
        head.map(|m| DTerm::App(Box::new(m.clone()), arg.clone()).alpha_canonicalize())
    }

    /// Differential application, bilinear.
    pub fn dapp_comb(m: &DComb, n: &DComb) -> DComb {
        let mut out = DComb::zero();
        for (tm, cm) in m.iter() {
            for (tn, cn) in n.iter() {
                let term =
                    DTerm::DApp(Box::new(tm.clone()), Box::new(tn.clone())).alpha_canonicalize();
                out.add_term(cm.mul(cn), term);
            }
        }
        out
    }
}

impl RTerm {
    pub fn var_comb(x: &str) -> RComb {
        RComb::singleton(RTerm::Var(x.to_string()))
    }

    pub fn abs_comb(x: &str, body: &RComb) -> RComb {
        body.map(|t| RTerm::Abs(x.to_string(), Box::new(t.clone())).alpha_canonicalize())
    }

    /// Bunch application, multilinear in the head and in every slot.
    pub fn bapp_comb(head: &RComb, slots: &[RComb]) -> RComb {
        let mut out = RComb::zero();
        for (h, ch) in head.iter() {
            let mut partial: Vec<(Scalar, Multiset<RTerm>)> =
                vec![(ch.clone(), Multiset::new())];
            for slot in slots {
                let mut next = Vec::new();
                for (coeff, bunch) in &partial {
                    for (t, ct) in slot.iter() {
                        let mut b = bunch.clone();
                        b.insert(t.clone());
                        next.push((coeff.mul(ct), b));
                    }
                }
                partial = next;
            }
            for (coeff, bunch) in partial {
                let term = RTerm::BApp(Box::new(h.clone()), bunch).alpha_canonicalize();
                out.add_term(coeff, term);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// substitution

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut name = format!("{}f", base);
    while avoid.contains(&name) {
        name.push('f');
    }
    name
}

/// Ordinary substitution `M[R/x]`: linear in `M`, the combination `R` is
/// plugged in as-is (non-linearly) at each occurrence.
pub fn subst(m: &DTerm, r: &DComb, x: &str) -> DComb {
    match m {
        DTerm::Var(y) => {
            if y == x {
                r.clone()
            } else {
                DComb::singleton(m.clone())
            }
        }
        DTerm::Abs(y, body) => {
            if y == x {
                return DComb::singleton(m.clone());
            }
            let r_fv: BTreeSet<String> = r
                .iter()
                .flat_map(|(t, _)| t.free_vars())
                .collect();
            if r_fv.contains(y) {
                let mut avoid = r_fv;
                avoid.extend(body.free_vars());
                avoid.insert(x.to_string());
                let fresh = fresh_name(y, &avoid);
                let renamed = subst(
                    body,
                    &DComb::singleton(DTerm::Var(fresh.clone())),
                    y,
                );
                DTerm::abs_comb(&fresh, &renamed.bind(|t| subst(t, r, x)))
            } else {
                DTerm::abs_comb(y, &subst(body, r, x))
            }
        }
        DTerm::App(head, arg) => {
            let new_head = subst(head, r, x);
            let new_arg = arg.bind(|t| subst(t, r, x));
            DTerm::app_comb(&new_head, &new_arg)
        }
        DTerm::DApp(hm, hn) => DTerm::dapp_comb(&subst(hm, r, x), &subst(hn, r, x)),
    }
}

pub fn subst_comb(m: &DComb, r: &DComb, x: &str) -> DComb {
    m.bind(|t| subst(t, r, x))
}

/// Differential (linear) substitution of a simple term for one occurrence
/// of `x`, summed over occurrences; bilinear in both term arguments.
pub fn dsubst(m: &DTerm, n: &DTerm, x: &str) -> DComb {
    match m {
        DTerm::Var(y) => {
            if y == x {
                DComb::singleton(n.clone())
            } else {
                DComb::zero()
            }
        }
        DTerm::Abs(y, body) => {
            if y == x {
                return DComb::zero();
            }
            if n.free_vars().contains(y) {
                let mut avoid = n.free_vars();
                avoid.extend(body.free_vars());
                avoid.insert(x.to_string());
                let fresh = fresh_name(y, &avoid);
                let renamed = subst(body, &DComb::singleton(DTerm::Var(fresh.clone())), y);
                DTerm::abs_comb(&fresh, &renamed.bind(|t| dsubst(t, n, x)))
            } else {
                DTerm::abs_comb(y, &dsubst(body, n, x))
            }
        }
        DTerm::DApp(hm, hn) => {
            let left = DTerm::dapp_comb(&dsubst(hm, n, x), &DComb::singleton((**hn).clone()));
            let right = DTerm::dapp_comb(&DComb::singleton((**hm).clone()), &dsubst(hn, n, x));
            left.add(&right)
        }
        DTerm::App(head, arg) => {
            // (dM/dx.N)R + (D M . (dR/dx.N)) R
            let head_comb = DComb::singleton((**head).clone());
            let first = DTerm::app_comb(&dsubst(head, n, x), arg);
            let arg_derivative = arg.bind(|t| dsubst(t, n, x));
            let second = DTerm::app_comb(&DTerm::dapp_comb(&head_comb, &arg_derivative), arg);
            first.add(&second)
        }
    }
}

/// `dsubst` extended bilinearly to combinations.
pub fn dsubst_comb(m: &DComb, n: &DComb, x: &str) -> DComb {
    let mut out = DComb::zero();
    for (tm, cm) in m.iter() {
        for (tn, cn) in n.iter() {
            out = out.add(&dsubst(tm, tn, x).scale(&cm.mul(cn)));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// reduction of differential terms

/// A path to a subterm of a simple differential term. Argument positions
/// index into the argument combination's support in its iteration order.
pub type DPath = Vec<DStep>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DStep {
    AbsBody,
    AppHead,
    AppArg(usize),
    DAppLeft,
    DAppRight,
}

/// All redex positions of a simple term, outermost first.
pub fn dterm_redexes(t: &DTerm) -> Vec<DPath> {
    let mut out = Vec::new();
    walk_dterm(t, &mut Vec::new(), &mut out);
    out
}

fn walk_dterm(t: &DTerm, path: &mut DPath, out: &mut Vec<DPath>) {
    match t {
        DTerm::Var(_) => {}
        DTerm::Abs(_, body) => {
            path.push(DStep::AbsBody);
            walk_dterm(body, path, out);
            path.pop();
        }
        DTerm::App(head, arg) => {
            if matches!(**head, DTerm::Abs(_, _)) {
                out.push(path.clone());
            }
            path.push(DStep::AppHead);
            walk_dterm(head, path, out);
            path.pop();
            for (i, (sub, _)) in arg.iter().enumerate() {
                path.push(DStep::AppArg(i));
                walk_dterm(sub, path, out);
                path.pop();
            }
        }
        DTerm::DApp(m, n) => {
            if matches!(**m, DTerm::Abs(_, _)) {
                out.push(path.clone());
            }
            path.push(DStep::DAppLeft);
            walk_dterm(m, path, out);
            path.pop();
            path.push(DStep::DAppRight);
            walk_dterm(n, path, out);
            path.pop();
        }
    }
}

/// Contract the redex at `path`. The result is a combination because both
/// rules may produce sums and the context is closed by linearity.
pub fn dterm_step_at(t: &DTerm, path: &[DStep]) -> Option<DComb> {
    step_dterm(t, path)
}

fn step_dterm(t: &DTerm, path: &[DStep]) -> Option<DComb> {
    match path.split_first() {
        None => match t {
            DTerm::App(head, arg) => match &**head {
                DTerm::Abs(x, body) => Some(subst(body, arg, x)),
                _ => None,
            },
            DTerm::DApp(m, n) => match &**m {
                DTerm::Abs(x, body) => Some(DTerm::abs_comb(x, &dsubst(body, n, x))),
                _ => None,
            },
            _ => None,
        },
        Some((step, rest)) => match (step, t) {
            (DStep::AbsBody, DTerm::Abs(x, body)) => {
                Some(DTerm::abs_comb(x, &step_dterm(body, rest)?))
            }
            (DStep::AppHead, DTerm::App(head, arg)) => {
                Some(DTerm::app_comb(&step_dterm(head, rest)?, arg))
            }
            (DStep::AppArg(i), DTerm::App(head, arg)) => {
                let (sub, coeff) = arg.iter().nth(*i)?;
                let reduced = step_dterm(sub, rest)?;
                let mut new_arg = arg.clone();
                new_arg.add_term(coeff.neg(), sub.clone());
                new_arg = new_arg.add(&reduced.scale(coeff));
                Some(DTerm::app_comb(&DComb::singleton((**head).clone()), &new_arg))
            }
            (DStep::DAppLeft, DTerm::DApp(m, n)) => Some(DTerm::dapp_comb(
                &step_dterm(m, rest)?,
                &DComb::singleton((**n).clone()),
            )),
            (DStep::DAppRight, DTerm::DApp(m, n)) => Some(DTerm::dapp_comb(
                &DComb::singleton((**m).clone()),
                &step_dterm(n, rest)?,
            )),
            _ => None,
        },
    }
}

/// Normalize a combination, choosing redexes with `pick` (given the number
/// of candidate (term, redex) pairs, returns an index). Fuel bounds the
/// number of contractions.
pub fn normalize_dterm(
    comb: &DComb,
    fuel: usize,
    mut pick: impl FnMut(usize) -> usize,
) -> Result<DComb, ResourceError> {
    let mut current = comb.clone();
    for _ in 0..fuel {
        let mut candidates: Vec<(DTerm, Scalar, DPath)> = Vec::new();
        for (t, c) in current.iter() {
            for r in dterm_redexes(t) {
                candidates.push((t.clone(), c.clone(), r));
            }
        }
        if candidates.is_empty() {
            return Ok(current);
        }
        let (t, c, path) = candidates.swap_remove(pick(candidates.len()));
        let reduced = step_dterm(&t, &path).expect("enumerated redex");
        current.add_term(c.neg(), t);
        current = current.add(&reduced.scale(&c));
    }
    Err(ResourceError::FuelExhausted)
}

// ---------------------------------------------------------------------------
// resource calculus: substitution and reduction

/// Capture-avoiding substitution of a variable by a simple term (used for
/// the antiderivative's h -> x renaming), linear in the subject.
pub fn rsubst_var(t: &RTerm, x: &str, replacement: &RTerm) -> RTerm {
    match t {
        RTerm::Var(y) => {
            if y == x {
                replacement.clone()
            } else {
                t.clone()
            }
        }
        RTerm::Abs(y, body) => {
            if y == x {
                return t.clone();
            }
            if replacement.free_vars().contains(y) {
                let mut avoid = replacement.free_vars();
                avoid.extend(body.free_vars());
                avoid.insert(x.to_string());
                let fresh = fresh_name(y, &avoid);
                let renamed = rsubst_var(body, y, &RTerm::Var(fresh.clone()));
                RTerm::Abs(fresh, Box::new(rsubst_var(&renamed, x, replacement)))
            } else {
                RTerm::Abs(y.clone(), Box::new(rsubst_var(body, x, replacement)))
            }
        }
        RTerm::BApp(h, bunch) => RTerm::BApp(
            Box::new(rsubst_var(h, x, replacement)),
            bunch.map(|s| rsubst_var(s, x, replacement)),
        ),
    }
}

pub fn rsubst_var_comb(u: &RComb, x: &str, replacement: &RTerm) -> RComb {
    u.map(|t| rsubst_var(t, x, replacement).alpha_canonicalize())
}

/// Partial derivative of a simple resource term: one occurrence of `x` is
/// replaced by `n`, summed over all free occurrences.
pub fn rdsubst(t: &RTerm, n: &RTerm, x: &str) -> RComb {
    match t {
        RTerm::Var(y) => {
            if y == x {
                RComb::singleton(n.clone())
            } else {
                RComb::zero()
            }
        }
        RTerm::Abs(y, body) => {
            if y == x {
                return RComb::zero();
            }
            if n.free_vars().contains(y) {
                let mut avoid = n.free_vars();
                avoid.extend(body.free_vars());
                avoid.insert(x.to_string());
                let fresh = fresh_name(y, &avoid);
                let renamed = rsubst_var(body, y, &RTerm::Var(fresh.clone()));
                RTerm::abs_comb(&fresh, &rdsubst(&renamed, n, x))
            } else {
                RTerm::abs_comb(y, &rdsubst(body, n, x))
            }
        }
        RTerm::BApp(h, bunch) => {
            let head_comb = RComb::singleton((**h).clone());
            let bunch_slots: Vec<RTerm> = bunch.expand();
            let slot_combs: Vec<RComb> = bunch_slots
                .iter()
                .map(|s| RComb::singleton(s.clone()))
                .collect();
            let mut out = RTerm::bapp_comb(&rdsubst(h, n, x), &slot_combs);
            for (i, s) in bunch_slots.iter().enumerate() {
                let mut slots = slot_combs.clone();
                slots[i] = rdsubst(s, n, x);
                out = out.add(&RTerm::bapp_comb(&head_comb, &slots));
            }
            out
        }
    }
}

pub fn rdsubst_comb(u: &RComb, n: &RTerm, x: &str) -> RComb {
    u.bind(|t| rdsubst(t, n, x))
}

/// Replace the `k`-th free occurrence of `x` (left-to-right) by the k-th
/// assigned term. Binders of `t` are assumed to avoid the arguments' free
/// variables (the caller renames first).
fn subst_occurrences(t: &RTerm, x: &str, assignment: &[RTerm], next: &mut usize) -> RTerm {
    match t {
        RTerm::Var(y) => {
            if y == x {
                let out = assignment[*next].clone();
                *next += 1;
                out
            } else {
                t.clone()
            }
        }
        RTerm::Abs(y, body) => {
            if y == x {
                t.clone()
            } else {
                RTerm::Abs(
                    y.clone(),
                    Box::new(subst_occurrences(body, x, assignment, next)),
                )
            }
        }
        RTerm::BApp(h, bunch) => {
            let head = subst_occurrences(h, x, assignment, next);
            // bunch elements in expanded (sorted) order
            let elems: Vec<RTerm> = bunch
                .expand()
                .iter()
                .map(|s| subst_occurrences(s, x, assignment, next))
                .collect();
            RTerm::BApp(Box::new(head), Multiset::from_iter(elems))
        }
    }
}

/// Rename every binder of `t` away from `avoid`, keeping free variables.
fn retreat_binders(t: &RTerm, avoid: &BTreeSet<String>) -> RTerm {
    match t {
        RTerm::Var(_) => t.clone(),
        RTerm::Abs(y, body) => {
            if avoid.contains(y) {
                let mut all = avoid.clone();
                all.extend(body.free_vars());
                let fresh = fresh_name(y, &all);
                let renamed = rsubst_var(body, y, &RTerm::Var(fresh.clone()));
                RTerm::Abs(fresh, Box::new(retreat_binders(&renamed, avoid)))
            } else {
                RTerm::Abs(y.clone(), Box::new(retreat_binders(body, avoid)))
            }
        }
        RTerm::BApp(h, bunch) => RTerm::BApp(
            Box::new(retreat_binders(h, avoid)),
            bunch.map(|s| retreat_binders(s, avoid)),
        ),
    }
}

/// Reduce `<\x.s>[s_1..s_n]`: the sum over all ways of assigning the bunch
/// elements to the free occurrences of `x`, or zero on a degree mismatch.
pub fn bunch_reduce(body: &RTerm, x: &str, bunch: &Multiset<RTerm>) -> RComb {
    let n = bunch.len();
    if body.degree(x) != n {
        return RComb::zero();
    }
    let args: Vec<RTerm> = bunch.expand();
    let mut avoid: BTreeSet<String> = args.iter().flat_map(|a| a.free_vars()).collect();
    avoid.insert(x.to_string());
    let safe_body = retreat_binders(body, &avoid);
    let mut out = RComb::zero();
    let mut perm: Vec<usize> = (0..n).collect();
    permute_indices(&mut perm, 0, &mut |perm| {
        let assignment: Vec<RTerm> = perm.iter().map(|&j| args[j].clone()).collect();
        let mut next = 0;
        let result = subst_occurrences(&safe_body, x, &assignment, &mut next);
        debug_assert_eq!(next, n);
        out.add_term(Scalar::one(), result.alpha_canonicalize());
    });
    out
}

fn permute_indices(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute_indices(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

/// Redex positions inside a simple resource term.
pub type RPath = Vec<RStep>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RStep {
    AbsBody,
    BAppHead,
    /// Index into the expanded (sorted) bunch.
    BAppElem(usize),
}

pub fn rterm_redexes(t: &RTerm) -> Vec<RPath> {
    let mut out = Vec::new();
    walk_rterm(t, &mut Vec::new(), &mut out);
    out
}

fn walk_rterm(t: &RTerm, path: &mut RPath, out: &mut Vec<RPath>) {
    match t {
        RTerm::Var(_) => {}
        RTerm::Abs(_, body) => {
            path.push(RStep::AbsBody);
            walk_rterm(body, path, out);
            path.pop();
        }
        RTerm::BApp(h, bunch) => {
            if matches!(**h, RTerm::Abs(_, _)) {
                out.push(path.clone());
            }
            path.push(RStep::BAppHead);
            walk_rterm(h, path, out);
            path.pop();
            for (i, elem) in bunch.expand().iter().enumerate() {
                path.push(RStep::BAppElem(i));
                walk_rterm(elem, path, out);
                path.pop();
            }
        }
    }
}

pub fn rterm_step_at(t: &RTerm, path: &[RStep]) -> Option<RComb> {
    match path.split_first() {
        None => match t {
            RTerm::BApp(h, bunch) => match &**h {
                RTerm::Abs(x, body) => Some(bunch_reduce(body, x, bunch)),
                _ => None,
            },
            _ => None,
        },
        Some((step, rest)) => match (step, t) {
            (RStep::AbsBody, RTerm::Abs(x, body)) => {
                Some(RTerm::abs_comb(x, &rterm_step_at(body, rest)?))
            }
            (RStep::BAppHead, RTerm::BApp(h, bunch)) => {
                let slots: Vec<RComb> = bunch
                    .expand()
                    .into_iter()
                    .map(RComb::singleton)
                    .collect();
                Some(RTerm::bapp_comb(&rterm_step_at(h, rest)?, &slots))
            }
            (RStep::BAppElem(i), RTerm::BApp(h, bunch)) => {
                let elems = bunch.expand();
                let reduced = rterm_step_at(&elems[*i], rest)?;
                let mut slots: Vec<RComb> = elems.into_iter().map(RComb::singleton).collect();
                slots[*i] = reduced;
                Some(RTerm::bapp_comb(&RComb::singleton((**h).clone()), &slots))
            }
            _ => None,
        },
    }
}

/// Full normal form; the calculus is strongly normalizing, fuel is a
/// safety net only.
pub fn normalize_resource(u: &RComb, fuel: usize) -> Result<RComb, ResourceError> {
    let mut current = u.clone();
    for _ in 0..fuel {
        let mut hit: Option<(RTerm, Scalar, RPath)> = None;
        for (t, c) in current.iter() {
            if let Some(path) = rterm_redexes(t).into_iter().next() {
                hit = Some((t.clone(), c.clone(), path));
                break;
            }
        }
        let Some((t, c, path)) = hit else {
            return Ok(current);
        };
        let reduced = rterm_step_at(&t, &path).expect("enumerated redex");
        current.add_term(c.neg(), t);
        current = current.add(&reduced.scale(&c));
    }
    Err(ResourceError::FuelExhausted)
}

/// Seeded-choice normalization for confluence checks.
pub fn normalize_resource_with(
    u: &RComb,
    fuel: usize,
    mut pick: impl FnMut(usize) -> usize,
) -> Result<RComb, ResourceError> {
    let mut current = u.clone();
    for _ in 0..fuel {
        let mut candidates: Vec<(RTerm, Scalar, RPath)> = Vec::new();
        for (t, c) in current.iter() {
            for r in rterm_redexes(t) {
                candidates.push((t.clone(), c.clone(), r));
            }
        }
        if candidates.is_empty() {
            return Ok(current);
        }
        let (t, c, path) = candidates.swap_remove(pick(candidates.len()));
        let reduced = rterm_step_at(&t, &path).expect("enumerated redex");
        current.add_term(c.neg(), t);
        current = current.add(&reduced.scale(&c));
    }
    Err(ResourceError::FuelExhausted)
}

// ---------------------------------------------------------------------------
// Taylor expansion

/// Hereditarily replace ordinary application by the weighted series over
/// bunch sizes, truncated at multiplicity `bound` for the duplicable slot
/// of every application node. Coefficients are exactly 1/p!.
pub fn taylor_expand(m: &DTerm, bound: usize) -> RComb {
    match m {
        DTerm::Var(x) => RTerm::var_comb(x),
        DTerm::Abs(x, body) => RTerm::abs_comb(x, &taylor_expand(body, bound)),
        DTerm::App(head, arg) => {
            let (base, linear_args) = head.split_chain();
            let base_tay = taylor_expand(base, bound);
            let linear_tays: Vec<RComb> = linear_args
                .iter()
                .map(|n| taylor_expand(n, bound))
                .collect();
            let arg_tay = arg.bind(|t| taylor_expand(t, bound));
            let mut out = RComb::zero();
            for p in 0..=bound {
                let mut slots = linear_tays.clone();
                for _ in 0..p {
                    slots.push(arg_tay.clone());
                }
                let term = RTerm::bapp_comb(&base_tay, &slots);
                out = out.add(&term.scale(&Scalar::one().div(&Scalar::factorial(p))));
            }
            out
        }
        DTerm::DApp(_, _) => {
            // a bare differential chain: a fully linear application with no
            // duplicable slot
            let (base, linear_args) = m.split_chain();
            let base_tay = taylor_expand(base, bound);
            let slots: Vec<RComb> = linear_args
                .iter()
                .map(|n| taylor_expand(n, bound))
                .collect();
            RTerm::bapp_comb(&base_tay, &slots)
        }
    }
}

pub fn taylor_expand_comb(m: &DComb, bound: usize) -> RComb {
    m.bind(|t| taylor_expand(t, bound))
}

// ---------------------------------------------------------------------------
// antiderivative

/// The antiderivative of a combination with respect to `x`: each simple
/// term is scaled by 1/(deg_x + 1), like the monomial rule X^d -> X^d/(d+1)
/// read on coefficients.
pub fn antiderive_resource(u: &RComb, x: &str) -> RComb {
    let mut out = RComb::zero();
    for (t, c) in u.iter() {
        let d = t.degree(x);
        out.add_term(c.div(&Scalar::from_int((d + 1) as i64)), t.clone());
    }
    out
}

/// Build the antiderivative witness `v = I_x(u)[x/h]` and verify that its
/// derivative along `h` gives back `u` exactly. `u` must be linear in `h`
/// and satisfy the symmetry hypothesis (checked with a fresh variable).
pub fn resource_antiderivative(u: &RComb, x: &str, h: &str) -> Result<RComb, ResourceError> {
    for (t, _) in u.iter() {
        if t.degree(h) != 1 {
            return Err(ResourceError::NotLinearIn(h.to_string()));
        }
    }
    // fresh h'
    let mut avoid: BTreeSet<String> = u.iter().flat_map(|(t, _)| t.free_vars()).collect();
    avoid.insert(x.to_string());
    avoid.insert(h.to_string());
    let hp = fresh_name(h, &avoid);
    let lhs = rdsubst_comb(u, &RTerm::Var(hp.clone()), x);
    let swapped = rsubst_var_comb(u, h, &RTerm::Var(hp.clone()));
    let rhs = rdsubst_comb(&swapped, &RTerm::Var(h.to_string()), x);
    // compare under h <-> h' symmetry: lhs has h free (from u) and h'
    // inserted; rhs has h inserted and h' from the swap
    if lhs != rhs {
        return Err(ResourceError::SymmetryViolation(format!(
            "d(u)/d{}.{} = {}  but  d(u[{}/{}])/d{}.{} = {}",
            x,
            hp,
            comb_to_string(&lhs),
            hp,
            h,
            x,
            h,
            comb_to_string(&rhs)
        )));
    }
    let v = rsubst_var_comb(&antiderive_resource(u, x), h, &RTerm::Var(x.to_string()));
    let back = rdsubst_comb(&v, &RTerm::Var(h.to_string()), x);
    if &back != u {
        return Err(ResourceError::SymmetryViolation(format!(
            "derivative of the candidate antiderivative is {} instead of {}",
            comb_to_string(&back),
            comb_to_string(u)
        )));
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// printing

impl fmt::Display for DTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DTerm::Var(x) => write!(f, "{}", x),
            DTerm::Abs(x, body) => write!(f, "\\{}. {}", x, body),
            DTerm::App(m, r) => write!(f, "({}) ({})", m, comb_to_string(r)),
            DTerm::DApp(m, n) => {
                let ms = match **m {
                    DTerm::Var(_) | DTerm::DApp(_, _) => format!("{}", m),
                    _ => format!("({})", m),
                };
                let ns = match **n {
                    DTerm::Var(_) => format!("{}", n),
                    _ => format!("({})", n),
                };
                write!(f, "D {} . {}", ms, ns)
            }
        }
    }
}

impl fmt::Display for RTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RTerm::Var(x) => write!(f, "{}", x),
            RTerm::Abs(x, body) => write!(f, "\\{}. {}", x, body),
            RTerm::BApp(h, bunch) => {
                write!(f, "<{}>[", h)?;
                for (i, t) in bunch.expand().iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", t)?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Deterministic rendering of a combination.
pub fn comb_to_string<T: Ord + Clone + fmt::Display>(c: &LinComb<T>) -> String {
    if c.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (t, coeff)) in c.iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        if !coeff.is_one() {
            out.push_str(&format!("{} * ", coeff));
        }
        out.push_str(&t.to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> DTerm {
        DTerm::Var(x.to_string())
    }

    fn rv(x: &str) -> RTerm {
        RTerm::Var(x.to_string())
    }

    #[test]
    fn subst_examples() {
        let r = DComb::singleton(v("r"));
        assert_eq!(subst(&v("x"), &r, "x"), r);

        let t = DTerm::Abs("y".into(), Box::new(v("x")));
        let expected = DTerm::abs_comb("y", &r);
        assert_eq!(subst(&t, &r, "x"), expected);

        // linear in the subject
        let two_m = DComb::of(Scalar::from_int(2), v("x"));
        assert_eq!(subst_comb(&two_m, &r, "x"), r.scale(&Scalar::from_int(2)));
    }

    #[test]
    fn dsubst_equations() {
        let n = v("n");
        assert_eq!(dsubst(&v("y"), &n, "x"), DComb::zero());
        assert_eq!(dsubst(&v("x"), &n, "x"), DComb::singleton(n.clone()));

        // d((x)x)/dx.n = (n)x + (D x.n)x
        let xx = DTerm::App(Box::new(v("x")), DComb::singleton(v("x")));
        let got = dsubst(&xx, &n, "x");
        let expect = DTerm::app_comb(&DComb::singleton(v("n")), &DComb::singleton(v("x"))).add(
            &DTerm::app_comb(
                &DTerm::dapp_comb(&DComb::singleton(v("x")), &DComb::singleton(v("n"))),
                &DComb::singleton(v("x")),
            ),
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn dsubst_is_bilinear() {
        let m1 = v("x");
        let m2 = DTerm::Abs("y".into(), Box::new(v("x")));
        let m = DComb::of(Scalar::from_int(2), m1.clone())
            .add(&DComb::of(Scalar::from_int(3), m2.clone()));
        let n = DComb::singleton(v("n"));
        let lhs = dsubst_comb(&m, &n, "x");
        let rhs = dsubst(&m1, &v("n"), "x")
            .scale(&Scalar::from_int(2))
            .add(&dsubst(&m2, &v("n"), "x").scale(&Scalar::from_int(3)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn beta_examples() {
        // (\x.x) y -> y
        let id = DTerm::Abs("x".into(), Box::new(v("x")));
        let app = DTerm::App(Box::new(id), DComb::singleton(v("y")));
        let reduced = step_dterm(&app, &[]).unwrap();
        assert_eq!(reduced, DComb::singleton(v("y")));

        // D(\x.x).u -> \x.u
        let id = DTerm::Abs("x".into(), Box::new(v("x")));
        let dapp = DTerm::DApp(Box::new(id), Box::new(v("u")));
        let reduced = step_dterm(&dapp, &[]).unwrap();
        assert_eq!(reduced, DTerm::abs_comb("x", &DComb::singleton(v("u"))));

        // D(\x.y).u -> \x.0 = 0
        let konst = DTerm::Abs("x".into(), Box::new(v("y")));
        let dapp = DTerm::DApp(Box::new(konst), Box::new(v("u")));
        assert!(step_dterm(&dapp, &[]).unwrap().is_zero());
    }

    #[test]
    fn symmetry_of_derivatives_is_structural() {
        let m = v("m");
        let a = DTerm::dapp_comb(
            &DTerm::dapp_comb(&DComb::singleton(m.clone()), &DComb::singleton(v("n1"))),
            &DComb::singleton(v("n2")),
        );
        let b = DTerm::dapp_comb(
            &DTerm::dapp_comb(&DComb::singleton(m), &DComb::singleton(v("n2"))),
            &DComb::singleton(v("n1")),
        );
        assert_eq!(a, b);
    }

    #[test]
    fn degree_examples() {
        // deg(<x>[x,y], x) = 2
        let t = RTerm::BApp(
            Box::new(rv("x")),
            Multiset::from_iter([rv("x"), rv("y")]),
        );
        assert_eq!(t.degree("x"), 2);

        let bound = RTerm::Abs("x".into(), Box::new(rv("x")));
        assert_eq!(bound.degree("x"), 0);
        assert_eq!(rv("y").degree("x"), 0);
    }

    #[test]
    fn bunch_reduce_examples() {
        // <\x.<x>[x]>[u,v] -> <u>[v] + <v>[u]
        let body = RTerm::BApp(Box::new(rv("x")), Multiset::from_iter([rv("x")]));
        let bunch = Multiset::from_iter([rv("u"), rv("v")]);
        let got = bunch_reduce(&body, "x", &bunch);
        let e1 = RTerm::BApp(Box::new(rv("u")), Multiset::from_iter([rv("v")]));
        let e2 = RTerm::BApp(Box::new(rv("v")), Multiset::from_iter([rv("u")]));
        let mut expect = RComb::zero();
        expect.add_term(Scalar::one(), e1);
        expect.add_term(Scalar::one(), e2);
        assert_eq!(got, expect);

        // degree mismatch gives zero
        assert!(bunch_reduce(&rv("y"), "x", &Multiset::from_iter([rv("u")])).is_zero());

        // identity
        let got = bunch_reduce(&rv("x"), "x", &Multiset::from_iter([rv("u")]));
        assert_eq!(got, RComb::singleton(rv("u")));
    }

    // independent oracle: assign bunch elements to occurrences one at a
    // time, recursing over which element fills the first occurrence.
    fn bunch_reduce_oracle(body: &RTerm, x: &str, bunch: &[RTerm]) -> RComb {
        fn go(body: &RTerm, x: &str, remaining: &[RTerm], chosen: &mut Vec<RTerm>, out: &mut RComb) {
            if remaining.is_empty() {
                let mut next = 0;
                let result = subst_occurrences(body, x, chosen, &mut next);
                out.add_term(Scalar::one(), result.alpha_canonicalize());
                return;
            }
            for i in 0..remaining.len() {
                let mut rest = remaining.to_vec();
                let elem = rest.remove(i);
                chosen.push(elem);
                go(body, x, &rest, chosen, out);
                chosen.pop();
            }
        }
        if body.degree(x) != bunch.len() {
            return RComb::zero();
        }
        let mut avoid: BTreeSet<String> = bunch.iter().flat_map(|a| a.free_vars()).collect();
        avoid.insert(x.to_string());
        let safe = retreat_binders(body, &avoid);
        let mut out = RComb::zero();
        go(&safe, x, bunch, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn bunch_reduce_matches_oracle() {
        let bodies = vec![
            RTerm::BApp(Box::new(rv("x")), Multiset::from_iter([rv("x")])),
            RTerm::BApp(
                Box::new(rv("x")),
                Multiset::from_iter([rv("x"), rv("x")]),
            ),
            RTerm::Abs("y".into(), Box::new(RTerm::BApp(
                Box::new(rv("x")),
                Multiset::from_iter([rv("y"), rv("x")]),
            ))),
        ];
        let bunches: Vec<Vec<RTerm>> = vec![
            vec![rv("u"), rv("v")],
            vec![rv("u"), rv("u"), rv("w")],
            vec![rv("u"), rv("v"), rv("w")],
        ];
        for body in &bodies {
            for bunch in &bunches {
                let got = bunch_reduce(body, "x", &Multiset::from_iter(bunch.clone()));
                let want = bunch_reduce_oracle(body, "x", bunch);
                assert_eq!(got, want, "body {} bunch {:?}", body, bunch);
            }
        }
    }

    #[test]
    fn linearity_expansion() {
        // <x>[y+z, y+z] = <x>[y,y] + 2<x>[y,z] + <x>[z,z]
        let yz = RComb::singleton(rv("y")).add(&RComb::singleton(rv("z")));
        let got = RTerm::bapp_comb(&RComb::singleton(rv("x")), &[yz.clone(), yz]);
        let mk = |a: &str, b: &str| {
            RTerm::BApp(Box::new(rv("x")), Multiset::from_iter([rv(a), rv(b)]))
        };
        let mut expect = RComb::zero();
        expect.add_term(Scalar::one(), mk("y", "y"));
        expect.add_term(Scalar::from_int(2), mk("y", "z"));
        expect.add_term(Scalar::one(), mk("z", "z"));
        assert_eq!(got, expect);
    }

    #[test]
    fn normalize_two_steps() {
        // <\x.<x>[x]>[\y.y, z] -> z + <z>[\y.y] after full normalization
        let body = RTerm::BApp(Box::new(rv("x")), Multiset::from_iter([rv("x")]));
        let idr = RTerm::Abs("y".into(), Box::new(rv("y")));
        let t = RTerm::BApp(
            Box::new(RTerm::Abs("x".into(), Box::new(body))),
            Multiset::from_iter([idr.clone(), rv("z")]),
        );
        let nf = normalize_resource(&RComb::singleton(t), 100).unwrap();
        let mut expect = RComb::zero();
        expect.add_term(Scalar::one(), rv("z"));
        expect.add_term(
            Scalar::one(),
            RTerm::BApp(Box::new(rv("z")), Multiset::from_iter([idr]))
                .alpha_canonicalize(),
        );
        assert_eq!(nf, expect);
    }

    #[test]
    fn normal_form_is_fixed() {
        let t = RTerm::BApp(Box::new(rv("z")), Multiset::from_iter([rv("u")]));
        let c = RComb::singleton(t);
        assert_eq!(normalize_resource(&c, 10).unwrap(), c);
    }

    #[test]
    fn coefficients_combine() {
        // <\x.y>[ ]-style duplicates: reduction producing t + t yields 2t
        let body = RTerm::BApp(Box::new(rv("x")), Multiset::from_iter([rv("x")]));
        let t = RTerm::BApp(
            Box::new(RTerm::Abs("x".into(), Box::new(body))),
            Multiset::from_iter([rv("u"), rv("u")]),
        );
        let nf = normalize_resource(&RComb::singleton(t), 100).unwrap();
        let expect = RComb::of(
            Scalar::from_int(2),
            RTerm::BApp(Box::new(rv("u")), Multiset::from_iter([rv("u")])),
        );
        assert_eq!(nf, expect);
    }

    #[test]
    fn euler_identity() {
        let terms = vec![
            RTerm::BApp(Box::new(rv("x")), Multiset::from_iter([rv("x"), rv("y")])),
            rv("x"),
            RTerm::Abs("y".into(), Box::new(RTerm::BApp(
                Box::new(rv("x")),
                Multiset::from_iter([rv("x"), rv("x")]),
            ))),
        ];
        for s in terms {
            let d = s.degree("x");
            let got = rdsubst(&s, &rv("x"), "x");
            let expect = RComb::of(Scalar::from_int(d as i64), s.alpha_canonicalize());
            assert_eq!(got, expect, "Euler identity for {}", s);
        }
    }

    #[test]
    fn taylor_examples() {
        // Tay(x) = x
        assert_eq!(taylor_expand(&v("x"), 3), RTerm::var_comb("x"));

        // Tay((m) r, 2) = <m>[] + <m>[r] + 1/2 <m>[r,r]
        let app = DTerm::App(Box::new(v("m")), DComb::singleton(v("r")));
        let got = taylor_expand(&app, 2);
        let mk = |k: usize| {
            let mut b = Multiset::new();
            b.insert_many(rv("r"), k);
            RTerm::BApp(Box::new(rv("m")), b)
        };
        let mut expect = RComb::zero();
        expect.add_term(Scalar::one(), mk(0));
        expect.add_term(Scalar::one(), mk(1));
        expect.add_term(Scalar::ratio(1, 2), mk(2));
        assert_eq!(got, expect);

        // Tay(\x.M) = \x.Tay(M)
        let lam = DTerm::Abs("x".into(), Box::new(v("x")));
        assert_eq!(
            taylor_expand(&lam, 2),
            RTerm::abs_comb("x", &RTerm::var_comb("x"))
        );
    }

    #[test]
    fn antiderivative_examples() {
        // u = <x>[h] + <h>[x] -> v = <x>[x]
        let u1 = RTerm::BApp(Box::new(rv("x")), Multiset::from_iter([rv("h")]));
        let u2 = RTerm::BApp(Box::new(rv("h")), Multiset::from_iter([rv("x")]));
        let mut u = RComb::zero();
        u.add_term(Scalar::one(), u1.clone());
        u.add_term(Scalar::one(), u2);
        let v = resource_antiderivative(&u, "x", "h").unwrap();
        let expect = RComb::singleton(RTerm::BApp(
            Box::new(rv("x")),
            Multiset::from_iter([rv("x")]),
        ));
        assert_eq!(v, expect);

        // degree 0 in x: I_x(u) = u
        let c = RComb::singleton(RTerm::BApp(
            Box::new(rv("y")),
            Multiset::from_iter([rv("h")]),
        ));
        assert_eq!(antiderive_resource(&c, "x"), c);

        // asymmetric u fails
        let bad = RComb::singleton(u1);
        assert!(matches!(
            resource_antiderivative(&bad, "x", "h"),
            Err(ResourceError::SymmetryViolation(_))
        ));
    }

    #[test]
    fn antiderivative_rejects_nonlinear_h() {
        let t = RTerm::BApp(Box::new(rv("h")), Multiset::from_iter([rv("h")]));
        let u = RComb::singleton(t);
        assert!(matches!(
            resource_antiderivative(&u, "x", "h"),
            Err(ResourceError::NotLinearIn(_))
        ));
    }
}
