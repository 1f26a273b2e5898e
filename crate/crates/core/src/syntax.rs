//! Proof trees, cuts, simple proof-structures and their weighted sums.
//!
//! A simple proof-structure is a pair `(trees ; cuts)` whose variable sets
//! are pairwise disjoint; a net of width n is a finite linear combination of
//! simple proof-structures of width n. Cuts are kept as a canonical multiset
//! (sorted list) and support elements are stored alpha-canonically, so
//! structural equality of nets is equality up to renaming of bound pairs and
//! permutation of cuts.

use crate::algebra::{LinComb, Scalar, SemiringMode};
use crate::typing::LType;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A variable or its covariable. The involution swaps `co`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub base: String,
    pub co: bool,
}

impl Var {
    pub fn plain(name: impl Into<String>) -> Var {
        Var {
            base: name.into(),
            co: false,
        }
    }

    pub fn co_of(name: impl Into<String>) -> Var {
        Var {
            base: name.into(),
            co: true,
        }
    }

    /// The involution x -> x̄; applying it twice is the identity.
    pub fn conjugate(&self) -> Var {
        Var {
            base: self.base.clone(),
            co: !self.co,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.co {
            write!(f, "~{}", self.base)
        } else {
            write!(f, "{}", self.base)
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ProofTree {
    Var(Var),
    Tens(Box<ProofTree>, Box<ProofTree>),
    Par(Box<ProofTree>, Box<ProofTree>),
    /// Weakening leaf, with an optional surface type annotation `w:?a`.
    Weak(Option<LType>),
    /// Coweakening leaf, `cw:!a`.
    Coweak(Option<LType>),
    Der(Box<ProofTree>),
    Coder(Box<ProofTree>),
    Contr(Box<ProofTree>, Box<ProofTree>),
    Cocontr(Box<ProofTree>, Box<ProofTree>),
    /// Promotion box. The content must be a closed net of width `arity + 1`
    /// (checked on construction); the arity is kept explicitly so that boxes
    /// with zero content still have a definite interface.
    Box_ {
        arity: usize,
        content: Box<Net>,
        args: Vec<ProofTree>,
    },
}

impl ProofTree {
    pub fn tens(l: ProofTree, r: ProofTree) -> ProofTree {
        ProofTree::Tens(Box::new(l), Box::new(r))
    }

    pub fn par(l: ProofTree, r: ProofTree) -> ProofTree {
        ProofTree::Par(Box::new(l), Box::new(r))
    }

    pub fn der(t: ProofTree) -> ProofTree {
        ProofTree::Der(Box::new(t))
    }

    pub fn coder(t: ProofTree) -> ProofTree {
        ProofTree::Coder(Box::new(t))
    }

    pub fn contr(l: ProofTree, r: ProofTree) -> ProofTree {
        ProofTree::Contr(Box::new(l), Box::new(r))
    }

    pub fn cocontr(l: ProofTree, r: ProofTree) -> ProofTree {
        ProofTree::Cocontr(Box::new(l), Box::new(r))
    }

    pub fn var(name: &str) -> ProofTree {
        ProofTree::Var(Var::plain(name))
    }

    pub fn covar(name: &str) -> ProofTree {
        ProofTree::Var(Var::co_of(name))
    }

    pub fn box_(content: Net, args: Vec<ProofTree>) -> Result<ProofTree, SyntaxError> {
        let arity = args.len();
        if !content.is_zero() && content.width() != arity + 1 {
            return Err(SyntaxError::BoxWidth {
                arity,
                content_width: content.width(),
            });
        }
        if !content.free_vars().is_empty() {
            return Err(SyntaxError::BoxContentNotClosed(
                content.free_vars().iter().next().unwrap().clone(),
            ));
        }
        Ok(ProofTree::Box_ {
            arity,
            content: Box::new(content),
            args,
        })
    }

    /// Variables of the tree. Box contents are closed, so they contribute
    /// nothing; only the box arguments count.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            ProofTree::Var(v) => {
                out.insert(v.clone());
            }
            ProofTree::Tens(l, r)
            | ProofTree::Par(l, r)
            | ProofTree::Contr(l, r)
            | ProofTree::Cocontr(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            ProofTree::Der(t) | ProofTree::Coder(t) => t.collect_vars(out),
            ProofTree::Weak(_) | ProofTree::Coweak(_) => {}
            ProofTree::Box_ { args, .. } => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    /// Number of constructor nodes (variables and leaves count as one each;
    /// box contents are included).
    pub fn size(&self) -> usize {
        match self {
            ProofTree::Var(_) | ProofTree::Weak(_) | ProofTree::Coweak(_) => 1,
            ProofTree::Der(t) | ProofTree::Coder(t) => 1 + t.size(),
            ProofTree::Tens(l, r)
            | ProofTree::Par(l, r)
            | ProofTree::Contr(l, r)
            | ProofTree::Cocontr(l, r) => 1 + l.size() + r.size(),
            ProofTree::Box_ { content, args, .. } => {
                1 + content.size() + args.iter().map(|a| a.size()).sum::<usize>()
            }
        }
    }

    fn rename(&self, map: &BTreeMap<Var, Var>) -> ProofTree {
        match self {
            ProofTree::Var(v) => ProofTree::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            ProofTree::Tens(l, r) => ProofTree::tens(l.rename(map), r.rename(map)),
            ProofTree::Par(l, r) => ProofTree::par(l.rename(map), r.rename(map)),
            ProofTree::Contr(l, r) => ProofTree::contr(l.rename(map), r.rename(map)),
            ProofTree::Cocontr(l, r) => ProofTree::cocontr(l.rename(map), r.rename(map)),
            ProofTree::Der(t) => ProofTree::der(t.rename(map)),
            ProofTree::Coder(t) => ProofTree::coder(t.rename(map)),
            ProofTree::Weak(a) => ProofTree::Weak(a.clone()),
            ProofTree::Coweak(a) => ProofTree::Coweak(a.clone()),
            ProofTree::Box_ {
                arity,
                content,
                args,
            } => ProofTree::Box_ {
                arity: *arity,
                content: content.clone(),
                args: args.iter().map(|a| a.rename(map)).collect(),
            },
        }
    }

    /// Drop all w/cw type annotations, recursively.
    pub fn strip_annotations(&self) -> ProofTree {
        match self {
            ProofTree::Weak(_) => ProofTree::Weak(None),
            ProofTree::Coweak(_) => ProofTree::Coweak(None),
            ProofTree::Var(v) => ProofTree::Var(v.clone()),
            ProofTree::Tens(l, r) => ProofTree::tens(l.strip_annotations(), r.strip_annotations()),
            ProofTree::Par(l, r) => ProofTree::par(l.strip_annotations(), r.strip_annotations()),
            ProofTree::Contr(l, r) => {
                ProofTree::contr(l.strip_annotations(), r.strip_annotations())
            }
            ProofTree::Cocontr(l, r) => {
                ProofTree::cocontr(l.strip_annotations(), r.strip_annotations())
            }
            ProofTree::Der(t) => ProofTree::der(t.strip_annotations()),
            ProofTree::Coder(t) => ProofTree::coder(t.strip_annotations()),
            ProofTree::Box_ {
                arity,
                content,
                args,
            } => ProofTree::Box_ {
                arity: *arity,
                content: Box::new(content.strip_annotations()),
                args: args.iter().map(|a| a.strip_annotations()).collect(),
            },
        }
    }
}

/// A cut `<left | right>` between two trees with disjoint variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Cut {
    pub left: ProofTree,
    pub right: ProofTree,
}

impl Cut {
    pub fn new(left: ProofTree, right: ProofTree) -> Result<Cut, SyntaxError> {
        let lv = left.vars();
        if let Some(v) = right.vars().intersection(&lv).next() {
            return Err(SyntaxError::VariableClash(v.clone()));
        }
        Ok(Cut { left, right })
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut v = self.left.vars();
        v.extend(self.right.vars());
        v
    }

    pub fn size(&self) -> usize {
        self.left.size() + self.right.size()
    }

    fn rename(&self, map: &BTreeMap<Var, Var>) -> Cut {
        Cut {
            left: self.left.rename(map),
            right: self.right.rename(map),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SyntaxError {
    /// Two components of a simple net share a variable.
    VariableClash(Var),
    BoxWidth { arity: usize, content_width: usize },
    BoxContentNotClosed(Var),
    WidthMismatch { expected: usize, got: usize },
    /// A substitution target does not occur exactly once.
    NotLinear(Var),
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntaxError::VariableClash(v) => write!(f, "variable {} occurs twice", v),
            SyntaxError::BoxWidth {
                arity,
                content_width,
            } => write!(
                f,
                "box of arity {} needs content of width {}, got {}",
                arity,
                arity + 1,
                content_width
            ),
            SyntaxError::BoxContentNotClosed(v) => {
                write!(f, "box content has free variable {}", v)
            }
            SyntaxError::WidthMismatch { expected, got } => {
                write!(f, "expected width {}, got {}", expected, got)
            }
            SyntaxError::NotLinear(v) => {
                write!(f, "variable {} does not occur exactly once", v)
            }
        }
    }
}

impl std::error::Error for SyntaxError {}

/// A simple proof-structure `(trees ; cuts)`.
///
/// The cut list is sorted on construction; two simple nets built from the
/// same cuts in different orders are equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SimpleNet {
    trees: Vec<ProofTree>,
    cuts: Vec<Cut>,
}

impl SimpleNet {
    pub fn new(trees: Vec<ProofTree>, cuts: Vec<Cut>) -> Result<SimpleNet, SyntaxError> {
        let mut seen: BTreeSet<Var> = BTreeSet::new();
        for vs in trees
            .iter()
            .map(|t| t.vars())
            .chain(cuts.iter().map(|c| c.vars()))
        {
            for v in vs {
                if !seen.insert(v.clone()) {
                    return Err(SyntaxError::VariableClash(v));
                }
            }
        }
        let mut cuts = cuts;
        cuts.sort();
        Ok(SimpleNet { trees, cuts })
    }

    pub fn empty() -> SimpleNet {
        SimpleNet {
            trees: Vec::new(),
            cuts: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[ProofTree] {
        &self.trees
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn size(&self) -> usize {
        self.trees.iter().map(|t| t.size()).sum::<usize>()
            + self.cuts.iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in &self.trees {
            out.extend(t.vars());
        }
        for c in &self.cuts {
            out.extend(c.vars());
        }
        out
    }

    /// Free and bound variables: x is bound when both x and x̄ occur.
    pub fn var_split(&self) -> (BTreeSet<Var>, BTreeSet<Var>) {
        let all = self.all_vars();
        let mut free = BTreeSet::new();
        let mut bound = BTreeSet::new();
        for v in &all {
            if all.contains(&v.conjugate()) {
                bound.insert(v.clone());
            } else {
                free.insert(v.clone());
            }
        }
        (free, bound)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        self.var_split().0
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn strip_annotations(&self) -> SimpleNet {
        let mut n = SimpleNet {
            trees: self.trees.iter().map(|t| t.strip_annotations()).collect(),
            cuts: self
                .cuts
                .iter()
                .map(|c| Cut {
                    left: c.left.strip_annotations(),
                    right: c.right.strip_annotations(),
                })
                .collect(),
        };
        n.cuts.sort();
        n
    }

    /// Rename bound pairs to `v0, v1, ...` in traversal order (trees first,
    /// then cuts), skipping names already taken by free variables. The pole
    /// seen first keeps plain polarity. Cuts are re-sorted and the renaming
    /// recomputed until stable, so the result is a canonical representative
    /// of the alpha-class.
    pub fn alpha_canonicalize(&self) -> SimpleNet {
        let mut current = self.clone();
        for _ in 0..8 {
            let renamed = current.rename_pass();
            let mut sorted = renamed.clone();
            sorted.cuts.sort();
            if sorted == current {
                return sorted;
            }
            current = sorted;
        }
        current
    }

    fn rename_pass(&self) -> SimpleNet {
        let (free, bound) = self.var_split();
        let free_names: BTreeSet<&str> = free.iter().map(|v| v.base.as_str()).collect();
        let mut order: Vec<Var> = Vec::new();
        let mut seen: BTreeSet<Var> = BTreeSet::new();
        let mut visit = |v: &Var| {
            if bound.contains(v) && !seen.contains(v) && !seen.contains(&v.conjugate()) {
                order.push(v.clone());
            }
            seen.insert(v.clone());
        };
        for t in &self.trees {
            visit_tree_vars(t, &mut visit);
        }
        for c in &self.cuts {
            visit_tree_vars(&c.left, &mut visit);
            visit_tree_vars(&c.right, &mut visit);
        }
        let mut map: BTreeMap<Var, Var> = BTreeMap::new();
        let mut idx = 0usize;
        for first_pole in order {
            let name = loop {
                let cand = format!("v{}", idx);
                idx += 1;
                if !free_names.contains(cand.as_str()) {
                    break cand;
                }
            };
            map.insert(first_pole.clone(), Var::plain(&name));
            map.insert(first_pole.conjugate(), Var::co_of(&name));
        }
        SimpleNet {
            trees: self.trees.iter().map(|t| t.rename(&map)).collect(),
            cuts: self.cuts.iter().map(|c| c.rename(&map)).collect(),
        }
    }

    /// Replace the unique occurrence of `target` by `replacement`.
    /// Fails with `NotLinear` unless the variable occurs exactly once.
    pub fn substitute(&self, replacement: &ProofTree, target: &Var) -> Result<SimpleNet, SyntaxError> {
        let occurrences: usize = self
            .all_vars()
            .iter()
            .filter(|v| *v == target)
            .count();
        if occurrences != 1 {
            return Err(SyntaxError::NotLinear(target.clone()));
        }
        let trees = self
            .trees
            .iter()
            .map(|t| subst_tree(t, replacement, target))
            .collect();
        let cuts = self
            .cuts
            .iter()
            .map(|c| Cut {
                left: subst_tree(&c.left, replacement, target),
                right: subst_tree(&c.right, replacement, target),
            })
            .collect();
        SimpleNet::new(trees, cuts)
    }
}

fn visit_tree_vars(t: &ProofTree, visit: &mut impl FnMut(&Var)) {
    match t {
        ProofTree::Var(v) => visit(v),
        ProofTree::Tens(l, r)
        | ProofTree::Par(l, r)
        | ProofTree::Contr(l, r)
        | ProofTree::Cocontr(l, r) => {
            visit_tree_vars(l, visit);
            visit_tree_vars(r, visit);
        }
        ProofTree::Der(s) | ProofTree::Coder(s) => visit_tree_vars(s, visit),
        ProofTree::Weak(_) | ProofTree::Coweak(_) => {}
        ProofTree::Box_ { args, .. } => {
            for a in args {
                visit_tree_vars(a, visit);
            }
        }
    }
}

fn subst_tree(t: &ProofTree, replacement: &ProofTree, target: &Var) -> ProofTree {
    match t {
        ProofTree::Var(v) if v == target => replacement.clone(),
        ProofTree::Var(v) => ProofTree::Var(v.clone()),
        ProofTree::Tens(l, r) => ProofTree::tens(
            subst_tree(l, replacement, target),
            subst_tree(r, replacement, target),
        ),
        ProofTree::Par(l, r) => ProofTree::par(
            subst_tree(l, replacement, target),
            subst_tree(r, replacement, target),
        ),
        ProofTree::Contr(l, r) => ProofTree::contr(
            subst_tree(l, replacement, target),
            subst_tree(r, replacement, target),
        ),
        ProofTree::Cocontr(l, r) => ProofTree::cocontr(
            subst_tree(l, replacement, target),
            subst_tree(r, replacement, target),
        ),
        ProofTree::Der(s) => ProofTree::der(subst_tree(s, replacement, target)),
        ProofTree::Coder(s) => ProofTree::coder(subst_tree(s, replacement, target)),
        ProofTree::Weak(a) => ProofTree::Weak(a.clone()),
        ProofTree::Coweak(a) => ProofTree::Coweak(a.clone()),
        ProofTree::Box_ {
            arity,
            content,
            args,
        } => ProofTree::Box_ {
            arity: *arity,
            content: content.clone(),
            args: args
                .iter()
                .map(|a| subst_tree(a, replacement, target))
                .collect(),
        },
    }
}

/// A proof-structure: a width together with a formal sum of simple nets of
/// that width. The zero net exists at every width.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Net {
    width: usize,
    sum: LinComb<SimpleNet>,
}

impl Net {
    pub fn zero(width: usize) -> Net {
        Net {
            width,
            sum: LinComb::zero(),
        }
    }

    pub fn simple(p: SimpleNet) -> Net {
        Net::from_terms(p.width(), vec![(Scalar::one(), p)]).expect("width consistent")
    }

    /// Build a net from weighted simple nets, alpha-canonicalizing each
    /// support element so that coefficients of alpha-equivalent nets merge.
    pub fn from_terms(
        width: usize,
        terms: Vec<(Scalar, SimpleNet)>,
    ) -> Result<Net, SyntaxError> {
        let mut sum = LinComb::zero();
        for (c, p) in terms {
            if p.width() != width {
                return Err(SyntaxError::WidthMismatch {
                    expected: width,
                    got: p.width(),
                });
            }
            sum.add_term(c, p.alpha_canonicalize());
        }
        Ok(Net { width, sum })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_zero(&self) -> bool {
        self.sum.is_zero()
    }

    pub fn support(&self) -> impl Iterator<Item = (&SimpleNet, &Scalar)> {
        self.sum.iter().map(|(p, c)| (p, c))
    }

    pub fn support_len(&self) -> usize {
        self.sum.support_len()
    }

    pub fn coeff(&self, p: &SimpleNet) -> Scalar {
        self.sum.coeff(&p.alpha_canonicalize())
    }

    pub fn add(&self, other: &Net) -> Result<Net, SyntaxError> {
        if self.width != other.width {
            return Err(SyntaxError::WidthMismatch {
                expected: self.width,
                got: other.width,
            });
        }
        Ok(Net {
            width: self.width,
            sum: self.sum.add(&other.sum),
        })
    }

    pub fn scale(&self, c: &Scalar) -> Net {
        Net {
            width: self.width,
            sum: self.sum.scale(c),
        }
    }

    pub fn coerce(&self, mode: SemiringMode) -> Result<Net, crate::algebra::AlgebraError> {
        Ok(Net {
            width: self.width,
            sum: self.sum.coerce(mode)?,
        })
    }

    /// Total constructor count over the support.
    pub fn size(&self) -> usize {
        self.support().map(|(p, _)| p.size()).sum()
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for (p, _) in self.support() {
            out.extend(p.free_vars());
        }
        out
    }

    pub fn strip_annotations(&self) -> Net {
        let mut sum = LinComb::zero();
        for (p, c) in self.support() {
            sum.add_term(c.clone(), p.strip_annotations().alpha_canonicalize());
        }
        Net {
            width: self.width,
            sum,
        }
    }

    /// Equality up to alpha, cut order, and w/cw annotations.
    pub fn equivalent(&self, other: &Net) -> bool {
        self.strip_annotations() == other.strip_annotations()
    }
}

/// Deterministic fresh-variable source. Generated names avoid a caller
/// supplied set of taken base names, so freshness is stable under alpha.
#[derive(Clone, Debug)]
pub struct FreshSource {
    counter: u64,
}

impl FreshSource {
    pub fn new() -> FreshSource {
        FreshSource { counter: 0 }
    }

    pub fn fresh(&mut self, taken: &BTreeSet<String>) -> Var {
        loop {
            let name = format!("g{}", self.counter);
            self.counter += 1;
            if !taken.contains(&name) {
                return Var::plain(&name);
            }
        }
    }
}

impl Default for FreshSource {
    fn default() -> Self {
        FreshSource::new()
    }
}

/// Base names of every variable occurring anywhere in the net, including
/// inside box contents; used to pick fresh names.
pub fn taken_names(net: &Net) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (p, _) in net.support() {
        taken_names_simple(p, &mut out);
    }
    out
}

fn taken_names_simple(p: &SimpleNet, out: &mut BTreeSet<String>) {
    fn tree(t: &ProofTree, out: &mut BTreeSet<String>) {
        match t {
            ProofTree::Var(v) => {
                out.insert(v.base.clone());
            }
            ProofTree::Tens(l, r)
            | ProofTree::Par(l, r)
            | ProofTree::Contr(l, r)
            | ProofTree::Cocontr(l, r) => {
                tree(l, out);
                tree(r, out);
            }
            ProofTree::Der(s) | ProofTree::Coder(s) => tree(s, out),
            ProofTree::Weak(_) | ProofTree::Coweak(_) => {}
            ProofTree::Box_ { content, args, .. } => {
                for (q, _) in content.support() {
                    taken_names_simple(q, out);
                }
                for a in args {
                    tree(a, out);
                }
            }
        }
    }
    for t in p.trees() {
        tree(t, out);
    }
    for c in p.cuts() {
        tree(&c.left, out);
        tree(&c.right, out);
    }
}

// ---------------------------------------------------------------------------
// Printing. The output re-parses to an alpha-equivalent net.

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

impl ProofTree {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
        match self {
            ProofTree::Var(v) => write!(f, "{}", v),
            ProofTree::Tens(l, r) => {
                if nested {
                    write!(f, "(")?;
                }
                l.fmt_prec(f, true)?;
                write!(f, " tens ")?;
                r.fmt_prec(f, true)?;
                if nested {
                    write!(f, ")")?;
                }
                Ok(())
            }
            ProofTree::Par(l, r) => {
                if nested {
                    write!(f, "(")?;
                }
                l.fmt_prec(f, true)?;
                write!(f, " par ")?;
                r.fmt_prec(f, true)?;
                if nested {
                    write!(f, ")")?;
                }
                Ok(())
            }
            ProofTree::Weak(None) => write!(f, "w"),
            ProofTree::Weak(Some(a)) => write!(f, "w:{}", a),
            ProofTree::Coweak(None) => write!(f, "cw"),
            ProofTree::Coweak(Some(a)) => write!(f, "cw:{}", a),
            ProofTree::Der(t) => write!(f, "d({})", t),
            ProofTree::Coder(t) => write!(f, "cd({})", t),
            ProofTree::Contr(l, r) => write!(f, "c({},{})", l, r),
            ProofTree::Cocontr(l, r) => write!(f, "cc({},{})", l, r),
            ProofTree::Box_ { content, args, .. } => {
                write!(f, "box{{{}}}(", content)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}|{}>", self.left, self.right)
    }
}

impl fmt::Display for SimpleNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        if !self.trees.is_empty() {
            write!(f, "[")?;
            for (i, t) in self.trees.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", t)?;
            }
            write!(f, "] ")?;
        }
        write!(f, ";")?;
        for (i, c) in self.cuts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {}", c)?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Net {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.support().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if !c.is_one() {
                write!(f, "{} * ", c)?;
            }
            write!(f, "{}", p)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axiom(name: &str) -> SimpleNet {
        SimpleNet::new(
            vec![ProofTree::var(name), ProofTree::covar(name)],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn vars_of_tens_are_free() {
        let t = ProofTree::tens(ProofTree::var("x"), ProofTree::var("y"));
        let p = SimpleNet::new(vec![t], vec![]).unwrap();
        let (free, bound) = p.var_split();
        assert_eq!(free.len(), 2);
        assert!(bound.is_empty());
    }

    #[test]
    fn axiom_pair_is_bound() {
        let p = axiom("x");
        let (free, bound) = p.var_split();
        assert!(free.is_empty());
        assert_eq!(bound.len(), 2);
    }

    #[test]
    fn loop_is_closed() {
        let cut = Cut::new(ProofTree::var("x"), ProofTree::covar("x")).unwrap();
        let p = SimpleNet::new(vec![], vec![cut]).unwrap();
        let (free, bound) = p.var_split();
        assert!(free.is_empty());
        assert_eq!(bound.len(), 2);
        assert!(p.is_closed());
    }

    #[test]
    fn alpha_examples() {
        let x = axiom("x").alpha_canonicalize();
        let y = axiom("y").alpha_canonicalize();
        assert_eq!(x, y);
        assert_eq!(x.trees()[0], ProofTree::var("v0"));

        // free variables keep their names
        let p = SimpleNet::new(vec![ProofTree::var("z")], vec![]).unwrap();
        assert_eq!(p.alpha_canonicalize(), p);
    }

    #[test]
    fn alpha_is_idempotent() {
        let cut = Cut::new(
            ProofTree::der(ProofTree::var("q")),
            ProofTree::coder(ProofTree::covar("q")),
        )
        .unwrap();
        let p = SimpleNet::new(vec![axiom("k").trees()[0].clone(), ProofTree::covar("k")], vec![cut])
            .unwrap();
        let once = p.alpha_canonicalize();
        assert_eq!(once.alpha_canonicalize(), once);
    }

    #[test]
    fn alpha_avoids_free_name_collision() {
        // free variable already called v0: bound pair must skip that name
        let t = ProofTree::var("v0");
        let p = SimpleNet::new(
            vec![t, ProofTree::var("x"), ProofTree::covar("x")],
            vec![],
        )
        .unwrap();
        let canon = p.alpha_canonicalize();
        assert_eq!(canon.trees()[0], ProofTree::var("v0"));
        assert_eq!(canon.trees()[1], ProofTree::var("v1"));
    }

    #[test]
    fn substitution_examples() {
        let p = SimpleNet::new(vec![ProofTree::covar("x")], vec![]).unwrap();
        let s = ProofTree::covar("w");
        let q = p.substitute(&s, &Var::co_of("x")).unwrap();
        assert_eq!(q.trees()[0], ProofTree::covar("w"));

        let p = SimpleNet::new(vec![ProofTree::der(ProofTree::covar("x"))], vec![]).unwrap();
        let s = ProofTree::coder(ProofTree::var("y"));
        let q = p.substitute(&s, &Var::co_of("x")).unwrap();
        assert_eq!(
            q.trees()[0],
            ProofTree::der(ProofTree::coder(ProofTree::var("y")))
        );

        let p = SimpleNet::new(vec![ProofTree::var("z")], vec![]).unwrap();
        assert!(matches!(
            p.substitute(&ProofTree::var("y"), &Var::co_of("x")),
            Err(SyntaxError::NotLinear(_))
        ));
    }

    #[test]
    fn disjointness_is_checked() {
        let err = SimpleNet::new(vec![ProofTree::var("x"), ProofTree::var("x")], vec![]);
        assert!(matches!(err, Err(SyntaxError::VariableClash(_))));
    }

    #[test]
    fn cuts_compare_up_to_permutation() {
        let c1 = Cut::new(ProofTree::var("a"), ProofTree::covar("a")).unwrap();
        let c2 = Cut::new(ProofTree::var("b"), ProofTree::covar("b")).unwrap();
        let p = SimpleNet::new(vec![], vec![c1.clone(), c2.clone()]).unwrap();
        let q = SimpleNet::new(vec![], vec![c2, c1]).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn net_merges_alpha_equivalent_support() {
        let n = Net::from_terms(
            2,
            vec![
                (Scalar::from_int(2), axiom("x")),
                (Scalar::from_int(3), axiom("y")),
            ],
        )
        .unwrap();
        assert_eq!(n.support_len(), 1);
        assert_eq!(n.support().next().unwrap().1, &Scalar::from_int(5));
    }

    #[test]
    fn box_checks_width_and_closure() {
        let content = Net::simple(axiom("x"));
        assert!(ProofTree::box_(content.clone(), vec![]).is_err()); // width 2 vs arity 0
        let ok = ProofTree::box_(content, vec![ProofTree::var("t")]);
        assert!(ok.is_ok());

        let open = Net::simple(SimpleNet::new(vec![ProofTree::var("z"), ProofTree::var("u")], vec![]).unwrap());
        assert!(matches!(
            ProofTree::box_(open, vec![ProofTree::var("t")]),
            Err(SyntaxError::BoxContentNotClosed(_))
        ));
    }
}
