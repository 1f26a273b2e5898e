//! Linear logic types, negation, typing contexts and the local typing
//! judgment for trees, cuts and nets.
//!
//! Unannotated weakenings/coweakenings and variables not covered by the
//! ambient context are inferred by unification. A metavariable carries a
//! negation flag so that the dual of an unknown type stays representable;
//! negation is an involution, so one flag suffices.

use crate::algebra::Scalar;
use crate::syntax::{Cut, Net, ProofTree, SimpleNet, Var};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum LType {
    Atom(String),
    CoAtom(String),
    Tens(Box<LType>, Box<LType>),
    Par(Box<LType>, Box<LType>),
    Excl(Box<LType>),
    Int(Box<LType>),
}

impl LType {
    pub fn atom(name: &str) -> LType {
        LType::Atom(name.to_string())
    }

    pub fn coatom(name: &str) -> LType {
        LType::CoAtom(name.to_string())
    }

    pub fn tens(l: LType, r: LType) -> LType {
        LType::Tens(Box::new(l), Box::new(r))
    }

    pub fn par(l: LType, r: LType) -> LType {
        LType::Par(Box::new(l), Box::new(r))
    }

    pub fn excl(t: LType) -> LType {
        LType::Excl(Box::new(t))
    }

    pub fn int(t: LType) -> LType {
        LType::Int(Box::new(t))
    }

    /// Linear negation; an involution by construction.
    pub fn dual(&self) -> LType {
        match self {
            LType::Atom(a) => LType::CoAtom(a.clone()),
            LType::CoAtom(a) => LType::Atom(a.clone()),
            LType::Tens(l, r) => LType::par(l.dual(), r.dual()),
            LType::Par(l, r) => LType::tens(l.dual(), r.dual()),
            LType::Excl(t) => LType::int(t.dual()),
            LType::Int(t) => LType::excl(t.dual()),
        }
    }
}

impl fmt::Display for LType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LType::Atom(a) => write!(f, "{}", a),
            LType::CoAtom(a) => write!(f, "~{}", a),
            LType::Tens(l, r) => write!(f, "({} tens {})", l, r),
            LType::Par(l, r) => write!(f, "({} par {})", l, r),
            LType::Excl(t) => write!(f, "!{}", t),
            LType::Int(t) => write!(f, "?{}", t),
        }
    }
}

/// A finite partial map from variables to types. Whenever both poles of a
/// variable are present their types must be dual.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingContext {
    map: BTreeMap<Var, LType>,
}

impl TypingContext {
    pub fn new() -> TypingContext {
        TypingContext::default()
    }

    pub fn bind(&mut self, v: Var, ty: LType) -> Result<(), TypeError> {
        if let Some(existing) = self.map.get(&v) {
            if existing != &ty {
                return Err(TypeError::ContextClash(v, existing.clone(), ty));
            }
        }
        let conj = v.conjugate();
        if let Some(other) = self.map.get(&conj) {
            if other != &ty.dual() {
                return Err(TypeError::ContextClash(conj, other.clone(), ty.dual()));
            }
        }
        self.map.insert(v, ty);
        Ok(())
    }

    pub fn lookup(&self, v: &Var) -> Option<LType> {
        if let Some(t) = self.map.get(v) {
            return Some(t.clone());
        }
        self.map.get(&v.conjugate()).map(|t| t.dual())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &LType)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn extend_with(&self, other: &TypingContext) -> Result<TypingContext, TypeError> {
        let mut out = self.clone();
        for (v, t) in other.iter() {
            out.bind(v.clone(), t.clone())?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeError {
    TypeMismatch {
        position: String,
        expected: String,
        got: String,
    },
    UnboundVar(Var),
    /// An unannotated weakening/coweakening (or a variable or cut) whose
    /// type inference cannot pin down.
    AmbiguousType(String),
    WidthMismatch {
        expected: usize,
        got: usize,
    },
    CutTypeClash(String),
    ContextClash(Var, LType, LType),
    AnnotationShape(String),
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeError::TypeMismatch {
                position,
                expected,
                got,
            } => write!(
                f,
                "type mismatch at {}: expected {}, got {}",
                position, expected, got
            ),
            TypeError::UnboundVar(v) => write!(f, "unbound variable {}", v),
            TypeError::AmbiguousType(what) => write!(f, "cannot infer type of {}", what),
            TypeError::WidthMismatch { expected, got } => {
                write!(f, "width mismatch: expected {}, got {}", expected, got)
            }
            TypeError::CutTypeClash(m) => write!(f, "cut sides are not dual: {}", m),
            TypeError::ContextClash(v, a, b) => {
                write!(f, "context assigns {} both {} and {}", v, a, b)
            }
            TypeError::AnnotationShape(m) => write!(f, "bad annotation: {}", m),
        }
    }
}

impl std::error::Error for TypeError {}

// --- inference machinery ---------------------------------------------------

/// Inference types: ground constructors plus metavariables. The `bool` on a
/// metavariable marks "dual of the variable".
#[derive(Clone, PartialEq, Eq, Debug)]
enum Ty {
    Meta(u32, bool),
    Atom(String),
    CoAtom(String),
    Tens(Box<Ty>, Box<Ty>),
    Par(Box<Ty>, Box<Ty>),
    Excl(Box<Ty>),
    Int(Box<Ty>),
}

impl Ty {
    fn from_ltype(t: &LType) -> Ty {
        match t {
            LType::Atom(a) => Ty::Atom(a.clone()),
            LType::CoAtom(a) => Ty::CoAtom(a.clone()),
            LType::Tens(l, r) => Ty::Tens(Box::new(Ty::from_ltype(l)), Box::new(Ty::from_ltype(r))),
            LType::Par(l, r) => Ty::Par(Box::new(Ty::from_ltype(l)), Box::new(Ty::from_ltype(r))),
            LType::Excl(t) => Ty::Excl(Box::new(Ty::from_ltype(t))),
            LType::Int(t) => Ty::Int(Box::new(Ty::from_ltype(t))),
        }
    }

    fn dual(&self) -> Ty {
        match self {
            Ty::Meta(id, neg) => Ty::Meta(*id, !neg),
            Ty::Atom(a) => Ty::CoAtom(a.clone()),
            Ty::CoAtom(a) => Ty::Atom(a.clone()),
            Ty::Tens(l, r) => Ty::Par(Box::new(l.dual()), Box::new(r.dual())),
            Ty::Par(l, r) => Ty::Tens(Box::new(l.dual()), Box::new(r.dual())),
            Ty::Excl(t) => Ty::Int(Box::new(t.dual())),
            Ty::Int(t) => Ty::Excl(Box::new(t.dual())),
        }
    }
}

#[derive(Default)]
struct Unifier {
    bindings: BTreeMap<u32, Ty>,
    next: u32,
}

impl Unifier {
    fn fresh(&mut self) -> Ty {
        let id = self.next;
        self.next += 1;
        Ty::Meta(id, false)
    }

    /// Chase bindings at the root, applying the dual flag on the way.
    fn walk(&self, t: &Ty) -> Ty {
        let mut cur = t.clone();
        loop {
            match cur {
                Ty::Meta(id, neg) => match self.bindings.get(&id) {
                    Some(bound) => {
                        cur = if neg { bound.dual() } else { bound.clone() };
                    }
                    None => return Ty::Meta(id, neg),
                },
                other => return other,
            }
        }
    }

    fn occurs(&self, id: u32, t: &Ty) -> bool {
        match self.walk(t) {
            Ty::Meta(j, _) => j == id,
            Ty::Atom(_) | Ty::CoAtom(_) => false,
            Ty::Tens(l, r) | Ty::Par(l, r) => self.occurs(id, &l) || self.occurs(id, &r),
            Ty::Excl(s) | Ty::Int(s) => self.occurs(id, &s),
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty, position: &str) -> Result<(), TypeError> {
        let a = self.walk(a);
        let b = self.walk(b);
        match (&a, &b) {
            (Ty::Meta(i, ni), Ty::Meta(j, nj)) if i == j => {
                if ni == nj {
                    Ok(())
                } else {
                    // a metavariable equal to its own dual has no solution
                    Err(TypeError::TypeMismatch {
                        position: position.to_string(),
                        expected: "a type".into(),
                        got: "its own dual".into(),
                    })
                }
            }
            (Ty::Meta(i, neg), other) | (other, Ty::Meta(i, neg)) => {
                if self.occurs(*i, other) {
                    return Err(TypeError::TypeMismatch {
                        position: position.to_string(),
                        expected: "finite type".into(),
                        got: "cyclic".into(),
                    });
                }
                let bound = if *neg { other.dual() } else { other.clone() };
                self.bindings.insert(*i, bound);
                Ok(())
            }
            (Ty::Atom(x), Ty::Atom(y)) | (Ty::CoAtom(x), Ty::CoAtom(y)) if x == y => Ok(()),
            (Ty::Tens(l1, r1), Ty::Tens(l2, r2)) | (Ty::Par(l1, r1), Ty::Par(l2, r2)) => {
                self.unify(l1, l2, position)?;
                self.unify(r1, r2, position)
            }
            (Ty::Excl(s1), Ty::Excl(s2)) | (Ty::Int(s1), Ty::Int(s2)) => {
                self.unify(s1, s2, position)
            }
            _ => Err(TypeError::TypeMismatch {
                position: position.to_string(),
                expected: self.describe(&a),
                got: self.describe(&b),
            }),
        }
    }

    fn describe(&self, t: &Ty) -> String {
        match self.resolve(t) {
            Ok(l) => l.to_string(),
            Err(()) => "underdetermined type".to_string(),
        }
    }

    fn resolve(&self, t: &Ty) -> Result<LType, ()> {
        match self.walk(t) {
            Ty::Meta(_, _) => Err(()),
            Ty::Atom(a) => Ok(LType::Atom(a)),
            Ty::CoAtom(a) => Ok(LType::CoAtom(a)),
            Ty::Tens(l, r) => Ok(LType::tens(self.resolve(&l)?, self.resolve(&r)?)),
            Ty::Par(l, r) => Ok(LType::par(self.resolve(&l)?, self.resolve(&r)?)),
            Ty::Excl(s) => Ok(LType::excl(self.resolve(&s)?)),
            Ty::Int(s) => Ok(LType::int(self.resolve(&s)?)),
        }
    }
}

// Mirror trees: the shape of a proof tree with the inferred w/cw types kept
// as metas, resolved only once the whole net has been unified.

enum ATree {
    Var(Var),
    Tens(Box<ATree>, Box<ATree>),
    Par(Box<ATree>, Box<ATree>),
    Weak(Ty),
    Coweak(Ty),
    Der(Box<ATree>),
    Coder(Box<ATree>),
    Contr(Box<ATree>, Box<ATree>),
    Cocontr(Box<ATree>, Box<ATree>),
    Box_ {
        arity: usize,
        content: ANet,
        args: Vec<ATree>,
    },
}

struct ASimple {
    trees: Vec<ATree>,
    cuts: Vec<(ATree, ATree, Ty)>,
    scope: VarScope,
}

struct ANet {
    width: usize,
    terms: Vec<(Scalar, ASimple)>,
}

/// One typed support element: the element with every w/cw annotated, its
/// conclusion types, the type of each cut's left side (aligned with the
/// element's sorted cut order), and the type of every variable at the
/// outermost level.
#[derive(Clone, Debug)]
pub struct TypedSimple {
    pub net: SimpleNet,
    pub tree_types: Vec<LType>,
    pub cut_types: Vec<LType>,
    pub var_types: TypingContext,
}

#[derive(Clone, Debug)]
pub struct TypedNet {
    pub elements: Vec<TypedSimple>,
    pub gamma: Vec<LType>,
}

struct Infer<'a> {
    uni: Unifier,
    outer: Option<&'a TypingContext>,
    defaults: usize,
}

#[derive(Default)]
struct VarScope {
    metas: BTreeMap<String, u32>,
}

impl<'a> Infer<'a> {
    fn var_ty(&mut self, v: &Var, scope: &mut VarScope, use_outer: bool) -> Ty {
        if use_outer {
            if let Some(outer) = self.outer {
                if let Some(t) = outer.lookup(v) {
                    return Ty::from_ltype(&t);
                }
            }
        }
        let id = match scope.metas.get(&v.base) {
            Some(id) => *id,
            None => {
                let id = match self.uni.fresh() {
                    Ty::Meta(id, _) => id,
                    _ => unreachable!(),
                };
                scope.metas.insert(v.base.clone(), id);
                id
            }
        };
        Ty::Meta(id, v.co)
    }

    fn tree(
        &mut self,
        t: &ProofTree,
        scope: &mut VarScope,
        use_outer: bool,
    ) -> Result<(Ty, ATree), TypeError> {
        match t {
            ProofTree::Var(v) => Ok((self.var_ty(v, scope, use_outer), ATree::Var(v.clone()))),
            ProofTree::Tens(l, r) => {
                let (tl, al) = self.tree(l, scope, use_outer)?;
                let (tr, ar) = self.tree(r, scope, use_outer)?;
                Ok((
                    Ty::Tens(Box::new(tl), Box::new(tr)),
                    ATree::Tens(Box::new(al), Box::new(ar)),
                ))
            }
            ProofTree::Par(l, r) => {
                let (tl, al) = self.tree(l, scope, use_outer)?;
                let (tr, ar) = self.tree(r, scope, use_outer)?;
                Ok((
                    Ty::Par(Box::new(tl), Box::new(tr)),
                    ATree::Par(Box::new(al), Box::new(ar)),
                ))
            }
            ProofTree::Weak(ann) => {
                let ty = Ty::Int(Box::new(self.uni.fresh()));
                if let Some(a) = ann {
                    if !matches!(a, LType::Int(_)) {
                        return Err(TypeError::AnnotationShape(format!(
                            "weakening annotated with non-? type {}",
                            a
                        )));
                    }
                    self.uni
                        .unify(&ty, &Ty::from_ltype(a), "weakening annotation")?;
                }
                Ok((ty.clone(), ATree::Weak(ty)))
            }
            ProofTree::Coweak(ann) => {
                let ty = Ty::Excl(Box::new(self.uni.fresh()));
                if let Some(a) = ann {
                    if !matches!(a, LType::Excl(_)) {
                        return Err(TypeError::AnnotationShape(format!(
                            "coweakening annotated with non-! type {}",
                            a
                        )));
                    }
                    self.uni
                        .unify(&ty, &Ty::from_ltype(a), "coweakening annotation")?;
                }
                Ok((ty.clone(), ATree::Coweak(ty)))
            }
            ProofTree::Der(s) => {
                let (ts, a) = self.tree(s, scope, use_outer)?;
                Ok((Ty::Int(Box::new(ts)), ATree::Der(Box::new(a))))
            }
            ProofTree::Coder(s) => {
                let (ts, a) = self.tree(s, scope, use_outer)?;
                Ok((Ty::Excl(Box::new(ts)), ATree::Coder(Box::new(a))))
            }
            ProofTree::Contr(l, r) => {
                let (tl, al) = self.tree(l, scope, use_outer)?;
                let (tr, ar) = self.tree(r, scope, use_outer)?;
                self.uni.unify(&tl, &tr, "contraction")?;
                let inner = self.uni.fresh();
                self.uni
                    .unify(&tl, &Ty::Int(Box::new(inner)), "contraction")?;
                Ok((tl, ATree::Contr(Box::new(al), Box::new(ar))))
            }
            ProofTree::Cocontr(l, r) => {
                let (tl, al) = self.tree(l, scope, use_outer)?;
                let (tr, ar) = self.tree(r, scope, use_outer)?;
                self.uni.unify(&tl, &tr, "cocontraction")?;
                let inner = self.uni.fresh();
                self.uni
                    .unify(&tl, &Ty::Excl(Box::new(inner)), "cocontraction")?;
                Ok((tl, ATree::Cocontr(Box::new(al), Box::new(ar))))
            }
            ProofTree::Box_ {
                arity,
                content,
                args,
            } => {
                let n = *arity;
                let arg_inner: Vec<Ty> = (0..n).map(|_| self.uni.fresh()).collect();
                let out_inner = self.uni.fresh();
                let mut expected: Vec<Ty> = arg_inner
                    .iter()
                    .map(|a| Ty::Int(Box::new(a.dual())))
                    .collect();
                expected.push(out_inner.clone());
                let content_mirror = self.net(content, &expected)?;
                let mut arg_mirrors = Vec::with_capacity(n);
                for (i, arg) in args.iter().enumerate() {
                    let (ta, aa) = self.tree(arg, scope, use_outer)?;
                    self.uni.unify(
                        &ta,
                        &Ty::Excl(Box::new(arg_inner[i].clone())),
                        &format!("box argument {}", i + 1),
                    )?;
                    arg_mirrors.push(aa);
                }
                Ok((
                    Ty::Excl(Box::new(out_inner)),
                    ATree::Box_ {
                        arity: n,
                        content: content_mirror,
                        args: arg_mirrors,
                    },
                ))
            }
        }
    }

    fn simple(
        &mut self,
        p: &SimpleNet,
        expected: &[Ty],
        use_outer: bool,
    ) -> Result<ASimple, TypeError> {
        if p.width() != expected.len() {
            return Err(TypeError::WidthMismatch {
                expected: expected.len(),
                got: p.width(),
            });
        }
        let mut scope = VarScope::default();
        let mut trees = Vec::with_capacity(p.width());
        for (i, t) in p.trees().iter().enumerate() {
            let (ty, at) = self.tree(t, &mut scope, use_outer)?;
            self.uni
                .unify(&ty, &expected[i], &format!("conclusion {}", i + 1))?;
            trees.push(at);
        }
        let mut cuts = Vec::with_capacity(p.cuts().len());
        for c in p.cuts() {
            let (tl, al) = self.tree(&c.left, &mut scope, use_outer)?;
            let (tr, ar) = self.tree(&c.right, &mut scope, use_outer)?;
            self.uni.unify(&tl, &tr.dual(), "cut").map_err(|e| match e {
                TypeError::TypeMismatch { expected, got, .. } => {
                    TypeError::CutTypeClash(format!("{} vs dual of {}", expected, got))
                }
                other => other,
            })?;
            cuts.push((al, ar, tl));
        }
        Ok(ASimple { trees, cuts, scope })
    }

    /// Box contents: every support element checked against the same sequent,
    /// in a fresh variable scope that ignores the outer context.
    fn net(&mut self, n: &Net, expected: &[Ty]) -> Result<ANet, TypeError> {
        let mut terms = Vec::new();
        for (p, coeff) in n.support() {
            let element = self.simple(p, expected, false)?;
            terms.push((coeff.clone(), element));
        }
        Ok(ANet {
            width: n.width(),
            terms,
        })
    }

    // -- resolution, after all constraints are in ---------------------------

    fn resolve_tree(&mut self, a: &ATree) -> Result<ProofTree, TypeError> {
        Ok(match a {
            ATree::Var(v) => ProofTree::Var(v.clone()),
            ATree::Tens(l, r) => ProofTree::tens(self.resolve_tree(l)?, self.resolve_tree(r)?),
            ATree::Par(l, r) => ProofTree::par(self.resolve_tree(l)?, self.resolve_tree(r)?),
            ATree::Weak(ty) => {
                let t = self
                    .uni
                    .resolve(ty)
                    .map_err(|_| TypeError::AmbiguousType("weakening".into()))?;
                ProofTree::Weak(Some(t))
            }
            ATree::Coweak(ty) => {
                let t = self
                    .uni
                    .resolve(ty)
                    .map_err(|_| TypeError::AmbiguousType("coweakening".into()))?;
                ProofTree::Coweak(Some(t))
            }
            ATree::Der(s) => ProofTree::der(self.resolve_tree(s)?),
            ATree::Coder(s) => ProofTree::coder(self.resolve_tree(s)?),
            ATree::Contr(l, r) => ProofTree::contr(self.resolve_tree(l)?, self.resolve_tree(r)?),
            ATree::Cocontr(l, r) => {
                ProofTree::cocontr(self.resolve_tree(l)?, self.resolve_tree(r)?)
            }
            ATree::Box_ {
                arity,
                content,
                args,
            } => {
                let net = self.resolve_net(content)?;
                let args = args
                    .iter()
                    .map(|a| self.resolve_tree(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let _ = arity;
                ProofTree::box_(net, args).map_err(|e| TypeError::AmbiguousType(e.to_string()))?
            }
        })
    }

    fn resolve_net(&mut self, a: &ANet) -> Result<Net, TypeError> {
        let mut terms = Vec::new();
        for (coeff, el) in &a.terms {
            let (net, _, _) = self.resolve_simple(el)?;
            terms.push((coeff.clone(), net));
        }
        Net::from_terms(a.width, terms).map_err(|e| TypeError::AmbiguousType(e.to_string()))
    }

    /// Resolve one element. All w/cw types must be pinned by inference
    /// (ambiguity is an error there); variable and cut types left open after
    /// unification are harmless in the judgment and default to fresh atoms.
    fn resolve_simple(
        &mut self,
        a: &ASimple,
    ) -> Result<(SimpleNet, Vec<LType>, TypingContext), TypeError> {
        // w/cw annotations first, strictly
        let trees = a
            .trees
            .iter()
            .map(|t| self.resolve_tree(t))
            .collect::<Result<Vec<_>, _>>()?;
        let mut resolved_cuts: Vec<(Cut, Ty)> = Vec::new();
        for (l, r, ty) in &a.cuts {
            let cut = Cut {
                left: self.resolve_tree(l)?,
                right: self.resolve_tree(r)?,
            };
            resolved_cuts.push((cut, ty.clone()));
        }
        let mut var_types = TypingContext::new();
        for (base, id) in &a.scope.metas {
            let ty = self.resolve_or_default(&Ty::Meta(*id, false));
            var_types.bind(Var::plain(base.clone()), ty)?;
        }
        let mut with_types: Vec<(Cut, LType)> = resolved_cuts
            .into_iter()
            .map(|(c, ty)| {
                let lt = self.resolve_or_default(&ty);
                (c, lt)
            })
            .collect();
        with_types.sort_by(|x, y| x.0.cmp(&y.0));
        let (cuts, cut_types): (Vec<Cut>, Vec<LType>) = with_types.into_iter().unzip();
        let net =
            SimpleNet::new(trees, cuts).map_err(|e| TypeError::AmbiguousType(e.to_string()))?;
        Ok((net, cut_types, var_types))
    }

    /// Resolve, instantiating any remaining metavariable with a fresh
    /// default atom. Derivability and evaluation never depend on the name.
    fn resolve_or_default(&mut self, t: &Ty) -> LType {
        match self.uni.walk(t) {
            Ty::Meta(id, neg) => {
                let name = format!("o{}", self.defaults);
                self.defaults += 1;
                self.uni.bindings.insert(id, Ty::Atom(name.clone()));
                if neg {
                    LType::coatom(&name)
                } else {
                    LType::atom(&name)
                }
            }
            Ty::Atom(a) => LType::Atom(a),
            Ty::CoAtom(a) => LType::CoAtom(a),
            Ty::Tens(l, r) => LType::tens(self.resolve_or_default(&l), self.resolve_or_default(&r)),
            Ty::Par(l, r) => LType::par(self.resolve_or_default(&l), self.resolve_or_default(&r)),
            Ty::Excl(s) => LType::excl(self.resolve_or_default(&s)),
            Ty::Int(s) => LType::int(self.resolve_or_default(&s)),
        }
    }
}

/// Compute the ground type of a fully annotated tree under ground variable
/// types. Box output types are recovered by re-running inference on the
/// (annotated, closed) content.
pub fn ground_tree_type(vars: &TypingContext, t: &ProofTree) -> Result<LType, TypeError> {
    match t {
        ProofTree::Var(v) => vars
            .lookup(v)
            .ok_or_else(|| TypeError::UnboundVar(v.clone())),
        ProofTree::Tens(l, r) => Ok(LType::tens(
            ground_tree_type(vars, l)?,
            ground_tree_type(vars, r)?,
        )),
        ProofTree::Par(l, r) => Ok(LType::par(
            ground_tree_type(vars, l)?,
            ground_tree_type(vars, r)?,
        )),
        ProofTree::Weak(Some(a)) | ProofTree::Coweak(Some(a)) => Ok(a.clone()),
        ProofTree::Weak(None) => Err(TypeError::AmbiguousType("weakening".into())),
        ProofTree::Coweak(None) => Err(TypeError::AmbiguousType("coweakening".into())),
        ProofTree::Der(s) => Ok(LType::int(ground_tree_type(vars, s)?)),
        ProofTree::Coder(s) => Ok(LType::excl(ground_tree_type(vars, s)?)),
        ProofTree::Contr(l, _) => ground_tree_type(vars, l),
        ProofTree::Cocontr(l, _) => ground_tree_type(vars, l),
        ProofTree::Box_ { content, arity, .. } => {
            if content.is_zero() {
                return Err(TypeError::AmbiguousType("zero box content".into()));
            }
            let gamma = infer_net_sequent(content)?;
            let last = gamma
                .get(*arity)
                .ok_or_else(|| TypeError::AmbiguousType("box sequent".into()))?;
            Ok(LType::excl(last.clone()))
        }
    }
}

/// Infer the sequent of a closed annotated net with no expected types.
pub fn infer_net_sequent(n: &Net) -> Result<Vec<LType>, TypeError> {
    let mut infer = Infer {
        uni: Unifier::default(),
        outer: None,
        defaults: 0,
    };
    let expected: Vec<Ty> = (0..n.width()).map(|_| infer.uni.fresh()).collect();
    for (p, _) in n.support() {
        let _ = infer.simple(p, &expected, false)?;
    }
    expected
        .iter()
        .map(|t| {
            infer
                .uni
                .resolve(t)
                .map_err(|_| TypeError::AmbiguousType("net sequent".into()))
        })
        .collect()
}

/// Check a single tree against a ground context; returns its type.
pub fn typecheck_tree(ctx: &TypingContext, t: &ProofTree) -> Result<LType, TypeError> {
    let mut infer = Infer {
        uni: Unifier::default(),
        outer: Some(ctx),
        defaults: 0,
    };
    let mut scope = VarScope::default();
    let (ty, _mirror) = infer.tree(t, &mut scope, true)?;
    for base in scope.metas.keys() {
        let v = Var::plain(base.clone());
        if ctx.lookup(&v).is_none() {
            return Err(TypeError::UnboundVar(v));
        }
    }
    infer
        .uni
        .resolve(&ty)
        .map_err(|_| TypeError::AmbiguousType(format!("tree {}", t)))
}

/// Check a net against a sequent, inferring fresh variable and w/cw types.
/// On success every support element comes back fully annotated together
/// with its cut types and variable context (the extension of `ctx`).
pub fn typecheck_net(ctx: &TypingContext, n: &Net, gamma: &[LType]) -> Result<TypedNet, TypeError> {
    if n.width() != gamma.len() {
        return Err(TypeError::WidthMismatch {
            expected: gamma.len(),
            got: n.width(),
        });
    }
    let mut elements = Vec::new();
    for (p, _) in n.support() {
        let mut infer = Infer {
            uni: Unifier::default(),
            outer: Some(ctx),
            defaults: 0,
        };
        let expected: Vec<Ty> = gamma.iter().map(Ty::from_ltype).collect();
        let mirror = infer.simple(p, &expected, true)?;
        let (net, cut_types, var_types) = infer.resolve_simple(&mirror)?;
        elements.push(TypedSimple {
            net,
            tree_types: gamma.to_vec(),
            cut_types,
            var_types,
        });
    }
    Ok(TypedNet {
        elements,
        gamma: gamma.to_vec(),
    })
}

/// `typecheck_net` and reassemble the fully annotated net.
pub fn elaborate(ctx: &TypingContext, n: &Net, gamma: &[LType]) -> Result<Net, TypeError> {
    let typed = typecheck_net(ctx, n, gamma)?;
    let mut terms = Vec::new();
    for ((_, coeff), el) in n.support().zip(typed.elements.iter()) {
        terms.push((coeff.clone(), el.net.clone()));
    }
    Net::from_terms(n.width(), terms).map_err(|e| TypeError::AmbiguousType(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Cut, Net, ProofTree, SimpleNet, Var};
    use proptest::prelude::*;

    #[test]
    fn dual_examples() {
        let a = LType::atom("a");
        let b = LType::atom("b");
        assert_eq!(
            LType::tens(a.clone(), b.clone()).dual(),
            LType::par(a.dual(), b.dual())
        );
        assert_eq!(LType::excl(a.clone()).dual(), LType::int(LType::coatom("a")));
        assert_eq!(LType::excl(a.clone()).dual().dual(), LType::excl(a));
    }

    #[test]
    fn typecheck_tree_examples() {
        let mut ctx = TypingContext::new();
        ctx.bind(Var::plain("x"), LType::atom("a")).unwrap();
        ctx.bind(Var::plain("y"), LType::atom("b")).unwrap();
        let t = ProofTree::tens(ProofTree::var("x"), ProofTree::var("y"));
        assert_eq!(
            typecheck_tree(&ctx, &t).unwrap(),
            LType::tens(LType::atom("a"), LType::atom("b"))
        );

        let mut ctx = TypingContext::new();
        ctx.bind(Var::plain("x"), LType::int(LType::atom("a")))
            .unwrap();
        ctx.bind(Var::plain("y"), LType::int(LType::atom("a")))
            .unwrap();
        let t = ProofTree::contr(ProofTree::var("x"), ProofTree::var("y"));
        assert_eq!(
            typecheck_tree(&ctx, &t).unwrap(),
            LType::int(LType::atom("a"))
        );

        let mut ctx = TypingContext::new();
        ctx.bind(Var::plain("x"), LType::int(LType::atom("a")))
            .unwrap();
        ctx.bind(Var::plain("y"), LType::int(LType::atom("b")))
            .unwrap();
        let t = ProofTree::contr(ProofTree::var("x"), ProofTree::var("y"));
        assert!(matches!(
            typecheck_tree(&ctx, &t),
            Err(TypeError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn typecheck_net_examples() {
        // axiom against (a, ~a)
        let p = SimpleNet::new(vec![ProofTree::var("x"), ProofTree::covar("x")], vec![]).unwrap();
        let net = Net::simple(p);
        let gamma = vec![LType::atom("a"), LType::coatom("a")];
        let typed = typecheck_net(&TypingContext::new(), &net, &gamma).unwrap();
        assert_eq!(typed.elements[0].tree_types, gamma);

        // unannotated weakening pinned by the sequent
        let p = SimpleNet::new(vec![ProofTree::Weak(None)], vec![]).unwrap();
        let net = Net::simple(p);
        let gamma = vec![LType::int(LType::atom("a"))];
        let typed = typecheck_net(&TypingContext::new(), &net, &gamma).unwrap();
        assert_eq!(
            typed.elements[0].net.trees()[0],
            ProofTree::Weak(Some(LType::int(LType::atom("a"))))
        );

        // axiom against (a, a) fails
        let p = SimpleNet::new(vec![ProofTree::var("x"), ProofTree::covar("x")], vec![]).unwrap();
        let net = Net::simple(p);
        let gamma = vec![LType::atom("a"), LType::atom("a")];
        assert!(typecheck_net(&TypingContext::new(), &net, &gamma).is_err());
    }

    #[test]
    fn cut_types_are_inferred() {
        let cut = Cut::new(
            ProofTree::Weak(Some(LType::int(LType::atom("a")))),
            ProofTree::Coweak(None),
        )
        .unwrap();
        let p = SimpleNet::new(vec![], vec![cut]).unwrap();
        let typed = typecheck_net(&TypingContext::new(), &Net::simple(p), &[]).unwrap();
        assert_eq!(
            typed.elements[0].cut_types,
            vec![LType::int(LType::atom("a"))]
        );
        let annotated = &typed.elements[0].net.cuts()[0].right;
        assert_eq!(
            annotated,
            &ProofTree::Coweak(Some(LType::excl(LType::coatom("a"))))
        );
    }

    #[test]
    fn box_argument_types_pin_content() {
        // box{([w, x par ~x] ;)}(cd(y)) with y : a. The argument type !a
        // pins the content weakening to ?~a, and the expected conclusion
        // !(b par ~b) pins the content's axiom pair to b.
        let content = Net::simple(
            SimpleNet::new(
                vec![
                    ProofTree::Weak(None),
                    ProofTree::par(ProofTree::var("x"), ProofTree::covar("x")),
                ],
                vec![],
            )
            .unwrap(),
        );
        let tree = ProofTree::box_(content, vec![ProofTree::coder(ProofTree::var("y"))]).unwrap();
        let p = SimpleNet::new(vec![tree], vec![]).unwrap();
        let mut ctx = TypingContext::new();
        ctx.bind(Var::plain("y"), LType::atom("a")).unwrap();
        let gamma = vec![LType::excl(LType::par(LType::atom("b"), LType::coatom("b")))];
        let typed = typecheck_net(&ctx, &Net::simple(p), &gamma).unwrap();
        let annotated = &typed.elements[0].net.trees()[0];
        match annotated {
            ProofTree::Box_ { content, .. } => {
                let (q, _) = content.support().next().unwrap();
                assert_eq!(
                    q.trees()[0],
                    ProofTree::Weak(Some(LType::int(LType::coatom("a"))))
                );
            }
            other => panic!("expected a box, got {}", other),
        }
    }

    #[test]
    fn ambiguous_weakening_is_reported() {
        let cut = Cut::new(ProofTree::Weak(None), ProofTree::Coweak(None)).unwrap();
        let p = SimpleNet::new(vec![], vec![cut]).unwrap();
        let err = typecheck_net(&TypingContext::new(), &Net::simple(p), &[]);
        assert!(matches!(err, Err(TypeError::AmbiguousType(_))));
    }

    #[test]
    fn stable_under_alpha_and_cut_permutation() {
        // two cuts, one typed through the conclusion, one through its
        // annotations: renaming the bound pair or swapping the cut order
        // changes nothing.
        let mk = |a: &str, swap: bool| {
            let c1 = Cut::new(
                ProofTree::Weak(Some(LType::int(LType::atom("a")))),
                ProofTree::coder(ProofTree::var(a)),
            )
            .unwrap();
            let c2 = Cut::new(
                ProofTree::Weak(Some(LType::int(LType::atom("b")))),
                ProofTree::Coweak(None),
            )
            .unwrap();
            let cuts = if swap { vec![c2, c1] } else { vec![c1, c2] };
            SimpleNet::new(vec![ProofTree::covar(a)], cuts).unwrap()
        };
        let gamma = vec![LType::atom("a")];
        let ctx = TypingContext::new();
        let n1 = Net::simple(mk("x", false));
        let n2 = Net::simple(mk("q", true));
        assert!(typecheck_net(&ctx, &n1, &gamma).is_ok());
        assert!(typecheck_net(&ctx, &n2, &gamma).is_ok());
        assert_eq!(n1, n2);
    }

    fn arb_ltype() -> impl Strategy<Value = LType> {
        let leaf = prop_oneof![
            Just(LType::atom("a")),
            Just(LType::atom("b")),
            Just(LType::coatom("a")),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(l, r)| LType::tens(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| LType::par(l, r)),
                inner.clone().prop_map(LType::excl),
                inner.prop_map(LType::int),
            ]
        })
    }

    proptest! {
        #[test]
        fn dual_is_an_involution(t in arb_ltype()) {
            prop_assert_eq!(t.dual().dual(), t);
        }
    }
}
