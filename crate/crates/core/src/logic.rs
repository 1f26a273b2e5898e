//! Sequent derivations for nets: the rule tree, its checker, and a bounded
//! backtracking search that reconstructs a derivation from a net
//! (sequentialization).
//!
//! The search works bottom-up on one simple net at a time. Rules whose
//! inverse is deterministic (par, dereliction, codereliction, contraction,
//! weakening) are undone greedily; cuts, tensors, cocontractions, boxes and
//! mix introduce branch points, pruned by the connected components induced
//! by bound-variable pairs. Conclusions are matched as multisets with an
//! explicit permutation witness, so a trailing `Perm` node restores the
//! original order after every inverse step.

use crate::algebra::Scalar;
use crate::syntax::{Cut, Net, ProofTree, SimpleNet, Var};
use crate::typing::{
    ground_tree_type, typecheck_net, LType, TypeError, TypingContext,
};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Concludes `(x, ~x ;) : (A, ~A)`.
    Ax { var: String, ty: LType },
    /// `conclusion[i] = premise[perm[i]]`.
    Perm { perm: Vec<usize> },
    /// Premises `(Γ, A)` and `(Δ, ~A)`; concludes `(Γ, Δ)` plus the cut.
    Cut,
    ParR,
    TensR,
    Mix,
    /// Adds a `w : ?A` conclusion; `ty` is `A`.
    Weakening { ty: LType },
    /// Leaf `(cw ;) : (!A)`; `ty` is `A`.
    Coweakening { ty: LType },
    Dereliction,
    Codereliction,
    Contraction,
    Cocontraction,
    /// Weighted sum of premises proving the same sequent.
    Sum { coeffs: Vec<Scalar> },
    /// The zero net at an explicit sequent.
    Zero { gamma: Vec<LType> },
    /// First premise is the box content, the rest provide the arguments.
    Prom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn leaf(rule: Rule) -> Derivation {
        Derivation {
            rule,
            premises: Vec::new(),
        }
    }

    pub fn node(rule: Rule, premises: Vec<Derivation>) -> Derivation {
        Derivation { rule, premises }
    }

    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(|p| p.node_count()).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogicError {
    RuleViolation { node: String, reason: String },
    Type(TypeError),
}

impl fmt::Display for LogicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicError::RuleViolation { node, reason } => {
                write!(f, "rule violation at {}: {}", node, reason)
            }
            LogicError::Type(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for LogicError {}

impl From<TypeError> for LogicError {
    fn from(e: TypeError) -> Self {
        LogicError::Type(e)
    }
}

/// The judgment a derivation proves.
#[derive(Clone, Debug)]
pub struct Checked {
    pub net: Net,
    pub gamma: Vec<LType>,
    pub ctx: TypingContext,
}

/// Intermediate result: the weighted simple nets are kept raw (with the
/// derivation's own variable names) so that rules combining premises can
/// check disjointness; canonicalization happens once at the end.
#[derive(Clone, Debug)]
struct Raw {
    terms: Vec<(Scalar, SimpleNet)>,
    gamma: Vec<LType>,
    ctx: TypingContext,
}

fn violation<T>(node: &str, reason: impl Into<String>) -> Result<T, LogicError> {
    Err(LogicError::RuleViolation {
        node: node.to_string(),
        reason: reason.into(),
    })
}

/// A premise that must be a single simple net with coefficient one.
fn simple_premise(c: &Raw, node: &str) -> Result<SimpleNet, LogicError> {
    match c.terms.as_slice() {
        [(coeff, p)] if coeff.is_one() => Ok(p.clone()),
        _ => violation(node, "premise must be a simple net with coefficient 1"),
    }
}

/// Validate a derivation and compute the judgment it proves.
pub fn check_derivation(d: &Derivation) -> Result<Checked, LogicError> {
    let raw = check_raw(d)?;
    let net = Net::from_terms(raw.gamma.len(), raw.terms).map_err(|e| {
        LogicError::RuleViolation {
            node: "conclusion".into(),
            reason: e.to_string(),
        }
    })?;
    Ok(Checked {
        net,
        gamma: raw.gamma,
        ctx: raw.ctx,
    })
}

fn check_raw(d: &Derivation) -> Result<Raw, LogicError> {
    match &d.rule {
        Rule::Ax { var, ty } => {
            if !d.premises.is_empty() {
                return violation("ax", "takes no premises");
            }
            let x = Var::plain(var.clone());
            let p = SimpleNet::new(
                vec![ProofTree::Var(x.clone()), ProofTree::Var(x.conjugate())],
                vec![],
            )
            .map_err(|e| LogicError::RuleViolation {
                node: "ax".into(),
                reason: e.to_string(),
            })?;
            let mut ctx = TypingContext::new();
            ctx.bind(x, ty.clone())?;
            Ok(Raw {
                terms: vec![(Scalar::one(), p)],
                gamma: vec![ty.clone(), ty.dual()],
                ctx,
            })
        }
        Rule::Perm { perm } => {
            let [prem] = premises_array::<1>(d, "perm")?;
            let p = simple_premise(&prem, "perm")?;
            let n = p.width();
            if perm.len() != n {
                return violation("perm", "permutation length differs from width");
            }
            let mut seen = vec![false; n];
            for &j in perm {
                if j >= n || seen[j] {
                    return violation("perm", "not a permutation");
                }
                seen[j] = true;
            }
            let trees: Vec<ProofTree> = perm.iter().map(|&j| p.trees()[j].clone()).collect();
            let gamma: Vec<LType> = perm.iter().map(|&j| prem.gamma[j].clone()).collect();
            let terms = rebuild(trees, p.cuts().to_vec(), "perm")?;
            Ok(Raw {
                terms,
                gamma,
                ctx: prem.ctx,
            })
        }
        Rule::Cut => {
            let [l, r] = premises_array::<2>(d, "cut")?;
            let lp = simple_premise(&l, "cut")?;
            let rp = simple_premise(&r, "cut")?;
            let (ls, la) = split_last(&l, &lp, "cut")?;
            let (rs, ra) = split_last(&r, &rp, "cut")?;
            if ra != la.dual() {
                return violation(
                    "cut",
                    format!("premise types {} and {} are not dual", la, ra),
                );
            }
            let cut = Cut::new(
                lp.trees().last().unwrap().clone(),
                rp.trees().last().unwrap().clone(),
            )
            .map_err(|e| LogicError::RuleViolation {
                node: "cut".into(),
                reason: e.to_string(),
            })?;
            let mut trees = lp.trees()[..lp.width() - 1].to_vec();
            trees.extend_from_slice(&rp.trees()[..rp.width() - 1]);
            let mut cuts = lp.cuts().to_vec();
            cuts.extend_from_slice(rp.cuts());
            cuts.push(cut);
            let terms = rebuild(trees, cuts, "cut")?;
            let mut gamma = ls;
            gamma.extend(rs);
            Ok(Raw {
                terms,
                gamma,
                ctx: l.ctx.extend_with(&r.ctx)?,
            })
        }
        Rule::ParR => {
            let [prem] = premises_array::<1>(d, "parr")?;
            let p = simple_premise(&prem, "parr")?;
            if p.width() < 2 {
                return violation("parr", "premise needs at least two conclusions");
            }
            let n = p.width();
            let a = prem.gamma[n - 2].clone();
            let b = prem.gamma[n - 1].clone();
            let mut trees = p.trees()[..n - 2].to_vec();
            trees.push(ProofTree::par(
                p.trees()[n - 2].clone(),
                p.trees()[n - 1].clone(),
            ));
            let terms = rebuild(trees, p.cuts().to_vec(), "parr")?;
            let mut gamma = prem.gamma[..n - 2].to_vec();
            gamma.push(LType::par(a, b));
            Ok(Raw {
                terms,
                gamma,
                ctx: prem.ctx,
            })
        }
        Rule::TensR => {
            let [l, r] = premises_array::<2>(d, "tensr")?;
            let lp = simple_premise(&l, "tensr")?;
            let rp = simple_premise(&r, "tensr")?;
            let (ls, la) = split_last(&l, &lp, "tensr")?;
            let (rs, rb) = split_last(&r, &rp, "tensr")?;
            let mut trees = lp.trees()[..lp.width() - 1].to_vec();
            trees.extend_from_slice(&rp.trees()[..rp.width() - 1]);
            trees.push(ProofTree::tens(
                lp.trees().last().unwrap().clone(),
                rp.trees().last().unwrap().clone(),
            ));
            let mut cuts = lp.cuts().to_vec();
            cuts.extend_from_slice(rp.cuts());
            let terms = rebuild(trees, cuts, "tensr")?;
            let mut gamma = ls;
            gamma.extend(rs);
            gamma.push(LType::tens(la, rb));
            Ok(Raw {
                terms,
                gamma,
                ctx: l.ctx.extend_with(&r.ctx)?,
            })
        }
        Rule::Mix => {
            let [l, r] = premises_array::<2>(d, "mix")?;
            let lp = simple_premise(&l, "mix")?;
            let rp = simple_premise(&r, "mix")?;
            let mut trees = lp.trees().to_vec();
            trees.extend_from_slice(rp.trees());
            let mut cuts = lp.cuts().to_vec();
            cuts.extend_from_slice(rp.cuts());
            let terms = rebuild(trees, cuts, "mix")?;
            let mut gamma = l.gamma.clone();
            gamma.extend(r.gamma.clone());
            Ok(Raw {
                terms,
                gamma,
                ctx: l.ctx.extend_with(&r.ctx)?,
            })
        }
        Rule::Weakening { ty } => {
            let [prem] = premises_array::<1>(d, "weakening")?;
            let p = simple_premise(&prem, "weakening")?;
            let mut trees = p.trees().to_vec();
            trees.push(ProofTree::Weak(Some(LType::int(ty.clone()))));
            let terms = rebuild(trees, p.cuts().to_vec(), "weakening")?;
            let mut gamma = prem.gamma.clone();
            gamma.push(LType::int(ty.clone()));
            Ok(Raw {
                terms,
                gamma,
                ctx: prem.ctx,
            })
        }
        Rule::Coweakening { ty } => {
            if !d.premises.is_empty() {
                return violation("coweakening", "takes no premises");
            }
            let p = SimpleNet::new(
                vec![ProofTree::Coweak(Some(LType::excl(ty.clone())))],
                vec![],
            )
            .expect("no variables");
            Ok(Raw {
                terms: vec![(Scalar::one(), p)],
                gamma: vec![LType::excl(ty.clone())],
                ctx: TypingContext::new(),
            })
        }
        Rule::Dereliction | Rule::Codereliction => {
            let name = if matches!(d.rule, Rule::Dereliction) {
                "dereliction"
            } else {
                "codereliction"
            };
            let [prem] = premises_array::<1>(d, name)?;
            let p = simple_premise(&prem, name)?;
            let (mut gamma, a) = split_last(&prem, &p, name)?;
            let last = p.trees().last().unwrap().clone();
            let mut trees = p.trees()[..p.width() - 1].to_vec();
            if matches!(d.rule, Rule::Dereliction) {
                trees.push(ProofTree::der(last));
                gamma.push(LType::int(a));
            } else {
                trees.push(ProofTree::coder(last));
                gamma.push(LType::excl(a));
            }
            let terms = rebuild(trees, p.cuts().to_vec(), name)?;
            Ok(Raw {
                terms,
                gamma,
                ctx: prem.ctx,
            })
        }
        Rule::Contraction => {
            let [prem] = premises_array::<1>(d, "contraction")?;
            let p = simple_premise(&prem, "contraction")?;
            if p.width() < 2 {
                return violation("contraction", "premise needs two conclusions");
            }
            let n = p.width();
            let a = prem.gamma[n - 2].clone();
            let b = prem.gamma[n - 1].clone();
            if a != b || !matches!(a, LType::Int(_)) {
                return violation(
                    "contraction",
                    format!("last two types must be equal ?-types, got {} and {}", a, b),
                );
            }
            let mut trees = p.trees()[..n - 2].to_vec();
            trees.push(ProofTree::contr(
                p.trees()[n - 2].clone(),
                p.trees()[n - 1].clone(),
            ));
            let terms = rebuild(trees, p.cuts().to_vec(), "contraction")?;
            let mut gamma = prem.gamma[..n - 2].to_vec();
            gamma.push(a);
            Ok(Raw {
                terms,
                gamma,
                ctx: prem.ctx,
            })
        }
        Rule::Cocontraction => {
            let [l, r] = premises_array::<2>(d, "cocontraction")?;
            let lp = simple_premise(&l, "cocontraction")?;
            let rp = simple_premise(&r, "cocontraction")?;
            let (ls, la) = split_last(&l, &lp, "cocontraction")?;
            let (rs, ra) = split_last(&r, &rp, "cocontraction")?;
            if la != ra || !matches!(la, LType::Excl(_)) {
                return violation(
                    "cocontraction",
                    format!("premise types must be equal !-types, got {} and {}", la, ra),
                );
            }
            let mut trees = lp.trees()[..lp.width() - 1].to_vec();
            trees.extend_from_slice(&rp.trees()[..rp.width() - 1]);
            trees.push(ProofTree::cocontr(
                lp.trees().last().unwrap().clone(),
                rp.trees().last().unwrap().clone(),
            ));
            let mut cuts = lp.cuts().to_vec();
            cuts.extend_from_slice(rp.cuts());
            let terms = rebuild(trees, cuts, "cocontraction")?;
            let mut gamma = ls;
            gamma.extend(rs);
            gamma.push(la);
            Ok(Raw {
                terms,
                gamma,
                ctx: l.ctx.extend_with(&r.ctx)?,
            })
        }
        Rule::Sum { coeffs } => {
            if coeffs.len() != d.premises.len() || coeffs.is_empty() {
                return violation("sum", "needs one coefficient per premise");
            }
            let checked: Vec<Raw> = d
                .premises
                .iter()
                .map(check_raw)
                .collect::<Result<_, _>>()?;
            let gamma = checked[0].gamma.clone();
            let mut ctx = TypingContext::new();
            let mut terms = Vec::new();
            for (c, coeff) in checked.iter().zip(coeffs) {
                if c.gamma != gamma {
                    return violation("sum", "premises prove different sequents");
                }
                ctx = ctx.extend_with(&c.ctx)?;
                for (k, p) in &c.terms {
                    terms.push((k.mul(coeff), p.clone()));
                }
            }
            Ok(Raw { terms, gamma, ctx })
        }
        Rule::Zero { gamma } => {
            if !d.premises.is_empty() {
                return violation("zero", "takes no premises");
            }
            Ok(Raw {
                terms: Vec::new(),
                gamma: gamma.clone(),
                ctx: TypingContext::new(),
            })
        }
        Rule::Prom => {
            if d.premises.is_empty() {
                return violation("prom", "needs a content premise");
            }
            let content_raw = check_raw(&d.premises[0])?;
            let content_net = Net::from_terms(content_raw.gamma.len(), content_raw.terms.clone())
                .map_err(|e| LogicError::RuleViolation {
                    node: "prom".into(),
                    reason: e.to_string(),
                })?;
            let content = Raw {
                terms: Vec::new(),
                gamma: content_raw.gamma,
                ctx: content_raw.ctx,
            };
            let n = d.premises.len() - 1;
            if content.gamma.len() != n + 1 {
                return violation(
                    "prom",
                    format!(
                        "content proves {} conclusions, expected {}",
                        content.gamma.len(),
                        n + 1
                    ),
                );
            }
            let out_ty = content.gamma[n].clone();
            let mut arg_types = Vec::with_capacity(n);
            for i in 0..n {
                match &content.gamma[i] {
                    LType::Int(c) => arg_types.push(c.dual()),
                    other => {
                        return violation(
                            "prom",
                            format!("content conclusion {} is {}, expected a ?-type", i + 1, other),
                        )
                    }
                }
            }
            let mut trees = Vec::new();
            let mut cuts = Vec::new();
            let mut gamma = Vec::new();
            let mut args = Vec::with_capacity(n);
            let mut ctx = TypingContext::new();
            for (i, prem) in d.premises[1..].iter().enumerate() {
                let c = check_raw(prem)?;
                let p = simple_premise(&c, "prom")?;
                let (g, last_ty) = split_last(&c, &p, "prom")?;
                if last_ty != LType::excl(arg_types[i].clone()) {
                    return violation(
                        "prom",
                        format!(
                            "argument {} has type {}, expected {}",
                            i + 1,
                            last_ty,
                            LType::excl(arg_types[i].clone())
                        ),
                    );
                }
                args.push(p.trees().last().unwrap().clone());
                trees.extend_from_slice(&p.trees()[..p.width() - 1]);
                cuts.extend_from_slice(p.cuts());
                gamma.extend(g);
                ctx = ctx.extend_with(&c.ctx)?;
            }
            let box_tree = ProofTree::box_(content_net, args).map_err(|e| {
                LogicError::RuleViolation {
                    node: "prom".into(),
                    reason: e.to_string(),
                }
            })?;
            trees.push(box_tree);
            gamma.push(LType::excl(out_ty));
            let terms = rebuild(trees, cuts, "prom")?;
            Ok(Raw { terms, gamma, ctx })
        }
    }
}

fn premises_array<const N: usize>(d: &Derivation, node: &str) -> Result<[Raw; N], LogicError> {
    if d.premises.len() != N {
        return violation(node, format!("expects {} premises", N));
    }
    let mut out = Vec::with_capacity(N);
    for p in &d.premises {
        out.push(check_raw(p)?);
    }
    Ok(out
        .try_into()
        .unwrap_or_else(|_| unreachable!("length checked")))
}

fn split_last(c: &Raw, p: &SimpleNet, node: &str) -> Result<(Vec<LType>, LType), LogicError> {
    if p.width() == 0 {
        return violation(node, "premise has no conclusions");
    }
    let mut gamma = c.gamma.clone();
    let last = gamma.pop().unwrap();
    Ok((gamma, last))
}

fn rebuild(
    trees: Vec<ProofTree>,
    cuts: Vec<Cut>,
    node: &str,
) -> Result<Vec<(Scalar, SimpleNet)>, LogicError> {
    let p = SimpleNet::new(trees, cuts).map_err(|e| LogicError::RuleViolation {
        node: node.to_string(),
        reason: e.to_string(),
    })?;
    Ok(vec![(Scalar::one(), p)])
}

// ---------------------------------------------------------------------------
// serialization (s-expressions, for golden tests)

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule {
            Rule::Ax { var, ty } => write!(f, "(ax {} {})", var, ty),
            Rule::Perm { perm } => {
                write!(f, "(perm (")?;
                for (i, j) in perm.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", j)?;
                }
                write!(f, ") {})", self.premises[0])
            }
            Rule::Cut => write!(f, "(cut {} {})", self.premises[0], self.premises[1]),
            Rule::ParR => write!(f, "(parr {})", self.premises[0]),
            Rule::TensR => write!(f, "(tensr {} {})", self.premises[0], self.premises[1]),
            Rule::Mix => write!(f, "(mix {} {})", self.premises[0], self.premises[1]),
            Rule::Weakening { ty } => write!(f, "(weakening {} {})", ty, self.premises[0]),
            Rule::Coweakening { ty } => write!(f, "(coweakening {})", ty),
            Rule::Dereliction => write!(f, "(der {})", self.premises[0]),
            Rule::Codereliction => write!(f, "(coder {})", self.premises[0]),
            Rule::Contraction => write!(f, "(contr {})", self.premises[0]),
            Rule::Cocontraction => {
                write!(f, "(cocontr {} {})", self.premises[0], self.premises[1])
            }
            Rule::Sum { coeffs } => {
                write!(f, "(sum (")?;
                for (i, c) in coeffs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", c)?;
                }
                write!(f, ")")?;
                for p in &self.premises {
                    write!(f, " {}", p)?;
                }
                write!(f, ")")
            }
            Rule::Zero { gamma } => {
                write!(f, "(zero (")?;
                for (i, t) in gamma.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", t)?;
                }
                write!(f, "))")
            }
            Rule::Prom => {
                write!(f, "(prom")?;
                for p in &self.premises {
                    write!(f, " {}", p)?;
                }
                write!(f, ")")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// sequentialization

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeqFailure {
    /// Exhaustive search at this size found no derivation.
    NotFound,
    /// The node budget ran out before the search space was exhausted.
    BudgetExceeded,
    Type(TypeError),
}

impl fmt::Display for SeqFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqFailure::NotFound => write!(f, "no derivation found"),
            SeqFailure::BudgetExceeded => write!(f, "search budget exhausted"),
            SeqFailure::Type(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for SeqFailure {}

#[derive(Clone)]
struct Goal {
    items: Vec<(ProofTree, LType)>,
    cuts: Vec<(Cut, LType)>,
}

impl Goal {
    fn key(&self) -> String {
        let mut s = String::new();
        let trees: Vec<ProofTree> = self.items.iter().map(|(t, _)| t.clone()).collect();
        let cuts: Vec<Cut> = self.cuts.iter().map(|(c, _)| c.clone()).collect();
        if let Ok(p) = SimpleNet::new(trees, cuts) {
            s.push_str(&p.alpha_canonicalize().to_string());
        } else {
            s.push_str("<invalid>");
        }
        s.push('|');
        for (_, ty) in &self.items {
            s.push_str(&ty.to_string());
            s.push(',');
        }
        s
    }
}

struct Search<'a> {
    vars: &'a TypingContext,
    budget: u64,
    exhausted_budget: bool,
    memo_failed: BTreeSet<String>,
}

impl<'a> Search<'a> {
    /// Produce up to `limit` derivations of the goal. An empty result with
    /// `exhausted_budget` unset means the bounded space holds none.
    fn solve(&mut self, goal: &Goal, limit: usize) -> Vec<Derivation> {
        if limit == 0 {
            return Vec::new();
        }
        if self.budget == 0 {
            self.exhausted_budget = true;
            return Vec::new();
        }
        self.budget -= 1;
        let key = goal.key();
        if self.memo_failed.contains(&key) {
            return Vec::new();
        }
        let flag_before = self.exhausted_budget;

        let out = if let Some((premise, wrap)) = self.undo_unary(goal) {
            self.solve(&premise, limit)
                .into_iter()
                .map(wrap.as_ref())
                .collect()
        } else {
            let mut out = self.try_terminals(goal);
            if out.len() < limit {
                self.try_cut(goal, limit, &mut out);
            }
            if out.len() < limit {
                self.try_binary_tree(goal, limit, &mut out);
            }
            if out.len() < limit {
                self.try_prom(goal, limit, &mut out);
            }
            if out.len() < limit {
                self.try_mix(goal, limit, &mut out);
            }
            out.truncate(limit);
            out
        };

        if out.is_empty() && self.exhausted_budget == flag_before {
            self.memo_failed.insert(key);
        }
        out
    }

    /// Find a deterministic inverse step: par, dereliction, codereliction,
    /// contraction or weakening at any position.
    #[allow(clippy::type_complexity)]
    fn undo_unary(
        &self,
        goal: &Goal,
    ) -> Option<(Goal, Box<dyn Fn(Derivation) -> Derivation>)> {
        for (i, (tree, ty)) in goal.items.iter().enumerate() {
            match (tree, ty) {
                (ProofTree::Par(l, r), LType::Par(a, b)) => {
                    let mut items = remove_at(&goal.items, i);
                    items.push(((**l).clone(), (**a).clone()));
                    items.push(((**r).clone(), (**b).clone()));
                    let premise = Goal {
                        items,
                        cuts: goal.cuts.clone(),
                    };
                    return Some((premise, reinsert_wrap(goal.items.len(), i, Rule::ParR)));
                }
                (ProofTree::Der(s), LType::Int(a)) => {
                    let mut items = remove_at(&goal.items, i);
                    items.push(((**s).clone(), (**a).clone()));
                    let premise = Goal {
                        items,
                        cuts: goal.cuts.clone(),
                    };
                    return Some((
                        premise,
                        reinsert_wrap(goal.items.len(), i, Rule::Dereliction),
                    ));
                }
                (ProofTree::Coder(s), LType::Excl(a)) => {
                    let mut items = remove_at(&goal.items, i);
                    items.push(((**s).clone(), (**a).clone()));
                    let premise = Goal {
                        items,
                        cuts: goal.cuts.clone(),
                    };
                    return Some((
                        premise,
                        reinsert_wrap(goal.items.len(), i, Rule::Codereliction),
                    ));
                }
                (ProofTree::Contr(l, r), LType::Int(_)) => {
                    let mut items = remove_at(&goal.items, i);
                    items.push(((**l).clone(), ty.clone()));
                    items.push(((**r).clone(), ty.clone()));
                    let premise = Goal {
                        items,
                        cuts: goal.cuts.clone(),
                    };
                    return Some((
                        premise,
                        reinsert_wrap(goal.items.len(), i, Rule::Contraction),
                    ));
                }
                (ProofTree::Weak(_), LType::Int(a)) => {
                    // keep (w ;) alone: dropping it would leave the empty
                    // net, which has no derivation either
                    let items = remove_at(&goal.items, i);
                    if items.is_empty() && goal.cuts.is_empty() {
                        continue;
                    }
                    let premise = Goal {
                        items,
                        cuts: goal.cuts.clone(),
                    };
                    return Some((
                        premise,
                        reinsert_wrap(goal.items.len(), i, Rule::Weakening { ty: (**a).clone() }),
                    ));
                }
                _ => {}
            }
        }
        None
    }

    fn try_terminals(&mut self, goal: &Goal) -> Vec<Derivation> {
        let mut out = Vec::new();
        if !goal.cuts.is_empty() {
            return out;
        }
        if goal.items.len() == 2 {
            if let (ProofTree::Var(v1), ProofTree::Var(v2)) = (&goal.items[0].0, &goal.items[1].0)
            {
                if v2 == &v1.conjugate() {
                    let (plain_idx, plain_var) = if v1.co { (1, v2) } else { (0, v1) };
                    let ty = goal.items[plain_idx].1.clone();
                    let ax = Derivation::leaf(Rule::Ax {
                        var: plain_var.base.clone(),
                        ty,
                    });
                    out.push(if plain_idx == 0 {
                        ax
                    } else {
                        Derivation::node(Rule::Perm { perm: vec![1, 0] }, vec![ax])
                    });
                }
            }
        }
        if goal.items.len() == 1 {
            if let (ProofTree::Coweak(_), LType::Excl(a)) = (&goal.items[0].0, &goal.items[0].1) {
                out.push(Derivation::leaf(Rule::Coweakening { ty: (**a).clone() }));
            }
        }
        out
    }

    fn try_cut(&mut self, goal: &Goal, limit: usize, out: &mut Vec<Derivation>) {
        for k in 0..goal.cuts.len() {
            if out.len() >= limit {
                return;
            }
            let (cut, ty) = goal.cuts[k].clone();
            let rest_cuts = remove_at(&goal.cuts, k);
            let halves = Halves {
                left: (cut.left.clone(), ty.clone()),
                right: (cut.right.clone(), ty.dual()),
            };
            for split in enumerate_splits(&goal.items, &rest_cuts, &halves) {
                if out.len() >= limit {
                    return;
                }
                let left_goal = Goal {
                    items: with_last(&goal.items, &split.left_items, halves.left.clone()),
                    cuts: select(&rest_cuts, &split.left_cuts),
                };
                let right_goal = Goal {
                    items: with_last(&goal.items, &split.right_items, halves.right.clone()),
                    cuts: select(&rest_cuts, &split.right_cuts),
                };
                let pairs = self.solve_pair(&left_goal, &right_goal, limit - out.len());
                for (dl, dr) in pairs {
                    let node = Derivation::node(Rule::Cut, vec![dl, dr]);
                    let mut order: Vec<usize> =
                        Vec::with_capacity(goal.items.len());
                    order.extend(split.left_items.iter().copied());
                    order.extend(split.right_items.iter().copied());
                    out.push(perm_to_original(node, &order, goal.items.len()));
                }
            }
        }
    }

    fn try_binary_tree(&mut self, goal: &Goal, limit: usize, out: &mut Vec<Derivation>) {
        for i in 0..goal.items.len() {
            if out.len() >= limit {
                return;
            }
            let (tree, ty) = goal.items[i].clone();
            let (halves, rule) = match (&tree, &ty) {
                (ProofTree::Tens(l, r), LType::Tens(a, b)) => (
                    Halves {
                        left: ((**l).clone(), (**a).clone()),
                        right: ((**r).clone(), (**b).clone()),
                    },
                    Rule::TensR,
                ),
                (ProofTree::Cocontr(l, r), LType::Excl(_)) => (
                    Halves {
                        left: ((**l).clone(), ty.clone()),
                        right: ((**r).clone(), ty.clone()),
                    },
                    Rule::Cocontraction,
                ),
                _ => continue,
            };
            let rest_items = remove_at(&goal.items, i);
            for split in enumerate_splits(&rest_items, &goal.cuts, &halves) {
                if out.len() >= limit {
                    return;
                }
                let left_goal = Goal {
                    items: with_last(&rest_items, &split.left_items, halves.left.clone()),
                    cuts: select(&goal.cuts, &split.left_cuts),
                };
                let right_goal = Goal {
                    items: with_last(&rest_items, &split.right_items, halves.right.clone()),
                    cuts: select(&goal.cuts, &split.right_cuts),
                };
                let pairs = self.solve_pair(&left_goal, &right_goal, limit - out.len());
                for (dl, dr) in pairs {
                    let node = Derivation::node(rule.clone(), vec![dl, dr]);
                    // conclusion: left items, right items, combined tree
                    // last; map back to the original positions
                    let reindex = |j: usize| if j >= i { j + 1 } else { j };
                    let mut order: Vec<usize> = Vec::with_capacity(goal.items.len());
                    order.extend(split.left_items.iter().map(|&j| reindex(j)));
                    order.extend(split.right_items.iter().map(|&j| reindex(j)));
                    order.push(i);
                    out.push(perm_to_original(node, &order, goal.items.len()));
                }
            }
        }
    }

    fn solve_pair(
        &mut self,
        left: &Goal,
        right: &Goal,
        limit: usize,
    ) -> Vec<(Derivation, Derivation)> {
        let lefts = self.solve(left, limit);
        if lefts.is_empty() {
            return Vec::new();
        }
        let rights = self.solve(right, limit);
        let mut out = Vec::new();
        'outer: for dl in &lefts {
            for dr in &rights {
                out.push((dl.clone(), dr.clone()));
                if out.len() >= limit {
                    break 'outer;
                }
            }
        }
        out
    }

    fn try_prom(&mut self, goal: &Goal, limit: usize, out: &mut Vec<Derivation>) {
        for i in 0..goal.items.len() {
            if out.len() >= limit {
                return;
            }
            let (tree, ty) = goal.items[i].clone();
            let (content, args) = match &tree {
                ProofTree::Box_ { content, args, .. } => (content.clone(), args.clone()),
                _ => continue,
            };
            let out_inner = match &ty {
                LType::Excl(b) => (**b).clone(),
                _ => continue,
            };
            let n = args.len();
            let mut arg_types = Vec::with_capacity(n);
            let mut ok = true;
            for a in &args {
                match ground_tree_type(self.vars, a) {
                    Ok(t @ LType::Excl(_)) => arg_types.push(t),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let mut content_gamma: Vec<LType> = arg_types
                .iter()
                .map(|t| match t {
                    LType::Excl(a) => LType::int(a.dual()),
                    _ => unreachable!(),
                })
                .collect();
            content_gamma.push(out_inner);

            let rest_items = remove_at(&goal.items, i);
            if n == 0 {
                if !rest_items.is_empty() || !goal.cuts.is_empty() {
                    continue;
                }
                for dc in self.solve_net(&content, &content_gamma, limit - out.len()) {
                    out.push(Derivation::node(Rule::Prom, vec![dc]));
                }
                continue;
            }

            let anchors: Vec<(ProofTree, LType)> = args
                .iter()
                .cloned()
                .zip(arg_types.iter().cloned())
                .collect();
            let contents = self.solve_net(&content, &content_gamma, 1);
            let Some(dc) = contents.into_iter().next() else {
                continue;
            };
            for assign in enumerate_multi_splits(&rest_items, &goal.cuts, &anchors) {
                if out.len() >= limit {
                    return;
                }
                let mut arg_solutions: Vec<Derivation> = Vec::new();
                let mut item_order: Vec<usize> = Vec::new();
                let mut all_ok = true;
                for (g, (items_idx, cuts_idx)) in anchors.iter().zip(assign.iter()) {
                    let sub = Goal {
                        items: with_last(&rest_items, items_idx, g.clone()),
                        cuts: select(&goal.cuts, cuts_idx),
                    };
                    match self.solve(&sub, 1).into_iter().next() {
                        Some(d) => {
                            arg_solutions.push(d);
                            let reindex = |j: usize| if j >= i { j + 1 } else { j };
                            item_order.extend(items_idx.iter().map(|&j| reindex(j)));
                        }
                        None => {
                            all_ok = false;
                            break;
                        }
                    }
                }
                if !all_ok {
                    continue;
                }
                item_order.push(i);
                let mut premises = vec![dc.clone()];
                premises.extend(arg_solutions);
                let node = Derivation::node(Rule::Prom, premises);
                out.push(perm_to_original(node, &item_order, goal.items.len()));
            }
        }
    }

    fn try_mix(&mut self, goal: &Goal, limit: usize, out: &mut Vec<Derivation>) {
        let comps = component_ids(&goal.items, &goal.cuts);
        let ncomp = comps.iter().copied().max().map(|m| m + 1).unwrap_or(0);
        if ncomp < 2 {
            return;
        }
        let item_count = goal.items.len();
        let left_items: Vec<usize> = (0..item_count).filter(|&j| comps[j] == 0).collect();
        let right_items: Vec<usize> = (0..item_count).filter(|&j| comps[j] != 0).collect();
        let left_cuts: Vec<usize> = (0..goal.cuts.len())
            .filter(|&k| comps[item_count + k] == 0)
            .collect();
        let right_cuts: Vec<usize> = (0..goal.cuts.len())
            .filter(|&k| comps[item_count + k] != 0)
            .collect();
        if (left_items.is_empty() && left_cuts.is_empty())
            || (right_items.is_empty() && right_cuts.is_empty())
        {
            return;
        }
        let left_goal = Goal {
            items: select(&goal.items, &left_items),
            cuts: select(&goal.cuts, &left_cuts),
        };
        let right_goal = Goal {
            items: select(&goal.items, &right_items),
            cuts: select(&goal.cuts, &right_cuts),
        };
        let pairs = self.solve_pair(&left_goal, &right_goal, limit - out.len());
        for (dl, dr) in &pairs {
            let node = Derivation::node(Rule::Mix, vec![dl.clone(), dr.clone()]);
            let mut order = Vec::with_capacity(item_count);
            order.extend(left_items.iter().copied());
            order.extend(right_items.iter().copied());
            out.push(perm_to_original(node, &order, item_count));
        }
        // the swapped premise order is a distinct derivation of the same net
        for (dl, dr) in pairs {
            if out.len() >= limit {
                return;
            }
            let node = Derivation::node(Rule::Mix, vec![dr, dl]);
            let mut order = Vec::with_capacity(item_count);
            order.extend(right_items.iter().copied());
            order.extend(left_items.iter().copied());
            out.push(perm_to_original(node, &order, item_count));
        }
    }

    /// Solve a whole (possibly non-simple) net against a sequent: sums are
    /// split at the root, the zero net closes immediately. Used for box
    /// contents, which live in their own closed variable scope.
    fn solve_net(&mut self, net: &Net, gamma: &[LType], limit: usize) -> Vec<Derivation> {
        if net.is_zero() {
            return vec![Derivation::leaf(Rule::Zero {
                gamma: gamma.to_vec(),
            })];
        }
        let empty_ctx = TypingContext::new();
        let typed = match typecheck_net(&empty_ctx, net, gamma) {
            Ok(t) => t,
            Err(_) => return Vec::new(),
        };
        let mut element_derivations: Vec<Derivation> = Vec::new();
        let mut coeffs = Vec::new();
        let single = net.support_len() == 1
            && net
                .support()
                .next()
                .map(|(_, c)| c.is_one())
                .unwrap_or(false);
        for ((_, coeff), el) in net.support().zip(typed.elements.iter()) {
            coeffs.push(coeff.clone());
            let goal = Goal {
                items: el
                    .net
                    .trees()
                    .iter()
                    .cloned()
                    .zip(el.tree_types.iter().cloned())
                    .collect(),
                cuts: el
                    .net
                    .cuts()
                    .iter()
                    .cloned()
                    .zip(el.cut_types.iter().cloned())
                    .collect(),
            };
            let mut inner = Search {
                vars: &el.var_types,
                budget: self.budget,
                exhausted_budget: false,
                memo_failed: BTreeSet::new(),
            };
            let sols = inner.solve(&goal, 1);
            self.budget = inner.budget;
            self.exhausted_budget |= inner.exhausted_budget;
            match sols.into_iter().next() {
                Some(d) => element_derivations.push(d),
                None => return Vec::new(),
            }
        }
        let d = if single {
            element_derivations.into_iter().next().unwrap()
        } else {
            Derivation::node(Rule::Sum { coeffs }, element_derivations)
        };
        let _ = limit;
        vec![d]
    }
}

#[derive(Clone)]
struct Halves {
    left: (ProofTree, LType),
    right: (ProofTree, LType),
}

struct Split {
    left_items: Vec<usize>,
    right_items: Vec<usize>,
    left_cuts: Vec<usize>,
    right_cuts: Vec<usize>,
}

fn remove_at<T: Clone>(xs: &[T], i: usize) -> Vec<T> {
    let mut out = xs.to_vec();
    out.remove(i);
    out
}

fn select<T: Clone>(xs: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| xs[i].clone()).collect()
}

fn with_last(
    items: &[(ProofTree, LType)],
    idx: &[usize],
    last: (ProofTree, LType),
) -> Vec<(ProofTree, LType)> {
    let mut out = select(items, idx);
    out.push(last);
    out
}

/// Wrap a unary-rule application so the new tree returns from the end of
/// the conclusion list to position `i` of the original order.
fn reinsert_wrap(
    orig_len: usize,
    position: usize,
    rule: Rule,
) -> Box<dyn Fn(Derivation) -> Derivation> {
    Box::new(move |premise| {
        let node = Derivation::node(rule.clone(), vec![premise]);
        // conclusion of `node`: all items except position (original order),
        // then the new tree last
        let mut order: Vec<usize> = (0..orig_len).filter(|&j| j != position).collect();
        order.push(position);
        perm_to_original(node, &order, orig_len)
    })
}

/// `order[k]` is the original position of the k-th conclusion of `node`;
/// wrap with the permutation putting everything back (identity is elided).
fn perm_to_original(node: Derivation, order: &[usize], orig_len: usize) -> Derivation {
    debug_assert_eq!(order.len(), orig_len);
    // conclusion[i] = node_conclusion[perm[i]] where order[k] = i
    let mut perm = vec![0usize; orig_len];
    for (k, &i) in order.iter().enumerate() {
        perm[i] = k;
    }
    if perm.iter().enumerate().all(|(i, &j)| i == j) {
        node
    } else {
        Derivation::node(Rule::Perm { perm }, vec![node])
    }
}

/// Connected components over items and cuts, linked by shared variable
/// bases. Returns one component id per node (items first, then cuts).
fn component_ids(items: &[(ProofTree, LType)], cuts: &[(Cut, LType)]) -> Vec<usize> {
    let n = items.len() + cuts.len();
    let mut vars_of: Vec<BTreeSet<String>> = Vec::with_capacity(n);
    for (t, _) in items {
        vars_of.push(t.vars().into_iter().map(|v| v.base).collect());
    }
    for (c, _) in cuts {
        vars_of.push(c.vars().into_iter().map(|v| v.base).collect());
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let mut by_base: BTreeMap<&String, usize> = BTreeMap::new();
    for (i, vs) in vars_of.iter().enumerate() {
        for b in vs {
            if let Some(&j) = by_base.get(b) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            } else {
                by_base.insert(b, i);
            }
        }
    }
    // normalize ids in first-appearance order
    let mut ids = BTreeMap::new();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let r = find(&mut parent, i);
        let next = ids.len();
        let id = *ids.entry(r).or_insert(next);
        out.push(id);
    }
    out
}

/// Enumerate ways of dividing items and cuts between the two halves of a
/// binary rule. Components containing variables shared with a half are
/// anchored to it; components touching both halves kill the split; free
/// components may go to either side.
fn enumerate_splits(
    items: &[(ProofTree, LType)],
    cuts: &[(Cut, LType)],
    halves: &Halves,
) -> Vec<Split> {
    let anchors = [halves.left.clone(), halves.right.clone()];
    enumerate_multi_splits(items, cuts, &anchors)
        .into_iter()
        .map(|assign| Split {
            left_items: assign[0].0.clone(),
            right_items: assign[1].0.clone(),
            left_cuts: assign[0].1.clone(),
            right_cuts: assign[1].1.clone(),
        })
        .collect()
}

/// Generalized split across `anchors.len()` premises; each anchor tree
/// claims the components its variables touch. Free components are assigned
/// every possible way (components listed in deterministic order).
#[allow(clippy::type_complexity)]
fn enumerate_multi_splits(
    items: &[(ProofTree, LType)],
    cuts: &[(Cut, LType)],
    anchors: &[(ProofTree, LType)],
) -> Vec<Vec<(Vec<usize>, Vec<usize>)>> {
    let k = anchors.len();
    let n_items = items.len();
    // components over items + cuts + anchors
    let mut all_items: Vec<(ProofTree, LType)> = items.to_vec();
    all_items.extend(anchors.iter().cloned());
    let comps = component_ids(&all_items, cuts);
    let ncomp = comps.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    // which anchor owns each component (None = free, conflict = impossible)
    let mut owner: Vec<Option<usize>> = vec![None; ncomp];
    for (a_idx, _) in anchors.iter().enumerate() {
        let node = n_items + a_idx;
        let c = comps[node];
        match owner[c] {
            None => owner[c] = Some(a_idx),
            Some(o) if o == a_idx => {}
            Some(_) => return Vec::new(), // two anchors share a variable pair
        }
    }
    let free: Vec<usize> = (0..ncomp).filter(|&c| owner[c].is_none()).collect();
    // every component must contain at least... free components can go
    // anywhere; cap the enumeration to keep the search bounded
    let max_free = 8usize;
    if free.len() > max_free {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut assignment = vec![0usize; free.len()];
    loop {
        let mut comp_owner = owner.clone();
        for (f, &c) in free.iter().enumerate() {
            comp_owner[c] = Some(assignment[f]);
        }
        let mut result: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new()); k];
        for (j, &c) in comps.iter().take(n_items).enumerate() {
            let o = comp_owner[c].expect("every component owned");
            result[o].0.push(j);
        }
        for (j, &c) in comps.iter().skip(n_items).take(cuts.len()).enumerate() {
            let o = comp_owner[c].expect("every component owned");
            result[o].1.push(j);
        }
        out.push(result);
        // next assignment
        let mut f = 0;
        loop {
            if f == assignment.len() {
                return out;
            }
            assignment[f] += 1;
            if assignment[f] < k {
                break;
            }
            assignment[f] = 0;
            f += 1;
        }
        if assignment.iter().all(|&a| a == 0) {
            return out;
        }
    }
}

/// Search for a derivation of `net : gamma` under `ctx`, within a node
/// budget. `NotFound` means the bounded search space was exhausted.
pub fn sequentialize(
    net: &Net,
    gamma: &[LType],
    ctx: &TypingContext,
    budget: u64,
) -> Result<Derivation, SeqFailure> {
    let mut out = sequentialize_multi(net, gamma, ctx, budget, 1)?;
    out.pop().ok_or(SeqFailure::NotFound)
}

/// Collect up to `want` distinct derivations.
pub fn sequentialize_multi(
    net: &Net,
    gamma: &[LType],
    ctx: &TypingContext,
    budget: u64,
    want: usize,
) -> Result<Vec<Derivation>, SeqFailure> {
    if net.is_zero() {
        return Ok(vec![Derivation::leaf(Rule::Zero {
            gamma: gamma.to_vec(),
        })]);
    }
    let typed = typecheck_net(ctx, net, gamma).map_err(SeqFailure::Type)?;
    // solve each support element; combine under Sum when not a single
    // coefficient-one element
    let mut budget_left = budget;
    let single = net.support_len() == 1
        && net.support().next().map(|(_, c)| c.is_one()).unwrap_or(false);
    let mut per_element: Vec<Vec<Derivation>> = Vec::new();
    let mut coeffs: Vec<Scalar> = Vec::new();
    let mut budget_hit = false;
    for ((_, coeff), el) in net.support().zip(typed.elements.iter()) {
        coeffs.push(coeff.clone());
        let goal = Goal {
            items: el
                .net
                .trees()
                .iter()
                .cloned()
                .zip(el.tree_types.iter().cloned())
                .collect(),
            cuts: el
                .net
                .cuts()
                .iter()
                .cloned()
                .zip(el.cut_types.iter().cloned())
                .collect(),
        };
        let mut search = Search {
            vars: &el.var_types,
            budget: budget_left,
            exhausted_budget: false,
            memo_failed: BTreeSet::new(),
        };
        let sols = search.solve(&goal, if single { want } else { 1 });
        budget_left = search.budget;
        budget_hit |= search.exhausted_budget;
        if sols.is_empty() {
            return if budget_hit {
                Err(SeqFailure::BudgetExceeded)
            } else {
                Err(SeqFailure::NotFound)
            };
        }
        per_element.push(sols);
    }
    if single {
        let mut sols = per_element.pop().unwrap();
        sols.truncate(want);
        dedupe(&mut sols);
        return Ok(sols);
    }
    // combine: vary the first element's derivation for multiplicity
    let mut out = Vec::new();
    let max_first = per_element[0].len();
    for pick in 0..max_first {
        if out.len() >= want {
            break;
        }
        let premises: Vec<Derivation> = per_element
            .iter()
            .enumerate()
            .map(|(i, sols)| {
                if i == 0 {
                    sols[pick].clone()
                } else {
                    sols[0].clone()
                }
            })
            .collect();
        out.push(Derivation::node(
            Rule::Sum {
                coeffs: coeffs.clone(),
            },
            premises,
        ));
    }
    dedupe(&mut out);
    Ok(out)
}

fn dedupe(sols: &mut Vec<Derivation>) {
    let mut seen = BTreeSet::new();
    sols.retain(|d| seen.insert(d.to_string()));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_net, parse_type_list};

    fn atom(a: &str) -> LType {
        LType::atom(a)
    }

    #[test]
    fn check_ax() {
        let d = Derivation::leaf(Rule::Ax {
            var: "x".into(),
            ty: atom("a"),
        });
        let c = check_derivation(&d).unwrap();
        assert_eq!(c.gamma, vec![atom("a"), atom("a").dual()]);
        assert_eq!(c.net, parse_net("([x, ~x] ;)").unwrap());
    }

    #[test]
    fn check_mix_of_axioms() {
        let ax = |v: &str| {
            Derivation::leaf(Rule::Ax {
                var: v.into(),
                ty: atom("a"),
            })
        };
        let d = Derivation::node(Rule::Mix, vec![ax("x"), ax("y")]);
        let c = check_derivation(&d).unwrap();
        assert_eq!(c.gamma.len(), 4);
        assert_eq!(c.net.width(), 4);
    }

    #[test]
    fn check_sum_of_equal_premises() {
        let ax = Derivation::leaf(Rule::Ax {
            var: "x".into(),
            ty: atom("a"),
        });
        let d = Derivation::node(
            Rule::Sum {
                coeffs: vec![Scalar::ratio(1, 2), Scalar::ratio(1, 2)],
            },
            vec![ax.clone(), ax],
        );
        let c = check_derivation(&d).unwrap();
        // 1/2 p + 1/2 p = p
        assert_eq!(c.net, parse_net("([x, ~x] ;)").unwrap());
    }

    #[test]
    fn check_detects_bad_contraction() {
        let ax = Derivation::leaf(Rule::Ax {
            var: "x".into(),
            ty: atom("a"),
        });
        let d = Derivation::node(Rule::Contraction, vec![ax]);
        assert!(matches!(
            check_derivation(&d),
            Err(LogicError::RuleViolation { .. })
        ));
    }

    #[test]
    fn sequentialize_axiom() {
        let net = parse_net("([x, ~x] ;)").unwrap();
        let gamma = parse_type_list("a, ~a").unwrap();
        let d = sequentialize(&net, &gamma, &TypingContext::new(), 10_000).unwrap();
        let c = check_derivation(&d).unwrap();
        assert!(c.net.equivalent(&net));
        assert_eq!(c.gamma, gamma);
    }

    #[test]
    fn sequentialize_loop_is_not_found() {
        let net = parse_net("([] ; <x|~x>)").unwrap();
        let mut ctx = TypingContext::new();
        ctx.bind(Var::plain("x"), atom("a")).unwrap();
        let r = sequentialize(&net, &[], &ctx, 100_000);
        assert_eq!(r.unwrap_err(), SeqFailure::NotFound);
    }

    #[test]
    fn sequentialize_two_axioms_uses_mix() {
        let net = parse_net("([x, ~x, y, ~y] ;)").unwrap();
        let gamma = parse_type_list("a, ~a, b, ~b").unwrap();
        let d = sequentialize(&net, &gamma, &TypingContext::new(), 100_000).unwrap();
        assert!(d.to_string().contains("(mix"));
        let c = check_derivation(&d).unwrap();
        assert!(c.net.equivalent(&net));
        assert_eq!(c.gamma, gamma);
    }

    #[test]
    fn sequentialize_roundtrips_varied_nets() {
        let cases: Vec<(&str, &str)> = vec![
            ("([x par ~x] ;)", "a par ~a"),
            ("([d(x), cd(~x)] ;)", "?a, !~a"),
            ("([c(d(x), d(y)), cd(~x) tens cd(~y)] ;)", "?a, !~a tens !~a"),
            ("([x, ~x, w:?b] ;)", "a, ~a, ?b"),
            ("([cc(cw:!a, cd(x)), ~x] ;)", "!a, ~a"),
            ("([x, ~x] ; <w:?b | cw:!~b>)", "a, ~a"),
            ("([box{([d(~y), y] ;)}(cd(x)), ~x] ;)", "!a, ~a"),
        ];
        for (net_text, gamma_text) in cases {
            let net = parse_net(net_text).unwrap();
            let gamma = parse_type_list(gamma_text).unwrap();
            let d = sequentialize(&net, &gamma, &TypingContext::new(), 3_000_000)
                .unwrap_or_else(|e| panic!("no derivation for {}: {}", net_text, e));
            let c = check_derivation(&d).unwrap();
            assert!(
                c.net.equivalent(&net),
                "rebuilt {} instead of {}",
                c.net,
                net
            );
            assert_eq!(c.gamma, gamma, "sequent mismatch for {}", net_text);
        }
    }

    #[test]
    fn sequentialize_finds_two_distinct_for_mix() {
        let net = parse_net("([x, ~x, y, ~y] ;)").unwrap();
        let gamma = parse_type_list("a, ~a, b, ~b").unwrap();
        let sols =
            sequentialize_multi(&net, &gamma, &TypingContext::new(), 1_000_000, 4).unwrap();
        assert!(sols.len() >= 2, "found {} derivations", sols.len());
        for d in &sols {
            let c = check_derivation(d).unwrap();
            assert!(c.net.equivalent(&net));
        }
    }

    #[test]
    fn derivation_serialization_is_stable() {
        let d = Derivation::node(
            Rule::Perm { perm: vec![1, 0] },
            vec![Derivation::leaf(Rule::Ax {
                var: "x".into(),
                ty: atom("a"),
            })],
        );
        assert_eq!(d.to_string(), "(perm (1 0) (ax x a))");
    }
}
