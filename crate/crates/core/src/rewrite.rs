//! Cut elimination: the basic redexes, the promotion redexes, the
//! commutative reductions on box arguments, and their contextual closure
//! over weighted sums of simple nets.
//!
//! Every rule produces exact coefficients; fresh variables come from a
//! deterministic counter that skips names already present in the net, and
//! support elements are re-canonicalized after each step so the choice of
//! fresh names never leaks into results.

use crate::algebra::Scalar;
use crate::syntax::{taken_names, Cut, FreshSource, Net, ProofTree, SimpleNet, SyntaxError, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord)]
pub enum RuleId {
    AxCut,
    ParTens,
    WeakCoweak,
    DerCoweak,
    WeakCoder,
    ContrCoweak,
    WeakCocontr,
    DerCoder,
    ContrCoder,
    DerCocontr,
    ContrCocontr,
    BoxWeak,
    BoxDer,
    BoxContr,
    BoxBox,
    BoxCoweak,
    BoxCocontr,
    BoxCoder,
}

impl RuleId {
    pub fn name(&self) -> &'static str {
        match self {
            RuleId::AxCut => "ax-cut",
            RuleId::ParTens => "par-tens",
            RuleId::WeakCoweak => "weak-coweak",
            RuleId::DerCoweak => "der-coweak",
            RuleId::WeakCoder => "weak-coder",
            RuleId::ContrCoweak => "contr-coweak",
            RuleId::WeakCocontr => "weak-cocontr",
            RuleId::DerCoder => "der-coder",
            RuleId::ContrCoder => "contr-coder",
            RuleId::DerCocontr => "der-cocontr",
            RuleId::ContrCocontr => "contr-cocontr",
            RuleId::BoxWeak => "box-weak",
            RuleId::BoxDer => "box-der",
            RuleId::BoxContr => "box-contr",
            RuleId::BoxBox => "box-box",
            RuleId::BoxCoweak => "box-coweak",
            RuleId::BoxCocontr => "box-cocontr",
            RuleId::BoxCoder => "box-coder",
        }
    }

    pub fn parse(name: &str) -> Option<RuleId> {
        use RuleId::*;
        Some(match name {
            "ax-cut" => AxCut,
            "par-tens" => ParTens,
            "weak-coweak" => WeakCoweak,
            "der-coweak" => DerCoweak,
            "weak-coder" => WeakCoder,
            "contr-coweak" => ContrCoweak,
            "weak-cocontr" => WeakCocontr,
            "der-coder" => DerCoder,
            "contr-coder" => ContrCoder,
            "der-cocontr" => DerCocontr,
            "contr-cocontr" => ContrCocontr,
            "box-weak" => BoxWeak,
            "box-der" => BoxDer,
            "box-contr" => BoxContr,
            "box-box" => BoxBox,
            "box-coweak" => BoxCoweak,
            "box-cocontr" => BoxCocontr,
            "box-coder" => BoxCoder,
            _ => return None,
        })
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Where a tree position sits inside a simple net.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSite {
    pub root: SiteRoot,
    pub steps: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SiteRoot {
    Tree(usize),
    CutLeft(usize),
    CutRight(usize),
}

impl fmt::Display for TreeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.root {
            SiteRoot::Tree(i) => write!(f, "t{}", i)?,
            SiteRoot::CutLeft(i) => write!(f, "cl{}", i)?,
            SiteRoot::CutRight(i) => write!(f, "cr{}", i)?,
        }
        for s in &self.steps {
            write!(f, "/{}", s)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redex {
    /// Index of the support element inside the net.
    pub elem: usize,
    pub kind: RedexKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RedexKind {
    /// A basic or promotion cut redex. `flipped` records that the rule
    /// pattern matched with the cut sides swapped.
    Cut {
        index: usize,
        rule: RuleId,
        flipped: bool,
    },
    /// A commutative redex: the box at `site`, triggered by argument `arg`.
    Comm {
        site: TreeSite,
        rule: RuleId,
        arg: usize,
    },
    /// A redex inside the content of the box at `site`.
    InsideBox { site: TreeSite, inner: Box<Redex> },
}

impl Redex {
    pub fn rule(&self) -> RuleId {
        match &self.kind {
            RedexKind::Cut { rule, .. } | RedexKind::Comm { rule, .. } => *rule,
            RedexKind::InsideBox { inner, .. } => inner.rule(),
        }
    }

    pub fn site_string(&self) -> String {
        match &self.kind {
            RedexKind::Cut { index, flipped, .. } => {
                format!("e{}.c{}{}", self.elem, index, if *flipped { "~" } else { "" })
            }
            RedexKind::Comm { site, arg, .. } => {
                format!("e{}.{}#arg{}", self.elem, site, arg)
            }
            RedexKind::InsideBox { site, inner } => {
                format!("e{}.{}>>{}", self.elem, site, inner.site_string())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyKind {
    LeftmostInnermost,
    Random { seed: u64 },
    Single { rule: RuleId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub reduce_inside_boxes: bool,
}

impl Strategy {
    pub fn leftmost() -> Strategy {
        Strategy {
            kind: StrategyKind::LeftmostInnermost,
            reduce_inside_boxes: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RewriteError {
    NotARedex(String),
    /// The ax-cut side condition: substituting would erase a cycle.
    SideConditionBlocked(String),
    Syntax(SyntaxError),
}

impl fmt::Display for RewriteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteError::NotARedex(m) => write!(f, "not a redex: {}", m),
            RewriteError::SideConditionBlocked(m) => write!(f, "side condition blocks: {}", m),
            RewriteError::Syntax(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for RewriteError {}

impl From<SyntaxError> for RewriteError {
    fn from(e: SyntaxError) -> Self {
        RewriteError::Syntax(e)
    }
}

// ---------------------------------------------------------------------------
// redex recognition

/// Match a cut against the basic and promotion rule table, in the given
/// orientation. Returns the rule when the left/right shapes fit.
fn match_oriented(l: &ProofTree, r: &ProofTree) -> Option<RuleId> {
    use ProofTree::*;
    match (l, r) {
        (Par(_, _), Tens(_, _)) => Some(RuleId::ParTens),
        (Weak(_), Coweak(_)) => Some(RuleId::WeakCoweak),
        (Der(_), Coweak(_)) => Some(RuleId::DerCoweak),
        (Weak(_), Coder(_)) => Some(RuleId::WeakCoder),
        (Contr(_, _), Coweak(_)) => Some(RuleId::ContrCoweak),
        (Weak(_), Cocontr(_, _)) => Some(RuleId::WeakCocontr),
        (Der(_), Coder(_)) => Some(RuleId::DerCoder),
        (Contr(_, _), Coder(_)) => Some(RuleId::ContrCoder),
        (Der(_), Cocontr(_, _)) => Some(RuleId::DerCocontr),
        (Contr(_, _), Cocontr(_, _)) => Some(RuleId::ContrCocontr),
        (Box_ { .. }, Weak(_)) => Some(RuleId::BoxWeak),
        (Box_ { .. }, Der(_)) => Some(RuleId::BoxDer),
        (Box_ { .. }, Contr(_, _)) => Some(RuleId::BoxContr),
        _ => None,
    }
}

/// All redexes of a cut within its element, in orientation order.
fn cut_redexes(elem: &SimpleNet, index: usize) -> Vec<RedexKind> {
    let cut = &elem.cuts()[index];
    let mut out = Vec::new();
    // ax-cut in both orientations, guarded by the side condition and by
    // linearity of the covariable in the remainder
    for (var_side, other, flipped) in
        [(&cut.left, &cut.right, false), (&cut.right, &cut.left, true)]
    {
        if let ProofTree::Var(x) = var_side {
            let conj = x.conjugate();
            if other.vars().contains(&conj) {
                continue; // the loop: blocked
            }
            let occurrences = count_var_outside_cut(elem, index, &conj);
            if occurrences == 1 {
                out.push(RedexKind::Cut {
                    index,
                    rule: RuleId::AxCut,
                    flipped,
                });
            }
        }
    }
    if let Some(rule) = match_oriented(&cut.left, &cut.right) {
        out.push(RedexKind::Cut {
            index,
            rule,
            flipped: false,
        });
    } else if let Some(rule) = match_oriented(&cut.right, &cut.left) {
        out.push(RedexKind::Cut {
            index,
            rule,
            flipped: true,
        });
    }
    out
}

fn count_var_outside_cut(elem: &SimpleNet, cut_index: usize, target: &Var) -> usize {
    let mut count = 0;
    for t in elem.trees() {
        if t.vars().contains(target) {
            count += 1;
        }
    }
    for (k, c) in elem.cuts().iter().enumerate() {
        if k == cut_index {
            continue;
        }
        if c.vars().contains(target) {
            count += 1;
        }
    }
    count
}

fn comm_rule_for_arg(arg: &ProofTree) -> Option<RuleId> {
    match arg {
        ProofTree::Coweak(_) => Some(RuleId::BoxCoweak),
        ProofTree::Cocontr(_, _) => Some(RuleId::BoxCocontr),
        ProofTree::Coder(_) => Some(RuleId::BoxCoder),
        ProofTree::Box_ { .. } => Some(RuleId::BoxBox),
        _ => None,
    }
}

/// Complete redex enumeration: for each support element, tree roots then
/// cut sides are traversed with subtrees before their parents, then the
/// top-level cut redexes in index order. Content redexes appear (before
/// the box's own commutative redexes) only when the strategy says so.
pub fn find_redexes(net: &Net, strategy: &Strategy) -> Vec<Redex> {
    let mut out = Vec::new();
    for (e, (p, _)) in net.support().enumerate() {
        for (i, t) in p.trees().iter().enumerate() {
            walk_tree(
                t,
                TreeSite {
                    root: SiteRoot::Tree(i),
                    steps: Vec::new(),
                },
                e,
                strategy,
                &mut out,
            );
        }
        for (k, c) in p.cuts().iter().enumerate() {
            walk_tree(
                &c.left,
                TreeSite {
                    root: SiteRoot::CutLeft(k),
                    steps: Vec::new(),
                },
                e,
                strategy,
                &mut out,
            );
            walk_tree(
                &c.right,
                TreeSite {
                    root: SiteRoot::CutRight(k),
                    steps: Vec::new(),
                },
                e,
                strategy,
                &mut out,
            );
        }
        for k in 0..p.cuts().len() {
            for kind in cut_redexes(p, k) {
                out.push(Redex { elem: e, kind });
            }
        }
    }
    if let StrategyKind::Single { rule } = strategy.kind {
        out.retain(|r| r.rule() == rule);
    }
    out
}

fn walk_tree(t: &ProofTree, site: TreeSite, elem: usize, strategy: &Strategy, out: &mut Vec<Redex>) {
    match t {
        ProofTree::Var(_) | ProofTree::Weak(_) | ProofTree::Coweak(_) => {}
        ProofTree::Der(s) | ProofTree::Coder(s) => {
            let mut sub = site.clone();
            sub.steps.push(0);
            walk_tree(s, sub, elem, strategy, out);
        }
        ProofTree::Tens(l, r)
        | ProofTree::Par(l, r)
        | ProofTree::Contr(l, r)
        | ProofTree::Cocontr(l, r) => {
            let mut sl = site.clone();
            sl.steps.push(0);
            walk_tree(l, sl, elem, strategy, out);
            let mut sr = site.clone();
            sr.steps.push(1);
            walk_tree(r, sr, elem, strategy, out);
        }
        ProofTree::Box_ { content, args, .. } => {
            for (j, a) in args.iter().enumerate() {
                let mut sa = site.clone();
                sa.steps.push(j);
                walk_tree(a, sa, elem, strategy, out);
            }
            if strategy.reduce_inside_boxes {
                for inner in find_redexes(content, strategy) {
                    out.push(Redex {
                        elem,
                        kind: RedexKind::InsideBox {
                            site: site.clone(),
                            inner: Box::new(inner),
                        },
                    });
                }
            }
            for (j, a) in args.iter().enumerate() {
                if let Some(rule) = comm_rule_for_arg(a) {
                    out.push(Redex {
                        elem,
                        kind: RedexKind::Comm {
                            site: site.clone(),
                            rule,
                            arg: j,
                        },
                    });
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// rule right-hand sides

/// Result of a cut rule: either a substitution into the remainder of the
/// element (ax-cut) or a weighted list of cut packages to splice in.
pub enum CutReduct {
    Substitute { target: Var, replacement: ProofTree },
    Fragments(Vec<(Scalar, Vec<Cut>)>),
}

/// The right-hand side of a basic (non-promotion) cut rule; `l`/`r` must
/// already be oriented as the rule table expects.
pub fn basic_cut_step(
    l: &ProofTree,
    r: &ProofTree,
    fresh: &mut FreshSource,
    taken: &mut BTreeSet<String>,
) -> Result<CutReduct, RewriteError> {
    use ProofTree::*;
    if let Var(x) = l {
        if r.vars().contains(&x.conjugate()) {
            return Err(RewriteError::SideConditionBlocked(format!(
                "covariable of {} occurs in the other side",
                x
            )));
        }
        return Ok(CutReduct::Substitute {
            target: x.conjugate(),
            replacement: r.clone(),
        });
    }
    let frag = |terms: Vec<(Scalar, Vec<Cut>)>| Ok(CutReduct::Fragments(terms));
    match (l, r) {
        (Par(s1, s2), Tens(t1, t2)) => frag(vec![(
            Scalar::one(),
            vec![
                Cut::new((**s1).clone(), (**t1).clone())?,
                Cut::new((**s2).clone(), (**t2).clone())?,
            ],
        )]),
        (Weak(_), Coweak(_)) => frag(vec![(Scalar::one(), vec![])]),
        (Der(_), Coweak(_)) | (Weak(_), Coder(_)) => frag(vec![]),
        (Contr(s1, s2), Coweak(ann)) => frag(vec![(
            Scalar::one(),
            vec![
                Cut::new((**s1).clone(), Coweak(ann.clone()))?,
                Cut::new((**s2).clone(), Coweak(ann.clone()))?,
            ],
        )]),
        (Weak(ann), Cocontr(t1, t2)) => frag(vec![(
            Scalar::one(),
            vec![
                Cut::new(Weak(ann.clone()), (**t1).clone())?,
                Cut::new(Weak(ann.clone()), (**t2).clone())?,
            ],
        )]),
        (Der(s), Coder(t)) => frag(vec![(
            Scalar::one(),
            vec![Cut::new((**s).clone(), (**t).clone())?],
        )]),
        (Contr(s1, s2), Coder(t)) => frag(vec![
            (
                Scalar::one(),
                vec![
                    Cut::new((**s1).clone(), ProofTree::coder((**t).clone()))?,
                    Cut::new((**s2).clone(), Coweak(None))?,
                ],
            ),
            (
                Scalar::one(),
                vec![
                    Cut::new((**s1).clone(), Coweak(None))?,
                    Cut::new((**s2).clone(), ProofTree::coder((**t).clone()))?,
                ],
            ),
        ]),
        (Der(s), Cocontr(t1, t2)) => frag(vec![
            (
                Scalar::one(),
                vec![
                    Cut::new(ProofTree::der((**s).clone()), (**t1).clone())?,
                    Cut::new(Weak(None), (**t2).clone())?,
                ],
            ),
            (
                Scalar::one(),
                vec![
                    Cut::new(Weak(None), (**t1).clone())?,
                    Cut::new(ProofTree::der((**s).clone()), (**t2).clone())?,
                ],
            ),
        ]),
        (Contr(s1, s2), Cocontr(t1, t2)) => {
            // bialgebra square: four fresh pairs
            let x11 = next_fresh(fresh, taken);
            let x12 = next_fresh(fresh, taken);
            let x21 = next_fresh(fresh, taken);
            let x22 = next_fresh(fresh, taken);
            let v = |x: &crate::syntax::Var| ProofTree::Var(x.clone());
            let cv = |x: &crate::syntax::Var| ProofTree::Var(x.conjugate());
            frag(vec![(
                Scalar::one(),
                vec![
                    Cut::new((**s1).clone(), ProofTree::cocontr(v(&x11), v(&x12)))?,
                    Cut::new((**s2).clone(), ProofTree::cocontr(v(&x21), v(&x22)))?,
                    Cut::new(ProofTree::contr(cv(&x11), cv(&x21)), (**t1).clone())?,
                    Cut::new(ProofTree::contr(cv(&x12), cv(&x22)), (**t2).clone())?,
                ],
            )])
        }
        _ => Err(RewriteError::NotARedex(format!("<{}|{}>", l, r))),
    }
}

/// Promotion against weakening, dereliction or contraction.
pub fn promotion_cut_step(
    l: &ProofTree,
    r: &ProofTree,
    fresh: &mut FreshSource,
    taken: &mut BTreeSet<String>,
) -> Result<Vec<(Scalar, Vec<Cut>)>, RewriteError> {
    use ProofTree::*;
    let (content, args) = match l {
        Box_ { content, args, .. } => (content, args),
        _ => return Err(RewriteError::NotARedex(format!("<{}|{}>", l, r))),
    };
    match r {
        Weak(_) => {
            let cuts = args
                .iter()
                .map(|t| Cut::new(t.clone(), Weak(None)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(vec![(Scalar::one(), cuts)])
        }
        Der(s) => {
            let mut out = Vec::new();
            for (p, coeff) in content.support() {
                let renamed = rename_fresh(p, fresh, taken);
                let n = args.len();
                debug_assert_eq!(renamed.width(), n + 1);
                let mut cuts = renamed.cuts().to_vec();
                for (i, arg) in args.iter().enumerate() {
                    cuts.push(Cut::new(renamed.trees()[i].clone(), arg.clone())?);
                }
                cuts.push(Cut::new(renamed.trees()[n].clone(), (**s).clone())?);
                out.push((coeff.clone(), cuts));
            }
            Ok(out)
        }
        Contr(s1, s2) => {
            let n = args.len();
            let xs: Vec<crate::syntax::Var> =
                (0..n).map(|_| next_fresh(fresh, taken)).collect();
            let ys: Vec<crate::syntax::Var> =
                (0..n).map(|_| next_fresh(fresh, taken)).collect();
            let box1 = ProofTree::box_(
                (**content).clone(),
                xs.iter().map(|x| ProofTree::Var(x.clone())).collect(),
            )?;
            let box2 = ProofTree::box_(
                (**content).clone(),
                ys.iter().map(|y| ProofTree::Var(y.clone())).collect(),
            )?;
            let mut cuts = vec![
                Cut::new(box1, (**s1).clone())?,
                Cut::new(box2, (**s2).clone())?,
            ];
            for (i, t) in args.iter().enumerate() {
                cuts.push(Cut::new(
                    t.clone(),
                    ProofTree::contr(
                        ProofTree::Var(xs[i].conjugate()),
                        ProofTree::Var(ys[i].conjugate()),
                    ),
                )?);
            }
            Ok(vec![(Scalar::one(), cuts)])
        }
        _ => Err(RewriteError::NotARedex(format!("<{}|{}>", l, r))),
    }
}

/// A commutative reduction at argument `arg` of a box tree. Each result
/// term is a width-1 net: a replacement tree plus floating cuts.
pub fn commutative_step(
    tree: &ProofTree,
    arg: usize,
    fresh: &mut FreshSource,
    taken: &mut BTreeSet<String>,
) -> Result<Vec<(Scalar, ProofTree, Vec<Cut>)>, RewriteError> {
    let (content, args, arity) = match tree {
        ProofTree::Box_ {
            content,
            args,
            arity,
        } => (content, args, *arity),
        _ => return Err(RewriteError::NotARedex(tree.to_string())),
    };
    if arg >= args.len() {
        return Err(RewriteError::NotARedex(format!("no argument {}", arg)));
    }
    match &args[arg] {
        ProofTree::Coweak(ann) => {
            // merge the coweakening into the content, dropping port `arg`
            let mut terms = Vec::new();
            for (p, coeff) in content.support() {
                let mut trees = p.trees().to_vec();
                let port = trees.remove(arg);
                let mut cuts = p.cuts().to_vec();
                cuts.push(Cut::new(port, ProofTree::Coweak(ann.clone()))?);
                terms.push((coeff.clone(), SimpleNet::new(trees, cuts)?));
            }
            let new_content = Net::from_terms(arity, terms)?;
            let mut new_args = args.clone();
            new_args.remove(arg);
            let new_box = ProofTree::box_(new_content, new_args)?;
            Ok(vec![(Scalar::one(), new_box, vec![])])
        }
        ProofTree::Cocontr(u1, u2) => {
            // split port `arg` in two through a cocontraction in the content
            let mut terms = Vec::new();
            for (p, coeff) in content.support() {
                let taken_in_p: BTreeSet<String> =
                    p.all_vars().iter().map(|v| v.base.clone()).collect();
                let mut local = taken_in_p;
                let x = fresh.fresh(&local);
                local.insert(x.base.clone());
                let y = fresh.fresh(&local);
                let mut trees = p.trees().to_vec();
                let port = trees.remove(arg);
                trees.insert(arg, ProofTree::Var(y.conjugate()));
                trees.insert(arg, ProofTree::Var(x.conjugate()));
                let mut cuts = p.cuts().to_vec();
                cuts.push(Cut::new(
                    port,
                    ProofTree::cocontr(ProofTree::Var(x.clone()), ProofTree::Var(y.clone())),
                )?);
                terms.push((coeff.clone(), SimpleNet::new(trees, cuts)?));
            }
            let new_content = Net::from_terms(arity + 2, terms)?;
            let mut new_args = args.clone();
            new_args.remove(arg);
            new_args.insert(arg, (**u2).clone());
            new_args.insert(arg, (**u1).clone());
            let new_box = ProofTree::box_(new_content, new_args)?;
            Ok(vec![(Scalar::one(), new_box, vec![])])
        }
        ProofTree::Box_ {
            content: inner_content,
            args: inner_args,
            ..
        } => {
            // merge the inner box into the content at port `arg`
            let k = inner_args.len();
            let mut terms = Vec::new();
            for (p, coeff) in content.support() {
                let taken_in_p: BTreeSet<String> =
                    p.all_vars().iter().map(|v| v.base.clone()).collect();
                let mut local = taken_in_p;
                let xs: Vec<Var> = (0..k)
                    .map(|_| {
                        let x = fresh.fresh(&local);
                        local.insert(x.base.clone());
                        x
                    })
                    .collect();
                let mut trees = p.trees().to_vec();
                let port = trees.remove(arg);
                for (j, x) in xs.iter().enumerate().rev() {
                    let _ = j;
                    trees.insert(arg, ProofTree::Var(x.conjugate()));
                }
                let inner_box = ProofTree::box_(
                    (**inner_content).clone(),
                    xs.iter().map(|x| ProofTree::Var(x.clone())).collect(),
                )?;
                let mut cuts = p.cuts().to_vec();
                cuts.push(Cut::new(port, inner_box)?);
                terms.push((coeff.clone(), SimpleNet::new(trees, cuts)?));
            }
            let new_content = Net::from_terms(arity + k, terms)?;
            let mut new_args = args.clone();
            new_args.remove(arg);
            for a in inner_args.iter().rev() {
                new_args.insert(arg, a.clone());
            }
            let new_box = ProofTree::box_(new_content, new_args)?;
            Ok(vec![(Scalar::one(), new_box, vec![])])
        }
        ProofTree::Coder(u) => {
            // chain rule: differentiate the box along argument `arg`
            let n = args.len();
            let mut out = Vec::new();
            for (p, coeff) in content.support() {
                let spliced = rename_fresh(p, fresh, taken);
                debug_assert_eq!(spliced.width(), n + 1);
                let xs: Vec<Option<Var>> = (0..n)
                    .map(|j| {
                        if j == arg {
                            None
                        } else {
                            Some(next_fresh(fresh, taken))
                        }
                    })
                    .collect();
                let new_box_args: Vec<ProofTree> = xs
                    .iter()
                    .map(|x| match x {
                        Some(v) => ProofTree::Var(v.clone()),
                        None => ProofTree::Coweak(None),
                    })
                    .collect();
                let new_box = ProofTree::box_((**content).clone(), new_box_args)?;
                let main = ProofTree::cocontr(
                    new_box,
                    ProofTree::coder(spliced.trees()[n].clone()),
                );
                let mut cuts = spliced.cuts().to_vec();
                cuts.push(Cut::new(
                    spliced.trees()[arg].clone(),
                    ProofTree::coder((**u).clone()),
                )?);
                for (j, x) in xs.iter().enumerate() {
                    if let Some(v) = x {
                        cuts.push(Cut::new(
                            ProofTree::contr(
                                ProofTree::Var(v.conjugate()),
                                spliced.trees()[j].clone(),
                            ),
                            args[j].clone(),
                        )?);
                    }
                }
                out.push((coeff.clone(), main, cuts));
            }
            Ok(out)
        }
        other => Err(RewriteError::NotARedex(format!(
            "argument {} has head {}",
            arg, other
        ))),
    }
}

fn next_fresh(fresh: &mut FreshSource, taken: &mut BTreeSet<String>) -> Var {
    let v = fresh.fresh(taken);
    taken.insert(v.base.clone());
    v
}

/// Rename every variable of a (closed) simple net to fresh names so it can
/// be spliced into an enclosing net.
fn rename_fresh(p: &SimpleNet, fresh: &mut FreshSource, taken: &mut BTreeSet<String>) -> SimpleNet {
    let bases: BTreeSet<String> = p.all_vars().iter().map(|v| v.base.clone()).collect();
    let mut map = std::collections::BTreeMap::new();
    for b in bases {
        let nv = next_fresh(fresh, taken);
        map.insert(Var::plain(b.clone()), ProofTree::Var(nv.clone()));
        map.insert(Var::co_of(b), ProofTree::Var(nv.conjugate()));
    }
    let sub_tree = |t: &ProofTree| -> ProofTree {
        fn go(t: &ProofTree, map: &std::collections::BTreeMap<Var, ProofTree>) -> ProofTree {
            match t {
                ProofTree::Var(v) => map
                    .get(v)
                    .cloned()
                    .unwrap_or_else(|| ProofTree::Var(v.clone())),
                ProofTree::Tens(l, r) => ProofTree::tens(go(l, map), go(r, map)),
                ProofTree::Par(l, r) => ProofTree::par(go(l, map), go(r, map)),
                ProofTree::Contr(l, r) => ProofTree::contr(go(l, map), go(r, map)),
                ProofTree::Cocontr(l, r) => ProofTree::cocontr(go(l, map), go(r, map)),
                ProofTree::Der(s) => ProofTree::der(go(s, map)),
                ProofTree::Coder(s) => ProofTree::coder(go(s, map)),
                ProofTree::Weak(a) => ProofTree::Weak(a.clone()),
                ProofTree::Coweak(a) => ProofTree::Coweak(a.clone()),
                ProofTree::Box_ {
                    arity,
                    content,
                    args,
                } => ProofTree::Box_ {
                    arity: *arity,
                    content: content.clone(),
                    args: args.iter().map(|a| go(a, map)).collect(),
                },
            }
        }
        go(t, &map)
    };
    let trees = p.trees().iter().map(&sub_tree).collect();
    let cuts = p
        .cuts()
        .iter()
        .map(|c| Cut {
            left: sub_tree(&c.left),
            right: sub_tree(&c.right),
        })
        .collect();
    SimpleNet::new(trees, cuts).expect("renaming preserves disjointness")
}

// ---------------------------------------------------------------------------
// applying a redex

/// Contract `redex` in `net`: the targeted support element is replaced by
/// the rule's right-hand side, with its coefficient distributed over the
/// result exactly as the contextual rule prescribes.
pub fn step(net: &Net, redex: &Redex) -> Result<Net, RewriteError> {
    let mut taken: BTreeSet<String> = taken_names(net);
    let mut fresh = FreshSource::new();
    let (elem, coeff) = net
        .support()
        .nth(redex.elem)
        .map(|(p, c)| (p.clone(), c.clone()))
        .ok_or_else(|| RewriteError::NotARedex("no such support element".into()))?;
    let replacement = step_element(&elem, &redex.kind, &mut fresh, &mut taken)?;
    let mut result = net.clone();
    result = result
        .add(&Net::from_terms(net.width(), vec![(coeff.neg(), elem)])?)
        .map_err(RewriteError::from)?;
    result = result
        .add(&replacement.scale(&coeff))
        .map_err(RewriteError::from)?;
    Ok(result)
}

/// The right-hand side for one support element (coefficient 1).
fn step_element(
    elem: &SimpleNet,
    kind: &RedexKind,
    fresh: &mut FreshSource,
    taken: &mut BTreeSet<String>,
) -> Result<Net, RewriteError> {
    match kind {
        RedexKind::Cut {
            index,
            rule,
            flipped,
        } => {
            let cut = elem
                .cuts()
                .get(*index)
                .ok_or_else(|| RewriteError::NotARedex("cut index out of range".into()))?
                .clone();
            let (l, r) = if *flipped {
                (cut.right.clone(), cut.left.clone())
            } else {
                (cut.left.clone(), cut.right.clone())
            };
            let mut rest_cuts = elem.cuts().to_vec();
            rest_cuts.remove(*index);
            let reduct = match rule {
                RuleId::BoxWeak | RuleId::BoxDer | RuleId::BoxContr => {
                    CutReduct::Fragments(promotion_cut_step(&l, &r, fresh, taken)?)
                }
                _ => basic_cut_step(&l, &r, fresh, taken)?,
            };
            match reduct {
                CutReduct::Substitute {
                    target,
                    replacement,
                } => {
                    let remainder = SimpleNet::new(elem.trees().to_vec(), rest_cuts)?;
                    let substituted = remainder.substitute(&replacement, &target)?;
                    Ok(Net::simple(substituted))
                }
                CutReduct::Fragments(terms) => {
                    let mut out = Vec::new();
                    for (c, extra_cuts) in terms {
                        let mut cuts = rest_cuts.clone();
                        cuts.extend(extra_cuts);
                        out.push((c, SimpleNet::new(elem.trees().to_vec(), cuts)?));
                    }
                    Ok(Net::from_terms(elem.width(), out)?)
                }
            }
        }
        RedexKind::Comm { site, arg, .. } => {
            let subtree = get_subtree(elem, site)?;
            let terms = commutative_step(&subtree, *arg, fresh, taken)?;
            let mut out = Vec::new();
            for (c, new_tree, extra_cuts) in terms {
                let replaced = replace_subtree(elem, site, &new_tree)?;
                let mut cuts = replaced.cuts().to_vec();
                cuts.extend(extra_cuts);
                out.push((c, SimpleNet::new(replaced.trees().to_vec(), cuts)?));
            }
            Ok(Net::from_terms(elem.width(), out)?)
        }
        RedexKind::InsideBox { site, inner } => {
            let subtree = get_subtree(elem, site)?;
            let (arity, content, args) = match &subtree {
                ProofTree::Box_ {
                    arity,
                    content,
                    args,
                } => (*arity, (**content).clone(), args.clone()),
                other => {
                    return Err(RewriteError::NotARedex(format!(
                        "expected a box at {}, found {}",
                        site, other
                    )))
                }
            };
            let new_content = step(&content, inner)?;
            let _ = arity;
            let new_box = ProofTree::box_(new_content, args)?;
            let replaced = replace_subtree(elem, site, &new_box)?;
            Ok(Net::simple(replaced))
        }
    }
}

fn get_subtree(elem: &SimpleNet, site: &TreeSite) -> Result<ProofTree, RewriteError> {
    let mut cur = match &site.root {
        SiteRoot::Tree(i) => elem
            .trees()
            .get(*i)
            .ok_or_else(|| RewriteError::NotARedex("tree index out of range".into()))?,
        SiteRoot::CutLeft(k) => &elem
            .cuts()
            .get(*k)
            .ok_or_else(|| RewriteError::NotARedex("cut index out of range".into()))?
            .left,
        SiteRoot::CutRight(k) => &elem
            .cuts()
            .get(*k)
            .ok_or_else(|| RewriteError::NotARedex("cut index out of range".into()))?
            .right,
    };
    for &s in &site.steps {
        cur = child(cur, s)
            .ok_or_else(|| RewriteError::NotARedex(format!("no child {} at {}", s, site)))?;
    }
    Ok(cur.clone())
}

fn child(t: &ProofTree, i: usize) -> Option<&ProofTree> {
    match (t, i) {
        (ProofTree::Tens(l, _), 0)
        | (ProofTree::Par(l, _), 0)
        | (ProofTree::Contr(l, _), 0)
        | (ProofTree::Cocontr(l, _), 0) => Some(l),
        (ProofTree::Tens(_, r), 1)
        | (ProofTree::Par(_, r), 1)
        | (ProofTree::Contr(_, r), 1)
        | (ProofTree::Cocontr(_, r), 1) => Some(r),
        (ProofTree::Der(s), 0) | (ProofTree::Coder(s), 0) => Some(s),
        (ProofTree::Box_ { args, .. }, j) => args.get(j),
        _ => None,
    }
}

fn replace_subtree(
    elem: &SimpleNet,
    site: &TreeSite,
    new_tree: &ProofTree,
) -> Result<SimpleNet, RewriteError> {
    let rebuild = |root: &ProofTree| replace_in_tree(root, &site.steps, new_tree);
    let mut trees = elem.trees().to_vec();
    let mut cuts = elem.cuts().to_vec();
    match &site.root {
        SiteRoot::Tree(i) => {
            trees[*i] = rebuild(&trees[*i])?;
        }
        SiteRoot::CutLeft(k) => {
            cuts[*k] = Cut {
                left: rebuild(&cuts[*k].left)?,
                right: cuts[*k].right.clone(),
            };
        }
        SiteRoot::CutRight(k) => {
            cuts[*k] = Cut {
                left: cuts[*k].left.clone(),
                right: rebuild(&cuts[*k].right)?,
            };
        }
    }
    Ok(SimpleNet::new(trees, cuts)?)
}

fn replace_in_tree(
    t: &ProofTree,
    steps: &[usize],
    new_tree: &ProofTree,
) -> Result<ProofTree, RewriteError> {
    let Some((&s, rest)) = steps.split_first() else {
        return Ok(new_tree.clone());
    };
    Ok(match (t, s) {
        (ProofTree::Tens(l, r), 0) => ProofTree::tens(replace_in_tree(l, rest, new_tree)?, (**r).clone()),
        (ProofTree::Tens(l, r), 1) => ProofTree::tens((**l).clone(), replace_in_tree(r, rest, new_tree)?),
        (ProofTree::Par(l, r), 0) => ProofTree::par(replace_in_tree(l, rest, new_tree)?, (**r).clone()),
        (ProofTree::Par(l, r), 1) => ProofTree::par((**l).clone(), replace_in_tree(r, rest, new_tree)?),
        (ProofTree::Contr(l, r), 0) => {
            ProofTree::contr(replace_in_tree(l, rest, new_tree)?, (**r).clone())
        }
        (ProofTree::Contr(l, r), 1) => {
            ProofTree::contr((**l).clone(), replace_in_tree(r, rest, new_tree)?)
        }
        (ProofTree::Cocontr(l, r), 0) => {
            ProofTree::cocontr(replace_in_tree(l, rest, new_tree)?, (**r).clone())
        }
        (ProofTree::Cocontr(l, r), 1) => {
            ProofTree::cocontr((**l).clone(), replace_in_tree(r, rest, new_tree)?)
        }
        (ProofTree::Der(x), 0) => ProofTree::der(replace_in_tree(x, rest, new_tree)?),
        (ProofTree::Coder(x), 0) => ProofTree::coder(replace_in_tree(x, rest, new_tree)?),
        (ProofTree::Box_ { arity, content, args }, j) if j < args.len() => {
            let mut args = args.clone();
            args[j] = replace_in_tree(&args[j], rest, new_tree)?;
            ProofTree::Box_ {
                arity: *arity,
                content: content.clone(),
                args,
            }
        }
        (other, _) => {
            return Err(RewriteError::NotARedex(format!(
                "no child {} under {}",
                s, other
            )))
        }
    })
}

// ---------------------------------------------------------------------------
// normalization

#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub index: usize,
    pub rule: RuleId,
    pub site: String,
    pub redex: String,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {} @{} : {}", self.index, self.rule, self.site, self.redex)
    }
}

#[derive(Clone, Debug)]
pub enum NormalizeOutcome {
    Normal(Net),
    FuelExhausted(Net),
}

impl NormalizeOutcome {
    pub fn net(&self) -> &Net {
        match self {
            NormalizeOutcome::Normal(n) | NormalizeOutcome::FuelExhausted(n) => n,
        }
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, NormalizeOutcome::Normal(_))
    }
}

fn describe_redex(net: &Net, redex: &Redex) -> String {
    let elem = match net.support().nth(redex.elem) {
        Some((p, _)) => p,
        None => return "?".into(),
    };
    match &redex.kind {
        RedexKind::Cut { index, .. } => elem
            .cuts()
            .get(*index)
            .map(|c| c.to_string())
            .unwrap_or_else(|| "?".into()),
        RedexKind::Comm { site, .. } | RedexKind::InsideBox { site, .. } => {
            get_subtree(elem, site)
                .map(|t| t.to_string())
                .unwrap_or_else(|_| "?".into())
        }
    }
}

/// Iterate `step` under the strategy until no redex remains or fuel runs
/// out. The trace records one line per contraction.
pub fn normalize(
    net: &Net,
    fuel: usize,
    strategy: &Strategy,
) -> Result<(NormalizeOutcome, Vec<TraceEntry>), RewriteError> {
    let mut rng = match strategy.kind {
        StrategyKind::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut current = net.clone();
    let mut trace = Vec::new();
    for k in 0..fuel {
        let redexes = find_redexes(&current, strategy);
        if redexes.is_empty() {
            return Ok((NormalizeOutcome::Normal(current), trace));
        }
        let pick = match &mut rng {
            Some(rng) => rng.gen_range(0..redexes.len()),
            None => 0,
        };
        let redex = &redexes[pick];
        trace.push(TraceEntry {
            index: k + 1,
            rule: redex.rule(),
            site: redex.site_string(),
            redex: describe_redex(&current, redex),
        });
        current = step(&current, redex)?;
    }
    Ok((NormalizeOutcome::FuelExhausted(current), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_net;

    fn lm() -> Strategy {
        Strategy::leftmost()
    }

    fn normal_form(text: &str) -> Net {
        let net = parse_net(text).unwrap();
        let (out, _) = normalize(&net, 100, &lm()).unwrap();
        assert!(out.is_normal(), "fuel exhausted on {}", text);
        out.net().clone()
    }

    #[test]
    fn weak_coweak_reduces_to_empty() {
        let nf = normal_form("(; <w:?a | cw>)");
        assert_eq!(nf, parse_net("(;)").unwrap());
    }

    #[test]
    fn der_coweak_gives_zero() {
        let nf = normal_form("([~x] ; <d(x) | cw>)");
        assert!(nf.is_zero());
        assert_eq!(nf.width(), 1);
    }

    #[test]
    fn weak_coder_gives_zero() {
        let nf = normal_form("([~x] ; <w | cd(x)>)");
        assert!(nf.is_zero());
    }

    #[test]
    fn par_tens_splits_into_two_cuts() {
        let net = parse_net("([~s1, ~s2, ~t1, ~t2] ; <s1 par s2 | t1 tens t2>)").unwrap();
        let redexes = find_redexes(&net, &lm());
        assert_eq!(redexes.len(), 1);
        assert_eq!(redexes[0].rule(), RuleId::ParTens);
        let after = step(&net, &redexes[0]).unwrap();
        let expect = parse_net("([~s1, ~s2, ~t1, ~t2] ; <s1|t1>, <s2|t2>)").unwrap();
        assert_eq!(after, expect);
    }

    #[test]
    fn contr_coder_two_term_sum() {
        let net = parse_net("([~s1, ~s2, ~t] ; <c(s1,s2) | cd(t)>)").unwrap();
        let redexes = find_redexes(&net, &lm());
        assert_eq!(redexes.len(), 1);
        let after = step(&net, &redexes[0]).unwrap();
        let expect = parse_net(
            "([~s1, ~s2, ~t] ; <s1|cd(t)>, <s2|cw>) + ([~s1, ~s2, ~t] ; <s1|cw>, <s2|cd(t)>)",
        )
        .unwrap();
        assert_eq!(after, expect);
    }

    #[test]
    fn flipped_orientation_matches() {
        // same redex with the cut written the other way round
        let nf = normal_form("(; <cw | w:?a>)");
        assert_eq!(nf, parse_net("(;)").unwrap());
    }

    #[test]
    fn loop_has_no_redex() {
        let net = parse_net("(; <x|~x>)").unwrap();
        assert!(find_redexes(&net, &lm()).is_empty());
    }

    #[test]
    fn ax_cut_substitutes() {
        let net = parse_net("([~x] ; <x|~w1>)").unwrap();
        let redexes = find_redexes(&net, &lm());
        assert_eq!(redexes.len(), 1);
        assert_eq!(redexes[0].rule(), RuleId::AxCut);
        let after = step(&net, &redexes[0]).unwrap();
        assert_eq!(after, parse_net("([~w1] ;)").unwrap());
    }

    #[test]
    fn contr_cocontr_bialgebra_then_normal_form() {
        // <c(w,w) | cc(cw,cw)> : the bialgebra square fires, then the
        // contraction/coweakening family collapses everything to (;)
        let net = parse_net("(; <c(w:?a, w:?a) | cc(cw, cw)>)").unwrap();
        let redexes = find_redexes(&net, &lm());
        assert_eq!(redexes.len(), 1);
        assert_eq!(redexes[0].rule(), RuleId::ContrCocontr);
        let after = step(&net, &redexes[0]).unwrap();
        let (p, _) = after.support().next().unwrap();
        assert_eq!(p.cuts().len(), 4);
        let (out, _) = normalize(&net, 100, &lm()).unwrap();
        assert!(out.is_normal());
        assert_eq!(out.net(), &parse_net("(;)").unwrap());
    }

    #[test]
    fn box_weak_cuts_arguments() {
        let net = parse_net("([~u] ; <box{([d(~y), y] ;)}(cd(u)) | w>)").unwrap();
        let redexes = find_redexes(&net, &lm());
        let bw: Vec<_> = redexes.iter().filter(|r| r.rule() == RuleId::BoxWeak).collect();
        assert_eq!(bw.len(), 1);
        let after = step(&net, bw[0]).unwrap();
        let expect = parse_net("([~u] ; <cd(u) | w>)").unwrap();
        assert_eq!(after, expect);
    }

    #[test]
    fn box_der_splices_content() {
        // 0-ary box: the content lands as floating cuts
        let net = parse_net("([~s] ; <box{([cw:!a] ;)}() | d(s)>)").unwrap();
        let redexes = find_redexes(&net, &lm());
        assert_eq!(redexes[0].rule(), RuleId::BoxDer);
        let after = step(&net, &redexes[0]).unwrap();
        assert_eq!(after, parse_net("([~s] ; <cw:!a | s>)").unwrap());

        // unary box: ports cut against the arguments
        let net = parse_net("([~z, ~s] ; <box{([d(~y), y] ;)}(cd(z)) | d(s)>)").unwrap();
        let redexes = find_redexes(&net, &lm());
        let bd: Vec<_> = redexes.iter().filter(|r| r.rule() == RuleId::BoxDer).collect();
        assert_eq!(bd.len(), 1);
        let after = step(&net, bd[0]).unwrap();
        let expect = parse_net("([~z, ~s] ; <d(~g0) | cd(z)>, <g0 | s>)").unwrap();
        assert!(after.equivalent(&expect), "got {}", after);
    }

    #[test]
    fn box_der_zero_content() {
        let net = parse_net("([~s] ; <box{0}() | d(s)>)").unwrap();
        let redexes = find_redexes(&net, &lm());
        assert_eq!(redexes[0].rule(), RuleId::BoxDer);
        let after = step(&net, &redexes[0]).unwrap();
        assert!(after.is_zero());
    }

    #[test]
    fn box_contr_duplicates_box() {
        let net = parse_net("([~u, ~s1, ~s2] ; <box{([d(~y), y] ;)}(cd(u)) | c(s1, s2)>)").unwrap();
        let redexes = find_redexes(&net, &lm());
        let bc: Vec<_> = redexes.iter().filter(|r| r.rule() == RuleId::BoxContr).collect();
        assert_eq!(bc.len(), 1);
        let after = step(&net, bc[0]).unwrap();
        assert_eq!(after.support_len(), 1);
        let (p, _) = after.support().next().unwrap();
        assert_eq!(p.cuts().len(), 3);
        let boxes = p
            .cuts()
            .iter()
            .flat_map(|c| [&c.left, &c.right])
            .filter(|t| matches!(t, ProofTree::Box_ { .. }))
            .count();
        assert_eq!(boxes, 2);
    }

    #[test]
    fn box_coweak_merges_into_content() {
        let net = parse_net("([box{([d(~y), y] ;)}(cw)] ;)").unwrap();
        let redexes = find_redexes(&net, &lm());
        assert_eq!(redexes[0].rule(), RuleId::BoxCoweak);
        let after = step(&net, &redexes[0]).unwrap();
        let expect = parse_net("([box{([y] ; <d(~y) | cw>)}()] ;)").unwrap();
        assert!(after.equivalent(&expect), "got {}", after);
    }

    #[test]
    fn box_box_merges() {
        let inner = "box{([d(~z), z] ;)}(u)";
        let net = parse_net(&format!("([u2, box{{([d(~y), y] ;)}}({})] ;)", inner)).unwrap();
        let _ = net;
        // the inner box feeds port 0 of the outer box
        let net =
            parse_net(&format!("([box{{([d(~y), y] ;)}}({})] ;)", inner)).unwrap();
        let redexes = find_redexes(&net, &lm());
        let bb: Vec<_> = redexes.iter().filter(|r| r.rule() == RuleId::BoxBox).collect();
        assert_eq!(bb.len(), 1);
        let after = step(&net, bb[0]).unwrap();
        let (p, _) = after.support().next().unwrap();
        match &p.trees()[0] {
            ProofTree::Box_ { arity, content, .. } => {
                assert_eq!(*arity, 1);
                let (q, _) = content.support().next().unwrap();
                assert_eq!(q.width(), 2);
                assert_eq!(q.cuts().len(), 1);
            }
            other => panic!("expected box, got {}", other),
        }
    }

    #[test]
    fn chain_rule_shape() {
        let net = parse_net("([~u, box{([d(~y), y] ;)}(cd(u))] ;)").unwrap();
        let redexes = find_redexes(&net, &lm());
        let cr: Vec<_> = redexes
            .iter()
            .filter(|r| r.rule() == RuleId::BoxCoder)
            .collect();
        assert_eq!(cr.len(), 1);
        let after = step(&net, cr[0]).unwrap();
        assert_eq!(after.support_len(), 1);
        let (p, _) = after.support().next().unwrap();
        // main tree is cc(box, cd(...)), one cut from the content splice
        match &p.trees()[1] {
            ProofTree::Cocontr(l, r) => {
                assert!(matches!(**l, ProofTree::Box_ { .. }));
                assert!(matches!(**r, ProofTree::Coder(_)));
            }
            other => panic!("expected cocontraction, got {}", other),
        }
        // arity 1, so no contraction cuts on other ports; the content cut
        // list is empty; one cut pairs the content port with cd(u)
        assert_eq!(p.cuts().len(), 1);
    }

    #[test]
    fn reduce_inside_boxes_flag() {
        let net = parse_net("([box{([y par ~y] ; <w:?a | cw>)}()] ;)").unwrap();
        assert!(find_redexes(&net, &lm()).is_empty());
        let strategy = Strategy {
            kind: StrategyKind::LeftmostInnermost,
            reduce_inside_boxes: true,
        };
        let redexes = find_redexes(&net, &strategy);
        assert_eq!(redexes.len(), 1);
        let after = step(&net, &redexes[0]).unwrap();
        let expect = parse_net("([box{([y par ~y] ;)}()] ;)").unwrap();
        assert!(after.equivalent(&expect));
    }

    #[test]
    fn step_is_linear_in_the_sum() {
        // step on 2p + q targeting p leaves q alone
        let p = "([~x] ; <d(x) | cw>)"; // reduces to 0
        let q = "([~x] ;)";
        let net = parse_net(&format!("2 * {} + {}", p, q)).unwrap();
        let redexes = find_redexes(&net, &lm());
        assert_eq!(redexes.len(), 1);
        let after = step(&net, &redexes[0]).unwrap();
        assert_eq!(after, parse_net(q).unwrap());
    }

    #[test]
    fn trace_format() {
        let net = parse_net("(; <w:?a | cw>)").unwrap();
        let (_, trace) = normalize(&net, 10, &lm()).unwrap();
        assert_eq!(trace.len(), 1);
        let line = trace[0].to_string();
        assert!(line.starts_with("#1 weak-coweak @e0.c0"), "got {}", line);
        assert!(line.contains("<w:?a|cw>"), "got {}", line);
    }

    #[test]
    fn random_strategy_is_reproducible() {
        let text = "(; <c(w:?a, w:?a) | cc(cw, cw)>)";
        let net = parse_net(text).unwrap();
        let strategy = Strategy {
            kind: StrategyKind::Random { seed: 7 },
            reduce_inside_boxes: false,
        };
        let (a, ta) = normalize(&net, 100, &strategy).unwrap();
        let (b, tb) = normalize(&net, 100, &strategy).unwrap();
        assert_eq!(a.net(), b.net());
        assert_eq!(
            ta.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            tb.iter().map(|t| t.to_string()).collect::<Vec<_>>()
        );
    }
}
