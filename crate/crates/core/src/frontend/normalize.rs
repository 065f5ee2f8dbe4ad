//! Name resolution, alpha-renaming, ANF conversion and dependency ordering.

use std::collections::{HashMap, HashSet};

use crate::diagnostics::{Diagnostic, Diagnostics};
use crate::lang::*;
use crate::templates::{Origin, Template};

use super::parser::HOLE_MARK;
use super::program::*;
use super::surface::*;

/// Prefix of names introduced for intermediate values.
pub const TEMP_PREFIX: &str = "_t";

const RESERVED: &[&str] = &["cons", "length", "not", "len", "Int", "Bool", "List"];

pub fn is_temp(x: &Name) -> bool {
    x.as_str().starts_with(TEMP_PREFIX)
}

/// Scope entry for refinements: surface name, core name, sort if known.
#[derive(Clone, Debug)]
struct Var {
    surface: String,
    core: Name,
    sort: Option<Sort>,
}

struct Bind {
    name: Name,
    expr: Expr,
    span: Span,
}

pub struct Normalizer {
    globals: HashSet<String>,
    measures: Vec<Measure>,
    used: HashSet<Name>,
    next_expr: u32,
    sources: Vec<SourceInfo>,
    spec_refinements: Vec<SpecRefinement>,
    diags: Vec<Diagnostic>,
}

type R<T> = Result<T, Diagnostic>;

impl Normalizer {
    fn new(globals: HashSet<String>, measures: Vec<Measure>) -> Self {
        Normalizer {
            globals,
            measures,
            used: HashSet::new(),
            next_expr: 0,
            sources: Vec::new(),
            spec_refinements: Vec::new(),
            diags: Vec::new(),
        }
    }

    fn reset_names(&mut self) {
        self.used = self.globals.iter().map(Name::new).collect();
    }

    /// `base` if unused in the current definition, otherwise `base_k`.
    fn fresh(&mut self, base: &str) -> Name {
        let mut cand = Name::new(base);
        let mut k = 1;
        while self.used.contains(&cand) {
            cand = Name::new(format!("{base}_{k}"));
            k += 1;
        }
        self.used.insert(cand.clone());
        cand
    }

    fn temp(&mut self) -> Name {
        let mut k = 1;
        loop {
            let cand = Name::new(format!("{TEMP_PREFIX}{k}"));
            if !self.used.contains(&cand) {
                self.used.insert(cand.clone());
                return cand;
            }
            k += 1;
        }
    }

    fn mk(&mut self, span: Span, kind: ExprKind) -> Expr {
        let id = self.next_expr;
        self.next_expr += 1;
        Expr { id, span, kind }
    }

    // ---- refinements and types ------------------------------------------

    fn resolve_pred(&self, p: &Pred, nu_names: &[String], scope: &[Var], span: Span) -> R<Pred> {
        let mut sigma = Subst::new();
        for x in p.free_vars() {
            let s = x.as_str();
            if x.is_nu() || nu_names.iter().any(|n| n == s) {
                sigma.insert(x.clone(), Pred::nu());
            } else if s == HOLE_MARK {
                return Err(Diagnostic::error(span, "`?` may only appear as a top-level conjunct"));
            } else if let Some(v) = scope.iter().rev().find(|v| v.surface == s) {
                if v.core != x {
                    sigma.insert(x.clone(), Pred::Var(v.core.clone()));
                }
            } else {
                return Err(Diagnostic::error(span, format!("unknown variable `{s}` in refinement")));
            }
        }
        let mut bad = None;
        p.visit(&mut |q| {
            if let Pred::App(m, _) = q {
                if m.name.as_str() != "len" && !self.measures.iter().any(|k| k.name == m.name) {
                    bad = Some(m.name.clone());
                }
            }
        });
        if let Some(m) = bad {
            return Err(Diagnostic::error(span, format!("unknown measure `{m}`")));
        }
        Ok(p.subst(&sigma))
    }

    /// Convert a surface type. `overrides` renames the leading parameters
    /// (used to align a `sig` with its `def`); `display` names the refinement
    /// binder of a base type. `spec` records refinements for template
    /// abstraction; `local` marks holes whose scope is completed later.
    #[allow(clippy::too_many_arguments)]
    fn convert_type(
        &mut self,
        t: &SType,
        scope: &mut Vec<Var>,
        overrides: &[Name],
        nu_names: &[String],
        display: Option<&str>,
        owner: &str,
        spec: bool,
        local: bool,
    ) -> R<RType> {
        match t {
            SType::Base { binder, sort, refinement, .. } => {
                let Some(r) = refinement else {
                    return Ok(RType::trivial(*sort));
                };
                let mut names: Vec<String> = binder.iter().cloned().collect();
                if binder.is_none() {
                    names.extend(nu_names.iter().cloned());
                }
                names.push("v".to_string());
                let pred = self.resolve_pred(&r.pred, &names, scope, r.span)?;
                if spec {
                    let sorts = scope.iter().filter_map(|v| v.sort.map(|s| (v.core.clone(), s))).collect();
                    self.spec_refinements.push(SpecRefinement { pred: pred.clone(), binder: *sort, sorts });
                }
                let refinement = match r.hole {
                    None => Refinement::precise(pred),
                    Some(hole_span) => {
                        let id = SourceId(self.sources.len() as u32);
                        let shown =
                            display.map(str::to_string).or_else(|| binder.clone()).unwrap_or_else(|| "v".into());
                        let mut seen = HashSet::new();
                        let mut scope_sorts: Vec<(Name, Sort)> = Vec::new();
                        for v in scope.iter() {
                            if let Some(s) = v.sort {
                                if seen.insert(v.core.clone()) {
                                    scope_sorts.push((v.core.clone(), s));
                                }
                            }
                        }
                        self.sources.push(SourceInfo {
                            id,
                            span: hole_span,
                            binder: shown,
                            sort: *sort,
                            static_part: pred.clone(),
                            scope: scope_sorts,
                            local,
                            owner: owner.to_string(),
                        });
                        Refinement::gradual(pred, id)
                    }
                };
                Ok(RType::Base { sort: *sort, refinement })
            }
            SType::Fun { param, arg, ret } => {
                let surface = SType::param_name(param, arg);
                let named = overrides.first().cloned().or_else(|| surface.as_deref().map(Name::new));
                let core = named.clone().unwrap_or_else(|| Name::new(format!("_a{}", scope.len())));
                let nu: Vec<String> = surface.iter().cloned().collect();
                let arg_t =
                    self.convert_type(arg, scope, &[], &nu, named.as_ref().map(Name::as_str), owner, spec, local)?;
                let mut pushed = 0;
                if named.is_some() {
                    // Both the sig spelling and the def's parameter name resolve.
                    for s in surface.iter().map(String::as_str).chain([core.as_str()]) {
                        scope.push(Var { surface: s.to_string(), core: core.clone(), sort: arg_t.sort() });
                        pushed += 1;
                    }
                }
                let rest = overrides.get(1..).unwrap_or(&[]);
                let ret_t = self.convert_type(ret, scope, rest, &[], None, owner, spec, local);
                scope.truncate(scope.len() - pushed);
                Ok(RType::fun(core, arg_t, ret_t?))
            }
        }
    }

    // ---- expressions ----------------------------------------------------

    fn lookup(&self, x: &str, scope: &[Var]) -> Option<Name> {
        scope
            .iter()
            .rev()
            .find(|v| v.surface == x)
            .map(|v| v.core.clone())
            .or_else(|| self.globals.contains(x).then(|| Name::new(x)))
    }

    fn wrap(&mut self, binds: Vec<Bind>, body: Expr) -> Expr {
        binds.into_iter().rev().fold(body, |acc, b| {
            let span = b.span.join(acc.span);
            self.mk(span, ExprKind::Let { name: b.name, ann: None, bound: Box::new(b.expr), body: Box::new(acc) })
        })
    }

    /// Move leading temporary lets of `e` into `binds`.
    fn hoist(e: Expr, binds: &mut Vec<Bind>) -> Expr {
        let mut e = e;
        loop {
            match e.kind {
                ExprKind::Let { name, ann: None, bound, body } if is_temp(&name) => {
                    binds.push(Bind { name, expr: *bound, span: e.span });
                    e = *body;
                }
                kind => return Expr { kind, ..e },
            }
        }
    }

    fn atom(&mut self, e: &SExpr, scope: &mut Vec<Var>, binds: &mut Vec<Bind>) -> R<Atom> {
        if let SExprKind::Var(x) = &e.kind {
            let name = self.lookup(x, scope).ok_or_else(|| unknown_var(x, e.span))?;
            return Ok(Atom { name, span: e.span });
        }
        let ex = self.expr(e, scope)?;
        let ex = Self::hoist(ex, binds);
        let t = self.temp();
        binds.push(Bind { name: t.clone(), expr: ex, span: e.span });
        Ok(Atom { name: t, span: e.span })
    }

    fn expr(&mut self, e: &SExpr, scope: &mut Vec<Var>) -> R<Expr> {
        let span = e.span;
        match &e.kind {
            SExprKind::Int(n) => Ok(self.mk(span, ExprKind::Const(Const::Int(*n)))),
            SExprKind::Bool(b) => Ok(self.mk(span, ExprKind::Const(Const::Bool(*b)))),
            SExprKind::Prim(p) => Ok(self.mk(span, ExprKind::Const(Const::Prim(*p)))),
            SExprKind::Var(x) => {
                let name = self.lookup(x, scope).ok_or_else(|| unknown_var(x, span))?;
                Ok(self.mk(span, ExprKind::Var(name)))
            }
            SExprKind::List(elems) => {
                let mut binds = Vec::new();
                let mut acc = self.mk(span, ExprKind::Const(Const::Prim(Prim::Nil)));
                for el in elems.iter().rev() {
                    let tail = Self::hoist(acc, &mut binds);
                    let t = self.temp();
                    binds.push(Bind { name: t.clone(), expr: tail, span });
                    let a = self.atom(el, scope, &mut binds)?;
                    let cons = self.mk(span, ExprKind::Const(Const::Prim(Prim::Cons)));
                    let app1 = self.mk(span, ExprKind::App { func: Box::new(cons), arg: a });
                    acc = self.mk(span, ExprKind::App { func: Box::new(app1), arg: Atom { name: t, span } });
                }
                Ok(self.wrap(binds, acc))
            }
            SExprKind::App(..) => {
                let mut args = Vec::new();
                let mut head = e;
                while let SExprKind::App(f, a) = &head.kind {
                    args.push(&**a);
                    head = f;
                }
                args.reverse();
                let mut binds = Vec::new();
                let h = self.expr(head, scope)?;
                let mut acc = Self::hoist(h, &mut binds);
                for a in args {
                    let at = self.atom(a, scope, &mut binds)?;
                    let sp = acc.span.join(a.span);
                    acc = self.mk(sp, ExprKind::App { func: Box::new(acc), arg: at });
                }
                Ok(self.wrap(binds, acc))
            }
            SExprKind::Lam(x, _, ann, body) => {
                let param = self.fresh(x);
                let ann = match ann {
                    Some(t) => Some(self.convert_type(
                        t,
                        scope,
                        &[],
                        std::slice::from_ref(x),
                        Some(param.as_str()),
                        "lambda",
                        false,
                        true,
                    )?),
                    None => None,
                };
                scope.push(Var { surface: x.clone(), core: param.clone(), sort: None });
                let body = self.expr(body, scope);
                scope.pop();
                Ok(self.mk(span, ExprKind::Lam { param, ann, body: Box::new(body?) }))
            }
            SExprKind::If(c, t, f) => {
                let mut binds = Vec::new();
                let cond = self.atom(c, scope, &mut binds)?;
                let then_branch = self.expr(t, scope)?;
                let else_branch = self.expr(f, scope)?;
                let ite = self.mk(
                    span,
                    ExprKind::If { cond, then_branch: Box::new(then_branch), else_branch: Box::new(else_branch) },
                );
                Ok(self.wrap(binds, ite))
            }
            SExprKind::Let(x, _, ann, e1, e2) => {
                let mut binds = Vec::new();
                let bound = self.expr(e1, scope)?;
                let bound = Self::hoist(bound, &mut binds);
                let name = self.fresh(x);
                let ann = match ann {
                    Some(t) => Some(self.convert_type(
                        t,
                        scope,
                        &[],
                        std::slice::from_ref(x),
                        Some(name.as_str()),
                        "let",
                        false,
                        true,
                    )?),
                    None => None,
                };
                scope.push(Var { surface: x.clone(), core: name.clone(), sort: None });
                let body = self.expr(e2, scope);
                scope.pop();
                let l = self.mk(span, ExprKind::Let { name, ann, bound: Box::new(bound), body: Box::new(body?) });
                Ok(self.wrap(binds, l))
            }
            SExprKind::Match { scrut, nil, head, tail, cons } => {
                let mut binds = Vec::new();
                let s = self.atom(scrut, scope, &mut binds)?;
                let nil = self.expr(nil, scope)?;
                let h = self.fresh(&head.0);
                let t = self.fresh(&tail.0);
                scope.push(Var { surface: head.0.clone(), core: h.clone(), sort: None });
                scope.push(Var { surface: tail.0.clone(), core: t.clone(), sort: None });
                let cons = self.expr(cons, scope);
                scope.pop();
                scope.pop();
                let m = self.mk(
                    span,
                    ExprKind::Match { scrut: s, nil: Box::new(nil), head: h, tail: t, cons: Box::new(cons?) },
                );
                Ok(self.wrap(binds, m))
            }
        }
    }
}

fn unknown_var(x: &str, span: Span) -> Diagnostic {
    Diagnostic::error(span, format!("unknown variable `{x}`"))
}

/// A surface definition: name, parameters, body, span.
type DefParts<'a> = (&'a String, &'a Vec<(String, Span)>, &'a SExpr, Span);

/// Normalize a parsed program.
pub fn normalize(file: &str, text: &str, sp: &SourceProgram) -> Result<Program, Diagnostics> {
    let mut diags = Vec::new();
    let mut sigs: HashMap<String, (&SType, Span)> = HashMap::new();
    let mut assumes: Vec<(&String, &SType, Span)> = Vec::new();
    let mut defs: Vec<DefParts> = Vec::new();
    let mut measures = Vec::new();
    let mut templates = Vec::new();
    let mut names: HashMap<String, &'static str> = HashMap::new();

    let mut declare = |name: &str, kind: &'static str, span: Span, diags: &mut Vec<Diagnostic>| {
        if RESERVED.contains(&name) {
            diags.push(Diagnostic::error(span, format!("`{name}` is a reserved name")));
        } else if let Some(prev) = names.insert(name.to_string(), kind) {
            diags.push(Diagnostic::error(span, format!("duplicate definition of `{name}` (already a {prev})")));
        }
    };

    for item in &sp.items {
        match &item.kind {
            ItemKind::Sig { name, ty } => {
                if sigs.insert(name.clone(), (ty, item.name_span)).is_some() {
                    diags.push(Diagnostic::error(item.name_span, format!("duplicate `sig` for `{name}`")));
                }
            }
            ItemKind::Assume { name, ty } => {
                declare(name, "assume", item.name_span, &mut diags);
                assumes.push((name, ty, item.span));
            }
            ItemKind::Def { name, params, body } => {
                declare(name, "def", item.name_span, &mut diags);
                defs.push((name, params, body, item.span));
            }
            ItemKind::Measure { name } => {
                declare(name, "measure", item.name_span, &mut diags);
                measures.push(Measure { name: Name::new(name), arg: Sort::List, ret: Sort::Int });
            }
            ItemKind::Template { binder, slots, pred } => templates.push((binder, slots, pred, item.span)),
        }
    }
    for (name, (_, span)) in &sigs {
        if !defs.iter().any(|d| d.0 == name) {
            diags.push(Diagnostic::error(*span, format!("`sig` for `{name}` has no matching `def`")));
        }
    }

    let globals: HashSet<String> =
        assumes.iter().map(|a| a.0.clone()).chain(defs.iter().map(|d| d.0.clone())).collect();
    let mut nz = Normalizer::new(globals, measures.clone());

    let mut user_templates = Vec::new();
    for (binder, slots, pred, span) in templates {
        let mut sigma = Subst::new();
        sigma.insert(Name::new(&binder.0), Pred::nu());
        for (i, (x, _)) in slots.iter().enumerate() {
            sigma.insert(Name::new(x), Pred::Var(Template::slot(i)));
        }
        let known: HashSet<Name> = sigma.keys().cloned().collect();
        if let Some(x) = pred.free_vars().into_iter().find(|x| !known.contains(x)) {
            diags.push(Diagnostic::error(span, format!("template mentions undeclared variable `{x}`")));
            continue;
        }
        user_templates.push(Template {
            pred: pred.subst(&sigma),
            binder: binder.1,
            slots: slots.iter().map(|s| s.1).collect(),
            origin: Origin::User,
        });
    }

    let mut out_assumes = Vec::new();
    for (name, ty, span) in &assumes {
        nz.reset_names();
        match nz.convert_type(ty, &mut Vec::new(), &[], &[], None, name, true, false) {
            Ok(t) => out_assumes.push(Assume { name: Name::new(name.as_str()), span: *span, ty: t }),
            Err(d) => diags.push(d),
        }
    }

    let mut out_defs = Vec::new();
    for (name, params, body, span) in &defs {
        nz.reset_names();
        let cores: Vec<Name> = params.iter().map(|(p, _)| nz.fresh(p)).collect();
        let sig = match sigs.get(name.as_str()) {
            Some((st, ss)) => {
                if st.arity() < params.len() {
                    diags.push(Diagnostic::error(
                        *ss,
                        format!(
                            "`sig` for `{name}` has {} arguments but the definition has {}",
                            st.arity(),
                            params.len()
                        ),
                    ));
                    continue;
                }
                match nz.convert_type(st, &mut Vec::new(), &cores, &[], None, name, true, false) {
                    Ok(t) => Some(t),
                    Err(d) => {
                        diags.push(d);
                        continue;
                    }
                }
            }
            None => None,
        };
        let mut scope: Vec<Var> = params
            .iter()
            .zip(&cores)
            .map(|((p, _), c)| Var { surface: p.clone(), core: c.clone(), sort: None })
            .collect();
        let inner = match nz.expr(body, &mut scope) {
            Ok(e) => e,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        let mut e = inner;
        for ((_, psp), core) in params.iter().zip(&cores).rev() {
            let sp = psp.join(e.span);
            e = nz.mk(sp, ExprKind::Lam { param: core.clone(), ann: None, body: Box::new(e) });
        }
        out_defs.push(Def { name: Name::new(name.as_str()), span: *span, sig, body: e });
    }
    diags.append(&mut nz.diags);

    let ordered = match order_defs(out_defs) {
        Ok(d) => d,
        Err(d) => {
            diags.push(d);
            Vec::new()
        }
    };
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    Ok(Program {
        file: file.to_string(),
        text: text.to_string(),
        measures,
        user_templates,
        spec_refinements: nz.spec_refinements,
        assumes: out_assumes,
        defs: ordered,
        sources: nz.sources,
    })
}

/// Order definitions so that every definition without a `sig` is checked
/// before its users. Recursion through definitions without `sig` is an error.
fn order_defs(defs: Vec<Def>) -> Result<Vec<Def>, Diagnostic> {
    let unsigned: HashSet<Name> = defs.iter().filter(|d| d.sig.is_none()).map(|d| d.name.clone()).collect();
    let deps: Vec<Vec<Name>> =
        defs.iter().map(|d| d.body.free_vars().into_iter().filter(|x| unsigned.contains(x)).collect()).collect();
    let mut done: HashSet<Name> = HashSet::new();
    let mut out = Vec::new();
    let mut remaining: Vec<usize> = (0..defs.len()).collect();
    while !remaining.is_empty() {
        let ready = remaining.iter().position(|&i| deps[i].iter().all(|x| done.contains(x)));
        match ready {
            Some(pos) => {
                let i = remaining.remove(pos);
                done.insert(defs[i].name.clone());
                out.push(i);
            }
            None => {
                let i = remaining[0];
                return Err(Diagnostic::error(
                    defs[i].span,
                    format!("recursive definition `{}` needs a `sig`", defs[i].name),
                ));
            }
        }
    }
    let mut slots: Vec<Option<Def>> = defs.into_iter().map(Some).collect();
    Ok(out.into_iter().map(|i| slots[i].take().unwrap()).collect())
}

/// Check the ANF restrictions and binder uniqueness of a definition body.
pub fn is_anf(e: &Expr) -> bool {
    let bs = e.binders();
    let unique: HashSet<&Name> = bs.iter().collect();
    unique.len() == bs.len() && anf_shape(e)
}

fn anf_shape(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Const(_) | ExprKind::Var(_) => true,
        ExprKind::Lam { body, .. } => anf_shape(body),
        ExprKind::App { func, .. } => anf_shape(func),
        ExprKind::If { then_branch, else_branch, .. } => anf_shape(then_branch) && anf_shape(else_branch),
        ExprKind::Let { bound, body, .. } => anf_shape(bound) && anf_shape(body),
        ExprKind::Match { nil, cons, .. } => anf_shape(nil) && anf_shape(cons),
    }
}
