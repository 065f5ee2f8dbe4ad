//! Decomposition of constraints over function types into base constraints.

use crate::lang::*;

/// Split `c` into constraints over base types. Subtypings whose right-hand
/// side is the precise refinement `true` hold trivially and are dropped.
pub fn split(c: &Constraint) -> Vec<Constraint> {
    let mut out = Vec::new();
    go(c.span, &c.kind, &mut out);
    out
}

fn go(span: Span, kind: &ConstraintKind, out: &mut Vec<Constraint>) {
    let push = |kind: ConstraintKind, out: &mut Vec<Constraint>| {
        out.push(Constraint { id: ConstraintId(0), span, kind });
    };
    match kind {
        ConstraintKind::Sub { env, lhs, rhs } => match (lhs, rhs) {
            (RType::Base { .. }, RType::Base { refinement, .. }) => {
                if !(refinement.is_precise() && refinement.pred.is_true()) {
                    push(kind.clone(), out);
                }
            }
            (RType::Fun { param: x1, arg: a1, ret: r1 }, RType::Fun { param: x2, arg: a2, ret: r2 }) => {
                go(span, &ConstraintKind::Sub { env: env.clone(), lhs: (**a2).clone(), rhs: (**a1).clone() }, out);
                let (env2, r1) = if a2.sort().is_some() {
                    (env.extended(x2.clone(), (**a2).clone()), r1.subst1(x1, Pred::Var(x2.clone())))
                } else {
                    (env.clone(), (**r1).clone())
                };
                go(span, &ConstraintKind::Sub { env: env2, lhs: r1, rhs: (**r2).clone() }, out);
            }
            _ => panic!("subtyping between different shapes after shape inference"),
        },
        ConstraintKind::Wf { env, ty } => match ty {
            RType::Base { .. } => push(kind.clone(), out),
            RType::Fun { param, arg, ret } => {
                go(span, &ConstraintKind::Wf { env: env.clone(), ty: (**arg).clone() }, out);
                let env2 =
                    if arg.sort().is_some() { env.extended(param.clone(), (**arg).clone()) } else { env.clone() };
                go(span, &ConstraintKind::Wf { env: env2, ty: (**ret).clone() }, out);
            }
        },
    }
}
