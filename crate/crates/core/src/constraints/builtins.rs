//! Refinement types of the built-in constants.

use crate::lang::{ArithOp, Pred, Prim, RType, Rel, Sort};

fn x() -> Pred {
    Pred::var("$x")
}

fn y() -> Pred {
    Pred::var("$y")
}

fn int() -> RType {
    RType::trivial(Sort::Int)
}

fn boolean() -> RType {
    RType::trivial(Sort::Bool)
}

fn binary(arg: RType, ret: RType) -> RType {
    RType::fun("$x", arg.clone(), RType::fun("$y", arg, ret))
}

/// The type of a primitive. Parameter names start with `$`, which surface
/// programs cannot spell, so substitution never captures user variables.
pub fn prim_type(p: Prim) -> RType {
    let arith = |op| binary(int(), RType::base(Sort::Int, Pred::rel(Rel::Eq, Pred::nu(), Pred::arith(op, x(), y()))));
    let cmp = |r| binary(int(), RType::base(Sort::Bool, Pred::iff(Pred::nu(), Pred::rel(r, x(), y()))));
    match p {
        Prim::Add => arith(ArithOp::Add),
        Prim::Sub => arith(ArithOp::Sub),
        Prim::Mul => arith(ArithOp::Mul),
        Prim::Div => RType::fun(
            "$x",
            int(),
            RType::fun("$y", RType::base(Sort::Int, Pred::rel(Rel::Lt, Pred::Int(0), Pred::nu())), int()),
        ),
        Prim::Eq => cmp(Rel::Eq),
        Prim::Ne => cmp(Rel::Ne),
        Prim::Lt => cmp(Rel::Lt),
        Prim::Le => cmp(Rel::Le),
        Prim::Gt => cmp(Rel::Gt),
        Prim::Ge => cmp(Rel::Ge),
        Prim::And => binary(boolean(), RType::base(Sort::Bool, Pred::iff(Pred::nu(), Pred::and([x(), y()])))),
        Prim::Or => binary(boolean(), RType::base(Sort::Bool, Pred::iff(Pred::nu(), Pred::or([x(), y()])))),
        Prim::Not => RType::fun("$x", boolean(), RType::base(Sort::Bool, Pred::iff(Pred::nu(), Pred::not(x())))),
        Prim::Nil => RType::base(Sort::List, Pred::rel(Rel::Eq, Pred::len(Pred::nu()), Pred::Int(0))),
        Prim::Cons => RType::fun(
            "$x",
            int(),
            RType::fun(
                "$y",
                RType::trivial(Sort::List),
                RType::base(
                    Sort::List,
                    Pred::rel(Rel::Eq, Pred::len(Pred::nu()), Pred::arith(ArithOp::Add, Pred::Int(1), Pred::len(y()))),
                ),
            ),
        ),
        Prim::Length => RType::fun(
            "$x",
            RType::trivial(Sort::List),
            RType::base(Sort::Int, Pred::rel(Rel::Eq, Pred::nu(), Pred::len(x()))),
        ),
    }
}
