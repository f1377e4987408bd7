//! Capture-avoiding substitution and binder freshening.

use std::collections::BTreeSet;

use super::{GradedContext, Name, Term, WILDCARD};

/// A name derived from `base` for which `taken` is false.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
    let stem = if stem.is_empty() || stem == WILDCARD { "v" } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !taken(n))
        .expect("unbounded name supply")
}

/// `body{c/x}`.
pub fn subst(body: &Term, x: &str, c: &Term) -> Term {
    let fvc = c.free_vars();
    go(body, x, c, &fvc)
}

/// Renames the free occurrences of `old` to `new`.
pub fn rename_free(body: &Term, old: &str, new: &str) -> Term {
    subst(body, old, &Term::Var(new.to_string()))
}

/// Folds the definitions of `defs` into `a`, last definition first.
pub fn multi_subst(a: &Term, defs: &GradedContext) -> Term {
    defs.entries()
        .iter()
        .rev()
        .fold(a.clone(), |acc, e| match &e.def {
            Some(d) => subst(&acc, &e.name, d),
            None => acc,
        })
}

fn bx(t: Term) -> Box<Term> {
    Box::new(t)
}

/// Substitutes under binders `xs`, renaming any binder that would capture.
fn under(xs: &[&Name], body: &Term, x: &str, c: &Term, fvc: &BTreeSet<Name>) -> (Vec<Name>, Term) {
    let names: Vec<Name> = xs.iter().map(|n| n.to_string()).collect();
    if xs.iter().any(|b| b.as_str() == x) || !body.occurs_free(x) {
        return (names, body.clone());
    }
    let mut body = body.clone();
    let mut out = Vec::with_capacity(names.len());
    let mut taken: BTreeSet<Name> = body.all_names();
    taken.extend(fvc.iter().cloned());
    taken.insert(x.to_string());
    taken.extend(names.iter().cloned());
    for b in names {
        if fvc.contains(&b) {
            let nb = fresh_name(&b, |n| taken.contains(n));
            taken.insert(nb.clone());
            body = rename_free(&body, &b, &nb);
            out.push(nb);
        } else {
            out.push(b);
        }
    }
    (out, go(&body, x, c, fvc))
}

fn go(t: &Term, x: &str, c: &Term, fvc: &BTreeSet<Name>) -> Term {
    use Term::*;
    match t {
        Var(y) => {
            if y == x {
                c.clone()
            } else {
                t.clone()
            }
        }
        Unit | Sort(_) | UnitType | IntLit(_) | IntType => t.clone(),
        Lam(r, y, dom, body) => {
            let dom = dom.as_ref().map(|d| bx(go(d, x, c, fvc)));
            let (ys, body) = under(&[y], body, x, c, fvc);
            Lam(r.clone(), ys[0].clone(), dom, bx(body))
        }
        App(f, a, r) => App(bx(go(f, x, c, fvc)), bx(go(a, x, c, fvc)), r.clone()),
        LetUnit(q, s, b) => LetUnit(q.clone(), bx(go(s, x, c, fvc)), bx(go(b, x, c, fvc))),
        Pair(a, r, b) => Pair(bx(go(a, x, c, fvc)), r.clone(), bx(go(b, x, c, fvc))),
        LetPair(q, y1, r, y2, s, b) => {
            let s = go(s, x, c, fvc);
            let (ys, b) = under(&[y1, y2], b, x, c, fvc);
            LetPair(q.clone(), ys[0].clone(), r.clone(), ys[1].clone(), bx(s), bx(b))
        }
        Inj1(a) => Inj1(bx(go(a, x, c, fvc))),
        Inj2(a) => Inj2(bx(go(a, x, c, fvc))),
        Case(q, s, y1, b1, y2, b2) => {
            let s = go(s, x, c, fvc);
            let (n1, b1) = under(&[y1], b1, x, c, fvc);
            let (n2, b2) = under(&[y2], b2, x, c, fvc);
            Case(q.clone(), bx(s), n1[0].clone(), bx(b1), n2[0].clone(), bx(b2))
        }
        Pi(y, r, a, b) => {
            let a = go(a, x, c, fvc);
            let (ys, b) = under(&[y], b, x, c, fvc);
            Pi(ys[0].clone(), r.clone(), bx(a), bx(b))
        }
        Sigma(y, r, a, b) => {
            let a = go(a, x, c, fvc);
            let (ys, b) = under(&[y], b, x, c, fvc);
            Sigma(ys[0].clone(), r.clone(), bx(a), bx(b))
        }
        Sum(a, b) => Sum(bx(go(a, x, c, fvc)), bx(go(b, x, c, fvc))),
        IntAdd(a, b) => IntAdd(bx(go(a, x, c, fvc)), bx(go(b, x, c, fvc))),
    }
}

/// Renames every binder that shadows a name already in scope, so binders
/// are unique along each path from the root.
pub fn freshen(t: &Term) -> Term {
    let mut taken = t.all_names();
    let mut scope: Vec<Name> = t.free_vars().into_iter().collect();
    fr(t, &mut scope, &mut taken)
}

fn fr(t: &Term, scope: &mut Vec<Name>, taken: &mut BTreeSet<Name>) -> Term {
    use Term::*;
    let bind = |xs: &[&Name], body: &Term, scope: &mut Vec<Name>, taken: &mut BTreeSet<Name>| {
        let mut body = body.clone();
        let mut out = Vec::new();
        for (i, b) in xs.iter().enumerate() {
            let clash = b.as_str() != WILDCARD
                && (scope.contains(b) || xs[..i].contains(b));
            if clash {
                let nb = fresh_name(b, |n| taken.contains(n));
                taken.insert(nb.clone());
                body = rename_free(&body, b, &nb);
                out.push(nb);
            } else {
                out.push(b.to_string());
            }
        }
        let n = scope.len();
        scope.extend(out.iter().cloned());
        let body = fr(&body, scope, taken);
        scope.truncate(n);
        (out, body)
    };
    match t {
        Var(_) | Unit | Sort(_) | UnitType | IntLit(_) | IntType => t.clone(),
        Lam(r, y, dom, body) => {
            let dom = dom.as_ref().map(|d| bx(fr(d, scope, taken)));
            let (ys, body) = bind(&[y], body, scope, taken);
            Lam(r.clone(), ys[0].clone(), dom, bx(body))
        }
        App(f, a, r) => App(bx(fr(f, scope, taken)), bx(fr(a, scope, taken)), r.clone()),
        LetUnit(q, s, b) => LetUnit(q.clone(), bx(fr(s, scope, taken)), bx(fr(b, scope, taken))),
        Pair(a, r, b) => Pair(bx(fr(a, scope, taken)), r.clone(), bx(fr(b, scope, taken))),
        LetPair(q, y1, r, y2, s, b) => {
            let s = fr(s, scope, taken);
            let (ys, b) = bind(&[y1, y2], b, scope, taken);
            LetPair(q.clone(), ys[0].clone(), r.clone(), ys[1].clone(), bx(s), bx(b))
        }
        Inj1(a) => Inj1(bx(fr(a, scope, taken))),
        Inj2(a) => Inj2(bx(fr(a, scope, taken))),
        Case(q, s, y1, b1, y2, b2) => {
            let s = fr(s, scope, taken);
            let (n1, b1) = bind(&[y1], b1, scope, taken);
            let (n2, b2) = bind(&[y2], b2, scope, taken);
            Case(q.clone(), bx(s), n1[0].clone(), bx(b1), n2[0].clone(), bx(b2))
        }
        Pi(y, r, a, b) => {
            let a = fr(a, scope, taken);
            let (ys, b) = bind(&[y], b, scope, taken);
            Pi(ys[0].clone(), r.clone(), bx(a), bx(b))
        }
        Sigma(y, r, a, b) => {
            let a = fr(a, scope, taken);
            let (ys, b) = bind(&[y], b, scope, taken);
            Sigma(ys[0].clone(), r.clone(), bx(a), bx(b))
        }
        Sum(a, b) => Sum(bx(fr(a, scope, taken)), bx(fr(b, scope, taken))),
        IntAdd(a, b) => IntAdd(bx(fr(a, scope, taken)), bx(fr(b, scope, taken))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Grade;
    use crate::syntax::*;

    fn one() -> Grade {
        Grade::nat(1)
    }

    #[test]
    fn variable_case() {
        assert_eq!(subst(&var("x"), "x", &var("y")), var("y"));
        assert_eq!(subst(&var("z"), "x", &var("y")), var("z"));
    }

    #[test]
    fn avoids_capture() {
        let body = lam(one(), "y", Some(var("A")), var("x"));
        let out = subst(&body, "x", &var("y"));
        match &out {
            Term::Lam(_, b, _, inner) => {
                assert_ne!(b, "y");
                assert_eq!(**inner, var("y"));
            }
            _ => panic!("expected a lambda"),
        }
        assert!(out.alpha_eq(&lam(one(), "y1", Some(var("A")), var("y"))));
    }

    #[test]
    fn bound_occurrences_untouched() {
        let body = lam(one(), "x", None, var("x"));
        assert_eq!(subst(&body, "x", &Term::Unit), body);
    }

    #[test]
    fn multi_subst_folds_in_reverse() {
        assert_eq!(multi_subst(&var("a"), &GradedContext::new()), var("a"));
        let ctx = GradedContext::new()
            .define("x", Term::Unit, Grade::nat(0), Term::UnitType)
            .unwrap()
            .define("y", pair(var("x"), one(), Term::Unit), one(), Term::UnitType)
            .unwrap();
        assert_eq!(multi_subst(&var("y"), &ctx), pair(Term::Unit, one(), Term::Unit));
        assert_eq!(multi_subst(&var("x"), &ctx), Term::Unit);
    }

    #[test]
    fn freshen_renames_shadowing() {
        let t = lam(one(), "x", None, lam(one(), "x", None, var("x")));
        let f = freshen(&t);
        assert!(f.alpha_eq(&t));
        match f {
            Term::Lam(_, a, _, inner) => match *inner {
                Term::Lam(_, b, _, _) => assert_ne!(a, b),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        }
    }

    #[test]
    fn fresh_names_strip_suffix() {
        assert_eq!(fresh_name("y3", |n| n == "y1"), "y2");
        assert_eq!(fresh_name("_", |_| false), "v1");
    }
}
