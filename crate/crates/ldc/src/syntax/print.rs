//! Printer producing text the parser reads back to an alpha-equal term.

use crate::algebra::Grade;

use super::{GradedContext, Term, WILDCARD};

const EXPR: u8 = 0;
const ARROW: u8 = 1;
const PROD: u8 = 2;
const SUM: u8 = 3;
const APP: u8 = 4;
const PREFIX: u8 = 5;
const ATOM: u8 = 6;

pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    Printer { out: &mut out }.term(t, EXPR, false);
    out
}

pub fn print_type(t: &Term) -> String {
    let mut out = String::new();
    Printer { out: &mut out }.term(t, EXPR, true);
    out
}

pub fn print_context(ctx: &GradedContext) -> String {
    ctx.entries()
        .iter()
        .map(|e| match &e.def {
            Some(d) => format!("{} = {} :^{} {}", e.name, print_term(d), e.grade, print_type(&e.ty)),
            None => format!("{} :^{} {}", e.name, e.grade, print_type(&e.ty)),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn level(t: &Term, type_mode: bool) -> u8 {
    use Term::*;
    match t {
        Lam(..) | LetUnit(..) | LetPair(..) | Case(..) => EXPR,
        Pi(x, ..) | Sigma(x, ..) if x != WILDCARD => EXPR,
        Pi(..) | Sigma(..) | Sum(..) if !type_mode => ATOM,
        IntAdd(..) if type_mode => ATOM,
        Pi(..) => ARROW,
        Sigma(..) => PROD,
        Sum(..) | IntAdd(..) => SUM,
        App(..) => APP,
        Inj1(_) | Inj2(_) => PREFIX,
        Var(_) | Unit | Pair(..) | Sort(_) | UnitType | IntLit(_) | IntType => ATOM,
    }
}

struct Printer<'a> {
    out: &'a mut String,
}

impl Printer<'_> {
    fn s(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn g(&mut self, g: &Grade) {
        self.out.push_str(&g.to_string());
    }

    fn term(&mut self, t: &Term, min: u8, ty: bool) {
        use Term::*;
        // Type formers in term positions and additions in type positions need a mode switch.
        match t {
            Pi(x, ..) | Sigma(x, ..) if !ty && x == WILDCARD => return self.braced(t, "{", "}", true),
            Sum(..) if !ty => return self.braced(t, "{", "}", true),
            IntAdd(..) if ty => return self.braced(t, "[", "]", false),
            _ => {}
        }
        if level(t, ty) < min {
            self.s("(");
            self.term(t, EXPR, ty);
            self.s(")");
            return;
        }
        match t {
            Var(x) => self.s(x),
            Unit => self.s("unit"),
            UnitType => self.s("Unit"),
            IntType => self.s("Int"),
            IntLit(n) => self.s(&n.to_string()),
            Sort(s) => self.s(s),
            Lam(r, x, dom, body) => {
                self.s("\\^");
                self.g(r);
                self.s(" ");
                self.s(x);
                if let Some(d) = dom {
                    self.s(":");
                    self.term(d, EXPR, true);
                }
                self.s(". ");
                self.term(body, EXPR, ty);
            }
            App(f, a, r) => {
                self.term(f, APP, ty);
                self.s(" ");
                self.term(a, ATOM, ty);
                self.s(" ^");
                self.g(r);
            }
            LetUnit(q, s, b) => {
                self.s("let_");
                self.g(q);
                self.s(" unit = ");
                self.term(s, EXPR, ty);
                self.s(" in ");
                self.term(b, EXPR, ty);
            }
            Pair(a, r, b) => {
                self.s("(");
                self.term(a, ARROW, ty);
                self.s("^");
                self.g(r);
                self.s(", ");
                self.term(b, EXPR, ty);
                self.s(")");
            }
            LetPair(q, x, r, y, s, b) => {
                self.s("let_");
                self.g(q);
                self.s(&format!(" ({x}^{r}, {y}) = "));
                self.term(s, EXPR, ty);
                self.s(" in ");
                self.term(b, EXPR, ty);
            }
            Inj1(a) | Inj2(a) => {
                self.s(if matches!(t, Inj1(_)) { "inj1 " } else { "inj2 " });
                self.term(a, PREFIX, ty);
            }
            Case(q, s, x1, b1, x2, b2) => {
                self.s("case_");
                self.g(q);
                self.s(" ");
                self.term(s, EXPR, ty);
                self.s(&format!(" of {x1}. "));
                self.term(b1, EXPR, ty);
                self.s(&format!("; {x2}. "));
                self.term(b2, EXPR, ty);
            }
            Pi(x, r, a, b) | Sigma(x, r, a, b) if x != WILDCARD => {
                self.s(if matches!(t, Pi(..)) { "Pi " } else { "Sigma " });
                self.s(&format!("{x}:^{r} "));
                self.term(a, EXPR, true);
                self.s(". ");
                self.term(b, EXPR, true);
            }
            Pi(_, r, a, b) => {
                self.s("{}^");
                self.g(r);
                self.s(" ");
                self.term(a, SUM, true);
                self.s(" -> ");
                self.term(b, EXPR, true);
            }
            Sigma(_, r, a, b) => {
                self.s("{}^");
                self.g(r);
                self.s(" ");
                self.term(a, SUM, true);
                self.s(" & ");
                self.term(b, PROD, true);
            }
            Sum(a, b) | IntAdd(a, b) => {
                self.term(a, SUM, ty);
                self.s(" + ");
                self.term(b, APP, ty);
            }
        }
    }

    fn braced(&mut self, t: &Term, open: &str, close: &str, ty: bool) {
        self.s(open);
        self.term(t, EXPR, ty);
        self.s(close);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::syntax::parse_term;

    fn roundtrip(src: &str, alg: &Algebra) {
        let t = parse_term(src, alg).unwrap();
        let printed = print_term(&t);
        let again = parse_term(&printed, alg).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert!(t.alpha_eq(&again), "{src} printed as {printed}");
    }

    #[test]
    fn roundtrips() {
        let alg = Algebra::NatExactOmega;
        for src in [
            "\\^1 x:A. x",
            "let_1 (x^w, y) = t in x",
            "(f x ^2 ^3, b)",
            "\\x:{}^2 A -> {}^0 B & C. case x of a. inj1 a; b. inj2 (f b ^1)",
            "x + y + 3",
            "{Unit + Int}",
            "\\x:Pi a:^0 *. [a + 1]. x",
            "((\\x. x)^2, \\y. y)",
            "let_0 unit = u in if true then 1 else 2",
            "f (g a ^1) ^2 (\\z. z) ^0",
        ] {
            roundtrip(src, &alg);
        }
    }

    #[test]
    fn prints_explicit_grades() {
        let t = parse_term("\\x. (x, x)", &Algebra::NatExact).unwrap();
        assert_eq!(print_term(&t), "\\^1 x. (x^1, x)");
    }

    #[test]
    fn lattice_grades_in_keywords() {
        let alg = Algebra::from_selector("product(lin3,lattice:lmh)").unwrap();
        roundtrip("let_(1,L) (x^(w,H), y) = p in case_(0,M) x of a. a; b. y", &alg);
    }
}
