//! Derived forms: booleans, conditionals, the graded monad and sealing.

use crate::algebra::Grade;

use super::{case, fresh_name, inj1, inj2, let_pair, let_unit, pair, product, sum, Term, WILDCARD};

/// A derived form whose subterms are already core terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sugar {
    /// `T_m A = {}^m A × Unit`.
    Monad(Grade, Term),
    /// `eta_l a = (a^l, unit)`.
    Eta(Grade, Term),
    /// `seal_l a`, an alias of `eta_l a`.
    Seal(Grade, Term),
    /// `unseal_l a = let (x^l, _) = a in x`, eliminated at `one`.
    Unseal(Grade, Grade, Term),
    Bool,
    True,
    False,
    /// `if c then a else b`, a case at `one` whose branches consume the unit payload.
    If(Grade, Term, Term, Term),
}

pub fn desugar(s: Sugar) -> Term {
    match s {
        Sugar::Monad(m, a) => product(m, a, Term::UnitType),
        Sugar::Eta(l, a) | Sugar::Seal(l, a) => pair(a, l, Term::Unit),
        Sugar::Unseal(one, l, a) => let_pair(one, "x", l, WILDCARD, a, Term::Var("x".into())),
        Sugar::Bool => sum(Term::UnitType, Term::UnitType),
        Sugar::True => inj1(Term::Unit),
        Sugar::False => inj2(Term::Unit),
        Sugar::If(one, c, a, b) => {
            let (fa, fb) = (a.free_vars(), b.free_vars());
            let u = fresh_name("u", |n| fa.contains(n) || fb.contains(n));
            let v = Term::Var(u.clone());
            let a = let_unit(one.clone(), v.clone(), a);
            let b = let_unit(one.clone(), v, b);
            case(one, c, &u, a, &u, b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;

    #[test]
    fn monad_of_bool() {
        let alg = Algebra::builtin_lattice("lh").unwrap();
        let h = alg.parse_grade("H").unwrap();
        let t = desugar(Sugar::Monad(h.clone(), desugar(Sugar::Bool)));
        assert_eq!(t, product(h, sum(Term::UnitType, Term::UnitType), Term::UnitType));
    }

    #[test]
    fn eta_and_true() {
        let l = Grade::nat(1);
        assert_eq!(desugar(Sugar::Eta(l.clone(), Term::Unit)), pair(Term::Unit, l, Term::Unit));
        assert_eq!(desugar(Sugar::True), inj1(Term::Unit));
    }
}
