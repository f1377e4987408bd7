//! Executable check of the algebraic laws each algebra family claims.

use std::fmt;

use super::{Algebra, Family, Grade};

const MAX_WITNESSES: usize = 256;
const PRODUCT_COMPONENT_BOUND: u64 = 6;

/// A counterexample to a law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub args: Vec<Grade>,
    pub lhs: Option<Grade>,
    pub rhs: Option<Grade>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(Grade::to_string).collect();
        write!(f, "({})", args.join(", "))?;
        if let (Some(l), Some(r)) = (&self.lhs, &self.rhs) {
            write!(f, ": lhs = {l}, rhs = {r}")?;
        }
        Ok(())
    }
}

/// Outcome of one law.
#[derive(Clone, Debug)]
pub struct LawResult {
    pub law: &'static str,
    pub statement: &'static str,
    /// Whether the algebra's family claims this law.
    pub claimed: bool,
    pub witnesses: Vec<Witness>,
}

impl LawResult {
    pub fn holds(&self) -> bool {
        self.witnesses.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub algebra: String,
    pub carrier_size: usize,
    pub exhaustive: bool,
    pub laws: Vec<LawResult>,
}

impl VerifyReport {
    /// Claimed laws that failed.
    pub fn failures(&self) -> Vec<&LawResult> {
        self.laws.iter().filter(|l| l.claimed && !l.holds()).collect()
    }

    pub fn law(&self, name: &str) -> Option<&LawResult> {
        self.laws.iter().find(|l| l.law == name)
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "algebra {} ({} elements, {})",
            self.algebra,
            self.carrier_size,
            if self.exhaustive { "exhaustive" } else { "sampled" }
        )?;
        for l in &self.laws {
            let tag = match (l.claimed, l.holds()) {
                (true, true) => "PASS",
                (true, false) => "FAIL",
                (false, true) => "holds",
                (false, false) => "fails",
            };
            write!(f, "  {tag:<5} {:<28} {}", l.law, l.statement)?;
            if let Some(w) = l.witnesses.first() {
                write!(f, "  witness {w}")?;
                if l.witnesses.len() > 1 {
                    write!(f, " (+{} more)", l.witnesses.len() - 1)?;
                }
            }
            writeln!(f)?;
        }
        write!(f, "{}", if self.passed() { "all claimed laws hold" } else { "claimed laws violated" })
    }
}

struct Ctx<'a> {
    alg: &'a Algebra,
    laws: Vec<LawResult>,
}

impl Ctx<'_> {
    fn push(&mut self, law: &'static str, statement: &'static str, claimed: bool) -> usize {
        self.laws.push(LawResult { law, statement, claimed, witnesses: Vec::new() });
        self.laws.len() - 1
    }

    fn fail(&mut self, i: usize, args: &[&Grade], lhs: Option<Grade>, rhs: Option<Grade>) {
        let w = &mut self.laws[i].witnesses;
        if w.len() < MAX_WITNESSES {
            w.push(Witness { args: args.iter().map(|g| (*g).clone()).collect(), lhs, rhs });
        }
    }

    fn add(&self, a: &Grade, b: &Grade) -> Grade {
        self.alg.add(a, b).expect("sampled grades belong to the algebra")
    }
    fn mul(&self, a: &Grade, b: &Grade) -> Grade {
        self.alg.mul(a, b).expect("sampled grades belong to the algebra")
    }
    fn leq(&self, a: &Grade, b: &Grade) -> bool {
        self.alg.leq(a, b).expect("sampled grades belong to the algebra")
    }
}

/// Checks the laws of `alg` over its finite carrier, or over naturals up to
/// `sample_bound` (plus `ω`) for natural-based carriers.
pub fn verify_axioms(alg: &Algebra, sample_bound: u64) -> VerifyReport {
    let exhaustive = alg.carrier().is_some();
    let bound = if alg.family() == Family::Product { sample_bound.min(PRODUCT_COMPONENT_BOUND) } else { sample_bound };
    let xs = alg.sample(bound);
    let lattice = alg.family() == Family::Lattice;
    let mut c = Ctx { alg, laws: Vec::new() };
    let z = alg.zero();
    let o = alg.one();

    let add_comm = c.push("add-commutative", "a + b = b + a", true);
    let mul_ident = c.push("mul-identity", "1 · a = a = a · 1", true);
    let add_ident = c.push("add-identity", "0 + a = a", true);
    let annih = c.push("zero-annihilates", "0 · a = 0 = a · 0", true);
    let refl = c.push("preorder-reflexive", "a <: a", true);
    let meet_idem = c.push("idempotent", "a + a = a and a · a = a", lattice);
    let mul_comm = c.push("mul-commutative", "a · b = b · a", lattice);
    let absorb = c.push("absorption", "a + (a · b) = a = a · (a + b)", lattice);
    let order_meet = c.push("order-is-meet", "a <: b iff a + b = a", lattice);
    let antisym = c.push("antisymmetric", "a <: b and b <: a implies a = b", lattice);
    for a in &xs {
        if !c.leq(a, a) {
            c.fail(refl, &[a], None, None);
        }
        let (l, r) = (c.add(&z, a), a.clone());
        if l != r {
            c.fail(add_ident, &[a], Some(l), Some(r));
        }
        let (l1, l2) = (c.mul(&o, a), c.mul(a, &o));
        if l1 != *a || l2 != *a {
            c.fail(mul_ident, &[a], Some(l1), Some(l2));
        }
        let (l1, l2) = (c.mul(&z, a), c.mul(a, &z));
        if l1 != z || l2 != z {
            c.fail(annih, &[a], Some(l1), Some(l2));
        }
        let (m, j) = (c.add(a, a), c.mul(a, a));
        if m != *a || j != *a {
            c.fail(meet_idem, &[a], Some(m), Some(j));
        }
        for b in &xs {
            let (l, r) = (c.add(a, b), c.add(b, a));
            if l != r {
                c.fail(add_comm, &[a, b], Some(l), Some(r));
            }
            let (l, r) = (c.mul(a, b), c.mul(b, a));
            if l != r {
                c.fail(mul_comm, &[a, b], Some(l), Some(r));
            }
            let ab = c.mul(a, b);
            let l = c.add(a, &ab);
            let apb = c.add(a, b);
            let r = c.mul(a, &apb);
            if l != *a || r != *a {
                c.fail(absorb, &[a, b], Some(l), Some(r));
            }
            let le = c.leq(a, b);
            if le != (apb == *a) {
                c.fail(order_meet, &[a, b], None, None);
            }
            if le && c.leq(b, a) && a != b {
                c.fail(antisym, &[a, b], None, None);
            }
        }
    }

    let add_assoc = c.push("add-associative", "(a + b) + c = a + (b + c)", true);
    let mul_assoc = c.push("mul-associative", "(a · b) · c = a · (b · c)", true);
    let dist_l = c.push("distributive-left", "a · (b + c) = a · b + a · c", !lattice);
    let dist_r = c.push("distributive-right", "(a + b) · c = a · c + b · c", !lattice);
    let trans = c.push("preorder-transitive", "a <: b and b <: c implies a <: c", true);
    let mono_add = c.push("monotone-add", "a <: b implies c + a <: c + b", true);
    let mono_mul_l = c.push("monotone-mul-left", "a <: b implies c · a <: c · b", true);
    let mono_mul_r = c.push("monotone-mul-right", "a <: b implies a · c <: b · c", true);
    let dist_join = c.push("distributive-join-over-meet", "(a ⊓ b) ⊔ c = (a ⊔ c) ⊓ (b ⊔ c)", false);
    let dist_meet = c.push("distributive-meet-over-join", "(a ⊔ b) ⊓ c = (a ⊓ c) ⊔ (b ⊓ c)", false);
    for a in &xs {
        for b in &xs {
            let ab_add = c.add(a, b);
            let ab_mul = c.mul(a, b);
            let le_ab = c.leq(a, b);
            for d in &xs {
                let (l, r) = (c.add(&ab_add, d), {
                    let bd = c.add(b, d);
                    c.add(a, &bd)
                });
                if l != r {
                    c.fail(add_assoc, &[a, b, d], Some(l), Some(r));
                }
                let (l, r) = (c.mul(&ab_mul, d), {
                    let bd = c.mul(b, d);
                    c.mul(a, &bd)
                });
                if l != r {
                    c.fail(mul_assoc, &[a, b, d], Some(l), Some(r));
                }
                let bd_add = c.add(b, d);
                let l = c.mul(a, &bd_add);
                let r = {
                    let ad = c.mul(a, d);
                    c.add(&ab_mul, &ad)
                };
                if l != r {
                    c.fail(dist_l, &[a, b, d], Some(l), Some(r));
                }
                let l = c.mul(&ab_add, d);
                let r = {
                    let (ad, bd) = (c.mul(a, d), c.mul(b, d));
                    c.add(&ad, &bd)
                };
                if l != r {
                    c.fail(dist_r, &[a, b, d], Some(l), Some(r));
                }
                if le_ab && c.leq(b, d) && !c.leq(a, d) {
                    c.fail(trans, &[a, b, d], None, None);
                }
                if le_ab {
                    let (da, db) = (c.add(d, a), c.add(d, b));
                    if !c.leq(&da, &db) {
                        c.fail(mono_add, &[a, b, d], Some(da), Some(db));
                    }
                    let (da, db) = (c.mul(d, a), c.mul(d, b));
                    if !c.leq(&da, &db) {
                        c.fail(mono_mul_l, &[a, b, d], Some(da), Some(db));
                    }
                    let (ad, bd) = (c.mul(a, d), c.mul(b, d));
                    if !c.leq(&ad, &bd) {
                        c.fail(mono_mul_r, &[a, b, d], Some(ad), Some(bd));
                    }
                }
                if lattice {
                    // lhs is the side printed first in the law statement.
                    let l = c.mul(&ab_add, d);
                    let r = {
                        let (ad, bd) = (c.mul(a, d), c.mul(b, d));
                        c.add(&ad, &bd)
                    };
                    if l != r {
                        c.fail(dist_join, &[a, b, d], Some(l), Some(r));
                    }
                    let l = c.add(&ab_mul, d);
                    let r = {
                        let (ad, bd) = (c.add(a, d), c.add(b, d));
                        c.mul(&ad, &bd)
                    };
                    if l != r {
                        c.fail(dist_meet, &[a, b, d], Some(l), Some(r));
                    }
                }
            }
        }
    }
    if !lattice {
        c.laws.retain(|l| l.law != "distributive-join-over-meet" && l.law != "distributive-meet-over-join");
    }

    VerifyReport { algebra: alg.name(), carrier_size: xs.len(), exhaustive, laws: c.laws }
}
