//! Grade algebras: preordered semirings, finite lattices and their products.
//!
//! A lattice is read as a semiring with `+ = meet`, `· = join`, `0 = top`,
//! `1 = bottom` and `<: = ⊑`, so every checker and semantics module is written
//! once against [`Algebra`].

pub mod lattice;
pub mod verify;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

pub use lattice::Lattice;
pub use verify::{verify_axioms, LawResult, VerifyReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("grade `{grade}` does not belong to algebra {algebra}")]
    Mismatch { grade: String, algebra: String },
    #[error("cannot parse grade `{text}` for algebra {algebra}")]
    BadGrade { text: String, algebra: String },
    #[error("unknown algebra selector `{0}`")]
    BadSelector(String),
    #[error("lattice specification: {0}")]
    LatticeSpec(String),
    #[error("usage vectors are misaligned: {0}")]
    Misaligned(String),
}

/// An element of some grade algebra.
///
/// Naturals, `ω` and lattice elements share one representation so that
/// `NatExact` embeds into `NatExactOmega` by inclusion. Membership in a given
/// algebra is checked by [`Algebra::contains`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grade {
    Nat(BigUint),
    Omega,
    Elem(u16, Arc<str>),
    Pair(Box<Grade>, Box<Grade>),
}

impl Grade {
    pub fn nat(n: u64) -> Grade {
        Grade::Nat(BigUint::from(n))
    }

    pub fn pair(a: Grade, b: Grade) -> Grade {
        Grade::Pair(Box::new(a), Box::new(b))
    }

    fn as_small(&self) -> Option<u8> {
        match self {
            Grade::Nat(n) if n.is_zero() => Some(0),
            Grade::Nat(n) if n.is_one() => Some(1),
            Grade::Omega => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grade::Nat(n) => write!(f, "{n}"),
            Grade::Omega => write!(f, "w"),
            Grade::Elem(_, name) => write!(f, "{name}"),
            Grade::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

impl fmt::Debug for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Broad family of an algebra, used to pick which laws it claims.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Semiring,
    Lattice,
    Product,
}

/// A grade algebra `(Q, +, ·, 0, 1, <:)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Algebra {
    NatExact,
    NatBounded,
    NatExactOmega,
    NatBoundedOmega,
    Lin3,
    Aff3,
    Lattice(Arc<Lattice>),
    Product(Box<Algebra>, Box<Algebra>),
}

impl Algebra {
    pub fn lattice(l: Lattice) -> Algebra {
        Algebra::Lattice(Arc::new(l))
    }

    pub fn builtin_lattice(name: &str) -> Option<Algebra> {
        lattice::builtin(name).map(Algebra::lattice)
    }

    pub fn product(a: Algebra, b: Algebra) -> Algebra {
        Algebra::Product(Box::new(a), Box::new(b))
    }

    /// Parses an algebra selector such as `lin3`, `lattice:diamond` or
    /// `product(lin3,lattice:lmh)`.
    ///
    /// `lattice:<x>` reads `x` as a file when it exists and otherwise looks up
    /// a built-in lattice by the file stem.
    pub fn from_selector(sel: &str) -> Result<Algebra, AlgebraError> {
        let s = sel.trim();
        match s {
            "nat-exact" => return Ok(Algebra::NatExact),
            "nat-bounded" => return Ok(Algebra::NatBounded),
            "nat-exact-omega" => return Ok(Algebra::NatExactOmega),
            "nat-bounded-omega" => return Ok(Algebra::NatBoundedOmega),
            "lin3" => return Ok(Algebra::Lin3),
            "aff3" => return Ok(Algebra::Aff3),
            _ => {}
        }
        if let Some(target) = s.strip_prefix("lattice:") {
            let path = Path::new(target);
            if path.is_file() {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| AlgebraError::LatticeSpec(format!("{target}: {e}")))?;
                let name = path.file_stem().and_then(|n| n.to_str()).unwrap_or(target);
                return Ok(Algebra::lattice(Lattice::parse(name, &text)?));
            }
            let stem = path.file_stem().and_then(|n| n.to_str()).unwrap_or(target);
            return Algebra::builtin_lattice(stem).ok_or_else(|| AlgebraError::BadSelector(sel.to_string()));
        }
        if let Some(inner) = s.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
            let mut depth = 0usize;
            for (i, c) in inner.char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => depth = depth.saturating_sub(1),
                    ',' if depth == 0 => {
                        let l = Algebra::from_selector(&inner[..i])?;
                        let r = Algebra::from_selector(&inner[i + 1..])?;
                        return Ok(Algebra::product(l, r));
                    }
                    _ => {}
                }
            }
        }
        Err(AlgebraError::BadSelector(sel.to_string()))
    }

    /// The canonical selector naming this algebra.
    pub fn name(&self) -> String {
        match self {
            Algebra::NatExact => "nat-exact".into(),
            Algebra::NatBounded => "nat-bounded".into(),
            Algebra::NatExactOmega => "nat-exact-omega".into(),
            Algebra::NatBoundedOmega => "nat-bounded-omega".into(),
            Algebra::Lin3 => "lin3".into(),
            Algebra::Aff3 => "aff3".into(),
            Algebra::Lattice(l) => format!("lattice:{}", l.name()),
            Algebra::Product(a, b) => format!("product({},{})", a.name(), b.name()),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Algebra::Lattice(_) => Family::Lattice,
            Algebra::Product(..) => Family::Product,
            _ => Family::Semiring,
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, Algebra::Lattice(_))
    }

    pub fn zero(&self) -> Grade {
        match self {
            Algebra::Lattice(l) => elem(l, l.top()),
            Algebra::Product(a, b) => Grade::pair(a.zero(), b.zero()),
            _ => Grade::nat(0),
        }
    }

    pub fn one(&self) -> Grade {
        match self {
            Algebra::Lattice(l) => elem(l, l.bot()),
            Algebra::Product(a, b) => Grade::pair(a.one(), b.one()),
            _ => Grade::nat(1),
        }
    }

    /// Whether the carrier contains the unrestricted grade `ω`.
    pub fn has_omega(&self) -> bool {
        match self {
            Algebra::NatExactOmega | Algebra::NatBoundedOmega | Algebra::Lin3 | Algebra::Aff3 => true,
            Algebra::Product(a, b) => a.has_omega() || b.has_omega(),
            _ => false,
        }
    }

    pub fn omega(&self) -> Option<Grade> {
        match self {
            Algebra::NatExactOmega | Algebra::NatBoundedOmega | Algebra::Lin3 | Algebra::Aff3 => Some(Grade::Omega),
            _ => None,
        }
    }

    pub fn is_zero(&self, g: &Grade) -> bool {
        *g == self.zero()
    }

    pub fn contains(&self, g: &Grade) -> bool {
        match (self, g) {
            (Algebra::NatExact | Algebra::NatBounded, Grade::Nat(_)) => true,
            (Algebra::NatExactOmega | Algebra::NatBoundedOmega, Grade::Nat(_) | Grade::Omega) => true,
            (Algebra::Lin3 | Algebra::Aff3, g) => g.as_small().is_some(),
            (Algebra::Lattice(l), Grade::Elem(i, name)) => {
                (*i as usize) < l.len() && l.elem_name(*i as usize) == name
            }
            (Algebra::Product(a, b), Grade::Pair(x, y)) => a.contains(x) && b.contains(y),
            _ => false,
        }
    }

    fn require(&self, g: &Grade) -> Result<(), AlgebraError> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(AlgebraError::Mismatch { grade: g.to_string(), algebra: self.name() })
        }
    }

    pub fn add(&self, a: &Grade, b: &Grade) -> Result<Grade, AlgebraError> {
        self.require(a)?;
        self.require(b)?;
        Ok(self.add_raw(a, b))
    }

    pub fn mul(&self, a: &Grade, b: &Grade) -> Result<Grade, AlgebraError> {
        self.require(a)?;
        self.require(b)?;
        Ok(self.mul_raw(a, b))
    }

    pub fn leq(&self, a: &Grade, b: &Grade) -> Result<bool, AlgebraError> {
        self.require(a)?;
        self.require(b)?;
        Ok(self.leq_raw(a, b))
    }

    /// A canonical `r'` with `r' + q = r`, if one exists.
    pub fn residual(&self, r: &Grade, q: &Grade) -> Result<Option<Grade>, AlgebraError> {
        self.require(r)?;
        self.require(q)?;
        Ok(self.residual_raw(r, q))
    }

    /// Greatest lower bound in the preorder, if one exists.
    pub fn glb(&self, a: &Grade, b: &Grade) -> Result<Option<Grade>, AlgebraError> {
        self.require(a)?;
        self.require(b)?;
        Ok(self.glb_raw(a, b))
    }

    fn add_raw(&self, a: &Grade, b: &Grade) -> Grade {
        match self {
            Algebra::NatExact | Algebra::NatBounded | Algebra::NatExactOmega | Algebra::NatBoundedOmega => {
                match (a, b) {
                    (Grade::Nat(x), Grade::Nat(y)) => Grade::Nat(x + y),
                    _ => Grade::Omega,
                }
            }
            Algebra::Lin3 | Algebra::Aff3 => match (a.as_small(), b.as_small()) {
                (Some(0), _) => b.clone(),
                (_, Some(0)) => a.clone(),
                _ => Grade::Omega,
            },
            Algebra::Lattice(l) => elem(l, l.meet(idx(a), idx(b))),
            Algebra::Product(p, q) => {
                let ((a1, a2), (b1, b2)) = (split(a), split(b));
                Grade::pair(p.add_raw(a1, b1), q.add_raw(a2, b2))
            }
        }
    }

    fn mul_raw(&self, a: &Grade, b: &Grade) -> Grade {
        match self {
            Algebra::NatExact | Algebra::NatBounded | Algebra::NatExactOmega | Algebra::NatBoundedOmega => {
                match (a, b) {
                    (Grade::Nat(x), Grade::Nat(y)) => Grade::Nat(x * y),
                    (Grade::Nat(x), Grade::Omega) | (Grade::Omega, Grade::Nat(x)) if x.is_zero() => Grade::nat(0),
                    _ => Grade::Omega,
                }
            }
            Algebra::Lin3 | Algebra::Aff3 => match (a.as_small(), b.as_small()) {
                (Some(0), _) | (_, Some(0)) => Grade::nat(0),
                (Some(1), _) => b.clone(),
                (_, Some(1)) => a.clone(),
                _ => Grade::Omega,
            },
            Algebra::Lattice(l) => elem(l, l.join(idx(a), idx(b))),
            Algebra::Product(p, q) => {
                let ((a1, a2), (b1, b2)) = (split(a), split(b));
                Grade::pair(p.mul_raw(a1, b1), q.mul_raw(a2, b2))
            }
        }
    }

    fn leq_raw(&self, a: &Grade, b: &Grade) -> bool {
        match self {
            Algebra::NatExact => a == b,
            Algebra::NatBounded => nat_ge(a, b),
            Algebra::NatExactOmega => a == b || *a == Grade::Omega,
            Algebra::NatBoundedOmega => match (a, b) {
                (Grade::Omega, _) => true,
                (_, Grade::Omega) => false,
                _ => nat_ge(a, b),
            },
            Algebra::Lin3 => a == b || *a == Grade::Omega,
            Algebra::Aff3 => {
                let rank = |g: &Grade| match g.as_small() {
                    Some(2) => 0,
                    Some(1) => 1,
                    _ => 2,
                };
                rank(a) <= rank(b)
            }
            Algebra::Lattice(l) => l.leq(idx(a), idx(b)),
            Algebra::Product(p, q) => {
                let ((a1, a2), (b1, b2)) = (split(a), split(b));
                p.leq_raw(a1, b1) && q.leq_raw(a2, b2)
            }
        }
    }

    fn residual_raw(&self, r: &Grade, q: &Grade) -> Option<Grade> {
        match self {
            Algebra::NatExact | Algebra::NatBounded | Algebra::NatExactOmega | Algebra::NatBoundedOmega => {
                match (r, q) {
                    (Grade::Omega, _) => Some(Grade::Omega),
                    (Grade::Nat(x), Grade::Nat(y)) if x >= y => Some(Grade::Nat(x - y)),
                    _ => None,
                }
            }
            Algebra::Lin3 | Algebra::Aff3 => {
                if *r == Grade::Omega {
                    return Some(Grade::Omega);
                }
                [Grade::nat(0), Grade::nat(1)]
                    .into_iter()
                    .find(|c| self.add_raw(c, q) == *r)
            }
            Algebra::Lattice(l) => l.leq(idx(r), idx(q)).then(|| r.clone()),
            Algebra::Product(p, s) => {
                let ((r1, r2), (q1, q2)) = (split(r), split(q));
                Some(Grade::pair(p.residual_raw(r1, q1)?, s.residual_raw(r2, q2)?))
            }
        }
    }

    fn glb_raw(&self, a: &Grade, b: &Grade) -> Option<Grade> {
        if a == b {
            return Some(a.clone());
        }
        match self {
            Algebra::NatExact => None,
            Algebra::NatBounded | Algebra::NatBoundedOmega | Algebra::Aff3 => {
                Some(if self.leq_raw(a, b) { a.clone() } else { b.clone() })
            }
            Algebra::NatExactOmega | Algebra::Lin3 => Some(Grade::Omega),
            Algebra::Lattice(l) => Some(elem(l, l.meet(idx(a), idx(b)))),
            Algebra::Product(p, q) => {
                let ((a1, a2), (b1, b2)) = (split(a), split(b));
                Some(Grade::pair(p.glb_raw(a1, b1)?, q.glb_raw(a2, b2)?))
            }
        }
    }

    /// The finite carrier, when there is one.
    pub fn carrier(&self) -> Option<Vec<Grade>> {
        match self {
            Algebra::Lin3 | Algebra::Aff3 => Some(vec![Grade::nat(0), Grade::nat(1), Grade::Omega]),
            Algebra::Lattice(l) => Some((0..l.len()).map(|i| elem(l, i)).collect()),
            Algebra::Product(a, b) => {
                let (xs, ys) = (a.carrier()?, b.carrier()?);
                Some(
                    xs.iter()
                        .flat_map(|x| ys.iter().map(move |y| Grade::pair(x.clone(), y.clone())))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// The finite carrier, or naturals up to `bound` (plus `ω` when present).
    pub fn sample(&self, bound: u64) -> Vec<Grade> {
        match self {
            Algebra::NatExact | Algebra::NatBounded => (0..=bound).map(Grade::nat).collect(),
            Algebra::NatExactOmega | Algebra::NatBoundedOmega => {
                let mut v: Vec<Grade> = (0..=bound).map(Grade::nat).collect();
                v.push(Grade::Omega);
                v
            }
            Algebra::Product(a, b) => {
                let (xs, ys) = (a.sample(bound), b.sample(bound));
                xs.iter()
                    .flat_map(|x| ys.iter().map(move |y| Grade::pair(x.clone(), y.clone())))
                    .collect()
            }
            _ => self.carrier().unwrap_or_default(),
        }
    }

    /// Whether the unrestricted-usage side condition of the lambda rule fires:
    /// the judgment grade is (componentwise) `ω` while the binder grade is not.
    pub fn omega_violation(&self, q: &Grade, r: &Grade) -> bool {
        match self {
            Algebra::Product(a, b) => {
                let ((q1, q2), (r1, r2)) = (split(q), split(r));
                a.omega_violation(q1, r1) || b.omega_violation(q2, r2)
            }
            _ => self.has_omega() && *q == Grade::Omega && *r != Grade::Omega,
        }
    }

    /// Factors `q` as `q0 · q'` with `q0 ≠ 0` and `q'` free of `ω`
    /// components, for the scaled lambda rule.
    pub fn omega_factor(&self, q: &Grade) -> (Grade, Grade) {
        match self {
            Algebra::Product(a, b) => {
                let (q1, q2) = split(q);
                let ((s1, t1), (s2, t2)) = (a.omega_factor(q1), b.omega_factor(q2));
                (Grade::pair(s1, s2), Grade::pair(t1, t2))
            }
            _ if self.has_omega() && *q == Grade::Omega => (Grade::Omega, self.one()),
            _ => (self.one(), q.clone()),
        }
    }

    /// `q` with every component from an `ω`-algebra lowered to `ω`, when that
    /// differs from `q`. Such a grade is `<:` `q`.
    pub fn omega_floor(&self, q: &Grade) -> Option<Grade> {
        match self {
            Algebra::Product(a, b) => {
                let (q1, q2) = split(q);
                let (f1, f2) = (a.omega_floor(q1), b.omega_floor(q2));
                if f1.is_none() && f2.is_none() {
                    return None;
                }
                Some(Grade::pair(f1.unwrap_or_else(|| q1.clone()), f2.unwrap_or_else(|| q2.clone())))
            }
            _ if self.has_omega() && *q != Grade::Omega => Some(Grade::Omega),
            _ => None,
        }
    }

    /// Parses a grade in surface syntax: naturals, `w`, lattice names,
    /// `bot`/`top`, or `(q,l)` for products.
    pub fn parse_grade(&self, text: &str) -> Result<Grade, AlgebraError> {
        let t = text.trim();
        let bad = || AlgebraError::BadGrade { text: text.to_string(), algebra: self.name() };
        let g = match self {
            Algebra::Product(a, b) => {
                let inner = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(bad)?;
                let mut depth = 0usize;
                let mut cut = None;
                for (i, c) in inner.char_indices() {
                    match c {
                        '(' => depth += 1,
                        ')' => depth = depth.saturating_sub(1),
                        ',' if depth == 0 => {
                            cut = Some(i);
                            break;
                        }
                        _ => {}
                    }
                }
                let i = cut.ok_or_else(bad)?;
                Grade::pair(a.parse_grade(&inner[..i])?, b.parse_grade(&inner[i + 1..])?)
            }
            Algebra::Lattice(l) => {
                if let Some(i) = l.lookup(t) {
                    elem(l, i)
                } else {
                    match t {
                        "bot" | "⊥" | "1" => elem(l, l.bot()),
                        "top" | "⊤" | "0" => elem(l, l.top()),
                        _ => return Err(bad()),
                    }
                }
            }
            _ => match t {
                "w" | "ω" | "omega" => Grade::Omega,
                _ => Grade::Nat(t.parse::<BigUint>().map_err(|_| bad())?),
            },
        };
        if self.contains(&g) {
            Ok(g)
        } else {
            Err(bad())
        }
    }

    pub fn vector_add(&self, u: &UsageVector, v: &UsageVector) -> Result<UsageVector, AlgebraError> {
        u.aligned(v)?;
        let entries = u
            .entries
            .iter()
            .zip(&v.entries)
            .map(|((n, a), (_, b))| Ok((n.clone(), self.add(a, b)?)))
            .collect::<Result<_, AlgebraError>>()?;
        Ok(UsageVector { entries })
    }

    pub fn vector_scale(&self, q: &Grade, u: &UsageVector) -> Result<UsageVector, AlgebraError> {
        let entries = u
            .entries
            .iter()
            .map(|(n, a)| Ok((n.clone(), self.mul(q, a)?)))
            .collect::<Result<_, AlgebraError>>()?;
        Ok(UsageVector { entries })
    }

    pub fn vector_leq(&self, u: &UsageVector, v: &UsageVector) -> Result<bool, AlgebraError> {
        u.aligned(v)?;
        for ((_, a), (_, b)) in u.entries.iter().zip(&v.entries) {
            if !self.leq(a, b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn elem(l: &Lattice, i: usize) -> Grade {
    Grade::Elem(i as u16, l.elem_name(i).clone())
}

fn idx(g: &Grade) -> usize {
    match g {
        Grade::Elem(i, _) => *i as usize,
        _ => unreachable!("lattice grade expected"),
    }
}

fn split(g: &Grade) -> (&Grade, &Grade) {
    match g {
        Grade::Pair(a, b) => (a, b),
        _ => unreachable!("product grade expected"),
    }
}

fn nat_ge(a: &Grade, b: &Grade) -> bool {
    match (a, b) {
        (Grade::Nat(x), Grade::Nat(y)) => x >= y,
        _ => false,
    }
}

/// Grades aligned with the names of a context skeleton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UsageVector {
    pub entries: Vec<(String, Grade)>,
}

impl UsageVector {
    pub fn new(entries: Vec<(String, Grade)>) -> UsageVector {
        UsageVector { entries }
    }

    pub fn zeros(alg: &Algebra, names: &[String]) -> UsageVector {
        UsageVector { entries: names.iter().map(|n| (n.clone(), alg.zero())).collect() }
    }

    pub fn grades(&self) -> Vec<Grade> {
        self.entries.iter().map(|(_, g)| g.clone()).collect()
    }

    fn aligned(&self, other: &UsageVector) -> Result<(), AlgebraError> {
        let same = self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|((a, _), (b, _))| a == b);
        if same {
            Ok(())
        } else {
            let names = |v: &UsageVector| v.entries.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(",");
            Err(AlgebraError::Misaligned(format!("[{}] vs [{}]", names(self), names(other))))
        }
    }
}

impl fmt::Display for UsageVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (n, g)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}:{g}")?;
        }
        write!(f, "]")
    }
}
