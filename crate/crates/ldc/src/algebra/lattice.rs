//! Finite bounded lattices given by a covering relation.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::AlgebraError;

/// A finite lattice with precomputed order, meet and join tables.
#[derive(Clone, PartialEq, Eq)]
pub struct Lattice {
    name: String,
    elems: Vec<Arc<str>>,
    index: HashMap<String, usize>,
    leq: Vec<Vec<bool>>,
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
    top: usize,
    bot: usize,
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice({})", self.name)
    }
}

impl Lattice {
    /// Builds a lattice from element names and `a <= b` pairs.
    pub fn new(name: &str, elems: &[&str], covers: &[(&str, &str)]) -> Result<Lattice, AlgebraError> {
        let mut index = HashMap::new();
        for (i, e) in elems.iter().enumerate() {
            if !is_ident(e) {
                return Err(AlgebraError::LatticeSpec(format!("bad element name `{e}`")));
            }
            if index.insert(e.to_string(), i).is_some() {
                return Err(AlgebraError::LatticeSpec(format!("duplicate element `{e}`")));
            }
        }
        if elems.is_empty() {
            return Err(AlgebraError::LatticeSpec("no elements".into()));
        }
        let n = elems.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in covers {
            let ia = *index
                .get(*a)
                .ok_or_else(|| AlgebraError::LatticeSpec(format!("unknown element `{a}`")))?;
            let ib = *index
                .get(*b)
                .ok_or_else(|| AlgebraError::LatticeSpec(format!("unknown element `{b}`")))?;
            leq[ia][ib] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(AlgebraError::LatticeSpec(format!(
                        "cycle between `{}` and `{}`",
                        elems[i], elems[j]
                    )));
                }
            }
        }
        let bound = |i: usize, j: usize, upper: bool| -> Option<usize> {
            let cands: Vec<usize> = (0..n)
                .filter(|&k| if upper { leq[i][k] && leq[j][k] } else { leq[k][i] && leq[k][j] })
                .collect();
            cands.iter().copied().find(|&k| {
                cands
                    .iter()
                    .all(|&c| if upper { leq[k][c] } else { leq[c][k] })
            })
        };
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                meet[i][j] = bound(i, j, false).ok_or_else(|| {
                    AlgebraError::LatticeSpec(format!("`{}` and `{}` have no meet", elems[i], elems[j]))
                })?;
                join[i][j] = bound(i, j, true).ok_or_else(|| {
                    AlgebraError::LatticeSpec(format!("`{}` and `{}` have no join", elems[i], elems[j]))
                })?;
            }
        }
        let top = (0..n)
            .find(|&k| (0..n).all(|i| leq[i][k]))
            .ok_or_else(|| AlgebraError::LatticeSpec("no top element".into()))?;
        let bot = (0..n)
            .find(|&k| (0..n).all(|i| leq[k][i]))
            .ok_or_else(|| AlgebraError::LatticeSpec("no bottom element".into()))?;
        Ok(Lattice {
            name: name.to_string(),
            elems: elems.iter().map(|e| Arc::from(*e)).collect(),
            index,
            leq,
            meet,
            join,
            top,
            bot,
        })
    }

    /// Parses the `elems:` / `leq:` text format.
    pub fn parse(name: &str, text: &str) -> Result<Lattice, AlgebraError> {
        let mut elems: Option<Vec<String>> = None;
        let mut covers: Vec<(String, String)> = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("elems:") {
                elems = Some(
                    rest.split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect(),
                );
            } else if let Some(rest) = line.strip_prefix("leq:") {
                for pair in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (a, b) = pair
                        .split_once("<=")
                        .ok_or_else(|| AlgebraError::LatticeSpec(format!("bad order pair `{pair}`")))?;
                    covers.push((a.trim().to_string(), b.trim().to_string()));
                }
            } else {
                return Err(AlgebraError::LatticeSpec(format!("unrecognised line `{line}`")));
            }
        }
        let elems = elems.ok_or_else(|| AlgebraError::LatticeSpec("missing `elems:` line".into()))?;
        let er: Vec<&str> = elems.iter().map(String::as_str).collect();
        let cr: Vec<(&str, &str)> = covers.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Lattice::new(name, &er, &cr)
    }

    /// Renders the lattice back into the text format.
    pub fn to_spec_text(&self) -> String {
        let names: Vec<&str> = self.elems.iter().map(|e| &**e).collect();
        let mut pairs = Vec::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i != j && self.covers(i, j) {
                    pairs.push(format!("{}<={}", self.elems[i], self.elems[j]));
                }
            }
        }
        format!("elems: {}\nleq: {}\n", names.join(", "), pairs.join(", "))
    }

    fn covers(&self, i: usize, j: usize) -> bool {
        self.leq[i][j] && !(0..self.len()).any(|k| k != i && k != j && self.leq[i][k] && self.leq[k][j])
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn len(&self) -> usize {
        self.elems.len()
    }
    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }
    pub fn elem_name(&self, i: usize) -> &Arc<str> {
        &self.elems[i]
    }
    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
    pub fn top(&self) -> usize {
        self.top
    }
    pub fn bot(&self) -> usize {
        self.bot
    }
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }
    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a][b]
    }
    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// The built-in lattices, addressable as `lattice:<name>`.
pub fn builtin(name: &str) -> Option<Lattice> {
    let l = match name {
        "diamond" => Lattice::new(
            "diamond",
            &["L", "M1", "M2", "H"],
            &[("L", "M1"), ("L", "M2"), ("M1", "H"), ("M2", "H")],
        ),
        "lmh" | "chain3" => Lattice::new("lmh", &["L", "M", "H"], &[("L", "M"), ("M", "H")]),
        "lh" | "two" => Lattice::new("lh", &["L", "H"], &[("L", "H")]),
        "m3" => Lattice::new(
            "m3",
            &["bot", "l1", "l2", "l3", "top"],
            &[("bot", "l1"), ("bot", "l2"), ("bot", "l3"), ("l1", "top"), ("l2", "top"), ("l3", "top")],
        ),
        "n5" => Lattice::new(
            "n5",
            &["bot", "l1", "l2", "l3", "top"],
            &[("bot", "l1"), ("l1", "l3"), ("l3", "top"), ("bot", "l2"), ("l2", "top")],
        ),
        _ => return None,
    };
    Some(l.expect("built-in lattices are well formed"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diamond_tables() {
        let d = builtin("diamond").unwrap();
        let (m1, m2) = (d.lookup("M1").unwrap(), d.lookup("M2").unwrap());
        assert_eq!(&**d.elem_name(d.join(m1, m2)), "H");
        assert_eq!(&**d.elem_name(d.meet(m1, m2)), "L");
        assert_eq!(&**d.elem_name(d.top()), "H");
        assert_eq!(&**d.elem_name(d.bot()), "L");
    }

    #[test]
    fn parse_roundtrip() {
        let d = builtin("diamond").unwrap();
        let again = Lattice::parse("diamond", &d.to_spec_text()).unwrap();
        assert_eq!(d.leq, again.leq);
    }

    #[test]
    fn rejects_missing_join() {
        let err = Lattice::parse("v", "elems: a, b\nleq:\n").unwrap_err();
        assert!(err.to_string().contains("no meet") || err.to_string().contains("no join"));
    }

    #[test]
    fn rejects_cycle() {
        assert!(Lattice::parse("c", "elems: a, b\nleq: a<=b, b<=a").is_err());
    }

    #[test]
    fn closure_is_transitive() {
        let c = builtin("lmh").unwrap();
        assert!(c.leq(c.lookup("L").unwrap(), c.lookup("H").unwrap()));
        assert!(!c.leq(c.lookup("H").unwrap(), c.lookup("L").unwrap()));
    }
}
