use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::staging::DagMdp;
use crate::error::{Error, Result};
use crate::mdp::{MdpInstance, Uncertainty, UncertaintyKind};

/// CNF with every clause of exactly three literals; literal `j` is x_j and
/// `-j` its negation, variables numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    pub variables: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn check(&self) -> Result<()> {
        if self.variables == 0 {
            return Err(Error::Generator("formula has no variables".into()));
        }
        for (i, c) in self.clauses.iter().enumerate() {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > self.variables {
                    return Err(Error::Generator(format!(
                        "clause {} has literal {l} outside 1..={}",
                        i + 1,
                        self.variables
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parses DIMACS `cnf` text; clauses may span lines and must hold
    /// exactly three literals each.
    pub fn from_dimacs(text: &str) -> Result<CnfFormula> {
        let mut header = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                break;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                match parts.as_slice() {
                    ["cnf", n, m] => {
                        let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad variable count `{n}`")))?;
                        let m: usize = m.parse().map_err(|_| Error::Parse(format!("bad clause count `{m}`")))?;
                        header = Some((n, m));
                    }
                    _ => return Err(Error::Parse(format!("bad problem line `{line}`"))),
                }
                continue;
            }
            if header.is_none() {
                return Err(Error::Parse("clause before the `p cnf` line".into()));
            }
            for tok in line.split_whitespace() {
                let l: i32 = tok.parse().map_err(|_| Error::Parse(format!("bad literal `{tok}`")))?;
                if l == 0 {
                    let clause: [i32; 3] = std::mem::take(&mut current).try_into().map_err(|c: Vec<i32>| {
                        Error::Parse(format!("clause {} has {} literals, expected 3", clauses.len() + 1, c.len()))
                    })?;
                    clauses.push(clause);
                } else {
                    current.push(l);
                }
            }
        }
        let (n, m) = header.ok_or_else(|| Error::Parse("missing `p cnf` line".into()))?;
        if !current.is_empty() {
            return Err(Error::Parse("last clause is not terminated by 0".into()));
        }
        if clauses.len() != m {
            return Err(Error::Parse(format!("header announces {m} clauses, found {}", clauses.len())));
        }
        let f = CnfFormula {
            variables: n,
            clauses,
        };
        f.check().map_err(|e| match e {
            Error::Generator(msg) => Error::Parse(msg),
            other => other,
        })?;
        Ok(f)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.variables, self.clauses.len());
        for c in &self.clauses {
            out.push_str(&format!("{} {} {} 0\n", c[0], c[1], c[2]));
        }
        out
    }
}

/// Exhaustive satisfiability check over all 2^n assignments.
pub fn satisfiable(f: &CnfFormula) -> bool {
    assert!(f.variables < 32, "too many variables for exhaustive search");
    (0u32..1 << f.variables).any(|bits| {
        f.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let value = bits >> (l.unsigned_abs() - 1) & 1 == 1;
                value == (l > 0)
            })
        })
    })
}

fn literal(l: i32) -> String {
    if l > 0 {
        format!("x{l}")
    } else {
        format!("nx{}", -l)
    }
}

/// The 3-SAT instance with transition uncertainty and k = 2: half the mass
/// walks the clause chain s_c1..s_c(m+1), half the variable chain
/// s_1..s_(n+1). Some policy has positive worst case exactly when the
/// formula is satisfiable, and then the worst case is at least 1/2.
pub fn gen_3sat(f: &CnfFormula) -> Result<MdpInstance<f64>> {
    f.check()?;
    let (n, m) = (f.variables, f.clauses.len());
    let mut g = DagMdp::new(
        "s0",
        Uncertainty {
            kind: UncertaintyKind::Transition,
            budget: 2,
        },
    );
    for i in 1..=m + 1 {
        g.state(format!("s_c{i}"));
    }
    for j in 1..=n + 1 {
        g.state(format!("s_{j}"));
    }
    for j in 1..=n {
        g.state(format!("s_x{j}")).state(format!("s_nx{j}"));
    }
    g.state("d").state("t1").state("t2");
    g.reward("t1", 1.0, None).reward("t2", 0.0, None);

    g.action("s0", "a", vec![("s_c1".into(), 0.5), ("s_1".into(), 0.5)]);
    for (i, c) in f.clauses.iter().enumerate() {
        let state = format!("s_c{}", i + 1);
        let next = format!("s_c{}", i + 2);
        let literals: BTreeSet<i32> = c.iter().copied().collect();
        for l in literals {
            let y = literal(l);
            g.uncertain(&state, &format!("a_{y}"), &next, &[&format!("s_{y}")]);
        }
    }
    for j in 1..=n {
        let state = format!("s_{j}");
        let next = format!("s_{}", j + 1);
        for y in [format!("x{j}"), format!("nx{j}")] {
            let target = format!("s_{y}");
            g.action(&state, &format!("a_{y}"), vec![(target.clone(), 1.0)]);
            g.uncertain(&target, "a", &next, &["t2"]);
            g.action(&target, "a'", vec![("d".into(), 1.0)]);
        }
    }
    g.uncertain(&format!("s_c{}", m + 1), "a", "t1", &["d"]);
    g.uncertain(&format!("s_{}", n + 1), "a", "t1", &["d"]);
    g.uncertain("d", "a", "t1", &["t2"]);
    g.build()
}
