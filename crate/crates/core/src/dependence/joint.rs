use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numeric::{fmt_num, stable_sum};

use super::marginal::MarginalSpec;

/// Default cap on the number of atoms a single table may carry.
pub const DEFAULT_ATOM_BUDGET: usize = 1 << 16;

const SUM_TOL: f64 = 1e-12;

/// Finite joint law of one row: `atoms[i]` has probability `probs[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    n: usize,
    atoms: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(atoms: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        Self::with_budget(atoms, probs, DEFAULT_ATOM_BUDGET)
    }

    pub fn with_budget(atoms: Vec<Vec<f64>>, probs: Vec<f64>, budget: usize) -> Result<Self> {
        let n = atoms.first().map(Vec::len).unwrap_or(0);
        if n == 0 {
            return Err(Error::InvalidTable("table has no atoms or zero coordinates".into()));
        }
        if atoms.len() != probs.len() {
            return Err(Error::InvalidTable("atom and probability counts differ".into()));
        }
        if atoms.len() > budget {
            return Err(Error::InvalidTable(format!(
                "{} atoms exceed the budget of {budget}",
                atoms.len()
            )));
        }
        if atoms.iter().any(|a| a.len() != n) {
            return Err(Error::InvalidTable("atoms have differing lengths".into()));
        }
        if atoms.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidTable("atoms must be finite".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidTable(format!("probability {p} outside [0, 1]")));
        }
        let total = stable_sum(probs.iter().copied());
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidTable(format!("probabilities sum to {total}")));
        }
        Ok(Self { n, atoms, probs })
    }

    /// Product of discrete marginals.
    pub fn product(marginals: &[MarginalSpec]) -> Result<Self> {
        let mut atoms = vec![Vec::new()];
        let mut probs = vec![1.0];
        for m in marginals {
            let (xs, ps) = discrete_parts(m)?;
            let mut next_atoms = Vec::with_capacity(atoms.len() * xs.len());
            let mut next_probs = Vec::with_capacity(atoms.len() * xs.len());
            for (a, p) in atoms.iter().zip(&probs) {
                for (x, q) in xs.iter().zip(&ps) {
                    let mut v = a.clone();
                    v.push(*x);
                    next_atoms.push(v);
                    next_probs.push(p * q);
                }
            }
            atoms = next_atoms;
            probs = next_probs;
        }
        Self::new(atoms, probs)
    }

    /// Bivariate FGM copula with parameter `theta` discretized on a `g x g`
    /// grid of cells; atom `(i, j)` sits at the cell centre.
    pub fn fgm_grid(theta: f64, g: usize) -> Result<Self> {
        if !(-1.0..=1.0).contains(&theta) || g == 0 {
            return Err(Error::InvalidTable(format!(
                "fgm grid needs |theta| <= 1 and g >= 1, got {theta}, {g}"
            )));
        }
        let d = 1.0 / g as f64;
        let mut atoms = Vec::with_capacity(g * g);
        let mut probs = Vec::with_capacity(g * g);
        for i in 0..g {
            let (u0, u1) = (i as f64 * d, (i + 1) as f64 * d);
            for j in 0..g {
                let (v0, v1) = (j as f64 * d, (j + 1) as f64 * d);
                // C(u,v) = uv[1 + theta (1-u)(1-v)]; rectangle mass
                let mass = d * d * (1.0 + theta * (1.0 - u0 - u1) * (1.0 - v0 - v1));
                atoms.push(vec![(i as f64 + 0.5) * d, (j as f64 + 0.5) * d]);
                probs.push(mass);
            }
        }
        Self::new(atoms, probs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.atoms.iter().map(Vec::as_slice).zip(self.probs.iter().copied())
    }

    /// Sorted distinct values of coordinate `k` (0-based) carrying mass.
    pub fn coordinate_values(&self, k: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .atoms
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(a, _)| a[k])
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Law of coordinate `k` (0-based).
    pub fn marginal(&self, k: usize) -> MarginalSpec {
        let mut mass: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
        for (a, p) in self.atoms.iter().zip(&self.probs) {
            // order-preserving key for f64
            let bits = a[k].to_bits();
            let key = if a[k].is_sign_negative() {
                !bits
            } else {
                bits | (1 << 63)
            };
            mass.entry(key).or_insert((a[k], Vec::new())).1.push(*p);
        }
        let (atoms, probs) = mass.into_values().map(|(x, ps)| (x, stable_sum(ps))).unzip();
        MarginalSpec::Discrete { atoms, probs }
    }

    /// `P{X_k > x_k for all k}`.
    pub fn upper_orthant(&self, x: &[f64]) -> f64 {
        stable_sum(
            self.atoms
                .iter()
                .zip(&self.probs)
                .filter(|(a, _)| a.iter().zip(x).all(|(ai, xi)| ai > xi))
                .map(|(_, p)| *p),
        )
    }

    /// `P{X_k <= x_k for all k}`.
    pub fn lower_orthant(&self, x: &[f64]) -> f64 {
        stable_sum(
            self.atoms
                .iter()
                .zip(&self.probs)
                .filter(|(a, _)| a.iter().zip(x).all(|(ai, xi)| ai <= xi))
                .map(|(_, p)| *p),
        )
    }

    /// Atom selected by a uniform `u` in `(0, 1)`.
    pub fn pick(&self, u: f64) -> &[f64] {
        let mut cum = 0.0;
        for (a, p) in self.atoms.iter().zip(&self.probs) {
            cum += p;
            if u < cum {
                return a;
            }
        }
        // rounding left u above the final cumulative sum
        let last = self
            .probs
            .iter()
            .rposition(|p| *p > 0.0)
            .unwrap_or(self.atoms.len() - 1);
        &self.atoms[last]
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n={} atoms={}\n", self.n, self.atoms.len());
        for (a, p) in self.atoms() {
            for x in a {
                let _ = write!(out, "{} ", fmt_num(*x));
            }
            let _ = writeln!(out, "{}", fmt_num(p));
        }
        out
    }
}

fn discrete_parts(m: &MarginalSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    match m {
        MarginalSpec::TwoPoint { values, probs } => Ok((values.to_vec(), probs.to_vec())),
        MarginalSpec::Discrete { atoms, probs } => Ok((atoms.clone(), probs.clone())),
        other => Err(Error::InvalidTable(format!("{other} is not a discrete law"))),
    }
}

/// Parses one or more tables. Each block starts with a header
/// `n=<int> atoms=<int>` (optionally `row=<int>`, defaulting to `n`),
/// followed by `atoms` lines `x1 .. xn p`. `#` starts a comment.
pub fn parse_joint_tables(text: &str) -> Result<Vec<(usize, JointTable)>> {
    struct Block {
        row: usize,
        n: usize,
        expected: usize,
        header_line: usize,
        atoms: Vec<Vec<f64>>,
        probs: Vec<f64>,
    }
    fn finish(b: Block, out: &mut Vec<(usize, JointTable)>) -> Result<()> {
        if b.atoms.len() != b.expected {
            return Err(Error::Parse {
                line: b.header_line,
                msg: format!("header declares {} atoms but {} follow", b.expected, b.atoms.len()),
            });
        }
        let table = JointTable::new(b.atoms, b.probs).map_err(|e| Error::Parse {
            line: b.header_line,
            msg: e.to_string(),
        })?;
        out.push((b.row, table));
        Ok(())
    }

    let mut out = Vec::new();
    let mut current: Option<Block> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        if line.contains('=') {
            if let Some(b) = current.take() {
                finish(b, &mut out)?;
            }
            let (mut n, mut atoms, mut row) = (None, None, None);
            for field in line.split_whitespace() {
                let (k, v) = field
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected key=value, got {field:?}")))?;
                let v: usize = v
                    .parse()
                    .map_err(|_| err(format!("{k} must be a nonnegative integer, got {v:?}")))?;
                match k {
                    "n" => n = Some(v),
                    "atoms" => atoms = Some(v),
                    "row" => row = Some(v),
                    _ => return Err(err(format!("unknown header key {k:?}"))),
                }
            }
            let n = n.filter(|n| *n > 0).ok_or_else(|| err("header needs n >= 1".into()))?;
            let expected = atoms.ok_or_else(|| err("header needs atoms=<int>".into()))?;
            if expected > DEFAULT_ATOM_BUDGET {
                return Err(err(format!(
                    "{expected} atoms exceed the budget of {DEFAULT_ATOM_BUDGET}"
                )));
            }
            current = Some(Block {
                row: row.unwrap_or(n),
                n,
                expected,
                header_line: line_no,
                atoms: Vec::with_capacity(expected),
                probs: Vec::with_capacity(expected),
            });
            continue;
        }
        let block = current
            .as_mut()
            .ok_or_else(|| err("data line before any header".into()))?;
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(format!("not a finite decimal: {tok:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != block.n + 1 {
            return Err(err(format!("expected {} numbers, found {}", block.n + 1, values.len())));
        }
        let p = values[block.n];
        if !(0.0..=1.0).contains(&p) {
            return Err(err(format!("probability {p} outside [0, 1]")));
        }
        if block.atoms.len() == block.expected {
            return Err(err(format!("more than the declared {} atoms", block.expected)));
        }
        block.atoms.push(values[..block.n].to_vec());
        block.probs.push(p);
    }
    if let Some(b) = current.take() {
        finish(b, &mut out)?;
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no table found".into(),
        });
    }
    Ok(out)
}
