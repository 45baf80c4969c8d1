//! Parsers for the `name(key=value,...)` notation used in config values.
//! Each accepts exactly what the corresponding `Display` impl prints.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use endlab_core::dependence::{Dependence, DominatingSequence, MarginalSpec, Weights};
use endlab_core::norming::Sequence;

#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub name: String,
    args: Vec<(Option<String>, String)>,
    used: Vec<bool>,
}

impl Call {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, inner) = match text.find('(') {
            Some(i) => {
                let inner = text[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| anyhow!("missing ')' in {text:?}"))?;
                (&text[..i], inner)
            }
            None => (text, ""),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            bail!("bad name in {text:?}");
        }
        let args: Vec<(Option<String>, String)> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|a| match a.split_once('=') {
                    Some((k, v)) => (Some(k.trim().to_string()), v.trim().to_string()),
                    None => (None, a.trim().to_string()),
                })
                .collect()
        };
        Ok(Self {
            name: name.to_string(),
            used: vec![false; args.len()],
            args,
        })
    }

    /// Argument by key, or the `pos`-th positional argument.
    fn raw(&mut self, key: &str, pos: usize) -> Option<String> {
        if let Some(i) = self.args.iter().position(|(k, _)| k.as_deref() == Some(key)) {
            self.used[i] = true;
            return Some(self.args[i].1.clone());
        }
        let i = self
            .args
            .iter()
            .enumerate()
            .filter(|(_, (k, _))| k.is_none())
            .nth(pos)?
            .0;
        self.used[i] = true;
        Some(self.args[i].1.clone())
    }

    pub fn num(&mut self, key: &str, pos: usize) -> Result<f64> {
        let v = self
            .raw(key, pos)
            .ok_or_else(|| anyhow!("{}(...) needs {key}", self.name))?;
        parse_num(&v)
    }

    pub fn list(&mut self, key: &str, pos: usize) -> Result<Vec<f64>> {
        let v = self
            .raw(key, pos)
            .ok_or_else(|| anyhow!("{}(...) needs {key}", self.name))?;
        v.split_whitespace().map(parse_num).collect()
    }

    pub fn text(&mut self, key: &str, pos: usize) -> Result<String> {
        self.raw(key, pos)
            .ok_or_else(|| anyhow!("{}(...) needs {key}", self.name))
    }

    /// Errors on arguments no accessor asked for.
    pub fn finish(self) -> Result<()> {
        if let Some(i) = self.used.iter().position(|u| !u) {
            let (k, v) = &self.args[i];
            bail!(
                "unknown argument {}{v} to {}",
                k.as_ref().map(|k| format!("{k}=")).unwrap_or_default(),
                self.name
            );
        }
        Ok(())
    }
}

pub fn parse_num(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("not a number: {s:?}"))?;
    if v.is_nan() {
        bail!("not a number: {s:?}");
    }
    Ok(v)
}

pub fn parse_num_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(parse_num).collect()
}

pub fn parse_law(s: &str) -> Result<MarginalSpec> {
    let mut c = Call::parse(s)?;
    let law = match c.name.as_str() {
        "two_point" => {
            let (x0, x1) = (c.num("x0", 0)?, c.num("x1", 1)?);
            let (p0, p1) = (c.num("p0", 2)?, c.num("p1", 3)?);
            MarginalSpec::two_point(x0, x1, p0, p1)
        }
        "uniform" => MarginalSpec::uniform(c.num("lo", 0)?, c.num("hi", 1)?),
        "pareto" => MarginalSpec::Pareto {
            shape: c.num("shape", 0)?,
            scale: c.num("scale", 1)?,
        },
        "normal" => MarginalSpec::Normal {
            mean: c.num("mean", 0)?,
            sd: c.num("sd", 1)?,
        },
        "discrete" => MarginalSpec::Discrete {
            atoms: c.list("atoms", 0)?,
            probs: c.list("probs", 1)?,
        },
        "point" => MarginalSpec::point(c.num("c", 0)?),
        other => bail!("unknown law {other:?}"),
    };
    c.finish()?;
    law.validate()?;
    Ok(law)
}

/// `trunc2` needs the law and `a` it is built from, so it is resolved by
/// the caller; this returns `Err` with `Some(scale)` for it.
pub fn parse_sequence(s: &str) -> Result<std::result::Result<Sequence, f64>> {
    let mut c = Call::parse(s)?;
    let seq = match c.name.as_str() {
        "pow" => Ok(Sequence::pow(c.num("scale", 1)?, c.num("exp", 0)?)),
        "powlog" => Ok(Sequence::powlog(
            c.num("scale", 2)?,
            c.num("exp", 0)?,
            c.num("log_exp", 1)?,
        )),
        "affine" => Ok(Sequence::Affine {
            intercept: c.num("intercept", 0)?,
            slope: c.num("slope", 1)?,
        }),
        "trunc2" => Err(c.num("scale", 0)?),
        other => bail!("unknown sequence {other:?}"),
    };
    c.finish()?;
    Ok(seq)
}

pub fn parse_dominating(s: &str) -> Result<DominatingSequence> {
    let mut c = Call::parse(s)?;
    let m = match c.name.as_str() {
        "const" => DominatingSequence::Constant(c.num("c", 0)?),
        "pow" => DominatingSequence::Power {
            coef: c.num("coef", 0)?,
            exponent: c.num("exp", 1)?,
        },
        "log" => DominatingSequence::Log {
            coef: c.num("coef", 0)?,
        },
        "table" => DominatingSequence::Table(c.list("values", 0)?),
        other => bail!("unknown dominating sequence {other:?}"),
    };
    c.finish()?;
    m.validate()?;
    Ok(m)
}

pub fn parse_weights(s: &str) -> Result<Weights> {
    let mut c = Call::parse(s)?;
    let w = match c.name.as_str() {
        "unit" => Weights::Unit,
        "const" => Weights::Constant(c.num("c", 0)?),
        "alternating" => Weights::Alternating,
        "row_alternating" => Weights::RowAlternating,
        other => bail!("unknown weights {other:?}"),
    };
    c.finish()?;
    Ok(w)
}

/// Dependence notation in configs. `discrete_joint(file=...)` returns the
/// path for the caller to load.
#[derive(Debug, Clone, PartialEq)]
pub enum DependenceSpec {
    Ready(Dependence),
    JointFile(PathBuf),
}

pub fn parse_dependence(s: &str) -> Result<DependenceSpec> {
    use endlab_core::dependence::GaussianStructure;
    let mut c = Call::parse(s)?;
    let d = match c.name.as_str() {
        "independent" => DependenceSpec::Ready(Dependence::Independent),
        "fgm_negative" => DependenceSpec::Ready(Dependence::FgmNegative {
            theta: c.num("theta", 0)?,
        }),
        "gaussian_equicorrelated" => {
            DependenceSpec::Ready(Dependence::GaussianCopula(GaussianStructure::Equicorrelated {
                rho: c.num("rho", 0)?,
            }))
        }
        "gaussian_pairs" => DependenceSpec::Ready(Dependence::GaussianCopula(GaussianStructure::Pairs {
            rho: c.num("rho", 0)?,
        })),
        "discrete_joint" => DependenceSpec::JointFile(PathBuf::from(c.text("file", 0)?)),
        other => bail!("unknown dependence {other:?}"),
    };
    c.finish()?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laws_round_trip_through_display() {
        for law in [
            MarginalSpec::two_point(-1.0, 2.0, 0.25, 0.75),
            MarginalSpec::uniform(-0.2, 0.2),
            MarginalSpec::Pareto {
                shape: 2.5,
                scale: 1e-3,
            },
            MarginalSpec::Normal { mean: 0.1, sd: 3.0 },
            MarginalSpec::Discrete {
                atoms: vec![-1.0, 0.0, 1e20],
                probs: vec![0.5, 0.25, 0.25],
            },
        ] {
            assert_eq!(parse_law(&law.to_string()).unwrap(), law);
        }
    }

    #[test]
    fn sequences_round_trip() {
        for s in [
            Sequence::pow(0.1, 2.0 / 3.0),
            Sequence::powlog(1.0, 1.0 / 1.5, -1.0 / 1.5),
            Sequence::Affine {
                intercept: 1.0,
                slope: 1e-9,
            },
        ] {
            assert_eq!(parse_sequence(&s.to_string()).unwrap(), Ok(s));
        }
        assert_eq!(parse_sequence("trunc2(scale=4)").unwrap(), Err(4.0));
    }

    #[test]
    fn other_values_round_trip() {
        for m in [
            DominatingSequence::Constant(1.0),
            DominatingSequence::Power {
                coef: 2.0,
                exponent: 0.5,
            },
            DominatingSequence::Log { coef: 3.0 },
            DominatingSequence::Table(vec![1.0, 2.0, 2.5]),
        ] {
            assert_eq!(parse_dominating(&m.to_string()).unwrap(), m);
        }
        for w in [
            Weights::Unit,
            Weights::Constant(-0.5),
            Weights::Alternating,
            Weights::RowAlternating,
        ] {
            assert_eq!(parse_weights(&w.to_string()).unwrap(), w);
        }
    }

    #[test]
    fn rejects_unknown_arguments() {
        assert!(parse_law("uniform(lo=0,hi=1,mid=2)").is_err());
        assert!(parse_law("uniform(lo=0)").is_err());
        assert!(parse_law("gamma(k=1)").is_err());
        assert!(parse_law("uniform(lo=1,hi=0)").is_err());
    }
}
