use crate::dependence::{JointTable, MarginalSpec};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Cap on the number of support points of an enumerated sum.
pub const MAX_SUM_ATOMS: usize = 1 << 20;

/// Exact finite law of a sum, support sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSumLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
}

fn discrete(m: &MarginalSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    match m {
        MarginalSpec::TwoPoint { values, probs } => Ok((values.to_vec(), probs.to_vec())),
        MarginalSpec::Discrete { atoms, probs } => Ok((atoms.clone(), probs.clone())),
        other => Err(Error::Unsupported(format!("{other} cannot be enumerated"))),
    }
}

impl DiscreteSumLaw {
    fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            if values.last() == Some(&v) {
                *probs.last_mut().unwrap() += p;
            } else {
                values.push(v);
                probs.push(p);
            }
        }
        Self { values, probs }
    }

    /// Law of `sum_k Y_k` for independent discrete `Y_k`.
    pub fn independent_sum(laws: &[MarginalSpec]) -> Result<Self> {
        let mut pairs = vec![(0.0, 1.0)];
        for law in laws {
            let (xs, ps) = discrete(law)?;
            if pairs.len() * xs.len() > MAX_SUM_ATOMS {
                return Err(Error::Unsupported(format!(
                    "more than {MAX_SUM_ATOMS} atoms to enumerate"
                )));
            }
            let mut next = Vec::with_capacity(pairs.len() * xs.len());
            for (v, p) in &pairs {
                for (x, q) in xs.iter().zip(&ps) {
                    if *q > 0.0 {
                        next.push((v + x, p * q));
                    }
                }
            }
            pairs = Self::from_pairs(next).into_pairs();
        }
        Ok(Self::from_pairs(pairs))
    }

    /// Law of `sum_k c_k (X_k - mu_k)` under a joint table.
    pub fn from_table(table: &JointTable, weights: &[f64], centers: &[f64]) -> Self {
        let pairs = table
            .atoms()
            .map(|(a, p)| {
                let mut s = KahanSum::new();
                for ((x, c), mu) in a.iter().zip(weights).zip(centers) {
                    s.add(c * (x - mu));
                }
                (s.value(), p)
            })
            .collect();
        Self::from_pairs(pairs)
    }

    fn into_pairs(self) -> Vec<(f64, f64)> {
        self.values.into_iter().zip(self.probs).collect()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// `P{S > eps}`.
    pub fn upper_tail(&self, eps: f64) -> f64 {
        let mut s = KahanSum::new();
        for (v, p) in self.values.iter().zip(&self.probs) {
            if *v > eps {
                s.add(*p);
            }
        }
        s.value()
    }

    /// `P{|S| > eps}`.
    pub fn abs_tail(&self, eps: f64) -> f64 {
        let mut s = KahanSum::new();
        for (v, p) in self.values.iter().zip(&self.probs) {
            if v.abs() > eps {
                s.add(*p);
            }
        }
        s.value()
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| v * p)
            .collect::<KahanSum>()
            .value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_tails() {
        let pm = MarginalSpec::two_point(-1.0, 1.0, 0.5, 0.5);
        let law = DiscreteSumLaw::independent_sum(&vec![pm; 10]).unwrap();
        assert_eq!(law.support_len(), 11);
        assert_eq!(law.abs_tail(9.0), 2.0 / 1024.0);
        assert_eq!(law.abs_tail(10.0), 0.0);
        assert_eq!(law.upper_tail(8.0), 1.0 / 1024.0);
        // C(10,6) + ... + C(10,10) = 386 configurations with S > 0... S >= 2
        assert_eq!(law.upper_tail(0.0), 386.0 / 1024.0);
    }

    #[test]
    fn table_sum() {
        let t = JointTable::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap();
        let law = DiscreteSumLaw::from_table(&t, &[1.0, 1.0], &[0.5, 0.5]);
        assert_eq!(law.support_len(), 1);
        assert_eq!(law.abs_tail(0.0), 0.0);
    }
}
