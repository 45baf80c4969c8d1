use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::RngCore;

use crate::error::{domain, Error, Result};
use crate::numeric::{fmt_num, log_plus};
use crate::rng::{open_unit, stream, Purpose, RandomSeed};

use super::joint::JointTable;
use super::marginal::{normal_cdf, MarginalSpec};

/// Claimed dominating sequence `M_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum DominatingSequence {
    Constant(f64),
    /// `coef * n^exponent`
    Power {
        coef: f64,
        exponent: f64,
    },
    /// `coef * Log n`
    Log {
        coef: f64,
    },
    /// `values[n - 1]`, the last entry repeated beyond the table.
    Table(Vec<f64>),
}

impl DominatingSequence {
    pub fn value(&self, n: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Power { coef, exponent } => coef * n.max(1.0).powf(*exponent),
            Self::Log { coef } => coef * log_plus(n),
            Self::Table(v) => {
                let i = (n.max(1.0) as usize).min(v.len()).saturating_sub(1);
                v[i]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Constant(c) => *c >= 1.0 && c.is_finite(),
            Self::Power { coef, exponent } => {
                *coef >= 1.0 && *exponent >= 0.0 && coef.is_finite() && exponent.is_finite()
            }
            Self::Log { coef } => *coef >= 1.0 && coef.is_finite(),
            Self::Table(v) => !v.is_empty() && v.iter().all(|m| *m >= 1.0 && m.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(domain(format!("dominating sequence must satisfy M_n >= 1: {self}")))
        }
    }
}

impl fmt::Display for DominatingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "const({})", fmt_num(*c)),
            Self::Power { coef, exponent } => write!(f, "pow(coef={},exp={})", fmt_num(*coef), fmt_num(*exponent)),
            Self::Log { coef } => write!(f, "log(coef={})", fmt_num(*coef)),
            Self::Table(v) => {
                let items: Vec<String> = v.iter().map(|x| fmt_num(*x)).collect();
                write!(f, "table({})", items.join(" "))
            }
        }
    }
}

/// Marginal law of `X_{n,k}`; does not depend on `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum MarginalLayout {
    Identical(MarginalSpec),
    /// Coordinate `k` (1-based) has law `laws[(k - 1) % laws.len()]`.
    Cycle(Vec<MarginalSpec>),
}

impl MarginalLayout {
    pub fn get(&self, k: usize) -> &MarginalSpec {
        match self {
            Self::Identical(m) => m,
            Self::Cycle(v) => &v[(k - 1) % v.len()],
        }
    }

    /// Distinct laws in a row of length `n` with their multiplicities.
    pub fn groups(&self, n: usize) -> Vec<(&MarginalSpec, usize)> {
        match self {
            Self::Identical(m) => vec![(m, n)],
            Self::Cycle(v) => {
                let l = v.len();
                v.iter()
                    .enumerate()
                    .map(|(j, m)| (m, n / l + usize::from(j < n % l)))
                    .filter(|(_, c)| *c > 0)
                    .collect()
            }
        }
    }

    fn laws(&self) -> &[MarginalSpec] {
        match self {
            Self::Identical(m) => std::slice::from_ref(m),
            Self::Cycle(v) => v,
        }
    }
}

/// Weights `c_{n,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Weights {
    #[default]
    Unit,
    Constant(f64),
    /// `(-1)^(k+1)`
    Alternating,
    /// `(-1)^(n+k)`; varies with the row.
    RowAlternating,
}

impl Weights {
    #[inline]
    pub fn get(&self, n: usize, k: usize) -> f64 {
        match self {
            Self::Unit => 1.0,
            Self::Constant(c) => *c,
            Self::Alternating => {
                if k % 2 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::RowAlternating => {
                if (n + k).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    pub fn depends_on_row(&self) -> bool {
        matches!(self, Self::RowAlternating)
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Self::Constant(c) => c.abs(),
            _ => 1.0,
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Self::Unit) || matches!(self, Self::Constant(c) if *c == 1.0)
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unit => write!(f, "unit"),
            Self::Constant(c) => write!(f, "const({})", fmt_num(*c)),
            Self::Alternating => write!(f, "alternating"),
            Self::RowAlternating => write!(f, "row_alternating"),
        }
    }
}

/// Correlation matrix with a precomputed square-root factor.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianRow {
    corr: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl GaussianRow {
    pub fn new(corr: DMatrix<f64>) -> Result<Self> {
        let n = corr.nrows();
        if n == 0 || corr.ncols() != n {
            return Err(domain("correlation matrix must be square and nonempty"));
        }
        for i in 0..n {
            if (corr[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(domain(format!("correlation diagonal entry {i} is {}", corr[(i, i)])));
            }
            for j in 0..i {
                if (corr[(i, j)] - corr[(j, i)]).abs() > 1e-12 {
                    return Err(domain("correlation matrix is not symmetric"));
                }
                if corr[(i, j)] > 0.0 {
                    return Err(domain("off-diagonal correlations must be <= 0"));
                }
            }
        }
        let eig = SymmetricEigen::new(corr.clone());
        let min = eig.eigenvalues.min();
        if min < -1e-10 {
            return Err(domain(format!(
                "correlation matrix is not positive semidefinite (eigenvalue {min})"
            )));
        }
        let sqrt_vals = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
        let factor = &eig.eigenvectors * sqrt_vals;
        Ok(Self { corr, factor })
    }

    pub fn corr(&self) -> &DMatrix<f64> {
        &self.corr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GaussianStructure {
    /// Every off-diagonal equals `rho <= 0`; needs `1 + (n - 1) rho >= 0`.
    Equicorrelated {
        rho: f64,
    },
    /// Independent pairs `(1,2), (3,4), ...` with correlation `rho <= 0`.
    Pairs {
        rho: f64,
    },
    Explicit(BTreeMap<usize, GaussianRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dependence {
    Independent,
    /// FGM copula with `theta` in `[-1, 0]` on consecutive pairs
    /// `(1,2), (3,4), ...`, pairs mutually independent.
    FgmNegative {
        theta: f64,
    },
    GaussianCopula(GaussianStructure),
    /// Explicit joint table per row; the tables define the marginals.
    DiscreteJoint(BTreeMap<usize, JointTable>),
}

impl Dependence {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Independent => "independent",
            Self::FgmNegative { .. } => "fgm_negative",
            Self::GaussianCopula(_) => "gaussian_copula",
            Self::DiscreteJoint(_) => "discrete_joint",
        }
    }
}

/// Row-wise dependent triangular array `{X_{n,k}, 1 <= k <= n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularArrayModel {
    pub dependence: Dependence,
    pub marginals: MarginalLayout,
    pub claimed_m: DominatingSequence,
    pub weights: Weights,
}

impl TriangularArrayModel {
    pub fn independent(marginal: MarginalSpec) -> Self {
        Self {
            dependence: Dependence::Independent,
            marginals: MarginalLayout::Identical(marginal),
            claimed_m: DominatingSequence::Constant(1.0),
            weights: Weights::Unit,
        }
    }

    pub fn with_dependence(mut self, dependence: Dependence) -> Self {
        self.dependence = dependence;
        self
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = weights;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.claimed_m.validate()?;
        if let MarginalLayout::Cycle(v) = &self.marginals {
            if v.is_empty() {
                return Err(domain("marginal cycle is empty"));
            }
        }
        for m in self.marginals.laws() {
            m.validate()?;
        }
        if let Weights::Constant(c) = self.weights {
            if !c.is_finite() {
                return Err(domain("weights must be finite"));
            }
        }
        match &self.dependence {
            Dependence::Independent | Dependence::DiscreteJoint(_) => Ok(()),
            Dependence::FgmNegative { theta } => {
                if (-1.0..=0.0).contains(theta) {
                    Ok(())
                } else {
                    Err(domain(format!("fgm_negative needs theta in [-1, 0], got {theta}")))
                }
            }
            Dependence::GaussianCopula(GaussianStructure::Equicorrelated { rho })
            | Dependence::GaussianCopula(GaussianStructure::Pairs { rho }) => {
                if (-1.0..=0.0).contains(rho) {
                    Ok(())
                } else {
                    Err(domain(format!("gaussian copula needs rho in [-1, 0], got {rho}")))
                }
            }
            Dependence::GaussianCopula(GaussianStructure::Explicit(rows)) => {
                for (n, row) in rows {
                    if row.corr.nrows() != *n {
                        return Err(domain(format!(
                            "row {n} correlation matrix has size {}",
                            row.corr.nrows()
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    fn table(&self, n: usize) -> Result<Option<&JointTable>> {
        match &self.dependence {
            Dependence::DiscreteJoint(rows) => rows
                .get(&n)
                .map(Some)
                .ok_or_else(|| Error::Unsupported(format!("discrete_joint has no table for row {n}"))),
            _ => Ok(None),
        }
    }

    /// Law of `X_{n,k}` (1-based `k`), before weighting.
    pub fn marginal(&self, n: usize, k: usize) -> Result<MarginalSpec> {
        if k == 0 || k > n {
            return Err(domain(format!("coordinate {k} outside row {n}")));
        }
        match self.table(n)? {
            Some(t) => {
                if t.n() != n {
                    return Err(Error::Unsupported(format!("row {n} table has {} coordinates", t.n())));
                }
                Ok(t.marginal(k - 1))
            }
            None => Ok(self.marginals.get(k).clone()),
        }
    }

    /// Distinct laws of `X_{n,k}` in row `n` with multiplicities.
    pub fn row_laws(&self, n: usize) -> Result<Vec<(MarginalSpec, usize)>> {
        match self.table(n)? {
            Some(_) => (1..=n).map(|k| Ok((self.marginal(n, k)?, 1))).collect(),
            None => Ok(self
                .marginals
                .groups(n)
                .into_iter()
                .map(|(m, c)| (m.clone(), c))
                .collect()),
        }
    }

    /// Rows for which the model can be evaluated, up to `n_max`.
    pub fn rows_up_to(&self, n_max: usize) -> Vec<usize> {
        match &self.dependence {
            Dependence::DiscreteJoint(rows) => rows.keys().copied().filter(|n| *n <= n_max).collect(),
            _ => (1..=n_max).collect(),
        }
    }

    /// Distinct laws of `c_{n,k} X_{n,k}` in row `n` with multiplicities.
    pub fn weighted_row_laws(&self, n: usize) -> Result<Vec<(MarginalSpec, usize)>> {
        let identical_weights = matches!(self.weights, Weights::Unit | Weights::Constant(_));
        if self.table(n)?.is_none() && identical_weights {
            let c = self.weights.get(n, 1);
            return self
                .marginals
                .groups(n)
                .into_iter()
                .map(|(m, count)| Ok((m.scaled(c)?, count)))
                .collect();
        }
        if self.table(n)?.is_none() && matches!(self.marginals, MarginalLayout::Identical(_)) {
            let m = self.marginals.get(1);
            let plus = (1..=n).filter(|k| self.weights.get(n, *k) > 0.0).count();
            let mut out = Vec::new();
            if plus > 0 {
                out.push((m.clone(), plus));
            }
            if n > plus {
                out.push((m.scaled(-1.0)?, n - plus));
            }
            return Ok(out);
        }
        (1..=n)
            .map(|k| Ok((self.marginal(n, k)?.scaled(self.weights.get(n, k))?, 1)))
            .collect()
    }

    pub fn claimed_m(&self, n: usize) -> f64 {
        self.claimed_m.value(n as f64)
    }

    /// One draw of `(X_{n,1}, ..., X_{n,n})` (unweighted).
    pub fn sample_row<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        let mut out = vec![0.0; n];
        self.sample_row_into(rng, &mut out)?;
        Ok(out)
    }

    /// Deterministic draw keyed by `(seed, n, replication)`.
    pub fn sample_row_seeded(&self, n: usize, seed: RandomSeed, replication: u64) -> Result<Vec<f64>> {
        let mut rng = stream(seed, Purpose::Row, n as u64, replication);
        self.sample_row(n, &mut rng)
    }

    /// Fills `out` with one row of length `out.len()`.
    pub fn sample_row_into<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        let n = out.len();
        if n == 0 {
            return Err(domain("row length must be >= 1"));
        }
        if let Some(t) = self.table(n)? {
            if t.n() != n {
                return Err(Error::Unsupported(format!("row {n} table has {} coordinates", t.n())));
            }
            out.copy_from_slice(t.pick(open_unit(rng)));
            return Ok(());
        }
        self.sample_uniforms(rng, out)?;
        for (k, x) in out.iter_mut().enumerate() {
            *x = self.marginals.get(k + 1).quantile(*x);
        }
        Ok(())
    }

    /// Copula draw into `out`.
    fn sample_uniforms<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        let n = out.len();
        match &self.dependence {
            Dependence::Independent | Dependence::DiscreteJoint(_) => {
                for u in out.iter_mut() {
                    *u = open_unit(rng);
                }
            }
            Dependence::FgmNegative { theta } => {
                for pair in out.chunks_mut(2) {
                    let u = open_unit(rng);
                    pair[0] = u;
                    if pair.len() == 2 {
                        let w = open_unit(rng);
                        pair[1] = fgm_conditional_inverse(*theta, u, w);
                    }
                }
            }
            Dependence::GaussianCopula(structure) => {
                for z in out.iter_mut() {
                    *z = MarginalSpec::Normal { mean: 0.0, sd: 1.0 }.quantile(open_unit(rng));
                }
                match structure {
                    GaussianStructure::Equicorrelated { rho } => {
                        let spread = 1.0 + (n as f64 - 1.0) * rho;
                        if spread < -1e-12 {
                            return Err(Error::Unsupported(format!(
                                "equicorrelation {rho} is not positive semidefinite for row length {n}"
                            )));
                        }
                        let a = (1.0 - rho).sqrt();
                        let b = (-a + spread.max(0.0).sqrt()) / n as f64;
                        let total: f64 = out.iter().sum();
                        for z in out.iter_mut() {
                            *z = a * *z + b * total;
                        }
                    }
                    GaussianStructure::Pairs { rho } => {
                        let c = (1.0 - rho * rho).max(0.0).sqrt();
                        for pair in out.chunks_mut(2) {
                            if pair.len() == 2 {
                                pair[1] = rho * pair[0] + c * pair[1];
                            }
                        }
                    }
                    GaussianStructure::Explicit(rows) => {
                        let row = rows
                            .get(&n)
                            .ok_or_else(|| Error::Unsupported(format!("gaussian_copula has no matrix for row {n}")))?;
                        let z = nalgebra::DVector::from_column_slice(out);
                        let x = &row.factor * z;
                        out.copy_from_slice(x.as_slice());
                    }
                }
                for z in out.iter_mut() {
                    *z = normal_cdf(*z).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
                }
            }
        }
        Ok(())
    }
}

/// Second coordinate of an FGM pair given the first, by inverting
/// `C(v | u) = v + a v (1 - v)` with `a = theta (1 - 2u)`.
pub fn fgm_conditional_inverse(theta: f64, u: f64, w: f64) -> f64 {
    let a = theta * (1.0 - 2.0 * u);
    let b = 1.0 + a;
    let disc = (b * b - 4.0 * a * w).max(0.0);
    // rationalized root; reduces to w at a = 0
    (2.0 * w / (b + disc.sqrt())).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn fgm_inverse_solves_conditional_cdf() {
        for theta in [-1.0, -0.5, -1e-13] {
            for u in [0.1, 0.5, 0.9] {
                for w in [0.01, 0.3, 0.99] {
                    let v = fgm_conditional_inverse(theta, u, w);
                    let a = theta * (1.0 - 2.0 * u);
                    assert!((v + a * v * (1.0 - v) - w).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn fgm_joint_tail() {
        let model = TriangularArrayModel::independent(MarginalSpec::uniform(0.0, 1.0))
            .with_dependence(Dependence::FgmNegative { theta: -1.0 });
        let mut rng = stream(5, Purpose::Test, 2, 0);
        let reps = 100_000;
        let mut hits = 0;
        for _ in 0..reps {
            let x = model.sample_row(2, &mut rng).unwrap();
            if x[0] > 0.5 && x[1] > 0.5 {
                hits += 1;
            }
        }
        let p = hits as f64 / reps as f64;
        let se = (0.1875f64 * 0.8125 / reps as f64).sqrt();
        assert!((p - 0.1875).abs() < 4.0 * se, "{p}");
    }

    #[test]
    fn row_laws_with_weights() {
        let m = MarginalSpec::two_point(0.0, 2.0, 0.5, 0.5);
        let model = TriangularArrayModel::independent(m.clone()).with_weights(Weights::Alternating);
        let laws = model.weighted_row_laws(5).unwrap();
        assert_eq!(laws.len(), 2);
        assert_eq!(laws[0], (m.clone(), 3));
        assert_eq!(laws[1].1, 2);
        let cyc = TriangularArrayModel {
            marginals: MarginalLayout::Cycle(vec![m.clone(), MarginalSpec::uniform(0.0, 1.0)]),
            ..TriangularArrayModel::independent(m)
        };
        let g: Vec<usize> = cyc.weighted_row_laws(5).unwrap().iter().map(|x| x.1).collect();
        assert_eq!(g, vec![3, 2]);
    }

    #[test]
    fn missing_table_is_unsupported() {
        let model = TriangularArrayModel::independent(MarginalSpec::uniform(0.0, 1.0))
            .with_dependence(Dependence::DiscreteJoint(BTreeMap::new()));
        assert!(matches!(model.sample_row_seeded(3, 1, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn equicorrelation_psd_limit() {
        let model = TriangularArrayModel::independent(MarginalSpec::uniform(0.0, 1.0)).with_dependence(
            Dependence::GaussianCopula(GaussianStructure::Equicorrelated { rho: -0.5 }),
        );
        assert!(model.sample_row_seeded(3, 1, 0).is_ok());
        assert!(model.sample_row_seeded(4, 1, 0).is_err());
    }

    #[test]
    fn explicit_gaussian_rejects_bad_matrices() {
        let pos = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        assert!(GaussianRow::new(pos).is_err());
        let not_psd = DMatrix::from_row_slice(3, 3, &[1.0, -0.9, -0.9, -0.9, 1.0, -0.9, -0.9, -0.9, 1.0]);
        assert!(GaussianRow::new(not_psd).is_err());
        let ok = DMatrix::from_row_slice(2, 2, &[1.0, -0.4, -0.4, 1.0]);
        let row = GaussianRow::new(ok).unwrap();
        let ff = &row.factor * row.factor.transpose();
        assert!((ff[(0, 1)] + 0.4).abs() < 1e-12);
    }
}
