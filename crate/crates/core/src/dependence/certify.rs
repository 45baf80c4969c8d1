use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{fmt_num, stable_sum};

use super::joint::JointTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertMode {
    Uend,
    Lend,
    End,
}

impl std::str::FromStr for CertMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uend" => Ok(Self::Uend),
            "lend" => Ok(Self::Lend),
            "end" => Ok(Self::End),
            _ => Err(Error::Domain(format!("unknown certification mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertStatus {
    /// The table is the law itself; the enumeration is exhaustive.
    Exact,
    /// The table discretizes a continuous law; the constant is only a
    /// lower bound for the continuous model.
    GridLowerBound,
}

impl fmt::Display for CertStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::GridLowerBound => "grid_lower_bound",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub max_coordinates: usize,
    pub max_values_per_coordinate: usize,
    pub status: CertStatus,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            max_coordinates: 4,
            max_values_per_coordinate: 6,
            status: CertStatus::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndCertificate {
    pub row: usize,
    pub m_uend: f64,
    pub m_lend: f64,
    /// Maximum over the sides selected by the mode.
    pub m_end: f64,
    pub mode: CertMode,
    /// Number of cut points per coordinate.
    pub cuts_per_coordinate: Vec<usize>,
    pub thresholds_checked: usize,
    pub status: CertStatus,
}

impl EndCertificate {
    pub fn threshold_grid(&self) -> String {
        let sizes: Vec<String> = self.cuts_per_coordinate.iter().map(|c| c.to_string()).collect();
        format!(
            "atoms +/- half-gap, {} = {} vectors",
            sizes.join("x"),
            self.thresholds_checked
        )
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.row,
            fmt_num(self.m_uend),
            fmt_num(self.m_lend),
            fmt_num(self.m_end),
            self.status
        )
    }
}

/// Cut points for one coordinate: every value, one below the minimum and
/// one above the maximum, offset by half the smallest gap.
fn cut_points(values: &[f64]) -> Vec<f64> {
    let half_gap = values
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]))
        .fold(f64::INFINITY, f64::min);
    let h = if half_gap.is_finite() { half_gap } else { 0.5 };
    let mut cuts = Vec::with_capacity(values.len() + 2);
    cuts.push(values[0] - h);
    cuts.extend_from_slice(values);
    cuts.push(values[values.len() - 1] + h);
    cuts
}

/// Side of a certificate: running maximum ratio or the first witness of an
/// infinite ratio.
struct Side {
    name: &'static str,
    max_ratio: f64,
    infinite_at: Option<(f64, Vec<f64>)>,
}

impl Side {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            max_ratio: 0.0,
            infinite_at: None,
        }
    }

    fn observe(&mut self, joint: f64, product: f64, x: &[f64]) {
        if product > 0.0 {
            self.max_ratio = self.max_ratio.max(joint / product);
        } else if joint > 0.0 && self.infinite_at.is_none() {
            self.infinite_at = Some((joint, x.to_vec()));
        }
    }

    fn value(&self) -> f64 {
        if self.infinite_at.is_some() {
            f64::INFINITY
        } else {
            self.max_ratio
        }
    }

    fn fail(&self) -> Option<Error> {
        self.infinite_at.as_ref().map(|(joint, x)| Error::NotEnd {
            side: self.name,
            joint: *joint,
            thresholds: x.clone(),
        })
    }
}

pub fn certify_end_row(joint: &JointTable, mode: CertMode) -> Result<EndCertificate> {
    certify_end_row_with(joint, mode, &CertifyOptions::default())
}

/// Smallest `M` with `P{X > x} <= M prod P{X_k > x_k}` (UEND) and
/// `P{X <= x} <= M prod P{X_k <= x_k}` (LEND) over all cut vectors.
pub fn certify_end_row_with(joint: &JointTable, mode: CertMode, opts: &CertifyOptions) -> Result<EndCertificate> {
    let n = joint.n();
    if n > opts.max_coordinates {
        return Err(Error::InvalidTable(format!(
            "{n} coordinates exceed the certification limit of {}",
            opts.max_coordinates
        )));
    }
    let values: Vec<Vec<f64>> = (0..n).map(|k| joint.coordinate_values(k)).collect();
    if let Some(v) = values.iter().find(|v| v.len() > opts.max_values_per_coordinate) {
        return Err(Error::InvalidTable(format!(
            "{} distinct values exceed the per-coordinate limit of {}",
            v.len(),
            opts.max_values_per_coordinate
        )));
    }
    let cuts: Vec<Vec<f64>> = values.iter().map(|v| cut_points(v)).collect();

    // marginal upper tails at each cut: P{X_k > c}
    let marginals: Vec<_> = (0..n).map(|k| joint.marginal(k)).collect();
    let upper: Vec<Vec<f64>> = cuts
        .iter()
        .zip(&marginals)
        .map(|(cs, m)| cs.iter().map(|c| m.survival(*c)).collect())
        .collect();
    let lower: Vec<Vec<f64>> = cuts
        .iter()
        .zip(&marginals)
        .map(|(cs, m)| cs.iter().map(|c| m.cdf(*c)).collect())
        .collect();

    let mut uend = Side::new("upper");
    let mut lend = Side::new("lower");
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut checked = 0usize;
    loop {
        for k in 0..n {
            x[k] = cuts[k][idx[k]];
        }
        let up_prod: f64 = (0..n).map(|k| upper[k][idx[k]]).product();
        let lo_prod: f64 = (0..n).map(|k| lower[k][idx[k]]).product();
        let (mut up_joint, mut lo_joint) = (Vec::new(), Vec::new());
        for (a, p) in joint.atoms() {
            if a.iter().zip(&x).all(|(ai, xi)| ai > xi) {
                up_joint.push(p);
            }
            if a.iter().zip(&x).all(|(ai, xi)| ai <= xi) {
                lo_joint.push(p);
            }
        }
        uend.observe(stable_sum(up_joint), up_prod, &x);
        lend.observe(stable_sum(lo_joint), lo_prod, &x);
        checked += 1;

        // odometer over cut indices
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < cuts[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }

    let selected: &[&Side] = match mode {
        CertMode::Uend => &[&uend],
        CertMode::Lend => &[&lend],
        CertMode::End => &[&uend, &lend],
    };
    if let Some(e) = selected.iter().find_map(|s| s.fail()) {
        return Err(e);
    }
    let m_end = selected.iter().map(|s| s.value()).fold(0.0, f64::max);
    Ok(EndCertificate {
        row: n,
        m_uend: uend.value(),
        m_lend: lend.value(),
        m_end,
        mode,
        cuts_per_coordinate: cuts.iter().map(Vec::len).collect(),
        thresholds_checked: checked,
        status: opts.status,
    })
}

/// Certificate for the bivariate FGM copula discretized on a `g x g` grid.
pub fn certify_fgm_discretization(theta: f64, g: usize) -> Result<EndCertificate> {
    let table = JointTable::fgm_grid(theta, g)?;
    let opts = CertifyOptions {
        max_coordinates: 2,
        max_values_per_coordinate: g,
        status: CertStatus::GridLowerBound,
    };
    certify_end_row_with(&table, CertMode::End, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::MarginalSpec;

    #[test]
    fn product_measure_certifies_one() {
        let t = JointTable::product(&[
            MarginalSpec::two_point(-1.0, 1.0, 0.25, 0.75),
            MarginalSpec::Discrete {
                atoms: vec![0.0, 1.0, 3.0],
                probs: vec![0.125, 0.5, 0.375],
            },
        ])
        .unwrap();
        let c = certify_end_row(&t, CertMode::End).unwrap();
        assert_eq!((c.m_uend, c.m_lend, c.m_end), (1.0, 1.0, 1.0));
        assert_eq!(c.cuts_per_coordinate, vec![4, 5]);
        assert_eq!(c.thresholds_checked, 20);
    }

    #[test]
    fn anti_correlated_pair() {
        // P{(0,1)} = P{(1,0)} = 1/2: every orthant with positive joint mass
        // has a marginal product of at least the joint, with equality at the
        // cut vectors that only constrain one coordinate.
        let t = JointTable::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap();
        let c = certify_end_row(&t, CertMode::End).unwrap();
        assert_eq!(c.m_uend, 1.0);
        assert_eq!(c.m_lend, 1.0);
        assert_eq!(c.m_end, 1.0);
    }

    #[test]
    fn comonotone_pair_needs_two() {
        let t = JointTable::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![0.5, 0.5]).unwrap();
        let c = certify_end_row(&t, CertMode::End).unwrap();
        assert_eq!(c.m_uend, 2.0);
        assert_eq!(c.m_lend, 2.0);
    }

    #[test]
    fn degenerate_coordinate_skips_zero_over_zero() {
        let t = JointTable::new(vec![vec![0.0, 2.0], vec![1.0, 2.0]], vec![0.5, 0.5]).unwrap();
        let c = certify_end_row(&t, CertMode::End).unwrap();
        assert_eq!(c.m_end, 1.0);
    }

    #[test]
    fn mode_selects_sides() {
        let t = JointTable::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(certify_end_row(&t, CertMode::Uend).unwrap().m_end, 2.0);
        assert_eq!(certify_end_row(&t, CertMode::Lend).unwrap().m_end, 2.0);
    }

    #[test]
    fn limits_are_enforced() {
        let xs: Vec<f64> = (0..7).map(f64::from).collect();
        let mut probs = vec![0.125; 6];
        probs.push(0.25);
        let t = JointTable::product(&[MarginalSpec::Discrete { atoms: xs, probs }]).unwrap();
        assert!(matches!(
            certify_end_row(&t, CertMode::End),
            Err(Error::InvalidTable(_))
        ));
    }

    #[test]
    fn fgm_negative_discretizations() {
        for g in [3, 5, 9] {
            let c = certify_fgm_discretization(-1.0, g).unwrap();
            assert!(c.m_end <= 1.0 + 1e-9, "g={g}: {}", c.m_end);
            assert_eq!(c.status, CertStatus::GridLowerBound);
        }
        let c = certify_fgm_discretization(0.5, 5).unwrap();
        assert!(c.m_end > 1.0);
    }
}
