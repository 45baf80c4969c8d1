//! Line-oriented `key = value` configs with `[section]` headers.
//!
//! A config resolves to a [`RunConfig`]: the same data a named preset
//! provides, so presets and files go through one code path and every run
//! can echo its fully resolved config.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use endlab_core::dependence::{
    parse_joint_tables, Dependence, GaussianStructure, MarginalLayout, TriangularArrayModel,
};
use endlab_core::norming::{AsymptoticOptions, CheckOptions, NormingScheme, Sequence, TruncMoment};
use endlab_core::numeric::fmt_num;
use endlab_core::simulate::{
    dyadic_schedule, BoundKind, Center, CheckTarget, ExperimentPlan, Preset, Semantics, PRESET_EPSILONS,
};

use crate::calls::{
    parse_dependence, parse_dominating, parse_law, parse_num, parse_num_list, parse_sequence, parse_weights, Call,
    DependenceSpec,
};

const DEFAULT_REPLICATIONS: usize = 1000;

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "model",
        &["dependence", "marginal", "marginals", "weights", "claimed_m"],
    ),
    ("scheme", &["a", "b", "s"]),
    (
        "check",
        &[
            "target",
            "dominating",
            "alpha",
            "margin",
            "deltas",
            "n_probe",
            "n_list",
            "domination_n_max",
            "domination_t_grid",
        ],
    ),
    (
        "plan",
        &[
            "name",
            "epsilons",
            "n_schedule",
            "replications",
            "seed",
            "center",
            "semantics",
        ],
    ),
    ("bound", &["kind", "lambda", "p"]),
    ("output", &["dir"]),
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed but unresolved config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

impl RawConfig {
    /// Parses a config, or the `# `-prefixed header block of an output file
    /// (detected by a first line of the form `# [section]`).
    pub fn parse(text: &str) -> Result<Self> {
        let echoed = text.lines().next().is_some_and(|l| l.starts_with("# ["));
        if echoed {
            let body: String = text
                .lines()
                .map_while(|l| l.strip_prefix("# "))
                .map(|l| format!("{l}\n"))
                .collect();
            return Self::parse_plain(&body);
        }
        Self::parse_plain(text)
    }

    fn parse_plain(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    bail!("line {line_no}: unknown section [{name}]");
                }
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {line_no}: expected `key = value`, got {line:?}"))?;
            let (key, value) = (key.trim(), value.trim());
            let section = current
                .as_ref()
                .ok_or_else(|| anyhow!("line {line_no}: `{key}` appears before any [section]"))?;
            let allowed = SECTIONS.iter().find(|(s, _)| s == section).unwrap().1;
            if !allowed.contains(&key) {
                bail!("line {line_no}: unknown key `{key}` in [{section}]");
            }
            let map = sections.get_mut(section).unwrap();
            if map.contains_key(key) {
                bail!("line {line_no}: duplicate key `{key}` in [{section}]");
            }
            map.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line: line_no,
                },
            );
        }
        Ok(Self { sections })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section)?.get(key)
    }

    fn with<T>(&self, section: &str, key: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .with_context(|| format!("line {}: [{section}] {key}", e.line)),
        }
    }

    fn required<T>(&self, section: &str, key: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<T> {
        self.with(section, key, f)?
            .ok_or_else(|| anyhow!("missing required key `{key}` in [{section}]"))
    }
}

/// Fully resolved run: model, scheme, plan, check options and output dir.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    /// Source of a `discrete_joint` model, echoed as given.
    pub joint_file: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .with_context(|| format!("not a nonnegative integer: {s:?}"))
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(parse_usize).collect()
}

fn parse_schedule(s: &str) -> Result<Vec<usize>> {
    if s.trim_start().starts_with("dyadic") {
        let mut c = Call::parse(s)?;
        let (lo, hi) = (c.num("lo", 0)?, c.num("hi", 1)?);
        c.finish()?;
        if lo.fract() != 0.0 || hi.fract() != 0.0 || !(0.0..=31.0).contains(&lo) || !(lo..=31.0).contains(&hi) {
            bail!("dyadic(lo, hi) needs integers 0 <= lo <= hi <= 31");
        }
        return Ok(dyadic_schedule(lo as u32, hi as u32));
    }
    parse_usize_list(s)
}

fn resolve_sequence(text: &str, a: Option<&Sequence>, dominating: &endlab_core::MarginalSpec) -> Result<Sequence> {
    match parse_sequence(text)? {
        Ok(s) => Ok(s),
        Err(scale) => {
            let a = a.ok_or_else(|| anyhow!("trunc2 is only available for s"))?;
            Ok(Sequence::TruncSecondMoment(Arc::new(TruncMoment::new(
                scale,
                dominating.clone(),
                a.clone(),
            )?)))
        }
    }
}

impl RunConfig {
    pub fn from_preset(preset: Preset) -> Self {
        Self {
            preset,
            joint_file: None,
            out_dir: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let raw = RawConfig::parse(&text).with_context(|| format!("in {}", path.display()))?;
        Self::resolve(&raw, path.parent().unwrap_or(Path::new("."))).with_context(|| format!("in {}", path.display()))
    }

    /// Relative `discrete_joint` files resolve against `base`.
    pub fn resolve(raw: &RawConfig, base: &Path) -> Result<Self> {
        // model
        let layout = match (raw.get("model", "marginal"), raw.get("model", "marginals")) {
            (Some(_), Some(_)) => bail!("[model] takes `marginal` or `marginals`, not both"),
            (Some(_), None) => MarginalLayout::Identical(raw.required("model", "marginal", parse_law)?),
            (None, Some(_)) => MarginalLayout::Cycle(raw.required("model", "marginals", |s| {
                s.split(';').map(parse_law).collect::<Result<Vec<_>>>()
            })?),
            (None, None) => bail!("[model] needs `marginal` or `marginals`"),
        };
        let dep = raw
            .with("model", "dependence", parse_dependence)?
            .unwrap_or(DependenceSpec::Ready(Dependence::Independent));
        let (dependence, joint_file) = match dep {
            DependenceSpec::Ready(d) => (d, None),
            DependenceSpec::JointFile(p) => {
                let full = if p.is_absolute() { p.clone() } else { base.join(&p) };
                let text =
                    std::fs::read_to_string(&full).with_context(|| format!("reading joint file {}", full.display()))?;
                let tables = parse_joint_tables(&text)?.into_iter().collect();
                (Dependence::DiscreteJoint(tables), Some(full))
            }
        };
        let mut model = TriangularArrayModel::independent(layout.get(1).clone()).with_dependence(dependence);
        model.marginals = layout;
        if let Some(w) = raw.with("model", "weights", parse_weights)? {
            model.weights = w;
        }
        if let Some(m) = raw.with("model", "claimed_m", parse_dominating)? {
            model.claimed_m = m;
        }
        model.validate()?;

        // check, needed first for trunc2
        let mut check = CheckOptions::default();
        let dominating = match raw.with("check", "dominating", parse_law)? {
            Some(d) => d,
            None => match &model.marginals {
                MarginalLayout::Identical(m) if !matches!(model.dependence, Dependence::DiscreteJoint(_)) => m.clone(),
                _ => bail!("[check] dominating is required unless the model has one identical marginal"),
            },
        };
        let target = raw
            .with("check", "target", |s| match s {
                "theorem1" => Ok(CheckTarget::Theorem1),
                "lemma3" => Ok(CheckTarget::Lemma3),
                other => bail!("unknown target {other:?}; expected theorem1 or lemma3"),
            })?
            .unwrap_or(CheckTarget::Theorem1);
        if let Some(v) = raw.with("check", "alpha", parse_num)? {
            check.alpha = v;
        }
        let mut asymptotic = AsymptoticOptions::default();
        if let Some(v) = raw.with("check", "margin", parse_num)? {
            asymptotic.margin = v;
        }
        if let Some(v) = raw.with("check", "deltas", parse_num_list)? {
            asymptotic.deltas = v;
        }
        if let Some(v) = raw.with("check", "n_probe", parse_num_list)? {
            asymptotic.n_probe = v;
        }
        check.asymptotic = asymptotic;
        if let Some(v) = raw.with("check", "n_list", parse_usize_list)? {
            check.n_list = v;
        }
        if let Some(v) = raw.with("check", "domination_n_max", parse_usize)? {
            check.domination_n_max = v;
        }
        if let Some(v) = raw.with("check", "domination_t_grid", parse_num_list)? {
            check.domination_t_grid = v;
        }

        // scheme
        let a = raw.required("scheme", "a", |s| resolve_sequence(s, None, &dominating))?;
        let b = raw.required("scheme", "b", |s| resolve_sequence(s, None, &dominating))?;
        let s = raw.required("scheme", "s", |s| resolve_sequence(s, Some(&a), &dominating))?;
        let scheme = NormingScheme::new(a, b, s)?;

        // plan
        let bound = match raw.with("bound", "kind", |s| Ok(s.to_string()))?.as_deref() {
            None | Some("bennett") => BoundKind::Bennett,
            Some("bernstein") => BoundKind::Bernstein,
            Some("fuk_nagaev") => BoundKind::FukNagaev {
                lambda: raw.required("bound", "lambda", parse_num)?,
                p: raw.required("bound", "p", parse_num)?,
            },
            Some(other) => bail!("unknown bound kind {other:?}"),
        };
        if !matches!(bound, BoundKind::FukNagaev { .. })
            && (raw.get("bound", "lambda").is_some() || raw.get("bound", "p").is_some())
        {
            bail!("[bound] lambda and p only apply to kind = fuk_nagaev");
        }
        let plan = ExperimentPlan {
            name: raw
                .with("plan", "name", |s| Ok(s.to_string()))?
                .unwrap_or_else(|| "experiment".into()),
            model,
            scheme,
            epsilons: raw
                .with("plan", "epsilons", parse_num_list)?
                .unwrap_or_else(|| PRESET_EPSILONS.to_vec()),
            n_schedule: raw
                .with("plan", "n_schedule", parse_schedule)?
                .unwrap_or_else(|| dyadic_schedule(4, 16)),
            replications: raw
                .with("plan", "replications", parse_usize)?
                .unwrap_or(DEFAULT_REPLICATIONS),
            seed: raw
                .with("plan", "seed", |s| {
                    s.trim()
                        .parse::<u64>()
                        .with_context(|| format!("seed must be a u64, got {s:?}"))
                })?
                .unwrap_or(0),
            center: raw
                .with("plan", "center", |s| match s {
                    "subtract_mean" => Ok(Center::SubtractMean),
                    "none" => Ok(Center::None),
                    other => bail!("unknown center {other:?}"),
                })?
                .unwrap_or_default(),
            semantics: raw
                .with("plan", "semantics", |s| match s {
                    "triangular" => Ok(Semantics::Triangular),
                    "sequence" => Ok(Semantics::Sequence),
                    other => bail!("unknown semantics {other:?}"),
                })?
                .unwrap_or_default(),
            bound,
        };
        if plan.name.is_empty() || plan.name.contains([',', '"', '\n']) {
            bail!("plan name must be nonempty and free of commas and quotes");
        }
        let out_dir = raw.with("output", "dir", |s| Ok(PathBuf::from(s)))?;
        Ok(Self {
            preset: Preset {
                plan,
                dominating,
                target,
                check,
            },
            joint_file,
            out_dir,
        })
    }

    /// Config text that resolves to this run (output dir excluded).
    pub fn to_config_text(&self) -> Result<String> {
        let p = &self.preset;
        let plan = &p.plan;
        let model = &plan.model;
        let nums = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", ");
        let ints = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let dependence = match &model.dependence {
            Dependence::Independent => "independent".to_string(),
            Dependence::FgmNegative { theta } => format!("fgm_negative(theta={})", fmt_num(*theta)),
            Dependence::GaussianCopula(GaussianStructure::Equicorrelated { rho }) => {
                format!("gaussian_equicorrelated(rho={})", fmt_num(*rho))
            }
            Dependence::GaussianCopula(GaussianStructure::Pairs { rho }) => {
                format!("gaussian_pairs(rho={})", fmt_num(*rho))
            }
            Dependence::GaussianCopula(GaussianStructure::Explicit(_)) => {
                bail!("explicit gaussian correlation matrices cannot be written as a config")
            }
            Dependence::DiscreteJoint(_) => {
                let f = self
                    .joint_file
                    .as_ref()
                    .ok_or_else(|| anyhow!("discrete_joint model without a source file"))?;
                format!("discrete_joint(file={})", f.display())
            }
        };
        let _ = writeln!(out, "[model]\ndependence = {dependence}");
        match &model.marginals {
            MarginalLayout::Identical(m) => {
                let _ = writeln!(out, "marginal = {m}");
            }
            MarginalLayout::Cycle(v) => {
                let items: Vec<String> = v.iter().map(|m| m.to_string()).collect();
                let _ = writeln!(out, "marginals = {}", items.join("; "));
            }
        }
        let _ = writeln!(out, "weights = {}\nclaimed_m = {}", model.weights, model.claimed_m);
        let _ = writeln!(
            out,
            "[scheme]\na = {}\nb = {}\ns = {}",
            plan.scheme.a, plan.scheme.b, plan.scheme.s
        );
        let _ = writeln!(
            out,
            "[check]\ntarget = {}\ndominating = {}\nalpha = {}\nmargin = {}\ndeltas = {}\nn_probe = {}\nn_list = {}\ndomination_n_max = {}\ndomination_t_grid = {}",
            match p.target {
                CheckTarget::Theorem1 => "theorem1",
                CheckTarget::Lemma3 => "lemma3",
            },
            p.dominating,
            fmt_num(p.check.alpha),
            fmt_num(p.check.asymptotic.margin),
            nums(&p.check.asymptotic.deltas),
            nums(&p.check.asymptotic.n_probe),
            ints(&p.check.n_list),
            p.check.domination_n_max,
            nums(&p.check.domination_t_grid),
        );
        let _ = writeln!(
            out,
            "[plan]\nname = {}\nepsilons = {}\nn_schedule = {}\nreplications = {}\nseed = {}\ncenter = {}\nsemantics = {}",
            plan.name,
            nums(&plan.epsilons),
            ints(&plan.n_schedule),
            plan.replications,
            plan.seed,
            plan.center,
            plan.semantics
        );
        match plan.bound {
            BoundKind::Bennett => out.push_str("[bound]\nkind = bennett\n"),
            BoundKind::Bernstein => out.push_str("[bound]\nkind = bernstein\n"),
            BoundKind::FukNagaev { lambda, p } => {
                let _ = writeln!(
                    out,
                    "[bound]\nkind = fuk_nagaev\nlambda = {}\np = {}",
                    fmt_num(lambda),
                    fmt_num(p)
                );
            }
        }
        Ok(out)
    }

    /// The resolved config as `# `-prefixed lines.
    pub fn echo(&self) -> Result<String> {
        Ok(self.to_config_text()?.lines().map(|l| format!("# {l}\n")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use endlab_core::simulate::preset;

    #[test]
    fn presets_round_trip() {
        for name in [
            "corollary1-p0.25",
            "corollary1-p0.75",
            "corollary1-p1.5",
            "theorem2-p1.5",
        ] {
            let rc = RunConfig::from_preset(preset(name, 42).unwrap());
            let back = RunConfig::resolve(&RawConfig::parse(&rc.echo().unwrap()).unwrap(), Path::new(".")).unwrap();
            assert_eq!(back, rc, "{name}");
        }
    }

    #[test]
    fn unknown_keys_and_sections_fail() {
        assert!(RawConfig::parse("[model]\nmarginal = uniform(lo=0,hi=1)\ncolour = red\n").is_err());
        assert!(RawConfig::parse("[models]\n").is_err());
        assert!(RawConfig::parse("marginal = uniform(lo=0,hi=1)\n").is_err());
        assert!(RawConfig::parse("[plan]\nseed = 1\nseed = 2\n").is_err());
    }

    #[test]
    fn minimal_config_resolves() {
        let text = "[model]\nmarginal = uniform(lo=-1,hi=1)\n[scheme]\na = pow(exp=1,scale=1)\nb = pow(exp=1,scale=1)\ns = pow(exp=1,scale=1)\n[plan]\nepsilons = 0.5\nreplications = 100\nseed = 3\nn_schedule = dyadic(lo=2,hi=5)\n";
        let rc = RunConfig::resolve(&RawConfig::parse(text).unwrap(), Path::new(".")).unwrap();
        assert_eq!(rc.preset.plan.n_schedule, vec![4, 8, 16, 32]);
        assert_eq!(rc.preset.plan.seed, 3);
    }

    #[test]
    fn inline_comments_and_plan_defaults() {
        let text = "# scheme only\n[model]\nmarginal = uniform(lo=-1,hi=1)  # bounded\n[scheme]\na = pow(exp=1,scale=1)\nb = pow(exp=1,scale=1) # b\ns = pow(exp=1,scale=1)\n";
        let rc = RunConfig::resolve(&RawConfig::parse(text).unwrap(), Path::new(".")).unwrap();
        assert_eq!(rc.preset.plan.epsilons, PRESET_EPSILONS.to_vec());
        assert_eq!(rc.preset.plan.replications, DEFAULT_REPLICATIONS);
        assert_eq!(rc.preset.plan.seed, 0);
    }
}
