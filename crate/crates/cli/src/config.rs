//! Run configuration: defaults, key=value file parsing, overrides.
//!
//! The file format is flat `key = value` lines. `[section]` headers are
//! allowed for grouping but carry no meaning; keys live in one namespace
//! so `--set key=value` can override anything without path syntax. `#`
//! and `;` start comments. Every key has a default here, and the fully
//! resolved map is printed with each run and embedded in every artifact.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use selfcat::graph::{ComponentSet, TcClass, UnifiedParams};
use selfcat::trellis::{generators_from_octal, RationalGenerator};

/// Known keys with their defaults and the section they are listed under
/// in `--print-defaults` style output. Order here is the printing order.
const DEFAULTS: &[(&str, &str, &str)] = &[
    ("run", "operation", ""),
    ("run", "seed", "1"),
    ("run", "jobs", "1"),
    ("run", "out", "artifacts"),
    ("ensemble", "class", "pcc"),
    ("ensemble", "l1", ""),
    ("ensemble", "l2", ""),
    ("ensemble", "rho1", ""),
    ("ensemble", "rho2", ""),
    ("ensemble", "generator", "5/7"),
    ("ensemble", "generator2", "1/7,5/7"),
    ("ensemble", "wiring", "unified"),
    ("numerics", "tol", "1e-5"),
    ("numerics", "map_grid", "1e-4"),
    ("numerics", "max_iter", "100000"),
    ("numerics", "fp_tol", "1e-12"),
    ("channel", "eps", "0.6"),
    ("finite", "n", "10000"),
    ("finite", "frames", "200"),
    ("grid", "grid_points", "21"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    ThresholdBp,
    ThresholdMap,
    DeTrace,
    TransferGrid,
    Simulate,
    Table2,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::ThresholdBp => "threshold-bp",
            Operation::ThresholdMap => "threshold-map",
            Operation::DeTrace => "de-trace",
            Operation::TransferGrid => "transfer-grid",
            Operation::Simulate => "simulate",
            Operation::Table2 => "table2",
        }
    }
}

impl FromStr for Operation {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "threshold-bp" => Operation::ThresholdBp,
            "threshold-map" => Operation::ThresholdMap,
            "de-trace" => Operation::DeTrace,
            "transfer-grid" => Operation::TransferGrid,
            "simulate" => Operation::Simulate,
            "table2" => Operation::Table2,
            "" => bail!("operation is required (set it in the config file or via --set operation=...)"),
            other => bail!(
                "unknown operation {other:?} (expected threshold-bp, threshold-map, \
                 de-trace, transfer-grid, simulate or table2)"
            ),
        })
    }
}

/// Which factor graph a threshold operation analyzes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wiring {
    /// Single self-concatenated trellis with uniform permutations.
    Unified,
    /// The classic multi-trellis graph of the class.
    Original,
}

impl Wiring {
    pub fn name(self) -> &'static str {
        match self {
            Wiring::Unified => "unified",
            Wiring::Original => "original",
        }
    }
}

/// A fully resolved, validated run. `resolved` holds the exact key=value
/// map (defaults, file, overrides merged) that gets embedded in artifacts.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub operation: Operation,
    /// Set for the four named rows; `None` when explicit parameters were
    /// given. Operations on the original graphs require a named class.
    pub class: Option<TcClass>,
    pub params: UnifiedParams,
    pub gen: RationalGenerator,
    pub comps: ComponentSet,
    pub wiring: Wiring,
    pub tol: f64,
    pub map_grid: f64,
    pub max_iter: u64,
    pub fp_tol: f64,
    pub eps: Vec<f64>,
    pub n: usize,
    pub frames: u64,
    pub grid_points: usize,
    pub seed: u64,
    pub jobs: usize,
    pub out: PathBuf,
    pub resolved: BTreeMap<String, String>,
}

fn known_key(key: &str) -> bool {
    DEFAULTS.iter().any(|&(_, k, _)| k == key)
}

fn split_pair(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    Some((k.trim(), v.trim()))
}

/// Parses the flat key=value format into assignments, in file order.
/// Duplicate keys are rejected: the file is a statement of the run, not a
/// script, and a silently shadowed value is almost always an edit error.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find(['#', ';']) {
            Some(cut) => &raw[..cut],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') || line.len() < 3 {
                bail!("line {}: malformed section header {line:?}", idx + 1);
            }
            continue;
        }
        let Some((key, value)) = split_pair(line) else {
            bail!("line {}: expected key = value, got {line:?}", idx + 1);
        };
        if !known_key(key) {
            bail!("line {}: unknown key {key:?}", idx + 1);
        }
        if out.iter().any(|(k, _)| k == key) {
            bail!("line {}: duplicate key {key:?}", idx + 1);
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

/// One `--set key=value` override.
pub fn parse_set(arg: &str) -> Result<(String, String)> {
    let Some((key, value)) = split_pair(arg) else {
        bail!("--set expects key=value, got {arg:?}");
    };
    if !known_key(key) {
        bail!("--set: unknown key {key:?}");
    }
    Ok((key.to_string(), value.to_string()))
}

fn parse_num<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = &map[key];
    raw.parse()
        .map_err(|e| anyhow::anyhow!("{key} = {raw:?}: {e}"))
}

fn parse_eps_list(raw: &str) -> Result<Vec<f64>> {
    let eps: Vec<f64> = raw
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("eps list entry {s:?}")))
        .collect::<Result<_>>()?;
    if eps.is_empty() {
        bail!("eps list is empty");
    }
    for &e in &eps {
        if !(0.0..=1.0).contains(&e) {
            bail!("eps = {e} outside [0, 1]");
        }
    }
    Ok(eps)
}

/// Merges defaults, an optional config file, `--set` overrides and the
/// dedicated flag overrides, then validates everything the chosen
/// operation needs before any compute starts.
pub fn resolve(
    file_text: Option<&str>,
    sets: &[String],
    out_flag: Option<PathBuf>,
    seed_flag: Option<u64>,
    jobs_flag: Option<usize>,
) -> Result<RunConfig> {
    let mut map: BTreeMap<String, String> = DEFAULTS
        .iter()
        .map(|&(_, k, v)| (k.to_string(), v.to_string()))
        .collect();
    if let Some(text) = file_text {
        for (k, v) in parse_config_text(text)? {
            map.insert(k, v);
        }
    }
    for arg in sets {
        let (k, v) = parse_set(arg)?;
        map.insert(k, v);
    }
    if let Some(seed) = seed_flag {
        map.insert("seed".into(), seed.to_string());
    }
    if let Some(jobs) = jobs_flag {
        map.insert("jobs".into(), jobs.to_string());
    }
    if let Some(out) = &out_flag {
        map.insert("out".into(), out.display().to_string());
    }

    let operation: Operation = map["operation"].parse()?;

    let explicit = ["l1", "l2", "rho1", "rho2"]
        .iter()
        .any(|k| !map[*k].is_empty());
    let (class, params) = if explicit {
        if map["class"] != "custom" {
            bail!("l1/l2/rho1/rho2 are only read with class = custom; drop them or set class = custom");
        }
        let l1: u32 = parse_num(&map, "l1")?;
        let l2: u32 = parse_num(&map, "l2")?;
        let rho1: f64 = parse_num(&map, "rho1")?;
        let rho2 = match map["rho2"].as_str() {
            "" | "none" => None,
            raw => Some(raw.parse::<f64>().with_context(|| format!("rho2 = {raw:?}"))?),
        };
        (None, UnifiedParams::new(l1, l2, rho1, rho2)?)
    } else if map["class"] == "custom" {
        bail!("class = custom requires l1, l2, rho1 and rho2");
    } else {
        let class: TcClass = map["class"].parse()?;
        (Some(class), UnifiedParams::for_class(class))
    };

    let gens = generators_from_octal(&map["generator"])?;
    if gens.len() != 1 {
        bail!("generator must be a single feedforward/feedback octal pair");
    }
    let gen = gens[0];
    let rate2 = generators_from_octal(&map["generator2"])?;
    let comps = match rate2.as_slice() {
        &[a, b] => ComponentSet {
            rate1: gen,
            rate2: [a, b],
        },
        other => bail!("generator2 must list exactly two octal pairs, got {}", other.len()),
    };

    let wiring = match map["wiring"].as_str() {
        "unified" => Wiring::Unified,
        "original" => Wiring::Original,
        other => bail!("wiring = {other:?} (expected unified or original)"),
    };

    let cfg = RunConfig {
        operation,
        class,
        params,
        gen,
        comps,
        wiring,
        tol: parse_num(&map, "tol")?,
        map_grid: parse_num(&map, "map_grid")?,
        max_iter: parse_num(&map, "max_iter")?,
        fp_tol: parse_num(&map, "fp_tol")?,
        eps: parse_eps_list(&map["eps"])?,
        n: parse_num(&map, "n")?,
        frames: parse_num(&map, "frames")?,
        grid_points: parse_num(&map, "grid_points")?,
        seed: parse_num(&map, "seed")?,
        jobs: parse_num(&map, "jobs")?,
        out: PathBuf::from(&map["out"]),
        resolved: map,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if cfg.jobs == 0 {
        bail!("jobs must be at least 1");
    }
    match cfg.operation {
        Operation::ThresholdBp => {
            if cfg.wiring == Wiring::Original && cfg.class.is_none() {
                bail!("wiring = original needs a named class (the multi-trellis graphs exist per class)");
            }
        }
        Operation::ThresholdMap => {
            if cfg.wiring == Wiring::Original {
                bail!("threshold-map is defined on the unified recursion; wiring = original is not supported");
            }
        }
        Operation::DeTrace => {
            if cfg.eps.len() != 1 {
                bail!("de-trace follows one channel parameter; give a single eps value");
            }
            if cfg.max_iter == 0 {
                bail!("max_iter must be at least 1");
            }
        }
        Operation::TransferGrid => {
            if cfg.grid_points < 2 {
                bail!("grid_points must be at least 2 to include both endpoints");
            }
        }
        Operation::Simulate => {
            if cfg.n == 0 {
                bail!("n must be positive");
            }
            if cfg.frames == 0 {
                bail!("frames must be at least 1");
            }
        }
        Operation::Table2 => {}
    }
    Ok(())
}

/// The resolved config as printable lines, grouped under the section
/// headers the defaults table defines. Also the artifact embedding order.
pub fn config_lines(resolved: &BTreeMap<String, String>) -> Vec<String> {
    let mut lines = Vec::new();
    let mut last_section = "";
    for &(section, key, _) in DEFAULTS {
        if section != last_section {
            lines.push(format!("[{section}]"));
            last_section = section;
        }
        lines.push(format!("{key} = {}", resolved[key]));
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_alone_need_only_an_operation() {
        let err = resolve(None, &[], None, None, None).unwrap_err();
        assert!(err.to_string().contains("operation is required"));
        let cfg = resolve(None, &["operation=table2".into()], None, None, None).unwrap();
        assert_eq!(cfg.operation, Operation::Table2);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.gen.to_octal(), "5/7");
    }

    #[test]
    fn file_then_set_then_flags_win_in_that_order() {
        let text = "[run]\noperation = de-trace\nseed = 7\n[channel]\neps = 0.5\n";
        let cfg = resolve(
            Some(text),
            &["eps=0.55".into()],
            None,
            Some(99),
            None,
        )
        .unwrap();
        assert_eq!(cfg.eps, vec![0.55]);
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.resolved["seed"], "99");
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        assert!(parse_config_text("speed = 3\n").is_err());
        assert!(parse_config_text("seed = 3\nseed = 4\n").is_err());
        assert!(parse_config_text("[run\nseed = 3\n").is_err());
        assert!(parse_set("nope=1").is_err());
    }

    #[test]
    fn custom_rows_need_all_four_parameters() {
        let args: Vec<String> = vec![
            "operation=threshold-bp".into(),
            "class=custom".into(),
            "l1=2".into(),
            "l2=1".into(),
            "rho1=1.0".into(),
            "rho2=1.0".into(),
        ];
        let cfg = resolve(None, &args, None, None, None).unwrap();
        assert!(cfg.class.is_none());
        assert_eq!(cfg.params, UnifiedParams::for_class(TcClass::Scc));
        assert!(resolve(None, &["operation=threshold-bp".into(), "class=custom".into()], None, None, None).is_err());
        assert!(resolve(
            None,
            &["operation=threshold-bp".into(), "l1=2".into()],
            None,
            None,
            None
        )
        .is_err());
    }

    #[test]
    fn original_wiring_requires_a_named_class() {
        let args: Vec<String> = vec![
            "operation=threshold-bp".into(),
            "wiring=original".into(),
            "class=custom".into(),
            "l1=2".into(),
            "l2=0".into(),
            "rho1=1.0".into(),
        ];
        assert!(resolve(None, &args, None, None, None).is_err());
    }
}
