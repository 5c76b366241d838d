//! Experiment configuration: `key = value` lines grouped under `[section]`
//! headers, with command-line overrides `section.key=value`.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::ModelKind;

/// Known keys and their defaults. Keys outside any section belong to `run`.
const DEFAULTS: &[(&str, &str)] = &[
    ("dispersive.alpha", "2"),
    ("dispersive.beta", "1"),
    ("dispersive.t", "0,0.25,0.5,1,2"),
    ("heat.t", "1"),
    ("model.kind", "torus:1:64"),
    ("model.max_size", "4096"),
    ("model.s0", "4"),
    ("multiplier.beta", "2"),
    ("multiplier.epsilon", "0.1"),
    ("multiplier.j_max", "auto"),
    ("multiplier.j_min", "auto"),
    ("multiplier.s_max", "3"),
    ("multiplier.slack", "0.01"),
    ("multiplier.theta", "1"),
    ("riesz.alpha", "1"),
    ("riesz.k", "1"),
    ("riesz.t", "1"),
    ("run.budget_seconds", "900"),
    ("run.seed", "1"),
    ("run.trials", "100"),
    ("scales.mu", "0.5"),
    ("scales.nu", "2"),
    ("sparse.r1", "1"),
    ("sparse.r2", "2"),
    ("weights.a", "0,0.25,0.5,0.75,0.95"),
    ("weights.mode", "auto"),
    ("weights.p", "2"),
    ("weights.q", "2"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub s0: f64,
    pub max_size: usize,
    pub mu: f64,
    pub nu: f64,
    pub theta: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub slack: f64,
    pub j_range: Option<(i32, i32)>,
    pub s_max: u32,
    pub r1: f64,
    pub r2: f64,
    pub weight_exponents: Vec<f64>,
    pub p: f64,
    pub q: f64,
    pub mode: Option<String>,
    pub riesz_k: f64,
    pub riesz_alpha: f64,
    pub riesz_t: f64,
    pub dispersive_alpha: f64,
    pub dispersive_beta: f64,
    pub dispersive_times: Vec<f64>,
    pub heat_t: f64,
    pub trials: usize,
    pub seed: u64,
    pub budget_seconds: f64,
    /// Resolved `section.key -> value` table, the source of the hash.
    entries: BTreeMap<String, String>,
}

/// Parses `[section]` / `key = value` text into `section.key -> value`.
pub fn parse_ini(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut section = "run".to_string();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_ascii_lowercase();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{raw}'", no + 1)))?;
        out.insert(format!("{section}.{}", k.trim().to_ascii_lowercase()), v.trim().to_string());
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(entries: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = &entries[key];
    raw.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{raw}'")))
}

fn list(entries: &BTreeMap<String, String>, key: &str) -> Result<Vec<f64>> {
    entries[key]
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{s}' as a number"))))
        .collect()
}

impl ExperimentConfig {
    /// Resolves defaults, file entries and overrides (applied in that order).
    pub fn resolve(file: &BTreeMap<String, String>, overrides: &[(String, String)]) -> Result<Self> {
        let mut entries: BTreeMap<String, String> =
            DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let mut explicit = std::collections::BTreeSet::new();
        let given = file.iter().map(|(k, v)| (k.clone(), v.clone())).chain(overrides.iter().cloned());
        for (k, v) in given {
            let key = if k.contains('.') { k.to_ascii_lowercase() } else { format!("run.{}", k.to_ascii_lowercase()) };
            if !entries.contains_key(&key) {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
            explicit.insert(key.clone());
            entries.insert(key, v);
        }
        let mu_set = explicit.contains("scales.mu");
        let nu_set = explicit.contains("scales.nu");
        let mut mu: f64 = field(&entries, "scales.mu")?;
        let mut nu: f64 = field(&entries, "scales.nu")?;
        match (mu_set, nu_set) {
            (true, false) => nu = 1.0 / mu,
            (false, true) => mu = 1.0 / nu,
            _ => {}
        }
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::Config(format!("scales.mu must lie in (0, 1), got {mu}")));
        }
        if (mu * nu - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("scales.nu = {nu} must equal 1 / scales.mu = {}", 1.0 / mu)));
        }
        entries.insert("scales.mu".into(), format!("{mu}"));
        entries.insert("scales.nu".into(), format!("{nu}"));

        let j_range = match (entries["multiplier.j_min"].as_str(), entries["multiplier.j_max"].as_str()) {
            ("auto", "auto") => None,
            ("auto", _) | (_, "auto") => {
                return Err(Error::Config("multiplier.j_min and multiplier.j_max must be set together".into()))
            }
            _ => Some((field(&entries, "multiplier.j_min")?, field(&entries, "multiplier.j_max")?)),
        };
        let model = ModelKind::parse(&entries["model.kind"]).map_err(|e| Error::Config(format!("model.kind: {e}")))?;
        let mode = match entries["weights.mode"].as_str() {
            "auto" => None,
            m => Some(m.to_string()),
        };
        let r2: f64 = match entries["sparse.r2"].as_str() {
            "inf" => f64::INFINITY,
            _ => field(&entries, "sparse.r2")?,
        };
        let cfg = ExperimentConfig {
            model,
            s0: field(&entries, "model.s0")?,
            max_size: field(&entries, "model.max_size")?,
            mu,
            nu,
            theta: field(&entries, "multiplier.theta")?,
            beta: field(&entries, "multiplier.beta")?,
            epsilon: field(&entries, "multiplier.epsilon")?,
            slack: field(&entries, "multiplier.slack")?,
            j_range,
            s_max: field(&entries, "multiplier.s_max")?,
            r1: field(&entries, "sparse.r1")?,
            r2,
            weight_exponents: list(&entries, "weights.a")?,
            p: field(&entries, "weights.p")?,
            q: field(&entries, "weights.q")?,
            mode,
            riesz_k: field(&entries, "riesz.k")?,
            riesz_alpha: field(&entries, "riesz.alpha")?,
            riesz_t: field(&entries, "riesz.t")?,
            dispersive_alpha: field(&entries, "dispersive.alpha")?,
            dispersive_beta: field(&entries, "dispersive.beta")?,
            dispersive_times: list(&entries, "dispersive.t")?,
            heat_t: field(&entries, "heat.t")?,
            trials: field(&entries, "run.trials")?,
            seed: field(&entries, "run.seed")?,
            budget_seconds: field(&entries, "run.budget_seconds")?,
            entries,
        };
        if !(cfg.s0 > 0.0) {
            return Err(Error::Config(format!("model.s0 must be positive, got {}", cfg.s0)));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::resolve(&parse_ini(&text)?, overrides)
    }

    pub fn defaults() -> Self {
        Self::resolve(&BTreeMap::new(), &[]).expect("defaults are valid")
    }

    /// Resolved entries as sorted `section.key=value` pairs.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// One-line canonical form: `key=value` pairs joined by `;`.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }

    /// SHA-256 of the canonical form, in hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Splits a `section.key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("override '{s}' is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let m = parse_ini("seed = 3\n[model]\nkind = heisenberg:4 # comment\n\n[Sparse]\nr1=1.5").unwrap();
        assert_eq!(m["run.seed"], "3");
        assert_eq!(m["model.kind"], "heisenberg:4");
        assert_eq!(m["sparse.r1"], "1.5");
        assert!(parse_ini("[model]\nkind heisenberg").is_err());
    }

    #[test]
    fn nu_follows_mu() {
        let c = ExperimentConfig::resolve(&BTreeMap::new(), &[("scales.mu".into(), "0.25".into())]).unwrap();
        assert_eq!(c.nu, 4.0);
        let c = ExperimentConfig::resolve(&BTreeMap::new(), &[("scales.nu".into(), "3".into())]).unwrap();
        assert!((c.mu - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_scales_name_both_fields() {
        let err = ExperimentConfig::resolve(
            &BTreeMap::new(),
            &[("scales.mu".into(), "0.5".into()), ("scales.nu".into(), "3".into())],
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("scales.nu") && err.contains("scales.mu"), "{err}");
    }

    #[test]
    fn unknown_key_and_bad_value() {
        assert!(ExperimentConfig::resolve(&BTreeMap::new(), &[("model.colour".into(), "red".into())]).is_err());
        let err = ExperimentConfig::resolve(&BTreeMap::new(), &[("run.trials".into(), "many".into())]).unwrap_err();
        assert!(err.to_string().contains("run.trials"));
    }

    #[test]
    fn hash_tracks_values() {
        let a = ExperimentConfig::defaults();
        let b = ExperimentConfig::resolve(&BTreeMap::new(), &[("run.seed".into(), "2".into())]).unwrap();
        assert_eq!(a.hash(), ExperimentConfig::defaults().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
