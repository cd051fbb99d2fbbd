//! Flat `key = value` config parsing for the sweep runner.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::videodata::{MotionKind, SyntheticClassSpec};

use super::{DataSource, ExperimentConfig};

/// Ordered key/value pairs; later writes win, which is how CLI flags
/// override file keys.
pub type ConfigMap = BTreeMap<String, String>;

const KNOWN_KEYS: [&str; 18] = [
    "data",
    "manifest",
    "kinds",
    "n",
    "t",
    "noise",
    "blob_min",
    "blob_max",
    "speed_min",
    "speed_max",
    "m",
    "q",
    "trials",
    "seed",
    "shots",
    "exact",
    "test_per_class",
    "out",
];

/// Parses `key = value` lines (also `key value`-less `key=value` without
/// spaces); `#` starts a comment.
pub fn parse_config_file(path: impl AsRef<Path>) -> Result<ConfigMap> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut map = ConfigMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!(
                "{}:{}: expected `key = value`, got `{line}`",
                path.as_ref().display(),
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse<T: std::str::FromStr>(map: &ConfigMap, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad value `{raw}` for key `{key}`"))),
    }
}

fn parse_opt<T: std::str::FromStr>(map: &ConfigMap, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|raw| {
            raw.parse()
                .map_err(|_| Error::InvalidConfig(format!("bad value `{raw}` for key `{key}`")))
        })
        .transpose()
}

/// Parses a q list: comma-separated entries, each an integer or an
/// inclusive `lo-hi` range, e.g. `5,8,10-12`.
pub(crate) fn parse_q_list(raw: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for entry in raw.split(',') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let bad = || Error::InvalidConfig(format!("bad q entry `{entry}`"));
        if let Some((lo, hi)) = entry.split_once('-') {
            let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(entry.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("q list is empty".into()));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Builds an [`ExperimentConfig`] from merged key/value pairs, applying
/// defaults for absent keys and rejecting unknown ones.
pub fn parse_key_values(map: &ConfigMap) -> Result<ExperimentConfig> {
    for key in map.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidConfig(format!("unknown config key `{key}`")));
        }
    }

    let base_seed: u64 = parse(map, "seed", 42)?;
    let data = match map.get("data").map(String::as_str).unwrap_or("synthetic") {
        "synthetic" => {
            let kinds_raw = map
                .get("kinds")
                .map(String::as_str)
                .unwrap_or("sweep_left,approach");
            let mut specs = Vec::new();
            for (index, kind_name) in kinds_raw.split(',').enumerate() {
                let kind: MotionKind = kind_name
                    .trim()
                    .parse()
                    .map_err(|e: String| Error::InvalidConfig(e))?;
                let mut spec = SyntheticClassSpec::new(kind, index as u64);
                spec.n = parse(map, "n", spec.n)?;
                spec.t = parse(map, "t", spec.t)?;
                spec.noise_amplitude = parse(map, "noise", spec.noise_amplitude)?;
                if let Some(lo) = parse_opt(map, "blob_min")? {
                    spec.blob_size.0 = lo;
                }
                if let Some(hi) = parse_opt(map, "blob_max")? {
                    spec.blob_size.1 = hi;
                }
                if let Some(lo) = parse_opt(map, "speed_min")? {
                    spec.speed.0 = lo;
                }
                if let Some(hi) = parse_opt(map, "speed_max")? {
                    spec.speed.1 = hi;
                }
                specs.push(spec);
            }
            DataSource::Synthetic(specs)
        }
        "manifest" => {
            let path = map.get("manifest").ok_or_else(|| {
                Error::InvalidConfig("data=manifest requires the `manifest` key".into())
            })?;
            DataSource::Manifest(PathBuf::from(path))
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "data must be `synthetic` or `manifest`, got `{other}`"
            )))
        }
    };

    let q_list = parse_q_list(map.get("q").map(String::as_str).unwrap_or("4-17"))?;
    Ok(ExperimentConfig {
        data,
        m_per_class: parse(map, "m", 40)?,
        q_list,
        trials: parse(map, "trials", 10)?,
        base_seed,
        shots: parse(map, "shots", 10_000)?,
        exact_mode: parse(map, "exact", false)?,
        test_per_class: parse(map, "test_per_class", 100)?,
        output_dir: PathBuf::from(map.get("out").map(String::as_str).unwrap_or("reports")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_list_supports_values_and_ranges() {
        assert_eq!(parse_q_list("5").unwrap(), vec![5]);
        assert_eq!(parse_q_list("5,12").unwrap(), vec![5, 12]);
        assert_eq!(parse_q_list("4-7,10").unwrap(), vec![4, 5, 6, 7, 10]);
        assert_eq!(parse_q_list("5,4-6").unwrap(), vec![4, 5, 6]);
        assert!(parse_q_list("7-4").is_err());
        assert!(parse_q_list("abc").is_err());
        assert!(parse_q_list("").is_err());
    }

    #[test]
    fn defaults_apply_for_absent_keys() {
        let config = parse_key_values(&ConfigMap::new()).unwrap();
        assert_eq!(config.m_per_class, 40);
        assert_eq!(config.trials, 10);
        assert_eq!(config.base_seed, 42);
        assert!(!config.exact_mode);
        assert_eq!(config.q_list, (4..=17).collect::<Vec<_>>());
        let DataSource::Synthetic(specs) = &config.data else {
            panic!("expected synthetic default");
        };
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].kind, MotionKind::SweepLeft);
        assert_eq!(specs[1].kind, MotionKind::Approach);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut map = ConfigMap::new();
        map.insert("qq".into(), "5".into());
        assert!(matches!(
            parse_key_values(&map),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn file_parsing_merges_with_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.conf");
        std::fs::write(
            &path,
            "# sweep config\nm = 20\nq = 5,12\ntrials = 3\nexact = true\n",
        )
        .unwrap();
        let mut map = parse_config_file(&path).unwrap();
        assert_eq!(map.get("m").unwrap(), "20");
        // A CLI flag overrides the file value.
        map.insert("m".into(), "60".into());
        let config = parse_key_values(&map).unwrap();
        assert_eq!(config.m_per_class, 60);
        assert_eq!(config.q_list, vec![5, 12]);
        assert!(config.exact_mode);
    }

    #[test]
    fn malformed_lines_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.conf");
        std::fs::write(&path, "this is not a key value line\n").unwrap();
        let err = parse_config_file(&path).unwrap_err();
        assert!(err.is_config_error());
    }
}
