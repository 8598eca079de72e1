//! Flag and config-file values, merged with flags taking precedence.

use std::collections::BTreeMap;
use std::path::PathBuf;

use bbm_core::io::{parse_config, parse_domain, parse_dt, parse_list, parse_number, parse_positive, DtSpec};
use bbm_core::semidisc::{BoundaryCondition, SchemeKind};
use bbm_core::{Error, Result};
use clap::Args;

/// Flags shared by the run subcommands. Each may also be given as
/// `name = value` in the file passed to `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    /// key=value file; flags given on the command line win
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads for refinement studies
    #[arg(long)]
    pub jobs: Option<String>,
    /// periodic | reflective
    #[arg(long)]
    pub bc: Option<String>,
    /// conservative | standard
    #[arg(long)]
    pub scheme: Option<String>,
    /// Element degree, 1..=4
    #[arg(long)]
    pub r: Option<String>,
    /// Mesh spacing, or a comma-separated list for `converge`
    #[arg(long)]
    pub dx: Option<String>,
    /// Time step: a value or `ratio:X` for X·dx
    #[arg(long)]
    pub dt: Option<String>,
    /// Final time
    #[arg(long = "T")]
    pub t_end: Option<String>,
    /// Phase speed, e.g. 1.6 or sqrt1.6
    #[arg(long)]
    pub cs: Option<String>,
    /// Interval as a:b
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Initial wave centre
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Collision waves as speed@centre pairs, e.g. 1.6@-25,1.2@0
    #[arg(long, allow_hyphen_values = true)]
    pub waves: Option<String>,
    /// manufactured | exact (`converge` only)
    #[arg(long)]
    pub case: Option<String>,
    /// Turn off the relaxation step
    #[arg(long = "no-relax")]
    pub no_relax: bool,
    /// Initial wave read from a file written by `petviashvili`
    #[arg(long = "seed-wave")]
    pub seed_wave: Option<String>,
}

/// Resolved `key → value` strings.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Merges the config file (if any) under the flags, rejecting keys the
    /// subcommand does not use.
    pub fn resolve(flags: &RunFlags, allowed: &[&str]) -> Result<Self> {
        let mut values = match &flags.config {
            Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
            None => BTreeMap::new(),
        };
        let given = [
            ("out", &flags.out),
            ("jobs", &flags.jobs),
            ("bc", &flags.bc),
            ("scheme", &flags.scheme),
            ("r", &flags.r),
            ("dx", &flags.dx),
            ("dt", &flags.dt),
            ("T", &flags.t_end),
            ("cs", &flags.cs),
            ("domain", &flags.domain),
            ("x0", &flags.x0),
            ("waves", &flags.waves),
            ("case", &flags.case),
            ("seed-wave", &flags.seed_wave),
        ];
        for (k, v) in given {
            if let Some(v) = v {
                values.insert(k.to_string(), v.clone());
            }
        }
        if flags.no_relax {
            values.insert("no-relax".into(), "true".into());
        }
        for k in values.keys() {
            if k != "out" && !allowed.contains(&k.as_str()) {
                return Err(Error::Usage(format!("option '{k}' does not apply to this command")));
            }
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn or<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> Result<T>) -> Result<T> {
        match self.raw(key) {
            Some(v) => parse(v).map_err(|e| Error::Usage(format!("--{key}: {e}"))),
            None => Ok(default),
        }
    }

    pub fn number(&self, key: &str, default: f64) -> Result<f64> {
        self.or(key, default, parse_number)
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64> {
        self.or(key, default, parse_positive)
    }

    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        self.or(key, default.to_vec(), parse_list)
    }

    pub fn dt(&self, default: DtSpec) -> Result<DtSpec> {
        self.or("dt", default, parse_dt)
    }

    pub fn domain(&self, default: (f64, f64)) -> Result<(f64, f64)> {
        self.or("domain", default, parse_domain)
    }

    pub fn degree(&self, default: usize) -> Result<usize> {
        self.or("r", default, |s| match s.trim().parse::<usize>() {
            Ok(r) if (1..=4).contains(&r) => Ok(r),
            _ => Err(Error::Usage(format!("degree must be 1..=4, got '{s}'"))),
        })
    }

    pub fn count(&self, key: &str, default: usize) -> Result<usize> {
        self.or(key, default, |s| match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Usage(format!("expected a positive integer, got '{s}'"))),
        })
    }

    pub fn bc(&self, default: BoundaryCondition) -> Result<BoundaryCondition> {
        self.or("bc", default, str::parse)
    }

    pub fn scheme(&self, default: SchemeKind) -> Result<SchemeKind> {
        self.or("scheme", default, str::parse)
    }

    pub fn relax(&self) -> Result<bool> {
        self.or("no-relax", true, |s| match s.trim() {
            "true" | "1" | "yes" => Ok(false),
            "false" | "0" | "no" => Ok(true),
            other => Err(Error::Usage(format!("expected true or false, got '{other}'"))),
        })
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.raw("out").unwrap_or("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "r = 2\ndx = 0.2 # coarse\nno-relax = true\n").unwrap();
        let flags = RunFlags {
            config: Some(p),
            r: Some("3".into()),
            ..RunFlags::default()
        };
        let s = Settings::resolve(&flags, &["r", "dx", "no-relax"]).unwrap();
        assert_eq!(s.degree(1).unwrap(), 3);
        assert_eq!(s.positive("dx", 0.1).unwrap(), 0.2);
        assert!(!s.relax().unwrap());
        assert!(Settings::resolve(&flags, &["r"]).is_err());
    }
}
