//! Run description assembled from a `key = value` config file and command
//! line flags, flags winning.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use heliox::spectrum::Rung;
use heliox::variational::DEFAULT_OMEGA_CAP;

/// Sweeps refuse charges at or below this; the two-electron ion stops being
/// bound near `Z = 0.911`.
pub const SWEEP_Z_FLOOR: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Energy,
    Entropy,
    Sweep,
    Reproduce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    Table1,
    Table2,
    Table3,
    Table5,
    Fig1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

macro_rules! keyword_enum {
    ($ty:ident { $($variant:ident => $name:literal),* $(,)? }) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $($ty::$variant => $name),* }
            }
        }

        impl FromStr for $ty {
            type Err = anyhow::Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)*
                    other => Err(anyhow!(
                        "unknown {} '{other}', expected one of: {}",
                        stringify!($ty).to_lowercase(),
                        [$($name),*].join(", ")
                    )),
                }
            }
        }
    };
}

keyword_enum!(Command { Energy => "energy", Entropy => "entropy", Sweep => "sweep", Reproduce => "reproduce" });
keyword_enum!(Target { Table1 => "table1", Table2 => "table2", Table3 => "table3", Table5 => "table5", Fig1 => "fig1" });
keyword_enum!(Format { Csv => "csv", Json => "json" });

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub command: Option<Command>,
    pub target: Option<Target>,
    pub z: Vec<f64>,
    pub omega: Vec<u32>,
    pub mu: Option<f64>,
    pub radius: Option<f64>,
    pub intervals: Option<usize>,
    pub l_max: Option<usize>,
    pub ladder: Option<Vec<Rung>>,
    pub tol_s: Option<f64>,
    pub tol_l: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub allow_high_omega: bool,
}

/// Parses `a,b,c` or the inclusive range `start:stop:step`.
pub fn parse_z_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [start, stop, step] = parts[..] else {
            bail!("Z range must read start:stop:step, got '{s}'");
        };
        let (start, stop, step): (f64, f64, f64) = (
            start.parse().with_context(|| format!("bad Z range start '{start}'"))?,
            stop.parse().with_context(|| format!("bad Z range stop '{stop}'"))?,
            step.parse().with_context(|| format!("bad Z range step '{step}'"))?,
        );
        if !(step > 0.0) || !(stop >= start) {
            bail!("Z range needs step > 0 and stop >= start, got '{s}'");
        }
        // count first, then index, so 1:5:0.1 lands on exact tenths
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|k| round_to(start + k as f64 * step, 12)).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad Z value '{v}'")))
        .collect()
}

pub fn parse_omega_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<u32>()
                .with_context(|| format!("omega must be a non-negative integer, got '{v}'"))
        })
        .collect()
}

/// Parses `R:n_m:l_m,R:n_m:l_m,...`.
pub fn parse_ladder(s: &str) -> Result<Vec<Rung>> {
    s.split(',')
        .map(|rung| {
            let parts: Vec<&str> = rung.trim().split(':').collect();
            let [r, n, l] = parts[..] else {
                bail!("ladder rung must read R:n_m:l_m, got '{rung}'");
            };
            Ok(Rung::new(
                r.parse().with_context(|| format!("bad box edge '{r}'"))?,
                n.parse().with_context(|| format!("bad interval count '{n}'"))?,
                l.parse().with_context(|| format!("bad partial-wave cutoff '{l}'"))?,
            ))
        })
        .collect()
}

fn round_to(x: f64, decimals: usize) -> f64 {
    format!("{x:.decimals$}").parse().unwrap_or(x)
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => bail!("expected true or false, got '{other}'"),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl Manifest {
    /// Reads `key = value` lines; `#` starts a comment. Keys match the long
    /// flag names.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut m = Manifest::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected key = value, got '{raw}'", idx + 1))?;
            m.set(key.trim(), value.trim())
                .with_context(|| format!("config line {}", idx + 1))?;
        }
        Ok(m)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "command" => self.command = Some(value.parse()?),
            "target" => self.target = Some(value.parse()?),
            "Z" => self.z = parse_z_list(value)?,
            "omega" => self.omega = parse_omega_list(value)?,
            "mu" => self.mu = Some(value.parse().context("bad mu")?),
            "R" => self.radius = Some(value.parse().context("bad R")?),
            "nm" => self.intervals = Some(value.parse().context("bad nm")?),
            "lmax" => self.l_max = Some(value.parse().context("bad lmax")?),
            "ladder" => self.ladder = Some(parse_ladder(value)?),
            "tol-s" => self.tol_s = Some(value.parse().context("bad tol-s")?),
            "tol-l" => self.tol_l = Some(value.parse().context("bad tol-l")?),
            "format" => self.format = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "allow-high-omega" => self.allow_high_omega = parse_bool(value)?,
            other => bail!("unknown config key '{other}'"),
        }
        Ok(())
    }

    /// Inverse of [`Self::from_config_str`].
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(c) = self.command {
            put("command", c.name().into());
        }
        if let Some(t) = self.target {
            put("target", t.name().into());
        }
        if !self.z.is_empty() {
            put("Z", join(&self.z));
        }
        if !self.omega.is_empty() {
            put("omega", join(&self.omega));
        }
        if let Some(v) = self.mu {
            put("mu", v.to_string());
        }
        if let Some(v) = self.radius {
            put("R", v.to_string());
        }
        if let Some(v) = self.intervals {
            put("nm", v.to_string());
        }
        if let Some(v) = self.l_max {
            put("lmax", v.to_string());
        }
        if let Some(ladder) = &self.ladder {
            let rungs: Vec<String> = ladder
                .iter()
                .map(|r| format!("{}:{}:{}", r.radius, r.intervals, r.l_max))
                .collect();
            put("ladder", rungs.join(","));
        }
        if let Some(v) = self.tol_s {
            put("tol-s", v.to_string());
        }
        if let Some(v) = self.tol_l {
            put("tol-l", v.to_string());
        }
        put("format", self.format.name().into());
        if let Some(p) = &self.out {
            put("out", p.display().to_string());
        }
        if self.allow_high_omega {
            put("allow-high-omega", "true".into());
        }
        s
    }

    /// Range checks that do not depend on the command.
    pub fn validate(&self) -> Result<()> {
        for &z in &self.z {
            if !(z > 0.0) || !z.is_finite() {
                bail!("nuclear charge must be positive, got {z}");
            }
        }
        for &w in &self.omega {
            if w > DEFAULT_OMEGA_CAP && !self.allow_high_omega {
                bail!(
                    "omega = {w} exceeds the default cap of {DEFAULT_OMEGA_CAP}; binary64 overlap conditioning \
                     degrades beyond it. Pass --allow-high-omega to proceed anyway"
                );
            }
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0) || !mu.is_finite() {
                bail!("mu must be positive, got {mu}");
            }
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) || !r.is_finite() {
                bail!("R must be positive, got {r}");
            }
        }
        if self.intervals == Some(0) {
            bail!("nm must be at least 1");
        }
        if self.radius.is_some() != self.intervals.is_some() {
            bail!("--R and --nm must be given together");
        }
        if self.ladder.is_some() && self.radius.is_some() {
            bail!("--ladder and --R/--nm are mutually exclusive");
        }
        for (name, tol) in [("tol-s", self.tol_s), ("tol-l", self.tol_l)] {
            if let Some(t) = tol {
                if !(t > 0.0) || !t.is_finite() {
                    bail!("{name} must be positive, got {t}");
                }
            }
        }
        if self.command == Some(Command::Sweep) {
            if self.z.is_empty() {
                bail!("sweep needs --Z as a list or start:stop:step range");
            }
            if let Some(z) = self.z.iter().find(|&&z| z <= SWEEP_Z_FLOOR) {
                bail!(
                    "Z = {z} is at or below the sweep floor {SWEEP_Z_FLOOR}; the two-electron ion unbinds near \
                     Z = 0.911 and the expansion cannot represent the detached electron"
                );
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_range_hits_exact_tenths() {
        let z = parse_z_list("1.0:5.0:0.1").unwrap();
        assert_eq!(z.len(), 41);
        assert_eq!(z[13], 2.3);
        assert_eq!(*z.last().unwrap(), 5.0);
        assert_eq!(parse_z_list("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(parse_z_list("1:2").is_err());
        assert!(parse_z_list("2:1:0.5").is_err());
    }

    #[test]
    fn config_round_trip_is_lossless() {
        let m = Manifest {
            command: Some(Command::Entropy),
            target: Some(Target::Table3),
            z: vec![1.0, 2.0 / 3.0, 0.1 + 0.2],
            omega: vec![6, 10],
            mu: Some(1.234_567_890_123_456_7),
            radius: None,
            intervals: None,
            l_max: Some(7),
            ladder: Some(vec![Rung::new(7.5, 300, 2), Rung::new(9.0, 600, 2)]),
            tol_s: Some(1e-7),
            tol_l: Some(3e-8),
            format: Format::Json,
            out: Some(PathBuf::from("/tmp/x y.json")),
            allow_high_omega: true,
        };
        let back = Manifest::from_config_str(&m.to_config_string()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn config_comments_and_errors() {
        let m = Manifest::from_config_str("# helium\nZ = 2   # charge\n\nomega=6\n").unwrap();
        assert_eq!(m.z, vec![2.0]);
        assert_eq!(m.omega, vec![6]);
        assert!(Manifest::from_config_str("Z 2").is_err());
        assert!(Manifest::from_config_str("colour = blue").is_err());
        assert!(Manifest::from_config_str("omega = -2").is_err());
    }

    #[test]
    fn validation() {
        let ok = Manifest { z: vec![2.0], omega: vec![12], ..Default::default() };
        assert!(ok.validate().is_ok());
        let high = Manifest { omega: vec![14], ..Default::default() };
        assert!(high.validate().is_err());
        assert!(Manifest { allow_high_omega: true, ..high }.validate().is_ok());
        let half_grid = Manifest { radius: Some(10.0), ..Default::default() };
        assert!(half_grid.validate().is_err());
        let low = Manifest { command: Some(Command::Sweep), z: vec![0.9, 2.0], ..Default::default() };
        assert!(low.validate().is_err());
        let neg = Manifest { z: vec![-1.0], ..Default::default() };
        assert!(neg.validate().is_err());
    }
}
