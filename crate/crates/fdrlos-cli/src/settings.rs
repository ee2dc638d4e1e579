//! Command-line flags, the key=value config file, and their merge.
//!
//! Precedence: built-in defaults < config file < flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fdrlos::capacity::{Method, NumericsConfig};
use fdrlos::mcsim::McConfig;

use crate::values::{parse_usizes, parse_values};

#[derive(Debug, Parser)]
#[command(name = "fdrlos", version, about = "Ergodic capacity of the fdRLoS fading channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity at one (k, m, SNR) point, one record per method.
    Point(Flags),
    /// Capacity against average SNR for each listed (k, m).
    Sweep(Flags),
    /// Capacity over an (m, k) grid at fixed SNR.
    Grid(Flags),
    /// Relative error of the small- or large-k approximation against quadrature.
    Errors(Flags),
    /// Regression against the built-in reference table (m = 2, k ∈ {20, 200}).
    Table1(Flags),
    /// Closed form against quadrature (and Monte Carlo with --mc) on a grid.
    Validate(Flags),
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::Point(f)
            | Command::Sweep(f)
            | Command::Grid(f)
            | Command::Errors(f)
            | Command::Table1(f)
            | Command::Validate(f) => f,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Point(_) => "point",
            Command::Sweep(_) => "sweep",
            Command::Grid(_) => "grid",
            Command::Errors(_) => "errors",
            Command::Table1(_) => "table1",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Scheme {
    Ora,
    Opra,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ora => "ora",
            Scheme::Opra => "opra",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Regime {
    LowRatio,
    HighRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every command; all optional so the config file can
/// fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// LoS-to-scatter power ratio(s): list, start:stop:step or log:start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Shadowing shape(s), same syntax as --k.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    /// Average SNR value(s) in dB.
    #[arg(long = "snr-db", allow_hyphen_values = true, conflicts_with = "snr_range")]
    pub snr_db: Option<String>,
    /// Average SNR range start:stop:step in dB.
    #[arg(long = "snr-range", allow_hyphen_values = true)]
    pub snr_range: Option<String>,
    /// Comma-separated methods: quadrature, closed_form, approx_low_ratio,
    /// approx_high_ratio, high_snr, monte_carlo.
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long, value_enum)]
    pub scheme: Option<Scheme>,
    /// Term counts for the large-k expansion; 0 selects the resummed form.
    #[arg(long)]
    pub terms: Option<String>,
    #[arg(long, value_enum)]
    pub regime: Option<Regime>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo draws per point.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Monte Carlo worker threads.
    #[arg(long)]
    pub streams: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// key=value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Add Monte Carlo checks (table1, validate).
    #[arg(long)]
    pub mc: bool,
    /// Fill the runtime_ms column. Off by default so output is reproducible.
    #[arg(long)]
    pub timing: bool,
    /// Also write a gnuplot script for the CSV written to --output.
    #[arg(long = "plot-script")]
    pub plot_script: Option<PathBuf>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub k: Option<Vec<f64>>,
    pub m: Option<Vec<f64>>,
    pub snr_db: Option<Vec<f64>>,
    pub methods: Option<Vec<Method>>,
    /// Unset means the command's default (ORA, or both for validate).
    pub scheme: Option<Scheme>,
    pub terms: Option<Vec<usize>>,
    pub regime: Option<Regime>,
    pub mc: McConfig,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub with_mc: bool,
    pub timing: bool,
    pub plot_script: Option<PathBuf>,
    pub numerics: NumericsConfig,
}

impl Default for Settings {
    fn default() -> Self {
        let streams = std::thread::available_parallelism().map_or(4, |n| n.get());
        Settings {
            k: None,
            m: None,
            snr_db: None,
            methods: None,
            scheme: None,
            terms: None,
            regime: None,
            // streams changes only the thread count, never the numbers
            mc: McConfig { streams, ..McConfig::default() },
            output: None,
            format: Format::Csv,
            with_mc: false,
            timing: false,
            plot_script: None,
            numerics: NumericsConfig::default(),
        }
    }
}

fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: Method = part.parse().map_err(|e| anyhow::anyhow!("{e}"))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        bail!("at least one method must be selected");
    }
    Ok(out)
}

fn parse_enum<T: ValueEnum>(key: &str, v: &str) -> Result<T> {
    T::from_str(v, true).map_err(|_| anyhow::anyhow!("invalid value '{v}' for {key}"))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => bail!("invalid boolean '{v}' for {key}"),
    }
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .with_context(|| format!("config line {}: expected key = value", n + 1))?;
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            bail!("config line {}: empty key", n + 1);
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    fn apply(&mut self, key: &str, v: &str) -> Result<()> {
        let n = &mut self.numerics;
        match key {
            "k" => self.k = Some(parse_values(v)?),
            "m" => self.m = Some(parse_values(v)?),
            "snr_db" | "snr_range" => self.snr_db = Some(parse_values(v)?),
            "methods" => self.methods = Some(parse_methods(v)?),
            "scheme" => self.scheme = Some(parse_enum(key, v)?),
            "terms" => self.terms = Some(parse_usizes(v)?),
            "regime" => self.regime = Some(parse_enum(key, v)?),
            "seed" => self.mc.seed = v.parse().with_context(|| format!("invalid seed '{v}'"))?,
            "samples" => self.mc.samples = v.parse().with_context(|| format!("invalid samples '{v}'"))?,
            "streams" => self.mc.streams = v.parse().with_context(|| format!("invalid streams '{v}'"))?,
            "batch" => self.mc.batch = v.parse().with_context(|| format!("invalid batch '{v}'"))?,
            "output" => self.output = Some(PathBuf::from(v)),
            "format" => self.format = parse_enum(key, v)?,
            "mc" => self.with_mc = parse_bool(key, v)?,
            "timing" => self.timing = parse_bool(key, v)?,
            "plot_script" => self.plot_script = Some(PathBuf::from(v)),
            "laguerre_order" => n.grid.laguerre_order = v.parse()?,
            "max_order" => n.grid.max_order = v.parse()?,
            "outer_tol" => n.grid.outer_tol = v.parse()?,
            "panel_tol" => n.grid.panel_tol = v.parse()?,
            "contour_nodes" => n.contour.nodes = v.parse()?,
            "contour_tol" => n.contour.tol = v.parse()?,
            "series_tol" => n.series_tol = v.parse()?,
            "n_max" => n.n_max = v.parse()?,
            "cutoff_tol" => n.cutoff_tol = v.parse()?,
            other => bail!("unknown setting '{other}'"),
        }
        Ok(())
    }

    pub fn resolve(flags: &Flags) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &flags.config {
            for (k, v) in read_config(path)? {
                s.apply(&k, &v).with_context(|| format!("config key '{k}'"))?;
            }
        }
        let text = [
            ("k", &flags.k),
            ("m", &flags.m),
            ("snr_db", &flags.snr_db),
            ("snr_range", &flags.snr_range),
            ("methods", &flags.methods),
            ("terms", &flags.terms),
        ];
        for (key, v) in text {
            if let Some(v) = v {
                s.apply(key, v).with_context(|| format!("--{}", key.replace('_', "-")))?;
            }
        }
        if let Some(v) = flags.scheme {
            s.scheme = Some(v);
        }
        if let Some(v) = flags.regime {
            s.regime = Some(v);
        }
        if let Some(v) = flags.seed {
            s.mc.seed = v;
        }
        if let Some(v) = flags.samples {
            s.mc.samples = v;
        }
        if let Some(v) = flags.streams {
            s.mc.streams = v;
        }
        if let Some(v) = &flags.output {
            s.output = Some(v.clone());
        }
        if let Some(v) = flags.format {
            s.format = v;
        }
        if let Some(v) = &flags.plot_script {
            s.plot_script = Some(v.clone());
        }
        if s.plot_script.is_some() && (s.output.is_none() || s.format != Format::Csv) {
            bail!("--plot-script needs CSV written to --output");
        }
        s.with_mc |= flags.mc;
        s.timing |= flags.timing;
        s.numerics.validate().map_err(|e| anyhow::anyhow!("numerics: {e}"))?;
        s.mc.validate().map_err(|e| anyhow::anyhow!("Monte Carlo: {e}"))?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let c = parse_config("# comment\nk = 20,200\n\nsnr-range=0:40:10  # trailing\n").unwrap();
        assert_eq!(c["k"], "20,200");
        assert_eq!(c["snr_range"], "0:40:10");
        assert!(parse_config("no equals sign").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("fdrlos-settings-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "k = 5\nm = 3\nseed = 9\nformat = json\npanel_tol = 1e-9\n").unwrap();
        let flags = Flags { k: Some("7".into()), config: Some(path), ..Default::default() };
        let s = Settings::resolve(&flags).unwrap();
        assert_eq!(s.k, Some(vec![7.0]));
        assert_eq!(s.m, Some(vec![3.0]));
        assert_eq!(s.mc.seed, 9);
        assert_eq!(s.format, Format::Json);
        assert_eq!(s.numerics.grid.panel_tol, 1e-9);
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn bad_settings() {
        let s = Settings::resolve(&Flags { methods: Some(" , ".into()), ..Default::default() });
        assert!(s.is_err());
        let s = Settings::resolve(&Flags { samples: Some(10), ..Default::default() });
        assert!(s.is_err());
        let mut d = Settings::default();
        assert!(d.apply("bogus", "1").is_err());
        assert!(d.apply("mc", "maybe").is_err());
    }
}
