//! Command-line front end: parameter sweeps, crossing searches, geometric
//! phases and figure data, written as CSV or JSON with a metadata sidecar.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use breit_rabi::HalfInteger;
use clap::{ArgAction, Args, Parser, Subcommand};

use crate::commands::{execute, Kind};
use crate::config::{AtomSpec, Format, Param, RunConfig};
use crate::output::Writer;

#[derive(Debug, Parser)]
#[command(name = "breit-rabi", version, about = "Breit-Rabi hyperfine spectra, crossings, entanglement and Berry phases")]
pub struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels E/A along a B or f sweep.
    Levels(Opts),
    /// Electron-spin entropy of every level along a sweep.
    Entropy(Opts),
    /// Ground-state gap, entropy and Berry phase over an (f, B) grid.
    PhaseDiagram(Opts),
    /// Marginal Berry phases of one level over a (B, theta) grid.
    Berry(Opts),
    /// Real and avoided level crossings along a sweep.
    Crossings(Opts),
    /// Data for figures 1 to 5 with their reference parameters.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        number: u8,
        #[command(flatten)]
        opts: Opts,
    },
    /// List the bundled atom presets.
    Presets,
}

#[derive(Debug, Default, Args)]
pub struct Opts {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset name, or inline `I,a',b'` (e.g. 3/2,32.091,-0.012709).
    #[arg(long, allow_hyphen_values = true)]
    pub atom: Option<AtomSpec>,
    /// Field in tesla: a value or lo:hi:n.
    #[arg(long = "B", visible_alias = "b", allow_hyphen_values = true)]
    pub b: Option<Param>,
    /// Hyperfine scale: a value or lo:hi:n.
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<Param>,
    /// Cone polar angle range lo:hi:n; accepts multiples of pi.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<Param>,
    /// Level label such as 0-, +1- or E_-1^+.
    #[arg(long, allow_hyphen_values = true)]
    pub level: Option<String>,
    /// Keep only crossings involving block m.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<HalfInteger>,
    /// Output directory [env: BREIT_RABI_OUT_DIR].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output file stem.
    #[arg(long)]
    pub name: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<Format>,
    /// Loop steps for numeric phases.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Add Wilson-loop cross-check columns to berry output.
    #[arg(long)]
    pub numeric: bool,
    /// Also write a gnuplot script next to each CSV table.
    #[arg(long)]
    pub gnuplot: bool,
}

impl Opts {
    fn flags(&self) -> RunConfig {
        RunConfig {
            atom: self.atom.clone(),
            b: self.b,
            f: self.f,
            theta: self.theta,
            level: self.level.clone(),
            m: self.m,
            out_dir: None,
            name: self.name.clone(),
            format: self.format,
            steps: self.steps,
            numeric: self.numeric.then_some(true),
            gnuplot: self.gnuplot.then_some(true),
        }
    }

    /// Defaults, then the config file, then flags.
    pub fn merged(&self, kind: Kind) -> anyhow::Result<RunConfig> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(kind.defaults().overlay(file).overlay(self.flags()))
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> anyhow::Result<Vec<PathBuf>>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    dispatch(cli.command)
}

pub fn dispatch(command: Command) -> anyhow::Result<Vec<PathBuf>> {
    let (kind, opts) = match command {
        Command::Levels(o) => (Kind::Levels, o),
        Command::Entropy(o) => (Kind::Entropy, o),
        Command::PhaseDiagram(o) => (Kind::PhaseDiagram, o),
        Command::Berry(o) => (Kind::Berry, o),
        Command::Crossings(o) => (Kind::Crossings, o),
        Command::Figure { number, opts } => (Kind::Figure(number), opts),
        Command::Presets => {
            for (name, r) in breit_rabi::hamiltonian::preset_table()? {
                println!("{name}: I = {}, a' = {} T^-1, b' = {} T^-1", r.nuclear_spin, r.a_prime, r.b_prime);
            }
            return Ok(Vec::new());
        }
    };
    let cfg = opts.merged(kind)?;
    let dir = cfg.output_dir(opts.out_dir.as_deref());
    log::debug!("{} -> {}", kind.name(), dir.display());
    let mut writer = Writer::new(&dir, cfg.format.unwrap_or_default(), cfg.gnuplot.unwrap_or(false))?;
    execute(kind, &cfg, &mut writer)
}
