//! Table builders behind each subcommand, and the figure presets.

use std::path::PathBuf;

use anyhow::{bail, Context};
use breit_rabi::berry::{marginal_phase_scan, marginal_phase_scan_numeric, DEFAULT_STEPS};
use breit_rabi::crossings::{find_all_crossings, phase_diagram, CrossingKind};
use breit_rabi::entanglement::entropy_table as entropy_sweep_table;
use breit_rabi::grid::{Grid, SweepAxis};
use breit_rabi::num::angle_distance;
use breit_rabi::spectra::spectrum_sweep;
use breit_rabi::{Atom, HalfInteger, LevelId};
use serde_json::json;

use crate::config::{ConfigError, Param, RunConfig};
use crate::output::{Cell, Meta, PlotStub, Table, Writer};

/// Resolves which of `B` and `f` is swept.
pub fn sweep(b: Param, f: Param) -> Result<(SweepAxis<f64>, Grid<f64>), ConfigError> {
    match (b, f) {
        (Param::Range(g), Param::Value(f)) => Ok((SweepAxis::Field { f }, g)),
        (Param::Value(b), Param::Range(g)) => Ok((SweepAxis::Scaling { b }, g)),
        (Param::Range(_), Param::Range(_)) => Err(ConfigError::SweepAxis("both")),
        (Param::Value(_), Param::Value(_)) => Err(ConfigError::SweepAxis("neither")),
    }
}

fn atom_comment(atom: &Atom) -> String {
    format!(
        "atom: {} (I = {}, a' = {} T^-1, b' = {} T^-1)",
        atom.name, atom.nuclear_spin, atom.a_prime, atom.b_prime
    )
}

fn axis_comment(axis: SweepAxis<f64>) -> String {
    match axis {
        SweepAxis::Field { f } => format!("swept: B (T); fixed f = {f}"),
        SweepAxis::Scaling { b } => format!("swept: f; fixed B = {b} T"),
    }
}

/// Energies `E/A` of every level along a sweep.
pub fn levels_table(atom: &Atom, b: Param, f: Param) -> anyhow::Result<Table> {
    let (axis, grid) = sweep(b, f)?;
    let spec = spectrum_sweep(atom, axis, &grid)?;
    let mut columns = vec![axis.name().to_string()];
    columns.extend(spec.ids.iter().map(|id| id.to_string()));
    let mut table = Table::new(columns)
        .comment(atom_comment(atom))
        .comment(axis_comment(axis))
        .comment("energies in units of the hyperfine constant A");
    for (x, row) in spec.parameter.iter().zip(&spec.levels) {
        let mut cells = vec![Cell::Num(*x)];
        cells.extend(row.iter().map(|l| Cell::Num(l.energy)));
        table.push(cells);
    }
    Ok(table)
}

/// Electron-spin entropy (bits) of every level along a sweep.
pub fn entropy_table(atom: &Atom, b: Param, f: Param) -> anyhow::Result<Table> {
    let (axis, grid) = sweep(b, f)?;
    let t = entropy_sweep_table(atom, axis, &grid)?;
    let mut columns = vec![axis.name().to_string()];
    columns.extend(t.ids.iter().map(|id| format!("S({id})")));
    let mut table = Table::new(columns)
        .comment(atom_comment(atom))
        .comment(axis_comment(axis))
        .comment("von Neumann entropy of the electron (equivalently nuclear) spin, bits");
    for (x, row) in t.parameter.iter().zip(&t.entropy) {
        let mut cells = vec![Cell::Num(*x)];
        cells.extend(row.iter().map(|&s| Cell::Num(s)));
        table.push(cells);
    }
    Ok(table)
}

/// Gap, entropy and `β/Ω` tables of the ground state over `(f, B)`, long format.
pub fn phase_diagram_tables(atom: &Atom, f: Grid<f64>, b: Grid<f64>) -> anyhow::Result<[Table; 3]> {
    let d = phase_diagram(atom, &f, &b)?;
    let head = |cols: &[&str], what: &str| {
        Table::new(cols.iter().map(|c| c.to_string()).collect())
            .comment(atom_comment(atom))
            .comment(format!("ground state over f x B; {what}"))
    };
    let mut gap = head(&["f", "B", "gap"], "gap to the first excited level, units of A");
    let mut entropy = head(&["f", "B", "entropy"], "electron-spin entropy, bits");
    let mut berry = head(&["f", "B", "beta_over_omega", "m"], "total Berry phase over solid angle, -m");
    for (i, &fv) in d.f_grid.iter().enumerate() {
        for (j, &bv) in d.b_grid.iter().enumerate() {
            gap.push(vec![fv.into(), bv.into(), d.gap[i][j].into()]);
            entropy.push(vec![fv.into(), bv.into(), d.entropy[i][j].into()]);
            berry.push(vec![
                fv.into(),
                bv.into(),
                d.berry_over_omega[i][j].into(),
                d.m_label[i][j].to_f64().into(),
            ]);
        }
    }
    Ok([gap, entropy, berry])
}

/// Marginal-phase scan plus the nodes found along each `θ` row.
pub fn berry_tables(
    atom: &Atom,
    level: LevelId,
    f: f64,
    b: Grid<f64>,
    theta: Grid<f64>,
    numeric_steps: Option<usize>,
) -> anyhow::Result<(Table, Table)> {
    let scan = marginal_phase_scan(atom, level, f, &b, &theta)?;
    let numeric = numeric_steps
        .map(|n| marginal_phase_scan_numeric(atom, level, f, &b, &theta, n))
        .transpose()?;
    let mut columns: Vec<String> = ["theta", "B", "omega", "gamma_e", "gamma_n", "avg_e", "avg_n"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if numeric.is_some() {
        columns.extend(["gamma_e_numeric", "gamma_n_numeric", "dev_e", "dev_n"].map(String::from));
    }
    let mut table = Table::new(columns)
        .comment(atom_comment(atom))
        .comment(format!("level {level}, f = {f}; phases in radians, marginal phases in (-pi, pi]"))
        .comment("NaN: the phasor sum vanishes and the marginal phase is undefined");
    if let Some(n) = numeric_steps {
        table = table.comment(format!("numeric columns: Wilson loops of the Schmidt vectors, {n} steps"));
    }
    for (i, &t) in scan.theta.iter().enumerate() {
        let omega = breit_rabi::berry::solid_angle(t);
        for (j, &bv) in scan.b.iter().enumerate() {
            let ge = scan.gamma_electron[i][j];
            let gn = scan.gamma_nuclear[i][j];
            let mut row = vec![
                t.into(),
                bv.into(),
                omega.into(),
                ge.into(),
                gn.into(),
                scan.average_electron[i][j].into(),
                scan.average_nuclear[i][j].into(),
            ];
            if let Some((ne, nn)) = &numeric {
                row.extend([
                    Cell::Num(ne[i][j]),
                    Cell::Num(nn[i][j]),
                    Cell::Num(angle_distance(ge, ne[i][j])),
                    Cell::Num(angle_distance(gn, nn[i][j])),
                ]);
            }
            table.push(row);
        }
    }
    let mut nodes = Table::new(vec!["theta".into(), "B".into(), "subsystem".into()])
        .comment(format!("nodes of the marginal phases of level {level} along B"));
    for (i, &t) in scan.theta.iter().enumerate() {
        for &x in &scan.nodes_electron[i] {
            nodes.push(vec![t.into(), x.into(), Cell::Text("electron".into())]);
        }
        for &x in &scan.nodes_nuclear[i] {
            nodes.push(vec![t.into(), x.into(), Cell::Text("nuclear".into())]);
        }
    }
    Ok((table, nodes))
}

/// Real and avoided crossings along a sweep, optionally restricted to block `m`.
pub fn crossings_table(atom: &Atom, b: Param, f: Param, m: Option<HalfInteger>) -> anyhow::Result<Table> {
    let (axis, grid) = sweep(b, f)?;
    let events = find_all_crossings(atom, axis, &grid)?;
    let mut table = Table::new(["kind", "parameter", "location", "level_a", "level_b", "gap"].map(String::from).to_vec())
        .comment(atom_comment(atom))
        .comment(axis_comment(axis))
        .comment("gap = |E_a - E_b| at the event, units of A");
    for e in events {
        if let Some(m) = m {
            if e.level_a.m != m && e.level_b.m != m {
                continue;
            }
        }
        let kind = match e.kind {
            CrossingKind::Real => "real",
            CrossingKind::Avoided => "avoided",
        };
        table.push(vec![
            Cell::Text(kind.into()),
            Cell::Text(e.parameter.into()),
            e.location.into(),
            Cell::Text(e.level_a.to_string()),
            Cell::Text(e.level_b.to_string()),
            e.gap.into(),
        ]);
    }
    Ok(table)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Levels,
    Entropy,
    PhaseDiagram,
    Berry,
    Crossings,
    Figure(u8),
}

impl Kind {
    pub fn name(self) -> String {
        match self {
            Kind::Levels => "levels".into(),
            Kind::Entropy => "entropy".into(),
            Kind::PhaseDiagram => "phase-diagram".into(),
            Kind::Berry => "berry".into(),
            Kind::Crossings => "crossings".into(),
            Kind::Figure(n) => format!("figure {n}"),
        }
    }

    /// Settings used when neither the flags nor the config file give one.
    pub fn defaults(self) -> RunConfig {
        let p = |s: &str| Some(s.parse::<Param>().expect("valid default"));
        let atom = |s: &str| Some(s.parse().expect("valid preset"));
        let base = RunConfig {
            steps: Some(DEFAULT_STEPS),
            ..Default::default()
        };
        match self {
            Kind::Levels | Kind::Entropy | Kind::Crossings => RunConfig {
                atom: atom("hydrogen"),
                b: p("-0.5:0.5:1001"),
                f: p("1"),
                ..base
            },
            Kind::PhaseDiagram => RunConfig {
                atom: atom("pedagogical"),
                b: p("-20:20:201"),
                f: p("-1:1:201"),
                ..base
            },
            Kind::Berry => RunConfig {
                atom: atom("hydrogen"),
                level: Some("0-".into()),
                b: p("-0.2:0.2:201"),
                f: p("1"),
                theta: p("0:pi:181"),
                ..base
            },
            Kind::Figure(1) => RunConfig {
                atom: atom("hydrogen"),
                b: p("-0.5:0.5:1001"),
                ..base
            },
            Kind::Figure(2) => Kind::PhaseDiagram.defaults(),
            Kind::Figure(3) => Kind::Berry.defaults(),
            Kind::Figure(4) => RunConfig {
                atom: atom("sodium"),
                b: p("-0.2:0.2:1001"),
                f: p("1"),
                ..base
            },
            Kind::Figure(5) => RunConfig {
                atom: atom("sodium"),
                level: Some("+1-".into()),
                ..Kind::Berry.defaults()
            },
            Kind::Figure(_) => base,
        }
    }
}

fn parameters(cfg: &RunConfig) -> serde_json::Value {
    // The output directory is excluded so relocated runs stay byte-identical.
    let mut c = cfg.clone();
    c.out_dir = None;
    serde_json::to_value(c).expect("plain config")
}

/// Runs one command with fully merged settings; returns every file written.
pub fn execute(kind: Kind, cfg: &RunConfig, writer: &mut Writer) -> anyhow::Result<Vec<PathBuf>> {
    let spec = cfg.atom_spec()?;
    let atom = spec.resolve()?;
    let record = spec.record()?;
    let mut meta = Meta::new(kind.name(), record, parameters(cfg));
    let level = || -> anyhow::Result<LevelId> {
        let raw = cfg.level.as_deref().ok_or(ConfigError::Missing("level"))?;
        raw.parse::<LevelId>().with_context(|| format!("level {raw:?}"))
    };
    let stem = |default: &str| cfg.name.clone().unwrap_or_else(|| default.to_string());
    let steps = cfg.steps.unwrap_or(DEFAULT_STEPS);
    let numeric = cfg.numeric.unwrap_or(false).then_some(steps);
    let meta_stem = match kind {
        Kind::Levels => {
            let s = stem("levels");
            writer.table(&s, &levels_table(&atom, cfg.b_param()?, cfg.f_param()?)?, &mut meta, Some(PlotStub::Lines))?;
            s
        }
        Kind::Entropy => {
            let s = stem("entropy");
            writer.table(&s, &entropy_table(&atom, cfg.b_param()?, cfg.f_param()?)?, &mut meta, Some(PlotStub::Lines))?;
            s
        }
        Kind::PhaseDiagram | Kind::Figure(2) => {
            let s = stem(if kind == Kind::PhaseDiagram { "phase_diagram" } else { "fig2" });
            write_phase_diagram(&atom, cfg, &s, writer, &mut meta)?;
            if kind == Kind::Figure(2) {
                meta.notes.push(format!(
                    "atom '{}' in use; the default is the pedagogical set a' = 0.1, b' = -0.01 T^-1, \
                     and the swapped set is available as --atom pedagogical-caption",
                    atom.name
                ));
            }
            s
        }
        Kind::Berry => {
            let s = stem("berry");
            write_berry(&atom, cfg, level()?, numeric, &s, writer, &mut meta)?;
            s
        }
        Kind::Crossings => {
            let s = stem("crossings");
            let t = crossings_table(&atom, cfg.b_param()?, cfg.f_param()?, cfg.m)?;
            writer.table(&s, &t, &mut meta, None)?;
            s
        }
        Kind::Figure(1) => {
            let s = stem("fig1");
            let b = Param::Range(cfg.b_param()?.range("B")?);
            let t = levels_table(&atom, b, Param::Value(1.0))?;
            writer.table(&format!("{s}a_levels"), &t, &mut meta, Some(PlotStub::Lines))?;
            let t = levels_table(&atom, b, Param::Value(-0.5))?;
            writer.table(&format!("{s}b_levels"), &t, &mut meta, Some(PlotStub::Lines))?;
            let t = entropy_table(&atom, b, Param::Value(1.0))?;
            writer.table(&format!("{s}c_entropy"), &t, &mut meta, Some(PlotStub::Lines))?;
            s
        }
        Kind::Figure(3) | Kind::Figure(5) => {
            let s = stem(if kind == Kind::Figure(3) { "fig3" } else { "fig5" });
            write_berry(&atom, cfg, level()?, numeric, &s, writer, &mut meta)?;
            s
        }
        Kind::Figure(4) => {
            let s = stem("fig4");
            let (b, f) = (cfg.b_param()?, cfg.f_param()?);
            writer.table(&format!("{s}a_levels"), &levels_table(&atom, b, f)?, &mut meta, Some(PlotStub::Lines))?;
            writer.table(&format!("{s}b_entropy"), &entropy_table(&atom, b, f)?, &mut meta, Some(PlotStub::Lines))?;
            s
        }
        Kind::Figure(n) => bail!("no figure {n}; figures are numbered 1 to 5"),
    };
    writer.meta(&meta_stem, &meta)?;
    Ok(writer.written.clone())
}

fn write_phase_diagram(atom: &Atom, cfg: &RunConfig, stem: &str, writer: &mut Writer, meta: &mut Meta) -> anyhow::Result<()> {
    let f = cfg.f_param()?.range("f")?;
    let b = cfg.b_param()?.range("B")?;
    let [gap, entropy, berry] = phase_diagram_tables(atom, f, b)?;
    writer.table(&format!("{stem}_gap"), &gap, meta, Some(PlotStub::Surface { z: 2 }))?;
    writer.table(&format!("{stem}_entropy"), &entropy, meta, Some(PlotStub::Surface { z: 2 }))?;
    writer.table(&format!("{stem}_berry"), &berry, meta, Some(PlotStub::Surface { z: 2 }))?;
    meta.notes.push("ground-state ties resolved toward larger |m|, then positive m".into());
    Ok(())
}

fn write_berry(
    atom: &Atom,
    cfg: &RunConfig,
    level: LevelId,
    numeric: Option<usize>,
    stem: &str,
    writer: &mut Writer,
    meta: &mut Meta,
) -> anyhow::Result<()> {
    let f = cfg.f_param()?.value("f")?;
    let b = cfg.b_param()?.range("B")?;
    let theta = cfg.theta_param()?.range("theta")?;
    let (table, nodes) = berry_tables(atom, level, f, b, theta, numeric)?;
    if let Some(k) = table.column_index("dev_e") {
        let worst = table
            .rows
            .iter()
            .flat_map(|r| [r[k].as_f64(), r[k + 1].as_f64()])
            .flatten()
            .filter(|x| !x.is_nan())
            .fold(0.0, f64::max);
        meta.parameters["max_numeric_deviation"] = json!(worst);
    }
    writer.table(stem, &table, meta, Some(PlotStub::Surface { z: 3 }))?;
    writer.table(&format!("{stem}_nodes"), &nodes, meta, None)?;
    meta.notes.push("nodes are zeros of sin(gamma): the phasor sum crosses the real axis".into());
    Ok(())
}
