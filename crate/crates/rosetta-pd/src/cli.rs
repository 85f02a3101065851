//! Command line front end. Every subcommand writes its artifacts under
//! `--out` ({designs,tech,reports,views}/), a metrics record and a validation
//! report for each design it produces.
//!
//! Exit status: 0 success, 1 failure (including validation failure with
//! `--strict`), 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rosetta_pd_core::bookshelf::{bundle_to_design, BookshelfBundle};
use rosetta_pd_core::enable3d::{
    build_3d_tech, build_unified_library, cover_of, derive_tier_masters, hbt_pitch_sweep, stack_manifest, HbtSpec,
    LibrarySide, StackConfig,
};
use rosetta_pd_core::metrics::MetricsRecord;
use rosetta_pd_core::model::Tier;
use rosetta_pd_core::num::{Decimal, Ratio};
use rosetta_pd_core::partition::{design_to_hypergraph, BalancePoint, Hypergraph, PartitionResult, SweepKind};
use rosetta_pd_core::remap::{fake_to_bookshelf, legality_check, remap_to_pdk, RemapPolicy};
use rosetta_pd_core::repair::{repair_pipeline, RepairConfig};
use rosetta_pd_core::synth::{generate_synthetic, SynthConfig};
use rosetta_pd_core::tierview::{assign_tiers, estimate_hbt_count, generate_tier_views, StackKind, TierLibrary};
use rosetta_pd_core::{validate_design, Design, LefSubset, TechStack, ValidationReport};
use serde::Serialize;

use crate::bookshelf_io::{parse_bookshelf, write_bookshelf, write_bundle, ParseOptions};
use crate::config::expand_argv;
use crate::def::{parse_def, write_def};
use crate::error::{read_file, write_file, FormatError};
use crate::lef::{parse_lef, rescale_lef, write_lef, write_lef_subset};
use crate::metrics_io::{compare_runs, emit_metrics, peak_memory_kib, validate_metrics_json};
use crate::netlist::write_structural_netlist;
use crate::sweep_par::{par_base_balance_sweep, par_sweep, par_ubfactor_sweep, sweep_csv, sweep_report};

pub const SUBCOMMANDS: [&str; 8] = ["translate", "repair", "remap", "enable3d", "partition", "tierview", "metrics", "synth"];

#[derive(Parser, Debug)]
#[command(name = "rosetta-pd", version, about = "Benchmark translation, repair, 3D enablement and tier partitioning")]
#[command(arg_required_else_help = true, args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, global = true, env = "ROSETTA_PD_JOBS")]
    pub jobs: Option<usize>,
    /// Exit 1 when any validation report is nonempty.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Flat `key = value` file of flag defaults; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// A design read from Bookshelf (`--aux`) or from LEF/DEF (`--lef` + `--def`).
#[derive(Args, Debug, Clone)]
pub struct Input {
    #[arg(long)]
    pub aux: Option<PathBuf>,
    #[arg(long)]
    pub lef: Option<PathBuf>,
    #[arg(long)]
    pub def: Option<PathBuf>,
    /// DBU per micron for Bookshelf input.
    #[arg(long, default_value_t = 1000)]
    pub units: u32,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SourceFormat {
    Bookshelf,
    Fakelefdef,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    Ub,
    Base,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StackArg {
    Homogeneous,
    Heterogeneous,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Bookshelf to LEF/DEF, or fake LEF/DEF back to Bookshelf.
    Translate {
        #[arg(long, value_enum)]
        from: SourceFormat,
        #[command(flatten)]
        input: Input,
    },
    /// Remove ill-formed nets, split oversized instances, snap placement.
    Repair {
        #[command(flatten)]
        input: Input,
        /// Oversize threshold as a multiple of the median master area (e.g. 64, 2.5, 7/2).
        #[arg(long, default_value = "64")]
        max_area_ratio: String,
        #[arg(long, default_value_t = 1)]
        grid: i64,
    },
    /// Map a Bookshelf or fake LEF/DEF design onto a target library.
    Remap {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        target_lef: PathBuf,
        #[arg(long)]
        allow_pin_drop: bool,
    },
    /// Build a face-to-face 3D technology and tier libraries.
    Enable3d {
        /// 2D technology and cell library; a synthetic stack when absent.
        #[arg(long)]
        tech_lef: Option<PathBuf>,
        /// Second library for a heterogeneous stack (upper tier).
        #[arg(long)]
        top_lef: Option<PathBuf>,
        /// Metal count of the synthetic stack.
        #[arg(long, default_value_t = 6)]
        metals: usize,
        #[arg(long, default_value_t = 1000)]
        units: u32,
        /// HBT pitch in µm; width and spacing are half of it.
        #[arg(long, default_value_t = 1.0)]
        pitch: f64,
        #[arg(long, default_value_t = 0.02)]
        resistance: f64,
        /// Add the M2_add/M3_add compatibility layers.
        #[arg(long)]
        compat: bool,
        /// Comma-separated pitches (µm) for an HBT pitch sweep report.
        #[arg(long, value_delimiter = ',')]
        pitch_sweep: Vec<f64>,
    },
    /// Bipartition the netlist, optionally sweeping the balance constraint.
    Partition {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        sweep: Option<SweepArg>,
        /// UBfactor range of the ub sweep.
        #[arg(long, default_value_t = 2.0)]
        lo: f64,
        #[arg(long, default_value_t = 10.0)]
        hi: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// Runs per point; seeds are `seed .. seed + seeds`.
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        /// Side-0 start fraction of the base sweep.
        #[arg(long, default_value_t = 0.06)]
        base_start: f64,
        /// Tolerance of the base sweep.
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
        /// UBfactor of a single (non-sweep) run.
        #[arg(long, default_value_t = 10.0)]
        ub: f64,
        #[arg(long, default_value_t = crate::sweep_par::DEFAULT_RESAMPLE_SIZE)]
        resample_size: usize,
        #[arg(long, default_value_t = crate::sweep_par::DEFAULT_RESAMPLES)]
        resamples: u64,
    },
    /// Partition, then emit per-tier DEF and netlist views.
    Tierview {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "homogeneous")]
        stack: StackArg,
        /// Upper-tier library of a heterogeneous stack.
        #[arg(long)]
        top_lef: Option<PathBuf>,
        #[arg(long, default_value_t = 10.0)]
        ub: f64,
        #[arg(long, default_value_t = 8)]
        seeds: u64,
        /// Count IO-spanning nets in the HBT estimate.
        #[arg(long)]
        include_io: bool,
    },
    /// Metrics of one design, or a comparison table of metrics records.
    Metrics {
        #[command(flatten)]
        input: Input,
        /// Metrics JSON files to tabulate into reports/compare.csv.
        #[arg(long, num_args = 1..)]
        compare: Vec<PathBuf>,
        #[arg(long, default_value = "measure")]
        stage: String,
    },
    /// Generate a synthetic placed netlist.
    Synth {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        /// Mean pins per net (e.g. 3, 2.5, 7/2).
        #[arg(long, default_value = "3")]
        degree: String,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        /// Leave instances unplaced.
        #[arg(long)]
        no_place: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        fail(e)
    }
}

/// `7`, `2.5` or `7/2` as an exact nonnegative ratio.
pub fn parse_ratio(s: &str) -> Result<Ratio, String> {
    let bad = || format!("`{s}` is not a nonnegative number or fraction");
    if let Some((a, b)) = s.split_once('/') {
        let (a, b) = (a.trim().parse::<u64>().map_err(|_| bad())?, b.trim().parse::<u64>().map_err(|_| bad())?);
        if b == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(a, b));
    }
    let d: Decimal = s.trim().parse().map_err(|_| bad())?;
    if d.mantissa < 0 || d.scale > 18 {
        return Err(bad());
    }
    let num = u64::try_from(d.mantissa).map_err(|_| bad())?;
    Ok(Ratio::new(num, 10u64.pow(d.scale)))
}

struct Out {
    root: PathBuf,
    strict: bool,
    started: Instant,
    invalid: usize,
    written: Vec<PathBuf>,
}

impl Out {
    fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Records every member file of the Bookshelf bundle behind `aux`.
    fn bundle(&mut self, aux: &std::path::Path) {
        let mut files: Vec<PathBuf> = aux
            .parent()
            .and_then(|d| std::fs::read_dir(d).ok())
            .map(|it| it.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.is_file()).collect())
            .unwrap_or_else(|| vec![aux.to_path_buf()]);
        files.sort();
        self.written.extend(files);
    }

    fn text(&mut self, rel: &str, text: &str) -> Result<(), CliError> {
        let p = self.path(rel);
        write_file(&p, text)?;
        self.written.push(p);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).map_err(fail)?;
        s.push('\n');
        self.text(rel, &s)
    }

    fn record(&self, design: &Design, stage: &str) -> MetricsRecord {
        let mut r = MetricsRecord::from_design(design, stage, "rosetta-pd");
        r.runtime_s = self.started.elapsed().as_secs_f64();
        r.memory_peak_kib = peak_memory_kib();
        r
    }

    fn metrics(&mut self, rel: &str, mut record: MetricsRecord, report: &ValidationReport) -> Result<(), CliError> {
        record.violations = report.histogram();
        let text = emit_metrics(&record).map_err(fail)?;
        self.text(rel, &text)
    }

    /// Validation report and metrics record for `design`; `extra` adds
    /// checks beyond `validate_design`.
    fn check_design(&mut self, design: &Design, stage: &str, extra: Option<ValidationReport>, record: Option<MetricsRecord>) -> Result<(), CliError> {
        let mut report = validate_design(design);
        if let Some(x) = extra {
            report.violations.extend(x.violations);
        }
        self.invalid += report.len();
        let base = format!("reports/{stage}.{}", design.name);
        self.json(&format!("{base}.validation.json"), &report)?;
        let rec = record.unwrap_or_else(|| self.record(design, stage));
        self.metrics(&format!("{base}.metrics.json"), rec, &report)
    }

    /// DEF, LEF and structural netlist of `design` under `dir`.
    fn design_files(&mut self, dir: &str, design: &Design, lef: &LefSubset) -> Result<(), CliError> {
        let name = &design.name;
        self.text(&format!("{dir}/{name}.def"), &write_def(design))?;
        let lef_dir = if dir == "designs" { "tech" } else { dir };
        self.text(&format!("{lef_dir}/{name}.lef"), &write_lef_subset(lef))?;
        let v = write_structural_netlist(design)?;
        self.text(&format!("{dir}/{name}.v"), &v)
    }

    fn finish(self) -> Result<(), CliError> {
        if self.invalid > 0 {
            let msg = format!("validation found {} violation(s); see {}/reports", self.invalid, self.root.display());
            if self.strict {
                return Err(CliError::Failed(msg));
            }
            eprintln!("warning: {msg}");
        }
        println!("wrote {} file(s) under {}", self.written.len(), self.root.display());
        Ok(())
    }
}

/// Library for writing `design`: `base` at the design's units plus any
/// design masters and sites the base lacks.
fn design_lef(base: Option<&LefSubset>, design: &Design) -> Result<LefSubset, CliError> {
    let mut lef = match base {
        Some(b) => rescale_lef(b, design.units)?,
        None => LefSubset::new(design.units),
    };
    for m in &design.masters {
        if lef.macro_named(&m.name).is_none() {
            lef.macros.push(m.clone());
        }
    }
    for s in &design.sites {
        if !lef.sites.iter().any(|x| x.name == s.name) {
            lef.sites.push(s.clone());
        }
    }
    Ok(lef)
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn load_lef(path: &Path) -> Result<LefSubset, CliError> {
    let text = read_file(path)?;
    let p = parse_lef(&path.display().to_string(), &text)?;
    warn_all(&p.warnings);
    Ok(p.value)
}

fn load_bundle(path: &Path) -> Result<BookshelfBundle, CliError> {
    let p = parse_bookshelf(path, ParseOptions::default())?;
    warn_all(&p.warnings);
    Ok(p.value)
}

enum Loaded {
    Bookshelf(BookshelfBundle, Design),
    LefDef(LefSubset, Design),
}

impl Loaded {
    fn design(&self) -> &Design {
        match self {
            Loaded::Bookshelf(_, d) | Loaded::LefDef(_, d) => d,
        }
    }

    fn lef(&self) -> Option<&LefSubset> {
        match self {
            Loaded::Bookshelf(..) => None,
            Loaded::LefDef(l, _) => Some(l),
        }
    }
}

fn load(input: &Input) -> Result<Loaded, CliError> {
    match (&input.aux, &input.lef, &input.def) {
        (Some(aux), None, None) => {
            let b = load_bundle(aux)?;
            let d = bundle_to_design(&b, input.units).map_err(fail)?;
            Ok(Loaded::Bookshelf(b, d))
        }
        (None, Some(lef), Some(def)) => {
            let lib = load_lef(lef)?;
            let text = read_file(def)?;
            let p = parse_def(&def.display().to_string(), &text, &lib)?;
            warn_all(&p.warnings);
            Ok(Loaded::LefDef(lib, p.value))
        }
        _ => Err(CliError::Usage("give either --aux, or both --lef and --def".into())),
    }
}

fn seeds(base: u64, n: u64) -> Vec<u64> {
    (0..n).map(|k| base.wrapping_add(k)).collect()
}

#[derive(Serialize)]
struct PartitionOut<'a> {
    cutsize: u64,
    seed: u64,
    feasible: bool,
    balance: BalancePoint,
    side_weights: [u64; 2],
    /// Vertex name to side (0 = bottom tier).
    sides: std::collections::BTreeMap<&'a str, u8>,
}

fn partition_out<'a>(h: &'a Hypergraph, r: &PartitionResult) -> PartitionOut<'a> {
    PartitionOut {
        cutsize: r.cutsize,
        seed: r.seed,
        feasible: r.feasible,
        balance: r.balance,
        side_weights: r.side_weights,
        sides: h.vertices.iter().zip(&r.side).map(|(v, &s)| (v.name.as_str(), s)).collect(),
    }
}

fn best_partition(h: &Hypergraph, ub: f64, seed_list: &[u64]) -> Result<PartitionResult, CliError> {
    let bp = BalancePoint::new(0.5, ub / 100.0);
    bp.check().map_err(|e| CliError::Usage(e.to_string()))?;
    let sweep = par_sweep(h, SweepKind::Ub, &[(ub, bp)], seed_list);
    match sweep.best {
        Some(b) => Ok(b.result),
        None => Err(fail(sweep.points[0].skipped.clone().unwrap_or_else(|| "no feasible partition".into()))),
    }
}

fn run_cmd(g: &Global, cmd: Cmd) -> Result<(), CliError> {
    let mut out = Out { root: g.out.clone(), strict: g.strict, started: Instant::now(), invalid: 0, written: Vec::new() };
    match cmd {
        Cmd::Translate { from: SourceFormat::Bookshelf, input } => {
            let Loaded::Bookshelf(_, d) = load(&input)? else {
                return Err(CliError::Usage("translate --from bookshelf needs --aux".into()));
            };
            let lef = design_lef(None, &d)?;
            out.design_files("designs", &d, &lef)?;
            out.check_design(&d, "translate", None, None)?;
        }
        Cmd::Translate { from: SourceFormat::Fakelefdef, input } => {
            let Loaded::LefDef(lib, d) = load(&input)? else {
                return Err(CliError::Usage("translate --from fakelefdef needs --lef and --def".into()));
            };
            let bundle = fake_to_bookshelf(&lib, &d);
            let aux = write_bundle(&bundle, &out.path(&format!("designs/{}", bundle.name)))?;
            out.bundle(&aux);
            let back = bundle_to_design(&bundle, d.units).map_err(fail)?;
            let lef = design_lef(None, &back)?;
            out.design_files("designs", &back, &lef)?;
            out.check_design(&back, "translate", None, None)?;
        }
        Cmd::Repair { input, max_area_ratio, grid } => {
            let cfg = RepairConfig {
                max_instance_area_ratio: parse_ratio(&max_area_ratio).map_err(CliError::Usage)?,
                grid,
                strict: g.strict,
            };
            cfg.check().map_err(|e| CliError::Usage(e.to_string()))?;
            let loaded = load(&input)?;
            let (d, log) = repair_pipeline(loaded.design(), &cfg).map_err(fail)?;
            let lef = design_lef(loaded.lef(), &d)?;
            out.design_files("designs", &d, &lef)?;
            out.json(&format!("reports/repair.{}.json", d.name), &log)?;
            let legal = legality_check(&d, &lef);
            out.check_design(&d, "repair", Some(legal), None)?;
        }
        Cmd::Remap { input, target_lef, allow_pin_drop } => {
            let target = load_lef(&target_lef)?;
            let bundle = match load(&input)? {
                Loaded::Bookshelf(b, _) => b,
                Loaded::LefDef(lib, d) => fake_to_bookshelf(&lib, &d),
            };
            let (d, used, report) = remap_to_pdk(&bundle, &target, &RemapPolicy { allow_pin_drop }).map_err(fail)?;
            out.design_files("designs", &d, &used)?;
            out.json(&format!("reports/remap.{}.json", d.name), &report)?;
            let legal = legality_check(&d, &target);
            out.check_design(&d, "remap", Some(legal), None)?;
        }
        Cmd::Enable3d { tech_lef, top_lef, metals, units, pitch, resistance, compat, pitch_sweep } => {
            let lib = match &tech_lef {
                Some(p) => load_lef(p)?,
                None => LefSubset::from_tech(&TechStack::synthetic("synthetic", metals, units), Vec::new()),
            };
            let top = match top_lef.as_deref() {
                Some(p) => Some(rescale_lef(&load_lef(p)?, lib.units)?),
                None => None,
            };
            let hbt = HbtSpec::from_pitch(pitch, resistance).map_err(|e| CliError::Usage(e.to_string()))?;
            let bottom_tech = TechStack::from_lef("bottom", &lib);
            let top_tech = TechStack::from_lef("top", top.as_ref().unwrap_or(&lib));
            let cfg = StackConfig { bottom_tech, top_tech, hbt, legacy_compat_layers: compat, pdn_isolated: true };
            let stack = build_3d_tech(&cfg).map_err(fail)?;
            let (lib_a, lib_b) = match &top {
                Some(t) => {
                    let (unified, hidden) = build_unified_library(&lib, t).map_err(fail)?;
                    out.text("tech/unified.lef", &write_lef_subset(&unified))?;
                    out.json("reports/hidden_pins.json", &hidden)?;
                    let keep = |l: &LefSubset| LefSubset {
                        macros: l.macros.iter().filter(|m| unified.macro_named(&m.name).is_some()).cloned().collect(),
                        ..l.clone()
                    };
                    (keep(&lib), keep(t))
                }
                None => (lib.clone(), lib.clone()),
            };
            let mut masters = Vec::new();
            for (l, tier) in [(&lib_a, Tier::Bottom), (&lib_b, Tier::Upper)] {
                let ms = derive_tier_masters(l, tier).map_err(fail)?;
                let covers: Vec<_> = ms.iter().map(cover_of).collect();
                masters.extend(ms);
                masters.extend(covers);
            }
            out.text("tech/3d.lef", &write_lef(&stack, &masters))?;
            out.json("reports/stack_manifest.json", &stack_manifest(&cfg, &stack))?;
            if !pitch_sweep.is_empty() {
                let specs = hbt_pitch_sweep(&hbt, &pitch_sweep).map_err(|e| CliError::Usage(e.to_string()))?;
                out.json("reports/hbt_sweep.json", &specs)?;
            }
            let mut d = Design::new("stack3d", stack.units);
            d.masters = masters;
            out.check_design(&d, "enable3d", None, None)?;
        }
        Cmd::Partition { input, sweep, lo, hi, points, seeds: n, base_start, tolerance, ub, resample_size, resamples } => {
            let loaded = load(&input)?;
            let d = loaded.design();
            let h = design_to_hypergraph(d).map_err(fail)?;
            let seed_list = seeds(g.seed, n.max(1));
            let usage = |e: rosetta_pd_core::partition::PartitionError| CliError::Usage(e.to_string());
            let best = match sweep {
                Some(kind) => {
                    let s = match kind {
                        SweepArg::Ub => par_ubfactor_sweep(&h, lo, hi, points, &seed_list).map_err(usage)?,
                        SweepArg::Base => par_base_balance_sweep(&h, (base_start, 1.0 - base_start), points, tolerance, &seed_list).map_err(usage)?,
                    };
                    let report = sweep_report(&s, &seed_list, resample_size, resamples, g.seed).map_err(usage)?;
                    let tag = match kind {
                        SweepArg::Ub => "ub",
                        SweepArg::Base => "base",
                    };
                    out.json(&format!("reports/sweep_{tag}.{}.json", d.name), &report)?;
                    out.text(&format!("reports/sweep_{tag}.{}.csv", d.name), &sweep_csv(&report))?;
                    s.best.map(|b| b.result)
                }
                None => Some(best_partition(&h, ub, &seed_list)?),
            };
            let mut rec = out.record(d, "partition");
            if let Some(b) = &best {
                out.json(&format!("reports/partition.{}.json", d.name), &partition_out(&h, b))?;
                rec.cutsize = Some(b.cutsize);
            } else {
                eprintln!("warning: no feasible partition at any sweep point");
            }
            out.check_design(d, "partition", None, Some(rec))?;
        }
        Cmd::Tierview { input, stack, top_lef, ub, seeds: n, include_io } => {
            let loaded = load(&input)?;
            let d = loaded.design();
            let lib = design_lef(loaded.lef(), d)?;
            let h = design_to_hypergraph(d).map_err(fail)?;
            let part = best_partition(&h, ub, &seeds(g.seed, n.max(1)))?;
            let kind = match stack {
                StackArg::Homogeneous => StackKind::Homogeneous,
                StackArg::Heterogeneous => StackKind::Heterogeneous,
            };
            let ta = assign_tiers(d, &h, &part, kind).map_err(fail)?;
            let (bottom, upper, hidden) = match (stack, &top_lef) {
                (StackArg::Homogeneous, _) => (
                    TierLibrary::derive(&lib, Tier::Bottom, None).map_err(fail)?,
                    TierLibrary::derive(&lib, Tier::Upper, None).map_err(fail)?,
                    Default::default(),
                ),
                (StackArg::Heterogeneous, Some(p)) => {
                    let top = rescale_lef(&load_lef(p)?, lib.units)?;
                    let (_, hidden) = build_unified_library(&lib, &top).map_err(fail)?;
                    (
                        TierLibrary::derive(&lib, Tier::Bottom, Some(LibrarySide::A)).map_err(fail)?,
                        TierLibrary::derive(&top, Tier::Upper, Some(LibrarySide::B)).map_err(fail)?,
                        hidden,
                    )
                }
                (StackArg::Heterogeneous, None) => return Err(CliError::Usage("--stack heterogeneous needs --top-lef".into())),
            };
            let views = generate_tier_views(d, &ta, &bottom, &upper, &hidden).map_err(fail)?;
            let routing = lib.layers.iter().any(|l| l.kind == rosetta_pd_core::model::LayerKind::Routing);
            let tech = if routing {
                build_3d_tech(&StackConfig::homogeneous(TechStack::from_lef(&d.name, &lib))).map_err(fail)?
            } else {
                TechStack::new(&d.name, lib.units)
            };
            let mut view_lib = LefSubset::from_tech(&tech, Vec::new());
            for v in [&views.bottom, &views.upper] {
                view_lib = design_lef(Some(&view_lib), v)?;
            }
            view_lib.macros.sort_by(|a, b| a.name.cmp(&b.name));
            out.text(&format!("tech/{}_3d.lef", d.name), &write_lef_subset(&view_lib))?;
            let hbt = estimate_hbt_count(&views.report, include_io) as u64;
            for (tier, v) in [(Tier::Bottom, &views.bottom), (Tier::Upper, &views.upper)] {
                let tag = format!("{}_{}", d.name, tier.as_str().to_ascii_lowercase());
                let mut view = v.clone();
                view.name = tag.clone();
                out.text(&format!("views/{tag}.def"), &write_def(&view))?;
                out.text(&format!("views/{tag}.v"), &write_structural_netlist(&view)?)?;
                let mut rec = out.record(&view, "tierview");
                rec.cutsize = Some(part.cutsize);
                rec.hbt_estimate = Some(hbt);
                let strategy = rosetta_pd_core::tierview::TierStrategy { mode: rosetta_pd_core::tierview::StrategyMode::Flexible, active_tier: tier };
                let extra = rosetta_pd_core::tierview::check_tier_strategy(&view, &strategy);
                out.check_design(&view, "tierview", Some(extra), Some(rec))?;
            }
            out.json(&format!("reports/cross_tier.{}.json", d.name), &views.report)?;
            out.json(&format!("reports/tier_assignment.{}.json", d.name), &ta)?;
        }
        Cmd::Metrics { input, compare, stage } => {
            if !compare.is_empty() {
                let mut records = Vec::new();
                for p in &compare {
                    let text = read_file(p)?;
                    records.push(validate_metrics_json(&text).map_err(|e| fail(format!("{}: {e}", p.display())))?);
                }
                out.text("reports/compare.csv", &compare_runs(&records))?;
            } else {
                let loaded = load(&input)?;
                let d = loaded.design();
                let rec = out.record(d, &stage);
                let legal = legality_check(d, &design_lef(loaded.lef(), d)?);
                out.check_design(d, &stage, Some(legal), Some(rec))?;
            }
        }
        Cmd::Synth { instances, degree, depth, no_place } => {
            let mut cfg = SynthConfig::new(instances, parse_ratio(&degree).map_err(CliError::Usage)?, g.seed);
            cfg.hierarchy_depth = depth;
            cfg.place = !no_place;
            cfg.check().map_err(|e| CliError::Usage(e.to_string()))?;
            let d = generate_synthetic(&cfg).map_err(fail)?;
            let lef = design_lef(None, &d)?;
            out.design_files("designs", &d, &lef)?;
            let (_, aux) = write_bookshelf(&d, &out.path(&format!("designs/{}", d.name)))?;
            out.bundle(&aux);
            out.check_design(&d, "synth", None, None)?;
        }
    }
    out.finish()
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit status. Diagnostics go to stderr as single lines.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_argv(argv, &SUBCOMMANDS) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let Cli { global, cmd } = cli;
    match pool.install(|| run_cmd(&global, cmd)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().lines().next().unwrap_or(""));
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!(parse_ratio("64").unwrap(), Ratio::new(64, 1));
        assert_eq!(parse_ratio("2.5").unwrap(), Ratio::new(25, 10));
        assert_eq!(parse_ratio("7/2").unwrap(), Ratio::new(7, 2));
        assert!(parse_ratio("-1").is_err() && parse_ratio("1/0").is_err() && parse_ratio("x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
