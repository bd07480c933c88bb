//! Command-line front end for `declustr`.
//!
//! [`run`] parses an argument vector, dispatches to the library and returns
//! the exit code and output instead of printing, so tests can drive it
//! in-process.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use declustr::analysis::{
    access_table, failure_sets, reconstruction_workload, tradeoff_csv, tradeoff_json,
    tradeoff_table, tradeoff_text, WorkloadReport, N20_LAMBDAS,
};
use declustr::designs::{complete_design, hadamard_3design, reduce_design, Design};
use declustr::erasure_codes::HorizontalCode;
use declustr::layout::{build_layout, layout_geometry, rotate_layout, DeclusteredLayout, Geometry};
use declustr::parity_groups::{GroupFamily, GroupSpec, ParityGroup};
use declustr::simulator::{exhaustive_verify, fail_and_reconstruct, materialize, Fill, SweepOptions};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommandResult {
    /// 0 success, 1 domain error, 2 usage error.
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "declustr", version, about = "Declustered-parity layouts from t-designs")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate, generate and reduce t-designs.
    Design {
        #[command(subcommand)]
        op: DesignOp,
    },
    /// Build parity groups and check C1-C4.
    Group {
        #[command(subcommand)]
        op: GroupOp,
    },
    /// Build, rotate and inspect layouts.
    Layout {
        #[command(subcommand)]
        op: LayoutOp,
    },
    /// Rebuild workloads and the trade-off table.
    Analyze {
        #[command(subcommand)]
        op: AnalyzeOp,
    },
    /// Fail disks on a materialized array and rebuild them.
    Simulate(SimulateArgs),
}

#[derive(Debug, Subcommand)]
enum DesignOp {
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
    /// Every k-subset of n points.
    Complete {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sylvester Hadamard 3-(n, n/2, n/4-1) design.
    Hadamard {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reinterpret a t-design as an s-design.
    Reduce {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodeArg {
    Rdp,
    Rs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Balanced,
    Single,
    Rotations,
}

#[derive(Debug, Args)]
struct GroupArgs {
    /// Group descriptor file.
    #[arg(long, conflicts_with_all = ["code", "p", "k", "delta", "family"])]
    group: Option<PathBuf>,
    #[arg(long, value_enum)]
    code: Option<CodeArg>,
    /// RDP prime.
    #[arg(long)]
    p: Option<usize>,
    /// Reed-Solomon width.
    #[arg(long)]
    k: Option<usize>,
    /// Reed-Solomon parity count.
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long, value_enum, default_value_t = FamilyArg::Balanced)]
    family: FamilyArg,
}

#[derive(Debug, Subcommand)]
enum GroupOp {
    Build {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Verify {
        #[command(flatten)]
        group: GroupArgs,
        /// Largest failure-set size checked; defaults to delta.
        #[arg(long)]
        max_s: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
enum LayoutOp {
    Build {
        #[arg(long)]
        design: PathBuf,
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Rotate {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Inspect {
        #[arg(long)]
        layout: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct FailureArgs {
    /// Failed disks, comma separated.
    #[arg(long, value_delimiter = ',')]
    fail: Option<Vec<usize>>,
    /// Sweep every failure set of this size.
    #[arg(long)]
    exhaustive: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Fixture {
    Fig13,
}

#[derive(Debug, Subcommand)]
enum AnalyzeOp {
    Workload {
        #[arg(long)]
        layout: PathBuf,
        #[command(flatten)]
        failures: FailureArgs,
    },
    Tradeoff {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, required_unless_present = "rows")]
        fixture: Option<Fixture>,
        /// `k:lambda` pairs, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "fixture")]
        rows: Option<Vec<String>>,
    },
    Counterexample {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        fail: Vec<usize>,
        /// Disks shown in the table; all by default.
        #[arg(long, value_delimiter = ',')]
        disks: Option<Vec<usize>>,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    layout: PathBuf,
    #[command(flatten)]
    failures: FailureArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fill data with zeros instead of the seeded stream.
    #[arg(long)]
    zero_fill: bool,
    #[arg(long, env = "DECLUSTR_JOBS")]
    jobs: Option<usize>,
    /// Hex dump of this disk after the rebuild.
    #[arg(long)]
    dump: Option<usize>,
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<declustr::Error> for Failure {
    fn from(e: declustr::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

type CmdResult = Result<String, Failure>;

/// A successful run whose verdict is negative still reports on stdout but
/// exits 1.
struct Verdict {
    ok: bool,
    out: String,
}

pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CommandResult {
                        code: 0,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => CommandResult {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match dispatch(&cli) {
        Ok(v) => CommandResult {
            code: if v.ok { 0 } else { 1 },
            stdout: v.out,
            stderr: String::new(),
        },
        Err(Failure::Usage(msg)) => CommandResult {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Domain(msg)) => CommandResult {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn dispatch(cli: &Cli) -> Result<Verdict, Failure> {
    let f = cli.format;
    let ok = |out: String| Ok(Verdict { ok: true, out });
    match &cli.command {
        Command::Design { op } => match op {
            DesignOp::Validate { file } => validate(f, file),
            DesignOp::Complete { n, k, t, out } => ok(emit_design(f, &complete_design(*n, *k, *t)?, out)?),
            DesignOp::Hadamard { n, out } => ok(emit_design(f, &hadamard_3design(*n)?, out)?),
            DesignOp::Reduce { file, s, out } => {
                let d = reduce_design(&read_design(file)?, *s)?;
                ok(emit_design(f, &d, out)?)
            }
        },
        Command::Group { op } => match op {
            GroupOp::Build { group, out } => ok(group_build(f, &group.resolve()?, out)?),
            GroupOp::Verify { group, max_s } => group_verify(f, &group.resolve()?, *max_s),
        },
        Command::Layout { op } => match op {
            LayoutOp::Build { design, group, out } => {
                let layout = build_layout(&group.resolve()?, &read_design(design)?)?;
                write_layout(&layout, out)?;
                ok(geometry_out(f, &layout))
            }
            LayoutOp::Rotate { layout, out } => {
                let layout = rotate_layout(&read_layout(layout)?)?;
                write_layout(&layout, out)?;
                ok(geometry_out(f, &layout))
            }
            LayoutOp::Inspect { layout } => ok(inspect(f, &read_layout(layout)?)),
        },
        Command::Analyze { op } => match op {
            AnalyzeOp::Workload { layout, failures } => ok(workload(f, &read_layout(layout)?, failures)?),
            AnalyzeOp::Tradeoff { n, fixture, rows } => ok(tradeoff(f, *n, *fixture, rows.as_deref())?),
            AnalyzeOp::Counterexample { layout, fail, disks } => {
                ok(counterexample(f, &read_layout(layout)?, fail, disks.as_deref())?)
            }
        },
        Command::Simulate(args) => simulate(f, args),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn read_design(path: &Path) -> Result<Design, Failure> {
    Ok(Design::from_json(&read_text(path)?)?)
}

fn read_layout(path: &Path) -> Result<DeclusteredLayout, Failure> {
    Ok(DeclusteredLayout::from_json(&read_text(path)?)?)
}

fn write_layout(layout: &DeclusteredLayout, out: &Option<PathBuf>) -> Result<(), Failure> {
    if let Some(path) = out {
        write_text(path, &layout.to_json()?)?;
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

impl GroupArgs {
    fn resolve(&self) -> Result<ParityGroup, Failure> {
        if let Some(path) = &self.group {
            let spec: GroupSpec = serde_json::from_str(&read_text(path)?)
                .map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
            return Ok(spec.build()?);
        }
        let code = match (self.code, self.p, self.k, self.delta) {
            (Some(CodeArg::Rdp), Some(p), None, None) => HorizontalCode::rdp(p)?,
            (Some(CodeArg::Rs), None, Some(k), Some(delta)) => HorizontalCode::reed_solomon(k, delta)?,
            (None, ..) => return Err(Failure::Usage("give --group FILE or --code".into())),
            (Some(CodeArg::Rdp), ..) => return Err(Failure::Usage("--code rdp takes --p only".into())),
            (Some(CodeArg::Rs), ..) => {
                return Err(Failure::Usage("--code rs takes --k and --delta".into()))
            }
        };
        Ok(match self.family {
            FamilyArg::Balanced => ParityGroup::balanced(code),
            FamilyArg::Single => ParityGroup::single(code),
            FamilyArg::Rotations => ParityGroup::rotations(code),
        })
    }
}

fn validate(f: Format, path: &Path) -> Result<Verdict, Failure> {
    let text = read_text(path)?;
    match Design::from_json(&text) {
        Ok(d) => {
            let p = d.params();
            let out = match f {
                Format::Table => format!("valid {p} design, {} blocks\n", d.blocks().len()),
                Format::Csv => format!(
                    "valid,t,n,k,lambda,blocks\ntrue,{},{},{},{},{}\n",
                    p.t,
                    p.n,
                    p.k,
                    p.lambda,
                    d.blocks().len()
                ),
                Format::Json => json(&serde_json::json!({
                    "valid": true,
                    "t": p.t,
                    "n": p.n,
                    "k": p.k,
                    "lambda": p.lambda,
                    "blocks": d.blocks().len(),
                })),
            };
            Ok(Verdict { ok: true, out })
        }
        Err(e @ declustr::Error::Format(_)) => Err(e.into()),
        Err(e) => {
            let out = match f {
                Format::Table => format!("invalid design: {e}\n"),
                Format::Csv => format!("valid,error\nfalse,\"{}\"\n", e.to_string().replace('"', "'")),
                Format::Json => json(&serde_json::json!({ "valid": false, "error": e.to_string() })),
            };
            Ok(Verdict { ok: false, out })
        }
    }
}

fn emit_design(f: Format, d: &Design, out: &Option<PathBuf>) -> CmdResult {
    if let Some(path) = out {
        write_text(path, &d.to_json())?;
    }
    Ok(match f {
        Format::Table => {
            let mut s = format!("{} design, {} blocks\n", d.params(), d.blocks().len());
            for (i, b) in d.blocks().iter().enumerate() {
                let _ = writeln!(s, "{i:>5}: {}", join(b, " "));
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("block,points\n");
            for (i, b) in d.blocks().iter().enumerate() {
                let _ = writeln!(s, "{i},{}", join(b, " "));
            }
            s
        }
        Format::Json => json(&d.to_file()),
    })
}

fn group_build(f: Format, g: &ParityGroup, out: &Option<PathBuf>) -> CmdResult {
    let spec = g.spec()?;
    if let Some(path) = out {
        write_text(path, &json(&spec))?;
    }
    let family = family_name(g.family());
    let symbols: Vec<String> = g.arrangements().iter().map(|a| a.symbols(g.delta())).collect();
    Ok(match f {
        Format::Table => {
            let mut s = format!(
                "{} {family} group: {} extended rows, m = {}\n",
                g.code(),
                g.extended_rows(),
                g.m()
            );
            for (i, a) in symbols.iter().enumerate() {
                let _ = writeln!(s, "{i:>5}: {a}");
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("extended_row,arrangement\n");
            for (i, a) in symbols.iter().enumerate() {
                let _ = writeln!(s, "{i},{a}");
            }
            s
        }
        Format::Json => json(&serde_json::json!({
            "group": spec,
            "m": g.m(),
            "arrangements": symbols,
        })),
    })
}

fn group_verify(f: Format, g: &ParityGroup, max_s: Option<usize>) -> Result<Verdict, Failure> {
    let report = g.verify(max_s.unwrap_or(g.delta()))?;
    let yes = |b: bool| if b { "yes" } else { "no" };
    let tau = |t: &Option<u64>| t.map_or("-".to_string(), |v| v.to_string());
    let out = match f {
        Format::Table => {
            let mut s = format!("{} {} group, m = {}\n", g.code(), family_name(g.family()), g.m());
            let _ = writeln!(s, "C1 data/parity counts   {}", yes(report.c1));
            let _ = writeln!(s, "C2 MDS                  {}", yes(report.c2));
            let _ = writeln!(s, "C3 uniform reads        {}", yes(report.c3));
            let _ = writeln!(s, "C4 equal parity         {}", yes(report.c4));
            for (i, t) in report.tau.iter().enumerate() {
                let _ = writeln!(s, "tau_{}                   {}", i + 1, tau(t));
            }
            let _ = writeln!(s, "parity per column       {}", join(&report.parity_per_column, " "));
            for fr in report.failures.iter().filter(|fr| !fr.uniform()) {
                let reads: Vec<String> = fr.reads.iter().map(|(c, r)| format!("{c}:{r}")).collect();
                let _ = writeln!(s, "lost {:<8} reads {}", join(&fr.lost, ","), reads.join(" "));
            }
            let _ = writeln!(s, "{}", if report.balanced() { "balanced" } else { "not balanced" });
            s
        }
        Format::Csv => {
            let mut s = String::from("check,value\n");
            for (name, v) in [("c1", report.c1), ("c2", report.c2), ("c3", report.c3), ("c4", report.c4)] {
                let _ = writeln!(s, "{name},{v}");
            }
            for (i, t) in report.tau.iter().enumerate() {
                let _ = writeln!(s, "tau_{},{}", i + 1, tau(t));
            }
            s
        }
        Format::Json => json(&report),
    };
    Ok(Verdict {
        ok: report.balanced(),
        out,
    })
}

fn geometry_rows(layout: &DeclusteredLayout, g: &Geometry) -> Vec<(&'static str, String)> {
    let per_disk = if g.parity_uniform() {
        g.parity_units_per_disk[0].to_string()
    } else {
        join(&g.parity_units_per_disk, " ")
    };
    vec![
        ("design", layout.design().params().to_string()),
        ("code", layout.group().code().to_string()),
        ("family", family_name(layout.group().family()).to_string()),
        ("rotated", layout.rotated().to_string()),
        ("instances", g.instances.to_string()),
        ("column_units_per_disk", g.column_units_per_disk.to_string()),
        ("group_depth", g.group_depth.to_string()),
        ("rows_per_disk", g.rows_per_disk.to_string()),
        ("parity_units_per_disk", per_disk),
        ("parity_disks", g.parity_disks.to_string()),
        ("data_disks", g.data_disks.to_string()),
    ]
}

fn geometry_out(f: Format, layout: &DeclusteredLayout) -> String {
    let g = layout_geometry(layout);
    match f {
        Format::Table => {
            let mut s = String::new();
            for (k, v) in geometry_rows(layout, &g) {
                let _ = writeln!(s, "{:<22} {v}", k.replace('_', " "));
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("field,value\n");
            for (k, v) in geometry_rows(layout, &g) {
                let _ = writeln!(s, "{k},{v}");
            }
            s
        }
        Format::Json => json(&g),
    }
}

fn inspect(f: Format, layout: &DeclusteredLayout) -> String {
    let units = |x: usize| layout.disk_units(x).to_vec();
    match f {
        Format::Table => {
            let mut s = geometry_out(f, layout);
            s.push('\n');
            for x in 0..layout.n() {
                let cells: Vec<String> = units(x).iter().map(|(i, c)| format!("G{i}.{c}")).collect();
                let _ = writeln!(s, "disk {x:<3} {}", cells.join(" "));
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("disk,slot,instance,column\n");
            for x in 0..layout.n() {
                for (slot, (i, c)) in units(x).iter().enumerate() {
                    let _ = writeln!(s, "{x},{slot},{i},{c}");
                }
            }
            s
        }
        Format::Json => json(&serde_json::json!({
            "geometry": layout_geometry(layout),
            "disks": (0..layout.n()).map(units).collect::<Vec<_>>(),
        })),
    }
}

fn workload_line(r: &WorkloadReport) -> String {
    match r.min_max() {
        Some((lo, _)) if r.uniform => {
            let fraction = r.fraction.map(|x| format!(" ({x} of {})", r.rows_per_disk)).unwrap_or_default();
            format!("uniform reads {lo}/disk{fraction}")
        }
        Some((lo, hi)) => format!("reads {lo}..{hi}/disk"),
        None => "no surviving disks".into(),
    }
}

fn workload(f: Format, layout: &DeclusteredLayout, failures: &FailureArgs) -> CmdResult {
    if let Some(fail) = &failures.fail {
        let r = reconstruction_workload(layout, fail)?;
        return Ok(match f {
            Format::Table => {
                let mut s = format!("failed {}\n", join(&r.failed, ","));
                let _ = writeln!(s, "{:>5} {:>8} {:>13}", "disk", "reads", "column-units");
                for x in 0..r.reads.len() {
                    let _ = writeln!(s, "{x:>5} {:>8} {:>13}", r.reads[x], r.column_units_accessed[x]);
                }
                let _ = writeln!(s, "{}", workload_line(&r));
                if let Some(c) = r.closed_form {
                    let _ = writeln!(s, "closed form {c}");
                }
                s
            }
            Format::Csv => {
                let mut s = String::from("disk,failed,reads,column_units\n");
                for x in 0..r.reads.len() {
                    let _ = writeln!(
                        s,
                        "{x},{},{},{}",
                        r.failed.contains(&x),
                        r.reads[x],
                        r.column_units_accessed[x]
                    );
                }
                s
            }
            Format::Json => json(&r),
        });
    }
    let s = failures.exhaustive.expect("clap requires one of the two");
    let reports = failure_sets(layout.n(), s)
        .iter()
        .map(|set| reconstruction_workload(layout, set))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match f {
        Format::Table => {
            let mut out = String::new();
            for r in &reports {
                let _ = writeln!(out, "{:<12} {}", join(&r.failed, ","), workload_line(r));
            }
            let uniform = reports.iter().all(|r| r.uniform);
            let _ = writeln!(
                out,
                "{} failure sets, {}",
                reports.len(),
                if uniform { "all uniform" } else { "not uniform" }
            );
            out
        }
        Format::Csv => {
            let mut out = String::from("failed,min,max,uniform,closed_form\n");
            for r in &reports {
                let (lo, hi) = r.min_max().unwrap_or((0, 0));
                let cf = r.closed_form.map(|c| c.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{},{lo},{hi},{},{cf}", join(&r.failed, " "), r.uniform);
            }
            out
        }
        Format::Json => json(&reports),
    })
}

fn tradeoff(f: Format, n: usize, fixture: Option<Fixture>, rows: Option<&[String]>) -> CmdResult {
    let pairs: Vec<(usize, u64)> = match (fixture, rows) {
        (Some(Fixture::Fig13), _) => {
            if n != 20 {
                return Err(Failure::Usage(format!("the fig13 fixture is for n = 20, got {n}")));
            }
            N20_LAMBDAS.to_vec()
        }
        (None, Some(rows)) => rows
            .iter()
            .map(|r| {
                let (k, l) = r
                    .split_once(':')
                    .ok_or_else(|| Failure::Usage(format!("row `{r}` is not k:lambda")))?;
                let parse = |v: &str| v.trim().parse().map_err(|_| Failure::Usage(format!("bad number in `{r}`")));
                Ok((parse(k)? as usize, parse(l)?))
            })
            .collect::<Result<_, Failure>>()?,
        (None, None) => return Err(Failure::Usage("give --fixture or --rows".into())),
    };
    let table = tradeoff_table(n, &pairs)?;
    Ok(match f {
        Format::Table => tradeoff_text(n, &table),
        Format::Csv => tradeoff_csv(&table),
        Format::Json => {
            let mut s = tradeoff_json(&table);
            s.push('\n');
            s
        }
    })
}

fn counterexample(f: Format, layout: &DeclusteredLayout, fail: &[usize], disks: Option<&[usize]>) -> CmdResult {
    let table = access_table(layout, fail)?;
    let all: Vec<usize> = (0..layout.n()).collect();
    let disks = disks.unwrap_or(&all);
    if let Some(&d) = disks.iter().find(|&&d| d >= layout.n()) {
        return Err(Failure::Domain(format!("disk {d} outside 0..{}", layout.n())));
    }
    Ok(match f {
        Format::Table => table.render(disks),
        Format::Csv => {
            let mut s = String::from("instance,disk,column,label,failed,units_read\n");
            for row in &table.rows {
                for &d in disks {
                    if let Some(c) = &row.cells[d] {
                        let label = c.label.map(|l| l.symbol(table.delta)).unwrap_or_default();
                        let _ = writeln!(
                            s,
                            "{},{d},{},{label},{},{}",
                            row.instance, c.column, c.failed, c.units_read
                        );
                    }
                }
            }
            s
        }
        Format::Json => json(&table),
    })
}

fn simulate(f: Format, args: &SimulateArgs) -> Result<Verdict, Failure> {
    let layout = read_layout(&args.layout)?;
    let fill = if args.zero_fill { Fill::Zero } else { Fill::Seeded(args.seed) };
    if args.jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    if let Some(s) = args.failures.exhaustive {
        let summary = exhaustive_verify(&layout, s, SweepOptions { fill, jobs: args.jobs })?;
        let out = match f {
            Format::Table => {
                let mut out = format!("{}\n", summary.headline());
                for o in &summary.sets {
                    let _ = writeln!(
                        out,
                        "{:<12} {:<9} {}..{}",
                        join(&o.failed, ","),
                        if o.passed() { "ok" } else { "FAILED" },
                        o.min,
                        o.max
                    );
                }
                out
            }
            Format::Csv => {
                let mut out = String::from("failed,recovered,matches_prediction,min,max\n");
                for o in &summary.sets {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        join(&o.failed, " "),
                        o.recovered,
                        o.matches_prediction,
                        o.min,
                        o.max
                    );
                }
                out
            }
            Format::Json => json(&summary),
        };
        return Ok(Verdict {
            ok: summary.all_passed(),
            out,
        });
    }

    let fail = args.failures.fail.as_deref().expect("clap requires one of the two");
    let array = materialize(&layout, fill);
    let (recovered, io) = fail_and_reconstruct(&array, fail)?;
    let predicted = reconstruction_workload(&layout, fail)?;
    let exact = recovered == array;
    let matches = io.reads == predicted.reads;
    let mut out = match f {
        Format::Table => {
            let mut s = format!(
                "failed {}: {}, reads {}\n",
                join(&predicted.failed, ","),
                if exact { "recovered" } else { "NOT recovered" },
                if matches { "as predicted" } else { "differ from prediction" }
            );
            let _ = writeln!(s, "{:>5} {:>8} {:>8}", "disk", "read", "written");
            for x in 0..layout.n() {
                let _ = writeln!(s, "{x:>5} {:>8} {:>8}", io.reads[x], io.writes[x]);
            }
            let _ = writeln!(s, "{}", workload_line(&predicted));
            s
        }
        Format::Csv => {
            let mut s = String::from("disk,read,written\n");
            for x in 0..layout.n() {
                let _ = writeln!(s, "{x},{},{}", io.reads[x], io.writes[x]);
            }
            s
        }
        Format::Json => json(&serde_json::json!({
            "failed": predicted.failed,
            "recovered": exact,
            "matches_prediction": matches,
            "io": io,
        })),
    };
    if let Some(d) = args.dump {
        if d >= layout.n() {
            return Err(Failure::Domain(format!("disk {d} outside 0..{}", layout.n())));
        }
        if f == Format::Table {
            out.push('\n');
            out.push_str(&recovered.hex_dump(d));
        }
    }
    Ok(Verdict {
        ok: exact && matches,
        out,
    })
}

fn family_name(f: GroupFamily) -> &'static str {
    match f {
        GroupFamily::Balanced => "balanced",
        GroupFamily::Single => "single",
        GroupFamily::Rotations => "rotations",
        GroupFamily::Custom => "custom",
    }
}
