//! The `s2rank` command line.
//!
//! Exit status: 0 on success or a consistent table, 1 when an inconsistency is
//! detected, 2 on usage, I/O or parse errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

use crate::completion::{complete_table, merge_tables, MergeOutcome};
use crate::error::Error;
use crate::exterior_det::{det_s2, det_s2_companion, SixColumnInput, Vec2};
use crate::oracle::{gen_random_counts, gen_random_joint, GeneratorConfig};
use crate::pairs::PairFamily;
use crate::probmodel::conditional_matrix;
use crate::rational::{format_rational, Rational};
use crate::reconstruct::{primitive_ray, reconstruct, PopulationTable};
use crate::s2rank::{s2_rank_is_one, s2_rank_is_one_fast, S2RankVerdict};
use crate::tableio::{parse_refinement_map, read_table, Format, TableDocument, TableKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "s2rank",
    version,
    about = "Exact checks and reconstruction for conditional probability tables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Print JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate det^{S^2} of a 2x6 table with both formulas
    Eval {
        table: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Test whether every 2-minor of a table has vanishing det^{S^2}
    Check {
        table: PathBuf,
        /// Stop at the first violation and report only the verdict
        #[arg(long)]
        fast: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Check several tables and flag the ones that cannot come from a joint distribution
    Audit {
        #[arg(required = true)]
        tables: Vec<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Recover weights, distribution vectors and the smallest population
    Reconstruct {
        table: PathBuf,
        /// Also print the interval model on (0,1]
        #[arg(long)]
        intervals: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Fill in the "?" cells of a partial table
    Complete {
        table: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Combine tables over a refined set of points
    Merge {
        #[arg(required = true, num_args = 2..)]
        tables: Vec<PathBuf>,
        /// JSON array of injections, one per table
        #[arg(long)]
        map: PathBuf,
        /// Complete the merged table as well
        #[arg(long)]
        complete: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Print seeded random joint counts
    GenJoint {
        #[arg(long, default_value_t = 4)]
        s: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, env = "S2RANK_SEED", default_value_t = 0)]
        seed: u64,
        /// Bound on the integer weights before normalizing
        #[arg(long, default_value_t = 12)]
        denominator: u32,
        /// Print the conditional table instead of the joint
        #[arg(long)]
        conditional: bool,
        #[command(flatten)]
        out: Output,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::BadHeader(_)
        | Error::InvalidNumber(_)
        | Error::UnknownEntries(_)
        | Error::NonSquare { .. }
        | Error::DimensionMismatch(_)
        | Error::OutOfBounds(_)
        | Error::InvalidRefinement(_)
        | Error::TooLarge { .. }
        | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_INCONSISTENT,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::IncompatibleTables(conflicts) = &e {
                for c in conflicts {
                    let _ = writeln!(
                        err,
                        "  {}: table {} {} = [{}], table {} {} = [{}]",
                        c.pair,
                        c.first.0,
                        c.first.1,
                        c.first.2.join(", "),
                        c.second.0,
                        c.second.1,
                        c.second.2.join(", ")
                    );
                }
            }
            exit_code(&e)
        }
    }
}

type CmdResult = crate::error::Result<i32>;

fn execute(cmd: &Command, w: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Eval { table, out } => eval(table, out.json, w),
        Command::Check { table, fast, out } => check(table, *fast, out.json, w),
        Command::Audit { tables, out } => audit(tables, out.json, w),
        Command::Reconstruct { table, intervals, out } => reconstruct_cmd(table, *intervals, out.json, w),
        Command::Complete { table, out } => complete(table, out.json, w),
        Command::Merge {
            tables,
            map,
            complete,
            out,
        } => merge(tables, map, *complete, out.json, w),
        Command::GenJoint {
            s,
            d,
            seed,
            denominator,
            conditional,
            out,
        } => gen_joint(*s, *d, *seed, *denominator, *conditional, out.json, w),
    }
}

fn print_json(w: &mut dyn Write, value: &impl Serialize) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    writeln!(w, "{text}")
}

/// A conditional table as given, or the conditional table of a joint.
fn load_family(path: &Path) -> crate::error::Result<PairFamily> {
    let doc = read_table(path)?;
    match doc.kind {
        TableKind::JointCounts => conditional_matrix(&doc.to_joint()?),
        _ => doc.to_family(),
    }
}

fn eval(path: &Path, json: bool, w: &mut dyn Write) -> CmdResult {
    let fam = load_family(path)?;
    if (fam.s(), fam.d()) != (4, 2) {
        return Err(Error::DimensionMismatch(format!(
            "eval needs a 2x6 table (s=4, d=2), got s={}, d={}",
            fam.s(),
            fam.d()
        )));
    }
    let cols: [Vec2; 6] = std::array::from_fn(|k| Vec2::new(fam.columns()[k][0].clone(), fam.columns()[k][1].clone()));
    let input = SixColumnInput::new(cols);
    let (expansion, companion) = (det_s2(&input), det_s2_companion(&input));
    if json {
        print_json(
            w,
            &json!({ "det_s2": expansion.to_string(), "companion": companion.to_string() }),
        )?;
    } else {
        writeln!(w, "det_s2 = {expansion} ({})", format_rational(&expansion))?;
        writeln!(w, "companion determinant = {companion}")?;
    }
    Ok(EXIT_OK)
}

fn write_verdict(w: &mut dyn Write, v: &S2RankVerdict) -> std::io::Result<()> {
    writeln!(w, "minors checked: {}", v.minors_checked)?;
    writeln!(w, "violations: {}", v.violations.len())?;
    for viol in &v.violations {
        writeln!(
            w,
            "  {}: det_s2 = {} ({})",
            viol.selector,
            viol.value,
            format_rational(&viol.value)
        )?;
    }
    writeln!(w, "S^2-rank 1: {}", if v.rank_one { "yes" } else { "no" })
}

fn check(path: &Path, fast: bool, json: bool, w: &mut dyn Write) -> CmdResult {
    let fam = load_family(path)?;
    let verdict = if fast {
        s2_rank_is_one_fast(&fam).map(|ok| (ok, None))
    } else {
        s2_rank_is_one(&fam).map(|v| (v.rank_one, Some(v)))
    };
    match verdict {
        Err(Error::TooSmall { s, d }) => {
            if json {
                print_json(w, &json!({ "rank_one": true, "vacuous": true, "s": s, "d": d }))?;
            } else {
                writeln!(w, "no 2-minors for s={s}, d={d}; S^2-rank 1 holds vacuously")?;
            }
            Ok(EXIT_OK)
        }
        Err(e) => Err(e),
        Ok((ok, full)) => {
            match (&full, json) {
                (Some(v), true) => print_json(w, v)?,
                (Some(v), false) => write_verdict(w, v)?,
                (None, true) => print_json(w, &json!({ "rank_one": ok }))?,
                (None, false) => writeln!(w, "S^2-rank 1: {}", if ok { "yes" } else { "no" })?,
            }
            Ok(if ok { EXIT_OK } else { EXIT_INCONSISTENT })
        }
    }
}

#[derive(Serialize)]
struct AuditLine {
    table: String,
    consistent: bool,
    reason: Option<String>,
    population: Option<String>,
}

fn audit_one(path: &Path) -> crate::error::Result<AuditLine> {
    let fam = load_family(path)?;
    let table = path.display().to_string();
    let fail = |reason: String| AuditLine {
        table: table.clone(),
        consistent: false,
        reason: Some(reason),
        population: None,
    };
    if let Some((_, why)) = fam.first_non_stochastic() {
        return Ok(fail(format!("not column-stochastic: {why}")));
    }
    match s2_rank_is_one(&fam) {
        Ok(v) if !v.rank_one => {
            let first = &v.violations[0];
            return Ok(fail(format!("det_s2 = {} on {}", first.value, first.selector)));
        }
        Ok(_) | Err(Error::TooSmall { .. }) => {}
        Err(e) => return Ok(fail(e.to_string())),
    }
    match reconstruct(&fam) {
        Ok(r) => Ok(AuditLine {
            table,
            consistent: true,
            reason: None,
            population: Some(r.population.total.to_string()),
        }),
        Err(e) => Ok(fail(e.to_string())),
    }
}

fn audit(paths: &[PathBuf], json: bool, w: &mut dyn Write) -> CmdResult {
    let lines = paths
        .iter()
        .map(|p| audit_one(p))
        .collect::<crate::error::Result<Vec<_>>>()?;
    if json {
        print_json(w, &lines)?;
    } else {
        for l in &lines {
            match (&l.reason, &l.population) {
                (Some(r), _) => writeln!(w, "{}: FAIL {r}", l.table)?,
                (None, Some(n)) => writeln!(w, "{}: ok (N = {n})", l.table)?,
                (None, None) => writeln!(w, "{}: ok", l.table)?,
            }
        }
    }
    Ok(if lines.iter().all(|l| l.consistent) {
        EXIT_OK
    } else {
        EXIT_INCONSISTENT
    })
}

fn show_vector(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn reconstruct_cmd(path: &Path, intervals: bool, json: bool, w: &mut dyn Write) -> CmdResult {
    let fam = load_family(path)?;
    let r = reconstruct(&fam)?;
    let ray: Vec<String> = primitive_ray(&r.weights).iter().map(ToString::to_string).collect();
    let counts = TableDocument::from_population(&r.population);
    if json {
        let mut doc = json!({
            "weights": r.weights,
            "ray": ray,
            "points": r.points,
            "population": r.population,
        });
        if intervals {
            doc["intervals"] = serde_json::to_value(&r.intervals).map_err(std::io::Error::other)?;
        }
        print_json(w, &doc)?;
        return Ok(EXIT_OK);
    }
    writeln!(w, "weights (lambda_(1,{}) = 1):", fam.s())?;
    for (p, v) in fam.pairs().iter().zip(r.weights.values()) {
        writeln!(w, "  {p} {v}")?;
    }
    writeln!(w, "primitive ray: {}", ray.join(" "))?;
    writeln!(w, "points:")?;
    for (k, p) in r.points.points.iter().enumerate() {
        writeln!(w, "  p{} = {}", k + 1, show_vector(p))?;
    }
    writeln!(w, "minimal population: N = {}", r.population.total)?;
    write!(w, "{}", counts.to_csv())?;
    if intervals {
        writeln!(w, "interval model:")?;
        for seg in &r.intervals.segments {
            writeln!(w, "  ({}, {}] X={} Y={}", seg.lo, seg.hi, seg.x_label, seg.y_label)?;
        }
    }
    Ok(EXIT_OK)
}

fn complete(path: &Path, json: bool, w: &mut dyn Write) -> CmdResult {
    let doc = read_table(path)?;
    let pf = doc.to_partial()?;
    let done = complete_table(&pf)?;
    let table = TableDocument::from_family(&done.family).with_labels(doc.labels.clone());
    if json {
        let inferred: Vec<String> = done.inferred.iter().map(|(p, a)| format!("{p}[{a}]")).collect();
        print_json(
            w,
            &json!({
                "table": serde_json::from_str::<serde_json::Value>(&table.to_json()).map_err(std::io::Error::other)?,
                "weights": done.weights,
                "inferred": inferred,
            }),
        )?;
    } else {
        let inferred: Vec<String> = done
            .inferred
            .iter()
            .map(|(p, a)| format!("{p}[{a}] = {}", format_rational(done.family.entry(p.i, p.j, *a))))
            .collect();
        if !inferred.is_empty() {
            writeln!(w, "# inferred: {}", inferred.join(", "))?;
        }
        write!(w, "{}", table.to_csv())?;
    }
    Ok(EXIT_OK)
}

fn merge(paths: &[PathBuf], map: &Path, and_complete: bool, json: bool, w: &mut dyn Write) -> CmdResult {
    let tables = paths
        .iter()
        .map(|p| load_family(p))
        .collect::<crate::error::Result<Vec<_>>>()?;
    let rm = parse_refinement_map(&std::fs::read_to_string(map)?)?;
    let MergeOutcome { family, shared } = merge_tables(&tables, &rm)?;
    let shared: Vec<String> = shared.iter().map(ToString::to_string).collect();
    let doc = if and_complete {
        TableDocument::from_family(&complete_table(&family)?.family)
    } else {
        TableDocument::from_partial(&family)
    };
    if json {
        print_json(
            w,
            &json!({
                "shared": shared,
                "table": serde_json::from_str::<serde_json::Value>(&doc.to_json()).map_err(std::io::Error::other)?,
            }),
        )?;
    } else {
        writeln!(w, "# shared pairs: {}", shared.join(" "))?;
        write!(w, "{}", doc.to_csv())?;
    }
    Ok(EXIT_OK)
}

fn gen_joint(s: usize, d: usize, seed: u64, bound: u32, conditional: bool, json: bool, w: &mut dyn Write) -> CmdResult {
    if s < 2 || d < 1 || bound < 1 {
        return Err(Error::DimensionMismatch(format!(
            "need s >= 2, d >= 1 and a positive bound, got s={s}, d={d}, bound={bound}"
        )));
    }
    let cfg = GeneratorConfig::fixed(seed, s, d).with_denominator_bound(bound);
    let doc = if conditional {
        TableDocument::from_family(&conditional_matrix(&gen_random_joint(&cfg))?)
    } else {
        let (_, _, counts) = gen_random_counts(&cfg);
        let counts: Vec<Vec<BigInt>> = counts
            .iter()
            .map(|r| r.iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        let total = counts.iter().flatten().sum();
        TableDocument::from_population(&PopulationTable { total, counts })
    };
    let format = if json { Format::Json } else { Format::Csv };
    let text = doc.serialize(format);
    write!(w, "{text}")?;
    if !text.ends_with('\n') {
        writeln!(w)?;
    }
    Ok(EXIT_OK)
}
