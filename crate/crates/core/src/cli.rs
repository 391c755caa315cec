//! The `picard` command line.
//!
//! [`cli_dispatch`] runs one invocation and returns the exit code together
//! with everything written to standard output and standard error, so the
//! binary and the tests share one code path.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::catalog::{self, Cache, Format};
use crate::classgroup::{primary_order, ClassGroup};
use crate::cusp_formulas::{
    self, CongruenceLevel, CuspResult, KfConfig, LocalType, TorsionConvention, Vertex,
};
use crate::error::{Error, Result};
use crate::hermitian_lines::fixtures::{splitting_label, LineWitness, OrbitRecord};
use crate::hermitian_lines::modp::Subgroup;
use crate::hermitian_lines::realize_classes;
use crate::quadfield::Field;

#[derive(Debug, Parser)]
#[command(
    name = "picard",
    about = "Cusp counts of Picard modular surfaces",
    version
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: FormatArg,
    /// Cache file for scan results (default: $PICARD_CACHE, if set).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Ignore and do not write any cache file.
    #[arg(long, global = true)]
    no_cache: bool,
    /// How h_{k,q} is read off the class group.
    #[arg(long, global = true, value_enum, default_value = "torsion")]
    torsion_convention: ConventionArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Md,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    Torsion,
    Primary,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Class group of a fundamental discriminant.
    Classgroup {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
    },
    /// Cusp counts and normalizer indices.
    #[command(subcommand)]
    Cusps(CuspsCommand),
    /// Brute-force oracles.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Scans over fundamental discriminants.
    #[command(subcommand)]
    Scan(ScanCommand),
}

#[derive(Debug, Args)]
struct DiscArg {
    #[arg(long, allow_hyphen_values = true)]
    disc: i64,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Primes with Iwahori level.
    #[arg(long, value_delimiter = ',')]
    iwahori: Vec<u64>,
    /// Iwahori primes admitting a normalizing rotation.
    #[arg(long, value_delimiter = ',')]
    xi: Vec<u64>,
    /// Primes at the non-hyperspecial vertex v1.
    #[arg(long, value_delimiter = ',')]
    v1: Vec<u64>,
    /// Split primes at the vertex v2.
    #[arg(long, value_delimiter = ',')]
    v2: Vec<u64>,
}

#[derive(Debug, Subcommand)]
enum CuspsCommand {
    /// Cusps of the standard lattice (h^r in rank r).
    Std {
        #[command(flatten)]
        disc: DiscArg,
        #[arg(long, default_value_t = 1)]
        r: u32,
    },
    /// Cusps of Gamma(P1, P2, B).
    Congruence {
        #[command(flatten)]
        disc: DiscArg,
        #[arg(long, value_delimiter = ',')]
        p1: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        p2: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        b: Vec<u64>,
    },
    /// Cusps of the maximal lattice of a level.
    Maximal {
        #[command(flatten)]
        disc: DiscArg,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Cusps of the maximal lattice of simple type in SU(r+1, r).
    Higher {
        #[command(flatten)]
        disc: DiscArg,
        #[arg(long)]
        r: u32,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Normalizer index of the standard lattice, and its bound for a level.
    Normalizer {
        #[command(flatten)]
        disc: DiscArg,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Orbits on isotropic points mod p.
    Modp {
        #[command(flatten)]
        disc: DiscArg,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "full")]
        subgroup: String,
    },
    /// Isotropic lines realizing each ideal class.
    Zink {
        #[command(flatten)]
        disc: DiscArg,
        #[arg(long, default_value_t = 20)]
        height: i64,
    },
}

#[derive(Debug, Subcommand)]
enum ScanCommand {
    /// Fields with h = h_{k,3}.
    OneCusped {
        #[arg(long)]
        max: u64,
    },
    /// Fields with h / h_{k,3} <= N.
    NCusped {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        max: u64,
    },
    /// Minimum of h / h_{k,3} per range.
    Growth {
        /// Range `A:B`; repeatable. Default: decades from 10^3 to 10^5.
        #[arg(long = "range")]
        ranges: Vec<String>,
    },
    /// Fields whose standard lattice in SU(r+1, r) has one cusp.
    Higher {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        max: u64,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Run `picard` with `argv` (including the program name).
pub fn cli_dispatch<I, T>(argv: I) -> Outcome
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
                    Outcome {
                        code: 0,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let mut stderr = String::new();
    match run(&cli, &mut stderr) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr,
        },
        Err(e) => {
            let code = if e.is_invariant_violation() { 2 } else { 1 };
            stderr.push_str(&format!("error: {e}\n"));
            Outcome {
                code,
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn format_of(cli: &Cli) -> Format {
    match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Md => Format::Md,
    }
}

fn convention_of(cli: &Cli) -> TorsionConvention {
    match cli.torsion_convention {
        ConventionArg::Torsion => TorsionConvention::Torsion,
        ConventionArg::Primary => TorsionConvention::Primary,
    }
}

fn open_cache(cli: &Cli) -> Result<Cache> {
    if cli.no_cache {
        return Ok(Cache::in_memory());
    }
    let path = cli
        .cache
        .clone()
        .or_else(|| std::env::var_os(catalog::CACHE_ENV).map(PathBuf::from));
    match path {
        Some(p) => Cache::open(p),
        None => Ok(Cache::in_memory()),
    }
}

fn field_of(disc: i64) -> Result<Field> {
    Field::from_disc(disc)
}

fn set(v: &[u64]) -> BTreeSet<u64> {
    v.iter().copied().collect()
}

fn config_of(field: Field, a: &ConfigArgs) -> Result<KfConfig> {
    let mut local = BTreeMap::new();
    let entries = a
        .iwahori
        .iter()
        .map(|&p| (p, LocalType::Iwahori))
        .chain(
            a.v1.iter()
                .map(|&p| (p, LocalType::OtherVertex(Vertex::V1))),
        )
        .chain(
            a.v2.iter()
                .map(|&p| (p, LocalType::OtherVertex(Vertex::V2))),
        );
    for (p, t) in entries {
        if local.insert(p, t).is_some() {
            return Err(Error::InvalidLevel(format!(
                "prime {p} given two local types"
            )));
        }
    }
    KfConfig::new(field, local, set(&a.xi))
}

fn run(cli: &Cli, stderr: &mut String) -> Result<String> {
    let format = format_of(cli);
    let conv = convention_of(cli);
    match &cli.command {
        Command::Classgroup { disc } => {
            let g = ClassGroup::new(*disc)?;
            let forms: Vec<String> = g.forms.iter().map(|c| c.to_string()).collect();
            let gens: Vec<String> = g.generators.iter().map(|c| c.to_string()).collect();
            let row = json!({
                "disc": g.disc,
                "h": g.h(),
                "structure": g.structure_label(),
                "h3": g.torsion_order(3)?,
                "h3_primary": primary_order(g.disc, 3)?,
                "generators": gens.join(" "),
                "forms": forms.join(" "),
            });
            Ok(render_rows(&[row], format))
        }
        Command::Cusps(c) => {
            let results = run_cusps(c, conv)?;
            let rows: Vec<Value> = results.iter().map(cusp_row).collect();
            Ok(render_rows(&rows, format))
        }
        Command::Oracle(OracleCommand::Modp { disc, p, subgroup }) => {
            let s: Subgroup = subgroup.parse()?;
            let rec = OrbitRecord::measure(field_of(disc.disc)?, *p, s)?;
            let row = json!({
                "disc": rec.disc,
                "p": rec.p,
                "splitting": splitting_label(rec.splitting),
                "subgroup": rec.subgroup.to_string(),
                "points": rec.points,
                "orbits": rec.orbits,
            });
            Ok(render_rows(&[row], format))
        }
        Command::Oracle(OracleCommand::Zink { disc, height }) => {
            let field = field_of(disc.disc)?;
            let g = ClassGroup::new(field.disc())?;
            let found = realize_classes(field, *height)?;
            let mut rows = Vec::new();
            for c in &g.forms {
                let row = match found.get(c) {
                    Some((line, h)) => {
                        let w = LineWitness::from_line(line)?;
                        let v: Vec<String> = w
                            .vector
                            .iter()
                            .map(|u| format!("{} {}", u.x, u.y))
                            .collect();
                        json!({"class": c.to_string(), "found": true, "height": h,
                               "vector": v.join(" ; ")})
                    }
                    None => json!({"class": c.to_string(), "found": false, "height": Value::Null,
                                   "vector": ""}),
                };
                rows.push(row);
            }
            let missing = rows.iter().filter(|r| r["found"] == false).count();
            if missing > 0 {
                stderr.push_str(&format!(
                    "{missing} of {} classes not realized within height {height}\n",
                    g.h()
                ));
            }
            Ok(render_rows(&rows, format))
        }
        Command::Scan(s) => {
            let mut cache = open_cache(cli)?;
            run_scan(s, &mut cache, conv, format, stderr)
        }
    }
}

fn run_cusps(c: &CuspsCommand, conv: TorsionConvention) -> Result<Vec<CuspResult>> {
    Ok(match c {
        CuspsCommand::Std { disc, r } => {
            let f = field_of(disc.disc)?;
            if *r == 1 {
                vec![cusp_formulas::cusps_std(f)?]
            } else {
                vec![cusp_formulas::cusps_std_higher(f, *r)?]
            }
        }
        CuspsCommand::Congruence { disc, p1, p2, b } => {
            let f = field_of(disc.disc)?;
            let level = CongruenceLevel::new(f, set(p1), set(p2), set(b))?;
            vec![cusp_formulas::cusps_congruence(&level)?]
        }
        CuspsCommand::Maximal { disc, config } => {
            let cfg = config_of(field_of(disc.disc)?, config)?;
            vec![cusp_formulas::cusps_maximal(&cfg, conv)?]
        }
        CuspsCommand::Higher { disc, r, config } => {
            let cfg = config_of(field_of(disc.disc)?, config)?;
            vec![cusp_formulas::cusps_higher(&cfg, *r, conv)?]
        }
        CuspsCommand::Normalizer { disc, config } => {
            let f = field_of(disc.disc)?;
            let cfg = config_of(f, config)?;
            vec![
                cusp_formulas::normalizer_index_std(f, conv)?,
                cusp_formulas::normalizer_index_bound(&cfg, conv)?,
            ]
        }
    })
}

fn cusp_row(r: &CuspResult) -> Value {
    let inputs: Vec<String> = r.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    json!({
        "formula": r.formula,
        "value": r.value,
        "citation": r.citation,
        "inputs": inputs.join(" "),
        "flags": r.flags.join("; "),
    })
}

fn parse_range(s: &str) -> Result<(u64, u64)> {
    let bad = || Error::InvalidArgument(format!("range must look like A:B, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| *x >= 0.0)
            .map(|x| x as u64)
    };
    Ok((num(a).ok_or_else(bad)?, num(b).ok_or_else(bad)?))
}

fn run_scan(
    s: &ScanCommand,
    cache: &mut Cache,
    conv: TorsionConvention,
    format: Format,
    stderr: &mut String,
) -> Result<String> {
    match s {
        ScanCommand::OneCusped { max } => {
            let rs = catalog::scan_one_cusped(cache, *max, conv)?;
            let mismatched = catalog::scan_all(cache, *max, conv)?
                .iter()
                .filter(|r| r.convention_mismatch)
                .count();
            stderr.push_str(&format!(
                "{} one-cusped fields with |disc| <= {max}; {mismatched} fields where the torsion conventions differ\n",
                rs.len()
            ));
            Ok(catalog::render_records(&rs, format))
        }
        ScanCommand::NCusped { n, max } => {
            let rep = catalog::scan_n_cusped(cache, *n, *max, conv)?;
            match rep.largest_abs_disc {
                Some(a) => stderr.push_str(&format!(
                    "{} fields with h/h3 <= {n} and |disc| <= {max}; largest |disc| {a}\n",
                    rep.records.len()
                )),
                None => {
                    stderr.push_str(&format!("no fields with h/h3 <= {n} and |disc| <= {max}\n"))
                }
            }
            Ok(catalog::render_records(&rep.records, format))
        }
        ScanCommand::Growth { ranges } => {
            let ranges = if ranges.is_empty() {
                catalog::decades(3, 5)
            } else {
                ranges
                    .iter()
                    .map(|r| parse_range(r))
                    .collect::<Result<_>>()?
            };
            let rows = catalog::growth_report(cache, &ranges, conv)?;
            Ok(catalog::render_growth(&rows, format))
        }
        ScanCommand::Higher { r, max } => {
            let rs = catalog::higher_one_cusped(cache, *r, *max, conv)?;
            Ok(catalog::render_records(&rs, format))
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_cell(v: &Value) -> String {
    let s = cell(v);
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// Render flat JSON objects; keys are sorted.
fn render_rows(rows: &[Value], format: Format) -> String {
    let mut out = String::new();
    let keys: Vec<String> = rows
        .first()
        .and_then(Value::as_object)
        .map(|m| m.keys().cloned().collect())
        .unwrap_or_default();
    match format {
        Format::Json => {
            for r in rows {
                out.push_str(&r.to_string());
                out.push('\n');
            }
        }
        Format::Csv => {
            out.push_str(&keys.join(","));
            out.push('\n');
            for r in rows {
                let cells: Vec<String> = keys.iter().map(|k| csv_cell(&r[k])).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        Format::Md => {
            out.push_str(&format!("| {} |\n", keys.join(" | ")));
            out.push_str(&format!("|{}\n", "---|".repeat(keys.len())));
            for r in rows {
                let cells: Vec<String> = keys
                    .iter()
                    .map(|k| cell(&r[k]).replace('|', "\\|"))
                    .collect();
                out.push_str(&format!("| {} |\n", cells.join(" | ")));
            }
        }
    }
    out
}
