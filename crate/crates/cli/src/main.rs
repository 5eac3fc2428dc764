use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use zslab::lengths::delta_of;
use zslab::structure::{self, classify_aamp, min_bound};
use zslab::verify::{registry, run_check, run_suite};
use zslab::zerosum::parse_subset;
use zslab::{BlockMonoid, Cache, Error, FiniteAbelianGroup, GroupElement, LengthSet, Params, Sequence, Status, SuiteConfig};

/// Arithmetic invariants of monoids of zero-sum sequences over finite
/// abelian groups.
///
/// Groups are written `C6`, `C2^2xC12` or `2,2,12`. Elements are coordinate
/// tuples `(1,0)`; bare integers are accepted in cyclic groups. Subsets are
/// lists `[(1,0),(0,1)]`, sequences `[(1)*2,(2)*1]`.
///
/// Exit status: 0 on success, 1 when a check fails or an I/O error occurs,
/// 2 on malformed input.
#[derive(Parser, Debug)]
#[command(name = "zslab", version, max_term_width = 100)]
struct Cli {
    /// Output format; sets are always printed sorted.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads, 0 for one per core. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Directory for cached atom sets and length tables [env: ZSLAB_CACHE].
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Target {
    /// Ambient group.
    #[arg(long)]
    group: String,
    /// Subset G0 of the group; defaults to the whole group.
    #[arg(long)]
    subset: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Group information.
    Group {
        #[command(subcommand)]
        command: GroupCommand,
    },
    /// Atoms (minimal zero-sum sequences) over G0.
    Atoms(Target),
    /// Davenport constant D(G0) by exhaustive enumeration.
    Davenport(Target),
    /// Set of lengths and its distances, as {"B", "L", "delta"}.
    Lengths {
        #[command(flatten)]
        target: Target,
        /// Zero-sum sequence over G0.
        #[arg(long)]
        seq: String,
    },
    /// U_k: union of all sets of lengths containing k.
    Uk {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: u32,
    },
    /// U_M: union of all sets of lengths containing every element of M.
    Um {
        #[command(flatten)]
        target: Target,
        /// Comma-separated list, e.g. `2,8`.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u32>,
    },
    /// rho_k = max U_k.
    Rho {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: u32,
    },
    /// lambda_k = min U_k.
    Lambda {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: u32,
    },
    /// Largest rho_k / k for k up to a limit.
    Elasticity {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 4)]
        k_max: u32,
    },
    /// Largest min(L(uv) \ {2}) over pairs of atoms.
    Daleth(Target),
    /// Distances of sets of lengths of sequences up to a length bound.
    Delta {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        bound: usize,
    },
    /// Minimal distances over all subsets of the group, up to a length bound.
    DeltaStar {
        #[arg(long)]
        group: String,
        #[arg(long)]
        bound: usize,
    },
    /// min Delta({e, ae}) in C_n from the continued fraction of n/a.
    MindeltaCf {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        a: u64,
    },
    /// Almost arithmetic multiprogressions.
    Aamp {
        #[command(subcommand)]
        command: AampCommand,
    },
    /// Run named checks (`all` for the whole suite).
    Verify {
        /// Check name, or `all`.
        name: String,
        /// Shorthand for `--format json`.
        #[arg(long)]
        json: bool,
        /// With `all`: run only these checks.
        #[arg(long, value_delimiter = ',')]
        include: Vec<String>,
        /// With `all`: skip these checks.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
        /// Restrict a single check to these groups (`C3;C2^2`).
        #[arg(long)]
        group: Option<String>,
        /// Check parameter `key=value`; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Treat the first expectation of the named check as unmet.
        #[arg(long, hide = true)]
        tamper: Option<String>,
    },
    /// Cache maintenance.
    Cache {
        #[command(subcommand)]
        command: CacheCommand,
    },
}

#[derive(Subcommand, Debug)]
enum GroupCommand {
    /// Invariant factors, order, exponent, rank and D*.
    Info {
        #[arg(long)]
        group: String,
    },
}

#[derive(Subcommand, Debug)]
enum AampCommand {
    /// Classify a set as an AAMP with difference d and bound M.
    Classify {
        /// Comma-separated set.
        #[arg(long, value_delimiter = ',', required = true)]
        set: Vec<u32>,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        bound: u32,
    },
    /// Smallest bound for which the set is an AAMP with difference d.
    MinBound {
        #[arg(long, value_delimiter = ',', required = true)]
        set: Vec<u32>,
        #[arg(long)]
        d: u32,
    },
}

#[derive(Subcommand, Debug)]
enum CacheCommand {
    /// Remove all cache entries.
    Purge,
}

/// Output of one command: JSON value, text rendering, and CSV rows.
struct Output {
    json: Value,
    text: String,
    csv: Vec<Vec<String>>,
}

impl Output {
    fn scalar(json: Value, header: &str, value: impl ToString) -> Output {
        let v = value.to_string();
        Output { json, text: v.clone(), csv: vec![vec![header.into()], vec![v]] }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("serializable"),
            Format::Text => self.text.clone(),
            Format::Csv => self.csv.iter().map(|row| row.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",")).collect::<Vec<_>>().join("\n"),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn set_rows(header: &str, l: &LengthSet) -> Vec<Vec<String>> {
    std::iter::once(vec![header.to_string()]).chain(l.iter().map(|v| vec![v.to_string()])).collect()
}

struct Session {
    jobs: usize,
    cache: Option<Cache>,
}

impl Session {
    fn group(&self, s: &str) -> Result<FiniteAbelianGroup, Error> {
        s.parse()
    }

    fn target(&self, t: &Target) -> Result<(FiniteAbelianGroup, Vec<GroupElement>), Error> {
        let g = self.group(&t.group)?;
        let subset = match &t.subset {
            Some(s) => parse_subset(&g, s)?,
            None => g.elements().collect(),
        };
        Ok((g, subset))
    }

    fn monoid(&self, t: &Target) -> Result<BlockMonoid, Error> {
        let (g, subset) = self.target(t)?;
        match &self.cache {
            Some(c) => c.block_monoid(&g, &subset, self.jobs),
            None => Ok(BlockMonoid::new(&g, &subset)?.with_jobs(self.jobs)),
        }
    }

    /// Persists memoised lengths; failures only cost recomputation.
    fn save(&self, m: &BlockMonoid) {
        if let Some(c) = &self.cache {
            if let Err(e) = c.save_lengths(m) {
                log::warn!("cache write failed: {e}");
            }
        }
    }
}

fn subset_strings(subset: &[GroupElement]) -> Vec<String> {
    subset.iter().map(ToString::to_string).collect()
}

fn report_json(r: &impl serde::Serialize) -> Value {
    serde_json::to_value(r).expect("serializable")
}

fn run(cli: Cli) -> Result<(Output, bool), Error> {
    let jobs = if cli.jobs == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { cli.jobs };
    let s = Session { jobs, cache: Cache::resolve(cli.cache_dir.as_deref()) };
    let out = match cli.command {
        Command::Group { command: GroupCommand::Info { group } } => {
            let g = s.group(&group)?;
            let factors: Vec<String> = g.invariant_factors().iter().map(ToString::to_string).collect();
            let rows = [
                ("group", g.to_string()),
                ("invariant_factors", factors.join(",")),
                ("order", g.order().to_string()),
                ("exponent", g.exponent().to_string()),
                ("rank", g.rank().to_string()),
                ("d_star", g.d_star().to_string()),
                ("cyclic", g.is_cyclic().to_string()),
            ];
            Output {
                json: json!({
                    "group": g.to_string(),
                    "invariant_factors": g.invariant_factors(),
                    "order": g.order(),
                    "exponent": g.exponent(),
                    "rank": g.rank(),
                    "d_star": g.d_star(),
                    "cyclic": g.is_cyclic(),
                }),
                text: rows.iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join("\n"),
                csv: vec![rows.iter().map(|r| r.0.to_string()).collect(), rows.iter().map(|r| r.1.clone()).collect()],
            }
        }
        Command::Atoms(t) => {
            let m = s.monoid(&t)?;
            let atoms: Vec<Sequence> = m.atoms().atoms().collect();
            let text: Vec<String> = atoms.iter().map(ToString::to_string).collect();
            let mut csv = vec![vec!["length".to_string(), "atom".to_string()]];
            csv.extend(atoms.iter().map(|a| vec![a.len().to_string(), a.to_string()]));
            Output {
                json: json!({
                    "group": m.group().to_string(),
                    "subset": subset_strings(m.subset()),
                    "count": atoms.len(),
                    "davenport": m.davenport(),
                    "atoms": text,
                }),
                text: text.join("\n"),
                csv,
            }
        }
        Command::Davenport(t) => {
            let m = s.monoid(&t)?;
            let json = json!({
                "group": m.group().to_string(),
                "subset": subset_strings(m.subset()),
                "davenport": m.davenport(),
                "d_star": m.group().d_star(),
                "exact": true,
            });
            Output::scalar(json, "davenport", m.davenport())
        }
        Command::Lengths { target, seq } => {
            let mut m = s.monoid(&target)?;
            let b = Sequence::parse(m.group(), &seq)?;
            let l = m.length_set(&b)?;
            let delta = delta_of(&l)?;
            s.save(&m);
            let json = json!({"B": b.to_string(), "L": l, "delta": delta});
            let mut csv = vec![vec!["set".to_string(), "value".to_string()]];
            csv.extend(l.iter().map(|v| vec!["L".into(), v.to_string()]));
            csv.extend(delta.iter().map(|v| vec!["delta".into(), v.to_string()]));
            Output { text: serde_json::to_string(&json).expect("serializable"), json, csv }
        }
        Command::Uk { target, k } => {
            let mut m = s.monoid(&target)?;
            let r = m.u_k(k);
            s.save(&m);
            let l = r.lengths.clone().unwrap_or_default();
            Output { json: report_json(&r), text: l.to_string(), csv: set_rows("length", &l) }
        }
        Command::Um { target, m: mset } => {
            let mut m = s.monoid(&target)?;
            let r = m.u_m(&mset)?;
            s.save(&m);
            let l = r.lengths.clone().unwrap_or_default();
            Output { json: report_json(&r), text: l.to_string(), csv: set_rows("length", &l) }
        }
        Command::Rho { target, k } => {
            let mut m = s.monoid(&target)?;
            let mut r = m.u_k(k);
            s.save(&m);
            r.invariant = "rho_k".into();
            r.value = r.max().map(u64::from);
            Output::scalar(report_json(&r), "rho", r.max().map_or("none".into(), |v| v.to_string()))
        }
        Command::Lambda { target, k } => {
            let mut m = s.monoid(&target)?;
            let mut r = m.u_k(k);
            s.save(&m);
            r.invariant = "lambda_k".into();
            r.value = r.min().map(u64::from);
            Output::scalar(report_json(&r), "lambda", r.min().map_or("none".into(), |v| v.to_string()))
        }
        Command::Elasticity { target, k_max } => {
            let mut m = s.monoid(&target)?;
            let e = m.elasticity_up_to(k_max);
            s.save(&m);
            let v = e.map_or("none".to_string(), |r| r.to_string());
            let json = json!({
                "group": m.group().to_string(),
                "subset": subset_strings(m.subset()),
                "k_max": k_max,
                "elasticity": v,
                "exact": false,
            });
            Output::scalar(json, "elasticity", v)
        }
        Command::Daleth(t) => {
            let mut m = s.monoid(&t)?;
            let r = m.daleth();
            s.save(&m);
            Output::scalar(report_json(&r), "daleth", r.value.unwrap_or(0))
        }
        Command::Delta { target, bound } => {
            let mut m = s.monoid(&target)?;
            let r = m.delta_observed(bound);
            s.save(&m);
            Output { json: report_json(&r), text: r.distances.to_string(), csv: set_rows("distance", &r.distances) }
        }
        Command::DeltaStar { group, bound } => {
            let g = s.group(&group)?;
            let r = structure::delta_star_observed(&g, bound, s.jobs)?;
            Output { json: report_json(&r), text: r.values.to_string(), csv: set_rows("min_delta", &r.values) }
        }
        Command::MindeltaCf { n, a } => {
            let cf = structure::cf_odd(n, a)?;
            let v = structure::min_delta_two_element(n, a)?;
            let json = json!({"n": n, "a": a, "expansion": cf.terms, "min_delta": v});
            Output::scalar(json, "min_delta", v)
        }
        Command::Aamp { command: AampCommand::Classify { set, d, bound } } => {
            let l = aamp_input(&set, d)?;
            let desc = classify_aamp(&l, d, bound);
            let text = desc.as_ref().map_or("none".to_string(), ToString::to_string);
            let json = json!({"set": l, "d": d, "bound": bound, "descriptor": desc});
            Output::scalar(json, "descriptor", text)
        }
        Command::Aamp { command: AampCommand::MinBound { set, d } } => {
            let l = aamp_input(&set, d)?;
            let (b, desc) = min_bound(&l, d).ok_or(Error::EmptyLengthSet)?;
            let json = json!({"set": l, "d": d, "bound": b, "descriptor": desc});
            Output::scalar(json, "bound", b)
        }
        Command::Verify { name, json: _, include, exclude, group, params, tamper } => {
            let mut params = Params::parse(&params)?;
            if let Some(g) = group {
                params = params.with("group", g);
            }
            let cfg = SuiteConfig { include, exclude, jobs: s.jobs, cache: s.cache.clone(), tamper };
            let reports = if name == "all" {
                if !params.0.is_empty() {
                    return Err(Error::OutOfContract("parameters apply to a single named check".into()));
                }
                run_suite(&cfg)?
            } else {
                vec![run_check(&name, &params, &cfg)?]
            };
            let failed = reports.iter().any(|r| r.status == Status::Fail);
            return Ok((verify_output(&reports), failed));
        }
        Command::Cache { command: CacheCommand::Purge } => {
            let cache = s.cache.as_ref().ok_or_else(|| Error::OutOfContract("no cache directory: pass --cache-dir or set ZSLAB_CACHE".into()))?;
            let n = cache.purge()?;
            Output::scalar(json!({"dir": cache.dir().display().to_string(), "removed": n}), "removed", n)
        }
    };
    Ok((out, false))
}

fn aamp_input(set: &[u32], d: u32) -> Result<LengthSet, Error> {
    if set.is_empty() {
        return Err(Error::EmptyLengthSet);
    }
    if d == 0 {
        return Err(Error::Parse { token: "0".into(), reason: "difference must be positive".into() });
    }
    Ok(set.iter().copied().collect())
}

fn verify_output(reports: &[zslab::CheckReport]) -> Output {
    let mut text = Vec::new();
    for r in reports {
        text.push(format!("{:<12} {} ({} ms): {}", r.status.to_string(), r.name, r.elapsed_ms, r.summary));
        if r.status != Status::Pass {
            for w in &r.witnesses {
                text.push(format!("    {w}"));
            }
            for c in &r.reproduce {
                text.push(format!("    reproduce: {c}"));
            }
        }
    }
    let mut csv = vec![vec!["name".to_string(), "status".to_string(), "elapsed_ms".to_string(), "summary".to_string()]];
    csv.extend(reports.iter().map(|r| vec![r.name.clone(), r.status.to_string(), r.elapsed_ms.to_string(), r.summary.clone()]));
    Output { json: report_json(&reports), text: text.join("\n"), csv }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let format = match cli.command {
        Command::Verify { json: true, .. } => Format::Json,
        _ => cli.format,
    };
    match run(cli) {
        Ok((out, failed)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", out.render(format));
            ExitCode::from(u8::from(failed))
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::UnknownCheck(_)) {
                let names: Vec<&str> = registry().iter().map(|r| r.0).collect();
                eprintln!("available checks: all, {}", names.join(", "));
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
