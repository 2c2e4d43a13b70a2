//! `fraclab` command-line runner. [`run`] parses the arguments, runs one
//! subcommand and returns the process exit code:
//!
//! * `0` every check passed
//! * `1` a check failed, or the numerics rejected the input (a JSON error record is written)
//! * `2` the request itself was invalid

mod config;
mod output;
pub mod selftest;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use fraclab_core::experiments::{
    bbm_sweep, embedding_ratio, frac_bbm_upper, sobolev_sandwich, Check, ExperimentKind, FamilySummary,
    RatioReport, SweepConfig, SweepReport,
};
use fraclab_core::filterbank::build_partition;
use fraclab_core::{bessel_seminorm, c_const, gagliardo, sample, triebel_lizorkin, Error};

pub use config::{Options, Settings};

#[derive(Parser, Debug)]
#[command(name = "fraclab", version, about = "Fractional Sobolev seminorm experiments", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gagliardo, Triebel-Lizorkin and Bessel seminorms of one function at one s
    Norms(Options),
    /// (1-s)^(1/p) scaling of the Gagliardo seminorm as s -> 1
    Bbm(Options),
    /// Gagliardo against Triebel-Lizorkin ratios over the s grid
    Embed(Options),
    /// Two-sided Bessel bounds between orders r and t
    Sandwich(Options),
    /// Gagliardo against Bessel norms of intermediate order
    Fracbbm(Options),
    /// Built-in invariant checks on small grids
    Selftest(Options),
}

impl Command {
    fn parts(&self) -> (&'static str, &Options) {
        match self {
            Command::Norms(o) => ("norms", o),
            Command::Bbm(o) => ("bbm", o),
            Command::Embed(o) => ("embed", o),
            Command::Sandwich(o) => ("sandwich", o),
            Command::Fracbbm(o) => ("fracbbm", o),
            Command::Selftest(o) => ("selftest", o),
        }
    }
}

/// One finished run, ready to be written.
struct Outcome {
    csv: String,
    json: Value,
    passed: bool,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, opts) = cli.command.parts();
    let settings = match Settings::resolve(opts) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("fraclab {name}: {msg}");
            return 2;
        }
    };
    let result = match &cli.command {
        Command::Norms(_) => norms(&settings),
        Command::Bbm(_) => bbm(&settings),
        Command::Embed(_) => ratio_run(&settings, ExperimentKind::Embed, embedding_ratio),
        Command::Sandwich(_) => {
            let (r, t) = (settings.r, settings.t);
            ratio_run(&settings, ExperimentKind::Sandwich, move |cfg| sobolev_sandwich(cfg, r, t))
        }
        Command::Fracbbm(_) => {
            let (theta, s) = (settings.theta, settings.s);
            ratio_run(&settings, ExperimentKind::FracBbm, move |cfg| frac_bbm_upper(cfg, theta, s))
        }
        Command::Selftest(_) => Ok(selftest_outcome(&settings)),
    };
    match result {
        Ok(outcome) => finish(name, &settings, outcome),
        Err(e) if e.is_configuration() => {
            eprintln!("fraclab {name}: {e}");
            2
        }
        Err(e) => {
            let record = json!({
                "subcommand": name,
                "stamp": settings.stamp,
                "config": settings,
                "error": { "kind": e.kind(), "message": e.to_string() },
            });
            let path = report_path(&settings, name, "json");
            if let Err(io) = output::write_atomic(&path, &output::pretty(&record)) {
                eprintln!("fraclab {name}: {io}");
            }
            eprintln!("fraclab {name}: {e} (see {})", path.display());
            1
        }
    }
}

fn report_path(settings: &Settings, name: &str, ext: &str) -> PathBuf {
    settings.outdir.join(format!("{name}-{}.{ext}", settings.stamp))
}

fn finish(name: &str, settings: &Settings, outcome: Outcome) -> i32 {
    let csv_path = report_path(settings, name, "csv");
    let json_path = report_path(settings, name, "json");
    let written = output::write_atomic(&csv_path, &outcome.csv)
        .and_then(|_| output::write_atomic(&json_path, &output::pretty(&outcome.json)));
    if let Err(e) = written {
        eprintln!("fraclab {name}: {e}");
        return 1;
    }
    if settings.verbose > 0 {
        for check in outcome.json.pointer("/checks").and_then(Value::as_array).into_iter().flatten() {
            eprintln!("{check}");
        }
    }
    println!("{} {} {}", if outcome.passed { "PASS" } else { "FAIL" }, csv_path.display(), json_path.display());
    if outcome.passed {
        0
    } else {
        1
    }
}

fn configs(settings: &Settings, kind: ExperimentKind) -> Result<Vec<SweepConfig>, Error> {
    let configs: Vec<SweepConfig> =
        settings.descriptors()?.into_iter().map(|d| settings.sweep(kind, d)).collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    Ok(configs)
}

/// Runs `f` on every member and merges the reports.
fn ratio_run(
    settings: &Settings,
    kind: ExperimentKind,
    f: impl Fn(&SweepConfig) -> Result<RatioReport, Error>,
) -> Result<Outcome, Error> {
    let reports = configs(settings, kind)?.iter().map(&f).collect::<Result<Vec<_>, _>>()?;
    let members: Vec<Value> = reports.iter().map(|r| serde_json::to_value(r).expect("serializable")).collect();
    Ok(merge(settings, kind, &reports, members))
}

fn bbm(settings: &Settings) -> Result<Outcome, Error> {
    let reports = configs(settings, ExperimentKind::Bbm)?.iter().map(bbm_sweep).collect::<Result<Vec<_>, _>>()?;
    let members: Vec<Value> = reports.iter().map(|r| serde_json::to_value(r).expect("serializable")).collect();
    let tables: Vec<RatioReport> = reports.iter().map(sweep_table).collect();
    Ok(merge(settings, ExperimentKind::Bbm, &tables, members))
}

fn sweep_table(r: &SweepReport) -> RatioReport {
    let mut csv = Vec::new();
    r.write_csv(&mut csv).expect("in-memory write");
    let text = String::from_utf8(csv).expect("utf8");
    let columns = text
        .lines()
        .filter_map(|l| l.strip_prefix("#   "))
        .filter_map(|l| l.split_once(": "))
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let mut constants = r.summary.constants.clone();
    constants.insert("limit_error".into(), r.summary.limit_error);
    constants.insert("max_deviation".into(), r.summary.max_deviation);
    RatioReport {
        kind: r.kind,
        descriptor: r.descriptor.clone(),
        p: r.p,
        seed: r.seed,
        columns,
        rows: r
            .records
            .iter()
            .map(|x| vec![x.s, x.gagliardo, x.tail_bracket, x.completed, x.scaled, x.target, x.ratio])
            .collect(),
        constants,
        checks: r.checks.clone(),
        warnings: r.warnings.clone(),
    }
}

/// Single-member runs keep the report's own CSV; families gain a leading `member` column.
fn merge(settings: &Settings, kind: ExperimentKind, reports: &[RatioReport], members: Vec<Value>) -> Outcome {
    let family = FamilySummary::from_reports(kind, settings.p, reports);
    let csv = if reports.len() == 1 {
        let mut out = Vec::new();
        reports[0].write_csv(&mut out).expect("in-memory write");
        String::from_utf8(out).expect("utf8")
    } else {
        family_csv(kind, settings, reports)
    };
    let mut json = json!({
        "subcommand": kind.name(),
        "stamp": settings.stamp,
        "config": settings,
        "members": members,
        "constants": family.constants,
        "checks": family.checks,
        "passed": family.passed(),
    });
    if reports.len() > 1 {
        json["family"] = serde_json::to_value(&family).expect("serializable");
    }
    Outcome { csv, json, passed: family.passed() }
}

fn family_csv(kind: ExperimentKind, settings: &Settings, reports: &[RatioReport]) -> String {
    let mut lines = vec![format!("# {} family report; p={}; seed={}", kind.name(), settings.p, settings.seed)];
    for (i, r) in reports.iter().enumerate() {
        lines.push(format!("# member {i}: {}", r.descriptor));
    }
    lines.push("# columns:".into());
    lines.push("#   member: index into the member list above".into());
    for (name, doc) in &reports[0].columns {
        lines.push(format!("#   {name}: {doc}"));
    }
    let names: Vec<&str> = reports[0].columns.iter().map(|(n, _)| n.as_str()).collect();
    lines.push(format!("member,{}", names.join(",")));
    for (i, r) in reports.iter().enumerate() {
        for row in &r.rows {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            lines.push(format!("{i},{}", cells.join(",")));
        }
    }
    lines.push(String::new());
    lines.join("\n")
}

fn norms(settings: &Settings) -> Result<Outcome, Error> {
    let (s, p, q) = (settings.s, settings.p, settings.q);
    let grid = settings.grid();
    let fb = build_partition(&grid, settings.jmin, settings.jmax, Default::default())?;
    let mut reports = Vec::new();
    for descriptor in settings.descriptors()? {
        let cfg = settings.sweep(ExperimentKind::Norms, descriptor.clone());
        cfg.validate()?;
        let f = sample(&descriptor, &grid)?;
        let g = gagliardo(&f, s, p, settings.zcut)?;
        let f_pp = triebel_lizorkin(&f, &fb, s, p, p)?;
        let f_p2 = triebel_lizorkin(&f, &fb, s, p, 2.0)?;
        let f_pq = triebel_lizorkin(&f, &fb, s, p, q)?;
        let bessel = bessel_seminorm(&f, s, p)?;
        let mut checks = Vec::new();
        if p == 2.0 {
            let c = c_const(grid.dim(), s)?;
            let lhs = bessel * bessel;
            let allowance = 0.02 * lhs + c * g.tail_bracket.powi(2);
            checks.push(Check::at_most("p2_identity", (lhs - c * g.value.powi(2)).abs(), allowance));
        }
        let mut constants = BTreeMap::new();
        constants.insert("completed_over_f_pp_max".to_string(), g.completed() / f_pp);
        reports.push(RatioReport {
            kind: ExperimentKind::Norms,
            descriptor: descriptor.to_string(),
            p,
            seed: settings.seed,
            columns: [
                ("s", "smoothness"),
                ("q", "fine index of the q-norm column"),
                ("gagliardo", "near-field Gagliardo seminorm"),
                ("tail_bracket", "bound on the far field beyond the cutoff"),
                ("completed", "Gagliardo seminorm including the modelled far field"),
                ("f_pp", "Triebel-Lizorkin seminorm with q = p"),
                ("f_p2", "Triebel-Lizorkin seminorm with q = 2"),
                ("f_pq", "Triebel-Lizorkin seminorm with the requested q"),
                ("bessel", "Bessel potential seminorm"),
            ]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
            rows: vec![vec![s, q, g.value, g.tail_bracket, g.completed(), f_pp, f_p2, f_pq, bessel]],
            constants,
            checks,
            warnings: Vec::new(),
        });
    }
    let members = reports.iter().map(|r| serde_json::to_value(r).expect("serializable")).collect();
    Ok(merge(settings, ExperimentKind::Norms, &reports, members))
}

fn selftest_outcome(settings: &Settings) -> Outcome {
    let checks = selftest::run_checks(settings.seed);
    let passed = checks.iter().all(|c| c.passed);
    Outcome {
        csv: selftest::csv(&checks),
        json: json!({
            "subcommand": "selftest",
            "stamp": settings.stamp,
            "seed": settings.seed,
            "checks": checks,
            "passed": passed,
        }),
        passed,
    }
}
