//! Benchmark subcommands: one CSV and gnuplot stub per strategy, plus an
//! `index.csv` in the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use rbfshapenet::bench::cases::DEFAULT_LAYOUT_SEED;
use rbfshapenet::bench::{gnuplot_stub, run_case, BenchCase, BenchConfig, BenchReport};
use rbfshapenet::ShapeStrategy;

use crate::error::{CliError, CliResult};
use crate::{Global, HeatArgs, InterpArgs, LadderArgs, PoissonArgs};

pub const INDEX_FILE: &str = "index.csv";
const INDEX_HEADER: &str = "file,case,kernel,strategy,rows,blowups,wall_seconds";

fn file_stem(case: &str, kernel: &str, spec: &str) -> String {
    let strategy = match spec.strip_prefix("nn:") {
        Some(path) => format!(
            "nn-{}",
            Path::new(path).file_stem().and_then(|s| s.to_str()).unwrap_or("model")
        ),
        None => spec.to_string(),
    };
    let slug: String = strategy
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '-' })
        .collect();
    format!("{case}_{kernel}_{slug}")
}

struct Job {
    spec: String,
    cfg: BenchConfig,
}

fn jobs(g: &Global, case: &BenchCase, ladder: &LadderArgs, threads: usize) -> CliResult<Vec<Job>> {
    if g.strategies.is_empty() {
        return Err(CliError::Usage("give at least one --strategy".into()));
    }
    g.strategies
        .iter()
        .map(|spec| {
            let strategy = ShapeStrategy::parse(spec).map_err(|e| match e {
                rbfshapenet::Error::Io(_) => CliError::at(Path::new(spec.trim_start_matches("nn:")), e),
                other => other.into(),
            })?;
            let mut cfg = BenchConfig::new(case, g.kernel, strategy);
            if let Some(l) = &ladder.ladder {
                cfg.ladder = l.clone();
            }
            cfg.parallel = threads > 1;
            Ok(Job { spec: spec.clone(), cfg })
        })
        .collect()
}

fn run_jobs(case: &BenchCase, jobs: &[Job], parallel: bool) -> CliResult<Vec<BenchReport>> {
    let run = |j: &Job| run_case(case, &j.cfg);
    let results: Vec<_> = if parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };
    Ok(results.into_iter().collect::<Result<_, _>>()?)
}

/// Keeps index lines of other files and replaces those written now.
fn merge_index(dir: &Path, fresh: &[String]) -> CliResult<()> {
    let path = dir.join(INDEX_FILE);
    let names: Vec<&str> = fresh.iter().filter_map(|l| l.split(',').next()).collect();
    let mut lines = vec![INDEX_HEADER.to_string()];
    if let Ok(old) = fs::read_to_string(&path) {
        lines.extend(
            old.lines()
                .skip(1)
                .filter(|l| !l.is_empty())
                .filter(|l| !names.contains(&l.split(',').next().unwrap_or("")))
                .map(String::from),
        );
    }
    lines.extend(fresh.iter().cloned());
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::at(&path, e.into()))
}

fn write_reports(g: &Global, case: &BenchCase, jobs: &[Job], reports: &[BenchReport]) -> CliResult<()> {
    let dir: PathBuf = g.out.clone().unwrap_or_else(|| PathBuf::from("bench-out"));
    fs::create_dir_all(&dir).map_err(|e| CliError::at(&dir, e.into()))?;
    let kernel = g.kernel.name();
    let mut index = Vec::new();
    for (job, report) in jobs.iter().zip(reports) {
        let stem = file_stem(&case.id, kernel, &job.spec);
        let csv_name = format!("{stem}.csv");
        let csv_path = dir.join(&csv_name);
        fs::write(&csv_path, report.csv()).map_err(|e| CliError::at(&csv_path, e.into()))?;
        let gp_path = dir.join(format!("{stem}.gp"));
        let title = format!("{} {} {}", case.id, kernel, job.cfg.strategy.label());
        fs::write(&gp_path, gnuplot_stub(&csv_name, &title)).map_err(|e| CliError::at(&gp_path, e.into()))?;

        let blowups = report.rows.iter().filter(|r| r.status != "ok").count();
        let wall: f64 = report.wall_seconds.iter().sum();
        index.push(format!(
            "{csv_name},{},{kernel},{},{},{blowups},{wall:.3}",
            case.id,
            job.cfg.strategy.label(),
            report.rows.len()
        ));
        print!("{}", report.csv());
    }
    merge_index(&dir, &index)
}

fn bench(g: &Global, case: BenchCase, ladder: &LadderArgs, threads: usize, tweak: impl Fn(&mut BenchConfig)) -> CliResult<()> {
    let mut jobs = jobs(g, &case, ladder, threads)?;
    for j in &mut jobs {
        tweak(&mut j.cfg);
    }
    let reports = run_jobs(&case, &jobs, threads > 1)?;
    write_reports(g, &case, &jobs, &reports)
}

pub fn interp(g: &Global, a: &InterpArgs, threads: usize) -> CliResult<()> {
    let case = BenchCase::parse(&a.case, g.seed.unwrap_or(DEFAULT_LAYOUT_SEED))?;
    if matches!(
        case.kind,
        rbfshapenet::bench::CaseKind::Heat { .. } | rbfshapenet::bench::CaseKind::Poisson
    ) {
        return Err(CliError::Usage(format!("`{}` is not an interpolation case", a.case)));
    }
    bench(g, case, &a.ladder, threads, |_| {})
}

pub fn heat(g: &Global, a: &HeatArgs, threads: usize) -> CliResult<()> {
    if !matches!(a.ic.as_str(), "quad" | "sine") || !matches!(a.points.as_str(), "equi" | "nonequi") {
        return Err(CliError::Usage("--ic is quad|sine, --points is equi|nonequi".into()));
    }
    let id = match a.points.as_str() {
        "equi" => format!("heat-{}", a.ic),
        _ => format!("heat-{}-nonequi", a.ic),
    };
    let case = BenchCase::parse(&id, g.seed.unwrap_or(DEFAULT_LAYOUT_SEED))?;
    let dt = a.dt;
    bench(g, case, &a.ladder, threads, |c| c.dt = dt)
}

pub fn poisson(g: &Global, a: &PoissonArgs, threads: usize) -> CliResult<()> {
    let case = BenchCase::parse("poisson2d", 0)?;
    bench(g, case, &a.ladder, threads, |_| {})
}
