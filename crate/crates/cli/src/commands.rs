use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use swa_core::analysis::observability::null_space_report;
use swa_core::analysis::{build_combined_system, run_focal_consistency, FocalConsistencyConfig};
use swa_core::sim::log::{fmt_f64, schema_csv};
use swa_core::sim::{run_scenario, RunSummary, ScenarioConfig, SimError, SimLog};

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;
pub const EXIT_RANK: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

impl From<SimError> for CliError {
    fn from(err: SimError) -> Self {
        match err {
            SimError::Config(e) => CliError::invalid(e.to_string()),
            other => CliError::runtime(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::runtime(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?;
            ScenarioConfig::parse(&text).map_err(|e| CliError::invalid(e.to_string()))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Runs one scenario into `out` and returns its summary.
fn run_into(cfg: &ScenarioConfig, out: &Path) -> Result<RunSummary, CliError> {
    let csv = run_scenario(cfg)?.to_csv_string();
    // Summarize the log as written so `swa metrics` on it reproduces metrics.csv.
    let summary = SimLog::read_csv(csv.as_bytes())
        .and_then(|log| log.summary(cfg.steady_after))
        .map_err(|e| CliError::runtime(e.to_string()))?;
    create_dir(out)?;
    write_file(&out.join("log.csv"), &csv)?;
    write_file(&out.join("metrics.csv"), &summary.to_csv_string())?;
    write_file(&out.join("config.resolved"), &cfg.to_resolved_string())?;
    write_file(&out.join("schema.csv"), &schema_csv(cfg.n_uavs))?;
    Ok(summary)
}

pub fn run(config: Option<&Path>, out: &Path, seed: Option<u64>, quiet: bool) -> Result<(), CliError> {
    let cfg = load_config(config, seed)?;
    let summary = run_into(&cfg, out)?;
    if !quiet {
        println!(
            "{} UAVs, {} mode, seed {}: d_nb {:.3} -> {:.3} m, steady drift {:.4} m/s",
            cfg.n_uavs,
            cfg.mode,
            cfg.seed,
            summary.d_nb_initial,
            summary.d_nb_final,
            summary.v_drift_mean_steady
        );
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn parse_axis(axis: &str) -> Result<(String, Vec<String>), CliError> {
    let (key, values) = axis
        .split_once('=')
        .ok_or_else(|| CliError::invalid(format!("axis `{axis}` must look like key=v1,v2")))?;
    let key = key.trim().to_string();
    if !ScenarioConfig::is_known_key(&key) {
        return Err(CliError::invalid(format!("{key}: unknown key")));
    }
    let values: Vec<String> = values
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(CliError::invalid(format!("{key}: axis has no values")));
    }
    Ok((key, values))
}

fn dir_safe(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

pub fn sweep(
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    axis: &str,
    seeds: usize,
    parallel: bool,
    quiet: bool,
) -> Result<(), CliError> {
    let base = load_config(config, seed)?;
    let (key, values) = parse_axis(axis)?;
    if seeds == 0 {
        return Err(CliError::invalid("--seeds must be at least 1"));
    }

    let mut jobs: Vec<(usize, ScenarioConfig, PathBuf)> = Vec::new();
    for (vi, value) in values.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.set(&key, value)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        cfg.validate().map_err(|e| CliError::invalid(e.to_string()))?;
        for i in 0..seeds {
            let mut run_cfg = cfg.clone();
            run_cfg.seed = base.seed + i as u64;
            let dir = out
                .join(format!("{}-{}", dir_safe(&key), dir_safe(value)))
                .join(format!("seed-{}", run_cfg.seed));
            jobs.push((vi, run_cfg, dir));
        }
    }

    let exec = |(vi, cfg, dir): &(usize, ScenarioConfig, PathBuf)| {
        run_into(cfg, dir).map(|s| (*vi, cfg.seed, s))
    };
    let results: Vec<Result<(usize, u64, RunSummary), CliError>> = if parallel {
        jobs.par_iter().map(exec).collect()
    } else {
        jobs.iter().map(exec).collect()
    };
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut runs = String::from("value,seed");
    for (name, _) in RunSummary::DESCRIPTIONS {
        runs.push(',');
        runs.push_str(name);
    }
    runs.push('\n');
    for (vi, s, summary) in &results {
        runs.push_str(&format!("{},{}", values[*vi], s));
        for v in summary.values() {
            runs.push(',');
            runs.push_str(&fmt_f64(v));
        }
        runs.push('\n');
    }
    create_dir(out)?;
    write_file(&out.join("runs.csv"), &runs)?;

    let mut summary = format!("{key},runs,mean_d_nb,mean_v_drift,mean_d_nb_max_ratio,mean_frame_position_final_max\n");
    for (vi, value) in values.iter().enumerate() {
        let group: Vec<&RunSummary> = results
            .iter()
            .filter(|(v, _, _)| *v == vi)
            .map(|(_, _, s)| s)
            .collect();
        let mean = |f: fn(&RunSummary) -> f64| group.iter().map(|s| f(s)).sum::<f64>() / group.len() as f64;
        summary.push_str(&format!(
            "{value},{},{},{},{},{}\n",
            group.len(),
            fmt_f64(mean(|s| s.d_nb_mean)),
            fmt_f64(mean(|s| s.v_drift_mean_steady)),
            fmt_f64(mean(|s| s.d_nb_max_ratio)),
            fmt_f64(mean(|s| s.frame_position_final_max)),
        ));
    }
    write_file(&out.join("summary.csv"), &summary)?;
    if !quiet {
        print!("{summary}");
    }
    Ok(())
}

fn parse_range(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::invalid(format!("n-range `{text}` must look like a..b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    if a < 2 || b > 12 {
        return Err(CliError::invalid(format!(
            "n-range `{text}` must lie within 2..12 (a swarm needs at least one pair)"
        )));
    }
    Ok((a, b))
}

pub fn observability(n_range: &str, dt: f64, quiet: bool) -> Result<(), CliError> {
    let (a, b) = parse_range(n_range)?;
    let mut mismatches = Vec::new();
    if !quiet {
        println!("{:>3} {:>6} {:>5} {:>8} {:>9}", "n", "dim(x)", "rank", "nullity", "basis_ok");
    }
    for n in a..=b {
        let sys = build_combined_system(n, dt).map_err(|e| CliError::invalid(e.to_string()))?;
        let r = null_space_report(&sys);
        if !quiet {
            println!(
                "{n:>3} {:>6} {:>5} {:>8} {:>9}",
                r.state_dim, r.rank, r.nullity, r.basis_spans_null_space
            );
        }
        if r.rank != 4 * n - 4 || !r.basis_spans_null_space {
            mismatches.push(n);
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_RANK,
            message: format!("rank differs from 4n-4 for n = {mismatches:?}"),
        })
    }
}

pub fn anees(out: &Path, seed: u64, runs: usize, duration: f64, settle: f64, quiet: bool) -> Result<(), CliError> {
    let cfg = FocalConsistencyConfig {
        runs,
        duration,
        settle,
        seed,
        ..FocalConsistencyConfig::default()
    };
    let report = run_focal_consistency(&cfg).map_err(|e| CliError::invalid(e.to_string()))?;
    let mut csv = String::from("t,anees_position,anees_velocity,lower,upper,steady\n");
    for (k, t) in report.times.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(*t),
            fmt_f64(report.position.values[k]),
            fmt_f64(report.velocity.values[k]),
            fmt_f64(report.position.lower),
            fmt_f64(report.position.upper),
            u8::from(k >= report.steady_from),
        ));
    }
    create_dir(out)?;
    write_file(&out.join("anees.csv"), &csv)?;
    if !quiet {
        println!(
            "{} runs, bounds [{:.4}, {:.4}]: position {:.1}% inside, velocity {:.1}% inside",
            runs,
            report.position.lower,
            report.position.upper,
            100.0 * report.position_pass_fraction(),
            100.0 * report.velocity_pass_fraction()
        );
    }
    Ok(())
}

pub fn metrics(log: &Path, out: Option<&Path>, steady_after: f64, quiet: bool) -> Result<(), CliError> {
    let file = fs::File::open(log).map_err(|e| CliError::invalid(format!("{}: {e}", log.display())))?;
    let sim_log = SimLog::read_csv(file).map_err(|e| CliError::invalid(format!("{}: {e}", log.display())))?;
    let summary = sim_log
        .summary(steady_after)
        .map_err(|e| CliError::invalid(e.to_string()))?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| log.parent().map(Path::to_path_buf).unwrap_or_default());
    create_dir(&dir)?;
    let text = summary.to_csv_string();
    write_file(&dir.join("metrics.csv"), &text)?;
    if !quiet {
        print!("{text}");
    }
    Ok(())
}

pub fn validate(config: &Path, quiet: bool) -> Result<(), CliError> {
    let cfg = load_config(Some(config), None)?;
    if !quiet {
        print!("{}", cfg.to_resolved_string());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let (k, v) = parse_axis("sim.n_uavs=4, 8").unwrap();
        assert_eq!(k, "sim.n_uavs");
        assert_eq!(v, vec!["4", "8"]);
        assert_eq!(parse_axis("sim.bogus=1").unwrap_err().code, EXIT_INVALID);
        assert_eq!(parse_axis("sim.n_uavs=").unwrap_err().code, EXIT_INVALID);
        assert!(parse_axis("sim.n_uavs").is_err());
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("2..6").unwrap(), (2, 6));
        assert_eq!(parse_range("3..=3").unwrap(), (3, 3));
        assert!(parse_range("1..4").is_err());
        assert!(parse_range("2..13").is_err());
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("two..six").is_err());
    }

    #[test]
    fn dir_names() {
        assert_eq!(dir_safe("sim.mode"), "sim.mode");
        assert_eq!(dir_safe("0,0; 1,1"), "0_0__1_1");
    }
}
