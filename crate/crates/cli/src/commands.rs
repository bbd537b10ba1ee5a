use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aasg_core::adaptive::{compare_errors, run_aasg_on};
use aasg_core::fem::Grid2d;
use aasg_core::galerkin::{solve_sgm, total_statistics, PhysicalSystem};
use aasg_core::io::{read_field_csv, read_json, write_coefficients, write_field_csv, write_json, FieldCsv};
use aasg_core::montecarlo::run_mc;
use aasg_core::multiindex::{binomial, IndexCatalog};
use aasg_core::randomfield::{kl_1d, kl_2d};
use log::info;
use serde::{Deserialize, Serialize};

use crate::config::{Config, DEFAULT_MAX_CATALOG};
use crate::error::CliError;

pub const SUMMARY_FILE: &str = "summary.json";
pub const MEAN_FILE: &str = "mean.csv";
pub const VARIANCE_FILE: &str = "variance.csv";
pub const COEFFICIENT_DIR: &str = "coefficients";

/// One row per solve, shaped like the tables of adaptive runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub k: usize,
    #[serde(rename = "J_size")]
    pub j_size: usize,
    #[serde(rename = "Jtilde_size")]
    pub jtilde_size: usize,
    pub catalog: usize,
    pub cg_iters: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FinalRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Summed linear-solve wall time.
    pub seconds: f64,
    /// Wall time of the whole command.
    pub seconds_total: f64,
    #[serde(rename = "E_err", default, skip_serializing_if = "Option::is_none")]
    pub e_err: Option<f64>,
    #[serde(rename = "V_err", default, skip_serializing_if = "Option::is_none")]
    pub v_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub config: Config,
    pub rounds: Vec<RoundRow>,
    #[serde(rename = "final")]
    pub final_row: FinalRow,
}

fn build_system(cfg: &Config) -> Result<PhysicalSystem, CliError> {
    let grid = Grid2d::new(cfg.grid.n)?;
    let field = kl_2d(cfg.field_params(), grid)?;
    Ok(PhysicalSystem::new(field)?)
}

fn write_fields(
    out: &Path,
    grid: &Grid2d,
    mean: &[f64],
    var: &[f64],
    outputs: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    for (name, values) in [(MEAN_FILE, mean), (VARIANCE_FILE, var)] {
        let path = out.join(name);
        write_field_csv(&path, grid, values)?;
        outputs.push(path);
    }
    Ok(())
}

/// Errors against the fields of a finished run in `reference`.
fn errors_against(
    reference: &Path,
    cfg: &Config,
    grid: &Grid2d,
    mean: &[f64],
    var: &[f64],
) -> Result<(f64, f64), CliError> {
    let run = load_run(reference)?;
    check_compatible(cfg, &run.summary.config, grid, &run.mean.grid, reference)?;
    match compare_errors(grid, (mean, var), (&run.mean.values, &run.variance.values)) {
        Ok(errs) => Ok(errs),
        Err(e) => Err(CliError::Mismatch(e.to_string())),
    }
}

fn finish(
    out: &Path,
    summary: Summary,
    reference: Option<&Path>,
    grid: &Grid2d,
    mean: &[f64],
    var: &[f64],
    mut outputs: Vec<PathBuf>,
) -> Result<Vec<PathBuf>, CliError> {
    let mut summary = summary;
    if let Some(r) = reference {
        let (e, v) = errors_against(r, &summary.config, grid, mean, var)?;
        summary.final_row.e_err = Some(e);
        summary.final_row.v_err = Some(v);
    }
    write_fields(out, grid, mean, var, &mut outputs)?;
    let path = out.join(SUMMARY_FILE);
    write_json(&path, &summary)?;
    outputs.push(path);
    Ok(outputs)
}

pub fn aasg(cfg: &Config, out: &Path, reference: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let acfg = cfg.aasg_config()?;
    let system = build_system(cfg)?;
    let res = run_aasg_on(&system, &acfg)?;
    let rounds = res
        .rounds
        .iter()
        .map(|r| RoundRow {
            k: r.k,
            j_size: r.active.len(),
            jtilde_size: r.retained.len(),
            catalog: r.catalog_size,
            cg_iters: r.report.iterations,
            seconds: r.report.seconds,
        })
        .collect();
    let coef_dir = out.join(COEFFICIENT_DIR);
    fs::create_dir_all(&coef_dir)?;
    write_coefficients(&coef_dir, &res.coefficients, &system.grid, &acfg.field)?;
    info!("AASG finished: k = {}, catalog {}", res.final_order(), res.catalog_size());
    let summary = Summary {
        method: "aasg".into(),
        config: cfg.clone(),
        rounds,
        final_row: FinalRow {
            k: Some(res.final_order()),
            catalog: Some(res.catalog_size()),
            seconds: res.total_solve_seconds(),
            seconds_total: started.elapsed().as_secs_f64(),
            ..FinalRow::default()
        },
    };
    finish(out, summary, reference, &system.grid, &res.mean, &res.variance, vec![coef_dir])
}

pub fn sgm(cfg: &Config, out: &Path, reference: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let s = cfg.stochastic()?;
    let (n, p) = (cfg.field.n, s.p);
    let size = binomial((n + p as usize) as u64, n as u64);
    let budget = s.max_catalog.unwrap_or(DEFAULT_MAX_CATALOG);
    if size > budget as u128 {
        return Err(CliError::Budget { size, budget });
    }
    let system = build_system(cfg)?;
    let catalog = IndexCatalog::full(n, p)?;
    let (coeffs, report) = solve_sgm(&system, &catalog, cfg.solver_options(catalog.len()), None)?;
    let (mean, var) = total_statistics(&coeffs);
    let coef_dir = out.join(COEFFICIENT_DIR);
    fs::create_dir_all(&coef_dir)?;
    write_coefficients(&coef_dir, &coeffs, &system.grid, &cfg.field_params())?;
    let k = n.min(p as usize);
    let sets = catalog.groups().len() - 1;
    info!("SGM finished: catalog {}, {} CG iterations", catalog.len(), report.iterations);
    let summary = Summary {
        method: "sgm".into(),
        config: cfg.clone(),
        rounds: vec![RoundRow {
            k,
            j_size: sets,
            jtilde_size: sets,
            catalog: catalog.len(),
            cg_iters: report.iterations,
            seconds: report.seconds,
        }],
        final_row: FinalRow {
            k: Some(k),
            catalog: Some(catalog.len()),
            seconds: report.seconds,
            seconds_total: started.elapsed().as_secs_f64(),
            ..FinalRow::default()
        },
    };
    finish(out, summary, reference, &system.grid, &mean, &var, vec![coef_dir])
}

pub fn mc(cfg: &Config, out: &Path, reference: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let mcfg = cfg.mc()?;
    let system = build_system(cfg)?;
    let res = run_mc(&system, mcfg.samples, mcfg.seed, cfg.solver_options(1))?;
    let report_path = out.join("mc_report.json");
    write_json(&report_path, &res.report)?;
    info!("MC finished: {} samples, {:.2} CG iterations per sample", res.report.samples, res.report.mean_iterations);
    let summary = Summary {
        method: "mc".into(),
        config: cfg.clone(),
        rounds: Vec::new(),
        final_row: FinalRow {
            samples: Some(res.report.samples),
            seconds: res.report.seconds_solve,
            seconds_total: started.elapsed().as_secs_f64(),
            ..FinalRow::default()
        },
    };
    finish(out, summary, reference, &system.grid, &res.mean, &res.variance, vec![report_path])
}

pub fn kl_report(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let params = cfg.field_params();
    let sigma2 = params.sigma * params.sigma;
    let modes = kl_1d(params.corr_len, params.n_modes.max(10))?;
    let mut one_d = String::from("k,parity,omega,lambda_unit,lambda_sigma2\n");
    for (k, m) in modes.iter().enumerate() {
        one_d.push_str(&format!(
            "{},{:?},{:.16e},{:.16e},{:.16e}\n",
            k + 1,
            m.parity,
            m.omega,
            m.lambda,
            sigma2 * m.lambda
        ));
    }
    let field = kl_2d(params, Grid2d::new(cfg.grid.n)?)?;
    let cumulative = field.cumulative_variance_fraction();
    // lambda = sigma^2 * lambda_unit(i) * lambda_unit(j); i, j are 1-based 1-D mode numbers along x1, x2
    let mut two_d = String::from("rank,i,j,lambda,cumulative_fraction\n");
    for (r, (e, c)) in field.eigen.iter().zip(&cumulative).enumerate() {
        two_d.push_str(&format!("{},{},{},{:.16e},{:.16e}\n", r + 1, e.i + 1, e.j + 1, e.lambda, c));
    }
    let p1 = out.join("kl_1d.csv");
    let p2 = out.join("kl_modes.csv");
    fs::write(&p1, one_d)?;
    fs::write(&p2, two_d)?;
    Ok(vec![p1, p2])
}

/// Mean / variance fields and summary of a finished run directory.
pub struct RunData {
    pub summary: Summary,
    pub mean: FieldCsv,
    pub variance: FieldCsv,
}

pub fn load_run(dir: &Path) -> Result<RunData, CliError> {
    let ctx = |e: aasg_core::Error| CliError::Io(format!("{}: {e}", dir.display()));
    Ok(RunData {
        summary: read_json(&dir.join(SUMMARY_FILE)).map_err(ctx)?,
        mean: read_field_csv(&dir.join(MEAN_FILE)).map_err(ctx)?,
        variance: read_field_csv(&dir.join(VARIANCE_FILE)).map_err(ctx)?,
    })
}

fn check_compatible(a: &Config, b: &Config, ga: &Grid2d, gb: &Grid2d, other: &Path) -> Result<(), CliError> {
    if ga != gb || a.grid != b.grid {
        return Err(CliError::Mismatch(format!(
            "grid with {} cells vs {} cells in {}",
            ga.cells(),
            gb.cells(),
            other.display()
        )));
    }
    if a.field != b.field {
        return Err(CliError::Mismatch(format!("field parameters differ from {}", other.display())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub run: String,
    pub method: String,
    /// Summed linear-solve seconds of the approximate run.
    pub cost_seconds: f64,
    #[serde(rename = "E_err")]
    pub e_err: f64,
    #[serde(rename = "V_err")]
    pub v_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub reference: String,
    pub runs: Vec<ErrorRow>,
}

pub fn compare(approx: &[PathBuf], reference: &Path, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let refrun = load_run(reference)?;
    let mut rows = Vec::new();
    for dir in approx {
        let run = load_run(dir)?;
        if run.mean.coords != refrun.mean.coords || run.variance.grid != run.mean.grid {
            return Err(CliError::Mismatch(format!(
                "{} and {} are on different grids",
                dir.display(),
                reference.display()
            )));
        }
        check_compatible(&run.summary.config, &refrun.summary.config, &run.mean.grid, &refrun.mean.grid, reference)?;
        let (e, v) = compare_errors(
            &run.mean.grid,
            (&run.mean.values, &run.variance.values),
            (&refrun.mean.values, &refrun.variance.values),
        )
        .map_err(|e| CliError::Mismatch(e.to_string()))?;
        rows.push(ErrorRow {
            run: dir.display().to_string(),
            method: run.summary.method.clone(),
            cost_seconds: run.summary.final_row.seconds,
            e_err: e,
            v_err: v,
        });
    }
    let json = out.join("errors.json");
    write_json(&json, &ErrorReport { reference: reference.display().to_string(), runs: rows.clone() })?;
    let mut csv = String::from("run,method,cost_seconds,E_err,V_err\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{:.16e},{:.16e},{:.16e}\n", r.run, r.method, r.cost_seconds, r.e_err, r.v_err));
    }
    let csv_path = out.join("errors.csv");
    fs::write(&csv_path, csv)?;
    Ok(vec![json, csv_path])
}
