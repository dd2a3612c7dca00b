//! Subcommand runners. Each produces a table plus metadata; the caller
//! decides where they go.

use std::io::Write;

use jmatrix::kinematics::{ReferenceSolutions, Side};
use jmatrix::potentials::{exact_square_barrier, poschl_teller_transmission};
use jmatrix::scattering::phase_angles;
use jmatrix::{
    plateau_scan_energies, solve_rt, BasisParams, EnergyPoint, Error, JMatrixSolver, OracleSettings, PotentialSpec,
    SolverConfig,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::round_grid;
use crate::args::{
    Compare, Figure, FiguresConfig, Format, LambdaChoice, OracleConfig, Output, PlateauConfig, RunConfig, SweepConfig,
};
use crate::table::{Row, Table};
use crate::{CliError, CliResult};

pub const SWEEP_COLUMNS: [&str; 10] = [
    "E",
    "T2",
    "R2",
    "ReT",
    "ImT",
    "ReR",
    "ImR",
    "theta_plus",
    "theta_minus",
    "defect",
];

/// What a run produced. `failure` is set when the output is complete but a
/// numerical problem must still be reported through the exit code.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub metadata: Value,
    pub notes: Vec<String>,
    pub failure: Option<String>,
}

fn numeric(e: Error) -> CliError {
    CliError::Numeric(e.to_string())
}

fn versions() -> Value {
    json!({"jmatrix": jmatrix::VERSION, "jmx": env!("CARGO_PKG_VERSION")})
}

/// Caps the rayon pool from the value of `JMX_THREADS`.
pub fn configure_threads(var: Option<&str>) -> CliResult<()> {
    let Some(raw) = var else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("JMX_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("JMX_THREADS: {e}")))
}

pub fn run(config: &RunConfig) -> CliResult<Report> {
    match config {
        RunConfig::Sweep(c) => run_sweep(c),
        RunConfig::Plateau(c) => run_plateau(c),
        RunConfig::Figures(c) => run_figures(c),
        RunConfig::Oracle(c) => run_oracle(c),
    }
}

/// Renders the report in the requested format.
pub fn render(report: &Report, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => Ok(report.table.to_csv()),
        Format::Json => serde_json::to_string_pretty(&report.table.to_json(report.metadata.clone()))
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

pub fn emit(report: &Report, output: &Output) -> CliResult<()> {
    let text = render(report, output.format)?;
    match &output.path {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("--output {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                // reader closed early, e.g. `| head`
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(|e| CliError::Io(e.to_string())),
            }
        }
    }
}

pub fn output_of(config: &RunConfig) -> &Output {
    match config {
        RunConfig::Sweep(c) => &c.output,
        RunConfig::Plateau(c) => &c.output,
        RunConfig::Figures(c) => &c.output,
        RunConfig::Oracle(c) => &c.output,
    }
}

fn plateau_json(report: &jmatrix::PlateauReport) -> Value {
    let per_n: Vec<Value> = report
        .table
        .iter()
        .zip(&report.plateaus)
        .map(|((n, _), p)| match p {
            Some(p) => json!({
                "N": n,
                "lambda_lo": p.lambda_lo,
                "lambda_hi": p.lambda_hi,
                "variation": p.variation,
                "center": p.center,
            }),
            None => json!({"N": n, "plateau": null}),
        })
        .collect();
    json!({
        "energies": report.energies,
        "tolerance": report.tolerance,
        "plateaus": per_n,
        "recommended": {"N": report.recommended.0, "lambda": report.recommended.1},
    })
}

/// Probe energies for an automatic λ: midpoints of five equal slices of the
/// sweep range.
fn probe_energies(lo: f64, hi: f64) -> Vec<f64> {
    (0..5).map(|i| lo + (i as f64 + 0.5) * (hi - lo) / 5.0).collect()
}

fn auto_lambdas() -> Vec<f64> {
    (0..=155).map(|i| round_grid(0.25 + 0.05 * i as f64)).collect()
}

fn exact_t2(spec: &PotentialSpec, e: f64) -> Option<f64> {
    match spec {
        PotentialSpec::Zero => Some(1.0),
        PotentialSpec::PoschlTeller { eta, nu } => Some(poschl_teller_transmission(*eta, *nu, e)),
        PotentialSpec::SquareBarrier { v0, width, .. } => exact_square_barrier(*v0, *width, e).ok().map(|(t, _)| t),
        _ => None,
    }
}

pub fn run_sweep(c: &SweepConfig) -> CliResult<Report> {
    let spec = &c.potential.spec;
    let energies = c.grid.points();
    let mut notes = Vec::new();
    let (lambda, plateau) = match c.lambda {
        LambdaChoice::Fixed(l) => (l, Value::Null),
        LambdaChoice::Auto => {
            let probes = probe_energies(c.grid.min, c.grid.max);
            // relax by decades, at most to 100x the requested tolerance
            let mut scan = Err(Error::Domain("unreachable".into()));
            for tol in [c.tolerance, 10.0 * c.tolerance, 100.0 * c.tolerance] {
                scan = plateau_scan_energies(spec, &probes, &[c.n], &auto_lambdas(), tol);
                if scan.is_ok() {
                    break;
                }
            }
            let rep = scan.map_err(numeric)?;
            notes.push(format!(
                "lambda = {} from plateau scan at tolerance {:e}",
                rep.recommended.1, rep.tolerance
            ));
            (rep.recommended.1, plateau_json(&rep))
        }
    };
    let solver = JMatrixSolver::new(
        spec.clone(),
        SolverConfig {
            n: c.n,
            lambda,
            quadrature: c.k,
        },
    )
    .map_err(numeric)?;
    let results = solver.sweep(&energies);
    let reference: Option<Vec<Option<f64>>> = c.compare.map(|mode| match mode {
        Compare::Exact => energies.iter().map(|&e| exact_t2(spec, e)).collect(),
        Compare::Oracle => energies
            .par_iter()
            .map(|&e| {
                solve_rt(spec, e, &OracleSettings::default())
                    .ok()
                    .map(|r| r.t.norm_sqr())
            })
            .collect(),
    });

    let mut columns: Vec<&str> = SWEEP_COLUMNS.to_vec();
    if reference.is_some() {
        columns.extend(["reference", "deviation"]);
    }
    let mut table = Table::new(&columns);
    let mut max_dev: Option<(f64, f64)> = None;
    let mut poles = Vec::new();
    let mut failed = 0;
    let mut missing_reference = 0;
    for (i, (&e, result)) in energies.iter().zip(&results).enumerate() {
        let mut row = match result {
            Ok(ev) => {
                let a = &ev.amplitudes;
                let phases = phase_angles(a).ok();
                Row {
                    values: vec![
                        Some(e),
                        Some(a.t.norm_sqr()),
                        Some(a.r.norm_sqr()),
                        Some(a.t.re),
                        Some(a.t.im),
                        Some(a.r.re),
                        Some(a.r.im),
                        phases.map(|p| p.0),
                        phases.map(|p| p.1),
                        Some(a.unitarity_defect()),
                    ],
                    status: if ev.nudged { "nudged" } else { "ok" }.into(),
                }
            }
            Err(err) => {
                let mut values = vec![None; SWEEP_COLUMNS.len()];
                values[0] = Some(e);
                let status = if matches!(err, Error::Pole { .. }) {
                    poles.push(e);
                    "pole"
                } else {
                    failed += 1;
                    "failed"
                };
                notes.push(format!("E = {e}: {err}"));
                Row {
                    values,
                    status: status.into(),
                }
            }
        };
        if let Some(refs) = &reference {
            let r = refs[i];
            if r.is_none() {
                missing_reference += 1;
            }
            let dev = match (row.values[1], r) {
                (Some(t2), Some(r)) => Some((t2 - r).abs()),
                _ => None,
            };
            if let Some(d) = dev {
                if max_dev.is_none_or(|(m, _)| d > m) {
                    max_dev = Some((d, e));
                }
            }
            row.values.extend([r, dev]);
        }
        table.rows.push(row);
    }
    let max_defect = table
        .rows
        .iter()
        .filter_map(|r| r.values[9])
        .fold(0.0f64, |m, d| m.max(d.abs()));
    notes.push(format!("max unitarity defect {max_defect:.3e}"));
    if let Some((d, e)) = max_dev {
        notes.push(format!("max deviation from reference {d:.3e} at E = {e}"));
    }
    if missing_reference > 0 {
        notes.push(format!("reference unavailable at {missing_reference} energies"));
    }
    let nudged = table.rows.iter().filter(|r| r.status == "nudged").count();
    let failure = if !poles.is_empty() {
        Some(format!(
            "{} energies sit on unresolved poles, first at E = {}",
            poles.len(),
            poles[0]
        ))
    } else if failed == energies.len() {
        Some("every energy failed".to_string())
    } else {
        None
    };
    let metadata = json!({
        "config": c.echo(),
        "versions": versions(),
        "lambda": lambda,
        "K": c.k.unwrap_or_else(|| jmatrix::quadrature::quadrature_size_for(spec, c.n)),
        "plateau": plateau,
        "summary": {
            "max_deviation": max_dev.map(|m| m.0),
            "max_deviation_energy": max_dev.map(|m| m.1),
            "max_unitarity_defect": max_defect,
            "nudged_rows": nudged,
            "pole_rows": poles.len(),
            "failed_rows": failed,
        },
    });
    Ok(Report {
        table,
        metadata,
        notes,
        failure,
    })
}

pub fn run_plateau(c: &PlateauConfig) -> CliResult<Report> {
    let rep = plateau_scan_energies(&c.potential.spec, &c.energies, &c.ns, &c.lambdas, c.tolerance).map_err(numeric)?;
    let mut columns = vec!["N".to_string(), "lambda".to_string()];
    columns.extend((0..c.energies.len()).map(|j| format!("T2_{j}")));
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for ((n, values), plateau) in rep.table.iter().zip(&rep.plateaus) {
        for (&lambda, v) in rep.lambdas.iter().zip(values) {
            let mut row = vec![Some(*n as f64), Some(lambda)];
            let status = match v {
                Some(v) => {
                    row.extend(v.iter().map(|&x| Some(x)));
                    if (*n, lambda) == rep.recommended {
                        "recommended"
                    } else if plateau.is_some_and(|p| lambda >= p.lambda_lo && lambda <= p.lambda_hi) {
                        "plateau"
                    } else {
                        "ok"
                    }
                }
                None => {
                    row.extend(std::iter::repeat_n(None, c.energies.len()));
                    "failed"
                }
            };
            table.rows.push(Row {
                values: row,
                status: status.into(),
            });
        }
    }
    let notes = vec![format!(
        "recommended N = {}, lambda = {}",
        rep.recommended.0, rep.recommended.1
    )];
    Ok(Report {
        table,
        metadata: json!({"config": c.echo(), "versions": versions(), "plateau": plateau_json(&rep)}),
        notes,
        failure: None,
    })
}

pub fn run_figures(c: &FiguresConfig) -> CliResult<Report> {
    let params = BasisParams::new(c.lambda).map_err(numeric)?;
    let energy = EnergyPoint::new(c.energy, &params).map_err(numeric)?;
    let n_max = c.ns.iter().copied().max().unwrap_or(0).max(1);
    let refs = ReferenceSolutions::new(params, energy, n_max).map_err(numeric)?;
    let k = energy.k;
    let mut columns = vec!["x".to_string()];
    columns.extend(c.ns.iter().map(|n| format!("N{n}")));
    columns.push("limit".into());
    let rows: Vec<Row> =
        c.xs.par_iter()
            .map(|&x| {
                let mut ok = true;
                let mut values = vec![Some(x)];
                for &n in &c.ns {
                    let v = match c.which {
                        Figure::Fig1a => refs.cosine_combination(Side::Plus, n, x),
                        Figure::Fig1b => refs.sine_combination(Side::Plus, n, x),
                    };
                    ok &= v.is_ok();
                    values.push(v.ok());
                }
                // the combinations vanish on the left and become 2cos/2sin on the right
                let limit = match c.which {
                    Figure::Fig1a => 2.0 * (k * x).cos(),
                    Figure::Fig1b => 2.0 * (k * x).sin(),
                };
                values.push(Some(if x > 0.0 { limit } else { 0.0 }));
                Row {
                    values,
                    status: if ok { "ok" } else { "failed" }.into(),
                }
            })
            .collect();
    Ok(Report {
        table: Table { columns, rows },
        metadata: json!({"config": c.echo(), "versions": versions(), "k": k}),
        notes: Vec::new(),
        failure: None,
    })
}

pub fn run_oracle(c: &OracleConfig) -> CliResult<Report> {
    let energies = c.grid.points();
    let results: Vec<_> = energies
        .par_iter()
        .map(|&e| solve_rt(&c.potential.spec, e, &c.settings))
        .collect();
    let mut table = Table::new(&["E", "T2", "R2", "ReT", "ImT", "ReR", "ImR", "defect", "steps"]);
    let mut notes = Vec::new();
    let mut bad = 0;
    for (&e, r) in energies.iter().zip(&results) {
        table.rows.push(match r {
            Ok(r) => Row::ok(vec![
                Some(e),
                Some(r.t.norm_sqr()),
                Some(r.r.norm_sqr()),
                Some(r.t.re),
                Some(r.t.im),
                Some(r.r.re),
                Some(r.r.im),
                Some(r.unitarity_defect()),
                Some(r.steps as f64),
            ]),
            Err(err) => {
                bad += 1;
                notes.push(format!("E = {e}: {err}"));
                let mut values = vec![None; 9];
                values[0] = Some(e);
                Row {
                    values,
                    status: if matches!(err, Error::Resolution { .. }) {
                        "unresolved"
                    } else {
                        "failed"
                    }
                    .into(),
                }
            }
        });
    }
    let failure = (bad == energies.len()).then(|| "the oracle failed at every energy".to_string());
    Ok(Report {
        table,
        metadata: json!({"config": c.echo(), "versions": versions(), "summary": {"failed_rows": bad}}),
        notes,
        failure,
    })
}
