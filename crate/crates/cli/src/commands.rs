use std::io::{Read, Write};

use carleman_core::kernel::eval_phi;
use carleman_core::representation::{circle_samples, decay_ratio_report, BoundaryIntegrator, CauchyTrace, DecayReport};
use carleman_core::verify::{self, SuiteOutcome};
use carleman_core::{Error, Point2};
use rayon::prelude::*;

use crate::config::Loaded;
use crate::error::{CliError, CliResult};

pub const KERNEL_EVAL_HEADER: [&str; 7] = ["y1", "y2", "x1", "x2", "phi", "error_estimate", "status"];
pub const RECONSTRUCT_HEADER: [&str; 9] =
    ["x1", "x2", "value", "I1", "I2", "truncation_Y", "quad_error", "classification", "status"];
pub const VERIFY_HEADER: [&str; 6] = ["suite", "passed", "measured", "threshold", "margin", "detail"];
pub const DECAY_HEADER: [&str; 2] = ["R", "ratio"];

const OK: &str = "ok";

/// One CSV output row, kept as strings so rows computed in parallel can be
/// written in input order.
type Row = Vec<String>;

/// Reads a numeric CSV whose header must equal `header` exactly. An empty
/// input yields no rows. `name` labels errors, which carry 1-based line
/// numbers with the header on line 1.
pub fn read_numeric_csv<R: Read>(reader: R, header: &[&str], name: &str) -> CliResult<Vec<Vec<f64>>> {
    let input_err = |line: u64, message: String| CliError::Input {
        source_name: name.to_string(),
        message: format!("line {line}: {message}"),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = rdr.headers().map_err(|e| input_err(1, e.to_string()))?.clone();
    if found.is_empty() {
        return Ok(Vec::new());
    }
    if found.iter().ne(header.iter().copied()) {
        return Err(input_err(
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            input_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec
            .iter()
            .enumerate()
            .map(|(k, s)| {
                s.parse::<f64>()
                    .map_err(|e| input_err(line, format!("column `{}`: {e}: `{s}`", header[k])))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn num(v: f64) -> String {
    // adding +0 folds -0 into 0
    format!("{:e}", v + 0.0)
}

fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Row], dest: &str) -> CliResult<()> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => CliError::io(dest, e),
        other => CliError::io(dest, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(dest, e))
}

/// `Phi(y, x)` for every `y1,y2,x1,x2` row. Rows that fail carry the error
/// code in `status`; a missed tolerance still reports the best estimate.
pub fn kernel_eval<W: Write>(loaded: &Loaded, points: &[Vec<f64>], out: W, dest: &str) -> CliResult<()> {
    let rows: Vec<Row> = points
        .par_iter()
        .map(|r| {
            let (y, x) = (Point2::new(r[0], r[1]), Point2::new(r[2], r[3]));
            let mut row: Row = r.iter().map(|v| v.to_string()).collect();
            match eval_phi(&y, &x, &loaded.params, &loaded.quad) {
                Ok(phi) => row.extend([num(phi.value), num(phi.error_estimate), OK.into()]),
                Err(Error::Accuracy {
                    estimate,
                    error_estimate,
                }) => row.extend([num(estimate), num(error_estimate), "accuracy".into()]),
                Err(e) => row.extend([String::new(), String::new(), e.code().into()]),
            }
            row
        })
        .collect();
    write_csv(out, &KERNEL_EVAL_HEADER, &rows, dest)
}

fn integrator(loaded: &Loaded) -> CliResult<BoundaryIntegrator<'_>> {
    BoundaryIntegrator::new(&loaded.domain, &loaded.params, loaded.quad)
        .map(|b| b.with_near_tol(loaded.config.near_tol))
        .map_err(|e| CliError::config("domain", e))
}

fn traces(loaded: &Loaded) -> CliResult<&(CauchyTrace, CauchyTrace)> {
    loaded
        .traces
        .as_ref()
        .ok_or_else(|| CliError::config("traces", "required by this command"))
}

/// Reconstructs `U` at each point. Row errors are reported on `warn` and in
/// the `status` column without aborting the batch.
pub fn reconstruct<W: Write, E: Write>(
    loaded: &Loaded,
    points: &[Point2],
    out: W,
    dest: &str,
    mut warn: E,
) -> CliResult<()> {
    let (t1, t2) = traces(loaded)?;
    let bi = integrator(loaded)?;
    let results = bi.reconstruct_batch(points, t1, t2);
    let mut rows = Vec::with_capacity(points.len());
    for (i, (x, res)) in points.iter().zip(results).enumerate() {
        let class = loaded.domain.classify_point(x, loaded.config.near_tol).to_string();
        let mut row: Row = vec![x.y1.to_string(), x.y2.to_string()];
        match res {
            Ok(r) => {
                let status = if r.converged { OK } else { "accuracy" };
                row.extend([
                    num(r.value),
                    num(r.i1),
                    num(r.i2),
                    num(r.truncation_y),
                    num(r.quad_error),
                    class,
                    status.into(),
                ]);
            }
            Err(e) => {
                let _ = writeln!(warn, "row {}: ({}, {}): {e}", i + 1, x.y1, x.y2);
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.extend([class, e.code().into()]);
            }
        }
        rows.push(row);
    }
    write_csv(out, &RECONSTRUCT_HEADER, &rows, dest)
}

/// Reconstructs `U` on circles of the configured radii and reports
/// `max |U| / exp(pi R / 2h)` per radius.
pub fn decay_report<E: Write>(loaded: &Loaded, mut warn: E) -> CliResult<DecayReport> {
    let (t1, t2) = traces(loaded)?;
    let bi = integrator(loaded)?;
    let d = &loaded.config.decay;
    let pts: Vec<Point2> = d
        .radii
        .iter()
        .flat_map(|&r| circle_samples(&loaded.domain, r, d.points_per_radius, loaded.config.near_tol))
        .collect();
    let mut values = Vec::with_capacity(pts.len());
    for (x, res) in pts.iter().zip(bi.reconstruct_batch(&pts, t1, t2)) {
        match res {
            Ok(r) => values.push((*x, r.value)),
            Err(e) => {
                let _ = writeln!(warn, "skipped ({}, {}): {e}", x.y1, x.y2);
            }
        }
    }
    let report = decay_ratio_report(&values, &loaded.params);
    for n in &report.notes {
        let _ = writeln!(warn, "{n}");
    }
    if !report.strictly_decreasing() {
        let _ = writeln!(warn, "ratios are not strictly decreasing in R");
    }
    Ok(report)
}

/// Rows are labelled with the configured radius nearest the sampled one.
pub fn write_decay_report<W: Write>(report: &DecayReport, radii: &[f64], out: W, dest: &str) -> CliResult<()> {
    let label = |r: f64| {
        radii
            .iter()
            .copied()
            .min_by(|a, b| (a - r).abs().total_cmp(&(b - r).abs()))
            .filter(|c| (c - r).abs() <= 1e-9 * c.max(1.0))
            .unwrap_or(r)
    };
    let rows: Vec<Row> = report.rows.iter().map(|r| vec![label(r.radius).to_string(), num(r.ratio)]).collect();
    write_csv(out, &DECAY_HEADER, &rows, dest)
}

pub fn verify(loaded: &Loaded) -> CliResult<Vec<SuiteOutcome>> {
    verify::run_all(&loaded.params, loaded.config.verify.seed).map_err(|e| CliError::Verification(e.to_string()))
}

/// One `PASS`/`FAIL` line per suite.
pub fn verify_text(outcomes: &[SuiteOutcome]) -> String {
    outcomes
        .iter()
        .map(|o| {
            format!(
                "{} {:<16} measured {:.6e} {} {:.6e} margin {:+.3e}  {}\n",
                if o.passed { "PASS" } else { "FAIL" },
                o.name,
                o.measured,
                if o.upper_limit { "<=" } else { ">=" },
                o.threshold,
                o.margin(),
                o.detail
            )
        })
        .collect()
}

pub fn write_verify_csv<W: Write>(outcomes: &[SuiteOutcome], out: W, dest: &str) -> CliResult<()> {
    let rows: Vec<Row> = outcomes
        .iter()
        .map(|o| {
            vec![
                o.name.to_string(),
                o.passed.to_string(),
                num(o.measured),
                num(o.threshold),
                num(o.margin()),
                o.detail.clone(),
            ]
        })
        .collect();
    write_csv(out, &VERIFY_HEADER, &rows, dest)
}

/// Names of failing suites, or `Ok` when all pass.
pub fn verify_status(outcomes: &[SuiteOutcome]) -> CliResult<()> {
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("failing suites: {}", failed.join(", "))))
    }
}
