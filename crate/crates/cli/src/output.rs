//! CSV, metadata and plot-script writers.
//!
//! Floats are printed as `{:.16e}` (17 significant digits) so that reruns of
//! the same config produce byte-identical files. Metadata carries no
//! timestamps for the same reason.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ecps::model::{RNG_ALGORITHM, SEED_DERIVATION};
use ecps::superop::ScanTable;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiments::{reduced_entries, CompareResult, SteadyStateResult};

pub const METADATA_FILE: &str = "metadata.json";
pub const PLOT_FILE: &str = "plot.py";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Provenance<'a> {
    rng_algorithm: &'a str,
    seed_derivation: &'a str,
    base_seed: u64,
    seeds: &'a [u64],
}

#[derive(Serialize)]
struct Metadata<'a, E: Serialize> {
    tool: &'a str,
    version: &'a str,
    experiment: String,
    /// Full config with every default filled in; feeding it back reproduces
    /// the run.
    config: &'a ExperimentConfig,
    provenance: Provenance<'a>,
    derived: BTreeMap<&'a str, f64>,
    files: BTreeMap<&'a str, Vec<String>>,
    extra: E,
}

fn write_metadata<E: Serialize>(
    out: &Path,
    cfg: &ExperimentConfig,
    seeds: &[u64],
    derived: BTreeMap<&str, f64>,
    files: BTreeMap<&str, Vec<String>>,
    extra: E,
) -> Result<(), CliError> {
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: cfg.experiment.to_string(),
        config: cfg,
        provenance: Provenance {
            rng_algorithm: RNG_ALGORITHM,
            seed_derivation: SEED_DERIVATION,
            base_seed: cfg.model.seed,
            seeds,
        },
        derived,
        files,
        extra,
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(out.join(METADATA_FILE), text)?;
    Ok(())
}

fn model_derived(cfg: &ExperimentConfig) -> BTreeMap<&'static str, f64> {
    let p = cfg.model.params();
    BTreeMap::from([("gamma", p.gamma()), ("lambda", p.lambda())])
}

pub fn compare_header(result: &CompareResult) -> Vec<String> {
    let mut header: Vec<String> = ["t", "exact_rho00", "exact_rho01_re", "exact_rho01_im"]
        .map(String::from)
        .to_vec();
    for i in 0..result.tcl.len() {
        for col in ["rho00", "rho01_re", "rho01_im"] {
            header.push(format!("tcl_theta_{i}_{col}"));
        }
    }
    if result.ecps.is_some() {
        header.extend(["ecps_rho00", "ecps_rho01_re", "ecps_rho01_im"].map(String::from));
    }
    header
}

#[derive(Serialize)]
struct CompareExtra {
    /// Angle of each `tcl_theta_<i>_*` column group.
    projector_thetas: Vec<f64>,
    /// Largest entry of `(I − P_θ)ρ₀` per projector.
    dropped_irrelevant_max_abs: Vec<f64>,
    project_initial: bool,
    ecps_components: Vec<(f64, f64)>,
}

pub fn write_compare(cfg: &ExperimentConfig, result: &CompareResult, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out)?;
    let header = compare_header(result);
    let exact00 = result.exact.rho00();
    let exact01 = result.exact.rho01();
    let tcl: Vec<_> = result.tcl.iter().map(|r| (r.solution.rho00(), r.solution.rho01())).collect();
    let ecps = result.ecps.as_ref().map(|s| (s.rho00(), s.rho01()));
    let rows: Vec<Vec<String>> = result
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut row = vec![fmt_f64(t), fmt_f64(exact00[i]), fmt_f64(exact01[i].re), fmt_f64(exact01[i].im)];
            for (p00, p01) in tcl.iter().chain(ecps.iter()) {
                row.extend([fmt_f64(p00[i]), fmt_f64(p01[i].re), fmt_f64(p01[i].im)]);
            }
            row
        })
        .collect();
    let csv_path = out.join("compare.csv");
    write_rows(&csv_path, &header, &rows)?;

    let plot_path = out.join(PLOT_FILE);
    fs::write(&plot_path, COMPARE_PLOT)?;

    let extra = CompareExtra {
        projector_thetas: result.tcl.iter().map(|r| r.theta).collect(),
        dropped_irrelevant_max_abs: result.tcl.iter().map(|r| r.dropped_irrelevant).collect(),
        project_initial: cfg.projectors.project_initial,
        ecps_components: result
            .ecps
            .as_ref()
            .map(|s| s.provenance.iter().map(|p| (p.weight, p.theta)).collect())
            .unwrap_or_default(),
    };
    let mut derived = model_derived(cfg);
    derived.insert("t_max", *result.times.last().unwrap_or(&0.0));
    write_metadata(
        out,
        cfg,
        &result.seeds,
        derived,
        BTreeMap::from([("compare.csv", header)]),
        extra,
    )?;
    Ok(vec![csv_path, plot_path, out.join(METADATA_FILE)])
}

pub fn write_choi_scan(cfg: &ExperimentConfig, table: &ScanTable, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out)?;
    let mut header = vec!["xi".to_string(), "theta".to_string()];
    header.extend((1..=16).map(|k| format!("sv{k}")));
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![fmt_f64(r.xi), fmt_f64(r.theta)];
            row.extend(r.singular_values.iter().map(|&s| fmt_f64(s)));
            row
        })
        .collect();
    let scan_path = out.join("choi_scan.csv");
    write_rows(&scan_path, &header, &rows)?;

    let summary_header: Vec<String> = ["xi", "argmin_theta", "min_max_sv"].map(String::from).to_vec();
    let summary_rows: Vec<Vec<String>> = table
        .summaries
        .iter()
        .map(|s| vec![fmt_f64(s.xi), fmt_f64(s.argmin_theta), fmt_f64(s.min_max_singular_value)])
        .collect();
    let summary_path = out.join("choi_scan_summary.csv");
    write_rows(&summary_path, &summary_header, &summary_rows)?;

    let plot_path = out.join(PLOT_FILE);
    fs::write(&plot_path, SCAN_PLOT)?;

    write_metadata(
        out,
        cfg,
        &[],
        BTreeMap::from([("lambda", cfg.scan.lambda)]),
        BTreeMap::from([("choi_scan.csv", header), ("choi_scan_summary.csv", summary_header)]),
        (),
    )?;
    Ok(vec![scan_path, summary_path, plot_path, out.join(METADATA_FILE)])
}

#[derive(Serialize)]
struct SteadyExtra {
    exact_time: f64,
    cps_theta: f64,
    ecps_thetas: Vec<f64>,
}

pub fn write_steady_state(
    cfg: &ExperimentConfig,
    result: &SteadyStateResult,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out)?;
    let header: Vec<String> = ["entry", "exact", "cps", "ecps", "abs_err_cps", "abs_err_ecps"]
        .map(String::from)
        .to_vec();
    let exact = reduced_entries(&result.exact);
    let cps = reduced_entries(&result.cps);
    let ecps = reduced_entries(&result.ecps);
    let rows: Vec<Vec<String>> = (0..4)
        .map(|i| {
            let (name, e) = exact[i];
            let (c, m) = (cps[i].1, ecps[i].1);
            vec![
                name.to_string(),
                fmt_f64(e),
                fmt_f64(c),
                fmt_f64(m),
                fmt_f64((c - e).abs()),
                fmt_f64((m - e).abs()),
            ]
        })
        .collect();
    let path = out.join("steady_state.csv");
    write_rows(&path, &header, &rows)?;

    let comp_header: Vec<String> = ["component", "weight", "theta", "rho00", "rho11", "rho01_re", "rho01_im"]
        .map(String::from)
        .to_vec();
    let comp_rows: Vec<Vec<String>> = result
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut row = vec![(i + 1).to_string(), fmt_f64(c.weight), fmt_f64(c.theta)];
            row.extend(reduced_entries(&c.steady).iter().map(|(_, v)| fmt_f64(*v)));
            row
        })
        .collect();
    let comp_path = out.join("steady_state_components.csv");
    write_rows(&comp_path, &comp_header, &comp_rows)?;

    let plot_path = out.join(PLOT_FILE);
    fs::write(&plot_path, STEADY_PLOT)?;

    let mut derived = model_derived(cfg);
    derived.insert("t_eval", result.t_eval);
    write_metadata(
        out,
        cfg,
        &result.seeds,
        derived,
        BTreeMap::from([("steady_state.csv", header), ("steady_state_components.csv", comp_header)]),
        SteadyExtra {
            exact_time: result.t_eval,
            cps_theta: std::f64::consts::FRAC_PI_4,
            ecps_thetas: result.components.iter().map(|c| c.theta).collect(),
        },
    )?;
    Ok(vec![path, comp_path, plot_path, out.join(METADATA_FILE)])
}

const COMPARE_PLOT: &str = r#"#!/usr/bin/env python3
"""Population and coherence panels for compare.csv."""
import csv
import json
import pathlib

import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
meta = json.loads((here / "metadata.json").read_text())
with open(here / "compare.csv", newline="") as f:
    rows = list(csv.DictReader(f))
cols = {k: [float(r[k]) for r in rows] for k in rows[0]}
lam = meta["derived"]["lambda"]
t = [x * lam if lam > 0 else x for x in cols["t"]]
thetas = meta["extra"]["projector_thetas"]

fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
ax0.plot(t, cols["exact_rho00"], "k-", label="exact")
ax1.plot(t, [abs(complex(a, b)) for a, b in zip(cols["exact_rho01_re"], cols["exact_rho01_im"])], "k-", label="exact")
for i, th in enumerate(thetas):
    p = f"tcl_theta_{i}_"
    ax0.plot(t, cols[p + "rho00"], "--", label=f"TCL theta={th:.4f}")
    ax1.plot(t, [abs(complex(a, b)) for a, b in zip(cols[p + "rho01_re"], cols[p + "rho01_im"])], "--", label=f"TCL theta={th:.4f}")
if "ecps_rho00" in cols:
    ax0.plot(t, cols["ecps_rho00"], ":", label="ECPS")
    ax1.plot(t, [abs(complex(a, b)) for a, b in zip(cols["ecps_rho01_re"], cols["ecps_rho01_im"])], ":", label="ECPS")
ax0.set_xlabel("lambda t" if lam > 0 else "t")
ax1.set_xlabel("lambda t" if lam > 0 else "t")
ax0.set_ylabel("rho_00")
ax1.set_ylabel("|rho_01|")
ax0.legend()
fig.tight_layout()
fig.savefig(here / "compare.png", dpi=150)
"#;

const SCAN_PLOT: &str = r#"#!/usr/bin/env python3
"""Singular values of Choi(Delta) against theta, one panel per xi."""
import csv
import pathlib

import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "choi_scan.csv", newline="") as f:
    rows = list(csv.DictReader(f))
xis = sorted({float(r["xi"]) for r in rows})
fig, axes = plt.subplots(1, len(xis), figsize=(4 * len(xis), 3.5), squeeze=False)
for ax, xi in zip(axes[0], xis):
    sel = [r for r in rows if float(r["xi"]) == xi]
    theta = [float(r["theta"]) for r in sel]
    for k in range(1, 17):
        ax.plot(theta, [float(r[f"sv{k}"]) for r in sel], lw=1)
    ax.set_title(f"xi = {xi}")
    ax.set_xlabel("theta")
axes[0][0].set_ylabel("singular values")
fig.tight_layout()
fig.savefig(here / "choi_scan.png", dpi=150)
"#;

const STEADY_PLOT: &str = r#"#!/usr/bin/env python3
"""Bar chart of the steady-state entries."""
import csv
import pathlib

import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "steady_state.csv", newline="") as f:
    rows = list(csv.DictReader(f))
names = [r["entry"] for r in rows]
x = range(len(names))
fig, ax = plt.subplots(figsize=(6, 3.5))
for off, key in ((-0.25, "exact"), (0.0, "cps"), (0.25, "ecps")):
    ax.bar([i + off for i in x], [float(r[key]) for r in rows], width=0.25, label=key)
ax.set_xticks(list(x))
ax.set_xticklabels(names)
ax.legend()
fig.tight_layout()
fig.savefig(here / "steady_state.png", dpi=150)
"#;
