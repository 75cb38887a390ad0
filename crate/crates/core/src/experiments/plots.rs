//! Matplotlib scripts that render each experiment from its CSV files.

use super::ExperimentId;

const PRELUDE: &str = r#"#!/usr/bin/env python3
import csv
import glob
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name), newline="") as fh:
        return list(csv.DictReader(fh))


def column(rows, key, cast=float):
    return [cast(r[key]) if r[key] != "" else float("nan") for r in rows]


def trace_panel(ax, name, key, logx=True):
    rows = load(name)
    n = column(rows, "n", int)
    y = column(rows, key)
    ax.plot(n, y, lw=0.5, color="tab:blue")
    rec = [i for i, r in enumerate(rows) if r["is_record"] == "1" and y[i] == y[i]]
    ax.plot([n[i] for i in rec], [y[i] for i in rec], "o", mfc="none", ms=3, color="tab:red")
    if logx:
        ax.set_xscale("log")
    ax.set_title(name)
    ax.set_xlabel("n")


def save(fig, stem):
    out = os.path.join(HERE, stem + ".png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(out)
"#;

fn py_list(files: &[&str]) -> String {
    let quoted: Vec<String> = files.iter().map(|f| format!("{f:?}")).collect();
    format!("[{}]", quoted.join(", "))
}

/// Python source rendering `files`, the CSVs emitted by one run of `id`.
pub fn plot_script(id: ExperimentId, files: &[&str]) -> String {
    let stem = id.as_str().replace('-', "_");
    let body = match id {
        ExperimentId::Fig1Vdc | ExperimentId::Fig2Product => format!(
            r#"
FILES = {files}

fig, axes = plt.subplots(len(FILES), 1, figsize=(8, 3 * len(FILES)), squeeze=False)
for ax, name in zip(axes[:, 0], FILES):
    trace_panel(ax, name, "scaled_error")
    ax.set_ylabel("n |mu_hat - mu|")
save(fig, "{stem}")
"#,
            files = py_list(files),
        ),
        ExperimentId::Fig3Indicator | ExperimentId::Fig4Simplex => format!(
            r#"
FILES = {files}

fig, axes = plt.subplots(len(FILES), 1, figsize=(8, 3 * len(FILES)), squeeze=False)
for ax, name in zip(axes[:, 0], FILES):
    trace_panel(ax, name, "log_scaled_error")
    ax.axhline(0.0, color="grey", lw=0.5)
    ax.set_ylabel("n |mu_hat - mu| / log n")
save(fig, "{stem}")
"#,
            files = py_list(files),
        ),
        ExperimentId::Fig5Bigm => format!(
            r#"
# Every fig5 table in this directory becomes one panel.
FILES = sorted(glob.glob(os.path.join(HERE, "fig5_bigm_d*.csv"))) or [
    os.path.join(HERE, f) for f in {files}
]

fig, axes = plt.subplots(1, len(FILES), figsize=(4 * len(FILES), 3.5), squeeze=False)
for ax, path in zip(axes[0], FILES):
    rows = load(os.path.basename(path))
    m = column(rows, "m", int)
    err = column(rows, "signed_scaled_error_float")
    ax.plot(m, err, ".-", lw=0.6, ms=3)
    ax.axhline(0.0, color="grey", lw=0.5)
    ax.set_title("d = " + rows[0]["d"] if rows else path)
    ax.set_xlabel("m  (n = 2^m)")
    ax.set_ylabel("n (mu_hat - mu)")
save(fig, "{stem}")
"#,
            files = py_list(files),
        ),
        ExperimentId::RkhsRate => format!(
            r#"
FILES = {files}

fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
for name in FILES:
    rows = load(name)
    n = column(rows, "n", int)
    ax0.loglog(n, column(rows, "wce"), "o-", ms=3, label=rows[0]["points"] if rows else name)
    ax1.semilogx(n, column(rows, "lower_bound"), "o-", ms=3, label=rows[0]["points"] if rows else name)
ax0.set_xlabel("n")
ax0.set_ylabel("worst-case error")
ax1.set_xlabel("n")
ax1.set_ylabel("certified lower bound")
ax0.legend()
ax1.legend()
save(fig, "{stem}")
"#,
            files = py_list(files),
        ),
    };
    format!("{PRELUDE}{body}")
}
