//! Self-contained matplotlib scripts for the data files the harness writes.
//! Only the Python standard library and matplotlib are required.

use std::path::{Path, PathBuf};

use crate::error::Result;

const TRACE_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Seed-mean curves from a heavyclip trace file (CSV or JSON lines)."""
import csv, json, sys
from collections import defaultdict
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "@DATA@"
with open(path) as f:
    text = f.read()
if text.lstrip().startswith("{"):
    rows = [json.loads(l) for l in text.splitlines() if l.strip()]
else:
    rows = list(csv.DictReader(text.splitlines()))

metrics = ["suboptimality", "grad_norm", "min_grad_stat", "eff_step"]
sums = defaultdict(lambda: defaultdict(lambda: [0.0, 0]))
for r in rows:
    key = (r["experiment"], r["algorithm"])
    k = int(float(r["k"]))
    for m in metrics:
        v = r.get(m)
        if v in (None, ""):
            continue
        acc = sums[(key, m)][k]
        acc[0] += float(v)
        acc[1] += 1

fig, axes = plt.subplots(2, 2, figsize=(11, 8))
for ax, m in zip(axes.flat, metrics):
    for (key, metric), by_k in sorted(sums.items()):
        if metric != m:
            continue
        ks = sorted(by_k)
        ys = [by_k[k][0] / by_k[k][1] for k in ks]
        pts = [(k, y) for k, y in zip(ks, ys) if y > 0]
        if pts:
            ax.loglog(*zip(*pts), label="/".join(key))
    ax.set_xlabel("k")
    ax.set_title("seed mean " + m)
    ax.legend(fontsize=7)
fig.tight_layout()
out = path.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=120)
print(out)
"#;

const NOISE_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Histogram and running second moment from a heavyclip noise probe."""
import csv, json, sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

def load(path):
    with open(path) as f:
        text = f.read()
    if text.lstrip().startswith("{"):
        return [json.loads(l) for l in text.splitlines() if l.strip()]
    return list(csv.DictReader(text.splitlines()))

var = load(sys.argv[1] if len(sys.argv) > 1 else "@VARIANCE@")
hist = load(sys.argv[2] if len(sys.argv) > 2 else "@HISTOGRAM@")
fig, (a, b) = plt.subplots(1, 2, figsize=(11, 4))
a.bar([float(r["bin_lo"]) for r in hist], [float(r["density"]) for r in hist],
      width=[float(r["bin_hi"]) - float(r["bin_lo"]) for r in hist], align="edge")
a.set_yscale("log")
a.set_title("histogram")
b.loglog([float(r["n"]) for r in var], [float(r["second_moment"]) for r in var])
b.set_xlabel("samples")
b.set_title("empirical second moment")
fig.tight_layout()
out = "@STEM@.png"
fig.savefig(out, dpi=120)
print(out)
"#;

/// Writes `<data stem>.plot.py` for a trace file and returns its path.
pub fn write_trace_plot(data: &Path) -> Result<PathBuf> {
    let script = data.with_extension("plot.py");
    let name = data.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    std::fs::write(&script, TRACE_SCRIPT.replace("@DATA@", &name))?;
    Ok(script)
}

/// Writes the noise-probe plot script next to the two data files.
pub fn write_noise_plot(dir: &Path, variance: &Path, histogram: &Path) -> Result<PathBuf> {
    let script = dir.join("noise_probe.plot.py");
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let text = NOISE_SCRIPT
        .replace("@VARIANCE@", &name(variance))
        .replace("@HISTOGRAM@", &name(histogram))
        .replace("@STEM@", "noise_probe");
    std::fs::write(&script, text)?;
    Ok(script)
}
