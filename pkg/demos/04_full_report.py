"""End-to-end run over a panel CSV: validate, analyze, emit figures.

Builds a small strict-consistent synthetic panel (two years, four
regions, 21 fields plus a cross-field block), validates it, runs the
full analysis, and writes the JSON report and figure CSVs to a
temporary directory. The equivalent shell commands are printed at the
end.

Run: python3 demos/04_full_report.py
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from hcrstats import (
    ESI_FIELDS,
    AnalysisConfig,
    emit_plot_data,
    run_analysis,
    validate_input,
)


def write_panel(path, rng):
    lines = ["year,region,field,count"]
    for year_index, year in enumerate((2017, 2018)):
        bump = 1.12 ** year_index
        for fld in ESI_FIELDS:
            counts = {
                "us": int(rng.integers(2, 60) * bump),
                "chinese-mainland": int(rng.integers(2, 60) * bump),
                "other": int(rng.integers(2, 60) * bump),
            }
            counts["world"] = sum(counts.values())
            for region, count in counts.items():
                lines.append(f"{year},{region},{fld},{count}")
    cf = {"us": 30, "chinese-mainland": 12, "other": 28}
    cf["world"] = sum(cf.values())
    for region, count in cf.items():
        lines.append(f"2018,{region},cross-field,{count}")
    path.write_text("\n".join(lines) + "\n")


def main():
    workdir = Path(tempfile.mkdtemp(prefix="hcrstats-demo-"))
    panel_path = workdir / "panel.csv"
    write_panel(panel_path, np.random.default_rng(17))
    print(f"wrote synthetic panel: {panel_path}\n")

    summary = validate_input(str(panel_path))
    print(f"validation: {summary.n_data_rows} rows, "
          f"{summary.n_entries} entries, "
          f"{len(summary.violations)} violation(s), "
          f"{len(summary.world_warnings)} world-total warning(s)\n")

    config = AnalysisConfig(source=str(panel_path), seed=3)
    report = run_analysis(config)
    report_path = workdir / "report.json"
    report_path.write_text(report.to_json())
    print(f"report written: {report_path}")
    for entry in report.data["chi_squared"]:
        print(f"    chi-squared [{entry['label']}]: "
              f"{entry['statistic']:.3f} (p {entry['p_value']:.4g})")
    agreement = report.data["agreement"]
    line = agreement["line"]
    print(f"    pooled fit over {agreement['n']} pairs: "
          f"M2 = {line['slope']:.4f} M1 + {line['intercept']:.4f}")
    for entry in report.data["wilcoxon"]:
        flag = "significant" if entry["significant_at_005"] else "ns"
        print(f"    wilcoxon [{entry['region']}]: "
              f"p {entry['p_value']:.4f} ({flag})")
    print()

    figures = emit_plot_data(report, str(workdir / "figures"))
    manifest = json.loads(Path(figures["manifest.json"]).read_text())
    print("figure data written:")
    for name, digest in sorted(manifest["files"].items()):
        print(f"    {name}: sha256 {digest[:16]}...")
    for name, reason in sorted(manifest["omitted"].items()):
        print(f"    {name}: omitted ({reason})")
    print()

    print("the same run from the shell:")
    print(f"    hcrstats validate --input {panel_path}")
    print(f"    hcrstats analyze --input {panel_path} --seed 3 \\")
    print(f"        --output {report_path} --plot-data {workdir / 'figures'}")
    print("and the bundled aggregates, no input file needed:")
    print("    hcrstats analyze --paper-data --stdout-json")


if __name__ == "__main__":
    main()
