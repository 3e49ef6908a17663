"""Report assembly: run the full analysis pipeline over a panel (or the
bundled reference aggregates) and serialize everything into one
deterministic JSON document, plus plot-ready CSV series for the four
standard figures.

Determinism contract: identical (input bytes, config, seed) produce
byte-identical JSON, and every figure CSV value is copied from the
report rather than recomputed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, fields
from typing import Any, Mapping, Sequence

import numpy as np
from scipy import stats

from .agreement import (
    EQN5_CONVENTIONS,
    THRESHOLD_CONVENTIONS,
    Z_MODES,
    AgreementOptions,
    LineCoefficients,
    LoaModel,
    agreement_pipeline,
    fit_wlp,
    interchange_threshold,
    loa_band,
)
from .errors import (
    BadSampleSizeError,
    ConfigError,
    DegenerateInputError,
    DegenerateTableError,
    MissingDataError,
    ParseError,
    TooFewPairsError,
    UndefinedSignError,
    ZeroVarianceError,
)
from .panel import (
    CROSS_FIELD,
    ESI_FIELDS,
    REGIONS,
    FieldRegionPanel,
    PairedSeries,
    ShareBreakdown,
    concat_paired_series,
    derive_contingency,
    growth_summary,
    load_panel,
    paired_series,
    scan_panel_csv,
    shares,
)
from .reference import (
    AS_TESTED_NOTE,
    CI_TRANSPOSITION_NOTE,
    SHARE_2017_NOTE,
    paper_reference_data,
    reference_data_checksum,
)
from .stat_tests import (
    NormalityResult,
    chi_squared_test,
    ks_normality,
    shapiro_wilk,
    spearman_matrix,
    wilcoxon_signed_rank,
)

SCHEMA_VERSION = 1
PAPER_DATA_SOURCE = "paper-data"
BAND_SAMPLES = 200
PRINTED_BAND_RANGE = (0.0, 300.0)


@dataclass(frozen=True)
class AnalysisConfig:
    """Validated run configuration; every mode switch the pipeline knows
    appears here so reports can echo it verbatim."""

    source: str
    year_a: int = 2017
    year_b: int = 2018
    regions: tuple[str, ...] = REGIONS
    paper_compat: bool = False
    z_mode: str = "normal"
    weight_scheme: str = "uniform"
    eqn5: str = "worst"
    seed: int = 0
    n_resamples: int = 2000
    consistency_mode: str = "strict"

    def __post_init__(self) -> None:
        object.__setattr__(self, "regions", tuple(self.regions))
        if not self.source:
            raise ConfigError("source: empty (give a panel path or "
                              f"{PAPER_DATA_SOURCE!r})")
        if self.year_a == self.year_b:
            raise ConfigError(
                f"year_a and year_b must differ, both are {self.year_a}")
        if not self.regions:
            raise ConfigError("regions: empty list")
        for region in self.regions:
            if region not in REGIONS:
                raise ConfigError(f"regions: unknown region {region!r}")
        if len(set(self.regions)) != len(self.regions):
            raise ConfigError("regions: duplicate entries")
        if self.weight_scheme not in ("uniform", "proportional"):
            raise ConfigError(
                f"weight_scheme: unknown scheme {self.weight_scheme!r}")
        if self.z_mode not in Z_MODES:
            raise ConfigError(f"z_mode: must be one of {Z_MODES}")
        if self.eqn5 not in EQN5_CONVENTIONS:
            raise ConfigError(f"eqn5: must be one of {EQN5_CONVENTIONS}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed: must fit in an unsigned 64-bit integer")
        if self.n_resamples < 1000:
            raise ConfigError(
                f"n_resamples: must be >= 1000, got {self.n_resamples}")
        if self.consistency_mode not in ("strict", "per-source"):
            raise ConfigError(
                f"consistency_mode: unknown mode {self.consistency_mode!r}")

    @property
    def paper_data(self) -> bool:
        return self.source == PAPER_DATA_SOURCE

    def echo(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["regions"] = list(self.regions)
        return out


@dataclass(frozen=True)
class AnalysisReport:
    """A finished analysis as one JSON-ready tree of plain values."""

    data: Mapping[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.data[key]

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Section builders shared by both input modes

def _f(value) -> float | None:
    return None if value is None else float(value)


def _chi_entry(label: str, table, note: str | None = None) -> dict[str, Any]:
    res = chi_squared_test(table)
    return {
        "label": label,
        "row_labels": list(table.row_labels),
        "col_labels": list(table.col_labels),
        "rows": [list(r) for r in table.rows],
        "statistic": _f(res.statistic),
        "df": res.df,
        "p_value": _f(res.p_value),
        "yates": res.yates,
        "expected": [[_f(v) for v in row] for row in res.expected],
        "all_expected_at_least_5": res.all_expected_at_least_5,
        "total_above_40": res.total_above_40,
        "significant_at_005": res.significant_at_005,
        "note": note,
    }


def _normality_entry(label: str, res: NormalityResult) -> dict[str, Any]:
    return {
        "label": label,
        "method": res.method,
        "statistic": _f(res.statistic),
        "p_value": _f(res.p_value),
        "n": res.n,
        "normal_at_005": res.normal_at_005,
    }


def _share_entry(breakdown: ShareBreakdown,
                 printed: Mapping[str, float] | None,
                 note: str | None = None) -> dict[str, Any]:
    display = breakdown.display_pct()
    entry: dict[str, Any] = {
        "year": breakdown.year,
        "include_cross_field": breakdown.include_cross_field,
        "counts": dict(sorted(breakdown.counts.items())),
        "total": breakdown.total,
        "share_pct": {r: 100.0 * s for r, s in sorted(breakdown.shares.items())},
        "display_pct": dict(sorted(display.items())),
        "printed_pct": dict(sorted(printed.items())) if printed else None,
        "note": note,
    }
    if printed:
        entry["max_abs_diff_pp"] = max(
            abs(display[r] - printed[r]) for r in printed)
    return entry


def _growth_section(growth, year_a: int, year_b: int) -> dict[str, Any]:
    section: dict[str, Any] = {
        "totals": {
            "fields-21": {str(y): c for y, c in
                          sorted(growth.totals_excluding_cf.items())},
            "all": {str(y): c for y, c in
                    sorted(growth.totals_including_cf.items())},
        },
        "consecutive_ratios_pct": {
            "fields-21": {f"{a}-{b}": 100.0 * r for (a, b), r in
                          sorted(growth.ratios_excluding_cf.items())},
            "all": {f"{a}-{b}": 100.0 * r for (a, b), r in
                    sorted(growth.ratios_including_cf.items())},
        },
    }
    focus: dict[str, Any] = {"year_a": year_a, "year_b": year_b}
    try:
        focus["growth_pct_fields21"] = growth.growth_pct(
            year_a, year_b, include_cross_field=False)
    except MissingDataError:
        focus["growth_pct_fields21"] = None
    try:
        pct = growth.growth_pct(year_a, year_b, include_cross_field=True)
        focus["growth_pct_all"] = pct
        focus["ratio_pct_all"] = pct + 100.0
    except MissingDataError:
        focus["growth_pct_all"] = None
        focus["ratio_pct_all"] = None
    section["focus"] = focus
    return section


def _loa_dict(model: LoaModel) -> dict[str, Any]:
    return {
        "a": _f(model.a), "b": _f(model.b),
        "se_a": _f(model.se_a), "se_b": _f(model.se_b),
        "t_a": _f(model.t_a), "p_a": _f(model.p_a),
        "t_b": _f(model.t_b), "p_b": _f(model.p_b),
        "scale": _f(model.scale), "z": _f(model.z), "n": model.n,
        "m1_range": [_f(model.m1_range[0]), _f(model.m1_range[1])],
    }


def _band_dict(model: LoaModel, line, lo: float, hi: float,
               eqn5: str) -> dict[str, Any]:
    m1 = np.linspace(lo, hi, BAND_SAMPLES)
    band = loa_band(model, line, m1, eqn5)
    return {
        "eqn5": eqn5,
        "m1": list(band.m1),
        "fitted": list(band.fitted),
        "sd": list(band.sd),
        "lower": list(band.lower),
        "upper": list(band.upper),
        "lower_inner": list(band.lower_inner),
        "upper_inner": list(band.upper_inner),
        "lower_outer": list(band.lower_outer),
        "upper_outer": list(band.upper_outer),
        "error_term": list(band.error_term),
    }


def _crossings_matrix(model: LoaModel, line, t_range,
                      ) -> dict[str, dict[str, list[dict[str, float]]]]:
    """Equality-line crossings under every sign convention, so runs
    under one convention still document the alternatives."""
    out: dict[str, dict[str, list[dict[str, float]]]] = {}
    for eqn5 in EQN5_CONVENTIONS:
        out[eqn5] = {}
        for conv in THRESHOLD_CONVENTIONS:
            crossings = interchange_threshold(model, line, t_range, conv, eqn5)
            out[eqn5][conv] = [
                {"boundary": c.boundary, "m1": _f(c.m1)} for c in crossings]
    return out


def _mode_stamp(config: AnalysisConfig, model: LoaModel) -> dict[str, Any]:
    return {
        "weight_scheme": config.weight_scheme,
        "paper_compat": config.paper_compat,
        "scale": _f(model.scale),
        "z_mode": config.z_mode,
        "z": _f(model.z),
        "eqn5": config.eqn5,
        "level": 0.95,
        "seed": config.seed,
        "n_resamples": config.n_resamples,
    }


# ---------------------------------------------------------------------------
# Paper-data mode

def _paper_agreement_section(config: AnalysisConfig,
                             notes: list[str]) -> dict[str, Any]:
    ref = paper_reference_data()
    line = LineCoefficients(ref.line.slope, ref.line.intercept)
    scale = 1.25 if config.paper_compat else float(np.sqrt(np.pi / 2.0))
    z = 1.96 if config.z_mode == "normal" else float(
        stats.t.ppf(0.975, ref.line.n - 1))
    model = LoaModel(
        a=ref.line.a, b=ref.line.b, se_a=ref.line.se_a, se_b=ref.line.se_b,
        scale=scale, z=z, n=ref.line.n, m1_range=PRINTED_BAND_RANGE,
        t_a=ref.line.t_a, p_a=ref.line.p_a,
        t_b=ref.line.t_b, p_b=None,
    )
    lo, hi = PRINTED_BAND_RANGE
    thresholds = {
        conv: [
            {"boundary": c.boundary, "m1": _f(c.m1)}
            for c in interchange_threshold(model, line, (lo, hi), conv,
                                           config.eqn5)
        ]
        for conv in THRESHOLD_CONVENTIONS
    }
    notes.append(
        "agreement: built from the printed line and residual-spread "
        "coefficients; per-field pairs are not published, so there are "
        "no residuals, no influence classes and no refitted intervals. "
        "Supply --input with a reconstructed panel for a data fit.")
    return {
        "source": "printed-coefficients",
        "n": ref.line.n,
        "mode": _mode_stamp(config, model),
        "line": {
            "slope": _f(ref.line.slope),
            "intercept": _f(ref.line.intercept),
            "slope_ci_printed": [_f(v) for v in ref.line.slope_ci],
            "intercept_ci_printed": [_f(v) for v in ref.line.intercept_ci],
            "ci_note": CI_TRANSPOSITION_NOTE,
        },
        "loa": {**_loa_dict(model), "p_b_printed_bound": ref.line.p_b_bound},
        "residual_normality": None,
        "residual_normality_ok": None,
        "thresholds": thresholds,
        "crossings_by_convention": _crossings_matrix(model, line, (lo, hi)),
        "influence": None,
        "band": _band_dict(model, line, lo, hi, config.eqn5),
    }


def _run_paper_analysis(config: AnalysisConfig) -> AnalysisReport:
    ref = paper_reference_data()
    notes: list[str] = []

    chi = [
        _chi_entry("mainland-share-2016-2017", ref.shift_2016_2017),
        _chi_entry("mainland-share-2017-2018", ref.shift_2017_2018),
        _chi_entry("mainland-share-2018-2020-as-printed",
                   ref.shift_2018_2020, note=AS_TESTED_NOTE),
        _chi_entry("mainland-share-2018-2020-as-tested",
                   ref.shift_2018_2020_as_tested, note=AS_TESTED_NOTE),
    ]

    share_entries = []
    for year, include_cf in ((config.year_a, False), (config.year_b, False),
                             (config.year_b, True)):
        try:
            breakdown = ref.share_breakdown(year, include_cf)
        except MissingDataError as exc:
            notes.append(f"shares: {exc}")
            continue
        printed = ref.printed_share_labels.get((year, include_cf))
        note = SHARE_2017_NOTE if (year, include_cf) == (2017, False) else None
        share_entries.append(_share_entry(breakdown, printed, note))

    counts = [
        {"year": year, "region": region, "scope": scope, "count": count}
        for (year, region, scope), count in sorted(ref.summary.items())
    ]

    notes.append("normality: no raw residuals exist in the bundled "
                 "aggregates; the section is empty.")
    notes.append("spearman: per-field series are not published; the "
                 "section is empty.")
    notes.append("wilcoxon: per-field pairs are not published; the "
                 "section is empty.")
    notes.append("scatter: per-field pairs are not published; no scatter "
                 "series.")

    data = {
        "schema_version": SCHEMA_VERSION,
        "metadata": {
            "generator": "hcrstats",
            "source": config.source,
            "dataset_checksum": reference_data_checksum(),
            "config": config.echo(),
        },
        "chi_squared": chi,
        "normality": [],
        "spearman": [],
        "wilcoxon": [],
        "agreement": _paper_agreement_section(config, notes),
        "shares": share_entries,
        "growth": _growth_section(ref.growth_summary(),
                                  config.year_a, config.year_b),
        "counts": counts,
        "scatter": None,
        "notes": sorted(notes),
    }
    return AnalysisReport(data=data)


# ---------------------------------------------------------------------------
# Panel mode

def _panel_counts(panel: FieldRegionPanel,
                  config: AnalysisConfig) -> list[dict[str, Any]]:
    rows: list[dict[str, Any]] = []
    for year in panel.years:
        for region in config.regions:
            try:
                base = panel.region_total(year, region,
                                          include_cross_field=False)
            except MissingDataError:
                continue
            rows.append({"year": year, "region": region,
                         "scope": "fields-21", "count": base})
            if panel.get(year, region, CROSS_FIELD) is not None:
                rows.append({
                    "year": year, "region": region, "scope": "all",
                    "count": panel.region_total(
                        year, region, include_cross_field=True),
                })
    rows.sort(key=lambda r: (r["year"], r["region"], r["scope"]))
    return rows


def _panel_series(panel: FieldRegionPanel, config: AnalysisConfig,
                  notes: list[str]) -> dict[str, PairedSeries]:
    series: dict[str, PairedSeries] = {}
    for region in config.regions:
        try:
            series[region] = paired_series(
                panel, region, config.year_a, config.year_b)
        except MissingDataError as exc:
            notes.append(f"paired series for {region}: {exc}")
    return series


def _panel_agreement_section(config: AnalysisConfig,
                             series: dict[str, PairedSeries],
                             notes: list[str],
                             normality: list[dict[str, Any]],
                             ) -> dict[str, Any] | None:
    if not series:
        notes.append("agreement: no region had complete paired series; "
                     "section omitted.")
        return None
    pooled = concat_paired_series([series[r] for r in config.regions
                                   if r in series])
    options = AgreementOptions(
        weight_scheme=config.weight_scheme,
        paper_compat=config.paper_compat,
        z_mode=config.z_mode,
        eqn5=config.eqn5,
        seed=config.seed,
        n_resamples=config.n_resamples,
    )
    result = agreement_pipeline(pooled, options)
    fit = result.fit
    normality.append(_normality_entry("pooled-residuals",
                                      result.residual_normality))
    lo, hi = min(fit.m1), max(fit.m1)
    return {
        "source": "fitted",
        "pooled_regions": [r for r in config.regions if r in series],
        "n": fit.n,
        "mode": _mode_stamp(config, result.loa),
        "line": {
            "slope": _f(fit.slope),
            "intercept": _f(fit.intercept),
            "centroid": [_f(fit.centroid[0]), _f(fit.centroid[1])],
            "r_weighted": _f(fit.r_weighted),
            "slope_ci_analytic": [_f(v) for v in fit.slope_ci],
            "intercept_ci_analytic": [_f(v) for v in fit.intercept_ci],
            "slope_ci_bootstrap": [_f(v) for v in result.bootstrap_slope_ci],
            "intercept_ci_bootstrap": [
                _f(v) for v in result.bootstrap_intercept_ci],
        },
        "loa": _loa_dict(result.loa),
        "residual_normality": _normality_entry(
            "pooled-residuals", result.residual_normality),
        "residual_normality_ok": result.residual_normality_ok,
        "thresholds": {
            conv: [{"boundary": c.boundary, "m1": _f(c.m1)}
                   for c in crossings]
            for conv, crossings in sorted(result.thresholds.items())
        },
        "crossings_by_convention": _crossings_matrix(
            result.loa, fit, (0.0, hi)),
        "influence": [
            {
                "label": label,
                "m1": _f(inf.m1), "m2": _f(inf.m2),
                "category": inf.category,
                "gap_to_wlp": _f(inf.gap_to_wlp),
                "gap_to_equality": _f(inf.gap_to_equality),
            }
            for label, inf in zip(pooled.labels, result.influence)
        ],
        "band": _band_dict(result.loa, fit, lo, hi, config.eqn5),
    }


def _run_panel_analysis(config: AnalysisConfig) -> AnalysisReport:
    with open(config.source, "rb") as fh:
        raw = fh.read()
    checksum = hashlib.sha256(raw).hexdigest()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{config.source} is not valid UTF-8: {exc}") from None
    panel = load_panel(io.StringIO(text), mode=config.consistency_mode)
    notes: list[str] = []

    chi = []
    for region in config.regions:
        if region == "world":
            continue
        try:
            table = derive_contingency(
                panel, region, (config.year_a, config.year_b))
            chi.append(_chi_entry(
                f"{region}-share-{config.year_a}-{config.year_b}", table))
        except (MissingDataError, DegenerateTableError) as exc:
            notes.append(f"chi-squared for {region}: {exc}")

    series = _panel_series(panel, config, notes)

    normality: list[dict[str, Any]] = []
    agreement = _panel_agreement_section(config, series, notes, normality)
    for region in config.regions:
        if region not in series:
            continue
        try:
            region_fit = fit_wlp(series[region])
            residuals = region_fit.residuals
        except (DegenerateInputError, UndefinedSignError) as exc:
            notes.append(f"normality for {region}: {exc}")
            continue
        try:
            normality.append(_normality_entry(
                f"{region}-residuals", shapiro_wilk(residuals)))
        except (BadSampleSizeError, ZeroVarianceError) as exc:
            notes.append(f"shapiro for {region}: {exc}")
        try:
            normality.append(_normality_entry(
                f"{region}-residuals", ks_normality(residuals)))
        except (BadSampleSizeError, ZeroVarianceError) as exc:
            notes.append(f"lilliefors for {region}: {exc}")

    spearman_entries = []
    for year in (config.year_a, config.year_b):
        labels = []
        vectors = []
        for region in config.regions:
            values = [panel.get(year, region, fld) for fld in ESI_FIELDS]
            if any(v is None for v in values):
                continue
            labels.append(region)
            vectors.append([float(v) for v in values])
        if len(labels) < 2:
            notes.append(f"spearman: fewer than two regions have complete "
                         f"field coverage for {year}.")
            continue
        matrix = spearman_matrix(vectors, labels=labels)
        spearman_entries.append({
            "year": year,
            "labels": list(matrix.labels),
            "n": matrix.n,
            "method": matrix.method,
            "rho": [[_f(v) for v in row] for row in matrix.rho],
            "p_values": [[_f(v) for v in row] for row in matrix.p_values],
        })

    wilcoxon_entries = []
    for region in config.regions:
        if region not in series:
            continue
        try:
            res = wilcoxon_signed_rank(series[region])
        except TooFewPairsError as exc:
            notes.append(f"wilcoxon for {region}: {exc}")
            continue
        wilcoxon_entries.append({
            "region": region,
            "w_plus": _f(res.w_plus),
            "w_minus": _f(res.w_minus),
            "n_effective": res.n_effective,
            "p_value": _f(res.p_value),
            "method": res.method,
            "zero_method": res.zero_method,
            "significant_at_005": res.significant_at_005,
        })

    share_entries = []
    for year, include_cf in ((config.year_a, False), (config.year_b, False),
                             (config.year_b, True)):
        if include_cf and not any(
                panel.get(year, r, CROSS_FIELD) is not None
                for r in ("us", "chinese-mainland", "other")):
            continue
        try:
            share_entries.append(_share_entry(
                shares(panel, year, include_cf), printed=None))
        except MissingDataError as exc:
            notes.append(f"shares for {year}: {exc}")

    try:
        growth_sec = _growth_section(growth_summary(panel),
                                     config.year_a, config.year_b)
    except MissingDataError as exc:
        growth_sec = None
        notes.append(f"growth: {exc}")

    scatter = [
        {"region": region, "field": label, "m1": _f(m1), "m2": _f(m2)}
        for region in config.regions if region in series
        for label, m1, m2 in zip(series[region].labels,
                                 series[region].m1, series[region].m2)
    ] or None
    if scatter is None:
        notes.append("scatter: no complete paired series; no scatter series.")

    data = {
        "schema_version": SCHEMA_VERSION,
        "metadata": {
            "generator": "hcrstats",
            "source": config.source,
            "dataset_checksum": checksum,
            "config": config.echo(),
        },
        "chi_squared": chi,
        "normality": normality,
        "spearman": spearman_entries,
        "wilcoxon": wilcoxon_entries,
        "agreement": agreement,
        "shares": share_entries,
        "growth": growth_sec,
        "counts": _panel_counts(panel, config),
        "scatter": scatter,
        "notes": sorted(notes),
    }
    return AnalysisReport(data=data)


def run_analysis(config: AnalysisConfig) -> AnalysisReport:
    """Run the full pipeline for the configured input and return the
    report; deterministic for fixed (input bytes, config, seed)."""
    if config.paper_data:
        return _run_paper_analysis(config)
    return _run_panel_analysis(config)


# ---------------------------------------------------------------------------
# Figure data

def _write_csv(path: str, header: Sequence[str],
               rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def emit_plot_data(report: AnalysisReport, directory: str) -> dict[str, str]:
    """Write the figure CSV series plus a manifest of SHA-256 hashes.

    Every value is copied from the report, so the CSVs can never drift
    from the JSON. Returns {filename: absolute path} for everything
    written, the manifest included.
    """
    os.makedirs(directory, exist_ok=True)
    written: dict[str, str] = {}
    omitted: dict[str, str] = {}

    def emit(name: str, header: Sequence[str],
             rows: Sequence[Sequence[Any]]) -> None:
        path = os.path.join(directory, name)
        try:
            _write_csv(path, header, rows)
        except OSError as exc:
            raise OSError(f"writing {path}: {exc}") from exc
        written[name] = os.path.abspath(path)

    counts = report.data.get("counts") or []
    emit("fig1_counts.csv", ("year", "region", "scope", "count"),
         [(r["year"], r["region"], r["scope"], r["count"]) for r in counts])

    share_rows = []
    for entry in report.data.get("shares") or []:
        for region in sorted(entry["counts"]):
            printed = (entry.get("printed_pct") or {}).get(region)
            share_rows.append((
                entry["year"],
                str(entry["include_cross_field"]).lower(),
                region,
                entry["counts"][region],
                entry["share_pct"][region],
                entry["display_pct"][region],
                printed,
            ))
    emit("fig2_shares.csv",
         ("year", "include_cross_field", "region", "count",
          "share_pct", "display_pct", "printed_pct"),
         share_rows)

    scatter = report.data.get("scatter")
    if scatter:
        emit("fig3_scatter.csv", ("region", "field", "m1", "m2"),
             [(r["region"], r["field"], r["m1"], r["m2"]) for r in scatter])
    else:
        omitted["fig3_scatter.csv"] = (
            "no per-field paired series in this report")

    agreement = report.data.get("agreement")
    band = (agreement or {}).get("band")
    if band:
        columns = ("m1", "fitted", "sd", "lower", "upper", "lower_inner",
                   "upper_inner", "lower_outer", "upper_outer", "error_term")
        emit("fig4_band.csv", columns,
             list(zip(*(band[c] for c in columns))))
    else:
        omitted["fig4_band.csv"] = "agreement section is empty"

    hashes = {}
    for name, path in sorted(written.items()):
        with open(path, "rb") as fh:
            hashes[name] = hashlib.sha256(fh.read()).hexdigest()
    manifest = {"files": hashes, "omitted": omitted}
    manifest_path = os.path.join(directory, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written["manifest.json"] = os.path.abspath(manifest_path)
    return written


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class ValidationSummary:
    """Everything wrong (and right) with a panel CSV, collected without
    aborting at the first problem."""

    path: str
    n_data_rows: int
    n_entries: int
    violations: tuple[tuple[int, str], ...]
    world_warnings: tuple[str, ...]
    coverage: tuple[dict[str, Any], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_input(path: str) -> ValidationSummary:
    """Scan a panel CSV and report row count, per-(year, region) field
    coverage, and every violation with its line number."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        scan = scan_panel_csv(fh)
    panel = FieldRegionPanel(entries=scan.entries, mode="per-source")
    warnings = tuple(
        f"world count {world} for ({year}, {fld}) does not equal "
        f"us + chinese-mainland + other = {total}"
        for year, fld, world, total in panel._world_mismatches()
    )
    coverage = []
    seen = sorted({(y, r) for (y, r, _) in scan.entries})
    for year, region in seen:
        present = set(panel.fields_present(year, region))
        missing = [f for f in ESI_FIELDS if f not in present]
        coverage.append({
            "year": year,
            "region": region,
            "n_fields": len(present),
            "missing_fields": missing,
            "has_cross_field": CROSS_FIELD in present,
        })
    return ValidationSummary(
        path=path,
        n_data_rows=scan.n_data_rows,
        n_entries=len(scan.entries),
        violations=scan.violations,
        world_warnings=warnings,
        coverage=tuple(coverage),
    )
