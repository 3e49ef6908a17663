"""Acceptance suite: one test per headline claim the package must
reproduce or uphold.

The first six tests check numbers that can be recomputed from the
bundled published aggregates alone.  The rest are property checks that
stand in for figures whose underlying per-field data was never
published: fit invariants on randomized inputs, exact small-sample
distributions, Monte Carlo calibration and coverage, and byte-level
report determinism.  Tolerances are stated inline next to each
assertion; every statistical check runs on a fixed seed.

The final test needs an externally reconstructed per-field panel for
2017/2018 and is skipped unless HCRSTATS_RECONSTRUCTED_PANEL points at
one.
"""

import os
import time

import numpy as np
import pytest

from conftest import make_panel_text
from hcrstats import (
    AgreementOptions,
    AnalysisConfig,
    ESI_FIELDS,
    LineCoefficients,
    LoaModel,
    PairedSeries,
    REGIONS,
    agreement_pipeline,
    chi_squared_test,
    concat_paired_series,
    fit_wlp,
    interchange_threshold,
    ks_normality,
    load_panel,
    loa_band,
    paired_series,
    paper_reference_data,
    run_analysis,
    shapiro_wilk,
    spearman_matrix,
    wilcoxon_signed_rank,
    wlp_confidence_intervals,
)
from hcrstats.report import PAPER_DATA_SOURCE


def test_mainland_share_shift_2016_2017_chi_squared():
    # published: statistic 6.07, df 1, p 0.014
    res = chi_squared_test(paper_reference_data().shift_2016_2017)
    assert res.statistic == pytest.approx(6.07, abs=0.01)
    assert res.df == 1
    assert res.p_value == pytest.approx(0.014, abs=0.001)


def test_mainland_share_shift_2017_2018_chi_squared():
    # published: statistic 2.30, p 0.13
    res = chi_squared_test(paper_reference_data().shift_2017_2018)
    assert res.statistic == pytest.approx(2.30, abs=0.01)
    assert res.p_value == pytest.approx(0.13, abs=0.005)


def test_mainland_share_shift_2018_2020_chi_squared():
    # The published statistic 57.56 is reproduced by the as-tested
    # variant whose first cell is 483; the printed 482 gives 58.01 and
    # leaves its column one short of the published world total.  See
    # AS_TESTED_NOTE in the bundled data.
    ref = paper_reference_data()
    res = chi_squared_test(ref.shift_2018_2020_as_tested)
    assert res.statistic == pytest.approx(57.56, abs=0.05)
    assert res.df == 2
    assert res.p_value < 0.001
    printed = chi_squared_test(ref.shift_2018_2020)
    assert round(printed.statistic, 2) == 58.01


def test_world_growth_percentages():
    growth = paper_reference_data().growth_summary()
    # 3538 -> 4059 across the method change, cross-field excluded
    pct_excl = growth.growth_pct(2017, 2018, include_cross_field=False)
    assert pct_excl == pytest.approx(14.73, abs=0.02)
    # 3538 -> 6079 with cross-field included, published as "171%"
    ratio_incl = growth.growth_pct(2017, 2018, include_cross_field=True) + 100.0
    assert ratio_incl == pytest.approx(171.0, abs=1.0)


def test_region_shares_reproduce_published_percentages():
    # the eight published two-decimal percentages, keyed by
    # (year, include_cross_field, region)
    published = {
        (2017, False, "chinese-mainland"): 7.09,
        (2017, False, "us"): 46.28,
        (2017, False, "other"): 46.63,
        (2018, False, "chinese-mainland"): 6.80,
        (2018, False, "us"): 44.69,
        (2018, False, "other"): 48.51,
        (2018, True, "us"): 43.33,
        (2018, True, "other"): 48.74,
    }
    ref = paper_reference_data()
    displays = {
        (year, incl): ref.share_breakdown(year, incl).display_pct()
        for year, incl in {(y, i) for y, i, _ in published}
    }
    # No integer us/other split of the 2017 total reproduces both
    # published 2017 values (see SHARE_2017_NOTE); those two land one
    # unit off in the second decimal, all others match exactly.
    for (year, incl, region), target in published.items():
        shown = displays[(year, incl)][region]
        assert shown == pytest.approx(target, abs=0.01 + 1e-12)
        if (year, region) not in ((2017, "us"), (2017, "other")):
            assert shown == target


def test_band_at_100_from_published_coefficients():
    ref = paper_reference_data()
    model = LoaModel(
        a=ref.line.a, b=ref.line.b, se_a=ref.line.se_a, se_b=ref.line.se_b,
        scale=1.25, z=1.96, n=ref.line.n, m1_range=(0.0, 300.0),
    )
    line = LineCoefficients(ref.line.slope, ref.line.intercept)
    band = loa_band(model, line, np.array([100.0]), "worst")
    assert band.lower[0] == pytest.approx(85.17, abs=0.005)
    assert band.upper[0] == pytest.approx(143.23, abs=0.005)
    assert band.error_term[0] == pytest.approx(9.51, abs=0.01)


def test_fit_invariants_on_randomized_instances():
    # reciprocity, betweenness, centroid and scale equivariance on
    # 1000 randomized instances, n in [5, 200], 1e-9 relative
    rng = np.random.default_rng(12345)
    started = time.monotonic()
    for _ in range(1000):
        n = int(rng.integers(5, 201))
        m1 = rng.uniform(1.0, 100.0, n)
        slope = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        raw = slope * m1 + rng.uniform(-10.0, 10.0) \
            + rng.uniform(0.1, 5.0) * rng.standard_normal(n)
        m2 = raw - raw.min() + 1.0
        labels = tuple(f"p{i}" for i in range(n))
        pairs = PairedSeries(labels=labels, m1=tuple(m1), m2=tuple(m2))
        fit = fit_wlp(pairs)

        swapped = fit_wlp(PairedSeries(labels=labels, m1=tuple(m2),
                                       m2=tuple(m1)))
        assert fit.slope * swapped.slope == pytest.approx(1.0, rel=1e-9)

        x = m1 - m1.mean()
        y = m2 - m2.mean()
        b_direct = (x * y).sum() / (x * x).sum()
        b_inverse = (y * y).sum() / (x * y).sum()
        assert abs(b_direct) <= abs(fit.slope) * (1 + 1e-9)
        assert abs(fit.slope) <= abs(b_inverse) * (1 + 1e-9)

        assert fit.slope * m1.mean() + fit.intercept == pytest.approx(
            m2.mean(), rel=1e-9)

        fit_y = fit_wlp(PairedSeries(labels=labels, m1=tuple(m1),
                                     m2=tuple(3.0 * m2)))
        assert fit_y.slope == pytest.approx(3.0 * fit.slope, rel=1e-9)
        fit_x = fit_wlp(PairedSeries(labels=labels, m1=tuple(2.0 * m1),
                                     m2=tuple(m2)))
        assert fit_x.slope == pytest.approx(fit.slope / 2.0, rel=1e-9)
    assert time.monotonic() - started < 10.0


def test_exact_line_recovery_with_zero_width_intervals():
    pairs = PairedSeries(
        labels=tuple(f"p{i}" for i in range(8)),
        m1=tuple(float(v) for v in range(1, 9)),
        m2=tuple(2.0 * v + 1.0 for v in range(1, 9)),
    )
    fit = wlp_confidence_intervals(fit_wlp(pairs), method="analytic")
    assert fit.slope == 2.0
    assert fit.intercept == 1.0
    assert fit.slope_ci == (2.0, 2.0)
    assert fit.intercept_ci == (1.0, 1.0)


def test_wilcoxon_exact_distribution_and_normal_agreement():
    # six strictly positive differences: the one-sided tail is 2/2^6,
    # doubled to 0.03125
    uniform = PairedSeries(
        labels=tuple(f"p{i}" for i in range(6)),
        m1=tuple(10.0 * (i + 1) for i in range(6)),
        m2=tuple(10.0 * (i + 1) + i + 1.0 for i in range(6)),
    )
    assert wilcoxon_signed_rank(uniform).p_value == 0.03125

    rng = np.random.default_rng(7)
    d = np.arange(1, 22) * rng.choice([-1.0, 1.0], size=21)
    pairs = PairedSeries(
        labels=tuple(f"f{i}" for i in range(21)),
        m1=tuple(100.0 + 5.0 * i for i in range(21)),
        m2=tuple(100.0 + 5.0 * i + d[i] for i in range(21)),
    )
    exact = wilcoxon_signed_rank(pairs, method="exact")
    approx = wilcoxon_signed_rank(pairs, method="normal-approx")
    assert abs(exact.p_value - approx.p_value) < 0.01


def test_normality_tests_reject_five_percent_of_normal_samples():
    # 10000 seeded replicates each; rejection rate 5% +/- 1 pp
    rng = np.random.default_rng(2025)
    started = time.monotonic()
    rejections = sum(
        shapiro_wilk(rng.standard_normal(21)).p_value < 0.05
        for _ in range(10_000))
    assert 0.04 <= rejections / 10_000 <= 0.06
    rejections = sum(
        ks_normality(rng.standard_normal(84)).p_value < 0.05
        for _ in range(10_000))
    assert 0.04 <= rejections / 10_000 <= 0.06
    assert time.monotonic() - started < 60.0


def test_band_covers_the_generative_model():
    # M2 = 1.1 M1 + 4.2 + N(0, SD(M1)^2) with the published spread
    # coefficients; 10000 draws, 95% +/- 2 pp inside the band
    rng = np.random.default_rng(11)
    m1 = rng.uniform(0.0, 300.0, 10_000)
    sd = 1.25 * (4.85 + 0.07 * m1)
    m2 = 1.1 * m1 + 4.2 + sd * rng.standard_normal(m1.size)
    model = LoaModel(a=4.85, b=0.07, se_a=1.88, se_b=0.02,
                     scale=1.25, z=1.96, n=84, m1_range=(0.0, 300.0))
    band = loa_band(model, LineCoefficients(1.1, 4.2), m1, "worst")
    inside = np.mean((m2 >= np.asarray(band.lower))
                     & (m2 <= np.asarray(band.upper)))
    assert 0.93 <= inside <= 0.97


def test_interchange_threshold_closed_form_and_identity():
    flat = LoaModel(a=0.1, b=0.0, se_a=0.0, se_b=0.0,
                    scale=1.0, z=1.96, n=84, m1_range=(0.0, 10.0))
    # lower limit 1.2 m - 0.196 meets the equality line at
    # 0.196 / 0.2 = 0.98
    for convention in ("inner", "outer"):
        crossings = interchange_threshold(
            flat, LineCoefficients(1.2, 0.0), (0.0, 10.0), convention)
        assert [c.boundary for c in crossings] == [f"lower_{convention}"]
        assert crossings[0].m1 == pytest.approx(0.98, abs=1e-9)
    for convention in ("inner", "outer"):
        assert interchange_threshold(
            flat, LineCoefficients(1.0, 0.0), (0.0, 10.0), convention) == ()


def test_report_json_is_byte_deterministic(tmp_path):
    first = run_analysis(AnalysisConfig(source=PAPER_DATA_SOURCE))
    second = run_analysis(AnalysisConfig(source=PAPER_DATA_SOURCE))
    assert first.to_json().encode() == second.to_json().encode()

    path = tmp_path / "panel.csv"
    path.write_text(make_panel_text(np.random.default_rng(5)))
    config = AnalysisConfig(source=str(path), seed=9, n_resamples=1000)
    assert run_analysis(config).to_json().encode() == \
        run_analysis(config).to_json().encode()


RECONSTRUCTED = os.environ.get("HCRSTATS_RECONSTRUCTED_PANEL")


@pytest.mark.skipif(
    not RECONSTRUCTED,
    reason="needs an externally reconstructed 2017/2018 per-field panel; "
           "set HCRSTATS_RECONSTRUCTED_PANEL to its CSV path")
def test_reconstructed_panel_recovers_published_fit():
    """Conditional: per-field 2017/2018 counts were never published, so
    this only runs against a user-supplied reconstruction (CSV columns
    year,region,field,count covering all four regions).

    Checks the published fit is recovered under at least one weight
    scheme, the spread coefficients land within their published
    standard errors, and the signed-rank/correlation patterns match;
    equality-line crossings are printed under every convention for
    comparison against the published ~150 figure.
    """
    with open(RECONSTRUCTED, encoding="utf-8") as fh:
        panel = load_panel(fh, mode="per-source")
    pooled = concat_paired_series(
        [paired_series(panel, region, 2017, 2018) for region in REGIONS])

    ref = paper_reference_data()
    fits = {
        scheme: agreement_pipeline(
            pooled, AgreementOptions(weight_scheme=scheme, paper_compat=True))
        for scheme in ("uniform", "proportional")
    }
    recovered = {
        scheme: result for scheme, result in fits.items()
        if ref.line.slope_ci[0] <= result.fit.slope <= ref.line.slope_ci[1]
        and ref.line.intercept_ci[0] <= result.fit.intercept
        <= ref.line.intercept_ci[1]
    }
    assert recovered, (
        "no weight scheme recovered the published line: "
        + ", ".join(f"{s}: slope {r.fit.slope:.4f}, "
                    f"intercept {r.fit.intercept:.4f}"
                    for s, r in fits.items()))

    result = next(iter(recovered.values()))
    assert abs(result.loa.a - ref.line.a) <= ref.line.se_a
    assert abs(result.loa.b - ref.line.b) <= ref.line.se_b

    for region in REGIONS:
        p = wilcoxon_signed_rank(paired_series(panel, region, 2017, 2018)).p_value
        if region == "chinese-mainland":
            assert p >= 0.05
        else:
            assert p < 0.05

    for year in (2017, 2018):
        vectors = [
            [float(panel.get(year, region, fld)) for fld in ESI_FIELDS]
            for region in ("us", "chinese-mainland")
        ]
        matrix = spearman_matrix(vectors, labels=["us", "chinese-mainland"])
        assert matrix.rho[0][1] < 0

    for eqn5 in ("worst", "plus-minus", "minus-plus"):
        for convention in ("inner", "outer"):
            crossings = interchange_threshold(
                result.loa, result.fit, (0.0, max(pooled.m1)),
                convention, eqn5)
            print(f"crossings[{eqn5}][{convention}]:",
                  [(c.boundary, round(c.m1, 2)) for c in crossings])
