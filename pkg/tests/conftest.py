import numpy as np
import pytest

from hcrstats import ESI_FIELDS, PairedSeries

# Contingency cells of the three published share-shift tables, exactly
# as printed, plus the 483 variant that reproduces the printed
# 2018-2020 statistic (the source prints 483 for the same count in its
# 2017-2018 table).
CELLS_2016_2017 = ((184, 251), (3082, 3286))
CELLS_2017_2018 = ((251, 483), (3287, 5596))
CELLS_2018_2020_PRINTED = ((482, 636, 769), (5596, 5580, 5620))
CELLS_2018_2020_AS_TESTED = ((483, 636, 769), (5596, 5580, 5620))


def make_generative_pairs(rng, n=84, slope=1.1, intercept=4.2,
                          sd_a=6.06, sd_b=0.0875, m1_high=300.0):
    """Paired counts from the heteroscedastic line model the agreement
    machinery targets: M2 = slope*M1 + intercept + N(0, (sd_a+sd_b*M1)^2),
    clipped at zero so the pair stays a valid count series.

    m1 spans [0, m1_high]; the default matches the range the model's
    coefficients describe, which keeps the noise-to-signal ratio low
    enough for the fitted slope to sit near the generating one."""
    m1 = rng.uniform(0.0, m1_high, n)
    sd = sd_a + sd_b * m1
    m2 = np.clip(slope * m1 + intercept + rng.normal(0.0, sd), 0.0, None)
    return PairedSeries(
        labels=tuple(f"p{i:03d}" for i in range(n)),
        m1=tuple(float(v) for v in m1),
        m2=tuple(float(v) for v in m2),
    )


def make_panel_text(rng, years=(2017, 2018), growth=1.12,
                    cross_field_year=2018):
    """A strict-consistent synthetic panel CSV: integer counts for the
    three regions over all 21 fields, world = their sum, plus a
    cross-field block in cross_field_year."""
    lines = ["year,region,field,count"]
    for year_index, year in enumerate(years):
        bump = growth ** year_index
        for fld in ESI_FIELDS:
            counts = {
                "us": int(rng.integers(2, 60) * bump),
                "chinese-mainland": int(rng.integers(2, 60) * bump),
                "other": int(rng.integers(2, 60) * bump),
            }
            counts["world"] = sum(counts.values())
            for region in ("world", "us", "chinese-mainland", "other"):
                lines.append(f"{year},{region},{fld},{counts[region]}")
    if cross_field_year in years:
        cf = {"us": int(rng.integers(20, 60)),
              "chinese-mainland": int(rng.integers(5, 30)),
              "other": int(rng.integers(20, 60))}
        cf["world"] = sum(cf.values())
        for region in ("world", "us", "chinese-mainland", "other"):
            lines.append(f"{cross_field_year},{region},cross-field,{cf[region]}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def gen_pairs():
    return make_generative_pairs


@pytest.fixture
def panel_text_factory():
    return make_panel_text


@pytest.fixture
def panel_file(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text(make_panel_text(np.random.default_rng(42)),
                    encoding="utf-8")
    return path
