"""HCR count panel: ingestion, contingency tables, shares, growth, pairing.

The master structure is a panel of nonnegative integer counts keyed by
(year, region, field). Regions are fixed; fields are the 21 ESI fields
plus the "cross-field" category introduced with the 2018 list. Everything
downstream (chi-squared tables, share breakdowns, paired M1/M2 series)
is derived from panels through the pure functions in this module.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import (
    MissingDataError,
    ParseError,
    ValidationError,
)

REGIONS = ("world", "us", "chinese-mainland", "other")

# The 21 ESI fields of the pre-2018 HCR lists, canonical ids:
# lower-case, hyphen-separated, alphabetical.
ESI_FIELDS = (
    "agricultural-sciences",
    "biology-biochemistry",
    "chemistry",
    "clinical-medicine",
    "computer-science",
    "economics-business",
    "engineering",
    "environment-ecology",
    "geosciences",
    "immunology",
    "materials-science",
    "mathematics",
    "microbiology",
    "molecular-biology-genetics",
    "neuroscience-behavior",
    "pharmacology-toxicology",
    "physics",
    "plant-animal-science",
    "psychiatry-psychology",
    "social-sciences",
    "space-science",
)

CROSS_FIELD = "cross-field"

# Full canonical field order: the 21 ESI fields plus cross-field,
# alphabetical across all 22.
CANONICAL_FIELDS = tuple(sorted(ESI_FIELDS + (CROSS_FIELD,)))

CSV_HEADER = ("year", "region", "field", "count")

_INT_RE = re.compile(r"^[+-]?[0-9]+$")


def round_half_up(value: float, decimals: int = 2) -> float:
    """Round with ties away from zero, the convention of the printed
    percentage labels (Python's round() is banker's rounding)."""
    q = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class FieldRegionPanel:
    """Immutable panel of counts keyed by (year, region, field).

    mode is "strict" (a world entry must equal the sum of the three
    regions whenever all three are present for that year and field) or
    "per-source" (values stored as given, matching publications whose
    own tables disagree).
    """

    entries: Mapping[tuple[int, str, str], int]
    mode: str = "strict"

    def __post_init__(self) -> None:
        if self.mode not in ("strict", "per-source"):
            raise ValidationError(f"unknown consistency mode: {self.mode!r}")
        frozen = MappingProxyType(dict(self.entries))
        object.__setattr__(self, "entries", frozen)
        for (year, region, fld), count in frozen.items():
            if region not in REGIONS:
                raise ValidationError(f"unknown region: {region!r}")
            if fld not in CANONICAL_FIELDS:
                raise ValidationError(f"unknown field: {fld!r}")
            if not isinstance(count, int) or isinstance(count, bool) or count < 0:
                raise ValidationError(
                    f"count for ({year}, {region}, {fld}) must be a nonnegative "
                    f"integer, got {count!r}"
                )
        if self.mode == "strict":
            for year, fld, world, total in self._world_mismatches():
                raise ValidationError(
                    f"strict mode: world count {world} for ({year}, {fld}) "
                    f"does not equal us + chinese-mainland + other = {total}"
                )

    def _world_mismatches(self) -> Iterable[tuple[int, str, int, int]]:
        for (year, region, fld), world in self.entries.items():
            if region != "world":
                continue
            parts = [self.entries.get((year, r, fld)) for r in REGIONS[1:]]
            if any(p is None for p in parts):
                continue
            total = sum(parts)
            if total != world:
                yield year, fld, world, total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldRegionPanel):
            return NotImplemented
        return dict(self.entries) == dict(other.entries) and self.mode == other.mode

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.entries.items())), self.mode))

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(sorted({k[0] for k in self.entries}))

    def get(self, year: int, region: str, fld: str) -> int | None:
        return self.entries.get((year, region, fld))

    def fields_present(self, year: int, region: str) -> tuple[str, ...]:
        present = {f for (y, r, f) in self.entries if y == year and r == region}
        return tuple(f for f in CANONICAL_FIELDS if f in present)

    def region_total(self, year: int, region: str,
                     include_cross_field: bool = True) -> int:
        """Sum of the region's field counts for a year; MissingDataError
        when the region has no entries at all for that year."""
        items = [
            (f, c) for (y, r, f), c in self.entries.items()
            if y == year and r == region
        ]
        if not items:
            raise MissingDataError(
                f"no counts for region {region!r} in year {year}"
            )
        return sum(
            c for f, c in items if include_cross_field or f != CROSS_FIELD
        )

    def world_total(self, year: int, include_cross_field: bool = True) -> int:
        """World total for a year: explicit world rows when present,
        otherwise the sum over the three regions (all must have data)."""
        try:
            return self.region_total(year, "world", include_cross_field)
        except MissingDataError:
            pass
        try:
            return sum(
                self.region_total(year, r, include_cross_field)
                for r in REGIONS[1:]
            )
        except MissingDataError:
            raise MissingDataError(
                f"no world total for year {year}: neither world rows nor "
                f"complete us/chinese-mainland/other rows are present"
            ) from None


@dataclass(frozen=True)
class ContingencyTable:
    """r x c table of nonnegative integer counts with axis labels."""

    rows: tuple[tuple[int, ...], ...]
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(c) for c in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))
        r = len(rows)
        c = len(rows[0]) if rows else 0
        if r < 2 or c < 2:
            raise ValidationError(f"contingency table must be at least 2x2, got {r}x{c}")
        if any(len(row) != c for row in rows):
            raise ValidationError("ragged contingency table")
        if len(self.row_labels) != r or len(self.col_labels) != c:
            raise ValidationError("label lengths do not match table shape")
        if any(cell < 0 for row in rows for cell in row):
            raise ValidationError("negative cell in contingency table")
        if sum(sum(row) for row in rows) <= 0:
            raise ValidationError("contingency table has zero grand total")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])


@dataclass(frozen=True)
class ShareBreakdown:
    """Regional share decomposition of one year's HCR total."""

    year: int
    include_cross_field: bool
    counts: Mapping[str, int]
    total: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", MappingProxyType(dict(self.counts)))
        if self.total != sum(self.counts.values()):
            raise ValidationError("share total does not equal the sum of counts")

    @property
    def shares(self) -> dict[str, float]:
        return {r: c / self.total for r, c in self.counts.items()}

    def display_pct(self) -> dict[str, float]:
        """Percentages rounded half-up to two decimals, the convention of
        the published bridge-chart labels."""
        return {
            r: round_half_up(100.0 * c / self.total) for r, c in self.counts.items()
        }


@dataclass(frozen=True)
class GrowthSummary:
    """Year totals and consecutive-year ratios, with and without the
    cross-field category."""

    totals_excluding_cf: Mapping[int, int]
    totals_including_cf: Mapping[int, int]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "totals_excluding_cf",
            MappingProxyType(dict(self.totals_excluding_cf)))
        object.__setattr__(
            self, "totals_including_cf",
            MappingProxyType(dict(self.totals_including_cf)))

    @staticmethod
    def _ratios(totals: Mapping[int, int]) -> dict[tuple[int, int], float]:
        years = sorted(totals)
        out: dict[tuple[int, int], float] = {}
        for a, b in zip(years, years[1:]):
            if totals[a] <= 0:
                raise MissingDataError(f"nonpositive total for year {a}")
            out[(a, b)] = totals[b] / totals[a]
        return out

    @property
    def ratios_excluding_cf(self) -> dict[tuple[int, int], float]:
        return self._ratios(self.totals_excluding_cf)

    @property
    def ratios_including_cf(self) -> dict[tuple[int, int], float]:
        return self._ratios(self.totals_including_cf)

    def growth_pct(self, year_a: int, year_b: int,
                   include_cross_field: bool = False) -> float:
        """Percentage growth of the world total from year_a to year_b."""
        totals = (self.totals_including_cf if include_cross_field
                  else self.totals_excluding_cf)
        if year_a not in totals or year_b not in totals:
            raise MissingDataError(
                f"growth needs totals for {year_a} and {year_b}")
        return 100.0 * (totals[year_b] / totals[year_a] - 1.0)


@dataclass(frozen=True)
class PairedSeries:
    """Aligned M1/M2 measurements: counts per field under the old (M1)
    and new (M2) methodology years."""

    labels: tuple[str, ...]
    m1: tuple[float, ...]
    m2: tuple[float, ...]
    region: str = ""
    year_a: int | None = None
    year_b: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "m1", tuple(float(v) for v in self.m1))
        object.__setattr__(self, "m2", tuple(float(v) for v in self.m2))
        n = len(self.m1)
        if len(self.m2) != n or len(self.labels) != n:
            raise ValidationError("labels, m1 and m2 must have equal length")
        if n < 3:
            raise ValidationError(f"paired series needs n >= 3, got {n}")
        if any(v < 0 for v in self.m1) or any(v < 0 for v in self.m2):
            raise ValidationError("negative values in paired series")

    @property
    def n(self) -> int:
        return len(self.m1)


def concat_paired_series(parts: Sequence[PairedSeries]) -> PairedSeries:
    """Concatenate per-region series into one; labels gain a region prefix."""
    if not parts:
        raise ValidationError("nothing to concatenate")
    labels: list[str] = []
    m1: list[float] = []
    m2: list[float] = []
    for p in parts:
        prefix = f"{p.region}:" if p.region else ""
        labels.extend(prefix + lab for lab in p.labels)
        m1.extend(p.m1)
        m2.extend(p.m2)
    regions = [p.region for p in parts if p.region]
    return PairedSeries(
        labels=tuple(labels), m1=tuple(m1), m2=tuple(m2),
        region="+".join(regions),
        year_a=parts[0].year_a, year_b=parts[0].year_b,
    )


# ---------------------------------------------------------------------------
# CSV ingestion

@dataclass(frozen=True)
class ScanResult:
    """Tolerant scan of a panel CSV: everything parseable, plus every
    violation (1-based line numbers) instead of aborting at the first."""

    entries: Mapping[tuple[int, str, str], int]
    line_of: Mapping[tuple[int, str, str], int]
    violations: tuple[tuple[int, str], ...]
    n_data_rows: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))
        object.__setattr__(self, "line_of", MappingProxyType(dict(self.line_of)))
        object.__setattr__(self, "violations", tuple(self.violations))


def _open_text(source) -> io.TextIOBase:
    if hasattr(source, "read"):
        return source
    return open(source, "r", encoding="utf-8", newline="")


def scan_panel_csv(source) -> ScanResult:
    """Parse a panel CSV collecting all violations; used by both the
    strict loader and the validate command."""
    stream = _open_text(source)
    close = stream is not source
    violations: list[tuple[int, str]] = []
    entries: dict[tuple[int, str, str], int] = {}
    line_of: dict[tuple[int, str, str], int] = {}
    n_data_rows = 0
    try:
        reader = csv.reader(stream)
        header_seen = False
        for lineno, row in enumerate(reader, start=1):
            if not row or not "".join(row).strip():
                continue
            if row[0].lstrip().startswith("#"):
                continue
            cells = [c.strip() for c in row]
            if not header_seen:
                if [c.lower() for c in cells] != list(CSV_HEADER):
                    violations.append((
                        lineno,
                        f"expected header {','.join(CSV_HEADER)!r}, "
                        f"got {','.join(cells)!r}"))
                    return ScanResult(entries, line_of, violations, 0)
                header_seen = True
                continue
            n_data_rows += 1
            if len(cells) != 4:
                violations.append(
                    (lineno, f"expected 4 columns, got {len(cells)}"))
                continue
            year_s, region, fld, count_s = cells
            if not _INT_RE.match(year_s):
                violations.append((lineno, f"year is not an integer: {year_s!r}"))
                continue
            if not _INT_RE.match(count_s):
                violations.append(
                    (lineno, f"count is not a base-10 integer: {count_s!r}"))
                continue
            year = int(year_s)
            count = int(count_s)
            if region not in REGIONS:
                violations.append((lineno, f"unknown region: {region!r}"))
                continue
            if fld not in CANONICAL_FIELDS:
                violations.append((lineno, f"unknown field: {fld!r}"))
                continue
            if count < 0:
                violations.append((lineno, f"negative count: {count}"))
                continue
            key = (year, region, fld)
            if key in entries:
                violations.append((
                    lineno,
                    f"duplicate key {key} (first seen on line {line_of[key]})"))
                continue
            entries[key] = count
            line_of[key] = lineno
        if not header_seen:
            violations.append((0, "empty input: no header row"))
    finally:
        if close:
            stream.close()
    return ScanResult(entries, line_of, violations, n_data_rows)


_PARSE_KINDS = ("expected header", "expected 4 columns", "is not an integer",
                "is not a base-10", "empty input")


def load_panel(source, mode: str = "strict") -> FieldRegionPanel:
    """Load and validate a panel CSV; raises on the first violation.

    Structural problems (bad header, wrong column count, non-integer
    fields) raise ParseError; rule violations (unknown region/field,
    negative count, duplicate key, strict-mode mismatch) raise
    ValidationError. Messages carry 1-based line numbers.
    """
    scan = scan_panel_csv(source)
    if scan.violations:
        lineno, message = scan.violations[0]
        text = f"line {lineno}: {message}"
        if any(kind in message for kind in _PARSE_KINDS):
            raise ParseError(text)
        raise ValidationError(text)
    return FieldRegionPanel(entries=scan.entries, mode=mode)


def serialize_panel(panel: FieldRegionPanel) -> str:
    """Deterministic CSV text; load_panel(serialize_panel(p)) == p."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for (year, region, fld), count in sorted(panel.entries.items()):
        writer.writerow([year, region, fld, count])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Derived summaries

def derive_contingency(panel: FieldRegionPanel, region: str,
                       years: Sequence[int]) -> ContingencyTable:
    """Region-vs-rest-of-world counts across years, the layout of the
    published independence tests."""
    if region not in REGIONS:
        raise ValidationError(f"unknown region: {region!r}")
    if len(years) < 2:
        raise ValidationError("need at least two years for a contingency table")
    top: list[int] = []
    rest: list[int] = []
    for year in years:
        world = panel.world_total(year, include_cross_field=True)
        if region == "world":
            count = world
        else:
            count = panel.region_total(year, region, include_cross_field=True)
        if count > world:
            raise ValidationError(
                f"region count {count} exceeds world total {world} for {year}")
        top.append(count)
        rest.append(world - count)
    return ContingencyTable(
        rows=(tuple(top), tuple(rest)),
        row_labels=(region, "rest-of-world"),
        col_labels=tuple(str(y) for y in years),
    )


def shares(panel: FieldRegionPanel, year: int,
           include_cross_field: bool) -> ShareBreakdown:
    """Per-region share of the year's total across us, chinese-mainland
    and other; cross-field counts enter per the panel's own region
    attribution when included."""
    counts = {
        r: panel.region_total(year, r, include_cross_field)
        for r in ("us", "chinese-mainland", "other")
    }
    total = sum(counts.values())
    if total <= 0:
        raise MissingDataError(f"zero total for year {year}")
    return ShareBreakdown(
        year=year, include_cross_field=include_cross_field,
        counts=counts, total=total,
    )


def growth_summary(panel: FieldRegionPanel) -> GrowthSummary:
    """World totals per year and consecutive-year growth ratios."""
    excl: dict[int, int] = {}
    incl: dict[int, int] = {}
    for year in panel.years:
        try:
            incl[year] = panel.world_total(year, include_cross_field=True)
            excl[year] = panel.world_total(year, include_cross_field=False)
        except MissingDataError:
            continue
    if len(incl) < 2:
        raise MissingDataError(
            "growth summary needs world totals for at least two years")
    return GrowthSummary(totals_excluding_cf=excl, totals_including_cf=incl)


def paired_series(panel: FieldRegionPanel, region: str, year_a: int,
                  year_b: int) -> PairedSeries:
    """Aligned 21-field counts for one region in two years; cross-field
    never participates (it has no counterpart under the old method)."""
    if region not in REGIONS:
        raise ValidationError(f"unknown region: {region!r}")
    missing: list[str] = []
    m1: list[float] = []
    m2: list[float] = []
    for fld in ESI_FIELDS:
        a = panel.get(year_a, region, fld)
        b = panel.get(year_b, region, fld)
        if a is None:
            missing.append(f"({year_a}, {region}, {fld})")
        if b is None:
            missing.append(f"({year_b}, {region}, {fld})")
        if a is not None and b is not None:
            m1.append(a)
            m2.append(b)
    if missing:
        raise MissingDataError(
            "paired series needs all 21 fields in both years; missing: "
            + ", ".join(missing))
    return PairedSeries(
        labels=ESI_FIELDS, m1=tuple(m1), m2=tuple(m2),
        region=region, year_a=year_a, year_b=year_b,
    )
