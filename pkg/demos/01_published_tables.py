"""Tour of the bundled published aggregates.

Everything printed here comes from `paper_reference_data()`: the world
totals per year, the three region-by-year shift tables with their
chi-squared tests, the regional shares against their published labels,
and the year-over-year growth summary. No external input is needed.

Run: python3 demos/01_published_tables.py
"""

from hcrstats import (
    AS_TESTED_NOTE,
    chi_squared_test,
    paper_reference_data,
    reference_data_checksum,
)


def show_table(table):
    header = "".join(f"{c:>8}" for c in table.col_labels)
    print(f"    {'':>18}{header}")
    for label, row in zip(table.row_labels, table.rows):
        cells = "".join(f"{v:>8}" for v in row)
        print(f"    {label:>18}{cells}")


def main():
    ref = paper_reference_data()
    print(f"bundled dataset checksum: {reference_data_checksum()[:16]}...\n")

    print("world totals by year and scope:")
    for (year, region, scope), count in sorted(ref.summary.items()):
        if region == "world":
            print(f"    {year} ({scope}): {count}")
    print()

    shifts = [
        ("2016 vs 2017", ref.shift_2016_2017),
        ("2017 vs 2018", ref.shift_2017_2018),
        ("2018-2020 as printed", ref.shift_2018_2020),
        ("2018-2020 as tested", ref.shift_2018_2020_as_tested),
    ]
    print("mainland-versus-rest shift tables and their chi-squared tests:")
    for title, table in shifts:
        res = chi_squared_test(table)
        print(f"  {title}:")
        show_table(table)
        print(f"    statistic {res.statistic:.4f}, df {res.df}, "
              f"p {res.p_value:.4g}\n")
    print(f"  note on the two 2018-2020 variants: {AS_TESTED_NOTE}\n")

    print("regional shares, computed versus published labels:")
    for (year, incl), printed in sorted(ref.printed_share_labels.items()):
        shown = ref.share_breakdown(year, incl).display_pct()
        scope = "all 22 categories" if incl else "21 fields"
        print(f"  {year} ({scope}):")
        for region in sorted(printed):
            match = "=" if shown[region] == printed[region] else "!="
            print(f"    {region:>18}: computed {shown[region]:6.2f} "
                  f"{match} published {printed[region]:6.2f}")
    print()

    growth = ref.growth_summary()
    print("world growth across the methodology change:")
    pct = growth.growth_pct(2017, 2018, include_cross_field=False)
    print(f"    2017 -> 2018, cross-field excluded: +{pct:.2f}%")
    pct = growth.growth_pct(2017, 2018, include_cross_field=True)
    print(f"    2017 -> 2018, cross-field included: +{pct:.2f}% "
          f"(ratio {pct + 100:.0f}%)")


if __name__ == "__main__":
    main()
