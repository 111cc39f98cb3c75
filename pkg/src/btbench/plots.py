"""Static SVG figures: the probability forest plot and the rank diagram.

Hand-assembled SVG keeps outputs free of toolkit version churn, so the same
inputs always serialize to the same bytes.
"""

from __future__ import annotations

from .freq import FreqReport
from .summary import ComparisonSummary

_FONT = "font-family='Helvetica, Arial, sans-serif'"


def _svg(width: int, height: int, body: list[str]) -> str:
    head = (
        f"<svg xmlns='http://www.w3.org/2000/svg' width='{width}' "
        f"height='{height}' viewBox='0 0 {width} {height}'>"
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def forest_plot_svg(summary: ComparisonSummary, width: int = 640) -> str:
    """One row per pair: dot = median, thick bar = HDI, thin bar = full
    range, vertical lines marking the equivalence region and 0.5."""
    rows = summary.rows
    row_h = 26
    top, bottom, left, right = 40, 40, 150, 20
    height = top + bottom + row_h * len(rows)
    plot_w = width - left - right

    def x(p: float) -> float:
        return left + p * plot_w

    body = []
    axis_y = height - bottom + 10
    body.append(
        f"<line x1='{left}' y1='{axis_y}' x2='{left + plot_w}' y2='{axis_y}' "
        "stroke='black' stroke-width='1'/>"
    )
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        tx = x(tick)
        body.append(
            f"<line x1='{tx:.1f}' y1='{axis_y}' x2='{tx:.1f}' y2='{axis_y + 5}' "
            "stroke='black' stroke-width='1'/>"
        )
        body.append(
            f"<text x='{tx:.1f}' y='{axis_y + 18}' text-anchor='middle' "
            f"font-size='11' {_FONT}>{tick:g}</text>"
        )
    # equivalence region bounds and the even-odds line
    for bound in (summary.rope.low, summary.rope.high):
        bx = x(bound)
        body.append(
            f"<line x1='{bx:.1f}' y1='{top - 10}' x2='{bx:.1f}' y2='{axis_y}' "
            "stroke='grey' stroke-width='1' stroke-dasharray='4,3'/>"
        )
    mx = x(0.5)
    body.append(
        f"<line x1='{mx:.1f}' y1='{top - 10}' x2='{mx:.1f}' y2='{axis_y}' "
        "stroke='lightgrey' stroke-width='1'/>"
    )
    for k, row in enumerate(rows):
        cy = top + row_h * k + row_h / 2
        body.append(
            f"<text x='{left - 8}' y='{cy + 4:.1f}' text-anchor='end' "
            f"font-size='12' {_FONT}>{row.first} &gt; {row.second}</text>"
        )
        body.append(
            f"<line x1='{x(row.range_low):.1f}' y1='{cy:.1f}' "
            f"x2='{x(row.range_high):.1f}' y2='{cy:.1f}' "
            "stroke='black' stroke-width='1'/>"
        )
        body.append(
            f"<line x1='{x(row.hdi_low):.1f}' y1='{cy:.1f}' "
            f"x2='{x(row.hdi_high):.1f}' y2='{cy:.1f}' "
            "stroke='black' stroke-width='4'/>"
        )
        body.append(
            f"<circle cx='{x(row.median):.1f}' cy='{cy:.1f}' r='4' fill='black'/>"
        )
    body.append(
        f"<text x='{left + plot_w / 2:.1f}' y='{height - 4}' text-anchor='middle' "
        f"font-size='12' {_FONT}>P(first is better)</text>"
    )
    return _svg(width, height, body)


def cd_diagram_svg(freq: FreqReport, width: int = 640) -> str:
    """Mean-rank axis with algorithms at their ranks and a critical
    difference ruler; bars join groups the post hoc cannot separate."""
    if freq.mean_ranks is None:
        raise ValueError("report carries no mean ranks; run the mean-rank procedure")
    names = list(freq.ordering)
    ranks = [freq.mean_ranks[n] for n in names]
    k = len(names)
    left, right, top = 60, 60, 70
    axis_w = width - left - right
    lo, hi = 1.0, float(k)

    def x(rank: float) -> float:
        return left + (rank - lo) / max(hi - lo, 1e-9) * axis_w

    body = []
    axis_y = top
    body.append(
        f"<line x1='{left}' y1='{axis_y}' x2='{left + axis_w}' y2='{axis_y}' "
        "stroke='black' stroke-width='1'/>"
    )
    for t in range(1, k + 1):
        tx = x(t)
        body.append(
            f"<line x1='{tx:.1f}' y1='{axis_y - 5}' x2='{tx:.1f}' y2='{axis_y}' "
            "stroke='black' stroke-width='1'/>"
        )
        body.append(
            f"<text x='{tx:.1f}' y='{axis_y - 10}' text-anchor='middle' "
            f"font-size='11' {_FONT}>{t}</text>"
        )
    if freq.critical_difference is not None:
        cd_px = freq.critical_difference / max(hi - lo, 1e-9) * axis_w
        body.append(
            f"<line x1='{left}' y1='25' x2='{left + cd_px:.1f}' y2='25' "
            "stroke='black' stroke-width='2'/>"
        )
        body.append(
            f"<text x='{left + cd_px / 2:.1f}' y='18' text-anchor='middle' "
            f"font-size='11' {_FONT}>CD = {freq.critical_difference:.3f}</text>"
        )

    # name stems, alternating above left / below right like the usual layout
    label_y = axis_y + 30
    for idx, (name, rank) in enumerate(zip(names, ranks)):
        nx = x(rank)
        ny = label_y + 16 * idx
        body.append(
            f"<line x1='{nx:.1f}' y1='{axis_y}' x2='{nx:.1f}' y2='{ny - 10:.1f}' "
            "stroke='grey' stroke-width='1'/>"
        )
        body.append(
            f"<text x='{nx + 4:.1f}' y='{ny - 6:.1f}' font-size='12' {_FONT}>"
            f"{name} ({rank:.2f})</text>"
        )

    # bars under the axis joining statistically indistinguishable runs
    if freq.critical_difference is not None:
        bar_y = axis_y + 8
        drawn: list[tuple[int, int]] = []
        for i in range(k):
            j = i
            while j + 1 < k and ranks[j + 1] - ranks[i] <= freq.critical_difference:
                j += 1
            if j > i and not any(a <= i and j <= b for a, b in drawn):
                body.append(
                    f"<line x1='{x(ranks[i]) - 3:.1f}' y1='{bar_y}' "
                    f"x2='{x(ranks[j]) + 3:.1f}' y2='{bar_y}' "
                    "stroke='black' stroke-width='3'/>"
                )
                drawn.append((i, j))
                bar_y += 6
    height = int(label_y + 16 * k + 20)
    return _svg(width, height, body)
