"""Report assembly and rendering (markdown, CSV, JSON).

Every command builds one plain dict first; all renderers read from that
dict, so the JSON output always contains every number a markdown or CSV
rendering can show.  JSON is serialized with sorted keys and no NaN, which
makes byte-identical reruns possible for fixed seeds.
"""

from __future__ import annotations

import json
import math

FORMATS = ("markdown", "csv", "json")


def _sanitize(obj):
    """Replace non-finite floats with None so JSON stays strict."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def to_json(report: dict) -> str:
    return json.dumps(_sanitize(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(value, digits=2):
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if not math.isfinite(value):
            return "-"
        return f"{value:.{digits}f}"
    return str(value)


def md_table(headers: list[str], rows: list[list[str]]) -> str:
    lines = [
        "| " + " | ".join(headers) + " |",
        "|" + "|".join("---" for _ in headers) + "|",
    ]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines)


def csv_table(headers: list[str], rows: list[list[str]]) -> str:
    out = [",".join(headers)]
    for row in rows:
        out.append(",".join(row))
    return "\n".join(out) + "\n"


# --- per-section tables ------------------------------------------------------


def _summary_rows(summary: dict, digits=2):
    headers = ["pair", "mean", "low", "high", "delta", "above.50", "in.rope"]
    rows = [
        [
            f"{r['first']} > {r['second']}",
            _fmt(r["mean"], digits),
            _fmt(r["hdi_low"], digits),
            _fmt(r["hdi_high"], digits),
            _fmt(r["delta"], digits),
            _fmt(r["above_50"], digits),
            _fmt(r["in_rope"], digits),
        ]
        for r in summary["rows"]
    ]
    return headers, rows


def _convergence_rows(conv: dict):
    headers = ["parameter", "rhat", "ess"]
    names = sorted(conv["ess"])
    rows = [
        [n, _fmt(conv["rhat"].get(n), 4), _fmt(conv["ess"][n], 0)]
        for n in names
    ]
    return headers, rows


def _ppc_rows(ppc: dict):
    has_ties = any("ties" in r for r in ppc["rows"])
    headers = ["hdi", "proportion"] + (["ties"] if has_ties else [])
    rows = []
    for r in ppc["rows"]:
        row = [_fmt(r["hdi"], 2), _fmt(r["proportion"], 2)]
        if has_ties:
            row.append(_fmt(r.get("ties"), 2))
        rows.append(row)
    return headers, rows


def _freq_pair_rows(freq: dict):
    headers = ["first", "second", "statistic", "adjusted p", "significant"]
    rows = [
        [
            p["first"],
            p["second"],
            _fmt(p["statistic"], 4),
            _fmt(p["adjusted_p"], 4),
            _fmt(p["significant"]),
        ]
        for p in freq["pairs"]
    ]
    return headers, rows


# --- full renderings ---------------------------------------------------------


def render_markdown(report: dict) -> str:
    command = report["command"]
    parts = [f"# {command} report", ""]
    if "warnings" in report and report["warnings"]:
        parts += ["**Warnings:**"] + [f"- {w}" for w in report["warnings"]] + [""]

    if "summary" in report:
        s = report["summary"]
        parts += [
            "Ranking (best to worst): " + ", ".join(s["ranking"]),
            "",
            md_table(*_summary_rows(s)),
            "",
            f"HDI mass {s['hdi_mass']}, ROPE [{s['rope']['low']}, {s['rope']['high']}].",
            "",
        ]
        if s["notes"]:
            parts += ["Notes:"] + [f"- {n}" for n in s["notes"]] + [""]

    if "convergence" in report:
        c = report["convergence"]
        verdict = "pass" if c["passed"] else "FAIL"
        parts += [
            f"## Convergence: {verdict}",
            "",
            md_table(*_convergence_rows(c)),
            "",
            f"Divergent transitions: {c['divergences']}.",
            "",
        ]
        if c["issues"]:
            parts += ["Issues:"] + [f"- {i}" for i in c["issues"]] + [""]

    if "ppc" in report:
        parts += ["## Posterior predictive coverage", "", md_table(*_ppc_rows(report["ppc"])), ""]

    if "waic" in report:
        w = report["waic"]
        parts += [
            "## WAIC",
            "",
            md_table(
                ["waic", "lppd", "p_waic", "units"],
                [[_fmt(w["waic"]), _fmt(w["lppd"]), _fmt(w["p_waic"]), str(w["n_units"])]],
            ),
            "",
        ]

    if "mle" in report:
        m = report["mle"]
        parts += [
            "## Maximum-likelihood weights",
            "",
            md_table(
                ["algorithm", "weight"],
                [[a, _fmt(wt, 4)] for a, wt in m["weights"].items()],
            ),
            "",
            f"Converged: {m['converged']} after {m['iterations']} sweeps; "
            f"log likelihood {_fmt(m['log_likelihood'], 4)}.",
            "",
        ]
        if "pair_probabilities" in report:
            parts += [
                "",
                md_table(
                    ["pair", "probability"],
                    [
                        [f"{p['first']} > {p['second']}", _fmt(p["probability"])]
                        for p in report["pair_probabilities"]
                    ],
                ),
                "",
            ]

    for key in ("demsar", "wilcoxon"):
        if key in report:
            f = report[key]
            parts += [f"## {f['procedure']}", ""]
            if not math.isnan(f["statistic"] if f["statistic"] is not None else math.nan):
                parts += [
                    f"Omnibus statistic {_fmt(f['statistic'], 4)}, "
                    f"p-value {_fmt(f['p_value'], 6)}.",
                ]
            if f.get("critical_difference") is not None:
                parts += [f"Critical difference {_fmt(f['critical_difference'], 4)}."]
            parts += [
                "Ordering (best to worst): " + ", ".join(f["ordering"]),
                "",
                md_table(*_freq_pair_rows(f)),
                "",
            ]
            if f["notes"]:
                parts += ["Notes:"] + [f"- {n}" for n in f["notes"]] + [""]

    if "strong" in report:
        s = report["strong"]
        parts += [
            "## Strong calibration",
            "",
            md_table(
                ["within.50", "within.70", "within.90", "above90", "below90", "err", "mad"],
                [[
                    _fmt(s["within_50"]), _fmt(s["within_70"]), _fmt(s["within_90"]),
                    _fmt(s["above90"]), _fmt(s["below90"]),
                    _fmt(s["err"], 3), _fmt(s["mad"], 3),
                ]],
            ),
            "",
            f"Pairs scored: {s['n_pairs']}; skipped (no signal): {s['n_skipped']}.",
            "",
        ]
    if "weak" in report:
        w = report["weak"]
        rows = [
            [f"{lo:.1f}-{hi:.1f}", _fmt(p, 1), str(r), str(n)]
            for (lo, hi), p, r, n in zip(w["bins"], w["predicted"], w["real"], w["n_pairs"])
        ]
        parts += [
            "## Weak calibration",
            "",
            md_table(["bin", "predicted", "real", "pairs"], rows),
            "",
        ]

    return "\n".join(parts).rstrip() + "\n"


def render_csv(report: dict) -> str:
    """CSV for the command's primary table(s); multi-table reports stack
    blocks separated by blank lines."""
    blocks = []
    if "summary" in report:
        headers = [
            "first", "second", "mean", "median", "hdi_low", "hdi_high",
            "delta", "above_50", "in_rope", "range_low", "range_high",
        ]
        rows = [
            [repr(r[k]) if isinstance(r[k], float) else str(r[k]) for k in headers]
            for r in report["summary"]["rows"]
        ]
        blocks.append(csv_table(headers, rows))
    if "convergence" in report:
        blocks.append(csv_table(*_convergence_rows(report["convergence"])))
    if "ppc" in report:
        blocks.append(csv_table(*_ppc_rows(report["ppc"])))
    if "waic" in report:
        w = report["waic"]
        blocks.append(
            csv_table(
                ["waic", "lppd", "p_waic", "units"],
                [[repr(w["waic"]), repr(w["lppd"]), repr(w["p_waic"]), str(w["n_units"])]],
            )
        )
    if "mle" in report:
        blocks.append(
            csv_table(
                ["algorithm", "weight"],
                [[a, repr(v)] for a, v in report["mle"]["weights"].items()],
            )
        )
        if "pair_probabilities" in report:
            blocks.append(
                csv_table(
                    ["first", "second", "probability"],
                    [
                        [p["first"], p["second"], repr(p["probability"])]
                        for p in report["pair_probabilities"]
                    ],
                )
            )
    for key in ("demsar", "wilcoxon"):
        if key in report:
            blocks.append(csv_table(*_freq_pair_rows(report[key])))
    if "strong" in report:
        s = report["strong"]
        keys = ["within_50", "within_70", "within_90", "above90", "below90", "err", "mad", "n_pairs", "n_skipped"]
        blocks.append(csv_table(keys, [[str(s[k]) for k in keys]]))
    if "weak" in report:
        w = report["weak"]
        rows = [
            [f"{lo}-{hi}", repr(p), str(r), str(n)]
            for (lo, hi), p, r, n in zip(w["bins"], w["predicted"], w["real"], w["n_pairs"])
        ]
        blocks.append(csv_table(["bin", "predicted", "real", "n_pairs"], rows))
    return "\n".join(blocks)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "markdown":
        return render_markdown(report)
    if fmt == "csv":
        return render_csv(report)
    raise ValueError(f"unknown format {fmt!r}; valid: {FORMATS}")
