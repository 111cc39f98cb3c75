"""Benchmark result tables: parsing, validation, aggregation, subsampling.

The canonical input is a long ("tidy") CSV with a header row naming the
columns ``dataset,algorithm,measure`` and optionally ``fold``.  Each row is
one measurement of one algorithm on one data set.  Combinations that never
appear are treated as missing, which is different from a zero measurement:
missing cells simply contribute no matches to the pairwise win counts.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConflictError, InputError, ParseError, SizeError

REQUIRED_COLUMNS = ("dataset", "algorithm", "measure")


@dataclass(frozen=True)
class ResultsTable:
    """Measurements indexed by (dataset, algorithm), with optional folds.

    ``cells`` maps (dataset, algorithm) to the tuple of fold measurements,
    in fold order when a fold column was present.  ``higher_is_better``
    records which direction counts as a win and is global for the table.
    Instances are immutable; every transformation returns a new table.
    """

    algorithms: tuple[str, ...]
    datasets: tuple[str, ...]
    cells: dict[tuple[str, str], tuple[float, ...]]
    higher_is_better: bool = True
    has_folds: bool = False

    def cell(self, dataset: str, algorithm: str) -> tuple[float, ...] | None:
        return self.cells.get((dataset, algorithm))

    def cell_mean(self, dataset: str, algorithm: str) -> float | None:
        values = self.cells.get((dataset, algorithm))
        if values is None:
            return None
        return float(np.mean(values))

    @property
    def n_algorithms(self) -> int:
        return len(self.algorithms)

    @property
    def n_datasets(self) -> int:
        return len(self.datasets)

    def is_complete(self) -> bool:
        """True when every (dataset, algorithm) combination has a cell."""
        return all(
            (d, a) in self.cells for d in self.datasets for a in self.algorithms
        )

    def restrict(
        self,
        datasets: list[str] | None = None,
        algorithms: list[str] | None = None,
    ) -> "ResultsTable":
        """Sub-table keeping only the named datasets/algorithms (given order)."""
        keep_d = tuple(datasets) if datasets is not None else self.datasets
        keep_a = tuple(algorithms) if algorithms is not None else self.algorithms
        unknown = set(keep_d) - set(self.datasets)
        if unknown:
            raise KeyError(f"unknown datasets: {sorted(unknown)}")
        unknown = set(keep_a) - set(self.algorithms)
        if unknown:
            raise KeyError(f"unknown algorithms: {sorted(unknown)}")
        cells = {
            (d, a): v
            for (d, a), v in self.cells.items()
            if d in set(keep_d) and a in set(keep_a)
        }
        return ResultsTable(keep_a, keep_d, cells, self.higher_is_better, self.has_folds)


def parse_results(
    text: str,
    higher_is_better: bool = True,
    delimiter: str = ",",
) -> ResultsTable:
    """Parse long-format delimited content into a validated ResultsTable.

    Rows with the same (dataset, algorithm, fold) key are rejected as
    conflicts.  Fold identifiers only establish alignment order; they are
    sorted numerically when they all look like integers, lexically otherwise.
    """
    lines = text.splitlines()
    if not lines or not any(line.strip() for line in lines):
        raise ParseError("empty input: no header row found")

    header = [h.strip() for h in lines[0].split(delimiter)]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"header is missing required column(s) {missing}", line=1)
    extra = [c for c in header if c not in REQUIRED_COLUMNS + ("fold",)]
    if extra:
        raise ParseError(f"unknown column(s) {extra}", line=1)
    col = {name: header.index(name) for name in header}
    has_fold = "fold" in col
    arity = len(header)

    raw: dict[tuple[str, str], list[tuple[str, float]]] = {}
    algorithms: list[str] = []
    datasets: list[str] = []
    n_rows = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(delimiter)]
        if len(parts) != arity:
            raise ParseError(
                f"expected {arity} fields, got {len(parts)}", line=lineno
            )
        dataset = parts[col["dataset"]]
        algorithm = parts[col["algorithm"]]
        if not dataset or not algorithm:
            raise ParseError("empty dataset or algorithm name", line=lineno)
        try:
            measure = float(parts[col["measure"]])
        except ValueError:
            raise ParseError(
                f"non-numeric measure {parts[col['measure']]!r}", line=lineno
            ) from None
        if not math.isfinite(measure):
            raise ParseError(f"non-finite measure {measure!r}", line=lineno)
        fold = parts[col["fold"]] if has_fold else ""

        key = (dataset, algorithm)
        bucket = raw.setdefault(key, [])
        if any(f == fold for f, _ in bucket):
            label = f"fold {fold!r} of " if has_fold else ""
            raise ConflictError(
                f"duplicate measurement for {label}({dataset}, {algorithm})",
                line=lineno,
            )
        bucket.append((fold, measure))
        if algorithm not in algorithms:
            algorithms.append(algorithm)
        if dataset not in datasets:
            datasets.append(dataset)
        n_rows += 1

    if n_rows == 0:
        raise ParseError("empty input: header but no data rows")

    cells: dict[tuple[str, str], tuple[float, ...]] = {}
    for key, bucket in raw.items():
        if has_fold and all(f.lstrip("-").isdigit() for f, _ in bucket):
            bucket.sort(key=lambda fv: int(fv[0]))
        else:
            bucket.sort(key=lambda fv: fv[0])
        cells[key] = tuple(v for _, v in bucket)

    table = ResultsTable(
        tuple(algorithms), tuple(datasets), cells, higher_is_better, has_fold
    )
    _validate_fold_counts(table)
    return table


def _validate_fold_counts(table: ResultsTable) -> None:
    for dataset in table.datasets:
        counts = {
            len(v)
            for (d, _), v in table.cells.items()
            if d == dataset
        }
        if len(counts) > 1:
            raise ParseError(
                f"dataset {dataset!r} mixes fold counts {sorted(counts)}; "
                "every algorithm measured on a data set needs the same folds"
            )


def load_results(path, higher_is_better: bool = True, delimiter: str = ",") -> ResultsTable:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return parse_results(text, higher_is_better=higher_is_better, delimiter=delimiter)


def serialize_results(table: ResultsTable) -> str:
    """Long-format CSV round-trip of a table, full float precision."""
    out = io.StringIO()
    if table.has_folds:
        out.write("dataset,algorithm,fold,measure\n")
        for d in table.datasets:
            for a in table.algorithms:
                values = table.cells.get((d, a))
                if values is None:
                    continue
                for k, v in enumerate(values, start=1):
                    out.write(f"{d},{a},{k},{v!r}\n")
    else:
        out.write("dataset,algorithm,measure\n")
        for d in table.datasets:
            for a in table.algorithms:
                values = table.cells.get((d, a))
                if values is None:
                    continue
                for v in values:
                    out.write(f"{d},{a},{v!r}\n")
    return out.getvalue()


def wide_to_long(text: str, delimiter: str = ",") -> str:
    """Convert a wide table (first column = dataset, one column per
    algorithm) into the canonical long CSV.  Empty cells become missing
    combinations.  A convenience for the CLI, not a core representation.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty input: no header row found")
    header = [h.strip() for h in lines[0].split(delimiter)]
    if len(header) < 2:
        raise ParseError("wide input needs a dataset column plus algorithms", line=1)
    algorithms = header[1:]
    out = ["dataset,algorithm,measure"]
    for lineno, line in enumerate(lines[1:], start=2):
        parts = [p.strip() for p in line.split(delimiter)]
        if len(parts) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, got {len(parts)}", line=lineno
            )
        dataset = parts[0]
        for alg, value in zip(algorithms, parts[1:]):
            if value == "":
                continue
            out.append(f"{dataset},{alg},{value}")
    return "\n".join(out) + "\n"


def aggregate_folds(table: ResultsTable) -> ResultsTable:
    """Replace each cell by its mean measurement, dropping fold structure.

    Idempotent: aggregating an already aggregated table changes nothing.
    """
    cells = {
        key: (float(np.mean(values)),) for key, values in table.cells.items()
    }
    return ResultsTable(
        table.algorithms, table.datasets, cells, table.higher_is_better, False
    )


def subsample(
    table: ResultsTable,
    n_algorithms: int,
    n_datasets: int,
    seed: int,
    n_held_out: int = 0,
) -> tuple[ResultsTable, ResultsTable]:
    """Seed-deterministic random (train, held-out) split of a table.

    Picks ``n_algorithms`` algorithms and two disjoint data set samples:
    ``n_datasets`` for the train table and ``n_held_out`` for the held-out
    table.  Both outputs share the algorithm subset.
    """
    if n_algorithms > table.n_algorithms:
        raise SizeError(
            f"requested {n_algorithms} algorithms, table has {table.n_algorithms}"
        )
    if n_datasets + n_held_out > table.n_datasets:
        raise SizeError(
            f"requested {n_datasets} train + {n_held_out} held-out data sets, "
            f"table has {table.n_datasets}"
        )
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    alg_idx = np.sort(rng.choice(table.n_algorithms, size=n_algorithms, replace=False))
    ds_idx = rng.choice(table.n_datasets, size=n_datasets + n_held_out, replace=False)
    train_idx = np.sort(ds_idx[:n_datasets])
    held_idx = np.sort(ds_idx[n_datasets:])

    algorithms = [table.algorithms[i] for i in alg_idx]
    train = table.restrict([table.datasets[i] for i in train_idx], algorithms)
    held = table.restrict([table.datasets[i] for i in held_idx], algorithms)
    return train, held
