"""Result rows and the experiment CSV format.

The CSV has a fixed header; accuracies print with four decimals and a
trailing comment block summarizes mean and standard deviation per method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IoError, ParseError

CSV_HEADER = ("run_id,dataset,method,strategy,seed,depth,labels_per_class,"
              "epochs_used,val_accuracy,test_accuracy,wall_ms")


@dataclass(frozen=True)
class ResultsRow:
    run_id: str
    dataset: str
    method: str
    strategy: str
    seed: int
    depth: int | None
    labels_per_class: int | None
    epochs_used: int
    val_accuracy: float
    test_accuracy: float
    wall_ms: float


def _opt(v) -> str:
    return "" if v is None else str(v)


def row_to_csv(row: ResultsRow) -> str:
    return ",".join([
        row.run_id,
        row.dataset,
        row.method,
        row.strategy,
        str(row.seed),
        _opt(row.depth),
        _opt(row.labels_per_class),
        str(row.epochs_used),
        f"{row.val_accuracy:.4f}",
        f"{row.test_accuracy:.4f}",
        f"{row.wall_ms:.1f}",
    ])


def write_results(rows: list[ResultsRow], path: str) -> None:
    """Write rows plus a per-method mean/std summary as trailing comments."""
    if not rows:
        raise IoError("refusing to write an empty results file")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in rows:
                fh.write(row_to_csv(row) + "\n")
            methods = []
            for row in rows:
                key = (row.method, row.strategy)
                if key not in methods:
                    methods.append(key)
            for method, strategy in methods:
                accs = [r.test_accuracy for r in rows
                        if (r.method, r.strategy) == (method, strategy)]
                tag = f"{method}/{strategy}" if strategy else method
                fh.write(f"# summary {tag}: mean={np.mean(accs):.4f} "
                         f"std={np.std(accs):.4f} n={len(accs)}\n")
    except OSError as exc:
        raise IoError(str(exc)) from None


def read_results(path: str) -> list[ResultsRow]:
    """Parse a results CSV back into rows; comment lines are skipped."""
    rows = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise IoError(str(exc)) from None
    with fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ParseError(f"{path}:1: unexpected header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 11:
                raise ParseError(f"{path}:{lineno}: expected 11 fields")
            rows.append(ResultsRow(
                run_id=parts[0], dataset=parts[1], method=parts[2],
                strategy=parts[3], seed=int(parts[4]),
                depth=int(parts[5]) if parts[5] else None,
                labels_per_class=int(parts[6]) if parts[6] else None,
                epochs_used=int(parts[7]),
                val_accuracy=float(parts[8]),
                test_accuracy=float(parts[9]),
                wall_ms=float(parts[10]),
            ))
    return rows


def result_rows(result, dataset: str, depth: int | None = None,
                labels_per_class: int | None = None) -> list[ResultsRow]:
    """Flatten an ExperimentResult into one CSV row per seed."""
    tag = result.strategy or result.method
    rows = []
    for i, seed in enumerate(result.seeds):
        suffix = []
        if depth is not None:
            suffix.append(f"d{depth}")
        if labels_per_class is not None:
            suffix.append(f"b{labels_per_class}")
        run_id = "-".join([result.config_fingerprint[:8], tag, *suffix,
                           f"s{seed}"])
        rows.append(ResultsRow(
            run_id=run_id,
            dataset=dataset,
            method=result.method,
            strategy=result.strategy or "",
            seed=seed,
            depth=depth,
            labels_per_class=labels_per_class,
            epochs_used=result.epochs_used[i],
            val_accuracy=result.val_accuracies[i],
            test_accuracy=result.test_accuracies[i],
            wall_ms=result.wall_ms,
        ))
    return rows
