"""Readers for the versioned result CSVs written by the mbal-clo CLI.

The CSV files are the only interface to the solver package: a leading
`# mbal-clo v1` schema line, optional `# key=value ...` metadata comments,
then a plain CSV table. This module validates the schema line and the
column set, and converts the three table shapes (run, compare, psi) into
typed records. It never writes to the files it reads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_LINE = "# mbal-clo v1"
RUN_COLUMNS = ["trial", "t", "n_labels", "excess_spo_risk", "surrogate_risk", "b_t", "labeled_flag"]
COMPARE_COLUMNS = ["problem", "surrogate", "label_budget", "ratio", "ci_lo", "ci_hi", "trials"]
PSI_COLUMNS = ["b", "psi_hat"]


def read_versioned_csv(path: Path, expected_columns: list[str]) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse a schema-versioned CSV into (comment metadata, row dicts).

    Raises ValueError naming the offending columns when the header does not
    match the expected schema exactly.
    """
    meta: dict[str, str] = {}
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise ValueError(f"{path}: expected schema line {SCHEMA_LINE!r}, got {first!r}")
        pos = fh.tell()
        while True:
            line = fh.readline()
            if not line.startswith("#"):
                fh.seek(pos)
                break
            pos = fh.tell()
            for token in line[1:].split():
                if "=" in token:
                    key, _, val = token.partition("=")
                    meta[key] = val
        reader = csv.DictReader(fh)
        found = list(reader.fieldnames or [])
        if found != expected_columns:
            missing = sorted(set(expected_columns) - set(found))
            extra = sorted(set(found) - set(expected_columns))
            parts = []
            if missing:
                parts.append(f"missing {missing}")
            if extra:
                parts.append(f"unexpected {extra}")
            if not parts:
                parts.append(f"misordered {found}")
            raise ValueError(f"{path}: column mismatch, " + ", ".join(parts))
        return meta, list(reader)


@dataclass(frozen=True)
class RunData:
    """One run CSV: per-step records for every trial of one algorithm."""

    path: Path
    meta: dict[str, str] = field(repr=False)
    trial: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)
    n_labels: np.ndarray = field(repr=False)
    excess_spo_risk: np.ndarray = field(repr=False)
    labeled: np.ndarray = field(repr=False)

    @property
    def algo(self) -> str:
        return self.meta.get("algo", "?")

    @property
    def surrogate(self) -> str:
        return self.meta.get("surrogate", "?")

    @property
    def problem(self) -> str:
        return self.meta.get("problem", "?")

    @property
    def n0(self) -> int:
        return int(self.meta["n0"])

    @property
    def q_tilde(self) -> float:
        return float(self.meta["q_tilde"])

    @property
    def trials(self) -> list[int]:
        return sorted(set(self.trial.tolist()))


def load_run_csv(path: Path) -> RunData:
    meta, rows = read_versioned_csv(path, RUN_COLUMNS)
    for key in ("problem", "algo", "surrogate", "n0", "q_tilde"):
        if key not in meta:
            raise ValueError(f"{path}: missing {key}= in metadata comment")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return RunData(
        path=path,
        meta=meta,
        trial=np.array([int(r["trial"]) for r in rows]),
        t=np.array([int(r["t"]) for r in rows]),
        n_labels=np.array([int(r["n_labels"]) for r in rows]),
        excess_spo_risk=np.array([float(r["excess_spo_risk"]) for r in rows]),
        labeled=np.array([bool(int(r["labeled_flag"])) for r in rows]),
    )


@dataclass(frozen=True)
class CompareRow:
    """One supervised-over-active ratio with its bootstrap interval."""

    problem: str
    surrogate: str
    label_budget: int
    ratio: float
    ci_lo: float
    ci_hi: float
    trials: int


def load_compare_csv(path: Path) -> list[CompareRow]:
    _, rows = read_versioned_csv(path, COMPARE_COLUMNS)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return [
        CompareRow(
            problem=r["problem"],
            surrogate=r["surrogate"],
            label_budget=int(r["label_budget"]),
            ratio=float(r["ratio"]),
            ci_lo=float(r["ci_lo"]),
            ci_hi=float(r["ci_hi"]),
            trials=int(r["trials"]),
        )
        for r in rows
    ]


@dataclass(frozen=True)
class PsiData:
    """One near-degeneracy profile: fraction of draws within each margin b."""

    path: Path
    meta: dict[str, str] = field(repr=False)
    b: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)

    @property
    def kappa_hat(self) -> float:
        return float(self.meta.get("kappa_hat", "nan"))

    @property
    def problem(self) -> str:
        return self.meta.get("problem", "?")


def load_psi_csv(path: Path) -> PsiData:
    meta, rows = read_versioned_csv(path, PSI_COLUMNS)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    b = np.array([float(r["b"]) for r in rows])
    psi = np.array([float(r["psi_hat"]) for r in rows])
    if np.any(np.diff(b) < 0):
        raise ValueError(f"{path}: b column must be ascending")
    if np.any((psi < 0) | (psi > 1)) or not math.isfinite(float(psi.sum())):
        raise ValueError(f"{path}: psi_hat values must lie in [0, 1]")
    return PsiData(path=path, meta=meta, b=b, psi=psi)
