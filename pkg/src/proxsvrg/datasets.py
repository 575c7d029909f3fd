"""Sample sets for NN-PCA: LIBSVM text files and seeded synthetic data.

LIBSVM lines look like ``label idx:val idx:val ...`` with 1-based, strictly
ascending indices. Anything after ``#`` is a comment. Rows are densified.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import constants

log = logging.getLogger(__name__)


class LibsvmParseError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class SampleSet:
    rows: np.ndarray
    source: str
    normalized: bool = False
    labels: np.ndarray | None = None
    dropped: int = 0

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


def _parse_line(path, lineno: int, text: str):
    tokens = text.split()
    try:
        label = float(tokens[0])
    except ValueError:
        raise LibsvmParseError(path, lineno, f"bad label {tokens[0]!r}") from None
    entries = []
    prev = 0
    for tok in tokens[1:]:
        idx_s, sep, val_s = tok.partition(":")
        if not sep:
            raise LibsvmParseError(path, lineno, f"expected idx:val, got {tok!r}")
        try:
            idx = int(idx_s)
            val = float(val_s)
        except ValueError:
            raise LibsvmParseError(path, lineno, f"non-numeric entry {tok!r}") from None
        if idx <= prev:
            raise LibsvmParseError(path, lineno, f"index {idx} not ascending (previous {prev})")
        if not np.isfinite(val):
            raise LibsvmParseError(path, lineno, f"non-finite value in {tok!r}")
        entries.append((idx, val))
        prev = idx
    return label, entries


def read_libsvm(path, expected_dim: int | None = None, *, keep_labels: bool = False) -> SampleSet:
    """Read a LIBSVM file into a dense SampleSet.

    ``d`` is ``expected_dim`` if given (indices beyond it are an error),
    otherwise the largest index seen. Labels are dropped unless
    ``keep_labels`` is set.
    """
    path = Path(path)
    parsed = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            parsed.append((lineno, *_parse_line(path, lineno, text)))
    if not parsed:
        raise LibsvmParseError(path, 0, "file contains no samples")
    max_idx = max((e[-1][0] for _, _, e in parsed if e), default=0)
    if expected_dim is not None:
        if expected_dim < 1:
            raise ValueError("expected_dim must be positive")
        for lineno, _, entries in parsed:
            if entries and entries[-1][0] > expected_dim:
                raise LibsvmParseError(path, lineno, f"index {entries[-1][0]} exceeds dimension {expected_dim}")
        d = expected_dim
    else:
        d = max_idx
    if d < 1:
        raise LibsvmParseError(path, parsed[0][0], "no feature entries; dimension is unknown")
    rows = np.zeros((len(parsed), d))
    for r, (_, _, entries) in enumerate(parsed):
        for idx, val in entries:
            rows[r, idx - 1] = val
    labels = np.array([lab for _, lab, _ in parsed]) if keep_labels else None
    return SampleSet(rows=rows, source=str(path), labels=labels)


def write_libsvm(path, samples: SampleSet, labels=None) -> None:
    """Write nonzero entries with ``repr`` floats so a read gives back identical rows."""
    if labels is None:
        labels = samples.labels if samples.labels is not None else np.zeros(samples.n)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for lab, row in zip(labels, samples.rows):
            nz = np.flatnonzero(row)
            parts = [repr(float(lab))] + [f"{j + 1}:{float(row[j])!r}" for j in nz]
            fh.write(" ".join(parts) + "\n")


def normalize_rows(s: SampleSet) -> SampleSet:
    """Scale each nonzero row to unit l2 norm; zero rows are dropped and counted."""
    norms = np.linalg.norm(s.rows, axis=1)
    keep = norms > 0.0
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        log.info("normalize_rows: dropped %d zero rows from %s", dropped, s.source)
    rows = s.rows[keep] / norms[keep, None]
    # second pass removes the last-ulp drift so normalizing is idempotent
    rows = rows / np.linalg.norm(rows, axis=1)[:, None]
    labels = s.labels[keep] if s.labels is not None else None
    return replace(s, rows=rows, normalized=True, labels=labels, dropped=s.dropped + dropped)


def synthetic_samples(n: int, d: int, seed: int) -> SampleSet:
    """n standard-Gaussian rows in R^d from a seeded Philox stream, normalized."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0xDA7A])))
    rows = rng.standard_normal((n, d))
    out = normalize_rows(SampleSet(rows=rows, source=f"synthetic:n={n},d={d},seed={seed}"))
    assert np.allclose(np.linalg.norm(out.rows, axis=1), 1.0, atol=constants.UNIT_NORM_TOL)
    return out
