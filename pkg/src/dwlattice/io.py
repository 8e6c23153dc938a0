"""Plain-text outputs: observable series, spectra, potentials and kick logs.

All tables are comma-separated with a ``#``-prefixed comment header.
Numbers use 12 significant digits so that identical runs give identical bytes.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .decoherence import KickEvent
from .ensemble import ObservableSeries
from .spectral import BlochSpectrum, tail_mass


def fmt(v: float) -> str:
    return f"{float(v):.12g}"


def _write(path, comments: Iterable[str], header: str, rows: Iterable[Sequence[float]]) -> Path:
    path = Path(path)
    lines = [f"# {c}" if c else "#" for c in comments]
    lines.append(header)
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        # newline="\n" keeps bytes identical across platforms.
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {os.fspath(path)}: {exc.strerror or exc}") from exc
    return path


def write_series(series: ObservableSeries, destination, comments: Iterable[str] = (), with_errors: bool = True) -> Path:
    cols = series.columns(with_errors)
    header = ",".join(cols)
    rows = zip(*cols.values())
    return _write(destination, comments, header, rows)


def read_table(path) -> tuple[list[str], dict[str, np.ndarray]]:
    """Read any table written here; returns (comment lines, columns)."""
    comments, header, rows = [], None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                comments.append(line[2:] if line.startswith("# ") else line[1:])
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return comments, {name: data[:, i] for i, name in enumerate(header)}


def write_spectrum(spec: BlochSpectrum, destination, comments: Iterable[str] = (), n_levels: Optional[int] = None) -> Path:
    """``level,energy_er,tail_mass`` rows; tail mass is the weight on |n| > n_max/2."""
    n = len(spec) if n_levels is None else min(n_levels, len(spec))
    rows = ((l, spec[l].energy, tail_mass(spec[l])) for l in range(n))
    return _write(destination, comments, "level,energy_er,tail_mass", rows)


def write_potential(x: np.ndarray, v: np.ndarray, destination, comments: Iterable[str] = ()) -> Path:
    return _write(destination, comments, "x_over_lambda,v_over_er", zip(x, v))


def write_kick_log(kicks: Sequence[Sequence[KickEvent]], destination, comments: Iterable[str] = ()) -> Path:
    """``trajectory,time,theta,phi`` rows, one per kick event."""
    rows = ((k, ev.time, ev.theta, ev.phi) for k, events in enumerate(kicks) for ev in events)
    return _write(destination, comments, "trajectory,time,theta,phi", rows)
