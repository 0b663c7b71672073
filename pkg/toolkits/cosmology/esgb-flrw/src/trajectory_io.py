#!/usr/bin/env python3
"""
Trajectory and Region CSV Formats

Trajectory CSV: header t,a,H,phi,phidot,constraint,power,denominator, one row
per accepted sample, backward and forward halves stitched in increasing t with
the launch row once. constraint and power hold the normalized residuals.

Region CSV: header alpha,beta,kappa,in_A,reason.

Floats are written with 17 significant digits and read back with pandas'
round-trip parser, so values survive a write/read cycle bit for bit.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import pandas as pd

from errors import MalformedCSV
from integrator import TRAJECTORY_COLUMNS, Trajectory

logger = logging.getLogger(__name__)

REGION_COLUMNS = ("alpha", "beta", "kappa", "in_A", "reason")
FLOAT_FORMAT = "%.17g"
PathLike = Union[str, Path]


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """One trajectory as a frame in sample order."""
    return pd.DataFrame({name: traj.column(name) for name in TRAJECTORY_COLUMNS})


def stitch(backward: Optional[Trajectory], forward: Optional[Trajectory]) -> pd.DataFrame:
    """Join the two halves of a run in increasing t, keeping a single launch row."""
    frames = []
    if backward is not None:
        frames.append(trajectory_frame(backward).iloc[::-1])
    if forward is not None:
        frame = trajectory_frame(forward)
        frames.append(frame.iloc[1:] if backward is not None else frame)
    if not frames:
        raise ValueError("stitch needs at least one trajectory")
    return pd.concat(frames, ignore_index=True)


def write_trajectory_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.loc[:, list(TRAJECTORY_COLUMNS)].to_csv(path, index=False, float_format=FLOAT_FORMAT,
                                                 lineterminator="\n")
    logger.info(f"Wrote {len(frame)} samples to {path}")
    return path


def _read(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise MalformedCSV(f"{path}: {exc}") from exc


def read_trajectory_csv(path: PathLike) -> pd.DataFrame:
    """
    Read a trajectory CSV and validate its layout.

    Raises:
        MalformedCSV: wrong header, non-numeric cells or t not strictly increasing
    """
    frame = _read(path)
    if tuple(frame.columns) != TRAJECTORY_COLUMNS:
        raise MalformedCSV(f"{path}: expected header {','.join(TRAJECTORY_COLUMNS)}, "
                           f"got {','.join(map(str, frame.columns))}")
    if frame.empty:
        raise MalformedCSV(f"{path}: no samples")
    non_numeric = [name for name in TRAJECTORY_COLUMNS if not pd.api.types.is_numeric_dtype(frame[name])]
    if non_numeric:
        raise MalformedCSV(f"{path}: non-numeric values in {non_numeric}")
    if not frame["t"].is_monotonic_increasing or frame["t"].duplicated().any():
        raise MalformedCSV(f"{path}: t must be strictly increasing")
    return frame


def region_frame(rows: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    frame = pd.DataFrame(list(rows), columns=list(REGION_COLUMNS))
    frame["in_A"] = frame["in_A"].astype(int)
    return frame


def write_region_csv(rows: Sequence[Dict[str, Any]], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    region_frame(rows).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(rows)} admissible-set points to {path}")
    return path


def read_region_csv(path: PathLike) -> pd.DataFrame:
    frame = _read(path)
    if tuple(frame.columns) != REGION_COLUMNS:
        raise MalformedCSV(f"{path}: expected header {','.join(REGION_COLUMNS)}")
    return frame
