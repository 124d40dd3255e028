"""SVG figures rendered with matplotlib.

With deterministic=True the SVG carries no date and uses a fixed hash
salt for element ids, so the same data always gives the same bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from stickyflows.exits.radial import RadialTable  # noqa: E402
from stickyflows.models.domain import KernelField  # noqa: E402

HASH_SALT = "stickyflows"


def _save(fig, path: Path, deterministic: bool) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if deterministic else {}
    with plt.rc_context({"svg.hashsalt": HASH_SALT if deterministic else None}):
        fig.savefig(path, format="svg", metadata=metadata)
    plt.close(fig)
    return path


def plot_kernels(path: Path, fields: dict[str, KernelField], deterministic: bool = False) -> Path:
    """Density curves of one or more kernels on a shared axis."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, field in sorted(fields.items()):
        ax.plot(field.centers, field.values, label=label, linewidth=1.0)
    ax.set_xlabel("y")
    ax.set_ylabel("density")
    ax.legend(loc="upper right")
    fig.tight_layout()
    return _save(fig, path, deterministic)


def plot_radial(
    path: Path, tables: list[RadialTable], slopes: list[float], deterministic: bool = False
) -> Path:
    """f0(r) per N next to the straight lines r / (gamma a b)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for table, slope in zip(tables, slopes):
        (line,) = ax.plot(table.r, table.f, label=f"f0, N = {table.n_points}")
        ax.plot(table.r, slope * np.asarray(table.r), linestyle="--", color=line.get_color())
    ax.set_xlabel("r")
    ax.set_ylabel("mean time to reach r")
    ax.legend(loc="upper left")
    fig.tight_layout()
    return _save(fig, path, deterministic)
