"""Figure rendering for result CSVs.

Reads the delimited outputs of the ``rho``, ``tau``, ``rate``, and ``pmf``
commands and writes matplotlib figures next to them.  Kept separate from the
computation path: the data files stay the interface.
"""

from __future__ import annotations

import os

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ValidationError  # noqa: E402
from .rate_lab import loglog_slope  # noqa: E402


def _read_csv(path: str) -> tuple[dict, list[str], np.ndarray]:
    meta: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(x) for x in line.split(",")])
    if header is None or not rows:
        raise ValidationError(f"{path}: no data section")
    return meta, header, np.asarray(rows)


def _stem(path: str, outdir: str) -> str:
    base = os.path.splitext(os.path.basename(path))[0]
    os.makedirs(outdir, exist_ok=True)
    return os.path.join(outdir, base)


def _loglog_with_fit(ax, ns, vals, label: str) -> None:
    ax.loglog(ns, vals, "o-", label=label)
    if len(ns) >= 4 and (vals > 0).all():
        slope, err = loglog_slope(list(zip(ns, vals)))
        ax.set_title(f"{label}: slope {slope:.3f} (se {err:.3f})")


def render_report(path: str, outdir: str = ".") -> list[str]:
    """Render the figures appropriate to the CSV's columns; return paths."""
    meta, header, data = _read_csv(path)
    stem = _stem(path, outdir)
    written: list[str] = []

    if header[:2] in (["n", "rho"], ["n", "tau"]):
        fig, ax = plt.subplots(figsize=(5, 4))
        _loglog_with_fit(ax, data[:, 0], data[:, 1], header[1])
        ax.set_xlabel("n")
        ax.set_ylabel(header[1])
        ax.grid(True, which="both", alpha=0.3)
        out = f"{stem}_loglog.png"
        fig.savefig(out, dpi=150, bbox_inches="tight")
        plt.close(fig)
        written.append(out)
    elif header[:3] == ["n", "fm_value", "fm_half_width"]:
        ns = data[:, 0]
        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        axes[0].errorbar(ns, data[:, 1], yerr=data[:, 2], fmt="o-",
                         capsize=3, label="distance")
        axes[0].set_xscale("log")
        axes[0].set_xlabel("n")
        axes[0].set_ylabel("empirical distance")
        axes[0].set_title("conditioned walk vs bridge")
        axes[0].grid(True, alpha=0.3)
        _loglog_with_fit(axes[1], ns, data[:, 3], "rho")
        if (data[:, 4] > 0).all():
            axes[1].loglog(ns, data[:, 4], "s--", label="tau")
        axes[1].set_xlabel("n")
        axes[1].legend()
        axes[1].grid(True, which="both", alpha=0.3)
        out = f"{stem}_decay.png"
        fig.savefig(out, dpi=150, bbox_inches="tight")
        plt.close(fig)
        written.append(out)
    elif header[:2] == ["value", "prob"]:
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.vlines(data[:, 0], 0.0, data[:, 1], lw=1.5)
        ax.set_xlabel("value")
        ax.set_ylabel("probability")
        law = meta.get("law", "")
        ax.set_title(f"partial-sum pmf {law}".strip())
        ax.grid(True, alpha=0.3)
        out = f"{stem}_pmf.png"
        fig.savefig(out, dpi=150, bbox_inches="tight")
        plt.close(fig)
        written.append(out)
    else:
        raise ValidationError(f"{path}: unrecognized result columns {header}")
    return written
