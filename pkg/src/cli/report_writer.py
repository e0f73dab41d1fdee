# src/cli/report_writer.py
"""
CSV, SVG and JSON output of CLI runs
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from src.cli.model_file import SCHEMA_VERSION  # noqa: E402

logger = logging.getLogger(__name__)

SCHEMA_PREFIX = "# schema: fsmac"


def schema_line(kind: str) -> str:
    return f"{SCHEMA_PREFIX}-{kind} v{SCHEMA_VERSION}"


def write_csv(rows: List[Dict], path: Path, kind: str, columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """
    Write rows as CSV behind a versioned schema comment

    Args:
        rows: one dict per row
        path: output file
        kind: table kind used in the schema line
        columns: column order (default: order of first appearance)

    Returns:
        the written DataFrame
    """
    df = pd.DataFrame(rows, columns=list(columns) if columns else None)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(schema_line(kind) + "\n")
        df.to_csv(f, index=False, float_format="%.12g")
    logger.info("Wrote %d rows to %s", len(df), path)
    return df


def read_csv(path: Path) -> pd.DataFrame:
    """Read a CSV written by write_csv"""
    return pd.read_csv(path, comment="#")


def write_svg(
    df: pd.DataFrame,
    x: str,
    ys: Sequence[str],
    path: Path,
    title: str,
    area: bool = False,
    xlabel: Optional[str] = None,
    ylabel: str = "bits/symbol",
) -> Path:
    """
    Standalone SVG line (or filled area) plot of CSV columns

    The plotted data is embedded in the SVG description metadata.
    """
    data = df.sort_values(x) if area else df
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for column in ys:
        ax.plot(data[x], data[column], marker="o", markersize=3, label=column)
        if area:
            ax.fill_between(data[x], data[column], alpha=0.25)
    ax.set_xlabel(xlabel or x)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if len(ys) > 1:
        ax.legend()
    fig.tight_layout()

    payload = data[[x, *ys]].to_csv(index=False, float_format="%.12g")
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Title": title, "Description": payload})
    plt.close(fig)
    logger.info("Wrote plot %s", path)
    return path


def save_report(payload: Dict, out_dir: Path, command: str) -> Path:
    """Dump a JSON run report with a timestamped name"""
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    path = out_dir / f"{command}_{timestamp}.json"
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, default=str)
    return path
