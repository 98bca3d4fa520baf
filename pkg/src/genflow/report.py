"""Empirical scaling runs: counts to CSV, plus a log-log figure next to it."""

from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .generate import random_instance
from .ppn import fast_ops_cap
from .solver import solve
from .stats import RunOptions


@dataclass
class ScalingRow:
    n: int
    m: int
    seed: int
    status: str
    augmentations: int
    path_augmentations: int
    null_augmentations: int
    label_updates: int
    contractions: int
    augmentation_cap: int
    max_ops_between_augmentations: int
    ops_cap: int
    ops_budget_ok: bool
    seconds: float


def augmentation_budget(n: int, m: int) -> int:
    return int(50 * m * n * (math.log2(n * n / m) + 2) + 50 * m * n)


def scaling_rows(sizes=(10, 20, 40, 80), seeds=(0, 1), density: int = 3,
                 opts: RunOptions | None = None) -> list[ScalingRow]:
    opts = opts or RunOptions(mode="fast")
    rows = []
    for n in sizes:
        m = density * n
        for seed in seeds:
            inst = random_instance(n, m, 7919 * seed + n, 20, 10, lossy=1.0)
            start = time.perf_counter()
            out = solve(inst, opts)
            st = out.stats
            # phase instances have one extra node and up to 2n extra arcs
            ops_cap = fast_ops_cap(n + 1, m + 2 * n)
            rows.append(ScalingRow(
                n, m, seed, out.status, st.augmentations, st.path_augmentations,
                st.null_augmentations, st.label_updates, st.contractions,
                augmentation_budget(n, m), st.max_ops_between_events, int(ops_cap),
                st.ops_budget_ok, round(time.perf_counter() - start, 3)))
    return rows


def fitted_exponent(rows: list[ScalingRow]) -> float:
    """Slope of log(augmentations) against log(n), averaged per size."""
    by_n: dict[int, list[int]] = {}
    for r in rows:
        by_n.setdefault(r.n, []).append(max(r.augmentations, 1))
    xs = [math.log(n) for n in sorted(by_n)]
    ys = [math.log(statistics.mean(by_n[n])) for n in sorted(by_n)]
    if len(xs) < 2:
        return float("nan")
    return statistics.linear_regression(xs, ys).slope


def write_report(rows: list[ScalingRow], outdir: str | Path) -> tuple[Path, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "scaling.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(asdict(rows[0]).keys()))
        w.writeheader()
        for r in rows:
            w.writerow(asdict(r))
    png_path = outdir / "scaling.png"
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    ns = sorted({r.n for r in rows})
    mean = lambda f, n: statistics.mean(f(r) for r in rows if r.n == n)
    left.loglog(ns, [mean(lambda r: r.augmentations, n) for n in ns], "o-", label="augmentations")
    left.loglog(ns, [mean(lambda r: r.augmentation_cap, n) for n in ns], "--", label="cap")
    left.set_xlabel("n")
    left.set_title(f"augmentations (slope {fitted_exponent(rows):.2f})")
    left.legend()
    right.loglog(ns, [mean(lambda r: r.max_ops_between_augmentations, n) for n in ns], "o-", label="max ops per interval")
    right.loglog(ns, [mean(lambda r: r.ops_cap, n) for n in ns], "--", label="cap")
    right.set_xlabel("n")
    right.set_title("heap and arc operations between augmentations")
    right.legend()
    fig.tight_layout()
    fig.savefig(png_path, dpi=100)
    plt.close(fig)
    return csv_path, png_path
