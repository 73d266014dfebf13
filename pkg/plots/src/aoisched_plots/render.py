"""Render experiment-CSV curves: competitive ratio, total cost and age.

The input is the documented simulator CSV schema (one row per scheduler,
instance cell and repetition); nothing here reaches into the simulator
itself.  Rendering is a pure function of the CSV: identical input yields
an identical data layer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

REQUIRED_COLUMNS = (
    "scheduler",
    "seed",
    "rep",
    "N",
    "T",
    "M",
    "C1",
    "total_cost",
    "time_avg_total_cost",
    "time_avg_age",
    "opt_cost",
    "dual_lb",
    "ratio_vs_opt",
    "ratio_vs_dual_lb",
    "theorem_bound",
)

# kind -> (x column, y column or "ratio", axis labels)
FIGURE_KINDS = {
    "ratio_vs_c1": ("C1", "ratio", "lowest transmission cost", "cost / optimum"),
    "cost_vs_c1": ("C1", "time_avg_total_cost", "lowest transmission cost", "time-average total cost"),
    "age_vs_c1": ("C1", "time_avg_age", "lowest transmission cost", "time-average age"),
    "cost_vs_n": ("N", "time_avg_total_cost", "number of users", "time-average total cost"),
    "age_vs_n": ("N", "time_avg_age", "number of users", "time-average age"),
}

VECTOR_SUFFIXES = (".svg", ".pdf")


@dataclass(frozen=True)
class PlotSpec:
    input_csv: str
    kind: str
    output_path: str
    schedulers: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise ValueError(
                f"unknown figure kind {self.kind!r}; choose from {sorted(FIGURE_KINDS)}"
            )
        if not any(self.output_path.endswith(s) for s in VECTOR_SUFFIXES):
            raise ValueError(
                f"output must be a vector format ({', '.join(VECTOR_SUFFIXES)}), "
                f"got {self.output_path!r}"
            )
        object.__setattr__(self, "schedulers", tuple(self.schedulers))

    @classmethod
    def from_json_dict(cls, data: dict) -> "PlotSpec":
        try:
            return cls(
                input_csv=data["input_csv"],
                kind=data["kind"],
                output_path=data["output_path"],
                schedulers=tuple(data.get("schedulers", ())),
            )
        except KeyError as exc:
            raise ValueError(f"plot spec missing key: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "PlotSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class CurveLayer:
    """One scheduler's aggregated curve: per-x mean and standard error."""

    scheduler: str
    x: tuple[float, ...]
    y: tuple[float, ...]
    stderr: tuple[float, ...]


@dataclass(frozen=True)
class RenderResult:
    output_path: str
    kind: str
    y_source: str
    curves: tuple[CurveLayer, ...]
    bound: tuple[tuple[float, ...], tuple[float, ...]] | None


def _load_frame(spec: PlotSpec) -> pd.DataFrame:
    # round_trip parsing: the data layer must reproduce the CSV digits
    # exactly, and the default fast parser is allowed to be off by an ulp
    frame = pd.read_csv(spec.input_csv, float_precision="round_trip")
    missing = [col for col in REQUIRED_COLUMNS if col not in frame.columns]
    if missing:
        raise ValueError(
            f"input CSV is missing columns {missing}; expected schema: "
            f"{', '.join(REQUIRED_COLUMNS)}"
        )
    return frame


def _pick_ratio_column(frame: pd.DataFrame) -> str:
    """Exact optima when available, certified lower bound otherwise."""
    if frame["ratio_vs_opt"].notna().any():
        return "ratio_vs_opt"
    return "ratio_vs_dual_lb"


def _aggregate(frame: pd.DataFrame, x_col: str, y_col: str) -> list[CurveLayer]:
    curves = []
    for scheduler in list(dict.fromkeys(frame["scheduler"])):
        sub = frame[frame["scheduler"] == scheduler]
        sub = sub[sub[y_col].notna()]
        xs, ys, errs = [], [], []
        for x_val in sorted(sub[x_col].unique()):
            values = sub.loc[sub[x_col] == x_val, y_col].to_numpy(dtype=float)
            xs.append(float(x_val))
            # plain running mean: reproducible digit for digit across runs
            mean = 0.0
            for v in values:
                mean += v
            mean /= values.size
            ys.append(mean)
            if values.size > 1:
                var = 0.0
                for v in values:
                    var += (v - mean) ** 2
                errs.append(math.sqrt(var / (values.size - 1)) / math.sqrt(values.size))
            else:
                errs.append(0.0)
        curves.append(
            CurveLayer(scheduler=scheduler, x=tuple(xs), y=tuple(ys), stderr=tuple(errs))
        )
    return curves


def render(spec: PlotSpec) -> RenderResult:
    """Write the figure and return its exact data layer.

    Curves are repetition means with a shaded band of one standard error;
    ratio figures overlay the certified bound line.  The scheduler filter
    defaults to every scheduler present in the CSV.
    """
    frame = _load_frame(spec)
    x_col, y_col, x_label, y_label = FIGURE_KINDS[spec.kind]
    y_source = _pick_ratio_column(frame) if y_col == "ratio" else y_col

    if spec.schedulers:
        unknown = set(spec.schedulers) - set(frame["scheduler"])
        if unknown:
            raise ValueError(f"schedulers not present in the CSV: {sorted(unknown)}")
        frame = frame[frame["scheduler"].isin(spec.schedulers)]
    if frame.empty:
        raise ValueError("no rows left to plot after filtering")

    curves = _aggregate(frame, x_col, y_source)

    bound = None
    if y_col == "ratio":
        bound_frame = frame[[x_col, "theorem_bound"]].dropna()
        xs = sorted(bound_frame[x_col].unique())
        bound = (
            tuple(float(x) for x in xs),
            tuple(
                float(bound_frame.loc[bound_frame[x_col] == x, "theorem_bound"].iloc[0])
                for x in xs
            ),
        )

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for curve in curves:
        ax.plot(curve.x, curve.y, marker="o", label=curve.scheduler)
        if any(e > 0 for e in curve.stderr):
            lo = [y - e for y, e in zip(curve.y, curve.stderr)]
            hi = [y + e for y, e in zip(curve.y, curve.stderr)]
            ax.fill_between(curve.x, lo, hi, alpha=0.2)
    if bound is not None:
        ax.plot(bound[0], bound[1], linestyle="--", color="black", label="certified bound")
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output_path)
    plt.close(fig)

    return RenderResult(
        output_path=spec.output_path,
        kind=spec.kind,
        y_source=y_source,
        curves=tuple(curves),
        bound=bound,
    )
