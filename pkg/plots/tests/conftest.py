import csv

import pytest

COLUMNS = [
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
]


def write_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([row.get(col, "") for col in COLUMNS])


def golden_row(scheduler, c1, rep=0, n=2, **overrides):
    """Schema-true synthetic row; ratios stay below the bound."""
    bound = 1.0 + 30.0 / c1
    row = {
        "scheduler": scheduler,
        "seed": 7,
        "rep": rep,
        "N": n,
        "T": 100,
        "M": 4,
        "C1": c1,
        "total_cost": 100.0 + 3.0 * c1 + 5.0 * rep,
        "time_avg_total_cost": 1.0 + 0.03 * c1 + 0.05 * rep,
        "time_avg_age": 0.5 + 0.01 * c1 + 0.01 * rep,
        "opt_cost": 80.0 + 2.0 * c1,
        "dual_lb": 60.0 + 1.5 * c1,
        "ratio_vs_opt": 1.05 + 0.002 * c1 + 0.01 * rep,
        "ratio_vs_dual_lb": 1.30 + 0.002 * c1 + 0.01 * rep,
        "theorem_bound": bound,
    }
    row.update(overrides)
    return row


@pytest.fixture
def golden_csv(tmp_path):
    """Single repetition per cell: curve values equal the CSV values."""
    rows = [
        golden_row(scheduler, c1)
        for scheduler in ("online", "agnostic", "greedy1", "greedy2")
        for c1 in (10.0, 20.0, 30.0, 40.0, 50.0)
    ]
    path = tmp_path / "golden.csv"
    write_csv(path, rows)
    return path, rows


@pytest.fixture
def golden_csv_reps(tmp_path):
    """Three repetitions per cell, for the mean and error-band path."""
    rows = [
        golden_row(scheduler, c1, rep=rep)
        for scheduler in ("online", "agnostic")
        for c1 in (10.0, 30.0, 50.0)
        for rep in range(3)
    ]
    path = tmp_path / "golden_reps.csv"
    write_csv(path, rows)
    return path, rows
