"""Tabulate a priori estimate monitors from solve reports.

Per row: sup|u|, sup|Du|, sup|D^2u| over all interior nodes, the interior
region and the near-boundary band, plus the two implied constants
``sup|Du| / (1 + band sup|Du|)`` and ``sup|D^2u| / (1 + band sup|D^2u|)``.
The band stands in for the boundary values, which the grid does not carry.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..solver import SolveReport, monitor_triples

QUANTITIES = ("sup_u", "sup_du", "sup_d2u")
REGIONS = ("all", "interior", "near_boundary")


def _row(label, eps, h, monitors) -> dict:
    row = {"label": label, "eps": eps, "h": h}
    for region in REGIONS:
        for q, v in zip(QUANTITIES, monitors[region]):
            row[f"{region}_{q}"] = float(v)
    row["gradient_constant"] = row["all_sup_du"] / (1.0 + row["near_boundary_sup_du"])
    row["hessian_constant"] = row["all_sup_d2u"] / (1.0 + row["near_boundary_sup_d2u"])
    return row


def _ratio(a, b):
    if a == b:
        return 1.0
    if b == 0:
        return float("inf")
    return a / b


@dataclass
class EstimateTable:
    rows: list = field(default_factory=list)

    def columns(self):
        return [k for k in self.rows[0] if k not in ("label", "eps", "h")] if self.rows else []

    def ratios(self) -> list:
        """Row-to-row ratios (later / earlier) of every monitored column."""
        out = []
        for prev, cur in zip(self.rows, self.rows[1:]):
            r = {"from": prev["label"], "to": cur["label"]}
            for c in self.columns():
                r[c] = _ratio(cur[c], prev[c])
            out.append(r)
        return out

    def last_ratio(self, column: str = "interior_sup_d2u") -> float | None:
        rs = self.ratios()
        return rs[-1][column] if rs else None

    def to_dict(self) -> dict:
        return {"rows": self.rows, "ratios": self.ratios()}

    def format(self) -> str:
        cols = ["label", "all_sup_u", "all_sup_du", "all_sup_d2u", "interior_sup_d2u",
                "near_boundary_sup_d2u", "hessian_constant"]
        lines = ["  ".join(f"{c:>22}" for c in cols)]
        for r in self.rows:
            lines.append("  ".join(f"{r[c]:>22}" if c == "label" else f"{r[c]:>22.6g}" for c in cols))
        return "\n".join(lines)


def monitor(report: SolveReport) -> EstimateTable:
    """One row per converged eps stage of ``report``."""
    table = EstimateTable()
    h = report.subsolution.field.grid.h
    for st in report.stages:
        if st.converged and st.monitors is not None:
            table.rows.append(_row(f"eps={st.eps:g}", st.eps, h, st.monitors))
    return table


def refinement_table(reports) -> EstimateTable:
    """One row per grid, taken from the final field of each report."""
    table = EstimateTable()
    for rep in reports:
        if rep.field is None:
            continue
        g = rep.field.grid
        table.rows.append(_row(f"m={g.m}", rep.final_eps, g.h, monitor_triples(rep.field)))
    return table


def stage_stability(report: SolveReport, column: str = "interior_sup_d2u") -> float | None:
    """Relative change of ``column`` between the last two converged stages."""
    r = monitor(report).last_ratio(column)
    return None if r is None else float(abs(r - 1.0))


def is_within(ratio, low=0.95, high=1.05) -> bool:
    return ratio is not None and bool(np.isfinite(ratio)) and low <= ratio <= high
