"""Aggregate run metrics.

LRC is reported as a fraction in [0, 1] (revenue-weighted by lifetime over
cost-weighted by lifetime), acceptance as a percentage, long-term average
revenue per time unit over the horizon T = last event time.
"""

from dataclasses import dataclass


@dataclass
class MetricsSummary:
    rac: float = 0.0          # percent accepted
    lrc: float = 0.0          # fraction in [0, 1]
    lar: float = 0.0          # revenue * lifetime per time unit
    ast: float = 0.0          # mean solver seconds per request
    horizon: float = 0.0      # T, last event time
    total_revenue: float = 0.0
    accepted: int = 0
    total: int = 0
    lrc_defined: bool = True  # false when nothing was accepted
    energy: float = 0.0       # integrated watts * time units (0 unless tracked)

    def to_dict(self):
        return {"rac": self.rac, "lrc": self.lrc, "lar": self.lar,
                "ast": self.ast, "horizon": self.horizon,
                "total_revenue": self.total_revenue,
                "accepted": self.accepted, "total": self.total,
                "lrc_defined": self.lrc_defined, "energy": self.energy,
                "lrc_scale": "fraction"}


def compute_metrics(rows, horizon, energy=0.0):
    """Recompute the summary from per-request rows (the authoritative path)."""
    total = len(rows)
    accepted = [r for r in rows if r["accepted"]]
    rac = 100.0 * len(accepted) / total if total else 0.0
    rev_w = sum(r["revenue"] * r["lifetime"] for r in accepted)
    cost_w = sum(r["cost"] * r["lifetime"] for r in accepted)
    lrc_defined = bool(accepted) and cost_w > 0
    lrc = rev_w / cost_w if lrc_defined else 0.0
    lar = rev_w / horizon if horizon > 0 else 0.0
    ast = sum(r["solve_time"] for r in rows) / total if total else 0.0
    return MetricsSummary(rac=rac, lrc=lrc, lar=lar, ast=ast, horizon=horizon,
                          total_revenue=sum(r["revenue"] for r in accepted),
                          accepted=len(accepted), total=total,
                          lrc_defined=lrc_defined, energy=energy)
