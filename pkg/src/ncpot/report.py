"""Certificate reports shared by the maximum-principle and mean-value checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


@dataclass
class CertReport:
    """Outcome of a certificate over a finite family of points or discs.

    ``margin`` is the worst (smallest) eigenvalue margin over the family and
    ``witness`` identifies where it occurred. ``items`` keeps one entry per
    tested point or disc, in input order.
    """

    kind: str
    passed: bool
    margin: float
    witness: dict | None = None
    items: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def status(self):
        return "pass" if self.passed else "fail"

    def to_dict(self):
        return _plain(
            {
                "kind": self.kind,
                "status": self.status,
                "passed": self.passed,
                "margin": self.margin,
                "witness": self.witness,
                "items": self.items,
                "diagnostics": self.diagnostics,
            }
        )


def disc_dict(disc):
    return {"z0": [disc.z0.real, disc.z0.imag], "r": disc.r}


def collect(kind, items, tol_key="threshold"):
    """Build a report from per-item dicts carrying ``margin`` and ``threshold``."""
    if not items:
        return CertReport(kind, True, float("inf"))
    worst = min(range(len(items)), key=lambda i: items[i]["margin"] - items[i][tol_key])
    passed = all(it["margin"] >= it[tol_key] for it in items)
    return CertReport(
        kind=kind,
        passed=passed,
        margin=float(items[worst]["margin"]),
        witness={"index": worst, **items[worst]},
        items=items,
    )
