"""Mixed causal-noncausal autoregressions: detrending, estimation, forecasting."""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from . import _core
from ._core import DataError, NumericalError

__all__ = [
    "DataError",
    "NumericalError",
    "detrend",
    "simulate",
    "loglik",
    "estimate",
    "identify",
    "select_pseudo_order",
    "cauchy_forecast",
    "forecast",
    "prob_events",
    "cobubble",
    "run_cli",
]


def _vec(x) -> list[float]:
    return np.asarray(x, dtype=float).ravel().tolist()


def _density(d: dict) -> dict:
    out = {k: np.asarray(d[k]) for k in ("grid", "pdf", "cdf")}
    out.update(json.loads(d["summary"]))
    return out


def detrend(y, method: str = "hp", order: int = 4, lam: float = 129600.0, breaks: Sequence[int] = ()) -> dict:
    """Trend and cycle arrays plus fit metadata. Break times are 1-based."""
    d = _core.detrend(_vec(y), method, order, lam, list(breaks))
    return {"trend": np.asarray(d["trend"]), "cycle": np.asarray(d["cycle"]), **json.loads(d["info"])}


def simulate(phi, psi, n: int, seed: int, dist: str = "student_t", dof: float = 2.0, scale: float = 1.0,
             burn: int = 100) -> np.ndarray:
    return np.asarray(_core.simulate(_vec(phi), _vec(psi), n, seed, dist, dof, scale, burn))


def loglik(y, phi, psi, dist: str = "student_t", dof: float = 2.0, scale: float = 1.0) -> float:
    return _core.loglik(_vec(y), _vec(phi), _vec(psi), dist, dof, scale)


def estimate(y, r: int, s: int, dist: str = "student_t", std_errors: bool = True) -> dict:
    return json.loads(_core.estimate(_vec(y), r, s, dist, std_errors))


def identify(y, p_max: int = 4, criterion: str = "bic", dist: str = "student_t", std_errors: bool = True) -> dict:
    return json.loads(_core.identify(_vec(y), p_max, criterion, dist, std_errors))


def select_pseudo_order(y, p_max: int = 4, criterion: str = "bic") -> tuple[int, np.ndarray]:
    p, values = _core.select_pseudo_order(_vec(y), p_max, criterion)
    return p, np.asarray(values)


def cauchy_forecast(u_last: float, psi: float, grid) -> dict:
    return _density(_core.cauchy_forecast(u_last, psi, _vec(grid)))


def forecast(history, model: dict, method: str = "simulations", h: int = 1, N: int = 100_000, M: int = 100,
             grid_points: int = 1001, grid_span: float = 3.0, seed: int = 20200101, threads: int = 0) -> dict:
    """Predictive density of the next value of `history` under a fitted model (the "model" entry of estimate())."""
    dist = model["dist"]
    d = _core.forecast(_vec(history), model["phi"], model["psi"], dist["kind"], dist.get("dof", 1.0),
                       dist["scale"], model.get("intercept", 0.0), method, h, N, M, grid_points, grid_span,
                       seed, threads)
    return _density(d)


def prob_events(density: dict, last_y: float, sd: float) -> tuple[float, float]:
    """P(next <= last_y) and P(next <= last_y - sd)."""
    return _core.prob_events(_vec(density["grid"]), _vec(density["cdf"]), last_y, sd)


def cobubble(y, x, lo: float = -2.0, hi: float = 2.0, step: float = 0.01, p_max: int = 4, criterion: str = "bic",
             threads: int = 0) -> dict:
    summary, table = _core.cobubble(_vec(y), _vec(x), lo, hi, step, p_max, criterion, threads)
    out = json.loads(summary)
    out["table"] = table
    return out


def run_cli(args: Sequence[str]) -> tuple[int, str, str]:
    """Run the command-line tool in-process: (exit code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
