"""Sweep datasets: probability-vs-ratio curves, sensitivity and detuning maps.

Grids are embarrassingly parallel over cells; every cell's seeds are fixed
in advance (family heuristics plus the resonant-cell optimum), so results
are bitwise independent of evaluation order and worker count.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import coherent
from .model import Atom
from .optimize import (OptimizationProblem, build_state, default_starts,
                       nelder_mead, optimize_pulse)
from .states import EntangledGaussian, GaussianProduct, schmidt_analytic


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


@dataclass(frozen=True)
class SweepSpec:
    """Axis definitions plus the per-point task for a sweep run."""

    family: str
    axes: tuple                      # ((name, values), ...) one or two axes
    mu_free: bool = True
    gamma_ratio: float = 1.0
    policy: str = "reoptimize"       # sensitivity maps: "reoptimize" | "frozen"
    seed: int = 0
    n_starts: int = 8
    output: str | None = None

    def __post_init__(self):
        if not (1 <= len(self.axes) <= 2):
            raise ValueError("at most 2 axes")
        for _, vals in self.axes:
            if len(vals) < 2:
                raise ValueError("each axis needs >= 2 points")


@dataclass(frozen=True)
class GridResult:
    """Scalar results on a (1- or 2-axis) grid with per-cell metadata."""

    axes: tuple
    values: np.ndarray
    cells: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_csv(self, path, extra_comments=()):
        lines = [f"# {c}" for c in extra_comments]
        names = [a[0] for a in self.axes]
        lines.append(",".join(names + ["value", "converged"]))
        it = np.ndindex(self.values.shape)
        for idx in it:
            coords = [self.axes[d][1][idx[d]] for d in range(len(self.axes))]
            cell = self.cells[np.ravel_multi_index(idx, self.values.shape)] if self.cells else {}
            conv = cell.get("converged", True)
            lines.append(",".join(
                [f"{c}" for c in coords]
                + [f"{self.values[idx]:.12g}", str(bool(conv))]))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def to_json(self, path, extra_meta=None):
        doc = {"axes": [{"name": n, "values": _jsonable(list(v))} for n, v in self.axes],
               "values": _jsonable(self.values),
               "cells": _jsonable(self.cells),
               "meta": _jsonable({**self.meta, **(extra_meta or {})})}
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)


# ---------------------------------------------------------------------------
# ratio sweeps
# ---------------------------------------------------------------------------

def _ratio_cell(args):
    family, ratio, mu_free, seed, n_starts = args
    atom = Atom(ratio, 1.0)
    problem = OptimizationProblem(atom, family, mu_free=mu_free,
                                  seed=seed, n_starts=n_starts)
    res = optimize_pulse(problem)
    cell = {"ratio": ratio, "mu_free": mu_free, "p_max": res.p_max,
            "params": res.params, "t_at_max": res.t_at_max,
            "converged": res.converged}
    if family == "entangled_gaussian":
        st = EntangledGaussian(res.params["omega_plus"], res.params["omega_minus"],
                               res.params.get("mu", 0.0))
        cell["entropy_bits"] = schmidt_analytic(st).entropy_bits
    return cell


def ratio_sweep(family, ratios, delay_policies=("mu_free", "mu_zero"),
                seed=0, n_starts=8, jobs=1):
    """Optimized p_max per lifetime ratio, one column per delay policy."""
    ratios = list(ratios)
    tasks = [(family, r, pol == "mu_free", seed, n_starts)
             for r in ratios for pol in delay_policies]
    cells = _run(tasks, _ratio_cell, jobs)
    values = np.array([c["p_max"] for c in cells]).reshape(
        len(ratios), len(delay_policies))
    return GridResult(
        axes=(("gamma_e_over_gamma_f", np.asarray(ratios, dtype=float)),
              ("delay_policy", list(delay_policies))),
        values=values, cells=cells,
        meta={"family": family, "seed": seed})


# ---------------------------------------------------------------------------
# sensitivity maps over the two spectral widths
# ---------------------------------------------------------------------------

def _sensitivity_cell(args):
    family, ratio, w1, w2, policy, mu_frozen, seed = args
    atom = Atom(ratio, 1.0)
    if policy == "frozen":
        params = {"mu": mu_frozen}
        p = _cell_params(family, w1, w2, params)
        state = build_state(OptimizationProblem(atom, family), p)
        pm = _pmax_of(atom, family, state)
        return {"p_max": pm, "mu": mu_frozen, "converged": True}
    # re-optimize the delay at fixed widths (1-D simplex)
    problem = OptimizationProblem(atom, family, mu_free=True, seed=seed)
    best = (-np.inf, 0.0)
    converged = False
    for mu0 in (mu_frozen, 1.0 / atom.gamma_e, 0.0):
        def negp(xv):
            p = _cell_params(family, w1, w2, {"mu": float(xv[0])})
            state = build_state(problem, p)
            return -_pmax_of(atom, family, state)
        x, fx, nev, conv, _ = nelder_mead(
            negp, np.array([mu0]), np.array([max(0.5 / atom.gamma_e, 0.05)]),
            max_evals=220)
        if -fx > best[0]:
            best = (-fx, float(x[0]))
            converged = conv
    return {"p_max": best[0], "mu": best[1], "converged": converged}


def _cell_params(family, w1, w2, extra):
    if family == "entangled_gaussian":
        p = {"omega_plus": w1, "omega_minus": w2}
    else:
        p = {"omega1": w1, "omega2": w2}
    p.update(extra)
    return p


def _pmax_of(atom, family, state):
    from .absorption import pf_max_over_t
    if family == "coherent":
        return coherent.pf_max_coherent(atom, state, rtol=1e-7, atol=1e-9)[1]
    return pf_max_over_t(atom, state)[1]


def sensitivity_map(atom: Atom, family, axis1, axis2, delay_policy="reoptimize",
                    seed=0, jobs=1):
    """p_max over a width x width grid with the delay re-optimized or frozen.

    The frozen policy pins the delay at the global optimum's value; the
    default policy re-optimizes it in every cell.
    """
    ratio = atom.gamma_e / atom.gamma_f
    base = optimize_pulse(OptimizationProblem(atom, family, mu_free=True, seed=seed))
    mu_opt = base.params.get("mu", 0.0)
    tasks = [(family, ratio, w1, w2, delay_policy, mu_opt, seed)
             for w1 in axis1 for w2 in axis2]
    cells = _run(tasks, _sensitivity_cell, jobs)
    values = np.array([c["p_max"] for c in cells]).reshape(len(axis1), len(axis2))
    n1 = "omega_plus" if family == "entangled_gaussian" else "omega1"
    n2 = "omega_minus" if family == "entangled_gaussian" else "omega2"
    return GridResult(
        axes=((n1, np.asarray(axis1, dtype=float)),
              (n2, np.asarray(axis2, dtype=float))),
        values=values, cells=cells,
        meta={"family": family, "delay_policy": delay_policy,
              "global_optimum": _jsonable(base.params),
              "global_p_max": base.p_max, "seed": seed})


# ---------------------------------------------------------------------------
# detuning maps
# ---------------------------------------------------------------------------

def _detuning_cell(args):
    family, ratio, d1, d2, mu_free, seed, n_starts, warm = args
    atom = Atom(ratio, 1.0, d1, d2)
    problem = OptimizationProblem(atom, family, mu_free=mu_free, seed=seed,
                                  n_starts=n_starts, max_evals=1200)
    starts = default_starts(problem)[:max(n_starts - 1, 1)]
    if warm is not None:
        starts = [warm] + starts
    res = optimize_pulse(problem, starts=starts)
    return {"delta1": d1, "delta2": d2, "p_max": res.p_max,
            "params": res.params, "converged": res.converged}


def detuning_map(family, gamma_ratio, delta1_values, delta2_values,
                 mu_free=True, seed=0, n_starts=4, jobs=1):
    """p_max with pulse parameters fully re-optimized at fixed detunings.

    Every cell is warm-started from the resonant optimum (plus the standard
    heuristic seeds), keeping cells independent so the grid is deterministic
    under any parallel schedule.
    """
    resonant = optimize_pulse(OptimizationProblem(
        Atom(gamma_ratio, 1.0), family, mu_free=mu_free, seed=seed))
    warm = {k: v for k, v in resonant.params.items()}
    if not mu_free:
        warm.pop("mu", None)
        warm.pop("t_shift", None)
    tasks = [(family, gamma_ratio, d1, d2, mu_free, seed, n_starts, warm)
             for d1 in delta1_values for d2 in delta2_values]
    cells = _run(tasks, _detuning_cell, jobs)
    values = np.array([c["p_max"] for c in cells]).reshape(
        len(delta1_values), len(delta2_values))
    return GridResult(
        axes=(("delta1_over_gamma_f", np.asarray(delta1_values, dtype=float)),
              ("delta2_over_gamma_f", np.asarray(delta2_values, dtype=float))),
        values=values, cells=cells,
        meta={"family": family, "gamma_ratio": gamma_ratio,
              "mu_free": mu_free, "resonant_p_max": resonant.p_max,
              "resonant_params": _jsonable(resonant.params), "seed": seed})


def _run(tasks, fn, jobs):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
