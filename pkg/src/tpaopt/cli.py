"""Command-line front end: single evaluations, optimizations, sweeps, dumps.

Every output file starts with '#'-prefixed comment headers recording the
tool version, a hash of the effective configuration, and the tolerances;
the timestamp line is the only non-reproducible header. Presets (fig1..12)
are JSON job lists shipped with the package, one per paper figure dataset.
"""

import argparse
import datetime
import hashlib
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, absorption, coherent, optimal, sweeps
from .model import Atom
from .optimize import OptimizationProblem, asymptotic_checks, optimize_pulse
from .states import (EntangledGaussian, GaussianProduct, OptimalState,
                     schmidt_analytic, state_from_dict)

_DEFAULTS = {
    "gamma_ratio": 1.0, "delta1": 0.0, "delta2": 0.0,
    "seed": 0, "jobs": 1, "out": ".", "tol": 1e-9,
    "family": "gaussian_product", "mu_free": True,
    "n1": 1.0, "n2": 1.0, "n_times": 400, "n_starts": 8,
    "t_star": 0.0, "fast": False,
}


def load_config(path):
    """Flat key=value lines or a JSON object; values parsed as JSON scalars."""
    text = Path(path).read_text()
    if path.endswith(".json"):
        return json.loads(text)
    cfg = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        try:
            cfg[key.strip()] = json.loads(val.strip())
        except json.JSONDecodeError:
            cfg[key.strip()] = val.strip()
    return cfg


def save_config(cfg, path):
    if str(path).endswith(".json"):
        Path(path).write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
    else:
        lines = [f"{k}={json.dumps(v)}" for k, v in sorted(cfg.items())]
        Path(path).write_text("\n".join(lines) + "\n")


# accepted config-file synonyms for the atom parameters
_KEY_ALIASES = {
    "gamma_e_over_gamma_f": "gamma_ratio",
    "delta1_over_gamma_f": "delta1",
    "delta2_over_gamma_f": "delta2",
}


def _effective(args, keys):
    """Merge precedence: defaults < config file < explicit CLI flags."""
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        for k, v in load_config(args.config).items():
            cfg[_KEY_ALIASES.get(k, k)] = v
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    cfg = {k: cfg[k] for k in sorted(cfg) if k in keys or k in _DEFAULTS}
    return cfg


def _config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _headers(cfg):
    # jobs and out affect scheduling/placement only, never file contents
    cfg = {k: v for k, v in cfg.items() if k not in ("jobs", "out")}
    return [
        f"tpaopt {__version__}",
        f"config-hash: {_config_hash(cfg)}",
        f"config: {json.dumps(cfg, sort_keys=True, default=str)}",
        f"generated: {datetime.datetime.now().isoformat()}",
    ]


def _atom_from(cfg):
    return Atom(cfg["gamma_ratio"], 1.0, cfg.get("delta1", 0.0),
                cfg.get("delta2", 0.0))


def _norm_family(name):
    return name.replace("-", "_")


def _state_from_cfg(cfg, atom):
    fam = _norm_family(cfg["family"])
    if fam == "gaussian_product":
        return GaussianProduct(cfg["omega1"], cfg["omega2"], cfg.get("mu", 0.0))
    if fam == "entangled_gaussian":
        return EntangledGaussian(cfg["omega_plus"], cfg["omega_minus"],
                                 cfg.get("mu", 0.0))
    if fam == "optimal":
        return OptimalState(atom, cfg.get("t_star", 0.0),
                            cfg.get("t0", None) if cfg.get("t0") is not None else -np.inf)
    return state_from_dict({**cfg, "family": fam})


def _write_table(path, headers, columns, rows):
    lines = [f"# {h}" for h in headers]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(f"{v:.12g}" if isinstance(v, float) else str(v)
                              for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_curve(args):
    keys = ("gamma_ratio", "delta1", "delta2", "family", "omega1", "omega2",
            "omega_plus", "omega_minus", "mu", "t_shift", "t_star", "t0",
            "n_times", "out", "tol", "seed")
    cfg = _effective(args, keys)
    cfg = {k: v for k, v in cfg.items() if v is not None}
    atom = _atom_from(cfg)
    state = _state_from_cfg(cfg, atom)
    curve = absorption.excitation_curve(atom, state, n_times=cfg["n_times"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    p1, p2 = _squared_profiles(state)
    for t, p in zip(curve.times, curve.probabilities):
        rows.append((float(t), float(p), float(p1(t)), float(p2(t))))
    _write_table(out / "curve.csv", _headers(cfg) + [
        f"t_at_max: {curve.t_at_max:.12g}", f"p_max: {curve.p_max:.12g}"],
        ["t*gamma_f", "P_f", "profile1_sq", "profile2_sq"], rows)
    print(f"p_max = {curve.p_max:.9g} at t*gamma_f = {curve.t_at_max:.9g}")
    return 0


def _squared_profiles(state):
    if hasattr(state, "profile1"):
        return (lambda t: np.abs(state.profile1(t)) ** 2,
                lambda t: np.abs(state.profile2(t)) ** 2)
    if isinstance(state, EntangledGaussian):
        s2 = state.sigma_t2
        return (lambda t: np.exp(-t**2 / (2 * s2)) / np.sqrt(2 * np.pi * s2),
                lambda t: np.exp(-(t - state.mu) ** 2 / (2 * s2)) / np.sqrt(2 * np.pi * s2))
    if isinstance(state, OptimalState):
        _, p1, p2 = optimal.arrival_densities(state.atom, state.t_star)
        return p1, p2
    return (lambda t: np.zeros_like(np.asarray(t, dtype=float)),) * 2


def cmd_optimize(args):
    keys = ("gamma_ratio", "delta1", "delta2", "family", "mu_free",
            "n_starts", "n1", "n2", "seed", "out", "tol")
    cfg = _effective(args, keys)
    atom = _atom_from(cfg)
    fam = _norm_family(cfg["family"])
    problem = OptimizationProblem(atom, fam, mu_free=cfg["mu_free"],
                                  n1=cfg["n1"], n2=cfg["n2"],
                                  n_starts=cfg["n_starts"], seed=cfg["seed"])
    res = optimize_pulse(problem)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    doc = {"headers": _headers(cfg), "problem": problem.to_dict(),
           "search_bounds": {"widths_gamma_f": list((1e-3, 1e3)),
                             "delays_gamma_f": list((-50.0, 50.0))},
           "result": res.to_dict()}
    (out / "optimize.json").write_text(json.dumps(doc, indent=2, default=float))
    print(json.dumps({"params": {k: round(float(v), 6) for k, v in res.params.items()},
                      "p_max": round(res.p_max, 6)}))
    return 0


def cmd_coherent(args):
    keys = ("gamma_ratio", "delta1", "delta2", "n1", "n2", "omega1", "omega2",
            "mu", "out", "tol", "seed", "n_times")
    cfg = _effective(args, keys)
    cfg.setdefault("omega1", 1.0)
    cfg.setdefault("omega2", 1.0)
    cfg = {k: v for k, v in cfg.items() if v is not None}
    atom = _atom_from(cfg)
    drive = coherent.CoherentDrive(cfg["n1"], cfg["n2"], cfg["omega1"],
                                   cfg["omega2"], cfg.get("mu", 0.0))
    window = drive.default_window(atom, n_samples=cfg["n_times"])
    traj = coherent.evolve(atom, drive, window, rtol=min(cfg["tol"] * 10, 1e-8))
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out / "trajectory.csv", extra_comments=_headers(cfg))
    tm, pm = coherent.pf_max_coherent(atom, drive)
    print(f"p_max = {pm:.9g} at t*gamma_f = {tm:.9g}")
    return 0


def cmd_reference(args):
    keys = ("gamma_ratio", "delta1", "delta2", "t_star", "out", "tol", "seed")
    cfg = _effective(args, keys)
    atom = _atom_from(cfg)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    heads = _headers(cfg)
    gf = atom.gamma_f

    horizons = np.linspace(0.0, 12.0, 121)
    _write_table(out / "pmax_bound.csv", heads, ["horizon*gamma_f", "p_max_bound"],
                 [(float(h), float(optimal.pmax_bound(atom, h))) for h in horizons])

    grid = np.linspace(-12.0, 12.0, 481)
    m1 = optimal.spectral_marginal_1(atom)
    m2 = optimal.spectral_marginal_2(atom)
    ps, pd = optimal.sum_diff_densities(atom)
    _write_table(out / "spectral_densities.csv", heads,
                 ["detuning_over_gamma_f", "marginal1", "marginal2",
                  "sum_density", "diff_density"],
                 [(float(x), float(m1(x)), float(m2(x)), float(ps(x)), float(pd(x)))
                  for x in grid])

    t_star = cfg["t_star"]
    _, p1, p2 = optimal.arrival_densities(atom, t_star)
    tgrid = np.linspace(t_star - 12.0 / gf, t_star, 481)
    _write_table(out / "arrival_densities.csv", heads,
                 ["t*gamma_f", "p1", "p2"],
                 [(float(t), float(p1(t)), float(p2(t))) for t in tgrid])

    tau1, tau2 = optimal.arrival_expectations(atom, t_star)
    tau_r = absorption.residence_time(atom, OptimalState(atom, t_star))
    summary = {"gamma_e_over_gamma_f": atom.ratio,
               "tau1": tau1, "tau2": tau2, "tau2_minus_tau1": tau2 - tau1,
               "residence_time_gamma_f": tau_r * gf,
               "pmax_bound_inf": 1.0}
    (out / "reference.json").write_text(json.dumps(
        {"headers": heads, **summary}, indent=2))
    print(json.dumps({k: round(float(v), 9) for k, v in summary.items()}))
    return 0


def _preset_path(name):
    return resources.files("tpaopt.presets").joinpath(f"{name}.json")


def cmd_sweep(args):
    keys = ("gamma_ratio", "family", "mu_free", "ratios", "grid", "out",
            "jobs", "seed", "tol", "fast", "preset")
    cfg = _effective(args, keys)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    if cfg.get("preset"):
        spec = json.loads(_preset_path(cfg["preset"]).read_text())
        return _run_preset(spec, cfg, out)
    fam = _norm_family(cfg["family"])
    ratios = cfg.get("ratios") or [0.01, 0.1, 1.0, 10.0, 100.0]
    if isinstance(ratios, str):
        ratios = [float(x) for x in ratios.split(",")]
    grid = sweeps.ratio_sweep(fam, ratios, seed=cfg["seed"], jobs=cfg["jobs"])
    grid.to_csv(out / "ratio_sweep.csv", extra_comments=_headers(cfg))
    grid.to_json(out / "ratio_sweep.json", extra_meta={"headers": _headers(cfg)})
    print(f"wrote {out / 'ratio_sweep.csv'}")
    return 0


def _run_preset(spec, cfg, out):
    heads = _headers({**cfg, "preset_description": spec.get("description", "")})
    for job in spec["jobs"]:
        kind = job["kind"]
        path = out / job["output"]
        if kind == "ratio_sweep":
            grid = sweeps.ratio_sweep(job["family"], job["ratios"],
                                      tuple(job.get("delay_policies",
                                                    ("mu_free", "mu_zero"))),
                                      seed=cfg["seed"], jobs=cfg["jobs"])
            grid.to_csv(path, extra_comments=heads)
            if job.get("entropy_output"):
                rows = [(c["ratio"], c.get("entropy_bits", 0.0), c["mu_free"])
                        for c in grid.cells]
                _write_table(out / job["entropy_output"], heads,
                             ["ratio", "entropy_bits", "mu_free"], rows)
        elif kind == "comparison_sweep":
            cols, rows = _comparison(job, cfg)
            _write_table(path, heads, cols, rows)
        elif kind == "params_sweep":
            rows = asymptotic_checks(job["family"], job["ratios"],
                                     mu_free=job.get("mu_free", True),
                                     seed=cfg["seed"])
            cols = sorted({k for r in rows for k in r})
            _write_table(path, heads, cols,
                         [tuple(r.get(c, "") for c in cols) for r in rows])
        elif kind == "exponential_sweep":
            cols, rows = _exponential_rows(job, cfg)
            _write_table(path, heads, cols, rows)
        elif kind == "optimized_curve":
            _optimized_curve(job, cfg, heads, path)
        elif kind == "sensitivity":
            atom = Atom(job["gamma_ratio"], 1.0)
            if cfg.get("grid"):
                job["axis1"][2] = job["axis2"][2] = cfg["grid"]
            ax = np.linspace(*job["axis1"]), np.linspace(*job["axis2"])
            grid = sweeps.sensitivity_map(atom, job["family"], ax[0], ax[1],
                                          delay_policy=job.get("policy", "reoptimize"),
                                          seed=cfg["seed"], jobs=cfg["jobs"])
            grid.to_csv(path, extra_comments=heads)
        elif kind == "detuning":
            n = job.get("n_fast", 21) if cfg.get("fast") else job.get("n", 41)
            n = cfg.get("grid") or n
            d = np.linspace(-job.get("range", 3.0), job.get("range", 3.0), n)
            grid = sweeps.detuning_map(job["family"], job["gamma_ratio"], d, d,
                                       seed=cfg["seed"], jobs=cfg["jobs"],
                                       n_starts=job.get("n_starts", 4))
            grid.to_csv(path, extra_comments=heads)
            grid.to_json(path.with_suffix(".json"))
        elif kind == "biphoton_density":
            _biphoton_density(job, cfg, heads, out)
        else:
            raise ValueError(f"unknown preset job kind {kind!r}")
        print(f"wrote {path}")
    return 0


def _comparison(job, cfg):
    ratios = job["ratios"]
    cols = ["ratio", "entangled_mu_free", "product_mu_free",
            "entangled_mu_zero", "product_mu_zero", "improvement_mu_free"]
    rows = []
    for r in ratios:
        vals = {}
        for fam, tag in (("entangled_gaussian", "entangled"),
                         ("gaussian_product", "product")):
            for free in (True, False):
                res = optimize_pulse(OptimizationProblem(
                    Atom(r, 1.0), fam, mu_free=free, seed=cfg["seed"]))
                vals[f"{tag}_{'mu_free' if free else 'mu_zero'}"] = res.p_max
        rows.append((float(r), vals["entangled_mu_free"], vals["product_mu_free"],
                     vals["entangled_mu_zero"], vals["product_mu_zero"],
                     vals["entangled_mu_free"] - vals["product_mu_free"]))
    return cols, rows


def _exponential_rows(job, cfg):
    cols = ["ratio", "rising_p_max", "rising_omega1", "rising_omega2",
            "decaying_shift_p_max", "decaying_noshift_p_max"]
    rows = []
    for r in job["ratios"]:
        atom = Atom(r, 1.0)
        om1, om2, p_rise = absorption.pf_max_rising(atom)
        shift = optimize_pulse(OptimizationProblem(
            atom, "decaying_exp", mu_free=True, seed=cfg["seed"]))
        noshift = optimize_pulse(OptimizationProblem(
            atom, "decaying_exp", mu_free=False, seed=cfg["seed"]))
        rows.append((float(r), p_rise, om1, om2, shift.p_max, noshift.p_max))
    return cols, rows


def _optimized_curve(job, cfg, heads, path):
    atom = Atom(job["gamma_ratio"], 1.0)
    fam = job["family"]
    if fam == "coherent":
        res = optimize_pulse(OptimizationProblem(
            atom, fam, mu_free=job.get("mu_free", True), seed=cfg["seed"]))
        drive = coherent.CoherentDrive(1.0, 1.0, res.params["omega1"],
                                       res.params["omega2"],
                                       res.params.get("mu", 0.0))
        traj = coherent.evolve(atom, drive)
        rows = [(float(t), float(p), float(drive.envelope1(t) ** 2),
                 float(drive.envelope2(t) ** 2))
                for t, p in zip(traj.times, traj.rho_ff)]
    else:
        res = optimize_pulse(OptimizationProblem(
            atom, fam, mu_free=job.get("mu_free", True), seed=cfg["seed"]))
        from .optimize import build_state
        state = build_state(OptimizationProblem(atom, fam), res.params)
        curve = absorption.excitation_curve(atom, state)
        p1, p2 = _squared_profiles(state)
        rows = [(float(t), float(p), float(p1(t)), float(p2(t)))
                for t, p in zip(curve.times, curve.probabilities)]
    _write_table(path, heads + [f"params: {json.dumps(res.params, default=float)}",
                                f"p_max: {res.p_max:.12g}"],
                 ["t*gamma_f", "P_f_or_rho_ff", "profile1_sq", "profile2_sq"], rows)


def _biphoton_density(job, cfg, heads, out):
    atom = Atom(job["gamma_ratio"], 1.0)
    fam = job["family"]
    if fam == "entangled_gaussian":
        res = optimize_pulse(OptimizationProblem(
            atom, fam, mu_free=True, seed=cfg["seed"]))
        st = EntangledGaussian(res.params["omega_plus"], res.params["omega_minus"],
                               res.params.get("mu", 0.0))
        w = 3.0 * np.sqrt(st.sigma_t2)
        t = np.linspace(-w + st.mu / 2, w + st.mu, job.get("n", 81))
        dens_t = np.abs(st.amplitude(t[:, None], t[None, :])) ** 2
        op, om = st.omega_plus, st.omega_minus
        wmax = 1.5 * max(op, om)
        om_grid = np.linspace(-wmax, wmax, job.get("n", 81))
        o2, o1 = np.meshgrid(om_grid, om_grid, indexing="ij")
        dens_w = (2.0 / (np.pi * op * om)) * np.exp(
            -((o1 + o2) / op) ** 2 - ((o2 - o1) / om) ** 2)
    else:
        st = OptimalState(atom, 0.0)
        ge, gf = atom.gamma_e, atom.gamma_f
        w = 8.0 / min(ge, gf)
        t = np.linspace(-w, 0.0, job.get("n", 81))
        p_joint, _, _ = optimal.arrival_densities(atom, 0.0)
        dens_t = p_joint(t[:, None], t[None, :])
        wmax = 3.0 * (ge + gf)
        om_grid = np.linspace(-wmax, wmax, job.get("n", 81))
        o2, o1 = np.meshgrid(om_grid, om_grid, indexing="ij")
        dens_w = (ge * gf / (4 * np.pi**2)) / (
            (o1**2 + ge**2 / 4) * ((o1 + o2) ** 2 + gf**2 / 4))
        om_grid_t = t
    for tag, grid_ax, dens in (("time", t, dens_t), ("freq", om_grid, dens_w)):
        path = out / job["output"].replace(".csv", f"_{tag}.csv")
        lines = [f"# {h}" for h in heads]
        lines.append("axis1,axis2,density")
        for i, a in enumerate(grid_ax):
            for j, b in enumerate(grid_ax):
                lines.append(f"{a:.10g},{b:.10g},{dens[i, j]:.10g}")
        path.write_text("\n".join(lines) + "\n")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tpaopt",
        description="Two-photon excitation of a ladder three-level atom: "
                    "curves, optima, bounds, and sweep datasets.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value or JSON config file")
    common.add_argument("--gamma-ratio", dest="gamma_ratio", type=float)
    common.add_argument("--delta1", type=float)
    common.add_argument("--delta2", type=float)
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--tol", type=float)

    state_args = argparse.ArgumentParser(add_help=False)
    state_args.add_argument("--family")
    for flag in ("omega1", "omega2", "omega-plus", "omega-minus", "mu",
                 "t-shift", "t-star", "t0", "n1", "n2"):
        state_args.add_argument(f"--{flag}", dest=flag.replace("-", "_"),
                                type=float)

    p = sub.add_parser("curve", parents=[common, state_args],
                       help="excitation-probability curve for one state")
    p.add_argument("--n-times", dest="n_times", type=int)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("optimize", parents=[common, state_args],
                       help="maximize p_max over pulse parameters")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mu-free", dest="mu_free", action="store_true", default=None)
    g.add_argument("--mu-zero", dest="mu_free", action="store_false")
    p.add_argument("--n-starts", dest="n_starts", type=int)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", parents=[common],
                       help="ratio sweeps, sensitivity and detuning maps")
    p.add_argument("--preset")
    p.add_argument("--family")
    p.add_argument("--ratios")
    p.add_argument("--grid", type=int)
    p.add_argument("--fast", action="store_true", default=None)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mu-free", dest="mu_free", action="store_true", default=None)
    g.add_argument("--mu-zero", dest="mu_free", action="store_false")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reference", parents=[common],
                       help="matched-state reference quantities")
    p.add_argument("--t-star", dest="t_star", type=float)
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("coherent", parents=[common, state_args],
                       help="master-equation trajectory for coherent pulses")
    p.add_argument("--n-times", dest="n_times", type=int)
    p.set_defaults(func=cmd_coherent)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
