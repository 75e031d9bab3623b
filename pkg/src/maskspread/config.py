"""Experiment configuration files and the built-in figure presets.

A config is a TOML document::

    name = "fig2"
    output = "fig2.csv"

    [degree]
    kind = "poisson"            # or "empirical" with degrees = [...], probabilities = [...]
    mean = 5.0

    [masks]                     # either eps_in/eps_out/baseline_T or t_matrix
    m = [0.3, 0.6, 0.1]
    eps_in = [0.2, 0.5, 1.0]
    eps_out = [0.3, 0.5, 1.0]
    baseline_T = 0.6
    labels = ["surgical", "cloth", "no-mask"]

    [sweep]
    parameter = "mean_degree"   # mean_degree | baseline_T | mask_fraction | no_mask_fraction | inout_split
    values = [1.0, 2.0, 3.0]    # or start / stop / step (stop inclusive)

    [simulation]
    n_nodes = 100000
    trials = 1000
    emergence_threshold = 0.05
    absolute_threshold = false
    master_seed = 2021
    seed_policies = ["random", "surgical"]
    regenerate_network = true
    threads = 1

    [flags]
    analytic_only = false
    sim_only = false
    verbose = false

Sweep semantics for the prevalence parameters (``x`` is the no-mask share
``m[2]`` of the base ensemble, ``s`` the surgical share among mask wearers):

* ``mask_fraction`` v: ``[v, 1-v]`` for two types, ``[v(1-x), (1-v)(1-x), x]`` for three;
* ``no_mask_fraction`` v: ``[s(1-v), (1-s)(1-v), v]``;
* ``inout_split`` v: ``[1-x-v, v, x]``.

Prevalences that reach 0 are clamped to ``PREVALENCE_FLOOR`` (with a warning)
so the ensemble stays positive regular.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import tomli
import tomli_w

from . import degree
from .errors import ConfigError, ValidationError
from .masks import MaskEnsemble

SWEEP_PARAMETERS = ("mean_degree", "baseline_T", "mask_fraction", "no_mask_fraction", "inout_split")
PREVALENCE_FLOOR = 1e-9
DESK_SCALE = {"n_nodes": 100_000, "trials": 1000}
PAPER_SCALE = {"n_nodes": 1_000_000, "trials": 5000}


@dataclass
class SimulationSpec:
    n_nodes: int = DESK_SCALE["n_nodes"]
    trials: int = DESK_SCALE["trials"]
    emergence_threshold: float = 0.05
    absolute_threshold: bool = False
    master_seed: int = 2021
    seed_policies: list = field(default_factory=lambda: ["random"])
    regenerate_network: bool = True
    threads: int = 1


@dataclass
class ExperimentConfig:
    name: str
    degree: dict
    masks: dict
    sweep_parameter: str
    sweep_values: list
    simulation: SimulationSpec = field(default_factory=SimulationSpec)
    output: str = "results.csv"
    analytic_only: bool = False
    sim_only: bool = False
    verbose: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "output": self.output,
            "degree": dict(self.degree),
            "masks": dict(self.masks),
            "sweep": {"parameter": self.sweep_parameter, "values": list(self.sweep_values)},
            "simulation": dataclasses.asdict(self.simulation),
            "flags": {"analytic_only": self.analytic_only, "sim_only": self.sim_only, "verbose": self.verbose},
        }

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return _parse(d)

    def base_model(self) -> degree.DegreeModel:
        return degree.from_dict(self.degree)

    def base_ensemble(self) -> MaskEnsemble:
        return MaskEnsemble.from_dict(self.masks)

    def resolve_policies(self, ensemble) -> list:
        """Seed policies as ``"random"`` or 0-based type indices."""
        out = []
        for p in self.simulation.seed_policies:
            if p == "random":
                out.append("random")
            elif isinstance(p, str) and p in ensemble.labels:
                out.append(ensemble.labels.index(p))
            elif isinstance(p, int) and 1 <= p <= ensemble.M:
                out.append(p - 1)
            else:
                raise ConfigError(f"simulation.seed_policies: unknown policy {p!r}")
        return out

    def point(self, value):
        """Degree model and mask ensemble for one sweep value."""
        return sweep_point(self.base_model(), self.base_ensemble(), self.sweep_parameter, value)


def _clamp_simplex(m):
    m = np.asarray(m, dtype=float)
    if np.any(m < PREVALENCE_FLOOR):
        warnings.warn(
            f"prevalence vector {m.tolist()} clamped at {PREVALENCE_FLOOR} to keep every type present",
            RuntimeWarning,
            stacklevel=3,
        )
        m = np.maximum(m, PREVALENCE_FLOOR)
    return m / m.sum()


def sweep_point(model, ensemble, parameter, value):
    v = float(value)
    if parameter == "mean_degree":
        if not isinstance(model, degree.Poisson):
            raise ConfigError("sweep.parameter: mean_degree sweeps need a Poisson degree model")
        return degree.Poisson(v), ensemble
    if parameter == "baseline_T":
        if not ensemble.rank_one:
            raise ConfigError("sweep.parameter: baseline_T sweeps need an efficiency-built ensemble")
        return model, ensemble.with_baseline(v)
    m = ensemble.m
    if parameter == "mask_fraction":
        if ensemble.M == 2:
            new = [v, 1 - v]
        elif ensemble.M == 3:
            x = m[2]
            new = [v * (1 - x), (1 - v) * (1 - x), x]
        else:
            raise ConfigError("sweep.parameter: mask_fraction needs 2 or 3 mask types")
    elif parameter in ("no_mask_fraction", "inout_split"):
        if ensemble.M != 3:
            raise ConfigError(f"sweep.parameter: {parameter} needs 3 mask types")
        if parameter == "no_mask_fraction":
            s = m[0] / (m[0] + m[1])
            new = [s * (1 - v), (1 - s) * (1 - v), v]
        else:
            x = m[2]
            new = [1 - x - v, v, x]
    else:
        raise ConfigError(f"sweep.parameter: unknown parameter {parameter!r}")
    return model, ensemble.with_prevalence(_clamp_simplex(new))


def _sweep_values(sweep: dict) -> list:
    if "values" in sweep:
        if any(k in sweep for k in ("start", "stop", "step")):
            raise ConfigError("sweep: give either values or start/stop/step, not both")
        vals = sweep["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError("sweep.values: must be a non-empty array")
        return [float(v) for v in vals]
    try:
        start, stop, step = (float(sweep[k]) for k in ("start", "stop", "step"))
    except KeyError as exc:
        raise ConfigError(f"sweep: missing {exc.args[0]} (or give values)") from None
    if step <= 0 or stop < start:
        raise ConfigError("sweep: need step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(n)]


def _check_sweep_domain(parameter, values, ensemble):
    for i, v in enumerate(values):
        where = f"sweep.values[{i}] = {v!r}"
        if not math.isfinite(v):
            raise ConfigError(f"{where}: not finite")
        if parameter == "mean_degree" and v <= 0:
            raise ConfigError(f"{where}: mean degree must be positive")
        if parameter == "baseline_T" and not 0 < v <= 1:
            raise ConfigError(f"{where}: baseline_T must lie in (0, 1]")
        if parameter in ("mask_fraction", "no_mask_fraction") and not 0 <= v <= 1:
            raise ConfigError(f"{where}: fraction must lie in [0, 1]")
        if parameter == "inout_split" and not 0 <= v <= 1 - ensemble.m[2] + 1e-12:
            raise ConfigError(f"{where}: must lie in [0, 1 - no-mask share]")


_TOP_KEYS = {"name", "output", "degree", "masks", "sweep", "simulation", "flags"}


def _parse(d: dict) -> ExperimentConfig:
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    for key in ("degree", "masks", "sweep"):
        if not isinstance(d.get(key), dict):
            raise ConfigError(f"{key}: missing table")
    try:
        model = degree.from_dict(d["degree"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"degree: {exc}") from None
    try:
        ens = MaskEnsemble.from_dict(d["masks"])
    except (ValidationError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"masks: {exc}") from None

    sweep = d["sweep"]
    parameter = sweep.get("parameter")
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"sweep.parameter: expected one of {SWEEP_PARAMETERS}, got {parameter!r}")
    values = _sweep_values(sweep)
    _check_sweep_domain(parameter, values, ens)

    sim_d = dict(d.get("simulation", {}))
    known = {f.name for f in dataclasses.fields(SimulationSpec)}
    extra = set(sim_d) - known
    if extra:
        raise ConfigError(f"simulation: unknown key(s) {', '.join(sorted(extra))}")
    sim = SimulationSpec(**sim_d)
    for name, typ in (("n_nodes", int), ("trials", int), ("master_seed", int), ("threads", int)):
        if not isinstance(getattr(sim, name), typ) or isinstance(getattr(sim, name), bool):
            raise ConfigError(f"simulation.{name}: expected an integer")
    if sim.n_nodes < 2 or sim.trials < 1 or sim.threads < 1 or sim.master_seed < 0:
        raise ConfigError("simulation: need n_nodes >= 2, trials >= 1, threads >= 1, master_seed >= 0")
    thr = sim.emergence_threshold
    if sim.absolute_threshold and not thr >= 1:
        raise ConfigError("simulation.emergence_threshold: absolute thresholds are node counts >= 1")
    if not sim.absolute_threshold and not 0 < thr < 1:
        raise ConfigError("simulation.emergence_threshold: must lie in (0, 1)")
    sim.emergence_threshold = float(thr)
    if not isinstance(sim.seed_policies, list) or not sim.seed_policies:
        raise ConfigError("simulation.seed_policies: must be a non-empty array")

    flags = d.get("flags", {})
    cfg = ExperimentConfig(
        name=str(d.get("name", "experiment")),
        degree=_clean_degree(d["degree"]),
        masks=_clean_masks(d["masks"], ens),
        sweep_parameter=parameter,
        sweep_values=values,
        simulation=sim,
        output=str(d.get("output", "results.csv")),
        analytic_only=bool(flags.get("analytic_only", False)),
        sim_only=bool(flags.get("sim_only", False)),
        verbose=bool(flags.get("verbose", False)),
    )
    if cfg.analytic_only and cfg.sim_only:
        raise ConfigError("flags: analytic_only and sim_only are mutually exclusive")
    cfg.resolve_policies(ens)
    return cfg


def _clean_degree(d):
    # keep the user's numbers verbatim (no renormalisation) so configs round-trip exactly
    if d["kind"] == "poisson":
        return {"kind": "poisson", "mean": float(d["mean"])}
    return {
        "kind": "empirical",
        "degrees": [int(k) for k in d["degrees"]],
        "probabilities": [float(p) for p in d["probabilities"]],
    }


def _clean_masks(d, ens):
    out = {"m": [float(v) for v in d["m"]]}
    if "t_matrix" in d:
        out["t_matrix"] = [[float(v) for v in row] for row in d["t_matrix"]]
    else:
        out["eps_in"] = [float(v) for v in d["eps_in"]]
        out["eps_out"] = [float(v) for v in d["eps_out"]]
        out["baseline_T"] = float(d["baseline_T"])
    out["labels"] = list(ens.labels)
    if not ens.strict:
        out["strict"] = False
    return out


def loads(text: str) -> ExperimentConfig:
    try:
        d = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    return _parse(d)


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return loads(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# --- presets -----------------------------------------------------------------

def _grid(start, stop, step=0.1):
    return _sweep_values({"start": start, "stop": stop, "step": step})


_THREE = {"eps_in": [0.2, 0.5, 1.0], "eps_out": [0.3, 0.5, 1.0], "baseline_T": 0.6,
          "labels": ["surgical", "cloth", "no-mask"]}
_INOUT = {"eps_in": [0.3, 0.7, 1.0], "eps_out": [0.7, 0.3, 1.0], "baseline_T": 0.6,
          "labels": ["inward-good", "outward-good", "no-mask"]}


def _preset(name, mean, masks, parameter, values):
    return {
        "name": name,
        "output": f"{name}.csv",
        "degree": {"kind": "poisson", "mean": float(mean)},
        "masks": masks,
        "sweep": {"parameter": parameter, "values": values},
        "simulation": {"seed_policies": ["random", *masks["labels"]]},
    }


def _build_presets():
    p = {}
    p["fig2"] = _preset("fig2", 5, {"m": [0.3, 0.6, 0.1], **_THREE}, "mean_degree", _grid(1, 10, 1))
    p["fig3"] = _preset("fig3", 5, {"m": [0.3, 0.6, 0.1], **_THREE}, "baseline_T", _grid(0.1, 0.9))
    for md in (8, 10, 15, 20):
        masks = {"m": [0.5, 0.5], "eps_in": [0.2, 0.5], "eps_out": [0.3, 0.5], "baseline_T": 0.6,
                 "labels": ["surgical", "cloth"]}
        p[f"fig4-md{md}"] = _preset(f"fig4-md{md}", md, masks, "mask_fraction", _grid(0.1, 0.9))
    for x in (10, 20, 40):
        share = x / 100
        m = [round(0.5 * (1 - share), 12), round(0.5 * (1 - share), 12), share]
        p[f"fig5-x{x}"] = _preset(f"fig5-x{x}", 10, {"m": m, **_THREE}, "mask_fraction", _grid(0.1, 0.9))
        p[f"fig6-x{x}"] = _preset(f"fig6-x{x}", 10, {"m": m, **_INOUT}, "inout_split", _grid(0.1, 1 - share))
    return p


_PRESETS = _build_presets()


def list_presets() -> list:
    return list(_PRESETS)


def preset(name) -> ExperimentConfig:
    try:
        return _parse(_PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(_PRESETS)}") from None
