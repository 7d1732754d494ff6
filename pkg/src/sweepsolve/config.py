"""Problem files: strict JSON key/value documents describing one simulation.

Unknown keys are fatal anywhere in the document (typos in matrix names must
not silently alter a model), and a parsed problem serializes back to an
identical document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .diagnostics import SweepingProblem
from .integrator import constant_perturbation, zero_perturbation
from .lcs import LCSystem, SweepingReformulation, lcs_to_sweeping
from .sets import Ball, Box, Halfspace, NonnegativeOrthant, TranslatingSet
from .signals import Constant, PiecewiseLinear, SignOfSine, Sine

_TOP_KEYS = {"kind", "horizon", "initial_state", "schedule", "solver",
             "matrices", "input", "set", "drift"}
_SCHEDULE_KEYS = {"n", "eps_exponent", "eta_exponent"}
_SOLVER_KEYS = {"quadrature_subintervals", "projection_max_iters", "warm_start",
                "slack_fraction", "slack_seed"}
_MATRIX_KEYS = {"A", "B", "C", "E", "F", "G"}

_SOLVER_DEFAULTS = {
    "quadrature_subintervals": 8,
    "projection_max_iters": 100_000,
    "warm_start": True,
    "slack_fraction": None,
    "slack_seed": 0,
}


def _require_keys(section: dict, allowed: set, required: set, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(section)
    if missing:
        raise ConfigError(f"missing keys in {where}: {sorted(missing)}")


def _vector(value, where: str) -> np.ndarray:
    try:
        vec = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where} is not a numeric array: {exc}") from None
    if vec.ndim != 1:
        raise ConfigError(f"{where} must be a flat array")
    return vec

def _matrix(value, where: str) -> np.ndarray:
    try:
        mat = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where} is not a numeric matrix: {exc}") from None
    if mat.ndim != 2:
        raise ConfigError(f"{where} must be a nested (row-major) array")
    return mat


def parse_signal(spec: dict, where: str = "input"):
    _require_keys(spec, {"kind", "amplitude", "frequency", "offset", "value",
                         "times", "values"}, {"kind"}, where)
    kind = spec["kind"]
    if kind == "sine":
        _require_keys(spec, {"kind", "amplitude", "frequency", "offset"},
                      {"kind", "amplitude", "frequency"}, where)
        return Sine(float(spec["amplitude"]), float(spec["frequency"]),
                    float(spec.get("offset", 0.0)))
    if kind == "sign_of_sine":
        _require_keys(spec, {"kind", "frequency"}, {"kind", "frequency"}, where)
        return SignOfSine(float(spec["frequency"]))
    if kind == "constant":
        _require_keys(spec, {"kind", "value"}, {"kind", "value"}, where)
        return Constant(float(spec["value"]))
    if kind == "piecewise_linear":
        _require_keys(spec, {"kind", "times", "values"},
                      {"kind", "times", "values"}, where)
        return PiecewiseLinear(tuple(float(t) for t in spec["times"]),
                               tuple(float(v) for v in spec["values"]))
    raise ConfigError(f"unknown signal kind {kind!r} in {where}")


def signal_to_dict(signal) -> dict:
    if isinstance(signal, Sine):
        return {"kind": "sine", "amplitude": signal.amplitude,
                "frequency": signal.frequency, "offset": signal.offset}
    if isinstance(signal, SignOfSine):
        return {"kind": "sign_of_sine", "frequency": signal.frequency}
    if isinstance(signal, Constant):
        return {"kind": "constant", "value": signal.value}
    if isinstance(signal, PiecewiseLinear):
        return {"kind": "piecewise_linear", "times": list(signal.times),
                "values": list(signal.values)}
    raise ConfigError(f"signal {type(signal).__name__} has no file form")


def parse_set(spec: dict, where: str = "set"):
    _require_keys(spec, {"kind", "normal", "offset", "lower", "upper", "center",
                         "radius", "dimension", "base", "velocity"},
                  {"kind"}, where)
    kind = spec["kind"]
    if kind == "halfspace":
        _require_keys(spec, {"kind", "normal", "offset"}, {"kind", "normal", "offset"}, where)
        return Halfspace(_vector(spec["normal"], f"{where}.normal"), float(spec["offset"]))
    if kind == "box":
        _require_keys(spec, {"kind", "lower", "upper"}, {"kind", "lower", "upper"}, where)
        lower = [(-np.inf if v is None else float(v)) for v in spec["lower"]]
        upper = [(np.inf if v is None else float(v)) for v in spec["upper"]]
        return Box(np.array(lower), np.array(upper))
    if kind == "ball":
        _require_keys(spec, {"kind", "center", "radius"}, {"kind", "center", "radius"}, where)
        return Ball(_vector(spec["center"], f"{where}.center"), float(spec["radius"]))
    if kind == "nonnegative_orthant":
        _require_keys(spec, {"kind", "dimension"}, {"kind", "dimension"}, where)
        return NonnegativeOrthant(int(spec["dimension"]))
    if kind == "translating":
        _require_keys(spec, {"kind", "base", "velocity"}, {"kind", "base", "velocity"}, where)
        return TranslatingSet(parse_set(spec["base"], f"{where}.base"),
                              _vector(spec["velocity"], f"{where}.velocity"))
    raise ConfigError(f"unknown set kind {kind!r} in {where}")


def set_to_dict(set_) -> dict:
    if isinstance(set_, Halfspace):
        return {"kind": "halfspace", "normal": set_.normal.tolist(), "offset": set_.offset}
    if isinstance(set_, Box):
        return {"kind": "box",
                "lower": [None if v == -np.inf else v for v in set_.lower],
                "upper": [None if v == np.inf else v for v in set_.upper]}
    if isinstance(set_, Ball):
        return {"kind": "ball", "center": set_.center.tolist(), "radius": set_.radius}
    if isinstance(set_, NonnegativeOrthant):
        return {"kind": "nonnegative_orthant", "dimension": set_.dimension}
    if isinstance(set_, TranslatingSet):
        return {"kind": "translating", "base": set_to_dict(set_.base),
                "velocity": set_.velocity.tolist()}
    raise ConfigError(f"set {type(set_).__name__} has no file form")


def parse_drift(spec: dict, dimension: int, where: str = "drift"):
    _require_keys(spec, {"kind", "value"}, {"kind"}, where)
    kind = spec["kind"]
    if kind == "zero":
        return zero_perturbation(dimension)
    if kind == "constant":
        _require_keys(spec, {"kind", "value"}, {"kind", "value"}, where)
        value = _vector(spec["value"], f"{where}.value")
        if value.shape != (dimension,):
            raise ConfigError(f"{where}.value must match the state dimension {dimension}")
        return constant_perturbation(value)
    raise ConfigError(f"unknown drift kind {kind!r} in {where}")


@dataclass
class ProblemConfig:
    """Parsed, validated problem file."""

    kind: str
    horizon: float
    initial_state: np.ndarray
    n: int
    eps_exponent: float
    eta_exponent: float
    solver: dict
    # lcs payload
    system: LCSystem | None = None
    input_spec: dict | None = None
    # sweeping payload
    set_: object = None
    drift_spec: dict | None = None

    def to_dict(self) -> dict:
        doc = {
            "kind": self.kind,
            "horizon": self.horizon,
            "initial_state": self.initial_state.tolist(),
            "schedule": {"n": self.n, "eps_exponent": self.eps_exponent,
                         "eta_exponent": self.eta_exponent},
            "solver": dict(self.solver),
        }
        if self.kind == "lcs":
            sys = self.system
            doc["matrices"] = {
                "A": sys.A.tolist(), "B": sys.B.tolist(), "C": sys.C.tolist(),
                "E": sys.E.tolist(), "F": sys.F.tolist(), "G": sys.G.tolist(),
            }
            doc["input"] = dict(self.input_spec)
        else:
            doc["set"] = set_to_dict(self.set_)
            doc["drift"] = dict(self.drift_spec)
        return doc


def parse_problem(doc: dict) -> ProblemConfig:
    _require_keys(doc, _TOP_KEYS, {"kind", "horizon", "initial_state", "schedule"},
                  "problem file")
    kind = doc["kind"]
    if kind not in ("sweeping", "lcs"):
        raise ConfigError(f"problem kind must be 'sweeping' or 'lcs', got {kind!r}")
    horizon = float(doc["horizon"])
    if horizon <= 0.0:
        raise ConfigError("horizon must be positive")
    x0 = _vector(doc["initial_state"], "initial_state")

    _require_keys(doc["schedule"], _SCHEDULE_KEYS, {"n"}, "schedule")
    n = int(doc["schedule"]["n"])
    eps_exponent = float(doc["schedule"].get("eps_exponent", 2.1))
    eta_exponent = float(doc["schedule"].get("eta_exponent", 1.05))

    solver = dict(_SOLVER_DEFAULTS)
    if "solver" in doc:
        _require_keys(doc["solver"], _SOLVER_KEYS, set(), "solver")
        solver.update(doc["solver"])

    if kind == "lcs":
        for key in ("matrices", "input"):
            if key not in doc:
                raise ConfigError(f"lcs problems require the {key!r} section")
        if "set" in doc or "drift" in doc:
            raise ConfigError("lcs problems must not carry 'set'/'drift' sections")
        _require_keys(doc["matrices"], _MATRIX_KEYS, {"A", "B", "C", "E"}, "matrices")
        A = _matrix(doc["matrices"]["A"], "matrices.A")
        B = _matrix(doc["matrices"]["B"], "matrices.B")
        C = _matrix(doc["matrices"]["C"], "matrices.C")
        E = _matrix(doc["matrices"]["E"], "matrices.E")
        m = C.shape[0]
        F = (_vector(doc["matrices"]["F"], "matrices.F")
             if "F" in doc["matrices"] else np.zeros(m))
        G = (_matrix(doc["matrices"]["G"], "matrices.G")
             if "G" in doc["matrices"] else np.zeros((m, 1)))
        signal = parse_signal(doc["input"])
        try:
            system = LCSystem(A=A, B=B, C=C, E=E, F=F, G=G, u=signal, x0=x0,
                              u_continuous=signal.is_continuous)
        except ValueError as exc:
            raise ConfigError(f"inconsistent matrices: {exc}") from None
        return ProblemConfig(kind=kind, horizon=horizon, initial_state=x0, n=n,
                             eps_exponent=eps_exponent, eta_exponent=eta_exponent,
                             solver=solver, system=system,
                             input_spec=signal_to_dict(signal))

    for key in ("set", "drift"):
        if key not in doc:
            raise ConfigError(f"sweeping problems require the {key!r} section")
    if "matrices" in doc or "input" in doc:
        raise ConfigError("sweeping problems must not carry 'matrices'/'input' sections")
    try:
        set_ = parse_set(doc["set"])
    except ValueError as exc:
        raise ConfigError(f"invalid set: {exc}") from None
    drift_spec = dict(doc["drift"])
    parse_drift(drift_spec, x0.shape[0])  # validate now; rebuilt in build_problem
    return ProblemConfig(kind=kind, horizon=horizon, initial_state=x0, n=n,
                         eps_exponent=eps_exponent, eta_exponent=eta_exponent,
                         solver=solver, set_=set_, drift_spec=drift_spec)


def _reject_duplicate_keys(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} in problem file")
        seen.add(key)
    return dict(pairs)


def load_problem(path) -> ProblemConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh, object_pairs_hook=_reject_duplicate_keys)
    except OSError as exc:
        raise ConfigError(f"cannot read problem file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"problem file is not valid JSON: {exc}") from None
    return parse_problem(doc)


@dataclass
class BuiltProblem:
    config: ProblemConfig
    problem: SweepingProblem
    system: LCSystem | None = None
    reformulation: SweepingReformulation | None = None


def build_problem(config: ProblemConfig) -> BuiltProblem:
    """Turn a parsed problem file into a runnable SweepingProblem."""
    solver = config.solver
    common = dict(
        eps_exponent=config.eps_exponent,
        eta_exponent=config.eta_exponent,
        quadrature_subintervals=int(solver["quadrature_subintervals"]),
        max_proj_iters=int(solver["projection_max_iters"]),
        warm_start=bool(solver["warm_start"]),
        slack_fraction=(None if solver["slack_fraction"] is None
                        else float(solver["slack_fraction"])),
        slack_seed=int(solver["slack_seed"]),
    )
    if config.kind == "lcs":
        reform = lcs_to_sweeping(config.system, horizon=config.horizon)
        problem = SweepingProblem(
            set_=reform.set_descriptor,
            perturbation=reform.perturbation,
            x0=reform.z0,
            T=config.horizon,
            **common,
        )
        return BuiltProblem(config=config, problem=problem, system=config.system,
                            reformulation=reform)

    perturbation = parse_drift(config.drift_spec, config.initial_state.shape[0])
    problem = SweepingProblem(
        set_=config.set_,
        perturbation=perturbation,
        x0=config.initial_state,
        T=config.horizon,
        **common,
    )
    return BuiltProblem(config=config, problem=problem)
