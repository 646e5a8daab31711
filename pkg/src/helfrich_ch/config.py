"""
Run configuration: a sectioned key = value file read with configparser.

Vectors are comma separated, matrices are rows separated by ``;``.  Unknown
keys are rejected so typos do not silently fall back to defaults.
"""

from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .fields import ModelParams, validate_mobility
from .potential import InteractionMatrix, flory_huggins_matrix


class ConfigError(ValueError):
    pass


DEFAULT_TEXT = """\
[model]
kappa = 1.0
sigma = 1.0
b = 1.0
epsilon = 0.1
beta = 1.0
radius = 1.0
n_components = 3
lambda = 1.0, -0.5, 0.0
A = 0, -3.5, -3.5; -3.5, 0, -3.5; -3.5, -3.5, 0
alpha = 0.4, 0.35, 0.25
mobility = projector

[discretization]
lmax = 24
dt = 1e-4
t_final = 1.0
h_reg = 1e-4
stabilization = auto

[init]
seed = 0
amplitude = 0.1
l_init = 4
margin = 0.05
u_amplitude = 0.01

[output]
outdir = run
diagnostics_every = 10
snapshot_every = 0
checkpoint_every = 1000
"""

_KEYS = {
    "model": {"kappa", "sigma", "b", "epsilon", "beta", "radius", "n_components", "lambda", "a",
              "alpha", "mobility"},
    "discretization": {"lmax", "dt", "t_final", "h_reg", "stabilization"},
    "init": {"seed", "amplitude", "l_init", "margin", "u_amplitude"},
    "output": {"outdir", "diagnostics_every", "snapshot_every", "checkpoint_every"},
}


@dataclass(frozen=True)
class InitConfig:
    seed: int = 0
    amplitude: float = 0.1
    l_init: int = 4
    margin: float = 0.05
    u_amplitude: float = 0.01


@dataclass(frozen=True)
class OutputConfig:
    outdir: str = "run"
    diagnostics_every: int = 10
    snapshot_every: int = 0
    checkpoint_every: int = 1000


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    lmax: int = 24
    t_final: float = 1.0
    init: InitConfig = field(default_factory=InitConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    text: str = ""

    @property
    def nsteps(self) -> int:
        return int(round(self.t_final / self.params.dt))

    def digest(self) -> bytes:
        """SHA-256 of the parsed model/discretisation/init values."""
        p = self.params
        parts = [p.kappa, p.sigma, p.b, p.eps, p.beta, p.R, p.h, p.stabilization, p.dt,
                 self.lmax, self.init.seed, self.init.amplitude, self.init.l_init,
                 self.init.margin, self.init.u_amplitude]
        blob = repr(parts).encode() + p.Lambda.tobytes() + p.alpha.tobytes() + p.A.A.tobytes() \
            + p.mobility.L.tobytes()
        return hashlib.sha256(blob).digest()

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def _floats(text: str, key: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.replace(",", " ").split()])
    except ValueError as exc:
        raise ConfigError(f"{key}: expected numbers, got {text!r}") from exc


def _matrix(text: str, key: str) -> np.ndarray:
    rows = [r for r in text.split(";") if r.strip()]
    m = [_floats(r, key) for r in rows]
    if len({len(r) for r in m}) != 1:
        raise ConfigError(f"{key}: rows have different lengths")
    return np.array(m)


def _get(sec, key, conv, default):
    if key not in sec:
        return default
    raw = sec[key]
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"{sec.name}.{key}: cannot parse {raw!r}") from exc


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read_string(DEFAULT_TEXT)
    user = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        user.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for sec in user.sections():
        if sec not in _KEYS:
            raise ConfigError(f"unknown section [{sec}]")
        for key in user[sec]:
            if key not in _KEYS[sec]:
                raise ConfigError(f"unknown key {sec}.{key}")
            cp[sec][key] = user[sec][key]

    m, d, i, o = cp["model"], cp["discretization"], cp["init"], cp["output"]
    n = _get(m, "n_components", int, 3)
    lam = _floats(m["lambda"], "model.lambda")
    alpha = _floats(m["alpha"], "model.alpha")
    user_A = user.has_section("model") and "a" in user["model"]
    A = _matrix(m["a"], "model.A") if user_A or n == 3 else flory_huggins_matrix(n, 3.5).A
    mob = m["mobility"].strip()
    L = np.eye(n) - np.ones((n, n)) / n if mob == "projector" else _matrix(mob, "model.mobility")
    for name, arr in (("lambda", lam), ("alpha", alpha)):
        if arr.shape != (n,):
            raise ConfigError(f"model.{name}: expected {n} entries, got {arr.size}")
    if A.shape != (n, n):
        raise ConfigError(f"model.A: expected {n}x{n}, got {A.shape}")
    stab = d["stabilization"].strip()
    try:
        S = None if stab == "auto" else float(stab)
        mobility = validate_mobility(L)
        params = ModelParams(
            kappa=_get(m, "kappa", float, 1.0), sigma=_get(m, "sigma", float, 1.0),
            b=_get(m, "b", float, 1.0), eps=_get(m, "epsilon", float, 0.1),
            beta=_get(m, "beta", float, 1.0), R=_get(m, "radius", float, 1.0),
            Lambda=lam, A=InteractionMatrix.from_array(A), alpha=alpha, mobility=mobility,
            h=_get(d, "h_reg", float, 1e-4), S=S, dt=_get(d, "dt", float, 1e-4),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    lmax = _get(d, "lmax", int, 24)
    if lmax < 2:
        raise ConfigError("discretization.lmax must be at least 2")
    t_final = _get(d, "t_final", float, 1.0)
    if not t_final > 0:
        raise ConfigError("discretization.t_final must be positive")
    init = InitConfig(_get(i, "seed", int, 0), _get(i, "amplitude", float, 0.1),
                      _get(i, "l_init", int, 4), _get(i, "margin", float, 0.05),
                      _get(i, "u_amplitude", float, 0.01))
    if init.amplitude < 0:
        raise ConfigError("init.amplitude must be nonnegative")
    out = OutputConfig(o["outdir"].strip(), _get(o, "diagnostics_every", int, 10),
                       _get(o, "snapshot_every", int, 0), _get(o, "checkpoint_every", int, 1000))
    if os.environ.get("HELFRICH_CH_OUTDIR"):
        out = replace(out, outdir=os.environ["HELFRICH_CH_OUTDIR"])
    return RunConfig(params, lmax, t_final, init, out, text)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def default_config() -> RunConfig:
    return parse_config(DEFAULT_TEXT)
