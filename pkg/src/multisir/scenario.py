"""Scenario description, seeded random generation and scenario files.

Random draws use numpy's PCG64.  A seed ``k`` is expanded with
``SeedSequence(k)`` (retry ``a > 0`` uses ``SeedSequence((k, a))``) and split
into six child streams, one per sampled quantity in the fixed order
``beta, beta_w, alpha, gamma, gamma_w, w0``.  Matrices are filled row-major.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .integrator import IntegrationSettings
from .model import DimensionError, ModelParams, State, validate_params

DEFAULT_RECORD = ("R", "lambda_max", "lern", "wavg")
RECORDABLE = set(DEFAULT_RECORD)


class ScenarioError(ValueError):
    """Malformed scenario input; the message names the offending field."""


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    """Sampling intervals for random scenarios (defaults: the 10 + 5 node setup)."""

    n: int = 10
    m: int = 5
    gamma: tuple = (1.0, 3.0)
    gamma_w: tuple = (0.6, 0.75)
    beta: tuple = (0.01, 0.338)
    beta_w: tuple = (0.01, 0.2)
    c_w_offset: float = 0.01
    alpha: tuple = (0.0, 2.0)
    w0: tuple = (0.0, 1.0)
    s0: float = 0.95
    zero_self_flow: bool = True

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ScenarioError("generate.n / generate.m must be >= 1")
        for name in ("gamma", "gamma_w", "beta", "beta_w", "alpha", "w0"):
            lo, hi = getattr(self, name)
            if not (0 <= lo <= hi):
                raise ScenarioError(f"generate.intervals.{name}: need 0 <= low <= high, got {[lo, hi]}")
        if not 0 <= self.s0 <= 1:
            raise ScenarioError("generate.s0 must lie in [0, 1]")

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorSpec":
        kwargs = {}
        intervals = dict(data.get("intervals", {}))
        known = {f for f in cls.__dataclass_fields__}
        for key, value in {**{k: v for k, v in data.items() if k not in ("intervals", "seed")}, **intervals}.items():
            if key not in known:
                raise ScenarioError(f"generate.{key}: unknown key")
            kwargs[key] = tuple(value) if isinstance(value, list) else value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


@dataclass(frozen=True)
class Scenario:
    params: ModelParams
    initial: State
    settings: IntegrationSettings = field(default_factory=IntegrationSettings)
    record: tuple = DEFAULT_RECORD
    # Anchor time of the weighted average: "peak" (the R = 1 crossing, or 0
    # when there is none) or an explicit time.
    wavg_anchor: object = "peak"
    seed: int | None = None
    generator: GeneratorSpec | None = None

    def to_dict(self) -> dict:
        d = self.params.to_dict()
        d.update(
            s0=self.initial.s.tolist(),
            x0=self.initial.x.tolist(),
            w0=self.initial.w.tolist(),
            dt=self.settings.dt,
            t_end=self.settings.t_end,
            record_every=self.settings.record_every,
            clamp_tolerance=self.settings.clamp_tolerance,
            extend_until=self.settings.extend_until,
            record=list(self.record),
            wavg_anchor=self.wavg_anchor,
        )
        if self.seed is not None:
            d["seed"] = self.seed
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_settings(self, **changes) -> "Scenario":
        return replace(self, settings=replace(self.settings, **changes))


def default_settings() -> IntegrationSettings:
    return IntegrationSettings(dt=1e-3, t_end=15.0, record_every=10, extend_until=1e-3)


def _draw(spec: GeneratorSpec, seed_seq: np.random.SeedSequence):
    streams = [np.random.Generator(np.random.PCG64(c)) for c in seed_seq.spawn(6)]
    n, m = spec.n, spec.m
    beta = streams[0].uniform(*spec.beta, size=(n, n))
    beta_w = streams[1].uniform(*spec.beta_w, size=(n, m))
    alpha = streams[2].uniform(*spec.alpha, size=(m, m))
    if spec.zero_self_flow:
        np.fill_diagonal(alpha, 0.0)
    gamma = streams[3].uniform(*spec.gamma, size=n)
    gamma_w = streams[4].uniform(*spec.gamma_w, size=m)
    w0 = streams[5].uniform(*spec.w0, size=m)
    c_w = beta_w.T - spec.c_w_offset
    params = ModelParams(beta, beta_w, c_w, alpha, gamma, gamma_w)
    s0 = np.full(n, spec.s0)
    initial = State(s0, 1.0 - s0, np.zeros(n), w0, 0.0)
    return params, initial


def generate_scenario(spec: GeneratorSpec | None = None, seed: int = 0, *,
                      settings: IntegrationSettings | None = None, max_retries: int = 50) -> Scenario:
    spec = spec or GeneratorSpec()
    for attempt in range(max_retries + 1):
        entropy = seed if attempt == 0 else (seed, attempt)
        params, initial = _draw(spec, np.random.SeedSequence(entropy))
        if not validate_params(params):
            return Scenario(params, initial, settings or default_settings(), seed=seed, generator=spec)
    raise GenerationError(f"no valid scenario for seed {seed} after {max_retries} retries")


_MATRIX_KEYS = ("beta", "beta_w", "c_w", "alpha", "gamma", "gamma_w")


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario: expected a mapping at top level")
    base = default_settings()
    try:
        settings = IntegrationSettings(
            dt=float(data.get("dt", base.dt)),
            t_end=float(data.get("t_end", base.t_end)),
            record_every=int(data.get("record_every", base.record_every)),
            clamp_tolerance=float(data.get("clamp_tolerance", base.clamp_tolerance)),
            extend_until=data.get("extend_until", base.extend_until),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"integration settings (dt/t_end/record_every): {exc}") from None
    record = tuple(data.get("record", DEFAULT_RECORD))
    for name in record:
        if name not in RECORDABLE:
            raise ScenarioError(f"record: unknown quantity {name!r}")
    anchor = data.get("wavg_anchor", "peak")

    if "generate" in data:
        block = data["generate"]
        if not isinstance(block, dict) or "seed" not in block:
            raise ScenarioError("generate.seed: required when a generate block is used")
        spec = GeneratorSpec.from_dict(block)
        sc = generate_scenario(spec, int(block["seed"]), settings=settings)
        return replace(sc, record=record, wavg_anchor=anchor)

    for key in _MATRIX_KEYS + ("s0", "x0", "w0"):
        if key not in data:
            raise ScenarioError(f"{key}: missing")
    try:
        params = ModelParams(*(np.asarray(data[k], dtype=float) for k in _MATRIX_KEYS))
    except DimensionError as exc:
        raise ScenarioError(str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"rate matrices: {exc}") from None
    for key, size in (("n", params.n), ("m", params.m)):
        if key in data and int(data[key]) != size:
            raise ScenarioError(f"{key}: declared {data[key]} but matrices imply {size}")
    try:
        s0 = np.asarray(data["s0"], dtype=float)
        x0 = np.asarray(data["x0"], dtype=float)
        w0 = np.asarray(data["w0"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"initial condition: {exc}") from None
    for key, arr, size in (("s0", s0, params.n), ("x0", x0, params.n), ("w0", w0, params.m)):
        if arr.shape != (size,):
            raise ScenarioError(f"{key}: expected length {size}, got shape {arr.shape}")
    r0 = np.asarray(data["r0"], dtype=float) if "r0" in data else 1.0 - s0 - x0
    initial = State(s0, x0, r0, w0, 0.0)
    return Scenario(params, initial, settings, record, anchor, data.get("seed"))


def load_scenario(path) -> Scenario:
    """Read a scenario file (JSON; ``.yaml``/``.yml`` is parsed as YAML)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        if path.suffix in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except Exception as exc:  # parser errors vary by backend
        raise ScenarioError(f"{path}: not parseable ({exc})") from None
    return scenario_from_dict(data)


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=1, sort_keys=True) + "\n")
