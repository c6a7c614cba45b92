"""Synthetic labelled sweep corpora built from the CMOS impedance model.

Each firmware-activity class is an :class:`ActivityProfile`: how many lumped
gate branches are conducting and the ranges their resistance/capacitance are
drawn from. Every observation draws from its own random stream keyed by
``(seed, class index, observation index)``, so any single trace can be
regenerated in isolation.

The default profiles are synthetic and not calibrated to any real board.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

import numpy as np

from .cmos import BaselineNetwork, _network_z
from .errors import ConfigError
from .rf import LabeledDataset, impedance_to_reflection


@dataclass(frozen=True)
class GridSpec:
    start_hz: float = 500e3
    stop_hz: float = 4e9
    n_points: int = 10_000

    def frequencies(self):
        return np.linspace(self.start_hz, self.stop_hz, self.n_points)


@dataclass(frozen=True)
class ActivityProfile:
    class_name: str
    n_gates_mean: int
    n_gates_jitter: int = 0
    r_eff_range: tuple[float, float] = (100.0, 100.0)
    c_eq_range: tuple[float, float] = (1e-12, 1e-12)
    baseline_perturbation: float = 0.0


# Lumped gate-cluster branches. Classes differ in active-branch count and
# branch RC ranges; the ranges are pairwise disjoint so a noise-free corpus
# is separable.
DEFAULT_PROFILES = (
    ActivityProfile("idle", 4, 1, (400.0, 440.0), (1.00e-12, 1.10e-12), 0.01),
    ActivityProfile("max_io", 24, 1, (200.0, 212.0), (1.50e-12, 1.60e-12), 0.01),
    ActivityProfile("background_compute", 12, 1, (130.0, 138.0), (0.90e-12, 0.95e-12), 0.01),
    ActivityProfile("aes", 12, 1, (170.0, 180.0), (2.80e-12, 2.95e-12), 0.01),
)


@dataclass(frozen=True)
class SimulatorConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    z_ref: float = 50.0
    baseline: BaselineNetwork = field(
        default_factory=lambda: BaselineNetwork(r_series=1.0, l_series=1e-9, c_shunt=10e-12))
    profiles: tuple[ActivityProfile, ...] = DEFAULT_PROFILES
    noise_sigma: float = 0.03
    observations_per_class: int = 445
    seed: int = 0

    def validate(self):
        g = self.grid
        if not (np.isfinite(g.start_hz) and np.isfinite(g.stop_hz) and 0 < g.start_hz < g.stop_hz):
            raise ConfigError(f"grid needs 0 < start < stop, got {g.start_hz}..{g.stop_hz}")
        if int(g.n_points) != g.n_points or g.n_points < 2:
            raise ConfigError("grid.n_points must be an integer >= 2")
        if not self.z_ref > 0:
            raise ConfigError("z_ref must be positive")
        b = self.baseline
        if min(b.r_series, b.l_series, b.c_shunt) < 0:
            raise ConfigError("baseline components must be nonnegative")
        if not self.noise_sigma >= 0:
            raise ConfigError("noise_sigma must be >= 0")
        if int(self.observations_per_class) != self.observations_per_class \
                or self.observations_per_class < 1:
            raise ConfigError("observations_per_class must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if not self.profiles:
            raise ConfigError("at least one activity profile is required")
        names = [p.class_name for p in self.profiles]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate class names: {names}")
        for p in self.profiles:
            if not p.class_name or "," in p.class_name:
                raise ConfigError(f"invalid class name {p.class_name!r}")
            if p.n_gates_mean < 1 or p.n_gates_jitter < 0:
                raise ConfigError(f"{p.class_name}: need n_gates_mean >= 1 and jitter >= 0")
            (rlo, rhi), (clo, chi) = p.r_eff_range, p.c_eq_range
            if not (0 < rlo <= rhi and 0 < clo <= chi):
                raise ConfigError(f"{p.class_name}: ranges must be positive with lo <= hi")
            if p.baseline_perturbation < 0:
                raise ConfigError(f"{p.class_name}: baseline_perturbation must be >= 0")
        return self

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["profiles"] = [asdict(p) for p in self.profiles]
        for p in d["profiles"]:
            p["r_eff_range"] = list(p["r_eff_range"])
            p["c_eq_range"] = list(p["c_eq_range"])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SimulatorConfig":
        """Build a config from a JSON-like mapping; omitted fields take defaults."""
        if not isinstance(d, dict):
            raise ConfigError("simulator config must be a JSON object")
        _reject_unknown(d, cls, "config")
        kw = dict(d)
        try:
            if "grid" in kw:
                _reject_unknown(kw["grid"], GridSpec, "grid")
                kw["grid"] = GridSpec(**kw["grid"])
            if "baseline" in kw:
                _reject_unknown(kw["baseline"], BaselineNetwork, "baseline")
                kw["baseline"] = BaselineNetwork(**kw["baseline"])
            if "profiles" in kw:
                profs = []
                for p in kw["profiles"]:
                    _reject_unknown(p, ActivityProfile, "profile")
                    p = dict(p)
                    for key in ("r_eff_range", "c_eq_range"):
                        if key in p:
                            p[key] = tuple(float(v) for v in p[key])
                            if len(p[key]) != 2:
                                raise ConfigError(f"{key} must have two entries")
                    profs.append(ActivityProfile(**p))
                kw["profiles"] = tuple(profs)
            cfg = cls(**kw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None
        return cfg.validate()

    @classmethod
    def from_json(cls, text) -> "SimulatorConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(d)

    def with_seed(self, seed) -> "SimulatorConfig":
        return replace(self, seed=seed)


def _reject_unknown(d, klass, what):
    if not isinstance(d, dict):
        raise ConfigError(f"{what} must be a JSON object")
    extra = set(d) - {f.name for f in fields(klass)}
    if extra:
        raise ConfigError(f"unknown {what} field(s): {sorted(extra)}")


def observation_rng(seed, class_index, obs_index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(class_index, obs_index)))


def draw_observation(cfg: SimulatorConfig, class_index, obs_index, omega):
    """Noise-free impedance of one observation plus its noisy reflection trace.

    Returns ``(z, gamma)``.
    """
    prof = cfg.profiles[class_index]
    rng = observation_rng(cfg.seed, class_index, obs_index)
    j = prof.n_gates_jitter
    n = max(1, prof.n_gates_mean + (int(rng.integers(-j, j + 1)) if j else 0))
    r = rng.uniform(*prof.r_eff_range, size=n)
    c = rng.uniform(*prof.c_eq_range, size=n)
    scale = np.exp(prof.baseline_perturbation * rng.standard_normal(3))
    b = cfg.baseline
    z = _network_z(b.r_series * scale[0], b.l_series * scale[1], b.c_shunt * scale[2], r, c, omega)
    gamma = impedance_to_reflection(z, cfg.z_ref)
    if cfg.noise_sigma > 0:
        # circular complex Gaussian with E|n|^2 = sigma^2
        noise = rng.standard_normal((2, omega.size)) * (cfg.noise_sigma / np.sqrt(2.0))
        gamma = gamma + (noise[0] + 1j * noise[1])
    return z, gamma


def synthesize_dataset(cfg: SimulatorConfig | None = None) -> LabeledDataset:
    """Generate ``observations_per_class`` traces for every profile in ``cfg``."""
    cfg = (cfg or SimulatorConfig()).validate()
    f = cfg.grid.frequencies()
    omega = 2.0 * np.pi * f
    n_obs = int(cfg.observations_per_class)
    gamma = np.empty((len(cfg.profiles) * n_obs, f.size), dtype=complex)
    labels = []
    row = 0
    for k, prof in enumerate(cfg.profiles):
        for i in range(n_obs):
            gamma[row] = draw_observation(cfg, k, i, omega)[1]
            labels.append(prof.class_name)
            row += 1
    sources = tuple(f"synthetic:seed={cfg.seed}:{lab}:{i}"
                    for lab in (p.class_name for p in cfg.profiles) for i in range(n_obs))
    return LabeledDataset(f, gamma, np.array(labels, dtype=object),
                          tuple(p.class_name for p in cfg.profiles), cfg.z_ref, sources)
