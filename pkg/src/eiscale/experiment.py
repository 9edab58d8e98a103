"""EI-vs-scale experiments: replicates of intervention/readout trials.

Every unit of random work is seeded from a path in the config's
``SeedTree``: ``("scale", b) / ("replicate", r) / ("trial", t)``. Results
therefore do not depend on the order (or process) in which units run.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from . import abm, ising
from .infotheory import JointHistogram, panzeri_treves_correct
from .intervention import (ABM, ISING, DegenerateSample, Discretizer, InterventionTarget,
                           block_means, discretize, fit_tertiles, maxent_abm, maxent_ising)
from .lattice import SeedTree, derive_stream, make_partition

log = logging.getLogger(__name__)

DEFAULT_SCALES = (1, 2, 4, 8, 16, 32)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    system: str
    L: int = 64
    scales: tuple[int, ...] = DEFAULT_SCALES
    targets: tuple[float, ...] = (-0.8, 0.0, 0.8)
    trials_per_scale: int = 60
    replicates: int = 10
    dt_steps: int = 1
    master_seed: int = 0
    T: float = 2.2
    J: float = 1.0
    thresholds: tuple[float, float] = (-0.33, 0.33)
    abm: abm.AbmParams = field(default_factory=abm.AbmParams)

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(int(b) for b in self.scales))
        object.__setattr__(self, "targets", tuple(float(v) for v in self.targets))
        object.__setattr__(self, "thresholds", tuple(float(v) for v in self.thresholds))
        if self.system not in (ISING, ABM):
            raise ConfigError(f"system must be 'ising' or 'abm', got {self.system!r}")
        if not self.scales:
            raise ConfigError("at least one scale is required")
        for b in self.scales:
            if b < 1 or self.L % b:
                raise ConfigError(f"scale {b} does not divide L={self.L}")
        if not self.targets:
            raise ConfigError("at least one target is required")
        if self.trials_per_scale < 1:
            raise ConfigError("trials_per_scale must be >= 1")
        if self.replicates < 2:
            raise ConfigError("replicates must be >= 2 to estimate a standard error")
        if self.dt_steps < 1:
            raise ConfigError("dt_steps must be >= 1")
        try:
            for v in self.targets:
                InterventionTarget(self.system, v)
            if self.system == ISING:
                ising.IsingParams(self.T, self.J)
                Discretizer.thresholds(*self.thresholds)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def standard_ising(cls, T: float = 2.2, **kw) -> ExperimentConfig:
        return cls(ISING, **{"T": T, "targets": (-0.8, 0.0, 0.8), "trials_per_scale": 60, **kw})

    @classmethod
    def standard_abm(cls, **kw) -> ExperimentConfig:
        return cls(ABM, **{"targets": (0.0, 5.0, 10.0), "trials_per_scale": 80, **kw})

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        data = dict(data)
        system = data.get("system")
        if system not in (ISING, ABM):
            raise ConfigError(f"config needs system 'ising' or 'abm', got {system!r}")
        base = cls.standard_ising() if system == ISING else cls.standard_abm()
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        abm_kw = data.pop("abm", None)
        try:
            if abm_kw is not None:
                data["abm"] = replace(base.abm, **abm_kw)
            return replace(base, **data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scales"] = list(self.scales)
        d["targets"] = list(self.targets)
        d["thresholds"] = list(self.thresholds)
        return d

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def discretizer(self) -> Optional[Discretizer]:
        """Fixed thresholds for Ising; None means fit tertiles per replicate."""
        if self.system == ISING:
            return Discretizer.thresholds(*self.thresholds)
        return None


@dataclass(frozen=True)
class ScaleRecord:
    b: int
    ei_mean_bits: float
    ei_sem_bits: float
    replicates: int


@dataclass(frozen=True)
class EiCurve:
    system: str
    seed: int
    records: tuple[ScaleRecord, ...]
    config_fingerprint: Optional[str] = field(default=None, compare=False)
    replicate_bits: dict = field(default_factory=dict, compare=False)
    flags: dict = field(default_factory=dict, compare=False)
    config: Optional[ExperimentConfig] = field(default=None, compare=False)
    error: Optional[str] = field(default=None, compare=False)

    @property
    def scales(self) -> np.ndarray:
        return np.array([r.b for r in self.records])

    @property
    def means(self) -> np.ndarray:
        return np.array([r.ei_mean_bits for r in self.records])

    @property
    def sems(self) -> np.ndarray:
        return np.array([r.ei_sem_bits for r in self.records])


def readout_means(config: ExperimentConfig, b: int, tree: SeedTree):
    """Block means before and after the dynamics for every (trial, target).

    Returns two flat arrays ordered trial-major, then target, then block.
    """
    part = make_partition(config.L, b)
    targets = [InterventionTarget(config.system, v) for v in config.targets]
    pre, post = [], []
    if config.system == ISING:
        params = ising.IsingParams(config.T, config.J)
    for t in range(config.trials_per_scale):
        rng = derive_stream(tree, "trial", t)
        for target in targets:
            if config.system == ISING:
                spins = maxent_ising(part, target, rng)
                pre.append(block_means(spins, part))
                for _ in range(config.dt_steps):
                    ising.metropolis_sweep_stats(spins, params, rng)
                post.append(block_means(spins, part))
            else:
                world = maxent_abm(part, target)
                agents = abm.random_agents(config.L, config.abm.n_agents, rng)
                pre.append(block_means(world, part))
                for _ in range(config.dt_steps):
                    world, agents = abm.abm_step(world, agents, config.abm, rng)
                post.append(block_means(world, part))
    return np.concatenate(pre), np.concatenate(post)


def run_replicate(config: ExperimentConfig, b: int, tree: SeedTree) -> JointHistogram:
    """Joint (intervened label, outcome label) counts for one replicate.

    Holds ``trials_per_scale * len(targets) * num_blocks`` counts. ABM cut
    points are global tertiles of this replicate's pooled pre and post means.
    """
    pre, post = readout_means(config, b, tree)
    disc = config.discretizer()
    if disc is None:
        disc = fit_tertiles(np.concatenate([pre, post]))
    return JointHistogram.from_labels(discretize(pre, disc), discretize(post, disc))


def _replicate_tree(config: ExperimentConfig, b: int, r: int) -> SeedTree:
    return SeedTree(config.master_seed).child("scale", b).child("replicate", r)


def _run_unit(args):
    config, b, r = args
    try:
        hist = run_replicate(config, b, _replicate_tree(config, b, r))
    except DegenerateSample as exc:
        return b, r, None, str(exc)
    return b, r, panzeri_treves_correct(hist).corrected_bits, None


def run_curve(config: ExperimentConfig, *, workers: int = 1) -> EiCurve:
    """Per-scale mean and s.e.m. of the corrected MI across replicates."""
    units = [(config, b, r) for b in config.scales for r in range(config.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_unit, units))
    else:
        results = [_run_unit(u) for u in units]

    values: dict[int, list] = {b: [None] * config.replicates for b in config.scales}
    flags = {}
    for b, r, bits, err in results:
        values[b][r] = bits
        if err is not None:
            flags[b] = f"DegenerateSample: {err}"
    records = []
    for b in config.scales:
        if b in flags:
            log.warning("scale b=%d flagged: %s", b, flags[b])
            records.append(ScaleRecord(b, math.nan, math.nan, config.replicates))
            continue
        v = np.array(values[b])
        sem = float(v.std(ddof=1) / math.sqrt(len(v)))
        records.append(ScaleRecord(b, float(v.mean()), sem, len(v)))
    return EiCurve(
        system=config.system,
        seed=config.master_seed,
        records=tuple(records),
        config_fingerprint=config.fingerprint(),
        replicate_bits={b: tuple(values[b]) for b in config.scales},
        flags=flags,
        config=config,
    )


def robustness_sweep(configs, *, workers: int = 1) -> list[EiCurve]:
    """One curve per config; a failing config yields an empty curve with ``error`` set."""
    curves = []
    for config in configs:
        try:
            curves.append(run_curve(config, workers=workers))
        except Exception as exc:  # isolate per-config failures
            log.error("config %s failed: %s", config.fingerprint(), exc)
            curves.append(EiCurve(config.system, config.master_seed, (),
                                  config_fingerprint=config.fingerprint(),
                                  config=config, error=f"{type(exc).__name__}: {exc}"))
    return curves


def sweep_configs(plan: dict) -> list[ExperimentConfig]:
    """Expand ``{"base": {...}, "variants": [{...}, ...], "master_seed": s}``.

    Variants without their own ``master_seed`` get one derived from the sweep
    seed and their position in the list.
    """
    if "base" not in plan or "variants" not in plan:
        raise ConfigError("sweep config needs 'base' and 'variants'")
    unknown = set(plan) - {"base", "variants", "master_seed"}
    if unknown:
        raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
    tree = SeedTree(int(plan.get("master_seed", 0)))
    configs = []
    for i, variant in enumerate(plan["variants"]):
        merged = {**plan["base"], **variant}
        if "master_seed" not in variant:
            merged["master_seed"] = tree.child("config", i).derive_seed()
        configs.append(ExperimentConfig.from_dict(merged))
    return configs
