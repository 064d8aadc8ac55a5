"""Batches of row-switching trials."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np
from scipy.stats import norm

from .field import FieldSpec
from .fsm import DRAW_CHANNELS, ControlConfig, TrialConfig, TrialResult, run_trial
from .profiles import NoiseProfile
from .reentry import LEFT, RIGHT

log = logging.getLogger(__name__)


def default_trials(n_rows: int, count: int = 18) -> list[tuple[int, str]]:
    """(row, turn) pairs cycling over adjacent row pairs, each switched once in each direction.

    With 10 rows and 18 trials every one of the 9 neighbouring pairs is crossed
    right-going and then left-going.
    """
    if n_rows < 2:
        raise ValueError("need at least two rows")
    pairs = [(i, RIGHT) for i in range(n_rows - 1)], [(i + 1, LEFT) for i in range(n_rows - 1)]
    seq = [p for ab in zip(*pairs) for p in ab]
    return [seq[k % len(seq)] for k in range(count)]


def stratified_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    """n standard-normal draws, at the midpoints of n equal-probability strata, in random order."""
    u = (rng.permutation(n) + 0.5) / n
    return norm.ppf(u)


def trial_configs(field: FieldSpec, count: int, seed: int, profile: NoiseProfile, **overrides) -> list[TrialConfig]:
    ss = np.random.SeedSequence(seed)
    seeds = ss.generate_state(count).tolist()
    draws = None
    if profile.stratified:
        rng = np.random.default_rng(ss.spawn(1)[0])
        cols = {k: stratified_normals(rng, count) for k in DRAW_CHANNELS}
        draws = [{k: float(cols[k][i]) for k in DRAW_CHANNELS} for i in range(count)]
    out = []
    for i, (row, turn) in enumerate(default_trials(len(field.rows), count)):
        cfg = TrialConfig(row, turn, seed=int(seeds[i]), draws=draws[i] if draws else None)
        out.append(replace(cfg, **overrides) if overrides else cfg)
    return out


def _run(args) -> TrialResult:
    field, cfg, profile, control = args
    return run_trial(field, cfg, profile, control=control)


def run_batch(field: FieldSpec, configs: list[TrialConfig], profile: NoiseProfile,
              control: ControlConfig | None = None, jobs: int = 1) -> list[TrialResult]:
    """Run trials in order; with jobs > 1 they run in worker processes (results keep the input order)."""
    work = [(field, c, profile, control) for c in configs]
    if jobs <= 1:
        results = []
        for i, w in enumerate(work):
            results.append(_run(w))
            log.info("trial %d/%d row %d %s -> %s", i + 1, len(work), w[1].row, w[1].turn, results[-1].outcome)
        return results
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_run, work))
