"""Field sweeps with and without transfer learning, plus magnetization.

A sweep walks a monotone eta grid (xi follows as xi = ratio * eta). With
warm starts each point begins from the previous point's trained parameters
(bit-identical, via the checkpoint file when a directory is given) and
chain samplers inherit their final chain states; cold starts reinitialize
everything per point from seeds derived off the master seed, so the whole
table is reproducible either way.

Magnetization bookkeeping: the signed batch mean <m> is the estimator of
N^-1 sum_i <sigma_i^z>; its absolute value is the published order
parameter (the broken-symmetry sign at small eta is seed noise). The batch
mean of |m(x)| is kept alongside because it is the quantity with a direct
ED counterpart (the biorthogonal expectation of the diagonal operator
|m|), symmetry-broken or not.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, replace as dc_replace

import numpy as np

from . import exact
from .ansatz.checkpoint import load_checkpoint, save_checkpoint
from .engine import TrainConfig, TrainingRecord, train
from .errors import TrainingAbortedError
from .factory import build_ansatz, build_sampler
from .model import ModelParams, local_energy_batch
from .sampling import AutoregressiveSampler, SamplerConfig
from .seeding import stream_sequence


@dataclass(frozen=True)
class SweepPlan:
    eta_start: float = 3.0
    eta_end: float = 0.0
    step: float = -0.1
    xi_ratio: float = 0.1
    warm_start: bool = True
    fine_steps: int | None = None  # per-point budget after the first point
    points: tuple[float, ...] | None = None  # explicit monotone grid override

    def __post_init__(self):
        if self.points is not None:
            diffs = np.diff(self.points)
            if len(self.points) == 0 or not (np.all(diffs > 0) or np.all(diffs < 0)):
                raise ValueError("explicit grid must be strictly monotone")
            return
        if self.step == 0:
            raise ValueError("step must be nonzero")
        if (self.eta_end - self.eta_start) * self.step < 0:
            raise ValueError("step sign inconsistent with endpoints")

    @property
    def grid(self) -> list[float]:
        if self.points is not None:
            return [float(v) for v in self.points]
        count = int(round((self.eta_end - self.eta_start) / self.step)) + 1
        return [round(self.eta_start + k * self.step, 12) for k in range(count)]


@dataclass
class SweepPoint:
    eta: float
    xi: float
    arch: str
    warm: bool
    energy_per_spin: complex
    initial_energy_per_spin: complex
    abs_m: float
    mean_abs_m: float
    records: list[TrainingRecord]
    failed: bool = False
    eps_vs_ed: float | None = None
    ed_energy_per_spin: float | None = None
    ed_abs_m: float | None = None
    initial_param_sha: str = ""  # hash of the parameter vector training started from


def magnetization(batch: np.ndarray, weights=None) -> float:
    """Batch- and site-averaged spin, the estimator of N^-1 sum <sigma_i^z>."""
    batch = np.asarray(batch)
    if batch.size == 0:
        raise ValueError("empty batch")
    per_config = batch.mean(axis=1)
    if weights is None:
        return float(per_config.mean())
    w = np.asarray(weights, dtype=float)
    return float(w @ per_config / w.sum())


def mean_abs_magnetization(batch: np.ndarray, weights=None) -> float:
    batch = np.asarray(batch)
    if batch.size == 0:
        raise ValueError("empty batch")
    per_config = np.abs(batch.mean(axis=1))
    if weights is None:
        return float(per_config.mean())
    w = np.asarray(weights, dtype=float)
    return float(w @ per_config / w.sum())


def _point_seed(master_seed: int, arch: str, index: int, what: str) -> int:
    seq = stream_sequence(master_seed, f"sweep/{arch}/{what}/{index}")
    return int(seq.generate_state(1)[0])


def param_sha(ansatz) -> str:
    return hashlib.sha256(ansatz.parameter_vector().tobytes()).hexdigest()


def _evaluate(ansatz, model, sampler, batches: int = 1):
    """Weighted energy per spin and magnetization stats from fresh batches."""
    X_all, logw_all, eloc_all, dead_all = [], [], [], []
    for _ in range(batches):
        X, log_draw = sampler.next_batch()
        vals = ansatz.log_psi_batch(X)
        eloc, divergent = local_energy_batch(X, ansatz.log_psi_batch, model,
                                             base=vals)
        if log_draw is None:
            logw = np.zeros(X.shape[0])
        else:
            logw = 2.0 * np.real(vals) - log_draw
        X_all.append(X)
        logw_all.append(logw)
        eloc_all.append(np.where(divergent, 0.0, eloc))
        dead_all.append(divergent)
    X = np.concatenate(X_all)
    logw = np.concatenate(logw_all)
    eloc = np.concatenate(eloc_all)
    dead = np.concatenate(dead_all)
    w = np.exp(logw - logw[~dead].max()) if (~dead).any() else np.ones_like(logw)
    w[dead] = 0.0
    w = w / w.sum()
    energy = complex(w @ eloc) / model.n
    return energy, magnetization(X, w), mean_abs_magnetization(X, w), X, w


def _ed_reference(model: ModelParams, size_cap: int):
    spec = exact.exact_spectrum(model, size_cap)
    k = exact.select_ground(spec)
    energy = spec.eigenvalues[k] / model.n
    abs_m = exact.biorthogonal_expectation(
        spec, k, np.abs(exact.magnetization_diagonal(model.n)))
    return float(energy.real), float(abs_m.real)


def sweep(plan: SweepPlan, arch: str, n: int, train_config: TrainConfig,
          sampler_config: SamplerConfig, *, boundary: str = "pbc", j: float = 1.0,
          hidden: int = 34, layers: int = 1, cell: str = "gru",
          pt: bool = True, eval_batches: int = 4, checkpoint_dir=None,
          ed_compare: bool = False, ed_size_cap: int = exact.DEFAULT_SIZE_CAP):
    """Train along the plan's grid and tabulate energy and magnetization."""
    points: list[SweepPoint] = []
    ansatz = None
    prev_chains = None
    prev_checkpoint = None

    for index, eta in enumerate(plan.grid):
        model = ModelParams(n=n, eta=float(eta), xi=plan.xi_ratio * float(eta),
                            j=j, boundary=boundary)
        if plan.warm_start and ansatz is not None:
            if prev_checkpoint is not None:
                ansatz, _ = load_checkpoint(prev_checkpoint)
        else:
            ansatz = build_ansatz(
                arch, n, hidden=hidden, layers=layers, cell=cell, pt=pt,
                seed=_point_seed(train_config.seed, arch, index, "init"))
        sampler = build_sampler(
            ansatz,
            dc_replace(sampler_config,
                       seed=_point_seed(train_config.seed, arch, index, "sampler")))
        if plan.warm_start and prev_chains is not None and not isinstance(
                sampler, AutoregressiveSampler):
            sampler.chain_state = prev_chains

        steps = train_config.steps
        if index > 0 and plan.fine_steps is not None:
            steps = plan.fine_steps
        point_config = dc_replace(train_config, steps=steps)

        initial_sha = param_sha(ansatz)
        initial_energy, _, _, _, _ = _evaluate(ansatz, model, sampler, batches=1)
        failed = False
        records: list[TrainingRecord] = []
        try:
            ansatz, records = train(ansatz, model, sampler, point_config)
        except TrainingAbortedError:
            failed = True
        energy, signed_m, mean_abs_m, _, _ = _evaluate(
            ansatz, model, sampler, batches=eval_batches)

        point = SweepPoint(
            eta=float(eta),
            xi=model.xi,
            arch=arch,
            warm=plan.warm_start,
            energy_per_spin=energy,
            initial_energy_per_spin=initial_energy,
            abs_m=abs(signed_m),
            mean_abs_m=mean_abs_m,
            records=records,
            failed=failed,
            initial_param_sha=initial_sha,
        )
        if ed_compare and n <= ed_size_cap:
            ed_energy, ed_abs_m = _ed_reference(model, ed_size_cap)
            point.ed_energy_per_spin = ed_energy
            point.ed_abs_m = ed_abs_m
            denom = abs(ed_energy)
            point.eps_vs_ed = abs(energy.real - ed_energy) / denom if denom else math.inf
        points.append(point)

        if checkpoint_dir is not None:
            os.makedirs(str(checkpoint_dir), exist_ok=True)
            path = os.path.join(str(checkpoint_dir), f"{arch}_point{index:03d}.ckpt")
            save_checkpoint(path, ansatz, model, train_config.seed, len(records))
            prev_checkpoint = path
        if not isinstance(sampler, AutoregressiveSampler):
            prev_chains = sampler.chain_state
    return points


def energy_per_spin_curve(points: list[SweepPoint], se_points=None):
    """Rows for the sweep CSV, with series-expansion overlay when given.

    ``se_points`` maps eta -> extrapolated energy per spin; the ED overlay
    is already carried by the sweep points when it was requested.
    """
    rows = []
    for pt in points:
        row = {
            "eta": pt.eta,
            "xi": pt.xi,
            "arch": pt.arch,
            "warm": int(pt.warm),
            "energy_per_spin_re": pt.energy_per_spin.real,
            "energy_per_spin_im": pt.energy_per_spin.imag,
            "abs_m": pt.abs_m,
            "eps_vs_ed": "" if pt.eps_vs_ed is None else pt.eps_vs_ed,
        }
        if se_points is not None:
            row["e_series"] = se_points.get(pt.eta, "")
        rows.append(row)
    return rows
