"""Command-line surface: ed, train, sweep, series, ep-scan.

Configuration lives in a flat key=value file mirroring the simulation
tables; command-line flags override file values, and every output file
starts with a commented metadata header echoing the fully resolved
configuration plus a content hash, enough to re-run the experiment. The
default output directory comes from ``NHVMC_OUTDIR``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import exact, series
from .ansatz.checkpoint import load_checkpoint, save_checkpoint
from .engine import TrainConfig, train
from .errors import ConfigError, NhvmcError
from .factory import build_ansatz, build_sampler
from .model import ModelParams
from .sampling import SamplerConfig
from .sweep import SweepPlan, energy_per_spin_curve, sweep

VERSION = "1"
HEADER_TAG = "nhvmc-output"


@dataclass(frozen=True)
class RunConfig:
    """Defaults mirror the published simulation tables."""

    arch: str = "rnn"
    n: int = 10
    eta: float = 1.6
    xi: float | None = None  # None -> xi_ratio * eta
    xi_ratio: float = 0.1
    j: float = 1.0
    boundary: str = "pbc"
    optimizer: str = "adam"
    seed: int = 111
    samples: int = 1024
    steps: int = 1000
    learning_rate: float = 1e-2
    hidden: int = 34
    layers: int = 1
    cell: str = "gru"
    alpha: float = 0.1
    log_offset: float = 1e-15
    target: str = "min-re"
    regularization: str = "abs-im"
    burn_in: int = 100
    thinning: int = 1
    pt: bool = True
    phase_head: bool = False

    def resolved_xi(self) -> float:
        return self.xi_ratio * self.eta if self.xi is None else self.xi

    def model(self) -> ModelParams:
        return ModelParams(n=self.n, eta=self.eta, xi=self.resolved_xi(),
                           j=self.j, boundary=self.boundary)

    def as_dict(self) -> dict[str, str]:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            out[f.name] = "" if value is None else repr(value) if isinstance(
                value, float) else str(value)
        return out


_BOOL_FIELDS = {"pt", "phase_head"}


def _coerce(name: str, text: str):
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    if name not in fields:
        raise ConfigError(f"unknown config key {name!r}")
    if text == "" and name == "xi":
        return None
    if name in _BOOL_FIELDS:
        return text.strip().lower() in ("1", "true", "yes", "on")
    for caster in (int, float):
        ftype = fields[name].type
        if ftype == "int" and caster is int:
            return int(text)
        if ftype in ("float", "float | None") and caster is float:
            return float(text)
    return text.strip()


def read_config_file(path) -> dict[str, object]:
    values: dict[str, object] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"bad config line: {raw!r}")
        key, _, val = line.partition("=")
        values[key.strip()] = _coerce(key.strip(), val.strip())
    return values


def resolve_config(args, file_values: dict[str, object]) -> RunConfig:
    merged: dict[str, object] = dict(file_values)
    for f in dataclasses.fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            merged[f.name] = flag
    return RunConfig(**merged)


def content_hash(config: RunConfig, extra_files=()) -> str:
    digest = hashlib.sha256()
    for key in sorted(config.as_dict()):
        digest.update(f"{key}={config.as_dict()[key]}\n".encode())
    for path in extra_files:
        digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def write_csv(path, command: str, config: RunConfig, columns, rows,
              extra_files=()) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {HEADER_TAG} v{VERSION}\n")
        fh.write(f"# command = {command}\n")
        fh.write(f"# content_hash = {content_hash(config, extra_files)}\n")
        for key, value in sorted(config.as_dict().items()):
            fh.write(f"# {key} = {value}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def read_metadata(path) -> dict[str, str]:
    meta: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        if not raw.startswith("#"):
            break
        line = raw[1:].strip()
        if "=" in line:
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
    return meta


def config_from_metadata(path) -> RunConfig:
    meta = read_metadata(path)
    values = {}
    for f in dataclasses.fields(RunConfig):
        if f.name in meta:
            values[f.name] = _coerce(f.name, meta[f.name])
    return RunConfig(**values)


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("NHVMC_OUTDIR") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, step = (float(part) for part in spec.split(":"))
    except ValueError as exc:
        raise ConfigError(f"grid must be lo:hi:step, got {spec!r}") from exc
    count = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(count), 12)


# -- subcommands ----------------------------------------------------------------


def cmd_ed(args) -> int:
    config = resolve_config(args, _file_values(args))
    model = config.model()
    spec = exact.exact_spectrum(model, size_cap=args.size_cap)
    k0 = exact.select_ground(spec)
    w = spec.eigenvalues
    order = np.lexsort((w.imag, w.real))
    rows = [(k, w[i].real, w[i].imag) for k, i in enumerate(order)]
    out = _out_dir(args) / "ed_spectrum.csv"
    write_csv(out, "ed", config, ("k", "re_E", "im_E"), rows)

    trace_err = abs(w.sum())
    closure = np.abs(w[:, None] - np.conj(w)[None, :]).min(axis=1).max()
    e0 = w[k0]
    print(f"ground-state energy: {e0.real:.12f} {e0.imag:+.3e}i (index {k0})")
    print(f"trace |sum E|: {trace_err:.3e}   conjugate-closure residual: {closure:.3e}")
    print(f"wrote {out}")
    return 0


def cmd_train(args) -> int:
    config = resolve_config(args, _file_values(args))
    model = config.model()
    extra = []
    if args.warm_start:
        ansatz, info = load_checkpoint(args.warm_start)
        if info["kind"] != config.arch:
            raise ConfigError(
                f"checkpoint architecture {info['kind']} != requested {config.arch}")
        if info["model"].n != model.n:
            raise ConfigError(
                f"checkpoint is for N={info['model'].n}, run wants N={model.n}")
        extra.append(args.warm_start)
    else:
        ansatz = build_ansatz(config.arch, model.n, hidden=config.hidden,
                              layers=config.layers, cell=config.cell,
                              phase_head=config.phase_head,
                              log_offset=config.log_offset,
                              seed=config.seed, pt=config.pt)
    sampler = build_sampler(ansatz, SamplerConfig(
        batch=config.samples, seed=config.seed,
        burn_in=config.burn_in, thinning=config.thinning))
    train_config = TrainConfig(
        steps=config.steps, learning_rate=config.learning_rate,
        alpha=config.alpha, seed=config.seed, target=config.target,
        regularization=config.regularization)
    out = _out_dir(args)
    ckpt = out / "final.ckpt"
    ansatz, records = train(ansatz, model, sampler, train_config,
                            checkpoint_every=args.checkpoint_every,
                            checkpoint_path=out / "running.ckpt")
    save_checkpoint(ckpt, ansatz, model, config.seed, config.steps)
    rows = [(r.step, repr(r.mean_re), repr(r.mean_im), repr(r.var_re),
             f"{r.wall_ms:.3f}") for r in records]
    log = out / "training_log.csv"
    write_csv(log, "train", config,
              ("step", "mean_re_eloc", "mean_im_eloc", "var_re_eloc", "wall_ms"),
              rows, extra_files=extra)
    last = records[-1]
    print(f"final mean Re(E): {last.mean_re:.8f}")
    print(f"final mean Im(E): {last.mean_im:.3e}")
    print(f"final Var(Re E): {last.var_re:.3e}")
    print(f"wrote {log} and {ckpt}")
    return 0


def cmd_sweep(args) -> int:
    config = resolve_config(args, _file_values(args))
    plan = SweepPlan(eta_start=args.eta_start, eta_end=args.eta_end,
                     step=args.eta_step, xi_ratio=config.xi_ratio,
                     warm_start=args.tl, fine_steps=args.fine_steps)
    train_config = TrainConfig(
        steps=config.steps, learning_rate=config.learning_rate,
        alpha=config.alpha, seed=config.seed, target=config.target,
        regularization=config.regularization)
    sampler_config = SamplerConfig(batch=config.samples, seed=config.seed,
                                   burn_in=config.burn_in, thinning=config.thinning)
    overlays = set((args.overlay or "").split(",")) - {""}
    points = sweep(plan, config.arch, config.n, train_config, sampler_config,
                   boundary=config.boundary, j=config.j, hidden=config.hidden,
                   layers=config.layers, cell=config.cell, pt=config.pt,
                   checkpoint_dir=_out_dir(args) if args.tl else None,
                   ed_compare="ed" in overlays)
    se_map = None
    if "se" in overlays:
        se_map = {pt.eta: pt.e_extrapolated
                  for pt in series.extrapolate(plan.grid, xi_ratio=plan.xi_ratio,
                                               j=config.j)}
    rows_dicts = energy_per_spin_curve(points, se_points=se_map)
    columns = list(rows_dicts[0].keys())
    rows = [[row[c] for c in columns] for row in rows_dicts]
    out = _out_dir(args) / "sweep.csv"
    write_csv(out, "sweep", config, columns, rows)
    print(f"wrote {out} ({len(rows)} points)")
    return 0


def cmd_series(args) -> int:
    config = resolve_config(args, _file_values(args))
    grid = _parse_grid(args.grid)
    points = series.extrapolate(grid, xi_ratio=config.xi_ratio, j=config.j)
    rows = [(p.eta, p.xi, repr(p.e_low), repr(p.e_high), p.chosen,
             repr(p.e_extrapolated)) for p in points]
    out = _out_dir(args) / "series.csv"
    write_csv(out, "series", config,
              ("eta", "xi", "e_low", "e_high", "chosen", "e_extrapolated"), rows)
    print(f"wrote {out} ({len(rows)} points)")
    return 0


def cmd_ep_scan(args) -> int:
    config = resolve_config(args, _file_values(args))
    grid = _parse_grid(args.xi_grid)
    base = ModelParams(n=config.n, eta=config.eta, xi=float(grid[0]),
                       j=config.j, boundary=config.boundary)
    scan = exact.spectral_scan(base, "xi", grid, size_cap=args.size_cap)
    eig_rows = []
    overlap_rows = []
    for pt in scan:
        for k, val in enumerate(pt.eigenvalues):
            eig_rows.append((pt.parameter, k, val.real, val.imag))
        overlap_rows.append((pt.parameter, repr(pt.max_overlap)))
    out = _out_dir(args)
    spectrum_csv = out / "ep_scan_spectrum.csv"
    overlap_csv = out / "ep_scan_overlap.csv"
    write_csv(spectrum_csv, "ep-scan", config,
              ("param", "k", "re_E_k", "im_E_k"), eig_rows)
    write_csv(overlap_csv, "ep-scan", config, ("param", "max_overlap"),
              overlap_rows)
    peaks = exact.find_exceptional_points(base, "xi", grid, scan=scan,
                                          size_cap=args.size_cap)
    for x, v in peaks:
        print(f"exceptional point near xi = {x:.6f} (overlap {v:.6f})")
    print(f"wrote {spectrum_csv} and {overlap_csv}; {len(peaks)} EP peak(s)")
    return 0


# -- argument plumbing -----------------------------------------------------------


def _file_values(args) -> dict[str, object]:
    return read_config_file(args.config) if args.config else {}


def _add_config_flags(parser: argparse.ArgumentParser, *names: str) -> None:
    kinds = {
        "arch": dict(choices=("rnn", "rbm", "mlp")),
        "n": dict(type=int),
        "eta": dict(type=float),
        "xi": dict(type=float),
        "xi_ratio": dict(type=float),
        "j": dict(type=float),
        "boundary": dict(choices=("pbc", "obc")),
        "seed": dict(type=int),
        "samples": dict(type=int),
        "steps": dict(type=int),
        "learning_rate": dict(type=float),
        "hidden": dict(type=int),
        "layers": dict(type=int),
        "cell": dict(choices=("vanilla", "gru")),
        "alpha": dict(type=float),
        "target": dict(type=str),
        "regularization": dict(choices=("abs-im", "var-im", "none")),
        "burn_in": dict(type=int),
        "thinning": dict(type=int),
    }
    for name in names:
        flag = "--" + name.replace("_", "-")
        parser.add_argument(flag, default=None, dest=name, **kinds[name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhvmc",
        description="Neural-network VMC for the PT-symmetric non-Hermitian "
                    "Ising chain, with exact-diagonalization and series oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--out", default=None,
                       help="output directory (default $NHVMC_OUTDIR or .)")

    p_ed = sub.add_parser("ed", help="dense spectrum of one parameter point")
    common(p_ed)
    _add_config_flags(p_ed, "n", "eta", "xi", "xi_ratio", "j", "boundary")
    p_ed.add_argument("--size-cap", type=int, default=exact.DEFAULT_SIZE_CAP)
    p_ed.set_defaults(func=cmd_ed)

    p_train = sub.add_parser("train", help="variational training run")
    common(p_train)
    _add_config_flags(p_train, "arch", "n", "eta", "xi", "xi_ratio", "j",
                      "boundary", "seed", "samples", "steps", "learning_rate",
                      "hidden", "layers", "cell", "alpha", "target",
                      "regularization", "burn_in", "thinning")
    p_train.add_argument("--warm-start", default=None,
                         help="checkpoint to initialize from")
    p_train.add_argument("--checkpoint-every", type=int, default=0)
    p_train.set_defaults(func=cmd_train)

    p_sweep = sub.add_parser("sweep", help="field sweep with optional transfer learning")
    common(p_sweep)
    _add_config_flags(p_sweep, "arch", "n", "xi_ratio", "j", "boundary", "seed",
                      "samples", "steps", "learning_rate", "hidden", "layers",
                      "cell", "alpha", "target", "regularization", "burn_in",
                      "thinning")
    p_sweep.add_argument("--eta-start", type=float, default=3.0)
    p_sweep.add_argument("--eta-end", type=float, default=0.0)
    p_sweep.add_argument("--eta-step", type=float, default=-0.1)
    p_sweep.add_argument("--tl", action=argparse.BooleanOptionalAction, default=True,
                         help="warm-start each point from the previous one")
    p_sweep.add_argument("--fine-steps", type=int, default=None)
    p_sweep.add_argument("--overlay", default=None, help="comma list: ed,se")
    p_sweep.set_defaults(func=cmd_sweep)

    p_series = sub.add_parser("series", help="series-expansion branches on a grid")
    common(p_series)
    _add_config_flags(p_series, "xi_ratio", "j")
    p_series.add_argument("--grid", default="0:3:0.1", help="eta grid lo:hi:step")
    p_series.set_defaults(func=cmd_series)

    p_ep = sub.add_parser("ep-scan", help="overlap scan for exceptional points")
    common(p_ep)
    _add_config_flags(p_ep, "n", "eta", "j", "boundary")
    p_ep.add_argument("--xi", dest="xi_grid", default="0.002:1:0.002",
                      help="xi grid lo:hi:step")
    p_ep.add_argument("--size-cap", type=int, default=exact.DEFAULT_SIZE_CAP)
    p_ep.set_defaults(func=cmd_ep_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NhvmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
