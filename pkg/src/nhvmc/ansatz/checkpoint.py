"""Plain-text checkpoints for the wavefunction ansatze.

The file is line oriented: a header of ``key = value`` pairs (architecture,
model parameters, seed, step), then one ``array`` block per parameter array
with its elements as ``re im`` pairs in row-major order. Floats are written
as C99 hex literals, so a load round-trips bit-exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..model import ModelParams
from .mlp import MlpWavefunction
from .rbm import RbmWavefunction
from .rnn import RnnWavefunction
from .symmetrize import PtSymmetrized

FORMAT = "nhvmc-checkpoint"
VERSION = 1


def _unwrap(ansatz):
    if isinstance(ansatz, PtSymmetrized):
        return ansatz.inner, True
    return ansatz, False


def _header(ansatz, model: ModelParams, seed: int, step: int) -> dict[str, str]:
    inner, pt = _unwrap(ansatz)
    head = {
        "kind": inner.kind,
        "pt": str(int(pt)),
        "n": str(model.n),
        "eta": repr(float(model.eta)),
        "xi": repr(float(model.xi)),
        "j": repr(float(model.j)),
        "boundary": model.boundary,
        "seed": str(int(seed)),
        "step": str(int(step)),
    }
    if isinstance(inner, RnnWavefunction):
        head["cell"] = inner.cell
        head["hidden"] = str(inner.hidden)
        head["phase_head"] = str(int(inner.phase_head))
        head["log_offset"] = repr(inner.log_offset)
    elif isinstance(inner, RbmWavefunction):
        head["hidden"] = str(inner.hidden)
    elif isinstance(inner, MlpWavefunction):
        head["layer_sizes"] = ",".join(str(s) for s in inner.layer_sizes)
    else:
        raise ConfigError(f"cannot checkpoint ansatz of type {type(inner).__name__}")
    return head


def save_checkpoint(path, ansatz, model: ModelParams, seed: int, step: int) -> None:
    inner, _ = _unwrap(ansatz)
    lines = [f"{FORMAT} {VERSION}"]
    for key, value in _header(ansatz, model, seed, step).items():
        lines.append(f"{key} = {value}")
    for name, arr in inner._arrays():
        tag = "complex" if np.iscomplexobj(arr) else "real"
        dims = " ".join(str(d) for d in arr.shape)
        lines.append(f"array {name} {tag} {dims}")
        flat = arr.ravel()
        re = np.real(flat)
        im = np.imag(flat) if np.iscomplexobj(arr) else np.zeros_like(re)
        for r, i in zip(re, im):
            lines.append(f"{float(r).hex()} {float(i).hex()}")
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _parse(path):
    text = Path(path).read_text(encoding="ascii").splitlines()
    if not text or not text[0].startswith(FORMAT):
        raise ConfigError(f"{path}: not a {FORMAT} file")
    head: dict[str, str] = {}
    arrays: dict[str, np.ndarray] = {}
    k = 1
    while k < len(text):
        line = text[k].strip()
        k += 1
        if line == "end":
            break
        if line.startswith("array "):
            _, name, tag, *dims = line.split()
            shape = tuple(int(d) for d in dims)
            size = int(np.prod(shape)) if shape else 1
            re = np.empty(size)
            im = np.empty(size)
            for pos in range(size):
                a, b = text[k].split()
                re[pos], im[pos] = float.fromhex(a), float.fromhex(b)
                k += 1
            data = re + 1j * im if tag == "complex" else re
            arrays[name] = data.reshape(shape)
        elif "=" in line:
            key, _, value = line.partition("=")
            head[key.strip()] = value.strip()
    return head, arrays


def load_checkpoint(path):
    """Rebuild the checkpointed ansatz; returns (ansatz, info).

    ``info`` carries the model parameters, master seed and training step the
    checkpoint was written with, for warm-start validation.
    """
    head, arrays = _parse(path)
    kind = head["kind"]
    n = int(head["n"])
    if kind == "rbm":
        ansatz = RbmWavefunction(arrays["a"], arrays["b"], arrays["w"])
    elif kind == "mlp":
        count = len(arrays) // 2
        weights = [arrays[f"w{k}"] for k in range(count)]
        biases = [arrays[f"b{k}"] for k in range(count)]
        ansatz = MlpWavefunction(weights, biases)
    elif kind == "rnn":
        ansatz = RnnWavefunction(
            n,
            cell=head["cell"],
            hidden=int(head["hidden"]),
            phase_head=bool(int(head["phase_head"])),
            log_offset=float(head["log_offset"]),
            arrays=arrays,
        )
    else:
        raise ConfigError(f"{path}: unknown ansatz kind {kind!r}")
    if ansatz.n != n:
        raise ConfigError(f"{path}: array shapes disagree with n={n}")
    if int(head.get("pt", "0")):
        ansatz = PtSymmetrized(ansatz)
    info = {
        "model": ModelParams(n=n, eta=float(head["eta"]), xi=float(head["xi"]),
                             j=float(head["j"]), boundary=head["boundary"]),
        "seed": int(head["seed"]),
        "step": int(head["step"]),
        "kind": kind,
    }
    return ansatz, info
