"""Autoregressive recurrent wavefunction over spin chains.

The network walks the chain once, emitting at each site a two-way
conditional distribution over {+1, -1} through a softmax; the product of
chosen conditionals is a normalized probability P(x) and the amplitude is
its square root,

    log Psi(x) = 1/2 * sum_t log(P(x_t | x_<t) + eps_off),

with a small offset guarding log 0. An optional linear phase head turns the
probability ansatz into a complex one; it is off by default.

The input token preceding the first site is fixed to +1 and the hidden
state starts at zero, so evaluation is deterministic. Gradients are exact
backprop-through-time, returned per sample for every real parameter.
"""

from __future__ import annotations

import numpy as np

from ..seeding import named_stream
from .base import ParametrizedWavefunction, softmax_pair, uniform_init

DEFAULT_LOG_OFFSET = 1e-15


def _one_hot(spins: np.ndarray) -> np.ndarray:
    s = np.asarray(spins, dtype=float)
    return np.stack([(1.0 + s) / 2.0, (1.0 - s) / 2.0], axis=-1)


def _class_index(spins: np.ndarray) -> np.ndarray:
    return ((1 - np.asarray(spins, dtype=np.int64)) // 2).astype(np.intp)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class RnnWavefunction(ParametrizedWavefunction):
    kind = "rnn"

    def __init__(self, n: int, cell: str = "vanilla", hidden: int = 34,
                 phase_head: bool = False, log_offset: float = DEFAULT_LOG_OFFSET,
                 arrays: dict[str, np.ndarray] | None = None):
        if cell not in ("vanilla", "gru"):
            raise ValueError(f"cell must be 'vanilla' or 'gru', got {cell!r}")
        self.n = int(n)
        self.cell = cell
        self.hidden = int(hidden)
        self.phase_head = bool(phase_head)
        self.log_offset = float(log_offset)
        h = self.hidden
        if cell == "vanilla":
            names = [("w_in", (h, 2)), ("w_rec", (h, h)), ("b_rec", (h,))]
        else:
            names = [
                ("w_z", (h, 2)), ("u_z", (h, h)), ("b_z", (h,)),
                ("w_r", (h, 2)), ("u_r", (h, h)), ("b_r", (h,)),
                ("w_c", (h, 2)), ("u_c", (h, h)), ("b_c", (h,)),
            ]
        names += [("w_out", (2, h)), ("b_out", (2,))]
        if phase_head:
            names += [("w_phase", (2, h)), ("b_phase", (2,))]
        self._names = names
        for name, shape in names:
            value = arrays[name] if arrays is not None else np.zeros(shape)
            value = np.asarray(value, dtype=float)
            if value.shape != shape:
                raise ValueError(f"array {name} has shape {value.shape}, want {shape}")
            setattr(self, name, value)

    @classmethod
    def random_init(cls, n: int, cell: str = "vanilla", hidden: int = 34,
                    phase_head: bool = False, seed: int = 0, scale: float = 0.05,
                    log_offset: float = DEFAULT_LOG_OFFSET) -> "RnnWavefunction":
        rng = named_stream(seed, "init/rnn")
        proto = cls(n, cell=cell, hidden=hidden, phase_head=phase_head,
                    log_offset=log_offset)
        arrays = {name: uniform_init(rng, shape, scale) for name, shape in proto._names}
        return cls(n, cell=cell, hidden=hidden, phase_head=phase_head,
                   log_offset=log_offset, arrays=arrays)

    def _arrays(self):
        return [(name, getattr(self, name)) for name, _ in self._names]

    # -- recurrent core -----------------------------------------------------

    def initial_state(self, batch: int):
        return np.zeros((batch, self.hidden)), np.ones(batch, dtype=np.int8)

    def _cell_forward(self, e: np.ndarray, h: np.ndarray):
        if self.cell == "vanilla":
            a = e @ self.w_in.T + h @ self.w_rec.T + self.b_rec[None, :]
            h_new = np.tanh(a)
            return h_new, (e, h, h_new)
        z = _sigmoid(e @ self.w_z.T + h @ self.u_z.T + self.b_z[None, :])
        r = _sigmoid(e @ self.w_r.T + h @ self.u_r.T + self.b_r[None, :])
        c = np.tanh(e @ self.w_c.T + (r * h) @ self.u_c.T + self.b_c[None, :])
        h_new = (1.0 - z) * h + z * c
        return h_new, (e, h, h_new, z, r, c)

    def conditional_step(self, state):
        """One sampling step: conditionals at the next site plus new state."""
        h, prev = state
        h_new, _ = self._cell_forward(_one_hot(prev), h)
        probs = softmax_pair(h_new @ self.w_out.T + self.b_out[None, :])
        return probs, h_new

    def _forward(self, X: np.ndarray):
        X = np.asarray(X)
        nbatch, n = X.shape
        if n != self.n:
            raise ValueError(f"batch width {n} does not match N={self.n}")
        h, prev = self.initial_state(nbatch)
        caches, probs, phases = [], [], []
        for t in range(n):
            h, cache = self._cell_forward(_one_hot(prev), h)
            probs.append(softmax_pair(h @ self.w_out.T + self.b_out[None, :]))
            if self.phase_head:
                phases.append(h @ self.w_phase.T + self.b_phase[None, :])
            caches.append(cache)
            prev = X[:, t]
        P = np.stack(probs, axis=1)  # (B, N, 2)
        Phi = np.stack(phases, axis=1) if self.phase_head else None
        return P, Phi, caches

    def conditional_probabilities(self, X: np.ndarray) -> np.ndarray:
        """Per-site conditionals P(. | x_<t) along each sampled path."""
        P, _, _ = self._forward(X)
        return P

    # -- amplitudes ----------------------------------------------------------

    def _chosen(self, P, Phi, X):
        idx = _class_index(X)
        rows = np.arange(X.shape[0])[:, None]
        cols = np.arange(X.shape[1])[None, :]
        p = P[rows, cols, idx]
        phi = Phi[rows, cols, idx] if Phi is not None else None
        return p, phi

    def log_psi_batch(self, X: np.ndarray) -> np.ndarray:
        P, Phi, _ = self._forward(X)
        p, phi = self._chosen(P, Phi, X)
        vals = 0.5 * np.log(p + self.log_offset).sum(axis=1)
        if phi is not None:
            vals = vals + 1j * phi.sum(axis=1)
        return vals

    def log_prob_batch(self, X: np.ndarray) -> np.ndarray:
        """log of the exact autoregressive draw probability (no offset)."""
        P, _, _ = self._forward(X)
        p, _ = self._chosen(P, None, X)
        with np.errstate(divide="ignore"):
            return np.log(p).sum(axis=1)

    # -- gradients -----------------------------------------------------------

    def log_psi_with_grad_batch(self, X: np.ndarray):
        X = np.asarray(X)
        nbatch, n = X.shape
        P, Phi, caches = self._forward(X)
        p, phi = self._chosen(P, Phi, X)
        vals = 0.5 * np.log(p + self.log_offset).sum(axis=1)
        if phi is not None:
            vals = vals + 1j * phi.sum(axis=1)

        idx = _class_index(X)
        onehot = np.zeros((nbatch, n, 2))
        rows = np.arange(nbatch)[:, None]
        cols = np.arange(n)[None, :]
        onehot[rows, cols, idx] = 1.0

        cdtype = complex if self.phase_head else float
        frac = (p / (p + self.log_offset))[:, :, None]
        D = (0.5 * frac * (onehot - P)).astype(cdtype)
        F = 1j * onehot if self.phase_head else None

        if self.cell == "vanilla":
            dA = np.empty((nbatch, n, self.hidden), dtype=cdtype)
            carry = np.zeros((nbatch, self.hidden), dtype=cdtype)
            for t in range(n - 1, -1, -1):
                _, _, h_new = caches[t]
                dh = D[:, t] @ self.w_out + carry
                if F is not None:
                    dh = dh + F[:, t] @ self.w_phase
                dA[:, t] = (1.0 - h_new**2) * dh
                carry = dA[:, t] @ self.w_rec
            E = np.stack([c[0] for c in caches], axis=1)
            Hprev = np.stack([c[1] for c in caches], axis=1)
            H = np.stack([c[2] for c in caches], axis=1)
            blocks = [
                np.matmul(dA.transpose(0, 2, 1), E).reshape(nbatch, -1),
                np.matmul(dA.transpose(0, 2, 1), Hprev).reshape(nbatch, -1),
                dA.sum(axis=1),
            ]
        else:
            dAZ = np.empty((nbatch, n, self.hidden), dtype=cdtype)
            dAR = np.empty_like(dAZ)
            dAC = np.empty_like(dAZ)
            carry = np.zeros((nbatch, self.hidden), dtype=cdtype)
            for t in range(n - 1, -1, -1):
                _, hprev, _, z, r, c = caches[t]
                dh = D[:, t] @ self.w_out + carry
                if F is not None:
                    dh = dh + F[:, t] @ self.w_phase
                dc = dh * z
                dz = dh * (c - hprev)
                dhprev = dh * (1.0 - z)
                dac = dc * (1.0 - c**2)
                drh = dac @ self.u_c
                dhprev = dhprev + drh * r
                dr = drh * hprev
                daz = dz * z * (1.0 - z)
                dhprev = dhprev + daz @ self.u_z
                dar = dr * r * (1.0 - r)
                dhprev = dhprev + dar @ self.u_r
                dAZ[:, t], dAR[:, t], dAC[:, t] = daz, dar, dac
                carry = dhprev
            E = np.stack([c[0] for c in caches], axis=1)
            Hprev = np.stack([c[1] for c in caches], axis=1)
            H = np.stack([c[2] for c in caches], axis=1)
            R = np.stack([c[4] for c in caches], axis=1)
            RH = R * Hprev
            blocks = []
            for dG, inp in ((dAZ, Hprev), (dAR, Hprev), (dAC, RH)):
                blocks.append(np.matmul(dG.transpose(0, 2, 1), E).reshape(nbatch, -1))
                blocks.append(np.matmul(dG.transpose(0, 2, 1), inp).reshape(nbatch, -1))
                blocks.append(dG.sum(axis=1))

        blocks.append(np.matmul(D.transpose(0, 2, 1), H).reshape(nbatch, -1))
        blocks.append(D.sum(axis=1))
        if F is not None:
            blocks.append(np.matmul(F.transpose(0, 2, 1), H).reshape(nbatch, -1))
            blocks.append(F.sum(axis=1))
        return vals, np.concatenate(blocks, axis=1)
