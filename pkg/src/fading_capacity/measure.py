"""Discrete input measures, power functional, input shells, mixture density."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .channel import ChannelModel, _as_outputs, conditional_covariance

WEIGHT_SUM_ATOL = 1e-12
ATOM_DISTINCT_SQ = 1e-18
PRUNE_FLOOR = 1e-15


@dataclass(frozen=True)
class InputShell:
    """Closed shell of input vectors with r1_sq <= ||x||^2 <= r2_sq.

    Bounds are in squared-norm units. Output decoding shells elsewhere use
    plain radius units; do not mix the two conventions.
    """

    r1_sq: float
    r2_sq: float

    def __post_init__(self):
        if not (0.0 <= self.r1_sq < self.r2_sq):
            raise ValueError(f"shell bounds must satisfy 0 <= r1_sq < r2_sq, "
                             f"got [{self.r1_sq}, {self.r2_sq}]")

    def contains(self, norm_sq: float) -> bool:
        return self.r1_sq <= norm_sq <= self.r2_sq


@dataclass(frozen=True)
class PowerConstraint:
    """Average power budget: E[||x||^2] / N <= a."""

    a: float

    def __post_init__(self):
        if not self.a > 0.0:
            raise ValueError(f"power budget must be positive, got {self.a}")


class DiscreteMeasure:
    """Finitely supported input distribution: atoms with probability weights.

    atoms is a (k, N) complex array (rows are input vectors), weights a
    length-k nonnegative vector summing to 1 within 1e-12. Atoms must be
    pairwise distinct (squared distance > 1e-18). Immutable by convention.
    """

    def __init__(self, atoms, weights):
        atoms = np.atleast_2d(np.asarray(atoms, dtype=complex))
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if atoms.shape[0] != weights.shape[0]:
            raise ValueError(f"{atoms.shape[0]} atoms but {weights.shape[0]} weights")
        if atoms.shape[0] == 0:
            raise ValueError("measure needs at least one atom")
        if not np.all(np.isfinite(atoms.view(float))):
            raise ValueError("atoms have non-finite entries")
        if np.any(weights < 0.0):
            raise ValueError("weights must be nonnegative")
        total = float(weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_ATOL:
            raise ValueError(f"weights must sum to 1 within {WEIGHT_SUM_ATOL}, got {total!r}")
        for i in range(atoms.shape[0]):
            d = np.sum(np.abs(atoms[i + 1:] - atoms[i]) ** 2, axis=1)
            if np.any(d <= ATOM_DISTINCT_SQ):
                j = i + 1 + int(np.argmin(d))
                raise ValueError(f"atoms {i} and {j} coincide (squared distance <= 1e-18)")
        self.atoms = atoms
        self.weights = weights
        self.atoms.setflags(write=False)
        self.weights.setflags(write=False)
        self.norms_sq = np.sum(np.abs(atoms) ** 2, axis=1)
        self.norms_sq.setflags(write=False)

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[0]

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @classmethod
    def single(cls, atom) -> "DiscreteMeasure":
        return cls(np.atleast_2d(np.asarray(atom, dtype=complex)), [1.0])

    def to_json(self) -> dict:
        return {
            "atoms": [{"re": a.real.tolist(), "im": a.imag.tolist()} for a in self.atoms],
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteMeasure":
        rows = []
        for a in obj["atoms"]:
            re = np.asarray(a["re"], dtype=float)
            im = np.asarray(a["im"], dtype=float) if a.get("im") is not None else np.zeros_like(re)
            rows.append((re + 1j * im).reshape(1, -1))
        return cls(np.vstack(rows), obj["weights"])

    def __repr__(self):
        return f"DiscreteMeasure(k={self.n_atoms}, N={self.dim})"


def average_power(mu: DiscreteMeasure) -> float:
    """Mean squared norm per input dimension, sum_i w_i ||x_i||^2 / N."""
    return float(np.dot(mu.weights, mu.norms_sq) / mu.dim)


def shell_mass(mu: DiscreteMeasure, shell: InputShell) -> float:
    """Total weight of atoms whose squared norm lies in the closed shell."""
    inside = (mu.norms_sq >= shell.r1_sq) & (mu.norms_sq <= shell.r2_sq)
    return float(mu.weights[inside].sum())


def mixture_log_density(model: ChannelModel, mu: DiscreteMeasure, y) -> float:
    """ln f_mu(y) = ln sum_i w_i p(y|x_i), via log-sum-exp over atoms."""
    if mu.dim != model.N:
        raise ValueError(f"measure dimension {mu.dim} != channel input dimension {model.N}")
    y = _as_outputs(model, y)
    logp = np.array([conditional_covariance(model, a).log_densities(y)[0]
                     for a in mu.atoms])
    return float(logsumexp(logp, b=mu.weights))


def prune_weights(mu: DiscreteMeasure, floor: float = PRUNE_FLOOR) -> DiscreteMeasure:
    """Drop atoms with weight below floor and renormalize the rest."""
    keep = mu.weights >= floor
    if np.all(keep):
        return mu
    if not np.any(keep):
        keep = mu.weights == mu.weights.max()
    w = mu.weights[keep]
    return DiscreteMeasure(mu.atoms[keep], w / w.sum())
