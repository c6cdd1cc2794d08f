"""Seeded Monte Carlo engine for integrals over the output space.

All stochastic results are McEstimate values (point estimate, standard error,
sample count, seed) and are bit-reproducible for a fixed configuration:
sample streams are derived counter-style from (seed, stream index, batch
index), so batches can be evaluated independently and reduced in a fixed
order. Mutual information uses per-atom stratified sampling: mixture
components produced by the shell-decoder constructions are separated by
hundreds of orders of magnitude, and sampling the mixture directly would
never visit the small ones. When the conditional law is radially symmetric,
the output radius is additionally stratified over equiprobable shells, which
tames the large cross-term variance at inputs far outside the measure's
support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gammaincinv, logsumexp

from .channel import (ChannelModel, _as_input, _complex_standard_normals,
                      conditional_covariance, conditional_entropy)
from .measure import DiscreteMeasure

_U64 = (1 << 64) - 1
_DEFAULT_BATCH = 50_000

# Stream tags outside the per-atom index range.
_CROSS_STREAM = 1 << 20
_SHELL_STREAM = (1 << 20) + 1


def derive_seed(seed: int, *path: int) -> int:
    """Deterministic 64-bit stream seed from a base seed and an index path."""
    entropy = [int(seed) & _U64] + [int(p) & _U64 for p in path]
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class McConfig:
    """Sampling budget for one estimator call.

    samples applies per stratum (per atom for mutual information); batch is
    the chunk size used for evaluation (default min(samples, 50000)).
    """

    samples: int
    seed: int
    batch: int | None = None

    def __post_init__(self):
        if self.samples < 100:
            raise ValueError(f"samples must be >= 100, got {self.samples}")
        if self.batch is not None and not (1 <= self.batch <= self.samples):
            raise ValueError(f"batch must lie in [1, samples], got {self.batch}")

    @property
    def effective_batch(self) -> int:
        return self.batch if self.batch is not None else min(self.samples, _DEFAULT_BATCH)


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo result: value, standard error, total draws, base seed.

    Exact (quadrature-free closed form) results carry std_error 0 and
    samples 0.
    """

    value: float
    std_error: float
    samples: int
    seed: int


@dataclass(frozen=True)
class OutputShell:
    """Annulus of output vectors with rho1 <= ||y|| < rho2 (radius units)."""

    rho1: float
    rho2: float

    def __post_init__(self):
        if not (0.0 <= self.rho1 <= self.rho2):
            raise ValueError(f"shell radii must satisfy 0 <= rho1 <= rho2, "
                             f"got [{self.rho1}, {self.rho2})")


def _batch_plan(total: int, batch: int) -> list[tuple[int, int]]:
    plan = []
    done = 0
    index = 0
    while done < total:
        nb = min(batch, total - done)
        plan.append((index, nb))
        done += nb
        index += 1
    return plan


def _n_strata(samples: int) -> int:
    """Radial strata count; keeps at least 8 draws per stratum."""
    return max(1, min(64, samples // 8))


def _stratified_radii_sq(seed_key: int, offset: int, nb: int, m: int,
                         n_strata: int):
    """Normalized squared radii s = ||y||^2 / c for y ~ CN(0, c I_m).

    s follows Gamma(m, 1); draws are stratified over n_strata equiprobable
    radial shells, cycling stratum ids from the given offset so allocation
    stays balanced across batches. Returns (ids, s).
    """
    rng = np.random.default_rng(seed_key)
    u = rng.random(nb)
    ids = (offset + np.arange(nb)) % n_strata
    q = (ids + u) / n_strata
    if m == 1:
        s = -np.log1p(-q)
    else:
        s = gammaincinv(m, q)
    return ids, s


class _StratumAccumulator:
    """Per-shell running sums for a stratified mean and its standard error."""

    def __init__(self, n_strata: int):
        self.n = n_strata
        self.s1 = np.zeros(n_strata)
        self.s2 = np.zeros(n_strata)
        self.count = np.zeros(n_strata)

    def add(self, ids, values):
        self.s1 += np.bincount(ids, weights=values, minlength=self.n)
        self.s2 += np.bincount(ids, weights=values * values, minlength=self.n)
        self.count += np.bincount(ids, minlength=self.n)

    def stats(self) -> tuple[float, float]:
        means = self.s1 / self.count
        var_k = np.maximum(self.s2 - self.s1 * means, 0.0) / np.maximum(
            self.count - 1, 1)
        mean = float(np.sum(means)) / self.n
        se = math.sqrt(float(np.sum(var_k / self.count)) / (self.n * self.n))
        return mean, se


def _weighted_mix(logp: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Row-wise ln sum_j w_j exp(logp[:, j]), shift-stabilized.

    Zero-weight components are excluded so they cannot drag the shift and
    underflow the whole row.
    """
    if np.any(weights <= 0.0):
        keep = weights > 0.0
        logp = logp[:, keep]
        weights = weights[keep]
    amax = np.max(logp, axis=1)
    return amax + np.log(np.exp(logp - amax[:, None]) @ weights)


def chi_square_tail(t: float, m: int) -> float:
    """P(||y||^2 > t*c) for y ~ CN(0, c I_m): exp(-t) sum_{k<m} t^k / k!.

    This is the regularized upper incomplete gamma function of integer
    order m.
    """
    if t < 0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    if math.isinf(t):
        return 0.0
    return float(gammaincc(m, t))


def log_chi_square_tail(log_t: float, m: int) -> float:
    """log of chi_square_tail(exp(log_t), m), stable for extreme thresholds."""
    if log_t == -math.inf:
        return 0.0
    if log_t > 709.0:  # exp would overflow; the tail is identically 0 there
        return -math.inf
    t = math.exp(log_t)
    terms = np.array([k * log_t - math.lgamma(k + 1) for k in range(m)])
    return float(-t + logsumexp(terms))


class _ConditionalLaws:
    """Pre-factored conditional output laws p(.|x_j) for a fixed atom list.

    For isotropic fading the law depends on the input norm only, so the
    per-sample work reduces to outer products of squared radii against the
    per-atom scalar variances.
    """

    def __init__(self, model: ChannelModel, atoms):
        self.model = model
        self.atoms = np.atleast_2d(np.asarray(atoms, dtype=complex))
        self.norms_sq = np.sum(np.abs(self.atoms) ** 2, axis=1)
        self.iso = model.iso_var is not None
        if self.iso:
            self.scalar_var = model.noise_var + model.iso_var * self.norms_sq
            self.log_norm = model.M * np.log(np.pi * self.scalar_var)
        else:
            self.covs = [conditional_covariance(model, a) for a in self.atoms]

    def stream_stats(self, x, weights, cfg: McConfig, stream: int) -> tuple[float, float]:
        """Mean and SE of ln f_mu(Y) over Y ~ p(.|x), accumulated batch-wise.

        Isotropic channels sample the normalized squared radius directly,
        stratified over equiprobable shells; the general path draws full
        output vectors.
        """
        m = self.model.M
        weights = np.asarray(weights, dtype=float)
        if self.iso:
            cx = self.model.noise_var + self.model.iso_var * float(
                np.real(np.vdot(x, x)))
            ratios = cx / self.scalar_var
            acc = _StratumAccumulator(_n_strata(cfg.samples))
            offset = 0
            for b, nb in _batch_plan(cfg.samples, cfg.effective_batch):
                ids, s = _stratified_radii_sq(derive_seed(cfg.seed, stream, b),
                                              offset, nb, m, acc.n)
                logp = -np.outer(s, ratios) - self.log_norm[None, :]
                acc.add(ids, _weighted_mix(logp, weights))
                offset += nb
            return acc.stats()
        covx = conditional_covariance(self.model, x)
        s1 = 0.0
        s2 = 0.0
        for b, nb in _batch_plan(cfg.samples, cfg.effective_batch):
            w = _complex_standard_normals(derive_seed(cfg.seed, stream, b), nb, m)
            y = w @ covx.factor.T
            logp = np.column_stack([c.log_densities(y) for c in self.covs])
            mix = _weighted_mix(logp, weights)
            s1 += float(mix.sum())
            s2 += float(np.dot(mix, mix))
        n = cfg.samples
        mean = s1 / n
        var = max(s2 - s1 * s1 / n, 0.0) / (n - 1)
        return mean, math.sqrt(var / n)


def _stream_index(mu: DiscreteMeasure, x: np.ndarray) -> int:
    for i in range(mu.n_atoms):
        if np.array_equal(mu.atoms[i], x):
            return i
    return _CROSS_STREAM


def _cross_term_arrays(model, atoms, weights, x, cfg, stream) -> tuple[float, float]:
    laws = _ConditionalLaws(model, atoms)
    return laws.stream_stats(x, weights, cfg, stream)


def cross_term(model: ChannelModel, mu: DiscreteMeasure, x, cfg: McConfig) -> McEstimate:
    """Estimate E_{y ~ p(.|x)}[ln f_mu(y)], in nats.

    When x coincides with an atom of mu, the sample stream matches the one
    mutual_information uses for that atom, so the two estimators decompose
    consistently.
    """
    x = _as_input(model, x)
    if mu.dim != model.N:
        raise ValueError(f"measure dimension {mu.dim} != channel input dimension {model.N}")
    mean, se = _cross_term_arrays(model, mu.atoms, mu.weights, x, cfg,
                                  _stream_index(mu, x))
    return McEstimate(mean, se, cfg.samples, cfg.seed)


def _mutual_information_arrays(model, atoms, weights, cfg):
    """(value, se, cross_means, cross_ses, neg_entropies) for raw atom arrays.

    The conditional-entropy term is exact, so only the mixture cross terms
    carry Monte Carlo error.
    """
    atoms = np.atleast_2d(np.asarray(atoms, dtype=complex))
    weights = np.asarray(weights, dtype=float)
    laws = _ConditionalLaws(model, atoms)
    k = atoms.shape[0]
    neg_h = np.array([-conditional_entropy(model, atoms[i]) for i in range(k)])
    cross = np.empty(k)
    cross_se = np.empty(k)
    for i in range(k):
        cross[i], cross_se[i] = laws.stream_stats(atoms[i], weights, cfg, i)
    value = float(np.dot(weights, neg_h) - np.dot(weights, cross))
    se = float(np.sqrt(np.dot(weights ** 2, cross_se ** 2)))
    return value, se, cross, cross_se, neg_h


def mutual_information(model: ChannelModel, mu: DiscreteMeasure, cfg: McConfig) -> McEstimate:
    """Estimate I(mu; W) = sum_i w_i E_{y~p(.|x_i)}[ln p(y|x_i) - ln f_mu(y)].

    Stratified sampler with cfg.samples draws per atom; the estimate is
    nonnegative up to Monte Carlo error (about -3 standard errors).
    """
    if mu.dim != model.N:
        raise ValueError(f"measure dimension {mu.dim} != channel input dimension {model.N}")
    value, se, _, _, _ = _mutual_information_arrays(model, mu.atoms, mu.weights, cfg)
    return McEstimate(value, se, cfg.samples * mu.n_atoms, cfg.seed)


def shell_probability(model: ChannelModel, x, shell: OutputShell, cfg: McConfig) -> McEstimate:
    """Probability that ||y|| lands in [rho1, rho2) under y ~ p(.|x).

    If C(x) is a scalar multiple of the identity (isotropic channels, or
    M == 1) the value is exact with std_error 0, via the incomplete-gamma
    radial tail; otherwise it is estimated by Monte Carlo.
    """
    x = _as_input(model, x)
    cov = conditional_covariance(model, x)
    c = cov.scalar_variance()
    if c is not None:
        t1 = shell.rho1 ** 2 / c
        t2 = shell.rho2 ** 2 / c if not math.isinf(shell.rho2) else math.inf
        p = chi_square_tail(t1, model.M) - chi_square_tail(t2, model.M)
        return McEstimate(float(p), 0.0, 0, cfg.seed)
    hits = 0.0
    for b, nb in _batch_plan(cfg.samples, cfg.effective_batch):
        w = _complex_standard_normals(derive_seed(cfg.seed, _SHELL_STREAM, b), nb, model.M)
        y = w @ cov.factor.T
        r = np.sqrt(np.sum(np.abs(y) ** 2, axis=1))
        hits += float(np.count_nonzero((r >= shell.rho1) & (r < shell.rho2)))
    n = cfg.samples
    p = hits / n
    var = p * (1.0 - p) * n / (n - 1)
    return McEstimate(p, math.sqrt(var / n), n, cfg.seed)
