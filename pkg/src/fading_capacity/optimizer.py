"""Discrete-input capacity optimization under an average power constraint.

Smith-style outer loop: multiplicative weight updates on a fixed support,
golden-section moves of atom radii, insertion of new atoms where the scan of
the optimality functional dips negative, and dual bisection of the power
multiplier until the optimal measure's power matches the budget. All Monte
Carlo evaluations reuse common random numbers (streams keyed by atom index),
so comparisons between nearby supports are low-variance and the whole run is
deterministic for a fixed seed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelModel, _complex_standard_normals, conditional_entropy
from .errors import NotConvergedError
from .estimate import (McConfig, McEstimate, _batch_plan, _ConditionalLaws,
                       _n_strata, _stratified_radii_sq, _weighted_mix,
                       derive_seed, mutual_information)
from .kkt import KktContext, KktReport, kkt_scan, radial_scan_grid
from .measure import DiscreteMeasure, PowerConstraint, average_power

# tail atoms equilibrate at astronomically small weights (a 1e-9 mass can lift
# the optimality functional by 0.1 nats in its own far region), so the
# optimizer floor sits just above the measure module's 1e-15 pruning floor
_PRUNE_FLOOR = 1e-14
_MERGE_SQ = 1e-10


@dataclass(frozen=True)
class OptimizerConfig:
    """Budgets and tolerances for optimize_measure.

    kkt_tolerance is in nats and should stay above roughly three standard
    errors of the Monte Carlo config; search_radius_sq caps the squared norm
    scanned for new atoms (None picks 32 * a * N at run time).
    """

    mc: McConfig = field(default_factory=lambda: McConfig(samples=200_000, seed=0))
    max_atoms: int = 6
    outer_iterations: int = 10
    weight_iterations: int = 300
    kkt_tolerance: float = 5e-3
    power_tolerance: float = 0.02
    search_radius_sq: float | None = None

    def __post_init__(self):
        if self.max_atoms < 1 or self.outer_iterations < 1 or self.weight_iterations < 1:
            raise ValueError("iteration budgets must be positive")
        if not (self.kkt_tolerance > 0.0 and self.power_tolerance > 0.0):
            raise ValueError("tolerances must be positive")
        if self.search_radius_sq is not None and not self.search_radius_sq > 0.0:
            raise ValueError("search_radius_sq must be positive")
        if self.kkt_tolerance < 5e-3 and self.mc.samples < 200_000:
            warnings.warn("kkt_tolerance below 5e-3 normally needs >= 2e5 samples per atom "
                          "to keep the standard error under a third of the tolerance",
                          stacklevel=2)


@dataclass(frozen=True)
class Optimum:
    """Certified optimization result.

    capacity_estimate is a fresh-seed Monte Carlo evaluation of the mutual
    information at the final measure; kkt_report is the certification scan;
    converged means no scan value below -kkt_tolerance, all support
    residuals within kkt_tolerance, and power within tolerance of the budget.
    """

    measure: DiscreteMeasure
    capacity_estimate: McEstimate
    gamma: float
    kkt_report: KktReport
    converged: bool


class _SupportEvaluator:
    """Cached per-atom log densities for a fixed support.

    Streams match the public estimators (seed, atom index, batch index), so
    weight iterations reuse one set of samples: the objective is a smooth
    deterministic function of the weights. Isotropic channels carry the
    radial-shell stratification of the public estimators.
    """

    def __init__(self, model: ChannelModel, atoms, mc: McConfig):
        self.model = model
        self.atoms = np.atleast_2d(np.asarray(atoms, dtype=complex))
        self.mc = mc
        self.k = self.atoms.shape[0]
        self.iso = model.iso_var is not None
        laws = _ConditionalLaws(model, self.atoms)
        self.norms_sq = laws.norms_sq
        self.neg_h = np.array([-conditional_entropy(model, self.atoms[i])
                               for i in range(self.k)])
        self.n_strata = _n_strata(mc.samples) if self.iso else 1
        self._chunks: list[list[tuple]] = []
        for i in range(self.k):
            stratum = []
            offset = 0
            for b, nb in _batch_plan(mc.samples, mc.effective_batch):
                seed_key = derive_seed(mc.seed, i, b)
                if self.iso:
                    ids, s = _stratified_radii_sq(seed_key, offset, nb,
                                                  model.M, self.n_strata)
                    ratios = laws.scalar_var[i] / laws.scalar_var
                    logp = -np.outer(s, ratios) - laws.log_norm[None, :]
                else:
                    w = _complex_standard_normals(seed_key, nb, model.M)
                    y = w @ laws.covs[i].factor.T
                    ids = np.zeros(nb, dtype=int)
                    logp = np.column_stack([c.log_densities(y)
                                            for c in laws.covs])
                stratum.append((ids, logp))
                offset += nb
            self._chunks.append(stratum)

    def cross_means(self, weights) -> np.ndarray:
        weights = np.asarray(weights, dtype=float)
        means = np.empty(self.k)
        for i, stratum in enumerate(self._chunks):
            sums = np.zeros(self.n_strata)
            counts = np.zeros(self.n_strata)
            for ids, logp in stratum:
                mix = _weighted_mix(logp, weights)
                sums += np.bincount(ids, weights=mix, minlength=self.n_strata)
                counts += np.bincount(ids, minlength=self.n_strata)
            means[i] = float(np.sum(sums / counts)) / self.n_strata
        return means

    def mutual_information(self, weights) -> float:
        weights = np.asarray(weights, dtype=float)
        return float(np.dot(weights, self.neg_h) - np.dot(weights, self.cross_means(weights)))

    def lagrangian(self, weights, gamma: float, a: float) -> float:
        power = float(np.dot(weights, self.norms_sq) / self.model.N)
        return self.mutual_information(weights) - gamma * (power - a)


def _multiplicative_solve(ev: _SupportEvaluator, gamma: float, a: float,
                          tol: float, iterations: int, w0=None):
    """Blahut-Arimoto-style ascent of I - gamma*(P - a) over the simplex.

    Returns (weights, scores, lagrangian); scores are the per-atom gains
    D_i - gamma*(||x_i||^2/N - a), equalized on the support at a fixed point.
    """
    k = ev.k
    w = np.full(k, 1.0 / k) if w0 is None else np.asarray(w0, dtype=float).copy()
    w = np.maximum(w, 0.0)
    w /= w.sum()
    penalty = gamma * (ev.norms_sq / ev.model.N - a)
    scores = np.zeros(k)
    value = 0.0
    for _ in range(iterations):
        d = ev.neg_h - ev.cross_means(w)
        scores = d - penalty
        value = float(np.dot(w, scores))
        active = w > 1e-12
        if not np.any(active) or \
                float(np.max(np.abs(scores[active] - value))) <= tol:
            break
        shifted = scores - scores.max()
        # floor keeps squashed weights recoverable (0.0 would stick forever)
        w_new = np.maximum(w * np.exp(shifted), 1e-20)
        w_new /= w_new.sum()
        if float(np.max(np.abs(w_new - w))) < 1e-14:
            w = w_new
            break
        w = w_new
    return w, scores, value


def optimize_weights(model: ChannelModel, atoms, a: float, gamma: float,
                     cfg: OptimizerConfig) -> np.ndarray:
    """Optimal weights on a fixed support for the power-penalized objective.

    Multiplicative updates w_i <- w_i exp(D_i - gamma ||x_i||^2 / N) / Z with
    common random numbers across iterations; stops when the active per-atom
    gains agree with the objective value within kkt_tolerance, or when the
    iteration budget runs out. Always returns a simplex point.
    """
    atoms = np.atleast_2d(np.asarray(atoms, dtype=complex))
    if atoms.shape[0] == 0:
        raise ValueError("need at least one atom")
    ev = _SupportEvaluator(model, atoms, cfg.mc)
    w, _, _ = _multiplicative_solve(ev, gamma, a, cfg.kkt_tolerance,
                                    cfg.weight_iterations)
    return w


def _unit_direction(atom: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(atom)
    if norm == 0.0:
        u = np.zeros_like(atom)
        u[0] = 1.0
        return u
    return atom / norm


def _golden_max(f, lo: float, hi: float, evals: int = 14):
    """Golden-section maximization on [lo, hi]; returns the best evaluated point."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    cache: dict[float, float] = {}

    def F(x):
        if x not in cache:
            cache[x] = f(x)
        return cache[x]

    a, b = float(lo), float(hi)
    F(a)
    F(b)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    for _ in range(evals):
        if F(c) >= F(d):
            b, d = d, c
            c = b - invphi * (b - a)
        else:
            a, c = c, d
            d = a + invphi * (b - a)
    best = max(cache, key=cache.get)
    return best, cache[best]


def _consolidate(atoms: np.ndarray, weights: np.ndarray):
    """Merge near-duplicate atoms and drop under-floor weights."""
    k = atoms.shape[0]
    order = np.argsort(-weights)
    keep: list[int] = []
    w = weights.copy()
    for i in order:
        merged = False
        for j in keep:
            gap = float(np.sum(np.abs(atoms[i] - atoms[j]) ** 2))
            scale = 1.0 + max(float(np.sum(np.abs(atoms[i]) ** 2)),
                              float(np.sum(np.abs(atoms[j]) ** 2)))
            if gap <= _MERGE_SQ * scale:
                w[j] += w[i]
                merged = True
                break
        if not merged:
            keep.append(i)
    keep_mask = np.zeros(k, dtype=bool)
    keep_mask[keep] = True
    keep_mask &= w >= _PRUNE_FLOOR
    if not np.any(keep_mask):
        keep_mask[int(np.argmax(w))] = True
    changed = not np.all(keep_mask) or len(keep) != k
    atoms = atoms[keep_mask]
    w = w[keep_mask]
    return atoms, w / w.sum(), changed


def _move_radii(model, atoms, weights, gamma, a, mc, srs, current_value,
                evals: int = 10):
    """Coordinate descent on each atom's squared norm along its own direction.

    Atoms with negligible weight are left where the insertion scan put them.
    """
    atoms = atoms.copy()
    moved = False
    best_value = current_value
    for i in range(atoms.shape[0]):
        # the objective cannot resolve a nano-weight atom's position; those
        # stay where the insertion scan put them
        if weights[i] < 1e-5:
            continue
        t_i = float(np.sum(np.abs(atoms[i]) ** 2))
        u_i = _unit_direction(atoms[i])
        others = np.delete(atoms, i, axis=0)

        def objective(t):
            cand = math.sqrt(max(t, 0.0)) * u_i
            if others.shape[0]:
                gaps = np.sum(np.abs(others - cand) ** 2, axis=1)
                if np.min(gaps) <= _MERGE_SQ * (1.0 + max(t, 0.0)):
                    return -math.inf
            trial = atoms.copy()
            trial[i] = cand
            ev = _SupportEvaluator(model, trial, mc)
            return ev.lagrangian(weights, gamma, a)

        if t_i > 0.0:
            lo, hi = t_i / 4.0, min(4.0 * t_i, srs)
        else:
            lo, hi = 0.0, max(a * model.N, 1e-3)
        if hi <= lo:
            continue
        t_best, f_best = _golden_max(objective, lo, hi, evals)
        if f_best > best_value + 1e-12 and abs(t_best - t_i) > 1e-9 * (1.0 + t_i):
            atoms[i] = math.sqrt(t_best) * u_i
            best_value = f_best
            moved = True
    return atoms, moved, best_value


def _insertion_candidate(model, atoms, weights, ctx, mc, tol, srs, ppd, decades):
    mu = DiscreteMeasure(atoms, weights)
    grid = radial_scan_grid(model, srs, points_per_decade=ppd, decades=decades,
                            seed=mc.seed)
    report = kkt_scan(model, mu, ctx, grid, mc)
    worst = min(report.points, key=lambda p: (p.value, p.norm_sq))
    if worst.value < -tol:
        return worst.x.copy()
    return None


def insert_atom(model: ChannelModel, mu: DiscreteMeasure, ctx: KktContext,
                cfg: OptimizerConfig) -> np.ndarray | None:
    """Most negative scan point below -kkt_tolerance, or None when the scan is clean.

    Ties break toward the smallest radius for determinism.
    """
    srs = cfg.search_radius_sq if cfg.search_radius_sq is not None \
        else 48.0 * ctx.a * model.N
    return _insertion_candidate(model, mu.atoms, mu.weights, ctx, cfg.mc,
                                cfg.kkt_tolerance, srs, 64, 4)


def _equilibrate_small_atoms(ev: _SupportEvaluator, w, gamma: float, a: float,
                             tol: float, small: float = 0.05):
    """Pin small weights to their stationary values by log-weight bisection.

    Multiplicative updates crawl when an atom's gain sits within ~0.01 nats of
    the objective: a freshly inserted or dying atom can need thousands of
    steps. The gain is monotone decreasing in the atom's own weight, so
    bisection settles it directly; atoms whose gain stays below the objective
    even at negligible weight are zeroed for pruning.
    """
    penalty = gamma * (ev.norms_sq / ev.model.N - a)

    def stats(ww):
        sc = ev.neg_h - ev.cross_means(ww) - penalty
        return sc, float(np.dot(ww, sc))

    def reweighted(ww, i, wi):
        out = ww.copy()
        out[i] = 0.0
        s = out.sum()
        if s <= 0.0:
            return ww
        out *= (1.0 - wi) / s
        out[i] = wi
        return out

    w = np.asarray(w, dtype=float).copy()
    lw_floor = math.log(1e-15)
    for _ in range(min(2 * ev.k, 6)):
        scores, value = stats(w)
        gaps = scores - value
        cand = [i for i in range(ev.k)
                if w[i] <= small and abs(gaps[i]) > tol and w[i] > 0.0]
        if not cand:
            break
        i = max(cand, key=lambda j: abs(gaps[j]))
        lo, hi = lw_floor, math.log(small)
        sc_lo, val_lo = stats(reweighted(w, i, math.exp(lo)))
        if sc_lo[i] - val_lo <= tol:
            # not support-worthy even with negligible mass
            w = reweighted(w, i, 0.0)
            continue
        sc_hi, val_hi = stats(reweighted(w, i, math.exp(hi)))
        if sc_hi[i] - val_hi >= -tol:
            w = reweighted(w, i, small)  # wants real mass; main solve takes over
            continue
        for _ in range(16):
            mid = 0.5 * (lo + hi)
            sc_m, val_m = stats(reweighted(w, i, math.exp(mid)))
            if sc_m[i] - val_m > 0.0:
                lo = mid
            else:
                hi = mid
        w = reweighted(w, i, math.exp(0.5 * (lo + hi)))
    scores, value = stats(w)
    return w, scores, value


def _match_power(ev: _SupportEvaluator, a: float, cfg: OptimizerConfig,
                 weight_iters: int, gamma_hint: float | None = None, w0=None):
    """Bisect gamma until the weight-optimal measure's power matches the budget.

    The support is fixed, so power is a monotone non-increasing function of
    gamma and the weight solves reuse one sample cache. Returns
    (gamma, weights, scores, value, power); gamma = 0 when the unconstrained
    weights already satisfy the budget.
    """
    tol_w = cfg.kkt_tolerance / 3.0
    # the tail of the optimality functional is razor-sensitive to gamma, so
    # match power well inside the feasibility envelope
    target = a * min(0.5 * cfg.power_tolerance, 2e-3)

    def solve(gamma, w_init):
        w, scores, value = _multiplicative_solve(ev, gamma, a, tol_w,
                                                 weight_iters, w_init)
        w, scores, value = _equilibrate_small_atoms(ev, w, gamma, a, tol_w)
        w, scores, value = _multiplicative_solve(ev, gamma, a, tol_w,
                                                 min(weight_iters, 40), w)
        power = float(np.dot(w, ev.norms_sq) / ev.model.N)
        return w, scores, value, power

    # w_lo tracks the equilibrium on the high-power side; warm starts come
    # from there because the low-power side can collapse onto the zero atom.
    w_lo, scores, value, power = solve(0.0, w0)
    if power <= a + target:
        return 0.0, w_lo, scores, value, power
    g_lo = 0.0
    g_hi = gamma_hint if gamma_hint else 1.0
    bracketed = False
    for _ in range(60):
        w_hi, sc_hi, val_hi, p_hi = solve(g_hi, w_lo)
        if p_hi <= a:
            bracketed = True
            break
        g_lo, w_lo = g_hi, w_hi
        g_hi *= 2.0
    if not bracketed:
        return g_hi, w_hi, sc_hi, val_hi, p_hi
    if gamma_hint and g_lo == 0.0:
        # tighten the lower bracket near the hint instead of bisecting from 0
        g_try = 0.5 * g_hi
        for _ in range(6):
            w_try, sc_try, val_try, p_try = solve(g_try, w_lo)
            if p_try > a:
                g_lo, w_lo = g_try, w_try
                break
            g_hi, w_hi, sc_hi, val_hi, p_hi = g_try, w_try, sc_try, val_try, p_try
            g_try *= 0.5
    best = ((0, abs(p_hi - a)), g_hi, w_hi, sc_hi, val_hi, p_hi)
    for _ in range(40):
        if best[0][1] <= target:
            break
        g_mid = 0.5 * (g_lo + g_hi)
        w_mid, sc, val, p = solve(g_mid, w_lo)
        feasible = p <= a * (1.0 + cfg.power_tolerance)
        key = (0 if feasible else 1, abs(p - a))
        if key < best[0]:
            best = (key, g_mid, w_mid, sc, val, p)
        if p > a:
            g_lo, w_lo = g_mid, w_mid
        else:
            g_hi = g_mid
        if g_hi - g_lo <= 1e-10 * max(1.0, g_hi):
            break
    _, gamma, w, scores, value, power = best
    return gamma, w, scores, value, power


def _adapt_support(model, a, atoms, weights, gamma, mc, cfg, srs, ppd, decades,
                   rounds, weight_iters, insert_tol):
    """Alternate power-matched weight solves, radius moves, and insertions."""
    value = 0.0
    power = a
    for rnd in range(rounds):
        # rotate streams across rounds so one unlucky draw cannot freeze a
        # wrong keep-or-kill verdict; the caller certifies on the base seed
        mc_rnd = McConfig(samples=mc.samples,
                          seed=derive_seed(mc.seed, 0xAD, rnd), batch=mc.batch)
        ev = _SupportEvaluator(model, atoms, mc_rnd)
        w0 = weights if weights.shape[0] == ev.k else None
        gamma, weights, scores, value, power = _match_power(
            ev, a, cfg, weight_iters, gamma, w0)
        atoms, weights, pruned = _consolidate(atoms, weights)
        atoms, moved, value = _move_radii(model, atoms, weights, gamma, a,
                                          mc_rnd, srs, value)
        inserted = False
        if atoms.shape[0] < cfg.max_atoms:
            ctx = KktContext(gamma, a, max(value, 0.0))
            scan_mc = McConfig(samples=mc.samples,
                               seed=derive_seed(mc.seed, 0x5CA7, rnd),
                               batch=mc.batch)
            cand = _insertion_candidate(model, atoms, weights, ctx, scan_mc,
                                        insert_tol, srs, ppd, decades)
            if cand is not None:
                # refuse near-duplicates: local placement is the mover's job
                t_cand = float(np.sum(np.abs(cand) ** 2))
                gaps = np.sum(np.abs(atoms - cand) ** 2, axis=1)
                if np.min(gaps) > 1e-3 * (1.0 + t_cand):
                    eps = 0.02
                    atoms = np.vstack([atoms, cand])
                    weights = np.append(weights * (1.0 - eps), eps)
                    inserted = True
        if not (pruned or moved or inserted):
            break
    return atoms, weights, gamma, value, power


def optimize_measure(model: ChannelModel, constraint: PowerConstraint,
                     cfg: OptimizerConfig) -> Optimum:
    """Search for the capacity-achieving discrete measure at power budget a.

    A fast low-sample phase adapts the support (weights, radii, insertions)
    with the multiplier re-matched to the power budget at every round; a full
    fidelity phase polishes it. The returned Optimum carries a fresh-seed
    capacity estimate and a full-density KKT scan as the certificate;
    converged=False flags a dirty certificate or a power mismatch rather
    than raising.
    """
    a = constraint.a
    srs = cfg.search_radius_sq if cfg.search_radius_sq is not None \
        else 48.0 * a * model.N
    e0 = np.zeros(model.N, dtype=complex)
    e0[0] = 1.0
    atoms = np.vstack([np.zeros(model.N, dtype=complex),
                       math.sqrt(2.0 * a * model.N) * e0])
    weights = np.array([0.5, 0.5])
    fast_mc = McConfig(samples=min(max(cfg.mc.samples // 4, 20_000), cfg.mc.samples),
                       seed=cfg.mc.seed, batch=cfg.mc.batch)
    fast_iters = min(cfg.weight_iterations, 80)

    atoms, weights, gamma, value, power = _adapt_support(
        model, a, atoms, weights, None, fast_mc, cfg, srs, 16, 3,
        cfg.outer_iterations, fast_iters, 2.0 * cfg.kkt_tolerance)
    atoms, weights, gamma, value, power = _adapt_support(
        model, a, atoms, weights, gamma, cfg.mc, cfg, srs, 32, 4,
        max(2, cfg.outer_iterations // 3), cfg.weight_iterations,
        cfg.kkt_tolerance)

    # Final equilibration and certificate at full fidelity.
    atoms, weights, _ = _consolidate(atoms, weights)
    ev = _SupportEvaluator(model, atoms, cfg.mc)
    gamma, weights, scores, value, power = _match_power(
        ev, a, cfg, cfg.weight_iterations, gamma, weights)
    atoms, weights, pruned = _consolidate(atoms, weights)
    if pruned:
        ev = _SupportEvaluator(model, atoms, cfg.mc)
        gamma, weights, scores, value, power = _match_power(
            ev, a, cfg, cfg.weight_iterations, gamma, weights)
    mu = DiscreteMeasure(atoms, weights)
    ctx = KktContext(gamma, a, max(value, 0.0))
    grid = radial_scan_grid(model, srs, points_per_decade=64, decades=4,
                            seed=cfg.mc.seed)
    report = kkt_scan(model, mu, ctx, grid, cfg.mc)
    fresh = McConfig(samples=cfg.mc.samples,
                     seed=derive_seed(cfg.mc.seed, 0xF5E5), batch=cfg.mc.batch)
    capacity = mutual_information(model, mu, fresh)
    residual_ok = max(report.support_residuals()) <= cfg.kkt_tolerance
    scan_ok = not report.violations(cfg.kkt_tolerance)
    power_ok = power <= a * (1.0 + cfg.power_tolerance)
    converged = bool(residual_ok and scan_ok and power_ok)
    return Optimum(measure=mu, capacity_estimate=capacity, gamma=gamma,
                   kkt_report=report, converged=converged)


def estimate_gamma(model: ChannelModel, a: float, cfg: OptimizerConfig) -> float:
    """Central finite-difference slope of the capacity curve at a, clamped at 0.

    Uses optimize_measure at a +/- 5%; raises NotConvergedError if either run
    fails to certify. The slope is strictly positive for this channel family.
    """
    if a <= 0.0:
        raise ValueError(f"power budget must be positive, got {a}")
    delta = 0.05 * a
    caps = []
    for i, point in enumerate((a + delta, a - delta)):
        sub = OptimizerConfig(
            mc=McConfig(samples=cfg.mc.samples,
                        seed=derive_seed(cfg.mc.seed, 0xFD, i), batch=cfg.mc.batch),
            max_atoms=cfg.max_atoms, outer_iterations=cfg.outer_iterations,
            weight_iterations=cfg.weight_iterations,
            kkt_tolerance=cfg.kkt_tolerance, power_tolerance=cfg.power_tolerance,
            search_radius_sq=cfg.search_radius_sq)
        opt = optimize_measure(model, PowerConstraint(point), sub)
        if not opt.converged:
            raise NotConvergedError(f"optimization at a={point} did not certify")
        caps.append(opt.capacity_estimate.value)
    return max((caps[0] - caps[1]) / (2.0 * delta), 0.0)


@dataclass(frozen=True)
class CurvePoint:
    """One capacity-curve sample: budget, capacity estimate, multiplier, flag."""

    a: float
    capacity: McEstimate
    gamma: float
    converged: bool


def capacity_curve(model: ChannelModel, a_grid, cfg: OptimizerConfig) -> list[CurvePoint]:
    """optimize_measure on each budget of a strictly increasing positive grid."""
    a_grid = [float(a) for a in a_grid]
    if not a_grid or any(a <= 0.0 for a in a_grid):
        raise ValueError("a_grid must be nonempty and positive")
    if any(b <= a for a, b in zip(a_grid, a_grid[1:])):
        raise ValueError("a_grid must be strictly increasing")
    points = []
    for i, a in enumerate(a_grid):
        sub = OptimizerConfig(
            mc=McConfig(samples=cfg.mc.samples,
                        seed=derive_seed(cfg.mc.seed, 0xCC, i), batch=cfg.mc.batch),
            max_atoms=cfg.max_atoms, outer_iterations=cfg.outer_iterations,
            weight_iterations=cfg.weight_iterations,
            kkt_tolerance=cfg.kkt_tolerance, power_tolerance=cfg.power_tolerance,
            search_radius_sq=cfg.search_radius_sq)
        opt = optimize_measure(model, PowerConstraint(a), sub)
        points.append(CurvePoint(a=a, capacity=opt.capacity_estimate,
                                 gamma=opt.gamma, converged=opt.converged))
    return points
