"""Input sequences, belief simulation and behavioural samplers."""

from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from .dataset import Dataset
from .ddm import _trial_params as _ddm_trial_params
from .exceptions import ConstraintError, InputValidationError
from .hgf import HgfParams, hgf_filter
from .lnr import lnr_trial_means
from .rdm import _wald_logcdf, _wald_logpdf, rdm_trial_params
from .wfpt import _lower_logpdf, wfpt_choice_prob

GRID_DT = 1e-3
GRID_TMAX = 10.0


@dataclass(frozen=True)
class BlockDesign:
    """Ordered blocks of target P(u = 1) with their lengths."""

    probs: tuple = (0.2, 0.8, 0.5, 0.8, 0.2, 0.5, 0.2, 0.8, 0.5, 0.8, 0.2, 0.5)
    biased_length: int = 35
    balanced_length: int = 30
    rare_count: int = 7
    min_rare_gap: int = 4
    max_run: int = 3
    max_bigram: int = 8
    max_triplet: int = 3
    max_identical_triplet: int = 1

    def __post_init__(self):
        if any(p not in (0.2, 0.5, 0.8) for p in self.probs):
            raise InputValidationError("block probabilities must be 0.2, 0.5 or 0.8")

    def lengths(self):
        return [self.balanced_length if p == 0.5 else self.biased_length for p in self.probs]

    @property
    def n_trials(self):
        return sum(self.lengths())


def _biased_block(rng, p, design):
    n, k, gap = design.biased_length, design.rare_count, design.min_rare_gap
    slack = n - (gap - 1) * (k - 1)
    if slack < k:
        raise ConstraintError("rare events cannot keep the minimum gap", "min_rare_gap")
    # k sorted distinct slots in [0, slack) spread by (gap - 1) are uniform over valid layouts
    slots = np.sort(rng.choice(slack, size=k, replace=False))
    pos = slots + (gap - 1) * np.arange(k)
    rare = 1.0 if p == 0.2 else 0.0
    block = np.full(n, 1.0 - rare)
    block[pos] = rare
    return block


def _balanced_block(rng, design, max_nodes=200_000):
    n = design.balanced_length
    half = n // 2
    seq = []
    counts = [0, 0]
    bigrams = {}
    triplets = {}
    failures = {"run": 0, "bigram": 0, "triplet": 0, "balance": 0}
    nodes = 0

    def allowed(x):
        if counts[x] >= half:
            failures["balance"] += 1
            return False
        if len(seq) >= design.max_run and all(s == x for s in seq[-design.max_run:]):
            failures["run"] += 1
            return False
        if seq and bigrams.get((seq[-1], x), 0) >= design.max_bigram:
            failures["bigram"] += 1
            return False
        if len(seq) % 3 == 2:
            trip = (seq[-2], seq[-1], x)
            cap = design.max_identical_triplet if len(set(trip)) == 1 else design.max_triplet
            if triplets.get(trip, 0) >= cap:
                failures["triplet"] += 1
                return False
        return True

    def push(x):
        if seq:
            bigrams[(seq[-1], x)] = bigrams.get((seq[-1], x), 0) + 1
        if len(seq) % 3 == 2:
            trip = (seq[-2], seq[-1], x)
            triplets[trip] = triplets.get(trip, 0) + 1
        seq.append(x)
        counts[x] += 1

    def pop():
        x = seq.pop()
        counts[x] -= 1
        if len(seq) % 3 == 2:
            triplets[(seq[-2], seq[-1], x)] -= 1
        if seq:
            bigrams[(seq[-1], x)] -= 1

    def extend():
        nonlocal nodes
        if len(seq) == n:
            return True
        nodes += 1
        if nodes > max_nodes:
            return False
        for x in rng.permutation(2):
            x = int(x)
            if allowed(x):
                push(x)
                if extend():
                    return True
                pop()
        return False

    if not extend():
        worst = max(failures, key=failures.get)
        raise ConstraintError(f"balanced block generation failed; most violated: {worst}", worst)
    return np.asarray(seq, dtype=float)


def generate_input_sequence(seed=0, design=None):
    """Binary input sequence following ``design`` (400 trials by default).

    Deterministic for a given seed (int or ``np.random.SeedSequence``).
    """
    design = BlockDesign() if design is None else design
    rng = np.random.default_rng(seed)
    blocks = []
    for p in design.probs:
        if p == 0.5:
            blocks.append(_balanced_block(rng, design))
        else:
            blocks.append(_biased_block(rng, p, design))
    return np.concatenate(blocks)


def check_block_constraints(u, design=None):
    """Return the list of violated constraint names (empty when all hold)."""
    design = BlockDesign() if design is None else design
    u = np.asarray(u, dtype=int)
    violated = []
    start = 0
    for p, n in zip(design.probs, design.lengths()):
        b = u[start:start + n]
        start += n
        if len(b) != n:
            return ["length"]
        if p != 0.5:
            rare = 1 if p == 0.2 else 0
            pos = np.flatnonzero(b == rare)
            if len(pos) != design.rare_count:
                violated.append("rare_count")
            if len(pos) > 1 and np.diff(pos).min() < design.min_rare_gap:
                violated.append("min_rare_gap")
            continue
        if b.sum() != n // 2:
            violated.append("balance")
        if _max_run(b) > design.max_run:
            violated.append("run")
        bg = {}
        for i in range(n - 1):
            bg[(b[i], b[i + 1])] = bg.get((b[i], b[i + 1]), 0) + 1
        if max(bg.values()) > design.max_bigram:
            violated.append("bigram")
        tg = {}
        for i in range(0, n - 2, 3):
            t = tuple(b[i:i + 3])
            tg[t] = tg.get(t, 0) + 1
        for t, c in tg.items():
            cap = design.max_identical_triplet if len(set(t)) == 1 else design.max_triplet
            if c > cap:
                violated.append("triplet")
                break
    if start != len(u):
        violated.append("length")
    return sorted(set(violated))


def _max_run(b):
    best = run = 1
    for i in range(1, len(b)):
        run = run + 1 if b[i] == b[i - 1] else 1
        best = max(best, run)
    return best


def _grid():
    return np.arange(1, int(round(GRID_TMAX / GRID_DT)) + 1) * GRID_DT


def _inverse_cdf(grid, logdens, uniforms):
    """Sample each row's density (tabulated on ``grid``) by inverse CDF."""
    dens = np.exp(logdens)
    # trapezoid cumulative mass with an implicit zero density at t = 0
    incr = 0.5 * (dens + np.concatenate([np.zeros((dens.shape[0], 1)), dens[:, :-1]], axis=1)) * GRID_DT
    cdf = np.cumsum(incr, axis=1)
    total = cdf[:, -1]
    out = np.empty(dens.shape[0])
    left = np.concatenate([[0.0], grid])
    for i in range(dens.shape[0]):
        c = np.concatenate([[0.0], cdf[i]])
        out[i] = np.interp(uniforms[i] * total[i], c, left)
    return out, total


def sample_ddm_trials(v, a, w, ter, rng, chunk=64):
    """Draw ``(rt, choice)`` for each trial's WFPT parameters.

    The boundary is drawn from the analytic choice probability, the time by
    inverse CDF on a 1 ms grid up to 10 s of that boundary's density.
    """
    v, a, w = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (v, a, w))
    v, a, w = np.broadcast_arrays(v, a, w)
    n = len(v)
    p_upper = wfpt_choice_prob("upper", v, a, w)
    upper = rng.random(n) < p_upper
    uniforms = rng.random(n)
    # upper-boundary times are lower-boundary times of the mirrored process
    vv = np.where(upper, -v, v)
    ww = np.where(upper, 1.0 - w, w)
    grid = _grid()
    T = np.empty(n)
    # identical parameter rows share one tabulated density
    keys = np.column_stack([vv, a, ww])
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    for s in range(0, len(uniq), chunk):
        rows = uniq[s:s + chunk]
        logd = _lower_logpdf(grid[None, :], rows[:, :1], rows[:, 1:2], rows[:, 2:3])
        dens = np.exp(logd)
        incr = 0.5 * (dens + np.concatenate([np.zeros((len(rows), 1)), dens[:, :-1]], axis=1)) * GRID_DT
        cdf = np.concatenate([np.zeros((len(rows), 1)), np.cumsum(incr, axis=1)], axis=1)
        left = np.concatenate([[0.0], grid])
        for j in range(len(rows)):
            members = np.flatnonzero(inverse == s + j)
            T[members] = np.interp(uniforms[members] * cdf[j, -1], cdf[j], left)
    return T + ter, upper.astype(float)


def sample_ddm_trial(wp, ter, rng):
    """Single draw for ``WienerParams`` ``wp``; returns ``(rt, choice)``."""
    rt, choice = sample_ddm_trials(wp.v, wp.a, wp.w, ter, rng)
    return float(rt[0]), float(choice[0])


def sample_lnr_trials(theta_c1, theta_c0, sigma, ter, rng):
    """Two lognormal finishing times per trial; the faster one responds."""
    theta_c1, theta_c0 = np.broadcast_arrays(
        np.atleast_1d(np.asarray(theta_c1, dtype=float)), np.atleast_1d(np.asarray(theta_c0, dtype=float))
    )
    y1 = rng.lognormal(theta_c1, sigma)
    y0 = rng.lognormal(theta_c0, sigma)
    choice = (y1 < y0).astype(float)
    return np.minimum(y1, y0) + ter, choice


def sample_lnr_trial(theta_c1, theta_c0, sigma, ter, rng):
    rt, choice = sample_lnr_trials(theta_c1, theta_c0, sigma, ter, rng)
    return float(rt[0]), float(choice[0])


def sample_wald(a, v, rng):
    """Wald finishing times; ``inf`` when a non-positive drift never arrives."""
    a, v = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=float)), np.atleast_1d(np.asarray(v, dtype=float)))
    out = np.empty(a.shape)
    pos = v > 0
    if pos.any():
        # numpy's wald generator is the transformation-with-uniform-correction method
        out[pos] = rng.wald(a[pos] / v[pos], a[pos] ** 2)
    neg = ~pos
    if neg.any():
        grid = _grid()
        logd = _wald_logpdf(grid[None, :], a[neg][:, None], v[neg][:, None])
        u = rng.random(int(neg.sum()))
        reach = np.exp(_wald_logcdf(GRID_TMAX, a[neg], v[neg]))
        t, _ = _inverse_cdf(grid, logd, rng.random(int(neg.sum())))
        out[neg] = np.where(u < reach, t, np.inf)
    return out


def sample_rdm_trials(a_c1, a_c0, v_c1, v_c0, ter, rng):
    """Race of two Wald accumulators; trials where neither finishes give NaN."""
    a_c1, a_c0, v_c1, v_c0 = np.broadcast_arrays(
        *(np.atleast_1d(np.asarray(x, dtype=float)) for x in (a_c1, a_c0, v_c1, v_c0))
    )
    if np.any(a_c1 <= 0) or np.any(a_c0 <= 0):
        raise InputValidationError("thresholds must be positive")
    y1 = sample_wald(a_c1, v_c1, rng)
    y0 = sample_wald(a_c0, v_c0, rng)
    rt = np.minimum(y1, y0) + ter
    choice = (y1 < y0).astype(float)
    lost = ~np.isfinite(rt)
    rt[lost] = np.nan
    choice[lost] = np.nan
    return rt, choice


def sample_rdm_trial(a_c1, a_c0, v_c1, v_c0, ter, rng):
    rt, choice = sample_rdm_trials(a_c1, a_c0, v_c1, v_c0, ter, rng)
    return float(rt[0]), float(choice[0])


def simulate_responses(model, params, u, muhat1, rng):
    """Sample ``(rt, choice)`` for every trial given beliefs ``muhat1``.

    ``params`` is a mapping of native decision parameters.
    """
    p = SimpleNamespace(**params)
    u = np.asarray(u, dtype=float)
    if model == "ddm":
        v, a, w = _ddm_trial_params(muhat1, u, p)
        if np.any(a <= 0):
            raise InputValidationError("boundary separation became non-positive")
        return sample_ddm_trials(v, a, w, p.ter, rng)
    if model == "lnr":
        t1, t0 = lnr_trial_means(muhat1, u, p)
        return sample_lnr_trials(t1, t0, p.sigma, getattr(p, "ter", 0.0), rng)
    if model == "rdm":
        a1, a0, v1, v0 = rdm_trial_params(muhat1, u, p)
        return sample_rdm_trials(a1, a0, v1, v0, getattr(p, "ter", 0.0), rng)
    raise InputValidationError(f"unknown model {model!r}")


def simulate_dataset(model, params, u, omega2=-4.0, rng=None, mu2_init=0.0, sigma2_init=1.0):
    """Simulate one subject: beliefs from the HGF, then behaviour.

    The returned Dataset keeps every sampled response (no anticipation
    cutoff), matching how synthetic subjects are fitted in recovery runs.
    """
    rng = np.random.default_rng(rng)
    traj = hgf_filter(u, HgfParams(omega2, mu2_init, sigma2_init))
    rt, choice = simulate_responses(model, params, u, traj.muhat1, rng)
    return Dataset(u=u, rt=rt, choice=choice, rt_cutoff=0.0)
