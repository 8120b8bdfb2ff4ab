"""Parameter-recovery harness: simulate subjects, refit, summarise."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import InputValidationError
from .inference import MODEL_PARAMS, FitConfig, fit, resolve_config
from .simulation import generate_input_sequence, simulate_dataset

DEFAULT_OMEGA2 = -4.0
DEFAULT_SUBJECTS = 30

_DDM_INTERCEPTS = [(1.2, 2.0), (1.1, 0.97), (2.0, 1.1), (1.78, 0.62)]
_DDM_SLOPES = {
    "b_w": [(0.3, 0.7)] * 4,
    "b_a": [(-0.72, -1.68), (-0.66, -1.54), (-1.2, -2.8), (-1.06, -2.49)],
    "b_v": [(1.2, 2.8), (0.58, 1.36), (0.66, 1.54), (0.37, 0.87)],
}
_LNR_CELLS = [
    (-0.53, -0.47, (-1.04, -0.19)),
    (-0.75, -0.25, (-1.26, -0.41)),
    (0.19, -0.49, (-0.32, 0.53)),
    (-0.10, -0.20, (-0.61, 0.24)),
]
_RDM_INTERCEPTS = [(2.0, 2.5, 2.5), (2.0, 3.55, 1.45), (3.0, 2.0, 2.0), (3.0, 2.84, 1.16)]


@dataclass
class Scenario:
    """Ground truth for one simulated cell plus the configurations to refit."""

    name: str
    model: str
    params: dict
    fit_configs: list
    omega2: float = DEFAULT_OMEGA2

    def __post_init__(self):
        if self.model not in MODEL_PARAMS:
            raise InputValidationError(f"unknown model {self.model!r}")
        missing = set(MODEL_PARAMS[self.model]) - set(self.params) - {"ter"}
        if missing:
            raise InputValidationError(f"scenario {self.name}: missing parameters {sorted(missing)}")
        self.params = {k: float(v) for k, v in self.params.items()}
        self.params.setdefault("ter", 0.0)
        for cfg in self.fit_configs:
            if resolve_config(cfg)[0] != self.model:
                raise InputValidationError(f"scenario {self.name}: config {cfg} does not fit model {self.model}")

    def to_dict(self):
        return asdict(self)


GRIDS = ("ddm_w", "ddm_a", "ddm_v", "lnr", "rdm_a", "rdm_v")


def _ddm_grid(grid, slope):
    out = []
    for i, (a_a, a_v) in enumerate(_DDM_INTERCEPTS):
        for j, b in enumerate(_DDM_SLOPES[slope][i]):
            params = dict(b_w=0.0, a_a=a_a, b_a=0.0, a_v=a_v, b_v=0.0, ter=0.15)
            params[slope] = b
            out.append(Scenario(f"{grid}_cell{2 * i + j + 1}", "ddm", params, [grid, "ddm_full"]))
    return out


def scenario_grid(grid):
    """Standard eight-cell recovery grid for one reduced configuration.

    ``grid`` is one of ``GRIDS``. Cells pair four intercept sets (high/low
    accuracy, fast/slow responses) with a low and a high slope. Each cell
    refits the reduced configuration and, for DDM and RDM, the full one.
    RDM slopes shift the intercept by 0.3 or 0.7 of its value at the
    extreme belief, i.e. ``-0.6`` and ``-1.4`` times the intercept.
    """
    if grid in ("ddm_w", "ddm_a", "ddm_v"):
        return _ddm_grid(grid, "b_" + grid[-1])
    if grid == "lnr":
        out = []
        for i, (a, b_val, bs) in enumerate(_LNR_CELLS):
            for j, b in enumerate(bs):
                params = dict(a=a, b_val=b_val, b=b, sigma=0.25, ter=0.0)
                out.append(Scenario(f"lnr_cell{2 * i + j + 1}", "lnr", params, ["lnr"]))
        return out
    if grid in ("rdm_a", "rdm_v"):
        out = []
        for i, (a_a, a_v, b_val) in enumerate(_RDM_INTERCEPTS):
            if grid == "rdm_a":
                slopes = [(-0.6 * a_a, 0.0), (-1.4 * a_a, 0.0)]
            else:
                slopes = [(0.0, -0.6 * a_v), (0.0, -1.4 * a_v)]
            for j, (b_a, b_v) in enumerate(slopes):
                params = dict(a_a=a_a, b_a=round(b_a, 3), a_v=a_v, b_val=b_val, b_v=round(b_v, 3), ter=0.0)
                out.append(Scenario(f"{grid}_cell{2 * i + j + 1}", "rdm", params, [grid, "rdm_full"]))
        return out
    raise InputValidationError(f"unknown grid {grid!r}; choose from {', '.join(GRIDS)}")


@dataclass
class RecoveryReport:
    """Raw per-subject estimates plus per-cell summaries."""

    raw: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def cell(self, scenario, config):
        """Summary rows of one (scenario, configuration) cell keyed by parameter."""
        return {r["param"]: r for r in self.summary if r["scenario"] == scenario and r["config"] == config}

    def estimates(self, scenario, config, param):
        return np.array(
            [r["estimate"] for r in self.raw if r["scenario"] == scenario and r["config"] == config and r["param"] == param]
        )


def subject_seed(seed, scenario_index, subject_index):
    return np.random.SeedSequence(seed, spawn_key=(1, scenario_index, subject_index))


def sequence_seed(seed):
    return np.random.SeedSequence(seed, spawn_key=(0,))


def _subject_task(args):
    si, subj, scenario, u, seed, base_config = args
    rng = np.random.default_rng(subject_seed(seed, si, subj))
    data = simulate_dataset(scenario.model, scenario.params, u, scenario.omega2, rng)
    truth = dict(scenario.params, omega2=scenario.omega2)
    rows, failures = [], []
    for cfg_id in scenario.fit_configs:
        cfg = FitConfig.from_dict(dict(base_config, config_id=cfg_id))
        try:
            res = fit(data, cfg)
        except Exception as exc:  # recorded per cell, never fatal
            failures.append(dict(scenario=scenario.name, subject=subj, config=cfg_id, error=repr(exc)))
            continue
        for name, value in res.native.items():
            rows.append(
                dict(
                    scenario=scenario.name,
                    subject=subj,
                    config=cfg_id,
                    param=name,
                    true=truth[name],
                    estimate=value,
                    free=name in res.free_names,
                    converged=res.converged,
                    lme=res.lme,
                )
            )
    return rows, failures


def summarize(raw):
    """Median, IQR and 2.5/50/97.5 percentiles per (scenario, config, param)."""
    groups = {}
    for r in raw:
        groups.setdefault((r["scenario"], r["config"], r["param"]), []).append(r)
    out = []
    for (scen, cfg, param), rows in groups.items():
        est = np.array([r["estimate"] for r in rows])
        q25, q50, q75 = np.percentile(est, [25, 50, 75])
        lo, hi = np.percentile(est, [2.5, 97.5])
        out.append(
            dict(
                scenario=scen,
                config=cfg,
                param=param,
                true=rows[0]["true"],
                free=rows[0]["free"],
                n=len(est),
                n_converged=int(sum(r["converged"] for r in rows)),
                median=float(q50),
                iqr=float(q75 - q25),
                p2_5=float(lo),
                p50=float(q50),
                p97_5=float(hi),
            )
        )
    return out


def run_recovery(scenarios, n_subjects=DEFAULT_SUBJECTS, seed=0, fit_config=None, jobs=1, u=None):
    """Simulate ``n_subjects`` per scenario, refit every configured model, summarise.

    Each subject draws from its own stream derived from (seed, scenario
    index, subject index), so any ``jobs`` value yields the same report.
    All subjects share one input sequence (``u`` or a generated one).
    """
    base = {} if fit_config is None else dict(fit_config)
    base.pop("config_id", None)
    if u is None:
        u = generate_input_sequence(sequence_seed(seed))
    tasks = [
        (si, subj, sc, u, seed, base) for si, sc in enumerate(scenarios) for subj in range(n_subjects)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_subject_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_subject_task(t) for t in tasks]
    raw, failures = [], []
    for rows, fails in results:
        raw.extend(rows)
        failures.extend(fails)
    return RecoveryReport(raw=raw, summary=summarize(raw), failures=failures)


def slope_ttest(estimates, popmean=0.0):
    """Two-tailed one-sample t-test of per-subject slopes; returns (t, p, df)."""
    from scipy.stats import ttest_1samp

    est = np.asarray(estimates, dtype=float)
    res = ttest_1samp(est, popmean)
    return float(res.statistic), float(res.pvalue), len(est) - 1

