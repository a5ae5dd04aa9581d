"""Simulation harness: covariance construction, Gaussian streams with a change
point, ground truth, Monte-Carlo delay / false-alarm / false-isolation
estimates, and the null-law validation suite.

Randomness comes from NumPy's PCG64 seeded through ``SeedSequence``; path
``i`` of a scenario with seed ``s`` uses ``SeedSequence([s, i])`` so results
do not depend on scheduling order.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import integrate, stats as sps

from corrhub import expfam
from corrhub.detect import DetectorConfig, HubDetector, discovery_success, first_crossing, isolate
from corrhub.specialfn import p0
from corrhub.stats import local_stats, sample_correlation, sample_degree, summarize

log = logging.getLogger(__name__)

DEFAULT_CAP = 100_000
HUB_TOL = 1e-12


class CovarianceConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class CovarianceSpec:
    """Row-sparse post-change covariance drawn from a Wishart matrix.

    ``dof`` is the Wishart degrees of freedom (``None`` means ``p``); small
    values give strongly correlated pairs.  ``diag_boost`` adds
    ``diag_boost * trace / p`` to the diagonal after the positivity repair,
    weakening every correlation.
    """

    p: int
    j: int
    seed: int
    diag_boost: float = 0.0
    dof: int | None = None

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be at least 2")
        if not 1 <= self.j < self.p:
            raise ValueError(f"need 1 <= j < p, got j={self.j}")
        if self.diag_boost < 0:
            raise ValueError("diag_boost must be non-negative")
        if self.dof is not None and self.dof < 1:
            raise ValueError("dof must be positive")


def rowsparse_mask(p: int, j: int) -> np.ndarray:
    """Boolean pattern of retained entries.

    The top-left j x j block, the diagonal, and for 1-based rows
    k = j+1 .. floor((p+j)/2) the symmetric pair (k, p+j-k).
    """
    keep = np.eye(p, dtype=bool)
    keep[:j, :j] = True
    for k in range(j + 1, (p + j) // 2 + 1):
        i = p + j - k
        keep[k - 1, i - 1] = keep[i - 1, k - 1] = True
    return keep


def gen_rowsparse_cov(spec: CovarianceSpec) -> np.ndarray:
    p = spec.p
    dof = spec.dof or p
    rng = np.random.default_rng(spec.seed)
    a = rng.standard_normal((p, dof))
    sigma = np.where(rowsparse_mask(p, spec.j), a @ a.T, 0.0)
    mean_diag = np.trace(sigma) / p
    lam = np.linalg.eigvalsh(sigma)[0]
    if lam <= 1e-10 * mean_diag:
        sigma += (abs(lam) + 0.05 * mean_diag) * np.eye(p)
    if spec.diag_boost:
        sigma += spec.diag_boost * mean_diag * np.eye(p)
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise CovarianceConstructionError(f"covariance for seed {spec.seed} is not positive definite") from exc
    return sigma


def correlation_of(sigma: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.diag(sigma))
    r = sigma / np.outer(d, d)
    np.fill_diagonal(r, 1.0)
    return r


def population_hubs(sigma: np.ndarray, tol: float = HUB_TOL) -> list[int]:
    """1-based variables attaining the largest population V_k; empty if diagonal."""
    v = local_stats(correlation_of(sigma))
    top = v.max()
    if top <= 0.0:
        return []
    return [int(k) + 1 for k in np.flatnonzero(v >= top - tol)]


@dataclass(frozen=True)
class GroundTruth:
    hubs: list[int]
    j: np.ndarray
    theta: float
    batches: int


class GaussianStream:
    """Batches of N(mu_m, Sigma_0) before ``gamma`` and N(mu_m, Sigma) after.

    ``sigma_pre`` is the diagonal of Sigma_0.  Each batch gets its own mean
    vector ``mean_shift * N(0, I)``, drawn from a generator separate from the
    data so that paired runs with and without shifts see the same noise.
    """

    def __init__(self, sigma_post, n, gamma=1, sigma_pre=None, seed=None, mean_shift=0.0):
        self.n = n
        self.p = sigma_post.shape[0]
        self.gamma = gamma
        self._chol = np.linalg.cholesky(sigma_post)
        pre = np.ones(self.p) if sigma_pre is None else np.asarray(sigma_pre, dtype=float)
        self._pre_sd = np.sqrt(pre)
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        data_ss, mean_ss = ss.spawn(2)
        self._rng = np.random.default_rng(data_ss)
        self._mean_rng = np.random.default_rng(mean_ss)
        self.mean_shift = mean_shift
        self.m = 0

    def next_batch(self) -> np.ndarray:
        self.m += 1
        z = self._rng.standard_normal((self.n, self.p))
        x = z * self._pre_sd if self.m < self.gamma else z @ self._chol.T
        mu = self._mean_rng.standard_normal(self.p)
        if self.mean_shift:
            x = x + self.mean_shift * mu
        return x


def ground_truth(sigma, n: int, calib_batches: int = 1000, seed=0) -> GroundTruth:
    """Hubs from the population matrix; J_k and theta by MLE on simulated batches."""
    p = sigma.shape[0]
    if calib_batches < 1:
        raise ValueError("need at least one calibration batch")
    lf, gf = expfam.LocalFamily(p, n), expfam.GlobalFamily(p, n)
    stream = GaussianStream(sigma, n, gamma=1, seed=seed)
    p0_local = np.empty((calib_batches, p))
    p0_global = np.empty(calib_batches)
    for b in range(calib_batches):
        s = summarize(stream.next_batch())
        p0_local[b] = p0(s.v, n)
        p0_global[b] = p0(s.u, n)
    j = np.array([expfam.mle_local(p0_local[:, k], lf) for k in range(p)])
    theta = 1.0 / (gf.scale * p0_global.mean()) if p0_global.mean() > 0 else math.inf
    return GroundTruth(hubs=population_hubs(sigma), j=j, theta=theta, batches=calib_batches)


@dataclass(frozen=True)
class Scenario:
    """A complete, reproducible experiment description.

    ``gamma`` is the change batch (``math.inf`` for null runs).  The
    post-change covariance is ``sigma`` if given, else built from ``cov``.
    """

    n: int
    p: int
    cfg: DetectorConfig
    cov: CovarianceSpec | None = None
    sigma: np.ndarray | None = field(default=None, repr=False, compare=False)
    gamma: float = 1
    paths: int = 1000
    seed: int = 0
    mean_shift: float = 0.0
    cap: int = DEFAULT_CAP
    name: str = ""

    def __post_init__(self):
        if not self.gamma >= 1:
            raise ValueError("gamma must be >= 1")
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if self.cov is None and self.sigma is None:
            raise ValueError("scenario needs a covariance spec or an explicit matrix")

    @cached_property
    def post_covariance(self) -> np.ndarray:
        if self.sigma is not None:
            return np.asarray(self.sigma, dtype=float)
        return gen_rowsparse_cov(self.cov)

    def stream(self, path_index: int) -> GaussianStream:
        ss = np.random.SeedSequence([self.seed, path_index])
        return GaussianStream(self.post_covariance, self.n, self.gamma, seed=ss, mean_shift=self.mean_shift)


@dataclass(frozen=True)
class PathRecord:
    path: int
    tau_v: int | None
    tau_u: int | None
    tau_hb: int | None
    selected: list[int]
    success: bool
    censored: bool
    batches: int


def run_path(sc: Scenario, path_index: int, true_hubs=None) -> PathRecord:
    """Feed one simulated stream to a fresh detector until alarm or ``sc.cap``."""
    hubs = population_hubs(sc.post_covariance) if true_hubs is None else true_hubs
    det = HubDetector(sc.p, sc.n, sc.cfg)
    stream = sc.stream(path_index)
    while det.tau_hb is None and det.m < sc.cap:
        x = stream.next_batch()
        s = summarize(x)
        det.update(replace(s, batch_index=det.m + 1))
    rep = det.report()
    return PathRecord(
        path=path_index,
        tau_v=rep.tau_v,
        tau_u=rep.tau_u,
        tau_hb=rep.tau_hb,
        selected=rep.selected,
        success=rep.alarm and discovery_success(rep.selected, hubs),
        censored=not rep.alarm,
        batches=det.m,
    )


@dataclass
class _Trajectory:
    g: np.ndarray  # (m, p) local GLR statistics
    g_global: np.ndarray  # (m,)

    @property
    def g_max(self) -> np.ndarray:
        return self.g.max(axis=1)


def trace_path(sc: Scenario, path_index: int, a_stop: float) -> _Trajectory:
    """GLR trajectories of one path, run until the joint rule at ``a_stop`` fires.

    Statistics do not depend on thresholds, so every threshold <= a_stop can be
    evaluated on the same trajectory.
    """
    cfg = replace(sc.cfg, a_u=math.inf, a_v=math.inf)
    det = HubDetector(sc.p, sc.n, cfg)
    stream = sc.stream(path_index)
    rows, glob = [], []
    crossed_v = crossed_u = False
    while det.m < sc.cap and not (crossed_v and crossed_u):
        st = det.update(replace(summarize(stream.next_batch()), batch_index=det.m + 1))
        rows.append(st.g)
        glob.append(st.g_global)
        crossed_v = crossed_v or st.g.max() > a_stop
        crossed_u = crossed_u or st.g_global > a_stop
    return _Trajectory(np.array(rows), np.array(glob))


def _path_outcomes(sc, path_index, thresholds, hubs):
    traj = trace_path(sc, path_index, max(thresholds))
    g_max = traj.g_max
    out = []
    for a in thresholds:
        tv = first_crossing(g_max, a)
        tu = first_crossing(traj.g_global, a)
        if tv is None or tu is None:
            out.append((None, False))
            continue
        thb = max(tv, tu)
        ok = discovery_success(isolate(traj.g[thb - 1], sc.cfg.q), hubs)
        out.append((thb, ok))
    return out, len(g_max)


def _task(args):
    sc, idx, thresholds, hubs = args
    return _path_outcomes(sc, idx, thresholds, hubs)


def _run_many(sc, paths, thresholds, hubs, workers):
    tasks = [(sc, i, thresholds, hubs) for i in range(paths)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_task, tasks, chunksize=max(1, paths // (4 * workers))))
    return [_task(t) for t in tasks]


@dataclass(frozen=True)
class CurveRow:
    threshold: float
    isolation_paths: int
    false_isolations: int
    false_isolation_rate: float
    delay_paths: int
    mean_delay: float
    delay_censored: int
    mfa_paths: int
    mfa: float
    ln_mfa: float
    censored_count: int

    @property
    def false_isolation_se(self) -> float:
        r, k = self.false_isolation_rate, self.isolation_paths
        return math.sqrt(max(r * (1 - r), 1.0 / k) / k) if k else math.nan


@dataclass(frozen=True)
class RunMetrics:
    rows: list[CurveRow]
    hubs: list[int]
    cap: int

    def isolation_table(self):
        return [(r.threshold, r.false_isolations, r.false_isolation_rate, r.isolation_paths) for r in self.rows]

    def delay_table(self):
        return [(r.threshold, r.ln_mfa, r.mean_delay, r.censored_count) for r in self.rows]


def monte_carlo(
    sc: Scenario,
    thresholds,
    isolation_paths: int | None = None,
    delay_paths: int = 0,
    mfa_paths: int = 0,
    workers: int = 1,
    true_hubs=None,
) -> RunMetrics:
    """Curves over thresholds A = A_u = A_v using common random numbers.

    Change-at-1 paths give false isolation (first ``isolation_paths``) and
    mean delay E_1[tau_HB] in batches (first ``delay_paths``); null paths
    give the mean time to false alarm, with paths hitting ``sc.cap`` counted
    at the cap and reported in ``censored_count``.
    """
    thresholds = [float(a) for a in thresholds]
    if not thresholds or any(a <= 0 for a in thresholds):
        raise ValueError("thresholds must be positive")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly ascending")
    iso = sc.paths if isolation_paths is None else isolation_paths
    if iso + delay_paths + mfa_paths == 0:
        raise ValueError("monte_carlo needs at least one replication")
    hubs = population_hubs(sc.post_covariance) if true_hubs is None else list(true_hubs)
    changed = replace(sc, gamma=1)
    ch = _run_many(changed, max(iso, delay_paths), thresholds, hubs, workers) if max(iso, delay_paths) else []
    null = replace(sc, gamma=math.inf, seed=sc.seed + 1_000_003)
    nl = _run_many(null, mfa_paths, thresholds, hubs, workers) if mfa_paths else []

    rows = []
    for t, a in enumerate(thresholds):
        iso_out = [res[t] for res, _ in ch[:iso]]
        fails = sum(1 for tau, ok in iso_out if not ok)
        d_out = [res[t][0] for res, _ in ch[:delay_paths]]
        d_cens = sum(1 for tau in d_out if tau is None)
        d_vals = [sc.cap if tau is None else tau for tau in d_out]
        n_out = [res[t][0] for res, _ in nl]
        n_cens = sum(1 for tau in n_out if tau is None)
        n_vals = [sc.cap if tau is None else tau for tau in n_out]
        mfa = float(np.mean(n_vals)) if n_vals else math.nan
        rows.append(
            CurveRow(
                threshold=a,
                isolation_paths=iso,
                false_isolations=fails,
                false_isolation_rate=fails / iso if iso else math.nan,
                delay_paths=delay_paths,
                mean_delay=float(np.mean(d_vals)) if d_vals else math.nan,
                delay_censored=d_cens,
                mfa_paths=mfa_paths,
                mfa=mfa,
                ln_mfa=math.log(mfa) if mfa_paths else math.nan,
                censored_count=n_cens,
            )
        )
    return RunMetrics(rows=rows, hubs=hubs, cap=sc.cap)


# --- null-law validation ---------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    detail: str = ""


def null_samples(n: int, p: int, batches: int, rho: float, seed=0):
    """V_1 and d_1(rho) from ``batches`` independent null batches (Sigma = I)."""
    rng = np.random.default_rng(seed)
    v1 = np.empty(batches)
    d1 = np.empty(batches, dtype=int)
    for b in range(batches):
        r = sample_correlation(rng.standard_normal((n, p)))
        row = np.abs(r[0, 1:])
        v1[b] = row.max()
        d1[b] = int((row >= rho).sum())
    return v1, d1


def poisson_chisquare(counts, rate: float, min_expected: float = 5.0):
    """Chi-square fit of integer counts to Poisson(rate); tail pooled into one bin."""
    counts = np.asarray(counts)
    total = counts.size
    k_max = 0
    while total * sps.poisson.sf(k_max, rate) >= min_expected:
        k_max += 1
    probs = sps.poisson.pmf(np.arange(k_max), rate)
    probs = np.append(probs, sps.poisson.sf(k_max - 1, rate))
    obs = np.array([(counts == k).sum() for k in range(k_max)] + [(counts >= k_max).sum()])
    res = sps.chisquare(obs, total * probs)
    return float(res.statistic), float(res.pvalue), len(obs)


def normalization_residuals(p: int, n: int) -> tuple[float, float]:
    """|integral - mass| for f_V(.; 1) and g(.; 1) over (0, 1] by quadrature."""
    lf, gf = expfam.LocalFamily(p, n), expfam.GlobalFamily(p, n)
    out = []
    for fam, logpdf in ((lf, expfam.logpdf_local), (gf, expfam.logpdf_global)):
        mass = 1.0 - math.exp(-fam.stat(0.0))
        val, _ = integrate.quad(lambda y: math.exp(logpdf(y, 1.0, fam)) if y > 0 else 0.0,
                                0.0, 1.0, limit=400, epsabs=1e-13, epsrel=1e-12)
        out.append(abs(val - mass))
    return out[0], out[1]


def validate_null(n: int = 10, p: int = 100, batches: int = 10_000, seed: int = 0,
                  ks_limit: float | None = None) -> list[CheckResult]:
    """Null-law suite: CDF (KS), concentration, Poisson degree law, normalization.

    The concentration check applies to n = 10, p = 100 only.  Below n = 10
    the KS limit widens to 0.08: fewer samples per batch push the law of V_1
    further from the large-p regime.
    """
    lf = expfam.LocalFamily(p, n)
    rate = 1.0
    rho = float(expfam.p0_inverse(rate / lf.scale, n)[0])
    v1, d1 = null_samples(n, p, batches, rho, seed)
    if ks_limit is None:
        ks_limit = 0.05 if n >= 10 else 0.08
    ks = sps.kstest(v1, lambda y: expfam.cdf_local(np.clip(y, 0.0, 1.0), 1.0, lf)).statistic
    checks = [CheckResult("ks_v1", bool(ks <= ks_limit), float(ks), ks_limit, f"{batches} null batches")]
    if n == 10 and p == 100:
        frac = float(np.mean((v1 > 0.55) & (v1 < 0.95)))
        checks.append(CheckResult("concentration_055_095", frac >= 0.95, frac, 0.95))
    lam = lf.scale * float(p0(rho, n))
    stat, pval, bins = poisson_chisquare(d1, lam)
    checks.append(CheckResult("poisson_chisquare_pvalue", pval >= 0.01, pval, 0.01,
                              f"rho={rho:.6f} rate={lam:.4f} chi2={stat:.3f} bins={bins}"))
    se = math.sqrt(lam / batches)
    gap = abs(float(d1.mean()) - lam)
    checks.append(CheckResult("degree_mean_within_3se", bool(gap <= 3 * se), gap, 3 * se))
    res_local, res_global = normalization_residuals(p, n)
    checks.append(CheckResult("normalization_local", res_local <= 1e-6, res_local, 1e-6))
    checks.append(CheckResult("normalization_global", res_global <= 1e-6, res_global, 1e-6))
    return checks


def null_degree_check(n, p, rho, batches, seed=0):
    """Degrees of every variable from full correlation matrices (diagnostic)."""
    rng = np.random.default_rng(seed)
    out = np.empty((batches, p), dtype=int)
    for b in range(batches):
        out[b] = sample_degree(sample_correlation(rng.standard_normal((n, p))), rho)
    return out
