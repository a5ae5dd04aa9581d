"""Streaming GLR CUSUM detection of a correlation change and hub isolation.

p local detectors watch V_1..V_p and one global detector watches U.  The
pooled local rule stops at the first batch where some G_k exceeds ``a_v``,
the global rule when G_global exceeds ``a_u``; the joint rule stops at the
later of the two and declares the q largest G_k at that time to be hubs.
Variable indices are 0-based internally and 1-based in reports.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from corrhub._glr import make_bank
from corrhub.expfam import GlobalFamily, LocalFamily
from corrhub.specialfn import p0
from corrhub.stats import SummarySample

ONE_SIDED = "one-sided"
TWO_SIDED = "two-sided"
J_MAX = 1e6


class SequencingError(ValueError):
    """A summary sample arrived out of order."""


@dataclass(frozen=True)
class DetectorConfig:
    a_u: float
    a_v: float
    eps_u: float = 1.0
    eps_v: float = 1.0
    q: int = 10
    window: int | None = None
    sidedness: str = ONE_SIDED
    j_max: float = J_MAX

    def __post_init__(self):
        for name in ("a_u", "a_v", "eps_u", "eps_v"):
            val = getattr(self, name)
            if not val > 0:
                raise ValueError(f"{name} must be positive, got {val!r}")
        if int(self.q) != self.q or self.q < 2:
            raise ValueError(f"q must be an integer >= 2, got {self.q!r}")
        if self.window is not None and (int(self.window) != self.window or self.window < 1):
            raise ValueError(f"window must be a positive integer or None, got {self.window!r}")
        if self.sidedness not in (ONE_SIDED, TWO_SIDED):
            raise ValueError(f"sidedness must be {ONE_SIDED!r} or {TWO_SIDED!r}")
        if not self.j_max > 1.0 + max(self.eps_u, self.eps_v):
            raise ValueError("j_max must exceed 1 + eps")

    def validate_for(self, p: int):
        if self.q > p:
            raise ValueError(f"q={self.q} exceeds the dimension p={p}")


@dataclass(frozen=True)
class DetectorState:
    """Immutable snapshot of the engine after ``m`` batches.

    ``local_sums`` and ``global_sum`` are the running sums of the exponential
    sufficient statistics (p-1) P_0(V_k(i)) and (D/2) T(U(i)).
    """

    m: int
    local_sums: np.ndarray
    global_sum: float
    g: np.ndarray
    g_global: float
    tau_v: int | None
    tau_u: int | None
    tau_hb: int | None

    @property
    def stopped(self) -> bool:
        return self.tau_hb is not None


@dataclass(frozen=True)
class DetectionReport:
    n: int
    batches: int
    tau_v: int | None
    tau_u: int | None
    tau_hb: int | None
    selected: list[int]
    g_at_stop: list[float]
    g_global_at_stop: float
    config: dict = field(default_factory=dict)

    @property
    def alarm(self) -> bool:
        return self.tau_hb is not None

    def samples(self, tau: int | None) -> int | None:
        return None if tau is None else tau * self.n

    def to_dict(self) -> dict:
        out = asdict(self)
        out["alarm"] = self.alarm
        out["tau_v_samples"] = self.samples(self.tau_v)
        out["tau_u_samples"] = self.samples(self.tau_u)
        out["tau_hb_samples"] = self.samples(self.tau_hb)
        return out


def isolate(g_at_stop, q: int) -> list[int]:
    """1-based indices of the q largest statistics, ties to the smaller index."""
    g = np.asarray(g_at_stop, dtype=float).reshape(-1)
    if q < 1 or q > g.size:
        raise ValueError(f"q must be in [1, {g.size}], got {q}")
    order = np.lexsort((np.arange(g.size), -g))
    return [int(i) + 1 for i in order[:q]]


def discovery_success(selected, true_hubs) -> bool:
    """True when every true hub index is among the selected ones."""
    return set(true_hubs) <= set(selected)


def first_crossing(trajectory, threshold: float) -> int | None:
    """1-based index of the first entry strictly above ``threshold``."""
    hits = np.flatnonzero(np.asarray(trajectory) > threshold)
    return int(hits[0]) + 1 if hits.size else None


class HubDetector:
    """Single-writer streaming engine; feed ``SummarySample``s in order."""

    def __init__(self, p: int, n: int, cfg: DetectorConfig):
        cfg.validate_for(p)
        self.p = p
        self.n = n
        self.cfg = cfg
        self.local_family = LocalFamily(p, n)
        self.global_family = GlobalFamily(p, n)
        two = cfg.sidedness == TWO_SIDED
        self._local = make_bank(p, cfg.eps_v, two, cfg.j_max, cfg.window)
        self._global = make_bank(1, cfg.eps_u, two, cfg.j_max, cfg.window)
        self.m = 0
        self.tau_v = None
        self.tau_u = None
        self.tau_hb = None
        self._g_stop = None
        self._g_global_stop = None

    @property
    def g(self) -> np.ndarray:
        return self._local.g.copy()

    @property
    def g_global(self) -> float:
        return float(self._global.g[0])

    def update_stats(self, z_local, z_global: float) -> DetectorState:
        """Advance with precomputed sufficient statistics for one batch."""
        g = self._local.update(z_local)
        gg = float(self._global.update([z_global])[0])
        self.m += 1
        if self.tau_v is None and g.max() > self.cfg.a_v:
            self.tau_v = self.m
        if self.tau_u is None and gg > self.cfg.a_u:
            self.tau_u = self.m
        if self.tau_hb is None and self.tau_v is not None and self.tau_u is not None:
            self.tau_hb = self.m
            self._g_stop = g.copy()
            self._g_global_stop = gg
        return self.state

    def update(self, sample: SummarySample) -> DetectorState:
        if sample.batch_index != self.m + 1:
            raise SequencingError(f"expected batch {self.m + 1}, got {sample.batch_index}")
        v = np.asarray(sample.v, dtype=float)
        if v.size != self.p:
            raise ValueError(f"sample has {v.size} local statistics, detector expects {self.p}")
        z_local = self.local_family.scale * p0(np.clip(v, 0.0, 1.0), self.n)
        z_global = self.global_family.scale * p0(min(max(sample.u, 0.0), 1.0), self.n)
        return self.update_stats(z_local, z_global)

    @property
    def state(self) -> DetectorState:
        return DetectorState(
            m=self.m,
            local_sums=self._local.total.copy(),
            global_sum=float(self._global.total[0]),
            g=self.g,
            g_global=self.g_global,
            tau_v=self.tau_v,
            tau_u=self.tau_u,
            tau_hb=self.tau_hb,
        )

    def report(self) -> DetectionReport:
        if self.tau_hb is not None:
            g_stop, gg_stop = self._g_stop, self._g_global_stop
        else:
            g_stop, gg_stop = self.g, self.g_global
        selected = isolate(g_stop, self.cfg.q) if self.tau_hb is not None else []
        finite = [float(x) if math.isfinite(x) else None for x in g_stop]
        return DetectionReport(
            n=self.n,
            batches=self.m,
            tau_v=self.tau_v,
            tau_u=self.tau_u,
            tau_hb=self.tau_hb,
            selected=selected,
            g_at_stop=finite,
            g_global_at_stop=gg_stop if math.isfinite(gg_stop) else None,
            config=asdict(self.cfg),
        )
