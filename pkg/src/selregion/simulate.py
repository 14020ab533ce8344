"""Monte Carlo engine for relay selection, SIR outage and multi-hop routes.

All batch estimators draw their randomness from :class:`~selregion.rng.CounterStream`,
so each trial's outcome is a pure function of ``(seed, trial index)`` and the
estimates do not depend on chunking or on the number of worker threads.
Single-trial entry points take a :class:`numpy.random.Generator` and run the same
vectorised kernels on a one-element batch.

Physical SIR simulation places the interferers of a PPP of density p*lam on a disk
around the receiver.  Interference from beyond that disk is not dropped: with
exponential fading, P(g0 > a + b) = P(g0 > a) P(g0' > b), so the far field is an
independent Bernoulli trial whose success probability is the PPP Laplace
functional over the exterior of the disk (``far_field="exact"``).  Passing
``far_field="truncate"`` ignores it, which biases the success rate upwards.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate

from .analytic import NetworkConfig, SelectionRegion, success_probability
from .errors import InvalidParameterError
from .geometry import AnnularSector, Disk, Point2, nearest_distance_from_uniform, place_uniform
from ._kernels import annulus_power_sums
from .rng import CounterStream, ragged_index

CHUNK = 8192
Z95 = 1.959963984540054

SELECTION_REGION = "selection_region"
NEAREST_NEIGHBOR = "nearest_neighbor"
BEST_PROGRESS = "best_progress"
KINDS = (SELECTION_REGION, NEAREST_NEIGHBOR, BEST_PROGRESS)
MODES = ("semi", "physical")


@dataclass(frozen=True)
class ProtocolSpec:
    """Relay-selection rule.

    ``nearest_neighbor`` is the selection-region rule with r_m = 0.
    ``best_progress`` picks, among receivers in the forward half-disk of radius
    ``field_radius``, the one maximising d cos(theta) exp(-lam p t d^2).
    ``field_radius`` for the sector rules switches on explicit-field sampling.
    """

    kind: str
    phi_sel: float = math.pi / 2
    r_m: float = 0.0
    field_radius: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown protocol kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == NEAREST_NEIGHBOR and self.r_m != 0.0:
            raise InvalidParameterError("nearest_neighbor has r_m = 0 by definition")
        if self.kind != BEST_PROGRESS:
            SelectionRegion(self.phi_sel, self.r_m)
        if self.field_radius is not None and not self.field_radius > self.r_m:
            raise InvalidParameterError("field radius must exceed the reference distance")

    @classmethod
    def selection_region(cls, phi_sel, r_m, field_radius=None):
        return cls(SELECTION_REGION, float(phi_sel), float(r_m), field_radius)

    @classmethod
    def nearest_neighbor(cls, phi_sel, field_radius=None):
        return cls(NEAREST_NEIGHBOR, float(phi_sel), 0.0, field_radius)

    @classmethod
    def best_progress(cls, field_radius=None):
        return cls(BEST_PROGRESS, math.pi, 0.0, field_radius)

    @property
    def region(self) -> SelectionRegion:
        return SelectionRegion(self.phi_sel, self.r_m)

    @property
    def label(self) -> str:
        if self.kind == BEST_PROGRESS:
            return BEST_PROGRESS
        if self.kind == NEAREST_NEIGHBOR:
            return f"{NEAREST_NEIGHBOR}(phi={self.phi_sel:.6g})"
        return f"{SELECTION_REGION}(phi={self.phi_sel:.6g},r_m={self.r_m:.6g})"


@dataclass(frozen=True)
class HopOutcome:
    progress: float
    success: bool
    candidates_evaluated: int
    relay_found: bool
    distance: float = float("nan")
    angle: float = float("nan")


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    std_error: float
    trials: int
    ci95: Tuple[float, float]

    @classmethod
    def from_samples(cls, values, scale: float = 1.0) -> "EstimateWithCI":
        """Mean and standard error of ``scale * values``.

        Sums are exactly rounded (``math.fsum``) so the result does not depend
        on the order in which trials were produced.
        """
        v = np.asarray(values, dtype=float) * scale
        n = v.size
        if n == 0:
            raise InvalidParameterError("an estimate needs at least one trial")
        mean = math.fsum(v) / n
        if n > 1:
            var = math.fsum((v - mean) ** 2) / (n - 1)
            se = math.sqrt(var / n)
        else:
            se = 0.0
        return cls(mean, se, n, (mean - Z95 * se, mean + Z95 * se))

    def z_score(self, target: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.mean == target else math.inf
        return (self.mean - target) / self.std_error


@dataclass
class RouteTrace:
    hops: List[Tuple[Point2, float, bool]] = field(default_factory=list)
    terminated: str = "max_hops"
    deviations: List[float] = field(default_factory=list)


@dataclass(frozen=True)
class HopBatch:
    """Per-trial hop results, aligned with ``trials``."""

    trials: np.ndarray
    distance: np.ndarray
    angle: np.ndarray
    relay_found: np.ndarray
    success: np.ndarray
    candidates: np.ndarray

    @property
    def progress(self) -> np.ndarray:
        p = np.where(self.success, self.distance * np.cos(self.angle), 0.0)
        return np.where(self.relay_found, p, 0.0)

    def __len__(self):
        return int(self.trials.size)


def _check_trials(trials):
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise InvalidParameterError(f"trials must be a positive integer, got {trials!r}")


def _run_chunked(fn, trials: int, workers: int = 1, chunk: int = CHUNK):
    """Apply ``fn`` to consecutive index blocks and return the results in order."""
    blocks = [np.arange(s, min(s + chunk, trials), dtype=np.int64) for s in range(0, trials, chunk)]
    if workers <= 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))


# ---------------------------------------------------------------------------
# interference


def default_trunc_radius(cfg: NetworkConfig) -> float:
    return 6.0 / math.sqrt(cfg.p * cfg.lam)


def default_best_progress_radius(cfg: NetworkConfig) -> float:
    return 18.0 / math.sqrt((1.0 - cfg.p) * cfg.lam * math.pi)


def default_field_radius(cfg: NetworkConfig, phi_sel: float, r_m: float) -> float:
    # P(no receiver in the sector) = exp(-30)
    return math.sqrt(r_m * r_m + 60.0 / (cfg.lam * (1.0 - cfg.p) * phi_sel))


def _exterior_integral(a, alpha):
    """int_a^inf v / (1 + v^alpha) dv."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    far = a >= 2.0
    af = a[far]
    total = np.zeros_like(af)
    for n in range(1, 40):
        total += (-1.0) ** (n + 1) * af ** (2.0 - n * alpha) / (n * alpha - 2.0)
    out[far] = total
    whole = (math.pi / alpha) / math.sin(2.0 * math.pi / alpha)
    for i in np.flatnonzero(~far):
        head, _ = integrate.quad(lambda v: v / (1.0 + v ** alpha), 0.0, float(a.flat[i]), epsabs=1e-15)
        out.flat[i] = whole - head
    return out


def far_field_success_probability(cfg: NetworkConfig, d, radius):
    """P(no outage caused by interferers beyond ``radius`` from the receiver).

    exp(-2 pi p lam int_R^inf r s / (r^alpha + s) dr) with s = beta d^alpha.
    With ``radius = 0`` this is the full closed-form success probability.
    """
    d = np.asarray(d, dtype=float)
    s_root = cfg.beta ** (1.0 / cfg.alpha) * d
    with np.errstate(divide="ignore"):
        a = np.where(s_root > 0, radius / np.where(s_root > 0, s_root, 1.0), np.inf)
    integral = np.where(np.isinf(a), 0.0, _exterior_integral(np.where(np.isinf(a), 2.0, a), cfg.alpha))
    out = np.exp(-2.0 * math.pi * cfg.p * cfg.lam * s_root ** 2 * integral)
    return float(out) if out.ndim == 0 else out


def _annulus_interference(cfg, stream, trials, inner, outer, tag):
    """Per-trial sum of rho * gamma * r^-alpha over a PPP on inner <= r <= outer."""
    span2 = outer * outer - inner * inner
    counts = stream.poisson(trials, tag + ".count", cfg.p * cfg.lam * math.pi * span2)
    return annulus_power_sums(
        stream.trial_keys(trials, tag + ".r"),
        stream.trial_keys(trials, tag + ".fading"),
        counts,
        inner * inner,
        span2,
        0.5 * cfg.alpha,
        cfg.rho,
        cfg.mu,
    )


def _annulus_interference_reference(cfg, stream, trials, inner, outer, tag):
    # pure NumPy twin of the compiled kernel, kept for cross-checking
    span2 = outer * outer - inner * inner
    counts = stream.poisson(trials, tag + ".count", cfg.p * cfg.lam * math.pi * span2)
    owner, within = ragged_index(counts)
    r2 = inner * inner + stream.ragged_uniform(trials, owner, within, tag + ".r") * span2
    gamma = -np.log1p(-stream.ragged_uniform(trials, owner, within, tag + ".fading")) / cfg.mu
    with np.errstate(divide="ignore"):
        if cfg.alpha == 3.0:
            path = 1.0 / (r2 * np.sqrt(r2))
        elif cfg.alpha == 4.0:
            path = 1.0 / (r2 * r2)
        else:
            path = r2 ** (-0.5 * cfg.alpha)
        power = cfg.rho * gamma * path
    return np.bincount(owner, weights=power, minlength=trials.size)


def _sir_success_batch(cfg, d, stream, trials, radius, far_field="exact", audit=False):
    """Physical SIR success for each trial; with ``audit`` also the result at 2 * radius.

    The doubled-radius realisation reuses the inner disk and adds an
    independent annulus, so the two outcomes are coupled trial by trial.
    """
    if far_field not in ("exact", "truncate"):
        raise InvalidParameterError(f"far_field must be 'exact' or 'truncate', got {far_field!r}")
    signal = cfg.rho * stream.exponential(trials, "sir.signal", rate=cfg.mu) * np.asarray(d, dtype=float) ** (-cfg.alpha)
    inner = _annulus_interference(cfg, stream, trials, 0.0, radius, "sir.disk")
    u_tail = stream.uniform(trials, "sir.tail")

    def decide(interference, r):
        ok = signal > cfg.beta * interference
        if far_field == "exact":
            ok &= u_tail < far_field_success_probability(cfg, d, r)
        return ok

    base = decide(inner, radius)
    if not audit:
        return base
    ring = _annulus_interference(cfg, stream, trials, radius, 2.0 * radius, "sir.ring")
    return base, decide(inner + ring, 2.0 * radius)


# ---------------------------------------------------------------------------
# relay selection kernels


def _relay_exact(cfg, protocol, stream, trials):
    rx = cfg.lam * (1.0 - cfg.p)
    d = nearest_distance_from_uniform(stream.uniform(trials, "relay.d"), protocol.r_m, protocol.phi_sel, rx)
    theta = protocol.phi_sel * (stream.uniform(trials, "relay.theta") - 0.5)
    found = np.ones(trials.size, dtype=bool)
    return d, theta, found, np.ones(trials.size, dtype=np.int64)


def _field(cfg, region, stream, trials, tag):
    mean = cfg.lam * (1.0 - cfg.p) * region.area
    counts = stream.poisson(trials, tag + ".count", mean)
    owner, within = ragged_index(counts)
    r, theta = place_uniform(
        region,
        stream.ragged_uniform(trials, owner, within, tag + ".r"),
        stream.ragged_uniform(trials, owner, within, tag + ".theta"),
    )
    return counts, owner, r, theta


def _pick(owner, score, n, r, theta):
    """Per-owner argmax of ``score`` (first occurrence on ties)."""
    order = np.lexsort((-score, owner))
    owner_sorted = owner[order]
    first = np.ones(order.size, dtype=bool)
    first[1:] = owner_sorted[1:] != owner_sorted[:-1]
    chosen = order[first]
    d = np.full(n, np.nan)
    th = np.full(n, np.nan)
    d[owner[chosen]] = r[chosen]
    th[owner[chosen]] = theta[chosen]
    return d, th


def _relay_field_sector(cfg, protocol, stream, trials):
    radius = protocol.field_radius or default_field_radius(cfg, protocol.phi_sel, protocol.r_m)
    region = AnnularSector(protocol.phi_sel, protocol.r_m, radius)
    counts, owner, r, theta = _field(cfg, region, stream, trials, "field")
    d, th = _pick(owner, -r, trials.size, r, theta)
    return d, th, counts > 0, counts


def _relay_best_progress(cfg, protocol, stream, trials):
    radius = protocol.field_radius or default_best_progress_radius(cfg)
    region = AnnularSector(math.pi, 0.0, radius)
    counts, owner, r, theta = _field(cfg, region, stream, trials, "field")
    score = r * np.cos(theta) * np.exp(-cfg.lam * cfg.p * cfg.t * r * r)
    d, th = _pick(owner, score, trials.size, r, theta)
    return d, th, counts > 0, counts


def hop_batch(
    cfg: NetworkConfig,
    protocol: ProtocolSpec,
    stream: CounterStream,
    trials: np.ndarray,
    mode: str = "semi",
    trunc_radius: Optional[float] = None,
) -> HopBatch:
    """One hop for each trial index in ``trials``.

    Sector rules draw the relay exactly from its distance law unless the protocol
    carries a ``field_radius``, in which case the receiver field is sampled and
    inspected point by point.  ``mode="semi"`` decides success with probability
    exp(-lam p t d^2); ``mode="physical"`` simulates the interference field.
    """
    if mode not in MODES:
        raise InvalidParameterError(f"mode must be one of {MODES}, got {mode!r}")
    trials = np.asarray(trials, dtype=np.int64)
    if protocol.kind == BEST_PROGRESS:
        d, theta, found, cand = _relay_best_progress(cfg, protocol, stream, trials)
    elif protocol.field_radius is not None:
        d, theta, found, cand = _relay_field_sector(cfg, protocol, stream, trials)
    else:
        d, theta, found, cand = _relay_exact(cfg, protocol, stream, trials)
    d_safe = np.where(found, d, 1.0)
    if mode == "semi":
        ok = stream.uniform(trials, "success") < success_probability(cfg, d_safe)
    else:
        radius = trunc_radius or default_trunc_radius(cfg)
        ok = _sir_success_batch(cfg, d_safe, stream, trials, radius)
    return HopBatch(trials, d, theta, found, ok & found, cand)


def _stream_from(rng: np.random.Generator) -> CounterStream:
    return CounterStream(int(rng.integers(0, 2 ** 63)))


# ---------------------------------------------------------------------------
# public operations


def simulate_sir_success(
    cfg: NetworkConfig, d: float, trunc_radius: Optional[float], rng: np.random.Generator, far_field: str = "exact"
) -> bool:
    """One physical SIR trial for a link of length ``d``."""
    if not d > 0:
        raise InvalidParameterError("link distance must be > 0")
    radius = trunc_radius or default_trunc_radius(cfg)
    ok = _sir_success_batch(cfg, d, _stream_from(rng), np.zeros(1, dtype=np.int64), radius, far_field)
    return bool(ok[0])


def estimate_success_probability(
    cfg: NetworkConfig,
    d: float,
    trials: int,
    trunc_radius: Optional[float] = None,
    seed: int = 0,
    workers: int = 1,
    far_field: str = "exact",
) -> EstimateWithCI:
    _check_trials(trials)
    if not d > 0:
        raise InvalidParameterError("link distance must be > 0")
    radius = trunc_radius or default_trunc_radius(cfg)
    stream = CounterStream(seed)
    parts = _run_chunked(lambda t: _sir_success_batch(cfg, d, stream, t, radius, far_field), trials, workers)
    return EstimateWithCI.from_samples(np.concatenate(parts))


@dataclass(frozen=True)
class TruncationAudit:
    base: EstimateWithCI
    doubled: EstimateWithCI

    @property
    def shift(self) -> float:
        return self.doubled.mean - self.base.mean

    @property
    def shift_in_sigma(self) -> float:
        return abs(self.shift) / self.base.std_error if self.base.std_error > 0 else 0.0


def truncation_audit(
    cfg: NetworkConfig,
    d: float,
    trials: int,
    trunc_radius: Optional[float] = None,
    seed: int = 0,
    workers: int = 1,
    far_field: str = "exact",
) -> TruncationAudit:
    """Success estimates at ``trunc_radius`` and at twice that, on coupled realisations."""
    _check_trials(trials)
    radius = trunc_radius or default_trunc_radius(cfg)
    stream = CounterStream(seed)
    parts = _run_chunked(
        lambda t: np.vstack(_sir_success_batch(cfg, d, stream, t, radius, far_field, audit=True)), trials, workers
    )
    both = np.hstack(parts)
    return TruncationAudit(EstimateWithCI.from_samples(both[0]), EstimateWithCI.from_samples(both[1]))


def simulate_hop(
    cfg: NetworkConfig,
    protocol: ProtocolSpec,
    rng: np.random.Generator,
    mode: str = "semi",
    trunc_radius: Optional[float] = None,
) -> HopOutcome:
    b = hop_batch(cfg, protocol, _stream_from(rng), np.zeros(1, dtype=np.int64), mode, trunc_radius)
    found = bool(b.relay_found[0])
    return HopOutcome(
        progress=float(b.progress[0]),
        success=bool(b.success[0]),
        candidates_evaluated=int(b.candidates[0]),
        relay_found=found,
        distance=float(b.distance[0]) if found else float("nan"),
        angle=float(b.angle[0]) if found else float("nan"),
    )


def run_hops(
    cfg: NetworkConfig,
    protocol: ProtocolSpec,
    trials: int,
    mode: str = "semi",
    seed: int = 0,
    workers: int = 1,
    trunc_radius: Optional[float] = None,
) -> HopBatch:
    _check_trials(trials)
    stream = CounterStream(seed)
    parts = _run_chunked(lambda t: hop_batch(cfg, protocol, stream, t, mode, trunc_radius), trials, workers)
    cat = lambda name: np.concatenate([getattr(p, name) for p in parts])
    return HopBatch(*(cat(n) for n in ("trials", "distance", "angle", "relay_found", "success", "candidates")))


def estimate_density_of_progress(
    cfg: NetworkConfig,
    protocol: ProtocolSpec,
    trials: int,
    mode: str = "semi",
    seed: int = 0,
    workers: int = 1,
    trunc_radius: Optional[float] = None,
) -> EstimateWithCI:
    """p * lam * mean per-hop progress, failed hops counting as zero."""
    batch = run_hops(cfg, protocol, trials, mode, seed, workers, trunc_radius)
    return EstimateWithCI.from_samples(batch.progress, scale=cfg.p * cfg.lam)


def simulate_route(
    cfg: NetworkConfig,
    protocol: ProtocolSpec,
    source: Point2,
    dest: Point2,
    max_hops: int,
    rng: np.random.Generator,
    mode: str = "semi",
    arrival_radius: Optional[float] = None,
) -> RouteTrace:
    """Forward a packet slot by slot, re-aiming the selection region at ``dest``.

    The network is redrawn independently in every slot.  A failed transmission
    leaves the packet in place.  The route ends when the packet is within
    ``arrival_radius`` of ``dest`` (default: r_m, or the receiver spacing
    1/sqrt((1-p) lam) when r_m = 0), when ``max_hops`` slots are used, or when no
    relay exists.
    """
    if max_hops < 1:
        raise InvalidParameterError("max_hops must be >= 1")
    if arrival_radius is None:
        arrival_radius = protocol.r_m if protocol.r_m > 0 else 1.0 / math.sqrt((1.0 - cfg.p) * cfg.lam)
    trace = RouteTrace()
    x, y = source.x, source.y
    for _ in range(max_hops):
        dx, dy = dest.x - x, dest.y - y
        if math.hypot(dx, dy) <= arrival_radius:
            trace.terminated = "reached"
            return trace
        hop = simulate_hop(cfg, protocol, rng, mode)
        if not hop.relay_found:
            trace.terminated = "stuck"
            return trace
        heading = math.atan2(dy, dx)
        if hop.success:
            x += hop.distance * math.cos(heading + hop.angle)
            y += hop.distance * math.sin(heading + hop.angle)
        trace.hops.append((Point2(x, y), hop.progress, hop.success))
        trace.deviations.append(hop.angle)
    if math.hypot(dest.x - x, dest.y - y) <= arrival_radius:
        trace.terminated = "reached"
    return trace


def candidate_count_ratio(
    cfg: NetworkConfig,
    phi_sel: float,
    trials: int,
    r_m: float = 0.0,
    radius: Optional[float] = None,
    seed: int = 0,
    workers: int = 1,
) -> EstimateWithCI:
    """Mean fraction of the receivers within ``radius`` that lie in the selection region.

    Realisations with no receiver in the disk are skipped.  The default radius
    holds 100 receivers on average; for r_m = 0 the expectation is phi / 2pi.
    """
    _check_trials(trials)
    radius = radius or math.sqrt(100.0 / ((1.0 - cfg.p) * cfg.lam * math.pi))
    sector = AnnularSector(phi_sel, r_m, radius) if r_m < radius else None
    disk = Disk(radius)
    stream = CounterStream(seed)

    def block(t):
        counts, owner, r, theta = _field(cfg, disk, stream, t, "ratio")
        inside = sector.contains_polar(r, theta) if sector is not None else np.zeros(r.size, dtype=bool)
        k = np.bincount(owner, weights=inside.astype(float), minlength=t.size)
        keep = counts > 0
        return k[keep] / counts[keep]

    ratios = np.concatenate(_run_chunked(block, trials, workers))
    return EstimateWithCI.from_samples(ratios)
