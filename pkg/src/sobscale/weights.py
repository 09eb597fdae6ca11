"""Slowly varying weights and interpolation parameters derived from them.

The weight family implemented here consists of iterated-logarithm products

    phi(t) = (log t)^r1 * (log log t)^r2 * ... * (log...log t)^rk,

held constant on an initial interval ``[1, t0]`` so that the function is
positive, continuous, and bounded together with ``1/phi`` on every compact
subinterval of ``[1, oo)``.  These weights vary slowly at infinity in the
sense of Karamata: ``phi(lambda*t)/phi(t) -> 1`` for every ``lambda > 0``.

From a weight ``phi`` and margins ``eps, delta > 0`` the module builds the
reparametrized function

    psi(t) = t^(eps/(eps+delta)) * phi(t^(1/(eps+delta)))   for t >= 1,
    psi(t) = phi(1)                                         for 0 < t < 1,

which serves as the function parameter for interpolation between a pair of
Hilbert spaces whose orders differ by ``eps + delta``.

All objects are immutable and all operations are pure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, ParameterError

__all__ = [
    "SlowVaryWeight",
    "InterpParameter",
    "QuadratureConfig",
    "Verdict",
    "TailClassification",
    "SlowVariationReport",
    "CompanionWeight",
    "PseudoconcavityReport",
    "iterated_log_weight",
    "constant_weight",
    "eval_weight",
    "reciprocal",
    "check_slow_variation",
    "build_interp_parameter",
    "embedding_criterion",
    "companion_weight",
    "check_pseudoconcavity",
    "geometric_grid",
    "log_tower",
]


def log_tower(depth: int) -> float:
    """Smallest t such that the depth-fold iterated log of t is >= 1.

    ``log_tower(0) = 1``, ``log_tower(1) = e``, ``log_tower(2) = e**e``, ...
    """
    if depth < 0:
        raise ParameterError("tower depth must be >= 0")
    value = 1.0
    for _ in range(depth):
        value = math.exp(value)
    return value


def _nested_logs(log_t: np.ndarray, depth: int) -> list[np.ndarray]:
    """Return [log t, log log t, ...] given log t, all entries assumed >= 0."""
    levels = []
    current = np.asarray(log_t, dtype=float)
    for _ in range(depth):
        levels.append(current)
        if len(levels) < depth:
            current = np.log(current)
    return levels


@dataclass(frozen=True)
class SlowVaryWeight:
    """Iterated-log weight, constant on ``[1, splice_point]``.

    Parameters
    ----------
    exponents :
        Powers ``(r1, ..., rk)`` of the nested logarithms.  The empty tuple
        gives the constant weight 1.
    splice_point :
        Point ``t0 >= 1`` below which the weight is frozen at its value at
        ``t0``.  Must be large enough that every nested log at ``t0`` is
        >= 1; the default is the smallest such tower value.
    """

    exponents: tuple[float, ...]
    splice_point: float

    def __post_init__(self) -> None:
        tower = log_tower(len(self.exponents))
        if self.splice_point < tower * (1.0 - 1e-12):
            raise DomainError(
                f"splice point {self.splice_point} is below the tower value "
                f"{tower} required for {len(self.exponents)} nested logs"
            )

    @property
    def depth(self) -> int:
        return len(self.exponents)

    @property
    def splice_value(self) -> float:
        """Constant value taken on ``[1, splice_point]``."""
        return float(np.exp(self._log_raw(np.log(self.splice_point))))

    def _log_raw(self, log_t: np.ndarray) -> np.ndarray:
        """log phi(t) from log t, valid only for t >= splice_point."""
        log_t = np.asarray(log_t, dtype=float)
        if not self.exponents:
            return np.zeros_like(log_t)
        out = np.zeros_like(log_t)
        levels = _nested_logs(log_t, self.depth)
        for r, level in zip(self.exponents, levels):
            # level == 1 at the tower point makes log(level) = 0; values
            # below the splice never reach this code path.
            out = out + r * np.log(np.maximum(level, 1.0))
        return out

    def log_value_given_log(self, log_t):
        """log phi(t) for t = exp(log_t); safe for t far beyond float range."""
        log_t = np.asarray(log_t, dtype=float)
        if np.any(log_t < 0):
            raise DomainError("weight arguments must satisfy t >= 1")
        log_t0 = math.log(self.splice_point)
        spliced = np.maximum(log_t, log_t0)
        out = self._log_raw(spliced)
        if out.ndim == 0:
            return float(out)
        return out

    def log_value(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 1.0):
            raise DomainError("weight arguments must satisfy t >= 1")
        return self.log_value_given_log(np.log(t))

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        values = np.exp(self.log_value(np.atleast_1d(np.asarray(t, dtype=float))))
        return float(values[0]) if scalar else values

    def reciprocal(self) -> "SlowVaryWeight":
        return SlowVaryWeight(
            exponents=tuple(-r for r in self.exponents),
            splice_point=self.splice_point,
        )

    def scaled_exponents(self, factor: float) -> "SlowVaryWeight":
        """Weight with every exponent multiplied by ``factor``."""
        return SlowVaryWeight(
            exponents=tuple(factor * r for r in self.exponents),
            splice_point=self.splice_point,
        )

    def to_dict(self) -> dict:
        return {"exponents": list(self.exponents), "splice_point": self.splice_point}

    @classmethod
    def from_dict(cls, record: dict) -> "SlowVaryWeight":
        return cls(
            exponents=tuple(float(r) for r in record["exponents"]),
            splice_point=float(record["splice_point"]),
        )


def iterated_log_weight(
    exponents: Iterable[float] = (), splice_point: float | None = None
) -> SlowVaryWeight:
    """Construct an iterated-log weight with a default tower splice point."""
    exponents = tuple(float(r) for r in exponents)
    if splice_point is None:
        splice_point = log_tower(len(exponents))
    return SlowVaryWeight(exponents=exponents, splice_point=splice_point)


def constant_weight() -> SlowVaryWeight:
    """The weight identically equal to 1."""
    return iterated_log_weight(())


def eval_weight(weight: SlowVaryWeight, t) -> float:
    """Evaluate ``weight`` at ``t >= 1`` (scalar or array)."""
    return weight(t)


def reciprocal(weight: SlowVaryWeight) -> SlowVaryWeight:
    """The weight ``1/phi``; an involution that flips every exponent."""
    return weight.reciprocal()


def geometric_grid(start: float, stop: float, num: int) -> np.ndarray:
    if not (0 < start < stop) or num < 2:
        raise ParameterError("geometric grid needs 0 < start < stop and num >= 2")
    return np.geomspace(start, stop, num)


@dataclass(frozen=True)
class SlowVariationReport:
    """Deviation profile ``|phi(lambda*t)/phi(t) - 1|`` on a grid."""

    lambdas: tuple[float, ...]
    t_grid: np.ndarray
    deviations: np.ndarray  # shape (len(lambdas), len(t_grid))
    max_deviation: float


def check_slow_variation(
    weight: SlowVaryWeight,
    lambdas: Sequence[float],
    t_grid: np.ndarray,
) -> SlowVariationReport:
    """Measure how far ``phi`` is from exact scale invariance on a grid tail.

    The grid must be increasing with every point >= the splice point, so
    the ratio probes the genuinely varying part of the weight.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be strictly increasing")
    if np.any(t_grid < weight.splice_point * (1 - 1e-12)):
        raise DomainError("t_grid entries must be >= the splice point")
    lambdas = tuple(float(l) for l in lambdas)
    if any(l <= 0 for l in lambdas):
        raise DomainError("lambdas must be positive")
    rows = []
    log_phi_t = weight.log_value(t_grid)
    for lam in lambdas:
        arg = np.maximum(lam * t_grid, 1.0)
        rows.append(np.abs(np.exp(weight.log_value(arg) - log_phi_t) - 1.0))
    deviations = np.array(rows)
    return SlowVariationReport(
        lambdas=lambdas,
        t_grid=t_grid,
        deviations=deviations,
        max_deviation=float(deviations.max(initial=0.0)),
    )


@dataclass(frozen=True)
class InterpParameter:
    """Function parameter ``psi`` built from a weight and margins.

    ``psi(t) = t^theta * phi(t^(1/(eps+delta)))`` for ``t >= 1`` with
    ``theta = eps/(eps+delta)``, and ``psi(t) = phi(1)`` for ``0 < t < 1``.
    Evaluation goes through log space, so arguments far beyond the float
    range are fine as long as their logarithm is supplied.
    """

    base: SlowVaryWeight
    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        if self.epsilon <= 0 or self.delta <= 0:
            raise ParameterError("interpolation margins must satisfy eps, delta > 0")

    @property
    def theta(self) -> float:
        return self.epsilon / (self.epsilon + self.delta)

    def log_value_given_log(self, log_t):
        log_t = np.asarray(log_t, dtype=float)
        below = log_t < 0
        inner = np.where(below, 0.0, log_t) / (self.epsilon + self.delta)
        out = np.where(
            below,
            math.log(self.base.splice_value),
            self.theta * log_t + self.base.log_value_given_log(inner),
        )
        if out.ndim == 0:
            return float(out)
        return out

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t <= 0):
            raise DomainError("interpolation parameters are defined on (0, oo)")
        values = np.exp(self.log_value_given_log(np.log(t)))
        return float(values[0]) if scalar else values


def build_interp_parameter(
    weight: SlowVaryWeight, epsilon: float, delta: float
) -> InterpParameter:
    """Interpolation parameter for a pair of spaces ``eps`` below and
    ``delta`` above the target order."""
    return InterpParameter(base=weight, epsilon=epsilon, delta=delta)


class Verdict(enum.Enum):
    CONVERGENT = "convergent"
    DIVERGENT = "divergent"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for the tail-integral classifier.

    ``t_max`` bounds the quadrature range, ``margin`` is the decision margin
    on the fitted tail exponent, ``n_windows`` the number of tail windows
    used for the exponent fit, ``samples_per_window`` the sampling density.
    ``drift_tol`` separates a genuinely constant window slope from one that
    is still drifting; ``drift_band`` is the neighbourhood of the critical
    exponent -1 inside which a drifting slope triggers a second-level fit.
    """

    t_max: float = 1e12
    margin: float = 1e-3
    n_windows: int = 3
    samples_per_window: int = 48
    drift_tol: float = 5e-3
    drift_band: float = 0.15

    def __post_init__(self) -> None:
        if self.t_max <= 10.0:
            raise ParameterError("t_max must exceed 10")
        if self.margin <= 0:
            raise ParameterError("margin must be positive")


@dataclass(frozen=True)
class TailClassification:
    """Outcome of the numeric convergence test for a tail integral."""

    verdict: Verdict
    fitted_exponent: float
    second_level_exponent: float | None
    partial_integrals: tuple[tuple[float, float], ...]
    note: str


def _window_slopes(
    h: Callable[[np.ndarray], np.ndarray],
    x_lo: float,
    x_hi: float,
    config: QuadratureConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-window slopes of log h against log x, with window midpoints."""
    edges = np.geomspace(x_lo, x_hi, config.n_windows + 1)
    slopes = []
    mids = []
    for a, b in zip(edges[:-1], edges[1:]):
        xs = np.geomspace(a, b, config.samples_per_window)
        ys = np.log(h(xs))
        slopes.append(np.polyfit(np.log(xs), ys, 1)[0])
        mids.append(math.sqrt(a * b))
    return np.array(slopes), np.array(mids)


def _fit_tail_exponent(
    h: Callable[[np.ndarray], np.ndarray],
    x_lo: float,
    x_hi: float,
    config: QuadratureConfig,
) -> tuple[float, bool]:
    """Tail exponent of h and whether the window slopes are still drifting.

    A constant window slope is reported as-is (the function is a clean
    power).  A drifting slope is extrapolated against 1/log(midpoint),
    which removes the leading correction coming from powers of nested
    logarithms.
    """
    slopes, mids = _window_slopes(h, x_lo, x_hi, config)
    drift = float(slopes.max() - slopes.min())
    if drift <= config.drift_tol or len(slopes) == 1:
        return float(np.mean(slopes)), False
    inv_log_mid = 1.0 / np.log(mids)
    coeffs = np.polyfit(inv_log_mid, slopes, 1)
    return float(coeffs[1]), True  # intercept: slope extrapolated to x -> oo


def _classify_integrand(
    h: Callable[[np.ndarray], np.ndarray],
    x_lo: float,
    x_hi: float,
    config: QuadratureConfig,
    allow_descend: bool = True,
) -> tuple[Verdict, float, float | None, str]:
    """Classify convergence of ``int h(x) dx`` near infinity.

    Convergence holds when h decays strictly faster than 1/x; the decision
    compares the fitted exponent against -1 with the configured margin.
    A slope that is clean (non-drifting) is trusted directly; a drifting
    slope is trusted only away from the critical band around -1.  The
    remaining boundary cases descend one level: ``int h dx`` is rewritten
    with ``x = e^v`` and the factor ``h(e^v) e^v`` is classified against
    log v, which resolves pure powers of the next nested logarithm.
    Second-level calls are heuristic for families within ``margin`` of the
    critical exponent.
    """
    exponent, drifting = _fit_tail_exponent(h, x_lo, x_hi, config)
    away = abs(exponent + 1.0) > config.drift_band
    decided_zone = (not drifting) or away or (not allow_descend)
    if decided_zone and exponent < -1.0 - config.margin:
        return Verdict.CONVERGENT, exponent, None, "tail exponent below -1"
    if decided_zone and exponent > -1.0 + config.margin:
        return Verdict.DIVERGENT, exponent, None, "tail exponent above -1"
    if not allow_descend:
        return Verdict.INCONCLUSIVE, exponent, None, "boundary exponent, no descent"

    def h_next(v: np.ndarray) -> np.ndarray:
        x = np.exp(v)
        return h(x) * x

    v_lo, v_hi = math.log(x_lo), math.log(x_hi)
    verdict, second, _, _ = _classify_integrand(
        h_next, v_lo, v_hi, config, allow_descend=False
    )
    if verdict is Verdict.INCONCLUSIVE:
        note = "ambiguous at second level"
    else:
        note = f"decided at second level (exponent {second:+.4f})"
    return verdict, exponent, second, note


def _weight_integrand(weight_or_callable, power: float) -> Callable:
    """Integrand ``u -> phi(e^u)^(-power)`` in the log substitution."""
    if isinstance(weight_or_callable, SlowVaryWeight):
        w = weight_or_callable

        def h(u: np.ndarray) -> np.ndarray:
            return np.exp(-power * np.asarray(w.log_value_given_log(u)))

        return h
    func = weight_or_callable

    def h(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.asarray(func(np.exp(u)), dtype=float) ** (-power)

    return h


def _tail_windows(weight_or_callable, config: QuadratureConfig) -> tuple[float, float]:
    u_max = math.log(config.t_max)
    if isinstance(weight_or_callable, SlowVaryWeight):
        u_min = max(math.log(weight_or_callable.splice_point), 1.0)
    else:
        u_min = 1.0
    x_lo = max(u_max / 10.0, u_min * 1.5 + 0.5)
    return x_lo, u_max


def _classify_weight_tail(
    weight_or_callable, power: float, config: QuadratureConfig
) -> tuple[Verdict, float, float | None, str, tuple[tuple[float, float], ...]]:
    h = _weight_integrand(weight_or_callable, power)
    x_lo, x_hi = _tail_windows(weight_or_callable, config)
    if isinstance(weight_or_callable, SlowVaryWeight):
        u_start = math.log(weight_or_callable.splice_point)
    else:
        u_start = 0.0
    # Partial integrals over a decade ladder, for trend inspection.
    checkpoints = np.geomspace(10.0, config.t_max, 12)
    partials = []
    total = 0.0
    prev_u = u_start
    try:
        for t_ck in checkpoints:
            u_ck = math.log(t_ck)
            if u_ck <= prev_u:
                partials.append((float(t_ck), total))
                continue
            piece, _ = integrate.quad(h, prev_u, u_ck, limit=200)
            total += piece
            prev_u = u_ck
            partials.append((float(t_ck), total))
    except Exception:
        return (
            Verdict.INCONCLUSIVE,
            float("nan"),
            None,
            "quadrature failure",
            tuple(partials),
        )
    verdict, exponent, second, note = _classify_integrand(h, x_lo, x_hi, config)
    return verdict, exponent, second, note, tuple(partials)


def embedding_criterion(
    weight, config: QuadratureConfig | None = None
) -> TailClassification:
    """Classify convergence of ``int_1^oo dt / (t * phi(t)^2)``.

    The integral is computed in the substitution ``u = log t``; the verdict
    comes from a hierarchical fit of the integrand's tail exponent.  A
    boundary case that the fit cannot decide within tolerance is reported
    as inconclusive rather than guessed.  Accepts a weight object or any
    positive callable on ``[1, oo)``.
    """
    config = config or QuadratureConfig()
    verdict, exponent, second, note, partials = _classify_weight_tail(
        weight, 2.0, config
    )
    return TailClassification(
        verdict=verdict,
        fitted_exponent=exponent,
        second_level_exponent=second,
        partial_integrals=partials,
        note=note,
    )


@dataclass(frozen=True)
class CompanionWeight:
    """Weight ``phi0(t) = phi(t) * sqrt(tail(t))`` with a convergent tail.

    ``tail(t)`` is ``int_t^oo dtau / (tau * phi(tau)^power)`` with power 1
    for the ``"single"`` variant and 2 for ``"squared"``.  The companion
    decays relative to ``phi`` and satisfies the squared-tail convergence
    test itself whenever the base weight does; the report fields carry that
    numeric evidence.
    """

    base: SlowVaryWeight
    variant: str
    power: float
    _u_nodes: np.ndarray = field(repr=False)
    _tail_values: np.ndarray = field(repr=False)
    _ext_coeff: float = field(repr=False)
    _ext_exponent: float = field(repr=False)
    ratio_grid: np.ndarray = field(repr=False)
    ratio_profile: np.ndarray = field(repr=False)
    tail_classification: TailClassification = field(repr=False)
    companion_criterion: TailClassification = field(repr=False)
    single_vs_squared_note: str = ""

    def tail(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < 1.0):
            raise DomainError("companion weights are defined for t >= 1")
        u = np.log(np.maximum(t, 1.0))
        u_max = self._u_nodes[-1]
        inside = np.interp(u, self._u_nodes, self._tail_values)
        p = self._ext_exponent
        beyond = self._ext_coeff * np.maximum(u, u_max) ** (p + 1.0) / (-1.0 - p)
        values = np.where(u <= u_max, inside, beyond)
        return float(values[0]) if scalar else values

    def __call__(self, t):
        return self.base(t) * np.sqrt(self.tail(t))


def companion_weight(
    weight: SlowVaryWeight,
    variant: str = "single",
    config: QuadratureConfig | None = None,
) -> CompanionWeight:
    """Build the tail-integral companion of a weight.

    ``variant`` selects the power of ``phi`` in the tail integrand:
    ``"single"`` integrates ``dtau/(tau*phi)``, ``"squared"`` integrates
    ``dtau/(tau*phi^2)``.  The construction refuses (with the variant named)
    when the chosen tail diverges.  The two variants are deliberately both
    available; they genuinely differ, and the report notes for which weights
    they disagree about convergence.
    """
    if variant not in ("single", "squared"):
        raise ParameterError("variant must be 'single' or 'squared'")
    config = config or QuadratureConfig()
    power = 1.0 if variant == "single" else 2.0
    verdict, exponent, second, note, partials = _classify_weight_tail(
        weight, power, config
    )
    if verdict is not Verdict.CONVERGENT:
        raise DomainError(
            f"tail integral for the '{variant}' variant does not converge "
            f"({verdict.value}; fitted exponent {exponent:+.4f})"
        )
    classification = TailClassification(
        verdict=verdict,
        fitted_exponent=exponent,
        second_level_exponent=second,
        partial_integrals=partials,
        note=note,
    )

    h = _weight_integrand(weight, power)
    u0 = math.log(weight.splice_point)
    u_max = math.log(config.t_max)
    u_nodes = np.linspace(min(u0, 0.0), u_max, 8193)
    values = h(u_nodes)
    cumulative = integrate.cumulative_simpson(values, x=u_nodes, initial=0.0)
    total = cumulative[-1]
    # Analytic extension beyond u_max from the fitted tail power.
    x_lo, x_hi = _tail_windows(weight, config)
    xs = np.geomspace(x_lo, x_hi, 64)
    slope, intercept = np.polyfit(np.log(xs), np.log(h(xs)), 1)
    if slope >= -1.0:
        raise DomainError(
            f"fitted tail power {slope:+.4f} of the '{variant}' variant does "
            "not integrate at infinity"
        )
    ext_coeff = math.exp(intercept)
    ext_tail = ext_coeff * u_max ** (slope + 1.0) / (-1.0 - slope)
    tail_values = total - cumulative + ext_tail

    grid = np.geomspace(max(10.0, weight.splice_point * 10.0), 1e10, 16)
    other_power = 3.0 - power
    other_verdict, _, _, _, _ = _classify_weight_tail(weight, other_power, config)
    disagreement = (
        "variants agree on convergence"
        if other_verdict is Verdict.CONVERGENT
        else f"the other variant (power {other_power:g}) is {other_verdict.value}"
    )

    companion = CompanionWeight(
        base=weight,
        variant=variant,
        power=power,
        _u_nodes=u_nodes,
        _tail_values=tail_values,
        _ext_coeff=ext_coeff,
        _ext_exponent=slope,
        ratio_grid=grid,
        ratio_profile=np.zeros_like(grid),
        tail_classification=classification,
        companion_criterion=classification,  # placeholder, replaced below
        single_vs_squared_note=disagreement,
    )
    ratio = companion(grid) / weight(grid)
    object.__setattr__(companion, "ratio_profile", ratio)
    companion_crit = embedding_criterion(companion, config)
    object.__setattr__(companion, "companion_criterion", companion_crit)
    return companion


@dataclass(frozen=True)
class PseudoconcavityReport:
    """Grid evidence that ``psi`` is nondecreasing while ``psi(t)/t`` is
    nonincreasing; a sufficient surrogate for pseudoconcavity near infinity.
    The verdict is advisory."""

    passed: bool
    witnesses: tuple[tuple[float, float, str], ...]
    t_grid: np.ndarray
    values: np.ndarray


def check_pseudoconcavity(
    psi, t_grid: np.ndarray, rel_tol: float = 1e-10
) -> PseudoconcavityReport:
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be strictly increasing")
    values = np.asarray(psi(t_grid), dtype=float)
    witnesses: list[tuple[float, float, str]] = []
    for i in range(len(t_grid) - 1):
        if values[i + 1] < values[i] * (1.0 - rel_tol):
            witnesses.append((float(t_grid[i]), float(t_grid[i + 1]), "decreasing"))
        r0 = values[i] / t_grid[i]
        r1 = values[i + 1] / t_grid[i + 1]
        if r1 > r0 * (1.0 + rel_tol):
            witnesses.append((float(t_grid[i]), float(t_grid[i + 1]), "ratio-increasing"))
    return PseudoconcavityReport(
        passed=not witnesses,
        witnesses=tuple(witnesses),
        t_grid=t_grid,
        values=values,
    )
