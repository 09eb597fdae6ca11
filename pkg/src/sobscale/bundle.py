"""Rank-p complex vector bundles over the circle with chart calculus.

The circle has circumference ``2*pi`` and charts are arcs given by a center
and half-width, parameterized by arclength.  A chart is represented on a
bounded parameter window inside a periodization box of twice the window
length; everything that matters (bump supports, localized data) lives well
inside the window, so the boxes never see the conceptual extension of the
chart maps.

Bundles are flat: trivializations over different charts are related by an
integer power of one invertible monodromy matrix ``Q``, the power being the
winding between the chart lifts.  This satisfies the cocycle condition
exactly and covers the shipped bundles: the trivial line bundle (``Q = 1``),
the sign-twisted line bundle (``Q = -1``), and a rank-2 bundle whose
transition is a rotation matrix.  A section is equivalently a vector
function ``u`` on the line with ``u(theta + 2*pi) = Q u(theta)``; sampled
per-chart data and an optional exact evaluator in that picture travel
together in :class:`BundleSection`.

The partition of unity is built from the standard smooth compactly
supported profile ``exp(-1/(1-x^2))``, normalized pointwise to sum to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConsistencyError,
    ModelError,
    ParameterError,
    ShapeMismatchError,
    SupportError,
)
from .spectral import (
    FrequencyLattice,
    SpectralFunction,
    coefficients_from_samples,
    evaluate,
    hs_phi_norm,
    mode_weights,
    sup_and_cq_seminorms,
)
from .weights import SlowVaryWeight

__all__ = [
    "ChartSpec",
    "BundleModel",
    "BundleSection",
    "RatioBracket",
    "bump_profile",
    "smoothstep",
    "rotation_monodromy",
    "two_chart_model",
    "three_chart_model",
    "model_from_config",
    "model_to_config",
    "flatten",
    "sew",
    "bundle_norm",
    "bundle_gram",
    "basis_sections",
    "atlas_independence_test",
    "hermitian_pairing",
    "bundle_duality_report",
    "cq_norm",
    "section_to_rows",
    "section_from_rows",
]

TWO_PI = 2.0 * math.pi


def bump_profile(x) -> np.ndarray:
    """Mollifier profile exp(-1/(1-x^2)) on (-1, 1), zero outside."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def smoothstep(x) -> np.ndarray:
    """C^inf transition: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)

    def g(y):
        out = np.zeros_like(y)
        pos = y > 0
        with np.errstate(divide="ignore", over="ignore"):
            out[pos] = np.exp(-1.0 / y[pos])
        return out

    num = g(x)
    den = num + g(1.0 - x)
    return num / den


def _wrap_to_half(theta) -> np.ndarray:
    """Reduce to [-pi, pi)."""
    theta = np.asarray(theta, dtype=float)
    return (theta + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class ChartSpec:
    """Arc chart: center lift, half-width, bump radius, plateau radii, grid.

    The chart covers the arc ``(center - half_width, center + half_width)``
    through the arclength map ``t -> center + t``; its periodization box has
    length ``4 * half_width`` sampled on ``n_grid`` uniform points.
    """

    center: float
    half_width: float
    bump_radius: float
    eta_inner: float
    eta_outer: float
    n_grid: int

    def __post_init__(self) -> None:
        if not (0 < self.bump_radius < self.eta_inner < self.eta_outer < self.half_width):
            raise ModelError(
                "need 0 < bump_radius < eta_inner < eta_outer < half_width"
            )
        if self.half_width >= math.pi:
            raise ModelError("chart half-width must be below pi")
        if self.n_grid < 17 or self.n_grid % 2 == 0:
            # An odd grid makes the sample-to-coefficient map a bijection
            # (no unpaired Nyquist mode), so flattening loses nothing.
            raise ModelError("n_grid must be an odd number >= 17")

    @property
    def box_length(self) -> float:
        return 4.0 * self.half_width

    @property
    def spacing(self) -> float:
        return self.box_length / self.n_grid

    @cached_property
    def grid(self) -> np.ndarray:
        return -self.box_length / 2.0 + self.spacing * np.arange(self.n_grid)

    @cached_property
    def window_mask(self) -> np.ndarray:
        return np.abs(self.grid) < self.half_width - 0.25 * self.spacing

    @cached_property
    def box_lattice(self) -> FrequencyLattice:
        return FrequencyLattice(
            dimension=1, cutoff=(self.n_grid - 1) // 2, box_length=self.box_length
        )

    def bump(self, t) -> np.ndarray:
        """Partition numerator in chart coordinates."""
        return bump_profile(np.asarray(t, dtype=float) / self.bump_radius)

    def eta(self, t) -> np.ndarray:
        """Support cutoff: 1 on [-eta_inner, eta_inner], 0 beyond eta_outer."""
        t = np.abs(np.asarray(t, dtype=float))
        return smoothstep((self.eta_outer - t) / (self.eta_outer - self.eta_inner))


def rotation_monodromy(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class BundleModel:
    """Atlas, partition of unity, and flat transition data over the circle."""

    charts: tuple[ChartSpec, ...]
    rank: int
    monodromy: np.ndarray
    name: str = "bundle"

    def __post_init__(self) -> None:
        if len(self.charts) < 2:
            raise ModelError("need at least two charts")
        q = np.asarray(self.monodromy, dtype=complex)
        if q.shape != (self.rank, self.rank):
            raise ModelError("monodromy shape must match the rank")
        if abs(np.linalg.det(q)) < 1e-12:
            raise ModelError("monodromy must be invertible")
        object.__setattr__(self, "monodromy", q)
        spacing = self.charts[0].spacing
        for chart in self.charts:
            if abs(chart.spacing - spacing) > 1e-12 * spacing:
                raise ModelError("all charts must share one grid spacing")
        for value in [TWO_PI] + [
            c.center - self.charts[0].center for c in self.charts[1:]
        ]:
            steps = value / spacing
            if abs(steps - round(steps)) > 1e-9:
                raise ModelError(
                    "chart shifts and the circumference must be integer "
                    "multiples of the grid spacing"
                )
        theta = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
        if np.any(self._raw_bumps(theta).sum(axis=0) <= 0.0):
            raise ModelError("bump supports do not cover the circle")

    @property
    def kappa(self) -> int:
        return len(self.charts)

    @cached_property
    def _monodromy_powers(self) -> dict:
        return {}

    def monodromy_power(self, n: int) -> np.ndarray:
        cache = self._monodromy_powers
        if n not in cache:
            cache[n] = np.linalg.matrix_power(self.monodromy, n)
        return cache[n]

    def _raw_bumps(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        rows = []
        for chart in self.charts:
            offset = _wrap_to_half(theta - chart.center)
            rows.append(chart.bump(offset))
        return np.array(rows)

    def partition_values(self, theta) -> np.ndarray:
        """chi_j(theta) for all charts; rows sum to 1 exactly by construction."""
        raw = self._raw_bumps(theta)
        return raw / raw.sum(axis=0)

    def partition_on_chart(self, j: int, t) -> np.ndarray:
        """chi_j pulled back through the chart map, in chart coordinates."""
        chart = self.charts[j]
        t = np.asarray(t, dtype=float)
        raw = self._raw_bumps(chart.center + t)
        return chart.bump(t) / raw.sum(axis=0)

    def chart_decomposition(self, theta):
        """Per-chart parameters and winding numbers of lift points.

        Returns a list over charts of ``(tau, n)`` with
        ``theta = center_j + tau + 2*pi*n`` and ``tau`` in ``[-pi, pi)``.
        """
        theta = np.asarray(theta, dtype=float)
        out = []
        for chart in self.charts:
            tau = _wrap_to_half(theta - chart.center)
            n = np.rint((theta - chart.center - tau) / TWO_PI).astype(int)
            out.append((tau, n))
        return out

    def transition(self, l: int, j: int, theta) -> np.ndarray:
        """Transition matrix from chart-j to chart-l components at a point.

        ``theta`` is a scalar lift; the matrix is the monodromy raised to
        the winding between the two chart lifts of the same circle point.
        """
        tau_l = float(_wrap_to_half(theta - self.charts[l].center))
        tau_j = float(_wrap_to_half(theta - self.charts[j].center))
        if abs(tau_l) >= self.charts[l].half_width or (
            abs(tau_j) >= self.charts[j].half_width
        ):
            raise ModelError("point is outside one of the chart arcs")
        lift_l = self.charts[l].center + tau_l
        lift_j = self.charts[j].center + tau_j
        n = round((lift_l - lift_j) / TWO_PI)
        return self.monodromy_power(n)

    def metric_on_chart(self, j: int, t) -> np.ndarray:
        """Fiber metric in chart-j components, averaged with the partition.

        ``H_j(x) = sum_l chi_l(x) * beta_{l,j}(x)^H beta_{l,j}(x)``; the
        cocycle identity makes this consistent across charts, and for a
        unitary monodromy it is the standard metric.  Shape (len(t), p, p).
        """
        chart = self.charts[j]
        t = np.atleast_1d(np.asarray(t, dtype=float))
        theta = chart.center + t  # the chart-j lift of each point
        chi = self.partition_values(theta)
        out = np.zeros((len(t), self.rank, self.rank), dtype=complex)
        for l, chart_l in enumerate(self.charts):
            tau_l = _wrap_to_half(theta - chart_l.center)
            lift_l = chart_l.center + tau_l
            n_rel = np.rint((lift_l - theta) / TWO_PI).astype(int)
            inside = np.abs(tau_l) < chart_l.half_width
            if not inside.any():
                continue
            for n_val in np.unique(n_rel[inside]):
                beta = self.monodromy_power(int(n_val))
                block = beta.conj().T @ beta
                sel = inside & (n_rel == n_val)
                out[sel] += chi[l][sel, None, None] * block
        return out

    def cocycle_residual(self, n_samples: int = 512) -> float:
        """Max violation of the transition cocycle on sampled overlaps."""
        worst = 0.0
        thetas = np.linspace(0.0, TWO_PI, n_samples, endpoint=False)
        for x in thetas:
            inside = [
                idx
                for idx, chart in enumerate(self.charts)
                if abs(_wrap_to_half(x - chart.center)) < chart.half_width
            ]
            for a in inside:
                for b in inside:
                    for c in inside:
                        lhs = self.transition(a, b, x) @ self.transition(b, c, x)
                        rhs = self.transition(a, c, x)
                        worst = max(worst, float(np.abs(lhs - rhs).max()))
        return worst


@dataclass
class BundleSection:
    """Per-chart sampled components plus an optional exact evaluator.

    ``data[j]`` has shape (rank, n_grid); entries outside the chart window
    are zero and carry no meaning.  ``evaluator`` maps an array of lift
    angles to components of shape (rank, len), equivariant under
    ``theta -> theta + 2*pi`` with the monodromy.
    """

    model: BundleModel
    data: list[np.ndarray]
    evaluator: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        if len(self.data) != self.model.kappa:
            raise ShapeMismatchError("one sample block per chart required")
        blocks = []
        for chart, block in zip(self.model.charts, self.data):
            block = np.asarray(block, dtype=complex)
            if block.shape != (self.model.rank, chart.n_grid):
                raise ShapeMismatchError(
                    f"chart block must have shape {(self.model.rank, chart.n_grid)}"
                )
            blocks.append(block)
        self.data = blocks

    @classmethod
    def zero(cls, model: BundleModel) -> "BundleSection":
        return cls(
            model,
            [np.zeros((model.rank, c.n_grid), dtype=complex) for c in model.charts],
            evaluator=lambda theta: np.zeros(
                (model.rank, np.atleast_1d(theta).size), dtype=complex
            ),
        )

    @classmethod
    def from_evaluator(cls, model: BundleModel, evaluator) -> "BundleSection":
        data = []
        for chart in model.charts:
            block = np.zeros((model.rank, chart.n_grid), dtype=complex)
            mask = chart.window_mask
            block[:, mask] = np.asarray(evaluator(chart.center + chart.grid[mask]))
            data.append(block)
        return cls(model, data, evaluator=evaluator)

    def resampled(self, model: BundleModel) -> "BundleSection":
        """The same geometric section sampled on another atlas of the bundle.

        Requires matching rank and monodromy.  Uses the exact evaluator
        when present and the sew-of-flatten reconstruction otherwise.
        """
        if model.rank != self.model.rank or not np.allclose(
            model.monodromy, self.model.monodromy, atol=1e-12
        ):
            raise ModelError("models do not present the same bundle")
        ev = self.evaluator
        if ev is None:
            ev = sew(flatten(self), self.model).evaluator
        return BundleSection.from_evaluator(model, ev)

    def max_abs(self) -> float:
        return max(float(np.abs(b).max(initial=0.0)) for b in self.data)


def _check_overlap_consistency(u: BundleSection, tol: float = 1e-8) -> float:
    """Verify chart data transforms with the transitions on overlaps.

    Grid alignment is guaranteed by the model's commensurability checks, so
    samples are compared index-to-index.  Returns the worst deviation
    relative to the section's max magnitude.
    """
    model = u.model
    scale = u.max_abs() + 1e-300
    worst = 0.0
    for l, chart_l in enumerate(model.charts):
        grid_l = chart_l.grid
        mask_l = chart_l.window_mask
        for j, chart_j in enumerate(model.charts):
            if j == l:
                continue
            for n in (-2, -1, 0, 1, 2):
                delta = chart_l.center - chart_j.center - TWO_PI * n
                # chart-l parameter t maps to chart-j parameter t + delta
                t_j = grid_l + delta
                steps = delta / chart_l.spacing
                if abs(steps - round(steps)) > 1e-9:
                    raise ModelError("charts are not grid-commensurate")
                idx = np.rint((t_j + chart_j.box_length / 2) / chart_j.spacing)
                valid = (
                    mask_l
                    & (np.abs(t_j) < chart_j.half_width - 0.25 * chart_j.spacing)
                    & (idx >= 0)
                    & (idx < chart_j.n_grid)
                )
                if not valid.any():
                    continue
                cols_j = idx[valid].astype(int)
                # data[l] at lift c_l + t equals Q^n times data[j] at the
                # lift c_j + t_j = c_l + t - 2*pi*n.
                beta = model.monodromy_power(n)
                transported = beta @ u.data[j][:, cols_j]
                dev = np.abs(u.data[l][:, valid] - transported).max()
                worst = max(worst, float(dev))
    if worst > tol * scale:
        raise ConsistencyError(
            f"overlap deviation {worst:.3e} exceeds {tol:.1e} * max |u| = "
            f"{tol * scale:.3e}"
        )
    return worst / scale


def flatten(u: BundleSection, consistency_tol: float = 1e-8) -> list[SpectralFunction]:
    """Chart-localized scalar pieces of a section, chart-major order.

    Piece ``(j, f)`` is the fiber-f component of ``chi_j * u`` pulled back
    to chart-j coordinates, returned as a band-limited function on the
    chart's periodization box.
    """
    _check_overlap_consistency(u, tol=consistency_tol)
    pieces = []
    for j, chart in enumerate(u.model.charts):
        weights = u.model.partition_on_chart(j, chart.grid)
        localized = u.data[j] * weights[None, :]
        for f in range(u.model.rank):
            pieces.append(coefficients_from_samples(localized[f], chart.box_lattice))
    return pieces


def _winding_sign_transport(model: BundleModel, j: int, w_funcs, theta: np.ndarray):
    """Contribution of chart j to an equivariant evaluator at lift angles."""
    chart = model.charts[j]
    tau = _wrap_to_half(theta - chart.center)
    n = np.rint((theta - chart.center - tau) / TWO_PI).astype(int)
    inside = np.abs(tau) < chart.eta_outer
    out = np.zeros((model.rank, theta.size), dtype=complex)
    if not inside.any():
        return out
    eta_vals = chart.eta(tau[inside])
    vals = np.array([evaluate(wf, tau[inside]) for wf in w_funcs])
    vals = vals * eta_vals[None, :]
    n_in = n[inside]
    idx_inside = np.flatnonzero(inside)
    for n_val in np.unique(n_in):
        beta = model.monodromy_power(int(n_val))
        sel = n_in == n_val
        out[:, idx_inside[sel]] = beta @ vals[:, sel]
    return out


def sew(
    w: Sequence[SpectralFunction],
    model: BundleModel,
    support_tol: float = 1e-8,
) -> BundleSection:
    """Assemble a section from chart-major localized pieces.

    Each piece is multiplied by its chart's support cutoff ``eta`` and
    transported to every chart through the transitions; the pieces must be
    supported in their windows up to ``support_tol`` relative to their own
    magnitude.  The result carries an exact evaluator, so this is also the
    reconstruction map: sewing the flattened pieces of a section reproduces
    it up to the flattening's band truncation.
    """
    if len(w) != model.kappa * model.rank:
        raise ShapeMismatchError(
            f"expected {model.kappa * model.rank} pieces, got {len(w)}"
        )
    grouped = []
    for j, chart in enumerate(model.charts):
        funcs = list(w[j * model.rank : (j + 1) * model.rank])
        for wf in funcs:
            if not chart.box_lattice.compatible_with(wf.lattice):
                raise ShapeMismatchError(
                    f"piece of chart {j} lives on an incompatible box lattice"
                )
            samples = np.abs(evaluate(wf, chart.grid))
            peak = samples.max(initial=0.0)
            outside = samples[~chart.window_mask]
            if outside.size and peak > 0 and outside.max() > support_tol * peak:
                raise SupportError(
                    f"piece of chart {j} leaks {outside.max() / peak:.3e} of its "
                    f"peak outside the window (tolerance {support_tol:.1e})"
                )
        grouped.append(funcs)

    def evaluator(theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        total = np.zeros((model.rank, theta.size), dtype=complex)
        for j in range(model.kappa):
            total += _winding_sign_transport(model, j, grouped[j], theta)
        return total

    return BundleSection.from_evaluator(model, evaluator)


def bundle_norm(u: BundleSection, s: float, weight=None) -> float:
    """Euclidean combination of the weighted norms of the flattened pieces."""
    pieces = flatten(u)
    return float(
        math.sqrt(sum(hs_phi_norm(piece, s, weight) ** 2 for piece in pieces))
    )


def bundle_gram(
    sections: Sequence[BundleSection], s: float, weight=None
) -> np.ndarray:
    """Gram matrix of the weighted bundle inner product on a section list."""
    stacked = []
    for u in sections:
        pieces = flatten(u)
        weighted = [
            mode_weights(p.lattice, s, weight) * p.coefficients for p in pieces
        ]
        stacked.append(np.concatenate(weighted))
    mat = np.array(stacked)
    gram = mat @ mat.conj().T
    return 0.5 * (gram + gram.conj().T)


def basis_sections(model: BundleModel, band: int) -> list[BundleSection]:
    """Global band-limited sections from the monodromy eigenframe.

    For each unit eigenpair ``Q v = exp(2*pi*i*omega) v`` the functions
    ``exp(i*(k+omega)*theta) v`` with ``|k| <= band`` are equivariant, so
    they are genuine smooth sections; together they form a basis of the
    band-limited subspace.
    """
    eigvals, eigvecs = np.linalg.eig(model.monodromy)
    if np.abs(np.abs(eigvals) - 1.0).max() > 1e-9:
        raise ModelError("global band-limited frame needs a unitary monodromy")
    q, _ = np.linalg.qr(eigvecs)
    # Re-associate orthonormal columns with eigenvalues for degenerate Q.
    frames = []
    for f in range(model.rank):
        v = q[:, f]
        lam = complex(v.conj() @ model.monodromy @ v)
        omega = (np.angle(lam) / TWO_PI) % 1.0
        frames.append((omega, v))
    out = []
    for k in range(-band, band + 1):
        for omega, v in frames:

            def ev(theta, k=k, omega=omega, v=v):
                theta = np.atleast_1d(np.asarray(theta, dtype=float))
                return np.outer(v, np.exp(1j * (k + omega) * theta))

            out.append(BundleSection.from_evaluator(model, ev))
    return out


@dataclass(frozen=True)
class RatioBracket:
    ratio_min: float
    ratio_max: float
    ratios: np.ndarray


def atlas_independence_test(
    sections: Sequence[BundleSection],
    model_a: BundleModel,
    model_b: BundleModel,
    s: float,
    weight=None,
) -> RatioBracket:
    """Bracket of norm ratios of the same sections in two atlases."""
    ratios = []
    for u in sections:
        u_a = u if u.model is model_a else u.resampled(model_a)
        u_b = u.resampled(model_b)
        na = bundle_norm(u_a, s, weight)
        nb = bundle_norm(u_b, s, weight)
        if nb == 0.0:
            raise ParameterError("zero section cannot enter the ratio bracket")
        ratios.append(na / nb)
    ratios = np.array(ratios)
    return RatioBracket(float(ratios.min()), float(ratios.max()), ratios)


def hermitian_pairing(u: BundleSection, v: BundleSection, density=None) -> complex:
    """Integral over the circle of the fiber inner product of two sections.

    The fiber metric is the partition-averaged pullback of the standard
    metric; ``density`` optionally reweights the arclength measure (an
    experiment knob, 1 by default).  Linear in ``u``, conjugate-linear in
    ``v``.
    """
    if u.model is not v.model:
        raise ModelError("sections must share one bundle model")
    model = u.model
    total = 0.0 + 0.0j
    for j, chart in enumerate(model.charts):
        grid = chart.grid
        mask = chart.window_mask
        t = grid[mask]
        chi = model.partition_on_chart(j, t)
        metric = model.metric_on_chart(j, t)
        uj = u.data[j][:, mask]
        vj = v.data[j][:, mask]
        integrand = np.einsum("ifg,fi,gi->i", metric, np.conj(vj), uj)
        dens = np.ones_like(t) if density is None else np.asarray(
            density(chart.center + t), dtype=float
        )
        total += chart.spacing * np.sum(chi * dens * integrand)
    return complex(total)


@dataclass(frozen=True)
class BundleDualityReport:
    pairing: complex
    norm_u: float
    norm_v_dual: float
    ratio: float


def bundle_duality_report(
    u: BundleSection, v: BundleSection, s: float, weight=None
) -> BundleDualityReport:
    """Pairing against the product of the (s, phi) and (-s, 1/phi) norms."""
    pairing = hermitian_pairing(u, v)
    norm_u = bundle_norm(u, s, weight)
    if weight is None:
        inv = None
    elif isinstance(weight, SlowVaryWeight):
        inv = weight.reciprocal()
    else:
        def inv(t, _w=weight):
            return 1.0 / np.asarray(_w(t), dtype=float)
    norm_v = bundle_norm(v, -s, inv)
    denom = norm_u * norm_v
    ratio = abs(pairing) / denom if denom > 0 else 0.0
    return BundleDualityReport(pairing, norm_u, norm_v, ratio)


def cq_norm(u: BundleSection, q: int) -> float:
    """Sum over flattened pieces of their C^q sup-seminorms."""
    if q < 0:
        raise ParameterError("q must be >= 0")
    return float(
        sum(
            sup_and_cq_seminorms(piece, q, require_real=False)
            for piece in flatten(u)
        )
    )


# ---------------------------------------------------------------------------
# model factories and serialization


def _chart(center, half_width, bump_radius, n_grid) -> ChartSpec:
    slack = half_width - bump_radius
    return ChartSpec(
        center=center,
        half_width=half_width,
        bump_radius=bump_radius,
        eta_inner=bump_radius + 0.15 * slack,
        eta_outer=half_width - 0.15 * slack,
        n_grid=n_grid,
    )


_MONODROMIES: dict[str, Callable[[dict], np.ndarray]] = {
    "trivial": lambda params: np.array([[1.0]], dtype=complex),
    "twisted": lambda params: np.array([[-1.0]], dtype=complex),
    "rotation": lambda params: rotation_monodromy(
        float(params.get("rotation_angle", math.pi / 4))
    ),
}


def _resolve_monodromy(bundle: str, params: dict) -> tuple[int, np.ndarray]:
    if bundle not in _MONODROMIES:
        raise ModelError(
            f"unknown bundle family '{bundle}'; known: {sorted(_MONODROMIES)}"
        )
    q = _MONODROMIES[bundle](params)
    return q.shape[0], q


def two_chart_model(
    resolution: int,
    bundle: str = "trivial",
    rotation: float = 0.0,
    bump_radius: float = 0.6 * math.pi,
    name: str | None = None,
    **params,
) -> BundleModel:
    """Two arcs of half-width 3*pi/4 centered half a turn apart.

    ``resolution`` N fixes the per-chart grid at ``6*N + 3`` points, an odd
    count chosen so that the half-turn between the chart centers is an
    integer number of grid steps and the per-chart sample-to-coefficient
    map is lossless.  ``rotation`` turns the whole atlas rigidly.
    """
    half_width = 0.75 * math.pi
    n_grid = 6 * int(resolution) + 3
    if not (math.pi / 2.0 < bump_radius < half_width):
        raise ModelError("two-chart bumps must cover: pi/2 < bump_radius < 3*pi/4")
    rank, q = _resolve_monodromy(bundle, params)
    charts = tuple(
        _chart(rotation + c, half_width, bump_radius, n_grid)
        for c in (0.0, math.pi)
    )
    return BundleModel(
        charts=charts,
        rank=rank,
        monodromy=q,
        name=name or f"two-chart-{bundle}",
    )


def three_chart_model(
    resolution: int,
    bundle: str = "trivial",
    rotation: float = 0.0,
    bump_radius: float = 5.0 * math.pi / 12.0,
    name: str | None = None,
    **params,
) -> BundleModel:
    """Three arcs of half-width pi/2 centered a third of a turn apart."""
    half_width = 0.5 * math.pi
    n_grid = 6 * int(resolution) + 3
    if not (math.pi / 3.0 < bump_radius < half_width):
        raise ModelError("three-chart bumps must cover: pi/3 < bump_radius < pi/2")
    rank, q = _resolve_monodromy(bundle, params)
    charts = tuple(
        _chart(rotation + c, half_width, bump_radius, n_grid)
        for c in (0.0, TWO_PI / 3.0, 2.0 * TWO_PI / 3.0)
    )
    return BundleModel(
        charts=charts,
        rank=rank,
        monodromy=q,
        name=name or f"three-chart-{bundle}",
    )


_SCHEMES = {"two_chart": two_chart_model, "three_chart": three_chart_model}


def model_from_config(config: dict) -> BundleModel:
    """Build a model from a structured description.

    Keys: ``scheme`` (two_chart | three_chart), ``resolution``, ``bundle``
    (trivial | twisted | rotation), optional ``rotation``, ``bump_radius``,
    ``rotation_angle``, ``name``.
    """
    config = dict(config)
    scheme = config.pop("scheme", "two_chart")
    if scheme not in _SCHEMES:
        raise ModelError(f"unknown chart scheme '{scheme}'")
    resolution = config.pop("resolution")
    return _SCHEMES[scheme](resolution, **config)


def model_to_config(model: BundleModel, scheme: str, resolution: int) -> dict:
    bundle = None
    for key in _MONODROMIES:
        rank, q = _resolve_monodromy(key, {})
        if rank == model.rank and np.allclose(q, model.monodromy, atol=1e-12):
            bundle = key
            break
    if bundle is None:
        raise ModelError("model monodromy does not match a named family")
    return {
        "scheme": scheme,
        "resolution": resolution,
        "bundle": bundle,
        "rotation": float(model.charts[0].center),
        "bump_radius": float(model.charts[0].bump_radius),
        "name": model.name,
    }


def section_to_rows(u: BundleSection) -> list[tuple]:
    """Columnar samples: (chart, fiber, index, t, re, im)."""
    rows = []
    for j, (chart, block) in enumerate(zip(u.model.charts, u.data)):
        for f in range(u.model.rank):
            for i, t in enumerate(chart.grid):
                c = block[f, i]
                rows.append((j, f, i, float(t), float(c.real), float(c.imag)))
    return rows


def section_from_rows(model: BundleModel, rows) -> BundleSection:
    data = [np.zeros((model.rank, c.n_grid), dtype=complex) for c in model.charts]
    for j, f, i, _t, re, im in rows:
        data[int(j)][int(f), int(i)] = complex(float(re), float(im))
    return BundleSection(model, data)
