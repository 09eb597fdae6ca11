"""Weighted Fourier-coefficient spaces on tori and periodization boxes.

A :class:`FrequencyLattice` is a truncated set of integer frequencies on a
torus of dimension 1 or 2 with side length ``L``.  Functions are stored as
coefficient vectors with respect to the orthonormal basis

    e_k(x) = exp(i * (2*pi*k/L) . x) / L^(n/2),

so that the plain coefficient inner product coincides with the L2 pairing
over the torus.  The bracket of a lattice point is computed from the
physical frequency ``xi_k = 2*pi*k/L``, which reduces to ``(1+|k|^2)^(1/2)``
on the standard torus ``L = 2*pi`` and makes norms on larger boxes agree
with the whole-line convention when compactly supported functions are
periodized (the agreement is measured, not assumed, by doubling ``L``).

The weighted norm of order ``s`` refined by a slowly varying weight ``phi``
is ``(sum_k <k>^(2s) * phi(<k>)^2 * |u_k|^2)^(1/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ParameterError, ShapeMismatchError
from .weights import SlowVaryWeight, constant_weight

__all__ = [
    "FrequencyLattice",
    "SpectralFunction",
    "DualityReport",
    "EmbeddingReport",
    "hs_phi_norm",
    "inner_product",
    "duality_pairing",
    "embedding_operator_data",
    "sup_and_cq_seminorms",
    "mode_weights",
    "samples_from_coefficients",
    "coefficients_from_samples",
    "evaluate",
    "grid_points",
    "export_coefficients",
    "import_coefficients",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FrequencyLattice:
    """All integer frequencies with sup-norm at most ``cutoff``.

    Parameters
    ----------
    dimension : 1 or 2
    cutoff : band limit N; modes run over ``|k|_inf <= N``
    box_length : side length of the torus / periodization box
    """

    dimension: int
    cutoff: int
    box_length: float = TWO_PI

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ParameterError("lattice dimension must be 1 or 2")
        if self.cutoff < 1:
            raise ParameterError("lattice cutoff must be >= 1")
        if self.box_length <= 0:
            raise ParameterError("box length must be positive")

    @property
    def size(self) -> int:
        return (2 * self.cutoff + 1) ** self.dimension

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer modes, shape (size,) for n=1 and (size, 2) for n=2."""
        rng = np.arange(-self.cutoff, self.cutoff + 1)
        if self.dimension == 1:
            return rng.copy()
        k1, k2 = np.meshgrid(rng, rng, indexing="ij")
        return np.column_stack([k1.ravel(), k2.ravel()])

    @cached_property
    def brackets(self) -> np.ndarray:
        """Physical-frequency brackets ``(1+|2*pi*k/L|^2)^(1/2)``."""
        scale = TWO_PI / self.box_length
        if self.dimension == 1:
            sq = (scale * self.modes) ** 2
        else:
            sq = (scale**2) * (self.modes**2).sum(axis=1)
        return np.sqrt(1.0 + sq)

    def index_of(self, k) -> int:
        if self.dimension == 1:
            k = int(k)
            if abs(k) > self.cutoff:
                raise DomainError(f"mode {k} outside lattice of cutoff {self.cutoff}")
            return k + self.cutoff
        k1, k2 = (int(k[0]), int(k[1]))
        if max(abs(k1), abs(k2)) > self.cutoff:
            raise DomainError(f"mode {k} outside lattice of cutoff {self.cutoff}")
        width = 2 * self.cutoff + 1
        return (k1 + self.cutoff) * width + (k2 + self.cutoff)

    def compatible_with(self, other: "FrequencyLattice") -> bool:
        return (
            self.dimension == other.dimension
            and self.cutoff == other.cutoff
            and abs(self.box_length - other.box_length) <= 1e-12 * self.box_length
        )


def _require_same_lattice(u: "SpectralFunction", v: "SpectralFunction") -> None:
    if not u.lattice.compatible_with(v.lattice):
        raise ShapeMismatchError("operands live on different lattices")


@dataclass
class SpectralFunction:
    """Coefficient vector on a frequency lattice.

    ``is_real`` marks functions expected to be real-valued on the torus;
    construction then verifies the Hermitian symmetry of the coefficients.
    """

    lattice: FrequencyLattice
    coefficients: np.ndarray
    is_real: bool = False

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coefficients, dtype=complex)
        if coeffs.shape != (self.lattice.size,):
            raise ShapeMismatchError(
                f"expected {self.lattice.size} coefficients, got {coeffs.shape}"
            )
        self.coefficients = coeffs
        if self.is_real and not self._hermitian_symmetric():
            raise DomainError("coefficients of a real function must satisfy "
                              "u(-k) == conj(u(k))")

    def _hermitian_symmetric(self, tol: float = 1e-12) -> bool:
        flipped = self._conjugate_flip()
        scale = np.abs(self.coefficients).max(initial=0.0) + 1e-300
        return bool(np.abs(flipped - self.coefficients).max(initial=0.0) <= tol * scale)

    def _conjugate_flip(self) -> np.ndarray:
        n = self.lattice.dimension
        width = 2 * self.lattice.cutoff + 1
        if n == 1:
            return np.conj(self.coefficients[::-1])
        grid = self.coefficients.reshape(width, width)
        return np.conj(grid[::-1, ::-1]).ravel()

    @classmethod
    def zero(cls, lattice: FrequencyLattice) -> "SpectralFunction":
        return cls(lattice, np.zeros(lattice.size, dtype=complex))

    @classmethod
    def single_mode(cls, lattice: FrequencyLattice, k, value=1.0) -> "SpectralFunction":
        coeffs = np.zeros(lattice.size, dtype=complex)
        coeffs[lattice.index_of(k)] = value
        return cls(lattice, coeffs)

    def copy(self) -> "SpectralFunction":
        return SpectralFunction(self.lattice, self.coefficients.copy(), self.is_real)


def _weight_callable(weight):
    if weight is None:
        weight = constant_weight()
    if isinstance(weight, SlowVaryWeight) or callable(weight):
        return weight
    raise ParameterError("weight must be a SlowVaryWeight, a callable, or None")


def mode_weights(lattice: FrequencyLattice, s: float, weight=None) -> np.ndarray:
    """Per-mode norm weights ``<k>^s * phi(<k>)``."""
    w = _weight_callable(weight)
    br = lattice.brackets
    return br**s * np.asarray(w(br), dtype=float)


def hs_phi_norm(u: SpectralFunction, s: float, weight=None) -> float:
    """Weighted coefficient norm of order ``s`` refined by ``weight``."""
    w = mode_weights(u.lattice, s, weight)
    return float(np.linalg.norm(w * u.coefficients))


def inner_product(u: SpectralFunction, v: SpectralFunction, s: float, weight=None):
    """Weighted sesquilinear inner product (linear in the first argument)."""
    _require_same_lattice(u, v)
    w2 = mode_weights(u.lattice, s, weight) ** 2
    return complex(np.sum(w2 * u.coefficients * np.conj(v.coefficients)))


@dataclass(frozen=True)
class DualityReport:
    """L2 pairing of two functions with the dual-norm bound at ``(s, phi)``.

    On the lattice the bound ``|<u,v>| <= ||u||_{s,phi} * ||v||_{-s,1/phi}``
    holds with constant exactly 1 and is saturated by the weighted-extremal
    pair ``v_k = <k>^(2s) phi(<k>)^2 u_k``.
    """

    pairing: complex
    norm_u: float
    norm_v_dual: float
    ratio: float
    bound_holds: bool


def duality_pairing(
    u: SpectralFunction,
    v: SpectralFunction,
    s: float = 0.0,
    weight=None,
    rel_tol: float = 1e-12,
) -> DualityReport:
    """L2 pairing ``sum_k u_k conj(v_k)`` with its weighted duality bound.

    The orthonormal basis makes the lattice quadrature constant equal to 1,
    so the pairing coincides with the integral of ``u * conj(v)``.
    """
    _require_same_lattice(u, v)
    pairing = complex(np.sum(u.coefficients * np.conj(v.coefficients)))
    w = _weight_callable(weight)
    norm_u = hs_phi_norm(u, s, w)
    if isinstance(w, SlowVaryWeight):
        w_inv = w.reciprocal()
    else:
        def w_inv(t, _w=w):
            return 1.0 / np.asarray(_w(t), dtype=float)
    norm_v = hs_phi_norm(v, -s, w_inv)
    bound = norm_u * norm_v
    ratio = abs(pairing) / bound if bound > 0 else (0.0 if pairing == 0 else math.inf)
    return DualityReport(
        pairing=pairing,
        norm_u=norm_u,
        norm_v_dual=norm_v,
        ratio=ratio,
        bound_holds=ratio <= 1.0 + rel_tol,
    )


@dataclass(frozen=True)
class EmbeddingReport:
    """Diagonal data of the identity map between two weighted norms.

    ``ratios[k] = W_target(k) / W_source(k)``; the map is bounded on the
    truncated lattice with norm ``max(ratios)`` and the sorted profile is
    the singular-value sequence of the embedding.  ``unbounded`` flags a
    profile whose maximum sits on the outer shell and keeps growing there,
    the finite signature of a map with no uniform bound as the cutoff grows.
    """

    operator_norm: float
    profile: np.ndarray
    ratios: np.ndarray
    unbounded: bool
    order_gap: float


def embedding_operator_data(
    lattice: FrequencyLattice,
    source: tuple[float, object],
    target: tuple[float, object],
) -> EmbeddingReport:
    s_source, w_source = source
    s_target, w_target = target
    num = mode_weights(lattice, s_target, w_target)
    den = mode_weights(lattice, s_source, w_source)
    ratios = num / den
    profile = np.sort(ratios)[::-1]
    order_gap = s_source - s_target
    unbounded = False
    if order_gap <= 0:
        # No positive order gap: growth of the ratio on the outer shell
        # signals the absence of a uniform bound.
        br = lattice.brackets
        outer = ratios[br >= 0.75 * br.max()]
        inner = ratios[br <= 0.5 * br.max()]
        if outer.size and inner.size and outer.max() > inner.max() * (1 + 1e-9):
            unbounded = True
    return EmbeddingReport(
        operator_norm=float(ratios.max()),
        profile=profile,
        ratios=ratios,
        unbounded=unbounded,
        order_gap=order_gap,
    )


def grid_points(lattice: FrequencyLattice, n_samples: int) -> np.ndarray:
    """Uniform sample grid ``t_i = -L/2 + i*L/M`` (per axis for n=2)."""
    L = lattice.box_length
    return -L / 2.0 + L * np.arange(n_samples) / n_samples


def samples_from_coefficients(u: SpectralFunction, n_samples: int) -> np.ndarray:
    """Values on the uniform grid via zero-padded FFT; exact for M >= size."""
    lat = u.lattice
    if n_samples < 2 * lat.cutoff + 1:
        raise ParameterError("sample count must resolve the band")
    modes = np.arange(-lat.cutoff, lat.cutoff + 1)
    # Basis value at the grid origin -L/2 is (-1)^k per axis.
    phased = None
    if lat.dimension == 1:
        phased = u.coefficients * (-1.0) ** modes
        padded = np.zeros(n_samples, dtype=complex)
        padded[modes % n_samples] = phased
        return np.fft.ifft(padded) * n_samples / math.sqrt(lat.box_length)
    width = 2 * lat.cutoff + 1
    grid = u.coefficients.reshape(width, width)
    signs = (-1.0) ** modes
    phased = grid * signs[:, None] * signs[None, :]
    padded = np.zeros((n_samples, n_samples), dtype=complex)
    idx = modes % n_samples
    padded[np.ix_(idx, idx)] = phased
    return np.fft.ifft2(padded) * n_samples**2 / lat.box_length


def coefficients_from_samples(
    samples: np.ndarray, lattice: FrequencyLattice
) -> SpectralFunction:
    """Project grid samples onto the lattice; inverse of sampling when the
    data is band-limited to the lattice."""
    samples = np.asarray(samples, dtype=complex)
    modes = np.arange(-lattice.cutoff, lattice.cutoff + 1)
    if lattice.dimension == 1:
        (m,) = samples.shape
        if m < 2 * lattice.cutoff + 1:
            raise ParameterError("not enough samples for the lattice band")
        spectrum = np.fft.fft(samples) / m
        coeffs = spectrum[modes % m] * (-1.0) ** modes * math.sqrt(lattice.box_length)
        return SpectralFunction(lattice, coeffs)
    m1, m2 = samples.shape
    if min(m1, m2) < 2 * lattice.cutoff + 1:
        raise ParameterError("not enough samples for the lattice band")
    spectrum = np.fft.fft2(samples) / (m1 * m2)
    signs = (-1.0) ** modes
    block = spectrum[np.ix_(modes % m1, modes % m2)]
    coeffs = block * signs[:, None] * signs[None, :] * lattice.box_length
    return SpectralFunction(lattice, coeffs.ravel())


def evaluate(u: SpectralFunction, points) -> np.ndarray:
    """Evaluate the trigonometric polynomial at arbitrary points.

    For n=1 ``points`` is an array of abscissae; for n=2 an array of shape
    (m, 2).
    """
    lat = u.lattice
    scale = TWO_PI / lat.box_length
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if lat.dimension == 1:
        phases = np.exp(1j * scale * np.outer(pts, lat.modes))
        return phases @ u.coefficients / math.sqrt(lat.box_length)
    pts = pts.reshape(-1, 2)
    phases = np.exp(1j * scale * (pts @ lat.modes.T))
    return phases @ u.coefficients / lat.box_length


def _derivative_coefficients(u: SpectralFunction, mu: tuple[int, ...]) -> np.ndarray:
    lat = u.lattice
    scale = TWO_PI / lat.box_length
    if lat.dimension == 1:
        xi = scale * lat.modes
        return u.coefficients * (1j * xi) ** mu[0]
    xi1 = scale * lat.modes[:, 0]
    xi2 = scale * lat.modes[:, 1]
    return u.coefficients * (1j * xi1) ** mu[0] * (1j * xi2) ** mu[1]


def sup_and_cq_seminorms(
    u: SpectralFunction,
    q: int,
    oversample: int = 8,
    require_real: bool = True,
) -> float:
    """Sum over ``|mu| <= q`` of sup-norms of the partial derivatives.

    Derivatives act as multiplication by ``(i*xi)^mu`` on coefficients and
    the sup is taken over a uniform grid with at least ``oversample * N``
    points per axis.
    """
    if q < 0:
        raise ParameterError("derivative order q must be >= 0")
    if require_real and not u.is_real:
        raise DomainError("sup seminorms require a real-flagged function "
                          "(pass require_real=False to allow complex data)")
    lat = u.lattice
    m = max(oversample * lat.cutoff, 64)
    total = 0.0
    if lat.dimension == 1:
        orders: Iterable[tuple[int, ...]] = [(mu,) for mu in range(q + 1)]
    else:
        orders = [
            (m1, m2)
            for total_order in range(q + 1)
            for m1 in range(total_order + 1)
            for m2 in [total_order - m1]
        ]
    for mu in orders:
        du = SpectralFunction(lat, _derivative_coefficients(u, mu))
        values = samples_from_coefficients(du, m)
        total += float(np.abs(values).max())
    return total


def export_coefficients(u: SpectralFunction) -> list[tuple]:
    """Columnar records (k-tuple..., re, im)."""
    rows = []
    if u.lattice.dimension == 1:
        for k, c in zip(u.lattice.modes, u.coefficients):
            rows.append((int(k), float(c.real), float(c.imag)))
    else:
        for (k1, k2), c in zip(u.lattice.modes, u.coefficients):
            rows.append((int(k1), int(k2), float(c.real), float(c.imag)))
    return rows


def import_coefficients(
    rows: Sequence[Sequence], lattice: FrequencyLattice
) -> SpectralFunction:
    coeffs = np.zeros(lattice.size, dtype=complex)
    for row in rows:
        *k, re, im = row
        key = k[0] if lattice.dimension == 1 else tuple(k)
        coeffs[lattice.index_of(key)] = complex(re, im)
    return SpectralFunction(lattice, coeffs)
