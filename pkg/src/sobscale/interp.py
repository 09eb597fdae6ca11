"""Interpolation with a function parameter between finite Hilbert pairs.

A :class:`HilbertPair` is one coordinate space carrying two Hermitian
positive-definite Gram forms, the denser-norm form ``gram1`` dominating
``gram0``.  The pair determines a generating operator ``J``: the unique
operator, self-adjoint and positive w.r.t. ``gram0``, whose graph norm
realizes the ``gram1`` norm.  Applying a positive function ``psi`` to ``J``
through its spectral decomposition produces the interpolated form

    ||u||_psi = ||psi(J) u||_{gram0}.

With ``psi(t) = t`` this recovers ``gram1`` and with ``psi = 1`` it
recovers ``gram0``; diagonal Fourier pairs with the reparametrized weight
from :func:`sobscale.weights.build_interp_parameter` reproduce the weighted
lattice norms exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

from .errors import DecompositionError, ParameterError, ShapeMismatchError

__all__ = [
    "HilbertPair",
    "GeneratingOperator",
    "OperatorInterpolationReport",
    "DualPairReport",
    "generating_operator",
    "interpolate",
    "operator_interpolation_check",
    "direct_sum_check",
    "dual_pair_check",
    "equivalence_bracket",
    "operator_norm_between",
    "save_form",
    "load_form",
]

CONDITION_LIMIT = 1e12


def _check_hermitian(name: str, matrix: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ShapeMismatchError(f"{name} must be a square matrix")
    scale = np.abs(matrix).max(initial=0.0) + 1e-300
    if np.abs(matrix - matrix.conj().T).max(initial=0.0) > tol * scale:
        raise DecompositionError(f"{name} is not Hermitian within {tol:g}")
    return 0.5 * (matrix + matrix.conj().T)


@dataclass(frozen=True)
class HilbertPair:
    """Two Hermitian positive-definite forms on one coordinate space.

    ``gram1`` is the stronger norm; the smallest generalized eigenvalue of
    ``gram1`` against ``gram0`` is recorded as ``embedding_constant`` (the
    squared constant c with ``||u||_1 >= c ||u||_0``).
    """

    gram0: np.ndarray
    gram1: np.ndarray

    def __post_init__(self) -> None:
        g0 = _check_hermitian("gram0", self.gram0)
        g1 = _check_hermitian("gram1", self.gram1)
        if g0.shape != g1.shape:
            raise ShapeMismatchError("gram0 and gram1 must have equal shapes")
        object.__setattr__(self, "gram0", g0)
        object.__setattr__(self, "gram1", g1)
        for name, g in (("gram0", g0), ("gram1", g1)):
            eigs = np.linalg.eigvalsh(g)
            if eigs[0] <= 0.0:
                raise DecompositionError(
                    f"{name} is not positive definite "
                    f"(smallest eigenvalue {eigs[0]:.3e})"
                )
            if eigs[-1] / eigs[0] > CONDITION_LIMIT:
                raise DecompositionError(
                    f"{name} condition number {eigs[-1] / eigs[0]:.3e} exceeds "
                    f"the guard {CONDITION_LIMIT:g}"
                )

    @property
    def dimension(self) -> int:
        return self.gram0.shape[0]

    @property
    def embedding_constant(self) -> float:
        vals = linalg.eigvalsh(self.gram1, self.gram0)
        return float(np.sqrt(vals[0]))


@dataclass(frozen=True)
class GeneratingOperator:
    """Spectral data of the generating operator of a pair.

    ``basis`` columns are gram0-orthonormal eigenvectors; ``eigenvalues``
    are the (positive) eigenvalues of J, the square roots of the
    generalized eigenvalues of ``gram1`` against ``gram0``.
    """

    pair: HilbertPair
    eigenvalues: np.ndarray
    basis: np.ndarray
    reconstruction_residual: float

    @property
    def matrix(self) -> np.ndarray:
        inv_basis = self.basis.conj().T @ self.pair.gram0
        return self.basis @ np.diag(self.eigenvalues) @ inv_basis


def generating_operator(pair: HilbertPair) -> GeneratingOperator:
    """Solve the generalized eigenproblem of the pair.

    Uses the Cholesky-of-gram0 reduction to a Hermitian standard problem
    (scipy's generalized ``eigh``), then checks that the assembled J-squared
    form reproduces ``gram1`` to 1e-10 relative.
    """
    try:
        vals, vecs = linalg.eigh(pair.gram1, pair.gram0)
    except linalg.LinAlgError as exc:  # pragma: no cover - guarded upstream
        raise DecompositionError(f"generalized eigensolve failed: {exc}") from exc
    if vals[0] <= 0.0:
        raise DecompositionError(
            f"pair pencil is not positive definite (eigenvalue {vals[0]:.3e})"
        )
    mu = np.sqrt(vals)
    reassembled = pair.gram0 @ vecs @ np.diag(vals) @ vecs.conj().T @ pair.gram0
    residual = np.abs(reassembled - pair.gram1).max() / np.abs(pair.gram1).max()
    if residual > 1e-10:
        raise DecompositionError(
            f"generating operator reconstruction residual {residual:.3e} "
            "exceeds 1e-10; the pair is too ill-conditioned"
        )
    return GeneratingOperator(
        pair=pair,
        eigenvalues=mu,
        basis=vecs,
        reconstruction_residual=float(residual),
    )


def _psi_on_spectrum(psi, spectrum: np.ndarray) -> np.ndarray:
    values = np.asarray(psi(spectrum), dtype=float)
    if values.shape != spectrum.shape:
        values = np.broadcast_to(values, spectrum.shape).astype(float)
    if np.any(~np.isfinite(values)) or np.any(values <= 0.0):
        bad = spectrum[(~np.isfinite(values)) | (values <= 0.0)]
        raise ParameterError(
            f"function parameter must be positive and finite on the spectrum; "
            f"offending points {bad[:3]}"
        )
    return values


def interpolate(pair: HilbertPair, psi) -> np.ndarray:
    """Hermitian form of the interpolation space ``X_psi`` of the pair.

    The form acts as ``psi(mu_i)^2`` in the eigenbasis of the generating
    operator; ``psi = 1`` returns ``gram0`` and ``psi(t) = t`` returns
    ``gram1`` up to roundoff.
    """
    gen = generating_operator(pair)
    values = _psi_on_spectrum(psi, gen.eigenvalues)
    inv_basis = gen.basis.conj().T @ pair.gram0  # equals basis^{-1}
    form = inv_basis.conj().T @ np.diag(values**2) @ inv_basis
    return 0.5 * (form + form.conj().T)


def operator_norm_between(
    T: np.ndarray, gram_source: np.ndarray, gram_target: np.ndarray
) -> float:
    """Largest generalized singular value of T between two Gram forms."""
    T = np.asarray(T, dtype=complex)
    pencil = T.conj().T @ np.asarray(gram_target, dtype=complex) @ T
    pencil = 0.5 * (pencil + pencil.conj().T)
    vals = linalg.eigh(pencil, np.asarray(gram_source, dtype=complex),
                       eigvals_only=True)
    return float(np.sqrt(max(vals[-1], 0.0)))


@dataclass(frozen=True)
class OperatorInterpolationReport:
    norm0: float
    norm1: float
    norm_psi: float
    ratio: float
    bound_ok: bool


def operator_interpolation_check(
    T: np.ndarray,
    pair_x: HilbertPair,
    pair_y: HilbertPair,
    psi,
    bound_constant: float = 1.0,
    rel_tol: float = 1e-10,
) -> OperatorInterpolationReport:
    """Operator norms of T at the endpoints and on the interpolated spaces.

    Asserts ``norm_psi <= bound_constant * max(norm0, norm1)`` up to a
    relative tolerance; the constant is supplied per test family.
    """
    T = np.asarray(T, dtype=complex)
    if T.shape != (pair_y.dimension, pair_x.dimension):
        raise ShapeMismatchError(
            f"operator shape {T.shape} incompatible with pairs "
            f"({pair_y.dimension}, {pair_x.dimension})"
        )
    norm0 = operator_norm_between(T, pair_x.gram0, pair_y.gram0)
    norm1 = operator_norm_between(T, pair_x.gram1, pair_y.gram1)
    form_x = interpolate(pair_x, psi)
    form_y = interpolate(pair_y, psi)
    norm_psi = operator_norm_between(T, form_x, form_y)
    cap = bound_constant * max(norm0, norm1)
    if cap > 0:
        ratio = norm_psi / cap
    else:
        ratio = 0.0 if norm_psi == 0 else float("inf")
    return OperatorInterpolationReport(
        norm0=norm0,
        norm1=norm1,
        norm_psi=norm_psi,
        ratio=ratio,
        bound_ok=norm_psi <= cap * (1.0 + rel_tol) or cap == norm_psi == 0.0,
    )


def direct_sum_check(pairs: Sequence[HilbertPair], psi) -> float:
    """Residual between interpolating a block sum and summing interpolants.

    Interpolation commutes with orthogonal direct sums; the residual is the
    largest entry-wise deviation between the two assembled forms, relative
    to the largest entry.
    """
    if not pairs:
        raise ParameterError("need at least one pair")
    g0 = linalg.block_diag(*[p.gram0 for p in pairs])
    g1 = linalg.block_diag(*[p.gram1 for p in pairs])
    whole = interpolate(HilbertPair(g0, g1), psi)
    blocks = linalg.block_diag(*[interpolate(p, psi) for p in pairs])
    return float(np.abs(whole - blocks).max() / np.abs(blocks).max())


@dataclass(frozen=True)
class DualPairReport:
    residual: float
    chi: Callable[[np.ndarray], np.ndarray]


def dual_pair_check(pair: HilbertPair, psi, tail_check_upto: float = 1e6) -> DualPairReport:
    """Compare interpolation of the dual pair with the dual of the
    chi-interpolation, ``chi(t) = t / psi(t)``.

    Dual forms are realized as Gram inverses in the coordinate pairing.
    The precondition that ``psi(t)/t`` stays bounded towards infinity is
    checked on a geometric grid extending beyond the spectrum.
    """
    gen = generating_operator(pair)
    mu_max = float(gen.eigenvalues.max())
    grid = np.geomspace(max(mu_max, 1.0), max(tail_check_upto, 2 * mu_max), 64)
    over_t = np.asarray(psi(grid), dtype=float) / grid
    if over_t[-1] > 100.0 * max(over_t[0], 1e-300):
        raise ParameterError("psi(t)/t appears unbounded towards infinity")

    def chi(t):
        t = np.asarray(t, dtype=float)
        return t / np.asarray(psi(t), dtype=float)

    dual_pair = HilbertPair(
        np.linalg.inv(pair.gram1), np.linalg.inv(pair.gram0)
    )
    lhs = interpolate(dual_pair, psi)
    rhs = np.linalg.inv(interpolate(pair, chi))
    residual = float(np.abs(lhs - rhs).max() / np.abs(rhs).max())
    return DualPairReport(residual=residual, chi=chi)


def equivalence_bracket(
    form_low: np.ndarray,
    form_high: np.ndarray,
    form_direct: np.ndarray,
    psi,
) -> tuple[float, float]:
    """Extreme norm ratios between the interpolated and the direct form.

    Interpolates the pair ``(form_low, form_high)`` with ``psi`` and
    returns ``(c_lower, c_upper)`` such that the interpolated norm lies in
    ``[c_lower, c_upper]`` times the direct norm for every vector.
    """
    pair = HilbertPair(form_low, form_high)
    form_psi = interpolate(pair, psi)
    vals = linalg.eigvalsh(form_psi, _check_hermitian("direct form", form_direct))
    if vals[0] <= 0:
        raise DecompositionError("interpolated form lost positivity")
    return float(np.sqrt(vals[0])), float(np.sqrt(vals[-1]))


def save_form(path, form: np.ndarray) -> None:
    """Columnar text export: one row ``i j re im`` per entry."""
    form = np.asarray(form, dtype=complex)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# hermitian form, dimension {form.shape[0]}\n")
        for i in range(form.shape[0]):
            for j in range(form.shape[1]):
                fh.write(f"{i} {j} {form[i, j].real!r} {form[i, j].imag!r}\n")


def load_form(path) -> np.ndarray:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            i, j, re, im = line.split()
            entries.append((int(i), int(j), float(re), float(im)))
    dim = max(i for i, *_ in entries) + 1
    form = np.zeros((dim, dim), dtype=complex)
    for i, j, re, im in entries:
        form[i, j] = complex(re, im)
    return form
