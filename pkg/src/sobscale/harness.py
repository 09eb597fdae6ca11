"""Batch experiment runner: named suites, config files, reports.

Every suite turns one family of property checks into a reproducible batch
job: it reads a JSON config validated against a schema, runs its cases
across the configured resolutions, and writes a CSV table, a JSON report,
and an SVG trend chart.  Outputs are deterministic: identical config and
seed produce byte-identical CSV/JSON artifacts (no timestamps; fixed float
formatting; fixed row order).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import jsonschema
import numpy as np

from . import bundle as bd
from . import interp as ip
from . import pseudo as ps
from . import spectral as sp
from . import weights as wt
from .errors import ConfigError, ParameterError

__all__ = [
    "SCHEMA",
    "SCHEMA_VERSION",
    "ExperimentConfig",
    "ReportRow",
    "SuiteResult",
    "list_suites",
    "describe_suite",
    "run_suite",
    "generate_sections",
    "generate_lattice_functions",
    "config_hash",
]

SCHEMA_VERSION = 1

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "suite": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "resolutions": {
            "type": "array",
            "items": {"type": "integer", "minimum": 2},
            "minItems": 1,
        },
        "weight": {
            "type": "object",
            "properties": {
                "exponents": {"type": "array", "items": {"type": "number"}},
                "splice_point": {"type": "number"},
            },
            "required": ["exponents"],
            "additionalProperties": False,
        },
        "indices": {
            "type": "object",
            "properties": {
                "s": {"type": "number"},
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "delta": {"type": "number", "exclusiveMinimum": 0},
                "sigma": {"type": "number"},
                "q": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "bundle": {
            "type": "object",
            "properties": {
                "model": {"type": "string"},
                "scheme": {"type": "string"},
                "band": {"type": "integer", "minimum": 1},
                "count": {"type": "integer", "minimum": 0},
                "decay": {"type": "number"},
            },
            "additionalProperties": False,
        },
        "symbol": {"type": "object"},
        "output_dir": {"type": "string"},
        "workers": {"type": "integer", "minimum": 1},
    },
    "required": ["suite"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; missing fields take suite defaults."""

    suite: str
    seed: int = 0
    resolutions: tuple[int, ...] = ()
    weight: dict = field(default_factory=dict)
    indices: dict = field(default_factory=dict)
    bundle: dict = field(default_factory=dict)
    symbol: dict = field(default_factory=dict)
    output_dir: str | None = None
    workers: int = 1

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config validation failed: {exc.message}") from exc
        suite = raw["suite"]
        if suite not in _SUITES:
            raise ConfigError(
                f"unknown suite '{suite}'; known: {', '.join(sorted(_SUITES))}"
            )
        resolutions = tuple(raw.get("resolutions", _SUITES[suite].resolutions))
        if any(b <= a for a, b in zip(resolutions, resolutions[1:])):
            raise ConfigError("resolutions must be strictly increasing")
        return cls(
            suite=suite,
            seed=int(raw.get("seed", 0)),
            resolutions=resolutions,
            weight=dict(raw.get("weight", {})),
            indices=dict(raw.get("indices", {})),
            bundle=dict(raw.get("bundle", {})),
            symbol=dict(raw.get("symbol", {})),
            output_dir=raw.get("output_dir"),
            workers=int(raw.get("workers", 1)),
        )

    def to_dict(self) -> dict:
        out = {
            "suite": self.suite,
            "seed": self.seed,
            "resolutions": list(self.resolutions),
            "workers": self.workers,
        }
        for key in ("weight", "indices", "bundle", "symbol"):
            value = getattr(self, key)
            if value:
                out[key] = value
        if self.output_dir:
            out["output_dir"] = self.output_dir
        return out

    def weight_object(self, default=()) -> wt.SlowVaryWeight:
        exponents = self.weight.get("exponents", list(default))
        splice = self.weight.get("splice_point")
        return wt.iterated_log_weight(exponents, splice)


def config_hash(config: ExperimentConfig) -> str:
    canon = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ReportRow:
    suite: str
    case: str
    quantity: str
    value: float
    tolerance: str
    verdict: str  # pass | fail | inconclusive
    resolution: int | None
    seed: int
    config_hash: str


@dataclass(frozen=True)
class SuiteResult:
    config: ExperimentConfig
    rows: tuple[ReportRow, ...]
    output_dir: Path

    @property
    def passed(self) -> bool:
        return all(row.verdict != "fail" for row in self.rows)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


# ---------------------------------------------------------------------------
# deterministic generators


def generate_lattice_functions(
    seed: int,
    lattice: sp.FrequencyLattice,
    band: int,
    count: int,
    decay: float = 2.0,
) -> list[np.ndarray]:
    """Coefficient vectors with envelope ``<k>^-decay`` and unit phases."""
    if band > lattice.cutoff:
        raise ParameterError(f"band {band} exceeds lattice cutoff {lattice.cutoff}")
    rng = np.random.default_rng(seed)
    ks = np.arange(-band, band + 1)
    scale = 2.0 * math.pi / lattice.box_length
    envelope = (1.0 + (scale * ks) ** 2) ** (-decay / 2.0)
    out = []
    for _ in range(count):
        coeffs = np.zeros(lattice.size, dtype=complex)
        phases = np.exp(2j * math.pi * rng.random(ks.size))
        coeffs[ks + lattice.cutoff] = envelope * phases
        out.append(coeffs)
    return out


def generate_sections(
    seed: int,
    band: int,
    count: int,
    model: bd.BundleModel,
    decay: float = 2.0,
) -> list[bd.BundleSection]:
    """Deterministic band-limited sections, localized chart by chart.

    Per chart and fiber a random band-limited box function with coefficient
    envelope ``<k>^-decay`` and unit-modulus phases is cut to the chart
    window by the support cutoff and the pieces are sewn into a smooth
    section.  Identical seeds give identical sections.
    """
    rng = np.random.default_rng(seed)
    sections = []
    for _ in range(count):
        pieces = []
        for chart in model.charts:
            lat = chart.box_lattice
            if band > lat.cutoff:
                raise ParameterError(
                    f"band {band} exceeds the chart capacity {lat.cutoff}"
                )
            window = chart.eta(chart.grid)
            ks = np.arange(-band, band + 1)
            scale = 2.0 * math.pi / lat.box_length
            envelope = (1.0 + (scale * ks) ** 2) ** (-decay / 2.0)
            for _f in range(model.rank):
                coeffs = np.zeros(lat.size, dtype=complex)
                coeffs[ks + lat.cutoff] = envelope * np.exp(
                    2j * math.pi * rng.random(ks.size)
                )
                raw = sp.SpectralFunction(lat, coeffs)
                samples = sp.evaluate(raw, chart.grid) * window
                pieces.append(sp.coefficients_from_samples(samples, lat))
        sections.append(bd.sew(pieces, model, support_tol=1e-4))
    return sections


# ---------------------------------------------------------------------------
# suite implementations


_ACTIVE_WORKERS = 1


def _parallel_map(fn, items):
    """Deterministic map over independent suite tasks.

    Uses the worker count of the currently running suite; results come back
    in input order regardless of completion order.
    """
    items = list(items)
    if _ACTIVE_WORKERS <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=_ACTIVE_WORKERS) as pool:
        return list(pool.map(fn, items))


def _row_factory(cfg: ExperimentConfig):
    h = config_hash(cfg)

    def row(case, quantity, value, tolerance, ok, resolution=None):
        verdict = "pass" if ok else "fail"
        if ok is None:
            verdict = "inconclusive"
        return ReportRow(
            suite=cfg.suite,
            case=case,
            quantity=quantity,
            value=float(value),
            tolerance=tolerance,
            verdict=verdict,
            resolution=resolution,
            seed=cfg.seed,
            config_hash=h,
        )

    return row


def _drift(values: Sequence[float]) -> float:
    return max(
        abs(b / a - 1.0) for a, b in zip(values, values[1:])
    ) if len(values) > 1 else 0.0


def _suite_interp_exactness(cfg: ExperimentConfig) -> list[ReportRow]:
    row = _row_factory(cfg)
    rows = []
    n = cfg.resolutions[-1]
    lattice = sp.FrequencyLattice(1, n)
    s = float(cfg.indices.get("s", 0.0))
    eps = float(cfg.indices.get("eps", 1.0))
    delta = float(cfg.indices.get("delta", 1.0))
    for label, exponents in [
        ("constant", ()),
        ("log", (1.0,)),
        ("sqrt-log", (0.5,)),
        ("log-loglog", (1.0, 1.0)),
    ]:
        weight = wt.iterated_log_weight(exponents)
        g0 = np.diag(sp.mode_weights(lattice, s - eps) ** 2).astype(complex)
        g1 = np.diag(sp.mode_weights(lattice, s + delta) ** 2).astype(complex)
        psi = wt.build_interp_parameter(weight, eps, delta)
        form = ip.interpolate(ip.HilbertPair(g0, g1), psi)
        direct = sp.mode_weights(lattice, s, weight) ** 2
        basis_residual = np.abs(np.diag(form) - direct) / direct
        cross = np.abs(form - np.diag(np.diag(form))).max() / direct.max()
        residual = float(max(basis_residual.max(), cross))
        rows.append(
            row(f"diagonal-{label}", "max_basis_residual", residual,
                "<=1e-12", residual <= 1e-12, n)
        )

    # Interpolation of bundle norms against the directly computed weighted
    # bundle form: the extreme-eigenvalue bracket must stabilize.
    band = int(cfg.bundle.get("band", 8))
    weight = cfg.weight_object(default=(1.0,))
    psi = wt.build_interp_parameter(weight, eps, delta)
    s_b = float(cfg.indices.get("s", 1.0)) or 1.0
    for bundle_name in ("trivial", "twisted"):
        lo_vals, hi_vals = [], []
        for resolution in cfg.resolutions[:2]:
            model = bd.two_chart_model(resolution, bundle_name)
            basis = bd.basis_sections(model, band)
            g_lo = bd.bundle_gram(basis, s_b - eps)
            g_hi = bd.bundle_gram(basis, s_b + delta)
            g_direct = bd.bundle_gram(basis, s_b, weight)
            lo, hi = ip.equivalence_bracket(g_lo, g_hi, g_direct, psi)
            lo_vals.append(lo)
            hi_vals.append(hi)
            rows.append(
                row(f"bundle-{bundle_name}", "bracket_lower", lo, "finite",
                    lo > 0, resolution)
            )
            rows.append(
                row(f"bundle-{bundle_name}", "bracket_upper", hi, "finite",
                    math.isfinite(hi), resolution)
            )
        drift = max(_drift(lo_vals), _drift(hi_vals))
        rows.append(
            row(f"bundle-{bundle_name}", "bracket_drift", drift, "<0.10",
                drift < 0.10)
        )
    return rows


def _suite_atlas_independence(cfg: ExperimentConfig) -> list[ReportRow]:
    row = _row_factory(cfg)
    rows = []
    band = int(cfg.bundle.get("band", 8))
    count = int(cfg.bundle.get("count", 100))
    bundle_name = cfg.bundle.get("model", "twisted")
    weight = cfg.weight_object(default=(1.0,))
    s = float(cfg.indices.get("s", 1.0))
    base = bd.two_chart_model(cfg.resolutions[0], bundle_name)
    sections = generate_sections(cfg.seed, band, count, base)

    variants = {
        "rotated": dict(rotation=math.pi / 5.0),
        "narrow-bumps": dict(bump_radius=0.55 * math.pi),
    }
    for variant, kwargs in variants.items():
        mins, maxs = [], []
        for resolution in cfg.resolutions:
            model_a = bd.two_chart_model(resolution, bundle_name)
            model_b = bd.two_chart_model(resolution, bundle_name, **kwargs)
            bracket = bd.atlas_independence_test(
                sections, model_a, model_b, s, weight
            )
            mins.append(bracket.ratio_min)
            maxs.append(bracket.ratio_max)
            rows.append(
                row(variant, "ratio_min", bracket.ratio_min, "finite", True,
                    resolution)
            )
            rows.append(
                row(variant, "ratio_max", bracket.ratio_max, "finite",
                    math.isfinite(bracket.ratio_max), resolution)
            )
        drift = max(_drift(mins), _drift(maxs))
        rows.append(row(variant, "bracket_drift", drift, "<0.10", drift < 0.10))

    # Sewing is a left inverse of flattening, and its norm bound constant
    # is stable under refinement.
    sew_constants = []
    for resolution in cfg.resolutions:
        model = bd.two_chart_model(resolution, bundle_name)
        resampled = [u.resampled(model) for u in sections[: min(count, 25)]]
        worst = 0.0
        for u in resampled:
            u2 = bd.sew(bd.flatten(u), model)
            err = max(
                np.abs(a - b).max() for a, b in zip(u.data, u2.data)
            ) / u.max_abs()
            worst = max(worst, err)
        rows.append(
            row("roundtrip", "max_rel_error", worst, "<=1e-10",
                worst <= 1e-10, resolution)
        )
        constant = 0.0
        for u in resampled:
            pieces = bd.flatten(u)
            total = math.sqrt(
                sum(sp.hs_phi_norm(p, s, weight) ** 2 for p in pieces)
            )
            constant = max(
                constant, bd.bundle_norm(bd.sew(pieces, model), s, weight) / total
            )
        sew_constants.append(constant)
        rows.append(
            row("sew-bound", "constant", constant, "finite", True, resolution)
        )
    drift = _drift(sew_constants)
    rows.append(row("sew-bound", "constant_drift", drift, "<0.10", drift < 0.10))
    return rows


def _suite_duality(cfg: ExperimentConfig) -> list[ReportRow]:
    row = _row_factory(cfg)
    rows = []
    weight = cfg.weight_object(default=(1.0,))
    s = float(cfg.indices.get("s", 1.5))
    n = cfg.resolutions[-1]
    lattice = sp.FrequencyLattice(1, n)
    funcs = generate_lattice_functions(cfg.seed, lattice, n // 2, 24, decay=1.0)
    u = sp.SpectralFunction(lattice, funcs[0])
    wts = sp.mode_weights(lattice, s, weight)
    v = sp.SpectralFunction(lattice, wts**2 * u.coefficients)
    saturation = sp.duality_pairing(u, v, s, weight)
    dev = abs(saturation.ratio - 1.0)
    rows.append(
        row("lattice-extremal", "saturation_deviation", dev, "<=1e-12",
            dev <= 1e-12, n)
    )
    worst = 0.0
    for a, b in zip(funcs[::2], funcs[1::2]):
        rep = sp.duality_pairing(
            sp.SpectralFunction(lattice, a), sp.SpectralFunction(lattice, b),
            s, weight,
        )
        worst = max(worst, rep.ratio)
    rows.append(
        row("lattice-random", "max_ratio", worst, "<=1", worst <= 1.0 + 1e-12, n)
    )

    count = int(cfg.bundle.get("count", 100))
    band = int(cfg.bundle.get("band", 8))
    bundle_name = cfg.bundle.get("model", "trivial")
    base = bd.two_chart_model(cfg.resolutions[0], bundle_name)
    us = generate_sections(cfg.seed, band, count, base)
    vs = generate_sections(cfg.seed + 1, band, count, base)
    constants = []
    for resolution in cfg.resolutions:
        model = bd.two_chart_model(resolution, bundle_name)
        worst = 0.0
        for a, b in zip(us, vs):
            rep = bd.bundle_duality_report(
                a.resampled(model), b.resampled(model), s, weight
            )
            worst = max(worst, rep.ratio)
        constants.append(worst)
        rows.append(
            row("bundle-pairs", "empirical_constant", worst, "finite", True,
                resolution)
        )
    drift = _drift(constants)
    rows.append(
        row("bundle-pairs", "constant_drift", drift, "<0.15", drift < 0.15)
    )
    return rows


def _suite_embedding_criterion(cfg: ExperimentConfig) -> list[ReportRow]:
    row = _row_factory(cfg)
    rows = []
    cases = [(0.6, "convergent"), (1.0, "convergent"), (2.0, "convergent"),
             (0.0, "divergent"), (0.25, "divergent"), (0.5, "divergent")]
    for r_exp, expected in cases:
        result = wt.embedding_criterion(wt.iterated_log_weight((r_exp,)))
        ok = result.verdict.value == expected
        rows.append(
            row(f"single-log-r={r_exp:g}", "verdict_matches_oracle",
                1.0 if ok else 0.0, f"oracle={expected}", ok)
        )
    return rows


def _suite_sharpness(cfg: ExperimentConfig) -> list[ReportRow]:
    row = _row_factory(cfg)
    rows = []
    k_lo, k_hi = 2**10, 2**14
    norms, sups = {}, {}
    for K in (k_lo, k_hi):
        lattice = sp.FrequencyLattice(1, K)
        coeffs = np.zeros(lattice.size, dtype=complex)
        ks = np.arange(2, K + 1)
        vals = 1.0 / (ks * np.log(ks))
        coeffs[ks + K] = vals
        coeffs[K - ks] = vals
        u = sp.SpectralFunction(lattice, coeffs, is_real=True)
        norms[K] = sp.hs_phi_norm(u, 0.5)
        sups[K] = sp.sup_and_cq_seminorms(u, 0)
    norm_growth = norms[k_hi] / norms[k_lo] - 1.0
    sup_growth = sups[k_hi] / sups[k_lo] - 1.0
    rows.append(
        row("half-order-norm", "relative_growth", norm_growth, "<0.01",
            norm_growth < 0.01, k_hi)
    )
    rows.append(
        row("sup-norm", "relative_growth", sup_growth, ">=0.08",
            sup_growth >= 0.08, k_hi)
    )
    return rows


def _symbol_for(cfg: ExperimentConfig, default: dict) -> ps.MatrixSymbol:
    spec = cfg.symbol or default
    return ps.symbol_from_config(spec)


def _suite_fredholm_index(cfg: ExperimentConfig) -> list[ReportRow]:
    row = _row_factory(cfg)
    rows = []
    weight_log = wt.iterated_log_weight((1.0,))
    cases = [
        ("identity", ps.identity_symbol(), 0.0, None, 0, 0, 0),
        ("derivative", ps.derivative_symbol(), 0.5, None, 1, 1, 0),
        ("winding-1", ps.winding_symbol(1), 0.0, None, 0, 1, -1),
        ("winding-2", ps.winding_symbol(2), 0.0, None, 0, 2, -2),
    ]

    def run_case(case):
        name, symbol, s, weight, dim_n, dim_np, index = case
        out = []
        indices = []
        for resolution in cfg.resolutions:
            lattice = sp.FrequencyLattice(1, resolution)
            report = ps.fredholm_analysis(symbol, lattice, s, weight)
            indices.append(report.index)
            ok = (
                report.index == index
                and report.kernel_dim == dim_n
                and report.cokernel_dim == dim_np
                and report.spectral_gap >= 1e2
            )
            out.append(
                row(name, "index", report.index, f"=={index}", ok, resolution)
            )
            out.append(
                row(name, "spectral_gap", report.spectral_gap, ">=1e2",
                    report.spectral_gap >= 1e2, resolution)
            )
        out.append(
            row(name, "index_resolution_stable",
                float(len(set(indices)) == 1), "identical",
                len(set(indices)) == 1)
        )
        return out

    for chunk in _parallel_map(run_case, cases):
        rows.extend(chunk)

    # Invariance of index and null subspaces across (s, weight) choices.
    lattice = sp.FrequencyLattice(1, cfg.resolutions[0])
    reports = [
        ps.fredholm_analysis(ps.winding_symbol(1), lattice, s, weight)
        for s, weight in [
            (0.0, None),
            (1.0, weight_log),
            (-0.5, weight_log.reciprocal()),
        ]
    ]
    same_index = len({r.index for r in reports}) == 1
    rows.append(
        row("winding-1-invariance", "indices_agree", float(same_index),
            "identical", same_index, cfg.resolutions[0])
    )
    angle = 0.0
    for other in reports[1:]:
        angle = max(
            angle,
            _principal_angle(reports[0].cokernel, other.cokernel),
            _principal_angle(reports[0].kernel, other.kernel),
        )
    rows.append(
        row("winding-1-invariance", "max_principal_angle", angle, "<=1e-8",
            angle <= 1e-8, cfg.resolutions[0])
    )
    return rows


def _principal_angle(basis_a, basis_b) -> float:
    if not basis_a and not basis_b:
        return 0.0
    if len(basis_a) != len(basis_b):
        return math.pi / 2.0
    a = np.column_stack([v.ravel() for v in basis_a])
    b = np.column_stack([v.ravel() for v in basis_b])
    qa, _ = np.linalg.qr(a)
    qb, _ = np.linalg.qr(b)
    sv = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    return float(math.acos(min(1.0, sv.min())))


def _suite_regularity(cfg: ExperimentConfig) -> list[ReportRow]:
    row = _row_factory(cfg)
    rows = []
    weight = cfg.weight_object(default=(1.0,))
    s = float(cfg.indices.get("s", 0.0))
    count = int(cfg.bundle.get("count", 50))

    symbol = _symbol_for(cfg, {"family": "winding", "winding": 1})
    conditions = []
    for resolution in cfg.resolutions:
        lattice = sp.FrequencyLattice(1, resolution)
        report = ps.fredholm_analysis(symbol, lattice, s, weight)
        funcs = generate_lattice_functions(
            cfg.seed, lattice, resolution // 2, count, decay=1.0
        )
        worst_residual = 0.0
        condition = 0.0
        for coeffs in funcs:
            f = coeffs[None, :]
            if report.cokernel:
                basis = np.column_stack([v.ravel() for v in report.cokernel])
                flat = f.ravel()
                flat = flat - basis @ np.linalg.solve(
                    basis.conj().T @ basis, basis.conj().T @ flat
                )
                f = flat[None, :]
            solve = ps.restricted_solve(symbol, lattice, f, s, weight,
                                        report=report)
            worst_residual = max(worst_residual, solve.residual_rel)
            condition = solve.condition
        conditions.append(condition)
        rows.append(
            row("restricted-solve", "max_residual", worst_residual, "<=1e-8",
                worst_residual <= 1e-8, resolution)
        )
        rows.append(
            row("restricted-solve", "condition", condition, "stable", True,
                resolution)
        )
    drift = _drift(conditions)
    rows.append(
        row("restricted-solve", "condition_drift", drift, "<0.20", drift < 0.20)
    )

    families = {
        "diagonal": ps.bracket_multiplier(2.0),
        "variable": ps.variable_multiplier(
            {0: 2.0, 1: 0.5, -1: 0.5},
            lambda k: (1.0 + k.astype(float) ** 2),
            2.0,
            name="variable-bracket",
        ),
    }
    for name, sym in families.items():
        ratios = []
        for resolution in cfg.resolutions:
            lattice = sp.FrequencyLattice(1, resolution)
            br = lattice.brackets
            f = (br ** (-s - 0.5) * (np.log(br) + 1.0) ** -1.0).astype(complex)
            table = ps.regularity_experiment(sym, lattice, f[None, :], s, weight)
            ratios.append(table["ratio"])
            rows.append(
                row(f"lifting-{name}", "norm_ratio", table["ratio"], "flat",
                    True, resolution)
            )
        drift = _drift(ratios)
        rows.append(
            row(f"lifting-{name}", "ratio_drift", drift, "<0.10", drift < 0.10)
        )
    return rows


def _suite_apriori(cfg: ExperimentConfig) -> list[ReportRow]:
    row = _row_factory(cfg)
    rows = []
    weight = cfg.weight_object(default=(1.0,))
    count = int(cfg.bundle.get("count", 100))
    chi = ps.circle_bump(0.0, 1.0)
    eta = ps.circle_plateau(0.0, 1.3, 1.9)
    families = {
        "winding-1": (ps.winding_symbol(1), 0.5, -0.5),
        "variable": (
            ps.variable_multiplier(
                {0: 2.0, 1: 0.5, -1: 0.5},
                lambda k: (1.0 + k.astype(float) ** 2),
                2.0,
                name="variable-bracket",
            ),
            0.0,
            1.0,
        ),
    }
    def run_family(item):
        name, (symbol, s, sigma) = item
        out = []
        for variant in ("global", "local", "sharpened"):
            constants = []
            for resolution in cfg.resolutions:
                lattice = sp.FrequencyLattice(1, resolution)
                samples = generate_lattice_functions(
                    cfg.seed, lattice, resolution // 2, count, decay=1.5
                )
                report = ps.apriori_estimate_harness(
                    symbol, lattice, s, weight, sigma, samples,
                    chi=chi, eta=eta, variant=variant,
                )
                constants.append(report.c_estimate)
                out.append(
                    row(f"{name}-{variant}", "c_estimate", report.c_estimate,
                        "stable", True, resolution)
                )
            drift = _drift(constants)
            out.append(
                row(f"{name}-{variant}", "c_drift", drift, "<0.15",
                    drift < 0.15)
            )

        # Commutator order drop: the response to shell sources decays one
        # order faster than the symbol itself.
        drops, fulls = [], []
        for resolution in cfg.resolutions:
            lattice = sp.FrequencyLattice(1, resolution)
            rep = ps.commutator_order_report(symbol, lattice, s, weight, chi)
            drops.append(rep.norm_drop)
            fulls.append(rep.norm_full)
            out.append(
                row(f"{name}-commutator", "shell_norm_drop_order",
                    rep.norm_drop, "bounded", True, resolution)
            )
            out.append(
                row(f"{name}-commutator", "shell_norm_full_order",
                    rep.norm_full, "decays", True, resolution)
            )
        bounded = max(drops) <= 1.5 * drops[0]
        out.append(
            row(f"{name}-commutator", "drop_channel_bounded", float(bounded),
                "max<=1.5*first", bounded)
        )
        decay_ok = all(a / b >= 2.0 for a, b in zip(fulls, fulls[1:]))
        worst = min(a / b for a, b in zip(fulls, fulls[1:]))
        out.append(
            row(f"{name}-commutator", "full_channel_decay_factor", worst,
                ">=2.0_per_doubling", decay_ok)
        )
        return out

    for chunk in _parallel_map(run_family, list(families.items())):
        rows.extend(chunk)
    return rows


@dataclass(frozen=True)
class _Suite:
    name: str
    description: str
    runner: Callable[[ExperimentConfig], list[ReportRow]]
    resolutions: tuple[int, ...]


_SUITES: dict[str, _Suite] = {}


def _register(name, description, runner, resolutions):
    _SUITES[name] = _Suite(name, description, runner, resolutions)


_register(
    "interp-exactness",
    "Interpolated norms against direct weighted norms: exact on the "
    "diagonal lattice model, equivalent with a stable constant bracket on "
    "bundle section bases.",
    _suite_interp_exactness,
    (16, 32, 64),
)
_register(
    "atlas-independence",
    "Norm ratios of fixed sections between two atlases stay in a stable "
    "bracket; sewing is a left inverse of flattening with a stable norm "
    "bound.",
    _suite_atlas_independence,
    (16, 32, 64),
)
_register(
    "duality",
    "Pairing bounds: exact constant 1 with extremal saturation on the "
    "lattice; stable empirical constants on bundles.",
    _suite_duality,
    (16, 32),
)
_register(
    "embedding-criterion",
    "Numeric classification of the tail integral int dt/(t*phi^2) against "
    "the closed-form rule for single-log weights.",
    _suite_embedding_criterion,
    (1,),
)
_register(
    "sharpness",
    "The family u_k = 1/(k log k): bounded half-order norms, growing sup "
    "norms; the mechanism separating the weighted scale from the "
    "continuous-function target.",
    _suite_sharpness,
    (1,),
)
_register(
    "fredholm-index",
    "Kernel/cokernel dimensions and indices of shipped symbol families, "
    "stable across resolutions and weight choices.",
    _suite_fredholm_index,
    (32, 64),
)
_register(
    "regularity",
    "Restricted solves: small residuals, stable condition numbers, and "
    "solution norms inheriting the data's refinement.",
    _suite_regularity,
    (32, 64, 128),
)
_register(
    "apriori",
    "Localized and global solution estimates with stable constants, plus "
    "the commutator order-drop evidence.",
    _suite_apriori,
    (32, 64, 128),
)


def list_suites() -> list[str]:
    return sorted(_SUITES)


def describe_suite(name: str) -> str:
    if name not in _SUITES:
        raise ConfigError(f"unknown suite '{name}'")
    suite = _SUITES[name]
    return (
        f"{suite.name}: {suite.description} "
        f"(default resolutions {list(suite.resolutions)})"
    )


# ---------------------------------------------------------------------------
# reporting


def _write_atomic(path: Path, data: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def _rows_to_csv(rows: Sequence[ReportRow]) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["schema_version", "suite", "case", "quantity", "value", "tolerance",
         "verdict", "resolution", "seed", "config_hash"]
    )
    for r in rows:
        writer.writerow(
            [SCHEMA_VERSION, r.suite, r.case, r.quantity, _fmt(r.value),
             r.tolerance, r.verdict,
             "" if r.resolution is None else r.resolution, r.seed,
             r.config_hash]
        )
    return buf.getvalue()


def _rows_to_json(cfg: ExperimentConfig, rows: Sequence[ReportRow]) -> str:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "suite": cfg.suite,
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "rows": [
            {
                "case": r.case,
                "quantity": r.quantity,
                "value": float(_fmt(r.value)),
                "tolerance": r.tolerance,
                "verdict": r.verdict,
                "resolution": r.resolution,
            }
            for r in rows
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def _svg_chart(cfg: ExperimentConfig, rows: Sequence[ReportRow]) -> str:
    series: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        if r.resolution is None or not math.isfinite(r.value):
            continue
        series.setdefault(f"{r.case}/{r.quantity}", []).append(
            (float(r.resolution), r.value)
        )
    width, height, margin = 640, 400, 50
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<text x="{width // 2}" y="20" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{cfg.suite}: values vs '
        f"resolution</text>",
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
    ]
    points = [p for pts in series.values() for p in pts]
    if points:
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        if x_hi == x_lo:
            x_hi = x_lo + 1.0
        if y_hi == y_lo:
            y_hi = y_lo + 1.0

        def to_px(x, y):
            px = margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)
            py = height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)
            return f"{px:.2f},{py:.2f}"

        palette = ["#1b6ca8", "#a8321b", "#1ba84f", "#7a1ba8", "#a8861b",
                   "#1ba8a2", "#5d5d5d", "#d04a8a"]
        for i, (label, pts) in enumerate(sorted(series.items())):
            pts = sorted(pts)
            path = " ".join(to_px(x, y) for x, y in pts)
            color = palette[i % len(palette)]
            parts.append(
                f'<polyline points="{path}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>'
            )
            parts.append(
                f'<text x="{margin + 4}" y="{margin + 14 + 13 * i}" '
                f'font-family="monospace" font-size="10" fill="{color}">'
                f"{label}</text>"
            )
        parts.append(
            f'<text x="{margin}" y="{height - margin + 16}" '
            f'font-family="monospace" font-size="11">{x_lo:g}</text>'
        )
        parts.append(
            f'<text x="{width - margin}" y="{height - margin + 16}" '
            f'text-anchor="end" font-family="monospace" font-size="11">'
            f"{x_hi:g}</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _output_dir(cfg: ExperimentConfig) -> Path:
    if cfg.output_dir:
        return Path(cfg.output_dir)
    root = os.environ.get("SOBSCALE_OUTPUT_ROOT", "sobscale_runs")
    return Path(root) / cfg.suite


def run_suite(config: ExperimentConfig | dict) -> SuiteResult:
    """Execute a named suite and write CSV, JSON, and SVG artifacts.

    The exit code of the result is nonzero when any row fails.  Rows are
    computed concurrently per suite-internal task when ``workers > 1``, and
    assembled in a fixed order so outputs stay deterministic.
    """
    global _ACTIVE_WORKERS
    if isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    suite = _SUITES[config.suite]
    _ACTIVE_WORKERS = config.workers
    try:
        rows = suite.runner(config)
    finally:
        _ACTIVE_WORKERS = 1
    out = _output_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    _write_atomic(out / f"{config.suite}.csv", _rows_to_csv(rows))
    _write_atomic(out / f"{config.suite}.json", _rows_to_json(config, rows))
    _write_atomic(out / f"{config.suite}.svg", _svg_chart(config, rows))
    return SuiteResult(config=config, rows=tuple(rows), output_dir=out)
