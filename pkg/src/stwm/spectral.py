"""Eigenpairs of constant-coefficient operators kappa^2 - Laplacian with
Dirichlet conditions on intervals and rectangles, and the space-time model
built on a shared eigenbasis.

Explicit sine eigenfunctions make every downstream covariance formula exactly
testable; the two operators of a model (one driving the dynamics, one coloring
the noise) must share eigenfunctions and may differ only in the constant shift.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import ModeKernel

__all__ = [
    "EigenBasis",
    "SpectralModel",
    "build_basis",
    "evaluate_basis",
    "weyl_ratio",
    "mode_params",
    "model_from_dict",
    "model_from_json",
    "model_to_dict",
]

MAX_MODES = 10 ** 7


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Sorted Dirichlet eigenpairs of kappa2 - Laplacian on an interval (d=1)
    or rectangle (d=2).

    eigenvalues[j] = kappa2 + sum_i (m_i pi / extent_i)^2 for the multi-index
    m = index_map[j]; ties in 2D are broken lexicographically so the ordering
    is deterministic.
    """

    d: int
    extents: tuple
    kappa2: float
    J: int
    eigenvalues: np.ndarray = field(repr=False)
    index_map: tuple = field(repr=False)

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)


def build_basis(d: int, extents, kappa2: float, J: int) -> EigenBasis:
    """Construct the smallest J eigenpairs."""
    if d not in (1, 2):
        raise ValueError(f"unsupported dimension d={d} (only 1 and 2 ship)")
    if not J >= 1:
        raise ValueError(f"J must be >= 1, got {J}")
    if J > MAX_MODES:
        raise ValueError(f"J={J} exceeds the supported cap {MAX_MODES}")
    if kappa2 < 0.0:
        raise ValueError(f"kappa2 must be >= 0, got {kappa2}")
    if np.isscalar(extents):
        extents = (float(extents),) * d
    else:
        extents = tuple(float(e) for e in extents)
    if len(extents) != d or any(e <= 0.0 for e in extents):
        raise ValueError(f"extents must be {d} positive lengths, got {extents}")

    if d == 1:
        js = np.arange(1, J + 1)
        lam = kappa2 + (js * math.pi / extents[0]) ** 2
        index_map = tuple((int(j),) for j in js)
    else:
        # enumerate a square of multi-indices large enough to contain the
        # J smallest eigenvalues, then sort with lexicographic tie-break
        m = math.ceil(math.sqrt(J)) + 8
        j1, j2 = np.meshgrid(np.arange(1, m + 1), np.arange(1, m + 1), indexing="ij")
        j1, j2 = j1.ravel(), j2.ravel()
        lam_all = kappa2 + (j1 * math.pi / extents[0]) ** 2 + (j2 * math.pi / extents[1]) ** 2
        order = np.lexsort((j2, j1, lam_all))[:J]
        lam = lam_all[order]
        index_map = tuple((int(a), int(b)) for a, b in zip(j1[order], j2[order]))
    return EigenBasis(d=d, extents=extents, kappa2=float(kappa2), J=int(J),
                      eigenvalues=np.asarray(lam, dtype=float), index_map=index_map)


def evaluate_basis(basis: EigenBasis, points) -> np.ndarray:
    """Matrix of eigenfunction values, shape (n_points, J)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if basis.d == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
        pts = pts.T
    if pts.shape[1] != basis.d:
        raise ValueError(f"points must have {basis.d} coordinates, got shape {pts.shape}")
    for axis, ell in enumerate(basis.extents):
        coord = pts[:, axis]
        if np.any(coord <= 0.0) or np.any(coord >= ell):
            raise ValueError(f"points must lie inside the open domain (0, {ell}) along axis {axis}")
    idx = np.asarray(basis.index_map)  # (J, d)
    out = np.ones((pts.shape[0], basis.J))
    for axis, ell in enumerate(basis.extents):
        out *= math.sqrt(2.0 / ell) * np.sin(np.outer(pts[:, axis], idx[:, axis]) * math.pi / ell)
    return out


def weyl_ratio(basis: EigenBasis) -> tuple:
    """(min, max) of eigenvalue_j / j^{2/d} over the upper half j in [J/2, J].

    The two-sided constants of the eigenvalue growth law, measured on the
    resolved part of the spectrum; used downstream for honest tail bounds.
    """
    if basis.J < 10:
        raise ValueError(f"weyl_ratio requires J >= 10, got {basis.J}")
    j_lo = int(math.ceil(basis.J / 2))
    js = np.arange(j_lo, basis.J + 1)
    ratios = basis.eigenvalues[j_lo - 1:] / js ** (2.0 / basis.d)
    return float(ratios.min()), float(ratios.max())


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Full model specification.

    basis carries the dynamics operator (decay rates lambda_j^beta),
    basis_tilde the noise-coloring operator (weights lambda_tilde_j^{-alpha});
    both must share dimension, extents, mode count, and index map. gamma is
    the fractional order of the parabolic operator, T the time horizon.
    gamma > 1/2 is required before any sampling-type operation and is checked
    there, not at construction.
    """

    basis: EigenBasis
    basis_tilde: EigenBasis
    alpha: float
    beta: float
    gamma: float
    T: float

    def __post_init__(self):
        b, bt = self.basis, self.basis_tilde
        if (b.d, b.extents, b.J, b.index_map) != (bt.d, bt.extents, bt.J, bt.index_map):
            raise ValueError("basis and basis_tilde must share dimension, extents, J and index map")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.T > 0.0:
            raise ValueError(f"T must be > 0, got {self.T}")

    @property
    def J(self) -> int:
        return self.basis.J

    @property
    def d(self) -> int:
        return self.basis.d


def mode_params(model: SpectralModel, j: int) -> ModeKernel:
    """Temporal kernel of mode j (1-based): mu = lambda_j^beta,
    w = lambda_tilde_j^{-alpha}, order gamma."""
    if not 1 <= j <= model.J:
        raise IndexError(f"mode index {j} out of range [1, {model.J}]")
    lam = model.basis.eigenvalues[j - 1]
    lam_t = model.basis_tilde.eigenvalues[j - 1]
    return ModeKernel(mu=lam ** model.beta, weight=lam_t ** -model.alpha, gamma=model.gamma)


class ConfigError(ValueError):
    """Invalid model configuration; names the offending field."""

    def __init__(self, field_name, message):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


_MODEL_FIELDS = ("d", "extents", "kappa2", "kappa2_tilde", "J", "alpha", "beta", "gamma", "T")


def _checked(doc: dict, name: str, predicate, message: str):
    value = doc[name]
    try:
        ok = predicate(value)
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise ConfigError(name, f"{message}, got {value!r}")
    return value


def model_from_dict(doc: dict) -> SpectralModel:
    """Build a SpectralModel from a configuration mapping with fields
    {d, extents, kappa2, kappa2_tilde, J, alpha, beta, gamma, T}.

    Raises ConfigError naming the first offending field."""
    for name in _MODEL_FIELDS:
        if name not in doc:
            raise ConfigError(name, "missing")
    d = _checked(doc, "d", lambda v: v in (1, 2), "must be 1 or 2")
    J = _checked(doc, "J", lambda v: int(v) == v and 1 <= v <= MAX_MODES,
                 f"must be an integer in [1, {MAX_MODES}]")
    extents = doc["extents"]
    ext_list = [extents] if np.isscalar(extents) else list(extents)
    if len(ext_list) != d or any(not float(e) > 0.0 for e in ext_list):
        raise ConfigError("extents", f"must be {d} positive length(s), got {extents!r}")
    kappa2 = _checked(doc, "kappa2", lambda v: float(v) >= 0.0, "must be >= 0")
    kappa2_t = _checked(doc, "kappa2_tilde", lambda v: float(v) >= 0.0, "must be >= 0")
    alpha = _checked(doc, "alpha", lambda v: float(v) >= 0.0, "must be >= 0")
    beta = _checked(doc, "beta", lambda v: float(v) >= 0.0, "must be >= 0")
    gamma = _checked(doc, "gamma", lambda v: float(v) > 0.0, "must be > 0")
    horizon = _checked(doc, "T", lambda v: float(v) > 0.0, "must be > 0")
    return SpectralModel(
        basis=build_basis(d, extents, float(kappa2), int(J)),
        basis_tilde=build_basis(d, extents, float(kappa2_t), int(J)),
        alpha=float(alpha), beta=float(beta), gamma=float(gamma), T=float(horizon))


def model_from_json(path) -> SpectralModel:
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config document must be a JSON object")
    return model_from_dict(doc)


def model_to_dict(model: SpectralModel) -> dict:
    extents = model.basis.extents
    return {
        "d": model.d,
        "extents": list(extents) if model.d > 1 else extents[0],
        "kappa2": model.basis.kappa2,
        "kappa2_tilde": model.basis_tilde.kappa2,
        "J": model.J,
        "alpha": model.alpha,
        "beta": model.beta,
        "gamma": model.gamma,
        "T": model.T,
    }
