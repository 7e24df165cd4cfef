"""Limit operators at the boundary: frozen coefficients, indicial families,
and the structure-specific invariant operators on the isotropy groups.

For the b frame the limit operator is the translation-invariant normal
operator on the cylinder and its Fourier transform in t is the indicial
family, a polynomial in tau acting mode by mode.  For the sc frame (and
the rescaled c_gamma frames, whose isotropy is likewise abelian) the limit
operator at a boundary point is a constant-coefficient full symbol on the
tangent group.  For the zero frame it is the frozen operator in the
half-space frame {s d/ds, s d/dw_j}; no closed-form invertibility
criterion is implemented for it, only numerical sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .crosssec import Channel, ModeTable
from .liestruct import FredholmKitError, StructureKind
from .opalg import (
    BoundaryOperator,
    CoeffTerm,
    Coefficient,
    MultiIndex,
    _covector_dim,
    _is_matrix,
    _nu_key,
    _value_mul,
    cross_partial_factor,
)


def freeze_coefficients(p: BoundaryOperator) -> BoundaryOperator:
    """Drop every coefficient monomial r^nu with nu > 0, keeping the
    boundary values a_alpha(0, .)."""
    frozen = []
    for mi, co in p.terms:
        kept = [t for t in co.terms if _nu_key(t.nu) == 0.0]
        if kept:
            frozen.append((mi, Coefficient(kept)))
    if not frozen:
        raise FredholmKitError(
            "every coefficient vanishes at the boundary; the frozen operator "
            "is identically zero")
    return BoundaryOperator(p.structure, p.cross_section, frozen,
                            symbolic_only=p.symbolic_only)


@dataclass(frozen=True)
class NormalOperator:
    """The coefficient-frozen, translation-invariant operator of a b-type
    (or c_gamma-type) operator; commutes with t-translations after the
    log-radius substitution."""

    base: BoundaryOperator
    translation_invariant: bool = True

    @property
    def order(self) -> int:
        return self.base.order

    @property
    def system_size(self) -> int:
        return self.base.system_size


def normal_operator(p: BoundaryOperator) -> NormalOperator:
    if p.structure.kind not in (StructureKind.B, StructureKind.C_GAMMA):
        raise FredholmKitError(
            "normal operators are defined for the b and c_gamma frames; use "
            "limit_operator for zero/sc structures")
    return NormalOperator(freeze_coefficients(p))


def _channel_factor(mi: MultiIndex, ct: CoeffTerm, ch: Channel) -> complex:
    """r-independent mode action of one frozen term on one channel,
    excluding the radial substitution."""
    factor = ct.lam_value(ch.eigenvalue)
    if mi.laplacian:
        factor *= (-ch.eigenvalue) ** mi.laplacian
    if any(mi.cross):
        factor *= cross_partial_factor(mi.cross, ch)
    return factor


@dataclass(frozen=True)
class IndicialFamily:
    """Per-mode polynomials in tau obtained from the normal operator by the
    radial substitution (frame radial derivative -> i tau); coefficients
    are k x k matrices stored ascending in the tau power."""

    channels: tuple[Channel, ...]
    polys: dict[str, np.ndarray]
    source_cutoff: float
    system_size: int
    structure_kind: StructureKind
    warning: str | None = None

    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.channels)

    def poly(self, label: str) -> np.ndarray:
        return self.polys[label]

    def degree(self, label: str) -> int:
        return self.polys[label].shape[0] - 1

    def eval(self, label: str, tau: complex):
        coeffs = self.polys[label]
        out = np.zeros_like(coeffs[0])
        for c in coeffs[::-1]:
            out = out * tau + c
        return out if self.system_size > 1 else complex(out[0, 0])

    def det_poly(self, label: str) -> np.ndarray:
        """Determinant of the mode polynomial, as a scalar polynomial in tau
        (exact for scalars, interpolated for systems)."""
        coeffs = self.polys[label]
        if self.system_size == 1:
            return coeffs[:, 0, 0].copy()
        deg = (coeffs.shape[0] - 1) * self.system_size
        xs = np.arange(deg + 1, dtype=float) - deg / 2.0
        ys = np.array([np.linalg.det(self._eval_matrix(coeffs, x)) for x in xs])
        return np.polynomial.polynomial.polyfit(xs, ys, deg).astype(complex)

    @staticmethod
    def _eval_matrix(coeffs: np.ndarray, tau: complex) -> np.ndarray:
        out = np.zeros_like(coeffs[0])
        for c in coeffs[::-1]:
            out = out * tau + c
        return out

    def shifted(self, delta: float) -> "IndicialFamily":
        """The family evaluated at tau - i delta, as exact polynomials."""
        w = -1j * float(delta)
        polys = {}
        for label, coeffs in self.polys.items():
            out = np.zeros_like(coeffs)
            for m in range(coeffs.shape[0]):
                wp = 1.0 + 0j
                for d in range(m + 1):
                    out[m - d] = out[m - d] + coeffs[m] * (math.comb(m, d) * wp)
                    wp = wp * w
            polys[label] = out
        return IndicialFamily(self.channels, polys, self.source_cutoff,
                              self.system_size, self.structure_kind, self.warning)


def indicial_family(n: NormalOperator, table: ModeTable) -> IndicialFamily:
    """Fourier transform of the normal operator in the cylinder direction:
    per mode of eigenvalue lambda, substitute the radial frame derivative
    by i tau, Laplacian powers by -lambda, tangential partials by the
    signed frequencies.

    Mode-diagonal coefficients are the only tangential dependence the
    algebra admits, so the family is block-diagonal by construction;
    anything else must be pre-discretized as a generic cross-section.
    """
    base = n.base
    chans = base.mode_channels(table)
    k = base.system_size
    warning = None
    if base.structure.kind is StructureKind.C_GAMMA:
        warning = ("c_gamma frame: the indicial substitution is formal; "
                   "no invertibility criterion is attached to it here")
    polys: dict[str, np.ndarray] = {}
    deg = max(mi.radial for mi, _ in base.terms)
    for ch in chans:
        coeffs = np.zeros((deg + 1, k, k), dtype=complex)
        for mi, co in base.terms:
            for ct in co.terms:
                factor = _channel_factor(mi, ct, ch) * 1j ** mi.radial
                piece = _value_mul(factor, ct.value)
                if not _is_matrix(piece):
                    piece = piece * np.eye(k)
                coeffs[mi.radial] += piece
        polys[ch.label] = coeffs
    return IndicialFamily(chans, polys, table.cutoff, k,
                          base.structure.kind, warning)


@dataclass(frozen=True)
class ScSymbol:
    """Constant-coefficient full symbol on the abelian tangent group
    R x T_x(dM): a polynomial in (xi, eta)."""

    terms: tuple[tuple[MultiIndex, complex | np.ndarray], ...]
    system_size: int
    order: int
    covector_dim: int
    magnitude_slot: bool

    def eval(self, xi: float, eta=()) -> complex | np.ndarray:
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        eta2 = float(np.dot(eta, eta))
        k = self.system_size
        total = np.zeros((k, k), dtype=complex)
        for mi, value in self.terms:
            factor = (1j * xi) ** mi.radial * (-eta2) ** mi.laplacian
            for j, p in enumerate(mi.cross):
                if p:
                    factor *= (1j * eta[j]) ** p
            piece = _value_mul(factor, value)
            total += piece if _is_matrix(piece) else piece * np.eye(k)
        return total if k > 1 else complex(total[0, 0])

    def det_at(self, xi: float, eta=()) -> complex:
        v = self.eval(xi, eta)
        return complex(np.linalg.det(v)) if _is_matrix(v) else complex(v)

    def coefficient_norms_by_degree(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for mi, value in self.terms:
            norm = float(np.linalg.norm(value, 2)) if _is_matrix(value) else abs(value)
            out[mi.total] = out.get(mi.total, 0.0) + norm
        return out


def full_symbol(frozen: BoundaryOperator) -> ScSymbol:
    """Full Fourier symbol of a frozen operator on the abelian tangent
    group: frame radial derivative -> i xi, frame tangential -> i eta_j,
    Laplacian powers -> -|eta|^2."""
    terms = []
    for mi, co in frozen.terms:
        for ct in co.terms:
            if _nu_key(ct.nu) != 0.0:
                raise FredholmKitError("full symbols need frozen coefficients")
            if ct.lam_degree:
                raise FredholmKitError(
                    "mode-diagonal coefficient polynomials have no pointwise "
                    "boundary value; pre-discretize via a generic cross-section")
            terms.append((mi, ct.value))
    d, mag = _covector_dim(frozen)
    return ScSymbol(tuple(terms), frozen.system_size, frozen.order, d, mag)


@dataclass(frozen=True)
class LimitOperator:
    """The invariant operator induced on the isotropy group of a boundary
    orbit.  Exactly one payload is set: a normal operator (b), a full
    symbol (sc / c_gamma), or a frozen half-space operator (zero)."""

    structure_kind: StructureKind
    orbit: str
    normal: NormalOperator | None = None
    symbol: ScSymbol | None = None
    half_space: BoundaryOperator | None = None
    warning: str | None = None


def limit_operator(p: BoundaryOperator, point: str | None = None) -> LimitOperator:
    """Restrict to a boundary orbit and let the frame act on the isotropy
    group: the whole boundary component with group R for b, a point with
    the tangent (semi)direct product groups otherwise."""
    kind = p.structure.kind
    if kind is StructureKind.B:
        return LimitOperator(kind, "boundary:0", normal=normal_operator(p))
    label = f"point:{point}" if point else "point:x0"
    frozen = freeze_coefficients(p)
    if kind is StructureKind.ZERO:
        return LimitOperator(kind, label, half_space=frozen)
    if kind is StructureKind.SC:
        return LimitOperator(kind, label, symbol=full_symbol(frozen))
    return LimitOperator(
        kind, label, symbol=full_symbol(frozen),
        warning=("c_gamma limit operators fall outside the cylindrical and "
                 "scattering frames; the symbol test below is numerical "
                 "evidence, not a criterion"))
