"""Degenerate frames on a boundary collar: brackets, isotropy groups, metrics.

The collar is [0, epsilon) x (cross-section), with radial coordinate r and
cross-section coordinates y_1, ..., y_{n-1}.  A structure is given by a
global frame of monomial vector fields c * r^nu * d/d(axis) that are
tangent to (or vanish at) r = 0:

    b        r d/dr,       d/dy_j          (cylindrical ends)
    zero     r d/dr,       r d/dy_j        (hyperbolic ends)
    sc       r^2 d/dr,     r d/dy_j        (Euclidean / conical ends)
    c_gamma  r^g d/dr,     r^(g-1) d/dy_j  (g >= 1; radial/tangential
                                            scalings g and g-1)

Coefficients of vector fields live in the class of finite sums of r^nu
monomials with nu >= 0; brackets are computed exactly in that class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

RADIAL = -1  # axis tag for the d/dr direction

_NU_KEY_DECIMALS = 10


class FredholmKitError(Exception):
    """Base error for this package."""


class NotRepresentableError(FredholmKitError):
    """A coefficient left the supported r^nu (nu >= 0) monomial class."""


def _nu_key(nu: float) -> float:
    return round(float(nu), _NU_KEY_DECIMALS)


@dataclass(frozen=True)
class FrameField:
    """A monomial vector field r^r_exponent * d/d(axis)."""

    r_exponent: float
    axis: int  # RADIAL or a cross-section coordinate index >= 0

    def __post_init__(self):
        if self.r_exponent < 0:
            raise ValueError("frame field exponent must be nonnegative")
        if self.axis == RADIAL and self.r_exponent == 0:
            raise ValueError(
                "radial frame fields need r_exponent > 0 to stay tangent at r = 0"
            )
        if self.axis < RADIAL:
            raise ValueError(f"invalid axis {self.axis}")

    def __str__(self) -> str:
        var = "r" if self.axis == RADIAL else f"y{self.axis + 1}"
        if self.r_exponent == 0:
            return f"d/d{var}"
        power = "r" if self.r_exponent == 1 else f"r^{self.r_exponent:g}"
        return f"{power} d/d{var}"


@dataclass(frozen=True)
class VTerm:
    coeff: complex
    nu: float
    axis: int


class VectorField:
    """Finite sum of c * r^nu * d/d(axis) terms, nu >= 0, exact arithmetic."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        merged: dict[tuple[float, int], complex] = {}
        nus: dict[tuple[float, int], float] = {}
        for t in terms:
            if t.nu < 0:
                raise NotRepresentableError(
                    f"coefficient r^{t.nu:g} has a negative exponent; only "
                    "nu >= 0 monomials are supported"
                )
            key = (_nu_key(t.nu), t.axis)
            merged[key] = merged.get(key, 0j) + complex(t.coeff)
            nus.setdefault(key, float(t.nu))
        out = tuple(
            VTerm(c, nus[k], k[1])
            for k, c in sorted(merged.items(), key=lambda kv: (kv[0][1], kv[0][0]))
            if c != 0
        )
        object.__setattr__(self, "terms", out)

    def __setattr__(self, *a):  # immutable
        raise AttributeError("VectorField is immutable")

    @staticmethod
    def monomial(coeff: complex, nu: float, axis: int) -> "VectorField":
        return VectorField([VTerm(coeff, nu, axis)])

    @staticmethod
    def of_frame(f: FrameField, coeff: complex = 1.0, nu: float = 0.0) -> "VectorField":
        return VectorField.monomial(coeff, nu + f.r_exponent, f.axis)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.terms + other.terms)

    def __rmul__(self, c: complex) -> "VectorField":
        return VectorField([VTerm(c * t.coeff, t.nu, t.axis) for t in self.terms])

    def __neg__(self) -> "VectorField":
        return (-1) * self

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, VectorField) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t in self.terms:
            var = "r" if t.axis == RADIAL else f"y{t.axis + 1}"
            c = t.coeff.real if t.coeff.imag == 0 else t.coeff
            mono = "" if t.nu == 0 else ("r " if t.nu == 1 else f"r^{t.nu:g} ")
            parts.append(f"({c:g}) {mono}d/d{var}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"VectorField<{self}>"


def bracket(x: VectorField, y: VectorField) -> VectorField:
    """Lie bracket [x, y], expanded exactly in r^nu monomial terms.

    Only the radial direction differentiates the coefficients, so
    [c1 r^a d_u, c2 r^b d_v] = c1 c2 b r^(a+b-1) d_v  (u radial)
                             - c1 c2 a r^(a+b-1) d_u  (v radial).
    """
    out = []
    for a in x.terms:
        for b in y.terms:
            if a.axis == RADIAL and b.nu != 0:
                out.append(VTerm(a.coeff * b.coeff * b.nu, a.nu + b.nu - 1, b.axis))
            if b.axis == RADIAL and a.nu != 0:
                out.append(VTerm(-a.coeff * b.coeff * a.nu, a.nu + b.nu - 1, a.axis))
    return VectorField(out)


class StructureKind(Enum):
    B = "b"
    ZERO = "zero"
    SC = "sc"
    C_GAMMA = "c_gamma"


class GroupKind(Enum):
    ABELIAN = "abelian"
    SEMIDIRECT_DILATION = "semidirect_dilation"


_RADIAL_EXP = {StructureKind.B: 1.0, StructureKind.ZERO: 1.0, StructureKind.SC: 2.0}
_CROSS_EXP = {StructureKind.B: 0.0, StructureKind.ZERO: 1.0, StructureKind.SC: 1.0}


@dataclass(frozen=True)
class LieStructure:
    """A degenerate frame on a collar of dimension collar_dim = 1 + cross dim."""

    kind: StructureKind
    collar_dim: int
    gamma: float | None = None

    def __post_init__(self):
        if self.collar_dim < 1:
            raise ValueError("collar_dim must be a positive integer")
        if self.kind is StructureKind.C_GAMMA:
            if self.gamma is None:
                raise ValueError("c_gamma structures need a gamma parameter")
            if self.gamma < 1:
                raise NotRepresentableError(
                    f"c_gamma frame with gamma={self.gamma:g} is not closed under "
                    "brackets (coefficients r^(gamma-1) leave the nu >= 0 class); "
                    "gamma in {0, 1/2, 1} is handled in the b frame instead"
                )
        elif self.gamma is not None:
            raise ValueError("gamma is only meaningful for c_gamma structures")

    # ---- convenience constructors -------------------------------------

    @staticmethod
    def b(cross_dim: int) -> "LieStructure":
        return LieStructure(StructureKind.B, cross_dim + 1)

    @staticmethod
    def zero(cross_dim: int) -> "LieStructure":
        return LieStructure(StructureKind.ZERO, cross_dim + 1)

    @staticmethod
    def sc(cross_dim: int) -> "LieStructure":
        return LieStructure(StructureKind.SC, cross_dim + 1)

    @staticmethod
    def c_gamma(gamma: float, cross_dim: int) -> "LieStructure":
        return LieStructure(StructureKind.C_GAMMA, cross_dim + 1, gamma=float(gamma))

    # ---- frame data ----------------------------------------------------

    @property
    def cross_dim(self) -> int:
        return self.collar_dim - 1

    @property
    def radial_exponent(self) -> float:
        """Exponent a in the radial frame field r^a d/dr."""
        if self.kind is StructureKind.C_GAMMA:
            return float(self.gamma)
        return _RADIAL_EXP[self.kind]

    @property
    def cross_exponent(self) -> float:
        """Exponent s in the tangential frame fields r^s d/dy_j."""
        if self.kind is StructureKind.C_GAMMA:
            return float(self.gamma) - 1.0
        return _CROSS_EXP[self.kind]

    @property
    def frame(self) -> tuple[FrameField, ...]:
        fields = [FrameField(self.radial_exponent, RADIAL)]
        fields += [FrameField(self.cross_exponent, j) for j in range(self.cross_dim)]
        return tuple(fields)

    def frame_vector_fields(self) -> tuple[VectorField, ...]:
        return tuple(VectorField.of_frame(f) for f in self.frame)

    def expand_in_frame(self, v: VectorField):
        """Expand v over the frame with r^nu monomial coefficients.

        Returns a list (one entry per frame field) of coefficient term
        lists [(c, nu), ...].  Raises NotRepresentableError if v is not in
        the module generated by the frame over nu >= 0 monomials.
        """
        frame = self.frame
        by_axis = {f.axis: (i, f.r_exponent) for i, f in enumerate(frame)}
        out: list[list[tuple[complex, float]]] = [[] for _ in frame]
        for t in v.terms:
            if t.axis not in by_axis:
                raise NotRepresentableError(
                    f"direction axis {t.axis} is outside this {self.collar_dim}-dim collar"
                )
            i, exp = by_axis[t.axis]
            rel = t.nu - exp
            if rel < -1e-12:
                raise NotRepresentableError(
                    f"term r^{t.nu:g} d/d(axis {t.axis}) is not a nu >= 0 multiple "
                    f"of the frame field r^{exp:g} d/d(axis {t.axis})"
                )
            out[i].append((t.coeff, max(rel, 0.0)))
        return out


def structure_constants(s: LieStructure) -> np.ndarray:
    """Bracket table of the frame evaluated at r = 0: [e_i, e_j] = c[i,j,k] e_k."""
    frame = s.frame_vector_fields()
    n = len(frame)
    c = np.zeros((n, n, n))
    for i, j in itertools.product(range(n), repeat=2):
        expansion = s.expand_in_frame(bracket(frame[i], frame[j]))
        for k, terms in enumerate(expansion):
            for coeff, nu in terms:
                if _nu_key(nu) == 0.0:
                    if abs(coeff.imag) > 0:
                        raise FredholmKitError("frame brackets must be real")
                    c[i, j, k] += coeff.real
    return c


@dataclass(frozen=True)
class IsotropyDescriptor:
    """The boundary isotropy Lie algebra of a structure, with its group type.

    structure_constants[i, j, k] is the e_k coefficient of [e_i, e_j] at
    r = 0.  orbit and group_dim describe the boundary orbits: the whole
    boundary component with a 1-dimensional transverse group for b, a
    point with the full collar-dimensional group otherwise.
    """

    structure_constants: np.ndarray
    group_kind: GroupKind
    orbit: str
    group_dim: int
    group: str

    def __post_init__(self):
        c = self.structure_constants
        if not np.array_equal(c, -np.swapaxes(c, 0, 1)):
            raise ValueError("structure constants must be antisymmetric")
        n = c.shape[0]
        # Jacobi: sum_m c[i,j,m] c[m,k,l] + c[j,k,m] c[m,i,l] + c[k,i,m] c[m,j,l] = 0
        for i, j, k in itertools.product(range(n), repeat=3):
            total = (
                np.einsum("m,ml->l", c[i, j], c[:, k])
                + np.einsum("m,ml->l", c[j, k], c[:, i])
                + np.einsum("m,ml->l", c[k, i], c[:, j])
            )
            if np.max(np.abs(total)) > 1e-12:
                raise ValueError("structure constants violate the Jacobi identity")


def isotropy(s: LieStructure) -> IsotropyDescriptor:
    """Isotropy data at a boundary point: bracket table mod r, group type."""
    c = structure_constants(s)
    abelian = not np.any(c)
    group_kind = GroupKind.ABELIAN if abelian else GroupKind.SEMIDIRECT_DILATION
    if s.kind is StructureKind.B:
        orbit, group_dim, group = "boundary component", 1, "R"
    elif s.kind is StructureKind.ZERO:
        orbit, group_dim, group = "point", s.collar_dim, "T(dM) x| R (dilations)"
    else:
        orbit, group_dim, group = "point", s.collar_dim, "T(dM) x R"
    return IsotropyDescriptor(c, group_kind, orbit, group_dim, group)


def compatible_metric(s: LieStructure, r: float) -> np.ndarray:
    """Gram matrix of the coordinate fields (d/dr, d/dy_j) at radius r > 0,
    in the inner product that declares the frame orthonormal."""
    if r <= 0:
        raise ValueError("compatible metrics are defined for r > 0 only")
    a, c = s.radial_exponent, s.cross_exponent
    diag = [float(r) ** (-2 * a)] + [float(r) ** (-2 * c)] * s.cross_dim
    return np.diag(diag)
