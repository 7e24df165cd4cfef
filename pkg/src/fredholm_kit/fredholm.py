"""Fredholm decision engine: ellipticity plus invertibility of every limit
operator, with indicial roots, weight-line tests, and safe weight windows.

Weight convention: delta is the exponent in r^delta times the base scale,
and the tested line is Im(tau) = -delta, equivalently Re(z) = delta for
the Mellin variable z = i tau.  This is pinned by the exact identity
r^(-delta) (r d/dr) r^delta = r d/dr + delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import parallel_map, round12
from .crosssec import spectrum
from .liestruct import FredholmKitError, StructureKind
from .limitops import (
    IndicialFamily,
    LimitOperator,
    NormalOperator,
    ScSymbol,
    indicial_family,
    limit_operator,
    normal_operator,
)
from .opalg import (
    BoundaryOperator,
    EllipticityResult,
    _is_matrix,
    default_mode_cutoff,
    is_elliptic,
    symbol_min_singular,
    unit_covectors,
)

_ROOT_CLUSTER_TOL = 1e-7
_ROOT_RESIDUAL_TOL = 1e-9
_ON_LINE_TOL = 1e-12
_BORDERLINE_TOL = 1e-8

VERDICT_FREDHOLM = "Fredholm"
VERDICT_NOT = "NotFredholm"
VERDICT_UNDECIDED = "Undecided"

WEIGHT_CONVENTION = "line Re(z) = delta"


@dataclass(frozen=True)
class IndicialRoot:
    """A zero of the per-mode determinant polynomial, in both the Fourier
    variable tau and the Mellin variable z = i tau."""

    mode: str
    tau: complex
    mellin: complex
    multiplicity: int

    def as_dict(self):
        return {
            "mode": self.mode,
            "tau": [round12(self.tau.real), round12(self.tau.imag)],
            "mellin": [round12(self.mellin.real), round12(self.mellin.imag)],
            "multiplicity": self.multiplicity,
        }


def _trim_poly(coeffs: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    n = coeffs.shape[0]
    while n > 1 and abs(coeffs[n - 1]) <= 1e-12 * scale:
        n -= 1
    return coeffs[:n]


def _cluster_roots(roots: np.ndarray) -> list[tuple[complex, int]]:
    clusters: list[list[complex]] = []
    for r in sorted(roots, key=lambda z: (z.real, z.imag)):
        placed = False
        for c in clusters:
            center = sum(c) / len(c)
            if abs(r - center) <= _ROOT_CLUSTER_TOL * max(1.0, abs(center)):
                c.append(r)
                placed = True
                break
        if not placed:
            clusters.append([r])
    return [(sum(c) / len(c), len(c)) for c in clusters]


def indicial_roots(f: IndicialFamily) -> list[IndicialRoot]:
    """All tau roots of the per-mode determinant polynomials, with
    multiplicities from clustering companion-matrix eigenvalues."""

    def mode_roots(ch):
        det = _trim_poly(f.det_poly(ch.label))
        if det.shape[0] == 1:
            if det[0] == 0:
                raise FredholmKitError(
                    f"indicial polynomial of mode {ch.label} is identically zero")
            return []
        if not np.any(det):
            raise FredholmKitError(
                f"indicial polynomial of mode {ch.label} is identically zero")
        raw = np.polynomial.polynomial.polyroots(det)
        scale = float(np.max(np.abs(det)))
        deg = det.shape[0] - 1
        out = []
        for tau, mult in _cluster_roots(raw):
            residual = abs(np.polynomial.polynomial.polyval(tau, det))
            bound = _ROOT_RESIDUAL_TOL * scale * max(1.0, abs(tau)) ** deg
            if mult == 1 and residual > bound:
                raise FredholmKitError(
                    f"root refinement failed on mode {ch.label}: residual "
                    f"{residual:.2e} exceeds {bound:.2e}")
            out.append(IndicialRoot(ch.label, complex(tau), 1j * complex(tau), mult))
        return out

    roots: list[IndicialRoot] = []
    for chunk in parallel_map(mode_roots, f.channels):
        roots.extend(chunk)
    roots.sort(key=lambda r: (r.mellin.real, r.mellin.imag, r.mode))
    return roots


@dataclass(frozen=True)
class LineVerdict:
    status: str  # yes | no | borderline
    distance: float
    witness: IndicialRoot | None

    def as_dict(self):
        return {
            "status": self.status,
            "distance_to_line": round12(self.distance),
            "witness": self.witness.as_dict() if self.witness else None,
        }


def normal_invertible(f: IndicialFamily, delta: float,
                      roots: list[IndicialRoot] | None = None) -> LineVerdict:
    """Invertibility of the normal operator on the weight-delta line: yes
    iff no indicial root satisfies Re(z) = delta.  Roots within 1e-8 of
    the line are reported as borderline rather than guessed."""
    if roots is None:
        roots = indicial_roots(f)
    if not roots:
        return LineVerdict("yes", math.inf, None)
    best = min(roots, key=lambda r: abs(r.mellin.real - delta))
    dist = abs(best.mellin.real - delta)
    if dist <= _ON_LINE_TOL * max(1.0, abs(best.tau)):
        return LineVerdict("no", dist, best)
    if dist <= _BORDERLINE_TOL:
        return LineVerdict("borderline", dist, best)
    return LineVerdict("yes", dist, None)


# ---------------------------------------------------------------------------
# quantitative mode-tail certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailBound:
    """Leading-term domination bound for modes above the cutoff.

    With s^2 = tau^2 + lambda, the shifted mode polynomial satisfies
    sigma_min >= mu0 * s^m - sum_d B_d * s^d, so every mode with
    lambda > s0^2 is invertible on the tested line.
    """

    mu0: float
    order: int
    envelope: tuple[tuple[int, float], ...]
    s0: float
    lambda_certified: float
    n_dir: int

    def as_dict(self):
        return {
            "mu0": round12(self.mu0),
            "order": self.order,
            "envelope": [[d, round12(w)] for d, w in self.envelope],
            "s0": round12(self.s0),
            "lambda_certified": round12(self.lambda_certified),
            "direction_samples": self.n_dir,
        }


def _positive_root(coeffs: np.ndarray) -> float:
    """Largest positive real root of a polynomial whose leading coefficient
    is positive and whose lower coefficients are <= 0 (one sign change)."""
    roots = np.polynomial.polynomial.polyroots(coeffs)
    best = 0.0
    for z in roots:
        if abs(z.imag) <= 1e-9 * (1 + abs(z.real)) and z.real > best:
            best = float(z.real)
    return best


def tail_bound(n: NormalOperator, delta_abs: float, mu0: float | None = None,
               n_dir: int = 720) -> TailBound:
    """Certificate that high modes stay invertible on every line
    |Re z| <= delta_abs, from coefficient norms and the symbol floor."""
    base = n.base
    m = base.order
    if mu0 is None:
        mu0 = symbol_min_singular(base, r=0.0, n_dir=n_dir)
    envelope: dict[int, float] = {}
    for mi, co in base.terms:
        for ct in co.terms:
            q = ct.lam_poly or (1.0 + 0j,)
            vnorm = float(np.linalg.norm(ct.value, 2)) if _is_matrix(ct.value) else abs(ct.value)
            qtop = len(q) - 1
            for i, qi in enumerate(q):
                if qi == 0:
                    continue
                for j in range(mi.radial + 1):
                    d = j + sum(mi.cross) + 2 * mi.laplacian + 2 * i
                    if d == m and j == mi.radial and i == qtop:
                        continue  # this piece is the principal symbol itself
                    w = (vnorm * abs(qi) * math.comb(mi.radial, j)
                         * delta_abs ** (mi.radial - j))
                    envelope[d] = envelope.get(d, 0.0) + w
    if mu0 <= 0:
        return TailBound(mu0, m, tuple(sorted(envelope.items())), math.inf,
                         math.inf, n_dir)
    coeffs = np.zeros(m + 1)
    coeffs[m] = mu0
    for d, w in envelope.items():
        coeffs[d] -= w
    s0 = max(1.0, _positive_root(coeffs) * (1 + 1e-9))
    return TailBound(mu0, m, tuple(sorted(envelope.items())), s0, s0 * s0, n_dir)


def certified_weight_range(n: NormalOperator, cutoff: float,
                           mu0: float | None = None) -> float:
    """Largest W with tail certification for all |delta| <= W at this
    cutoff (monotone in delta, solved by bisection)."""
    if mu0 is None:
        mu0 = symbol_min_singular(n.base, r=0.0)
    if tail_bound(n, 0.0, mu0).lambda_certified > cutoff:
        return 0.0
    lo, hi = 0.0, 1.0
    while tail_bound(n, hi, mu0).lambda_certified <= cutoff and hi < 1e6:
        lo, hi = hi, 2 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail_bound(n, mid, mu0).lambda_certified <= cutoff:
            lo = mid
        else:
            hi = mid
    return lo


def safe_weight_intervals(roots: list[IndicialRoot], lo: float, hi: float,
                          ) -> list[tuple[float, float]]:
    """Maximal open delta intervals inside [lo, hi] avoiding every
    Re(mellin) of the given roots (which must be complete on that range)."""
    if hi <= lo:
        return []
    bad: list[float] = []
    for r in sorted(roots, key=lambda r: r.mellin.real):
        x = r.mellin.real
        if x < lo - 1e-12 or x > hi + 1e-12:
            continue
        if bad and abs(x - bad[-1]) <= 1e-9:
            continue
        bad.append(x)
    points = [lo] + bad + [hi]
    out = []
    for a, b in zip(points[:-1], points[1:]):
        if b - a > 1e-12:
            out.append((a, b))
    return out


# ---------------------------------------------------------------------------
# sc-type symbol invertibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScVerdict:
    status: str  # yes | no | undecided
    min_abs_det: float
    witness: tuple[float, ...] | None
    radius: float
    resolutions: tuple[tuple[int, float, str], ...]
    threshold: float

    def as_dict(self):
        return {
            "status": self.status,
            "min_abs_det": round12(self.min_abs_det),
            "witness": [round12(x) for x in self.witness] if self.witness else None,
            "search_radius": round12(self.radius),
            "resolutions": [[n, round12(v), s] for n, v, s in self.resolutions],
            "threshold": self.threshold,
        }


def _symbol_principal_floor(sym: ScSymbol, n_dir: int = 720) -> float:
    lo = math.inf
    for xi, eta in unit_covectors(sym.covector_dim, n_dir, sym.magnitude_slot):
        eta_arr = np.atleast_1d(np.asarray(eta, dtype=float))
        eta2 = float(np.dot(eta_arr, eta_arr))
        k = sym.system_size
        total = np.zeros((k, k), dtype=complex)
        for mi, value in sym.terms:
            if mi.total != sym.order:
                continue
            factor = (1j * xi) ** mi.radial * (-eta2) ** mi.laplacian
            for j, p in enumerate(mi.cross):
                if p:
                    factor *= (1j * eta_arr[j]) ** p
            piece = factor * value
            total += piece if _is_matrix(piece) else piece * np.eye(k)
        if k == 1:
            lo = min(lo, abs(complex(total[0, 0])))
        else:
            lo = min(lo, float(np.linalg.svd(total, compute_uv=False)[-1]))
    return lo


def _sc_axes(sym: ScSymbol, radius: float, n_axis: int) -> list[np.ndarray]:
    axes = [np.linspace(-radius, radius, n_axis)]
    for _ in range(sym.covector_dim - 1):
        if sym.magnitude_slot:
            axes.append(np.linspace(0.0, radius, (n_axis + 1) // 2))
        else:
            axes.append(np.linspace(-radius, radius, n_axis))
    return axes


def _sc_eval_grid(sym: ScSymbol, axes: list[np.ndarray]):
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = [m.reshape(-1) for m in mesh]
    npts = flat[0].size
    xi = flat[0]
    etas = flat[1:]
    eta2 = sum(e * e for e in etas) if etas else np.zeros(npts)
    k = sym.system_size
    if k == 1:
        acc = np.zeros(npts, dtype=complex)
    else:
        acc = np.zeros((npts, k, k), dtype=complex)
    for mi, value in sym.terms:
        factor = (1j * xi) ** mi.radial * (-eta2) ** mi.laplacian
        for j, p in enumerate(mi.cross):
            if p:
                factor = factor * (1j * etas[j]) ** p
        if k == 1:
            acc += factor * (value if not _is_matrix(value) else value[0, 0])
        elif _is_matrix(value):
            acc += factor[:, None, None] * value[None, :, :]
        else:
            acc += factor[:, None, None] * (value * np.eye(k))[None, :, :]
    dets = acc if k == 1 else np.linalg.det(acc)
    idx = int(np.argmin(np.abs(dets)))
    point = tuple(float(f[idx]) for f in flat)
    return float(np.min(np.abs(dets))), point


def _sc_scan(sym: ScSymbol, radius: float, n_axis: int, zooms: int):
    axes = _sc_axes(sym, radius, n_axis)
    best, point = _sc_eval_grid(sym, axes)
    width = 2 * radius / max(1, n_axis - 1)
    for _ in range(zooms):
        zoom_axes = []
        for d, x in enumerate(point):
            lo_lim = 0.0 if (sym.magnitude_slot and d > 0) else -radius
            a = max(lo_lim, x - 2 * width)
            b = min(radius, x + 2 * width)
            zoom_axes.append(np.linspace(a, b, 33))
        v, p = _sc_eval_grid(sym, zoom_axes)
        if v < best:
            best, point = v, p
        width = (zoom_axes[0][-1] - zoom_axes[0][0]) / 32
    # polish: a local descent settles grid-marginal minima decisively
    # (the symbol depends on eta only through eta^2 when the slot is a
    # magnitude, so the search needs no bound constraints)
    from scipy.optimize import minimize

    res = minimize(lambda z: abs(sym.det_at(z[0], tuple(z[1:]))),
                   np.array(point), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 400})
    if res.fun < best and np.linalg.norm(res.x) <= radius * (1 + 1e-9):
        best = float(res.fun)
        point = tuple(abs(float(x)) if (sym.magnitude_slot and d > 0) else float(x)
                      for d, x in enumerate(res.x))
    return best, point


def sc_invertible(target: LimitOperator | ScSymbol, threshold: float = 1e-6,
                  n_axis: int | None = None, zooms: int = 3) -> ScVerdict:
    """Invertibility of a constant-coefficient symbol on the abelian
    tangent group: coarse grid within the ellipticity-certified radius,
    local refinement, and verdict stability across two base resolutions."""
    sym = target.symbol if isinstance(target, LimitOperator) else target
    if sym is None:
        raise FredholmKitError("limit operator carries no symbol data")
    k = sym.system_size
    mu0 = _symbol_principal_floor(sym)
    if mu0 <= 1e-12:
        return ScVerdict("undecided", math.nan, None, math.nan, (), threshold)
    thr_sigma = threshold ** (1.0 / k)
    norms = sym.coefficient_norms_by_degree()
    coeffs = np.zeros(sym.order + 1)
    coeffs[sym.order] = mu0
    for d, w in norms.items():
        if d < sym.order:
            coeffs[d] -= w
    coeffs[0] -= thr_sigma
    radius = max(1.0, _positive_root(coeffs) * 1.01)
    if n_axis is None:
        n_axis = {1: 4001, 2: 201, 3: 61}.get(sym.covector_dim, 21)
    resolutions = []
    final = None
    for n in (max(5, (2 * n_axis) // 3) | 1, n_axis | 1):
        v, p = _sc_scan(sym, radius, n, zooms)
        status = "yes" if v > threshold else "no"
        resolutions.append((n, v, status))
        final = (v, p, status)
    statuses = {s for _, _, s in resolutions}
    if len(statuses) > 1:
        return ScVerdict("undecided", final[0], final[1], radius,
                         tuple(resolutions), threshold)
    v, p, status = final
    witness = p if status == "no" else None
    return ScVerdict(status, v, witness, radius, tuple(resolutions), threshold)


# ---------------------------------------------------------------------------
# the decision engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FredholmOptions:
    mode_cutoff: float | None = None
    tau_range: tuple[float, float] = (-10.0, 10.0)
    pts: int = 2001
    empty_boundary: bool = False
    elliptic_threshold: float = 1e-8
    elliptic_grid: tuple[int, int] = (9, 96)
    r_max: float = 1.0
    sc_threshold: float = 1e-6
    halfspace_truncations: tuple[tuple[float, int], ...] = ((4.0, 48), (6.0, 72), (8.0, 96))
    halfspace_eta: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class LimitVerdict:
    orbit: str
    mechanism: str
    status: str  # yes | no | borderline | numerical-evidence
    witness: dict | None
    detail: dict

    def as_dict(self):
        return {
            "orbit": self.orbit,
            "mechanism": self.mechanism,
            "invertible": self.status,
            "witness": self.witness,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class FredholmReport:
    verdict: str
    delta: float
    convention: str
    elliptic: EllipticityResult
    limit_verdicts: tuple[LimitVerdict, ...]
    roots: tuple[IndicialRoot, ...]
    safe_weights: tuple[tuple[float, float], ...]
    cutoffs: dict
    caveats: tuple[str, ...]
    structure_kind: str
    cross_section: str
    operator: str
    system_size: int
    order: int

    def __post_init__(self):
        statuses = [lv.status for lv in self.limit_verdicts]
        if self.verdict == VERDICT_FREDHOLM:
            if not self.elliptic.elliptic or any(s != "yes" for s in statuses):
                raise FredholmKitError("inconsistent Fredholm verdict")
        if self.verdict == VERDICT_UNDECIDED:
            if not any(s in ("numerical-evidence", "borderline") for s in statuses):
                raise FredholmKitError(
                    "Undecided verdicts require borderline or numerical evidence")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "weight": {"delta": round12(self.delta), "convention": self.convention},
            "operator": {
                "structure": self.structure_kind,
                "cross_section": self.cross_section,
                "order": self.order,
                "system_size": self.system_size,
                "display": self.operator,
            },
            "elliptic": self.elliptic.as_dict(),
            "limit_operators": [lv.as_dict() for lv in self.limit_verdicts],
            "indicial_roots": [r.as_dict() for r in self.roots],
            "safe_weight_intervals": [[round12(a), round12(b)] for a, b in self.safe_weights],
            "cutoffs": self.cutoffs,
            "caveats": list(self.caveats),
        }


def _root_witness(v: LineVerdict) -> dict | None:
    if v.witness is None:
        return None
    return v.witness.as_dict()


def fredholm_check(p: BoundaryOperator, delta: float = 0.0,
                   opts: FredholmOptions | None = None) -> FredholmReport:
    """Decide Fredholmness of p on the weight-delta scale: ellipticity
    plus invertibility of all limit operators, dispatched by structure.

    b: exact indicial-root test on the line Re(z) = delta, with a
    quantitative tail certificate above the mode cutoff.  sc: symbol scan
    on the abelian tangent group.  zero and c_gamma: numerical evidence
    only, so the verdict is at best Undecided.
    """
    opts = opts or FredholmOptions()
    delta = float(delta)
    n_r, n_dir = opts.elliptic_grid
    ell = is_elliptic(p, r_max=opts.r_max, n_r=n_r, n_dir=n_dir,
                      threshold=opts.elliptic_threshold)
    caveats = ["verdicts treat the Sobolev order s as irrelevant to "
               "Fredholmness; this convention is surfaced, not tested"]
    if p.symbolic_only:
        caveats.append("operator is flagged symbolic-only: its frame mixes "
                       "scaling types, so verdicts are indicative")
    cutoffs: dict = {}
    roots: tuple[IndicialRoot, ...] = ()
    safe: tuple[tuple[float, float], ...] = ()
    limit_verdicts: list[LimitVerdict] = []

    if opts.empty_boundary:
        verdict = VERDICT_FREDHOLM if ell.elliptic else VERDICT_NOT
        caveats.append("empty boundary: no limit operators; Fredholmness "
                       "reduces to ellipticity")
        return FredholmReport(
            verdict, delta, WEIGHT_CONVENTION, ell, (), (), (), cutoffs,
            tuple(caveats), p.structure.kind.value, str(p.cross_section),
            str(p), p.system_size, p.order)

    kind = p.structure.kind
    if kind in (StructureKind.B,):
        nop = normal_operator(p)
        mu0 = symbol_min_singular(nop.base, r=0.0)
        tb = tail_bound(nop, abs(delta), mu0)
        cutoff = opts.mode_cutoff if opts.mode_cutoff else default_mode_cutoff(p)
        if math.isfinite(tb.lambda_certified):
            cutoff = max(cutoff, tb.lambda_certified * 1.05)
        table = spectrum(p.cross_section, cutoff)
        fam = indicial_family(nop, table)
        roots = tuple(indicial_roots(fam))
        line = normal_invertible(fam, delta, list(roots))
        w_cert = certified_weight_range(nop, cutoff, mu0)
        safe = tuple(safe_weight_intervals(list(roots), -w_cert, w_cert))
        cutoffs = {
            "mode_cutoff": round12(cutoff),
            "tail": tb.as_dict(),
            "certified_weight_range": [round12(-w_cert), round12(w_cert)],
        }
        limit_verdicts.append(LimitVerdict(
            "boundary:0", "b normal operator / indicial roots", line.status,
            _root_witness(line), line.as_dict()))
        if line.status == "borderline":
            caveats.append("an indicial root sits within 1e-8 of the tested "
                           "line; refusing to guess")
    elif kind is StructureKind.SC:
        lim = limit_operator(p)
        sv = sc_invertible(lim, threshold=opts.sc_threshold)
        limit_verdicts.append(LimitVerdict(
            lim.orbit, "sc full symbol on the abelian tangent group",
            sv.status if sv.status != "undecided" else "numerical-evidence",
            {"covector": [round12(x) for x in sv.witness]} if sv.witness else None,
            sv.as_dict()))
        cutoffs = {"sc_search_radius": round12(sv.radius)}
        if sv.status == "undecided":
            caveats.append("sc symbol scan was inconclusive")
    elif kind is StructureKind.ZERO:
        from .numoracle import half_space_sample  # deferred to avoid a cycle
        lim = limit_operator(p)
        scan = half_space_sample(lim, truncations=opts.halfspace_truncations,
                                 eta_samples=opts.halfspace_eta)
        limit_verdicts.append(LimitVerdict(
            lim.orbit, "zero half-space model, sampled min singular values",
            "numerical-evidence",
            {"argmin": scan.argmin_label()},
            scan.as_dict()))
        cutoffs = {"halfspace_truncations": [list(t) for t in opts.halfspace_truncations]}
        caveats.append("zero-structure limit operators live on a "
                       "noncommutative group; min-singular-value samples on "
                       "the flat log-coordinate L2 of the model half-space "
                       "are numerical evidence, not a criterion")
    elif kind is StructureKind.C_GAMMA:
        lim = limit_operator(p)
        sv = sc_invertible(lim, threshold=opts.sc_threshold)
        limit_verdicts.append(LimitVerdict(
            lim.orbit, "c_gamma frozen symbol (abelian isotropy)",
            "numerical-evidence",
            {"covector": [round12(x) for x in sv.witness]} if sv.witness else None,
            sv.as_dict()))
        cutoffs = {"sc_search_radius": round12(sv.radius)}
        caveats.append(lim.warning)
    else:  # pragma: no cover
        raise FredholmKitError(f"unsupported structure kind {kind}")

    if not ell.elliptic:
        verdict = VERDICT_NOT
    else:
        statuses = [lv.status for lv in limit_verdicts]
        if any(s == "no" for s in statuses):
            verdict = VERDICT_NOT
        elif all(s == "yes" for s in statuses):
            verdict = VERDICT_FREDHOLM
        else:
            verdict = VERDICT_UNDECIDED
    return FredholmReport(
        verdict, delta, WEIGHT_CONVENTION, ell, tuple(limit_verdicts),
        roots, safe, cutoffs, tuple(caveats), p.structure.kind.value,
        str(p.cross_section), str(p), p.system_size, p.order)
