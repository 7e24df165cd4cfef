"""Independent numerical verification of the symbolic verdicts.

Nothing here shares machinery with the decision engine: roots are
re-found by argument-principle contour counting instead of companion
matrices, line verdicts are confirmed by scanning smallest singular
values of the indicial family on the tested line, and zero-structure
limit operators are sampled on a truncated half-space in log coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._util import parallel_map, round12
from .crosssec import spectrum
from .liestruct import FredholmKitError, StructureKind
from .limitops import IndicialFamily, LimitOperator, indicial_family, normal_operator
from .opalg import BoundaryOperator, _is_matrix

_YES_FLOOR = 1e-4   # scan minima above this confirm "yes"
_NO_CEILING = 1e-6  # scan minima below this confirm "no"


# ---------------------------------------------------------------------------
# scan results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    """Sampled smallest singular values over a parameter grid, with a
    resolution ladder; the global minimum is monotone under refinement
    because refined grids contain the coarse samples."""

    points: tuple
    min_singular: tuple[float, ...]
    global_min: float
    argmin: object
    ladder: tuple[dict, ...]
    caveat: str | None = None

    def __post_init__(self):
        if any(v < 0 for v in self.min_singular):
            raise ValueError("singular values are nonnegative")
        if self.min_singular and not math.isclose(
                self.global_min, min(self.min_singular), rel_tol=0, abs_tol=0):
            raise ValueError("global_min must be the minimum of the samples")

    def argmin_label(self) -> str:
        if isinstance(self.argmin, (tuple, list)):
            return ";".join(f"{x}" for x in self.argmin)
        return f"{self.argmin}"

    def as_dict(self) -> dict:
        d = {
            "global_min": round12(self.global_min),
            "argmin": self.argmin_label(),
            "ladder": list(self.ladder),
            "samples": len(self.min_singular),
        }
        if self.caveat:
            d["caveat"] = self.caveat
        return d

    def to_csv(self) -> str:
        lines = ["point,minSingular"]
        for p, v in zip(self.points, self.min_singular):
            if isinstance(p, (tuple, list)):
                label = ";".join(f"{x:.12g}" if isinstance(x, float) else f"{x}" for x in p)
            elif isinstance(p, float):
                label = f"{p:.12g}"
            else:
                label = f"{p}"
            lines.append(f"{label},{v:.12g}")

        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())


# ---------------------------------------------------------------------------
# weight-line scans
# ---------------------------------------------------------------------------


def _family_min_singular(f: IndicialFamily, taus: np.ndarray) -> np.ndarray:
    """min over modes of the smallest singular value at each complex tau."""
    out = np.full(taus.shape, np.inf)
    for ch in f.channels:
        coeffs = f.polys[ch.label]
        if f.system_size == 1:
            vals = np.polynomial.polynomial.polyval(taus, coeffs[:, 0, 0])
            out = np.minimum(out, np.abs(vals))
        else:
            for i, tau in enumerate(taus):
                m = IndicialFamily._eval_matrix(coeffs, complex(tau))
                out[i] = min(out[i], float(np.linalg.svd(m, compute_uv=False)[-1]))
    return out


def scan_line(f: IndicialFamily, delta: float, trange=(-10.0, 10.0),
              pts: int = 2001, refinements: int = 2) -> ScanResult:
    """Evaluate the family along tau - i delta on nested grids over trange."""
    if pts < 2:
        raise ValueError("need at least two scan points")
    a, b = float(trange[0]), float(trange[1])
    if not b > a:
        raise ValueError("scan range must be nondegenerate")
    ladder = []
    npts = pts
    grid = vals = None
    for _ in range(refinements + 1):
        grid = np.linspace(a, b, npts)
        vals = _family_min_singular(f, grid - 1j * delta)
        i = int(np.argmin(vals))
        ladder.append({"points": npts, "global_min": round12(float(vals[i])),
                       "argmin_tau": round12(float(grid[i]))})
        npts = 2 * npts - 1  # nested refinement keeps previous samples
    i = int(np.argmin(vals))
    return ScanResult(tuple(float(t) for t in grid),
                      tuple(float(v) for v in vals),
                      float(vals[i]), float(grid[i]), tuple(ladder))


# ---------------------------------------------------------------------------
# argument-principle root finding
# ---------------------------------------------------------------------------


class _ContourError(Exception):
    pass


_UNIT_SEGMENTS = {n: np.linspace(0.0, 1.0, n, endpoint=False)
                  for n in (64, 256, 1024, 4096)}


def _winding_count(coeffs: np.ndarray, x0, x1, y0, y1) -> int:
    """Zeros of the polynomial inside the rectangle, counted with
    multiplicity via the boundary winding number."""
    for n_side in (64, 256, 1024, 4096):
        corners = [x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1]
        unit = _UNIT_SEGMENTS[n_side]
        pts = []
        for a, b in zip(corners, corners[1:] + corners[:1]):
            pts.append(a + (b - a) * unit)
        path = np.concatenate(pts + [pts[0][:1]])
        vals = np.polynomial.polynomial.polyval(path, coeffs)
        absvals = np.abs(vals)
        scale = float(np.max(absvals))
        if scale == 0 or float(np.min(absvals)) < 1e-12 * scale:
            continue  # a zero sits on (or hugs) the contour
        if n_side < 4096 and float(np.min(absvals)) < 1e-6 * float(np.median(absvals)):
            continue  # a zero hugs the contour; coarse steps can hop over it
        dargs = np.angle(vals[1:] / vals[:-1])
        if np.max(np.abs(dargs)) > 1.8:
            continue  # phase steps too coarse to trust
        total = float(np.sum(dargs)) / (2 * np.pi)
        k = round(total)
        if abs(total - k) > 0.25:
            continue
        return int(k)
    raise _ContourError


_SPLIT_FRACTIONS = (0.5, 0.53, 0.461, 0.55, 0.437, 0.519)


def _subdivide(coeffs, x0, x1, y0, y1, count, coarse_tol, fine_tol, out, depth=0):
    """Quadtree refinement; single-root boxes stop at coarse_tol (they get
    Newton-polished later), clusters are driven down to fine_tol."""
    if count <= 0:
        return
    tol = coarse_tol if count == 1 else fine_tol
    if max(x1 - x0, y1 - y0) < tol or depth > 80:
        z = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        out.append((z, count, max(x1 - x0, y1 - y0)))
        return
    for frac in _SPLIT_FRACTIONS:
        xm = x0 + frac * (x1 - x0)
        ym = y0 + frac * (y1 - y0)
        boxes = [(x0, xm, y0, ym), (xm, x1, y0, ym),
                 (x0, xm, ym, y1), (xm, x1, ym, y1)]
        try:
            counts = [_winding_count(coeffs, *b) for b in boxes]
        except _ContourError:
            continue
        if sum(counts) != count:
            continue
        for b, c in zip(boxes, counts):
            _subdivide(coeffs, *b, c, coarse_tol, fine_tol, out, depth + 1)
        return
    # every split line kept hitting a zero; report the box center
    z = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    out.append((z, count, max(x1 - x0, y1 - y0)))


def brute_roots(coeffs, tol: float = 1e-9) -> list[tuple[complex, int, float]]:
    """Polynomial roots by argument-principle counting on rectangles with
    bisection refinement, independent of the companion-matrix path.

    Returns (root, multiplicity, residual |p(root)|) triples.
    """
    coeffs = np.asarray(coeffs, dtype=complex).ravel()
    n = coeffs.shape[0]
    while n > 1 and coeffs[n - 1] == 0:
        n -= 1
    coeffs = coeffs[:n]
    if n == 1:
        return []
    lead = abs(coeffs[-1])
    if lead < 1e-14:
        raise FredholmKitError("leading coefficient below 1e-14; normalize first")
    radius = 1.0 + float(np.max(np.abs(coeffs[:-1]))) / lead
    degree = n - 1
    cscale = float(np.max(np.abs(coeffs)))
    deriv = np.polynomial.polynomial.polyder(coeffs)

    def polish(z, box_size):
        # Newton from the box center; reject escapes from the box
        seed = z
        for _ in range(12):
            dp = np.polynomial.polynomial.polyval(z, deriv)
            if dp == 0:
                break
            step = np.polynomial.polynomial.polyval(z, coeffs) / dp
            z = z - step
            if abs(z - seed) > 4 * box_size + 1e-12:
                return None
            if abs(step) < 1e-15 * max(1.0, abs(z)):
                break
        return z

    for attempt in range(6):
        r = radius * (1.05 + 0.08 * attempt)
        # a shifted box keeps split lines off the axes, where indicial
        # roots (real-coefficient polynomials in z) naturally sit
        sx = 0.0173 * radius * (attempt + 1)
        sy = 0.0101 * radius * (attempt + 1)
        box = (-r + sx, r + sx, -r + sy, r + sy)
        try:
            total = _winding_count(coeffs, *box)
        except _ContourError:
            continue
        if total != degree:
            continue
        coarse = max(2e-3 * radius, tol)
        out: list[tuple[complex, int, float]] = []
        _subdivide(coeffs, *box, total, coarse, tol, out)
        results = []
        ok = True
        for z, mult, size in sorted(out, key=lambda t: (t[0].real, t[0].imag)):
            if mult == 1 and size > tol:
                polished = polish(z, size)
                if polished is None:
                    # Newton escaped; isolate this root the slow way
                    half = 2 * size
                    deep: list[tuple[complex, int, float]] = []
                    try:
                        sub = _winding_count(coeffs, z.real - half, z.real + half,
                                             z.imag - half, z.imag + half)
                        _subdivide(coeffs, z.real - half, z.real + half,
                                   z.imag - half, z.imag + half, sub, tol, tol, deep)
                    except _ContourError:
                        ok = False
                        break
                    if len(deep) != 1 or deep[0][1] != 1:
                        ok = False
                        break
                    z = deep[0][0]
                else:
                    z = polished
            elif mult == 1:
                polished = polish(z, max(size, tol))
                if polished is not None:
                    z = polished
            residual = abs(np.polynomial.polynomial.polyval(z, coeffs))
            if residual > 1e-6 * cscale * max(1.0, abs(z)) ** degree:
                ok = False  # a give-up box slipped through; re-seed the tree
                break
            results.append((z, mult, float(residual)))
        if ok:
            return results
    raise FredholmKitError("contour counting failed to stabilize")


# ---------------------------------------------------------------------------
# zero-structure half-space sampling
# ---------------------------------------------------------------------------


def _chebyshev_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev collocation differentiation matrix on [-1, 1], n+1 nodes."""
    if n < 2:
        raise ValueError("need at least 3 collocation nodes")
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.ones(n + 1)
    c[0] = c[n] = 2.0
    c = c * (-1.0) ** np.arange(n + 1)
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n + 1))
    d = d - np.diag(d.sum(axis=1))
    return d, x


def _halfspace_matrix(frozen: BoundaryOperator, eta: np.ndarray,
                      T: float, n: int) -> np.ndarray:
    """Spectral discretization of the frozen zero-frame operator at
    tangential frequency eta, on sigma = log s in [-T, T] with Dirichlet
    truncation."""
    d, x = _chebyshev_matrix(n)
    d = d / T
    sigma = T * x
    k = frozen.system_size
    size = n + 1
    spatial_total = np.zeros((k * size, k * size), dtype=complex)
    eta2 = float(np.dot(eta, eta))
    es = np.exp(sigma)
    for mi, co in frozen.terms:
        mat = np.eye(size, dtype=complex)
        for _ in range(mi.radial):
            mat = d @ mat
        tangential = 1.0 + 0j
        diag = np.ones(size, dtype=complex)
        for j, p in enumerate(mi.cross):
            if p:
                diag = diag * (1j * es * eta[j]) ** p
        if mi.laplacian:
            diag = diag * (-(es ** 2) * eta2) ** mi.laplacian
        mat = mat @ np.diag(diag)
        for ct in co.terms:
            if ct.lam_degree:
                raise FredholmKitError(
                    "mode-diagonal coefficient polynomials cannot be frozen "
                    "onto the half-space model")
            value = ct.value if _is_matrix(ct.value) else np.array([[ct.value]])
            if value.shape[0] != k:
                value = value[0, 0] * np.eye(k)
            spatial_total += np.kron(value, mat)
    keep = [b * size + i for b in range(k) for i in range(1, size - 1)]
    return spatial_total[np.ix_(keep, keep)]


def half_space_sample(lim: LimitOperator, truncations=((4.0, 48), (6.0, 72), (8.0, 96)),
                      eta_samples=(0.0, 0.5, 1.0, 2.0)) -> ScanResult:
    """Smallest singular values of the frozen half-space operator across
    window sizes and tangential frequencies.

    The discretization lives on the flat L2 of the log coordinates (the
    window is truncated with Dirichlet ends), so the numbers are evidence
    about the model operator, not a theorem-grade invertibility test; the
    caveat flag says so.
    """
    if lim.structure_kind is not StructureKind.ZERO or lim.half_space is None:
        raise FredholmKitError("half-space sampling applies to zero-structure "
                               "limit operators")
    frozen = lim.half_space
    dcross = frozen.cross_section.coordinate_count
    vectors: list[np.ndarray] = []
    for magnitude in eta_samples:
        if dcross == 0:
            vectors.append(np.array([float(magnitude)]))
        else:
            v = np.zeros(dcross)
            v[0] = magnitude
            vectors.append(v)
            if dcross >= 2 and magnitude:
                vectors.append(np.full(dcross, float(magnitude) / math.sqrt(dcross)))
    points = []
    mins = []
    ladder = []
    for T, n in truncations:
        local = []
        for eta in vectors:
            a = _halfspace_matrix(frozen, eta, float(T), int(n))
            smin = float(scipy.linalg.svdvals(a)[-1])
            points.append((float(T), int(n), tuple(round12(float(x)) for x in eta)))
            mins.append(smin)
            local.append(smin)
        ladder.append({"T": float(T), "n": int(n),
                       "global_min": round12(min(local))})
    i = int(np.argmin(mins))
    return ScanResult(tuple(points), tuple(mins), float(mins[i]), points[i],
                      tuple(ladder),
                      caveat="half-space truncation on flat log-coordinate L2; "
                             "numerical evidence only")


# ---------------------------------------------------------------------------
# the cross-check ledger
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LedgerEntry:
    name: str
    status: str  # pass | fail | inconclusive | skipped
    detail: str

    def as_dict(self):
        return {"name": self.name, "status": self.status, "detail": self.detail}


@dataclass(frozen=True)
class CheckLedger:
    entries: tuple[LedgerEntry, ...]
    scans: dict

    @property
    def passed(self) -> bool:
        return all(e.status != "fail" for e in self.entries)

    def first_failure(self) -> LedgerEntry | None:
        for e in self.entries:
            if e.status == "fail":
                return e
        return None

    def as_dict(self):
        return {"passed": self.passed,
                "entries": [e.as_dict() for e in self.entries]}

    def __str__(self):
        lines = [f"[{e.status:>12}] {e.name}: {e.detail}" for e in self.entries]
        lines.append(f"oracle ledger: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _match_roots(mode: str, brute, reported, tol=1e-7):
    """Match brute-force roots against reported roots for one mode, both
    directions, with multiplicities."""
    brute = list(brute)
    reported = [r for r in reported if r.mode == mode]
    problems = []
    used = [False] * len(reported)
    for z, mult, residual in brute:
        hit = None
        for i, r in enumerate(reported):
            if not used[i] and abs(r.tau - z) <= tol * max(1.0, abs(z)):
                hit = i
                break
        if hit is None:
            problems.append(f"brute root tau={z:.9g} (x{mult}) missing from report")
            continue
        used[hit] = True
        if reported[hit].multiplicity != mult:
            problems.append(
                f"multiplicity mismatch at tau={z:.9g}: "
                f"report {reported[hit].multiplicity} vs contour {mult}")
    for i, r in enumerate(reported):
        if not used[i]:
            problems.append(f"reported root tau={r.tau:.9g} not re-found by contours")
    return problems


def cross_check(p: BoundaryOperator, report, opts=None) -> CheckLedger:
    """Re-derive every verdict in a report with independent machinery:
    contour-counted roots, line scans for yes/no verdicts, symbol
    re-evaluation at witnesses.  Any mismatch fails the ledger with the
    first discrepancy spelled out.
    """
    from .fredholm import FredholmOptions, sc_invertible
    from .limitops import full_symbol, freeze_coefficients

    opts = opts or FredholmOptions()
    entries: list[LedgerEntry] = []
    scans: dict[str, ScanResult] = {}
    kind = p.structure.kind
    delta = report.delta

    if kind is StructureKind.B:
        cutoff = float(report.cutoffs.get("mode_cutoff", 0) or 0)
        if cutoff <= 0:
            entries.append(LedgerEntry("setup", "fail",
                                       "report carries no mode cutoff"))
            return CheckLedger(tuple(entries), scans)
        table = spectrum(p.cross_section, cutoff)
        fam = indicial_family(normal_operator(p), table)

        def check_mode(ch):
            det = fam.det_poly(ch.label)
            scale = float(np.max(np.abs(det)))
            if scale == 0:
                return LedgerEntry(f"roots[{ch.label}]", "fail",
                                   "identically zero mode polynomial")
            try:
                found = brute_roots(det / scale)
            except FredholmKitError as e:
                return LedgerEntry(f"roots[{ch.label}]", "fail", str(e))
            problems = _match_roots(ch.label, found, report.roots)
            if problems:
                return LedgerEntry(f"roots[{ch.label}]", "fail", problems[0])
            return LedgerEntry(f"roots[{ch.label}]", "pass",
                               f"{sum(m for _, m, _ in found)} roots re-found by contours")

        entries.extend(parallel_map(check_mode, fam.channels))

        line = next((lv for lv in report.limit_verdicts
                     if lv.mechanism.startswith("b normal")), None)
        if line is not None:
            scan = scan_line(fam, delta, opts.tau_range, opts.pts)
            scans["line"] = scan
            if line.status == "yes":
                if scan.global_min > _YES_FLOOR:
                    entries.append(LedgerEntry(
                        "line-verdict", "pass",
                        f"scan min {scan.global_min:.3e} above {_YES_FLOOR:g}"))
                elif scan.global_min < _NO_CEILING:
                    entries.append(LedgerEntry(
                        "line-verdict", "fail",
                        f"'yes' verdict but scan dips to {scan.global_min:.3e} "
                        f"at tau={scan.argmin:.6g}"))
                else:
                    entries.append(LedgerEntry(
                        "line-verdict", "inconclusive",
                        f"scan min {scan.global_min:.3e} in the gray zone"))
            elif line.status in ("no", "borderline"):
                tau_w = complex(line.witness["tau"][0], line.witness["tau"][1]) \
                    if line.witness else 0.0
                local = scan_line(fam, delta,
                                  (tau_w.real - 0.02, tau_w.real + 0.02), 801,
                                  refinements=1)
                scans["line-local"] = local
                if local.global_min < _NO_CEILING:
                    entries.append(LedgerEntry(
                        "line-verdict", "pass",
                        f"witness confirmed: local scan min {local.global_min:.3e}"))
                else:
                    entries.append(LedgerEntry(
                        "line-verdict", "fail",
                        f"'{line.status}' verdict but no scan point near the "
                        f"witness drops below {_NO_CEILING:g} "
                        f"(local min {local.global_min:.3e})"))
    elif kind in (StructureKind.SC, StructureKind.C_GAMMA):
        sym = full_symbol(freeze_coefficients(p))
        lv = report.limit_verdicts[0] if report.limit_verdicts else None
        if lv is None:
            entries.append(LedgerEntry("symbol", "fail", "no limit verdict recorded"))
        else:
            redo = sc_invertible(sym, threshold=opts.sc_threshold, zooms=4)
            reported_status = lv.status
            if reported_status == "numerical-evidence":
                reported_status = lv.detail.get("status", reported_status)
            if redo.status == reported_status:
                entries.append(LedgerEntry(
                    "symbol", "pass",
                    f"independent rescan agrees: {redo.status} "
                    f"(min |det| {redo.min_abs_det:.3e})"))
            else:
                entries.append(LedgerEntry(
                    "symbol", "fail",
                    f"rescan says {redo.status}, report says {reported_status}"))
            if lv.witness and redo.witness is not None:
                v = abs(sym.det_at(redo.witness[0], redo.witness[1:]))
                status = "pass" if v < _NO_CEILING else "fail"
                entries.append(LedgerEntry(
                    "symbol-witness", status,
                    f"|det| at witness = {v:.3e}"))
    elif kind is StructureKind.ZERO:
        entries.append(LedgerEntry(
            "half-space", "skipped",
            "zero-structure verdicts are numerical evidence only; nothing "
            "sharper to check against"))
    if report.verdict == "Fredholm" and not report.elliptic.elliptic:
        entries.append(LedgerEntry("ellipticity", "fail",
                                   "Fredholm verdict without ellipticity"))
    return CheckLedger(tuple(entries), scans)
