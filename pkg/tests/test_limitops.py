"""Normal operators, indicial families, and limit operators per structure."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from fredholm_kit import (
    Coefficient,
    CrossSection,
    FredholmKitError,
    LieStructure,
    MultiIndex,
    StructureKind,
    compose,
    conjugate,
    freeze_coefficients,
    indicial_family,
    indicial_roots,
    limit_operator,
    make_model,
    make_operator,
    normal_operator,
    spectrum,
)
from conftest import random_b_operator

B1 = LieStructure.b(1)
CIRCLE = CrossSection.circle()


def poly_of(p, cutoff, label):
    table = spectrum(p.cross_section, cutoff)
    fam = indicial_family(normal_operator(p), table)
    return fam, fam.poly(label)[:, 0, 0]


# ---------------------------------------------------------------------------
# coefficient freezing
# ---------------------------------------------------------------------------


def test_normal_drops_decaying_potential():
    s = make_model("spherical_schrodinger", n=3, Z=1.0)
    n = normal_operator(s)
    assert MultiIndex(0) not in dict(n.base.terms)
    assert dict(n.base.terms)[MultiIndex(1)] == Coefficient.constant(1.0)


def test_normal_of_polar_is_itself():
    p = make_model("polar_laplacian")
    assert normal_operator(p).base == p


def test_normal_drops_scaled_partial():
    p = make_operator(B1, CIRCLE, {
        MultiIndex(2): 1.0,
        MultiIndex(0, (1,), 0): Coefficient.monomial(1.0, 1.0),
    })
    assert normal_operator(p).base == make_operator(B1, CIRCLE, {MultiIndex(2): 1.0})


def test_normal_rejects_zero_and_sc_frames():
    with pytest.raises(FredholmKitError):
        normal_operator(make_model("hyperbolic_laplacian"))
    with pytest.raises(FredholmKitError):
        normal_operator(make_model("sc_laplacian", cross_dim=1))


def test_freeze_rejects_fully_decaying_operator():
    p = make_operator(B1, CIRCLE, {MultiIndex(2): Coefficient.monomial(1.0, 1.0)})
    with pytest.raises(FredholmKitError):
        freeze_coefficients(p)


# ---------------------------------------------------------------------------
# indicial families
# ---------------------------------------------------------------------------


def test_family_polar_modes():
    _, c0 = poly_of(make_model("polar_laplacian"), 4.5, "k=0")
    assert np.array_equal(c0, np.array([0, 0, -1], dtype=complex))
    _, c2 = poly_of(make_model("polar_laplacian"), 4.5, "k=2")
    assert np.array_equal(c2, np.array([-4, 0, -1], dtype=complex))


def test_family_spherical_mode():
    _, c = poly_of(make_model("spherical_schrodinger", n=3, Z=5.0), 6.5, "l=2")
    # -tau^2 + i tau - l(l+1), independent of Z
    assert np.array_equal(c, np.array([-6, 1j, -1], dtype=complex))


def test_family_black_scholes():
    _, c = poly_of(make_model("black_scholes", sigma=1.0, rate=0.25), 1.0, "mode0")
    assert np.array_equal(c, np.array([-0.25, (0.25 - 0.5) * 1j, -0.5], dtype=complex))


def test_family_records_cutoff_and_channels():
    p = make_model("polar_laplacian")
    table = spectrum(CIRCLE, 10.0)
    fam = indicial_family(normal_operator(p), table)
    assert fam.source_cutoff == 10.0
    assert fam.labels() == ("k=0", "k=1", "k=2", "k=3")


# ---------------------------------------------------------------------------
# homomorphism and covariance properties
# ---------------------------------------------------------------------------


def _family_product(fa, fb, label):
    a, b = fa.poly(label), fb.poly(label)
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1], a.shape[2]),
                   dtype=complex)
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            out[i + j] += a[i] @ b[j]
    return out


@settings(deadline=None, max_examples=20)
@given(st.integers(0, 10_000))
def test_family_multiplicative_under_compose(seed):
    rng = np.random.default_rng(seed)
    p, q = random_b_operator(rng), random_b_operator(rng)
    table = spectrum(CIRCLE, 4.5)
    fp = indicial_family(normal_operator(p), table)
    fq = indicial_family(normal_operator(q), table)
    fpq = indicial_family(normal_operator(compose(p, q)), table)
    for label in fpq.labels():
        assert np.array_equal(fpq.poly(label), _family_product(fp, fq, label))


@settings(deadline=None, max_examples=20)
@given(st.integers(0, 10_000))
def test_normal_operator_is_algebra_homomorphism(seed):
    rng = np.random.default_rng(seed)
    p, q = random_b_operator(rng), random_b_operator(rng)
    lhs = normal_operator(compose(p, q)).base
    rhs = compose(normal_operator(p).base, normal_operator(q).base)
    assert lhs == rhs


@pytest.mark.parametrize("delta", [-0.5, 0.3, 1.0])
def test_conjugation_covariance_exact(delta):
    for p in (make_model("polar_laplacian"),
              make_model("spherical_schrodinger", n=3, Z=1.0),
              make_model("black_scholes", sigma=1.0, rate=0.0)):
        table = spectrum(p.cross_section, 12.0)
        lhs = indicial_family(normal_operator(conjugate(p, delta)), table)
        rhs = indicial_family(normal_operator(p), table).shifted(delta)
        for label in lhs.labels():
            assert np.array_equal(lhs.poly(label), rhs.poly(label))


def test_real_coefficient_roots_conjugate_closed():
    p = make_model("spherical_schrodinger", n=3, Z=1.0)
    table = spectrum(p.cross_section, 20.0)
    fam = indicial_family(normal_operator(p), table)
    roots = indicial_roots(fam)
    zs = [r.mellin for r in roots]
    for z in zs:
        assert any(abs(np.conj(z) - w) < 1e-7 for w in zs)


# ---------------------------------------------------------------------------
# limit operators by structure
# ---------------------------------------------------------------------------


def test_limit_operator_b_is_normal_operator():
    p = make_model("polar_laplacian")
    lim = limit_operator(p)
    assert lim.structure_kind is StructureKind.B
    assert lim.orbit == "boundary:0"
    assert lim.normal.base == p
    assert lim.symbol is None and lim.half_space is None


def test_limit_operator_sc_full_symbol():
    p = make_model("sc_laplacian", cross_dim=2, shift=3.0)
    lim = limit_operator(p, point="north")
    assert lim.orbit == "point:north"
    sym = lim.symbol
    assert sym.eval(1.0, (0.0,)) == pytest.approx(-1.0 + 3.0)
    assert sym.eval(1.0, (2.0,)) == pytest.approx(-1.0 - 4.0 + 3.0)
    assert sym.eval(0.0, (0.0,)) == pytest.approx(3.0)


def test_limit_operator_zero_freezes_in_halfspace_frame():
    z = LieStructure.zero(1)
    tor = CrossSection.torus(1)
    p = make_operator(z, tor, {
        MultiIndex(2): 1.0,
        MultiIndex(0, (), 1): 1.0,
        MultiIndex(1): Coefficient.monomial(1.0, 7.0),  # decays at the boundary
    })
    lim = limit_operator(p, point="p")
    assert lim.structure_kind is StructureKind.ZERO
    expected = make_operator(z, tor, {MultiIndex(2): 1.0, MultiIndex(0, (), 1): 1.0})
    assert lim.half_space == expected


def test_limit_operator_cgamma_warns():
    p = make_model("cgamma_schrodinger", n=3, gamma=2.0, V0=1.0)
    lim = limit_operator(p)
    assert lim.structure_kind is StructureKind.C_GAMMA
    assert lim.warning is not None
    assert lim.symbol is not None


def test_sc_symbol_rejects_mode_diagonal_coefficients():
    sc = LieStructure.sc(1)
    p = make_operator(sc, CIRCLE, {
        MultiIndex(2): 1.0,
        MultiIndex(0): Coefficient.laplacian_poly([0.0, 1.0]),
    })
    with pytest.raises(FredholmKitError):
        limit_operator(p)
