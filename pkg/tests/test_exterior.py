"""Exterior algebra laws, Hodge duality, check/hat, and field differentiation."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2frames.exterior import (
    DimensionMismatch,
    FormField,
    JetForm,
    MatrixForm,
    Multivector,
    ScalarField,
    check,
    combos,
    dform,
    hat,
    merge_sign,
)
from g2frames.jets import JetOrderError


def rand_mv(rng, n, k):
    return Multivector(n, k, rng.normal(size=len(combos(n, k))))


# ----------------------------------------------------------------------
# wedge


def test_wedge_basis_case():
    a = Multivector.basis(4, (1, 2))
    assert a.wedge(Multivector.basis(4, (3, 4))).coeff((1, 2, 3, 4)) == 1.0


def test_wedge_duality_square():
    # (e12 + e34)^(e12 + e34) = 2 e1234: the diagonal duality-pairing square
    sd = Multivector.basis(4, (1, 2)) + Multivector.basis(4, (3, 4))
    sq = sd.wedge(sd)
    assert sq.coeff((1, 2, 3, 4)) == pytest.approx(2.0)
    assert (sq - 2.0 * Multivector.basis(4, (1, 2, 3, 4))).sup() == 0.0


def test_odd_degree_squares_to_zero():
    rng = np.random.default_rng(0)
    for n, k in [(4, 1), (7, 1), (7, 3), (8, 3)]:
        a = rand_mv(rng, n, k)
        assert a.wedge(a).sup() < 1e-12


@settings(deadline=None, max_examples=30)
@given(st.integers(0, 10**6))
def test_wedge_graded_commutative(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    j = int(rng.integers(0, n + 1))
    k = int(rng.integers(0, n + 1))
    a, b = rand_mv(rng, n, j), rand_mv(rng, n, k)
    lhs = a.wedge(b)
    rhs = b.wedge(a) * ((-1.0) ** (j * k))
    assert (lhs - rhs).sup() < 1e-12


def test_wedge_laws_batch():
    rng = np.random.default_rng(12)
    for n in (4, 7):
        for j, k in itertools.product(range(n + 1), repeat=2):
            if j + k > n:
                continue
            for _ in range(200):
                a, b = rand_mv(rng, n, j), rand_mv(rng, n, k)
                assert (a.wedge(b) - b.wedge(a) * ((-1.0) ** (j * k))).sup() < 1e-12
            l = int(rng.integers(0, n - j - k + 1))
            for _ in range(50):
                a, b, c = rand_mv(rng, n, j), rand_mv(rng, n, k), rand_mv(rng, n, l)
                assoc = a.wedge(b).wedge(c) - a.wedge(b.wedge(c))
                assert assoc.sup() < 1e-12
                lin = (a + b * 2.0).wedge(c) - (a.wedge(c) + b.wedge(c) * 2.0) if j == k else None
                if lin is not None:
                    assert lin.sup() < 1e-12


def test_wedge_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        Multivector.basis(4, (1,)).wedge(Multivector.basis(5, (1,)))


def test_wedge_above_top_degree_is_zero():
    a = Multivector.basis(4, (1, 2, 3))
    b = Multivector.basis(4, (2, 3))
    top = a.wedge(b)
    assert top.k == 5 and top.sup() == 0.0


# ----------------------------------------------------------------------
# hodge


def test_hodge_euclidean_examples():
    ones = np.ones(4)
    assert (Multivector.basis(4, (1, 2)).hodge(ones) - Multivector.basis(4, (3, 4))).sup() == 0.0
    sd = Multivector.basis(4, (1, 2)) + Multivector.basis(4, (3, 4))
    assert (sd.hodge(ones) - sd).sup() == 0.0  # self-dual eigenvalue +1
    asd = Multivector.basis(4, (1, 2)) - Multivector.basis(4, (3, 4))
    assert (asd.hodge(ones) + asd).sup() == 0.0


def test_hodge_involution_middle_degree():
    rng = np.random.default_rng(3)
    a = rand_mv(rng, 4, 2)
    assert (a.hodge(np.ones(4)).hodge(np.ones(4)) - a).sup() < 1e-14


def test_hodge_defining_identity_and_isometry():
    rng = np.random.default_rng(4)
    for n in (4, 7):
        g = rng.uniform(0.4, 2.5, size=n)
        vol = Multivector.scalar(n, 1.0).hodge(g)
        for k in range(n + 1):
            for _ in range(25):
                a, b = rand_mv(rng, n, k), rand_mv(rng, n, k)
                lhs = a.wedge(b.hodge(g))
                rhs = vol * a.inner(b, g)
                assert (lhs - rhs).sup() < 1e-12
                assert a.hodge(g).inner(b.hodge(g), g) == pytest.approx(a.inner(b, g), abs=1e-12)


def test_hodge_orientation_flip():
    a = Multivector.basis(4, (1, 2))
    assert (a.hodge(np.ones(4), -1) + a.hodge(np.ones(4), 1)).sup() == 0.0


def test_hodge_rejects_bad_metric():
    with pytest.raises(ValueError):
        Multivector.basis(4, (1,)).hodge([1.0, -1.0, 1.0, 1.0])


# ----------------------------------------------------------------------
# interior product and evaluation


def test_interior_examples():
    e45 = Multivector.basis(4, (1, 2))
    v1 = np.array([1.0, 0, 0, 0])
    v3 = np.array([0, 0, 1.0, 0])
    assert (e45.interior(v1) - Multivector.basis(4, (2,))).sup() == 0.0
    assert e45.interior(v3).sup() == 0.0


def test_interior_antiderivation_and_nilpotent():
    rng = np.random.default_rng(6)
    for _ in range(40):
        n = 7
        j, k = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        a, b = rand_mv(rng, n, j), rand_mv(rng, n, k)
        v = rng.normal(size=n)
        lhs = a.wedge(b).interior(v)
        rhs = a.interior(v).wedge(b) + a.wedge(b.interior(v)) * ((-1.0) ** j)
        assert (lhs - rhs).sup() < 1e-12
        assert a.interior(v).interior(v).sup() < 1e-12


def test_evaluate_matches_interior():
    rng = np.random.default_rng(7)
    a = rand_mv(rng, 5, 3)
    u, v, w = rng.normal(size=(3, 5))
    by_eval = a.evaluate(u, v, w)
    by_contraction = a.interior(u).interior(v).interior(w).coef[0]
    # iterated contraction peels arguments from the left: a(u, v, w)
    assert by_eval == pytest.approx(((a.interior(u)).interior(v)).interior(w).coef[0], abs=1e-12)
    assert by_eval == pytest.approx(by_contraction, abs=1e-12)


# ----------------------------------------------------------------------
# check / hat


def _one_forms(rng, count=2):
    return [
        [rand_mv(rng, 7, 1) for _ in range(3)]
        for _ in range(count)
    ]


def test_hat_check_round_trip():
    rng = np.random.default_rng(8)
    (alpha,) = _one_forms(rng, 1)
    m = check(alpha)
    back = hat(m)
    for a, b in zip(alpha, back):
        assert (a - b).sup() == 0.0
    # check(hat(A)) = A exactly for skew A
    rebuilt = check(list(hat(m)))
    for i in range(3):
        for j in range(3):
            assert (rebuilt[i, j] - m[i, j]).sup() == 0.0


def test_check_hat_not_inverse_on_non_skew():
    sym = MatrixForm([[Multivector.basis(7, (1,)) for _ in range(3)] for _ in range(3)])
    rebuilt = check(list(hat(sym)))
    diff = max((rebuilt[i, j] - sym[i, j]).sup() for i in range(3) for j in range(3))
    assert diff > 0.5


def test_check_product_hat_expansion():
    # (check(a) check(d))^hat = (a2 d3, -a1 d3, a1 d2), straight from the
    # definitions; the companion 2-form row (f23, f31, f12) below is the
    # downstream normalization actually used by the charts.
    rng = np.random.default_rng(9)
    alpha, delta = _one_forms(rng)
    prod = check(alpha) @ check(delta)
    got = hat(prod)
    expect = (
        alpha[1].wedge(delta[2]),
        -(alpha[0].wedge(delta[2])),
        alpha[0].wedge(delta[1]),
    )
    for a, b in zip(got, expect):
        assert (a - b).sup() < 1e-12


def test_check_square_hat_gives_2form_row():
    rng = np.random.default_rng(10)
    (f,) = _one_forms(rng, 1)
    h = hat(check(f) @ check(f))
    expect = (f[1].wedge(f[2]), f[2].wedge(f[0]), f[0].wedge(f[1]))
    for a, b in zip(h, expect):
        assert (a - b).sup() < 1e-12


def test_row_times_check_commutator_identity():
    # (alpha . check(d))^check = check(a) check(d) - (-1)^(|a||d|) check(d) check(a)
    rng = np.random.default_rng(11)
    for deg_a, deg_d in [(1, 1), (1, 2), (2, 1), (2, 2)]:
        alpha = [rand_mv(rng, 7, deg_a) for _ in range(3)]
        delta = [rand_mv(rng, 7, deg_d) for _ in range(3)]
        dm = check(delta)
        row = [
            sum((alpha[k].wedge(dm[k, i]) for k in (1, 2)), alpha[0].wedge(dm[0, i]))
            for i in range(3)
        ]
        lhs = check(row)
        sign = (-1.0) ** (deg_a * deg_d)
        rhs = check(alpha) @ dm - (dm @ check(alpha)) * sign
        diff = max((lhs[i, j] - rhs[i, j]).sup() for i in range(3) for j in range(3))
        assert diff < 1e-12


def test_matrix_product_convention_hand_expanded():
    rng = np.random.default_rng(12)
    a11, a12, a21, a22 = (rand_mv(rng, 4, 1) for _ in range(4))
    b11, b12, b21, b22 = (rand_mv(rng, 4, 1) for _ in range(4))
    prod = MatrixForm([[a11, a12], [a21, a22]]) @ MatrixForm([[b11, b12], [b21, b22]])
    assert (prod[0, 0] - (a11.wedge(b11) + a12.wedge(b21))).sup() < 1e-13
    assert (prod[0, 1] - (a11.wedge(b12) + a12.wedge(b22))).sup() < 1e-13
    assert (prod[1, 0] - (a21.wedge(b11) + a22.wedge(b21))).sup() < 1e-13
    assert (prod[1, 1] - (a21.wedge(b12) + a22.wedge(b22))).sup() < 1e-13


def test_check_needs_three_components():
    with pytest.raises(Exception):
        check([Multivector.basis(4, (1,))] * 2)


# ----------------------------------------------------------------------
# transforms


def test_transform_round_trip_and_composition():
    rng = np.random.default_rng(13)
    for k in (1, 2, 3, 4):
        a = rand_mv(rng, 7, k)
        p = rng.normal(size=(7, 7)) + 3.0 * np.eye(7)
        q = rng.normal(size=(7, 7)) + 3.0 * np.eye(7)
        assert (a.transform(p).transform(np.linalg.inv(p)) - a).sup() < 1e-10
        assert (a.transform(p).transform(q) - a.transform(p @ q)).sup() < 1e-9


def test_transform_respects_wedge():
    rng = np.random.default_rng(14)
    a, b = rand_mv(rng, 7, 2), rand_mv(rng, 7, 1)
    p = rng.normal(size=(7, 7)) + 3.0 * np.eye(7)
    assert (a.wedge(b).transform(p) - a.transform(p).wedge(b.transform(p))).sup() < 1e-9


# ----------------------------------------------------------------------
# scalar fields and form fields


def test_dform_constant_and_polynomial():
    n = 4
    const = FormField(n, 2, {(1, 2): ScalarField.constant(n, 3.5)})
    assert dform(const, (0.3, 0.4, 0.1, 0.9)).sup() == 0.0
    x1_dx2 = FormField(n, 1, {(2,): ScalarField.coordinate(n, 0)})
    got = dform(x1_dx2, (0.7, -0.3, 0.2, 0.5))
    assert (got - Multivector.basis(n, (1, 2))).sup() == 0.0


def _random_polynomial_field(rng, n, k):
    coeffs = {}
    for idx in combos(n, k):
        if rng.random() < 0.5:
            continue
        c = rng.normal(size=(n, n))

        def fn(*jets, c=c):
            acc = jets[0] * 0.0
            for i in range(len(jets)):
                for j in range(len(jets)):
                    acc = acc + float(c[i, j]) * jets[i] * jets[j]
            return acc

        coeffs[idx] = ScalarField(n, fn=fn)
    return FormField(n, k, coeffs)


def test_d_squared_vanishes_on_random_fields():
    rng = np.random.default_rng(15)
    for n, k in [(4, 1), (4, 2), (7, 2)]:
        field = _random_polynomial_field(rng, n, k)
        dd = field.d().d()
        for _ in range(10):
            pt = rng.uniform(-1, 1, size=n)
            assert dd.at(tuple(pt)).sup() < 1e-9


def test_d_leibniz_pointwise():
    rng = np.random.default_rng(16)
    n = 4
    a = _random_polynomial_field(rng, n, 1)
    b = _random_polynomial_field(rng, n, 1)
    pt = (0.2, -0.4, 0.7, 0.1)
    lhs = a.wedge(b).d_at(pt)
    rhs = a.d_at(pt).wedge(b.at(pt)) - a.at(pt).wedge(b.d_at(pt))
    assert (lhs - rhs).sup() < 1e-10


def test_dform_missing_jet_order_reported():
    n = 7
    field = _random_polynomial_field(np.random.default_rng(17), n, 1)
    d4 = field.d().d().d().d()  # needs order-4 jets of the coefficients
    with pytest.raises(JetOrderError) as err:
        d4.at((0.1, 0.2, 0.3, 0.4, -0.2, 0.0, 0.5))
    assert err.value.order == 4


def test_scalarfield_arithmetic():
    n = 3
    x = ScalarField.coordinate(n, 0)
    y = ScalarField.coordinate(n, 1)
    expr = (x * y + 2.0) / (x + 3.0) - y**2
    pt = (0.7, -0.5, 0.0)
    expect = (0.7 * -0.5 + 2.0) / 3.7 - 0.25
    assert expr(pt) == pytest.approx(expect, abs=1e-14)
    j = expr.jet(pt, 2)
    h = 1e-6
    fd = ((x * y + 2.0) / (x + 3.0) - y**2)((0.7 + h, -0.5, 0.0))
    assert j.partial(0) == pytest.approx((fd - expect) / h, abs=1e-5)


def test_jetform_wedge_matches_multivector():
    rng = np.random.default_rng(18)
    from g2frames.jets import variables

    pt = (0.3, 0.8, -0.4, 0.2)
    jets = variables(pt, 1)
    a = JetForm(4, 1, {(1,): jets[1], (3,): jets[0] * jets[2]})
    b = JetForm(4, 1, {(2,): jets[3], (4,): jets[1] * jets[1]})
    prod = a.wedge(b)
    assert (prod.value() - a.value().wedge(b.value())).sup() < 1e-14


def test_merge_sign_basic():
    assert merge_sign((1,), (2,)) == (1, (1, 2))
    assert merge_sign((2,), (1,)) == (-1, (1, 2))
    assert merge_sign((1, 4), (2, 3)) == (1, (1, 2, 3, 4))


def test_dimension_cap_and_addition_mismatch():
    with pytest.raises(DimensionMismatch):
        Multivector(9, 1)
    with pytest.raises(DimensionMismatch):
        Multivector.basis(4, (1,)) + Multivector.basis(4, (1, 2))
    with pytest.raises(DimensionMismatch):
        Multivector.basis(4, (1,)) + Multivector.basis(5, (1,))


def test_basis_canonicalization():
    # permutation sign normalized once at construction; repeated labels vanish
    assert (Multivector.basis(4, (2, 1)) + Multivector.basis(4, (1, 2))).sup() == 0.0
    assert Multivector.from_terms(4, 2, {(3, 3): 5.0}).sup() == 0.0
    assert Multivector.basis(4, (3, 1, 2)).coeff((1, 2, 3)) == 1.0
