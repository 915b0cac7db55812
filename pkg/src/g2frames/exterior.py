"""Dense exterior algebra on small oriented inner-product spaces (n <= 8).

Three layers share one set of combinatorial tables:

* ``Multivector`` -- a form with float coefficients at one point;
* ``JetForm``     -- a form whose coefficients are jets at one point, the
  working currency of the chart pipelines (its ``d_value`` is the exterior
  derivative at the point);
* ``FormField``   -- a form whose coefficients are scalar fields over a
  chart, evaluable to either of the above.

Basis labels are the opaque integers 1..n.  Multi-indices are strictly
increasing tuples of labels; permutation signs are normalized once at
canonicalization.  All values are immutable after construction and every
operation is a pure function.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .jets import Jet, variables

MAX_DIM = 8


class DimensionMismatch(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


# ----------------------------------------------------------------------
# combinatorial tables


@lru_cache(maxsize=None)
def combos(n: int, k: int):
    """Strictly increasing multi-indices of length k over labels 1..n."""
    return tuple(itertools.combinations(range(1, n + 1), k))


@lru_cache(maxsize=None)
def combo_pos(n: int, k: int):
    return {c: i for i, c in enumerate(combos(n, k))}


@lru_cache(maxsize=None)
def _label_array(n: int, k: int):
    """0-based label indices of each multi-index, shape (C, k)."""
    cs = combos(n, k)
    if not cs:
        return np.zeros((0, k), dtype=np.intp)
    return np.array(cs, dtype=np.intp) - 1


@lru_cache(maxsize=None)
def merge_sign(a, b):
    """Sign and sorted union of two disjoint increasing multi-indices."""
    inv = 0
    for x in a:
        for y in b:
            if y < x:
                inv += 1
    return (-1) ** inv, tuple(sorted(a + b))


@lru_cache(maxsize=None)
def _wedge_table(n: int, j: int, k: int):
    ca, cb = combos(n, j), combos(n, k)
    sign = np.zeros((len(ca), len(cb)), dtype=np.int8)
    target = np.zeros((len(ca), len(cb)), dtype=np.intp)
    pos = combo_pos(n, j + k) if j + k <= n else {}
    for ia, a in enumerate(ca):
        sa = set(a)
        for ib, b in enumerate(cb):
            if sa.isdisjoint(b):
                s, merged = merge_sign(a, b)
                sign[ia, ib] = s
                target[ia, ib] = pos[merged]
    return sign, target


@lru_cache(maxsize=None)
def _hodge_table(n: int, k: int):
    """Complement position and sign of e^I -> e^{I^c} for each I."""
    cs = combos(n, k)
    full = tuple(range(1, n + 1))
    comp_pos = np.zeros(len(cs), dtype=np.intp)
    sign = np.zeros(len(cs), dtype=np.int8)
    pos = combo_pos(n, n - k)
    for i, a in enumerate(cs):
        comp = tuple(x for x in full if x not in a)
        s, _ = merge_sign(a, comp)
        comp_pos[i] = pos[comp]
        sign[i] = s
    return sign, comp_pos


@lru_cache(maxsize=None)
def _interior_table(n: int, k: int):
    """Flat (src, label, sign, dst) arrays for contraction by basis vectors."""
    src, lab, sgn, dst = [], [], [], []
    pos = combo_pos(n, k - 1)
    for i, a in enumerate(combos(n, k)):
        for slot, x in enumerate(a):
            src.append(i)
            lab.append(x - 1)
            sgn.append((-1) ** slot)
            dst.append(pos[a[:slot] + a[slot + 1 :]])
    return (
        np.array(src, dtype=np.intp),
        np.array(lab, dtype=np.intp),
        np.array(sgn, dtype=np.int8),
        np.array(dst, dtype=np.intp),
    )


def _canonical(idx):
    """Sort a multi-index, returning (sign, sorted) or (0, None) on repeats."""
    idx = tuple(idx)
    if len(set(idx)) != len(idx):
        return 0, None
    perm = sorted(range(len(idx)), key=lambda i: idx[i])
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return (-1) ** inv, tuple(sorted(idx))


# ----------------------------------------------------------------------
# pointwise forms


class Multivector:
    """Degree-k form with float coefficients over basis labels 1..n."""

    __slots__ = ("n", "k", "coef")

    def __init__(self, n: int, k: int, coef=None):
        if n > MAX_DIM:
            raise DimensionMismatch(f"dimension {n} exceeds {MAX_DIM}")
        self.n = n
        self.k = k
        size = len(combos(n, k)) if 0 <= k <= n else 0
        if coef is None:
            self.coef = np.zeros(size)
        else:
            self.coef = np.asarray(coef, dtype=float)
            if self.coef.shape != (size,):
                raise DimensionMismatch("coefficient vector of wrong size")

    # -- constructors ---------------------------------------------------
    @staticmethod
    def zero(n: int, k: int) -> "Multivector":
        return Multivector(n, k)

    @staticmethod
    def scalar(n: int, value: float) -> "Multivector":
        return Multivector(n, 0, np.array([float(value)]))

    @staticmethod
    def basis(n: int, idx) -> "Multivector":
        return Multivector.from_terms(n, len(tuple(idx)), {tuple(idx): 1.0})

    @staticmethod
    def from_terms(n: int, k: int, terms: dict) -> "Multivector":
        out = Multivector(n, k)
        pos = combo_pos(n, k)
        for idx, val in terms.items():
            s, key = _canonical(idx)
            if s:
                out.coef[pos[key]] += s * val
        return out

    def zero_like(self) -> "Multivector":
        return Multivector(self.n, self.k)

    # -- queries ----------------------------------------------------------
    def coeff(self, idx) -> float:
        s, key = _canonical(idx)
        if not s:
            return 0.0
        return s * float(self.coef[combo_pos(self.n, self.k)[key]])

    def terms(self):
        return {c: float(v) for c, v in zip(combos(self.n, self.k), self.coef) if v != 0.0}

    def norm(self) -> float:
        """Euclidean coefficient norm (orthonormal-basis inner product)."""
        return float(np.sqrt(np.dot(self.coef, self.coef)))

    def sup(self) -> float:
        return float(np.max(np.abs(self.coef))) if self.coef.size else 0.0

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.sup() <= tol

    # -- linear structure ---------------------------------------------------
    def _check(self, other):
        if self.n != other.n:
            raise DimensionMismatch("different ambient dimensions")
        if self.k != other.k:
            raise DimensionMismatch("different degrees")

    def __add__(self, other):
        self._check(other)
        return Multivector(self.n, self.k, self.coef + other.coef)

    def __sub__(self, other):
        self._check(other)
        return Multivector(self.n, self.k, self.coef - other.coef)

    def __neg__(self):
        return Multivector(self.n, self.k, -self.coef)

    def __mul__(self, c):
        return Multivector(self.n, self.k, self.coef * float(c))

    __rmul__ = __mul__

    # -- algebra ---------------------------------------------------------
    def wedge(self, other: "Multivector") -> "Multivector":
        if self.n != other.n:
            raise DimensionMismatch("different ambient dimensions")
        k = self.k + other.k
        if k > self.n:
            return Multivector(self.n, k)
        sign, target = _wedge_table(self.n, self.k, other.k)
        out = np.zeros(len(combos(self.n, k)))
        prod = np.outer(self.coef, other.coef) * sign
        np.add.at(out, target.ravel(), prod.ravel())
        return Multivector(self.n, k, out)

    def interior(self, vector) -> "Multivector":
        """Contraction with a vector given by frame components."""
        v = np.asarray(vector, dtype=float)
        if v.shape != (self.n,):
            raise DimensionMismatch("vector of wrong dimension")
        if self.k == 0:
            return Multivector(self.n, 0)
        src, lab, sgn, dst = _interior_table(self.n, self.k)
        out = np.zeros(len(combos(self.n, self.k - 1)))
        np.add.at(out, dst, sgn * v[lab] * self.coef[src])
        return Multivector(self.n, self.k - 1, out)

    def evaluate(self, *vectors) -> float:
        """Value on k vectors (multilinear, alternating)."""
        if len(vectors) != self.k:
            raise DimensionMismatch(f"need {self.k} vectors")
        if self.k == 0:
            return float(self.coef[0])
        idx = _label_array(self.n, self.k)
        mats = np.stack([np.asarray(v, dtype=float)[idx] for v in vectors], axis=-1)
        return float(np.dot(self.coef, np.linalg.det(mats)))

    def hodge(self, metric_diag, orientation: int = 1) -> "Multivector":
        """Hodge star for a diagonal metric: a ^ *b = <a, b> vol."""
        g = np.asarray(metric_diag, dtype=float)
        if g.shape != (self.n,):
            raise DimensionMismatch("metric diagonal of wrong length")
        if np.any(g <= 0):
            raise ValueError("non-positive metric entry")
        sign, comp = _hodge_table(self.n, self.k)
        root_det = float(np.sqrt(np.prod(g)))
        idx = _label_array(self.n, self.k)
        factors = np.prod(1.0 / g[idx], axis=1) if self.k else np.ones(1)
        out = np.zeros(len(combos(self.n, self.n - self.k)))
        out[comp] = orientation * sign * root_det * factors * self.coef
        return Multivector(self.n, self.n - self.k, out)

    def inner(self, other: "Multivector", metric_diag) -> float:
        self._check(other)
        g = np.asarray(metric_diag, dtype=float)
        idx = _label_array(self.n, self.k)
        factors = np.prod(1.0 / g[idx], axis=1) if self.k else np.ones(1)
        return float(np.sum(self.coef * other.coef * factors))

    def gnorm(self, metric_diag) -> float:
        return float(np.sqrt(max(self.inner(self, metric_diag), 0.0)))

    def transform(self, p: np.ndarray) -> "Multivector":
        """Coefficients in a new basis; ``p[j, i]`` expresses old covector
        ``j+1`` as a combination of new covectors ``i+1``."""
        p = np.asarray(p, dtype=float)
        if p.shape != (self.n, self.n):
            raise DimensionMismatch("transform matrix of wrong shape")
        if self.k == 0:
            return Multivector(self.n, 0, self.coef.copy())
        idx = _label_array(self.n, self.k)
        mats = p[idx[:, None, :, None], idx[None, :, None, :]]
        dets = np.linalg.det(mats)  # dets[old, new]
        return Multivector(self.n, self.k, dets.T @ self.coef)

    def __repr__(self):
        terms = self.terms()
        if not terms:
            return f"Multivector(n={self.n}, k={self.k}, 0)"
        body = " + ".join(f"{v:.6g}*e{''.join(map(str, c))}" for c, v in terms.items())
        return f"Multivector({body})"


def wedge(a: Multivector, b: Multivector) -> Multivector:
    return a.wedge(b)


def hodge(a: Multivector, metric_diag, orientation: int = 1) -> Multivector:
    return a.hodge(metric_diag, orientation)


def interior(vector, a: Multivector) -> Multivector:
    return a.interior(vector)


# ----------------------------------------------------------------------
# jet-coefficient forms


class JetForm:
    """Degree-k form whose coefficients are jets at a single chart point."""

    __slots__ = ("n", "k", "c")

    def __init__(self, n: int, k: int, c: dict | None = None):
        self.n = n
        self.k = k
        self.c = dict(c) if c else {}

    @staticmethod
    def from_jet(n: int, idx, jet: Jet) -> "JetForm":
        s, key = _canonical(idx)
        if not s:
            return JetForm(n, len(tuple(idx)))
        return JetForm(n, len(key), {key: jet * s if s != 1 else jet})

    def zero_like(self) -> "JetForm":
        return JetForm(self.n, self.k)

    def __add__(self, other):
        if self.n != other.n or self.k != other.k:
            raise DimensionMismatch("jet form mismatch")
        out = dict(self.c)
        for key, jet in other.c.items():
            out[key] = out[key] + jet if key in out else jet
        return JetForm(self.n, self.k, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return JetForm(self.n, self.k, {k: -v for k, v in self.c.items()})

    def __mul__(self, s):
        """Scale by a float or a jet."""
        return JetForm(self.n, self.k, {k: v * s for k, v in self.c.items()})

    __rmul__ = __mul__

    def wedge(self, other: "JetForm") -> "JetForm":
        if self.n != other.n:
            raise DimensionMismatch("different ambient dimensions")
        k = self.k + other.k
        out = JetForm(self.n, k)
        if k > self.n:
            return out
        for a, ja in self.c.items():
            sa = set(a)
            for b, jb in other.c.items():
                if sa.isdisjoint(b):
                    s, merged = merge_sign(a, b)
                    term = ja * jb
                    if s != 1:
                        term = -term
                    out.c[merged] = out.c[merged] + term if merged in out.c else term
        return out

    def value(self) -> Multivector:
        out = Multivector(self.n, self.k)
        pos = combo_pos(self.n, self.k)
        for key, jet in self.c.items():
            out.coef[pos[key]] = jet.value
        return out

    def d_value(self) -> Multivector:
        """Exterior derivative at the point (coefficients need order >= 1)."""
        out = Multivector(self.n, self.k + 1)
        if self.k + 1 > self.n:
            return out
        pos = combo_pos(self.n, self.k + 1)
        for key, jet in self.c.items():
            for v in range(self.n):
                lab = v + 1
                if lab in key:
                    continue
                s, merged = merge_sign((lab,), key)
                out.coef[pos[merged]] += s * jet.partial(v)
        return out

    def d_jets(self) -> "JetForm":
        """Exterior derivative with jet coefficients (one order lower)."""
        out = JetForm(self.n, self.k + 1)
        for key, jet in self.c.items():
            for v in range(self.n):
                lab = v + 1
                if lab in key:
                    continue
                s, merged = merge_sign((lab,), key)
                term = jet.derivative(v)
                if s != 1:
                    term = -term
                out.c[merged] = out.c[merged] + term if merged in out.c else term
        return out


# ----------------------------------------------------------------------
# scalar fields and form fields


class ScalarField:
    """A scalar quantity on a chart, evaluable as a jet at any point.

    Built either from a function of seeded coordinate jets (``fn``) or from
    a direct jet evaluator (``jet_fn``), e.g. a view into a cached chart
    pipeline.  Arithmetic composes at the jet level, so mixed origins
    combine freely.
    """

    __slots__ = ("nvars", "_fn", "_jet_fn")

    def __init__(self, nvars: int, fn=None, jet_fn=None):
        if (fn is None) == (jet_fn is None):
            raise ValueError("provide exactly one of fn, jet_fn")
        self.nvars = nvars
        self._fn = fn
        self._jet_fn = jet_fn

    @staticmethod
    def constant(nvars: int, value: float) -> "ScalarField":
        return ScalarField(nvars, jet_fn=lambda pt, o: Jet.constant(value, nvars, o))

    @staticmethod
    def coordinate(nvars: int, index: int) -> "ScalarField":
        def jf(pt, o):
            return Jet.variable(float(pt[index]), index, nvars, o)

        return ScalarField(nvars, jet_fn=jf)

    def jet(self, point, order: int) -> Jet:
        if self._jet_fn is not None:
            return self._jet_fn(tuple(point), order)
        return self._fn(*variables(point, order))

    def __call__(self, point) -> float:
        return self.jet(point, 0).value

    def _combine(self, other, op):
        if isinstance(other, ScalarField):
            if other.nvars != self.nvars:
                raise DimensionMismatch("scalar fields of different arity")
            return ScalarField(
                self.nvars, jet_fn=lambda pt, o: op(self.jet(pt, o), other.jet(pt, o))
            )
        return ScalarField(self.nvars, jet_fn=lambda pt, o: op(self.jet(pt, o), other))

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, lambda a, b: a / b)

    def __neg__(self):
        return ScalarField(self.nvars, jet_fn=lambda pt, o: -self.jet(pt, o))

    def __pow__(self, p):
        return ScalarField(self.nvars, jet_fn=lambda pt, o: self.jet(pt, o) ** p)


class FormField:
    """Differential form on a chart: multi-index -> ScalarField coefficients."""

    __slots__ = ("n", "k", "coeffs")

    def __init__(self, n: int, k: int, coeffs: dict | None = None):
        self.n = n
        self.k = k
        self.coeffs = {}
        if coeffs:
            for idx, field in coeffs.items():
                s, key = _canonical(idx)
                if not s:
                    continue
                field = field if s == 1 else field * float(s)
                self.coeffs[key] = self.coeffs[key] + field if key in self.coeffs else field

    @staticmethod
    def zero(n: int, k: int) -> "FormField":
        return FormField(n, k)

    @staticmethod
    def coordinate_differential(n: int, label: int) -> "FormField":
        return FormField(n, 1, {(label,): ScalarField.constant(n, 1.0)})

    def zero_like(self) -> "FormField":
        return FormField(self.n, self.k)

    def jets(self, point, order: int) -> JetForm:
        out = JetForm(self.n, self.k)
        for key, field in self.coeffs.items():
            out.c[key] = field.jet(point, order)
        return out

    def at(self, point) -> Multivector:
        return self.jets(point, 0).value()

    def d_at(self, point) -> Multivector:
        """Value of the exterior derivative at a point."""
        return self.jets(point, 1).d_value()

    def d(self) -> "FormField":
        """Exterior derivative as a field (coefficients one jet order deeper)."""
        parent = self

        def coeff_field(key):
            def jf(pt, order):
                acc = None
                for slot, lab in enumerate(key):
                    rest = key[:slot] + key[slot + 1 :]
                    src = parent.coeffs.get(rest)
                    if src is None:
                        continue
                    term = src.jet(pt, order + 1).derivative(lab - 1)
                    if slot % 2:
                        term = -term
                    acc = term if acc is None else acc + term
                if acc is None:
                    return Jet.constant(0.0, parent.n, order)
                return acc

            return ScalarField(parent.n, jet_fn=jf)

        out = FormField(self.n, self.k + 1)
        if self.k + 1 > self.n:
            return out
        present = set()
        for key in self.coeffs:
            for lab in range(1, self.n + 1):
                if lab not in key:
                    present.add(tuple(sorted(key + (lab,))))
        for key in present:
            out.coeffs[key] = coeff_field(key)
        return out

    def __add__(self, other):
        if self.n != other.n or self.k != other.k:
            raise DimensionMismatch("form field mismatch")
        out = FormField(self.n, self.k, dict(self.coeffs))
        for key, field in other.coeffs.items():
            out.coeffs[key] = out.coeffs[key] + field if key in out.coeffs else field
        return out

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return FormField(self.n, self.k, {k: -v for k, v in self.coeffs.items()})

    def __mul__(self, s):
        """Scale by a float or a ScalarField."""
        return FormField(self.n, self.k, {k: v * s for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def wedge(self, other: "FormField") -> "FormField":
        if self.n != other.n:
            raise DimensionMismatch("different ambient dimensions")
        out = FormField(self.n, self.k + other.k)
        if out.k > self.n:
            return out
        for a, fa in self.coeffs.items():
            sa = set(a)
            for b, fb in other.coeffs.items():
                if sa.isdisjoint(b):
                    s, merged = merge_sign(a, b)
                    term = fa * fb if s == 1 else fa * fb * -1.0
                    out.coeffs[merged] = (
                        out.coeffs[merged] + term if merged in out.coeffs else term
                    )
        return out


def dform(field: FormField, point) -> Multivector:
    return field.d_at(point)


# ----------------------------------------------------------------------
# matrices of forms, check/hat


class MatrixForm:
    """Rectangular matrix of same-degree forms with wedge matrix product."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        self.entries = [list(row) for row in entries]
        width = len(self.entries[0])
        if any(len(row) != width for row in self.entries):
            raise ShapeMismatch("ragged matrix")

    @property
    def shape(self):
        return (len(self.entries), len(self.entries[0]))

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]

    def __matmul__(self, other: "MatrixForm") -> "MatrixForm":
        r, s = self.shape
        s2, t = other.shape
        if s != s2:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(r):
            row = []
            for j in range(t):
                acc = self.entries[i][0].wedge(other.entries[0][j])
                for k in range(1, s):
                    acc = acc + self.entries[i][k].wedge(other.entries[k][j])
                row.append(acc)
            out.append(row)
        return MatrixForm(out)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ShapeMismatch("matrix shapes differ")
        return MatrixForm(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return MatrixForm([[-a for a in row] for row in self.entries])

    def __mul__(self, s):
        return MatrixForm([[a * s for a in row] for row in self.entries])

    __rmul__ = __mul__

    def transpose(self) -> "MatrixForm":
        r, c = self.shape
        return MatrixForm([[self.entries[i][j] for i in range(r)] for j in range(c)])

    def map(self, fn) -> "MatrixForm":
        return MatrixForm([[fn(a) for a in row] for row in self.entries])


def check(row) -> MatrixForm:
    """Row of 3 forms -> skew 3x3 matrix, (a1,a2,a3) -> [[0,-a3,a2],...]."""
    row = list(row)
    if len(row) != 3:
        raise ShapeMismatch("check needs exactly 3 components")
    z = row[0].zero_like()
    a1, a2, a3 = row
    return MatrixForm([[z, -a3, a2], [a3, z, -a1], [-a2, a1, z]])


def hat(m: MatrixForm):
    """Left inverse of check: 3x3 matrix -> (m32, -m31, m21)."""
    if m.shape != (3, 3):
        raise ShapeMismatch("hat needs a 3x3 matrix")
    return (m[2, 1], -m[2, 0], m[1, 0])


def row_wedge_matrix(row, m: MatrixForm):
    """(row . M)_j = sum_k row_k ^ M[k, j]."""
    r, c = m.shape
    if len(row) != r:
        raise ShapeMismatch("row length does not match matrix rows")
    out = []
    for j in range(c):
        acc = row[0].wedge(m[0, j])
        for k in range(1, r):
            acc = acc + row[k].wedge(m[k, j])
        out.append(acc)
    return out


def matrix_wedge_col(m: MatrixForm, col):
    """(M . col)_i = sum_k M[i, k] ^ col_k."""
    r, c = m.shape
    if len(col) != c:
        raise ShapeMismatch("column length does not match matrix columns")
    out = []
    for i in range(r):
        acc = m[i, 0].wedge(col[0])
        for k in range(1, c):
            acc = acc + m[i, k].wedge(col[k])
        out.append(acc)
    return out


def row_wedge_col(row, col):
    """Pairing sum_k row_k ^ col_k."""
    if len(row) != len(col):
        raise ShapeMismatch("row/column length mismatch")
    acc = row[0].wedge(col[0])
    for k in range(1, len(row)):
        acc = acc + row[k].wedge(col[k])
    return acc
