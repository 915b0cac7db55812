"""Pointwise G2 linear algebra on an oriented 7-dimensional inner-product space.

Labels 1..3 span the vertical (fiber) directions f^i, labels 4..7 the
horizontal ones e^alpha.  The orientation is fixed once and for all as
o = f^123 ^ e^4567.  The ``branch`` argument (+1 or -1) selects which of the
two horizontal duality pairings e^i is used and ties the sign of the mixed
term of the structure 3-form to it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exterior import Multivector, combos

VERT = (1, 2, 3)
HORIZ = (4, 5, 6, 7)


class DegeneratePhiError(ValueError):
    def __init__(self, rank: int):
        self.rank = rank
        super().__init__(f"degenerate 3-form: induced bilinear form has rank {rank}")


class DecompositionError(ValueError):
    def __init__(self, residual_phi: float, residual_psi: float, mem2: float, mem3: float):
        self.residual_phi = residual_phi
        self.residual_psi = residual_psi
        self.membership_w2 = mem2
        self.membership_w3 = mem3
        super().__init__(
            "torsion reconstruction failed "
            f"(residuals {residual_phi:.3e}, {residual_psi:.3e}; "
            f"memberships {mem2:.3e}, {mem3:.3e}); "
            "inputs do not arise from this structure in the adapted basis"
        )


def duality_pairing(branch: int):
    """The three horizontal 2-forms e^1, e^2, e^3 of the chosen branch."""
    b = float(branch)
    e1 = Multivector.basis(7, (4, 5)) + b * Multivector.basis(7, (6, 7))
    e2 = Multivector.basis(7, (4, 6)) - b * Multivector.basis(7, (5, 7))
    e3 = Multivector.basis(7, (4, 7)) + b * Multivector.basis(7, (5, 6))
    return (e1, e2, e3)


def _f(i: int) -> Multivector:
    return Multivector.basis(7, (i,))


@lru_cache(maxsize=None)
def _unit_structure_split(branch: int):
    """Eigen-split of tau -> *(tau ^ phi) on 2-forms, and the 3-form kernel
    of wedging with (phi, psi), both at lam = mu = 1.

    Returns (w14_eigenvalue, proj14, proj27) in the orthonormal coefficient
    basis.  The eigenvalue carrying the 14-dimensional space is detected
    numerically rather than hard-coded, so it stays convention-proof.
    """
    s = standard_phi(1.0, 1.0, branch)
    ones = np.ones(7)
    two = combos(7, 2)
    lmat = np.zeros((len(two), len(two)))
    for c, idx in enumerate(two):
        lmat[:, c] = Multivector.basis(7, idx).wedge(s.phi).hodge(ones).coef
    asym = np.max(np.abs(lmat - lmat.T))
    if asym > 1e-12:
        raise AssertionError(f"wedge-star operator not symmetric ({asym:.2e})")
    evals, evecs = np.linalg.eigh((lmat + lmat.T) / 2.0)
    rounded = np.round(evals).astype(int)
    counts = {v: int(np.sum(rounded == v)) for v in set(rounded)}
    if sorted(counts.values()) != [7, 14] or np.max(np.abs(evals - rounded)) > 1e-10:
        raise AssertionError(f"unexpected 2-form eigenstructure: {counts}")
    e14 = next(v for v, c in counts.items() if c == 14)
    v14 = evecs[:, rounded == e14]
    proj14 = v14 @ v14.T

    three = combos(7, 3)
    rows = []
    for idx in three:
        b3 = Multivector.basis(7, idx)
        rows.append(np.concatenate([b3.wedge(s.phi).coef, b3.wedge(s.psi).coef]))
    constraints = np.array(rows).T  # (8, 35)
    _, sv, vt = np.linalg.svd(constraints)
    null = vt[int(np.sum(sv > 1e-10)) :]
    proj27 = null.T @ null
    if null.shape[0] != 27:
        raise AssertionError(f"3-form kernel has dimension {null.shape[0]}, not 27")
    return float(e14), proj14, proj27


@lru_cache(maxsize=None)
def _weight_cache(lam: float, mu: float, k: int):
    g = np.array([lam**2] * 3 + [mu**2] * 4)
    idx = np.array(combos(7, k)) - 1
    return np.sqrt(np.prod(g[idx], axis=1))


class G2Structure:
    """The pair (phi, psi) with its induced metric data at a point."""

    def __init__(self, lam: float, mu: float, branch: int):
        if lam <= 0 or mu <= 0:
            raise ValueError("positive definiteness requires lam, mu > 0")
        if branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        self.lam = float(lam)
        self.mu = float(mu)
        self.branch = branch
        self.sign = branch
        self.g_diag = np.array([lam**2] * 3 + [mu**2] * 4)
        self.m = lam**3 * mu**4
        self.orientation = 1
        e = duality_pairing(branch)
        self.e_pairing = e
        phi = self.lam**3 * _f(1).wedge(_f(2)).wedge(_f(3))
        mixed = _f(1).wedge(e[0]) + _f(2).wedge(e[1]) + _f(3).wedge(e[2])
        phi = phi - branch * self.lam * self.mu**2 * mixed
        self.phi = phi
        vol4 = Multivector.basis(7, HORIZ)
        f23 = _f(2).wedge(_f(3))
        f31 = _f(3).wedge(_f(1))
        f12 = _f(1).wedge(_f(2))
        self.psi = self.mu**4 * vol4 - self.lam**2 * self.mu**2 * (
            e[0].wedge(f23) + e[1].wedge(f31) + e[2].wedge(f12)
        )

    # -- conveniences ----------------------------------------------------
    def hodge(self, a: Multivector) -> Multivector:
        return a.hodge(self.g_diag, self.orientation)

    def gnorm(self, a: Multivector) -> float:
        return a.gnorm(self.g_diag)

    def volume_form(self) -> Multivector:
        return Multivector.basis(7, tuple(range(1, 8))) * self.m

    @property
    def w14_eigenvalue(self) -> float:
        return _unit_structure_split(self.branch)[0]

    def _scaled_proj(self, which: int, k: int):
        parts = _unit_structure_split(self.branch)
        w = _weight_cache(self.lam, self.mu, k)
        return (w[:, None] * parts[which]) / w[None, :]

    def project_w14(self, a: Multivector) -> Multivector:
        return Multivector(7, 2, self._scaled_proj(1, 2) @ a.coef)

    def project_w27(self, a: Multivector) -> Multivector:
        return Multivector(7, 3, self._scaled_proj(2, 3) @ a.coef)


def standard_phi(lam: float, mu: float, branch: int) -> G2Structure:
    """Adapted-basis structure with vertical scale lam, horizontal scale mu."""
    return G2Structure(lam, mu, branch)


@dataclass(frozen=True)
class MetricFromPhi:
    gram: np.ndarray
    m: float
    signature: tuple
    definite: bool


def metric_from_phi(phi: Multivector, tol: float = 1e-10) -> MetricFromPhi:
    """Recover the induced metric, normalizer m, and signature from a 3-form.

    The bilinear form b(u, v) = coefficient of (u . phi)^(v . phi)^phi against
    the fixed orientation satisfies b = sign * 6 m G with m^2 = 1/|o|_G^2;
    the unique normalization with det G > 0 is returned.
    """
    if phi.n != 7 or phi.k != 3:
        raise ValueError("expected a 3-form in dimension 7")
    b = np.zeros((7, 7))
    contractions = []
    for u in range(7):
        vec = np.zeros(7)
        vec[u] = 1.0
        contractions.append(phi.interior(vec))
    for u in range(7):
        for v in range(u, 7):
            top = contractions[u].wedge(contractions[v]).wedge(phi)
            b[u, v] = b[v, u] = top.coef[0]
    det_b = float(np.linalg.det(b))
    scale = float(np.max(np.abs(b))) or 1.0
    if abs(det_b) < (tol * scale) ** 7:
        raise DegeneratePhiError(int(np.linalg.matrix_rank(b, tol=tol * scale)))
    eps = 1.0 if det_b > 0 else -1.0
    m = (eps * det_b / 6.0**7) ** (1.0 / 9.0)
    gram = eps * b / (6.0 * m)
    eigs = np.linalg.eigvalsh(gram)
    signature = (int(np.sum(eigs > 0)), int(np.sum(eigs < 0)))
    return MetricFromPhi(gram=gram, m=m, signature=signature, definite=signature == (7, 0))


@dataclass(frozen=True)
class TorsionForms:
    """Torsion components of (dphi, dpsi) in the adapted basis."""

    tau0: float
    tau1: Multivector
    tau2: Multivector
    tau3: Multivector
    residual_phi: float
    residual_psi: float
    membership_w2: float
    membership_w3: float

    def norms(self, g_diag) -> dict:
        return {
            "tau0": abs(self.tau0),
            "tau1": self.tau1.gnorm(g_diag),
            "tau2": self.tau2.gnorm(g_diag),
            "tau3": self.tau3.gnorm(g_diag),
        }


def torsion_decompose(
    s: G2Structure,
    dphi: Multivector,
    dpsi: Multivector,
    tol: float = 1e-9,
) -> TorsionForms:
    """Split (dphi, dpsi) into the four torsion components.

    tau0 from the degree-7 pairing (dphi)^phi = 7 tau0 Vol; tau1 from the
    coclosure side; tau2 as the 14-dimensional eigenspace component of the
    dpsi remainder; tau3 as the Hodge dual of the dphi remainder.
    """
    if dphi.n != 7 or dphi.k != 4 or dpsi.k != 5:
        raise ValueError("expected a 4-form and a 5-form in dimension 7")
    vol_coef = s.m
    tau0 = dphi.wedge(s.phi).coef[0] / (7.0 * vol_coef)
    star_dpsi = s.hodge(dpsi)
    tau1 = s.hodge(star_dpsi.wedge(s.psi)) * (1.0 / 3.0)
    remainder_psi = dpsi - tau1.wedge(s.psi)
    e14 = s.w14_eigenvalue
    tau2 = s.project_w14(s.hodge(remainder_psi)) * (1.0 / e14)
    tau3 = s.hodge(dphi - tau0 * s.psi - 0.75 * tau1.wedge(s.phi))

    rebuilt_phi = tau0 * s.psi + 0.75 * tau1.wedge(s.phi) + s.hodge(tau3)
    rebuilt_psi = tau1.wedge(s.psi) + tau2.wedge(s.phi)
    res_phi = s.gnorm(dphi - rebuilt_phi)
    res_psi = s.gnorm(dpsi - rebuilt_psi)
    mem2 = s.gnorm(tau2.wedge(s.phi) - e14 * s.hodge(tau2))
    mem3 = max(s.gnorm(tau3.wedge(s.phi)), s.gnorm(tau3.wedge(s.psi)))
    # the two equations are always solvable, so genuineness of the input
    # shows up in the membership residuals, not only in reconstruction
    scale = max(1.0, s.gnorm(dphi), s.gnorm(dpsi))
    if max(res_phi, res_psi, mem2, mem3) > tol * scale:
        raise DecompositionError(res_phi, res_psi, mem2, mem3)
    return TorsionForms(
        tau0=float(tau0),
        tau1=tau1,
        tau2=tau2,
        tau3=tau3,
        residual_phi=res_phi,
        residual_psi=res_psi,
        membership_w2=mem2,
        membership_w3=mem3,
    )


@dataclass(frozen=True)
class TorsionClass:
    active: tuple
    parallel: bool
    calibrated: bool
    cocalibrated: bool
    nearly_parallel_candidate: bool
    pure: str | None
    label: str


def classify(t: TorsionForms, g_diag, tol: float = 1e-6) -> TorsionClass:
    """Name the torsion type by which components exceed the tolerance."""
    return classify_norms(t.norms(g_diag), tol)


def classify_norms(norms: dict, tol: float = 1e-6) -> TorsionClass:
    """Classification from (possibly aggregated) torsion component norms."""
    active = tuple(
        name
        for name, key in (("W0", "tau0"), ("W1", "tau1"), ("W2", "tau2"), ("W3", "tau3"))
        if norms[key] > tol
    )
    calibrated = all(n not in active for n in ("W0", "W1", "W3"))
    cocalibrated = all(n not in active for n in ("W1", "W2"))
    parallel = not active
    pure = active[0] if len(active) == 1 else None
    nearly = pure == "W0"
    if parallel:
        label = "parallel"
    elif nearly:
        label = "nearly parallel candidate"
    else:
        bits = ["pure " + pure] if pure else [" + ".join(active)]
        if cocalibrated:
            bits.append("cocalibrated")
        if calibrated:
            bits.append("calibrated")
        label = ", ".join(bits)
    return TorsionClass(
        active=active,
        parallel=parallel,
        calibrated=calibrated,
        cocalibrated=cocalibrated,
        nearly_parallel_candidate=nearly,
        pure=pure,
        label=label,
    )
