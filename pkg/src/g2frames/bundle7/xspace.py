"""Charts of the rank-3 2-form bundles over a 4-manifold model.

Chart coordinates are (a1, a2, a3, x4..x7): fiber coordinates first, in the
norm-sqrt(2) duality coframe, then base coordinates.  The canonical data is

    eta   -- the pulled-back duality 2-forms,
    f     -- da - a.omega, the vertical coframe,
    h     -- (f^23, f^31, f^12),
    beta  -- f^123,       vol -- pulled-back base volume,

and the structure forms phi = lam^3 beta -+ lam mu^2 eta.f^t,
psi = mu^4 vol - lam^2 mu^2 eta.h^t with radial scales lam(r), mu(r),
r = |a|^2.  Exterior derivatives are evaluated two independent ways: by jet
differentiation of the assembled coefficients and by the closed structure
system; the torsion cross-check below is the central test of the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exterior import JetForm, Multivector, check, row_wedge_col, row_wedge_matrix
from ..g2point import G2Structure, TorsionForms, standard_phi, torsion_decompose
from ..jets import Jet
from ..models import ModelSpec

N = 7
_BASE_POSITIONS = (3, 4, 5, 6)


class DualityHypothesisError(ValueError):
    def __init__(self, branch, norm):
        side = "anti-self-dual (W+ = 0)" if branch == 1 else "self-dual (W- = 0)"
        super().__init__(
            f"base model violates the {side} hypothesis for branch {branch:+d}: "
            f"residual Weyl norm {norm:.3e}"
        )


@dataclass(frozen=True)
class FiberPointX:
    a: np.ndarray
    r: float


@dataclass(frozen=True)
class CanonicalFormsX:
    eta: tuple
    f: tuple
    h: tuple
    beta: Multivector
    vol: Multivector


class _ChartJets:
    """All chart quantities at one point, as 7-variable jet forms."""

    __slots__ = (
        "order",
        "theta",
        "eta",
        "conn3",
        "rho3",
        "f",
        "h",
        "beta",
        "vol",
        "phi",
        "psi",
        "a",
        "r",
        "lam",
        "mu",
    )


def _promote(jf, offset=3):
    return JetForm(
        N,
        jf.k,
        {
            tuple(l + offset for l in key): jet.embed(N, _BASE_POSITIONS)
            for key, jet in jf.c.items()
        },
    )


class XSpaceChart:
    """One branch of the 2-form bundle over a catalog model, with a profile."""

    def __init__(self, model: ModelSpec, branch: int, profile, hyp_tol: float = 1e-7):
        if branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        self.model = model
        self.branch = branch
        self.profile = profile
        self.hyp_tol = hyp_tol
        self.frame = model.bundle()
        self._cache = {}

    # -- pipeline ---------------------------------------------------------
    def jets(self, point, order: int = 1) -> _ChartJets:
        key = (tuple(float(v) for v in point), order)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        data = self._build(key[0], order)
        self._cache[key] = data
        return data

    def _build(self, point, p):
        x = point[3:]
        base = self.frame.base(x, p + 1)
        eta4, conn4, rho4 = base.duality(self.branch)
        J = _ChartJets()
        J.order = p
        J.theta = tuple(_promote(t) for t in base.theta_low)
        J.eta = tuple(_promote(e) for e in eta4)
        J.conn3 = tuple(_promote(w) for w in conn4)
        J.rho3 = tuple(_promote(r) for r in rho4)
        J.a = tuple(Jet.variable(point[i], i, N, p) for i in range(3))
        om = check(list(J.conn3))
        f = []
        for i in range(3):
            fi = JetForm(N, 1, {(i + 1,): Jet.constant(1.0, N, p)})
            for j in range(3):
                fi = fi - om[j, i] * J.a[j]
            f.append(fi)
        J.f = tuple(f)
        J.h = (f[1].wedge(f[2]), f[2].wedge(f[0]), f[0].wedge(f[1]))
        J.beta = f[0].wedge(f[1]).wedge(f[2])
        J.vol = J.theta[0].wedge(J.theta[1]).wedge(J.theta[2]).wedge(J.theta[3])
        J.r = J.a[0] * J.a[0] + J.a[1] * J.a[1] + J.a[2] * J.a[2]
        lam1 = self.profile.lam_jet(J.r.value, p)
        mu1 = self.profile.mu_jet(J.r.value, p)
        J.lam = J.r.compose([lam1.coef[k] * _FACT[k] for k in range(p + 1)])
        J.mu = J.r.compose([mu1.coef[k] * _FACT[k] for k in range(p + 1)])
        mixed = row_wedge_col(list(J.eta), list(J.f))
        eta_h = row_wedge_col(list(J.eta), list(J.h))
        J.phi = J.beta * (J.lam**3) - mixed * (J.lam * J.mu**2 * float(self.branch))
        J.psi = J.vol * (J.mu**4) - eta_h * (J.lam**2 * J.mu**2)
        return J

    # -- contract surfaces -------------------------------------------------
    def fiber_point(self, point) -> FiberPointX:
        a = np.asarray(point[:3], dtype=float)
        return FiberPointX(a=a, r=float(a @ a))

    def canonical_forms(self, point) -> CanonicalFormsX:
        J = self.jets(point, 1)
        return CanonicalFormsX(
            eta=tuple(e.value() for e in J.eta),
            f=tuple(f.value() for f in J.f),
            h=tuple(h.value() for h in J.h),
            beta=J.beta.value(),
            vol=J.vol.value(),
        )

    def phi_at(self, point) -> Multivector:
        return self.jets(point, 1).phi.value()

    def psi_at(self, point) -> Multivector:
        return self.jets(point, 1).psi.value()

    def phi_field(self):
        """The structure 3-form as a FormField over the chart."""
        return _chart_field(self, "phi", 3)

    def psi_field(self):
        return _chart_field(self, "psi", 4)

    def dphi_at(self, point) -> Multivector:
        return self.jets(point, 1).phi.d_value()

    def dpsi_at(self, point) -> Multivector:
        return self.jets(point, 1).psi.d_value()

    def adapted_coframe(self, point) -> np.ndarray:
        """Rows: components of (f1, f2, f3, theta4..theta7) over (da, dx)."""
        J = self.jets(point, 1)
        e = np.zeros((N, N))
        for i, jf in enumerate(tuple(J.f) + tuple(J.theta)):
            for (lab,), jet in jf.c.items():
                e[i, lab - 1] = jet.value
        return e

    def structure(self, point) -> G2Structure:
        J = self.jets(point, 1)
        return standard_phi(J.lam.value, J.mu.value, self.branch)

    # -- two evaluation paths for d(phi), d(psi) ----------------------------
    def structure_residuals(self, point) -> dict:
        """Residuals of the closed differential system against jet evaluation."""
        J = self.jets(point, 1)
        a_val = np.array([a.value for a in J.a])
        f_val = [f.value() for f in J.f]
        h_val = [h.value() for h in J.h]
        eta_val = [e.value() for e in J.eta]
        rho_m = check([r.value() for r in J.rho3])
        b = float(self.branch)

        # d r = 2 f a^t
        dr = _contract(f_val, a_val) * 2.0
        dr_direct = Multivector(N, 1, np.concatenate([2.0 * a_val, np.zeros(4)]))
        res = {"dr": (dr - dr_direct).sup()}

        # d(eta a^t) = eta ^ f^t
        eta_at_jets = None
        for e, aj in zip(J.eta, J.a):
            term = e * aj
            eta_at_jets = term if eta_at_jets is None else eta_at_jets + term
        res["d_eta_at"] = (
            eta_at_jets.d_value() - row_wedge_col(eta_val, f_val)
        ).sup()

        # d beta = h rho a^t
        h_rho = row_wedge_matrix(h_val, rho_m)
        res["dbeta"] = (J.beta.d_value() - _contract(h_rho, a_val)).sup()

        # d(eta h^t) = -eta fcheck rho a^t
        eta_h_jets = None
        for e, h in zip(J.eta, J.h):
            term = e.wedge(h)
            eta_h_jets = term if eta_h_jets is None else eta_h_jets + term
        eta_fc = row_wedge_matrix(eta_val, check(f_val))
        eta_fc_rho = row_wedge_matrix(eta_fc, rho_m)
        res["d_eta_ht"] = (eta_h_jets.d_value() + _contract(eta_fc_rho, a_val)).sup()

        # closed structure system for d phi and d psi
        lam, mu = J.lam.value, J.mu.value
        lam1 = self.profile.lam_jet(J.r.value, 1)
        mu1 = self.profile.mu_jet(J.r.value, 1)
        d_lam3 = (lam1**3).partial(0)
        d_lammu2 = (lam1 * mu1**2).partial(0)
        d_mu4 = (mu1**4).partial(0)
        d_lam2mu2 = (lam1**2 * mu1**2).partial(0)
        eta_f = row_wedge_col(eta_val, f_val)
        eta_h = row_wedge_col(eta_val, h_val)
        vol = J.vol.value()
        beta = J.beta.value()
        dphi_closed = (
            dr.wedge(beta) * d_lam3
            + _contract(h_rho, a_val) * lam**3
            - b * d_lammu2 * dr.wedge(eta_f)
        )
        dpsi_closed = (
            dr.wedge(vol) * d_mu4
            - d_lam2mu2 * dr.wedge(eta_h)
            + _contract(eta_fc_rho, a_val) * (lam**2 * mu**2)
        )
        res["dphi_system"] = (self.dphi_at(point) - dphi_closed).sup()
        res["dpsi_system"] = (self.dpsi_at(point) - dpsi_closed).sup()
        return res

    # -- torsion, two ways ---------------------------------------------------
    def _singer_thorpe(self, point):
        st = self.frame.singer_thorpe(tuple(point[3:]))
        wrong = st.wplus if self.branch == 1 else st.wminus
        norm = float(np.max(np.abs(wrong)))
        if norm > self.hyp_tol:
            raise DualityHypothesisError(self.branch, norm)
        return st

    def torsion_closed(self, point) -> TorsionForms:
        """Closed-form torsion components in the adapted basis."""
        st = self._singer_thorpe(point)
        J = self.jets(point, 1)
        s = st.s
        b = float(self.branch)
        a_val = np.array([a.value for a in J.a])
        f_val = [f.value() for f in J.f]
        h_val = [h.value() for h in J.h]
        eta_val = [e.value() for e in J.eta]
        lam1 = self.profile.lam_jet(J.r.value, 1)
        mu1 = self.profile.mu_jet(J.r.value, 1)
        lam, mu = lam1.value, mu1.value

        dr = _contract(f_val, a_val) * 2.0
        t1_coef = (2.0 / (3.0 * lam**2 * mu**4)) * (
            (lam1**2 * mu1**4).partial(0) - s * lam**4 * mu**2
        )
        tau1 = dr * t1_coef

        t2_coef = (mu1**2 / lam1**2).partial(0) - 2.0 * s
        h_at = _contract(h_val, a_val)
        eta_at = _contract(eta_val, a_val)
        tau2 = (h_at * (4.0 * lam**3 / (3.0 * mu**2)) + eta_at * (b * 2.0 * lam / 3.0)) * (
            -b * t2_coef
        )

        rho_m = check([r.value() for r in J.rho3])
        eta_m = check(eta_val)
        rho_b = rho_m + eta_m * (b * s)
        f_rho_b = row_wedge_matrix(f_val, rho_b)
        tau3 = _contract(f_rho_b, a_val) * (-b * lam**2)

        p = np.linalg.inv(self.adapted_coframe(point))
        s7 = standard_phi(lam, mu, self.branch)
        t1a, t2a, t3a = (t.transform(p) for t in (tau1, tau2, tau3))
        e14 = s7.w14_eigenvalue
        mem2 = s7.gnorm(t2a.wedge(s7.phi) - e14 * s7.hodge(t2a))
        mem3 = max(s7.gnorm(t3a.wedge(s7.phi)), s7.gnorm(t3a.wedge(s7.psi)))
        return TorsionForms(
            tau0=0.0,
            tau1=t1a,
            tau2=t2a,
            tau3=t3a,
            residual_phi=0.0,
            residual_psi=0.0,
            membership_w2=mem2,
            membership_w3=mem3,
        )

    def torsion_numeric(self, point, tol: float = 1e-9) -> TorsionForms:
        """Torsion via jet differentiation and the pointwise decomposition."""
        J = self.jets(point, 1)
        p = np.linalg.inv(self.adapted_coframe(point))
        s7 = standard_phi(J.lam.value, J.mu.value, self.branch)
        dphi = J.phi.d_value().transform(p)
        dpsi = J.psi.d_value().transform(p)
        return torsion_decompose(s7, dphi, dpsi, tol)

    def torsion_gap(self, point) -> float:
        """Componentwise gap between the closed and numeric torsion forms."""
        tc = self.torsion_closed(point)
        tn = self.torsion_numeric(point)
        return max(
            abs(tc.tau0 - tn.tau0),
            (tc.tau1 - tn.tau1).sup(),
            (tc.tau2 - tn.tau2).sup(),
            (tc.tau3 - tn.tau3).sup(),
        )

    def sample_points(self, count: int, rng, a_max: float = 1.2) -> np.ndarray:
        """Seeded probes: base in the model safe box, fiber within |a| <= a_max
        and inside the profile domain."""
        pts = np.empty((count, N))
        got = 0
        while got < count:
            a = rng.uniform(-a_max, a_max, size=3)
            r = float(a @ a)
            if not (self.profile.r_min <= r < self.profile.r_max):
                continue
            x = self.model.sample_points(1, rng)[0]
            pts[got, :3] = a
            pts[got, 3:] = x
            got += 1
        return pts


def _contract(forms, weights):
    """Linear combination sum_i weights[i] * forms[i]."""
    acc = forms[0] * float(weights[0])
    for f, w in zip(forms[1:], weights[1:]):
        acc = acc + f * float(w)
    return acc


def _chart_field(chart, which, degree):
    """FormField view into a cached chart pipeline (jets up to order 2)."""
    from ..exterior import ScalarField, combos
    from ..jets import Jet

    def coeff(idx):
        def jf(pt, order):
            jets = getattr(chart.jets(pt, max(order, 1)), which)
            got = jets.c.get(idx)
            if got is None:
                return Jet.constant(0.0, N, order)
            return got.truncate(order)

        return ScalarField(N, jet_fn=jf)

    from ..exterior import FormField

    return FormField(N, degree, {idx: coeff(idx) for idx in combos(N, degree)})


_FACT = (1.0, 1.0, 2.0, 6.0)


def build_chart_x(model: ModelSpec, branch: int, profile) -> XSpaceChart:
    return XSpaceChart(model, branch, profile)
