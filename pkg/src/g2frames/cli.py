"""Configuration-driven verification runner.

A run selects a base model, a bundle (2-form bundle X or coframe bundle P),
a branch, and a scale profile, then executes every check relevant to that
scenario over seeded probe points.  Each record names the identity it
verifies via a stable anchor string, so independent implementations can be
compared field by field.  Reports are deterministic for a fixed seed and
identical under sequential or threaded evaluation: per-point values are
aggregated with order-independent maxima/minima.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bundle7.profiles import Profile, bs_profile, constant_profile, two_of_three_report
from .bundle7.pspace import PSpaceChart
from .bundle7.radial import radius_length, radius_length_riemann
from .bundle7.xspace import XSpaceChart
from .frames4 import pairing_sign, predicates
from .g2point import classify_norms, standard_phi
from .models import MODEL_NAMES, get_model


class ConfigError(ValueError):
    pass


_CONFIG_KEYS = {
    "model": str,
    "params": dict,
    "space": str,
    "branch": int,
    "profile": dict,
    "probes": int,
    "seed": int,
    "tol": float,
    "report": (str, type(None)),
}

_PROFILE_KEYS = {
    "bs": {"s": float, "c0": float, "c1": float},
    "constant": {"lam": float, "mu": float},
}


@dataclass(frozen=True)
class RunConfig:
    model: str
    space: str
    branch: int
    profile: dict
    params: dict = field(default_factory=dict)
    probes: int = 20
    seed: int = 0
    tol: float = 1e-8
    report: str | None = None

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        for key in raw:
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
        for key in ("model", "space", "branch", "profile"):
            if key not in raw:
                raise ConfigError(f"missing config key {key!r}")
        if raw["model"] not in MODEL_NAMES:
            raise ConfigError(f"invalid value for key 'model': {raw['model']!r}")
        if raw["space"] not in ("X", "P"):
            raise ConfigError(f"invalid value for key 'space': {raw['space']!r} (use 'X' or 'P')")
        if raw["branch"] not in (1, -1):
            raise ConfigError(f"invalid value for key 'branch': {raw['branch']!r} (use 1 or -1)")
        prof = raw["profile"]
        kind = prof.get("kind")
        if kind not in _PROFILE_KEYS:
            raise ConfigError(f"invalid value for key 'profile.kind': {kind!r}")
        for pkey in prof:
            if pkey != "kind" and pkey not in _PROFILE_KEYS[kind]:
                raise ConfigError(f"unknown config key 'profile.{pkey}'")
        for pkey in _PROFILE_KEYS[kind]:
            if pkey not in prof:
                raise ConfigError(f"missing config key 'profile.{pkey}'")
        cfg = RunConfig(
            model=raw["model"],
            space=raw["space"],
            branch=int(raw["branch"]),
            profile=dict(prof),
            params=dict(raw.get("params", {})),
            probes=int(raw.get("probes", 20)),
            seed=int(raw.get("seed", 0)),
            tol=float(raw.get("tol", 1e-8)),
            report=raw.get("report"),
        )
        if cfg.probes < 1:
            raise ConfigError("invalid value for key 'probes': must be >= 1")
        if cfg.tol <= 0:
            raise ConfigError("invalid value for key 'tol': must be positive")
        return cfg

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "space": self.space,
            "branch": self.branch,
            "profile": dict(self.profile),
            "probes": self.probes,
            "seed": self.seed,
            "tol": self.tol,
            "report": self.report,
        }

    def make_profile(self) -> Profile:
        kind = self.profile["kind"]
        if kind == "bs":
            return bs_profile(self.profile["s"], self.profile["c0"], self.profile["c1"])
        return constant_profile(self.profile["lam"], self.profile["mu"])


# check id -> (anchor, tolerance scaling role)
SUITES = {
    "frames/cartan": "first structure equation: d(theta) + theta^omega = 0",
    "frames/duality-structure": "induced connection: d(eta) = eta^omega on the duality bundle",
    "frames/bianchi": "algebraic Bianchi identity: eta^rho = 0",
    "frames/block-symmetry": "symmetry of the diagonal curvature blocks",
    "frames/trace-identity": "tr A = tr C = Scal/4",
    "frames/flag-table": "Einstein iff B = 0; duality and scalar flags vs catalog",
    "x/radius-differential": "dr = 2 f a^t",
    "x/taut-2-form": "d(eta a^t) = eta^f^t",
    "x/beta-differential": "d(beta) = h rho a^t",
    "x/structure-system": "closed differential system for d(phi), d(psi) vs jet evaluation",
    "x/torsion-closed-vs-numeric": "closed torsion forms vs numeric decomposition",
    "x/tau0-vanishes": "no conformal-scalar torsion on the 2-form bundle",
    "x/parallel": "radial scales solving both first-order conditions give a torsion-free structure",
    "x/lemma-two-of-three": "two of {lam*mu const, tau1 = 0, tau2 = 0} imply the third",
    "x/radial-incompleteness": "finite fiber-radius length on the disk bundle",
    "p/identities": "algebraic and differential identity block on the coframe bundle",
    "p/cocalibrated": "d(psi) = 0 for constant scales: always cocalibrated",
    "p/never-calibrated": "d(phi) bounded away from zero: never calibrated",
    "p/tau0-closed": "tau0 = (+-6/7 lam mu^2)(mu^2 + 2 s lam^2)",
    "p/torsion-closed-vs-numeric": "closed tau3 vs numeric decomposition",
    "p/nearly-parallel": "d(phi) = (+-6/5 lam) psi at the mu^2 = 5 s lam^2 tuning",
    "p/pure-w3": "tau0 = 0 and pure W3 label at the Scal = -6 mu^2/lam^2 tuning",
    "p/w3-closed-form": "tau3 = (+-1/2 lam)(phi - 7 lam^3 beta) for Einstein duality models",
}


@dataclass
class Record:
    check: str
    anchor: str
    value: float
    tolerance: float
    passed: bool
    comparison: str = "<="

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "anchor": self.anchor,
            "maxResidual": self.value,
            "tolerance": self.tolerance,
            "comparison": self.comparison,
            "pass": self.passed,
        }


@dataclass
class Report:
    config: dict
    records: list
    environment: dict
    torsion_label: str | None
    passed: bool

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "records": [r.to_dict() for r in self.records],
            "environment": self.environment,
            "torsionLabel": self.torsion_label,
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _record(check: str, value: float, tol: float, comparison: str = "<=") -> Record:
    ok = value <= tol if comparison == "<=" else value > tol
    return Record(
        check=check,
        anchor=SUITES[check],
        value=float(value),
        tolerance=float(tol),
        passed=bool(ok),
        comparison=comparison,
    )


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _frame_records(spec, bundle, points, tol, workers) -> list:
    def probe(pt):
        pt = tuple(pt)
        st = bundle.singer_thorpe(pt)
        res_p = bundle.duality_residuals(pt, 1)
        res_m = bundle.duality_residuals(pt, -1)
        flags = predicates(st)
        exp = spec.expected
        flag_err = 0.0
        if (
            flags.einstein != exp.einstein
            or flags.sd != exp.sd
            or flags.asd != exp.asd
            or flags.scalar_flat != exp.scalar_flat
        ):
            flag_err = 1.0
        flag_err = max(flag_err, abs(st.s - exp.s_value))
        return (
            bundle.cartan_residual(pt),
            max(res_p["structure"], res_m["structure"]),
            max(res_p["bianchi"], res_m["bianchi"]),
            st.sym_residual,
            st.trace_residual,
            flag_err,
        )

    rows = np.array(_pmap(probe, points, workers))
    worst = rows.max(axis=0)
    return [
        _record("frames/cartan", worst[0], tol),
        _record("frames/duality-structure", worst[1], tol),
        _record("frames/bianchi", worst[2], tol),
        _record("frames/block-symmetry", worst[3], tol),
        _record("frames/trace-identity", worst[4], tol),
        _record("frames/flag-table", worst[5], 1e-7),
    ]


def _x_records(cfg: RunConfig, spec, chart: XSpaceChart, rng, workers):
    points = chart.sample_points(cfg.probes, rng)
    records = []
    norm_keys = ("tau0", "tau1", "tau2", "tau3")
    g_diag = None

    def probe(pt):
        pt = tuple(pt)
        res = chart.structure_residuals(pt)
        tn = chart.torsion_numeric(pt)
        tc = chart.torsion_closed(pt)
        s7 = chart.structure(pt)
        gap = max(
            abs(tc.tau0 - tn.tau0),
            (tc.tau1 - tn.tau1).sup(),
            (tc.tau2 - tn.tau2).sup(),
            (tc.tau3 - tn.tau3).sup(),
        )
        norms = tn.norms(s7.g_diag)
        return res, gap, abs(tn.tau0), norms

    rows = _pmap(probe, [tuple(p) for p in points], workers)
    worst = {
        key: max(r[0][key] for r in rows)
        for key in ("dr", "d_eta_at", "dbeta", "d_eta_ht", "dphi_system", "dpsi_system")
    }
    records.append(_record("x/radius-differential", worst["dr"], 1e-9))
    records.append(_record("x/taut-2-form", worst["d_eta_at"], cfg.tol))
    records.append(_record("x/beta-differential", max(worst["dbeta"], worst["d_eta_ht"]), cfg.tol))
    records.append(
        _record("x/structure-system", max(worst["dphi_system"], worst["dpsi_system"]), cfg.tol)
    )
    records.append(_record("x/torsion-closed-vs-numeric", max(r[1] for r in rows), 1e-6))
    records.append(_record("x/tau0-vanishes", max(r[2] for r in rows), 1e-6))
    agg_norms = {k: max(r[3][k] for r in rows) for k in norm_keys}
    label = classify_norms(agg_norms, tol=1e-6).label

    prof = chart.profile
    if prof.kind == "bs":
        s_prof = prof.params["s"]
        samples = np.linspace(prof.r_min, min(prof.r_max, prof.r_min + 8.0), 100)[:-1]
        lemma = two_of_three_report(prof, s_prof, samples)
        records.append(_record("x/lemma-two-of-three", max(lemma.values()), 1e-8))
        if abs(s_prof - spec.expected.s_value) < 1e-12 and spec.expected.einstein:
            all_tau = max(agg_norms.values())
            records.append(_record("x/parallel", all_tau, 1e-6))
        if prof.r0 is not None:
            length = radius_length(prof, prof.r0)
            oracle = radius_length_riemann(prof, prof.r0, n=60_000)
            records.append(_record("x/radial-incompleteness", abs(length - oracle), 1e-6))
    return records, label


def _p_records(cfg: RunConfig, spec, chart: PSpaceChart, rng, workers):
    points = chart.sample_points(cfg.probes, rng)
    lam, mu, b = chart.lam, chart.mu, float(chart.branch)
    s7 = chart.structure()

    def probe(pt):
        pt = tuple(pt)
        ids = chart.identity_residuals(pt)
        p = np.linalg.inv(chart.adapted_coframe(pt))
        dphi = chart.dphi_at(pt).transform(p)
        dpsi = chart.dpsi_at(pt).transform(p)
        tn = chart.torsion_numeric(pt)
        tc = chart.torsion_closed(pt)
        gap = max(abs(tc.tau0 - tn.tau0), tn.tau1.sup(), tn.tau2.sup(), (tc.tau3 - tn.tau3).sup())
        out = {
            "identities": max(ids.values()),
            "dpsi": s7.gnorm(dpsi),
            "dphi": s7.gnorm(dphi),
            "tau0_gap": abs(tc.tau0 - tn.tau0),
            "gap": gap,
            "norms": tn.norms(s7.g_diag),
            "nearly": (dphi - b * (6.0 / (5.0 * lam)) * s7.psi).sup(),
            "tau3_w3": 0.0,
        }
        if spec.expected.einstein:
            from .exterior import Multivector

            beta_ad = Multivector.basis(7, (1, 2, 3))
            pred = (b / (2.0 * lam)) * (s7.phi - 7.0 * lam**3 * beta_ad)
            out["tau3_w3"] = (tn.tau3 - pred).sup()
        return out

    rows = _pmap(probe, [tuple(p) for p in points], workers)
    records = [
        _record("p/identities", max(r["identities"] for r in rows), cfg.tol),
        _record("p/cocalibrated", max(r["dpsi"] for r in rows), 1e-9),
        _record("p/never-calibrated", min(r["dphi"] for r in rows), 1e-3, comparison=">"),
        _record("p/tau0-closed", max(r["tau0_gap"] for r in rows), 1e-8),
        _record("p/torsion-closed-vs-numeric", max(r["gap"] for r in rows), 1e-6),
    ]
    s_model = spec.expected.s_value
    duality_ok = spec.expected.asd if chart.branch == 1 else spec.expected.sd
    if abs(mu**2 - 5.0 * s_model * lam**2) < 1e-9 and spec.expected.einstein and duality_ok:
        records.append(_record("p/nearly-parallel", max(r["nearly"] for r in rows), 1e-8))
    if abs(mu**2 + 2.0 * s_model * lam**2) < 1e-9:
        agg = {k: max(r["norms"][k] for r in rows) for k in ("tau0", "tau1", "tau2", "tau3")}
        cls = classify_norms(agg, tol=1e-6)
        w3_err = 0.0 if (cls.pure == "W3" and cls.cocalibrated) else 1.0
        records.append(_record("p/pure-w3", max(agg["tau0"], w3_err), 1e-8))
        if spec.expected.einstein and duality_ok:
            records.append(_record("p/w3-closed-form", max(r["tau3_w3"] for r in rows), 1e-8))
    agg_norms = {k: max(r["norms"][k] for r in rows) for k in ("tau0", "tau1", "tau2", "tau3")}
    label = classify_norms(agg_norms, tol=1e-6).label
    return records, label


def run(config: RunConfig, workers: int = 1) -> Report:
    """Execute the suite selected by the configuration and build the report."""
    spec = get_model(config.model, **config.params)
    bundle = spec.bundle()
    rng = np.random.default_rng(config.seed)
    records = _frame_records(spec, bundle, spec.sample_points(config.probes, rng), config.tol, workers)
    if config.space == "X":
        chart = XSpaceChart(spec, config.branch, config.make_profile())
        more, label = _x_records(config, spec, chart, rng, workers)
    else:
        prof = config.profile
        if prof["kind"] != "constant":
            raise ConfigError(
                "invalid value for key 'profile.kind': coframe-bundle runs need constant scales"
            )
        chart = PSpaceChart(spec, config.branch, prof["lam"], prof["mu"])
        more, label = _p_records(config, spec, chart, rng, workers)
    records.extend(more)
    environment = {
        "seed": config.seed,
        "probeBox": [list(b) for b in spec.safe_box],
        "conventions": {
            "curvaturePairingSign": pairing_sign(),
            "w14EigenvaluePlus": standard_phi(1.0, 1.0, 1).w14_eigenvalue,
            "w14EigenvalueMinus": standard_phi(1.0, 1.0, -1).w14_eigenvalue,
            "orientation": "fiber-first, o = f123 ^ e4567",
            "orientationFlips": [],
        },
    }
    return Report(
        config=config.to_dict(),
        records=records,
        environment=environment,
        torsion_label=label,
        passed=all(r.passed for r in records),
    )


def list_suites() -> str:
    lines = ["available checks (check id: verified identity):"]
    for check, anchor in SUITES.items():
        lines.append(f"  {check}: {anchor}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="g2frames", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute a verification run")
    runp.add_argument("--config", required=True, help="path to a JSON run configuration")
    runp.add_argument("--seed", type=int, default=None, help="override the config seed")
    runp.add_argument("--probes", type=int, default=None, help="override the probe count")
    runp.add_argument("--tol", type=float, default=None, help="override the base tolerance")
    runp.add_argument("--json", dest="json_out", default=None, help="write the JSON report here")
    runp.add_argument("--workers", type=int, default=1, help="thread workers for probe points")
    runp.add_argument("--quiet", action="store_true", help="suppress per-record lines")
    sub.add_parser("list-suites", help="enumerate checks and their anchors")
    args = parser.parse_args(argv)

    if args.command == "list-suites":
        print(list_suites())
        return 0

    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    overrides = {"seed": args.seed, "probes": args.probes, "tol": args.tol}
    for key, val in overrides.items():
        if val is not None:
            raw[key] = val
    try:
        config = RunConfig.from_dict(raw)
        report = run(config, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        for rec in report.records:
            stamp = "pass" if rec.passed else "FAIL"
            rel = "<=" if rec.comparison == "<=" else ">"
            print(f"[{stamp}] {rec.check}: {rec.value:.3e} {rel} {rec.tolerance:.1e}  ({rec.anchor})")
        print(f"label: {report.torsion_label}")
    out_path = args.json_out or config.report
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(report.to_json() + "\n")
    if not report.passed:
        failing = next(r for r in report.records if not r.passed)
        print(f"FAILED: {failing.check} = {failing.value:.6e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
