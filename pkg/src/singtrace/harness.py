"""Experiment orchestration: configs, check registry, reports, suites.

A check is a named, self-contained verification (exact identity suite,
character-theorem run, estimator battery, ...).  ``run`` executes the checks
requested by an :class:`ExperimentConfig` in a small thread pool (numpy
releases the GIL inside LAPACK) and assembles a :class:`Report` with one
record per check plus an environment stamp.  Reports are deterministic for
a fixed config and seed; the only varying fields are timestamps and
runtimes, which ``stable_digest`` excludes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import scipy

from . import hochschild as hh
from . import ideals, traces, triples
from .operators import Operator, singular_values

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "CheckRecord",
    "Report",
    "run",
    "suite",
    "builtin_chain",
    "CHECKS",
]


class ConfigError(ValueError):
    """Invalid experiment configuration (unknown check, bad field, ...)."""


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment run."""

    model: dict = field(default_factory=lambda: {"name": "circle", "N": 64})
    chain: object = None  # builtin name, inline dict, or None for default
    checks: list = field(default_factory=list)
    scheme: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    out: str = None
    seed: int = 0

    @classmethod
    def from_json(cls, text):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: line {exc.lineno}, "
                              f"column {exc.colno}: {exc.msg}") from exc
        known = {"model", "chain", "checks", "scheme", "tolerances", "out", "seed"}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**payload)
        cfg.validate()
        return cfg

    def validate(self):
        if not isinstance(self.model, dict) or "name" not in self.model:
            raise ConfigError("config.model must carry at least a 'name'")
        if self.model["name"] not in ("circle", "nc_torus", "toy"):
            raise ConfigError(f"unknown model {self.model['name']!r}")
        for name in self.checks:
            if name not in CHECKS:
                raise ConfigError(
                    f"unknown check {name!r}; known: {sorted(CHECKS)}")
        return self

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str)

    def digest(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


@dataclass
class CheckRecord:
    name: str
    passed: bool
    values: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    runtime_s: float = 0.0
    inputs_digest: str = ""
    curves: list = field(default_factory=list)  # (curve_name, header, rows)

    def as_dict(self, timing=True):
        out = {
            "name": self.name,
            "passed": self.passed,
            "inputs_digest": self.inputs_digest,
            "values": _jsonable(self.values),
            "residuals": _jsonable(self.residuals),
            "details": _jsonable(self.details),
        }
        if timing:
            out["runtime_s"] = round(self.runtime_s, 3)
        return out


def _jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    return str(obj)


@dataclass
class Report:
    records: list
    config: ExperimentConfig
    environment: dict

    @property
    def all_passed(self):
        return all(r.passed for r in self.records)

    def as_dict(self, timing=True):
        return {
            "environment": self.environment if timing else {
                k: v for k, v in self.environment.items()
                if k not in ("generated_at",)},
            "config_digest": self.config.digest(),
            "all_passed": self.all_passed,
            "records": [r.as_dict(timing=timing) for r in self.records],
        }

    def to_json(self, timing=True):
        return json.dumps(self.as_dict(timing=timing), indent=2, sort_keys=True)

    def stable_digest(self):
        """Digest of everything except timestamps and runtimes."""
        return hashlib.sha256(self.to_json(timing=False).encode()).hexdigest()

    def to_markdown(self):
        lines = ["# singtrace report", ""]
        lines.append(f"- config digest: `{self.config.digest()}`")
        lines.append(f"- all passed: **{self.all_passed}**")
        lines.append("")
        lines.append("| check | passed | values | residuals | runtime (s) |")
        lines.append("|---|---|---|---|---|")
        for r in self.records:
            vals = "; ".join(f"{k}={_fmt(v)}" for k, v in r.values.items())
            res = "; ".join(f"{k}={_fmt(v)}" for k, v in r.residuals.items())
            lines.append(f"| {r.name} | {'PASS' if r.passed else 'FAIL'} | "
                         f"{vals} | {res} | {r.runtime_s:.2f} |")
        return "\n".join(lines) + "\n"

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json())
        (out / "report.md").write_text(self.to_markdown())
        for rec in self.records:
            for curve_name, header, rows in rec.curves:
                tag = rec.name.replace(" ", "_").replace(":", "_")
                stem = f"{tag}_{curve_name}"
                with open(out / f"{stem}.csv", "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(header)
                    writer.writerows(rows)
                with open(out / f"{stem}.dat", "w") as fh:
                    fh.write("# " + " ".join(header) + "\n")
                    for row in rows:
                        fh.write(" ".join(repr(float(x)) for x in row) + "\n")
        return out


def _fmt(v):
    if isinstance(v, complex):
        return f"{v.real:.4g}{v.imag:+.4g}i"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _environment_stamp(config):
    return {
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
        "threads": os.environ.get("SINGTRACE_THREADS", ""),
        "seed": config.seed,
    }


# -- builtin chains ---------------------------------------------------------------


def builtin_chain(model, name=None):
    """Named chains per model; None selects the model's default cycle."""
    kind = model.name.split("+")[0]
    if name in (None, "default"):
        name = {"circle": "winding", "nc_torus": "volume", "toy": "toy-volume"}[kind]
    if name == "winding":
        return hh.circle_winding_cycle(model)
    if name == "volume":
        return hh.nc_torus_volume_cycle(model)
    if name == "toy-volume":
        w = model.monomial((1,))
        if model.p == 1:
            return hh.Chain.from_elements(model, [(1.0, [w.adjoint(), w])])
        letters = [model.monomial((j,)) for j in range(1, model.p + 1)]
        return hh.antisymmetrized_cycle(model, letters)
    if name == "parity":
        if kind == "nc_torus":
            U = model.monomial((1, 0))
            return hh.Chain.from_elements(model, [(1.0, [U.adjoint(), U])])
        g = model.monomial((1,))
        g2 = model.monomial((2,))
        return hh.antisymmetrized_cycle(model, [g, g2])
    raise ConfigError(f"unknown builtin chain {name!r}")


def _load_chain(model, spec):
    if spec is None or isinstance(spec, str):
        return builtin_chain(model, spec)
    if isinstance(spec, dict):
        return hh.chain_from_json(model, json.dumps(spec))
    raise ConfigError("chain must be a builtin name or an inline JSON object")


# -- check implementations ----------------------------------------------------------


class _Context:
    def __init__(self, config):
        self.config = config
        spec = dict(config.model)
        self.model = triples.build_model(
            spec["name"], spec.get("N", 64), theta=spec.get("theta"),
            p=spec.get("p"), buffer=spec.get("buffer"))
        self.chain = _load_chain(self.model, config.chain)
        self.rng = np.random.default_rng(config.seed)
        sch = dict(config.scheme)
        self.scheme = traces.ExtendedLimitScheme(**sch) if sch else \
            traces.ExtendedLimitScheme()
        self.tol = dict(config.tolerances)
        stamp = (config.digest() + self.model.model_id
                 + json.dumps(sorted(map(str, self.chain.terms.items()))))
        self.inputs_digest = hashlib.sha256(stamp.encode()).hexdigest()[:16]

    def tolerance(self, key, default):
        return float(self.tol.get(key, default))


def _check_cycle(ctx):
    ok = hh.is_cycle(ctx.chain)
    return CheckRecord("cycle", passed=ok,
                       values={"degree": ctx.chain.degree,
                               "terms": len(ctx.chain.terms)})


def _check_chern(ctx):
    res = hh.chern(ctx.chain, ctx.model, strict=False)
    deltas = res.deltas
    tol = ctx.tolerance("chern_convergence", 0.1)
    converged = (not deltas) or deltas[-1] <= max(tol * abs(res.value), tol)
    rows = [(r, v.real, v.imag) for r, v in sorted(res.history.items())]
    return CheckRecord(
        "chern", passed=bool(converged),
        values={"chern": res.value},
        residuals={"last_window_delta": deltas[-1] if deltas else 0.0},
        details=res.as_dict(),
        curves=[("convergence", ["radius", "re", "im"], rows)])


def _pairing_series(ctx):
    q = ctx.chain.degree
    om = hh.omega(ctx.chain, ctx.model, strict=False)
    V = ctx.model.compress(triples.resolvent_weight(ctx.model, q))
    T = om @ V
    return ideals.eigenvalue_partial_sums(T, label="pairing")


def _check_eigen_sums(ctx):
    series = _pairing_series(ctx)
    ch = hh.chern(ctx.chain, ctx.model, strict=False).value
    tol = ctx.tolerance("sum_tol", max(0.5, 0.25 * abs(ch)))
    verdict = ideals.universal_measurability_test(
        series, tol=tol, z_tol=max(min(0.5 * abs(ch), 0.5), 0.02),
        window=ctx.model.fit_window())
    rows = [(int(n), series.sums[n].real, series.sums[n].imag)
            for n in verdict.fit.grid]
    return CheckRecord(
        "eigen-sums",
        passed=verdict.kind != ideals.INCONCLUSIVE,
        values={"z": verdict.z, "verdict": verdict.kind},
        residuals={"residual_sup": verdict.fit.residual_sup},
        details=verdict.as_dict(),
        curves=[("partial_sums", ["n", "re_sum", "im_sum"], rows)])


def _check_heat(ctx):
    ch = hh.chern(ctx.chain, ctx.model, strict=False).value
    res = hh.heat_cycle_trace(ctx.chain, ctx.model)
    tol = ctx.tolerance("heat_rel", 0.15) * abs(ch)
    gap = abs(res["z"] - ch)
    rows = list(zip(res["s"], [v.real for v in res["values"]],
                    [v.imag for v in res["values"]]))
    return CheckRecord(
        "heat", passed=bool(gap <= tol),
        values={"z": res["z"], "chern": ch},
        residuals={"gap": gap, "fit_residual": res["residual_sup"]},
        curves=[("heat_trace", ["s", "re", "im"], rows)])


def _check_dixmier(ctx):
    series = _pairing_series(ctx)
    ch = hh.chern(ctx.chain, ctx.model, strict=False).value
    est = traces.dixmier_logmean(series, ctx.scheme,
                                 n_max=ctx.model.reliable_count - 1)
    tol = ctx.tolerance("dixmier_rel", 0.15) * max(abs(ch), 1e-12)
    gap = abs(est.z - ch)
    return CheckRecord(
        "dixmier", passed=bool(gap <= tol),
        values={"z": est.z, "chern": ch},
        residuals={"gap": gap, "oscillation": est.residual_sup},
        details=est.as_dict())


def _check_measure(ctx):
    report = hh.main_theorem_check(ctx.chain, ctx.model)
    values = {"mode": report["mode"], "chern": report["chern"],
              "z_spec": report["z_spec"]}
    residuals = {}
    if report["mode"] == "character":
        values["z_heat"] = report["z_heat"]
        residuals = {"gap_spec": report["gap_spec"],
                     "gap_heat": report["gap_heat"]}
    return CheckRecord("measure", passed=report["passed"], values=values,
                       residuals=residuals, details=report)


def _check_reduce(ctx):
    report = hh.reduction_partial_sum_check(ctx.chain, ctx.model)
    return CheckRecord(
        "reduce", passed=report["passed"],
        values={"z": report["z"], "sum_sup": report["sum_sup"]},
        residuals={"residual_sup": report["residual_sup"]},
        details=report)


def _check_identity_suite(ctx):
    model, rng = ctx.model, ctx.rng
    tol = ctx.tolerance("identity", 1e-10)
    sub = {}
    c = ctx.chain
    sub["bob"] = hh.bob_identity_check(c, model, tol=tol)
    gens = list(model.generators().values())
    g = gens[0]
    h = gens[-1]
    sub["appendix"] = hh.appendix_identity_checks(g, h, model, tol=tol)
    # b o b = 0 on a random chain of degree 3
    rank = model.word_rank
    def rand_elem():
        word = tuple(int(rng.integers(-2, 3)) for _ in range(rank))
        return model.monomial(word, coeff=complex(rng.standard_normal(),
                                                  rng.standard_normal()))
    rand = hh.Chain.from_elements(
        model, [(1.0, [rand_elem() for _ in range(4)]) for _ in range(3)])
    sub["bb_zero"] = {"passed": hh.boundary(hh.boundary(rand)).is_zero()}
    # Leibniz for [D, .] and [|D|, .] on interior modes
    a, b = rand_elem(), rand_elem()
    A, Bv = model.realize(a), model.realize(b)
    AB = model.realize(a * b)
    leib_d = model.interior_norm(
        triples.partial_d(a * b, model) - (triples.partial_d(a, model) @ Bv)
        - (A @ triples.partial_d(b, model))
        - (model.D @ (AB - A @ Bv) - (AB - A @ Bv) @ model.D))
    # the AB - A@Bv corrections cancel edge defects of the symbolic product
    leib_delta = model.interior_norm(
        triples.delta(a * b, model) - (triples.delta(a, model) @ Bv)
        - (A @ triples.delta(b, model))
        - (model.absD @ (AB - A @ Bv) - (AB - A @ Bv) @ model.absD))
    sub["leibniz"] = {"partial_d": float(leib_d), "delta": float(leib_delta),
                      "passed": bool(leib_d <= tol and leib_delta <= tol)}
    # grading relations on even models
    if model.Gamma is not None:
        from .operators import anticommutator, commutator
        g_anti = anticommutator(model.Gamma, model.D).norm_bound()
        g_comm = max(commutator(model.Gamma, model.realize(x)).norm_bound()
                     for x in gens)
        g_sq = (model.Gamma @ model.Gamma
                - Operator(np.ones(model.dim, complex))).norm_bound()
        sub["grading"] = {
            "anticommutator_D": float(g_anti), "commutator_algebra": float(g_comm),
            "gamma_squared": float(g_sq),
            "passed": bool(max(g_anti, g_comm, g_sq) <= tol)}
    passed = all(entry["passed"] for entry in sub.values())
    worst = max(
        (v for entry in sub.values() for k, v in entry.items()
         if isinstance(v, float)), default=0.0)
    return CheckRecord("identity-suite", passed=passed,
                       values={"checks": len(sub)},
                       residuals={"worst_residual": worst}, details=sub)


def _check_summability(ctx):
    diag = triples.summability_report(ctx.model)
    slope = diag.fitted_decay_exponent
    ok = abs(slope + 1.0) <= ctx.tolerance("decay_slope", 0.3)
    return CheckRecord(
        "summability", passed=bool(ok and diag.verdicts["weak_lp"]),
        values={"quasi_norm": diag.quasi_norm_pinf,
                "lorentz_norm": diag.lorentz_norm,
                "decay_exponent": slope},
        details={"verdicts": diag.verdicts})


def _harmonic_operator(N):
    return Operator(1.0 / (np.arange(N) + 1.0), label="diag(1/(k+1))")


def _check_diag_oracles(ctx):
    N = ctx.config.model.get("N", 100_000)
    V = _harmonic_operator(N)
    mu = singular_values(V)
    z_dix = traces.dixmier_logmean(mu, ctx.scheme)
    z_xi = traces.heat_xi(V, ctx.scheme)
    z_heat = traces.heat_fit(traces.heat_functional(None, V, 2.0))
    A = Operator(((-1.0) ** np.arange(N)).astype(complex), label="alt signs")
    alt = traces.measurability_criterion_check(A, V, alpha=2.0)
    tol = ctx.tolerance("diag_z", 0.05)
    alt_tol = ctx.tolerance("alt_z", 0.02)
    ok = (abs(z_dix.z - 1) <= tol and abs(z_xi.z - 1) <= tol
          and abs(z_heat.z - 1) <= tol
          and abs(alt["z_heat"]) <= alt_tol and abs(alt["z_spec"]) <= alt_tol)
    return CheckRecord(
        "diag-oracles", passed=bool(ok),
        values={"dixmier": z_dix.z, "heat_xi": z_xi.z, "heat": z_heat.z,
                "alt_z_heat": alt["z_heat"], "alt_z_spec": alt["z_spec"]},
        residuals={"dixmier": z_dix.residual_sup, "heat_xi": z_xi.residual_sup,
                   "heat": z_heat.residual_sup})


def _check_scalings(ctx):
    N = ctx.config.model.get("N", 100_000)
    V = _harmonic_operator(N)
    sub = {}
    ok = True
    for alpha in (1.5, 2.0):
        rep = traces.lemma_estimate_scalings(V, alpha)
        sub[f"alpha={alpha}"] = rep
        ok = ok and rep["passed"] and rep["xi_trend_negative"]
    return CheckRecord(
        "scalings", passed=bool(ok),
        values={f"slopes_a{alpha}": (sub[f"alpha={alpha}"]["slope_saturating"],
                                     sub[f"alpha={alpha}"]["slope_counting"])
                for alpha in (1.5, 2.0)},
        details=sub)


def _check_scheme_robustness(ctx):
    N = ctx.config.model.get("N", 100_000)
    V = _harmonic_operator(N)
    mu = singular_values(V)
    zs = {}
    for r in (1.5, 2.0, 3.0):
        sch = traces.ExtendedLimitScheme(ratio=r,
                                         averaging=ctx.scheme.averaging)
        zs[r] = traces.dixmier_logmean(mu, sch).z
    drift = max(abs(a - b) for a in zs.values() for b in zs.values())
    tol = ctx.tolerance("scheme_drift", 0.02)
    return CheckRecord(
        "scheme-robustness", passed=bool(drift <= tol),
        values={f"z_r{r}": z for r, z in zs.items()},
        residuals={"drift": drift})


def _check_concordance(ctx):
    """Partial-sum, heat and Dixmier estimates of one pairing must agree
    pairwise within their summed reported residuals."""
    model = ctx.model
    q = ctx.chain.degree
    om = hh.omega(ctx.chain, model, strict=False)
    V = model.compress(triples.resolvent_weight(model, q))
    series = ideals.eigenvalue_partial_sums(om @ V, label="pairing")
    window = model.fit_window()
    fit = ideals.log_fit(series, window=window)
    dix = traces.dixmier_logmean(series, ctx.scheme,
                                 n_max=model.reliable_count - 1)
    n_lo, n_hi = 8, max(model.reliable_count // 8, 32)
    samples = traces.heat_functional(om, V, alpha=1.0 + 1.0 / q,
                                     grid=ideals.geometric_grid(n_lo, n_hi,
                                                                math.sqrt(2.0)))
    heat = traces.heat_fit(samples)
    ests = {"partial_sum": (fit.z, fit.residual_sup),
            "heat": (heat.z, heat.residual_sup),
            "dixmier": (dix.z, dix.residual_sup)}
    floor = ctx.tolerance("concordance_floor", 0.02)
    pairs = {}
    ok = True
    names = list(ests)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            gap = abs(ests[a][0] - ests[b][0])
            budget = ests[a][1] + ests[b][1] + floor
            pairs[f"{a}|{b}"] = {"gap": gap, "budget": budget,
                                 "passed": bool(gap <= budget)}
            ok = ok and gap <= budget
    return CheckRecord(
        "concordance", passed=bool(ok),
        values={name: z for name, (z, _r) in ests.items()},
        residuals={name: r for name, (_z, r) in ests.items()},
        details=pairs)


def _check_modulated(ctx):
    N = min(ctx.config.model.get("N", 4096), 4096)
    V = _harmonic_operator(N)
    phases = np.exp(2j * np.pi * ctx.rng.random(N))
    A = Operator(phases, label="random phases", unitary=True)
    rep = traces.modulated_comparison(A, V)
    return CheckRecord("modulated", passed=rep["passed"],
                       values={"sup_gap": rep["sup_gap"], "tol": rep["tol"]})


def _check_cutoff(ctx):
    N = ctx.config.model.get("N", 100_000)
    V = _harmonic_operator(N)
    rep = traces.cesaro_cutoff_comparison(None, V, alpha=2.0, scheme=ctx.scheme)
    tol = ctx.tolerance("cutoff_gap", 0.05)
    return CheckRecord(
        "cutoff", passed=bool(rep["gap"] <= tol),
        values={"z_heat": rep["z_heat"], "z_cutoff": rep["z_cutoff"]},
        residuals={"gap": rep["gap"]})


CHECKS = {
    "cycle": _check_cycle,
    "chern": _check_chern,
    "eigen-sums": _check_eigen_sums,
    "heat": _check_heat,
    "dixmier": _check_dixmier,
    "measure": _check_measure,
    "reduce": _check_reduce,
    "identity-suite": _check_identity_suite,
    "summability": _check_summability,
    "diag-oracles": _check_diag_oracles,
    "scalings": _check_scalings,
    "scheme-robustness": _check_scheme_robustness,
    "concordance": _check_concordance,
    "modulated": _check_modulated,
    "cutoff": _check_cutoff,
}


def _max_workers():
    env = os.environ.get("SINGTRACE_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def run(config):
    """Execute the configured checks; returns a Report (writes it if out set)."""
    config.validate()
    ctx = _Context(config)
    names = list(config.checks)  # empty list -> empty passing report
    records = []
    workers = _max_workers()

    def execute(name):
        t0 = time.perf_counter()
        rec = CHECKS[name](ctx)
        rec.runtime_s = time.perf_counter() - t0
        rec.inputs_digest = ctx.inputs_digest
        return rec

    if workers == 1 or len(names) == 1:
        records = [execute(n) for n in names]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(execute, names))
    records.sort(key=lambda r: r.name)
    report = Report(records=records, config=config,
                    environment=_environment_stamp(config))
    if config.out:
        report.write(config.out)
    return report


def _merge(reports, config):
    records = []
    for tag, rep in reports:
        for rec in rep.records:
            rec = CheckRecord(
                name=f"{tag}:{rec.name}", passed=rec.passed, values=rec.values,
                residuals=rec.residuals, details=rec.details,
                runtime_s=rec.runtime_s, inputs_digest=rec.inputs_digest,
                curves=rec.curves)
            records.append(rec)
    records.sort(key=lambda r: r.name)
    return Report(records=records, config=config,
                  environment=_environment_stamp(config))


def suite(name, out=None, seed=0):
    """Curated runs: 'quick' (N<=512, <60 s) or 'full' (acceptance scale)."""
    if name == "quick":
        plan = [
            ("circle256", ExperimentConfig(
                model={"name": "circle", "N": 256},
                checks=["identity-suite", "cycle", "chern", "measure",
                        "reduce", "heat", "summability"], seed=seed)),
            ("torus16", ExperimentConfig(
                model={"name": "nc_torus", "N": 16},
                checks=["identity-suite", "cycle", "chern", "measure"],
                seed=seed)),
            ("diag1e4", ExperimentConfig(
                model={"name": "toy", "N": 10_000},
                checks=["diag-oracles", "scalings", "scheme-robustness",
                        "cutoff"], seed=seed)),
        ]
    elif name == "full":
        plan = [
            ("circle256", ExperimentConfig(
                model={"name": "circle", "N": 256},
                checks=["identity-suite"], seed=seed)),
            ("torus32", ExperimentConfig(
                model={"name": "nc_torus", "N": 32},
                checks=["identity-suite", "cycle"], seed=seed)),
            ("diag1e5", ExperimentConfig(
                model={"name": "toy", "N": 100_000},
                checks=["diag-oracles", "scalings", "scheme-robustness",
                        "cutoff", "modulated"], seed=seed)),
            ("circle2048", ExperimentConfig(
                model={"name": "circle", "N": 2048},
                checks=["cycle", "chern", "measure", "reduce", "heat",
                        "eigen-sums", "dixmier", "concordance"], seed=seed)),
            ("torus64", ExperimentConfig(
                model={"name": "nc_torus", "N": 64},
                checks=["cycle", "chern", "measure", "concordance"],
                seed=seed)),
            ("torus64-parity", ExperimentConfig(
                model={"name": "nc_torus", "N": 64}, chain="parity",
                checks=["cycle", "measure"], seed=seed)),
            ("toy1e5", ExperimentConfig(
                model={"name": "toy", "N": 100_000},
                checks=["summability", "measure"], seed=seed)),
        ]
    else:
        raise ConfigError(f"unknown suite {name!r} (use quick|full)")
    reports = [(tag, run(cfg)) for tag, cfg in plan]
    merged = _merge(reports, ExperimentConfig(model={"name": "circle", "N": 0},
                                              checks=[], seed=seed))
    if out:
        merged.write(out)
    return merged
