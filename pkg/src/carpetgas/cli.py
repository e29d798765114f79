"""Command-line pipeline over the carpet / spectrum / thermodynamics modules.

Stages write their artifacts under an output directory with content-hash
provenance in the file names; downstream stages reuse cached upstream
artifacts instead of recomputing them.  All writes go through a temp file
and an atomic rename, floats are emitted with 17 significant digits, and a
rerun with the same inputs produces byte-identical files.

The cache directory defaults to <out>/cache and can be redirected with the
CARPETGAS_CACHE environment variable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import eigensolve, geometry, oracle, thermo, trace, zeta
from .errors import DIVERGED, CarpetGasError
from .geometry import CarpetSpec
from .graph import build_graph, degree_stats, export_graph

FLOAT_FMT = "%.17g"
CACHE_ENV = "CARPETGAS_CACHE"

_EUCLID_DIMS = {"interval": 1, "square": 2, "cube": 3}


def _f(x) -> str:
    return FLOAT_FMT % float(x)


def _json_safe(obj):
    """Recursively convert to JSON-serializable values with stable floats."""
    if obj is DIVERGED:
        return "DIVERGED"
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, complex):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float):
        # round-trip through the fixed format so emitted JSON is stable
        return float(FLOAT_FMT % obj)
    return obj


def _dump_json(payload) -> str:
    return json.dumps(_json_safe(payload), indent=1, sort_keys=True) + "\n"


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit(payload) -> None:
    sys.stdout.write(_dump_json(payload))


def _key(*parts) -> str:
    blob = "|".join(str(p) for p in parts)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _error_exit(exc: BaseException) -> int:
    # KeyError wraps its message in repr quotes; unwrap for readable JSON
    message = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
    payload = {"error": type(exc).__name__, "message": str(message)}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return 1


# ---------------------------------------------------------------------------
# configuration plumbing


def _apply_config_file(ns: argparse.Namespace) -> None:
    """Fill unset options from a JSON config file; command-line flags win."""
    if not getattr(ns, "config", None):
        return
    with open(ns.config) as fh:
        base = json.load(fh)
    if not isinstance(base, dict):
        raise CarpetGasError("config file must hold a JSON object")
    for key, value in base.items():
        attr = key.replace("-", "_")
        if hasattr(ns, attr) and getattr(ns, attr) is None:
            setattr(ns, attr, value)


def _resolve_spec(ns: argparse.Namespace) -> CarpetSpec:
    preset = getattr(ns, "preset", None)
    path = getattr(ns, "spec", None)
    if preset and path:
        raise CarpetGasError("give either --preset or --spec, not both")
    if preset:
        return geometry.preset(preset)
    if path:
        return geometry.load_spec(path)
    raise CarpetGasError("a carpet is required: pass --preset or --spec")


def _out_dir(ns: argparse.Namespace) -> str:
    out = getattr(ns, "out", None) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _cache_dir(ns: argparse.Namespace) -> str:
    cache = os.environ.get(CACHE_ENV) or os.path.join(_out_dir(ns), "cache")
    os.makedirs(cache, exist_ok=True)
    return cache


def _level(ns: argparse.Namespace) -> int:
    if getattr(ns, "level", None) is None:
        raise CarpetGasError("this stage needs --level")
    return int(ns.level)


# ---------------------------------------------------------------------------
# cached stage plumbing


def _spectrum_for(ns, spec: CarpetSpec):
    """Load the level spectrum from the cache, computing it on a miss."""
    level = _level(ns)
    bc = getattr(ns, "bc", None) or "neumann"
    method = getattr(ns, "method", None) or "auto"
    cap = int(getattr(ns, "cap", None) or eigensolve.DENSE_CAP)
    budget = int(getattr(ns, "budget", None) or 400)
    key = _key("spectrum", spec.spec_hash(), level, bc, method, cap, budget)
    path = os.path.join(_cache_dir(ns), f"spectrum-{key}.json")
    if os.path.exists(path):
        return eigensolve.load_spectrum(path), path, True
    g = build_graph(spec, level, getattr(ns, "adjacency", None) or "face")
    spectrum = eigensolve.compute_spectrum(g, bc=bc, method=method, cap=cap,
                                           budget=budget)
    eigensolve.save_spectrum(spectrum, path)
    return spectrum, path, False


def _analysis_for(ns, spec: CarpetSpec):
    """Trace analysis with the fitted model cached alongside the spectrum."""
    spectrum, spath, s_cached = _spectrum_for(ns, spec)
    p_max = int(getattr(ns, "p_max", None) or trace.P_MAX_DEFAULT)
    key = _key("trace", spec.spec_hash(), _level(ns), spectrum.bc,
               spectrum.n, p_max)
    mpath = os.path.join(_cache_dir(ns), f"model-{key}.json")
    result = trace.analyze(spectrum, spec=spec, p_max=p_max)
    trace.save_model(result["model"], mpath)
    result.update(spectrum=spectrum, spectrum_path=spath,
                  spectrum_cached=s_cached, model_path=mpath, key=key)
    return result


def _model_for_thermo(ns):
    """Heat-trace model from --euclid, a flat --ds value, or a carpet chain."""
    euclid = getattr(ns, "euclid", None)
    ds_flat = getattr(ns, "ds", None)
    if euclid is not None:
        if euclid not in _EUCLID_DIMS:
            raise CarpetGasError(f"unknown euclid geometry {euclid!r}")
        bc = getattr(ns, "bc", None) or "dirichlet"
        dim = _EUCLID_DIMS[euclid]
        return oracle.box_model(dim, bc), f"euclid-{euclid}-{bc}"
    if ds_flat is not None:
        ds = float(ds_flat)
        coef = (4.0 * math.pi) ** (-ds / 2.0)
        model = trace.HeatTraceModel(
            terms=[trace.ModelTerm(0, 0, complex(ds / 2.0), complex(coef))],
            period=1.0, d_s=ds)
        return model, f"flat-ds-{_f(ds)}"
    spec = _resolve_spec(ns)
    result = _analysis_for(ns, spec)
    return result["model"], f"carpet-{result['key']}"


# ---------------------------------------------------------------------------
# carpet stage


def cmd_carpet_validate(ns) -> int:
    spec = _resolve_spec(ns)
    report = geometry.validate_spec(spec)
    payload = {
        "stage": "carpet-validate",
        "name": spec.name,
        "d": spec.d,
        "l": spec.l,
        "m": spec.m,
        "spec_hash": spec.spec_hash(),
        "validation": report.as_dict(),
    }
    if report.ok:
        payload["dimensions"] = geometry.dimension_bounds(spec, check=False).as_dict()
    path = os.path.join(_out_dir(ns), f"carpet-{spec.spec_hash()}.json")
    _write_atomic(path, _dump_json(payload))
    payload["artifact"] = path
    _emit(payload)
    return 0 if report.ok else 1


def cmd_carpet_info(ns) -> int:
    if getattr(ns, "preset", None) is None and getattr(ns, "spec", None) is None:
        rows = []
        for name in geometry.preset_names():
            spec = geometry.preset(name)
            rows.append({
                "name": name,
                "d": spec.d,
                "l": spec.l,
                "m": spec.m,
                "d_h": math.log(spec.m) / math.log(spec.l),
                "ds_published": list(spec.ds_published) if spec.ds_published else None,
                "ds_numeric": spec.ds_numeric,
            })
        _emit({"stage": "carpet-info", "presets": rows})
        return 0
    spec = _resolve_spec(ns)
    payload = {
        "stage": "carpet-info",
        "name": spec.name,
        "spec_hash": spec.spec_hash(),
        "text": geometry.format_spec_text(spec),
        "dimensions": geometry.dimension_bounds(spec).as_dict(),
        "ds_published": list(spec.ds_published) if spec.ds_published else None,
        "ds_numeric": spec.ds_numeric,
    }
    _emit(payload)
    return 0


# ---------------------------------------------------------------------------
# graph / spectrum stages


def cmd_graph_build(ns) -> int:
    spec = _resolve_spec(ns)
    level = _level(ns)
    adjacency = getattr(ns, "adjacency", None) or "face"
    key = _key("graph", spec.spec_hash(), level, adjacency)
    out = _out_dir(ns)
    edges_path = os.path.join(out, f"graph-{key}.edges")
    meta_path = os.path.join(out, f"graph-{key}.json")
    cached = os.path.exists(edges_path) and os.path.exists(meta_path)
    if cached:
        with open(meta_path) as fh:
            meta = json.load(fh)
    else:
        g = build_graph(spec, level, adjacency)
        export_graph(g, edges_path + ".tmp", meta_path + ".tmp")
        os.replace(edges_path + ".tmp", edges_path)
        os.replace(meta_path + ".tmp", meta_path)
        meta = {
            "n_vertices": g.n_vertices,
            "n_edges": g.n_edges,
            "n_boundary": int(g.boundary.size),
            "degrees": degree_stats(g),
        }
    _emit({
        "stage": "graph-build",
        "cached": cached,
        "edges": edges_path,
        "meta": meta_path,
        "n_vertices": meta["n_vertices"],
        "n_edges": meta["n_edges"],
        "n_boundary": meta["n_boundary"],
    })
    return 0


def cmd_spectrum_compute(ns) -> int:
    spec = _resolve_spec(ns)
    spectrum, path, cached = _spectrum_for(ns, spec)
    _emit({
        "stage": "spectrum-compute",
        "cached": cached,
        "artifact": path,
        "n": spectrum.n,
        "bc": spectrum.bc,
        "method": spectrum.method,
        "num_zero_modes": spectrum.num_zero_modes,
        "lambda_max": spectrum.lambda_max,
    })
    return 0


# ---------------------------------------------------------------------------
# trace stage


_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Render the Weyl-ratio curve W(s) = N(s)/s^(d_s/2) from {csv}.\"\"\"
import csv

import matplotlib.pyplot as plt

s, W = [], []
with open({csv!r}) as fh:
    for row in csv.DictReader(fh):
        s.append(float(row["s"]))
        W.append(float(row["W"]))

fig, ax = plt.subplots(figsize=(6.0, 3.6))
ax.semilogx(s, W, lw=1.0)
ax.set_xlabel("s = lambda / lambda_1")
ax.set_ylabel("W(s)")
ax.set_title("Weyl ratio, d_s = {ds}")
fig.tight_layout()
fig.savefig({png!r}, dpi=160)
print("wrote", {png!r})
"""


def cmd_trace_analyze(ns) -> int:
    spec = _resolve_spec(ns)
    result = _analysis_for(ns, spec)
    d_s = result["d_s"]
    model = result["model"]
    key = result["key"]
    out = _out_dir(ns)

    # Weyl-ratio samples (s, W(s)): W = N(s)/s^(d_s/2) with s = lambda/lambda_1
    x, W = trace.counting_ratio(result["spectrum"], d_s)
    lines = ["s,W"]
    for xi, wi in zip(x, W):
        lines.append(f"{_f(math.exp(xi))},{_f(wi)}")
    csv_path = os.path.join(out, f"weyl-{key}.csv")
    _write_atomic(csv_path, "\n".join(lines) + "\n")

    plot_path = os.path.join(out, f"weyl_plot-{key}.py")
    _write_atomic(plot_path, _PLOT_SCRIPT.format(
        csv=os.path.basename(csv_path), ds=_f(d_s),
        png=os.path.basename(csv_path).replace(".csv", ".png")))

    ghat_lines = ["k,p,re_exponent,im_exponent,re_coefficient,im_coefficient"]
    for term in sorted(model.terms, key=lambda t: (t.k, t.p)):
        ghat_lines.append(",".join([
            str(term.k), str(term.p),
            _f(term.exponent.real), _f(term.exponent.imag),
            _f(term.coefficient.real), _f(term.coefficient.imag),
        ]))
    ghat_path = os.path.join(out, f"ghat-{key}.csv")
    _write_atomic(ghat_path, "\n".join(ghat_lines) + "\n")

    _emit({
        "stage": "trace-analyze",
        "d_s": d_s,
        "d_s_stderr": result["d_s_stderr"],
        "period": result["period"],
        "log_period_ratio": result["period"] / math.log(spec.m ** (2.0 / d_s)),
        "bounds": geometry.dimension_bounds(spec).as_dict(),
        "spectrum_cached": result["spectrum_cached"],
        "model": result["model_path"],
        "weyl_csv": csv_path,
        "weyl_plot": plot_path,
        "ghat_csv": ghat_path,
    })
    return 0


# ---------------------------------------------------------------------------
# zeta stage


def _extension_for(ns):
    """Build the continuation from --euclid (exact tail) or a carpet chain."""
    gamma = float(getattr(ns, "gamma", None) or 0.0)
    n_max = int(getattr(ns, "nmax", None) or zeta.N_MAX_DEFAULT)
    euclid = getattr(ns, "euclid", None)
    if euclid is not None:
        if euclid not in _EUCLID_DIMS:
            raise CarpetGasError(f"unknown euclid geometry {euclid!r}")
        bc = getattr(ns, "bc", None) or "dirichlet"
        dim = _EUCLID_DIMS[euclid]
        box = oracle.unit_box(dim, bc)
        model = oracle.box_model(dim, bc)
        t1 = float(getattr(ns, "t1", None) or 1.0)

        def exact_trace(t, _box=box):
            return oracle.box_trace_exact(_box, t)

        ext = zeta.build_extension(model, gamma=gamma, tail=exact_trace, t1=t1,
                                   n_max=n_max)
        return ext, f"euclid-{euclid}-{bc}-g{_f(gamma)}-t{_f(t1)}"
    spec = _resolve_spec(ns)
    result = _analysis_for(ns, spec)
    spectrum = result["spectrum"]
    if gamma == 0.0 and spectrum.num_zero_modes:
        gamma = 1.0  # Neumann zero mode needs a positive shift
    t1 = float(getattr(ns, "t1", None)
               or min(1.0, 35.0 / (spectrum.lambda_max + gamma)))
    ext = zeta.build_extension(result["model"], gamma=gamma, tail=spectrum,
                               t1=t1, n_max=n_max)
    return ext, f"carpet-{result['key']}-g{_f(gamma)}-t{_f(t1)}"


def cmd_zeta_eval(ns) -> int:
    if getattr(ns, "s", None) is None:
        raise CarpetGasError("zeta eval needs --s (complex, e.g. '-0.5' or '1+2j')")
    s = complex(ns.s)
    ext, tag = _extension_for(ns)
    value = zeta.zeta_extended(ext, s)
    key = _key("zeta-eval", tag, _f(s.real), _f(s.imag))
    csv_path = os.path.join(_out_dir(ns), f"zeta_eval-{key}.csv")
    _write_atomic(csv_path, "re_s,im_s,re_value,im_value,error_bound\n"
                  + ",".join([_f(s.real), _f(s.imag), _f(value.real),
                              _f(value.imag), _f(ext.last_error)]) + "\n")
    _emit({
        "stage": "zeta-eval",
        "source": tag,
        "s": s,
        "value": value,
        "error_bound": ext.last_error,
        "artifact": csv_path,
    })
    return 0


def cmd_zeta_poles(ns) -> int:
    ext, tag = _extension_for(ns)
    key = _key("zeta-poles", tag)
    path = os.path.join(_out_dir(ns), f"zeta_poles-{key}.csv")
    zeta.export_poles_csv(ext, path + ".tmp")
    os.replace(path + ".tmp", path)
    towers = sorted({(p.k, p.p) for p in ext.poles})
    _emit({
        "stage": "zeta-poles",
        "source": tag,
        "n_poles": len(ext.poles),
        "towers": [list(t) for t in towers],
        "artifact": path,
    })
    return 0


def cmd_zeta_casimir(ns) -> int:
    if getattr(ns, "gamma", None):
        raise CarpetGasError("casimir energy is defined at gamma = 0")
    ns.gamma = 0.0
    ext, tag = _extension_for(ns)
    energy = zeta.casimir_energy(ext)
    _emit({
        "stage": "zeta-casimir",
        "source": tag,
        "energy": energy,
        "definition": "E = (1/2) zeta(-1/2) at gamma = 0",
    })
    return 0


# ---------------------------------------------------------------------------
# thermo stage


def cmd_thermo_bec(ns) -> int:
    spec = _resolve_spec(ns)
    beta = float(getattr(ns, "beta", None) or 1.0)
    fitted = None
    model = None
    chain = {}
    if getattr(ns, "level", None) is not None:
        result = _analysis_for(ns, spec)
        fitted = model = result["model"]
        chain = {"spectrum_cached": result["spectrum_cached"],
                 "model_artifact": result["model_path"]}
    report = thermo.bec_diagnose(spec, fitted=fitted)
    payload = {
        "stage": "thermo-bec",
        "verdict": report.verdict,
        "d_s_lower": report.d_s_lower,
        "d_s_upper": report.d_s_upper,
        "d_s_fitted": report.d_s_fitted,
        "transient": report.transient,
    }
    payload.update(chain)
    if model is not None:
        hi, lo = thermo.critical_densities(model, beta)
        payload["beta"] = beta
        payload["critical_density_upper"] = hi
        payload["critical_density_lower"] = lo
    path = os.path.join(_out_dir(ns), f"bec-{spec.spec_hash()}.json")
    _write_atomic(path, _dump_json(payload))
    payload["artifact"] = path
    _emit(payload)
    return 0


def cmd_thermo_blackbody(ns) -> int:
    model, tag = _model_for_thermo(ns)
    beta = float(getattr(ns, "beta", None) or 1.0)
    L = float(getattr(ns, "length", None) or 1.0)
    energy, pressure = thermo.blackbody(model, beta, L)
    _emit({
        "stage": "thermo-blackbody",
        "source": tag,
        "beta": beta,
        "L": L,
        "d_s": model.d_s,
        "energy_density": energy,
        "pressure": pressure,
    })
    return 0


def cmd_thermo_casimir(ns) -> int:
    model, tag = _model_for_thermo(ns)
    a = float(getattr(ns, "a", None) or 20.0)
    b = float(getattr(ns, "b", None) or 1.0)
    energy, pressure = thermo.casimir_waveguide_zero_T(model, a, b)
    payload = {
        "stage": "thermo-casimir",
        "source": tag,
        "a": a,
        "b": b,
        "energy": energy,
        "pressure_scalar": pressure,
        "pressure_em": 2.0 * pressure,
        "note": ("scalar field with Dirichlet plates; the electromagnetic "
                 "field carries two polarizations, so multiply the scalar "
                 "pressure by 2 (square cross-section continuum limit: "
                 "-pi^2/480 b^4 scalar, -pi^2/240 b^4 EM)"),
    }
    if getattr(ns, "beta", None) is not None:
        payload["beta"] = float(ns.beta)
        payload["pressure_thermal"] = thermo.casimir_waveguide_thermal(
            model, a, b, float(ns.beta))
    _emit(payload)
    return 0


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise CarpetGasError(f"bad grid {text!r}; expected lo:hi:n") from exc


def cmd_thermo_sweep(ns) -> int:
    quantity = getattr(ns, "quantity", None) or "density"
    model, tag = _model_for_thermo(ns)
    out = _out_dir(ns)
    if quantity == "density":
        beta = float(getattr(ns, "beta", None) or 1.0)
        grid = _parse_grid(getattr(ns, "grid", None) or "0.05:0.95:19")
        lines = ["z,density"]
        for z in grid:
            state = thermo.GasState(beta=beta, z=float(z))
            rho = thermo.particle_density(state, model)
            lines.append(f"{_f(z)},{_f(rho)}")
        key = _key("sweep-density", tag, _f(beta), getattr(ns, "grid", ""))
    elif quantity == "blackbody":
        grid = _parse_grid(getattr(ns, "grid", None) or "0.05:0.5:10")
        lines = ["beta,energy_density,pressure"]
        for beta in grid:
            energy, pressure = thermo.blackbody(model, float(beta))
            lines.append(f"{_f(beta)},{_f(energy)},{_f(pressure)}")
        key = _key("sweep-blackbody", tag, getattr(ns, "grid", ""))
    else:
        raise CarpetGasError(f"unknown sweep quantity {quantity!r}")
    path = os.path.join(out, f"sweep-{quantity}-{key}.csv")
    _write_atomic(path, "\n".join(lines) + "\n")
    _emit({"stage": "thermo-sweep", "quantity": quantity, "source": tag,
           "rows": len(lines) - 1, "artifact": path})
    return 0


# ---------------------------------------------------------------------------
# oracle stage


def cmd_oracle_selftest(ns) -> int:
    checks = []

    def check(name, err, tol):
        checks.append({"name": name, "error": float(err), "tol": tol,
                       "ok": bool(err <= tol)})

    # theta crossover: direct sum and Poisson form agree at tau = 1
    direct = oracle.interval_trace_exact(1.0)
    poisson = oracle.interval_trace_exact(float(np.nextafter(1.0, 0.0)))
    check("interval-theta-crossover", abs(direct - poisson), 1e-13)

    # finite cube spectrum reproduces the exact trace when the tail is tiny
    box = oracle.unit_box(3, "dirichlet")
    spec3 = oracle.box_spectrum(box, 3000.0)
    t = 0.05
    direct = float(np.sum(np.exp(-t * spec3.eigenvalues)))
    check("cube-trace-vs-spectrum", abs(direct - oracle.box_trace_exact(box, t)),
          1e-10)

    # short-time box model matches the exact trace off the remainder scale
    model1 = oracle.box_model(1, "dirichlet")
    check("interval-model-short-time",
          abs(model1.evaluate(0.02).real - oracle.interval_trace_exact(0.02)),
          1e-12)

    # blackbody constant reduces to the classical value in three dimensions
    beta = 0.7
    check("blackbody-d3-constant",
          abs(oracle.euclid_blackbody(3, beta) - math.pi**2 / (30.0 * beta**4)),
          1e-12)

    # three-squares counts against a brute-force triple loop
    jmax = 400
    counts = oracle.sum_of_three_squares_counts(jmax)
    brute = np.zeros(jmax + 1, dtype=np.int64)
    top = int(math.isqrt(jmax))
    for n1 in range(1, top + 1):
        for n2 in range(1, top + 1):
            for n3 in range(1, top + 1):
                j = n1 * n1 + n2 * n2 + n3 * n3
                if j <= jmax:
                    brute[j] += 1
    check("three-squares-counts", int(np.abs(counts - brute).max()), 0)

    # interval Casimir energy from the analytic zeta value
    check("interval-casimir", abs(oracle.interval_casimir_energy()
                                  + math.pi / 24.0), 1e-12)

    # critical density markers
    check("bec-critical-d2-diverges",
          0.0 if oracle.euclid_bec_critical(2, 1.0) is DIVERGED else 1.0, 0.0)
    rho_c = oracle.euclid_bec_critical(3, 1.0)
    check("bec-critical-d3-finite",
          0.0 if (isinstance(rho_c, float) and rho_c > 0) else 1.0, 0.0)

    ok = all(c["ok"] for c in checks)
    for c in checks:
        sys.stdout.write("%s %s err=%s tol=%s\n" % (
            "ok" if c["ok"] else "FAIL", c["name"], _f(c["error"]), _f(c["tol"])))
    sys.stdout.write("oracle selftest: %d/%d passed\n"
                     % (sum(c["ok"] for c in checks), len(checks)))
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", help="carpet preset name, e.g. SC(3,1)")
    p.add_argument("--spec", help="path to a carpet description file")
    p.add_argument("--level", type=int, help="approximation level n")
    p.add_argument("--bc", choices=["neumann", "dirichlet"],
                   help="boundary condition")
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--config", help="JSON file with default option values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carpetgas",
        description="Carpet spectra and quantum-gas thermodynamics pipeline")
    stages = parser.add_subparsers(dest="stage", required=True)

    carpet = stages.add_parser("carpet", help="validate or describe a carpet")
    carpet_actions = carpet.add_subparsers(dest="action", required=True)
    for action, fn in (("validate", cmd_carpet_validate),
                       ("info", cmd_carpet_info)):
        sub = carpet_actions.add_parser(action)
        _add_common(sub)
        sub.set_defaults(func=fn)

    graph_p = stages.add_parser("graph", help="build level graphs")
    graph_actions = graph_p.add_subparsers(dest="action", required=True)
    sub = graph_actions.add_parser("build")
    _add_common(sub)
    sub.add_argument("--adjacency", choices=["face", "vertex"])
    sub.set_defaults(func=cmd_graph_build)

    spectrum_p = stages.add_parser("spectrum", help="compute level spectra")
    spectrum_actions = spectrum_p.add_subparsers(dest="action", required=True)
    sub = spectrum_actions.add_parser("compute")
    _add_common(sub)
    sub.add_argument("--method", choices=["auto", "dense", "sliced"])
    sub.add_argument("--cap", type=int, help="dense-solver size cap")
    sub.add_argument("--budget", type=int, help="sliced-solver slice budget")
    sub.set_defaults(func=cmd_spectrum_compute)

    trace_p = stages.add_parser("trace", help="heat-trace analysis")
    trace_actions = trace_p.add_subparsers(dest="action", required=True)
    sub = trace_actions.add_parser("analyze")
    _add_common(sub)
    sub.add_argument("--method", choices=["auto", "dense", "sliced"])
    sub.add_argument("--cap", type=int)
    sub.add_argument("--budget", type=int)
    sub.add_argument("--p-max", type=int, dest="p_max",
                     help="highest Fourier index extracted")
    sub.set_defaults(func=cmd_trace_analyze)

    zeta_p = stages.add_parser("zeta", help="spectral zeta continuation")
    zeta_actions = zeta_p.add_subparsers(dest="action", required=True)
    for action, fn in (("eval", cmd_zeta_eval), ("poles", cmd_zeta_poles),
                       ("casimir", cmd_zeta_casimir)):
        sub = zeta_actions.add_parser(action)
        _add_common(sub)
        sub.add_argument("--euclid", choices=sorted(_EUCLID_DIMS),
                         help="use an exact Euclidean box instead of a carpet")
        sub.add_argument("--method", choices=["auto", "dense", "sliced"])
        sub.add_argument("--cap", type=int)
        sub.add_argument("--budget", type=int)
        sub.add_argument("--p-max", type=int, dest="p_max")
        sub.add_argument("--gamma", type=float, help="spectral shift")
        sub.add_argument("--t1", type=float, help="Mellin split point")
        sub.add_argument("--nmax", type=int, help="expansion depth per tower")
        if action == "eval":
            sub.add_argument("--s", help="evaluation point, complex literal")
        sub.set_defaults(func=fn)

    thermo_p = stages.add_parser("thermo", help="quantum-gas thermodynamics")
    thermo_actions = thermo_p.add_subparsers(dest="action", required=True)

    sub = thermo_actions.add_parser("bec")
    _add_common(sub)
    sub.add_argument("--method", choices=["auto", "dense", "sliced"])
    sub.add_argument("--cap", type=int)
    sub.add_argument("--budget", type=int)
    sub.add_argument("--p-max", type=int, dest="p_max")
    sub.add_argument("--beta", type=float, help="inverse temperature")
    sub.set_defaults(func=cmd_thermo_bec)

    for action, fn in (("blackbody", cmd_thermo_blackbody),
                       ("casimir", cmd_thermo_casimir),
                       ("sweep", cmd_thermo_sweep)):
        sub = thermo_actions.add_parser(action)
        _add_common(sub)
        sub.add_argument("--euclid", choices=sorted(_EUCLID_DIMS))
        sub.add_argument("--ds", type=float,
                         help="flat model with this spectral dimension")
        sub.add_argument("--method", choices=["auto", "dense", "sliced"])
        sub.add_argument("--cap", type=int)
        sub.add_argument("--budget", type=int)
        sub.add_argument("--p-max", type=int, dest="p_max")
        sub.add_argument("--beta", type=float)
        if action == "blackbody":
            sub.add_argument("--length", type=float, help="box side L")
        if action == "casimir":
            sub.add_argument("--a", type=float, help="cross-section side")
            sub.add_argument("--b", type=float, help="plate separation")
        if action == "sweep":
            sub.add_argument("--quantity", choices=["density", "blackbody"])
            sub.add_argument("--grid", help="lo:hi:n sweep grid")
        sub.set_defaults(func=fn)

    oracle_p = stages.add_parser("oracle", help="exact Euclidean cross-checks")
    oracle_actions = oracle_p.add_subparsers(dest="action", required=True)
    sub = oracle_actions.add_parser("selftest")
    _add_common(sub)
    sub.set_defaults(func=cmd_oracle_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        _apply_config_file(ns)
        return ns.func(ns)
    except CarpetGasError as exc:
        return _error_exit(exc)
    except (OSError, ValueError, LookupError) as exc:
        return _error_exit(exc)


if __name__ == "__main__":
    sys.exit(main())
