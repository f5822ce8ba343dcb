"""Configuration-driven scenario runner.

Usage:
    cmsim --config run.yaml [--scenario name] [--out file]
          [--format csv|json] [--sweep-tau 2,1,0.5,0.1] [--check]

The YAML config holds a `scenario` name and a `params` mapping; unknown
keys anywhere are rejected so typos fail loudly.  Output is a flat
table (CSV by default, 17 significant digits) plus a metadata block
(JSON only).  Exit codes: 0 success, 1 config error, 2 tolerance
failure in --check mode.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np
import yaml

from . import dephasing, engine, lindblad, lossy_cavity, multi_lorentzian, spectral
from .linalg import partial_trace

SCENARIOS = (
    "lossy_cavity",
    "dephasing",
    "rtn",
    "multi_lorentzian",
    "generic_cm",
    "sd_bridge",
)


class ConfigError(ValueError):
    pass


def _require_keys(table, allowed, required, where):
    unknown = set(table) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")
    missing = set(required) - set(table)
    if missing:
        raise ConfigError(f"missing key(s) {sorted(missing)} in {where}")


def _num(table, key, where, default=None):
    if key not in table:
        if default is None:
            raise ConfigError(f"missing numeric key '{key}' in {where}")
        return float(default)
    v = table[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"'{key}' in {where} must be a number")
    return float(v)


def _int(table, key, where, default=None):
    v = table.get(key, default)
    if v is None:
        raise ConfigError(f"missing integer key '{key}' in {where}")
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"'{key}' in {where} must be an integer")
    return v


# ---------------------------------------------------------------------------
# Scenario implementations
# ---------------------------------------------------------------------------

def _run_lossy_cavity(params):
    _require_keys(
        params,
        ("delta", "big_g", "gamma_target", "tau", "steps"),
        ("tau", "steps"),
        "params",
    )
    big_g = _num(params, "big_g", "params", 1.0)
    gamma = _num(params, "gamma_target", "params", big_g)
    tau = _num(params, "tau", "params")
    steps = _int(params, "steps", "params")
    p = lossy_cavity.LossyCavityParams(
        delta=_num(params, "delta", "params", 0.0),
        big_g=big_g,
        small_g=math.sqrt(gamma / tau),
        tau=tau,
    )
    traj = lossy_cavity.amplitude_trajectory(p, steps)
    rows = []
    for k, (eps, _) in enumerate(traj):
        t = k * tau
        cont = abs(
            lossy_cavity.analytic_excited_amplitude(p.delta, p.big_g, p.gamma, t)
        ) ** 2
        disc = abs(eps) ** 2
        rows.append((k, t, disc, cont, abs(disc - cont)))
    meta = {
        "gamma": p.gamma,
        "small_g": p.small_g,
        "short_collision_regime": bool(p.small_g * tau < 0.1),
    }
    return ("step", "t", "pop_discrete", "pop_continuous", "deviation"), rows, meta


def _run_dephasing(params):
    _require_keys(
        params,
        ("big_g", "gamma_target", "tau", "steps"),
        ("tau", "steps"),
        "params",
    )
    big_g = _num(params, "big_g", "params", 1.0)
    gamma = _num(params, "gamma_target", "params", big_g)
    tau = _num(params, "tau", "params")
    steps = _int(params, "steps", "params")
    p = dephasing.DephasingParams(
        big_g=big_g, small_g=math.sqrt(gamma / tau), tau=tau
    )
    rows = []
    block = dephasing.coherence_block(p)
    vec = np.array([1.0, 0.0])
    for k in range(steps + 1):
        t = k * tau
        rows.append(
            (
                k,
                t,
                float(vec[0]),
                dephasing.dephasing_factor_continuous(gamma, big_g, t),
            )
        )
        vec = block @ vec
    meta = {
        "gamma": p.gamma,
        "small_g": p.small_g,
        "short_collision_regime": bool(p.small_g * tau < 0.1),
    }
    return ("step", "t", "f_discrete", "f_continuous"), rows, meta


def _run_rtn(params):
    _require_keys(
        params, ("v", "t_c", "t_max", "num_points"), ("v", "t_c"), "params"
    )
    v = _num(params, "v", "params")
    t_c = _num(params, "t_c", "params")
    t_max = _num(params, "t_max", "params", 5.0)
    n = _int(params, "num_points", "params", 201)
    h_s = v * np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    rho0 = 0.5 * np.ones((2, 2), dtype=complex)
    t_grid = np.linspace(0.0, t_max, n)
    plus, minus = dephasing.rtn_propagate(h_s, t_c, 0.5 * rho0, 0.5 * rho0, t_grid)
    rows = []
    for k, t in enumerate(t_grid):
        coh = (plus[k] + minus[k])[0, 1]
        rows.append((k, float(t), coh.real, coh.imag, abs(coh)))
    return (
        ("step", "t", "coherence_re", "coherence_im", "coherence_abs"),
        rows,
        {"switching_rate": 1.0 / t_c},
    )


def _run_multi_lorentzian(params):
    _require_keys(
        params,
        (
            "case",
            "delta1",
            "delta2",
            "big_g1",
            "big_g2",
            "c",
            "gamma1",
            "gamma2",
            "t_max",
            "num_points",
        ),
        ("case", "gamma1", "gamma2"),
        "params",
    )
    case = params["case"]
    if case not in ("a", "b"):
        raise ConfigError("multi_lorentzian case must be 'a' or 'b'")
    p = multi_lorentzian.TriParams(
        delta1=_num(params, "delta1", "params", 0.0),
        delta2=_num(params, "delta2", "params", 0.0),
        big_g1=_num(params, "big_g1", "params", 1.0),
        big_g2=_num(params, "big_g2", "params", 0.0),
        c=_num(params, "c", "params", 0.0),
        gamma1=_num(params, "gamma1", "params"),
        gamma2=_num(params, "gamma2", "params"),
    )
    t_max = _num(params, "t_max", "params", 5.0)
    n = _int(params, "num_points", "params", 501)
    t_grid = np.linspace(0.0, t_max, n)
    try:
        sd = multi_lorentzian.equivalent_sd(p, case)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    eps_ode, _, _ = multi_lorentzian.amplitude_ode3(p, t_grid)
    eps_vol = spectral.solve_volterra(sd, 0.0, t_grid)
    rows = []
    for k, t in enumerate(t_grid):
        a, b = abs(eps_ode[k]) ** 2, abs(eps_vol[k]) ** 2
        rows.append((k, float(t), a, b, abs(a - b)))
    meta = {"case": case, "sd_terms": [list(term) for term in sd.terms]}
    return ("step", "t", "pop_ode", "pop_volterra", "deviation"), rows, meta


def _parse_matrix(entries, where):
    """Nested lists of numbers or [re, im] pairs -> complex ndarray."""
    try:
        rows = []
        for row in entries:
            parsed = []
            for cell in row:
                if isinstance(cell, (list, tuple)):
                    re, im = cell
                    parsed.append(complex(float(re), float(im)))
                else:
                    parsed.append(complex(float(cell)))
            rows.append(parsed)
        return np.array(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed matrix in {where}: {exc}") from exc


def _run_generic_cm(params):
    _require_keys(
        params,
        ("dim_s", "aux_dims", "hamiltonian", "ancillas", "tau", "steps"),
        ("dim_s", "hamiltonian", "ancillas", "tau", "steps"),
        "params",
    )
    specs = []
    for i, anc in enumerate(params["ancillas"]):
        where = f"ancillas[{i}]"
        _require_keys(
            anc,
            ("dim", "eta", "coupling_op", "coupling_rate"),
            ("dim", "eta", "coupling_op", "coupling_rate"),
            where,
        )
        specs.append(
            engine.AncillaSpec(
                dim=_int(anc, "dim", where),
                eta=_parse_matrix(anc["eta"], where),
                coupling_op=_parse_matrix(anc["coupling_op"], where),
                coupling_rate=_num(anc, "coupling_rate", where),
            )
        )
    try:
        model = engine.CompositeModel(
            dim_S=_int(params, "dim_s", "params"),
            aux_dims=params.get("aux_dims", []),
            internal_hamiltonian=_parse_matrix(params["hamiltonian"], "params"),
            ancillas=specs,
            tau=_num(params, "tau", "params"),
        )
    except engine.ModelError as exc:
        raise ConfigError(str(exc)) from exc
    steps = _int(params, "steps", "params")
    dims = model.sys_factor_dims
    rho0 = np.zeros((model.sys_dim, model.sys_dim), dtype=complex)
    rho0[0, 0] = 1.0
    traj = engine.evolve(model, rho0, steps)
    rows = []
    for k, rho in enumerate(traj):
        trace_dev, _, min_eig, ok = lindblad.validate_state(rho)
        if not ok:
            raise RuntimeError(
                f"invalid state at step {k}: trace dev {trace_dev:.2e}, "
                f"min eig {min_eig:.2e}"
            )
        red = partial_trace(rho, dims, [0]) if model.aux_dims else rho
        rows.append(
            (k, k * model.tau, *[float(red[i, i].real) for i in range(red.shape[0])])
        )
    cols = ("step", "t") + tuple(f"pop_s_{i}" for i in range(model.dim_S))
    return cols, rows, {"moment_residuals": model.moment_residuals()}


# ---------------------------------------------------------------------------
# Equivalence certificates (sd_bridge scenario and --check)
# ---------------------------------------------------------------------------

def _certificate_lorentzian_decay():
    gamma0, kappa, delta = 1.0, 0.5, 0.0
    sd = spectral.LorentzianSum(((gamma0 / (2.0 * np.pi), delta, kappa),))
    t_grid = np.arange(0.0, 5.0 + 1e-12, 1e-3)
    eps_pm = spectral.solve_volterra(sd, 0.0, t_grid, method="pseudo_mode")
    eps_tz = spectral.solve_volterra(sd, 0.0, t_grid, method="trapezoid")
    big_g = np.sqrt(gamma0 * kappa / 2.0)
    eps_cf = lossy_cavity.analytic_excited_amplitude(
        delta, big_g, 2.0 * kappa, t_grid
    )
    dev_paths = float(np.max(np.abs(eps_pm - eps_tz)))
    dev_closed = float(np.max(np.abs(eps_pm - eps_cf)))
    rows = [
        (
            k,
            float(t_grid[k]),
            abs(eps_pm[k]) ** 2,
            abs(eps_tz[k]) ** 2,
            abs(eps_cf[k]) ** 2,
        )
        for k in range(0, len(t_grid), 50)
    ]
    checks = {
        "volterra_paths_agree": (dev_paths, 5e-6),
        "volterra_matches_closed_form": (dev_closed, 1e-6),
    }
    cols = ("step", "t", "pop_pseudo_mode", "pop_trapezoid", "pop_closed_form")
    return cols, rows, checks


def _certificate_dephasing_series():
    gamma, big_g = 3.0, 1.0
    sd = spectral.DephasingSeries(gamma=gamma, big_g=big_g)
    t_max = 20.0 / (2.0 * sd.kappa)
    omegas = np.linspace(0.1, 30.0, 60)
    worst = 0.0
    rows = []
    for k, om in enumerate(omegas):
        series = spectral.eval_sd(sd, om)
        transform = spectral.sd_from_dephasing_rate(
            lambda t: dephasing.dephasing_rate(gamma, big_g, t), float(om), t_max
        )
        rel = abs(series - transform) / abs(series)
        worst = max(worst, rel)
        rows.append((k, float(om), series, transform, rel))
    cols = ("step", "omega", "j_series", "j_transform", "relative_deviation")
    return cols, rows, {"series_vs_transform": (worst, 1e-3)}


def _certificate_multi_lorentzian(case):
    if case == "a":
        p = multi_lorentzian.TriParams(
            delta1=0.3, delta2=-0.5, big_g1=1.0, big_g2=0.7, c=0.0,
            gamma1=4.0, gamma2=1.0,
        )
    else:
        p = multi_lorentzian.TriParams(
            delta1=0.0, delta2=0.0, big_g1=1.0, big_g2=0.0, c=0.5,
            gamma1=4.0, gamma2=1.0,
        )
    t_grid = np.linspace(0.0, 5.0, 2001)
    eps_ode, _, _ = multi_lorentzian.amplitude_ode3(p, t_grid)
    eps_vol = spectral.solve_volterra(multi_lorentzian.equivalent_sd(p, case), 0.0, t_grid)
    dev = float(np.max(np.abs(eps_ode - eps_vol)))
    rows = [
        (k, float(t_grid[k]), abs(eps_ode[k]) ** 2, abs(eps_vol[k]) ** 2)
        for k in range(0, len(t_grid), 20)
    ]
    cols = ("step", "t", "pop_ode", "pop_volterra")
    return cols, rows, {f"ode_vs_volterra_case_{case}": (dev, 1e-4)}


def _certificate_lossy_limit():
    p = lossy_cavity.LossyCavityParams(
        delta=0.0, big_g=1.0, small_g=np.sqrt(1.0 / 0.01), tau=0.01
    )
    dev = lossy_cavity.discrete_vs_continuous_deviation(p, 2000)
    return (
        ("step", "t"),
        [],
        {"discrete_vs_continuous_tau_0p01": (dev, 2e-3)},
    )


CERTIFICATES = {
    "lorentzian_decay": _certificate_lorentzian_decay,
    "dephasing_series": _certificate_dephasing_series,
    "multi_lorentzian_a": lambda: _certificate_multi_lorentzian("a"),
    "multi_lorentzian_b": lambda: _certificate_multi_lorentzian("b"),
    "lossy_continuum": _certificate_lossy_limit,
}


def _run_sd_bridge(params):
    _require_keys(params, ("preset",), ("preset",), "params")
    preset = params["preset"]
    if preset not in CERTIFICATES:
        raise ConfigError(
            f"unknown preset '{preset}'; choose from {sorted(CERTIFICATES)}"
        )
    cols, rows, checks = CERTIFICATES[preset]()
    meta = {
        name: {"deviation": dev, "tolerance": tol, "passed": bool(dev <= tol)}
        for name, (dev, tol) in checks.items()
    }
    return cols, rows, meta


def run_check():
    """Run every built-in certificate; return (passed, report lines)."""
    ok = True
    lines = []
    for preset, fn in CERTIFICATES.items():
        _, _, checks = fn()
        for name, (dev, tol) in checks.items():
            passed = dev <= tol
            ok = ok and passed
            lines.append(
                f"{'PASS' if passed else 'FAIL'} {preset}/{name}: "
                f"deviation {dev:.3e} (tolerance {tol:.1e})"
            )
    return ok, lines


# ---------------------------------------------------------------------------
# Sweeps, output, entry point
# ---------------------------------------------------------------------------

def run_sweep(params, tau_list):
    """Discrete-vs-continuous deviation of the lossy-cavity scenario for
    each tau (g rescaled to hold gamma fixed), plus the empirical
    convergence order between consecutive tau values."""
    if len(tau_list) < 2:
        raise ConfigError("tau sweep needs at least two values")
    big_g = _num(params, "big_g", "params", 1.0)
    gamma = _num(params, "gamma_target", "params", big_g)
    delta = _num(params, "delta", "params", 0.0)
    t_max = _num(params, "t_max", "params", 20.0 / big_g)
    rows = []
    prev = None
    for i, tau in enumerate(tau_list):
        p = lossy_cavity.LossyCavityParams(
            delta=delta, big_g=big_g, small_g=math.sqrt(gamma / tau), tau=tau
        )
        dev = lossy_cavity.discrete_vs_continuous_deviation(
            p, int(math.ceil(t_max / tau))
        )
        order = float("nan")
        if prev is not None and dev > 0.0:
            dtau = math.log(tau_list[i - 1] / tau)
            if abs(dtau) > 1e-12:
                order = math.log(prev / dev) / dtau
        rows.append((i, tau, dev, order))
        prev = dev
    return ("step", "tau", "max_deviation", "conv_order"), rows, {"gamma": gamma}


def format_csv(cols, rows):
    out = [",".join(cols)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(f"{float(v):.17g}")
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def format_json(scenario, cols, rows, meta):
    return json.dumps(
        {
            "scenario": scenario,
            "columns": list(cols),
            "rows": [[float(v) for v in row] for row in rows],
            "metadata": meta,
        },
        indent=2,
        sort_keys=True,
    ) + "\n"


RUNNERS = {
    "lossy_cavity": _run_lossy_cavity,
    "dephasing": _run_dephasing,
    "rtn": _run_rtn,
    "multi_lorentzian": _run_multi_lorentzian,
    "generic_cm": _run_generic_cm,
    "sd_bridge": _run_sd_bridge,
}


def run_scenario(config):
    """Dispatch a parsed config mapping to its scenario runner."""
    _require_keys(config, ("scenario", "params", "format"), ("scenario",), "config")
    scenario = config["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario '{scenario}'; choose from {SCENARIOS}")
    params = config.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError("params must be a mapping")
    cols, rows, meta = RUNNERS[scenario](params)
    return scenario, cols, rows, meta


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cmsim", description="composite collision-model simulator"
    )
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--scenario", help="override the config's scenario")
    parser.add_argument("--out", help="output file (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument(
        "--sweep-tau", help="comma-separated collision times for a convergence sweep"
    )
    parser.add_argument(
        "--check",
        action="store_true",
        help="run the built-in equivalence certificates and exit nonzero on failure",
    )
    args = parser.parse_args(argv)

    try:
        if args.check:
            ok, lines = run_check()
            print("\n".join(lines))
            return 0 if ok else 2

        config = {}
        if args.config:
            with open(args.config) as fh:
                config = yaml.safe_load(fh) or {}
            if not isinstance(config, dict):
                raise ConfigError("config root must be a mapping")
        if args.scenario:
            config["scenario"] = args.scenario
        if "scenario" not in config and not args.sweep_tau:
            raise ConfigError("no scenario given (use --config or --scenario)")

        if args.sweep_tau:
            try:
                taus = [float(x) for x in args.sweep_tau.split(",") if x.strip()]
            except ValueError as exc:
                raise ConfigError(f"malformed --sweep-tau: {exc}") from exc
            if not taus:
                raise ConfigError("tau_list must be nonempty")
            params = config.get("params", {}) or {}
            cols, rows, meta = run_sweep(params, taus)
            scenario = "tau_sweep"
        else:
            scenario, cols, rows, meta = run_scenario(config)

        fmt = args.format or config.get("format") or "csv"
        if fmt == "csv":
            text = format_csv(cols, rows)
        else:
            text = format_json(scenario, cols, rows, meta)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
