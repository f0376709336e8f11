"""Command-line entry point.

Usage: ``liouvsim COMMAND [--config PATH] [--out DIR] [--seed N] [--mode M] [--engine E]``
with COMMAND one of evolve, thermo, verify, cost, poly, dump, grid-scan.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import math
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bea, cost, oracle, qsvt
from . import electronic as el
from . import phasespace as ps
from . import thermo as th
from ._config import DimensionCapError
from .liouvillian import evolve, full_liouvillian
from .phasespace import KvNState, PhaseSpaceSpec

COMMANDS = ("evolve", "thermo", "verify", "cost", "poly", "dump", "grid-scan")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

GROUP_KEYS: dict[str, set[str]] = {
    "phase_space": set(PhaseSpaceSpec.field_names()),
    "electronic": {f.name for f in dataclasses.fields(el.ElectronicSpec)},
    "evolve": {"times", "eps", "centers", "widths"},
    "alchemy": {"n_lambda", "t_eq", "eps", "xi", "mode", "qae_ancillas", "shots", "centers", "widths"},
    "cost": {"alpha", "t", "eps", "lambda", "delta", "gamma", "eps_prep", "N", "N_el"},
    "poly": {"kind", "alpha_t", "gamma", "xi", "eps", "samples"},
    "dump": {"operator", "threshold"},
    "grid_scan": {"h", "d", "wavenumber", "points", "precision"},
    "verify": {"suites", "trials"},
}
SYSTEM_GROUPS = ("phase_space", "electronic")


def _parse_value(raw: str) -> Any:
    s = raw.strip()
    low = s.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", ""):
        return None
    if "," in s:
        return tuple(_parse_value(p) for p in s.split(",") if p.strip())
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def _allowed(group: str) -> set[str] | None:
    if group in GROUP_KEYS:
        return GROUP_KEYS[group]
    parts = group.split(".")
    if len(parts) == 3 and parts[0] == "alchemy" and parts[1] in ("system_a", "system_b") and parts[2] in SYSTEM_GROUPS:
        return GROUP_KEYS[parts[2]]
    return None


def load_config(path: str | Path | None) -> dict[str, dict[str, Any]]:
    """Parse ``[group]`` / ``key = value`` text, rejecting unknown groups and keys."""
    if path is None:
        text = resources.files("liouvsim").joinpath("default.cfg").read_text()
        source = "default.cfg"
    else:
        text = Path(path).read_text()
        source = str(path)
    cp = configparser.ConfigParser(interpolation=None, strict=True, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    out: dict[str, dict[str, Any]] = {}
    for group in cp.sections():
        allowed = _allowed(group)
        if allowed is None:
            raise ConfigError(f"unknown group [{group}]")
        vals = {}
        for key, raw in cp.items(group):
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{group}]")
            vals[key] = _parse_value(raw)
        out[group] = vals
    return out


def _tuple(v) -> tuple:
    return v if isinstance(v, tuple) else (v,)


def phase_space_from(group: dict[str, Any], base: PhaseSpaceSpec | None = None) -> PhaseSpaceSpec:
    vals = dict(group)
    for key in ("masses", "charges"):
        if key in vals:
            vals[key] = _tuple(vals[key])
    return base.with_(**vals) if base is not None else PhaseSpaceSpec(**vals)


def electronic_from(group: dict[str, Any] | None) -> el.ElectronicSpec | None:
    return None if group is None else el.ElectronicSpec(**group)


def _axis_map(raw) -> dict[str, float]:
    """``"x0:4.0, p0:0"`` (parsed to a tuple of strings) into a dict."""
    if raw is None:
        return {}
    out = {}
    for item in _tuple(raw):
        key, _, val = str(item).partition(":")
        if not _:
            raise ConfigError(f"expected axis:value, got {item!r}")
        out[key.strip()] = float(val)
    return out


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, Any]]:
    out = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.extend(_flatten(v, key + "."))
        else:
            out.append((key, v))
    return out


def write_result(path: Path, data: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{k}: {_fmt(v)}\n" for k, v in _flatten(data)))
    return path


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _axis_columns(spec: PhaseSpaceSpec) -> list[tuple[str, str, int, int]]:
    lay = ps.Layout.of(spec)
    return [(ps._axis_key(a, spec.spatial_dim), a.variable, a.n, a.j) for a in lay.axes]


def cmd_evolve(cfg: dict, args) -> int:
    spec = phase_space_from(cfg.get("phase_space", {}))
    espec = electronic_from(cfg.get("electronic"))
    ev = cfg.get("evolve", {})
    times = sorted(float(t) for t in _tuple(ev.get("times", 0.0)))
    eps = float(ev.get("eps", 1e-3))
    state = KvNState.gaussian(spec, _axis_map(ev.get("centers")), _axis_map(ev.get("widths")))
    L = full_liouvillian(espec, spec, seed=args.seed)
    cols = _axis_columns(spec)
    rows, now = [], 0.0
    for t in times:
        if t > now:
            r = evolve(L, state, t - now, eps / max(len(times), 1), args.engine, args.mode, check_norm=False)
            state, now = r.state, t
        rows.append([t] + [state.expectation(spec, v, n, j) for _, v, n, j in cols] + [state.norm])
    path = write_csv(Path(args.out) / "trajectory.csv", ["t"] + [c[0] for c in cols] + ["norm"], rows)
    print(f"wrote {path}")
    return 0


def _system(cfg: dict, name: str, base: PhaseSpaceSpec, ebase: dict | None) -> th.System:
    p = cfg.get(f"alchemy.{name}.phase_space", {})
    e = cfg.get(f"alchemy.{name}.electronic")
    if e is not None and ebase is not None:
        e = {**ebase, **e}
    return th.System(phase_space_from(p, base), electronic_from(e if e is not None else ebase))


def cmd_thermo(cfg: dict, args) -> int:
    base = phase_space_from(cfg.get("phase_space", {}))
    ebase = cfg.get("electronic")
    al = dict(cfg.get("alchemy", {}))
    centers, widths = _axis_map(al.pop("centers", None)), _axis_map(al.pop("widths", None))
    pair = th.AlchemicalPair(_system(cfg, "system_a", base, ebase), _system(cfg, "system_b", base, ebase),
                             seed=args.seed)
    tcfg = th.ThermoConfig(**al)
    rho0 = KvNState.gaussian(pair.spec, centers, widths)
    res = th.free_energy_difference(pair, tcfg, rho0, engine=args.engine, mode=args.mode, seed=args.seed)
    out = Path(args.out)
    write_result(out / "thermo_result.txt", {
        "delta_f": res.delta_f, "ledger": res.ledger, "ledger_total": res.ledger_total, "p_hat": res.p_hat,
        "n_lambda": res.n_lambda, "t_eq": res.t_eq, "alpha_delta": res.alpha_delta, "diagnostics": res.diagnostics})
    write_csv(out / "thermo_lambda.csv", ["lambda", "expectation", "block_fidelity"],
              [[r["lambda"], r["expectation"], r.get("block_fidelity", float("nan"))] for r in res.per_lambda])
    print(f"delta_f = {res.delta_f:.10g} (ledger total {res.ledger_total:.3g})")
    return 0


def cmd_cost(cfg: dict, args) -> int:
    c = cfg.get("cost", {})
    rows = []
    for a in _tuple(c.get("alpha", 1.0)):
        for t in _tuple(c.get("t", 1.0)):
            for e in _tuple(c.get("eps", 1e-3)):
                rep = cost.liouvillian_cost(a, t, e, c.get("lambda", 1.0), c.get("delta", 0.5),
                                            c.get("gamma", 0.1), c.get("eps_prep", 1e-3), 2, 8)
                for r in rep.rows():
                    rows.append([a, t, e, r["name"], r["value"], r["scaling_only"], r["formula"]])
                t1 = cost.table1_compare(cost.Table1Params(int(c.get("N", 1)), int(c.get("N_el", 1)), t,
                                                           c.get("delta", 0.5), c.get("gamma", 0.1), e))
                for f in t1.values():
                    rows.append([a, t, e, f.name, f.value, f.scaling_only, f.formula])
    header = ["alpha", "t", "eps", "name", "value", "scaling_only", "formula"]
    write_csv(Path(args.out) / "cost.csv", header, rows)
    md = cost.markdown_table([dict(zip(header, [_fmt(v) for v in r])) for r in rows])
    (Path(args.out) / "cost.md").write_text(md + "\n")
    print(md)
    return 0


def cmd_poly(cfg: dict, args) -> int:
    c = cfg.get("poly", {})
    kind = c.get("kind", "exp")
    x = np.cos(np.linspace(0, np.pi, int(c.get("samples", 201))))
    if kind == "exp":
        at = float(c.get("alpha_t", 1.0))
        cp, sp_ = qsvt.approx_exp(at, float(c.get("eps", 1e-6)))
        target = np.exp(-1j * at * x)
        poly = cp(x) - 1j * sp_(x)
    elif kind == "sign":
        g = float(c.get("gamma", 0.1))
        p = qsvt.approx_sign(g, float(c.get("xi", 1e-3)))
        target = np.sign(x).astype(complex)
        poly = p(x).astype(complex)
    else:
        raise ConfigError(f"unknown poly kind {kind!r}")
    rows = [[xi, t.real, t.imag, q.real, q.imag] for xi, t, q in zip(x, target, poly)]
    path = write_csv(Path(args.out) / "poly.csv", ["x", "target_re", "target_im", "poly_re", "poly_im"], rows)
    print(f"wrote {path}")
    return 0


def _dump_operator(cfg: dict, name: str, args) -> bea.BlockEncoding:
    spec = phase_space_from(cfg.get("phase_space", {}))
    espec = electronic_from(cfg.get("electronic"))
    builders: dict[str, Callable[[], bea.BlockEncoding]] = {
        "liouvillian": lambda: full_liouvillian(espec, spec, seed=args.seed).encoding,
        "kinetic": lambda: ps.kinetic_hamiltonian(spec),
        "potential": lambda: ps.potential_hamiltonian(spec),
        "derivative_x": lambda: ps.derivative_encoding(spec, "x"),
        "derivative_p": lambda: ps.derivative_encoding(spec, "p"),
    }
    if espec is not None:
        builders["electronic_hamiltonian"] = lambda: el.controlled_electronic_hamiltonian(espec, spec)
    if name not in builders:
        raise ConfigError(f"unknown operator {name!r}; choose from {sorted(builders)}")
    return builders[name]()


def cmd_dump(cfg: dict, args) -> int:
    c = cfg.get("dump", {})
    be = _dump_operator(cfg, c.get("operator", "liouvillian"), args)
    blk = be.block() * be.alpha
    thr = float(c.get("threshold", 0.0))
    idx = np.argwhere(np.abs(blk) > thr)
    rows = [[i, j, blk[i, j].real, blk[i, j].imag] for i, j in idx]
    path = write_csv(Path(args.out) / "block.csv", ["row", "col", "re", "im"], rows)
    print(f"wrote {path} ({len(rows)} entries, alpha={be.alpha:.6g})")
    return 0


def cmd_grid_scan(cfg: dict, args) -> int:
    c = cfg.get("grid_scan", {})
    hs = _tuple(c.get("h", (0.4, 0.2, 0.1)))
    ds = _tuple(c.get("d", (1, 2, 3)))
    rows = ps.fd_convergence_scan(hs, ds, float(c.get("wavenumber", 1.0)), int(c.get("points", 64)),
                                  c.get("precision", "double"))
    header = ["d", "h", "wavenumber", "error", "model"]
    out = [[r[k] for k in header] for r in rows]
    fits = []
    for h in hs:
        slope, model = ps.fd_order_slope([r for r in rows if r["h"] == h])
        fits.append([h, slope, model, abs(slope - model) / abs(model)])
    write_csv(Path(args.out) / "grid_scan.csv", header, out)
    path = write_csv(Path(args.out) / "grid_scan_fit.csv", ["h", "slope", "model_slope", "relative_gap"], fits)
    for f in fits:
        print(f"h={f[0]:g}: log-error slope in d {f[1]:.3f}, model {f[2]:.3f} (gap {100 * f[3]:.1f}%)")
    print(f"wrote {path}")
    return 0


# verify ---------------------------------------------------------------------


def _verify_contracts(rng, trials):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        b = rng.normal(size=(n, n))
        ea, eb = bea.dilate(a, 2 * np.linalg.norm(a, 2)), bea.dilate(b, 2 * np.linalg.norm(b, 2))
        for be, target in ((bea.linear_combination([0.3, -1j], [ea, eb]), 0.3 * a - 1j * b),
                           (bea.product(ea, eb), a @ b)):
            worst = max(worst, bea.verify_contract(be, target) - be.epsilon)
    return [("contracts", "max excess over declared error", worst, 1e-10, worst <= 1e-10)]


def _verify_hamsim(rng, trials):
    out = []
    for eps in (1e-3, 1e-6):
        worst = 0.0
        for _ in range(trials):
            n = int(rng.integers(2, 9))
            h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            h = (h + h.conj().T) / 2
            be = bea.dilate(h, 1.5 * np.linalg.norm(h, 2))
            t = float(rng.uniform(0.1, 2.0))
            u = qsvt.ham_sim(be, t, eps)
            ref = oracle.expm_evolve(h, np.eye(n), t)
            worst = max(worst, float(np.linalg.norm(u.block() - ref, 2)))
        out.append(("hamsim", f"max error eps={eps:g}", worst, eps, worst <= eps))
    return out


def _verify_cost(rng, trials):
    a, b = cost.hamsim_cost(2, 5, 1e-6), cost.angleless_hamsim_cost(1, 1, 0.01)
    return [("cost", "hamsim_cost(2,5,1e-6)", a, 207, a == 207),
            ("cost", "angleless_hamsim_cost(1,1,0.01)", b, 716, b == 716)]


def _verify_forces(rng, trials):
    espec = el.ElectronicSpec(n_planewaves=3, h_el=0.5)
    worst = 0.0
    for x in np.linspace(0.1, 1.3, trials):
        hf = oracle.hellmann_feynman(3, espec.omega, [1.0, 1.0], [0.0, float(x)], 1)
        fd = oracle.fd_gradient(lambda y: oracle.ground_energy(3, espec.omega, [1.0, 1.0], [0.0, y]), float(x), 1e-4)
        worst = max(worst, abs(hf - fd))
    return [("forces", "Hellmann-Feynman vs finite difference", worst, 1e-6, worst <= 1e-6)]


def _verify_qae(rng, trials):
    worst = 0.0
    for y in range(1, 8):
        p = math.sin(math.pi * y / 16) ** 2
        probs, est = th.qae_distribution(p, 4)
        worst = max(worst, abs(float(est[np.argmax(probs)]) - p))
    return [("qae", "grid probabilities recovered", worst, 1e-12, worst <= 1e-12)]


VERIFY_SUITES = {"contracts": _verify_contracts, "hamsim": _verify_hamsim, "cost": _verify_cost,
                 "forces": _verify_forces, "qae": _verify_qae}


def _verify_gsp(cfg: dict, args) -> int:
    spec = phase_space_from(cfg.get("phase_space", {}))
    espec = electronic_from(cfg.get("electronic")) or el.ElectronicSpec(n_planewaves=3, h_el=0.5)
    states = el.prepare_states(espec, spec, espec.eps_prep, mode=el.FAITHFUL, seed=args.seed)
    dense = el.controlled_electronic_dense(espec, spec)
    rows = []
    for i, h in enumerate(dense):
        g = np.linalg.eigh(h)[1][:, 0]
        fid = abs(np.vdot(g, states.vectors[i, 0])) ** 2
        rows.append([i, fid, 1 - espec.eps_prep, fid >= 1 - espec.eps_prep])
    path = write_csv(Path(args.out) / "verify_gsp.csv", ["grid_point", "fidelity", "threshold", "passed"], rows)
    print(f"wrote {path}")
    return 0 if all(r[3] for r in rows) else 1


def cmd_verify(cfg: dict, args) -> int:
    if args.suite == "gsp":
        return _verify_gsp(cfg, args)
    c = cfg.get("verify", {})
    names = _tuple(c.get("suites", tuple(VERIFY_SUITES))) if args.suite in (None, "all") else (args.suite,)
    trials = int(c.get("trials", 5))
    rng = np.random.default_rng(args.seed)
    rows = []
    for name in names:
        if name not in VERIFY_SUITES:
            raise ConfigError(f"unknown verify suite {name!r}")
        rows.extend(VERIFY_SUITES[name](rng, trials))
    path = write_csv(Path(args.out) / "verify.csv", ["suite", "check", "value", "tolerance", "passed"],
                     [list(r) for r in rows])
    for r in rows:
        print(f"{'PASS' if r[4] else 'FAIL'}  {r[0]:10s} {r[1]}: {r[2]:.3g} (tol {r[3]:g})")
    print(f"wrote {path}")
    return 0 if all(r[4] for r in rows) else 1


HANDLERS = {"evolve": cmd_evolve, "thermo": cmd_thermo, "verify": cmd_verify, "cost": cmd_cost,
            "poly": cmd_poly, "dump": cmd_dump, "grid-scan": cmd_grid_scan}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="liouvsim", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("suite", nargs="?", default=None, help="verify only: suite name, 'gsp' or 'all'")
    ap.add_argument("--config", default=None, help="configuration file (default: bundled default.cfg)")
    ap.add_argument("--out", default="liouvsim_out", help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mode", choices=(qsvt.FAITHFUL, qsvt.SEMANTIC), default=qsvt.FAITHFUL)
    ap.add_argument("--engine", choices=("qsvt", "angleless"), default="qsvt")
    return ap


def run(command: str, config_path: str | None = None, **flags) -> int:
    argv = [command] + ([flags.pop("suite")] if flags.get("suite") else [])
    flags.pop("suite", None)
    if config_path:
        argv += ["--config", str(config_path)]
    for k, v in flags.items():
        argv += [f"--{k}", str(v)]
    return main(argv)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.suite is not None and args.command != "verify":
        print(f"error: unexpected argument {args.suite!r}", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        t0 = time.perf_counter()
        code = HANDLERS[args.command](cfg, args)
        print(f"{args.command} finished in {time.perf_counter() - t0:.2f} s", file=sys.stderr)
        return code
    except DimensionCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ps.PhaseSpaceError, el.ElectronicError, th.ThermoError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
