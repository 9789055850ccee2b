"""Command-line front end.

Exit statuses: 0 success, 1 runtime or I/O failure, 2 usage error,
3 convergence failure.

``--config FILE`` reads a flat JSON object whose keys are the long flag
names (dashes or underscores); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .csvio import fmt, format_density_csv, read_density_csv, read_potential_csv
from .ed import solve
from .ensemble import EnsembleSpec, ensemble_curve
from .errors import ConvergenceError, HubbardEntError
from .functional import InteractionPoint, l_hom, l_hom_scan
from .lattice import SCENARIOS, LatticeSpec, l_lda, scan_with_derivative
from .sources import EDSource, ScanDirectorySource, parse_source
from .specfun import QuadratureConfig, alpha

log = logging.getLogger("hubbard_ent")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_CONVERGENCE = 0, 1, 2, 3

# flags that must end up set, from argv or the config file
REQUIRED = {
    "alpha": ("u",),
    "homog": ("n", "u"),
    "homog-scan": ("u", "n_grid"),
    "lda": ("u", "density"),
    "scan": ("scenario", "u", "grid", "source"),
    "ed": ("sites", "up", "down", "u", "boundary"),
    "disorder": ("sites", "up", "down", "u", "concentration", "v_grid", "samples", "seed", "source"),
}


@dataclass
class RunConfig:
    command: str
    params: dict
    out: Path | None = None
    fmt: str = "csv"
    threads: int = 1
    extra_outputs: dict = field(default_factory=dict)


class UsageError(Exception):
    pass


def parse_grid(text: str) -> np.ndarray:
    """'start:stop:steps', endpoints inclusive, steps = number of points."""
    try:
        start, stop, steps = str(text).split(":")
        start, stop, steps = float(start), float(stop), int(steps)
    except ValueError:
        raise UsageError(f"grid {text!r} is not start:stop:steps") from None
    if steps < 1:
        raise UsageError(f"grid {text!r} needs at least one point")
    if steps == 1:
        return np.array([start])
    return np.linspace(start, stop, steps)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat JSON file of flag values")
    common.add_argument("--out", type=Path, help="output file (default: stdout)")
    common.add_argument("--threads", type=int, help="worker cap (results do not depend on it)")

    p = argparse.ArgumentParser(prog="hubbard-ent", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("alpha", parents=[common], help="double occupancy alpha(u) at half filling")
    a.add_argument("--u", type=float)
    a.add_argument("--tol", type=float)

    h = sub.add_parser("homog", parents=[common], help="homogeneous functional L(n, u)")
    h.add_argument("--n", type=float)
    h.add_argument("--u", type=float)

    hs = sub.add_parser("homog-scan", parents=[common], help="L(n, u) over a density grid")
    hs.add_argument("--u", type=float)
    hs.add_argument("--n-grid")

    ld = sub.add_parser("lda", parents=[common], help="LDA entanglement of a density CSV")
    ld.add_argument("--u", type=float)
    ld.add_argument("--density", type=Path)

    sc = sub.add_parser("scan", parents=[common], help="LDA entanglement over a scenario parameter")
    sc.add_argument("--scenario", choices=sorted(SCENARIOS))
    sc.add_argument("--u", type=float)
    sc.add_argument("--grid")
    sc.add_argument("--source")
    sc.add_argument("--sites", type=int)
    sc.add_argument("--up", type=int)
    sc.add_argument("--down", type=int)
    sc.add_argument("--boundary", choices=["open", "periodic"])
    sc.add_argument("--period", type=int, help="superlattice period in sites")

    e = sub.add_parser("ed", parents=[common], help="exact diagonalization of a small chain")
    e.add_argument("--sites", type=int)
    e.add_argument("--up", type=int)
    e.add_argument("--down", type=int)
    e.add_argument("--u", type=float)
    e.add_argument("--boundary", choices=["open", "periodic"])
    e.add_argument("--potential", type=Path, help="CSV with header site,potential")
    e.add_argument("--density-out", type=Path, help="also write densities as a density CSV")

    d = sub.add_parser("disorder", parents=[common], help="disordered-impurity ensemble curve")
    d.add_argument("--sites", type=int)
    d.add_argument("--up", type=int)
    d.add_argument("--down", type=int)
    d.add_argument("--u", type=float)
    d.add_argument("--concentration", type=float)
    d.add_argument("--v-grid")
    d.add_argument("--samples", type=int)
    d.add_argument("--seed", type=int)
    d.add_argument("--source")
    d.add_argument("--boundary", choices=["open", "periodic"])
    d.add_argument("--audit", type=Path, help="audit JSON path (default: <out>.audit.json)")
    return p


def _merge_config(ns: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    params = {k: v for k, v in vars(ns).items()}
    if ns.config is None:
        return params
    try:
        raw = json.loads(Path(ns.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: cannot read {ns.config}: {exc}") from None
    if not isinstance(raw, dict) or any(isinstance(v, (dict, list)) for v in raw.values()):
        raise UsageError("--config must hold a flat JSON object")
    # re-parse each value through the sub-parser so types match the flags
    sub = parser._subparsers._group_actions[0].choices[ns.command]
    known = {a.dest: a for a in sub._actions if a.dest != "help"}
    for key, value in raw.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("config", "command"):
            raise UsageError(f"--config: unknown key {key!r}")
        if params.get(dest) is not None:
            continue
        action = known[dest]
        try:
            params[dest] = action.type(value) if action.type else value
        except (TypeError, ValueError):
            raise UsageError(f"--config: bad value for {key!r}: {value!r}") from None
        if action.choices is not None and params[dest] not in action.choices:
            raise UsageError(f"--config: {key!r} must be one of {sorted(action.choices)}")
    return params


GRID_FLAGS = ("--grid", "--n-grid", "--v-grid")


def _glue_grids(argv):
    # argparse would read '-8:8:17' as an option; bind it to its flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok in GRID_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def parse_args(argv=None) -> RunConfig:
    """Parse and validate; raises SystemExit(2) on usage errors."""
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = parser.parse_args(_glue_grids(argv))
    try:
        params = _merge_config(ns, parser)
        missing = [k for k in REQUIRED[ns.command] if params.get(k) is None]
        if missing:
            raise UsageError(
                "missing required flag(s): " + ", ".join("--" + m.replace("_", "-") for m in missing)
            )
        cfg = _validate(ns.command, params)
    except (UsageError, HubbardEntError, ValueError) as exc:
        sub = parser._subparsers._group_actions[0].choices[ns.command]
        sub.error(str(exc))
    threads = params.get("threads") or 1
    if threads < 1:
        parser.error("--threads must be >= 1")
    cfg.threads = threads
    return cfg


def _validate(command: str, p: dict) -> RunConfig:
    """Check every parameter against the target module before computing."""
    out = p.get("out")
    if command == "alpha":
        qc = QuadratureConfig(abs_tol=p["tol"]) if p.get("tol") is not None else QuadratureConfig()
        if p["u"] < 0:
            raise UsageError("--u must be >= 0 (alpha is defined for |u|)")
        return RunConfig(command, {"u": p["u"], "quad": qc}, out, "txt")
    if command == "homog":
        return RunConfig(command, {"point": InteractionPoint(p["n"], p["u"])}, out, "txt")
    if command == "homog-scan":
        grid = parse_grid(p["n_grid"])
        for n in grid:
            InteractionPoint(n, p["u"])
        return RunConfig(command, {"u": p["u"], "grid": grid}, out, "csv")
    if command == "lda":
        return RunConfig(command, {"u": p["u"], "density": p["density"]}, out, "txt")
    if command == "scan":
        grid = parse_grid(p["grid"])
        kind, path = parse_source(p["source"])
        params = {"scenario": p["scenario"], "u": p["u"], "grid": grid,
                  "period": p.get("period") or 2}
        if kind == "ed":
            for key in ("sites", "up", "down"):
                if p.get(key) is None:
                    raise UsageError(f"--source ed needs --{key}")
            params["source"] = EDSource(p["sites"], p["up"], p["down"], p["u"],
                                        p.get("boundary") or "open")
            params["sites"] = p["sites"]
            # fail early on a bad scenario/size combination
            SCENARIOS[p["scenario"]](p["sites"], float(grid[0]), period=params["period"])
        else:
            params["source"] = ScanDirectorySource(path)
            params["sites"] = p.get("sites")
        return RunConfig(command, params, out, "csv")
    if command == "ed":
        pot = read_potential_csv(p["potential"]) if p.get("potential") else (0.0,) * p["sites"]
        spec = LatticeSpec(p["sites"], p["boundary"], pot, p["up"], p["down"])
        return RunConfig(command, {"spec": spec, "u": p["u"], "density_out": p.get("density_out")},
                         out, "json")
    if command == "disorder":
        kind, path = parse_source(p["source"])
        spec = EnsembleSpec(p["sites"], p["up"], p["down"], p["u"], p["concentration"],
                            tuple(parse_grid(p["v_grid"])), p["samples"], p["seed"],
                            p.get("boundary") or "periodic")
        audit = p.get("audit")
        if audit is None:
            audit = Path(f"{out}.audit.json") if out else Path("disorder.audit.json")
        return RunConfig(command, {"spec": spec, "source": "ed" if kind == "ed" else path},
                         out, "csv", extra_outputs={"audit": audit})
    raise UsageError(f"unknown command {command}")


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(c if isinstance(c, str) else fmt(c) if isinstance(c, float) else str(c)
                       for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def run(cfg: RunConfig):
    """Compute the result of a validated run; returns {path-or-None: text}."""
    p = cfg.params
    if cfg.command == "alpha":
        return {cfg.out: repr(alpha(p["u"], p["quad"]).value) + "\n"}
    if cfg.command == "homog":
        return {cfg.out: repr(l_hom(p["point"])) + "\n"}
    if cfg.command == "homog-scan":
        rows = l_hom_scan(p["u"], p["grid"])
        return {cfg.out: _csv(("n", "L"), rows)}
    if cfg.command == "lda":
        return {cfg.out: repr(l_lda(read_density_csv(p["density"]), p["u"])) + "\n"}
    if cfg.command == "scan":
        make = SCENARIOS[p["scenario"]]
        n_sites = p["sites"]

        def potential_of(x):
            return make(n_sites, x, period=p["period"]) if n_sites else ()

        res = scan_with_derivative(potential_of, p["grid"], p["u"], p["source"],
                                   threads=cfg.threads)
        rows = list(zip(res.params, res.l_lda, res.dl_dparam))
        return {cfg.out: _csv(("param", "L", "dL_dparam"), rows)}
    if cfg.command == "ed":
        res = solve(p["spec"], p["u"])
        outputs = {cfg.out: _json(ed_json(res))}
        if p["density_out"]:
            outputs[p["density_out"]] = format_density_csv(res.probabilities.profile())
        return outputs
    if cfg.command == "disorder":
        res = ensemble_curve(p["spec"], p["source"], threads=cfg.threads)
        rows = [(pt.strength, pt.mean_l, pt.stderr, pt.n_samples) for pt in res.points]
        return {
            cfg.out: _csv(("V", "mean_L", "stderr", "n_samples"), rows),
            cfg.extra_outputs["audit"]: _json(audit_json(res)),
        }
    raise UsageError(cfg.command)


def ed_json(res) -> dict:
    probs = res.probabilities
    return {
        "sites": res.spec.n_sites,
        "up": res.spec.n_up,
        "down": res.spec.n_down,
        "u": res.u,
        "boundary": res.spec.boundary.value,
        "energy": res.ground.energy,
        "gap_estimate": res.ground.gap_estimate,
        "residual": res.ground.residual,
        "degenerate": res.ground.degenerate,
        "densities": [float(x) for x in probs.densities],
        "probabilities": [
            {"w0": float(a), "w_up": float(b), "w_down": float(c), "w2": float(d)}
            for a, b, c, d in zip(probs.w0, probs.w_up, probs.w_down, probs.w2)
        ],
        "site_entropies": [float(x) for x in probs.entropies],
        "average_entropy": probs.average_entropy,
    }


def audit_json(res) -> dict:
    s = res.spec
    return {
        "spec": {
            "sites": s.n_sites, "up": s.n_up, "down": s.n_down, "u": s.u,
            "concentration": s.concentration, "strength_grid": list(s.strength_grid),
            "samples": s.samples, "seed": s.master_seed, "boundary": s.boundary.value,
            "complemented": s.complemented,
        },
        "realizations": [
            {"sample": r.sample_index, "seed": r.seed, "sites": [i + 1 for i in r.sites],
             "V": r.strength, "L": r.l_lda, "L_exact": r.l_exact, "error": r.error}
            for r in res.records
        ],
    }


def emit(outputs: dict) -> None:
    for path, text in outputs.items():
        if path is None:
            sys.stdout.write(text)
        else:
            Path(path).write_text(text)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    cfg = parse_args(argv)
    try:
        emit(run(cfg))
    except ConvergenceError as exc:
        print(f"hubbard-ent: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (HubbardEntError, OSError) as exc:
        print(f"hubbard-ent: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
