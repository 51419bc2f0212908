"""Command line front end.

Usage::

    effop dtn FILE [--method schur|zproblem|both]
    effop effcond FILE --pair P,Q
    effop lattice FILE
    effop zsolve FILE --e0 V1,V2,...
    effop verify [--suite all|counterexamples|algebra|network|lattice]

Every command accepts ``--format json|text``, ``--seed``, ``--rank-rtol``,
``--eq-atol`` and ``--psd-atol``.  Exit status is 0 on success, 1 when a
computation or hypothesis fails and 2 for unreadable input or bad usage.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import formats, lattice, network, verify, zproblem
from .errors import ComputationError, InputError, ParseError
from .numkit import DEFAULT_TOLERANCES, Tolerances, is_psd, is_selfadjoint

__all__ = ["RunConfig", "build_parser", "main", "run_dtn", "run_effcond", "run_lattice",
           "run_zsolve", "run_verify"]

EXIT_OK, EXIT_COMPUTATION, EXIT_USAGE = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str | None
    tol: Tolerances = DEFAULT_TOLERANCES
    output_format: str = "json"
    seed: int = 0

    def header(self) -> dict:
        return {
            "command": self.command,
            "input": self.input_path,
            "seed": self.seed,
            "tolerances": {"rank_rtol": self.tol.rank_rtol, "eq_atol": self.tol.eq_atol,
                           "psd_atol": self.tol.psd_atol},
        }

    def read(self) -> str:
        if self.input_path is None:
            raise InputError("an input file is required")
        try:
            return Path(self.input_path).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {self.input_path}: {exc.strerror}") from None


def _max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def run_dtn(config: RunConfig, method: str = "both") -> dict:
    doc = formats.parse_network(config.read())
    net = doc.network(config.tol)
    bp = doc.partition()
    routes = {}
    if method in ("schur", "both"):
        routes["schur"] = network.dtn_schur(net, bp)
    if method in ("zproblem", "both"):
        routes["zproblem"] = network.dtn_zproblem(net, bp)
    dtn = routes.get("schur", routes.get("zproblem"))
    residual = _max_abs(routes["schur"] - routes["zproblem"]) if len(routes) == 2 else None
    ones = np.ones(len(bp.boundary))
    report = config.header()
    report.update({
        "method": method,
        "boundary": list(doc.boundary),
        "dtn": dtn,
        "routes": routes,
        "route_residual": residual,
        "selfadjoint": is_selfadjoint(dtn, config.tol),
        "psd": is_psd(dtn, config.tol),
        "constant_in_kernel": _max_abs(dtn @ ones) <= config.tol.eq_atol * max(1.0, _max_abs(dtn)),
        "connected": network.is_connected(net.graph),
    })
    return report


def _parse_pair(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise ParseError(f"expected two comma-separated node names, got {text!r}", field="--pair")
    return parts[0], parts[1]


def run_effcond(config: RunConfig, pair: str) -> dict:
    doc = formats.parse_network(config.read())
    net = doc.network(config.tol)
    p, q = _parse_pair(pair)
    for name in (p, q):
        if name not in doc.nodes:
            raise ParseError(f"unknown node {name!r}", field="--pair")
    conductivity = network.effective_conductivity(net, p, q)
    zero = network.effcond_zero_test(net, p, q)
    report = config.header()
    report.update({
        "pair": [p, q],
        "sigma_eff": conductivity,
        "r_eff": network.effective_resistance(net, p, q),
        "zero_test": {"is_zero": zero.is_zero, "witness": zero.witness},
    })
    return report


def run_lattice(config: RunConfig) -> dict:
    doc = formats.parse_lattice(config.read())
    net = doc.network(config.tol)
    lat = net.lattice
    eff = lattice.lattice_effective_operator(net)
    existence = lattice.effcond_exists(net)
    compression = lattice.compression_check(net)
    sharp = lattice.periodic_dirichlet_decomp(lat, config.tol)
    sol = zproblem.solve(lattice.lattice_zproblem(net), np.ones(lat.edge_count))
    current = net.sigma @ (sol.e0 + sol.e_particular)
    report = config.header()
    report.update({
        "d": lat.d,
        "tau": list(lat.tau),
        "sigma_star": eff.matrix[0, 0],
        "hypotheses": eff.hypotheses.as_dict(),
        "decomposition_dims": dict(zip(("U", "E", "J"), net.decomposition.dims)),
        "periodic_gradients_dim": sharp.dims[0] + sharp.dims[1],
        "periodic_dirichlet_dims": dict(zip(("U_sharp", "E_sharp", "J_sharp"), sharp.dims)),
        "effcond_exists": existence.exists,
        "sigma_eff": existence.conductivity,
        "existence_residual": existence.residual,
        "compression": {"holds": compression.holds, "lhs": compression.lhs, "rhs": compression.rhs},
        "axis_average_current": lattice.axis_averages(lat, current),
    })
    return report


def run_zsolve(config: RunConfig, e0: str) -> dict:
    doc = formats.parse_zproblem(config.read())
    zp = doc.zproblem(config.tol)
    vector = formats.parse_vector(e0, "--e0")
    if vector.shape[0] != zp.dim:
        raise ParseError(f"e0 has {vector.shape[0]} entries, sigma acts on {zp.dim}", field="--e0")
    eff = zproblem.effective_operator(zp)
    sol = zproblem.solve(zp, vector)
    report = config.header()
    report.update({
        "e0": sol.e0,
        "j0": sol.j0,
        "e": sol.e_particular,
        "j": sol.j,
        "unique": sol.unique,
        "e_kernel_dim": sol.e_kernel.dim,
        "e_kernel_basis": sol.e_kernel.basis.T,
        "residual": sol.residual(),
        "effective_operator": eff.matrix,
        "effective_operator_exists": eff.exists,
        "hypotheses": eff.hypotheses.as_dict(),
    })
    return report


def run_verify(config: RunConfig, suite: str = "all") -> dict:
    report = config.header()
    report.update(verify.run_suite(suite, config.seed, config.tol).as_dict())
    return report


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json", dest="output_format")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--rank-rtol", type=float, default=DEFAULT_TOLERANCES.rank_rtol)
    common.add_argument("--eq-atol", type=float, default=DEFAULT_TOLERANCES.eq_atol)
    common.add_argument("--psd-atol", type=float, default=DEFAULT_TOLERANCES.psd_atol)

    parser = argparse.ArgumentParser(prog="effop", description="Effective operators of networks and lattices.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("dtn", parents=[common], help="Dirichlet-to-Neumann map of a network")
    p.add_argument("file")
    p.add_argument("--method", choices=("schur", "zproblem", "both"), default="both")
    p = sub.add_parser("effcond", parents=[common], help="effective conductivity between two nodes")
    p.add_argument("file")
    p.add_argument("--pair", required=True, help="two node names, comma separated")
    p = sub.add_parser("lattice", parents=[common], help="effective operator of a periodic lattice")
    p.add_argument("file")
    p = sub.add_parser("zsolve", parents=[common], help="solve a Z-problem")
    p.add_argument("file")
    p.add_argument("--e0", required=True, help="ambient vector, comma separated")
    p = sub.add_parser("verify", parents=[common], help="run the property suites")
    p.add_argument("--suite", choices=sorted(verify.SUITES), default="all")
    return parser


def _text(report: Any, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for key, value in report.items():
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_text(value, indent + 1))
        elif key == "checks":
            lines.append(f"{pad}checks:")
            for c in value:
                mark = "PASS" if c["passed"] else "FAIL"
                extra = f"  ({c['detail']})" if c["detail"] else ""
                lines.append(f"{pad}  {mark} {c['name']}: {c['cases']} cases, "
                             f"max residual {c['max_residual']:.3e}{extra}")
        else:
            shown = formats.dumps(value, indent=0).replace("\n", " ")
            lines.append(f"{pad}{key}: {shown}")
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = Tolerances(args.rank_rtol, args.eq_atol, args.psd_atol)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    config = RunConfig(args.command, getattr(args, "file", None), tol, args.output_format, args.seed)
    try:
        if args.command == "dtn":
            report = run_dtn(config, args.method)
        elif args.command == "effcond":
            report = run_effcond(config, args.pair)
        elif args.command == "lattice":
            report = run_lattice(config)
        elif args.command == "zsolve":
            report = run_zsolve(config, args.e0)
        else:
            report = run_verify(config, args.suite)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComputationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    out = formats.dumps(report) if config.output_format == "json" else _text(report)
    print(out)
    if args.command == "verify" and not report["passed"]:
        return EXIT_COMPUTATION
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
