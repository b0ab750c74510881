"""``qvk`` command line.

Exit codes: 0 success, 2 bad flags or input, 3 non-unitary input,
4 synthesis failure, 5 scenario schema error. Angles are given in units of pi.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import canon2q as c2
from . import efmis as ef
from . import gateprotocol as gp
from . import matkernel as mk
from . import prodgeom as pg
from . import simulator as sim
from . import stateverify as sv
from .errors import InfeasibleSpectrum, NotUnitary, QVKError, ScenarioError, SynthesisFailed

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_UNITARY = 3
EXIT_SYNTHESIS = 4
EXIT_SCENARIO = 5

CONTOUR_HEADER = ("alpha2", "alpha3", "zeta0sq")
TERNARY_HEADER = ("xi1", "xi2", "xi3", "alpha1", "alpha2", "alpha3")


class UsageError(Exception):
    pass


def _floats(text: str, n: int) -> list:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse {text!r} as numbers") from exc
    if len(vals) != n:
        raise UsageError(f"expected {n} comma-separated values, got {len(vals)}")
    return vals


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _emit(obj, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _target(args) -> tuple[np.ndarray, c2.CanonicalAngles | None, str]:
    """Unitary, raw angles (radians) when given, and a description."""
    given = [x for x in (args.unitary, args.angles, args.gate) if x is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --unitary, --angles, --gate")
    if args.unitary is not None:
        return mk.check_unitary(mk.matrix_from_json(_read_json(args.unitary))), None, args.unitary
    if args.angles is not None:
        a = c2.CanonicalAngles.from_pi_units(*_floats(args.angles, 3))
        return c2.build_canonical(a), a, f"U({args.angles} pi)"
    phi = None if args.phi is None else args.phi * math.pi
    try:
        return ef.gate_matrix(args.gate, phi), None, args.gate.upper()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_analyze(args) -> int:
    u, angles, desc = _target(args)
    spectrum = c2.operator_schmidt_spectrum(u)
    out = {
        "target": desc,
        "spectrum": [float(x) for x in spectrum],
        "schmidt_rank": c2.schmidt_rank(u),
        "spectrum_tag": pg.classify_by_spectrum(u),
        "mu": gp.mu(u),
    }
    try:
        out["angle_recovery"] = c2.recover_angles(spectrum).to_dict()
    except InfeasibleSpectrum as exc:
        out["angle_recovery"] = {"error": str(exc)}
    family_angles = None
    if angles is not None:
        region = pg.classify_region(*angles.as_tuple())
        out["region"] = region.to_dict()
        if angles.in_cell():
            family_angles = angles
    out["d_prod"] = pg.d_prod_estimate(u, args.samples, args.seed, family_angles)
    out["mu_from_dprod"] = gp.mu_from_dprod(4, out["d_prod"], True)
    out["mu_bounds"] = list(gp.mu_bounds_general(2, 2))
    _emit(out)
    return EXIT_OK


def cmd_verify_state(args) -> int:
    dims = [int(x) for x in _floats(args.dims, 2)]
    obj = _read_json(args.state)
    vec = mk.vector_from_json(obj["vector"] if isinstance(obj, dict) and "vector" in obj else obj)
    state = sv.BipartiteState.from_unnormalized(vec, *dims)
    strategy = sv.two_setting_protocol(state)
    out = {
        "schmidt_rank": sv.schmidt_decompose(state).rank,
        "settings": strategy.setting_count,
        "nu": strategy.nu,
        "strategy": strategy.to_dict(),
    }
    if (args.eps is None) != (args.delta is None):
        raise UsageError("--eps and --delta go together")
    if args.eps is not None:
        out["eps"], out["delta"] = args.eps, args.delta
        out["N"] = sv.sample_count(strategy.nu, args.eps, args.delta)
    _emit(out)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    u, _, desc = _target(args)
    protocol = gp.build_protocol(u, seed=args.seed)
    out = protocol.to_dict()
    out["description"] = desc
    _emit(out, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    path = Path(args.scenario)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ScenarioError("scenario must be a JSON object")
    env = os.environ.get("QVK_SEED")
    seed = None
    if env is not None:
        try:
            seed = int(env)
        except ValueError as exc:
            raise UsageError(f"QVK_SEED={env!r} is not an integer") from exc
    _emit(sim.run_scenario(obj, path.parent, seed, args.workers), args.out)
    return EXIT_OK


def contour_rows(grid: int) -> list:
    """``(alpha2, alpha3, |zeta0|^2)`` at ``alpha1 = pi/4`` on a grid over ``[0, pi/4]^2``."""
    axis = np.linspace(0.0, math.pi / 4, grid)
    rows = []
    for a2 in axis:
        for a3 in axis:
            z = c2.zeta(c2.CanonicalAngles(math.pi / 4, float(a2), float(a3)))
            rows.append((float(a2), float(a3), float(abs(z[0]) ** 2)))
    return rows


def ternary_rows(zeta0: float, grid: int) -> list:
    """Accessible barycentric points at fixed ``|zeta0|``.

    For each ``(alpha2, alpha3)`` with ``alpha3 <= alpha2`` the angle
    ``alpha1`` in ``[alpha2, pi/4]`` is solved from
    ``sin^2 alpha1 = (c2^2 c3^2 - z^2) / (c2^2 c3^2 - s2^2 s3^2)``.
    Points whose spectrum fails angle recovery are dropped.
    """
    if not 0.5 < zeta0 < 1.0:
        raise UsageError("--zeta0 must lie in (1/2, 1)")
    axis = np.linspace(0.0, math.pi / 4, grid)
    z2 = zeta0 ** 2
    rows = []
    for a2 in axis:
        for a3 in axis:
            if a3 > a2:
                continue
            cc = (math.cos(a2) * math.cos(a3)) ** 2
            den = cc - (math.sin(a2) * math.sin(a3)) ** 2
            if den <= 1e-15:
                continue
            s1sq = (cc - z2) / den
            if not math.sin(a2) ** 2 - 1e-12 <= s1sq <= 0.5 + 1e-12:
                continue
            a1 = math.asin(math.sqrt(min(max(s1sq, 0.0), 0.5)))
            angles = c2.CanonicalAngles(max(a1, float(a2)), float(a2), float(a3))
            spec = np.sort(np.abs(c2.zeta(angles)))[::-1]
            try:
                c2.recover_angles(spec)
                sample = pg.region_sample(angles)
            except (InfeasibleSpectrum, ValueError):
                continue
            rows.append(sample.xi + angles.as_tuple())
    return rows


def cmd_region(args) -> int:
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    if args.mode == "contour":
        header, rows = CONTOUR_HEADER, contour_rows(args.grid)
    else:
        if args.zeta0 is None:
            raise UsageError("ternary mode needs --zeta0")
        header, rows = TERNARY_HEADER, ternary_rows(args.zeta0, args.grid)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _add_target(p: argparse.ArgumentParser) -> None:
    p.add_argument("--unitary", metavar="FILE", help="4x4 matrix in the repo JSON format")
    p.add_argument("--angles", metavar="A1,A2,A3", help="canonical angles in units of pi")
    p.add_argument("--gate", metavar="NAME", help="CNOT, CZ, CPHASE, SWAP or I")
    p.add_argument("--phi", type=float, help="C-Phase phase in units of pi")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qvk", description="Verification protocols for states and two-qubit gates.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("analyze", help="spectrum, angles, region, mu and d_Prod of a unitary")
    _add_target(p)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify-state", help="two-setting strategy for a bipartite pure state")
    p.add_argument("--state", required=True, metavar="FILE")
    p.add_argument("--dims", required=True, metavar="DA,DB")
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.set_defaults(func=cmd_verify_state)

    p = sub.add_parser("synthesize", help="minimal-setting gate protocol")
    _add_target(p)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="run a scenario file")
    p.add_argument("--scenario", required=True, metavar="FILE")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("region", help="figure data as CSV")
    p.add_argument("--mode", choices=("contour", "ternary"), required=True)
    p.add_argument("--zeta0", type=float)
    p.add_argument("--grid", type=int, default=41)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_region)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotUnitary as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_UNITARY
    except SynthesisFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (UsageError, QVKError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
