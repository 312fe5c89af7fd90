"""``mes-locc`` command line.

Exit codes: 0 when every executed check passes (or the run is purely
informational), 1 on a failed check, 2 on usage errors and unreadable
state files.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .entanglement import (
    check_entry,
    entanglement_entropy,
    log_negativity,
    ppt_check,
    reduced_entropy,
    schmidt_decomposition,
    smolin_decomposition_check,
)
from .protocols import discriminate, distill_copy, teleport
from .serialization import StateFormatError, dumps, load_state, save_state
from .states import (
    BellIndex,
    ResourceSpec,
    bell_basis_matrix,
    bell_indices,
    bell_state,
    build_rho,
    build_rho_s,
    factorized_rho,
    haar_random_state,
    resource_state,
)
from .tensor import EXACT_TOL, PSD_TOL, SPECTRAL_TOL, StateVector, SubsystemLayout, fidelity_pure
from .verify import MAX_D, RHO_MAX_D, SUITES, SuiteConfig, run_suite, summarize

SEED_ENV = "MES_LOCC_SEED"
RHO_CHECKS = ("ppt", "reorder", "lognegativity", "smolin")


class UsageError(Exception):
    pass


def _dim(text: str) -> int:
    try:
        d = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid dimension {text!r}") from None
    if not 2 <= d <= MAX_D:
        raise argparse.ArgumentTypeError(f"d must be in [2, {MAX_D}], got {d}")
    return d


def _index_pair(text: str) -> tuple[int, int]:
    try:
        m, n = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected m,n, got {text!r}") from None
    return m, n


def _tol_override(text: str) -> tuple[str, float]:
    key, _, value = text.partition("=")
    if key not in ("exact", "psd", "spectral"):
        raise argparse.ArgumentTypeError(f"tolerance key must be exact, psd or spectral, got {key!r}")
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value {value!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")
    common.add_argument("--report", type=Path, help="write a JSON check report here")

    parser = argparse.ArgumentParser(prog="mes-locc", description="Qudit MES discrimination and LOCC checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bell", parents=[common], help="write one canonical maximally entangled state")
    p.add_argument("--d", type=_dim, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("basis", parents=[common], help="check orthonormality and completeness of the basis")
    p.add_argument("--d", type=_dim, required=True)

    p = sub.add_parser("teleport", parents=[common], help="teleport a qudit through a resource")
    p.add_argument("--d", type=_dim, required=True)
    p.add_argument("--input", type=Path, help="single-qudit state file (default: Haar-random from --seed)")
    p.add_argument("--resource", default="mes")
    p.add_argument("--shots", type=int, default=0, help="also print this many sampled outcomes")

    p = sub.add_parser("discriminate", parents=[common], help="identify a hidden basis state by LOCC")
    p.add_argument("--d", type=_dim, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--hidden", type=_index_pair)
    g.add_argument("--all", action="store_true")
    p.add_argument("--resource", default="mes")

    p = sub.add_parser("rho", parents=[common], help="checks on the flagged mixture and rho_s")
    p.add_argument("--d", type=_dim, required=True)
    p.add_argument("--resource", default="mes")
    p.add_argument("--check", choices=RHO_CHECKS + ("all",), default="all")
    p.add_argument("--out", type=Path, help="write rho as a density state file")

    p = sub.add_parser("distill", parents=[common], help="single-copy distillation from the flagged mixture")
    p.add_argument("--d", type=_dim, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--component", type=_index_pair)
    g.add_argument("--all", action="store_true")
    p.add_argument("--resource", default="mes")

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", action="append", choices=SUITES + ("all", "none"),
                   help="suite to run (repeatable); 'none' runs nothing")
    p.add_argument("--max-d", type=_dim, default=3)
    p.add_argument("--tol", type=_tol_override, action="append", default=[], metavar="KEY=VALUE",
                   help="override a tolerance (exact, psd, spectral)")
    return parser


def _resource(text: str, d: int, labels=("A", "B")) -> StateVector:
    try:
        return resource_state(ResourceSpec.parse(text, d), labels)
    except StateFormatError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _bell_index(d: int, pair) -> BellIndex:
    try:
        return BellIndex(d, *pair)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def cmd_bell(args) -> tuple[list[dict], bool]:
    idx = _bell_index(args.d, (args.m, args.n))
    phi = bell_state(idx)
    print(f"|phi_{{{idx.m},{idx.n}}}> in {args.d}x{args.d}:")
    for k, a in enumerate(phi.amplitudes):
        if abs(a) > 0:
            print(f"  |{k // args.d},{k % args.d}>  {_fmt(a.real)} {_fmt(a.imag)}i")
    if args.out:
        save_state(phi, args.out)
        print(f"wrote {args.out}")
    return [], False


def cmd_basis(args) -> tuple[list[dict], bool]:
    d = args.d
    b = bell_basis_matrix(d)
    gram = float(np.max(np.abs(b.conj() @ b.T - np.eye(d * d))))
    comp = float(np.max(np.abs(b.T @ b.conj() - np.eye(d * d))))
    checks = [
        check_entry("basis.gram", d, {}, gram, EXACT_TOL, gram <= EXACT_TOL),
        check_entry("basis.completeness", d, {}, comp, EXACT_TOL, comp <= EXACT_TOL),
    ]
    print(f"d={d}: {d * d} states, max |G - I| = {gram:.3e}, max |sum P - I| = {comp:.3e}")
    return checks, True


def cmd_teleport(args) -> tuple[list[dict], bool]:
    d = args.d
    if args.input:
        chi = load_state(args.input)
        if not isinstance(chi, StateVector) or len(chi.layout) != 1 or chi.layout.dims[0] != d:
            raise StateFormatError(f"{args.input}: expected a single-qudit pure state of dimension {d}")
        chi = StateVector(SubsystemLayout.of(("C", d, "A")), chi.amplitudes)
    else:
        chi = haar_random_state([d], args.seed, labels=["C"])
    resource = _resource(args.resource, d)
    try:
        run = teleport(chi, resource)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    target = StateVector(resource.layout.subset(["B"]), chi.amplitudes)
    checks = []
    print(f"teleport d={d}, resource {args.resource}: {len(run.branches)} branches")
    fids = []
    for br in run.branches:
        f = fidelity_pure(target, br.post_state)
        fids.append(br.probability * f)
        print(f"  outcome {br.outcome}  p={_fmt(br.probability)}  fidelity={_fmt(f)}")
        checks.append(check_entry("teleport.branch", d, {"outcome": list(br.outcome.pair)},
                                  {"probability": br.probability, "fidelity": f}, None, None))
    avg = math.fsum(fids)
    print(f"  average fidelity {_fmt(avg)}")
    checks.append(check_entry("teleport.average_fidelity", d, {"resource": args.resource}, avg, None, None))
    if args.shots:
        samples = run.sample(args.shots, args.seed)
        print("  sampled outcomes: " + " ".join(str(s) for s in samples))
    return checks, False


def cmd_discriminate(args) -> tuple[list[dict], bool]:
    d = args.d
    resource = _resource(args.resource, d)
    hidden = bell_indices(d) if args.all else [_bell_index(d, args.hidden)]
    checks = []
    print(f"discriminate d={d}, resource {args.resource}")
    for h in hidden:
        try:
            dist = discriminate(h, resource).distribution()
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        p = dist.get(h, 0.0)
        others = ", ".join(f"{k}:{v:.6f}" for k, v in dist.items() if k != h)
        print(f"  hidden {h}: success {_fmt(p)}" + (f"  (other announcements {others})" if others else ""))
        checks.append(check_entry("discriminate.success", d, {"hidden": list(h.pair), "resource": args.resource},
                                  p, None, None))
    return checks, False


def cmd_rho(args) -> tuple[list[dict], bool]:
    d = args.d
    if d > RHO_MAX_D:
        raise UsageError(f"rho checks are limited to d <= {RHO_MAX_D}")
    psi = _resource(args.resource, d)
    wanted = RHO_CHECKS if args.check == "all" else (args.check,)
    params = {"resource": args.resource}
    checks = []
    rho = build_rho(d, psi)
    if "reorder" in wanted:
        dist = float(np.linalg.norm(rho.matrix - factorized_rho(d, psi).matrix))
        checks.append(check_entry("rho.factorization", d, params, dist, EXACT_TOL, dist <= EXACT_TOL))
        print(f"factorization ||rho - P(rho_s x psi)P^T||_F = {dist:.3e}")
    if "ppt" in wanted:
        ok, lo = ppt_check(build_rho_s(d))
        checks.append(check_entry("rho_s.ppt", d, {}, lo, PSD_TOL, ok))
        print(f"rho_s PPT across Alice:Bob: {ok} (min eigenvalue {lo:.3e})")
    if "lognegativity" in wanted:
        ln_rho, ln_psi = log_negativity(rho), log_negativity(psi)
        ok = abs(ln_rho - ln_psi) <= SPECTRAL_TOL
        checks.append(check_entry("rho.lognegativity_chain", d, dict(params, log_negativity_psi=ln_psi),
                                  ln_rho, SPECTRAL_TOL, ok))
        print(f"log-negativity rho = {_fmt(ln_rho)}, psi = {_fmt(ln_psi)}")
    if "smolin" in wanted:
        if d == 2:
            ok, dist = smolin_decomposition_check(EXACT_TOL)
            checks.append(check_entry("rho_s.smolin_decomposition", d, {}, dist, EXACT_TOL, ok))
            print(f"Smolin separable decomposition distance {dist:.3e}")
        elif args.check == "smolin":
            raise UsageError("the explicit Smolin decomposition is only available for d=2")
    ent = entanglement_entropy(psi)
    _, rank = schmidt_decomposition(psi)
    print(f"resource: Schmidt rank {rank}, entropy {_fmt(ent)} bits (log2 d = {_fmt(math.log2(d))})")
    if args.out:
        save_state(rho, args.out)
    return checks, True


def cmd_distill(args) -> tuple[list[dict], bool]:
    d = args.d
    if d > RHO_MAX_D:
        raise UsageError(f"distill is limited to d <= {RHO_MAX_D}")
    psi = _resource(args.resource, d)
    comps = bell_indices(d) if args.all else [_bell_index(d, args.component)]
    checks = []
    print(f"distill d={d}, resource {args.resource}")
    for c in comps:
        try:
            res = distill_copy(d, c, psi)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        f = res.fidelity()
        ent = reduced_entropy(res.output, ["A3"])
        print(f"  component {c}: announced {res.announced}, fidelity {_fmt(f)}, entropy {_fmt(ent)} bits")
        checks.append(check_entry("distill.copy", d, {"component": list(c.pair), "resource": args.resource},
                                  {"fidelity": f, "entropy": ent}, None, None))
    return checks, False


def cmd_verify(args) -> dict:
    chosen = args.suite or ["all"]
    if "none" in chosen:
        suites: tuple[str, ...] = ()
    elif "all" in chosen:
        suites = SUITES
    else:
        suites = tuple(dict.fromkeys(chosen))
    cfg = SuiteConfig(suites=suites, max_d=args.max_d, seed=args.seed, tolerances=dict(args.tol))
    report = run_suite(cfg)
    for c in report["checks"]:
        mark = "PASS" if c["pass"] else "FAIL"
        print(f"{mark}  {c['name']:<32} d={c['d']}  measured={c['measured']}  tol={c['tolerance']}")
    s = report["summary"]
    print(f"{s['passed']}/{s['total']} checks passed")
    return report


COMMANDS = {
    "bell": cmd_bell,
    "basis": cmd_basis,
    "teleport": cmd_teleport,
    "discriminate": cmd_discriminate,
    "rho": cmd_rho,
    "distill": cmd_distill,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.command == "verify":
            report = cmd_verify(args)
            gated = True
        else:
            checks, gated = COMMANDS[args.command](args)
            config = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}
            report = summarize(checks, config)
    except (UsageError, StateFormatError) as exc:
        print(f"mes-locc: error: {exc}", file=sys.stderr)
        return 2
    if args.report:
        args.report.write_text(dumps(report) + "\n")
    if gated and not report["pass"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
