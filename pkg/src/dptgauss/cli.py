"""Command-line front end: ``dptgauss classify | sweep | verify | choi``.

Exit codes: 0 on success, 1 when a verification suite fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .analysis import (
    CHOI_MODES,
    CHOI_PARTITION,
    DEFAULT_CHOI_R,
    Direction,
    choi_classification,
    choi_cm,
    classify,
    converter_is_eb,
    converter_params,
    eb_threshold,
    squeezer_log_negativity,
    tmsls_params,
)
from .errors import DptError
from .gaussian import identity_channel, is_ppt, pt_symplectic_eigenvalues
from .model import closed_form_channel
from .separability import SDP_TOL, classify_separability
from .sweep import (
    METHODS,
    SweepSpec,
    default_tolerances,
    load_json,
    load_params,
    make_manifest,
    manifest_path,
    rows_to_csv,
    run_sweep,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _write(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def classify_report(d, pump, r=DEFAULT_CHOI_R, tol=SDP_TOL, numeric=False):
    """Machine-readable report for one device."""
    report = {"pump": {"sigma_a": pump.sigma_a, "sigma_b": pump.sigma_b}, "params": d.as_dict()}
    ch = closed_form_channel(d, pump)
    report["channel"] = {"T": ch.T.tolist(), "N": ch.N.tolist()}
    eb = {}
    for direction in Direction:
        p = converter_params(d, pump, direction)
        eb[direction.value] = {
            "entanglement_breaking": converter_is_eb(d, pump, direction),
            "tau_eff": p.tau_eff,
            "noise_eff": p.noise_eff,
            "phase_conjugating": p.conjugating,
        }
    if pump.is_beamsplitter:
        rep = classify(d)
        th = rep.thresholds
        report["type"] = "beamsplitter"
        report["region"] = rep.region.value
        report["nu_a"], report["nu_b"] = _jsonable(float(th.nu_a)), _jsonable(float(th.nu_b))
        report["sep_threshold"] = _jsonable(float(th.sep_threshold))
        report["ppt_threshold"] = _jsonable(float(th.ppt_threshold))
        report["margins"] = {k: _jsonable(float(v)) for k, v in rep.margins.items()}
        for direction in Direction:
            eb[direction.value]["threshold"] = float(eb_threshold(d, direction))
        if numeric:
            try:
                report["choi_region"] = choi_classification(d, r, tol=tol).value
            except RuntimeError:
                report["choi_region"] = "undecided"
            report["choi_r"] = r
    else:
        t = tmsls_params(d, pump) if d.C_a > 0 and d.C_b > 0 else None
        report["type"] = "squeezer"
        report["log_negativity"] = squeezer_log_negativity(d, pump)
        if t is not None:
            report["tmsls"] = {"cosh_r_prime": t.cosh_r_prime, "tau_prime_i": t.tau_prime_i, "tau_prime_j": t.tau_prime_j, "roles": list(t.roles)}
    report["one_mode"] = eb
    return report


def _text_report(rep):
    lines = [f"pump: sigma_a={rep['pump']['sigma_a']:+d} sigma_b={rep['pump']['sigma_b']:+d} ({rep['type']})"]
    if rep["type"] == "beamsplitter":
        lines.append(f"region: {rep['region']}")
        for key in ("nu_a", "nu_b", "sep_threshold", "ppt_threshold"):
            lines.append(f"{key}: {rep[key]}")
        for key, value in rep["margins"].items():
            lines.append(f"margin_{key}: {value}")
        if "choi_region" in rep:
            lines.append(f"choi_region (r={rep['choi_r']}): {rep['choi_region']}")
    else:
        lines.append(f"log_negativity: {rep['log_negativity']}")
        if "tmsls" in rep:
            t = rep["tmsls"]
            lines.append(f"tmsls: cosh_r'={t['cosh_r_prime']} tau'_i={t['tau_prime_i']} tau'_j={t['tau_prime_j']} roles={t['roles']}")
    for name, info in rep["one_mode"].items():
        verdict = "EB" if info["entanglement_breaking"] else "not EB"
        extra = f" threshold={info['threshold']}" if "threshold" in info else ""
        lines.append(f"{name}-conversion: {verdict} tau_eff={info['tau_eff']} noise_eff={info['noise_eff']}{extra}")
    return "\n".join(lines) + "\n"


def cmd_classify(args):
    d, pump, extras = load_params(args.params)
    r = args.r if args.r is not None else extras.get("r", DEFAULT_CHOI_R)
    tol = args.tol if args.tol is not None else extras.get("tol", SDP_TOL)
    rep = classify_report(d, pump, r, tol, numeric=args.numeric)
    text = json.dumps(rep, indent=2) + "\n" if args.format == "json" else _text_report(rep)
    _write(text, args.out)
    return EXIT_OK


def cmd_sweep(args):
    obj, raw = load_json(args.spec)
    spec = SweepSpec.from_dict(obj)
    r = args.r if args.r is not None else DEFAULT_CHOI_R
    tol = args.tol if args.tol is not None else SDP_TOL
    rows = run_sweep(spec, method=args.method, r=r, tol=tol, jobs=args.jobs)
    text = rows_to_csv(rows, spec.outputs)
    if args.out is None:
        sys.stdout.write(text)
        return EXIT_OK
    _write(text, args.out)
    manifest = make_manifest(__version__, raw, text, default_tolerances(args.method, r, tol), spec.as_dict())
    _write(manifest.to_json(), manifest_path(args.out))
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_all

    if args.draws < 1:
        raise InputError("--draws must be at least 1")
    r = args.r if args.r is not None else DEFAULT_CHOI_R
    results = run_all(seed=args.seed, draws=args.draws, perturb_N=args.perturb_N, r=r)
    lines = [res.line() for res in results]
    failed = [res.name for res in results if not res.passed]
    lines.append(f"{len(results) - len(failed)}/{len(results)} suites passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_choi(args):
    extras = {}
    if args.identity:
        ch = identity_channel(2)
    else:
        if args.params is None:
            raise InputError("choi needs a parameter file unless --identity is given")
        d, pump, extras = load_params(args.params)
        ch = closed_form_channel(d, pump)
    r = args.r if args.r is not None else extras.get("r", DEFAULT_CHOI_R)
    tol = args.tol if args.tol is not None else extras.get("tol", SDP_TOL)
    V = choi_cm(ch, r)
    nus = pt_symplectic_eigenvalues(V, CHOI_PARTITION)
    out = {
        "r": r,
        "modes": [m.name for m in CHOI_MODES],
        "partition": [sorted(CHOI_PARTITION.side_a), sorted(CHOI_PARTITION.side_b)],
        "matrix": [[float(x) for x in row] for row in np.asarray(V.data)],
        "pt_symplectic_eigenvalues": [float(x) for x in nus],
        "ppt": bool(is_ppt(V, CHOI_PARTITION)),
        "separability": classify_separability(V, CHOI_PARTITION, tol=tol).value,
    }
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="dptgauss", description="Gaussian-channel analysis of doubly-parametric transducers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--tol", type=float, default=None, help="separability SDP tolerance")
        p.add_argument("--r", type=float, default=None, help="Choi squeezing parameter")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        if seed:
            p.add_argument("--seed", type=int, default=42)
            p.add_argument("--draws", type=int, default=1000)

    p = sub.add_parser("classify", help="region and one-mode EB report for one parameter file")
    p.add_argument("params")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--numeric", action="store_true", help="also classify the Choi state numerically")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="threshold curves as CSV plus a manifest")
    p.add_argument("spec")
    p.add_argument("--method", choices=METHODS, default="closed")
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the cross-validation suites")
    p.add_argument("--perturb-N", dest="perturb_N", type=float, default=0.0, help="inject a fault into the closed-form noise matrix")
    common(p, seed=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("choi", help="dump the Choi covariance matrix with PPT and separability verdicts")
    p.add_argument("params", nargs="?")
    p.add_argument("--identity", action="store_true", help="use the identity channel instead of a device")
    common(p)
    p.set_defaults(func=cmd_choi)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.r is not None and not args.r > 0:
        print("error: --r must be positive", file=sys.stderr)
        return EXIT_INPUT
    if args.tol is not None and not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (DptError, InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
