"""Command-line pipeline: predict -> simulate -> reconstruct -> analyze.

Exit codes
----------
0  success
2  usage or configuration error (unknown scenario, missing seed, bad exposure)
3  malformed input data (counts file, density-matrix file)
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .entanglement import report
from .errors import ConfigurationError, EraserError, ParameterError
from .measurement import (
    DEFAULT_ANGLES,
    AngleSet,
    born_probability,
    correlation,
    read_counts,
    simulate_counts,
    standard_tomography_set,
    write_counts,
    ProjectionSetting,
)
from .qstate import linear_polarizer, read_density, write_matrix
from .spdc import FilterScenario, predict, rho_from_coherence, coherence_gaussian
from .tomography import linear_invert, mle_reconstruct, reconstruction_report, write_report

EXIT_USAGE = 2
EXIT_DATA = 3



class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _scenario(args) -> FilterScenario:
    if getattr(args, "config", None):
        try:
            sc = FilterScenario.load(args.config)
        except ConfigurationError as exc:
            raise CliError(str(exc), EXIT_USAGE) from exc
    else:
        sc = FilterScenario()
    overrides = {}
    if args.bandwidth is not None:
        overrides["bandwidth_nm"] = args.bandwidth
    if args.center is not None:
        overrides["center_nm"] = args.center
    if args.tau is not None:
        overrides["tau_fs"] = args.tau
    if args.sigma_t is not None:
        overrides["sigma_t_fs"] = args.sigma_t
    return FilterScenario(**{**sc.__dict__, **overrides})


def _has_scenario(args) -> bool:
    return any(getattr(args, k, None) is not None for k in ("config", "bandwidth", "sigma_t"))


def _angles(args) -> AngleSet:
    if not getattr(args, "angles", None):
        return DEFAULT_ANGLES
    try:
        return AngleSet.parse(args.angles)
    except ValueError as exc:
        raise CliError(f"--angles: {exc}", EXIT_USAGE) from exc


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_predict(args) -> int:
    try:
        pred = predict(_scenario(args))
    except (ConfigurationError, ParameterError) as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    rep = report(pred.rho, _angles(args))
    out = _out_dir(args)
    _write_json(out / "prediction.json", {
        "scenario": pred.scenario.to_json(),
        "sigma_t_fs": pred.sigma_t_fs,
        "coherence": pred.coherence,
    })
    write_matrix(out / "rho.json", pred.rho.entries)
    _write_json(out / "report.json", rep.to_json())
    print(f"C = {pred.coherence:.6f}  (sigma_t = {pred.sigma_t_fs:.2f} fs, tau = {pred.scenario.tau_fs:g} fs)")
    print(f"concurrence = {rep.concurrence:.6f}  entropy = {rep.entropy_nats:.6f} nats  "
          f"S = {rep.s_fixed:.4f}  S_max = {rep.s_max:.4f}")
    return 0


def cmd_simulate(args) -> int:
    if args.seed is None:
        raise CliError("simulate requires --seed", EXIT_USAGE)
    if args.exposure is None or not args.exposure > 0:
        raise CliError("--exposure must be a positive number", EXIT_USAGE)
    if args.rho:
        try:
            rho = read_density(args.rho)
        except (OSError, EraserError) as exc:
            raise CliError(f"{args.rho}: {exc}", EXIT_DATA) from exc
    elif _has_scenario(args):
        try:
            sc = _scenario(args)
            rho = rho_from_coherence(coherence_gaussian(sc.wave_packet()))
        except (ConfigurationError, ParameterError) as exc:
            raise CliError(str(exc), EXIT_USAGE) from exc
    else:
        raise CliError("simulate needs --rho or a scenario (--bandwidth / --sigma-t)", EXIT_USAGE)
    records = simulate_counts(rho, standard_tomography_set(), args.exposure, args.seed)
    out = _out_dir(args)
    write_counts(out / "counts.json", records)
    print(f"wrote {len(records)} records to {out / 'counts.json'}")
    return 0


def cmd_reconstruct(args) -> int:
    if not args.counts:
        raise CliError("reconstruct requires --counts", EXIT_USAGE)
    try:
        records = read_counts(args.counts)
        raw = linear_invert(records)
    except (OSError, ValueError) as exc:
        raise CliError(f"{args.counts}: {exc}", EXIT_DATA) from exc
    mle = mle_reconstruct(records, init=raw, seed=0 if args.seed is None else args.seed)
    out = _out_dir(args)
    write_matrix(out / "rho_linear.json", raw.entries)
    write_matrix(out / "rho_mle.json", mle.rho.entries)
    write_report(out / "reconstruction.json", reconstruction_report(raw, mle))
    raw_eigs = ", ".join(f"{x:.3f}" for x in raw.eigenvalues)
    mle_eigs = ", ".join(f"{x:.3f}" for x in mle.rho.eigenvalues)
    print(f"linear inversion eigenvalues {{{raw_eigs}}}" + ("" if raw.legitimate else "  (illegitimate)"))
    print(f"maximum likelihood eigenvalues {{{mle_eigs}}}  objective {mle.objective:.4g}"
          f"  converged={mle.converged}")
    return 0


def fringe_rows(rho, alice_angles=(45.0, 135.0), step: float = 5.0):
    """Coincidence probability and correlation vs Bob's polarizer angle."""
    rows = []
    for theta_b in np.arange(0.0, 180.0 + 1e-9, step):
        row = {"bob_angle_deg": float(theta_b)}
        for a in alice_angles:
            s = ProjectionSetting(linear_polarizer(a), linear_polarizer(theta_b), f"{a:g}:{theta_b:g}")
            row[f"rate_alice{a:g}"] = born_probability(rho, s)
        for a in alice_angles:
            row[f"E_alice{a:g}"] = correlation(rho, a, theta_b)
        rows.append(row)
    return rows


def cmd_analyze(args) -> int:
    if not args.rho:
        raise CliError("analyze requires --rho", EXIT_USAGE)
    try:
        rho = read_density(args.rho)
    except (OSError, EraserError) as exc:
        raise CliError(f"{args.rho}: {exc}", EXIT_DATA) from exc
    rep = report(rho, _angles(args))
    out = _out_dir(args)
    _write_json(out / "report.json", rep.to_json())
    rows = fringe_rows(rho)
    with open(out / "fringes.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) for k, v in row.items()})
    verdict = "violates" if rep.violates_chsh else "does not violate"
    print(f"concurrence = {rep.concurrence:.4f}  entropy = {rep.entropy_nats:.4f} nats")
    print(f"S = {rep.s_fixed:.4f} ({verdict} CHSH)  S_max = {rep.s_max:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eraser", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p):
        p.add_argument("--config", help="scenario JSON file")
        p.add_argument("--bandwidth", type=float, help="filter FWHM bandwidth (nm), catalogued values only")
        p.add_argument("--center", type=float, help="filter center wavelength (nm)")
        p.add_argument("--sigma-t", dest="sigma_t", type=float, help="explicit wave-packet width (fs)")
        p.add_argument("--tau", type=float, help="inter-packet delay (fs)")

    p = sub.add_parser("predict", help="coherence, density matrix and report for a filter scenario")
    scenario_flags(p)
    p.add_argument("--angles", help="CHSH angles a1,a2,b1,b2 in degrees")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="Poisson coincidence counts for the 16 tomography settings")
    scenario_flags(p)
    p.add_argument("--rho", help="density-matrix JSON file")
    p.add_argument("--exposure", type=float, help="expected pairs per setting")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="linear inversion and maximum-likelihood reconstruction")
    p.add_argument("--counts", help="counts JSON file")
    p.add_argument("--seed", type=int, help="seed for the multi-start restarts (default 0)")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("analyze", help="entanglement report and correlation fringes")
    p.add_argument("--rho", help="density-matrix JSON file")
    p.add_argument("--angles", help="CHSH angles a1,a2,b1,b2 in degrees")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"eraser {args.command}: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
