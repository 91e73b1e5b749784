import argparse
import logging
import sys

from src.cli.commands import (
    cmd_averaged, cmd_coeffs, cmd_orbit, cmd_pipeline, cmd_reproduce,
    cmd_roots, cmd_validate, cmd_verify,
)
from src.core.settings import Settings

EXIT_USAGE = 64


class UsageParser(argparse.ArgumentParser):
    """argparse with usage errors on exit code 64; 2 belongs to validation failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_eps(text):
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"--eps expects a comma-separated list of numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("--eps needs at least one value")
    return values


def parse_zmax(text):
    if text.lower() == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--zmax expects a number or 'auto', got {text!r}")


def build_parser():
    common = UsageParser(add_help=False)
    common.add_argument("--config", help="Problem document (JSON)")
    common.add_argument("--tol", type=float, help="Absolute tolerance per coefficient integral (default 1e-9)")
    common.add_argument("--eps", type=parse_eps, help="Comma-separated decreasing eps ladder, e.g. 1e-3,1e-4")
    common.add_argument("--zmax", type=parse_zmax, help="Upper end of the root search, or 'auto' (Cauchy bound)")
    common.add_argument("--out", default="results", help="Output directory (default: results)")
    common.add_argument("--skip-verify", action="store_true", help="Do not run the return-map verification")
    common.add_argument("--fast-symmetry", action="store_true",
                        help="y=0 line: skip even-i integrals instead of checking that they vanish")
    common.add_argument("--printed-branch", action="store_true",
                        help="Evaluate coefficients with the principal-arctan closed form (worked-example centre only)")
    common.add_argument("--exact-blowup", action="store_true",
                        help="Verify with the exact blown-up field instead of its first-order truncation")
    common.add_argument("--step-log", action="store_true", help="Write the integrator step log per verification run")
    common.add_argument("--dump-flow", metavar="PATH", help="Write flow factor checkpoints as CSV theta,w,value")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging on stderr")

    parser = UsageParser(description="First-order averaging for piecewise cubic perturbations "
                                                 "of the weight-degree-2 quasi-homogeneous centre")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("validate", "Parse, check the centre condition and that g does not vanish"),
        ("coeffs", "Coefficient table k_ij as CSV i,j,value,err"),
        ("averaged", "Averaged polynomial h(z) = z^3 h1(z) as CSV n,coefficient"),
        ("roots", "Positive simple roots of h and the Descartes bound"),
        ("verify", "Return-map fixed points near each predicted root (JSON)"),
        ("pipeline", "coeffs -> averaged -> roots -> verify"),
    ]:
        sub.add_parser(name, parents=[common], help=text)
    orbit = sub.add_parser("orbit", parents=[common], help="Cartesian orbit as CSV t,x,y")
    orbit.add_argument("--x0", type=float, required=True)
    orbit.add_argument("--y0", type=float, required=True)
    orbit.add_argument("--t-max", type=float, required=True)
    repro = sub.add_parser("reproduce", parents=[common], help="Reproduce a built-in worked example")
    repro.add_argument("which", choices=["thm11", "thm12"])
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        settings = Settings.from_env().updated(
            quad_tol=args.tol, z_max=args.zmax, fast_symmetry=args.fast_symmetry or None)
    except ValueError as exc:
        print(f"  [FAIL] {exc}", file=sys.stderr)
        return EXIT_USAGE
    overrides = {"epsilons": args.eps}

    if args.command == "reproduce":
        return cmd_reproduce(args.which, settings, args.out, overrides, skip_verify=args.skip_verify)
    if not args.config:
        parser.error(f"{args.command} needs --config")

    if args.command == "validate":
        return cmd_validate(args.config, settings, args.out, overrides, dump_flow=args.dump_flow)
    if args.command == "coeffs":
        return cmd_coeffs(args.config, settings, args.out, overrides, printed_branch=args.printed_branch)
    if args.command == "averaged":
        return cmd_averaged(args.config, settings, args.out, overrides, printed_branch=args.printed_branch)
    if args.command == "roots":
        return cmd_roots(args.config, settings, args.out, overrides)
    if args.command == "verify":
        return cmd_verify(args.config, settings, args.out, overrides,
                          exact=args.exact_blowup, step_log=args.step_log)
    if args.command == "orbit":
        eps = args.eps[0] if args.eps else 0.0
        return cmd_orbit(args.config, settings, args.out, args.x0, args.y0, eps, args.t_max, overrides)
    return cmd_pipeline(args.config, settings, args.out, overrides,
                        skip_verify=args.skip_verify, exact=args.exact_blowup)


if __name__ == "__main__":
    sys.exit(main())
