"""Command-line entry point: ``tvsbl {run,validate,demo}``."""
import argparse
import json
import logging
import sys

from .bench import config_to_dict, demo_config, parse_config, run_experiment, validate_config
from .errors import ConfigurationError, OutputError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _common(p):
    p.add_argument("--output-dir", default=None, help="directory for the CSV files")
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--threads", type=int, default=None, help="worker threads")
    p.add_argument("--scale", type=float, default=1.0,
                   help="scale N and the nonzero counts of every scenario")


def build_parser():
    ap = argparse.ArgumentParser(prog="tvsbl", description=__doc__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the sweep described by a JSON config")
    p.add_argument("config")
    _common(p)
    p = sub.add_parser("validate", help="check a config and print it fully defaulted")
    p.add_argument("config")
    _common(p)
    p = sub.add_parser("demo", help="block / hybrid / random scenarios at desk scale")
    _common(p)
    p.add_argument("--trials", type=int, default=None, help="override the 50 demo trials")
    p.add_argument("--print-config", action="store_true",
                   help="print the demo config as JSON and exit")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = dict(output_dir=args.output_dir, master_seed=args.seed,
                     threads=args.threads, scale=args.scale)
    try:
        if args.command == "demo":
            data = demo_config()
            if args.print_config:
                print(json.dumps(data, indent=2))
                return EXIT_OK
            cfg = parse_config(data, trials=args.trials, **overrides)
        else:
            cfg = validate_config(args.config, **overrides)
        if args.command == "validate":
            print(json.dumps(config_to_dict(cfg), indent=2))
            return EXIT_OK
    except (ConfigurationError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        trial_path, agg_path = run_experiment(cfg)
    except (ConfigurationError, OutputError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(trial_path)
    print(agg_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
