"""Entry points: plot_phase_curve <csv> <png> [--lambda-c json], etc.
Exit code 0 on success, 1 on malformed input."""

import argparse
import sys

from .io import FormatError
from . import plots


def _run(fn, *args):
    try:
        fn(*args)
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


def phase_curve_main(argv=None):
    ap = argparse.ArgumentParser(prog="plot_phase_curve")
    ap.add_argument("csv")
    ap.add_argument("png")
    ap.add_argument("--lambda-c", default=None,
                    help="lambda_c JSON report to shade the bracket")
    a = ap.parse_args(argv)
    return _run(plots.plot_phase_curve, a.csv, a.png, a.lambda_c)


def cluster_scatter_main(argv=None):
    ap = argparse.ArgumentParser(prog="plot_cluster_scatter")
    ap.add_argument("json")
    ap.add_argument("png")
    a = ap.parse_args(argv)
    return _run(plots.plot_cluster_scatter, a.json, a.png)


def growth_loglog_main(argv=None):
    ap = argparse.ArgumentParser(prog="plot_growth_loglog")
    ap.add_argument("csv")
    ap.add_argument("png")
    a = ap.parse_args(argv)
    return _run(plots.plot_growth_loglog, a.csv, a.png)


if __name__ == "__main__":
    sys.exit(phase_curve_main())
