"""Command line: one subcommand per figure kind.

    plotkit <kind> RUN_DIR [-o OUTPUT] [--times T1,T2,...]

Exit codes: 0 success, 1 usage error, 2 schema mismatch in the run files.
"""

from __future__ import annotations

import sys
from pathlib import Path

from .figures import FIGURE_KINDS, PlotJob, render
from .runs import SchemaError

_USAGE = f"""usage: plotkit <kind> RUN_DIR [-o OUTPUT] [--times T1,T2,...]

kinds: {', '.join(FIGURE_KINDS)}
--times applies to snapshot3d (default: first and last sample)
"""


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help", "help"):
        print(_USAGE)
        return 0
    kind = argv.pop(0)
    run_dir = None
    output = None
    times = ()
    try:
        if kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {kind!r}")
        i = 0
        while i < len(argv):
            arg = argv[i]
            if arg in ("-o", "--output"):
                output = argv[i + 1]
                i += 2
            elif arg == "--times":
                times = tuple(float(p) for p in argv[i + 1].split(","))
                i += 2
            elif arg.startswith("-"):
                raise ValueError(f"unknown option {arg!r}")
            else:
                if run_dir is not None:
                    raise ValueError("exactly one run directory expected")
                run_dir = arg
                i += 1
        if run_dir is None:
            raise ValueError("missing run directory")
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if output is None:
        output = str(Path(run_dir) / f"{kind}.png")
    try:
        path = render(PlotJob(run_dir=run_dir, kind=kind, output=output,
                              snapshot_times=times))
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
