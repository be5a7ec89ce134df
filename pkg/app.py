import sys

from graftlab.cli_io import run

if __name__ == "__main__":
    raise SystemExit(run(sys.argv[1:]))
