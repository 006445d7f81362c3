import sys

from specsynth.main import run_cli

if __name__ == "__main__":
    sys.exit(run_cli())
