""" Command line entry point, see `python run.py --help`

Examples:

    python run.py example
    python run.py run --alg 5 --seed 7 --out output/run.json --trajectory output/trajectory.csv
    python run.py compare --runs 100 --workers 8 --out output/compare.csv
    python run.py sweep --config example-experiments.yaml --out output/gamma.csv
"""
import sys

from uie.cli import main


if __name__ == "__main__":
    sys.exit(main())
