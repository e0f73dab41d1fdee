# main.py
"""
Command-line interface for the delayed-CSI capacity toolkit
Use this for single runs or batch sweeps over model files
"""

import logging
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent))

from src.config.config import Config
from src.cli.commands import run


def print_usage():
    print("\n💡 Usage Options:")
    print("  validate          --model m.json                : Check a model file")
    print("  sweep-delay       --model m.json --d 0..20      : Optimal sum rate versus delay")
    print("  region            --model m.json --alpha-grid 0:4:0.1 : Region frontier")
    print("  power-policy      --model m.json [--alpha 2]    : Optimal powers with KKT report")
    print("  simulate          --model m.json --n 100000     : Occupancy trials and plug-in rates")
    print("  multiletter-check --model m.json --horizon 3    : Block-length bounds")
    print("\n💡 TIP: ready-made models live in models/, add --svg for plots and --save for a JSON report")


if __name__ == "__main__":
    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if len(sys.argv) == 1:
        print_usage()
        sys.exit(0)
    sys.exit(run(sys.argv[1:]))
