# run_cli.py
"""
Launcher for the ptkdv command line from a source checkout.
"""

import sys
from pathlib import Path

# Add the repository root to the Python path
repo_dir = Path(__file__).parent
sys.path.insert(0, str(repo_dir))

from ptkdv.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
