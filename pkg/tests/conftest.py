import sys
from pathlib import Path

# make shared test helpers importable regardless of invocation directory
sys.path.insert(0, str(Path(__file__).parent))
