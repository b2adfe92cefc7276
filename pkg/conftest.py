import os
import sys

# Tests import the `core` and `cli` packages from the repository root
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
