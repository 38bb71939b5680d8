import sys

from pypcsp.cli import main

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

sys.exit(main())
