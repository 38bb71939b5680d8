"""
Corpus-sized oracle suites.  They take minutes rather than seconds and only run with ``PYPCSP_ACCEPTANCE=1``.
"""
import os
import unittest

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

ENABLED = os.environ.get("PYPCSP_ACCEPTANCE") == "1"

acceptance = unittest.skipUnless(ENABLED, "set PYPCSP_ACCEPTANCE=1 to run the acceptance suites")
