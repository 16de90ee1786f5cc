"""Builds the optional compiled LCS kernel.

The package works without the extension (a pure-Python kernel is selected
at import time); set MAQA_PURE_PYTHON=1 to skip the build entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MAQA_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("maqa._lcs_c", ["src/maqa/_lcs_c.pyx"])],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
