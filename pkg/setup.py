"""Build hook for the optional compiled kernels.

If Cython (or a working compiler) is unavailable the build falls back to the
pure-numpy kernels; the package selects between them at import time.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/critwave/_core.pyx",
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
except Exception as exc:  # pragma: no cover - fallback path
    print(f"critwave: skipping compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
