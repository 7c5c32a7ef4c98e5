"""Build script for the compiled neighbor-search kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs without it and falls back to the pure-numpy kernel at
import time (see ccmcausal._kernels).
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext = Extension(
        "ccmcausal._kernels._compiled",
        sources=["src/ccmcausal/_kernels/_compiled.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize(
        [ext], compiler_directives={"language_level": "3", "boundscheck": False}
    )
except ImportError as exc:  # pragma: no cover - build environment dependent
    sys.stderr.write(
        f"ccmcausal: building without the compiled kernel ({exc}); "
        "the pure-numpy fallback will be used\n"
    )

setup(ext_modules=ext_modules)
