"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a pure-Python
kernel backend is selected at import time); the build therefore degrades
gracefully when Cython or a C compiler is unavailable.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from setuptools import Extension
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "delaysim._kernels",
                ["src/delaysim/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError as exc:  # pragma: no cover - build-environment dependent
    import sys

    print(f"delaysim: building without compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
