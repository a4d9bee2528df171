import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and os.environ.get("CURVETRAK_NO_EXT", "") in ("", "0"):
    ext_modules = cythonize(
        [
            Extension(
                "curvetrak._ckernel",
                ["src/curvetrak/_ckernel.pyx"],
                include_dirs=[numpy.get_include()],
                # bit-identical results with the pure-Python kernel need no FMA contraction
                extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
