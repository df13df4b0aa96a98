"""Build script for the optional compiled scoring kernel.

The BM25 posting-list accumulator in src/odqa/index/_scoring.pyx is compiled
to a C extension when a toolchain is available. The package works without it:
odqa.index.kernels falls back to the pure-Python twin at import time.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "odqa.index._scoring",
                ["src/odqa/index/_scoring.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
