import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# MASKSPREAD_NO_EXT=1 skips the compiled core; the package then runs on the
# pure-Python kernels.
if os.environ.get("MASKSPREAD_NO_EXT"):
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "maskspread._kernels",
                ["src/maskspread/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
