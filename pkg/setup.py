import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# The kernel draws Beta/uniform variates through numpy's C API so that the
# compiled and pure-Python backends consume one PCG64 stream identically.
npy_random_lib = os.path.join(os.path.dirname(np.__file__), "random", "lib")

extensions = [
    Extension(
        "umabsim._kernels",
        ["src/umabsim/_kernels.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[npy_random_lib],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
