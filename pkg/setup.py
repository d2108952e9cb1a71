import numpy
from setuptools import setup
from setuptools.extension import Extension

from Cython.Build import cythonize

extensions = [
    Extension(
        "qcmoments._kernels",
        ["src/qcmoments/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
