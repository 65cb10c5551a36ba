import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rkhspp._kernelops",
                ["src/rkhspp/_kernelops.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level="3",
    )
except ImportError:
    # Pure-Python fallback in rkhspp.kernelops is used when the
    # extension is unavailable.
    ext_modules = []

setup(ext_modules=ext_modules)
