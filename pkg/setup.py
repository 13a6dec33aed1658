import os

from setuptools import Extension, setup

# The compiled kernel is optional: the package falls back to the numpy
# implementation in locsketch._kernels_py when the extension is absent.
# Set LOCSKETCH_PURE=1 to skip building it.
ext_modules = []
if not os.environ.get("LOCSKETCH_PURE"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "locsketch._kernels",
                    ["src/locsketch/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
