"""Build script for the compiled kernels; the package works without them."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fall back to the Python kernels
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("hogpred._kernels", ["src/hogpred/_kernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
