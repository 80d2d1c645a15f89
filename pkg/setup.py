import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "sparsetf._kernel._perspective_cy",
                ["src/sparsetf/_kernel/_perspective_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    # Pure-Python install still works; the numpy kernel is selected at import.
    ext_modules = []

setup(ext_modules=ext_modules)
