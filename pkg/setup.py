"""Build script: compiles the simulation kernel when Cython is available.

The package is fully functional without the extension (occlab.cachecore
falls back to the pure-Python kernel), so a failed extension build degrades
gracefully instead of blocking installation.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("occlab._simcore", ["src/occlab/_simcore.pyx"])],
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
