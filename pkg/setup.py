"""Build script for the compiled search core.

The extension is optional: when Cython or a compiler is unavailable the
package still installs and falls back to the pure-Python engine.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("MCTS_LAB_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "mcts_lab._core",
                    ["src/mcts_lab/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    language="c++",
                    extra_compile_args=["-O3", "-ffp-contract=off", "-std=c++17"],
                )
            ],
            compiler_directives=dict(
                language_level=3,
                boundscheck=False,
                wraparound=False,
                cdivision=True,
                initializedcheck=False,
            ),
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
