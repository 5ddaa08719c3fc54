import os

from setuptools import setup, Extension

ext_modules = []
if not os.environ.get("PRODISO_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("prodiso._csearch", ["src/prodiso/_csearch.pyx"])],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
