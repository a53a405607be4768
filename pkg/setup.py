import os

from setuptools import Extension, setup

# The compiled refinement core is optional: without a C toolchain (or with
# FAIRBOX_NO_EXT=1) the package falls back to the pure-Python twin at import.
ext_modules = []
if os.environ.get("FAIRBOX_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "fairbox._refine_c",
                    ["src/fairbox/_refine_c.pyx"],
                    extra_compile_args=["-O2"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
