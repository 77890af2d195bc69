"""Builds the optional compiled kernel; the package works without it."""
import os

import numpy as np
from setuptools import setup

ext_modules = []
if os.environ.get("RABI_DPT_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("rabi_dpt._superop_ext", ["src/rabi_dpt/_superop_ext.pyx"],
                       include_dirs=[np.get_include()], extra_compile_args=["-O3"])],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
