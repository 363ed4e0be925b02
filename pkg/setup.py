import os

import numpy as np
from setuptools import Extension, setup

# BETRUN_NO_EXT=1 installs the pure-Python fallback only.
if os.environ.get("BETRUN_NO_EXT"):
    ext_modules = []
else:
    from Cython.Build import cythonize

    args = ["-O3", "-ffp-contract=off"]
    ext_modules = cythonize(
        [
            Extension("betrun.tsp._kernel", ["src/betrun/tsp/_kernel.pyx"],
                      include_dirs=[np.get_include()], extra_compile_args=args),
            Extension("betrun.mvc._kernel", ["src/betrun/mvc/_kernel.pyx"],
                      include_dirs=[np.get_include()], extra_compile_args=args),
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
