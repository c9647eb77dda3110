import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SARPLAN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "sarplan.solver._kernel_c",
                    ["src/sarplan/solver/_kernel_c.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
