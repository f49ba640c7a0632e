from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [Extension("jacaranda._ckernels", ["src/jacaranda/_ckernels.pyx"])],
        language_level=3,
    )
)
