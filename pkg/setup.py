from setuptools import Extension, setup
from Cython.Build import cythonize

ext = Extension(
    "noiseaid.kernels._chen_ext",
    ["src/noiseaid/kernels/_chen_ext.pyx"],
    extra_compile_args=["-O3"],
)

setup(ext_modules=cythonize(ext, language_level=3))
