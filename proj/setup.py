from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

# The extension compiles the C++ core directly; CMake stays the build system
# for the CLI and the C++ test suites.
core_sources = [
    "python/crslab/_core.cpp",
    "src/model.cpp",
    "src/geometry.cpp",
    "src/lp.cpp",
    "src/ocrs.cpp",
    "src/rcrs.cpp",
    "src/guarantees.cpp",
    "src/reduction.cpp",
    "src/oracles.cpp",
    "src/report.cpp",
    "src/cli.cpp",
]

setup(
    packages=["crslab"],
    package_dir={"crslab": "python/crslab"},
    ext_modules=[
        Pybind11Extension(
            "crslab._core",
            core_sources,
            include_dirs=["include", "vendor"],
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
