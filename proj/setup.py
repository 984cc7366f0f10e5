"""Build the pybind11 extension through the project's CMake tree.

The CMake side stages the package under <build>/python/apdsim; this just
runs that build and copies the produced extension to where setuptools
expects it, so `pip install -e . --no-build-isolation` works offline.
"""

import os
import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        out = Path(self.get_ext_fullpath(ext.name)).resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)
        source = Path(__file__).resolve().parent
        subprocess.run(
            [
                "cmake",
                "-S", str(source),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DAPDSIM_BUILD_TESTS=OFF",
                "-DAPDSIM_BUILD_CLI=OFF",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            [
                "cmake",
                "--build", str(build_dir),
                "--target", "_core",
                f"-j{os.cpu_count() or 2}",
            ],
            check=True,
        )
        staged = build_dir / "python" / "apdsim"
        built = sorted(staged.glob("_core*"))
        if not built:
            raise RuntimeError(f"extension not produced in {staged}")
        out.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[0], out)


setup(
    ext_modules=[CMakeExtension("apdsim._core")],
    cmdclass={"build_ext": CMakeBuild},
)
