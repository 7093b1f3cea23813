"""setuptools backend that ignores setup.py.

setup.py in this repository is an interactive helper script, not a packaging
manifest; all packaging metadata lives in pyproject.toml.
"""
from setuptools import build_meta as _orig


class _PyprojectOnlyBackend(_orig._BuildMetaBackend):
    def run_setup(self, setup_script="setup.py"):
        # A missing script makes setuptools fall back to a bare setup() call
        super().run_setup(setup_script="__no_setup_script__.py")


_BACKEND = _PyprojectOnlyBackend()

get_requires_for_build_wheel = _BACKEND.get_requires_for_build_wheel
get_requires_for_build_sdist = _BACKEND.get_requires_for_build_sdist
prepare_metadata_for_build_wheel = _BACKEND.prepare_metadata_for_build_wheel
build_wheel = _BACKEND.build_wheel
build_sdist = _BACKEND.build_sdist
get_requires_for_build_editable = _BACKEND.get_requires_for_build_editable
prepare_metadata_for_build_editable = _BACKEND.prepare_metadata_for_build_editable
build_editable = _BACKEND.build_editable
