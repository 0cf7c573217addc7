"""Idiom-based Bayesian network modelling.

Models are written in the `.idbn` format, elaborated into a discrete Bayesian
network and queried observationally, interventionally or counterfactually.
"""

from pathlib import Path

from . import _idiombn
from ._idiombn import IdiombnError, Model, fixture_ids, templates

__all__ = ["IdiombnError", "Model", "fixture_ids", "load_fixture", "templates"]

# Wheels ship the fixture corpus inside the package; build-tree imports fall
# back to the source directory compiled into the extension.
_BUNDLED = Path(__file__).with_name("fixtures")


def load_fixture(fixture_id: str) -> Model:
    directory = str(_BUNDLED) if _BUNDLED.is_dir() else ""
    return _idiombn.load_fixture(fixture_id, directory)
