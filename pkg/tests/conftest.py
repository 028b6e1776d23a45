from importlib import resources

import pytest

from mcforge import detsys


def bundled(name: str) -> str:
    return resources.files("mcforge").joinpath("data", name).read_text()


@pytest.fixture
def essential_system():
    return detsys.parse_system(bundled("cartan_essential.dsys"))


@pytest.fixture
def translation_system():
    return detsys.parse_system(bundled("intransitive_translation.dsys"))
