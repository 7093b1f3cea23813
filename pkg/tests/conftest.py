import os
import sys

import numpy as np
import pytest

# Repo modules live at the root, next to this tests/ folder
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from imgio import GrayImage, full_mask  # noqa: E402
from synthetic import gen_corpus  # noqa: E402


def make_step_image(width=32, height=32, step=16, low=0, high=255):
    pixels = np.full((height, width), low, dtype=np.uint8)
    pixels[:, step:] = high
    return GrayImage(pixels)


def make_rectangle_outline(width=64, height=64, inset=16, thickness=2, value=220):
    pixels = np.full((height, width), 30, dtype=np.uint8)
    pixels[inset:height - inset, inset:width - inset] = value
    pixels[inset + thickness:height - inset - thickness, inset + thickness:width - inset - thickness] = 30
    return GrayImage(pixels)


def make_corner_image(size=48, value=255):
    pixels = np.zeros((size, size), dtype=np.uint8)
    pixels[size // 2:, size // 2:] = value
    return GrayImage(pixels)


@pytest.fixture
def step_image():
    return make_step_image()


@pytest.fixture
def rectangle_outline():
    image = make_rectangle_outline()
    return image, full_mask(image)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def inter_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("inter")
    return root, gen_corpus(root, "inter", 4, seed=3)


@pytest.fixture(scope="session")
def intra_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("intra")
    return root, gen_corpus(root, "intra", 4, seed=3)


def pytest_addoption(parser):
    parser.addoption("--surveillance-root", default=None,
                     help="root of a local surveillance vehicle dataset (inter/ and intra/ sub-folders)")
