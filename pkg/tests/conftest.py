"""
公共夹具
"""
import pytest

from src.modules.norms import LinfNorm, LrNorm
from src.modules.witnesses import Partition


@pytest.fixture
def l1():
    return LrNorm(1.0)


@pytest.fixture
def l2():
    return LrNorm(2.0)


@pytest.fixture
def linf():
    return LinfNorm()


@pytest.fixture
def evens():
    return Partition.evens()
