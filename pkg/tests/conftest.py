from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fullpolicy.fixtures import email_paragraph_policy, sample_policy
from fullpolicy.grading import build_vocabulary


@pytest.fixture(scope="session")
def email_policy():
    return email_paragraph_policy()


@pytest.fixture(scope="session")
def orderoo():
    return sample_policy()


@pytest.fixture(scope="session")
def orderoo_vocab(orderoo):
    return build_vocabulary(orderoo)


@pytest.fixture(scope="session")
def email_vocab(email_policy):
    return build_vocabulary(email_policy)
