from pathlib import Path

import pytest

from pregma.gio import load_grammar
from pregma.pcp import load_pcp
from pregma.pushdown import load_pds

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def running():
    """Coin walk over a self-similar double branch; the workhorse grammar."""
    return load_grammar(CORPUS / "running.gg")


@pytest.fixture(scope="session")
def dag():
    return load_grammar(CORPUS / "dag.gg")


@pytest.fixture(scope="session")
def updrift():
    return load_grammar(CORPUS / "updrift.gg")


@pytest.fixture(scope="session")
def critical():
    """Fair walk with a double root at 1; almost-sure queries stay unknown."""
    return load_grammar(CORPUS / "critical.gg")


@pytest.fixture(scope="session")
def pds_plain():
    return load_pds(CORPUS / "pds_example.pds")


@pytest.fixture(scope="session")
def pds_prob():
    return load_pds(CORPUS / "pds_example_prob.pds")


@pytest.fixture(scope="session")
def pcp_solvable():
    return [load_pcp(CORPUS / f"pcp_s{i}.pcp") for i in (1, 2, 3)]


@pytest.fixture(scope="session")
def pcp_unsolvable():
    return [load_pcp(CORPUS / f"pcp_u{i}.pcp") for i in (1, 2, 3)]
