import subprocess
import sys
from pathlib import Path

import pytest

from thimac import SourceDocument, parse

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"


def parse_corpus(name: str):
    path = CORPUS / f"{name}.tm"
    result = parse(SourceDocument(path.read_text(), str(path)))
    assert result.ok, [d.render(name) for d in result.diagnostics]
    return result


@pytest.fixture(scope="session")
def library():
    return parse_corpus("library")


@pytest.fixture(scope="session")
def toast():
    return parse_corpus("toast")


@pytest.fixture(scope="session")
def picnic():
    return parse_corpus("picnic")


@pytest.fixture(scope="session")
def take():
    return parse_corpus("take")


@pytest.fixture(scope="session")
def signal():
    return parse_corpus("signal")


@pytest.fixture(scope="session")
def corpus_dir():
    return CORPUS


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN


def run_cli(*args: str, cwd: Path = ROOT) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "thimac", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


@pytest.fixture(scope="session")
def cli():
    return run_cli
