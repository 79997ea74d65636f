from __future__ import annotations

from pathlib import Path

import pytest

from pplserve.pretrain import pretrain

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> str:
    """Train the offline toy model once per session; all tests share it."""
    out = tmp_path_factory.mktemp("tiny-model")
    pretrain(DATA / "tiny_corpus.txt", out, epochs=40, seed=0)
    return str(out)
