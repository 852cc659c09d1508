import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from bibagree import SynthConfig, generate


@pytest.fixture
def small_corpus():
    """200-record, 2-area corpus with both reviews on every record."""
    return generate(SynthConfig(n_institutions=20, seed=11))
