import sys
from pathlib import Path

import pytest

# make `import oracles` work regardless of how pytest was invoked
sys.path.insert(0, str(Path(__file__).parent))

from leafbite import synth


@pytest.fixture(scope="session")
def plain_leaf():
    """One deterministic leaf with holes and speckles, no bites."""
    spec = synth.random_leaf_spec(seed=7, max_holes=3, max_speckles=3)
    image, truth = synth.generate_leaf(spec)
    return spec, image, truth


@pytest.fixture(scope="session")
def bite_leaf():
    """One deterministic leaf with two margin bites."""
    spec = synth.random_leaf_spec(seed=11, bites=2, max_holes=0, max_speckles=0)
    image, truth = synth.generate_leaf(spec)
    return spec, image, truth
