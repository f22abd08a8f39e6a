import random

import pytest

from overlaysim.topology import TopologyConfig, generate_topology


@pytest.fixture
def small_topology():
    return generate_topology(
        TopologyConfig(num_themes=4, num_peers=40, vocab_size=12, expertise_size=6, seed=42)
    )


def random_topology_config(rng: random.Random) -> TopologyConfig:
    """Small random config for property-style sweeps."""
    themes = rng.randint(1, 5)
    return TopologyConfig(
        num_themes=themes,
        num_peers=rng.randint(themes, 50),
        vocab_size=rng.randint(8, 16),
        expertise_size=rng.randint(5, 8),
        vocab_overlap=rng.choice([0.0, 0.0, 0.25, 0.5]),
        seed=rng.getrandbits(32),
    )
