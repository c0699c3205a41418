"""
Shared fixtures: a small model configuration, seeded streams and small tables.
"""

import pytest

from cli import RunConfig
from datapipe import SynthSpec, Sinusoid, EventSpec, synth_generate, write_flows
from evaluation import ExperimentSettings
from fusion import ModelConfig
from numerics import Rng


@pytest.fixture
def rng():
    return Rng(42, "tests")


@pytest.fixture
def small_config():
    """W=16, F=3, N=4, M=4, K=5, dropout off."""
    return ModelConfig(window=16, features=3, state_dim=4, fusion_dim=4, spectral_bins=5, dropout=0.0)


@pytest.fixture
def small_batch(rng):
    return rng.normal(size=(6, 16, 3))


@pytest.fixture
def small_table():
    """600 rows, 3 features, burst anomalies."""
    spec = SynthSpec(
        length=600,
        features=3,
        baselines=(1.0, 0.5, 2.0),
        sinusoids=(Sinusoid(0.3, 48.0),),
        ar_phi=0.5,
        ar_sigma=0.05,
        events=(EventSpec("burst", rate=0.1, magnitude=1.5, duration=8),),
        seed=7,
    )
    return synth_generate(spec)


@pytest.fixture
def flows_csv(tmp_path):
    path = tmp_path / "flows.csv"
    path.write_text(
        "bytes,packets,proto,label\n"
        "10,1,tcp,0\n"
        "20,2,udp,0\n"
        "30,3,tcp,1\n"
        "40,4,tcp,0\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def quick_settings():
    """Settings small enough for a full pipeline run in well under a second."""
    return ExperimentSettings(
        window_w=8, hop=4, state_dim=4, fusion_dim=4, epochs=2, batch_size=16, dropout=0.0, smote_k=3
    )


QUICK_CONFIG = """\
# small model for fast end-to-end runs
window_w = 8
hop = 4
state_dim = 4
fusion_dim = 4
epochs = 2
batch_size = 16
dropout = 0.0
smote_k = 3
seeds = 1,2
variants = full,no_both
"""


@pytest.fixture
def quick_run_config():
    return RunConfig(
        window_w=8, hop=4, state_dim=4, fusion_dim=4, epochs=2, batch_size=16, dropout=0.0, smote_k=3,
        seeds=[1, 2], variants=["full", "no_both"],
    )


@pytest.fixture
def quick_config_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(QUICK_CONFIG + f"output_dir = {tmp_path / 'runs'}\n", encoding="utf-8")
    return path


@pytest.fixture
def small_csv(tmp_path, small_table):
    return write_flows(small_table, tmp_path / "small.csv")
