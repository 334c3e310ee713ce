import pytest

from anisodiff.harness import ExperimentConfig


@pytest.fixture
def experiment_config(tmpdir):
    """ Return factory of :class:`ExperimentConfig` writing into a temporary
    directory.
    """
    def create(experiment, **values):
        values.setdefault('output_dir', str(tmpdir.join(experiment)))
        return ExperimentConfig(experiment, **values)

    return create
