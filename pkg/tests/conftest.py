import pytest

from lesionnet import recall
from lesionnet.kernels import available_backends, get_backend


@pytest.fixture(params=available_backends())
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    mod = get_backend(request.param)
    monkeypatch.setattr(recall, "backend", mod)
    return mod
