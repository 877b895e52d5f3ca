import pytest

import fieldbridge as fb


@pytest.fixture
def session():
    s = fb.open_session()
    yield s
    for lease in s.active_leases():
        fb.release_lease(lease)
    if s.initialized:
        fb.close_session(s)
