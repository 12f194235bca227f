import logbook
import pytest


@pytest.fixture(scope='session', autouse=True)
def null_handler():
    handler = logbook.NullHandler()
    handler.push_application()
    yield handler
    handler.pop_application()
