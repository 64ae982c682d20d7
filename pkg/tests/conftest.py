import pytest

from bibifi.fixtures import bundles


@pytest.fixture(scope="session")
def oracle_securelog(tmp_path_factory):
    return bundles.built_oracle("securelog", tmp_path_factory.mktemp("oracle-securelog"))


@pytest.fixture(scope="session")
def oracle_atm(tmp_path_factory):
    return bundles.built_oracle("atm", tmp_path_factory.mktemp("oracle-atm"))


@pytest.fixture(scope="session")
def oracle_ehr(tmp_path_factory):
    return bundles.built_oracle("ehr", tmp_path_factory.mktemp("oracle-ehr"))


@pytest.fixture(scope="session")
def fixture_target(tmp_path_factory):
    """Build fixture bundles once per session, on demand."""
    cache = {}

    def get(name):
        if name not in cache:
            dest = tmp_path_factory.mktemp(f"fixture-{name}")
            cache[name] = bundles.built_fixture(name, dest)
        return cache[name]

    return get
