import pytest

import treeroute.treevar as treevar


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "no_debug_checks: leave the per-mutation tree validation off "
        "(timed solver comparisons would be distorted by it)",
    )


@pytest.fixture(autouse=True)
def full_tree_checks(request):
    """Run the suite with invariant and order-independence checks on."""
    if request.node.get_closest_marker("no_debug_checks"):
        yield
        return
    old = treevar.DEBUG_CHECKS
    treevar.DEBUG_CHECKS = True
    yield
    treevar.DEBUG_CHECKS = old


@pytest.fixture
def triangle():
    from treeroute import load_graph

    return load_graph("3 3\n0 1\n1 2\n0 2\n")
