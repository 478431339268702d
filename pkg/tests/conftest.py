import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from graphene import Context, from_edge_list, kernels  # noqa: E402


@pytest.fixture(params=[1, 4], ids=["w1", "w4"])
def ctx(request):
    with Context(workers=request.param) as c:
        yield c


@pytest.fixture
def ctx1():
    with Context(workers=1) as c:
        yield c


@pytest.fixture(params=kernels.backends(), ids=lambda m: m.BACKEND)
def backend(request):
    return request.param


def make_graph(ctx, ids, edges, attrs=None, partitioner=None):
    verts = [(v, attrs[v] if attrs else 0) for v in ids]
    return from_edge_list(edges, verts, ctx=ctx, partitioner=partitioner)


@pytest.fixture
def criterion(record_property):
    """Register an acceptance criterion; ``info["detail"]`` may be filled in as it runs."""
    def start(n, title):
        info = {"n": n, "title": title, "detail": ""}
        record_property("acceptance", info)
        return info
    return start


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            for name, info in rep.user_properties:
                if name != "acceptance":
                    continue
                status = "PASS" if rep.passed else "FAIL"
                text = f"{status} criterion {info['n']}: {info['title']}"
                if info["detail"]:
                    text += f" [{info['detail']}]"
                lines.append((info["n"], text))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, text in sorted(lines):
            terminalreporter.write_line(text)
