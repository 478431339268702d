import json

from graphene import kernels
from graphene.bench import bench_kernels, bench_optimizations
from graphene.cli import main


def test_kernel_bench_covers_every_backend():
    rows = bench_kernels(500, 1)
    names = {r["kernel"] for r in rows}
    assert {"hash64_array", "decode_uvarints", "dumps_many", "loads_many"} <= names
    for r in rows:
        for mod in kernels.backends():
            assert r[f"{mod.BACKEND}_s"] >= 0


def test_optimization_bench_shows_savings():
    rows = {(r["algorithm"], r["flag"], r["enabled"]): r for r in bench_optimizations(200, 1200)}
    pr_on = rows[("pagerank-20", "join_elimination", True)]["view_bytes"]
    pr_off = rows[("pagerank-20", "join_elimination", False)]["view_bytes"]
    assert pr_on < pr_off
    assert rows[("cc", "incremental", True)]["view_bytes"] < rows[("cc", "incremental", False)]["view_bytes"]
    scanned = {rows[("cc", "scan", m)]["edges_scanned"] for m in ("seq", "index", "auto")}
    assert len(scanned) == 1


def test_bench_command_json(capsys):
    assert main(["bench", "--vertices", "100", "--edges", "400", "--repeat", "1", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert set(data) == {"kernels", "optimizations"}
